"""Exclusion-tree synthesis, copy scheduling and multi-copy plans."""

from .plan import Strategy, plan_distinguish, plan_to_json, strategy_from_plan
from .schedule import (BoundReport, CopySchedule, EpsilonSchedule, ExclusionStage, bound_report, copy_schedule,
                       epsilon_schedule, exclusion_schedule, guarantee_copies)
from .synthesis import greedy_exclusion, synthesize_exclusion
from .tree import REST, Leaf, MeasurementSpec, Node, ProtocolTree

__all__ = [
    "REST", "Leaf", "MeasurementSpec", "Node", "ProtocolTree",
    "synthesize_exclusion", "greedy_exclusion",
    "ExclusionStage", "CopySchedule", "BoundReport", "EpsilonSchedule",
    "exclusion_schedule", "guarantee_copies", "copy_schedule", "bound_report", "epsilon_schedule",
    "Strategy", "plan_distinguish", "plan_to_json", "strategy_from_plan",
]
