"""Aggregation of first-failure results into robustness metrics.

AFFC (average first failure coefficient) is the arithmetic mean of the
per-image FFC values for one adverse condition; the overall score is the
unweighted mean across the seven conditions. Censored runs (no failure
through strength 1.0) contribute their ffc of 1.0 and are counted
separately so saturation stays visible.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from .augment import ALL_OPERATORS, OperatorKind
from .errors import AggregationError, ComparisonError
from .search import FfcResult

__all__ = [
    "ConditionSummary",
    "ModelSummary",
    "ConfidenceCurve",
    "CurvePoint",
    "ModelComparison",
    "affc",
    "std_dev",
    "overall_affc",
    "summarize_condition",
    "build_model_summary",
    "confidence_curve",
    "compare",
]


def affc(ffcs: list[float]) -> float:
    """Arithmetic mean of first failure coefficients."""
    if not ffcs:
        raise AggregationError("affc of an empty result set")
    for v in ffcs:
        if not 0.0 < v <= 1.0:
            raise AggregationError(f"ffc outside (0, 1]: {v}")
    return sum(ffcs) / len(ffcs)


def std_dev(ffcs: list[float]) -> float:
    """Sample standard deviation (n-1 denominator); 0.0 for a single value."""
    if not ffcs:
        raise AggregationError("std_dev of an empty result set")
    if len(ffcs) == 1:
        return 0.0
    return statistics.stdev(ffcs)


@dataclass(frozen=True)
class ConditionSummary:
    operator: OperatorKind
    affc: float
    std_dev: float
    n: int
    censored_count: int


@dataclass(frozen=True)
class ModelSummary:
    model_id: str
    per_condition: tuple[ConditionSummary, ...]
    overall_affc: float


@dataclass(frozen=True)
class CurvePoint:
    strength: float
    mean_confidence: float
    n: int


@dataclass(frozen=True)
class ConfidenceCurve:
    operator: OperatorKind
    model_id: str
    points: tuple[CurvePoint, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ModelComparison:
    """Per-condition and overall AFFC deltas, sign convention a - b."""

    model_a: str
    model_b: str
    per_condition: dict[OperatorKind, float]
    overall_delta: float


def summarize_condition(operator: OperatorKind, results: list[FfcResult]) -> ConditionSummary:
    if not results:
        raise AggregationError(f"no results for condition {operator}")
    for r in results:
        if r.operator != operator:
            raise AggregationError(f"result for {r.operator} mixed into condition {operator}")
    ffcs = [r.ffc for r in results]
    return ConditionSummary(
        operator=OperatorKind(operator),
        affc=affc(ffcs),
        std_dev=std_dev(ffcs),
        n=len(ffcs),
        censored_count=sum(1 for r in results if r.censored),
    )


def overall_affc(per_condition: list[ConditionSummary]) -> float:
    """Unweighted mean over exactly the seven adverse conditions."""
    ops = [s.operator for s in per_condition]
    if sorted(ops) != sorted(ALL_OPERATORS):
        raise AggregationError(
            f"expected one summary per operator {[o.value for o in ALL_OPERATORS]}, "
            f"got {[o.value for o in ops]}"
        )
    return sum(s.affc for s in per_condition) / len(per_condition)


def build_model_summary(model_id: str, per_condition: list[ConditionSummary]) -> ModelSummary:
    """Bundle per-condition summaries; overall is the unweighted mean.

    With the default full operator set this is the seven-condition
    overall score; operator-subset campaigns average what they ran.
    """
    if not per_condition:
        raise AggregationError("model summary needs at least one condition")
    ops = [s.operator for s in per_condition]
    if len(set(ops)) != len(ops):
        raise AggregationError("duplicate condition in model summary")
    overall = sum(s.affc for s in per_condition) / len(per_condition)
    return ModelSummary(model_id=model_id, per_condition=tuple(per_condition), overall_affc=overall)


def confidence_curve(
    results: list[FfcResult], grid: list[float], *, operator: OperatorKind, model_id: str
) -> ConfidenceCurve:
    """Mean matched-detection confidence per grid strength.

    Requires full-sweep traces (every result probed at every grid
    strength); a missing detection or a failed match contributes
    confidence 0.
    """
    if not results:
        raise AggregationError("confidence curve over an empty result set")
    by_strength: list[list[float]] = [[] for _ in grid]
    for r in results:
        conf_at = {entry.strength: entry.confidence for entry in r.trace}
        for idx, s in enumerate(grid):
            if s not in conf_at:
                raise AggregationError(
                    f"trace for {r.image_id} missing strength {s}; "
                    "confidence curves need exhaustive sweeps"
                )
            c = conf_at[s]
            by_strength[idx].append(0.0 if c is None else c)
    points = tuple(
        CurvePoint(strength=s, mean_confidence=sum(vals) / len(vals), n=len(vals))
        for s, vals in zip(grid, by_strength)
    )
    return ConfidenceCurve(operator=OperatorKind(operator), model_id=model_id, points=points)


def compare(a: ModelSummary, b: ModelSummary) -> ModelComparison:
    """Per-condition and overall AFFC deltas (a minus b)."""
    ops_a = {s.operator: s for s in a.per_condition}
    ops_b = {s.operator: s for s in b.per_condition}
    if set(ops_a) != set(ops_b):
        raise ComparisonError(
            f"operator sets differ: {sorted(o.value for o in ops_a)} vs "
            f"{sorted(o.value for o in ops_b)}"
        )
    deltas = {op: ops_a[op].affc - ops_b[op].affc for op in ops_a}
    return ModelComparison(
        model_a=a.model_id,
        model_b=b.model_id,
        per_condition=deltas,
        overall_delta=a.overall_affc - b.overall_affc,
    )
