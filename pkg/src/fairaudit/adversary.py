"""Gerrymandering attacks and the individual-fairness violation detector.

Two constructions show how group-fairness verdicts can be held fixed while
individuals are treated unfairly:

* the reservoir attack hires hidden qualified candidates of one group,
  splitting the reservoir so the group's FNR is preserved as an exact
  integer identity (separation survives; independence breaks), and
* the swap attack exchanges the predictions of a lower-scored false negative
  and a higher-scored true positive inside one group, leaving every confusion
  matrix cell unchanged.

Both are exposed by the Lipschitz check: a prediction metric D bounded by a
scaled score metric d, with every violating pair reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .confusion import ConfusionMatrix, Dataset, GroupedConfusion
from .distributions import EPS_DEFAULT
from .errors import Infeasible, InputError, PreconditionError
from .measures import MeasureVerdict, independence, separation


@dataclass(frozen=True)
class ReservoirPlan:
    """Split of a reservoir of ``z`` qualified candidates into ``z_plus``
    hired and ``z_minus`` rejected, sized so the target group's TP:FN ratio
    is exactly preserved."""

    target_group: str
    z: int
    z_plus: int
    z_minus: int

    def __post_init__(self) -> None:
        if self.z_plus < 0 or self.z_minus < 0:
            raise InputError("reservoir split must be nonnegative")
        if self.z != self.z_plus + self.z_minus:
            raise InputError("z must equal z_plus + z_minus")


@dataclass(frozen=True)
class ReservoirAttackResult:
    plan: ReservoirPlan
    before: GroupedConfusion
    after: GroupedConfusion
    separation_before: MeasureVerdict
    separation_after: MeasureVerdict
    independence_before: MeasureVerdict
    independence_after: MeasureVerdict


@dataclass(frozen=True)
class SwapAttackResult:
    swapped_pair: tuple[str, str]
    score_gap: float
    before: Dataset
    after: Dataset


@dataclass(frozen=True)
class LipschitzViolation:
    """A pair whose prediction distance exceeds its individual distance."""

    id_a: str
    id_b: str
    individual_distance: float
    prediction_distance: float
    margin: float

    def __post_init__(self) -> None:
        if self.margin <= 0:
            raise InputError("a violation requires margin > 0")


@dataclass(frozen=True)
class LipschitzReport:
    violations: tuple[LipschitzViolation, ...]
    skipped: tuple[str, ...]


# ---------------------------------------------------------------------------
# Reservoir attack
# ---------------------------------------------------------------------------


def reservoir_attack(
    g: GroupedConfusion, target: str, z_max: int, eps: float = EPS_DEFAULT
) -> ReservoirAttackResult:
    """Hire from a hidden reservoir of the target group without disturbing
    separation.

    Finds the smallest z <= z_max admitting an integer split
    z_plus = a * z / (a + c); the target matrix becomes
    (a + z_plus, b, c + z_minus, d), which preserves the group's FNR as an
    exact cross-multiplied identity and leaves other groups untouched. The
    group's selection rate rises whenever z_plus > 0, so an independence
    verdict that held exactly before fails afterwards.
    """
    m = g[target]
    positives = m.a + m.c
    if positives == 0:
        raise PreconditionError(f"target group {target!r} has no positive-label records")
    sep_before = separation(g, eps)
    if sep_before.holds is not True:
        raise PreconditionError("separation must hold before the reservoir attack")
    divisor = positives // math.gcd(m.a, positives)
    if divisor > z_max:
        raise Infeasible(
            f"z_plus = a*z/(a+c) = {m.a}*z/{positives} is integral only when z is a "
            f"multiple of {divisor}, which exceeds z_max={z_max}"
        )
    z = divisor
    z_plus = m.a * z // positives
    plan = ReservoirPlan(target_group=target, z=z, z_plus=z_plus, z_minus=z - z_plus)
    after = g.replace(
        target, ConfusionMatrix(m.a + plan.z_plus, m.b, m.c + plan.z_minus, m.d)
    )
    return ReservoirAttackResult(
        plan=plan,
        before=g,
        after=after,
        separation_before=sep_before,
        separation_after=separation(after, eps),
        independence_before=independence(g, eps),
        independence_after=independence(after, eps),
    )


# ---------------------------------------------------------------------------
# Swap attack
# ---------------------------------------------------------------------------


def swap_attack(ds: Dataset, group: str) -> SwapAttackResult:
    """Exchange the predictions of a false negative and a better-scored true
    positive in one group.

    Confusion matrices are unchanged cell for cell, so every group-fairness
    verdict is unchanged, yet the swapped pair violates the Lipschitz
    condition whenever its scaled score gap is below 1. The attacked pair
    maximizes the score gap, ties broken by id order.
    """
    members = [rec for rec in ds.records if rec.group == group]
    if not members:
        raise InputError(f"group {group!r} has no records")
    unscored = [rec.id for rec in members if rec.score is None]
    if unscored:
        raise PreconditionError(
            f"group {group!r} has unscored records: {sorted(unscored)}"
        )
    scores = {rec.id: float(rec.score) for rec in members if rec.score is not None}
    false_negatives = [rec for rec in members if rec.y and not rec.r]
    true_positives = [rec for rec in members if rec.y and rec.r]
    candidates = [
        (scores[star.id] - scores[rec.id], rec.id, star.id)
        for rec in false_negatives
        for star in true_positives
        if scores[star.id] > scores[rec.id]
    ]
    if not candidates:
        raise Infeasible(
            f"group {group!r} has no false negative with a higher-scored true positive"
        )
    candidates.sort(key=lambda item: (-item[0], item[1], item[2]))
    gap, x_id, star_id = candidates[0]
    after = ds.with_predictions({x_id: True, star_id: False})
    return SwapAttackResult(
        swapped_pair=(x_id, star_id),
        score_gap=gap,
        before=ds,
        after=after,
    )


# ---------------------------------------------------------------------------
# Individual fairness
# ---------------------------------------------------------------------------


def lipschitz_violations(ds: Dataset, scale: float = 1.0) -> LipschitzReport:
    """Find all pairs violating D(prediction) <= d(individuals).

    d(x, y) is the absolute score difference divided by ``scale``; D is the
    discrete metric on binary predictions (0 when equal, 1 otherwise).
    Records without scores are skipped and reported. Violations are sorted by
    descending margin, then by id pair.
    """
    if scale <= 0:
        raise InputError(f"scale must be positive, got {scale!r}")
    scored = sorted(
        (rec for rec in ds.records if rec.score is not None), key=lambda rec: rec.id
    )
    skipped = tuple(sorted(rec.id for rec in ds.records if rec.score is None))
    violations: list[LipschitzViolation] = []
    for i, first in enumerate(scored):
        for second in scored[i + 1 :]:
            prediction_distance = 0.0 if first.r == second.r else 1.0
            individual_distance = abs(float(first.score) - float(second.score)) / scale
            if prediction_distance > individual_distance:
                violations.append(
                    LipschitzViolation(
                        id_a=first.id,
                        id_b=second.id,
                        individual_distance=individual_distance,
                        prediction_distance=prediction_distance,
                        margin=prediction_distance - individual_distance,
                    )
                )
    violations.sort(key=lambda v: (-v.margin, v.id_a, v.id_b))
    return LipschitzReport(violations=tuple(violations), skipped=skipped)
