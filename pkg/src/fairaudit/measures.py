"""The three group-fairness measures over grouped confusion matrices.

Each measure has two equivalent routes:

* the confusion-matrix route compares exact per-group rates
  (independence: selection rate; sufficiency: PPV and NPV;
  separation: FPR and FNR), and
* the distributional route checks the defining (conditional) independence
  on the joint of (A, Y, R).

A verdict holds when the largest pairwise gap stays within ``eps``. Any
undefined constituent rate makes the verdict NOT-COMPARABLE (``holds`` and
``disparity`` are ``None``), which is deliberately neither a pass nor a fail.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .confusion import GroupedConfusion
from .distributions import EPS_DEFAULT, FiniteJoint, ci_deviation
from .errors import InputError, PreconditionError

INDEPENDENCE = "independence"
SUFFICIENCY = "sufficiency"
SEPARATION = "separation"
MEASURES = (INDEPENDENCE, SUFFICIENCY, SEPARATION)


@dataclass(frozen=True)
class MeasureVerdict:
    """Result of evaluating one fairness measure.

    ``disparity`` is the maximum over the component gaps, or ``None`` when the
    measure is NOT-COMPARABLE. ``witnesses`` names the group pair attaining
    the maximum gap.
    """

    measure: str
    disparity: Fraction | float | None
    component_gaps: Mapping[str, Fraction | float | None]
    holds: bool | None
    witnesses: tuple[str, str] | None
    eps: float = EPS_DEFAULT

    def __post_init__(self) -> None:
        object.__setattr__(self, "component_gaps", dict(self.component_gaps))

    @property
    def comparable(self) -> bool:
        return self.holds is not None


def _require_groups(g: GroupedConfusion) -> None:
    if len(g.groups) < 2:
        raise PreconditionError(
            f"fairness measures need at least two groups, got {g.groups}"
        )


def _max_pairwise_gap(
    values: Mapping[str, Fraction],
) -> tuple[Fraction, tuple[str, str]]:
    """Largest |difference| over group pairs; first maximizing pair wins."""
    best: Fraction | None = None
    pair: tuple[str, str] | None = None
    for g1, g2 in itertools.combinations(values, 2):
        gap = abs(values[g1] - values[g2])
        if best is None or gap > best:
            best, pair = gap, (g1, g2)
    assert best is not None and pair is not None
    return best, pair


def _rate_verdict(
    measure: str,
    g: GroupedConfusion,
    components: Mapping[str, str],
    eps: float,
) -> MeasureVerdict:
    """Evaluate a measure from named per-group rate attributes.

    ``components`` maps a gap label to the :class:`ConfusionMatrix` attribute
    holding the rate, e.g. ``{"ppv_gap": "ppv"}``.
    """
    _require_groups(g)
    gaps: dict[str, Fraction | None] = {}
    witnesses: dict[str, tuple[str, str]] = {}
    for label, attribute in components.items():
        rates = {group: getattr(m, attribute) for group, m in g.matrices.items()}
        if any(rate is None for rate in rates.values()):
            gaps[label] = None
            continue
        gaps[label], witnesses[label] = _max_pairwise_gap(rates)
    if any(gap is None for gap in gaps.values()):
        return MeasureVerdict(measure, None, gaps, None, None, eps)
    disparity = Fraction(0)
    winner: str | None = None
    for label in components:
        gap = gaps[label]
        assert gap is not None
        if winner is None or gap > disparity:
            disparity, winner = gap, label
    assert winner is not None
    return MeasureVerdict(
        measure,
        disparity,
        gaps,
        disparity <= eps,
        witnesses[winner],
        eps,
    )


def independence(g: GroupedConfusion, eps: float = EPS_DEFAULT) -> MeasureVerdict:
    """Equal selection rates (a+b)/N across groups."""
    return _rate_verdict(
        INDEPENDENCE, g, {"selection_rate_gap": "selection_rate"}, eps
    )


def sufficiency(g: GroupedConfusion, eps: float = EPS_DEFAULT) -> MeasureVerdict:
    """Equal PPV and equal NPV across groups."""
    return _rate_verdict(SUFFICIENCY, g, {"ppv_gap": "ppv", "npv_gap": "npv"}, eps)


def separation(g: GroupedConfusion, eps: float = EPS_DEFAULT) -> MeasureVerdict:
    """Equal FPR and equal FNR across groups."""
    return _rate_verdict(SEPARATION, g, {"fpr_gap": "fpr", "fnr_gap": "fnr"}, eps)


def evaluate_measure(
    g: GroupedConfusion, measure: str, eps: float = EPS_DEFAULT
) -> MeasureVerdict:
    if measure == INDEPENDENCE:
        return independence(g, eps)
    if measure == SUFFICIENCY:
        return sufficiency(g, eps)
    if measure == SEPARATION:
        return separation(g, eps)
    raise InputError(f"unknown measure {measure!r}; expected one of {MEASURES}")


def measure_via_distribution(
    j: FiniteJoint, measure: str, eps: float = EPS_DEFAULT
) -> MeasureVerdict:
    """Evaluate a measure on a joint over exactly (A, Y, R) with binary Y, R.

    independence checks R ind. A; sufficiency checks Y ind. A given R;
    separation checks R ind. A given Y. Verdicts agree with the
    confusion-matrix route on joints produced from grouped counts.
    """
    if set(j.names) != {"A", "Y", "R"}:
        raise InputError(f"joint must have variables A, Y, R; got {j.names}")
    if len(j.domain("Y")) != 2 or len(j.domain("R")) != 2:
        raise InputError("Y and R must be binary")
    if measure == INDEPENDENCE:
        dev = ci_deviation(j, "R", "A")
    elif measure == SUFFICIENCY:
        dev = ci_deviation(j, "Y", "A", "R")
    elif measure == SEPARATION:
        dev = ci_deviation(j, "R", "A", "Y")
    else:
        raise InputError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    return MeasureVerdict(
        measure=measure,
        disparity=dev,
        component_gaps={"ci_deviation": dev},
        holds=dev <= eps,
        witnesses=None,
        eps=eps,
    )
