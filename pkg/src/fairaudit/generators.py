"""Seeded random instance builders for the verification suites.

Everything takes an explicit ``random.Random`` so suites are reproducible;
the same seed always yields the same instances.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .confusion import ConfusionMatrix, Dataset, GroupedConfusion, Record
from .conservativeness import _joint_independence_deviation
from .distributions import DeterministicMap, FiniteJoint, apply_map, compose_ci
from .measures import separation, sufficiency

#: Smallest normalized cell guaranteed by the positivity generator.
POSITIVITY_FLOOR = 1e-3


def _labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


def _weights(rng: random.Random, n: int, low: float = 0.0) -> list[float]:
    return [rng.uniform(low, 1.0) for _ in range(n)]


def _normalized(weights: Sequence[float]) -> list[float]:
    total = sum(weights)
    return [w / total for w in weights]


def _distribution(rng: random.Random, domain: Sequence[str], low: float = 0.0) -> dict[str, float]:
    probs = _normalized(_weights(rng, len(domain), low))
    return dict(zip(domain, probs))


def random_joint(
    rng: random.Random,
    variables: Sequence[tuple[str, Sequence[str]]],
    floor: float = 0.0,
) -> FiniteJoint:
    """Generic random joint; ``floor`` is a pre-normalization weight floor."""
    variables = tuple((name, tuple(domain)) for name, domain in variables)
    keys = [()]
    for _, domain in variables:
        keys = [key + (value,) for key in keys for value in domain]
    probs = _normalized(_weights(rng, len(keys), floor))
    return FiniteJoint(variables=variables, table=dict(zip(keys, probs)))


def random_sizes(rng: random.Random, count: int, low: int = 2, high: int = 3) -> list[int]:
    return [rng.randint(low, high) for _ in range(count)]


def random_ci_instance(
    rng: random.Random, names: tuple[str, str, str] = ("X", "Y", "Z")
) -> FiniteJoint:
    """A joint with X independent of Y given Z, by construction."""
    nx, ny, nz = random_sizes(rng, 3)
    z_dom = _labels(nz)
    pz = _distribution(rng, z_dom, low=0.05)
    px = {z: _distribution(rng, _labels(nx)) for z in z_dom}
    py = {z: _distribution(rng, _labels(ny)) for z in z_dom}
    return compose_ci(pz, px, py, names=names)


def random_map(rng: random.Random, source: str, target: str, domain: Sequence[str]) -> DeterministicMap:
    """Random total map; target domain size 2 when possible so the map is
    usually non-injective."""
    values = _labels(min(2, len(domain)))
    mapping = {value: rng.choice(values) for value in domain}
    return DeterministicMap(source=source, target=target, mapping=mapping)


def random_functional_instance(
    rng: random.Random,
) -> tuple[FiniteJoint, DeterministicMap]:
    """A joint over (X, Z, Y) with Y defined as h(Z) and X, Z coupled."""
    nx, nz = random_sizes(rng, 2)
    base = random_joint(rng, [("X", _labels(nx)), ("Z", _labels(nz))])
    h = DeterministicMap(
        source="Z",
        target="Y",
        mapping={value: rng.choice(("u", "v")) for value in _labels(nz)},
    )
    return apply_map(base, h), h


def random_chain_instance(rng: random.Random) -> FiniteJoint:
    """Joint over (X, Y, Z, W) built as P(z) P(x|z) P(y|z) P(w|y,z), so both
    X ind. Y | Z and X ind. W | (Y, Z) hold by construction."""
    nx, ny, nz, nw = random_sizes(rng, 4, 2, 2)
    x_dom, y_dom, z_dom, w_dom = map(_labels, (nx, ny, nz, nw))
    pz = _distribution(rng, z_dom, low=0.05)
    px = {z: _distribution(rng, x_dom) for z in z_dom}
    py = {z: _distribution(rng, y_dom) for z in z_dom}
    pw = {(y, z): _distribution(rng, w_dom) for y in y_dom for z in z_dom}
    table = {
        (x, y, z, w): pz[z] * px[z][x] * py[z][y] * pw[(y, z)][w]
        for x in x_dom
        for y in y_dom
        for z in z_dom
        for w in w_dom
    }
    total = sum(table.values())
    table = {key: value / total for key, value in table.items()}
    variables = (("X", x_dom), ("Y", y_dom), ("Z", z_dom), ("W", w_dom))
    return FiniteJoint(variables=variables, table=table)


def random_pair_ci_instance(rng: random.Random) -> FiniteJoint:
    """Joint over (X, Y, Z, W) built as P(z) P(x|z) P(w,y|z), so X is
    independent of the (W, Y) pair given Z by construction."""
    nx, ny, nz, nw = random_sizes(rng, 4, 2, 2)
    x_dom, y_dom, z_dom, w_dom = map(_labels, (nx, ny, nz, nw))
    pz = _distribution(rng, z_dom, low=0.05)
    px = {z: _distribution(rng, x_dom) for z in z_dom}
    pairs = [(w, y) for w in w_dom for y in y_dom]
    pwy = {z: dict(zip(pairs, _normalized(_weights(rng, len(pairs))))) for z in z_dom}
    table = {
        (x, y, z, w): pz[z] * px[z][x] * pwy[z][(w, y)]
        for x in x_dom
        for (w, y) in pairs
        for z in z_dom
    }
    total = sum(table.values())
    table = {key: value / total for key, value in table.items()}
    variables = (("X", x_dom), ("Y", y_dom), ("Z", z_dom), ("W", w_dom))
    return FiniteJoint(variables=variables, table=table)


def random_product_instance(
    rng: random.Random, floor: float = POSITIVITY_FLOOR
) -> FiniteJoint:
    """Strictly positive joint over (X, Y, Z) with X independent of the
    (Y, Z) pair, every normalized cell at least ``floor``."""
    nx, ny, nz = random_sizes(rng, 3)
    x_dom, y_dom, z_dom = map(_labels, (nx, ny, nz))
    # Weight floors chosen so min(px) * min(pyz) >= floor after normalization:
    # a weight floor f against max weight 1 over n cells keeps cells >= f / n.
    px = _normalized(_weights(rng, nx, low=0.4))
    pyz = _normalized(_weights(rng, ny * nz, low=max(0.1, floor * ny * nz * 3)))
    table = {
        (x, y, z): px[i] * pyz[j * nz + k]
        for i, x in enumerate(x_dom)
        for j, y in enumerate(y_dom)
        for k, z in enumerate(z_dom)
    }
    joint = FiniteJoint(
        variables=(("X", x_dom), ("Y", y_dom), ("Z", z_dom)), table=table
    )
    if joint.min_cell() < floor:
        raise AssertionError(
            f"positivity generator produced a cell below floor={floor}"
        )
    return joint


# ---------------------------------------------------------------------------
# Grouped confusion tables
# ---------------------------------------------------------------------------


def _group_labels(n: int) -> tuple[str, ...]:
    return tuple(f"g{i}" for i in range(n))


def random_perfect_grouped(rng: random.Random, max_groups: int = 3) -> GroupedConfusion:
    """Perfect predictor per group (no false cells); zero TP or TN cells are
    allowed so undefined rates stay reachable."""
    groups = _group_labels(rng.randint(2, max_groups))
    matrices = {}
    for group in groups:
        a, d = 0, 0
        while a + d == 0:
            a, d = rng.randint(0, 20), rng.randint(0, 20)
        matrices[group] = ConfusionMatrix(a, 0, 0, d)
    return GroupedConfusion(matrices)


def random_positive_grouped(
    rng: random.Random, max_groups: int = 3, high: int = 30
) -> GroupedConfusion:
    """Strictly positive cells in every group."""
    groups = _group_labels(rng.randint(2, max_groups))
    return GroupedConfusion(
        {
            group: ConfusionMatrix(
                rng.randint(1, high),
                rng.randint(1, high),
                rng.randint(1, high),
                rng.randint(1, high),
            )
            for group in groups
        }
    )


def random_proportional_grouped(
    rng: random.Random, max_groups: int = 3, max_multiplier: int = 4
) -> GroupedConfusion:
    """Positive matrices that are exact integer multiples of a common base,
    so the group variable is independent of the (Y, R) pair."""
    base = ConfusionMatrix(
        rng.randint(1, 12), rng.randint(1, 12), rng.randint(1, 12), rng.randint(1, 12)
    )
    groups = _group_labels(rng.randint(2, max_groups))
    return GroupedConfusion(
        {group: base.scaled(rng.randint(1, max_multiplier)) for group in groups}
    )


def random_nonproportional_grouped(
    rng: random.Random,
    min_gap: Fraction = Fraction(1, 20),
    min_deviation: Fraction = Fraction(1, 1000),
    max_attempts: int = 1000,
) -> GroupedConfusion:
    """Positive matrices whose rates differ by at least ``min_gap`` and whose
    exact deviation from joint independence exceeds ``min_deviation``."""
    for _ in range(max_attempts):
        g = random_positive_grouped(rng)
        gaps = [
            gap
            for verdict in (sufficiency(g), separation(g))
            for gap in verdict.component_gaps.values()
        ]
        if any(gap is not None and gap >= min_gap for gap in gaps) and (
            _joint_independence_deviation(g) > min_deviation
        ):
            return g
    raise AssertionError("failed to generate a non-proportional instance")


def random_scored_dataset(
    rng: random.Random, max_groups: int = 3
) -> tuple[Dataset, str]:
    """Scored dataset plus a group guaranteed to contain a false negative and
    a strictly better-scored true positive (a swap-attack target)."""
    while True:
        groups = _group_labels(rng.randint(2, max_groups))
        records = []
        for group in groups:
            for i in range(rng.randint(4, 12)):
                records.append(
                    Record(
                        id=f"{group}-{i:03d}",
                        group=group,
                        y=rng.random() < 0.6,
                        r=rng.random() < 0.5,
                        score=round(rng.random(), 3),
                    )
                )
        ds = Dataset.from_records(records, groups)
        for group in groups:
            members = [rec for rec in ds.records if rec.group == group]
            fn_scores = [rec.score for rec in members if rec.y and not rec.r]
            tp_scores = [rec.score for rec in members if rec.y and rec.r]
            if fn_scores and tp_scores and max(tp_scores) > min(fn_scores):
                return ds, group
