"""Finite discrete joint distributions and conditional-independence checks.

A :class:`FiniteJoint` is a sparse table of probability mass over named
variables with finite domains. Independence and conditional independence are
decided through a division-free deviation

    dev(X, Y | Z) = max over z with P(z) > 0
                    of max over (x, y) of |P(x,y,z) * P(z) - P(x,z) * P(y,z)|

which agrees with the textbook definition P(X | Y, Z) = P(X | Z) on the
support of Z and is total: zero-mass conditioning cells are vacuously
satisfied instead of dividing by zero.

All values are immutable after construction and every operation is a pure
function, so everything here is safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import InputError

#: Default tolerance for "exact" claims on rational inputs.
EPS_DEFAULT = 1e-9

#: Default tolerance for total probability mass at construction.
MASS_TOL_DEFAULT = 1e-12

PASS = "pass"
FAIL = "fail"
VACUOUS = "vacuous"


# ---------------------------------------------------------------------------
# Core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteJoint:
    """Joint distribution over named variables with finite domains.

    ``variables`` fixes the key layout: each key of ``table`` assigns one
    domain label per variable, in declaration order. Assignments missing
    from ``table`` carry zero mass.
    """

    variables: tuple[tuple[str, tuple[str, ...]], ...]
    table: Mapping[tuple[str, ...], float]
    mass_tol: float = MASS_TOL_DEFAULT

    def __post_init__(self) -> None:
        variables = tuple((name, tuple(domain)) for name, domain in self.variables)
        object.__setattr__(self, "variables", variables)
        names = [name for name, _ in variables]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names: {names}")
        for name, domain in variables:
            if not domain:
                raise InputError(f"variable {name!r} has an empty domain")
            if len(set(domain)) != len(domain):
                raise InputError(f"variable {name!r} repeats domain labels: {domain}")
        domains = [frozenset(domain) for _, domain in variables]
        table = dict(self.table)
        for key, prob in table.items():
            if len(key) != len(variables) or any(
                value not in dom for value, dom in zip(key, domains)
            ):
                raise InputError(f"assignment {key!r} does not match declared variables")
            if prob < 0:
                raise InputError(f"negative probability {prob!r} at {key!r}")
        total = sum(table.values())
        if abs(total - 1) > self.mass_tol:
            raise InputError(
                f"total mass {total!r} deviates from 1 by more than mass_tol={self.mass_tol}"
            )
        object.__setattr__(self, "table", table)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    def domain(self, name: str) -> tuple[str, ...]:
        for var, dom in self.variables:
            if var == name:
                return dom
        raise InputError(f"unknown variable {name!r}; have {self.names}")

    def index(self, name: str) -> int:
        for i, (var, _) in enumerate(self.variables):
            if var == name:
                return i
        raise InputError(f"unknown variable {name!r}; have {self.names}")

    def prob(self, assignment: tuple[str, ...]) -> float:
        """Mass of one full assignment (zero if absent from the table)."""
        return self.table.get(tuple(assignment), 0.0)

    def total_mass(self) -> float:
        return sum(self.table.values())

    def assignments(self) -> Iterable[tuple[str, ...]]:
        """Every full assignment in domain order, including zero-mass cells."""
        return itertools.product(*(dom for _, dom in self.variables))

    def min_cell(self) -> float:
        """Smallest mass over the full assignment grid (0.0 for sparse cells)."""
        return min(self.prob(key) for key in self.assignments())


@dataclass(frozen=True)
class DeterministicMap:
    """A total function between variable domains, used as the ``h`` of the
    functional conditional-independence properties (``U = h(X)``)."""

    source: str
    target: str
    mapping: Mapping[str, str]

    def __post_init__(self) -> None:
        if not self.mapping:
            raise InputError("mapping must be nonempty")
        if self.source == self.target:
            raise InputError("source and target must be distinct variable names")
        object.__setattr__(self, "mapping", dict(self.mapping))

    def __call__(self, value: str) -> str:
        try:
            return self.mapping[value]
        except KeyError:
            raise InputError(
                f"mapping for {self.source!r} is not defined at {value!r}"
            ) from None


@dataclass(frozen=True)
class CIResult:
    """Outcome of an (conditional) independence check."""

    holds: bool
    deviation: float


@dataclass(frozen=True)
class PropertyVerdict:
    """Outcome of checking one conditional-independence property.

    ``status`` is ``"vacuous"`` when the premises fail within eps; in that
    case no conclusion is asserted and ``conclusions`` is empty.
    """

    property_id: int
    status: str
    premises: Mapping[str, float] = field(default_factory=dict)
    conclusions: Mapping[str, float] = field(default_factory=dict)
    eps: float = EPS_DEFAULT

    def __post_init__(self) -> None:
        object.__setattr__(self, "premises", dict(self.premises))
        object.__setattr__(self, "conclusions", dict(self.conclusions))


# ---------------------------------------------------------------------------
# Marginalization and derived joints
# ---------------------------------------------------------------------------


def _as_names(spec: str | Sequence[str]) -> tuple[str, ...]:
    if isinstance(spec, str):
        return (spec,)
    return tuple(spec)


def _aggregate(j: FiniteJoint, names: tuple[str, ...]) -> dict[tuple[str, ...], float]:
    """Sum the table down to the given variables, keyed in ``names`` order."""
    indices = [j.index(name) for name in names]
    out: dict[tuple[str, ...], float] = {}
    for key, prob in j.table.items():
        sub = tuple(key[i] for i in indices)
        if sub in out:
            out[sub] = out[sub] + prob
        else:
            out[sub] = prob
    return out


def marginal(j: FiniteJoint, keep: Iterable[str]) -> FiniteJoint:
    """Marginal distribution over ``keep``, preserving total mass.

    Kept variables retain their original declaration order.
    """
    keep_set = set(_as_names(keep) if isinstance(keep, str) else keep)
    if not keep_set:
        raise InputError("keep must name at least one variable")
    unknown = keep_set - set(j.names)
    if unknown:
        raise InputError(f"unknown variable names: {sorted(unknown)}")
    kept = tuple((name, dom) for name, dom in j.variables if name in keep_set)
    table = _aggregate(j, tuple(name for name, _ in kept))
    return FiniteJoint(variables=kept, table=table, mass_tol=j.mass_tol)


def apply_map(j: FiniteJoint, h: DeterministicMap) -> FiniteJoint:
    """Extend a joint with a new variable ``h.target`` defined as ``h`` of
    ``h.source``. The new variable is appended after the existing ones; its
    domain lists the mapped values in first-appearance order over the source
    domain."""
    if h.target in j.names:
        raise InputError(f"target variable {h.target!r} already present")
    source_dom = j.domain(h.source)
    target_dom: list[str] = []
    for value in source_dom:
        mapped = h(value)
        if mapped not in target_dom:
            target_dom.append(mapped)
    src_idx = j.index(h.source)
    table = {key + (h(key[src_idx]),): prob for key, prob in j.table.items()}
    variables = j.variables + ((h.target, tuple(target_dom)),)
    return FiniteJoint(variables=variables, table=table, mass_tol=j.mass_tol)


def compose_ci(
    pz: Mapping[str, float],
    px_given_z: Mapping[str, Mapping[str, float]],
    py_given_z: Mapping[str, Mapping[str, float]],
    names: tuple[str, str, str] = ("X", "Y", "Z"),
    row_tol: float = 1e-9,
) -> FiniteJoint:
    """Assemble P(x,y,z) = P(z) * P(x|z) * P(y|z), which satisfies X ind. Y | Z
    by construction (deviation <= 1e-12).

    ``px_given_z`` and ``py_given_z`` map each z-value to a row over the x
    (resp. y) domain; rows must be nonnegative and sum to 1 within ``row_tol``.
    """
    x_name, y_name, z_name = names
    z_dom = tuple(pz)
    if not z_dom:
        raise InputError("pz must be nonempty")
    if any(p < 0 for p in pz.values()):
        raise InputError("pz has negative mass")
    if abs(sum(pz.values()) - 1) > row_tol:
        raise InputError("pz does not sum to 1")

    def check_rows(rows: Mapping[str, Mapping[str, float]], label: str) -> tuple[str, ...]:
        domain: tuple[str, ...] | None = None
        for z in z_dom:
            if z not in rows:
                raise InputError(f"{label} is missing a row for z={z!r}")
            row = rows[z]
            if domain is None:
                domain = tuple(row)
            elif set(row) != set(domain):
                raise InputError(f"{label} rows disagree on the domain")
            if any(p < 0 for p in row.values()):
                raise InputError(f"{label} row for z={z!r} has negative mass")
            if abs(sum(row.values()) - 1) > row_tol:
                raise InputError(f"{label} row for z={z!r} is not stochastic")
        assert domain is not None
        return domain

    x_dom = check_rows(px_given_z, "px_given_z")
    y_dom = check_rows(py_given_z, "py_given_z")

    raw: dict[tuple[str, str, str], float] = {}
    for z in z_dom:
        for x in x_dom:
            for y in y_dom:
                raw[(x, y, z)] = pz[z] * px_given_z[z][x] * py_given_z[z][y]
    total = sum(raw.values())
    if total <= 0:
        raise InputError("assembled joint has no mass")
    table = {key: value / total for key, value in raw.items()}
    variables = ((x_name, x_dom), (y_name, y_dom), (z_name, z_dom))
    return FiniteJoint(variables=variables, table=table)


# ---------------------------------------------------------------------------
# Independence checks
# ---------------------------------------------------------------------------


def ci_deviation(
    j: FiniteJoint,
    left: str | Sequence[str],
    right: str | Sequence[str],
    given: str | Sequence[str] = (),
) -> float:
    """Division-free conditional-independence deviation of ``left`` from
    ``right`` given ``given``. Either side may be a set of variables, which
    is equivalent to fusing them into one product-domain variable."""
    left_names = _as_names(left)
    right_names = _as_names(right)
    given_names = _as_names(given)
    if not left_names or not right_names:
        raise InputError("left and right must each name at least one variable")
    all_names = left_names + right_names + given_names
    if len(set(all_names)) != len(all_names):
        raise InputError(f"variable groups must be pairwise disjoint: {all_names}")
    for name in all_names:
        j.index(name)

    p_lrg = _aggregate(j, left_names + right_names + given_names)
    p_lg = _aggregate(j, left_names + given_names)
    p_rg = _aggregate(j, right_names + given_names)
    p_g = _aggregate(j, given_names)

    left_grid = list(itertools.product(*(j.domain(n) for n in left_names)))
    right_grid = list(itertools.product(*(j.domain(n) for n in right_names)))
    given_grid = itertools.product(*(j.domain(n) for n in given_names))

    worst = 0.0
    for gv in given_grid:
        pg = p_g.get(gv, 0.0)
        if pg <= 0:
            continue  # zero-mass conditioning cell: vacuously satisfied
        for lv in left_grid:
            plg = p_lg.get(lv + gv, 0.0)
            for rv in right_grid:
                dev = abs(p_lrg.get(lv + rv + gv, 0.0) * pg - plg * p_rg.get(rv + gv, 0.0))
                if dev > worst:
                    worst = dev
    return worst


def is_independent(
    j: FiniteJoint,
    x: str | Sequence[str],
    y: str | Sequence[str],
    eps: float = EPS_DEFAULT,
) -> CIResult:
    """Check X ind. Y via max |P(x,y) - P(x)P(y)| over the value grid.

    The multiplication form keeps zero-mass cells safe; this is exactly the
    conditional check with an empty conditioning set.
    """
    return is_cond_independent(j, x, y, (), eps)


def is_cond_independent(
    j: FiniteJoint,
    x: str | Sequence[str],
    y: str | Sequence[str],
    given: str | Sequence[str] = (),
    eps: float = EPS_DEFAULT,
) -> CIResult:
    """Check X ind. Y given Z at tolerance ``eps``."""
    dev = ci_deviation(j, x, y, given)
    return CIResult(holds=dev <= eps, deviation=dev)


# ---------------------------------------------------------------------------
# The five conditional-independence properties
# ---------------------------------------------------------------------------


def _functional_violation_mass(j: FiniteJoint, h: DeterministicMap) -> float:
    """Total mass on assignments where target != h(source)."""
    src = j.index(h.source)
    tgt = j.index(h.target)
    return sum(prob for key, prob in j.table.items() if key[tgt] != h(key[src]))


def check_ci_property(
    k: int,
    j: FiniteJoint,
    h: DeterministicMap | None = None,
    eps: float = EPS_DEFAULT,
) -> PropertyVerdict:
    """Numerically verify one of the five conditional-independence properties
    on a concrete instance.

    The instance uses canonical variable names: X, Y, Z (properties 1, 2, 3,
    5) plus W (property 4). Property 2 additionally needs ``h`` mapping X to a
    fresh variable; property 3 needs ``h`` mapping Z onto Y.

    1. X ind. Y | Z  implies  Y ind. X | Z.
    2. X ind. Y | Z and U = h(X)  imply  (i) U ind. Y | Z and
       (ii) X ind. Y | (Z, U).
    3. Y = h(Z)  implies  X ind. Y | Z.
    4. X ind. Y | Z and X ind. W | (Y, Z)  iff  X ind. (W, Y) | Z
       (checked in both directions).
    5. X ind. Y | Z, X ind. Z | Y and full positivity  imply  X ind. (Y, Z).

    Returns a vacuous verdict when the premises fail within ``eps``; a
    vacuous premise asserts nothing and is distinct from a failure.
    """
    if k == 1:
        premise = ci_deviation(j, "X", "Y", "Z")
        premises = {"x_indep_y_given_z": premise}
        if premise > eps:
            return PropertyVerdict(k, VACUOUS, premises, {}, eps)
        conclusions = {"y_indep_x_given_z": ci_deviation(j, "Y", "X", "Z")}
    elif k == 2:
        if h is None or h.source != "X":
            raise InputError("property 2 needs a DeterministicMap from X")
        premise = ci_deviation(j, "X", "Y", "Z")
        premises = {"x_indep_y_given_z": premise}
        if premise > eps:
            return PropertyVerdict(k, VACUOUS, premises, {}, eps)
        extended = apply_map(j, h)
        u = h.target
        conclusions = {
            f"{u.lower()}_indep_y_given_z": ci_deviation(extended, u, "Y", "Z"),
            f"x_indep_y_given_z{u.lower()}": ci_deviation(extended, "X", "Y", ("Z", u)),
        }
    elif k == 3:
        if h is None or h.source != "Z" or h.target != "Y":
            raise InputError("property 3 needs a DeterministicMap from Z onto Y")
        premise = _functional_violation_mass(j, h)
        premises = {"y_equals_h_of_z_violation_mass": premise}
        if premise > eps:
            return PropertyVerdict(k, VACUOUS, premises, {}, eps)
        conclusions = {"x_indep_y_given_z": ci_deviation(j, "X", "Y", "Z")}
    elif k == 4:
        dev_a = ci_deviation(j, "X", "Y", "Z")
        dev_b = ci_deviation(j, "X", "W", ("Y", "Z"))
        dev_c = ci_deviation(j, "X", ("W", "Y"), "Z")
        premises = {
            "x_indep_y_given_z": dev_a,
            "x_indep_w_given_yz": dev_b,
            "x_indep_wy_given_z": dev_c,
        }
        conclusions = {}
        if dev_a <= eps and dev_b <= eps:
            conclusions["forward_x_indep_wy_given_z"] = dev_c
        if dev_c <= eps:
            conclusions["backward_x_indep_y_given_z"] = dev_a
            conclusions["backward_x_indep_w_given_yz"] = dev_b
        if not conclusions:
            return PropertyVerdict(k, VACUOUS, premises, {}, eps)
    elif k == 5:
        min_cell = j.min_cell()
        dev_xy = ci_deviation(j, "X", "Y", "Z")
        dev_xz = ci_deviation(j, "X", "Z", "Y")
        premises = {
            "positivity_min_cell": min_cell,
            "x_indep_y_given_z": dev_xy,
            "x_indep_z_given_y": dev_xz,
        }
        if min_cell <= 0 or dev_xy > eps or dev_xz > eps:
            return PropertyVerdict(k, VACUOUS, premises, {}, eps)
        conclusions = {"x_indep_yz": ci_deviation(j, "X", ("Y", "Z"))}
    else:
        raise InputError(f"property id must be 1..5, got {k!r}")

    status = PASS if all(dev <= eps for dev in conclusions.values()) else FAIL
    return PropertyVerdict(k, status, premises, conclusions, eps)
