"""Confusion matrices, their statistics, and conversions to datasets/joints.

Counts stay integers and every statistic is an exact :class:`~fractions.Fraction`,
so rate identities can be asserted without floating-point slack. A statistic
whose denominator is zero is ``None`` (undefined), never 0 or NaN; fairness
comparisons downstream turn undefined constituents into NOT-COMPARABLE
verdicts instead of silently passing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .distributions import FiniteJoint
from .errors import InputError

#: Canonical labels for the binary categories.
POS = "+"
NEG = "-"


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 count table for one group: a=TP, b=FP, c=FN, d=TN."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise InputError(f"cell {name} must be a nonnegative integer, got {value!r}")
        if self.n < 1:
            raise InputError("confusion matrix must count at least one record")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    @property
    def accuracy(self) -> Fraction:
        return Fraction(self.a + self.d, self.n)

    @property
    def ppv(self) -> Fraction | None:
        return Fraction(self.a, self.a + self.b) if self.a + self.b else None

    @property
    def npv(self) -> Fraction | None:
        return Fraction(self.d, self.c + self.d) if self.c + self.d else None

    @property
    def fpr(self) -> Fraction | None:
        return Fraction(self.b, self.b + self.d) if self.b + self.d else None

    @property
    def fnr(self) -> Fraction | None:
        return Fraction(self.c, self.a + self.c) if self.a + self.c else None

    @property
    def selection_rate(self) -> Fraction:
        return Fraction(self.a + self.b, self.n)

    def stats(self) -> GroupStats:
        return GroupStats(
            accuracy=self.accuracy,
            ppv=self.ppv,
            npv=self.npv,
            fpr=self.fpr,
            fnr=self.fnr,
        )

    def scaled(self, k: int) -> ConfusionMatrix:
        if k < 1:
            raise InputError("scale factor must be a positive integer")
        return ConfusionMatrix(self.a * k, self.b * k, self.c * k, self.d * k)


@dataclass(frozen=True)
class GroupStats:
    """The five per-group statistics; ``None`` marks an undefined value."""

    accuracy: Fraction
    ppv: Fraction | None
    npv: Fraction | None
    fpr: Fraction | None
    fnr: Fraction | None


def stats(m: ConfusionMatrix) -> GroupStats:
    """Functional alias for :meth:`ConfusionMatrix.stats`."""
    return m.stats()


@dataclass(frozen=True)
class GroupedConfusion:
    """One confusion matrix per group, in a fixed group order.

    ``empty_groups`` records declared groups that were dropped by
    :func:`tabulate` for having no records. Fairness measures require at
    least two populated groups; a single-group table is representable so the
    drop-with-warning path stays usable.
    """

    matrices: Mapping[str, ConfusionMatrix]
    empty_groups: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.matrices:
            raise InputError("at least one group is required")
        object.__setattr__(self, "matrices", dict(self.matrices))
        object.__setattr__(self, "empty_groups", tuple(self.empty_groups))

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(self.matrices)

    def __getitem__(self, group: str) -> ConfusionMatrix:
        try:
            return self.matrices[group]
        except KeyError:
            raise InputError(f"unknown group {group!r}; have {self.groups}") from None

    @property
    def total(self) -> int:
        return sum(m.n for m in self.matrices.values())

    def replace(self, group: str, matrix: ConfusionMatrix) -> GroupedConfusion:
        self[group]  # validate membership
        updated = {g: (matrix if g == group else m) for g, m in self.matrices.items()}
        return GroupedConfusion(updated, self.empty_groups)


@dataclass(frozen=True)
class Record:
    """One individual: true label ``y``, prediction ``r`` (True means positive),
    and an optional suitability score in [0, 1]."""

    id: str
    group: str
    y: bool
    r: bool
    score: float | None = None

    def __post_init__(self) -> None:
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise InputError(f"score for {self.id!r} must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class Dataset:
    """Immutable list of records plus the declared group universe."""

    records: tuple[Record, ...]
    groups: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "groups", tuple(self.groups))
        if not self.groups:
            raise InputError("at least one group must be declared")
        if len(set(self.groups)) != len(self.groups):
            raise InputError("declared groups repeat a label")
        seen: set[str] = set()
        declared = set(self.groups)
        for rec in self.records:
            if rec.id in seen:
                raise InputError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if rec.group not in declared:
                raise InputError(
                    f"record {rec.id!r} has undeclared group {rec.group!r}"
                )

    @classmethod
    def from_records(
        cls, records: Iterable[Record], groups: Sequence[str] | None = None
    ) -> Dataset:
        records = tuple(records)
        if groups is None:
            derived: list[str] = []
            for rec in records:
                if rec.group not in derived:
                    derived.append(rec.group)
            groups = derived
        return cls(records=records, groups=tuple(groups))

    def with_predictions(self, overrides: Mapping[str, bool]) -> Dataset:
        """Copy of the dataset with the listed record predictions replaced."""
        unknown = set(overrides) - {rec.id for rec in self.records}
        if unknown:
            raise InputError(f"unknown record ids: {sorted(unknown)}")
        records = tuple(
            Record(rec.id, rec.group, rec.y, overrides.get(rec.id, rec.r), rec.score)
            for rec in self.records
        )
        return Dataset(records=records, groups=self.groups)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------


def tabulate(ds: Dataset) -> GroupedConfusion:
    """Compile one confusion matrix per declared group.

    Groups without records are excluded and reported via ``empty_groups``.
    """
    counts = {group: [0, 0, 0, 0] for group in ds.groups}
    for rec in ds.records:
        cell = counts[rec.group]
        if rec.y and rec.r:
            cell[0] += 1
        elif not rec.y and rec.r:
            cell[1] += 1
        elif rec.y and not rec.r:
            cell[2] += 1
        else:
            cell[3] += 1
    matrices = {
        group: ConfusionMatrix(*cell) for group, cell in counts.items() if sum(cell) > 0
    }
    empty = tuple(group for group in ds.groups if sum(counts[group]) == 0)
    if not matrices:
        raise InputError("dataset has no records in any declared group")
    return GroupedConfusion(matrices, empty_groups=empty)


def to_joint(g: GroupedConfusion) -> FiniteJoint:
    """Normalize grouped counts into a joint distribution over (A, Y, R).

    Cell mass is count / grand total; counts are normalized exactly once.
    """
    total = g.total
    table: dict[tuple[str, str, str], float] = {}
    for group, m in g.matrices.items():
        table[(group, POS, POS)] = m.a / total
        table[(group, NEG, POS)] = m.b / total
        table[(group, POS, NEG)] = m.c / total
        table[(group, NEG, NEG)] = m.d / total
    variables = (("A", g.groups), ("Y", (POS, NEG)), ("R", (POS, NEG)))
    return FiniteJoint(variables=variables, table=table)


def is_positive(g: GroupedConfusion) -> bool:
    """True iff every cell of every group's matrix is strictly positive."""
    return all(
        m.a > 0 and m.b > 0 and m.c > 0 and m.d > 0 for m in g.matrices.values()
    )


def synthesize_dataset(g: GroupedConfusion) -> Dataset:
    """Deterministic dataset realizing the grouped counts exactly.

    Inverse of :func:`tabulate` on counts: tabulating the result returns the
    input matrices cell for cell.
    """
    records: list[Record] = []
    for group, m in g.matrices.items():
        cells = ((m.a, True, True), (m.b, False, True), (m.c, True, False), (m.d, False, False))
        serial = 0
        for count, y, r in cells:
            for _ in range(count):
                records.append(Record(id=f"{group}-{serial:04d}", group=group, y=y, r=r))
                serial += 1
    return Dataset(records=tuple(records), groups=g.groups + g.empty_groups)
