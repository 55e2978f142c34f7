"""Exact rank and span-membership oracles.

Every predicate in the package reduces to a rank computation, so the rank
routines here are the trust anchor. Two independent implementations are
kept on purpose:

* the production path — fraction-free (Bareiss-style) integer elimination
  for rationals, plain modular elimination for GF(p); and
* ``rank_naive`` — a textbook echelon form written directly over the field,
  used as the cross-check oracle in the test suite.

No floating point anywhere: legality is a rank condition and is unstable
under rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .errors import InputError
from .fields import FieldDesc, PrimeField, RationalField, Scalar


def _check_points(points: Sequence[Sequence[Scalar]], field: FieldDesc) -> int:
    """Validate shared dimension and field membership; return the dimension.

    An empty list is allowed (dimension reported as 0; the caller treats the
    span as the zero space).
    """
    if not points:
        return 0
    d = len(points[0])
    for pt in points:
        if len(pt) != d:
            raise InputError(
                f"mismatched point dimensions: {len(pt)} vs {d}"
            )
        for x in pt:
            field.coerce(x)
    return d


def _int_row(point: Sequence[Scalar]) -> list[int]:
    """Scale a rational point by the lcm of denominators (span-preserving)."""
    m = 1
    for x in point:
        if isinstance(x, Fraction) and x.denominator != 1:
            m = lcm(m, x.denominator)
    if m == 1:
        return [int(x) for x in point]
    return [int(x * m) for x in point]


def rank_bareiss(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free Gaussian elimination.

    Mutates ``rows``. Pivots are the leading minors of the processed block,
    so every division is exact and intermediate entries stay minor-sized
    instead of blowing up like naive integer cross-multiplication.
    """
    nr = len(rows)
    if nr == 0:
        return 0
    nc = len(rows[0])
    rank = 0
    prev = 1
    for c in range(nc):
        piv = -1
        for i in range(rank, nr):
            if rows[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        pv = pr[c]
        for i in range(rank + 1, nr):
            ri = rows[i]
            vic = ri[c]
            for j in range(c + 1, nc):
                ri[j] = (ri[j] * pv - vic * pr[j]) // prev
            ri[c] = 0
        prev = pv
        rank += 1
        if rank == nr:
            break
    return rank


def rank_mod(rows: list[list[int]], p: int) -> int:
    """Rank over GF(p) by Gaussian elimination. Mutates ``rows``."""
    nr = len(rows)
    if nr == 0:
        return 0
    nc = len(rows[0])
    rank = 0
    for c in range(nc):
        piv = -1
        for i in range(rank, nr):
            if rows[i][c] % p:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        inv = pow(pr[c], p - 2, p)
        for i in range(rank + 1, nr):
            ri = rows[i]
            if ri[c] % p:
                f = (ri[c] * inv) % p
                for j in range(c, nc):
                    ri[j] = (ri[j] - f * pr[j]) % p
        rank += 1
        if rank == nr:
            break
    return rank


def rank_naive(points: Sequence[Sequence[Scalar]], field: FieldDesc) -> int:
    """Textbook row echelon over the field itself — the cross-check oracle.

    Deliberately written without the fraction-free tricks of the production
    path so the two implementations share no code.
    """
    d = _check_points(points, field)
    work = [[field.coerce(x) for x in pt] for pt in points]
    rank = 0
    for c in range(d):
        piv = None
        for i in range(rank, len(work)):
            if not field.is_zero(work[i][c]):
                piv = i
                break
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = field.inv(work[rank][c])
        work[rank] = [field.mul(x, inv) for x in work[rank]]
        for i in range(rank + 1, len(work)):
            f = work[i][c]
            if not field.is_zero(f):
                work[i] = [
                    field.sub(a, field.mul(f, b))
                    for a, b in zip(work[i], work[rank])
                ]
        rank += 1
    return rank


def rank_of_rows(points: Sequence[Sequence[Scalar]], field: FieldDesc) -> int:
    """Production rank: Bareiss over cleared integers, or modular over GF(p)."""
    if isinstance(field, PrimeField):
        return rank_mod([list(pt) for pt in points], field.p)
    return rank_bareiss([_int_row(pt) for pt in points])


def span_dim(points: Sequence[Sequence[Scalar]], field: FieldDesc) -> int:
    """Dimension of the span of ``points``; the empty set spans dimension 0."""
    _check_points(points, field)
    return rank_of_rows(points, field)


def in_span(v: Sequence[Scalar], points: Sequence[Sequence[Scalar]],
            field: FieldDesc) -> bool:
    """True iff adding ``v`` does not increase the span of ``points``."""
    d = _check_points(points, field)
    if points and len(v) != d:
        raise InputError(f"mismatched point dimensions: {len(v)} vs {d}")
    for x in v:
        field.coerce(x)
    return Echelon(points, field).contains(v)


class Echelon:
    """Reusable elimination of a base set for repeated span-membership tests.

    One elimination of the base answers any number of membership queries,
    which is what the 2^n-section sweeps need. Results agree with
    ``in_span`` query-for-query.
    """

    def __init__(self, base: Sequence[Sequence[Scalar]], field: FieldDesc):
        _check_points(base, field)
        self.field = field
        self._modulus = field.p if isinstance(field, PrimeField) else None
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []
        for pt in base:
            self.add(pt)

    def _reduce(self, point: Sequence[Scalar]) -> list[int]:
        p = self._modulus
        if p is None:
            v = _int_row(point)
            for row, c in zip(self.rows, self.pivots):
                if v[c]:
                    pv = row[c]
                    vc = v[c]
                    v = [a * pv - vc * b for a, b in zip(v, row)]
        else:
            v = [x % p for x in point]
            for row, c in zip(self.rows, self.pivots):
                if v[c]:
                    f = (v[c] * pow(row[c], p - 2, p)) % p
                    v = [(a - f * b) % p for a, b in zip(v, row)]
        return v

    def add(self, point: Sequence[Scalar]) -> bool:
        """Insert a point; returns True if it enlarged the span."""
        v = self._reduce(point)
        for c, x in enumerate(v):
            if x:
                self.rows.append(v)
                self.pivots.append(c)
                return True
        return False

    def contains(self, point: Sequence[Scalar]) -> bool:
        return not any(self._reduce(point))

    @property
    def rank(self) -> int:
        return len(self.rows)


def incremental_rank_probe(base: Sequence[Sequence[Scalar]],
                           candidates: Sequence[Sequence[Scalar]],
                           field: FieldDesc) -> list[bool]:
    """Batch ``in_span``: one elimination of ``base``, many membership tests.

    Entry i equals ``in_span(candidates[i], base, field)`` exactly.
    """
    d = _check_points(base, field)
    ech = Echelon(base, field)
    out = []
    for v in candidates:
        if base and len(v) != d:
            raise InputError(f"mismatched point dimensions: {len(v)} vs {d}")
        for x in v:
            field.coerce(x)
        out.append(ech.contains(v))
    return out


@dataclass(frozen=True)
class PointMatrix:
    """Dense row-major matrix of scalars sharing one field descriptor."""

    field: FieldDesc
    entries: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self):
        coerced = tuple(
            tuple(self.field.coerce(x) for x in row) for row in self.entries
        )
        if coerced:
            w = len(coerced[0])
            for row in coerced:
                if len(row) != w:
                    raise InputError("ragged matrix rows")
        object.__setattr__(self, "entries", coerced)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def rank(self, method: str = "auto") -> int:
        if method == "auto":
            return rank_of_rows(self.entries, self.field)
        if method == "naive":
            return rank_naive(self.entries, self.field)
        if method == "bareiss":
            if not isinstance(self.field, RationalField):
                raise InputError("bareiss ranks are for the rational field")
            return rank_bareiss([_int_row(r) for r in self.entries])
        raise InputError(f"unknown rank method {method!r}")

    def mul_point(self, point: Sequence[Scalar]) -> tuple[Scalar, ...]:
        """Matrix–vector product (points are column vectors)."""
        if len(point) != self.cols:
            raise InputError(
                f"matrix expects dimension {self.cols}, point has {len(point)}"
            )
        f = self.field
        out = []
        for row in self.entries:
            acc = f.zero()
            for a, x in zip(row, point):
                acc = f.add(acc, f.mul(a, x))
            out.append(acc)
        return tuple(out)

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows
