"""Decision procedures for widgets, with machine-checkable witnesses.

Legality is checked over the 2^n maximal sections only: every section is a
subset of some maximal section and rank is monotone, so the skip-free
sections decide legality. That equivalence is not trusted silently — the
test suite re-derives legality from all 3^n sections and compares.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .errors import InputError
from .fields import PrimeField
from .linalg import rank_of_rows
from .model import (MINUS, PLUS, VALID, NOT_FULL, NOT_LEGAL, Certificate,
                    Section, SubwidgetSel, Widget, check_sel)


def _indep_int(rows) -> bool:
    """Are these integer rows linearly independent? Fraction-free echelon."""
    ech: list[tuple[int, list[int]]] = []
    for r in rows:
        v = list(r)
        for c, row in ech:
            if v[c]:
                pv, vc = row[c], v[c]
                v = [a * pv - vc * b for a, b in zip(v, row)]
        piv = -1
        for c, x in enumerate(v):
            if x:
                piv = c
                break
        if piv < 0:
            return False
        ech.append((piv, v))
    return True


def _indep_mod(rows, p: int) -> bool:
    ech: list[tuple[int, list[int]]] = []
    for r in rows:
        v = list(r)
        for c, row in ech:
            if v[c] % p:
                f = (v[c] * pow(row[c], p - 2, p)) % p
                v = [(a - f * b) % p for a, b in zip(v, row)]
        piv = -1
        for c, x in enumerate(v):
            if x % p:
                piv = c
                break
        if piv < 0:
            return False
        ech.append((piv, v))
    return True


def _independence_test(w: Widget):
    if isinstance(w.field, PrimeField):
        p = w.field.p
        return lambda rows: _indep_mod(rows, p)
    return _indep_int


def _legal_on_indices(w: Widget, idxs0: tuple[int, ...]) -> bool:
    """Legality of the sub-collection at 0-based pair indices ``idxs0``.

    A maximal section of k pairs has exactly k points, so it breaks the
    k-1 span bound iff its points are independent.
    """
    rows = w._rank_rows
    indep = _independence_test(w)
    k = len(idxs0)
    for m in range(1 << k):
        sec = [rows[i][(m >> j) & 1] for j, i in enumerate(idxs0)]
        if indep(sec):
            return False
    return True


def is_legal(w: Widget) -> tuple[bool, Optional[Section]]:
    """True iff every section spans at most n-1 dimensions.

    On failure returns the first maximal section (binary-counting order)
    whose points span >= n, as an independently checkable witness.
    """
    rows = w._rank_rows
    indep = _independence_test(w)
    n = w.n
    for m in range(1 << n):
        sec = [rows[i][(m >> i) & 1] for i in range(n)]
        if indep(sec):
            witness = tuple(MINUS if (m >> i) & 1 else PLUS for i in range(n))
            return False, witness
    return True, None


def is_full(w: Widget) -> bool:
    """True iff the widget's 2n points span at least n dimensions."""
    rows = [r for pair in w._rank_rows for r in pair]
    return rank_of_rows(rows, w.field) >= w.n


def is_valid(w: Widget) -> Certificate:
    """Valid = legal and full; failures carry a witness where one exists."""
    legal, witness = is_legal(w)
    if not legal:
        return Certificate(verdict=NOT_LEGAL, witness_section=witness)
    if not is_full(w):
        return Certificate(verdict=NOT_FULL)
    return Certificate(verdict=VALID)


def is_legal_subwidget(w: Widget, sel) -> bool:
    """Legality of the selected pairs as a widget of size k = |sel|."""
    t = check_sel(w.n, sel)
    return _legal_on_indices(w, tuple(i - 1 for i in t))


def find_legal_subwidget(w: Widget, mode: str = "minimal") -> list[SubwidgetSel]:
    """Brute-force search over proper nonempty pair subsets.

    Search order is size-ascending, lexicographic within a size, so results
    are reproducible. ``minimal`` (or ``first``) stops at the first hit,
    which by the search order has the smallest k; ``all`` collects every
    legal selection. Cost is exponential in n — callers bound n.
    """
    if mode not in ("minimal", "first", "all"):
        raise InputError(f"unknown search mode {mode!r}")
    n = w.n
    found: list[SubwidgetSel] = []
    for k in range(1, n):
        for comb in combinations(range(1, n + 1), k):
            if _legal_on_indices(w, tuple(i - 1 for i in comb)):
                if mode != "all":
                    return [comb]
                found.append(comb)
    return found


@dataclass(frozen=True)
class CorollaryReport:
    """Both sides of: valid  <=>  full and contains a legal subwidget."""

    valid: bool
    full: bool
    has_legal_subwidget: bool

    @property
    def agree(self) -> bool:
        return self.valid == (self.full and self.has_legal_subwidget)


def check_corollary_biconditional(w: Widget) -> CorollaryReport:
    cert = is_valid(w)
    full = is_full(w)
    has_sub = bool(find_legal_subwidget(w, "minimal"))
    return CorollaryReport(valid=cert.verdict == VALID, full=full,
                           has_legal_subwidget=has_sub)


def find_legal_not_full_subwidget(w: Widget) -> Optional[SubwidgetSel]:
    """A legal selection whose 2k points span fewer than k dimensions.

    A minimal legal subwidget does the job: were it full it would be valid,
    hence contain a strictly smaller legal subwidget, contradicting
    minimality. Returns None iff no legal subwidget exists at all.
    """
    hits = find_legal_subwidget(w, "minimal")
    return hits[0] if hits else None
