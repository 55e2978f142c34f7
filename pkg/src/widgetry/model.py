"""Widgets, sections, subwidget selections, certificates, and the file format.

A widget is an ordered list of n pairs of points in a d-dimensional space
over an exact field. A section picks at most one point per pair; a maximal
section skips nothing. Everything here is an immutable value type, safe to
share across threads.

Indexing convention: pair indices are 1-based everywhere in the public API
and in JSON output (matching the labels p_1 ... p_n used in the domain);
the ``pairs`` array of the file format is positional and therefore 0-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence

from .errors import InputError, WidgetParseError
from .fields import (FieldDesc, PrimeField, RationalField, Scalar,
                     field_from_json, field_to_json)
from .linalg import PointMatrix, _int_row

PLUS = "+"
MINUS = "-"
SKIP = "."

Point = tuple  # tuple[Scalar, ...]
Section = tuple  # tuple[str, ...] over {PLUS, MINUS, SKIP}
SubwidgetSel = tuple  # tuple[int, ...], 1-based, strictly increasing

VALID = "Valid"
NOT_LEGAL = "NotLegal"
NOT_FULL = "NotFull"
LEGAL_SUBWIDGET_FOUND = "LegalSubwidgetFound"
THEOREM_VIOLATION = "TheoremViolation"


@dataclass(frozen=True)
class Widget:
    """n ordered pairs of points; pairs may repeat and points may coincide."""

    field: FieldDesc
    ambient_dim: int
    pairs: tuple[tuple[Point, Point], ...]

    def __post_init__(self):
        if self.ambient_dim < 0:
            raise InputError("ambient_dim must be nonnegative")
        if len(self.pairs) < 1:
            raise InputError("a widget needs at least one pair")
        coerced = []
        for plus, minus in self.pairs:
            pts = []
            for pt in (plus, minus):
                if len(pt) != self.ambient_dim:
                    raise InputError(
                        f"point has dimension {len(pt)}, widget has "
                        f"{self.ambient_dim}"
                    )
                pts.append(tuple(self.field.coerce(x) for x in pt))
            coerced.append((pts[0], pts[1]))
        object.__setattr__(self, "pairs", tuple(coerced))

    @property
    def n(self) -> int:
        return len(self.pairs)

    def all_points(self) -> list[Point]:
        """The 2n points in pair order, plus before minus."""
        out = []
        for plus, minus in self.pairs:
            out.append(plus)
            out.append(minus)
        return out

    def point(self, i: int, sign: str) -> Point:
        """Point of 1-based pair i; sign is PLUS or MINUS."""
        if not 1 <= i <= self.n:
            raise InputError(f"pair index {i} out of range 1..{self.n}")
        plus, minus = self.pairs[i - 1]
        if sign == PLUS:
            return plus
        if sign == MINUS:
            return minus
        raise InputError(f"bad sign {sign!r}")

    @cached_property
    def _rank_rows(self) -> tuple[tuple[Sequence[int], Sequence[int]], ...]:
        """Per-pair (plus, minus) rows pre-scaled for the fast rank path.

        Rational points are cleared to integer rows once per widget; GF(p)
        points are already integer rows. Row scaling never changes spans.
        """
        if isinstance(self.field, PrimeField):
            return self.pairs
        return tuple(
            (tuple(_int_row(plus)), tuple(_int_row(minus)))
            for plus, minus in self.pairs
        )


def section_points(w: Widget, s: Section) -> list[Point]:
    """Chosen points in pair order, skips omitted; duplicates are kept."""
    if len(s) != w.n:
        raise InputError(f"section length {len(s)} != widget size {w.n}")
    out = []
    for (plus, minus), choice in zip(w.pairs, s):
        if choice == PLUS:
            out.append(plus)
        elif choice == MINUS:
            out.append(minus)
        elif choice != SKIP:
            raise InputError(f"bad section choice {choice!r}")
    return out


def maximal_sections(w: Widget) -> Iterator[Section]:
    """All 2^n skip-free sections in binary-counting order.

    Pair 1 is the lowest bit with plus encoded as 0, so the first section
    is all-plus and the enumeration is reproducible.
    """
    n = w.n
    for m in range(1 << n):
        yield tuple(MINUS if (m >> i) & 1 else PLUS for i in range(n))


def check_sel(n: int, sel: Sequence[int]) -> SubwidgetSel:
    """Validate a subwidget selection against a widget of size n."""
    t = tuple(sel)
    if len(t) == 0:
        raise InputError("subwidget selection must be nonempty")
    if len(t) >= n:
        raise InputError("subwidget must be a proper subset of the pairs")
    prev = 0
    for i in t:
        if not isinstance(i, int) or not 1 <= i <= n:
            raise InputError(f"pair index {i!r} out of range 1..{n}")
        if i <= prev:
            raise InputError("selection indices must be strictly increasing")
        prev = i
    return t


def subwidget(w: Widget, sel: Sequence[int]) -> Widget:
    """The widget formed by the selected pairs, order preserved.

    The result is an ordinary widget of size k = |sel|; legality for it
    uses the bound k-1.
    """
    t = check_sel(w.n, sel)
    return Widget(
        field=w.field,
        ambient_dim=w.ambient_dim,
        pairs=tuple(w.pairs[i - 1] for i in t),
    )


@dataclass(frozen=True)
class Relabeling:
    """Pair reordering plus per-pair sign swaps.

    ``perm[j]`` is the 1-based original index placed at new position j+1;
    ``sign_flips`` holds original indices whose plus/minus points swap.
    """

    perm: tuple[int, ...]
    sign_flips: frozenset[int]

    @staticmethod
    def identity(n: int, sign_flips: Sequence[int] = ()) -> "Relabeling":
        return Relabeling(tuple(range(1, n + 1)), frozenset(sign_flips))

    def validate(self, n: int) -> None:
        if sorted(self.perm) != list(range(1, n + 1)):
            raise InputError(f"perm {self.perm} is not a permutation of 1..{n}")
        for i in self.sign_flips:
            if not 1 <= i <= n:
                raise InputError(f"sign flip index {i} out of range 1..{n}")

    def inverse(self) -> "Relabeling":
        n = len(self.perm)
        inv = [0] * n
        for new_pos, old in enumerate(self.perm, start=1):
            inv[old - 1] = new_pos
        flips_new = frozenset(inv[i - 1] for i in self.sign_flips)
        return Relabeling(tuple(inv), flips_new)

    def sel_to_original(self, sel: Sequence[int]) -> SubwidgetSel:
        """Map a selection on the relabeled widget back to original indices."""
        return tuple(sorted(self.perm[j - 1] for j in sel))


def relabel(w: Widget, rel: Relabeling) -> Widget:
    rel.validate(w.n)
    pairs = []
    for old in rel.perm:
        plus, minus = w.pairs[old - 1]
        if old in rel.sign_flips:
            plus, minus = minus, plus
        pairs.append((plus, minus))
    return Widget(field=w.field, ambient_dim=w.ambient_dim, pairs=tuple(pairs))


def apply_linear(w: Widget, matrix) -> Widget:
    """Map every point through an invertible d x d matrix."""
    if not isinstance(matrix, PointMatrix):
        matrix = PointMatrix(w.field, tuple(tuple(r) for r in matrix))
    if matrix.field != w.field:
        raise InputError("matrix and widget fields differ")
    if matrix.rows != w.ambient_dim or matrix.cols != w.ambient_dim:
        raise InputError(
            f"matrix must be {w.ambient_dim}x{w.ambient_dim}, got "
            f"{matrix.rows}x{matrix.cols}"
        )
    if not matrix.is_invertible():
        raise InputError("matrix is singular")
    pairs = tuple(
        (matrix.mul_point(plus), matrix.mul_point(minus))
        for plus, minus in w.pairs
    )
    return Widget(field=w.field, ambient_dim=w.ambient_dim, pairs=pairs)


@dataclass(frozen=True)
class Certificate:
    """Verdict plus the witness that makes it independently checkable.

    NotLegal carries a section whose points span >= n; a found subwidget
    carries its 1-based pair indices; engine runs carry a step trace.
    """

    verdict: str
    witness_section: Optional[Section] = None
    subwidget: Optional[SubwidgetSel] = None
    trace: Optional[tuple] = None

    def __post_init__(self):
        if self.verdict == NOT_LEGAL and self.witness_section is None:
            raise InputError("NotLegal certificate needs a witness section")
        if self.verdict == LEGAL_SUBWIDGET_FOUND and self.subwidget is None:
            raise InputError("LegalSubwidgetFound certificate needs a subwidget")


def certificate_to_json_dict(cert: Certificate) -> dict:
    return {
        "verdict": cert.verdict,
        "legal_subwidget": list(cert.subwidget) if cert.subwidget else None,
        "witness_section": list(cert.witness_section)
        if cert.witness_section is not None else None,
        "trace": [step.to_json_dict() for step in cert.trace]
        if cert.trace is not None else None,
    }


def certificate_to_json(cert: Certificate) -> str:
    return json.dumps(certificate_to_json_dict(cert), sort_keys=True)


# ---------------------------------------------------------------------------
# Widget file format (JSON, UTF-8):
#   {"field": "rational" | {"prime": P},
#    "ambient_dim": D,
#    "pairs": [[[plus coords], [minus coords]], ...]}
# Rational coordinates are integers or "a/b" strings with b > 0 (lowest terms
# not required on input; normalized on parse). GF(p) coordinates are integers
# already reduced into [0, P). Serialization is canonical: identical widgets
# produce byte-identical files.
# ---------------------------------------------------------------------------

def parse_widget(text: str) -> Widget:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise WidgetParseError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise WidgetParseError("top level must be a JSON object")
    for key in ("field", "ambient_dim", "pairs"):
        if key not in doc:
            raise WidgetParseError(f"missing key {key!r}")
    try:
        field = field_from_json(doc["field"])
    except InputError as e:
        raise WidgetParseError(str(e)) from None
    dim = doc["ambient_dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        raise WidgetParseError(f"ambient_dim: expected a nonnegative integer, "
                               f"got {dim!r}")
    raw_pairs = doc["pairs"]
    if not isinstance(raw_pairs, list) or not raw_pairs:
        raise WidgetParseError("pairs: expected a nonempty array")
    pairs = []
    for pi, raw in enumerate(raw_pairs):
        if not isinstance(raw, list) or len(raw) != 2:
            raise WidgetParseError(f"pairs[{pi}]: expected [plus, minus]")
        sides = []
        for side_name, coords in zip(("plus", "minus"), raw):
            if not isinstance(coords, list):
                raise WidgetParseError(
                    f"pairs[{pi}].{side_name}: expected a coordinate array"
                )
            if len(coords) != dim:
                raise WidgetParseError(
                    f"pairs[{pi}].{side_name}: {len(coords)} coordinates, "
                    f"header says {dim}"
                )
            pt = []
            for ci, value in enumerate(coords):
                where = f"pairs[{pi}].{side_name}[{ci}]"
                try:
                    pt.append(field.parse_coord(value, where))
                except InputError as e:
                    raise WidgetParseError(str(e)) from None
            sides.append(tuple(pt))
        pairs.append((sides[0], sides[1]))
    return Widget(field=field, ambient_dim=dim, pairs=tuple(pairs))


def widget_to_json_dict(w: Widget) -> dict:
    f = w.field
    return {
        "field": field_to_json(f),
        "ambient_dim": w.ambient_dim,
        "pairs": [
            [[f.coord_to_json(x) for x in plus],
             [f.coord_to_json(x) for x in minus]]
            for plus, minus in w.pairs
        ],
    }


def serialize_widget(w: Widget) -> str:
    return json.dumps(widget_to_json_dict(w), sort_keys=True,
                      separators=(", ", ": ")) + "\n"
