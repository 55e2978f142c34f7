"""Constructive extraction of a legal subwidget from a valid widget.

The engine realizes the constructive argument behind the containment
theorem ("every valid widget contains a legal subwidget") as an executable,
certificate-producing procedure:

* entry step — if removing some single pair leaves a legal subwidget,
  return it immediately;
* otherwise, sign-flip pairs so the all-plus section restricted to the
  first n-1 pairs spans n-1 dimensions, then repeatedly either extract a
  subwidget directly (all opposites of a deficient positive section lie in
  its span) or perturb one plus point by a multiple of its opposite so the
  deficiency count k strictly drops;
* if k ever reaches 0 with nothing found, the widget could not have been
  valid in the first place — that state is emitted as a TheoremViolation
  diagnostic rather than trusted silently. It must never occur over the
  rationals; over GF(p) the sweep of perturbation constants can instead
  run out, which surfaces as FieldTooSmallError.

Everything the engine emits is re-verified through the checkers before it
is returned: certify, don't trust.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import checkers
from .errors import ContractError, FieldTooSmallError, InputError
from .fields import PrimeField, Scalar
from .linalg import Echelon
from .model import (MINUS, PLUS, SKIP, VALID, LEGAL_SUBWIDGET_FOUND,
                    THEOREM_VIOLATION, Certificate, Relabeling, Section,
                    SubwidgetSel, Widget, relabel)

# Re-verify widget validity and legality inside the reduction loop. The
# loop is only reachable on inputs that defeat the entry step, so the cost
# is irrelevant; the checks guard the implementation, not the theorem.
STRICT_CHECKS = True

KIND_RELABEL = "Relabel"
KIND_PERTURB = "Perturb"
KIND_BRANCH = "BranchSubwidgetFound"
KIND_KZERO = "KZero"


@dataclass(frozen=True)
class ProofStep:
    """One replayable step of an engine run.

    ``section_dims[j]`` is the span dimension of the deleted positive
    section for pair j+1 after the step; ``k_before``/``k_after`` count the
    deficient ones. Relabel steps carry the sign flips they applied so a
    trace can be replayed exactly.
    """

    kind: str
    k_before: int
    k_after: int
    section_dims: tuple[int, ...]
    pair_index: Optional[int] = None
    c: Optional[Scalar] = None
    sign_flips: Optional[tuple[int, ...]] = None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "pair_index": self.pair_index,
            "c": None if self.c is None else str(self.c),
            "k_before": self.k_before,
            "k_after": self.k_after,
            "section_dims": list(self.section_dims),
            "sign_flips": list(self.sign_flips)
            if self.sign_flips is not None else None,
        }


def positive_section(w: Widget) -> Section:
    """The all-plus section."""
    return (PLUS,) * w.n


def deleted_positive_section(w: Widget, i: int) -> Section:
    """The all-plus section with pair i (1-based) skipped."""
    if not 1 <= i <= w.n:
        raise InputError(f"pair index {i} out of range 1..{w.n}")
    return tuple(SKIP if j == i else PLUS for j in range(1, w.n + 1))


def _deleted_rows(w: Widget, i: int) -> list:
    rows = w._rank_rows
    return [rows[j][0] for j in range(w.n) if j != i - 1]


def k_statistic(w: Widget) -> tuple[int, tuple[int, ...]]:
    """Deficiency count of the deleted positive sections.

    Returns (k, dims) where dims[i-1] = span dimension of the all-plus
    section with pair i removed, and k counts those below n-1.
    """
    from .linalg import rank_of_rows

    n = w.n
    dims = tuple(
        rank_of_rows(_deleted_rows(w, i), w.field) for i in range(1, n + 1)
    )
    k = sum(1 for d in dims if d < n - 1)
    return k, dims


def perturb(w: Widget, i: int, c) -> Widget:
    """Replace pair i's plus point by plus + c * minus.

    Inverted by ``perturb(result, i, -c)``. Applied to a valid widget the
    result is again valid for every c: the span of any section that pinned
    both points of pair i already contains the new point, and the total
    span of the widget is unchanged.
    """
    if not 1 <= i <= w.n:
        raise InputError(f"pair index {i} out of range 1..{w.n}")
    f = w.field
    c = f.coerce(c)
    plus, minus = w.pairs[i - 1]
    new_plus = tuple(f.add(a, f.mul(c, b)) for a, b in zip(plus, minus))
    pairs = list(w.pairs)
    pairs[i - 1] = (new_plus, minus)
    return Widget(field=w.field, ambient_dim=w.ambient_dim, pairs=tuple(pairs))


@dataclass(frozen=True)
class BranchSubwidgetFound:
    """A deficient positive section whose opposites all lie in its span:
    the other n-1 pairs form a legal subwidget outright."""

    sel: SubwidgetSel
    section_index: int


@dataclass(frozen=True)
class Perturbed:
    """One accepted perturbation; k dropped from k_before to k_after."""

    widget: Widget
    pair_index: int
    c: Scalar
    k_before: int
    k_after: int
    section_dims: tuple[int, ...]


StepOutcome = Union[BranchSubwidgetFound, Perturbed]

# Over the rationals at most one constant per other positive section can
# shrink that section's span (the rank-drop locus of a row linear in c is a
# single point), so n candidates always suffice; the margin is defensive.
_RATIONAL_SWEEP_CAP_SLACK = 16


def _sweep_limit(w: Widget) -> int:
    if isinstance(w.field, PrimeField):
        return w.field.p - 1
    return 4 * w.n + _RATIONAL_SWEEP_CAP_SLACK


def _reduce_step(w: Widget, k: int, dims: tuple[int, ...]) -> StepOutcome:
    """One k-reduction step; caller guarantees the loop preconditions."""
    n = w.n
    target = n - 1
    i = next(j + 1 for j, d in enumerate(dims) if d < target)

    ech = Echelon(_deleted_rows(w, i), w.field)
    if ech.rank != n - 2:
        raise ContractError(
            f"deficient positive section {i} spans {ech.rank}, expected "
            f"exactly {n - 2}; some deleted positive section must span {target}"
        )

    rows = w._rank_rows
    outside = [
        m for m in range(1, n + 1)
        if m != i and not ech.contains(rows[m - 1][1])
    ]
    if not outside:
        # every point of the n-1 pairs lies in an (n-2)-space: legal.
        sel = tuple(m for m in range(1, n + 1) if m != i)
        return BranchSubwidgetFound(sel=sel, section_index=i)

    # Perturbing pair m can only lift the deficient section to n-1 when
    # its plus point is redundant there (the other points still span q);
    # for such m every c != 0 lifts the section and only finitely many c
    # shrink another one. Pivotal points are skipped: no c helps them.
    limit = _sweep_limit(w)
    tried = 0
    for m in outside:
        others = [rows[j - 1][0] for j in range(1, n + 1) if j not in (i, m)]
        if not Echelon(others, w.field).contains(rows[m - 1][0]):
            continue
        swept = 0
        for c in w.field.nonzero_constants():
            if swept >= limit:
                break
            swept += 1
            tried += 1
            w2 = perturb(w, m, c)
            k2, dims2 = k_statistic(w2)
            if dims2[i - 1] != target:
                continue
            if any(dims2[j] < dims[j] for j in range(n) if j != i - 1):
                continue
            if STRICT_CHECKS and n <= 8:
                if not checkers.is_legal(w2)[0] or not checkers.is_full(w2):
                    raise ContractError(
                        "perturbation broke validity; engine invariant violated"
                    )
            if k2 >= k:
                raise ContractError("accepted perturbation did not lower k")
            return Perturbed(widget=w2, pair_index=m, c=c, k_before=k,
                             k_after=k2, section_dims=dims2)

    if isinstance(w.field, PrimeField):
        raise FieldTooSmallError(w.field.p, tried)
    raise ContractError(
        f"perturbation sweep found no workable (pair, c) after {tried} "
        f"candidates for deficient section {i}; the k-reduction argument "
        f"only guarantees one when no single-pair removal is legal"
    )


def reduce_k_step(w: Widget) -> StepOutcome:
    """Public single-step form with full precondition checking.

    Requires: w valid, k > 0, and at least one deleted positive section
    spanning n-1. Raises ContractError otherwise; over GF(p) the sweep can
    exhaust the field, raising FieldTooSmallError.

    The k-reduction argument guarantees an outcome only when no
    single-pair removal is legal (the state the extraction loop runs in).
    Direct calls on widgets outside that state can hit deficient sections
    where every outside opposite belongs to a pivotal point; no constant
    works there and the sweep ends in ContractError.
    """
    cert = checkers.is_valid(w)
    if cert.verdict != VALID:
        raise ContractError(f"reduce_k_step needs a valid widget, got {cert.verdict}")
    k, dims = k_statistic(w)
    if k == 0:
        raise ContractError("reduce_k_step needs k > 0")
    if max(dims) < w.n - 1:
        raise ContractError(
            f"no deleted positive section spans {w.n - 1}; dims={dims}"
        )
    return _reduce_step(w, k, dims)


def _entry_subwidget(w: Widget) -> Optional[tuple[SubwidgetSel, int]]:
    """First legal single-pair-removal subwidget, scanning i = n down to 1.

    If any legal subwidget exists at all, one of these is legal too (a
    smaller legal subwidget sits inside some single-pair removal, and
    containing a legal subwidget forces legality), so a miss here means no
    legal subwidget exists anywhere in the widget.
    """
    n = w.n
    for i in range(n, 0, -1):
        idxs0 = tuple(j for j in range(n) if j != i - 1)
        if checkers._legal_on_indices(w, idxs0):
            return tuple(j + 1 for j in idxs0), i
    return None


def extract_legal_subwidget(w: Widget) -> Certificate:
    """Run the constructive procedure; certify every claim before emitting.

    Invalid input returns its validity certificate unchanged. On a valid
    widget the result is LegalSubwidgetFound with a replayable trace, or a
    TheoremViolation diagnostic (never over the rationals). Over GF(p)
    FieldTooSmallError propagates when the constant sweep runs dry.
    """
    cert = checkers.is_valid(w)
    if cert.verdict != VALID:
        return cert

    n = w.n
    k0, dims0 = k_statistic(w)

    entry = _entry_subwidget(w)
    if entry is not None:
        sel, removed = entry
        step = ProofStep(kind=KIND_BRANCH, k_before=k0, k_after=k0,
                         section_dims=dims0, pair_index=removed)
        return _certify(w, sel, (step,))

    # No single-pair removal is legal, so in particular the first n-1 pairs
    # have a skip-free section spanning n-1; flip signs so it is the all-plus
    # one. The subsequent loop only ever sees widgets in this normal form.
    flips = _normalizing_flips(w)
    rel = Relabeling.identity(n, flips)
    w_cur = relabel(w, rel)
    k, dims = k_statistic(w_cur)
    steps = [ProofStep(kind=KIND_RELABEL, k_before=k0, k_after=k,
                       section_dims=dims, sign_flips=tuple(sorted(flips)))]

    perturbs = 0
    while True:
        if k == 0:
            steps.append(ProofStep(kind=KIND_KZERO, k_before=0, k_after=0,
                                   section_dims=dims))
            return Certificate(verdict=THEOREM_VIOLATION, trace=tuple(steps))
        if STRICT_CHECKS and checkers.is_valid(w_cur).verdict != VALID:
            raise ContractError("loop widget lost validity; engine bug")
        outcome = _reduce_step(w_cur, k, dims)
        if isinstance(outcome, BranchSubwidgetFound):
            steps.append(ProofStep(kind=KIND_BRANCH, k_before=k, k_after=k,
                                   section_dims=dims,
                                   pair_index=outcome.section_index))
            sel = rel.sel_to_original(outcome.sel)
            return _certify(w, sel, tuple(steps))
        perturbs += 1
        if perturbs > n:
            raise ContractError("more perturbation steps than pairs; engine bug")
        steps.append(ProofStep(kind=KIND_PERTURB, k_before=outcome.k_before,
                               k_after=outcome.k_after,
                               section_dims=outcome.section_dims,
                               pair_index=outcome.pair_index, c=outcome.c))
        w_cur = outcome.widget
        k, dims = outcome.k_after, outcome.section_dims


def _normalizing_flips(w: Widget) -> tuple[int, ...]:
    """Sign flips making some skip-free section of the first n-1 pairs,
    one of span n-1, the all-plus one. Exists whenever that subwidget is
    not legal; scan order matches maximal-section enumeration."""
    n = w.n
    rows = w._rank_rows
    from .linalg import rank_of_rows

    for m in range(1 << (n - 1)):
        sec = [rows[i][(m >> i) & 1] for i in range(n - 1)]
        if rank_of_rows(sec, w.field) == n - 1:
            return tuple(i + 1 for i in range(n - 1) if (m >> i) & 1)
    raise ContractError(
        "no section of the first n-1 pairs spans n-1; entry step should "
        "have fired"
    )


def _certify(w: Widget, sel: SubwidgetSel, steps: tuple) -> Certificate:
    if not checkers.is_legal_subwidget(w, sel):
        raise ContractError(
            f"engine produced selection {sel} that fails re-verification"
        )
    return Certificate(verdict=LEGAL_SUBWIDGET_FOUND, subwidget=sel,
                       trace=steps)


def replay_trace(w: Widget, steps) -> list[Widget]:
    """Re-apply a trace; returns the widget state after every step.

    Relabel and Perturb steps transform the widget; the terminal kinds
    leave it unchanged. Replaying an engine trace on the engine's input
    reproduces each intermediate widget exactly.
    """
    out = []
    cur = w
    for step in steps:
        if step.kind == KIND_RELABEL:
            cur = relabel(cur, Relabeling.identity(cur.n, step.sign_flips or ()))
        elif step.kind == KIND_PERTURB:
            cur = perturb(cur, step.pair_index, step.c)
        out.append(cur)
    return out
