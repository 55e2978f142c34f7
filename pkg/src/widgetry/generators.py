"""Instance generators, the theorem fuzzer, and the finite-field census.

Randomness discipline: every generator draws from Python's Mersenne
Twister (``random.Random``) seeded through ``derive_seed``, which hashes a
(seed, path...) tuple with SHA-256. Identical configs therefore produce
bit-identical widgets, and per-trial child seeds make fuzz runs
reproducible and order-independent. No global randomness anywhere.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Iterator, Optional

from . import checkers, engine
from .errors import ConfigError, FieldTooSmallError, GenerationError
from .fields import RATIONAL, FieldDesc, PrimeField, RationalField, field_to_json
from .linalg import Echelon, PointMatrix, span_dim
from .model import (VALID, LEGAL_SUBWIDGET_FOUND, THEOREM_VIOLATION,
                    Certificate, Widget, certificate_to_json_dict, subwidget,
                    widget_to_json_dict)

KINDS = ("valid_planted", "legal_not_full", "full_not_legal",
         "uniform_random", "valid_rejection")

RETRY_CAP = 100_000


def derive_seed(seed: int, *path) -> int:
    """Stable 64-bit child seed from a parent seed and a path of labels."""
    text = ":".join(str(x) for x in (seed, *path))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class GenConfig:
    n: int
    dim: int
    field: FieldDesc = RATIONAL
    kind: str = "uniform_random"
    sub_k: Optional[int] = None
    bound: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown generator kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.dim < 0:
            raise ConfigError("dim must be nonnegative")
        if self.bound < 1:
            raise ConfigError("bound must be at least 1")
        if self.sub_k is not None and not 1 <= self.sub_k < self.n:
            raise ConfigError(
                f"sub_k must satisfy 1 <= k < n, got k={self.sub_k} n={self.n}"
            )


def _random_point(rng, d: int, fld: FieldDesc, bound: int) -> tuple:
    return tuple(fld.random_scalar(rng, bound) for _ in range(d))


def _combo(rng, basis, d: int, fld: FieldDesc, bound: int) -> tuple:
    """Random linear combination of basis vectors (zero point if empty)."""
    pt = [fld.zero()] * d
    for v in basis:
        c = fld.random_scalar(rng, bound)
        for j in range(d):
            pt[j] = fld.add(pt[j], fld.mul(c, v[j]))
    return tuple(pt)


def _unit(j: int, d: int, fld: FieldDesc) -> tuple:
    return tuple(fld.one() if i == j else fld.zero() for i in range(d))


def _pair_up(points) -> tuple:
    return tuple((points[2 * i], points[2 * i + 1])
                 for i in range(len(points) // 2))


def random_invertible_matrix(rng, d: int, fld: FieldDesc,
                             bound: int) -> PointMatrix:
    for _ in range(RETRY_CAP):
        rows = tuple(_random_point(rng, d, fld, bound) for _ in range(d))
        m = PointMatrix(fld, rows)
        if m.is_invertible():
            return m
    raise GenerationError(f"could not draw an invertible {d}x{d} matrix")


def gen_valid_planted(cfg: GenConfig) -> Widget:
    """Valid widget with a known legal subwidget planted and then hidden.

    k pairs are placed inside a random (k-1)-dimensional subspace (any
    point set there is a legal size-k widget); the remaining n-k pairs get
    enough fresh coordinate directions to force fullness. Legality of the
    whole widget is automatic: a legal subwidget caps every section at
    (k-1) + (n-k) = n-1 dimensions. A random change of basis plus random
    validity-preserving perturbations then obfuscate the plant.
    """
    n, d, fld, bound = cfg.n, cfg.dim, cfg.field, cfg.bound
    if d < n:
        raise ConfigError(
            f"valid_planted needs dim >= n for guaranteed fullness "
            f"(n={n}, dim={d})"
        )
    rng = random.Random(derive_seed(cfg.seed, "valid_planted", n, d))
    k = cfg.sub_k if cfg.sub_k is not None else rng.randint(1, n - 1)

    basis: list[tuple] = []
    if k > 1:
        for _ in range(RETRY_CAP):
            basis = [_random_point(rng, d, fld, bound) for _ in range(k - 1)]
            if span_dim(basis, fld) == k - 1:
                break
        else:
            raise GenerationError(f"no independent plant basis found for {cfg}")

    plant_points = list(basis)
    while len(plant_points) < 2 * k:
        plant_points.append(_combo(rng, basis, d, fld, bound))

    ech = Echelon(plant_points, fld)
    fresh: list[tuple] = []
    for j in range(d):
        e = _unit(j, d, fld)
        if ech.add(e):
            fresh.append(e)
        if len(fresh) == n - k + 1:
            break
    outer_points = list(fresh)
    while len(outer_points) < 2 * (n - k):
        outer_points.append(_random_point(rng, d, fld, bound))

    w = Widget(field=fld, ambient_dim=d,
               pairs=_pair_up(plant_points) + _pair_up(outer_points))

    w = apply_obfuscation(w, rng, bound)
    if checkers.is_valid(w).verdict != VALID:
        raise GenerationError(f"planted generator postcondition failed for {cfg}")
    return w


def apply_obfuscation(w: Widget, rng, bound: int) -> Widget:
    """Random basis change plus n random perturbations; verdict-preserving."""
    from .model import apply_linear

    m = random_invertible_matrix(rng, w.ambient_dim, w.field, bound)
    w = apply_linear(w, m)
    for _ in range(w.n):
        i = rng.randint(1, w.n)
        c = w.field.random_scalar(rng, bound)
        w = engine.perturb(w, i, c)
    return w


def gen_legal_not_full(cfg: GenConfig) -> Widget:
    """All 2n points inside an (n-1)-dimensional subspace: legality and
    non-fullness both come for free."""
    n, d, fld, bound = cfg.n, cfg.dim, cfg.field, cfg.bound
    rng = random.Random(derive_seed(cfg.seed, "legal_not_full", n, d))
    if d <= n - 1:
        points = [_random_point(rng, d, fld, bound) for _ in range(2 * n)]
    else:
        basis = []
        if n > 1:
            for _ in range(RETRY_CAP):
                basis = [_random_point(rng, d, fld, bound) for _ in range(n - 1)]
                if span_dim(basis, fld) == n - 1:
                    break
            else:
                raise GenerationError(f"no subspace basis found for {cfg}")
        points = [_combo(rng, basis, d, fld, bound) for _ in range(2 * n)]
    w = Widget(field=fld, ambient_dim=d, pairs=_pair_up(points))
    if not checkers.is_legal(w)[0] or checkers.is_full(w):
        raise GenerationError(f"legal_not_full postcondition failed for {cfg}")
    return w


def gen_full_not_legal(cfg: GenConfig) -> Widget:
    """Rejection-sample uniform widgets until one is full and not legal."""
    n, d, fld, bound = cfg.n, cfg.dim, cfg.field, cfg.bound
    rng = random.Random(derive_seed(cfg.seed, "full_not_legal", n, d))
    for _ in range(RETRY_CAP):
        points = [_random_point(rng, d, fld, bound) for _ in range(2 * n)]
        w = Widget(field=fld, ambient_dim=d, pairs=_pair_up(points))
        if not checkers.is_legal(w)[0] and checkers.is_full(w):
            return w
    raise GenerationError(f"retry cap exceeded for {cfg}")


def gen_uniform(cfg: GenConfig) -> Widget:
    n, d, fld, bound = cfg.n, cfg.dim, cfg.field, cfg.bound
    rng = random.Random(derive_seed(cfg.seed, "uniform_random", n, d))
    points = [_random_point(rng, d, fld, bound) for _ in range(2 * n)]
    return Widget(field=fld, ambient_dim=d, pairs=_pair_up(points))


def gen_valid_rejection(cfg: GenConfig,
                        retry_cap: int = RETRY_CAP) -> tuple[Widget, int]:
    """Valid widgets without planted structure, plus the attempt count.

    Uniform sampling almost never hits a valid widget, so points are drawn
    from a union of a few random low-dimensional subspaces (including the
    zero subspace), which is where valid configurations live. Acceptance
    rates drop fast with n; the retry cap turns that into a GenerationError.
    """
    n, d, fld, bound = cfg.n, cfg.dim, cfg.field, cfg.bound
    rng = random.Random(derive_seed(cfg.seed, "valid_rejection", n, d))
    for attempt in range(1, retry_cap + 1):
        bases = []
        for _ in range(3):
            sub_dim = rng.randint(0, n - 1)
            bases.append([_random_point(rng, d, fld, bound)
                          for _ in range(sub_dim)])
        points = [_combo(rng, rng.choice(bases), d, fld, bound)
                  for _ in range(2 * n)]
        w = Widget(field=fld, ambient_dim=d, pairs=_pair_up(points))
        if checkers.is_valid(w).verdict == VALID:
            return w, attempt
    raise GenerationError(f"retry cap {retry_cap} exceeded for {cfg}")


def generate_with_stats(cfg: GenConfig) -> tuple[Widget, int]:
    """Dispatch on cfg.kind; returns (widget, attempts)."""
    if cfg.kind == "valid_planted":
        return gen_valid_planted(cfg), 1
    if cfg.kind == "legal_not_full":
        return gen_legal_not_full(cfg), 1
    if cfg.kind == "full_not_legal":
        return gen_full_not_legal(cfg), 1
    if cfg.kind == "uniform_random":
        return gen_uniform(cfg), 1
    if cfg.kind == "valid_rejection":
        return gen_valid_rejection(cfg)
    raise ConfigError(f"unknown generator kind {cfg.kind!r}")


def generate(cfg: GenConfig) -> Widget:
    return generate_with_stats(cfg)[0]


# ---------------------------------------------------------------------------
# Exhaustive enumeration over GF(p)
# ---------------------------------------------------------------------------

ENUM_BUDGET = 1 << 28


def gf_widget_count(p: int, n: int, dim: int) -> int:
    return p ** (2 * n * dim)


def _raw_enumerate(p: int, n: int, dim: int) -> Iterator[tuple]:
    """All coordinate assignments, lexicographic with the first coordinate
    of pair 1's plus point as the most significant digit."""
    total = gf_widget_count(p, n, dim)
    width = 2 * n * dim
    for idx in range(total):
        digits = []
        x = idx
        for _ in range(width):
            digits.append(x % p)
            x //= p
        digits.reverse()
        points = tuple(tuple(digits[i * dim:(i + 1) * dim])
                       for i in range(2 * n))
        yield _pair_up(points)


def enumerate_widgets_gf(p: int, n: int, dim: int,
                         budget: int = ENUM_BUDGET) -> Iterator[Widget]:
    """Every widget over GF(p)^dim with n pairs; exactly p^(2*n*dim) of them."""
    fld = PrimeField(p)
    total = gf_widget_count(p, n, dim)
    if total > budget:
        raise ConfigError(
            f"census of {total} widgets exceeds the budget of {budget}"
        )
    for pairs in _raw_enumerate(p, n, dim):
        yield Widget(field=fld, ambient_dim=dim, pairs=pairs)


@dataclass
class CensusReport:
    prime: int
    n: int
    dim: int
    total: int
    legal: int
    full: int
    valid: int
    valid_with_legal_subwidget: int
    theorem_violations: int
    engine_oracle_disagreements: int
    findings: list = dc_field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "prime": self.prime,
            "n": self.n,
            "dim": self.dim,
            "total": self.total,
            "legal": self.legal,
            "full": self.full,
            "valid": self.valid,
            "valid_with_legal_subwidget": self.valid_with_legal_subwidget,
            "theorem_violations": self.theorem_violations,
            "engine_oracle_disagreements": self.engine_oracle_disagreements,
            "findings": self.findings,
        }


def _canonical_class(pairs) -> tuple:
    """Key identifying widgets up to pair order and plus/minus swaps, which
    preserve legality, fullness, validity and subwidget existence."""
    return tuple(sorted(tuple(sorted(pair)) for pair in pairs))


def census_gf(p: int, n: int, dim: int, budget: int = ENUM_BUDGET) -> CensusReport:
    """Classify every widget over GF(p)^dim with n pairs.

    Verdicts are computed once per equivalence class (pair order and sign
    swaps never change them) and multiplied out by class size, so the
    census stays exact while skipping redundant rank work. Each valid
    class also runs the proof engine against the brute-force search, and
    any theorem violation is re-verified and reported as a finding.
    """
    fld = PrimeField(p)
    total = gf_widget_count(p, n, dim)
    if total > budget:
        raise ConfigError(
            f"census of {total} widgets exceeds the budget of {budget}"
        )
    cache: dict = {}
    report = CensusReport(prime=p, n=n, dim=dim, total=0, legal=0, full=0,
                          valid=0, valid_with_legal_subwidget=0,
                          theorem_violations=0,
                          engine_oracle_disagreements=0)
    finding_classes: dict = {}

    for pairs in _raw_enumerate(p, n, dim):
        key = _canonical_class(pairs)
        res = cache.get(key)
        if res is None:
            w = Widget(field=fld, ambient_dim=dim, pairs=key)
            legal = checkers.is_legal(w)[0]
            full = checkers.is_full(w)
            valid = legal and full
            oracle_found = False
            agree = True
            finding = None
            if valid:
                oracle_found = bool(checkers.find_legal_subwidget(w, "minimal"))
                try:
                    cert = engine.extract_legal_subwidget(w)
                    engine_found = cert.verdict == LEGAL_SUBWIDGET_FOUND
                    engine_outcome = cert.verdict
                except FieldTooSmallError as e:
                    engine_found = False
                    engine_outcome = f"FieldTooSmall({e.p})"
                agree = engine_found == oracle_found
                if not oracle_found:
                    # re-verify before reporting: the claim is checkable
                    # from validity plus the exhaustive subwidget search.
                    still_valid = checkers.is_valid(w).verdict == VALID
                    still_none = not checkers.find_legal_subwidget(w, "all")
                    if still_valid and still_none:
                        finding = {
                            "widget": widget_to_json_dict(w),
                            "certificate": certificate_to_json_dict(
                                Certificate(verdict=THEOREM_VIOLATION)),
                            "engine_outcome": engine_outcome,
                            "count": 0,
                        }
            res = (legal, full, valid, oracle_found, agree, finding)
            cache[key] = res
            if finding is not None:
                finding_classes[key] = finding
        legal, full, valid, oracle_found, agree, finding = res
        report.total += 1
        report.legal += legal
        report.full += full
        report.valid += valid
        report.valid_with_legal_subwidget += valid and oracle_found
        report.theorem_violations += valid and not oracle_found
        report.engine_oracle_disagreements += not agree
        if finding is not None:
            finding_classes[_canonical_class(pairs)]["count"] += 1

    report.findings = [finding_classes[k] for k in sorted(finding_classes)]
    return report


# ---------------------------------------------------------------------------
# Theorem fuzzer
# ---------------------------------------------------------------------------

def parse_range_spec(spec: str, n: Optional[int] = None) -> tuple[int, int]:
    """Parse "4", "2..6", or n-relative forms like "n..n+2" (needs n)."""
    def term(tok: str) -> int:
        tok = tok.strip()
        if tok == "n":
            if n is None:
                raise ConfigError("'n' is not allowed in this range")
            return n
        if tok.startswith("n+") or tok.startswith("n-"):
            if n is None:
                raise ConfigError("'n' is not allowed in this range")
            return n + int(tok[1:])
        return int(tok)

    try:
        if ".." in spec:
            lo_s, hi_s = spec.split("..", 1)
            lo, hi = term(lo_s), term(hi_s)
        else:
            lo = hi = term(spec)
    except (ValueError, TypeError):
        raise ConfigError(f"bad range spec {spec!r}") from None
    if lo > hi:
        raise ConfigError(f"empty range {spec!r}")
    return lo, hi


@dataclass(frozen=True)
class FuzzConfig:
    n_spec: str = "2..6"
    dim_spec: str = "n..n+2"
    field: FieldDesc = RATIONAL
    bound: int = 3
    seed: int = 0
    kinds: tuple = KINDS
    # valid_rejection acceptance collapses as n grows; above this n the
    # schedule substitutes valid_planted (deterministically).
    rejection_max_n: int = 3

    def __post_init__(self):
        lo, _ = parse_range_spec(self.n_spec)
        parse_range_spec(self.dim_spec, n=lo)
        for kind in self.kinds:
            if kind not in KINDS:
                raise ConfigError(f"unknown generator kind {kind!r}")
        if not self.kinds:
            raise ConfigError("kinds must be nonempty")


@dataclass
class FuzzReport:
    seed: int
    trials: int
    kind_counts: dict = dc_field(default_factory=dict)
    generation_errors: int = 0
    rejection_attempts: int = 0
    valid_count: int = 0
    theorem_holds_count: int = 0
    corollary_agreements: int = 0
    engine_oracle_agreements: int = 0
    engine_found_count: int = 0
    minimal_not_full_count: int = 0
    trace_replay_failures: int = 0
    perturb_budget_failures: int = 0
    theorem_violation_count: int = 0
    field_too_small_count: int = 0
    findings: list = dc_field(default_factory=list)
    counterexamples: list = dc_field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "kind_counts": dict(sorted(self.kind_counts.items())),
            "generation_errors": self.generation_errors,
            "rejection_attempts": self.rejection_attempts,
            "valid_count": self.valid_count,
            "theorem_holds_count": self.theorem_holds_count,
            "corollary_agreements": self.corollary_agreements,
            "engine_oracle_agreements": self.engine_oracle_agreements,
            "engine_found_count": self.engine_found_count,
            "minimal_not_full_count": self.minimal_not_full_count,
            "trace_replay_failures": self.trace_replay_failures,
            "perturb_budget_failures": self.perturb_budget_failures,
            "theorem_violation_count": self.theorem_violation_count,
            "field_too_small_count": self.field_too_small_count,
            "findings": self.findings,
            "counterexamples": self.counterexamples,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _record_problem(report: FuzzReport, rational: bool, trial: int,
                    kind: str, w: Widget, reason: str, cert=None) -> None:
    entry = {
        "trial": trial,
        "generator_kind": kind,
        "reason": reason,
        "widget": widget_to_json_dict(w),
        "certificate": certificate_to_json_dict(cert) if cert else None,
    }
    if rational:
        report.counterexamples.append(entry)
    else:
        report.findings.append(entry)


def fuzz_theorem(cfg: FuzzConfig, trials: int) -> FuzzReport:
    """Generate widgets and hold every checker and the engine to account.

    Per trial: generate per the kind schedule, then test the containment
    theorem (valid implies a legal subwidget exists), the validity
    biconditional, the legal-but-not-full corollary, and engine/oracle
    agreement including certificate re-verification and trace replay.
    Disagreements over the rationals are counterexamples; over GF(p) they
    are findings. Both are re-verified before being recorded.
    """
    rational = isinstance(cfg.field, RationalField)
    report = FuzzReport(seed=cfg.seed, trials=trials)
    kind_counts: Counter = Counter()

    for t in range(trials):
        rng = random.Random(derive_seed(cfg.seed, "trial", t))
        n = rng.randint(*parse_range_spec(cfg.n_spec))
        d = rng.randint(*parse_range_spec(cfg.dim_spec, n=n))
        kind = cfg.kinds[t % len(cfg.kinds)]
        if kind == "valid_rejection" and n > cfg.rejection_max_n:
            kind = "valid_planted"
        if kind == "valid_planted" and d < n:
            d = n
        gen_cfg = GenConfig(n=n, dim=d, field=cfg.field, kind=kind,
                            bound=cfg.bound,
                            seed=derive_seed(cfg.seed, "gen", t))
        try:
            w, attempts = generate_with_stats(gen_cfg)
        except GenerationError:
            report.generation_errors += 1
            continue
        kind_counts[kind] += 1
        if kind == "valid_rejection":
            report.rejection_attempts += attempts

        _run_trial_checks(report, rational, t, kind, w)

    report.kind_counts = dict(kind_counts)
    return report


def _run_trial_checks(report: FuzzReport, rational: bool, t: int,
                      kind: str, w: Widget) -> None:
    cert = checkers.is_valid(w)
    valid = cert.verdict == VALID
    sels = checkers.find_legal_subwidget(w, "minimal")
    oracle_found = bool(sels)
    full = checkers.is_full(w)

    if valid:
        report.valid_count += 1
        if oracle_found:
            report.theorem_holds_count += 1
        else:
            # re-verify before recording: the exhaustive search is the claim
            if checkers.is_valid(w).verdict == VALID and \
                    not checkers.find_legal_subwidget(w, "all"):
                _record_problem(report, rational, t, kind, w,
                                "valid widget with no legal subwidget", cert)

    if valid == (full and oracle_found):
        report.corollary_agreements += 1
    else:
        _record_problem(report, rational, t, kind, w,
                        "validity biconditional mismatch", cert)

    if oracle_found:
        sel = sels[0]
        k = len(sel)
        sub = subwidget(w, sel)
        if span_dim(sub.all_points(), w.field) < k:
            if valid:
                report.minimal_not_full_count += 1
        else:
            _record_problem(report, rational, t, kind, w,
                            f"minimal legal subwidget {sel} is full", cert)

    try:
        ecert = engine.extract_legal_subwidget(w)
    except FieldTooSmallError:
        report.field_too_small_count += 1
        if oracle_found:
            _record_problem(report, rational, t, kind, w,
                            "engine exhausted field but oracle found a subwidget")
        else:
            report.engine_oracle_agreements += 1
        return

    engine_found = ecert.verdict == LEGAL_SUBWIDGET_FOUND
    if ecert.verdict == THEOREM_VIOLATION:
        report.theorem_violation_count += 1
        _record_problem(report, rational, t, kind, w,
                        "engine emitted TheoremViolation", ecert)
    if engine_found:
        report.engine_found_count += 1

    if valid:
        agree = engine_found == oracle_found
    else:
        agree = ecert.verdict == cert.verdict
    if agree:
        report.engine_oracle_agreements += 1
    else:
        _record_problem(report, rational, t, kind, w,
                        f"engine verdict {ecert.verdict} disagrees with "
                        f"checkers ({cert.verdict}, oracle_found={oracle_found})",
                        ecert)

    if engine_found:
        perturbs = sum(1 for s in ecert.trace if s.kind == engine.KIND_PERTURB)
        if perturbs > w.n:
            report.perturb_budget_failures += 1
            _record_problem(report, rational, t, kind, w,
                            f"{perturbs} perturbation steps exceed n={w.n}",
                            ecert)
        if not verify_trace(w, ecert):
            report.trace_replay_failures += 1
            _record_problem(report, rational, t, kind, w,
                            "trace replay mismatch", ecert)


def verify_trace(w: Widget, cert: Certificate) -> bool:
    """Replay a certificate trace and recheck every recorded statistic."""
    if not cert.trace:
        return True
    states = engine.replay_trace(w, cert.trace)
    for step, state in zip(cert.trace, states):
        k, dims = engine.k_statistic(state)
        if k != step.k_after or dims != step.section_dims:
            return False
    if cert.subwidget is not None:
        if not checkers.is_legal_subwidget(w, cert.subwidget):
            return False
    return True
