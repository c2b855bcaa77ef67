"""Randomized search for a perturbation that makes a candidate recurrent.

A draw ``omega`` translates the first-letter cylinders ``a in A1`` by
``c0 * rho * omega(a)``.  A net point ``t`` is served when some depth-2 word
pair sends it into ``L0``:

    T^w_b T'_b'(t) = (t + e'_b' - e^w_b) / rho  in  L0
    <=>  t  in  e^w_b - e'_b' + rho * L0.

The union of those translates is computed on integer numerators over a
common denominator; everything that ends up in a certificate is rechecked
with exact fractions.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from ._fixed import INT64_SAFE, common_denominator, encode
from .configuration import ConfigSpace, renormalize_word
from .ifs import HomogeneousIFS, PerturbationError, perturb
from .intervals import IntervalUnion
from .recurrent import CROSS, SELF, RecurrentCandidate
from .rational import RationalLike, as_fraction, fmt

OMEGA_BITS = 16
OMEGA_SCALE = 1 << OMEGA_BITS


class VerificationFailed(RuntimeError):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def workers_from_env() -> int:
    try:
        return max(1, int(os.environ.get("HOMCANTOR_WORKERS", "1")))
    except ValueError:
        return 1


# -- perturbation vectors ------------------------------------------------------

@dataclass(frozen=True)
class PerturbationVector:
    values: Mapping[str, Fraction]
    seed: int | None = None
    draw: int | None = None

    def __getitem__(self, a: str) -> Fraction:
        return self.values.get(a, Fraction(0))

    def to_json(self) -> dict:
        return {a: fmt(v) for a, v in self.values.items()}


def draw_omega(seed: int, index: int, A1: Sequence[str]) -> PerturbationVector:
    """Draw ``index`` of the stream ``seed``: a pure function of both."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))
    ks = rng.integers(-OMEGA_SCALE, OMEGA_SCALE, size=len(A1), endpoint=True)
    return PerturbationVector({a: Fraction(int(k), OMEGA_SCALE) for a, k in zip(A1, ks)},
                              seed, index)


def zero_omega(A1: Sequence[str]) -> PerturbationVector:
    return PerturbationVector({a: Fraction(0) for a in A1})


def perturbed_pair(cand: RecurrentCandidate, omega: PerturbationVector,
                   c0: RationalLike) -> tuple[HomogeneousIFS, HomogeneousIFS]:
    """``(K^w, K'^w)``; the second side is perturbed only in self mode."""
    Kw = perturb(cand.K, cand.A1, dict(omega.values), c0, step=cand.rho)
    return Kw, (Kw if cand.mode == SELF else cand.Kp)


# -- the net -----------------------------------------------------------------

def net_spacing(cand: RecurrentCandidate) -> Fraction:
    """``rho^{5/2} = r^5``."""
    return cand.r ** 5


def net_integers(cand: RecurrentCandidate, q: int | None = None):
    """Net numerators over ``q`` (default: the natural denominator) and ``q``."""
    delta = net_spacing(cand)
    ends = [x for c in cand.L1 for x in c]
    if q is None:
        q = common_denominator(ends, [delta])
    d = encode([delta], q)[0]
    chunks = []
    for lo, hi in zip(encode(ends[0::2], q), encode(ends[1::2], q)):
        count = max(1, -(-(hi - lo) // (2 * d)))
        dtype = np.int64 if max(abs(lo), abs(hi)) + 2 * d < INT64_SAFE else object
        k = np.arange(count, dtype=np.int64).astype(dtype)
        chunks.append(np.minimum(lo + d * (2 * k + 1), hi))
    if not chunks:
        return np.zeros(0, dtype=np.int64), q
    if any(c.dtype == object for c in chunks):
        chunks = [c.astype(object) for c in chunks]
    return np.concatenate(chunks), q


def delta_net(cand: RecurrentCandidate) -> list[Fraction]:
    """Points of ``L1``, at most ``rho^{5/2}`` from every point of ``L1``."""
    pts, q = net_integers(cand)
    return [Fraction(int(x), q) for x in pts]


def net_bound(cand: RecurrentCandidate) -> Fraction:
    """``2 (1 + s0) rho^{-5/2}``."""
    return 2 * (1 + cand.s0) / net_spacing(cand)


# -- membership, exact --------------------------------------------------------

def omega0_member(t: RationalLike, omega: PerturbationVector, cand: RecurrentCandidate,
                  c0: RationalLike):
    """``(True, (b, b'))`` if some depth-2 return of ``t`` lands in ``L0``."""
    t = as_fraction(t)
    Kw, Kpw = perturbed_pair(cand, omega, c0)
    space = ConfigSpace(Kw, Kpw)
    for w in cand.witnesses_at(t):
        if renormalize_word(space, t, w.b, w.bp) in cand.L0:
            return True, (w.b, w.bp)
    for b in itertools.product(Kw.labels, repeat=2):
        for bp in itertools.product(Kpw.labels, repeat=2):
            if renormalize_word(space, t, b, bp) in cand.L0:
                return True, (b, bp)
    return False, None


# -- fixed-point engine ---------------------------------------------------------

class SearchEngine:
    """Per-draw coverage of points by the return translates, in integers."""

    def __init__(self, cand: RecurrentCandidate, c0: RationalLike,
                 points: Sequence[Fraction] | None = None):
        self.cand = cand
        self.c0 = as_fraction(c0)
        K, Kp = cand.K, cand.Kp
        rho, r = cand.rho, cand.r
        self.words = list(itertools.product(K.labels, repeat=2))
        self.pwords = list(itertools.product(Kp.labels, repeat=2))
        eb = [K.word_offset(b) for b in self.words]
        ebp = [Kp.word_offset(b) for b in self.pwords]
        u1 = self.c0 * rho / OMEGA_SCALE
        u2 = u1 * r
        rl0 = [(rho * lo, rho * hi) for lo, hi in cand.L0]
        extra = list(points) if points is not None else []
        q = common_denominator(eb, ebp, [u1, u2], [x for p in rl0 for x in p], extra,
                               [x for c in cand.L1 for x in c], [net_spacing(cand)])
        self.q = q
        span = max([abs(x) for x in eb + ebp + extra] + [cand.s0 + 2]) * 4 + 4
        dtype = np.int64 if span * q < INT64_SAFE else object
        self.dtype = dtype

        def arr(xs):
            return np.array(encode(xs, q), dtype=dtype)

        if points is None:
            self.pts = net_integers(cand, q)[0].astype(dtype)
        else:
            self.pts = arr(extra)
        self._points = extra if points is not None else None
        self.eb = arr(eb)
        self.ebp = arr(ebp)
        self.u1, self.u2 = encode([u1, u2], q)
        self.rl0_lo = arr([p[0] for p in rl0])
        self.rl0_hi = arr([p[1] for p in rl0])
        idx = {a: i for i, a in enumerate(K.labels)}
        self.first = np.array([idx[b[0]] for b in self.words])
        self.second = np.array([idx[b[1]] for b in self.words])
        self.a1_index = [idx[a] for a in cand.A1]
        if cand.mode == CROSS and len(self.rl0_lo):
            self.s_lo, self.s_hi = kernels.shift_union(-self.ebp, self.rl0_lo, self.rl0_hi)
        pidx = {a: i for i, a in enumerate(Kp.labels)}
        self.pfirst = np.array([pidx[b[0]] for b in self.pwords])
        self.psecond = np.array([pidx[b[1]] for b in self.pwords])

    @property
    def points(self) -> list[Fraction]:
        if self._points is None:
            self._points = [Fraction(int(x), self.q) for x in self.pts]
        return self._points

    @property
    def n_points(self) -> int:
        return len(self.pts)

    def _k(self, omega: PerturbationVector) -> np.ndarray:
        k = np.zeros(self.cand.K.size, dtype=self.dtype)
        for a, i in zip(self.cand.A1, self.a1_index):
            v = omega[a] * OMEGA_SCALE
            if v.denominator != 1:
                raise ValueError("omega must lie on the dyadic grid")
            k[i] = int(v)
        return k

    def offsets(self, omega: PerturbationVector) -> tuple[np.ndarray, np.ndarray]:
        k = self._k(omega)
        eb = self.eb + k[self.first] * self.u1 + k[self.second] * self.u2
        if self.cand.mode == SELF:
            ebp = self.ebp + k[self.pfirst] * self.u1 + k[self.psecond] * self.u2
        else:
            ebp = self.ebp
        return eb, ebp

    def returns(self, omega: PerturbationVector):
        """Merged union of all return translates, as integer arrays."""
        if len(self.rl0_lo) == 0:
            return self.rl0_lo, self.rl0_hi
        eb, ebp = self.offsets(omega)
        if self.cand.mode == CROSS:
            return kernels.shift_union(eb, self.s_lo, self.s_hi)
        diffs = np.unique((eb[:, None] - ebp[None, :]).ravel())
        return kernels.shift_union(diffs, self.rl0_lo, self.rl0_hi)

    def covered(self, omega: PerturbationVector) -> np.ndarray:
        lo, hi = self.returns(omega)
        return kernels.covered_mask(self.pts, lo, hi)

    def witness_codes(self, omega: PerturbationVector) -> np.ndarray:
        """Per point a code ``(i * |B'| + j) * |L0| + comp`` of a covering
        translate ``e^w_bi - e'_bj + rho * L0[comp]``, or -1."""
        eb, ebp = self.offsets(omega)
        nc = len(self.rl0_lo)
        if nc == 0:
            return np.full(len(self.pts), -1, dtype=np.int64)
        d = (eb[:, None] - ebp[None, :]).ravel()
        lo = (d[:, None] + self.rl0_lo[None, :]).ravel()
        hi = (d[:, None] + self.rl0_hi[None, :]).ravel()
        return np.asarray(kernels.reach_witness(self.pts, lo, hi), dtype=np.int64)

    def decode(self, code: int) -> tuple:
        pair, comp = divmod(int(code), len(self.rl0_lo))
        i, j = divmod(pair, len(self.pwords))
        return self.words[i], self.pwords[j], comp


# -- search ------------------------------------------------------------------

@dataclass
class SearchStats:
    trials: int = 0
    invalid: int = 0
    failures: list[int] = field(default_factory=list)
    uncovered_per_trial: list[int] = field(default_factory=list)

    @property
    def invalid_rate(self) -> float:
        return self.invalid / self.trials if self.trials else 0.0

    @property
    def misconfigured(self) -> bool:
        return self.invalid_rate > 0.5

    def to_json(self) -> dict:
        return {"trials": self.trials, "invalid": self.invalid,
                "misconfigured": self.misconfigured,
                "uncovered_per_trial": list(self.uncovered_per_trial),
                "failures_per_point": list(self.failures)}


@dataclass
class SearchResult:
    success: bool
    omega: PerturbationVector | None
    stats: SearchStats
    engine: SearchEngine


def _evaluate(engine: SearchEngine, seed: int, index: int):
    omega = draw_omega(seed, index, engine.cand.A1)
    try:
        perturbed_pair(engine.cand, omega, engine.c0)
    except PerturbationError:
        return index, omega, None
    return index, omega, engine.covered(omega)


def search_omega(cand: RecurrentCandidate, trials: int, seed: int, c0: RationalLike,
                 workers: int | None = None, engine: SearchEngine | None = None) -> SearchResult:
    """First draw (lowest index) whose returns serve every net point."""
    engine = engine or SearchEngine(cand, c0)
    stats = SearchStats(failures=[0] * engine.n_points)
    if not engine.n_points:
        return SearchResult(True, zero_omega(cand.A1), stats, engine)
    workers = workers or workers_from_env()
    fails = np.zeros(engine.n_points, dtype=np.int64)
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        start = 0
        while start < trials:
            batch = range(start, min(trials, start + max(workers, 1) * 4))
            if pool is None:
                results = [_evaluate(engine, seed, i) for i in batch]
            else:
                results = list(pool.map(lambda i: _evaluate(engine, seed, i), batch))
            for index, omega, cov in results:  # in draw order
                stats.trials += 1
                if cov is None:
                    stats.invalid += 1
                    stats.uncovered_per_trial.append(-1)
                    continue
                fails += ~cov
                miss = int((~cov).sum())
                stats.uncovered_per_trial.append(miss)
                if miss == 0:
                    stats.failures = fails.tolist()
                    return SearchResult(True, omega, stats, engine)
            start = batch.stop
    finally:
        if pool is not None:
            pool.shutdown()
    stats.failures = fails.tolist()
    return SearchResult(False, None, stats, engine)


def failure_frequency(cand: RecurrentCandidate, points: Sequence[Fraction], trials: int,
                      seed: int, c0: RationalLike) -> list[Fraction]:
    """Fraction of valid draws leaving each point without a return into ``L0``."""
    engine = SearchEngine(cand, c0, points)
    fails = np.zeros(engine.n_points, dtype=np.int64)
    valid = 0
    for i in range(trials):
        _, _, cov = _evaluate(engine, seed, i)
        if cov is None:
            continue
        valid += 1
        fails += ~cov
    return [Fraction(int(f), valid) if valid else Fraction(0) for f in fails]


# -- certificates -------------------------------------------------------------

@dataclass(frozen=True)
class Run:
    lo: Fraction
    hi: Fraction
    b: tuple[str, ...]
    bp: tuple[str, ...]
    image: tuple[Fraction, Fraction]


@dataclass
class Certificate:
    mode: str
    base_K: dict
    base_Kp: dict
    refine: tuple[int, int]
    A1: tuple[str, ...]
    A2: tuple[str, ...]
    N: int
    c0: Fraction
    step: Fraction
    omega: PerturbationVector
    L0: IntervalUnion
    L: IntervalUnion
    runs: list[Run]
    J: IntervalUnion
    transcript: dict

    def to_json(self) -> dict:
        return {
            "format": "homcantor-certificate/1",
            "mode": self.mode,
            "base_K": self.base_K,
            "base_Kp": self.base_Kp,
            "refine": list(self.refine),
            "A1": list(self.A1),
            "A2": list(self.A2),
            "N": self.N,
            "c0": fmt(self.c0),
            "step": fmt(self.step),
            "seed": self.omega.seed,
            "draw": self.omega.draw,
            "omega": self.omega.to_json(),
            "L0": self.L0.to_json(),
            "L": self.L.to_json(),
            "runs": [{"lo": fmt(r.lo), "hi": fmt(r.hi), "b": list(r.b), "b_prime": list(r.bp),
                      "image": [fmt(r.image[0]), fmt(r.image[1])]} for r in self.runs],
            "J": self.J.to_json(),
            "transcript": self.transcript,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        omega = PerturbationVector({a: as_fraction(v) for a, v in data["omega"].items()},
                                   data.get("seed"), data.get("draw"))
        runs = [Run(as_fraction(r["lo"]), as_fraction(r["hi"]), tuple(r["b"]),
                    tuple(r["b_prime"]), (as_fraction(r["image"][0]), as_fraction(r["image"][1])))
                for r in data["runs"]]
        return cls(data["mode"], data["base_K"], data["base_Kp"], tuple(data["refine"]),
                   tuple(data["A1"]), tuple(data["A2"]), int(data["N"]),
                   as_fraction(data["c0"]), as_fraction(data["step"]), omega,
                   IntervalUnion.from_json(data["L0"]), IntervalUnion.from_json(data["L"]),
                   runs, IntervalUnion.from_json(data["J"]), data.get("transcript", {}))


def certified_interval(L: IntervalUnion, s0: Fraction) -> IntervalUnion:
    """Largest component of ``L`` inside the linked range ``[-s0, 1]``."""
    comp = L.clip(-s0, Fraction(1)).largest_component()
    return IntervalUnion([comp]) if comp is not None else IntervalUnion()


def verify_recurrent(cand: RecurrentCandidate, omega: PerturbationVector, c0: RationalLike,
                     base_K: dict | None = None, base_Kp: dict | None = None,
                     refine: tuple[int, int] = (1, 1),
                     engine: SearchEngine | None = None) -> Certificate:
    """Certify that every point of ``L`` returns into ``int L`` under ``omega``.

    Net points are grouped into runs sharing one witness ``(b, b')`` and one
    target component of ``L0``; each run ``[t_first - d, t_last + d]``
    (``d = rho^{5/2}``) is checked exactly.
    """
    from .ifs import to_config

    c0 = as_fraction(c0)
    rho, s0 = cand.rho, cand.s0
    delta = net_spacing(cand)
    Kw, Kpw = perturbed_pair(cand, omega, c0)
    space = ConfigSpace(Kw, Kpw)
    base_K = base_K if base_K is not None else to_config(cand.K)
    base_Kp = base_Kp if base_Kp is not None else to_config(cand.Kp)
    transcript = {"net_points": 0, "net_bound": fmt(net_bound(cand)),
                  "margin": f"{fmt(delta / rho)} < {fmt(rho / 2)}",
                  "margin_ok": delta / rho < rho / 2}
    if not cand.L:
        return Certificate(cand.mode, base_K, base_Kp, refine, cand.A1, cand.A2, cand.N, c0,
                           rho, omega, cand.L0, cand.L, [], IntervalUnion(),
                           dict(transcript, useless=True))
    if not transcript["margin_ok"]:
        raise VerificationFailed("net spacing too coarse for the margin", transcript)
    engine = engine or SearchEngine(cand, c0)
    pts, q = engine.pts, engine.q
    codes = engine.witness_codes(omega)
    miss = np.flatnonzero(codes < 0)
    if len(miss):
        raise VerificationFailed(f"{len(miss)} net points without a return",
                                 dict(transcript, uncovered=[fmt(Fraction(int(pts[i]), q))
                                                             for i in miss[:20]]))
    comps = [IntervalUnion([c]) for c in cand.L0]
    d2 = encode([2 * delta], q)[0]
    # a run ends where the witness changes or consecutive points are farther than 2*delta
    cut = np.ones(len(pts), dtype=bool)
    if len(pts) > 1:
        cut[1:] = (codes[1:] != codes[:-1]) | ((pts[1:] - pts[:-1]) > d2)
    starts = np.flatnonzero(cut)
    ends = np.append(starts[1:] - 1, len(pts) - 1)
    runs: list[Run] = []
    for s_i, e_i in zip(starts, ends):
        b, bp, comp = engine.decode(codes[s_i])
        t0 = Fraction(int(pts[s_i]), q)
        if renormalize_word(space, t0, b, bp) not in comps[comp]:
            raise VerificationFailed("witness image misses L0", dict(transcript, point=fmt(t0)))
        lo, hi = t0 - delta, Fraction(int(pts[e_i]), q) + delta
        image = (renormalize_word(space, lo, b, bp), renormalize_word(space, hi, b, bp))
        if not cand.L.interior_contains(*image):
            raise VerificationFailed(f"run [{fmt(lo)}, {fmt(hi)}] maps outside int L",
                                     dict(transcript, run=len(runs)))
        runs.append(Run(lo, hi, tuple(b), tuple(bp), image))
    net = pts
    cover = IntervalUnion((r.lo, r.hi) for r in runs)
    if not cand.L.issubset(cover):
        raise VerificationFailed("runs do not cover L", transcript)
    J = certified_interval(cand.L, s0)
    transcript.update(net_points=len(net), runs=len(runs), covered=True,
                      L_measure=fmt(cand.L.measure), J=J.to_json())
    return Certificate(cand.mode, base_K, base_Kp, refine, cand.A1, cand.A2, cand.N, c0, rho,
                       omega, cand.L0, cand.L, runs, J, transcript)


# -- replay -------------------------------------------------------------------

@dataclass
class ReplayResult:
    ok: bool
    failed_runs: list[int]
    problems: list[str]

    def __bool__(self) -> bool:
        return self.ok


def rebuild_pair(cert: Certificate):
    """``(K^w, K'^w, K, K')`` recomputed from the certificate's base data."""
    from .ifs import from_config, refine as refine_ifs

    K = refine_ifs(from_config(cert.base_K), cert.refine[0])
    Kp = refine_ifs(from_config(cert.base_Kp), cert.refine[1])
    Kw = perturb(K, cert.A1, dict(cert.omega.values), cert.c0, step=cert.step)
    return Kw, (Kw if cert.mode == SELF else Kp), K, Kp


def replay(cert: Certificate, base_K: HomogeneousIFS | None = None,
           base_Kp: HomogeneousIFS | None = None) -> ReplayResult:
    """Re-derive everything from the base sets; stored images are ignored."""
    from .ifs import from_config

    problems: list[str] = []
    failed: list[int] = []
    try:
        if base_K is not None and from_config(cert.base_K) != base_K:
            problems.append("base K differs from the supplied config")
        if base_Kp is not None and from_config(cert.base_Kp) != base_Kp:
            problems.append("base K' differs from the supplied config")
        Kw, Kpw, K, Kp = rebuild_pair(cert)
    except (PerturbationError, ValueError, KeyError) as exc:
        return ReplayResult(False, [], problems + [f"cannot rebuild the perturbed set: {exc}"])
    if K.hull != 1 or K.ratio != Kp.ratio:
        return ReplayResult(False, [], problems + ["base sets not in a common normalized frame"])
    rho = K.ratio ** 2
    s0 = Kp.hull
    if cert.step != rho:
        problems.append("perturbation step differs from rho")
    if set(cert.omega.values) - set(cert.A1):
        problems.append("omega supported outside A1")
    if cert.mode == SELF and K != Kp:
        problems.append("self mode with K' != K")
    if cert.L != cert.L0.neighborhood(rho / 2):
        problems.append("L is not the rho/2-neighbourhood of L0")
    space = ConfigSpace(Kw, Kpw)
    for i, run in enumerate(cert.runs):
        try:
            image = (renormalize_word(space, run.lo, run.b, run.bp),
                     renormalize_word(space, run.hi, run.b, run.bp))
        except (KeyError, ValueError):
            failed.append(i)
            continue
        if len(run.b) != 2 or run.lo > run.hi or not cert.L.interior_contains(*image):
            failed.append(i)
    if failed:
        problems.append(f"runs mapping outside int L: {failed[:20]}")
    cover = IntervalUnion((r.lo, r.hi) for r in cert.runs)
    if not cert.L.issubset(cover):
        problems.append("runs do not cover L")
    if not cert.J:
        problems.append("J is empty")
    if not cert.J.issubset(cert.L):
        problems.append("J is not contained in L")
    if cert.J and (cert.J.lo < -s0 or cert.J.hi > 1):
        problems.append("J leaves the linked range")
    return ReplayResult(not problems, failed, problems)
