"""End-to-end run: candidate, search, verification, replay, files."""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import recurrent as rec
from .baselines import TooManyIntervals, brute_sumset
from .density import classify_pairs, l2_estimate, pushforward_histogram
from .ifs import (ConstantsConfig, HomogeneousIFS, Incommensurable, auto_c2, closeness,
                  common_ratio, refine, threshold_N, to_config)
from .rational import decimal, fmt
from .search import (Certificate, SearchEngine, VerificationFailed, net_bound,
                     perturbed_pair, replay, search_omega, verify_recurrent)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INCOMMENSURABLE = 3
EXIT_PARTITION = 4
EXIT_EMPTY = 5
EXIT_EXHAUSTED = 6
EXIT_VERIFY = 7
EXIT_REPLAY = 8


class StageError(RuntimeError):
    def __init__(self, stage: str, code: int, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.code = code


@dataclass
class RunConfig:
    K: HomogeneousIFS
    Kp: HomogeneousIFS | None = None
    mode: str = rec.CROSS
    constants: ConstantsConfig = field(default_factory=ConstantsConfig)
    refine: int = 2
    trials: int = 200
    seed: int = 0
    depth: int = 8
    workers: int | None = None
    hist_depths: tuple[int, ...] = (1, 2, 3)


@dataclass
class PipelineResult:
    code: int
    stage: str
    report: dict
    certificate: Certificate | None = None
    stats: dict | None = None
    candidate: rec.RecurrentCandidate | None = None
    histogram_csv: str | None = None


def prepare(cfg: RunConfig):
    """Common ratio, normalization and refinement; returns ``(K, K', (q, p))``."""
    K = cfg.K
    Kp = K if (cfg.mode == rec.SELF or cfg.Kp is None) else cfg.Kp
    s = K.hull
    K, Kp = K.normalized(), Kp.scaled(1 / s)
    try:
        Kq, Kpq = common_ratio(K, Kp)
    except Incommensurable as exc:
        raise StageError("common_ratio", EXIT_INCOMMENSURABLE, str(exc)) from exc
    q = _depth_of(K, Kq)
    p = _depth_of(Kp, Kpq)
    return K, Kp, (q * cfg.refine, p * cfg.refine)


def _depth_of(base: HomogeneousIFS, refined: HomogeneousIFS) -> int:
    n = 1
    while base.ratio ** n != refined.ratio:
        n += 1
    return n


def selfsum_c2(K: HomogeneousIFS, denominator: int = 100) -> Fraction:
    """Largest ``k/denominator <= 1`` keeping ``|G| >= 15/16 |B|`` (fewer good
    pairs as ``c2`` grows); falls back to ``1/denominator``."""
    for k in range(denominator, 0, -1):
        c2 = Fraction(k, denominator)
        t = classify_pairs(K, K, c2)
        if 16 * t.G >= 15 * t.B:
            return c2
    return Fraction(1, denominator)


def build_candidate(cfg: RunConfig):
    base_K, base_Kp, (q, p) = prepare(cfg)
    K, Kp = refine(base_K, q), refine(base_Kp, p)
    if cfg.mode == rec.SELF:
        Kp = K
    if cfg.constants.c2 is not None:
        c2 = cfg.constants.c2
    elif cfg.mode == rec.SELF:
        c2 = selfsum_c2(K)
    else:
        c2 = auto_c2(K, Kp)
    table = classify_pairs(K, Kp, c2)
    N = threshold_N(K, Kp, c2)
    try:
        if cfg.mode == rec.SELF:
            part = rec.select_partitions_selfsum(table, K)
        else:
            part = rec.select_partitions(table, K)
    except rec.PartitionInfeasible as exc:
        raise StageError("select_partitions", EXIT_PARTITION, str(exc)) from exc
    try:
        cand = rec.build_L0(K, Kp, part.A1, part.A2, N, cfg.mode)
    except rec.ConstructionError as exc:
        raise StageError("build_L0", EXIT_EMPTY, str(exc)) from exc
    return base_K, base_Kp, (q, p), c2, table, part, cand


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    report: dict = {"mode": cfg.mode, "seed": cfg.seed, "trials_budget": cfg.trials,
                    "refine": cfg.refine}
    try:
        base_K, base_Kp, qp, c2, table, part, cand = build_candidate(cfg)
    except StageError as exc:
        report["error"] = str(exc)
        return PipelineResult(exc.code, exc.stage, report)
    c0 = cfg.constants.amplitude(cand.s0)
    warnings = cfg.constants.validate(cand.s0)
    report.update({
        "ratio": fmt(cand.r), "rho": fmt(cand.rho), "letters": cand.K.size,
        "c0": fmt(c0), "c2": fmt(c2), "N": cand.N,
        "G": table.G, "B": table.B, "A1": list(part.A1), "A2": list(part.A2),
        "partition": part.method, "partition_counts": part.counts,
        "L0_measure": fmt(cand.L0.measure), "L0_measure_decimal": decimal(cand.L0.measure),
        "L0_components": len(cand.L0),
        "warnings": warnings,
    })
    if cfg.mode == rec.CROSS:
        E = rec.build_E(cand.K, cand.Kp, part.A1, part.A2, table, cand.N)
        report["E_measure"] = fmt(E.E.measure)
        report["E_measure_decimal"] = decimal(E.E.measure)
        report["E_subset_L0"] = E.E.issubset(cand.L0)
    hists = [pushforward_histogram(cand.K, cand.Kp, n) for n in cfg.hist_depths]
    if len(hists) >= 3:
        l2 = l2_estimate(hists)
        report["l2_estimates"] = [decimal(x) for x in l2.estimates]
        report["l2_verdict"] = l2.verdict
    hist_csv = hists[-1].to_csv() if hists else None
    if not cand.L0:
        report["error"] = "L0 is empty"
        return PipelineResult(EXIT_EMPTY, "build_L0", report, candidate=cand,
                              histogram_csv=hist_csv)
    engine = SearchEngine(cand, c0)
    report["net_size"] = engine.n_points
    report["net_bound"] = fmt(net_bound(cand))
    result = search_omega(cand, cfg.trials, cfg.seed, c0, cfg.workers, engine)
    stats = result.stats.to_json()
    report["trials_used"] = result.stats.trials
    report["invalid_draws"] = result.stats.invalid
    if not result.success:
        report["error"] = f"no draw served every net point in {cfg.trials} trials"
        report["min_uncovered"] = min((u for u in result.stats.uncovered_per_trial if u >= 0),
                                      default=None)
        return PipelineResult(EXIT_EXHAUSTED, "search_omega", report, stats=stats,
                              candidate=cand, histogram_csv=hist_csv)
    omega = result.omega
    report["draw"] = omega.draw
    try:
        cert = verify_recurrent(cand, omega, c0, to_config(base_K), to_config(base_Kp), qp,
                                engine)
    except VerificationFailed as exc:
        report["error"] = str(exc)
        return PipelineResult(EXIT_VERIFY, "verify_recurrent", report, stats=stats,
                              candidate=cand, histogram_csv=hist_csv)
    Kw, _ = perturbed_pair(cand, omega, c0)
    eps = closeness(cand.K, Kw)
    report["closeness"] = fmt(eps)
    report["closeness_le_c0"] = eps <= c0
    report["runs"] = len(cert.runs)
    report["J"] = cert.J.to_json()
    report["J_length"] = decimal(cert.J.measure)
    rep = replay(cert)
    report["replay"] = "pass" if rep.ok else "fail"
    if not rep.ok:
        report["error"] = "; ".join(rep.problems)
        return PipelineResult(EXIT_REPLAY, "replay", report, cert, stats, cand, hist_csv)
    Kpw = Kw if cfg.mode == rec.SELF else cand.Kp
    report["oracle_containment"] = oracle_containment(cert.J, Kw, Kpw, cfg.depth)
    return PipelineResult(EXIT_OK, "done", report, cert, stats, cand, hist_csv)


def oracle_containment(J, Kw, Kpw, depth: int) -> dict[str, bool | None]:
    """``J`` inside the depth-``n`` difference cover for ``n = 1..depth``;
    ``None`` where neither the full nor the windowed oracle fits the cap."""
    out: dict[str, bool | None] = {}
    for n in range(1, depth + 1):
        try:
            U = brute_sumset(Kw, Kpw, n, "difference")
        except TooManyIntervals:
            try:
                U = brute_sumset(Kw, Kpw, n, "difference", window=(J.lo, J.hi))
            except TooManyIntervals:
                out[str(n)] = None
                continue
        out[str(n)] = J.issubset(U)
    return out


# -- files -------------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def render_report(report: dict) -> str:
    lines = [f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S%z')}"]
    for k in sorted(report):
        lines.append(f"{k}: {json.dumps(report[k], sort_keys=True)}")
    return "\n".join(lines) + "\n"


def write_outputs(out: str | os.PathLike, result: PipelineResult, command: str,
                  extra: dict | None = None) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = {"report.txt": render_report(result.report)}
    if result.certificate is not None:
        files["certificate.json"] = _dump(result.certificate.to_json())
    if result.stats is not None:
        files["stats.json"] = _dump(result.stats)
    if result.histogram_csv is not None:
        files["histogram.csv"] = result.histogram_csv
    if result.candidate is not None:
        files["candidate.json"] = _dump(result.candidate.to_json())
    write_manifest(out, files, command, {"exit_code": result.code, "stage": result.stage,
                                         **(extra or {})})
    return out


def write_manifest(out: Path, files: dict[str, str], command: str, meta: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, text in files.items():
        data = text.encode("utf-8")
        (out / name).write_bytes(data)
        entries.append({"file": name, "sha256": hashlib.sha256(data).hexdigest(),
                        "bytes": len(data)})
    manifest = {"command": command, "files": entries, **meta}
    (out / "manifest.json").write_text(_dump(manifest), encoding="utf-8")
