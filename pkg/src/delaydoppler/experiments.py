"""Seeded experiment harness: trials, sweeps, figure reproductions.

Every trial is reproducible from ``(spec, trial index)``: its random
stream is seeded by a stable hash of the master seed and the index.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import anm, certificate, model, music, recover
from .model import ProblemConfig, SupportSet
from .sdp import SolverSettings, Status

SUCCESS_ERROR = 0.5
SUCCESS_DEFINITION = "trial solved to optimality and localization error <= 0.5 (units of 1/L)"
FIG5_SNR_DB = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]


class SpecError(ValueError):
    """Invalid experiment configuration."""


class ExperimentKind(str, Enum):
    RECOVER_NOISELESS = "recover_noiseless"
    RECOVER_NOISY = "recover_noisy"
    CERTIFY = "certify"
    SNR_SWEEP = "snr_sweep"
    FIGURE = "figure"


@dataclass(frozen=True)
class RandomSupport:
    s: int
    min_sep: float

    _PATTERN = re.compile(r"^\s*random\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*\)\s*$")

    @classmethod
    def parse(cls, text: str) -> "RandomSupport":
        m = cls._PATTERN.match(text)
        if not m:
            raise SpecError(f"cannot parse support {text!r}; expected 'random(s, min_sep)'")
        return cls(int(m.group(1)), float(m.group(2)))

    def __str__(self) -> str:
        return f"random({self.s}, {self.min_sep!r})"

    def draw(self, rng: np.random.Generator, max_tries: int = 10000) -> SupportSet:
        pts: list[np.ndarray] = []
        for _ in range(max_tries):
            if len(pts) == self.s:
                break
            cand = rng.random(2)
            if all(np.abs(model.torus_diff(cand, p)).max() >= self.min_sep for p in pts):
                pts.append(cand)
        else:
            if len(pts) < self.s:
                raise SpecError(f"could not place {self.s} points with separation {self.min_sep}")
        if len(pts) < self.s:
            raise SpecError(f"could not place {self.s} points with separation {self.min_sep}")
        return SupportSet.from_pairs(pts)


@dataclass(frozen=True)
class EtaRule:
    """``paper_8_3`` sets ``eta = 8/3 ||W||_F``; ``explicit`` uses ``value``."""

    kind: str = "paper_8_3"
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("paper_8_3", "explicit"):
            raise SpecError(f"unknown eta rule {self.kind!r}")
        if self.kind == "explicit" and (self.value is None or self.value < 0):
            raise SpecError("an explicit eta needs a nonnegative value")

    def eta(self, noise_norm: float) -> float:
        if self.kind == "explicit":
            return float(self.value)
        return model.NOISE_RESIDUAL_FACTOR * noise_norm

    @classmethod
    def parse(cls, raw) -> "EtaRule":
        if raw is None or raw == "paper_8_3":
            return cls()
        if isinstance(raw, EtaRule):
            return raw
        if isinstance(raw, (int, float)):
            return cls("explicit", float(raw))
        if isinstance(raw, dict):
            if "explicit" in raw:
                return cls("explicit", float(raw["explicit"]))
            return cls(raw.get("kind", "paper_8_3"), raw.get("value"))
        m = re.match(r"^explicit\(\s*([0-9.eE+-]+)\s*\)$", str(raw).strip())
        if m:
            return cls("explicit", float(m.group(1)))
        raise SpecError(f"cannot parse eta rule {raw!r}")

    def to_json(self):
        return "paper_8_3" if self.kind == "paper_8_3" else {"explicit": self.value}


@dataclass
class ExperimentSpec:
    kind: ExperimentKind
    config: ProblemConfig
    support: SupportSet | RandomSupport
    snr_db: float | list[float] | None = None
    eta_rule: EtaRule = field(default_factory=EtaRule)
    grid_factor: int = recover.DEFAULT_GRID_FACTOR
    threshold: float | None = None
    trials: int = 1
    output_dir: str | None = None
    tol: float = 1e-6
    max_iter: int = 50000
    max_peaks: int | None = None
    refine: bool = False
    workers: int = 1
    name: str = "run"

    def __post_init__(self):
        self.kind = ExperimentKind(self.kind)
        if int(self.trials) < 1:
            raise SpecError("trials must be at least 1")
        if int(self.grid_factor) < 4:
            raise SpecError("grid_factor must be at least 4")
        if self.threshold is not None and not 0 < self.threshold <= 1:
            raise SpecError("threshold must lie in (0, 1]")
        if self.kind in (ExperimentKind.RECOVER_NOISY, ExperimentKind.SNR_SWEEP) and self.snr_db is None:
            if not (self.kind is ExperimentKind.RECOVER_NOISY and self.eta_rule.kind == "explicit"):
                raise SpecError(f"{self.kind.value} needs snr_db")
        if self.kind is ExperimentKind.SNR_SWEEP and self.n_sources < 1:
            raise SpecError("an SNR sweep needs at least one source")
        if isinstance(self.support, SupportSet) and len(self.support) and self.kind is not ExperimentKind.CERTIFY:
            if np.any(self.support.as_array() < 0) or np.any(self.support.as_array() >= 1):
                raise SpecError("support pairs must lie in [0, 1)")

    @property
    def n_sources(self) -> int:
        return self.support.s if isinstance(self.support, RandomSupport) else len(self.support)

    @property
    def noisy(self) -> bool:
        return self.kind in (ExperimentKind.RECOVER_NOISY, ExperimentKind.SNR_SWEEP)

    @property
    def detection_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return recover.NOISY_THRESHOLD if self.noisy else recover.NOISELESS_THRESHOLD

    @property
    def snr_list(self) -> list[float]:
        if self.snr_db is None:
            return []
        if isinstance(self.snr_db, (list, tuple)):
            return [float(v) for v in self.snr_db]
        return [float(self.snr_db)]

    def solver_settings(self) -> SolverSettings:
        return SolverSettings(tol=self.tol, max_iter=self.max_iter)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        raw = dict(raw)
        try:
            cfg = raw.pop("config")
            if not isinstance(cfg, ProblemConfig):
                cfg = ProblemConfig(**{k: v for k, v in cfg.items()})
            sup = raw.pop("support")
            if isinstance(sup, str):
                support = RandomSupport.parse(sup)
            elif isinstance(sup, (SupportSet, RandomSupport)):
                support = sup
            else:
                support = SupportSet.from_pairs(sup)
            eta = EtaRule.parse(raw.pop("eta_rule", None))
            spec = cls(config=replace(cfg, s=_support_size(support)), support=support, eta_rule=eta, **raw)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"invalid experiment spec: {exc}") from exc
        return spec

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read spec file {path}: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["probing_law"] = self.config.probing_law.value
        sup = str(self.support) if isinstance(self.support, RandomSupport) else self.support.as_array().tolist()
        return {
            "kind": self.kind.value, "config": cfg, "support": sup, "snr_db": self.snr_db,
            "eta_rule": self.eta_rule.to_json(), "grid_factor": self.grid_factor,
            "threshold": self.detection_threshold, "trials": self.trials, "output_dir": self.output_dir,
            "tol": self.tol, "max_iter": self.max_iter, "max_peaks": self.max_peaks, "refine": self.refine,
            "workers": self.workers, "name": self.name,
        }


def _support_size(support) -> int:
    return support.s if isinstance(support, RandomSupport) else len(support)


@dataclass
class TrialRecord:
    trial: int
    seed: int
    truth: list
    estimates: list
    peak_values: list
    error: float
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    wall_time: float
    method: str = "anm"
    R: int = 1
    snr_db: float | None = None
    eta: float | None = None
    noise_norm: float | None = None
    objective: float | None = None
    max_match_distance: float | None = None
    max_qnorm: float | None = None
    trace_residual: float | None = None

    @property
    def n_peaks(self) -> int:
        return len(self.estimates)

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL.value

    @property
    def success(self) -> bool:
        return self.optimal and self.error <= SUCCESS_ERROR

    def recompute_error(self, L: int) -> float:
        truth = SupportSet.from_pairs(self.truth)
        est = recover.EstimateSet(pairs=[model.DelayDoppler(*p) for p in self.estimates],
                                  peak_values=np.array(self.peak_values))
        return recover.localization_error(truth, est, L)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_peaks"] = self.n_peaks
        d["success"] = self.success
        return d


@dataclass
class RunResult:
    spec: ExperimentSpec
    records: list[TrialRecord]
    summary: dict
    artifacts: dict = field(default_factory=dict)


def child_seed(master: int, trial: int) -> int:
    digest = hashlib.sha256(f"delaydoppler:{int(master)}:{int(trial)}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _draw_trial(spec: ExperimentSpec, rng: np.random.Generator):
    support = spec.support.draw(rng) if isinstance(spec.support, RandomSupport) else spec.support
    cfg = replace(spec.config, s=len(support))
    x, Phi = model.draw_inputs(cfg, rng)
    ens = model.synthesize(cfg, support, np.conj(Phi), x)
    return cfg, ens


def _anm_trial(spec, cfg, ens, Yobs, noise, trial, seed, t0, max_peaks=None):
    eta = noise.eta if noise is not None else 0.0
    if eta > 0:
        problem = anm.build_noisy_dual(Yobs, ens.G, cfg, eta)
    else:
        problem = anm.build_noiseless_dual(Yobs, ens.G, cfg)
    sol = anm.solve_dual(problem, spec.solver_settings())
    fld = recover.evaluate_dual_field(sol.Lambda_hat, ens.G, cfg, spec.grid_factor)
    if max_peaks == "top":
        # s is known; pick among the unit-level peaks by the energy their atoms carry
        s = len(ens.support)
        cands = recover.detect_support(fld, spec.detection_threshold, None, spec.refine)
        if len(cands) < s:
            cands = recover.top_peaks(fld.values, s, refine=spec.refine)
        lam_norm = np.linalg.norm(sol.Lambda_hat)
        Yfit = Yobs - eta * sol.Lambda_hat / lam_norm if eta > 0 and lam_norm > 0 else Yobs
        est = recover.select_by_amplitude(cands, Yfit, ens.G, cfg.N, s)
    else:
        est = recover.detect_support(fld, spec.detection_threshold, spec.max_peaks, spec.refine)
    match = recover.match_estimates(ens.support, est, cfg.L)
    rep = sol.solver_report
    matched = match.distances[[r for r, _ in match.pairs]] if match.pairs else np.zeros(0)
    rec = TrialRecord(
        trial=trial, seed=seed, truth=ens.support.as_array().tolist(),
        estimates=est.as_array().tolist(), peak_values=[float(v) for v in est.peak_values],
        error=match.error, status=rep.status.value, iterations=int(rep.iterations),
        primal_residual=float(rep.primal_residual), dual_residual=float(rep.dual_residual),
        gap=float(rep.gap), wall_time=time.perf_counter() - t0, R=cfg.R,
        snr_db=None if noise is None else noise.snr_db, eta=eta,
        noise_norm=None if noise is None else noise.noise_norm, objective=float(sol.objective),
        max_match_distance=float(matched.max()) if matched.size else None,
        max_qnorm=float(fld.values.max()),
        trace_residual=float(np.abs(anm.trace_residuals(sol.Q_hat, cfg.N)).max()),
    )
    return rec, fld, est


def _music_trial(spec, cfg, ens, Yobs, noise, trial, seed, t0):
    res = music.music_estimate(Yobs, ens.G, cfg, len(ens.support), spec.grid_factor, refine=spec.refine)
    match = recover.match_estimates(ens.support, res.estimates, cfg.L)
    matched = match.distances[[r for r, _ in match.pairs]] if match.pairs else np.zeros(0)
    rec = TrialRecord(
        trial=trial, seed=seed, truth=ens.support.as_array().tolist(),
        estimates=res.estimates.as_array().tolist(), peak_values=[float(v) for v in res.estimates.peak_values],
        error=match.error, status=Status.OPTIMAL.value, iterations=0, primal_residual=0.0,
        dual_residual=0.0, gap=0.0, wall_time=time.perf_counter() - t0, method="music", R=cfg.R,
        snr_db=None if noise is None else noise.snr_db, eta=None,
        noise_norm=None if noise is None else noise.noise_norm,
        max_match_distance=float(matched.max()) if matched.size else None,
    )
    return rec, res


def run_trial(spec: ExperimentSpec, trial: int):
    """One trial; returns ``(records, artifacts)`` where artifacts hold fields."""
    seed = child_seed(spec.config.seed, trial)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    cfg, ens = _draw_trial(spec, rng)
    artifacts: dict = {}
    if spec.kind is ExperimentKind.CERTIFY:
        sysm = certificate.build_interp_system(ens.support, ens.Phi, cfg.N)
        report = certificate.verify_certificate(sysm, grid_factor=min(spec.grid_factor, 4))
        artifacts["certificate"] = report
        ok = report["far_region_max"]["pass"] and report["hessian_negative_definite"]
        rec = TrialRecord(
            trial=trial, seed=seed, truth=ens.support.as_array().tolist(), estimates=[], peak_values=[],
            error=0.0, status=Status.OPTIMAL.value if ok else "certificate_failed", iterations=0,
            primal_residual=report["solve_residual"], dual_residual=report["interpolation_residual"],
            gap=0.0, wall_time=time.perf_counter() - t0, method="certificate", R=cfg.R,
            max_qnorm=report["off_support_max"],
        )
        return [rec], artifacts
    if spec.kind is ExperimentKind.SNR_SWEEP:
        records = []
        for snr in spec.snr_list:
            noise = model.add_noise(ens.Y, snr, rng)
            noise = model.NoiseRecord(W=noise.W, snr_db=noise.snr_db, eta=spec.eta_rule.eta(noise.noise_norm))
            Yobs = ens.Y + noise.W
            t1 = time.perf_counter()
            rec, _, _ = _anm_trial(spec, cfg, ens, Yobs, noise, trial, seed, t1, max_peaks="top")
            records.append(rec)
            t1 = time.perf_counter()
            mrec, _ = _music_trial(spec, cfg, ens, Yobs, noise, trial, seed, t1)
            records.append(mrec)
        return records, artifacts
    noise = None
    Yobs = ens.Y
    if spec.kind is ExperimentKind.RECOVER_NOISY:
        snr = spec.snr_list[0] if spec.snr_list else math.inf
        noise = model.add_noise(ens.Y, snr, rng)
        noise = model.NoiseRecord(W=noise.W, snr_db=noise.snr_db, eta=spec.eta_rule.eta(noise.noise_norm))
        Yobs = ens.Y + noise.W
    rec, fld, est = _anm_trial(spec, cfg, ens, Yobs, noise, trial, seed, t0)
    artifacts["field"] = fld
    artifacts["estimates"] = est
    return [rec], artifacts


def summarize(spec: ExperimentSpec, records: list[TrialRecord]) -> dict:
    def agg(recs):
        errs = np.array([r.error for r in recs], dtype=float)
        return {
            "trials": len(recs),
            "optimal": sum(r.optimal for r in recs),
            "mean_error": float(errs.mean()) if errs.size else None,
            "median_error": float(np.median(errs)) if errs.size else None,
            "success_rate": float(np.mean([r.success for r in recs])) if recs else None,
        }

    out = {"spec": spec.to_dict(), "success_definition": SUCCESS_DEFINITION}
    if spec.kind is ExperimentKind.SNR_SWEEP:
        table = []
        for snr in spec.snr_list:
            row = {"snr_db": snr}
            for method in ("anm", "music"):
                row[method] = agg([r for r in records if r.method == method and r.snr_db == snr])
            table.append(row)
        out["by_snr"] = table
    out.update(agg(records))
    out["records"] = [r.to_dict() for r in records]
    return out


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Enum):
        return o.value
    raise TypeError(f"not serializable: {type(o)}")


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, default=_default, allow_nan=True) + "\n")


def _run_one(args):
    spec, trial = args
    return trial, run_trial(spec, trial)


def run(spec: ExperimentSpec) -> RunResult:
    """Run all trials, write per-trial CSVs and ``summary.json`` when ``output_dir`` is set."""
    jobs = [(spec, t) for t in range(spec.trials)]
    if spec.workers > 1 and spec.trials > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = dict(pool.map(_run_one, jobs))
    else:
        results = dict(_run_one(j) for j in jobs)
    records: list[TrialRecord] = []
    artifacts: dict = {}
    for t in sorted(results):
        recs, arts = results[t]
        records.extend(recs)
        artifacts[t] = arts
    summary = summarize(spec, records)
    files: dict = {}
    if spec.output_dir:
        out = Path(spec.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for t, arts in artifacts.items():
            if "field" in arts:
                p = out / f"{spec.name}_trial{t}_field.csv"
                arts["field"].to_csv(p)
                files.setdefault("field", []).append(str(p))
            if "estimates" in arts:
                p = out / f"{spec.name}_trial{t}_estimates.csv"
                arts["estimates"].to_csv(p)
                files.setdefault("estimates", []).append(str(p))
            if "certificate" in arts:
                p = out / f"{spec.name}_trial{t}_certificate.json"
                Path(p).write_text(certificate.report_json(arts["certificate"]) + "\n")
                files.setdefault("certificate", []).append(str(p))
        if spec.kind is ExperimentKind.SNR_SWEEP:
            p = out / f"{spec.name}_snr.csv"
            write_sweep_csv(p, summary)
            files["sweep"] = str(p)
        summary["files"] = files
        write_json(out / "summary.json", summary)
    return RunResult(spec=spec, records=records, summary=summary, artifacts=artifacts)


def write_sweep_csv(path, summary: dict) -> None:
    with open(path, "w") as fh:
        fh.write("snr_db,error_anm,error_music\n")
        for row in summary["by_snr"]:
            fh.write(f"{row['snr_db']:.6g},{row['anm']['mean_error']:.10g},{row['music']['mean_error']:.10g}\n")


# ---------------------------------------------------------------- figures

FIGURES = {
    "fig1": dict(N=4, Rs=(1, 10), support=[(0.2, 0.8), (0.5, 0.5)], noisy=False),
    "fig2": dict(N=4, Rs=(1, 30), support=[(0.2, 0.2), (0.3, 0.3)], noisy=False),
    "fig3": dict(N=4, Rs=(1, 50), support=[(0.2, 0.2), (0.3, 0.3)], noisy=True, snr_db=10.0),
    "fig4": dict(N=8, Rs=(1, 20), support=[(0.2, 0.2), (0.3, 0.3)], noisy=False),
}
PRINTED_FIG3_ETA = 0.8


def figure_specs(name: str, seed: int = 0, trials: int = 1, output_dir=None,
                 grid_factor: int = recover.DEFAULT_GRID_FACTOR) -> list[ExperimentSpec]:
    if name == "fig5":
        return [ExperimentSpec(
            kind=ExperimentKind.SNR_SWEEP, config=ProblemConfig(N=5, R=3, s=2, seed=seed),
            support=RandomSupport(2, model.SEPARATION_CONSTANT / 5), snr_db=list(FIG5_SNR_DB),
            grid_factor=grid_factor, trials=trials, output_dir=output_dir, name="fig5")]
    if name not in FIGURES:
        raise SpecError(f"unknown figure {name!r}; choose from fig1..fig5")
    f = FIGURES[name]
    specs = []
    for R in f["Rs"]:
        specs.append(ExperimentSpec(
            kind=ExperimentKind.RECOVER_NOISY if f["noisy"] else ExperimentKind.RECOVER_NOISELESS,
            config=ProblemConfig(N=f["N"], R=R, s=len(f["support"]), seed=seed),
            support=SupportSet.from_pairs(f["support"]), snr_db=f.get("snr_db"),
            grid_factor=grid_factor, trials=trials, output_dir=output_dir, name=f"{name}_R{R}"))
    return specs


def gnuplot_script(name: str, results: list[RunResult]) -> str:
    lines = [f"# {name}", "set datafile separator ','"]
    if name == "fig5":
        csv = f"{results[0].spec.name}_snr.csv"
        lines += [
            "set terminal pngcairo size 640,480", f"set output '{name}.png'",
            "set xlabel 'SNR (dB)'", "set ylabel 'error'", "set logscale y",
            f"plot '{csv}' every ::1 using 1:2 with linespoints title 'atomic norm', \\",
            f"     '{csv}' every ::1 using 1:3 with linespoints title 'MUSIC'",
        ]
        return "\n".join(lines) + "\n"
    lines += [
        f"set terminal pngcairo size {640 * len(results)},560", f"set output '{name}.png'",
        f"set multiplot layout 1,{len(results)}", "set view map", "set size square",
        "set xlabel 'tau'", "set ylabel 'nu'", "set xrange [0:1]", "set yrange [0:1]",
    ]
    for res in results:
        stem = f"{res.spec.name}_trial0"
        lines += [
            f"set title 'R = {res.spec.config.R}'",
            f"plot '{stem}_field.csv' every ::1 using 1:2:3 with image notitle, \\",
            f"     '{stem}_estimates.csv' every ::1 using 1:2 with points pt 7 lc rgb 'red' notitle",
        ]
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def figure(name: str, output_dir, seed: int = 0, trials: int = 1,
           grid_factor: int = recover.DEFAULT_GRID_FACTOR) -> dict:
    """Reproduce one figure: field/estimate CSVs, a gnuplot script and ``summary.json``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    specs = figure_specs(name, seed=seed, trials=trials, output_dir=None, grid_factor=grid_factor)
    results = []
    files: dict = {}
    for spec in specs:
        spec.output_dir = str(out / spec.name)
        res = run(spec)
        results.append(res)
        # promote trial-level CSVs next to the script
        for kind in ("field", "estimates"):
            for p in res.summary.get("files", {}).get(kind, []):
                dst = out / Path(p).name
                dst.write_bytes(Path(p).read_bytes())
                files.setdefault(kind, []).append(str(dst))
        if "sweep" in res.summary.get("files", {}):
            dst = out / Path(res.summary["files"]["sweep"]).name
            dst.write_bytes(Path(res.summary["files"]["sweep"]).read_bytes())
            files["sweep"] = str(dst)
    if name == "fig3":
        p = out / "fig3_noise.csv"
        with open(p, "w") as fh:
            fh.write("R,trial,snr_db,eta,noise_norm,eta_printed\n")
            for res in results:
                for r in res.records:
                    fh.write(f"{r.R},{r.trial},{r.snr_db:.6g},{r.eta:.10g},{r.noise_norm:.10g},{PRINTED_FIG3_ETA}\n")
        files["noise"] = str(p)
    script = out / f"{name}.gp"
    script.write_text(gnuplot_script(name, results))
    files["gnuplot"] = str(script)
    summary = {
        "figure": name,
        "success_definition": SUCCESS_DEFINITION,
        "runs": [{k: v for k, v in res.summary.items() if k != "files"} for res in results],
        "files": files,
    }
    if name == "fig3":
        summary["printed_eta"] = PRINTED_FIG3_ETA
        summary["eta_rule"] = "8/3 * ||W||_F"
    write_json(out / "summary.json", summary)
    return {"results": results, "files": files, "summary": summary}
