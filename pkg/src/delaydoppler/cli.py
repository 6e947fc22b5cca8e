"""Command line entry point: ``python -m delaydoppler <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments, model, music
from .experiments import ExperimentKind, ExperimentSpec, RandomSupport, SpecError, figure, run  # noqa: F401
from .model import ModelError, ProblemConfig, SupportSet

EXIT_CONFIG = 2


def _support(text: str | None, s: int | None, N: int):
    if text:
        if text.strip().startswith("random"):
            return RandomSupport.parse(text)
        try:
            pairs = [tuple(float(v) for v in chunk.split(",")) for chunk in text.split(";") if chunk.strip()]
        except ValueError as exc:
            raise SpecError(f"bad --support {text!r}") from exc
        if any(len(p) != 2 for p in pairs):
            raise SpecError("--support expects 'tau,nu;tau,nu;...'")
        return SupportSet.from_pairs(pairs)
    return RandomSupport(s if s is not None else 2, model.SEPARATION_CONSTANT / N)


def _snr_list(text: str | None):
    if text is None:
        return None
    vals = [float(v) for v in str(text).split(",") if v.strip()]
    return vals[0] if len(vals) == 1 else vals


def _spec_from_args(args, kind: ExperimentKind) -> ExperimentSpec:
    if args.spec:
        spec = ExperimentSpec.from_json(args.spec)
        if args.out:
            spec.output_dir = args.out
        return spec
    N = args.n if args.n is not None else 4
    if N < 1:
        raise SpecError("--n must be a positive integer")
    support = _support(args.support, args.s, N)
    s = support.s if isinstance(support, RandomSupport) else len(support)
    cfg = ProblemConfig(N=N, R=args.r if args.r is not None else 1, s=s,
                        probing_law=args.probing_law, seed=args.seed)
    snr = _snr_list(args.snr_db)
    if kind is ExperimentKind.RECOVER_NOISELESS and (snr is not None or args.eta is not None):
        kind = ExperimentKind.RECOVER_NOISY
    if kind is ExperimentKind.RECOVER_NOISY and isinstance(snr, list):
        raise SpecError("recover takes a single --snr-db; use sweep-snr for a list")
    eta = experiments.EtaRule("explicit", args.eta) if args.eta is not None else experiments.EtaRule()
    return ExperimentSpec(
        kind=kind, config=cfg, support=support, snr_db=snr, eta_rule=eta,
        grid_factor=args.grid_factor, threshold=args.threshold, trials=args.trials,
        output_dir=args.out, name=kind.value,
    )


def _print_summary(summary: dict) -> None:
    keys = ("trials", "optimal", "mean_error", "median_error", "success_rate")
    print(json.dumps({k: summary.get(k) for k in keys}))


def cmd_recover(args) -> int:
    spec = _spec_from_args(args, ExperimentKind.RECOVER_NOISELESS)
    res = experiments.run(spec)
    _print_summary(res.summary)
    return 0


def cmd_certify(args) -> int:
    if not args.spec and args.n is None:
        args.n = 64
    spec = _spec_from_args(args, ExperimentKind.CERTIFY)
    if spec.kind is not ExperimentKind.CERTIFY:
        spec.kind = ExperimentKind.CERTIFY
    res = experiments.run(spec)
    for t, arts in sorted(res.artifacts.items()):
        rep = arts["certificate"]
        print(json.dumps({"trial": t, "far_region_max": rep["far_region_max"]["value"],
                          "dbar_deviation": rep["dbar_deviation"]["value"],
                          "hessian_negative_definite": rep["hessian_negative_definite"]}))
    return 0


def cmd_figure(args) -> int:
    out = args.out or f"out/{args.name}"
    res = experiments.figure(args.name, out, seed=args.seed, trials=args.trials, grid_factor=args.grid_factor)
    print(json.dumps(res["files"], indent=1))
    return 0


def cmd_sweep(args) -> int:
    if args.snr_db is None and not args.spec:
        args.snr_db = ",".join(str(v) for v in experiments.FIG5_SNR_DB)
    spec = _spec_from_args(args, ExperimentKind.SNR_SWEEP)
    spec.kind = ExperimentKind.SNR_SWEEP
    res = experiments.run(spec)
    for row in res.summary["by_snr"]:
        print(f"{row['snr_db']:6.1f}  anm {row['anm']['mean_error']:.4f}  music {row['music']['mean_error']:.4f}")
    return 0


def cmd_music(args) -> int:
    spec = _spec_from_args(args, ExperimentKind.RECOVER_NOISELESS)
    rng = np.random.default_rng(experiments.child_seed(spec.config.seed, 0))
    cfg, ens = experiments._draw_trial(spec, rng)
    Yobs = ens.Y
    noise_norm = 0.0
    snr = spec.snr_list[0] if spec.snr_list else None
    if snr is not None:
        nr = model.add_noise(ens.Y, snr, rng)
        Yobs = ens.Y + nr.W
        noise_norm = nr.noise_norm
    res = music.music_estimate(Yobs, ens.G, cfg, len(ens.support), spec.grid_factor)
    err = experiments.recover.localization_error(ens.support, res.estimates, cfg.L)
    summary = {
        "method": "music", "config": spec.to_dict(), "truth": ens.support.as_array().tolist(),
        "estimates": res.estimates.as_array().tolist(), "error": err, "snr_db": snr,
        "noise_norm": noise_norm, "eigenvalues": res.eigenvalues.tolist(),
        "degenerate_eigengap": res.degenerate_eigengap, "metadata": res.metadata,
        "success_definition": experiments.SUCCESS_DEFINITION,
    }
    if spec.output_dir:
        out = Path(spec.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        res.to_csv(out / "music_spectrum.csv")
        res.estimates.to_csv(out / "music_estimates.csv")
        experiments.write_json(out / "summary.json", summary)
    print(json.dumps({"error": err, "estimates": summary["estimates"]}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="JSON experiment spec; overrides the flags below")
    common.add_argument("--n", type=int, help="half-length N (L = 2N + 1)")
    common.add_argument("--r", type=int, help="number of measurement vectors R")
    common.add_argument("--s", type=int, help="number of random sources when --support is not given")
    common.add_argument("--support", help="'tau,nu;tau,nu' or 'random(s, min_sep)'")
    common.add_argument("--snr-db", help="SNR in dB; comma separated list for sweep-snr")
    common.add_argument("--eta", type=float, help="explicit noise bound (default 8/3 ||W||_F)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid-factor", type=int, default=16)
    common.add_argument("--threshold", type=float)
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--probing-law", default=model.ProbingLaw.UNIT_MODULUS.value,
                        choices=[p.value for p in model.ProbingLaw])
    common.add_argument("--out", help="output directory")

    p = argparse.ArgumentParser(prog="delaydoppler", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("recover", parents=[common], help="solve the dual SDP and detect the support").set_defaults(
        func=cmd_recover)
    sub.add_parser("certify", parents=[common], help="build and verify the Fejer certificate").set_defaults(
        func=cmd_certify)
    fp = sub.add_parser("figure", parents=[common], help="reproduce one figure")
    fp.add_argument("name", choices=["fig1", "fig2", "fig3", "fig4", "fig5"])
    fp.set_defaults(func=cmd_figure)
    sub.add_parser("sweep-snr", parents=[common], help="atomic norm vs MUSIC over SNR").set_defaults(
        func=cmd_sweep)
    sub.add_parser("music", parents=[common], help="MUSIC pseudospectrum on a single instance").set_defaults(
        func=cmd_music)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ModelError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
