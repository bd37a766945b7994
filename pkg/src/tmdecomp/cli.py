"""Command-line front end.

Every subcommand writes only into its ``--out`` directory and leaves a
``manifest.json`` there; ``tmdecomp rerun MANIFEST --out DIR`` replays it.

Exit codes: 0 success, 1 usage or input error, 2 solver hit ``max_iters``
(outputs are still written).
"""

from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (MatrixFormatError, denormalize, estimate_noise_scales, load_decomposition,
                      load_matrix, normalize, save_decomposition,
                      write_csv_matrix)
from .metrics import compare_reports, evaluate
from .solver import SolverConfig, solve
from .spectral import aggregate_density, position_period_hours
from .synthgen import SynthSpec, generate
from .weights import WeightSpec, build_weights, positions_from_periods

log = logging.getLogger("tmdecomp")

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# helpers

def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _floats(text: str | None):
    if text is None:
        return None
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str | None):
    if text is None:
        return None
    return [int(x) for x in text.split(",") if x.strip()]


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out: Path, args: argparse.Namespace, started: str, **extra) -> None:
    manifest = {
        "subcommand": args.command,
        "args": {k: v for k, v in vars(args).items() if k not in ("func", "verbose")},
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
    }
    manifest.update(extra)
    _write_json(out / "manifest.json", manifest)


def _weight_spec_from_args(args, T: int, interval: int) -> WeightSpec:
    if getattr(args, "weights_spec", None):
        with open(args.weights_spec) as fh:
            d = json.load(fh)
        d.setdefault("T", T)
        d.setdefault("interval_seconds", interval)
        spec = WeightSpec.from_dict(d)
        if spec.T != T:
            raise UsageError(f"weights spec is for T={spec.T}, input has T={T}")
        return spec
    s1a = _ints(args.s1a)
    if s1a is None and args.periods is not None:
        s1a = positions_from_periods(_floats(args.periods), T, interval)
    kwargs = {k: getattr(args, k) for k in ("rho", "decay_scale", "amplitude", "offset")
              if getattr(args, k) is not None}
    return WeightSpec(T, s1a=None if s1a is None else tuple(s1a),
                      interval_seconds=interval, **kwargs)


def _spectrum_rows(phi: np.ndarray, interval: int):
    T = phi.shape[0]
    for t in range(1, T + 1):
        period = position_period_hours(t, T, interval)
        yield t, period if isinstance(period, str) else repr(period), repr(float(phi[t - 1]))


def _write_spectrum(path: Path, phi: np.ndarray, interval: int) -> None:
    with open(path, "w") as fh:
        fh.write("position,period_hours,phi\n")
        for t, period, value in _spectrum_rows(phi, interval):
            fh.write(f"{t},{period},{value}\n")


def _add_weight_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("weights")
    g.add_argument("--weights-spec", help="JSON file with WeightSpec fields")
    g.add_argument("--s1a", help="comma-separated penalized positions (1-based)")
    g.add_argument("--periods", help="comma-separated harmonic periods in hours")
    g.add_argument("--rho", type=float)
    g.add_argument("--decay-scale", type=float)
    g.add_argument("--amplitude", type=float)
    g.add_argument("--offset", type=float)


# --------------------------------------------------------------------------
# subcommands

def cmd_decompose(args) -> int:
    started = _now()
    tm = load_matrix(args.input, format=args.format, interval_seconds=args.interval)
    out = Path(args.out)

    if args.no_normalize:
        scales = None
        X = tm
    else:
        scales = estimate_noise_scales(tm)
        X = normalize(tm, scales)

    wspec = None
    if args.method == "spcp-fdr":
        wspec = _weight_spec_from_args(args, tm.T, tm.interval_seconds)
        weights = build_weights(wspec)
    else:
        weights = None
    cfg = SolverConfig(lam=args.lam, gamma=args.gamma, eta=args.eta,
                       mu0_factor=args.mu0_factor, mu_bar_factor=args.mu_bar_factor,
                       L_f=args.L_f, max_iters=args.max_iters, tol=args.tol,
                       weights=weights).resolve(tm.T, tm.P)

    d = solve(X, cfg)

    out.mkdir(parents=True, exist_ok=True)
    save_decomposition(d, out)
    if scales is not None:
        write_csv_matrix(out / "sigma.csv", scales.sigma[None, :], header=tm.flow_ids)
        den = out / "denormalized"
        den.mkdir(exist_ok=True)
        for name in "AEN":
            write_csv_matrix(den / f"{name}.csv", denormalize(getattr(d, name), scales),
                             header=tm.flow_ids)
    s1 = (wspec or WeightSpec(tm.T, interval_seconds=tm.interval_seconds)).s1
    report = evaluate(d, s1)
    _write_json(out / "report.json", {"method": args.method, **report.to_dict()})
    _write_spectrum(out / "spectrum.csv", aggregate_density(d.N).phi, tm.interval_seconds)
    _write_manifest(out, args, started,
                    input=str(Path(args.input).resolve()),
                    solver_config=cfg.to_dict(),
                    weight_spec=None if wspec is None else wspec.to_dict(),
                    weights_beta=None if weights is None else weights.beta,
                    seed=None)
    diag = d.diagnostics
    log.info("%s: %d iterations, converged=%s, residual=%.3g",
             args.method, diag.iterations, diag.converged, diag.residual_fro)
    return EXIT_OK if diag.converged else EXIT_NOT_CONVERGED


def _synth_spec_from_args(args) -> SynthSpec:
    if args.spec:
        with open(args.spec) as fh:
            return SynthSpec.from_dict(json.load(fh))
    kw = {}
    if args.harmonics is not None:
        pairs = []
        for item in args.harmonics.split(","):
            if item.strip():
                period, amp = item.split(":")
                pairs.append((float(period), float(amp)))
        kw["harmonics"] = tuple(pairs)
    sigma = _floats(args.sigma)
    if sigma is not None:
        kw["noise_sigma"] = sigma[0] if len(sigma) == 1 else tuple(sigma)
    return SynthSpec(T=args.T, P=args.P, rank_r=args.rank, baseline=args.baseline,
                     anomaly_density=args.density, anomaly_magnitude=args.magnitude,
                     interval_seconds=args.interval, seed=args.seed, **kw)


def cmd_synth(args) -> int:
    started = _now()
    spec = _synth_spec_from_args(args)
    X, truth = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv_matrix(out / "X.csv", X.data)
    for name in "AEN":
        write_csv_matrix(out / f"{name}.csv", getattr(truth, name))
    _write_json(out / "spec.json", spec.to_dict())
    _write_manifest(out, args, started, synth_spec=spec.to_dict(), seed=spec.seed)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    started = _now()
    tm = load_matrix(args.input, format=args.format, interval_seconds=args.interval)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_spectrum(out / "spectrum.csv", aggregate_density(tm.data).phi,
                    tm.interval_seconds)
    _write_manifest(out, args, started, input=str(Path(args.input).resolve()))
    return EXIT_OK


def cmd_weights(args) -> int:
    started = _now()
    spec = _weight_spec_from_args(args, args.T, args.interval)
    w = build_weights(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "weights.csv", "w") as fh:
        fh.write("position,c\n")
        for t, c in enumerate(w.c, start=1):
            fh.write(f"{t},{float(c)!r}\n")
    _write_manifest(out, args, started, weight_spec=spec.to_dict(), beta=w.beta)
    return EXIT_OK


def _dir_s1(directory: Path, T: int):
    mf = directory / "manifest.json"
    if mf.exists():
        with open(mf) as fh:
            ws = json.load(fh).get("weight_spec")
        if ws:
            return WeightSpec.from_dict(ws).s1
    return WeightSpec(T).s1


def cmd_compare(args) -> int:
    started = _now()
    fdr_dir, spcp_dir = Path(args.fdr_dir), Path(args.spcp_dir)
    try:
        d_fdr = load_decomposition(fdr_dir)
        d_spcp = load_decomposition(spcp_dir)
    except OSError as exc:
        raise MatrixFormatError(str(exc)) from exc
    if d_fdr.shape != d_spcp.shape:
        raise UsageError(f"shape mismatch: {d_fdr.shape} vs {d_spcp.shape}")
    T = d_fdr.shape[0]
    s1 = _dir_s1(fdr_dir, T)
    r_fdr, r_spcp = evaluate(d_fdr, s1), evaluate(d_spcp, s1)
    cmp = compare_reports(r_fdr, r_spcp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "comparison.json", {
        "fdr": r_fdr.to_dict(), "spcp": r_spcp.to_dict(), "summary": cmp.to_dict()})
    with open(out / "pearson.csv", "w") as fh:
        fh.write("flow,pearson_abs_fdr,pearson_abs_spcp\n")
        for j, (a, b) in enumerate(zip(r_fdr.pearson_abs, r_spcp.pearson_abs), 1):
            fh.write(f"{j},{float(a)!r},{float(b)!r}\n")
    _write_manifest(out, args, started,
                    inputs=[str(fdr_dir.resolve()), str(spcp_dir.resolve())])
    print(f"flatness gain {cmp.flatness_gain:+.4f}  rank ratio {cmp.rank_ratio:.4f}  "
          f"||A_fdr||/||A_spcp|| {cmp.fro_ratio:.4f}  "
          f"flows with lower |pearson| {cmp.frac_pearson_decreased:.2%}")
    return EXIT_OK


def cmd_rerun(args) -> int:
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    saved = dict(manifest["args"])
    if saved.get("command") == "rerun":
        raise UsageError("refusing to replay a rerun manifest")
    saved["out"] = args.out
    replay = argparse.Namespace(**saved, verbose=args.verbose)
    return COMMANDS[saved["command"]](replay)


COMMANDS = {
    "decompose": cmd_decompose,
    "synth": cmd_synth,
    "spectrum": cmd_spectrum,
    "weights": cmd_weights,
    "compare": cmd_compare,
    "rerun": cmd_rerun,
}


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tmdecomp",
                     description="Traffic matrix decomposition with SPCP / SPCP-FDR.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="decompose a traffic matrix")
    p.add_argument("input")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--interval", type=int, default=300, help="sampling interval (s)")
    p.add_argument("--method", choices=("spcp", "spcp-fdr"), default="spcp-fdr")
    p.add_argument("--no-normalize", action="store_true",
                   help="input already has unit noise variance")
    p.add_argument("--out", required=True)
    s = p.add_argument_group("solver")
    s.add_argument("--lam", "--lambda", dest="lam", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--eta", type=float, default=0.9)
    s.add_argument("--mu0-factor", type=float, default=0.99)
    s.add_argument("--mu-bar-factor", type=float, default=1e-5)
    s.add_argument("--L-f", dest="L_f", type=float, default=3.0)
    s.add_argument("--max-iters", type=int, default=1000)
    s.add_argument("--tol", type=float, default=1e-7)
    _add_weight_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic traffic matrix")
    p.add_argument("--spec", help="spec.json from an earlier run")
    p.add_argument("--T", type=int, default=2016)
    p.add_argument("--P", type=int, default=20)
    p.add_argument("--rank", type=int, default=4)
    p.add_argument("--harmonics", help="period:amplitude pairs, e.g. 24:8,12:4")
    p.add_argument("--baseline", type=float, default=20.0)
    p.add_argument("--density", type=float, default=0.005)
    p.add_argument("--magnitude", type=float, default=10.0)
    p.add_argument("--sigma", help="scalar or comma-separated per-flow noise scale")
    p.add_argument("--interval", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("spectrum", help="aggregate spectral density of a matrix")
    p.add_argument("input")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--interval", type=int, default=300)
    p.add_argument("--out", required=True)

    p = sub.add_parser("weights", help="dump the frequency-domain weights")
    p.add_argument("--T", type=int, default=2016)
    p.add_argument("--interval", type=int, default=300)
    p.add_argument("--out", required=True)
    _add_weight_flags(p)

    p = sub.add_parser("compare", help="compare an SPCP-FDR run with an SPCP run")
    p.add_argument("fdr_dir")
    p.add_argument("spcp_dir")
    p.add_argument("--out", required=True)

    p = sub.add_parser("rerun", help="replay a manifest into a new directory")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    return parser


_PATH_ARGS = ("input", "weights_spec", "spec", "fdr_dir", "spcp_dir", "manifest")


def _thread_limit():
    n = os.environ.get("TMDECOMP_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(1, int(n)))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key in _PATH_ARGS:
        if getattr(args, key, None):
            setattr(args, key, str(Path(getattr(args, key)).resolve()))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return COMMANDS[args.command](args)
    except (MatrixFormatError, UsageError, OSError, ValueError, KeyError) as exc:
        print(f"tmdecomp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
