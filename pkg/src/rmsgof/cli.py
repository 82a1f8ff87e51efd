"""Command-line front end.

Subcommands mirror the analysis pipeline: ``eigs`` prints the variance
spectrum, ``pvalue`` a single confidence/significance level, ``curve``
plot-ready significance data over an x grid, ``power`` a Monte Carlo power
comparison.  Payload output is CSV (one-line header, LF, '.' decimals) and is
byte-reproducible for a fixed seed and configuration; wall-clock timings are
quarantined to a JSON run manifest on stderr (and next to --out, if given).

Exit codes: 0 success, 2 input error, 3 numerical degeneracy, 4 quadrature
budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, eigen, model, montecarlo, stats, wsumchi2
from .errors import DegenerateSpectrum, QuadratureBudgetExceeded, RmsgofError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_QUADRATURE = 4


@dataclass
class RunManifest:
    """Reproducibility record emitted on every run."""

    command: str
    config: dict
    input_digest: dict
    tool_version: str = __version__
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def emit(self, out_path: str | None) -> None:
        payload = {
            "command": self.command,
            "config": self.config,
            "input_digest": self.input_digest,
            "tool_version": self.tool_version,
            "timings": self.timings,
            **self.extra,
        }
        text = json.dumps(payload, sort_keys=True)
        print(text, file=sys.stderr)
        if out_path:
            with open(out_path + ".manifest.json", "w") as fh:
                fh.write(text + "\n")


class _Timer:
    def __init__(self, manifest: RunManifest, phase: str):
        self.manifest = manifest
        self.phase = phase

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.manifest.timings[self.phase] = max(time.perf_counter() - self.t0, 0.0)
        return False


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _resolve_model(source: str) -> tuple[model.ModelDistribution, str]:
    """A model source is a builtin spec, '-' for stdin, or a file path."""
    kind = source.partition(":")[0]
    if kind in model.BUILTIN_KINDS:
        dist = model.generate_builtin(model.parse_family(source))
        return dist, _digest(source)
    if source == "-":
        text = sys.stdin.read()
        return model.load_distribution(io.StringIO(text)), _digest(text)
    with open(source) as fh:
        text = fh.read()
    return model.load_distribution(io.StringIO(text)), _digest(text)


def _load_counts(path: str) -> stats.DrawCounts:
    values = []
    text = sys.stdin.read() if path == "-" else open(path).read()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise model.ParseError(lineno, f"cannot parse count {line!r}") from None
    return stats.DrawCounts(np.array(values, dtype=np.int64))


def _threads(args) -> int:
    if args.threads is not None:
        return max(args.threads, 1)
    env = os.environ.get("RMSGOF_THREADS")
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            raise RmsgofError(f"RMSGOF_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _quadrature_config(args) -> wsumchi2.QuadratureConfig:
    low, high = (int(v) for v in args.orders.split(","))
    return wsumchi2.QuadratureConfig(
        t_max=args.tmax, low_order=low, high_order=high, abs_tol=args.tol
    )


def _writer(args):
    if args.out:
        return open(args.out, "w", newline="\n")
    return sys.stdout


def _fmt(value: float, digits: int = 12) -> str:
    return f"{value:.{digits}g}"


def cmd_eigs(args) -> int:
    manifest = RunManifest(command="eigs", config={}, input_digest={})
    with _Timer(manifest, "total"):
        with _Timer(manifest, "load"):
            dist, digest = _resolve_model(args.model)
        manifest.input_digest["model"] = digest
        with _Timer(manifest, "spectrum"):
            spectrum = eigen.variance_spectrum(eigen.build_b(dist))
        out = _writer(args)
        out.write("sigma2\n")
        for v in spectrum.variances:
            out.write(_fmt(v) + "\n")
        out.write(f"# zero_eigenvalue_residual = {_fmt(spectrum.zero_eigenvalue_residual)}\n")
        if out is not sys.stdout:
            out.close()
    manifest.extra["zero_eigenvalue_residual"] = spectrum.zero_eigenvalue_residual
    manifest.emit(args.out)
    return EXIT_OK


def cmd_pvalue(args) -> int:
    manifest = RunManifest(command="pvalue", config={}, input_digest={})
    with _Timer(manifest, "total"):
        with _Timer(manifest, "load"):
            dist, digest = _resolve_model(args.model)
        manifest.input_digest["model"] = digest
        if (args.x is None) == (args.counts is None):
            raise RmsgofError("pvalue needs exactly one of --x or --counts")
        if args.counts is not None:
            counts = _load_counts(args.counts)
            x = stats.rms_statistic(counts, dist)
        else:
            x = args.x
        cfg = _quadrature_config(args)
        manifest.config = {"x": x, "quadrature": vars(cfg).copy()}
        with _Timer(manifest, "spectrum"):
            spectrum = eigen.variance_spectrum(eigen.build_b(dist))
        with _Timer(manifest, "quadrature"):
            evaluation = wsumchi2.cdf(x, spectrum, cfg)
        out = _writer(args)
        out.write("confidence,significance,nodes_used\n")
        out.write(
            f"{_fmt(evaluation.p)},{_fmt(1.0 - evaluation.p)},{evaluation.nodes_used}\n"
        )
        if out is not sys.stdout:
            out.close()
    manifest.emit(args.out)
    return EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    try:
        scale, lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise RmsgofError(f"grid spec {spec!r} is not scale:lo:hi:count") from None
    if count < 2:
        raise RmsgofError("grid needs at least 2 points")
    if scale == "lin":
        return np.linspace(lo, hi, count)
    if scale == "log":
        if lo <= 0:
            raise RmsgofError("log grid needs positive endpoints")
        return np.geomspace(lo, hi, count)
    raise RmsgofError(f"unknown grid scale {scale!r} (use lin or log)")


def cmd_curve(args) -> int:
    manifest = RunManifest(command="curve", config={}, input_digest={})
    with _Timer(manifest, "total"):
        with _Timer(manifest, "load"):
            dist, digest = _resolve_model(args.model)
        manifest.input_digest["model"] = digest
        grid = _parse_grid(args.grid)
        cfg = _quadrature_config(args)
        threads = _threads(args)
        manifest.config = {
            "grid": args.grid,
            "threads": threads,
            "quadrature": vars(cfg).copy(),
        }
        with _Timer(manifest, "spectrum"):
            spectrum = eigen.variance_spectrum(eigen.build_b(dist))
        with _Timer(manifest, "quadrature"):
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    evals = list(pool.map(lambda x: wsumchi2.cdf(float(x), spectrum, cfg), grid))
            else:
                evals = [wsumchi2.cdf(float(x), spectrum, cfg) for x in grid]
        out = _writer(args)
        out.write("x,significance\n")
        for x, ev in zip(grid, evals):
            out.write(f"{_fmt(float(x))},{_fmt(1.0 - ev.p)}\n")
        if out is not sys.stdout:
            out.close()
    manifest.extra["max_nodes"] = max(ev.nodes_used for ev in evals)
    manifest.extra["total_nodes"] = sum(ev.nodes_used for ev in evals)
    manifest.emit(args.out)
    return EXIT_OK


def cmd_power(args) -> int:
    manifest = RunManifest(command="power", config={}, input_digest={})
    with _Timer(manifest, "total"):
        with _Timer(manifest, "load"):
            dist, digest = _resolve_model(args.model)
            actual, digest_actual = _resolve_model(args.actual)
        manifest.input_digest = {"model": digest, "actual": digest_actual}
        ids = tuple(s.strip() for s in args.stats.split(",") if s.strip())
        for sid in ids:
            if sid not in stats.STATISTIC_IDS:
                raise RmsgofError(
                    f"unknown statistic {sid!r}; choose from {','.join(stats.STATISTIC_IDS)}"
                )
        cfg = montecarlo.SimulationConfig(seed=args.seed, n_sims=args.sims, m=args.draws)
        threads = _threads(args)
        manifest.config = {
            "statistics": list(ids),
            "simulation": vars(cfg).copy(),
            "threads": threads,
        }
        with _Timer(manifest, "simulate"):
            result = montecarlo.power_experiment(dist, actual, ids, cfg, threads)
        out = _writer(args)
        out.write("statistic,n,m,n_sims,rate,critical_value,seed\n")
        for sid in ids:
            out.write(
                f"{sid},{result.n},{result.m},{result.n_sims},"
                f"{_fmt(result.rates[sid])},{_fmt(result.critical_values[sid])},"
                f"{result.seed}\n"
            )
        if out is not sys.stdout:
            out.close()
    manifest.emit(args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmsgof",
        description="Confidence levels and power experiments for the "
        "root-mean-square goodness-of-fit statistic.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument("--threads", type=int, default=None,
                       help="worker pool size (default: RMSGOF_THREADS or all cores)")

    def add_quadrature(p):
        p.add_argument("--tol", type=float, default=1e-10, help="absolute quadrature tolerance")
        p.add_argument("--tmax", type=float, default=40.0, help="integration domain upper end")
        p.add_argument("--orders", default="10,21", help="low,high Gauss-Legendre orders")

    p = sub.add_parser("eigs", help="variance spectrum of a model")
    p.add_argument("--model", required=True, help="file path, '-', or builtin spec")
    add_common(p)
    p.set_defaults(fn=cmd_eigs)

    p = sub.add_parser("pvalue", help="confidence level for a statistic value or counts")
    p.add_argument("--model", required=True)
    p.add_argument("--x", type=float, help="value of the squared RMS statistic")
    p.add_argument("--counts", help="counts file (one integer per line)")
    add_quadrature(p)
    add_common(p)
    p.set_defaults(fn=cmd_pvalue)

    p = sub.add_parser("curve", help="significance curve over an x grid")
    p.add_argument("--model", required=True)
    p.add_argument("--grid", required=True, help="scale:lo:hi:count with scale lin|log")
    add_quadrature(p)
    add_common(p)
    p.set_defaults(fn=cmd_curve)

    p = sub.add_parser("power", help="power comparison of the four statistics")
    p.add_argument("--model", required=True)
    p.add_argument("--actual", required=True)
    p.add_argument("--stats", default="rms,chi2,g2,ft")
    p.add_argument("--sims", type=int, default=10_000, help="simulations per phase")
    p.add_argument("--draws", type=int, default=200, help="draws per simulation (m)")
    p.add_argument("--seed", type=int, default=0)
    add_common(p)
    p.set_defaults(fn=cmd_power)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except QuadratureBudgetExceeded as exc:
        print(f"rmsgof: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except DegenerateSpectrum as exc:
        print(f"rmsgof: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (RmsgofError, OSError, ValueError) as exc:
        print(f"rmsgof: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
