"""Command-line interface: generate, estimate, validate, montecarlo.

Exit codes: 0 success (and, for validate, admissible), 1 usage error,
2 model / admissibility / format error, 3 I/O error. All outputs are
byte-deterministic given the same flags and config.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FormatError, MulticohError
from .estimation import pairwise_coherence_summary
from .graphio import (
    read_latents_file,
    read_layer_file,
    sha256_bytes,
    write_manifest,
    write_sample,
)
from .graphon import admissibility_report
from .modelio import load_config
from .samplers import (
    MECHANISM_MODULATION,
    MECHANISMS,
    Latents,
    ModulationSpec,
    MultiplexSample,
    sample,
)
from .streams import substream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_IO = 3

MC_STATS = ("theta1_hat", "theta2_hat", "varrho_hat", "r_hat", "r0_hat", "r0_abs_error")
MC_CSV_COLUMNS = ("replicate", "n", "rho", "gamma", "block_a", "block_b", "stat_name", "value")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; route usage problems to 1
    def error(self, message):
        raise _UsageError(message)


def _fmt(x: float) -> str:
    return repr(float(x))


def _versions() -> dict:
    return {
        "multicoh": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def _parse_rho_flag(value: str):
    if value == "auto":
        return "auto"
    try:
        return float(value)
    except ValueError as exc:
        raise _UsageError(f"--rho must be 'auto' or a number, got {value!r}") from exc


def _float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise _UsageError(f"{flag} must be a comma-separated list of numbers") from exc


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise _UsageError(f"{flag} must be a comma-separated list of integers") from exc


# -- generate ---------------------------------------------------------------------


def _cmd_generate(args) -> int:
    loaded = load_config(args.config)
    config = loaded.sampler_config(seed=args.seed, n=args.n, mechanism=args.mechanism)
    result = sample(config)
    out = Path(args.out)
    names = write_sample(out, result)
    manifest = {
        "format": "multicoh-run v1",
        "command": "generate",
        "config_sha256": sha256_bytes(loaded.raw_bytes),
        "kind": loaded.kind,
        "seed": config.seed,
        "n": config.n,
        "mechanism": config.mechanism,
        "layers": result.d,
        "edge_counts": [result.edge_count(m) for m in range(1, result.d + 1)],
        "files": names,
        "versions": _versions(),
    }
    write_manifest(out / "manifest.json", manifest)
    print(f"wrote {result.d} layers (n={config.n}, mechanism={config.mechanism}) to {out}")
    return EXIT_OK


# -- estimate ---------------------------------------------------------------------


def _cmd_estimate(args) -> int:
    layers = []
    n = None
    for path in args.layers:
        n_m, bits = read_layer_file(path)
        if n is None:
            n = n_m
        elif n_m != n:
            raise FormatError(f"{path}: node count {n_m} does not match {n}")
        layers.append(bits)
    latents = read_latents_file(args.labels)
    if latents.kind != "labels":
        raise FormatError(f"{args.labels}: estimation needs a labels file, got kind=uniform")
    if latents.n != n:
        raise FormatError(f"{args.labels}: {latents.n} labels for {n} nodes")
    if len(layers) < 2:
        raise FormatError("estimation needs at least two layer files")
    ms = MultiplexSample.from_triu(latents, layers)
    rho = _parse_rho_flag(args.rho)
    pairs = pairwise_coherence_summary(ms, latents.values, gamma=args.gamma, rho=rho)
    if len(pairs) == 1:
        sys.stdout.write(pairs[(1, 2)].to_csv())
        return EXIT_OK
    lines = ["layer1,layer2," + ",".join(pairs[(1, 2)].to_csv().splitlines()[0].split(","))]
    for (m1, m2) in sorted(pairs):
        body = pairs[(m1, m2)].to_csv().splitlines()[1:]
        lines.extend(f"{m1},{m2},{row}" for row in body)
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# -- validate ---------------------------------------------------------------------


def _cmd_validate(args) -> int:
    loaded = load_config(args.config)
    model = loaded.model
    if isinstance(model, ModulationSpec):
        model = model.as_pair_model()
    report = admissibility_report(model, grid_resolution=args.grid)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        print(report.summary())
    return EXIT_OK if report.admissible else EXIT_MODEL


# -- montecarlo -------------------------------------------------------------------


def _with_rho(model, rho: float):
    if isinstance(model, ModulationSpec):
        return ModulationSpec(model.f1, model.h, rho)
    return replace(model, rho=rho)


def _block_midpoints(proportions) -> np.ndarray:
    if proportions is None:
        return np.array([0.5])
    bounds = np.concatenate(([0.0], np.cumsum(proportions)))
    return (bounds[:-1] + bounds[1:]) / 2.0


def _cmd_montecarlo(args) -> int:
    loaded = load_config(args.config)
    n_grid = args.n_grid if args.n_grid else ([loaded.n] if loaded.n else [])
    if not n_grid:
        raise _UsageError("--n-grid is required when the config has no n")
    base_model = loaded.model
    base_rho = base_model.rho
    rho_grid = args.rho_grid if args.rho_grid else [base_rho]
    if args.replicates < 1:
        raise _UsageError("--replicates must be at least 1")

    mids = _block_midpoints(loaded.latent_proportions)
    k = mids.size
    rows = []
    mae_acc = {}
    for n in n_grid:
        for rho in rho_grid:
            model = _with_rho(base_model, rho)
            pair_model = model.as_pair_model() if isinstance(model, ModulationSpec) else model
            gamma = pair_model.gamma
            mx, my = np.meshgrid(mids, mids, indexing="ij")
            target_r0 = np.asarray(pair_model.coherence_at(mx, my), dtype=float)
            cfg_loaded = replace(loaded, model=model)
            for rep in range(1, args.replicates + 1):
                child_seed = int(substream(args.seed, "montecarlo", n, repr(rho), rep).integers(2**63))
                config = cfg_loaded.sampler_config(seed=child_seed, n=n)
                ms = sample(config)
                labels = (
                    ms.latents.values
                    if ms.latents.kind == "labels"
                    else np.ones(ms.n, dtype=np.int64)
                )
                est = pairwise_coherence_summary(ms, labels, gamma=gamma, k=k)[(1, 2)]
                point = (n, rho, gamma)
                rows.append((rep, *point, 0, 0, "rho_hat", est.rho_hat))
                for a in range(k):
                    for b in range(a, k):
                        if est.counts[a, b] > 0:
                            rows.append((rep, *point, a + 1, b + 1, "theta1_hat", est.theta1_hat[a, b]))
                            rows.append((rep, *point, a + 1, b + 1, "theta2_hat", est.theta2_hat[a, b]))
                            rows.append((rep, *point, a + 1, b + 1, "varrho_hat", est.varrho_hat[a, b]))
                        if est.defined[a, b]:
                            err = abs(est.r0_hat[a, b] - target_r0[a, b])
                            rows.append((rep, *point, a + 1, b + 1, "r_hat", est.r_hat[a, b]))
                            rows.append((rep, *point, a + 1, b + 1, "r0_hat", est.r0_hat[a, b]))
                            rows.append((rep, *point, a + 1, b + 1, "r0_abs_error", err))
                            key = (*point, a + 1, b + 1)
                            mae_acc.setdefault(key, []).append(
                                (float(err), float(est.r0_hat[a, b]))
                            )
    for key in sorted(mae_acc):
        errs = [e for e, _ in mae_acc[key]]
        vals = [v for _, v in mae_acc[key]]
        n, rho, gamma, a, b = key
        rows.append((-1, n, rho, gamma, a, b, "r0_mae", float(np.mean(errs))))
        rows.append((-1, n, rho, gamma, a, b, "r0_mean", float(np.mean(vals))))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [",".join(MC_CSV_COLUMNS)]
    for rep, n, rho, gamma, a, b, stat, value in rows:
        lines.append(f"{rep},{n},{_fmt(rho)},{gamma},{a},{b},{stat},{_fmt(value)}")
    (out / "results.csv").write_text("\n".join(lines) + "\n")
    manifest = {
        "format": "multicoh-run v1",
        "command": "montecarlo",
        "config_sha256": sha256_bytes(loaded.raw_bytes),
        "kind": loaded.kind,
        "seed": args.seed,
        "replicates": args.replicates,
        "n_grid": list(n_grid),
        "rho_grid": [float(r) for r in rho_grid],
        "files": ["results.csv"],
        "versions": _versions(),
    }
    write_manifest(out / "manifest.json", manifest)
    print(f"wrote {len(rows)} result rows to {out / 'results.csv'}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multicoh", description="Correlated multiplex graphs and edge coherence")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[], help="sample a multiplex pair and write edge lists")
    g.add_argument("config", help="model configuration (JSON)")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    g.add_argument("--n", type=int, default=None, help="number of nodes (overrides config)")
    g.add_argument("--mechanism", choices=MECHANISMS, default=None, help="sampling mechanism")
    g.set_defaults(func=_cmd_generate)

    e = sub.add_parser("estimate", help="block coherence estimates from layer files")
    e.add_argument("layers", nargs="+", help="layer edge-list files")
    e.add_argument("--labels", required=True, help="latents file with kind=labels")
    e.add_argument("--gamma", type=int, choices=(1, 2), default=2, help="scaling exponent")
    e.add_argument("--rho", default="auto", help="density scale: 'auto' or a number")
    e.set_defaults(func=_cmd_estimate)

    v = sub.add_parser("validate", help="check a model configuration for admissibility")
    v.add_argument("config", help="model configuration (JSON)")
    v.add_argument("--grid", type=int, default=256, help="grid resolution for smooth graphons")
    v.add_argument("--json", action="store_true", help="emit the machine-readable report")
    v.set_defaults(func=_cmd_validate)

    m = sub.add_parser("montecarlo", help="replicate generate+estimate over (n, rho) grids")
    m.add_argument("config", help="model configuration (JSON)")
    m.add_argument("--out", required=True, help="output directory")
    m.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    m.add_argument("--replicates", type=int, default=10, help="replicates per grid point")
    m.add_argument(
        "--n-grid", type=lambda s: _int_list(s, "--n-grid"), default=None,
        help="comma-separated node counts",
    )
    m.add_argument(
        "--rho-grid", type=lambda s: _float_list(s, "--rho-grid"), default=None,
        help="comma-separated density scales",
    )
    m.set_defaults(func=_cmd_montecarlo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MulticohError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
