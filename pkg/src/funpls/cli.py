"""Command-line front end.

Exit codes: 0 success, 2 input or parse error, 3 numerical or fit error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import simbench
from ._linear import predict_rows, training_rss
from .aplsfit import AplsModel, build_h_hat
from .covest import krylov_sequence
from .csvio import (
    default_grid,
    format_column,
    read_curves,
    read_grid,
    read_responses,
    write_grid,
    write_table,
)
from .errors import FunplsError, GridMismatchError, SpecError
from .funcore import Dataset
from .serialize import dumps_model, loads_model, spectral_model_from_dict

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    """Anything that should end the process with exit code 2."""


def _threads() -> int:
    raw = os.environ.get("FUNPLS_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError:
        raise InputError(f"FUNPLS_THREADS must be an integer, got {raw!r}") from None


def _require(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    return path


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path) -> dict:
    try:
        return json.loads(_require(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def cmd_fit(args) -> int:
    X = read_curves(_require(args.curves))
    y = read_responses(_require(args.responses))
    grid = read_grid(_require(args.grid)) if args.grid else default_grid(X.shape[1])
    if X.shape[1] != grid.size:
        raise InputError(f"curves have {X.shape[1]} columns but the grid has {grid.size} points")
    if X.shape[0] != y.size:
        raise InputError(f"{X.shape[0]} curves but {y.size} responses")
    data = Dataset(grid, X, y)
    model = simbench.METHODS[args.method](data, args.p)
    _emit(dumps_model(model) + "\n", args.out)
    print(f"method={args.method} p={args.p} n={data.n} m={grid.size}", file=sys.stderr)
    print(f"training_rmse={np.sqrt(training_rss(model, data)):.6e}", file=sys.stderr)
    if isinstance(model, AplsModel):
        diag = build_h_hat(krylov_sequence(data, args.p + 1), args.p)
        print(f"condition_estimate={diag.condition_estimate:.6e}", file=sys.stderr)
        print(f"smallest_eigenvalue={diag.smallest_eigenvalue:.6e}", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    model = loads_model(_require(args.model).read_text())
    X = read_curves(_require(args.curves))
    if X.shape[1] != model.grid.size:
        raise GridMismatchError(f"curves have {X.shape[1]} samples, model grid has {model.grid.size}")
    _emit(format_column(predict_rows(model, X)), args.out)
    return 0


def _resolve(base: Path, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _spectral_model(spec: dict, base: Path):
    if "model" in spec:
        return spectral_model_from_dict(spec["model"])
    if "model_path" in spec:
        return spectral_model_from_dict(_load_json(_resolve(base, spec["model_path"])))
    return None


def simulation_spec_from_dict(spec: dict, base: Path = Path(".")) -> simbench.SimulationSpec:
    """Build a :class:`~funpls.simbench.SimulationSpec` from its JSON form; paths are relative to ``base``."""
    known = {
        "model", "model_path", "curves_path", "grid_path", "responses_path", "case", "n_train",
        "n_test", "replicates", "seed", "p_range", "methods", "noise_sd", "n_components",
    }
    extra = set(spec) - known
    if extra:
        raise SpecError(f"unknown spec keys: {sorted(extra)}")
    kwargs = {k: spec[k] for k in ("case", "n_train", "n_test", "replicates", "seed", "noise_sd", "n_components") if k in spec}
    if "p_range" in spec:
        kwargs["p_range"] = tuple(spec["p_range"])
    if "methods" in spec:
        kwargs["methods"] = tuple(spec["methods"])
    model = _spectral_model(spec, base)
    if model is not None:
        kwargs["model"] = model
    if "curves_path" in spec:
        curves = read_curves(_require(_resolve(base, spec["curves_path"])))
        kwargs["curves"] = curves
        if "grid_path" in spec:
            kwargs["grid"] = read_grid(_require(_resolve(base, spec["grid_path"])))
        else:
            kwargs["grid"] = default_grid(curves.shape[1])
        if "responses_path" in spec:
            kwargs["responses"] = read_responses(_require(_resolve(base, spec["responses_path"])))
    try:
        return simbench.SimulationSpec(**kwargs)
    except TypeError as exc:
        raise SpecError(str(exc)) from None


def cmd_bench(args) -> int:
    path = _require(args.spec)
    raw = _load_json(path)
    if args.seed is not None:
        raw["seed"] = args.seed
    spec = simulation_spec_from_dict(raw, path.parent)
    records = simbench.run_benchmark(spec, threads=_threads())
    _emit(simbench.records_to_csv(records), args.out)
    if args.summary:
        text = simbench.summary_to_csv(simbench.summarize(records))
        if args.out:
            out = Path(args.out)
            out.with_name(out.stem + ".summary.csv").write_text(text)
        else:
            sys.stderr.write(text)
    return 0


def cmd_rates(args) -> int:
    path = _require(args.spec)
    spec = _load_json(path)
    if args.seed is not None:
        spec["seed"] = args.seed
    model = _spectral_model(spec, path.parent)
    if model is None:
        raise SpecError("rate spec needs 'model' or 'model_path'")
    if "noise_sd" in spec:
        model = model.with_noise(float(spec["noise_sd"]))
    if "rescale_to" in spec:
        model = model.rescaled(float(np.sqrt(float(spec["rescale_to"]) / model.hs_norm())))
    try:
        table = simbench.rate_experiment(
            model,
            spec["n_values"],
            spec["j_values"],
            int(spec["replicates"]),
            int(spec["seed"]),
            threads=_threads(),
        )
    except KeyError as exc:
        raise SpecError(f"rate spec is missing {exc}") from None
    _emit(table.to_csv(), args.out)
    return 0


def cmd_simulate(args) -> int:
    model = spectral_model_from_dict(_load_json(args.model))
    rng = simbench.make_rng(args.seed, 4)
    X = simbench.simulate_curve_matrix(model, args.n, rng)
    if args.sigma_rule:
        model = model.with_noise(simbench.sigma_from_signal(X, model.slope))
    data = simbench.generate_responses(X, model, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "curves.csv", data.X)
    (out / "responses.csv").write_text(format_column(data.y))
    write_grid(out / "grid.csv", data.grid)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funpls", description="Functional PLS / APLS regression tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model and write it as JSON")
    p.add_argument("curves")
    p.add_argument("responses")
    p.add_argument("--grid")
    p.add_argument("--method", choices=list(simbench.METHODS), default="apls_ortho")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict responses for new curves")
    p.add_argument("model")
    p.add_argument("curves")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="run a train/test benchmark from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out")
    p.add_argument("--summary", action="store_true", help="also emit per-(method, p) quartiles")
    p.add_argument("--seed", type=int, help="override the seed in the JSON file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("rates", help="Monte Carlo convergence-rate table from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, help="override the seed in the JSON file")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("simulate", help="draw curves and responses from a spectral model JSON")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-rule", action="store_true", help="set noise so 5 sigma^2 = Var(int b X)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "p", 1) is not None and getattr(args, "p", 1) < 1:
        parser.error("--p must be >= 1")
    try:
        return args.func(args)
    except (InputError, SpecError, OSError, ValueError) as exc:
        if isinstance(exc, GridMismatchError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FunplsError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
