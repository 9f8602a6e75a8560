"""Command-line interface: design, eval, sweep, lemma1.

Every command resolves its parameters from flags, optionally backed by
a flat ``key=value`` config file (flags win), writes a run manifest
alongside its artifacts, and derives all randomness from one ``--seed``
expanded into named sub-streams.  Replaying a manifest with
``--config <manifest>`` reproduces the artifacts byte for byte; for the
same reason the ``wall_time_ms`` column stays at zero unless
``--timing`` is given.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 design did not
converge (artifacts are still written).

``NO_PARALLEL=1`` is honored: execution is sequential either way.
"""

from __future__ import annotations

import argparse
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .coherence import welch_bound
from .experiments import (
    METHODS,
    ExperimentParams,
    design_for_method,
    evaluate_system,
    run_dimension_sweeps,
    run_lambda_sweep,
    run_snr_sweep,
    write_records_csv,
)
from .matio import format_float, read_keyvalues, read_matrix_csv, write_keyvalues, write_matrix_csv
from .solver import DEFAULT_OUTER_ITERS, SolverConfig, random_projection, write_trace_csv
from .synth import gen_dictionary, gen_signals, gen_sparse_codes, lemma1_check

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NOT_CONVERGED = 4


class CliError(Exception):
    """Error with a CLI exit code and a one-line diagnostic."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _read_matrix(path: str) -> np.ndarray:
    try:
        return read_matrix_csv(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_IO, str(exc)) from exc


def _parse_grid(text: str) -> list[float]:
    """Parse ``a:step:b`` (inclusive when it divides evenly) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(EXIT_USAGE, f"malformed grid {text!r}: expected a:step:b")
        try:
            a, step, b = (float(p) for p in parts)
        except ValueError as exc:
            bad = next(p for p in parts if not _is_float(p))
            raise CliError(EXIT_USAGE, f"malformed grid token {bad!r} in {text!r}") from exc
        if step <= 0:
            raise CliError(EXIT_USAGE, f"grid step must be positive in {text!r}")
        if b < a:
            raise CliError(EXIT_USAGE, f"grid end precedes start in {text!r}")
        raw = (b - a) / step
        count = int(math.floor(raw + 1e-6 * max(1.0, abs(raw))))
        if abs(a + count * step - b) <= 1e-9 * max(1.0, abs(b)):
            return list(np.linspace(a, b, count + 1)) if count > 0 else [a]
        return [a + i * step for i in range(count + 1)]
    values = []
    for token in text.split(","):
        if not _is_float(token):
            raise CliError(EXIT_USAGE, f"malformed grid token {token.strip()!r}")
        values.append(float(token))
    if not values:
        raise CliError(EXIT_USAGE, "empty grid")
    return values


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _parse_int_pair(text: str, flag: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(EXIT_USAGE, f"{flag} expects two comma-separated integers, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise CliError(EXIT_USAGE, f"{flag} expects integers, got {text!r}") from exc


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise CliError(EXIT_USAGE, f"malformed seed list {text!r}") from exc


def _merge_config(args: argparse.Namespace, defaults: dict) -> dict:
    """Resolve parameters: explicit flags, then config file, then defaults."""
    resolved = {}
    config = {}
    if getattr(args, "config", None):
        try:
            config = read_keyvalues(args.config)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read config {args.config}: {exc.strerror or exc}")
        except ValueError as exc:
            raise CliError(EXIT_IO, str(exc))
        command = getattr(args, "command", None)
        if "command" in config and command and config["command"] != command:
            raise CliError(
                EXIT_USAGE,
                f"config was written by command {config['command']!r}, not {command!r}",
            )
    for key, default in defaults.items():
        file_key = key.rstrip("_")  # argparse dest "lambda_" is written as "lambda"
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            resolved[key] = flag_value
        elif config.get(file_key, "") != "":  # empty manifest values mean "not set"
            resolved[key] = config[file_key]
        else:
            resolved[key] = default
    return resolved


def _as_float(value, key: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise CliError(EXIT_USAGE, f"{key} expects a number, got {value!r}") from None


def _as_int(value, key: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise CliError(EXIT_USAGE, f"{key} expects an integer, got {value!r}") from None


def _require(resolved: dict, key: str):
    if resolved[key] is None:
        raise CliError(EXIT_USAGE, f"missing required parameter --{key.replace('_', '-')}")
    return resolved[key]


def _load_design_dictionary(resolved: dict, seed: int) -> np.ndarray:
    if resolved["dict"] is not None and resolved["synth"] is not None:
        raise CliError(EXIT_USAGE, "give either --dict or --synth, not both")
    if resolved["dict"] is not None:
        return _read_matrix(resolved["dict"])
    if resolved["synth"] is not None:
        n, l = _parse_int_pair(str(resolved["synth"]), "--synth")
        return gen_dictionary(n, l, seed)
    raise CliError(EXIT_USAGE, "a dictionary is required: --dict <path> or --synth N,L")


def _resolve_xi(value, m: int, l: int) -> float:
    if isinstance(value, str) and value.strip().lower() == "welch":
        return welch_bound(m, l)
    return _as_float(value, "xi")


def _write_manifest(out_dir: Path, command: str, params: dict) -> None:
    manifest = {"command": command}
    manifest.update(params)
    manifest["version"] = __version__
    manifest["timestamp"] = _utc_now()
    write_keyvalues(manifest, out_dir / "manifest.txt")


def _ensure_out_dir(path_text: str) -> Path:
    out_dir = Path(path_text)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create output directory {out_dir}: {exc}")
    return out_dir


DESIGN_DEFAULTS = {
    "dict": None,
    "synth": None,
    "m": None,
    "method": "mt",
    "lambda_": 0.5,
    "xi": "welch",
    "iter": DEFAULT_OUTER_ITERS,
    "seed": 0,
    "sre": None,
    "out": None,
}


def cmd_design(args: argparse.Namespace) -> int:
    resolved = _merge_config(args, DESIGN_DEFAULTS)
    method = str(resolved["method"])
    if method not in METHODS:
        raise CliError(EXIT_USAGE, f"unknown method {method!r}; expected one of {METHODS}")
    seed = _as_int(resolved["seed"], "seed")
    m = _as_int(_require(resolved, "m"), "m")
    psi = _load_design_dictionary(resolved, seed)
    n, l = psi.shape
    if m < 1:
        raise CliError(EXIT_USAGE, f"m must be positive, got {m}")
    if method != "randn" and m >= n:
        raise CliError(EXIT_USAGE, f"designed matrices need m < n, got m={m}, n={n}")
    lam = _as_float(resolved["lambda_"], "lambda")
    xi = _resolve_xi(resolved["xi"], m, l)
    outer_iters = _as_int(resolved["iter"], "iter")
    sre = None
    if method in ("lh", "lh-etf"):
        if resolved["sre"] is None:
            raise CliError(EXIT_USAGE, f"method {method!r} requires --sre <path>")
        sre = _read_matrix(str(resolved["sre"]))
    out_dir = _ensure_out_dir(str(_require(resolved, "out")))

    phi0 = random_projection(m, n, seed)
    params = ExperimentParams(m=m, n=n, l=l, lam=lam, xi=xi, outer_iters=outer_iters)
    try:
        result = design_for_method(method, params, psi, phi0, lam, sre=sre, cfg=SolverConfig(rng_seed=seed))
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc

    write_matrix_csv(result.phi, out_dir / "phi.csv")
    write_trace_csv(result.trace, out_dir / "trace.csv")
    if resolved["synth"] is not None:  # make the generated dictionary reusable
        write_matrix_csv(psi, out_dir / "psi.csv")
    _write_manifest(
        out_dir,
        "design",
        {
            "dict": resolved["dict"] or "",
            "synth": resolved["synth"] or "",
            "m": m,
            "method": method,
            "lambda": lam,
            "xi": xi,
            "iter": outer_iters,
            "seed": seed,
            "sre": resolved["sre"] or "",
            "out": str(out_dir),
            "converged": result.converged,
        },
    )
    if not result.converged:
        print(f"design did not converge within the iteration budget; artifacts in {out_dir}",
              file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


EVAL_DEFAULTS = {
    "phi": None,
    "dict": None,
    "snr": 15.0,
    "p": 1000,
    "k": 4,
    "seed": 0,
    "tag": "custom",
    "out": None,
}


def cmd_eval(args: argparse.Namespace) -> int:
    resolved = _merge_config(args, EVAL_DEFAULTS)
    phi = _read_matrix(str(_require(resolved, "phi")))
    psi = _read_matrix(str(_require(resolved, "dict")))
    if phi.shape[1] != psi.shape[0]:
        raise CliError(
            EXIT_USAGE,
            f"phi columns ({phi.shape[1]}) do not match dictionary rows ({psi.shape[0]})",
        )
    snr = _as_float(resolved["snr"], "snr")
    p = _as_int(resolved["p"], "p")
    k = _as_int(resolved["k"], "k")
    seed = _as_int(resolved["seed"], "seed")
    tag = str(resolved["tag"])
    out_dir = _ensure_out_dir(str(_require(resolved, "out")))

    l = psi.shape[1]
    try:
        theta = gen_sparse_codes(l, k, 2 * p, seed)
        dataset = gen_signals(psi, theta, snr, seed)
        record = evaluate_system(
            phi, dataset, k, method=tag, param_name="snr", param_value=snr, seed=seed
        )
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc

    write_records_csv([record], out_dir / "records.csv")
    _write_manifest(
        out_dir,
        "eval",
        {
            "phi": resolved["phi"],
            "dict": resolved["dict"],
            "snr": snr,
            "p": p,
            "k": k,
            "seed": seed,
            "tag": tag,
            "out": str(out_dir),
        },
    )
    return EXIT_OK


SWEEP_DEFAULTS = {
    "axis": None,
    "grid": None,
    "methods": None,
    "seeds": "0",
    "m": 20,
    "n": 60,
    "l": 80,
    "k": 4,
    "p": 1000,
    "lambda_": 0.5,
    "xi": "welch",
    "iter": DEFAULT_OUTER_ITERS,
    "snr": 15.0,
    "lambda_grid": None,
    "out": None,
    "timing": False,
}

_SWEEP_DEFAULT_METHODS = {
    "lambda": ("mt", "mt-etf"),
    "snr": ("randn", "mt", "lh"),
    "m": ("randn", "mt"),
    "k": ("randn", "mt"),
    "l": ("randn", "mt"),
}


def cmd_sweep(args: argparse.Namespace) -> int:
    resolved = _merge_config(args, SWEEP_DEFAULTS)
    axis = str(_require(resolved, "axis")).lower()
    if axis not in ("lambda", "snr", "m", "k", "l"):
        raise CliError(EXIT_USAGE, f"unknown sweep axis {axis!r}")
    grid = _parse_grid(str(_require(resolved, "grid")))
    seeds = _parse_seeds(str(resolved["seeds"]))
    if resolved["methods"] is None:
        methods = _SWEEP_DEFAULT_METHODS[axis]
    else:
        methods = tuple(tok.strip() for tok in str(resolved["methods"]).split(","))
        for method in methods:
            if method not in METHODS:
                raise CliError(EXIT_USAGE, f"unknown method {method!r}; expected one of {METHODS}")
    m = _as_int(resolved["m"], "m")
    l = _as_int(resolved["l"], "l")
    timing = str(resolved["timing"]).lower() in ("1", "true", "yes")
    params = ExperimentParams(
        m=m,
        n=_as_int(resolved["n"], "n"),
        l=l,
        k=_as_int(resolved["k"], "k"),
        p=_as_int(resolved["p"], "p"),
        lam=_as_float(resolved["lambda_"], "lambda"),
        xi=_resolve_xi(resolved["xi"], m, l),
        outer_iters=_as_int(resolved["iter"], "iter"),
        snr_db=_as_float(resolved["snr"], "snr"),
    )
    out_dir = _ensure_out_dir(str(_require(resolved, "out")))

    try:
        if axis == "lambda":
            records = run_lambda_sweep(params, grid, seeds, methods=methods, timing=timing)
        elif axis == "snr":
            lambda_grid = None
            if resolved["lambda_grid"] is not None:
                lambda_grid = _parse_grid(str(resolved["lambda_grid"]))
            records = run_snr_sweep(
                params, grid, methods, seeds, lambda_grid=lambda_grid, timing=timing
            )
        else:
            int_grid = []
            for value in grid:
                if abs(value - round(value)) > 1e-9:
                    raise CliError(
                        EXIT_USAGE, f"axis {axis!r} requires integer grid values, got {value!r}"
                    )
                int_grid.append(int(round(value)))
            records = run_dimension_sweeps(
                params, axis, int_grid, seeds, methods=methods, timing=timing
            )
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc

    write_records_csv(records, out_dir / "records.csv")
    _write_manifest(
        out_dir,
        "sweep",
        {
            "axis": axis,
            "grid": resolved["grid"],
            "methods": ",".join(methods),
            "seeds": ",".join(str(s) for s in seeds),
            "m": params.m,
            "n": params.n,
            "l": params.l,
            "k": params.k,
            "p": params.p,
            "lambda": params.lam,
            "xi": params.xi,
            "iter": params.outer_iters,
            "snr": params.snr_db,
            "lambda_grid": resolved["lambda_grid"] or "",
            "out": str(out_dir),
            "timing": timing,
        },
    )
    return EXIT_OK


LEMMA1_DEFAULTS = {
    "phi": None,
    "random": None,
    "sigma": 1.0,
    "p": 100000,
    "seed": 0,
    "csv": None,
    "out": None,
}

_LEMMA1_CSV_HEADER = (
    "trials,mean_estimate,predicted_mean,variance_estimate,predicted_variance,z_score"
)


def cmd_lemma1(args: argparse.Namespace) -> int:
    resolved = _merge_config(args, LEMMA1_DEFAULTS)
    if resolved["phi"] is not None and resolved["random"] is not None:
        raise CliError(EXIT_USAGE, "give either --phi or --random, not both")
    seed = _as_int(resolved["seed"], "seed")
    if resolved["phi"] is not None:
        phi = _read_matrix(str(resolved["phi"]))
    elif resolved["random"] is not None:
        m, n = _parse_int_pair(str(resolved["random"]), "--random")
        phi = random_projection(m, n, seed)
    else:
        raise CliError(EXIT_USAGE, "a matrix is required: --phi <path> or --random M,N")
    sigma = _as_float(resolved["sigma"], "sigma")
    p = _as_int(resolved["p"], "p")
    try:
        report = lemma1_check(phi, sigma, p, seed)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc

    lines = {
        "command": "lemma1",
        "phi": resolved["phi"] or "",
        "random": resolved["random"] or "",
        "sigma": sigma,
        "p": p,
        "seed": seed,
        "version": __version__,
        "timestamp": _utc_now(),
    }
    lines.update(report.as_keyvalues())
    for key, value in lines.items():
        rendered = format_float(value) if isinstance(value, float) else value
        print(f"{key}={rendered}")

    if resolved["csv"] is not None:
        csv_path = Path(str(resolved["csv"]))
        row = ",".join(
            [
                str(report.trials),
                format_float(report.mean_estimate),
                format_float(report.predicted_mean),
                format_float(report.variance_estimate),
                format_float(report.predicted_variance),
                format_float(report.z_score),
            ]
        )
        with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(_LEMMA1_CSV_HEADER + "\n")
            fh.write(row + "\n")
    if resolved["out"] is not None:
        out_dir = _ensure_out_dir(str(resolved["out"]))
        write_keyvalues(report.as_keyvalues(), out_dir / "report.txt")
        _write_manifest(
            out_dir,
            "lemma1",
            {
                "phi": resolved["phi"] or "",
                "random": resolved["random"] or "",
                "sigma": sigma,
                "p": p,
                "seed": seed,
                "csv": resolved["csv"] or "",
                "out": str(out_dir),
            },
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csdesign",
        description="Design robust compressive-sensing projection matrices and "
        "reproduce the synthetic evaluation pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="design a projection matrix")
    p_design.add_argument("--config", help="key=value config file (flags override)")
    p_design.add_argument("--dict", help="dictionary matrix CSV")
    p_design.add_argument("--synth", help="generate a random dictionary: N,L")
    p_design.add_argument("--m", type=int, help="number of measurement rows")
    p_design.add_argument("--method", choices=METHODS, help="design method (default mt)")
    p_design.add_argument("--lambda", dest="lambda_", type=float, help="regularizer weight")
    p_design.add_argument("--xi", help="relaxed-ETF level: 'welch' or a float")
    p_design.add_argument("--iter", type=int, help="alternating rounds for *-etf methods")
    p_design.add_argument("--seed", type=int, help="root seed")
    p_design.add_argument("--sre", help="SRE matrix CSV (required for lh methods)")
    p_design.add_argument("--out", help="output directory")
    p_design.set_defaults(func=cmd_design)

    p_eval = sub.add_parser("eval", help="evaluate a projection matrix on synthetic data")
    p_eval.add_argument("--config", help="key=value config file (flags override)")
    p_eval.add_argument("--phi", help="projection matrix CSV")
    p_eval.add_argument("--dict", help="dictionary matrix CSV")
    p_eval.add_argument("--snr", type=float, help="dataset SNR in dB")
    p_eval.add_argument("--p", type=int, help="signals per train/test half")
    p_eval.add_argument("--k", type=int, help="sparsity level")
    p_eval.add_argument("--seed", type=int, help="root seed")
    p_eval.add_argument("--tag", help="method tag recorded in the CSV")
    p_eval.add_argument("--out", help="output directory")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--config", help="key=value config file (flags override)")
    p_sweep.add_argument("--axis", help="sweep axis: lambda|snr|m|k|l")
    p_sweep.add_argument("--grid", help="grid: a:step:b or comma list")
    p_sweep.add_argument("--methods", help="comma list of methods")
    p_sweep.add_argument("--seeds", help="comma list of seeds")
    p_sweep.add_argument("--m", type=int)
    p_sweep.add_argument("--n", type=int)
    p_sweep.add_argument("--l", type=int)
    p_sweep.add_argument("--k", type=int)
    p_sweep.add_argument("--p", type=int)
    p_sweep.add_argument("--lambda", dest="lambda_", type=float)
    p_sweep.add_argument("--xi", help="'welch' or a float")
    p_sweep.add_argument("--iter", type=int)
    p_sweep.add_argument("--snr", type=float, help="fixed SNR for non-snr sweeps")
    p_sweep.add_argument(
        "--lambda-grid",
        dest="lambda_grid",
        help="candidate lambdas searched per method in an snr sweep",
    )
    p_sweep.add_argument("--timing", action="store_const", const=True,
                         help="record wall-clock design time (breaks byte reproducibility)")
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lemma = sub.add_parser("lemma1", help="Monte-Carlo check of the projected-noise law")
    p_lemma.add_argument("--config", help="key=value config file (flags override)")
    p_lemma.add_argument("--phi", help="projection matrix CSV")
    p_lemma.add_argument("--random", help="draw a random matrix: M,N")
    p_lemma.add_argument("--sigma", type=float, help="noise standard deviation")
    p_lemma.add_argument("--p", type=int, help="number of Monte-Carlo samples")
    p_lemma.add_argument("--seed", type=int, help="root seed")
    p_lemma.add_argument("--csv", help="also write the report as a one-row CSV")
    p_lemma.add_argument("--out", help="optional output directory for report + manifest")
    p_lemma.set_defaults(func=cmd_lemma1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"csdesign {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"csdesign {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
