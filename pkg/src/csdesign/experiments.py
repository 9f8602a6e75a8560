"""Experiment harnesses: design, measure, recover, score, record.

Each harness runs the full pipeline on synthetic data and emits flat
:class:`ExperimentRecord` rows with a fixed CSV schema, so sweeps are
comparable across runs and reruns with the same plan and seeds are
byte-identical.  Wall-clock timing is off by default for exactly that
reason; pass ``timing=True`` to fill the ``wall_time_ms`` column.

Within one sweep point all methods share the same dataset and the same
random starting matrix, which is also the matrix evaluated as the
``randn`` baseline.  SRE-regularized designs see only the training half
of the noise; scoring uses only the test half.

Set ``NO_PARALLEL=1`` to force sequential execution when debugging;
the harnesses are sequential already, so the flag is honored trivially.
"""

from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .coherence import (
    DEFAULT_MU_BAR,
    average_mutual_coherence,
    equivalent_dictionary,
    mutual_coherence,
    welch_bound,
)
from .matio import FLOAT_FMT
from .recovery import batch_recover, codes_to_matrix
from .solver import (
    DEFAULT_OUTER_ITERS,
    DesignResult,
    SolverConfig,
    alternating_design,
    design_lh,
    design_lh_etf,
    design_mt,
    random_projection,
)
from .streams import derive_seed
from .synth import SyntheticDataset, gen_dictionary, gen_signals, gen_sparse_codes

__all__ = [
    "METHODS",
    "RECORDS_HEADER",
    "LAMBDA_SEARCH_GRID",
    "ExperimentParams",
    "ExperimentRecord",
    "rho_mse",
    "rho_psnr",
    "make_dataset",
    "design_for_method",
    "evaluate_system",
    "run_convergence",
    "run_lambda_sweep",
    "run_snr_sweep",
    "run_dimension_sweeps",
    "write_records_csv",
    "write_convergence_csv",
]

logger = logging.getLogger(__name__)

#: method tags understood by the harnesses
METHODS = ("randn", "mt", "mt-etf", "lh", "lh-etf")

RECORDS_HEADER = (
    "method,param_name,param_value,seed,rho_mse,rho_psnr,mu,mu_av,"
    "phi_energy,proj_noise_energy,wall_time_ms"
)


@dataclass(frozen=True)
class ExperimentParams:
    """Fixed parameters of one experiment family."""

    m: int = 20
    n: int = 60
    l: int = 80
    k: int = 4
    p: int = 1000
    lam: float = 0.5
    xi: float | None = None  # None resolves to the Welch bound of (m, l)
    outer_iters: int = DEFAULT_OUTER_ITERS
    snr_db: float = 15.0
    mu_bar: float = DEFAULT_MU_BAR

    def resolved_xi(self) -> float:
        return welch_bound(self.m, self.l) if self.xi is None else float(self.xi)


@dataclass(frozen=True)
class ExperimentRecord:
    """One row of a sweep result."""

    method: str
    param_name: str
    param_value: float
    seed: int
    rho_mse: float
    rho_psnr: float
    mu: float
    mu_av: float
    phi_energy: float
    proj_noise_energy: float
    wall_time_ms: float = 0.0

    def as_csv_row(self) -> str:
        return ",".join(
            [
                self.method,
                self.param_name,
                FLOAT_FMT % self.param_value,
                str(self.seed),
                FLOAT_FMT % self.rho_mse,
                FLOAT_FMT % self.rho_psnr,
                FLOAT_FMT % self.mu,
                FLOAT_FMT % self.mu_av,
                FLOAT_FMT % self.phi_energy,
                FLOAT_FMT % self.proj_noise_energy,
                FLOAT_FMT % self.wall_time_ms,
            ]
        )


def rho_mse(x, x_hat) -> float:
    """Mean squared reconstruction error per entry."""
    x = np.asarray(x, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x.shape != x_hat.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_hat.shape}")
    diff = x_hat - x
    return float(np.sum(diff * diff) / x.size)


def rho_psnr(mse: float, r: int = 8) -> float:
    """Peak signal-to-noise ratio in dB at `r` bits per pixel.

    Nonpositive `mse` reports +inf (perfect reconstruction) rather than
    raising.
    """
    if mse <= 0.0:
        return math.inf
    peak = (2.0**r - 1.0) ** 2
    return 10.0 * math.log10(peak / mse)


def make_dataset(
    params: ExperimentParams, seed: int, psi: np.ndarray | None = None
) -> SyntheticDataset:
    """Dictionary, codes, and noisy signals for one sweep point.

    Passing `psi` keeps an existing dictionary and redraws only the
    codes and noise (used by sweeps that vary the condition, not the
    CS system).
    """
    if psi is None:
        psi = gen_dictionary(params.n, params.l, seed)
    theta = gen_sparse_codes(params.l, params.k, 2 * params.p, seed)
    return gen_signals(psi, theta, params.snr_db, seed)


def design_for_method(
    method: str,
    params: ExperimentParams,
    psi: np.ndarray,
    phi0: np.ndarray,
    lam: float,
    sre: np.ndarray | None = None,
    cfg: SolverConfig | None = None,
) -> DesignResult:
    """Produce the projection matrix of `method` from the shared start `phi0`."""
    cfg = cfg or SolverConfig()
    if method == "randn":
        return DesignResult(phi=phi0, trace=(), method="randn", config=cfg, converged=True)
    if method == "mt":
        return design_mt(psi, lam, phi0, cfg)
    if method == "mt-etf":
        return alternating_design(psi, lam, params.resolved_xi(), params.outer_iters, phi0, cfg)
    if method == "lh":
        if sre is None:
            raise ValueError("method 'lh' needs the training SRE matrix")
        return design_lh(psi, lam, sre, phi0, cfg)
    if method == "lh-etf":
        if sre is None:
            raise ValueError("method 'lh-etf' needs the training SRE matrix")
        return design_lh_etf(psi, lam, sre, params.resolved_xi(), params.outer_iters, phi0, cfg)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def evaluate_system(
    phi: np.ndarray,
    dataset: SyntheticDataset,
    k: int,
    method: str,
    param_name: str,
    param_value: float,
    seed: int,
    wall_time_ms: float = 0.0,
    mu_bar: float = DEFAULT_MU_BAR,
) -> ExperimentRecord:
    """Score one CS system on the test half of `dataset`."""
    d = equivalent_dictionary(phi, dataset.psi)
    x_test = dataset.test_signals()
    y = phi @ x_test
    codes = batch_recover(d, y, k)
    x_hat = dataset.psi @ codes_to_matrix(codes)
    mse = rho_mse(x_test, x_hat)
    mu_av, _ = average_mutual_coherence(d, mu_bar)
    test_noise = phi @ dataset.test_sre()
    return ExperimentRecord(
        method=method,
        param_name=param_name,
        param_value=float(param_value),
        seed=int(seed),
        rho_mse=mse,
        rho_psnr=rho_psnr(mse),
        mu=mutual_coherence(d),
        mu_av=mu_av,
        phi_energy=float(np.sum(phi * phi)),
        proj_noise_energy=float(np.sum(test_noise * test_noise)),
        wall_time_ms=wall_time_ms,
    )


def _seed_list(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def _timed_design(method, params, psi, phi0, lam, sre, cfg, timing):
    start = time.perf_counter() if timing else 0.0
    result = design_for_method(method, params, psi, phi0, lam, sre=sre, cfg=cfg)
    elapsed_ms = (time.perf_counter() - start) * 1e3 if timing else 0.0
    return result, elapsed_ms


def run_convergence(
    params: ExperimentParams,
    lambdas: Sequence[float],
    seed: int,
    max_iterations: int = 300,
) -> list[tuple[float, int, float]]:
    """Objective traces of the identity-target design, one per lambda.

    All traces start from the same random matrix.  Returns rows
    ``(lambda, iteration, f)``.
    """
    psi = gen_dictionary(params.n, params.l, seed)
    phi0 = random_projection(params.m, params.n, derive_seed(seed, "phi0"))
    cfg = SolverConfig(max_cg_iterations=max_iterations)
    rows: list[tuple[float, int, float]] = []
    for lam in lambdas:
        result = design_mt(psi, float(lam), phi0, cfg)
        rows.extend((float(lam), point.cg_iter, point.f) for point in result.trace)
    return rows


def run_lambda_sweep(
    params: ExperimentParams,
    lambda_grid: Sequence[float],
    seed,
    methods: Sequence[str] = ("mt", "mt-etf"),
    cfg: SolverConfig | None = None,
    timing: bool = False,
) -> list[ExperimentRecord]:
    """Reconstruction error of the training-free designs across lambdas.

    One dataset and one starting matrix per seed, shared by every grid
    point, so the lambda axis is the only thing that varies.
    """
    records: list[ExperimentRecord] = []
    for s in _seed_list(seed):
        dataset = make_dataset(params, s)
        phi0 = random_projection(params.m, params.n, derive_seed(s, "phi0"))
        sre = dataset.train_sre()
        for lam in lambda_grid:
            for method in methods:
                result, elapsed = _timed_design(
                    method, params, dataset.psi, phi0, float(lam), sre, cfg, timing
                )
                records.append(
                    evaluate_system(
                        result.phi,
                        dataset,
                        params.k,
                        method,
                        "lambda",
                        float(lam),
                        s,
                        wall_time_ms=elapsed,
                        mu_bar=params.mu_bar,
                    )
                )
    return records


#: default candidates for the per-setting trade-off search, log-spaced in (0, 1]
LAMBDA_SEARCH_GRID = (0.003, 0.01, 0.03, 0.1, 0.3, 1.0)


def run_snr_sweep(
    params: ExperimentParams,
    snr_grid: Sequence[float],
    methods: Sequence[str],
    seed,
    lambda_grid: Sequence[float] | None = LAMBDA_SEARCH_GRID,
    cfg: SolverConfig | None = None,
    timing: bool = False,
    pair_lambdas: bool = False,
) -> list[ExperimentRecord]:
    """Reconstruction error of several CS systems across noise levels.

    The dictionary and the random starting matrix are drawn once per
    seed; every (snr, seed) condition redraws the codes and the noise.
    All methods at one condition share the dataset and the start, and
    the SRE-regularized designs see only the training half of the noise.

    Each designed method picks its trade-off weight from `lambda_grid`
    (values on the method's own scale), keeping the candidate whose
    seed-averaged test error is lowest at that condition: one weight
    per (method, condition), not per seed.  Pass ``lambda_grid=None``
    to skip the search and use ``params.lam`` everywhere.

    With ``pair_lambdas=True`` no search happens at all: at each
    condition both families run at one matched effective strength
    ``w = min(1, params.lam * sigma^2 * P)``, with the SRE designs at
    the native weight ``w / (sigma^2 * P)`` and the training-free
    designs at ``w`` itself, which the projected-noise law makes
    equivalent in expectation.  Matched strength is the sharpest way to compare the
    families: the paired designs differ only by the sampling
    fluctuation of the training residuals, so their error ratio is not
    drowned by selection noise.  The cap at 1 keeps the weight inside
    the recommended (0, 1] range when the noise is strong.
    """
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    seeds = _seed_list(seed)
    systems = {
        s: (
            gen_dictionary(params.n, params.l, s),
            random_projection(params.m, params.n, derive_seed(s, "phi0")),
        )
        for s in seeds
    }
    records: list[ExperimentRecord] = []
    for snr in snr_grid:
        point_params = replace(params, snr_db=float(snr))
        datasets = {}
        for s in seeds:
            psi, _ = systems[s]
            point_seed = derive_seed(s, f"snr={FLOAT_FMT % float(snr)}")
            datasets[s] = make_dataset(point_params, point_seed, psi=psi)
        for method in methods:
            if method == "randn" or pair_lambdas or lambda_grid is None:
                candidates = (params.lam,)
            else:
                candidates = tuple(float(lam) for lam in lambda_grid)
            best: list[ExperimentRecord] | None = None
            best_avg = math.inf
            for lam in candidates:
                rows = []
                for s in seeds:
                    psi, phi0 = systems[s]
                    dataset = datasets[s]
                    run_lam = float(lam)
                    if pair_lambdas and method != "randn":
                        scale = dataset.sigma**2 * dataset.p
                        effective = min(1.0, run_lam * scale) if scale > 0 else run_lam
                        run_lam = effective if method in ("mt", "mt-etf") else effective / scale
                    result, elapsed = _timed_design(
                        method, point_params, psi, phi0, run_lam,
                        dataset.train_sre(), cfg, timing,
                    )
                    rows.append(
                        evaluate_system(
                            result.phi,
                            dataset,
                            params.k,
                            method,
                            "snr",
                            float(snr),
                            s,
                            wall_time_ms=elapsed,
                            mu_bar=params.mu_bar,
                        )
                    )
                avg = float(np.mean([r.rho_mse for r in rows]))
                if avg < best_avg:
                    best, best_avg = rows, avg
            records.extend(best)
    return records


def run_dimension_sweeps(
    base_params: ExperimentParams,
    axis: str,
    grid: Sequence[int],
    seed,
    methods: Sequence[str] = ("randn", "mt"),
    cfg: SolverConfig | None = None,
    timing: bool = False,
) -> list[ExperimentRecord]:
    """Sweep one of the size parameters M, K, or L, holding the rest fixed.

    Grid points that break the feasibility chain ``K <= M <= N <= L``
    are skipped with a logged reason.
    """
    axis = axis.lower()
    if axis not in ("m", "k", "l"):
        raise ValueError(f"axis must be one of m, k, l; got {axis!r}")
    records: list[ExperimentRecord] = []
    for s in _seed_list(seed):
        for value in grid:
            point_params = replace(base_params, **{axis: int(value)})
            if not (
                1
                <= point_params.k
                <= point_params.m
                <= point_params.n
                <= point_params.l
            ):
                logger.warning(
                    "skipping infeasible point %s=%d (need K <= M <= N <= L, have "
                    "K=%d M=%d N=%d L=%d)",
                    axis,
                    value,
                    point_params.k,
                    point_params.m,
                    point_params.n,
                    point_params.l,
                )
                continue
            point_seed = derive_seed(s, f"{axis}={int(value)}")
            dataset = make_dataset(point_params, point_seed)
            phi0 = random_projection(
                point_params.m, point_params.n, derive_seed(point_seed, "phi0")
            )
            sre = dataset.train_sre()
            for method in methods:
                result, elapsed = _timed_design(
                    method, point_params, dataset.psi, phi0, point_params.lam, sre, cfg, timing
                )
                records.append(
                    evaluate_system(
                        result.phi,
                        dataset,
                        point_params.k,
                        method,
                        axis,
                        float(value),
                        s,
                        wall_time_ms=elapsed,
                        mu_bar=point_params.mu_bar,
                    )
                )
    return records


def write_records_csv(records: Iterable[ExperimentRecord], path: str | os.PathLike) -> None:
    """Write experiment records under the fixed schema header."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(RECORDS_HEADER + "\n")
        for record in records:
            fh.write(record.as_csv_row() + "\n")


def write_convergence_csv(rows: Iterable[tuple[float, int, float]], path) -> None:
    """Write convergence-trace rows as CSV (lambda,iteration,f)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("lambda,iteration,f\n")
        for lam, iteration, f in rows:
            fh.write(f"{FLOAT_FMT % lam},{iteration},{FLOAT_FMT % f}\n")
