"""Simulation, train/test benchmarking and Monte Carlo rate experiments.

Random streams
--------------
Every draw comes from a PCG64 generator seeded by
``SeedSequence(seed, spawn_key=key)``:

* ``key = (0,)`` responses generated once for an external curve set;
* ``key = (1, replicate)`` everything drawn inside one benchmark replicate;
* ``key = (2, n_index, replicate)`` one replicate of a rate experiment at ``n_values[n_index]``;
* ``key = (3, replicate)`` one replicate of the CLT experiment;
* ``key = (4,)`` the ``simulate`` command of the CLI.

Replicates therefore do not depend on each other or on execution order.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from ._linear import predict_rows
from .aplsfit import build_h_hat, fit_apls_ortho, fit_apls_qr, fit_apls_raw
from .covest import empirical_covariance, krylov_sequence
from .errors import FunplsError, GridMismatchError, SpecError
from .funcore import Curve, Dataset, Grid
from .oracle import SpectralModel, population_hankel, population_krylov
from .pcareg import eigendecompose, fit_pca
from .plsclassic import fit_classic

__all__ = [
    "METHODS",
    "CASES",
    "SimulationSpec",
    "BenchRecord",
    "RateTable",
    "CltSummary",
    "make_rng",
    "case_coefficients",
    "simulate_curves",
    "simulate_curve_matrix",
    "generate_responses",
    "sigma_from_signal",
    "compute_pe",
    "compute_ise",
    "compute_pe_hat",
    "run_benchmark",
    "split_indices",
    "loglog_slope",
    "records_to_csv",
    "summarize",
    "summary_to_csv",
    "rate_experiment",
    "clt_experiment",
]

METHODS: dict[str, Callable] = {
    "apls_raw": lambda data, p: fit_apls_raw(data, p)[0],
    "apls_qr": fit_apls_qr,
    "apls_ortho": fit_apls_ortho,
    "classic": fit_classic,
    "pca": fit_pca,
}

# index ranges (1-based, inclusive) of the alternating +-1 slope coefficients
CASES = {"i": (1, 5), "ii": (6, 10), "iii": (11, 15), "iv": (16, 20)}


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _as_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else make_rng(int(seed))


def case_coefficients(case: str, n_components: int = 20) -> NDArray[np.float64]:
    """``a_j = (-1)^j`` on the case's index block, zero elsewhere, for ``j = 1..n_components``."""
    try:
        lo, hi = CASES[case]
    except KeyError:
        raise SpecError(f"unknown case {case!r}; expected one of {sorted(CASES)}") from None
    if n_components < hi:
        raise SpecError(f"case {case} needs at least {hi} components, have {n_components}")
    j = np.arange(1, n_components + 1)
    return np.where((j >= lo) & (j <= hi), (-1.0) ** j, 0.0)


def _curve_matrix(curves, grid: Grid) -> NDArray[np.float64]:
    if isinstance(curves, np.ndarray):
        X = np.asarray(curves, dtype=float)
    else:
        for c in curves:
            if not c.grid.matches(grid):
                raise GridMismatchError("curves are not on the model grid")
        X = np.stack([c.values for c in curves])
    if X.ndim != 2 or X.shape[1] != grid.size:
        raise GridMismatchError(f"curves have shape {X.shape}, grid has {grid.size} points")
    return X


def simulate_curve_matrix(model: SpectralModel, n: int, seed) -> NDArray[np.float64]:
    """Karhunen-Loeve draws ``mean + sum_k sqrt(theta_k) xi_ik phi_k`` as an ``(n, m)`` array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xi = _as_rng(seed).standard_normal((n, model.rank))
    return model.mean_curve.values + (xi * np.sqrt(model.eigenvalues)) @ model.eigenfunctions


def simulate_curves(model: SpectralModel, n: int, seed) -> list[Curve]:
    return [Curve(model.grid, row) for row in simulate_curve_matrix(model, n, seed)]


def _signal(X: np.ndarray, model: SpectralModel) -> np.ndarray:
    return model.intercept + X @ (model.grid.weights * model.slope.values)


def generate_responses(curves, model: SpectralModel, seed) -> Dataset:
    """``Y_i = a + int b X_i + eps_i`` with ``eps_i ~ N(0, noise_sd^2)``."""
    X = _curve_matrix(curves, model.grid)
    eps = _as_rng(seed).standard_normal(X.shape[0]) * model.noise_sd
    return Dataset(model.grid, X, _signal(X, model) + eps)


def sigma_from_signal(curves, b: Curve) -> float:
    """Noise level with ``5 sigma^2`` equal to the sample variance (divisor ``N - 1``) of ``int b X_i``."""
    X = _curve_matrix(curves, b.grid)
    if X.shape[0] < 2:
        raise ValueError("need at least two curves")
    s = X @ (b.grid.weights * b.values)
    return float(np.sqrt(np.var(s, ddof=1) / 5))


def _nonempty(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        raise ValueError(f"{name}: empty test set")
    return a


def compute_pe(predictions: ArrayLike, signal: ArrayLike) -> float:
    """Mean squared error against the noiseless signal ``a + int b X_i``."""
    pred = _nonempty(predictions, "PE")
    return float(np.mean((pred - np.asarray(signal, dtype=float)) ** 2))


def compute_pe_hat(predictions: ArrayLike, responses: ArrayLike) -> float:
    """Mean squared error against observed responses."""
    pred = _nonempty(predictions, "PE_hat")
    return float(np.mean((pred - np.asarray(responses, dtype=float)) ** 2))


def compute_ise(b_hat: Curve, b: Curve) -> float:
    """``int (b_hat - b)^2``."""
    d = b_hat - b
    return float(np.sum(d.grid.weights * d.values**2))


@dataclass(frozen=True, eq=False)
class SimulationSpec:
    """One benchmark configuration.

    Exactly one of ``model`` (simulate fresh curves per replicate) or ``curves``
    (an external ``(N, m)`` curve set, split at random per replicate) is given.
    With external curves and ``responses`` the true slope is unknown and only
    ``pe_hat`` is reported; otherwise responses are generated from a slope built
    on ``case``. ``noise_sd=None`` applies the rule that five times the noise
    variance equals the sample variance of the signal.
    """

    model: SpectralModel | None = None
    curves: NDArray[np.float64] | None = None
    grid: Grid | None = None
    responses: NDArray[np.float64] | None = None
    case: str = "custom"
    n_train: int = 30
    n_test: int = 200
    replicates: int = 1
    seed: int = 0
    p_range: tuple[int, int] = (1, 1)
    methods: tuple[str, ...] = ("apls_ortho", "pca")
    noise_sd: float | None = None
    n_components: int = 20

    def __post_init__(self):
        object.__setattr__(self, "p_range", tuple(int(v) for v in self.p_range))
        object.__setattr__(self, "methods", tuple(self.methods))
        if (self.model is None) == (self.curves is None):
            raise SpecError("give exactly one of a spectral model or an external curve set")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise SpecError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        lo, hi = self.p_range
        if lo < 1 or hi < lo:
            raise SpecError(f"invalid p_range {self.p_range}")
        if self.replicates < 1:
            raise SpecError("replicates must be >= 1")
        if self.n_train < 2:
            raise SpecError("n_train must be >= 2")
        if self.noise_sd is not None and self.noise_sd < 0:
            raise SpecError("noise_sd must be nonnegative")
        if self.case != "custom":
            case_coefficients(self.case, self.n_components)
        if self.curves is not None:
            curves = np.array(self.curves, dtype=float)
            curves.setflags(write=False)
            object.__setattr__(self, "curves", curves)
            if self.grid is None or curves.ndim != 2 or curves.shape[1] != self.grid.size:
                raise SpecError("external curves need a grid of matching size")
            if self.n_train >= curves.shape[0]:
                raise SpecError(f"n_train={self.n_train} leaves no test curves out of {curves.shape[0]}")
            if self.responses is None and self.case == "custom":
                raise SpecError("external curves without responses need a case pattern (i-iv)")
            if self.responses is not None and np.asarray(self.responses).size != curves.shape[0]:
                raise SpecError("responses and curves differ in length")
        else:
            if self.n_test < 1:
                raise SpecError("n_test must be >= 1")
            if self.case != "custom" and self.model.rank < CASES[self.case][1]:
                raise SpecError(f"case {self.case} needs a model of rank >= {CASES[self.case][1]}")

    @property
    def p_values(self) -> range:
        return range(self.p_range[0], self.p_range[1] + 1)


@dataclass(frozen=True)
class BenchRecord:
    method: str
    p: int
    replicate: int
    pe: float | None
    ise: float | None
    pe_hat: float | None
    error: str | None = None


def _case_model(spec: SimulationSpec) -> SpectralModel:
    model = spec.model
    if spec.case != "custom":
        a = case_coefficients(spec.case, spec.n_components)
        coef = np.zeros(model.rank)
        coef[: a.size] = a[: model.rank]
        model = model.with_slope(coef)
    return model


def _external_slope(spec: SimulationSpec) -> Curve:
    """Slope built from the case pattern on the empirical eigenfunctions of all curves."""
    data = Dataset(spec.grid, spec.curves, np.zeros(spec.curves.shape[0]))
    system = eigendecompose(empirical_covariance(data), spec.n_components)
    a = case_coefficients(spec.case, spec.n_components)
    Phi = np.stack([f.values for f in system.eigenfunctions])
    return Curve(spec.grid, a @ Phi)


def _fit_and_score(method, p, replicate, train, X_test, target, b_true) -> BenchRecord:
    try:
        model = METHODS[method](train, p)
    except (FunplsError, np.linalg.LinAlgError) as exc:
        return BenchRecord(method, p, replicate, None, None, None, type(exc).__name__)
    pred = predict_rows(model, X_test)
    if b_true is None:
        return BenchRecord(method, p, replicate, None, None, compute_pe_hat(pred, target))
    return BenchRecord(method, p, replicate, compute_pe(pred, target), compute_ise(model.slope, b_true), None)


def _sweep(spec, replicate, train, X_test, target, b_true) -> list[BenchRecord]:
    order = [m for m in METHODS if m in spec.methods]
    return [
        _fit_and_score(method, p, replicate, train, X_test, target, b_true)
        for method in order
        for p in spec.p_values
    ]


def _simulated_replicate(spec: SimulationSpec, model: SpectralModel, replicate: int):
    rng = make_rng(spec.seed, 1, replicate)
    N = spec.n_train + spec.n_test
    X = simulate_curve_matrix(model, N, rng)
    sigma = sigma_from_signal(X, model.slope) if spec.noise_sd is None else spec.noise_sd
    data = generate_responses(X, model.with_noise(sigma), rng)
    signal = _signal(X, model)
    train = data.subset(np.arange(spec.n_train))
    return _sweep(spec, replicate, train, X[spec.n_train :], signal[spec.n_train :], model.slope)


def split_indices(n_total: int, n_train: int, rng: np.random.Generator):
    """Uniform random split without replacement into train and test index sets."""
    perm = rng.permutation(n_total)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def _external_replicate(spec: SimulationSpec, data: Dataset, target, b_true, replicate: int):
    rng = make_rng(spec.seed, 1, replicate)
    train_idx, test_idx = split_indices(data.n, spec.n_train, rng)
    return _sweep(spec, replicate, data.subset(train_idx), data.X[test_idx], target[test_idx], b_true)


def _map(func, items: Sequence, threads: int) -> list:
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def run_benchmark(spec: SimulationSpec, threads: int = 0) -> list[BenchRecord]:
    """Fit every method at every ``p`` on each replicate and score it on held-out data.

    Records are ordered by ``(replicate, method, p)`` whatever ``threads`` is;
    fit failures become records with ``error`` set instead of aborting the sweep.
    """
    replicates = range(spec.replicates)
    if spec.model is not None:
        model = _case_model(spec)
        batches = _map(lambda r: _simulated_replicate(spec, model, r), replicates, threads)
    else:
        if spec.responses is not None:
            data = Dataset(spec.grid, spec.curves, spec.responses)
            target, b_true = data.y, None
        else:
            b_true = _external_slope(spec)
            signal = spec.curves @ (spec.grid.weights * b_true.values)
            if spec.noise_sd is None:
                sigma = sigma_from_signal(spec.curves, b_true)
            else:
                sigma = spec.noise_sd
            eps = make_rng(spec.seed, 0).standard_normal(signal.size) * sigma
            data = Dataset(spec.grid, spec.curves, signal + eps)
            target = signal
        batches = _map(lambda r: _external_replicate(spec, data, target, b_true, r), replicates, threads)
    return [rec for batch in batches for rec in batch]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


BENCH_HEADER = ("method", "p", "replicate", "pe", "ise", "pe_hat", "error")


def records_to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    for r in records:
        writer.writerow([_fmt(getattr(r, k)) for k in BENCH_HEADER])
    return buf.getvalue()


SUMMARY_HEADER = ("method", "p", "metric", "count", "failed", "min", "q1", "median", "q3", "max")


def summarize(records: Sequence[BenchRecord]) -> list[tuple]:
    """Per ``(method, p, metric)``: count, failures and the five numbers a boxplot draws."""
    groups: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.p), []).append(r)
    method_rank = {m: i for i, m in enumerate(METHODS)}
    rows = []
    for (method, p) in sorted(groups, key=lambda k: (method_rank[k[0]], k[1])):
        recs = groups[(method, p)]
        failed = sum(r.error is not None for r in recs)
        for metric in ("pe", "ise", "pe_hat"):
            vals = np.array([getattr(r, metric) for r in recs if getattr(r, metric) is not None])
            if vals.size == 0:
                continue
            q = np.percentile(vals, [0, 25, 50, 75, 100])
            rows.append((method, p, metric, int(vals.size), failed, *map(float, q)))
    return rows


def summary_to_csv(rows: Sequence[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def loglog_slope(n_values: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log error`` against ``log n``."""
    return float(np.polyfit(np.log(np.asarray(n_values, float)), np.log(np.asarray(errors, float)), 1)[0])


@dataclass(frozen=True, eq=False)
class RateTable:
    """Median errors per ``(n, j)`` and fitted log-log slopes.

    ``krylov_err[a, b]`` is the median of ``||Khat^j(b) - K^j(b)||`` at
    ``n_values[a]``, ``j_values[b]``; ``h_err[a, b]`` the median of
    ``max_k |hhat_jk - h_jk|`` over ``k <= max(j_values)``; ``h_max[a]`` the
    median of the maximum over all ``j, k <= max(j_values)``.
    """

    n_values: tuple[int, ...]
    j_values: tuple[int, ...]
    krylov_err: NDArray[np.float64]
    h_err: NDArray[np.float64]
    h_max: NDArray[np.float64]
    krylov_slopes: dict = field(init=False)
    h_slopes: dict = field(init=False)
    h_max_slope: float = field(init=False)

    def __post_init__(self):
        ks = {j: loglog_slope(self.n_values, self.krylov_err[:, b]) for b, j in enumerate(self.j_values)}
        hs = {j: loglog_slope(self.n_values, self.h_err[:, b]) for b, j in enumerate(self.j_values)}
        object.__setattr__(self, "krylov_slopes", ks)
        object.__setattr__(self, "h_slopes", hs)
        object.__setattr__(self, "h_max_slope", loglog_slope(self.n_values, self.h_max))

    def rows(self) -> list[tuple]:
        return [
            (n, j, float(self.krylov_err[a, b]), float(self.h_err[a, b]), self.krylov_slopes[j])
            for a, n in enumerate(self.n_values)
            for b, j in enumerate(self.j_values)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("n", "j", "median_err", "h_err", "slope"))
        for row in self.rows():
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _rate_replicate(model, n, seed_key, J, truth_terms, H):
    rng = make_rng(*seed_key)
    data = generate_responses(simulate_curve_matrix(model, n, rng), model, rng)
    seq = krylov_sequence(data, J + 1)
    w = model.grid.weights
    kry = np.array([np.sqrt(np.sum(w * (seq.term(j).values - truth_terms[j - 1]) ** 2)) for j in range(1, J + 1)])
    dH = np.abs(build_h_hat(seq, J).h_matrix - H)
    return kry, dH


def rate_experiment(
    model: SpectralModel,
    n_values: Sequence[int],
    j_values: Sequence[int],
    replicates: int,
    seed: int,
    threads: int = 0,
) -> RateTable:
    """Monte Carlo medians of Krylov-term and ``Hhat`` errors across sample sizes.

    The model must have covariance Hilbert-Schmidt norm below one; use
    :meth:`SpectralModel.rescaled` to get there.
    """
    n_values = tuple(int(n) for n in n_values)
    j_values = tuple(int(j) for j in j_values)
    if model.hs_norm() >= 1:
        raise SpecError(f"covariance norm {model.hs_norm():.3f} must be < 1; rescale the model")
    if any(b <= a for a, b in zip(n_values, n_values[1:])) or len(n_values) < 2:
        raise SpecError("n_values must be increasing with at least two entries")
    if not j_values or min(j_values) < 1 or replicates < 1:
        raise SpecError("need j_values >= 1 and replicates >= 1")
    J = max(j_values)
    truth = np.stack([c.values for c in population_krylov(model, J)])
    H, _ = population_hankel(model, J)
    kry_med = np.empty((len(n_values), len(j_values)))
    h_med = np.empty_like(kry_med)
    h_max = np.empty(len(n_values))
    idx = np.array(j_values) - 1
    for a, n in enumerate(n_values):
        results = _map(
            lambda r: _rate_replicate(model, n, (seed, 2, a, r), J, truth, H), range(replicates), threads
        )
        kry = np.stack([k for k, _ in results])
        dH = np.stack([d for _, d in results])
        kry_med[a] = np.median(kry[:, idx], axis=0)
        h_med[a] = np.median(dH.max(axis=2)[:, idx], axis=0)
        h_max[a] = np.median(dH.max(axis=(1, 2)))
    return RateTable(n_values, j_values, kry_med, h_med, h_max)


@dataclass(frozen=True)
class CltSummary:
    n: int
    replicates: int
    mean: float
    sd: float
    skewness: float
    excess_kurtosis: float


def clt_experiment(model: SpectralModel, n: int, replicates: int, seed: int, threads: int = 0) -> CltSummary:
    """Distribution of ``sqrt(n) (hhat_11 - h_11)`` over independent replicates."""
    H, _ = population_hankel(model, 1)

    def one(r):
        rng = make_rng(seed, 3, r)
        data = generate_responses(simulate_curve_matrix(model, n, rng), model, rng)
        return build_h_hat(krylov_sequence(data, 2), 1).h_matrix[0, 0]

    z = math.sqrt(n) * (np.array(_map(one, range(replicates), threads)) - H[0, 0])
    return CltSummary(
        n,
        replicates,
        float(z.mean()),
        float(z.std(ddof=1)),
        float(stats.skew(z)),
        float(stats.kurtosis(z)),
    )
