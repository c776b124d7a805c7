import numpy as np
import pytest

from funpls import Curve, Dataset, GridMismatchError, SpecError, SpectralModel, uniform_grid
from funpls.metrics import rel_l2
from funpls.oracle import population_kernel
from funpls.covest import empirical_covariance
from funpls.simbench import (
    BENCH_HEADER,
    BenchRecord,
    SimulationSpec,
    case_coefficients,
    clt_experiment,
    compute_ise,
    compute_pe,
    compute_pe_hat,
    generate_responses,
    loglog_slope,
    make_rng,
    rate_experiment,
    records_to_csv,
    run_benchmark,
    sigma_from_signal,
    simulate_curve_matrix,
    simulate_curves,
    split_indices,
    summarize,
    summary_to_csv,
)

from conftest import make_model


def test_case_patterns():
    a = case_coefficients("i")
    np.testing.assert_array_equal(a[:6], [-1, 1, -1, 1, -1, 0])
    assert np.count_nonzero(a) == 5
    assert np.flatnonzero(case_coefficients("iv")).tolist() == list(range(15, 20))
    assert case_coefficients("ii")[5] == 1.0  # j = 6
    with pytest.raises(SpecError):
        case_coefficients("v")
    with pytest.raises(SpecError):
        case_coefficients("iv", 18)


def test_rng_streams_independent_and_reproducible():
    a = make_rng(7, 1, 0).standard_normal(3)
    assert np.array_equal(a, make_rng(7, 1, 0).standard_normal(3))
    assert not np.array_equal(a, make_rng(7, 1, 1).standard_normal(3))
    assert not np.array_equal(a, make_rng(8, 1, 0).standard_normal(3))


def test_generate_responses(model5):
    X = simulate_curve_matrix(model5, 20, 1)
    clean = generate_responses(X, model5, 2)
    np.testing.assert_array_equal(clean.y, X @ (model5.grid.weights * model5.slope.values))
    noisy = model5.with_noise(0.5)
    assert np.array_equal(generate_responses(X, noisy, 3).y, generate_responses(X, noisy, 3).y)
    with pytest.raises(GridMismatchError):
        generate_responses(np.ones((3, 7)), model5, 0)


def test_zero_slope_gives_pure_noise():
    model = make_model(r=3, m=16).with_slope([0, 0, 0]).with_noise(2.0)
    y = generate_responses(simulate_curve_matrix(model, 1000, 4), model, 5).y
    se = 4.0 * np.sqrt(2 / 999)
    assert abs(np.var(y, ddof=1) - 4.0) <= 3 * se


def test_sigma_rule(model5):
    X = simulate_curve_matrix(model5, 100, 0)
    s = [float(row @ (model5.grid.weights * model5.slope.values)) for row in X]
    mean = sum(s) / 100
    direct = np.sqrt(sum((v - mean) ** 2 for v in s) / 99 / 5)
    assert sigma_from_signal(X, model5.slope) == pytest.approx(direct, rel=1e-12)
    assert sigma_from_signal(X, -3 * model5.slope) == pytest.approx(3 * direct, rel=1e-12)
    flat = np.tile(X[0], (4, 1))
    assert sigma_from_signal(flat, model5.slope) == 0.0


def test_simulated_curves():
    g = uniform_grid(20)
    mean = Curve(g, np.linspace(1, 2, 20))
    r1 = SpectralModel.build(g, [0.5], [1.0], mean_curve=mean)
    for c in simulate_curves(r1, 5, 9):
        d = c.values - mean.values
        coef = d @ r1.eigenfunctions[0] / (r1.eigenfunctions[0] @ r1.eigenfunctions[0])
        np.testing.assert_allclose(d, coef * r1.eigenfunctions[0], atol=1e-13)
    assert np.array_equal(simulate_curve_matrix(r1, 4, 3), simulate_curve_matrix(r1, 4, 3))


def test_empirical_covariance_converges():
    model = make_model(r=5, m=48)
    X = simulate_curve_matrix(model, 2000, 6)
    K = empirical_covariance(Dataset(model.grid, X, np.zeros(2000)))
    assert rel_l2(K, population_kernel(model)) <= 0.1


def test_error_measures():
    assert compute_pe([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert compute_pe([1.0, 3.0], [1.0, 1.0]) == pytest.approx(2.0, rel=1e-15)
    assert compute_pe_hat([0.0, 1.0, 2.0], [1.0, 1.0, 1.0]) == pytest.approx(2 / 3, rel=1e-15)
    g = uniform_grid(11)
    b = Curve(g, g.points)
    assert compute_ise(b, b) == 0.0
    assert compute_ise(b + 1.0, b) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        compute_pe([], [])


def test_split_validity():
    rng = make_rng(3, 1, 0)
    tr, te = split_indices(50, 20, rng)
    assert len(tr) == 20 and len(te) == 30
    assert set(tr).isdisjoint(te) and set(tr) | set(te) == set(range(50))


def test_single_record():
    spec = SimulationSpec(model=make_model(), n_train=20, n_test=10, replicates=1, methods=("pca",))
    recs = run_benchmark(spec)
    assert len(recs) == 1
    assert recs[0].pe >= 0 and recs[0].ise >= 0 and recs[0].pe_hat is None


def test_reproducible_and_thread_independent():
    spec = SimulationSpec(model=make_model(r=6), n_train=25, n_test=15, replicates=4, seed=11,
                          p_range=(1, 3), methods=("apls_raw", "apls_ortho", "classic", "pca"))
    a = run_benchmark(spec)
    assert a == run_benchmark(spec) == run_benchmark(spec, threads=3)
    assert [(r.replicate, r.method, r.p) for r in a] == sorted(
        [(r.replicate, r.method, r.p) for r in a],
        key=lambda k: (k[0], ["apls_raw", "apls_ortho", "classic", "pca"].index(k[1]), k[2]),
    )


def test_fit_failures_are_recorded():
    spec = SimulationSpec(model=make_model(r=3, decay=0.2), n_train=20, n_test=5, replicates=1,
                          p_range=(3, 5), methods=("apls_qr", "pca"))
    recs = run_benchmark(spec)
    assert len(recs) == 6
    bad = [r for r in recs if r.error]
    assert bad and all(r.pe is None and r.ise is None for r in bad)
    assert {r.error for r in bad} <= {"RankError", "IllConditionedError"}


def test_external_curves_modes():
    model = make_model(r=25, m=40, decay=0.8)
    X = simulate_curve_matrix(model, 60, 1)
    y = X @ (model.grid.weights * model.slope.values)
    with_y = SimulationSpec(curves=X, grid=model.grid, responses=y, n_train=30, replicates=2, p_range=(1, 2))
    recs = run_benchmark(with_y)
    assert all(r.pe is None and r.ise is None and r.pe_hat >= 0 for r in recs)
    case = SimulationSpec(curves=X, grid=model.grid, case="ii", n_train=30, replicates=2, p_range=(1, 2))
    recs = run_benchmark(case)
    assert all(r.pe >= 0 and r.ise >= 0 and r.pe_hat is None for r in recs)
    assert recs == run_benchmark(case, threads=2)


def test_spec_validation():
    m = make_model(r=5)
    with pytest.raises(SpecError):
        SimulationSpec()
    with pytest.raises(SpecError):
        SimulationSpec(model=m, methods=("svm",))
    with pytest.raises(SpecError):
        SimulationSpec(model=m, p_range=(3, 2))
    with pytest.raises(SpecError):
        SimulationSpec(model=m, replicates=0)
    with pytest.raises(SpecError):
        SimulationSpec(model=m, case="ii")
    X = simulate_curve_matrix(m, 10, 0)
    with pytest.raises(SpecError):
        SimulationSpec(curves=X, grid=m.grid, responses=np.ones(10), n_train=10)
    with pytest.raises(SpecError):
        SimulationSpec(curves=X, grid=m.grid, n_train=5)


def test_csv_outputs():
    recs = [BenchRecord("pca", 1, 0, 0.5, 0.25, None), BenchRecord("pca", 2, 0, None, None, None, "RankError")]
    text = records_to_csv(recs)
    lines = text.splitlines()
    assert lines[0] == ",".join(BENCH_HEADER)
    assert lines[1] == "pca,1,0,0.5,0.25,,"
    assert lines[2] == "pca,2,0,,,,RankError"
    rows = summarize(recs + [BenchRecord("pca", 1, 1, 1.5, 0.75, None)])
    assert rows[0][:5] == ("pca", 1, "pe", 2, 0)
    assert rows[0][5:] == (0.5, 0.75, 1.0, 1.25, 1.5)
    assert summary_to_csv(rows).startswith("method,p,metric,count,failed,min,q1,median,q3,max\n")


def test_loglog_slope():
    n = [100, 400, 1600]
    assert loglog_slope(n, [1 / np.sqrt(v) for v in n]) == pytest.approx(-0.5, abs=1e-12)


def test_rate_experiment_small():
    model = make_model(r=3, m=32, decay=0.5)
    model = model.rescaled(np.sqrt(0.9 / model.hs_norm()))
    table = rate_experiment(model, [100, 400, 1600], [1, 2], replicates=30, seed=1)
    assert table.krylov_err.shape == (3, 2)
    assert np.all(np.diff(table.krylov_err, axis=0) < 0)
    assert np.all(np.diff(table.h_err, axis=0) < 0)
    csv_text = table.to_csv()
    assert csv_text.splitlines()[0] == "n,j,median_err,h_err,slope"
    assert len(csv_text.splitlines()) == 7
    assert csv_text == rate_experiment(model, [100, 400, 1600], [1, 2], 30, 1, threads=4).to_csv()
    with pytest.raises(SpecError):
        rate_experiment(make_model(r=3, scale=2.0), [10, 20], [1], 2, 0)
    with pytest.raises(SpecError):
        rate_experiment(model, [20, 10], [1], 2, 0)


def test_krylov_error_halves_when_n_quadruples():
    model = make_model(r=4, m=32, decay=0.6)
    model = model.rescaled(np.sqrt(0.9 / model.hs_norm())).with_noise(0.3)
    table = rate_experiment(model, [200, 800], [1, 2, 3], replicates=100, seed=4)
    ratio = table.krylov_err[1] / table.krylov_err[0]
    assert np.all(np.abs(ratio - 0.5) <= 0.35 * 0.5)


def test_clt_summary_fields():
    model = make_model(r=3, m=24, decay=0.5)
    model = model.rescaled(np.sqrt(0.9 / model.hs_norm())).with_noise(0.2)
    s = clt_experiment(model, 100, 40, seed=2)
    assert s.n == 100 and s.replicates == 40 and s.sd > 0
    assert s == clt_experiment(model, 100, 40, seed=2, threads=3)
