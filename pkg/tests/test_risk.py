import sys
import os

import numpy as np
import pytest

# Add src directory to sys.path to allow importing qae_lab
# This assumes tests are run from the project root
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from qae_lab.distributions import (
    NormalSpec,
    PointSpec,
    UniformSpec,
    WeibullSpec,
    classical_stats,
    continuous_reference,
    discretize,
)
from qae_lab.estimators import EstimatorConfig
from qae_lab.risk import (
    LEVEL_AMBIGUOUS,
    estimate_cvar,
    estimate_mean,
    estimate_statistic,
    estimate_var,
    estimate_with_cmc,
)

RISK_SPECS = [
    NormalSpec(mu=0.1, sigma=0.01),
    NormalSpec(mu=0.1, sigma=0.05),
    WeibullSpec(beta=1.8),
    UniformSpec(a=0.0, b=1.0),
]


@pytest.fixture
def uniform():
    return discretize(UniformSpec())


@pytest.mark.parametrize("spec", RISK_SPECS + [PointSpec(value=2.5)], ids=lambda s: s.label)
def test_exact_estimator_reproduces_classical_statistics(spec):
    """Tests that noiseless amplitudes give back the brute-force mean, VaR and CVaR."""
    dd = discretize(spec)
    stats = classical_stats(dd)
    mean = estimate_mean(dd, "exact", spec=spec)
    var = estimate_var(dd, 0.95, "exact", spec=spec)
    cvar = estimate_cvar(dd, 0.95, "exact", spec=spec)
    assert mean.estimate == pytest.approx(stats.mean, abs=1e-9)
    assert var.estimate == stats.var(0.95)
    assert var.achieved_level == pytest.approx(stats.achieved_level(0.95), abs=1e-9)
    assert cvar.estimate == pytest.approx(stats.cvar(0.95), abs=1e-9)
    assert mean.classical_reference == stats.mean
    assert var.continuous_reference is not None


def test_uniform_var_with_iqae(uniform):
    """Tests that the level is only reached at the structural last grid point."""
    report = estimate_var(uniform, 0.95, "iqae", EstimatorConfig(epsilon=1e-2, shots=100), seed=3)
    assert report.estimate == 0.9375
    assert report.var_index == 15
    assert report.achieved_level == 1.0
    assert report.continuous_at_achieved is None
    assert report.probes[-1].index == 15
    assert report.probes[-1].ci == (1.0, 1.0)
    # probes 7, 11, 13, 14 are sampled; the last index is not
    assert len(report.results) == 4


def test_var_probes_follow_bisection(uniform):
    report = estimate_var(uniform, 0.45, "exact")
    assert [p.index for p in report.probes] == [3, 5, 6, 7]
    assert report.var_index == 7
    assert report.achieved_level == pytest.approx(0.5)


def test_var_is_monotone_in_level():
    dd = discretize(NormalSpec(mu=0.1, sigma=0.05))
    values = [estimate_var(dd, level, "exact").estimate for level in (0.1, 0.5, 0.9, 0.95, 0.99)]
    assert values == sorted(values)


def test_high_level_falls_back_to_last_grid_point():
    dd = discretize(NormalSpec(mu=0.1, sigma=0.01))
    report = estimate_var(dd, 0.999, "exact")
    assert report.var_index == 15
    assert report.achieved_level == 1.0


def test_ambiguous_level_is_flagged():
    """Tests the flag raised when an interval at the decision index contains the level."""
    dd = discretize(NormalSpec(mu=0.1, sigma=0.01))
    level = float(classical_stats(dd).cdf[10])
    cfg = EstimatorConfig(epsilon=0.05, shots=100)
    report = estimate_var(dd, level, "iqae", cfg, seed=5)
    assert LEVEL_AMBIGUOUS in report.flags
    assert len(report.candidates) > 1
    assert report.ci[0] <= report.estimate <= report.ci[1]


def test_point_mass_is_exact_for_every_estimator():
    dd = discretize(PointSpec(value=2.5))
    configs = {
        "exact": EstimatorConfig(),
        "mlae": EstimatorConfig(shots=100, max_iter=3),
        "fae": EstimatorConfig(max_iter=3),
    }
    for estimator, cfg in configs.items():
        for statistic in ("mean", "var", "cvar"):
            report = estimate_statistic(statistic, dd, estimator, cfg, seed=1)
            assert report.estimate == pytest.approx(2.5, abs=1e-12), (estimator, statistic)


def test_mean_with_sampling_estimator(uniform):
    report = estimate_mean(uniform, "mlae", EstimatorConfig(shots=100, max_iter=4), seed=21)
    assert report.estimate == pytest.approx(0.46875, abs=0.02)
    assert report.grover_applications == 100 * (1 + 2 + 4 + 8)
    assert report.results[0].algorithm == "mlae"


def test_statistic_is_reproducible():
    dd = discretize(WeibullSpec(beta=1.8))
    cfg = EstimatorConfig(epsilon=1e-2, shots=100)
    first = estimate_statistic("cvar", dd, "iqae", cfg, seed=99)
    second = estimate_statistic("cvar", dd, "iqae", cfg, seed=99)
    assert first.estimate == second.estimate
    assert first.oracle_queries_A == second.oracle_queries_A


def test_unknown_statistic_is_rejected(uniform):
    with pytest.raises(ValueError):
        estimate_statistic("median", uniform, "exact")


def test_cmc_report_carries_references(uniform):
    spec = UniformSpec()
    report = estimate_with_cmc(uniform, "var", 10_000, seed=4, level=0.95, spec=spec)
    assert report.estimate == 0.9375
    assert report.classical_reference == 0.9375
    assert report.continuous_reference == pytest.approx(0.95)
    assert report.classical_samples == 10_000
    assert report.results == []


@pytest.mark.parametrize("spec", RISK_SPECS, ids=lambda s: s.label)
def test_refinement_moves_risk_toward_continuous_reference(spec):
    """Tests that VaR and CVaR errors shrink from 4 to 7 qubits."""
    reference = continuous_reference(spec, 0.95)
    errors = {}
    for n in (4, 7):
        dd = discretize(spec.with_qubits(n))
        var = estimate_var(dd, 0.95, "exact")
        cvar = estimate_cvar(dd, 0.95, "exact")
        errors[n] = (abs(var.estimate - reference.var), abs(cvar.estimate - reference.cvar))
    assert errors[7][0] < errors[4][0]
    assert errors[7][1] < errors[4][1]


@pytest.mark.slow
def test_iqae_mean_contract_on_narrow_normal():
    """Tests coverage, the query bound and the typical cost of IQAE at epsilon = 1e-3."""
    dd = discretize(NormalSpec(mu=0.1, sigma=0.01))
    problem_a = estimate_mean(dd, "exact").results[0].a_hat
    cfg = EstimatorConfig(epsilon=1e-3, alpha=0.05, shots=100)
    covered = 0
    grover = []
    for seed in range(100):
        report = estimate_mean(dd, "iqae", cfg, seed=seed)
        result = report.results[0]
        assert result.oracle_queries_A <= 2.976e5
        if abs(result.a_hat - problem_a) <= cfg.epsilon:
            covered += 1
        grover.append(result.grover_applications)
    assert covered >= 90
    assert 15960 / 4 <= np.median(grover) <= 15960 * 4


@pytest.mark.slow
def test_mlae_mean_relative_error_on_narrow_normal():
    dd = discretize(NormalSpec(mu=0.1, sigma=0.01))
    reference = classical_stats(dd).mean
    cfg = EstimatorConfig(shots=100, max_iter=3)
    good = sum(
        abs(estimate_mean(dd, "mlae", cfg, seed=seed).estimate - reference) / reference <= 0.02
        for seed in range(10)
    )
    assert good >= 8


def median_slope(dd, reference, estimator, configs, seeds) -> float:
    """Log-log slope of the median error against the median Grover applications."""
    applications, errors = [], []
    for cfg in configs:
        reports = [estimate_mean(dd, estimator, cfg, seed=seed) for seed in range(seeds)]
        applications.append(np.median([r.grover_applications for r in reports]))
        errors.append(np.median([abs(r.estimate - reference) for r in reports]) + 1e-15)
    return float(np.polyfit(np.log(applications), np.log(errors), 1)[0])


@pytest.mark.slow
def test_error_scaling_signature():
    """Tests that quantum errors fall close to 1/queries while Monte Carlo follows 1/sqrt(samples)."""
    dd = discretize(NormalSpec(mu=0.1, sigma=0.05))
    reference = classical_stats(dd).mean

    iqae_configs = [EstimatorConfig(epsilon=eps, alpha=0.05, shots=100) for eps in (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)]
    assert median_slope(dd, reference, "iqae", iqae_configs, seeds=30) <= -0.75

    mlae_configs = [EstimatorConfig(shots=100, max_iter=n) for n in range(2, 9)]
    assert median_slope(dd, reference, "mlae", mlae_configs, seeds=40) <= -0.75

    samples = np.geomspace(100, 100_000, 6).astype(int)
    errors = []
    for n in samples:
        reports = [estimate_with_cmc(dd, "mean", int(n), seed=seed) for seed in range(30)]
        errors.append(np.median([abs(r.estimate - reference) for r in reports]))
    classical_slope = np.polyfit(np.log(samples), np.log(errors), 1)[0]
    assert -0.65 <= classical_slope <= -0.35


@pytest.mark.slow
def test_quantum_estimators_beat_monte_carlo_at_equal_queries():
    """Tests that below 0.3% relative error IQAE and MLAE need fewer oracle queries than Monte Carlo."""
    dd = discretize(NormalSpec(mu=0.1, sigma=0.01))
    reference = classical_stats(dd).mean
    quantum = {
        "iqae": EstimatorConfig(epsilon=1e-4, alpha=0.05, shots=100),
        "mlae": EstimatorConfig(shots=100, max_iter=7),
    }
    for estimator, cfg in quantum.items():
        reports = [estimate_mean(dd, estimator, cfg, seed=seed) for seed in range(30)]
        queries = int(np.median([r.oracle_queries_A for r in reports]))
        quantum_error = np.median([abs(r.estimate - reference) / reference for r in reports])
        classical = [estimate_with_cmc(dd, "mean", queries, seed=seed) for seed in range(30)]
        classical_error = np.median([abs(r.estimate - reference) / reference for r in classical])
        assert quantum_error < 0.003, estimator
        assert quantum_error < classical_error, estimator
