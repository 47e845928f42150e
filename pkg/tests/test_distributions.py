import sys
import os
import json
import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add src directory to sys.path to allow importing qae_lab
# This assumes tests are run from the project root
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from qae_lab.distributions import (
    DiscretizedDistribution,
    NormalSpec,
    PointSpec,
    UniformSpec,
    WeibullSpec,
    classical_stats,
    continuous_at_level,
    continuous_mean,
    continuous_reference,
    discretize,
    parse_spec,
)
from qae_lab.exceptions import DegenerateTailError, DistributionError

GOLDEN_FILE = Path(__file__).parent / "data" / "golden_var.json"


@pytest.fixture
def risk_specs():
    """The four distributions of the result tables."""
    return {
        "narrow_normal": NormalSpec(mu=0.1, sigma=0.01),
        "wide_normal": NormalSpec(mu=0.1, sigma=0.05),
        "weibull": WeibullSpec(beta=1.8),
        "uniform": UniformSpec(a=0.0, b=1.0),
    }


def test_uniform_grid_and_probabilities():
    """Tests the left-endpoint grid of the uniform distribution."""
    dd = discretize(UniformSpec(a=0.0, b=1.0, n_qubits=4))
    np.testing.assert_allclose(dd.grid, np.arange(16) / 16)
    np.testing.assert_allclose(dd.probs, np.full(16, 1 / 16))
    assert dd.n_qubits == 4
    assert dd.label == "U(0, 1)"


def test_normal_is_symmetric_around_mu():
    dd = discretize(NormalSpec(mu=0.1, sigma=0.01))
    assert dd.grid[0] == pytest.approx(0.07)
    assert dd.grid[-1] == pytest.approx(0.13)
    np.testing.assert_allclose(dd.probs, dd.probs[::-1], atol=1e-15)
    assert abs(classical_stats(dd).mean - 0.1) <= 1e-12


def test_weibull_probabilities_follow_pdf():
    spec = WeibullSpec(beta=1.8)
    dd = discretize(spec)
    x = dd.grid
    pdf = 1.8 * np.power(x, 0.8) * np.exp(-np.power(x, 1.8))
    np.testing.assert_allclose(dd.probs, pdf / pdf.sum(), atol=1e-12)
    assert dd.grid[0] == 0.0
    assert dd.probs[0] == 0.0


def test_point_mass_statistics():
    dd = discretize(PointSpec(value=2.5))
    stats = classical_stats(dd)
    assert stats.mean == 2.5
    assert stats.var(0.95) == 2.5
    assert stats.cvar(0.95) == 2.5
    assert stats.achieved_level(0.95) == 1.0


def test_uniform_var_reaches_last_grid_point():
    """Tests VaR on a grid whose cdf jumps from 0.9375 straight to 1."""
    stats = classical_stats(discretize(UniformSpec(a=0.0, b=1.0)))
    assert stats.var_index(0.95) == 15
    assert stats.var(0.95) == 0.9375
    assert stats.achieved_level(0.95) == 1.0


def test_var_matches_linear_scan(risk_specs):
    for spec in risk_specs.values():
        dd = discretize(spec)
        stats = classical_stats(dd)
        for level in (0.05, 0.5, 0.9, 0.95, 0.99):
            cdf = np.cumsum(dd.probs)
            expected = next(i for i, c in enumerate(cdf) if c >= level)
            assert stats.var_index(level) == expected
            assert stats.cvar(level) == pytest.approx(
                np.dot(dd.probs[: expected + 1], dd.grid[: expected + 1]) / cdf[expected]
            )


def test_level_outside_unit_interval_is_rejected():
    stats = classical_stats(discretize(UniformSpec()))
    with pytest.raises(ValueError):
        stats.var(1.0)
    with pytest.raises(ValueError):
        stats.var(0.0)


def test_tail_without_mass_is_degenerate():
    stats = classical_stats(discretize(WeibullSpec(beta=1.8)))
    with pytest.raises(DegenerateTailError):
        stats.tail_mean(0)


@pytest.mark.parametrize(
    "spec, expected",
    [
        (NormalSpec(mu=0.1, sigma=0.01), 0.1164),
        (NormalSpec(mu=0.1, sigma=0.05), 0.1822),
        (WeibullSpec(beta=1.8), 1.8396),
    ],
)
def test_continuous_var_references(spec, expected):
    assert continuous_reference(spec, 0.95).var == pytest.approx(expected, abs=5e-4)


def test_continuous_weibull_quantile_closed_form():
    reference = continuous_reference(WeibullSpec(beta=1.8), 0.95)
    assert reference.var == pytest.approx((-math.log(0.05)) ** (1 / 1.8), rel=1e-9)
    assert reference.cvar < reference.var


def test_continuous_normal_cvar_closed_form():
    # E[X | X <= q] = mu - sigma * phi(z) / Phi(z)
    z = 1.6448536269514722
    phi = math.exp(-z * z / 2) / math.sqrt(2 * math.pi)
    expected = 0.1 - 0.01 * phi / 0.95
    assert continuous_reference(NormalSpec(mu=0.1, sigma=0.01), 0.95).cvar == pytest.approx(expected, rel=1e-6)


def test_continuous_at_level_outside_unit_interval():
    spec = NormalSpec(mu=0.1, sigma=0.01)
    assert continuous_at_level(spec, 1.0) is None
    assert continuous_at_level(spec, None) is None
    assert continuous_at_level(spec, 0.5).var == pytest.approx(0.1)


def test_mean_error_shrinks_with_more_qubits():
    """Tests that refining the grid from 4 to 8 qubits moves the mean toward the continuous one."""
    for spec in (UniformSpec(), WeibullSpec(beta=1.8)):
        target = continuous_mean(spec)
        coarse = abs(classical_stats(discretize(spec.with_qubits(4))).mean - target)
        fine = abs(classical_stats(discretize(spec.with_qubits(8))).mean - target)
        assert fine < coarse

    normal = NormalSpec(mu=0.1, sigma=0.01)
    for n in (4, 8):
        assert abs(classical_stats(discretize(normal.with_qubits(n))).mean - 0.1) <= 1e-12


def test_golden_var_values():
    """Tests discretized VaR at level 0.95 against frozen reference values."""
    with open(GOLDEN_FILE, "r", encoding="utf-8") as f:
        golden = json.load(f)
    for case in golden["cases"]:
        spec = parse_spec(case["spec"])
        stats = classical_stats(discretize(spec))
        assert stats.var_index(golden["level"]) == case["index"], spec.label
        assert stats.var(golden["level"]) == pytest.approx(case["value"], abs=1e-4), spec.label


def test_parse_spec_dispatches_on_kind():
    spec = parse_spec({"kind": "weibull", "beta": 1.8, "n_qubits": 5})
    assert isinstance(spec, WeibullSpec)
    assert spec.n_points == 32
    assert spec.label == "W(1.8)"


@pytest.mark.parametrize(
    "data",
    [
        {"kind": "normal", "mu": 0.1, "sigma": 0.0},
        {"kind": "uniform", "a": 1.0, "b": 1.0},
        {"kind": "normal", "mu": 0.0, "sigma": 1.0, "n_qubits": 0},
        {"kind": "normal", "mu": 0.0, "sigma": 1.0, "bounds": [1.0, -1.0]},
        {"kind": "cauchy"},
    ],
)
def test_invalid_specs_are_rejected(data):
    with pytest.raises(ValidationError):
        parse_spec(data)


def test_discretized_distribution_validation():
    with pytest.raises(DistributionError):
        DiscretizedDistribution(np.arange(3.0), np.full(3, 1 / 3))
    with pytest.raises(DistributionError):
        DiscretizedDistribution(np.arange(4.0), np.full(4, 0.3))
    with pytest.raises(DistributionError):
        DiscretizedDistribution(np.array([0.0, 2.0, 1.0, 3.0]), np.full(4, 0.25))


def test_discretized_distribution_copies_inputs():
    grid = np.arange(4.0)
    probs = np.full(4, 0.25)
    dd = DiscretizedDistribution(grid, probs)
    grid[0] = -1.0
    assert dd.grid[0] == 0.0
    assert probs.flags.writeable
    assert not dd.probs.flags.writeable
