import numpy as np
import pytest
from scipy.stats import norm

from perceptor.errors import InputError
from perceptor.synth import (BinaryGaussianSpec, closed_form_accuracy, simulate_binary,
                             sweep_surface)


def test_uncorrelated_matches_eq2():
    r = simulate_binary(BinaryGaussianSpec(1.0, 1.0, 0.0, 200_000, seed=1))
    assert abs(r.empirical - r.eq2) < 3 * r.stderr


def test_correlated_closed_form():
    assert closed_form_accuracy(1, 1, 0.5) == pytest.approx(norm.cdf(1.0))
    r = simulate_binary(BinaryGaussianSpec(1.0, 1.0, 0.5, 200_000, seed=2))
    assert abs(r.empirical - 0.841345) < 3 * r.stderr


@pytest.mark.parametrize("rho", [-0.9, 0.0, 0.9])
def test_zero_gap_is_coin_flip(rho):
    r = simulate_binary(BinaryGaussianSpec(0.0, 1.0, rho, 100_000, seed=3))
    assert abs(r.empirical - 0.5) < 3 * r.stderr


def test_eq2_ignores_correlation():
    values = {simulate_binary(BinaryGaussianSpec(0.5, 2.0, rho, 10)).eq2
              for rho in (-0.6, 0.0, 0.6)}
    assert len(values) == 1


def test_empirical_increases_with_rho():
    rows = sweep_surface([1.0], [1.0], [-0.6, -0.3, 0.0, 0.3, 0.6], samples=100_000)
    emp = np.array([r[5] for r in rows])
    se = np.array([r[6] for r in rows])
    assert np.all(np.diff(emp) > -3 * np.hypot(se[1:], se[:-1]))
    closed = [r[4] for r in rows]
    assert np.all(np.diff(closed) > 0)


def test_relation_is_not_affine_in_rho():
    step = closed_form_accuracy(1, 1, 0.1) - closed_form_accuracy(1, 1, 0.0)
    span = closed_form_accuracy(1, 1, 0.9) - closed_form_accuracy(1, 1, 0.0)
    assert abs(span - 9 * step) > 0.01


def test_sweep_shape_and_determinism():
    a = sweep_surface([0.5, 1.0], [1.0], [-0.3, 0.3], samples=1000, seed=4)
    b = sweep_surface([0.5, 1.0], [1.0], [-0.3, 0.3], samples=1000, seed=4, threads=2)
    assert len(a) == 4 and a == b


@pytest.mark.parametrize("kw", [dict(sigma=0.0), dict(rho=1.0), dict(rho=-1.0),
                                dict(samples=0)])
def test_spec_validation(kw):
    args = dict(mu_correct=1.0, sigma=1.0, rho=0.0, samples=10)
    args.update(kw)
    with pytest.raises(InputError):
        BinaryGaussianSpec(**args)
