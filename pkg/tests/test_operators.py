import numpy as np
import pytest

from conftest import operator_zoo
from eglass.operators import (
    MeasurementVector,
    OperatorSpec,
    adjoint,
    apply,
    apply_matrix,
    materialize,
    measure,
    measurement_mse,
)


@pytest.mark.parametrize("op", operator_zoo(), ids=lambda o: o.kind)
def test_adjoint_probe(op):
    rng = np.random.default_rng(17)
    for _ in range(5):
        x = rng.standard_normal(op.n)
        y = rng.standard_normal(op.output_dim)
        lhs = apply(op, x).values @ y
        rhs = x @ adjoint(op, y).values
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


@pytest.mark.parametrize("op", operator_zoo(), ids=lambda o: o.kind)
def test_materialize_matches_apply(op):
    a = materialize(op)
    x = np.random.default_rng(3).standard_normal(op.n)
    np.testing.assert_allclose(a @ x, apply(op, x).values, atol=1e-12)


def test_downsample_is_block_mean():
    op = OperatorSpec(kind="downsample", signal_shape=(4, 4), factor=2)
    grid = np.arange(16.0).reshape(4, 4)
    y = apply(op, grid.ravel()).values
    expected = np.array([grid[:2, :2].mean(), grid[:2, 2:].mean(),
                         grid[2:, :2].mean(), grid[2:, 2:].mean()])
    np.testing.assert_allclose(y, expected)


def test_mask_selects_entries():
    mask = np.zeros((2, 2), dtype=bool)
    mask[0, 1] = True
    op = OperatorSpec(kind="mask", signal_shape=(2, 2), mask=mask)
    y = apply(op, np.array([1.0, 2.0, 3.0, 4.0])).values
    np.testing.assert_array_equal(y, [2.0])


def test_measure_noise_is_seeded():
    op = OperatorSpec(kind="downsample", signal_shape=(4, 4), factor=2)
    x = np.ones(16)
    y1 = measure(op, x, sigma=0.1, noise_seed=5)
    y2 = measure(op, x, sigma=0.1, noise_seed=5)
    np.testing.assert_array_equal(y1.values, y2.values)
    y0 = measure(op, x, sigma=0.0)
    np.testing.assert_array_equal(y0.values, apply(op, x).values)


def test_apply_matrix_columnwise():
    op = OperatorSpec(kind="random_projection", signal_shape=(4, 4), m=6, proj_seed=1)
    cols = np.random.default_rng(2).standard_normal((16, 3))
    out = apply_matrix(op, cols)
    for j in range(3):
        np.testing.assert_allclose(out[:, j], apply(op, cols[:, j]).values)


def test_measurement_mse():
    assert measurement_mse(np.array([1.0, 3.0]), np.array([1.0, 1.0])) == 2.0
    with pytest.raises(ValueError):
        measurement_mse(np.zeros(2), np.zeros(3))


@pytest.mark.parametrize("op", operator_zoo(), ids=lambda o: o.kind)
def test_spec_roundtrip(op):
    rebuilt = OperatorSpec.from_json(op.to_json())
    x = np.random.default_rng(8).standard_normal(op.n)
    np.testing.assert_allclose(apply(rebuilt, x).values, apply(op, x).values)


def test_spec_validation():
    with pytest.raises(ValueError):
        OperatorSpec(kind="downsample", signal_shape=(4, 4), factor=3)
    with pytest.raises(ValueError):
        OperatorSpec(kind="mask", signal_shape=(4, 4))
    with pytest.raises(ValueError):
        OperatorSpec(kind="blur", signal_shape=(4, 4), kernel=np.ones(2))
    with pytest.raises(ValueError):
        OperatorSpec(kind="random_projection", signal_shape=(4, 4), m=99)
    with pytest.raises(ValueError):
        OperatorSpec(kind="fft", signal_shape=(4, 4))
    with pytest.raises(ValueError):
        measure(OperatorSpec(kind="downsample", signal_shape=(4, 4), factor=2),
                np.ones(16), sigma=-1.0)


def test_shape_validation():
    op = OperatorSpec(kind="downsample", signal_shape=(4, 4), factor=2)
    with pytest.raises(ValueError):
        apply(op, np.ones(5))
    with pytest.raises(ValueError):
        adjoint(op, np.ones(5))


def test_measurement_vector_finite():
    with pytest.raises(ValueError):
        MeasurementVector(np.array([np.nan]))
