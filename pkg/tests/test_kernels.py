"""Backend kernels: stability, naive-formula oracles, backend parity."""

import math
import subprocess
import sys

import numpy as np

from emograph.numcore import kernels


def test_backend_selected():
    assert kernels.BACKEND in ("numba", "numpy")
    assert "numpy" in kernels.available_backends()


class TestSigmoid:
    def test_midpoint(self):
        assert kernels.sigmoid(np.array([0.0]))[0] == 0.5

    def test_matches_naive_at_moderate_inputs(self):
        x = np.linspace(-30.0, 30.0, 2001)
        naive = 1.0 / (1.0 + np.exp(-x))
        np.testing.assert_allclose(kernels.sigmoid(x), naive, rtol=0, atol=1e-15)

    def test_extreme_negative_does_not_underflow_to_nan(self):
        s = kernels.sigmoid(np.array([-745.0]))[0]
        assert 0.0 < s <= 1e-300
        assert math.isfinite(s)

    def test_symmetry(self):
        x = np.linspace(-30.0, 30.0, 4001)
        total = kernels.sigmoid(x) + kernels.sigmoid(-x)
        np.testing.assert_allclose(total, 1.0, rtol=0, atol=1e-15)


class TestBceTerms:
    def test_matches_naive_formula_at_moderate_logits(self):
        u = kernels.uniform_block(np.uint64(7), np.uint64(0), 400)
        z = (u[:200] * 20.0) - 10.0
        y = (u[200:] < 0.5).astype(np.float64)
        s = 1.0 / (1.0 + np.exp(-z))
        naive = -(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))
        np.testing.assert_allclose(kernels.bce_terms(z, y), naive, atol=1e-10)

    def test_saturated_correct_logit_is_zero_loss(self):
        assert kernels.bce_terms(np.array([100.0]), np.array([1.0]))[0] < 1e-10
        assert kernels.bce_terms(np.array([-100.0]), np.array([0.0]))[0] < 1e-10

    def test_grad_is_sigmoid_minus_target(self):
        z = np.array([-3.0, 0.0, 2.0])
        y = np.array([1.0, 0.0, 1.0])
        np.testing.assert_allclose(
            kernels.bce_grad(z, y), kernels.sigmoid(z) - y, atol=1e-15
        )


class TestSoftmaxRows:
    def test_rows_sum_to_one(self):
        u = kernels.uniform_block(np.uint64(11), np.uint64(0), 20)
        x = np.ascontiguousarray((u * 8.0 - 4.0).reshape(4, 5))
        p = kernels.softmax_rows(x, np.ones((4, 5), dtype=bool))
        np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12)

    def test_masked_entries_exactly_zero(self):
        x = np.array([[10.0, 10.0], [1.0, 2.0]])
        mask = np.array([[True, False], [True, True]])
        p = kernels.softmax_rows(x, mask)
        assert p[0, 0] == 1.0 and p[0, 1] == 0.0


class TestAdamKernel:
    def test_first_step_matches_hand_recurrence(self):
        p = np.array([0.0])
        g = np.array([1.0])
        m = np.zeros(1)
        v = np.zeros(1)
        kernels.adam_update(p, g, m, v, 0.1, 0.9, 0.999, 1e-8, 1)
        m_ref = 0.1 * 1.0
        v_ref = 0.001 * 1.0
        step = 0.1 * (m_ref / (1 - 0.9)) / (math.sqrt(v_ref / (1 - 0.999)) + 1e-8)
        assert abs(p[0] - (-step)) < 1e-15
        assert abs(p[0] + 0.1) < 1e-7


class TestUniformBlock:
    def test_deterministic_and_counter_consistent(self):
        a = kernels.uniform_block(np.uint64(5), np.uint64(0), 10)
        b = kernels.uniform_block(np.uint64(5), np.uint64(0), 10)
        assert np.array_equal(a, b)
        tail = kernels.uniform_block(np.uint64(5), np.uint64(4), 6)
        assert np.array_equal(a[4:], tail)

    def test_range(self):
        u = kernels.uniform_block(np.uint64(123), np.uint64(0), 10000)
        assert (u >= 0.0).all() and (u < 1.0).all()


def test_numpy_fallback_produces_matching_streams_and_close_floats():
    """The env flag must select the numpy path and agree with the default."""
    code = (
        "import os; os.environ['EMOGRAPH_BACKEND']='numpy';"
        "import numpy as np; from emograph.numcore import kernels;"
        "assert kernels.BACKEND == 'numpy';"
        "u = kernels.uniform_block(np.uint64(99), np.uint64(0), 16);"
        "s = kernels.sigmoid(np.linspace(-5, 5, 16));"
        "print(repr(u.tolist())); print(repr(s.tolist()))"
    )
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True
    )
    u_line, s_line = proc.stdout.strip().splitlines()
    u_here = kernels.uniform_block(np.uint64(99), np.uint64(0), 16)
    s_here = kernels.sigmoid(np.linspace(-5, 5, 16))
    assert eval(u_line) == u_here.tolist()  # integer math: bit-identical
    np.testing.assert_allclose(np.array(eval(s_line)), s_here, rtol=0, atol=1e-14)
