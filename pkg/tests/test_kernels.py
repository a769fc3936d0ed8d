import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from irrevbound import kernels
from irrevbound.core import density_from_bloch, relative_entropy, von_neumann_entropy
from irrevbound.twolevel import SystemParams2, bloch_generator

PY = kernels._dopri5_affine_py
NB = kernels._dopri5_affine_nb
ENT_IMPLS = [kernels._qubit_entropies_py, kernels._qubit_entropies_loop, kernels._qubit_entropies_nb]


def exact_affine(M, c, y0, times):
    """Closed-form solution through the augmented-matrix exponential."""
    A = np.zeros((4, 4))
    A[:3, :3] = M
    A[:3, 3] = c
    y = np.append(y0, 1.0)
    return np.array([(expm(A * t) @ y)[:3] for t in times])


class TestDopri5:
    @pytest.mark.parametrize("impl", [PY, NB], ids=["python", "numba"])
    @pytest.mark.parametrize("ratio", [0.01, 0.14, 1.8, 10.0, 100.0])
    def test_matches_matrix_exponential(self, impl, ratio):
        M, c = bloch_generator(SystemParams2.from_ratio(ratio))
        t = np.linspace(0.0, 8.0, 161)
        Y, status, worst, n = kernels.dopri5_affine(M, c, [0, 0, 1], t, 1e-12, 1e-14, impl=impl)
        assert status == kernels.STATUS_OK
        assert worst <= 1.0
        assert n > 0
        assert np.max(np.abs(Y - exact_affine(M, c, np.array([0, 0, 1.0]), t))) < 1e-9

    @pytest.mark.parametrize("ratio", [0.05, 3.0, 40.0])
    def test_numba_and_python_agree(self, ratio):
        M, c = bloch_generator(SystemParams2.from_ratio(ratio))
        t = np.linspace(0.0, 5.0, 301)
        y0 = np.array([0.1, 0.3, -0.5])
        a = kernels.dopri5_affine(M, c, y0, t, impl=PY)
        b = kernels.dopri5_affine(M, c, y0, t, impl=NB)
        assert a[1] == b[1] == kernels.STATUS_OK
        assert a[3] == b[3]
        assert np.allclose(a[0], b[0], rtol=0, atol=1e-13)

    def test_first_row_is_initial(self):
        M, c = bloch_generator(SystemParams2.from_ratio(1.0))
        Y, *_ = kernels.dopri5_affine(M, c, [0.2, 0.1, 0.3], [0.0, 1.0])
        assert np.array_equal(Y[0], [0.2, 0.1, 0.3])

    def test_single_point(self):
        Y, status, _, n = kernels.dopri5_affine(np.eye(3), np.zeros(3), [1, 2, 3], [0.0])
        assert status == kernels.STATUS_OK and n == 0 and Y.shape == (1, 3)

    def test_max_steps_status(self):
        M, c = bloch_generator(SystemParams2.from_ratio(100.0))
        _, status, _, _ = kernels.dopri5_affine(M, c, [0, 0, 1], [0.0, 50.0], max_steps=10)
        assert status == kernels.STATUS_MAX_STEPS


def _ball(max_norm=1.0):
    comp = st.floats(-1, 1)
    return st.tuples(comp, comp, comp, st.floats(0, max_norm)).filter(
        lambda v: v[0] ** 2 + v[1] ** 2 + v[2] ** 2 > 1e-6
    ).map(lambda v: np.array(v[:3]) / np.linalg.norm(v[:3]) * v[3])


class TestEntropies:
    @given(st.lists(_ball(0.999), min_size=1, max_size=6), _ball(0.999))
    @settings(max_examples=100, deadline=None)
    def test_matches_matrix_functions(self, rs, r0):
        R = np.array(rs)
        for impl in ENT_IMPLS:
            S, D = kernels.qubit_entropies(R, r0, impl=impl)
            for k, r in enumerate(R):
                assert S[k] == pytest.approx(von_neumann_entropy(density_from_bloch(r)), abs=1e-12)
                ref = relative_entropy(density_from_bloch(r0), density_from_bloch(r))
                assert D[k] == pytest.approx(ref, rel=1e-9, abs=1e-11)

    @pytest.mark.parametrize("impl", ENT_IMPLS, ids=["numpy", "loop", "numba"])
    def test_off_support_infinite(self, impl):
        R = np.array([[0.0, 0.0, -1.0]])
        S, D = kernels.qubit_entropies(R, np.array([0.0, 0.0, 0.5]), impl=impl)
        assert S[0] == 0.0
        assert D[0] == np.inf

    @pytest.mark.parametrize("impl", ENT_IMPLS, ids=["numpy", "loop", "numba"])
    def test_pure_reference_on_same_ray(self, impl):
        r = np.array([0.0, 0.6, -0.8])
        S, D = kernels.qubit_entropies(r[None, :], r, impl=impl)
        assert S[0] == pytest.approx(0.0, abs=1e-15)
        assert D[0] == pytest.approx(0.0, abs=1e-15)


class TestFlag:
    @pytest.mark.parametrize("value, expected", [("0", "False"), ("off", "False"), ("1", "True")])
    def test_env_flag(self, value, expected):
        env = dict(os.environ, IRREVBOUND_NUMBA=value)
        out = subprocess.run(
            [sys.executable, "-c", "from irrevbound._accel import USE_NUMBA; print(USE_NUMBA)"],
            env=env, capture_output=True, text=True, check=True,
        )
        assert out.stdout.strip() == expected

    def test_fallback_selects_numpy_kernels(self):
        env = dict(os.environ, IRREVBOUND_NUMBA="0")
        code = ("from irrevbound import kernels; "
                "print(kernels._dopri5_impl is kernels._dopri5_affine_py, "
                "kernels._entropies_impl is kernels._qubit_entropies_py)")
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        assert out.stdout.split() == ["True", "True"]
