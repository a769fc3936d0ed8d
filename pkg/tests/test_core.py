import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrevbound.core import (
    EnergyConvention,
    bare_energy,
    binary_entropy,
    bloch_from_density,
    densities_from_bloch,
    density_from_bloch,
    eig2,
    relative_entropy,
    validate_density,
    von_neumann_entropy,
)
from irrevbound.exceptions import UnphysicalStateError

import oracles


def bloch_vectors(max_norm=1.0):
    return st.tuples(
        st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, max_norm)
    ).filter(lambda v: v[0] ** 2 + v[1] ** 2 + v[2] ** 2 > 1e-6).map(
        lambda v: np.array(v[:3]) / np.linalg.norm(v[:3]) * v[3]
    )


class TestBloch:
    def test_known_state(self):
        rho = density_from_bloch([0.0, 0.6, -0.8])
        assert rho[1, 1].real == pytest.approx(0.1)
        assert rho[0, 1] == pytest.approx(0.3j)
        assert np.allclose(rho, rho.conj().T)

    def test_coherence_to_bloch(self):
        rho = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
        assert np.allclose(bloch_from_density(rho), [0.0, 1.0, 0.0])

    def test_population_from_z(self):
        assert density_from_bloch([0, 0, -0.604])[1, 1].real == pytest.approx(0.198)

    def test_outside_ball_rejected(self):
        with pytest.raises(UnphysicalStateError):
            density_from_bloch([0.0, 0.8, 0.8])

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            density_from_bloch([0.0, 1.0])

    def test_vectorised_matches_scalar(self):
        R = np.array([[0.1, 0.2, 0.3], [0.0, 0.0, -1.0], [0.5, -0.5, 0.1]])
        stacked = densities_from_bloch(R)
        for r, rho in zip(R, stacked):
            assert np.allclose(rho, density_from_bloch(r))

    @given(bloch_vectors())
    @settings(max_examples=200, deadline=None)
    def test_roundtrip(self, r):
        assert np.allclose(bloch_from_density(density_from_bloch(r)), r, atol=1e-14)


class TestValidate:
    @pytest.mark.parametrize(
        "rho",
        [
            np.array([[0.5, 0.1], [0.2, 0.5]]),
            np.array([[0.6, 0.0], [0.0, 0.6]]),
            np.array([[1.2, 0.0], [0.0, -0.2]]),
            np.eye(4) / 4,
        ],
        ids=["non-hermitian", "trace", "negative", "shape"],
    )
    def test_rejects(self, rho):
        with pytest.raises(UnphysicalStateError):
            validate_density(rho)

    def test_accepts_three_level(self):
        assert validate_density(np.eye(3) / 3, dim=3).shape == (3, 3)

    def test_dimension_mismatch(self):
        with pytest.raises(UnphysicalStateError):
            validate_density(np.eye(3) / 3, dim=2)


class TestSpectrum:
    def test_pure_state(self):
        sp = eig2(density_from_bloch([0.0, 0.6, -0.8]))
        assert sp.lambda_plus == pytest.approx(1.0)
        assert sp.lambda_minus == pytest.approx(0.0, abs=1e-15)
        assert abs(sp.eigvec_plus[1]) ** 2 == pytest.approx(0.1)

    def test_maximally_mixed(self):
        sp = eig2(np.eye(2) / 2)
        assert sp.lambda_plus == sp.lambda_minus == 0.5

    @given(bloch_vectors())
    @settings(max_examples=200, deadline=None)
    def test_eigen_equation(self, r):
        rho = density_from_bloch(r)
        sp = eig2(rho)
        for lam, v in ((sp.lambda_plus, sp.eigvec_plus), (sp.lambda_minus, sp.eigvec_minus)):
            assert np.linalg.norm(v) == pytest.approx(1.0)
            assert np.allclose(rho @ v, lam * v, atol=1e-12)
            assert abs(v[1].imag) < 1e-15 and v[1].real >= 0


class TestEntropy:
    def test_known_value(self):
        lam = (3 + math.sqrt(5)) / 6
        rho = np.diag([lam, 1 - lam])
        assert von_neumann_entropy(rho) == pytest.approx(0.381264, abs=1e-6)

    @pytest.mark.parametrize("s, expected", [(0.1, 0.3251), (0.5, math.log(2)), (0.0, 0.0), (1.0, 0.0)])
    def test_binary(self, s, expected):
        assert binary_entropy(s) == pytest.approx(expected, abs=1e-4)

    def test_binary_range(self):
        with pytest.raises(ValueError):
            binary_entropy(1.5)

    def test_pure_is_zero(self):
        assert von_neumann_entropy(density_from_bloch([0, 1, 0])) == pytest.approx(0.0, abs=1e-15)

    @given(bloch_vectors())
    @settings(max_examples=200, deadline=None)
    def test_bounds_and_oracle(self, r):
        rho = density_from_bloch(r)
        s = von_neumann_entropy(rho)
        assert -1e-15 <= s <= math.log(2) + 1e-15
        assert s == pytest.approx(oracles.entropy(rho), abs=1e-12)


class TestRelativeEntropy:
    def test_self_is_zero(self):
        rho = density_from_bloch([0.1, 0.2, 0.3])
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-14)

    def test_off_support_is_infinite(self):
        assert relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf

    def test_pure_first_argument(self):
        rho1 = np.diag([1.0, 0.0])
        rho2 = np.diag([0.25, 0.75])
        assert relative_entropy(rho1, rho2) == pytest.approx(math.log(4))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            relative_entropy(np.eye(2) / 2, np.eye(3) / 3)

    @given(bloch_vectors(0.99), bloch_vectors(0.99))
    @settings(max_examples=150, deadline=None)
    def test_klein_and_oracle(self, r1, r2):
        rho1, rho2 = density_from_bloch(r1), density_from_bloch(r2)
        d = relative_entropy(rho1, rho2)
        assert d >= 0.0
        assert d == pytest.approx(oracles.rel_entropy(rho1, rho2), rel=1e-8, abs=1e-10)


class TestEnergy:
    def test_bare_energy(self):
        rho = density_from_bloch([0, 0, 0.2])
        assert bare_energy(rho, EnergyConvention(1.0, 3.0)) == pytest.approx(1.0 * 0.4 + 3.0 * 0.6)

    def test_gap_must_be_positive(self):
        with pytest.raises(ValueError):
            EnergyConvention(1.0, 1.0)
