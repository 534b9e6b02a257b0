import numpy as np
import pytest

from latspec.errors import ConfigError, OverflowGuardError
from latspec.lattice import (
    DecayCertificate,
    Perturbation,
    Window,
    apply_j_conjugation,
    assemble_hv,
    build_a0,
    build_h0,
    build_weight,
    numerical_range_bounds,
)


def test_h0_smallest_window():
    h = build_h0(Window(1))
    assert np.array_equal(h, np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]))


def test_h0_eigenvalues_small_window():
    lam = np.linalg.eigvalsh(build_h0(Window(1)))
    assert np.allclose(lam, [2 - np.sqrt(2), 2.0, 2 + np.sqrt(2)], atol=1e-12)


@pytest.mark.parametrize("n", [1, 5, 37])
def test_h0_spectrum_in_band_and_norm(n):
    h = build_h0(Window(n))
    assert np.array_equal(h, h.T)
    lam = np.linalg.eigvalsh(h)
    assert lam.min() >= 0.0 and lam.max() <= 4.0
    assert np.linalg.norm(h, 2) <= 4.0


class TestConjugateOperator:
    def test_hermitian(self):
        a = build_a0(Window(7))
        assert np.array_equal(a, a.conj().T)

    def test_action_on_center_vector(self):
        # A0 e_0 = -(i/2)(e_{-1} + e_1) under the commutator-positive convention
        w = Window(3)
        a = build_a0(w)
        e0 = np.zeros(w.dimension)
        e0[w.index_of(0)] = 1.0
        out = a @ e0
        expected = np.zeros(w.dimension, complex)
        expected[w.index_of(-1)] = -0.5j
        expected[w.index_of(1)] = -0.5j
        assert np.allclose(out, expected)

    @pytest.mark.parametrize("n", [6, 20, 50])
    def test_commutator_identity_interior(self, n):
        w = Window(n)
        h = build_h0(w).astype(complex)
        a = build_a0(w)
        comm = 1j * (a @ h - h @ a)
        target = 4.0 * h - h @ h
        interior = slice(2, w.dimension - 2)  # |site| <= N - 2
        err = np.max(np.abs((comm - target)[interior, interior]))
        assert err <= 1e-12


class TestWeights:
    def test_center_entry(self):
        w = build_weight(Window(4), 2.0, +1)
        assert w[4, 4] == 1.0

    def test_minus_sign_entry(self):
        w = Window(4)
        wm = build_weight(w, 2.0, -1)
        assert wm[w.index_of(3), w.index_of(3)] == pytest.approx(np.exp(-3.0))

    def test_inverse_pair_to_machine_precision(self):
        w = Window(30)
        prod = build_weight(w, 1.3, +1) @ build_weight(w, 1.3, -1)
        assert np.max(np.abs(prod - np.eye(w.dimension))) <= 1e-15

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuardError):
            build_weight(Window(1000), 2.0, +1)


class TestJConjugation:
    def test_diagonal_unchanged(self):
        v = Perturbation.diagonal([1.0, 2.0, 3.0])
        assert apply_j_conjugation(v) is v

    def test_rank_one_cross_term_flips(self):
        # |e_0><e_1| picks up (-1)^(0+1) = -1
        left = np.array([0.0, 1.0, 0.0])
        right = np.array([0.0, 0.0, 1.0])
        v = Perturbation.lowrank([(1.0, left, right)])
        w = Window(2)
        vj = apply_j_conjugation(v)
        assert np.allclose(vj.dense_matrix(w), -v.dense_matrix(w))

    def test_involution_and_isometry(self, rng):
        entries = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
        v = Perturbation.dense(entries)
        vjj = apply_j_conjugation(apply_j_conjugation(v))
        assert np.array_equal(vjj.entries, v.entries)
        w = Window(5)
        assert np.linalg.norm(apply_j_conjugation(v).dense_matrix(w), 2) == pytest.approx(
            np.linalg.norm(v.dense_matrix(w), 2)
        )


class TestAssemble:
    def test_zero_perturbation(self):
        w = Window(6)
        v = Perturbation.diagonal(np.zeros(3))
        assert np.array_equal(assemble_hv(w, v), build_h0(w).astype(complex))

    def test_rank_one_bound_state(self):
        # attractive site perturbation: lowest eigenvalue -> 2 - sqrt(5)
        w = Window(60)
        v = Perturbation.rank_one_site(0, -1.0)
        lam = np.linalg.eigvals(assemble_hv(w, v))
        low = lam[np.argmin(lam.real)]
        assert abs(low - (2.0 - np.sqrt(5.0))) < 1e-8

    def test_parity_spectral_symmetry(self, rng):
        # spec(H_V) = 4 - spec(H_{-V_J}) via the window parity conjugation
        from conftest import hausdorff

        entries = rng.standard_normal((9, 9)) * np.exp(
            -np.add.outer(np.abs(np.arange(-4, 5)), np.abs(np.arange(-4, 5))) / 2.0
        )
        v = Perturbation.dense(entries)
        w = Window(20)
        lam1 = np.linalg.eigvals(assemble_hv(w, v))
        minus_vj = apply_j_conjugation(v).scaled(-1.0)
        lam2 = 4.0 - np.linalg.eigvals(assemble_hv(w, minus_vj))
        assert hausdorff(lam1, lam2) < 1e-10

    def test_linearity(self, rng):
        w = Window(5)
        v1 = Perturbation.dense(rng.standard_normal((5, 5)).astype(complex))
        v2 = Perturbation.dense(rng.standard_normal((5, 5)).astype(complex))
        combo = Perturbation.dense(2.5 * v1.entries + v2.entries)
        lhs = assemble_hv(w, combo) - build_h0(w)
        rhs = 2.5 * v1.dense_matrix(w) + v2.dense_matrix(w)
        assert np.allclose(lhs, rhs)


class TestNumericalRange:
    def test_hermitian_collapses(self):
        lo, hi = numerical_range_bounds(build_h0(Window(5)))
        assert lo == pytest.approx(0.0, abs=1e-14)
        assert hi == pytest.approx(0.0, abs=1e-14)

    def test_rank_one_imaginary_part(self):
        w = Window(6)
        h = build_h0(w).astype(complex)
        h[w.index_of(0), w.index_of(0)] += 1j
        lo, hi = numerical_range_bounds(h)
        assert lo == pytest.approx(0.0, abs=1e-14)
        assert hi == pytest.approx(1.0, abs=1e-14)

    def test_order(self, rng):
        m = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
        lo, hi = numerical_range_bounds(m)
        assert lo <= hi


class TestPerturbationInterchange:
    def test_roundtrip_all_kinds(self, rng):
        w = Window(4)
        diag = Perturbation.diagonal([1 + 1j, 2.0, 3.0], decay=DecayCertificate(4.0, 1.0))
        dense = Perturbation.dense(rng.standard_normal((5, 5)).astype(complex))
        low = Perturbation.lowrank([(2.0 + 1j, [0.0, 1.0, 0.0], [0.0, 1.0, 0.0])])
        for v in (diag, dense, low):
            back = Perturbation.from_json(v.to_json())
            assert np.allclose(back.dense_matrix(w), v.dense_matrix(w))
            if v.decay is not None:
                assert back.decay == v.decay

    def test_malformed_documents_name_the_key(self):
        with pytest.raises(ConfigError) as err:
            Perturbation.from_json({"kind": "diagonal"})
        assert err.value.key == "values"
        with pytest.raises(ConfigError) as err:
            Perturbation.from_json({"kind": "nonsense"})
        assert err.value.key == "kind"
        with pytest.raises(ConfigError) as err:
            Perturbation.from_json({"kind": "diagonal", "values": [[1.0, 0.0]], "decay": {"C": 1.0}})
        assert err.value.key == "decay"

    def test_lowrank_mass_warning(self):
        vec = np.zeros(41)
        vec[0] = 1.0  # site -20, far outside the small window
        vec[20] = 1.0
        v = Perturbation.lowrank([(1.0, vec, vec)])
        with pytest.warns(UserWarning):
            v.dense_matrix(Window(3))
