import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holodfs.hilbert import (
    CutoffError,
    LayoutError,
    Operator,
    SpaceLayout,
    adjoint,
    annihilation,
    collective_op,
    commutator,
    embed,
    identity,
    qubit_op,
)


def random_op(rng, d, hermitian=False):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return m + m.conj().T if hermitian else m


class TestLayout:
    def test_total_dim_and_validation(self):
        lay = SpaceLayout.cavity_qubits(2, 3)
        assert lay.dims == (3, 2, 2, 2)
        assert lay.total_dim == 24
        with pytest.raises(LayoutError):
            SpaceLayout((3, 1))
        with pytest.raises(CutoffError):
            SpaceLayout.cavity_qubits(0, 2)

    def test_basis_index_cavity_first(self):
        lay = SpaceLayout.cavity_qubits(2, 3)
        assert lay.basis_index(0, "100") == 4
        assert lay.basis_index(1, "001") == 9
        with pytest.raises(LayoutError):
            lay.basis_index(0, "10")

    @given(st.lists(st.integers(2, 4), min_size=1, max_size=4), st.data())
    def test_index_bijection(self, dims, data):
        lay = SpaceLayout(tuple(dims))
        i = data.draw(st.integers(0, lay.total_dim - 1))
        assert lay.index(lay.multi_index(i)) == i


class TestAnnihilation:
    def test_n_max_1(self):
        assert np.array_equal(annihilation(1).data, [[0, 1], [0, 0]])

    def test_n_max_2_superdiagonal(self):
        a = annihilation(2).data
        assert np.allclose(np.diag(a, 1), [1, np.sqrt(2)], atol=0)
        assert np.count_nonzero(a) == 2

    def test_number_operator_on_fock_2(self):
        a = annihilation(3)
        n = (a.dag() @ a).data
        fock2 = np.eye(4)[2]
        assert np.allclose(n @ fock2, 2 * fock2)

    def test_invalid_cutoff(self):
        with pytest.raises(CutoffError):
            annihilation(0)

    @pytest.mark.parametrize("n_max", [1, 2, 5])
    def test_canonical_commutator_below_cutoff(self, n_max):
        a = annihilation(n_max)
        c = commutator(a, a.dag()).data
        # truncation spoils only the top Fock state; sqrt(n)**2 rounds at 1 ulp
        assert np.max(np.abs(c[:n_max, :n_max] - np.eye(n_max))) < 1e-14
        assert c[n_max, n_max] == pytest.approx(-n_max)


class TestQubitOps:
    def test_sigma_plus(self):
        assert np.array_equal(qubit_op("sigma_plus").data, [[0, 0], [1, 0]])

    def test_sigma_z_sign(self):
        assert np.array_equal(qubit_op("sigma_z").data @ [0, 1], [0, 1])

    def test_completeness(self):
        assert (qubit_op("proj0") + qubit_op("proj1")).allclose(identity(SpaceLayout((2,))))

    def test_pauli_algebra(self):
        c = commutator(qubit_op("sigma_plus"), qubit_op("sigma_minus"))
        assert c.allclose(qubit_op("sigma_z"))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            qubit_op("sigma_y")


class TestEmbed:
    def test_sigma_z_on_first_qubit(self):
        lay = SpaceLayout((2, 2, 2))
        sz1 = embed(qubit_op("sigma_z"), 0, lay)
        v = np.zeros(8)
        v[0b100] = 1
        assert np.allclose(sz1 @ v, v)

    @pytest.mark.parametrize("site", [0, 1, 2])
    def test_identity_embeds_to_identity(self, site):
        lay = SpaceLayout((3, 2, 2))
        eye = np.eye(lay.dims[site])
        assert embed(eye, site, lay).allclose(identity(lay))

    def test_disjoint_embeddings_commute(self):
        rng = np.random.default_rng(0)
        lay = SpaceLayout((3, 2, 2))
        for i, j in [(0, 1), (0, 2), (1, 2)]:
            a = embed(random_op(rng, lay.dims[i]), i, lay)
            b = embed(random_op(rng, lay.dims[j]), j, lay)
            assert np.max(np.abs(commutator(a, b).data)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(LayoutError):
            embed(np.eye(3), 1, SpaceLayout((3, 2)))
        with pytest.raises(LayoutError):
            embed(np.eye(2), 5, SpaceLayout((3, 2)))

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.integers(2, 4), min_size=1, max_size=3).filter(lambda d: np.prod(d) <= 64),
        st.data(),
        st.integers(0, 2**31 - 1),
    )
    def test_embed_preserves_spectrum(self, dims, data, seed):
        lay = SpaceLayout(tuple(dims))
        site = data.draw(st.integers(0, len(dims) - 1))
        d = dims[site]
        a = random_op(np.random.default_rng(seed), d, hermitian=True)
        big = np.linalg.eigvalsh(embed(a, site, lay).data)
        small = np.linalg.eigvalsh(a)
        expected = np.sort(np.repeat(small, lay.total_dim // d))
        assert np.allclose(big, expected, atol=1e-9)


class TestCollective:
    lay = SpaceLayout((2, 2, 2, 2))  # cavity with n_max = 1 plus three qubits

    def test_sz_on_100(self):
        v = self.lay.basis_vector(0, "100")
        assert np.allclose(collective_op("S_z", self.lay) @ v, -v)

    def test_s_minus_kills_ground(self):
        v = self.lay.basis_vector(0, "000")
        assert np.allclose(collective_op("S_minus", self.lay) @ v, 0)

    def test_sz_on_s1_span(self):
        idx = [self.lay.basis_index(0, b) for b in ("100", "001", "010")]
        sz = collective_op("S_z", self.lay).data[np.ix_(idx, idx)]
        assert np.array_equal(sz, -np.eye(3))

    def test_hermiticity_and_adjoint(self):
        assert collective_op("S_z", self.lay).is_hermitian()
        assert adjoint(collective_op("S_minus", self.lay)).allclose(collective_op("S_plus", self.lay))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            collective_op("S_x", self.lay)


class TestOperatorAlgebra:
    def test_commutator_self_and_double_adjoint(self):
        rng = np.random.default_rng(1)
        lay = SpaceLayout((2, 3))
        a = Operator(lay, random_op(rng, 6))
        assert np.max(np.abs(commutator(a, a).data)) == 0
        assert adjoint(adjoint(a)).allclose(a)

    def test_layout_mismatch(self):
        with pytest.raises(LayoutError):
            identity(SpaceLayout((2, 3))) + identity(SpaceLayout((3, 2)))
        with pytest.raises(LayoutError):
            Operator(SpaceLayout((2,)), np.eye(3))

    def test_data_is_read_only(self):
        op = identity(SpaceLayout((2,)))
        with pytest.raises(ValueError):
            op.data[0, 0] = 5

    def test_numpy_scalar_multiplication(self):
        op = np.float64(2.0) * identity(SpaceLayout((2,)))
        assert isinstance(op, Operator)
        assert np.array_equal(op.data, 2 * np.eye(2))
