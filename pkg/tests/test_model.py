import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holodfs.hilbert import LayoutError, SpaceLayout, collective_op, commutator
from holodfs.holonomy import ParameterError, dark_bright, gate_params
from holodfs.model import (
    DriveSpec,
    PairDrive,
    PhysicalParams,
    build_interaction,
    effective_coupling,
    effective_hamiltonian,
    effective_pair_hamiltonian,
    h1_dfs,
    h2_dfs,
    h2_parts,
    interaction_hamiltonian,
    mhz,
    pair_hamiltonian,
    single_qubit_pairs,
    stark_compensation,
    to_mhz,
    two_qubit_pairs,
)

TWO = SpaceLayout.cavity_qubits(2, 2)


def test_mhz_roundtrip():
    assert mhz(1000.0) == pytest.approx(2 * np.pi)
    assert to_mhz(mhz(3.3)) == pytest.approx(3.3)


class TestParams:
    def test_defaults(self):
        p = PhysicalParams()
        assert to_mhz(p.g) == pytest.approx(50.0)
        assert to_mhz(p.delta) == pytest.approx(1000.0)
        assert p.rate_multipliers == (0.8, 1.0, 1.2)

    def test_negative_rate_rejected(self):
        with pytest.raises(ParameterError):
            PhysicalParams(kappa=-1.0)

    def test_hierarchy_warns(self):
        with pytest.warns(UserWarning):
            PhysicalParams(g=mhz(200)).check_hierarchy()
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert PhysicalParams().check_hierarchy() == []


class TestEffectiveCoupling:
    def test_formula_value(self):
        # G*Omega*(1/(Delta+delta) + 1/Delta) in MHz: 1000*500*(1/9000 + 1/8000)
        expected = 1000 * 500 * (1 / 9000 + 1 / 8000)
        assert to_mhz(effective_coupling(PhysicalParams(), +1)) == pytest.approx(expected)
        assert expected == pytest.approx(118.0556, abs=1e-4)

    def test_small_delta_limit(self):
        p = PhysicalParams(delta=mhz(1e-6))
        assert effective_coupling(p, 1) == pytest.approx(2 * p.G * p.Omega_L / p.Delta, rel=1e-9)

    def test_zero_laser(self):
        assert effective_coupling(PhysicalParams(Omega_L=0.0), -1) == 0.0

    def test_divergence_guard(self):
        with pytest.raises(ParameterError):
            effective_coupling(PhysicalParams(Delta=mhz(1000), delta=mhz(1000)), -1)


class TestInteraction:
    def test_matrix_element_at_t0(self):
        g = 0.3
        drive = DriveSpec(1, g, 2.0, np.pi / 3)
        h = interaction_hamiltonian(TWO, [drive], 0.0).data
        for n in range(2):
            row = TWO.basis_index(n, "10")
            col = TWO.basis_index(n + 1, "00")
            assert h[row, col] == pytest.approx(g * np.sqrt(n + 1) * np.exp(1j * np.pi / 3))

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-50, 50), st.integers(0, 2**31 - 1))
    def test_hermitian_any_time(self, t, seed):
        rng = np.random.default_rng(seed)
        drives = [DriveSpec(q, rng.uniform(0.1, 1), rng.choice([-1, 1]) * 2.0, rng.uniform(-3, 3)) for q in (1, 2, 1)]
        h = interaction_hamiltonian(TWO, drives, t).data
        assert np.max(np.abs(h - h.conj().T)) < 1e-14

    def test_periodicity(self):
        delta = 2.0
        drives = [DriveSpec(1, 0.2, delta, 0.1), DriveSpec(2, 0.3, -delta, 0.7)]
        ham = build_interaction(TWO, drives)
        for t in (0.0, 0.37, 5.1):
            assert np.allclose(ham(t + 2 * np.pi / delta), ham(t), atol=1e-13)

    def test_invalid_site(self):
        with pytest.raises(LayoutError):
            interaction_hamiltonian(TWO, [DriveSpec(3, 0.1, 1.0)], 0.0)
        with pytest.raises(ParameterError):
            DriveSpec(1, 0.0, 1.0)

    def test_pair_rejects_same_qubit(self):
        with pytest.raises(ParameterError):
            PairDrive(1, 1, 0.1, 1)


class TestStarkCompensation:
    g, delta = 0.2, 4.0
    pair = PairDrive(1, 2, g, +1)

    def shift(self, n, bits):
        comp = stark_compensation(TWO, self.pair, self.delta).data
        i = TWO.basis_index(n, bits)
        return -comp[i, i].real  # the uncompensated level shift

    def test_excited_qubit_in_vacuum(self):
        assert self.shift(0, "10") == pytest.approx(self.g ** 2 / self.delta)

    def test_ground_qubits_one_photon(self):
        # both qubits in |0> see -g^2/delta * 1 photon each
        assert self.shift(1, "00") == pytest.approx(-2 * self.g ** 2 / self.delta)

    def test_sign_follows_detuning(self):
        minus = stark_compensation(TWO, PairDrive(1, 2, self.g, -1), self.delta)
        assert minus.allclose(-1 * stark_compensation(TWO, self.pair, self.delta))

    def test_zero_delta(self):
        with pytest.raises(ParameterError):
            stark_compensation(TWO, self.pair, 0.0)


class TestEffectivePair:
    g, delta = 0.2, 4.0

    def test_flip_flop_element(self):
        h = effective_pair_hamiltonian(TWO, PairDrive(1, 2, self.g, +1), self.delta).data
        i01, i10 = TWO.basis_index(0, "01"), TWO.basis_index(0, "10")
        assert h[i01, i10] == pytest.approx(self.g ** 2 / self.delta)

    def test_annihilates_00_and_11(self):
        h = effective_pair_hamiltonian(TWO, PairDrive(1, 2, self.g, -1, 0.4), self.delta)
        for bits in ("00", "11"):
            assert np.allclose(h @ TWO.basis_vector(0, bits), 0)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_single_excitation_spectrum(self, sign):
        h = effective_pair_hamiltonian(TWO, PairDrive(1, 2, self.g, sign, 1.1, 0.2), self.delta).data
        idx = [TWO.basis_index(0, "10"), TWO.basis_index(0, "01")]
        ev = np.linalg.eigvalsh(h[np.ix_(idx, idx)])
        assert np.allclose(ev, [-self.g ** 2 / self.delta, self.g ** 2 / self.delta])

    def test_identity_on_cavity(self):
        h = effective_pair_hamiltonian(TWO, PairDrive(1, 2, self.g, 1), self.delta).data
        blocks = [h[4 * n:4 * n + 4, 4 * n:4 * n + 4] for n in range(3)]
        assert np.allclose(blocks[0], blocks[1]) and np.allclose(blocks[0], blocks[2])


class TestH1:
    def test_equal_couplings(self):
        g, delta = mhz(50), mhz(1000)
        lam, theta = gate_params(g, g, delta)
        assert theta == pytest.approx(np.pi / 2)
        assert lam == pytest.approx(np.sqrt(2) * g ** 2 / delta)
        assert to_mhz(lam) == pytest.approx(3.5355, abs=1e-4)

    def test_g23_zero(self):
        h = h1_dfs(0.3, 0.0, 1.0, 0.6).data
        lam = 0.09
        assert h[2, 0] == pytest.approx(lam * np.exp(0.6j))
        assert abs(h[2, 1]) < 1e-16
        assert np.allclose(h, h.conj().T)

    def test_degenerate(self):
        with pytest.raises(ParameterError):
            h1_dfs(0.0, 0.0, 1.0, 0.0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.05, 1), st.floats(0.05, 1), st.floats(-np.pi, np.pi))
    def test_spectrum_and_dark_state(self, g12, g23, phi):
        h = h1_dfs(g12, g23, 1.0, phi).data
        lam, theta = gate_params(g12, g23, 1.0)
        assert np.allclose(h, h.conj().T)
        assert np.allclose(np.linalg.eigvalsh(h), [-lam, 0, lam], atol=1e-12)
        dark, _ = dark_bright(theta, phi)
        assert np.allclose(h @ np.append(dark, 0), 0, atol=1e-12)

    def test_matches_compensated_pairs(self):
        p = PhysicalParams()
        theta, phi = 1.1, 0.3
        pairs = single_qubit_pairs(theta, phi, p.g)
        lay = SpaceLayout.cavity_qubits(1, 3)
        idx = [lay.basis_index(0, b) for b in ("100", "001", "010")]
        h_pairs = effective_hamiltonian(lay, pairs, p.delta).data[np.ix_(idx, idx)]
        h1 = h1_dfs(pairs[0].g_mn, pairs[1].g_mn, p.delta, phi).data
        assert np.max(np.abs(h_pairs - h1)) < 1e-12
        assert gate_params(pairs[0].g_mn, pairs[1].g_mn, p.delta)[1] == pytest.approx(theta)


class TestH2:
    def test_parts_commute(self):
        ha, hb = h2_parts(0.9, 0.4)
        assert np.max(np.abs(commutator(ha, hb).data)) == 0

    def test_equal_couplings_angle(self):
        assert gate_params(0.2, 0.2, 1.0)[1] == pytest.approx(np.pi / 2)

    def test_logical_null_space(self):
        vt, phi = 0.9, 0.4
        h = h2_dfs(0.2 * np.sqrt(np.tan(vt / 2)), 0.2, 1.0, phi).data
        # null space of the logical -> ancilla coupling block
        coupling = h[4:, :4]
        _, s, vh = np.linalg.svd(coupling)
        null = vh[np.sum(s > 1e-12):].conj().T
        assert null.shape[1] == 2
        c, sn = np.cos(vt / 2), np.sin(vt / 2)
        dark_a = np.array([c, sn * np.exp(1j * phi), 0, 0])
        dark_b = np.array([0, 0, sn * np.exp(-1j * phi), c])
        for d in (dark_a, dark_b):
            assert np.linalg.norm(null @ (null.conj().T @ d) - d) < 1e-12

    def test_matches_compensated_pairs(self):
        p = PhysicalParams()
        vt, phi = 0.8, 0.5
        pairs = two_qubit_pairs(vt, phi, p.g)
        lay = SpaceLayout.cavity_qubits(1, 6)
        bits = ("100100", "100001", "001100", "001001", "101000", "000101")
        idx = [lay.basis_index(0, b) for b in bits]
        h_pairs = effective_hamiltonian(lay, pairs, p.delta).data[np.ix_(idx, idx)]
        h2 = h2_dfs(pairs[0].g_mn, pairs[1].g_mn, p.delta, phi).data
        assert np.max(np.abs(h_pairs - h2)) < 1e-12


def test_full_model_conserves_excitation():
    p = PhysicalParams()
    lay = SpaceLayout.cavity_qubits(2, 3)
    ham = pair_hamiltonian(lay, single_qubit_pairs(np.pi / 3, 0.2, p.g), p.delta)
    a = np.diag(np.sqrt([1.0, 2.0]), 1)
    n_op = np.kron(a.T @ a, np.eye(8)) + collective_op("S_z", lay).data / 2 + 1.5 * np.eye(24)
    assert np.max(np.abs(ham(0.123) @ n_op - n_op @ ham(0.123))) < 1e-12
