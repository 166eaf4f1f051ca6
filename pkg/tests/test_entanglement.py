import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import ptchain as pc
from ptchain.errors import (
    DegenerateEigenvalue,
    DisorderPresent,
    ResidualNeedsRegularized,
    UnpairedMode,
)

BC = pc.Prescription.BRANCH_CUT
ABS = pc.Prescription.ABSOLUTE_VALUE
PRIN = pc.Prescription.PRINCIPAL
REG = pc.Prescription.REGULARIZED


def chain(alpha=1, v=1.0, w=1.0, u=0.0, cells=None, boundary="pbc", **kw):
    return pc.ChainSpec(
        alpha=alpha, v=v, w=w, u=u,
        cells=cells if cells is not None else alpha + 3,
        boundary=pc.Boundary(boundary), **kw,
    )


def diag_system(spec):
    sys_ = pc.biorthogonal_diagonalize(pc.build_real_space(spec))
    return sys_, pc.select_half_filling(sys_)


class TestCorrelationMatrix:
    def test_hermitian_dimer(self):
        sys_, occ = diag_system(chain(v=1, w=1e-9, u=0, cells=2, boundary="obc"))
        corr = pc.correlation_matrix(sys_, occ, 1)
        assert_allclose(corr.matrix, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-8)

    def test_whole_system_eigenvalues_are_weights(self):
        sys_, occ = diag_system(chain(v=2, w=1, u=0.5, cells=6))
        corr = pc.correlation_matrix(sys_, occ, 6)
        nu = np.sort(np.linalg.eigvals(corr.matrix).real)
        assert_allclose(nu, np.sort(occ.weights), atol=1e-9)

    def test_trace_is_subsystem_cells(self):
        corr = pc.correlation_k_space(chain(v=2, w=1, u=1, cells=128), 16)
        assert abs(np.trace(corr.matrix) - 16) < 1e-6


class TestCorrelationKSpace:
    def test_matches_real_space_path_gapped(self):
        spec = chain(v=2, w=1, u=0.5, cells=64)
        fast = pc.correlation_k_space(spec, 8)
        sys_, occ = diag_system(spec)
        dense = pc.correlation_matrix(sys_, occ, 8)
        assert np.max(np.abs(fast.matrix - dense.matrix)) < 1e-12
        assert fast.provenance is pc.Provenance.K_SPACE

    def test_matches_real_space_path_near_critical(self):
        # at detuning 1e-4 the dense path is still well enough conditioned
        # to meet the 1e-10 dual-path bound; closer to the exceptional
        # point only the momentum-space path keeps full accuracy
        spec = chain(v=2, w=1, u=1, cells=64, detuning=1e-4)
        fast = pc.correlation_k_space(spec, 8)
        sys_, occ = diag_system(spec)
        dense = pc.correlation_matrix(sys_, occ, 8)
        assert np.max(np.abs(fast.matrix - dense.matrix)) < 1e-10

    def test_critical_eigenvalues_agree_relatively(self):
        # the reference-scale detuning 1e-12: dense-path forward error is
        # set by the near-exceptional conditioning, so compare spectra
        spec = chain(v=2, w=1, u=1, cells=64)
        fast = pc.correlation_k_space(spec, 8).matrix
        sys_, occ = diag_system(spec)
        dense = pc.correlation_matrix(sys_, occ, 8).matrix
        nf = np.linalg.eigvals(fast)
        nd = np.linalg.eigvals(dense)
        scale = np.abs(nf).max()
        d = np.max(np.min(np.abs(nf[None, :] - nd[:, None]), axis=1))
        assert d / scale < 1e-3

    def test_hermitian_case_is_hermitian(self):
        corr = pc.correlation_k_space(chain(v=2, w=1, u=0, cells=32), 8).matrix
        assert np.max(np.abs(corr - corr.conj().T)) < 1e-12

    def test_full_system_is_band_projector(self):
        spec = chain(v=2, w=1, u=0.5, cells=12)
        nu = np.linalg.eigvals(pc.correlation_k_space(spec, 12).matrix)
        assert_allclose(np.sort(nu.real), [0.0] * 12 + [1.0] * 12, atol=1e-9)
        assert np.max(np.abs(nu.imag)) < 1e-9

    def test_rejects_obc_and_disorder(self):
        with pytest.raises(ValueError):
            pc.correlation_k_space(chain(v=1, w=2, u=0.5, boundary="obc"), 2)
        spec = chain(v=1, w=2, u=1, cells=4, detuning=1e-10,
                     disorder=pc.DisorderProfile([0.1, -0.1, 0.2, 0.0]))
        with pytest.raises(DisorderPresent):
            pc.correlation_k_space(spec, 2)


class TestClassifySpectrum:
    def test_reals_in_range(self):
        sp = pc.classify_spectrum(np.array([0.3, 0.7]))
        assert all(l is pc.ModeLabel.REAL_IN_RANGE for l in sp.labels)

    def test_edge_pair(self):
        sp = pc.classify_spectrum(np.array([0.5 + 5j, 0.5 - 5j]))
        assert sp.n_edge_pairs == 1
        assert sp.edge_pair_imags == (5.0,)

    def test_quartet(self):
        nus = np.array([0.6 + 0.3j, 0.6 - 0.3j, 0.4 + 0.3j, 0.4 - 0.3j])
        sp = pc.classify_spectrum(nus)
        assert sp.n_quartets == 1
        assert all(l is pc.ModeLabel.QUARTET for l in sp.labels)

    def test_real_pair_outside_range(self):
        sp = pc.classify_spectrum(np.array([1.25, -0.25, 0.5]))
        labels = set(sp.labels)
        assert pc.ModeLabel.REAL_PAIR in labels
        assert pc.ModeLabel.REAL_IN_RANGE in labels

    def test_residual_ph_pair(self):
        # {nu, 1-nu*} without conjugates
        nus = np.array([0.3 + 0.2j, 0.7 + 0.2j])
        sp = pc.classify_spectrum(nus)
        assert sp.n_residual == 1

    def test_self_paired_edge_without_conjugate(self):
        sp = pc.classify_spectrum(np.array([0.5 + 0.8j, 0.5 + 0.3j, 0.25, 0.75]))
        assert sp.n_residual == 2
        assert sp.n_edge_pairs == 0

    def test_unpaired_leftover(self):
        sp = pc.classify_spectrum(np.array([0.3 + 0.2j, 0.9 - 0.4j]))
        assert sp.n_unpaired >= 1

    def test_degenerate_double_edge_pair(self):
        nus = np.array([0.5 + 2j, 0.5 - 2j, 0.5 + 2j, 0.5 - 2j])
        sp = pc.classify_spectrum(nus)
        assert sp.n_edge_pairs == 2

    def test_labels_partition(self):
        rng = np.random.default_rng(0)
        nus = rng.normal(size=12) + 1j * rng.normal(size=12)
        sp = pc.classify_spectrum(nus)
        assert len(sp.labels) == 12
        covered = sorted(i for g in sp.groups for i in g.indices)
        assert covered == list(range(12))


class TestEntropyClosedForms:
    def test_half_half_prescription_independent(self):
        sp = pc.classify_spectrum(np.array([0.5, 0.5]))
        for presc in (BC, ABS, PRIN, REG):
            val = pc.entropy(sp, presc).value
            assert_allclose(val, 2 * np.log(2), atol=1e-14)

    def test_edge_pair_branch_value(self):
        # I = 1: -2 ln sqrt(1.25) + (4 arctan 2 - 2 pi) - i pi
        sp = pc.classify_spectrum(np.array([0.5 + 1j, 0.5 - 1j]))
        val = pc.entropy(sp, BC).value
        expected_re = -np.log(1.25) + (4 * np.arctan(2.0) - 2 * np.pi)
        assert_allclose(val.real, expected_re, atol=1e-12)
        assert_allclose(val.real, -2.0777339, atol=1e-6)
        assert_allclose(val.imag, -np.pi, atol=1e-15)

    def test_edge_pair_absolute_value(self):
        sp = pc.classify_spectrum(np.array([0.5 + 1j, 0.5 - 1j]))
        val = pc.entropy(sp, ABS).value
        assert_allclose(val, -np.log(1.25), atol=1e-12)
        assert_allclose(val.real, -0.2231436, atol=1e-6)

    def test_edge_pair_abs_branch_difference(self):
        # difference is exactly (4 phi - 2 pi) I per edge pair
        for I in (0.3, 1.0, 7.5, 2000.0):
            sp = pc.classify_spectrum(np.array([0.5 + 1j * I, 0.5 - 1j * I]))
            branch = pc.entropy(sp, BC).value
            absval = pc.entropy(sp, ABS).value
            expected = (4 * np.arctan(2 * I) - 2 * np.pi) * I
            assert_allclose(branch.real - absval.real, expected, rtol=1e-9)

    def test_quartet_branch_real_and_value(self):
        nu = 0.62 + 0.4j
        nus = np.array([nu, np.conj(nu), 1 - nu, 1 - np.conj(nu)])
        sp = pc.classify_spectrum(nus)
        val = pc.entropy(sp, BC).value
        assert val.imag == 0.0
        R, I = nu.real, nu.imag
        r, rho = abs(nu), abs(1 - nu)
        phi, vphi = np.angle(nu), np.angle(1 - np.conj(nu))
        expected = -4 * R * np.log(r) - 4 * (1 - R) * np.log(rho) \
            + 4 * I * (phi + vphi - np.pi)
        assert_allclose(val.real, expected, atol=1e-12)
        # quartet difference from the absolute-value prescription
        absval = pc.entropy(sp, ABS).value
        assert_allclose(val.real - absval.real, 4 * I * (phi + vphi - np.pi),
                        atol=1e-12)

    def test_real_pair_is_real(self):
        sp = pc.classify_spectrum(np.array([1.3, -0.3]))
        val = pc.entropy(sp, BC).value
        expected = -2 * (1.3 * np.log(1.3) + (-0.3) * np.log(0.3))
        assert val.imag == 0.0
        assert_allclose(val.real, expected, atol=1e-12)

    def test_branch_refuses_unpaired(self):
        sp = pc.classify_spectrum(np.array([0.3 + 0.2j, 0.9 - 0.4j]))
        with pytest.raises(UnpairedMode):
            pc.entropy(sp, BC)

    def test_branch_directs_residual_to_regularized(self):
        sp = pc.classify_spectrum(np.array([0.3 + 0.2j, 0.7 + 0.2j]))
        with pytest.raises(ResidualNeedsRegularized):
            pc.entropy(sp, BC)
        out = pc.entropy(sp, REG)
        assert np.isfinite(out.value.real)

    def test_regularized_completes_residual_pair_to_quartet(self):
        nu = 0.3 + 0.2j
        residual = pc.classify_spectrum(np.array([nu, 1 - np.conj(nu)]))
        full = pc.classify_spectrum(
            np.array([nu, np.conj(nu), 1 - nu, 1 - np.conj(nu)])
        )
        half = pc.entropy(residual, REG).value
        whole = pc.entropy(full, BC).value
        assert_allclose(half, whole / 2, atol=1e-12)

    def test_ledger_sums_exactly(self):
        corr = pc.correlation_k_space(chain(v=1, w=2, u=1, cells=128), 20)
        sp = pc.classify_spectrum(np.linalg.eigvals(corr.matrix))
        for presc in (BC, ABS, PRIN, REG):
            out = pc.entropy(sp, presc)
            assert out.value == sum((e.contribution for e in out.ledger), 0j)

    @given(st.floats(0.05, 0.95))
    @settings(max_examples=30, deadline=None)
    def test_real_spectra_prescriptions_agree(self, x):
        sp = pc.classify_spectrum(np.array([x, 1 - x]))
        vals = [pc.entropy(sp, p).value for p in (BC, ABS, PRIN, REG)]
        for v in vals[1:]:
            assert_allclose(v, vals[0], atol=1e-12)


class TestEntanglementEnergies:
    def test_half_gives_zero(self):
        sp = pc.classify_spectrum(np.array([0.5]))
        assert_allclose(pc.entanglement_energies(sp).values, [0.0], atol=0)

    def test_edge_value(self):
        sp = pc.classify_spectrum(np.array([0.5 + 0.5j, 0.5 - 0.5j]))
        eps = pc.entanglement_energies(sp).values
        assert_allclose(sorted(eps, key=lambda z: z.imag),
                        [-1j * np.pi / 2, 1j * np.pi / 2], atol=1e-14)

    def test_real_in_range_gives_real(self):
        sp = pc.classify_spectrum(np.array([0.2, 0.8]))
        eps = pc.entanglement_energies(sp).values
        assert np.max(np.abs(eps.imag)) == 0.0

    def test_degenerate_raises(self):
        sp = pc.classify_spectrum(np.array([0.0, 1.0]))
        with pytest.raises(DegenerateEigenvalue):
            pc.entanglement_energies(sp)

    def test_edge_pairs_match_arctan_form(self):
        corr = pc.correlation_k_space(chain(v=1, w=2, u=1, cells=400), 100)
        sp = pc.classify_spectrum(np.linalg.eigvals(corr.matrix))
        assert sp.n_edge_pairs == 1
        eps = pc.entanglement_energies(sp).values
        for g in sp.groups:
            if g.label is pc.ModeLabel.EDGE_PAIR:
                for idx in g.indices:
                    I = abs(sp.eigenvalues[idx].imag)
                    assert abs(eps[idx].real) < 1e-6
                    assert abs(abs(eps[idx].imag) - 2 * np.arctan(2 * I)) < 1e-9


class TestEntropyProfile:
    def test_pbc_topological_imaginary_plateau(self):
        prof = pc.entropy_profile(chain(v=1, w=2, u=1, cells=256),
                                  [2, 4, 8, 16, 32, 64])
        vals = prof.values
        assert np.all(np.abs(vals.imag + np.pi) < 1e-9)
        assert np.all(prof.n_edge_pairs == 1)

    def test_pbc_trivial_entropy_real(self):
        prof = pc.entropy_profile(chain(v=2, w=1, u=1, cells=256),
                                  [2, 4, 8, 16, 32, 64])
        assert np.max(np.abs(prof.values.imag)) < 1e-9
        assert np.all(prof.n_edge_pairs == 0)

    def test_alpha2_double_plateau(self):
        prof = pc.entropy_profile(chain(alpha=2, v=1, w=2, u=1, cells=256),
                                  [4, 8, 16, 32])
        assert np.all(np.abs(prof.values.imag + 2 * np.pi) < 1e-9)
        assert np.all(prof.n_edge_pairs == 2)

    def test_spectrum_closure_clean_pbc(self):
        # {nu} = {1 - nu*} = {nu*} as multisets
        corr = pc.correlation_k_space(chain(v=1, w=2, u=1, cells=128), 16)
        nu = np.linalg.eigvals(corr.matrix)
        for target in (1 - np.conj(nu), np.conj(nu)):
            d = np.max(np.min(np.abs(nu[None, :] - target[:, None]), axis=1))
            assert d < 1e-7

    def test_obc_needs_regularized(self):
        spec = chain(v=2, w=1, u=1, cells=64, boundary="obc")
        with pytest.raises((ResidualNeedsRegularized, UnpairedMode)):
            pc.entropy_profile(spec, [8, 16], BC)
        prof = pc.entropy_profile(spec, [8, 16], REG)
        assert np.all(np.isfinite(prof.values.real))
