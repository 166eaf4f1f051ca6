"""Biorthogonal diagonalization, half filling, and ground-state observables.

For a non-Hermitian single-particle matrix H the working basis is the
biorthogonal pair H R_n = E_n R_n, H^dag L_n = E_n^* L_n with
<L_m|R_n> = delta_mn. The biorthogonal ground state at half filling fills
every mode with Re E < 0; a chain on its critical line additionally hosts
modes at exactly +-iu, which are self-paired under the particle-hole map
E -> -E^* and therefore must each carry occupation 1/2 (the symmetric
"Bell" filling of the two edge states). With those weights the two-point
function is

    C_ij = <G_L| c_i^dag c_j |G_R> = sum_n s_n conj(L_n)_i (R_n)_j,

the convention pinned down by the exact Fock-space oracle in the test
suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import AmbiguousFilling, DefectiveMatrix
from .lattice import Boundary, ChainSpec, build_real_space, vk

#: Post-normalization bound on max |<L_m|R_n> - delta_mn|.
TOL_BIORTH = 1e-9

#: Half-width of the Re E = 0 band used to recognize imaginary edge modes.
TOL_ZERO = 1e-8

#: Eigenvalues closer than this (relative to the spectral radius) are
#: treated as one degenerate block and re-biorthogonalized together.
_CLUSTER_REL = 1e-7


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Energies plus matched left/right eigenvector columns.

    ``left_vectors`` are normalized so that left^dag @ right = identity to
    within ``biorth_residual``.
    """

    energies: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    biorth_residual: float

    @property
    def n(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class OccupationSet:
    """Complex mode occupancies s_n aligned with a BiorthogonalSystem."""

    weights: np.ndarray
    filling: Fraction

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class DensityProfile:
    """Biorthogonal particle densities per site and per cell."""

    site: np.ndarray  # n_{i,a}, length 2L, cell-major A,B ordering
    cell: np.ndarray  # n_i = n_{i,A} + n_{i,B}, length L

    @property
    def site_a(self) -> np.ndarray:
        return self.site[0::2]

    @property
    def site_b(self) -> np.ndarray:
        return self.site[1::2]


def biorthogonal_diagonalize(
    H: np.ndarray, tol_biorth: float = TOL_BIORTH
) -> BiorthogonalSystem:
    """Diagonalize a dense complex matrix into a biorthonormal system.

    Eigenvalues are ordered deterministically by (Re, Im, input index).
    Nearly degenerate eigenvalues are re-biorthogonalized block-wise via the
    overlap matrix; a singular overlap means coalescing eigenvectors and
    raises :class:`DefectiveMatrix` (the matrix sits at an exceptional
    point, typically cured by increasing the spec's detuning).
    """
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise ValueError("Hamiltonian has non-finite entries")
    w, vl, vr = scipy.linalg.eig(H, left=True, right=True)
    order = np.lexsort((np.arange(len(w)), w.imag, w.real))
    E = w[order]
    R = vr[:, order]
    L = vl[:, order]

    scale = max(np.max(np.abs(E)), 1.0)
    tol_cluster = _CLUSTER_REL * scale
    blocks = _cluster_blocks(E, tol_cluster)
    for lo, hi in blocks:
        if hi - lo == 1:
            d = np.vdot(L[:, lo], R[:, lo])
            if abs(d) < 1e-12:
                raise DefectiveMatrix(
                    f"left/right eigenvectors at E={E[lo]:.3e} are orthogonal"
                )
            L[:, lo] /= np.conj(d)
        else:
            M = L[:, lo:hi].conj().T @ R[:, lo:hi]
            sv = np.linalg.svd(M, compute_uv=False)
            if sv[-1] < 1e-10 * sv[0] or sv[-1] == 0.0:
                raise DefectiveMatrix(
                    f"degenerate block at E~{E[lo]:.3e} is defective "
                    f"(overlap condition {sv[0]/max(sv[-1], 1e-300):.1e})"
                )
            # L_blk <- L_blk @ inv(M)^dag  so that  L_blk^dag R_blk = I
            L[:, lo:hi] = L[:, lo:hi] @ np.linalg.inv(M).conj().T
    gram = L.conj().T @ R
    residual = float(np.max(np.abs(gram - np.eye(len(E)))))
    if residual > tol_biorth:
        raise DefectiveMatrix(
            f"biorthogonality residual {residual:.2e} exceeds {tol_biorth:.1e}; "
            "eigenvalue collision beyond tolerance"
        )
    return BiorthogonalSystem(E, R, L, residual)


def _cluster_blocks(E: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Consecutive index ranges of (Re, Im)-sorted eigenvalues closer than tol."""
    blocks = []
    lo = 0
    for i in range(1, len(E) + 1):
        if i == len(E) or abs(E[i] - E[i - 1]) > tol:
            blocks.append((lo, i))
            lo = i
    return blocks


def half_filling_weights(energies: np.ndarray, tol_zero: float = TOL_ZERO) -> np.ndarray:
    """Occupancies s_n at biorthogonal half filling.

    Modes with Re E < -tol_zero are filled, Re E > +tol_zero empty; modes on
    the imaginary axis (|Re E| <= tol_zero, Im E != 0) each take weight 1/2,
    the unique choice compatible with the particle-hole constraint
    s^* + s = 1 for self-paired modes. Real zero modes make the filling
    ambiguous.
    """
    E = np.asarray(energies)
    s = np.zeros(len(E))
    s[E.real < -tol_zero] = 1.0
    on_axis = np.abs(E.real) <= tol_zero
    imaginary = on_axis & (np.abs(E.imag) > tol_zero)
    s[imaginary] = 0.5
    if np.any(on_axis & ~imaginary):
        bad = E[on_axis & ~imaginary]
        raise AmbiguousFilling(
            f"real zero modes {bad} make half filling ambiguous; "
            "detune the spec away from the exact critical point"
        )
    if abs(np.sum(s) - len(E) / 2) > 1e-9:
        raise AmbiguousFilling(
            f"half filling not reached: sum of weights {np.sum(s)} != {len(E) / 2}"
        )
    return s


def select_half_filling(
    sys: BiorthogonalSystem, tol_zero: float = TOL_ZERO
) -> OccupationSet:
    """OccupationSet for the biorthogonal ground state at half filling."""
    s = half_filling_weights(sys.energies, tol_zero)
    return OccupationSet(weights=s, filling=Fraction(1, 2))


def occupied_correlation(sys: BiorthogonalSystem, occ: OccupationSet) -> np.ndarray:
    """Full-system two-point function C = sum_n s_n conj(L_n) R_n^T."""
    return (sys.left_vectors.conj() * occ.weights[None, :]) @ sys.right_vectors.T


def ground_state_energy(spec: ChainSpec, tol_zero: float = TOL_ZERO) -> complex:
    """Half-filled ground-state energy sum_n s_n E_n.

    Clean periodic chains take the momentum-space path: the filled lower
    band contributes -sqrt(|v_k|^2 - u_eff^2) per k_n = 2 pi n / L, and any
    PT-broken momentum contributes zero because its +-i|E| pair is occupied
    half/half. Everything else is dense diagonalization (eigenvalues only).
    """
    if spec.is_translation_invariant and spec.boundary is Boundary.PBC:
        k = 2.0 * np.pi * np.arange(spec.cells) / spec.cells
        e = np.sqrt((np.abs(vk(spec, k)) ** 2 - spec.u_eff**2).astype(complex))
        return complex(-np.sum(e.real))
    E = np.linalg.eigvals(build_real_space(spec))
    s = half_filling_weights(E, tol_zero)
    return complex(np.sum(s * E))


def density_profile(sys: BiorthogonalSystem, occ: OccupationSet) -> DensityProfile:
    """Site and cell densities n_{i,a} = C_ii of the occupied state."""
    # Only the diagonal is needed: C_ii = sum_n s_n conj(L_n)_i (R_n)_i.
    site = np.einsum(
        "in,n,in->i", sys.left_vectors.conj(), occ.weights, sys.right_vectors
    )
    return DensityProfile(site=site, cell=site[0::2] + site[1::2])


def ph_pairing_residual(energies: np.ndarray) -> float:
    """max over modes of the distance from {-E^*} to the spectrum.

    Zero (to numerical accuracy) whenever the pseudo-Hermiticity
    sigma_z H^dag sigma_z = -H holds, disordered chains included.
    """
    E = np.asarray(energies)
    target = -E.conj()
    return float(np.max(np.min(np.abs(E[None, :] - target[:, None]), axis=1)))
