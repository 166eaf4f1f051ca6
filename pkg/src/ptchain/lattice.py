"""Chain specifications and Hamiltonian constructors.

The model family is a two-band free-fermion chain with balanced on-site
gain/loss ``+iu`` (A sublattice) / ``-iu`` (B sublattice) and real hoppings
whose momentum-space off-diagonal is

    v_k = v exp(-i (alpha-1) k) - w exp(-i alpha k).

``alpha = 1`` is the ordinary gain/loss SSH chain; higher ``alpha`` adds
longer hopping legs while keeping the bulk dispersion
``E_k = +-sqrt(|v_k|^2 - u^2)`` unchanged.

Real-space conventions, fixed here once and consumed by every other module:

* site ordering is cell-major: ``A(1), B(1), A(2), B(2), ...``;
* the diagonal carries ``+i u(x)`` on A and ``-i u(x)`` on B;
* ``v(x)`` couples ``A(i) <-> B(i + alpha - 1)``;
* ``-w`` couples ``A(i) <-> B(i + alpha)`` (the minus sign makes the Bloch
  cross-checks against v_k sign-exact);
* PBC wraps cell indices modulo L, OBC drops out-of-range legs.

Disorder follows the single validated channel: one offset per cell with
``v(x) = v + delta(x)`` and ``u(x) = u - delta(x) - detuning``, which keeps
every cell on its critical line and preserves global PT symmetry.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DisorderPresent, SpecTooSmall, UnsupportedCouplings

#: Width of the band used to call a spec critical, |min_k |v_k|| - u_eff.
TOL_CRIT = 1e-9

#: Default detuning applied when a spec sits on a critical line. Keeps the
#: gap-closing momentum a safe distance from the exceptional point where
#: correlation eigenvalues diverge.
CRITICAL_DETUNING = 1e-12


class Boundary(enum.Enum):
    PBC = "pbc"
    OBC = "obc"


class PTClass(enum.Enum):
    SYMMETRIC = "symmetric"
    CRITICAL = "critical"
    BROKEN = "broken"


@dataclass(frozen=True)
class DisorderProfile:
    """Per-cell offsets delta(x) for the anticorrelated v/u channel."""

    offsets: np.ndarray

    def __post_init__(self):
        arr = np.array(self.offsets, dtype=float, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "offsets", arr)

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class ChainSpec:
    """Complete description of one chain instance.

    Parameters
    ----------
    alpha : int
        Hopping range (>= 1).
    v, w : float
        Intra-type and inter-type coupling amplitudes.
    u : float
        Strength of the imaginary staggered potential, >= 0.
    cells : int
        Number of unit cells L (two sites each).
    boundary : Boundary
        Periodic or open ends.
    disorder : DisorderProfile, optional
        Per-cell offsets; presence disables all momentum-space paths.
    detuning : float, optional
        Amount subtracted from u so that u_eff = u - detuning. ``None``
        resolves to ``CRITICAL_DETUNING`` when the clean spec sits on a
        critical line (within ``TOL_CRIT``) and to 0 otherwise.
    """

    alpha: int = 1
    v: float = 1.0
    w: float = 1.0
    u: float = 0.0
    cells: int = 2
    boundary: Boundary = Boundary.PBC
    disorder: DisorderProfile | None = None
    detuning: float | None = field(default=None)

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.cells < self.alpha + 1:
            raise SpecTooSmall(
                f"cells={self.cells} cannot host hopping range alpha={self.alpha}; "
                f"need cells >= {self.alpha + 1}"
            )
        if self.u < 0:
            raise ValueError(f"u must be >= 0, got {self.u}")
        if self.detuning is None:
            object.__setattr__(self, "detuning", self._auto_detuning())
        if self.detuning < 0:
            raise ValueError(f"detuning must be >= 0, got {self.detuning}")
        if self.u - self.detuning < 0:
            raise ValueError(
                f"u_eff = u - detuning = {self.u - self.detuning} must be >= 0"
            )
        if self.disorder is not None:
            if len(self.disorder) != self.cells:
                raise ValueError(
                    f"disorder has {len(self.disorder)} offsets for {self.cells} cells"
                )
            bound = min(self.v, self.u)
            if np.max(np.abs(self.disorder.offsets)) >= bound:
                raise ValueError(
                    f"disorder offsets must satisfy |delta| < min(v, u) = {bound}"
                )

    def _auto_detuning(self) -> float:
        if self.u <= 0:
            return 0.0
        if abs(min_abs_vk(self) - self.u) <= TOL_CRIT:
            return CRITICAL_DETUNING
        return 0.0

    @property
    def u_eff(self) -> float:
        return self.u - self.detuning

    @property
    def n_sites(self) -> int:
        return 2 * self.cells

    @property
    def is_translation_invariant(self) -> bool:
        return self.disorder is None

    def require_translation_invariant(self, what: str) -> None:
        if not self.is_translation_invariant:
            raise DisorderPresent(f"{what} requires a disorder-free chain")


@dataclass(frozen=True)
class InterfaceSpec:
    """Hermitian chain (left) joined to a gain/loss chain (right).

    The left block is an ordinary SSH chain with couplings (v1, w); the
    right block carries (v2, w) plus the staggered +-iu potential. A single
    w bond joins the two blocks and the outer ends are open. The right side
    is normally placed on its topological critical line u = w - v2.
    """

    v1: float
    v2: float
    w: float
    u: float
    cells_left: int = 20
    cells_right: int = 20

    def __post_init__(self):
        if self.cells_left < 2 or self.cells_right < 2:
            raise SpecTooSmall("interface needs at least 2 cells per side")
        if self.u < 0:
            raise ValueError(f"u must be >= 0, got {self.u}")

    @property
    def cells(self) -> int:
        return self.cells_left + self.cells_right

    @property
    def n_sites(self) -> int:
        return 2 * self.cells


def vk(spec: ChainSpec, k) -> np.ndarray | complex:
    """Off-diagonal Bloch amplitude v_k, vectorized over k."""
    k = np.asarray(k, dtype=float)
    a = spec.alpha
    out = spec.v * np.exp(-1j * (a - 1) * k) - spec.w * np.exp(-1j * a * k)
    return out if out.ndim else complex(out)


def bloch_hamiltonian(spec: ChainSpec, k: float) -> np.ndarray:
    """2x2 momentum-space Hamiltonian [[i u_eff, v_k], [v_k*, -i u_eff]]."""
    spec.require_translation_invariant("bloch_hamiltonian")
    v = vk(spec, k)
    iu = 1j * spec.u_eff
    return np.array([[iu, v], [np.conj(v), -iu]])


def dispersion(spec: ChainSpec, k: float) -> tuple[complex, complex]:
    """Bulk energies (+E_k, -E_k) with E_k the principal square root of
    |v_k|^2 - u_eff^2: real when |v_k| >= u_eff, positive imaginary
    otherwise."""
    spec.require_translation_invariant("dispersion")
    e = np.sqrt(complex(abs(vk(spec, k)) ** 2 - spec.u_eff**2))
    return complex(e), complex(-e)


def min_abs_vk(spec: ChainSpec) -> float:
    """Minimum of |v_k| over the Brillouin zone.

    |v_k|^2 = v^2 + w^2 - 2 v w cos k is monotone in cos k, so the minimum
    sits at cos k = sign(vw): |v - w| for vw > 0, |v + w| for vw < 0.
    Couplings with v*w <= 0 are outside the validated family and are
    flagged with a warning, not refused.
    """
    if spec.v * spec.w <= 0:
        warnings.warn(
            f"v*w = {spec.v * spec.w} <= 0 lies outside the validated coupling "
            "family; the Brillouin-zone minimum is still exact",
            UnsupportedCouplings,
            stacklevel=2,
        )
        return float(min(abs(spec.v + spec.w), abs(spec.v - spec.w),
                         np.hypot(spec.v, spec.w)))
    return abs(spec.v - spec.w)


def classify_pt(spec: ChainSpec, tol_crit: float = TOL_CRIT) -> PTClass:
    """PT phase of a clean chain from min_k |v_k| against u_eff."""
    spec.require_translation_invariant("classify_pt")
    gap = min_abs_vk(spec) - spec.u_eff
    if gap > tol_crit:
        return PTClass.SYMMETRIC
    if gap < -tol_crit:
        return PTClass.BROKEN
    return PTClass.CRITICAL


def _cell_couplings(spec: ChainSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell (v(x), u(x)) after the disorder rule and detuning."""
    L = spec.cells
    if spec.disorder is None:
        return (np.full(L, spec.v), np.full(L, spec.u_eff))
    d = spec.disorder.offsets
    return (spec.v + d, spec.u - d - spec.detuning)


def build_real_space(spec: ChainSpec) -> np.ndarray:
    """Dense 2L x 2L Hamiltonian in the fixed site convention."""
    if spec.cells < spec.alpha + 1:
        raise SpecTooSmall(
            f"cells={spec.cells} cannot host hopping range alpha={spec.alpha}"
        )
    L = spec.cells
    v_x, u_x = _cell_couplings(spec)
    H = np.zeros((2 * L, 2 * L), dtype=complex)
    H[0::2, 0::2][np.diag_indices(L)] = 1j * u_x
    H[1::2, 1::2][np.diag_indices(L)] = -1j * u_x
    pbc = spec.boundary is Boundary.PBC
    for i in range(L):
        for off, amp in ((spec.alpha - 1, v_x[i]), (spec.alpha, -spec.w)):
            j = i + off
            if j >= L:
                if not pbc:
                    continue
                j -= L
            H[2 * i, 2 * j + 1] += amp
            H[2 * j + 1, 2 * i] += amp
    return H


def build_interface(spec: InterfaceSpec) -> np.ndarray:
    """Dense Hamiltonian of the Hermitian / gain-loss interface chain.

    Inside this geometry the inter-cell leg runs ``B(i) <-> A(i+1)``, the
    orientation in which the interface-pinned mode carries Im E in (0, u);
    the bulk-chain convention of :func:`build_real_space` is its mirror
    image and would flip the sign of the bound-state energy.
    """
    L = spec.cells
    H = np.zeros((2 * L, 2 * L), dtype=complex)
    for i in range(L):
        on_right = i >= spec.cells_left
        vi = spec.v2 if on_right else spec.v1
        H[2 * i, 2 * i + 1] += vi
        H[2 * i + 1, 2 * i] += vi
        if on_right:
            H[2 * i, 2 * i] = 1j * spec.u
            H[2 * i + 1, 2 * i + 1] = -1j * spec.u
        if i + 1 < L:
            H[2 * i + 1, 2 * i + 2] += -spec.w
            H[2 * i + 2, 2 * i + 1] += -spec.w
    return H
