"""PT-symmetric gain/loss free-fermion chains: spectra, complex entanglement
entropy with branch resolution, topological diagnostics, and finite-size
scaling fits."""

from .edge import (
    BoundState,
    EdgeRootSet,
    continuum_edge_roots,
    interface_continuum,
    interface_density,
    interface_lattice_solve,
)
from .entanglement import (
    ComplexEntropy,
    CorrelationMatrix,
    EntanglementEnergies,
    EntanglementSpectrum,
    EntropyProfile,
    ModeLabel,
    Prescription,
    Provenance,
    ToleranceSet,
    classify_spectrum,
    correlation_k_space,
    correlation_matrix,
    entanglement_energies,
    entropy,
    entropy_profile,
)
from .fits import (
    EnsembleStats,
    FitResult,
    FixedCount,
    UntilRMSE,
    UntilSSE,
    casimir_energy_table,
    casimir_fit,
    cc_fit_obc,
    cc_fit_pbc,
    disorder_ensemble,
)
from .lattice import (
    Boundary,
    ChainSpec,
    DisorderProfile,
    InterfaceSpec,
    PTClass,
    bloch_hamiltonian,
    build_interface,
    build_real_space,
    classify_pt,
    dispersion,
    min_abs_vk,
    vk,
)
from .spectral import (
    BiorthogonalSystem,
    DensityProfile,
    OccupationSet,
    biorthogonal_diagonalize,
    density_profile,
    ground_state_energy,
    half_filling_weights,
    occupied_correlation,
    ph_pairing_residual,
    select_half_filling,
)
from .topology import (
    SymmetryReport,
    TopologyResult,
    characterize,
    symmetry_closure,
    winding_number,
    zak_phase,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
