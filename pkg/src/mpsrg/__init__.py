"""Geometric entanglement and renormalization of translation-invariant matrix product states."""

from __future__ import annotations

from .criticality import (
    BetaValue,
    DerivativeEstimate,
    ScalingFit,
    Side,
    beta_function,
    derivative_jump,
    extract_nu,
    one_sided_derivative,
)
from .errors import *  # noqa: F403
from .geometric import (
    AnsatzKind,
    EntanglementReport,
    Method,
    brute_force_geometric,
    dmax_sq,
    entanglement_per_block,
    max_block_spectral_radius,
    total_block_entanglement,
)
from .models import (
    Model,
    ModelPoint,
    catalog_mps,
    catalog_state_vector,
    fidelity_closed_form,
    ground_state_check,
    hamiltonian,
    model1_fixed_point,
    model1_per_block,
    model1_per_block_rederived,
    model2_fixed_point,
    model2_per_block,
)
from .mps import UniformMPS, amplitude, antiferro_ghz_vector, make_uniform_mps, norm_sq, state_vector
from .observables import (
    MixedTransfer,
    TwoSiteDensity,
    concurrence,
    fidelity_per_site,
    finite_chain_rdm,
    mixed_transfer,
    two_site_rdm,
)
from .transfer import (
    CanonicalForm,
    MergedSite,
    SchmidtSpectrum,
    TransferOperator,
    canonical_form,
    dominant_eigenpair,
    dominant_spectrum,
    fixed_point_entanglement,
    fixed_point_entropy,
    fixed_point_spectrum,
    log_trace_power,
    merge_sites,
    rg_step,
    transfer_operator,
)

__version__ = "0.1.0"
