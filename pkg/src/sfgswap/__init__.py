"""Fock-space simulation of sum-frequency-generation Bell-state analysis,
entanglement swapping, and device-independent QKD figures of merit."""

from .bell import (
    BellSettings,
    ChshOptimum,
    HeraldedEnsemble,
    Strategy,
    binary_entropy,
    chsh_value,
    dw_key_rate,
    efficiency_threshold,
    ensemble_chsh,
    heralded_ensemble,
    heralded_state_with_dark,
    holevo_chsh,
    optimize_chsh,
    optimize_key_rate,
    qber,
    sfg_gain_threshold,
)
from .detection import (
    AnalyzerSetting,
    CoincidenceEfficiencies,
    DetectorModel,
    click_prob,
    coincidence_prob,
    herald_amplitude_branches,
    herald_projection,
    joint_click_pattern_probs,
    mix_dark_counts,
    threshold_povm,
)
from .efficiency import (
    CrystalParams,
    SfgBenchInputs,
    SpectralProfile,
    fidelity_lower_bound,
    photons_per_pulse,
    sfg_eff_effective,
    sfg_eff_from_counts,
    sfg_eff_theoretical,
    spectral_overlap,
    spectral_overlap_gaussian,
)
from .fock import (
    DEFAULT_NMAX,
    DensityOperator,
    ModeError,
    PureState,
    apply_annihilation,
    apply_creation,
    expectation,
    partial_trace,
    tensor,
    tensor_density,
    two_mode_rotation,
)
from .optics import (
    LossMap,
    SfgParams,
    SourceParams,
    apply_loss,
    apply_sfg_first_order,
    build_swapping_input,
    kraus_parity_check,
    loss_branches,
    qfc_mode_transform,
    sfg_branches,
    tmsv_pair,
)
from .presets import get_preset, presets, swap_params
from .protocols import (
    ExperimentParams,
    QfcReport,
    TeleportReport,
    VisibilityReport,
    error_event_probs,
    error_event_probs_simulated,
    lo_swap,
    qfc_teleport_strong_pump,
    sfg_heralded_branches,
    sfg_heralded_operator,
    sfg_swap,
    teleport,
)

__version__ = "0.1.0"
