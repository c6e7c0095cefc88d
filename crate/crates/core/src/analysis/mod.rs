//! Grand-canonical analysis, finite-size extrapolation and the closed-form
//! single-cell Jaynes-Cummings results used as oracles.

pub mod analytic;
pub mod extrapolate;
pub mod gce;
pub mod phase;

pub use analytic::{
    delta_eps, dressed_lower, effective_u, effective_u_pair, hopping_element, jc_spectrum,
    rabi_splitting, DressedState, JcDoublet,
};
pub use extrapolate::{extrapolate, Extrapolation};
pub use gce::{critical_mus, density_curve, gce_ground, CriticalMus, DensityCurve, DensityRow, GceConfig, GceGround, Plateau};
pub use phase::{
    critical_ratio_estimate, extrapolated_gap, lambda_couplings, lobe_boundaries, phase_diagram_delta,
    phase_diagram_lambda, CriticalRatio, CriticalRatioConfig, GapExtrapolation, LobeBoundary, PhaseConfig, PhasePoint, RatioSide,
};
