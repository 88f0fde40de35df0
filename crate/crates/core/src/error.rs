use core::fmt;

use alloc::string::String;
use alloc::vec::Vec;

/// Top-level error type for the core numerics.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Parameter record violates an invariant (non-positive conductance, ...).
    InvalidParams(String),
    /// A state or derivative became non-finite during integration.
    NonFiniteState { t: f64 },
    /// Adaptive step size underflowed; the problem is too stiff at the
    /// requested tolerance.
    StepSizeUnderflow { t: f64, h: f64 },
    /// Step budget exhausted before reaching the end of the interval.
    MaxStepsExceeded { t: f64 },
    /// No bursting events found in the search window.
    NoBurstDetected,
    /// Successive period estimates failed to settle; the orbit left the
    /// bursting regime or the tolerance is unattainable.
    PeriodNoConvergence { last_estimates: (f64, f64) },
    /// Requested drive lies outside the bursting operating range.
    OutsideOperatingRange { i_ext: f64 },
    /// Resampled orbit does not close up within the integration tolerance.
    SeamMismatch { max_err: f64, bound: f64 },
    /// Backward adjoint passes did not reach a periodic solution.
    AdjointNoConvergence { change: f64 },
    /// The phase-response normalization drifted too far from constant.
    NormalizationDrift { rel_spread: f64 },
    /// Perturbation too large: halved-kick estimates disagree.
    KickTooLarge { rel_disagreement: f64 },
    /// Coupling-table grid must divide the orbit grid.
    GridMismatch { orbit: usize, table: usize },
    /// More than one nontrivial root of the eta equation on [0, 1/6).
    EtaAssumptionViolation { roots: Vec<f64> },
    /// H'(1/3) == H'(2/3): the stability-ratio bounds are undefined.
    DegenerateDerivatives,
    /// The three coupled-frequency expressions disagree: couplings are not
    /// balanced or the template phases are inconsistent with eta.
    InconsistentFrequency { discrepancy: f64 },
    /// Coupling configuration makes the 6x6 equivalence system singular.
    SingularCouplings { expression: f64 },
    /// |H(2/3 - eta)| too small to divide by.
    DivisionGuard { value: f64 },
    /// Too few burst events per leg to estimate phases.
    InsufficientEvents { leg: usize, found: usize, needed: usize },
    /// Newton continuation lost the branch.
    BranchLost { param: f64 },
    /// A census change could not be isolated to a single saddle-node pair.
    AmbiguousEvent { bracket: (f64, f64) },
    /// Bracket does not contain exactly one census change.
    BadBracket { bracket: (f64, f64) },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            CoreError::NonFiniteState { t } => write!(f, "non-finite state at t = {t}"),
            CoreError::StepSizeUnderflow { t, h } => {
                write!(f, "step size underflow at t = {t} (h = {h:e})")
            }
            CoreError::MaxStepsExceeded { t } => write!(f, "step budget exhausted at t = {t}"),
            CoreError::NoBurstDetected => write!(f, "no burst onsets detected in search window"),
            CoreError::PeriodNoConvergence { last_estimates } => write!(
                f,
                "period estimates did not settle (last: {} and {})",
                last_estimates.0, last_estimates.1
            ),
            CoreError::OutsideOperatingRange { i_ext } => {
                write!(f, "I_ext = {i_ext} outside bursting operating range")
            }
            CoreError::SeamMismatch { max_err, bound } => write!(
                f,
                "orbit seam error {max_err:e} exceeds periodicity bound {bound:e}"
            ),
            CoreError::AdjointNoConvergence { change } => {
                write!(f, "adjoint passes still changing by {change:e}")
            }
            CoreError::NormalizationDrift { rel_spread } => {
                write!(f, "Z. f spread {rel_spread:e} signals insufficient orbit accuracy")
            }
            CoreError::KickTooLarge { rel_disagreement } => {
                write!(f, "kick nonlinearity: halved-kick disagreement {rel_disagreement:e}")
            }
            CoreError::GridMismatch { orbit, table } => {
                write!(f, "table grid {table} does not divide orbit grid {orbit}")
            }
            CoreError::EtaAssumptionViolation { roots } => {
                write!(f, "multiple nontrivial eta roots: {roots:?}")
            }
            CoreError::DegenerateDerivatives => {
                write!(f, "H'(1/3) - H'(2/3) below tolerance; alpha bounds undefined")
            }
            CoreError::InconsistentFrequency { discrepancy } => {
                write!(f, "coupled-frequency expressions disagree by {discrepancy:e}")
            }
            CoreError::SingularCouplings { expression } => write!(
                f,
                "singular coupling configuration: c1 c2 c3 - c1 c6 c7 - c3 c4 c5 = {expression:e}"
            ),
            CoreError::DivisionGuard { value } => {
                write!(f, "|H(2/3 - eta)| = {value:e} too small to divide by")
            }
            CoreError::InsufficientEvents { leg, found, needed } => write!(
                f,
                "leg {leg}: {found} burst cycles found, {needed} required"
            ),
            CoreError::BranchLost { param } => {
                write!(f, "continuation lost the branch near parameter {param}")
            }
            CoreError::AmbiguousEvent { bracket } => write!(
                f,
                "census change not a single pair within [{}, {}]",
                bracket.0, bracket.1
            ),
            CoreError::BadBracket { bracket } => write!(
                f,
                "bracket [{}, {}] does not contain exactly one census change",
                bracket.0, bracket.1
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
