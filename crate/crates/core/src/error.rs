//! Error types shared by all modules.

use thiserror::Error;

/// Errors raised by field construction, diagnostics and evolution.
#[derive(Debug, Error)]
pub enum FlowError {
    /// Grid sizes violate the parity/size preconditions.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A vortex support meets a region where the ambient field does not vanish.
    #[error("quiescence violation: {0}")]
    QuiescenceViolation(String),

    /// Two cutoff windows intersect as y-intervals.
    #[error("window overlap: {0}")]
    WindowOverlap(String),

    /// An embedded vortex leaves its parent's plateau annulus.
    #[error("plateau violation: {0}")]
    PlateauViolation(String),

    /// The vanishing-order certificate required by the Taylor remainder
    /// construction does not hold for the profile.
    #[error("vanishing order not certified: {0}")]
    ConditionNotCertified(String),

    /// Requested contour level lies outside the field range.
    #[error("level out of range: {0}")]
    LevelOutOfRange(String),

    /// An operation that requires a regular level curve got a singular one.
    #[error("curve not regular: {0}")]
    CurveNotRegular(String),

    /// Time step exceeds the advective CFL bound.
    #[error("CFL violation: {0}")]
    CflViolation(String),

    /// The tracked vorticity extremum merged with the background.
    #[error("core lost: {0}")]
    CoreLost(String),

    /// A band or sample set ended up empty.
    #[error("empty selection: {0}")]
    EmptySelection(String),
}
