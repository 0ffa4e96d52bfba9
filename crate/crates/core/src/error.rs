//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability or transmission left `[0, 1]`, or a parameter failed its
    /// documented range check.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The observed error rate leaves no gap to the adversary's minimum
    /// guessing error rate; the protocol must abort.
    #[error("no security margin: QBER {qber} is at or above the abort threshold {threshold}")]
    NoSecurityMargin { qber: f64, threshold: f64 },

    /// Verification thresholds must satisfy `E < s_a < s_v < P_e < 1/2`.
    #[error("threshold ordering violated: {0}")]
    ThresholdOrdering(String),

    /// Zero coincidence counts: the closed-form initial guess is undefined.
    #[error("insufficient statistics: no coincidence counts")]
    InsufficientStatistics,

    /// Not enough sifted key material to provision the requested signature.
    #[error("insufficient key material: need {needed} sifted bits, have {available}")]
    InsufficientKey { needed: usize, available: usize },

    /// Cross-correlation found no peak above the significance threshold;
    /// the streams are likely desynchronized.
    #[error("no significant correlation peak (max {max:.1} vs floor {floor:.1})")]
    NoSignificantPeak { max: f64, floor: f64 },

    /// A measured transmission ratio exceeded one.
    #[error("inconsistent calibration: transmission {0} exceeds 1")]
    TransmissionAboveUnity(f64),

    /// Malformed timetag stream.
    #[error("tag stream format: {0}")]
    TagFormat(String),

    /// Signature/key length disagreement during verification.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
