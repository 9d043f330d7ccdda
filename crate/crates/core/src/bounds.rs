//! Numeric constants of the CCBF accuracy analysis.
//!
//! These are taken as given; the test suites check them empirically rather
//! than re-deriving them.

/// Lower fill-probability lemma: requires `v >= LOWER_V_PER_TAU * tau`.
pub const LOWER_V_PER_TAU: f64 = 7.042652;
/// Lower fill-probability lemma: requires `u >= LOWER_U_SCALE * s / tau`.
pub const LOWER_U_SCALE: f64 = 0.5184846;
/// Probability floor for filling one more item slot under the lower lemma.
pub const LOWER_FILL_PROB: f64 = 0.956414;

/// Upper fill-probability lemma: requires `v >= UPPER_V_MIN`.
pub const UPPER_V_MIN: f64 = 371.0;
/// Upper fill-probability lemma: requires `v <= UPPER_V_MAX_FRAC * s`.
pub const UPPER_V_MAX_FRAC: f64 = 0.00386;
/// Upper fill-probability lemma: requires `u <= UPPER_U_SCALE * s / v`.
pub const UPPER_U_SCALE: f64 = 3.65151;
/// Probability ceiling for filling one more item slot under the upper lemma.
pub const UPPER_FILL_PROB: f64 = 0.974876;

/// Tipping point upper bound: `tau <= TAU_UPPER_FACTOR * t`.
pub const TAU_UPPER_FACTOR: f64 = 1.0520553;
/// Table bits per epoch complaint (`s >= 96 m`).
pub const BITS_PER_COMPLAINT: u64 = 96;
/// Item-set size per unit of threshold (`v = 7.409 t`).
pub const V_PER_T: f64 = 7.409;
/// User-set scale (`u = 47.31 n / t`).
pub const U_SCALE: f64 = 47.31;
/// False-positive theorem: requires `v <= FP_V_MAX_PER_T * t`.
pub const FP_V_MAX_PER_T: f64 = 8.0;

/// Smallest threshold the parameter recipe supports.
pub const T_MIN: u64 = 50;
/// The recipe requires `t <= n / N_PER_T_MIN`.
pub const N_PER_T_MIN: u64 = 20;

/// False positives are `2^-lambda`-rare below `t - FP_SQRT_COEFF * sqrt(lambda t)`.
pub const FP_SQRT_COEFF: f64 = 2.1;
/// False negatives are `2^-lambda`-rare above
/// `FN_T_COEFF t + FN_LAMBDA_COEFF lambda + FN_SQRT_COEFF sqrt(lambda t)`.
pub const FN_T_COEFF: f64 = 1.1;
pub const FN_LAMBDA_COEFF: f64 = 0.4;
pub const FN_SQRT_COEFF: f64 = 0.7;

/// Relative slack applied when checking the lemma preconditions.
///
/// The analysis constants are printed to 4-7 significant digits, and the
/// recipe's own products land a hair past some of them (for example
/// `0.5184846 * 96 / 1.0520553 = 47.3117 > 47.31`, and `7.409 * 50 = 370.45 < 371`).
pub const PRECONDITION_SLACK: f64 = 0.005;
