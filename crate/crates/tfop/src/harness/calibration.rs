//! Constants recorded once from the reference configurations and committed.
//! Later runs must stay within [`CALIBRATION_DRIFT`] of them.

/// Relative drift allowed against a committed constant.
pub const CALIBRATION_DRIFT: f64 = 0.02;

/// Bound ratio `lhs · d / (‖a‖ e^{‖φ''‖})` of the default configuration.
pub const BOUND_RATIO_REFERENCE: f64 = 1.2553387292363538e-7;

/// Mean of `‖K‖_{M²} / ‖a‖_{M²}` over the Kohn–Nirenberg reference family.
pub const KERNEL_SYMBOL_RATIO_REFERENCE: f64 = 1.0;

pub fn drift(value: f64, reference: f64) -> f64 {
    (value / reference - 1.0).abs()
}
