//! File formats: Touchstone v1 traces, calibration-kit and error-term files,
//! and power-sweep manifests.
//!
//! Writers use fixed formatting (12 significant digits, no timestamps in data
//! files) so identical inputs produce byte-identical outputs.

mod calkit;
mod sweep;
mod touchstone;

pub use calkit::{
    load_calkit, load_calkit_str, load_error_terms, load_error_terms_str, save_calkit,
    save_error_terms, write_calkit, write_error_terms,
};
pub use sweep::{load_power_sweep, load_power_sweep_str, PowerTrace};
pub use touchstone::{
    parse_touchstone, write_touchstone, FrequencyUnit, TouchstoneDocument, ValueFormat,
};

/// Fixed scientific rendering, stable across write/parse/write cycles.
/// 13 significant digits keep the worst-case quantization at 5e-13 relative,
/// inside the documented 1e-12 round-trip guarantee.
pub(crate) fn fmt_g12(x: f64) -> String {
    format!("{x:.12e}")
}
