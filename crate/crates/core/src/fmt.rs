//! Fixed text formatting for reproducible output files.

/// 17 significant digits in scientific notation; round-trips every f64.
/// Negative zero prints as zero.
pub fn float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}
