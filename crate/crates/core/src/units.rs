//! Unit conversions and canonical numeric formatting.

/// Converts m/s to km/h.
pub fn ms_to_kmh(v: f64) -> f64 {
    v * 3.6
}

/// Converts km/h to m/s.
pub fn kmh_to_ms(v: f64) -> f64 {
    v / 3.6
}

/// Formats a value with 6 significant digits.
///
/// This is the single formatting routine used for every numeric attribute
/// and parameter value written into scenario documents, so that re-parsing
/// a document recovers parameter strings bit-exactly.
pub fn fmt_sig(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{value:.decimals$}");
    // Trim trailing zeros but keep at least one digit after the point.
    if s.contains('.') {
        let t = s.trim_end_matches('0');
        let t = t.strip_suffix('.').unwrap_or(t);
        t.to_string()
    } else {
        s
    }
}

/// Formats an integer-valued quantity (lane ids, counts) without a fraction.
pub fn fmt_int(value: i64) -> String {
    value.to_string()
}
