//! Tab-separated output shared by every exported table.

use crate::scalar::Scalar;

/// Scientific notation with 10 significant digits, C-style exponent
/// (`1.234567890e-03`). Non-finite values print as `nan`/`inf`/`-inf`.
pub fn sci10<T: Scalar>(x: T) -> String {
    let v = x.as_f64();
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.9e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Shortest representation that round-trips, used for grid labels.
pub fn short<T: Scalar>(x: T) -> String {
    let v = x.as_f64();
    if v == 0.0 {
        "0".into()
    } else {
        v.to_string()
    }
}

/// Renders a header plus rows of cells as TSV with a trailing newline.
pub fn render(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}
