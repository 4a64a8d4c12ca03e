//! CSV rendering of trial records and summaries.
//!
//! Floats use Rust's shortest round-trip formatting, so equal values always
//! produce equal bytes. Magnitudes outside [1e-5, 1e16) switch to exponent
//! notation.

use std::fmt::Write as _;

pub trait CsvRecord {
    fn header() -> &'static str;
    fn write_fields(&self, out: &mut String);
}

pub fn to_csv<T: CsvRecord>(rows: &[T]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(T::header());
    out.push('\n');
    for r in rows {
        r.write_fields(&mut out);
        out.push('\n');
    }
    out
}

/// Append comma-separated `Display` values.
#[macro_export]
macro_rules! csv_fields {
    ($out:expr, $first:expr $(, $rest:expr)* $(,)?) => {{
        $crate::report::push_field($out, &$first, true);
        $( $crate::report::push_field($out, &$rest, false); )*
    }};
}

#[doc(hidden)]
pub fn push_field<T: std::fmt::Display + std::any::Any>(out: &mut String, v: &T, first: bool) {
    if !first {
        out.push(',');
    }
    match (v as &dyn std::any::Any).downcast_ref::<f64>() {
        Some(x) => write_f64(out, *x),
        None => write!(out, "{v}").expect("writing to a String cannot fail"),
    }
}

fn write_f64(out: &mut String, x: f64) {
    let a = x.abs();
    let r =
        if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) { write!(out, "{x:e}") } else { write!(out, "{x}") };
    r.expect("writing to a String cannot fail");
}

/// Quote a field if it contains a comma, quote or newline.
pub fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
