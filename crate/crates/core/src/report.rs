//! Fixed-format numbers and CSV lines shared by every emitter.

/// 17 significant digits in scientific notation; NaN and infinities are
/// spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        "0.0000000000000000e0".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_line<S: AsRef<str>>(fields: &[S]) -> String {
    let mut s = fields
        .iter()
        .map(|f| f.as_ref())
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    s
}

/// Caveats trail the CSV body as `# ` comment lines.
pub fn caveat_lines(caveats: &[String]) -> String {
    caveats.iter().map(|c| format!("# {c}\n")).collect()
}
