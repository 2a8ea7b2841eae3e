//! Number and CSV formatting.

/// Shortest decimal form of `x` after rounding to 9 significant digits.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    // avoid "-0"
    if rounded == 0.0 {
        "0".into()
    } else {
        rounded.to_string()
    }
}

/// One CSV record, LF-terminated.
pub fn row(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

pub fn num_row(values: &[f64]) -> String {
    row(&values.iter().map(|&v| num(v)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(1.0 / 1.35), "0.740740741");
        assert_eq!(num(0.73625 / 0.875), "0.841428571");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(123456789012.0), "123456789000");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn rows() {
        assert_eq!(num_row(&[0.25, 1.0]), "0.25,1\n");
    }
}
