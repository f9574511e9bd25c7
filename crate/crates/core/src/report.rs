//! Plain-text table output shared by the experiment drivers.

use crate::scalar::Real;

/// C-style `%.6e` formatting: `1.684735e-05`, `-3.000000e+00`.
pub fn sci<T: Real>(value: T) -> String {
    sci_prec(value.to_f64_lossy(), 6)
}

pub fn sci_prec(value: f64, digits: usize) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{value:.digits$e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Observed convergence order `log2(e_coarse / e_fine)` for a refinement by 2.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Comma-separated table with a fixed header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(sci(1.684735e-05_f64), "1.684735e-05");
        assert_eq!(sci(1.435134_f64), "1.435134e+00");
        assert_eq!(sci(-3.0_f64), "-3.000000e+00");
        assert_eq!(sci(0.0_f64), "0.000000e+00");
        assert_eq!(sci(1.0e123_f64), "1.000000e+123");
        assert_eq!(sci(f64::NAN), "nan");
    }

    #[test]
    fn rates() {
        assert!((rate(8.0, 1.0) - 3.0).abs() < 1e-15);
    }
}
