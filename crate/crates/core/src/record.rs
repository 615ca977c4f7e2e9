//! Flat result rows and their fixed-width text form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::optimize::{CellOutcome, OptimizationResult};

/// Significant digits in every numeric CSV field.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Quadrature,
    MonteCarlo,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Quadrature => "quadrature",
            Engine::MonteCarlo => "montecarlo",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Engine::Exact),
            "quadrature" => Ok(Engine::Quadrature),
            "montecarlo" => Ok(Engine::MonteCarlo),
            _ => Err(Error::Invalid {
                name: "engine",
                reason: format!("unknown engine {s:?}; expected exact, quadrature or montecarlo"),
            }),
        }
    }
}

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub x: f64,
    pub p_meas: f64,
    pub n: usize,
    pub p_fb: f64,
    pub fidelity: f64,
    pub engine: Engine,
    pub baseline: f64,
    /// Error estimate of a numerical engine: the change between the last two
    /// quadrature rules, or the Monte Carlo standard error. Empty for exact.
    pub tolerance_flag: Option<f64>,
}

impl ResultRecord {
    pub const HEADER: [&'static str; 8] =
        ["x", "pmeas", "n", "pfb", "fidelity", "engine", "baseline", "tolerance_flag"];

    pub fn fields(&self) -> Vec<String> {
        vec![
            format_sig(self.x),
            format_sig(self.p_meas),
            self.n.to_string(),
            format_sig(self.p_fb),
            format_sig(self.fidelity),
            self.engine.to_string(),
            format_sig(self.baseline),
            self.tolerance_flag.map(format_sig).unwrap_or_default(),
        ]
    }
}

/// Decimal (not exponent) notation with [`SIG_DIGITS`] significant digits.
pub fn format_sig(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, v)
}

pub const MAP_HEADER: [&str; 7] = ["x", "pmeas", "best_n", "best_pfb", "fmax", "baseline", "status"];
pub const PER_N_HEADER: [&str; 5] = ["x", "pmeas", "n", "pfb_n", "f_n"];

/// Row of the phase-map file. Failed cells keep their coordinates and
/// baseline and leave the optimum fields empty.
pub fn map_row(cell: &CellOutcome) -> Vec<String> {
    let coords = [format_sig(cell.x), format_sig(cell.p_meas)];
    match &cell.result {
        Ok(r) => {
            let mut row = coords.to_vec();
            row.extend([
                r.best.n.to_string(),
                format_sig(r.best.p_fb_star),
                format_sig(r.best.f_star),
                format_sig(r.baseline),
                "ok".into(),
            ]);
            row
        }
        Err(msg) => {
            let mut row = coords.to_vec();
            row.extend([
                String::new(),
                String::new(),
                String::new(),
                format_sig(crate::oracle::single_qubit_fidelity(cell.x)),
                format!("error: {msg}"),
            ]);
            row
        }
    }
}

/// Rows of the per-`n` file for one cell (none for a failed cell).
pub fn per_n_rows(cell: &CellOutcome) -> Vec<Vec<String>> {
    let Ok(r) = &cell.result else { return Vec::new() };
    per_n_rows_of(r)
}

pub fn per_n_rows_of(r: &OptimizationResult) -> Vec<Vec<String>> {
    r.per_n
        .iter()
        .map(|o| {
            vec![
                format_sig(r.x),
                format_sig(r.p_meas),
                o.n.to_string(),
                format_sig(o.p_fb_star),
                format_sig(o.f_star),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_significant_digits() {
        assert_eq!(format_sig(2.0), "2.00000000000");
        assert_eq!(format_sig(0.22), "0.220000000000");
        assert_eq!(format_sig(0.6739098035592102), "0.673909803559");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(0.99999999999999), "1.00000000000");
        assert_eq!(format_sig(1.5e-5), "0.0000150000000000");
        assert_eq!(format_sig(123.25), "123.250000000");
    }

    #[test]
    fn engine_names_roundtrip() {
        for e in [Engine::Exact, Engine::Quadrature, Engine::MonteCarlo] {
            assert_eq!(e.as_str().parse::<Engine>().unwrap(), e);
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{e}\""));
        }
        assert!("fast".parse::<Engine>().is_err());
    }

    proptest! {
        #[test]
        fn formatted_values_parse_back_to_twelve_digits(v in -1e6f64..1e6) {
            let s = format_sig(v);
            prop_assert!(!s.contains('e'));
            let back: f64 = s.parse().unwrap();
            prop_assert!((back - v).abs() <= 1e-11 * v.abs().max(1e-300));
            let digits = s.trim_start_matches('-').replace('.', "");
            let significant = digits.trim_start_matches('0').len();
            prop_assert!(v == 0.0 || significant == SIG_DIGITS);
        }
    }
}
