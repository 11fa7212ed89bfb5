use serde::{Deserialize, Serialize};

use super::fields::GridField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldComparison {
    /// Pearson correlation of log10 values over cells positive in both
    /// fields; `None` when fewer than two such cells exist or either side
    /// is constant there.
    pub log_correlation: Option<f64>,
    /// `mean(b) / mean(a)` over all cells; `None` when `a` is all zero.
    pub bias_ratio: Option<f64>,
    pub n_cells: usize,
    pub n_positive_a: usize,
    pub n_positive_b: usize,
    pub n_joint_positive: usize,
}

impl FieldComparison {
    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x}"));
        format!(
            "log_correlation={}\nbias_ratio={}\nn_cells={}\nn_positive_a={}\nn_positive_b={}\nn_joint_positive={}\n",
            opt(self.log_correlation),
            opt(self.bias_ratio),
            self.n_cells,
            self.n_positive_a,
            self.n_positive_b,
            self.n_joint_positive
        )
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn field_compare(a: &GridField, b: &GridField) -> Result<FieldComparison> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    let (mut la, mut lb) = (Vec::new(), Vec::new());
    for (&x, &y) in a.values.iter().zip(&b.values) {
        if x > 0.0 && y > 0.0 {
            la.push(x.log10());
            lb.push(y.log10());
        }
    }
    let ma = a.mean();
    Ok(FieldComparison {
        log_correlation: pearson(&la, &lb),
        bias_ratio: (ma > 0.0).then(|| b.mean() / ma),
        n_cells: a.values.len(),
        n_positive_a: a.values.iter().filter(|v| **v > 0.0).count(),
        n_positive_b: b.values.iter().filter(|v| **v > 0.0).count(),
        n_joint_positive: la.len(),
    })
}
