//! Fidelities, the clipped log-infidelity and Wasserstein-1 distances.

use serde::{Deserialize, Serialize};

use crate::error::{QptError, Result};
use crate::quantum::channel::ProcessMatrix;
use crate::quantum::matrix::{hermitian_eigen, hermitize, map_eigenvalues, trace_of_product};

pub const XI_MAX: f64 = 5.0;
pub const XI_MIN: f64 = 1.0;
pub const XI_0: f64 = 4.0;

/// Window and reference point of the log-infidelity axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XiWindow {
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_0: f64,
}

impl Default for XiWindow {
    fn default() -> Self {
        XiWindow { xi_min: XI_MIN, xi_max: XI_MAX, xi_0: XI_0 }
    }
}

impl XiWindow {
    pub fn validate(&self) -> Result<()> {
        let ok = self.xi_min > 0.0 && self.xi_min < self.xi_max && (self.xi_min..=self.xi_max).contains(&self.xi_0);
        if !ok {
            return Err(QptError::Config {
                field: "metrics.xi".into(),
                message: format!(
                    "need 0 < xi_min < xi_max and xi_min <= xi_0 <= xi_max, got ({}, {}, {})",
                    self.xi_min, self.xi_max, self.xi_0
                ),
            });
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.xi_max - self.xi_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Std,
    Em,
    Ml,
    Reference,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Std => "std",
            Source::Em => "em",
            Source::Ml => "ml",
            Source::Reference => "reference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelitySample {
    pub fidelity: f64,
    pub q: f64,
    pub source: Source,
}

impl FidelitySample {
    pub fn new(fidelity: f64, source: Source, window: &XiWindow) -> Self {
        FidelitySample { fidelity, q: infidelity_log(fidelity, window.xi_min, window.xi_max), source }
    }
}

/// Process fidelity. Rank-1 targets use `Tr(χ_t χ_e)`; otherwise the Uhlmann
/// fidelity `(Tr √(√χ_t χ_e √χ_t))²` of the unit-trace operators.
pub fn process_fidelity(chi_est: &ProcessMatrix, chi_target: &ProcessMatrix) -> Result<f64> {
    if chi_est.side() != chi_target.side() {
        return Err(QptError::Shape(format!(
            "process matrices have sides {} and {}",
            chi_est.side(),
            chi_target.side()
        )));
    }
    let (vals, _) = hermitian_eigen(chi_target.chi());
    let n = vals.len();
    let f = if n < 2 || vals[n - 2].abs() < 1e-10 {
        trace_of_product(chi_target.chi(), chi_est.chi()).re
    } else {
        let sqrt_t = map_eigenvalues(chi_target.chi(), |v| v.max(0.0).sqrt());
        let inner = hermitize(&(&sqrt_t * chi_est.chi() * &sqrt_t));
        let root: f64 = hermitian_eigen(&inner).0.iter().map(|v| v.max(0.0).sqrt()).sum();
        root * root
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `(d F + 1) / (d + 1)` with `d = 2^N`.
pub fn avg_gate_fidelity(f_chi: f64, n_qubits: usize) -> f64 {
    let d = (1u64 << n_qubits) as f64;
    (d * f_chi + 1.0) / (d + 1.0)
}

/// `log10(1 − F)` clipped to `[−ξ_max, −ξ_min]`.
pub fn infidelity_log(fidelity: f64, xi_min: f64, xi_max: f64) -> f64 {
    let inf = 1.0 - fidelity;
    let q = if inf > 0.0 { inf.log10() } else { f64::NEG_INFINITY };
    q.clamp(-xi_max, -xi_min)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(QptError::Empty("sample list".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(QptError::NonFinite("sample list".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Exact `∫ |C_a − C_b| dq` for two empirical distributions.
pub fn w1_between(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    let mut prev = a[0].min(b[0]);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (next - prev);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// W1 between clipped samples and a delta at `−ξ_0`.
pub fn w1_distance(samples: &[f64], window: &XiWindow) -> Result<f64> {
    window.validate()?;
    let lo = -window.xi_max - 1e-12;
    let hi = -window.xi_min + 1e-12;
    if let Some(x) = samples.iter().find(|x| !(lo..=hi).contains(*x)) {
        return Err(QptError::Validation(format!("sample {x} outside the clip window")));
    }
    w1_between(samples, &[-window.xi_0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    pub iqr_low: f64,
    pub iqr_high: f64,
}

/// Linear-interpolated percentile of sorted data, `p ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(samples: &[f64]) -> Result<DistributionSummary> {
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(DistributionSummary {
        mean,
        std: var.sqrt(),
        median: percentile(&v, 0.5),
        iqr_low: percentile(&v, 0.25),
        iqr_high: percentile(&v, 0.75),
    })
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

pub fn median(samples: &[f64]) -> Result<f64> {
    Ok(percentile(&sorted(samples)?, 0.5))
}
