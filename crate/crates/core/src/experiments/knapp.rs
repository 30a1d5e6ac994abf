//! The Knapp example for Morrey–Campanato weights: `1/p ≤ 2(α-1)/(n-1)`
//! for `α < 2`.

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Gate};
use crate::error::{Error, Result};
use crate::extension::{knapp_lower_bound, KnappCell};
use crate::measures::{mc_norm, SearchSpec};
use crate::propagator::QuadratureSpec;
use crate::rational::{display, pow2, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappConfig {
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    /// `δ = 2^{-a}` for each entry.
    pub delta_log2: Vec<u32>,
    pub c0: Rational,
    /// Tube sample points per axis.
    pub samples: usize,
    pub quad: QuadratureSpec,
    pub search: SearchSpec,
}

impl KnappConfig {
    pub fn new(n: usize, alpha: f64, p: f64, delta_log2: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
        }
        if !(alpha < 2.0) || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 2)")));
        }
        if !(p >= 1.0) || alpha * p > n as f64 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "need p >= 1 and alpha * p <= n, got p = {p}"
            )));
        }
        if delta_log2.iter().any(|&a| a == 0) {
            return Err(Error::InvalidParameter("delta must be < 1".into()));
        }
        Ok(Self {
            n,
            alpha,
            p,
            delta_log2,
            c0: KnappCell::default_c0(),
            samples: 5,
            quad: QuadratureSpec::default(),
            search: SearchSpec::default(),
        })
    }

    /// `1/p ≤ α/(n-1)`: the long side of the tube dominates the norm.
    pub fn long_branch(&self) -> bool {
        1.0 / self.p <= self.alpha / (self.n as f64 - 1.0)
    }

    pub fn expected_norm_slope(&self) -> f64 {
        if self.long_branch() {
            -2.0 * self.alpha + (self.n as f64 - 1.0) / self.p
        } else {
            -self.alpha
        }
    }

    /// `2(α-1)/(n-1)`.
    pub fn reference_threshold(&self) -> f64 {
        2.0 * (self.alpha - 1.0) / (self.n as f64 - 1.0)
    }
}

/// For each `δ`: `‖g‖₂²`, the minimum of `|ĝdσ|` over the tube, the norm of
/// the tube, and `ratio = min² |tube| / (‖V‖ ‖g‖₂²)`, a lower bound for the
/// constant of the weighted estimate. The estimate can only hold if the
/// ratio stays bounded, i.e. `slope(ratio) >= 0`.
pub fn run_knapp(cfg: &KnappConfig) -> Result<ExperimentReport> {
    let n = cfg.n;
    let mut rep = ExperimentReport::new("knapp", n);
    rep.param("alpha", cfg.alpha);
    rep.param("p", cfg.p);
    rep.param("c0", display(&cfg.c0));
    rep.param("samples", cfg.samples);
    let mut worst_ratio = f64::INFINITY;
    for &a in &cfg.delta_log2 {
        let cell = KnappCell::new(n, pow2(-(a as i32)), cfg.c0)?;
        let g2 = cell.l2_mass();
        let lb = knapp_lower_bound(&cell, cfg.samples, &cfg.quad)?;
        worst_ratio = worst_ratio.min(lb.ratio);
        let vol = cell.tube().volume_f64();
        let norm = mc_norm(cell.tube(), cfg.alpha, cfg.p, &cfg.search)?.value;
        let s = -(a as i64);
        rep.push(s, "g_l2_sq", g2);
        rep.push(s, "tube_min", lb.min_modulus);
        rep.push(s, "tube_volume", vol);
        rep.push(s, "norm", norm);
        rep.push(s, "ratio", lb.min_modulus.powi(2) * vol / (norm * g2));
    }
    let nf = n as f64;
    rep.fit("g_l2_sq", Some(nf - 1.0))?;
    rep.fit("tube_min", Some(nf - 1.0))?;
    rep.fit("tube_volume", Some(-(nf + 1.0)))?;
    let norm_slope = rep.fit("norm", Some(cfg.expected_norm_slope()))?.fit.slope;
    let ratio_expected = nf - 3.0 - (nf - 1.0) - cfg.expected_norm_slope();
    let ratio_slope = rep.fit("ratio", Some(ratio_expected))?.fit.slope;
    rep.reference_bound = Some(cfg.reference_threshold());
    if cfg.long_branch() {
        // slope(ratio) = 2α - 2 - (n-1)/p vanishes at the threshold
        let implied = 1.0 / cfg.p + ratio_slope / (nf - 1.0);
        rep.implied_bound = Some(implied);
        rep.notes.push(format!("implied necessary condition: 1/p <= {implied:.6}"));
        rep.gates
            .push(Gate::within("implied threshold", implied, cfg.reference_threshold(), 0.1));
    } else {
        rep.notes.push(format!(
            "short-side branch: slope(ratio) = {ratio_slope:.4}; the estimate fails for this p when negative"
        ));
    }
    rep.gates
        .push(Gate::within("norm slope", norm_slope, cfg.expected_norm_slope(), 0.1));
    rep.gates.push(Gate::new(
        "tube lower bound",
        worst_ratio >= 0.8,
        format!("smallest min/σ(cell) = {worst_ratio:.6}"),
    ));
    Ok(rep)
}
