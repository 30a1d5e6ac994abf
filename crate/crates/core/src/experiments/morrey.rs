//! Morrey–Campanato weights on the concentration set: the paraboloid
//! condition `1/p ≤ 2α/(n+1)`.

use serde::{Deserialize, Serialize};

use super::fit::fit_logs;
use super::report::{ExperimentReport, Gate};
use crate::error::{Error, Result};
use crate::lattice::build_lattice;
use crate::measures::{mc_norm, omega_l2, SearchSpec};
use crate::params::DyadicParams;
use crate::profile::FrequencyProfile;
use crate::propagator::QuadratureSpec;
use crate::rational::{display, is_integer, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyConfig {
    pub n: usize,
    pub alpha: f64,
    /// At least two exponents are needed to locate the threshold.
    pub p: Vec<f64>,
    pub sigma: Rational,
    pub delta_log2: Vec<u32>,
    pub c: Rational,
    pub rho: Rational,
    pub nodes: usize,
    pub quad: QuadratureSpec,
    pub search: SearchSpec,
}

impl MorreyConfig {
    pub fn new(n: usize, alpha: f64, p: Vec<f64>, sigma: Rational, delta_log2: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
        }
        if p.is_empty() || p.iter().any(|&p| !(p >= 1.0) || alpha * p > n as f64 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "every p must satisfy p >= 1 and alpha * p <= n (alpha = {alpha}, p = {p:?})"
            )));
        }
        if sigma <= Rational::from_integer(0) || sigma >= Rational::new(1, 2) {
            return Err(Error::InvalidParameter(format!("sigma = {} must lie in (0, 1/2)", display(&sigma))));
        }
        for &a in &delta_log2 {
            if !is_integer(&(sigma * Rational::from_integer(a as i128))) {
                return Err(Error::NonDyadic(format!("sigma * a = {} * {a} is not an integer", display(&sigma))));
            }
        }
        Ok(Self {
            n,
            alpha,
            p,
            sigma,
            delta_log2,
            c: Rational::new(1, 40),
            rho: Rational::new(1, 50),
            nodes: 3,
            quad: QuadratureSpec::default(),
            search: SearchSpec::default(),
        })
    }

    /// `(1-σ)(n-1)/2 + σ - 1/2`.
    pub fn expected_left_slope(&self) -> f64 {
        let s = to_f64(&self.sigma);
        (1.0 - s) * (self.n as f64 - 1.0) / 2.0 + s - 0.5
    }

    pub fn expected_f_slope(&self) -> f64 {
        (1.0 - to_f64(&self.sigma)) * (self.n as f64 - 1.0) / 2.0
    }

    /// `min(0, σ(n+1)/p - α)`.
    pub fn expected_norm_slope(&self, p: f64) -> f64 {
        (to_f64(&self.sigma) * (self.n as f64 + 1.0) / p - self.alpha).min(0.0)
    }

    /// `2/(n+1) + (α-1)/((n+1)σ)`.
    pub fn reference_threshold(&self) -> f64 {
        let n1 = self.n as f64 + 1.0;
        2.0 / n1 + (self.alpha - 1.0) / (n1 * to_f64(&self.sigma))
    }
}

pub fn norm_component(p: f64) -> String {
    format!("norm_p{p}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyReport {
    pub report: ExperimentReport,
    /// Largest `1/p` compatible with the data at this `σ`.
    pub threshold: Option<f64>,
}

/// For each `δ`: the left side `‖e^{ix_nΔ}f‖_{L²(Ω)}`, `‖f̂‖₂` and
/// `‖χ_Ω‖_{L^{α,p}}` for every `p`. The weighted estimate needs
/// `2(e_L - e_f) >= e_V(p)`; `e_V` is linear in `1/p` on its negative
/// branch, which locates the threshold.
pub fn run_morrey(cfg: &MorreyConfig) -> Result<MorreyReport> {
    let n = cfg.n;
    let mut rep = ExperimentReport::new("morrey", n);
    rep.param("alpha", cfg.alpha);
    rep.param("p", format!("{:?}", cfg.p));
    rep.param("sigma", display(&cfg.sigma));
    rep.param("c", display(&cfg.c));
    rep.param("rho", display(&cfg.rho));
    for &a in &cfg.delta_log2 {
        let params = DyadicParams::from_sigma(a, &cfg.sigma)?;
        let prof = FrequencyProfile::new(params, 1)?;
        let l = build_lattice(params, 1, n, &cfg.c)?;
        let left = omega_l2(&prof, &l, &cfg.rho, &cfg.quad, cfg.nodes)?.sqrt();
        let f = prof.support_mass_f64().powf((n as f64 - 1.0) / 2.0);
        let w = l.thicken(&cfg.rho)?;
        let s = -(a as i64);
        rep.push(s, "left", left);
        rep.push(s, "f_hat_l2", f);
        for &p in &cfg.p {
            let v = mc_norm(&w, cfg.alpha, p, &cfg.search)?.value;
            rep.push(s, &norm_component(p), v);
        }
    }
    let e_l = rep.fit("left", Some(cfg.expected_left_slope()))?.fit.slope;
    let e_f = rep.fit("f_hat_l2", Some(cfg.expected_f_slope()))?.fit.slope;
    let mut branch = Vec::new();
    for &p in &cfg.p {
        let e = rep.fit(&norm_component(p), Some(cfg.expected_norm_slope(p)))?.fit.slope;
        if cfg.expected_norm_slope(p) < 0.0 {
            branch.push((1.0 / p, e));
        }
    }
    rep.gates
        .push(Gate::within("left slope", e_l, cfg.expected_left_slope(), 0.05));
    let threshold = if branch.len() >= 2 {
        let m = branch.len() as f64;
        let mx = branch.iter().map(|b| b.0).sum::<f64>() / m;
        let my = branch.iter().map(|b| b.1).sum::<f64>() / m;
        let d = branch.iter().map(|b| (b.0 - mx) * (b.1 - my)).sum::<f64>()
            / branch.iter().map(|b| (b.0 - mx).powi(2)).sum::<f64>();
        let tau = branch.iter().map(|&(ip, e)| ip + (2.0 * (e_l - e_f) - e) / d).sum::<f64>() / m;
        rep.notes.push(format!("measured d e_V / d(1/p) = {d:.6}"));
        rep.notes.push(format!("implied necessary condition at this sigma: 1/p <= {tau:.6}"));
        Some(tau)
    } else {
        rep.notes
            .push("fewer than two exponents on the negative branch; no threshold".into());
        None
    };
    rep.implied_bound = threshold;
    rep.reference_bound = Some(cfg.reference_threshold());
    Ok(MorreyReport { report: rep, threshold })
}

/// `count` multiples of the denominator of `σ`, starting at the first `a`
/// whose lattice has at least `min_times` nonzero time indices, so that
/// the floors in the index bounds no longer distort the counts.
pub fn grid_for(sigma: &Rational, c: &Rational, min_times: u64, count: usize) -> Result<Vec<u32>> {
    let den = *sigma.denom() as u32;
    let mut a = den;
    loop {
        let params = DyadicParams::from_sigma(a, sigma)?;
        if crate::rational::floor_to_u64(&(c * params.delta_power(2, -1))) >= min_times {
            break;
        }
        a += den;
        if a > 120 {
            return Err(Error::InvalidParameter(format!("no grid for sigma = {}", display(sigma))));
        }
    }
    Ok((0..count as u32).map(|i| a + i * den).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSweep {
    pub n: usize,
    pub alpha: f64,
    pub entries: Vec<(Rational, f64)>,
    /// Fit `τ(σ) = A + B/σ`.
    pub a: f64,
    pub b: f64,
    /// `A + 2B`, the limit `σ → 1/2`.
    pub threshold: f64,
    pub reference: f64,
    pub reports: Vec<MorreyReport>,
}

/// Per-σ thresholds `τ(σ)` decrease towards `σ = 1/2`; the strongest
/// condition is the limit, obtained from a fit in `1/σ`.
pub fn sigma_sweep(n: usize, alpha: f64, p: &[f64], runs: &[(Rational, Vec<u32>)]) -> Result<SigmaSweep> {
    let mut entries = Vec::new();
    let mut reports = Vec::new();
    for (sigma, grid) in runs {
        let cfg = MorreyConfig::new(n, alpha, p.to_vec(), *sigma, grid.clone())?;
        let r = run_morrey(&cfg)?;
        let tau = r
            .threshold
            .ok_or_else(|| Error::InvalidParameter(format!("no threshold at sigma = {}", display(sigma))))?;
        entries.push((*sigma, tau));
        reports.push(r);
    }
    let pts: Vec<(f64, f64)> = entries.iter().map(|(s, t)| (1.0 / to_f64(s), *t)).collect();
    // linear, not log-log: reuse the least-squares core on raw values
    let lin = fit_logs(pts)?;
    let (a, b) = (lin.intercept, lin.slope);
    Ok(SigmaSweep {
        n,
        alpha,
        entries,
        a,
        b,
        threshold: a + 2.0 * b,
        reference: 2.0 * alpha / (n as f64 + 1.0),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let cfg = MorreyConfig::new(4, 2.0, vec![1.0, 2.0], Rational::new(1, 4), vec![8, 12]).unwrap();
        assert_eq!(cfg.expected_left_slope(), 0.875);
        assert_eq!(cfg.expected_f_slope(), 1.125);
        assert_eq!(cfg.expected_norm_slope(2.0), -1.375);
        assert!((cfg.reference_threshold() - 0.4 - 0.8).abs() < 1e-12);
        assert!(MorreyConfig::new(4, 2.0, vec![3.0], Rational::new(1, 4), vec![]).is_err());
        assert!(MorreyConfig::new(4, 2.0, vec![1.0], Rational::new(1, 4), vec![10]).is_err());
        let c = Rational::new(1, 40);
        assert_eq!(grid_for(&Rational::new(1, 4), &c, 12, 3).unwrap(), vec![20, 24, 28]);
        assert_eq!(grid_for(&Rational::new(1, 5), &c, 12, 3).unwrap(), vec![15, 20, 25]);
        assert_eq!(grid_for(&Rational::new(1, 3), &c, 12, 3).unwrap(), vec![27, 30, 33]);
    }
}
