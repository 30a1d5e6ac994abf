//! Weighted extension estimates against `η`-dimensional measures: the
//! necessary condition `γ ≤ (η+1)(n-1)/(n+1)`.

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Gate};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, omega_tilde};
use crate::measures::{omega_l2, sup_ball_mass, SearchSpec};
use crate::params::DyadicParams;
use crate::profile::FrequencyProfile;
use crate::propagator::QuadratureSpec;
use crate::rational::{display, is_integer, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperboundConfig {
    pub n: usize,
    pub eta: Rational,
    pub sigma: Rational,
    /// `R = 2^a` for each entry.
    pub r_log2: Vec<u32>,
    pub c: Rational,
    pub rho: Rational,
    /// Gauss–Legendre nodes per cube axis for the left side.
    pub nodes: usize,
    pub quad: QuadratureSpec,
    pub search: SearchSpec,
}

impl UpperboundConfig {
    /// Sets `σ = (n-η)/(n+1)`, where both branches of the ball mass of
    /// `Ω̃` scale alike.
    pub fn new(n: usize, eta: Rational, r_log2: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
        }
        let nr = Rational::from_integer(n as i128);
        let sigma = (nr - eta) / (nr + 1);
        Self::with_sigma(n, eta, sigma, r_log2)
    }

    pub fn with_sigma(n: usize, eta: Rational, sigma: Rational, r_log2: Vec<u32>) -> Result<Self> {
        let nr = Rational::from_integer(n as i128);
        let half = Rational::new(1, 2);
        if eta <= (nr - 1) * half || eta >= nr {
            return Err(Error::InvalidParameter(format!(
                "eta = {} must satisfy (n-1)/2 < eta < n",
                display(&eta)
            )));
        }
        if sigma <= Rational::from_integer(0) || sigma >= half {
            return Err(Error::InvalidParameter(format!("sigma = {} must lie in (0, 1/2)", display(&sigma))));
        }
        for &a in &r_log2 {
            if !is_integer(&(sigma * Rational::from_integer(a as i128))) {
                return Err(Error::NonDyadic(format!(
                    "sigma * a = {} * {a} is not an integer",
                    display(&sigma)
                )));
            }
        }
        Ok(Self {
            n,
            eta,
            sigma,
            r_log2,
            c: Rational::new(1, 40),
            rho: Rational::new(1, 50),
            nodes: 3,
            quad: QuadratureSpec::default(),
            search: SearchSpec::default(),
        })
    }

    pub fn expected_lhs_slope(&self) -> f64 {
        let (n, s) = (self.n as f64, to_f64(&self.sigma));
        -2.0 * (n - 1.0) * (1.0 - s) - s * (n + 1.0)
    }

    /// Exponent of the ball mass: `max(-σ(n+1), η-n)`.
    pub fn expected_ballmass_slope(&self) -> f64 {
        let (n, s, e) = (self.n as f64, to_f64(&self.sigma), to_f64(&self.eta));
        (-s * (n + 1.0)).max(e - n)
    }

    pub fn reference_bound(&self) -> f64 {
        let (n, e) = (self.n as f64, to_f64(&self.eta));
        (e + 1.0) * (n - 1.0) / (n + 1.0)
    }
}

/// For each `R`: `LHS = ∫|e^{iRx_nΔ}f(Rx')|² dμ` with `μ` Lebesgue on
/// `Ω̃`, the ball mass of `Ω̃`, `‖f‖₂²`, and
/// `Q = LHS / (ballmass · ‖f‖₂²)`; the implied bound is `γ ≤ -slope(Q)`.
pub fn run_upperbound(cfg: &UpperboundConfig) -> Result<ExperimentReport> {
    let n = cfg.n;
    let eta = to_f64(&cfg.eta);
    let mut rep = ExperimentReport::new("upperbound", n);
    rep.param("eta", display(&cfg.eta));
    rep.param("sigma", display(&cfg.sigma));
    rep.param("c", display(&cfg.c));
    rep.param("rho", display(&cfg.rho));
    rep.param("nodes", cfg.nodes);
    let mut max_norm: f64 = 0.0;
    for &a in &cfg.r_log2 {
        let params = DyadicParams::from_sigma(a, &cfg.sigma)?;
        let p = FrequencyProfile::new(params, 1)?;
        let l = build_lattice(params, 1, n, &cfg.c)?;
        let r = 2f64.powi(a as i32);
        let lhs = omega_l2(&p, &l, &cfg.rho, &cfg.quad, cfg.nodes)? / r.powi(n as i32);
        let w = omega_tilde(params, 1, n, &cfg.c, &cfg.rho)?;
        let (lo, hi) = w.bounding_box();
        let norm = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        max_norm = max_norm.max(norm);
        let bm = sup_ball_mass(&w, eta, &cfg.search)?;
        let f2 = p.support_mass_f64().powi(n as i32 - 1);
        let single_cube = bm.radius <= 2.0 * to_f64(&cfg.rho) / r;
        rep.notes.push(format!(
            "R=2^{a}: ball mass attained at radius {:.3e} ({} branch)",
            bm.radius,
            if single_cube { "single-cube" } else { "whole-set" }
        ));
        let s = a as i64;
        rep.push(s, "lhs", lhs);
        rep.push(s, "ballmass", bm.value);
        rep.push(s, "f_norm_sq", f2);
        rep.push(s, "q", lhs / (bm.value * f2));
    }
    let (n_f, sig) = (n as f64, to_f64(&cfg.sigma));
    rep.fit("lhs", Some(cfg.expected_lhs_slope()))?;
    rep.fit("ballmass", Some(cfg.expected_ballmass_slope()))?;
    rep.fit("f_norm_sq", Some(-(n_f - 1.0) * (1.0 - sig)))?;
    let q_expected = cfg.expected_lhs_slope() - cfg.expected_ballmass_slope() + (n_f - 1.0) * (1.0 - sig);
    let q_slope = rep.fit("q", Some(q_expected))?.fit.slope;
    rep.implied_bound = Some(-q_slope);
    rep.reference_bound = Some(cfg.reference_bound());
    rep.gates.push(Gate::new(
        "support in unit ball",
        max_norm < 1.0,
        format!("largest |x| on the support of μ: {max_norm:.6}"),
    ));
    let worst = rep.fits.iter().map(|f| f.fit.max_residual).fold(0.0, f64::max);
    rep.gates.push(Gate::new("fit residuals", worst <= 0.1, format!("largest residual {worst:.4}")));
    rep.gates.push(Gate::within(
        "lhs slope",
        rep.slope("lhs").expect("fitted"),
        cfg.expected_lhs_slope(),
        0.1,
    ));
    rep.gates
        .push(Gate::within("implied bound", -q_slope, cfg.reference_bound(), 0.1));
    Ok(rep)
}

/// Entry of a σ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub sigma: Rational,
    pub r_log2: Vec<u32>,
    pub implied_bound: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperboundSweep {
    pub n: usize,
    pub eta: Rational,
    pub entries: Vec<SweepEntry>,
    /// Smallest implied bound over the evaluated `σ`.
    pub best: Option<(Rational, f64)>,
    pub reference_bound: f64,
}

/// The `count` smallest multiples of the denominator of `σ` that are `>= a_min`.
pub fn a_grid(sigma: &Rational, a_min: u32, count: usize) -> Vec<u32> {
    let den = *sigma.denom() as u32;
    let first = a_min.div_ceil(den) * den;
    (0..count as u32).map(|i| first + i * den).collect()
}

/// Runs [`run_upperbound`] for every `σ = i/16`, `0 < i < 8`, skipping
/// those whose largest lattice has more than `max_axis` values on an axis.
pub fn sweep_upperbound(n: usize, eta: Rational, a_min: u32, max_axis: u64) -> Result<UpperboundSweep> {
    let mut entries = Vec::new();
    let mut reference = 0.0;
    for i in 1..8 {
        let sigma = Rational::new(i, 16);
        let grid = a_grid(&sigma, a_min, 3);
        let mut cfg = UpperboundConfig::with_sigma(n, eta, sigma, grid.clone())?;
        reference = cfg.reference_bound();
        let a_max = *grid.last().expect("three entries");
        let largest = DyadicParams::from_sigma(a_max, &sigma)?;
        let times = to_f64(&(cfg.c * largest.delta_power(2, -1)));
        let xs = to_f64(&(cfg.c * largest.delta_power(1, -1)));
        if times.max(xs) > max_axis as f64 {
            entries.push(SweepEntry {
                sigma,
                r_log2: grid,
                implied_bound: None,
                skipped: Some(format!("about {times:.0} times and {xs:.0} positions per axis at R = 2^{a_max}")),
            });
            continue;
        }
        cfg.nodes = 2;
        let rep = run_upperbound(&cfg)?;
        entries.push(SweepEntry {
            sigma,
            r_log2: grid,
            implied_bound: rep.implied_bound,
            skipped: None,
        });
    }
    let best = entries
        .iter()
        .filter_map(|e| e.implied_bound.map(|b| (e.sigma, b)))
        .fold(None, |acc: Option<(Rational, f64)>, v| match acc {
            Some(b) if b.1 <= v.1 => Some(b),
            _ => Some(v),
        });
    Ok(UpperboundSweep {
        n,
        eta,
        entries,
        best,
        reference_bound: reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_checks() {
        let cfg = UpperboundConfig::new(3, Rational::from_integer(2), vec![12, 16]).unwrap();
        assert_eq!(cfg.sigma, Rational::new(1, 4));
        assert_eq!(cfg.reference_bound(), 1.5);
        assert_eq!(cfg.expected_lhs_slope(), -4.0);
        let cfg = UpperboundConfig::new(2, Rational::from_integer(1), vec![]).unwrap();
        assert_eq!(cfg.sigma, Rational::new(1, 3));
        assert!((cfg.reference_bound() - 2.0 / 3.0).abs() < 1e-15);
        assert!(UpperboundConfig::new(2, Rational::from_integer(1), vec![20]).is_err());
        assert!(UpperboundConfig::new(3, Rational::from_integer(1), vec![]).is_err());
        assert_eq!(a_grid(&Rational::new(1, 3), 16, 3), vec![18, 21, 24]);
    }

    #[test]
    fn q_slope_is_the_difference_of_component_slopes() {
        let cfg = UpperboundConfig::new(3, Rational::from_integer(2), vec![8, 12, 16]).unwrap();
        let rep = run_upperbound(&cfg).unwrap();
        let s = |c| rep.slope(c).unwrap();
        assert!((s("q") - (s("lhs") - s("ballmass") - s("f_norm_sq"))).abs() < 1e-10);
        assert!((s("f_norm_sq") + 1.5).abs() < 1e-12);
    }
}
