//! Ball-mass functionals and Morrey–Campanato norms of box-union weights.
//!
//! Balls are replaced by axis-aligned cubes `Q(x, r)` of half-side `r`.
//! The extremal search runs over a geometric radius grid and over centres
//! drawn from the box centres plus the centroid; `brute_force_sup` is an
//! exhaustive oracle for small instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSet;
use crate::profile::FrequencyProfile;
use crate::propagator::{phase_theta, LineIntegrator, ProgressionSums, QuadratureSpec};
use crate::quadrature::{gauss_legendre, pairwise_sum};
use crate::rational::{to_f64, Rational};
use crate::weight::{BoxUnionWeight, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    /// `sup μ(Q(x,r)) / r^η`.
    BallMass { eta: f64 },
    /// `sup r^{α - n/p} μ(Q(x,r))^{1/p}` for indicator weights.
    Morrey { alpha: f64, p: f64 },
}

impl NormKind {
    pub fn validate(&self, n: usize) -> Result<()> {
        let n = n as f64;
        match *self {
            NormKind::BallMass { eta } => {
                if !(0.0..=n).contains(&eta) {
                    return Err(Error::InvalidParameter(format!("eta = {eta} must lie in [0, n = {n}]")));
                }
            }
            NormKind::Morrey { alpha, p } => {
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
                }
                if !(alpha.is_finite()) || alpha * p > n + 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "alpha * p = {} exceeds n = {n}; the norm of a compactly supported weight is infinite",
                        alpha * p
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective(&self, mass: f64, r: f64, n: usize) -> f64 {
        match *self {
            NormKind::BallMass { eta } => mass / r.powf(eta),
            NormKind::Morrey { alpha, p } => r.powf(alpha - n as f64 / p) * mass.powf(1.0 / p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub radius_ratio: f64,
    /// Local maxima of the coarse grid that get refined.
    pub refine_peaks: usize,
    /// Geometric sub-steps per coarse step on each side of a peak.
    pub refine_steps: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            radius_ratio: std::f64::consts::SQRT_2,
            refine_peaks: 3,
            refine_steps: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormQuery {
    pub kind: NormKind,
    pub search: SearchSpec,
}

impl NormQuery {
    pub fn ball_mass(eta: f64) -> Self {
        Self {
            kind: NormKind::BallMass { eta },
            search: SearchSpec::default(),
        }
    }

    pub fn morrey(alpha: f64, p: f64) -> Self {
        Self {
            kind: NormKind::Morrey { alpha, p },
            search: SearchSpec::default(),
        }
    }

    pub fn with_radius_ratio(mut self, ratio: f64) -> Self {
        self.search.radius_ratio = ratio;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub value: f64,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// `|W ∩ Q(x, r)|`.
pub fn box_mass(w: &BoxUnionWeight, x: &[f64], r: f64) -> f64 {
    w.box_mass(x, r)
}

/// Candidate centres: per axis for product layouts, as points otherwise.
enum Candidates {
    Axes(Vec<Vec<f64>>),
    Points(Vec<Vec<f64>>),
}

fn candidates(w: &BoxUnionWeight) -> Candidates {
    let centroid = w.centroid();
    match w.layout() {
        Layout::Product(axes) => Candidates::Axes(
            axes.iter()
                .zip(&centroid)
                .map(|(a, &g)| {
                    let mut v: Vec<f64> = (0..a.len()).map(|i| a.center_f64(i)).collect();
                    let pos = v.partition_point(|&c| c < g);
                    if v.get(pos) != Some(&g) {
                        v.insert(pos, g);
                    }
                    v
                })
                .collect(),
        ),
        Layout::Explicit(boxes) => {
            let mut pts: Vec<Vec<f64>> = boxes.iter().map(|b| b.center.iter().map(to_f64).collect()).collect();
            pts.push(centroid);
            Candidates::Points(pts)
        }
    }
}

/// Largest mass of a cube of half-side `r` centred at a candidate.
fn best_at_radius(w: &BoxUnionWeight, cands: &Candidates, r: f64) -> (f64, Vec<f64>) {
    match (cands, w.layout()) {
        (Candidates::Axes(per_axis), Layout::Product(axes)) => {
            let mut mass = 1.0;
            let mut center = Vec::with_capacity(axes.len());
            for (axis, cs) in axes.iter().zip(per_axis) {
                let (m, k) = axis.max_mass_over(cs, r);
                mass *= m;
                center.push(cs[k]);
            }
            (mass, center)
        }
        (Candidates::Points(pts), _) => {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (k, x) in pts.iter().enumerate() {
                let m = w.box_mass(x, r);
                if m > best.0 {
                    best = (m, k);
                }
            }
            (best.0, pts[best.1].clone())
        }
        _ => unreachable!("candidates follow the layout"),
    }
}

fn radius_grid(r_min: f64, r_max: f64, ratio: f64) -> Vec<f64> {
    let mut radii = vec![r_min];
    while *radii.last().expect("non-empty") < r_max {
        let next = radii.last().expect("non-empty") * ratio;
        radii.push(next);
    }
    radii
}

/// Extremal search shared by `sup_ball_mass` and `mc_norm`.
///
/// Ties are resolved towards the smaller radius, then the earlier
/// candidate centre.
pub fn search_sup(w: &BoxUnionWeight, query: &NormQuery) -> Result<SupResult> {
    let n = w.dimension();
    query.kind.validate(n)?;
    let s = query.search;
    if !(s.radius_ratio > 1.0) {
        return Err(Error::InvalidParameter(format!("radius ratio {} must exceed 1", s.radius_ratio)));
    }
    let cands = candidates(w);
    let coarse = radius_grid(w.min_halfwidth() / 2.0, w.diameter(), s.radius_ratio);
    let eval = |r: f64| {
        let (mass, center) = best_at_radius(w, &cands, r);
        (query.kind.objective(mass, r, n), r, center)
    };
    let coarse_vals: Vec<(f64, f64, Vec<f64>)> = coarse.par_iter().map(|&r| eval(r)).collect();

    let mut peaks: Vec<usize> = (0..coarse_vals.len())
        .filter(|&i| {
            let v = coarse_vals[i].0;
            let left = i == 0 || coarse_vals[i - 1].0 < v;
            let right = i + 1 == coarse_vals.len() || coarse_vals[i + 1].0 <= v;
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| coarse_vals[b].0.total_cmp(&coarse_vals[a].0).then(a.cmp(&b)));
    peaks.truncate(s.refine_peaks);

    let steps = s.refine_steps.max(1) as i32;
    let fine_radii: Vec<f64> = peaks
        .iter()
        .flat_map(|&i| {
            let r = coarse[i];
            (-steps..=steps)
                .filter(|&j| j != 0)
                .map(move |j| r * s.radius_ratio.powf(j as f64 / steps as f64))
        })
        .collect();
    let fine_vals: Vec<(f64, f64, Vec<f64>)> = fine_radii.par_iter().map(|&r| eval(r)).collect();

    let mut all: Vec<(f64, f64, Vec<f64>)> = coarse_vals.into_iter().chain(fine_vals).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best: Option<&(f64, f64, Vec<f64>)> = None;
    for cand in &all {
        if best.is_none_or(|b| cand.0 > b.0) {
            best = Some(cand);
        }
    }
    let (value, radius, center) = best.cloned().expect("non-empty radius grid");
    Ok(SupResult { value, center, radius })
}

/// `sup_{x, r} μ(Q(x, r)) / r^η`.
pub fn sup_ball_mass(w: &BoxUnionWeight, eta: f64, search: &SearchSpec) -> Result<SupResult> {
    search_sup(
        w,
        &NormQuery {
            kind: NormKind::BallMass { eta },
            search: *search,
        },
    )
}

/// `‖χ_W‖_{L^{α,p}} = sup r^{α - n/p} |W ∩ Q(x, r)|^{1/p}`.
pub fn mc_norm(w: &BoxUnionWeight, alpha: f64, p: f64, search: &SearchSpec) -> Result<SupResult> {
    search_sup(
        w,
        &NormQuery {
            kind: NormKind::Morrey { alpha, p },
            search: *search,
        },
    )
}

/// Oracle evaluation budget.
pub const ORACLE_LIMIT: u128 = 10_000_000;

/// Exhaustive maximization over a uniform centre grid anchored at the lower
/// corner of the bounding box and radii with ratio `2^{1/8}`; masses are
/// summed box by box.
pub fn brute_force_sup(w: &BoxUnionWeight, kind: &NormKind, grid_step: f64) -> Result<SupResult> {
    let n = w.dimension();
    kind.validate(n)?;
    if !(grid_step > 0.0) {
        return Err(Error::InvalidParameter("grid step must be positive".into()));
    }
    let (lo, hi) = w.bounding_box();
    let counts: Vec<u128> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| ((b - a) / grid_step).floor() as u128 + 1)
        .collect();
    let radii = radius_grid(w.min_halfwidth() / 2.0, w.diameter(), 2f64.powf(0.125));
    let centers: u128 = counts.iter().product();
    let evaluations = centers * radii.len() as u128;
    if evaluations > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            evaluations,
            limit: ORACLE_LIMIT,
        });
    }
    let per_center: Vec<(f64, f64, Vec<f64>)> = (0..centers)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let k = idx % counts[i];
                idx /= counts[i];
                x[i] = lo[i] + k as f64 * grid_step;
            }
            let mut best = (f64::NEG_INFINITY, 0.0);
            for &r in &radii {
                let v = kind.objective(w.box_mass_enumerated(&x, r), r, n);
                if v > best.0 {
                    best = (v, r);
                }
            }
            (best.0, best.1, x)
        })
        .collect();
    let mut best = &per_center[0];
    for c in &per_center {
        if c.0 > best.0 {
            best = c;
        }
    }
    Ok(SupResult {
        value: best.0,
        center: best.2.clone(),
        radius: best.1,
    })
}

fn check_lattice(p: &FrequencyProfile, l: &LatticeSet) -> Result<()> {
    if p.params() != l.params() || p.level() != l.level() || l.dilation() != Rational::from_integer(1) {
        return Err(Error::InvalidParameter(
            "profile and undilated lattice must share (delta, sigma, k)".into(),
        ));
    }
    Ok(())
}

/// `S(t) = sum_{x ∈ X_k} ∫_{x-ρ}^{x+ρ} |I(y, t)|² dy` with `nodes`
/// Gauss–Legendre points per cube.
pub fn x_section_l2(p: &FrequencyProfile, l: &LatticeSet, t: f64, rho: f64, q: &QuadratureSpec, nodes: usize) -> f64 {
    let xs = l.x_values();
    let s_max = to_f64(xs.last().expect("non-empty")) + rho;
    let integ = LineIntegrator::new(p, t, s_max, q);
    let rule = gauss_legendre(nodes);
    if l.level() == 1 {
        let period = l.params().delta_power(-1, 0);
        let sums = ProgressionSums::new(p, &integ, &period, xs.len() as u64).expect("δ^{-σ} is a period for level one");
        let parts: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&u, &w)| w * rho * sums.sum_sq(&integ.node_sums(rho * u)))
            .collect();
        pairwise_sum(&parts)
    } else {
        let parts: Vec<f64> = xs
            .iter()
            .map(|x| {
                let x = to_f64(x);
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&u, &w)| w * rho * integ.eval(x + rho * u).norm_sqr())
                    .sum()
            })
            .collect();
        pairwise_sum(&parts)
    }
}

/// `∫_Ω |e^{itΔ}f(x)|² dx dt` over the thickened lattice, by tensor
/// Gauss–Legendre per cube: `sum_t sum_k w_k ρ S(t + ρ τ_k)^{n-1}`.
pub fn omega_l2(p: &FrequencyProfile, l: &LatticeSet, rho: &Rational, q: &QuadratureSpec, nodes: usize) -> Result<f64> {
    check_lattice(p, l)?;
    if nodes == 0 || nodes > 64 {
        return Err(Error::InvalidParameter(format!("cube nodes {nodes} must lie in 1..=64")));
    }
    let rho = to_f64(rho);
    let rule = gauss_legendre(nodes);
    let jobs: Vec<(f64, f64)> = l
        .t_values()
        .iter()
        .flat_map(|t| {
            let t = to_f64(t);
            rule.nodes.iter().zip(&rule.weights).map(move |(&u, &w)| (t + rho * u, w * rho))
        })
        .collect();
    let dims = l.dimension() as i32 - 1;
    let parts: Vec<f64> = jobs
        .par_iter()
        .map(|&(tau, w)| w * x_section_l2(p, l, tau, rho, q, nodes).powi(dims))
        .collect();
    Ok(pairwise_sum(&parts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionMass {
    /// `∫` of `|u(·, t)|²` over the x-cubes of the Ω-section.
    pub section: f64,
    /// `section / ‖f‖₂²`.
    pub raw_ratio: f64,
    /// `section / (|section| (2ρ)^{n-1} (cos(2πΘ) mass)^{2(n-1)})` when the
    /// certificate applies.
    pub benchmark_ratio: Option<f64>,
    pub theta: f64,
}

/// Mass of the solution on the Ω-section at a lattice time `t`.
pub fn section_mass(
    p: &FrequencyProfile,
    l: &LatticeSet,
    t: &Rational,
    rho: &Rational,
    q: &QuadratureSpec,
    nodes: usize,
) -> Result<SectionMass> {
    check_lattice(p, l)?;
    if !l.t_values().contains(t) {
        return Err(Error::InvalidParameter(format!("t = {} is not a lattice time", crate::rational::display(t))));
    }
    if nodes == 0 || nodes > 64 {
        return Err(Error::InvalidParameter(format!("cube nodes {nodes} must lie in 1..=64")));
    }
    let (tf, rf) = (to_f64(t), to_f64(rho));
    let dims = l.dimension() as i32 - 1;
    let section = x_section_l2(p, l, tf, rf, q, nodes).powi(dims);
    let mass = p.support_mass_f64();
    let theta = l
        .x_values()
        .iter()
        .map(|x| phase_theta(p, to_f64(x), tf))
        .fold(0.0, f64::max);
    let count = (l.x_values().len() as f64).powi(dims);
    let benchmark_ratio = (theta < 0.25).then(|| {
        let amp = (std::f64::consts::TAU * theta).cos() * mass;
        section / (count * (2.0 * rf).powi(dims) * amp.powi(2 * dims))
    });
    Ok(SectionMass {
        section,
        raw_ratio: section / mass.powi(dims),
        benchmark_ratio,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, omega_tilde};
    use crate::params::DyadicParams;
    use crate::weight::AxisFamily;

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn homogeneous_ball_mass_of_a_cube() {
        for n in 1..4 {
            let w = BoxUnionWeight::single(vec![q(0, 1); n], vec![q(1, 1); n]).unwrap();
            let s = sup_ball_mass(&w, n as f64, &SearchSpec::default()).unwrap();
            assert!((s.value - 2f64.powi(n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_invariant_morrey_norm() {
        for (n, p) in [(2usize, 1.0), (2, 2.0), (3, 1.5)] {
            let w = BoxUnionWeight::single(vec![q(0, 1); n], vec![q(1, 2); n]).unwrap();
            let s = mc_norm(&w, n as f64 / p, p, &SearchSpec::default()).unwrap();
            assert!((s.value - 1.0).abs() < 1e-12, "{n} {p} {}", s.value);
        }
    }

    #[test]
    fn morrey_rejects_large_alpha_p() {
        let w = BoxUnionWeight::single(vec![q(0, 1); 2], vec![q(1, 2); 2]).unwrap();
        assert!(mc_norm(&w, 2.5, 1.0, &SearchSpec::default()).is_err());
        assert!(mc_norm(&w, 1.0, 0.5, &SearchSpec::default()).is_err());
        assert!(sup_ball_mass(&w, 2.5, &SearchSpec::default()).is_err());
    }

    #[test]
    fn sweep_matches_pointwise_axis_masses() {
        let axis = AxisFamily::uniform((0..20).map(|i| q(i * i, 7)).collect(), q(1, 20)).unwrap();
        let cands: Vec<f64> = (-10..80).map(|i| i as f64 * 0.37).collect();
        for r in [0.01, 0.3, 2.0, 17.0, 100.0] {
            let (m, k) = axis.max_mass_over(&cands, r);
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, &c) in cands.iter().enumerate() {
                let v = axis.mass(c - r, c + r);
                if v > best.0 {
                    best = (v, i);
                }
            }
            assert!((m - best.0).abs() < 1e-12);
            assert_eq!(k, best.1);
        }
    }

    #[test]
    fn search_agrees_with_oracle_on_small_omega_tilde() {
        let params = DyadicParams::new(4, 1).unwrap();
        let w = omega_tilde(params, 1, 2, &q(1, 2), &q(1, 4)).unwrap();
        for eta in [0.5, 1.0, 1.5, 2.0] {
            let fast = sup_ball_mass(&w, eta, &SearchSpec::default()).unwrap();
            let oracle = brute_force_sup(&w, &NormKind::BallMass { eta }, 1.0 / 64.0).unwrap();
            let ratio = fast.value / oracle.value;
            assert!((1.0 / 1.15..=1.15).contains(&ratio), "eta {eta}: {ratio}");
        }
    }

    #[test]
    fn oracle_rejects_large_grids() {
        let w = BoxUnionWeight::single(vec![q(0, 1); 3], vec![q(1, 1); 3]).unwrap();
        assert!(matches!(
            brute_force_sup(&w, &NormKind::BallMass { eta: 1.0 }, 1e-3),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn section_mass_at_time_zero() {
        let params = DyadicParams::new(12, 3).unwrap();
        let p = FrequencyProfile::new(params, 1).unwrap();
        let l = build_lattice(params, 1, 2, &q(1, 40)).unwrap();
        let qs = QuadratureSpec::default();
        let s = section_mass(&p, &l, &q(0, 1), &q(1, 50), &qs, 3).unwrap();
        assert!(s.raw_ratio > 0.0 && s.raw_ratio <= 1.0);
        // closed form at t = 0: I(y, 0) = sum_l e^{2πi y l δ^σ} sin(2πyδ)/(πy)
        let rule = gauss_legendre(20);
        let delta = 2f64.powi(-12);
        let closed = |y: f64| -> f64 {
            let geo: num_complex::Complex64 = (1..=8).map(|l| crate::quadrature::cis_cycles(y * l as f64 / 8.0)).sum();
            let sinc = if y == 0.0 { 2.0 * delta } else { (std::f64::consts::TAU * y * delta).sin() / (std::f64::consts::PI * y) };
            geo.norm_sqr() * sinc * sinc
        };
        let mut expected = 0.0;
        for x in l.x_values() {
            for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                expected += w * 0.02 * closed(to_f64(x) + 0.02 * u);
            }
        }
        let m = p.support_mass_f64();
        assert!((s.section - expected).abs() < 1e-6 * expected, "{} {expected}", s.section);
        assert!((s.raw_ratio - expected / m).abs() < 1e-6 * s.raw_ratio);
        assert!(section_mass(&p, &l, &q(1, 1), &q(1, 50), &qs, 3).is_err());
    }

    #[test]
    fn omega_integral_matches_direct_tensor_quadrature() {
        let params = DyadicParams::new(12, 3).unwrap();
        let p = FrequencyProfile::new(params, 1).unwrap();
        let l = build_lattice(params, 1, 3, &q(1, 40)).unwrap();
        let qs = QuadratureSpec::default();
        let rho = q(1, 50);
        let fast = omega_l2(&p, &l, &rho, &qs, 3).unwrap();
        let rule = gauss_legendre(3);
        let mut direct = 0.0;
        for (x, t) in l.points() {
            for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
                for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
                    for (c, wc) in rule.nodes.iter().zip(&rule.weights) {
                        let pt = [to_f64(&x[0]) + 0.02 * a, to_f64(&x[1]) + 0.02 * b];
                        let u = crate::propagator::solution_at(&p, 3, &pt, to_f64(&t) + 0.02 * c, &qs);
                        direct += wa * wb * wc * 0.02f64.powi(3) * u.norm_sqr();
                    }
                }
            }
        }
        assert!((fast - direct).abs() < 1e-10 * direct, "{fast} {direct}");
    }
}
