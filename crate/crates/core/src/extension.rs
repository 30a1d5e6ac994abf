//! The extension operator on the paraboloid section
//! `{ξ_n = |ξ'|²/2 : 0 <= ξ_j <= 1}` and the Knapp cell.
//!
//! With surface density `(1+|ξ'|²)^{1/2}` in the parameter `ξ'`,
//! `ĝdσ(x) = ∫ g(ξ', |ξ'|²/2) e^{phase}(1+|ξ'|²)^{1/2} dξ'`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::FrequencyProfile;
use crate::propagator::{solution_at, QuadratureSpec};
use crate::quadrature::{centered_frac, cis_cycles, composite_nodes, gauss_legendre, prod3_mod1, prod_mod1};
use crate::rational::{to_f64, Rational};
use crate::weight::BoxUnionWeight;

/// Sign convention of the spatial phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionConvention {
    /// `e^{2πi x'·ξ' - πi x_n |ξ'|²}`; equals `e^{i x_n Δ} f(x')` exactly.
    #[default]
    PropagatorAligned,
    /// `e^{-2πi x·ξ}` on the surface; equals `e^{i x_n Δ} f(-x')`.
    Literal,
}

impl ExtensionConvention {
    fn sign(self) -> f64 {
        match self {
            Self::PropagatorAligned => 1.0,
            Self::Literal => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParaboloidSection {
    n: usize,
}

impl ParaboloidSection {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
        }
        Ok(Self { n })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `(1 + |ξ'|²)^{1/2}`.
    pub fn density(&self, xi: &[f64]) -> f64 {
        (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn lift(&self, xi: &[f64]) -> Vec<f64> {
        let mut p = xi.to_vec();
        p.push(0.5 * xi.iter().map(|v| v * v).sum::<f64>());
        p
    }
}

/// The function `g` on the surface, given on the parameter box.
#[derive(Debug, Clone, Copy)]
pub enum Amplitude<'a> {
    /// `g = (g_k ⊗ ... ⊗ g_k) / (1+|ξ'|²)^{1/2}`, so that `f̂ = g_k ⊗ ... ⊗ g_k`.
    ProfileOverDensity(&'a FrequencyProfile),
    /// Indicator of the corner cell `[0, δ]^{n-1}`.
    CellIndicator { delta: f64 },
}

/// Support cells per axis as `(centre, halfwidth)`.
fn axis_cells(amp: &Amplitude) -> Vec<(f64, f64)> {
    match amp {
        Amplitude::ProfileOverDensity(p) => {
            let h = p.halfwidth_f64();
            p.centers_f64().iter().map(|&c| (c, h)).collect()
        }
        Amplitude::CellIndicator { delta } => vec![(0.5 * delta, 0.5 * delta)],
    }
}

fn amplitude_value(amp: &Amplitude, surface: &ParaboloidSection, xi: &[f64]) -> f64 {
    match amp {
        Amplitude::ProfileOverDensity(p) => {
            if xi.iter().all(|&v| p.contains(v)) {
                1.0 / surface.density(xi)
            } else {
                0.0
            }
        }
        Amplitude::CellIndicator { delta } => {
            if xi.iter().all(|&v| (0.0..=*delta).contains(&v)) {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// `ĝdσ(x)` by tensor Gauss–Legendre quadrature over every support cell.
pub fn surface_extension(
    amp: &Amplitude,
    n: usize,
    x: &[f64],
    convention: ExtensionConvention,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    let surface = ParaboloidSection::new(n)?;
    if x.len() != n {
        return Err(Error::InvalidParameter(format!("x must have n = {n} coordinates")));
    }
    let d = n - 1;
    let sign = convention.sign();
    let t = x[d];
    let cells = axis_cells(amp);
    let xi_max = cells.iter().map(|c| c.0 + c.1).fold(0.0, f64::max);
    let h = cells[0].1;
    // per axis: node offsets and weights, sized for that axis' frequency
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
        .map(|j| composite_nodes(h, q.node_count(x[j], t, xi_max, 2.0 * h)))
        .collect();
    let cell_count = cells.len().pow(d as u32);
    let mut total = Complex64::new(0.0, 0.0);
    let mut cell_idx = vec![0usize; d];
    let mut xi = vec![0.0; d];
    for _ in 0..cell_count {
        let centers: Vec<f64> = cell_idx.iter().map(|&i| cells[i].0).collect();
        // phase at the cell centre, reduced modulo 1 coordinate by coordinate
        let base: f64 = centered_frac(
            centers
                .iter()
                .zip(x)
                .map(|(&c, &s)| sign * prod_mod1(s, c) - prod3_mod1(0.5 * t, c, c))
                .sum(),
        );
        let sizes: Vec<usize> = rules.iter().map(|r| r.0.len()).collect();
        let nodes_total: usize = sizes.iter().product();
        let mut node_idx = vec![0usize; d];
        let mut cell_sum = Complex64::new(0.0, 0.0);
        for _ in 0..nodes_total {
            let mut weight = 1.0;
            let mut local = 0.0;
            for j in 0..d {
                let u = rules[j].0[node_idx[j]];
                weight *= rules[j].1[node_idx[j]];
                xi[j] = centers[j] + u;
                local += (sign * x[j] - t * centers[j]) * u - 0.5 * t * u * u;
            }
            let g = amplitude_value(amp, &surface, &xi);
            cell_sum += cis_cycles(local) * (weight * g * surface.density(&xi));
            for j in (0..d).rev() {
                node_idx[j] += 1;
                if node_idx[j] < sizes[j] {
                    break;
                }
                node_idx[j] = 0;
            }
        }
        total += cis_cycles(base) * cell_sum;
        for j in (0..d).rev() {
            cell_idx[j] += 1;
            if cell_idx[j] < cells.len() {
                break;
            }
            cell_idx[j] = 0;
        }
    }
    Ok(total)
}

/// `σ(cell) = ∫_{[0,δ]^{n-1}} (1+|ξ'|²)^{1/2} dξ'`.
pub fn l2_cell_mass(n: usize, delta: f64) -> Result<f64> {
    let surface = ParaboloidSection::new(n)?;
    let d = n - 1;
    let rule = gauss_legendre(16);
    let total_nodes = 16usize.pow(d as u32);
    let mut sum = 0.0;
    let mut xi = vec![0.0; d];
    for mut idx in 0..total_nodes {
        let mut w = 1.0;
        for slot in xi.iter_mut() {
            let k = idx % 16;
            idx /= 16;
            *slot = 0.5 * delta * (1.0 + rule.nodes[k]);
            w *= 0.5 * delta * rule.weights[k];
        }
        sum += w * surface.density(&xi);
    }
    Ok(sum)
}

/// `(δ√(1+δ²) + asinh δ) / 2`, the `n = 2` cell mass.
pub fn l2_cell_mass_closed_form(delta: f64) -> f64 {
    0.5 * (delta * (1.0 + delta * delta).sqrt() + delta.asinh())
}

/// A δ-cap at the corner of the parameter box and its dual tube.
#[derive(Debug, Clone, PartialEq)]
pub struct KnappCell {
    n: usize,
    delta: Rational,
    c0: Rational,
    tube: BoxUnionWeight,
}

/// Largest admissible phase variation over the cell, in cycles.
pub const KNAPP_PHASE_LIMIT: f64 = 0.1;

impl KnappCell {
    /// `1/(8π)` rounded to a multiple of `2^{-20}`, which keeps exact
    /// tube volumes within `i128` up to `n = 5`.
    pub fn default_c0() -> Rational {
        let scaled = (1.0 / (8.0 * std::f64::consts::PI) * 1048576.0).round();
        Rational::new(scaled as i128, 1 << 20)
    }

    /// Tube centred at the origin with sides `c0/δ` (`n-1` times) and
    /// `c0/δ²`.
    pub fn new(n: usize, delta: Rational, c0: Rational) -> Result<Self> {
        ParaboloidSection::new(n)?;
        if delta <= Rational::from_integer(0) || delta > Rational::new(1, 2) {
            return Err(Error::InvalidParameter("Knapp cell needs 0 < delta <= 1/2".into()));
        }
        if c0 <= Rational::from_integer(0) {
            return Err(Error::InvalidParameter("tube constant c0 must be positive".into()));
        }
        let variation = 0.75 * (n - 1) as f64 * to_f64(&c0);
        if variation >= KNAPP_PHASE_LIMIT {
            return Err(Error::KnappPhaseVariation {
                variation,
                limit: KNAPP_PHASE_LIMIT,
            });
        }
        let two = Rational::from_integer(2);
        let mut half = vec![c0 / (two * delta); n - 1];
        half.push(c0 / (two * delta * delta));
        let tube = BoxUnionWeight::single(vec![Rational::from_integer(0); n], half)?;
        Ok(Self { n, delta, c0, tube })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> Rational {
        self.delta
    }

    pub fn c0(&self) -> Rational {
        self.c0
    }

    pub fn tube(&self) -> &BoxUnionWeight {
        &self.tube
    }

    /// Bound on `|x'·ξ'| + |x_n| |ξ'|²/2` over cell × tube:
    /// `(n-1)c0/2 + (n-1)c0/4`.
    pub fn phase_variation(&self) -> f64 {
        0.75 * (self.n - 1) as f64 * to_f64(&self.c0)
    }

    pub fn amplitude(&self) -> Amplitude<'static> {
        Amplitude::CellIndicator {
            delta: to_f64(&self.delta),
        }
    }

    pub fn l2_mass(&self) -> f64 {
        l2_cell_mass(self.n, to_f64(&self.delta)).expect("n >= 2")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappBound {
    pub min_modulus: f64,
    pub argmin: Vec<f64>,
    /// `σ(cell)`.
    pub reference: f64,
    pub ratio: f64,
    /// `cos(2π · variation)`, the certified lower bound of `ratio`.
    pub certified: f64,
}

/// Minimum of `|ĝdσ|` over a grid of `samples` points per axis spanning
/// the tube (corners included).
pub fn knapp_lower_bound(cell: &KnappCell, samples: usize, q: &QuadratureSpec) -> Result<KnappBound> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples per axis".into()));
    }
    let n = cell.n;
    let (lo, hi) = cell.tube.bounding_box();
    let amp = cell.amplitude();
    let total = samples.pow(n as u32);
    let values: Vec<(f64, Vec<f64>)> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let k = idx % samples;
                idx /= samples;
                x[i] = lo[i] + (hi[i] - lo[i]) * k as f64 / (samples - 1) as f64;
            }
            let v = surface_extension(&amp, n, &x, ExtensionConvention::PropagatorAligned, q)
                .expect("valid dimension")
                .norm();
            (v, x)
        })
        .collect();
    let mut best = &values[0];
    for v in &values {
        if v.0 < best.0 {
            best = v;
        }
    }
    let reference = cell.l2_mass();
    Ok(KnappBound {
        min_modulus: best.0,
        argmin: best.1.clone(),
        reference,
        ratio: best.0 / reference,
        certified: (std::f64::consts::TAU * cell.phase_variation()).cos(),
    })
}

/// `count` seeded points uniform in `[-half_extent, half_extent]^n`.
pub fn random_points(n: usize, half_extent: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(-half_extent..=half_extent)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedCheck {
    pub x: Vec<f64>,
    pub extension: f64,
    pub solution: f64,
    pub relative_difference: f64,
}

/// Compares `|ĝdσ(x)|` with `|e^{i x_n Δ} f(x')|` for
/// `g = f̂ / (1+|ξ'|²)^{1/2}`.
pub fn check_red(
    p: &FrequencyProfile,
    n: usize,
    points: &[Vec<f64>],
    convention: ExtensionConvention,
    q: &QuadratureSpec,
) -> Result<Vec<RedCheck>> {
    let amp = Amplitude::ProfileOverDensity(p);
    points
        .par_iter()
        .map(|x| {
            let ext = surface_extension(&amp, n, x, convention, q)?.norm();
            let sol = solution_at(p, n, &x[..n - 1], x[n - 1], q).norm();
            Ok(RedCheck {
                x: x.clone(),
                extension: ext,
                solution: sol,
                relative_difference: (ext - sol).abs() / sol.max(f64::MIN_POSITIVE),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DyadicParams;

    fn profile(a: u32, c: u32) -> FrequencyProfile {
        FrequencyProfile::new(DyadicParams::new(a, c).unwrap(), 1).unwrap()
    }

    #[test]
    fn origin_gives_the_mass() {
        let p = profile(8, 2);
        let q = QuadratureSpec::default();
        for n in [2, 3] {
            let v = surface_extension(&Amplitude::ProfileOverDensity(&p), n, &vec![0.0; n], Default::default(), &q).unwrap();
            let m = p.support_mass_f64().powi(n as i32 - 1);
            assert!((v.re - m).abs() < 1e-14 * m && v.im.abs() < 1e-14 * m);
        }
    }

    #[test]
    fn aligned_convention_is_the_propagator() {
        let p = profile(8, 2);
        let q = QuadratureSpec::default();
        let amp = Amplitude::ProfileOverDensity(&p);
        for x in random_points(3, 256.0, 10, 7) {
            let e = surface_extension(&amp, 3, &x, ExtensionConvention::PropagatorAligned, &q).unwrap();
            let s = solution_at(&p, 3, &x[..2], x[2], &q);
            assert!((e - s).norm() <= 1e-9 * s.norm().max(1e-12), "{x:?}");
            let lit = surface_extension(&amp, 3, &x, ExtensionConvention::Literal, &q).unwrap();
            let reflected = solution_at(&p, 3, &[-x[0], -x[1]], x[2], &q);
            assert!((lit - reflected).norm() <= 1e-9 * reflected.norm().max(1e-12));
        }
    }

    #[test]
    fn cell_mass() {
        let closed = l2_cell_mass_closed_form(0.125);
        assert!((l2_cell_mass(2, 0.125).unwrap() - closed).abs() < 1e-15);
        assert!((closed - 0.1253248).abs() < 1e-7);
        let m3 = l2_cell_mass(3, 0.125).unwrap();
        assert!((m3 / (0.125 * 0.125) - 1.0).abs() < 0.01);
        for n in 2..5 {
            let d = 1e-3;
            let r = l2_cell_mass(n, d).unwrap() / d.powi(n as i32 - 1);
            assert!((1.0 - 1e-12..1.0 + 1e-5).contains(&r), "{n} {r}");
        }
    }

    #[test]
    fn knapp_examples() {
        let q = QuadratureSpec::default();
        for a in [3, 4] {
            let cell = KnappCell::new(2, Rational::new(1, 1 << a), KnappCell::default_c0()).unwrap();
            let b = knapp_lower_bound(&cell, 9, &q).unwrap();
            assert!(b.ratio >= 0.8, "{}", b.ratio);
            assert!(b.ratio >= b.certified - 1e-12);
        }
        let cell = KnappCell::new(2, Rational::new(1, 8), KnappCell::default_c0()).unwrap();
        let far = surface_extension(&cell.amplitude(), 2, &[0.0, 10.0 * 64.0], Default::default(), &q).unwrap();
        assert!(far.norm() < 0.3 * cell.l2_mass());
        assert!(matches!(
            KnappCell::new(5, Rational::new(1, 8), Rational::new(1, 20)),
            Err(Error::KnappPhaseVariation { .. })
        ));
    }

    #[test]
    fn seeded_points_are_reproducible() {
        assert_eq!(random_points(3, 1.0, 5, 0), random_points(3, 1.0, 5, 0));
        assert_ne!(random_points(3, 1.0, 5, 0), random_points(3, 1.0, 5, 1));
    }
}
