//! Concentration lattices `Λ_k` and their thickenings `Ω_k`.
//!
//! `Λ_k = X_k^{n-1} × T_k` with
//! `X_k = {sum_m p_m δ^{-σ-m+1} : 0 <= p_m <= p_max}` and
//! `T_k = {2 sum_m q_m δ^{-2σ-m+1} : 0 <= q_m <= q_max}`.
//! Both factors are stored as sorted coordinate lists.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DyadicParams;
use crate::profile::FrequencyProfile;
use crate::propagator::{phase_theta, LineIntegrator, ProgressionSums, QuadratureSpec};
use crate::rational::{display, floor_to_u64, from_pair, to_f64, to_pair, Rational};
use crate::weight::{AxisFamily, BoxUnionWeight};

/// Largest number of coordinates stored per axis.
pub const MAX_AXIS_LEN: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSet {
    params: DyadicParams,
    level: u32,
    n: usize,
    c: Rational,
    p_max: u64,
    q_max: u64,
    scale: Rational,
    x_values: Vec<Rational>,
    t_values: Vec<Rational>,
    x_indices: Vec<Vec<u64>>,
    t_indices: Vec<Vec<u64>>,
}

fn axis_values(max: u64, level: u32, step: impl Fn(i32) -> Rational) -> Result<(Vec<Rational>, Vec<Vec<u64>>)> {
    let radix = max as u128 + 1;
    let count = radix.checked_pow(level).filter(|&c| c <= MAX_AXIS_LEN).ok_or_else(|| {
        Error::InvalidParameter(format!("{radix}^{level} coordinates per axis is too many"))
    })? as usize;
    let steps: Vec<Rational> = (1..=level as i32).map(step).collect();
    let mut entries: Vec<(Rational, Vec<u64>)> = Vec::with_capacity(count);
    let mut digits = vec![0u64; level as usize];
    for _ in 0..count {
        let v = digits
            .iter()
            .zip(&steps)
            .fold(Rational::from_integer(0), |a, (&d, s)| a + s * Rational::from_integer(d as i128));
        entries.push((v, digits.clone()));
        for d in digits.iter_mut() {
            if *d < max {
                *d += 1;
                break;
            }
            *d = 0;
        }
    }
    entries.sort();
    Ok(entries.into_iter().unzip())
}

/// Builds `Λ_k` in dimension `n` with index bounds
/// `p_max = floor(c δ^{σ-1})`, `q_max = floor(c δ^{2σ-1})`.
pub fn build_lattice(params: DyadicParams, level: u32, n: usize, c: &Rational) -> Result<LatticeSet> {
    if level == 0 {
        return Err(Error::InvalidParameter("lattice level must be >= 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
    }
    if *c <= Rational::from_integer(0) {
        return Err(Error::InvalidParameter(format!("c = {} must be positive", display(c))));
    }
    let p_max = floor_to_u64(&(c * params.delta_power(1, -1)));
    let q_max = floor_to_u64(&(c * params.delta_power(2, -1)));
    if p_max == 0 && q_max == 0 {
        return Err(Error::EmptyLattice {
            delta_log2: params.delta_log2(),
        });
    }
    let (x_values, x_indices) = axis_values(p_max, level, |m| params.delta_power(-1, 1 - m))?;
    let two = Rational::from_integer(2);
    let (t_values, t_indices) = axis_values(q_max, level, |m| two * params.delta_power(-2, 1 - m))?;
    Ok(LatticeSet {
        params,
        level,
        n,
        c: *c,
        p_max,
        q_max,
        scale: Rational::from_integer(1),
        x_values,
        t_values,
        x_indices,
        t_indices,
    })
}

fn min_gap(values: &[Rational]) -> Option<Rational> {
    values.windows(2).map(|w| w[1] - w[0]).min()
}

impl LatticeSet {
    pub fn params(&self) -> DyadicParams {
        self.params
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> Rational {
        self.c
    }

    pub fn p_max(&self) -> u64 {
        self.p_max
    }

    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    /// Dilation applied since construction (1 for `Λ_k` itself).
    pub fn dilation(&self) -> Rational {
        self.scale
    }

    pub fn x_values(&self) -> &[Rational] {
        &self.x_values
    }

    pub fn t_values(&self) -> &[Rational] {
        &self.t_values
    }

    /// `(p_1, ..., p_k)` of each entry of `x_values`.
    pub fn x_indices(&self) -> &[Vec<u64>] {
        &self.x_indices
    }

    pub fn t_indices(&self) -> &[Vec<u64>] {
        &self.t_indices
    }

    /// `((p_max+1)^k)^{n-1} (q_max+1)^k`.
    pub fn cardinality(&self) -> u128 {
        (self.x_values.len() as u128).pow(self.n as u32 - 1) * self.t_values.len() as u128
    }

    /// Points `(x, t)` in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = (Vec<Rational>, Rational)> + '_ {
        let nx = self.x_values.len() as u128;
        let nt = self.t_values.len() as u128;
        (0..self.cardinality()).map(move |idx| {
            let t = self.t_values[(idx % nt) as usize];
            let mut rest = idx / nt;
            let mut x = vec![Rational::from_integer(0); self.n - 1];
            for slot in x.iter_mut().rev() {
                *slot = self.x_values[(rest % nx) as usize];
                rest /= nx;
            }
            (x, t)
        })
    }

    /// Smallest distance between distinct points along any axis that has
    /// more than one coordinate.
    pub fn min_spacing(&self) -> Option<Rational> {
        match (min_gap(&self.x_values), min_gap(&self.t_values)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self> {
        if *lambda <= Rational::from_integer(0) {
            return Err(Error::InvalidParameter("dilation factor must be positive".into()));
        }
        let mut out = self.clone();
        out.scale *= lambda;
        out.x_values.iter_mut().for_each(|v| *v *= lambda);
        out.t_values.iter_mut().for_each(|v| *v *= lambda);
        Ok(out)
    }

    /// One cube of half-side `rho` around every point.
    pub fn thicken(&self, rho: &Rational) -> Result<BoxUnionWeight> {
        if *rho <= Rational::from_integer(0) {
            return Err(Error::InvalidParameter("thickening radius must be positive".into()));
        }
        if let Some(spacing) = self.min_spacing() {
            if Rational::from_integer(2) * rho >= spacing {
                return Err(Error::ThickeningOverlap {
                    rho: display(rho),
                    spacing: display(&spacing),
                });
            }
        }
        let x_axis = AxisFamily::uniform(self.x_values.clone(), *rho)?;
        let mut axes = vec![x_axis; self.n - 1];
        axes.push(AxisFamily::uniform(self.t_values.clone(), *rho)?);
        BoxUnionWeight::product(axes)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..self.n).map(|j| format!("x_{j}")).chain(["t".to_string()]).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (x, t) in self.points() {
            let row: Vec<String> = x.iter().chain(std::iter::once(&t)).map(display).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            delta_log2: self.params.delta_log2(),
            sigma_num: self.params.sigma_num(),
            level: self.level,
            n: self.n,
            c: to_pair(&self.c),
            dilation: to_pair(&self.scale),
            p_max: self.p_max,
            q_max: self.q_max,
            x_values: self.x_values.iter().map(to_pair).collect(),
            t_values: self.t_values.iter().map(to_pair).collect(),
        }
    }

    /// Rebuilds from the parameters and checks every stored coordinate.
    pub fn from_json(json: &LatticeJson) -> Result<Self> {
        let params = DyadicParams::new(json.delta_log2, json.sigma_num)?;
        let lattice = build_lattice(params, json.level, json.n, &from_pair(json.c)?)?
            .scale(&from_pair(json.dilation)?)?;
        let xs = json.x_values.iter().map(|&p| from_pair(p)).collect::<Result<Vec<_>>>()?;
        let ts = json.t_values.iter().map(|&p| from_pair(p)).collect::<Result<Vec<_>>>()?;
        if lattice.p_max != json.p_max || lattice.q_max != json.q_max || xs != lattice.x_values || ts != lattice.t_values {
            return Err(Error::Deserialize("lattice coordinates differ from those implied by the parameters".into()));
        }
        Ok(lattice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub delta_log2: u32,
    pub sigma_num: u32,
    pub level: u32,
    pub n: usize,
    pub c: [i128; 2],
    pub dilation: [i128; 2],
    pub p_max: u64,
    pub q_max: u64,
    pub x_values: Vec<[i128; 2]>,
    pub t_values: Vec<[i128; 2]>,
}

/// `Ω̃ = R^{-1} Ω` at `R = 1/δ`, built directly from
/// `x = sum p_m δ^{2-σ-m}`, `t = 2 sum q_m δ^{2-2σ-m}` and half-side `ρδ`.
pub fn omega_tilde(params: DyadicParams, level: u32, n: usize, c: &Rational, rho: &Rational) -> Result<BoxUnionWeight> {
    let lattice = build_lattice(params, level, n, c)?;
    let (xs, _) = axis_values(lattice.p_max, level, |m| params.delta_power(-1, 2 - m))?;
    let two = Rational::from_integer(2);
    let (ts, _) = axis_values(lattice.q_max, level, |m| two * params.delta_power(-2, 2 - m))?;
    let h = rho * params.delta();
    for gap in [min_gap(&xs), min_gap(&ts)].into_iter().flatten() {
        if two * h >= gap {
            return Err(Error::ThickeningOverlap {
                rho: display(&h),
                spacing: display(&gap),
            });
        }
    }
    let mut axes = vec![AxisFamily::uniform(xs, h)?; n - 1];
    axes.push(AxisFamily::uniform(ts, h)?);
    BoxUnionWeight::product(axes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinModulus {
    pub min: f64,
    pub argmin_x: Vec<f64>,
    pub argmin_t: f64,
    /// Largest phase certificate over all lattice points.
    pub theta_max: f64,
    /// `support_mass^{n-1}`.
    pub mass: f64,
}

impl MinModulus {
    /// `cos(2πΘ_max)^{n-1}`, when the certificate applies.
    pub fn certificate_factor(&self, n: usize) -> Option<f64> {
        (self.theta_max < 0.25).then(|| (std::f64::consts::TAU * self.theta_max).cos().powi(n as i32 - 1))
    }

    pub fn ratio_to_mass(&self) -> f64 {
        self.min / self.mass
    }
}

fn check_matching(p: &FrequencyProfile, l: &LatticeSet) -> Result<()> {
    if p.params() != l.params || p.level() != l.level {
        return Err(Error::InvalidParameter(
            "profile and lattice must share (delta, sigma, k)".into(),
        ));
    }
    if l.scale != Rational::from_integer(1) {
        return Err(Error::InvalidParameter("lattice must not be dilated".into()));
    }
    Ok(())
}

/// Minimum of `|e^{itΔ}f|` over `Λ_k`.
///
/// The solution is a product over the `n-1` coordinates, all drawn from
/// `X_k`, so the minimum is `min_t (min_x |I(x, t)|)^{n-1}`.
pub fn min_modulus(p: &FrequencyProfile, l: &LatticeSet, q: &QuadratureSpec) -> Result<MinModulus> {
    check_matching(p, l)?;
    let xs: Vec<f64> = l.x_values.iter().map(to_f64).collect();
    let s_max = xs.last().copied().unwrap_or(0.0);
    let period = l.params.delta_power(-1, 0);
    let per_t: Vec<(f64, usize, f64)> = l
        .t_values
        .par_iter()
        .map(|t| {
            let t = to_f64(t);
            let integ = LineIntegrator::new(p, t, s_max, q);
            let (min, arg) = if l.level == 1 {
                let sums = ProgressionSums::new(p, &integ, &period, xs.len() as u64)
                    .expect("δ^{-σ} is a period for level one");
                let (m, i) = sums.min_abs(&integ, &integ.node_sums(0.0));
                (m, i as usize)
            } else {
                xs.iter()
                    .enumerate()
                    .map(|(i, &x)| (integ.eval(x).norm(), i))
                    .fold((f64::INFINITY, 0), |b, v| if v.0 < b.0 { v } else { b })
            };
            let theta = xs.iter().map(|&x| phase_theta(p, x, t)).fold(0.0, f64::max);
            (min, arg, theta)
        })
        .collect();
    let mut best = (f64::INFINITY, 0usize, 0usize);
    let mut theta_max: f64 = 0.0;
    for (ti, &(m, xi, th)) in per_t.iter().enumerate() {
        if m < best.0 {
            best = (m, xi, ti);
        }
        theta_max = theta_max.max(th);
    }
    let dims = l.n as i32 - 1;
    Ok(MinModulus {
        min: best.0.powi(dims),
        argmin_x: vec![xs[best.1]; l.n - 1],
        argmin_t: to_f64(&l.t_values[best.2]),
        theta_max,
        mass: p.support_mass_f64().powi(dims),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarityCheck {
    pub holds: bool,
    /// A point in exactly one of `Λ_k` and `Λ_1 ⊕ δ^{-1}Λ_{k-1}`.
    pub witness: Option<(Vec<String>, String)>,
}

/// Checks `Λ_k = Λ_1 ⊕ δ^{-1} Λ_{k-1}` exactly, with all sums distinct.
///
/// Both sides are products over the axes, so the identity is checked on
/// `X` and `T` separately.
pub fn lattice_self_similarity(l: &LatticeSet) -> Result<SelfSimilarityCheck> {
    if l.level < 2 {
        return Err(Error::InvalidParameter("self-similarity needs k >= 2".into()));
    }
    let first = build_lattice(l.params, 1, l.n, &l.c)?.scale(&l.scale)?;
    let prev = build_lattice(l.params, l.level - 1, l.n, &l.c)?.scale(&l.scale)?;
    let inv_delta = l.params.delta().recip();
    let minkowski = |a: &[Rational], b: &[Rational]| -> (BTreeSet<Rational>, bool) {
        let mut set = BTreeSet::new();
        let mut distinct = true;
        for u in a {
            for v in b {
                distinct &= set.insert(u + inv_delta * v);
            }
        }
        (set, distinct)
    };
    let (xs, x_distinct) = minkowski(&first.x_values, &prev.x_values);
    let (ts, t_distinct) = minkowski(&first.t_values, &prev.t_values);
    let own_x: BTreeSet<Rational> = l.x_values.iter().copied().collect();
    let own_t: BTreeSet<Rational> = l.t_values.iter().copied().collect();
    let x_bad = own_x.symmetric_difference(&xs).next().copied();
    let t_bad = own_t.symmetric_difference(&ts).next().copied();
    let holds = x_distinct && t_distinct && x_bad.is_none() && t_bad.is_none() && own_x.len() == l.x_values.len();
    let witness = if holds {
        None
    } else {
        let x = x_bad.unwrap_or(l.x_values[0]);
        let t = t_bad.unwrap_or(l.t_values[0]);
        Some((vec![display(&x); l.n - 1], display(&t)))
    };
    Ok(SelfSimilarityCheck { holds, witness })
}
