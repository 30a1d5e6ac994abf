//! The free Schrödinger solution for tensor-product indicator data.
//!
//! With `f^ = g_k ⊗ ... ⊗ g_k` the solution factorizes,
//! `e^{itΔ}f(x) = prod_j I(x_j, t)`, where
//! `I(s, t) = ∫ g_k(ξ) e^{2πi(sξ - tξ²/2)} dξ`.
//! Each 1-D integral is a sum of short Gauss–Legendre integrals, one per
//! support interval.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::FrequencyProfile;
use crate::quadrature::{
    centered_frac, cis_cycles, composite_nodes, pairwise_sum_complex, prod3_mod1, prod_mod1,
};
use crate::rational::{to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_min: usize,
    pub nodes_per_cycle: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_min: 8,
            nodes_per_cycle: 6.0,
            abs_tol: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes_min: usize, nodes_per_cycle: f64, abs_tol: f64) -> Result<Self> {
        let q = Self {
            nodes_min,
            nodes_per_cycle,
            abs_tol,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_min < 2 {
            return Err(Error::InvalidParameter(format!(
                "nodes_min = {} must be >= 2",
                self.nodes_min
            )));
        }
        if !(self.nodes_per_cycle >= 2.0) || !self.nodes_per_cycle.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nodes_per_cycle = {} must be >= 2",
                self.nodes_per_cycle
            )));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "abs_tol = {} must be positive",
                self.abs_tol
            )));
        }
        Ok(())
    }

    /// Nodes for one support interval of width `width`.
    pub fn node_count(&self, s: f64, t: f64, xi_max: f64, width: f64) -> usize {
        let cycles = t.abs() * xi_max * width + s.abs() * width;
        let wanted = (self.nodes_per_cycle * cycles).ceil();
        if wanted.is_finite() && wanted < 1e7 {
            self.nodes_min.max(wanted as usize)
        } else {
            10_000_000
        }
    }

    pub fn doubled(&self) -> Self {
        Self {
            nodes_min: self.nodes_min * 2,
            nodes_per_cycle: self.nodes_per_cycle * 2.0,
            abs_tol: self.abs_tol,
        }
    }
}

/// `φ(c) = s c - t c²/2` modulo 1, for a dyadic centre `c`.
#[inline]
fn center_phase(s: f64, t: f64, c: f64) -> f64 {
    centered_frac(prod_mod1(s, c) - prod3_mod1(0.5 * t, c, c))
}

/// `I(s, t)` by per-interval Gauss–Legendre quadrature.
pub fn line_integral(p: &FrequencyProfile, s: f64, t: f64, q: &QuadratureSpec) -> Complex64 {
    let h = p.halfwidth_f64();
    let nodes = q.node_count(s, t, p.xi_max(), 2.0 * h);
    let (us, ws) = composite_nodes(h, nodes);
    let parts: Vec<Complex64> = p
        .centers_f64()
        .iter()
        .map(|&c| {
            let b = s - t * c;
            let local: Complex64 = us
                .iter()
                .zip(&ws)
                .map(|(&u, &w)| cis_cycles(b * u - 0.5 * t * u * u) * w)
                .sum();
            cis_cycles(center_phase(s, t, c)) * local
        })
        .collect();
    pairwise_sum_complex(&parts)
}

/// `e^{itΔ}f(x) = prod_j I(x_j, t)` in dimension `n` (so `x` has `n-1`
/// coordinates).
pub fn solution_at(p: &FrequencyProfile, n: usize, x: &[f64], t: f64, q: &QuadratureSpec) -> Complex64 {
    assert!(n >= 2 && x.len() == n - 1, "x must have n - 1 = {} coordinates", n.saturating_sub(1));
    x.iter().map(|&s| line_integral(p, s, t, q)).product()
}

/// Evaluates `I(s, t)` for many `s` at a fixed `t`.
///
/// `I(s,t) = sum_l e^{2πi(s c_l - t c_l²/2)} sum_j e^{2πi s u_j} G_lj` with
/// `G_lj = w_j e^{-2πi(t c_l u_j + t u_j²/2)}` tabulated once; `J` is sized
/// for `|s| <= s_max`.
#[derive(Debug, Clone)]
pub struct LineIntegrator {
    t: f64,
    nodes: Vec<f64>,
    /// `e^{-πi t c_l²}` per interval.
    base: Vec<Complex64>,
    /// Row-major `intervals x nodes`.
    table: Vec<Complex64>,
    /// Level steps `δ^{σ+r-1}` and per-interval digits for `e^{2πi s c_l}`.
    steps: Vec<f64>,
    digits: Vec<Vec<u32>>,
    ell: usize,
}

impl LineIntegrator {
    pub fn new(p: &FrequencyProfile, t: f64, s_max: f64, q: &QuadratureSpec) -> Self {
        let h = p.halfwidth_f64();
        let nodes = q.node_count(s_max, t, p.xi_max(), 2.0 * h);
        let (us, ws) = composite_nodes(h, nodes);
        let centers = p.centers_f64();
        let mut table = Vec::with_capacity(centers.len() * us.len());
        let mut base = Vec::with_capacity(centers.len());
        for &c in centers {
            base.push(cis_cycles(-prod3_mod1(0.5 * t, c, c)));
            for (&u, &w) in us.iter().zip(&ws) {
                table.push(cis_cycles(-(t * c * u) - 0.5 * t * u * u) * w);
            }
        }
        let params = p.params();
        let steps = (1..=p.level() as i32)
            .map(|r| to_f64(&params.delta_power(1, r - 1)))
            .collect();
        let ell = p.ell_count() as usize;
        let mut digits = Vec::with_capacity(centers.len());
        for idx in 0..centers.len() {
            let mut d = vec![0u32; p.level() as usize];
            let mut rest = idx;
            for slot in d.iter_mut().rev() {
                *slot = (rest % ell) as u32;
                rest /= ell;
            }
            digits.push(d);
        }
        Self {
            t,
            nodes: us,
            base,
            table,
            steps,
            digits,
            ell,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `H_j(s) = e^{2πi s u_j} sum_l e^{2πi s c_l} e^{-πi t c_l²} G_lj`, so
    /// that `I(s, t) = sum_j H_j(s)`.
    pub fn node_sums(&self, s: f64) -> Vec<Complex64> {
        let j_count = self.nodes.len();
        // e^{2πi s l δ^{σ+r-1}} for every level r and digit l
        let level_factors: Vec<Vec<Complex64>> = self
            .steps
            .iter()
            .map(|&d| (1..=self.ell).map(|l| cis_cycles(prod3_mod1(s, l as f64, d))).collect())
            .collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); j_count];
        for (i, digits) in self.digits.iter().enumerate() {
            let mut a = self.base[i];
            for (r, &l) in digits.iter().enumerate() {
                a *= level_factors[r][l as usize];
            }
            let row = &self.table[i * j_count..(i + 1) * j_count];
            for (slot, g) in acc.iter_mut().zip(row) {
                *slot += a * g;
            }
        }
        for (slot, &u) in acc.iter_mut().zip(&self.nodes) {
            *slot *= cis_cycles(prod_mod1(s, u));
        }
        acc
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        self.node_sums(s).iter().sum()
    }

    /// `e^{2πi shift u_j}` for each node.
    pub fn shift_factors(&self, shift: f64) -> Vec<Complex64> {
        self.nodes.iter().map(|&u| cis_cycles(prod_mod1(shift, u))).collect()
    }
}

/// Lattice sums along an arithmetic progression `s = m D + v`, `0 <= m < N`,
/// for a period `D` with `D c_l` integral for every interval centre.
///
/// Then `e^{2πi m D c_l} = 1` and `I(mD + v, t) = sum_j e^{2πi m D u_j} H_j(v)`,
/// so `sum_m |I(mD + v, t)|²` is the Hermitian form of the node sums with the
/// Gram matrix `K_jj' = sum_m e^{2πi m D (u_j - u_j')}`.
#[derive(Debug, Clone)]
pub struct ProgressionSums {
    period: f64,
    count: u64,
    gram: Vec<Complex64>,
    size: usize,
}

impl ProgressionSums {
    /// Fails unless `period * c_l` is an integer for every centre.
    pub fn new(p: &FrequencyProfile, integrator: &LineIntegrator, period: &Rational, count: u64) -> Result<Self> {
        if let Some(iv) = p
            .intervals()
            .iter()
            .find(|iv| !(period * iv.center).denom().eq(&1))
        {
            return Err(Error::InvalidParameter(format!(
                "period {} is not a period for centre {}",
                crate::rational::display(period),
                crate::rational::display(&iv.center)
            )));
        }
        let period_f = to_f64(period);
        let nodes = integrator.nodes();
        let size = nodes.len();
        let mut gram = vec![Complex64::new(0.0, 0.0); size * size];
        for (a, &ua) in nodes.iter().enumerate() {
            for (b, &ub) in nodes.iter().enumerate() {
                gram[a * size + b] = geometric_sum(prod_mod1(period_f, ua - ub), count);
            }
        }
        Ok(Self {
            period: period_f,
            count,
            gram,
            size,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `sum_{m < N} |I(mD + v, t)|²` from `H(v)`.
    pub fn sum_sq(&self, h: &[Complex64]) -> f64 {
        assert_eq!(h.len(), self.size);
        let mut total = Complex64::new(0.0, 0.0);
        for a in 0..self.size {
            let row = &self.gram[a * self.size..(a + 1) * self.size];
            let inner: Complex64 = row.iter().zip(h).map(|(k, hb)| k * hb.conj()).sum();
            total += h[a] * inner;
        }
        total.re.max(0.0)
    }

    /// `min_m |I(mD + v, t)|` with the first minimizing index.
    pub fn min_abs(&self, integrator: &LineIntegrator, h: &[Complex64]) -> (f64, u64) {
        let step = integrator.shift_factors(self.period);
        let mut z = vec![Complex64::new(1.0, 0.0); self.size];
        let mut best = (f64::INFINITY, 0u64);
        for m in 0..self.count {
            if m > 0 && m % 64 == 0 {
                // re-anchor the running powers every 64 steps
                z = integrator.shift_factors(self.period * m as f64);
            }
            let value: Complex64 = z.iter().zip(h).map(|(a, b)| a * b).sum();
            let modulus = value.norm();
            if modulus < best.0 {
                best = (modulus, m);
            }
            for (zj, sj) in z.iter_mut().zip(&step) {
                *zj *= sj;
            }
        }
        best
    }
}

/// `x * y` modulo 2, in `[-1, 1]`.
fn prod_mod2(x: f64, y: f64) -> f64 {
    let (hi, lo) = crate::quadrature::two_prod(x, y);
    hi - 2.0 * (0.5 * hi).round() + lo
}

/// `sum_{m=0}^{N-1} e^{2πi m θ}` for `θ` given modulo 1.
fn geometric_sum(theta: f64, count: u64) -> Complex64 {
    let n = count as f64;
    if theta.abs() < 1e-14 {
        return Complex64::new(n, 0.0);
    }
    let pi = std::f64::consts::PI;
    let numer = (pi * prod_mod2(n, theta)).sin();
    let denom = (pi * theta).sin();
    cis_cycles(0.5 * prod_mod2(n - 1.0, theta)) * (numer / denom)
}

/// One summand of the phase expansion at a lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTerm {
    pub label: String,
    /// Largest absolute value over the support.
    pub value: f64,
    pub class: TermClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermClass {
    Integer,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCertificate {
    /// Largest distance in cycles from the phase to the integer nearest its
    /// value at the interval centre, capped at 1/2.
    pub theta: f64,
    pub per_term_report: Vec<PhaseTerm>,
}

impl PhaseCertificate {
    /// Sum of the bounds of the non-integer terms.
    pub fn small_term_bound(&self) -> f64 {
        self.per_term_report
            .iter()
            .filter(|t| t.class == TermClass::Small)
            .map(|t| t.value)
            .sum()
    }

    pub fn cos_factor(&self) -> Option<f64> {
        (self.theta < 0.25).then(|| (std::f64::consts::TAU * self.theta).cos())
    }
}

/// `Θ(s, t)` computed exactly for the quadratic phase: on every interval the
/// deviation is checked at both endpoints and at the critical point.
pub fn phase_theta(p: &FrequencyProfile, s: f64, t: f64) -> f64 {
    let h = p.halfwidth_f64();
    let mut theta: f64 = 0.0;
    for &c in p.centers_f64() {
        let base = center_phase(s, t, c);
        let b = s - t * c;
        let local = |u: f64| (base + b * u - 0.5 * t * u * u).abs();
        let mut dev = local(-h).max(local(h));
        if t != 0.0 {
            let u_star = b / t;
            if u_star.abs() <= h {
                dev = dev.max(local(u_star));
            }
        }
        theta = theta.max(dev);
    }
    theta.min(0.5)
}

pub fn phase_deviation(p: &FrequencyProfile, s: f64, t: f64) -> PhaseCertificate {
    PhaseCertificate {
        theta: phase_theta(p, s, t),
        per_term_report: Vec::new(),
    }
}

/// Lattice coordinates `s = sum_m p_m δ^{-σ-m+1}`, `t = 2 sum_m q_m δ^{-2σ-m+1}`.
pub fn lattice_coordinates(p: &FrequencyProfile, pm: &[u64], qm: &[u64]) -> (Rational, Rational) {
    let params = p.params();
    let s = pm.iter().enumerate().fold(Rational::from_integer(0), |acc, (m, &v)| {
        acc + params.delta_power(-1, -(m as i32)) * Rational::from_integer(v as i128)
    });
    let t = qm.iter().enumerate().fold(Rational::from_integer(0), |acc, (m, &v)| {
        acc + params.delta_power(-2, -(m as i32)) * Rational::from_integer(2 * v as i128)
    });
    (s, t)
}

/// Certificate at a lattice point together with the expansion of
/// `sξ - tξ²/2` for `ξ = sum_r l_r δ^{σ+r-1} + ε` into its summands.
pub fn lattice_phase_deviation(p: &FrequencyProfile, pm: &[u64], qm: &[u64]) -> Result<PhaseCertificate> {
    let k = p.level() as usize;
    if pm.len() != k || qm.len() != k {
        return Err(Error::InvalidParameter(format!(
            "lattice indices need {k} entries each (got {} and {})",
            pm.len(),
            qm.len()
        )));
    }
    let (s, t) = lattice_coordinates(p, pm, qm);
    let params = p.params();
    let big_l = Rational::from_integer(p.ell_count() as i128);
    let eps = params.delta_power(0, k as i32);
    let dp = |j: i32, m: i32| params.delta_power(j, m);
    let int = |v: u64| Rational::from_integer(v as i128);
    let mut terms = Vec::new();
    let mut push = |label: String, value: Rational, integer: bool| {
        terms.push(PhaseTerm {
            label,
            value: to_f64(&value),
            class: if integer { TermClass::Integer } else { TermClass::Small },
        })
    };
    for m in 1..=k as i32 {
        let pv = pm[m as usize - 1];
        let qv = qm[m as usize - 1];
        for r in 1..=k as i32 {
            push(
                format!("p{m}*l{r}*delta^({})", r - m),
                int(pv) * big_l * dp(0, r - m),
                r <= m,
            );
        }
        push(
            format!("p{m}*eps*delta^(-sigma{:+})", 1 - m),
            int(pv) * eps * dp(-1, 1 - m),
            false,
        );
        for r in 1..=k as i32 {
            for r2 in r..=k as i32 {
                let mult = if r == r2 { 1 } else { 2 };
                let e = r + r2 - m - 1;
                push(
                    format!("{}q{m}*l{r}*l{r2}*delta^({e})", if mult == 2 { "2*" } else { "" }),
                    int(mult * qv) * big_l * big_l * dp(0, e),
                    e <= 0,
                );
            }
            push(
                format!("2*eps*l{r}*q{m}*delta^(-sigma{:+})", r - m),
                Rational::from_integer(2) * eps * big_l * int(qv) * dp(-1, r - m),
                false,
            );
        }
        push(
            format!("eps^2*q{m}*delta^(-2sigma{:+})", 1 - m),
            eps * eps * int(qv) * dp(-2, 1 - m),
            false,
        );
    }
    Ok(PhaseCertificate {
        theta: phase_theta(p, to_f64(&s), to_f64(&t)),
        per_term_report: terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    pub holds: bool,
    pub bound: f64,
    pub measured: f64,
}

/// Compares `|e^{itΔ}f(x)|` with `prod_j cos(2πΘ_j) * mass`.
pub fn lower_bound_check(
    p: &FrequencyProfile,
    n: usize,
    x: &[f64],
    t: f64,
    q: &QuadratureSpec,
) -> Result<LowerBoundCheck> {
    if n < 2 || x.len() != n - 1 {
        return Err(Error::InvalidParameter(format!(
            "x must have n - 1 coordinates (n = {n}, got {})",
            x.len()
        )));
    }
    let mass = p.support_mass_f64();
    let mut bound = 1.0;
    for (j, &s) in x.iter().enumerate() {
        let theta = phase_theta(p, s, t);
        if theta >= 0.25 {
            return Err(Error::CertificateInapplicable { theta, coordinate: j });
        }
        bound *= (std::f64::consts::TAU * theta).cos() * mass;
    }
    let measured = solution_at(p, n, x, t, q).norm();
    Ok(LowerBoundCheck {
        holds: measured >= bound - q.abs_tol * (n - 1) as f64,
        bound,
        measured,
    })
}
