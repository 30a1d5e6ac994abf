//! Gauss–Legendre rules and small numerical helpers shared by the kernels.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// Largest rule used on a single panel; longer integrals are split.
pub const MAX_PANEL_NODES: usize = 64;

/// Nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn rules() -> &'static [OnceLock<Rule>] {
    static RULES: OnceLock<Vec<OnceLock<Rule>>> = OnceLock::new();
    RULES.get_or_init(|| (0..=MAX_PANEL_NODES).map(|_| OnceLock::new()).collect())
}

/// The `n`-point Gauss–Legendre rule, `1 <= n <= 64`, cached.
pub fn gauss_legendre(n: usize) -> &'static Rule {
    assert!((1..=MAX_PANEL_NODES).contains(&n), "rule size {n} out of range");
    rules()[n].get_or_init(|| {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 1"));
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    })
}

/// Splits a requested node count into `(panels, nodes_per_panel)`.
pub fn panels_for(nodes: usize) -> (usize, usize) {
    let nodes = nodes.max(1);
    let panels = nodes.div_ceil(MAX_PANEL_NODES);
    (panels, nodes.div_ceil(panels))
}

/// Composite nodes and weights on `[-h, h]` using `nodes` points in total
/// (rounded up to equal panels).
pub fn composite_nodes(h: f64, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let (panels, per) = panels_for(nodes);
    let rule = gauss_legendre(per);
    let width = 2.0 * h / panels as f64;
    let mut xs = Vec::with_capacity(panels * per);
    let mut ws = Vec::with_capacity(panels * per);
    for k in 0..panels {
        let mid = -h + (k as f64 + 0.5) * width;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + 0.5 * width * x);
            ws.push(0.5 * width * w);
        }
    }
    (xs, ws)
}

/// Error-free product: `a * b = hi + lo` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// `x - round(x)` in `[-1/2, 1/2]`.
#[inline]
pub fn centered_frac(x: f64) -> f64 {
    x - x.round()
}

/// `a * b` reduced modulo 1 to `[-1/2, 1/2]`, keeping the rounding error of
/// the product.
#[inline]
pub fn prod_mod1(a: f64, b: f64) -> f64 {
    let (hi, lo) = two_prod(a, b);
    centered_frac(centered_frac(hi) + lo)
}

/// `a * b * c` modulo 1, accurate when `b * c` is exact (dyadic inputs).
#[inline]
pub fn prod3_mod1(a: f64, b: f64, c: f64) -> f64 {
    let (hi, lo) = two_prod(a, b);
    let (hh, hl) = two_prod(hi, c);
    centered_frac(centered_frac(hh) + hl + lo * c)
}

/// `e^{2 pi i x}`.
#[inline]
pub fn cis_cycles(x: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// Pairwise summation; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}
