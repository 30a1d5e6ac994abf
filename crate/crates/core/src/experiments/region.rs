//! Exact boundaries of the regions where the weighted extension estimate
//! is known to hold or to fail, in the `(α, 1/p)` plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{display, Rational};

/// `{lo < α ≤ hi (or α < hi), lower(α) ≤ 1/p < upper(α)}` written out as
/// formulas and evaluated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub label: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub alpha: String,
    pub inv_p: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub n: usize,
    pub positive: RegionBoundary,
    pub knapp_false: RegionBoundary,
    pub paraboloid_false: Option<RegionBoundary>,
    pub endpoints: Vec<Endpoint>,
    pub notes: Vec<String>,
}

/// Vertical section of the regions at fixed `α`, in `1/p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSlice {
    pub alpha: String,
    /// `[lo, hi)`; `None` when `α` is outside `(2n/(n+1), n]`.
    pub positive: Option<(String, String)>,
    /// The estimate fails for `1/p >` this value.
    pub false_above: Option<String>,
    /// Neither proved nor refuted, closed at both ends.
    pub open_gap: Option<(String, String)>,
}

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn region_report(n: usize) -> Result<RegionReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
    }
    let ni = n as i128;
    let paraboloid_false = (n >= 4).then(|| RegionBoundary {
        label: "paraboloid counterexample".into(),
        formula: format!("alpha >= 2, 1/p > 2*alpha/{}", n + 1),
    });
    let mut notes = Vec::new();
    if n < 4 {
        notes.push(format!(
            "paraboloid counterexample region empty for n = {n}: the condition is stated for n >= 4"
        ));
    }
    let endpoints = vec![
        Endpoint {
            alpha: display(&q(2 * ni, ni + 1)),
            inv_p: display(&q(2, ni + 1)),
            note: "Stein–Tomas estimate; corner where alpha/n = 2(alpha-1)/(n-1)".into(),
        },
        Endpoint {
            alpha: display(&q(ni + 1, 2)),
            inv_p: "1".into(),
            note: "measures with gamma(eta) = eta at eta = (n-1)/2, rescaled".into(),
        },
        Endpoint {
            alpha: display(&q(ni, 1)),
            inv_p: "1".into(),
            note: "trivial case".into(),
        },
    ];
    Ok(RegionReport {
        n,
        positive: RegionBoundary {
            label: "estimate holds".into(),
            formula: format!("{} < alpha <= {n}, alpha/{n} <= 1/p < 2*(alpha-1)/{}", display(&q(2 * ni, ni + 1)), n - 1),
        },
        knapp_false: RegionBoundary {
            label: "Knapp counterexample".into(),
            formula: format!("alpha < 2, 1/p > 2*(alpha-1)/{}", n - 1),
        },
        paraboloid_false,
        endpoints,
        notes,
    })
}

/// `2(α-1)/(n-1)`.
pub fn knapp_threshold(n: usize, alpha: &Rational) -> Rational {
    (alpha - 1) * 2 / (n as i128 - 1)
}

/// `2α/(n+1)`.
pub fn paraboloid_threshold(n: usize, alpha: &Rational) -> Rational {
    alpha * 2 / (n as i128 + 1)
}

pub fn region_slice(n: usize, alpha: &Rational) -> Result<RegionSlice> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
    }
    let ni = n as i128;
    let upper = knapp_threshold(n, alpha);
    let in_positive = *alpha > q(2 * ni, ni + 1) && *alpha <= q(ni, 1);
    let positive = in_positive.then(|| (display(&(alpha / ni)), display(&upper)));
    let two = Rational::from_integer(2);
    let false_above = if *alpha < two {
        Some(upper)
    } else if n >= 4 {
        Some(paraboloid_threshold(n, alpha))
    } else {
        None
    };
    let open_gap = match (in_positive, false_above) {
        (true, Some(f)) if f > upper => Some((display(&upper), display(&f))),
        _ => None,
    };
    Ok(RegionSlice {
        alpha: display(alpha),
        positive,
        false_above: false_above.map(|f| display(&f)),
        open_gap,
    })
}
