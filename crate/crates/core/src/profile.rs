//! Self-similar frequency profiles `g_k`.
//!
//! `g_k` is the indicator of `L^k` closed intervals of halfwidth `delta^k`
//! centred at `sum_{r=1..k} l_r delta^(sigma + r - 1)`, `1 <= l_r <= L`.
//! The initial data of the free Schrödinger problem is the tensor product
//! `f^(xi) = prod_j g_k(xi_j)`.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DyadicParams;
use crate::rational::{display, from_pair, to_f64, to_pair, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub center: Rational,
    pub halfwidth: Rational,
}

/// `xi -> shift + scale * xi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap1D {
    scale: Rational,
    shift: Rational,
}

impl AffineMap1D {
    pub fn new(scale: Rational, shift: Rational) -> Result<Self> {
        if scale <= Rational::from_integer(0) {
            return Err(Error::InvalidParameter(format!(
                "affine scale {} must be positive",
                display(&scale)
            )));
        }
        Ok(Self { scale, shift })
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn shift(&self) -> &Rational {
        &self.shift
    }

    pub fn apply(&self, xi: &Rational) -> Rational {
        self.shift + self.scale * xi
    }

    pub fn apply_interval(&self, iv: &Interval) -> Interval {
        Interval {
            center: self.apply(&iv.center),
            halfwidth: self.scale * iv.halfwidth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile {
    params: DyadicParams,
    level: u32,
    intervals: Vec<Interval>,
    centers: Vec<f64>,
    halfwidth: f64,
}

impl FrequencyProfile {
    /// Builds `g_k` for `k = level`.
    pub fn new(params: DyadicParams, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidParameter("profile level must be >= 1".into()));
        }
        let ell = params.ell_count();
        let count = (ell as u128).checked_pow(level).filter(|&c| c <= 1 << 24).ok_or_else(|| {
            Error::InvalidParameter(format!("L^k = {ell}^{level} intervals is too many"))
        })? as usize;
        let halfwidth = params.delta_power(0, level as i32);
        // delta^(sigma + r - 1) for r = 1..=k
        let steps: Vec<Rational> = (1..=level as i32)
            .map(|r| params.delta_power(1, r - 1))
            .collect();

        let mut intervals = Vec::with_capacity(count);
        let mut digits = vec![1u64; level as usize];
        for _ in 0..count {
            let center = digits
                .iter()
                .zip(&steps)
                .fold(Rational::from_integer(0), |acc, (&l, step)| {
                    acc + step * Rational::from_integer(l as i128)
                });
            intervals.push(Interval { center, halfwidth });
            // mixed-radix increment, last digit fastest
            for d in digits.iter_mut().rev() {
                if *d < ell {
                    *d += 1;
                    break;
                }
                *d = 1;
            }
        }
        intervals.sort();
        for w in intervals.windows(2) {
            if w[1].center - w[0].center <= w[0].halfwidth + w[1].halfwidth {
                return Err(Error::Overlap(format!(
                    "intervals at {} and {} touch",
                    display(&w[0].center),
                    display(&w[1].center)
                )));
            }
        }
        let centers = intervals.iter().map(|iv| to_f64(&iv.center)).collect();
        Ok(Self {
            params,
            level,
            intervals,
            centers,
            halfwidth: to_f64(&halfwidth),
        })
    }

    pub fn params(&self) -> DyadicParams {
        self.params
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn ell_count(&self) -> u64 {
        self.params.ell_count()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Interval centres as floats (exact: they are short dyadics).
    pub fn centers_f64(&self) -> &[f64] {
        &self.centers
    }

    pub fn halfwidth_f64(&self) -> f64 {
        self.halfwidth
    }

    /// Largest `|xi|` on the support.
    pub fn xi_max(&self) -> f64 {
        self.centers.last().copied().unwrap_or(0.0) + self.halfwidth
    }

    /// Closed-interval membership.
    pub fn contains(&self, xi: f64) -> bool {
        let idx = self.centers.partition_point(|&c| c + self.halfwidth < xi);
        idx < self.centers.len() && self.centers[idx] - self.halfwidth <= xi
    }

    pub fn eval(&self, xi: f64) -> u8 {
        u8::from(self.contains(xi))
    }

    /// `int g_k = 2 delta^k L^k`.
    pub fn support_mass(&self) -> Rational {
        let count = Rational::from_integer(self.intervals.len() as i128);
        Rational::from_integer(2) * self.params.delta_power(0, self.level as i32) * count
    }

    pub fn support_mass_f64(&self) -> f64 {
        to_f64(&self.support_mass())
    }

    /// Writes `g_k` as `L` rescaled, translated copies of `g_{k-1}` and
    /// checks the reconstruction exactly.
    pub fn self_similar_decomposition(&self) -> Result<(FrequencyProfile, Vec<AffineMap1D>)> {
        if self.level < 2 {
            return Err(Error::InvalidParameter(
                "level 1 profiles have no self-similar decomposition".into(),
            ));
        }
        let base = FrequencyProfile::new(self.params, self.level - 1)?;
        let delta = self.params.delta();
        let step = self.params.delta_pow_sigma();
        let maps = (1..=self.ell_count())
            .map(|l| AffineMap1D::new(delta, step * Rational::from_integer(l as i128)))
            .collect::<Result<Vec<_>>>()?;
        let mut rebuilt: Vec<Interval> = maps
            .iter()
            .flat_map(|m| base.intervals.iter().map(move |iv| m.apply_interval(iv)))
            .collect();
        rebuilt.sort();
        if rebuilt.len() != self.intervals.len() {
            return Err(Error::DecompositionMismatch(format!(
                "{} rebuilt intervals, expected {}",
                rebuilt.len(),
                self.intervals.len()
            )));
        }
        if let Some((got, want)) = rebuilt.iter().zip(&self.intervals).find(|(a, b)| a != b) {
            return Err(Error::DecompositionMismatch(format!(
                "rebuilt interval {}±{} differs from {}±{}",
                display(&got.center),
                display(&got.halfwidth),
                display(&want.center),
                display(&want.halfwidth)
            )));
        }
        Ok((base, maps))
    }

    /// Offset decomposition `xi = sum l_r delta^(sigma+r-1) + eps` of a
    /// support point; `None` off the support.
    pub fn digits_of(&self, xi: &Rational) -> Option<(Vec<u64>, Rational)> {
        let x = to_f64(xi);
        let idx = self.centers.partition_point(|&c| c + self.halfwidth < x);
        let iv = self.intervals.get(idx)?;
        let eps = xi - iv.center;
        if eps.abs() > iv.halfwidth {
            return None;
        }
        // lexicographic order of (l_1..l_k) is the sorted order
        let ell = self.ell_count();
        let mut digits = vec![0u64; self.level as usize];
        let mut rest = idx as u64;
        for d in digits.iter_mut().rev() {
            *d = rest % ell + 1;
            rest /= ell;
        }
        Some((digits, eps))
    }

    pub fn to_json(&self) -> ProfileJson {
        ProfileJson {
            delta_log2: self.params.delta_log2(),
            sigma_num: self.params.sigma_num(),
            level: self.level,
            intervals: self
                .intervals
                .iter()
                .map(|iv| {
                    let c = to_pair(&iv.center);
                    let h = to_pair(&iv.halfwidth);
                    [c[0], c[1], h[0], h[1]]
                })
                .collect(),
        }
    }

    /// Rebuilds the profile from its parameters and checks the stored
    /// intervals match exactly.
    pub fn from_json(json: &ProfileJson) -> Result<Self> {
        let params = DyadicParams::new(json.delta_log2, json.sigma_num)?;
        let profile = Self::new(params, json.level)?;
        let stored = json
            .intervals
            .iter()
            .map(|v| {
                Ok(Interval {
                    center: from_pair([v[0], v[1]])?,
                    halfwidth: from_pair([v[2], v[3]])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if stored != profile.intervals {
            return Err(Error::Deserialize(
                "interval list differs from the one implied by (delta_log2, sigma_num, level)".into(),
            ));
        }
        Ok(profile)
    }
}

/// `{delta_log2, sigma_num, level, intervals: [[cn, cd, hn, hd], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub delta_log2: u32,
    pub sigma_num: u32,
    pub level: u32,
    pub intervals: Vec<[i128; 4]>,
}

/// Builds `g_k` from general `(delta, sigma)` inputs.
pub fn build_profile(delta: &Rational, sigma: &Rational, level: u32) -> Result<FrequencyProfile> {
    let params = DyadicParams::from_delta_sigma(delta, sigma, level)?;
    FrequencyProfile::new(params, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn profile(a: u32, c: u32, k: u32) -> FrequencyProfile {
        FrequencyProfile::new(DyadicParams::new(a, c).unwrap(), k).unwrap()
    }

    #[test]
    fn level_one_sixteenth() {
        let p = build_profile(&q(1, 16), &q(1, 4), 1).unwrap();
        let centers: Vec<_> = p.intervals().iter().map(|iv| iv.center).collect();
        assert_eq!(centers, vec![q(1, 2), q(1, 1)]);
        assert!(p.intervals().iter().all(|iv| iv.halfwidth == q(1, 16)));
    }

    #[test]
    fn level_two_sixteenth() {
        let p = build_profile(&q(1, 16), &q(1, 4), 2).unwrap();
        let centers: Vec<_> = p.intervals().iter().map(|iv| iv.center).collect();
        assert_eq!(
            centers,
            vec![q(1, 2) + q(1, 32), q(1, 2) + q(1, 16), q(1, 1) + q(1, 32), q(1, 1) + q(1, 16)]
        );
        assert!(p.intervals().iter().all(|iv| iv.halfwidth == q(1, 256)));
    }

    #[test]
    fn level_one_fine_grid() {
        let p = profile(12, 3, 1);
        let centers: Vec<_> = p.intervals().iter().map(|iv| iv.center).collect();
        let expected: Vec<_> = (1..=8).map(|l| q(l, 8)).collect();
        assert_eq!(centers, expected);
        assert_eq!(p.intervals()[0].halfwidth, q(1, 4096));
    }

    #[test]
    fn evaluation() {
        let p1 = profile(4, 1, 1);
        assert_eq!(p1.eval(0.5), 1);
        assert_eq!(p1.eval(0.25), 0);
        assert_eq!(p1.eval(0.5 + 1.0 / 16.0), 1, "closed interval boundary");
        assert_eq!(p1.eval(1.0 + 1.0 / 16.0 + 1e-9), 0);
        let p2 = profile(4, 1, 2);
        assert_eq!(p2.eval(0.5 + 1.0 / 32.0), 1);
        assert_eq!(p2.eval(0.5), 0);
    }

    #[test]
    fn masses() {
        assert_eq!(profile(4, 1, 1).support_mass(), q(1, 4));
        assert_eq!(profile(12, 3, 1).support_mass(), q(1, 256));
        assert_eq!(profile(4, 1, 2).support_mass(), q(1, 32));
    }

    #[test]
    fn decomposition_of_level_two() {
        let p = profile(4, 1, 2);
        let (base, maps) = p.self_similar_decomposition().unwrap();
        assert_eq!(base, profile(4, 1, 1));
        assert_eq!(
            maps,
            vec![
                AffineMap1D::new(q(1, 16), q(1, 2)).unwrap(),
                AffineMap1D::new(q(1, 16), q(1, 1)).unwrap()
            ]
        );
    }

    #[test]
    fn decomposition_of_level_three() {
        let p = profile(12, 3, 3);
        let (base, maps) = p.self_similar_decomposition().unwrap();
        assert_eq!(maps.len(), 8);
        assert_eq!(base.level(), 2);
    }

    #[test]
    fn level_one_has_no_decomposition() {
        assert!(profile(4, 1, 1).self_similar_decomposition().is_err());
    }

    #[test]
    fn digits_recover_the_offsets() {
        let p = profile(8, 2, 2);
        let xi = q(3, 4) + q(2, 1024) + q(1, 1 << 17);
        let (digits, eps) = p.digits_of(&xi).unwrap();
        assert_eq!(digits, vec![3, 2]);
        assert_eq!(eps, q(1, 1 << 17));
        assert!(p.digits_of(&q(1, 8)).is_none());
    }

    #[test]
    fn json_round_trip() {
        let p = profile(8, 2, 2);
        let text = serde_json::to_string(&p.to_json()).unwrap();
        let back: ProfileJson = serde_json::from_str(&text).unwrap();
        assert_eq!(FrequencyProfile::from_json(&back).unwrap(), p);
        let mut tampered = back.clone();
        tampered.intervals[0][0] += 1;
        assert!(FrequencyProfile::from_json(&tampered).is_err());
    }
}
