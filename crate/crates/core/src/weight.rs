//! Weights given as disjoint unions of axis-aligned boxes with density 1.
//!
//! Thickened lattices are products of per-axis interval families, so they
//! are stored in product form: the mass of a cube is then the product of
//! one-dimensional masses. Arbitrary unions use the explicit layout.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_pair, to_f64, to_pair, Rational};

/// Sorted, pairwise disjoint closed intervals on one axis.
#[derive(Debug, Clone)]
pub struct AxisFamily {
    centers: Vec<Rational>,
    halfwidths: Vec<Rational>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// `prefix[i]` is the total length of intervals `0..i`.
    prefix: Vec<f64>,
}

impl PartialEq for AxisFamily {
    fn eq(&self, other: &Self) -> bool {
        self.centers == other.centers && self.halfwidths == other.halfwidths
    }
}

impl AxisFamily {
    pub fn new(centers: Vec<Rational>, halfwidths: Vec<Rational>) -> Result<Self> {
        if centers.len() != halfwidths.len() || centers.is_empty() {
            return Err(Error::InvalidParameter(
                "an axis family needs matching, non-empty centre and halfwidth lists".into(),
            ));
        }
        if halfwidths.iter().any(|h| *h <= Rational::from_integer(0)) {
            return Err(Error::InvalidParameter("halfwidths must be positive".into()));
        }
        for (i, w) in centers.windows(2).enumerate() {
            if w[1] - w[0] < halfwidths[i] + halfwidths[i + 1] {
                return Err(Error::BoxOverlap(i, i + 1));
            }
        }
        let lo: Vec<f64> = centers.iter().zip(&halfwidths).map(|(c, h)| to_f64(&(c - h))).collect();
        let hi: Vec<f64> = centers.iter().zip(&halfwidths).map(|(c, h)| to_f64(&(c + h))).collect();
        let mut prefix = Vec::with_capacity(lo.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for h in &halfwidths {
            acc += 2.0 * to_f64(h);
            prefix.push(acc);
        }
        Ok(Self {
            centers,
            halfwidths,
            lo,
            hi,
            prefix,
        })
    }

    /// Equal halfwidths around the given sorted centres.
    pub fn uniform(centers: Vec<Rational>, halfwidth: Rational) -> Result<Self> {
        let h = vec![halfwidth; centers.len()];
        Self::new(centers, h)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Rational] {
        &self.centers
    }

    pub fn halfwidths(&self) -> &[Rational] {
        &self.halfwidths
    }

    pub fn center_f64(&self, i: usize) -> f64 {
        0.5 * (self.lo[i] + self.hi[i])
    }

    pub fn length(&self) -> Rational {
        self.halfwidths.iter().fold(Rational::from_integer(0), |a, h| a + h * Rational::from_integer(2))
    }

    pub fn length_f64(&self) -> f64 {
        *self.prefix.last().unwrap_or(&0.0)
    }

    /// Length of `[a, b]` covered by the family.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let i0 = self.hi.partition_point(|&h| h <= a);
        let i1 = self.lo.partition_point(|&l| l < b);
        if i0 >= i1 {
            return 0.0;
        }
        let last = i1 - 1;
        let full = self.prefix[i1] - self.prefix[i0];
        let cut = (a - self.lo[i0]).max(0.0) + (self.hi[last] - b).max(0.0);
        (full - cut).max(0.0)
    }

    pub fn mass_exact(&self, a: &Rational, b: &Rational) -> Rational {
        let zero = Rational::from_integer(0);
        self.centers
            .iter()
            .zip(&self.halfwidths)
            .map(|(c, h)| {
                let lo = std::cmp::max(c - h, *a);
                let hi = std::cmp::min(c + h, *b);
                if hi > lo {
                    hi - lo
                } else {
                    zero
                }
            })
            .fold(zero, |acc, v| acc + v)
    }

    /// Largest `mass(c - r, c + r)` over ascending candidate centres, with
    /// the first maximizing index. Both window ends move monotonically, so
    /// one sweep suffices.
    pub fn max_mass_over(&self, candidates: &[f64], r: f64) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0usize);
        let (mut i0, mut i1) = (0usize, 0usize);
        let m = self.lo.len();
        for (k, &c) in candidates.iter().enumerate() {
            let (a, b) = (c - r, c + r);
            while i0 < m && self.hi[i0] <= a {
                i0 += 1;
            }
            while i1 < m && self.lo[i1] < b {
                i1 += 1;
            }
            let mass = if i0 >= i1 {
                0.0
            } else {
                let full = self.prefix[i1] - self.prefix[i0];
                (full - (a - self.lo[i0]).max(0.0) - (self.hi[i1 - 1] - b).max(0.0)).max(0.0)
            };
            if mass > best.0 {
                best = (mass, k);
            }
        }
        best
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo[0], *self.hi.last().expect("non-empty"))
    }

    /// Length-weighted mean position.
    pub fn centroid(&self) -> f64 {
        let total = self.length_f64();
        self.centers
            .iter()
            .zip(&self.halfwidths)
            .map(|(c, h)| to_f64(c) * 2.0 * to_f64(h))
            .sum::<f64>()
            / total
    }

    fn scaled(&self, lambda: &Rational) -> Self {
        Self::new(
            self.centers.iter().map(|c| c * lambda).collect(),
            self.halfwidths.iter().map(|h| h * lambda).collect(),
        )
        .expect("positive dilation preserves disjointness")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cuboid {
    pub center: Vec<Rational>,
    pub halfwidths: Vec<Rational>,
}

impl Cuboid {
    pub fn new(center: Vec<Rational>, halfwidths: Vec<Rational>) -> Result<Self> {
        if center.len() != halfwidths.len() || center.is_empty() {
            return Err(Error::InvalidParameter("box centre and halfwidths must share a positive dimension".into()));
        }
        if halfwidths.iter().any(|h| *h <= Rational::from_integer(0)) {
            return Err(Error::InvalidParameter("box halfwidths must be positive".into()));
        }
        Ok(Self { center, halfwidths })
    }

    pub fn volume(&self) -> Rational {
        self.halfwidths
            .iter()
            .fold(Rational::from_integer(1), |a, h| a * h * Rational::from_integer(2))
    }

    /// Interiors intersect.
    pub fn overlaps(&self, other: &Cuboid) -> bool {
        self.center
            .iter()
            .zip(&self.halfwidths)
            .zip(other.center.iter().zip(&other.halfwidths))
            .all(|((c1, h1), (c2, h2))| (c1 - c2).abs() < h1 + h2)
    }

    /// `|self ∩ Q(x, r)|`.
    pub fn cube_overlap(&self, x: &[f64], r: f64) -> f64 {
        let mut v = 1.0;
        for ((c, h), &xi) in self.center.iter().zip(&self.halfwidths).zip(x) {
            let (c, h) = (to_f64(c), to_f64(h));
            let len = (c + h).min(xi + r) - (c - h).max(xi - r);
            if len <= 0.0 {
                return 0.0;
            }
            v *= len;
        }
        v
    }

    pub fn cube_overlap_exact(&self, x: &[Rational], r: &Rational) -> Rational {
        let zero = Rational::from_integer(0);
        let mut v = Rational::from_integer(1);
        for ((c, h), xi) in self.center.iter().zip(&self.halfwidths).zip(x) {
            let len = std::cmp::min(c + h, xi + r) - std::cmp::max(c - h, xi - r);
            if len <= zero {
                return zero;
            }
            v *= len;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// The boxes are all products `I_1 × ... × I_n` of intervals drawn from
    /// the per-axis families.
    Product(Vec<AxisFamily>),
    Explicit(Vec<Cuboid>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxUnionWeight {
    n: usize,
    layout: Layout,
}

impl BoxUnionWeight {
    pub fn product(axes: Vec<AxisFamily>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter("a weight needs at least one axis".into()));
        }
        Ok(Self {
            n: axes.len(),
            layout: Layout::Product(axes),
        })
    }

    /// Checks pairwise disjointness of interiors.
    pub fn from_boxes(n: usize, boxes: Vec<Cuboid>) -> Result<Self> {
        if n == 0 || boxes.is_empty() {
            return Err(Error::InvalidParameter("a weight needs a dimension and at least one box".into()));
        }
        if let Some(b) = boxes.iter().position(|b| b.center.len() != n) {
            return Err(Error::InvalidParameter(format!("box {b} does not have dimension {n}")));
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].overlaps(&boxes[j]) {
                    return Err(Error::BoxOverlap(i, j));
                }
            }
        }
        Ok(Self {
            n,
            layout: Layout::Explicit(boxes),
        })
    }

    pub fn single(center: Vec<Rational>, halfwidths: Vec<Rational>) -> Result<Self> {
        let n = center.len();
        Self::from_boxes(n, vec![Cuboid::new(center, halfwidths)?])
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn box_count(&self) -> u128 {
        match &self.layout {
            Layout::Product(axes) => axes.iter().map(|a| a.len() as u128).product(),
            Layout::Explicit(b) => b.len() as u128,
        }
    }

    /// All boxes; product layouts are enumerated lexicographically.
    pub fn boxes(&self) -> Box<dyn Iterator<Item = Cuboid> + '_> {
        match &self.layout {
            Layout::Explicit(b) => Box::new(b.iter().cloned()),
            Layout::Product(axes) => {
                let total = self.box_count();
                Box::new((0..total).map(move |mut idx| {
                    let mut center = vec![Rational::from_integer(0); axes.len()];
                    let mut half = center.clone();
                    for (i, axis) in axes.iter().enumerate().rev() {
                        let k = (idx % axis.len() as u128) as usize;
                        idx /= axis.len() as u128;
                        center[i] = axis.centers[k];
                        half[i] = axis.halfwidths[k];
                    }
                    Cuboid {
                        center,
                        halfwidths: half,
                    }
                }))
            }
        }
    }

    pub fn volume(&self) -> Rational {
        match &self.layout {
            Layout::Product(axes) => axes.iter().fold(Rational::from_integer(1), |a, ax| a * ax.length()),
            Layout::Explicit(b) => b.iter().fold(Rational::from_integer(0), |a, bx| a + bx.volume()),
        }
    }

    pub fn volume_f64(&self) -> f64 {
        match &self.layout {
            Layout::Product(axes) => axes.iter().map(|a| a.length_f64()).product(),
            Layout::Explicit(b) => b
                .iter()
                .map(|bx| bx.halfwidths.iter().map(|h| 2.0 * to_f64(h)).product::<f64>())
                .sum(),
        }
    }

    /// `|W ∩ Q(x, r)|` where `Q(x, r)` is the cube of half-side `r`.
    pub fn box_mass(&self, x: &[f64], r: f64) -> f64 {
        assert_eq!(x.len(), self.n);
        match &self.layout {
            Layout::Product(axes) => {
                let mut v = 1.0;
                for (axis, &xi) in axes.iter().zip(x) {
                    v *= axis.mass(xi - r, xi + r);
                    if v == 0.0 {
                        return 0.0;
                    }
                }
                v
            }
            Layout::Explicit(b) => b.iter().map(|bx| bx.cube_overlap(x, r)).sum(),
        }
    }

    pub fn box_mass_exact(&self, x: &[Rational], r: &Rational) -> Rational {
        assert_eq!(x.len(), self.n);
        match &self.layout {
            Layout::Product(axes) => axes
                .iter()
                .zip(x)
                .fold(Rational::from_integer(1), |a, (axis, xi)| a * axis.mass_exact(&(xi - r), &(xi + r))),
            Layout::Explicit(b) => b
                .iter()
                .fold(Rational::from_integer(0), |a, bx| a + bx.cube_overlap_exact(x, r)),
        }
    }

    /// Box-by-box sum, independent of the product factorization.
    pub fn box_mass_enumerated(&self, x: &[f64], r: f64) -> f64 {
        self.boxes().map(|b| b.cube_overlap(x, r)).sum()
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.layout {
            Layout::Product(axes) => axes.iter().map(|a| a.bounds()).unzip(),
            Layout::Explicit(b) => {
                let mut lo = vec![f64::INFINITY; self.n];
                let mut hi = vec![f64::NEG_INFINITY; self.n];
                for bx in b {
                    for i in 0..self.n {
                        let (c, h) = (to_f64(&bx.center[i]), to_f64(&bx.halfwidths[i]));
                        lo[i] = lo[i].min(c - h);
                        hi[i] = hi[i].max(c + h);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Euclidean diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    pub fn min_halfwidth(&self) -> f64 {
        match &self.layout {
            Layout::Product(axes) => axes
                .iter()
                .flat_map(|a| a.halfwidths.iter())
                .map(to_f64)
                .fold(f64::INFINITY, f64::min),
            Layout::Explicit(b) => b
                .iter()
                .flat_map(|bx| bx.halfwidths.iter())
                .map(to_f64)
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Volume-weighted centre of mass.
    pub fn centroid(&self) -> Vec<f64> {
        match &self.layout {
            Layout::Product(axes) => axes.iter().map(|a| a.centroid()).collect(),
            Layout::Explicit(b) => {
                let total = self.volume_f64();
                (0..self.n)
                    .map(|i| b.iter().map(|bx| to_f64(&bx.center[i]) * to_f64(&bx.volume())).sum::<f64>() / total)
                    .collect()
            }
        }
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self> {
        if *lambda <= Rational::from_integer(0) {
            return Err(Error::InvalidParameter("dilation factor must be positive".into()));
        }
        let layout = match &self.layout {
            Layout::Product(axes) => Layout::Product(axes.iter().map(|a| a.scaled(lambda)).collect()),
            Layout::Explicit(b) => Layout::Explicit(
                b.iter()
                    .map(|bx| Cuboid {
                        center: bx.center.iter().map(|c| c * lambda).collect(),
                        halfwidths: bx.halfwidths.iter().map(|h| h * lambda).collect(),
                    })
                    .collect(),
            ),
        };
        Ok(Self { n: self.n, layout })
    }

    /// Same point set, regardless of layout.
    pub fn same_boxes(&self, other: &Self) -> bool {
        if self.n != other.n || self.box_count() != other.box_count() {
            return false;
        }
        if let (Layout::Product(a), Layout::Product(b)) = (&self.layout, &other.layout) {
            return a == b;
        }
        let mut x: Vec<_> = self.boxes().map(|b| (b.center, b.halfwidths)).collect();
        let mut y: Vec<_> = other.boxes().map(|b| (b.center, b.halfwidths)).collect();
        x.sort();
        y.sort();
        x == y
    }

    pub fn to_json(&self) -> WeightJson {
        let enc = |c: &Rational, h: &Rational| {
            let (c, h) = (to_pair(c), to_pair(h));
            [c[0], c[1], h[0], h[1]]
        };
        match &self.layout {
            Layout::Product(axes) => WeightJson {
                n: self.n,
                layout: "product".into(),
                axes: Some(
                    axes.iter()
                        .map(|a| a.centers.iter().zip(&a.halfwidths).map(|(c, h)| enc(c, h)).collect())
                        .collect(),
                ),
                boxes: None,
            },
            Layout::Explicit(b) => WeightJson {
                n: self.n,
                layout: "explicit".into(),
                axes: None,
                boxes: Some(
                    b.iter()
                        .map(|bx| bx.center.iter().zip(&bx.halfwidths).map(|(c, h)| enc(c, h)).collect())
                        .collect(),
                ),
            },
        }
    }

    pub fn from_json(json: &WeightJson) -> Result<Self> {
        let dec = |v: &[i128; 4]| -> Result<(Rational, Rational)> {
            Ok((from_pair([v[0], v[1]])?, from_pair([v[2], v[3]])?))
        };
        let w = match (json.layout.as_str(), &json.axes, &json.boxes) {
            ("product", Some(axes), None) => Self::product(
                axes.iter()
                    .map(|ax| {
                        let (c, h): (Vec<_>, Vec<_>) = ax.iter().map(dec).collect::<Result<Vec<_>>>()?.into_iter().unzip();
                        AxisFamily::new(c, h)
                    })
                    .collect::<Result<Vec<_>>>()?,
            )?,
            ("explicit", None, Some(boxes)) => Self::from_boxes(
                json.n,
                boxes
                    .iter()
                    .map(|bx| {
                        let (c, h): (Vec<_>, Vec<_>) = bx.iter().map(dec).collect::<Result<Vec<_>>>()?.into_iter().unzip();
                        Cuboid::new(c, h)
                    })
                    .collect::<Result<Vec<_>>>()?,
            )?,
            _ => return Err(Error::Deserialize(format!("unknown weight layout '{}'", json.layout))),
        };
        if w.n != json.n {
            return Err(Error::Deserialize(format!("dimension {} does not match the boxes", json.n)));
        }
        Ok(w)
    }
}

/// `{n, layout, axes | boxes}` with every interval as
/// `[center_num, center_den, halfwidth_num, halfwidth_den]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightJson {
    pub n: usize,
    pub layout: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub axes: Option<Vec<Vec<[i128; 4]>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boxes: Option<Vec<Vec<[i128; 4]>>>,
}
