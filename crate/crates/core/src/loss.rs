//! The logistic loss `f(v) = log(1 + exp(-v))`, its quadratic Maclaurin
//! surrogate and the tangent-line piecewise-linear underestimator.

use std::f64::consts::LN_2;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// `log(1 + exp(-v))`, evaluated without overflow.
pub fn logistic_loss(v: f64) -> f64 {
    if v >= 0.0 {
        (-v).exp().ln_1p()
    } else {
        -v + v.exp().ln_1p()
    }
}

/// `f'(v) = -1 / (1 + exp(v))`.
pub fn logistic_loss_grad(v: f64) -> f64 {
    if v >= 0.0 {
        let e = (-v).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + v.exp())
    }
}

/// `f''(v) = s(v) (1 - s(v))` with `s` the logistic function.
pub fn logistic_loss_curv(v: f64) -> f64 {
    let e = (-v.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// The logistic function `1 / (1 + exp(-v))`.
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Second-order Maclaurin expansion of the logistic loss around 0.
pub fn quad_loss(v: f64) -> f64 {
    v * v / 8.0 - v / 2.0 + LN_2
}

pub fn quad_loss_grad(v: f64) -> f64 {
    v / 4.0 - 0.5
}

pub const QUAD_LOSS_CURV: f64 = 0.25;

/// A tangent location, with the two limits kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TangentPoint {
    NegInf,
    Finite(f64),
    PosInf,
}

impl TangentPoint {
    fn rank(&self) -> (i8, f64) {
        match *self {
            TangentPoint::NegInf => (-1, 0.0),
            TangentPoint::Finite(v) => (0, v),
            TangentPoint::PosInf => (1, 0.0),
        }
    }
}

impl fmt::Display for TangentPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TangentPoint::NegInf => f.write_str("-inf"),
            TangentPoint::Finite(v) => write!(f, "{v}"),
            TangentPoint::PosInf => f.write_str("inf"),
        }
    }
}

impl From<f64> for TangentPoint {
    fn from(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            TangentPoint::NegInf
        } else if v == f64::INFINITY {
            TangentPoint::PosInf
        } else {
            TangentPoint::Finite(v)
        }
    }
}

/// One supporting line `t >= slope * v + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub point: TangentPoint,
    pub slope: f64,
    pub offset: f64,
}

impl Tangent {
    pub fn at(point: TangentPoint) -> Self {
        match point {
            // f'(v)(u - v) + f(v) -> -u as v -> -inf
            TangentPoint::NegInf => Tangent {
                point,
                slope: -1.0,
                offset: 0.0,
            },
            TangentPoint::PosInf => Tangent {
                point,
                slope: 0.0,
                offset: 0.0,
            },
            TangentPoint::Finite(v) => {
                let slope = logistic_loss_grad(v);
                Tangent {
                    point,
                    slope,
                    offset: logistic_loss(v) - slope * v,
                }
            }
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.slope * v + self.offset
    }
}

/// Tangent lines sorted by location (equivalently by slope).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSet {
    lines: Vec<Tangent>,
}

/// Finite tangent locations of the default 17-line set; the set also holds
/// both infinite sentinels.
pub const DEFAULT_POINTS: [f64; 8] = [0.0, 0.44, 0.89, 1.37, 1.90, 2.63, 3.55, 5.16];

impl TangentSet {
    pub fn new<P: Into<TangentPoint> + Copy>(points: &[P]) -> Result<Self> {
        let mut pts: Vec<TangentPoint> = points.iter().map(|&p| p.into()).collect();
        if pts
            .iter()
            .any(|p| matches!(p, TangentPoint::Finite(v) if v.is_nan()))
        {
            return Err(Error::InvalidTangents("NaN tangent point".into()));
        }
        if pts.len() < 2 {
            return Err(Error::InvalidTangents(format!(
                "need at least 2 points, got {}",
                pts.len()
            )));
        }
        pts.sort_by(|a, b| a.rank().partial_cmp(&b.rank()).unwrap());
        if let Some(w) = pts.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidTangents(format!("duplicate point {}", w[0])));
        }
        let lines: Vec<Tangent> = pts.into_iter().map(Tangent::at).collect();
        // far-out finite points can saturate the slope in floating point
        if let Some(w) = lines.windows(2).find(|w| w[0].slope >= w[1].slope) {
            return Err(Error::InvalidTangents(format!(
                "points {} and {} give indistinguishable slopes",
                w[0].point, w[1].point
            )));
        }
        Ok(Self { lines })
    }

    /// `{0, ±0.44, ±0.89, ±1.37, ±1.90, ±2.63, ±3.55, ±5.16, ±inf}`.
    pub fn default17() -> Self {
        let mut pts = vec![TangentPoint::NegInf, TangentPoint::PosInf];
        for &v in &DEFAULT_POINTS {
            pts.push(TangentPoint::Finite(v));
            if v != 0.0 {
                pts.push(TangentPoint::Finite(-v));
            }
        }
        Self::new(&pts).expect("default tangent set is valid")
    }

    /// Parses one point per line; `inf`/`-inf` denote the sentinels. Blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let tok = line.split('#').next().unwrap_or("").trim();
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| {
                Error::InvalidTangents(format!("line {}: cannot parse `{tok}`", lineno + 1))
            })?;
            pts.push(TangentPoint::from(v));
        }
        Self::new(&pts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn lines(&self) -> &[Tangent] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn has_sentinels(&self) -> bool {
        self.lines.first().map(|t| t.point) == Some(TangentPoint::NegInf)
            && self.lines.last().map(|t| t.point) == Some(TangentPoint::PosInf)
    }

    /// Locations where consecutive lines intersect; `kinks()[l]` separates
    /// line `l` from line `l + 1`.
    pub fn kinks(&self) -> Vec<f64> {
        self.lines
            .windows(2)
            .map(|w| -(w[1].offset - w[0].offset) / (w[1].slope - w[0].slope))
            .collect()
    }

    pub fn eval(&self, v: f64) -> f64 {
        pwl_loss(self, v)
    }

    /// Slope of the line that attains the maximum at `v` (lowest index on ties).
    pub fn active_slope(&self, v: f64) -> f64 {
        let mut best = &self.lines[0];
        for t in &self.lines[1..] {
            if t.eval(v) > best.eval(v) {
                best = t;
            }
        }
        best.slope
    }

    /// Writes `point slope offset` rows.
    pub fn table(&self) -> String {
        let mut out = String::from("point\tslope\toffset\n");
        for t in &self.lines {
            out.push_str(&format!("{}\t{:.12}\t{:.12}\n", t.point, t.slope, t.offset));
        }
        out
    }
}

impl Default for TangentSet {
    fn default() -> Self {
        Self::default17()
    }
}

/// Pointwise maximum of the tangent lines.
pub fn pwl_loss(tset: &TangentSet, v: f64) -> f64 {
    tset.lines
        .iter()
        .map(|t| t.eval(v))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn make_tangents<P: Into<TangentPoint> + Copy>(points: &[P]) -> Result<TangentSet> {
    TangentSet::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn loss_values() {
        assert_abs_diff_eq!(logistic_loss(0.0), LN_2, epsilon = 1e-15);
        // log(1 + e^-3)
        assert_abs_diff_eq!(logistic_loss(3.0), 0.048_587_351_573_741_97, epsilon = 1e-15);
        assert_abs_diff_eq!(logistic_loss(-3.0), 3.048_587_351_573_742, epsilon = 1e-14);
        let far = logistic_loss(800.0);
        assert!((0.0..=1e-300).contains(&far));
        assert!(logistic_loss(-800.0).is_finite());
        assert_abs_diff_eq!(logistic_loss(-800.0), 800.0);
    }

    #[test]
    fn derivatives() {
        assert_eq!(logistic_loss_grad(0.0), -0.5);
        assert_eq!(logistic_loss_curv(0.0), 0.25);
        for v in [-5.0, -1.0, 1.0, 5.0] {
            let g = logistic_loss_grad(v);
            assert!(g > -1.0 && g < 0.0);
            assert!(logistic_loss_curv(v) > 0.0);
        }
        let (v, h) = (0.7, 1e-5);
        let fd = (logistic_loss(v + h) - logistic_loss(v - h)) / (2.0 * h);
        assert!((fd - logistic_loss_grad(v)).abs() <= 1e-6);
        let fd2 = (logistic_loss_grad(v + h) - logistic_loss_grad(v - h)) / (2.0 * h);
        assert!((fd2 - logistic_loss_curv(v)).abs() <= 1e-6);
    }

    #[test]
    fn quadratic_surrogate() {
        assert_eq!(quad_loss(0.0), logistic_loss(0.0));
        assert_abs_diff_eq!(quad_loss(4.0), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(logistic_loss(4.0), 0.018_149_927_917_809_76, epsilon = 1e-15);
        assert_abs_diff_eq!(quad_loss(-2.0) - quad_loss(2.0), 2.0, epsilon = 1e-15);
        for v in [-0.01, -0.005, 0.0, 0.003, 0.01] {
            assert!((quad_loss(v) - logistic_loss(v)).abs() <= 1e-6);
        }
        for v in [3.0, 5.0, 8.0] {
            assert!(quad_loss(v) > logistic_loss(v));
        }
    }

    #[test]
    fn sentinel_pair() {
        let t = make_tangents(&[f64::NEG_INFINITY, f64::INFINITY]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!((t.lines()[0].slope, t.lines()[0].offset), (-1.0, 0.0));
        assert_eq!((t.lines()[1].slope, t.lines()[1].offset), (0.0, 0.0));
        assert_eq!(pwl_loss(&t, -2.0), 2.0);
        assert_eq!(pwl_loss(&t, 3.0), 0.0);
    }

    #[test]
    fn default_set() {
        let t = TangentSet::default17();
        assert_eq!(t.len(), 17);
        assert!(t.has_sentinels());
        let origin = t
            .lines()
            .iter()
            .find(|l| l.point == TangentPoint::Finite(0.0))
            .unwrap();
        assert_eq!(origin.slope, -0.5);
        assert_abs_diff_eq!(origin.offset, LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(pwl_loss(&t, 0.0), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(pwl_loss(&t, 0.44), logistic_loss(0.44), epsilon = 1e-15);
        // beyond the zero crossing of the 5.16 tangent (about 6.16) only the
        // flat sentinel is active
        let ten = pwl_loss(&t, 10.0);
        let brute = t.lines().iter().map(|l| l.eval(10.0)).fold(f64::MIN, f64::max);
        assert_eq!(ten, brute);
        assert_eq!(ten, 0.0);
        assert!(ten <= logistic_loss(10.0));
        assert!(pwl_loss(&t, 6.0) > 0.0);
        for w in t.lines().windows(2) {
            assert!(w[0].slope < w[1].slope);
        }
        for l in &t.lines()[1..16] {
            assert!(l.slope > -1.0 && l.slope < 0.0);
        }
    }

    #[test]
    fn invalid_sets() {
        assert!(make_tangents(&[0.0]).is_err());
        assert!(make_tangents(&[0.0, 1.0, 0.0]).is_err());
        assert!(make_tangents(&[f64::NAN, 1.0]).is_err());
        // unsorted input is accepted and sorted
        let t = make_tangents(&[1.0, -1.0, f64::INFINITY]).unwrap();
        assert_eq!(t.lines()[0].point, TangentPoint::Finite(-1.0));
    }

    #[test]
    fn parse_point_file() {
        let t = TangentSet::parse("-inf\n-1\n# comment\n1\ninf\n").unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.has_sentinels());
        assert!(TangentSet::parse("abc\n").is_err());
    }

    #[test]
    fn kinks_are_line_intersections() {
        let t = TangentSet::default17();
        let kinks = t.kinks();
        assert_eq!(kinks.len(), 16);
        for (l, &k) in kinks.iter().enumerate() {
            let (a, b) = (t.lines()[l], t.lines()[l + 1]);
            assert_abs_diff_eq!(a.eval(k), b.eval(k), epsilon = 1e-12);
        }
        for w in kinks.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    /// Largest gap `f(v) - pwl(v)` of the default set on [-30, 30] at step 1e-4.
    const DEFAULT17_MAX_GAP: f64 = 0.005_939_635_932_466_27;

    #[test]
    fn default17_max_gap_regression() {
        let t = TangentSet::default17();
        let mut worst = (0.0f64, 0.0f64);
        for s in 0..=600_000 {
            let v = -30.0 + s as f64 * 1e-4;
            let gap = logistic_loss(v) - pwl_loss(&t, v);
            if gap > worst.0 {
                worst = (gap, v);
            }
        }
        assert_abs_diff_eq!(worst.0, DEFAULT17_MAX_GAP, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn odd_part_identity(v in -30.0f64..30.0) {
            prop_assert!((logistic_loss(-v) - v - logistic_loss(v)).abs() <= 1e-12);
        }

        #[test]
        fn refinement_never_lowers(extra in -8.0f64..8.0) {
            let base = TangentSet::default17();
            let mut pts: Vec<TangentPoint> = base.lines().iter().map(|l| l.point).collect();
            if pts.contains(&TangentPoint::Finite(extra)) {
                return Ok(());
            }
            pts.push(TangentPoint::Finite(extra));
            let Ok(refined) = TangentSet::new(&pts) else { return Ok(()) };
            for s in 0..=400 {
                let v = -20.0 + s as f64 * 0.1;
                prop_assert!(pwl_loss(&refined, v) >= pwl_loss(&base, v));
                prop_assert!(pwl_loss(&refined, v) <= logistic_loss(v) + 1e-12);
            }
        }
    }
}
