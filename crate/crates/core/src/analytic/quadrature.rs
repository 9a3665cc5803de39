//! Globally adaptive 7/15-point Gauss–Kronrod integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1); odd indices are the 7-point Gauss nodes.
pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evals: usize,
}

/// Integration tolerances and interval budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let value = k * h;
    let error = ((k - g) * h).abs();
    if !value.is_finite() {
        return Err(Error::NonConvergence { value, error: f64::INFINITY });
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[points[0], points[last]]`, starting from one panel
/// per gap between consecutive `points`. Interior points should sit where
/// the integrand changes scale.
pub fn integrate_with<F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("integration points must be finite and strictly increasing"));
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 4);
    let (mut value, mut error) = (0.0, 0.0);
    for w in points.windows(2) {
        let s = kronrod(&mut f, w[0], w[1])?;
        value += s.value;
        error += s.error;
        heap.push(s);
    }
    let mut evals = 15 * heap.len();
    loop {
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::NonConvergence { value, error });
        }
        let worst = heap.pop().expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            heap.push(worst);
            return Err(Error::NonConvergence { value, error });
        }
        let l = kronrod(&mut f, worst.a, mid)?;
        let r = kronrod(&mut f, mid, worst.b)?;
        evals += 30;
        value += l.value + r.value - worst.value;
        error += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        // re-sum now and then so cancellation does not accumulate
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(QuadResult { value, error, evals })
}

/// Infallible-integrand form of [`integrate_with`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> Result<QuadResult> {
    integrate_with(|x| Ok(f(x)), points, tol)
}

/// `a`, then points `a * ratio^k` strictly inside `(a, b)`, then `b`. For
/// `a == 0` the ladder starts at `first`.
pub fn geometric_points(a: f64, b: f64, first: f64, ratio: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut x = if a > 0.0 { a * ratio } else { first };
    while x < b {
        if x > *pts.last().unwrap() {
            pts.push(x);
        }
        x *= ratio;
    }
    if b > *pts.last().unwrap() {
        pts.push(b);
    }
    pts
}
