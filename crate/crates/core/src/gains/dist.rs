//! The candidate gain laws.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaSampler, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Exponential,
    ExpLogarithmic,
    LogLogistic,
    Nakagami,
    LogNormal,
    Burr,
}

impl Family {
    pub const ALL: [Family; 6] =
        [Family::Exponential, Family::ExpLogarithmic, Family::LogLogistic, Family::Nakagami, Family::LogNormal, Family::Burr];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::ExpLogarithmic => "exp_logarithmic",
            Family::LogLogistic => "log_logistic",
            Family::Nakagami => "nakagami",
            Family::LogNormal => "log_normal",
            Family::Burr => "burr",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Exponential => &["mu"],
            Family::ExpLogarithmic => &["b", "p"],
            Family::LogLogistic => &["a", "b"],
            Family::Nakagami => &["m", "g"],
            Family::LogNormal => &["sigma", "mu"],
            Family::Burr => &["c", "k"],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['-', ' '], "_");
        let f = match norm.as_str() {
            "exponential" | "exp" => Family::Exponential,
            "exp_logarithmic" | "explog" | "exp_log" => Family::ExpLogarithmic,
            "log_logistic" | "loglogistic" => Family::LogLogistic,
            "nakagami" => Family::Nakagami,
            "log_normal" | "lognormal" => Family::LogNormal,
            "burr" => Family::Burr,
            _ => return Err(Error::invalid(format!("unknown distribution family `{s}`"))),
        };
        Ok(f)
    }
}

/// A validated gain distribution. Build one with the constructors or
/// [`GainDistribution::from_params`]; deserialization validates too.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", try_from = "RawDistribution")]
pub enum GainDistribution {
    Exponential { mu: f64 },
    ExpLogarithmic { b: f64, p: f64 },
    LogLogistic { a: f64, b: f64 },
    Nakagami { m: f64, g: f64 },
    LogNormal { sigma: f64, mu: f64 },
    Burr { c: f64, k: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawDistribution {
    Exponential { mu: f64 },
    ExpLogarithmic { b: f64, p: f64 },
    LogLogistic { a: f64, b: f64 },
    Nakagami { m: f64, g: f64 },
    LogNormal { sigma: f64, mu: f64 },
    Burr { c: f64, k: f64 },
}

impl TryFrom<RawDistribution> for GainDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        match raw {
            RawDistribution::Exponential { mu } => GainDistribution::exponential(mu),
            RawDistribution::ExpLogarithmic { b, p } => GainDistribution::exp_logarithmic(b, p),
            RawDistribution::LogLogistic { a, b } => GainDistribution::log_logistic(a, b),
            RawDistribution::Nakagami { m, g } => GainDistribution::nakagami(m, g),
            RawDistribution::LogNormal { sigma, mu } => GainDistribution::log_normal(sigma, mu),
            RawDistribution::Burr { c, k } => GainDistribution::burr(c, k),
        }
    }
}

fn positive(family: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(family, format!("{name} must be positive and finite, got {v}")))
    }
}

impl GainDistribution {
    pub fn exponential(mu: f64) -> Result<Self> {
        positive("exponential", "mu", mu)?;
        Ok(GainDistribution::Exponential { mu })
    }

    pub fn exp_logarithmic(b: f64, p: f64) -> Result<Self> {
        positive("exp_logarithmic", "b", b)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("exp_logarithmic", format!("p must lie in (0, 1), got {p}")));
        }
        Ok(GainDistribution::ExpLogarithmic { b, p })
    }

    pub fn log_logistic(a: f64, b: f64) -> Result<Self> {
        positive("log_logistic", "a", a)?;
        positive("log_logistic", "b", b)?;
        Ok(GainDistribution::LogLogistic { a, b })
    }

    /// Any `m > 0` is accepted, including `m < 1/2`.
    pub fn nakagami(m: f64, g: f64) -> Result<Self> {
        positive("nakagami", "m", m)?;
        positive("nakagami", "g", g)?;
        Ok(GainDistribution::Nakagami { m, g })
    }

    pub fn log_normal(sigma: f64, mu: f64) -> Result<Self> {
        positive("log_normal", "sigma", sigma)?;
        if !mu.is_finite() {
            return Err(Error::param("log_normal", "mu must be finite"));
        }
        Ok(GainDistribution::LogNormal { sigma, mu })
    }

    pub fn burr(c: f64, k: f64) -> Result<Self> {
        positive("burr", "c", c)?;
        positive("burr", "k", k)?;
        Ok(GainDistribution::Burr { c, k })
    }

    pub fn from_params(family: Family, params: &[f64]) -> Result<Self> {
        let want = family.param_names().len();
        if params.len() != want {
            return Err(Error::invalid(format!("{family} takes {want} parameters, got {}", params.len())));
        }
        match family {
            Family::Exponential => Self::exponential(params[0]),
            Family::ExpLogarithmic => Self::exp_logarithmic(params[0], params[1]),
            Family::LogLogistic => Self::log_logistic(params[0], params[1]),
            Family::Nakagami => Self::nakagami(params[0], params[1]),
            Family::LogNormal => Self::log_normal(params[0], params[1]),
            Family::Burr => Self::burr(params[0], params[1]),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            GainDistribution::Exponential { .. } => Family::Exponential,
            GainDistribution::ExpLogarithmic { .. } => Family::ExpLogarithmic,
            GainDistribution::LogLogistic { .. } => Family::LogLogistic,
            GainDistribution::Nakagami { .. } => Family::Nakagami,
            GainDistribution::LogNormal { .. } => Family::LogNormal,
            GainDistribution::Burr { .. } => Family::Burr,
        }
    }

    /// Parameters in [`Family::param_names`] order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            GainDistribution::Exponential { mu } => vec![mu],
            GainDistribution::ExpLogarithmic { b, p } => vec![b, p],
            GainDistribution::LogLogistic { a, b } => vec![a, b],
            GainDistribution::Nakagami { m, g } => vec![m, g],
            GainDistribution::LogNormal { sigma, mu } => vec![sigma, mu],
            GainDistribution::Burr { c, k } => vec![c, k],
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        match *self {
            GainDistribution::Exponential { mu } => mu * (-mu * y).exp(),
            GainDistribution::ExpLogarithmic { b, p } => {
                let e = (-b * y).exp();
                // 1 - (1 - p) e without cancellation near y = 0
                b * (1.0 - p) * e / (-p.ln() * (p * e - (-b * y).exp_m1()))
            }
            GainDistribution::LogLogistic { a, b } => {
                let z = y / a;
                let zb = z.powf(b);
                (b / a) * z.powf(b - 1.0) / ((1.0 + zb) * (1.0 + zb))
            }
            GainDistribution::Nakagami { m, g } => {
                if y == 0.0 {
                    return if m < 0.5 { f64::INFINITY } else if m == 0.5 { (2.0 / (PI * g)).sqrt() } else { 0.0 };
                }
                let ln = std::f64::consts::LN_2 + m * (m / g).ln() - ln_gamma(m) + (2.0 * m - 1.0) * y.ln() - m / g * y * y;
                ln.exp()
            }
            GainDistribution::LogNormal { sigma, mu } => {
                if y == 0.0 {
                    return 0.0;
                }
                let z = (y.ln() - mu) / sigma;
                (-0.5 * z * z).exp() / (y * sigma * (2.0 * PI).sqrt())
            }
            GainDistribution::Burr { c, k } => {
                if y == 0.0 {
                    return if c < 1.0 { f64::INFINITY } else if c == 1.0 { k } else { 0.0 };
                }
                let yc = y.powf(c);
                c * k * y.powf(c - 1.0) * (-(k + 1.0) * yc.ln_1p()).exp()
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y == f64::INFINITY {
            return 1.0;
        }
        match *self {
            GainDistribution::Exponential { mu } => -(-mu * y).exp_m1(),
            GainDistribution::ExpLogarithmic { b, p } => {
                let q = -(-b * y).exp_m1();
                -((1.0 - p) / p * q).ln_1p() / p.ln()
            }
            GainDistribution::LogLogistic { a, b } => 1.0 / (1.0 + (y / a).powf(-b)),
            GainDistribution::Nakagami { m, g } => gamma_lr(m, m / g * y * y),
            GainDistribution::LogNormal { sigma, mu } => 0.5 * erfc(-(y.ln() - mu) / (sigma * std::f64::consts::SQRT_2)),
            GainDistribution::Burr { c, k } => -(-k * y.powf(c).ln_1p()).exp_m1(),
        }
    }

    pub fn ccdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        if y == f64::INFINITY {
            return 0.0;
        }
        match *self {
            GainDistribution::Exponential { mu } => (-mu * y).exp(),
            GainDistribution::ExpLogarithmic { b, p } => {
                let e = (-b * y).exp();
                let v = (1.0 - p) * e;
                // ln(1 - v): ln_1p is accurate for small v, the direct
                // difference for v near 1
                let l = if v < 0.5 { (-v).ln_1p() } else { (p * e - (-b * y).exp_m1()).ln() };
                l / p.ln()
            }
            GainDistribution::LogLogistic { a, b } => 1.0 / (1.0 + (y / a).powf(b)),
            GainDistribution::Nakagami { m, g } => gamma_ur(m, m / g * y * y),
            GainDistribution::LogNormal { sigma, mu } => 0.5 * erfc((y.ln() - mu) / (sigma * std::f64::consts::SQRT_2)),
            GainDistribution::Burr { c, k } => (-k * y.powf(c).ln_1p()).exp(),
        }
    }

    /// Inverse CDF on `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        match *self {
            GainDistribution::Exponential { mu } => -(-u).ln_1p() / mu,
            GainDistribution::ExpLogarithmic { b, p } => {
                // -ln((1 - p^(1-u)) / (1 - p)) / b, kept accurate for tiny p
                let lp = p.ln();
                let pu = ((1.0 - u) * lp).exp();
                (p * (-u * lp).exp_m1() / (1.0 - pu)).ln_1p() / b
            }
            GainDistribution::LogLogistic { a, b } => a * (u / (1.0 - u)).powf(1.0 / b),
            GainDistribution::Nakagami { m, g } => (gamma_quantile(m, u) * g / m).sqrt(),
            GainDistribution::LogNormal { sigma, mu } => {
                (mu - sigma * std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)).exp()
            }
            GainDistribution::Burr { c, k } => ((-(1.0 - u).ln() / k).exp_m1()).powf(1.0 / c),
        }
    }

    /// Mean, `+inf` where it diverges.
    pub fn mean(&self) -> f64 {
        match *self {
            GainDistribution::Exponential { mu } => 1.0 / mu,
            GainDistribution::ExpLogarithmic { b, p } => -dilog(1.0 - p) / (b * p.ln()),
            GainDistribution::LogLogistic { a, b } => {
                if b > 1.0 {
                    a * (PI / b) / (PI / b).sin()
                } else {
                    f64::INFINITY
                }
            }
            GainDistribution::Nakagami { m, g } => (ln_gamma(m + 0.5) - ln_gamma(m)).exp() * (g / m).sqrt(),
            GainDistribution::LogNormal { sigma, mu } => (mu + 0.5 * sigma * sigma).exp(),
            GainDistribution::Burr { c, k } => {
                if c * k > 1.0 {
                    (ln_gamma(k - 1.0 / c) + ln_gamma(1.0 + 1.0 / c) - ln_gamma(k)).exp()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            GainDistribution::Nakagami { m, g } => {
                GammaSampler::new(m, g / m).expect("validated").sample(rng).sqrt()
            }
            GainDistribution::LogNormal { sigma, mu } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            _ => self.quantile(open_unit(rng)),
        }
    }
}

impl Distribution<f64> for GainDistribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        GainDistribution::sample(self, rng)
    }
}

/// Uniform on the open interval (0, 1).
/// Unit-scale gamma quantile by bisection in `ln x`; accurate deep into
/// the lower tail where shape `m` is small.
fn gamma_quantile(m: f64, u: f64) -> f64 {
    let below = |x: f64| if u < 0.5 { gamma_lr(m, x) < u } else { gamma_ur(m, x) > 1.0 - u };
    let guess = ((u.ln() + ln_gamma(m + 1.0)) / m).exp().clamp(1e-300, 1e300);
    let (mut lo, mut hi) = (guess.max(1e-300), guess.max(1e-300));
    while !below(lo) && lo > 1e-300 {
        lo = (lo * 1e-4).max(1e-300);
    }
    while below(hi) {
        hi *= 4.0;
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if below(mid.exp()) {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    (0.5 * (a + b)).exp()
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Dilogarithm `Li2(z)` for `z` in `[0, 1]`.
pub fn dilog(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z > 0.5 {
        let w = 1.0 - z;
        let cross = if w > 0.0 { z.ln() * w.ln() } else { 0.0 };
        return PI * PI / 6.0 - cross - dilog(w);
    }
    let mut term = z;
    let mut sum = 0.0f64;
    let mut k = 1.0;
    while term > 1e-18 * sum.max(1e-300) {
        sum += term / (k * k);
        term *= z;
        k += 1.0;
    }
    sum
}

/// ExpLog variate as the minimum of `N` exponentials with rate `b`, where
/// `N` is logarithmic with parameter `1 - p`.
pub fn sample_exp_log_compositional<R: Rng + ?Sized>(b: f64, p: f64, rng: &mut R) -> f64 {
    let n = sample_logarithmic(1.0 - p, rng);
    // the minimum of n Exp(b) variates is Exp(n b)
    -open_unit(rng).ln() / (n as f64 * b)
}

/// Logarithmic series variate, `P(N = k) = -theta^k / (k ln(1 - theta))`.
pub fn sample_logarithmic<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> u64 {
    let r = (-theta).ln_1p();
    let v: f64 = open_unit(rng);
    if v >= theta {
        return 1;
    }
    let u: f64 = rng.random();
    let q = -(r * u).exp_m1();
    if v <= q * q {
        let n = 1.0 + v.ln() / q.ln();
        return if n.is_finite() && n >= 1.0 { n.floor().min(u64::MAX as f64) as u64 } else { 1 };
    }
    if v >= q {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn families() -> Vec<GainDistribution> {
        vec![
            GainDistribution::exponential(2.0).unwrap(),
            GainDistribution::exponential(1.0054e-4).unwrap(),
            GainDistribution::exp_logarithmic(1e-4, 0.11).unwrap(),
            GainDistribution::exp_logarithmic(0.2406, 2.7e-4).unwrap(),
            GainDistribution::log_logistic(1.45, 0.547).unwrap(),
            GainDistribution::log_logistic(3.28, 0.877).unwrap(),
            GainDistribution::nakagami(0.099, 50.53).unwrap(),
            GainDistribution::nakagami(2.0, 5.0).unwrap(),
            GainDistribution::log_normal(2.962, 0.908).unwrap(),
            GainDistribution::burr(0.692, 0.518).unwrap(),
            GainDistribution::burr(2.0, 3.0).unwrap(),
        ]
    }

    /// Adaptive Simpson on [lo, hi].
    fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, lo, hi, fa, fm, fb, whole, tol, depth)
    }

    /// Integral of the pdf over [y0, y1] in log coordinates, split per decade.
    fn mass(d: &GainDistribution, y0: f64, y1: f64) -> f64 {
        let (l0, l1) = (y0.ln(), y1.ln());
        let pieces = ((l1 - l0) / 1.0).ceil().max(1.0) as usize;
        let h = (l1 - l0) / pieces as f64;
        (0..pieces)
            .map(|i| {
                let a = l0 + i as f64 * h;
                simpson(&|t: f64| d.pdf(t.exp()) * t.exp(), a, a + h, 1e-13, 40)
            })
            .sum()
    }

    #[test]
    fn pdf_integrates_to_one_and_matches_ccdf() {
        for d in families() {
            let lo = d.quantile(1e-12).max(1e-300);
            let hi = d.quantile(1.0 - 1e-12);
            let total = mass(&d, lo, hi) + d.cdf(lo) + d.ccdf(hi);
            assert!((total - 1.0).abs() < 1e-6, "{d:?}: {total}");
            let med = d.quantile(0.5);
            for y in [med * 1e-2, med * 0.3, med, med * 5.0, med * 100.0] {
                if y < lo || y > hi {
                    continue;
                }
                let tail = mass(&d, y, hi) + d.ccdf(hi);
                assert!((tail - d.ccdf(y)).abs() < 1e-6, "{d:?} y={y}: {tail} vs {}", d.ccdf(y));
            }
        }
    }

    #[test]
    fn ccdf_limits_and_monotone() {
        for d in families() {
            assert_eq!(d.ccdf(0.0), 1.0);
            assert_eq!(d.ccdf(f64::INFINITY), 0.0);
            let med = d.quantile(0.5);
            let mut prev = 1.0;
            for i in -60..60 {
                let y = med * 10f64.powf(i as f64 / 6.0);
                let c = d.ccdf(y);
                assert!(c <= prev + 1e-15 && (0.0..=1.0).contains(&c), "{d:?}");
                assert_relative_eq!(c + d.cdf(y), 1.0, epsilon = 1e-12);
                prev = c;
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in families() {
            for u in [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let y = d.quantile(u);
                assert!((d.cdf(y) - u).abs() < 1e-8 * u.max(1e-3), "{d:?} u={u}: {}", d.cdf(y));
            }
        }
    }

    #[test]
    fn exp_log_quantile_survives_tiny_p() {
        // fits to misaligned corpora can drive p far below machine epsilon
        for p in [1e-10, 1.5e-31] {
            let d = GainDistribution::exp_logarithmic(4e-4, p).unwrap();
            for u in [1e-12, 1e-6, 0.5, 0.999] {
                let y = d.quantile(u);
                assert!(y > 0.0, "p={p} u={u}");
                assert_relative_eq!(d.cdf(y), u, max_relative = 1e-8);
                assert_relative_eq!(d.ccdf(y), 1.0 - u, max_relative = 1e-8);
                assert!(d.pdf(y).is_finite() && d.pdf(y) > 0.0);
            }
        }
    }

    #[test]
    fn documented_values() {
        let el = GainDistribution::exp_logarithmic(1e-4, 0.11).unwrap();
        assert_eq!(el.ccdf(0.0), 1.0);
        let ll = GainDistribution::log_logistic(3.28, 0.877).unwrap();
        assert_relative_eq!(ll.ccdf(3.28), 0.5, epsilon = 1e-15);
        let burr = GainDistribution::burr(0.692, 0.518).unwrap();
        let closed = (2f64.powf(1.0 / 0.518) - 1.0).powf(1.0 / 0.692);
        assert_relative_eq!(closed, 4.457, max_relative = 1e-3);
        // numeric inversion by bisection on the cdf
        let (mut lo, mut hi) = (0.0f64, 1e3f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if burr.cdf(mid) < 0.5 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert_relative_eq!(lo, closed, max_relative = 1e-12);
        assert_relative_eq!(burr.quantile(0.5), closed, max_relative = 1e-12);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(GainDistribution::exponential(0.0).is_err());
        assert!(GainDistribution::exp_logarithmic(1.0, 1.0).is_err());
        assert!(GainDistribution::exp_logarithmic(1.0, 0.0).is_err());
        assert!(GainDistribution::log_logistic(-1.0, 1.0).is_err());
        assert!(GainDistribution::nakagami(0.099, 50.53).is_ok());
        assert!(GainDistribution::log_normal(1.0, f64::NAN).is_err());
        assert!(GainDistribution::burr(1.0, f64::INFINITY).is_err());
        assert!(GainDistribution::from_params(Family::Burr, &[1.0]).is_err());
        let bad: std::result::Result<GainDistribution, _> = serde_json::from_str(r#"{"family":"exp_logarithmic","b":1.0,"p":2.0}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn serde_round_trip() {
        for d in families() {
            let s = serde_json::to_string(&d).unwrap();
            let back: GainDistribution = serde_json::from_str(&s).unwrap();
            assert_eq!(d, back);
        }
    }

    #[test]
    fn exponential_sample_mean() {
        let d = GainDistribution::exponential(2.0).unwrap();
        let mut rng = stream(1, 0, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005 * 0.5, "{mean}");
    }

    fn ks_statistic(d: &GainDistribution, mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = d.cdf(x);
                (c - i as f64 / n).abs().max((((i + 1) as f64) / n - c).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn samples_pass_ks() {
        let n = 100_000;
        let critical = 1.628 / (n as f64).sqrt();
        for (i, d) in families().iter().enumerate() {
            let mut rng = stream(77, i as u64, 0);
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            let ks = ks_statistic(d, xs);
            assert!(ks < critical, "{d:?}: {ks}");
        }
    }

    #[test]
    fn compositional_exp_log_matches_closed_form() {
        let n = 100_000;
        let critical = 1.628 / (n as f64).sqrt();
        for (j, (b, p)) in [(1e-4, 0.11), (0.2406, 2.7e-4), (2e-3, 0.9)].into_iter().enumerate() {
            let d = GainDistribution::exp_logarithmic(b, p).unwrap();
            let mut rng = stream(78, j as u64, 0);
            let xs: Vec<f64> = (0..n).map(|_| sample_exp_log_compositional(b, p, &mut rng)).collect();
            let ks = ks_statistic(&d, xs);
            assert!(ks < critical, "({b}, {p}): {ks}");
        }
    }

    #[test]
    fn logarithmic_pmf() {
        let theta: f64 = 0.7;
        let mut rng = stream(79, 0, 0);
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let k = sample_logarithmic(theta, &mut rng) as usize;
            if k <= 3 {
                counts[k] += 1;
            }
        }
        for (k, &count) in counts.iter().enumerate().skip(1) {
            let pmf = -theta.powi(k as i32) / (k as f64 * (1.0 - theta).ln());
            let emp = count as f64 / n as f64;
            assert!((emp - pmf).abs() < 4.0 * (pmf * (1.0 - pmf) / n as f64).sqrt(), "k={k}: {emp} vs {pmf}");
        }
    }

    #[test]
    fn means() {
        for d in families() {
            let m = d.mean();
            if !m.is_finite() {
                continue;
            }
            let lo = d.quantile(1e-14).max(1e-300);
            let hi = d.quantile(1.0 - 1e-13);
            // E[Y] = integral of the ccdf
            let (l0, l1) = (lo.ln(), hi.ln());
            let pieces = (l1 - l0).ceil() as usize;
            let h = (l1 - l0) / pieces as f64;
            let num: f64 = (0..pieces)
                .map(|i| {
                    let a = l0 + i as f64 * h;
                    simpson(&|t: f64| d.ccdf(t.exp()) * t.exp(), a, a + h, 1e-12 * m, 40)
                })
                .sum::<f64>()
                + lo;
            assert!((num - m).abs() < 1e-5 * m, "{d:?}: {num} vs {m}");
        }
        assert_relative_eq!(dilog(1.0), PI * PI / 6.0, epsilon = 1e-14);
        assert_relative_eq!(dilog(0.5), PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2), epsilon = 1e-14);
    }

    #[test]
    fn tail_comparisons() {
        // decreasing hazard: more mass near zero and a heavier far tail than
        // the exponential with the same mean
        for (b, p) in [(1e-4, 0.11), (2e-4, 0.15), (0.2406, 2.7e-4)] {
            let el = GainDistribution::exp_logarithmic(b, p).unwrap();
            let ex = GainDistribution::exponential(1.0 / el.mean()).unwrap();
            let m = el.mean();
            assert!(el.cdf(0.1 * m) > ex.cdf(0.1 * m));
            let r10 = el.ccdf(10.0 * m) / ex.ccdf(10.0 * m);
            let r20 = el.ccdf(20.0 * m) / ex.ccdf(20.0 * m);
            assert!(r10 > 1.0 && r20 > r10, "{r10} {r20}");
            // but still exponentially decaying, at rate b
            let y = 40.0 / b;
            assert_relative_eq!(el.ccdf(y) / (-b * y).exp(), (1.0 - p) / -p.ln(), max_relative = 1e-6);
        }
        let ll = GainDistribution::log_logistic(1.45, 0.547).unwrap();
        // the mean diverges, compare against exponentials with the median's scale
        let scale = ll.quantile(0.5);
        let ex = GainDistribution::exponential(1.0 / scale).unwrap();
        let r10 = ll.ccdf(10.0 * scale) / ex.ccdf(10.0 * scale);
        let r100 = ll.ccdf(100.0 * scale) / ex.ccdf(100.0 * scale);
        assert!(r10 > 1.0 && r100 > r10 * 1e30);
        let ll = GainDistribution::log_logistic(3.28, 0.877).unwrap();
        let ex = GainDistribution::exponential(1.0 / 3.28).unwrap();
        assert!(ll.ccdf(328.0) / ex.ccdf(328.0) > ll.ccdf(32.8) / ex.ccdf(32.8));
    }
}
