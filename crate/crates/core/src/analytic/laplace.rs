//! Laplace transform of the interference from one class of base stations.

use std::f64::consts::PI;

use super::quadrature::{geometric_points, integrate, XGK, WGK};
use super::QuadratureSpec;
use crate::error::{Error, Result};
use crate::gains::GainDistribution;
use crate::geometry::{LinkState, NetworkConfig};

const LOWER_QUANTILE: f64 = 1e-12;
const PANELS_PER_DECADE: f64 = 2.0;
const TABLE_PER_DECADE: f64 = 40.0;

/// `Psi(x) = E[1 - exp(-x G)]` for the interfering-link gain `G`.
#[derive(Debug, Clone)]
pub enum InterferenceKernel {
    /// No interference (gain identically zero).
    Silent,
    /// Rayleigh-faded mixture `sum_k w_k Exp(mean g_k)`.
    Mixture(Vec<(f64, f64)>),
    /// Tabulated for a truncated gain law.
    Table(PsiTable),
}

/// `ln Psi` on a uniform grid in `ln x`, with slopes for Hermite
/// interpolation.
#[derive(Debug, Clone)]
pub struct PsiTable {
    u0: f64,
    du: f64,
    ln_psi: Vec<f64>,
    slope: Vec<f64>,
    mean: f64,
    mass: f64,
    g_max: f64,
}

impl InterferenceKernel {
    /// Kernel for `G 1{G <= g_max}`, where `g_max` is the smaller of the
    /// `truncation_quantile` of `law` and `max_gain`. Mass below the `1e-12`
    /// quantile is neglected.
    ///
    /// Heavy-tailed misaligned laws need the cut: with a tail `P(G > g) ~
    /// g^-b` and `b < 2 / alpha` the untruncated interference field is
    /// infinite.
    pub fn from_distribution(law: &GainDistribution, truncation_quantile: f64, max_gain: Option<f64>) -> Result<Self> {
        if !(truncation_quantile > LOWER_QUANTILE && truncation_quantile < 1.0) {
            return Err(Error::invalid(format!("gain truncation quantile must lie in (1e-12, 1), got {truncation_quantile}")));
        }
        if let Some(m) = max_gain {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::invalid(format!("maximum interferer gain must be positive and finite, got {m}")));
            }
        }
        let g_lo = law.quantile(LOWER_QUANTILE);
        let g_hi = law.quantile(truncation_quantile).min(max_gain.unwrap_or(f64::INFINITY));
        if !(g_lo > 0.0 && g_hi.is_finite() && g_hi > g_lo) {
            return Err(Error::invalid(format!("gain law {law:?} has no usable support for tabulation")));
        }
        // gain nodes, Kronrod rule on panels uniform in ln g
        let (l0, l1) = (g_lo.ln(), g_hi.ln());
        let panels = (((l1 - l0) / std::f64::consts::LN_10) * PANELS_PER_DECADE).ceil().max(1.0) as usize;
        let h = (l1 - l0) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * 15);
        for k in 0..panels {
            let c = l0 + (k as f64 + 0.5) * h;
            for j in 0..15 {
                let (x, w) = if j < 8 { (-XGK[j], WGK[j]) } else { (XGK[14 - j], WGK[14 - j]) };
                let t = c + 0.5 * h * x;
                let g = t.exp();
                let weight = 0.5 * h * w * law.pdf(g) * g;
                if weight > 0.0 {
                    nodes.push((g, weight));
                }
            }
        }
        let mass: f64 = nodes.iter().map(|n| n.1).sum();
        let mean: f64 = nodes.iter().map(|n| n.0 * n.1).sum();

        let x_lo = 1e-7 / g_hi;
        let x_hi = 40.0 / g_lo;
        let u0 = x_lo.ln();
        let du = std::f64::consts::LN_10 / TABLE_PER_DECADE;
        let n = ((x_hi.ln() - u0) / du).ceil() as usize + 1;
        let mut ln_psi = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        for k in 0..n {
            let x = (u0 + k as f64 * du).exp();
            let (mut psi, mut dpsi) = (0.0, 0.0);
            for &(g, w) in &nodes {
                let e = -x * g;
                psi += w * -e.exp_m1();
                dpsi += w * g * e.exp();
            }
            ln_psi.push(psi.ln());
            slope.push(x * dpsi / psi);
        }
        Ok(InterferenceKernel::Table(PsiTable { u0, du, ln_psi, slope, mean, mass, g_max: g_hi }))
    }

    pub fn mixture(weights: &[(f64, f64)]) -> Result<Self> {
        if weights.iter().any(|&(g, w)| !(g >= 0.0 && g.is_finite() && (0.0..=1.0).contains(&w))) {
            return Err(Error::invalid("mixture entries must be finite non-negative gains with weights in [0, 1]"));
        }
        Ok(InterferenceKernel::Mixture(weights.to_vec()))
    }

    pub fn psi(&self, x: f64) -> f64 {
        match self {
            InterferenceKernel::Silent => 0.0,
            InterferenceKernel::Mixture(m) => m.iter().map(|&(g, w)| w * x * g / (1.0 + x * g)).sum(),
            InterferenceKernel::Table(t) => t.eval(x),
        }
    }

    /// Mean of the (truncated) gain.
    pub fn mean_gain(&self) -> f64 {
        match self {
            InterferenceKernel::Silent => 0.0,
            InterferenceKernel::Mixture(m) => m.iter().map(|&(g, w)| w * g).sum(),
            InterferenceKernel::Table(t) => t.mean,
        }
    }

    /// Probability that the gain is non-zero, `lim Psi(x)` as `x -> inf`.
    pub fn active_mass(&self) -> f64 {
        match self {
            InterferenceKernel::Silent => 0.0,
            InterferenceKernel::Mixture(m) => m.iter().filter(|x| x.0 > 0.0).map(|x| x.1).sum(),
            InterferenceKernel::Table(t) => t.mass,
        }
    }

    /// Largest gain kept by the truncation, if any.
    pub fn truncation_gain(&self) -> Option<f64> {
        match self {
            InterferenceKernel::Table(t) => Some(t.g_max),
            _ => None,
        }
    }
}

impl PsiTable {
    fn eval(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        let u = x.ln();
        let pos = (u - self.u0) / self.du;
        if pos <= 0.0 {
            return x * self.mean;
        }
        let last = self.ln_psi.len() - 1;
        if pos >= last as f64 {
            return self.mass;
        }
        let k = pos as usize;
        let t = pos - k as f64;
        let (y0, y1) = (self.ln_psi[k], self.ln_psi[k + 1]);
        let (m0, m1) = (self.slope[k] * self.du, self.slope[k + 1] * self.du);
        let t2 = t * t;
        let t3 = t2 * t;
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        y.exp()
    }
}

/// `exp(-E)` together with the exponent and its absolute error estimate,
/// which includes the bound on the field beyond the inner truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceValue {
    pub value: f64,
    pub exponent: f64,
    pub error: f64,
}

/// `E[exp(-s I)]` for the interference from base stations in state
/// `interferer` when the serving link is in state `serving` at distance
/// `r`: interferers sit beyond the distance at which their path loss equals
/// the serving one.
pub fn laplace_interference(
    s: f64,
    serving: LinkState,
    interferer: LinkState,
    r: f64,
    kernel: &InterferenceKernel,
    network: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<LaplaceValue> {
    if !(s >= 0.0) || !(r > 0.0) {
        return Err(Error::invalid(format!("need s >= 0 and r > 0, got s = {s}, r = {r}")));
    }
    if s == 0.0 || matches!(kernel, InterferenceKernel::Silent) {
        return Ok(LaplaceValue { value: 1.0, exponent: 0.0, error: 0.0 });
    }
    let pl = &network.pathloss;
    let r_min = pl.equivalent_distance(r, serving, interferer);
    exponent_beyond(s, interferer, r_min, kernel, network, spec)
}

pub(crate) fn exponent_beyond(
    s: f64,
    state: LinkState,
    r_min: f64,
    kernel: &InterferenceKernel,
    network: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<LaplaceValue> {
    let lambda = network.density_per_m2();
    let c = network.los_decay_per_m;
    let (alpha, beta) = (network.pathloss.alpha(state), network.pathloss.beta(state));
    let r_max = spec.inner_truncation_m;
    let scale = 2.0 * PI * lambda;
    let tail = scale * tail_bound(s, state, r_min.max(r_max), kernel, alpha, beta, c);
    if r_min >= r_max {
        return Ok(LaplaceValue { value: 1.0, exponent: 0.0, error: tail });
    }
    let pts = geometric_points(r_min, r_max, 1.0, 2.5);
    let q = integrate(|v| kernel.psi(s * beta * v.powf(-alpha)) * v * state.probability(v, c), &pts, spec.tolerance())?;
    let exponent = scale * q.value;
    Ok(LaplaceValue { value: (-exponent).exp(), exponent, error: scale * q.error + tail })
}

/// Bound on `int_R^inf Psi(s beta v^-alpha) v p(v) dv`.
fn tail_bound(s: f64, state: LinkState, r: f64, kernel: &InterferenceKernel, alpha: f64, beta: f64, c: f64) -> f64 {
    let linear = if alpha > 2.0 { s * beta * kernel.mean_gain() * r.powf(2.0 - alpha) / (alpha - 2.0) } else { f64::INFINITY };
    let blocked = match state {
        LinkState::Los => kernel.active_mass() * (-c * r).exp() * (r / c + 1.0 / (c * c)),
        LinkState::Nlos => f64::INFINITY,
    };
    linear.min(blocked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brute_psi(law: &GainDistribution, q: f64, x: f64) -> f64 {
        // plain adaptive quadrature in ln g over the truncated support
        let lo = law.quantile(1e-12).ln();
        let hi = law.quantile(q).ln();
        let pts: Vec<f64> = (0..=64).map(|k| lo + (hi - lo) * k as f64 / 64.0).collect();
        integrate(|t| { let g = t.exp(); -(-x * g).exp_m1() * law.pdf(g) * g }, &pts, super::super::quadrature::Tolerance::new(1e-11, 1e-300))
            .unwrap()
            .value
    }

    fn laws() -> Vec<GainDistribution> {
        vec![
            GainDistribution::log_logistic(1.98, 0.551).unwrap(),
            GainDistribution::exp_logarithmic(0.0133, 2.34e-5).unwrap(),
            GainDistribution::exponential(1e-3).unwrap(),
            GainDistribution::Nakagami { m: 0.099, g: 50.53 },
        ]
    }

    #[test]
    fn table_matches_direct_quadrature() {
        for law in laws() {
            let k = InterferenceKernel::from_distribution(&law, 1.0 - 1e-6, None).unwrap();
            let g_max = k.truncation_gain().unwrap();
            for e in [-9.0, -6.0, -3.0, -1.3, 0.0, 1.7, 4.0] {
                let x = 10f64.powf(e) / g_max * 1e3;
                let a = k.psi(x);
                let b = brute_psi(&law, 1.0 - 1e-6, x);
                assert_relative_eq!(a, b, max_relative = 1e-6);
            }
            assert_relative_eq!(k.active_mass(), 1.0 - 1e-6, max_relative = 1e-8);
        }
    }

    #[test]
    fn gain_cap_equals_the_matching_quantile() {
        let law = GainDistribution::log_logistic(5.7, 0.57).unwrap();
        let cap = law.quantile(0.995);
        let capped = InterferenceKernel::from_distribution(&law, 1.0 - 1e-6, Some(cap)).unwrap();
        let cut = InterferenceKernel::from_distribution(&law, 0.995, None).unwrap();
        assert_eq!(capped.truncation_gain(), Some(cap));
        for x in [1e-9, 1e-5, 1e-2, 1.0] {
            assert_relative_eq!(capped.psi(x), cut.psi(x), max_relative = 1e-12);
        }
        assert_relative_eq!(capped.active_mass(), 0.995, max_relative = 1e-8);
        assert!(InterferenceKernel::from_distribution(&law, 0.9, Some(-1.0)).is_err());
    }

    #[test]
    fn exponential_kernel_has_closed_form() {
        // untruncated exponential: Psi(x) = x m / (1 + x m); truncation at 1 - 1e-9 shifts it by < 1e-7
        let law = GainDistribution::exponential(0.01).unwrap();
        let k = InterferenceKernel::from_distribution(&law, 1.0 - 1e-9, None).unwrap();
        for x in [1e-6, 1e-3, 0.01, 0.1, 10.0] {
            assert_relative_eq!(k.psi(x), 100.0 * x / (1.0 + 100.0 * x), max_relative = 1e-6);
        }
        let m = InterferenceKernel::mixture(&[(100.0, 1.0)]).unwrap();
        assert_relative_eq!(m.psi(0.1), 10.0 / 11.0, epsilon = 1e-15);
    }

    #[test]
    fn psi_is_increasing_and_bounded() {
        for law in laws() {
            let k = InterferenceKernel::from_distribution(&law, 1.0 - 1e-6, None).unwrap();
            let mut prev = 0.0;
            for i in 0..600 {
                let x = 10f64.powf(-25.0 + i as f64 * 0.1);
                let p = k.psi(x);
                assert!(p >= prev && p <= 1.0, "{law:?} at {x}: {p} < {prev}");
                assert!(p <= x * k.mean_gain() * (1.0 + 1e-9));
                prev = p;
            }
        }
    }

    #[test]
    fn laplace_limits() {
        let net = NetworkConfig::default();
        let spec = QuadratureSpec::default();
        let k = InterferenceKernel::from_distribution(&laws()[0], spec.gain_truncation_quantile, None).unwrap();
        for (i, j) in [(LinkState::Los, LinkState::Los), (LinkState::Los, LinkState::Nlos), (LinkState::Nlos, LinkState::Los)] {
            let z = laplace_interference(0.0, i, j, 50.0, &k, &net, &spec).unwrap();
            assert_eq!(z.value, 1.0);
            let mut prev = 1.0;
            for e in 0..30 {
                let s = 10f64.powf(e as f64);
                let l = laplace_interference(s, i, j, 50.0, &k, &net, &spec).unwrap();
                assert!(l.value >= 0.0 && (l.value < prev || prev < 1e-300), "{i:?}{j:?} s={s}: {} !< {prev}", l.value);
                prev = l.value;
            }
            // LoS interferers are a.s. finitely many: the limit is the
            // probability that none of them is active
            let r_min = net.pathloss.equivalent_distance(50.0, i, j);
            let c = net.los_decay_per_m;
            let void = match j {
                LinkState::Los => (-2.0 * PI * net.density_per_m2() * k.active_mass() * (-c * r_min).exp() * (r_min / c + 1.0 / (c * c))).exp(),
                LinkState::Nlos => 0.0,
            };
            assert!((prev - void).abs() < 1e-3, "{i:?}{j:?}: {prev} vs {void}");
        }
        assert!(laplace_interference(-1.0, LinkState::Los, LinkState::Los, 50.0, &k, &net, &spec).is_err());
        let silent = laplace_interference(1e9, LinkState::Los, LinkState::Los, 50.0, &InterferenceKernel::Silent, &net, &spec).unwrap();
        assert_eq!(silent.value, 1.0);
    }

    #[test]
    fn radial_integral_matches_independent_evaluation() {
        // mixture kernel against a two-level quadrature written out separately
        let net = NetworkConfig::default();
        let spec = QuadratureSpec { inner_truncation_m: 3000.0, ..QuadratureSpec::default() };
        let mix = [(4096.0, 0.01), (12.0, 0.2), (3.0, 0.79)];
        let k = InterferenceKernel::mixture(&mix).unwrap();
        let (s, r) = (2e9, 40.0);
        let got = laplace_interference(s, LinkState::Los, LinkState::Nlos, r, &k, &net, &spec).unwrap();
        let r_min = net.pathloss.equivalent_distance(r, LinkState::Los, LinkState::Nlos);
        let tol = super::super::quadrature::Tolerance::new(1e-12, 0.0);
        let mut e = 0.0;
        for &(g, w) in &mix {
            let inner = integrate(
                |v| {
                    let x = s * net.pathloss.gain(v, LinkState::Nlos) * g;
                    w * x / (1.0 + x) * v * -(-net.los_decay_per_m * v).exp_m1()
                },
                &geometric_points(r_min, 3000.0, 1.0, 1.5),
                tol,
            )
            .unwrap();
            e += inner.value;
        }
        let expected = (-2.0 * PI * net.density_per_m2() * e).exp();
        assert_relative_eq!(got.value, expected, max_relative = 1e-6);
    }
}
