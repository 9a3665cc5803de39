//! Distance to the serving base station.

use std::f64::consts::PI;

use super::quadrature::{geometric_points, integrate, QuadResult};
use super::QuadratureSpec;
use crate::error::{Error, Result};
use crate::geometry::{LinkState, NetworkConfig};

/// `int_0^x v p_L(v) dv` for `p_L(v) = exp(-c v)`.
pub fn los_area_moment(x: f64, c: f64) -> f64 {
    let y = c * x;
    if y < 0.1 {
        // 1 - e^-y (1 + y) = sum_{k>=2} (-1)^k (k-1) y^k / k!
        let mut term = y * y / 2.0;
        let mut sum = term;
        for k in 3..20 {
            term *= -y / k as f64;
            sum += term * (k - 1) as f64;
        }
        sum / (c * c)
    } else {
        (-(-y).exp_m1() - y * (-y).exp()) / (c * c)
    }
}

/// `int_0^x v p_state(v) dv`.
pub fn area_moment(x: f64, state: LinkState, c: f64) -> f64 {
    match state {
        LinkState::Los => los_area_moment(x, c),
        LinkState::Nlos => (0.5 * x * x - los_area_moment(x, c)).max(0.0),
    }
}

/// Density of the serving distance when the serving link is in `state`.
/// Integrates to the probability of associating in that state.
pub fn assoc_distance_pdf(r: f64, state: LinkState, network: &NetworkConfig) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("association distance must be positive, got {r}")));
    }
    Ok(pdf_unchecked(r, state, network))
}

pub(crate) fn pdf_unchecked(r: f64, state: LinkState, network: &NetworkConfig) -> f64 {
    let lambda = network.density_per_m2();
    let c = network.los_decay_per_m;
    let other = state.other();
    let r_eq = network.pathloss.equivalent_distance(r, state, other);
    let void = area_moment(r, state, c) + area_moment(r_eq, other, c);
    2.0 * PI * lambda * state.probability(r, c) * r * (-2.0 * PI * lambda * void).exp()
}

/// Integration points for functions of the serving distance.
pub(crate) fn outer_points(spec: &QuadratureSpec) -> Vec<f64> {
    let mut pts = geometric_points(0.0, spec.outer_truncation_m, 1.0, 2.0);
    pts.dedup();
    pts
}

/// Upper bound on the association probability beyond `r_max`.
pub(crate) fn outer_residual(network: &NetworkConfig, r_max: f64) -> f64 {
    let lambda = network.density_per_m2();
    let c = network.los_decay_per_m;
    let los = 2.0 * PI * lambda * (-c * r_max).exp() * (r_max / c + 1.0 / (c * c));
    let nlos = (-2.0 * PI * lambda * area_moment(r_max, LinkState::Nlos, c)).exp();
    los + nlos
}

/// Probability that the serving link is in `state`.
pub fn association_probability(state: LinkState, network: &NetworkConfig, spec: &QuadratureSpec) -> Result<QuadResult> {
    network.validate()?;
    let mut r = integrate(|x| pdf_unchecked(x, state, network), &outer_points(spec), spec.tolerance())?;
    r.error += outer_residual(network, spec.outer_truncation_m);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::quadrature::Tolerance;
    use approx::assert_relative_eq;

    #[test]
    fn area_moment_closed_form_matches_quadrature() {
        let c = 0.0149;
        for x in [1e-4, 0.5, 6.0, 7.0, 100.0, 3000.0] {
            let q = integrate(|v| v * (-c * v).exp(), &[0.0, x], Tolerance::new(1e-13, 0.0)).unwrap().value;
            assert_relative_eq!(los_area_moment(x, c), q, max_relative = 1e-12);
            let q = integrate(|v| v * -(-c * v).exp_m1(), &[0.0, x], Tolerance::new(1e-13, 0.0)).unwrap().value;
            assert_relative_eq!(area_moment(x, LinkState::Nlos, c), q, max_relative = 1e-9);
        }
        // both sides of the series switch agree
        let y = 0.1 / c;
        assert_relative_eq!(los_area_moment(y * (1.0 - 1e-12), c), los_area_moment(y, c), max_relative = 1e-10);
    }

    #[test]
    fn pdf_rejects_non_positive_distance() {
        let net = NetworkConfig::default();
        assert!(assoc_distance_pdf(0.0, LinkState::Los, &net).is_err());
        assert!(assoc_distance_pdf(-3.0, LinkState::Nlos, &net).is_err());
    }

    #[test]
    fn pdf_is_linear_near_zero() {
        let net = NetworkConfig::default();
        let lambda = net.density_per_m2();
        for r in [1e-3, 1e-2] {
            let f = assoc_distance_pdf(r, LinkState::Los, &net).unwrap();
            assert_relative_eq!(f, 2.0 * PI * lambda * r, max_relative = 1e-3);
        }
    }

    #[test]
    fn pdf_matches_literal_void_probabilities() {
        // direct evaluation of both void integrals by quadrature
        let net = NetworkConfig::default();
        let c = net.los_decay_per_m;
        let lambda = net.density_per_m2();
        let tol = Tolerance::new(1e-12, 0.0);
        for state in LinkState::BOTH {
            for r in [5.0, 40.0, 150.0, 600.0] {
                let other = state.other();
                let r_eq = net.pathloss.equivalent_distance(r, state, other);
                let a = integrate(|v| v * state.probability(v, c), &[0.0, r], tol).unwrap().value;
                let b = integrate(|v| v * other.probability(v, c), &[0.0, r_eq], tol).unwrap().value;
                let direct = 2.0 * PI * lambda * state.probability(r, c) * r * (-2.0 * PI * lambda * (a + b)).exp();
                assert_relative_eq!(assoc_distance_pdf(r, state, &net).unwrap(), direct, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn normalization_and_los_dominance() {
        let spec = QuadratureSpec::default();
        for density in [10.0, 100.0, 1000.0] {
            let net = NetworkConfig { bs_density_per_km2: density, ..NetworkConfig::default() };
            let l = association_probability(LinkState::Los, &net, &spec).unwrap();
            let n = association_probability(LinkState::Nlos, &net, &spec).unwrap();
            assert!((l.value + n.value - 1.0).abs() <= 1e-3, "density {density}: {}", l.value + n.value);
            if density >= 100.0 {
                assert!(l.value > n.value);
            }
        }
    }
}
