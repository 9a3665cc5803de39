//! Statistical invariants of the simulator that need more snapshots than a
//! unit test should spend.

use mmwave_coverage::antenna::{ArrayConfig, ElementPattern};
use mmwave_coverage::curve::CoverageCurve;
use mmwave_coverage::geometry::NetworkConfig;
use mmwave_coverage::montecarlo::{coverage_curve_mc, MCRunSpec};

fn spec(pattern: ElementPattern, n_tx: usize, n_rx: usize, n: usize, seed: u64) -> MCRunSpec {
    MCRunSpec::new(NetworkConfig::default(), ArrayConfig::new(pattern, n_tx).unwrap(), ArrayConfig::new(pattern, n_rx).unwrap(), n, seed)
}

fn worst_z(a: &CoverageCurve, b: &CoverageCurve) -> f64 {
    a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| {
            let se = (p.error * p.error + q.error * q.error).sqrt();
            if se == 0.0 { if p.probability == q.probability { 0.0 } else { f64::INFINITY } } else { (p.probability - q.probability).abs() / se }
        })
        .fold(0.0, f64::max)
}

#[test]
fn independent_seeds_agree_within_three_standard_errors() {
    let (a, _) = coverage_curve_mc(&spec(ElementPattern::Iso, 64, 16, 2000, 1)).unwrap();
    let (b, _) = coverage_curve_mc(&spec(ElementPattern::Iso, 64, 16, 2000, 2)).unwrap();
    assert_ne!(a, b);
    let z = worst_z(&a, &b);
    assert!(z <= 3.0, "largest difference is {z:.2} standard errors");
}

#[test]
fn doubling_the_region_moves_the_curve_by_less_than_one_standard_error() {
    let small = spec(ElementPattern::Iso, 256, 64, 1000, 5);
    let mut big = small.clone();
    big.network.region_radius_m *= 2.0;
    let (a, _) = coverage_curve_mc(&small).unwrap();
    let (b, snaps) = coverage_curve_mc(&big).unwrap();
    assert!(snaps.iter().map(|s| s.n_stations).sum::<usize>() > 3 * 1000 * 1000);
    for (p, q) in a.points.iter().zip(&b.points) {
        assert!(q.probability <= p.probability, "more interferers cannot raise coverage at {} dB", p.threshold_db);
        assert!(p.probability - q.probability < p.error.max(q.error), "at {} dB: {} vs {}", p.threshold_db, p.probability, q.probability);
    }
}

#[test]
fn standard_error_is_bounded_by_the_binomial_maximum() {
    let n = 400;
    let (c, _) = coverage_curve_mc(&spec(ElementPattern::ThreeGpp, 16, 4, n, 9)).unwrap();
    for p in &c.points {
        assert!(p.error <= 0.5 / (n as f64).sqrt() + 1e-15);
    }
    assert!(c.is_nonincreasing(0.0));
}
