use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mmwave_coverage::analytic::{coverage_prop1, CoverageQuery, GainModel, QuadratureSpec};
use mmwave_coverage::antenna::{ArrayConfig, ElementPattern};
use mmwave_coverage::channel::{ChannelParams, GainKind};
use mmwave_coverage::exec::Execution;
use mmwave_coverage::gains::{mu_o_of, table_distribution, GainTable};
use mmwave_coverage::geometry::NetworkConfig;
use mmwave_coverage::montecarlo::{harvest_gain_samples, simulate, MCRunSpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn snapshots(c: &mut Criterion) {
    let mut group = c.benchmark_group("snapshots");
    group.sample_size(10);
    for pattern in [ElementPattern::Iso, ElementPattern::ThreeGpp] {
        let tx = ArrayConfig::new(pattern, 256).unwrap();
        let rx = ArrayConfig::new(pattern, 64).unwrap();
        let mut spec = MCRunSpec::new(NetworkConfig::default(), tx, rx, 64, 1);
        for (name, exec) in MODES {
            spec.execution = exec;
            group.bench_with_input(BenchmarkId::new(name, pattern), &spec, |b, spec| b.iter(|| simulate(spec).unwrap()));
        }
    }
    group.finish();
}

fn harvest(c: &mut Criterion) {
    let mut group = c.benchmark_group("harvest_misaligned");
    group.sample_size(10);
    let tx = ArrayConfig::new(ElementPattern::ThreeGpp, 256).unwrap();
    let rx = ArrayConfig::new(ElementPattern::ThreeGpp, 64).unwrap();
    let ch = ChannelParams::default();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| harvest_gain_samples(GainKind::Misaligned, 10_000, &tx, &rx, &ch, 3, exec).unwrap()));
    }
    group.finish();
}

fn analytic(c: &mut Criterion) {
    let mut group = c.benchmark_group("prop1_curve");
    group.sample_size(10);
    let mut query = CoverageQuery {
        threshold_db_grid: (0..41).map(|k| -10.0 + k as f64).collect(),
        network: NetworkConfig::default(),
        gain_model: GainModel::Fitted {
            aligned: mmwave_coverage::gains::GainDistribution::exponential(mu_o_of(256, 64)).unwrap(),
            misaligned: Some(table_distribution(GainTable::MisalignedLogLogistic, 256, 64).unwrap()),
        },
        quadrature: QuadratureSpec::default(),
        execution: Execution::Sequential,
    };
    for (name, exec) in MODES {
        query.execution = exec;
        group.bench_function(name, |b| b.iter(|| coverage_prop1(&query).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, snapshots, harvest, analytic);
criterion_main!(benches);
