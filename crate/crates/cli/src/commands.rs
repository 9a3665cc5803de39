use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use mmwave_coverage::analytic::{coverage, CoverageQuery, GainModel};
use mmwave_coverage::channel::GainKind;
use mmwave_coverage::curve::{CoverageCurve, Method};
use mmwave_coverage::exec::Execution;
use mmwave_coverage::gains::{fit_all, mu_o_of, simplified_model, table_distribution, Family, GainDistribution, GainTable};
use mmwave_coverage::montecarlo::{coverage_curve_mc, harvest_gain_samples, GainCorpus, MCRunSpec};

use crate::config::{canonical_json, digest_bytes, Config, FitSection};
use crate::CliError;

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config_path: Option<&'a Path>,
    seed: u64,
    output_dir: &'a Path,
    config_digest: &'a str,
    outputs: Vec<String>,
    details: serde_json::Value,
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(format!("cannot create {}", dir.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(format!("cannot create {}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(mmwave_coverage::Error::from)?;
    writeln!(w).and_then(|_| w.flush()).map_err(CliError::io(format!("cannot write {}", path.display())))
}

fn write_manifest(dir: &Path, name: &str, manifest: &RunManifest) -> Result<(), CliError> {
    write_json(&dir.join(name), manifest)
}

fn write_curve(path: &Path, curve: &CoverageCurve) -> Result<(), CliError> {
    let mut w = create(path)?;
    curve.write_csv(&mut w)?;
    w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn simulate(config_path: &Path, out: Option<PathBuf>, exec: Execution) -> Result<(), CliError> {
    let cfg = Config::load(config_path)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    prepare_dir(&dir)?;
    let digest = cfg.digest();

    let mut spec = MCRunSpec::new(cfg.network.clone(), cfg.tx_array()?, cfg.rx_array()?, cfg.simulation.n_snapshots, cfg.seed);
    spec.channel = cfg.channel;
    spec.threshold_db_grid = cfg.threshold_grid();
    spec.noise_override = cfg.simulation.noise_override;
    spec.annulus_width_m = cfg.simulation.annulus_width_m;
    spec.execution = exec;
    let (mut curve, snaps) = coverage_curve_mc(&spec)?;
    curve.digest = digest.clone();

    let curve_path = dir.join("coverage_mc.csv");
    write_curve(&curve_path, &curve)?;
    let n = snaps.len() as f64;
    let los = snaps.iter().filter(|s| s.serving_state == mmwave_coverage::geometry::LinkState::Los).count() as f64 / n;
    let resamples: u64 = snaps.iter().map(|s| u64::from(s.resamples)).sum();
    let mean_stations = snaps.iter().map(|s| s.n_stations as f64).sum::<f64>() / n;
    let manifest = RunManifest {
        command: "simulate",
        config_path: Some(config_path),
        seed: cfg.seed,
        output_dir: &dir,
        config_digest: &digest,
        outputs: vec![file_name(&curve_path)],
        details: json!({
            "method": Method::MonteCarlo,
            "n_snapshots": snaps.len(),
            "resampled_empty_snapshots": resamples,
            "los_association_fraction": los,
            "mean_stations_per_snapshot": mean_stations,
        }),
    };
    write_manifest(&dir, "simulate_manifest.json", &manifest)?;
    println!("{}", curve_path.display());
    Ok(())
}

pub fn harvest(config_path: &Path, kind: GainKind, n: Option<usize>, out: Option<PathBuf>, exec: Execution) -> Result<(), CliError> {
    let cfg = Config::load(config_path)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    prepare_dir(&dir)?;
    let digest = cfg.digest();
    let n = n.unwrap_or(cfg.harvest.n_samples);
    let mut corpus = harvest_gain_samples(kind, n, &cfg.tx_array()?, &cfg.rx_array()?, &cfg.channel, cfg.seed, exec)?;
    corpus.digest = digest.clone();

    let path = dir.join(format!("gains_{kind}.csv"));
    let mut w = create(&path)?;
    corpus.write_csv(&mut w)?;
    w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))?;
    let mean = corpus.samples.iter().sum::<f64>() / corpus.samples.len() as f64;
    let manifest = RunManifest {
        command: "harvest",
        config_path: Some(config_path),
        seed: cfg.seed,
        output_dir: &dir,
        config_digest: &digest,
        outputs: vec![file_name(&path)],
        details: json!({ "kind": kind, "pattern": corpus.pattern, "n_tx": corpus.n_tx, "n_rx": corpus.n_rx, "n_samples": n, "sample_mean": mean }),
    };
    write_manifest(&dir, &format!("harvest_{kind}_manifest.json"), &manifest)?;
    println!("{}", path.display());
    Ok(())
}

pub fn fit(corpus_path: &Path, config_path: Option<&Path>, families: &[String], out: Option<PathBuf>) -> Result<(), CliError> {
    let mut section = match config_path {
        Some(p) => Config::load(p)?.fit,
        None => FitSection::default(),
    };
    if !families.is_empty() {
        section.families = families
            .iter()
            .map(|f| f.trim().parse::<Family>().map_err(|e| CliError::Config(format!("--families: {e}"))))
            .collect::<Result<_, _>>()?;
    }
    let bytes = std::fs::read(corpus_path).map_err(CliError::io(format!("cannot read {}", corpus_path.display())))?;
    let corpus = GainCorpus::read_csv(BufReader::new(&bytes[..]))?;
    let fit_json = canonical_json(&serde_json::to_value(&section).map_err(mmwave_coverage::Error::from)?);
    let digest = digest_bytes(&[bytes.as_slice(), fit_json.as_bytes()].concat());

    let reports = fit_all(&corpus.samples, &section.families, &section.bins)?;
    let dir = out.unwrap_or_else(|| corpus_path.parent().map(Path::to_path_buf).unwrap_or_default());
    prepare_dir(&dir)?;
    let stem = corpus_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".into());
    let path = dir.join(format!("fit_{stem}.json"));
    let report = json!({
        "digest": digest,
        "corpus": corpus_path,
        "corpus_digest": corpus.digest,
        "kind": corpus.kind,
        "pattern": corpus.pattern,
        "n_tx": corpus.n_tx,
        "n_rx": corpus.n_rx,
        "n_samples": corpus.samples.len(),
        "max_gain": corpus.samples.iter().copied().fold(0.0, f64::max),
        "bins": section.bins,
        "reports": reports,
    });
    write_json(&path, &report)?;
    for r in &reports {
        println!("{:<16} rmse {:<24e} params {:?}", r.family.as_str(), r.rmse, r.params);
    }
    Ok(())
}

/// Gain laws for proposition `prop`: explicit `[analytic]` entries win,
/// the rest come from the published tables for the configured sizes.
fn gain_model(cfg: &Config, prop: u8) -> Result<(GainModel, serde_json::Value), CliError> {
    let (n_tx, n_rx) = (cfg.antenna.n_tx, cfg.antenna.n_rx);
    let a = &cfg.analytic;
    let sourced = |given: &Option<GainDistribution>, fallback: &dyn Fn() -> mmwave_coverage::Result<GainDistribution>| {
        given.map(|d| (d, "config")).map(Ok).unwrap_or_else(|| fallback().map(|d| (d, "table")))
    };
    match prop {
        1 => {
            let (aligned, sa) = sourced(&a.aligned, &|| GainDistribution::exponential(mu_o_of(n_tx, n_rx)))?;
            let (mis, sm) = sourced(&a.misaligned, &|| table_distribution(GainTable::MisalignedLogLogistic, n_tx, n_rx))?;
            Ok((GainModel::Fitted { aligned, misaligned: Some(mis) }, json!({ "aligned": sa, "misaligned": sm })))
        }
        2 => {
            let (aligned, sa) = sourced(&a.aligned, &|| table_distribution(GainTable::AlignedExpLog, n_tx, n_rx))?;
            let (mis, sm) = sourced(&a.misaligned, &|| table_distribution(GainTable::MisalignedExpLog, n_tx, n_rx))?;
            Ok((GainModel::Fitted { aligned, misaligned: Some(mis) }, json!({ "aligned": sa, "misaligned": sm })))
        }
        3 => Ok((GainModel::Simplified(simplified_model(cfg.antenna.pattern, n_tx, n_rx)?), json!("simplified"))),
        other => Err(CliError::Config(format!("--prop must be 1, 2 or 3, got {other}"))),
    }
}

pub fn analytic(config_path: &Path, prop: u8, out: Option<PathBuf>, exec: Execution) -> Result<(), CliError> {
    let cfg = Config::load(config_path)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    let digest = cfg.digest();
    let (model, source) = gain_model(&cfg, prop)?;
    let method = match prop {
        1 => Method::Prop1,
        2 => Method::Prop2,
        _ => Method::Prop3,
    };
    let query = CoverageQuery {
        threshold_db_grid: cfg.threshold_grid(),
        network: cfg.network.clone(),
        gain_model: model,
        quadrature: cfg.analytic.quadrature,
        execution: exec,
    };
    let mut curve = coverage(method, &query)?;
    curve.digest = digest.clone();
    prepare_dir(&dir)?;
    let path = dir.join(format!("coverage_{method}.csv"));
    write_curve(&path, &curve)?;
    let max_err = curve.points.iter().map(|p| p.error).fold(0.0, f64::max);
    let manifest = RunManifest {
        command: "analytic",
        config_path: Some(config_path),
        seed: cfg.seed,
        output_dir: &dir,
        config_digest: &digest,
        outputs: vec![file_name(&path)],
        details: json!({
            "proposition": prop,
            "method": method,
            "gain_model": query.gain_model,
            "gain_source": source,
            "quadrature": query.quadrature,
            "max_error_estimate": max_err,
        }),
    };
    write_manifest(&dir, &format!("analytic_{method}_manifest.json"), &manifest)?;
    println!("{}", path.display());
    Ok(())
}

fn read_curve(path: &Path) -> Result<CoverageCurve, CliError> {
    let f = File::open(path).map_err(CliError::io(format!("cannot open {}", path.display())))?;
    Ok(CoverageCurve::read_csv(BufReader::new(f), Method::MonteCarlo)?)
}

pub fn compare(a: &Path, b: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (ca, cb) = (read_curve(a)?, read_curve(b)?);
    let gap = ca.max_abs_gap(&cb)?;
    let report = json!({
        "max_abs_gap": gap.max_abs_gap,
        "argmax_threshold_db": gap.argmax_threshold_db,
        "curve_a": { "path": a, "method": ca.method, "digest": ca.digest },
        "curve_b": { "path": b, "method": cb.method, "digest": cb.digest },
    });
    if let Some(p) = out {
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            prepare_dir(parent)?;
        }
        write_json(p, &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report).map_err(mmwave_coverage::Error::from)?);
    Ok(())
}
