use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qpergodic::config::{EpsSpec, ResolvedRun, RunConfiguration};
use qpergodic::fieldfile::{is_partition_file, write_atomic, FieldFile, PartitionFile};
use qpergodic::models::SystemModel;
use qpergodic::partition::{
    boundedness_report, joint_level_sets, phase_shift_comparison, sweep, CellValue,
    TimeAverageField,
};
use qpergodic::render::{render_field, render_partition, write_ppm};
use qpergodic::{presets, Error, Result};
use serde_json::json;

use crate::verify::{self, Check};

/// A config path, or the name of a bundled preset when no such file exists.
pub fn load_config(arg: &str) -> Result<RunConfiguration> {
    let path = Path::new(arg);
    if path.exists() {
        RunConfiguration::load(path)
    } else if presets::names().any(|n| n == arg) || !arg.ends_with(".json") {
        presets::get(arg)
    } else {
        RunConfiguration::load(path)
    }
}

/// Validates the configuration and prints forcing resonance warnings.
fn resolve(config: &RunConfiguration) -> Result<ResolvedRun> {
    let run = config.resolve()?;
    for r in run.model.forcing().resonance_warnings() {
        eprintln!("warning: near-resonant forcing frequencies: {r}");
    }
    Ok(run)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

pub fn field_path(dir: &Path, run: &str, observable: &str) -> PathBuf {
    dir.join(format!("{run}.{observable}.qpf"))
}

pub fn run_verify(suite: &str) -> Result<usize> {
    let checks: Vec<Check> = match suite {
        "harmonic" => verify::harmonic()?,
        "dissipative" => verify::dissipative()?,
        "integrator" => verify::integrator()?,
        other => return Err(Error::Config(format!("unknown verify suite `{other}`"))),
    };
    let mut failures = 0;
    for c in &checks {
        println!("{}", c.line());
        failures += usize::from(!c.passed());
    }
    println!(
        "{suite}: {} of {} checks passed",
        checks.len() - failures,
        checks.len()
    );
    Ok(failures)
}

pub fn run_sweep(config_arg: &str, out_dir: Option<&Path>, quiet: bool) -> Result<Vec<PathBuf>> {
    let config = load_config(config_arg)?;
    let run = resolve(&config)?;
    let dir = out_dir.unwrap_or(&config.output.directory).to_path_buf();
    create_dir(&dir)?;

    let started = Instant::now();
    let progress = |done: usize, total: usize| {
        if !quiet {
            eprintln!("row {done}/{total}");
        }
    };
    let fields = sweep(
        &run.model,
        &run.domain,
        &run.observables,
        &run.integrator,
        run.escape.as_ref(),
        Some(&progress),
    )?;
    let elapsed = started.elapsed().as_secs_f64();

    // encode everything before touching the output directory
    let files: Vec<(PathBuf, Vec<u8>)> = fields
        .iter()
        .map(|f| {
            let bytes = FieldFile::new(Some(config.clone()), f.clone()).to_bytes();
            (field_path(&dir, &config.name, &f.observable), bytes)
        })
        .collect();
    let mut written = Vec::new();
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
        written.push(path.clone());
    }
    if config.output.render {
        for (f, (path, _)) in fields.iter().zip(&files) {
            let (img, legend) = render_field(f);
            let out = path.with_extension("ppm");
            write_ppm(&out, &img, &legend)?;
            written.push(out);
        }
    }

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let outputs: Vec<_> = fields
        .iter()
        .zip(&files)
        .map(|(f, (path, bytes))| field_summary(f, path, bytes.len()))
        .collect();
    let manifest = json!({
        "tool": "qperg",
        "version": env!("CARGO_PKG_VERSION"),
        "name": config.name,
        "created_unix": created,
        "elapsed_seconds": elapsed,
        "configuration": config,
        "resonance_warnings": run.model.forcing().resonance_warnings().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        "outputs": outputs,
    });
    let manifest_path = dir.join(format!("{}.manifest.json", config.name));
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&manifest_path, text.as_bytes())?;
    written.push(manifest_path);
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(written)
}

fn field_summary(f: &TimeAverageField, path: &Path, bytes: usize) -> serde_json::Value {
    let nonconvergent = f
        .cells
        .iter()
        .filter(|c| matches!(c, CellValue::NonConvergent(_)))
        .count();
    let (min, max) = f.range().map_or((None, None), |(a, b)| (Some(a), Some(b)));
    json!({
        "observable": f.observable,
        "file": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "bytes": bytes,
        "cells": f.cells.len(),
        "escaped": f.escaped_count(),
        "non_convergent": nonconvergent,
        "min": min,
        "max": max,
        "max_gap": f.metadata.max_gap,
    })
}

pub fn run_partition(fields: &[PathBuf], eps: &str, out: &Path) -> Result<Vec<PathBuf>> {
    let eps: EpsSpec = eps.parse()?;
    let files = fields
        .iter()
        .map(|p| FieldFile::load(p))
        .collect::<Result<Vec<_>>>()?;
    let configuration = files[0].configuration.clone();
    let fields: Vec<TimeAverageField> = files.into_iter().map(|f| f.field).collect();
    let binnings = eps.binnings(&fields)?;
    let part = joint_level_sets(&fields, &binnings)?;
    let report = boundedness_report(&part);

    create_dir(out)?;
    let stem = configuration.as_ref().map_or("partition".to_string(), |c| c.name.clone());
    let part_path = out.join(format!("{stem}.partition.qpp"));
    let report_path = out.join(format!("{stem}.report.txt"));
    let text = report.to_text(&part.domain);
    PartitionFile::new(configuration, part).save(&part_path)?;
    write_atomic(&report_path, text.as_bytes())?;
    print!("{text}");
    println!("wrote {}", part_path.display());
    println!("wrote {}", report_path.display());
    Ok(vec![part_path, report_path])
}

pub fn run_render(input: &Path, output: &Path) -> Result<()> {
    let bytes = std::fs::read(input).map_err(|e| Error::Io {
        path: input.to_path_buf(),
        source: e,
    })?;
    let (img, legend) = if is_partition_file(&bytes) {
        render_partition(&PartitionFile::from_bytes(&bytes, input)?.partition)
    } else {
        render_field(&FieldFile::from_bytes(&bytes, input)?.field)
    };
    write_ppm(output, &img, &legend)?;
    println!("wrote {} ({}x{})", output.display(), img.width, img.height);
    Ok(())
}

pub fn run_phases(config_arg: &str, ks: &[u32], out: Option<&Path>) -> Result<PathBuf> {
    if ks.is_empty() {
        return Err(Error::Config("--k needs at least one value".into()));
    }
    let config = load_config(config_arg)?;
    let run = resolve(&config)?;
    let phases = ks
        .iter()
        .map(|&k| Ok(config.with_k(k).resolve()?.domain.phases))
        .collect::<Result<Vec<_>>>()?;
    let observable = &run.observables[0];
    let summary = phase_shift_comparison(
        &run.model,
        &run.domain,
        observable,
        &run.integrator,
        run.escape.as_ref(),
        &phases,
    )?;
    let labels: Vec<String> = ks.iter().map(|k| format!("k={k}")).collect();
    let mut table = summary.to_table(&labels);
    table.push_str(&format!(
        "# bounded_fraction_spread\t{:.6}\n",
        summary.bounded_fraction_spread()
    ));
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => {
            create_dir(&config.output.directory)?;
            config.output.directory.join(format!("{}.phases.tsv", config.name))
        }
    };
    write_atomic(&path, table.as_bytes())?;
    print!("{table}");
    println!("wrote {}", path.display());
    Ok(path)
}
