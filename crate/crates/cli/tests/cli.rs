use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpergodic::fieldfile::{FieldFile, PartitionFile};
use qpergodic::models::HarmonicOscillator;
use qpergodic::models::QuasiperiodicForcing;
use qpergodic::partition::{CellValue, LabelKey};
use qpergodic::render::{colormap, COLORMAP_NAME, ESCAPED_COLOR};
use serde_json::{json, Value};

fn qperg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qperg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(format!("{name}.json"));
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn swing_config(name: &str, points: usize, periods: f64) -> Value {
    json!({
        "name": name,
        "model": {"name": "swing", "p_m": 0.95, "b": 1.0, "b_int": 100.0, "n_g": 20,
                  "modes": [1], "rms_amplitude": 1.5},
        "integrator": {"periods": periods},
        "domain": {"axes": [{"coordinate": 0, "lo": 1.0, "hi": 2.0, "points": points},
                            {"coordinate": 1, "lo": -0.15, "hi": 0.15, "points": points}]},
        "observables": ["sin_2delta", "cos_delta"],
        "output": {"directory": "out"}
    })
}

/// Dissipative model scanned over its two forcing phases (both periodic).
fn dissipative_torus_config(name: &str) -> Value {
    json!({
        "name": name,
        "model": {"name": "dissipative", "lambda": 1.0,
                  "frequencies": [1.4142135623730951, 1.7320508075688772],
                  "amplitudes": [1.0, 0.5]},
        "integrator": {"periods": 500, "steps_per_period": 32},
        "domain": {"axes": [{"coordinate": 1, "lo": 0.0, "hi": 6.0, "points": 3},
                            {"coordinate": 2, "lo": 0.0, "hi": 6.0, "points": 3}],
                   "base": [0.0]},
        "observables": ["m_squared"],
        "output": {"directory": "out"}
    })
}

#[test]
fn verify_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["dissipative", "integrator", "harmonic"] {
        let o = qperg(&["verify", suite], dir.path());
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        let out = stdout(&o);
        assert!(out.contains("PASS"));
        assert!(!out.contains("FAIL"));
        assert!(out.contains("measured"));
    }
    let o = qperg(&["verify", "everything"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn smoke_sweep_writes_fields_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "smoke", &swing_config("smoke", 2, 5.0));
    let o = qperg(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 2/2"));
    let out = dir.path().join("out");
    let f = FieldFile::load(&out.join("smoke.sin_2delta.qpf")).unwrap();
    assert_eq!(f.field.cells.len(), 4);
    assert!(out.join("smoke.cos_delta.qpf").exists());
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("smoke.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);

    // the embedded configuration re-runs to the same output
    let echo = f.configuration.unwrap();
    let cfg2 = write_config(dir.path(), "echo", &serde_json::to_value(&echo).unwrap());
    let o = qperg(&["sweep", cfg2.to_str().unwrap(), "--out-dir", "again", "--quiet"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read(out.join("smoke.sin_2delta.qpf")).unwrap(),
        std::fs::read(dir.path().join("again/smoke.sin_2delta.qpf")).unwrap()
    );
}

#[test]
fn invalid_configurations_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = json!({
        "name": "bad",
        "model": {"name": "harmonic", "frequencies": [-1.0, 1.1], "amplitudes": [0.2, 0.2]},
        "integrator": {"periods": 1},
        "domain": {"axes": [{"coordinate": 0, "lo": -1, "hi": 1, "points": 2},
                            {"coordinate": 1, "lo": -1, "hi": 1, "points": 2}]},
        "observables": ["m1_squared"],
        "output": {"directory": "out"}
    });
    let cfg = write_config(dir.path(), "bad", &bad);
    let o = qperg(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(!dir.path().join("out").exists());

    bad["model"]["frequencies"] = json!([1.0, 1.1]);
    bad["model"]["damping"] = json!(0.1);
    let cfg = write_config(dir.path(), "bad", &bad);
    let o = qperg(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("damping"));
    assert!(!dir.path().join("out").exists());

    let o = qperg(&["sweep", "missing.json"], dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn resonance_warning_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = dissipative_torus_config("res");
    c["model"]["frequencies"] = json!([1.0, 2.0]);
    c["integrator"]["periods"] = json!(2);
    let cfg = write_config(dir.path(), "res", &c);
    let o = qperg(&["sweep", cfg.to_str().unwrap(), "--quiet"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: near-resonant"));
}

#[test]
fn partition_of_constant_field_is_one_bounded_label() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "torus", &dissipative_torus_config("torus"));
    assert_eq!(code(&qperg(&["sweep", cfg.to_str().unwrap(), "--quiet"], dir.path())), 0);
    let o = qperg(
        &["partition", "out/torus.m_squared.qpf", "--eps", "0.1", "--out", "part"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let report = std::fs::read_to_string(dir.path().join("part/torus.report.txt")).unwrap();
    assert!(report.contains("labels: 1 (1 bounded-slice"), "{report}");
    assert!(report.contains("certified:"));
    let p = PartitionFile::load(&dir.path().join("part/torus.partition.qpp")).unwrap();
    assert_eq!(p.partition.labels.len(), 1);

    for eps in ["0", "-1", "bins:0"] {
        let o = qperg(&["partition", "out/torus.m_squared.qpf", "--eps", eps, "--out", "p"], dir.path());
        assert_eq!(code(&o), 1, "eps {eps}");
    }
}

#[test]
fn partition_rejects_mismatched_domains() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a", &swing_config("a", 2, 2.0));
    let b = write_config(dir.path(), "b", &swing_config("b", 3, 2.0));
    for c in [&a, &b] {
        assert_eq!(code(&qperg(&["sweep", c.to_str().unwrap(), "--quiet"], dir.path())), 0);
    }
    let o = qperg(
        &["partition", "out/a.sin_2delta.qpf", "out/b.sin_2delta.qpf", "--out", "p"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain"));
}

fn read_ppm(path: &Path) -> (usize, usize, Vec<[u8; 3]>) {
    let bytes = std::fs::read(path).unwrap();
    let text = String::from_utf8_lossy(&bytes[..20]).into_owned();
    let mut it = text.split_whitespace();
    assert_eq!(it.next(), Some("P6"));
    let w: usize = it.next().unwrap().parse().unwrap();
    let h: usize = it.next().unwrap().parse().unwrap();
    assert_eq!(it.next(), Some("255"));
    let header = format!("P6\n{w} {h}\n255\n").len();
    let px = bytes[header..].chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect::<Vec<_>>();
    assert_eq!(px.len(), w * h);
    (w, h, px)
}

#[test]
fn render_harmonic_field_has_extremal_color_at_center() {
    let dir = tempfile::tempdir().unwrap();
    let phases = [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2];
    let cfg = json!({
        "name": "rings",
        "model": {"name": "harmonic", "frequencies": [std::f64::consts::FRAC_PI_3, 1.1],
                  "amplitudes": [0.2, 0.2]},
        "integrator": {"periods": 100, "steps_per_period": 64},
        "domain": {"axes": [{"coordinate": 0, "lo": -10.0, "hi": 10.0, "points": 41},
                            {"coordinate": 1, "lo": -10.0, "hi": 10.0, "points": 41}],
                   "phases": phases},
        "observables": ["m1_squared"],
        "output": {"directory": "out"}
    });
    let path = write_config(dir.path(), "rings", &cfg);
    assert_eq!(code(&qperg(&["sweep", path.to_str().unwrap(), "--quiet"], dir.path())), 0);
    let o = qperg(&["render", "out/rings.m1_squared.qpf", "rings.ppm"], dir.path());
    assert_eq!(code(&o), 0);
    let (w, h, px) = read_ppm(&dir.path().join("rings.ppm"));
    assert_eq!((w, h), (41, 41));

    let m = HarmonicOscillator::new(
        QuasiperiodicForcing::at_zero_phase(vec![std::f64::consts::FRAC_PI_3, 1.1], vec![0.2, 0.2]).unwrap(),
    );
    let (cx, cy) = m.level_set_center(&phases).unwrap();
    let col = ((cx + 10.0) / 0.5).round() as usize;
    let row = ((cy + 10.0) / 0.5).round() as usize;
    let y = h - 1 - row;
    assert_eq!(px[y * w + col], colormap()[0]);
    // the center has x < 0, so the top-right corner lies on the largest ring
    let far = px[w - 1];
    assert!(colormap()[200..].contains(&far));

    let legend = std::fs::read_to_string(dir.path().join("rings.ppm.legend.txt")).unwrap();
    assert!(legend.contains(COLORMAP_NAME));
    assert!(legend.contains("min:") && legend.contains("max:"));
}

#[test]
fn render_escaped_and_malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    // far outside the separatrix: every cell escapes
    let mut c = swing_config("gone", 3, 20.0);
    c["domain"]["axes"][1]["lo"] = json!(2.0);
    c["domain"]["axes"][1]["hi"] = json!(3.0);
    let path = write_config(dir.path(), "gone", &c);
    assert_eq!(code(&qperg(&["sweep", path.to_str().unwrap(), "--quiet"], dir.path())), 0);
    let f = FieldFile::load(&dir.path().join("out/gone.sin_2delta.qpf")).unwrap();
    assert!(f.field.cells.iter().all(|c| *c == CellValue::Escaped));
    assert_eq!(code(&qperg(&["render", "out/gone.sin_2delta.qpf", "g.ppm"], dir.path())), 0);
    let (_, _, px) = read_ppm(&dir.path().join("g.ppm"));
    assert!(px.iter().all(|p| *p == ESCAPED_COLOR));

    std::fs::write(dir.path().join("junk.qpf"), b"not a field file").unwrap();
    let o = qperg(&["render", "junk.qpf", "j.ppm"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(!dir.path().join("j.ppm").exists());
}

#[test]
fn render_partition_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "p", &swing_config("p", 9, 10.0));
    assert_eq!(code(&qperg(&["sweep", path.to_str().unwrap(), "--quiet"], dir.path())), 0);
    let o = qperg(&["partition", "out/p.sin_2delta.qpf", "out/p.cos_delta.qpf", "--out", "part"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(code(&qperg(&["render", "part/p.partition.qpp", "p.ppm"], dir.path())), 0);
    let part = PartitionFile::load(&dir.path().join("part/p.partition.qpp")).unwrap().partition;
    let (w, h, px) = read_ppm(&dir.path().join("p.ppm"));
    assert_eq!((w, h), (9, 9));
    for (i, &l) in part.cells.iter().enumerate() {
        let (c, r) = part.domain.position(i);
        let escaped = part.labels[l as usize] == LabelKey::Escaped;
        assert_eq!(px[(h - 1 - r) * w + c] == ESCAPED_COLOR, escaped);
    }
}

#[test]
fn phases_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "s", &swing_config("s", 5, 10.0));
    let o = qperg(&["phases", path.to_str().unwrap(), "--k", "0"], dir.path());
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(dir.path().join("out/s.phases.tsv")).unwrap();
    let rows: Vec<_> = table.lines().filter(|l| l.starts_with("k=")).collect();
    assert_eq!(rows.len(), 2, "{table}"); // one data row, one overlap row

    let mut d = dissipative_torus_config("d");
    d["domain"]["axes"] = json!([{"coordinate": 0, "lo": -2.0, "hi": 2.0, "points": 3},
                                 {"coordinate": 1, "lo": 0.0, "hi": 6.0, "points": 3}]);
    d["domain"]["base"] = json!([0.0]);
    d["integrator"]["periods"] = json!(20);
    let path = write_config(dir.path(), "d", &d);
    let o = qperg(&["phases", path.to_str().unwrap(), "--k", "0,3", "--out", "d.tsv"], dir.path());
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(dir.path().join("d.tsv")).unwrap();
    let overlap = table.lines().find(|l| l.starts_with("k=0\t1.0")).unwrap();
    assert_eq!(overlap, "k=0\t1.000000\t1.000000");

    let o = qperg(&["phases", path.to_str().unwrap(), "--k", ""], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn presets_are_listed_and_runnable_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = qperg(&["presets"], dir.path());
    assert_eq!(code(&o), 0);
    let names = stdout(&o);
    assert_eq!(names.lines().count(), 28);
    for n in ["harmonic_fig1_a", "csi_fig1_a_desk", "csi_fig2_f_desk", "csi_fig2_f"] {
        assert!(names.lines().any(|l| l == n), "{n}");
    }
    let o = qperg(&["sweep", "no_such_preset"], dir.path());
    assert_eq!(code(&o), 1);
}
