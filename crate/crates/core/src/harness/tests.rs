use super::*;
use crate::error::Error;

fn jump_config(eps: &str, extra: &str) -> String {
    format!(
        r#"
version = 1
mode = "evaluate-recovery"
{extra}
[geometry]
dim = 2
lengths = [1.0, 1.0]
crack = {{ level = 0.5 }}

[target]
kind = "jump"
below = [0.0, 0.0]
above = [0.0, 1.0]

[params]
lambda = 1.0
theta = 1.0

[schedule]
eps = {eps}
preset = "subcritical"

[recovery]
allow_boundary_crack = true
"#
    )
}

fn affine_config(eps: &str, preset: &str) -> String {
    format!(
        r#"
version = 1
mode = "evaluate-recovery"

[geometry]
dim = 2
lengths = [1.0, 1.0]

[target]
kind = "affine"
grad = [[0.3, 0.1], [-0.2, 0.5]]

[params]
lambda = 1.0
theta = 1.0

[schedule]
eps = {eps}
preset = "{preset}"
"#
    )
}

fn config_error(text: &str) -> String {
    match ExperimentConfig::from_toml_str(text) {
        Err(Error::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn parses_and_derives_the_schedule() {
    let cfg = ExperimentConfig::from_toml_str(&jump_config("[0.2, 0.1]", "")).unwrap();
    assert_eq!(cfg.mode, Mode::EvaluateRecovery);
    assert_eq!(cfg.schedule.exponent().unwrap(), 2.0);
    for &eps in &cfg.schedule.eps {
        let delta = cfg.schedule.delta(eps).unwrap();
        assert!((delta - eps * eps).abs() <= 1e-15 * eps * eps);
    }
    assert_eq!(Preset::Critical.exponent(), 1.0);
    assert_eq!(Preset::NiUpper.exponent(), 3.0);
}

#[test]
fn schema_violations_name_the_key() {
    let bogus = jump_config("[0.2]", "bogus_key = 3");
    assert!(config_error(&bogus).contains("bogus_key"));
    let nested = jump_config("[0.2]", "").replace("theta = 1.0", "theta = 1.0\nthetta = 2.0");
    assert!(config_error(&nested).contains("thetta"));
    let version = jump_config("[0.2]", "").replace("version = 1", "version = 2");
    assert!(config_error(&version).contains("version"));
    let missing = jump_config("[0.2]", "").replace("version = 1", "");
    assert!(config_error(&missing).contains("version"));
}

#[test]
fn schedule_invariants() {
    assert!(config_error(&jump_config("[]", "")).contains("empty"));
    assert!(config_error(&jump_config("[0.1, 0.2]", "")).contains("decreasing"));
    assert!(config_error(&jump_config("[0.1, 0.1]", "")).contains("decreasing"));
    let both = jump_config("[0.1]", "").replace("preset = \"subcritical\"", "preset = \"critical\"\np = 2.0");
    assert!(config_error(&both).contains("preset"));
    let neg = jump_config("[0.1]", "").replace("preset = \"subcritical\"", "p = -1.0");
    assert!(config_error(&neg).contains("p"));
    let c0 = jump_config("[0.1]", "").replace("preset = \"subcritical\"", "preset = \"subcritical\"\nc = 0.0");
    assert!(config_error(&c0).contains("schedule.c"));
}

#[test]
fn target_and_geometry_checks() {
    let no_crack = jump_config("[0.1]", "").replace("crack = { level = 0.5 }", "");
    assert!(config_error(&no_crack).contains("crack"));
    let faces = jump_config("[0.1]", "").replace("crack = {", "dirichlet = [\"low0\", \"high9\"]\ncrack = {");
    assert!(config_error(&faces).contains("high9"));
    let ok = jump_config("[0.1]", "").replace("crack = {", "dirichlet = [\"low0\", \"high0\"]\ncollar = 1\ncrack = {");
    let cfg = ExperimentConfig::from_toml_str(&ok).unwrap();
    let dom = cfg.domain(0.05).unwrap();
    assert!(!dom.dirichlet_nodes().is_empty());
    // collar nodes take the extension of the target, not zero
    let datum = cfg.datum(&dom).unwrap();
    for n in dom.dirichlet_nodes() {
        let x = dom.position(n);
        let expect = if x[1] >= 0.5 { 1.0 } else { 0.0 };
        assert_eq!(datum.node(n)[1], expect);
    }
}

#[test]
fn jump_recovery_sweep_gap_decreases() {
    let cfg = ExperimentConfig::from_toml_str(&jump_config("[0.2, 0.14, 0.1]", "")).unwrap();
    let rows = run_sweep(&cfg, None).unwrap();
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[1].rel_gap.unwrap() < w[0].rel_gap.unwrap());
    }
    for r in &rows {
        assert!(r.error.is_none());
        assert_eq!(r.griffith_ref, 1.0);
        let t = r.total.unwrap();
        assert!((t - (r.f_elastic + r.f_div + r.g_mm)).abs() <= 1e-12 * t);
    }
}

#[test]
fn affine_targets_approach_the_bulk_reference() {
    for (preset, eps) in [
        ("subcritical", "[0.25, 0.125, 0.0625]"),
        ("ni-upper", "[0.5, 0.35, 0.25]"),
        ("critical", "[0.125, 0.0625, 0.03125]"),
    ] {
        let cfg = ExperimentConfig::from_toml_str(&affine_config(eps, preset)).unwrap();
        let rows = run_sweep(&cfg, None).unwrap();
        for r in &rows {
            assert_eq!(r.g_mm, 0.0);
        }
        let last = rows.last().unwrap();
        assert!(last.rel_gap.unwrap() <= 0.05, "{preset}: {:?}", last.rel_gap);
        for w in rows.windows(2) {
            assert!(w[1].rel_gap.unwrap() < w[0].rel_gap.unwrap());
        }
    }
}

#[test]
fn failing_rows_are_recorded_and_the_run_continues() {
    // δ = ε for the critical preset, which the recovery construction rejects
    let text = jump_config("[0.2, 0.1]", "").replace("preset = \"subcritical\"", "preset = \"critical\"");
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    let rows = run_sweep(&cfg, None).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.error.as_deref().is_some_and(|e| e.contains("δ < ε"))));
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.ends_with(",rel_gap,error"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn csv_layout_and_reproducibility() {
    let dir = std::env::temp_dir().join(format!("latfrac-sweep-{}", std::process::id()));
    let cfg = ExperimentConfig::from_toml_str(&jump_config("[0.2, 0.14, 0.1]", "seed = 9")).unwrap();
    run_sweep(&cfg, Some(&dir)).unwrap();
    let first = std::fs::read(dir.join("sweep.csv")).unwrap();
    run_sweep(&cfg, Some(&dir)).unwrap();
    let second = std::fs::read(dir.join("sweep.csv")).unwrap();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(lines.len(), 4);
    let eps: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(eps, vec![0.2, 0.14, 0.1]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn minimize_sweep_writes_fields_and_reports() {
    let text = r#"
version = 1
mode = "minimize"
seed = 3
init_noise = 0.2

[geometry]
dim = 2
lengths = [1.0, 0.5]
dirichlet = ["low0", "high0"]
collar = 1

[target]
kind = "affine"
grad = [[0.2, 0.0], [0.0, 0.0]]

[params]
lambda = 1.0
theta = 1.0
variant = "dirichlet"

[schedule]
eps = [0.3, 0.2]
p = 2.0
c = 0.5

[solver]
max_outer = 30

[output]
fields = true
csv = "bar.csv"
"#;
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let dir = std::env::temp_dir().join(format!("latfrac-min-{}", std::process::id()));
    let rows = run_sweep(&cfg, Some(&dir)).unwrap();
    assert!(rows.iter().all(|r| r.error.is_none() && r.total.is_some()));
    for i in 0..2 {
        for f in [format!("u_{i}.glf"), format!("v_{i}.glf"), format!("report_{i}.json")] {
            assert!(dir.join(&f).exists(), "{f}");
        }
    }
    assert!(dir.join("bar.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_mode_has_no_sweep() {
    let text = jump_config("[0.2]", "").replace("evaluate-recovery", "verify");
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    assert!(run_sweep(&cfg, None).is_err());
}

#[test]
fn verify_selection() {
    let report = run_verify(&["matrix1".into()], 0).unwrap();
    assert_eq!(report.suites.len(), 1);
    assert_eq!(report.suites[0].name, "matrix1");
    assert!(report.passed);
    assert!(run_verify(&["nope".into()], 0).is_err());
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["suites"][0]["passed"], serde_json::Value::Bool(true));
}

#[test]
fn verify_all_passes() {
    let report = run_verify(&[], 1).unwrap();
    assert_eq!(report.suites.len(), SUITES.len());
    for s in &report.suites {
        assert!(s.passed, "{}: {}", s.name, s.message);
    }
}

#[test]
fn relative_gap_falls_back_to_absolute() {
    assert_eq!(relative_gap(0.5, 0.0), 0.5);
    assert_eq!(relative_gap(1.5, 1.0), 0.5);
}
