use std::fs;
use std::path::{Path, PathBuf};

use markov_embed::cli::main_with_args;
use markov_embed::config::{normalized_string, parse_config, parse_config_str, ParseError};
use markov_embed::fixtures::{cascade_qubit_fixture, exchange_fixture, standard_fixture};
use markov_embed::integrators::{Measurement, Scheme};
use markov_embed::linalg::fro_dist;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["markov-embed".to_string(), cmd.into(), "--quiet".into()];
    args.extend(["--config".into(), config.display().to_string(), "--out".into(), out.display().to_string()]);
    args.extend(extra.iter().map(|s| s.to_string()));
    main_with_args(args)
}

fn invalid(text: &str) -> Vec<String> {
    match parse_config_str(text) {
        Err(ParseError::Invalid(errs)) => errs.iter().map(|e| e.to_string()).collect(),
        other => panic!("expected validation errors, got {other:?}"),
    }
}

#[test]
fn minimal_config_gets_defaults() {
    let cfg = parse_config(&fixture("closed_qubit.json")).unwrap();
    assert_eq!(cfg.sim.measurement, Measurement::None);
    assert_eq!(cfg.sim.scheme, Scheme::EulerMaruyama);
    assert_eq!(cfg.sim.seed, 0);
    assert_eq!(cfg.run.trajectories, 1000);
    assert!(cfg.model.probe.is_none());
    assert_eq!(cfg.initial.rho[(0, 0)].re, 1.0);
    assert_eq!(cfg.initial.rho.trace().re, 1.0);
}

#[test]
fn non_hermitian_hamiltonian_is_located() {
    let errs = invalid(r#"{"model":{"dims":{"principal":2},"H_s":[[0,1],[0,0]]},"sim":{"dt":0.1,"t_end":1}}"#);
    assert_eq!(errs.len(), 1);
    assert!(errs[0].starts_with("model.H_s"), "{}", errs[0]);
    assert!(errs[0].contains("hermiticity"), "{}", errs[0]);
}

#[test]
fn every_error_is_reported() {
    let errs = invalid(
        r#"{"model":{"dims":{"principal":2},"H_s":[[0,1],[0,0]],"colour":1},
            "sim":{"dt":-0.1,"t_end":1,"scheme":"leapfrog"}}"#,
    );
    let joined = errs.join("\n");
    assert_eq!(errs.len(), 4, "{joined}");
    for path in ["model.H_s", "model.colour", "sim.dt", "sim.scheme"] {
        assert!(errs.iter().any(|e| e.starts_with(path)), "missing {path} in\n{joined}");
    }
}

#[test]
fn malformed_json_is_a_syntax_error() {
    let errs = invalid(r#"{"model":{"dims":{"principal":2},"H_s":[[1,0],[0,1]]},"sim":{"dt":0.1,"t_end":1,"measurement":"phase"}}"#);
    assert!(errs[0].starts_with("sim.measurement"), "{}", errs[0]);
    assert!(matches!(parse_config_str("{\"model\":"), Err(ParseError::Syntax(_))));
    assert!(matches!(parse_config(Path::new("/nonexistent/cfg.json")), Err(ParseError::Io { .. })));
}

#[test]
fn cascade_shorthand_expands_to_fixture_model() {
    let cfg = parse_config(&fixture("cascade_qubit.json")).unwrap();
    let (model, init) = cascade_qubit_fixture();
    assert_eq!(cfg.model, model);
    assert!(fro_dist(&cfg.initial.rho, &init.rho).unwrap() <= 1e-15);
    assert_eq!(cfg.run.trajectories, 4000);
}

#[test]
fn exchange_config_matches_fixture() {
    let cfg = parse_config(&fixture("exchange.json")).unwrap();
    let (model, init) = exchange_fixture(1.0);
    assert!(cfg.model.is_closed());
    assert_eq!(cfg.model.dims, model.dims);
    let h = |m: &markov_embed::EmbeddingModel| m.baths[0].h_sa.eval(0.0).unwrap().clone();
    assert!(fro_dist(&h(&cfg.model), &h(&model)).unwrap() <= 1e-15);
    assert_eq!(cfg.initial.rho, init.rho);
}

#[test]
fn bundled_random_model_is_the_standard_fixture() {
    let cfg = parse_config(&fixture("random_model.json")).unwrap();
    let (model, init) = standard_fixture();
    assert_eq!(cfg.model, model);
    assert_eq!(cfg.initial, init);
}

#[test]
fn normalized_form_round_trips() {
    for name in ["closed_qubit.json", "cascade_qubit.json", "exchange.json", "random_model.json"] {
        let cfg = parse_config(&fixture(name)).unwrap();
        let text = normalized_string(&cfg);
        let again = parse_config_str(&text).unwrap();
        assert_eq!(again, cfg, "{name}");
        assert_eq!(normalized_string(&again), text, "{name}");
    }
}

#[test]
fn validate_emits_normalized_config() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("validate", &fixture("exchange.json"), dir.path(), &["--emit-normalized"]), 0);
    let text = fs::read_to_string(dir.path().join("normalized.json")).unwrap();
    assert_eq!(parse_config_str(&text).unwrap(), parse_config(&fixture("exchange.json")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"model":{"dims":{"principal":2},"H_s":[[0,1],[0,0]]},"sim":{"dt":0.1,"t_end":1}}"#).unwrap();
    assert_eq!(run("validate", &bad, dir.path(), &[]), 1);
    assert_eq!(run("validate", &dir.path().join("missing.json"), dir.path(), &[]), 2);
    assert_eq!(main_with_args(["markov-embed", "frobnicate"]), 2);
    assert_eq!(run("ensemble", &fixture("exchange.json"), dir.path(), &[]), 2);
}

#[test]
fn crosscheck_on_bundled_fixture_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("crosscheck", &fixture("random_model.json"), dir.path(), &[]), 0);
    let report = fs::read_to_string(dir.path().join("crosscheck_report.txt")).unwrap();
    assert!(report.contains("PASS"));
    assert!(!report.contains("FAIL"));
}

#[test]
fn crosscheck_on_closed_model_uses_oracle() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("crosscheck", &fixture("exchange.json"), dir.path(), &[]), 0);
    let report = fs::read_to_string(dir.path().join("crosscheck_report.txt")).unwrap();
    assert!(!report.contains("SKIP") && !report.contains("FAIL"), "{report}");
}

#[test]
fn qme_with_zero_horizon_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.json");
    fs::write(&cfg, r#"{"model":{"dims":{"principal":2},"H_s":[[1,0],[0,-1]]},"sim":{"dt":0.01,"t_end":0}}"#).unwrap();
    assert_eq!(run("qme", &cfg, dir.path(), &[]), 0);
    let text = fs::read_to_string(dir.path().join("qme.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[0].starts_with("t,"));
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn sme_outputs_are_reproducible_and_seed_sensitive() {
    let cfg = fixture("cascade_qubit.json");
    let read = |dir: &Path| {
        ["sme_record.csv", "sme_observables.csv"].map(|f| fs::read(dir.join(f)).unwrap())
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    assert_eq!(run("sme", &cfg, a.path(), &[]), 0);
    assert_eq!(run("sme", &cfg, b.path(), &[]), 0);
    assert_eq!(run("sme", &cfg, c.path(), &["--seed", "12"]), 0);
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path())[0], read(c.path())[0]);
    let record = String::from_utf8(read(a.path())[0].clone()).unwrap();
    assert_eq!(record.lines().next().unwrap(), "t,dY,dI,mval");
    assert_eq!(record.lines().count(), 1001);
}
