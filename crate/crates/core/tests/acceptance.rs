mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::*;
use markov_embed::cli::main_with_args;
use markov_embed::fixtures::{
    cascade_qubit_fixture, exchange_fixture, random_density, random_joint_state, random_model, standard_fixture,
    RandomModelSpec,
};
use markov_embed::generators::*;
use markov_embed::integrators::{simulate_trajectory_indexed, solve_gksl, solve_qme, Measurement, Scheme, SimConfig, State};
use markov_embed::linalg::fro_dist;
use markov_embed::verify::*;
use markov_embed::{BlockState, CMatrix, EmbeddingModel, Fault, Representation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn em(seed: u64, measurement: Measurement) -> SimConfig {
    SimConfig { dt: 1e-3, t_end: 1.0, scheme: Scheme::EulerMaruyama, measurement, seed, snapshot_stride: 1 }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn projection_defect(model: &EmbeddingModel, bs: &BlockState) -> f64 {
    let dims = &model.dims;
    let rho = bs.to_joint().rho;
    let o = oracle_pieces(model, 0.0, &rho);
    let mut worst = 0.0_f64;
    let mut note = |x: f64| worst = worst.max(if x.is_nan() { f64::INFINITY } else { x });

    note(max_blocks_dist(block_hs_term(model, 0.0, bs).unwrap().blocks(), &project(dims, &o.hs)));
    for (l, want) in o.aux.iter().enumerate() {
        note(max_blocks_dist(block_aux_term(model, 0.0, l, bs).unwrap().blocks(), &project(dims, want)));
    }
    note(max_blocks_dist(block_dissipator_term(model, 0.0, bs).unwrap().blocks(), &project(dims, &o.diss)));
    let drift = oracle_drift(&o);
    note(max_blocks_dist(block_qme_rhs(model, 0.0, bs).unwrap().blocks(), &project(dims, &drift)));
    let js = bs.to_joint();
    note(max_entry_dist(&joint_sme_drift(model, 0.0, &js).unwrap(), &drift));
    for (q, want) in [(Quadrature::Amplitude, &o.meas_amplitude), (Quadrature::Phase, &o.meas_phase)] {
        let Some((g_want, m_want)) = want else { continue };
        let (g, m) = block_meas_term(model, 0.0, bs, q).unwrap();
        note(max_blocks_dist(g.blocks(), &project(dims, g_want)));
        note((m - m_want).abs());
        let (gj, mj) = joint_sme_meas(model, 0.0, &js, q).unwrap();
        note(max_entry_dist(&gj, g_want));
        note((mj - m_want).abs());
    }
    worst
}

fn projection_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let m = rng.random_range(1..=2);
        let spec = RandomModelSpec {
            principal: rng.random_range(2..=3),
            aux: (0..m).map(|_| rng.random_range(1..=3)).collect(),
            m1: (0..m).map(|_| rng.random_range(0..=1)).collect(),
            m2: (0..m).map(|_| rng.random_range(0..=1)).collect(),
            probe: true,
        };
        let model = random_model(&mut rng, &spec, 1.0);
        for _ in 0..10 {
            let bs = BlockState::from_joint(&random_joint_state(&mut rng, &model.dims));
            worst = worst.max(projection_defect(&model, &bs));
        }
    }
    verdict(worst <= 1e-12, format!("max deviation {worst:.2e} over 50 models x 10 states"))
}

fn shared_path_equivalence() -> Outcome {
    let (model, init) = standard_fixture();
    let cfg = em(7, Measurement::Amplitude);
    let dev = crosscheck_paths(&model, &init, &cfg).map_err(|e| e.to_string())?;
    let mut detail = format!("deviation {dev:.2e}");
    let mut ok = dev <= 1e-10;
    for fault in [Fault::FlipPrincipalHamiltonian, Fault::FlipAuxHamiltonian, Fault::FlipDissipator, Fault::FlipMeasurement] {
        let d = crosscheck_paths_with_fault(&model, &init, &cfg, fault).map_err(|e| e.to_string())?;
        detail += &format!(", {fault:?} {d:.2e}");
        ok &= d > 1e-3;
    }
    verdict(ok, detail)
}

fn trivial_aux_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SimConfig { scheme: Scheme::Rk4, measurement: Measurement::None, ..em(0, Measurement::None) };
    let mut compared = 0;
    for case in 0..8 {
        let m = 1 + case % 2;
        let d_s = 2 + (case / 2) % 2;
        let spec = RandomModelSpec {
            principal: d_s,
            aux: vec![1; m],
            m1: (0..m).map(|_| rng.random_range(0..=1)).collect(),
            m2: (0..m).map(|_| rng.random_range(0..=1)).collect(),
            probe: case % 4 != 3,
        };
        let mut model = random_model(&mut rng, &spec, 0.8);
        for bath in &mut model.baths {
            bath.h_a = CMatrix::zeros(1, 1).into();
            bath.h_sa = CMatrix::zeros(d_s, d_s).into();
        }
        let rho0 = random_density(&mut rng, d_s);
        let bs = BlockState::from_blocks(model.dims.clone(), vec![rho0.clone()]).unwrap();
        let series = solve_qme(&model, &bs, &cfg).map_err(|e| e.to_string())?;

        let mut ls: Vec<CMatrix> = model.probe.iter().map(|p| p.eval(0.0).unwrap().clone()).collect();
        for bath in &model.baths {
            ls.extend(bath.l1.iter().map(|l| l.eval(0.0).unwrap().clone()));
            ls.extend(bath.l2.iter().map(|l| CMatrix::identity(d_s).scale(l.eval(0.0).unwrap()[(0, 0)])));
        }
        let direct = solve_gksl(model.h_s.eval(0.0).unwrap(), &ls, &rho0, cfg.dt, cfg.n_steps()).map_err(|e| e.to_string())?;
        if series.len() != direct.len() {
            return Err(format!("case {case}: {} vs {} samples", series.len(), direct.len()));
        }
        for (n, (s, d)) in series.iter().zip(&direct).enumerate() {
            if &s.reduced != d {
                return Err(format!("case {case}: first difference at step {n}, {:.2e}", max_entry_dist(&s.reduced, d)));
            }
        }
        compared += series.len();
    }
    Ok(format!("8 models, {compared} samples bitwise equal"))
}

fn closed_system_case() -> Outcome {
    let (model, init) = exchange_fixture(1.0);
    let cfg = SimConfig { scheme: Scheme::Rk4, measurement: Measurement::None, ..em(0, Measurement::None) };
    let series = solve_qme(&model, &BlockState::from_joint(&init), &cfg).map_err(|e| e.to_string())?;
    let steps = checkpoint_steps(cfg.n_steps());
    let times: Vec<f64> = steps.iter().map(|&s| cfg.time(s)).collect();
    let oracle = closed_system_oracle(&model, &init, &times).map_err(|e| e.to_string())?;
    let (mut d_oracle, mut d_cos) = (0.0_f64, 0.0_f64);
    for ((&s, t), r) in steps.iter().zip(&times).zip(&oracle) {
        d_oracle = d_oracle.max(fro_dist(&series[s].reduced, r).unwrap());
        d_cos = d_cos.max((series[s].reduced[(0, 0)].re - t.cos().powi(2)).abs());
    }
    verdict(d_oracle <= 1e-8 && d_cos <= 1e-8, format!("oracle {d_oracle:.2e}, cos^2 {d_cos:.2e}"))
}

fn ensemble_consistency() -> Outcome {
    let (model, init) = cascade_qubit_fixture();
    let cfg = em(11, Measurement::Amplitude);
    let s = ensemble_average(&model, &State::Joint(init), &cfg, 4000, &default_observables(2)).map_err(|e| e.to_string())?;
    let band = 5.0 * (s.t_end / s.n as f64).sqrt();
    verdict(
        s.means_within(5.0) && s.innovation_within(5.0) && s.checkpoints.len() == 10,
        format!(
            "N={}, {} checkpoints, max z {:.2}, innovation mean {:.2e} (band {band:.2e})",
            s.n,
            s.checkpoints.len(),
            s.max_z_score(),
            s.innovation_mean
        ),
    )
}

fn state_validity() -> Outcome {
    let (cascade, cascade_init) = cascade_qubit_fixture();
    let (standard, standard_init) = standard_fixture();
    let runs = [
        (&cascade, &cascade_init, Measurement::Amplitude, Representation::Blocks, 20),
        (&cascade, &cascade_init, Measurement::Phase, Representation::Joint, 5),
        (&standard, &standard_init, Measurement::Amplitude, Representation::Blocks, 5),
        (&standard, &standard_init, Measurement::Phase, Representation::Joint, 3),
    ];
    let (mut trace, mut pairing, mut neg, mut count) = (0.0_f64, 0.0_f64, 0.0_f64, 0usize);
    for (model, init, meas, repr, n) in runs {
        let init = State::Joint(init.clone());
        for k in 0..n {
            let rec = simulate_trajectory_indexed(model, &init, &em(5, meas), repr, k, Fault::None)
                .map_err(|e| e.to_string())?;
            for snap in &rec.snapshots {
                let bs = snap.state.to_blocks();
                trace = trace.max((bs.total_trace() - markov_embed::C64::new(1.0, 0.0)).norm());
                pairing = pairing.max(bs.pairing_defect());
                let min_eig = snap.state.to_joint().diagnostics().min_eigenvalue;
                neg = neg.max(if min_eig.is_nan() { f64::INFINITY } else { -min_eig });
                count += 1;
            }
        }
    }
    let mut drift = 0.0_f64;
    for (model, init) in [(&cascade, &cascade_init), (&standard, &standard_init)] {
        let cfg = SimConfig { scheme: Scheme::Rk4, measurement: Measurement::None, ..em(0, Measurement::None) };
        for s in solve_qme(model, &BlockState::from_joint(init), &cfg).map_err(|e| e.to_string())? {
            drift = drift.max((s.blocks.total_trace() - markov_embed::C64::new(1.0, 0.0)).norm());
        }
    }
    verdict(
        trace <= 1e-9 && pairing <= 1e-9 && neg <= 1e-8 && drift <= 1e-9,
        format!(
            "{count} snapshots: trace {trace:.2e}, pairing {pairing:.2e}, negativity {neg:.2e}; qme trace drift {drift:.2e}"
        ),
    )
}

fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
        }
    }
    out
}

fn determinism() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let small = scratch.path().join("small_ensemble.json");
    let text = fs::read_to_string(fixtures.join("cascade_qubit.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["sim"]["t_end"] = 0.2.into();
    doc["run"]["trajectories"] = 200.into();
    fs::write(&small, doc.to_string()).unwrap();

    let cases: Vec<(&str, PathBuf, Vec<&str>)> = vec![
        ("validate", fixtures.join("random_model.json"), vec!["--emit-normalized"]),
        ("qme", fixtures.join("random_model.json"), vec![]),
        ("sme", fixtures.join("random_model.json"), vec![]),
        ("sme", fixtures.join("cascade_qubit.json"), vec!["--seed", "99"]),
        ("crosscheck", fixtures.join("random_model.json"), vec![]),
        ("crosscheck", fixtures.join("exchange.json"), vec![]),
        ("ensemble", small.clone(), vec![]),
    ];
    let mut files = 0;
    for (i, (cmd, cfg, extra)) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = scratch.path().join(format!("{i}-{rep}"));
            let mut args = vec!["markov-embed".to_string(), cmd.to_string(), "--quiet".into()];
            args.extend(["--config".into(), cfg.display().to_string(), "--out".into(), out.display().to_string()]);
            args.extend(extra.iter().map(|s| s.to_string()));
            let code = main_with_args(args);
            if code == 2 {
                return Err(format!("{cmd} exited with a runtime error"));
            }
            outputs.push((code, read_tree(&out)));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{cmd} on {} differs between runs", cfg.display()));
        }
        if outputs[0].1.is_empty() {
            return Err(format!("{cmd} wrote no files"));
        }
        files += outputs[0].1.len();
    }
    Ok(format!("{} seeded commands, {files} output files byte-identical across runs", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("generator projection identity", projection_identity),
        ("shared-path SME equivalence", shared_path_equivalence),
        ("trivial-auxiliary collapse", trivial_aux_collapse),
        ("closed-system special case", closed_system_case),
        ("SME/QME ensemble consistency", ensemble_consistency),
        ("state validity", state_validity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
