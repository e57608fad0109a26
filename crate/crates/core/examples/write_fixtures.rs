//! Regenerates `fixtures/random_model.json` from the library's standard
//! fixture: `cargo run --example write_fixtures`.

use std::path::Path;

use markov_embed::config::{normalized_string, ExperimentConfig, RunOptions};
use markov_embed::fixtures::standard_fixture;
use markov_embed::verify::default_observables;
use markov_embed::{Measurement, Representation, Scheme, SimConfig};

fn main() -> std::io::Result<()> {
    let (model, initial) = standard_fixture();
    let cfg = ExperimentConfig {
        model,
        initial,
        sim: SimConfig {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::EulerMaruyama,
            measurement: Measurement::Amplitude,
            seed: 7,
            snapshot_stride: 100,
        },
        representation: Representation::Blocks,
        run: RunOptions { trajectories: 200, observables: default_observables(2), output: None },
    };
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/random_model.json");
    std::fs::write(&path, normalized_string(&cfg))?;
    println!("wrote {}", path.display());
    Ok(())
}
