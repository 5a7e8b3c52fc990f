//! Runs an experiment described in JSON, the same format the `spinetail`
//! binary reads with `--config`.

use spinetail::experiment::commands::{run_is, RunOptions};
use spinetail::experiment::ExperimentConfig;

const CONFIG: &str = r#"{
    "model": {
        "type": "identical_pareto",
        "a": 5.0,
        "b": 0.5,
        "n_law": {"type": "uniform", "lo": 1, "hi": 2},
        "q_law": {"type": "log_exponential", "rate": 12.0}
    },
    "estimator": {"variant": "independent_q", "n": 20000, "t_grid": [0.5, 1.0, 2.0]},
    "seeds": {"master_seed": 42}
}"#;

fn main() -> spinetail::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let out = run_is(
        &cfg,
        &RunOptions {
            seed: None,
            parallelism: 1,
        },
    );
    print!("{}", out.report);
    print!("{}", out.csv.unwrap_or_default());
    println!("exit status: {:?}", out.status);
    Ok(())
}
