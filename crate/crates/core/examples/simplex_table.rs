//! The simplex model with `Q = 2B`: general estimator, n = 10,000, compared
//! with its reference table.

use spinetail::experiment::commands::{reproduce_table, RunOptions};

fn main() {
    let out = reproduce_table(
        "simplex",
        &RunOptions {
            seed: Some(7),
            parallelism: 1,
        },
    );
    print!("{}", out.report);
    if let Some(csv) = out.csv {
        print!("{csv}");
    }
}
