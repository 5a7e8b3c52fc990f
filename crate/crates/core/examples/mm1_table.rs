//! Reruns the branching M/M/1 table (n = 10,000, independent-Q estimator)
//! and prints each row next to its reference value.

use spinetail::experiment::commands::{compare_table, RunOptions};
use spinetail::replication::default_parallelism;

fn main() -> spinetail::Result<()> {
    let opts = RunOptions {
        seed: None,
        parallelism: default_parallelism(),
    };
    println!("    t     estimate      std_err    reference   gen  ref_gen  nonzero  pass");
    for c in compare_table("mm1", &opts)? {
        println!(
            "{:5} {:12.5e} {:12.3e} {:12.5e} {:5.2} {:8.2} {:8.3}  {}",
            c.reference.t,
            c.estimate.value,
            c.estimate.std_err,
            c.reference.estimate,
            c.mean_terminal_gen,
            c.reference.terminal_gen,
            c.prop_nonzero,
            c.pass()
        );
    }
    Ok(())
}
