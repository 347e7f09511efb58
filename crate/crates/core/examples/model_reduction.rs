//! Budgeted reduction: weighted maximum K-set cover against the thresholded
//! set cover, with and without the bisection over the coverage threshold.

use ievm::harness::synth_blobs;
use ievm::{batch_fit, EvmConfig, Reduction};

fn main() -> ievm::Result<()> {
    let data = synth_blobs(4, 150, 3, 1.0, 8)?;
    let full = batch_fit(
        &data,
        &EvmConfig {
            tail_size: 30,
            ..EvmConfig::default()
        },
    )?;
    println!("unreduced: {} extreme vectors", full.ev_count());

    for reduction in [
        Reduction::Wksc { k: 10 },
        Reduction::SetCover { zeta: 0.5 },
        Reduction::SetCoverBudget { k: 10, epsilon: 0.01 },
    ] {
        let mut model = full.clone();
        let stats = model.reduce(&reduction)?;
        let counts: Vec<usize> = model.ev_counts().into_values().collect();
        println!(
            "{reduction:?}: per-class {counts:?}, {} greedy selections, {} bisection iterations, {} distance evaluations",
            stats.greedy_selections, stats.bisection_iterations, stats.distance_evals
        );
    }
    Ok(())
}
