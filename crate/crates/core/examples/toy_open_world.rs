//! Three known blobs and one unknown blob: train an iEVM in batches, then
//! check how well it separates knowns from the unknown.

use ievm::harness::synth::{blob_centers, sample_blobs};
use ievm::metrics::{confusion_summary, dir_at_far, Averaging, EvalRecord};
use ievm::{Decision, EvmConfig, EvmModel, Label, Reduction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ievm::Result<()> {
    let spread = 1.0;
    let mut centers = blob_centers(3, 2, spread, 11)?;
    // Put the unknown class well away from everything known.
    let far = centers.iter().map(|c| c[0]).fold(f64::MIN, f64::max) + 10.0 * spread;
    centers.push(vec![far, 0.0]);
    let labels: Vec<Label> = ["red", "green", "blue", "unseen"]
        .iter()
        .map(Label::new)
        .collect::<ievm::Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut train = sample_blobs(&centers[..3], &labels[..3], 80, spread, &mut rng)?;
    // Interleave classes so every batch is mixed.
    train.sort_by_key(|s| s.features[1].to_bits() % 97);
    let test_known = sample_blobs(&centers[..3], &labels[..3], 30, spread, &mut rng)?;
    let test_unknown = sample_blobs(&centers[3..], &labels[3..], 30, spread, &mut rng)?;

    let mut model = EvmModel::new(EvmConfig::default())?;
    for (epoch, batch) in train.chunks(40).enumerate() {
        let stats = model.partial_fit(batch)?;
        model.reduce(&Reduction::Wksc { k: 10 })?;
        println!(
            "epoch {}: {} new, {} of {} existing EVs re-estimated, {} EVs after reduction",
            epoch + 1,
            stats.new_evs,
            stats.flagged_evs,
            stats.existing_evs,
            model.ev_count()
        );
    }

    let mut records = Vec::new();
    for s in &test_known {
        let p = model.predict(&s.features)?;
        records.push(EvalRecord::from_prediction(Decision::Known(s.label.clone()), &p));
    }
    for s in &test_unknown {
        let p = model.predict(&s.features)?;
        records.push(EvalRecord::from_prediction(Decision::Unknown, &p));
    }

    let result = dir_at_far(&records, &[0.1, 0.01], Averaging::Micro)?;
    for ((far, dir), t) in result.far_targets.iter().zip(&result.dir_values).zip(&result.thresholds) {
        println!("DIR@FAR={far}: {dir:.3} (threshold {t:.3e})");
    }
    let summary = confusion_summary(&records, model.config.rejection_threshold);
    println!("at delta = {}: {summary:?}", model.config.rejection_threshold);
    Ok(())
}
