//! Seeded isotropic Gaussian blobs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sample::{FeatureVector, Label, LabeledSample};

/// Minimum distance between blob means, in units of `spread`.
pub const MIN_SEPARATION: f64 = 6.0;

fn check(n_classes: usize, per_class: usize, dim: usize, spread: f64) -> Result<()> {
    if n_classes == 0 || per_class == 0 || dim == 0 || !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "blob parameters must be positive, got classes={n_classes} per_class={per_class} dim={dim} spread={spread}"
        )));
    }
    Ok(())
}

fn min_pairwise(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            best = best.min(d);
        }
    }
    best
}

fn draw_centers(rng: &mut impl Rng, n_classes: usize, dim: usize, spread: f64) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let min = min_pairwise(&centers);
    if min.is_finite() && min > 0.0 {
        let scale = MIN_SEPARATION * spread / min * (1.0 + 1e-9);
        for c in &mut centers {
            for v in c.iter_mut() {
                *v *= scale;
            }
        }
    }
    centers
}

/// Blob means as placed by [`synth_blobs`] for the same arguments.
pub fn blob_centers(n_classes: usize, dim: usize, spread: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    check(n_classes, 1, dim, spread)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw_centers(&mut rng, n_classes, dim, spread))
}

/// Draws `per_class` samples around each center, labelled `labels[i]`.
pub fn sample_blobs(
    centers: &[Vec<f64>],
    labels: &[Label],
    per_class: usize,
    spread: f64,
    rng: &mut impl Rng,
) -> Result<Vec<LabeledSample>> {
    if centers.len() != labels.len() {
        return Err(Error::InvalidConfig("one label per center is required".into()));
    }
    let mut out = Vec::with_capacity(centers.len() * per_class);
    for (center, label) in centers.iter().zip(labels) {
        for _ in 0..per_class {
            let values = center
                .iter()
                .map(|m| m + spread * rng.sample::<f64, _>(StandardNormal))
                .collect();
            out.push(LabeledSample::new(FeatureVector::new(values)?, label.clone()));
        }
    }
    Ok(out)
}

/// `n_classes` blobs labelled `c0, c1, ...` with `per_class` samples each,
/// grouped by class. Means are random directions rescaled so that the
/// closest pair is `6 * spread` apart.
pub fn synth_blobs(n_classes: usize, per_class: usize, dim: usize, spread: f64, seed: u64) -> Result<Vec<LabeledSample>> {
    check(n_classes, per_class, dim, spread)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = draw_centers(&mut rng, n_classes, dim, spread);
    let labels = (0..n_classes)
        .map(|i| Label::new(format!("c{i}")))
        .collect::<Result<Vec<_>>>()?;
    sample_blobs(&centers, &labels, per_class, spread, &mut rng)
}
