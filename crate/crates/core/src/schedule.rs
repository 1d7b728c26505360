//! Gradual sampling: linearly ramp the probability of drawing a synthetic
//! eyeglass image as training iterations advance, `p = slope * n + p0`,
//! capped at `p_cap`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeded;
use crate::synth::{GlassFlag, Manifest, ManifestRecord};

/// Schedule parameters. The cap defaults to 0.5 in the CLI config since a
/// 1:1 mixture is balanced there, but any cap in [p0, 1] is valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSchedule<T: Scalar> {
    pub slope: T,
    pub initial: T,
    pub cap: T,
}

impl<T: Scalar> SamplerSchedule<T> {
    pub fn new(slope: T, initial: T, cap: T) -> Result<Self> {
        if !(slope.is_finite() && slope >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "slope must be nonnegative and finite, got {slope}"
            )));
        }
        if !(initial >= T::zero() && initial <= cap && cap <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= p0 <= p_cap <= 1, got p0 = {initial}, p_cap = {cap}"
            )));
        }
        Ok(SamplerSchedule {
            slope,
            initial,
            cap,
        })
    }
}

/// Probability of drawing the eyeglass variant at iteration `n`:
/// `min(slope * n + p0, p_cap)`. Nondecreasing in `n`.
pub fn glass_probability<T: Scalar>(sched: &SamplerSchedule<T>, n: u64) -> T {
    (sched.slope * T::from_u64(n).unwrap() + sched.initial).min(sched.cap)
}

/// Draw a batch from a mixture manifest at iteration `n`. The manifest must
/// be laid out as [`build_mixture_manifest`](crate::synth::build_mixture_manifest)
/// produces it: `2m` records where record `i` pairs with its synthesized G
/// counterpart at `m + i`. Each draw picks a slot uniformly, then takes the
/// G variant with probability `glass_probability(sched, n)` and the original
/// otherwise. Fully determined by `(seed, n)`.
pub fn sample_batch<T: Scalar>(
    manifest: &Manifest,
    sched: &SamplerSchedule<T>,
    n: u64,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<ManifestRecord>> {
    let records = manifest.records();
    if records.is_empty() || records.len() % 2 != 0 {
        return Err(Error::InconsistentManifest(format!(
            "mixture manifest must hold an even, positive number of records, got {}",
            records.len()
        )));
    }
    let m = records.len() / 2;
    for i in 0..m {
        let (orig, synth) = (&records[i], &records[m + i]);
        if orig.identity != synth.identity {
            return Err(Error::InconsistentManifest(format!(
                "record {i} (`{}`) has no counterpart with the same identity",
                orig.path
            )));
        }
        if synth.flag != GlassFlag::G {
            return Err(Error::InconsistentManifest(format!(
                "counterpart of record {i} (`{}`) is not flagged G",
                synth.path
            )));
        }
    }

    let p = glass_probability(sched, n).as_f64();
    let mut rng = seeded::stream_rng(seed, n);
    let mut batch = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let slot = seeded::uniform_index(&mut rng, m);
        let take_glass = seeded::unit_f64(&mut rng) < p;
        let record = if take_glass {
            &records[m + slot]
        } else {
            &records[slot]
        };
        batch.push(record.clone());
    }
    Ok(batch)
}
