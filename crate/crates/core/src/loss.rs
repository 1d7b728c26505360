//! Mining-contrastive loss: cosine-similarity contrastive objective over
//! hard positive and hard negative pair sets, with analytic gradients and a
//! desk-scale linear-map trainer demonstrating the separation behavior.
//!
//! Loss form: `L = -1/(2|P|) sum_P d(f_i, f_j) + 1/(2|N|) sum_N d(f_i, f_j)`
//! with `d` the cosine similarity. Mining selects the fraction `rho_p` of
//! positive pairs with lowest similarity and the fraction `rho_n` of
//! negative pairs with highest similarity; ties break toward the
//! lexicographically smaller pair, which makes the loss exactly invariant
//! under batch permutation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Feature vector with its identity label and eyeglass flag.
#[derive(Debug, Clone)]
pub struct Embedding<T: Scalar> {
    vector: Vec<T>,
    pub label: String,
    pub glass: bool,
}

impl<T: Scalar> Embedding<T> {
    /// Components must be finite with norm > 1e-12.
    pub fn new(vector: Vec<T>, label: impl Into<String>, glass: bool) -> Result<Self> {
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "embedding components must be finite".into(),
            ));
        }
        let norm_sq = vector.iter().fold(T::zero(), |a, &v| a + v * v);
        if norm_sq.sqrt() <= T::of(1e-12) {
            return Err(Error::InvalidArgument(
                "embedding norm must exceed 1e-12".into(),
            ));
        }
        Ok(Embedding {
            vector,
            label: label.into(),
            glass,
        })
    }

    pub fn vector(&self) -> &[T] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Exact normalized dot product, in [-1, 1] up to rounding.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut dot = T::zero();
    let mut na = T::zero();
    let mut nb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let (na, nb) = (na.sqrt(), nb.sqrt());
    let floor = T::of(1e-12);
    if na <= floor || nb <= floor {
        return Err(Error::InvalidArgument(
            "cosine similarity of a (near-)zero vector".into(),
        ));
    }
    Ok(dot / (na * nb))
}

/// Hard positive and hard negative pair sets over a batch; indices are
/// `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSets {
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

fn ceil_fraction(rho: f64, count: usize) -> usize {
    ((rho * count as f64).ceil() as usize).min(count)
}

/// Select the hardest pairs: `ceil(rho_p * |positive pairs|)` positives with
/// lowest similarity, `ceil(rho_n * |negative pairs|)` negatives with
/// highest similarity.
pub fn mine_pairs<T: Scalar>(batch: &[Embedding<T>], rho_p: T, rho_n: T) -> Result<PairSets> {
    for (name, rho) in [("rho_p", rho_p), ("rho_n", rho_n)] {
        if !(rho > T::zero() && rho <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must lie in (0, 1], got {rho}"
            )));
        }
    }
    let mut pos: Vec<((usize, usize), T)> = Vec::new();
    let mut neg: Vec<((usize, usize), T)> = Vec::new();
    for i in 0..batch.len() {
        for j in (i + 1)..batch.len() {
            let d = cosine_similarity(batch[i].vector(), batch[j].vector())?;
            if batch[i].label == batch[j].label {
                pos.push(((i, j), d));
            } else {
                neg.push(((i, j), d));
            }
        }
    }
    if pos.is_empty() {
        return Err(Error::Mining(
            "batch holds no positive pair (need an identity with >= 2 samples)".into(),
        ));
    }
    if neg.is_empty() {
        return Err(Error::Mining(
            "batch holds no negative pair (need >= 2 identities)".into(),
        ));
    }
    // lowest similarity first for positives, ties toward the smaller pair
    pos.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    // highest similarity first for negatives, ties toward the smaller pair
    neg.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let kp = ceil_fraction(rho_p.as_f64(), pos.len());
    let kn = ceil_fraction(rho_n.as_f64(), neg.len());
    Ok(PairSets {
        positives: pos[..kp].iter().map(|(p, _)| *p).collect(),
        negatives: neg[..kn].iter().map(|(p, _)| *p).collect(),
    })
}

fn check_sets<T: Scalar>(batch: &[Embedding<T>], sets: &PairSets) -> Result<()> {
    if sets.positives.is_empty() || sets.negatives.is_empty() {
        return Err(Error::InvalidArgument(
            "pair sets must both be nonempty".into(),
        ));
    }
    for &(i, j) in sets.positives.iter().chain(&sets.negatives) {
        if i >= batch.len() || j >= batch.len() {
            return Err(Error::InvalidArgument(format!(
                "pair ({i}, {j}) is out of range for batch of {}",
                batch.len()
            )));
        }
    }
    Ok(())
}

/// The mining-contrastive objective over fixed pair sets. Bounded in
/// [-1, 1]; summation runs in the sets' stored order.
pub fn mining_contrastive_loss<T: Scalar>(batch: &[Embedding<T>], sets: &PairSets) -> Result<T> {
    check_sets(batch, sets)?;
    let mut pos_sum = T::zero();
    for &(i, j) in &sets.positives {
        pos_sum += cosine_similarity(batch[i].vector(), batch[j].vector())?;
    }
    let mut neg_sum = T::zero();
    for &(i, j) in &sets.negatives {
        neg_sum += cosine_similarity(batch[i].vector(), batch[j].vector())?;
    }
    let half = T::of(0.5);
    let np = T::from_usize(sets.positives.len()).unwrap();
    let nn = T::from_usize(sets.negatives.len()).unwrap();
    Ok(-half * pos_sum / np + half * neg_sum / nn)
}

/// Analytic gradient of the loss with respect to every embedding, treating
/// the mining selection as fixed. Uses
/// `dd/df_i = f_j / (|f_i||f_j|) - d * f_i / |f_i|^2`.
pub fn loss_gradient<T: Scalar>(batch: &[Embedding<T>], sets: &PairSets) -> Result<Vec<Vec<T>>> {
    check_sets(batch, sets)?;
    let dim = batch.first().map_or(0, |e| e.dim());
    let mut grads = vec![vec![T::zero(); dim]; batch.len()];
    let half = T::of(0.5);
    let np = T::from_usize(sets.positives.len()).unwrap();
    let nn = T::from_usize(sets.negatives.len()).unwrap();
    let mut accumulate = |pairs: &[(usize, usize)], coefficient: T| -> Result<()> {
        for &(i, j) in pairs {
            let (fi, fj) = (batch[i].vector(), batch[j].vector());
            let d = cosine_similarity(fi, fj)?;
            let ni = fi.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
            let nj = fj.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
            let cross = T::one() / (ni * nj);
            for k in 0..dim {
                grads[i][k] += coefficient * (fj[k] * cross - d * fi[k] / (ni * ni));
                grads[j][k] += coefficient * (fi[k] * cross - d * fj[k] / (nj * nj));
            }
        }
        Ok(())
    };
    accumulate(&sets.positives, -half / np)?;
    accumulate(&sets.negatives, half / nn)?;
    Ok(grads)
}

/// Mean positive-pair similarity minus mean negative-pair similarity over
/// all pairs (not just the mined ones).
pub fn separation<T: Scalar>(batch: &[Embedding<T>]) -> Result<T> {
    let mut pos = (T::zero(), 0usize);
    let mut neg = (T::zero(), 0usize);
    for i in 0..batch.len() {
        for j in (i + 1)..batch.len() {
            let d = cosine_similarity(batch[i].vector(), batch[j].vector())?;
            if batch[i].label == batch[j].label {
                pos = (pos.0 + d, pos.1 + 1);
            } else {
                neg = (neg.0 + d, neg.1 + 1);
            }
        }
    }
    if pos.1 == 0 || neg.1 == 0 {
        return Err(Error::Mining("separation needs both pair kinds".into()));
    }
    Ok(pos.0 / T::from_usize(pos.1).unwrap() - neg.0 / T::from_usize(neg.1).unwrap())
}

/// Loss and separation recorded after each training step.
#[derive(Debug, Clone, Copy)]
pub struct TrainStep<T: Scalar> {
    pub loss: T,
    pub separation: T,
}

/// Result of [`toy_train`]: the learned linear map and the per-step history.
#[derive(Debug, Clone)]
pub struct ToyTrainResult<T: Scalar> {
    pub weights: DMatrix<T>,
    pub history: Vec<TrainStep<T>>,
}

/// Desk-scale demonstration: gradient descent on a linear embedding map
/// `f = W x` under the mining-contrastive loss. Re-mines every step;
/// history records loss and separation. Errors out if the loss goes
/// non-finite.
pub fn toy_train<T: Scalar>(
    points: &[Embedding<T>],
    steps: usize,
    learning_rate: T,
    rho_p: T,
    rho_n: T,
) -> Result<ToyTrainResult<T>> {
    let dim = match points.first() {
        Some(e) => e.dim(),
        None => {
            return Err(Error::InvalidArgument(
                "toy_train needs a nonempty point set".into(),
            ))
        }
    };
    if points.iter().any(|e| e.dim() != dim) {
        return Err(Error::InvalidArgument(
            "all points must share one dimension".into(),
        ));
    }

    let mut weights: DMatrix<T> = DMatrix::identity(dim, dim);
    let mut history = Vec::with_capacity(steps);
    for step in 0..steps {
        let mapped: Vec<Embedding<T>> = points
            .iter()
            .map(|p| {
                let f: Vec<T> = (0..dim)
                    .map(|r| {
                        (0..dim).fold(T::zero(), |a, c| a + weights[(r, c)] * p.vector()[c])
                    })
                    .collect();
                Embedding::new(f, p.label.clone(), p.glass)
                    .map_err(|_| Error::TrainingDiverged { step })
            })
            .collect::<Result<_>>()?;
        let sets = mine_pairs(&mapped, rho_p, rho_n)?;
        let loss = mining_contrastive_loss(&mapped, &sets)?;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { step });
        }
        history.push(TrainStep {
            loss,
            separation: separation(&mapped)?,
        });
        let grads = loss_gradient(&mapped, &sets)?;
        // dL/dW = sum_k g_k x_k^T
        for (g, p) in grads.iter().zip(points) {
            for r in 0..dim {
                if g[r] == T::zero() {
                    continue;
                }
                for c in 0..dim {
                    weights[(r, c)] -= learning_rate * g[r] * p.vector()[c];
                }
            }
        }
    }
    Ok(ToyTrainResult { weights, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded;

    fn emb(v: &[f64], label: &str) -> Embedding<f64> {
        Embedding::new(v.to_vec(), label, false).unwrap()
    }

    #[test]
    fn cosine_of_self_is_one() {
        let v = vec![0.3f64, -1.2, 4.5];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_vectors_score_zero() {
        assert_eq!(
            cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn cosine_matches_hand_arithmetic() {
        // dot = -12, norms sqrt(14) and sqrt(77)
        let d = cosine_similarity(&[1.0, 2.0, 3.0], &[-4.0, 5.0, -6.0]).unwrap();
        let expect = -12.0 / (14.0f64 * 77.0).sqrt();
        assert!((d - expect).abs() < 1e-15);
        assert!((d - (-0.3655)).abs() < 1e-3);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(Embedding::new(vec![0.0, 0.0], "x", false).is_err());
    }

    #[test]
    fn full_fractions_take_every_pair() {
        let batch = vec![
            emb(&[1.0, 0.0], "a"),
            emb(&[0.9, 0.1], "a"),
            emb(&[0.0, 1.0], "b"),
            emb(&[-0.1, 0.9], "b"),
        ];
        let sets = mine_pairs(&batch, 1.0, 1.0).unwrap();
        assert_eq!(sets.positives.len(), 2);
        assert_eq!(sets.negatives.len(), 4);
    }

    #[test]
    fn mining_matches_brute_force_on_small_batch() {
        let batch = vec![
            emb(&[1.0, 0.0], "a"),
            emb(&[0.0, 1.0], "a"),
            emb(&[1.0, 1.0], "b"),
            emb(&[1.0, -1.0], "b"),
        ];
        // positive pairs: (0,1) sim 0, (2,3) sim 0; tie -> (0,1) selected
        let sets = mine_pairs(&batch, 0.5, 0.25).unwrap();
        assert_eq!(sets.positives, vec![(0, 1)]);
        // negative sims: (0,2)=.707 (0,3)=.707 (1,2)=.707 (1,3)=-.707
        // hardest negative (highest sim) with tie-break -> (0,2)
        assert_eq!(sets.negatives, vec![(0, 2)]);
    }

    #[test]
    fn perfectly_hard_positive_is_always_selected() {
        let batch = vec![
            emb(&[1.0, 0.0], "a"),
            emb(&[-1.0, 0.0], "a"), // similarity -1 with its twin
            emb(&[1.0, 0.1], "a"),
            emb(&[0.0, 1.0], "b"),
        ];
        let sets = mine_pairs(&batch, 0.34, 1.0).unwrap();
        assert!(sets.positives.contains(&(0, 1)));
    }

    #[test]
    fn trivial_losses_are_exact_halves() {
        let batch = vec![
            emb(&[1.0, 0.0], "a"),
            emb(&[1.0, 0.0], "a"),
            emb(&[0.0, 1.0], "b"),
        ];
        let sets = PairSets {
            positives: vec![(0, 1)],
            negatives: vec![(0, 2)],
        };
        assert_eq!(mining_contrastive_loss(&batch, &sets).unwrap(), -0.5);

        let batch2 = vec![
            emb(&[1.0, 0.0], "a"),
            emb(&[0.0, 1.0], "a"),
            emb(&[1.0, 0.0], "b"),
        ];
        let sets2 = PairSets {
            positives: vec![(0, 1)],
            negatives: vec![(0, 2)],
        };
        assert_eq!(mining_contrastive_loss(&batch2, &sets2).unwrap(), 0.5);
    }

    #[test]
    fn loss_matches_direct_resummation() {
        let mut rng = seeded::stream_rng(55, 0);
        for _ in 0..20 {
            let batch: Vec<Embedding<f64>> = (0..8)
                .map(|i| {
                    let v: Vec<f64> = (0..5).map(|_| seeded::normal_f64(&mut rng)).collect();
                    Embedding::new(v, if i % 2 == 0 { "a" } else { "b" }, false).unwrap()
                })
                .collect();
            let sets = mine_pairs(&batch, 0.5, 0.5).unwrap();
            let loss = mining_contrastive_loss(&batch, &sets).unwrap();
            // independent re-summation straight from the formula
            let mut p = 0.0;
            for &(i, j) in &sets.positives {
                p += cosine_similarity(batch[i].vector(), batch[j].vector()).unwrap();
            }
            let mut n = 0.0;
            for &(i, j) in &sets.negatives {
                n += cosine_similarity(batch[i].vector(), batch[j].vector()).unwrap();
            }
            let expect = -p / (2.0 * sets.positives.len() as f64)
                + n / (2.0 * sets.negatives.len() as f64);
            assert!((loss - expect).abs() < 1e-12);
            assert!((-1.0..=1.0).contains(&loss));
        }
    }

    #[test]
    fn loss_is_permutation_invariant() {
        let mut rng = seeded::stream_rng(56, 1);
        let batch: Vec<Embedding<f64>> = (0..10)
            .map(|i| {
                let v: Vec<f64> = (0..4).map(|_| seeded::normal_f64(&mut rng)).collect();
                Embedding::new(v, format!("id{}", i % 3), false).unwrap()
            })
            .collect();
        let loss = |b: &[Embedding<f64>]| {
            let sets = mine_pairs(b, 0.4, 0.4).unwrap();
            mining_contrastive_loss(b, &sets).unwrap()
        };
        let base = loss(&batch);
        let mut permuted = batch.clone();
        permuted.rotate_left(3);
        permuted.swap(0, 5);
        assert_eq!(loss(&permuted), base);
    }

    #[test]
    fn loss_is_scale_invariant() {
        let mut batch = vec![
            emb(&[1.0, 2.0, -0.5], "a"),
            emb(&[0.8, 1.9, -0.4], "a"),
            emb(&[-1.0, 0.3, 2.0], "b"),
            emb(&[-0.9, 0.5, 1.7], "b"),
        ];
        let sets = mine_pairs(&batch, 0.5, 0.5).unwrap();
        let before = mining_contrastive_loss(&batch, &sets).unwrap();
        let scaled: Vec<f64> = batch[1].vector().iter().map(|v| v * 37.5).collect();
        batch[1] = Embedding::new(scaled, "a", false).unwrap();
        let after = mining_contrastive_loss(&batch, &sets).unwrap();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_self_pair_is_zero() {
        // d(v, v) is at its maximum, so the gradient must vanish
        let batch = vec![
            emb(&[0.6, -0.8, 0.2], "a"),
            emb(&[0.6, -0.8, 0.2], "a"),
            emb(&[1.0, 1.0, 1.0], "b"),
        ];
        let sets = PairSets {
            positives: vec![(0, 1)],
            negatives: vec![(0, 2)],
        };
        let grads = loss_gradient(&batch, &sets).unwrap();
        // embedding 1 only appears in the (0,1) pair; its gradient is zero
        for g in &grads[1] {
            assert!(g.abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seeded::stream_rng(57, 2);
        for _ in 0..10 {
            let batch: Vec<Embedding<f64>> = (0..6)
                .map(|i| {
                    let v: Vec<f64> =
                        (0..4).map(|_| seeded::normal_f64(&mut rng) + 0.1).collect();
                    Embedding::new(v, format!("id{}", i % 2), false).unwrap()
                })
                .collect();
            let sets = mine_pairs(&batch, 0.6, 0.6).unwrap();
            let grads = loss_gradient(&batch, &sets).unwrap();
            let h = 1e-5;
            for (k, e) in batch.iter().enumerate() {
                for c in 0..e.dim() {
                    let mut plus = batch.clone();
                    let mut minus = batch.clone();
                    let mut vp = e.vector().to_vec();
                    let mut vm = e.vector().to_vec();
                    vp[c] += h;
                    vm[c] -= h;
                    plus[k] = Embedding::new(vp, e.label.clone(), e.glass).unwrap();
                    minus[k] = Embedding::new(vm, e.label.clone(), e.glass).unwrap();
                    let lp = mining_contrastive_loss(&plus, &sets).unwrap();
                    let lm = mining_contrastive_loss(&minus, &sets).unwrap();
                    let fd = (lp - lm) / (2.0 * h);
                    let denom = fd.abs().max(grads[k][c].abs()).max(1e-8);
                    assert!(
                        ((grads[k][c] - fd) / denom).abs() < 1e-5,
                        "grad[{k}][{c}] analytic {} vs fd {}",
                        grads[k][c],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_scales_inversely_with_embedding_scale() {
        let batch = vec![
            emb(&[1.0, 0.4, -0.2], "a"),
            emb(&[0.9, 0.5, -0.1], "a"),
            emb(&[-0.5, 1.0, 0.8], "b"),
        ];
        let sets = PairSets {
            positives: vec![(0, 1)],
            negatives: vec![(1, 2)],
        };
        let g1 = loss_gradient(&batch, &sets).unwrap();
        let c = 4.0;
        let mut scaled = batch.clone();
        scaled[1] = Embedding::new(
            batch[1].vector().iter().map(|v| v * c).collect(),
            "a",
            false,
        )
        .unwrap();
        let g2 = loss_gradient(&scaled, &sets).unwrap();
        let l1 = mining_contrastive_loss(&batch, &sets).unwrap();
        let l2 = mining_contrastive_loss(&scaled, &sets).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1[1].iter().zip(&g2[1]) {
            assert!((a / c - b).abs() < 1e-12);
        }
    }

    #[test]
    fn separated_clusters_stay_separated() {
        // antipodal clusters sit at the loss optimum; training must not
        // collapse them
        let batch = vec![
            emb(&[1.0, 0.0, 0.0, 0.01], "a"),
            emb(&[1.0, 0.0, 0.0, -0.01], "a"),
            emb(&[-1.0, 0.0, 0.01, 0.0], "b"),
            emb(&[-1.0, 0.0, -0.01, 0.0], "b"),
        ];
        let result = toy_train(&batch, 50, 0.05, 1.0, 1.0).unwrap();
        let first = result.history.first().unwrap();
        let last = result.history.last().unwrap();
        assert!(first.loss < -0.95, "start {}", first.loss);
        assert!(last.loss < -0.95, "collapsed from {} to {}", first.loss, last.loss);
    }

    #[test]
    fn zero_learning_rate_freezes_history() {
        let batch = vec![
            emb(&[1.0, 0.2], "a"),
            emb(&[0.9, 0.3], "a"),
            emb(&[-0.2, 1.0], "b"),
            emb(&[-0.3, 0.9], "b"),
        ];
        let result = toy_train(&batch, 20, 0.0, 0.5, 0.5).unwrap();
        let first = result.history.first().unwrap();
        for step in &result.history {
            assert_eq!(step.loss, first.loss);
            assert_eq!(step.separation, first.separation);
        }
    }

    #[test]
    fn overlapping_clusters_improve() {
        let mut rng = seeded::stream_rng(500, 0);
        let dim = 8;
        let mut points = Vec::new();
        for (label, center_axis) in [("a", 0usize), ("b", 1usize)] {
            for _ in 0..20 {
                let mut v: Vec<f64> = (0..dim).map(|_| 0.6 * seeded::normal_f64(&mut rng)).collect();
                v[center_axis] += 1.0;
                points.push(Embedding::new(v, label, false).unwrap());
            }
        }
        let result = toy_train(&points, 500, 0.1, 0.5, 0.5).unwrap();
        let first = result.history.first().unwrap().separation;
        let last = result.history.last().unwrap().separation;
        assert!(
            last > first,
            "separation did not improve: {first} -> {last}"
        );
    }
}
