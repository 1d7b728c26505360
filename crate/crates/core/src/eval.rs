//! Verification and identification protocols over labeled embeddings:
//! gallery/probe construction (protocols I-IV), cosine score matrices,
//! TPR@FAR operating points, Rank-1 accuracy, and ROC export.
//!
//! Protocol compositions, per identity:
//! - I:   gallery 2 NG, probe 2 NG
//! - II:  gallery 2 G,  probe 2 G
//! - III: gallery 2 NG, probe 2 G
//! - IV:  gallery 2 NG + 2 G, probe 2 NG + 2 G
//!
//! A test set holding exactly 2 G + 2 NG images per identity can only
//! realize protocols I, II and IV by letting gallery and probe share images,
//! so `SplitMode::SharedImages` is the default; same-image pairs are then
//! excluded from scoring. `SplitMode::Disjoint` draws disjoint sides instead
//! and needs twice the images per identity.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::loss::cosine_similarity;
use crate::scalar::Scalar;
use crate::seeded;
use crate::synth::{GlassFlag, Manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolId {
    I,
    II,
    III,
    IV,
}

impl ProtocolId {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "I" | "i" | "1" => Some(ProtocolId::I),
            "II" | "ii" | "2" => Some(ProtocolId::II),
            "III" | "iii" | "3" => Some(ProtocolId::III),
            "IV" | "iv" | "4" => Some(ProtocolId::IV),
            _ => None,
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolId::I => "I",
            ProtocolId::II => "II",
            ProtocolId::III => "III",
            ProtocolId::IV => "IV",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Gallery and probe share the selected images; same-image pairs are
    /// excluded from scoring. Matches a 2 G + 2 NG per-identity test set.
    SharedImages,
    /// Gallery and probe draw disjoint images.
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub id: ProtocolId,
    pub mode: SplitMode,
}

impl ProtocolSpec {
    pub fn new(id: ProtocolId) -> Self {
        ProtocolSpec {
            id,
            mode: SplitMode::SharedImages,
        }
    }

    /// Required (NG, G) image counts per identity.
    fn required(&self) -> (usize, usize) {
        let double = match self.mode {
            SplitMode::SharedImages => 1,
            SplitMode::Disjoint => 2,
        };
        match self.id {
            ProtocolId::I => (2 * double, 0),
            ProtocolId::II => (0, 2 * double),
            // III draws different flags on the two sides; never shared
            ProtocolId::III => (2, 2),
            ProtocolId::IV => (2 * double, 2 * double),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitEntry {
    pub image: String,
    pub identity: String,
}

/// Gallery and probe lists plus the identities that lacked the required
/// image counts (excluded and reported, never fatal).
#[derive(Debug, Clone)]
pub struct EvalSplit {
    pub gallery: Vec<SplitEntry>,
    pub probe: Vec<SplitEntry>,
    pub eligible_identities: usize,
    pub excluded_identities: Vec<String>,
}

/// Deterministic seeded gallery/probe construction. Identities iterate in
/// sorted order; per-identity image picks come from a per-identity stream of
/// `seed`, so the result depends only on (manifest, protocol, seed).
pub fn build_split(manifest: &Manifest, spec: &ProtocolSpec, seed: u64) -> Result<EvalSplit> {
    let mut by_identity: BTreeMap<&str, (Vec<&str>, Vec<&str>)> = BTreeMap::new();
    for r in manifest.records() {
        let entry = by_identity.entry(r.identity.as_str()).or_default();
        match r.flag {
            GlassFlag::NG => entry.0.push(r.path.as_str()),
            GlassFlag::G => entry.1.push(r.path.as_str()),
        }
    }

    let (need_ng, need_g) = spec.required();
    let mut gallery = Vec::new();
    let mut probe = Vec::new();
    let mut excluded = Vec::new();
    let mut eligible = 0usize;

    for (ident_idx, (identity, (ng, g))) in by_identity.iter().enumerate() {
        if ng.len() < need_ng || g.len() < need_g {
            excluded.push(identity.to_string());
            continue;
        }
        eligible += 1;
        let mut rng = seeded::stream_rng(seed, ident_idx as u64);
        let mut ng = ng.clone();
        let mut g = g.clone();
        seeded::shuffle(&mut rng, &mut ng);
        seeded::shuffle(&mut rng, &mut g);
        let entry = |path: &&str| SplitEntry {
            image: (*path).to_string(),
            identity: identity.to_string(),
        };
        match (spec.id, spec.mode) {
            (ProtocolId::I, SplitMode::SharedImages) => {
                gallery.extend(ng[..2].iter().map(entry));
                probe.extend(ng[..2].iter().map(entry));
            }
            (ProtocolId::I, SplitMode::Disjoint) => {
                gallery.extend(ng[..2].iter().map(entry));
                probe.extend(ng[2..4].iter().map(entry));
            }
            (ProtocolId::II, SplitMode::SharedImages) => {
                gallery.extend(g[..2].iter().map(entry));
                probe.extend(g[..2].iter().map(entry));
            }
            (ProtocolId::II, SplitMode::Disjoint) => {
                gallery.extend(g[..2].iter().map(entry));
                probe.extend(g[2..4].iter().map(entry));
            }
            (ProtocolId::III, _) => {
                gallery.extend(ng[..2].iter().map(entry));
                probe.extend(g[..2].iter().map(entry));
            }
            (ProtocolId::IV, SplitMode::SharedImages) => {
                gallery.extend(ng[..2].iter().map(entry));
                gallery.extend(g[..2].iter().map(entry));
                probe.extend(ng[..2].iter().map(entry));
                probe.extend(g[..2].iter().map(entry));
            }
            (ProtocolId::IV, SplitMode::Disjoint) => {
                gallery.extend(ng[..2].iter().map(entry));
                gallery.extend(g[..2].iter().map(entry));
                probe.extend(ng[2..4].iter().map(entry));
                probe.extend(g[2..4].iter().map(entry));
            }
        }
    }

    if eligible == 0 {
        return Err(Error::EmptyProtocol(format!(
            "no identity satisfies protocol {} ({} NG + {} G required)",
            spec.id, need_ng, need_g
        )));
    }
    Ok(EvalSplit {
        gallery,
        probe,
        eligible_identities: eligible,
        excluded_identities: excluded,
    })
}

/// Embeddings keyed by image path.
#[derive(Debug, Clone)]
pub struct EmbeddingIndex<T: Scalar> {
    dim: usize,
    by_path: HashMap<String, usize>,
    vectors: Vec<Vec<T>>,
}

impl<T: Scalar> EmbeddingIndex<T> {
    pub fn new(entries: Vec<(String, Vec<T>)>) -> Result<Self> {
        let dim = entries.first().map_or(0, |(_, v)| v.len());
        let mut by_path = HashMap::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len());
        for (path, v) in entries {
            if v.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "embedding for `{path}` has dimension {} but expected {dim}",
                    v.len()
                )));
            }
            if by_path.insert(path.clone(), vectors.len()).is_some() {
                return Err(Error::DuplicatePath(path));
            }
            vectors.push(v);
        }
        Ok(EmbeddingIndex {
            dim,
            by_path,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, path: &str) -> Result<&[T]> {
        self.by_path
            .get(path)
            .map(|&i| self.vectors[i].as_slice())
            .ok_or_else(|| Error::MissingEmbedding(path.to_string()))
    }
}

/// Dense probe x gallery score matrix.
#[derive(Debug, Clone)]
pub struct ScoreMatrix<T: Scalar> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> ScoreMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        ScoreMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, probe: usize, gallery: usize) -> T {
        self.data[probe * self.cols + gallery]
    }
}

/// Cosine similarity of every probe against every gallery entry.
pub fn score_matrix<T: Scalar>(
    gallery: &[SplitEntry],
    probe: &[SplitEntry],
    embeddings: &EmbeddingIndex<T>,
) -> Result<ScoreMatrix<T>> {
    let gallery_vecs: Vec<&[T]> = gallery
        .iter()
        .map(|e| embeddings.get(&e.image))
        .collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(probe.len() * gallery.len());
    for p in probe {
        let pv = embeddings.get(&p.image)?;
        for gv in &gallery_vecs {
            data.push(cosine_similarity(pv, gv)?);
        }
    }
    Ok(ScoreMatrix {
        rows: probe.len(),
        cols: gallery.len(),
        data,
    })
}

/// Split the score matrix into genuine (same identity) and impostor
/// (different identity) scores, skipping same-image pairs.
pub fn genuine_impostor_scores<T: Scalar>(
    matrix: &ScoreMatrix<T>,
    gallery: &[SplitEntry],
    probe: &[SplitEntry],
) -> (Vec<T>, Vec<T>) {
    let mut genuine = Vec::new();
    let mut impostor = Vec::new();
    for (i, p) in probe.iter().enumerate() {
        for (j, g) in gallery.iter().enumerate() {
            if p.image == g.image {
                continue;
            }
            if p.identity == g.identity {
                genuine.push(matrix.get(i, j));
            } else {
                impostor.push(matrix.get(i, j));
            }
        }
    }
    (genuine, impostor)
}

/// One TPR@FAR operating point.
#[derive(Debug, Clone, Copy)]
pub struct RatePoint<T: Scalar> {
    pub far_target: T,
    /// Fraction of genuine scores accepted at the chosen threshold.
    pub tpr: T,
    /// Achieved false accept rate at the threshold.
    pub far_achieved: T,
    pub threshold: T,
    /// No observed score satisfied the target; acceptance is `score >
    /// threshold` (just above the max impostor score).
    pub above_max_threshold: bool,
    /// Fewer impostor scores than `1 / far_target`.
    pub insufficient_data: bool,
}

fn sorted_desc<T: Scalar>(scores: &[T]) -> Vec<T> {
    let mut v = scores.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Scores >= t in a descending-sorted list.
fn count_ge<T: Scalar>(sorted_desc: &[T], t: T) -> usize {
    sorted_desc.partition_point(|&s| s >= t)
}

/// Scores > t in a descending-sorted list.
fn count_gt<T: Scalar>(sorted_desc: &[T], t: T) -> usize {
    sorted_desc.partition_point(|&s| s > t)
}

/// TPR at each FAR target. The threshold is the smallest observed score `t`
/// (over genuine and impostor scores) with `#{impostor >= t}/|impostor| <=
/// far_target`; acceptance is `score >= t`. When even the maximum impostor
/// score violates the target the operating point moves just above it
/// (acceptance `score > max`) and is flagged.
pub fn verification_rates<T: Scalar>(
    genuine: &[T],
    impostor: &[T],
    far_targets: &[T],
) -> Result<Vec<RatePoint<T>>> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::InvalidArgument(
            "verification needs nonempty genuine and impostor score lists".into(),
        ));
    }
    for &t in far_targets {
        if !(t > T::zero() && t < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "FAR target must lie in (0, 1), got {t}"
            )));
        }
    }
    let gen_desc = sorted_desc(genuine);
    let imp_desc = sorted_desc(impostor);
    let mut candidates: Vec<T> = genuine.iter().chain(impostor).copied().collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    let m = impostor.len() as f64;
    let n = genuine.len() as f64;
    let mut out = Vec::with_capacity(far_targets.len());
    for &target in far_targets {
        let far_ok =
            |count: usize| -> bool { count as f64 / m <= target.as_f64() };
        let chosen = candidates
            .iter()
            .find(|&&t| far_ok(count_ge(&imp_desc, t)))
            .copied();
        let point = match chosen {
            Some(t) => {
                let accepted_imp = count_ge(&imp_desc, t);
                let accepted_gen = count_ge(&gen_desc, t);
                RatePoint {
                    far_target: target,
                    tpr: T::of(accepted_gen as f64 / n),
                    far_achieved: T::of(accepted_imp as f64 / m),
                    threshold: t,
                    above_max_threshold: false,
                    insufficient_data: m < 1.0 / target.as_f64(),
                }
            }
            None => {
                let max_imp = imp_desc[0];
                let accepted_gen = count_gt(&gen_desc, max_imp);
                RatePoint {
                    far_target: target,
                    tpr: T::of(accepted_gen as f64 / n),
                    far_achieved: T::zero(),
                    threshold: max_imp,
                    above_max_threshold: true,
                    insufficient_data: m < 1.0 / target.as_f64(),
                }
            }
        };
        out.push(point);
    }
    Ok(out)
}

/// Rank-1 identification accuracy: fraction of probes whose best-scoring
/// gallery entry (same-image pairs excluded, ties to the lower gallery
/// index) shares their identity.
pub fn rank1<T: Scalar>(
    matrix: &ScoreMatrix<T>,
    gallery: &[SplitEntry],
    probe: &[SplitEntry],
) -> T {
    let mut hits = 0usize;
    let mut total = 0usize;
    for (i, p) in probe.iter().enumerate() {
        let mut best: Option<(usize, T)> = None;
        for (j, g) in gallery.iter().enumerate() {
            if p.image == g.image {
                continue;
            }
            let s = matrix.get(i, j);
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((j, s));
            }
        }
        if let Some((j, _)) = best {
            total += 1;
            if gallery[j].identity == p.identity {
                hits += 1;
            }
        }
    }
    if total == 0 {
        T::zero()
    } else {
        T::of(hits as f64 / total as f64)
    }
}

/// ROC points (FAR, TPR) sorted by FAR ascending: the just-above-max
/// operating point first, one point per distinct impostor threshold, and
/// the accept-everything endpoint (1, 1).
pub fn roc_points<T: Scalar>(genuine: &[T], impostor: &[T]) -> Vec<(T, T)> {
    let gen_desc = sorted_desc(genuine);
    let imp_desc = sorted_desc(impostor);
    let n = genuine.len() as f64;
    let m = impostor.len() as f64;
    let mut points = Vec::with_capacity(imp_desc.len() + 2);
    points.push((
        T::zero(),
        T::of(count_gt(&gen_desc, imp_desc[0]) as f64 / n),
    ));
    let mut prev: Option<T> = None;
    for &t in &imp_desc {
        if prev == Some(t) {
            continue;
        }
        prev = Some(t);
        points.push((
            T::of(count_ge(&imp_desc, t) as f64 / m),
            T::of(count_ge(&gen_desc, t) as f64 / n),
        ));
    }
    points.push((T::one(), T::one()));
    points
}

/// Write the ROC as `far,tpr` lines.
pub fn roc_export<T: Scalar>(genuine: &[T], impostor: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (far, tpr) in roc_points(genuine, impostor) {
        out.push_str(&format!("{far},{tpr}\n"));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Full evaluation of one protocol.
#[derive(Debug, Clone)]
pub struct EvalReport<T: Scalar> {
    pub protocol: ProtocolSpec,
    pub eligible_identities: usize,
    pub excluded_identities: Vec<String>,
    pub gallery_size: usize,
    pub probe_size: usize,
    pub genuine_count: usize,
    pub impostor_count: usize,
    pub rates: Vec<RatePoint<T>>,
    pub rank1: T,
    pub roc: Vec<(T, T)>,
}

impl<T: Scalar> EvalReport<T> {
    /// Fixed-order key/value lines for printing and machine parsing.
    pub fn lines(&self) -> Vec<(String, String)> {
        let mut lines = vec![
            ("protocol".into(), self.protocol.id.to_string()),
            (
                "mode".into(),
                match self.protocol.mode {
                    SplitMode::SharedImages => "shared".into(),
                    SplitMode::Disjoint => "disjoint".into(),
                },
            ),
            (
                "eligible_identities".into(),
                self.eligible_identities.to_string(),
            ),
            (
                "excluded_identities".into(),
                self.excluded_identities.len().to_string(),
            ),
            ("gallery_size".into(), self.gallery_size.to_string()),
            ("probe_size".into(), self.probe_size.to_string()),
            ("genuine_scores".into(), self.genuine_count.to_string()),
            ("impostor_scores".into(), self.impostor_count.to_string()),
        ];
        for rate in &self.rates {
            let label = format!("tpr_at_far_{:e}", rate.far_target.as_f64());
            let mut value = format!("{}", rate.tpr);
            if rate.above_max_threshold {
                value.push_str(" (threshold above max impostor score)");
            }
            if rate.insufficient_data {
                value.push_str(" (insufficient impostor scores for target)");
            }
            lines.push((label, value));
        }
        lines.push(("rank1".into(), format!("{}", self.rank1)));
        lines.push(("roc_points".into(), self.roc.len().to_string()));
        lines
    }
}

impl<T: Scalar> fmt::Display for EvalReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.lines() {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

/// Build the split, score it, and assemble the report.
pub fn evaluate<T: Scalar>(
    manifest: &Manifest,
    embeddings: &EmbeddingIndex<T>,
    spec: &ProtocolSpec,
    seed: u64,
    far_targets: &[T],
) -> Result<EvalReport<T>> {
    let split = build_split(manifest, spec, seed)?;
    let matrix = score_matrix(&split.gallery, &split.probe, embeddings)?;
    let (genuine, impostor) = genuine_impostor_scores(&matrix, &split.gallery, &split.probe);
    let rates = verification_rates(&genuine, &impostor, far_targets)?;
    let r1 = rank1(&matrix, &split.gallery, &split.probe);
    let roc = roc_points(&genuine, &impostor);
    Ok(EvalReport {
        protocol: *spec,
        eligible_identities: split.eligible_identities,
        excluded_identities: split.excluded_identities,
        gallery_size: split.gallery.len(),
        probe_size: split.probe.len(),
        genuine_count: genuine.len(),
        impostor_count: impostor.len(),
        rates,
        rank1: r1,
        roc,
    })
}
