//! End-to-end eyeglass synthesis: randomized asset/pose/light sampling,
//! fit perturbation, alpha blending onto the source image, and the training
//! manifest bookkeeping.
//!
//! Determinism contract: every sampled quantity is a pure function of
//! `(master_seed, image_index)`, so batches can be synthesized with any
//! worker count (or re-run) and produce bit-identical outputs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{Error, Result};
use crate::fit::{fit_eyeglass, AnchorCorrespondence, Projection};
use crate::geometry::{rotation_x, Mesh, RigidSimilarity};
use crate::image::{Channels, RasterImage};
use crate::render::{render_layer, DirectionalLight, LightSetup};
use crate::scalar::Scalar;
use crate::seeded;

// --- manifests -------------------------------------------------------------

/// Eyeglass / non-eyeglass flag attached to every manifest record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlassFlag {
    G,
    NG,
}

impl GlassFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            GlassFlag::G => "G",
            GlassFlag::NG => "NG",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "G" => Some(GlassFlag::G),
            "NG" => Some(GlassFlag::NG),
            _ => None,
        }
    }
}

impl std::fmt::Display for GlassFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub path: String,
    pub identity: String,
    pub flag: GlassFlag,
}

/// Ordered list of labeled images with unique paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            if r.identity.is_empty() {
                return Err(Error::InconsistentManifest(format!(
                    "record `{}` has an empty identity label",
                    r.path
                )));
            }
            if !seen.insert(r.path.as_str()) {
                return Err(Error::DuplicatePath(r.path.clone()));
            }
        }
        Ok(Manifest { records })
    }

    pub fn records(&self) -> &[ManifestRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Concatenate originals with their synthesized eyeglass counterparts.
/// Synthesized records must pair 1:1 with originals (same identities, in
/// order) and carry the G flag; the result doubles every identity's count.
pub fn build_mixture_manifest(original: &Manifest, synthesized: &Manifest) -> Result<Manifest> {
    if original.len() != synthesized.len() {
        return Err(Error::InconsistentManifest(format!(
            "originals ({}) and synthesized ({}) are not 1:1",
            original.len(),
            synthesized.len()
        )));
    }
    for (o, s) in original.records().iter().zip(synthesized.records()) {
        if o.identity != s.identity {
            return Err(Error::InconsistentManifest(format!(
                "identity mismatch for `{}`: `{}` vs `{}`",
                o.path, o.identity, s.identity
            )));
        }
        if s.flag != GlassFlag::G {
            return Err(Error::InconsistentManifest(format!(
                "synthesized record `{}` is not flagged G",
                s.path
            )));
        }
    }
    let mut records = original.records().to_vec();
    records.extend_from_slice(synthesized.records());
    Manifest::new(records)
}

// --- configuration ---------------------------------------------------------

/// Randomization ranges and assets for the synthesis pipeline. Defaults
/// follow the published perturbation ranges (pitch [-1.5, 0.8] degrees,
/// vertical shift [1, 2] px); the light ranges are artifact choices and can
/// be overridden from the config file.
#[derive(Debug, Clone)]
pub struct SynthConfig<T: Scalar> {
    pub assets: Vec<Mesh<T>>,
    /// Pitch perturbation range in degrees.
    pub pitch_range: (T, T),
    /// Vertical translation range in pixels, downward positive.
    pub vshift_range: (T, T),
    pub ambient_range: (T, T),
    pub diffuse_range: (T, T),
    pub specular_range: (T, T),
    /// Max light-direction angle from the camera axis, degrees.
    pub light_cone_deg: T,
    pub shininess: T,
    pub antialias: bool,
    pub master_seed: u64,
}

impl<T: Scalar> SynthConfig<T> {
    pub fn with_default_ranges(assets: Vec<Mesh<T>>, master_seed: u64) -> Self {
        SynthConfig {
            assets,
            pitch_range: (T::of(-1.5), T::of(0.8)),
            vshift_range: (T::of(1.0), T::of(2.0)),
            ambient_range: (T::of(0.2), T::of(0.4)),
            diffuse_range: (T::of(0.4), T::of(0.8)),
            specular_range: (T::of(0.0), T::of(0.3)),
            light_cone_deg: T::of(30.0),
            shininess: T::of(16.0),
            antialias: false,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.assets.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one eyeglass asset is required".into(),
            ));
        }
        let ordered = |name: &str, (lo, hi): (T, T)| {
            if lo <= hi {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} range is not well-ordered: [{lo}, {hi}]"
                )))
            }
        };
        ordered("pitch", self.pitch_range)?;
        ordered("vshift", self.vshift_range)?;
        for (name, r) in [
            ("ambient", self.ambient_range),
            ("diffuse", self.diffuse_range),
            ("specular", self.specular_range),
        ] {
            ordered(name, r)?;
            if r.0 < T::zero() || r.1 > T::one() {
                return Err(Error::InvalidArgument(format!(
                    "{name} energies must lie in [0, 1]"
                )));
            }
        }
        if self.light_cone_deg < T::zero() || self.light_cone_deg > T::of(90.0) {
            return Err(Error::InvalidArgument(
                "light cone angle must lie in [0, 90] degrees".into(),
            ));
        }
        if !(self.shininess > T::zero()) {
            return Err(Error::InvalidArgument(
                "shininess must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Everything sampled for one image.
#[derive(Debug, Clone)]
pub struct SampledParams<T: Scalar> {
    pub asset_index: usize,
    pub pitch_delta: T,
    pub vshift: T,
    pub lights: LightSetup<T>,
}

/// Draw the per-image randomness. Sampling order is fixed (asset, pitch,
/// vshift, light direction, ambient, diffuse, specular) so the stream layout
/// never changes.
pub fn sample_randomness<T: Scalar>(config: &SynthConfig<T>, image_index: u64) -> SampledParams<T> {
    let mut rng = seeded::stream_rng(config.master_seed, image_index);
    let asset_index = seeded::uniform_index(&mut rng, config.assets.len());
    let pitch_delta = T::of(seeded::uniform_f64(
        &mut rng,
        config.pitch_range.0.as_f64(),
        config.pitch_range.1.as_f64(),
    ));
    let vshift = T::of(seeded::uniform_f64(
        &mut rng,
        config.vshift_range.0.as_f64(),
        config.vshift_range.1.as_f64(),
    ));
    // direction uniform over the spherical cap around the camera axis (-z)
    let cos_max = config.light_cone_deg.as_f64().to_radians().cos();
    let cos_t = 1.0 - seeded::unit_f64(&mut rng) * (1.0 - cos_max);
    let phi = seeded::unit_f64(&mut rng) * std::f64::consts::TAU;
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let direction = Vector3::new(
        T::of(sin_t * phi.cos()),
        T::of(sin_t * phi.sin()),
        T::of(-cos_t),
    );
    let ambient = T::of(seeded::uniform_f64(
        &mut rng,
        config.ambient_range.0.as_f64(),
        config.ambient_range.1.as_f64(),
    ));
    let diffuse = T::of(seeded::uniform_f64(
        &mut rng,
        config.diffuse_range.0.as_f64(),
        config.diffuse_range.1.as_f64(),
    ));
    let specular = T::of(seeded::uniform_f64(
        &mut rng,
        config.specular_range.0.as_f64(),
        config.specular_range.1.as_f64(),
    ));
    SampledParams {
        asset_index,
        pitch_delta,
        vshift,
        lights: LightSetup {
            ambient,
            lights: vec![DirectionalLight {
                direction: direction.normalize(),
                diffuse,
                specular,
            }],
            shininess: config.shininess,
        },
    }
}

/// Tilt the fitted transform by `pitch_delta` degrees about the x axis
/// through the placed anchor centroid and push it down by `vshift` pixels.
/// `glass_centroid` is the eyeglass anchor centroid in model space.
pub fn perturb_fit<T: Scalar>(
    sim: &RigidSimilarity<T>,
    pitch_delta_deg: T,
    vshift_px: T,
    glass_centroid: &Point3<T>,
) -> RigidSimilarity<T> {
    let delta_rad = pitch_delta_deg * T::pi() / T::of(180.0);
    let rx = rotation_x(delta_rad);
    let rotation = rx * sim.rotation;
    let placed_centroid = sim.apply(glass_centroid).coords;
    let shift = (Matrix3::identity() - rx) * placed_centroid
        + Vector3::new(T::zero(), vshift_px, T::zero());
    let translation = sim.translation + rotation.transpose() * shift / sim.scale;
    RigidSimilarity {
        scale: sim.scale,
        rotation,
        translation,
    }
}

/// Alpha-composite an RGBA layer over an RGB base image. Per channel:
/// `out = base + alpha/255 * (layer - base)`, rounded half away from zero;
/// alpha 255 copies the layer exactly and alpha 0 copies the base exactly.
pub fn blend(base: &RasterImage, layer: &RasterImage) -> Result<RasterImage> {
    if base.channels() != Channels::Rgb {
        return Err(Error::InvalidArgument("blend base must be RGB".into()));
    }
    if layer.channels() != Channels::Rgba {
        return Err(Error::InvalidArgument("blend layer must be RGBA".into()));
    }
    if base.width() != layer.width() || base.height() != layer.height() {
        return Err(Error::InvalidArgument(format!(
            "blend dimension mismatch: base {}x{}, layer {}x{}",
            base.width(),
            base.height(),
            layer.width(),
            layer.height()
        )));
    }
    let mut out = base.clone();
    for y in 0..base.height() {
        for x in 0..base.width() {
            let l = layer.pixel(x, y);
            let alpha = l[3];
            if alpha == 0 {
                continue;
            }
            let b = base.pixel(x, y);
            let mut px = [0u8; 3];
            let a = alpha as f64 / 255.0;
            for c in 0..3 {
                let v = b[c] as f64 + a * (l[c] as f64 - b[c] as f64);
                px[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            out.set_pixel(x, y, &px);
        }
    }
    Ok(out)
}

/// Full provenance for one synthesized image.
#[derive(Debug, Clone)]
pub struct SynthRecord<T: Scalar> {
    pub source: String,
    pub output: String,
    pub asset_index: usize,
    pub pitch_delta: T,
    pub vshift: T,
    pub lights: LightSetup<T>,
    pub fit_residual: T,
    pub seed: u64,
    pub empty_coverage: bool,
}

impl<T: Scalar> SynthRecord<T> {
    /// Tab-separated log line. Paths must not contain tabs.
    pub fn to_tsv_line(&self) -> String {
        let l = &self.lights.lights[0];
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.source,
            self.output,
            self.asset_index,
            self.pitch_delta,
            self.vshift,
            l.direction.x,
            l.direction.y,
            l.direction.z,
            self.lights.ambient,
            l.diffuse,
            l.specular,
            self.lights.shininess,
            self.fit_residual,
            self.seed,
            if self.empty_coverage { 1 } else { 0 },
        )
    }
}

/// Run the whole pipeline for one image: sample randomness, fit the chosen
/// asset onto the face anchors, perturb, render, blend. The record's path
/// fields are left empty; batch runners fill them in.
pub fn synthesize_one<T: Scalar>(
    base: &RasterImage,
    face: &Mesh<T>,
    config: &SynthConfig<T>,
    image_index: u64,
) -> Result<(RasterImage, SynthRecord<T>)> {
    let params = sample_randomness(config, image_index);
    let asset = &config.assets[params.asset_index];
    let corr = AnchorCorrespondence::from_meshes(asset, face)?;
    let fitted = fit_eyeglass(&corr, Projection::Full3D)?;
    let perturbed = perturb_fit(
        &fitted.sim,
        params.pitch_delta,
        params.vshift,
        &asset.anchor_centroid(),
    );
    let layer = render_layer(
        asset,
        &perturbed,
        &params.lights,
        base.width(),
        base.height(),
        config.antialias,
    )?;
    let out = blend(base, &layer.image)?;
    let record = SynthRecord {
        source: String::new(),
        output: String::new(),
        asset_index: params.asset_index,
        pitch_delta: params.pitch_delta,
        vshift: params.vshift,
        lights: params.lights,
        fit_residual: fitted.residual,
        seed: seeded::mix_seed(config.master_seed, image_index),
        empty_coverage: layer.empty_coverage,
    };
    Ok((out, record))
}

/// One batch entry: the already-loaded base image and face mesh plus the
/// paths recorded in the synthesis log.
#[derive(Debug, Clone)]
pub struct SynthJob<T: Scalar> {
    pub source_path: String,
    pub output_path: String,
    pub base: RasterImage,
    pub face: Mesh<T>,
}

/// Synthesize a batch across `workers` threads. Job index is the image
/// index, so results do not depend on scheduling or worker count.
pub fn synthesize_batch<T: Scalar + Send + Sync>(
    jobs: &[SynthJob<T>],
    config: &SynthConfig<T>,
    workers: usize,
) -> Result<Vec<(RasterImage, SynthRecord<T>)>> {
    config.validate()?;
    let workers = workers.max(1).min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<(RasterImage, SynthRecord<T>)>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let job = &jobs[i];
                let result = synthesize_one(&job.base, &job.face, config, i as u64).map(
                    |(image, mut record)| {
                        record.source = job.source_path.clone();
                        record.output = job.output_path.clone();
                        (image, record)
                    },
                );
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });

    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every job produced a result"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euler_from_rotation, rotation_from_euler, EulerAngles};

    fn record(path: &str, id: &str, flag: GlassFlag) -> ManifestRecord {
        ManifestRecord {
            path: path.into(),
            identity: id.into(),
            flag,
        }
    }

    fn collapsed_config(seed: u64) -> SynthConfig<f64> {
        let mut cfg = SynthConfig::with_default_ranges(crate::assets::default_assets(), seed);
        cfg.pitch_range = (0.0, 0.0);
        cfg.vshift_range = (1.0, 1.0);
        cfg.ambient_range = (0.3, 0.3);
        cfg.diffuse_range = (0.6, 0.6);
        cfg.specular_range = (0.1, 0.1);
        cfg.light_cone_deg = 0.0;
        cfg
    }

    #[test]
    fn collapsed_ranges_sample_deterministically() {
        let cfg = collapsed_config(5);
        let p = sample_randomness(&cfg, 3);
        assert_eq!(p.pitch_delta, 0.0);
        assert_eq!(p.vshift, 1.0);
        assert_eq!(p.lights.ambient, 0.3);
        let l = &p.lights.lights[0];
        assert_eq!(l.diffuse, 0.6);
        assert_eq!(l.specular, 0.1);
        assert!((l.direction - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn sampling_is_reproducible_and_in_range() {
        let cfg = SynthConfig::<f64>::with_default_ranges(crate::assets::default_assets(), 77);
        let mut pitch_sum = 0.0;
        for i in 0..10_000u64 {
            let a = sample_randomness(&cfg, i);
            let b = sample_randomness(&cfg, i);
            assert_eq!(a.pitch_delta, b.pitch_delta);
            assert_eq!(a.asset_index, b.asset_index);
            assert!(a.pitch_delta >= -1.5 && a.pitch_delta <= 0.8);
            assert!(a.vshift >= 1.0 && a.vshift <= 2.0);
            assert!(a.asset_index < cfg.assets.len());
            pitch_sum += a.pitch_delta;
        }
        // uniform moments: mean -0.35, sd = 2.3/sqrt(12); 3 standard errors
        let mean = pitch_sum / 10_000.0;
        let se = (2.3 / 12f64.sqrt()) / 10_000f64.sqrt();
        assert!(
            (mean - (-0.35)).abs() < 3.0 * se,
            "pitch mean {mean} too far from -0.35"
        );
    }

    #[test]
    fn zero_perturbation_keeps_sim() {
        let sim = RigidSimilarity::new(
            1.2,
            rotation_from_euler(&EulerAngles::new(3.0f64, -7.0, 11.0).unwrap()),
            Vector3::new(0.5, -0.25, 2.0),
        )
        .unwrap();
        let out = perturb_fit(&sim, 0.0, 0.0, &Point3::new(1.0, 2.0, 3.0));
        assert_eq!(out.scale, sim.scale);
        assert!((out.rotation - sim.rotation).abs().max() == 0.0);
        assert!((out.translation - sim.translation).norm() < 1e-15);
    }

    #[test]
    fn vshift_moves_placed_centroid_straight_down() {
        let sim = RigidSimilarity::new(
            0.8,
            rotation_from_euler(&EulerAngles::new(10.0f64, 5.0, -4.0).unwrap()),
            Vector3::new(1.0, 0.0, -1.0),
        )
        .unwrap();
        let centroid = Point3::new(0.3, 0.6, -0.2);
        let out = perturb_fit(&sim, 0.0, 2.0, &centroid);
        let before = sim.apply(&centroid);
        let after = out.apply(&centroid);
        let delta = after - before;
        assert!((delta - Vector3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pitch_perturbation_composes_about_centroid() {
        // pure-pitch base rotation: the recovered pitch shifts by exactly
        // the perturbation and the centroid stays put
        let sim = RigidSimilarity::new(
            1.1,
            rotation_from_euler(&EulerAngles::new(6.0f64, 0.0, 0.0).unwrap()),
            Vector3::new(0.2, -0.4, 0.9),
        )
        .unwrap();
        let centroid = Point3::new(0.5, 0.1, -0.3);
        let out = perturb_fit(&sim, 0.8, 0.0, &centroid);
        let dec = euler_from_rotation(&out.rotation);
        assert!((dec.angles.pitch - 6.8).abs() < 1e-6);
        let before = sim.apply(&centroid);
        let after = out.apply(&centroid);
        assert!((after - before).norm() < 1e-12);
    }

    #[test]
    fn blend_identities() {
        let mut base = RasterImage::new(2, 2, Channels::Rgb).unwrap();
        base.set_pixel(0, 0, &[10, 20, 30]);
        base.set_pixel(1, 1, &[200, 100, 50]);
        let empty = RasterImage::new(2, 2, Channels::Rgba).unwrap();
        assert_eq!(blend(&base, &empty).unwrap(), base);

        let mut opaque = RasterImage::new(2, 2, Channels::Rgba).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                opaque.set_pixel(x, y, &[9, 8, 7, 255]);
            }
        }
        let out = blend(&base, &opaque).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                assert_eq!(out.pixel(x, y), &[9, 8, 7]);
            }
        }
    }

    #[test]
    fn blend_half_alpha_rounds_half_away_from_zero() {
        let mut base = RasterImage::new(1, 1, Channels::Rgb).unwrap();
        base.set_pixel(0, 0, &[100, 100, 100]);
        let mut layer = RasterImage::new(1, 1, Channels::Rgba).unwrap();
        layer.set_pixel(0, 0, &[200, 200, 200, 128]);
        // 100 + 128/255*100 = 150.196 -> 150
        let out = blend(&base, &layer).unwrap();
        assert_eq!(out.pixel(0, 0), &[150, 150, 150]);
    }

    #[test]
    fn blend_rejects_dimension_mismatch() {
        let base = RasterImage::new(2, 2, Channels::Rgb).unwrap();
        let layer = RasterImage::new(3, 2, Channels::Rgba).unwrap();
        assert!(blend(&base, &layer).is_err());
    }

    #[test]
    fn mixture_doubles_each_identity() {
        let original = Manifest::new(vec![
            record("a/1.ppm", "a", GlassFlag::NG),
            record("a/2.ppm", "a", GlassFlag::NG),
            record("b/1.ppm", "b", GlassFlag::NG),
            record("b/2.ppm", "b", GlassFlag::G),
            record("c/1.ppm", "c", GlassFlag::NG),
            record("c/2.ppm", "c", GlassFlag::NG),
        ])
        .unwrap();
        let synthesized = Manifest::new(
            original
                .records()
                .iter()
                .map(|r| record(&format!("{}_g.ppm", r.path), &r.identity, GlassFlag::G))
                .collect(),
        )
        .unwrap();
        let mixture = build_mixture_manifest(&original, &synthesized).unwrap();
        assert_eq!(mixture.len(), 12);
        let g = mixture
            .records()
            .iter()
            .filter(|r| r.flag == GlassFlag::G)
            .count();
        assert_eq!(g, 7); // six synthesized + one original G
        // originals keep their flags and order
        assert_eq!(&mixture.records()[..6], original.records());
    }

    #[test]
    fn empty_synthesized_set_must_match_cardinality() {
        let original = Manifest::new(vec![record("x.ppm", "x", GlassFlag::NG)]).unwrap();
        let empty = Manifest::default();
        assert!(build_mixture_manifest(&original, &empty).is_err());
        let both_empty = build_mixture_manifest(&Manifest::default(), &empty).unwrap();
        assert!(both_empty.is_empty());
    }

    #[test]
    fn identity_mismatch_is_detected() {
        let original = Manifest::new(vec![record("x.ppm", "x", GlassFlag::NG)]).unwrap();
        let synthesized = Manifest::new(vec![record("y.ppm", "z", GlassFlag::G)]).unwrap();
        assert!(matches!(
            build_mixture_manifest(&original, &synthesized),
            Err(Error::InconsistentManifest(_))
        ));
    }

    #[test]
    fn training_set_scale_arithmetic() {
        // mixture size = 2x originals; at the published training-set scale
        // 5,001,877 originals make a 10,003,754-record mixture
        let originals: usize = 5_001_877;
        assert_eq!(originals.checked_mul(2), Some(10_003_754));
    }

    #[test]
    fn duplicate_paths_rejected() {
        assert!(matches!(
            Manifest::new(vec![
                record("p.ppm", "a", GlassFlag::NG),
                record("p.ppm", "b", GlassFlag::G),
            ]),
            Err(Error::DuplicatePath(_))
        ));
    }
}
