//! Eyeglass placement: solve for the similarity transform that moves the
//! eyeglass anchor points onto the face-model anchor points.
//!
//! The objective is `sum_i || f * Pr * R * (g_i + t) - Pr' * p_i ||^2` over
//! scale `f`, rotation `R` and pre-rotation translation `t`. In `Full3D`
//! mode (the default; the face mesh already carries depth) the minimizer is
//! closed-form: centered cross-covariance SVD with a reflection guard. In
//! `Orthographic2D` mode only image-plane coordinates are compared; the
//! solver seeds from a 2D closed-form alignment and refines all seven
//! parameters with Gauss-Newton steps.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Point3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{rotation_x, rotation_y, rotation_z, Mesh, RigidSimilarity};
use crate::scalar::Scalar;

/// Projection applied to both sides of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Identity projection; 3D anchor distances are minimized.
    Full3D,
    /// Row-drop projection `[[1,0,0],[0,1,0]]`; image-plane distances are
    /// minimized and residuals are in pixels.
    Orthographic2D,
}

impl Projection {
    /// Rows of the projection matrix, exactly as applied.
    pub fn matrix_rows<T: Scalar>(&self) -> Vec<[T; 3]> {
        let (o, i) = (T::zero(), T::one());
        match self {
            Projection::Full3D => vec![[i, o, o], [o, i, o], [o, o, i]],
            Projection::Orthographic2D => vec![[i, o, o], [o, i, o]],
        }
    }

    fn min_anchor_count(&self) -> usize {
        match self {
            Projection::Full3D => 3,
            Projection::Orthographic2D => 4,
        }
    }
}

/// Paired anchor points: eyeglass-side and face-side, in matching order.
#[derive(Debug, Clone)]
pub struct AnchorCorrespondence<T: Scalar> {
    glass: Vec<Point3<T>>,
    face: Vec<Point3<T>>,
}

fn collinear<T: Scalar>(points: &[Point3<T>]) -> bool {
    let mut max_dist_sq = T::zero();
    let mut max_cross_sq = T::zero();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = points[j] - points[i];
            max_dist_sq = max_dist_sq.max(d.norm_squared());
            for k in (j + 1)..points.len() {
                let e = points[k] - points[i];
                max_cross_sq = max_cross_sq.max(d.cross(&e).norm_squared());
            }
        }
    }
    // relative test: cross products scale with distance^2
    max_cross_sq <= max_dist_sq * max_dist_sq * T::of(1e-20)
}

impl<T: Scalar> AnchorCorrespondence<T> {
    pub fn new(glass: Vec<Point3<T>>, face: Vec<Point3<T>>) -> Result<Self> {
        if glass.len() != face.len() {
            return Err(Error::InvalidArgument(format!(
                "anchor count mismatch: {} eyeglass vs {} face",
                glass.len(),
                face.len()
            )));
        }
        if glass.len() < 3 {
            return Err(Error::Degenerate(format!(
                "need at least 3 anchor pairs, got {}",
                glass.len()
            )));
        }
        if collinear(&glass) {
            return Err(Error::Degenerate(
                "eyeglass anchors are collinear".into(),
            ));
        }
        Ok(AnchorCorrespondence { glass, face })
    }

    /// Pair the anchors of two meshes in declaration order.
    pub fn from_meshes(glass: &Mesh<T>, face: &Mesh<T>) -> Result<Self> {
        AnchorCorrespondence::new(glass.anchor_points(), face.anchor_points())
    }

    pub fn glass_anchors(&self) -> &[Point3<T>] {
        &self.glass
    }

    pub fn face_anchors(&self) -> &[Point3<T>] {
        &self.face
    }

    pub fn len(&self) -> usize {
        self.glass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glass.is_empty()
    }
}

/// Solved transform plus the root-mean-square anchor distance under it
/// (model units in `Full3D`, pixels in `Orthographic2D`).
#[derive(Debug, Clone)]
pub struct FitResult<T: Scalar> {
    pub sim: RigidSimilarity<T>,
    pub residual: T,
    /// False when orthographic refinement still moved more than 1e-8 per
    /// step after the iteration cap.
    pub converged: bool,
}

impl<T: Scalar> FitResult<T> {
    /// Plain-text key-value record: f, alpha, beta, gamma, tx, ty, tz,
    /// residual (angles in degrees).
    pub fn to_record(&self) -> String {
        let dec = crate::geometry::euler_from_rotation(&self.sim.rotation);
        let t = self.sim.translation;
        format!(
            "f: {}\nalpha: {}\nbeta: {}\ngamma: {}\ntx: {}\nty: {}\ntz: {}\nresidual: {}\nconverged: {}\n",
            self.sim.scale,
            dec.angles.pitch,
            dec.angles.yaw,
            dec.angles.roll,
            t.x,
            t.y,
            t.z,
            self.residual,
            self.converged,
        )
    }
}

/// RMS anchor distance under a given transform.
pub fn fit_residual<T: Scalar>(
    corr: &AnchorCorrespondence<T>,
    proj: Projection,
    sim: &RigidSimilarity<T>,
) -> T {
    let n = T::from_usize(corr.len()).unwrap();
    let mut acc = T::zero();
    for (g, p) in corr.glass.iter().zip(&corr.face) {
        let mapped = sim.apply(g);
        let d = mapped - p;
        acc += match proj {
            Projection::Full3D => d.norm_squared(),
            Projection::Orthographic2D => d.x * d.x + d.y * d.y,
        };
    }
    (acc / n).sqrt()
}

/// Solve the anchor-alignment problem for the given projection mode.
pub fn fit_eyeglass<T: Scalar>(
    corr: &AnchorCorrespondence<T>,
    proj: Projection,
) -> Result<FitResult<T>> {
    if corr.len() < proj.min_anchor_count() {
        return Err(Error::Degenerate(format!(
            "{:?} mode needs at least {} anchor pairs, got {}",
            proj,
            proj.min_anchor_count(),
            corr.len()
        )));
    }
    match proj {
        Projection::Full3D => {
            let (scale, rotation, t_post) = umeyama3(&corr.glass, &corr.face)?;
            let sim = RigidSimilarity::from_post_translation(scale, rotation, t_post)?;
            let residual = fit_residual(corr, proj, &sim);
            Ok(FitResult {
                sim,
                residual,
                converged: true,
            })
        }
        Projection::Orthographic2D => fit_orthographic(corr),
    }
}

/// Closed-form similarity alignment `y ~ s R x + t` in 3D with the
/// reflection guard on the smallest singular direction.
fn umeyama3<T: Scalar>(x: &[Point3<T>], y: &[Point3<T>]) -> Result<(T, Matrix3<T>, Vector3<T>)> {
    let n = T::from_usize(x.len()).unwrap();
    let mean_x = x.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;
    let mean_y = y.iter().fold(Vector3::zeros(), |a, p| a + p.coords) / n;

    let mut cov = Matrix3::zeros();
    let mut var_x = T::zero();
    for (px, py) in x.iter().zip(y) {
        let cx = px.coords - mean_x;
        let cy = py.coords - mean_y;
        cov += cy * cx.transpose();
        var_x += cx.norm_squared();
    }
    cov /= n;
    var_x /= n;

    if var_x <= T::zero() {
        return Err(Error::Degenerate(
            "eyeglass anchors are coincident".into(),
        ));
    }

    let svd = cov.svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v");
    let d = svd.singular_values;

    let mut signs = Vector3::from_element(T::one());
    if (u.determinant() * v_t.determinant()) < T::zero() {
        // Reflection guard: flip the smallest singular direction so the
        // eyeglasses are never mirror-imaged.
        let mut min_i = 0;
        for i in 1..3 {
            if d[i] < d[min_i] {
                min_i = i;
            }
        }
        signs[min_i] = -T::one();
    }

    let rotation = u * Matrix3::from_diagonal(&signs) * v_t;
    let scale = (d[0] * signs[0] + d[1] * signs[1] + d[2] * signs[2]) / var_x;
    if !(scale.is_finite() && scale > T::zero()) {
        return Err(Error::Degenerate(
            "alignment collapses to non-positive scale".into(),
        ));
    }
    let t_post = mean_y - rotation * mean_x * scale;
    Ok((scale, rotation, t_post))
}

/// 2D variant of the closed-form alignment, used to seed the orthographic
/// refinement. Returns (scale, in-plane angle in radians, translation).
fn umeyama2<T: Scalar>(x: &[Vector2<T>], y: &[Vector2<T>]) -> Result<(T, T, Vector2<T>)> {
    let n = T::from_usize(x.len()).unwrap();
    let mean_x = x.iter().fold(Vector2::zeros(), |a, p| a + p) / n;
    let mean_y = y.iter().fold(Vector2::zeros(), |a, p| a + p) / n;

    let mut cov = Matrix2::zeros();
    let mut var_x = T::zero();
    for (px, py) in x.iter().zip(y) {
        let cx = px - mean_x;
        let cy = py - mean_y;
        cov += cy * cx.transpose();
        var_x += cx.norm_squared();
    }
    cov /= n;
    var_x /= n;
    if var_x <= T::zero() {
        return Err(Error::Degenerate(
            "projected eyeglass anchors are coincident".into(),
        ));
    }

    let svd = cov.svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v");
    let d = svd.singular_values;
    let mut signs = Vector2::from_element(T::one());
    if (u.determinant() * v_t.determinant()) < T::zero() {
        let min_i = if d[0] < d[1] { 0 } else { 1 };
        signs[min_i] = -T::one();
    }
    let rot = u * Matrix2::from_diagonal(&signs) * v_t;
    let scale = (d[0] * signs[0] + d[1] * signs[1]) / var_x;
    if !(scale.is_finite() && scale > T::zero()) {
        return Err(Error::Degenerate(
            "projected alignment collapses to non-positive scale".into(),
        ));
    }
    let t = mean_y - rot * mean_x * scale;
    let angle = rot[(1, 0)].atan2(rot[(0, 0)]);
    Ok((scale, angle, t))
}

const GN_MAX_ITERS: usize = 50;

/// Orthographic fit: 2D closed-form seed, then Gauss-Newton over
/// (f, pitch, yaw, roll, tx, ty, tz) on image-plane residuals. The depth
/// component of the translation is unobservable; the pseudo-inverse step
/// keeps it at the minimum-norm solution.
fn fit_orthographic<T: Scalar>(corr: &AnchorCorrespondence<T>) -> Result<FitResult<T>> {
    let xs: Vec<Vector2<T>> = corr.glass.iter().map(|p| Vector2::new(p.x, p.y)).collect();
    let ys: Vec<Vector2<T>> = corr.face.iter().map(|p| Vector2::new(p.x, p.y)).collect();
    let (scale0, roll0, t2d) = umeyama2(&xs, &ys)?;

    // theta = [f, pitch, yaw, roll, tx, ty, tz], angles in radians
    let rot0 = rotation_z(roll0);
    let t0 = rot0.transpose() * Vector3::new(t2d.x, t2d.y, T::zero()) / scale0;
    let mut theta = [
        scale0,
        T::zero(),
        T::zero(),
        roll0,
        t0.x,
        t0.y,
        t0.z,
    ];

    let objective = |th: &[T; 7]| -> T {
        let sim = sim_from_params(th);
        fit_residual(corr, Projection::Orthographic2D, &sim)
    };

    let mut rms = objective(&theta);
    let step_tol = T::of(1e-8);
    let mut converged = false;
    for _ in 0..GN_MAX_ITERS {
        let (jac, res) = ortho_jacobian(corr, &theta);
        let svd = jac.svd(true, true);
        let delta = match svd.solve(&(-res), T::of(1e-12)) {
            Ok(d) => d,
            Err(_) => break,
        };
        let mut step: Vec<T> = delta.iter().copied().collect();
        let mut accepted = false;
        for _ in 0..20 {
            let mut cand = theta;
            for (c, s) in cand.iter_mut().zip(&step) {
                *c += *s;
            }
            if cand[0] > T::zero() {
                let cand_rms = objective(&cand);
                if cand_rms <= rms {
                    theta = cand;
                    rms = cand_rms;
                    accepted = true;
                    break;
                }
            }
            for s in step.iter_mut() {
                *s *= T::of(0.5);
            }
        }
        let step_norm = step.iter().fold(T::zero(), |a, s| a + *s * *s).sqrt();
        if !accepted || step_norm <= step_tol {
            converged = true;
            break;
        }
    }

    let sim = sim_from_params(&theta);
    let sim = RigidSimilarity::new(sim.scale, sim.rotation, sim.translation)?;
    let residual = fit_residual(corr, Projection::Orthographic2D, &sim);
    Ok(FitResult {
        sim,
        residual,
        converged,
    })
}

fn sim_from_params<T: Scalar>(theta: &[T; 7]) -> RigidSimilarity<T> {
    let rotation = rotation_z(theta[3]) * rotation_y(theta[2]) * rotation_x(theta[1]);
    RigidSimilarity {
        scale: theta[0],
        rotation,
        translation: Vector3::new(theta[4], theta[5], theta[6]),
    }
}

/// Image-plane residual vector (2 rows per anchor) and its Jacobian with
/// respect to the seven parameters.
fn ortho_jacobian<T: Scalar>(
    corr: &AnchorCorrespondence<T>,
    theta: &[T; 7],
) -> (DMatrix<T>, DVector<T>) {
    let n = corr.len();
    let f = theta[0];
    let (sa, ca) = theta[1].sin_cos();
    let (sb, cb) = theta[2].sin_cos();
    let (sg, cg) = theta[3].sin_cos();
    let rx = rotation_x(theta[1]);
    let ry = rotation_y(theta[2]);
    let rz = rotation_z(theta[3]);
    let o = T::zero();
    let drx = Matrix3::new(o, o, o, o, -sa, -ca, o, ca, -sa);
    let dry = Matrix3::new(-sb, o, cb, o, o, o, -cb, o, -sb);
    let drz = Matrix3::new(-sg, -cg, o, cg, -sg, o, o, o, o);
    let r = rz * ry * rx;
    let d_pitch = rz * ry * drx;
    let d_yaw = rz * dry * rx;
    let d_roll = drz * ry * rx;
    let t = Vector3::new(theta[4], theta[5], theta[6]);

    let mut jac = DMatrix::zeros(2 * n, 7);
    let mut res = DVector::zeros(2 * n);
    for (i, (g, p)) in corr.glass.iter().zip(&corr.face).enumerate() {
        let q = g.coords + t;
        let rq = r * q;
        let e = rq * f - p.coords;
        res[2 * i] = e.x;
        res[2 * i + 1] = e.y;
        let cols = [
            rq,                // d/df
            d_pitch * q * f,   // d/dpitch
            d_yaw * q * f,     // d/dyaw
            d_roll * q * f,    // d/droll
            r.column(0) * f,   // d/dtx
            r.column(1) * f,   // d/dty
            r.column(2) * f,   // d/dtz
        ];
        for (j, c) in cols.iter().enumerate() {
            jac[(2 * i, j)] = c.x;
            jac[(2 * i + 1, j)] = c.y;
        }
    }
    (jac, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rotation_from_euler, transform_points, EulerAngles};
    use crate::seeded;

    fn sample_cloud(rng: &mut impl rand_core::Rng, n: usize) -> Vec<Point3<f64>> {
        (0..n)
            .map(|_| {
                Point3::new(
                    seeded::normal_f64(rng),
                    seeded::normal_f64(rng),
                    seeded::normal_f64(rng),
                )
            })
            .collect()
    }

    #[test]
    fn identity_fit_on_identical_anchors() {
        let pts = vec![
            Point3::new(0.0f64, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let corr = AnchorCorrespondence::new(pts.clone(), pts).unwrap();
        let fit = fit_eyeglass(&corr, Projection::Full3D).unwrap();
        assert!((fit.sim.scale - 1.0).abs() < 1e-12);
        assert!((fit.sim.rotation - Matrix3::identity()).norm() < 1e-12);
        assert!(fit.sim.translation.norm() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn recovers_known_similarity() {
        let mut rng = seeded::stream_rng(42, 0);
        let glass = sample_cloud(&mut rng, 5);
        let truth = RigidSimilarity::new(
            1.3,
            rotation_from_euler(&EulerAngles::new(5.0f64, -10.0, 2.0).unwrap()),
            Vector3::new(0.1, 0.2, -0.3),
        )
        .unwrap();
        let face = transform_points(&glass, &truth);
        let corr = AnchorCorrespondence::new(glass, face).unwrap();
        let fit = fit_eyeglass(&corr, Projection::Full3D).unwrap();
        assert!((fit.sim.scale - truth.scale).abs() < 1e-9);
        assert!((fit.sim.rotation - truth.rotation).abs().max() < 1e-9);
        assert!((fit.sim.translation - truth.translation).norm() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn residual_is_zero_under_identity_on_identical_anchors() {
        let pts = vec![
            Point3::new(0.0f64, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 2.0, 0.5),
        ];
        let corr = AnchorCorrespondence::new(pts.clone(), pts).unwrap();
        let r = fit_residual(&corr, Projection::Full3D, &RigidSimilarity::identity());
        assert_eq!(r, 0.0);
    }

    #[test]
    fn pure_translation_error_gives_its_norm() {
        let pts = vec![
            Point3::new(0.0f64, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 2.0, 0.5),
        ];
        let corr = AnchorCorrespondence::new(pts.clone(), pts).unwrap();
        let delta = Vector3::new(0.3, -0.4, 1.2);
        let sim = RigidSimilarity::new(1.0, Matrix3::identity(), delta).unwrap();
        let r = fit_residual(&corr, Projection::Full3D, &sim);
        assert!((r - delta.norm()).abs() < 1e-12);
    }

    #[test]
    fn fitted_residual_beats_random_perturbations() {
        let mut rng = seeded::stream_rng(7, 1);
        let glass = sample_cloud(&mut rng, 6);
        let truth = RigidSimilarity::new(
            0.9,
            rotation_from_euler(&EulerAngles::new(8.0f64, 3.0, -12.0).unwrap()),
            Vector3::new(-0.5, 0.2, 0.7),
        )
        .unwrap();
        let mut face = transform_points(&glass, &truth);
        for p in face.iter_mut() {
            p.x += 0.01 * seeded::normal_f64(&mut rng);
            p.y += 0.01 * seeded::normal_f64(&mut rng);
            p.z += 0.01 * seeded::normal_f64(&mut rng);
        }
        let corr = AnchorCorrespondence::new(glass, face).unwrap();
        let fit = fit_eyeglass(&corr, Projection::Full3D).unwrap();
        for _ in 0..1000 {
            let jitter = EulerAngles::new(
                seeded::uniform_f64(&mut rng, -2.0, 2.0),
                seeded::uniform_f64(&mut rng, -2.0, 2.0),
                seeded::uniform_f64(&mut rng, -2.0, 2.0),
            )
            .unwrap();
            let perturbed = RigidSimilarity::new(
                fit.sim.scale * (1.0 + seeded::uniform_f64(&mut rng, -0.05, 0.05)),
                rotation_from_euler(&jitter) * fit.sim.rotation,
                fit.sim.translation
                    + Vector3::new(
                        seeded::uniform_f64(&mut rng, -0.05, 0.05),
                        seeded::uniform_f64(&mut rng, -0.05, 0.05),
                        seeded::uniform_f64(&mut rng, -0.05, 0.05),
                    ),
            )
            .unwrap();
            let r = fit_residual(&corr, Projection::Full3D, &perturbed);
            assert!(fit.residual <= r + 1e-15);
        }
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = seeded::stream_rng(13, 4);
        let glass = sample_cloud(&mut rng, 5);
        let truth = RigidSimilarity::new(
            1.1,
            rotation_from_euler(&EulerAngles::new(4.0f64, 9.0, -3.0).unwrap()),
            Vector3::new(0.4, -0.1, 0.6),
        )
        .unwrap();
        let mut face = transform_points(&glass, &truth);
        for p in face.iter_mut() {
            p.x += 0.02 * seeded::normal_f64(&mut rng);
            p.y += 0.02 * seeded::normal_f64(&mut rng);
            p.z += 0.02 * seeded::normal_f64(&mut rng);
        }
        let corr = AnchorCorrespondence::new(glass.clone(), face.clone()).unwrap();
        let fit = fit_eyeglass(&corr, Projection::Full3D).unwrap();

        let c = 3.7;
        let scale_pts = |pts: &[Point3<f64>]| -> Vec<Point3<f64>> {
            pts.iter().map(|p| Point3::from(p.coords * c)).collect()
        };
        let corr_c =
            AnchorCorrespondence::new(scale_pts(&glass), scale_pts(&face)).unwrap();
        let fit_c = fit_eyeglass(&corr_c, Projection::Full3D).unwrap();
        assert!((fit_c.residual - c * fit.residual).abs() < 1e-9);
        assert!((fit_c.sim.rotation - fit.sim.rotation).abs().max() < 1e-9);
    }

    #[test]
    fn orthographic_agrees_with_full3d_on_fronto_parallel_plane() {
        let mut rng = seeded::stream_rng(21, 9);
        // anchors in a z = const plane, transformed by an in-plane similarity
        let glass: Vec<Point3<f64>> = (0..6)
            .map(|_| {
                Point3::new(
                    seeded::normal_f64(&mut rng),
                    seeded::normal_f64(&mut rng),
                    0.25,
                )
            })
            .collect();
        let truth = RigidSimilarity::new(
            1.4,
            rotation_from_euler(&EulerAngles::new(0.0f64, 0.0, 23.0).unwrap()),
            Vector3::new(0.7, -0.4, 0.0),
        )
        .unwrap();
        let face = transform_points(&glass, &truth);
        let corr = AnchorCorrespondence::new(glass, face).unwrap();
        let full = fit_eyeglass(&corr, Projection::Full3D).unwrap();
        let ortho = fit_eyeglass(&corr, Projection::Orthographic2D).unwrap();
        assert!(ortho.converged);
        assert!((full.sim.scale - ortho.sim.scale).abs() < 1e-6);
        assert!((full.sim.rotation - ortho.sim.rotation).abs().max() < 1e-6);
        assert!(ortho.residual < 1e-6);
    }

    #[test]
    fn orthographic_requires_four_anchors() {
        let pts = vec![
            Point3::new(0.0f64, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let corr = AnchorCorrespondence::new(pts.clone(), pts).unwrap();
        assert!(matches!(
            fit_eyeglass(&corr, Projection::Orthographic2D),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn collinear_anchors_are_rejected() {
        let pts = vec![
            Point3::new(0.0f64, 0.0, 0.0),
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(2.0, 2.0, 2.0),
            Point3::new(3.0, 3.0, 3.0),
        ];
        assert!(matches!(
            AnchorCorrespondence::new(pts.clone(), pts),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn projection_matrices_are_exact() {
        let full = Projection::Full3D.matrix_rows::<f64>();
        assert_eq!(full, vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let ortho = Projection::Orthographic2D.matrix_rows::<f64>();
        assert_eq!(ortho, vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
    }

    #[test]
    fn record_lists_all_fields() {
        let fit = FitResult {
            sim: RigidSimilarity::<f64>::identity(),
            residual: 0.0,
            converged: true,
        };
        let rec = fit.to_record();
        for key in ["f:", "alpha:", "beta:", "gamma:", "tx:", "ty:", "tz:", "residual:"] {
            assert!(rec.contains(key), "missing {key} in {rec}");
        }
    }
}
