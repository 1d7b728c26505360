//! Core 3D types shared by fitting and rendering: meshes with annotated
//! anchor vertices, Euler-angle rotations, similarity transforms, and
//! vertex-normal computation.
//!
//! Conventions, fixed once for the whole crate:
//! - Rotations compose as `R = Rz(roll) * Ry(yaw) * Rx(pitch)`.
//! - Angles are degrees at API boundaries, normalized to `(-180, 180]`;
//!   radians internally.
//! - The similarity transform maps `p` to `scale * R * (p + translation)`,
//!   i.e. translation is applied before rotation. [`RigidSimilarity`]
//!   provides conversion to and from the post-rotation convention.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Surface color plus Phong reflectance coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Material<T: Scalar> {
    /// Base RGB color, each channel in `[0, 1]`.
    pub color: [T; 3],
    /// Ambient reflectance multiplier.
    pub ambient: T,
    /// Diffuse reflectance multiplier.
    pub diffuse: T,
    /// Specular reflectance multiplier.
    pub specular: T,
}

impl<T: Scalar> Default for Material<T> {
    fn default() -> Self {
        Material {
            color: [T::one(), T::one(), T::one()],
            ambient: T::one(),
            diffuse: T::one(),
            specular: T::one(),
        }
    }
}

impl<T: Scalar> Material<T> {
    pub fn colored(r: f64, g: f64, b: f64) -> Self {
        Material {
            color: [T::of(r), T::of(g), T::of(b)],
            ..Material::default()
        }
    }
}

/// Triangle mesh with ordered anchor vertices.
///
/// Anchor order defines correspondence between meshes: anchor `i` of an
/// eyeglass mesh is fitted onto anchor `i` of a face mesh.
#[derive(Debug, Clone)]
pub struct Mesh<T: Scalar> {
    vertices: Vec<Point3<T>>,
    triangles: Vec<[usize; 3]>,
    anchor_indices: Vec<usize>,
    pub material: Material<T>,
}

impl<T: Scalar> Mesh<T> {
    pub fn new(
        vertices: Vec<Point3<T>>,
        triangles: Vec<[usize; 3]>,
        anchor_indices: Vec<usize>,
        material: Material<T>,
    ) -> Result<Self> {
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} references vertex out of range (vertex count {n})"
                )));
            }
        }
        if anchor_indices.is_empty() {
            return Err(Error::InvalidArgument(
                "mesh must declare at least one anchor vertex".into(),
            ));
        }
        for (k, &i) in anchor_indices.iter().enumerate() {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "anchor {k} references vertex {i} out of range (vertex count {n})"
                )));
            }
        }
        Ok(Mesh {
            vertices,
            triangles,
            anchor_indices,
            material,
        })
    }

    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn anchor_indices(&self) -> &[usize] {
        &self.anchor_indices
    }

    /// Anchor points in declaration order.
    pub fn anchor_points(&self) -> Vec<Point3<T>> {
        self.anchor_indices
            .iter()
            .map(|&i| self.vertices[i])
            .collect()
    }

    /// Centroid of the anchor points.
    pub fn anchor_centroid(&self) -> Point3<T> {
        let mut sum = Vector3::zeros();
        for &i in &self.anchor_indices {
            sum += self.vertices[i].coords;
        }
        Point3::from(sum / T::from_usize(self.anchor_indices.len()).unwrap())
    }

    /// Copy of the mesh with every vertex mapped through `sim`.
    pub fn transformed(&self, sim: &RigidSimilarity<T>) -> Mesh<T> {
        Mesh {
            vertices: self.vertices.iter().map(|p| sim.apply(p)).collect(),
            triangles: self.triangles.clone(),
            anchor_indices: self.anchor_indices.clone(),
            material: self.material.clone(),
        }
    }
}

/// Pitch, yaw, roll in degrees, each normalized to `(-180, 180]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles<T: Scalar> {
    pub pitch: T,
    pub yaw: T,
    pub roll: T,
}

fn normalize_degrees<T: Scalar>(angle: T) -> T {
    let full = T::of(360.0);
    let half = T::of(180.0);
    let mut a = angle % full;
    if a <= -half {
        a += full;
    } else if a > half {
        a -= full;
    }
    a
}

impl<T: Scalar> EulerAngles<T> {
    pub fn new(pitch: T, yaw: T, roll: T) -> Result<Self> {
        for (name, v) in [("pitch", pitch), ("yaw", yaw), ("roll", roll)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        Ok(EulerAngles {
            pitch: normalize_degrees(pitch),
            yaw: normalize_degrees(yaw),
            roll: normalize_degrees(roll),
        })
    }

    pub fn zero() -> Self {
        EulerAngles {
            pitch: T::zero(),
            yaw: T::zero(),
            roll: T::zero(),
        }
    }

    fn radians(&self) -> (T, T, T) {
        let k = T::pi() / T::of(180.0);
        (self.pitch * k, self.yaw * k, self.roll * k)
    }
}

pub(crate) fn rotation_x<T: Scalar>(rad: T) -> Matrix3<T> {
    let (s, c) = rad.sin_cos();
    Matrix3::new(
        T::one(),
        T::zero(),
        T::zero(),
        T::zero(),
        c,
        -s,
        T::zero(),
        s,
        c,
    )
}

pub(crate) fn rotation_y<T: Scalar>(rad: T) -> Matrix3<T> {
    let (s, c) = rad.sin_cos();
    Matrix3::new(
        c,
        T::zero(),
        s,
        T::zero(),
        T::one(),
        T::zero(),
        -s,
        T::zero(),
        c,
    )
}

pub(crate) fn rotation_z<T: Scalar>(rad: T) -> Matrix3<T> {
    let (s, c) = rad.sin_cos();
    Matrix3::new(
        c,
        -s,
        T::zero(),
        s,
        c,
        T::zero(),
        T::zero(),
        T::zero(),
        T::one(),
    )
}

/// Rotation matrix for the crate convention `Rz(roll) * Ry(yaw) * Rx(pitch)`.
pub fn rotation_from_euler<T: Scalar>(angles: &EulerAngles<T>) -> Matrix3<T> {
    let (pitch, yaw, roll) = angles.radians();
    rotation_z(roll) * rotation_y(yaw) * rotation_x(pitch)
}

/// Euler angles recovered from a rotation matrix, with an in-band flag for
/// the gimbal-locked case.
#[derive(Debug, Clone, Copy)]
pub struct EulerDecomposition<T: Scalar> {
    pub angles: EulerAngles<T>,
    /// True when |yaw| >= 89.9 deg; pitch and roll are then entangled and the
    /// canonical choice roll = 0 is reported.
    pub gimbal_lock: bool,
}

/// Inverse of [`rotation_from_euler`]. Expects an orthonormal matrix with
/// determinant 1; near gimbal lock (|yaw| >= 89.9 deg) the decomposition is
/// not unique and roll is pinned to zero.
pub fn euler_from_rotation<T: Scalar>(r: &Matrix3<T>) -> EulerDecomposition<T> {
    let deg = T::of(180.0) / T::pi();
    // r[(2,0)] = -sin(yaw)
    let sin_yaw = (-r[(2, 0)]).clamp(-T::one(), T::one());
    let lock_threshold = (T::of(89.9) * T::pi() / T::of(180.0)).sin();
    if sin_yaw.abs() >= lock_threshold {
        let yaw = sin_yaw.asin() * deg;
        // With cos(yaw) ~ 0 only pitch -/+ roll is observable; pick roll = 0.
        let pitch = if sin_yaw > T::zero() {
            r[(0, 1)].atan2(r[(1, 1)]) * deg
        } else {
            (-r[(0, 1)]).atan2(r[(1, 1)]) * deg
        };
        return EulerDecomposition {
            angles: EulerAngles {
                pitch: normalize_degrees(pitch),
                yaw: normalize_degrees(yaw),
                roll: T::zero(),
            },
            gimbal_lock: true,
        };
    }
    let yaw = sin_yaw.asin();
    let pitch = r[(2, 1)].atan2(r[(2, 2)]);
    let roll = r[(1, 0)].atan2(r[(0, 0)]);
    EulerDecomposition {
        angles: EulerAngles {
            pitch: normalize_degrees(pitch * deg),
            yaw: normalize_degrees(yaw * deg),
            roll: normalize_degrees(roll * deg),
        },
        gimbal_lock: false,
    }
}

/// Similarity transform `p -> scale * R * (p + translation)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidSimilarity<T: Scalar> {
    pub scale: T,
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

impl<T: Scalar> RigidSimilarity<T> {
    /// Validating constructor: `scale > 0`, `R` orthonormal with det 1
    /// (1e-9 per entry).
    pub fn new(scale: T, rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self> {
        if !(scale.is_finite() && scale > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "scale must be a positive finite number, got {scale}"
            )));
        }
        let tol = T::of(1e-9);
        let gram = rotation.transpose() * rotation;
        let eye = Matrix3::identity();
        for i in 0..3 {
            for j in 0..3 {
                if (gram[(i, j)] - eye[(i, j)]).abs() > tol {
                    return Err(Error::InvalidArgument(
                        "rotation matrix is not orthonormal within 1e-9".into(),
                    ));
                }
            }
        }
        if (rotation.determinant() - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(
                "rotation matrix determinant is not 1 within 1e-9".into(),
            ));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("translation must be finite".into()));
        }
        Ok(RigidSimilarity {
            scale,
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        RigidSimilarity {
            scale: T::one(),
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, p: &Point3<T>) -> Point3<T> {
        Point3::from((self.rotation * (p.coords + self.translation)) * self.scale)
    }

    /// The equivalent translation of the post-rotation convention
    /// `p -> scale * R * p + t_post`.
    pub fn post_translation(&self) -> Vector3<T> {
        self.rotation * self.translation * self.scale
    }

    /// Build from the post-rotation convention `p -> scale * R * p + t_post`.
    pub fn from_post_translation(
        scale: T,
        rotation: Matrix3<T>,
        t_post: Vector3<T>,
    ) -> Result<Self> {
        if !(scale.is_finite() && scale > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "scale must be a positive finite number, got {scale}"
            )));
        }
        let translation = rotation.transpose() * t_post / scale;
        RigidSimilarity::new(scale, rotation, translation)
    }
}

/// Apply `sim` to every point: `scale * R * (p + t)`.
pub fn transform_points<T: Scalar>(
    points: &[Point3<T>],
    sim: &RigidSimilarity<T>,
) -> Vec<Point3<T>> {
    points.iter().map(|p| sim.apply(p)).collect()
}

/// Area-weighted vertex normals, unit length. Zero-area triangles contribute
/// nothing; vertices with no (non-degenerate) incident triangle get the
/// documented default normal (0, 0, 1).
pub fn vertex_normals<T: Scalar>(mesh: &Mesh<T>) -> Result<Vec<Vector3<T>>> {
    let mut accum = vec![Vector3::zeros(); mesh.vertices().len()];
    let mut any_area = false;
    for tri in mesh.triangles() {
        let [a, b, c] = *tri;
        let e1 = mesh.vertices()[b] - mesh.vertices()[a];
        let e2 = mesh.vertices()[c] - mesh.vertices()[a];
        let cross = e1.cross(&e2); // magnitude = 2 * triangle area
        if cross.norm_squared() == T::zero() {
            continue;
        }
        any_area = true;
        for &v in tri {
            accum[v] += cross;
        }
    }
    if !any_area {
        return Err(Error::Degenerate(
            "mesh has no triangle with nonzero area".into(),
        ));
    }
    Ok(accum
        .into_iter()
        .map(|n| {
            let norm = n.norm();
            if norm > T::zero() {
                n / norm
            } else {
                Vector3::new(T::zero(), T::zero(), T::one())
            }
        })
        .collect())
}
