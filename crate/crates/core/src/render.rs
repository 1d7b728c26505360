//! Software rasterization with depth testing and Phong illumination.
//!
//! Camera model is orthographic: mesh vertices arrive in camera space with
//! x, y in pixel coordinates and z as depth (smaller = nearer). Pixel-center
//! sampling with the top-left fill rule keeps shared triangle edges from
//! double-covering; back-face culling is on by default. The output of a
//! render is bit-deterministic for identical inputs.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{vertex_normals, Material, Mesh, RigidSimilarity};
use crate::image::{quantize_unit, Channels, RasterImage};
use crate::scalar::Scalar;

/// One directional light. `direction` points from the surface toward the
/// light and must be unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalLight<T: Scalar> {
    pub direction: Vector3<T>,
    pub diffuse: T,
    pub specular: T,
}

/// Ambient energy plus directional lights plus the shared shininess
/// exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct LightSetup<T: Scalar> {
    pub ambient: T,
    pub lights: Vec<DirectionalLight<T>>,
    pub shininess: T,
}

impl<T: Scalar> LightSetup<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, e: T| {
            if e >= T::zero() && e <= T::one() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} energy must lie in [0, 1], got {e}"
                )))
            }
        };
        unit("ambient", self.ambient)?;
        for (i, l) in self.lights.iter().enumerate() {
            unit("diffuse", l.diffuse)?;
            unit("specular", l.specular)?;
            if (l.direction.norm() - T::one()).abs() > T::of(1e-9) {
                return Err(Error::InvalidArgument(format!(
                    "light {i} direction is not unit length"
                )));
            }
        }
        if !(self.shininess > T::zero()) {
            return Err(Error::InvalidArgument(
                "shininess exponent must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Head-on white light, useful for fixtures.
    pub fn head_on(ambient: f64, diffuse: f64, specular: f64, shininess: f64) -> Self {
        LightSetup {
            ambient: T::of(ambient),
            lights: vec![DirectionalLight {
                direction: Vector3::new(T::zero(), T::zero(), -T::one()),
                diffuse: T::of(diffuse),
                specular: T::of(specular),
            }],
            shininess: T::of(shininess),
        }
    }
}

/// Per-pixel result of rasterization: nearest depth, interpolated unit
/// normal, and a coverage flag. Uncovered pixels keep the +inf depth
/// sentinel.
#[derive(Debug, Clone)]
pub struct FragmentBuffer<T: Scalar> {
    width: usize,
    height: usize,
    pub depth: Vec<T>,
    pub normal: Vec<Vector3<T>>,
    pub covered: Vec<bool>,
}

impl<T: Scalar> FragmentBuffer<T> {
    fn new(width: usize, height: usize) -> Self {
        FragmentBuffer {
            width,
            height,
            depth: vec![T::INF; width * height],
            normal: vec![Vector3::zeros(); width * height],
            covered: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coverage_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }
}

/// Boolean coverage mask with image dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    /// Mask grown by one pixel in the 8-neighborhood.
    pub fn dilated(&self) -> Mask {
        let mut out = vec![false; self.data.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                            out[ny as usize * self.width + nx as usize] = true;
                        }
                    }
                }
            }
        }
        Mask {
            width: self.width,
            height: self.height,
            data: out,
        }
    }
}

/// Signed double area of the screen-space triangle; negative means
/// front-facing (counter-clockwise as seen by the camera, y down).
fn double_area<T: Scalar>(v0: &[T; 2], v1: &[T; 2], v2: &[T; 2]) -> T {
    (v1[0] - v0[0]) * (v2[1] - v0[1]) - (v1[1] - v0[1]) * (v2[0] - v0[0])
}

fn edge_fn<T: Scalar>(a: &[T; 2], b: &[T; 2], px: T, py: T) -> T {
    (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])
}

/// Top-left rule for an edge a->b of a positively wound triangle: a pixel
/// center exactly on the edge belongs to the triangle only for top edges
/// (horizontal, running +x) and left edges (running -y).
fn is_top_left<T: Scalar>(a: &[T; 2], b: &[T; 2]) -> bool {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    (dy == T::zero() && dx > T::zero()) || dy < T::zero()
}

struct ScreenTriangle<T: Scalar> {
    v: [[T; 2]; 3],
    z: [T; 3],
    n: [Vector3<T>; 3],
    inv_area: T,
}

impl<T: Scalar> ScreenTriangle<T> {
    /// Coverage and interpolated attributes at one sample position, or None
    /// when the sample is outside.
    fn sample(&self, px: T, py: T) -> Option<(T, Vector3<T>)> {
        let e0 = edge_fn(&self.v[1], &self.v[2], px, py);
        let e1 = edge_fn(&self.v[2], &self.v[0], px, py);
        let e2 = edge_fn(&self.v[0], &self.v[1], px, py);
        let inside = |e: T, a: &[T; 2], b: &[T; 2]| e > T::zero() || (e == T::zero() && is_top_left(a, b));
        if !(inside(e0, &self.v[1], &self.v[2])
            && inside(e1, &self.v[2], &self.v[0])
            && inside(e2, &self.v[0], &self.v[1]))
        {
            return None;
        }
        let w0 = e0 * self.inv_area;
        let w1 = e1 * self.inv_area;
        let w2 = e2 * self.inv_area;
        let depth = w0 * self.z[0] + w1 * self.z[1] + w2 * self.z[2];
        let normal = self.n[0] * w0 + self.n[1] * w1 + self.n[2] * w2;
        Some((depth, normal))
    }
}

/// Screen-space triangles that survive culling, in draw order, winding
/// normalized so edge functions are positive inside.
fn screen_triangles<T: Scalar>(mesh: &Mesh<T>, cull_backfaces: bool) -> Vec<ScreenTriangle<T>> {
    let normals = match vertex_normals(mesh) {
        Ok(n) => n,
        // No renderable area anywhere; nothing will cover a pixel.
        Err(_) => return Vec::new(),
    };
    let mut out = Vec::new();
    for tri in mesh.triangles() {
        let [a, b, c] = *tri;
        let p0 = mesh.vertices()[a];
        let p1 = mesh.vertices()[b];
        let p2 = mesh.vertices()[c];
        let s0 = [p0.x, p0.y];
        let s1 = [p1.x, p1.y];
        let s2 = [p2.x, p2.y];
        let area2 = double_area(&s0, &s1, &s2);
        if area2 == T::zero() {
            continue;
        }
        if cull_backfaces && area2 >= T::zero() {
            continue;
        }
        // Normalize to positive winding for the inside test.
        let (s1, s2, z, n, area2) = if area2 < T::zero() {
            (
                s2,
                s1,
                [p0.z, p2.z, p1.z],
                [normals[a], normals[c], normals[b]],
                -area2,
            )
        } else {
            (
                s1,
                s2,
                [p0.z, p1.z, p2.z],
                [normals[a], normals[b], normals[c]],
                area2,
            )
        };
        out.push(ScreenTriangle {
            v: [s0, s1, s2],
            z,
            n,
            inv_area: T::one() / area2,
        });
    }
    out
}

/// Rasterize a camera-space mesh into a fragment buffer. Covered pixels
/// record the nearest fragment (strict less-than wins; depth ties keep the
/// earlier-drawn fragment).
pub fn rasterize<T: Scalar>(
    mesh: &Mesh<T>,
    width: usize,
    height: usize,
    cull_backfaces: bool,
) -> Result<FragmentBuffer<T>> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "viewport must have positive area, got {width}x{height}"
        )));
    }
    let mut buf = FragmentBuffer::new(width, height);
    for tri in screen_triangles(mesh, cull_backfaces) {
        let min_x = tri.v.iter().map(|p| p[0]).fold(T::INF, T::min);
        let max_x = tri.v.iter().map(|p| p[0]).fold(-T::INF, T::max);
        let min_y = tri.v.iter().map(|p| p[1]).fold(T::INF, T::min);
        let max_y = tri.v.iter().map(|p| p[1]).fold(-T::INF, T::max);
        let x0 = (min_x.as_f64() - 0.5).floor().max(0.0) as usize;
        let y0 = (min_y.as_f64() - 0.5).floor().max(0.0) as usize;
        if x0 >= width || y0 >= height || max_x.as_f64() < 0.0 || max_y.as_f64() < 0.0 {
            continue;
        }
        let x1 = (max_x.as_f64().ceil().max(0.0) as usize).min(width - 1);
        let y1 = (max_y.as_f64().ceil().max(0.0) as usize).min(height - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let cx = T::of(px as f64 + 0.5);
                let cy = T::of(py as f64 + 0.5);
                if let Some((depth, normal)) = tri.sample(cx, cy) {
                    let i = buf.index(px, py);
                    if depth < buf.depth[i] {
                        buf.depth[i] = depth;
                        buf.normal[i] = normal;
                        buf.covered[i] = true;
                    }
                }
            }
        }
    }
    Ok(buf)
}

/// Phong illumination for a single fragment. `normal` and `view_dir` must be
/// unit length; `view_dir` points from the surface toward the camera.
///
/// Per channel: `color * clamp(ka*ambient + sum kd*diffuse*max(0, N.L), 0, 1)
/// + sum ks*specular*max(0, R.V)^shininess`, clamped to [0, 1].
pub fn shade_phong<T: Scalar>(
    normal: &Vector3<T>,
    view_dir: &Vector3<T>,
    lights: &LightSetup<T>,
    material: &Material<T>,
) -> Result<[T; 3]> {
    let tol = T::of(1e-9);
    if (normal.norm() - T::one()).abs() > tol {
        return Err(Error::InvalidArgument("normal must be unit length".into()));
    }
    if (view_dir.norm() - T::one()).abs() > tol {
        return Err(Error::InvalidArgument(
            "view direction must be unit length".into(),
        ));
    }
    let mut lambert = lights.ambient * material.ambient;
    let mut specular = T::zero();
    for light in &lights.lights {
        let n_dot_l = normal.dot(&light.direction).max(T::zero());
        lambert += light.diffuse * material.diffuse * n_dot_l;
        // reflection of -L about N
        let r = normal * (T::of(2.0) * normal.dot(&light.direction)) - light.direction;
        let r_dot_v = r.dot(view_dir).max(T::zero());
        specular += light.specular * material.specular * r_dot_v.powf(lights.shininess);
    }
    let lambert = lambert.clamp(T::zero(), T::one());
    Ok([
        (material.color[0] * lambert + specular).clamp(T::zero(), T::one()),
        (material.color[1] * lambert + specular).clamp(T::zero(), T::one()),
        (material.color[2] * lambert + specular).clamp(T::zero(), T::one()),
    ])
}

/// Rendered RGBA layer plus its coverage mask (exactly the alpha > 0 set).
#[derive(Debug, Clone)]
pub struct RenderedLayer {
    pub image: RasterImage,
    pub mask: Mask,
    /// True when no pixel was covered (asset placed entirely off-frame).
    pub empty_coverage: bool,
}

/// Transform the mesh into camera space, rasterize, shade, and emit an RGBA
/// layer. Alpha is 255 on covered pixels and 0 elsewhere; with `antialias`
/// boundary pixels get fractional alpha from 4x supersampled coverage.
pub fn render_layer<T: Scalar>(
    mesh: &Mesh<T>,
    sim: &RigidSimilarity<T>,
    lights: &LightSetup<T>,
    width: usize,
    height: usize,
    antialias: bool,
) -> Result<RenderedLayer> {
    lights.validate()?;
    let camera_mesh = mesh.transformed(sim);
    let buf = rasterize(&camera_mesh, width, height, true)?;

    let view = Vector3::new(T::zero(), T::zero(), -T::one());
    let mut image = RasterImage::new(width, height, Channels::Rgba)?;
    let shade_normal = |normal: Vector3<T>| -> Result<[u8; 3]> {
        let n = normal.norm();
        let unit = if n > T::zero() {
            normal / n
        } else {
            Vector3::new(T::zero(), T::zero(), T::one())
        };
        let rgb = shade_phong(&unit, &view, lights, &camera_mesh.material)?;
        Ok([
            quantize_unit(rgb[0].as_f64()),
            quantize_unit(rgb[1].as_f64()),
            quantize_unit(rgb[2].as_f64()),
        ])
    };

    for y in 0..height {
        for x in 0..width {
            let i = buf.index(x, y);
            if buf.covered[i] {
                let rgb = shade_normal(buf.normal[i])?;
                image.set_pixel(x, y, &[rgb[0], rgb[1], rgb[2], 255]);
            }
        }
    }

    if antialias {
        let tris = screen_triangles(&camera_mesh, true);
        let offsets = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)];
        for y in 0..height {
            for x in 0..width {
                if !is_boundary(&buf, x, y) {
                    continue;
                }
                let mut hits = 0u32;
                let mut best: Option<(T, Vector3<T>)> = None;
                for (ox, oy) in offsets {
                    let px = T::of(x as f64 + ox);
                    let py = T::of(y as f64 + oy);
                    let mut nearest: Option<(T, Vector3<T>)> = None;
                    for tri in &tris {
                        if let Some((depth, normal)) = tri.sample(px, py) {
                            if nearest.map_or(true, |(d, _)| depth < d) {
                                nearest = Some((depth, normal));
                            }
                        }
                    }
                    if let Some((depth, normal)) = nearest {
                        hits += 1;
                        if best.map_or(true, |(d, _)| depth < d) {
                            best = Some((depth, normal));
                        }
                    }
                }
                match best {
                    Some((_, normal)) if hits > 0 => {
                        let rgb = shade_normal(normal)?;
                        let alpha = ((hits * 255 + 2) / 4) as u8;
                        image.set_pixel(x, y, &[rgb[0], rgb[1], rgb[2], alpha]);
                    }
                    _ => image.set_pixel(x, y, &[0, 0, 0, 0]),
                }
            }
        }
    }

    let mask_data: Vec<bool> = (0..width * height)
        .map(|i| image.data()[i * 4 + 3] > 0)
        .collect();
    let mask = Mask {
        width,
        height,
        data: mask_data,
    };
    let empty = !mask.any();
    Ok(RenderedLayer {
        image,
        mask,
        empty_coverage: empty,
    })
}

/// Pixel whose coverage differs from some 4-neighbor (image border does not
/// count as a neighbor).
fn is_boundary<T: Scalar>(buf: &FragmentBuffer<T>, x: usize, y: usize) -> bool {
    let here = buf.covered[buf.index(x, y)];
    let check = |nx: i64, ny: i64| -> bool {
        if nx < 0 || ny < 0 || nx as usize >= buf.width() || ny as usize >= buf.height() {
            return false;
        }
        buf.covered[buf.index(nx as usize, ny as usize)] != here
    };
    check(x as i64 - 1, y as i64)
        || check(x as i64 + 1, y as i64)
        || check(x as i64, y as i64 - 1)
        || check(x as i64, y as i64 + 1)
}
