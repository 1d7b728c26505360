//! Procedurally generated eyeglass frame meshes and demo face fixtures.
//!
//! Four thick black frame styles ship with the crate (the published assets
//! are not redistributable). All frames share one anchor scheme, in this
//! order: left temple tip, right temple tip, left lens center, right lens
//! center, nose-bridge midpoint ("left" = smaller x). Frames are modeled in
//! arbitrary units around the origin, front face in the z = 0 plane wound
//! toward the camera (-z), temples extending to +z.

use nalgebra::Point3;

use crate::geometry::{Material, Mesh};
use crate::image::{Channels, RasterImage};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameStyle {
    Rectangular,
    Rounded,
    Browline,
    Oversized,
}

impl FrameStyle {
    pub const ALL: [FrameStyle; 4] = [
        FrameStyle::Rectangular,
        FrameStyle::Rounded,
        FrameStyle::Browline,
        FrameStyle::Oversized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FrameStyle::Rectangular => "rectangular",
            FrameStyle::Rounded => "rounded",
            FrameStyle::Browline => "browline",
            FrameStyle::Oversized => "oversized",
        }
    }
}

/// The four built-in frames, in `FrameStyle::ALL` order.
pub fn default_assets<T: Scalar>() -> Vec<Mesh<T>> {
    FrameStyle::ALL.iter().map(|&s| eyeglass_frame(s)).collect()
}

struct FrameBuilder<T: Scalar> {
    verts: Vec<Point3<T>>,
    tris: Vec<[usize; 3]>,
}

impl<T: Scalar> FrameBuilder<T> {
    fn new() -> Self {
        FrameBuilder {
            verts: Vec::new(),
            tris: Vec::new(),
        }
    }

    fn vertex(&mut self, x: f64, y: f64, z: f64) -> usize {
        self.verts.push(Point3::new(T::of(x), T::of(y), T::of(z)));
        self.verts.len() - 1
    }

    /// Push a triangle wound so its screen projection faces the camera.
    fn tri_front(&mut self, a: usize, b: usize, c: usize) {
        let (pa, pb, pc) = (self.verts[a], self.verts[b], self.verts[c]);
        let area2 = (pb.x - pa.x) * (pc.y - pa.y) - (pb.y - pa.y) * (pc.x - pa.x);
        if area2 > T::zero() {
            self.tris.push([a, c, b]);
        } else {
            self.tris.push([a, b, c]);
        }
    }

    /// Quad from four corner indices in perimeter order.
    fn quad(&mut self, a: usize, b: usize, c: usize, d: usize) {
        self.tri_front(a, b, c);
        self.tri_front(a, c, d);
    }

    /// Axis-aligned rectangle in the z = 0 plane.
    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        let a = self.vertex(x0, y0, 0.0);
        let b = self.vertex(x1, y0, 0.0);
        let c = self.vertex(x1, y1, 0.0);
        let d = self.vertex(x0, y1, 0.0);
        self.quad(a, b, c, d);
    }

    /// Flat ring segment around (cx, cy) from angle t0 to t1.
    fn annulus(&mut self, cx: f64, cy: f64, inner: f64, outer: f64, t0: f64, t1: f64, segs: usize) {
        let mut ring = Vec::with_capacity(segs + 1);
        for k in 0..=segs {
            let t = t0 + (t1 - t0) * k as f64 / segs as f64;
            let (s, c) = t.sin_cos();
            let o = self.vertex(cx + outer * c, cy + outer * s, 0.0);
            let i = self.vertex(cx + inner * c, cy + inner * s, 0.0);
            ring.push((o, i));
        }
        for w in ring.windows(2) {
            let (o0, i0) = w[0];
            let (o1, i1) = w[1];
            self.quad(o0, o1, i1, i0);
        }
    }

    /// Rectangular ring: outer rectangle minus inner rectangle, both
    /// centered on (cx, cy) with given half-extents.
    fn rect_ring(&mut self, cx: f64, cy: f64, ohx: f64, ohy: f64, ihx: f64, ihy: f64) {
        let o = [
            self.vertex(cx - ohx, cy - ohy, 0.0),
            self.vertex(cx + ohx, cy - ohy, 0.0),
            self.vertex(cx + ohx, cy + ohy, 0.0),
            self.vertex(cx - ohx, cy + ohy, 0.0),
        ];
        let i = [
            self.vertex(cx - ihx, cy - ihy, 0.0),
            self.vertex(cx + ihx, cy - ihy, 0.0),
            self.vertex(cx + ihx, cy + ihy, 0.0),
            self.vertex(cx - ihx, cy + ihy, 0.0),
        ];
        for k in 0..4 {
            let n = (k + 1) % 4;
            self.quad(o[k], o[n], i[n], i[k]);
        }
    }

    /// Thin temple arm from the frame edge back toward the ear.
    fn temple(&mut self, hinge_x: f64, hinge_y: f64, tip_x: f64, tip_y: f64, tip_z: f64) {
        let half = 0.06;
        let a = self.vertex(hinge_x, hinge_y - half, 0.0);
        let b = self.vertex(hinge_x, hinge_y + half, 0.0);
        let c = self.vertex(tip_x, tip_y + half, tip_z);
        let d = self.vertex(tip_x, tip_y - half, tip_z);
        self.quad(a, b, c, d);
    }
}

struct FrameLayout {
    lens_cx: f64,
    hinge_x: f64,
    tip_x: f64,
    bridge_y: (f64, f64),
    bridge_hx: f64,
}

/// Build one frame style. All styles share the 5-anchor scheme.
pub fn eyeglass_frame<T: Scalar>(style: FrameStyle) -> Mesh<T> {
    let layout = match style {
        FrameStyle::Rectangular => FrameLayout {
            lens_cx: 1.3,
            hinge_x: 2.45,
            tip_x: 2.8,
            bridge_y: (-0.55, -0.2),
            bridge_hx: 0.5,
        },
        FrameStyle::Rounded => FrameLayout {
            lens_cx: 1.25,
            hinge_x: 2.45,
            tip_x: 2.75,
            bridge_y: (-0.55, -0.25),
            bridge_hx: 0.5,
        },
        FrameStyle::Browline => FrameLayout {
            lens_cx: 1.25,
            hinge_x: 2.35,
            tip_x: 2.7,
            bridge_y: (-0.9, -0.55),
            bridge_hx: 0.45,
        },
        FrameStyle::Oversized => FrameLayout {
            lens_cx: 1.55,
            hinge_x: 3.0,
            tip_x: 3.4,
            bridge_y: (-0.6, -0.2),
            bridge_hx: 0.55,
        },
    };

    let mut fb = FrameBuilder::<T>::new();
    // anchors first: temple tips, lens centers, bridge midpoint
    let tip_y = -0.2;
    let tip_z = 2.2;
    let a_temple_l = fb.vertex(-layout.tip_x, tip_y, tip_z);
    let a_temple_r = fb.vertex(layout.tip_x, tip_y, tip_z);
    let a_lens_l = fb.vertex(-layout.lens_cx, 0.0, 0.0);
    let a_lens_r = fb.vertex(layout.lens_cx, 0.0, 0.0);
    let a_bridge = fb.vertex(0.0, (layout.bridge_y.0 + layout.bridge_y.1) / 2.0, 0.0);
    let anchors = vec![a_temple_l, a_temple_r, a_lens_l, a_lens_r, a_bridge];

    for side in [-1.0, 1.0] {
        let cx = side * layout.lens_cx;
        match style {
            FrameStyle::Rectangular => {
                fb.rect_ring(cx, 0.0, 1.15, 0.8, 0.88, 0.55);
            }
            FrameStyle::Rounded => {
                fb.annulus(cx, 0.0, 0.92, 1.2, 0.0, std::f64::consts::TAU, 28);
            }
            FrameStyle::Browline => {
                // heavy brow bar per lens plus a thin lower half-rim
                fb.rect(cx - 1.15, -0.95, cx + 1.15, -0.55, );
                fb.annulus(cx, -0.1, 0.88, 1.05, 0.0, std::f64::consts::PI, 14);
            }
            FrameStyle::Oversized => {
                fb.annulus(cx, 0.0, 1.12, 1.45, 0.0, std::f64::consts::TAU, 32);
            }
        }
        fb.temple(
            side * layout.hinge_x,
            -0.2,
            side * layout.tip_x,
            tip_y,
            tip_z,
        );
    }
    fb.rect(
        -layout.bridge_hx,
        layout.bridge_y.0,
        layout.bridge_hx,
        layout.bridge_y.1,
    );

    let mut material = Material::colored(0.07, 0.07, 0.08);
    material.specular = T::of(0.9);
    Mesh::new(fb.verts, fb.tris, anchors, material).expect("procedural frame is valid")
}

/// Hemispherical stand-in for a fitted face mesh, in camera space for a
/// `width` x `height` viewport (z = depth, nose toward the camera). Carries
/// the 5-anchor scheme matching the frames; used by demos and tests.
pub fn demo_face<T: Scalar>(width: usize, height: usize) -> Mesh<T> {
    let w = width as f64;
    let h = height as f64;
    let (cx, cy, z0) = (w * 0.5, h * 0.52, 100.0);
    let (rx, ry, rz) = (0.32 * w, 0.42 * h, 0.3 * w);
    let eye_y = cy - 0.18 * ry;

    let mut fb = FrameBuilder::<T>::new();
    let a0 = fb.vertex(cx - 0.98 * rx, eye_y, z0 - 0.05 * rz);
    let a1 = fb.vertex(cx + 0.98 * rx, eye_y, z0 - 0.05 * rz);
    let a2 = fb.vertex(cx - 0.42 * rx, eye_y, z0 - 0.80 * rz);
    let a3 = fb.vertex(cx + 0.42 * rx, eye_y, z0 - 0.80 * rz);
    let a4 = fb.vertex(cx, eye_y, z0 - 0.95 * rz);
    let anchors = vec![a0, a1, a2, a3, a4];

    // front hemisphere of an ellipsoid: pole (toward camera) plus rings
    const RINGS: usize = 8;
    const SEGS: usize = 24;
    let pole = fb.vertex(cx, cy, z0 - rz);
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for r in 1..=RINGS {
        let t = std::f64::consts::FRAC_PI_2 * r as f64 / RINGS as f64;
        let mut ring = Vec::with_capacity(SEGS);
        for s in 0..SEGS {
            let phi = std::f64::consts::TAU * s as f64 / SEGS as f64;
            ring.push(fb.vertex(
                cx + rx * t.sin() * phi.cos(),
                cy + ry * t.sin() * phi.sin(),
                z0 - rz * t.cos(),
            ));
        }
        rings.push(ring);
    }
    for s in 0..SEGS {
        let n = (s + 1) % SEGS;
        fb.tri_front(pole, rings[0][s], rings[0][n]);
    }
    for r in 0..RINGS - 1 {
        for s in 0..SEGS {
            let n = (s + 1) % SEGS;
            fb.quad(rings[r][s], rings[r][n], rings[r + 1][n], rings[r + 1][s]);
        }
    }

    Mesh::new(fb.verts, fb.tris, anchors, Material::colored(0.85, 0.68, 0.58))
        .expect("demo face is valid")
}

/// Procedural portrait image for demos and golden tests: gradient backdrop,
/// shaded face ellipse, hair cap, eye dots.
pub fn demo_portrait(width: usize, height: usize) -> RasterImage {
    let mut img = RasterImage::new(width, height, Channels::Rgb).expect("positive dims");
    let w = width as f64;
    let h = height as f64;
    let (cx, cy) = (w * 0.5, h * 0.52);
    let (rx, ry) = (0.32 * w, 0.42 * h);
    let eye_y = cy - 0.18 * ry;
    for y in 0..height {
        for x in 0..width {
            let fx = x as f64 + 0.5;
            let fy = y as f64 + 0.5;
            let t = fy / h;
            let mut px = [
                (70.0 - 30.0 * t) as u8,
                (80.0 - 35.0 * t) as u8,
                (110.0 - 45.0 * t) as u8,
            ];
            let dx = (fx - cx) / rx;
            let dy = (fy - cy) / ry;
            let d2 = dx * dx + dy * dy;
            if d2 <= 1.0 {
                let lambert = 0.55 + 0.45 * (1.0 - d2).sqrt();
                px = [
                    (225.0 * lambert) as u8,
                    (185.0 * lambert) as u8,
                    (160.0 * lambert) as u8,
                ];
                if dy < -0.55 {
                    px = [58, 44, 40];
                }
            }
            for ex in [cx - 0.42 * rx, cx + 0.42 * rx] {
                let er = 0.035 * w;
                if (fx - ex).powi(2) + (fy - eye_y).powi(2) <= er * er {
                    px = [45, 35, 35];
                }
            }
            img.set_pixel(x, y, &px);
        }
    }
    img
}
