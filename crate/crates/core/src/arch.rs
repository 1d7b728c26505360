//! Symbolic layer-shape calculator for the 22-layer residual feature
//! extractor. Verifies the stack arithmetic (spatial dims, channels, counted
//! weight layers) without implementing any network.

/// Feature-map shape, height x width x channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.h, self.w, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// Plain convolution stack.
    Conv,
    /// Residual unit of two convolutions with an identity shortcut; the
    /// entry stride applies once, after which dims are preserved.
    ResidualUnit,
    /// Global spatial pooling to 1x1.
    GlobalPool,
}

#[derive(Debug, Clone)]
pub struct LayerSpec {
    pub name: &'static str,
    pub kind: LayerKind,
    pub kernel: usize,
    pub channels: usize,
    pub stride: usize,
    pub repeats: usize,
}

impl LayerSpec {
    fn assert_valid(&self) {
        assert!(self.kernel >= 1 && self.stride >= 1 && self.channels >= 1 && self.repeats >= 1);
    }
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Output shape under the same-padding convention: spatial dims shrink by
/// ceil division with the entry stride; global pooling collapses to 1x1 and
/// passes channels through.
pub fn layer_output_shape(input: Shape, spec: &LayerSpec) -> Shape {
    spec.assert_valid();
    match spec.kind {
        LayerKind::Conv | LayerKind::ResidualUnit => Shape {
            h: ceil_div(input.h, spec.stride),
            w: ceil_div(input.w, spec.stride),
            c: spec.channels,
        },
        LayerKind::GlobalPool => Shape {
            h: 1,
            w: 1,
            c: input.c,
        },
    }
}

/// Weight layers contributed by a stage: residual units hold two
/// convolutions per repeat, pooling holds none.
pub fn weight_layers(specs: &[LayerSpec]) -> usize {
    specs
        .iter()
        .map(|s| match s.kind {
            LayerKind::Conv => s.repeats,
            LayerKind::ResidualUnit => 2 * s.repeats,
            LayerKind::GlobalPool => 0,
        })
        .sum()
}

/// The 22-layer stack: a 5x5/s2 stem sized for 120x120 inputs, a 3x3
/// dimension-preserving conv, three residual stages of 3/4/3 units, and
/// global pooling to the 512-d feature.
pub fn resnet22_layers() -> Vec<LayerSpec> {
    vec![
        LayerSpec {
            name: "conv1",
            kind: LayerKind::Conv,
            kernel: 5,
            channels: 32,
            stride: 2,
            repeats: 1,
        },
        LayerSpec {
            name: "conv2",
            kind: LayerKind::Conv,
            kernel: 3,
            channels: 64,
            stride: 1,
            repeats: 1,
        },
        LayerSpec {
            name: "conv3",
            kind: LayerKind::ResidualUnit,
            kernel: 3,
            channels: 128,
            stride: 2,
            repeats: 3,
        },
        LayerSpec {
            name: "conv4",
            kind: LayerKind::ResidualUnit,
            kernel: 3,
            channels: 256,
            stride: 2,
            repeats: 4,
        },
        LayerSpec {
            name: "conv5",
            kind: LayerKind::ResidualUnit,
            kernel: 3,
            channels: 512,
            stride: 2,
            repeats: 3,
        },
        LayerSpec {
            name: "global_pool",
            kind: LayerKind::GlobalPool,
            kernel: 1,
            channels: 512,
            stride: 1,
            repeats: 1,
        },
    ]
}

/// Input size for the stack above.
pub const INPUT_SHAPE: Shape = Shape { h: 120, w: 120, c: 3 };

/// Ordered shape trace of the full stack applied to the 120x120x3 input.
pub fn resnet22_shape_trace() -> Vec<(&'static str, Shape)> {
    let mut shape = INPUT_SHAPE;
    let mut trace = vec![("input", shape)];
    for spec in resnet22_layers() {
        shape = layer_output_shape(shape, &spec);
        trace.push((spec.name, shape));
    }
    trace
}
