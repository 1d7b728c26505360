//! specsynth: eyeglass face-image synthesis and evaluation.
//!
//! The crate fits 3D eyeglass frames onto pre-fitted face meshes through
//! anchor-point alignment, renders them with a deterministic z-buffer /
//! Phong rasterizer, and blends the layers onto source portraits to build
//! eyeglass-augmented training sets. The training side ships the
//! mining-contrastive loss with analytic gradients and the gradual sampling
//! schedule; the evaluation side builds the four gallery/probe protocols and
//! computes TPR@FAR, Rank-1 and ROC curves over precomputed embeddings.
//!
//! All numeric code is generic over the [`Scalar`] type (`f32` or `f64`);
//! concrete `f64` aliases for the main types live at the crate root.

pub mod arch;
pub mod assets;
pub mod error;
pub mod eval;
pub mod fit;
pub mod geometry;
pub mod image;
pub mod io;
pub mod loss;
pub mod render;
pub mod scalar;
pub mod schedule;
pub mod seeded;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default-precision aliases.
pub type Mesh64 = geometry::Mesh<f64>;
pub type EulerAngles64 = geometry::EulerAngles<f64>;
pub type RigidSimilarity64 = geometry::RigidSimilarity<f64>;
pub type FitResult64 = fit::FitResult<f64>;
pub type LightSetup64 = render::LightSetup<f64>;
pub type SynthConfig64 = synth::SynthConfig<f64>;
pub type SamplerSchedule64 = schedule::SamplerSchedule<f64>;
pub type Embedding64 = loss::Embedding<f64>;

/// Single-precision aliases for memory-bound pipelines.
pub type Mesh32 = geometry::Mesh<f32>;
pub type Embedding32 = loss::Embedding<f32>;
