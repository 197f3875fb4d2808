//! Counting ε-approximate dot-product embeddings of trees in discrete
//! fractal measures.
//!
//! The central quantity is the mollified embedding count
//!
//! ```text
//! V(T, t, ε) = Σ ... Σ  Π w(x_i)  ·  Π ρ_ε(x_i · x_j − t_ij)
//!             x_1    x_{k+1}       (i,j) ∈ E(T)
//! ```
//!
//! for a tree `T` with `k` edges, a weighted point cloud approximating a
//! fractal measure, per-edge dot-product targets `t_ij`, and a window
//! kernel `ρ_ε`. Because `T` is a tree, the sum factorizes: ripping one
//! leaf at a time turns the `n^(k+1)` tuple sum into `k` weighted
//! matrix-vector passes (variable elimination). The [`count`] module
//! implements both the brute-force sum and the leaf-ripping dynamic
//! program, which agree to floating-point accuracy.
//!
//! Around that core:
//!
//! * [`tree`] — finite trees, leaf ripping, and the symmetric tree cover
//!   construction with an explicit embedding certificate,
//! * [`measure`] — weighted point clouds for self-similar Cantor-type
//!   sets, products, and uniform reference clouds, with two-sided
//!   ball-mass regularity checks,
//! * [`scaling`] — ε-scaling slope experiments, packing/covering
//!   numbers, embedding-set dimension estimates, and occupied-volume
//!   evidence for positive-measure gap sets,
//! * [`spectral`] — low-frequency Fourier mass of the measure and its
//!   growth exponent,
//! * [`config`] / [`runner`] — reproducible experiment configs and the
//!   artifact-writing orchestrator behind the `dotprod-trees` binary.
//!
//! Every generator and experiment is seeded and deterministic: the same
//! config produces byte-identical result files.

pub mod config;
pub mod count;
pub mod grid;
pub mod jsonfmt;
pub mod kernel;
pub mod measure;
pub mod numeric;
pub mod runner;
pub mod scaling;
pub mod spectral;
pub mod tree;

pub use count::{naive_count, tree_dp_count, CountMethod, CountResult};
pub use kernel::{EdgeTargets, GapSpec, Kernel, KernelKind};
pub use measure::{DiscreteMeasure, MeasureMeta};
pub use tree::{PivotPolicy, SymmetricCover, Tree};
