//! Greedy anisotropic triangle bisection, adaptive piecewise polynomial
//! approximation on bisection trees, and the associated orthonormal
//! multiwavelets.

pub mod approx;
pub mod encoding;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod pgm;
pub mod pixels;
pub mod quadrature;
pub mod refine;
pub mod sources;
pub mod tree;
pub mod wavelet;

pub use approx::{ApproxConfig, Cell, ErrorRecord, LocalFit, LocalPolynomial, Operator};
pub use encoding::BitStream;
pub use error::{Error, Result};
pub use geometry::{abs_form, rho_q, Edge, NodeId, Point2, QuadraticForm, Triangle, Vector2};
pub use pixels::{PixelGrid, PixelSet};
pub use refine::{DecisionMetric, Hierarchy, ReductionTest, RefineConfig, RefineRule, TieRule};
pub use sources::{Domain, FunctionSource, SourceKind};
pub use tree::{BisectionTree, SplitKind, StopRule};
pub use wavelet::{CoeffMap, ScalingBasis, ThresholdMode, WaveletTriple};
