//! Toolkit for fractal curves driven by multiple substitution generators.
//!
//! A curve system assigns every segment type a polygonal-chain generator.
//! Iterating the rewriting produces the curve; counting segment types per
//! rewrite yields a nonnegative substitution matrix whose Perron-Frobenius
//! eigenvalue and eigenvector, combined with the per-generator contraction
//! ratios, determine the similarity dimension as the root of
//!
//! ```text
//! 1 = lambda * sum_i freq_i * scale_i ^ D
//! ```
//!
//! The crate is organized as a pipeline:
//!
//! * [`model`] — segment types, generators, geometric validation
//! * [`parse`] — the `.fcs` text format and its expression language
//! * [`spectral`] — substitution matrix, primitivity, Perron-Frobenius pair
//! * [`dimension`] — the dimension equation and its solver
//! * [`curve`] — iterated rewriting into placed segments and polylines
//! * [`empirics`] — frequency-convergence and box-counting cross-checks
//! * [`export`] — SVG / CSV / JSON output
//!
//! All values are immutable once built and every operation is a pure
//! function of its inputs, so everything here is safe to share across
//! threads.

pub mod curve;
pub mod dimension;
pub mod empirics;
pub mod export;
pub mod geom;
pub mod model;
pub mod parse;
pub mod spectral;
pub mod testkit;

pub use curve::{expand, polyline, segment_census, CensusVector, PlacedSegment, Polyline};
pub use dimension::{analyze, solve_dimension, Analysis, DimensionProblem, DimensionReport};
pub use geom::Vec2;
pub use model::{FractalSystem, Generator, GeneratorStep, SegmentType, ValidationReport};
pub use parse::{eval_expr, parse_system, serialize_system, ParseError};
pub use spectral::{matrix_power, perron_eigen, primitivity, SpectralData, SubstitutionMatrix};
