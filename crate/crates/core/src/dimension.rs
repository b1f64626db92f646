//! The similarity-dimension equation and its solver.
//!
//! For growth factor `lambda`, type frequencies `f_i` and contraction
//! ratios `r_i` the dimension `D` is the unique root of
//! `1 = lambda * sum_i f_i * r_i^D`. The left side as a function of `D`,
//! [`DimensionProblem::scaling_sum`], starts at `lambda > 1`, decreases
//! strictly (every `r_i < 1`) and vanishes at infinity, so the root exists
//! and is unique. With all ratios equal the root is available in closed
//! form; otherwise a bracketed bisection with safeguarded Newton steps
//! finds it.

use crate::model::{FractalSystem, ModelError};
use crate::spectral::{SpectralData, SpectralError};
use thiserror::Error;

/// Default bound on `|scaling_sum(D) - 1|` at the reported root.
pub const DEFAULT_DIMENSION_TOLERANCE: f64 = 1e-12;

const MAX_BRACKET_DOUBLINGS: u32 = 64;
const MAX_SOLVE_ITERATIONS: u32 = 200;

/// Validated inputs of the dimension equation.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionProblem {
    lambda: f64,
    freq: Vec<f64>,
    scales: Vec<f64>,
}

impl DimensionProblem {
    /// Checks the invariants: matching lengths, frequencies positive and
    /// summing to one within 1e-12, scales strictly inside (0, 1), and an
    /// expanding growth factor `lambda > 1`.
    pub fn new(lambda: f64, freq: Vec<f64>, scales: Vec<f64>) -> Result<Self, DimensionError> {
        if freq.is_empty() || freq.len() != scales.len() {
            return Err(DimensionError::MismatchedLengths {
                freq: freq.len(),
                scales: scales.len(),
            });
        }
        if !lambda.is_finite() || lambda <= 1.0 {
            return Err(DimensionError::NonExpanding { lambda });
        }
        let sum: f64 = freq.iter().sum();
        if freq.iter().any(|&f| f.is_nan() || f <= 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(DimensionError::BadFrequencies { sum });
        }
        if let Some(&bad) = scales.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
            return Err(DimensionError::BadScale { value: bad });
        }
        Ok(DimensionProblem {
            lambda,
            freq,
            scales,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn freq(&self) -> &[f64] {
        &self.freq
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Evaluates `lambda * sum_i f_i * r_i^d`; the dimension is where this
    /// equals one.
    pub fn scaling_sum(&self, d: f64) -> f64 {
        self.lambda
            * self
                .freq
                .iter()
                .zip(&self.scales)
                .map(|(f, r)| f * r.powf(d))
                .sum::<f64>()
    }

    fn scaling_sum_derivative(&self, d: f64) -> f64 {
        self.lambda
            * self
                .freq
                .iter()
                .zip(&self.scales)
                .map(|(f, r)| f * r.powf(d) * r.ln())
                .sum::<f64>()
    }
}

/// How a report's dimension was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ClosedForm,
    BisectionNewton,
}

/// Solver output: the dimension together with its certificate.
#[derive(Debug, Clone)]
pub struct DimensionReport {
    pub problem: DimensionProblem,
    pub dimension: f64,
    /// `|scaling_sum(dimension) - 1|` at the reported root.
    pub residual: f64,
    pub iterations: u32,
    pub method: SolveMethod,
}

/// Solves the dimension equation to `|scaling_sum(D) - 1| <= tolerance`.
///
/// Equal ratios take the closed form `D = ln(lambda) / ln(1/r)`; anything
/// else brackets the root by doubling and then alternates bisection with
/// Newton steps that are accepted only while they stay inside the bracket.
pub fn solve_dimension(
    problem: DimensionProblem,
    tolerance: f64,
) -> Result<DimensionReport, DimensionError> {
    let all_equal = problem.scales.windows(2).all(|w| w[0] == w[1]);
    if all_equal {
        let r = problem.scales[0];
        let dimension = problem.lambda.ln() / (1.0 / r).ln();
        let residual = (problem.scaling_sum(dimension) - 1.0).abs();
        if residual <= tolerance {
            return Ok(DimensionReport {
                problem,
                dimension,
                residual,
                iterations: 0,
                method: SolveMethod::ClosedForm,
            });
        }
        // Exceptional rounding; fall through to the bracketed solver.
    }
    solve_dimension_numeric(problem, tolerance)
}

/// The bracketed bisection/Newton path, regardless of scale structure.
pub fn solve_dimension_numeric(
    problem: DimensionProblem,
    tolerance: f64,
) -> Result<DimensionReport, DimensionError> {
    let mut lo = 0.0f64; // scaling_sum(0) = lambda > 1
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while problem.scaling_sum(hi) >= 1.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(DimensionError::NoConvergence {
                iterations: doublings,
                residual: (problem.scaling_sum(hi) - 1.0).abs(),
            });
        }
    }

    let mut d = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    for iterations in 1..=MAX_SOLVE_ITERATIONS {
        let g = problem.scaling_sum(d);
        residual = (g - 1.0).abs();
        if residual <= tolerance {
            return Ok(DimensionReport {
                problem,
                dimension: d,
                residual,
                iterations,
                method: SolveMethod::BisectionNewton,
            });
        }
        if g > 1.0 {
            lo = d;
        } else {
            hi = d;
        }
        let newton = d - (g - 1.0) / problem.scaling_sum_derivative(d);
        d = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(DimensionError::NoConvergence {
        iterations: MAX_SOLVE_ITERATIONS,
        residual,
    })
}

/// End-to-end analysis of a validated system.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub spectral: SpectralData,
    /// Derived contraction ratios, indexed by type.
    pub scales: Vec<f64>,
    pub report: DimensionReport,
}

impl Analysis {
    pub fn dimension(&self) -> f64 {
        self.report.dimension
    }
}

/// Builds the substitution matrix, requires primitivity, computes the
/// Perron-Frobenius pair, derives the scales and solves for the dimension.
pub fn analyze(system: &FractalSystem) -> Result<Analysis, AnalyzeError> {
    let spectral = SpectralData::compute(system)?;
    let scales = system.scales()?;
    let problem = DimensionProblem::new(spectral.lambda, spectral.freq.clone(), scales.clone())?;
    let report = solve_dimension(problem, DEFAULT_DIMENSION_TOLERANCE)?;
    Ok(Analysis {
        spectral,
        scales,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimensionError {
    #[error("growth factor lambda = {lambda} does not expand (must be > 1)")]
    NonExpanding { lambda: f64 },
    #[error("frequency vector has {freq} entries but scale vector has {scales}")]
    MismatchedLengths { freq: usize, scales: usize },
    #[error("frequencies must be positive and sum to 1 (sum = {sum})")]
    BadFrequencies { sum: f64 },
    #[error("scale {value} lies outside the open interval (0, 1)")]
    BadScale { value: f64 },
    #[error(
        "root not bracketed to tolerance after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: u32, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}
