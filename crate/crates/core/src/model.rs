//! The fractal curve system model: segment types, generators, and the
//! geometric invariants that make iterated rewriting well defined.
//!
//! A [`FractalSystem`] holds `n` segment types and exactly one generator per
//! type. A generator is a polygonal chain of steps; each step names the
//! segment type it places and the direction it travels in the generator's
//! local frame, where the replaced segment runs from `(0, 0)` to
//! `(length, 0)`. The contraction ratio of a generator is always derived
//! from this geometry: it is the ratio of the target segment's length to the
//! endpoint distance of the unscaled chain.

use crate::geom::{canonical_angle, Vec2};
use std::fmt;
use thiserror::Error;

/// Default relative tolerance for the chain-closure checks.
pub const DEFAULT_CLOSURE_TOLERANCE: f64 = 1e-9;

/// A named segment type with a relative (dimensionless) length.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentType {
    pub name: String,
    pub length: f64,
}

impl SegmentType {
    pub fn new(name: impl Into<String>, length: f64) -> Self {
        SegmentType {
            name: name.into(),
            length,
        }
    }
}

/// One element of a generator chain: which segment type to place, the
/// direction of travel, and the orientation decorations.
///
/// Angles are stored in radians and canonicalized to `(-pi, pi]` on
/// construction, so steps built from `theta` and `theta + 2*pi` compare
/// equal (up to floating-point rounding of the reduction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorStep {
    type_index: usize,
    angle: f64,
    reversed: bool,
    mirrored: bool,
}

impl GeneratorStep {
    pub fn new(type_index: usize, angle: f64) -> Self {
        Self::with_flags(type_index, angle, false, false)
    }

    pub fn with_flags(type_index: usize, angle: f64, reversed: bool, mirrored: bool) -> Self {
        GeneratorStep {
            type_index,
            angle: canonical_angle(angle),
            reversed,
            mirrored,
        }
    }

    pub fn type_index(&self) -> usize {
        self.type_index
    }

    /// Direction of travel in the generator's local frame, radians in `(-pi, pi]`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// True if the placed child's intrinsic direction opposes traversal.
    pub fn reversed(&self) -> bool {
        self.reversed
    }

    /// True if the placed child is reflected across its own axis.
    pub fn mirrored(&self) -> bool {
        self.mirrored
    }
}

/// The polygonal chain that replaces one segment type per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub target_type: usize,
    pub steps: Vec<GeneratorStep>,
}

impl Generator {
    pub fn new(target_type: usize, steps: Vec<GeneratorStep>) -> Self {
        Generator { target_type, steps }
    }

    /// Endpoint displacement of the unscaled chain: the sum of
    /// `length_j * (cos angle, sin angle)` over all steps.
    pub fn chain_displacement(&self, system: &FractalSystem) -> Result<Vec2, ModelError> {
        let mut sum = Vec2::ZERO;
        for step in &self.steps {
            let ty = system
                .types
                .get(step.type_index)
                .ok_or(ModelError::InvalidTypeIndex {
                    index: step.type_index,
                    count: system.types.len(),
                })?;
            sum += Vec2::from_angle(step.angle) * ty.length;
        }
        Ok(sum)
    }

    /// Derives the contraction ratio `scale = length_target / |chain displacement|`.
    ///
    /// The ratio must land strictly inside `(0, 1)`: a zero-length chain has
    /// no defined scale and a ratio of one or more would not contract.
    pub fn derive_scale(&self, system: &FractalSystem) -> Result<f64, ModelError> {
        let target = system
            .types
            .get(self.target_type)
            .ok_or(ModelError::InvalidTypeIndex {
                index: self.target_type,
                count: system.types.len(),
            })?;
        let displacement = self.chain_displacement(system)?;
        let distance = displacement.norm();
        // A displacement that is pure cancellation noise relative to the
        // total chain length counts as zero.
        let total: f64 = self
            .steps
            .iter()
            .map(|s| system.types[s.type_index()].length)
            .sum();
        if !distance.is_finite() || distance <= total * 1e-15 {
            return Err(ModelError::DegenerateGenerator {
                generator: self.target_type,
            });
        }
        let scale = target.length / distance;
        if scale >= 1.0 {
            return Err(ModelError::NonContracting {
                generator: self.target_type,
                scale,
            });
        }
        Ok(scale)
    }
}

/// A complete curve system: types, one generator per type, and the initiator.
#[derive(Debug, Clone, PartialEq)]
pub struct FractalSystem {
    pub name: String,
    pub types: Vec<SegmentType>,
    pub generators: Vec<Generator>,
    pub initiator_type: usize,
}

impl FractalSystem {
    pub fn new(
        name: impl Into<String>,
        types: Vec<SegmentType>,
        generators: Vec<Generator>,
        initiator_type: usize,
    ) -> Self {
        FractalSystem {
            name: name.into(),
            types,
            generators,
            initiator_type,
        }
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    /// Derives every generator's contraction ratio, indexed by type.
    pub fn scales(&self) -> Result<Vec<f64>, ModelError> {
        self.generators
            .iter()
            .map(|g| g.derive_scale(self))
            .collect()
    }

    /// Checks every structural and geometric invariant, reporting all
    /// violations as findings rather than failing on the first.
    pub fn validate(&self, tolerance: f64) -> ValidationReport {
        validate_system(self, tolerance)
    }
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// Machine-readable category of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingCode {
    DuplicateTypeName,
    NonPositiveLength,
    NonFiniteLength,
    NonFiniteAngle,
    NoTypes,
    MissingGenerator,
    MisorderedGenerator,
    ExtraGenerator,
    EmptyGenerator,
    InvalidTypeIndex,
    InvalidInitiator,
    DegenerateChain,
    ScaleOutOfRange,
    ClosureResidual,
    ClosureDirection,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FindingCode::DuplicateTypeName => "duplicate-type-name",
            FindingCode::NonPositiveLength => "non-positive-length",
            FindingCode::NonFiniteLength => "non-finite-length",
            FindingCode::NoTypes => "no-types",
            FindingCode::MissingGenerator => "missing-generator",
            FindingCode::MisorderedGenerator => "misordered-generator",
            FindingCode::ExtraGenerator => "extra-generator",
            FindingCode::EmptyGenerator => "empty-generator",
            FindingCode::InvalidTypeIndex => "invalid-type-index",
            FindingCode::InvalidInitiator => "invalid-initiator",
            FindingCode::DegenerateChain => "degenerate-chain",
            FindingCode::ScaleOutOfRange => "scale-out-of-range",
            FindingCode::ClosureResidual => "closure-residual",
            FindingCode::ClosureDirection => "closure-direction",
        };
        f.write_str(s)
    }
}

/// Where in the system a finding applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    System,
    Type(usize),
    Generator(usize),
    Step { generator: usize, step: usize },
}

#[derive(Debug, Clone)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    pub message: String,
    pub location: Location,
}

/// Outcome of [`validate_system`]: valid iff no error-severity finding.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.iter().all(|f| f.severity != Severity::Error)
    }

    fn error(&mut self, code: FindingCode, location: Location, message: String) {
        self.findings.push(Finding {
            severity: Severity::Error,
            code,
            message,
            location,
        });
    }
}

/// Checks all invariants of a candidate system.
///
/// `tolerance` bounds both the relative closure residual
/// `|scale * displacement - (length, 0)| / length` and the angular deviation
/// of the chain displacement from the +x baseline.
pub fn validate_system(system: &FractalSystem, tolerance: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = system.types.len();

    if n == 0 {
        report.error(
            FindingCode::NoTypes,
            Location::System,
            "system declares no segment types".into(),
        );
    }

    for (i, ty) in system.types.iter().enumerate() {
        if !ty.length.is_finite() {
            report.error(
                FindingCode::NonFiniteLength,
                Location::Type(i),
                format!("segment {} has non-finite length", ty.name),
            );
        } else if ty.length <= 0.0 {
            report.error(
                FindingCode::NonPositiveLength,
                Location::Type(i),
                format!("segment {} has length {} (must be > 0)", ty.name, ty.length),
            );
        }
        for (j, other) in system.types.iter().enumerate().skip(i + 1) {
            if ty.name == other.name {
                report.error(
                    FindingCode::DuplicateTypeName,
                    Location::Type(j),
                    format!("segment name {} is declared more than once", ty.name),
                );
            }
        }
    }

    if system.generators.len() < n {
        for i in system.generators.len()..n {
            report.error(
                FindingCode::MissingGenerator,
                Location::Type(i),
                format!("segment {} has no generator", system.types[i].name),
            );
        }
    } else if system.generators.len() > n {
        report.error(
            FindingCode::ExtraGenerator,
            Location::System,
            format!(
                "system declares {} generators for {} segment types",
                system.generators.len(),
                n
            ),
        );
    }

    for (i, gen) in system.generators.iter().enumerate() {
        let location = Location::Generator(i);
        if gen.target_type != i {
            report.error(
                FindingCode::MisorderedGenerator,
                location,
                format!(
                    "generator at position {} targets type {} (generators must be indexed by type)",
                    i, gen.target_type
                ),
            );
            continue;
        }
        if gen.steps.is_empty() {
            report.error(
                FindingCode::EmptyGenerator,
                location,
                "generator has no steps".into(),
            );
            continue;
        }
        let mut steps_ok = true;
        for (s, step) in gen.steps.iter().enumerate() {
            if step.type_index() >= n {
                report.error(
                    FindingCode::InvalidTypeIndex,
                    Location::Step {
                        generator: i,
                        step: s,
                    },
                    format!(
                        "step references segment type {} of {}",
                        step.type_index(),
                        n
                    ),
                );
                steps_ok = false;
            }
            if !step.angle().is_finite() {
                report.error(
                    FindingCode::NonFiniteAngle,
                    Location::Step {
                        generator: i,
                        step: s,
                    },
                    "step angle is not finite".into(),
                );
                steps_ok = false;
            }
        }
        if !steps_ok || i >= n || system.types[i].length <= 0.0 {
            continue;
        }

        match gen.derive_scale(system) {
            Err(ModelError::DegenerateGenerator { .. }) => {
                report.error(
                    FindingCode::DegenerateChain,
                    location,
                    "chain displacement is zero; no scale can be derived".into(),
                );
            }
            Err(ModelError::NonContracting { scale, .. }) => {
                report.error(
                    FindingCode::ScaleOutOfRange,
                    location,
                    format!("derived scale {scale} is not in (0, 1)"),
                );
            }
            Err(_) => {}
            Ok(scale) => {
                let target_length = system.types[i].length;
                let displacement = gen
                    .chain_displacement(system)
                    .expect("indices checked above");
                let closed = displacement * scale - Vec2::new(target_length, 0.0);
                let residual = closed.norm() / target_length;
                if residual > tolerance {
                    report.error(
                        FindingCode::ClosureResidual,
                        location,
                        format!(
                            "scaled chain endpoint misses the target segment by {residual:.3e} (relative)"
                        ),
                    );
                }
                let direction = displacement.angle().abs();
                if direction > tolerance {
                    report.error(
                        FindingCode::ClosureDirection,
                        location,
                        format!(
                            "chain displacement deviates from the +x baseline by {direction:.3e} rad"
                        ),
                    );
                }
            }
        }
    }

    if system.initiator_type >= n {
        report.error(
            FindingCode::InvalidInitiator,
            Location::System,
            format!(
                "initiator references segment type {} of {}",
                system.initiator_type, n
            ),
        );
    }

    report
}

/// Structural errors raised by model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("segment type index {index} out of range for {count} types")]
    InvalidTypeIndex { index: usize, count: usize },
    #[error("generator for type {generator} has zero chain displacement")]
    DegenerateGenerator { generator: usize },
    #[error("generator for type {generator} derives scale {scale} >= 1 (must contract)")]
    NonContracting { generator: usize, scale: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{koch_system, pentagon_system, rightangle_system, PHI};

    #[test]
    fn koch_chain_displacement() {
        let sys = koch_system();
        let d = sys.generators[0].chain_displacement(&sys).unwrap();
        assert!((d.x - 3.0).abs() < 1e-12);
        assert!(d.y.abs() < 1e-12);
    }

    #[test]
    fn pentagon_two_step_generator_displacement_is_phi_squared() {
        // 2 * phi * cos(36 deg) = phi^2 because cos(36 deg) = phi / 2.
        let sys = pentagon_system();
        let d = sys.generators[1].chain_displacement(&sys).unwrap();
        assert!((d.x - PHI * PHI).abs() < 1e-12);
        assert!(d.y.abs() < 1e-12);
    }

    #[test]
    fn single_step_identity_chain() {
        let sys = FractalSystem::new(
            "line",
            vec![SegmentType::new("S", 1.0)],
            vec![Generator::new(0, vec![GeneratorStep::new(0, 0.0)])],
            0,
        );
        let d = sys.generators[0].chain_displacement(&sys).unwrap();
        assert_eq!(d, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn koch_scale_is_one_third() {
        let sys = koch_system();
        let r = sys.generators[0].derive_scale(&sys).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pentagon_scales_match_golden_ratios() {
        let sys = pentagon_system();
        let scales = sys.scales().unwrap();
        assert!((scales[0] - 1.0 / PHI).abs() < 1e-12);
        assert!((scales[1] - 1.0 / (PHI * PHI)).abs() < 1e-12);
        assert!((scales[2] - 1.0 / PHI).abs() < 1e-12);
    }

    #[test]
    fn rightangle_scales_match_caption() {
        let sys = rightangle_system();
        let scales = sys.scales().unwrap();
        let sqrt2 = 2f64.sqrt();
        assert!((scales[0] - 1.0 / (2.0 * sqrt2)).abs() < 1e-12);
        assert!((scales[1] - 1.0 / sqrt2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_chain_is_rejected() {
        // Two opposing unit steps cancel exactly.
        let sys = FractalSystem::new(
            "null",
            vec![SegmentType::new("S", 1.0)],
            vec![Generator::new(
                0,
                vec![
                    GeneratorStep::new(0, 0.0),
                    GeneratorStep::new(0, std::f64::consts::PI),
                ],
            )],
            0,
        );
        assert!(matches!(
            sys.generators[0].derive_scale(&sys),
            Err(ModelError::DegenerateGenerator { .. })
        ));
    }

    #[test]
    fn non_contracting_chain_is_rejected() {
        // A single straight step reproduces the segment, scale 1.
        let sys = FractalSystem::new(
            "line",
            vec![SegmentType::new("S", 1.0)],
            vec![Generator::new(0, vec![GeneratorStep::new(0, 0.0)])],
            0,
        );
        assert!(matches!(
            sys.generators[0].derive_scale(&sys),
            Err(ModelError::NonContracting { .. })
        ));
    }

    #[test]
    fn fixtures_validate_clean() {
        for sys in [koch_system(), pentagon_system(), rightangle_system()] {
            let report = sys.validate(DEFAULT_CLOSURE_TOLERANCE);
            assert!(report.is_valid(), "{:?}", report.findings);
        }
    }

    #[test]
    fn perturbed_angle_breaks_closure() {
        let mut sys = pentagon_system();
        let step = sys.generators[0].steps[0];
        sys.generators[0].steps[0] =
            GeneratorStep::new(step.type_index(), step.angle() + 1f64.to_radians());
        let report = sys.validate(DEFAULT_CLOSURE_TOLERANCE);
        assert!(!report.is_valid());
        assert!(report
            .findings
            .iter()
            .any(|f| f.code == FindingCode::ClosureResidual));
        // A loose tolerance accepts the same geometry.
        assert!(sys.validate(0.1).is_valid());
    }

    #[test]
    fn structural_findings_cover_all_codes() {
        let sys = FractalSystem::new(
            "broken",
            vec![
                SegmentType::new("A", 1.0),
                SegmentType::new("A", -2.0),
                SegmentType::new("B", 1.0),
            ],
            vec![
                Generator::new(0, vec![GeneratorStep::new(7, 0.0)]),
                Generator::new(1, vec![]),
            ],
            9,
        );
        let report = sys.validate(DEFAULT_CLOSURE_TOLERANCE);
        let codes: Vec<_> = report.findings.iter().map(|f| f.code).collect();
        assert!(codes.contains(&FindingCode::DuplicateTypeName));
        assert!(codes.contains(&FindingCode::NonPositiveLength));
        assert!(codes.contains(&FindingCode::InvalidTypeIndex));
        assert!(codes.contains(&FindingCode::EmptyGenerator));
        assert!(codes.contains(&FindingCode::MissingGenerator));
        assert!(codes.contains(&FindingCode::InvalidInitiator));
    }

    #[test]
    fn scale_invariance_under_global_length_rescale() {
        for c in [0.25, 7.5] {
            let base = pentagon_system();
            let mut scaled = base.clone();
            for ty in &mut scaled.types {
                ty.length *= c;
            }
            let r0 = base.scales().unwrap();
            let r1 = scaled.scales().unwrap();
            for (a, b) in r0.iter().zip(&r1) {
                assert!((a - b).abs() < 1e-12);
            }
            assert_eq!(
                base.validate(DEFAULT_CLOSURE_TOLERANCE).is_valid(),
                scaled.validate(DEFAULT_CLOSURE_TOLERANCE).is_valid()
            );
        }
    }

    #[test]
    fn derived_scales_are_bit_deterministic() {
        let a = pentagon_system().scales().unwrap();
        let b = pentagon_system().scales().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn step_angle_canonicalization() {
        let a = GeneratorStep::new(0, 36f64.to_radians());
        let b = GeneratorStep::new(0, 396f64.to_radians());
        assert!((a.angle() - b.angle()).abs() < 1e-12);
        assert!(GeneratorStep::new(0, -200f64.to_radians()).angle() > 0.0);
    }
}
