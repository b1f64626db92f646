//! Reference systems and deterministic generators for tests and examples.
//!
//! The three bundled systems mirror the `.fcs` fixtures shipped with the
//! repository; tests use these constructors when they do not care about the
//! text format. [`random_valid_system`] produces arbitrary small systems that
//! pass validation, for exercising invariants that must hold beyond the
//! fixtures.

use crate::geom::Vec2;
use crate::model::{
    FractalSystem, Generator, GeneratorStep, SegmentType, DEFAULT_CLOSURE_TOLERANCE,
};

pub use crate::parse::PHI;

/// The quadratic Koch curve: one type, four unit steps at 0/60/-60/0 degrees.
pub fn koch_system() -> FractalSystem {
    FractalSystem::new(
        "koch",
        vec![SegmentType::new("S", 1.0)],
        vec![Generator::new(
            0,
            vec![
                GeneratorStep::new(0, 0.0),
                GeneratorStep::new(0, 60f64.to_radians()),
                GeneratorStep::new(0, (-60f64).to_radians()),
                GeneratorStep::new(0, 0.0),
            ],
        )],
        0,
    )
}

/// Three-type curve on the 36-degree lattice with golden-ratio lengths.
///
/// Lengths are (phi, 1, 1); the generators tally to the substitution matrix
/// `[[1,2,0],[1,0,2],[1,0,0]]` and derive scales (1/phi, 1/phi^2, 1/phi).
pub fn pentagon_system() -> FractalSystem {
    let deg = |d: f64| d.to_radians();
    FractalSystem::new(
        "pentagon",
        vec![
            SegmentType::new("A", PHI),
            SegmentType::new("B", 1.0),
            SegmentType::new("C", 1.0),
        ],
        vec![
            Generator::new(
                0,
                vec![
                    GeneratorStep::new(0, deg(36.0)),
                    GeneratorStep::new(1, deg(0.0)),
                    GeneratorStep::new(2, deg(-72.0)),
                ],
            ),
            Generator::new(
                1,
                vec![
                    GeneratorStep::new(0, deg(36.0)),
                    GeneratorStep::new(0, deg(-36.0)),
                ],
            ),
            Generator::new(
                2,
                vec![
                    GeneratorStep::new(1, deg(36.0)),
                    GeneratorStep::new(1, deg(-36.0)),
                ],
            ),
        ],
        0,
    )
}

/// Two-type right-angle curve with scales (1/(2*sqrt2), 1/sqrt2).
///
/// Both generators share one zigzag chain of two short and one long segment
/// on the 45-degree diagonals, so the matrix is `[[2,2],[1,1]]` with
/// eigenvalue 3 and frequencies (2/3, 1/3).
pub fn rightangle_system() -> FractalSystem {
    let deg = |d: f64| d.to_radians();
    let chain = || {
        vec![
            GeneratorStep::new(0, deg(45.0)),
            GeneratorStep::new(1, deg(-45.0)),
            GeneratorStep::new(0, deg(45.0)),
        ]
    };
    FractalSystem::new(
        "rightangle",
        vec![SegmentType::new("P", 1.0), SegmentType::new("Q", 2.0)],
        vec![Generator::new(0, chain()), Generator::new(1, chain())],
        0,
    )
}

/// SplitMix64: a tiny deterministic PRNG so tests need no RNG dependency.
#[derive(Debug, Clone)]
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in [lo, hi].
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn f64_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Generates a random system with up to `max_types` types that passes
/// [`validate_system`](crate::model::validate_system) at the default
/// tolerance.
///
/// Chains are drawn with random directions and then rotated so the endpoint
/// displacement lies on the +x axis, which satisfies closure by
/// construction; candidates whose derived scales fall outside (0, 1) are
/// re-drawn. Generators carry 2..=3 steps so expansions stay small.
pub fn random_valid_system(rng: &mut TestRng, max_types: usize) -> FractalSystem {
    assert!(max_types >= 1);
    loop {
        let n = rng.int_in(1, max_types);
        let types: Vec<SegmentType> = (0..n)
            .map(|i| SegmentType::new(format!("T{i}"), rng.f64_in(0.5, 2.0)))
            .collect();
        let mut generators = Vec::with_capacity(n);
        let mut ok = true;
        for target in 0..n {
            match random_generator(rng, target, n, &types) {
                Some(g) => generators.push(g),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let system = FractalSystem::new("random", types, generators, rng.int_in(0, n - 1));
        if system.validate(DEFAULT_CLOSURE_TOLERANCE).is_valid() {
            return system;
        }
    }
}

fn random_generator(
    rng: &mut TestRng,
    target: usize,
    n: usize,
    types: &[SegmentType],
) -> Option<Generator> {
    use std::f64::consts::PI;
    for _ in 0..64 {
        let steps = rng.int_in(2, 3);
        let raw: Vec<(usize, f64, bool, bool)> = (0..steps)
            .map(|_| {
                (
                    rng.int_in(0, n - 1),
                    rng.f64_in(-PI * 0.9, PI * 0.9),
                    rng.next_f64() < 0.2,
                    rng.next_f64() < 0.2,
                )
            })
            .collect();
        let mut displacement = Vec2::ZERO;
        for &(ty, angle, _, _) in &raw {
            displacement += Vec2::from_angle(angle) * types[ty].length;
        }
        let distance = displacement.norm();
        // Needs to contract; also reject near-cancelling chains outright.
        if distance <= types[target].length * 1.05 {
            continue;
        }
        let rotation = displacement.angle();
        let steps = raw
            .into_iter()
            .map(|(ty, angle, rev, mir)| GeneratorStep::with_flags(ty, angle - rotation, rev, mir))
            .collect();
        return Some(Generator::new(target, steps));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_systems_are_valid_and_deterministic() {
        let mut rng = TestRng::new(7);
        let sys: Vec<FractalSystem> = (0..10).map(|_| random_valid_system(&mut rng, 4)).collect();
        for s in &sys {
            assert!(s.validate(DEFAULT_CLOSURE_TOLERANCE).is_valid());
        }
        let mut rng2 = TestRng::new(7);
        let again: Vec<FractalSystem> =
            (0..10).map(|_| random_valid_system(&mut rng2, 4)).collect();
        assert_eq!(sys, again);
    }
}
