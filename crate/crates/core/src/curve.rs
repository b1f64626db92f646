//! Iterated segment rewriting: expands a system to any iteration depth,
//! streaming placed segments in curve-traversal order.
//!
//! Each placed segment carries a similarity pose (anchor, rotation, scale,
//! handedness) plus a traversal direction. Expanding a segment walks its
//! generator's chain, composing the child poses onto the parent pose; the
//! chain's joint vertices are mapped once and shared between neighbouring
//! children, and every subtree inherits its outer endpoints from the parent,
//! so the emitted curve is a connected chain with exactly equal joints and
//! its global endpoints are preserved bit-for-bit. Traversal is depth-first,
//! so memory stays proportional to `iterations * max steps per generator`
//! even when the segment count is enormous.

use crate::geom::{canonical_angle, Vec2};
use crate::model::{FractalSystem, ModelError};
use num_bigint::BigUint;
use num_traits::Zero;
use std::f64::consts::PI;
use thiserror::Error;

/// Default bound on emitted segments per expansion.
pub const DEFAULT_SEGMENT_CAP: usize = 10_000_000;

/// Knobs for [`expand_with`] / [`polyline_with`].
#[derive(Debug, Clone)]
pub struct ExpandOptions {
    /// Expansion aborts with [`CurveError::SegmentCap`] beyond this count.
    pub max_segments: usize,
    /// Traverse the initiator against its intrinsic direction; the curve
    /// then runs from `(length, 0)` back to `(0, 0)`.
    pub initiator_reversed: bool,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            max_segments: DEFAULT_SEGMENT_CAP,
            initiator_reversed: false,
        }
    }
}

/// One leaf segment of an expansion, in curve-traversal order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedSegment {
    pub type_index: usize,
    /// Where the curve enters this segment.
    pub start: Vec2,
    /// Where the curve leaves it. Bit-identical to the next segment's start.
    pub end: Vec2,
    /// Direction of traversal, radians in `(-pi, pi]`.
    pub angle: f64,
    pub length: f64,
    /// +1, or -1 under an odd number of inherited mirror flags.
    pub handedness: i8,
    /// True if the segment's intrinsic direction opposes traversal.
    pub intrinsic_reversed: bool,
}

/// Exact per-type segment tally of one expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusVector {
    counts: Vec<BigUint>,
}

impl CensusVector {
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl From<Vec<BigUint>> for CensusVector {
    fn from(counts: Vec<BigUint>) -> Self {
        CensusVector { counts }
    }
}

/// A materialized expansion: shared-joint vertices plus per-edge types.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub vertices: Vec<Vec2>,
    /// One type index per edge; `segment_types.len() + 1 == vertices.len()`.
    pub segment_types: Vec<usize>,
}

impl Polyline {
    pub fn segment_count(&self) -> usize {
        self.segment_types.len()
    }

    /// Axis-aligned bounding box, `None` for an empty polyline.
    pub fn bounding_box(&self) -> Option<(Vec2, Vec2)> {
        let first = *self.vertices.first()?;
        let mut min = first;
        let mut max = first;
        for v in &self.vertices[1..] {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        Some((min, max))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error(
        "segment count exceeds the cap of {cap} (raise the limit to render deeper iterations)"
    )]
    SegmentCap { cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

struct Expander<'a, F: FnMut(&PlacedSegment)> {
    system: &'a FractalSystem,
    scales: Vec<f64>,
    sink: F,
    cap: usize,
    emitted: usize,
    counts: Vec<u64>,
}

impl<'a, F: FnMut(&PlacedSegment)> Expander<'a, F> {
    /// Expands one placed segment.
    ///
    /// `rotation`/`scale`/`handedness` give the similarity mapping the
    /// segment's intrinsic frame into the plane; `backward` tells whether
    /// the curve traverses it against the intrinsic direction. `entry` and
    /// `exit` are the traversal endpoints as computed by the parent; they
    /// are authoritative so joints stay exact.
    #[allow(clippy::too_many_arguments)]
    fn node(
        &mut self,
        type_index: usize,
        rotation: f64,
        scale: f64,
        handedness: f64,
        backward: bool,
        entry: Vec2,
        exit: Vec2,
        depth: u32,
    ) -> Result<(), CurveError> {
        if depth == 0 {
            return self.emit(
                type_index, rotation, scale, handedness, backward, entry, exit,
            );
        }

        let generator = &self.system.generators[type_index];
        let ratio = self.scales[type_index];
        let step_count = generator.steps.len();

        // Map the chain's joint vertices through this segment's pose. The
        // intrinsic chain start sits at `entry` when traversing forward and
        // at `exit` when backward; the far end is the opposite one.
        let anchor = if backward { exit } else { entry };
        let (sin_r, cos_r) = rotation.sin_cos();
        let mut joints = Vec::with_capacity(step_count + 1);
        joints.push(anchor);
        let mut chain = Vec2::ZERO;
        for step in &generator.steps {
            let length = self.system.types[step.type_index()].length;
            chain += Vec2::from_angle(step.angle()) * (ratio * length);
            let flipped_y = handedness * chain.y;
            joints.push(Vec2::new(
                anchor.x + scale * (cos_r * chain.x - sin_r * flipped_y),
                anchor.y + scale * (sin_r * chain.x + cos_r * flipped_y),
            ));
        }
        *joints.last_mut().expect("nonempty") = if backward { entry } else { exit };

        let child_scale = scale * ratio;
        let order: Box<dyn Iterator<Item = usize>> = if backward {
            Box::new((0..step_count).rev())
        } else {
            Box::new(0..step_count)
        };
        for m in order {
            let step = generator.steps[m];
            let near = joints[m];
            let far = joints[m + 1];
            let (child_entry, child_exit) = if backward { (far, near) } else { (near, far) };
            let mut child_rotation = rotation + handedness * step.angle();
            if step.reversed() {
                // Intrinsic start maps onto the chain-far endpoint.
                child_rotation += PI;
            }
            let child_handedness = if step.mirrored() {
                -handedness
            } else {
                handedness
            };
            let child_backward = backward ^ step.reversed();
            self.node(
                step.type_index(),
                child_rotation,
                child_scale,
                child_handedness,
                child_backward,
                child_entry,
                child_exit,
                depth - 1,
            )?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &mut self,
        type_index: usize,
        rotation: f64,
        scale: f64,
        handedness: f64,
        backward: bool,
        entry: Vec2,
        exit: Vec2,
    ) -> Result<(), CurveError> {
        if self.emitted >= self.cap {
            return Err(CurveError::SegmentCap { cap: self.cap });
        }
        self.emitted += 1;
        self.counts[type_index] += 1;
        let segment = PlacedSegment {
            type_index,
            start: entry,
            end: exit,
            angle: canonical_angle(if backward { rotation + PI } else { rotation }),
            length: scale * self.system.types[type_index].length,
            handedness: if handedness < 0.0 { -1 } else { 1 },
            intrinsic_reversed: backward,
        };
        (self.sink)(&segment);
        Ok(())
    }
}

/// Rejects expansions whose exact segment count exceeds the cap before any
/// recursion starts, by iterating the per-type counts and bailing as soon
/// as the running total passes the cap.
///
/// Besides failing fast, this bounds the recursion depth: every rewriting
/// cycle of a contracting system contains a multi-step generator, so the
/// total grows geometrically and any depth that survives this check is
/// small enough for the call stack.
fn check_cap(system: &FractalSystem, iterations: u32, cap: usize) -> Result<(), CurveError> {
    let n = system.types.len();
    let limit = BigUint::from(cap);
    let mut counts = vec![BigUint::zero(); n];
    counts[system.initiator_type] = BigUint::from(1u32);
    for _ in 0..iterations {
        if counts.iter().sum::<BigUint>() > limit {
            return Err(CurveError::SegmentCap { cap });
        }
        let mut next = vec![BigUint::zero(); n];
        for (source, generator) in system.generators.iter().enumerate().take(n) {
            if counts[source].is_zero() {
                continue;
            }
            for step in &generator.steps {
                next[step.type_index()] += &counts[source];
            }
        }
        counts = next;
    }
    if counts.iter().sum::<BigUint>() > limit {
        return Err(CurveError::SegmentCap { cap });
    }
    Ok(())
}

/// Expands `system` for exactly `iterations` rewriting levels, feeding each
/// leaf segment to `sink` in traversal order, and returns the exact census.
///
/// The initiator is placed from `(0, 0)` to `(length, 0)` with handedness
/// +1. Iteration zero emits the initiator itself.
pub fn expand<F: FnMut(&PlacedSegment)>(
    system: &FractalSystem,
    iterations: u32,
    sink: F,
) -> Result<CensusVector, CurveError> {
    expand_with(system, iterations, &ExpandOptions::default(), sink)
}

/// [`expand`] with an explicit segment cap and initiator traversal.
pub fn expand_with<F: FnMut(&PlacedSegment)>(
    system: &FractalSystem,
    iterations: u32,
    options: &ExpandOptions,
    sink: F,
) -> Result<CensusVector, CurveError> {
    let scales = system.scales()?;
    let initiator = system.initiator_type;
    let length = system
        .types
        .get(initiator)
        .ok_or(ModelError::InvalidTypeIndex {
            index: initiator,
            count: system.types.len(),
        })?
        .length;
    check_cap(system, iterations, options.max_segments)?;
    let mut expander = Expander {
        system,
        scales,
        sink,
        cap: options.max_segments,
        emitted: 0,
        counts: vec![0u64; system.types.len()],
    };
    let intrinsic_start = Vec2::ZERO;
    let intrinsic_end = Vec2::new(length, 0.0);
    let (entry, exit) = if options.initiator_reversed {
        (intrinsic_end, intrinsic_start)
    } else {
        (intrinsic_start, intrinsic_end)
    };
    expander.node(
        initiator,
        0.0,
        1.0,
        1.0,
        options.initiator_reversed,
        entry,
        exit,
        iterations,
    )?;
    Ok(CensusVector {
        counts: expander.counts.into_iter().map(BigUint::from).collect(),
    })
}

/// Materializes the expansion as a connected vertex chain.
pub fn polyline(system: &FractalSystem, iterations: u32) -> Result<Polyline, CurveError> {
    polyline_with(system, iterations, &ExpandOptions::default())
}

pub fn polyline_with(
    system: &FractalSystem,
    iterations: u32,
    options: &ExpandOptions,
) -> Result<Polyline, CurveError> {
    let mut vertices: Vec<Vec2> = Vec::new();
    let mut segment_types: Vec<usize> = Vec::new();
    expand_with(system, iterations, options, |segment| {
        if vertices.is_empty() {
            vertices.push(segment.start);
        }
        vertices.push(segment.end);
        segment_types.push(segment.type_index);
    })?;
    Ok(Polyline {
        vertices,
        segment_types,
    })
}

/// Counts segments per type at iteration `iterations` by running the
/// expansion with a discarding sink.
///
/// The result always equals `matrix_power(M, iterations) * e_initiator`;
/// the matrix-power route is the independent check, this one walks the
/// geometry.
pub fn segment_census(system: &FractalSystem, iterations: u32) -> Result<CensusVector, CurveError> {
    expand(system, iterations, |_| {})
}
