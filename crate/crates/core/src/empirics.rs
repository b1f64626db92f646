//! Empirical cross-checks of the spectral theory: census frequencies
//! converging to the eigenvector, and a box-counting dimension estimate
//! that is independent of the dimension equation.

use crate::curve::Polyline;
use crate::geom::Vec2;
use crate::model::FractalSystem;
use crate::spectral::{IntMatrix, SpectralData, SpectralError};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use std::collections::HashSet;
use thiserror::Error;

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct ConvergencePoint {
    pub k: u32,
    /// Exact segment census at iteration `k`, from integer matrix powers.
    pub census: Vec<BigUint>,
    /// L1 distance between the normalized census and the eigenvector.
    pub distance: f64,
}

impl ConvergencePoint {
    /// The census as relative frequencies.
    pub fn normalized(&self) -> Vec<f64> {
        normalized_counts(&self.census)
    }
}

/// Converts exact counts to relative frequencies. Counts are shifted down
/// to the f64 mantissa width first, so the ratios stay meaningful even
/// when the raw counts overflow double precision.
fn normalized_counts(census: &[BigUint]) -> Vec<f64> {
    let total: BigUint = census.iter().sum();
    if total.is_zero() {
        return vec![0.0; census.len()];
    }
    let shift = total.bits().saturating_sub(53);
    let total = (&total >> shift).to_f64().expect("fits after shift");
    census
        .iter()
        .map(|c| (c >> shift).to_f64().expect("fits after shift") / total)
        .collect()
}

/// Convergence of normalized censuses toward the type frequencies.
#[derive(Debug, Clone)]
pub struct ConvergenceSeries {
    /// The limit frequencies (normalized right eigenvector).
    pub freq: Vec<f64>,
    pub entries: Vec<ConvergencePoint>,
}

/// Tabulates, for `k = 1..=k_max`, how far the iteration-`k` census is
/// from the limiting frequencies. Censuses come from exact matrix powers
/// applied to the initiator's basis vector; no geometry is generated.
pub fn frequency_convergence(
    system: &FractalSystem,
    k_max: u32,
) -> Result<ConvergenceSeries, SpectralError> {
    let spectral = SpectralData::compute(system)?;
    let matrix = IntMatrix::from_substitution(&spectral.matrix);
    let mut census: Vec<BigUint> = (0..system.types.len())
        .map(|i| {
            if i == system.initiator_type {
                BigUint::from(1u32)
            } else {
                BigUint::zero()
            }
        })
        .collect();
    let mut entries = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        census = matrix.apply(&census);
        entries.push(ConvergencePoint {
            k,
            census: census.clone(),
            distance: l1_distance(&census, &spectral.freq),
        });
    }
    Ok(ConvergenceSeries {
        freq: spectral.freq,
        entries,
    })
}

fn l1_distance(census: &[BigUint], freq: &[f64]) -> f64 {
    normalized_counts(census)
        .iter()
        .zip(freq)
        .map(|(c, f)| (c - f).abs())
        .sum()
}

/// Box-counting fit over a dyadic scale ladder.
#[derive(Debug, Clone)]
pub struct BoxCountFit {
    /// Box sizes, decreasing.
    pub scales: Vec<f64>,
    /// Occupied boxes per scale.
    pub counts: Vec<usize>,
    /// Least-squares slope of `log(count)` against `log(1/scale)`.
    pub slope: f64,
    /// Quality of the fit, in [0, 1].
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmpiricsError {
    #[error("polyline needs at least 2 vertices")]
    TooFewVertices,
    #[error("polyline has zero diameter")]
    DegenerateGeometry,
    #[error("box counting needs at least 4 scales (got {requested})")]
    TooFewScales { requested: usize },
}

/// Estimates the box-counting dimension of a polyline.
///
/// Grids are axis-aligned and anchored at the bounding-box corner with box
/// sizes `diameter / 2^(s+1)` for `s = 1..=num_scales`; the ladder is
/// floored at four times the shortest edge so the estimate measures the
/// curve rather than the straight interiors of single edges. Every edge is
/// rasterized by a conservative grid walk, so no intersected box is missed.
pub fn box_count_dimension(
    polyline: &Polyline,
    num_scales: usize,
) -> Result<BoxCountFit, EmpiricsError> {
    if num_scales < 4 {
        return Err(EmpiricsError::TooFewScales {
            requested: num_scales,
        });
    }
    if polyline.vertices.len() < 2 {
        return Err(EmpiricsError::TooFewVertices);
    }
    let (min, max) = polyline.bounding_box().expect("nonempty");
    let diameter = (max - min).norm();
    if diameter.is_nan() || diameter <= 0.0 {
        return Err(EmpiricsError::DegenerateGeometry);
    }

    let min_edge = polyline
        .vertices
        .windows(2)
        .map(|w| (w[1] - w[0]).norm())
        .fold(f64::INFINITY, f64::min);

    let ladder: Vec<f64> = (1..=num_scales as u32)
        .map(|s| diameter / 2f64.powi(s as i32 + 1))
        .collect();
    let floor = 4.0 * min_edge;
    let mut scales: Vec<f64> = ladder.iter().copied().filter(|&e| e >= floor).collect();
    if scales.len() < 4 {
        scales = ladder[..4.min(ladder.len())].to_vec();
    }

    let mut counts = Vec::with_capacity(scales.len());
    for &eps in &scales {
        let grid = Grid::new(min, max, eps);
        let mut occupied: HashSet<(i64, i64)> = HashSet::new();
        for w in polyline.vertices.windows(2) {
            grid.mark_cells(&mut occupied, w[0], w[1]);
        }
        counts.push(occupied.len());
    }

    let xs: Vec<f64> = scales.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, r_squared) = linear_fit(&xs, &ys);

    Ok(BoxCountFit {
        scales,
        counts,
        slope,
        r_squared,
    })
}

/// One counting grid: axis-aligned, anchored at the bounding-box corner,
/// with indices clamped so boundary points stay inside the covered range.
struct Grid {
    origin: Vec2,
    eps: f64,
    cells_x: i64,
    cells_y: i64,
}

impl Grid {
    fn new(min: Vec2, max: Vec2, eps: f64) -> Self {
        let cells = |extent: f64| ((extent / eps).ceil() as i64).max(1);
        Grid {
            origin: min,
            eps,
            cells_x: cells(max.x - min.x),
            cells_y: cells(max.y - min.y),
        }
    }

    fn cell_of(&self, p: Vec2) -> (i64, i64) {
        let ix = ((p.x - self.origin.x) / self.eps).floor() as i64;
        let iy = ((p.y - self.origin.y) / self.eps).floor() as i64;
        (ix.clamp(0, self.cells_x - 1), iy.clamp(0, self.cells_y - 1))
    }

    /// Marks every cell the segment `a -> b` passes through
    /// (Amanatides-Woo traversal). Ties at cell corners mark both side
    /// cells, erring toward overcounting rather than missing a box.
    fn mark_cells(&self, occupied: &mut HashSet<(i64, i64)>, a: Vec2, b: Vec2) {
        let (mut ix, mut iy) = self.cell_of(a);
        let (tx, ty) = self.cell_of(b);
        occupied.insert((ix, iy));

        let d = b - a;
        let step_x: i64 = if d.x > 0.0 { 1 } else { -1 };
        let step_y: i64 = if d.y > 0.0 { 1 } else { -1 };

        // Parameter t in [0,1] along the segment at which the next x/y
        // grid line is crossed.
        let next_boundary = |i: i64, step: i64, origin_c: f64, a_c: f64, d_c: f64| -> f64 {
            if d_c == 0.0 {
                return f64::INFINITY;
            }
            let boundary = origin_c + (i + i64::from(step > 0)) as f64 * self.eps;
            (boundary - a_c) / d_c
        };
        let mut t_max_x = next_boundary(ix, step_x, self.origin.x, a.x, d.x);
        let mut t_max_y = next_boundary(iy, step_y, self.origin.y, a.y, d.y);
        let t_delta_x = if d.x == 0.0 {
            f64::INFINITY
        } else {
            (self.eps / d.x).abs()
        };
        let t_delta_y = if d.y == 0.0 {
            f64::INFINITY
        } else {
            (self.eps / d.y).abs()
        };

        let mut guard = (tx - ix).abs() + (ty - iy).abs() + 4;
        while (ix, iy) != (tx, ty) && guard > 0 {
            guard -= 1;
            if t_max_x < t_max_y {
                ix += step_x;
                t_max_x += t_delta_x;
            } else if t_max_y < t_max_x {
                iy += step_y;
                t_max_y += t_delta_y;
            } else {
                // Exact corner crossing: mark both intermediate cells.
                occupied.insert(self.clamped(ix + step_x, iy));
                occupied.insert(self.clamped(ix, iy + step_y));
                ix += step_x;
                iy += step_y;
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            }
            if t_max_x.min(t_max_y) > 1.0 + 1e-12 && (ix, iy) != (tx, ty) {
                // Remaining crossings lie beyond the segment; land on the
                // endpoint cell directly.
                occupied.insert(self.clamped(ix, iy));
                ix = tx;
                iy = ty;
            }
            occupied.insert(self.clamped(ix, iy));
        }
    }

    fn clamped(&self, ix: i64, iy: i64) -> (i64, i64) {
        (ix.clamp(0, self.cells_x - 1), iy.clamp(0, self.cells_y - 1))
    }
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, r_squared)
}
