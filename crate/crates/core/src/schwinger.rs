//! Closed-form moment machinery for φ = L⁻¹η: truncated Schwinger functions
//!
//!   S_lᵀ(x_1,…,x_l) = c_l Σ_x G(x_1 − x)⋯G(x_l − x) · v,
//!
//! and the full moment functions as partition sums of truncated blocks.
//! On the periodic lattice the block sum is exact, which is what makes the
//! Monte Carlo comparison an honest oracle.

use crate::error::{Error, Result};
use crate::fracop::GreenKernel;
use crate::lattice::{dft_backward_complex, LatticeSpec, MomentumGrid, Spectrum};
use crate::noise::LevyLaw;
use crate::partitions::{set_partitions, SetPartition};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Moment order cap: Bell(8) = 4140 partition terms keeps analytic
/// evaluation and the MC comparison tractable.
pub const MAX_MOMENT_ORDER: usize = 8;

/// Tuple of lattice sites (per-axis coordinates each).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointTuple {
    points: Vec<Vec<usize>>,
}

impl PointTuple {
    pub fn new(lattice: &LatticeSpec, points: Vec<Vec<usize>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("need at least one point".into()));
        }
        for p in &points {
            if p.len() != lattice.dim() {
                return Err(Error::LatticeMismatch(format!(
                    "point has {} coordinates on a {}-dimensional lattice",
                    p.len(),
                    lattice.dim()
                )));
            }
            for (c, n) in p.iter().zip(lattice.extents()) {
                if c >= n {
                    return Err(Error::LatticeMismatch(format!(
                        "coordinate {c} outside extent {n}"
                    )));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<usize>] {
        &self.points
    }

    /// Sub-tuple picking the elements of a block bitmask.
    pub fn select(&self, mask: u32) -> PointTuple {
        PointTuple {
            points: SetPartition::block_elements(mask)
                .into_iter()
                .map(|i| self.points[i].clone())
                .collect(),
        }
    }

    /// All points are pairwise distinct.
    pub fn all_distinct(&self) -> bool {
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                if self.points[i] == self.points[j] {
                    return false;
                }
            }
        }
        true
    }
}

/// Truncated Schwinger function of the block: dispatches to the spectral
/// path when all points are distinct, the direct lattice sum otherwise.
/// Both routes agree to 1e−9 and are exposed for cross-checking.
pub fn truncated_schwinger(points: &PointTuple, green: &GreenKernel, c_l: f64) -> Result<f64> {
    if points.all_distinct() {
        truncated_schwinger_spectral(points, green, c_l)
    } else {
        truncated_schwinger_direct(points, green, c_l)
    }
}

/// Direct evaluation: c_l · v · Σ_x ∏_r G(x_r − x) over the cached kernel.
pub fn truncated_schwinger_direct(
    points: &PointTuple,
    green: &GreenKernel,
    c_l: f64,
) -> Result<f64> {
    let lattice = green.lattice().clone();
    let n = lattice.sites();
    let v = lattice.cell_volume();
    let mut total = 0.0;
    for idx in 0..n {
        let x = lattice.coords_of(idx);
        let mut prod = 1.0;
        for p in points.points() {
            prod *= green.at_difference(p, &x);
        }
        total += prod;
    }
    Ok(c_l * v * total)
}

/// Spectral evaluation: each factor G(x_r − ·) is reconstructed as the
/// inverse transform of the phase-multiplied kernel spectrum, then the
/// pointwise product is summed.
pub fn truncated_schwinger_spectral(
    points: &PointTuple,
    green: &GreenKernel,
    c_l: f64,
) -> Result<f64> {
    let lattice = green.lattice().clone();
    let n = lattice.sites();
    let v = lattice.cell_volume();
    let mut product = vec![Complex64::new(1.0, 0.0); n];
    for p in points.points() {
        let shifted: Vec<Complex64> = green
            .spectral()
            .iter()
            .enumerate()
            .map(|(idx, &ghat)| {
                // phase e^{−ik·x_r} from integer coordinates
                let coords = lattice.coords_of(idx);
                let mut phase = 0.0;
                for (ax, (&kc, &xc)) in coords.iter().zip(p.iter()).enumerate() {
                    let ext = lattice.extents()[ax];
                    let m = MomentumGrid::signed_index(ext, kc) as f64;
                    phase -= TAU * m * xc as f64 / ext as f64;
                }
                Complex64::from_polar(ghat, phase)
            })
            .collect();
        let kernel = dft_backward_complex(&Spectrum::new(lattice.clone(), shifted)?);
        for (acc, k) in product.iter_mut().zip(kernel) {
            *acc *= k;
        }
    }
    let total: Complex64 = product.iter().sum();
    Ok(c_l * v * total.re)
}

/// Full Schwinger function S_n = Σ over partitions of ∏ over blocks of
/// the truncated functions, with cumulants taken from the law.
pub fn schwinger(points: &PointTuple, law: &LevyLaw, green: &GreenKernel) -> Result<f64> {
    let n = points.len();
    if n > MAX_MOMENT_ORDER {
        return Err(Error::OrderOutOfRange(n, 1, MAX_MOMENT_ORDER));
    }
    let mut total = 0.0;
    for partition in set_partitions(n)? {
        let mut prod = 1.0;
        for &mask in partition.blocks() {
            let block = points.select(mask);
            let c = law.cumulant(block.len() as u32);
            if c == 0.0 {
                prod = 0.0;
                break;
            }
            prod *= truncated_schwinger(&block, green, c)?;
        }
        total += prod;
    }
    Ok(total)
}
