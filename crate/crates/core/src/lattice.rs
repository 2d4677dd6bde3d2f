//! Periodic hypercubic lattice geometry, scalar field arrays and the
//! discrete Fourier transform contract.
//!
//! Conventions fixed here and relied on everywhere else:
//! * site indexing is row-major with axis 0 the Euclidean time direction,
//! * the forward transform uses e^{−ik·x} with symmetric 1/√N normalization
//!   in both directions, so Parseval holds with no extra factors,
//! * dual momenta per axis are k = 2π·n/(N·a) with the signed index
//!   n ∈ {−N/2, …, N/2−1} (even N; standard signed frequencies otherwise).

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Periodic hypercubic lattice in d = s+1 Euclidean dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    extents: Vec<usize>,
    spacings: Vec<f64>,
}

impl LatticeSpec {
    /// Build a lattice from per-axis site counts and spacings.
    /// Axis 0 is Euclidean time.
    pub fn new(extents: Vec<usize>, spacings: Vec<f64>) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::InvalidLattice("need at least one axis".into()));
        }
        if extents.len() != spacings.len() {
            return Err(Error::InvalidLattice(format!(
                "{} extents vs {} spacings",
                extents.len(),
                spacings.len()
            )));
        }
        if extents.iter().any(|&n| n < 2) {
            return Err(Error::InvalidLattice("all extents must be >= 2".into()));
        }
        if spacings.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidLattice("all spacings must be > 0".into()));
        }
        let mut total: usize = 1;
        for &n in &extents {
            total = total
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidLattice("site count overflows usize".into()))?;
        }
        // Guard against absurd allocations (complex buffers are 16 B/site).
        if total > (1 << 30) {
            return Err(Error::InvalidLattice(format!(
                "site count {total} too large"
            )));
        }
        Ok(Self { extents, spacings })
    }

    /// Same spacing on every axis.
    pub fn cubic(extent: usize, dim: usize, spacing: f64) -> Result<Self> {
        Self::new(vec![extent; dim], vec![spacing; dim])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    /// Total number of sites.
    pub fn sites(&self) -> usize {
        self.extents.iter().product()
    }

    /// Volume of one lattice cell, ∏ a_i.
    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    /// Row-major flat index of a site given per-axis coordinates.
    pub fn index_of(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim());
        let mut idx = 0;
        for (c, n) in coords.iter().zip(&self.extents) {
            debug_assert!(c < n);
            idx = idx * n + c;
        }
        idx
    }

    /// Per-axis coordinates of a flat index.
    pub fn coords_of(&self, mut idx: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dim()];
        for ax in (0..self.dim()).rev() {
            coords[ax] = idx % self.extents[ax];
            idx /= self.extents[ax];
        }
        coords
    }

    /// Flat index of the site displaced by `shift` (periodically wrapped).
    pub fn wrapped_index(&self, coords: &[usize], shift: &[i64]) -> usize {
        let mut idx = 0;
        for ax in 0..self.dim() {
            let n = self.extents[ax] as i64;
            let c = (coords[ax] as i64 + shift[ax]).rem_euclid(n) as usize;
            idx = idx * self.extents[ax] + c;
        }
        idx
    }

    /// Flat index of the difference site x − y (periodic).
    pub fn difference_index(&self, x: &[usize], y: &[usize]) -> usize {
        let mut idx = 0;
        for ax in 0..self.dim() {
            let n = self.extents[ax] as i64;
            let c = (x[ax] as i64 - y[ax] as i64).rem_euclid(n) as usize;
            idx = idx * self.extents[ax] + c;
        }
        idx
    }
}

/// Real scalar field configuration over a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    lattice: LatticeSpec,
    values: Vec<f64>,
}

impl FieldSample {
    pub fn new(lattice: LatticeSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.sites() {
            return Err(Error::LatticeMismatch(format!(
                "{} values for {} sites",
                values.len(),
                lattice.sites()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::LatticeMismatch("non-finite field value".into()));
        }
        Ok(Self { lattice, values })
    }

    pub fn constant(lattice: LatticeSpec, value: f64) -> Self {
        let n = lattice.sites();
        Self {
            lattice,
            values: vec![value; n],
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Field cyclically shifted by `shift` sites per axis:
    /// result(x) = self(x − shift).
    pub fn shifted(&self, shift: &[i64]) -> FieldSample {
        let lat = &self.lattice;
        let mut out = vec![0.0; self.values.len()];
        let neg: Vec<i64> = shift.iter().map(|s| -s).collect();
        for (idx, slot) in out.iter_mut().enumerate() {
            let coords = lat.coords_of(idx);
            *slot = self.values[lat.wrapped_index(&coords, &neg)];
        }
        FieldSample {
            lattice: lat.clone(),
            values: out,
        }
    }
}

/// Dual momentum grid of a lattice. Bijective with the site grid; the zero
/// momentum sits at flat index 0.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    lattice: LatticeSpec,
}

impl MomentumGrid {
    pub fn new(lattice: LatticeSpec) -> Self {
        Self { lattice }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    /// Signed integer frequency for site index n on an axis of extent N:
    /// n for n < ⌈N/2⌉, n − N otherwise.
    pub fn signed_index(extent: usize, n: usize) -> i64 {
        if n < extent.div_ceil(2) {
            n as i64
        } else {
            n as i64 - extent as i64
        }
    }

    /// Momentum vector at a flat grid index.
    pub fn momentum_at(&self, idx: usize) -> Vec<f64> {
        let coords = self.lattice.coords_of(idx);
        coords
            .iter()
            .enumerate()
            .map(|(ax, &c)| {
                let n = self.lattice.extents()[ax];
                2.0 * PI * Self::signed_index(n, c) as f64 / (n as f64 * self.lattice.spacings()[ax])
            })
            .collect()
    }
}

/// Complex array over the momentum grid, produced by [`dft_forward`].
#[derive(Debug, Clone)]
pub struct Spectrum {
    lattice: LatticeSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(lattice: LatticeSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.sites() {
            return Err(Error::LatticeMismatch(format!(
                "{} spectral values for {} sites",
                values.len(),
                lattice.sites()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn grid(&self) -> MomentumGrid {
        MomentumGrid::new(self.lattice.clone())
    }
}

/// Apply an FFT along every axis of a row-major complex array.
fn fft_all_axes(lattice: &LatticeSpec, data: &mut [Complex64], forward: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let dims = lattice.extents().to_vec();
    let total = lattice.sites();
    for ax in 0..dims.len() {
        let n = dims[ax];
        let fft: Arc<dyn rustfft::Fft<f64>> = if forward {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        // stride between consecutive elements along `ax`; lines = total / n.
        let inner: usize = dims[ax + 1..].iter().product();
        let outer: usize = dims[..ax].iter().product();
        let mut line = vec![Complex64::default(); n];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * n * inner + i;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * inner];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * inner] = *v;
                }
            }
        }
    }
    let scale = 1.0 / (total as f64).sqrt();
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Forward DFT: f̂(k) = N^{−1/2} Σ_x f(x) e^{−ik·x}.
pub fn dft_forward(field: &FieldSample) -> Spectrum {
    let mut data: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_all_axes(field.lattice(), &mut data, true);
    Spectrum {
        lattice: field.lattice().clone(),
        values: data,
    }
}

/// Forward DFT of an already-complex array (used by spectral cross-checks).
pub fn dft_forward_complex(lattice: &LatticeSpec, mut data: Vec<Complex64>) -> Result<Spectrum> {
    if data.len() != lattice.sites() {
        return Err(Error::LatticeMismatch("spectral length mismatch".into()));
    }
    fft_all_axes(lattice, &mut data, true);
    Ok(Spectrum {
        lattice: lattice.clone(),
        values: data,
    })
}

/// Inverse DFT to a complex position-space array.
pub fn dft_backward_complex(spectrum: &Spectrum) -> Vec<Complex64> {
    let mut data = spectrum.values().to_vec();
    fft_all_axes(spectrum.lattice(), &mut data, false);
    data
}

/// Inverse DFT to a real field. The input must carry Hermitian symmetry:
/// the imaginary residue of the back-transform is required to stay below
/// 1e−10 of the result norm, then discarded.
pub fn dft_backward(spectrum: &Spectrum) -> Result<FieldSample> {
    let data = dft_backward_complex(spectrum);
    let norm: f64 = data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let imag: f64 = data.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    let limit = 1e-10 * norm.max(f64::MIN_POSITIVE);
    if imag > limit {
        return Err(Error::NotHermitian {
            residue: imag,
            limit,
        });
    }
    Ok(FieldSample {
        lattice: spectrum.lattice().clone(),
        values: data.into_iter().map(|c| c.re).collect(),
    })
}
