//! Momentum-space densities of the truncated relativistic functions and the
//! finitely checkable axiom content: spectral support, hermiticity, Lorentz
//! invariance, positivity, plus the two-point analytic-continuation identity
//! that pins the normalization conventions end to end.
//!
//! The overall δ(Σk) is never represented: callers work on the Σk = 0
//! hyperplane (n−1 free momenta, the last one derived) and densities are
//! reported with respect to ∏_{l<n} dk_l. The mass-shell δ of the n = 2,
//! α = 1/2 case is handled by explicit shell parameterization with the
//! 1/(2ω) weight.

use crate::error::{Error, Result};
use crate::fracop::green_continuum;
use crate::noise::stream_rng;
use crate::quad;
use crate::report::{AxiomReport, Violation};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Momentum in s+1 dimensional Minkowski space, signature k² = (k⁰)² − |k⃗|².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiMomentum {
    pub k0: f64,
    pub kvec: Vec<f64>,
}

impl MinkowskiMomentum {
    pub fn new(k0: f64, kvec: Vec<f64>) -> Self {
        Self { k0, kvec }
    }

    pub fn s(&self) -> usize {
        self.kvec.len()
    }

    /// Invariant square k² = (k⁰)² − |k⃗|².
    pub fn squared(&self) -> f64 {
        self.k0 * self.k0 - self.kvec.iter().map(|k| k * k).sum::<f64>()
    }

    /// Euclidean norm square (k⁰)² + |k⃗|², the |k|² of the Schwartz weights.
    pub fn euclidean_sq(&self) -> f64 {
        self.k0 * self.k0 + self.kvec.iter().map(|k| k * k).sum::<f64>()
    }

    pub fn neg(&self) -> Self {
        Self {
            k0: -self.k0,
            kvec: self.kvec.iter().map(|k| -k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            k0: self.k0 + other.k0,
            kvec: self
                .kvec
                .iter()
                .zip(&other.kvec)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Proper orthochronous boost with rapidity χ along spatial axis `axis`.
    pub fn boosted(&self, rapidity: f64, axis: usize) -> Self {
        let ch = rapidity.cosh();
        let sh = rapidity.sinh();
        let mut kvec = self.kvec.clone();
        let k0 = ch * self.k0 + sh * kvec[axis];
        kvec[axis] = sh * self.k0 + ch * kvec[axis];
        Self { k0, kvec }
    }

    /// Membership in the closed backward cone V̄₀⁻ within tolerance.
    pub fn in_backward_cone(&self, tol: f64) -> bool {
        self.squared() >= -tol && self.k0 <= tol
    }

    pub fn as_components(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.kvec.len());
        v.push(self.k0);
        v.extend_from_slice(&self.kvec);
        v
    }
}

/// Model parameters of the density evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    /// Exponent α ∈ (0, 1/2]; pointwise densities need α < 1/2 at n = 2.
    pub alpha: f64,
    pub mass: f64,
    /// Spatial dimension s (space-time dimension s+1).
    pub s: usize,
    /// |k² − m²| below this raises a shell-singularity error instead of
    /// returning a huge number.
    pub shell_tol: f64,
}

impl DensityParams {
    pub fn new(alpha: f64, mass: f64, s: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1/2], got {alpha}"
            )));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter("mass must be > 0".into()));
        }
        if s == 0 {
            return Err(Error::InvalidParameter("need at least one spatial axis".into()));
        }
        Ok(Self {
            alpha,
            mass,
            s,
            shell_tol: 1e-12,
        })
    }

    fn prefactor(&self) -> f64 {
        (2.0 * PI).powf(-((self.s as f64 + 1.0) / 2.0))
    }

    fn shell_offset(&self, k: &MinkowskiMomentum) -> f64 {
        k.squared() - self.mass * self.mass
    }

    fn guard(&self, k: &MinkowskiMomentum) -> Result<f64> {
        let u = self.shell_offset(k);
        if u.abs() < self.shell_tol {
            return Err(Error::ShellSingularity {
                offset: u,
                tol: self.shell_tol,
            });
        }
        Ok(u)
    }

    /// ω(k⃗) = √(|k⃗|² + m²).
    pub fn omega(&self, kvec: &[f64]) -> f64 {
        (kvec.iter().map(|k| k * k).sum::<f64>() + self.mass * self.mass).sqrt()
    }
}

/// μ⁺_α: supported on {k² > m², k⁰ > 0}.
pub fn mu_plus(params: &DensityParams, k: &MinkowskiMomentum) -> Result<f64> {
    let u = params.guard(k)?;
    Ok(mu_plus_at(params, u, k.k0))
}

/// μ⁻_α: supported on {k² > m², k⁰ < 0}.
pub fn mu_minus(params: &DensityParams, k: &MinkowskiMomentum) -> Result<f64> {
    let u = params.guard(k)?;
    Ok(mu_minus_at(params, u, k.k0))
}

/// μ_α: cos(πα) above the shell plus the full weight below it.
pub fn mu_zero(params: &DensityParams, k: &MinkowskiMomentum) -> Result<f64> {
    let u = params.guard(k)?;
    Ok(mu_zero_at(params, u))
}

fn mu_plus_at(params: &DensityParams, u: f64, k0: f64) -> f64 {
    if u > 0.0 && k0 > 0.0 {
        params.prefactor() * (PI * params.alpha).sin() * u.powf(-params.alpha)
    } else {
        0.0
    }
}

fn mu_minus_at(params: &DensityParams, u: f64, k0: f64) -> f64 {
    if u > 0.0 && k0 < 0.0 {
        params.prefactor() * (PI * params.alpha).sin() * u.powf(-params.alpha)
    } else {
        0.0
    }
}

fn mu_zero_at(params: &DensityParams, u: f64) -> f64 {
    let indicator = if u > 0.0 {
        (PI * params.alpha).cos()
    } else {
        1.0
    };
    params.prefactor() * indicator * u.abs().powf(-params.alpha)
}

/// Deliberate defects injected by negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityVariant {
    Standard,
    /// Replace μ⁻ by μ⁺ in one prefix slot (0-based); breaks the spectral
    /// support.
    SwapConeSlot(usize),
}

/// Combinatorial prefactor c_n′ = c_n · 2^{n−1} · (2π)^{s+1}.
pub fn density_prefactor(params: &DensityParams, n: usize, c_n: f64) -> f64 {
    c_n * 2f64.powi(n as i32 - 1) * (2.0 * PI).powi(params.s as i32 + 1)
}

fn validate_density_domain(params: &DensityParams, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::OrderOutOfRange(n, 2, usize::MAX));
    }
    if n == 2 && params.alpha >= 0.5 {
        return Err(Error::Domain(
            "n = 2 with alpha = 1/2 lives on the mass shell; use the shell density".into(),
        ));
    }
    Ok(())
}

fn check_momentum_sum(momenta: &[MinkowskiMomentum]) -> Result<()> {
    let mut total = momenta[0].clone();
    for k in &momenta[1..] {
        total = total.add(k);
    }
    let residue = total
        .as_components()
        .iter()
        .fold(0.0f64, |acc, c| acc.max(c.abs()));
    if residue > 1e-12 {
        return Err(Error::MomentumConstraint(residue));
    }
    Ok(())
}

/// Truncated density on the Σk = 0 hyperplane:
///   c_n′ Σ_{j=1..n} [∏_{l<j} μ⁻(k_l)] μ₀(k_j) [∏_{l>j} μ⁺(k_l)],
/// with empty products equal to 1. Factored prefix/suffix evaluation.
pub fn wightman_truncated_density(
    params: &DensityParams,
    c_n: f64,
    momenta: &[MinkowskiMomentum],
) -> Result<f64> {
    wightman_truncated_density_variant(params, c_n, momenta, DensityVariant::Standard)
}

/// Variant-aware factored evaluation (the mutant hooks live here).
pub fn wightman_truncated_density_variant(
    params: &DensityParams,
    c_n: f64,
    momenta: &[MinkowskiMomentum],
    variant: DensityVariant,
) -> Result<f64> {
    let n = momenta.len();
    validate_density_domain(params, n)?;
    check_momentum_sum(momenta)?;
    let mut minus = Vec::with_capacity(n);
    let mut zero = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    for (idx, k) in momenta.iter().enumerate() {
        let u = params.guard(k)?;
        let m = match variant {
            DensityVariant::SwapConeSlot(slot) if slot == idx => mu_plus_at(params, u, k.k0),
            _ => mu_minus_at(params, u, k.k0),
        };
        minus.push(m);
        zero.push(mu_zero_at(params, u));
        plus.push(mu_plus_at(params, u, k.k0));
    }
    // prefix[j] = ∏_{l<j} μ⁻, suffix[j] = ∏_{l>j} μ⁺
    let mut prefix = vec![1.0; n];
    for j in 1..n {
        prefix[j] = prefix[j - 1] * minus[j - 1];
    }
    let mut suffix = vec![1.0; n];
    for j in (0..n - 1).rev() {
        suffix[j] = suffix[j + 1] * plus[j + 1];
    }
    let mut total = 0.0;
    for j in 0..n {
        total += prefix[j] * zero[j] * suffix[j];
    }
    Ok(density_prefactor(params, n, c_n) * total)
}

/// Quadrature-friendly evaluation: momenta closer to the shell than
/// `shell_tol` are clamped to that distance instead of raising an error, so
/// cubature nodes that land arbitrarily close to the singular set see a
/// bounded spike (the clamped set has measure ≲ tol and the singularity is
/// integrable, so the induced bias is far below quadrature tolerances).
pub fn wightman_truncated_density_clamped(
    params: &DensityParams,
    c_n: f64,
    momenta: &[MinkowskiMomentum],
) -> f64 {
    let n = momenta.len();
    let mut prefix = 1.0;
    let mut total = 0.0;
    // suffix products of μ⁺ beyond each j
    let mut suffix = vec![1.0; n + 1];
    for j in (0..n).rev() {
        let k = &momenta[j];
        let u = clamp_offset(params, k);
        suffix[j] = suffix[j + 1] * mu_plus_at(params, u, k.k0);
    }
    for (j, k) in momenta.iter().enumerate() {
        let u = clamp_offset(params, k);
        total += prefix * mu_zero_at(params, u) * suffix[j + 1];
        prefix *= mu_minus_at(params, u, k.k0);
    }
    density_prefactor(params, n, c_n) * total
}

fn clamp_offset(params: &DensityParams, k: &MinkowskiMomentum) -> f64 {
    let u = params.shell_offset(k);
    if u.abs() < params.shell_tol {
        if u >= 0.0 {
            params.shell_tol
        } else {
            -params.shell_tol
        }
    } else {
        u
    }
}

/// Same sum evaluated term by term with naive products; cross-checks the
/// factored path to 1e−12.
pub fn wightman_truncated_density_term_sum(
    params: &DensityParams,
    c_n: f64,
    momenta: &[MinkowskiMomentum],
) -> Result<f64> {
    let n = momenta.len();
    validate_density_domain(params, n)?;
    check_momentum_sum(momenta)?;
    let mut total = 0.0;
    for j in 0..n {
        let mut term = mu_zero(params, &momenta[j])?;
        for (l, k) in momenta.iter().enumerate() {
            if l < j {
                term *= mu_minus(params, k)?;
            } else if l > j {
                term *= mu_plus(params, k)?;
            }
        }
        total += term;
    }
    Ok(density_prefactor(params, n, c_n) * total)
}

/// Energy branch of a mass-shell point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    PositiveEnergy,
    NegativeEnergy,
}

/// Point on the mass shell k² = m², parameterized by the spatial momentum
/// and an explicit branch (never inferred from a float sign).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassShellPoint {
    pub kvec: Vec<f64>,
    pub branch: Branch,
}

impl MassShellPoint {
    pub fn momentum(&self, mass: f64) -> MinkowskiMomentum {
        let omega = (self.kvec.iter().map(|k| k * k).sum::<f64>() + mass * mass).sqrt();
        let k0 = match self.branch {
            Branch::PositiveEnergy => omega,
            Branch::NegativeEnergy => -omega,
        };
        MinkowskiMomentum::new(k0, self.kvec.clone())
    }
}

/// Two-point density at n = 2, α = 1/2, with respect to d^s k on the shell:
/// 2π c₂ / (2ω) on the negative-energy branch, zero on the positive one.
pub fn two_point_shell_density(mass: f64, point: &MassShellPoint, c_2: f64) -> f64 {
    match point.branch {
        Branch::PositiveEnergy => 0.0,
        Branch::NegativeEnergy => {
            let omega = (point.kvec.iter().map(|k| k * k).sum::<f64>() + mass * mass).sqrt();
            2.0 * PI * c_2 / (2.0 * omega)
        }
    }
}

/// Full (non-truncated) density at a hyperplane point: the partition sum of
/// products of truncated densities, where a partition contributes only when
/// every one of its blocks separately conserves momentum. Singleton blocks
/// would require an exactly vanishing momentum and never fire on the generic
/// and pair-stratified grids used here.
pub fn full_wightman_density(
    params: &DensityParams,
    cumulants: &[f64],
    momenta: &[MinkowskiMomentum],
    block_tol: f64,
) -> Result<f64> {
    let n = momenta.len();
    if n < 2 || n > 6 {
        return Err(Error::OrderOutOfRange(n, 2, 6));
    }
    check_momentum_sum(momenta)?;
    if cumulants.len() < n {
        return Err(Error::InvalidParameter(format!(
            "need cumulants c_1..c_{n}, got {}",
            cumulants.len()
        )));
    }
    let mut total = 0.0;
    'partitions: for partition in crate::partitions::set_partitions(n)? {
        let mut product = 1.0;
        for &mask in partition.blocks() {
            let block: Vec<MinkowskiMomentum> =
                crate::partitions::SetPartition::block_elements(mask)
                    .into_iter()
                    .map(|i| momenta[i].clone())
                    .collect();
            let mut sum = block[0].clone();
            for k in &block[1..] {
                sum = sum.add(k);
            }
            let residue = sum
                .as_components()
                .iter()
                .fold(0.0f64, |acc, c| acc.max(c.abs()));
            if residue > block_tol {
                continue 'partitions;
            }
            if block.len() == 1 {
                // δ(k) stratum: not sampled by the grids used here
                continue 'partitions;
            }
            product *= wightman_truncated_density(params, cumulants[block.len() - 1], &block)?;
        }
        total += product;
    }
    Ok(total)
}

/// Pseudo-random grid over the Σk = 0 hyperplane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub seed: u64,
    /// Uniform box half-width for each momentum component, in units of m.
    pub k_max_over_m: f64,
    /// Points closer than this to any single-momentum shell are resampled
    /// (offset grids avoid the singular set by construction).
    pub min_shell_distance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 10_000,
            seed: 7,
            k_max_over_m: 3.0,
            min_shell_distance: 1e-9,
        }
    }
}

/// Draw one hyperplane tuple (n−1 free momenta uniform in the box, the last
/// derived), resampling until every momentum clears the shell guard.
fn sample_hyperplane_tuple<R: Rng>(
    params: &DensityParams,
    n: usize,
    grid: &GridSpec,
    rng: &mut R,
) -> Vec<MinkowskiMomentum> {
    let kmax = grid.k_max_over_m * params.mass;
    loop {
        let mut momenta: Vec<MinkowskiMomentum> = (0..n - 1)
            .map(|_| {
                MinkowskiMomentum::new(
                    rng.gen_range(-kmax..kmax),
                    (0..params.s).map(|_| rng.gen_range(-kmax..kmax)).collect(),
                )
            })
            .collect();
        let mut last = momenta[0].neg();
        for k in &momenta[1..] {
            last = last.add(&k.neg());
        }
        momenta.push(last);
        let clear = momenta
            .iter()
            .all(|k| params.shell_offset(k).abs() >= grid.min_shell_distance);
        if clear {
            return momenta;
        }
    }
}

/// Spectral support (backward-cone) check: wherever the truncated density is
/// nonzero, every partial sum q_r = k₁+…+k_r (r < n) must lie in V̄₀⁻.
pub fn check_spectral_support(
    params: &DensityParams,
    n: usize,
    c_n: f64,
    grid: &GridSpec,
    variant: DensityVariant,
) -> Result<AxiomReport> {
    let cone_tol = 1e-12;
    let mut violations = Vec::new();
    let mut rng = stream_rng(grid.seed, 0);
    let mut checked = 0;

    if n == 2 && params.alpha == 0.5 {
        // shell case: the support is the negative-energy mass shell itself
        let kmax = grid.k_max_over_m * params.mass;
        for _ in 0..grid.points {
            let kvec: Vec<f64> = (0..params.s).map(|_| rng.gen_range(-kmax..kmax)).collect();
            let point = MassShellPoint {
                kvec,
                branch: Branch::NegativeEnergy,
            };
            let density = two_point_shell_density(params.mass, &point, c_n);
            checked += 1;
            if density != 0.0 {
                let k1 = point.momentum(params.mass);
                if !k1.in_backward_cone(cone_tol) {
                    violations.push(Violation {
                        momenta: vec![k1.as_components()],
                        value: density,
                        reason: "shell point outside the closed backward cone".into(),
                    });
                }
            }
        }
    } else {
        for _ in 0..grid.points {
            let momenta = sample_hyperplane_tuple(params, n, grid, &mut rng);
            let density =
                wightman_truncated_density_variant(params, c_n, &momenta, variant)?;
            checked += 1;
            if density != 0.0 {
                let mut partial = MinkowskiMomentum::new(0.0, vec![0.0; params.s]);
                for (r, k) in momenta.iter().take(n - 1).enumerate() {
                    partial = partial.add(k);
                    if !partial.in_backward_cone(cone_tol) {
                        violations.push(Violation {
                            momenta: momenta.iter().map(|k| k.as_components()).collect(),
                            value: density,
                            reason: format!(
                                "partial sum q_{} outside the closed backward cone (q² = {:.6e}, q⁰ = {:.6e})",
                                r + 1,
                                partial.squared(),
                                partial.k0
                            ),
                        });
                        break;
                    }
                }
            }
        }
    }
    Ok(AxiomReport {
        axiom: "spectral-support".into(),
        n,
        alpha: params.alpha,
        points_checked: checked,
        violations,
    })
}

/// Hermiticity at the density level: D(k₁,…,k_n) = D(−k_n,…,−k₁).
pub fn check_hermiticity(
    params: &DensityParams,
    n: usize,
    c_n: f64,
    grid: &GridSpec,
) -> Result<AxiomReport> {
    let mut violations = Vec::new();
    let mut rng = stream_rng(grid.seed, 1);
    for _ in 0..grid.points {
        let momenta = sample_hyperplane_tuple(params, n, grid, &mut rng);
        let reversed: Vec<MinkowskiMomentum> = momenta.iter().rev().map(|k| k.neg()).collect();
        let a = wightman_truncated_density(params, c_n, &momenta)?;
        let b = wightman_truncated_density(params, c_n, &reversed)?;
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
            violations.push(Violation {
                momenta: momenta.iter().map(|k| k.as_components()).collect(),
                value: a - b,
                reason: format!("density {a:.9e} vs reversed {b:.9e}"),
            });
        }
    }
    Ok(AxiomReport {
        axiom: "hermiticity".into(),
        n,
        alpha: params.alpha,
        points_checked: grid.points,
        violations,
    })
}

/// Lorentz invariance of the densities under proper orthochronous boosts
/// (and the documented non-invariance under the improper reflection
/// k⁰ → −k⁰ used as a negative control).
pub fn check_lorentz_invariance(
    params: &DensityParams,
    n: usize,
    c_n: f64,
    rapidities: &[f64],
    grid: &GridSpec,
) -> Result<AxiomReport> {
    let tol = 1e-10;
    // boosted k² is only float-exact to ~|k|² ε; keep the grid away from the
    // shell so |u|^{−α} cannot amplify that rounding beyond tol
    let grid = GridSpec {
        min_shell_distance: grid.min_shell_distance.max(1e-4),
        ..*grid
    };
    let mut violations = Vec::new();
    let mut rng = stream_rng(grid.seed, 2);
    let mut checked = 0;
    'outer: for _ in 0..grid.points {
        let momenta = sample_hyperplane_tuple(params, n, &grid, &mut rng);
        let reference = wightman_truncated_density(params, c_n, &momenta)?;
        for (bi, &chi) in rapidities.iter().enumerate() {
            let axis = bi % params.s;
            let boosted: Vec<MinkowskiMomentum> =
                momenta.iter().map(|k| k.boosted(chi, axis)).collect();
            if boosted
                .iter()
                .any(|k| params.shell_offset(k).abs() < params.shell_tol)
            {
                continue;
            }
            let transformed = wightman_truncated_density(params, c_n, &boosted)?;
            checked += 1;
            if (transformed - reference).abs()
                > tol * reference.abs().max(transformed.abs()).max(1.0)
            {
                violations.push(Violation {
                    momenta: momenta.iter().map(|k| k.as_components()).collect(),
                    value: transformed - reference,
                    reason: format!(
                        "density changed under boost χ = {chi} on axis {axis}: {reference:.9e} vs {transformed:.9e}"
                    ),
                });
                if violations.len() > 32 {
                    break 'outer;
                }
            }
        }
    }
    Ok(AxiomReport {
        axiom: "lorentz-invariance".into(),
        n,
        alpha: params.alpha,
        points_checked: checked,
        violations,
    })
}

/// Positivity of the full density when every cumulant is nonnegative.
/// Checks generic hyperplane points and, for even n, pair-stratified points
/// (k, −k, q, −q, …) where products of lower truncated densities enter.
pub fn check_positivity(
    params: &DensityParams,
    n: usize,
    cumulants: &[f64],
    grid: &GridSpec,
) -> Result<AxiomReport> {
    let floor = -1e-12;
    let mut violations = Vec::new();
    let mut rng = stream_rng(grid.seed, 3);
    let mut record = |momenta: &[MinkowskiMomentum], value: f64| {
        if value < floor {
            violations.push(Violation {
                momenta: momenta.iter().map(|k| k.as_components()).collect(),
                value,
                reason: "full density below the positivity floor".into(),
            });
        }
    };
    let mut checked = 0;
    for _ in 0..grid.points {
        let momenta = sample_hyperplane_tuple(params, n, grid, &mut rng);
        let value = full_wightman_density(params, cumulants, &momenta, 1e-9)?;
        checked += 1;
        record(&momenta, value);
    }
    if n % 2 == 0 {
        // pair-stratified points: each consecutive pair sums to zero
        let kmax = grid.k_max_over_m * params.mass;
        for _ in 0..grid.points / 4 {
            let mut momenta = Vec::with_capacity(n);
            for _ in 0..n / 2 {
                let k = MinkowskiMomentum::new(
                    rng.gen_range(-kmax..kmax),
                    (0..params.s).map(|_| rng.gen_range(-kmax..kmax)).collect(),
                );
                momenta.push(k.clone());
                momenta.push(k.neg());
            }
            if momenta
                .iter()
                .any(|k| params.shell_offset(k).abs() < grid.min_shell_distance)
            {
                continue;
            }
            let value = full_wightman_density(params, cumulants, &momenta, 1e-9)?;
            checked += 1;
            record(&momenta, value);
        }
    }
    Ok(AxiomReport {
        axiom: "positivity".into(),
        n,
        alpha: params.alpha,
        points_checked: checked,
        violations,
    })
}

// ─── Two-point analytic continuation ────────────────────────────────────

/// Euclidean two-point value from the mass-shell measure (n = 2, α = 1/2,
/// s = 1): the Laplace–Fourier integral of the shell density,
///   S₂ᵀ(τ, ξ) = (c₂/2π) ∫₀^∞ cos(kξ) e^{−ω(k)|τ|} / ω(k) dk,
/// for Euclidean time separation τ ≠ 0 and spatial separation ξ.
pub fn shell_two_point_function(mass: f64, c_2: f64, tau: f64, xi: f64) -> Result<f64> {
    if tau == 0.0 {
        return Err(Error::Domain(
            "coincident Euclidean times are rejected".into(),
        ));
    }
    let t = tau.abs();
    // e^{−ωτ} is negligible once ω > 745/τ
    let omega_cut = 750.0 / t;
    if omega_cut <= mass {
        return Ok(0.0);
    }
    let k_cut = (omega_cut * omega_cut - mass * mass).sqrt();
    let integrand = |k: f64| {
        let omega = (k * k + mass * mass).sqrt();
        (k * xi).cos() * (-omega * t).exp() / omega
    };
    let val = quad::integrate_1d(integrand, 0.0, k_cut, &[], 1e-10, 1e-280, 40_000)?;
    Ok(c_2 / (2.0 * PI) * val)
}

/// Euclidean two-point value from the absolutely continuous density
/// (n = 2, α < 1/2, s = 1):
///   S₂ᵀ(τ, ξ) = (2π)^{−2} · 2 c₂ sin(2πα) ·
///               2∫₀^∞ dk cos(kξ) ∫₀^∞ du u^{−2α} e^{−|τ|√(u+ω²)} / (2√(u+ω²)).
pub fn ac_two_point_function(
    params: &DensityParams,
    c_2: f64,
    tau: f64,
    xi: f64,
) -> Result<f64> {
    if params.alpha >= 0.5 {
        return Err(Error::Domain("the AC route needs alpha < 1/2".into()));
    }
    if params.s != 1 {
        return Err(Error::Domain("continuation check is s = 1 only".into()));
    }
    if tau == 0.0 {
        return Err(Error::Domain(
            "coincident Euclidean times are rejected".into(),
        ));
    }
    let t = tau.abs();
    let m = params.mass;
    let beta = 2.0 * params.alpha;
    let omega_cut = 750.0 / t;
    if omega_cut <= m {
        return Ok(0.0);
    }
    let k_cut = (omega_cut * omega_cut - m * m).sqrt();
    let inner = |k: f64| {
        let omega2 = k * k + m * m;
        let u_cut = (omega_cut * omega_cut - omega2).max(0.0);
        quad::integrate_power_singular(
            |u| {
                let q = (u + omega2).sqrt();
                (-t * q).exp() / (2.0 * q)
            },
            u_cut,
            beta,
            1e-9,
            4_000,
        )
        .unwrap_or(0.0)
    };
    let outer = quad::integrate_1d(
        |k| (k * xi).cos() * inner(k),
        0.0,
        k_cut,
        &[],
        1e-8,
        1e-280,
        20_000,
    )?;
    let prefactor = (2.0 * PI).powi(-2) * 2.0 * c_2 * (2.0 * PI * params.alpha).sin();
    Ok(prefactor * 2.0 * outer)
}

/// One row of the continuation comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationRow {
    pub tau: f64,
    pub xi: f64,
    pub shell_value: f64,
    pub green_value: f64,
    pub rel_error: f64,
}

/// Continuation identity report, including the large-τ mass read-off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub check: String,
    pub alpha: f64,
    pub mass: f64,
    pub rows: Vec<ContinuationRow>,
    pub max_rel_error: f64,
    pub log_slope: f64,
    pub log_slope_target: f64,
}

/// Verify S₂ᵀ from the relativistic shell measure against the independent
/// continuum kernel of (−Δ + m²)^{2α} at Euclidean separations. Primary case
/// α = 1/2 (exact shell oracle); α < 1/2 goes through the AC density.
/// The mass read-off comes from the log-slope between mτ = 25 and 30, where
/// the curvature correction 1/(2mτ) is inside the 2% window.
pub fn continuation_check_n2(
    alpha: f64,
    mass: f64,
    c_2: f64,
    separations: &[(f64, f64)],
) -> Result<ContinuationReport> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1/2]".into()));
    }
    let params = DensityParams::new(alpha, mass, 1)?;
    let euclid = |tau: f64, xi: f64| -> Result<f64> {
        if alpha == 0.5 {
            shell_two_point_function(mass, c_2, tau, xi)
        } else {
            ac_two_point_function(&params, c_2, tau, xi)
        }
    };
    let mut rows = Vec::with_capacity(separations.len());
    let mut max_rel = 0.0f64;
    for &(tau, xi) in separations {
        let shell_value = euclid(tau, xi)?;
        let r = (tau * tau + xi * xi).sqrt();
        let green_value = c_2 * green_continuum(2.0 * alpha, mass, 2, r)?;
        let rel = crate::util::rel_diff(shell_value, green_value);
        max_rel = max_rel.max(rel);
        rows.push(ContinuationRow {
            tau,
            xi,
            shell_value,
            green_value,
            rel_error: rel,
        });
    }
    let t1 = 25.0 / mass;
    let t2 = 30.0 / mass;
    let s1 = euclid(t1, 0.0)?;
    let s2 = euclid(t2, 0.0)?;
    let log_slope = (s2.ln() - s1.ln()) / (t2 - t1);
    Ok(ContinuationReport {
        check: "two-point-continuation".into(),
        alpha,
        mass,
        rows,
        max_rel_error: max_rel,
        log_slope,
        log_slope_target: -mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rel_diff;

    fn params(alpha: f64) -> DensityParams {
        DensityParams::new(alpha, 1.0, 1).unwrap()
    }

    fn mk(k0: f64, k1: f64) -> MinkowskiMomentum {
        MinkowskiMomentum::new(k0, vec![k1])
    }

    #[test]
    fn mu_plus_vanishes_for_negative_energy() {
        let p = params(0.25);
        assert_eq!(mu_plus(&p, &mk(-2.0, 0.3)).unwrap(), 0.0);
    }

    #[test]
    fn mu_values_at_reference_points() {
        // s = 1, α = 1/4, m = 1, k = (2, 0): μ⁺ = (2π)^{−1} sin(π/4) 3^{−1/4}
        let p = params(0.25);
        let expected = (2.0 * PI).powi(-1) * (PI / 4.0).sin() * 3.0f64.powf(-0.25);
        assert!(rel_diff(mu_plus(&p, &mk(2.0, 0.0)).unwrap(), expected) < 1e-14);
        // spacelike k² = −1: μ₀ = (2π)^{−1} · 2^{−1/4}
        let k = mk(0.0, 1.0); // k² = −1, |k²−m²| = 2
        let expected = (2.0 * PI).powi(-1) * 2.0f64.powf(-0.25);
        assert!(rel_diff(mu_zero(&p, &k).unwrap(), expected) < 1e-14);
        assert_eq!(mu_plus(&p, &k).unwrap(), 0.0);
        assert_eq!(mu_minus(&p, &k).unwrap(), 0.0);
    }

    #[test]
    fn on_shell_evaluation_is_an_error() {
        let p = params(0.25);
        let omega: f64 = (0.5f64 * 0.5 + 1.0).sqrt();
        let res = mu_zero(&p, &mk(omega, 0.5));
        assert!(matches!(res, Err(Error::ShellSingularity { .. })));
    }

    #[test]
    fn densities_need_zero_total_momentum() {
        let p = params(0.25);
        let res = wightman_truncated_density(&p, 1.0, &[mk(-3.0, 0.0), mk(1.5, 0.2)]);
        assert!(matches!(res, Err(Error::MomentumConstraint(_))));
    }

    #[test]
    fn factored_and_term_sum_paths_agree() {
        let p = params(0.25);
        let k1 = mk(-3.0, 0.0);
        let k2 = mk(1.5, 0.2);
        let k3 = k1.add(&k2).neg();
        let momenta = [k1, k2, k3];
        let a = wightman_truncated_density(&p, 0.7, &momenta).unwrap();
        let b = wightman_truncated_density_term_sum(&p, 0.7, &momenta).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        assert!(a != 0.0);
    }

    #[test]
    fn all_spacelike_three_point_density_vanishes() {
        // all three momenta spacelike: every indicator chain dies
        let p = params(0.25);
        let k1 = mk(0.1, 2.0);
        let k2 = mk(0.1, -1.0);
        let k3 = k1.add(&k2).neg(); // (−0.2, −1.0): k² = 0.04 − 1 < 0
        let momenta = [k1, k2, k3];
        for k in &momenta {
            assert!(k.squared() < 1.0);
        }
        let d = wightman_truncated_density(&p, 1.0, &momenta).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn n3_single_surviving_term_when_one_momentum_timelike() {
        // k₂ spacelike forces μ±(k₂) = 0: only the j = 2 term can survive
        let p = params(0.25);
        let k1 = mk(-3.0, 0.1); // backward timelike above shell
        let k2 = mk(0.2, 1.5); // spacelike
        let k3 = k1.add(&k2).neg(); // (2.8, −1.6): k² = 7.84 − 2.56 = 5.28 > 1, k⁰ > 0
        let momenta = [k1.clone(), k2.clone(), k3.clone()];
        let d = wightman_truncated_density(&p, 1.0, &momenta).unwrap();
        let expected = density_prefactor(&p, 3, 1.0)
            * mu_minus(&p, &k1).unwrap()
            * mu_zero(&p, &k2).unwrap()
            * mu_plus(&p, &k3).unwrap();
        assert!(rel_diff(d, expected) < 1e-13);
        assert!(d != 0.0);
    }

    #[test]
    fn shell_density_branches() {
        let point = MassShellPoint {
            kvec: vec![0.0],
            branch: Branch::PositiveEnergy,
        };
        assert_eq!(two_point_shell_density(1.0, &point, 1.0), 0.0);
        let point = MassShellPoint {
            kvec: vec![0.0],
            branch: Branch::NegativeEnergy,
        };
        // ∝ 1/(2m) at rest
        let expected = 2.0 * PI / 2.0;
        assert!(rel_diff(two_point_shell_density(1.0, &point, 1.0), expected) < 1e-14);
    }

    #[test]
    fn shell_ball_integral_finite_and_mass_decreasing() {
        let integral = |m: f64| {
            quad::integrate_1d(
                |k| {
                    let point = MassShellPoint {
                        kvec: vec![k],
                        branch: Branch::NegativeEnergy,
                    };
                    two_point_shell_density(m, &point, 1.0)
                },
                -3.0,
                3.0,
                &[],
                1e-10,
                0.0,
                4_000,
            )
            .unwrap()
        };
        let a = integral(1.0);
        let b = integral(2.0);
        assert!(a.is_finite() && b.is_finite());
        assert!(b < a);
    }

    #[test]
    fn support_check_passes_and_mutant_fails() {
        let p = params(0.25);
        let grid = GridSpec {
            points: 20_000,
            ..Default::default()
        };
        for n in [2usize, 3, 4] {
            let report =
                check_spectral_support(&p, n, 1.0, &grid, DensityVariant::Standard).unwrap();
            assert!(report.passed(), "n = {n}: {:?}", report.violations.first());
            assert_eq!(report.points_checked, 20_000);
        }
        // shell case n = 2, α = 1/2
        let p_shell = params(0.5);
        let report =
            check_spectral_support(&p_shell, 2, 1.0, &grid, DensityVariant::Standard).unwrap();
        assert!(report.passed());
        // mutant: swapping μ⁻ → μ⁺ in slot 0 must produce violations
        let report =
            check_spectral_support(&p, 3, 1.0, &grid, DensityVariant::SwapConeSlot(0)).unwrap();
        assert!(!report.passed(), "mutant slipped through");
    }

    #[test]
    fn hermiticity_holds_on_random_points() {
        let p = params(0.25);
        let grid = GridSpec {
            points: 5_000,
            ..Default::default()
        };
        for n in [2usize, 3, 4] {
            let report = check_hermiticity(&p, n, 0.9, &grid).unwrap();
            assert!(report.passed(), "n = {n}");
        }
    }

    #[test]
    fn lorentz_invariance_and_reflection_negative_control() {
        let p = params(0.25);
        let grid = GridSpec {
            points: 2_000,
            ..Default::default()
        };
        let rapidities = [0.0, 1.3, -0.7, 2.0];
        for n in [2usize, 3] {
            let report = check_lorentz_invariance(&p, n, 1.0, &rapidities, &grid).unwrap();
            assert!(report.passed(), "n = {n}: {:?}", report.violations.first());
        }
        // improper reflection k⁰ → −k⁰ swaps μ⁺/μ⁻ and changes the density
        let mut rng = stream_rng(11, 0);
        let mut changed = false;
        for _ in 0..200 {
            let momenta = sample_hyperplane_tuple(&p, 3, &GridSpec::default(), &mut rng);
            let reflected: Vec<MinkowskiMomentum> = momenta
                .iter()
                .map(|k| MinkowskiMomentum::new(-k.k0, k.kvec.clone()))
                .collect();
            let a = wightman_truncated_density(&p, 1.0, &momenta).unwrap();
            let b = wightman_truncated_density(&p, 1.0, &reflected).unwrap();
            if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1e-30) && (a != 0.0 || b != 0.0) {
                changed = true;
                break;
            }
        }
        assert!(changed, "reflection unexpectedly left all densities alone");
    }

    #[test]
    fn positivity_holds_and_negative_c3_detected() {
        let p = params(0.25);
        let grid = GridSpec {
            points: 4_000,
            ..Default::default()
        };
        let cumulants = [0.0, 1.0, 2.0, 2.0];
        for n in [2usize, 3, 4] {
            let report = check_positivity(&p, n, &cumulants, &grid).unwrap();
            assert!(report.passed(), "n = {n}");
        }
        let negative = [0.0, 1.0, -2.0, 2.0];
        let report = check_positivity(&p, 3, &negative, &grid).unwrap();
        assert!(!report.passed(), "negative c₃ slipped through");
    }

    #[test]
    fn gaussian_positivity_reduces_to_pair_terms() {
        let p = params(0.25);
        // c₃ = c₄ = 0: the generic 4-point full density vanishes, the
        // pair-stratified one is a product of two-point densities
        let cumulants = [0.0, 1.5, 0.0, 0.0];
        let k = mk(-2.5, 0.4);
        let q = mk(-3.0, -0.8);
        let momenta = [k.clone(), k.neg(), q.clone(), q.neg()];
        let full = full_wightman_density(&p, &cumulants, &momenta, 1e-9).unwrap();
        let d_k = wightman_truncated_density(&p, 1.5, &[k.clone(), k.neg()]).unwrap();
        let d_q = wightman_truncated_density(&p, 1.5, &[q.clone(), q.neg()]).unwrap();
        // partitions {12}{34} contributes d_k·d_q; {14}{23}... need blocks
        // summing to zero: {13},{24} etc. do not; {1234} has c₄ = 0
        assert!(rel_diff(full, d_k * d_q) < 1e-12, "{full} vs {}", d_k * d_q);
        assert!(full >= 0.0);
    }

    #[test]
    fn continuation_identity_alpha_half() {
        let report = continuation_check_n2(
            0.5,
            1.0,
            1.0,
            &[(0.5, 0.0), (1.0, 0.0), (2.0, 0.5), (3.0, 0.0), (5.0, 0.0)],
        )
        .unwrap();
        assert!(
            report.max_rel_error < 1e-3,
            "max rel error {}",
            report.max_rel_error
        );
        let slope_err = (report.log_slope - report.log_slope_target).abs();
        assert!(slope_err < 0.02, "slope {} vs −m", report.log_slope);
    }

    #[test]
    fn continuation_identity_alpha_quarter_via_ac_density() {
        let report = continuation_check_n2(0.25, 1.0, 1.0, &[(1.0, 0.0), (1.5, 0.5)]).unwrap();
        assert!(
            report.max_rel_error < 1e-3,
            "max rel error {}",
            report.max_rel_error
        );
    }

    #[test]
    fn two_point_function_even_in_time_order() {
        let a = shell_two_point_function(1.0, 1.0, 1.3, 0.4).unwrap();
        let b = shell_two_point_function(1.0, 1.0, -1.3, 0.4).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            shell_two_point_function(1.0, 1.0, 0.0, 0.4),
            Err(Error::Domain(_))
        ));
    }
}
