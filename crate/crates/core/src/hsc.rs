//! Numerical content of the Hilbert-space-structure condition: pairings
//! ∫ density × test function over the Σk = 0 hyperplane, continuity-bound
//! ratio studies against the weighted Schwartz norms, the majorizing
//! measures M_j with their near-shell integrability, and the Cauchy–Schwarz
//! split chain at the lowest order.
//!
//! Everything here is s = 1 (two space-time dimensions), the desk-scale
//! regime of the checks; the density evaluators themselves are generic.

use crate::error::{Error, Result};
use crate::noise::stream_rng;
use crate::quad;
use crate::report::{BoundReport, BoundRow, ConvergenceReport};
use crate::testfn::{GaussTerm, SchwartzNormSpec, TestFunction};
use crate::util::{regression_slope, rel_diff};
use crate::wightman::{
    wightman_truncated_density_clamped, DensityParams, MinkowskiMomentum,
};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Coefficient of the n = 2 absolutely continuous density on its support
/// {k² > m², k⁰ < 0}: D(k) = 2 c₂ sin(2πα) (k²−m²)^{−2α}, the two-point
/// reduction of the general density (valid for α < 1/2).
pub fn two_point_ac_coefficient(params: &DensityParams, c_2: f64) -> f64 {
    2.0 * c_2 * (2.0 * PI * params.alpha).sin()
}

/// ∫ over the backward region {k⁰ < −ω(k¹)} of u^{−beta} h(k) dk with
/// u = k² − m², computed slice-wise: the energy integral is regularized by
/// the exact power substitution, the spatial integral is adaptive.
fn backward_region_integral<H>(
    params: &DensityParams,
    beta: f64,
    h: H,
    spatial_box: f64,
    energy_box: f64,
    rel_tol: f64,
) -> Result<f64>
where
    H: Fn(&MinkowskiMomentum) -> f64 + Sync,
{
    let inner = |k1: f64| -> f64 {
        let omega2 = k1 * k1 + params.mass * params.mass;
        let u_max = energy_box * energy_box - omega2;
        if u_max <= 0.0 {
            return 0.0;
        }
        quad::integrate_power_singular(
            |u| {
                let q = (u + omega2).sqrt();
                let k = MinkowskiMomentum::new(-q, vec![k1]);
                h(&k) / (2.0 * q)
            },
            u_max,
            beta,
            rel_tol * 0.1,
            4_000,
        )
        .unwrap_or(0.0)
    };
    quad::integrate_1d(
        |k1| inner(k1),
        -spatial_box,
        spatial_box,
        &[0.0],
        rel_tol,
        1e-280,
        20_000,
    )
}

/// ∫_{−b0}^{b0} h(k⁰) Σ_j c_j |k⁰² − ω²|^{−β_j} dk⁰ with the shell points
/// ±ω as exact segment endpoints; shell-adjacent segments go through the
/// power substitution, the rest through plain adaptive quadrature.
fn line_integral_with_shell<H>(
    omega: f64,
    b0: f64,
    betas: &[(f64, f64)],
    h: H,
    rel_tol: f64,
) -> Result<f64>
where
    H: Fn(f64) -> f64,
{
    let window = (0.5 * omega).min(1.0);
    let mut cuts = vec![-b0];
    for c in [
        -omega - window,
        -omega,
        -omega + window,
        omega - window,
        omega,
        omega + window,
    ] {
        if c > -b0 && c < b0 {
            cuts.push(c);
        }
    }
    cuts.push(b0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let rho = |k0: f64| -> f64 {
        let u = (k0 * k0 - omega * omega).abs();
        betas.iter().map(|&(c, b)| c * u.powf(-b)).sum()
    };

    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let mid = 0.5 * (p + q);
        let near_shell = (mid.abs() - omega).abs() < window;
        if !near_shell {
            total += quad::integrate_1d(|k0| h(k0) * rho(k0), p, q, &[], rel_tol, 1e-280, 8_000)?;
            continue;
        }
        // segment touching ±ω at one endpoint: substitute the shell offset
        let sign = if mid > 0.0 { 1.0 } else { -1.0 };
        let outside = mid.abs() > omega;
        let (u_lo, u_hi) = if outside {
            // u = k0² − ω² ∈ (0, max(p², q²) − ω²)
            (0.0, p.max(q).abs().max(p.min(q).abs()).powi(2) - omega * omega)
        } else {
            // v = ω² − k0² ∈ (0, ω² − min k0²)
            (0.0, omega * omega - p.abs().min(q.abs()).powi(2))
        };
        let _ = u_lo;
        for &(coeff, beta) in betas {
            let val = quad::integrate_power_singular(
                |u| {
                    let k0 = if outside {
                        sign * (u + omega * omega).sqrt()
                    } else {
                        sign * (omega * omega - u).sqrt()
                    };
                    h(k0) / (2.0 * k0.abs().max(1e-300))
                },
                u_hi,
                beta,
                rel_tol * 0.1,
                4_000,
            )?;
            total += coeff * val;
        }
    }
    Ok(total)
}

/// ∫ |f(k)|² dM₁(k) over ℝ^{s+1} (s = 1), with an optional modulation phase
/// standing in for a position-space translation of f.
pub fn p1_sq_integral(
    params: &DensityParams,
    f: &TestFunction,
    modulation: Option<&[f64]>,
    rel_tol: f64,
) -> Result<f64> {
    if f.dim() != params.s + 1 {
        return Err(Error::InvalidParameter(
            "p₁ takes a one-argument test function".into(),
        ));
    }
    if params.s != 1 {
        return Err(Error::Domain("p₁ quadrature is s = 1 only".into()));
    }
    let betas = [(1.0, 2.0 * params.alpha), (1.0, params.alpha)];
    let sp1 = (params.s + 1) as f64;
    let radius = f.bounding_box(12.0);
    let b0 = radius[0].max(params.mass * 2.0);
    let b1 = radius[1].max(params.mass * 2.0);
    quad::integrate_1d(
        |k1| {
            let omega = (k1 * k1 + params.mass * params.mass).sqrt();
            line_integral_with_shell(
                omega,
                b0,
                &betas,
                |k0| {
                    let weight = (1.0 + k0 * k0 + k1 * k1).powf(sp1);
                    weight * f.eval_modulated_sq(&[k0, k1], modulation)
                },
                rel_tol * 0.3,
            )
            .unwrap_or(0.0)
        },
        -b1,
        b1,
        &[0.0],
        rel_tol,
        1e-280,
        20_000,
    )
}

/// Hilbert seminorm p₁(f) = (C + 1) (∫|f|² dM₁)^{1/2} with the calibrated
/// constant C.
pub fn p1_seminorm(
    params: &DensityParams,
    f: &TestFunction,
    calibrated_c: f64,
    rel_tol: f64,
) -> Result<f64> {
    Ok((calibrated_c + 1.0) * p1_sq_integral(params, f, None, rel_tol)?.sqrt())
}

// ─── M_j measure density ────────────────────────────────────────────────

/// Absolutely continuous bracket terms of one block, as typeset: the
/// δ_{l,1} inverse-square term, the (1−δ_{l,2}) product term and the
/// (1−δ_{l,1}−δ_{l,2}) sum-ratio term. The δ_{l,2} pair-δ component is
/// singular and lives in [`m_measure_pair_density`]. Note that for l = 1
/// the first and third terms are both active as printed; the breakdown
/// keeps the overlap observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MBlockTerms {
    pub inverse_square: f64,
    pub product: f64,
    pub sum_ratio: f64,
}

impl MBlockTerms {
    pub fn total(&self) -> f64 {
        self.inverse_square + self.product + self.sum_ratio
    }
}

/// Bracket terms for a block of momenta (α < 1/2 regime of the measures).
pub fn m_block_terms(params: &DensityParams, block: &[MinkowskiMomentum]) -> Result<MBlockTerms> {
    if params.alpha >= 0.5 {
        return Err(Error::Domain(
            "the M_j formulas are stated for alpha < 1/2".into(),
        ));
    }
    let l = block.len();
    let mut us = Vec::with_capacity(l);
    for k in block {
        let u = k.squared() - params.mass * params.mass;
        if u.abs() < params.shell_tol {
            return Err(Error::ShellSingularity {
                offset: u,
                tol: params.shell_tol,
            });
        }
        us.push(u.abs());
    }
    let inverse_square = if l == 1 {
        us[0].powf(-2.0 * params.alpha)
    } else {
        0.0
    };
    let product = if l != 2 {
        us.iter().map(|u| u.powf(-params.alpha)).product()
    } else {
        0.0
    };
    let sum_ratio = if l >= 3 {
        let mut sum = block[0].clone();
        for k in &block[1..] {
            sum = sum.add(k);
        }
        let u_sum = (sum.squared() - params.mass * params.mass).abs();
        if u_sum < params.shell_tol {
            return Err(Error::ShellSingularity {
                offset: u_sum,
                tol: params.shell_tol,
            });
        }
        u_sum.powf(-params.alpha) * us.iter().map(|u| u.powf(-params.alpha)).product::<f64>()
    } else {
        0.0
    };
    Ok(MBlockTerms {
        inverse_square,
        product,
        sum_ratio,
    })
}

/// Absolutely continuous density of dM_j at a generic point: the full
/// partition sum of per-block brackets, times the (1+|k_i|²)^{s+1} weights.
/// Nonnegative everywhere by inspection of the factors.
pub fn m_measure_density(params: &DensityParams, momenta: &[MinkowskiMomentum]) -> Result<f64> {
    let j = momenta.len();
    if j < 1 || j > 6 {
        return Err(Error::OrderOutOfRange(j, 1, 6));
    }
    let sp1 = (params.s + 1) as f64;
    let weight: f64 = momenta
        .iter()
        .map(|k| (1.0 + k.euclidean_sq()).powf(sp1))
        .product();
    let mut sum = 0.0;
    for partition in crate::partitions::set_partitions(j)? {
        let mut prod = 1.0;
        for &mask in partition.blocks() {
            let block: Vec<MinkowskiMomentum> =
                crate::partitions::SetPartition::block_elements(mask)
                    .into_iter()
                    .map(|i| momenta[i].clone())
                    .collect();
            prod *= m_block_terms(params, &block)?.total();
            if prod == 0.0 {
                break;
            }
        }
        sum += prod;
    }
    Ok(weight * sum)
}

/// Density of the singular δ(k₁+k₂) component of M₂ with respect to dk₁ on
/// the pair hyperplane k₂ = −k₁.
pub fn m_measure_pair_density(params: &DensityParams, k: &MinkowskiMomentum) -> Result<f64> {
    let u = (k.squared() - params.mass * params.mass).abs();
    if u < params.shell_tol {
        return Err(Error::ShellSingularity {
            offset: u,
            tol: params.shell_tol,
        });
    }
    let sp1 = (params.s + 1) as f64;
    let weight = (1.0 + k.euclidean_sq()).powf(2.0 * sp1);
    Ok(weight * u.powf(-2.0 * params.alpha))
}

// ─── Pairing ∫ density × f over the hyperplane ──────────────────────────

/// Controls for the pairing quadratures.
#[derive(Debug, Clone, Copy)]
pub struct PairingOptions {
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for PairingOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            max_evals: 30_000_000,
        }
    }
}

/// ∫ over the Σk = 0 hyperplane of the truncated density against f
/// (n ∈ {2, 3}, s = 1). n = 2 dispatches on α: the shell measure at
/// α = 1/2, the absolutely continuous density below it; n = 3 runs the
/// adaptive cubature on (k₁, k₂) with shell-avoiding subdivision.
pub fn pairing(
    params: &DensityParams,
    n: usize,
    c_n: f64,
    f: &TestFunction,
    opts: PairingOptions,
) -> Result<f64> {
    if params.s != 1 {
        return Err(Error::Domain("pairing quadrature is s = 1 only".into()));
    }
    if f.dim() != n * (params.s + 1) {
        return Err(Error::InvalidParameter(format!(
            "test function dimension {} does not match n = {n}",
            f.dim()
        )));
    }
    match n {
        2 if params.alpha == 0.5 => pairing_two_point_shell(params, c_n, f, opts),
        2 => {
            let coeff = two_point_ac_coefficient(params, c_n);
            let radius = f.bounding_box(12.0);
            let spatial = radius[1].max(radius[3]).max(2.0 * params.mass);
            let energy = radius[0].max(radius[2]).max(2.0 * params.mass);
            backward_region_integral(
                params,
                2.0 * params.alpha,
                |k| {
                    let kn = k.neg();
                    coeff * f.eval(&[k.k0, k.kvec[0], kn.k0, kn.kvec[0]])
                },
                spatial,
                energy,
                opts.rel_tol,
            )
        }
        3 => pairing_three_point(params, c_n, f, opts),
        _ => Err(Error::OrderOutOfRange(n, 2, 3)),
    }
}

/// n = 2, α = 1/2: the shell integral ∫ d^s k (2π c₂ / 2ω) f(k₁, −k₁) with
/// k₁ on the negative-energy shell.
fn pairing_two_point_shell(
    params: &DensityParams,
    c_2: f64,
    f: &TestFunction,
    opts: PairingOptions,
) -> Result<f64> {
    let radius = f.bounding_box(12.0);
    let b = radius[1].max(radius[3]).max(2.0 * params.mass);
    quad::integrate_1d(
        |k| {
            let omega = (k * k + params.mass * params.mass).sqrt();
            let density = 2.0 * PI * c_2 / (2.0 * omega);
            density * f.eval(&[-omega, k, omega, -k])
        },
        -b,
        b,
        &[0.0],
        opts.rel_tol,
        1e-280,
        20_000,
    )
}

/// Independent second route for the shell pairing: fold onto the radial
/// half-line and integrate both directions together.
pub fn pairing_two_point_shell_radial(
    params: &DensityParams,
    c_2: f64,
    f: &TestFunction,
    opts: PairingOptions,
) -> Result<f64> {
    let radius = f.bounding_box(12.0);
    let b = radius[1].max(radius[3]).max(2.0 * params.mass);
    quad::integrate_1d(
        |k| {
            let omega = (k * k + params.mass * params.mass).sqrt();
            let density = 2.0 * PI * c_2 / (2.0 * omega);
            density * (f.eval(&[-omega, k, omega, -k]) + f.eval(&[-omega, -k, omega, k]))
        },
        0.0,
        b,
        &[],
        opts.rel_tol,
        1e-280,
        20_000,
    )
}

fn pairing_three_point(
    params: &DensityParams,
    c_3: f64,
    f: &TestFunction,
    opts: PairingOptions,
) -> Result<f64> {
    // the integrand vanishes with f, so its support box is the domain
    let (lo, hi) = f.support_box(9.0);
    let est = quad::integrate_box(
        |x| {
            let k1 = MinkowskiMomentum::new(x[0], vec![x[1]]);
            let k2 = MinkowskiMomentum::new(x[2], vec![x[3]]);
            let k3 = k1.add(&k2).neg();
            let density = wightman_truncated_density_clamped(params, c_3, &[k1, k2, k3.clone()]);
            if density == 0.0 {
                return 0.0;
            }
            density * f.eval(&[x[0], x[1], x[2], x[3], k3.k0, k3.kvec[0]])
        },
        &lo,
        &hi,
        opts.rel_tol,
        1e-280,
        opts.max_evals,
    )?;
    Ok(est.value)
}

// ─── Bound-ratio study (continuity against ‖·‖_{0,2s+2}) ────────────────

/// Deterministic 50-member family: an on-shell subfamily with shrinking
/// widths (shell-approach trend), an origin-centered subfamily with growing
/// widths (the divergence witness once the weight is removed), and seeded
/// random members with centers inside and outside the cones and monomial
/// degrees up to 4.
pub fn bound_family(params: &DensityParams, n: usize, size: usize, seed: u64) -> Vec<(String, TestFunction)> {
    let dim = n * (params.s + 1);
    let m = params.mass;
    let mut family = Vec::with_capacity(size);

    // on-shell center: k* on the negative-energy shell, partners chosen so
    // the tuple is centered on the Σk = 0 hyperplane
    let shell_center = |width: f64| -> TestFunction {
        let kvec = 0.5 * m;
        let omega = (kvec * kvec + m * m).sqrt();
        let mut center = vec![0.0; dim];
        center[0] = -omega;
        center[1] = kvec;
        if n == 2 {
            center[2] = omega;
            center[3] = -kvec;
        } else {
            center[2] = -1.8 * m;
            center[3] = -0.3 * m;
            center[4] = omega + 1.8 * m;
            center[5] = kvec * -1.0 + 0.3 * m;
        }
        TestFunction::gaussian(center, width).unwrap()
    };
    for width in [0.5, 0.25, 0.125, 0.0625] {
        family.push((format!("shell-w{width}"), shell_center(width)));
    }
    for width in [0.25, 0.5, 1.0, 2.0, 4.0] {
        family.push((
            format!("wide-w{width}"),
            TestFunction::gaussian(vec![0.0; dim], width).unwrap(),
        ));
    }

    let mut rng = stream_rng(seed, 40);
    while family.len() < size {
        let width: f64 = 0.25 * 16f64.powf(rng.gen::<f64>());
        let mut center = vec![0.0; dim];
        let style: u8 = rng.gen_range(0..3);
        for (i, c) in center.iter_mut().enumerate() {
            *c = match style {
                0 => rng.gen_range(-1.5 * m..1.5 * m), // near the cones
                1 => rng.gen_range(-4.0 * m..4.0 * m), // mixed
                _ => {
                    // far centers
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    sign * rng.gen_range(3.0 * m..6.0 * m)
                }
            };
            let _ = i;
        }
        let mut degree = vec![0u32; dim];
        for _ in 0..rng.gen_range(0..3) {
            let axis = rng.gen_range(0..dim);
            let d: u32 = rng.gen_range(0..=4);
            degree[axis] = d.min(4);
        }
        let term = GaussTerm {
            coeff: 1.0,
            center,
            width: vec![width; dim],
            degree,
        };
        family.push((
            format!("rand-{}", family.len()),
            TestFunction::new(dim, vec![term]).unwrap(),
        ));
    }
    family.truncate(size);
    family
}

/// Ratio study |∫ Ŵᵀ_n f| / ‖f‖_{0,N} over a family. With N = 2s+2 the
/// ratios stay bounded and the shell-approach trend is non-positive; with
/// N = 0 the growing-width subfamily exhibits the divergence.
pub fn bound_ratio_study(
    params: &DensityParams,
    n: usize,
    c_n: f64,
    family: &[(String, TestFunction)],
    weight_exponent: u32,
    opts: PairingOptions,
) -> Result<BoundReport> {
    let spec = SchwartzNormSpec {
        derivative_order: 0,
        weight_exponent,
    };
    let rows: Result<Vec<BoundRow>> = family
        .par_iter()
        .map(|(label, f)| {
            let pairing_value = pairing(params, n, c_n, f, opts)?;
            let norm = crate::testfn::schwartz_norm(f, spec, n, params.s)?;
            let width = f.terms()[0].width[0];
            let center_norm = f.terms()[0]
                .center
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt();
            Ok(BoundRow {
                label: label.clone(),
                width,
                center_norm,
                pairing: pairing_value,
                norm,
                ratio: pairing_value.abs() / norm,
            })
        })
        .collect();
    let rows = rows?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let shell_rows: Vec<&BoundRow> = rows
        .iter()
        .filter(|r| r.label.starts_with("shell-") && r.ratio > 0.0)
        .collect();
    let shell_trend = if shell_rows.len() >= 3 {
        let xs: Vec<f64> = shell_rows.iter().map(|r| -r.width.ln()).collect();
        let ys: Vec<f64> = shell_rows.iter().map(|r| r.ratio.ln()).collect();
        regression_slope(&xs, &ys)
    } else {
        0.0
    };
    Ok(BoundReport {
        check: "bound-ratio".into(),
        order: n,
        alpha: params.alpha,
        weight_exponent: weight_exponent as usize,
        rows,
        max_ratio,
        shell_trend,
    })
}

/// Slope of log(ratio) against log(width) over the origin-centered
/// growing-width subfamily; strongly positive without the weight.
pub fn wide_width_trend(report: &BoundReport) -> f64 {
    let rows: Vec<&BoundRow> = report
        .rows
        .iter()
        .filter(|r| r.label.starts_with("wide-") && r.ratio > 0.0)
        .collect();
    if rows.len() < 3 {
        return 0.0;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.width.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    regression_slope(&xs, &ys)
}

// ─── Near-shell integrability study ─────────────────────────────────────

/// Mass of |k² − m²|^{−exponent} over the shell ring ε/2 ≤ |k² − m²| < ε
/// inside the spatial box |k¹| ≤ k_box (s = 1, both energy branches).
fn shell_ring_mass(exponent: f64, mass: f64, k_box: f64, eps: f64) -> Result<f64> {
    let inner = |k1: f64| -> f64 {
        let omega2 = k1 * k1 + mass * mass;
        // u > 0 side: k⁰ = ±√(u+ω²)
        let above = quad::integrate_1d(
            |u| u.powf(-exponent) / (u + omega2).sqrt(),
            eps / 2.0,
            eps,
            &[],
            1e-9,
            0.0,
            2_000,
        )
        .unwrap_or(0.0);
        // u < 0 side: k⁰ = ±√(ω²−|u|), valid while |u| < ω²
        let below = if eps < omega2 {
            quad::integrate_1d(
                |v| v.powf(-exponent) / (omega2 - v).sqrt(),
                eps / 2.0,
                eps,
                &[],
                1e-9,
                0.0,
                2_000,
            )
            .unwrap_or(0.0)
        } else {
            0.0
        };
        above + below
    };
    quad::integrate_1d(|k1| inner(k1), -k_box, k_box, &[0.0], 1e-8, 0.0, 4_000)
}

/// Fit the scaling exponent of the near-shell mass: ring masses behave as
/// ε^{1−exponent}, so the log-log slope recovers 1 − 2α for the model
/// density and goes non-positive exactly when the ball integral diverges.
pub fn shell_integrability_study(
    exponent: f64,
    expected_slope: f64,
    mass: f64,
    k_box: f64,
    label: &str,
) -> Result<ConvergenceReport> {
    let epsilons: Vec<f64> = (0..8).map(|i| 0.25 * 0.5f64.powi(i)).collect();
    let masses: Result<Vec<f64>> = epsilons
        .iter()
        .map(|&e| shell_ring_mass(exponent, mass, k_box, e))
        .collect();
    let masses = masses?;
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    let slope = regression_slope(&xs, &ys);
    Ok(ConvergenceReport {
        check: label.into(),
        alpha: exponent / 2.0,
        exponent_expected: expected_slope,
        exponent_measured: slope,
        converged: slope > 0.05,
        epsilons,
        masses,
    })
}

/// The model case: |k²−m²|^{−2α} has ring exponent 1 − 2α (local
/// integrability of the M_j densities for α < 1/2).
pub fn local_integrability_study(alpha: f64, mass: f64) -> Result<ConvergenceReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1/2)".into()));
    }
    shell_integrability_study(2.0 * alpha, 1.0 - 2.0 * alpha, mass, 2.0 * mass, "shell-integrability")
}

// ─── Cauchy–Schwarz split chain at j = l = 1 ────────────────────────────

/// Outcome of the split-chain evaluation for one (f, g) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitCheck {
    pub lhs: f64,
    pub middle: f64,
    pub rhs: f64,
    pub calibrated_c: f64,
    pub holds: bool,
}

fn d_weighted_sq_integral(
    params: &DensityParams,
    c_2: f64,
    f: &TestFunction,
    reflect: bool,
    rel_tol: f64,
) -> Result<f64> {
    let coeff = two_point_ac_coefficient(params, c_2);
    let radius = f.bounding_box(12.0);
    let spatial = radius[1].max(2.0 * params.mass);
    let energy = radius[0].max(2.0 * params.mass);
    backward_region_integral(
        params,
        2.0 * params.alpha,
        |k| {
            let x = if reflect {
                [-k.k0, -k.kvec[0]]
            } else {
                [k.k0, k.kvec[0]]
            };
            let v = f.eval(&x);
            coeff * v * v
        },
        spatial,
        energy,
        rel_tol,
    )
}

/// Calibrate C₁₁: the largest observed ∫|f|²D / ∫|f|²dM₁ over a family,
/// times a safety factor of 2. The constants are existence-only statements;
/// the calibration makes the chain concrete and testable.
pub fn calibrate_c11(
    params: &DensityParams,
    c_2: f64,
    family: &[TestFunction],
    rel_tol: f64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in family {
        let num = d_weighted_sq_integral(params, c_2, f, false, rel_tol)?;
        let den = p1_sq_integral(params, f, None, rel_tol)?;
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(2.0 * worst)
}

/// Evaluate the inequality chain
///   |∫ Ŵ₂ f⊗g| ≤ (∫|f|²D)^{1/2} (∫|g(−·)|²D)^{1/2} ≤ p₁(f) p₁(g)
/// at j = l = 1 with a calibrated constant (c₁ = 0, so the full two-point
/// function is its truncated part).
pub fn hsc_split_check(
    params: &DensityParams,
    c_2: f64,
    f: &TestFunction,
    g: &TestFunction,
    calibrated_c: f64,
    rel_tol: f64,
) -> Result<SplitCheck> {
    if params.alpha >= 0.5 {
        return Err(Error::Domain("split check needs alpha < 1/2".into()));
    }
    let coeff = two_point_ac_coefficient(params, c_2);
    let radius_f = f.bounding_box(12.0);
    let radius_g = g.bounding_box(12.0);
    let spatial = radius_f[1].max(radius_g[1]).max(2.0 * params.mass);
    let energy = radius_f[0].max(radius_g[0]).max(2.0 * params.mass);
    let lhs = backward_region_integral(
        params,
        2.0 * params.alpha,
        |k| coeff * f.eval(&[k.k0, k.kvec[0]]) * g.eval(&[-k.k0, -k.kvec[0]]),
        spatial,
        energy,
        rel_tol,
    )?
    .abs();
    let mid_f = d_weighted_sq_integral(params, c_2, f, false, rel_tol)?.sqrt();
    let mid_g = d_weighted_sq_integral(params, c_2, g, true, rel_tol)?.sqrt();
    let middle = mid_f * mid_g;
    let rhs = p1_seminorm(params, f, calibrated_c, rel_tol)?
        * p1_seminorm(params, g, calibrated_c, rel_tol)?;
    let slack = 1.0 + 50.0 * rel_tol;
    let holds = lhs <= middle * slack && middle <= rhs * slack;
    Ok(SplitCheck {
        lhs,
        middle,
        rhs,
        calibrated_c,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wightman::wightman_truncated_density;

    fn params(alpha: f64) -> DensityParams {
        DensityParams::new(alpha, 1.0, 1).unwrap()
    }

    #[test]
    fn ac_coefficient_matches_density_evaluator() {
        let p = params(0.25);
        let k = MinkowskiMomentum::new(-2.0, vec![0.3]);
        let d = wightman_truncated_density(&p, 0.8, &[k.clone(), k.neg()]).unwrap();
        let u = k.squared() - 1.0;
        let expected = two_point_ac_coefficient(&p, 0.8) * u.powf(-0.5);
        assert!(rel_diff(d, expected) < 1e-12, "{d} vs {expected}");
    }

    #[test]
    fn pairing_far_outside_support_is_negligible() {
        let p = params(0.5);
        // center far from the shell in every argument
        let f = TestFunction::gaussian(vec![6.0, 6.0, -6.0, -6.0], 0.3).unwrap();
        let v = pairing(&p, 2, 1.0, &f, PairingOptions::default()).unwrap();
        assert!(v.abs() < 1e-10, "{v}");
    }

    #[test]
    fn shell_pairing_two_quadrature_routes_agree() {
        let p = params(0.5);
        let f = TestFunction::new(
            4,
            vec![GaussTerm {
                coeff: 1.0,
                center: vec![-1.2, 0.3, 1.2, -0.3],
                width: vec![1.0, 0.8, 1.0, 0.8],
                degree: vec![0, 1, 0, 0],
            }],
        )
        .unwrap();
        let a = pairing(&p, 2, 1.3, &f, PairingOptions::default()).unwrap();
        let b = pairing_two_point_shell_radial(&p, 1.3, &f, PairingOptions::default()).unwrap();
        assert!(rel_diff(a, b) < 1e-6, "{a} vs {b}");
        assert!(a.abs() > 1e-6, "pairing unexpectedly zero");
    }

    #[test]
    fn pairing_is_linear() {
        let p = params(0.5);
        let f = TestFunction::gaussian(vec![-1.5, 0.0, 1.5, 0.0], 0.9).unwrap();
        let g = TestFunction::gaussian(vec![-1.0, 0.5, 1.0, -0.5], 1.2).unwrap();
        let opts = PairingOptions::default();
        let a = pairing(&p, 2, 1.0, &f, opts).unwrap();
        let b = pairing(&p, 2, 1.0, &g, opts).unwrap();
        let ab = pairing(&p, 2, 1.0, &f.plus(&g).unwrap(), opts).unwrap();
        assert!((ab - a - b).abs() < 1e-8 * (a.abs() + b.abs()).max(1.0));
    }

    #[test]
    fn ac_pairing_matches_naive_cubature() {
        // independent 2-d cubature with the clamped density as a cross-check
        let p = params(0.25);
        let f = TestFunction::gaussian(vec![-2.0, 0.0, 2.0, 0.0], 0.8).unwrap();
        let a = pairing(&p, 2, 1.0, &f, PairingOptions::default()).unwrap();
        let coeff = two_point_ac_coefficient(&p, 1.0);
        let est = quad::integrate_box(
            |x| {
                let k = MinkowskiMomentum::new(x[0], vec![x[1]]);
                let u = k.squared() - 1.0;
                if u <= 1e-12 || k.k0 >= 0.0 {
                    return 0.0;
                }
                coeff * u.powf(-0.5) * f.eval(&[x[0], x[1], -x[0], -x[1]])
            },
            &[-8.0, -8.0],
            &[8.0, 8.0],
            5e-4,
            1e-300,
            20_000_000,
        )
        .unwrap();
        assert!(rel_diff(a, est.value) < 5e-3, "{a} vs {}", est.value);
    }

    #[test]
    fn m1_density_reference_value() {
        // j = 1 inverse-square component: (1+|k|²)^{s+1} |k²−m²|^{−2α}
        let p = params(0.2);
        let k = MinkowskiMomentum::new(0.7, vec![1.1]);
        let terms = m_block_terms(&p, &[k.clone()]).unwrap();
        let u = (k.squared() - 1.0).abs();
        assert!(rel_diff(terms.inverse_square, u.powf(-0.4)) < 1e-13);
        assert!(rel_diff(terms.product, u.powf(-0.2)) < 1e-13);
        assert_eq!(terms.sum_ratio, 0.0);
        let density = m_measure_density(&p, &[k.clone()]).unwrap();
        let w = (1.0 + k.euclidean_sq()).powi(2);
        assert!(rel_diff(density, w * (u.powf(-0.4) + u.powf(-0.2))) < 1e-12);
    }

    #[test]
    fn m2_generic_density_by_partition_enumeration() {
        let p = params(0.2);
        let k1 = MinkowskiMomentum::new(0.4, vec![0.9]);
        let k2 = MinkowskiMomentum::new(-1.7, vec![0.2]);
        let density = m_measure_density(&p, &[k1.clone(), k2.clone()]).unwrap();
        // partitions of {1,2}: singleton product + the pair block whose AC
        // bracket is empty as typeset (pair-δ only)
        let b1 = m_block_terms(&p, &[k1.clone()]).unwrap().total();
        let b2 = m_block_terms(&p, &[k2.clone()]).unwrap().total();
        let pair = m_block_terms(&p, &[k1.clone(), k2.clone()]).unwrap().total();
        assert_eq!(pair, 0.0);
        let w = (1.0 + k1.euclidean_sq()).powi(2) * (1.0 + k2.euclidean_sq()).powi(2);
        assert!(rel_diff(density, w * b1 * b2) < 1e-12);
        // pair-δ singular component
        let sing = m_measure_pair_density(&p, &k1).unwrap();
        let u = (k1.squared() - 1.0).abs();
        assert!(rel_diff(sing, (1.0 + k1.euclidean_sq()).powi(4) * u.powf(-0.4)) < 1e-12);
    }

    #[test]
    fn m_density_nonnegative_everywhere_sampled() {
        let p = params(0.3);
        let mut rng = stream_rng(5, 0);
        for _ in 0..2000 {
            let j = rng.gen_range(1..=3);
            let momenta: Vec<MinkowskiMomentum> = (0..j)
                .map(|_| {
                    MinkowskiMomentum::new(rng.gen_range(-3.0..3.0), vec![rng.gen_range(-3.0..3.0)])
                })
                .collect();
            if let Ok(d) = m_measure_density(&p, &momenta) {
                assert!(d >= 0.0, "negative density {d}");
            }
        }
    }

    #[test]
    fn ring_exponents_recover_one_minus_two_alpha() {
        for alpha in [0.2, 0.4] {
            let report = local_integrability_study(alpha, 1.0).unwrap();
            assert!(
                (report.exponent_measured - (1.0 - 2.0 * alpha)).abs() < 0.05,
                "alpha {alpha}: slope {}",
                report.exponent_measured
            );
            assert!(report.converged);
        }
    }

    #[test]
    fn doubled_exponent_flags_divergence() {
        let report =
            shell_integrability_study(1.2, 1.0 - 1.2, 1.0, 2.0, "synthetic-divergence").unwrap();
        assert!(!report.converged, "slope {}", report.exponent_measured);
        assert!(report.exponent_measured < 0.0);
    }

    #[test]
    fn p1_invariant_under_modulation_phase() {
        let p = params(0.25);
        let f = TestFunction::gaussian(vec![-1.0, 0.5], 0.9).unwrap();
        let plain = p1_sq_integral(&p, &f, None, 1e-7).unwrap();
        let modulated = p1_sq_integral(&p, &f, Some(&[1.7, -2.3]), 1e-7).unwrap();
        assert!(rel_diff(plain, modulated) < 1e-10, "{plain} vs {modulated}");
        assert!(plain > 0.0);
    }

    #[test]
    fn split_chain_holds_for_sample_pairs() {
        let p = params(0.25);
        let members: Vec<TestFunction> = vec![
            TestFunction::gaussian(vec![-1.5, 0.2], 0.8).unwrap(),
            TestFunction::gaussian(vec![-2.0, -0.5], 1.2).unwrap(),
            TestFunction::gaussian(vec![0.5, 1.0], 0.6).unwrap(),
        ];
        let c11 = calibrate_c11(&p, 1.0, &members, 1e-6).unwrap();
        assert!(c11 > 0.0);
        for f in &members {
            for g in &members {
                let check = hsc_split_check(&p, 1.0, f, g, c11, 1e-6).unwrap();
                assert!(
                    check.holds,
                    "chain failed: lhs {} mid {} rhs {}",
                    check.lhs, check.middle, check.rhs
                );
            }
        }
        // diagonal probe: lhs ≤ p₁(f)² directly
        let f = &members[0];
        let check = hsc_split_check(&p, 1.0, f, f, c11, 1e-6).unwrap();
        let p1 = p1_seminorm(&p, f, c11, 1e-6).unwrap();
        assert!(check.lhs <= p1 * p1 * (1.0 + 1e-4));
    }

    #[test]
    fn three_point_pairing_matches_iterated_quadrature() {
        let p = params(0.25);
        // smooth case: bump clear of every single-momentum shell
        let f = TestFunction::gaussian(vec![-2.2, 0.3, 0.4, 1.6, 1.8, -1.9], 0.35).unwrap();
        let a = pairing(&p, 3, 1.0, &f, PairingOptions::default()).unwrap();
        // independent route: iterated adaptive quadrature axis by axis
        let (lo, hi) = f.support_box(9.0);
        let integrand = |x: &[f64; 4]| {
            let k1 = MinkowskiMomentum::new(x[0], vec![x[1]]);
            let k2 = MinkowskiMomentum::new(x[2], vec![x[3]]);
            let k3 = k1.add(&k2).neg();
            let d = wightman_truncated_density_clamped(&p, 1.0, &[k1, k2, k3.clone()]);
            d * f.eval(&[x[0], x[1], x[2], x[3], k3.k0, k3.kvec[0]])
        };
        let b = quad::integrate_1d(
            |x0| {
                quad::integrate_1d(
                    |x1| {
                        quad::integrate_1d(
                            |x2| {
                                quad::integrate_1d(
                                    |x3| integrand(&[x0, x1, x2, x3]),
                                    lo[3],
                                    hi[3],
                                    &[],
                                    1e-7,
                                    1e-290,
                                    200,
                                )
                                .unwrap()
                            },
                            lo[2],
                            hi[2],
                            &[],
                            1e-6,
                            1e-290,
                            200,
                        )
                        .unwrap()
                    },
                    lo[1],
                    hi[1],
                    &[],
                    1e-6,
                    1e-290,
                    200,
                )
                .unwrap()
            },
            lo[0],
            hi[0],
            &[],
            1e-5,
            1e-290,
            200,
        )
        .unwrap();
        assert!(a.abs() > 1e-8, "pairing unexpectedly zero");
        assert!(rel_diff(a, b) < 2e-3, "{a} vs {b}");
    }

    #[test]
    fn three_point_pairing_converges_across_the_shell() {
        let p = params(0.25);
        let family = bound_family(&p, 3, 4, 1);
        // the narrowest on-shell member is the hardest integrand
        let (label, f) = &family[3];
        assert!(label.starts_with("shell-"));
        let v = pairing(
            &p,
            3,
            1.0,
            f,
            PairingOptions {
                rel_tol: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn bound_ratios_finite_with_nonpositive_shell_trend() {
        let p = params(0.25);
        let family = bound_family(&p, 2, 14, 99);
        let report = bound_ratio_study(
            &p,
            2,
            1.0,
            &family,
            4, // 2s+2 with s = 1
            PairingOptions {
                rel_tol: 1e-5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.max_ratio.is_finite());
        assert!(report.rows.iter().all(|r| r.ratio.is_finite()));
        assert!(
            report.shell_trend <= 0.1,
            "shell trend {} should be non-positive",
            report.shell_trend
        );
        // negative control: drop the weight and the wide subfamily blows up
        let control = bound_ratio_study(
            &p,
            2,
            1.0,
            &family,
            0,
            PairingOptions {
                rel_tol: 1e-5,
                ..Default::default()
            },
        )
        .unwrap();
        let trend = wide_width_trend(&control);
        assert!(trend > 0.3, "control trend {trend} should be positive");
    }
}
