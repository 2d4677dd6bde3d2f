//! Infinitely divisible site noise: Lévy triplets with finite discrete jump
//! laws, their cumulants, deterministic stream sampling and the potential
//! function diagnostic V(t) = log ρ(t) + c t².

use crate::error::{Error, Result};
use crate::quad;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One atom of a finite discrete jump distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpAtom {
    pub value: f64,
    pub prob: f64,
}

/// Infinitely divisible law via its Lévy triplet. Jump distributions are
/// restricted to finite discrete support so that moments of every order
/// exist and the cumulant sequence is closed-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyLaw {
    drift: f64,
    gaussian_var: f64,
    jump_rate: f64,
    jumps: Vec<JumpAtom>,
}

impl LevyLaw {
    pub fn new(drift: f64, gaussian_var: f64, jump_rate: f64, jumps: Vec<JumpAtom>) -> Result<Self> {
        if !(gaussian_var >= 0.0) {
            return Err(Error::InvalidParameter("gaussian_var must be >= 0".into()));
        }
        if !(jump_rate >= 0.0) {
            return Err(Error::InvalidParameter("jump_rate must be >= 0".into()));
        }
        if jump_rate > 0.0 {
            if jumps.is_empty() {
                return Err(Error::InvalidParameter(
                    "jump_rate > 0 requires a jump distribution".into(),
                ));
            }
            let total: f64 = jumps.iter().map(|j| j.prob).sum();
            if jumps.iter().any(|j| !(j.prob > 0.0) || !j.value.is_finite()) {
                return Err(Error::InvalidParameter(
                    "jump atoms need finite values and positive probabilities".into(),
                ));
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "jump probabilities sum to {total}, expected 1"
                )));
            }
        }
        Ok(Self {
            drift,
            gaussian_var,
            jump_rate,
            jumps,
        })
    }

    /// Pure centered Gaussian noise with variance σ².
    pub fn gaussian(variance: f64) -> Result<Self> {
        Self::new(0.0, variance, 0.0, vec![])
    }

    /// Compound Poisson with a single point mass at y ≠ 0, plus optional
    /// Gaussian part.
    pub fn poisson(rate: f64, jump: f64, gaussian_var: f64) -> Result<Self> {
        if jump == 0.0 {
            return Err(Error::InvalidParameter("point-mass jump must be nonzero".into()));
        }
        Self::new(0.0, gaussian_var, rate, vec![JumpAtom { value: jump, prob: 1.0 }])
    }

    /// Compound Poisson with unit point-mass jumps, drift-compensated so the
    /// first cumulant vanishes while every higher cumulant stays positive.
    pub fn compensated_poisson(rate: f64, jump: f64, gaussian_var: f64) -> Result<Self> {
        if jump == 0.0 {
            return Err(Error::InvalidParameter("point-mass jump must be nonzero".into()));
        }
        Self::new(
            -rate * jump,
            gaussian_var,
            rate,
            vec![JumpAtom { value: jump, prob: 1.0 }],
        )
    }

    /// Symmetric two-point jumps ±y with equal probability.
    pub fn symmetric_jumps(rate: f64, jump: f64, gaussian_var: f64) -> Result<Self> {
        if jump == 0.0 {
            return Err(Error::InvalidParameter("jump size must be nonzero".into()));
        }
        Self::new(
            0.0,
            gaussian_var,
            rate,
            vec![
                JumpAtom { value: jump, prob: 0.5 },
                JumpAtom { value: -jump, prob: 0.5 },
            ],
        )
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn gaussian_var(&self) -> f64 {
        self.gaussian_var
    }

    pub fn jump_rate(&self) -> f64 {
        self.jump_rate
    }

    pub fn jumps(&self) -> &[JumpAtom] {
        &self.jumps
    }

    /// E[Y^l] of the jump distribution (0 when there are no jumps).
    pub fn jump_moment(&self, l: u32) -> f64 {
        self.jumps
            .iter()
            .map(|j| j.prob * j.value.powi(l as i32))
            .sum()
    }

    /// l-th cumulant of the law. With finite-activity jumps and no
    /// small-jump compensator:
    ///   c_1 = a + λ E[Y],  c_2 = σ² + λ E[Y²],  c_l = λ E[Y^l] for l ≥ 3.
    /// The law is Gaussian exactly when c_l = 0 for all l > 2.
    pub fn cumulant(&self, l: u32) -> f64 {
        assert!(l >= 1, "cumulant order must be >= 1");
        match l {
            1 => self.drift + self.jump_rate * self.jump_moment(1),
            2 => self.gaussian_var + self.jump_rate * self.jump_moment(2),
            _ => self.jump_rate * self.jump_moment(l),
        }
    }

    /// Second moment E[X²] = c₂ + c₁² of the site law (the coefficient in
    /// the potential function).
    pub fn second_moment(&self) -> f64 {
        let c1 = self.cumulant(1);
        self.cumulant(2) + c1 * c1
    }

    /// True when every cumulant above the second vanishes.
    pub fn is_gaussian(&self) -> bool {
        self.jump_rate == 0.0
    }

    /// Lebesgue density of the site law: the Gaussian kernel convolved with
    /// the compound-Poisson jump distribution, with the Poisson series
    /// truncated once the remaining tail mass drops below 1e−14.
    /// Requires σ² > 0.
    pub fn density(&self, t: f64) -> Result<f64> {
        if self.gaussian_var <= 0.0 {
            return Err(Error::NoDensity);
        }
        let sigma2 = self.gaussian_var;
        let gauss = |x: f64| (-(x * x) / (2.0 * sigma2)).exp() / (2.0 * PI * sigma2).sqrt();
        if self.jump_rate == 0.0 {
            return Ok(gauss(t - self.drift));
        }
        let lambda = self.jump_rate;
        let mut weight = (-lambda).exp(); // P(count = 0)
        let mut cumulative = weight;
        let mut density = weight * gauss(t - self.drift);
        let mut convolution: Vec<(f64, f64)> = vec![(0.0, 1.0)]; // jump-sum atoms
        let mut p = 0u32;
        while 1.0 - cumulative > 1e-14 {
            p += 1;
            if p > 10_000 {
                return Err(Error::InvalidParameter(
                    "poisson series did not truncate (rate too large)".into(),
                ));
            }
            convolution = convolve_jumps(&convolution, &self.jumps);
            weight *= lambda / p as f64;
            cumulative += weight;
            let mut layer = 0.0;
            for &(sum, prob) in &convolution {
                layer += prob * gauss(t - self.drift - sum);
            }
            density += weight * layer;
        }
        Ok(density)
    }

    /// Potential function V(t) = log ρ(t) + c t² with c the second moment of
    /// the site law. For a pure-Gaussian law this is an explicit quadratic
    /// (interaction-free); any non-Gaussian component makes it non-quadratic.
    pub fn potential(&self, t: f64) -> Result<f64> {
        let rho = self.density(t)?;
        Ok(rho.ln() + self.second_moment() * t * t)
    }
}

/// One convolution step of a discrete jump-sum distribution with the jump
/// atoms; equal sums (exact bit equality) are merged.
fn convolve_jumps(current: &[(f64, f64)], jumps: &[JumpAtom]) -> Vec<(f64, f64)> {
    let mut next: Vec<(f64, f64)> = Vec::with_capacity(current.len() * jumps.len());
    for &(sum, prob) in current {
        for atom in jumps {
            next.push((sum + atom.value, prob * atom.prob));
        }
    }
    next.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
    for (sum, prob) in next {
        match merged.last_mut() {
            Some((s, p)) if *s == sum => *p += prob,
            _ => merged.push((sum, prob)),
        }
    }
    merged
}

/// Site law on a lattice: the base Lévy triplet plus the cell volume. The
/// site variable models the noise field value η(x) (not the cell integral),
/// so its l-th cumulant is c_l · v^{1−l}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeNoiseLaw {
    base: LevyLaw,
    cell_volume: f64,
}

impl LatticeNoiseLaw {
    pub fn new(base: LevyLaw, cell_volume: f64) -> Result<Self> {
        if !(cell_volume > 0.0) {
            return Err(Error::InvalidParameter("cell_volume must be > 0".into()));
        }
        Ok(Self { base, cell_volume })
    }

    pub fn base(&self) -> &LevyLaw {
        &self.base
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// l-th cumulant of the site variable: c_l · v^{1−l}.
    pub fn site_cumulant(&self, l: u32) -> f64 {
        self.base.cumulant(l) * self.cell_volume.powi(1 - l as i32)
    }
}

/// Deterministic per-stream generator: the pair (seed, stream) fully
/// determines the draw sequence regardless of scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw `count` i.i.d. site-noise values for the given stream index.
///
/// Each value is (N(a·v, σ²·v) + CompoundPoisson(λ·v)) / v, which realizes
/// the site cumulants c_l · v^{1−l}.
pub fn sample_site_noise(
    law: &LatticeNoiseLaw,
    count: usize,
    seed: u64,
    stream: u64,
) -> Vec<f64> {
    let v = law.cell_volume;
    let base = &law.base;
    let mut rng = stream_rng(seed, stream);
    let normal = if base.gaussian_var > 0.0 {
        Some(Normal::new(0.0, (base.gaussian_var * v).sqrt()).expect("valid std dev"))
    } else {
        None
    };
    let poisson = if base.jump_rate > 0.0 {
        Some(Poisson::new(base.jump_rate * v).expect("valid rate"))
    } else {
        None
    };
    // cumulative jump probabilities for inverse-CDF draws
    let mut cdf = Vec::with_capacity(base.jumps.len());
    let mut acc = 0.0;
    for atom in &base.jumps {
        acc += atom.prob;
        cdf.push((acc, atom.value));
    }

    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut cell = base.drift * v;
        if let Some(n) = &normal {
            cell += n.sample(&mut rng);
        }
        if let Some(p) = &poisson {
            let jumps = p.sample(&mut rng) as u64;
            for _ in 0..jumps {
                let u: f64 = rand::Rng::gen(&mut rng);
                let value = cdf
                    .iter()
                    .find(|(c, _)| u <= *c)
                    .map(|(_, y)| *y)
                    .unwrap_or_else(|| cdf.last().expect("nonempty jump cdf").1);
                cell += value;
            }
        }
        out.push(cell / v);
    }
    out
}

/// Numerical convolution oracle for the density: ∫ ρ_jump(ds) φ_G(t−a−s),
/// evaluated by quadrature against the exact jump-sum expansion. Used by
/// tests to validate [`LevyLaw::density`] through an independent route.
pub fn density_by_quadrature(law: &LevyLaw, t: f64) -> Result<f64> {
    if law.gaussian_var <= 0.0 {
        return Err(Error::NoDensity);
    }
    let sigma2 = law.gaussian_var;
    // Characteristic-function route: ρ(t) = (1/2π) ∫ e^{−iut} ψ(u) du with
    // ψ(u) = exp(iau − σ²u²/2 + λ(E[e^{iuY}] − 1)); everything is real after
    // symmetrization, leaving a damped cosine integral.
    let re_exponent = |u: f64| -> (f64, f64) {
        let mut re = -0.5 * sigma2 * u * u;
        let mut im = law.drift * u;
        for atom in law.jumps() {
            re += law.jump_rate * atom.prob * ((u * atom.value).cos() - 1.0);
            im += law.jump_rate * atom.prob * (u * atom.value).sin();
        }
        (re, im)
    };
    let integrand = |u: f64| {
        let (re, im) = re_exponent(u);
        re.exp() * (im - u * t).cos()
    };
    let cutoff = (2.0 * (700.0f64) / sigma2).sqrt(); // e^{−σ²u²/2} underflows past here
    let val = quad::integrate_1d(integrand, 0.0, cutoff, &[], 1e-11, 1e-13, 20_000)?;
    Ok(val / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k_statistics(data: &[f64]) -> [f64; 4] {
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let mut m = [0.0f64; 5];
        for &x in data {
            let d = x - mean;
            let mut p = d;
            for slot in m.iter_mut().skip(2) {
                p *= d;
                *slot += p;
            }
        }
        for slot in m.iter_mut().skip(2) {
            *slot /= n;
        }
        let k2 = n / (n - 1.0) * m[2];
        let k3 = n * n / ((n - 1.0) * (n - 2.0)) * m[3];
        let k4 = n * n * ((n + 1.0) * m[4] - 3.0 * (n - 1.0) * m[2] * m[2])
            / ((n - 1.0) * (n - 2.0) * (n - 3.0));
        [mean, k2, k3, k4]
    }

    /// Gate |batch-mean − expected| < 5·SE(batch means).
    fn batched_cumulant_gate(data: &[f64], order: usize, expected: f64) {
        let batches = 100;
        let size = data.len() / batches;
        let values: Vec<f64> = (0..batches)
            .map(|b| k_statistics(&data[b * size..(b + 1) * size])[order])
            .collect();
        let (mean, var) = crate::util::mean_var(&values);
        let se = (var / batches as f64).sqrt();
        assert!(
            (mean - expected).abs() < 5.0 * se.max(1e-12),
            "order {}: batch mean {mean} vs expected {expected} (se {se})",
            order + 1
        );
    }

    #[test]
    fn gaussian_law_has_no_higher_cumulants() {
        let law = LevyLaw::gaussian(1.0).unwrap();
        assert_eq!(law.cumulant(1), 0.0);
        assert_eq!(law.cumulant(2), 1.0);
        for l in 3..=8 {
            assert_eq!(law.cumulant(l), 0.0);
        }
        assert!(law.is_gaussian());
    }

    #[test]
    fn poisson_unit_jumps_have_constant_cumulants() {
        // Differentiating the Lévy exponent λ(e^{it} − 1) at 0 gives c_l = λ.
        let law = LevyLaw::poisson(2.0, 1.0, 0.0).unwrap();
        for l in 1..=8 {
            assert!((law.cumulant(l) - 2.0).abs() < 1e-15, "l = {l}");
        }
    }

    #[test]
    fn symmetric_jumps_kill_odd_cumulants() {
        let law = LevyLaw::symmetric_jumps(3.0, 1.0, 0.0).unwrap();
        assert_eq!(law.cumulant(3), 0.0);
        assert!((law.cumulant(4) - 3.0).abs() < 1e-15);
        assert_eq!(law.cumulant(5), 0.0);
    }

    #[test]
    fn cumulants_linear_in_triplet() {
        let a = LevyLaw::new(0.0, 1.5, 0.0, vec![]).unwrap();
        let b = LevyLaw::poisson(2.0, 0.5, 0.0).unwrap();
        let ab = LevyLaw::new(0.0, 1.5, 2.0, vec![JumpAtom { value: 0.5, prob: 1.0 }]).unwrap();
        for l in 2..=6 {
            assert!((ab.cumulant(l) - a.cumulant(l) - b.cumulant(l)).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_law_samples_to_zero() {
        let law = LatticeNoiseLaw::new(LevyLaw::new(0.0, 0.0, 0.0, vec![]).unwrap(), 0.5).unwrap();
        let draws = sample_site_noise(&law, 100, 7, 0);
        assert!(draws.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sample_determinism_and_stream_independence() {
        let law = LatticeNoiseLaw::new(LevyLaw::poisson(1.5, 1.0, 0.5).unwrap(), 0.25).unwrap();
        let a = sample_site_noise(&law, 1000, 42, 3);
        let b = sample_site_noise(&law, 1000, 42, 3);
        assert_eq!(a, b);
        let c = sample_site_noise(&law, 1000, 42, 4);
        assert_ne!(a, c);
        // crude independence check between streams
        let n = a.len() as f64;
        let (ma, va) = crate::util::mean_var(&a);
        let (mc, vc) = crate::util::mean_var(&c);
        let cov: f64 = a
            .iter()
            .zip(&c)
            .map(|(x, y)| (x - ma) * (y - mc))
            .sum::<f64>()
            / (n - 1.0);
        let corr = cov / (va * vc).sqrt();
        assert!(corr.abs() < 5.0 / n.sqrt(), "corr = {corr}");
    }

    #[test]
    fn empirical_cumulants_match_lattice_scaling() {
        let v = 0.5;
        let base = LevyLaw::poisson(2.0, 1.0, 1.0).unwrap();
        let law = LatticeNoiseLaw::new(base, v).unwrap();
        let draws = sample_site_noise(&law, 1_000_000, 9, 0);
        batched_cumulant_gate(&draws, 0, law.site_cumulant(1));
        batched_cumulant_gate(&draws, 1, law.site_cumulant(2));
        batched_cumulant_gate(&draws, 2, law.site_cumulant(3));
        batched_cumulant_gate(&draws, 3, law.site_cumulant(4));
    }

    #[test]
    fn gaussian_potential_is_explicit_quadratic() {
        let law = LevyLaw::gaussian(1.0).unwrap();
        for t in [-2.0, -0.5, 0.0, 0.7, 1.9] {
            let expected = 0.5 * t * t - 0.5 * (2.0 * PI).ln();
            assert!((law.potential(t).unwrap() - expected).abs() < 1e-12);
        }
        assert!(law.is_gaussian());
    }

    #[test]
    fn potential_requires_density() {
        let law = LevyLaw::poisson(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(law.potential(0.0), Err(Error::NoDensity)));
    }

    #[test]
    fn density_series_matches_quadrature_oracle() {
        let law = LevyLaw::poisson(1.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.5, 1.3, -0.8] {
            let series = law.density(t).unwrap();
            let oracle = density_by_quadrature(&law, t).unwrap();
            assert!(
                (series - oracle).abs() < 1e-8 * series.max(1.0),
                "t = {t}: {series} vs {oracle}"
            );
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let law = LevyLaw::new(
            0.3,
            0.7,
            1.2,
            vec![
                JumpAtom { value: 1.0, prob: 0.6 },
                JumpAtom { value: -0.5, prob: 0.4 },
            ],
        )
        .unwrap();
        let total = quad::integrate_1d(
            |t| law.density(t).unwrap(),
            -30.0,
            30.0,
            &[],
            1e-10,
            0.0,
            20_000,
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-9, "total mass {total}");
    }
}
