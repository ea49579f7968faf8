//! Error-probability expressions for the round-modulo fold and the sphere
//! bounds of `BW_{2^m}`.
//!
//! Noise variances are always per complex dimension: `n ~ CN(0, σ²)` has
//! real and imaginary parts of variance `σ²/2` each.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};
use thiserror::Error;

use crate::bwlattice;
use crate::decoders::hard_fold;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("noise variance must be positive, got {0}")]
    BadVariance(f64),
    #[error("bound values must lie in [0, 1] on a strictly increasing grid")]
    BadCurve,
    #[error("m = {0} is out of range")]
    BadM(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self, AnalysisError> {
        if sigma2 > 0.0 && sigma2.is_finite() {
            Ok(NoiseModel { sigma2 })
        } else {
            Err(AnalysisError::BadVariance(sigma2))
        }
    }

    /// `σ² = 10^{-snr/10}`.
    pub fn from_inv_snr_db(snr_db: f64) -> Self {
        NoiseModel {
            sigma2: 10f64.powf(-snr_db / 10.0),
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn per_real_dim(&self) -> f64 {
        self.sigma2 / 2.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        complex_gaussian(self.sigma2, rng)
    }
}

/// One draw of `CN(0, σ²)`.
pub fn complex_gaussian<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> Complex64 {
    let sd = (sigma2 / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(sd * re, sd * im)
}

/// Gaussian tail `Q(x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `Pr(lo < y ≤ hi)` for `y ~ N(0, sd²)`, accurate in both tails.
fn interval_prob(lo: f64, hi: f64, sd: f64) -> f64 {
    let (lo, hi) = (lo / sd, hi / sd);
    if lo >= 0.0 {
        q_func(lo) - q_func(hi)
    } else if hi <= 0.0 {
        q_func(-hi) - q_func(-lo)
    } else {
        1.0 - q_func(-lo) - q_func(hi)
    }
}

const SERIES_TOL: f64 = 1e-15;
const SERIES_MAX_TERMS: i64 = 1 << 24;

/// Sums `term(k) + term(-1-k)` (or `term(k) + term(-k)` when `symmetric`)
/// for `k = 0, 1, ...` until the newest contribution drops below
/// `SERIES_TOL` of the running sum. Both tails must decay monotonically.
fn sum_outward(symmetric: bool, term: impl Fn(i64) -> f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let mut t = term(k);
        let mirror = if symmetric { -k } else { -1 - k };
        if mirror != k {
            t += term(mirror);
        }
        sum += t;
        if t <= SERIES_TOL * sum || (sum == 0.0 && k > 0) {
            break;
        }
    }
    sum
}

fn sd_per_axis(sigma2: f64) -> f64 {
    (sigma2 / 2.0).sqrt()
}

/// Probability that one axis rounds to an odd integer.
pub fn p_odd(sigma2: f64) -> f64 {
    let sd = sd_per_axis(sigma2);
    sum_outward(false, |a| {
        let a = a as f64;
        interval_prob(2.0 * a + 0.5, 2.0 * a + 1.5, sd)
    })
}

/// Probability that one axis rounds to an even integer.
pub fn p_even(sigma2: f64) -> f64 {
    let sd = sd_per_axis(sigma2);
    sum_outward(true, |a| {
        let a = a as f64;
        interval_prob(2.0 * a - 0.5, 2.0 * a + 0.5, sd)
    })
}

/// Cross-over probability of the fold, `2P_o - 2P_o²`.
pub fn p_cross(sigma2: f64) -> f64 {
    let po = p_odd(sigma2);
    2.0 * po - 2.0 * po * po
}

/// `Σ_a e^{(-4a² - 2a)/σ²}`, the theta-function factor.
pub fn theta_series(sigma2: f64) -> f64 {
    sum_outward(false, |a| {
        let a = a as f64;
        ((-4.0 * a * a - 2.0 * a) / sigma2).exp()
    })
}

/// `e^{-1/(4σ²)}·ϑ(4i/(πσ²), i/(πσ²))` without the clamp to 1.
pub fn theta_bound_raw(sigma2: f64) -> f64 {
    (-1.0 / (4.0 * sigma2)).exp() * theta_series(sigma2)
}

/// Jacobi-theta upper bound on [`p_cross`], capped at 1.
pub fn theta_bound(sigma2: f64) -> f64 {
    theta_bound_raw(sigma2).min(1.0)
}

/// Tail of a sum of `n` unit-mean exponentials: `Q(n, x)`.
fn gamma_tail(n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if !x.is_finite() {
        return 0.0;
    }
    gamma_ur(n as f64, x).clamp(0.0, 1.0)
}

/// `Pr(|n|² > N/4)` for `n ~ CN(0, σ²_eff)^N`.
pub fn sphere_upper_bound(sigma2_eff: f64, n: usize) -> f64 {
    gamma_tail(n, n as f64 / 4.0 / sigma2_eff)
}

/// Squared radius of the `2N`-dimensional real ball whose volume equals the
/// covolume of `BW_{2^m}`.
pub fn effective_radius_sq(m: u32) -> Result<f64, AnalysisError> {
    let p = bwlattice::params(m).map_err(|_| AnalysisError::BadM(m))?;
    let n = p.n as f64;
    // π^N r^{2N} / N! = 2^{covolume_log2}
    let ln_r2 = (ln_gamma(n + 1.0) + p.covolume_log2 as f64 * std::f64::consts::LN_2) / n
        - std::f64::consts::PI.ln();
    Ok(ln_r2.exp())
}

/// `Pr(|n|² > r_eff²)`, the sphere lower bound.
pub fn sphere_lower_bound(sigma2_eff: f64, m: u32) -> Result<f64, AnalysisError> {
    let r2 = effective_radius_sq(m)?;
    Ok(gamma_tail(1 << m, r2 / sigma2_eff))
}

/// Effective noise seen by the Reed-Muller decoder when the zero point is
/// sent: `d` if the fold keeps bit 0, `1 - d` if it flips it.
pub fn eff_noise_sample<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> f64 {
    eff_noise_of(complex_gaussian(sigma2, rng))
}

pub fn eff_noise_of(y: Complex64) -> f64 {
    let (b, rho) = hard_fold(y);
    let d = (1.0 - rho) / 2.0;
    if b == 0 {
        d
    } else {
        1.0 - d
    }
}

/// Monte-Carlo estimate of a probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hits: u64,
    pub trials: u64,
    pub p: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(hits: u64, trials: u64) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        Estimate {
            hits,
            trials,
            p,
            stderr: binomial_stderr(p, trials),
        }
    }
}

pub fn binomial_stderr(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        (p * (1.0 - p) / trials as f64).sqrt()
    }
}

/// `Pr(Σ_{j<N} (n_j^eff)² > N/4)` by simulation.
pub fn eff_noise_exceed_prob<R: Rng + ?Sized>(
    sigma2: f64,
    n: usize,
    trials: u64,
    rng: &mut R,
) -> Estimate {
    let threshold = n as f64 / 4.0;
    let hits = (0..trials.max(1))
        .filter(|_| {
            let energy: f64 = (0..n)
                .map(|_| {
                    let e = eff_noise_sample(sigma2, rng);
                    e * e
                })
                .sum();
            energy > threshold
        })
        .count() as u64;
    Estimate::new(hits, trials.max(1))
}

/// Histogram of effective-noise samples over `bins` equal bins of `[0, 1]`.
pub fn eff_noise_histogram<R: Rng + ?Sized>(
    sigma2: f64,
    samples: u64,
    bins: usize,
    rng: &mut R,
) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    for _ in 0..samples {
        let e = eff_noise_sample(sigma2, rng);
        let idx = ((e * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    Pc,
    PcTheta,
    Sub,
    Slb,
    EffNoiseUb,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Pc => "pc",
            BoundKind::PcTheta => "pc_theta",
            BoundKind::Sub => "sub",
            BoundKind::Slb => "slb",
            BoundKind::EffNoiseUb => "effnoise_ub",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            BoundKind::Pc,
            BoundKind::PcTheta,
            BoundKind::Sub,
            BoundKind::Slb,
            BoundKind::EffNoiseUb,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub grid: Vec<(f64, f64)>,
}

impl BoundCurve {
    pub fn new(kind: BoundKind, grid: Vec<(f64, f64)>) -> Result<Self, AnalysisError> {
        let increasing = grid.windows(2).all(|w| w[0].0 < w[1].0);
        let in_range = grid.iter().all(|&(_, v)| (0.0..=1.0).contains(&v));
        if increasing && in_range {
            Ok(BoundCurve { kind, grid })
        } else {
            Err(AnalysisError::BadCurve)
        }
    }

    /// Evaluates a closed-form bound on an SNR grid. `sigma2_of` maps an SNR
    /// in dB to the per-complex-dimension variance the bound is taken at.
    pub fn evaluate(
        kind: BoundKind,
        snr_db: &[f64],
        m: u32,
        sigma2_of: impl Fn(f64) -> f64,
    ) -> Result<Self, AnalysisError> {
        let n = bwlattice::params(m).map_err(|_| AnalysisError::BadM(m))?.n;
        let grid = snr_db
            .iter()
            .map(|&s| {
                let sigma2 = sigma2_of(s);
                NoiseModel::new(sigma2)?;
                let v = match kind {
                    BoundKind::Pc => p_cross(sigma2),
                    BoundKind::PcTheta => theta_bound(sigma2),
                    BoundKind::Sub => sphere_upper_bound(sigma2, n),
                    BoundKind::Slb => sphere_lower_bound(sigma2, m)?,
                    BoundKind::EffNoiseUb => return Err(AnalysisError::BadCurve),
                };
                Ok((s, v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        BoundCurve::new(kind, grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn grid() -> Vec<f64> {
        (0..=70).map(|k| -5.0 + 0.5 * k as f64).collect()
    }

    #[test]
    fn odd_even_limits() {
        assert!(p_odd(1e-4) < 1e-300);
        assert!((p_even(1e-4) - 1.0).abs() < 1e-15);
        assert!((p_odd(1e4) - 0.5).abs() < 1e-9);
        assert!((p_even(1e4) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn odd_even_partition() {
        for s in grid() {
            let sigma2 = NoiseModel::from_inv_snr_db(s).sigma2();
            assert!((p_odd(sigma2) + p_even(sigma2) - 1.0).abs() < 1e-12, "snr {s}");
        }
        for sigma2 in [1e-3, 0.1, 1.0, 10.0, 100.0, 1000.0] {
            assert!((p_odd(sigma2) + p_even(sigma2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_probability_against_quadrature() {
        // composite Simpson over each odd rounding cell (2a+0.5, 2a+1.5]
        for sigma2 in [0.05, 0.3, 1.0, 4.0] {
            let sd = (sigma2 / 2.0f64).sqrt();
            let pdf = |y: f64| (-y * y / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
            let reach = (40.0 * sd).ceil() as i64 + 2;
            let mut acc = 0.0;
            for a in -reach..=reach {
                let (lo, hi) = (2.0 * a as f64 + 0.5, 2.0 * a as f64 + 1.5);
                let steps = 2000;
                let h = (hi - lo) / steps as f64;
                let mut cell = pdf(lo) + pdf(hi);
                for k in 1..steps {
                    cell += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(lo + k as f64 * h);
                }
                acc += cell * h / 3.0;
            }
            assert!((acc - p_odd(sigma2)).abs() < 1e-10, "{sigma2}: {acc} vs {}", p_odd(sigma2));
        }
    }

    #[test]
    fn cross_over_extremes() {
        assert!(p_cross(1e-4) < 1e-300);
        assert!((p_cross(1e4) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn theta_dominates_cross_over() {
        for s in grid() {
            let sigma2 = NoiseModel::from_inv_snr_db(s).sigma2();
            assert!(theta_bound(sigma2) >= p_cross(sigma2), "snr {s}");
        }
        let sigma2 = NoiseModel::from_inv_snr_db(10.0).sigma2();
        assert!(theta_bound(sigma2) > p_cross(sigma2) * 1.01);
    }

    #[test]
    fn theta_small_noise_is_leading_term() {
        let sigma2 = 0.01;
        assert!((theta_bound_raw(sigma2) / (-1.0 / (4.0 * sigma2)).exp() - 1.0).abs() < 1e-12);
        assert!(theta_bound(1e-4) < 1e-300);
    }

    #[test]
    fn sphere_upper_bound_cases() {
        assert_eq!(sphere_upper_bound(1e-9, 16), 0.0);
        for sigma2 in [0.05, 0.3, 2.0] {
            let want = (-0.25f64 / sigma2).exp();
            assert!((sphere_upper_bound(sigma2, 1) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_upper_bound_matches_simulation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for (n, sigma2) in [(4usize, 0.25), (16, 0.2), (16, 0.3)] {
            let trials = 200_000u64;
            let hits = (0..trials)
                .filter(|_| {
                    (0..n)
                        .map(|_| complex_gaussian(sigma2, &mut rng).norm_sqr())
                        .sum::<f64>()
                        > n as f64 / 4.0
                })
                .count() as u64;
            let est = Estimate::new(hits, trials);
            let exact = sphere_upper_bound(sigma2, n);
            assert!((est.p - exact).abs() < 3.0 * est.stderr.max(1e-6), "{n} {sigma2}: {} vs {exact}", est.p);
        }
    }

    #[test]
    fn effective_radius_m2() {
        let r = effective_radius_sq(2).unwrap().sqrt();
        let want = (384.0 / std::f64::consts::PI.powi(4)).powf(1.0 / 8.0);
        assert!((r - want).abs() < 1e-12);
        assert!((r - 1.187_043_042).abs() < 1e-8);
    }

    #[test]
    fn sphere_lower_bound_limits() {
        assert!((sphere_lower_bound(1e6, 3).unwrap() - 1.0).abs() < 1e-6);
        assert!(sphere_lower_bound(1e-3, 3).unwrap() < 1e-100);
        for m in 1..=10 {
            let r2 = effective_radius_sq(m).unwrap();
            // the covolume-matched ball is never smaller than the packing ball
            assert!(r2 >= bwlattice::params(m).unwrap().packing_radius_sq);
        }
    }

    #[test]
    fn bounds_are_monotone_probabilities() {
        let g = grid();
        for kind in [BoundKind::Pc, BoundKind::PcTheta, BoundKind::Sub, BoundKind::Slb] {
            for m in [2, 4, 6] {
                let curve = BoundCurve::evaluate(kind, &g, m, |s| NoiseModel::from_inv_snr_db(s).sigma2()).unwrap();
                for w in curve.grid.windows(2) {
                    assert!(w[1].1 <= w[0].1 + 1e-15, "{kind:?} m={m}");
                }
            }
        }
        assert!(BoundCurve::new(BoundKind::Pc, vec![(1.0, 0.5), (0.0, 0.4)]).is_err());
        assert!(BoundCurve::new(BoundKind::Pc, vec![(1.0, 1.5)]).is_err());
    }

    #[test]
    fn empirical_cross_over_matches() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for s in [0.0, 5.0, 10.0] {
            let sigma2 = NoiseModel::from_inv_snr_db(s).sigma2();
            let trials = 1_000_000u64;
            let hits = (0..trials)
                .filter(|_| hard_fold(complex_gaussian(sigma2, &mut rng)).0 == 1)
                .count() as u64;
            let est = Estimate::new(hits, trials);
            assert!((est.p - p_cross(sigma2)).abs() < 3.0 * est.stderr, "snr {s}");
        }
    }

    #[test]
    fn effective_noise_samples() {
        assert_eq!(eff_noise_of(Complex64::new(0.0, 0.0)), 0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut prev_mean = 0.0;
        for s in [25.0, 15.0, 10.0, 5.0, 0.0] {
            let sigma2 = NoiseModel::from_inv_snr_db(s).sigma2();
            let samples: Vec<f64> = (0..50_000).map(|_| eff_noise_sample(sigma2, &mut rng)).collect();
            assert!(samples.iter().all(|e| (0.0..=1.0).contains(e)));
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            assert!(mean >= prev_mean);
            prev_mean = mean;
        }
    }

    #[test]
    fn effective_noise_exceedance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(24);
        assert_eq!(eff_noise_exceed_prob(1e-6, 16, 1000, &mut rng).hits, 0);
        let e = eff_noise_exceed_prob(1.0, 4, 10_000, &mut rng);
        assert!(e.p > 0.0 && e.p < 1.0);
        assert!(e.stderr > 0.0);
    }
}
