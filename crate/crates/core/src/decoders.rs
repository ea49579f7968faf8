//! Lattice decoders for `BW_{2^m}`.
//!
//! [`SeqBw`] is the multilevel successive-cancellation decoder: at level `r`
//! the received vector is folded modulo `1+i` into hard bits and
//! reliabilities, the level codeword is decoded in `RM(r, m)`, cancelled, and
//! the residual is divided by `1+i`. After `m` levels the residual is
//! rounded. [`bwcd`] first trims the received vector towards the shaping box.
//! [`MlOracle`] is an exhaustive search used to validate both on small codes.

use num_complex::Complex64;
use thiserror::Error;

use crate::bwlattice::{self, BwCode, BwError, Codeword, LatticePoint, ShapeBox};
use crate::gint::GaussInt;
use crate::rmcode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("expected {expected} components, got {got}")]
    Length { expected: usize, got: usize },
    #[error("component {0} is not finite or too large")]
    BadComponent(usize),
    #[error("exhaustive decoding is limited to m <= {max}, got {m}")]
    TooLarge { m: u32, max: u32 },
    #[error(transparent)]
    Lattice(#[from] BwError),
}

/// Received vector `y = x + n` in lattice coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedVector(Vec<Complex64>);

impl ReceivedVector {
    /// Largest accepted magnitude per real component.
    pub const LIMIT: f64 = (1u64 << 40) as f64;

    pub fn new(y: Vec<Complex64>) -> Result<Self, DecodeError> {
        if let Some(j) = y.iter().position(|z| {
            !z.re.is_finite() || !z.im.is_finite() || z.re.abs() > Self::LIMIT || z.im.abs() > Self::LIMIT
        }) {
            return Err(DecodeError::BadComponent(j));
        }
        Ok(ReceivedVector(y))
    }

    pub fn from_point(p: &LatticePoint) -> Self {
        ReceivedVector(
            p.0.iter()
                .map(|z| Complex64::new(z.re as f64, z.im as f64))
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Nearest integer with halves rounded down (`⌈a + 0.5⌋ = a`).
pub fn round_half_down(a: f64) -> f64 {
    (a - 0.5).ceil()
}

/// Hard bit `(⌈ℜy⌋ + ⌈ℑy⌋) mod 2` and reliability `1 - 2d`, where `d` is the
/// larger of the two rounding distances.
pub fn hard_fold(y: Complex64) -> (u8, f64) {
    let (re, im) = (round_half_down(y.re), round_half_down(y.im));
    let bit = ((re as i64 + im as i64).rem_euclid(2)) as u8;
    let d = (re - y.re).abs().max((im - y.im).abs());
    (bit, (1.0 - 2.0 * d).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub point: LatticePoint,
    /// Decoded `RM(r, m)` codeword for each level `r`.
    pub level_codewords: Vec<Vec<u8>>,
    /// Rounded residual after the last level.
    pub quotient: Vec<GaussInt>,
    /// Recovered information bits, or the reason they could not be recovered.
    pub bits: Result<Vec<u8>, BwError>,
    /// Reed-Muller metric operations spent on this decode.
    pub metric_ops: u64,
}

/// Sequential decoder for one lattice dimension.
#[derive(Debug, Clone)]
pub struct SeqBw {
    code: BwCode,
}

impl SeqBw {
    pub fn new(m: u32) -> Result<Self, DecodeError> {
        Ok(SeqBw {
            code: BwCode::new(m)?,
        })
    }

    pub fn m(&self) -> u32 {
        self.code.m()
    }

    pub fn code(&self) -> &BwCode {
        &self.code
    }

    pub fn decode(&self, y: &ReceivedVector) -> Result<DecodeResult, DecodeError> {
        let m = self.code.m();
        let n = self.code.n();
        if y.len() != n {
            return Err(DecodeError::Length {
                expected: n,
                got: y.len(),
            });
        }
        let mut cur = y.0.clone();
        let mut levels = Vec::with_capacity(m as usize);
        let mut metric = vec![0.0; n];
        let mut ops = 0u64;
        let half_conj = Complex64::new(0.5, -0.5); // 1/(1+i)
        for r in 0..m {
            for (s, &z) in metric.iter_mut().zip(&cur) {
                let (b, rho) = hard_fold(z);
                *s = if b == 0 { rho } else { -rho };
            }
            let mut c = vec![0u8; n];
            rmcode::decode_metric(r, m, &metric, &mut c, &mut ops);
            for (z, &bit) in cur.iter_mut().zip(&c) {
                *z = (*z - bit as f64) * half_conj;
            }
            levels.push(c);
        }
        let quotient: Vec<GaussInt> = cur
            .iter()
            .map(|z| GaussInt::new(round_half_down(z.re) as i64, round_half_down(z.im) as i64))
            .collect();
        let point = bwlattice::construction_d_point(&levels, &quotient, m)?;
        let bits = self.code.decode_levels(&levels);
        Ok(DecodeResult {
            point,
            level_codewords: levels,
            quotient,
            bits,
            metric_ops: ops,
        })
    }
}

pub fn seqbw(y: &ReceivedVector, m: u32) -> Result<DecodeResult, DecodeError> {
    SeqBw::new(m)?.decode(y)
}

/// Default trimming margin, `1/(2√2)`.
pub const DEFAULT_EPSILON: f64 = 0.353_553_390_593_273_8;

/// Clips `y` radially around `delta` to the half-width `delta + eps`.
pub fn trim_about(y: f64, eps: f64, delta: f64) -> f64 {
    let r = y - delta;
    let t = delta + eps;
    let b = if r.abs() > t { t / r.abs() * r } else { r };
    b + delta
}

/// Box centres `(Δ_I, Δ_Q)` of the shaping box for `m`.
pub fn box_centers(m: u32) -> (f64, f64) {
    let b = ShapeBox::new(m);
    ((b.re_size - 1) as f64 / 2.0, (b.im_size - 1) as f64 / 2.0)
}

/// One-axis trim with `Δ = (2^{m/2} - 1)/2`. For odd `m` this is the
/// in-phase axis; use [`trim_vector`] for the per-axis version.
pub fn trim(y: f64, eps: f64, m: u32) -> f64 {
    trim_about(y, eps, box_centers(m).0)
}

pub fn trim_vector(y: &ReceivedVector, eps: f64, m: u32) -> ReceivedVector {
    let (di, dq) = box_centers(m);
    ReceivedVector(
        y.0.iter()
            .map(|z| Complex64::new(trim_about(z.re, eps, di), trim_about(z.im, eps, dq)))
            .collect(),
    )
}

/// Lattice-code decoder: trim, sequential decode, then read the bits off the
/// decoded point.
pub fn bwcd_with(dec: &SeqBw, y: &ReceivedVector, eps: f64) -> Result<DecodeResult, DecodeError> {
    let trimmed = trim_vector(y, eps, dec.m());
    let mut out = dec.decode(&trimmed)?;
    out.bits = dec.code().decode(&out.point);
    Ok(out)
}

pub fn bwcd(y: &ReceivedVector, eps: f64, m: u32) -> Result<DecodeResult, DecodeError> {
    bwcd_with(&SeqBw::new(m)?, y, eps)
}

/// Exhaustive minimum-distance decoder over the whole lattice code.
#[derive(Debug, Clone)]
pub struct MlOracle {
    m: u32,
    entries: Vec<(Vec<u8>, Codeword)>,
}

impl MlOracle {
    pub const MAX_M: u32 = 3;

    pub fn new(m: u32) -> Result<Self, DecodeError> {
        if m > Self::MAX_M {
            return Err(DecodeError::TooLarge {
                m,
                max: Self::MAX_M,
            });
        }
        let code = BwCode::new(m)?;
        let k = code.bits_per_codeword();
        let entries = (0u64..1 << k)
            .map(|w| {
                let bits: Vec<u8> = (0..k).map(|i| (w >> (k - 1 - i) & 1) as u8).collect();
                let cw = code.encode(&bits)?;
                Ok((bits, cw))
            })
            .collect::<Result<_, BwError>>()?;
        Ok(MlOracle { m, entries })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Closest codeword and its bits. Ties go to the lexicographically
    /// smallest message.
    pub fn decode(&self, y: &ReceivedVector) -> Result<(&Codeword, &[u8]), DecodeError> {
        let n = 1usize << self.m;
        if y.len() != n {
            return Err(DecodeError::Length {
                expected: n,
                got: y.len(),
            });
        }
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for (i, (_, cw)) in self.entries.iter().enumerate() {
            let d: f64 = cw
                .coords()
                .iter()
                .zip(&y.0)
                .map(|(c, z)| (z - Complex64::new(c.re as f64, c.im as f64)).norm_sqr())
                .sum();
            if d < best {
                best = d;
                arg = i;
            }
        }
        let (bits, cw) = &self.entries[arg];
        Ok((cw, bits))
    }
}

pub fn ml_oracle(y: &ReceivedVector, m: u32) -> Result<Codeword, DecodeError> {
    Ok(MlOracle::new(m)?.decode(y)?.0.clone())
}

/// Metric operations of one sequential decode, and the `N·log2(N)^2`
/// reference it is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpCount {
    pub m: u32,
    pub metric_ops: u64,
    pub n_log2_sq: f64,
}

pub fn op_counter(result: &DecodeResult, m: u32) -> OpCount {
    let n = (1u64 << m) as f64;
    OpCount {
        m,
        metric_ops: result.metric_ops,
        n_log2_sq: n * (m as f64) * (m as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rounding_ties_go_down() {
        assert_eq!(round_half_down(0.5), 0.0);
        assert_eq!(round_half_down(1.5), 1.0);
        assert_eq!(round_half_down(-0.5), -1.0);
        assert_eq!(round_half_down(0.51), 1.0);
        assert_eq!(round_half_down(-1.2), -1.0);
    }

    #[test]
    fn hard_fold_examples() {
        assert_eq!(hard_fold(c(0.0, 0.0)), (0, 1.0));
        assert_eq!(hard_fold(c(0.5, 0.0)), (0, 0.0));
        let (b, rho) = hard_fold(c(1.2, 0.9));
        assert_eq!(b, 0);
        assert!((rho - 0.6).abs() < 1e-12);
        assert_eq!(hard_fold(c(1.0, 0.0)).0, 1);
        assert_eq!(hard_fold(c(-1.0, 2.0)).0, 1);
    }

    #[test]
    fn lattice_points_decode_to_themselves() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for m in 1..=6 {
            let dec = SeqBw::new(m).unwrap();
            let code = dec.code().clone();
            for _ in 0..50 {
                let bits: Vec<u8> = (0..code.bits_per_codeword()).map(|_| rng.random_range(0..2)).collect();
                let mut p = code.encode(&bits).unwrap().into_point();
                let shift = GaussInt::one_plus_i_pow(m).unwrap();
                for z in p.0.iter_mut() {
                    let a = GaussInt::new(rng.random_range(-3..4), rng.random_range(-3..4));
                    *z = z.add(shift.mul(a).unwrap()).unwrap();
                }
                let out = dec.decode(&ReceivedVector::from_point(&p)).unwrap();
                assert_eq!(out.point, p);
                assert_eq!(out.bits.unwrap(), bits);
            }
        }
    }

    #[test]
    fn small_offset_decodes_to_origin() {
        let y = ReceivedVector::new(vec![c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = seqbw(&y, 2).unwrap();
        assert_eq!(out.point.0, vec![GaussInt::ZERO; 4]);
    }

    #[test]
    fn reconstruction_identity_and_membership() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for m in 1..=6 {
            let dec = SeqBw::new(m).unwrap();
            for _ in 0..200 {
                let y: Vec<Complex64> = (0..1 << m)
                    .map(|_| c(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)))
                    .collect();
                let out = dec.decode(&ReceivedVector::new(y).unwrap()).unwrap();
                assert!(bwlattice::is_bw_point(&out.point, m));
                // ĉ_0 + (1+i)(ĉ_1 + (1+i)(... + (1+i)·quotient))
                let mut acc = out.quotient.clone();
                for level in out.level_codewords.iter().rev() {
                    for (a, &b) in acc.iter_mut().zip(level) {
                        *a = a.mul(crate::gint::ONE_PLUS_I).unwrap().add(GaussInt::new(b as i64, 0)).unwrap();
                    }
                }
                assert_eq!(acc, out.point.0);
                assert_eq!(out.bits.clone().unwrap(), dec.code().decode(&out.point).unwrap());
            }
        }
    }

    #[test]
    fn packing_radius_guarantee_sampled() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        for m in 1..=6 {
            let dec = SeqBw::new(m).unwrap();
            let n = 1usize << m;
            for _ in 0..200 {
                let bits: Vec<u8> = (0..dec.code().bits_per_codeword()).map(|_| rng.random_range(0..2)).collect();
                let x = dec.code().encode(&bits).unwrap().into_point();
                // uniform in the ball of squared radius N/4
                let g: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                let radius = (n as f64 / 4.0).sqrt() * rng.random::<f64>().powf(1.0 / (2 * n) as f64);
                let y: Vec<Complex64> = x
                    .0
                    .iter()
                    .enumerate()
                    .map(|(j, z)| c(z.re as f64 + g[2 * j] / norm * radius, z.im as f64 + g[2 * j + 1] / norm * radius))
                    .collect();
                let out = dec.decode(&ReceivedVector::new(y).unwrap()).unwrap();
                assert_eq!(out.point, x, "m = {m}");
            }
        }
    }

    #[test]
    fn determinism() {
        let y = ReceivedVector::new((0..16).map(|j| c(j as f64 * 0.37, -(j as f64) * 0.21)).collect()).unwrap();
        assert_eq!(seqbw(&y, 4).unwrap(), seqbw(&y, 4).unwrap());
    }

    #[test]
    fn trim_examples() {
        let eps = DEFAULT_EPSILON;
        let out = trim(3.0, eps, 2);
        assert!((out - (0.5 + 0.5 + eps)).abs() < 1e-12);
        assert!((out - 1.353_553_390_593_273_8).abs() < 1e-12);
        assert_eq!(trim(0.5, eps, 2), 0.5);
        assert_eq!(trim(0.9, eps, 2), 0.9);
        assert!((trim(-0.2, eps, 2) + 0.2).abs() < 1e-12);
        // idempotent
        for y in [-10.0, -1.0, 0.0, 0.7, 2.0, 9.0] {
            let once = trim(y, eps, 4);
            assert!((trim(once, eps, 4) - once).abs() < 1e-12);
        }
    }

    #[test]
    fn trim_bounds_far_inputs() {
        for m in 1..=8 {
            let b = ShapeBox::new(m);
            let y = ReceivedVector::new(vec![c(1e6, -1e6), c(-1e5, 3e5)]).unwrap();
            for z in trim_vector(&y, 0.3, m).as_slice() {
                assert!(z.re >= -0.3 - 1e-9 && z.re <= (b.re_size - 1) as f64 + 0.3 + 1e-9);
                assert!(z.im >= -0.3 - 1e-9 && z.im <= (b.im_size - 1) as f64 + 0.3 + 1e-9);
            }
        }
    }

    #[test]
    fn bwcd_on_clean_codewords() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for m in 1..=6 {
            let dec = SeqBw::new(m).unwrap();
            for _ in 0..20 {
                let bits: Vec<u8> = (0..dec.code().bits_per_codeword()).map(|_| rng.random_range(0..2)).collect();
                let x = dec.code().encode(&bits).unwrap().into_point();
                let y = ReceivedVector::from_point(&x);
                let out = bwcd_with(&dec, &y, DEFAULT_EPSILON).unwrap();
                assert_eq!(out.bits.unwrap(), bits);
                assert_eq!(trim_vector(&y, DEFAULT_EPSILON, m), y);
            }
        }
    }

    #[test]
    fn bwcd_equals_seqbw_inside_expanded_box() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let dec = SeqBw::new(4).unwrap();
        for _ in 0..200 {
            let y = ReceivedVector::new(
                (0..16)
                    .map(|_| c(rng.random_range(-0.3..3.3), rng.random_range(-0.3..3.3)))
                    .collect(),
            )
            .unwrap();
            let a = bwcd_with(&dec, &y, DEFAULT_EPSILON).unwrap();
            let b = dec.decode(&y).unwrap();
            assert_eq!(a.point, b.point);
            assert_eq!(a.bits, b.bits);
        }
    }

    #[test]
    fn ml_oracle_basics() {
        assert!(matches!(MlOracle::new(4), Err(DecodeError::TooLarge { .. })));
        let ml = MlOracle::new(2).unwrap();
        let code = BwCode::new(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        for w in 0..16u8 {
            let bits: Vec<u8> = (0..4).map(|i| w >> (3 - i) & 1).collect();
            let x = code.encode(&bits).unwrap();
            let y = ReceivedVector::from_point(&x.clone().into_point());
            let (cw, b) = ml.decode(&y).unwrap();
            assert_eq!(cw, &x);
            assert_eq!(b, &bits[..]);
            // within the packing radius (squared distance < 1)
            let noisy = ReceivedVector::new(
                y.as_slice()
                    .iter()
                    .map(|z| z + c(rng.random_range(-0.35..0.35), rng.random_range(-0.35..0.35)))
                    .collect(),
            )
            .unwrap();
            assert_eq!(ml.decode(&noisy).unwrap().0, &x);
        }
        assert_eq!(ml_oracle(&ReceivedVector::new(vec![c(0.0, 0.0); 4]).unwrap(), 2).unwrap().coords(), &[GaussInt::ZERO; 4]);
    }

    #[test]
    fn operation_counts() {
        let y = ReceivedVector::new(vec![c(0.1, 0.2); 4]).unwrap();
        let out = seqbw(&y, 2).unwrap();
        let count = op_counter(&out, 2);
        assert!(count.metric_ops <= 2 * 16);
        assert_eq!(count.metric_ops, rmcode::rmdec_cost(0, 2) + rmcode::rmdec_cost(1, 2));
        let y1 = ReceivedVector::new(vec![c(0.4, 0.3); 2]).unwrap();
        assert!(op_counter(&seqbw(&y1, 1).unwrap(), 1).metric_ops > 0);
    }

    #[test]
    fn bad_inputs() {
        assert!(ReceivedVector::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ReceivedVector::new(vec![c(1e20, 0.0)]).is_err());
        let y = ReceivedVector::new(vec![c(0.0, 0.0); 3]).unwrap();
        assert!(matches!(seqbw(&y, 2), Err(DecodeError::Length { .. })));
    }
}
