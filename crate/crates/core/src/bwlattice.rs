//! Barnes-Wall lattice codes built from the ring code `C_{2^m}`.
//!
//! Information bits are placed into a message vector over `U_m`, encoded by
//! the Kronecker generator, embedded into `Z[i]` by substituting `u → 1+i`,
//! and finally folded into a cubic (even `m`) or rectangular (odd `m`) box.
//! Folding only adds multiples of `(1+i)^m`, so the first `m` base-`(1+i)`
//! digits of every coordinate, and with them the Reed-Muller level
//! codewords, are unchanged. Bit recovery relies on exactly that.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gint::{GaussInt, GintError, ONE_PLUS_I};
use crate::polyring::{self, RingElem, RingError, MAX_M};
use crate::rmcode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BwError {
    #[error("m = {0} is out of range")]
    BadM(u32),
    #[error("expected {expected} bits, got {got}")]
    BitCount { expected: usize, got: usize },
    #[error("expected {expected} coordinates, got {got}")]
    Length { expected: usize, got: usize },
    #[error("decoded point does not correspond to a codeword")]
    NotInCode,
    #[error("coordinate {index} = {value} lies outside the shaping box")]
    OutsideBox { index: usize, value: GaussInt },
    #[error("level {level} word is not in RM({level}, {m})")]
    NotRmCodeword { level: u32, m: u32 },
    #[error("bits must be 0 or 1")]
    NotABit,
    #[error(transparent)]
    Gint(#[from] GintError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

fn check_m(m: u32) -> Result<(), BwError> {
    if m == 0 || m > MAX_M {
        Err(BwError::BadM(m))
    } else {
        Ok(())
    }
}

/// Positions `(row, degree)` of the message vector that carry information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLayout {
    pub m: u32,
    pub slots: Vec<(usize, u32)>,
}

impl BitLayout {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Row `j` of the generator has weight `q = popcount(j)` and carries degrees
/// `0..m-q`. Rows ascending, degrees ascending within a row.
pub fn bit_layout(m: u32) -> Result<BitLayout, BwError> {
    check_m(m)?;
    let slots = (0..1usize << m)
        .flat_map(|j| {
            let q = j.count_ones();
            (0..m - q.min(m)).map(move |k| (j, k))
        })
        .collect();
    Ok(BitLayout { m, slots })
}

/// Number of information bits per codeword, `(m/2)·2^m`.
pub fn bits_per_codeword(m: u32) -> usize {
    (m as usize) << (m - 1)
}

/// Any vector of `Z[i]^{2^m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<GaussInt>);

/// A lattice point whose coordinates all lie in the shaping box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Codeword(Vec<GaussInt>);

impl Codeword {
    pub fn new(coords: Vec<GaussInt>, m: u32) -> Result<Self, BwError> {
        check_m(m)?;
        if coords.len() != 1 << m {
            return Err(BwError::Length {
                expected: 1 << m,
                got: coords.len(),
            });
        }
        let shape = ShapeBox::new(m);
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, z)| !shape.contains(**z))
        {
            return Err(BwError::OutsideBox { index, value });
        }
        Ok(Codeword(coords))
    }

    pub fn coords(&self) -> &[GaussInt] {
        &self.0
    }

    pub fn into_point(self) -> LatticePoint {
        LatticePoint(self.0)
    }
}

/// Per-axis extents of the shaping box: `[0, re_size) × [0, im_size)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeBox {
    pub re_size: i64,
    pub im_size: i64,
}

impl ShapeBox {
    pub fn new(m: u32) -> Self {
        if m % 2 == 0 {
            let s = 1i64 << (m / 2);
            ShapeBox {
                re_size: s,
                im_size: s,
            }
        } else {
            ShapeBox {
                re_size: 1 << ((m + 1) / 2),
                im_size: 1 << ((m - 1) / 2),
            }
        }
    }

    pub fn contains(&self, z: GaussInt) -> bool {
        (0..self.re_size).contains(&z.re) && (0..self.im_size).contains(&z.im)
    }
}

/// The embedding `Φ`: substitute `u → 1+i` in a ring element.
pub fn embed(x: RingElem) -> GaussInt {
    let mut acc = GaussInt::ZERO;
    for k in (0..x.m()).rev() {
        acc = acc
            .mul(ONE_PLUS_I)
            .and_then(|a| a.add(GaussInt::new(x.coeff(k) as i64, 0)))
            .expect("embedding of an m-digit element stays small");
    }
    acc
}

/// The shaping map on one coordinate.
pub fn shape_scalar(z: GaussInt, m: u32) -> GaussInt {
    if m % 2 == 0 {
        let s = 1i64 << (m / 2);
        GaussInt::new(z.re.rem_euclid(s), z.im.rem_euclid(s))
    } else {
        let s = 1i64 << ((m + 1) / 2);
        let h = 1i64 << ((m - 1) / 2);
        let (re, im) = (z.re.rem_euclid(s), z.im.rem_euclid(s));
        if im < h {
            GaussInt::new(re, im)
        } else if re < h {
            GaussInt::new(re + h, im - h)
        } else {
            GaussInt::new(re - h, im - h)
        }
    }
}

/// Folds an arbitrary lattice point into the shaping box.
pub fn shape_phi(x: &LatticePoint, m: u32) -> Result<Codeword, BwError> {
    Codeword::new(x.0.iter().map(|&z| shape_scalar(z, m)).collect(), m)
}

/// The first `m` base-`(1+i)` digits of every coordinate, arranged by level,
/// together with the per-coordinate quotients.
pub fn level_digits(p: &LatticePoint, m: u32) -> (Vec<Vec<u8>>, Vec<GaussInt>) {
    let mut levels = vec![Vec::with_capacity(p.0.len()); m as usize];
    let mut quotients = Vec::with_capacity(p.0.len());
    for z in &p.0 {
        let d = z.digit_expand(m);
        for (level, &bit) in levels.iter_mut().zip(&d.digits) {
            level.push(bit);
        }
        quotients.push(d.quotient);
    }
    (levels, quotients)
}

/// `(1+i)^m a + Σ_r (1+i)^r ψ(c_r)`, with every `c_r` checked against
/// `RM(r, m)`.
pub fn construction_d_point(
    levels: &[Vec<u8>],
    a: &[GaussInt],
    m: u32,
) -> Result<LatticePoint, BwError> {
    check_m(m)?;
    let n = 1usize << m;
    if levels.len() != m as usize {
        return Err(BwError::Length {
            expected: m as usize,
            got: levels.len(),
        });
    }
    if a.len() != n {
        return Err(BwError::Length {
            expected: n,
            got: a.len(),
        });
    }
    for (r, c) in levels.iter().enumerate() {
        if c.len() != n || !rmcode::is_codeword(c, r as u32, m) {
            return Err(BwError::NotRmCodeword { level: r as u32, m });
        }
    }
    let mut out = Vec::with_capacity(n);
    for (j, &aj) in a.iter().enumerate() {
        let mut acc = aj;
        for c in levels.iter().rev() {
            acc = acc.mul(ONE_PLUS_I)?.add(GaussInt::new(c[j] as i64, 0))?;
        }
        out.push(acc);
    }
    Ok(LatticePoint(out))
}

/// Membership in `BW_{2^m}`: each digit level must be a Reed-Muller codeword
/// of the matching order.
pub fn is_bw_point(p: &LatticePoint, m: u32) -> bool {
    if m == 0 || p.0.len() != 1 << m {
        return false;
    }
    let (levels, _) = level_digits(p, m);
    levels
        .iter()
        .enumerate()
        .all(|(r, c)| rmcode::is_codeword(c, r as u32, m))
}

/// Geometry of `BW_{2^m}` as a complex lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub m: u32,
    pub n: usize,
    pub packing_radius: f64,
    pub packing_radius_sq: f64,
    /// `log2` of the real `2N`-dimensional covolume, `m·2^{m-1}`.
    pub covolume_log2: u64,
}

impl LatticeParams {
    pub fn covolume(&self) -> f64 {
        (self.covolume_log2 as f64).exp2()
    }
}

pub fn params(m: u32) -> Result<LatticeParams, BwError> {
    check_m(m)?;
    let n = 1usize << m;
    Ok(LatticeParams {
        m,
        n,
        packing_radius: (n as f64).sqrt() / 2.0,
        packing_radius_sq: n as f64 / 4.0,
        covolume_log2: (m as u64) << (m - 1),
    })
}

/// The code `L_{2^m}` for one `m`: bit layout plus encoder and bit recovery.
///
/// Encoding and recovery use the subset structure of the generator
/// (`G[j][c] = u^{|j|}` iff `j ⊆ c`), so `x = zG` is a zeta transform over
/// the subset lattice and its inverse is the matching Möbius transform.
#[derive(Debug, Clone)]
pub struct BwCode {
    m: u32,
    layout: BitLayout,
}

impl BwCode {
    pub fn new(m: u32) -> Result<Self, BwError> {
        Ok(BwCode {
            m,
            layout: bit_layout(m)?,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn layout(&self) -> &BitLayout {
        &self.layout
    }

    pub fn bits_per_codeword(&self) -> usize {
        self.layout.len()
    }

    /// Packs bits into the message vector `z`.
    pub fn message(&self, bits: &[u8]) -> Result<Vec<RingElem>, BwError> {
        if bits.len() != self.layout.len() {
            return Err(BwError::BitCount {
                expected: self.layout.len(),
                got: bits.len(),
            });
        }
        let mut words = vec![0u32; self.n()];
        for (&(j, k), &b) in self.layout.slots.iter().zip(bits) {
            if b > 1 {
                return Err(BwError::NotABit);
            }
            words[j] |= (b as u32) << k;
        }
        Ok(words
            .into_iter()
            .map(|w| RingElem::new(w, self.m))
            .collect())
    }

    /// Inverse of [`BwCode::message`] for normalized messages.
    pub fn bits_of(&self, z: &[RingElem]) -> Vec<u8> {
        self.layout
            .slots
            .iter()
            .map(|&(j, k)| z[j].coeff(k))
            .collect()
    }

    /// Ring codeword `x = zG` as packed coefficient words.
    fn ring_encode(&self, z: &[RingElem]) -> Vec<u32> {
        let mask = (1u32 << self.m) - 1;
        let mut w: Vec<u32> = z
            .iter()
            .enumerate()
            .map(|(j, e)| (e.bits() << (j as u32).count_ones()) & mask)
            .collect();
        subset_xor_transform(&mut w);
        w
    }

    /// Solves `zG = x` for packed coefficient words `x`.
    fn ring_solve(&self, x: &[u32]) -> Result<Vec<RingElem>, BwError> {
        let mut w = x.to_vec();
        subset_xor_transform(&mut w);
        w.iter()
            .enumerate()
            .map(|(j, &wj)| {
                let q = (j as u32).count_ones();
                let low = if q >= 32 { u32::MAX } else { (1u32 << q) - 1 };
                if wj & low != 0 {
                    Err(BwError::NotInCode)
                } else {
                    Ok(RingElem::new(wj.checked_shr(q).unwrap_or(0), self.m))
                }
            })
            .collect()
    }

    /// The unshaped image `Φ(zG)`.
    pub fn embed_bits(&self, bits: &[u8]) -> Result<LatticePoint, BwError> {
        let z = self.message(bits)?;
        let x = self.ring_encode(&z);
        Ok(LatticePoint(
            x.into_iter()
                .map(|w| embed(RingElem::new(w, self.m)))
                .collect(),
        ))
    }

    pub fn encode(&self, bits: &[u8]) -> Result<Codeword, BwError> {
        shape_phi(&self.embed_bits(bits)?, self.m)
    }

    /// Bits carried by a lattice point, read from its level digits. Points
    /// that differ by `(1+i)^m Z[i]^N` give the same bits.
    pub fn decode(&self, p: &LatticePoint) -> Result<Vec<u8>, BwError> {
        if p.0.len() != self.n() {
            return Err(BwError::Length {
                expected: self.n(),
                got: p.0.len(),
            });
        }
        let folded = shape_phi(p, self.m)?;
        let words: Vec<u32> = folded
            .coords()
            .iter()
            .map(|z| {
                z.digit_expand(self.m)
                    .digits
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (r, &d)| acc | (d as u32) << r)
            })
            .collect();
        Ok(self.bits_of(&self.ring_solve(&words)?))
    }

    /// Bits from per-level Reed-Muller codewords (level `r` holds the
    /// coefficient of `u^r`).
    pub fn decode_levels(&self, levels: &[Vec<u8>]) -> Result<Vec<u8>, BwError> {
        if levels.len() != self.m as usize || levels.iter().any(|c| c.len() != self.n()) {
            return Err(BwError::Length {
                expected: self.m as usize,
                got: levels.len(),
            });
        }
        let words: Vec<u32> = (0..self.n())
            .map(|j| {
                levels
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (r, c)| acc | (c[j] as u32) << r)
            })
            .collect();
        Ok(self.bits_of(&self.ring_solve(&words)?))
    }
}

/// `w_c ← XOR_{j ⊆ c} w_j`, in place. Self-inverse.
fn subset_xor_transform(w: &mut [u32]) {
    let n = w.len();
    let mut h = 1;
    while h < n {
        for block in w.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter().zip(hi.iter_mut()) {
                *b ^= *a;
            }
        }
        h *= 2;
    }
}

pub fn encode_bits(bits: &[u8], m: u32) -> Result<Codeword, BwError> {
    BwCode::new(m)?.encode(bits)
}

pub fn decode_bits(p: &LatticePoint, m: u32) -> Result<Vec<u8>, BwError> {
    BwCode::new(m)?.decode(p)
}

/// Reference encoder going through the explicit generator matrix.
pub fn encode_bits_with_matrix(bits: &[u8], m: u32) -> Result<Codeword, BwError> {
    let code = BwCode::new(m)?;
    let g = polyring::generator(m)?;
    let x = polyring::encode(&code.message(bits)?, &g)?;
    shape_phi(&LatticePoint(x.into_iter().map(embed).collect()), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TileTag {
    Base,
    Phi,
    Shift1,
    Shift2,
    Shift3,
}

impl TileTag {
    pub fn as_str(self) -> &'static str {
        match self {
            TileTag::Base => "base",
            TileTag::Phi => "phi",
            TileTag::Shift1 => "shift1",
            TileTag::Shift2 => "shift2",
            TileTag::Shift3 => "shift3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TilePoint {
    pub value: GaussInt,
    pub tag: TileTag,
}

/// The scalar tile `{Σ_{r<m} (1+i)^r b_r}` in digit-word order, optionally
/// with its shaped image and the copies shifted by `(1+i)^m`, `i(1+i)^m`
/// and `(1+i)(1+i)^m`.
pub fn tiling_cloud(m: u32, with_phi: bool, with_shifts: bool) -> Result<Vec<TilePoint>, BwError> {
    if m == 0 || m > 12 {
        return Err(BwError::BadM(m));
    }
    let base: Vec<GaussInt> = (0u32..1 << m)
        .map(|w| embed(RingElem::new(w, m)))
        .collect();
    let mut out: Vec<TilePoint> = base
        .iter()
        .map(|&value| TilePoint {
            value,
            tag: TileTag::Base,
        })
        .collect();
    if with_phi {
        out.extend(base.iter().map(|&z| TilePoint {
            value: shape_scalar(z, m),
            tag: TileTag::Phi,
        }));
    }
    if with_shifts {
        let p = GaussInt::one_plus_i_pow(m)?;
        let shifts = [
            (p, TileTag::Shift1),
            (p.mul(GaussInt::new(0, 1))?, TileTag::Shift2),
            (p.mul(ONE_PLUS_I)?, TileTag::Shift3),
        ];
        for (s, tag) in shifts {
            for &z in &base {
                out.push(TilePoint {
                    value: z.add(s)?,
                    tag,
                });
            }
        }
    }
    Ok(out)
}

/// CSV with columns `re,im,tag`.
pub fn write_tiling_csv<W: Write>(points: &[TilePoint], mut w: W) -> io::Result<()> {
    writeln!(w, "re,im,tag")?;
    for p in points {
        writeln!(w, "{},{},{}", p.value.re, p.value.im, p.tag.as_str())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn g(re: i64, im: i64) -> GaussInt {
        GaussInt::new(re, im)
    }

    fn all_bits(len: usize) -> impl Iterator<Item = Vec<u8>> {
        (0u64..1 << len).map(move |w| (0..len).map(|i| (w >> (len - 1 - i) & 1) as u8).collect())
    }

    #[test]
    fn layouts() {
        let l2 = bit_layout(2).unwrap();
        assert_eq!(l2.slots, vec![(0, 0), (0, 1), (1, 0), (2, 0)]);
        assert_eq!(bit_layout(1).unwrap().slots, vec![(0, 0)]);
        assert_eq!(bit_layout(4).unwrap().len(), 32);
        for m in 1..=10 {
            assert_eq!(bit_layout(m).unwrap().len(), (m as usize) * (1 << m) / 2);
            assert_eq!(bits_per_codeword(m), bit_layout(m).unwrap().len());
        }
        assert!(bit_layout(0).is_err());
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_bits(&[0; 4], 2).unwrap().coords(), &[GaussInt::ZERO; 4]);
        let cw = encode_bits(&[1, 0, 0, 0], 2).unwrap();
        assert_eq!(cw.coords(), &[g(1, 0); 4]);
        assert!(matches!(
            encode_bits(&[0; 3], 2),
            Err(BwError::BitCount { expected: 4, got: 3 })
        ));
        assert!(matches!(encode_bits(&[2, 0, 0, 0], 2), Err(BwError::NotABit)));
    }

    #[test]
    fn fast_encoder_matches_matrix_encoder() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for m in 1..=7 {
            let code = BwCode::new(m).unwrap();
            for _ in 0..200 {
                let bits: Vec<u8> = (0..code.bits_per_codeword())
                    .map(|_| rng.random_range(0..2))
                    .collect();
                assert_eq!(
                    code.encode(&bits).unwrap(),
                    encode_bits_with_matrix(&bits, m).unwrap()
                );
            }
        }
    }

    #[test]
    fn shaping_examples() {
        let x = LatticePoint(vec![g(3, 3), g(0, 0), g(0, 0), g(0, 0)]);
        assert_eq!(shape_phi(&x, 2).unwrap().coords()[0], g(1, 1));
        assert_eq!(shape_scalar(g(1, 2), 3), g(3, 0));
        assert_eq!(shape_scalar(g(3, 3), 3), g(1, 1));
        assert_eq!(shape_scalar(g(-1, -5), 2), g(1, 1));
        for m in 1..=6 {
            let b = ShapeBox::new(m);
            for re in 0..b.re_size {
                for im in 0..b.im_size {
                    assert_eq!(shape_scalar(g(re, im), m), g(re, im));
                }
            }
        }
    }

    #[test]
    fn shaping_preserves_low_digits() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5000 {
            let m = rng.random_range(1..=10);
            let z = g(rng.random_range(-5000..5000), rng.random_range(-5000..5000));
            let s = shape_scalar(z, m);
            assert!(ShapeBox::new(m).contains(s));
            assert_eq!(z.digit_expand(m).digits, s.digit_expand(m).digits);
        }
    }

    #[test]
    fn exhaustive_round_trip_and_injectivity() {
        for m in 1..=3 {
            let code = BwCode::new(m).unwrap();
            let mut seen = std::collections::HashSet::new();
            for bits in all_bits(code.bits_per_codeword()) {
                let cw = code.encode(&bits).unwrap();
                assert!(is_bw_point(&cw.clone().into_point(), m));
                assert_eq!(code.decode(&cw.clone().into_point()).unwrap(), bits);
                assert!(seen.insert(cw));
            }
        }
    }

    #[test]
    fn zero_point_decodes_to_zero_bits() {
        let p = LatticePoint(vec![GaussInt::ZERO; 8]);
        assert_eq!(decode_bits(&p, 3).unwrap(), vec![0; 12]);
    }

    #[test]
    fn construction_d_examples() {
        let zero = construction_d_point(&[vec![0, 0], ], &[GaussInt::ZERO; 2], 1).unwrap();
        assert_eq!(zero.0, vec![GaussInt::ZERO; 2]);
        let p = construction_d_point(&[vec![1, 1]], &[GaussInt::ZERO; 2], 1).unwrap();
        assert_eq!(p.0, vec![g(1, 0), g(1, 0)]);
        assert!(matches!(
            construction_d_point(&[vec![1, 0]], &[GaussInt::ZERO; 2], 1),
            Err(BwError::NotRmCodeword { level: 0, m: 1 })
        ));
    }

    #[test]
    fn embedded_codewords_are_construction_d_points() {
        let code = BwCode::new(2).unwrap();
        for bits in all_bits(4) {
            let x = code.embed_bits(&bits).unwrap();
            let (levels, quotients) = level_digits(&x, 2);
            assert!(quotients.iter().all(|q| *q == GaussInt::ZERO));
            let rebuilt = construction_d_point(&levels, &quotients, 2).unwrap();
            assert_eq!(rebuilt, x);
        }
    }

    #[test]
    fn membership_examples() {
        let p = LatticePoint(vec![g(1, 0), GaussInt::ZERO, GaussInt::ZERO, GaussInt::ZERO]);
        assert!(!is_bw_point(&p, 2));
        let cw = encode_bits(&[1, 1, 0, 1], 2).unwrap().into_point();
        let shift = GaussInt::one_plus_i_pow(2).unwrap();
        for j in 0..4 {
            let mut q = cw.clone();
            q.0[j] = q.0[j].add(shift).unwrap();
            assert!(is_bw_point(&q, 2));
        }
    }

    #[test]
    fn minimum_distance_of_l4() {
        let code = BwCode::new(2).unwrap();
        let words: Vec<_> = all_bits(4).map(|b| code.encode(&b).unwrap()).collect();
        let mut best = i128::MAX;
        for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                let d: i128 = a
                    .coords()
                    .iter()
                    .zip(b.coords())
                    .map(|(x, y)| x.sub(*y).unwrap().norm())
                    .sum();
                best = best.min(d);
            }
        }
        assert_eq!(best, 4);
    }

    #[test]
    fn lattice_params() {
        let p2 = params(2).unwrap();
        assert_eq!(p2.n, 4);
        assert_eq!(p2.packing_radius, 1.0);
        assert_eq!(p2.covolume(), 16.0);
        assert_eq!(params(4).unwrap().packing_radius, 2.0);
        assert_eq!(params(10).unwrap().packing_radius_sq, 256.0);
        // covolume exponent equals the total u-weight of the generator diagonal
        for m in 1..=6 {
            let gen = polyring::generator(m).unwrap();
            let weight: u64 = (0..1usize << m).map(|j| j.count_ones() as u64).sum();
            assert_eq!(params(m).unwrap().covolume_log2, weight);
            assert_eq!(gen.rows(), 1 << m);
        }
    }

    #[test]
    fn tiling() {
        let t1: Vec<_> = tiling_cloud(1, false, false).unwrap().iter().map(|p| p.value).collect();
        assert_eq!(t1, vec![g(0, 0), g(1, 0)]);
        let mut t2: Vec<_> = tiling_cloud(2, false, false).unwrap().iter().map(|p| p.value).collect();
        t2.sort_by_key(|z| (z.re, z.im));
        assert_eq!(t2, vec![g(0, 0), g(1, 0), g(1, 1), g(2, 1)]);
        for m in [2, 4, 6, 10] {
            let cloud = tiling_cloud(m, true, true).unwrap();
            assert_eq!(cloud.len(), 5 << m);
            let s = 1i64 << (m / 2);
            for p in cloud.iter().filter(|p| p.tag == TileTag::Phi) {
                assert!((0..s).contains(&p.value.re) && (0..s).contains(&p.value.im));
            }
        }
        let mut buf = Vec::new();
        write_tiling_csv(&tiling_cloud(1, true, false).unwrap(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "re,im,tag\n0,0,base\n1,0,base\n0,0,phi\n1,0,phi\n"
        );
    }
}
