//! Binary Reed-Muller codes `RM(r, m)` and a recursive soft-input decoder.
//!
//! Coordinates are indexed by `c ∈ 0..2^m`; variable `x_b` evaluates bit `b`
//! of `c`. A monomial over the variable set `S` evaluates to 1 at `c` exactly
//! when `S ⊆ c`, so `RM(r, m)` is the set of words whose algebraic normal
//! form only uses monomials of degree `≤ r`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RmError {
    #[error("order {r} is out of range for m = {m}")]
    OrderOutOfRange { r: u32, m: u32 },
    #[error("expected length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("reliability {0} is outside [0, 1]")]
    Reliability(f64),
}

/// Hard decisions plus per-position reliabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftInput {
    pub b: Vec<u8>,
    pub rho: Vec<f64>,
}

impl SoftInput {
    pub fn new(b: Vec<u8>, rho: Vec<f64>) -> Result<Self, RmError> {
        if b.len() != rho.len() {
            return Err(RmError::Length {
                expected: b.len(),
                got: rho.len(),
            });
        }
        if let Some(&bad) = rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(RmError::Reliability(bad));
        }
        Ok(SoftInput { b, rho })
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Signed metric `(1 - 2b)·ρ`: positive leans towards 0.
    pub fn metric(&self) -> Vec<f64> {
        self.b
            .iter()
            .zip(&self.rho)
            .map(|(&b, &r)| if b == 0 { r } else { -r })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RmCode {
    r: u32,
    m: u32,
    generator: Vec<Vec<u8>>,
}

impl RmCode {
    pub fn new(r: u32, m: u32) -> Result<Self, RmError> {
        Ok(RmCode {
            r,
            m,
            generator: rm_generator(r, m)?,
        })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        1 << self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dimension(&self) -> usize {
        self.generator.len()
    }

    pub fn generator(&self) -> &[Vec<u8>] {
        &self.generator
    }

    pub fn min_distance(&self) -> usize {
        1 << (self.m - self.r)
    }

    /// Message (one bit per generator row) times the generator.
    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>, RmError> {
        if msg.len() != self.generator.len() {
            return Err(RmError::Length {
                expected: self.generator.len(),
                got: msg.len(),
            });
        }
        let mut out = vec![0u8; self.len()];
        for (row, _) in self.generator.iter().zip(msg).filter(|(_, &b)| b == 1) {
            for (o, &g) in out.iter_mut().zip(row) {
                *o ^= g;
            }
        }
        Ok(out)
    }

    pub fn contains(&self, c: &[u8]) -> bool {
        is_codeword(c, self.r, self.m)
    }

    pub fn decode(&self, input: &SoftInput) -> Result<Vec<u8>, RmError> {
        rmdec(self.r, self.m, input)
    }
}

fn check_order(r: u32, m: u32) -> Result<(), RmError> {
    if r > m || m > 20 {
        Err(RmError::OrderOutOfRange { r, m })
    } else {
        Ok(())
    }
}

/// Variable subsets of size `≤ r`, by degree and then lexicographically by
/// their sorted variable indices.
fn monomials(r: u32, m: u32) -> Vec<u32> {
    let mut out: Vec<u32> = (0u32..1 << m).filter(|s| s.count_ones() <= r).collect();
    let key = |s: &u32| {
        let vars: Vec<u32> = (0..m).filter(|b| s >> b & 1 == 1).collect();
        (s.count_ones(), vars)
    };
    out.sort_by_key(key);
    out
}

/// Rows are the evaluation vectors of the monomials of degree `≤ r`.
pub fn rm_generator(r: u32, m: u32) -> Result<Vec<Vec<u8>>, RmError> {
    check_order(r, m)?;
    let n = 1u32 << m;
    Ok(monomials(r, m)
        .into_iter()
        .map(|s| (0..n).map(|c| (c & s == s) as u8).collect())
        .collect())
}

/// In-place binary Möbius transform (self-inverse over F2). Maps a truth
/// table to its algebraic normal form coefficients and back.
pub fn moebius(v: &mut [u8]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter().zip(hi.iter_mut()) {
                *b ^= *a;
            }
        }
        h *= 2;
    }
}

pub fn is_codeword(c: &[u8], r: u32, m: u32) -> bool {
    if r > m || c.len() != 1usize << m {
        return false;
    }
    let mut anf = c.to_vec();
    moebius(&mut anf);
    anf.iter()
        .enumerate()
        .all(|(s, &a)| a == 0 || (s as u32).count_ones() <= r)
}

/// Soft-decision decoding of `RM(r, m)`.
///
/// Always returns a codeword of `RM(r, m)`.
pub fn rmdec(r: u32, m: u32, input: &SoftInput) -> Result<Vec<u8>, RmError> {
    let mut ops = 0;
    rmdec_counted(r, m, input, &mut ops)
}

/// [`rmdec`] that also adds the number of metric operations to `ops`.
pub fn rmdec_counted(
    r: u32,
    m: u32,
    input: &SoftInput,
    ops: &mut u64,
) -> Result<Vec<u8>, RmError> {
    check_order(r, m)?;
    if input.len() != 1 << m {
        return Err(RmError::Length {
            expected: 1 << m,
            got: input.len(),
        });
    }
    let mut out = vec![0u8; input.len()];
    decode_metric(r, m, &input.metric(), &mut out, ops);
    debug_assert!(is_codeword(&out, r, m));
    Ok(out)
}

/// Decodes on the signed metric directly. `out` has length `2^m`.
pub(crate) fn decode_metric(r: u32, m: u32, s: &[f64], out: &mut [u8], ops: &mut u64) {
    let n = s.len();
    *ops += n as u64;
    if r == 0 {
        let total: f64 = s.iter().sum();
        out.fill((total < 0.0) as u8);
        return;
    }
    if r == m {
        for (o, &x) in out.iter_mut().zip(s) {
            *o = (x < 0.0) as u8;
        }
        return;
    }
    let h = n / 2;
    let (left, right) = s.split_at(h);

    // v = u ⊕ (u+v): the right-minus-left component lives in RM(r-1, m-1)
    let sv: Vec<f64> = left
        .iter()
        .zip(right)
        .map(|(&a, &b)| {
            let mag = a.abs().min(b.abs());
            if (a < 0.0) != (b < 0.0) {
                -mag
            } else {
                mag
            }
        })
        .collect();
    let mut v = vec![0u8; h];
    decode_metric(r - 1, m - 1, &sv, &mut v, ops);

    let su: Vec<f64> = left
        .iter()
        .zip(right)
        .zip(&v)
        .map(|((&a, &b), &vb)| {
            let b = if vb == 0 { b } else { -b };
            (a + b).clamp(-1.0, 1.0)
        })
        .collect();
    let (out_l, out_r) = out.split_at_mut(h);
    decode_metric(r, m - 1, &su, out_l, ops);
    for ((o, &u), &vb) in out_r.iter_mut().zip(out_l.iter()).zip(&v) {
        *o = u ^ vb;
    }
}

/// Metric operations performed by one [`rmdec`] call on `RM(r, m)`.
pub fn rmdec_cost(r: u32, m: u32) -> u64 {
    let n = 1u64 << m;
    if r == 0 || r == m {
        n
    } else {
        n + rmdec_cost(r - 1, m - 1) + rmdec_cost(r, m - 1)
    }
}
