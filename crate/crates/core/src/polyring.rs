//! The truncated polynomial ring `U_m = F2[u]/u^m`, the Kronecker generator
//! `[[1,1],[0,u]]^{⊗m}` and the code it generates.
//!
//! A [`RingElem`] packs its coefficients into one word: bit `k` is the
//! coefficient of `u^k`. Multiplication is a carry-less product masked to the
//! low `m` bits.

use std::fmt;

use thiserror::Error;

/// Largest supported `m`.
pub const MAX_M: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("ring elements over U_{0} and U_{1} cannot be combined")]
    MismatchedM(u32, u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("vector is not a codeword (column {column})")]
    NotInCode { column: usize },
    #[error("m = {0} is out of range")]
    BadM(u32),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingElem {
    bits: u32,
    m: u32,
}

impl RingElem {
    pub fn new(bits: u32, m: u32) -> Self {
        debug_assert!(m <= MAX_M);
        RingElem {
            bits: bits & Self::mask(m),
            m,
        }
    }

    pub fn zero(m: u32) -> Self {
        Self::new(0, m)
    }

    pub fn one(m: u32) -> Self {
        Self::new(1, m)
    }

    /// `u^k`, which is zero once `k >= m`.
    pub fn u_pow(k: u32, m: u32) -> Self {
        if k >= m {
            Self::zero(m)
        } else {
            Self::new(1 << k, m)
        }
    }

    fn mask(m: u32) -> u32 {
        if m >= 32 {
            u32::MAX
        } else {
            (1u32 << m) - 1
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn coeff(self, k: u32) -> u8 {
        ((self.bits >> k) & 1) as u8
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    fn same_m(self, rhs: RingElem) -> Result<(), RingError> {
        if self.m == rhs.m {
            Ok(())
        } else {
            Err(RingError::MismatchedM(self.m, rhs.m))
        }
    }

    pub fn add(self, rhs: RingElem) -> Result<Self, RingError> {
        self.same_m(rhs)?;
        Ok(RingElem {
            bits: self.bits ^ rhs.bits,
            m: self.m,
        })
    }

    pub fn mul(self, rhs: RingElem) -> Result<Self, RingError> {
        self.same_m(rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(self, rhs: RingElem) -> Self {
        let mut acc = 0u32;
        let mut b = rhs.bits;
        let mut shift = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= self.bits << shift;
            }
            b >>= 1;
            shift += 1;
        }
        RingElem::new(acc, self.m)
    }

    /// Divides by `u^q`, provided the low `q` coefficients are zero.
    pub fn div_u_pow(self, q: u32) -> Option<Self> {
        if q >= self.m {
            return self.is_zero().then_some(self);
        }
        (self.bits & ((1 << q) - 1) == 0).then(|| RingElem::new(self.bits >> q, self.m))
    }
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits == 0 {
            return write!(f, "0");
        }
        let terms: Vec<String> = (0..self.m)
            .filter(|&k| self.coeff(k) == 1)
            .map(|k| match k {
                0 => "1".to_string(),
                1 => "u".to_string(),
                _ => format!("u^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join("+"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    rows: usize,
    cols: usize,
    m: u32,
    entries: Vec<RingElem>,
}

impl RingMatrix {
    pub fn from_rows(m: u32, rows: &[Vec<RingElem>]) -> Result<Self, RingError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(RingError::Dimension {
                    expected: cols,
                    got: row.len(),
                });
            }
            for &e in row {
                if e.m() != m {
                    return Err(RingError::MismatchedM(m, e.m()));
                }
                entries.push(e);
            }
        }
        Ok(RingMatrix {
            rows: rows.len(),
            cols,
            m,
            entries,
        })
    }

    pub fn identity(n: usize, m: u32) -> Self {
        let mut entries = vec![RingElem::zero(m); n * n];
        for i in 0..n {
            entries[i * n + i] = RingElem::one(m);
        }
        RingMatrix {
            rows: n,
            cols: n,
            m,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> RingElem {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[RingElem] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn kronecker(&self, rhs: &RingMatrix) -> Result<RingMatrix, RingError> {
        if self.m != rhs.m {
            return Err(RingError::MismatchedM(self.m, rhs.m));
        }
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let (ia, ib) = (i / rhs.rows, i % rhs.rows);
            for j in 0..cols {
                let (ja, jb) = (j / rhs.cols, j % rhs.cols);
                entries.push(self.get(ia, ja).mul_unchecked(rhs.get(ib, jb)));
            }
        }
        Ok(RingMatrix {
            rows,
            cols,
            m: self.m,
            entries,
        })
    }
}

/// `[[1,1],[0,u]]^{⊗m}` over `U_m`, a `2^m × 2^m` upper-triangular matrix.
///
/// Entry `(j, c)` is `u^{popcount(j)}` when the bits of `j` are a subset of
/// the bits of `c`, and zero otherwise.
pub fn generator(m: u32) -> Result<RingMatrix, RingError> {
    if m == 0 || m > MAX_M {
        return Err(RingError::BadM(m));
    }
    let kernel = RingMatrix::from_rows(
        m,
        &[
            vec![RingElem::one(m), RingElem::one(m)],
            vec![RingElem::zero(m), RingElem::u_pow(1, m)],
        ],
    )?;
    let mut g = RingMatrix::identity(1, m);
    for _ in 0..m {
        g = g.kronecker(&kernel)?;
    }
    Ok(g)
}

/// Row-vector times matrix over `U_m`: `x = z G`.
pub fn encode(z: &[RingElem], g: &RingMatrix) -> Result<Vec<RingElem>, RingError> {
    if z.len() != g.rows() {
        return Err(RingError::Dimension {
            expected: g.rows(),
            got: z.len(),
        });
    }
    if let Some(e) = z.iter().find(|e| e.m() != g.m()) {
        return Err(RingError::MismatchedM(g.m(), e.m()));
    }
    let mut x = vec![RingElem::zero(g.m()); g.cols()];
    for (j, &zj) in z.iter().enumerate() {
        if zj.is_zero() {
            continue;
        }
        for (xc, &gjc) in x.iter_mut().zip(g.row(j)) {
            xc.bits ^= zj.mul_unchecked(gjc).bits;
        }
    }
    Ok(x)
}

/// Recovers the unique message `z` with `z G = x` for an upper-triangular
/// `G` whose diagonal entries are powers of `u`.
///
/// Column `c` of `x` only involves `z_0..=z_c`, so the system is solved one
/// column at a time. The returned message has every coefficient that the
/// pivot `u^q` would annihilate set to zero.
pub fn back_substitute(x: &[RingElem], g: &RingMatrix) -> Result<Vec<RingElem>, RingError> {
    if x.len() != g.cols() || g.rows() != g.cols() {
        return Err(RingError::Dimension {
            expected: g.cols(),
            got: x.len(),
        });
    }
    let m = g.m();
    let mut z = vec![RingElem::zero(m); g.rows()];
    for c in 0..g.cols() {
        let mut residual = x[c];
        if residual.m() != m {
            return Err(RingError::MismatchedM(m, residual.m()));
        }
        for (j, zj) in z.iter().enumerate().take(c) {
            residual.bits ^= zj.mul_unchecked(g.get(j, c)).bits;
        }
        let pivot = g.get(c, c);
        let q = if pivot.is_zero() {
            m
        } else {
            pivot.bits().trailing_zeros()
        };
        z[c] = residual
            .div_u_pow(q)
            .ok_or(RingError::NotInCode { column: c })?;
    }
    Ok(z)
}
