//! Quasi-cyclic GF(2) arithmetic: private keys, error sampling, syndromes.
//!
//! The parity-check matrix is `H = [H0 | H1]`, two `r x r` circulant blocks.
//! Row `i` of `H0` is `h0` cyclically shifted right by `i`, i.e.
//! `H0[i][j] = 1` iff `(j - i) mod r` is in the support of `h0`, and the same
//! holds for `H1` on columns `r..2r`. Column `j < r` therefore has its ones at
//! rows `(j - k) mod r` for `k` in `supp(h0)`.

use rand::Rng;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};

/// Number of `h0` resamples before key generation gives up.
pub const KEYGEN_MAX_RESAMPLES: usize = 1000;

/// Private key `(h0, h1)` as sorted index sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseKey {
    r: usize,
    h0: Vec<usize>,
    h1: Vec<usize>,
}

impl SparseKey {
    /// Validates and builds a key. Supports are sorted; both must have the
    /// same cardinality with distinct in-range indices.
    pub fn new(r: usize, mut h0: Vec<usize>, mut h1: Vec<usize>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("r must be positive".into()));
        }
        for (name, supp) in [("h0", &mut h0), ("h1", &mut h1)] {
            supp.sort_unstable();
            if let Some(&i) = supp.iter().find(|&&i| i >= r) {
                return Err(Error::IndexOutOfRange { index: i, len: r });
            }
            if supp.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("{name} has repeated indices")));
            }
            if supp.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} is empty")));
            }
        }
        if h0.len() != h1.len() {
            return Err(Error::InvalidParameter(format!(
                "|h0| = {} differs from |h1| = {}",
                h0.len(),
                h1.len()
            )));
        }
        Ok(Self { r, h0, h1 })
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    /// Column weight `d = w / 2`.
    #[inline]
    pub fn d(&self) -> usize {
        self.h0.len()
    }

    /// Row weight `w`.
    #[inline]
    pub fn w(&self) -> usize {
        2 * self.h0.len()
    }

    #[inline]
    pub fn h0(&self) -> &[usize] {
        &self.h0
    }

    #[inline]
    pub fn h1(&self) -> &[usize] {
        &self.h1
    }

    /// Support of the block that column `j` belongs to.
    #[inline]
    pub(crate) fn block_support(&self, j: usize) -> &[usize] {
        if j < self.r {
            &self.h0
        } else {
            &self.h1
        }
    }

    /// Row indices of the ones in column `j`, in support order.
    pub fn column_rows(&self, j: usize) -> Result<impl Iterator<Item = usize> + '_> {
        if j >= 2 * self.r {
            return Err(Error::IndexOutOfRange { index: j, len: 2 * self.r });
        }
        let r = self.r;
        let jj = j % r;
        Ok(self.block_support(j).iter().map(move |&k| (jj + r - k) % r))
    }

    /// Column `j` of `H` as a dense vector of length `r`.
    pub fn column(&self, j: usize) -> Result<BitVector> {
        let mut col = BitVector::zeros(self.r);
        for row in self.column_rows(j)? {
            col.flip(row);
        }
        Ok(col)
    }

    /// Computes `s = H e^T`.
    pub fn syndrome(&self, e: &BitVector) -> Result<BitVector> {
        if e.len() != 2 * self.r {
            return Err(Error::LengthMismatch {
                expected: 2 * self.r,
                actual: e.len(),
            });
        }
        let mut s = BitVector::zeros(self.r);
        for j in e.support() {
            for row in self.column_rows(j)? {
                s.flip(row);
            }
        }
        Ok(s)
    }

    /// True when no two columns of `H` coincide. Single errors are then
    /// always distinguishable from their syndrome.
    pub fn has_distinct_columns(&self) -> bool {
        let mut cols: Vec<Vec<usize>> = (0..2 * self.r)
            .map(|j| {
                let mut rows: Vec<usize> = self.column_rows(j).unwrap().collect();
                rows.sort_unstable();
                rows
            })
            .collect();
        cols.sort_unstable();
        cols.windows(2).all(|w| w[0] != w[1])
    }
}

/// Samples `k` distinct indices uniformly from `[0, n)` by rejection, sorted.
pub fn sample_support<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} distinct indices from {n}");
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let i = rng.gen_range(0..n);
        if !taken[i] {
            taken[i] = true;
            out.push(i);
        }
    }
    out.sort_unstable();
    out
}

/// Uniformly random weight-`t` error vector of length `2r`.
pub fn sample_error<R: Rng + ?Sized>(r: usize, t: usize, rng: &mut R) -> Result<BitVector> {
    if t > 2 * r {
        return Err(Error::InvalidParameter(format!("t = {t} exceeds 2r = {}", 2 * r)));
    }
    BitVector::from_support(2 * r, &sample_support(2 * r, t, rng))
}

/// Key generation result with the number of rejected `h0` draws.
#[derive(Clone, Debug)]
pub struct GeneratedKey {
    pub key: SparseKey,
    pub h0_resamples: usize,
}

/// Draws `(h0, h1)` of weight `d`, resampling `h0` until it is invertible
/// modulo `x^r - 1`.
pub fn keygen<R: Rng + ?Sized>(r: usize, d: usize, rng: &mut R) -> Result<SparseKey> {
    keygen_counted(r, d, rng).map(|g| g.key)
}

pub fn keygen_counted<R: Rng + ?Sized>(r: usize, d: usize, rng: &mut R) -> Result<GeneratedKey> {
    if d == 0 || d >= r {
        return Err(Error::InvalidParameter(format!("need 0 < d < r, got d = {d}, r = {r}")));
    }
    let mut resamples = 0;
    let h0 = loop {
        let h0 = sample_support(r, d, rng);
        if is_invertible(&h0, r) {
            break h0;
        }
        resamples += 1;
        if resamples >= KEYGEN_MAX_RESAMPLES {
            return Err(Error::KeygenExhausted(resamples));
        }
    };
    let h1 = sample_support(r, d, rng);
    Ok(GeneratedKey {
        key: SparseKey::new(r, h0, h1)?,
        h0_resamples: resamples,
    })
}

/// True iff `gcd(h(x), x^r - 1) = 1` over GF(2), where `h` has ones at
/// `support`.
pub fn is_invertible(support: &[usize], r: usize) -> bool {
    if r == 0 || support.is_empty() {
        return false;
    }
    let mut h = Poly::zero(r);
    for &i in support {
        debug_assert!(i < r);
        h.flip(i % r);
    }
    let mut modulus = Poly::zero(r + 1);
    modulus.flip(0);
    modulus.flip(r);
    Poly::gcd(modulus, h).degree() == Some(0)
}

/// Dense GF(2)[x] polynomial, bit `i` of the word array is the coefficient of `x^i`.
#[derive(Clone, Debug)]
struct Poly {
    words: Vec<u64>,
}

impl Poly {
    fn zero(capacity_bits: usize) -> Self {
        Self {
            words: vec![0; capacity_bits.div_ceil(64).max(1)],
        }
    }

    fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    fn degree(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    /// `self ^= other * x^shift`.
    fn xor_shifted(&mut self, other: &Poly, shift: usize, other_degree: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &w) in other.words[..=other_degree / 64].iter().enumerate() {
            self.words[i + ws] ^= w << bs;
            if bs != 0 && i + ws + 1 < self.words.len() {
                self.words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
    }

    /// `self mod divisor`, in place.
    fn reduce(&mut self, divisor: &Poly, divisor_degree: usize) {
        while let Some(deg) = self.degree() {
            if deg < divisor_degree {
                break;
            }
            self.xor_shifted(divisor, deg - divisor_degree, divisor_degree);
        }
    }

    fn gcd(mut a: Poly, mut b: Poly) -> Poly {
        while let Some(db) = b.degree() {
            a.reduce(&b, db);
            std::mem::swap(&mut a, &mut b);
        }
        a
    }
}
