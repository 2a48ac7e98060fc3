//! Bit-flipping decoder with a fixed iteration count and layered scheduling.
//!
//! One engine covers every schedule. Columns are visited in ascending order
//! in blocks of `B`: all counts of a block are taken against the syndrome as
//! it stands when the block starts, then the block's flips are applied.
//! `B = 2r` is the classic non-layered algorithm, `B = 1` is pure column
//! layering and `B = L` models an `L`-parallel datapath.

use std::fmt;

use num_rational::BigRational;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::gf2::SparseKey;
use crate::params::DecoderConfig;
use crate::threshold::{format_exact, integer_threshold, threshold, ThresholdState};

/// Number of unsatisfied parity checks touching a column, in `[0, d]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UpcCount(pub u32);

/// Counts the ones of `s` on the rows where column `j` of `H` is set.
pub fn count_upc(key: &SparseKey, s: &BitVector, j: usize) -> Result<UpcCount> {
    if s.len() != key.r() {
        return Err(Error::LengthMismatch {
            expected: key.r(),
            actual: s.len(),
        });
    }
    Ok(UpcCount(key.column_rows(j)?.filter(|&i| s.get(i)).count() as u32))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationTrace {
    pub iteration: usize,
    pub threshold: BigRational,
    /// Syndrome weight handed to the threshold function.
    pub weight_before: usize,
    pub flips: usize,
    /// Exact syndrome weight after the iteration.
    pub weight_after: usize,
}

impl fmt::Display for IterationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iteration={} T={} weight_before={} flips={} weight_after={}",
            self.iteration,
            format_exact(&self.threshold),
            self.weight_before,
            self.flips,
            self.weight_after
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub error_estimate: BitVector,
    /// Final syndrome is zero.
    pub converged: bool,
    /// Always the configured iteration count.
    pub iterations_run: usize,
    pub trace: Vec<IterationTrace>,
    pub final_syndrome_weight: usize,
}

impl DecodeOutcome {
    pub fn flips_per_iteration(&self) -> Vec<usize> {
        self.trace.iter().map(|t| t.flips).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlipEvent {
    pub iteration: usize,
    pub column: usize,
    pub sigma: u32,
}

/// Hooks into the decoding loop, for tests and instrumentation.
///
/// Iterations and blocks that cannot flip anything (zero syndrome, or a
/// threshold above `d`) are skipped without block callbacks.
pub trait DecodeObserver {
    fn on_flip(&mut self, _event: FlipEvent, _state: DecoderView<'_>) {}
    fn on_block_end(&mut self, _iteration: usize, _state: DecoderView<'_>) {}
    fn on_iteration_end(&mut self, _iteration: usize, _state: DecoderView<'_>) {}
}

impl DecodeObserver for () {}

/// Read-only view of the decoder's working state.
#[derive(Clone, Copy)]
pub struct DecoderView<'a> {
    ws: &'a Workspace<'a>,
}

impl DecoderView<'_> {
    pub fn syndrome(&self) -> BitVector {
        BitVector::from_bits(self.ws.syn[..self.ws.r].iter().map(|&b| b == 1))
    }

    pub fn error_estimate(&self) -> BitVector {
        BitVector::from_bits(self.ws.err.iter().map(|&b| b == 1))
    }

    /// Exact syndrome weight.
    pub fn weight(&self) -> usize {
        self.ws.weight
    }

    /// Weight maintained by `|s| <- |s| + d - 2 sigma` per flip.
    pub fn tracked_weight(&self) -> i64 {
        self.ws.tracked
    }
}

/// Mutable decoding state. The syndrome is stored twice back to back so
/// that every cyclic row index `(j - k) mod r` becomes `j - k + r`.
pub(crate) struct Workspace<'k> {
    key: &'k SparseKey,
    r: usize,
    syn: Vec<u8>,
    err: Vec<u8>,
    weight: usize,
    tracked: i64,
    sigma: Vec<u32>,
}

impl<'k> Workspace<'k> {
    pub(crate) fn new(key: &'k SparseKey, s0: &BitVector) -> Result<Self> {
        let r = key.r();
        if s0.len() != r {
            return Err(Error::LengthMismatch {
                expected: r,
                actual: s0.len(),
            });
        }
        let mut syn = vec![0u8; 2 * r];
        for i in s0.support() {
            syn[i] = 1;
            syn[i + r] = 1;
        }
        let weight = s0.weight();
        Ok(Self {
            key,
            r,
            syn,
            err: vec![0; 2 * r],
            weight,
            tracked: weight as i64,
            sigma: Vec::new(),
        })
    }

    pub(crate) fn weight(&self) -> usize {
        self.weight
    }

    #[inline]
    fn count(&self, j: usize) -> u32 {
        let (supp, jj) = if j < self.r {
            (self.key.h0(), j + self.r)
        } else {
            (self.key.h1(), j)
        };
        supp.iter().map(|&k| self.syn[jj - k] as u32).sum()
    }

    #[inline]
    fn flip(&mut self, j: usize, sigma: u32) {
        self.err[j] ^= 1;
        let r = self.r;
        let jj = if j < r { j } else { j - r };
        for &k in self.key.block_support(j) {
            let row = if jj >= k { jj - k } else { jj + r - k };
            let bit = self.syn[row] ^ 1;
            self.syn[row] = bit;
            self.syn[row + r] = bit;
            if bit == 1 {
                self.weight += 1;
            } else {
                self.weight -= 1;
            }
        }
        self.tracked += self.key.d() as i64 - 2 * sigma as i64;
    }

    /// One pass over all columns with integer threshold `t`; returns the
    /// number of flips.
    pub(crate) fn iterate<O: DecodeObserver>(
        &mut self,
        iteration: usize,
        t: i64,
        block: usize,
        observer: &mut O,
    ) -> usize {
        let n = 2 * self.r;
        let d = self.key.d() as i64;
        if t > d {
            return 0;
        }
        let mut flips = 0;
        let mut sigma = std::mem::take(&mut self.sigma);
        let mut start = 0;
        while start < n {
            if self.weight == 0 && t > 0 {
                break;
            }
            let end = (start + block).min(n);
            sigma.clear();
            sigma.extend((start..end).map(|j| self.count(j)));
            for (offset, &s) in sigma.iter().enumerate() {
                if s as i64 >= t {
                    let j = start + offset;
                    self.flip(j, s);
                    flips += 1;
                    debug_assert!(block != 1 || self.tracked == self.weight as i64);
                    observer.on_flip(
                        FlipEvent {
                            iteration,
                            column: j,
                            sigma: s,
                        },
                        DecoderView { ws: self },
                    );
                }
            }
            observer.on_block_end(iteration, DecoderView { ws: self });
            start = end;
        }
        self.sigma = sigma;
        flips
    }

    /// Counts for every column against the current syndrome.
    pub(crate) fn all_counts(&self) -> Vec<u32> {
        (0..2 * self.r).map(|j| self.count(j)).collect()
    }

    /// Flips column `j` without counting it as a decoder decision.
    pub(crate) fn apply_column(&mut self, j: usize) {
        self.flip(j, 0);
    }
}

/// Runs the decoder for exactly `max_iters` iterations.
pub fn decode(key: &SparseKey, s0: &BitVector, cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    decode_observed(key, s0, cfg, &mut ())
}

pub fn decode_observed<O: DecodeObserver>(
    key: &SparseKey,
    s0: &BitVector,
    cfg: &DecoderConfig,
    observer: &mut O,
) -> Result<DecodeOutcome> {
    if key.r() != cfg.params.r || key.w() != cfg.params.w {
        return Err(Error::InvalidParameter(format!(
            "key (r={}, w={}) does not match config (r={}, w={})",
            key.r(),
            key.w(),
            cfg.params.r,
            cfg.params.w
        )));
    }
    let mut ws = Workspace::new(key, s0)?;
    let block = cfg.block_size();
    let state = ThresholdState::new(&cfg.coeffs, ws.weight, key.d(), cfg.params.delta);
    let mut trace = Vec::with_capacity(cfg.params.max_iters);
    for iteration in 1..=cfg.params.max_iters {
        let weight_before = if cfg.track_weight_incrementally {
            ws.tracked.max(0) as usize
        } else {
            ws.weight
        };
        let t = threshold(iteration, weight_before, &state, &cfg.coeffs, cfg.thirds_bits);
        let flips = ws.iterate(iteration, integer_threshold(&t), block, observer);
        observer.on_iteration_end(iteration, DecoderView { ws: &ws });
        trace.push(IterationTrace {
            iteration,
            threshold: t,
            weight_before,
            flips,
            weight_after: ws.weight,
        });
    }
    Ok(DecodeOutcome {
        error_estimate: DecoderView { ws: &ws }.error_estimate(),
        converged: ws.weight == 0,
        iterations_run: cfg.params.max_iters,
        trace,
        final_syndrome_weight: ws.weight,
    })
}

/// Decodes `H e_true^T` and reports a failure whenever the estimate differs
/// from `e_true`, including miscorrections that reach a zero syndrome.
pub fn decode_and_check(key: &SparseKey, e_true: &BitVector, cfg: &DecoderConfig) -> Result<bool> {
    let s0 = key.syndrome(e_true)?;
    let outcome = decode(key, &s0, cfg)?;
    Ok(&outcome.error_estimate != e_true)
}
