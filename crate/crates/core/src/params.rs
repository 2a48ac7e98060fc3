use std::fmt;

use crate::error::{Error, Result};
use crate::threshold::{ThresholdCoefficients, DEFAULT_DELTA};

/// Code and decoder-iteration parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeParams {
    pub r: usize,
    /// Row weight of `H`; each block has column weight `d = w / 2`.
    pub w: usize,
    /// Error weight.
    pub t: usize,
    /// Security level in bits.
    pub lambda: u32,
    pub delta: u32,
    pub max_iters: usize,
}

impl CodeParams {
    /// The 128-bit parameter set with the given `r`.
    pub fn level1(r: usize) -> Self {
        Self {
            r,
            w: 142,
            t: 134,
            lambda: 128,
            delta: DEFAULT_DELTA,
            max_iters: 7,
        }
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.w / 2
    }

    pub fn with_r(self, r: usize) -> Self {
        Self { r, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w == 0 || !self.w.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("w = {} must be positive and even", self.w)));
        }
        if self.d() >= self.r {
            return Err(Error::InvalidParameter(format!("d = {} must be below r = {}", self.d(), self.r)));
        }
        if self.t > 2 * self.r {
            return Err(Error::InvalidParameter(format!("t = {} exceeds 2r", self.t)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Column scheduling of one decoding iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Schedule {
    /// All `2r` counts use the syndrome from the start of the iteration.
    NonLayered,
    /// Columns are processed in blocks of this many; counts inside a block
    /// use the syndrome at block start, flips land before the next block.
    Layered(usize),
}

impl Schedule {
    /// Block size of the 32-column parallel hardware datapath.
    pub const HARDWARE: Schedule = Schedule::Layered(32);

    pub fn block_size(&self, r: usize) -> usize {
        match *self {
            Schedule::NonLayered => 2 * r,
            Schedule::Layered(b) => b.clamp(1, 2 * r),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::NonLayered => f.write_str("full"),
            Schedule::Layered(b) => write!(f, "{b}"),
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" | "non-layered" | "nonlayered" => Ok(Schedule::NonLayered),
            other => match other.parse::<usize>() {
                Ok(b) if b > 0 => Ok(Schedule::Layered(b)),
                _ => Err(Error::Parse(format!("block size must be 'full' or a positive integer, got {s:?}"))),
            },
        }
    }
}

/// Everything that determines a decode besides the key and syndrome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoderConfig {
    pub params: CodeParams,
    pub coeffs: ThresholdCoefficients,
    pub schedule: Schedule,
    /// Feed `THRESHOLD` the running `|s| + d - 2 sigma` estimate instead of
    /// an exact popcount.
    pub track_weight_incrementally: bool,
    /// Fractional bits kept for the `/3` schedule terms; `None` is exact.
    pub thirds_bits: Option<u32>,
}

impl DecoderConfig {
    pub fn new(params: CodeParams, coeffs: ThresholdCoefficients, schedule: Schedule) -> Self {
        Self {
            params,
            coeffs,
            schedule,
            track_weight_incrementally: false,
            thirds_bits: None,
        }
    }

    pub fn with_r(&self, r: usize) -> Self {
        Self {
            params: self.params.with_r(r),
            ..self.clone()
        }
    }

    pub fn block_size(&self) -> usize {
        self.schedule.block_size(self.params.r)
    }
}
