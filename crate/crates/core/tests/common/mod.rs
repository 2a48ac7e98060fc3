//! Dense reference model of the decoder, written straight from the
//! algorithm's pseudocode with no sharing of code paths with the library.
#![allow(dead_code)]

use num_rational::Ratio;

pub type Q = Ratio<i128>;

/// Parses `[-]digits[.digits]` exactly.
pub fn dec(s: &str) -> Q {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let mut num: i128 = 0;
    for c in int.chars().chain(frac.chars()) {
        num = num * 10 + c.to_digit(10).expect("decimal digit") as i128;
    }
    let q = Q::new(num, 10i128.pow(frac.len() as u32));
    if neg {
        -q
    } else {
        q
    }
}

/// Parity-check matrix stored as `r` dense rows of `2r` entries.
#[derive(Clone, Debug)]
pub struct DenseCode {
    pub r: usize,
    pub rows: Vec<Vec<u8>>,
}

impl DenseCode {
    /// Row `i` of each circulant block is the first row shifted right by `i`.
    pub fn new(r: usize, h0: &[usize], h1: &[usize]) -> Self {
        let mut rows = vec![vec![0u8; 2 * r]; r];
        for (i, row) in rows.iter_mut().enumerate() {
            for &k in h0 {
                row[(i + k) % r] ^= 1;
            }
            for &k in h1 {
                row[r + (i + k) % r] ^= 1;
            }
        }
        Self { r, rows }
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        self.rows.iter().map(|row| row[j]).collect()
    }

    pub fn syndrome(&self, e: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(e).fold(0u8, |acc, (&h, &x)| acc ^ (h & x)))
            .collect()
    }

    /// Rank over GF(2) of the columns.
    pub fn rank(&self) -> usize {
        rank_of(&self.rows)
    }

    /// Whether `s` is a GF(2) combination of the columns.
    pub fn spans(&self, s: &[u8]) -> bool {
        let augmented: Vec<Vec<u8>> = self
            .rows
            .iter()
            .zip(s)
            .map(|(row, &bit)| row.iter().copied().chain([bit]).collect())
            .collect();
        rank_of(&augmented) == self.rank()
    }
}

fn rank_of(rows: &[Vec<u8>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][col] == 1) else {
            continue;
        };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && m[i][col] == 1 {
                let pivot = m[rank].clone();
                for (x, y) in m[i].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug)]
pub struct OracleParams {
    pub a: Q,
    pub b: Q,
    pub d: usize,
    pub delta: i128,
    pub max_iters: usize,
    /// Columns per block; `2r` for the plain algorithm.
    pub block: usize,
    /// Visit columns in descending order instead of ascending.
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun {
    pub e: Vec<u8>,
    pub s: Vec<u8>,
    /// `(column, count)` for each flip, per iteration, in flip order.
    pub flips: Vec<Vec<(usize, u32)>>,
    pub thresholds: Vec<Q>,
    /// Syndrome after every iteration.
    pub syndromes: Vec<Vec<u8>>,
}

fn weight(v: &[u8]) -> i128 {
    v.iter().map(|&x| x as i128).sum()
}

pub fn algorithm1(code: &DenseCode, s0: &[u8], p: &OracleParams) -> OracleRun {
    let n = 2 * code.r;
    let f = |x: i128| p.a * Q::from_integer(x) + p.b;
    let delta = Q::from_integer(p.delta);
    let majority = Q::new(p.d as i128 + 1, 2);
    let t_prime = f(weight(s0));
    let mut s = s0.to_vec();
    let mut e = vec![0u8; n];
    let mut run = OracleRun {
        e: Vec::new(),
        s: Vec::new(),
        flips: Vec::new(),
        thresholds: Vec::new(),
        syndromes: Vec::new(),
    };
    let order: Vec<usize> = if p.reversed {
        (0..n).rev().collect()
    } else {
        (0..n).collect()
    };
    for i in 1..=p.max_iters {
        let scheduled = match i {
            1 => t_prime + delta,
            2 => (Q::from_integer(2) * t_prime + majority) / Q::from_integer(3) + delta,
            3 => (t_prime + Q::from_integer(2) * majority) / Q::from_integer(3) + delta,
            _ => majority + delta,
        };
        let t = std::cmp::max(f(weight(&s)), scheduled);
        let mut flipped = Vec::new();
        for block in order.chunks(p.block) {
            let counts: Vec<u32> = block
                .iter()
                .map(|&j| (0..code.r).filter(|&row| code.rows[row][j] == 1 && s[row] == 1).count() as u32)
                .collect();
            for (&j, &sigma) in block.iter().zip(&counts) {
                if Q::from_integer(sigma as i128) >= t {
                    e[j] ^= 1;
                    for (bit, row) in s.iter_mut().zip(&code.rows) {
                        *bit ^= row[j];
                    }
                    flipped.push((j, sigma));
                }
            }
        }
        run.flips.push(flipped);
        run.thresholds.push(t);
        run.syndromes.push(s.clone());
    }
    run.e = e;
    run.s = s;
    run
}

/// A random decoding instance in the small-parameter regime.
#[derive(Clone, Debug)]
pub struct Instance {
    pub r: usize,
    pub d: usize,
    pub t: usize,
    pub h0: Vec<usize>,
    pub h1: Vec<usize>,
    pub e: Vec<usize>,
    pub a: String,
    pub b: String,
    pub delta: u32,
    pub max_iters: usize,
}

pub fn random_instance<R: rand::Rng>(rng: &mut R) -> Instance {
    let r = rng.gen_range(13..=201);
    let d = rng.gen_range(3..=9);
    let t = rng.gen_range(1..=10);
    let h0 = distinct(rng, r, d);
    let h1 = distinct(rng, r, d);
    let e = distinct(rng, 2 * r, t);
    // Slopes around a few percent keep f(|s|) in the same range as d.
    let a = format!("0.{:04}", rng.gen_range(0..600));
    let b = format!("{}.{:02}", rng.gen_range(0..=d / 2), rng.gen_range(0..100));
    Instance {
        r,
        d,
        t,
        h0,
        h1,
        e,
        a,
        b,
        delta: rng.gen_range(0..=2),
        max_iters: rng.gen_range(1..=7),
    }
}

fn distinct<R: rand::Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(k);
    while out.len() < k {
        let x = rng.gen_range(0..n);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out.sort_unstable();
    out
}

impl Instance {
    pub fn dense(&self) -> DenseCode {
        DenseCode::new(self.r, &self.h0, &self.h1)
    }

    pub fn error_bits(&self) -> Vec<u8> {
        let mut e = vec![0u8; 2 * self.r];
        for &j in &self.e {
            e[j] = 1;
        }
        e
    }

    pub fn oracle_params(&self, block: usize) -> OracleParams {
        OracleParams {
            a: dec(&self.a),
            b: dec(&self.b),
            d: self.d,
            delta: self.delta as i128,
            max_iters: self.max_iters,
            block,
            reversed: false,
        }
    }

    pub fn key(&self) -> bikebf::SparseKey {
        bikebf::SparseKey::new(self.r, self.h0.clone(), self.h1.clone()).unwrap()
    }

    pub fn config(&self, schedule: bikebf::Schedule) -> bikebf::DecoderConfig {
        let params = bikebf::CodeParams {
            r: self.r,
            w: 2 * self.d,
            t: self.t,
            lambda: 128,
            delta: self.delta,
            max_iters: self.max_iters,
        };
        let coeffs = bikebf::ThresholdCoefficients::from_decimal(&self.a, &self.b).unwrap();
        bikebf::DecoderConfig::new(params, coeffs, schedule)
    }
}

/// Records every flip and the state at block and iteration boundaries.
#[derive(Default)]
pub struct Recorder {
    pub flips: Vec<Vec<(usize, u32)>>,
    /// `(syndrome, error estimate)` at the end of every block.
    pub blocks: Vec<(Vec<u8>, Vec<u8>)>,
    pub iterations: Vec<(Vec<u8>, Vec<u8>)>,
    /// `(tracked, exact, popcount)` after every flip.
    pub weights: Vec<(i64, usize, usize)>,
}

pub fn bits(v: &bikebf::BitVector) -> Vec<u8> {
    v.iter().map(u8::from).collect()
}

impl bikebf::decoder::DecodeObserver for Recorder {
    fn on_flip(&mut self, ev: bikebf::decoder::FlipEvent, st: bikebf::decoder::DecoderView<'_>) {
        while self.flips.len() < ev.iteration {
            self.flips.push(Vec::new());
        }
        self.flips[ev.iteration - 1].push((ev.column, ev.sigma));
        self.weights.push((st.tracked_weight(), st.weight(), st.syndrome().weight()));
    }

    fn on_block_end(&mut self, _iteration: usize, st: bikebf::decoder::DecoderView<'_>) {
        self.blocks.push((bits(&st.syndrome()), bits(&st.error_estimate())));
    }

    fn on_iteration_end(&mut self, iteration: usize, st: bikebf::decoder::DecoderView<'_>) {
        while self.flips.len() < iteration {
            self.flips.push(Vec::new());
        }
        self.iterations.push((bits(&st.syndrome()), bits(&st.error_estimate())));
    }
}

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn to_q(x: &num_rational::BigRational) -> Q {
    Q::new(x.numer().to_string().parse().unwrap(), x.denom().to_string().parse().unwrap())
}

/// Compares the library against the reference on one instance and schedule.
/// Returns a description of the first disagreement.
pub fn compare_with_reference(inst: &Instance, block: Option<usize>) -> Result<(), String> {
    let code = inst.dense();
    let e_true = inst.error_bits();
    let s0 = code.syndrome(&e_true);
    let schedule = match block {
        None => bikebf::Schedule::NonLayered,
        Some(b) => bikebf::Schedule::Layered(b),
    };
    let reference = algorithm1(&code, &s0, &inst.oracle_params(block.unwrap_or(2 * inst.r)));
    let key = inst.key();
    let s0_lib = bikebf::BitVector::from_bits(s0.iter().map(|&b| b == 1));
    let mut rec = Recorder::default();
    let out = bikebf::decode_observed(&key, &s0_lib, &inst.config(schedule), &mut rec).map_err(|e| e.to_string())?;
    for (i, (want, got)) in reference.flips.iter().zip(&rec.flips).enumerate() {
        if want != got {
            return Err(format!("iteration {}: reference flips {want:?}, decoder flips {got:?}", i + 1));
        }
    }
    if rec.flips.len() != reference.flips.len() {
        return Err(format!("{} iterations recorded, expected {}", rec.flips.len(), reference.flips.len()));
    }
    let thresholds: Vec<Q> = out.trace.iter().map(|t| to_q(&t.threshold)).collect();
    if thresholds != reference.thresholds {
        return Err(format!("thresholds {thresholds:?} vs reference {:?}", reference.thresholds));
    }
    if bits(&out.error_estimate) != reference.e {
        return Err("final error estimate differs".into());
    }
    let final_weight = reference.s.iter().filter(|&&b| b == 1).count();
    if out.final_syndrome_weight != final_weight || out.converged != (final_weight == 0) {
        return Err("final syndrome weight differs".into());
    }
    Ok(())
}

/// Checks syndrome consistency at iteration boundaries and, at `B = 1`,
/// tracked weight against popcount after every flip.
pub fn check_state_invariants(inst: &Instance) -> Result<(), String> {
    let code = inst.dense();
    let e_true = inst.error_bits();
    let s0 = code.syndrome(&e_true);
    let key = inst.key();
    let s0_lib = bikebf::BitVector::from_bits(s0.iter().map(|&b| b == 1));
    for schedule in [bikebf::Schedule::NonLayered, bikebf::Schedule::Layered(1)] {
        let mut cfg = inst.config(schedule);
        cfg.track_weight_incrementally = schedule == bikebf::Schedule::Layered(1);
        let mut rec = Recorder::default();
        bikebf::decode_observed(&key, &s0_lib, &cfg, &mut rec).map_err(|e| e.to_string())?;
        for (i, (s, e_est)) in rec.iterations.iter().enumerate() {
            if *s != code.syndrome(&xor(&e_true, e_est)) {
                return Err(format!("{schedule:?}: syndrome inconsistent after iteration {}", i + 1));
            }
        }
        if schedule == bikebf::Schedule::Layered(1) {
            for (n, &(tracked, exact, pop)) in rec.weights.iter().enumerate() {
                if tracked != pop as i64 || exact != pop {
                    return Err(format!("flip {n}: tracked {tracked}, exact {exact}, popcount {pop}"));
                }
            }
        }
    }
    Ok(())
}
