//! Threshold calibration: for random instances, find the constant
//! first-iteration threshold that shrinks the syndrome the most, then fit a
//! line through (initial syndrome weight, best threshold).

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::bitvec::BitVector;
use crate::decoder::Workspace;
use crate::error::{Error, Result};
use crate::gf2::{keygen, sample_error, SparseKey};
use crate::params::{CodeParams, Schedule};
use crate::rng::trial_rng;

/// Candidate thresholds used for the 128-bit parameter set.
pub const DEFAULT_RANGE: RangeInclusive<u32> = 30..=60;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const MIN_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CalibrationSample {
    pub initial_syndrome_weight: usize,
    pub best_threshold: u32,
}

/// Ordinary least-squares line `threshold = a * weight + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedCoefficients {
    pub r_prime: usize,
    pub a: f64,
    pub b: f64,
    pub num_samples: usize,
}

/// Syndrome weight after one iteration with the constant threshold `t`.
pub fn first_iteration_weight(key: &SparseKey, s0: &BitVector, schedule: Schedule, t: i64) -> Result<usize> {
    let mut ws = Workspace::new(key, s0)?;
    ws.iterate(1, t, schedule.block_size(key.r()), &mut ());
    Ok(ws.weight())
}

/// The candidate in `range` minimising the syndrome weight after the first
/// iteration; ties go to the smallest threshold.
pub fn best_first_threshold(
    key: &SparseKey,
    e: &BitVector,
    schedule: Schedule,
    range: RangeInclusive<u32>,
) -> Result<CalibrationSample> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty threshold range {lo}..={hi}")));
    }
    let s0 = key.syndrome(e)?;
    let weights = if schedule.block_size(key.r()) == 2 * key.r() {
        single_block_sweep(key, &s0, lo, hi)?
    } else {
        (lo..=hi)
            .map(|t| first_iteration_weight(key, &s0, schedule, t as i64))
            .collect::<Result<Vec<_>>>()?
    };
    // min_by_key keeps the first minimum, i.e. the smallest threshold
    let (offset, _) = weights
        .iter()
        .enumerate()
        .min_by_key(|&(_, &w)| w)
        .expect("non-empty range");
    Ok(CalibrationSample {
        initial_syndrome_weight: s0.weight(),
        best_threshold: lo + offset as u32,
    })
}

/// With a single block every count comes from `s0`, so the flip set for
/// threshold `t` is `{j : sigma_j >= t}`. Walking `t` downward only ever
/// adds columns, which gives all candidates from one counting pass.
fn single_block_sweep(key: &SparseKey, s0: &BitVector, lo: u32, hi: u32) -> Result<Vec<usize>> {
    let mut ws = Workspace::new(key, s0)?;
    let d = key.d();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); d + 1];
    for (j, s) in ws.all_counts().into_iter().enumerate() {
        buckets[s as usize].push(j);
    }
    let mut weights = vec![0; (hi - lo) as usize + 1];
    // columns with sigma >= next_level have been applied
    let mut next_level = d + 1;
    for t in (lo..=hi).rev() {
        let t = t as usize;
        while next_level > t {
            next_level -= 1;
            for &j in &buckets[next_level] {
                ws.apply_column(j);
            }
        }
        weights[t - lo as usize] = ws.weight();
    }
    Ok(weights)
}

pub fn least_squares_fit(samples: &[CalibrationSample]) -> Result<LineFit> {
    if samples.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 samples, got {}", samples.len())));
    }
    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.initial_syndrome_weight as f64).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.best_threshold as f64).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for s in samples {
        let dx = s.initial_syndrome_weight as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (s.best_threshold as f64 - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all syndrome weights are equal".into()));
    }
    let a = sxy / sxx;
    Ok(LineFit { a, b: mean_y - a * mean_x })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalibrationConfig {
    pub r_prime: usize,
    /// Supplies `w` and `t`; `params.r` is ignored in favour of `r_prime`.
    pub params: CodeParams,
    pub schedule: Schedule,
    pub num_samples: usize,
    pub range: RangeInclusive<u32>,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRun {
    pub samples: Vec<CalibrationSample>,
    pub fit: FittedCoefficients,
}

/// Sample `i` uses key and error drawn from `trial_rng(master_seed, i)`.
pub fn calibration_sample(cfg: &CalibrationConfig, index: u64) -> Result<CalibrationSample> {
    let mut rng = trial_rng(cfg.master_seed, index);
    let key = keygen(cfg.r_prime, cfg.params.d(), &mut rng)?;
    let e = sample_error(cfg.r_prime, cfg.params.t, &mut rng)?;
    best_first_threshold(&key, &e, cfg.schedule, cfg.range.clone())
}

pub fn calibrate(cfg: &CalibrationConfig) -> Result<CalibrationRun> {
    if cfg.num_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least {MIN_SAMPLES} samples, got {}",
            cfg.num_samples
        )));
    }
    cfg.params.with_r(cfg.r_prime).validate()?;
    let samples = (0..cfg.num_samples as u64)
        .into_par_iter()
        .map(|i| calibration_sample(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let line = least_squares_fit(&samples)?;
    Ok(CalibrationRun {
        fit: FittedCoefficients {
            r_prime: cfg.r_prime,
            a: line.a,
            b: line.b,
            num_samples: samples.len(),
        },
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn sample(x: usize, y: u32) -> CalibrationSample {
        CalibrationSample {
            initial_syndrome_weight: x,
            best_threshold: y,
        }
    }

    #[test]
    fn two_point_line() {
        let fit = least_squares_fit(&[sample(100, 30), sample(200, 40)]).unwrap();
        assert!((fit.a - 0.1).abs() < 1e-12);
        assert!((fit.b - 20.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_ols() {
        let fit = least_squares_fit(&[sample(0, 1), sample(1, 0), sample(2, 1)]).unwrap();
        assert!(fit.a.abs() < 1e-15);
        assert!((fit.b - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_fits() {
        assert!(matches!(least_squares_fit(&[sample(5, 1)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(
            least_squares_fit(&[sample(5, 1), sample(5, 2)]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn normal_equations_hold() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let samples: Vec<_> = (0..500)
            .map(|_| sample(rng.gen_range(2000..6000), rng.gen_range(30..=60)))
            .collect();
        let fit = least_squares_fit(&samples).unwrap();
        let (mut r_sum, mut rx_sum, mut scale) = (0.0, 0.0, 0.0);
        for s in &samples {
            let x = s.initial_syndrome_weight as f64;
            let resid = s.best_threshold as f64 - (fit.a * x + fit.b);
            r_sum += resid;
            rx_sum += resid * x;
            scale += (s.best_threshold as f64 * x).abs();
        }
        assert!(r_sum.abs() <= 1e-9 * samples.len() as f64 * 60.0);
        assert!(rx_sum.abs() <= 1e-9 * scale);
    }

    #[test]
    fn zero_error_ties_to_lowest_candidate() {
        let key = SparseKey::new(13, vec![0, 1, 3], vec![0, 2, 7]).unwrap();
        let e = BitVector::zeros(26);
        for schedule in [Schedule::NonLayered, Schedule::Layered(1)] {
            let s = best_first_threshold(&key, &e, schedule, 1..=3).unwrap();
            assert_eq!(s, sample(0, 1));
        }
    }

    #[test]
    fn thresholds_above_d_flip_nothing() {
        let key = SparseKey::new(13, vec![0, 1, 3], vec![0, 2, 7]).unwrap();
        let e = BitVector::from_support(26, &[2, 17]).unwrap();
        let s0 = key.syndrome(&e).unwrap();
        for t in 4..10 {
            assert_eq!(first_iteration_weight(&key, &s0, Schedule::NonLayered, t).unwrap(), s0.weight());
            assert_eq!(first_iteration_weight(&key, &s0, Schedule::Layered(1), t).unwrap(), s0.weight());
        }
        let single = single_block_sweep(&key, &s0, 4, 9).unwrap();
        assert!(single.iter().all(|&w| w == s0.weight()));
    }

    #[test]
    fn sweep_matches_per_candidate_runs() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for _ in 0..200 {
            let key = keygen(37, 5, &mut rng).unwrap();
            let e = sample_error(37, 6, &mut rng).unwrap();
            let s0 = key.syndrome(&e).unwrap();
            let fast = single_block_sweep(&key, &s0, 0, 7).unwrap();
            for t in 0..=7u32 {
                assert_eq!(
                    fast[t as usize],
                    first_iteration_weight(&key, &s0, Schedule::NonLayered, t as i64).unwrap()
                );
            }
        }
    }

    #[test]
    fn rejects_small_sample_budget() {
        let cfg = CalibrationConfig {
            r_prime: 101,
            params: CodeParams::level1(101),
            schedule: Schedule::NonLayered,
            num_samples: 10,
            range: DEFAULT_RANGE,
            master_seed: 1,
        };
        assert!(calibrate(&cfg).is_err());
    }
}
