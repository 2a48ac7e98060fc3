//! Monte Carlo decoding-failure-rate estimation and log-linear
//! extrapolation of DFR against the block size `r`.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::ops::Range;

use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::decoder::decode_and_check;
use crate::error::{Error, Result};
use crate::gf2::{keygen, sample_error};
use crate::params::DecoderConfig;
use crate::rng::trial_rng;

pub const CONFIDENCE: f64 = 0.95;

/// Raw trial/failure tally. Tallies over disjoint trial ranges add up.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FailureCount {
    pub trials: u64,
    pub failures: u64,
}

impl FailureCount {
    pub fn merge(self, other: FailureCount) -> FailureCount {
        FailureCount {
            trials: self.trials + other.trials,
            failures: self.failures + other.failures,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DfrEstimate {
    pub r: usize,
    pub trials: u64,
    pub failures: u64,
    pub dfr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl DfrEstimate {
    pub fn from_count(r: usize, count: FailureCount) -> Self {
        let (ci_low, ci_high) = clopper_pearson(count.failures, count.trials, CONFIDENCE);
        Self {
            r,
            trials: count.trials,
            failures: count.failures,
            dfr: if count.trials == 0 {
                0.0
            } else {
                count.failures as f64 / count.trials as f64
            },
            ci_low,
            ci_high,
        }
    }

    /// True when the two confidence intervals are disjoint.
    pub fn separated_from(&self, other: &DfrEstimate) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}

/// Exact binomial interval for `failures` out of `trials`.
pub fn clopper_pearson(failures: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(failures <= trials);
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (x, n) = (failures as f64, trials as f64);
    let low = if failures == 0 {
        0.0
    } else if failures == trials {
        (alpha / 2.0).powf(1.0 / n)
    } else {
        Beta::new(x, n - x + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let high = if failures == trials {
        1.0
    } else if failures == 0 {
        1.0 - (alpha / 2.0).powf(1.0 / n)
    } else {
        Beta::new(x + 1.0, n - x).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

/// One trial: fresh key and error from stream `trial_index`, decode, and
/// compare against the planted error.
pub fn run_trial(cfg: &DecoderConfig, master_seed: u64, trial_index: u64) -> Result<bool> {
    let p = &cfg.params;
    let mut rng = trial_rng(master_seed, trial_index);
    let key = keygen(p.r, p.d(), &mut rng)?;
    let e = sample_error(p.r, p.t, &mut rng)?;
    decode_and_check(&key, &e, cfg)
}

/// Failure tally over the given trial indices, on the current rayon pool.
pub fn count_failures(cfg: &DecoderConfig, trials: Range<u64>, master_seed: u64) -> Result<FailureCount> {
    cfg.params.validate()?;
    let trial_count = trials.end.saturating_sub(trials.start);
    let failures = trials
        .into_par_iter()
        .map(|i| run_trial(cfg, master_seed, i).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(FailureCount {
        trials: trial_count,
        failures,
    })
}

pub fn estimate_dfr(cfg: &DecoderConfig, trials: u64, master_seed: u64) -> Result<DfrEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let count = count_failures(cfg, 0..trials, master_seed)?;
    Ok(DfrEstimate::from_count(cfg.params.r, count))
}

/// Line `log2(DFR) = intercept + slope * r` and the `r` where it reaches `-lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrapolation {
    pub slope: f64,
    pub intercept: f64,
    pub r_star: f64,
    pub lambda: u32,
}

impl Extrapolation {
    fn from_line(slope: f64, intercept: f64, lambda: u32) -> Result<Self> {
        if slope.is_nan() || slope >= 0.0 {
            return Err(Error::NoExtrapolation(format!(
                "DFR is not decreasing in r (slope {slope})"
            )));
        }
        Ok(Self {
            slope,
            intercept,
            r_star: (-(lambda as f64) - intercept) / slope,
            lambda,
        })
    }

    pub fn log2_dfr_at(&self, r: f64) -> f64 {
        self.intercept + self.slope * r
    }

    pub fn csv_line(&self) -> String {
        format!("{},{},{},{}", self.slope, self.intercept, self.r_star, self.lambda)
    }
}

pub const EXTRAPOLATION_HEADER: &str = "slope,intercept,r_star,lambda";

fn usable_points(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    points.iter().copied().filter(|&(_, p)| p > 0.0).collect()
}

/// Straight line in `log2` space through the two points with the lowest
/// nonzero DFR (ties prefer the larger `r`).
pub fn extrapolate(points: &[(f64, f64)], lambda: u32) -> Result<Extrapolation> {
    let mut pts = usable_points(points);
    if pts.len() < 2 {
        return Err(Error::NoExtrapolation("need two points with nonzero DFR".into()));
    }
    pts.sort_by(|x, y| x.1.total_cmp(&y.1).then(y.0.total_cmp(&x.0)));
    let ((r1, p1), (r2, p2)) = (pts[0], pts[1]);
    if r1 == r2 {
        return Err(Error::NoExtrapolation(format!("both lowest points are at r = {r1}")));
    }
    let slope = (p2.log2() - p1.log2()) / (r2 - r1);
    Extrapolation::from_line(slope, p1.log2() - slope * r1, lambda)
}

/// Least-squares line in `log2` space over every nonzero point.
pub fn extrapolate_fit_all(points: &[(f64, f64)], lambda: u32) -> Result<Extrapolation> {
    let pts = usable_points(points);
    if pts.len() < 2 {
        return Err(Error::NoExtrapolation("need two points with nonzero DFR".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.log2()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, p) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (p.log2() - my);
    }
    if sxx == 0.0 {
        return Err(Error::NoExtrapolation("all points share the same r".into()));
    }
    let slope = sxy / sxx;
    Extrapolation::from_line(slope, my - slope * mx, lambda)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub estimates: Vec<DfrEstimate>,
    pub extrapolation: Option<Extrapolation>,
    pub warning: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FitMethod {
    #[default]
    TwoLowest,
    All,
}

/// Estimates DFR at each `r` and extrapolates to `2^-lambda`. Points with
/// zero failures are left out of the fit.
pub fn sweep(
    cfg: &DecoderConfig,
    r_list: &[usize],
    trials_per_r: u64,
    master_seed: u64,
    fit: FitMethod,
) -> Result<SweepReport> {
    if r_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("r values must be strictly ascending".into()));
    }
    let estimates = r_list
        .iter()
        .map(|&r| estimate_dfr(&cfg.with_r(r), trials_per_r, master_seed))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| e.failures > 0)
        .map(|e| (e.r as f64, e.dfr))
        .collect();
    let (extrapolation, warning) = if points.len() < 2 {
        (
            None,
            Some(format!(
                "only {} point(s) with failures; extrapolation omitted",
                points.len()
            )),
        )
    } else {
        let res = match fit {
            FitMethod::TwoLowest => extrapolate(&points, cfg.params.lambda),
            FitMethod::All => extrapolate_fit_all(&points, cfg.params.lambda),
        };
        match res {
            Ok(x) => (Some(x), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(SweepReport {
        estimates,
        extrapolation,
        warning,
    })
}

pub const CSV_HEADER: &str = "r,trials,failures,dfr,ci_low,ci_high";

pub fn csv_row(e: &DfrEstimate) -> String {
    format!("{},{},{},{},{},{}", e.r, e.trials, e.failures, e.dfr, e.ci_low, e.ci_high)
}

pub fn write_csv<W: Write>(out: &mut W, estimates: &[DfrEstimate]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for e in estimates {
        writeln!(out, "{}", csv_row(e))?;
    }
    Ok(())
}

/// Whitespace-separated columns for plotting tools, with the fitted line
/// evaluated at each `r` and at `r_star`. Zero-failure rows get `nan`.
pub fn plot_data(estimates: &[DfrEstimate], extrapolation: Option<&Extrapolation>) -> String {
    let mut out = String::from("# r log2_dfr log2_ci_low log2_ci_high log2_fit\n");
    let fit = |r: f64| extrapolation.map_or(f64::NAN, |x| x.log2_dfr_at(r));
    let lg = |p: f64| if p > 0.0 { p.log2() } else { f64::NAN };
    for e in estimates {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            e.r,
            lg(e.dfr),
            lg(e.ci_low),
            lg(e.ci_high),
            fit(e.r as f64)
        );
    }
    if let Some(x) = extrapolation {
        let _ = writeln!(out, "{} nan nan nan {}", x.r_star, -(x.lambda as f64));
    }
    out
}

/// A gnuplot script for the file written by [`plot_data`].
pub fn gnuplot_script(data_file: &str) -> String {
    format!(
        "set xlabel 'r'\nset ylabel 'log2(DFR)'\nset key bottom left\n\
         plot '{data_file}' using 1:2:3:4 with yerrorbars title 'simulated', \\\n     \
         '{data_file}' using 1:5 with lines title 'extrapolation'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CodeParams, Schedule};
    use crate::threshold::ThresholdCoefficients;

    #[test]
    fn zero_failures_closed_form() {
        for n in [1u64, 10, 1000, 100_000] {
            let (lo, hi) = clopper_pearson(0, n, 0.95);
            assert_eq!(lo, 0.0);
            assert_eq!(hi, 1.0 - 0.025f64.powf(1.0 / n as f64));
        }
    }

    #[test]
    fn clopper_pearson_reference_value() {
        // exact binomial test interval for 5 / 100
        let (lo, hi) = clopper_pearson(5, 100, 0.95);
        assert!((lo - 0.01643187).abs() < 1e-7, "{lo}");
        assert!((hi - 0.11283491).abs() < 1e-7, "{hi}");
        let (lo, hi) = clopper_pearson(100, 100, 0.95);
        assert_eq!(hi, 1.0);
        assert!((lo - 0.025f64.powf(0.01)).abs() < 1e-15);
    }

    #[test]
    fn clopper_pearson_brackets_point() {
        for n in [7u64, 50, 999] {
            for x in 0..=n.min(60) {
                let (lo, hi) = clopper_pearson(x, n, 0.95);
                let p = x as f64 / n as f64;
                assert!(lo <= p && p <= hi, "x={x} n={n} ({lo}, {hi})");
            }
        }
    }

    #[test]
    fn two_point_extrapolation() {
        let x = extrapolate(&[(9000.0, 2f64.powi(-10)), (9200.0, 2f64.powi(-20))], 128).unwrap();
        assert!((x.slope + 0.05).abs() < 1e-12);
        assert!((x.r_star - 11360.0).abs() < 1e-6);
    }

    #[test]
    fn uses_two_lowest_points() {
        let pts = [(100.0, 0.5), (200.0, 2f64.powi(-10)), (300.0, 2f64.powi(-20)), (150.0, 0.0)];
        let x = extrapolate(&pts, 30).unwrap();
        assert!((x.slope + 0.1).abs() < 1e-12);
        assert!((x.r_star - 400.0).abs() < 1e-9);
    }

    #[test]
    fn flat_dfr_has_no_extrapolation() {
        assert!(matches!(
            extrapolate(&[(100.0, 0.01), (200.0, 0.01)], 128),
            Err(Error::NoExtrapolation(_))
        ));
        assert!(extrapolate(&[(100.0, 0.01)], 128).is_err());
        assert!(extrapolate(&[(100.0, 0.02), (200.0, 0.04)], 128).is_err());
    }

    #[test]
    fn doubling_dfr_shifts_intercept_only() {
        let pts = [(300.0, 1e-3), (340.0, 2e-5)];
        let doubled: Vec<_> = pts.iter().map(|&(r, p)| (r, 2.0 * p)).collect();
        let a = extrapolate(&pts, 64).unwrap();
        let b = extrapolate(&doubled, 64).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-15);
        assert!((b.intercept - a.intercept - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_all_on_exact_line() {
        let pts: Vec<_> = (0..5).map(|i| (100.0 + 10.0 * i as f64, 2f64.powf(-2.0 - 0.5 * i as f64))).collect();
        let x = extrapolate_fit_all(&pts, 20).unwrap();
        assert!((x.slope + 0.05).abs() < 1e-12);
        assert!((x.r_star - 460.0).abs() < 1e-9);
    }

    fn toy_cfg(t: usize) -> DecoderConfig {
        let params = CodeParams {
            r: 13,
            w: 6,
            t,
            lambda: 128,
            delta: 1,
            max_iters: 5,
        };
        DecoderConfig::new(params, ThresholdCoefficients::from_decimal("0", "1.5").unwrap(), Schedule::NonLayered)
    }

    #[test]
    fn no_errors_no_failures() {
        let est = estimate_dfr(&toy_cfg(0), 500, 3).unwrap();
        assert_eq!((est.failures, est.dfr, est.ci_low), (0, 0.0, 0.0));
    }

    #[test]
    fn split_runs_merge() {
        let cfg = toy_cfg(3);
        let whole = count_failures(&cfg, 0..400, 9).unwrap();
        let a = count_failures(&cfg, 0..200, 9).unwrap();
        let b = count_failures(&cfg, 200..400, 9).unwrap();
        assert_eq!(whole, a.merge(b));
        assert!(whole.failures > 0);
    }

    #[test]
    fn sweep_single_r_has_no_fit() {
        let rep = sweep(&toy_cfg(3), &[13], 200, 1, FitMethod::TwoLowest).unwrap();
        assert_eq!(rep.estimates.len(), 1);
        assert!(rep.extrapolation.is_none());
        assert!(rep.warning.is_some());
        assert!(sweep(&toy_cfg(3), &[15, 13], 10, 1, FitMethod::TwoLowest).is_err());
    }

    #[test]
    fn csv_layout() {
        let e = DfrEstimate::from_count(13, FailureCount { trials: 4, failures: 1 });
        let mut buf = Vec::new();
        write_csv(&mut buf, &[e]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,trials,failures,dfr,ci_low,ci_high\n13,4,1,0.25,"));
    }
}
