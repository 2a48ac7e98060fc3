//! Flat `key = value` run configuration.
//!
//! Values come from, in increasing priority: built-in defaults, a preset,
//! a config file, and explicit command-line flags.
//!
//! Recognised keys: `r`, `w`, `t`, `lambda`, `delta`, `i_max`, `a`, `b`,
//! `precision` (`full` or fractional bit count), `block` (`full` or block
//! size), `track_weight` (`true`/`false`), `thirds_bits`, `seed`, `trials`,
//! `workers`, `r_list`, `r_prime`, `samples`, `range` (`lo:hi`).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use bikebf::threshold::{DEFAULT_DELTA, ThresholdCoefficients};
use bikebf::{CodeParams, DecoderConfig, Precision, Schedule};

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "BIKEBF_SEED";

/// Threshold coefficients fitted for the layered decoder at r' = 11100.
pub const LAYERED_A: &str = "0.00618658";
pub const LAYERED_B: &str = "10.8504";
/// Threshold coefficients of the reference non-layered decoder.
pub const NON_LAYERED_A: &str = "0.006258";
pub const NON_LAYERED_B: &str = "11.094";

const KNOWN_KEYS: &[&str] = &[
    "r", "w", "t", "lambda", "delta", "i_max", "a", "b", "precision", "block", "track_weight",
    "thirds_bits", "seed", "trials", "workers", "r_list", "r_prime", "samples", "range",
];

pub fn preset(name: &str) -> Result<Vec<(&'static str, String)>> {
    let common = |r: usize, a: &str, b: &str, precision: &str, block: &str| {
        vec![
            ("r", r.to_string()),
            ("w", "142".to_string()),
            ("t", "134".to_string()),
            ("lambda", "128".to_string()),
            ("delta", DEFAULT_DELTA.to_string()),
            ("i_max", "7".to_string()),
            ("a", a.to_string()),
            ("b", b.to_string()),
            ("precision", precision.to_string()),
            ("block", block.to_string()),
        ]
    };
    Ok(match name {
        "bike-l1-layered" => {
            let mut v = common(12992, LAYERED_A, LAYERED_B, "7", "32");
            v.push(("track_weight", "true".into()));
            v
        }
        "bike-l1-nonlayered" => common(12095, NON_LAYERED_A, NON_LAYERED_B, "full", "full"),
        other => bail!("unknown preset {other:?} (expected bike-l1-layered or bike-l1-nonlayered)"),
    })
}

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn defaults() -> Self {
        let mut s = Settings::default();
        for (k, v) in [
            ("w", "142"),
            ("t", "134"),
            ("lambda", "128"),
            ("i_max", "7"),
            ("a", LAYERED_A),
            ("b", LAYERED_B),
            ("precision", "full"),
            ("block", "32"),
            ("track_weight", "false"),
            ("workers", "1"),
        ] {
            s.values.insert(k.into(), v.into());
        }
        s.values.insert("delta".into(), DEFAULT_DELTA.to_string());
        s
    }

    /// Defaults, then the preset (if any), then the config file (if any).
    pub fn load(preset_name: Option<&str>, config: Option<&Path>) -> Result<Self> {
        let mut s = Self::defaults();
        if let Some(name) = preset_name {
            for (k, v) in preset(name)? {
                s.values.insert(k.into(), v);
            }
        }
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            s.merge_text(&text)?;
        }
        Ok(s)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", lineno + 1))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                bail!("config line {}: unknown key {k:?}", lineno + 1);
            }
            self.values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(())
    }

    /// Applies a flag value when it was given.
    pub fn set<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("bad value for {key}: {v:?} ({e})")))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| anyhow!("missing required setting {key:?}"))
    }

    pub fn seed(&self) -> Result<u64> {
        if let Some(seed) = self.get::<u64>("seed")? {
            return Ok(seed);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().with_context(|| format!("bad {SEED_ENV} value {v:?}")),
            Err(_) => Ok(1),
        }
    }

    pub fn code_params(&self) -> Result<CodeParams> {
        Ok(CodeParams {
            r: self.require("r")?,
            w: self.require("w")?,
            t: self.require("t")?,
            lambda: self.require("lambda")?,
            delta: self.require("delta")?,
            max_iters: self.require("i_max")?,
        })
    }

    pub fn precision(&self) -> Result<Precision> {
        match self.require::<String>("precision")?.as_str() {
            "full" => Ok(Precision::Full),
            k => Ok(Precision::Msnb(
                k.parse().map_err(|_| anyhow!("precision must be 'full' or a bit count, got {k:?}"))?,
            )),
        }
    }

    pub fn coefficients(&self) -> Result<ThresholdCoefficients> {
        let full = ThresholdCoefficients::from_decimal(
            &self.require::<String>("a")?,
            &self.require::<String>("b")?,
        )?;
        Ok(match self.precision()? {
            Precision::Full => full,
            Precision::Msnb(k) => full.quantize(k)?,
        })
    }

    pub fn decoder_config(&self) -> Result<DecoderConfig> {
        let mut cfg = DecoderConfig::new(
            self.code_params()?,
            self.coefficients()?,
            self.require::<Schedule>("block")?,
        );
        cfg.track_weight_incrementally = self.require("track_weight")?;
        cfg.thirds_bits = self.get("thirds_bits")?;
        Ok(cfg)
    }
}

/// Parses `lo:hi` (inclusive).
pub fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("range must look like lo:hi, got {s:?}"))?;
    let (lo, hi): (u32, u32) = (lo.trim().parse()?, hi.trim().parse()?);
    if lo > hi {
        bail!("empty range {s:?}");
    }
    Ok(lo..=hi)
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| anyhow!("bad list entry {x:?}: {e}")))
        .collect()
}
