//! Seeded Monte Carlo estimation of logical failure rates.
//!
//! Sample `i` of a point draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`,
//! so tallies depend only on `(seed, samples)` and never on thread scheduling.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{build_code, CodeFamily, CodeSpec, EquivClass};
use crate::decoder::{decode_class, Decoder};
use crate::error::{Error, Result};
use crate::noise::{biased_rates, sample_chain, Bias, NoiseParams};

pub const CSV_HEADER: [&str; 15] = [
    "family", "d", "eta", "p", "chi", "samples", "seed", "P_fX", "P_fZ", "P_fY", "P_f", "se_fX", "se_fZ", "se_fY", "se_f",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: CodeFamily,
    pub d_list: Vec<usize>,
    pub eta: Bias,
    pub p_list: Vec<f64>,
    pub samples: u64,
    pub decoder: Decoder,
    pub master_seed: u64,
    pub workers: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::OutOfRange("samples must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::OutOfRange("workers must be at least 1".into()));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::OutOfRange(format!("p = {p} outside [0, 1)")));
        }
        if !self.decoder.supports(self.family) {
            return Err(Error::UnsupportedFamily {
                op: "sweep",
                family: self.family,
            });
        }
        if let Decoder::Mps(cfg) = &self.decoder {
            cfg.validate()?;
        }
        for &d in &self.d_list {
            build_code(self.family, d)?;
        }
        Ok(())
    }
}

/// Evenly spaced grid from `p_min` to `p_max` inclusive, rounded to 12 decimals.
pub fn p_grid(p_min: f64, p_max: f64, dp: f64) -> Result<Vec<f64>> {
    if !(dp > 0.0) || p_max < p_min {
        return Err(Error::OutOfRange(format!("bad grid [{p_min}, {p_max}] step {dp}")));
    }
    let steps = ((p_max - p_min) / dp + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|i| ((p_min + i as f64 * dp) * 1e12).round() / 1e12)
        .collect())
}

/// Tallies by residual class with derived rates and binomial standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRates {
    pub samples: u64,
    pub n_i: u64,
    pub n_x: u64,
    pub n_z: u64,
    pub n_y: u64,
    pub p_x: f64,
    pub p_z: f64,
    pub p_y: f64,
    pub p_fx: f64,
    pub p_fz: f64,
    pub p_fy: f64,
    pub p_f: f64,
    pub se_fx: f64,
    pub se_fz: f64,
    pub se_fy: f64,
    pub se_f: f64,
}

fn binomial_se(rate: f64, samples: u64) -> f64 {
    (rate * (1.0 - rate) / samples as f64).sqrt()
}

impl FailureRates {
    /// Counts in class order (I, X, Z, Y).
    pub fn from_counts(counts: [u64; 4]) -> Self {
        let [n_i, n_x, n_z, n_y] = counts;
        let samples = counts.iter().sum::<u64>();
        let rate = |k: u64| if samples == 0 { 0.0 } else { k as f64 / samples as f64 };
        let (p_fx, p_fz, p_fy, p_f) = (rate(n_z + n_y), rate(n_x + n_y), rate(n_x + n_z), rate(n_x + n_z + n_y));
        Self {
            samples,
            n_i,
            n_x,
            n_z,
            n_y,
            p_x: rate(n_x),
            p_z: rate(n_z),
            p_y: rate(n_y),
            p_fx,
            p_fz,
            p_fy,
            p_f,
            se_fx: binomial_se(p_fx, samples),
            se_fz: binomial_se(p_fz, samples),
            se_fy: binomial_se(p_fy, samples),
            se_f: binomial_se(p_f, samples),
        }
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.n_i, self.n_x, self.n_z, self.n_y]
    }

    /// `(rate, standard error)` for a mode name: `P_fX`, `P_fZ`, `P_fY` or `P_f`.
    pub fn mode(&self, mode: FailureMode) -> (f64, f64) {
        match mode {
            FailureMode::X => (self.p_fx, self.se_fx),
            FailureMode::Z => (self.p_fz, self.se_fz),
            FailureMode::Y => (self.p_fy, self.se_fy),
            FailureMode::Total => (self.p_f, self.se_f),
        }
    }
}

/// Which failure rate a fit or plot targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureMode {
    #[serde(rename = "P_fX")]
    X,
    #[serde(rename = "P_fZ")]
    Z,
    #[serde(rename = "P_fY")]
    Y,
    #[serde(rename = "P_f")]
    Total,
}

impl FailureMode {
    pub const ALL: [FailureMode; 4] = [FailureMode::X, FailureMode::Z, FailureMode::Y, FailureMode::Total];

    pub fn as_str(self) -> &'static str {
        match self {
            FailureMode::X => "P_fX",
            FailureMode::Z => "P_fZ",
            FailureMode::Y => "P_fY",
            FailureMode::Total => "P_f",
        }
    }
}

impl std::fmt::Display for FailureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FailureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P_fX" | "fX" | "x" | "X" => Ok(FailureMode::X),
            "P_fZ" | "fZ" | "z" | "Z" => Ok(FailureMode::Z),
            "P_fY" | "fY" | "y" | "Y" => Ok(FailureMode::Y),
            "P_f" | "f" | "total" => Ok(FailureMode::Total),
            other => Err(Error::Parse(format!("unknown failure mode {other:?}"))),
        }
    }
}

/// Logical Pauli channel `(1 - P_f, P_X, P_Z, P_Y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogicalChannel {
    pub p_i: f64,
    pub p_x: f64,
    pub p_z: f64,
    pub p_y: f64,
}

pub fn to_logical_channel(f: &FailureRates) -> LogicalChannel {
    LogicalChannel {
        p_i: 1.0 - f.p_f,
        p_x: f.p_x,
        p_z: f.p_z,
        p_y: f.p_y,
    }
}

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Residual class of one sample: true class composed with the decoded class.
pub fn run_sample(code: &CodeSpec, noise: &NoiseParams, decoder: &Decoder, seed: u64, index: u64) -> Result<EquivClass> {
    let mut rng = sample_rng(seed, index);
    let chain = sample_chain(noise, code.n, &mut rng);
    let s = code.syndrome_unchecked(&chain);
    let decoded = decode_class(&decoder.coset_probabilities(code, noise, &s)?);
    Ok(code.class_unchecked(&chain).compose(decoded))
}

/// Monte Carlo failure rates at one point, parallel over samples on the current rayon pool.
pub fn run_point(code: &CodeSpec, noise: &NoiseParams, samples: u64, decoder: &Decoder, seed: u64) -> Result<FailureRates> {
    if !decoder.supports(code.family) {
        return Err(Error::UnsupportedFamily {
            op: "run_point",
            family: code.family,
        });
    }
    let counts = (0..samples)
        .into_par_iter()
        .map(|i| run_sample(code, noise, decoder, seed, i))
        .try_fold(
            || [0u64; 4],
            |mut acc, class| {
                acc[class?.index()] += 1;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| [0u64; 4], |a, b| Ok(std::array::from_fn(|k| a[k] + b[k])))?;
    Ok(FailureRates::from_counts(counts))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub family: CodeFamily,
    pub d: usize,
    pub eta: Bias,
    pub p: f64,
    /// `0` for the exact decoder.
    pub chi: usize,
    pub samples: u64,
    pub seed: u64,
    pub rates: FailureRates,
}

impl DataRow {
    fn record(&self) -> [String; 15] {
        let r = &self.rates;
        [
            self.family.name().to_string(),
            self.d.to_string(),
            self.eta.to_string(),
            self.p.to_string(),
            self.chi.to_string(),
            self.samples.to_string(),
            self.seed.to_string(),
            r.p_fx.to_string(),
            r.p_fz.to_string(),
            r.p_fy.to_string(),
            r.p_f.to_string(),
            r.se_fx.to_string(),
            r.se_fz.to_string(),
            r.se_fy.to_string(),
            r.se_f.to_string(),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse(format!("row has {} fields, expected 15", rec.len())));
        let num = |i: usize| -> Result<f64> {
            field(i)?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("column {}: {e}", CSV_HEADER[i])))
        };
        let int = |i: usize| -> Result<u64> {
            field(i)?
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("column {}: {e}", CSV_HEADER[i])))
        };
        let samples = int(5)?;
        let (p_fx, p_fz, p_fy, p_f) = (num(7)?, num(8)?, num(9)?, num(10)?);
        // Counts are recovered from the rates: n_X + n_Y = P_fZ s, etc.
        let count = |x: f64| (x * samples as f64).round() as i64;
        let (a, b, c, t) = (count(p_fx), count(p_fz), count(p_fy), count(p_f));
        let (n_x, n_z, n_y) = (t - a, t - b, t - c);
        if [n_x, n_z, n_y].iter().any(|&n| n < 0) || t > samples as i64 {
            return Err(Error::Parse(format!("inconsistent rates on row {rec:?}")));
        }
        let n_i = samples as i64 - t;
        Ok(Self {
            family: field(0)?.parse()?,
            d: int(1)? as usize,
            eta: field(2)?.parse()?,
            p: num(3)?,
            chi: int(4)? as usize,
            samples,
            seed: int(6)?,
            rates: FailureRates::from_counts([n_i as u64, n_x as u64, n_z as u64, n_y as u64]),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<DataRow>,
}

impl Dataset {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for row in &self.rows {
            out.write_record(row.record())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        let rows = rdr
            .records()
            .map(|rec| DataRow::from_record(&rec?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(File::open(path)?)
    }

    pub fn distances(&self) -> Vec<usize> {
        let mut ds: Vec<usize> = self.rows.iter().map(|r| r.d).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }
}

/// Runs every `(d, p)` point in grid order; with `out`, each row is appended and
/// flushed as soon as it completes, so a failure leaves the finished prefix on disk.
pub fn sweep(config: &RunConfig, out: Option<&Path>) -> Result<Dataset> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::OutOfRange(format!("cannot start {} workers: {e}", config.workers)))?;
    let mut writer = match out {
        Some(path) => {
            let mut w = csv::Writer::from_writer(File::create(path)?);
            w.write_record(CSV_HEADER)?;
            w.flush()?;
            Some(w)
        }
        None => None,
    };
    let mut data = Dataset::default();
    for &d in &config.d_list {
        let code = build_code(config.family, d)?;
        for &p in &config.p_list {
            let noise = biased_rates(p, config.eta)?;
            let rates = pool.install(|| run_point(&code, &noise, config.samples, &config.decoder, config.master_seed))?;
            let row = DataRow {
                family: config.family,
                d,
                eta: config.eta,
                p,
                chi: config.decoder.chi(),
                samples: config.samples,
                seed: config.master_seed,
                rates,
            };
            if let Some(w) = writer.as_mut() {
                w.write_record(row.record())?;
                w.flush()?;
            }
            data.rows.push(row);
        }
    }
    Ok(data)
}
