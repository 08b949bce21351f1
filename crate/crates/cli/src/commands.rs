use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use biasqec::experiment::p_grid;
use biasqec::fit::{binned_thresholds, FitOptions};
use biasqec::noise::special_point;
use biasqec::{
    build_code, decode_class, hashing_bound, special_point_failure_rates, sweep, validate_code, Bias, CodeFamily,
    Dataset, Decoder, DecoderConfig, EquivClass, RunConfig, Syndrome,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::manifest::Manifest;
use crate::{CliError, CliResult, CodeArgs, DecodeArgs, DecoderKind, ExactArgs, FitArgs, HashingArgs, SimulateArgs};

pub fn validate(a: &CodeArgs) -> CliResult<()> {
    let code = build_code(a.family, a.d)?;
    let report = validate_code(&code);
    print!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::new("invalid-code", format!("{} d={} failed validation", a.family, a.d)))
    }
}

pub fn exact(a: &ExactArgs) -> CliResult<()> {
    build_code(a.code.family, a.code.d)?;
    let rates = special_point_failure_rates(a.code.family, a.code.d, a.eta)?;
    #[derive(Serialize)]
    struct Out {
        family: CodeFamily,
        d: usize,
        eta: Bias,
        p_s: f64,
        #[serde(flatten)]
        rates: biasqec::statmech::SpecialPointRates,
    }
    let out = Out {
        family: a.code.family,
        d: a.code.d,
        eta: a.eta,
        p_s: special_point(a.eta)?,
        rates,
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(())
}

pub fn hashing(a: &HashingArgs) -> CliResult<()> {
    println!("{}", hashing_bound(a.eta)?);
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SyndromeInput {
    Text(String),
    Bits(Vec<u8>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecodeInput {
    family: CodeFamily,
    d: usize,
    eta: Bias,
    p: f64,
    syndrome: SyndromeInput,
    #[serde(default)]
    decoder: Option<Decoder>,
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
    }
}

pub fn decode(a: &DecodeArgs) -> CliResult<()> {
    let input: DecodeInput = serde_json::from_str(&read_input(&a.input)?)?;
    let code = build_code(input.family, input.d)?;
    let noise = biasqec::biased_rates(input.p, input.eta)?;
    let syndrome = match input.syndrome {
        SyndromeInput::Text(s) => s.parse::<Syndrome>()?,
        SyndromeInput::Bits(bits) => {
            if let Some(b) = bits.iter().find(|&&b| b > 1) {
                return Err(CliError::new("parse", format!("syndrome bit {b} is not 0 or 1")));
            }
            Syndrome::new(bits.iter().map(|&b| b == 1).collect())
        }
    };
    let decoder = match (a.chi, input.decoder) {
        (Some(chi), _) => Decoder::Mps(DecoderConfig {
            svd_cutoff: a.cutoff.unwrap_or(DecoderConfig::DEFAULT_CUTOFF),
            ..DecoderConfig::with_chi(chi)
        }),
        (None, Some(dec)) => dec,
        (None, None) if input.family.is_surface() => Decoder::Mps(DecoderConfig::for_bias(input.eta)),
        (None, None) => Decoder::Exact,
    };
    let probs = decoder.coset_probabilities(&code, &noise, &syndrome)?;
    let by_class = |v: &[f64; 4]| -> serde_json::Map<String, serde_json::Value> {
        EquivClass::ALL.iter().map(|k| (k.as_str().to_string(), json!(v[k.index()]))).collect()
    };
    let out = json!({
        "family": input.family,
        "d": input.d,
        "eta": input.eta,
        "p": input.p,
        "decoder": decoder,
        "probabilities": by_class(&probs.normalized),
        "log_weights": by_class(&probs.log_p),
        "class": decode_class(&probs).as_str(),
    });
    println!("{out}");
    Ok(())
}

fn run_config(a: &SimulateArgs) -> CliResult<RunConfig> {
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Some(path) = &a.manifest {
        let m: Manifest<RunConfig> = serde_json::from_str(&read_input(path)?)?;
        if m.command != "simulate" {
            return Err(CliError::new("usage", format!("manifest is for `{}`, not `simulate`", m.command)));
        }
        return Ok(RunConfig {
            workers: a.workers.unwrap_or(m.config.workers),
            ..m.config
        });
    }
    let (family, eta) = match (a.family, a.eta) {
        (Some(f), Some(e)) => (f, e),
        _ => return Err(CliError::new("usage", "--family and --eta are required")),
    };
    let p_list = match (a.p_min, a.p_max) {
        (Some(lo), Some(hi)) => p_grid(lo, hi, a.dp)?,
        _ if !a.p.is_empty() => a.p.clone(),
        _ => return Err(CliError::new("usage", "give --p or --p-min with --p-max")),
    };
    let decoder = match a.decoder {
        DecoderKind::Exact => {
            if a.chi.is_some() || a.cutoff.is_some() {
                return Err(CliError::new("usage", "--chi and --cutoff apply to the mps decoder only"));
            }
            Decoder::Exact
        }
        DecoderKind::Mps => {
            let base = DecoderConfig::for_bias(eta);
            Decoder::Mps(DecoderConfig {
                chi: a.chi.unwrap_or(base.chi),
                svd_cutoff: a.cutoff.unwrap_or(base.svd_cutoff),
                ..base
            })
        }
    };
    Ok(RunConfig {
        family,
        d_list: a.d.clone(),
        eta,
        p_list,
        samples: a.samples,
        decoder,
        master_seed: a.seed,
        workers,
    })
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let config = run_config(a)?;
    config.validate()?;
    Manifest::new("simulate", &config).write_next_to(&a.out)?;
    let data = sweep(&config, Some(&a.out))?;
    eprintln!("{} rows written to {}", data.rows.len(), a.out.display());
    Ok(())
}

fn parse_bin(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::new("usage", format!("bad bin {s:?}: {e}")))
}

/// Consecutive distance triples present in the data.
fn default_bins(distances: &[usize]) -> Vec<Vec<usize>> {
    distances.windows(3).map(|w| w.to_vec()).collect()
}

pub fn fit(a: &FitArgs) -> CliResult<()> {
    let data = Dataset::load(&a.input).map_err(|e| CliError::new("io", format!("{}: {e}", a.input.display())))?;
    let bins = if a.bins.is_empty() {
        default_bins(&data.distances())
    } else {
        a.bins.iter().map(|b| parse_bin(b)).collect::<CliResult<_>>()?
    };
    if bins.is_empty() {
        return Err(CliError::new("fit", "need at least three distances or an explicit --bins"));
    }
    let p_range = match (a.p_min, a.p_max) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(0.0), hi.unwrap_or(1.0))),
    };
    if let Some(out) = &a.out {
        Manifest::new("fit", a).write_next_to(out)?;
    }
    let opts = FitOptions {
        p_range,
        bootstrap: a.bootstrap,
        seed: a.seed,
    };
    let fits = binned_thresholds(&data, &bins, &a.modes, &opts);
    let mut csv = String::from("bin_center_d,mode,p_c,sigma_pc,nu,chi2_per_dof\n");
    let mut ok = 0;
    for f in &fits {
        match &f.result {
            Ok(r) => {
                ok += 1;
                let sigma = r.bootstrap_sigma_pc.unwrap_or(r.sigma_pc);
                csv += &format!("{},{},{},{},{},{}\n", f.center(), f.mode, r.p_c, sigma, r.nu, r.chi2_per_dof);
            }
            Err(e) => eprintln!("{}", json!({ "warning": "fit", "bin": f.bin, "mode": f.mode, "message": e.to_string() })),
        }
    }
    match &a.out {
        Some(path) => fs::write(path, csv)?,
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    if ok == 0 {
        return Err(CliError::new("fit", "every fit failed"));
    }
    Ok(())
}
