//! Flat `key = value` run configuration shared by every subcommand.
//!
//! The format is deliberately primitive so a config can be generated or
//! checked from any language: one pair per line, `#` starts a comment,
//! complex shape modes are entered as `h.<p> = <re>,<im>`. Every physical
//! parameter must be spelled out, and unknown keys are rejected so a typo
//! cannot silently turn into a default value.

use std::collections::BTreeMap;

use disktomo::model::{CellGeometry, MembraneModel, ModeSpectrum, OpticalParams};
use num_complex::Complex64;

/// Fully parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: OpticalParams,
    pub membrane: MembraneModel,
    /// Unperturbed cell radius (mm), inside the unit-disk tissue domain.
    pub radius: f64,
    /// Angular mode of the boundary current drive.
    pub z: i32,
    /// Reconstruction band limit: modes `|p| <= band` are estimated.
    pub band: i32,
    /// Shape-perturbation amplitude (mm); the membrane sits at `R + eps h`.
    pub eps: f64,
    /// Standard deviation of the complex noise added to processed data.
    pub sigma_noise: f64,
    pub seed: u64,
    /// Modulation angular frequency (rad/s).
    pub omega: f64,
    /// Measurement matrices cover source/detector modes `|m|, |n| <= n_max`.
    pub n_max: i32,
    /// Spectrum of the shape profile `h`.
    pub h_hat: ModeSpectrum,
    /// SNR values for the max-mode sweep, kept with their literal spelling
    /// so CSV column headers echo the config.
    pub snr_list: Vec<(String, f64)>,
}

impl RunConfig {
    pub fn geometry(&self) -> CellGeometry {
        CellGeometry {
            radius: self.radius,
            eps: self.eps,
            h_hat: self.h_hat.clone(),
        }
    }
}

/// Parses and validates a configuration. The error message always names the
/// offending key or line.
pub fn parse(text: &str) -> Result<RunConfig, String> {
    let mut pairs: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected `key = value`, got `{line}`", idx + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(format!("line {}: empty key", idx + 1));
        }
        if pairs.insert(key.to_string(), value.to_string()).is_some() {
            return Err(format!("duplicate key: {key}"));
        }
    }

    let params = OpticalParams {
        mu: req_float(&mut pairs, "mu")?,
        mu_s_prime: req_float(&mut pairs, "mu_s_prime")?,
        eta: req_float(&mut pairs, "eta")?,
        tau: req_float(&mut pairs, "tau")?,
        eps_ext: req_float(&mut pairs, "eps_ext")?,
        delta_resp: req_float(&mut pairs, "delta_resp")?,
        ell: req_float(&mut pairs, "ell")?,
        c_light: req_float(&mut pairs, "c_light")?,
        dim: match pairs.remove("dim") {
            Some(v) => v.parse::<u32>().map_err(|_| format!("key dim: `{v}` is not an integer"))?,
            None => 2,
        },
    };
    let beta = req_float(&mut pairs, "beta")?;
    let radius = req_float(&mut pairs, "R")?;
    let eps = req_float(&mut pairs, "eps")?;
    let sigma_noise = req_float(&mut pairs, "sigma_noise")?;
    let omega = req_float(&mut pairs, "omega")?;
    let z = int_key(&take_req(&mut pairs, "z")?, "z")?;
    let n_max = int_key(&take_req(&mut pairs, "n_max")?, "n_max")?;
    let band = match pairs.remove("M") {
        Some(v) => int_key(&v, "M")?,
        None => 10,
    };
    let seed = {
        let v = take_req(&mut pairs, "seed")?;
        v.parse::<u64>().map_err(|_| format!("key seed: `{v}` is not an unsigned integer"))?
    };

    let mut h_pairs: Vec<(i32, Complex64)> = Vec::new();
    let mut snr_list = Vec::new();
    for (key, value) in std::mem::take(&mut pairs) {
        if let Some(mode) = key.strip_prefix("h.") {
            let p: i32 = mode
                .parse()
                .map_err(|_| format!("key {key}: mode index `{mode}` is not an integer"))?;
            let Some((re, im)) = value.split_once(',') else {
                return Err(format!("key {key}: expected `<re>,<im>`, got `{value}`"));
            };
            let re = float(&key, re.trim())?;
            let im = float(&key, im.trim())?;
            h_pairs.push((p, Complex64::new(re, im)));
        } else if key == "snr_list" {
            for tok in value.split(',') {
                let tok = tok.trim();
                let snr = float("snr_list", tok)?;
                if !(snr > 0.0 && snr.is_finite()) {
                    return Err(format!("key snr_list: SNR must be positive, got `{tok}`"));
                }
                snr_list.push((tok.to_string(), snr));
            }
        } else {
            return Err(format!("unknown key: {key}"));
        }
    }
    let h_hat = ModeSpectrum::from_pairs(&h_pairs);

    params.validate()?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(format!("key beta: must be positive and finite, got {beta}"));
    }
    if z == 0 {
        return Err("key z: the drive mode must be nonzero".to_string());
    }
    if n_max < 0 {
        return Err(format!("key n_max: must be nonnegative, got {n_max}"));
    }
    if band < 0 {
        return Err(format!("key M: must be nonnegative, got {band}"));
    }
    if !(sigma_noise >= 0.0 && sigma_noise.is_finite()) {
        return Err(format!("key sigma_noise: must be nonnegative, got {sigma_noise}"));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(format!("key omega: must be positive, got {omega}"));
    }
    let cfg = RunConfig {
        params,
        membrane: MembraneModel { beta },
        radius,
        z,
        band,
        eps,
        sigma_noise,
        seed,
        omega,
        n_max,
        h_hat,
        snr_list,
    };
    cfg.geometry().validate()?;
    Ok(cfg)
}

fn take_req(pairs: &mut BTreeMap<String, String>, k: &str) -> Result<String, String> {
    pairs.remove(k).ok_or_else(|| format!("missing required key: {k}"))
}

fn req_float(pairs: &mut BTreeMap<String, String>, k: &str) -> Result<f64, String> {
    float(k, &take_req(pairs, k)?)
}

fn float(k: &str, v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("key {k}: `{v}` is not a number"))
}

fn int_key(v: &str, k: &str) -> Result<i32, String> {
    v.parse::<i32>().map_err(|_| format!("key {k}: `{v}` is not an integer"))
}
