//! The four subcommands behind the `tomo` binary: forward data, shape
//! reconstruction, resolution sweeps, and an install self-check.

use std::fmt;
use std::fs;
use std::path::Path;

use disktomo::cellfield::{electro_mode_coefficients, w_spectrum, ElectroState, PerturbedCellFields};
use disktomo::forward::{
    excitation_fluence_disk, intensity_coeff_linearized, intensity_coeff_unperturbed,
};
use disktomo::inversion::{add_noise, assemble_data, least_squares, Context};
use disktomo::model::{wavenumber, MeasurementMatrix, MembraneModel, ModeSpectrum, OpticalParams};
use disktomo::oracles::radial::{helmholtz_robin_solve, transmission_solve};
use disktomo::resolution::{
    curve_probe_mode, max_mode_number, min_radius, resolving_integral, resolving_mode_sum,
};

use crate::config::{self, RunConfig};
use crate::csvio::{fmt_f64, matrix_from_csv, matrix_to_csv};

/// Failure modes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or malformed input data (exit 2).
    Config(String),
    /// Filesystem failure (exit 3).
    Io(String),
    /// A requested shape mode cannot be estimated at all (exit 4).
    Unresolvable(String),
    /// An internal cross-check or sweep computation failed (exit 1).
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Unresolvable(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Unresolvable(m) => write!(f, "unresolvable: {m}"),
            CliError::Check(m) => write!(f, "check: {m}"),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = read_file(path)?;
    config::parse(&text).map_err(CliError::Config)
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))
}

fn context_of(cfg: &RunConfig) -> Context {
    Context::new(cfg.params, cfg.membrane, cfg.radius, cfg.omega)
}

/// Unperturbed intensity matrix over `|m|, |n| <= n_max` for the configured
/// drive; shared by the forward model and the reconstruction preprocessing.
fn unperturbed_matrix(cfg: &RunConfig, state: &ElectroState, n_max: i32) -> MeasurementMatrix {
    let mut out = MeasurementMatrix::zeros(n_max);
    for m in -n_max..=n_max {
        for n in -n_max..=n_max {
            let v = intensity_coeff_unperturbed(n, m, &state.c_hat, cfg.radius, &cfg.params, cfg.omega);
            out.set(m, n, v);
        }
    }
    out
}

/// Writes `intensity_unperturbed.csv` and `intensity_linearized.csv`, the
/// noiseless measurement matrices of the configured cell with and without the
/// shape perturbation.
pub fn cmd_forward(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    let state = ElectroState::single_mode(cfg.z, cfg.radius, &cfg.membrane, cfg.params.delta_resp);
    let fields = PerturbedCellFields::compute(&state, &cfg.h_hat);
    let geometry = cfg.geometry();
    let base = unperturbed_matrix(&cfg, &state, cfg.n_max);
    let mut lin = MeasurementMatrix::zeros(cfg.n_max);
    for m in -cfg.n_max..=cfg.n_max {
        for n in -cfg.n_max..=cfg.n_max {
            let v = intensity_coeff_linearized(n, m, &geometry, &fields, &cfg.params, cfg.omega);
            lin.set(m, n, v);
        }
    }
    ensure_out_dir(out_dir)?;
    write_file(&out_dir.join("intensity_unperturbed.csv"), &matrix_to_csv(&base))?;
    write_file(&out_dir.join("intensity_linearized.csv"), &matrix_to_csv(&lin))
}

/// Estimates the shape spectrum from a forward-format data file and writes
/// `h_est.csv` with per-mode predicted variances.
///
/// Measurement noise (if configured) is added to the processed data, which is
/// where the estimator's variance model is stated; the exterior voltage trace
/// entering the preprocessing is treated as exactly known, computed from the
/// configured shape.
pub fn cmd_reconstruct(config_path: &Path, data_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    if cfg.eps <= 0.0 {
        return Err(CliError::Config(
            "key eps: must be positive to invert perturbation data".to_string(),
        ));
    }
    let data = matrix_from_csv(&read_file(data_path)?).map_err(CliError::Config)?;
    let ctx = context_of(&cfg);
    let state = ElectroState::single_mode(cfg.z, cfg.radius, &cfg.membrane, cfg.params.delta_resp);
    let base = unperturbed_matrix(&cfg, &state, data.n_max());
    let w_hat = w_spectrum(&state, &cfg.h_hat);
    let mut assembled = assemble_data(&data, &base, &w_hat, cfg.eps, &ctx);
    add_noise(&mut assembled, cfg.sigma_noise, cfg.seed);
    let rec = least_squares(&assembled, cfg.z, cfg.eps, cfg.band, &ctx);
    if !rec.unresolvable.is_empty() {
        return Err(CliError::Unresolvable(format!(
            "shape modes {:?} fall below the resolvability floor; reduce M or raise the signal scale",
            rec.unresolvable
        )));
    }
    let mut s = String::from("p,re,im,predicted_var\n");
    for p in -cfg.band..=cfg.band {
        let v = rec.h_hat.get(p);
        let var = rec.predicted_var(p, cfg.sigma_noise, cfg.eps);
        s.push_str(&format!("{p},{},{},{}\n", fmt_f64(v.re), fmt_f64(v.im), fmt_f64(var)));
    }
    ensure_out_dir(out_dir)?;
    write_file(&out_dir.join("h_est.csv"), &s)
}

/// The closed-form radius sweep assumes the small-|k|R regime; warn (do not
/// fail) when the configured geometry sits outside it.
fn warn_if_outside_small_kr(ctx: &Context) {
    let kr = ctx.k().norm() * ctx.radius;
    if kr > 0.1 {
        eprintln!("warning: |k| R = {kr:.3e} exceeds the small-|k|R regime; sweep values may be inaccurate");
    }
}

/// Sweeps the minimal resolving radius over a fixed logarithmic SNR grid for
/// shape modes 0 through 3 and writes `rstar.csv` with radii in micrometers.
/// Grid points where a mode has no resolving radius inside the unit disk
/// produce empty cells.
pub fn cmd_resolve_min_radius(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    let ctx = context_of(&cfg);
    warn_if_outside_small_kr(&ctx);
    let snrs: Vec<f64> = (0..50)
        .map(|i| 10f64.powf(1.0 + 5.0 * i as f64 / 49.0))
        .collect();
    let rows = parallel_map(&snrs, |&snr| {
        (0..=3)
            .map(|p| min_radius(snr, p, curve_probe_mode(p), &ctx).ok())
            .collect::<Vec<Option<f64>>>()
    })?;
    let mut s = String::from("snr,rstar_p0,rstar_p1,rstar_p2,rstar_p3\n");
    for (snr, cells) in snrs.iter().zip(rows) {
        s.push_str(&fmt_f64(*snr));
        for cell in cells {
            s.push(',');
            if let Some(r) = cell {
                s.push_str(&fmt_f64(r * 1e3));
            }
        }
        s.push('\n');
    }
    ensure_out_dir(out_dir)?;
    write_file(&out_dir.join("rstar.csv"), &s)
}

/// Sweeps the maximal resolvable mode count over cell radius for each
/// configured SNR and writes `maxmode.csv` with the radius column in
/// micrometers.
pub fn cmd_resolve_mode_count(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    if cfg.snr_list.is_empty() {
        return Err(CliError::Config(
            "missing required key: snr_list (needed for the mode-count sweep)".to_string(),
        ));
    }
    let ctx = context_of(&cfg);
    warn_if_outside_small_kr(&ctx);
    let radii: Vec<f64> = (0..50).map(|i| 0.01 + 0.09 * i as f64 / 49.0).collect();
    let rows = parallel_map(&radii, |&r| {
        cfg.snr_list
            .iter()
            .map(|(_, snr)| max_mode_number(r, *snr, &ctx))
            .collect::<Result<Vec<i32>, _>>()
    })?;
    let mut s = String::from("R_um");
    for (tok, _) in &cfg.snr_list {
        s.push_str(&format!(",pmax_snr_{tok}"));
    }
    s.push('\n');
    for (r, row) in radii.iter().zip(rows) {
        let row = row.map_err(|e| CliError::Check(format!("max-mode sweep at R = {r}: {e}")))?;
        s.push_str(&fmt_f64(r * 1e3));
        for pmax in row {
            s.push_str(&format!(",{pmax}"));
        }
        s.push('\n');
    }
    ensure_out_dir(out_dir)?;
    write_file(&out_dir.join("maxmode.csv"), &s)
}

/// Runs the built-in cross-checks at the reference parameters and prints one
/// line per check: the quadrature/mode-sum identity tying the resolution
/// integral to the measurement-operator entries, plus spot checks of the
/// analytic solvers against their finite-difference references.
pub fn cmd_selftest() -> Result<(), CliError> {
    let mut failures = 0usize;
    let mut check = |name: &str, defect: f64, tol: f64| {
        let ok = defect.is_finite() && defect <= tol;
        if !ok {
            failures += 1;
        }
        let verdict = if ok { "ok  " } else { "FAIL" };
        println!("{verdict} {name}: defect {defect:.2e} (tolerance {tol:.0e})");
    };

    let params = OpticalParams::default();
    let membrane = MembraneModel { beta: 0.1 };
    let ctx = Context::new(params, membrane, 0.05, 1e9);
    for p in -4..=4 {
        let defect = match resolving_integral(p, 1, &ctx) {
            Ok(quad) => {
                let series = resolving_mode_sum(p, 1, 200, &ctx);
                (quad - series).abs() / series
            }
            Err(_) => f64::INFINITY,
        };
        check(&format!("quadrature/mode-sum identity, shape mode {p}"), defect, 1e-6);
    }

    let k = wavenumber(&params, 1e9).k;
    let g = ModeSpectrum::spike(3);
    let defect = match helmholtz_robin_solve(&g, k, params.ell, 512, 0.5) {
        Ok(fd) => {
            let exact = excitation_fluence_disk(&g, 0.5, k, params.ell).coeffs.get(3);
            (fd.get(3) - exact).norm() / exact.norm()
        }
        Err(_) => f64::INFINITY,
    };
    check("fluence solver vs finite differences (mode 3, r = 0.5)", defect, 1e-3);

    let co = electro_mode_coefficients(2, 0.05, membrane.beta);
    let defect = match transmission_solve(2, 0.05, membrane.beta, 768) {
        Ok(fd) => {
            let d_f0 = (fd.f0 - co.f0).abs() / co.f0.abs();
            let d_psi = (fd.psi - co.psi).abs() / co.psi.abs();
            d_f0.max(d_psi)
        }
        Err(_) => f64::INFINITY,
    };
    check("membrane solver vs finite differences (mode 2)", defect, 1e-3);

    if failures == 0 {
        println!("selftest: PASS");
        Ok(())
    } else {
        println!("selftest: FAIL");
        Err(CliError::Check(format!("{failures} self-checks failed")))
    }
}

/// Runs `f` over `items` on up to `TOMO_THREADS` worker threads (default: the
/// machine's available parallelism), preserving input order.
fn parallel_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>, CliError>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let budget = thread_budget(items.len())?;
    if budget <= 1 || items.len() <= 1 {
        return Ok(items.iter().map(|t| f(t)).collect());
    }
    let chunk = items.len().div_ceil(budget);
    let mut out = Vec::with_capacity(items.len());
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Vec<U>>()))
            .collect();
        for h in handles {
            out.extend(h.join().expect("sweep worker panicked"));
        }
    });
    Ok(out)
}

fn thread_budget(n_items: usize) -> Result<usize, CliError> {
    let cap = match std::env::var("TOMO_THREADS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&t| t >= 1).ok_or_else(|| {
            CliError::Config(format!("TOMO_THREADS must be a positive integer, got `{v}`"))
        })?,
        Err(_) => std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1),
    };
    Ok(cap.min(n_items.max(1)))
}
