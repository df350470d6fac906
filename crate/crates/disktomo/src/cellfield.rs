//! Electrostatics of the cell membrane: the unperturbed transmembrane
//! potential under sinusoidal boundary current, and its first-order response
//! to a perturbation of the cell shape.
//!
//! The cell occupies the disk of radius `R` inside the unit disk; its membrane
//! is a resistive interface of contrast `beta`, so the potential satisfies
//! Laplace's equation on both sides of the circle `r = R` with continuous flux
//! and a potential jump proportional to the flux. For boundary current
//! `e^{-i z theta}` everything separates; the resulting coefficients are
//! rational in `R^|z|` and are produced by [`ElectroState::single_mode`].
//!
//! The membrane potential is the interior-minus-exterior trace difference, so
//! the unperturbed spectrum `psi_hat` is negative real for positive `beta`.
//! The fluorophore concentration responds linearly with sensitivity
//! `delta_resp`, giving `c_hat = -delta_resp * psi_hat`.
//!
//! A radial shape perturbation `R -> R(1 + eps h(theta))` perturbs the
//! transmission conditions. To first order the correction `w` solves Laplace's
//! equation with jump data supported on the unperturbed circle; the data are
//! bilinear in `h` and the unperturbed field, so they are spectral
//! convolutions. Each mode of `w` then solves a 3x3 linear system (interior
//! growth, exterior growth and decay) which this module solves in closed form,
//! arranged so that only nonnegative powers of `R` appear and radii near zero
//! stay well conditioned.

use num_complex::Complex64;

use crate::model::{MembraneModel, ModeSpectrum};

/// Per-mode coefficients of the unperturbed transmission problem, normalized
/// to unit Neumann data on the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    /// Dirichlet trace of the potential on the unit circle.
    pub f0: f64,
    /// Trace at `r = R` of the part of the exterior field that is harmonic
    /// across the whole disk (the `r^|z|` component).
    pub harmonic: f64,
    /// Membrane potential: interior trace minus exterior trace at `r = R`.
    pub psi: f64,
    /// Interior trace at `r = R`.
    pub u_minus: f64,
}

/// Solves the mode-`z` transmission problem with unit Neumann data. Panics for
/// `z = 0`: constant current has no harmonic extension with zero mean.
pub fn electro_mode_coefficients(z: i32, radius: f64, beta: f64) -> ModeCoefficients {
    assert!(z != 0, "mode 0 carries no net current");
    assert!((0.0..1.0).contains(&radius) && radius > 0.0);
    assert!(beta >= 0.0);
    let zeta = z.unsigned_abs() as f64;
    let r_pow = radius.powi(2 * z.abs() - 1);
    let half = 0.5 * beta * zeta;
    let alpha = 1.0 / (zeta * (1.0 + half / radius - half * r_pow));
    let r_zeta = radius.powi(z.abs());
    ModeCoefficients {
        f0: alpha * (1.0 + half / radius) + half * alpha * r_pow,
        harmonic: alpha * r_zeta * (1.0 + half / radius),
        psi: -beta * zeta * alpha * r_zeta / radius,
        u_minus: alpha * r_zeta,
    }
}

/// Unperturbed membrane state for a single angular mode of boundary current,
/// held as spectra so the perturbation ops below can work band-wise.
#[derive(Debug, Clone)]
pub struct ElectroState {
    pub z_mode: i32,
    pub radius: f64,
    pub beta: f64,
    pub delta_resp: f64,
    pub f0_hat: ModeSpectrum,
    pub harmonic_hat: ModeSpectrum,
    pub psi_hat: ModeSpectrum,
    pub u_minus_hat: ModeSpectrum,
    pub c_hat: ModeSpectrum,
}

impl ElectroState {
    pub fn single_mode(z: i32, radius: f64, membrane: &MembraneModel, delta_resp: f64) -> Self {
        let co = electro_mode_coefficients(z, radius, membrane.beta);
        let spike = |v: f64| {
            let mut s = ModeSpectrum::zeros(z.abs());
            s.set(z, Complex64::new(v, 0.0));
            s
        };
        ElectroState {
            z_mode: z,
            radius,
            beta: membrane.beta,
            delta_resp,
            f0_hat: spike(co.f0),
            harmonic_hat: spike(co.harmonic),
            psi_hat: spike(co.psi),
            u_minus_hat: spike(co.u_minus),
            c_hat: spike(-delta_resp * co.psi),
        }
    }
}

/// First-order transmission data induced by the shape perturbation `h`:
/// the flux jump and potential jump that the correction field must absorb on
/// the unperturbed circle. Both are convolutions of `h_hat` with the
/// unperturbed spectra carrying tangential-derivative mode weights.
pub fn jump_data_spectra(
    state: &ElectroState,
    h_hat: &ModeSpectrum,
) -> (ModeSpectrum, ModeSpectrum) {
    let r = state.radius;
    let band = h_hat.band_limit() + state.psi_hat.band_limit();
    let mut flux = ModeSpectrum::zeros(band);
    let mut pot = ModeSpectrum::zeros(band);
    for n in -band..=band {
        let mut fn_acc = Complex64::new(0.0, 0.0);
        let mut fd_acc = Complex64::new(0.0, 0.0);
        for p in h_hat.modes() {
            let hp = h_hat.get(p);
            if hp.norm_sqr() == 0.0 {
                continue;
            }
            let s = n - p;
            let psi = state.psi_hat.get(s);
            let um = state.u_minus_hat.get(s);
            fn_acc += hp * (n as f64) * (s as f64) / (r * r) * psi;
            fd_acc += hp * (psi / r + state.beta * (n as f64) * (s as f64) / (r * r) * um);
        }
        flux.set(n, fn_acc);
        pot.set(n, fd_acc);
    }
    (flux, pot)
}

/// Per-mode pieces of the 3x3 transmission solve for the correction field,
/// shared by [`w_spectrum`] and the measurement-weight kernel.
pub(crate) fn mode_solve_parts(eta: f64, r: f64, beta: f64) -> f64 {
    2.0 + beta * eta / r * (1.0 - r.powf(2.0 * eta))
}

/// Trace on the unit circle of the first-order exterior correction field.
///
/// Mode 0 is identically zero: the correction preserves total current, and the
/// mean of the trace is fixed by the gauge of the unperturbed problem.
pub fn w_spectrum(state: &ElectroState, h_hat: &ModeSpectrum) -> ModeSpectrum {
    let (flux, pot) = jump_data_spectra(state, h_hat);
    let r = state.radius;
    let beta = state.beta;
    let mut w = ModeSpectrum::zeros(flux.band_limit());
    for n in flux.modes() {
        if n == 0 {
            continue;
        }
        let eta = n.unsigned_abs() as f64;
        let s = mode_solve_parts(eta, r, beta);
        let t = pot.get(n) - (1.0 + beta * eta / r) * (r / eta) * flux.get(n);
        w.set(n, 2.0 * r.powf(eta) * t / s);
    }
    w
}

/// First-order correction to the membrane potential spectrum. Equal to the
/// negated exterior-minus-interior trace jump of the correction field, which
/// the 3x3 solve expresses through the outer trace `w_hat` and the jump data.
pub fn psi1_spectrum(
    state: &ElectroState,
    h_hat: &ModeSpectrum,
    w_hat: &ModeSpectrum,
) -> ModeSpectrum {
    let (flux, pot) = jump_data_spectra(state, h_hat);
    let r = state.radius;
    let beta = state.beta;
    let band = flux.band_limit().max(w_hat.band_limit());
    let mut psi1 = ModeSpectrum::zeros(band);
    for n in -band..=band {
        let mut val = beta * flux.get(n) - pot.get(n);
        let wn = w_hat.get(n);
        if n != 0 && wn.norm_sqr() > 0.0 {
            let eta = n.unsigned_abs() as f64;
            // b * (R^{eta-1} - R^{-eta-1}) with the decaying power taken in
            // log space so large modes at small radii cannot overflow
            let b = 0.5 * wn;
            let grow = b * r.powf(eta - 1.0);
            let (mag, arg) = b.to_polar();
            let ln_decay = mag.ln() - (eta + 1.0) * r.ln();
            assert!(ln_decay < 700.0, "correction trace inconsistent with radius at mode {n}");
            let decay = Complex64::from_polar(ln_decay.exp(), arg);
            val -= beta * eta * (grow - decay);
        }
        psi1.set(n, val);
    }
    psi1
}

/// Everything the linearized intensity map needs about a perturbed cell.
#[derive(Debug, Clone)]
pub struct PerturbedCellFields {
    pub state: ElectroState,
    pub w_hat: ModeSpectrum,
    pub psi1_hat: ModeSpectrum,
}

impl PerturbedCellFields {
    pub fn compute(state: &ElectroState, h_hat: &ModeSpectrum) -> Self {
        let w_hat = w_spectrum(state, h_hat);
        let psi1_hat = psi1_spectrum(state, h_hat, &w_hat);
        PerturbedCellFields {
            state: state.clone(),
            w_hat,
            psi1_hat,
        }
    }
}
