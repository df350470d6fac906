//! Light propagation on the unit disk: modal Green coefficients, excitation
//! fluence, and the emitted-intensity coefficients that constitute the
//! measurements. Also the radial Green coefficient of the unit sphere, the one
//! piece of the 3D theory this crate carries.
//!
//! Everything rides on the modal diagonalization of the diffusion operator
//! `(-Delta + k^2)` with the Robin condition `ell * dPhi/dnu + Phi = g` on the
//! unit circle: mode `m` of the boundary data maps to `J_m(ik r)/E_m` inside,
//! with `E_m` the modal source gain. The angular convention is `e^{-i m theta}`
//! for a mode-`m` source, chosen so that a source `f_n = E_n e^{-i n phi}`
//! produces exactly `J_n(ik r) e^{-i n theta}`.

use num_complex::Complex64;

use crate::cellfield::PerturbedCellFields;
use crate::model::{gamma_tilde, source_gain, CellGeometry, ModeSpectrum, OpticalParams};
use crate::specfun::{bessel_j, bessel_j_derivative, sph_bessel_j};

/// Fluence on a concentric circle: the radius it was evaluated at and the
/// angular spectrum there.
#[derive(Debug, Clone)]
pub struct FluenceSpectrum {
    pub radius: f64,
    pub coeffs: ModeSpectrum,
}

/// Modal coefficient of the boundary-to-interior solution map at radius
/// `r_eval`: `J_m(ik r_eval) / (ik J'_m(ik) + (1/ell) J_m(ik))`.
///
/// Even in `m` by the Bessel reflection identities.
pub fn green_coeff_disk(m: i32, r_eval: f64, k: Complex64, ell: f64) -> Complex64 {
    assert!((0.0..1.0).contains(&r_eval), "evaluation radius outside the open disk");
    assert!(ell > 0.0, "Robin extrapolation length must be positive");
    let ik = Complex64::I * k;
    let denom = ik * bessel_j_derivative(m, ik) + bessel_j(m, ik) / ell;
    assert!(
        denom.norm() > 1e-300,
        "degenerate boundary operator at mode {m}"
    );
    bessel_j(m, ik * r_eval) / denom
}

/// Interior fluence produced by Robin boundary data `g`, evaluated on the
/// circle of radius `r_eval`: mode by mode, `coeff(m) = J_m(ik r_eval)/E_m *
/// g_hat(m)`.
pub fn excitation_fluence_disk(
    g_hat: &ModeSpectrum,
    r_eval: f64,
    k: Complex64,
    ell: f64,
) -> FluenceSpectrum {
    assert!((0.0..=1.0).contains(&r_eval));
    let ik = Complex64::I * k;
    let mut coeffs = ModeSpectrum::zeros(g_hat.band_limit());
    for m in g_hat.modes() {
        let g = g_hat.get(m);
        if g.norm_sqr() == 0.0 {
            continue;
        }
        coeffs.set(m, bessel_j(m, ik * r_eval) / source_gain(m, k, ell) * g);
    }
    FluenceSpectrum {
        radius: r_eval,
        coeffs,
    }
}

/// Radial amplitude of the mode-`n` probe field on the cell circle:
/// `J_n(ik R)`, the factor multiplying `e^{-i n theta}`.
pub fn probe_fluence(n: i32, radius: f64, k: Complex64) -> Complex64 {
    bessel_j(n, Complex64::I * k * radius)
}

/// Emitted-intensity coefficient for source mode `n`, measurement mode `m`,
/// with fluorophore concentration spectrum `c_hat` on the cell circle:
/// `gamma * R * J_n(ikR) * J_m(ikR) * c_hat(n+m) / E_m`.
pub fn intensity_coeff_unperturbed(
    n: i32,
    m: i32,
    c_hat: &ModeSpectrum,
    radius: f64,
    params: &OpticalParams,
    omega: f64,
) -> Complex64 {
    let w = crate::model::wavenumber(params, omega);
    let gamma = gamma_tilde(params, omega);
    let jn = probe_fluence(n, radius, w.k);
    let jm = probe_fluence(m, radius, w.k);
    gamma * radius * jn * jm * c_hat.get(n + m) / source_gain(m, w.k, params.ell)
}

/// The two geometric factors of the first-order intensity response; shared by
/// the forward linearization and the measurement-operator weight.
pub(crate) fn perturbation_factors(
    n: i32,
    m: i32,
    radius: f64,
    k: Complex64,
) -> (Complex64, Complex64) {
    let ik = Complex64::I * k;
    let arg = ik * radius;
    let jn = bessel_j(n, arg);
    let jm = bessel_j(m, arg);
    let jpn = bessel_j_derivative(n, arg);
    let jpm = bessel_j_derivative(m, arg);
    let a = ik * jpn * jm * radius + ik * jn * jpm * radius + jn * jm;
    let b = jn * jm * radius;
    (a, b)
}

/// Intensity coefficient of the shape-perturbed cell to first order in the
/// perturbation amplitude:
/// `I0 + (eps/E_m) * gamma * (A * (c h)_hat(n+m) - delta * B * psi1_hat(n+m))`
/// with `A`, `B` from [`perturbation_factors`] and `(c h)_hat` the spectral
/// convolution of concentration and shape.
pub fn intensity_coeff_linearized(
    n: i32,
    m: i32,
    geometry: &CellGeometry,
    fields: &PerturbedCellFields,
    params: &OpticalParams,
    omega: f64,
) -> Complex64 {
    let w = crate::model::wavenumber(params, omega);
    let gamma = gamma_tilde(params, omega);
    let q = n + m;
    let base = intensity_coeff_unperturbed(n, m, &fields.state.c_hat, geometry.radius, params, omega);
    if geometry.eps == 0.0 {
        return base;
    }
    let (a, b) = perturbation_factors(n, m, geometry.radius, w.k);
    let ch = fields.state.c_hat.convolve(&geometry.h_hat);
    let first = gamma * (a * ch.get(q) - params.delta_resp * b * fields.psi1_hat.get(q));
    base + geometry.eps * first / source_gain(m, w.k, params.ell)
}

/// Radial factor of the unit-sphere Green expansion for angular degree `l`:
/// `j_l(ik r') / (ik j'_l(ik) + (1/ell) j_l(ik))`. The spherical-harmonic
/// angular factors are the caller's business; nothing here depends on their
/// order index.
pub fn green_coeff_sphere(l: u32, r_prime: f64, k: Complex64, ell: f64) -> Complex64 {
    assert!((0.0..1.0).contains(&r_prime));
    assert!(ell > 0.0);
    let ik = Complex64::I * k;
    let jl = sph_bessel_j(l, ik);
    // j'_l from the recurrence j'_l = j_{l-1} - ((l+1)/z) j_l (l >= 1)
    let jpl = if l == 0 {
        -sph_bessel_j(1, ik)
    } else {
        sph_bessel_j(l - 1, ik) - (l as f64 + 1.0) / ik * jl
    };
    let denom = ik * jpl + jl / ell;
    assert!(denom.norm() > 1e-300, "degenerate spherical boundary operator at degree {l}");
    sph_bessel_j(l, ik * r_prime) / denom
}
