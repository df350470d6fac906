//! Physical parameters, derived constants, and the spectral containers shared
//! by every stage of the pipeline.
//!
//! Units are millimeters and seconds throughout. Fourier conventions: a
//! boundary function `g(theta)` is carried by its coefficients
//! `g_hat(m) = (1/2pi) * integral g(theta) e^{-i m theta} d theta`, so a pure
//! mode `e^{i p theta}` has a single nonzero coefficient at `p`.

use num_complex::Complex64;

use crate::specfun::{bessel_j, bessel_j_derivative};

// ============================================================================
// Parameter sets
// ============================================================================

/// Optical properties of the tissue, the fluorophore response, and the
/// boundary condition of the diffusion model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalParams {
    /// Absorption coefficient of the medium (mm^-1).
    pub mu: f64,
    /// Reduced scattering coefficient (mm^-1); dominates absorption in the
    /// diffusive regime this model assumes.
    pub mu_s_prime: f64,
    /// Fluorophore quantum efficiency (dimensionless).
    pub eta: f64,
    /// Fluorescence lifetime (s).
    pub tau: f64,
    /// Molar extinction coefficient of the fluorophore (mm^-1 mol^-1).
    pub eps_ext: f64,
    /// Membrane response constant: fluorophore concentration produced per volt
    /// of membrane potential jump (mol V^-1).
    pub delta_resp: f64,
    /// Extrapolation length of the Robin boundary condition (mm); must be
    /// positive, the Dirichlet limit is out of scope.
    pub ell: f64,
    /// Speed of light in the medium (mm s^-1).
    pub c_light: f64,
    /// Spatial dimension, 2 or 3.
    pub dim: u32,
}

impl Default for OpticalParams {
    /// Reference tissue/fluorophore values used by the documentation examples
    /// and the demo configurations.
    fn default() -> Self {
        OpticalParams {
            mu: 0.03,
            mu_s_prime: 0.275,
            eta: 0.016,
            tau: 0.56,
            eps_ext: 5e4,
            delta_resp: 0.91e-6,
            ell: 1.0,
            c_light: 3e11,
            dim: 2,
        }
    }
}

impl OpticalParams {
    pub fn validate(&self) -> Result<(), String> {
        let pos = [
            (self.mu, "mu"),
            (self.mu_s_prime, "mu_s_prime"),
            (self.eta, "eta"),
            (self.tau, "tau"),
            (self.eps_ext, "eps_ext"),
            (self.delta_resp, "delta_resp"),
            (self.ell, "ell"),
            (self.c_light, "c_light"),
        ];
        for (v, name) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("parameter {name} must be positive and finite, got {v}"));
            }
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(format!("dim must be 2 or 3, got {}", self.dim));
        }
        Ok(())
    }
}

/// The membrane enters the electrostatics only through the lumped constant
/// `beta` = thickness / conductivity, the coefficient of the potential-jump
/// condition `u_+ - u_- = beta * du/dnu` on the cell boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneModel {
    pub beta: f64,
}

/// Cell geometry: a disk of radius `radius` perturbed to
/// `r = radius + eps * h(theta)`, with `h` carried by its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    /// Unperturbed cell radius (mm); the surrounding tissue is the unit disk,
    /// so `0 < radius < 1`.
    pub radius: f64,
    /// Perturbation amplitude (dimensionless multiplier of `h`).
    pub eps: f64,
    /// Spectrum of the shape perturbation `h`; conjugate-symmetric when `h`
    /// is a real profile.
    pub h_hat: ModeSpectrum,
}

impl CellGeometry {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(format!(
                "cell radius must lie strictly inside the unit disk, got {}",
                self.radius
            ));
        }
        if !self.eps.is_finite() || self.eps < 0.0 {
            return Err(format!("eps must be finite and nonnegative, got {}", self.eps));
        }
        Ok(())
    }
}

// ============================================================================
// Spectral containers
// ============================================================================

/// Band-limited complex Fourier coefficients of a function on a circle,
/// stored densely over `p in [-band_limit, band_limit]`. Reads outside the
/// band return zero; writes outside the band are a caller bug.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    band_limit: i32,
    coeffs: Vec<Complex64>,
}

impl ModeSpectrum {
    pub fn zeros(band_limit: i32) -> Self {
        assert!(band_limit >= 0, "band limit must be nonnegative");
        ModeSpectrum {
            band_limit,
            coeffs: vec![Complex64::new(0.0, 0.0); (2 * band_limit + 1) as usize],
        }
    }

    /// Build from `(mode, coefficient)` pairs; the band is the largest |mode|.
    pub fn from_pairs(pairs: &[(i32, Complex64)]) -> Self {
        let band = pairs.iter().map(|&(p, _)| p.abs()).max().unwrap_or(0);
        let mut s = ModeSpectrum::zeros(band);
        for &(p, v) in pairs {
            s.set(p, v);
        }
        s
    }

    /// Single spike `e^{i p theta}`.
    pub fn spike(p: i32) -> Self {
        ModeSpectrum::from_pairs(&[(p, Complex64::new(1.0, 0.0))])
    }

    /// Real cosine profile `cos(p theta)`: half-weight spikes at `+-p`.
    pub fn cosine(p: i32) -> Self {
        let half = Complex64::new(0.5, 0.0);
        ModeSpectrum::from_pairs(&[(p, half), (-p, half)])
    }

    pub fn band_limit(&self) -> i32 {
        self.band_limit
    }

    pub fn get(&self, p: i32) -> Complex64 {
        if p.abs() > self.band_limit {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(p + self.band_limit) as usize]
        }
    }

    pub fn set(&mut self, p: i32, v: Complex64) {
        assert!(
            p.abs() <= self.band_limit,
            "mode {p} outside band limit {}",
            self.band_limit
        );
        self.coeffs[(p + self.band_limit) as usize] = v;
    }

    pub fn modes(&self) -> impl Iterator<Item = i32> + '_ {
        -self.band_limit..=self.band_limit
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ModeSpectrum {
            band_limit: self.band_limit,
            coeffs: self.coeffs.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let band = self.band_limit.max(other.band_limit);
        let mut out = ModeSpectrum::zeros(band);
        for p in -band..=band {
            out.set(p, self.get(p) + other.get(p));
        }
        out
    }

    /// Exact spectral convolution; band limits add.
    pub fn convolve(&self, other: &Self) -> Self {
        let band = self.band_limit + other.band_limit;
        let mut out = ModeSpectrum::zeros(band);
        for q in -band..=band {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in -self.band_limit..=self.band_limit {
                acc += self.get(p) * other.get(q - p);
            }
            out.set(q, acc);
        }
        out
    }

    /// Largest relative violation of the conjugate symmetry a real-valued
    /// function must satisfy, `coeff(-p) = conj(coeff(p))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let scale = self
            .coeffs
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        (0..=self.band_limit)
            .map(|p| (self.get(-p) - self.get(p).conj()).norm() / scale)
            .fold(0.0, f64::max)
    }

    /// Evaluate the represented function at angle `theta`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in self.modes() {
            acc += self.get(p) * Complex64::from_polar(1.0, p as f64 * theta);
        }
        acc
    }
}

/// Doubly indexed measurement data over source mode `n` and probe mode `m`,
/// dense on `[-n_max, n_max]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    n_max: i32,
    entries: Vec<Complex64>,
}

impl MeasurementMatrix {
    pub fn zeros(n_max: i32) -> Self {
        assert!(n_max >= 0);
        let side = (2 * n_max + 1) as usize;
        MeasurementMatrix {
            n_max,
            entries: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    fn idx(&self, m: i32, n: i32) -> usize {
        assert!(
            m.abs() <= self.n_max && n.abs() <= self.n_max,
            "index ({m},{n}) outside measurement square of half-width {}",
            self.n_max
        );
        let side = (2 * self.n_max + 1) as usize;
        (m + self.n_max) as usize * side + (n + self.n_max) as usize
    }

    pub fn get(&self, m: i32, n: i32) -> Complex64 {
        self.entries[self.idx(m, n)]
    }

    pub fn set(&mut self, m: i32, n: i32, v: Complex64) {
        let i = self.idx(m, n);
        self.entries[i] = v;
    }

    /// Frobenius norm of the difference; shapes must match.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.n_max, other.n_max, "measurement shapes differ");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

// ============================================================================
// Derived constants
// ============================================================================

/// The complex diffusion wavenumber and the diffusion coefficient it came
/// from. `k` is the principal square root of `(mu + i omega / c) * dim *
/// mu_s_prime`, so `Re k >= 0` always.
#[derive(Debug, Clone, Copy)]
pub struct Wavenumber {
    pub k: Complex64,
    /// Diffusion coefficient `D = 1 / (dim * mu_s_prime)` (mm).
    pub diffusion: f64,
}

impl Wavenumber {
    /// True only in the unphysical corner `mu = omega = 0`.
    pub fn is_degenerate(&self) -> bool {
        self.k.norm_sqr() == 0.0
    }
}

pub fn wavenumber(params: &OpticalParams, omega: f64) -> Wavenumber {
    assert!(omega >= 0.0, "negative modulation frequency");
    let diffusion = 1.0 / (params.dim as f64 * params.mu_s_prime);
    let k2 = Complex64::new(params.mu, omega / params.c_light) / diffusion;
    Wavenumber {
        k: k2.sqrt(),
        diffusion,
    }
}

/// Frequency response of the fluorophore: `gamma = eta * eps_ext / (1 - i
/// omega tau)`. Multiplies the emission source term wherever fluorophores sit.
pub fn gamma_tilde(params: &OpticalParams, omega: f64) -> Complex64 {
    assert!(omega >= 0.0, "negative modulation frequency");
    params.eta * params.eps_ext / Complex64::new(1.0, -omega * params.tau)
}

/// Modal gain of the Robin boundary operator on the unit circle:
/// `E_n = i k ell J'_n(ik) + J_n(ik)`.
///
/// A boundary source concentrated on mode `n` must be scaled by `E_n` for the
/// interior fluence to come out as exactly `J_n(ik r) e^{-i n theta}`; a
/// near-zero `E_n` makes mode `n` unusable as a source, which callers can
/// detect with [`source_gain_is_usable`].
pub fn source_gain(n: i32, k: Complex64, ell: f64) -> Complex64 {
    let ik = Complex64::I * k;
    ik * ell * bessel_j_derivative(n, ik) + bessel_j(n, ik)
}

/// Whether `|E_n|` is comfortably above the noise floor of double precision.
pub fn source_gain_is_usable(n: i32, k: Complex64, ell: f64) -> bool {
    source_gain(n, k, ell).norm() >= 1e-14
}
