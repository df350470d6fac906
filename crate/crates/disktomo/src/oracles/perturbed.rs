//! Collocation solver for the membrane problem with a perturbed cell shape,
//! and the nonlinear intensity model built on top of it.
//!
//! The fields on both sides of the membrane are expanded in harmonic basis
//! functions (powers of `r` times angular exponentials, scaled to unit size
//! on their subdomain), and the transmission conditions are enforced
//! pointwise on the true perturbed curve with its true normal. Nothing is
//! expanded in the perturbation amplitude, so differences against the
//! unperturbed solution carry the full nonlinearity; that is exactly what the
//! linearization tests need.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::model::{gamma_tilde, source_gain, wavenumber, MeasurementMatrix, ModeSpectrum, OpticalParams};
use crate::specfun::bessel_j;

use super::OracleError;

/// Solved coefficient set for the perturbed membrane problem.
#[derive(Debug, Clone)]
pub struct PerturbedTransmission {
    band: i32,
    radius: f64,
    eps: f64,
    h_hat: ModeSpectrum,
    /// Interior coefficients of `(r/R)^|n| e^{i n theta}`.
    a: Vec<Complex64>,
    /// Exterior coefficients of `r^|n| e^{i n theta}`.
    b: Vec<Complex64>,
    /// Exterior coefficients of `(R/r)^|n| e^{i n theta}` (`ln r / ln R` at
    /// `n = 0`).
    c: Vec<Complex64>,
}

impl PerturbedTransmission {
    fn idx(&self, n: i32) -> usize {
        (n + self.band) as usize
    }

    /// Perturbed membrane radius at angle `theta`. The displacement is
    /// `eps * h(theta)` outright, not relative to the base radius.
    pub fn radius_at(&self, theta: f64) -> f64 {
        self.radius + self.eps * self.h_hat.eval(theta).re
    }

    fn radius_slope(&self, theta: f64) -> f64 {
        let mut d = Complex64::new(0.0, 0.0);
        for p in self.h_hat.modes() {
            d += Complex64::new(0.0, p as f64)
                * self.h_hat.get(p)
                * Complex64::from_polar(1.0, p as f64 * theta);
        }
        self.eps * d.re
    }

    fn interior_value(&self, r: f64, theta: f64) -> Complex64 {
        let mut u = Complex64::new(0.0, 0.0);
        for n in -self.band..=self.band {
            let scale = (r / self.radius).powi(n.abs());
            u += self.a[self.idx(n)] * scale * Complex64::from_polar(1.0, n as f64 * theta);
        }
        u
    }

    fn exterior_value(&self, r: f64, theta: f64) -> Complex64 {
        let mut u = Complex64::new(0.0, 0.0);
        for n in -self.band..=self.band {
            let phase = Complex64::from_polar(1.0, n as f64 * theta);
            let grow = r.powi(n.abs());
            let decay = if n == 0 {
                r.ln() / self.radius.ln()
            } else {
                (self.radius / r).powi(n.abs())
            };
            u += (self.b[self.idx(n)] * grow + self.c[self.idx(n)] * decay) * phase;
        }
        u
    }

    /// Membrane potential on the perturbed curve: interior minus exterior
    /// trace at angle `theta`.
    pub fn membrane_jump(&self, theta: f64) -> Complex64 {
        let r = self.radius_at(theta);
        self.interior_value(r, theta) - self.exterior_value(r, theta)
    }

    /// Trace of the exterior field on the unit circle, as a spectrum. Exact
    /// in the basis coefficients, no sampling involved.
    pub fn boundary_trace_spectrum(&self) -> ModeSpectrum {
        let mut out = ModeSpectrum::zeros(self.band);
        for n in -self.band..=self.band {
            let decay_at_one = if n == 0 { 0.0 } else { self.radius.powi(n.abs()) };
            out.set(n, self.b[self.idx(n)] + self.c[self.idx(n)] * decay_at_one);
        }
        out
    }

    /// Derivative along the unit normal of the curve `r = const + slope`
    /// through `(r, theta)`; pass `rho_slope = 0` for a concentric circle.
    pub fn normal_deriv(
        &self,
        r: f64,
        theta: f64,
        rho_slope: f64,
        interior: bool,
    ) -> Complex64 {
        let (mut dr, mut dth) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for n in -self.band..=self.band {
            let phase = Complex64::from_polar(1.0, n as f64 * theta);
            let i_n = Complex64::new(0.0, n as f64);
            if interior {
                let v = self.a[self.idx(n)] * (r / self.radius).powi(n.abs()) * phase;
                dr += (n.abs() as f64 / r) * v;
                dth += i_n * v;
            } else {
                let grow = self.b[self.idx(n)] * r.powi(n.abs()) * phase;
                dr += (n.abs() as f64 / r) * grow;
                dth += i_n * grow;
                let cn = self.c[self.idx(n)];
                if n == 0 {
                    dr += cn / (r * self.radius.ln());
                } else {
                    let v = cn * (self.radius / r).powi(n.abs()) * phase;
                    dr += -(n.abs() as f64 / r) * v;
                    dth += i_n * v;
                }
            }
        }
        let tilt = rho_slope / r;
        (dr - tilt / r * dth) / (1.0 + tilt * tilt).sqrt()
    }
}

/// Solves the membrane transmission problem on the perturbed cell
/// `r = R + eps h(theta)` with Neumann data `e^{i z theta}` on the unit
/// circle, by least-squares collocation with `2 |n| <= 2 band` harmonics.
pub fn transmission_solve_perturbed(
    z: i32,
    radius: f64,
    beta: f64,
    eps: f64,
    h_hat: &ModeSpectrum,
    band: i32,
) -> Result<PerturbedTransmission, OracleError> {
    assert!(z != 0 && z.abs() <= band);
    assert!(
        eps.abs() <= 0.25 * radius,
        "perturbation too large for the truncated basis"
    );
    assert!(radius > 0.0 && radius < 1.0);
    let n_base = (2 * band + 1) as usize;
    let cols = 3 * n_base;
    let k_angles = 2 * n_base;
    let rows = 3 * k_angles + 1;

    let mut shell = PerturbedTransmission {
        band,
        radius,
        eps,
        h_hat: h_hat.clone(),
        a: vec![Complex64::new(0.0, 0.0); n_base],
        b: vec![Complex64::new(0.0, 0.0); n_base],
        c: vec![Complex64::new(0.0, 0.0); n_base],
    };

    let mut mat = DMatrix::<Complex64>::zeros(rows, cols);
    let mut rhs = DVector::<Complex64>::zeros(rows);
    // fill one column at a time by switching on a unit coefficient
    for col in 0..cols {
        let (vec_sel, n) = (col / n_base, col % n_base);
        let n = n as i32 - band;
        let slot = shell.idx(n);
        match vec_sel {
            0 => shell.a[slot] = Complex64::new(1.0, 0.0),
            1 => shell.b[slot] = Complex64::new(1.0, 0.0),
            _ => shell.c[slot] = Complex64::new(1.0, 0.0),
        }
        for j in 0..k_angles {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / k_angles as f64;
            let rho = shell.radius_at(theta);
            let slope = shell.radius_slope(theta);
            let dn_in = shell.normal_deriv(rho, theta, slope, true);
            let dn_out = shell.normal_deriv(rho, theta, slope, false);
            // flux continuity across the membrane
            mat[(2 * j, col)] = dn_out - dn_in;
            // jump law: u_out - u_in - beta * normal derivative
            mat[(2 * j + 1, col)] =
                shell.exterior_value(rho, theta) - shell.interior_value(rho, theta) - beta * dn_in;
            // Neumann data on the unit circle
            let row = 2 * k_angles + j;
            mat[(row, col)] = shell.normal_deriv(1.0, theta, 0.0, false);
        }
        // gauge: no constant offset in the exterior trace
        if vec_sel == 1 && n == 0 {
            mat[(rows - 1, col)] = Complex64::new(1.0, 0.0);
        }
        match vec_sel {
            0 => shell.a[slot] = Complex64::new(0.0, 0.0),
            1 => shell.b[slot] = Complex64::new(0.0, 0.0),
            _ => shell.c[slot] = Complex64::new(0.0, 0.0),
        }
    }
    for j in 0..k_angles {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / k_angles as f64;
        rhs[2 * k_angles + j] = Complex64::from_polar(1.0, z as f64 * theta);
    }

    let svd = mat.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > 1e12 {
        return Err(OracleError::IllConditioned { cond: smax / smin });
    }
    let x = svd
        .solve(&rhs, 0.0)
        .map_err(|e| OracleError::LinearSolveFailed(e.to_string()))?;
    let residual = (&mat * &x - &rhs).norm();
    if residual > 1e-6 * rhs.norm() {
        return Err(OracleError::LinearSolveFailed(format!(
            "collocation residual {residual:e}"
        )));
    }
    for n in -band..=band {
        let i = shell.idx(n);
        shell.a[i] = x[i];
        shell.b[i] = x[n_base + i];
        shell.c[i] = x[2 * n_base + i];
    }
    Ok(shell)
}

/// Emitted-intensity matrix of the collocation solution, by direct quadrature
/// of the membrane source over the perturbed curve. The nonlinear counterpart
/// of the analytic intensity coefficients.
pub fn intensity_matrix_oracle(
    sol: &PerturbedTransmission,
    params: &OpticalParams,
    omega: f64,
    n_max: i32,
    n_theta: usize,
) -> MeasurementMatrix {
    assert!(n_theta >= 4 * (n_max + sol.band).unsigned_abs() as usize + 8);
    let k = wavenumber(params, omega).k;
    let gamma = gamma_tilde(params, omega);
    let ik = Complex64::I * k;
    let size = (2 * n_max + 1) as usize;
    let mut accum = vec![Complex64::new(0.0, 0.0); size * size];
    for t in 0..n_theta {
        let theta = 2.0 * std::f64::consts::PI * t as f64 / n_theta as f64;
        let rho = sol.radius_at(theta);
        let slope = sol.radius_slope(theta);
        let arc = (rho * rho + slope * slope).sqrt();
        let c_eps = -params.delta_resp * sol.membrane_jump(theta);
        let weight = c_eps * arc;
        let mut bessel = Vec::with_capacity(size);
        for n in -n_max..=n_max {
            bessel.push(bessel_j(n, ik * rho));
        }
        for (mi, m) in (-n_max..=n_max).enumerate() {
            for (ni, n) in (-n_max..=n_max).enumerate() {
                let phase = Complex64::from_polar(1.0, -((n + m) as f64) * theta);
                accum[mi * size + ni] += bessel[ni] * bessel[mi] * phase * weight;
            }
        }
    }
    let mut out = MeasurementMatrix::zeros(n_max);
    for (mi, m) in (-n_max..=n_max).enumerate() {
        let gain = source_gain(m, k, params.ell);
        for (ni, n) in (-n_max..=n_max).enumerate() {
            let val = gamma * accum[mi * size + ni] / (gain * n_theta as f64);
            out.set(m, n, val);
        }
    }
    out
}
