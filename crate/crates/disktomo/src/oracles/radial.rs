//! Finite-difference solvers for the radial boundary-value problems.
//!
//! The diffusion and electrostatic problems on the disk separate into one
//! radial ODE per angular mode. Each solver here discretizes that ODE with
//! second-order differences and solves the resulting banded system, giving an
//! independent check of the Bessel- and power-function formulas used on the
//! production path. The membrane solvers use two subdomains joined at the
//! cell circle: uniform radius inside the cell, uniform log-radius outside,
//! which keeps the error of the decaying `r^{-|n|}` branch under control at
//! small cell radii.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::model::ModeSpectrum;

use super::OracleError;

/// Thomas elimination for a complex tridiagonal system. `lower[i]` multiplies
/// the unknown left of row `i+1`, `upper[i]` the one right of row `i`.
fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>, OracleError> {
    let n = diag.len();
    assert_eq!(lower.len(), n - 1);
    assert_eq!(upper.len(), n - 1);
    assert_eq!(rhs.len(), n);
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    let mut pivot = diag[0];
    if pivot.norm() < 1e-300 {
        return Err(OracleError::LinearSolveFailed("zero pivot at row 0".into()));
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot.norm() < 1e-300 {
            return Err(OracleError::LinearSolveFailed(format!("zero pivot at row {i}")));
        }
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// One radial mode of the diffusion problem on the unit disk with a Robin
/// boundary: `phi'' + phi'/r - (m^2/r^2 + k^2) phi = 0`, `ell phi'(1) +
/// phi(1) = g`. Returns the solution on the uniform grid `r_i = i/n_r`.
fn helmholtz_mode_profile(
    m: i32,
    g: Complex64,
    k: Complex64,
    ell: f64,
    n_r: usize,
) -> Result<Vec<Complex64>, OracleError> {
    let n = n_r;
    let h = 1.0 / n as f64;
    let k2 = k * k;
    let zero = Complex64::new(0.0, 0.0);
    let mut lower = vec![zero; n];
    let mut diag = vec![zero; n + 1];
    let mut upper = vec![zero; n];
    let mut rhs = vec![zero; n + 1];
    if m == 0 {
        // center regularity by symmetry: phi'' + phi'/r -> 2 phi'' at r = 0
        diag[0] = Complex64::new(-4.0 / (h * h), 0.0) - k2;
        upper[0] = Complex64::new(4.0 / (h * h), 0.0);
    } else {
        diag[0] = Complex64::new(1.0, 0.0);
    }
    for i in 1..n {
        let r = i as f64 * h;
        lower[i - 1] = Complex64::new(1.0 / (h * h) - 1.0 / (2.0 * h * r), 0.0);
        diag[i] = Complex64::new(-2.0 / (h * h) - (m * m) as f64 / (r * r), 0.0) - k2;
        upper[i] = Complex64::new(1.0 / (h * h) + 1.0 / (2.0 * h * r), 0.0);
    }
    // Robin row with the ghost node eliminated through the boundary PDE row
    lower[n - 1] = Complex64::new(2.0 / (h * h), 0.0);
    diag[n] = Complex64::new(
        -2.0 / (h * h) - 2.0 / (h * ell) - 1.0 / ell - (m * m) as f64,
        0.0,
    ) - k2;
    rhs[n] = -(2.0 / (h * ell) + 1.0 / ell) * g;
    solve_tridiagonal(&lower, &diag, &upper, &rhs)
}

/// Finite-difference counterpart of the modal boundary-to-interior fluence
/// map: solves every mode of `g_hat` on an `n_r`-interval grid and reads the
/// solution off at `r_eval` by linear interpolation.
pub fn helmholtz_robin_solve(
    g_hat: &ModeSpectrum,
    k: Complex64,
    ell: f64,
    n_r: usize,
    r_eval: f64,
) -> Result<ModeSpectrum, OracleError> {
    assert!((0.0..=1.0).contains(&r_eval));
    assert!(
        n_r as f64 >= 16.0 * k.norm().max(1.0),
        "grid does not resolve the wavenumber"
    );
    let mut out = ModeSpectrum::zeros(g_hat.band_limit());
    let h = 1.0 / n_r as f64;
    let pos = r_eval / h;
    let i0 = (pos.floor() as usize).min(n_r - 1);
    let frac = pos - i0 as f64;
    for m in g_hat.modes() {
        let g = g_hat.get(m);
        if g.norm_sqr() == 0.0 {
            continue;
        }
        let profile = helmholtz_mode_profile(m, g, k, ell, n_r)?;
        out.set(m, (1.0 - frac) * profile[i0] + frac * profile[i0 + 1]);
    }
    Ok(out)
}

/// Spherical analogue for one angular degree: `u'' + 2u'/r - (l(l+1)/r^2 +
/// k^2) u = 0` with the same Robin condition, evaluated at `r_eval`.
pub fn helmholtz_robin_solve_sphere(
    l: u32,
    g: Complex64,
    k: Complex64,
    ell: f64,
    n_r: usize,
    r_eval: f64,
) -> Result<Complex64, OracleError> {
    let n = n_r;
    let h = 1.0 / n as f64;
    let k2 = k * k;
    let zero = Complex64::new(0.0, 0.0);
    let mut lower = vec![zero; n];
    let mut diag = vec![zero; n + 1];
    let mut upper = vec![zero; n];
    let mut rhs = vec![zero; n + 1];
    if l == 0 {
        // u'' + 2u'/r -> 3u'' at the center
        diag[0] = Complex64::new(-6.0 / (h * h), 0.0) - k2;
        upper[0] = Complex64::new(6.0 / (h * h), 0.0);
    } else {
        diag[0] = Complex64::new(1.0, 0.0);
    }
    let ll = (l * (l + 1)) as f64;
    for i in 1..n {
        let r = i as f64 * h;
        lower[i - 1] = Complex64::new(1.0 / (h * h) - 1.0 / (h * r), 0.0);
        diag[i] = Complex64::new(-2.0 / (h * h) - ll / (r * r), 0.0) - k2;
        upper[i] = Complex64::new(1.0 / (h * h) + 1.0 / (h * r), 0.0);
    }
    lower[n - 1] = Complex64::new(2.0 / (h * h), 0.0);
    diag[n] = Complex64::new(-2.0 / (h * h) - 2.0 / (h * ell) - 2.0 / ell - ll, 0.0) - k2;
    rhs[n] = -(2.0 / (h * ell) + 2.0 / ell) * g;
    let profile = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    let pos = r_eval / h;
    let i0 = (pos.floor() as usize).min(n - 1);
    let frac = pos - i0 as f64;
    Ok((1.0 - frac) * profile[i0] + frac * profile[i0 + 1])
}

/// Two-domain grid geometry shared by the membrane solvers: `n_r` uniform
/// radial intervals on `[0, R]`, `n_r` uniform log-radius intervals on
/// `[R, 1]`.
struct MembraneGrid {
    n: usize,
    h_in: f64,
    h_log: f64,
    radius: f64,
}

impl MembraneGrid {
    fn new(radius: f64, n_r: usize) -> Self {
        MembraneGrid {
            n: n_r,
            h_in: radius / n_r as f64,
            h_log: -radius.ln() / n_r as f64,
            radius,
        }
    }

    /// Unknown layout: interior nodes 0..=n then exterior nodes 0..=n.
    fn size(&self) -> usize {
        2 * self.n + 2
    }

    fn interior(&self, i: usize) -> usize {
        i
    }

    fn exterior(&self, j: usize) -> usize {
        self.n + 1 + j
    }
}

/// Fills the rows shared by both membrane problems: interior and exterior
/// Laplace stencils and center regularity, for angular order `eta >= 1`.
fn membrane_interior_rows(grid: &MembraneGrid, eta: f64, mat: &mut DMatrix<f64>) {
    let n = grid.n;
    let h = grid.h_in;
    let hs = grid.h_log;
    mat[(grid.interior(0), grid.interior(0))] = 1.0;
    for i in 1..n {
        let r = i as f64 * h;
        let row = grid.interior(i);
        mat[(row, grid.interior(i - 1))] = 1.0 / (h * h) - 1.0 / (2.0 * h * r);
        mat[(row, grid.interior(i))] = -2.0 / (h * h) - eta * eta / (r * r);
        mat[(row, grid.interior(i + 1))] = 1.0 / (h * h) + 1.0 / (2.0 * h * r);
    }
    for j in 1..n {
        let row = grid.exterior(j);
        mat[(row, grid.exterior(j - 1))] = 1.0 / (hs * hs);
        mat[(row, grid.exterior(j))] = -2.0 / (hs * hs) - eta * eta;
        mat[(row, grid.exterior(j + 1))] = 1.0 / (hs * hs);
    }
}

/// One-sided second-order derivative weights at the interface, from inside
/// (`+1` orientation toward increasing index) and outside.
const ONESIDED: [f64; 3] = [3.0, -4.0, 1.0];

fn interface_rows(
    grid: &MembraneGrid,
    beta: f64,
    mat: &mut DMatrix<f64>,
) -> (usize, usize) {
    let n = grid.n;
    let h = grid.h_in;
    let hs = grid.h_log;
    let r = grid.radius;
    // d/dr from inside at r = R uses nodes n, n-1, n-2
    let din = [
        ONESIDED[0] / (2.0 * h),
        ONESIDED[1] / (2.0 * h),
        ONESIDED[2] / (2.0 * h),
    ];
    // d/dr from outside: (1/R) d/ds with nodes 0, 1, 2
    let dout = [
        -ONESIDED[0] / (2.0 * hs * r),
        -ONESIDED[1] / (2.0 * hs * r),
        -ONESIDED[2] / (2.0 * hs * r),
    ];
    // flux row: outside derivative minus inside derivative
    let flux_row = grid.interior(n);
    for (w, idx) in dout.iter().zip([0, 1, 2]) {
        mat[(flux_row, grid.exterior(idx))] += *w;
    }
    for (w, idx) in din.iter().zip([n, n - 1, n - 2]) {
        mat[(flux_row, grid.interior(idx))] -= *w;
    }
    // jump row: u_out - u_in - beta * (inside derivative)
    let jump_row = grid.exterior(0);
    mat[(jump_row, grid.exterior(0))] += 1.0;
    mat[(jump_row, grid.interior(n))] -= 1.0;
    for (w, idx) in din.iter().zip([n, n - 1, n - 2]) {
        mat[(jump_row, grid.interior(idx))] -= beta * w;
    }
    (flux_row, jump_row)
}

fn outer_neumann_row(grid: &MembraneGrid, mat: &mut DMatrix<f64>) -> usize {
    let n = grid.n;
    let hs = grid.h_log;
    let row = grid.exterior(n);
    for (w, off) in ONESIDED.iter().zip([0usize, 1, 2]) {
        mat[(row, grid.exterior(n - off))] += w / (2.0 * hs);
    }
    row
}

/// Spectral outputs of the unperturbed membrane solve, all real by symmetry.
#[derive(Debug, Clone, Copy)]
pub struct UnperturbedTransmission {
    pub f0: f64,
    pub harmonic: f64,
    pub psi: f64,
    pub u_minus: f64,
}

/// Finite-difference solve of the mode-`z` membrane problem with unit Neumann
/// data on the unit circle: Laplace inside and outside the cell circle, flux
/// continuous, potential jump `beta` times the flux.
pub fn transmission_solve(
    z: i32,
    radius: f64,
    beta: f64,
    n_r: usize,
) -> Result<UnperturbedTransmission, OracleError> {
    assert!(z != 0);
    assert!(radius > 0.0 && radius < 1.0);
    let zeta = z.unsigned_abs() as f64;
    let grid = MembraneGrid::new(radius, n_r);
    let size = grid.size();
    let mut mat = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    membrane_interior_rows(&grid, zeta, &mut mat);
    interface_rows(&grid, beta, &mut mat);
    let neumann = outer_neumann_row(&grid, &mut mat);
    rhs[neumann] = 1.0;
    let solution = solve_checked(&mat, &rhs)?;
    let n = grid.n;
    let u_minus = solution[grid.interior(n)];
    let u_plus = solution[grid.exterior(0)];
    let f0 = solution[grid.exterior(n)];
    // the r^zeta component of the exterior field follows from the trace and
    // the unit-flux normalization: A = (zeta f0 + 1)/(2 zeta)
    let a_coeff = (zeta * f0 + 1.0) / (2.0 * zeta);
    Ok(UnperturbedTransmission {
        f0,
        harmonic: a_coeff * radius.powf(zeta),
        psi: u_minus - u_plus,
        u_minus,
    })
}

/// Finite-difference solve of the correction-field problem at one angular
/// order: Laplace on both sides, prescribed flux and potential jumps at the
/// cell circle, zero Neumann data outside. Returns the trace at `r = 1`.
pub fn correction_mode_oracle(
    eta: i32,
    radius: f64,
    beta: f64,
    flux_jump: Complex64,
    pot_jump: Complex64,
    n_r: usize,
) -> Result<Complex64, OracleError> {
    assert!(eta != 0);
    let grid = MembraneGrid::new(radius, n_r);
    let size = grid.size();
    let mut mat = DMatrix::<f64>::zeros(size, size);
    membrane_interior_rows(&grid, eta.unsigned_abs() as f64, &mut mat);
    let (flux_row, jump_row) = interface_rows(&grid, beta, &mut mat);
    outer_neumann_row(&grid, &mut mat);
    // same real operator, complex data: solve the two real systems
    let mut rhs_re = DVector::<f64>::zeros(size);
    let mut rhs_im = DVector::<f64>::zeros(size);
    rhs_re[flux_row] = flux_jump.re;
    rhs_im[flux_row] = flux_jump.im;
    rhs_re[jump_row] = pot_jump.re;
    rhs_im[jump_row] = pot_jump.im;
    let sol_re = solve_checked(&mat, &rhs_re)?;
    let sol_im = solve_checked(&mat, &rhs_im)?;
    let at = grid.exterior(grid.n);
    Ok(Complex64::new(sol_re[at], sol_im[at]))
}

fn solve_checked(mat: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>, OracleError> {
    let lu = mat.clone().lu();
    let x = lu
        .solve(rhs)
        .ok_or_else(|| OracleError::LinearSolveFailed("singular interface system".into()))?;
    let residual = (mat * &x - rhs).norm();
    let scale = rhs.norm().max(x.norm() * mat.norm());
    if residual > 1e-8 * scale.max(1e-300) {
        return Err(OracleError::IllConditioned {
            cond: residual / scale,
        });
    }
    Ok(x)
}
