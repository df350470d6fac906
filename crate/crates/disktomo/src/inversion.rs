//! The linearized measurement operator and its least-squares inverse.
//!
//! To first order in the perturbation amplitude, the processed boundary data
//! factor through a single weight per matrix entry:
//!
//! `a_{m,n} = eps * F_{m,n}(z) * h_hat(m+n-z)`,
//!
//! so the operator is diagonal in the shape modes and each coefficient of `h`
//! is estimated independently from the anti-diagonal `m+n = p+z` of the data
//! matrix. The weight `F` combines the optical factors of the first-order
//! intensity response with the membrane's electrostatic reaction to a
//! unit-amplitude shape mode; the latter is the kernel computed by
//! [`impulse_kernel`], arranged with nonnegative powers of the cell radius
//! only so that high modes at small radii underflow gracefully to zero
//! instead of overflowing.

use num_complex::Complex64;

use crate::cellfield::{electro_mode_coefficients, mode_solve_parts};
use crate::forward::perturbation_factors;
use crate::model::{
    gamma_tilde, source_gain, wavenumber, MeasurementMatrix, MembraneModel, ModeSpectrum,
    OpticalParams,
};

/// Everything that stays fixed across one imaging experiment.
#[derive(Debug, Clone)]
pub struct Context {
    pub params: OpticalParams,
    pub membrane: MembraneModel,
    /// Cell radius, in units of the domain radius.
    pub radius: f64,
    /// Modulation frequency of the excitation light.
    pub omega: f64,
}

impl Context {
    pub fn new(params: OpticalParams, membrane: MembraneModel, radius: f64, omega: f64) -> Self {
        params.validate().expect("invalid optical parameters");
        assert!(radius > 0.0 && radius < 1.0);
        Context {
            params,
            membrane,
            radius,
            omega,
        }
    }

    pub fn k(&self) -> Complex64 {
        wavenumber(&self.params, self.omega).k
    }

    pub fn gamma(&self) -> Complex64 {
        gamma_tilde(&self.params, self.omega)
    }
}

/// Electrostatic response kernel at data mode `q` for a unit shape impulse at
/// mode `q - z`: the first-order membrane-potential correction plus the share
/// of the outer-trace correction that the data processing cannot remove.
///
/// Independent of the optics and of the concentration sensitivity.
pub fn impulse_kernel(q: i32, z: i32, radius: f64, membrane: &MembraneModel) -> f64 {
    assert!(z != 0);
    let r = radius;
    let beta = membrane.beta;
    let co = electro_mode_coefficients(z, r, beta);
    let qz = (q as f64) * (z as f64);
    // jump data of the unit impulse: flux and potential
    let n_jump = qz / (r * r) * co.psi;
    let d_jump = co.psi / r + beta * qz / (r * r) * co.u_minus;
    let eta = q.unsigned_abs() as f64;
    if q == 0 {
        return -d_jump;
    }
    let s = mode_solve_parts(eta, r, beta);
    let t = d_jump - (1.0 + beta * eta / r) * (r / eta) * n_jump;
    let r2e = r.powf(2.0 * eta);
    let psi1 = beta * eta * t * (1.0 - r2e) / (s * r) + beta * n_jump - d_jump;
    psi1 + 2.0 * beta * eta * r2e * t / (s * (2.0 * r + beta * eta))
}

/// Entry weight of the linearized measurement operator: the factor multiplying
/// `eps * h_hat(m+n-z)` in the processed data at source mode `n`, measurement
/// mode `m`.
pub fn measurement_weight(m: i32, n: i32, z: i32, ctx: &Context) -> Complex64 {
    assert!(z != 0);
    let k = ctx.k();
    let gamma = ctx.gamma();
    let delta = ctx.params.delta_resp;
    let (a, b) = perturbation_factors(n, m, ctx.radius, k);
    let co = electro_mode_coefficients(z, ctx.radius, ctx.membrane.beta);
    let c_z = -delta * co.psi;
    let kernel = impulse_kernel(m + n, z, ctx.radius, &ctx.membrane);
    2.0 * std::f64::consts::PI * gamma * (a * c_z - delta * b * kernel)
}

/// Applies the linearized operator to a shape spectrum, producing the full
/// `(2 n_max + 1)^2` processed-data matrix.
pub fn apply_q(
    h_hat: &ModeSpectrum,
    z: i32,
    eps: f64,
    n_max: i32,
    ctx: &Context,
) -> MeasurementMatrix {
    assert!(eps >= 0.0);
    let mut out = MeasurementMatrix::zeros(n_max);
    for m in -n_max..=n_max {
        for n in -n_max..=n_max {
            let h = h_hat.get(m + n - z);
            if h.norm_sqr() == 0.0 {
                continue;
            }
            out.set(m, n, eps * measurement_weight(m, n, z, ctx) * h);
        }
    }
    out
}

/// Turns raw intensity matrices into the processed data the least-squares
/// step consumes: scale the perturbed-minus-unperturbed intensity by the
/// modal source gain and remove the known outer-trace contribution of the
/// correction field.
pub fn assemble_data(
    intensity_perturbed: &MeasurementMatrix,
    intensity_base: &MeasurementMatrix,
    w_hat: &ModeSpectrum,
    eps: f64,
    ctx: &Context,
) -> MeasurementMatrix {
    assert_eq!(intensity_perturbed.n_max(), intensity_base.n_max());
    let n_max = intensity_base.n_max();
    let k = ctx.k();
    let gamma = ctx.gamma();
    let r = ctx.radius;
    let beta = ctx.membrane.beta;
    let delta = ctx.params.delta_resp;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = MeasurementMatrix::zeros(n_max);
    for m in -n_max..=n_max {
        let gain = source_gain(m, k, ctx.params.ell);
        for n in -n_max..=n_max {
            let diff = intensity_perturbed.get(m, n) - intensity_base.get(m, n);
            let mut val = two_pi * gain * diff;
            let q = m + n;
            if q != 0 {
                let eta = q.unsigned_abs() as f64;
                let (_, b) = perturbation_factors(n, m, r, k);
                let share = eta * r.powf(eta - 1.0) / (1.0 + beta * eta / (2.0 * r));
                val -= eps
                    * gamma
                    * b
                    * beta
                    * std::f64::consts::PI
                    * delta
                    * share
                    * w_hat.get(q);
            }
            out.set(m, n, val);
        }
    }
    out
}

/// One reproducible complex noise sample for matrix entry `(m, n)`: standard
/// complex Gaussian (unit total variance) from a counter-based generator, so
/// entries are independent of evaluation order and matrix shape.
pub fn noise_sample(seed: u64, m: i32, n: i32) -> Complex64 {
    fn mix(mut x: u64) -> u64 {
        x ^= x >> 30;
        x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x ^= x >> 27;
        x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^= x >> 31;
        x
    }
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let key = ((m as u32 as u64) << 32) | (n as u32 as u64);
    let s = mix(seed.wrapping_add(GOLDEN) ^ mix(key.wrapping_add(GOLDEN)));
    let a = mix(s.wrapping_add(GOLDEN));
    let b = mix(s.wrapping_add(GOLDEN.wrapping_mul(2)));
    // 53-bit uniforms, offset to the open interval so the log is finite
    let u1 = ((a >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
    let u2 = ((b >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
    let radius = (-u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Complex64::from_polar(radius, angle)
}

/// Adds `sigma`-scaled complex Gaussian noise to every entry, deterministically
/// in `(seed, m, n)`.
pub fn add_noise(data: &mut MeasurementMatrix, sigma: f64, seed: u64) {
    assert!(sigma >= 0.0);
    if sigma == 0.0 {
        return;
    }
    let n_max = data.n_max();
    for m in -n_max..=n_max {
        for n in -n_max..=n_max {
            let w = noise_sample(seed, m, n);
            let v = data.get(m, n) + sigma * w;
            data.set(m, n, v);
        }
    }
}

/// Output of the mode-wise least-squares estimator.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub h_hat: ModeSpectrum,
    /// Normal-equation weights per mode, sum of |F|^2 along the anti-diagonal.
    gram: Vec<f64>,
    /// Modes whose weight fell below the resolvability floor; their estimates
    /// are reported as zero.
    pub unresolvable: Vec<i32>,
}

impl ReconstructionResult {
    pub fn band_limit(&self) -> i32 {
        self.h_hat.band_limit()
    }

    pub fn gram_sum(&self, p: i32) -> f64 {
        let m = self.band_limit();
        assert!(p.abs() <= m);
        self.gram[(p + m) as usize]
    }

    /// Estimator variance predicted by the noise model for one coefficient.
    pub fn predicted_var(&self, p: i32, sigma: f64, eps: f64) -> f64 {
        (sigma / eps).powi(2) / self.gram_sum(p)
    }

    pub fn is_unresolvable(&self, p: i32) -> bool {
        self.unresolvable.contains(&p)
    }
}

/// Weight floor below which a mode is reported as not estimable instead of
/// amplifying noise by thirty orders of magnitude.
pub const GRAM_FLOOR: f64 = 1e-30;

/// Mode-wise least squares over the anti-diagonals of the data matrix,
/// estimating `h_hat(p)` for `|p| <= band`.
pub fn least_squares(
    data: &MeasurementMatrix,
    z: i32,
    eps: f64,
    band: i32,
    ctx: &Context,
) -> ReconstructionResult {
    assert!(eps > 0.0);
    assert!(band >= 0);
    let n_max = data.n_max();
    let j_cap = 64.max(8 * (z.abs() + band));
    let mut h_hat = ModeSpectrum::zeros(band);
    let mut gram = vec![0.0_f64; (2 * band + 1) as usize];
    let mut unresolvable = Vec::new();
    for p in -band..=band {
        let q = p + z;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0_f64;
        let lo = (-j_cap).max(q - n_max).max(-n_max);
        let hi = j_cap.min(q + n_max).min(n_max);
        for j in lo..=hi {
            let f = measurement_weight(j, q - j, z, ctx);
            num += f.conj() * data.get(j, q - j);
            den += f.norm_sqr();
        }
        gram[(p + band) as usize] = den;
        if den < GRAM_FLOOR {
            unresolvable.push(p);
            continue;
        }
        h_hat.set(p, num / den / eps);
    }
    ReconstructionResult {
        h_hat,
        gram,
        unresolvable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellfield::{psi1_spectrum, w_spectrum, ElectroState, PerturbedCellFields};
    use crate::forward::{intensity_coeff_linearized, intensity_coeff_unperturbed};
    use crate::model::CellGeometry;

    fn test_context() -> Context {
        // reference optics with the fluorescence scale raised so that the
        // low-order weights sit far from the resolvability floor
        let mut params = OpticalParams::default();
        params.eps_ext *= 1e14;
        Context::new(params, MembraneModel { beta: 0.1 }, 0.05, 1e9)
    }

    #[test]
    fn kernel_matches_generic_transmission_solve() {
        let ctx = test_context();
        let membrane = ctx.membrane.clone();
        for z in [1, -1, 2, 3] {
            let state = ElectroState::single_mode(z, ctx.radius, &membrane, 1.0);
            for q in -4..=4 {
                let p0 = q - z;
                let mut h = ModeSpectrum::zeros(p0.abs().max(1));
                h.set(p0, Complex64::new(1.0, 0.0));
                let w = w_spectrum(&state, &h);
                let psi1 = psi1_spectrum(&state, &h, &w);
                let eta = q.unsigned_abs() as f64;
                let r = ctx.radius;
                let share = if q == 0 {
                    0.0
                } else {
                    ctx.membrane.beta * eta * r.powf(eta - 1.0)
                        / (2.0 * (1.0 + ctx.membrane.beta * eta / (2.0 * r)))
                };
                let generic = psi1.get(q) + share * w.get(q);
                let kernel = impulse_kernel(q, z, r, &membrane);
                assert!(
                    (generic - kernel).norm() <= 1e-11 * kernel.abs().max(1e-300),
                    "kernel mismatch at q={q}, z={z}: {generic} vs {kernel}"
                );
            }
        }
    }

    #[test]
    fn weight_symmetries() {
        let ctx = test_context();
        for z in [1, 2] {
            for m in -3..=3 {
                for n in -3..=3 {
                    let f = measurement_weight(m, n, z, &ctx);
                    let swapped = measurement_weight(n, m, z, &ctx);
                    assert!((f - swapped).norm() <= 1e-14 * f.norm());
                    // reflecting every index picks up the Bessel parity factor
                    let parity = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
                    let reflected = measurement_weight(-m, -n, -z, &ctx);
                    assert!((f - parity * reflected).norm() <= 1e-14 * f.norm());
                }
            }
        }
    }

    #[test]
    fn apply_q_antidiagonal_support() {
        let ctx = test_context();
        let h = ModeSpectrum::spike(2);
        let data = apply_q(&h, 1, 1e-2, 5, &ctx);
        for m in -5..=5 {
            for n in -5..=5 {
                let v = data.get(m, n);
                if m + n == 3 {
                    assert!(v.norm() > 0.0, "missing entry at ({m},{n})");
                } else {
                    assert_eq!(v, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn assemble_data_reproduces_linear_operator() {
        // processing the linearized intensities must land exactly on the
        // factored form eps * F * h_hat
        let ctx = test_context();
        let z = 1;
        let eps = 1e-2;
        let h_hat = ModeSpectrum::cosine(2);
        let geometry = CellGeometry {
            radius: ctx.radius,
            eps,
            h_hat: h_hat.clone(),
        };
        let state = ElectroState::single_mode(z, ctx.radius, &ctx.membrane, ctx.params.delta_resp);
        let fields = PerturbedCellFields::compute(&state, &h_hat);
        let n_max = 6;
        let mut i_base = MeasurementMatrix::zeros(n_max);
        let mut i_pert = MeasurementMatrix::zeros(n_max);
        for m in -n_max..=n_max {
            for n in -n_max..=n_max {
                i_base.set(
                    m,
                    n,
                    intensity_coeff_unperturbed(n, m, &state.c_hat, ctx.radius, &ctx.params, ctx.omega),
                );
                i_pert.set(
                    m,
                    n,
                    intensity_coeff_linearized(n, m, &geometry, &fields, &ctx.params, ctx.omega),
                );
            }
        }
        let assembled = assemble_data(&i_pert, &i_base, &fields.w_hat, eps, &ctx);
        let direct = apply_q(&h_hat, z, eps, n_max, &ctx);
        let dist = assembled.frobenius_distance(&direct);
        let scale = direct.frobenius_distance(&MeasurementMatrix::zeros(n_max));
        assert!(
            dist <= 1e-10 * scale,
            "assembled data disagrees with operator: {dist:e} vs scale {scale:e}"
        );
    }

    #[test]
    fn round_trip_without_noise() {
        let ctx = test_context();
        let z = 1;
        let eps = 5e-3;
        let mut h = ModeSpectrum::zeros(3);
        h.set(1, Complex64::new(0.5, 0.0));
        h.set(-1, Complex64::new(0.5, 0.0));
        h.set(3, Complex64::new(0.2, -0.1));
        h.set(-3, Complex64::new(0.2, 0.1));
        let data = apply_q(&h, z, eps, 16, &ctx);
        let rec = least_squares(&data, z, eps, 3, &ctx);
        assert!(rec.unresolvable.is_empty(), "{:?}", rec.unresolvable);
        for p in -3..=3 {
            let err = (rec.h_hat.get(p) - h.get(p)).norm();
            assert!(err < 1e-10, "mode {p} error {err:e}");
        }
    }

    #[test]
    fn zero_data_zero_estimate() {
        let ctx = test_context();
        let data = MeasurementMatrix::zeros(8);
        let rec = least_squares(&data, 1, 1e-2, 2, &ctx);
        for p in -2..=2 {
            if !rec.is_unresolvable(p) {
                assert_eq!(rec.h_hat.get(p), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn noise_deterministic_and_unit_variance() {
        let mut a = MeasurementMatrix::zeros(50);
        let mut b = MeasurementMatrix::zeros(50);
        add_noise(&mut a, 1.0, 42);
        add_noise(&mut b, 1.0, 42);
        assert_eq!(a.frobenius_distance(&b), 0.0);

        let mut c = MeasurementMatrix::zeros(50);
        add_noise(&mut c, 1.0, 43);
        assert!(a.frobenius_distance(&c) > 0.0);

        let mut sum = 0.0;
        let count = 101 * 101;
        for m in -50..=50 {
            for n in -50..=50 {
                sum += a.get(m, n).norm_sqr();
            }
        }
        let mean = sum / count as f64;
        assert!((mean - 1.0).abs() < 0.05, "sample variance {mean}");
    }

    #[test]
    fn noise_scales_and_zero_sigma_is_identity() {
        let mut a = MeasurementMatrix::zeros(4);
        a.set(0, 0, Complex64::new(1.0, 2.0));
        let before = a.get(0, 0);
        add_noise(&mut a, 0.0, 7);
        assert_eq!(a.get(0, 0), before);
        assert_eq!(noise_sample(9, 3, -2), noise_sample(9, 3, -2));
        assert_ne!(noise_sample(9, 3, -2), noise_sample(9, -2, 3));
    }
}
