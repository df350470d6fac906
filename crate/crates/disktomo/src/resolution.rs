//! Resolving-power analysis: which shape modes are recoverable at a given
//! cell radius and signal-to-noise ratio.
//!
//! The decision quantity for shape mode `p` under probe mode `z` is the sum
//! of `|F_{j, p+z-j}|^2` along one anti-diagonal of the measurement operator,
//! equal by Parseval's identity and Graf's addition theorem to
//! `(2/pi) * Int_0^{pi/2} |f_p(theta)|^2 dtheta` for a single function `f_p`
//! built from Bessel factors of the combined order `q = p + z`. A mode
//! resolves when that quantity strictly exceeds the reciprocal SNR.
//!
//! Two closed-form limits bracket the quadrature. For `|k| R` small the
//! integral collapses to the leading Bessel power; the combined order `q = 0`
//! needs one extra term because its leading coefficient cancels identically,
//! leaving a `(|k| R)^4` tail. For `|k| R` large the integrand saturates and
//! the threshold grows linearly in `|k|`, but only while `q < 2 |k| R`; past
//! that the integral is exponentially small and is reported as such rather
//! than by a meaningless number.

use std::fmt;

use num_complex::Complex64;

use crate::cellfield::electro_mode_coefficients;
use crate::inversion::{impulse_kernel, measurement_weight, Context};
use crate::specfun::{bessel_j, bessel_j_derivative, gauss_legendre_nodes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SmallKR,
    LargeKR,
    Exact,
}

/// Right-hand side of the resolving comparison in one asymptotic regime.
#[derive(Debug, Clone, Copy)]
pub struct RegimeThreshold {
    pub regime: Regime,
    pub value: f64,
    /// Set when the requested combined order decays exponentially and the
    /// series value would be meaningless.
    pub exponentially_small: bool,
    /// Set when `|k| R` is outside the regime's validity range by more than a
    /// factor of ten.
    pub regime_warning: bool,
}

#[derive(Debug)]
pub enum ResolutionError {
    QuadratureDidNotConverge { nodes: usize },
    NoRoot { lo: f64, hi: f64, target: f64 },
}

impl fmt::Display for ResolutionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolutionError::QuadratureDidNotConverge { nodes } => {
                write!(f, "quadrature did not converge within {nodes} nodes")
            }
            ResolutionError::NoRoot { lo, hi, target } => write!(
                f,
                "no radius in [{lo:e}, {hi:e}] reaches threshold {target:e}"
            ),
        }
    }
}

impl std::error::Error for ResolutionError {}

/// Probe mode paired with shape mode `p` when scanning resolution curves:
/// the choice that keeps the combined order `|p + z|` at most one.
pub fn curve_probe_mode(p: i32) -> i32 {
    if p == 0 {
        1
    } else {
        -p
    }
}

/// Flips `(q, z)` into the representation with `q >= 0`; legitimate because
/// every coefficient is even under simultaneous sign reversal.
fn normalized_orders(p: i32, z: i32) -> (i32, i32) {
    let q = p + z;
    if q < 0 {
        (-q, -z)
    } else {
        (q, z)
    }
}

/// The two scalar coefficients of `f_p`: `a` multiplies the derivative term
/// and scales with the concentration spectrum, `b` carries the membrane's
/// impulse response at combined order `q`.
fn ab_coefficients(q: i32, z: i32, ctx: &Context) -> (Complex64, Complex64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let gamma = ctx.gamma();
    let delta = ctx.params.delta_resp;
    let co = electro_mode_coefficients(z, ctx.radius, ctx.membrane.beta);
    let a = two_pi * gamma * (-delta * co.psi);
    let b = -two_pi * gamma * delta * impulse_kernel(q, z, ctx.radius, &ctx.membrane);
    (a, b)
}

/// The anti-diagonal profile function at angle `theta`.
pub fn f_p_eval(p: i32, theta: f64, z: i32, ctx: &Context) -> Complex64 {
    let (q, zn) = normalized_orders(p, z);
    let (a, b) = ab_coefficients(q, zn, ctx);
    let w = 2.0 * Complex64::I * ctx.k() * ctx.radius * theta.sin();
    a * w * bessel_j_derivative(q, w) + (a + ctx.radius * b) * bessel_j(q, w)
}

/// `(2/pi) * Int_0^{pi/2} |f_p|^2`, by Gauss-Legendre quadrature refined
/// until two consecutive node counts agree to twelve digits.
pub fn resolving_integral(p: i32, z: i32, ctx: &Context) -> Result<f64, ResolutionError> {
    let quarter_pi = 0.25 * std::f64::consts::PI;
    let mut prev = f64::NAN;
    let mut nodes = 16usize;
    while nodes <= 16384 {
        let mut acc = 0.0;
        for (x, w) in gauss_legendre_nodes(nodes) {
            let theta = quarter_pi * (x + 1.0);
            acc += w * f_p_eval(p, theta, z, ctx).norm_sqr();
        }
        // the (2/pi) prefactor and the pi/4 interval scaling
        let value = 0.5 * acc;
        if (value - prev).abs() <= 1e-12 * value.abs().max(1e-300) {
            return Ok(value);
        }
        prev = value;
        nodes *= 2;
    }
    Err(ResolutionError::QuadratureDidNotConverge { nodes: 16384 })
}

/// The same quantity summed directly over the operator entries, truncated at
/// `|j| <= j_max`. Slow; used to cross-check the quadrature.
pub fn resolving_mode_sum(p: i32, z: i32, j_max: i32, ctx: &Context) -> f64 {
    let q = p + z;
    let mut acc = 0.0;
    for j in -j_max..=j_max {
        acc += measurement_weight(j, q - j, z, ctx).norm_sqr();
    }
    acc
}

/// Strict resolving test for shape mode `p` at the given SNR.
pub fn resolving_condition(
    p: i32,
    z: i32,
    snr: f64,
    ctx: &Context,
) -> Result<bool, ResolutionError> {
    assert!(snr > 0.0);
    Ok(1.0 / snr < resolving_integral(p, z, ctx)?)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n as u64).map(|i| (i as f64).ln()).sum()
}

/// The small-`|k| R` closed form of the resolving integral at an explicit
/// radius; also the function inverted by [`min_radius`].
fn small_kr_at(p: i32, z: i32, radius: f64, base: &Context) -> f64 {
    let ctx = Context {
        radius,
        ..base.clone()
    };
    let (q, zn) = normalized_orders(p, z);
    let (a, b) = ab_coefficients(q, zn, &ctx);
    let kr = ctx.k().norm() * radius;
    if q == 0 {
        // leading coefficient a + R b cancels identically; next order
        return 1.5 * kr.powi(4) * a.norm_sqr();
    }
    let qf = q as f64;
    let ln_scale =
        2.0 * qf * (0.5 * kr).ln() + ln_factorial(2 * q as u32) - 4.0 * ln_factorial(q as u32);
    if ln_scale < -700.0 {
        return 0.0;
    }
    ln_scale.exp() * (a * (qf + 1.0) + radius * b).norm_sqr()
}

/// Closed-form resolving threshold in the requested regime.
pub fn asymptotic_threshold(
    regime: Regime,
    p: i32,
    z: i32,
    ctx: &Context,
) -> Result<RegimeThreshold, ResolutionError> {
    let kr = ctx.k().norm() * ctx.radius;
    match regime {
        Regime::Exact => Ok(RegimeThreshold {
            regime,
            value: resolving_integral(p, z, ctx)?,
            exponentially_small: false,
            regime_warning: false,
        }),
        Regime::SmallKR => Ok(RegimeThreshold {
            regime,
            value: small_kr_at(p, z, ctx.radius, ctx),
            exponentially_small: false,
            regime_warning: kr > 0.1,
        }),
        Regime::LargeKR => {
            let (q, zn) = normalized_orders(p, z);
            if q as f64 >= 2.0 * kr {
                return Ok(RegimeThreshold {
                    regime,
                    value: 0.0,
                    exponentially_small: true,
                    regime_warning: kr < 10.0,
                });
            }
            let (a, _) = ab_coefficients(q, zn, ctx);
            let y = 4.0 * ctx.k().re * ctx.radius;
            let y2 = y * y;
            let mut term = 1.0;
            let mut sum = 1.0;
            let mut n = 0u32;
            loop {
                let nf = n as f64;
                term *= y2 * 4.0 * (nf + 1.0) * (nf + 1.0)
                    / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0) * (2.0 * nf + 2.0) * (2.0 * nf + 3.0));
                sum += term;
                n += 1;
                if term < 1e-16 * sum || n > 10_000 {
                    break;
                }
            }
            let c = 4.0 * a.norm_sqr() / (std::f64::consts::PI * std::f64::consts::PI)
                * ctx.radius
                * sum;
            Ok(RegimeThreshold {
                regime,
                value: c * ctx.k().norm(),
                exponentially_small: false,
                regime_warning: kr < 10.0,
            })
        }
    }
}

/// Smallest cell radius at which shape mode `p` resolves at the given SNR, in
/// the small-`|k| R` regime. Bisection on a log grid after verifying that the
/// threshold is strictly increasing across the bracket.
pub fn min_radius(snr: f64, p: i32, z: i32, ctx: &Context) -> Result<f64, ResolutionError> {
    assert!(snr > 0.0);
    let target = 1.0 / snr;
    let lo0 = 1e-6;
    let hi0 = 1.0 - 1e-9;
    let mut prev = small_kr_at(p, z, lo0, ctx);
    let samples = 48;
    for i in 1..=samples {
        let r = lo0 * (hi0 / lo0).powf(i as f64 / samples as f64);
        let v = small_kr_at(p, z, r, ctx);
        // underflowed-to-zero pairs at the far left of the bracket are fine;
        // anything else must grow strictly
        assert!(
            v > prev || (v == 0.0 && prev == 0.0),
            "resolving threshold not increasing near R={r:e} (p={p}, z={z})"
        );
        prev = v;
    }
    let f_lo = small_kr_at(p, z, lo0, ctx);
    let f_hi = small_kr_at(p, z, hi0, ctx);
    if !(f_lo < target && target < f_hi) {
        return Err(ResolutionError::NoRoot {
            lo: lo0,
            hi: hi0,
            target,
        });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > 1e-8 * lo {
        let mid = (lo * hi).sqrt();
        if small_kr_at(p, z, mid, ctx) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Number of consecutively resolvable shape modes at radius `r` and the given
/// SNR, with each mode tested under its own probe-mode pairing. Mode 0 counts
/// on top of the consecutive run; the search stops at 64.
pub fn max_mode_number(r: f64, snr: f64, ctx: &Context) -> Result<i32, ResolutionError> {
    assert!(r > 0.0 && r < 1.0);
    assert!(snr > 0.0);
    let inv = 1.0 / snr;
    let threshold = |p: i32| -> Result<f64, ResolutionError> {
        let scan = Context {
            radius: r,
            ..ctx.clone()
        };
        resolving_integral(p, curve_probe_mode(p), &scan)
    };
    let mut run = 0;
    for cand in 1..=64 {
        if threshold(cand)? > inv {
            run = cand;
        } else {
            break;
        }
    }
    let zero_counts = threshold(0)? > inv;
    Ok(run + if zero_counts { 1 } else { 0 })
}
