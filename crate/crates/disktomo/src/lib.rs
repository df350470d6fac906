//! Forward simulation and linearized inversion for fluorescence diffuse
//! optical tomography of a single cell on the unit disk.
//!
//! The physical picture: a cell occupying a disk of radius `R` sits inside the
//! unit-disk tissue domain. An applied oscillating electric field builds up a
//! potential jump across the thin cell membrane; voltage-sensitive fluorophores
//! embedded in the membrane convert that jump into a fluorophore concentration.
//! Modulated light diffuses through the tissue, excites the fluorophores, and
//! the emitted light is measured on the outer boundary. Everything is circular,
//! so every field is carried as a complex Fourier series in the boundary angle
//! and every solve reduces to per-mode algebra.
//!
//! Pipeline, in module order:
//!
//! * [`specfun`] — complex-argument Bessel/Hankel functions, the transcendental
//!   kernel under every light-propagation formula.
//! * [`model`] — optical/membrane parameters, derived constants (wavenumber,
//!   fluorescence gain, modal source gains), spectra and measurement containers.
//! * [`forward`] — modal Green coefficients and fluence/intensity forward maps
//!   on the disk (and the radial Green coefficient on the sphere).
//! * [`cellfield`] — the electrostatic transmission problem for the membrane
//!   potential, its boundary spectra, and the first-order response of those
//!   spectra to a small membrane shape perturbation.
//! * [`inversion`] — the linearized measurement operator, data assembly, seeded
//!   noise, and the per-mode least-squares shape estimator with its variance.
//! * [`resolution`] — resolving-power analysis: the mode-energy integral, SNR
//!   resolving condition, small/large-argument thresholds, minimal resolving
//!   radius and maximal resolvable mode number.
//! * [`oracles`] — independent brute-force reference solvers (finite
//!   differences, collocation, quadrature) used by tests and the `selftest`
//!   command; production commands never call them.

pub mod cellfield;
pub mod forward;
pub mod inversion;
pub mod model;
pub mod oracles;
pub mod resolution;
pub mod specfun;
