//! Numerics for a point scatterer on a rectangular flat torus.
//!
//! The torus is R²/2πΛ₀ with Λ₀ = Z(1/a, 0) ⊕ Z(0, a); its Laplace spectrum
//! is the set of dual-lattice norms |ξ|² = a²m² + n²/a² with multiplicity.
//! Attaching a delta potential at a point x₀ and renormalizing produces, on
//! the even part of the spectrum, a rank-one style perturbation: new
//! eigenvalues interlace the old ones as roots of a regularized spectral
//! function, and the new eigenfunctions are truncated Green's functions.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`]: exact norm arithmetic, counting, annuli, gap statistics.
//! * [`rankone`]: the finite-dimensional model with explicit secular roots.
//! * [`spectral`]: the regularized spectral function and the perturbed
//!   spectrum on an interval, with certified tail control.
//! * [`greens`]: truncated Green's functions, matrix elements, observable
//!   averages, and position-space mass checks.
//! * [`sieves`]: density-one subsequence filters used to isolate the generic
//!   part of the new spectrum.

pub mod error;
pub mod greens;
pub mod lattice;
pub mod rankone;
pub(crate) mod roots;
pub mod sieves;
pub mod spectral;
pub mod util;
