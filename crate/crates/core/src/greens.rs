//! Green's functions G_λ = (Δ + λ)^{-1}δ_{x₀} on the torus and their
//! Fourier-side statistics.
//!
//! With the dual lattice Λ and c(ξ) = 1/(|ξ|² − λ), the Green's function has
//! the expansion
//!
//!   G_λ(x; x₀) = −(1/4π²) Σ_ξ e^{i⟨ξ, x−x₀⟩} c(ξ),
//!
//! and its annulus truncation G_{λ,L} keeps only ξ ∈ A(λ, L), the lattice
//! points with | |ξ|² − λ | < L. All norms here are taken in L²(dμ) with the
//! normalized measure dμ = dx/4π², so Parseval reads
//!
//!   ‖G_{λ,L}‖² = (1/16π⁴) Σ_{A(λ,L)} c(ξ)²,
//!
//! and the constant function 1 has norm 1. Matrix elements of the plane wave
//! e_ζ(x) = e^{i⟨ζ,x⟩} against the normalized truncation g = G_{λ,L}/‖G_{λ,L}‖
//! reduce to coefficient sums:
//!
//!   ⟨e_ζ g, g⟩ = e^{i⟨ζ,x₀⟩} · Σ c(ξ) c(ξ−ζ) / Σ c(ξ)²,
//!
//! where the numerator runs over ξ with both ξ and ξ−ζ inside the annulus.
//! That support convention is forced by the inner product itself (both
//! factors are the truncated function) and gives |⟨e_ζ g, g⟩| ≤ 1 by
//! Cauchy-Schwarz with equality at ζ = 0. The untruncated variant sums over
//! an exact band |ξ|² ≤ R and models both tails by the same density-π
//! integral π/(R−λ); the far-zone ratio c(ξ−ζ)/c(ξ) tends to 1 like
//! O(|ζ|/|ξ|), so the shared tail cancels from the ratio to well below the
//! band error. The x₀ dependence is a pure phase and is carried explicitly;
//! the canonical choice is x₀ = (0, 0).

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{annulus_points, LatticeSpec, LatticeVector, X_CAP};
use crate::util::Kahan;

/// Relative guard separating λ from the Laplace spectrum: contexts with a
/// lattice norm within 1e-12·(1 + |λ|) of λ are refused.
pub const NORM_GUARD: f64 = 1e-12;

/// Tail tolerance used for the full norm stored on a truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;

fn parseval_scale() -> f64 {
    16.0 * PI.powi(4)
}

/// A spectral parameter λ and source point x₀ on a fixed torus. λ may be
/// negative (bound states) but must stay away from every Laplace eigenvalue.
#[derive(Clone, Copy, Debug)]
pub struct GreensContext {
    pub spec: LatticeSpec,
    pub lambda: f64,
    pub x0: [f64; 2],
}

impl GreensContext {
    pub fn new(spec: LatticeSpec, lambda: f64, x0: [f64; 2]) -> Result<Self> {
        let ctx = GreensContext { spec, lambda, x0 };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Canonical source point x₀ = (0, 0).
    pub fn centered(spec: LatticeSpec, lambda: f64) -> Result<Self> {
        GreensContext::new(spec, lambda, [0.0, 0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda.abs() > X_CAP / 2.0 {
            return Err(Error::domain(format!(
                "lambda = {} outside the workable range |lambda| <= {:e}",
                self.lambda,
                X_CAP / 2.0
            )));
        }
        if !self.x0.iter().all(|c| c.is_finite()) {
            return Err(Error::domain("source point x0 must be finite"));
        }
        let guard = NORM_GUARD * (1.0 + self.lambda.abs());
        // A window three decades wider than the guard: empty means every norm
        // keeps a comfortable distance, nonempty means check each candidate.
        let probe = annulus_points(&self.spec, self.lambda, 1e3 * guard)?;
        for p in probe {
            if (p.norm_sq - self.lambda).abs() <= guard {
                return Err(Error::Pole { at: self.lambda, nearest: p.norm_sq });
            }
        }
        Ok(())
    }

    /// The plane-wave phase e^{i⟨ζ, x₀⟩}.
    fn phase(&self, zeta: (i64, i64)) -> Complex64 {
        let (zx, zy) = self.spec.embed(zeta.0, zeta.1);
        Complex64::from_polar(1.0, zx * self.x0[0] + zy * self.x0[1])
    }
}

/// ‖G_λ‖² = (1/16π⁴) Σ_ξ c(ξ)², summed exactly over |ξ|² ≤ R with the
/// integral tail π/(R−λ) for the rest.
///
/// R is chosen from the lattice-counting remainder |N(t) − πt| ≤ c₁√t + c₂
/// (c₁ = 4πd, c₂ = πd² + 1, d² = a² + 1/a²): for R ≥ max(2λ, 64) partial
/// summation bounds the replacement error of the undivided sum by
/// (44/3)c₁·R^{−3/2} + 12c₂·R^{−2}, and R pushes that below tail_tol·16π⁴,
/// so the returned value carries tail error below tail_tol. The exact band
/// itself is subject to ordinary rounding, which matters only relative to
/// the near-pole terms the band keeps exactly.
pub fn green_norm_sq(ctx: &GreensContext, tail_tol: f64) -> Result<f64> {
    ctx.validate()?;
    green_norm_sq_with_floor(ctx, tail_tol, 0.0)
}

/// As `green_norm_sq` but with the band forced out to at least `r_floor`,
/// so a truncation can never out-collect the full norm it is compared to.
fn green_norm_sq_with_floor(ctx: &GreensContext, tail_tol: f64, r_floor: f64) -> Result<f64> {
    if !(tail_tol > 0.0) || tail_tol > 1.0 {
        return Err(Error::domain("tail_tol must lie in (0, 1]"));
    }
    let spec = ctx.spec;
    let lambda = ctx.lambda;
    let a_sq = spec.a_sq();
    let d_sq = a_sq + 1.0 / a_sq;
    let c1 = 4.0 * PI * d_sq.sqrt();
    let c2 = PI * d_sq + 1.0;
    let undivided = tail_tol * parseval_scale();
    let r = (44.0 / 3.0 * c1 / undivided)
        .powf(2.0 / 3.0)
        .max((12.0 * c2 / undivided).sqrt())
        .max(2.0 * lambda)
        .max(r_floor)
        .max(64.0);
    if r > 2f64.powi(31) {
        return Err(Error::capacity(format!(
            "tail_tol = {tail_tol:e} needs exact summation to R = {r:.2e}; not worth anyone's time"
        )));
    }

    let m_max = (r / a_sq).sqrt().floor() as i64;
    let n_cap = (r * a_sq).sqrt().floor() as i64;
    spec.check_key_capacity(m_max, n_cap)?;
    let chunk = (m_max / 256 + 1).max(1);
    let starts: Vec<i64> = (0..=m_max).step_by(chunk as usize).collect();
    let partials: Vec<f64> = starts
        .into_par_iter()
        .map(|m_start| {
            let mut acc = Kahan::new();
            for m in m_start..(m_start + chunk).min(m_max + 1) {
                let wm = if m == 0 { 1.0 } else { 2.0 };
                let mm = a_sq * (m as f64) * (m as f64);
                let n_max = ((r - mm).max(0.0) * a_sq).sqrt().floor() as i64;
                for n in 0..=n_max {
                    let wn = if n == 0 { 1.0 } else { 2.0 };
                    // Canonical key-based norms keep the near-pole terms
                    // bit-identical with the annulus and table paths.
                    let key = spec.key(m, n).expect("capacity pre-checked");
                    let s = spec.norm_of_key(&key);
                    if s <= r {
                        let c = 1.0 / (s - lambda);
                        acc.add(wm * wn * c * c);
                    }
                }
            }
            acc.value()
        })
        .collect();
    let mut total = Kahan::new();
    for p in partials {
        total.add(p);
    }
    total.add(PI / (r - lambda));
    Ok(total.value() / parseval_scale())
}

/// The annulus truncation G_{λ,L}: coefficients over A(λ, L) in norm order,
/// its exact Parseval norm, and the full norm it is cut from.
#[derive(Clone, Debug)]
pub struct GreensTruncation {
    pub context: GreensContext,
    pub l: f64,
    /// (ξ, c(ξ)) over A(λ, L), ordered by norm then coordinates.
    pub coeffs: Vec<(LatticeVector, f64)>,
    /// (1/16π⁴) Σ_{A(λ,L)} c(ξ)²; zero for an empty annulus.
    pub norm_sq_trunc: f64,
    /// ‖G_λ‖² over the whole lattice, tail error below [`DEFAULT_TAIL_TOL`];
    /// always ≥ `norm_sq_trunc`.
    pub norm_sq_full: f64,
}

impl GreensTruncation {
    /// An empty annulus: the truncation is the zero function and every
    /// caller decides for itself whether that is acceptable.
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Σ c(ξ)² without the Parseval scale; the denominator of every
    /// normalized coefficient-space ratio.
    fn raw_sum_sq(&self) -> f64 {
        let mut acc = Kahan::new();
        for (_, c) in &self.coeffs {
            acc.add(c * c);
        }
        acc.value()
    }
}

/// Cut G_λ to the annulus A(λ, L).
pub fn truncate(ctx: &GreensContext, l: f64) -> Result<GreensTruncation> {
    ctx.validate()?;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::domain("truncation width L must be positive"));
    }
    let pts = annulus_points(&ctx.spec, ctx.lambda, l)?;
    let mut coeffs = Vec::with_capacity(pts.len());
    let mut acc = Kahan::new();
    for p in pts {
        let c = 1.0 / (p.norm_sq - ctx.lambda);
        acc.add(c * c);
        coeffs.push((p, c));
    }
    let norm_sq_trunc = acc.value() / parseval_scale();
    // The band of the full norm must reach past the annulus, else a huge L
    // could collect terms the banded sum replaced by its integral tail.
    let norm_sq_full =
        green_norm_sq_with_floor(ctx, DEFAULT_TAIL_TOL, (ctx.lambda + l).max(0.0) + 1.0)?;
    Ok(GreensTruncation { context: *ctx, l, coeffs, norm_sq_trunc, norm_sq_full })
}

/// How much of G_λ an annulus truncation misses.
#[derive(Clone, Copy, Debug)]
pub struct TruncationError {
    /// The exact L² defect angle √(1 − ‖G_{λ,L}‖²/‖G_λ‖²); also equals
    /// ‖G_λ − G_{λ,L}‖/‖G_λ‖ because the truncation is an orthogonal
    /// projection. An empty annulus gives 1.
    pub defect: f64,
    /// Triangle bound 2‖G_λ − G_{λ,L}‖/‖G_λ‖ = 2·defect on the distance
    /// between the normalized functions g and g_L.
    pub bound: f64,
}

pub fn truncation_error(ctx: &GreensContext, l: f64, tail_tol: f64) -> Result<TruncationError> {
    let trunc = truncate(ctx, l)?;
    let full = green_norm_sq_with_floor(ctx, tail_tol, (ctx.lambda + l).max(0.0) + 1.0)?;
    let ratio = (trunc.norm_sq_trunc / full).clamp(0.0, 1.0);
    let defect = (1.0 - ratio).sqrt();
    Ok(TruncationError { defect, bound: 2.0 * defect })
}

/// Coefficient support for a matrix element: an annulus truncation or the
/// whole lattice through an exact band with integral tails.
#[derive(Clone, Copy, Debug)]
pub enum Cutoff {
    Truncated(f64),
    Full,
}

/// ⟨e_ζ g, g⟩ for the normalized annulus truncation g = G_{λ,L}/‖G_{λ,L}‖.
/// Exactly 1 at ζ = 0, and |result| ≤ 1 always (Cauchy-Schwarz: the shifted
/// support sum is the annulus sum again).
pub fn truncated_matrix_element(
    trunc: &GreensTruncation,
    zeta: &LatticeVector,
) -> Result<Complex64> {
    if trunc.is_empty() {
        return Err(Error::domain(
            "empty truncation has no matrix elements; enlarge L",
        ));
    }
    if zeta.m == 0 && zeta.n == 0 {
        // Numerator and denominator are the same sum term by term.
        return Ok(Complex64::new(1.0, 0.0));
    }
    let by_coord: HashMap<(i64, i64), f64> =
        trunc.coeffs.iter().map(|(p, c)| ((p.m, p.n), *c)).collect();
    let mut num = Kahan::new();
    for (p, c) in &trunc.coeffs {
        if let Some(shifted) = by_coord.get(&(p.m - zeta.m, p.n - zeta.n)) {
            num.add(c * shifted);
        }
    }
    let ratio = num.value() / trunc.raw_sum_sq();
    Ok(trunc.context.phase((zeta.m, zeta.n)) * ratio)
}

/// ⟨e_ζ g, g⟩ for the normalized full Green's function, through an exact
/// band |ξ|² ≤ R with the shared integral tail π/(R−λ) on numerator and
/// denominator. The band reaches at least (√λ + 2|ζ|)² so the shifted
/// factor never meets the spectrum inside the modeled tail.
pub fn full_matrix_element(
    ctx: &GreensContext,
    zeta: &LatticeVector,
    tail_tol: f64,
) -> Result<Complex64> {
    ctx.validate()?;
    if !(tail_tol > 0.0) || tail_tol > 1.0 {
        return Err(Error::domain("tail_tol must lie in (0, 1]"));
    }
    if zeta.m == 0 && zeta.n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let spec = ctx.spec;
    let lambda = ctx.lambda;
    let a_sq = spec.a_sq();
    let d_sq = a_sq + 1.0 / a_sq;
    let c1 = 4.0 * PI * d_sq.sqrt();
    let c2 = PI * d_sq + 1.0;
    let undivided = tail_tol * parseval_scale();
    let zeta_len = zeta.norm_sq.sqrt();
    let r = (44.0 / 3.0 * c1 / undivided)
        .powf(2.0 / 3.0)
        .max((12.0 * c2 / undivided).sqrt())
        .max(2.0 * lambda)
        .max((lambda.max(0.0).sqrt() + 2.0 * zeta_len).powi(2) + 1.0)
        .max(64.0);
    if r > 2f64.powi(31) {
        return Err(Error::capacity(format!(
            "tail_tol = {tail_tol:e} needs exact summation to R = {r:.2e}; not worth anyone's time"
        )));
    }

    let m_max = (r / a_sq).sqrt().floor() as i64;
    let n_cap = (r * a_sq).sqrt().floor() as i64;
    spec.check_key_capacity(m_max + zeta.m.abs(), n_cap + zeta.n.abs())?;
    let chunk = (m_max / 128 + 1).max(1);
    let starts: Vec<i64> = (-m_max..=m_max).step_by(chunk as usize).collect();
    let sums: Vec<(f64, f64)> = starts
        .into_par_iter()
        .map(|m_start| {
            let mut num = Kahan::new();
            let mut den = Kahan::new();
            for m in m_start..(m_start + chunk).min(m_max + 1) {
                let mm = a_sq * (m as f64) * (m as f64);
                let n_max = ((r - mm).max(0.0) * a_sq).sqrt().floor() as i64;
                for n in -n_max..=n_max {
                    let key = spec.key(m, n).expect("capacity pre-checked");
                    let s = spec.norm_of_key(&key);
                    if s <= r {
                        let c = 1.0 / (s - lambda);
                        den.add(c * c);
                        let shifted_key =
                            spec.key(m - zeta.m, n - zeta.n).expect("capacity pre-checked");
                        let t = spec.norm_of_key(&shifted_key);
                        num.add(c / (t - lambda));
                    }
                }
            }
            (num.value(), den.value())
        })
        .collect();
    let mut num = Kahan::new();
    let mut den = Kahan::new();
    for (n, d) in sums {
        num.add(n);
        den.add(d);
    }
    let tail = PI / (r - lambda);
    num.add(tail);
    den.add(tail);
    Ok(ctx.phase((zeta.m, zeta.n)) * (num.value() / den.value()))
}

/// ⟨e_ζ g, g⟩ with the support chosen by `cutoff`.
pub fn matrix_element(
    ctx: &GreensContext,
    cutoff: Cutoff,
    zeta: &LatticeVector,
    tail_tol: f64,
) -> Result<Complex64> {
    match cutoff {
        Cutoff::Truncated(l) => truncated_matrix_element(&truncate(ctx, l)?, zeta),
        Cutoff::Full => full_matrix_element(ctx, zeta, tail_tol),
    }
}

/// A trigonometric polynomial Σ a_ζ e_ζ with finitely many terms, stored by
/// the integer coordinates of ζ. `real_valued` records whether the
/// coefficients satisfy a_{−ζ} = conj(a_ζ) exactly.
#[derive(Clone, Debug)]
pub struct Observable {
    terms: Vec<((i64, i64), Complex64)>,
    real_valued: bool,
}

impl Observable {
    pub fn new(terms: Vec<((i64, i64), Complex64)>) -> Result<Self> {
        let mut seen: HashMap<(i64, i64), Complex64> = HashMap::new();
        for ((m, n), a) in &terms {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::domain("observable coefficients must be finite"));
            }
            if seen.insert((*m, *n), *a).is_some() {
                return Err(Error::domain(format!(
                    "duplicate observable frequency ({m}, {n})"
                )));
            }
        }
        let real_valued = terms.iter().all(|((m, n), a)| {
            seen.get(&(-m, -n)).map_or(false, |b| b.re == a.re && b.im == -a.im)
        });
        let mut terms = terms;
        terms.sort_by_key(|((m, n), _)| (*m, *n));
        Ok(Observable { terms, real_valued })
    }

    /// The constant function with value `c`.
    pub fn constant(c: f64) -> Self {
        Observable { terms: vec![((0, 0), Complex64::new(c, 0.0))], real_valued: true }
    }

    /// cos⟨ζ, x⟩ = ½ e_ζ + ½ e_{−ζ}.
    pub fn cosine(zeta: (i64, i64)) -> Result<Self> {
        if zeta == (0, 0) {
            return Ok(Observable::constant(1.0));
        }
        Observable::new(vec![
            (zeta, Complex64::new(0.5, 0.0)),
            ((-zeta.0, -zeta.1), Complex64::new(0.5, 0.0)),
        ])
    }

    /// The mean over the torus: a_0.
    pub fn mean(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|((m, n), _)| *m == 0 && *n == 0)
            .map_or(Complex64::new(0.0, 0.0), |(_, a)| *a)
    }

    pub fn terms(&self) -> &[((i64, i64), Complex64)] {
        &self.terms
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }
}

/// ∫ a(x) |g(x)|² dμ = Σ_ζ a_ζ ⟨e_ζ g, g⟩ for the normalized (truncated or
/// full) Green's function. Real-valued observables come back with imaginary
/// residue at rounding scale, below 1e-10.
pub fn observable_average(
    ctx: &GreensContext,
    observable: &Observable,
    cutoff: Cutoff,
    tail_tol: f64,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    match cutoff {
        Cutoff::Truncated(l) => {
            let trunc = truncate(ctx, l)?;
            for ((m, n), a) in &observable.terms {
                let zeta = ctx.spec.vector(*m, *n)?;
                acc += a * truncated_matrix_element(&trunc, &zeta)?;
            }
        }
        Cutoff::Full => {
            for ((m, n), a) in &observable.terms {
                let zeta = ctx.spec.vector(*m, *n)?;
                acc += a * full_matrix_element(ctx, &zeta, tail_tol)?;
            }
        }
    }
    Ok(acc)
}

/// G_{λ,L}(x; x₀) = −(1/4π²) Σ_{A(λ,L)} e^{i⟨ξ, x−x₀⟩} c(ξ), unnormalized.
/// Only the truncated series is pointwise summable in any usable sense.
pub fn eval_pointwise(trunc: &GreensTruncation, x: [f64; 2]) -> Complex64 {
    let dx = [x[0] - trunc.context.x0[0], x[1] - trunc.context.x0[1]];
    let spec = trunc.context.spec;
    let mut re = Kahan::new();
    let mut im = Kahan::new();
    for (p, c) in &trunc.coeffs {
        let (ex, ey) = spec.embed(p.m, p.n);
        let angle = ex * dx[0] + ey * dx[1];
        re.add(c * angle.cos());
        im.add(c * angle.sin());
    }
    let scale = -1.0 / (4.0 * PI * PI);
    Complex64::new(scale * re.value(), scale * im.value())
}

/// |g_{λ,L}(x)|² on the uniform n×n grid x_{jk} = (j·s₁/n, k·s₂/n) over the
/// fundamental domain (s₁, s₂), row-major in j. The grid mean estimates
/// ∫|g|² dμ = 1 and is exact once n exceeds the coefficient frequency
/// spread (no aliasing).
///
/// On this grid the phases collapse to roots of unity: ⟨ξ, x_{jk}⟩ =
/// 2π(mj + nk)/n for ξ = (m·a, n/a), so the evaluation runs through a
/// twiddle table in two stages (inner sums over n per distinct m, then the
/// m-sums per point) at O(#coeffs·n + #rows·n²) instead of O(#coeffs·n²).
pub fn density_grid(trunc: &GreensTruncation, n: usize) -> Result<Vec<f64>> {
    if trunc.is_empty() {
        return Err(Error::domain("empty truncation has no density"));
    }
    if !(2..=4096).contains(&n) {
        return Err(Error::domain("grid size must lie in 2..=4096"));
    }
    let nn = n as i64;
    let twiddle: Vec<Complex64> = (0..n)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64))
        .collect();

    // Fold the source-point phase into the coefficients and group by m.
    let spec = trunc.context.spec;
    let x0 = trunc.context.x0;
    let mut rows: Vec<(i64, Vec<(i64, Complex64)>)> = Vec::new();
    for (p, c) in &trunc.coeffs {
        let (ex, ey) = spec.embed(p.m, p.n);
        let shifted = Complex64::from_polar(*c, -(ex * x0[0] + ey * x0[1]));
        match rows.binary_search_by_key(&p.m, |(m, _)| *m) {
            Ok(i) => rows[i].1.push((p.n, shifted)),
            Err(i) => rows.insert(i, (p.m, vec![(p.n, shifted)])),
        }
    }

    // Stage one: row_m[k] = Σ_n c̃(m, n)·ω^{nk}.
    let staged: Vec<(i64, Vec<Complex64>)> = rows
        .into_par_iter()
        .map(|(m, entries)| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for k in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (nc, c) in &entries {
                    acc += c * twiddle[(nc * k as i64).rem_euclid(nn) as usize];
                }
                row[k] = acc;
            }
            (m, row)
        })
        .collect();

    // Stage two: G(x_{jk}) ∝ Σ_m ω^{mj}·row_m[k]; store |g|² directly.
    let raw_sum_sq = trunc.raw_sum_sq();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for (m, row) in &staged {
                let w = twiddle[(m * j as i64).rem_euclid(nn) as usize];
                for k in 0..n {
                    line[k] += w * row[k];
                }
            }
            line.into_iter().map(move |z| z.norm_sqr() / raw_sum_sq)
        })
        .collect();
    Ok(out)
}

/// Grid-mean estimate of ∫ |g_{λ,L}|² dμ; equals 1 up to aliasing.
pub fn quadrature_mass(trunc: &GreensTruncation, n: usize) -> Result<f64> {
    let grid = density_grid(trunc, n)?;
    let mut acc = Kahan::new();
    for v in &grid {
        acc.add(*v);
    }
    Ok(acc.value() / grid.len() as f64)
}

/// Outcome of sweeping ‖G_λ‖·λ^ε over a set of spectral parameters.
#[derive(Clone, Copy, Debug)]
pub struct NormBoundSweep {
    pub epsilon: f64,
    /// min over the sweep of ‖G_λ‖·λ^ε; the lower-bound constant the data
    /// actually supports.
    pub min_constant: f64,
    /// The λ attaining the minimum.
    pub worst_lambda: f64,
    pub evaluated: usize,
}

/// Evaluate ‖G_λ‖·λ^ε over positive spectral parameters and report the
/// worst case.
pub fn norm_lower_bound(
    spec: &LatticeSpec,
    lambdas: &[f64],
    epsilon: f64,
    tail_tol: f64,
) -> Result<NormBoundSweep> {
    if lambdas.is_empty() {
        return Err(Error::domain("norm bound sweep needs at least one lambda"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain("epsilon must lie in [0, 1]"));
    }
    let mut best = (f64::INFINITY, f64::NAN);
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::domain("norm bound sweep needs lambda > 0"));
        }
        let ctx = GreensContext::centered(*spec, lambda)?;
        let norm = green_norm_sq(&ctx, tail_tol)?.sqrt();
        let constant = norm * lambda.powf(epsilon);
        if constant < best.0 {
            best = (constant, lambda);
        }
    }
    Ok(NormBoundSweep {
        epsilon,
        min_constant: best.0,
        worst_lambda: best.1,
        evaluated: lambdas.len(),
    })
}
