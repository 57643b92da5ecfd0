//! Finite-dimensional rank-one perturbations H = H₀ + α·vvᵀ.
//!
//! With H₀ = diag(ε₁ ≤ … ≤ ε_D) and v expanded in the H₀ eigenbasis, every
//! eigenvalue E of H outside Spec(H₀) solves the secular equation
//!
//! ```text
//!   Σ_n ⟨v,φ_n⟩² / (E − ε_n) = 1/α,
//! ```
//!
//! with eigenvector coefficients u_n ∝ ⟨v,φ_n⟩/(E − ε_n). The left side is
//! strictly decreasing between consecutive poles, so each interval between
//! distinct coupled levels holds exactly one root, plus one exterior root on
//! the side of the coupling sign. Levels orthogonal to v, and the orthogonal
//! complement of v inside a degenerate coupled level, stay eigenvectors with
//! their old eigenvalues; those indices are reported as `untouched`.
//!
//! This model is small enough to cross-check against a dense symmetric
//! eigensolver, which is exactly what it is here for: the same
//! pole-interlacing-bisection mechanics reappear at infinite dimension in
//! [`crate::spectral`], where no dense oracle exists.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bisect, bracket_between_poles, StopRule};

/// Largest dimension the dense cross-check accepts.
pub const DENSE_DIM_CAP: usize = 1024;

/// Diagonal model data: H = diag(eps) + alpha·vvᵀ in the H₀ eigenbasis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteModel {
    /// Eigenvalues of H₀, ascending.
    pub eps: Vec<f64>,
    /// Coefficients ⟨v, φ_n⟩.
    pub v_coeffs: Vec<f64>,
    /// Coupling strength, nonzero.
    pub alpha: f64,
}

impl FiniteModel {
    pub fn new(eps: Vec<f64>, v_coeffs: Vec<f64>, alpha: f64) -> Result<Self> {
        let model = FiniteModel { eps, v_coeffs, alpha };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.len() != self.v_coeffs.len() {
            return Err(Error::domain(
                "eps and v_coeffs must be nonempty and equally long",
            ));
        }
        if self.eps.iter().any(|e| !e.is_finite())
            || self.v_coeffs.iter().any(|v| !v.is_finite())
            || !self.alpha.is_finite()
        {
            return Err(Error::domain("model entries must be finite"));
        }
        if self.eps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("eps must be ascending"));
        }
        if self.alpha == 0.0 {
            return Err(Error::domain("alpha must be nonzero"));
        }
        if self.v_coeffs.iter().all(|&v| v == 0.0) {
            return Err(Error::domain("v must have at least one nonzero coefficient"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.eps.len()
    }

    /// Distinct pole locations (levels with nonzero aggregated coupling) and
    /// their summed squared couplings, ascending. Levels are merged on exact
    /// float equality of ε, matching the dense matrix they represent.
    fn coupled_poles(&self) -> Vec<(f64, f64)> {
        let mut poles: Vec<(f64, f64)> = Vec::new();
        for (&e, &v) in self.eps.iter().zip(&self.v_coeffs) {
            match poles.last_mut() {
                Some((p, w)) if *p == e => *w += v * v,
                _ => poles.push((e, v * v)),
            }
        }
        poles.retain(|&(_, w)| w > 0.0);
        poles
    }
}

/// Roots and eigenvectors of the perturbed model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecularSolution {
    /// Perturbed eigenvalues, ascending.
    pub new_eigenvalues: Vec<f64>,
    /// Normalized coefficient vectors u_n = ⟨v,φ_n⟩/(E−ε_n), one per root.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Indices whose eigenvalue survives unchanged: zero-coupling indices,
    /// and all but the first index of every degenerate coupled level.
    pub untouched: Vec<usize>,
}

/// Σ_n v_n²/(E−ε_n) − 1/α, the secular residual at E.
///
/// Strictly decreasing in E between consecutive poles; a root means E is a
/// perturbed eigenvalue.
pub fn secular_eval(model: &FiniteModel, e: f64) -> Result<f64> {
    model.validate()?;
    if !e.is_finite() {
        return Err(Error::domain("secular_eval needs finite E"));
    }
    let mut sum = 0.0;
    for (i, (&eps, &v)) in model.eps.iter().zip(&model.v_coeffs).enumerate() {
        if v == 0.0 {
            continue;
        }
        let d = e - eps;
        if d.abs() < 1e-300 {
            return Err(Error::Pole { at: e, nearest: model.eps[i] });
        }
        sum += v * v / d;
    }
    Ok(sum - 1.0 / model.alpha)
}

/// All roots of the secular equation with their eigenvectors.
///
/// One root strictly between each pair of consecutive distinct coupled
/// levels, plus one exterior root above the top level when α > 0 (below the
/// bottom level when α < 0). Bisection runs until the bracket is within
/// 1e-12·(1+|E|) *and* the secular residual is within 1e-10·(1+1/|α|),
/// stopping early only at the f64 spacing floor.
pub fn solve_secular(model: &FiniteModel) -> Result<SecularSolution> {
    model.validate()?;
    let poles = model.coupled_poles();
    debug_assert!(!poles.is_empty());
    let total_coupling: f64 = poles.iter().map(|&(_, w)| w).sum();
    // Bracket tolerance well inside the documented 1e-12·(1+|E|) so the
    // root *location* error stays below 1e-12 even for |E| of a few.
    let rule = StopRule {
        bracket_rel: 2e-13,
        residual_abs: 1e-10 * (1.0 + 1.0 / model.alpha.abs()),
        max_iter: 200,
    };
    let g = |e: f64| {
        let mut sum = 0.0;
        for &(p, w) in &poles {
            sum += w / (e - p);
        }
        sum - 1.0 / model.alpha
    };

    let mut found = Vec::with_capacity(poles.len());

    // Exterior root below the bottom pole (α < 0 only): g goes from −1/α > 0
    // at E → −∞ down to −∞ at the pole.
    if model.alpha < 0.0 {
        let p0 = poles[0].0;
        let mut span = total_coupling * model.alpha.abs() + 1.0;
        let mut lo = p0 - span;
        for _ in 0..64 {
            if g(lo) > 0.0 {
                break;
            }
            span *= 2.0;
            lo = p0 - span;
        }
        let hi = bracket_between_poles(g, f64::NEG_INFINITY, p0, 1e-9 * (1.0 + p0.abs()))
            .map(|(_, hi)| hi)
            .ok_or_else(|| Error::range("exterior root indistinguishable from the bottom level"))?;
        found.push(bisect(g, lo, hi, &rule));
    }

    for w in poles.windows(2) {
        let (p_lo, p_hi) = (w[0].0, w[1].0);
        let (lo, hi) = bracket_between_poles(g, p_lo, p_hi, 1e-10 * (p_hi - p_lo))
            .ok_or_else(|| {
                Error::range(format!(
                    "root in ({p_lo}, {p_hi}) indistinguishable from an endpoint"
                ))
            })?;
        found.push(bisect(g, lo, hi, &rule));
    }

    // Exterior root above the top pole (α > 0): g falls from +∞ to −1/α < 0.
    if model.alpha > 0.0 {
        let p_top = poles[poles.len() - 1].0;
        let lo = bracket_between_poles(g, p_top, f64::INFINITY, 1e-9 * (1.0 + p_top.abs()))
            .map(|(lo, _)| lo)
            .ok_or_else(|| Error::range("exterior root indistinguishable from the top level"))?;
        let mut span = total_coupling * model.alpha + 1.0;
        let mut hi = p_top + span;
        for _ in 0..64 {
            if g(hi) < 0.0 {
                break;
            }
            span *= 2.0;
            hi = p_top + span;
        }
        found.push(bisect(g, lo, hi, &rule));
    }

    // The eigenvector defect of the pair (E, u) is |α|·‖v‖·|g(E)|/‖raw(E)‖
    // with raw_n = v_n/(E−ε_n), so roots far from every pole (small ‖raw‖)
    // need a tighter secular residual than the default rule demands. Resume
    // those bisections with the per-root requirement.
    let v_norm = model.v_coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let raw = |e: f64| -> Vec<f64> {
        model
            .eps
            .iter()
            .zip(&model.v_coeffs)
            .map(|(&eps, &v)| if v == 0.0 { 0.0 } else { v / (e - eps) })
            .collect()
    };
    let mut roots = Vec::with_capacity(found.len());
    let mut eigenvectors = Vec::with_capacity(found.len());
    for mut f in found {
        let norm_of = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let needed = 0.5 * 1e-8 * norm_of(&raw(f.root)) / (model.alpha.abs() * v_norm);
        // Resume only from a bracket that stopped on the rule; one that already
        // hit the f64 spacing floor has nothing left to give.
        if f.converged && f.residual.abs() > needed {
            let tighter = StopRule { residual_abs: needed, ..rule };
            f = bisect(g, f.lo, f.hi, &tighter);
        }
        let mut u = raw(f.root);
        let norm = norm_of(&u);
        for x in &mut u {
            *x /= norm;
        }
        roots.push(f.root);
        eigenvectors.push(u);
    }

    // Zero-coupling indices, and repeats of a coupled level beyond its first
    // index: the level keeps an eigenvector orthogonal to v.
    let mut untouched = Vec::new();
    let mut level_seen_coupled: Option<f64> = None;
    for (i, (&e, &v)) in model.eps.iter().zip(&model.v_coeffs).enumerate() {
        if v == 0.0 {
            untouched.push(i);
            continue;
        }
        match level_seen_coupled {
            Some(prev) if prev == e => untouched.push(i),
            _ => level_seen_coupled = Some(e),
        }
    }

    Ok(SecularSolution { new_eigenvalues: roots, eigenvectors, untouched })
}

/// Full spectrum of diag(eps) + α·vvᵀ from a dense symmetric eigensolver,
/// ascending. Independent of the secular machinery; used to cross-check it.
pub fn dense_oracle(model: &FiniteModel) -> Result<Vec<f64>> {
    model.validate()?;
    let d = model.dim();
    if d > DENSE_DIM_CAP {
        return Err(Error::capacity(format!(
            "dense cross-check capped at dimension {DENSE_DIM_CAP}, got {d}"
        )));
    }
    let mut h = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            h[(i, j)] = model.alpha * model.v_coeffs[i] * model.v_coeffs[j];
        }
        h[(i, i)] += model.eps[i];
    }
    let mut eigs: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Seeded random model: ε ascending in [0, d] with consecutive spacing at
/// least 1e-2, couplings bounded away from zero, α in ±[0.5, 2].
/// Deterministic in (seed, d).
///
/// The spacing and coupling floors keep the models well conditioned: at a
/// near-degenerate pair of levels the secular slope blows up and no f64 can
/// realize the residual tolerances, which would make the cross-check test
/// the conditioning of the draw instead of the solver.
pub fn random_model(seed: u64, d: usize) -> FiniteModel {
    assert!(d >= 1, "model needs at least one level");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eps: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..d as f64)).collect();
    eps.sort_by(f64::total_cmp);
    for i in 1..d {
        if eps[i] < eps[i - 1] + 1e-2 {
            eps[i] = eps[i - 1] + 1e-2;
        }
    }
    let v_coeffs: Vec<f64> = (0..d)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * rng.random_range(0.1..1.0)
        })
        .collect();
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let alpha = sign * rng.random_range(0.5..2.0);
    FiniteModel { eps, v_coeffs, alpha }
}
