//! Density-one sieves over the perturbed spectrum.
//!
//! Three filters, each keeping the eigenvalues for which a matrix-element
//! or truncation argument goes through:
//!
//! * Λ_g keeps λ_k ∈ (n_k, n_{k+1}) when the hosting gap is small,
//!   n_{k+1} − n_k ≤ n_k^ε;
//! * Λ_ζ keeps λ when the annulus A(λ, λ^δ) avoids the near-orthogonality
//!   set S_ζ = {η ≠ 0 : |⟨η, ζ⟩| ≤ (|η|²)^δ}, the lattice directions whose
//!   coefficient products a plane wave e_ζ can pair up;
//! * Λ_J intersects Λ_g with Λ_ζ over every nonzero dual ζ with |ζ| ≤ J,
//!   one representative per reflection orbit (the filters are invariant
//!   under (m, n) ↦ (±m, ±n)).
//!
//! The legal window for δ is (θ/2, 1/2 − θ) with θ the annulus-counting
//! exponent; it is nonempty exactly because θ < 1/3. Excluded eigenvalues
//! carry a witness, the oversized gap or the offending vector η, and every
//! witness re-verifies against the definitions by construction.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{annulus_points, LatticeSpec, LatticeVector, X_CAP};
use crate::spectral::PerturbedSpectrum;
use crate::util::{dyadic_windows, fmt_sig17, loglog_slope};

/// Annulus-counting exponent: #A(λ, L) = 2πL + O(λ^θ).
pub const DEFAULT_THETA: f64 = 131.0 / 416.0;

/// Exponents steering the sieves.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SieveParams {
    /// Annulus exponent δ: the filter looks at A(λ, λ^δ) and the threshold
    /// (|η|²)^δ. Must lie strictly inside (θ/2, 1/2 − θ).
    pub delta: f64,
    /// Gap-filter exponent ε ≥ 0: keep λ_k when its hosting gap is at
    /// most n_k^ε. Any fixed ε > 0 keeps asymptotic density one; smaller
    /// ε filters harder.
    pub epsilon_gap: f64,
    /// Annulus-counting exponent θ < 1/3.
    pub theta: f64,
}

impl Default for SieveParams {
    fn default() -> Self {
        SieveParams { delta: 0.17, epsilon_gap: 0.25, theta: DEFAULT_THETA }
    }
}

impl SieveParams {
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta <= 0.0 || self.theta >= 1.0 / 3.0 {
            return Err(Error::domain(format!(
                "theta = {} leaves no room for delta; need 0 < theta < 1/3",
                self.theta
            )));
        }
        let (lo, hi) = (self.theta / 2.0, 0.5 - self.theta);
        if !self.delta.is_finite() || self.delta <= lo || self.delta >= hi {
            return Err(Error::domain(format!(
                "delta = {} outside the legal window ({lo:.6}, {hi:.6})",
                self.delta
            )));
        }
        if !self.epsilon_gap.is_finite() || self.epsilon_gap < 0.0 {
            return Err(Error::domain("epsilon_gap must be a finite value >= 0"));
        }
        Ok(())
    }

    /// The exponent 1 − δ' = 1 − (1/2 − θ − δ) bounding the growth of the
    /// exclusion set B_ζ.
    pub fn b_zeta_exponent_bound(&self) -> f64 {
        1.0 - (0.5 - self.theta - self.delta)
    }
}

/// Why an eigenvalue was dropped.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum Witness {
    /// The hosting gap n_{k+1} − n_k exceeded n_k^ε.
    Gap { lambda: f64, lower: f64, upper: f64, gap: f64, threshold: f64 },
    /// η ∈ A(λ, λ^δ) with |⟨η, ζ⟩| ≤ (|η|²)^δ.
    Annulus {
        lambda: f64,
        eta_m: i64,
        eta_n: i64,
        eta_norm_sq: f64,
        inner: f64,
        threshold: f64,
    },
}

impl Witness {
    pub fn lambda(&self) -> f64 {
        match self {
            Witness::Gap { lambda, .. } | Witness::Annulus { lambda, .. } => *lambda,
        }
    }
}

/// Outcome of one sieve pass: the kept eigenvalues in order and one witness
/// per excluded one, so kept + excluded = total always.
#[derive(Clone, Debug, Serialize)]
pub struct SieveReport {
    pub total: usize,
    pub kept: Vec<f64>,
    pub excluded: Vec<Witness>,
}

impl SieveReport {
    pub fn density(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.kept.len() as f64 / self.total as f64
    }

    /// CSV rows `lambda,kept,witness_m,witness_n,witness_norm`. Kept rows
    /// leave the witness columns empty; gap exclusions leave m and n empty
    /// and put the oversized gap in `witness_norm`; annulus exclusions
    /// carry the offending η and its |η|².
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "lambda,kept,witness_m,witness_n,witness_norm")?;
        let mut rows: Vec<(f64, String)> = Vec::with_capacity(self.total);
        for &l in &self.kept {
            rows.push((l, format!("{},1,,,", fmt_sig17(l))));
        }
        for witness in &self.excluded {
            let row = match witness {
                Witness::Gap { lambda, gap, .. } => {
                    format!("{},0,,,{}", fmt_sig17(*lambda), fmt_sig17(*gap))
                }
                Witness::Annulus { lambda, eta_m, eta_n, eta_norm_sq, .. } => format!(
                    "{},0,{},{},{}",
                    fmt_sig17(*lambda),
                    eta_m,
                    eta_n,
                    fmt_sig17(*eta_norm_sq)
                ),
            };
            rows.push((witness.lambda(), row));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, row) in rows {
            writeln!(w, "{row}")?;
        }
        Ok(())
    }
}

/// Keep λ_k when its hosting gap satisfies n_{k+1} − n_k ≤ n_k^ε.
pub fn lambda_g_filter(spectrum: &PerturbedSpectrum, epsilon_gap: f64) -> Result<SieveReport> {
    if spectrum.entries.is_empty() {
        return Err(Error::domain("gap filter needs a nonempty spectrum"));
    }
    if !epsilon_gap.is_finite() || epsilon_gap < 0.0 {
        return Err(Error::domain("epsilon_gap must be a finite value >= 0"));
    }
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for e in &spectrum.entries {
        let gap = e.upper - e.lower;
        let threshold = e.lower.powf(epsilon_gap);
        if gap <= threshold {
            kept.push(e.lambda);
        } else {
            excluded.push(Witness::Gap {
                lambda: e.lambda,
                lower: e.lower,
                upper: e.upper,
                gap,
                threshold,
            });
        }
    }
    Ok(SieveReport { total: spectrum.entries.len(), kept, excluded })
}

/// Whether η belongs to S_ζ: |⟨η, ζ⟩| ≤ (|η|²)^δ, by exact evaluation of
/// the real inner product. The zero vector is excluded by convention; it
/// satisfies the inequality vacuously (0 ≤ 0) but carries no information.
pub fn s_zeta_membership(
    spec: &LatticeSpec,
    eta: &LatticeVector,
    zeta: &LatticeVector,
    delta: f64,
) -> Result<bool> {
    if zeta.m == 0 && zeta.n == 0 {
        return Err(Error::domain("S_zeta needs a nonzero direction zeta"));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 0.5 {
        return Err(Error::domain("delta must lie in (0, 1/2)"));
    }
    if eta.m == 0 && eta.n == 0 {
        return Ok(false);
    }
    let inner = spec.inner((eta.m, eta.n), (zeta.m, zeta.n));
    Ok(inner.abs() <= eta.norm_sq.powf(delta))
}

/// Exact count of η ∈ S_ζ with 0 < |η|² ≤ X, with its ratio against the
/// scaling X^{1/2+δ}/|ζ|.
///
/// Membership forces |⟨η, ζ⟩| ≤ X^δ, a strip around the line orthogonal to
/// ζ, so for each m the admissible n form an interval; the enumeration
/// walks those intervals (padded by one) and re-applies the exact predicate
/// to every candidate.
pub fn s_zeta_count(
    spec: &LatticeSpec,
    zeta: &LatticeVector,
    delta: f64,
    x: f64,
) -> Result<(u64, f64)> {
    if zeta.m == 0 && zeta.n == 0 {
        return Err(Error::domain("S_zeta needs a nonzero direction zeta"));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("count cutoff X must be positive"));
    }
    if x > X_CAP {
        return Err(Error::capacity(format!(
            "count cutoff {x:e} exceeds the cap {X_CAP:e}"
        )));
    }
    let a_sq = spec.a_sq();
    let m_max = (x / a_sq).sqrt().floor() as i64;
    let n_max = (x * a_sq).sqrt().floor() as i64;
    spec.check_key_capacity(m_max, n_max)?;
    let strip = x.powf(delta);
    let mut count = 0u64;
    for m in -m_max..=m_max {
        // a²·m·m_ζ + n·n_ζ/a² ∈ [−strip, strip] pins n to an interval when
        // n_ζ ≠ 0 and decides the whole row when n_ζ = 0.
        let row_inner = a_sq * (m as f64) * (zeta.m as f64);
        let (n_lo, n_hi) = if zeta.n == 0 {
            if row_inner.abs() > strip {
                continue;
            }
            (-n_max, n_max)
        } else {
            let c = a_sq / (zeta.n as f64);
            let (e0, e1) = ((-strip - row_inner) * c, (strip - row_inner) * c);
            let lo = e0.min(e1).floor() as i64 - 1;
            let hi = e0.max(e1).ceil() as i64 + 1;
            (lo.max(-n_max), hi.min(n_max))
        };
        for n in n_lo..=n_hi {
            if m == 0 && n == 0 {
                continue;
            }
            let eta = spec.vector(m, n).expect("capacity pre-checked");
            if eta.norm_sq <= x && s_zeta_membership(spec, &eta, zeta, delta)? {
                count += 1;
            }
        }
    }
    let zeta_len = zeta.norm_sq.sqrt();
    let ratio = count as f64 / (x.powf(0.5 + delta) / zeta_len);
    Ok((count, ratio))
}

/// The first vector of A(λ, λ^δ) ∩ S_ζ in norm order, if any.
fn annulus_hit(
    spec: &LatticeSpec,
    lambda: f64,
    zeta: &LatticeVector,
    delta: f64,
) -> Result<Option<LatticeVector>> {
    let width = lambda.powf(delta);
    for eta in annulus_points(spec, lambda, width)? {
        if (eta.m, eta.n) == (0, 0) {
            continue;
        }
        if s_zeta_membership(spec, &eta, zeta, delta)? {
            return Ok(Some(eta));
        }
    }
    Ok(None)
}

/// Keep λ when the annulus A(λ, λ^δ) avoids S_ζ entirely.
pub fn lambda_zeta_filter(
    spectrum: &PerturbedSpectrum,
    zeta: &LatticeVector,
    delta: f64,
) -> Result<SieveReport> {
    if spectrum.entries.is_empty() {
        return Err(Error::domain("annulus filter needs a nonempty spectrum"));
    }
    if zeta.m == 0 && zeta.n == 0 {
        return Err(Error::domain("annulus filter needs a nonzero zeta"));
    }
    let spec = spectrum.spec;
    let verdicts: Vec<Result<Option<LatticeVector>>> = spectrum
        .entries
        .par_iter()
        .map(|e| annulus_hit(&spec, e.lambda, zeta, delta))
        .collect();
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for (e, verdict) in spectrum.entries.iter().zip(verdicts) {
        match verdict? {
            None => kept.push(e.lambda),
            Some(eta) => excluded.push(Witness::Annulus {
                lambda: e.lambda,
                eta_m: eta.m,
                eta_n: eta.n,
                eta_norm_sq: eta.norm_sq,
                inner: spec.inner((eta.m, eta.n), (zeta.m, zeta.n)),
                threshold: eta.norm_sq.powf(delta),
            }),
        }
    }
    Ok(SieveReport { total: spectrum.entries.len(), kept, excluded })
}

/// One representative per reflection orbit (±m, ±n) of the nonzero dual
/// vectors with |ζ| ≤ J, in norm order. The sieves are invariant under the
/// reflections, so one representative decides the whole orbit.
pub fn zeta_orbit_representatives(spec: &LatticeSpec, j: f64) -> Result<Vec<LatticeVector>> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::domain("orbit cutoff J must be positive"));
    }
    let j_sq = j * j;
    if j_sq > X_CAP {
        return Err(Error::capacity(format!(
            "orbit cutoff J² = {j_sq:e} exceeds the cap {X_CAP:e}"
        )));
    }
    let a_sq = spec.a_sq();
    let m_max = (j_sq / a_sq).sqrt().floor() as i64;
    let n_max = (j_sq * a_sq).sqrt().floor() as i64;
    spec.check_key_capacity(m_max, n_max)?;
    let mut reps = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            if m == 0 && n == 0 {
                continue;
            }
            let v = spec.vector(m, n).expect("capacity pre-checked");
            if v.norm_sq <= j_sq {
                reps.push(v);
            }
        }
    }
    reps.sort_by(|a, b| a.cmp_by_norm(b));
    Ok(reps)
}

/// Λ_J: the gap filter intersected with every annulus filter for |ζ| ≤ J.
/// Exclusions carry the first violation found, gap first, then ζ in norm
/// order, so reruns reproduce witnesses exactly. Nested by construction:
/// enlarging J only adds constraints.
pub fn lambda_j_intersection(
    spectrum: &PerturbedSpectrum,
    j: f64,
    params: &SieveParams,
) -> Result<SieveReport> {
    params.validate()?;
    if spectrum.entries.is_empty() {
        return Err(Error::domain("intersection needs a nonempty spectrum"));
    }
    let spec = spectrum.spec;
    let reps = zeta_orbit_representatives(&spec, j)?;
    let verdicts: Vec<Result<Option<Witness>>> = spectrum
        .entries
        .par_iter()
        .map(|e| {
            let gap = e.upper - e.lower;
            let threshold = e.lower.powf(params.epsilon_gap);
            if gap > threshold {
                return Ok(Some(Witness::Gap {
                    lambda: e.lambda,
                    lower: e.lower,
                    upper: e.upper,
                    gap,
                    threshold,
                }));
            }
            // One annulus scan serves every ζ.
            let width = e.lambda.powf(params.delta);
            let annulus = annulus_points(&spec, e.lambda, width)?;
            for zeta in &reps {
                for eta in &annulus {
                    if (eta.m, eta.n) == (0, 0) {
                        continue;
                    }
                    if s_zeta_membership(&spec, eta, zeta, params.delta)? {
                        return Ok(Some(Witness::Annulus {
                            lambda: e.lambda,
                            eta_m: eta.m,
                            eta_n: eta.n,
                            eta_norm_sq: eta.norm_sq,
                            inner: spec.inner((eta.m, eta.n), (zeta.m, zeta.n)),
                            threshold: eta.norm_sq.powf(params.delta),
                        }));
                    }
                }
            }
            Ok(None)
        })
        .collect();
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for (e, verdict) in spectrum.entries.iter().zip(verdicts) {
        match verdict? {
            None => kept.push(e.lambda),
            Some(w) => excluded.push(w),
        }
    }
    Ok(SieveReport { total: spectrum.entries.len(), kept, excluded })
}

/// Per-window keep rates over dyadic λ windows: (lo, hi, density), skipping
/// empty windows.
pub fn dyadic_densities(report: &SieveReport) -> Vec<(f64, f64, f64)> {
    let mut all: Vec<(f64, bool)> = report.kept.iter().map(|&l| (l, true)).collect();
    all.extend(report.excluded.iter().map(|w| (w.lambda(), false)));
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    if all.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = (all[0].0, all[all.len() - 1].0);
    let mut out = Vec::new();
    for (wlo, whi) in dyadic_windows(lo.max(1.0), hi) {
        let in_window: Vec<&(f64, bool)> =
            all.iter().filter(|(l, _)| *l >= wlo && *l < whi).collect();
        if in_window.is_empty() {
            continue;
        }
        let kept = in_window.iter().filter(|(_, k)| *k).count();
        out.push((wlo, whi, kept as f64 / in_window.len() as f64));
    }
    out
}

/// Fitted growth exponent of the exclusion count #B(X) over dyadic X, via a
/// log-log least-squares slope; None when fewer than three windows carry
/// exclusions.
pub fn exclusion_exponent(report: &SieveReport) -> Option<f64> {
    let mut lambdas: Vec<f64> = report.excluded.iter().map(|w| w.lambda()).collect();
    lambdas.sort_by(f64::total_cmp);
    let last = *lambdas.last()?;
    let points: Vec<(f64, f64)> = dyadic_windows(1.0, last)
        .into_iter()
        .map(|(_, whi)| (whi, lambdas.partition_point(|&l| l <= whi) as f64))
        .filter(|(_, c)| *c > 0.0)
        .collect();
    if points.len() < 3 {
        return None;
    }
    loglog_slope(&points)
}

/// Totals, densities, and fit in one serializable bundle, ready for a
/// summary file next to the CSV.
#[derive(Clone, Debug, Serialize)]
pub struct SieveSummary {
    pub total: usize,
    pub kept: usize,
    pub density: f64,
    pub dyadic: Vec<(f64, f64, f64)>,
    pub exclusion_exponent: Option<f64>,
}

pub fn summarize(report: &SieveReport) -> SieveSummary {
    SieveSummary {
        total: report.total,
        kept: report.kept.len(),
        density: report.density(),
        dyadic: dyadic_densities(report),
        exclusion_exponent: exclusion_exponent(report),
    }
}
