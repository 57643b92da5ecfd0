//! Rectangular unimodular lattices and their norm statistics.
//!
//! The torus is T² = R²/2πΛ₀ with Λ₀ = Z(1/a, 0) ⊕ Z(0, a), so the dual
//! lattice is Λ = {(m·a, n/a) : m, n ∈ Z} and the Laplace eigenvalues are the
//! norms |ξ|² = a²m² + n²/a². The aspect parameter enters only through
//! a⁴: when a⁴ = p/q in lowest terms, two vectors share a norm iff the
//! integer key p·m² + q·n² agrees (|ξ|² = (p·m² + q·n²)/√(pq)); when a⁴ is
//! irrational, norms coincide iff (m², n²) agree componentwise. All
//! norm-equality decisions below go through those exact keys; floats only
//! carry the common value.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::util::fmt_sig17;

/// Hard cap on norm-table cutoffs; keeps exact keys inside i64 for the
/// documented p·q range and table memory within reason.
pub const X_CAP: f64 = 1e8;

/// Default number of representative vectors stored per norm.
pub const DEFAULT_REP_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
enum SpecKind {
    /// a⁴ = p/q in lowest terms, p, q ≥ 1.
    Rational { p: u64, q: u64 },
    /// a² given as a real, a⁴ declared irrational: no off-orbit norm
    /// coincidences are recognized.
    Generic { a_sq: f64 },
}

/// Shape of the torus, fixed by a⁴ (rational) or a² (declared irrational).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    kind: SpecKind,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl LatticeSpec {
    /// Lattice with a⁴ = p/q (reduced internally). p, q ≥ 1.
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::domain("a^4 = p/q requires p >= 1 and q >= 1"));
        }
        let g = gcd(p, q);
        let (p, q) = (p / g, q / g);
        let a_sq = (p as f64 / q as f64).sqrt();
        if !(1e-6..=1e6).contains(&a_sq) {
            return Err(Error::domain(format!(
                "a^2 = {a_sq:.3e} outside supported range [1e-6, 1e6]"
            )));
        }
        Ok(LatticeSpec {
            kind: SpecKind::Rational { p, q },
        })
    }

    /// Lattice with the given a² > 0 whose fourth power is declared
    /// irrational. The declaration is taken at face value: norm equality is
    /// decided componentwise on (m², n²).
    pub fn generic(a_sq: f64) -> Result<Self> {
        if !a_sq.is_finite() || !(1e-6..=1e6).contains(&a_sq) {
            return Err(Error::domain(format!(
                "a^2 = {a_sq:.3e} outside supported range [1e-6, 1e6]"
            )));
        }
        Ok(LatticeSpec {
            kind: SpecKind::Generic { a_sq },
        })
    }

    /// The square torus, a⁴ = 1: dual lattice Z².
    pub fn square() -> Self {
        LatticeSpec {
            kind: SpecKind::Rational { p: 1, q: 1 },
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.kind, SpecKind::Rational { .. })
    }

    /// (p, q) with a⁴ = p/q in lowest terms, when rational.
    pub fn rational_pq(&self) -> Option<(u64, u64)> {
        match self.kind {
            SpecKind::Rational { p, q } => Some((p, q)),
            SpecKind::Generic { .. } => None,
        }
    }

    pub fn a_sq(&self) -> f64 {
        match self.kind {
            SpecKind::Rational { p, q } => (p as f64 / q as f64).sqrt(),
            SpecKind::Generic { a_sq } => a_sq,
        }
    }

    pub fn a(&self) -> f64 {
        self.a_sq().sqrt()
    }

    /// |ξ|² = a²m² + n²/a² as a plain float; the canonical value used in
    /// tables comes from `norm_of_key` and agrees to relative 1e-14.
    pub fn norm_sq(&self, m: i64, n: i64) -> f64 {
        let a_sq = self.a_sq();
        let (mf, nf) = (m as f64, n as f64);
        a_sq * mf * mf + nf * nf / a_sq
    }

    /// Exact norm key of (m, n); `Capacity` if the rational key leaves i64.
    pub fn key(&self, m: i64, n: i64) -> Result<NormKey> {
        let m_sq = (m as i128) * (m as i128);
        let n_sq = (n as i128) * (n as i128);
        match self.kind {
            SpecKind::Rational { p, q } => {
                let k = (p as i128)
                    .checked_mul(m_sq)
                    .and_then(|a| (q as i128).checked_mul(n_sq).and_then(|b| a.checked_add(b)))
                    .ok_or_else(|| Error::capacity("norm key overflows 128-bit intermediate"))?;
                if k > i64::MAX as i128 {
                    return Err(Error::capacity(format!(
                        "norm key {k} for ({m}, {n}) exceeds the exact i64 range"
                    )));
                }
                Ok(NormKey::Rational(k as i64))
            }
            SpecKind::Generic { .. } => Ok(NormKey::Generic {
                m_sq: m_sq as u64,
                n_sq: n_sq as u64,
            }),
        }
    }

    /// The canonical float norm of a key: (p·m² + q·n²)/√(pq) in the rational
    /// case, a²m² + n²/a² in the generic case. Equal keys give bit-identical
    /// floats.
    pub fn norm_of_key(&self, key: &NormKey) -> f64 {
        match (self.kind, key) {
            (SpecKind::Rational { p, q }, NormKey::Rational(k)) => {
                *k as f64 / ((p as f64) * (q as f64)).sqrt()
            }
            (SpecKind::Generic { a_sq }, NormKey::Generic { m_sq, n_sq }) => {
                a_sq * (*m_sq as f64) + (*n_sq as f64) / a_sq
            }
            _ => panic!("norm key from a different lattice kind"),
        }
    }

    /// Build the dual vector (m·a, n/a) with its canonical norm.
    pub fn vector(&self, m: i64, n: i64) -> Result<LatticeVector> {
        let key = self.key(m, n)?;
        let norm_sq = self.norm_of_key(&key);
        Ok(LatticeVector { m, n, norm_sq, key })
    }

    /// Real inner product ⟨ξ, ζ⟩ = a²·m_ξ·m_ζ + n_ξ·n_ζ/a² of two dual
    /// vectors given by their integer coordinates.
    pub fn inner(&self, xi: (i64, i64), zeta: (i64, i64)) -> f64 {
        let a_sq = self.a_sq();
        a_sq * (xi.0 as f64) * (zeta.0 as f64) + (xi.1 as f64) * (zeta.1 as f64) / a_sq
    }

    /// Cartesian components (m·a, n/a) of a dual vector.
    pub fn embed(&self, m: i64, n: i64) -> (f64, f64) {
        let a = self.a();
        (m as f64 * a, n as f64 / a)
    }

    /// Fundamental domain side lengths (2π/a, 2πa); the area is always 4π².
    pub fn fundamental_domain(&self) -> (f64, f64) {
        let a = self.a();
        (2.0 * std::f64::consts::PI / a, 2.0 * std::f64::consts::PI * a)
    }

    /// Checks up front that every key reachable with |m| ≤ m_max, |n| ≤ n_max
    /// fits in i64, so enumeration loops can build keys unchecked.
    pub(crate) fn check_key_capacity(&self, m_max: i64, n_max: i64) -> Result<()> {
        if let SpecKind::Rational { p, q } = self.kind {
            let worst = (p as i128) * (m_max as i128) * (m_max as i128)
                + (q as i128) * (n_max as i128) * (n_max as i128);
            if worst > i64::MAX as i128 {
                return Err(Error::capacity(format!(
                    "norm keys up to {worst} exceed the exact i64 range; \
                     reduce the cutoff or the lattice parameters"
                )));
            }
        }
        Ok(())
    }
}

/// Exact identifier of a norm value. Two vectors of the same lattice have
/// equal norms iff their keys are equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKey {
    Rational(i64),
    Generic { m_sq: u64, n_sq: u64 },
}

impl fmt::Display for NormKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKey::Rational(k) => write!(f, "{k}"),
            NormKey::Generic { m_sq, n_sq } => write!(f, "{m_sq}:{n_sq}"),
        }
    }
}

/// A dual lattice vector ξ = (m·a, n/a) with its canonical norm and key.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeVector {
    pub m: i64,
    pub n: i64,
    pub norm_sq: f64,
    pub key: NormKey,
}

impl LatticeVector {
    /// Ordering used everywhere output must be deterministic: by norm, then
    /// m, then n.
    pub fn cmp_by_norm(&self, other: &Self) -> std::cmp::Ordering {
        self.norm_sq
            .total_cmp(&other.norm_sq)
            .then(self.m.cmp(&other.m))
            .then(self.n.cmp(&other.n))
    }
}

/// One distinct norm with its multiplicity and capped representative list.
#[derive(Clone, Debug)]
pub struct NormEntry {
    pub norm: f64,
    pub key: NormKey,
    pub multiplicity: u64,
    /// Up to the table's representative cap of (m, n) pairs realizing this
    /// norm, sorted by (m, n).
    pub representatives: Vec<(i64, i64)>,
}

/// All distinct norms ≤ x_max of a lattice, sorted strictly increasing.
/// Always contains the zero entry.
#[derive(Clone, Debug)]
pub struct NormTable {
    spec: LatticeSpec,
    x_max: f64,
    entries: Vec<NormEntry>,
    /// cum_mult[i] = total vector count over entries[..i].
    cum_mult: Vec<u64>,
}

/// `build_norm_table` with the default representative cap.
pub fn build_norm_table(spec: &LatticeSpec, x_max: f64) -> Result<NormTable> {
    build_norm_table_capped(spec, x_max, DEFAULT_REP_CAP)
}

/// Enumerate all dual vectors with |ξ|² ≤ x_max and group them by exact key.
/// `rep_cap` bounds how many representatives are kept per norm (0 keeps
/// none); multiplicities are always exact.
pub fn build_norm_table_capped(
    spec: &LatticeSpec,
    x_max: f64,
    rep_cap: usize,
) -> Result<NormTable> {
    if !x_max.is_finite() || x_max < 0.0 {
        return Err(Error::domain("X must be nonnegative"));
    }
    if x_max > X_CAP {
        return Err(Error::capacity(format!("X = {x_max:e} exceeds the cap {X_CAP:e}")));
    }
    let a_sq = spec.a_sq();
    let m_max = (x_max / a_sq).sqrt().floor() as i64 + 1;
    let n_max = (x_max * a_sq).sqrt().floor() as i64 + 1;
    spec.check_key_capacity(m_max, n_max)?;

    let mut groups: HashMap<NormKey, (u64, Vec<(i64, i64)>)> = HashMap::new();
    for m in -m_max..=m_max {
        let rem = x_max - a_sq * (m as f64) * (m as f64);
        let n_lim = (rem.max(0.0) * a_sq).sqrt().floor() as i64 + 1;
        for n in -n_lim..=n_lim {
            // Key construction is guarded by check_key_capacity above.
            let key = spec.key(m, n).expect("capacity pre-checked");
            if spec.norm_of_key(&key) <= x_max {
                let slot = groups.entry(key).or_insert_with(|| (0, Vec::new()));
                slot.0 += 1;
                if slot.1.len() < rep_cap {
                    slot.1.push((m, n));
                }
            }
        }
    }

    let mut entries: Vec<NormEntry> = groups
        .into_iter()
        .map(|(key, (multiplicity, mut reps))| {
            reps.sort_unstable();
            NormEntry {
                norm: spec.norm_of_key(&key),
                key,
                multiplicity,
                representatives: reps,
            }
        })
        .collect();
    entries.sort_by(|a, b| a.norm.total_cmp(&b.norm));
    // Distinct keys must give distinct values. A collision means a² was
    // declared generic but satisfies a⁴ ≈ Δn²/Δm² to within rounding (for
    // instance a² = √2, where a⁴ = 2 makes 2m² + n² the true invariant),
    // so the float norms stop separating the true spectrum.
    if let Some(w) = entries.windows(2).find(|w| w[0].norm >= w[1].norm) {
        return Err(Error::domain(format!(
            "norms of the distinct keys {} and {} coincide at {}: the aspect \
             ratio hides a rational relation a⁴ = p/q; construct the lattice \
             from that ratio instead",
            w[0].key, w[1].key, w[0].norm
        )));
    }

    let mut cum_mult = Vec::with_capacity(entries.len() + 1);
    let mut acc = 0u64;
    cum_mult.push(0);
    for e in &entries {
        acc += e.multiplicity;
        cum_mult.push(acc);
    }
    Ok(NormTable {
        spec: *spec,
        x_max,
        entries,
        cum_mult,
    })
}

impl NormTable {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn entries(&self) -> &[NormEntry] {
        &self.entries
    }

    /// (vector count, distinct norm count) with norm ≤ x. Both include the
    /// zero vector.
    pub fn count_upto(&self, x: f64) -> Result<(u64, u64)> {
        if !x.is_finite() || x < 0.0 || x > self.x_max {
            return Err(Error::range(format!(
                "count_upto({x}) outside table range [0, {}]",
                self.x_max
            )));
        }
        let idx = self.entries.partition_point(|e| e.norm <= x);
        Ok((self.cum_mult[idx], idx as u64))
    }

    /// N(x) − πx, the two-term counting remainder. Requires 0 < x ≤ x_max.
    pub fn weyl_residual(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("weyl_residual needs x > 0"));
        }
        let (with_mult, _) = self.count_upto(x)?;
        Ok(with_mult as f64 - std::f64::consts::PI * x)
    }

    /// Strictly positive norms, in increasing order.
    pub fn positive_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.norm).filter(|&n| n > 0.0)
    }

    /// CSV rows `norm,key,multiplicity`, floats at 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "norm,key,multiplicity")?;
        for e in &self.entries {
            writeln!(w, "{},{},{}", fmt_sig17(e.norm), e.key, e.multiplicity)?;
        }
        Ok(())
    }
}

/// All ξ with λ − L < |ξ|² < λ + L (both strict), sorted by (norm, m, n).
pub fn annulus_points(spec: &LatticeSpec, lambda: f64, half_width: f64) -> Result<Vec<LatticeVector>> {
    if !lambda.is_finite() || !half_width.is_finite() || half_width <= 0.0 {
        return Err(Error::domain("annulus needs finite lambda and L > 0"));
    }
    let hi = lambda + half_width;
    if hi > X_CAP {
        return Err(Error::capacity(format!(
            "annulus upper edge {hi:e} exceeds the cap {X_CAP:e}"
        )));
    }
    let lo = lambda - half_width;
    let mut out = Vec::new();
    if hi <= 0.0 {
        return Ok(out);
    }
    let a_sq = spec.a_sq();
    let m_max = (hi / a_sq).sqrt().floor() as i64 + 1;
    let n_max = (hi * a_sq).sqrt().floor() as i64 + 1;
    spec.check_key_capacity(m_max, n_max)?;
    for m in -m_max..=m_max {
        let rem = hi - a_sq * (m as f64) * (m as f64);
        let n_lim = (rem.max(0.0) * a_sq).sqrt().floor() as i64 + 1;
        for n in -n_lim..=n_lim {
            let key = spec.key(m, n).expect("capacity pre-checked");
            let norm_sq = spec.norm_of_key(&key);
            if lo < norm_sq && norm_sq < hi {
                out.push(LatticeVector { m, n, norm_sq, key });
            }
        }
    }
    out.sort_by(|a, b| a.cmp_by_norm(b));
    Ok(out)
}

/// Gap statistics over consecutive distinct positive norms.
#[derive(Clone, Debug)]
pub struct GapReport {
    /// Threshold exponent: a gap at n counts as small when it is ≤ nᵉ.
    pub epsilon: f64,
    /// (n_k, n_{k+1} − n_k) for each consecutive pair of positive norms.
    pub gaps: Vec<(f64, f64)>,
    pub max_gap: f64,
    /// (n_K − n_1)/(K − 1); the sum of gaps telescopes.
    pub mean_gap: f64,
    /// Fraction of gaps with n_{k+1} − n_k ≤ n_kᵉ.
    pub small_fraction: f64,
}

impl GapReport {
    /// max over k of gap / n_k^{1/4}: the fitted constant of the quarter-power
    /// gap bound.
    pub fn fitted_quarter_power_constant(&self) -> f64 {
        self.gaps
            .iter()
            .map(|(n, g)| g / n.powf(0.25))
            .fold(0.0, f64::max)
    }

    /// CSV rows `n_k,gap`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "n_k,gap")?;
        for (n, g) in &self.gaps {
            writeln!(w, "{},{}", fmt_sig17(*n), fmt_sig17(*g))?;
        }
        Ok(())
    }
}

/// Consecutive-gap statistics of the positive norms in `table`.
pub fn gap_stats(table: &NormTable, epsilon: f64) -> Result<GapReport> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::domain("gap threshold exponent must be >= 0"));
    }
    let norms: Vec<f64> = table.positive_norms().collect();
    if norms.len() < 2 {
        return Err(Error::domain(
            "gap statistics need at least two positive norms in the table",
        ));
    }
    let gaps: Vec<(f64, f64)> = norms.windows(2).map(|w| (w[0], w[1] - w[0])).collect();
    let max_gap = gaps.iter().map(|(_, g)| *g).fold(0.0, f64::max);
    let mean_gap = (norms[norms.len() - 1] - norms[0]) / (norms.len() - 1) as f64;
    let small = gaps.iter().filter(|(n, g)| *g <= n.powf(epsilon)).count();
    Ok(GapReport {
        epsilon,
        small_fraction: small as f64 / gaps.len() as f64,
        gaps,
        max_gap,
        mean_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> LatticeSpec {
        LatticeSpec::square()
    }

    #[test]
    fn square_table_to_ten() {
        let t = build_norm_table(&z2(), 10.0).unwrap();
        let norms: Vec<f64> = t.entries().iter().map(|e| e.norm).collect();
        assert_eq!(norms, vec![0.0, 1.0, 2.0, 4.0, 5.0, 8.0, 9.0, 10.0]);
        let mults: Vec<u64> = t.entries().iter().map(|e| e.multiplicity).collect();
        assert_eq!(mults, vec![1, 4, 4, 4, 8, 4, 4, 8]);
        // Representatives stay within multiplicity and share the entry norm.
        for e in t.entries() {
            assert!(e.representatives.len() as u64 <= e.multiplicity);
            for &(m, n) in &e.representatives {
                let v = t.spec().vector(m, n).unwrap();
                assert!((v.norm_sq - e.norm).abs() <= 1e-14 * (1.0 + e.norm));
            }
        }
    }

    #[test]
    fn zero_cutoff_table() {
        for spec in [z2(), LatticeSpec::generic(std::f64::consts::PI.sqrt()).unwrap()] {
            let t = build_norm_table(&spec, 0.0).unwrap();
            assert_eq!(t.entries().len(), 1);
            assert_eq!(t.entries()[0].norm, 0.0);
            assert_eq!(t.entries()[0].multiplicity, 1);
        }
    }

    #[test]
    fn generic_multiplicities_are_orbit_sizes() {
        let spec = LatticeSpec::generic(std::f64::consts::PI.sqrt()).unwrap();
        let t = build_norm_table(&spec, 20.0).unwrap();
        assert!(t.entries().len() > 4);
        for e in t.entries() {
            let (m, n) = e.representatives[0];
            let expected = match (m == 0, n == 0) {
                (true, true) => 1,
                (true, false) | (false, true) => 2,
                (false, false) => 4,
            };
            assert_eq!(e.multiplicity, expected, "norm {}", e.norm);
        }
    }

    #[test]
    fn rational_multiplicity_divisible_by_four_off_axes() {
        let spec = LatticeSpec::rational(3, 2).unwrap();
        let t = build_norm_table(&spec, 200.0).unwrap();
        for e in t.entries() {
            if e.representatives.iter().all(|&(m, n)| m != 0 && n != 0) && e.norm > 0.0 {
                assert_eq!(e.multiplicity % 4, 0, "norm {}", e.norm);
            }
        }
    }

    #[test]
    fn count_upto_square() {
        let t = build_norm_table(&z2(), 10.0).unwrap();
        assert_eq!(t.count_upto(10.0).unwrap(), (37, 8));
        assert_eq!(t.count_upto(0.0).unwrap(), (1, 1));
        assert_eq!(t.count_upto(0.5).unwrap(), (1, 1));
        assert_eq!(t.count_upto(9.99).unwrap(), (29, 7));
        assert!(t.count_upto(10.01).is_err());
        assert!(t.count_upto(-1.0).is_err());
    }

    #[test]
    fn weyl_residual_square() {
        let t = build_norm_table(&z2(), 100.0).unwrap();
        let r10 = t.weyl_residual(10.0).unwrap();
        assert!((r10 - (37.0 - 10.0 * std::f64::consts::PI)).abs() < 1e-12);
        let r100 = t.weyl_residual(100.0).unwrap();
        assert!(r100.abs() <= 16.0 * (10.0 + 1.0));
        assert!(t.weyl_residual(0.0).is_err());
    }

    #[test]
    fn negative_cutoff_rejected() {
        assert!(matches!(
            build_norm_table(&z2(), -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn key_capacity_error() {
        // a⁴ ≈ 1 with twelve-digit numerator and denominator: keys near
        // p·X overflow i64 long before the X cap does.
        let spec = LatticeSpec::rational(1_000_000_000_037, 1_000_000_000_039).unwrap();
        assert!(matches!(
            build_norm_table(&spec, 1e7),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn degenerate_generic_ratio_rejected() {
        // a² = √2 means a⁴ = 2: the keys (4, 1) and (0, 9) both carry the
        // true norm 9/√2, so the float table cannot keep them apart. The
        // honest invariant is 2m² + n², i.e. the rational lattice p/q = 2.
        let sneaky = LatticeSpec::generic(2f64.sqrt()).unwrap();
        assert!(matches!(
            build_norm_table(&sneaky, 20.0),
            Err(Error::Domain(_))
        ));
        let honest = LatticeSpec::rational(2, 1).unwrap();
        assert!(build_norm_table(&honest, 20.0).is_ok());
        // A badly approximable ratio keeps every pair of keys apart by a
        // margin far above rounding: golden a² has a⁴ = a² + 1.
        let golden = LatticeSpec::generic((1.0 + 5f64.sqrt()) / 2.0).unwrap();
        assert!(build_norm_table(&golden, 1e4).is_ok());
    }

    #[test]
    fn annulus_around_hundred() {
        let pts = annulus_points(&z2(), 100.0, 5.0).unwrap();
        assert_eq!(pts.len(), 40);
        let mut norms: Vec<f64> = pts.iter().map(|v| v.norm_sq).collect();
        norms.dedup();
        assert_eq!(norms, vec![97.0, 98.0, 100.0, 101.0, 104.0]);
        // Deterministic ordering: by norm, then m, then n.
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| a.cmp_by_norm(b));
        assert_eq!(pts, sorted);
    }

    #[test]
    fn annulus_empty_cases() {
        assert!(annulus_points(&z2(), 0.5, 0.4).unwrap().is_empty());
        // Strict inequalities: the window (98, 100) contains no norm.
        assert!(annulus_points(&z2(), 99.0, 1.0).unwrap().is_empty());
        assert!(annulus_points(&z2(), 1.0, 0.0).is_err());
    }

    #[test]
    fn annulus_matches_counting_difference() {
        let t = build_norm_table(&z2(), 600.0).unwrap();
        for &(lambda, l) in &[(100.0, 5.0), (250.0, 17.3), (77.5, 0.9), (3.0, 2.5)] {
            let pts = annulus_points(&z2(), lambda, l).unwrap();
            let expected: u64 = t
                .entries()
                .iter()
                .filter(|e| lambda - l < e.norm && e.norm < lambda + l)
                .map(|e| e.multiplicity)
                .sum();
            assert_eq!(pts.len() as u64, expected, "lambda={lambda} L={l}");
        }
    }

    #[test]
    fn gap_report_square_ten() {
        let t = build_norm_table(&z2(), 10.0).unwrap();
        let r = gap_stats(&t, 0.25).unwrap();
        let expected = vec![
            (1.0, 1.0),
            (2.0, 2.0),
            (4.0, 1.0),
            (5.0, 3.0),
            (8.0, 1.0),
            (9.0, 1.0),
        ];
        assert_eq!(r.gaps, expected);
        assert_eq!(r.max_gap, 3.0);
        assert!((r.mean_gap - 1.5).abs() < 1e-15);
        // Small gaps at ε = 1/4: thresholds pass at n = 1, 4, 8, 9 only.
        assert!((r.small_fraction - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn gap_report_needs_two_positive_norms() {
        let t = build_norm_table(&z2(), 1.0).unwrap();
        assert!(gap_stats(&t, 0.25).is_err());
    }

    #[test]
    fn brute_force_count_agreement() {
        // Independent O(x) double loop, no keys involved.
        let spec = LatticeSpec::rational(3, 2).unwrap();
        let t = build_norm_table(&spec, 2000.0).unwrap();
        let a_sq = spec.a_sq();
        for &x in &[0.0, 1.0, 2.5, 17.0, 111.3, 1999.0, 2000.0] {
            let mut count = 0u64;
            let m_max = (x / a_sq).sqrt() as i64 + 2;
            let n_max = (x * a_sq).sqrt() as i64 + 2;
            for m in -m_max..=m_max {
                for n in -n_max..=n_max {
                    if spec.norm_of_key(&spec.key(m, n).unwrap()) <= x {
                        count += 1;
                    }
                }
            }
            assert_eq!(t.count_upto(x).unwrap().0, count, "x={x}");
        }
    }

    #[test]
    fn csv_deterministic() {
        let spec = LatticeSpec::generic(2f64.powf(0.25)).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        build_norm_table(&spec, 300.0).unwrap().write_csv(&mut a).unwrap();
        build_norm_table(&spec, 300.0).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("norm,key,multiplicity\n"));
        assert!(text.lines().count() > 100);
    }

    #[test]
    fn norm_matches_float_formula() {
        for spec in [
            z2(),
            LatticeSpec::rational(7, 3).unwrap(),
            LatticeSpec::generic(1.234567).unwrap(),
        ] {
            let t = build_norm_table(&spec, 500.0).unwrap();
            for e in t.entries() {
                for &(m, n) in &e.representatives {
                    let direct = spec.norm_sq(m, n);
                    assert!(
                        (direct - e.norm).abs() <= 1e-14 * (1.0 + e.norm),
                        "({m},{n}): {direct} vs {}",
                        e.norm
                    );
                }
            }
        }
    }
}
