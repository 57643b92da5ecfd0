//! Bisection with a dual stopping rule, shared by the secular and spectral
//! solvers.
//!
//! Both solvers chase roots of functions that blow up at interval endpoints,
//! so plain bracket-width stopping is not enough: near a pole the derivative
//! can be large enough that a bracket of width 1e-12·(1+|x|) still leaves a
//! sizable function residual. We therefore keep halving until the bracket is
//! small *and* the residual is small, give up only at the spacing floor of
//! f64, and report what was actually achieved.

/// Stopping rule for [`bisect`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct StopRule {
    /// Bracket may stop once its width is ≤ bracket_rel · (1 + |mid|).
    pub bracket_rel: f64,
    /// ... and the residual |g(mid)| is ≤ residual_abs.
    pub residual_abs: f64,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct RootFound {
    pub root: f64,
    /// g at `root`.
    pub residual: f64,
    /// Final bracket, still enclosing the root; a caller wanting a tighter
    /// residual can resume bisection from here.
    pub lo: f64,
    pub hi: f64,
    /// Whether both halves of the stopping rule were met. When false the
    /// bisection hit the f64 spacing floor or the iteration cap first and
    /// `root` is the evaluated point with the smallest |g|.
    pub converged: bool,
}

/// Bisect g on (lo, hi). The caller guarantees g(lo) and g(hi) are finite
/// with opposite signs; g need not be increasing.
pub(crate) fn bisect(
    mut g: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    rule: &StopRule,
) -> RootFound {
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    debug_assert!(lo < hi, "bisect needs a nonempty bracket");
    debug_assert!(
        g_lo == 0.0 || g_hi == 0.0 || (g_lo < 0.0) != (g_hi < 0.0),
        "bisect needs a sign change: g({lo}) = {g_lo}, g({hi}) = {g_hi}"
    );
    if g_lo == 0.0 {
        return RootFound { root: lo, residual: 0.0, lo, hi, converged: true };
    }
    if g_hi == 0.0 {
        return RootFound { root: hi, residual: 0.0, lo, hi, converged: true };
    }

    let mut best = (lo, g_lo);
    if g_hi.abs() < g_lo.abs() {
        best = (hi, g_hi);
    }
    for _ in 0..rule.max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // adjacent floats: nothing between lo and hi
        }
        let g_mid = g(mid);
        if g_mid.abs() < best.1.abs() {
            best = (mid, g_mid);
        }
        if g_mid == 0.0 {
            return RootFound { root: mid, residual: 0.0, lo, hi, converged: true };
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rule.bracket_rel * (1.0 + mid.abs()) && g_mid.abs() <= rule.residual_abs {
            return RootFound { root: mid, residual: g_mid, lo, hi, converged: true };
        }
    }
    RootFound {
        root: best.0,
        residual: best.1,
        lo,
        hi,
        converged: best.1.abs() <= rule.residual_abs
            && hi - lo <= rule.bracket_rel * (1.0 + best.0.abs()),
    }
}

/// Shrink an inset until g changes sign across (p_lo + inset, p_hi − inset).
/// Returns the bracket, or None if no sign change survives even at the
/// smallest attempted inset (root indistinguishable from a pole).
pub(crate) fn bracket_between_poles(
    mut g: impl FnMut(f64) -> f64,
    p_lo: f64,
    p_hi: f64,
    initial_inset: f64,
) -> Option<(f64, f64)> {
    let mut inset = initial_inset;
    for _ in 0..12 {
        // Never land on the pole itself: insets clamp to one ulp.
        let lo = (p_lo + inset).max(p_lo.next_up());
        let hi = (p_hi - inset).min(p_hi.next_down());
        if lo >= hi {
            inset /= 256.0;
            continue;
        }
        let (g_lo, g_hi) = (g(lo), g(hi));
        if g_lo.is_finite() && g_hi.is_finite() && (g_lo == 0.0 || g_hi == 0.0 || (g_lo < 0.0) != (g_hi < 0.0)) {
            return Some((lo, hi));
        }
        inset /= 256.0;
    }
    None
}
