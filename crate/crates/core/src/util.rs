//! Small shared helpers: output formatting, dyadic window partitions, and
//! compensated summation.

/// Format a float with 17 significant digits, enough to round-trip any f64.
/// All CSV output goes through this so reruns are byte-identical.
pub fn fmt_sig17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Neumaier-compensated accumulator. The long lattice sums here add 1e7–1e9
/// terms; naive recursive summation would let rounding noise approach the
/// tail tolerances we certify, compensation keeps it at a few ulps.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Dyadic windows `[2^j, 2^{j+1})` covering `[lo, hi]`.
///
/// The first window is the one containing `lo`; the last is clipped to `hi`
/// only if `hi` is not itself a power of two boundary. Windows are returned
/// as `(start, end)` half-open pairs.
pub fn dyadic_windows(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    assert!(lo > 0.0 && hi > lo, "dyadic_windows needs 0 < lo < hi");
    let mut out = Vec::new();
    let mut start = 2f64.powi(lo.log2().floor() as i32);
    while start < hi {
        let end = (start * 2.0).min(hi);
        out.push((start, end));
        start *= 2.0;
    }
    out
}

/// Least-squares slope of `log(y)` against `log(x)`; `None` if fewer than two
/// usable points (non-positive values are skipped).
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|(x, _)| x).sum();
    let sy: f64 = logs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}
