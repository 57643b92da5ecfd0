//! One function per subcommand. Every command writes its artifacts under
//! the configured output directory, each file opening with the config
//! header line, and prints a one-line summary of what it wrote.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use scatterer::error::Error;
use scatterer::greens::{matrix_element, truncate, truncated_matrix_element, Cutoff, GreensContext};
use scatterer::lattice::{build_norm_table, gap_stats, LatticeVector};
use scatterer::rankone::{dense_oracle, random_model, solve_secular, FiniteModel};
use scatterer::sieves::{
    lambda_g_filter, lambda_j_intersection, lambda_zeta_filter, summarize, SieveReport,
};
use scatterer::spectral::{perturbed_spectrum, specfun_scan, write_specfun_csv};
use scatterer::util::fmt_sig17;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

type CmdResult = Result<(), CliError>;

/// Assemble `header + body` and write it under the output directory.
fn write_artifact(config: &RunConfig, name: &str, body: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&config.output_dir)?;
    let path = config.output_dir.join(name);
    let mut contents = Vec::with_capacity(body.len() + 128);
    writeln!(&mut contents, "{}", config.header())?;
    contents.extend_from_slice(body);
    fs::write(&path, contents)?;
    Ok(path)
}

fn parse_zeta(config: &RunConfig, text: &str) -> Result<LatticeVector, CliError> {
    let (m, n) = text
        .split_once(',')
        .ok_or_else(|| Error::domain(format!("zeta {text:?} is not of the form m,n")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|_| Error::domain(format!("zeta coordinate {s:?} is not an integer")))
    };
    Ok(config.spec()?.vector(parse(m)?, parse(n)?)?)
}

pub fn cmd_norms(config: &RunConfig) -> CmdResult {
    let table = build_norm_table(&config.spec()?, config.x)?;
    let mut body = Vec::new();
    table.write_csv(&mut body)?;
    let norms_path = write_artifact(config, "norms.csv", &body)?;

    let report = gap_stats(&table, config.epsilon_gap)?;
    let mut body = Vec::new();
    report.write_csv(&mut body)?;
    let gaps_path = write_artifact(config, "gaps.csv", &body)?;

    let (points, distinct) = table.count_upto(config.x)?;
    println!(
        "{} distinct norms <= {} ({} lattice points); mean gap {:.6}, max gap {}, \
         small-gap fraction {:.6}",
        distinct, config.x, points, report.mean_gap, report.max_gap, report.small_fraction
    );
    println!("wrote {} and {}", norms_path.display(), gaps_path.display());
    Ok(())
}

pub fn cmd_specfun(config: &RunConfig, from: f64, to: Option<f64>, samples: usize) -> CmdResult {
    let to = to.unwrap_or(config.x);
    if !(to > from) || samples < 2 {
        return Err(Error::domain("specfun needs from < to and at least 2 samples").into());
    }
    // Midpoint grid: for integer-norm lattices no sample can land on a pole.
    let step = (to - from) / samples as f64;
    let grid: Vec<f64> = (0..samples).map(|i| from + (i as f64 + 0.5) * step).collect();
    let rows = specfun_scan(&config.spec()?, &grid, &config.spectral())?;
    let mut body = Vec::new();
    write_specfun_csv(&rows, &mut body)?;
    let path = write_artifact(config, "specfun.csv", &body)?;
    println!(
        "{} samples of F on [{from}, {to}] ({} skipped at poles)",
        rows.len(),
        samples - rows.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_spectrum(config: &RunConfig) -> CmdResult {
    let spectrum = perturbed_spectrum(&config.spec()?, &config.spectral(), config.x)?;
    let mut body = Vec::new();
    spectrum.write_csv(&mut body)?;
    let path = write_artifact(config, "spectrum.csv", &body)?;
    println!(
        "{} eigenvalues <= {} at phi = {}; c0 = {}",
        spectrum.entries.len(),
        config.x,
        config.phi,
        fmt_sig17(spectrum.c0)
    );
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_matrix(
    config: &RunConfig,
    zeta_text: &str,
    l: Option<f64>,
    lambda: Option<f64>,
) -> CmdResult {
    let spec = config.spec()?;
    let zeta = parse_zeta(config, zeta_text)?;
    let cutoff = |l: Option<f64>| l.map(Cutoff::Truncated).unwrap_or(Cutoff::Full);

    let lambdas: Vec<f64> = match lambda {
        Some(l) => vec![l],
        None => perturbed_spectrum(&spec, &config.spectral(), config.x)?
            .entries
            .iter()
            .map(|e| e.lambda)
            .collect(),
    };

    let mut body = Vec::new();
    writeln!(&mut body, "lambda,re,im,abs")?;
    for &l_val in &lambdas {
        let ctx = GreensContext::centered(spec, l_val)?;
        let me = matrix_element(&ctx, cutoff(l), &zeta, config.tail_tol)?;
        writeln!(
            &mut body,
            "{},{},{},{}",
            fmt_sig17(l_val),
            fmt_sig17(me.re),
            fmt_sig17(me.im),
            fmt_sig17(me.norm())
        )?;
    }
    let path = write_artifact(config, "matrix.csv", &body)?;
    println!(
        "{} matrix elements for zeta = ({}, {}) with {}",
        lambdas.len(),
        zeta.m,
        zeta.n,
        match l {
            Some(l) => format!("annulus width L = {l}"),
            None => "full support".into(),
        }
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct EquidistWindow {
    lo: f64,
    hi: f64,
    count: usize,
    median_abs_me: f64,
}

#[derive(Serialize)]
struct EquidistSummary {
    config: String,
    zeta: (i64, i64),
    truncation_exponent: f64,
    kept: usize,
    total: usize,
    windows: Vec<EquidistWindow>,
    non_decreasing_windows: usize,
}

/// Median |⟨e_ζ g, g⟩| per dyadic eigenvalue window, over the gap- and
/// annulus-filtered subsequence, with the annulus truncation L = λ^0.4.
pub fn cmd_equidist(config: &RunConfig, zeta_text: &str) -> CmdResult {
    const TRUNCATION_EXPONENT: f64 = 0.4;
    let spec = config.spec()?;
    let zeta = parse_zeta(config, zeta_text)?;
    let spectrum = perturbed_spectrum(&spec, &config.spectral(), config.x)?;
    let gap = lambda_g_filter(&spectrum, config.epsilon_gap)?;
    let zf = lambda_zeta_filter(&spectrum, &zeta, config.delta)?;
    let gap_kept: std::collections::HashSet<u64> =
        gap.kept.iter().map(|l| l.to_bits()).collect();
    let kept: Vec<f64> = zf
        .kept
        .iter()
        .filter(|l| gap_kept.contains(&l.to_bits()))
        .copied()
        .collect();

    let mut windows = Vec::new();
    let mut edge = 1.0f64;
    while edge < config.x {
        let hi = (edge * 2.0).min(config.x);
        let mut values: Vec<f64> = kept
            .iter()
            .filter(|&&l| l >= edge && l < hi)
            .filter_map(|&l| {
                let ctx = GreensContext::centered(spec, l).ok()?;
                let trunc = truncate(&ctx, l.powf(TRUNCATION_EXPONENT)).ok()?;
                if trunc.is_empty() {
                    return None;
                }
                Some(truncated_matrix_element(&trunc, &zeta).ok()?.norm())
            })
            .collect();
        if !values.is_empty() {
            values.sort_by(f64::total_cmp);
            let median = if values.len() % 2 == 1 {
                values[values.len() / 2]
            } else {
                0.5 * (values[values.len() / 2 - 1] + values[values.len() / 2])
            };
            windows.push(EquidistWindow { lo: edge, hi, count: values.len(), median_abs_me: median });
        }
        edge *= 2.0;
    }
    let non_decreasing = windows
        .windows(2)
        .filter(|w| w[1].median_abs_me >= w[0].median_abs_me)
        .count();
    let summary = EquidistSummary {
        config: config.hash(),
        zeta: (zeta.m, zeta.n),
        truncation_exponent: TRUNCATION_EXPONENT,
        kept: kept.len(),
        total: spectrum.entries.len(),
        windows,
        non_decreasing_windows: non_decreasing,
    };
    let body = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    let path = write_artifact(config, "equidist.json", &body)?;
    println!(
        "{} of {} eigenvalues kept; {} dyadic windows, {} non-decreasing steps",
        summary.kept,
        summary.total,
        summary.windows.len(),
        summary.non_decreasing_windows
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct SieveArtifact {
    config: String,
    filter: String,
    summary: scatterer::sieves::SieveSummary,
}

pub fn cmd_sieve(config: &RunConfig, zeta_text: Option<&str>, j: Option<f64>) -> CmdResult {
    let spec = config.spec()?;
    let spectrum = perturbed_spectrum(&spec, &config.spectral(), config.x)?;
    let (filter, report): (String, SieveReport) = match (zeta_text, j) {
        (Some(_), Some(_)) => {
            return Err(Error::domain("pass either --zeta or --J, not both").into())
        }
        (None, None) => (
            format!("gap eps={}", config.epsilon_gap),
            lambda_g_filter(&spectrum, config.epsilon_gap)?,
        ),
        (Some(text), None) => {
            let zeta = parse_zeta(config, text)?;
            (
                format!("annulus zeta=({},{}) delta={}", zeta.m, zeta.n, config.delta),
                lambda_zeta_filter(&spectrum, &zeta, config.delta)?,
            )
        }
        (None, Some(j)) => (
            format!("intersection J={j} delta={} eps={}", config.delta, config.epsilon_gap),
            lambda_j_intersection(&spectrum, j, &config.sieve())?,
        ),
    };

    let mut body = Vec::new();
    report.write_csv(&mut body)?;
    let csv_path = write_artifact(config, "sieve.csv", &body)?;
    let artifact = SieveArtifact {
        config: config.hash(),
        filter,
        summary: summarize(&report),
    };
    let body = serde_json::to_vec_pretty(&artifact).expect("summary serializes");
    let json_path = write_artifact(config, "sieve.json", &body)?;
    println!(
        "{}: kept {} of {} (density {:.6})",
        artifact.filter,
        report.kept.len(),
        report.total,
        report.density()
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

#[derive(Serialize)]
struct RankoneCase {
    seed: u64,
    dim: usize,
    max_delta: f64,
}

#[derive(Serialize)]
struct RankoneSummary {
    config: String,
    cases: Vec<RankoneCase>,
    worst_delta: f64,
}

/// Compare the union of secular roots and untouched levels against the
/// dense eigensolver, over one seeded model per case.
pub fn cmd_rankone(config: &RunConfig, demo: bool, cases: usize, dim_max: usize) -> CmdResult {
    if demo {
        let model = FiniteModel::new(vec![0.0, 1.0], vec![1.0, 1.0], 1.0)?;
        let sol = solve_secular(&model)?;
        let dense = dense_oracle(&model)?;
        println!("diag(0,1) + vv^T with v = (1,1): eigenvalues (3 -+ sqrt 5)/2");
        for (i, (root, oracle)) in sol.new_eigenvalues.iter().zip(&dense).enumerate() {
            println!(
                "  root {i}: {} (dense oracle delta {:.3e})",
                fmt_sig17(*root),
                (root - oracle).abs()
            );
        }
        return Ok(());
    }
    if cases == 0 || dim_max < 2 {
        return Err(Error::domain("rankone needs cases >= 1 and dim-max >= 2").into());
    }

    let mut out = Vec::with_capacity(cases);
    let mut worst = 0.0f64;
    for i in 0..cases {
        let seed = config.seed.wrapping_add(i as u64);
        let dim = 2 + (seed as usize * 7 + i) % (dim_max - 1);
        let model = random_model(seed, dim);
        let sol = solve_secular(&model)?;
        let mut union: Vec<f64> = sol.new_eigenvalues.clone();
        union.extend(sol.untouched.iter().map(|&ix| model.eps[ix]));
        union.sort_by(f64::total_cmp);
        let dense = dense_oracle(&model)?;
        let max_delta = union
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        worst = worst.max(max_delta);
        out.push(RankoneCase { seed, dim, max_delta });
    }
    let summary = RankoneSummary { config: config.hash(), cases: out, worst_delta: worst };
    let body = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    let path = write_artifact(config, "rankone.json", &body)?;
    println!(
        "{} models up to dimension {}; worst oracle delta {:.3e}",
        cases, dim_max, worst
    );
    println!("wrote {}", path.display());
    Ok(())
}
