use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use clap::Parser;
use serde_json::json;

use entcorr::bosehubbard::{bose_sweep, BoseSweepConfig};
use entcorr::cumulants::{SiteTuple, TruncationScheme};
use entcorr::ising::{ising_sweep, ChainLength, IsingSweepConfig, CRITICAL_WINDOW, L_FF, L_FF_CRITICAL};
use entcorr::sweep::{fmt_sig, locate_crossings, locate_max, locate_onset, SweepTable};
use entcorr::tangles::{family_curves, scatter_dataset, SamplingMethod, TangleMeasure};
use entcorr::verify::{run_suite, VerifyOptions};

use crate::manifest::{read_manifest, GridSpec, Outputs};
use crate::{
    BhArgs, Cli, Command, Grid, IsingNormsArgs, MethodArg, Quantity, ReplayArgs, ScatterArgs, SchemeArg, TanglesArgs,
    Tau4Arg, VerifyArgs,
};

/// Bad input that clap could not catch; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cli: &Cli, argv: &[String]) -> anyhow::Result<()> {
    match &cli.command {
        Command::IsingTangles(a) => ising_tangles(a, argv),
        Command::IsingNorms(a) => ising_norms(a, argv),
        Command::Bh(a) => bh(a, argv),
        Command::Scatter(a) => scatter(a, argv),
        Command::Verify(a) => verify(a),
        Command::Replay(a) => replay(a),
    }
}

fn checked_grid(grid: &Grid, default: (f64, f64, usize)) -> anyhow::Result<(Vec<f64>, GridSpec)> {
    let spec = GridSpec {
        j_min: grid.j_min.unwrap_or(default.0),
        j_max: grid.j_max.unwrap_or(default.1),
        steps: grid.steps.unwrap_or(default.2),
    };
    if !(spec.j_min.is_finite() && spec.j_max.is_finite()) || spec.j_min < 0.0 {
        return Err(usage(format!("J range must be finite and non-negative, got [{}, {}]", spec.j_min, spec.j_max)));
    }
    if spec.steps == 0 || (spec.steps > 1 && spec.j_max <= spec.j_min) {
        return Err(usage(format!(
            "need --steps >= 1 and --j-max > --j-min, got {} steps on [{}, {}]",
            spec.steps, spec.j_min, spec.j_max
        )));
    }
    Ok((grid.points(default), spec))
}

fn tuples_from(distances: &[Vec<usize>]) -> anyhow::Result<Vec<SiteTuple>> {
    let defaults = [vec![1], vec![1, 1], vec![1, 1, 1]];
    let list: &[Vec<usize>] = if distances.is_empty() { &defaults } else { distances };
    list.iter().map(|d| SiteTuple::from_distances(0, d).map_err(|e| usage(e.to_string()))).collect()
}

fn csv_bytes(table: &SweepTable, extra: &[(&str, String)]) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    table.write_csv_with(&mut buf, extra)?;
    Ok(buf)
}

fn l_ff_record(length: ChainLength) -> Option<serde_json::Value> {
    matches!(length, ChainLength::Thermodynamic)
        .then(|| json!({ "default": L_FF, "near_critical": L_FF_CRITICAL, "critical_window": CRITICAL_WINDOW }))
}

fn ising_tangles(a: &TanglesArgs, argv: &[String]) -> anyhow::Result<()> {
    let (js, spec) = checked_grid(&a.grid, (0.0, 1.5, 151))?;
    let schemes = match a.scheme {
        SchemeArg::Absolute => vec![TruncationScheme::Absolute],
        SchemeArg::Renormalized => vec![TruncationScheme::Renormalized],
        SchemeArg::Both => vec![TruncationScheme::Absolute, TruncationScheme::Renormalized],
    };
    let mut out = Outputs::new(&a.grid.out)?;
    for scheme in schemes {
        let mut cfg = IsingSweepConfig::new(js.clone());
        cfg.gamma = a.gamma;
        cfg.tangles = true;
        cfg.scheme = scheme;
        cfg.tau4_measure = match a.tau4 {
            Tau4Arg::A => TangleMeasure::Tau4A,
            Tau4Arg::C => TangleMeasure::Tau4C,
        };
        let table = ising_sweep(&cfg)?;
        out.write(
            &format!("ising_tangles_{}.csv", scheme.tag()),
            &csv_bytes(&table, &[("scheme", scheme.tag().into())])?,
        )?;
        print!("{}", tangle_report(&table, scheme, a.onset_threshold));
    }
    out.finish(
        "ising_tangles",
        argv,
        serde_json::to_value(a)?,
        None,
        Some(spec),
        l_ff_record(ChainLength::Thermodynamic),
    )?;
    Ok(())
}

/// Located maxima and four-tangle onset, one line each.
pub fn tangle_report(table: &SweepTable, scheme: TruncationScheme, threshold: f64) -> String {
    let mut s = String::new();
    for (label, quantity, q, d) in
        [("J2_max", "C2", 2, vec![1]), ("J3_max", "sqrt_tau3", 3, vec![1, 1]), ("J4_max", "tau4", 4, vec![1, 1, 1])]
    {
        let (x, y) = table.series(quantity, q, Some(&d));
        match locate_max(&x, &y) {
            Some((jm, v)) => {
                writeln!(s, "[{}] {label} = {} ({quantity} = {})", scheme.tag(), fmt_sig_short(jm), fmt_sig_short(v))
            }
            None => writeln!(s, "[{}] {label}: no data", scheme.tag()),
        }
        .unwrap();
    }
    let (x, y) = table.series("tau4", 4, Some(&[1, 1, 1]));
    match locate_onset(&x, &y, threshold) {
        Some(j0) => writeln!(s, "[{}] J0 = {} (tau4 > {threshold})", scheme.tag(), fmt_sig_short(j0)),
        None => writeln!(s, "[{}] J0: tau4 never rises above {threshold} for good", scheme.tag()),
    }
    .unwrap();
    s
}

fn fmt_sig_short(x: f64) -> String {
    format!("{x:.4}")
}

fn crossing_report(table: &SweepTable, orders: &[f64], tuples: &[SiteTuple]) -> String {
    let mut s = String::new();
    let has = |q: usize| tuples.iter().any(|t| t.len() == q && t.distances().iter().all(|&d| d == 1));
    for &p in orders {
        let name = if p.fract() == 0.0 { format!("corr_norm{}", p as i64) } else { format!("corr_norm{p}") };
        // round-off near J = 0 would otherwise register as sign changes
        let series = |q: usize| {
            let (x, y) = table.series(&name, q, Some(&vec![1; q - 1]));
            (x, y.into_iter().map(|v| if v.abs() < 1e-12 { 0.0 } else { v }).collect::<Vec<f64>>())
        };
        if !has(4) {
            continue;
        }
        let (x, n4) = series(4);
        for q in [3, 2] {
            if !has(q) {
                continue;
            }
            let (_, nq) = series(q);
            let cr = locate_crossings(&x, &n4, &nq);
            let list: Vec<String> = cr.iter().map(|c| fmt_sig_short(*c)).collect();
            writeln!(s, "p={p}: ||rho4|| crosses ||rho{q}|| at J = [{}]", list.join(", ")).unwrap();
        }
    }
    s
}

fn ising_norms(a: &IsingNormsArgs, argv: &[String]) -> anyhow::Result<()> {
    let (js, spec) = checked_grid(&a.grid, (0.0, 3.0, 601))?;
    if a.p.iter().any(|&p| !(p >= 1.0)) {
        return Err(usage("Schatten orders must be >= 1"));
    }
    let tuples = tuples_from(&a.distances)?;
    if let Some(l) = a.length {
        if let Some(t) = tuples.iter().find(|t| t.last() >= l) {
            return Err(usage(format!("tuple {:?} does not fit in a chain of {l} sites", t.sites())));
        }
    }
    let length = a.length.map_or(ChainLength::Thermodynamic, ChainLength::Finite);
    let mut cfg = IsingSweepConfig::new(js);
    cfg.gamma = a.gamma;
    cfg.length = length;
    cfg.norm_tuples = tuples.clone();
    match a.quantity {
        Quantity::Norms => cfg.norm_orders = a.p.clone(),
        Quantity::Spectra => cfg.spectra = true,
    }
    let table = ising_sweep(&cfg)?;
    let mut out = Outputs::new(&a.grid.out)?;
    let name = match a.quantity {
        Quantity::Norms => "ising_norms",
        Quantity::Spectra => "ising_spectra",
    };
    out.write(&format!("{name}.csv"), &csv_bytes(&table, &[])?)?;
    if a.quantity == Quantity::Norms {
        print!("{}", crossing_report(&table, &a.p, &tuples));
    }
    out.finish(name, argv, serde_json::to_value(a)?, None, Some(spec), l_ff_record(length))?;
    Ok(())
}

fn bh(a: &BhArgs, argv: &[String]) -> anyhow::Result<()> {
    let (js, spec) = checked_grid(&a.grid, (0.0, 0.5, 51))?;
    if a.particles == 0 || a.sites == 0 {
        return Err(usage("--N and --L must be positive"));
    }
    if a.p.iter().any(|&p| !(p >= 1.0)) {
        return Err(usage("Schatten orders must be >= 1"));
    }
    let tuples = tuples_from(&a.distances)?;
    if let Some(t) = tuples.iter().find(|t| t.last() >= a.sites) {
        return Err(usage(format!("tuple {:?} does not fit in {} sites", t.sites(), a.sites)));
    }
    let cfg = BoseSweepConfig {
        particles: a.particles,
        sites: a.sites,
        js,
        tuples: tuples.clone(),
        norm_orders: if a.quantity == Quantity::Norms { a.p.clone() } else { Vec::new() },
        spectra: a.quantity == Quantity::Spectra,
        overlays: !a.no_overlays,
    };
    let table = bose_sweep(&cfg)?;
    let mut out = Outputs::new(&a.grid.out)?;
    let name =
        format!("bh_{}_N{}_L{}", if a.quantity == Quantity::Norms { "norms" } else { "spectra" }, a.particles, a.sites);
    out.write(
        &format!("{name}.csv"),
        &csv_bytes(&table, &[("N", a.particles.to_string()), ("L", a.sites.to_string())])?,
    )?;
    if a.quantity == Quantity::Norms {
        print!("{}", crossing_report(&table, &a.p, &tuples));
    }
    out.finish(&name, argv, serde_json::to_value(a)?, None, Some(spec), None)?;
    Ok(())
}

fn scatter(a: &ScatterArgs, argv: &[String]) -> anyhow::Result<()> {
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let method = match a.method {
        MethodArg::Haar => SamplingMethod::Haar,
        MethodArg::Acin3 => SamplingMethod::Acin3,
    };
    let n = a.qubits as usize;
    let rows = scatter_dataset(n, a.samples, a.seed, method)?;
    let mut csv = String::from("sample_id,tangle,corr_norm1\n");
    let (mut above, mut beyond) = (0usize, 0usize);
    for r in &rows {
        writeln!(csv, "{},{},{}", r.sample_id, fmt_sig(r.tangle), fmt_sig(r.corr_norm1))?;
        above += usize::from(r.tangle > r.corr_norm1);
        beyond += usize::from(r.tangle > r.corr_norm1 + 0.01);
    }
    let mut out = Outputs::new(&a.out)?;
    out.write(&format!("scatter_q{n}.csv"), csv.as_bytes())?;
    if n == 3 {
        let mut fam = String::from("family,alpha,tangle,corr_norm1\n");
        for r in family_curves(a.family_points)? {
            writeln!(fam, "{},{},{},{}", r.family.tag(), fmt_sig(r.alpha), fmt_sig(r.tangle), fmt_sig(r.corr_norm1))?;
        }
        out.write("families_q3.csv", fam.as_bytes())?;
    }
    println!("samples = {}", rows.len());
    println!("above diagonal = {above}");
    println!("beyond diagonal + 0.01 = {beyond} ({:.4}%)", 100.0 * beyond as f64 / rows.len() as f64);
    out.finish(&format!("scatter_q{n}"), argv, serde_json::to_value(a)?, Some(a.seed), None, None)?;
    Ok(())
}

fn verify(a: &VerifyArgs) -> anyhow::Result<()> {
    let opts = VerifyOptions { seed: a.seed, perturb_m: a.perturb_m, ..Default::default() };
    let checks = run_suite(&opts);
    let mut failed = Vec::new();
    for c in &checks {
        let tag = if c.passed() { "PASS" } else { "FAIL" };
        println!("{tag} {}: deviation {:.3e} (tolerance {:.0e}); {}", c.name, c.deviation, c.tolerance, c.detail);
        if !c.passed() {
            failed.push(c.name);
        }
    }
    if !failed.is_empty() {
        bail!("{} check(s) failed: {}", failed.len(), failed.join("; "));
    }
    Ok(())
}

fn replay(a: &ReplayArgs) -> anyhow::Result<()> {
    let manifest = read_manifest(&a.manifest)?;
    let mut cli =
        Cli::try_parse_from(&manifest.command).map_err(|e| usage(format!("manifest command does not parse: {e}")))?;
    let out: &Path = &a.out;
    match &mut cli.command {
        Command::IsingTangles(x) => x.grid.out = out.into(),
        Command::IsingNorms(x) => x.grid.out = out.into(),
        Command::Bh(x) => x.grid.out = out.into(),
        Command::Scatter(x) => x.out = out.into(),
        Command::Verify(_) | Command::Replay(_) => return Err(usage("manifest does not describe a replayable run")),
    }
    run(&cli, &manifest.command)?;
    let mut mismatched = Vec::new();
    for f in &manifest.outputs {
        let bytes = std::fs::read(out.join(&f.file)).with_context(|| format!("reading regenerated {}", f.file))?;
        let digest = crate::manifest::sha256_hex(&bytes);
        let ok = digest == f.sha256;
        println!("{} {}", if ok { "match" } else { "DIFFER" }, f.file);
        if !ok {
            mismatched.push(f.file.clone());
        }
    }
    if !mismatched.is_empty() {
        bail!("outputs differ from the manifest: {}", mismatched.join(", "));
    }
    Ok(())
}
