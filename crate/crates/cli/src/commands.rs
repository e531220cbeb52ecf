//! One function per subcommand.

use std::io;

use miw_core::constructor::auto_counts;
use miw_core::dynamics::{matched_start, simulate, PhaseState};
use miw_core::metrics::{gap_report, locate, mixture_distance, rate_fit, rate_sweep, span_bound, wasserstein, RATE_HEADER};
use miw_core::stability::{center_scaling, gradient_report, grad_on_miw, CENTER_HEADER};
use miw_core::stein::{build_gh, stein_bound, TestFunction, SAMPLE_HEADER};
use miw_core::{construct, verify, EnergyState64, MiwError, MiwSequence64};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifact::{self, num, ReadError};
use crate::config::{
    CenterArgs, Command, Config, GradientArgs, InputArgs, SequenceArgs, SimulateArgs, SteinArgs, SweepArgs,
};

#[derive(Debug)]
pub enum Failure {
    /// A recomputed invariant is violated.
    Check(String),
    Computation(String),
    Io(String),
    Config(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Computation(_) => 2,
            Failure::Io(_) => 3,
            Failure::Config(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Computation(m) | Failure::Io(m) | Failure::Config(m) => m,
        }
    }
}

impl From<MiwError> for Failure {
    fn from(e: MiwError) -> Self {
        Failure::Computation(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::Io(e) => Failure::Io(e.to_string()),
            ReadError::Format(m) => Failure::Config(m),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Summary lines go to standard output unless the artifact does.
struct Report {
    to_stderr: bool,
}

impl Report {
    fn new(config: &Config) -> Self {
        Report { to_stderr: config.out == "-" }
    }

    fn line(&self, s: impl AsRef<str>) {
        if self.to_stderr {
            eprintln!("{}", s.as_ref());
        } else {
            println!("{}", s.as_ref());
        }
    }
}

pub fn run(config: &Config) -> Outcome {
    match &config.command {
        Command::Construct(a) => run_construct(config, a),
        Command::Verify(a) => run_verify(config, a),
        Command::Wasserstein(a) => run_wasserstein(config, a),
        Command::Rates(a) => run_rates(config, a),
        Command::Gaps(a) => run_gaps(config, a),
        Command::Gradient(a) => run_gradient(config, a),
        Command::Center(a) => run_center(config, a),
        Command::Stein(a) => run_stein(config, a),
        Command::Simulate(a) => run_simulate(config, a),
    }
}

fn state(ell: usize) -> Result<EnergyState64, Failure> {
    EnergyState64::new(ell).map_err(|e| Failure::Config(e.to_string()))
}

fn build(ell: usize, counts: &Option<Vec<usize>>, n: Option<usize>) -> Result<(EnergyState64, MiwSequence64), Failure> {
    let st = state(ell)?;
    let counts = match (counts, n) {
        (Some(c), _) => c.clone(),
        (None, Some(n)) => auto_counts(&st, n).map_err(|e| Failure::Config(e.to_string()))?,
        (None, None) => return Err(Failure::Config("no counts".into())),
    };
    let seq = construct(&st, &counts)?;
    Ok((st, seq))
}

fn load(path: &std::path::Path) -> Result<(EnergyState64, MiwSequence64), Failure> {
    let file = artifact::read_sequence(path)?;
    let st = state(file.record.ell)?;
    let seq = file.record.into_sequence(&st).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok((st, seq))
}

fn sequence(a: &SequenceArgs) -> Result<(EnergyState64, MiwSequence64), Failure> {
    match &a.input {
        Some(p) => load(p),
        None => build(a.ell, &a.counts, a.n),
    }
}

fn joined(counts: &[usize], sep: &str) -> String {
    counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(sep)
}

fn run_construct(config: &Config, a: &SequenceArgs) -> Outcome {
    let (st, seq) = build(a.ell, &a.counts, a.n)?;
    artifact::write_sequence(config, seq.record())?;
    let r = &seq.residuals;
    let report = Report::new(config);
    report.line(format!("ell={} N={} counts={}", st.ell, seq.len(), joined(&seq.counts, ",")));
    report.line(format!(
        "residuals interior={:e} left_bc={:e} right_bc={:e}",
        r.interior, r.left_bc, r.right_bc
    ));
    let worst = r.interior.max(r.left_bc).max(r.right_bc);
    if worst > config.tolerances.residual_tol {
        report.line(format!("warning: residual {worst:e} exceeds {:e}", config.tolerances.residual_tol));
    }
    Ok(())
}

fn run_verify(config: &Config, a: &InputArgs) -> Outcome {
    let (st, seq) = load(&a.input)?;
    let v = verify(&seq, &st);
    let tol = config.tolerances.residual_tol;
    let mut checks: Vec<(&str, String, bool)> = vec![
        ("interior", num(v.residuals.interior), v.residuals.interior <= tol),
        ("left_bc", num(v.residuals.left_bc), v.residuals.left_bc <= tol),
        ("right_bc", num(v.residuals.right_bc), v.residuals.right_bc <= tol),
        ("counts", joined(&v.achieved_counts, ";"), v.counts_match),
        ("min_root_distance", num(v.min_root_distance), v.min_root_distance > 0.0),
    ];
    if let Some(s) = v.symmetry {
        checks.push(("symmetry", num(s), s <= tol));
    }
    let rows: Vec<Vec<String>> =
        checks.iter().map(|(k, v, ok)| vec![k.to_string(), v.clone(), ok.to_string()]).collect();
    artifact::write_csv_records(config, &["check".into(), "value".into(), "pass".into()], &rows)?;
    let report = Report::new(config);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.2).map(|c| c.0).collect();
    for (k, v, ok) in &checks {
        report.line(format!("{k}: {v} {}", if *ok { "ok" } else { "FAILED" }));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct RegionRow {
    k: usize,
    distance: f64,
    share: f64,
    mass: f64,
}

fn run_wasserstein(config: &Config, a: &SequenceArgs) -> Outcome {
    let (st, seq) = sequence(a)?;
    let w = wasserstein(&seq, &st)?;
    let masses = st.region_masses()?;
    let rows: Vec<RegionRow> = w
        .per_region
        .iter()
        .zip(&masses)
        .map(|(r, m)| RegionRow { k: r.k, distance: r.distance, share: r.share, mass: m.mass })
        .collect();
    artifact::write_csv(config, "k,distance,share,mass", &rows)?;
    let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let c: Vec<f64> = rows.iter().map(|r| r.share).collect();
    let mix = mixture_distance(&d, &c, &masses)?;
    let report = Report::new(config);
    report.line(format!("distance={:e} coupling_bound={:e} scaled={:.6}", w.distance, w.coupling_bound, w.scaled));
    report.line(format!(
        "mixture assembled={:e} proof_bound={:e} stated_bound={:e} holds={}",
        mix.assembled, mix.proof_bound, mix.stated_bound, mix.holds
    ));
    Ok(())
}

fn run_rates(config: &Config, a: &SweepArgs) -> Outcome {
    let st = state(a.ell)?;
    let ns = a.n_grid.values();
    let rows = rate_sweep(&st, &ns)?;
    artifact::write_csv(config, RATE_HEADER, &rows)?;
    let report = Report::new(config);
    report.line(format!("rows={}", rows.len()));
    if rows.len() >= 4 {
        let ds: Vec<f64> = rows.iter().map(|r| r.wasserstein).collect();
        let fit = rate_fit(&ns, &ds)?;
        report.line(format!("slope={:.4} scaled_spread={:.4}", fit.slope, fit.scaled_spread()));
    }
    Ok(())
}

#[derive(Serialize)]
struct GapRow {
    #[serde(rename = "N")]
    n: usize,
    counts: String,
    max_gap: f64,
    argmax: usize,
    first_gap: f64,
    last_gap: f64,
    x1: f64,
    #[serde(rename = "xN")]
    xn: f64,
    right_span_ratio: f64,
    left_span_ratio: f64,
    span_lhs: f64,
    span_rhs: f64,
}

const GAP_HEADER: &str =
    "N,counts,max_gap,argmax,first_gap,last_gap,x1,xN,right_span_ratio,left_span_ratio,span_lhs,span_rhs";

fn run_gaps(config: &Config, a: &SweepArgs) -> Outcome {
    let st = state(a.ell)?;
    let rows: Vec<GapRow> = a
        .n_grid
        .values()
        .par_iter()
        .map(|&n| -> Result<GapRow, MiwError> {
            let seq = miw_core::construct_auto(&st, n)?;
            let g = gap_report(&seq, &st)?;
            let (lhs, rhs) = span_bound(&seq, &st)?;
            Ok(GapRow {
                n,
                counts: joined(&seq.counts, ";"),
                max_gap: g.max_gap,
                argmax: g.argmax,
                first_gap: g.first_gap,
                last_gap: g.last_gap,
                x1: g.span.0,
                xn: g.span.1,
                right_span_ratio: g.right_span_ratio,
                left_span_ratio: g.left_span_ratio,
                span_lhs: lhs,
                span_rhs: rhs,
            })
        })
        .collect::<Result<_, _>>()?;
    artifact::write_csv(config, GAP_HEADER, &rows)?;
    let decreasing = rows.windows(2).all(|w| w[1].max_gap < w[0].max_gap);
    let lemma = rows.iter().all(|r| r.span_lhs <= r.span_rhs);
    let report = Report::new(config);
    report.line(format!("rows={} max_gap_decreasing={decreasing} span_lemma_holds={lemma}", rows.len()));
    Ok(())
}

fn run_gradient(config: &Config, a: &GradientArgs) -> Outcome {
    let (st, seq) = sequence(&a.sequence)?;
    let rep = gradient_report(&seq, &st, &[])?;
    let x = &seq.points;
    let n = x.len();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            let reduced = if i >= 1 && i + 1 < n { grad_on_miw(x, &st, i + 1).map(num).unwrap_or_default() } else { String::new() };
            vec![(i + 1).to_string(), num(x[i]), num(rep.grad[i]), reduced]
        })
        .collect();
    artifact::write_csv_records(config, &["n".into(), "x".into(), "grad".into(), "grad_miw".into()], &rows)?;
    let report = Report::new(config);
    report.line(format!("fd_error={:e}", rep.fd_error));
    for &t in &a.probes {
        let k = locate(x, t);
        let at = grad_on_miw(x, &st, k).map(|g| format!("{g:e}")).unwrap_or_else(|_| "n/a (boundary)".into());
        let limit = miw_core::stability::limit_formula(&st, t)
            .map(|v| format!("{:e}", v.value))
            .unwrap_or_else(|e| e.to_string());
        report.line(format!("t={t} n(t)={k} grad={at} limit={limit}"));
    }
    if let Some((g, closed)) = rep.center_value {
        report.line(format!("center grad={g:e} closed_form={closed:e}"));
    }
    Ok(())
}

fn run_center(config: &Config, a: &CenterArgs) -> Outcome {
    let st = state(1)?;
    let table = center_scaling(&st, &a.n_grid.values())?;
    let slopes = table.local_slopes();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .zip(&slopes)
        .map(|(r, s)| vec![r.n.to_string(), num(r.x_center), num(r.grad_center), s.map(num).unwrap_or_default()])
        .collect();
    let header: Vec<String> = CENTER_HEADER.split(',').map(String::from).collect();
    artifact::write_csv_records(config, &header, &rows)?;
    let report = Report::new(config);
    report.line(format!("slope={:.4} grad_slope={:.4}", table.slope, table.grad_slope));
    Ok(())
}

fn run_stein(config: &Config, a: &SteinArgs) -> Outcome {
    let st = state(a.ell)?;
    let h = TestFunction::parse(&a.h).ok_or_else(|| Failure::Config(format!("unknown test function {}", a.h)))?;
    let probe = build_gh(&st, a.region, h, a.grid)?;
    artifact::write_csv(config, SAMPLE_HEADER, &probe.samples)?;
    let report = Report::new(config);
    let res = probe.max_residual();
    report.line(format!(
        "region=({}, {}) E_P[h]={:.12} E_P[X]={:.12} max_residual={res:e}",
        probe.a, probe.b, probe.e_p_h, probe.mean
    ));
    if res > config.tolerances.stein_tol {
        report.line(format!("warning: residual exceeds {:e}", config.tolerances.stein_tol));
    }
    if let Some(n) = a.n {
        let seq = miw_core::construct_auto(&st, n)?;
        let part = seq.region_part(a.region);
        if part.len() >= 2 {
            let b = stein_bound(&probe, part, a.beta)?;
            report.line(format!(
                "N={n} beta={} bound={:e} actual={:e} sup_gpp={:e}",
                a.beta, b.bound, b.actual, b.sup_gpp
            ));
        } else {
            report.line(format!("N={n}: fewer than two points in region {}", a.region));
        }
    }
    Ok(())
}

fn simulate_start(a: &SimulateArgs) -> Result<Vec<f64>, Failure> {
    if let Some(p) = &a.init {
        return Ok(load(p)?.1.points);
    }
    if let Some(ell) = a.ell {
        return Ok(build(ell, &a.counts, a.n)?.1.points);
    }
    let target = a.arbitrary.ok_or_else(|| Failure::Config("no start given".into()))?;
    matched_start(target).map_err(|e| Failure::Config(e.to_string()))
}

fn run_simulate(config: &Config, a: &SimulateArgs) -> Outcome {
    let x = simulate_start(a)?;
    let n = x.len();
    if a.momenta.as_ref().is_some_and(|p| p.len() != n) {
        return Err(Failure::Config(format!("--momenta needs {n} values")));
    }
    let init = PhaseState::new(x, a.momenta.clone()).map_err(|e| Failure::Config(e.to_string()))?;
    let (traj, failure) = match simulate(&init, a.dt, a.t_max, a.stride) {
        Ok(t) => (t, None),
        Err(e) => (e.partial, Some(Failure::Computation(e.error.to_string()))),
    };
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("p{i}")));
    header.push("H".into());
    let rows: Vec<Vec<String>> = traj
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![num(s.t)];
            r.extend(s.x.iter().map(|&v| num(v)));
            r.extend(s.p.iter().map(|&v| num(v)));
            r.push(num(s.energy()));
            r
        })
        .collect();
    artifact::write_csv_records(config, &header, &rows)?;
    let report = Report::new(config);
    report.line(format!(
        "samples={} final_drift={:e} max_drift={:e} excursion={:.6}",
        traj.samples.len(),
        traj.last().relative_drift(),
        traj.max_drift,
        traj.excursion()
    ));
    if traj.max_drift > config.tolerances.drift_tol {
        report.line(format!("warning: drift exceeds {:e}", config.tolerances.drift_tol));
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
