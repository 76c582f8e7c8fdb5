//! Command-line front end: scheme generation, table validation, spectra,
//! wave simulation, convergence studies, and the summary table, all with
//! reproducible file outputs and provenance manifests.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 infeasible construction
//! (no positive norm weights for the requested order/shift count),
//! 64 usage error.

use clap::{Args, Parser, Subcommand};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use upwind_sbp::error::Error;
use upwind_sbp::family::boundary_family;
use upwind_sbp::grid::{GridMode, ShiftParams};
use upwind_sbp::operators::{reflection_residual, verify_boundary_order, verify_sbp, OperatorSet};
use upwind_sbp::optim::{
    build_scheme, derive_parameters, optimize_shifts, scheme_config, BuiltScheme,
};
use upwind_sbp::report::{digest_file, fmt_g17, RunManifest};
use upwind_sbp::spectra::spectral_report;
use upwind_sbp::stencil::InteriorStencil;
use upwind_sbp::tables::{all_scheme_ids, golden, shift_params, validate, GOLDEN};
use upwind_sbp::wavesim::{
    convergence_study, fit_order, gaussian, simulate_leapfrog, wave_operator, REFINEMENT_CELLS,
};

#[derive(Parser)]
#[command(
    name = "upwind-sbp",
    version,
    about = "Dual-pair summation-by-parts derivative operators on grids with shifted near-boundary nodes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct an operator pair and write it as JSON (plus an optimization log)
    Generate(GenerateArgs),
    /// Inspect or validate the built-in grid and weight tables
    Tables {
        #[command(subcommand)]
        cmd: TablesCmd,
    },
    /// Check a generated operator file: SBP identity, boundary accuracy, symmetry
    Validate(ValidateArgs),
    /// Report interior and full spectral bounds for a scheme
    Spectra(SpectraArgs),
    /// Integrate the Neumann wave problem and report C-norm errors
    Simulate(SimulateArgs),
    /// Grid-refinement study of the wave problem at a fixed time
    Converge(ConvergeArgs),
    /// Summary table over all built-in schemes: fitted order and spectral ratios
    ReportTable1(ReportTable1Args),
    /// Data series for the standard plots (4: convergence, 5: error vs time, 6: best per order)
    Figures(FiguresArgs),
}

#[derive(Args)]
struct SchemeSelect {
    /// Interior accuracy order 2p (4, 6, 8, 10, or 12)
    #[arg(long)]
    order: usize,
    /// Number of shifted spacings at each end
    #[arg(long)]
    shifted: usize,
    /// Override the boundary spacings (decimal strings; default: built-in table,
    /// or a spacing search when the table has no entry)
    #[arg(long, value_delimiter = ',')]
    h_params: Option<Vec<String>>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    select: SchemeSelect,
    /// Cell count N of the written operator (N+1 nodes)
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Grid scaling: "scaled" covers [0,1], "unit" has interior spacing 1
    #[arg(long, default_value = "scaled")]
    mode: String,
    /// Output path for the operator JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TablesCmd {
    /// Print every built-in grid and weight set
    List,
    /// Re-derive weights from the printed grids and count matching digits
    Validate {
        /// Restrict to one scheme, e.g. --scheme 8,2
        #[arg(long, value_parser = parse_scheme_id)]
        scheme: Option<(usize, usize)>,
    },
}

#[derive(Args)]
struct ValidateArgs {
    /// Operator JSON produced by `generate`
    #[arg(long)]
    scheme: PathBuf,
}

#[derive(Args)]
struct SpectraArgs {
    #[command(flatten)]
    select: SchemeSelect,
    /// Cell count for the full-operator bound
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Operator JSON produced by `generate`
    #[arg(long)]
    scheme: PathBuf,
    /// Cell count to run at (defaults to the file's grid)
    #[arg(long)]
    grid: Option<usize>,
    /// Final time
    #[arg(long)]
    t_final: f64,
    /// Fraction of the stability limit used for the time step
    #[arg(long, default_value_t = 0.5)]
    cfl: f64,
    /// Sample times for error output, e.g. --samples 0.1,0.2,0.5
    #[arg(long, value_delimiter = ',')]
    samples: Vec<f64>,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    select: SchemeSelect,
    /// Evaluation time for the error
    #[arg(long)]
    time: f64,
    /// "spectral" (exact in time) or "leapfrog"
    #[arg(long, default_value = "spectral")]
    method: String,
    /// Time-step fraction for the leapfrog method
    #[arg(long, default_value_t = 0.5)]
    cfl: f64,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportTable1Args {
    /// Evaluation time for the fitted order column
    #[arg(long, default_value_t = 0.5)]
    time: f64,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Which data set: 4 (grid convergence), 5 (error vs time, order 8),
    /// 6 (error vs time, best shift count per order)
    #[arg(long)]
    fig: u32,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scheme_id(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected ORDER,SHIFTS, got {s:?}"))?;
    let order = a.trim().parse().map_err(|_| format!("bad order {a:?}"))?;
    let shifts = b.trim().parse().map_err(|_| format!("bad shift count {b:?}"))?;
    Ok((order, shifts))
}

fn main() {
    // Die quietly when a downstream pipe closes (e.g. `tables list | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    init_workers();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

/// Worker-count override for the refinement sweeps.
fn init_workers() {
    if let Ok(v) = std::env::var("UPWIND_SBP_WORKERS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring UPWIND_SBP_WORKERS={v:?} (want a positive integer)"),
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonPositiveNorm { .. }
        | Error::RankDeficient { .. }
        | Error::ResidualTooLarge { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Tables { cmd } => cmd_tables(cmd),
        Cmd::Validate(args) => cmd_validate(args),
        Cmd::Spectra(args) => cmd_spectra(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Converge(args) => cmd_converge(args),
        Cmd::ReportTable1(args) => cmd_report_table1(args),
        Cmd::Figures(args) => cmd_figures(args),
    }
}

/// Resolve the scheme selection: explicit spacings beat the built-in table;
/// a selection with neither runs the spacing search.
fn resolve_scheme(select: &SchemeSelect) -> Result<BuiltScheme, Error> {
    if ![4, 6, 8, 10, 12].contains(&select.order) {
        return Err(Error::InvalidParameter(format!(
            "order must be one of 4, 6, 8, 10, 12; got {}",
            select.order
        )));
    }
    let p = select.order / 2;
    if select.shifted > p.saturating_sub(1) {
        return Err(Error::InvalidParameter(format!(
            "order {} supports at most {} shifted spacings; got {}",
            select.order,
            p - 1,
            select.shifted
        )));
    }
    if let Some(hp) = &select.h_params {
        if hp.len() != select.shifted {
            return Err(Error::InvalidParameter(format!(
                "--shifted {} but {} spacing values given",
                select.shifted,
                hp.len()
            )));
        }
        let sp = ShiftParams::from_strings(hp)?;
        return build_from_params(select.order, sp);
    }
    match shift_params(select.order, select.shifted) {
        Ok(sp) => build_from_params(select.order, sp),
        Err(Error::UnknownScheme { .. }) => {
            eprintln!(
                "no built-in grid for order {} with {} shifts; searching spacings (this can take a minute)",
                select.order, select.shifted
            );
            optimize_shifts(select.order, select.shifted, &scheme_config(select.order))
        }
        Err(e) => Err(e),
    }
}

fn build_from_params(order: usize, sp: ShiftParams) -> Result<BuiltScheme, Error> {
    let stencil = InteriorStencil::new(order / 2);
    let family = boundary_family(&stencil, &sp)?;
    let cfg = scheme_config(order);
    let derived = derive_parameters(&stencil, &sp, &family, &cfg)?;
    let e = family.e_matrix(&derived.c);
    Ok(BuiltScheme { order, shifts: sp, stencil, family, c: derived.c.clone(), e, derived })
}

fn parse_mode(s: &str) -> Result<GridMode, Error> {
    match s {
        "scaled" => Ok(GridMode::Scaled),
        "unit" => Ok(GridMode::Unit),
        other => Err(Error::InvalidParameter(format!(
            "mode must be \"scaled\" or \"unit\", got {other:?}"
        ))),
    }
}

/// Write `body` to `out`, or to stdout when no path is given. File outputs
/// get a sibling manifest; stdout output does not create artifacts.
fn deliver(
    out: Option<&Path>,
    body: &str,
    manifest: &mut RunManifest,
    started: Instant,
) -> Result<(), Error> {
    match out {
        None => {
            print!("{body}");
            std::io::stdout().flush()?;
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, body)?;
            manifest.outputs.push(digest_file(path)?);
            manifest.duration_ms = started.elapsed().as_millis() as u64;
            let mpath = manifest_path(path);
            manifest.write(&mpath)?;
            eprintln!("wrote {} (+ {})", path.display(), mpath.display());
            Ok(())
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let started = Instant::now();
    let mode = parse_mode(&args.mode)?;
    let scheme = resolve_scheme(&args.select)?;
    let op = scheme.assemble(args.grid, mode)?;
    let sbp = verify_sbp(&op);
    if !sbp.ok() {
        return Err(Error::ResidualTooLarge {
            residual: sbp.identity_residual,
            bound: sbp.identity_bound,
        });
    }
    let acc = verify_boundary_order(&op);
    let out = args.out.unwrap_or_else(|| {
        PathBuf::from(format!("operators_{}_{}.json", args.select.order, args.select.shifted))
    });
    let mut manifest = RunManifest::new(
        "generate",
        serde_json::json!({
            "order": args.select.order,
            "shifted": args.select.shifted,
            "h_params": scheme.shifts.strings(),
            "grid": args.grid,
            "mode": args.mode,
        }),
    );
    let file = std::fs::File::create(&out)?;
    op.write_json(std::io::BufWriter::new(file))?;
    manifest.outputs.push(digest_file(&out)?);

    // optimization log: objective value at each recorded improvement
    let log_path = out.with_extension("log.csv");
    let mut log = String::from("iteration,objective\n");
    for (it, val) in &scheme.derived.trace {
        log.push_str(&format!("{it},{}\n", fmt_g17(*val)));
    }
    std::fs::write(&log_path, &log)?;
    manifest.outputs.push(digest_file(&log_path)?);

    manifest.duration_ms = started.elapsed().as_millis() as u64;
    let mpath = manifest_path(&out);
    manifest.write(&mpath)?;

    let worst_acc = acc.residuals.iter().cloned().fold(0.0f64, f64::max);
    eprintln!(
        "order {} with {} shifts on N+1 = {} nodes: identity residual {:.2e} (bound {:.2e}), boundary accuracy residual {:.2e}, objective {:.4e}",
        args.select.order,
        args.select.shifted,
        args.grid + 1,
        sbp.identity_residual,
        sbp.identity_bound,
        worst_acc,
        scheme.derived.detail.value,
    );
    eprintln!("wrote {} (+ {}, {})", out.display(), log_path.display(), mpath.display());
    Ok(())
}

fn cmd_tables(cmd: TablesCmd) -> Result<(), Error> {
    match cmd {
        TablesCmd::List => {
            println!("order,shifts,spacings,weights");
            for g in GOLDEN {
                let mu = if g.mu.is_empty() { "-".to_string() } else { g.mu.join(" ") };
                println!("{},{},{},{}", g.order, g.shifts, g.h_params.join(" "), mu);
            }
            Ok(())
        }
        TablesCmd::Validate { scheme } => {
            let targets: Vec<(usize, usize)> = match scheme {
                Some((order, shifts)) => {
                    if golden(order, shifts).is_none() {
                        return Err(Error::UnknownScheme { order, shifts });
                    }
                    vec![(order, shifts)]
                }
                None => GOLDEN
                    .iter()
                    .filter(|g| !g.mu.is_empty())
                    .map(|g| (g.order, g.shifts))
                    .collect(),
            };
            let mut all_ok = true;
            for (order, shifts) in targets {
                let v = validate(order, shifts)?;
                if v.weights.is_empty() {
                    println!("({order},{shifts}): grid-only row, no published weights to check");
                    continue;
                }
                let ok = v.passes(10.0);
                all_ok &= ok;
                println!(
                    "({order},{shifts}): {}: {} weights, worst agreement {:.1} significant digits, subsystem residual {:.1e}",
                    if ok { "ok" } else { "MISMATCH" },
                    v.weights.len(),
                    v.min_sig_digits,
                    v.ds_residual,
                );
                if !ok {
                    for w in &v.weights {
                        println!(
                            "  weight {}: published {} vs derived {} ({:.1} digits)",
                            w.index,
                            fmt_g17(w.published),
                            fmt_g17(w.derived),
                            w.sig_digits
                        );
                    }
                    if let Some(d) = v.uniform_distance {
                        if d < 1e-12 {
                            println!(
                                "  note: the published weights agree with the UNSHIFTED-grid solution to {d:.1e}; the table row reproduces the wrong grid"
                            );
                        }
                    }
                }
            }
            if all_ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(
                    "published weight mismatch detected (see report above)".into(),
                ))
            }
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Error> {
    let file = std::fs::File::open(&args.scheme)?;
    let op = OperatorSet::read_json(std::io::BufReader::new(file))?;
    let sbp = verify_sbp(&op);
    let acc = verify_boundary_order(&op);
    let refl = reflection_residual(&op);
    let spec = spectral_report(&op);
    let worst_acc = acc.residuals.iter().cloned().fold(0.0f64, f64::max);
    println!(
        "file: {}\norder {} with {} shifts, N+1 = {} nodes, mode {:?}",
        args.scheme.display(),
        op.order(),
        op.shift_count(),
        op.n_cells() + 1,
        op.grid().mode(),
    );
    println!(
        "identity residual {:.3e} (bound {:.3e}): {}",
        sbp.identity_residual,
        sbp.identity_bound,
        if sbp.ok() { "ok" } else { "FAIL" }
    );
    println!("bilinear-form residual {:.3e}", sbp.bilinear_residual);
    println!("boundary accuracy residual {worst_acc:.3e} (monomials through degree p)");
    println!("end-to-end reflection residual {refl:.3e}");
    println!(
        "spectra: interior {:.6}, full {:.6}, ratio {:.4}, interior Courant {:.4}",
        spec.lambda_int, spec.lambda_full, spec.ratio, spec.interior_courant
    );
    if sbp.ok() && refl == 0.0 {
        Ok(())
    } else {
        Err(Error::ResidualTooLarge {
            residual: sbp.identity_residual.max(refl),
            bound: sbp.identity_bound,
        })
    }
}

fn cmd_spectra(args: SpectraArgs) -> Result<(), Error> {
    let started = Instant::now();
    let scheme = resolve_scheme(&args.select)?;
    let op = scheme.assemble(args.grid, GridMode::Scaled)?;
    let rep = spectral_report(&op);
    let mut body = String::from("order,shifts,N,lambda_int,lambda_full,ratio,interior_courant\n");
    body.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        args.select.order,
        args.select.shifted,
        args.grid,
        fmt_g17(rep.lambda_int),
        fmt_g17(rep.lambda_full),
        fmt_g17(rep.ratio),
        fmt_g17(rep.interior_courant),
    ));
    let mut manifest = RunManifest::new(
        "spectra",
        serde_json::json!({
            "order": args.select.order,
            "shifted": args.select.shifted,
            "grid": args.grid,
        }),
    );
    deliver(args.out.as_deref(), &body, &mut manifest, started)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let started = Instant::now();
    if !(args.cfl > 0.0 && args.cfl < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cfl must be in (0,1), got {}",
            args.cfl
        )));
    }
    let file = std::fs::File::open(&args.scheme)?;
    let mut op = OperatorSet::read_json(std::io::BufReader::new(file))?;
    if let Some(n) = args.grid {
        if n != op.n_cells() {
            op = op.rebuild(n, GridMode::Scaled)?;
        }
    }
    let mut samples = args.samples.clone();
    samples.sort_by(f64::total_cmp);
    samples.retain(|&t| t > 0.0 && t <= args.t_final);
    let u0: Vec<f64> = op.grid().nodes().iter().map(|&x| gaussian(x - 0.5)).collect();
    let run = simulate_leapfrog(&op, &u0, args.t_final, args.cfl, &samples, true);
    if let Some((t, err)) = run.samples.iter().find(|(_, e)| !e.is_finite() || *e > 1e3) {
        return Err(Error::OptimizationFailed(format!(
            "instability detected: C-norm error {err:.3e} at t = {t:.6} (dt = {:.3e}, {} steps)",
            run.dt, run.steps
        )));
    }
    let mut body = String::from("t,error\n");
    for (t, err) in &run.samples {
        body.push_str(&format!("{},{}\n", fmt_g17(*t), fmt_g17(*err)));
    }
    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::json!({
            "scheme": args.scheme.display().to_string(),
            "grid": op.n_cells(),
            "t_final": args.t_final,
            "cfl": args.cfl,
            "samples": samples,
        }),
    );
    manifest.inputs.push(digest_file(&args.scheme)?);
    deliver(args.out.as_deref(), &body, &mut manifest, started)
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), Error> {
    let started = Instant::now();
    let scheme = resolve_scheme(&args.select)?;
    let rows: Vec<(usize, f64, f64)> = match args.method.as_str() {
        "spectral" => {
            let study = convergence_study(&scheme, args.time, &REFINEMENT_CELLS)?;
            study.rows.iter().map(|r| (r.n_cells, r.h, r.error)).collect()
        }
        "leapfrog" => {
            use rayon::prelude::*;
            REFINEMENT_CELLS
                .par_iter()
                .map(|&n| -> Result<(usize, f64, f64), Error> {
                    let op = scheme.assemble(n, GridMode::Scaled)?;
                    let u0: Vec<f64> =
                        op.grid().nodes().iter().map(|&x| gaussian(x - 0.5)).collect();
                    let run =
                        simulate_leapfrog(&op, &u0, args.time, args.cfl, &[args.time], true);
                    let err = run.samples.last().map(|&(_, e)| e).unwrap_or(f64::NAN);
                    Ok((n, op.h(), err))
                })
                .collect::<Result<Vec<_>, Error>>()?
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "method must be \"spectral\" or \"leapfrog\", got {other:?}"
            )))
        }
    };
    let pairs: Vec<(f64, f64)> = rows.iter().map(|&(_, h, e)| (h, e)).collect();
    let fitted = fit_order(&pairs);
    let mut body = String::from("N,h,error,P_num\n");
    for (n, h, err) in &rows {
        body.push_str(&format!(
            "{},{},{},{}\n",
            n,
            fmt_g17(*h),
            fmt_g17(*err),
            fmt_g17(fitted)
        ));
    }
    let mut manifest = RunManifest::new(
        "converge",
        serde_json::json!({
            "order": args.select.order,
            "shifted": args.select.shifted,
            "time": args.time,
            "method": args.method,
            "cfl": args.cfl,
        }),
    );
    deliver(args.out.as_deref(), &body, &mut manifest, started)
}

fn cmd_report_table1(args: ReportTable1Args) -> Result<(), Error> {
    use rayon::prelude::*;
    let started = Instant::now();
    let ids = all_scheme_ids();
    let rows: Vec<(usize, usize, f64, f64, f64)> = ids
        .par_iter()
        .map(|&(order, shifts)| -> Result<_, Error> {
            let scheme = build_scheme(order, shifts)?;
            let op = scheme.assemble(100, GridMode::Scaled)?;
            let rep = spectral_report(&op);
            let study = convergence_study(&scheme, args.time, &REFINEMENT_CELLS)?;
            eprintln!(
                "({order},{shifts}): P_num = {:.3}, ratio = {:.4}, Courant = {:.4}",
                study.fitted_order, rep.ratio, rep.interior_courant
            );
            Ok((order, shifts, study.fitted_order, rep.ratio, rep.interior_courant))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut body = String::from("2p,K,P_num,lambda_int_over_lambda_full,interior_courant\n");
    for (order, shifts, p_num, ratio, courant) in &rows {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            order,
            shifts,
            fmt_g17(*p_num),
            fmt_g17(*ratio),
            fmt_g17(*courant)
        ));
    }
    let mut manifest = RunManifest::new(
        "report-table1",
        serde_json::json!({ "time": args.time, "schemes": rows.len() }),
    );
    deliver(args.out.as_deref(), &body, &mut manifest, started)
}

fn cmd_figures(args: FiguresArgs) -> Result<(), Error> {
    let started = Instant::now();
    let body = match args.fig {
        4 => figure_convergence()?,
        5 => figure_error_vs_time()?,
        6 => figure_best_per_order()?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "fig must be 4, 5, or 6; got {other}"
            )))
        }
    };
    let mut manifest = RunManifest::new("figures", serde_json::json!({ "fig": args.fig }));
    deliver(args.out.as_deref(), &body, &mut manifest, started)
}

/// Grid convergence of the order-8 schemes, K = 0..3, at t = 0.2 and 0.5.
fn figure_convergence() -> Result<String, Error> {
    let mut body = String::from("t,K,N,h,error\n");
    for k in 0..=3usize {
        let scheme = build_scheme(8, k)?;
        for &t in &[0.2, 0.5] {
            let study = convergence_study(&scheme, t, &REFINEMENT_CELLS)?;
            eprintln!("(8,{k}) t={t}: fitted order {:.3}", study.fitted_order);
            for r in &study.rows {
                body.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_g17(t),
                    k,
                    r.n_cells,
                    fmt_g17(r.h),
                    fmt_g17(r.error)
                ));
            }
        }
    }
    Ok(body)
}

const FIG_TIME_SAMPLES: usize = 50;

fn error_series(scheme: &BuiltScheme) -> Result<Vec<(f64, f64)>, Error> {
    let op = scheme.assemble(100, GridMode::Scaled)?;
    let w = wave_operator(&op);
    Ok((1..=FIG_TIME_SAMPLES)
        .map(|i| {
            let t = i as f64 / FIG_TIME_SAMPLES as f64;
            (t, w.gaussian_error(t))
        })
        .collect())
}

/// C-norm error against time for the order-8 schemes at N+1 = 101.
fn figure_error_vs_time() -> Result<String, Error> {
    let mut body = String::from("K,t,error\n");
    for k in 0..=3usize {
        let scheme = build_scheme(8, k)?;
        for (t, err) in error_series(&scheme)? {
            body.push_str(&format!("{},{},{}\n", k, fmt_g17(t), fmt_g17(err)));
        }
    }
    Ok(body)
}

/// For each order, the built-in shift count with the smallest error at
/// t = 0.5, and its error-vs-time series at N+1 = 101.
fn figure_best_per_order() -> Result<String, Error> {
    let mut body = String::from("2p,K,t,error\n");
    for order in [4usize, 6, 8, 10, 12] {
        let candidates: Vec<usize> = all_scheme_ids()
            .into_iter()
            .filter(|&(o, _)| o == order)
            .map(|(_, k)| k)
            .collect();
        let mut best: Option<(usize, f64, Vec<(f64, f64)>)> = None;
        for k in candidates {
            let scheme = build_scheme(order, k)?;
            let series = error_series(&scheme)?;
            let at_half = series
                .iter()
                .find(|(t, _)| (*t - 0.5).abs() < 1e-9)
                .map(|&(_, e)| e)
                .unwrap_or(f64::INFINITY);
            eprintln!("({order},{k}): error at t=0.5 is {at_half:.3e}");
            if best.as_ref().map_or(true, |(_, b, _)| at_half < *b) {
                best = Some((k, at_half, series));
            }
        }
        let (k, _, series) = best.expect("every order has at least one built-in scheme");
        for (t, err) in series {
            body.push_str(&format!("{},{},{},{}\n", order, k, fmt_g17(t), fmt_g17(err)));
        }
    }
    Ok(body)
}
