//! Command-line front end: netlist analysis, Purcell curves, filter
//! synthesis, robustness sweeps, the waveguide interference model, and
//! dual-solver validation.
//!
//! Exit codes: 0 success, 2 parse/usage errors, 3 solver errors, 4 missing
//! qubit node, 5 unresolvable sweep parameter, 6 validation tolerance
//! violation.

mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pifilter_core::num_complex::Complex64;

use pifilter_core::csvio;
use pifilter_core::design::{lumped_equivalent, multi_stub, sweep_2d, DesignError};
use pifilter_core::elements::{pi_filter_abcd, LineSpec};
use pifilter_core::interference::{InterferenceConfig, PlacedStub, StubSpec};
use pifilter_core::mna::s21_mna;
use pifilter_core::netlist::{ChainItem, Netlist, SeriesKind, ShuntKind};
use pifilter_core::network::{
    chain_abcd, pi_impedance_analytic, response_sweep, s_params, terminated_impedance, Load,
};
use pifilter_core::purcell::{protected_band, purcell_curve};
use pifilter_core::{velocity_from_eps_eff, FrequencyGrid};

#[derive(Parser)]
#[command(name = "pifilter", version, about = "Frequency-domain feedline network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// S-parameter sweep of a netlist (CSV, optional SVG of |S21| in dB).
    Analyze(AnalyzeArgs),
    /// Environmental admittance and Purcell relaxation time at qubit nodes.
    Purcell(PurcellArgs),
    /// Synthesize a stub filter for one or more target bands.
    Design(DesignArgs),
    /// Sweep one netlist parameter, mapping T_P over (parameter, frequency).
    Sweep(SweepArgs),
    /// Closed-form waveguide interference model: decay-rate suppression.
    Interference(InterferenceArgs),
    /// Cross-validate the cascade path against the nodal solver.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Start frequency in Hz.
    #[arg(long, default_value_t = 2.0e9)]
    fstart: f64,
    /// Stop frequency in Hz.
    #[arg(long, default_value_t = 7.0e9)]
    fstop: f64,
    /// Number of grid points (>= 2).
    #[arg(long, default_value_t = 1001)]
    points: usize,
}

impl GridArgs {
    fn build(&self) -> Result<FrequencyGrid, Failure> {
        if self.points < 2 {
            return Err(Failure::usage("--points must be at least 2"));
        }
        if !(self.fstart.is_finite() && self.fstop.is_finite())
            || self.fstart <= 0.0
            || self.fstart >= self.fstop
        {
            return Err(Failure::usage("need 0 < --fstart < --fstop"));
        }
        Ok(FrequencyGrid::linspace(self.fstart, self.fstop, self.points))
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Netlist file.
    #[arg(long)]
    netlist: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write an SVG plot of |S21| in dB next to the CSV.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct PurcellArgs {
    #[arg(long)]
    netlist: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
    /// Qubit node name; repeatable. Defaults to every declared node.
    #[arg(long = "qubit")]
    qubits: Vec<String>,
    /// Total qubit capacitance C_sigma in F; defaults to the node's
    /// cground plus its adjacent series capacitor.
    #[arg(long)]
    csigma: Option<f64>,
    /// Protection threshold in seconds for the reported intervals.
    #[arg(long, default_value_t = 1.0e-3)]
    threshold: f64,
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct DesignArgs {
    /// Target band as "flo:fhi" in Hz; repeatable for multi-band chains.
    #[arg(long = "band", required = true)]
    bands: Vec<String>,
    /// Effective permittivity (phase velocity = c/sqrt(eps_eff)).
    #[arg(long = "eps-eff", conflicts_with = "velocity")]
    eps_eff: Option<f64>,
    /// Phase velocity in m/s.
    #[arg(long)]
    velocity: Option<f64>,
    /// Characteristic impedance of the emitted lines.
    #[arg(long, default_value_t = 50.48)]
    ztl: f64,
    /// Emit series-LC branches instead of open stubs.
    #[arg(long)]
    lumped: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    netlist: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Map CSV path; the contour CSV lands next to it as
    /// `<stem>-contour.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Parameter path, e.g. "filter.inline.len" or "cout".
    #[arg(long)]
    param: String,
    /// Linear value range "lo:hi:n".
    #[arg(long, conflicts_with = "log_range")]
    range: Option<String>,
    /// Log-spaced value range "lo:hi:n".
    #[arg(long = "log-range")]
    log_range: Option<String>,
    #[arg(long = "qubit")]
    qubit: Option<String>,
    #[arg(long)]
    csigma: Option<f64>,
    #[arg(long, default_value_t = 1.0e-3)]
    threshold: f64,
}

#[derive(Args)]
struct InterferenceArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
    /// Stub spec, repeatable up to twice: `len=<m>,pos=<m>` or
    /// `omega=<rad/s>,kappa=<rad/s>,pos=<m>`.
    #[arg(long = "stub")]
    stubs: Vec<String>,
    /// Qubit-waveguide coupling amplitude g (overall scale).
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    /// Waveguide phase velocity in m/s.
    #[arg(long)]
    velocity: f64,
    /// Suppression factor for the reported windows (0 < factor < 1).
    #[arg(long, default_value_t = 0.1)]
    factor: f64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    netlist: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Tolerance on the cascade-vs-nodal |S21| relative deviation.
    #[arg(long = "tol-s21", default_value_t = 1.0e-8)]
    tol_s21: f64,
    /// Tolerance on the closed-form vs terminated-cascade filter impedance.
    #[arg(long = "tol-eq6", default_value_t = 1.0e-10)]
    tol_eq6: f64,
    /// Tolerance on the losslessness residual | |S11|^2 + |S21|^2 - 1 |.
    #[arg(long = "tol-lossless", default_value_t = 1.0e-9)]
    tol_lossless: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: msg.into(),
        }
    }

    fn new(code: u8, msg: impl Into<String>) -> Self {
        Failure {
            code,
            message: msg.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Purcell(a) => cmd_purcell(a),
        Command::Design(a) => cmd_design(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Interference(a) => cmd_interference(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pifilter: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_netlist(path: &Path) -> Result<Netlist, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Netlist::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    std::fs::write(path, content)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let netlist = load_netlist(&args.netlist)?;
    let grid = args.grid.build()?;
    let rows = response_sweep(&netlist, &grid);
    write_file(&args.out, &csvio::response_csv(&rows))?;
    if args.svg {
        let xs: Vec<f64> = rows.iter().map(|r| r.freq_hz).collect();
        let ys: Vec<f64> = rows
            .iter()
            .map(|r| 20.0 * r.s.s21.norm().max(1e-12).log10())
            .collect();
        let plot = svg::line_plot("|S21|", "frequency (Hz)", "|S21| (dB)", &xs, &ys);
        write_file(&sibling(&args.out, "svg"), &plot)?;
    }
    Ok(())
}

fn cmd_purcell(args: PurcellArgs) -> Result<(), Failure> {
    let netlist = load_netlist(&args.netlist)?;
    let grid = args.grid.build()?;
    let declared: Vec<String> = netlist.node_names().iter().map(|s| s.to_string()).collect();
    let nodes = if args.qubits.is_empty() {
        if declared.is_empty() {
            return Err(Failure::new(4, "netlist declares no qubit node"));
        }
        declared.clone()
    } else {
        args.qubits.clone()
    };
    for node in &nodes {
        if !declared.iter().any(|n| n == node) {
            return Err(Failure::new(4, format!("unknown qubit node '{node}'")));
        }
    }
    if !(args.threshold.is_finite() && args.threshold > 0.0) {
        return Err(Failure::usage("--threshold must be positive"));
    }
    for node in &nodes {
        let c_sigma = match args.csigma {
            Some(c) if c.is_finite() && c > 0.0 => c,
            Some(_) => return Err(Failure::usage("--csigma must be positive")),
            None => netlist.default_c_sigma(node).ok_or_else(|| {
                Failure::new(
                    4,
                    format!("node '{node}' has no default C_sigma; pass --csigma"),
                )
            })?,
        };
        let curve = purcell_curve(&netlist, node, c_sigma, &grid)
            .map_err(|e| Failure::new(4, e.to_string()))?;
        let out = if nodes.len() == 1 {
            args.out.clone()
        } else {
            with_tag(&args.out, node)
        };
        write_file(&out, &csvio::purcell_csv(&curve))?;
        if args.svg {
            let xs: Vec<f64> = curve.points.iter().map(|p| p.freq_hz).collect();
            let ys: Vec<f64> = curve.points.iter().map(|p| p.t_p.log10()).collect();
            let plot = svg::line_plot("Purcell time", "frequency (Hz)", "log10 T_P (s)", &xs, &ys);
            write_file(&sibling(&out, "svg"), &plot)?;
        }
        let intervals = protected_band(&curve, args.threshold);
        let max_tp = curve.points.iter().map(|p| p.t_p).fold(0.0, f64::max);
        let capped = curve.points.iter().filter(|p| p.capped).count();
        let mut line = String::new();
        let _ = write!(
            line,
            "{{\"node\":\"{node}\",\"c_sigma_f\":{},\"threshold_s\":{},\"max_tp_s\":{},\"capped_samples\":{capped},\"intervals_hz\":[",
            num(c_sigma),
            num(args.threshold),
            num(max_tp)
        );
        for (i, (lo, hi)) in intervals.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "[{},{}]", num(*lo), num(*hi));
        }
        line.push_str("]}");
        println!("{line}");
    }
    Ok(())
}

fn cmd_design(args: DesignArgs) -> Result<(), Failure> {
    let velocity = match (args.eps_eff, args.velocity) {
        (Some(e), None) if e.is_finite() && e > 0.0 => velocity_from_eps_eff(e),
        (None, Some(v)) if v.is_finite() && v > 0.0 => v,
        (None, None) => return Err(Failure::usage("pass --eps-eff or --velocity")),
        _ => return Err(Failure::usage("invalid --eps-eff/--velocity")),
    };
    if !(args.ztl.is_finite() && args.ztl > 0.0) {
        return Err(Failure::usage("--ztl must be positive"));
    }
    let mut bands = Vec::new();
    for spec in &args.bands {
        let (lo, hi) = spec
            .split_once(':')
            .ok_or_else(|| Failure::usage(format!("band '{spec}' is not flo:fhi")))?;
        let lo: f64 = lo
            .parse()
            .map_err(|_| Failure::usage(format!("bad band edge '{lo}'")))?;
        let hi: f64 = hi
            .parse()
            .map_err(|_| Failure::usage(format!("bad band edge '{hi}'")))?;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Failure::usage(format!("band '{spec}' needs 0 < flo <= fhi")));
        }
        bands.push((lo, hi));
    }
    let chain = multi_stub(&bands, velocity, args.ztl)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = String::new();
    for item in &chain {
        match item {
            ChainItem::Shunt(e) => {
                if let ShuntKind::Stub { z, len } = e.kind {
                    if args.lumped {
                        let lc = lumped_equivalent(len, z, velocity);
                        let _ = writeln!(out, "lc l={} c={}", num(lc.inductance), num(lc.capacitance));
                    } else {
                        let _ = writeln!(out, "stub z={} len={}", num(z), num(len));
                    }
                }
            }
            ChainItem::Series(e) => {
                if let SeriesKind::Tline { z, len } = e.kind {
                    let _ = writeln!(out, "tline z={} len={}", num(z), num(len));
                }
            }
            ChainItem::Branch(_) => {}
        }
    }
    print!("{out}");
    Ok(())
}

fn parse_range(spec: &str, log: bool) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::usage(format!("range '{spec}' is not lo:hi:n")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Failure::usage(format!("bad range value '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Failure::usage(format!("bad range value '{}'", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Failure::usage(format!("bad range count '{}'", parts[2])))?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) || n == 0 {
        return Err(Failure::usage(format!("range '{spec}' needs 0 < lo <= hi and n >= 1")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let vals = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if log {
                10f64.powf(lo.log10() + t * (hi.log10() - lo.log10()))
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect();
    Ok(vals)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let netlist = load_netlist(&args.netlist)?;
    let grid = args.grid.build()?;
    let values = match (&args.range, &args.log_range) {
        (Some(r), None) => parse_range(r, false)?,
        (None, Some(r)) => parse_range(r, true)?,
        _ => return Err(Failure::usage("pass exactly one of --range / --log-range")),
    };
    let declared: Vec<String> = netlist.node_names().iter().map(|s| s.to_string()).collect();
    let node = match &args.qubit {
        Some(n) => {
            if !declared.iter().any(|d| d == n) {
                return Err(Failure::new(4, format!("unknown qubit node '{n}'")));
            }
            n.clone()
        }
        None => match declared.as_slice() {
            [only] => only.clone(),
            [] => return Err(Failure::new(4, "netlist declares no qubit node")),
            _ => return Err(Failure::usage("several qubit nodes declared; pass --qubit")),
        },
    };
    let c_sigma = match args.csigma {
        Some(c) if c.is_finite() && c > 0.0 => c,
        Some(_) => return Err(Failure::usage("--csigma must be positive")),
        None => netlist
            .default_c_sigma(&node)
            .ok_or_else(|| Failure::new(4, format!("no default C_sigma for '{node}'")))?,
    };
    let map = sweep_2d(
        &netlist,
        &args.param,
        &values,
        &grid,
        &node,
        c_sigma,
        args.threshold,
    )
    .map_err(|e| match e {
        DesignError::Param(p) => Failure::new(5, p.to_string()),
        other => Failure::usage(other.to_string()),
    })?;
    write_file(&args.out, &csvio::sweep_map_csv(&map))?;
    let contour_path = contour_sibling(&args.out);
    write_file(&contour_path, &csvio::contour_csv(&map.contours))?;
    Ok(())
}

fn parse_stub(spec: &str) -> Result<PlacedStub, Failure> {
    let mut len = None;
    let mut omega = None;
    let mut kappa = None;
    let mut pos = None;
    for part in spec.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("stub spec '{spec}': expected key=value")))?;
        let x: f64 = v
            .parse()
            .map_err(|_| Failure::usage(format!("stub spec '{spec}': bad number '{v}'")))?;
        match k {
            "len" => len = Some(x),
            "omega" => omega = Some(x),
            "kappa" => kappa = Some(x),
            "pos" => pos = Some(x),
            other => {
                return Err(Failure::usage(format!("stub spec '{spec}': unknown key '{other}'")))
            }
        }
    }
    let position = pos.ok_or_else(|| Failure::usage(format!("stub spec '{spec}': missing pos=")))?;
    let spec_kind = match (len, omega, kappa) {
        (Some(l), None, None) if l > 0.0 => StubSpec::Length(l),
        (None, Some(w), Some(k)) if w > 0.0 && k > 0.0 => StubSpec::Mode { omega: w, kappa: k },
        _ => {
            return Err(Failure::usage(format!(
                "stub spec '{spec}': pass len= or omega=,kappa= (positive)"
            )))
        }
    };
    if !(position.is_finite() && position >= 0.0) {
        return Err(Failure::usage(format!("stub spec '{spec}': pos must be >= 0")));
    }
    Ok(PlacedStub {
        spec: spec_kind,
        position,
    })
}

fn cmd_interference(args: InterferenceArgs) -> Result<(), Failure> {
    if !(args.velocity.is_finite() && args.velocity > 0.0) {
        return Err(Failure::usage("--velocity must be positive"));
    }
    if !(args.coupling.is_finite() && args.coupling != 0.0) {
        return Err(Failure::usage("--coupling must be nonzero"));
    }
    if !(args.factor > 0.0 && args.factor < 1.0) {
        return Err(Failure::usage("--factor must be in (0, 1)"));
    }
    if args.stubs.len() > 2 {
        return Err(Failure::usage("at most two stubs are supported"));
    }
    let mut stubs = Vec::new();
    for s in &args.stubs {
        stubs.push(parse_stub(s)?);
    }
    if stubs.len() == 2 && stubs[1].position <= stubs[0].position {
        return Err(Failure::usage("stub positions must be strictly ascending"));
    }
    let grid = args.grid.build()?;
    let cfg = InterferenceConfig::new(args.coupling, args.velocity, stubs);
    let rows = csvio::interference_sweep(&cfg, &grid);
    write_file(&args.out, &csvio::interference_csv(&rows))?;
    let windows = pifilter_core::interference::suppression_window(&cfg, &grid, args.factor);
    let mut line = String::new();
    let _ = write!(
        line,
        "{{\"factor\":{},\"gamma0_rad_s\":{},\"windows_hz\":[",
        num(args.factor),
        num(cfg.gamma_zero())
    );
    for (i, (lo, hi)) in windows.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "[{},{}]", num(*lo), num(*hi));
    }
    line.push_str("]}");
    println!("{line}");
    Ok(())
}

/// Contiguous [stub, line, stub] runs in the main chain with a shared
/// characteristic impedance, eligible for the closed-form impedance check.
fn pi_runs(netlist: &Netlist) -> Vec<(LineSpec, LineSpec, LineSpec)> {
    let mut runs = Vec::new();
    let items = &netlist.chain;
    for w in items.windows(3) {
        let (s1, li, s2) = match (&w[0], &w[1], &w[2]) {
            (
                ChainItem::Shunt(a),
                ChainItem::Series(b),
                ChainItem::Shunt(c),
            ) => match (&a.kind, &b.kind, &c.kind) {
                (
                    ShuntKind::Stub { z: z1, len: l1 },
                    SeriesKind::Tline { z: zi, len: li },
                    ShuntKind::Stub { z: z2, len: l2 },
                ) => ((*z1, *l1), (*zi, *li), (*z2, *l2)),
                _ => continue,
            },
            _ => continue,
        };
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        if close(s1.0, li.0) && close(s2.0, li.0) {
            runs.push((
                LineSpec::new(s1.1, s1.0, netlist.velocity),
                LineSpec::new(s2.1, s2.0, netlist.velocity),
                LineSpec::new(li.1, li.0, netlist.velocity),
            ));
        }
    }
    runs
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let netlist = load_netlist(&args.netlist)?;
    let grid = args.grid.build()?;
    let mut s21_dev = (0.0f64, 0.0f64);
    let mut lossless_dev = (0.0f64, 0.0f64);
    for &f in grid.iter() {
        let omega = 2.0 * std::f64::consts::PI * f;
        let m = chain_abcd(&netlist, omega);
        if m.saturated {
            continue;
        }
        let s = s_params(&m.value, netlist.z_in, netlist.z_out);
        let mna = s21_mna(&netlist, omega).map_err(|e| Failure::new(3, e.to_string()))?;
        let dev = (mna - s.s21).norm() / s.s21.norm().max(1e-12);
        if dev > s21_dev.0 {
            s21_dev = (dev, f);
        }
        let residual = (s.s11.norm_sqr() + s.s21.norm_sqr() - 1.0).abs();
        if residual > lossless_dev.0 {
            lossless_dev = (residual, f);
        }
    }
    let runs = pi_runs(&netlist);
    let mut eq6_dev = (0.0f64, 0.0f64);
    for (lp, lm, li) in &runs {
        for &f in grid.iter() {
            let omega = 2.0 * std::f64::consts::PI * f;
            let analytic = pi_impedance_analytic(lp, lm, li, netlist.z_out, omega);
            let m = pi_filter_abcd(lp, lm, li, omega);
            if analytic.saturated || m.saturated {
                continue;
            }
            let reference = terminated_impedance(
                &m.value,
                Load::Impedance(Complex64::new(netlist.z_out, 0.0)),
            );
            if reference.saturated {
                continue;
            }
            let dev = (analytic.value - reference.value).norm() / reference.value.norm();
            if dev > eq6_dev.0 {
                eq6_dev = (dev, f);
            }
        }
    }
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let ok_s21 = s21_dev.0 <= args.tol_s21;
    let ok_eq6 = eq6_dev.0 <= args.tol_eq6;
    let ok_lossless = lossless_dev.0 <= args.tol_lossless;
    println!(
        "s21-dual-path: max_rel_dev={} at {} Hz (tol {}): {}",
        num(s21_dev.0),
        num(s21_dev.1),
        num(args.tol_s21),
        verdict(ok_s21)
    );
    println!(
        "eq6-analytic: max_rel_dev={} at {} Hz over {} filter run(s) (tol {}): {}",
        num(eq6_dev.0),
        num(eq6_dev.1),
        runs.len(),
        num(args.tol_eq6),
        verdict(ok_eq6)
    );
    println!(
        "losslessness: max_residual={} at {} Hz (tol {}): {}",
        num(lossless_dev.0),
        num(lossless_dev.1),
        num(args.tol_lossless),
        verdict(ok_lossless)
    );
    if ok_s21 && ok_eq6 && ok_lossless {
        Ok(())
    } else {
        let mut worst = Vec::new();
        if !ok_s21 {
            worst.push(format!("s21 dual-path {} at {} Hz", num(s21_dev.0), num(s21_dev.1)));
        }
        if !ok_eq6 {
            worst.push(format!("eq6 {} at {} Hz", num(eq6_dev.0), num(eq6_dev.1)));
        }
        if !ok_lossless {
            worst.push(format!(
                "losslessness {} at {} Hz",
                num(lossless_dev.0),
                num(lossless_dev.1)
            ));
        }
        Err(Failure::new(6, format!("tolerance violated: {}", worst.join("; "))))
    }
}

/// "map.csv" -> "map-contour.csv"
fn contour_sibling(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().to_string());
    let ext = path.extension().map(|s| s.to_string_lossy().to_string());
    let name = match (stem, ext) {
        (Some(s), Some(e)) => format!("{s}-contour.{e}"),
        (Some(s), None) => format!("{s}-contour"),
        _ => "contour.csv".to_string(),
    };
    path.with_file_name(name)
}

/// "curve.csv" + "qubit2" -> "curve.qubit2.csv"
fn with_tag(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().to_string());
    let ext = path.extension().map(|s| s.to_string_lossy().to_string());
    let name = match (stem, ext) {
        (Some(s), Some(e)) => format!("{s}.{tag}.{e}"),
        (Some(s), None) => format!("{s}.{tag}"),
        _ => tag.to_string(),
    };
    path.with_file_name(name)
}

fn sibling(path: &Path, new_ext: &str) -> PathBuf {
    path.with_extension(new_ext)
}
