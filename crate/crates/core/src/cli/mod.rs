//! Config-driven command-line front end.
//!
//! `ionchain <command> --config <file> [--out <file>] [--param key.path=value ...]`
//!
//! Tables are CSV with `#` comment headers, matrices are whitespace aligned; every
//! run with `--out` also writes a JSON mirror next to the text output.

pub mod config;
pub mod format;

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::anharmonic::{chi_for_config, ChiMatrix};
use crate::calibration::{
    com_frequency_scan, infer_pseudo_gradient, linear_fit, null_parameter, field_sensitivity, ModeLabel,
    PotentialFamily,
};
use crate::constants::MICRON;
use crate::dynamics::{
    coherence_half_time, fock_coherence, sideband_flop, thermal_gate_infidelity, FockSuperposition, ModeState,
    SidebandParams,
};
use crate::error::{Error, Result};
use crate::modes::{ground_state_size, lamb_dicke, mode_spectrum};
use crate::statics::{chain_length, solve_equilibrium};
use config::{one_based, parse_config, RunConfig, ScanKind};
use format::{precision_from_env, Fmt};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_RESONANCE: i32 = 4;
pub const EXIT_BRACKET: i32 = 5;

/// Relative size below which printed cross-coupling entries are written as zero.
pub const CHI_FLOOR: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "ionchain", version, about = "Normal modes and anharmonic couplings of trapped-ion chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// write the text output here (and a .json mirror beside it) instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// override a config value, e.g. `potential.lambdas_um.3=-230`
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// equilibrium, mode frequencies, eigenvectors and ground-state sizes
    Modes,
    /// cross-coupling matrix in Hz per quantum
    Chi,
    /// Fock-superposition coherence versus time
    Coherence,
    /// thermal infidelity of the geometric phase gate
    Gate,
    /// centre-of-mass frequency or chain length versus ion number
    Scan,
    /// parameter nulling the ion-order frequency shift
    Null,
    /// fractional frequency shift from a uniform field
    Sensitivity,
    /// two-ion blue-sideband flopping
    Flop,
}

/// Text and JSON renderings of one result.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub json: Value,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::InvalidParameter { .. }
        | Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch(_)
        | Error::Io(_) => EXIT_CONFIG,
        Error::Resonance { .. } => EXIT_RESONANCE,
        Error::NoSignChange { .. } | Error::RootNotConverged { .. } => EXIT_BRACKET,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs one command on an already parsed configuration.
pub fn execute(command: Command, cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    match command {
        Command::Modes => cmd_modes(cfg, fmt),
        Command::Chi => cmd_chi(cfg, fmt),
        Command::Coherence => cmd_coherence(cfg, fmt),
        Command::Gate => cmd_gate(cfg, fmt),
        Command::Scan => cmd_scan(cfg, fmt),
        Command::Null => cmd_null(cfg, fmt),
        Command::Sensitivity => cmd_sensitivity(cfg, fmt),
        Command::Flop => cmd_flop(cfg, fmt),
    }
}

/// Reads the config file, applies overrides and runs the command.
pub fn run(cli: &Cli) -> Result<Report> {
    let fmt = Fmt { digits: precision_from_env()? };
    let path = cli.config.as_ref().ok_or_else(|| Error::Config { path: "--config".into(), message: "required".into() })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text, &cli.params)?;
    execute(cli.command, &cfg, fmt)
}

/// JSON mirror path for `--out`: the same name with a `.json` extension.
pub fn mirror_path(out: &Path) -> Result<PathBuf> {
    let m = out.with_extension("json");
    if m == out {
        return Err(Error::Config { path: "--out".into(), message: "text output must not use the .json extension".into() });
    }
    Ok(m)
}

fn write_outputs(cli: &Cli, report: &Report) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    match &cli.out {
        None => std::io::stdout().write_all(report.text.as_bytes()).map_err(io),
        Some(out) => {
            let mirror = mirror_path(out)?;
            std::fs::write(out, &report.text).map_err(io)?;
            let mut json = serde_json::to_string_pretty(&report.json).map_err(|e| Error::Io(e.to_string()))?;
            json.push('\n');
            std::fs::write(mirror, json).map_err(io)
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli).and_then(|r| write_outputs(&cli, &r)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn header(command: &str, lines: &[String]) -> String {
    let mut s = format!("# ionchain {command}\n");
    for l in lines {
        s.push_str(&format!("# {l}\n"));
    }
    s
}

fn dof_labels(n_ions: usize, dims: usize) -> Vec<String> {
    let axes = ["x", "y", "z"];
    (0..n_ions * dims)
        .map(|k| if dims == 1 { format!("{}:z", k + 1) } else { format!("{}:{}", k / 3 + 1, axes[k % 3]) })
        .collect()
}

fn mode_labels(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("mode_{k}")).collect()
}

fn cmd_modes(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let species = cfg.chain_species()?;
    let pot = cfg.potential()?;
    let conf = solve_equilibrium(&species, &pot, None)?;
    let s = mode_spectrum(&conf)?;
    let n = s.n_modes();
    let labels = dof_labels(conf.n_ions(), conf.dims());

    let mut text = header("modes", &[format!("chain: {}", cfg.chain.join(" ")), "modes are numbered from 1, highest frequency first".into()]);
    text.push_str("# equilibrium positions\n# ion,species,x_m,y_m,z_m\n");
    for (i, p) in conf.positions.iter().enumerate() {
        text.push_str(&format!("{},{},{}\n", i + 1, species[i].label, fmt.row(p)));
    }
    text.push_str("# frequencies\n# mode,frequency_hz\n");
    for (k, f) in s.frequencies.iter().enumerate() {
        text.push_str(&format!("{},{}\n", k + 1, fmt.num(*f)));
    }
    let evec: Vec<Vec<f64>> = (0..s.eigenvectors.nrows()).map(|r| s.eigenvectors.row(r).iter().copied().collect()).collect();
    text.push_str("# eigenvectors (dimensionless): rows ion:axis, columns modes\n");
    text.push_str(&fmt.matrix(&labels, &mode_labels(n), &evec));
    let sigma: Vec<Vec<f64>> = (0..s.eigenvectors.nrows())
        .map(|r| (0..n).map(|k| ground_state_size(&s, r, k)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    text.push_str("# ground-state extent sigma_m (signed): rows ion:axis, columns modes\n");
    text.push_str(&fmt.matrix(&labels, &mode_labels(n), &sigma));

    let mut json = json!({
        "command": "modes",
        "chain": cfg.chain,
        "positions_m": conf.positions.iter().map(|p| fmt.json_vec(p)).collect::<Vec<_>>(),
        "frequencies_hz": fmt.json_vec(&s.frequencies),
        "eigenvectors": evec.iter().map(|r| fmt.json_vec(r)).collect::<Vec<_>>(),
        "sigma_m": sigma.iter().map(|r| fmt.json_vec(r)).collect::<Vec<_>>(),
    });
    if let Some(dk) = cfg.modes.as_ref().and_then(|m| m.delta_k_per_um) {
        let eta: Vec<Vec<f64>> = (0..s.eigenvectors.nrows())
            .map(|r| (0..n).map(|k| lamb_dicke(&s, dk / MICRON, r, k)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        text.push_str("# Lamb-Dicke parameters (dimensionless): rows ion:axis, columns modes\n");
        text.push_str(&fmt.matrix(&labels, &mode_labels(n), &eta));
        json["lamb_dicke"] = Value::Array(eta.iter().map(|r| fmt.json_vec(r)).collect());
    }
    Ok(Report { text, json })
}

/// The configured table if present, otherwise the matrix computed for the chain.
fn chi_source(cfg: &RunConfig) -> Result<ChiMatrix> {
    match cfg.chi_table() {
        Some(t) => t,
        None => {
            let conf = solve_equilibrium(&cfg.chain_species()?, &cfg.potential()?, None)?;
            Ok(chi_for_config(&conf)?.2)
        }
    }
}

fn cmd_chi(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let mut chi = chi_source(cfg).map_err(|e| match e {
        Error::Resonance { kind, modes, relative } => {
            Error::Resonance { kind, modes: modes.iter().map(|m| m + 1).collect(), relative }
        }
        e => e,
    })?;
    // round-off residue of exact cancellations would otherwise leak into golden files
    let floor = CHI_FLOOR * chi.chi.amax();
    chi.chi.apply(|v| {
        if v.abs() < floor {
            *v = 0.0
        }
    });
    let n = chi.n_modes();
    let p = chi.provenance;
    let mut lines = vec![
        format!("chain: {}", cfg.chain.join(" ")),
        "chi_hz: shift of mode row per quantum in mode column".into(),
        format!("sources: coulomb={} trap_cubic={} trap_quartic={}", p.coulomb, p.trap_cubic, p.trap_quartic),
    ];
    for w in &chi.warnings {
        let modes: Vec<String> = w.modes.iter().map(|m| (m + 1).to_string()).collect();
        lines.push(format!("warning: near resonance {} modes {} relative {}", w.kind, modes.join(" "), fmt.num(w.relative)));
    }
    let mut text = header("chi", &lines);
    text.push_str("# mode,frequency_hz\n");
    for (k, f) in chi.mode_frequencies.iter().enumerate() {
        text.push_str(&format!("{},{}\n", k + 1, fmt.num(*f)));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| chi.chi.row(i).iter().copied().collect()).collect();
    text.push_str("# chi_hz\n");
    let ml: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    text.push_str(&fmt.matrix(&ml, &ml, &rows));
    let json = json!({
        "command": "chi",
        "frequencies_hz": fmt.json_vec(&chi.mode_frequencies),
        "chi_hz": rows.iter().map(|r| fmt.json_vec(r)).collect::<Vec<_>>(),
        "warnings": chi.warnings.iter().map(|w| json!({
            "kind": w.kind, "modes": w.modes.iter().map(|m| m + 1).collect::<Vec<_>>(), "relative": fmt.json(w.relative),
        })).collect::<Vec<_>>(),
    });
    Ok(Report { text, json })
}

fn cmd_coherence(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let c = cfg.section("coherence", &cfg.coherence)?;
    let chi = chi_source(cfg)?;
    let env = cfg.environment()?;
    let mode = one_based("coherence.mode", c.mode, chi.n_modes())?;
    let sup = FockSuperposition::new(mode, c.n_upper).map_err(|e| Error::Config { path: "coherence.n_upper".into(), message: e.to_string() })?;
    if !(c.t_max_ms > 0.0) || c.points < 2 {
        return Err(Error::Config { path: "coherence".into(), message: "need t_max_ms > 0 and points >= 2".into() });
    }
    let t_max = c.t_max_ms * 1e-3;
    let half = coherence_half_time(&chi, sup, &env, t_max)?;
    let times: Vec<f64> = (0..c.points).map(|k| t_max * k as f64 / (c.points - 1) as f64).collect();
    let values = times.iter().map(|&t| fock_coherence(&chi, sup, &env, t)).collect::<Result<Vec<_>>>()?;
    let half_text = half.map(|h| fmt.num(h)).unwrap_or_else(|| "none".into());
    let mut text = header(
        "coherence",
        &[format!("mode {} superposition |0> + |{}>", c.mode, c.n_upper), format!("half_time_s: {half_text}")],
    );
    text.push_str("# time_s,coherence\n");
    for (t, v) in times.iter().zip(&values) {
        text.push_str(&format!("{},{}\n", fmt.num(*t), fmt.num(*v)));
    }
    let json = json!({
        "command": "coherence",
        "mode": c.mode,
        "n_upper": c.n_upper,
        "half_time_s": half.map(|h| fmt.json(h)),
        "time_s": fmt.json_vec(&times),
        "coherence": fmt.json_vec(&values),
    });
    Ok(Report { text, json })
}

fn cmd_gate(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let g = cfg.section("gate", &cfg.gate)?;
    let chi = chi_source(cfg)?;
    let env = cfg.environment()?;
    let mode = one_based("gate.mode", g.mode, chi.n_modes())?;
    let nbar = env.occupations(&chi.mode_frequencies)?;
    let infid = g
        .detuning_khz
        .iter()
        .map(|d| thermal_gate_infidelity(&chi, mode, 2.0 * PI * d * 1e3, &env))
        .collect::<Result<Vec<_>>>()?;
    let mut text = header(
        "gate",
        &[
            format!("gate mode {} at {} Hz", g.mode, fmt.num(chi.mode_frequencies[mode])),
            format!("nbar: {}", nbar.iter().map(|n| fmt.num(*n)).collect::<Vec<_>>().join(" ")),
        ],
    );
    text.push_str("# detuning_hz,infidelity\n");
    let det_hz: Vec<f64> = g.detuning_khz.iter().map(|d| d * 1e3).collect();
    for (d, f) in det_hz.iter().zip(&infid) {
        text.push_str(&format!("{},{}\n", fmt.num(*d), fmt.num(*f)));
    }
    let json = json!({
        "command": "gate",
        "mode": g.mode,
        "nbar": fmt.json_vec(&nbar),
        "detuning_hz": fmt.json_vec(&det_hz),
        "infidelity": fmt.json_vec(&infid),
    });
    Ok(Report { text, json })
}

fn cmd_scan(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let s = cfg.section("scan", &cfg.scan)?;
    let species = cfg.species_by_label("scan.species", &s.species)?;
    let pot = cfg.potential()?;
    let lo = match s.kind {
        ScanKind::Com => 1,
        ScanKind::Length => 2,
    };
    if s.n_min < lo || s.n_max <= s.n_min {
        return Err(Error::Config { path: "scan".into(), message: format!("need {lo} <= n_min < n_max") });
    }
    let counts: Vec<usize> = (s.n_min..=s.n_max).collect();
    let (column, values, fit_lines, fit_json) = match s.kind {
        ScanKind::Com => {
            let scan = com_frequency_scan(&pot, &species, &counts)?;
            let v: Vec<f64> = scan.points.iter().map(|p| p.1).collect();
            (
                "f_com_hz",
                v,
                vec![format!("slope_hz_per_ion: {}", fmt.num(scan.slope)), format!("r_squared: {}", fmt.num(scan.r_squared))],
                json!({"slope_hz_per_ion": fmt.json(scan.slope), "intercept_hz": fmt.json(scan.intercept), "r_squared": fmt.json(scan.r_squared)}),
            )
        }
        ScanKind::Length => {
            let v = counts
                .iter()
                .map(|&n| chain_length(&solve_equilibrium(&vec![species.clone(); n], &pot, None)?))
                .collect::<Result<Vec<_>>>()?;
            let lx: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
            let ly: Vec<f64> = v.iter().map(|l| l.ln()).collect();
            let (exp, _, r2) = linear_fit(&lx, &ly);
            (
                "length_m",
                v,
                vec![format!("power_law_exponent: {}", fmt.num(exp)), format!("r_squared: {}", fmt.num(r2))],
                json!({"power_law_exponent": fmt.json(exp), "r_squared": fmt.json(r2)}),
            )
        }
    };
    let mut text = header("scan", &fit_lines);
    text.push_str(&format!("# n_ions,{column}\n"));
    for (n, v) in counts.iter().zip(&values) {
        text.push_str(&format!("{n},{}\n", fmt.num(*v)));
    }
    let mut json = json!({"command": "scan", "n_ions": counts, column: fmt.json_vec(&values)});
    json["fit"] = fit_json;
    Ok(Report { text, json })
}

fn cmd_null(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let nd = cfg.section("null", &cfg.null)?;
    let a = cfg.species_by_label("null.pair.0", &nd.pair[0])?;
    let b = cfg.species_by_label("null.pair.1", &nd.pair[1])?;
    let label: ModeLabel = nd.label.parse().map_err(|e: Error| Error::Config { path: "null.label".into(), message: e.to_string() })?;
    let base = cfg.potential()?;
    let mut family = match nd.family.scale_kappa {
        Some(n) => PotentialFamily::scaling_kappa(base, n),
        None => PotentialFamily::new(base),
    };
    for (k, r) in &nd.family.kappa_rates {
        let n: u32 = k.parse().map_err(|_| Error::Config { path: "null.family.kappa_rates".into(), message: format!("`{k}` is not an order") })?;
        let rate = family.kappa_rates.get(&n).copied().unwrap_or(0.0) + r;
        family = family.with_kappa_rate(n, rate);
    }
    family = family.with_field_rate(nd.family.field_rate_v_per_m);
    let r = null_parameter(&family, &a, &b, label, (nd.bracket[0], nd.bracket[1]))?;
    let mut lines = vec![format!("pair: {} {}, nulled mode: {label}", nd.pair[0], nd.pair[1])];
    let mut json = json!({
        "command": "null",
        "label": label.to_string(),
        "parameter": fmt.json(r.parameter),
        "residual_hz": fmt.json(r.residual),
        "other_mode_shift_hz": fmt.json(r.other_mode_shift),
        "iterations": r.iterations,
    });
    let mut gradient_row = String::new();
    if let Some(g) = &nd.gradient {
        let reference = cfg.species_by_label("null.gradient.reference", &g.reference)?;
        let at_null = family.at(r.parameter)?;
        let grad = infer_pseudo_gradient(&at_null, &a, &b, &reference, g.measured_hz, (g.bracket_ev_per_m[0], g.bracket_ev_per_m[1]))?;
        lines.push(format!("gradient reference: {}", g.reference));
        gradient_row = format!("# measured_out_of_phase_hz,pseudo_gradient_ev_per_m\n{},{}\n", fmt.num(g.measured_hz), fmt.num(grad));
        json["pseudo_gradient_ev_per_m"] = fmt.json(grad);
    }
    let mut text = header("null", &lines);
    text.push_str("# parameter,residual_hz,other_mode_shift_hz,iterations\n");
    text.push_str(&format!("{},{},{},{}\n", fmt.num(r.parameter), fmt.num(r.residual), fmt.num(r.other_mode_shift), r.iterations));
    text.push_str(&gradient_row);
    Ok(Report { text, json })
}

fn cmd_sensitivity(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let s = cfg.section("sensitivity", &cfg.sensitivity)?;
    let species = cfg.chain_species()?;
    let pot = cfg.potential()?;
    let dims = pot.dims();
    let mode = one_based("sensitivity.mode", s.mode, species.len() * dims)?;
    let r = field_sensitivity(&pot, &species, s.field_v_per_m, mode)?;
    let mut text = header("sensitivity", &[format!("mode {} with an added field of {} V/m", s.mode, fmt.num(s.field_v_per_m))]);
    text.push_str("# f0_hz,f_hz,fractional_frequency_shift,fractional_curvature_shift\n");
    text.push_str(&format!("{}\n", fmt.row(&[r.f0, r.f, r.fractional, r.curvature_fractional])));
    let json = json!({
        "command": "sensitivity",
        "mode": s.mode,
        "field_v_per_m": fmt.json(s.field_v_per_m),
        "f0_hz": fmt.json(r.f0),
        "f_hz": fmt.json(r.f),
        "fractional_frequency_shift": fmt.json(r.fractional),
        "fractional_curvature_shift": fmt.json(r.curvature_fractional),
    });
    Ok(Report { text, json })
}

fn cmd_flop(cfg: &RunConfig, fmt: Fmt) -> Result<Report> {
    let f = cfg.section("flop", &cfg.flop)?;
    let state = match (f.fock, f.nbar) {
        (Some(n), None) => ModeState::Fock(n),
        (None, Some(nb)) => ModeState::Thermal(nb),
        _ => return Err(Error::Config { path: "flop".into(), message: "give exactly one of fock and nbar".into() }),
    };
    if !(f.t_max_us > 0.0) || f.points < 2 {
        return Err(Error::Config { path: "flop".into(), message: "need t_max_us > 0 and points >= 2".into() });
    }
    let p = SidebandParams {
        eta1: f.eta[0],
        eta2: f.eta[1],
        omega0: 2.0 * PI * f.omega0_khz * 1e3,
        decay_time: f.decay_time_us.map(|t| t * 1e-6).unwrap_or(f64::INFINITY),
    };
    let times: Vec<f64> = (0..f.points).map(|k| f.t_max_us * 1e-6 * k as f64 / (f.points - 1) as f64).collect();
    let samples = sideband_flop(&p, state, &times)?;
    let mut text = header("flop", &["populations are dimensionless; a = P(uu) + (P(ud) + P(du)) / 2".into()]);
    text.push_str("# time_s,p_dd,p_ud,p_du,p_uu,a\n");
    for s in &samples {
        text.push_str(&format!("{}\n", fmt.row(&[s.t, s.p_dd, s.p_ud, s.p_du, s.p_uu, s.a])));
    }
    let col = |g: fn(&crate::dynamics::SidebandSample) -> f64| fmt.json_vec(&samples.iter().map(g).collect::<Vec<_>>());
    let json = json!({
        "command": "flop",
        "time_s": fmt.json_vec(&times),
        "p_dd": col(|s| s.p_dd), "p_ud": col(|s| s.p_ud), "p_du": col(|s| s.p_du), "p_uu": col(|s| s.p_uu),
        "a": col(|s| s.a),
    });
    Ok(Report { text, json })
}
