//! Command-line front end: single-point reports, parameter sweeps to CSV,
//! critical windows, formula-vs-oracle verification and figure presets.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decomp::fano_decompose;
use crate::error::Error;
use crate::measures::{self, critical_window, MeasureReport};
use crate::model::{self, ModelParams};
use crate::oracle::{self, ObjectiveKind};
use crate::sampling;

/// Exact CSV header of sweep output.
pub const CSV_HEADER: &str = "param,value,concurrence,concurrence_half,min_hs,min_trace,min_trace_paper,min_fidelity,in_window";

/// Values below this count as zero when flagging correlation without entanglement.
pub const WINDOW_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "heisenberg-min", version, about = "Concurrence and measurement-induced nonlocality of two-qubit XYZ thermal states")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every measure at one parameter point.
    Point(ParamArgs),
    /// Sweep one parameter and write a CSV.
    Sweep(SweepArgs),
    /// Print the zero-concurrence window [jc1, jc2] in Jz.
    Critical(ParamArgs),
    /// Compare every closed formula against its oracle on random samples.
    Verify(VerifyArgs),
    /// Write the sweep CSVs for one of the five figure presets.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long = "J", allow_negative_numbers = true)]
    pub j: Option<f64>,
    #[arg(long = "Jz", allow_negative_numbers = true)]
    pub jz: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long = "B", allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Plain-text key=value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Parameter to vary: J, Jz, gamma, B, lambda or beta.
    #[arg(long)]
    pub vary: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Constraint tying two couplings; only "J=Jz" is supported.
    #[arg(long)]
    pub lock: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure preset, 1 to 5.
    pub id: u8,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or values (exit status 2).
    Usage(String),
    /// IO or verification failure (exit status 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::DomainError(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

/// A coupling that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    J,
    Jz,
    Gamma,
    B,
    Lambda,
    Beta,
}

impl Param {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "J" => Param::J,
            "Jz" => Param::Jz,
            "gamma" => Param::Gamma,
            "B" => Param::B,
            "lambda" => Param::Lambda,
            "beta" => Param::Beta,
            other => return Err(CliError::Usage(format!("unknown parameter '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Param::J => "J",
            Param::Jz => "Jz",
            Param::Gamma => "gamma",
            Param::B => "B",
            Param::Lambda => "lambda",
            Param::Beta => "beta",
        }
    }

    fn set(&self, p: &mut ModelParams, v: f64) {
        match self {
            Param::J => p.j = v,
            Param::Jz => p.jz = v,
            Param::Gamma => p.gamma = v,
            Param::B => p.b = v,
            Param::Lambda => p.lambda = v,
            Param::Beta => p.beta = v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub vary: Param,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub fixed: ModelParams,
    /// Keep `J = Jz` while sweeping either one.
    pub lock_j_jz: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.from.is_finite() && self.to.is_finite()) || self.from >= self.to {
            return Err(CliError::Usage(format!("need from < to, got {} .. {}", self.from, self.to)));
        }
        if self.steps < 2 {
            return Err(CliError::Usage(format!("steps must be at least 2, got {}", self.steps)));
        }
        if self.lock_j_jz && !matches!(self.vary, Param::J | Param::Jz) {
            return Err(CliError::Usage("lock J=Jz requires --vary J or --vary Jz".into()));
        }
        if self.vary == Param::Beta && self.from <= 0.0 {
            return Err(CliError::Usage("beta sweep must stay positive".into()));
        }
        self.params_at(self.from).validate()?;
        Ok(())
    }

    /// Grid values with exact endpoints.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i == self.steps - 1 { self.to } else { self.from + (self.to - self.from) * i as f64 / last })
            .collect()
    }

    pub fn params_at(&self, v: f64) -> ModelParams {
        let mut p = self.fixed;
        self.vary.set(&mut p, v);
        if self.lock_j_jz {
            p.j = v;
            p.jz = v;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: f64,
    pub concurrence: f64,
    pub concurrence_half: f64,
    pub min_hs: f64,
    pub min_trace: f64,
    pub min_trace_paper: f64,
    pub min_fidelity: f64,
    pub in_window: bool,
}

impl SweepRow {
    pub fn new(param: &'static str, value: f64, r: &MeasureReport) -> Self {
        let correlated = r.min_hs > WINDOW_TOL || r.min_trace > WINDOW_TOL || r.min_fidelity > WINDOW_TOL;
        SweepRow {
            param,
            value,
            concurrence: r.concurrence,
            concurrence_half: r.concurrence / 2.0,
            min_hs: r.min_hs,
            min_trace: r.min_trace,
            min_trace_paper: r.min_trace_paper,
            min_fidelity: r.min_fidelity,
            in_window: r.concurrence == 0.0 && correlated,
        }
    }

    pub fn to_csv(&self) -> String {
        let nums = [
            self.value,
            self.concurrence,
            self.concurrence_half,
            self.min_hs,
            self.min_trace,
            self.min_trace_paper,
            self.min_fidelity,
        ];
        let mut line = self.param.to_string();
        for x in nums {
            line.push(',');
            line.push_str(&format_sig(x));
        }
        line.push(',');
        line.push_str(if self.in_window { "true" } else { "false" });
        line
    }
}

/// Formats `x` with 12 significant digits, `%g`-style, independent of locale.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn sweep_rows(spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    spec.validate()?;
    let name = spec.vary.name();
    spec.values()
        .par_iter()
        .map(|&v| {
            let r = MeasureReport::for_params(&spec.params_at(v))?;
            Ok(SweepRow::new(name, v, &r))
        })
        .collect()
}

pub fn write_csv(rows: &[SweepRow], mut w: impl Write) -> std::io::Result<()> {
    let mut buf = String::with_capacity(rows.len() * 128);
    buf.push_str(CSV_HEADER);
    buf.push('\n');
    for r in rows {
        buf.push_str(&r.to_csv());
        buf.push('\n');
    }
    w.write_all(buf.as_bytes())
}

/// Minimal gnuplot script plotting every measure column against the sweep value.
pub fn gnuplot_script(csv_name: &str, xlabel: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel '{xlabel}'\n\
         set title '{title}'\n\
         plot '{csv_name}' using 2:4 with lines lw 1, \\\n\
         \x20    '' using 2:5 with lines dt 3, \\\n\
         \x20    '' using 2:6 with lines dt 4, \\\n\
         \x20    '' using 2:8 with lines lw 3\n"
    )
}

fn parse_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("{key}: '{v}' is not a number")))
}

/// Config-file values, overridden by flags.
#[derive(Debug, Default)]
struct Settings {
    params: ModelParams,
    vary: Option<String>,
    from: Option<f64>,
    to: Option<f64>,
    steps: Option<usize>,
    lock: Option<String>,
}

fn load_settings(args: &ParamArgs) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &args.config {
        for (k, v) in parse_config(path)? {
            match k.as_str() {
                "J" => s.params.j = parse_f64(&k, &v)?,
                "Jz" => s.params.jz = parse_f64(&k, &v)?,
                "gamma" => s.params.gamma = parse_f64(&k, &v)?,
                "B" => s.params.b = parse_f64(&k, &v)?,
                "lambda" => s.params.lambda = parse_f64(&k, &v)?,
                "beta" => s.params.beta = parse_f64(&k, &v)?,
                "vary" => s.vary = Some(v),
                "from" => s.from = Some(parse_f64(&k, &v)?),
                "to" => s.to = Some(parse_f64(&k, &v)?),
                "steps" => s.steps = Some(v.parse().map_err(|_| CliError::Usage(format!("steps: '{v}' is not an integer")))?),
                "lock" => s.lock = Some(v),
                other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
            }
        }
    }
    let p = &mut s.params;
    for (flag, slot) in [
        (args.j, &mut p.j),
        (args.jz, &mut p.jz),
        (args.gamma, &mut p.gamma),
        (args.b, &mut p.b),
        (args.lambda, &mut p.lambda),
        (args.beta, &mut p.beta),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    Ok(s)
}

/// Resolves flags and config into validated model parameters.
pub fn resolve_params(args: &ParamArgs) -> Result<ModelParams, CliError> {
    let p = load_settings(args)?.params;
    p.validate()?;
    Ok(p)
}

pub fn resolve_sweep(args: &SweepArgs) -> Result<SweepSpec, CliError> {
    let s = load_settings(&args.params)?;
    let vary = args.vary.clone().or(s.vary).ok_or_else(|| CliError::Usage("--vary is required".into()))?;
    let lock = args.lock.clone().or(s.lock);
    let lock_j_jz = match lock.as_deref() {
        None => false,
        Some("J=Jz") | Some("Jz=J") => true,
        Some(other) => return Err(CliError::Usage(format!("unsupported lock '{other}'"))),
    };
    let spec = SweepSpec {
        vary: Param::parse(&vary)?,
        from: args.from.or(s.from).ok_or_else(|| CliError::Usage("--from is required".into()))?,
        to: args.to.or(s.to).ok_or_else(|| CliError::Usage("--to is required".into()))?,
        steps: args.steps.or(s.steps).ok_or_else(|| CliError::Usage("--steps is required".into()))?,
        fixed: s.params,
        lock_j_jz,
    };
    spec.validate()?;
    Ok(spec)
}

fn window_lines(p: &ModelParams, out: &mut String) {
    match critical_window(p) {
        Ok(w) => {
            let jc1 = w.jc1.map_or_else(|| "unbounded".to_string(), format_sig);
            let _ = writeln!(out, "jc1: {jc1}");
            let _ = writeln!(out, "jc2: {}", format_sig(w.jc2));
        }
        Err(e) => {
            let _ = writeln!(out, "jc1: undefined");
            let _ = writeln!(out, "jc2: undefined ({e})");
        }
    }
}

/// Stable `key: value` report of one parameter point.
pub fn point_report(p: &ModelParams) -> Result<String, CliError> {
    let r = MeasureReport::for_params(p)?;
    let t = model::thermal_elements(p);
    let f = fano_decompose(&model::thermal_state(p)?);
    let mut out = String::new();
    let mut kv = |k: &str, v: f64| {
        let _ = writeln!(out, "{k}: {}", format_sig(v));
    };
    kv("J", p.j);
    kv("Jz", p.jz);
    kv("gamma", p.gamma);
    kv("B", p.b);
    kv("lambda", p.lambda);
    kv("beta", p.beta);
    kv("concurrence", r.concurrence);
    kv("concurrence_half", r.concurrence / 2.0);
    kv("min_hs", r.min_hs);
    kv("min_trace", r.min_trace);
    kv("min_trace_paper", r.min_trace_paper);
    kv("min_fidelity", r.min_fidelity);
    kv("min_hs_thermal", measures::min_hs_thermal(&t));
    kv("min_fidelity_thermal", measures::min_fidelity_thermal(&t));
    kv("mu_plus", t.mu_plus);
    kv("mu_minus", t.mu_minus);
    kv("nu_plus", t.nu_plus);
    kv("nu_minus", t.nu_minus);
    kv("kappa", t.kappa);
    kv("epsilon", t.epsilon);
    kv("Z", t.z);
    let c = f.corr_diag();
    kv("bloch_a_z", f.bloch_a[2]);
    kv("bloch_b_z", f.bloch_b[2]);
    kv("c1", c[0]);
    kv("c2", c[1]);
    kv("c3", c[2]);
    kv("purity", f.gamma_norm_sq());
    window_lines(p, &mut out);
    Ok(out)
}

pub fn critical_report(p: &ModelParams) -> Result<String, CliError> {
    critical_window(p)?;
    let mut out = String::new();
    window_lines(p, &mut out);
    Ok(out)
}

/// One line of the verification report.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `Some(tol)` for normative checks (pass iff `value <= tol`), `None` for diagnostics.
    pub tolerance: Option<f64>,
    pub note: String,
}

impl Check {
    fn normative(name: &str, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tolerance: Some(tol), note: String::new() }
    }

    fn diagnostic(name: &str, value: f64, note: impl Into<String>) -> Self {
        Check { name: name.into(), value, tolerance: None, note: note.into() }
    }

    pub fn passed(&self) -> bool {
        self.tolerance.is_none_or(|tol| self.value <= tol)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "seed: {}", self.seed)?;
        for c in &self.checks {
            match c.tolerance {
                Some(tol) => writeln!(
                    f,
                    "[{}] {}: {:.3e} (tol {:.0e})",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    tol
                )?,
                None => writeln!(f, "[INFO] {}: {} {}", c.name, format_sig(c.value), c.note)?,
            }
        }
        writeln!(f, "result: {}", if self.passed() { "ok" } else { "FAILED" })
    }
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

/// Number of oracle (sphere-search) comparisons per family for `samples`.
pub fn oracle_budget(samples: usize) -> usize {
    samples.clamp(1, 200)
}

/// Seeded comparison of every closed formula against its oracle.
pub fn verify(samples: usize, seed: u64) -> Result<VerifyReport, CliError> {
    if samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Gibbs state and spectrum.
    let params: Vec<ModelParams> = (0..samples).map(|_| sampling::random_params(&mut rng, 5.0)).collect();
    let state_dev = params
        .par_iter()
        .map(|p| {
            let closed = model::thermal_state(p)?;
            let numeric = oracle::thermal_state_exp(p)?;
            Ok(closed.matrix().max_abs_diff(numeric.matrix()))
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    checks.push(Check::normative("thermal_state_vs_exp_oracle", max_of(state_dev.into_iter()), 1e-10));

    let (eig_dev, vec_res): (Vec<f64>, Vec<f64>) = params.par_iter().map(spectrum_deviation).unzip();
    checks.push(Check::normative("spectrum_eigenvalues", max_of(eig_dev.into_iter()), 1e-10));
    checks.push(Check::normative("spectrum_eigenvector_residual", max_of(vec_res.into_iter()), 1e-9));

    let conc_dev = params
        .par_iter()
        .map(|p| {
            let t = model::thermal_elements(p);
            Ok((measures::concurrence_thermal(&t) - measures::concurrence(&model::thermal_state(p)?)).abs())
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    checks.push(Check::normative("concurrence_thermal_vs_general", max_of(conc_dev.into_iter()), 1e-12));

    let spin_flip_dev = max_of((0..samples).map(|_| {
        let p = sampling::random_params(&mut rng, 2.0);
        let rho = model::thermal_state(&p).expect("valid parameters");
        (measures::concurrence_thermal(&model::thermal_elements(&p)) - measures::concurrence_spin_flip(&rho)).abs()
    }));
    checks.push(Check::normative("concurrence_thermal_vs_spin_flip_moderate", spin_flip_dev, 1e-11));

    let budget = oracle_budget(samples);

    // Hilbert-Schmidt MIN.
    let states: Vec<_> = (0..budget)
        .map(|i| if i % 2 == 0 { sampling::random_state(&mut rng) } else { sampling::random_state_zero_x(&mut rng) })
        .collect();
    let hs_dev = max_of(states.iter().map(|rho| {
        let closed = measures::min_hs(&fano_decompose(rho));
        (closed - oracle::max_over_measurements(rho, ObjectiveKind::HsSq).value).abs()
    }));
    checks.push(Check::normative("min_hs_closed_vs_oracle", hs_dev, 1e-6));

    let field_params: Vec<ModelParams> = params.iter().copied().filter(|p| p.b != 0.0 || p.lambda != 0.0).collect();
    let mut hs_thermal_dev = 0.0f64;
    let mut fid_thermal_dev = 0.0f64;
    let mut ratio = Vec::new();
    for p in &field_params {
        let t = model::thermal_elements(p);
        let f = fano_decompose(&model::thermal_state(p)?);
        if f.x_is_zero() {
            continue;
        }
        hs_thermal_dev = hs_thermal_dev.max((measures::min_hs_thermal(&t) - measures::min_hs(&f)).abs());
        fid_thermal_dev = fid_thermal_dev.max((measures::min_fidelity_thermal(&t) - oracle::fidelity_min_spectral(&f)).abs());
        let thermal = measures::min_trace_thermal(&t);
        if thermal > 1e-6 {
            let rho = model::thermal_state(p)?;
            ratio.push(oracle::max_over_measurements(&rho, ObjectiveKind::Trace).value / thermal);
        }
    }
    checks.push(Check::normative("min_hs_thermal_vs_closed_with_field", hs_thermal_dev, 1e-12));

    let zero_field: Vec<ModelParams> = (0..budget).map(|_| sampling::random_params_zero_field(&mut rng, 5.0)).collect();
    let forced = ModelParams::new(1.0, -3.0, 1.0, 0.0, 0.0);
    let hs_thermal_gap = |p: &ModelParams| -> Result<f64, CliError> {
        let t = model::thermal_elements(p);
        let rho = model::thermal_state(p)?;
        Ok(oracle::max_over_measurements(&rho, ObjectiveKind::HsSq).value - measures::min_hs_thermal(&t))
    };
    let forced_gap = hs_thermal_gap(&forced)?;
    let mut zero_field_gaps = Vec::new();
    for p in &zero_field {
        zero_field_gaps.push(hs_thermal_gap(p)?);
    }
    let diverging = zero_field_gaps.iter().filter(|g| g.abs() > 1e-9).count();
    checks.push(Check::diagnostic(
        "min_hs_thermal_gap_at_zero_field_forced",
        forced_gap,
        "(oracle - thermal formula at gamma=1, J=1, Jz=-3, B=lambda=0)",
    ));
    checks.push(Check::diagnostic(
        "min_hs_thermal_gap_at_zero_field_max",
        max_of(zero_field_gaps.iter().copied()),
        format!("({diverging} of {} zero-field samples diverge by > 1e-9)", zero_field_gaps.len()),
    ));

    // Fidelity MIN.
    let mut fid_oracle_dev = 0.0f64;
    let mut gamma_form_dev = 0.0f64;
    let mut gamma_full_gram_dev = 0.0f64;
    let fid_params: Vec<ModelParams> = (0..budget)
        .map(|i| if i % 2 == 0 { sampling::random_params(&mut rng, 5.0) } else { sampling::random_params_zero_field(&mut rng, 5.0) })
        .collect();
    for p in &fid_params {
        let rho = model::thermal_state(p)?;
        let f = fano_decompose(&rho);
        let spectral = oracle::fidelity_min_spectral(&f);
        let grid = oracle::max_over_measurements(&rho, ObjectiveKind::OneMinusFidelity).value;
        fid_oracle_dev = fid_oracle_dev.max((spectral - grid).abs());
        gamma_form_dev = gamma_form_dev.max((measures::fidelity_min_closed(&f) - spectral).abs());
        gamma_full_gram_dev = gamma_full_gram_dev.max((measures::fidelity_min_closed_full_gram(&f) - spectral).abs());
    }
    checks.push(Check::normative("min_fidelity_spectral_vs_oracle", fid_oracle_dev, 1e-9));
    checks.push(Check::normative("min_fidelity_thermal_vs_spectral_with_field", fid_thermal_dev, 1e-9));
    checks.push(Check::normative("min_fidelity_gamma_form_vs_spectral", gamma_form_dev, 1e-9));
    checks.push(Check::diagnostic(
        "min_fidelity_full_gram_reading_deviation",
        gamma_full_gram_dev,
        "(x = 0 branch with mu1 = smallest eigenvalue of the 4x4 Gamma Gamma^t)",
    ));

    // Trace MIN.
    let x_states: Vec<_> = (0..budget)
        .map(|i| if i % 4 == 3 { sampling::random_x_state_zero_x(&mut rng) } else { sampling::random_x_state(&mut rng) })
        .collect();
    let mut tr_dev = 0.0f64;
    for rho in &x_states {
        let closed = measures::min_trace(&fano_decompose(rho))?;
        tr_dev = tr_dev.max((closed - oracle::max_over_measurements(rho, ObjectiveKind::Trace).value).abs());
    }
    checks.push(Check::normative("min_trace_closed_vs_oracle_x_states", tr_dev, 1e-6));

    if !ratio.is_empty() {
        let lo = ratio.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = ratio.iter().sum::<f64>() / ratio.len() as f64;
        checks.push(Check::diagnostic("min_trace_oracle_over_thermal_formula_mean", mean, format!("(min {}, max {}, n = {})", format_sig(lo), format_sig(hi), ratio.len())));
        checks.push(Check::normative("min_trace_oracle_over_thermal_formula_spread", hi - lo, 1e-6));
    }

    for (i, target) in FIG4_CRITICAL_PAIRS.iter().enumerate() {
        let fit = invert_critical_pair(*target, 2.0);
        checks.push(Check::diagnostic(
            &format!("fig4_panel{}_inversion_residual", i + 1),
            fit.residual,
            format!(
                "(target jc1={}, jc2={}; gamma={}, B={} gives jc1={}, jc2={})",
                target.0,
                target.1,
                format_sig(fit.gamma),
                format_sig(fit.b),
                format_sig(fit.jc1),
                format_sig(fit.jc2)
            ),
        ));
    }

    Ok(VerifyReport { samples, seed, checks })
}

fn spectrum_deviation(p: &ModelParams) -> (f64, f64) {
    let h = model::build_hamiltonian(p);
    let s = model::closed_form_spectrum(p);
    let mut closed = s.energies.to_vec();
    closed.sort_by(|a, b| b.total_cmp(a));
    let numeric = crate::linalg::hermitian_eigenvalues(&h).expect("Hamiltonian is Hermitian");
    let eig = max_of(closed.iter().zip(&numeric).map(|(a, b)| (a - b).abs()));
    let res = max_of((0..4).map(|k| {
        let v = s.eigenvector(k);
        let hv = h.mul_vec(&v);
        hv.iter().zip(&v).map(|(a, b)| (a - b * s.energies[k]).norm_sqr()).sum::<f64>().sqrt()
    }));
    (eig, res)
}

/// Critical pairs quoted for the four anisotropic panels at J = 2, λ = 0.
pub const FIG4_CRITICAL_PAIRS: [(f64, f64); 4] = [(-2.927, -1.268), (-1.163, -0.854), (-0.008, 0.062), (-1.724, -1.102)];

#[derive(Clone, Copy, Debug)]
pub struct CriticalFit {
    pub gamma: f64,
    pub b: f64,
    pub jc1: f64,
    pub jc2: f64,
    pub residual: f64,
}

/// Searches γ ≥ 0, B ≥ 0 at the given J (λ = 0) whose critical window best
/// matches `target`, by multi-start Nelder-Mead on the squared error.
pub fn invert_critical_pair(target: (f64, f64), j: f64) -> CriticalFit {
    let window = |g: f64, b: f64| {
        let w = critical_window(&ModelParams::new(j, 0.0, g.abs(), b.abs(), 0.0)).ok()?;
        Some((w.jc1?, w.jc2))
    };
    let loss = |x: [f64; 2]| match window(x[0], x[1]) {
        Some((a, b)) => (a - target.0).powi(2) + (b - target.1).powi(2),
        None => f64::INFINITY,
    };
    let mut best: Option<([f64; 2], f64)> = None;
    for g0 in [0.1, 0.3, 0.5, 1.0, 2.0] {
        for b0 in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let (x, fx) = oracle::nelder_mead_2d(loss, [g0, b0], 0.1, 1e-12, 4000);
            if best.is_none_or(|(_, fb)| fx < fb) {
                best = Some((x, fx));
            }
        }
    }
    let (x, fx) = best.expect("starts evaluated");
    let (jc1, jc2) = window(x[0], x[1]).unwrap_or((f64::NAN, f64::NAN));
    CriticalFit { gamma: x[0].abs(), b: x[1].abs(), jc1, jc2, residual: fx.sqrt() }
}

/// One CSV produced by a figure preset.
#[derive(Clone, Debug)]
pub struct FigureSeries {
    pub file_name: String,
    pub title: String,
    pub spec: SweepSpec,
}

/// Parameters and sweep ranges of the five figure presets.
pub fn figure_presets(id: u8) -> Result<Vec<FigureSeries>, CliError> {
    let series = |file_name: &str, title: &str, vary, from, to, steps, fixed, lock_j_jz| FigureSeries {
        file_name: file_name.into(),
        title: title.into(),
        spec: SweepSpec { vary, from, to, steps, fixed, lock_j_jz },
    };
    Ok(match id {
        1 => vec![series("fig1.csv", "XXX, B = lambda = 0", Param::Jz, -2.0, 2.0, 401, ModelParams::default(), true)],
        2 => vec![
            series("fig2_J1.csv", "XXZ, J = 1, B = lambda = 0", Param::Jz, -6.0, 2.0, 801, ModelParams::new(1.0, 0.0, 0.0, 0.0, 0.0), false),
            series("fig2_J5.csv", "XXZ, J = 5, B = lambda = 0", Param::Jz, -6.0, 2.0, 801, ModelParams::new(5.0, 0.0, 0.0, 0.0, 0.0), false),
        ],
        3 => vec![series("fig3.csv", "XXZ, J = 5, Jz = 1, lambda = 0", Param::B, 0.0, 6.0, 601, ModelParams::new(5.0, 1.0, 0.0, 0.0, 0.0), false)],
        4 => {
            let mut v = Vec::new();
            for gamma in [0.5, 1.0] {
                for b in [0.0, 1.0] {
                    v.push(series(
                        &format!("fig4_gamma{gamma}_B{b}.csv"),
                        &format!("XYZ, J = 2, lambda = 0, gamma = {gamma}, B = {b}"),
                        Param::Jz,
                        -4.0,
                        2.0,
                        601,
                        ModelParams::new(2.0, 0.0, gamma, b, 0.0),
                        false,
                    ));
                }
            }
            v
        }
        5 => vec![series("fig5.csv", "XYZ, J = 2, Jz = -1, gamma = 0.5", Param::B, 0.0, 6.0, 601, ModelParams::new(2.0, -1.0, 0.5, 0.0, 0.0), false)],
        other => return Err(CliError::Usage(format!("figure id must be 1..5, got {other}"))),
    })
}

fn write_sweep(spec: &SweepSpec, path: &Path, gnuplot: Option<&str>) -> Result<(), CliError> {
    let rows = sweep_rows(spec)?;
    let file = fs::File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    write_csv(&rows, std::io::BufWriter::new(file))?;
    if let Some(title) = gnuplot {
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("data.csv");
        fs::write(path.with_extension("gp"), gnuplot_script(name, spec.vary.name(), title))?;
    }
    Ok(())
}

/// Writes the CSV (and optionally gnuplot) files of a figure preset; returns their paths.
pub fn write_figure(id: u8, dir: &Path, gnuplot: bool) -> Result<Vec<PathBuf>, CliError> {
    let presets = figure_presets(id)?;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in presets {
        let path = dir.join(&s.file_name);
        write_sweep(&s.spec, &path, gnuplot.then_some(s.title.as_str()))?;
        written.push(path);
    }
    Ok(written)
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Point(args) => {
            let p = resolve_params(&args)?;
            out.write_all(point_report(&p)?.as_bytes())?;
        }
        Command::Critical(args) => {
            let p = resolve_params(&args)?;
            out.write_all(critical_report(&p)?.as_bytes())?;
        }
        Command::Sweep(args) => {
            let spec = resolve_sweep(&args)?;
            let title = format!("sweep over {}", spec.vary.name());
            write_sweep(&spec, &args.out, args.gnuplot.then_some(title.as_str()))?;
            writeln!(out, "wrote {} rows to {}", spec.steps, args.out.display())?;
        }
        Command::Verify(args) => {
            let report = verify(args.samples, args.seed)?;
            write!(out, "{report}")?;
            if !report.passed() {
                return Err(CliError::Runtime("verification failed".into()));
            }
        }
        Command::Figure(args) => {
            for path in write_figure(args.id, &args.out, args.gnuplot)? {
                writeln!(out, "wrote {}", path.display())?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(0.42246918845518766), "0.422469188455");
        assert_eq!(format_sig(1234567.891234567), "1234567.89123");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(2.0e13), "2e13");
        assert_eq!(format_sig(0.0001), "0.0001");
    }

    #[test]
    fn sweep_values_hit_endpoints() {
        let spec = SweepSpec { vary: Param::Jz, from: -2.0, to: 2.0, steps: 401, fixed: ModelParams::default(), lock_j_jz: true };
        let v = spec.values();
        assert_eq!(v.len(), 401);
        assert_eq!(v[0], -2.0);
        assert_eq!(v[400], 2.0);
        assert_eq!(v[200], 0.0);
        let p = spec.params_at(0.7);
        assert_eq!((p.j, p.jz), (0.7, 0.7));
    }

    #[test]
    fn invalid_sweeps() {
        let base = SweepSpec { vary: Param::B, from: 0.0, to: 1.0, steps: 2, fixed: ModelParams::default(), lock_j_jz: false };
        assert!(base.validate().is_ok());
        assert!(SweepSpec { from: 1.0, ..base.clone() }.validate().is_err());
        assert!(SweepSpec { steps: 1, ..base.clone() }.validate().is_err());
        assert!(SweepSpec { lock_j_jz: true, ..base.clone() }.validate().is_err());
        assert!(SweepSpec { vary: Param::Beta, ..base.clone() }.validate().is_err());
        assert!(Param::parse("Bz").is_err());
    }

    #[test]
    fn in_window_flag() {
        let r = MeasureReport { concurrence: 0.0, min_hs: 0.1, min_trace: 0.2, min_trace_paper: 0.1, min_fidelity: 0.1 };
        assert!(SweepRow::new("Jz", 0.0, &r).in_window);
        let zero = MeasureReport { concurrence: 0.0, min_hs: 0.0, min_trace: 0.0, min_trace_paper: 0.0, min_fidelity: 0.0 };
        assert!(!SweepRow::new("Jz", 0.0, &zero).in_window);
        let ent = MeasureReport { concurrence: 0.3, ..r };
        let row = SweepRow::new("Jz", 0.0, &ent);
        assert!(!row.in_window);
        assert_eq!(row.concurrence_half, 0.15);
    }

    #[test]
    fn figure_ids() {
        assert_eq!(figure_presets(2).unwrap().len(), 2);
        assert_eq!(figure_presets(4).unwrap().len(), 4);
        assert!(figure_presets(0).is_err());
        assert!(figure_presets(6).is_err());
    }
}
