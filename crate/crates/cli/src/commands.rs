use std::io::{self, Write};

use ghacs_core::{
    classify, run_sweep, state_stats, weight_distribution, z_range, Error, PotentialParams,
    RowStatus, StateStats, SweepSpec, TruncationPolicy,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{is_usage_error, DistArgs, Format, PhysicsArgs, StatsArgs, SweepArgs, TableArgs};
use crate::output::{
    csv_writer, describe_inputs, dp2, num, opt_dp2, opt_int, opt_num, write_aligned, write_json,
    write_records, Record,
};

/// Tolerance on |Q| below which a state is labelled Poissonian.
const CLASSIFY_TOL: f64 = 1e-6;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotConverged(String),
    Io(io::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.into())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if is_usage_error(&e) {
            Self::Usage(e.to_string())
        } else if matches!(e, Error::NotConverged { .. }) {
            Self::NotConverged(e.to_string())
        } else {
            Self::Io(io::Error::other(e))
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::NotConverged(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "invalid arguments: {m}"),
            Self::NotConverged(m) => write!(f, "not converged: {m}"),
            Self::Io(e) => write!(f, "{e}"),
        }
    }
}

type CmdResult = Result<(), CliError>;

fn params(physics: &PhysicsArgs) -> Result<PotentialParams, CliError> {
    Ok(PotentialParams::new(physics.k, physics.gamma)?)
}

fn policy_inputs(policy: &TruncationPolicy) -> Value {
    match *policy {
        TruncationPolicy::Fixed { n_max } => json!({ "mode": "fixed", "n_max": n_max }),
        TruncationPolicy::Adaptive {
            tail_tolerance,
            quiet_run,
            hard_cap,
        } => json!({
            "mode": "adaptive",
            "tail_tol": tail_tolerance,
            "quiet_run": quiet_run,
            "hard_cap": hard_cap,
        }),
    }
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn not_converged_check(converged: bool, policy: &TruncationPolicy, what: &str) -> CmdResult {
    match *policy {
        TruncationPolicy::Adaptive { hard_cap, .. } if !converged => Err(CliError::NotConverged(
            format!("{what}: adaptive summation reached hard cap {hard_cap}"),
        )),
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize)]
pub struct StatsRecord {
    k: f64,
    gamma: f64,
    abs_z: f64,
    #[serde(flatten)]
    policy: TruncationPolicy,
    mean: f64,
    variance: f64,
    mandel_q: Option<f64>,
    statistics: String,
    normalization: f64,
    log_normalization: f64,
    terms_used: u64,
    converged: bool,
    threshold: Option<u64>,
}

impl StatsRecord {
    fn new(p: &PotentialParams, abs_z: f64, policy: TruncationPolicy, s: &StateStats) -> Self {
        Self {
            k: p.k(),
            gamma: p.gamma(),
            abs_z,
            policy,
            mean: s.mean,
            variance: s.variance,
            mandel_q: s.mandel_q,
            statistics: classify(s, CLASSIFY_TOL).to_string(),
            normalization: s.normalization,
            log_normalization: s.log_normalization,
            terms_used: s.sums.terms_used,
            converged: s.converged(),
            threshold: s.sums.estimated_threshold,
        }
    }
}

impl Record for StatsRecord {
    fn header() -> &'static [&'static str] {
        &[
            "k",
            "gamma",
            "abs_z",
            "mode",
            "n_max",
            "tail_tol",
            "quiet_run",
            "hard_cap",
            "mean",
            "variance",
            "mandel_q",
            "statistics",
            "normalization",
            "log_normalization",
            "terms_used",
            "converged",
            "threshold",
        ]
    }

    fn csv_fields(&self) -> Vec<String> {
        let (mode, n_max, tol, quiet, cap) = match self.policy {
            TruncationPolicy::Fixed { n_max } => (
                "fixed",
                n_max.to_string(),
                String::new(),
                String::new(),
                String::new(),
            ),
            TruncationPolicy::Adaptive {
                tail_tolerance,
                quiet_run,
                hard_cap,
            } => (
                "adaptive",
                String::new(),
                num(tail_tolerance),
                quiet_run.to_string(),
                hard_cap.to_string(),
            ),
        };
        vec![
            num(self.k),
            num(self.gamma),
            num(self.abs_z),
            mode.into(),
            n_max,
            tol,
            quiet,
            cap,
            num(self.mean),
            num(self.variance),
            opt_num(self.mandel_q),
            self.statistics.clone(),
            num(self.normalization),
            num(self.log_normalization),
            self.terms_used.to_string(),
            self.converged.to_string(),
            opt_int(self.threshold),
        ]
    }

    fn table_fields(&self) -> Vec<String> {
        let mut f = self.csv_fields();
        for i in [8, 9, 12, 13] {
            f[i] = dp2(f[i].parse().unwrap_or(f64::NAN));
        }
        f[10] = opt_dp2(self.mandel_q);
        f
    }
}

pub fn stats<W: Write>(args: &StatsArgs, w: &mut W) -> CmdResult {
    let p = params(&args.physics)?;
    let policy = args.policy.policy();
    let s = state_stats(args.z, &p, &policy)?;
    let record = StatsRecord::new(&p, args.z, policy, &s);
    let inputs = merge(
        json!({ "k": p.k(), "gamma": p.gamma(), "abs_z": args.z }),
        policy_inputs(&policy),
    );
    let format = args.output.format.unwrap_or(Format::Table);
    write_records(w, format, &inputs, &[record])?;
    not_converged_check(s.converged(), &policy, &format!("|z| = {}", args.z))
}

#[derive(Debug, Serialize)]
pub struct TableRecord {
    k: f64,
    gamma: f64,
    abs_z: f64,
    adaptive_mean: f64,
    adaptive_variance: f64,
    adaptive_q: Option<f64>,
    fixed_n_max: u64,
    fixed_mean: f64,
    fixed_variance: f64,
    fixed_q: Option<f64>,
    threshold: Option<u64>,
    n_max_used: u64,
    converged: bool,
}

impl Record for TableRecord {
    fn header() -> &'static [&'static str] {
        &[
            "k",
            "gamma",
            "abs_z",
            "adaptive_mean",
            "adaptive_variance",
            "adaptive_q",
            "fixed_n_max",
            "fixed_mean",
            "fixed_variance",
            "fixed_q",
            "threshold",
            "n_max_used",
            "converged",
        ]
    }

    fn csv_fields(&self) -> Vec<String> {
        vec![
            num(self.k),
            num(self.gamma),
            num(self.abs_z),
            num(self.adaptive_mean),
            num(self.adaptive_variance),
            opt_num(self.adaptive_q),
            self.fixed_n_max.to_string(),
            num(self.fixed_mean),
            num(self.fixed_variance),
            opt_num(self.fixed_q),
            opt_int(self.threshold),
            self.n_max_used.to_string(),
            self.converged.to_string(),
        ]
    }

    fn table_fields(&self) -> Vec<String> {
        vec![
            num(self.k),
            num(self.gamma),
            num(self.abs_z),
            dp2(self.adaptive_mean),
            dp2(self.adaptive_variance),
            opt_dp2(self.adaptive_q),
            self.fixed_n_max.to_string(),
            dp2(self.fixed_mean),
            dp2(self.fixed_variance),
            opt_dp2(self.fixed_q),
            opt_int(self.threshold),
            self.n_max_used.to_string(),
            self.converged.to_string(),
        ]
    }
}

pub fn table<W: Write>(args: &TableArgs, w: &mut W) -> CmdResult {
    let p = params(&args.physics)?;
    let policy = args.adaptive_args.policy();
    let mut grid = args.z.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let spec = SweepSpec::new(p.k(), p.gamma(), grid, vec![args.fixed_nmax])?;
    let report = run_sweep(&spec, &policy)?;

    let mut records = Vec::new();
    let mut all_converged = true;
    for row in &report.rows {
        let (Some(a), Some(f)) = (row.adaptive, row.fixed.get(&args.fixed_nmax)) else {
            return Err(CliError::Io(io::Error::other(format!(
                "|z| = {}: {}",
                row.abs_z,
                row.error.as_deref().unwrap_or("row failed")
            ))));
        };
        all_converged &= row.status == RowStatus::Ok;
        records.push(TableRecord {
            k: p.k(),
            gamma: p.gamma(),
            abs_z: row.abs_z,
            adaptive_mean: a.mean,
            adaptive_variance: a.variance,
            adaptive_q: a.mandel_q,
            fixed_n_max: args.fixed_nmax,
            fixed_mean: f.mean,
            fixed_variance: f.variance,
            fixed_q: f.mandel_q,
            threshold: row.threshold_estimate,
            n_max_used: a.sums.terms_used,
            converged: a.converged(),
        });
    }
    let inputs = merge(
        json!({ "k": p.k(), "gamma": p.gamma(), "fixed_n_max": args.fixed_nmax }),
        policy_inputs(&policy),
    );
    let format = args.output.format.unwrap_or(Format::Table);
    write_records(w, format, &inputs, &records)?;
    not_converged_check(all_converged, &policy, "table")
}

#[derive(Debug, Serialize)]
pub struct SweepRecord {
    k: f64,
    gamma: f64,
    abs_z: f64,
    curve: String,
    n_max: Option<u64>,
    mandel_q: Option<f64>,
    mean: Option<f64>,
    variance: Option<f64>,
    terms_used: Option<u64>,
    status: String,
}

impl Record for SweepRecord {
    fn header() -> &'static [&'static str] {
        &[
            "k",
            "gamma",
            "abs_z",
            "curve",
            "n_max",
            "mandel_q",
            "mean",
            "variance",
            "terms_used",
            "status",
        ]
    }

    fn csv_fields(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map_or_else(String::new, num);
        vec![
            num(self.k),
            num(self.gamma),
            num(self.abs_z),
            self.curve.clone(),
            opt_int(self.n_max),
            match (self.mandel_q, self.mean) {
                (None, Some(_)) => "undefined".into(),
                (q, _) => opt(q),
            },
            opt(self.mean),
            opt(self.variance),
            opt_int(self.terms_used),
            self.status.clone(),
        ]
    }

    fn table_fields(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map_or_else(String::new, dp2);
        let mut f = self.csv_fields();
        f[5] = match (self.mandel_q, self.mean) {
            (None, Some(_)) => "undefined".into(),
            (q, _) => opt(q),
        };
        f[6] = opt(self.mean);
        f[7] = opt(self.variance);
        f
    }
}

fn status_name(status: RowStatus) -> &'static str {
    match status {
        RowStatus::Ok => "ok",
        RowStatus::NotConverged => "not_converged",
        RowStatus::Failed => "failed",
    }
}

pub fn sweep<W: Write>(args: &SweepArgs, w: &mut W) -> CmdResult {
    let p = params(&args.physics)?;
    let policy = args.adaptive_args.policy();
    let grid = z_range(args.z_min, args.z_max, args.z_step)?;
    let cutoffs = args.cutoffs.0.clone();
    let spec = SweepSpec::new(p.k(), p.gamma(), grid, cutoffs.clone())?;
    let report = run_sweep(&spec, &policy)?;

    let mut records = Vec::new();
    let mut all_converged = true;
    for row in &report.rows {
        all_converged &= row.status == RowStatus::Ok;
        let record =
            |curve: String, n_max: Option<u64>, s: Option<&StateStats>, status: &str| SweepRecord {
                k: p.k(),
                gamma: p.gamma(),
                abs_z: row.abs_z,
                curve,
                n_max,
                mandel_q: s.and_then(|s| s.mandel_q),
                mean: s.map(|s| s.mean),
                variance: s.map(|s| s.variance),
                terms_used: s.map(|s| s.sums.terms_used),
                status: status.to_string(),
            };
        records.push(record(
            "adaptive".into(),
            None,
            row.adaptive.as_ref(),
            status_name(row.status),
        ));
        for &n_max in &cutoffs {
            let s = row.fixed.get(&n_max);
            let status = if s.is_some() { "ok" } else { "failed" };
            records.push(record(format!("fixed_{n_max}"), Some(n_max), s, status));
        }
    }

    let inputs = merge(
        json!({
            "k": p.k(),
            "gamma": p.gamma(),
            "z_min": args.z_min,
            "z_max": args.z_max,
            "z_step": args.z_step,
            "cutoffs": cutoffs,
        }),
        policy_inputs(&policy),
    );
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Table => write_sweep_wide(w, &inputs, &report, &cutoffs)?,
        format => write_records(w, format, &inputs, &records)?,
    }
    not_converged_check(all_converged, &policy, "sweep")
}

/// One line per |z| with a Q column per curve.
fn write_sweep_wide<W: Write>(
    w: &mut W,
    inputs: &Value,
    report: &ghacs_core::TruncationReport,
    cutoffs: &[u64],
) -> io::Result<()> {
    writeln!(w, "# {}", describe_inputs(inputs))?;
    let mut header: Vec<String> = vec!["abs_z".into(), "q_adaptive".into()];
    header.extend(cutoffs.iter().map(|c| format!("q_{c}")));
    header.push("threshold".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            let mut cells = vec![num(row.abs_z), q_cell(row.adaptive.as_ref())];
            cells.extend(cutoffs.iter().map(|c| q_cell(row.fixed.get(c))));
            cells.push(opt_int(row.threshold_estimate));
            cells
        })
        .collect();
    write_aligned(w, &header_refs, &rows)
}

fn q_cell(s: Option<&StateStats>) -> String {
    match s {
        None => "failed".into(),
        Some(s) => opt_dp2(s.mandel_q),
    }
}

pub fn dist<W: Write>(args: &DistArgs, w: &mut W) -> CmdResult {
    let p = params(&args.physics)?;
    let policy = args.policy.policy();
    let dist = weight_distribution(args.z, &p, &policy)?;
    let s = state_stats(args.z, &p, &policy)?;
    let total = dist.total();
    let footer: Vec<(&str, String)> = vec![
        ("sum", num(total)),
        ("mean", num(s.mean)),
        ("variance", num(s.variance)),
        ("mandel_q", opt_num(s.mandel_q)),
        ("terms_used", dist.support_bound.to_string()),
        ("converged", dist.converged.to_string()),
        ("k", num(p.k())),
        ("gamma", num(p.gamma())),
        ("abs_z", num(args.z)),
    ];
    let inputs = merge(
        json!({ "k": p.k(), "gamma": p.gamma(), "abs_z": args.z }),
        policy_inputs(&policy),
    );

    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = csv_writer(&mut *w);
            out.write_record(["n", "p_n"])?;
            for (n, pn) in dist.probabilities().enumerate() {
                out.write_record([n.to_string(), num(pn)])?;
            }
            for (label, value) in &footer {
                out.write_record([*label, value.as_str()])?;
            }
            out.flush()?;
        }
        Format::Json => {
            let rows: Vec<Value> = dist
                .probabilities()
                .enumerate()
                .map(|(n, pn)| json!({ "n": n, "p_n": pn }))
                .collect();
            write_json(
                w,
                json!({
                    "inputs": inputs,
                    "rows": rows,
                    "sum": total,
                    "mean": s.mean,
                    "variance": s.variance,
                    "mandel_q": s.mandel_q,
                    "terms_used": dist.support_bound,
                    "converged": dist.converged,
                }),
            )?;
        }
        Format::Table => {
            writeln!(w, "# {}", describe_inputs(&inputs))?;
            let rows: Vec<Vec<String>> = dist
                .probabilities()
                .enumerate()
                .map(|(n, pn)| vec![n.to_string(), format!("{pn:.6}")])
                .collect();
            write_aligned(w, &["n", "p_n"], &rows)?;
            for (label, value) in &footer {
                writeln!(w, "# {label} = {value}")?;
            }
        }
    }
    not_converged_check(dist.converged, &policy, &format!("|z| = {}", args.z))
}
