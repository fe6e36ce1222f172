//! Experiment plumbing for `aoisim`: sweeps over a base scenario and CSV output.

use std::fmt;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aoi_core::scenario::ConfigErrors;
use aoi_core::{run_policy, MetricsSummary, PolicyKind, RunOptions, ScenarioConfig, SlotRecord};
use thiserror::Error;

pub const SUMMARY_HEADER: [&str; 8] =
    ["sweep_label", "policy", "sampling_rate_bps", "M", "alpha_i", "violation_probability", "avg_aoi_s", "rmse_s"];
pub const CCDF_HEADER: [&str; 4] = ["sweep_label", "policy", "threshold_s", "ccdf"];
pub const TRACE_HEADER: [&str; 17] = [
    "sweep_label",
    "policy",
    "run",
    "slot",
    "subnetwork",
    "aoi_s",
    "action",
    "mu_s",
    "var_s2",
    "next_aoi_s",
    "rate_packets",
    "backlog_before",
    "arrivals",
    "delivered",
    "backlog_after",
    "freshest_delivered_slot",
    "interference_w",
];

/// The parameter varied across sweep points.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    None,
    WindowSize(Vec<usize>),
    AlphaI(Vec<f64>),
    SamplingRate(Vec<f64>),
    /// Same as listing the policies; kept so `--sweep policy=...` works.
    Policy(Vec<PolicyKind>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepParseError {
    #[error("expected AXIS=v1,v2,... (axes: M, alpha_i, sampling_rate, policy)")]
    Syntax,
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
    #[error("bad value `{value}` for {axis}")]
    BadValue { axis: String, value: String },
    #[error("sweep list for {0} is empty")]
    Empty(String),
}

impl FromStr for SweepAxis {
    type Err = SweepParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(SweepAxis::None);
        }
        let (axis, list) = s.split_once('=').ok_or(SweepParseError::Syntax)?;
        let axis = axis.trim();
        let values: Vec<&str> = list.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(SweepParseError::Empty(axis.to_string()));
        }
        fn parse_all<T: FromStr>(axis: &str, values: &[&str]) -> Result<Vec<T>, SweepParseError> {
            values
                .iter()
                .map(|v| v.parse().map_err(|_| SweepParseError::BadValue { axis: axis.into(), value: (*v).into() }))
                .collect()
        }
        match axis {
            "M" | "m" | "window_size" => parse_all(axis, &values).map(SweepAxis::WindowSize),
            "alpha_i" => parse_all(axis, &values).map(SweepAxis::AlphaI),
            "sampling_rate" | "sampling_rate_bps" => parse_all(axis, &values).map(SweepAxis::SamplingRate),
            "policy" => parse_all(axis, &values).map(SweepAxis::Policy),
            other => Err(SweepParseError::UnknownAxis(other.to_string())),
        }
    }
}

/// One configuration to simulate, before the policy is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub label: String,
    pub config: ScenarioConfig,
}

/// Everything needed to run and record an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: ScenarioConfig,
    pub sweep: SweepAxis,
    pub policies: Vec<PolicyKind>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub trace: bool,
}

impl ExperimentSpec {
    /// The base config's seed and policy, no sweep.
    pub fn new(base: ScenarioConfig, out_dir: impl Into<PathBuf>) -> Self {
        Self { seed: base.seed, policies: vec![base.policy], base, sweep: SweepAxis::None, out_dir: out_dir.into(), trace: false }
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let with = |label: String, f: &dyn Fn(&mut ScenarioConfig)| {
            let mut config = self.base.clone();
            f(&mut config);
            SweepPoint { label, config }
        };
        match &self.sweep {
            SweepAxis::None | SweepAxis::Policy(_) => vec![with("base".into(), &|_| {})],
            SweepAxis::WindowSize(ms) => ms.iter().map(|&m| with(format!("M={m}"), &|c| c.window_size = m)).collect(),
            SweepAxis::AlphaI(xs) => xs.iter().map(|&a| with(format!("alpha_i={a}"), &|c| c.alpha_i = a)).collect(),
            SweepAxis::SamplingRate(xs) => {
                xs.iter().map(|&r| with(format!("sampling_rate={r}"), &|c| c.sampling_rate_bps = r)).collect()
            }
        }
    }

    pub fn policies(&self) -> &[PolicyKind] {
        match &self.sweep {
            SweepAxis::Policy(p) => p,
            _ => &self.policies,
        }
    }

    /// Checks every sweep point. All problems are reported, labeled by point.
    pub fn validate(&self) -> Result<(), SpecError> {
        let mut problems = Vec::new();
        if self.policies().is_empty() {
            problems.push("no policy selected".to_string());
        }
        for p in self.points() {
            if let Err(errs) = p.config.validate() {
                problems.extend(errs.0.iter().map(|e| format!("{}: {e}", p.label)));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SpecError::Invalid(problems))
        }
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid experiment:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("simulation produced no metrics: {0}")]
    Metrics(#[from] aoi_core::engine::MetricsError),
}

/// Metrics of one (sweep point, policy) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub label: String,
    pub policy: PolicyKind,
    pub config: ScenarioConfig,
    pub summary: MetricsSummary,
}

impl fmt::Display for ResultRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<22} {:<9} violation={:.3e} avg_aoi={:.4} ms",
            self.label,
            self.policy,
            self.summary.violation_probability,
            self.summary.avg_aoi * 1e3
        )?;
        if let Some(r) = self.summary.rmse {
            write!(f, " rmse={:.4} ms", r * 1e3)?;
        }
        Ok(())
    }
}

/// Runs every (sweep point, policy) pair, writes the CSV files, and prints
/// one line per pair to `log`.
pub fn run_command(spec: &ExperimentSpec, log: &mut dyn Write) -> Result<Vec<ResultRow>, SpecError> {
    spec.validate()?;
    fs::create_dir_all(&spec.out_dir).map_err(|source| SpecError::Io { path: spec.out_dir.clone(), source })?;
    let mut trace = if spec.trace { Some(TraceWriter::create(&spec.out_dir.join("trace.csv"))?) } else { None };

    let mut rows = Vec::new();
    for point in spec.points() {
        let sc = point.config.clone().validate()?;
        for &policy in spec.policies() {
            let out = run_policy(&sc, policy, spec.seed, RunOptions { collect_trace: trace.is_some() })?;
            if let (Some(w), Some(records)) = (trace.as_mut(), out.trace.as_ref()) {
                w.write(&point.label, policy, records)?;
            }
            let row = ResultRow { label: point.label.clone(), policy, config: point.config.clone(), summary: out.summary };
            // The log is informational; a closed stdout must not abort the experiment.
            let _ = writeln!(log, "{row}");
            rows.push(row);
        }
    }
    if let Some(w) = trace {
        w.finish()?;
    }
    write_summary(&spec.out_dir.join("summary.csv"), &rows)?;
    write_ccdf(&spec.out_dir.join("ccdf.csv"), &rows)?;
    Ok(rows)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> SpecError + '_ {
    move |source| SpecError::Csv { path: path.to_path_buf(), source }
}

fn create_csv(path: &Path) -> Result<csv::Writer<File>, SpecError> {
    let file = File::create(path).map_err(|source| SpecError::Io { path: path.to_path_buf(), source })?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_summary(path: &Path, rows: &[ResultRow]) -> Result<(), SpecError> {
    let mut w = create_csv(path)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.policy.to_string(),
            r.config.sampling_rate_bps.to_string(),
            r.config.window_size.to_string(),
            r.config.alpha_i.to_string(),
            r.summary.violation_probability.to_string(),
            r.summary.avg_aoi.to_string(),
            r.summary.rmse.map(|x| x.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| SpecError::Io { path: path.to_path_buf(), source })
}

pub fn write_ccdf(path: &Path, rows: &[ResultRow]) -> Result<(), SpecError> {
    let mut w = create_csv(path)?;
    w.write_record(CCDF_HEADER).map_err(csv_err(path))?;
    for r in rows {
        for &(x, p) in &r.summary.ccdf {
            w.write_record([r.label.clone(), r.policy.to_string(), x.to_string(), p.to_string()])
                .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|source| SpecError::Io { path: path.to_path_buf(), source })
}

struct TraceWriter {
    path: PathBuf,
    w: csv::Writer<File>,
}

impl TraceWriter {
    fn create(path: &Path) -> Result<Self, SpecError> {
        let mut w = create_csv(path)?;
        w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
        Ok(Self { path: path.to_path_buf(), w })
    }

    fn write(&mut self, label: &str, policy: PolicyKind, records: &[SlotRecord]) -> Result<(), SpecError> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in records {
            let interference: Vec<String> = r.interference.iter().map(|x| x.to_string()).collect();
            self.w
                .write_record([
                    label.to_string(),
                    policy.to_string(),
                    r.run.to_string(),
                    r.slot.to_string(),
                    r.subnetwork.to_string(),
                    r.aoi.to_string(),
                    r.action.to_string(),
                    opt(r.mu),
                    opt(r.var),
                    r.next_aoi.to_string(),
                    r.rate.to_string(),
                    r.backlog_before.to_string(),
                    r.arrivals.to_string(),
                    r.delivered.to_string(),
                    r.backlog_after.to_string(),
                    r.freshest_delivered.map(|g| g.to_string()).unwrap_or_default(),
                    interference.join(";"),
                ])
                .map_err(csv_err(&self.path))?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<(), SpecError> {
        self.w.flush().map_err(|source| SpecError::Io { path: self.path.clone(), source })
    }
}

/// Presets for the CCDF, window-size and exploration-weight figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// CCDF of every policy at 1 and 2 Mbps.
    Ccdf,
    /// Proposed policy over window sizes.
    WindowSize,
    /// Proposed policy over exploration weights.
    Exploration,
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2" | "ccdf" => Ok(Figure::Ccdf),
            "3" | "window" => Ok(Figure::WindowSize),
            "4" | "exploration" => Ok(Figure::Exploration),
            other => Err(format!("unknown figure `{other}` (use 2, 3 or 4)")),
        }
    }
}

impl Figure {
    pub fn spec(self, base: ScenarioConfig, out_dir: impl Into<PathBuf>) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(base, out_dir);
        match self {
            Figure::Ccdf => {
                spec.base.window_size = 300;
                spec.sweep = SweepAxis::SamplingRate(vec![1e6, 2e6]);
                spec.policies = PolicyKind::ALL.to_vec();
            }
            Figure::WindowSize => {
                spec.sweep = SweepAxis::WindowSize(vec![50, 100, 200, 300, 400, 500]);
                spec.policies = vec![PolicyKind::Proposed];
            }
            Figure::Exploration => {
                spec.sweep = SweepAxis::AlphaI(vec![0.0, 1.0, 10.0, 100.0, 1000.0]);
                spec.policies = vec![PolicyKind::Proposed];
            }
        }
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sweeps() {
        assert_eq!("M=50,100".parse(), Ok(SweepAxis::WindowSize(vec![50, 100])));
        assert_eq!("alpha_i=0, 1e3".parse(), Ok(SweepAxis::AlphaI(vec![0.0, 1000.0])));
        assert_eq!("sampling_rate=1e6,2e6".parse(), Ok(SweepAxis::SamplingRate(vec![1e6, 2e6])));
        assert_eq!(
            "policy=default,greedy".parse(),
            Ok(SweepAxis::Policy(vec![PolicyKind::Default, PolicyKind::Greedy]))
        );
        assert_eq!("none".parse(), Ok(SweepAxis::None));
        assert!(matches!("speed=1".parse::<SweepAxis>(), Err(SweepParseError::UnknownAxis(_))));
        assert!(matches!("M=".parse::<SweepAxis>(), Err(SweepParseError::Empty(_))));
        assert!(matches!("M=ten".parse::<SweepAxis>(), Err(SweepParseError::BadValue { .. })));
        assert!(matches!("M".parse::<SweepAxis>(), Err(SweepParseError::Syntax)));
    }

    #[test]
    fn sweep_points_are_labeled() {
        let mut spec = ExperimentSpec::new(ScenarioConfig::default(), "out");
        spec.sweep = SweepAxis::AlphaI(vec![0.0, 10.0]);
        let pts = spec.points();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].label, "alpha_i=10");
        assert_eq!(pts[1].config.alpha_i, 10.0);
        assert_eq!(pts[0].config.window_size, 300);
    }

    #[test]
    fn invalid_sweep_value_is_reported_per_point() {
        let mut spec = ExperimentSpec::new(ScenarioConfig::default(), "out");
        spec.sweep = SweepAxis::AlphaI(vec![1.0, -1.0]);
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("alpha_i=-1"), "{err}");
        assert!(!err.contains("alpha_i=1:"), "{err}");
    }

    #[test]
    fn figure_presets() {
        let s = Figure::Ccdf.spec(ScenarioConfig::default(), "o");
        assert_eq!(s.points().len(), 2);
        assert_eq!(s.policies().len(), 3);
        assert_eq!(Figure::WindowSize.spec(ScenarioConfig::default(), "o").points().len(), 6);
        assert_eq!("4".parse(), Ok(Figure::Exploration));
    }
}
