//! Command-line layer: run configurations, JSON documents and the
//! implementations behind the `dicke6` binary's subcommands.
//!
//! Documents are serialized with stable field order and a `format_version`
//! tag so runs can be archived and re-analyzed later. Failures map to exit
//! codes: 2 for configuration problems, 3 for malformed input documents,
//! 4 for numerical failures.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    estimate_bell, estimate_fidelity, evaluate_witness_from_data, fidelity_settings,
    propagate_error, witness_settings, bell_settings, ErrorMethod, WitnessKind,
};
use crate::measure::{
    exact_run, simulate_run, DetectorEfficiencies, MeasuredSetting, ModeBasis, Setting,
};
use crate::photonics::{
    source_state, SplitterTree, DEFAULT_EFFICIENCY, DEFAULT_PAIR_WEIGHT_FOUR,
};
use crate::qcore::{expectation, fidelity_with_pure, Axis, MixedState, Observable};
use crate::states::dicke;
use crate::witness::{
    decompose_settings, fidelity_bound_from_moments, ghz_two_setting_witness, j2_witness,
    moments_witness, optimize_bisep_bound, subspace_projector, SettingDecomposition,
    J2_ALPHA_6,
};
use crate::collective::transverse_j2;

/// Version tag written into every document this module emits.
pub const FORMAT_VERSION: u32 = 1;

/// Observed sixfold coincidence rate, events per minute.
pub const EVENT_RATE_PER_MINUTE: f64 = 3.7;

/// Wall-clock budget of a full fidelity run, hours.
pub const FIDELITY_RUN_HOURS: f64 = 31.5;

/// Wall-clock budget of the two-setting witness run, hours.
pub const TWO_SETTING_RUN_HOURS: f64 = 17.1;

/// Wall-clock budget of one collective-moment panel, minutes.
pub const PANEL_MINUTES: f64 = 279.0;

#[derive(Parser, Debug)]
#[command(
    name = "dicke6",
    about = "Simulate, analyze and verify six-photon symmetric Dicke-state experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration file (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed for sampling and resampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use exact expected counts instead of Poisson samples.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Bootstrap replicates for error bars (default: linear propagation).
    #[arg(long, global = true)]
    pub bootstrap: Option<usize>,
    /// Also write a flat CSV rendering of the result.
    #[arg(long = "emit-csv", global = true)]
    pub emit_csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate synthetic count histograms from the modeled source.
    Simulate {
        #[arg(long, value_enum, default_value_t = Plan::Fidelity)]
        plan: Plan,
    },
    /// Estimate the quantity a run document was taken for.
    Analyze {
        /// Run document produced by `simulate`.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Optimize the biseparable bound of an operator by alternating
    /// eigenvector ascent over all bipartitions.
    Optimize {
        #[arg(long, value_enum)]
        target: OptimizeTarget,
        #[arg(long, default_value_t = 12)]
        restarts: usize,
    },
    /// Decompose a target operator into local symmetric settings.
    Decompose {
        #[arg(long, value_enum)]
        target: DecomposeTarget,
        #[arg(long, default_value_t = 21)]
        budget: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Report a theoretical state: amplitudes or populations and fidelity.
    State {
        #[arg(long, value_enum)]
        which: WhichState,
    },
    /// Evaluate a witness on the ideal and modeled states.
    Witness {
        #[arg(long, value_enum)]
        kind: WitnessArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plan {
    #[value(name = "fidelity")]
    Fidelity,
    #[value(name = "witness-j2")]
    WitnessJ2,
    #[value(name = "witness-moments")]
    WitnessMoments,
    #[value(name = "witness-ghz")]
    WitnessGhz,
    #[value(name = "bell")]
    Bell,
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Plan {
    pub fn name(self) -> &'static str {
        match self {
            Plan::Fidelity => "fidelity",
            Plan::WitnessJ2 => "witness-j2",
            Plan::WitnessMoments => "witness-moments",
            Plan::WitnessGhz => "witness-ghz",
            Plan::Bell => "bell",
        }
    }

    fn parse(name: &str) -> Option<Plan> {
        [
            Plan::Fidelity,
            Plan::WitnessJ2,
            Plan::WitnessMoments,
            Plan::WitnessGhz,
            Plan::Bell,
        ]
        .into_iter()
        .find(|p| p.name() == name)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizeTarget {
    /// Projector onto the six-qubit half-filled Dicke state.
    #[value(name = "dicke-projector")]
    DickeProjector,
    /// Transverse collective spin `Jx^2 + Jy^2` on six qubits.
    #[value(name = "transverse")]
    Transverse,
    /// Projector onto the span of the two five-qubit Dicke components.
    #[value(name = "subspace5")]
    Subspace5,
    /// Odd-parity plus population projectors of the four-qubit GHZ witness.
    #[value(name = "ghz4")]
    Ghz4,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecomposeTarget {
    #[value(name = "dicke-projector")]
    DickeProjector,
    #[value(name = "jz2")]
    Jz2,
    #[value(name = "dicke4-projector")]
    Dicke4Projector,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhichState {
    #[value(name = "dicke")]
    Dicke,
    #[value(name = "source")]
    Source,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessArg {
    #[value(name = "j2")]
    J2,
    #[value(name = "moments")]
    Moments,
    #[value(name = "ghz")]
    Ghz,
}

/// Failure of a CLI operation, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or environment (exit code 2).
    Config(String),
    /// Malformed or incompatible input document (exit code 3).
    Schema(String),
    /// Numerical or estimation failure (exit code 4).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Schema(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Schema(msg) => write!(f, "document error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Which beam-splitter tree the source uses.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TreeConfig {
    Reference,
    Symmetric,
}

impl TreeConfig {
    pub fn build(self) -> SplitterTree {
        match self {
            TreeConfig::Reference => SplitterTree::reference(),
            TreeConfig::Symmetric => SplitterTree::symmetric(),
        }
    }
}

/// Source and detection parameters for a simulated run.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tree: TreeConfig,
    /// Relative weight of the four-pair emission.
    pub pair_weight_four: f64,
    /// Per-photon transmission of the source and collection optics.
    pub source_efficiency: f64,
    /// Detector efficiency per mode and output port.
    pub detector_efficiencies: Vec<[f64; 2]>,
    /// Absolute one-standard-deviation uncertainty of each efficiency.
    pub detector_sigma: f64,
    /// Sixfold events recorded per setting; task defaults when absent.
    pub events_per_setting: Option<f64>,
    /// Sixfold coincidence rate, events per minute.
    pub rate_per_minute: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tree: TreeConfig::Reference,
            pair_weight_four: DEFAULT_PAIR_WEIGHT_FOUR,
            source_efficiency: DEFAULT_EFFICIENCY,
            detector_efficiencies: vec![
                [0.97, 0.93],
                [0.95, 0.94],
                [0.96, 0.92],
                [0.93, 0.95],
                [0.94, 0.96],
                [0.92, 0.97],
            ],
            detector_sigma: 0.01,
            events_per_setting: None,
            rate_per_minute: EVENT_RATE_PER_MINUTE,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.detector_efficiencies.len() != 6 {
            return Err(CliError::Config(format!(
                "expected 6 detector efficiency pairs, got {}",
                self.detector_efficiencies.len()
            )));
        }
        DetectorEfficiencies::new(self.detector_efficiencies.clone())
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.source_efficiency > 0.0 && self.source_efficiency <= 1.0) {
            return Err(CliError::Config(format!(
                "source efficiency {} outside (0, 1]",
                self.source_efficiency
            )));
        }
        if self.pair_weight_four < 0.0 {
            return Err(CliError::Config("negative four-pair weight".into()));
        }
        if self.detector_sigma < 0.0 {
            return Err(CliError::Config("negative detector uncertainty".into()));
        }
        if !(self.rate_per_minute > 0.0) {
            return Err(CliError::Config("event rate must be positive".into()));
        }
        if let Some(ev) = self.events_per_setting {
            if !(ev > 0.0) {
                return Err(CliError::Config("events per setting must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn detectors(&self) -> DetectorEfficiencies {
        DetectorEfficiencies::new(self.detector_efficiencies.clone())
            .expect("validated at load time")
    }

    pub fn source(&self) -> crate::Result<(MixedState, f64)> {
        source_state(
            &self.tree.build(),
            self.pair_weight_four,
            self.source_efficiency,
        )
    }
}

/// One measured (or expected) histogram in a run document.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SettingDoc {
    pub bases: Vec<BasisDoc>,
    pub counts: Vec<f64>,
    pub expected: Vec<f64>,
}

/// A mode basis as stored in documents: an axis name or a Bloch direction.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum BasisDoc {
    Axis(String),
    Direction { theta: f64, phi: f64 },
}

impl BasisDoc {
    fn from_basis(basis: &ModeBasis) -> Self {
        match basis {
            ModeBasis::Axis(a) => BasisDoc::Axis(a.name().to_string()),
            ModeBasis::Direction { theta, phi } => BasisDoc::Direction {
                theta: *theta,
                phi: *phi,
            },
        }
    }

    fn to_basis(&self) -> CliResult<ModeBasis> {
        match self {
            BasisDoc::Axis(name) => match name.as_str() {
                "x" | "X" => Ok(ModeBasis::Axis(Axis::X)),
                "y" | "Y" => Ok(ModeBasis::Axis(Axis::Y)),
                "z" | "Z" => Ok(ModeBasis::Axis(Axis::Z)),
                other => Err(CliError::Schema(format!("unknown axis name {other:?}"))),
            },
            BasisDoc::Direction { theta, phi } => Ok(ModeBasis::Direction {
                theta: *theta,
                phi: *phi,
            }),
        }
    }
}

/// Settings decomposition as stored in documents.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DecompositionDoc {
    pub directions: Vec<[f64; 3]>,
    pub coefficients: Vec<Vec<f64>>,
    pub constant: f64,
    pub residual: f64,
}

impl DecompositionDoc {
    fn from_decomposition(d: &SettingDecomposition) -> Self {
        DecompositionDoc {
            directions: d.directions.clone(),
            coefficients: d.coefficients.clone(),
            constant: d.constant,
            residual: d.residual,
        }
    }

    fn to_decomposition(&self) -> CliResult<SettingDecomposition> {
        if self.directions.len() != self.coefficients.len() {
            return Err(CliError::Schema(
                "decomposition directions and coefficients differ in length".into(),
            ));
        }
        Ok(SettingDecomposition {
            directions: self.directions.clone(),
            coefficients: self.coefficients.clone(),
            constant: self.constant,
            residual: self.residual,
        })
    }
}

/// A complete simulated run: configuration, plan and per-setting counts.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RunDocument {
    pub format_version: u32,
    pub plan: String,
    /// Seed the histograms were sampled with; absent for exact runs.
    pub seed: Option<u64>,
    pub exact: bool,
    pub events_per_setting: f64,
    pub config: RunConfig,
    /// Present for fidelity runs; needed to re-estimate from the counts.
    pub decomposition: Option<DecompositionDoc>,
    pub settings: Vec<SettingDoc>,
}

/// Estimation result for one run document.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    pub format_version: u32,
    pub plan: String,
    pub method: String,
    pub value: f64,
    pub sigma: f64,
    pub details: BTreeMap<String, f64>,
}

/// Biseparable-bound optimization result.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct OptimizeReport {
    pub format_version: u32,
    pub target: String,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Qubits on the left side of the best bipartition.
    pub cut: Vec<usize>,
}

/// Settings-decomposition result.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DecomposeReport {
    pub format_version: u32,
    pub target: String,
    pub num_settings: usize,
    pub decomposition: DecompositionDoc,
}

/// Theoretical state report.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct StateReport {
    pub format_version: u32,
    pub which: String,
    pub num_qubits: usize,
    /// Real amplitudes for pure states, basis populations for mixed ones.
    pub values: Vec<f64>,
    pub fidelity_to_dicke: f64,
    pub purity: f64,
    /// Sixfold coincidence probability of the modeled source, when relevant.
    pub herald_probability: Option<f64>,
}

/// Witness values on the ideal state and the modeled source.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub format_version: u32,
    pub kind: String,
    pub ideal_value: f64,
    pub source_value: f64,
    pub details: BTreeMap<String, f64>,
}

fn write_output(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn write_csv(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))
}

fn outcome_label(outcome: usize, num_modes: usize) -> String {
    (0..num_modes)
        .map(|m| {
            if (outcome >> (num_modes - 1 - m)) & 1 == 0 {
                'H'
            } else {
                'V'
            }
        })
        .collect()
}

/// Executes a parsed command line, writing its documents as requested.
pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate { plan } => simulate_command(cli, *plan),
        Command::Analyze { input } => analyze_command(cli, input),
        Command::Optimize { target, restarts } => optimize_command(cli, *target, *restarts),
        Command::Decompose {
            target,
            budget,
            tol,
        } => decompose_command(cli, *target, *budget, *tol),
        Command::State { which } => state_command(cli, *which),
        Command::Witness { kind } => witness_command(cli, *kind),
    }
}

fn plan_settings(
    plan: Plan,
) -> crate::Result<(Vec<Setting>, Option<SettingDecomposition>)> {
    match plan {
        Plan::Fidelity => {
            let target = Observable::projector(&dicke(6, 3)?);
            let decomposition = decompose_settings(&target, 21, 1e-9)?;
            let settings = fidelity_settings(&decomposition, 6)?;
            Ok((settings, Some(decomposition)))
        }
        Plan::WitnessJ2 => Ok((
            witness_settings(WitnessKind::TransverseSpin { alpha: J2_ALPHA_6 }, 6)?,
            None,
        )),
        Plan::WitnessMoments => Ok((witness_settings(WitnessKind::Moments, 6)?, None)),
        Plan::WitnessGhz => Ok((witness_settings(WitnessKind::GhzTwoSetting, 6)?, None)),
        Plan::Bell => Ok((bell_settings()?, None)),
    }
}

fn default_events(plan: Plan, num_settings: usize, rate: f64) -> f64 {
    match plan {
        Plan::Fidelity => FIDELITY_RUN_HOURS * 60.0 * rate / num_settings as f64,
        Plan::WitnessGhz => TWO_SETTING_RUN_HOURS * 60.0 * rate / num_settings as f64,
        Plan::WitnessJ2 | Plan::WitnessMoments | Plan::Bell => PANEL_MINUTES * rate,
    }
}

fn simulate_command(cli: &Cli, plan: Plan) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let (settings, decomposition) = plan_settings(plan)?;
    let events = config
        .events_per_setting
        .unwrap_or_else(|| default_events(plan, settings.len(), config.rate_per_minute));
    let (rho, _) = config.source()?;
    let detectors = config.detectors();
    let seed = cli.seed.unwrap_or(0);
    let expected = exact_run((&rho).into(), &settings, &detectors, events)?;
    let measured = if cli.exact {
        expected.clone()
    } else {
        simulate_run((&rho).into(), &settings, &detectors, events, seed)?
    };
    let docs: Vec<SettingDoc> = measured
        .iter()
        .zip(&expected)
        .map(|(m, e)| SettingDoc {
            bases: m.setting.bases().iter().map(BasisDoc::from_basis).collect(),
            counts: m.counts.clone(),
            expected: e.counts.clone(),
        })
        .collect();
    let document = RunDocument {
        format_version: FORMAT_VERSION,
        plan: plan.name().to_string(),
        seed: (!cli.exact).then_some(seed),
        exact: cli.exact,
        events_per_setting: events,
        config,
        decomposition: decomposition
            .as_ref()
            .map(DecompositionDoc::from_decomposition),
        settings: docs,
    };
    if let Some(csv_path) = &cli.emit_csv {
        let mut csv = String::from("setting,outcome,count,expected\n");
        for (si, doc) in document.settings.iter().enumerate() {
            for (o, (count, theory)) in doc.counts.iter().zip(&doc.expected).enumerate() {
                csv.push_str(&format!(
                    "{si},{},{count},{theory}\n",
                    outcome_label(o, doc.bases.len())
                ));
            }
        }
        write_csv(csv_path, &csv)?;
    }
    write_output(cli, &to_json(&document)?)
}

fn load_run_document(path: &Path) -> CliResult<RunDocument> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let doc: RunDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(format!("cannot parse {}: {e}", path.display())))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(CliError::Schema(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    doc.config.validate()?;
    Ok(doc)
}

fn measured_settings(doc: &RunDocument) -> CliResult<Vec<MeasuredSetting>> {
    doc.settings
        .iter()
        .map(|s| {
            let bases = s
                .bases
                .iter()
                .map(BasisDoc::to_basis)
                .collect::<CliResult<Vec<_>>>()?;
            let setting = Setting::new(bases).map_err(|e| CliError::Schema(e.to_string()))?;
            if s.counts.len() != 1 << setting.num_modes() {
                return Err(CliError::Schema(format!(
                    "histogram has {} bins for {} modes",
                    s.counts.len(),
                    setting.num_modes()
                )));
            }
            Ok(MeasuredSetting {
                setting,
                counts: s.counts.clone(),
            })
        })
        .collect()
}

fn analyze_command(cli: &Cli, input: &Path) -> CliResult<()> {
    let doc = load_run_document(input)?;
    let plan = Plan::parse(&doc.plan)
        .ok_or_else(|| CliError::Schema(format!("unknown plan {:?}", doc.plan)))?;
    let data = measured_settings(&doc)?;
    let detectors = doc.config.detectors();
    let method = match cli.bootstrap {
        Some(replicates) => ErrorMethod::Bootstrap {
            replicates,
            seed: cli.seed.or(doc.seed).unwrap_or(0),
        },
        None => ErrorMethod::Linear,
    };
    let decomposition = match plan {
        Plan::Fidelity => Some(
            doc.decomposition
                .as_ref()
                .ok_or_else(|| {
                    CliError::Schema("fidelity run without embedded decomposition".into())
                })?
                .to_decomposition()?,
        ),
        _ => None,
    };
    let estimate = propagate_error(
        &data,
        &detectors,
        doc.config.detector_sigma,
        method,
        |d, e| match plan {
            Plan::Fidelity => estimate_fidelity(decomposition.as_ref().unwrap(), d, e),
            Plan::WitnessJ2 => {
                evaluate_witness_from_data(WitnessKind::TransverseSpin { alpha: J2_ALPHA_6 }, d, e)
            }
            Plan::WitnessMoments => evaluate_witness_from_data(WitnessKind::Moments, d, e),
            Plan::WitnessGhz => evaluate_witness_from_data(WitnessKind::GhzTwoSetting, d, e),
            Plan::Bell => estimate_bell(d, e),
        },
    )?;
    let mut details = BTreeMap::new();
    details.insert(
        "events_recorded".to_string(),
        data.iter().map(|m| m.counts.iter().sum::<f64>()).sum(),
    );
    match plan {
        Plan::WitnessJ2 => {
            details.insert("alpha".to_string(), J2_ALPHA_6);
        }
        Plan::WitnessMoments => {
            details.insert(
                "fidelity_bound".to_string(),
                fidelity_bound_from_moments(estimate.value),
            );
            details.insert("fidelity_bound_sigma".to_string(), estimate.sigma / 2.5);
        }
        Plan::Fidelity => {
            let d = decomposition.as_ref().unwrap();
            details.insert("decomposition_residual".to_string(), d.residual);
            details.insert("num_settings".to_string(), data.len() as f64);
        }
        _ => {}
    }
    let report = AnalysisReport {
        format_version: FORMAT_VERSION,
        plan: doc.plan.clone(),
        method: match method {
            ErrorMethod::Linear => "linear".to_string(),
            ErrorMethod::Bootstrap { .. } => "bootstrap".to_string(),
        },
        value: estimate.value,
        sigma: estimate.sigma,
        details,
    };
    if let Some(csv_path) = &cli.emit_csv {
        let mut csv = String::from("quantity,value,sigma\n");
        csv.push_str(&format!("{},{},{}\n", report.plan, report.value, report.sigma));
        for (key, value) in &report.details {
            csv.push_str(&format!("{key},{value},\n"));
        }
        write_csv(csv_path, &csv)?;
    }
    write_output(cli, &to_json(&report)?)
}

fn optimize_command(cli: &Cli, target: OptimizeTarget, restarts: usize) -> CliResult<()> {
    let seed = cli.seed.unwrap_or(11);
    let (name, op) = match target {
        OptimizeTarget::DickeProjector => (
            "dicke-projector",
            Observable::projector(&dicke(6, 3).map_err(CliError::from)?),
        ),
        OptimizeTarget::Transverse => ("transverse", transverse_j2(6).map_err(CliError::from)?),
        OptimizeTarget::Subspace5 => {
            let d52 = dicke(5, 2).map_err(CliError::from)?;
            let d53 = dicke(5, 3).map_err(CliError::from)?;
            (
                "subspace5",
                subspace_projector(&[d52, d53]).map_err(CliError::from)?,
            )
        }
        OptimizeTarget::Ghz4 => {
            // the negated variable part of the witness: its biseparable
            // maximum is what the witness offset must dominate
            let w = ghz_two_setting_witness().map_err(CliError::from)?;
            let op = Observable::identity(4)
                .and_then(|i| i.scale(1.5).sub(&w))
                .map_err(CliError::from)?;
            ("ghz4", op)
        }
    };
    let result = optimize_bisep_bound(&op, restarts, seed)?;
    let report = OptimizeReport {
        format_version: FORMAT_VERSION,
        target: name.to_string(),
        value: result.value,
        converged: result.converged,
        iterations: result.iterations,
        restarts,
        seed,
        cut: result.cut.left().to_vec(),
    };
    if let Some(csv_path) = &cli.emit_csv {
        let csv = format!(
            "target,value,converged,iterations\n{},{},{},{}\n",
            report.target, report.value, report.converged, report.iterations
        );
        write_csv(csv_path, &csv)?;
    }
    write_output(cli, &to_json(&report)?)
}

fn decompose_command(
    cli: &Cli,
    target: DecomposeTarget,
    budget: usize,
    tol: f64,
) -> CliResult<()> {
    let (name, op) = match target {
        DecomposeTarget::DickeProjector => (
            "dicke-projector",
            Observable::projector(&dicke(6, 3).map_err(CliError::from)?),
        ),
        DecomposeTarget::Jz2 => {
            let jz = crate::collective::collective_j(6, Axis::Z).map_err(CliError::from)?;
            ("jz2", jz.power(2))
        }
        DecomposeTarget::Dicke4Projector => (
            "dicke4-projector",
            Observable::projector(&dicke(4, 2).map_err(CliError::from)?),
        ),
    };
    let decomposition = decompose_settings(&op, budget, tol)?;
    let report = DecomposeReport {
        format_version: FORMAT_VERSION,
        target: name.to_string(),
        num_settings: decomposition.len(),
        decomposition: DecompositionDoc::from_decomposition(&decomposition),
    };
    if let Some(csv_path) = &cli.emit_csv {
        let mut csv = String::from("direction_x,direction_y,direction_z,k,coefficient\n");
        let d = &report.decomposition;
        for (dir, coeffs) in d.directions.iter().zip(&d.coefficients) {
            for (k, c) in coeffs.iter().enumerate().skip(1) {
                if c.abs() > 0.0 {
                    csv.push_str(&format!(
                        "{},{},{},{k},{c}\n",
                        dir[0], dir[1], dir[2]
                    ));
                }
            }
        }
        write_csv(csv_path, &csv)?;
    }
    write_output(cli, &to_json(&report)?)
}

fn state_command(cli: &Cli, which: WhichState) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let d63 = dicke(6, 3).map_err(CliError::from)?;
    let report = match which {
        WhichState::Dicke => StateReport {
            format_version: FORMAT_VERSION,
            which: "dicke".to_string(),
            num_qubits: 6,
            values: d63.amplitudes().iter().map(|a| a.re).collect(),
            fidelity_to_dicke: 1.0,
            purity: 1.0,
            herald_probability: None,
        },
        WhichState::Source => {
            let (rho, probability) = config.source()?;
            let fidelity = fidelity_with_pure(&rho, &d63)?;
            let mat = rho.matrix();
            let purity = (mat * mat)
                .diagonal()
                .iter()
                .map(|c| c.re)
                .sum::<f64>();
            StateReport {
                format_version: FORMAT_VERSION,
                which: "source".to_string(),
                num_qubits: 6,
                values: (0..mat.nrows()).map(|i| mat[(i, i)].re).collect(),
                fidelity_to_dicke: fidelity,
                purity,
                herald_probability: Some(probability),
            }
        }
    };
    if let Some(csv_path) = &cli.emit_csv {
        let mut csv = String::from("outcome,value\n");
        for (i, v) in report.values.iter().enumerate() {
            csv.push_str(&format!("{},{v}\n", outcome_label(i, report.num_qubits)));
        }
        write_csv(csv_path, &csv)?;
    }
    write_output(cli, &to_json(&report)?)
}

fn witness_command(cli: &Cli, kind: WitnessArg) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let d63 = dicke(6, 3).map_err(CliError::from)?;
    let (rho, _) = config.source()?;
    let mut details = BTreeMap::new();
    let (name, ideal_value, source_value) = match kind {
        WitnessArg::J2 => {
            let w = j2_witness(6, J2_ALPHA_6).map_err(CliError::from)?;
            details.insert("alpha".to_string(), J2_ALPHA_6);
            (
                "j2",
                expectation((&d63).into(), &w).map_err(CliError::from)?,
                expectation((&rho).into(), &w).map_err(CliError::from)?,
            )
        }
        WitnessArg::Moments => {
            let w = moments_witness().map_err(CliError::from)?;
            let ideal = expectation((&d63).into(), &w).map_err(CliError::from)?;
            let source = expectation((&rho).into(), &w).map_err(CliError::from)?;
            details.insert(
                "ideal_fidelity_bound".to_string(),
                fidelity_bound_from_moments(ideal),
            );
            details.insert(
                "source_fidelity_bound".to_string(),
                fidelity_bound_from_moments(source),
            );
            ("moments", ideal, source)
        }
        WitnessArg::Ghz => {
            // evaluate through the measurement pipeline: exact histograms,
            // conditioned on the two projective modes
            let settings = witness_settings(WitnessKind::GhzTwoSetting, 6)?;
            let detectors = config.detectors();
            let ideal_data = exact_run((&d63).into(), &settings, &detectors, 1000.0)?;
            let source_data = exact_run((&rho).into(), &settings, &detectors, 1000.0)?;
            (
                "ghz",
                evaluate_witness_from_data(WitnessKind::GhzTwoSetting, &ideal_data, &detectors)?,
                evaluate_witness_from_data(WitnessKind::GhzTwoSetting, &source_data, &detectors)?,
            )
        }
    };
    let report = WitnessReport {
        format_version: FORMAT_VERSION,
        kind: name.to_string(),
        ideal_value,
        source_value,
        details,
    };
    if let Some(csv_path) = &cli.emit_csv {
        let mut csv = String::from("quantity,value\n");
        csv.push_str(&format!("ideal,{}\n", report.ideal_value));
        csv.push_str(&format!("source,{}\n", report.source_value));
        for (key, value) in &report.details {
            csv.push_str(&format!("{key},{value}\n"));
        }
        write_csv(csv_path, &csv)?;
    }
    write_output(cli, &to_json(&report)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_json() {
        let config = RunConfig::default();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let text = r#"{"tree": "reference", "typo_field": 3}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn basis_documents_round_trip() {
        let bases = [
            ModeBasis::Axis(Axis::X),
            ModeBasis::Axis(Axis::Z),
            ModeBasis::Direction {
                theta: 0.7,
                phi: -1.2,
            },
        ];
        for basis in bases {
            let doc = BasisDoc::from_basis(&basis);
            let text = serde_json::to_string(&doc).unwrap();
            let back: BasisDoc = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_basis().unwrap(), basis);
        }
    }

    #[test]
    fn plan_names_round_trip() {
        for plan in [
            Plan::Fidelity,
            Plan::WitnessJ2,
            Plan::WitnessMoments,
            Plan::WitnessGhz,
            Plan::Bell,
        ] {
            assert_eq!(Plan::parse(plan.name()), Some(plan));
        }
        assert_eq!(Plan::parse("unheard-of"), None);
    }

    #[test]
    fn default_event_budgets_reflect_the_run_durations() {
        // one 279-minute panel at 3.7 events per minute
        let panel = default_events(Plan::WitnessMoments, 3, EVENT_RATE_PER_MINUTE);
        assert!((panel - 1032.3).abs() < 0.5);
        // 17.1 hours shared between the two projected settings
        let ghz = default_events(Plan::WitnessGhz, 2, EVENT_RATE_PER_MINUTE);
        assert!((ghz - 1898.1).abs() < 0.5);
        // 31.5 hours shared across a 20-setting fidelity run
        let fid = default_events(Plan::Fidelity, 20, EVENT_RATE_PER_MINUTE);
        assert!((fid - 349.65).abs() < 0.5);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut config = RunConfig::default();
        config.detector_efficiencies.pop();
        assert!(config.validate().is_err());

        let mut config = RunConfig::default();
        config.detector_efficiencies[2][1] = 0.0;
        assert!(config.validate().is_err());

        let mut config = RunConfig::default();
        config.source_efficiency = 1.5;
        assert!(config.validate().is_err());

        let mut config = RunConfig::default();
        config.events_per_setting = Some(-3.0);
        assert!(config.validate().is_err());
    }
}
