//! Machine-readable reports for runs, bounds, feasibility and GHZ checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::engine::{
    self, chsh_report, class_frequencies, correlation_band, estimate_correlation, mi_class_weights,
    mi_diagnostic, sampled_mi_tolerance, theoretical_chsh, theoretical_correlations, ChshReport,
    ClassFrequencies, MiDiagnostic, RunOptions, Schedule, HOEFFDING_DELTA,
};
use crate::error::Result;
use crate::fine::{chsh_criterion, jp_feasible, BehaviorStatistics, Facet};
use crate::ghz::{self, ProductConstraint, SatResult};
use crate::model::{Behavior, SettingPair};
use crate::quantum::{self, AnglePair};
use crate::scalar::{Rational, Scalar};
use crate::zoo;

/// Name accepted by [`run_report`] for singlet trials.
pub const QUANTUM_MODEL: &str = "quantum";

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: String,
    pub n_per_series: usize,
    pub seed: u64,
    pub angles: Option<AnglePair>,
    pub schedule: Schedule,
    pub threads: Option<usize>,
}

impl RunSpec {
    pub fn new(model: impl Into<String>, n_per_series: usize, seed: u64) -> Self {
        RunSpec {
            model: model.into(),
            n_per_series,
            seed,
            angles: None,
            schedule: Schedule::Independent,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub pair_i: u8,
    pub pair_k: u8,
    pub n: usize,
    pub e_hat: f64,
    pub hoeffding_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiReport {
    pub tolerance: f64,
    #[serde(flatten)]
    pub diagnostic: MiDiagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub seed: u64,
    pub n_per_series: usize,
    pub schedule: Schedule,
    pub angles: Option<AnglePair>,
    pub series: Vec<SeriesSummary>,
    pub chsh: ChshReport,
    pub tsirelson_bound: f64,
    pub class_frequencies: Option<ClassFrequencies>,
    pub mi: Option<MiReport>,
}

pub fn run_report(spec: &RunSpec) -> Result<RunReport> {
    let options = RunOptions {
        threads: spec.threads,
        schedule: spec.schedule,
    };
    let (log, model) = if spec.model == QUANTUM_MODEL {
        let angles = spec.angles.unwrap_or_default();
        (
            quantum::run_quantum_experiment(&angles, spec.n_per_series, spec.seed, &options)?,
            None,
        )
    } else {
        let model = zoo::by_name(&spec.model, spec.angles)?;
        (
            engine::run_experiment_with(model.as_ref(), spec.n_per_series, spec.seed, &options)?,
            Some(model),
        )
    };
    let series = SettingPair::ALL
        .iter()
        .map(|&pair| {
            let records = log.series(pair);
            Ok(SeriesSummary {
                pair_i: pair.alice.get(),
                pair_k: pair.bob.get(),
                n: records.len(),
                e_hat: estimate_correlation(records)?,
                hoeffding_eps: correlation_band(records.len(), HOEFFDING_DELTA),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (class_frequencies, mi) = match &model {
        Some(model) => {
            let freqs = class_frequencies(&log, model.as_ref())?;
            let shortest = series.iter().map(|s| s.n).min().unwrap_or(1);
            let tolerance = sampled_mi_tolerance(shortest);
            let diagnostic = mi_diagnostic(&freqs, tolerance)?;
            (
                Some(freqs),
                Some(MiReport {
                    tolerance,
                    diagnostic,
                }),
            )
        }
        None => (None, None),
    };
    let angles = match (&model, spec.model.as_str()) {
        (None, _) | (Some(_), "cosine-sign") => Some(spec.angles.unwrap_or_default()),
        _ => None,
    };
    Ok(RunReport {
        model: spec.model.clone(),
        seed: spec.seed,
        n_per_series: spec.n_per_series,
        schedule: spec.schedule,
        angles,
        series,
        chsh: chsh_report(&log)?,
        tsirelson_bound: quantum::tsirelson_bound(),
        class_frequencies,
        mi,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("reports serialize");
    out.push('\n');
    out
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per series, then a summary row.
pub fn run_report_csv(report: &RunReport) -> String {
    let mut out = String::from("pair_i,pair_k,n,e_hat,hoeffding_eps\n");
    for s in &report.series {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.pair_i,
            s.pair_k,
            s.n,
            format_float(s.e_hat),
            format_float(s.hoeffding_eps)
        );
    }
    out.push_str("s_star,bound_2,tsirelson_2sqrt2\n");
    let _ = writeln!(
        out,
        "{},{},{}",
        format_float(report.chsh.s_star),
        format_float(2.0),
        format_float(report.tsirelson_bound)
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub model: String,
    /// Exact class weights as `p/q` strings.
    pub weights: BTreeMap<Behavior, String>,
    pub per_class_c: BTreeMap<Behavior, i8>,
    pub correlations: [String; 4],
    pub s: String,
    pub s_f64: f64,
    pub bound_holds: bool,
}

/// Exact CHSH value of a measurement-independent model.
pub fn bound_report(model: &str, angles: Option<AnglePair>) -> Result<BoundReport> {
    let model = zoo::by_name(model, angles)?;
    let weights = mi_class_weights(model.as_ref())?;
    let chsh = theoretical_chsh(&weights);
    let table = theoretical_correlations(&weights);
    Ok(BoundReport {
        model: model.name().to_string(),
        weights: weights.iter().map(|(b, w)| (*b, w.to_string())).collect(),
        per_class_c: chsh.per_class_c,
        correlations: [&table.e11, &table.e12, &table.e21, &table.e22].map(|e| e.to_string()),
        s_f64: chsh.s.as_f64(),
        bound_holds: chsh.s.clone().abs() <= Rational::from_int(2),
        s: chsh.s.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineReport {
    pub feasible: bool,
    pub residual: f64,
    pub witness: Option<BTreeMap<Behavior, String>>,
    pub certificate: Option<Facet<String>>,
    pub chsh_all_pass: bool,
    pub max_facet_value: String,
    /// Feasibility and the facet criterion give the same answer.
    pub agrees_with_facets: bool,
}

pub fn fine_report(stats: &BehaviorStatistics<Rational>) -> FineReport {
    let out = jp_feasible(stats);
    let criterion = chsh_criterion(&stats.correlations);
    FineReport {
        feasible: out.feasible,
        residual: out.residual,
        witness: out.witness.map(|jp| {
            jp.weights()
                .iter()
                .map(|(b, w)| (*b, w.to_string()))
                .collect()
        }),
        certificate: out.certificate.map(|f| Facet {
            negated: f.negated,
            sign: f.sign,
            value: f.value.to_string(),
        }),
        chsh_all_pass: criterion.all_pass,
        max_facet_value: criterion.max_facet_value.to_string(),
        agrees_with_facets: out.feasible == criterion.all_pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzReport {
    /// `None` for a user-supplied system.
    pub phi: Option<f64>,
    pub include_fifth: bool,
    pub constraints: Vec<String>,
    #[serde(flatten)]
    pub result: SatResult,
}

pub fn ghz_report(phi: f64, include_fifth: bool) -> Result<GhzReport> {
    let system = ghz::ghz_constraint_system(phi, include_fifth)?;
    Ok(GhzReport {
        phi: Some(phi),
        include_fifth,
        ..constraint_report(&system)?
    })
}

/// Report for an arbitrary constraint system.
pub fn constraint_report(system: &[ProductConstraint]) -> Result<GhzReport> {
    let constraints = system
        .iter()
        .map(|c| {
            let lhs: Vec<String> = c
                .factors()
                .iter()
                .map(|(s, a)| format!("{s}({a})"))
                .collect();
            format!("{} = {:+}", lhs.join("·"), c.target().value())
        })
        .collect();
    Ok(GhzReport {
        phi: None,
        include_fifth: false,
        constraints,
        result: ghz::check_satisfiable(system)?,
    })
}
