//! Report assembly: the canonical JSON run report, its flat CSV
//! projection, and the merit-versus-accuracy trace export.

use msts_core::selection::{CandidateRecord, Method, SelectionResult, SelectionTrace, StopReason};
use serde::Serialize;

/// Echo of the run configuration, written back into every report so a
/// result file is self-describing.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub train: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<String>,
    pub method: String,
    pub mode: String,
    pub k: usize,
    pub effective_k: usize,
    pub fold_seed: u64,
    pub window: Option<usize>,
    pub train_fraction: f64,
    pub subsample_seed: u64,
    pub normalize: bool,
    pub cache: String,
    pub out: String,
    pub format: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct MethodReports {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msts: Option<SelectionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wrapper: Option<SelectionResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub methods: MethodReports,
    pub benchmark_accuracy: f64,
    pub n_features: usize,
    /// wall-clock metadata; everything else is deterministic under fixed
    /// seeds, this is not
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Flat projection: one CSV row per executed method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,subset,n_features,stop_reason,cpu_time_seconds,test_accuracy,benchmark_accuracy\n",
        );
        for result in [&self.methods.msts, &self.methods.wrapper].into_iter().flatten() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                method_name(result.method),
                join_subset(&result.subset),
                self.n_features,
                stop_reason_name(result.trace.stop_reason),
                result.cpu_time_seconds,
                result.test_accuracy.map_or(String::new(), |a| a.to_string()),
                self.benchmark_accuracy,
            ));
        }
        out
    }
}

pub fn method_name(method: Method) -> &'static str {
    match method {
        Method::Msts => "msts",
        Method::Wrapper => "wrapper",
    }
}

fn stop_reason_name(reason: StopReason) -> &'static str {
    match reason {
        StopReason::NoPairBeatsSingle => "no pair beats best single",
        StopReason::NoImprovement => "score stopped improving",
        StopReason::AllFeaturesSelected => "all features selected",
    }
}

pub fn join_subset(subset: &[usize]) -> String {
    subset
        .iter()
        .map(|f| f.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

/// Candidate rows for merit-versus-accuracy scatter plots. Singles are the
/// search baseline, not candidate subsets, so only sizes two and up are
/// emitted; the per-size step winner carries `selected=true`.
pub fn trace_csv(
    candidates: &[CandidateRecord],
    trace: &SelectionTrace,
    accuracies: &[f64],
) -> String {
    let mut out = String::from("subset,size,merit,cv_accuracy,selected\n");
    for (c, &acc) in candidates.iter().zip(accuracies) {
        if c.subset.len() < 2 {
            continue;
        }
        let selected = trace
            .steps
            .iter()
            .any(|s| s.size == c.subset.len() && s.subset == c.subset);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            join_subset(&c.subset),
            c.subset.len(),
            c.score,
            acc,
            selected,
        ));
    }
    out
}
