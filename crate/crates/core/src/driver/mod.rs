// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! End to end: partitions, slices, size order, oracle queries, report.

mod bench;
mod criterion;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::cfg::{build_cfg_for, default_target, Cfg};
use crate::frontend::{extract_annotations, AnnotationError, Language, NodeKind, SourceUnit};
use crate::oracle::{build_prompt, fingerprint, ErrorKind, HoareSpec, Oracle, OracleError, Outcome, Verdict};
use crate::partition::{gen_partitions, PartitionLimits};
use crate::render::{render_slice_with, RenderError, RenderOptions, RenderedSlice, Tokenizer};
use crate::slice::{back_slice, truncate, SliceCriterion};

pub use bench::{run_bench, BenchEntry, BenchError, BenchReport, BenchResult, Expectation};
pub use criterion::{derive_criterion, CriterionInfo, CriterionSource};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("no post-condition: pass --post or mark one in the file")]
    NoPostCondition,
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error("no function named `{0}`")]
    UnknownFunction(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Builds the triple from in-file markers and command-line text. A given
/// post-condition replaces the marked one; a given pre-condition is added
/// to the marked ones.
pub fn extract_spec(
    unit: &SourceUnit,
    pre: Option<&str>,
    post: Option<&str>,
    post_vars: Option<Vec<String>>,
) -> Result<HoareSpec, DriverError> {
    let ann = extract_annotations(unit)?;
    let pre = match (ann.pre_condition(), pre.map(str::trim).filter(|p| !p.is_empty())) {
        (Some(a), Some(b)) => format!("({a}) and ({b})"),
        (Some(a), None) => a,
        (None, Some(b)) => b.to_string(),
        (None, None) => String::new(),
    };
    let post = post.map(str::to_string).or_else(|| ann.post_condition().map(str::to_string)).unwrap_or_default();
    let spec = HoareSpec::new(pre, post).map_err(|_| DriverError::NoPostCondition)?;
    Ok(match post_vars {
        Some(v) => spec.with_post_vars(v),
        None => spec,
    })
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub limits: PartitionLimits,
    /// Queries in flight at once.
    pub parallelism: usize,
    /// Query every slice instead of stopping at the first FAIL.
    pub exhaustive: bool,
    /// Function to analyse; the last one in the file by default.
    pub function: Option<String>,
    pub render: RenderOptions,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            limits: PartitionLimits::default(),
            parallelism: 1,
            exhaustive: false,
            function: None,
            render: RenderOptions::default(),
        }
    }
}

pub fn target_cfg(unit: &SourceUnit, function: Option<&str>) -> Result<Cfg, DriverError> {
    let target = match function {
        None => default_target(unit),
        Some(name) => unit
            .functions()
            .into_iter()
            .rev()
            .find(|f| f.kind == NodeKind::FunctionDef && f.name_hint.as_deref() == Some(name))
            .ok_or_else(|| DriverError::UnknownFunction(name.to_string()))?,
    };
    Ok(build_cfg_for(unit, target))
}

#[derive(Clone, Debug, Serialize)]
pub struct PlannedSlice {
    /// Position in query order.
    pub rank: usize,
    /// Partition that produced the slice first.
    pub partition: usize,
    /// Later partitions whose slices rendered to the same text.
    pub duplicates: Vec<usize>,
    pub fingerprint: String,
    #[serde(skip)]
    pub rendered: RenderedSlice,
}

/// Slices in query order, before any oracle is involved.
#[derive(Clone, Debug, Serialize)]
pub struct SlicePlan {
    pub function: Option<String>,
    pub language: Language,
    pub criterion: CriterionInfo,
    pub partitions: usize,
    pub partitions_truncated: bool,
    pub vacuous: usize,
    pub duplicates: usize,
    pub slices: Vec<PlannedSlice>,
}

pub fn plan_slices(
    unit: &SourceUnit,
    spec: &HoareSpec,
    tokenizer: &dyn Tokenizer,
    opts: &AnalyzeOptions,
) -> Result<SlicePlan, DriverError> {
    let cfg = target_cfg(unit, opts.function.as_deref())?;
    let criterion = derive_criterion(spec, unit, &cfg);
    let mut slicing = SliceCriterion::vars(criterion.vars.iter().cloned());
    let ann = extract_annotations(unit)?;
    for m in ann.pre.iter().chain(&ann.post) {
        if let Some(r) = m.statement {
            slicing.anchors.extend(cfg.node_for_range(r));
        }
    }
    let parts = gen_partitions(&cfg, opts.limits);
    if parts.truncated {
        log::warn!("partition search stopped at {} partitions; results cover only those", parts.partitions.len());
    }
    let mut slices: Vec<PlannedSlice> = Vec::new();
    let mut by_text: HashMap<String, usize> = HashMap::new();
    let mut vacuous = 0;
    let mut duplicates = 0;
    for p in &parts.partitions {
        let s = back_slice(&truncate(&cfg, p), &cfg, &slicing);
        if s.is_vacuous() {
            log::info!("partition {}: body reduces to assume(0), skipped", p.id);
            vacuous += 1;
            continue;
        }
        let rendered = render_slice_with(&s, &cfg, unit, tokenizer, opts.render)?;
        if let Some(&k) = by_text.get(&rendered.text) {
            slices[k].duplicates.push(p.id);
            duplicates += 1;
            continue;
        }
        by_text.insert(rendered.text.clone(), slices.len());
        slices.push(PlannedSlice { rank: 0, partition: p.id, duplicates: Vec::new(), fingerprint: fingerprint(&rendered.text), rendered });
    }
    // Smallest first; ties keep discovery order.
    slices.sort_by_key(|s| (s.rendered.token_count, s.rendered.stmt_count, s.partition));
    for (rank, s) in slices.iter_mut().enumerate() {
        s.rank = rank;
    }
    Ok(SlicePlan {
        function: cfg.function.clone(),
        language: unit.language,
        criterion,
        partitions: parts.partitions.len(),
        partitions_truncated: parts.truncated,
        vacuous,
        duplicates,
        slices,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReportVerdict {
    Holds,
    Counterexample { rank: usize, partition: usize, fingerprint: String },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceRecord {
    pub rank: usize,
    pub partition: usize,
    pub fingerprint: String,
    pub stmt_count: usize,
    pub token_count: usize,
    /// `None` when the slice was never asked about.
    pub outcome: Option<Outcome>,
    pub latency_ms: Option<u64>,
    pub error_kind: Option<ErrorKind>,
    pub attempts: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub text: String,
    pub response: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub partitions: usize,
    pub vacuous: usize,
    pub duplicates: usize,
    pub slices: usize,
    pub queries: usize,
    /// Sum of the listed slices' token counts.
    pub tokens: usize,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub language: Language,
    pub function: Option<String>,
    pub pre: String,
    pub post: String,
    pub oracle: String,
    pub tokenizer: String,
    pub max_partitions: usize,
    pub parallelism: usize,
    pub exhaustive: bool,
    pub partitions_truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub verdict: ReportVerdict,
    pub counterexample: Option<Counterexample>,
    pub criterion: CriterionInfo,
    pub per_slice: Vec<SliceRecord>,
    pub totals: Totals,
    pub config: ConfigEcho,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("inconsistent report: {0}")]
pub struct ReportInconsistency(pub String);

impl AnalysisReport {
    /// Checks the verdict against the per-slice outcomes and the totals.
    pub fn check(&self) -> Result<(), ReportInconsistency> {
        let bad = |m: &str| Err(ReportInconsistency(m.to_string()));
        let outcomes: Vec<Outcome> = self.per_slice.iter().filter_map(|r| r.outcome).collect();
        let first_fail = self.per_slice.iter().find(|r| r.outcome == Some(Outcome::Fail));
        match &self.verdict {
            ReportVerdict::Holds if outcomes.iter().any(|o| *o != Outcome::Pass) => return bad("HOLDS with a non-PASS answer"),
            ReportVerdict::Holds if outcomes.len() != self.per_slice.len() => return bad("HOLDS with unasked slices"),
            ReportVerdict::Counterexample { rank, .. } if first_fail.map(|r| r.rank) != Some(*rank) => {
                return bad("counterexample is not the first FAIL in size order")
            }
            ReportVerdict::Inconclusive if first_fail.is_some() || !outcomes.contains(&Outcome::Error) => {
                return bad("INCONCLUSIVE needs an ERROR and no FAIL")
            }
            _ => {}
        }
        if self.per_slice.windows(2).any(|w| w[0].token_count > w[1].token_count) {
            return bad("slices out of size order");
        }
        if self.totals.tokens != self.per_slice.iter().map(|r| r.token_count).sum::<usize>() {
            return bad("token total");
        }
        if self.totals.queries != outcomes.len() || self.totals.slices != self.per_slice.len() {
            return bad("query or slice total");
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Asks `oracle` about each slice in size order, `parallelism` at a time,
/// and stops issuing queries once a FAIL is known (unless exhaustive).
fn query_in_order(
    plan: &SlicePlan,
    spec: &HoareSpec,
    oracle: &dyn Oracle,
    opts: &AnalyzeOptions,
) -> Result<Vec<Option<Verdict>>, OracleError> {
    let n = plan.slices.len();
    let next = AtomicUsize::new(0);
    let lowest_fail = AtomicUsize::new(usize::MAX);
    let results: Mutex<Vec<Option<Verdict>>> = Mutex::new(vec![None; n]);
    let failure: Mutex<Option<OracleError>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..opts.parallelism.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n || (!opts.exhaustive && lowest_fail.load(Ordering::SeqCst) < i) {
                    break;
                }
                if failure.lock().unwrap_or_else(|e| e.into_inner()).is_some() {
                    break;
                }
                let prompt = build_prompt(spec, &plan.slices[i].rendered);
                match oracle.query(&prompt) {
                    Ok(v) => {
                        if v.outcome == Outcome::Fail {
                            lowest_fail.fetch_min(i, Ordering::SeqCst);
                        }
                        results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(v);
                    }
                    Err(e) => {
                        failure.lock().unwrap_or_else(|e| e.into_inner()).get_or_insert(e);
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap_or_else(|e| e.into_inner()) {
        return Err(e);
    }
    Ok(results.into_inner().unwrap_or_else(|e| e.into_inner()))
}

pub fn analyze(
    unit: &SourceUnit,
    spec: &HoareSpec,
    oracle: &dyn Oracle,
    oracle_label: &str,
    tokenizer: &dyn Tokenizer,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport, DriverError> {
    let plan = plan_slices(unit, spec, tokenizer, opts)?;
    analyze_plan(&plan, spec, oracle, oracle_label, tokenizer.name(), opts)
}

pub fn analyze_plan(
    plan: &SlicePlan,
    spec: &HoareSpec,
    oracle: &dyn Oracle,
    oracle_label: &str,
    tokenizer_name: &str,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport, DriverError> {
    let verdicts = query_in_order(plan, spec, oracle, opts)?;
    let mut per_slice = Vec::with_capacity(plan.slices.len());
    let mut totals = Totals {
        partitions: plan.partitions,
        vacuous: plan.vacuous,
        duplicates: plan.duplicates,
        slices: plan.slices.len(),
        ..Default::default()
    };
    for (s, v) in plan.slices.iter().zip(&verdicts) {
        totals.tokens += s.rendered.token_count;
        if let Some(v) = v {
            totals.queries += 1;
            if let Some(u) = v.token_usage {
                totals.prompt_tokens += u.prompt;
                totals.completion_tokens += u.completion;
            }
        }
        per_slice.push(SliceRecord {
            rank: s.rank,
            partition: s.partition,
            fingerprint: s.fingerprint.clone(),
            stmt_count: s.rendered.stmt_count,
            token_count: s.rendered.token_count,
            outcome: v.as_ref().map(|v| v.outcome),
            latency_ms: v.as_ref().map(|v| v.latency_ms),
            error_kind: v.as_ref().and_then(|v| v.error_kind),
            attempts: v.as_ref().map(|v| v.attempts),
        });
    }
    let first_fail = verdicts.iter().position(|v| v.as_ref().is_some_and(|v| v.outcome == Outcome::Fail));
    let (verdict, counterexample) = match first_fail {
        Some(i) => {
            let s = &plan.slices[i];
            (
                ReportVerdict::Counterexample { rank: s.rank, partition: s.partition, fingerprint: s.fingerprint.clone() },
                Some(Counterexample {
                    text: s.rendered.text.clone(),
                    response: verdicts[i].as_ref().map(|v| v.raw_response.clone()).unwrap_or_default(),
                }),
            )
        }
        None if verdicts.iter().flatten().any(|v| v.outcome == Outcome::Error) => (ReportVerdict::Inconclusive, None),
        None => (ReportVerdict::Holds, None),
    };
    let report = AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        verdict,
        counterexample,
        criterion: plan.criterion.clone(),
        per_slice,
        totals,
        config: ConfigEcho {
            language: plan.language,
            function: plan.function.clone(),
            pre: spec.pre.clone(),
            post: spec.post.clone(),
            oracle: oracle_label.to_string(),
            tokenizer: tokenizer_name.to_string(),
            max_partitions: opts.limits.max_partitions,
            parallelism: opts.parallelism,
            exhaustive: opts.exhaustive,
            partitions_truncated: plan.partitions_truncated,
        },
    };
    debug_assert_eq!(report.check(), Ok(()));
    Ok(report)
}
