// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{analyze, extract_spec, AnalyzeOptions, ReportVerdict};
use crate::frontend::{parse_unit, Language};
use crate::oracle::Oracle;
use crate::render::Tokenizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Expectation {
    Holds,
    Counterexample,
}

/// One subject of a benchmark manifest. Paths are relative to the manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchEntry {
    pub file: String,
    /// Language tag; taken from the file extension when absent.
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub pre: Option<String>,
    #[serde(default)]
    pub post: Option<String>,
    pub expected: Expectation,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchResult {
    pub file: String,
    pub expected: Expectation,
    /// `HOLDS`, `COUNTEREXAMPLE` or `INCONCLUSIVE`; absent when the subject
    /// could not be analysed.
    pub verdict: Option<String>,
    pub correct: bool,
    pub queries: usize,
    pub tokens: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub results: Vec<BenchResult>,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let width = self.results.iter().map(|r| r.file.len()).max().unwrap_or(4).max(4);
        let _ = writeln!(out, "{:<width$}  {:<14}  {:<14}  correct", "file", "expected", "verdict");
        for r in &self.results {
            let expected = match r.expected {
                Expectation::Holds => "HOLDS",
                Expectation::Counterexample => "COUNTEREXAMPLE",
            };
            let verdict = r.verdict.as_deref().unwrap_or("error");
            let _ = writeln!(out, "{:<width$}  {expected:<14}  {verdict:<14}  {}", r.file, if r.correct { "yes" } else { "no" });
        }
        let _ = writeln!(out, "\nTotal  Correct  Accuracy");
        let _ = writeln!(out, "{:<5}  {:<7}  {:.1}%", self.total, self.correct, self.accuracy * 100.0);
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("cannot read manifest {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

fn verdict_name(v: &ReportVerdict) -> &'static str {
    match v {
        ReportVerdict::Holds => "HOLDS",
        ReportVerdict::Counterexample { .. } => "COUNTEREXAMPLE",
        ReportVerdict::Inconclusive => "INCONCLUSIVE",
    }
}

/// Analyses every subject; a subject counts as correct only when its
/// verdict equals the expectation, so INCONCLUSIVE and failures count
/// against accuracy.
pub fn run_bench(
    manifest: &Path,
    oracle: &dyn Oracle,
    oracle_label: &str,
    tokenizer: &dyn Tokenizer,
    opts: &AnalyzeOptions,
) -> Result<BenchReport, BenchError> {
    let text = std::fs::read_to_string(manifest).map_err(|source| BenchError::Io { path: manifest.display().to_string(), source })?;
    let entries: Vec<BenchEntry> = serde_json::from_str(&text)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut results = Vec::with_capacity(entries.len());
    for e in entries {
        let outcome = (|| -> Result<(String, usize, usize), String> {
            let path = base.join(&e.file);
            let lang = match &e.language {
                Some(tag) => Language::from_tag(tag),
                None => Language::from_path(&path),
            }
            .map_err(|err| err.to_string())?;
            let bytes = std::fs::read(&path).map_err(|err| format!("{}: {err}", path.display()))?;
            let unit = parse_unit(&bytes, lang, 0).map_err(|err| err.to_string())?;
            let spec = extract_spec(&unit, e.pre.as_deref(), e.post.as_deref(), None).map_err(|err| err.to_string())?;
            let report = analyze(&unit, &spec, oracle, oracle_label, tokenizer, opts).map_err(|err| err.to_string())?;
            Ok((verdict_name(&report.verdict).to_string(), report.totals.queries, report.totals.tokens))
        })();
        let expected_name = match e.expected {
            Expectation::Holds => "HOLDS",
            Expectation::Counterexample => "COUNTEREXAMPLE",
        };
        results.push(match outcome {
            Ok((verdict, queries, tokens)) => BenchResult {
                file: e.file,
                expected: e.expected,
                correct: verdict == expected_name,
                verdict: Some(verdict),
                queries,
                tokens,
                error: None,
            },
            Err(err) => {
                log::error!("{}: {err}", e.file);
                BenchResult { file: e.file, expected: e.expected, verdict: None, correct: false, queries: 0, tokens: 0, error: Some(err) }
            }
        });
    }
    let total = results.len();
    let correct = results.iter().filter(|r| r.correct).count();
    let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
    Ok(BenchReport { results, total, correct, accuracy })
}
