// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Verification oracle: a Hoare-triple prompt per slice and a strict
//! PASS/FAIL verdict parsed from the reply.

mod http;
mod mock;

use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::frontend::Language;
use crate::render::RenderedSlice;

pub use http::HttpOracle;
pub use mock::MockOracle;

pub const PASS_MARKER: &str = "VERDICT: PASS";
pub const FAIL_MARKER: &str = "VERDICT: FAIL";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoareSpec {
    /// Pre-condition as code or prose; empty means `true`.
    pub pre: String,
    pub post: String,
    /// Explicit slicing criterion, overriding the variables found in `post`.
    pub post_vars: Option<Vec<String>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("the post-condition is empty")]
pub struct EmptyPostCondition;

impl HoareSpec {
    pub fn new(pre: impl Into<String>, post: impl Into<String>) -> Result<Self, EmptyPostCondition> {
        let post = post.into();
        if post.trim().is_empty() {
            return Err(EmptyPostCondition);
        }
        Ok(HoareSpec { pre: pre.into(), post, post_vars: None })
    }

    pub fn with_post_vars(mut self, vars: Vec<String>) -> Self {
        self.post_vars = Some(vars);
        self
    }
}

/// Stable identity of a rendered slice: SHA-256 of its text, in hex.
pub fn fingerprint(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prompt {
    pub preamble: String,
    pub pre_section: String,
    pub slice_text: String,
    pub language: Language,
    pub post_section: String,
    pub question: String,
    /// Fingerprint of `slice_text`.
    pub slice_id: String,
}

const PREAMBLE: &str = "You are checking whether a program fragment satisfies a specification.
In the fragment, `assume(c)` (written `assume c` in Python) means that only executions where c holds are considered; executions where c is false are discarded.
`assume(0)` (written `assume False` in Python) marks code that is never reached.
Calls to functions whose definitions are not shown may return any value allowed by their types.
Reason step by step, then end your reply with a final line that is exactly `VERDICT: PASS` if the post-condition holds on every considered execution, or exactly `VERDICT: FAIL` otherwise.";

pub fn build_prompt(spec: &HoareSpec, slice: &RenderedSlice) -> Prompt {
    let pre = spec.pre.trim();
    let pre_section = if pre.is_empty() {
        "Pre-condition: assuming true.".to_string()
    } else {
        format!("Pre-condition: assuming {pre}.")
    };
    let post = spec.post.trim();
    Prompt {
        preamble: PREAMBLE.to_string(),
        pre_section,
        slice_text: slice.text.clone(),
        language: slice.language,
        post_section: format!("Post-condition: {post}"),
        question: format!("Question: assuming the pre-condition holds on entry, does the post-condition {post} always hold?"),
        slice_id: fingerprint(&slice.text),
    }
}

impl Prompt {
    /// The part sent as the user message.
    pub fn body(&self) -> String {
        let mut code = self.slice_text.clone();
        if !code.ends_with('\n') {
            code.push('\n');
        }
        format!(
            "{}\n\n```{}\n{}```\n\n{}\n\n{}",
            self.pre_section,
            self.language.fence(),
            code,
            self.post_section,
            self.question
        )
    }

    /// The whole prompt as a single text.
    pub fn text(&self) -> String {
        format!("{}\n\n{}", self.preamble, self.body())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Transport,
    Timeout,
    Unparseable,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u64,
    pub completion: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub slice_id: String,
    pub outcome: Outcome,
    pub raw_response: String,
    pub latency_ms: u64,
    pub token_usage: Option<TokenUsage>,
    pub error_kind: Option<ErrorKind>,
    pub attempts: u32,
}

impl Verdict {
    pub fn latency(&self) -> Duration {
        Duration::from_millis(self.latency_ms)
    }
}

/// Reads the verdict from the last non-blank line, which must be exactly a
/// marker (surrounding whitespace aside). Markers elsewhere do not count.
pub fn parse_verdict(response: &str) -> Option<Outcome> {
    match response.lines().rev().map(str::trim).find(|l| !l.is_empty())? {
        PASS_MARKER => Some(Outcome::Pass),
        FAIL_MARKER => Some(Outcome::Fail),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the API key; `None` sends no credential.
    pub api_key_env: Option<String>,
    pub temperature: f64,
    pub max_retries: u32,
    pub parallelism: usize,
    pub timeout_secs: u64,
    /// Samples per query; above one the majority verdict is taken.
    pub samples: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o-mini".into(),
            api_key_env: Some("SYMSLICE_API_KEY".into()),
            temperature: 0.0,
            max_retries: 2,
            parallelism: 1,
            timeout_secs: 120,
            samples: 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("environment variable {0} holding the API key is not set")]
    MissingCredential(String),
    #[error("invalid oracle configuration: {0}")]
    Config(String),
    #[error("mock oracle has no answer for slice {0}")]
    UnknownFingerprint(String),
    #[error("invalid mock script: {0}")]
    Script(String),
}

/// A source of verdicts. Implementations must be safe to call from several
/// threads at once.
pub trait Oracle: Send + Sync {
    /// Transport and parse problems are reported as an `Error` verdict; an
    /// `Err` means the oracle itself is unusable.
    fn query(&self, prompt: &Prompt) -> Result<Verdict, OracleError>;
}
