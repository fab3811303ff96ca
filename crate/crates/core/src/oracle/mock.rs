// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::{parse_verdict, ErrorKind, Oracle, OracleError, Outcome, Prompt, Verdict, FAIL_MARKER, PASS_MARKER};

/// Scripted oracle keyed by slice fingerprint. It never invents an answer:
/// an unscripted slice is an error.
#[derive(Debug, Default)]
pub struct MockOracle {
    script: HashMap<String, Outcome>,
    delay: Duration,
    calls: Mutex<Vec<String>>,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

impl MockOracle {
    pub fn new(script: HashMap<String, Outcome>) -> Self {
        MockOracle { script, ..Default::default() }
    }

    /// Parses a JSON object mapping fingerprints to `"PASS"`, `"FAIL"` or
    /// `"ERROR"`.
    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        let script: HashMap<String, Outcome> = serde_json::from_str(text).map_err(|e| OracleError::Script(e.to_string()))?;
        Ok(Self::new(script))
    }

    /// Holds every answer for `delay`, so overlapping calls can be observed.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    /// Fingerprints in the order they were asked.
    pub fn calls(&self) -> Vec<String> {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Largest number of calls seen in progress at once.
    pub fn peak_in_flight(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

impl Oracle for MockOracle {
    fn query(&self, prompt: &Prompt) -> Result<Verdict, OracleError> {
        let start = Instant::now();
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).push(prompt.slice_id.clone());
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        let outcome = *self.script.get(&prompt.slice_id).ok_or_else(|| OracleError::UnknownFingerprint(prompt.slice_id.clone()))?;
        let raw = match outcome {
            Outcome::Pass => format!("scripted answer\n{PASS_MARKER}"),
            Outcome::Fail => format!("scripted answer\n{FAIL_MARKER}"),
            Outcome::Error => "scripted answer without a verdict".to_string(),
        };
        let parsed = parse_verdict(&raw);
        Ok(Verdict {
            slice_id: prompt.slice_id.clone(),
            outcome: parsed.unwrap_or(Outcome::Error),
            raw_response: raw,
            latency_ms: start.elapsed().as_millis() as u64,
            token_usage: None,
            error_kind: parsed.is_none().then_some(ErrorKind::Unparseable),
            attempts: 1,
        })
    }
}
