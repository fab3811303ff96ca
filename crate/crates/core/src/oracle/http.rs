// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{parse_verdict, ErrorKind, Oracle, OracleConfig, OracleError, Outcome, Prompt, TokenUsage, Verdict};

/// Client for a chat-completions style endpoint.
pub struct HttpOracle {
    config: OracleConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

struct Reply {
    text: String,
    usage: Option<TokenUsage>,
}

impl HttpOracle {
    /// Reads the API key from the configured environment variable.
    pub fn new(config: OracleConfig) -> Result<Self, OracleError> {
        if config.endpoint.trim().is_empty() {
            return Err(OracleError::Config("no endpoint".into()));
        }
        if config.samples == 0 || config.parallelism == 0 {
            return Err(OracleError::Config("samples and parallelism must be at least 1".into()));
        }
        if !(0.0..=2.0).contains(&config.temperature) {
            return Err(OracleError::Config(format!("temperature {} out of range", config.temperature)));
        }
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| OracleError::MissingCredential(var.clone()))?),
            None => None,
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpOracle { config, api_key, agent })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    fn send(&self, prompt: &Prompt) -> Result<Reply, (ErrorKind, String)> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": prompt.preamble},
                {"role": "user", "content": prompt.body()},
            ],
        });
        let mut req = self.agent.post(&self.config.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(_) => (ErrorKind::Timeout, e.to_string()),
            _ => (ErrorKind::Transport, e.to_string()),
        })?;
        let status = resp.status();
        let text = resp.body_mut().read_to_string().map_err(|e| (ErrorKind::Transport, e.to_string()))?;
        if !status.is_success() {
            return Err((ErrorKind::Transport, format!("HTTP {status}: {text}")));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| (ErrorKind::Unparseable, format!("{e}: {text}")))?;
        let content = v["choices"][0]["message"]["content"].as_str().ok_or_else(|| (ErrorKind::Unparseable, text.clone()))?;
        let usage = v.get("usage").map(|u| TokenUsage {
            prompt: u["prompt_tokens"].as_u64().unwrap_or(0),
            completion: u["completion_tokens"].as_u64().unwrap_or(0),
        });
        Ok(Reply { text: content.to_string(), usage })
    }

    /// One verdict, retrying on transport failures and missing markers.
    fn query_once(&self, prompt: &Prompt) -> Verdict {
        let start = Instant::now();
        let mut last = (ErrorKind::Transport, String::new());
        let mut attempts = 0;
        for attempt in 0..=self.config.max_retries {
            attempts = attempt + 1;
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(250 << attempt.min(4)));
            }
            match self.send(prompt) {
                Ok(reply) => match parse_verdict(&reply.text) {
                    Some(outcome) => {
                        return Verdict {
                            slice_id: prompt.slice_id.clone(),
                            outcome,
                            raw_response: reply.text,
                            latency_ms: start.elapsed().as_millis() as u64,
                            token_usage: reply.usage,
                            error_kind: None,
                            attempts,
                        }
                    }
                    None => {
                        log::warn!("slice {}: reply has no verdict line (attempt {attempts})", &prompt.slice_id[..12]);
                        last = (ErrorKind::Unparseable, reply.text);
                    }
                },
                Err(e) => {
                    log::warn!("slice {}: {} (attempt {attempts})", &prompt.slice_id[..12], e.1);
                    last = e;
                }
            }
        }
        Verdict {
            slice_id: prompt.slice_id.clone(),
            outcome: Outcome::Error,
            raw_response: last.1,
            latency_ms: start.elapsed().as_millis() as u64,
            token_usage: None,
            error_kind: Some(last.0),
            attempts,
        }
    }
}

impl Oracle for HttpOracle {
    fn query(&self, prompt: &Prompt) -> Result<Verdict, OracleError> {
        if self.config.samples == 1 {
            return Ok(self.query_once(prompt));
        }
        let runs: Vec<Verdict> = (0..self.config.samples).map(|_| self.query_once(prompt)).collect();
        Ok(majority(runs))
    }
}

/// Strict majority of PASS/FAIL among samples, otherwise ERROR.
fn majority(runs: Vec<Verdict>) -> Verdict {
    let count = |o| runs.iter().filter(|v| v.outcome == o).count();
    let (pass, fail) = (count(Outcome::Pass), count(Outcome::Fail));
    let outcome = if pass * 2 > runs.len() {
        Outcome::Pass
    } else if fail * 2 > runs.len() {
        Outcome::Fail
    } else {
        Outcome::Error
    };
    let usage = runs.iter().filter_map(|v| v.token_usage).fold(None, |acc: Option<TokenUsage>, u| {
        let a = acc.unwrap_or_default();
        Some(TokenUsage { prompt: a.prompt + u.prompt, completion: a.completion + u.completion })
    });
    Verdict {
        slice_id: runs[0].slice_id.clone(),
        outcome,
        raw_response: runs.iter().map(|v| v.raw_response.as_str()).collect::<Vec<_>>().join("\n-----\n"),
        latency_ms: runs.iter().map(|v| v.latency_ms).sum(),
        token_usage: usage,
        error_kind: (outcome == Outcome::Error).then_some(ErrorKind::Unparseable),
        attempts: runs.iter().map(|v| v.attempts).sum(),
    }
}
