// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use proptest::prelude::*;
use symslice::cfg::build_cfg;
use symslice::frontend::{parse_unit, Language};
use symslice::oracle::*;
use symslice::partition::{gen_partitions, PartitionLimits};
use symslice::render::{render_slice, RenderedSlice, SimpleTokenizer};
use symslice::slice::truncate;

const BRANCHES: &str = "if (x > y) {\n  z := x + 2\n} else {\n  z := x * y\n}\n";

fn rendered() -> Vec<RenderedSlice> {
    let u = parse_unit(BRANCHES.as_bytes(), Language::Mini, 0).unwrap();
    let cfg = build_cfg(&u);
    gen_partitions(&cfg, PartitionLimits::default())
        .partitions
        .iter()
        .map(|p| render_slice(&truncate(&cfg, p), &cfg, &u, &SimpleTokenizer).unwrap())
        .collect()
}

fn else_slice() -> RenderedSlice {
    rendered().into_iter().find(|r| r.text.contains("x * y")).unwrap()
}

#[test]
fn prompt_sections_come_in_order() {
    let s = else_slice();
    assert_eq!(s.text, "assume(!(x > y))\nz := x * y\n");
    let spec = HoareSpec::new("", "z > y").unwrap();
    let p = build_prompt(&spec, &s);
    assert!(p.question.contains("does the post-condition z > y always hold?"));
    assert_eq!(p.pre_section, "Pre-condition: assuming true.");
    let text = p.text();
    let at = |needle: &str| text.find(needle).unwrap_or_else(|| panic!("{needle} missing from\n{text}"));
    let order = [at("assume(0)"), at(PASS_MARKER), at("assuming true"), at("```\nassume(!(x > y))"), at("Post-condition: z > y"), at("Question:")];
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");
    assert_eq!(p.slice_id, fingerprint(&s.text));
}

#[test]
fn prompt_is_deterministic() {
    let s = else_slice();
    let spec = HoareSpec::new("x >= 0", "z > y").unwrap();
    let a = build_prompt(&spec, &s);
    let b = build_prompt(&spec, &s);
    assert_eq!(a.text(), b.text());
    assert!(a.pre_section.contains("assuming x >= 0"));
}

#[test]
fn python_slices_are_fenced_as_python() {
    let src = "def f(a):\n    b = a + 1\n    return b\n";
    let u = parse_unit(src.as_bytes(), Language::Python, 0).unwrap();
    let cfg = build_cfg(&u);
    let p = &gen_partitions(&cfg, PartitionLimits::default()).partitions[0];
    let r = render_slice(&truncate(&cfg, p), &cfg, &u, &SimpleTokenizer).unwrap();
    let prompt = build_prompt(&HoareSpec::new("", "b > a").unwrap(), &r);
    assert!(prompt.body().contains("```python\ndef f(a):"));
}

#[test]
fn empty_post_condition_is_rejected() {
    assert_eq!(HoareSpec::new("true", "  "), Err(EmptyPostCondition));
}

#[test]
fn verdict_comes_from_the_last_line_only() {
    assert_eq!(parse_verdict("looks fine\nVERDICT: PASS"), Some(Outcome::Pass));
    assert_eq!(parse_verdict("VERDICT: FAIL  \n\n"), Some(Outcome::Fail));
    assert_eq!(parse_verdict("VERDICT: FAIL\nbut actually VERDICT: PASS"), None);
    assert_eq!(parse_verdict("verdict: pass"), None);
    assert_eq!(parse_verdict("**VERDICT: PASS**"), None);
    assert_eq!(parse_verdict(""), None);
}

proptest! {
    /// Prose mentioning either token never decides the verdict; only an
    /// exact final marker line does.
    #[test]
    fn verdict_parser_ignores_prose(
        lines in prop::collection::vec(
            prop_oneof![
                "[a-zA-Z :]{0,30}",
                Just("VERDICT: PASS is what I'd say".to_string()),
                Just("not VERDICT: FAIL".to_string()),
                Just("PASS".to_string()),
                Just("FAIL".to_string()),
                Just("VERDICT:PASS".to_string()),
                Just("Verdict: FAIL".to_string()),
            ],
            0..8,
        ),
        tail in prop_oneof![Just(None), Just(Some(Outcome::Pass)), Just(Some(Outcome::Fail))],
    ) {
        let mut text = lines.join("\n");
        match tail {
            Some(Outcome::Pass) => text.push_str(&format!("\n{PASS_MARKER}\n")),
            Some(Outcome::Fail) => text.push_str(&format!("\n  {FAIL_MARKER}")),
            _ => {}
        }
        prop_assert_eq!(parse_verdict(&text), tail);
    }
}

#[test]
fn mock_answers_from_its_script() {
    let s = else_slice();
    let p = build_prompt(&HoareSpec::new("", "z > y").unwrap(), &s);
    let mock = MockOracle::new(HashMap::from([(p.slice_id.clone(), Outcome::Fail)]));
    let v = mock.query(&p).unwrap();
    assert_eq!(v.outcome, Outcome::Fail);
    assert_eq!(v.slice_id, p.slice_id);
    assert_eq!(mock.calls(), std::slice::from_ref(&p.slice_id));

    let json = format!("{{\"{}\": \"ERROR\"}}", p.slice_id);
    let v = MockOracle::from_json(&json).unwrap().query(&p).unwrap();
    assert_eq!((v.outcome, v.error_kind), (Outcome::Error, Some(ErrorKind::Unparseable)));
}

#[test]
fn mock_without_an_answer_fails_hard() {
    let p = build_prompt(&HoareSpec::new("", "z > y").unwrap(), &else_slice());
    let err = MockOracle::default().query(&p).unwrap_err();
    assert!(matches!(err, OracleError::UnknownFingerprint(ref f) if *f == p.slice_id));
    assert!(MockOracle::from_json("[1, 2]").is_err());
}

/// Serves one canned chat-completions reply per connection and records the
/// requests it saw.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in replies {
            let Ok((mut stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            head.push_str(&String::from_utf8_lossy(&buf));
            log.lock().unwrap().push(head);
            let resp = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(resp.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

fn completion(content: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 120, "completion_tokens": 30},
    })
    .to_string()
}

fn http_config(endpoint: String, key_env: Option<&str>, retries: u32) -> OracleConfig {
    OracleConfig {
        endpoint,
        model: "test-model".into(),
        api_key_env: key_env.map(String::from),
        max_retries: retries,
        timeout_secs: 10,
        ..Default::default()
    }
}

#[test]
fn http_oracle_sends_a_chat_request() {
    std::env::set_var("SYMSLICE_TEST_KEY_A", "sk-test");
    let (url, seen) = serve(vec![(200, completion("x = 1 gives z = y.\nVERDICT: FAIL"))]);
    let oracle = HttpOracle::new(http_config(url, Some("SYMSLICE_TEST_KEY_A"), 0)).unwrap();
    let p = build_prompt(&HoareSpec::new("", "z > y").unwrap(), &else_slice());
    let v = oracle.query(&p).unwrap();
    assert_eq!(v.outcome, Outcome::Fail);
    assert_eq!(v.token_usage, Some(TokenUsage { prompt: 120, completion: 30 }));
    assert_eq!(v.attempts, 1);
    let req = seen.lock().unwrap()[0].clone();
    assert!(req.starts_with("POST /v1/chat/completions"));
    assert!(req.to_ascii_lowercase().contains("authorization: bearer sk-test"));
    let body: serde_json::Value = serde_json::from_str(&req[req.find("\r\n\r\n").unwrap() + 4..]).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["messages"][1]["content"], p.body());
}

#[test]
fn http_oracle_retries_until_a_verdict_appears() {
    let (url, seen) = serve(vec![(500, "busy".into()), (200, completion("no idea")), (200, completion("VERDICT: PASS"))]);
    let oracle = HttpOracle::new(http_config(url, None, 2)).unwrap();
    let p = build_prompt(&HoareSpec::new("", "z > y").unwrap(), &else_slice());
    let v = oracle.query(&p).unwrap();
    assert_eq!((v.outcome, v.attempts), (Outcome::Pass, 3));
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn http_oracle_gives_up_with_the_raw_reply() {
    let (url, _) = serve(vec![(200, completion("I think it holds.")), (200, completion("Probably PASS."))]);
    let oracle = HttpOracle::new(http_config(url, None, 1)).unwrap();
    let p = build_prompt(&HoareSpec::new("", "z > y").unwrap(), &else_slice());
    let v = oracle.query(&p).unwrap();
    assert_eq!((v.outcome, v.error_kind, v.attempts), (Outcome::Error, Some(ErrorKind::Unparseable), 2));
    assert_eq!(v.raw_response, "Probably PASS.");
}

#[test]
fn http_oracle_reports_transport_failure() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let oracle = HttpOracle::new(http_config(format!("http://127.0.0.1:{port}/v1"), None, 0)).unwrap();
    let p = build_prompt(&HoareSpec::new("", "z > y").unwrap(), &else_slice());
    let v = oracle.query(&p).unwrap();
    assert_eq!((v.outcome, v.error_kind), (Outcome::Error, Some(ErrorKind::Transport)));
}

#[test]
fn best_of_three_takes_the_majority() {
    let (url, _) =
        serve(vec![(200, completion("VERDICT: FAIL")), (200, completion("VERDICT: PASS")), (200, completion("VERDICT: FAIL"))]);
    let oracle = HttpOracle::new(OracleConfig { samples: 3, ..http_config(url, None, 0) }).unwrap();
    let p = build_prompt(&HoareSpec::new("", "z > y").unwrap(), &else_slice());
    let v = oracle.query(&p).unwrap();
    assert_eq!((v.outcome, v.attempts), (Outcome::Fail, 3));
    assert_eq!(v.token_usage, Some(TokenUsage { prompt: 360, completion: 90 }));
}

#[test]
fn missing_credential_is_a_configuration_error() {
    let cfg = http_config("http://127.0.0.1:9/v1".into(), Some("SYMSLICE_TEST_KEY_UNSET"), 0);
    assert!(matches!(HttpOracle::new(cfg), Err(OracleError::MissingCredential(v)) if v == "SYMSLICE_TEST_KEY_UNSET"));
    assert!(HttpOracle::new(OracleConfig { parallelism: 0, ..http_config("http://x".into(), None, 0) }).is_err());
}

#[test]
fn config_defaults() {
    let c = OracleConfig::default();
    assert_eq!((c.temperature, c.samples, c.parallelism), (0.0, 1, 1));
    let parsed: OracleConfig = serde_json::from_str(r#"{"model": "m", "max_retries": 0}"#).unwrap();
    assert_eq!((parsed.model.as_str(), parsed.max_retries, parsed.temperature), ("m", 0, 0.0));
    assert!(serde_json::from_str::<OracleConfig>(r#"{"api_key": "sk"}"#).is_err());
}
