use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use biasnet_core::negotiation::{
    AgentView, Intent, LlmAdapter, LlmConfig, Policy, PolicyHooks, Proposal, ScriptedPolicy, Session,
};
use biasnet_core::{ScenarioConfig, SliceId, TwinState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Serves one request with `reply` and hands back the request body.
fn stub(reply: &'static str) -> (String, mpsc::Receiver<serde_json::Value>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/negotiate", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0usize;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if line == "\r\n" || line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        let _ = tx.send(serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null));
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            reply.len(),
            reply
        )
        .unwrap();
    });
    (url, rx)
}

fn fixture(cfg: &ScenarioConfig) -> (Session<'_>, Proposal) {
    let s = Session::new(cfg, TwinState::from_config(cfg, 7.0), &mut ChaCha8Rng::seed_from_u64(5));
    let standing = [(SliceId::Urllc, 9.0), (SliceId::Embb, 22.0)].into_iter().collect();
    (s, standing)
}

fn step(url: &str, s: &Session<'_>, standing: &Proposal) -> biasnet_core::negotiation::NegotiationMessage {
    let cfg = s.cfg;
    let mut config = LlmConfig::new(url);
    config.timeout = Duration::from_secs(2);
    let mut adapter = LlmAdapter::new(config, ScriptedPolicy::new(SliceId::Urllc, PolicyHooks::from_config(cfg)));
    let view = AgentView {
        session: s,
        agent: SliceId::Urllc,
        round: 3,
        max_rounds: 8,
        standing,
        own_anchor: 9.0,
        retrievals: &[],
        transcript: &[],
    };
    adapter.step(&view).unwrap()
}

#[test]
fn well_formed_reply_becomes_a_proposal() {
    let cfg = ScenarioConfig::uc1_default();
    let (s, standing) = fixture(&cfg);
    let (url, rx) = stub(r#"{"proposal_mhz": 9.2, "reason": "small margin over the minimum"}"#);
    let msg = step(&url, &s, &standing);
    assert_eq!(msg.intent, Intent::Propose);
    assert_eq!(msg.proposal[&SliceId::Urllc], 9.2);
    assert_eq!(msg.proposal[&SliceId::Embb], 22.0);
    assert_eq!(msg.reason, "small margin over the minimum");
    let body = rx.recv_timeout(Duration::from_secs(5)).unwrap();
    assert_eq!(body["slice_id"], "urllc");
    assert_eq!(body["negotiation_stage"], "Counter Proposal");
    assert!(body["min_bw_for_sla_mhz"].as_str().unwrap().parse::<f64>().unwrap() > 8.0);
    assert_eq!(body["dt_context"]["eta_bits_per_hz"], 7.0);
    assert_eq!(body["standing_proposal"]["embb"], 22.0);
}

#[test]
fn out_of_range_reply_falls_back() {
    let cfg = ScenarioConfig::uc1_default();
    let (s, standing) = fixture(&cfg);
    let (url, _rx) = stub(r#"{"proposal_mhz": 60.0, "reason": "take it all"}"#);
    let msg = step(&url, &s, &standing);
    assert!(msg.reason.starts_with("fallback"), "{}", msg.reason);
    assert_ne!(msg.proposal[&SliceId::Urllc], 60.0);
}

#[test]
fn malformed_reply_falls_back() {
    let cfg = ScenarioConfig::uc1_default();
    let (s, standing) = fixture(&cfg);
    let (url, _rx) = stub(r#"{"bandwidth": "lots"}"#);
    assert!(step(&url, &s, &standing).reason.starts_with("fallback"));
}

#[test]
fn unreachable_endpoint_falls_back() {
    let cfg = ScenarioConfig::uc1_default();
    let (s, standing) = fixture(&cfg);
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let msg = step(&format!("http://127.0.0.1:{port}/"), &s, &standing);
    assert!(msg.reason.starts_with("fallback"));
    let mut scripted = ScriptedPolicy::new(SliceId::Urllc, PolicyHooks::from_config(&cfg));
    let view = AgentView {
        session: &s,
        agent: SliceId::Urllc,
        round: 3,
        max_rounds: 8,
        standing: &standing,
        own_anchor: 9.0,
        retrievals: &[],
        transcript: &[],
    };
    let plain = scripted.step(&view).unwrap();
    assert_eq!(msg.intent, plain.intent);
    assert_eq!(msg.proposal, plain.proposal);
}
