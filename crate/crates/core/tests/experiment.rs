use std::collections::BTreeMap;

use biasnet_core::experiment::{
    emit_report, read_json, run_trials, stats, write_csv, write_json, write_plot_script, RunSpec, TrialRecord,
};
use biasnet_core::memory::{MemoryPolicy, NegotiationResult};
use biasnet_core::negotiation::{AnchorStrategy, Intent};
use biasnet_core::ScenarioConfig;
use proptest::prelude::*;

fn uc1(trials: u64, seed: u64, s: AnchorStrategy) -> Vec<TrialRecord> {
    run_trials(&ScenarioConfig::uc1_default(), &RunSpec::new(trials, seed, s, MemoryPolicy::Vanilla))
        .unwrap()
        .records
}

/// UC2 with heavy traffic noise and a tight edge, so some trials fail.
fn harsh_uc2() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::uc2_default();
    cfg.twin.perturbation_sigma = 0.6;
    cfg.capacity.f_max_ghz = 12.0;
    cfg.validated().unwrap()
}

fn csv_bytes(records: &[TrialRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(records, &mut out).unwrap();
    out
}

#[test]
fn single_trial_gives_single_record() {
    let r = uc1(1, 42, AnchorStrategy::Fixed);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].trial_index, 0);
}

#[test]
fn zero_trials_is_rejected() {
    let spec = RunSpec::new(0, 1, AnchorStrategy::Fixed, MemoryPolicy::None);
    assert!(run_trials(&ScenarioConfig::uc1_default(), &spec).is_err());
}

#[test]
fn same_seed_same_records() {
    let a = uc1(12, 9, AnchorStrategy::Randomized);
    let b = uc1(12, 9, AnchorStrategy::Randomized);
    assert_eq!(a, b);
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    assert_ne!(a, uc1(12, 10, AnchorStrategy::Randomized));
}

#[test]
fn two_records_make_three_csv_lines() {
    let r = uc1(2, 3, AnchorStrategy::Fixed);
    let text = String::from_utf8(csv_bytes(&r)).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("csv_version,trial_index,scenario,"));
}

#[test]
fn json_round_trips() {
    let cfg = ScenarioConfig::uc2_default();
    let r = run_trials(&cfg, &RunSpec::new(6, 5, AnchorStrategy::Fixed, MemoryPolicy::Unbiased))
        .unwrap()
        .records;
    let mut buf = Vec::new();
    write_json(&r, &mut buf).unwrap();
    assert_eq!(read_json(buf.as_slice()).unwrap(), r);
}

#[test]
fn plot_script_is_reproducible() {
    let render = || {
        let mut out = Vec::new();
        write_plot_script(&mut out, "trials.csv", "retrievals.csv").unwrap();
        out
    };
    let script = String::from_utf8(render()).unwrap();
    assert_eq!(script.as_bytes(), render().as_slice());
    for column in ["latency_ms", "energy_saving_pct", "_distance", "\"age\"", "trials.csv"] {
        assert!(script.contains(column), "{column}");
    }
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let r = uc1(3, 1, AnchorStrategy::Fixed);
    let files = emit_report(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    for f in files {
        assert!(std::fs::metadata(f).unwrap().len() > 0);
    }
    let missing = dir.path().join("a").join("file-not-dir");
    std::fs::write(dir.path().join("a"), b"x").unwrap();
    assert!(emit_report(&r, &missing).is_err());
}

#[test]
fn distances_match_transcripts() {
    for strategy in [AnchorStrategy::Fixed, AnchorStrategy::Randomized] {
        let run = run_trials(
            &ScenarioConfig::uc1_default(),
            &RunSpec::new(25, 11, strategy, MemoryPolicy::Vanilla),
        )
        .unwrap();
        for (rec, out) in run.records.iter().zip(&run.outcomes) {
            let opening = &out.transcript[0];
            assert_eq!(opening.intent, Intent::Propose);
            let commit = out.transcript.iter().find(|m| m.intent == Intent::Commit);
            match commit {
                None => assert!(rec.distance_from_anchor.is_empty()),
                Some(c) => {
                    let expected: BTreeMap<_, _> = c
                        .proposal
                        .iter()
                        .map(|(a, v)| (*a, (v - opening.proposal[a]).abs()))
                        .collect();
                    assert_eq!(rec.distance_from_anchor, expected);
                }
            }
        }
    }
}

fn independent_ratio(records: &[TrialRecord]) -> (usize, usize) {
    let mut s = 0;
    let mut f = 0;
    for r in records {
        for e in &r.retrievals {
            if e.was_failure {
                f += 1;
            } else {
                s += 1;
            }
        }
    }
    (s, f)
}

#[test]
fn failures_resurface_once_they_happen() {
    let cfg = harsh_uc2();
    let mut saw_failure = false;
    for seed in 0..5 {
        for c in [&ScenarioConfig::uc2_default(), &cfg] {
            let r = run_trials(c, &RunSpec::new(30, seed, AnchorStrategy::Fixed, MemoryPolicy::Unbiased))
                .unwrap()
                .records;
            let Some(first) = r.iter().position(|t| t.result.is_failure()) else {
                continue;
            };
            saw_failure = true;
            assert!(
                r[first + 1..].iter().any(|t| t.retrievals.iter().any(|e| e.was_failure)),
                "seed {seed}: failure at trial {first} never retrieved"
            );
        }
    }
    assert!(saw_failure, "harsh config produced no failures");
}

#[test]
fn statistics_agree_with_raw_log() {
    let cfg = harsh_uc2();
    for policy in [MemoryPolicy::Vanilla, MemoryPolicy::Unbiased] {
        let r = run_trials(&cfg, &RunSpec::new(30, 2, AnchorStrategy::Fixed, policy)).unwrap().records;
        let (s, f) = independent_ratio(&r);
        let ratio = stats::retrieval_ratio(&r).unwrap();
        if f == 0 {
            assert!(ratio.is_infinite());
        } else {
            assert_eq!(ratio, s as f64 / f as f64);
        }
        let ages: Vec<f64> = r.iter().flat_map(|t| t.retrievals.iter().map(|e| e.age as f64)).collect();
        let n = ages.len() as f64;
        let mean = ages.iter().sum::<f64>() / n;
        let sd = (ages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        let got = stats::memory_age_stats(&r).unwrap();
        assert_eq!(got.count, ages.len());
        assert!((got.mean - mean).abs() <= 1e-12 * mean.max(1.0));
        assert!((got.sd - sd).abs() <= 1e-12 * sd.max(1.0));
        if policy == MemoryPolicy::Vanilla {
            assert_eq!(f, 0);
        }
    }
}

#[test]
fn memoryless_runs_retrieve_nothing() {
    let r = run_trials(
        &ScenarioConfig::uc2_default(),
        &RunSpec::new(5, 0, AnchorStrategy::Fixed, MemoryPolicy::None),
    )
    .unwrap();
    assert!(r.records.iter().all(|t| t.retrievals.is_empty()));
    assert!(r.memory.is_empty());
    assert!(stats::retrieval_ratio(&r.records).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn metrics_stay_in_range(seed in any::<u64>(), uc2 in any::<bool>(), policy in 0usize..3, randomized in any::<bool>()) {
        let cfg = if uc2 { harsh_uc2() } else { ScenarioConfig::uc1_default() };
        let memory = [MemoryPolicy::None, MemoryPolicy::Vanilla, MemoryPolicy::Unbiased][policy];
        let strategy = if randomized { AnchorStrategy::Randomized } else { AnchorStrategy::Fixed };
        let r = run_trials(&cfg, &RunSpec::new(3, seed, strategy, memory)).unwrap().records;
        for t in &r {
            prop_assert!((0.0..=100.0).contains(&t.energy_saving_pct));
            if let Some(l) = t.latency_ms {
                prop_assert!(l >= 0.0 && l.is_finite());
            }
            prop_assert_eq!(t.fallback, t.result == NegotiationResult::UnresolvedNegotiation);
            for (a, d) in &t.distance_from_anchor {
                prop_assert_eq!(*d, (t.allocations[a] - t.anchors[a]).abs());
            }
        }
        let (lat, infeasible) = stats::latencies(&r);
        prop_assert_eq!(lat.len() + infeasible, r.len());
    }
}
