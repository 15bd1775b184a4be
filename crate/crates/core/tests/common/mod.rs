//! Shared fixtures and oracles for the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use biasnet_core::biases::*;
use biasnet_core::memory::{
    AnchorPoint, MemoryPolicy, MemoryStore, NegotiationResult, OutcomeSummary, Query, StrategyRecord,
};
use biasnet_core::scenario::DecayForm;
use biasnet_core::SliceId;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 256;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

pub type Property = fn(u32) -> Result<(), String>;

fn finish<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn anchored_gamma_zero_is_argmax(cases: u32) -> Result<(), String> {
    let cands = prop::collection::vec((-100.0..100.0f64, -10.0..10.0f64), 1..20);
    finish(runner(cases).run(&(cands, -100.0..100.0f64), |(cs, anchor)| {
        let cs: Vec<_> = cs.into_iter().map(|(action, utility)| Candidate { action, utility }).collect();
        let i = anchored_choice(&cs, &AnchorModel::new(anchor, 0.0).unwrap()).unwrap();
        let best = cs.iter().map(|c| c.utility).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(cs[i].utility, best);
        Ok(())
    }))
}

pub fn temporal_weights_normalized_and_peaked(cases: u32) -> Result<(), String> {
    finish(runner(cases).run(&(1usize..60, 0.0..6.0f64, any::<bool>()), |(n, lambda, latest)| {
        let reference = if latest { TemporalReference::Latest } else { TemporalReference::Earliest };
        let w = temporal_weights(n, &TemporalWeighting::new(lambda, reference).unwrap()).unwrap();
        prop_assert_eq!(w.len(), n);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let r = if latest { n - 1 } else { 0 };
        for t in 0..n {
            for s in 0..n {
                if t.abs_diff(r) < s.abs_diff(r) {
                    prop_assert!(w[t] >= w[s]);
                }
            }
        }
        Ok(())
    }))
}

/// Posterior by explicit enumeration of the joint over {H, not H}.
pub fn brute_posterior(prior: f64, ev: &[Evidence<f64>]) -> f64 {
    let mut joint_h = prior;
    let mut joint_not = 1.0 - prior;
    for e in ev {
        joint_h *= e.likelihood_h;
        joint_not *= e.likelihood_not_h;
    }
    joint_h / (joint_h + joint_not)
}

pub fn full_evidence_bayes_matches_enumeration(cases: u32) -> Result<(), String> {
    let items = prop::collection::vec((0.05..5.0f64, 0.05..5.0f64), 0..=6);
    finish(runner(cases).run(&(0.01..0.99f64, items), |(prior, items)| {
        let ev: Vec<_> = items.iter().map(|&(a, b)| Evidence::new(a, b)).collect();
        let got = confirmation_posterior(prior, &ev, false).unwrap();
        let want = brute_posterior(prior, &ev);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", got, want);
        let pro: Vec<_> = ev.iter().copied().filter(|e| e.supports_h).collect();
        let sel = confirmation_posterior(prior, &ev, true).unwrap();
        prop_assert!((sel - brute_posterior(prior, &pro)).abs() <= 1e-12);
        prop_assert!(sel >= prior - 1e-15);
        Ok(())
    }))
}

pub const LAMBDAS: [f64; 4] = [0.0, 1.0, 10.0, 1e3];

pub fn groupthink_dispersion_monotone(cases: u32) -> Result<(), String> {
    let losses = prop::collection::vec((0.2..5.0f64, -50.0..50.0f64), 1..7);
    finish(runner(cases).run(&losses, |ls| {
        let ls: Vec<_> = ls
            .into_iter()
            .map(|(curvature, minimizer)| QuadraticLoss { curvature, minimizer })
            .collect();
        let mut prev = f64::INFINITY;
        for lambda in LAMBDAS {
            let a = groupthink_consensus(&ls, &ConsensusParams { lambda, max_iters: 100_000, tol: 1e-12 }).unwrap();
            let d = dispersion(&a);
            prop_assert!(d <= prev * (1.0 + 1e-9) + 1e-9, "lambda {}: {} > {}", lambda, d, prev);
            prev = d;
        }
        Ok(())
    }))
}

pub fn social_update_symmetric_with_identity(cases: u32) -> Result<(), String> {
    finish(runner(cases).run(&(0.001..0.999f64, 0.001..0.999f64), |(p, q)| {
        let pq = social_bayes_update(p, q).unwrap();
        let qp = social_bayes_update(q, p).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-15);
        prop_assert!((social_bayes_update(p, 0.5).unwrap() - p).abs() <= 1e-15);
        prop_assert!((social_bayes_update(0.5, q).unwrap() - q).abs() <= 1e-15);
        Ok(())
    }))
}

pub fn survivorship_full_mode_is_mean(cases: u32) -> Result<(), String> {
    let samples = prop::collection::vec((-1e3..1e3f64, any::<bool>()), 1..40);
    finish(runner(cases).run(&samples, |s| {
        let xs: Vec<_> = s.iter().map(|&(value, survived)| Sample { value, survived }).collect();
        let mean = s.iter().map(|p| p.0).sum::<f64>() / s.len() as f64;
        let got = survivorship_estimate(&xs, false).unwrap();
        prop_assert!((got - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        Ok(())
    }))
}

pub fn authority_mix_monotone(cases: u32) -> Result<(), String> {
    let strat = (-1e3..1e3f64, -1e3..1e3f64, 0.0..=1.0f64, 0.0..=1.0f64);
    finish(runner(cases).run(&strat, |(ys, yl, t1, t2)| {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = authority_mix(ys, yl, lo).unwrap();
        let b = authority_mix(ys, yl, hi).unwrap();
        let tol = 1e-12 * ys.abs().max(yl.abs()).max(1.0);
        prop_assert!((b - ys).abs() <= (a - ys).abs() + tol);
        prop_assert!(a >= ys.min(yl) - tol && a <= ys.max(yl) + tol);
        prop_assert!((authority_mix(ys, yl, 0.0).unwrap() - yl).abs() <= tol);
        prop_assert!((authority_mix(ys, yl, 1.0).unwrap() - ys).abs() <= tol);
        Ok(())
    }))
}

pub const BIAS_PROPERTIES: [(&str, Property); 7] = [
    ("anchored_choice gamma=0 is utility argmax", anchored_gamma_zero_is_argmax),
    ("temporal_weights normalized, nonincreasing off reference", temporal_weights_normalized_and_peaked),
    ("confirmation_posterior full evidence = enumeration", full_evidence_bayes_matches_enumeration),
    ("groupthink dispersion nonincreasing in lambda", groupthink_dispersion_monotone),
    ("social_bayes_update symmetric, 0.5 identity", social_update_symmetric_with_identity),
    ("survivorship full mode = arithmetic mean", survivorship_full_mode_is_mean),
    ("authority_mix monotone in trust", authority_mix_monotone),
];

/// Expected-utility and mean-scenario choices by direct enumeration.
pub fn brute_uncertainty(actions: &[f64], scenarios: &[(f64, f64)], u: impl Fn(f64, f64) -> f64) -> (usize, usize) {
    let total: f64 = scenarios.iter().map(|s| s.1).sum();
    let mean = scenarios.iter().map(|(x, w)| x * w).sum::<f64>() / total;
    let argmax = |f: &dyn Fn(f64) -> f64| {
        let mut best = 0;
        for i in 1..actions.len() {
            if f(actions[i]) > f(actions[best]) {
                best = i;
            }
        }
        best
    };
    let neglect = argmax(&|a| u(a, mean));
    let expected = argmax(&|a| scenarios.iter().map(|(x, w)| u(a, *x) * w).sum::<f64>() / total);
    (neglect, expected)
}

// ---- memory fixtures ----

pub const VOCAB: [&str; 8] = ["uc2", "ran", "edge", "trafficlow", "traffichigh", "etalow", "etahigh", "peak"];

pub fn record(id: &str, trial: u64, keywords: Vec<String>, result: NegotiationResult, ran: Option<f64>) -> StrategyRecord {
    StrategyRecord::new(
        id,
        trial,
        keywords,
        OutcomeSummary {
            negotiation_result: result,
            final_allocations: ran.map(|b| BTreeMap::from([(SliceId::Ran, b)])).unwrap_or_default(),
            latency_ms: Some(2.0),
            energy_saving_pct: Some(40.0),
        },
    )
}

fn keywords<R: Rng>(rng: &mut R) -> Vec<String> {
    let k = rng.gen_range(1..=VOCAB.len());
    let mut v: Vec<String> = VOCAB.choose_multiple(rng, k).map(|s| s.to_string()).collect();
    v.sort();
    v
}

/// `n` successes and `n` failures drawn from the same keyword, age and
/// allocation distributions, filed at trials `0..horizon`.
pub fn balanced_records(n: usize, horizon: u64, seed: u64) -> Vec<StrategyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let failures = [NegotiationResult::UnresolvedNegotiation, NegotiationResult::AgreementWithSlaViolation];
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..2 * n {
        let result = if i % 2 == 0 { NegotiationResult::AgreementSuccess } else { failures[(i / 2) % 2] };
        let trial = rng.gen_range(0..horizon);
        let kw = keywords(&mut rng);
        let ran = rng.gen_range(5.0..40.0);
        out.push(record(&format!("m{i:04}"), trial, kw, result, Some(ran)));
    }
    out
}

pub fn balanced_store(policy: MemoryPolicy, records: &[StrategyRecord]) -> MemoryStore {
    let mut s = MemoryStore::new(policy);
    for r in records {
        s.record_episode(r.clone()).unwrap();
    }
    s
}

pub fn random_queries(count: usize, horizon: u64, seed: u64) -> Vec<Query<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Query {
            trial_number: horizon + rng.gen_range(0..5),
            keywords: keywords(&mut rng),
            initial_anchor: Some(AnchorPoint {
                resource: SliceId::Ran,
                value: rng.gen_range(5.0..40.0),
            }),
        })
        .collect()
}

/// Independent score oracle: set arithmetic and exponentials written out.
#[allow(clippy::too_many_arguments)]
pub fn oracle_score(
    record: &StrategyRecord,
    query: &Query<f64>,
    alpha: f64,
    beta: f64,
    delta: f64,
    theta: f64,
    kappa: f64,
    sigma: f64,
    form: DecayForm,
) -> f64 {
    let toks = |s: &str| -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        let mut cur = String::new();
        for ch in s.chars() {
            if ch.is_alphanumeric() {
                cur.extend(ch.to_lowercase());
            } else if !cur.is_empty() {
                set.insert(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            set.insert(cur);
        }
        set
    };
    let q = toks(&query.keywords.join(" "));
    let m = toks(&record.description);
    let union = q.union(&m).count();
    let sim = if union == 0 { 0.0 } else { q.intersection(&m).count() as f64 / union as f64 };
    let age = (query.trial_number as f64 - record.context.trial_number as f64).max(0.0);
    let decay = match form {
        DecayForm::Factor => (-age / theta).exp(),
        DecayForm::Rate => (-theta * age).exp(),
    };
    let failure = matches!(
        record.outcome_summary.negotiation_result,
        NegotiationResult::UnresolvedNegotiation | NegotiationResult::AgreementWithSlaViolation
    );
    let penalty = match (query.initial_anchor, record.outcome_summary.final_allocations.get(&SliceId::Ran)) {
        (Some(a), Some(b)) if a.resource == SliceId::Ran => kappa * (-(b - a.value).abs() / sigma).exp(),
        _ => 0.0,
    };
    alpha * sim + beta * decay + if failure { delta } else { 0.0 } - penalty
}
