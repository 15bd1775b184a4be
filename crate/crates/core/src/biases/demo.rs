//! Canned biased-vs-mitigated comparisons for every operator, rendered as
//! markdown or CSV by the `biases-demo` subcommand.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Result;
use crate::scenario::{canonicalize, FramedState, ScenarioConfig, SliceId, Unit};
use crate::twin::{check_chance_constraint, Allocation, Perturbation, TwinModel, TwinState};

#[derive(Debug, Clone, PartialEq)]
pub struct DemoRow {
    pub bias: &'static str,
    pub case: String,
    pub biased: String,
    pub mitigated: String,
}

fn row(bias: &'static str, case: impl Into<String>, biased: impl ToString, mitigated: impl ToString) -> DemoRow {
    DemoRow {
        bias,
        case: case.into(),
        biased: biased.to_string(),
        mitigated: mitigated.to_string(),
    }
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

pub fn demo_rows() -> Result<Vec<DemoRow>> {
    let mut rows = Vec::new();

    let ev = [Evidence::new(2.0, 1.0), Evidence::new(1.0, 2.0)];
    rows.push(row(
        "confirmation",
        "prior 0.5, one pro (LR 2) and one con (LR 1/2) item",
        f4(confirmation_posterior(0.5, &ev, true)?),
        f4(confirmation_posterior(0.5, &ev, false)?),
    ));

    let series = [10.0, 10.0, 10.0, 10.0, 30.0];
    let recency = TemporalWeighting::new(2.0, TemporalReference::Latest)?;
    rows.push(row(
        "recency/primacy",
        "KPI series 10,10,10,10,30; lambda 2 vs 2-wide windows",
        f4(weighted_estimate(&series, &recency)?),
        f4(multi_window_average(&series, 2)?),
    ));

    let cands = [
        Candidate { action: 10.0, utility: 1.0 },
        Candidate { action: 11.0, utility: 1.05 },
    ];
    let anchored = AnchorModel::new(10.0, 0.1)?;
    let free = AnchorModel::new(10.0, 0.0)?;
    rows.push(row(
        "anchoring",
        "candidates 10 MHz (U 1.00), 11 MHz (U 1.05), anchor 10, gamma 0.1",
        format!("{} MHz", cands[anchored_choice(&cands, &anchored)?].action),
        format!("{} MHz", cands[anchored_choice(&cands, &free)?].action),
    ));

    let mut events = vec![SalientEvent { evidences_event: true, salience: 9.0 }];
    events.extend((0..9).map(|_| SalientEvent { evidences_event: false, salience: 1.0 }));
    rows.push(row(
        "availability",
        "1 vivid outage (salience 9) among 10 events",
        f4(availability_estimate(&events)?),
        f4(base_rate_estimate(&events)?),
    ));

    let lib = TemplateLibrary::negotiation_default();
    let ctx: BTreeMap<String, String> = [("slice", "URLLC"), ("value", "9.00"), ("unit", "MHz")]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let primed = TemplateLibrary::new([("propose", vec!["secure bandwidth for {slice} at all costs"])])
        .err()
        .map(|e| e.to_string())
        .unwrap_or_default();
    rows.push(row(
        "suggestion",
        "priming template vs neutral library",
        primed,
        lib.controlled_reprompt("propose", &ctx, 3)?.join(" | "),
    ));

    rows.push(row(
        "authority",
        "vendor forecast 10, local estimate 20, trust 0.9",
        f4(authority_mix(10.0, 20.0, 0.9)?),
        format!(
            "disagreement flagged: {} (tolerance 5)",
            dual_source_validate(10.0, 20.0, 5.0)
        ),
    ));

    let trust = TrustModel::new(vec![0.5, 0.5], 0.1, vec![vec![1.0, 0.5], vec![0.5, 1.0]])?;
    rows.push(row(
        "halo",
        "success on energy tuning; trust in latency tuning",
        f4(halo_update(&trust, 0, true, false)?.tau[1]),
        f4(halo_update(&trust, 0, true, true)?.tau[1]),
    ));

    let losses: Vec<_> = [1.0, 3.0, 8.0]
        .iter()
        .map(|&m| QuadraticLoss { curvature: 1.0, minimizer: m })
        .collect();
    let herd = groupthink_consensus(&losses, &ConsensusParams { lambda: 1e3, max_iters: 10_000, tol: 1e-12 })?;
    let own = groupthink_consensus(&losses, &ConsensusParams { lambda: 0.0, max_iters: 10, tol: 1e-12 })?;
    rows.push(row(
        "groupthink",
        format!(
            "PRB preferences 1,3,8; peer update 0.6 x 0.6 -> {}",
            f4(social_bayes_update(0.6, 0.6)?)
        ),
        format!("dispersion {}", f4(dispersion(&herd))),
        format!("dispersion {}", f4(dispersion(&own))),
    ));

    let gain = FramedState::parse("20% free", 50.0, Unit::MHz)?;
    let loss = FramedState::parse("80% used", 50.0, Unit::MHz)?;
    let bias = FramingBias { loss_aversion: 0.5 };
    rows.push(row(
        "framing",
        "\"20% free\" vs \"80% used\" of 50 MHz",
        format!(
            "{} vs {}",
            f4(framed_reading(&gain, &bias)?),
            f4(framed_reading(&loss, &bias)?)
        ),
        format!(
            "{} vs {}",
            f4(canonicalize(&gain)?.free_fraction),
            f4(canonicalize(&loss)?.free_fraction)
        ),
    ));

    let sunk = SunkCostParams {
        alpha: 1.0,
        investment: 20.0,
        transform: InvestmentTransform::Log1p,
    };
    rows.push(row(
        "sunk cost",
        "E[B] 1, C 2, prior investment 20",
        f4(sunk_cost_utility(1.0, 2.0, &sunk)?),
        f4(reset_sunk_cost(1.0, 2.0)),
    ));

    let actions = [8.0, 12.0];
    let scenarios = [(4.0, 1.0), (12.0, 1.0)];
    let covers = |a: &f64, x: f64| if *a >= x { 1.0 } else { 0.0 };
    rows.push(row(
        "neglect of uncertainty",
        "capacity choice 8 or 12, demand 4 or 12",
        actions[uncertainty_choice(&actions, &scenarios, covers, true)?],
        actions[uncertainty_choice(&actions, &scenarios, covers, false)?],
    ));

    let sq = StatusQuoMitigation { horizon: 3, switch_cost_scale: 1.0 };
    rows.push(row(
        "status quo",
        "gain 0.05 per epoch, switching cost 0.1",
        format!("switch: {}", status_quo_gate(1.05, 1.0, 0.1)),
        format!("switch: {}", status_quo_gate_mitigated(1.05, 1.0, 0.1, &sq)),
    ));

    let cfg = ScenarioConfig::uc1_default();
    let model = TwinModel::<f64>::from_config(&cfg);
    let state = TwinState::<f64>::from_config(&cfg, 7.0);
    let proposal = ToolProposal { action: 8.0, confidence: Some(0.95) };
    let verify = |bw: &f64| -> Result<Verdict<f64>> {
        let alloc: Allocation<f64> = [(SliceId::Urllc, *bw)].into();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = model.simulate(&state, &alloc, 64, Perturbation { sigma: 0.1 }, &mut rng)?;
        let o = &e.per_slice[&SliceId::Urllc];
        Ok(Verdict {
            passed: check_chance_constraint(&o.samples, o.sla_ms, cfg.weights.epsilon),
            risk: o.risk,
            reason: format!("URLLC SLA risk {:.2}", o.risk),
        })
    };
    let describe = |d: AutomatedDecision<f64, f64>| match d {
        AutomatedDecision::Execute { action, verified, confidence } => {
            format!("execute {action} MHz (verified {verified}, confidence {confidence:.2})")
        }
        AutomatedDecision::Reject { reason, .. } => format!("reject ({reason})"),
        AutomatedDecision::Defer { error, .. } => format!("defer ({error})"),
    };
    rows.push(row(
        "automation",
        "tool proposes 8 MHz for URLLC (needs ~8.6)",
        describe(automated_action::<_, _, fn(&f64) -> Result<Verdict<f64>>>(proposal.clone(), None)),
        describe(automated_action(proposal, Some(verify))),
    ));

    let samples = [
        Sample { value: 1.0, survived: true },
        Sample { value: -1.0, survived: false },
    ];
    rows.push(row(
        "survivorship",
        "outcome +1 (kept), -1 (failed, dropped from logs)",
        f4(survivorship_estimate(&samples, true)?),
        f4(survivorship_estimate(&samples, false)?),
    ));

    Ok(rows)
}

pub fn render_markdown(rows: &[DemoRow]) -> String {
    let mut out = String::from("| bias | case | biased | mitigated |\n|---|---|---|---|\n");
    for r in rows {
        let esc = |s: &str| s.replace('|', "\\|");
        let _ = writeln!(out, "| {} | {} | {} | {} |", r.bias, esc(&r.case), esc(&r.biased), esc(&r.mitigated));
    }
    out
}

pub fn render_csv(rows: &[DemoRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bias", "case", "biased", "mitigated"])
        .map_err(|e| crate::Error::Parse(e.to_string()))?;
    for r in rows {
        w.write_record([r.bias, r.case.as_str(), r.biased.as_str(), r.mitigated.as_str()])
            .map_err(|e| crate::Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
