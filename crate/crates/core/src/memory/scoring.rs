use std::collections::BTreeSet;

use super::{Query, RetrievalWeights, ScoredMemory, StrategyRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::DecayForm;

/// Lowercased alphanumeric runs, deduplicated.
pub fn tokenize(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// `|a ∩ b| / |a ∪ b|`, and 0 when both are empty.
pub fn jaccard<T: Scalar>(a: &BTreeSet<String>, b: &BTreeSet<String>) -> T {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return T::zero();
    }
    T::lit(inter as f64) / T::lit(union as f64)
}

/// Recency weight of a record `age` trials old. Negative ages count as fresh.
pub fn time_decay<T: Scalar>(age: T, theta: T, form: DecayForm) -> Result<T> {
    if !(theta > T::zero()) {
        return Err(Error::validation("theta", "must be > 0"));
    }
    let age = age.max(T::zero());
    Ok(match form {
        DecayForm::Factor => (-age / theta).exp(),
        DecayForm::Rate => (-theta * age).exp(),
    })
}

/// `kappa * exp(-|b - anchor| / sigma)` where `b` is the record's final
/// allocation of `resource`; zero when the record has none.
pub fn anchor_penalty<T: Scalar>(
    record: &StrategyRecord,
    resource: crate::scenario::SliceId,
    anchor: T,
    kappa: T,
    sigma: T,
) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::validation("sigma", "must be > 0"));
    }
    Ok(match record.allocation(resource) {
        Some(b) => kappa * (-(T::lit(b) - anchor).abs() / sigma).exp(),
        None => T::zero(),
    })
}

pub fn score<T: Scalar>(
    record: &StrategyRecord,
    query: &Query<T>,
    weights: &RetrievalWeights<T>,
) -> Result<ScoredMemory<T>> {
    let q = tokenize(&query.keywords.join(" "));
    let semantic: T = jaccard(&q, &tokenize(&record.description));
    let age = T::lit(query.trial_number as f64) - T::lit(record.context.trial_number as f64);
    let decay = time_decay(age, weights.theta, weights.decay_form)?;
    let bonus = if record.is_failure() { weights.delta } else { T::zero() };
    let penalty = match query.initial_anchor {
        Some(a) => anchor_penalty(record, a.resource, a.value, weights.kappa, weights.sigma)?,
        None => T::zero(),
    };
    Ok(ScoredMemory {
        record: record.clone(),
        semantic,
        decay,
        bonus,
        anchor_penalty: penalty,
        final_score: weights.alpha * semantic + weights.beta * decay + bonus - penalty,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::rec;
    use super::super::{AnchorPoint, NegotiationResult::*};
    use super::*;
    use crate::scenario::SliceId;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("High Traffic, high-traffic!"), set(&["high", "traffic"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("CPU 45GHz"), set(&["cpu", "45ghz"]));
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard::<f64>(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard::<f64>(&set(&["a", "b"]), &set(&["b", "c"])), 1.0 / 3.0);
        assert_eq!(jaccard::<f64>(&set(&[]), &set(&[])), 0.0);
    }

    #[test]
    fn decay_examples() {
        assert_eq!(time_decay(0.0, 5.0, DecayForm::Factor).unwrap(), 1.0);
        assert!((time_decay(5.0, 5.0, DecayForm::Factor).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(time_decay(-3.0, 5.0, DecayForm::Factor).unwrap(), 1.0);
        assert!((time_decay(2.0, 0.5, DecayForm::Rate).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
        assert!(time_decay(1.0, 0.0, DecayForm::Factor).is_err());
    }

    #[test]
    fn penalty_examples() {
        let r = rec("r", 0, &[], AgreementSuccess, Some(20.0));
        assert_eq!(anchor_penalty(&r, SliceId::Ran, 20.0, 0.5, 5.0).unwrap(), 0.5);
        let p = anchor_penalty(&r, SliceId::Ran, 25.0, 0.5, 5.0).unwrap();
        assert!((p - 0.5 * (-1.0f64).exp()).abs() < 1e-12);
        assert!(anchor_penalty(&r, SliceId::Ran, 1e6, 0.5, 5.0).unwrap() < 1e-300);
        assert_eq!(anchor_penalty(&r, SliceId::Edge, 20.0, 0.5, 5.0).unwrap(), 0.0);
        assert!(anchor_penalty(&r, SliceId::Ran, 20.0, 0.5, 0.0).is_err());
    }

    fn weights() -> RetrievalWeights<f64> {
        RetrievalWeights {
            alpha: 1.0,
            beta: 0.5,
            delta: 1.0,
            theta: 5.0,
            kappa: 0.5,
            sigma: 4.0,
            top_n: 5,
            decay_form: DecayForm::Factor,
        }
    }

    #[test]
    fn score_examples() {
        let q = Query {
            trial_number: 7,
            keywords: vec!["a".into(), "b".into()],
            initial_anchor: None,
        };
        let ok = rec("s", 7, &["a", "c"], AgreementSuccess, None);
        let s = score(&ok, &q, &weights()).unwrap();
        assert_eq!(s.semantic, 1.0 / 3.0);

        let half = rec("h", 7, &["a"], AgreementSuccess, None);
        assert_eq!(score(&half, &q, &weights()).unwrap().final_score, 1.0);
        let failed = StrategyRecord {
            outcome_summary: super::super::OutcomeSummary {
                negotiation_result: AgreementWithSlaViolation,
                ..half.outcome_summary.clone()
            },
            ..half
        };
        assert_eq!(score(&failed, &q, &weights()).unwrap().final_score, 2.0);

        let old = rec("o", 0, &["zzz"], AgreementSuccess, None);
        let far = Query { trial_number: 10_000, ..q };
        assert!(score(&old, &far, &weights()).unwrap().final_score < 1e-12);
    }

    #[test]
    fn anchor_enters_the_score() {
        let r = rec("r", 3, &["a"], AgreementSuccess, Some(30.0));
        let q = Query {
            trial_number: 3,
            keywords: vec!["a".into()],
            initial_anchor: Some(AnchorPoint { resource: SliceId::Ran, value: 30.0 }),
        };
        let s = score(&r, &q, &weights()).unwrap();
        assert_eq!(s.anchor_penalty, 0.5);
        assert_eq!(s.final_score, 1.0 + 0.5 - 0.5);
    }
}
