//! Canonical resource representation. Every supported framing of "how much
//! of a resource is in use" collapses to the same value, so downstream
//! decisions cannot depend on the wording.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl Unit {
    fn to_si<T: Scalar>(self) -> T {
        T::lit(match self {
            Unit::Hz => 1.0,
            Unit::KHz => 1e3,
            Unit::MHz => 1e6,
            Unit::GHz => 1e9,
        })
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hz" => Some(Unit::Hz),
            "khz" => Some(Unit::KHz),
            "mhz" => Some(Unit::MHz),
            "ghz" => Some(Unit::GHz),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity<T> {
    /// In [0, 1].
    Fraction(T),
    /// In the state's unit.
    Absolute(T),
}

/// A resource state as some party chose to describe it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramedState<T> {
    pub total: T,
    pub unit: Unit,
    pub used: Option<Quantity<T>>,
    pub free: Option<Quantity<T>>,
    pub trial_index: u64,
}

impl<T: Scalar> FramedState<T> {
    pub fn used_fraction(fraction: T, total: T, unit: Unit) -> Self {
        Self::new(total, unit, Some(Quantity::Fraction(fraction)), None)
    }

    pub fn free_fraction(fraction: T, total: T, unit: Unit) -> Self {
        Self::new(total, unit, None, Some(Quantity::Fraction(fraction)))
    }

    pub fn used_absolute(value: T, total: T, unit: Unit) -> Self {
        Self::new(total, unit, Some(Quantity::Absolute(value)), None)
    }

    pub fn free_absolute(value: T, total: T, unit: Unit) -> Self {
        Self::new(total, unit, None, Some(Quantity::Absolute(value)))
    }

    fn new(total: T, unit: Unit, used: Option<Quantity<T>>, free: Option<Quantity<T>>) -> Self {
        Self {
            total,
            unit,
            used,
            free,
            trial_index: 0,
        }
    }

    pub fn at_trial(mut self, trial_index: u64) -> Self {
        self.trial_index = trial_index;
        self
    }

    /// Parses `"20% free"`, `"80% used"`, `"10 MHz used"` or `"40 MHz free"`.
    pub fn parse(text: &str, total: T, unit: Unit) -> Result<Self> {
        let bad = || Error::Parse(format!("unsupported framing `{text}`"));
        let words: Vec<&str> = text.split_whitespace().collect();
        let (value, value_unit, side) = match words.as_slice() {
            [v, side] if v.ends_with('%') => (v.trim_end_matches('%'), None, *side),
            [v, u, side] => (*v, Some(Unit::parse(u).ok_or_else(bad)?), *side),
            _ => return Err(bad()),
        };
        let x: f64 = value.parse().map_err(|_| bad())?;
        let q = match value_unit {
            None => Quantity::Fraction(T::lit(x / 100.0)),
            Some(u) => Quantity::Absolute(T::lit(x) * u.to_si::<T>() / unit.to_si::<T>()),
        };
        match side.to_ascii_lowercase().as_str() {
            "used" => Ok(Self::new(total, unit, Some(q), None)),
            "free" => Ok(Self::new(total, unit, None, Some(q))),
            _ => Err(bad()),
        }
    }
}

/// Framing-free state: free share plus absolutes in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState<T> {
    pub free_fraction: T,
    pub free_hz: T,
    pub used_hz: T,
    pub total_hz: T,
    pub trial_index: u64,
}

impl<T: Scalar> From<CanonicalState<T>> for FramedState<T> {
    fn from(c: CanonicalState<T>) -> Self {
        FramedState {
            total: c.total_hz,
            unit: Unit::Hz,
            used: None,
            free: Some(Quantity::Absolute(c.free_hz)),
            trial_index: c.trial_index,
        }
    }
}

impl<T: Scalar> CanonicalState<T> {
    /// Free amount expressed in `unit`.
    pub fn free_in(&self, unit: Unit) -> T {
        self.free_hz / unit.to_si::<T>()
    }
}

/// Collapses a framed state to its canonical form.
///
/// The free share is snapped to a grid of `rel_eps` so that algebraically
/// equal framings (for instance `1 - 0.8` and `0.2`) land on the same bits.
pub fn canonicalize<T: Scalar>(raw: &FramedState<T>) -> Result<CanonicalState<T>> {
    let total = raw.total;
    if !(total > T::zero()) || !total.is_finite() {
        return Err(Error::Precondition("resource total must be positive".into()));
    }
    let as_abs = |q: Quantity<T>, what: &str| -> Result<T> {
        let v = match q {
            Quantity::Fraction(f) => {
                if !(f >= T::zero() && f <= T::one()) {
                    return Err(Error::Precondition(format!("{what} fraction {f} outside [0, 1]")));
                }
                f * total
            }
            Quantity::Absolute(a) => {
                let slack = total * T::rel_eps();
                if !(a >= -slack && a <= total + slack) {
                    return Err(Error::Precondition(format!("{what} amount {a} outside [0, {total}]")));
                }
                a
            }
        };
        Ok(v.max(T::zero()).min(total))
    };
    let used = raw.used.map(|q| as_abs(q, "used")).transpose()?;
    let free = raw.free.map(|q| as_abs(q, "free")).transpose()?;
    let free_native = match (used, free) {
        (None, None) => return Err(Error::Precondition("state carries no framing".into())),
        (Some(u), None) => total - u,
        (None, Some(f)) => f,
        (Some(u), Some(f)) => {
            if (u + f - total).abs() > T::lit(1e-9) * total {
                return Err(Error::InconsistentFraming(format!(
                    "used {u} + free {f} != total {total}"
                )));
            }
            f
        }
    };

    let si = raw.unit.to_si::<T>();
    let total_hz = total * si;
    let steps = (T::one() / T::rel_eps()).round();
    let free_fraction = ((free_native / total) * steps).round().max(T::zero()).min(steps) / steps;
    let free_hz = free_fraction * total_hz;
    Ok(CanonicalState {
        free_fraction,
        free_hz,
        used_hz: total_hz - free_hz,
        total_hz,
        trial_index: raw.trial_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_percent_free_and_eighty_percent_used_agree() {
        let a = canonicalize(&FramedState::parse("20% free", 50.0, Unit::MHz).unwrap()).unwrap();
        let b = canonicalize(&FramedState::parse("80% used", 50.0, Unit::MHz).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!((a.free_fraction - 0.20_f64).abs() < 1e-12);
    }

    #[test]
    fn nothing_used_is_fully_free() {
        let c = canonicalize(&FramedState::parse("0 MHz used", 50.0, Unit::MHz).unwrap()).unwrap();
        assert_eq!(c.free_fraction, 1.0);
    }

    #[test]
    fn inconsistent_framing_is_rejected() {
        let s = FramedState {
            total: 50.0,
            unit: Unit::MHz,
            used: Some(Quantity::Absolute(30.0)),
            free: Some(Quantity::Absolute(30.0)),
            trial_index: 0,
        };
        assert!(matches!(canonicalize(&s), Err(Error::InconsistentFraming(_))));
    }

    #[test]
    fn consistent_double_framing_is_accepted() {
        let s = FramedState {
            total: 50.0,
            unit: Unit::MHz,
            used: Some(Quantity::Fraction(0.8)),
            free: Some(Quantity::Absolute(10.0)),
            trial_index: 3,
        };
        let c = canonicalize(&s).unwrap();
        assert_eq!(c.trial_index, 3);
        assert_eq!(c.free_in(Unit::MHz), 10.0);
    }

    #[test]
    fn unit_suffixes_normalize() {
        let a = canonicalize(&FramedState::parse("10 MHz free", 50.0, Unit::MHz).unwrap()).unwrap();
        let b = canonicalize(&FramedState::parse("0.01 GHz free", 50.0, Unit::MHz).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unsupported_text_is_a_parse_error() {
        assert!(FramedState::<f64>::parse("mostly free", 50.0, Unit::MHz).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = canonicalize(&FramedState::<f32>::used_fraction(0.8, 50.0, Unit::MHz)).unwrap();
        assert!((a.free_fraction - 0.2).abs() < 1e-5);
    }
}
