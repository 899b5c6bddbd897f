//! Privacy-budget accountant. Adaptive composition sums per-call epsilons;
//! group privacy multiplies by a group factor. Totals are exact rationals
//! so "equals epsilon exactly" is a meaningful assertion.

use crate::{rational_from_f64, Rational};
use num::{BigInt, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LedgerError {
    #[error("charge '{label}' would exceed budget: total {total} > budget {budget}")]
    BudgetExceeded {
        label: String,
        total: f64,
        budget: f64,
    },
    #[error("ledger charge arguments must be positive")]
    NonPositive,
}

/// One accounting entry: `calls` invocations of a randomizer at
/// `per_call_eps`, multiplied by a group-privacy factor.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerEntry {
    pub label: String,
    /// Exact per-call epsilon, rendered as "numerator/denominator".
    #[serde(serialize_with = "serialize_rational")]
    pub per_call_eps: Rational,
    pub calls: u64,
    pub group_factor: u64,
}

fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Budget accountant with exact rational totals.
#[derive(Debug, Clone, Serialize)]
pub struct BudgetLedger {
    entries: Vec<LedgerEntry>,
    #[serde(serialize_with = "serialize_rational")]
    budget: Rational,
    #[serde(serialize_with = "serialize_rational")]
    total: Rational,
}

impl BudgetLedger {
    /// Ledger with target budget `epsilon` (converted losslessly from f64).
    pub fn new(epsilon: f64) -> Self {
        BudgetLedger {
            entries: Vec::new(),
            budget: rational_from_f64(epsilon),
            total: Rational::zero(),
        }
    }

    /// Appends an entry and updates the running total. Fails (without
    /// recording) if the total would exceed the budget.
    pub fn charge(
        &mut self,
        label: &str,
        per_call_eps: Rational,
        calls: u64,
        group_factor: u64,
    ) -> Result<(), LedgerError> {
        if per_call_eps <= Rational::zero() || calls == 0 || group_factor == 0 {
            return Err(LedgerError::NonPositive);
        }
        let amount = &per_call_eps
            * Rational::from_integer(BigInt::from(calls))
            * Rational::from_integer(BigInt::from(group_factor));
        let new_total = &self.total + &amount;
        if new_total > self.budget {
            return Err(LedgerError::BudgetExceeded {
                label: label.to_string(),
                total: rational_to_f64(&new_total),
                budget: rational_to_f64(&self.budget),
            });
        }
        self.total = new_total;
        self.entries.push(LedgerEntry {
            label: label.to_string(),
            per_call_eps,
            calls,
            group_factor,
        });
        Ok(())
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Exact spent total.
    pub fn total(&self) -> &Rational {
        &self.total
    }

    /// Exact budget.
    pub fn budget(&self) -> &Rational {
        &self.budget
    }

    /// True iff the spent total equals the budget exactly.
    pub fn saturated(&self) -> bool {
        self.total == self.budget
    }

    pub fn total_f64(&self) -> f64 {
        rational_to_f64(&self.total)
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_charge_to_budget() {
        let mut ledger = BudgetLedger::new(0.3);
        ledger
            .charge("single", rational_from_f64(0.3), 1, 1)
            .unwrap();
        assert!(ledger.saturated());
    }

    #[test]
    fn overflow_names_label() {
        let mut ledger = BudgetLedger::new(0.3);
        ledger.charge("a", rational_from_f64(0.2), 1, 1).unwrap();
        match ledger.charge("b", rational_from_f64(0.2), 1, 1) {
            Err(LedgerError::BudgetExceeded { label, .. }) => assert_eq!(label, "b"),
            other => panic!("unexpected: {other:?}"),
        }
        // Failed charges are not recorded.
        assert_eq!(ledger.entries().len(), 1);
    }

    #[test]
    fn alg1_style_accounting_is_exact() {
        // n = 16, psi = 0.5: ceil(log_1.5 16) = 7, 4 * 49 = 196 levels.
        // per-call eps/(8*49), 196 calls, group factor 2 => exactly eps.
        let eps = 0.7;
        let mut ledger = BudgetLedger::new(eps);
        let per_call = rational_from_f64(eps) / Rational::from_integer(BigInt::from(8 * 49));
        ledger.charge("alg1", per_call, 196, 2).unwrap();
        assert!(ledger.saturated());
        assert_eq!(ledger.total(), &rational_from_f64(eps));
    }

    #[test]
    fn rejects_nonpositive() {
        let mut ledger = BudgetLedger::new(1.0);
        assert!(ledger.charge("z", Rational::zero(), 1, 1).is_err());
        assert!(ledger
            .charge("c", rational_from_f64(0.1), 0, 1)
            .is_err());
    }
}
