//! Estimated action distributions and solver reports.

use serde::Serialize;

use crate::error::{ModelError, ModelResult};
use crate::game::Agent;
use crate::scalar::Real;

/// Empirical distribution over a finite action set with its sample count.
/// Per-action standard errors are `sqrt(p(1-p)/K)`.
#[derive(Debug, Clone)]
pub struct ActionDistribution<T> {
    actions: Vec<String>,
    probs: Vec<T>,
    samples: u64,
}

impl<T: Real + Serialize> Serialize for ActionDistribution<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ActionDistribution", 4)?;
        s.serialize_field("actions", &self.actions)?;
        s.serialize_field("probs", &self.probs)?;
        s.serialize_field("std_errs", &self.std_errs())?;
        s.serialize_field("samples", &self.samples)?;
        s.end()
    }
}

impl<T: Real> ActionDistribution<T> {
    pub fn new(actions: Vec<String>, probs: Vec<T>, samples: u64) -> ModelResult<Self> {
        if samples == 0 {
            return Err(ModelError::BadConfig("sample count must be >= 1".into()));
        }
        if actions.len() != probs.len() || actions.is_empty() {
            return Err(ModelError::BadTableShape {
                name: "action distribution".into(),
                got: vec![probs.len()],
                expected: vec![actions.len()],
            });
        }
        let sum: T = probs.iter().copied().sum();
        let tol = T::c(1e-12).max(T::epsilon() * T::c(64.0));
        if probs.iter().any(|p| *p < -tol) || (sum - T::one()).abs() > tol {
            return Err(ModelError::BadProbabilityRow {
                context: "action distribution".into(),
                sum: sum.to_f64_lossy(),
            });
        }
        Ok(ActionDistribution {
            actions,
            probs,
            samples,
        })
    }

    pub fn from_counts(actions: Vec<String>, counts: &[u64]) -> ModelResult<Self> {
        let total: u64 = counts.iter().sum();
        let k = T::from_f64(total as f64).expect("count fits scalar");
        let probs = counts
            .iter()
            .map(|c| T::from_f64(*c as f64).expect("count fits scalar") / k)
            .collect();
        Self::new(actions, probs, total)
    }

    /// Exact point mass, carried with a nominal sample count of 1.
    pub fn point_mass(actions: Vec<String>, index: usize) -> ModelResult<Self> {
        let probs = (0..actions.len())
            .map(|i| if i == index { T::one() } else { T::zero() })
            .collect();
        Self::new(actions, probs, 1)
    }

    pub fn uniform(actions: Vec<String>) -> ModelResult<Self> {
        let n = actions.len();
        let p = T::one() / T::from_usize_c(n);
        Self::new(actions, vec![p; n], 1)
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn prob_of(&self, action: &str) -> ModelResult<T> {
        let i = self
            .actions
            .iter()
            .position(|a| a == action)
            .ok_or_else(|| ModelError::UnknownAction(action.to_string()))?;
        Ok(self.probs[i])
    }

    pub fn std_err(&self, i: usize) -> T {
        let p = self.probs[i];
        let k = T::from_f64(self.samples as f64).expect("count fits scalar");
        (p * (T::one() - p) / k).sqrt()
    }

    pub fn std_errs(&self) -> Vec<T> {
        (0..self.probs.len()).map(|i| self.std_err(i)).collect()
    }

    pub fn max_std_err(&self) -> T {
        self.std_errs()
            .into_iter()
            .fold(T::zero(), |acc, s| acc.max(s))
    }

    /// Convex combination of distributions over the same action set.
    pub fn mix(components: &[(T, &ActionDistribution<T>)]) -> ModelResult<Self> {
        let first = components
            .first()
            .ok_or_else(|| ModelError::BadConfig("empty mixture".into()))?
            .1;
        let mut probs = vec![T::zero(); first.actions.len()];
        let mut samples = 0u64;
        for (w, dist) in components {
            if dist.actions != first.actions {
                return Err(ModelError::ShapeConflict(
                    "mixture components over different action sets".into(),
                ));
            }
            for (acc, p) in probs.iter_mut().zip(&dist.probs) {
                *acc += *w * *p;
            }
            samples = samples.max(dist.samples);
        }
        Self::new(first.actions.clone(), probs, samples)
    }
}

/// Map from each defense to the estimated attack distribution given it.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct ConditionalActionDistribution<T> {
    defenses: Vec<String>,
    rows: Vec<ActionDistribution<T>>,
}

impl<T: Real> ConditionalActionDistribution<T> {
    pub fn new(defenses: Vec<String>, rows: Vec<ActionDistribution<T>>) -> ModelResult<Self> {
        if defenses.len() != rows.len() || defenses.is_empty() {
            return Err(ModelError::BadTableShape {
                name: "conditional distribution".into(),
                got: vec![rows.len()],
                expected: vec![defenses.len()],
            });
        }
        Ok(ConditionalActionDistribution { defenses, rows })
    }

    pub fn defenses(&self) -> &[String] {
        &self.defenses
    }

    pub fn rows(&self) -> &[ActionDistribution<T>] {
        &self.rows
    }

    pub fn row(&self, d: usize) -> &ActionDistribution<T> {
        &self.rows[d]
    }
}

/// Rule that removed an action during iterative elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EliminationRule {
    DefenderDominated,
    AttackerSupportSeparated,
    FirstOrderStochastic,
    SecondOrderStochastic,
}

#[derive(Debug, Clone, Serialize)]
pub struct EliminationEntry {
    pub round: usize,
    pub agent: String,
    pub action: String,
    pub rule: EliminationRule,
    /// Action or evidence justifying the removal.
    pub witness: String,
}

/// Ordered record of eliminations; rounds strictly increase and an action
/// appears at most once.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EliminationLog {
    pub entries: Vec<EliminationEntry>,
}

impl EliminationLog {
    pub fn push(&mut self, agent: Agent, action: &str, rule: EliminationRule, witness: String) {
        let round = self.entries.len() + 1;
        debug_assert!(
            !self.entries.iter().any(|e| e.action == action && e.agent == agent.name()),
            "action eliminated twice"
        );
        self.entries.push(EliminationEntry {
            round,
            agent: agent.name().to_string(),
            action: action.to_string(),
            rule,
            witness,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Side diagnostics carried by every decision report.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct Diagnostics<T> {
    /// Samples discarded by the concept (e.g. no pure equilibrium found).
    pub skipped_samples: u64,
    /// Largest MC standard error across reported probabilities.
    pub max_std_err: Option<T>,
    pub recursion_depth: Option<usize>,
    pub elimination_log: Option<EliminationLog>,
    /// Component label and distribution for mixture concepts.
    pub components: Option<Vec<(String, ActionDistribution<T>)>>,
    pub notes: Vec<String>,
}

impl<T> Default for Diagnostics<T> {
    fn default() -> Self {
        Diagnostics {
            skipped_samples: 0,
            max_std_err: None,
            recursion_depth: None,
            elimination_log: None,
            components: None,
            notes: Vec::new(),
        }
    }
}

/// A policy row: context label (observed attack, signal, or stage triple)
/// mapped to the chosen action.
#[derive(Debug, Clone, Serialize)]
pub struct PolicyEntry {
    pub context: String,
    pub action: String,
}

/// Outcome of a solve: the chosen action(s), the expected utility attained,
/// the opponent distribution used, and reproducibility metadata.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct DecisionReport<T> {
    pub concept: String,
    pub chosen: Vec<String>,
    pub expected_utility: T,
    pub attack_distribution: Option<ActionDistribution<T>>,
    pub conditional_distribution: Option<ConditionalActionDistribution<T>>,
    pub policy: Option<Vec<PolicyEntry>>,
    pub seed: u64,
    pub samples: u64,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> DecisionReport<T> {
    pub fn chosen_action(&self) -> &str {
        &self.chosen[0]
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn counts_produce_normalized_distribution() {
        let d: ActionDistribution<f64> =
            ActionDistribution::from_counts(vec!["a".into(), "b".into()], &[30, 10]).unwrap();
        assert_eq!(d.probs(), &[0.75, 0.25]);
        assert_eq!(d.samples(), 40);
        assert_abs_diff_eq!(d.std_err(0), (0.75 * 0.25f64 / 40.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn mixing_is_convex() {
        let a: ActionDistribution<f64> =
            ActionDistribution::point_mass(vec!["x".into(), "y".into()], 0).unwrap();
        let b: ActionDistribution<f64> =
            ActionDistribution::point_mass(vec!["x".into(), "y".into()], 1).unwrap();
        let m = ActionDistribution::mix(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_unnormalized_probs() {
        let r = ActionDistribution::new(vec!["a".into()], vec![0.9f64], 10);
        assert!(r.is_err());
        let r = ActionDistribution::<f64>::new(vec!["a".into()], vec![1.0], 0);
        assert!(r.is_err());
    }

    #[test]
    fn elimination_rounds_strictly_increase() {
        let mut log = EliminationLog::default();
        log.push(Agent::Defender, "d2", EliminationRule::DefenderDominated, "d0".into());
        log.push(
            Agent::Attacker,
            "a1",
            EliminationRule::AttackerSupportSeparated,
            "a0".into(),
        );
        assert_eq!(log.entries[0].round, 1);
        assert_eq!(log.entries[1].round, 2);
    }
}
