//! Finite game representation and exact expected-utility evaluation.
//!
//! Games hold labeled action/outcome sets with tables keyed by index; the
//! label-to-index map is fixed at construction. Probability rows within the
//! normalization tolerance are renormalized, rows outside it are rejected.
//! All types are immutable after construction.

use std::collections::HashMap;

use ndarray::{Array2, Array3, Array4, ArrayView1, Axis};

use crate::error::{ModelError, ModelResult, SolveError, SolveResult};
use crate::scalar::{prob_tolerance, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Agent {
    Defender,
    Attacker,
}

impl Agent {
    pub fn name(self) -> &'static str {
        match self {
            Agent::Defender => "defender",
            Agent::Attacker => "attacker",
        }
    }

    pub fn other(self) -> Agent {
        match self {
            Agent::Defender => Agent::Attacker,
            Agent::Attacker => Agent::Defender,
        }
    }
}

/// Interaction structure of a two-agent game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameStructure {
    Simultaneous,
    /// Defender commits, attacker observes and responds.
    SequentialDefendAttack,
    /// Attacker moves first, defender observes and responds.
    SequentialAttackDefend,
    /// Defender observes a private signal before committing.
    SequentialDefendAttackPrivateInfo,
    /// Defense, observed attack, outcome, then mitigation.
    DefendAttackDefend,
}

impl GameStructure {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simultaneous => "simultaneous",
            Self::SequentialDefendAttack => "sequential_defend_attack",
            Self::SequentialAttackDefend => "sequential_attack_defend",
            Self::SequentialDefendAttackPrivateInfo => "sequential_defend_attack_private_info",
            Self::DefendAttackDefend => "defend_attack_defend",
        }
    }
}

/// A duplicate-free, non-empty list of string labels with index lookup.
#[derive(Debug, Clone)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Labels {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, role: &str) -> ModelResult<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ModelError::BadLabels(role.to_string()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(ModelError::BadLabels(format!("{role} (duplicate `{n}`)")));
            }
        }
        Ok(Labels { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, label: &str) -> ModelResult<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| ModelError::UnknownAction(label.to_string()))
    }

    pub fn subset(&self, keep: &[usize], role: &str) -> ModelResult<Labels> {
        Labels::new(keep.iter().map(|&i| self.names[i].clone()), role)
    }
}

/// Renormalize each row (last axis) of a probability table, rejecting rows
/// outside tolerance and negative entries.
fn normalize_rows<T: Real>(
    mut table: ndarray::ArrayD<T>,
    context: &str,
) -> ModelResult<ndarray::ArrayD<T>> {
    let tol = prob_tolerance::<T>();
    let last = table.ndim() - 1;
    for mut row in table.lanes_mut(Axis(last)) {
        let mut sum = T::zero();
        for v in row.iter() {
            if !v.is_finite() || *v < -tol {
                return Err(ModelError::BadProbabilityRow {
                    context: context.to_string(),
                    sum: v.to_f64_lossy(),
                });
            }
            sum += *v;
        }
        if (sum - T::one()).abs() > tol {
            return Err(ModelError::BadProbabilityRow {
                context: context.to_string(),
                sum: sum.to_f64_lossy(),
            });
        }
        // rows already normalized to machine precision pass through
        // untouched, so renormalization is idempotent
        let exact = (sum - T::one()).abs() <= T::epsilon() * T::c(8.0)
            && row.iter().all(|v| *v >= T::zero());
        if !exact {
            for v in row.iter_mut() {
                *v = (*v).max(T::zero()) / sum;
            }
        }
    }
    Ok(table)
}

fn check_finite<T: Real, D: ndarray::Dimension>(
    table: &ndarray::Array<T, D>,
    name: &str,
) -> ModelResult<()> {
    if table.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteUtility(name.to_string()));
    }
    Ok(())
}

/// Two-agent finite game: actions, outcomes, per-agent outcome beliefs
/// `p_i(s|d,a)` and utilities `u_i(d,a,s)`. Attacker tables are optional;
/// ARA solvers model them as random judgments instead, while the classical
/// baselines require them.
#[derive(Debug, Clone)]
pub struct DiscreteGame<T> {
    structure: GameStructure,
    defender_actions: Labels,
    attacker_actions: Labels,
    outcomes: Labels,
    prob_d: Array3<T>,
    util_d: Array3<T>,
    prob_a: Option<Array3<T>>,
    util_a: Option<Array3<T>>,
}

impl<T: Real> DiscreteGame<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        structure: GameStructure,
        defender_actions: Labels,
        attacker_actions: Labels,
        outcomes: Labels,
        prob_d: Array3<T>,
        util_d: Array3<T>,
        prob_a: Option<Array3<T>>,
        util_a: Option<Array3<T>>,
    ) -> ModelResult<Self> {
        let dims = [
            defender_actions.len(),
            attacker_actions.len(),
            outcomes.len(),
        ];
        let check_shape = |name: &str, got: &[usize]| -> ModelResult<()> {
            if got != dims {
                return Err(ModelError::BadTableShape {
                    name: name.to_string(),
                    got: got.to_vec(),
                    expected: dims.to_vec(),
                });
            }
            Ok(())
        };
        check_shape("prob_d", prob_d.shape())?;
        check_shape("util_d", util_d.shape())?;
        check_finite(&util_d, "util_d")?;
        let prob_d = normalize_rows(prob_d.into_dyn(), "prob_d")?
            .into_dimensionality()
            .expect("rank preserved");
        let prob_a = match prob_a {
            Some(p) => {
                check_shape("prob_a", p.shape())?;
                Some(
                    normalize_rows(p.into_dyn(), "prob_a")?
                        .into_dimensionality()
                        .expect("rank preserved"),
                )
            }
            None => None,
        };
        if let Some(u) = &util_a {
            check_shape("util_a", u.shape())?;
            check_finite(u, "util_a")?;
        }
        Ok(DiscreteGame {
            structure,
            defender_actions,
            attacker_actions,
            outcomes,
            prob_d,
            util_d,
            prob_a,
            util_a,
        })
    }

    pub fn structure(&self) -> GameStructure {
        self.structure
    }

    pub fn defender_actions(&self) -> &Labels {
        &self.defender_actions
    }

    pub fn attacker_actions(&self) -> &Labels {
        &self.attacker_actions
    }

    pub fn outcomes(&self) -> &Labels {
        &self.outcomes
    }

    pub fn n_defenses(&self) -> usize {
        self.defender_actions.len()
    }

    pub fn n_attacks(&self) -> usize {
        self.attacker_actions.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn prob_table(&self, agent: Agent) -> Option<&Array3<T>> {
        match agent {
            Agent::Defender => Some(&self.prob_d),
            Agent::Attacker => self.prob_a.as_ref(),
        }
    }

    pub fn util_table(&self, agent: Agent) -> Option<&Array3<T>> {
        match agent {
            Agent::Defender => Some(&self.util_d),
            Agent::Attacker => self.util_a.as_ref(),
        }
    }

    pub fn has_attacker_tables(&self) -> bool {
        self.prob_a.is_some() && self.util_a.is_some()
    }

    /// `psi_i(d, a) = sum_s u_i(d,a,s) p_i(s|d,a)` for one action pair.
    pub fn expected_utility(&self, agent: Agent, d: &str, a: &str) -> ModelResult<T> {
        let di = self.defender_actions.position(d)?;
        let ai = self.attacker_actions.position(a)?;
        let (u, p) = self.tables_for(agent)?;
        Ok(psi_cell(
            u.index_axis(Axis(0), di).index_axis(Axis(0), ai),
            p.index_axis(Axis(0), di).index_axis(Axis(0), ai),
        ))
    }

    fn tables_for(&self, agent: Agent) -> ModelResult<(&Array3<T>, &Array3<T>)> {
        let u = self
            .util_table(agent)
            .ok_or_else(|| ModelError::JudgmentsAbsent(format!("{} utility table", agent.name())))?;
        let p = self
            .prob_table(agent)
            .ok_or_else(|| ModelError::JudgmentsAbsent(format!("{} probability table", agent.name())))?;
        Ok((u, p))
    }

    /// Full `psi_i` matrix over (defense, attack).
    pub fn psi_matrix(&self, agent: Agent) -> ModelResult<Array2<T>> {
        let (u, p) = self.tables_for(agent)?;
        Ok(psi_from_tables(u, p))
    }

    /// Restriction to subsets of defenses and attacks (indices into the
    /// original label order). Outcome space is untouched.
    pub fn restrict(&self, keep_d: &[usize], keep_a: &[usize]) -> ModelResult<DiscreteGame<T>> {
        let take3 = |t: &Array3<T>| -> Array3<T> {
            let t = t.select(Axis(0), keep_d);
            t.select(Axis(1), keep_a)
        };
        DiscreteGame::new(
            self.structure,
            self.defender_actions.subset(keep_d, "defender actions")?,
            self.attacker_actions.subset(keep_a, "attacker actions")?,
            self.outcomes.clone(),
            take3(&self.prob_d),
            take3(&self.util_d),
            self.prob_a.as_ref().map(take3),
            self.util_a.as_ref().map(take3),
        )
    }
}

/// Expected utility of one (d, a) cell given outcome row views.
pub(crate) fn psi_cell<T: Real>(u: ArrayView1<'_, T>, p: ArrayView1<'_, T>) -> T {
    let mut acc = T::zero();
    for (uv, pv) in u.iter().zip(p.iter()) {
        acc += *uv * *pv;
    }
    acc
}

/// psi matrix from explicit (d, a, s) tables.
pub(crate) fn psi_from_tables<T: Real>(u: &Array3<T>, p: &Array3<T>) -> Array2<T> {
    let (nd, na, _) = u.dim();
    Array2::from_shape_fn((nd, na), |(d, a)| {
        psi_cell(
            u.index_axis(Axis(0), d).index_axis(Axis(0), a),
            p.index_axis(Axis(0), d).index_axis(Axis(0), a),
        )
    })
}

/// Sequential defend-attack game where the defender observes a private
/// signal `v` before acting; the attacker observes her action but not `v`.
/// Defender tables carry a leading signal axis `(v, d, a, s)`.
#[derive(Debug, Clone)]
pub struct PrivateInfoGame<T> {
    defender_actions: Labels,
    attacker_actions: Labels,
    outcomes: Labels,
    signals: Labels,
    signal_prior: Vec<T>,
    prob_d: Array4<T>,
    util_d: Array4<T>,
    prob_a: Option<Array3<T>>,
    util_a: Option<Array3<T>>,
}

impl<T: Real> PrivateInfoGame<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        defender_actions: Labels,
        attacker_actions: Labels,
        outcomes: Labels,
        signals: Labels,
        signal_prior: Vec<T>,
        prob_d: Array4<T>,
        util_d: Array4<T>,
        prob_a: Option<Array3<T>>,
        util_a: Option<Array3<T>>,
    ) -> ModelResult<Self> {
        let dims = [
            signals.len(),
            defender_actions.len(),
            attacker_actions.len(),
            outcomes.len(),
        ];
        for (name, got) in [("prob_d", prob_d.shape()), ("util_d", util_d.shape())] {
            if got != dims {
                return Err(ModelError::BadTableShape {
                    name: name.to_string(),
                    got: got.to_vec(),
                    expected: dims.to_vec(),
                });
            }
        }
        if signal_prior.len() != signals.len() {
            return Err(ModelError::BadTableShape {
                name: "signal_prior".into(),
                got: vec![signal_prior.len()],
                expected: vec![signals.len()],
            });
        }
        check_finite(&util_d, "util_d")?;
        let prior_sum: T = signal_prior.iter().copied().sum();
        if (prior_sum - T::one()).abs() > prob_tolerance::<T>() {
            return Err(ModelError::BadProbabilityRow {
                context: "signal_prior".into(),
                sum: prior_sum.to_f64_lossy(),
            });
        }
        let signal_prior = signal_prior.into_iter().map(|p| p / prior_sum).collect();
        let prob_d = normalize_rows(prob_d.into_dyn(), "prob_d")?
            .into_dimensionality()
            .expect("rank preserved");
        Ok(PrivateInfoGame {
            defender_actions,
            attacker_actions,
            outcomes,
            signals,
            signal_prior,
            prob_d,
            util_d,
            prob_a,
            util_a,
        })
    }

    pub fn signals(&self) -> &Labels {
        &self.signals
    }

    pub fn signal_prior(&self) -> &[T] {
        &self.signal_prior
    }

    pub fn defender_actions(&self) -> &Labels {
        &self.defender_actions
    }

    pub fn attacker_actions(&self) -> &Labels {
        &self.attacker_actions
    }

    pub fn outcomes(&self) -> &Labels {
        &self.outcomes
    }

    /// The ordinary game seen when the signal is fixed to `v`.
    pub fn slice(&self, v: usize) -> ModelResult<DiscreteGame<T>> {
        DiscreteGame::new(
            GameStructure::SequentialDefendAttackPrivateInfo,
            self.defender_actions.clone(),
            self.attacker_actions.clone(),
            self.outcomes.clone(),
            self.prob_d.index_axis(Axis(0), v).to_owned(),
            self.util_d.index_axis(Axis(0), v).to_owned(),
            self.prob_a.clone(),
            self.util_a.clone(),
        )
    }
}

/// Three-stage game: defense `d1`, observed attack `a`, outcome `s`, then
/// mitigation `d2`. Utilities are indexed `(d1, a, s, d2)`; outcome
/// probabilities depend on `(d1, a)` only.
#[derive(Debug, Clone)]
pub struct DefendAttackDefendGame<T> {
    defense_actions: Labels,
    attacker_actions: Labels,
    outcomes: Labels,
    mitigation_actions: Labels,
    prob_d: Array3<T>,
    util_d: Array4<T>,
    prob_a: Option<Array3<T>>,
    util_a: Option<Array4<T>>,
}

impl<T: Real> DefendAttackDefendGame<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        defense_actions: Labels,
        attacker_actions: Labels,
        outcomes: Labels,
        mitigation_actions: Labels,
        prob_d: Array3<T>,
        util_d: Array4<T>,
        prob_a: Option<Array3<T>>,
        util_a: Option<Array4<T>>,
    ) -> ModelResult<Self> {
        let dims3 = [
            defense_actions.len(),
            attacker_actions.len(),
            outcomes.len(),
        ];
        let dims4 = [
            defense_actions.len(),
            attacker_actions.len(),
            outcomes.len(),
            mitigation_actions.len(),
        ];
        if prob_d.shape() != dims3 {
            return Err(ModelError::BadTableShape {
                name: "prob_d".into(),
                got: prob_d.shape().to_vec(),
                expected: dims3.to_vec(),
            });
        }
        if util_d.shape() != dims4 {
            return Err(ModelError::BadTableShape {
                name: "util_d".into(),
                got: util_d.shape().to_vec(),
                expected: dims4.to_vec(),
            });
        }
        check_finite(&util_d, "util_d")?;
        if let Some(u) = &util_a {
            if u.shape() != dims4 {
                return Err(ModelError::BadTableShape {
                    name: "util_a".into(),
                    got: u.shape().to_vec(),
                    expected: dims4.to_vec(),
                });
            }
            check_finite(u, "util_a")?;
        }
        let prob_d = normalize_rows(prob_d.into_dyn(), "prob_d")?
            .into_dimensionality()
            .expect("rank preserved");
        let prob_a = match prob_a {
            Some(p) => Some(
                normalize_rows(p.into_dyn(), "prob_a")?
                    .into_dimensionality()
                    .expect("rank preserved"),
            ),
            None => None,
        };
        Ok(DefendAttackDefendGame {
            defense_actions,
            attacker_actions,
            outcomes,
            mitigation_actions,
            prob_d,
            util_d,
            prob_a,
            util_a,
        })
    }

    pub fn defense_actions(&self) -> &Labels {
        &self.defense_actions
    }

    pub fn attacker_actions(&self) -> &Labels {
        &self.attacker_actions
    }

    pub fn outcomes(&self) -> &Labels {
        &self.outcomes
    }

    pub fn mitigation_actions(&self) -> &Labels {
        &self.mitigation_actions
    }

    pub fn prob_d(&self) -> &Array3<T> {
        &self.prob_d
    }

    pub fn util_d(&self) -> &Array4<T> {
        &self.util_d
    }

    pub fn prob_a(&self) -> Option<&Array3<T>> {
        self.prob_a.as_ref()
    }

    pub fn util_a(&self) -> Option<&Array4<T>> {
        self.util_a.as_ref()
    }
}

/// One agent type: full replacement tables for that agent.
#[derive(Debug, Clone)]
pub struct TypeOverride<T> {
    pub util: Array3<T>,
    pub prob: Array3<T>,
}

/// Harsanyi type space over attacker (and optionally defender) types with a
/// categorical prior per side; sides are independent.
#[derive(Debug, Clone)]
pub struct TypeSpace<T> {
    pub attacker_types: Labels,
    pub attacker_prior: Vec<T>,
    pub attacker_overrides: Vec<TypeOverride<T>>,
    pub defender_types: Option<Labels>,
    pub defender_prior: Option<Vec<T>>,
    pub defender_overrides: Option<Vec<TypeOverride<T>>>,
}

impl<T: Real> TypeSpace<T> {
    pub fn validate(&self, game: &DiscreteGame<T>) -> ModelResult<()> {
        let dims = [game.n_defenses(), game.n_attacks(), game.n_outcomes()];
        let tol = prob_tolerance::<T>();
        let check_side = |types: &Labels, prior: &[T], overrides: &[TypeOverride<T>], side: &str| {
            if prior.len() != types.len() || overrides.len() != types.len() {
                return Err(ModelError::BadTableShape {
                    name: format!("{side} type prior/overrides"),
                    got: vec![prior.len(), overrides.len()],
                    expected: vec![types.len(), types.len()],
                });
            }
            let sum: T = prior.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(ModelError::BadProbabilityRow {
                    context: format!("{side} type prior"),
                    sum: sum.to_f64_lossy(),
                });
            }
            for (i, o) in overrides.iter().enumerate() {
                if o.util.shape() != dims || o.prob.shape() != dims {
                    return Err(ModelError::BadTableShape {
                        name: format!("{side} type {} override", types.name(i)),
                        got: o.util.shape().to_vec(),
                        expected: dims.to_vec(),
                    });
                }
            }
            Ok(())
        };
        check_side(
            &self.attacker_types,
            &self.attacker_prior,
            &self.attacker_overrides,
            "attacker",
        )?;
        if let (Some(t), Some(p), Some(o)) = (
            &self.defender_types,
            &self.defender_prior,
            &self.defender_overrides,
        ) {
            check_side(t, p, o, "defender")?;
        }
        Ok(())
    }

    /// Game with the attacker tables replaced by type `i`'s.
    pub fn attacker_game(&self, game: &DiscreteGame<T>, i: usize) -> ModelResult<DiscreteGame<T>> {
        let o = &self.attacker_overrides[i];
        DiscreteGame::new(
            game.structure(),
            game.defender_actions().clone(),
            game.attacker_actions().clone(),
            game.outcomes().clone(),
            game.prob_table(Agent::Defender).unwrap().clone(),
            game.util_table(Agent::Defender).unwrap().clone(),
            Some(o.prob.clone()),
            Some(o.util.clone()),
        )
    }
}

/// Psi matrix (defense x attack) from a sampled pair of attacker tables.
pub fn psi_of_sample<T: Real>(util: &Array3<T>, prob: &Array3<T>) -> Array2<T> {
    psi_from_tables(util, prob)
}

/// Requires both attacker tables; used by the classical baselines.
pub fn require_ck<T: Real>(game: &DiscreteGame<T>) -> SolveResult<(Array2<T>, Array2<T>)> {
    if !game.has_attacker_tables() {
        return Err(SolveError::CommonKnowledgeRequired(
            "attacker probability and utility tables".into(),
        ));
    }
    Ok((
        game.psi_matrix(Agent::Defender)?,
        game.psi_matrix(Agent::Attacker)?,
    ))
}
