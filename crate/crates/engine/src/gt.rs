//! Classical baselines: pure Nash equilibria, subgame-perfect solutions of
//! sequential defend-attack games, and finite-type Bayes-Nash equilibria by
//! exhaustive search. All of these require the attacker's tables as common
//! knowledge, which is exactly what the ARA solvers drop.
//!
//! Tie-breaking everywhere is lowest action index, so repeated runs and
//! cross-platform runs agree exactly.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{ModelError, SolveError, SolveResult};
use crate::game::{psi_from_tables, require_ck, Agent, DiscreteGame, GameStructure, TypeSpace};
use crate::numeric::argmax;
use crate::scalar::Real;

/// Pure-strategy equilibria of a simultaneous game. May be empty.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSet {
    /// (defense index, attack index), sorted row-major.
    pub profiles: Vec<(usize, usize)>,
    pub defender_labels: Vec<String>,
    pub attacker_labels: Vec<String>,
}

impl EquilibriumSet {
    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn labeled(&self) -> Vec<(String, String)> {
        self.profiles
            .iter()
            .map(|&(d, a)| {
                (
                    self.defender_labels[d].clone(),
                    self.attacker_labels[a].clone(),
                )
            })
            .collect()
    }
}

/// Exhaustive pure Nash enumeration over psi matrices.
pub(crate) fn pure_nash_from_psi<T: Real>(
    psi_d: &Array2<T>,
    psi_a: &Array2<T>,
) -> Vec<(usize, usize)> {
    let (nd, na) = psi_d.dim();
    let mut out = Vec::new();
    for d in 0..nd {
        for a in 0..na {
            let d_best = (0..nd).all(|d2| psi_d[(d, a)] >= psi_d[(d2, a)]);
            let a_best = (0..na).all(|a2| psi_a[(d, a)] >= psi_a[(d, a2)]);
            if d_best && a_best {
                out.push((d, a));
            }
        }
    }
    out
}

/// All pure-strategy Nash equilibria `(d*, a*)` with
/// `psi_D(d*,a*) >= psi_D(d,a*)` for all `d` and
/// `psi_A(d*,a*) >= psi_A(d*,a)` for all `a`.
pub fn pure_nash<T: Real>(game: &DiscreteGame<T>) -> SolveResult<EquilibriumSet> {
    let (psi_d, psi_a) = require_ck(game)?;
    Ok(EquilibriumSet {
        profiles: pure_nash_from_psi(&psi_d, &psi_a),
        defender_labels: game.defender_actions().names().to_vec(),
        attacker_labels: game.attacker_actions().names().to_vec(),
    })
}

/// Backward-induction solution of a sequential defend-attack game.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct StackelbergSolution<T> {
    pub defense: usize,
    pub defense_label: String,
    /// Attacker best response per defense, lowest index on ties.
    pub responses: Vec<usize>,
    pub response_labels: Vec<String>,
    pub value: T,
}

/// `a*(d) = argmax_a psi_A(d, a)` per defense, then
/// `d* = argmax_d psi_D(d, a*(d))`.
pub fn stackelberg_solve<T: Real>(game: &DiscreteGame<T>) -> SolveResult<StackelbergSolution<T>> {
    if game.structure() != GameStructure::SequentialDefendAttack {
        return Err(ModelError::StructureMismatch {
            expected: GameStructure::SequentialDefendAttack.name().into(),
            got: game.structure().name().into(),
        }
        .into());
    }
    let (psi_d, psi_a) = require_ck(game)?;
    let nd = game.n_defenses();
    let responses: Vec<usize> = (0..nd)
        .map(|d| argmax(&psi_a.row(d).to_vec()))
        .collect();
    let follower_values: Vec<T> = (0..nd).map(|d| psi_d[(d, responses[d])]).collect();
    let defense = argmax(&follower_values);
    Ok(StackelbergSolution {
        defense,
        defense_label: game.defender_actions().name(defense).to_string(),
        response_labels: responses
            .iter()
            .map(|&a| game.attacker_actions().name(a).to_string())
            .collect(),
        responses,
        value: follower_values[defense],
    })
}

/// Defender solution of a sequential game with attacker types: the optimal
/// commitment against the prior-weighted best responses per type.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct BneSequentialSolution<T> {
    pub defense: usize,
    pub defense_label: String,
    /// `responses[tau][d]` = attacker type tau's best response to `d`.
    pub responses: Vec<Vec<usize>>,
    pub value: T,
}

/// `d* = argmax_d sum_tau psi_D[d, a*(d, tau)] pi(tau)`.
pub fn bne_sequential<T: Real>(
    game: &DiscreteGame<T>,
    types: &TypeSpace<T>,
) -> SolveResult<BneSequentialSolution<T>> {
    types.validate(game)?;
    if types.attacker_types.is_empty() {
        return Err(ModelError::BadConfig("empty type space".into()).into());
    }
    let psi_d = game.psi_matrix(Agent::Defender)?;
    let nd = game.n_defenses();
    let n_types = types.attacker_types.len();

    let mut responses = Vec::with_capacity(n_types);
    for o in &types.attacker_overrides {
        let psi_a_tau = psi_from_tables(&o.util, &o.prob);
        let per_d: Vec<usize> = (0..nd)
            .map(|d| argmax(&psi_a_tau.row(d).to_vec()))
            .collect();
        responses.push(per_d);
    }

    let mut values = Vec::with_capacity(nd);
    for d in 0..nd {
        let mut v = T::zero();
        for (tau, per_d) in responses.iter().enumerate() {
            v += psi_d[(d, per_d[d])] * types.attacker_prior[tau];
        }
        values.push(v);
    }
    let defense = argmax(&values);
    Ok(BneSequentialSolution {
        defense,
        defense_label: game.defender_actions().name(defense).to_string(),
        responses,
        value: values[defense],
    })
}

/// A pure Bayes-Nash equilibrium in strategy functions: one action per type
/// for each side, with the expected utility attained per type.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct BneStrategyProfile<T> {
    /// Defender action index per defender type.
    pub defender_strategy: Vec<usize>,
    /// Attacker action index per attacker type.
    pub attacker_strategy: Vec<usize>,
    pub defender_values: Vec<T>,
    pub attacker_values: Vec<T>,
}

pub const DEFAULT_BNE_CAP: u128 = 1_000_000;

struct BneTables<T> {
    /// psi_D[tau_D][(d, a)]
    psi_d: Vec<Array2<T>>,
    /// psi_A[tau_A][(d, a)]
    psi_a: Vec<Array2<T>>,
    prior_d: Vec<T>,
    prior_a: Vec<T>,
}

fn bne_tables<T: Real>(game: &DiscreteGame<T>, types: &TypeSpace<T>) -> SolveResult<BneTables<T>> {
    types.validate(game)?;
    let psi_a: Vec<Array2<T>> = types
        .attacker_overrides
        .iter()
        .map(|o| psi_from_tables(&o.util, &o.prob))
        .collect();
    let (psi_d, prior_d) = match (&types.defender_overrides, &types.defender_prior) {
        (Some(overrides), Some(prior)) => (
            overrides
                .iter()
                .map(|o| psi_from_tables(&o.util, &o.prob))
                .collect(),
            prior.clone(),
        ),
        _ => (vec![game.psi_matrix(Agent::Defender)?], vec![T::one()]),
    };
    Ok(BneTables {
        psi_d,
        psi_a,
        prior_d,
        prior_a: types.attacker_prior.clone(),
    })
}

fn strategies(n_actions: usize, n_types: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n_types {
        let mut next = Vec::with_capacity(out.len() * n_actions);
        for s in &out {
            for a in 0..n_actions {
                let mut s2 = s.clone();
                s2.push(a);
                next.push(s2);
            }
        }
        out = next;
    }
    out
}

/// Exhaustive search over pure strategy-function pairs; returns every pair
/// satisfying the per-type best-response inequalities. Deviations are
/// pointwise per type. Instances above `cap` strategy pairs are rejected.
pub fn bne_simultaneous<T: Real>(
    game: &DiscreteGame<T>,
    types: &TypeSpace<T>,
    cap: Option<u128>,
) -> SolveResult<Vec<BneStrategyProfile<T>>> {
    let cap = cap.unwrap_or(DEFAULT_BNE_CAP);
    let tables = bne_tables(game, types)?;
    let n_td = tables.prior_d.len();
    let n_ta = tables.prior_a.len();
    let nd = game.n_defenses();
    let na = game.n_attacks();

    let size = (nd as u128)
        .checked_pow(n_td as u32)
        .and_then(|x| (na as u128).checked_pow(n_ta as u32).and_then(|y| x.checked_mul(y)))
        .ok_or(SolveError::BneCapExceeded { size: u128::MAX, cap })?;
    if size > cap {
        return Err(SolveError::BneCapExceeded { size, cap });
    }

    // expected utility of defender type tau_D playing d against a(.)
    let eu_d = |tau_d: usize, d: usize, a_fn: &[usize]| -> T {
        let mut v = T::zero();
        for (tau_a, &a) in a_fn.iter().enumerate() {
            v += tables.psi_d[tau_d][(d, a)] * tables.prior_a[tau_a];
        }
        v
    };
    let eu_a = |tau_a: usize, a: usize, d_fn: &[usize]| -> T {
        let mut v = T::zero();
        for (tau_d, &d) in d_fn.iter().enumerate() {
            v += tables.psi_a[tau_a][(d, a)] * tables.prior_d[tau_d];
        }
        v
    };

    let mut out = Vec::new();
    for d_fn in strategies(nd, n_td) {
        for a_fn in strategies(na, n_ta) {
            let d_ok = (0..n_td).all(|tau| {
                let here = eu_d(tau, d_fn[tau], &a_fn);
                (0..nd).all(|d2| here >= eu_d(tau, d2, &a_fn))
            });
            if !d_ok {
                continue;
            }
            let a_ok = (0..n_ta).all(|tau| {
                let here = eu_a(tau, a_fn[tau], &d_fn);
                (0..na).all(|a2| here >= eu_a(tau, a2, &d_fn))
            });
            if !a_ok {
                continue;
            }
            out.push(BneStrategyProfile {
                defender_values: (0..n_td).map(|tau| eu_d(tau, d_fn[tau], &a_fn)).collect(),
                attacker_values: (0..n_ta).map(|tau| eu_a(tau, a_fn[tau], &d_fn)).collect(),
                defender_strategy: d_fn.clone(),
                attacker_strategy: a_fn,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Labels, TypeOverride};
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array3};

    /// Single-outcome game from a pair of payoff matrices.
    pub(crate) fn matrix_game(
        structure: GameStructure,
        pay_d: Array2<f64>,
        pay_a: Array2<f64>,
    ) -> DiscreteGame<f64> {
        let (nd, na) = pay_d.dim();
        let prob = Array3::from_elem((nd, na, 1), 1.0);
        let util_d = Array3::from_shape_fn((nd, na, 1), |(d, a, _)| pay_d[(d, a)]);
        let util_a = Array3::from_shape_fn((nd, na, 1), |(d, a, _)| pay_a[(d, a)]);
        DiscreteGame::new(
            structure,
            Labels::new((0..nd).map(|i| format!("d{i}")), "d").unwrap(),
            Labels::new((0..na).map(|i| format!("a{i}")), "a").unwrap(),
            Labels::new(["s0"], "s").unwrap(),
            prob.clone(),
            util_d,
            Some(prob),
            Some(util_a),
        )
        .unwrap()
    }

    #[test]
    fn prisoners_dilemma_has_unique_mutual_defection() {
        // action 1 = defect, dominant for both
        let pay_row = array![[3.0, 0.0], [5.0, 1.0]];
        let pay_col = array![[3.0, 5.0], [0.0, 1.0]];
        let g = matrix_game(GameStructure::Simultaneous, pay_row, pay_col);
        let eq = pure_nash(&g).unwrap();
        assert_eq!(eq.profiles, vec![(1, 1)]);
    }

    #[test]
    fn matching_pennies_has_no_pure_equilibrium() {
        let pay_row = array![[1.0, -1.0], [-1.0, 1.0]];
        let pay_col = array![[-1.0, 1.0], [1.0, -1.0]];
        let g = matrix_game(GameStructure::Simultaneous, pay_row, pay_col);
        let eq = pure_nash(&g).unwrap();
        assert!(eq.is_empty());
    }

    #[test]
    fn random_games_match_inequality_oracle() {
        use crate::rng::{sample_stream, Purpose};
        use rand::Rng;
        let mut rng = sample_stream(42, Purpose::External, 0);
        for _ in 0..100 {
            let pay_d = Array2::from_shape_fn((4, 4), |_| rng.random::<f64>());
            let pay_a = Array2::from_shape_fn((4, 4), |_| rng.random::<f64>());
            let g = matrix_game(GameStructure::Simultaneous, pay_d.clone(), pay_a.clone());
            let got = pure_nash(&g).unwrap().profiles;
            // oracle: direct double-loop best-response re-check
            let mut want = Vec::new();
            for d in 0..4 {
                for a in 0..4 {
                    let best_d = (0..4).map(|i| pay_d[(i, a)]).fold(f64::MIN, f64::max);
                    let best_a = (0..4).map(|j| pay_a[(d, j)]).fold(f64::MIN, f64::max);
                    if pay_d[(d, a)] >= best_d && pay_a[(d, a)] >= best_a {
                        want.push((d, a));
                    }
                }
            }
            assert_eq!(got, want);
        }
    }

    #[test]
    fn missing_attacker_tables_is_ck_required() {
        let g = matrix_game(
            GameStructure::Simultaneous,
            array![[1.0, 2.0], [3.0, 4.0]],
            array![[0.0, 0.0], [0.0, 0.0]],
        );
        let stripped = DiscreteGame::new(
            g.structure(),
            g.defender_actions().clone(),
            g.attacker_actions().clone(),
            g.outcomes().clone(),
            g.prob_table(Agent::Defender).unwrap().clone(),
            g.util_table(Agent::Defender).unwrap().clone(),
            None,
            None,
        )
        .unwrap();
        assert!(matches!(
            pure_nash(&stripped).unwrap_err(),
            SolveError::CommonKnowledgeRequired(_)
        ));
    }

    #[test]
    fn stackelberg_tie_breaks_to_first_attack() {
        // one defense makes all attacks equally bad for A and good for D
        let pay_d = array![[9.0, 9.0], [1.0, 2.0]];
        let pay_a = array![[0.5, 0.5], [3.0, 1.0]];
        let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d, pay_a);
        let sol = stackelberg_solve(&g).unwrap();
        assert_eq!(sol.defense, 0);
        assert_eq!(sol.responses[0], 0, "tie broken to first attack label");
    }

    #[test]
    fn stackelberg_matches_hand_enumeration() {
        // 2x2: enumerate all (d, response) pairs by hand
        let pay_d = array![[4.0, -1.0], [2.0, 3.0]];
        let pay_a = array![[1.0, 2.0], [5.0, 4.0]];
        // a*(d0) = a1 (2 > 1) -> psi_D = -1; a*(d1) = a0 (5 > 4) -> psi_D = 2
        let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d, pay_a);
        let sol = stackelberg_solve(&g).unwrap();
        assert_eq!(sol.defense, 1);
        assert_eq!(sol.responses, vec![1, 0]);
        assert_abs_diff_eq!(sol.value, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn indifferent_attacker_always_responds_with_first_action() {
        let pay_d = array![[1.0, 2.0], [5.0, 0.0]];
        let pay_a = array![[7.0, 7.0], [7.0, 7.0]];
        let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d, pay_a);
        let sol = stackelberg_solve(&g).unwrap();
        assert_eq!(sol.responses, vec![0, 0]);
    }

    #[test]
    fn stackelberg_invariant_under_affine_defender_utility() {
        use crate::rng::{sample_stream, Purpose};
        use rand::Rng;
        let mut rng = sample_stream(77, Purpose::External, 1);
        for _ in 0..25 {
            let pay_d = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>());
            let pay_a = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>());
            let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d.clone(), pay_a.clone());
            let transformed = matrix_game(
                GameStructure::SequentialDefendAttack,
                pay_d.mapv(|u| 2.5 * u + 7.0),
                pay_a,
            );
            assert_eq!(
                stackelberg_solve(&g).unwrap().defense,
                stackelberg_solve(&transformed).unwrap().defense
            );
        }
    }

    fn type_space_from_payoffs(game: &DiscreteGame<f64>, payoffs: &[Array2<f64>], prior: Vec<f64>) -> TypeSpace<f64> {
        let ns = game.n_outcomes();
        let overrides = payoffs
            .iter()
            .map(|p| TypeOverride {
                util: Array3::from_shape_fn((p.nrows(), p.ncols(), ns), |(d, a, _)| p[(d, a)]),
                prob: game.prob_table(Agent::Defender).unwrap().clone(),
            })
            .collect();
        TypeSpace {
            attacker_types: Labels::new((0..payoffs.len()).map(|i| format!("t{i}")), "types").unwrap(),
            attacker_prior: prior,
            attacker_overrides: overrides,
            defender_types: None,
            defender_prior: None,
            defender_overrides: None,
        }
    }

    #[test]
    fn single_type_bne_sequential_equals_stackelberg() {
        let pay_d = array![[4.0, -1.0], [2.0, 3.0]];
        let pay_a = array![[1.0, 2.0], [5.0, 4.0]];
        let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d, pay_a.clone());
        let ts = type_space_from_payoffs(&g, &[pay_a], vec![1.0]);
        let bne = bne_sequential(&g, &ts).unwrap();
        let st = stackelberg_solve(&g).unwrap();
        assert_eq!(bne.defense, st.defense);
        assert_abs_diff_eq!(bne.value, st.value, epsilon = 1e-15);
    }

    #[test]
    fn point_mass_prior_reduces_to_that_type() {
        let pay_d = array![[4.0, -1.0], [2.0, 3.0]];
        let t0 = array![[1.0, 2.0], [5.0, 4.0]];
        let t1 = array![[9.0, 0.0], [0.0, 9.0]];
        let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d, t0.clone());
        let two = type_space_from_payoffs(&g, &[t0.clone(), t1], vec![1.0, 0.0]);
        let one = type_space_from_payoffs(&g, &[t0], vec![1.0]);
        let a = bne_sequential(&g, &two).unwrap();
        let b = bne_sequential(&g, &one).unwrap();
        assert_eq!(a.defense, b.defense);
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-15);
    }

    #[test]
    fn three_type_solution_matches_direct_summation_oracle() {
        use crate::rng::{sample_stream, Purpose};
        use rand::Rng;
        let mut rng = sample_stream(5150, Purpose::External, 0);
        for _ in 0..20 {
            let pay_d = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>() * 10.0);
            let types: Vec<Array2<f64>> = (0..3)
                .map(|_| Array2::from_shape_fn((3, 3), |_| rng.random::<f64>() * 10.0))
                .collect();
            let mut prior = vec![rng.random::<f64>() + 0.1, rng.random::<f64>() + 0.1, rng.random::<f64>() + 0.1];
            let z: f64 = prior.iter().sum();
            prior.iter_mut().for_each(|p| *p /= z);
            let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d.clone(), types[0].clone());
            let ts = type_space_from_payoffs(&g, &types, prior.clone());
            let got = bne_sequential(&g, &ts).unwrap();
            // oracle: evaluate the type-weighted objective for every defense
            let mut best = (0usize, f64::MIN);
            for d in 0..3 {
                let mut v = 0.0;
                for (tau, pay_a) in types.iter().enumerate() {
                    let mut a_star = 0;
                    for a in 1..3 {
                        if pay_a[(d, a)] > pay_a[(d, a_star)] {
                            a_star = a;
                        }
                    }
                    v += prior[tau] * pay_d[(d, a_star)];
                }
                if v > best.1 {
                    best = (d, v);
                }
            }
            assert_eq!(got.defense, best.0);
            assert_abs_diff_eq!(got.value, best.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_prior_over_identical_types_equals_single_type() {
        let pay_d = array![[4.0, -1.0], [2.0, 3.0]];
        let t = array![[1.0, 2.0], [5.0, 4.0]];
        let g = matrix_game(GameStructure::SequentialDefendAttack, pay_d, t.clone());
        let many = type_space_from_payoffs(&g, &[t.clone(), t.clone(), t.clone()], vec![1.0 / 3.0; 3]);
        let one = type_space_from_payoffs(&g, &[t], vec![1.0]);
        let a = bne_sequential(&g, &many).unwrap();
        let b = bne_sequential(&g, &one).unwrap();
        assert_eq!(a.defense, b.defense);
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
    }

    #[test]
    fn bne_simultaneous_single_types_reduce_to_pure_nash() {
        let pay_d = array![[3.0, 0.0], [5.0, 1.0]];
        let pay_a = array![[3.0, 5.0], [0.0, 1.0]];
        let g = matrix_game(GameStructure::Simultaneous, pay_d, pay_a.clone());
        let ts = type_space_from_payoffs(&g, &[pay_a], vec![1.0]);
        let profiles = bne_simultaneous(&g, &ts, None).unwrap();
        let nash = pure_nash(&g).unwrap().profiles;
        let got: Vec<(usize, usize)> = profiles
            .iter()
            .map(|p| (p.defender_strategy[0], p.attacker_strategy[0]))
            .collect();
        assert_eq!(got, nash);
    }

    #[test]
    fn per_type_dominant_actions_form_unique_bne() {
        // two attacker types; each has a dominant action (a0 for t0, a1 for t1)
        let pay_d = array![[4.0, 1.0], [0.0, 3.0]];
        let t0 = array![[5.0, 0.0], [5.0, 0.0]];
        let t1 = array![[0.0, 5.0], [0.0, 5.0]];
        let g = matrix_game(GameStructure::Simultaneous, pay_d.clone(), t0.clone());
        let ts = type_space_from_payoffs(&g, &[t0, t1], vec![0.5, 0.5]);
        let profiles = bne_simultaneous(&g, &ts, None).unwrap();
        assert_eq!(profiles.len(), 1);
        assert_eq!(profiles[0].attacker_strategy, vec![0, 1]);
        // defender strictly prefers d0 against the 50/50 type mix
        assert_eq!(profiles[0].defender_strategy, vec![0]);
    }

    #[test]
    fn random_two_type_games_pass_inequality_recheck() {
        use crate::rng::{sample_stream, Purpose};
        use rand::Rng;
        let mut rng = sample_stream(31337, Purpose::External, 2);
        for _ in 0..25 {
            let pay_d = Array2::from_shape_fn((2, 2), |_| rng.random::<f64>());
            let t0 = Array2::from_shape_fn((2, 2), |_| rng.random::<f64>());
            let t1 = Array2::from_shape_fn((2, 2), |_| rng.random::<f64>());
            let g = matrix_game(GameStructure::Simultaneous, pay_d.clone(), t0.clone());
            let ts = type_space_from_payoffs(&g, &[t0.clone(), t1.clone()], vec![0.5, 0.5]);
            let profiles = bne_simultaneous(&g, &ts, None).unwrap();
            // oracle: re-verify the defining inequalities directly
            for p in &profiles {
                let d = p.defender_strategy[0];
                for d2 in 0..2 {
                    let here: f64 = 0.5 * pay_d[(d, p.attacker_strategy[0])]
                        + 0.5 * pay_d[(d, p.attacker_strategy[1])];
                    let alt: f64 = 0.5 * pay_d[(d2, p.attacker_strategy[0])]
                        + 0.5 * pay_d[(d2, p.attacker_strategy[1])];
                    assert!(here >= alt - 1e-12);
                }
                for (tau, pay) in [&t0, &t1].iter().enumerate() {
                    let a = p.attacker_strategy[tau];
                    for a2 in 0..2 {
                        assert!(pay[(d, a)] >= pay[(d, a2)] - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn bne_cap_is_enforced() {
        let pay_d = Array2::from_elem((4, 4), 1.0);
        let pay_a = Array2::from_elem((4, 4), 1.0);
        let g = matrix_game(GameStructure::Simultaneous, pay_d, pay_a.clone());
        let many: Vec<Array2<f64>> = (0..8).map(|_| pay_a.clone()).collect();
        let ts = type_space_from_payoffs(&g, &many, vec![0.125; 8]);
        let err = bne_simultaneous(&g, &ts, Some(1000)).unwrap_err();
        assert!(matches!(err, SolveError::BneCapExceeded { .. }));
    }
}
