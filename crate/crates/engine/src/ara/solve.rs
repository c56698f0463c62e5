//! ARA solvers for each game structure.

use ndarray::{Array3, Axis};
use rayon::prelude::*;

use crate::error::{ModelError, SolveError, SolveResult};
use crate::game::{
    psi_cell, Agent, DefendAttackDefendGame, DiscreteGame, GameStructure, PrivateInfoGame,
};
use crate::judgments::{GameShape, JudgmentModel, MirrorModel, RandomBeliefSpec};
use crate::numeric::argmax;
use crate::report::{
    ActionDistribution, ConditionalActionDistribution, DecisionReport, Diagnostics, PolicyEntry,
};
use crate::rng::{sample_stream, Purpose};
use crate::scalar::Real;

use super::estimate::{estimate_conditional_attack_distribution, estimate_core};
use super::best_response_to_distribution;

fn belief_note<T: Real>(judgments: &JudgmentModel<T>, notes: &mut Vec<String>) {
    if matches!(judgments.belief, RandomBeliefSpec::Dirichlet { .. }) {
        notes.push(
            "attacker belief sampled independently of the utility/probability judgments".into(),
        );
    }
}

/// Simultaneous-game ARA: `d* = argmax_d sum_a psi_D(d,a) pi_hat(a)` with
/// `pi_hat` from [`estimate_attack_distribution`](super::estimate_attack_distribution).
pub fn ara_simultaneous<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    let pi_hat = estimate_core(
        &GameShape::of_game(game),
        game.attacker_actions().names(),
        judgments,
        k_samples,
        seed,
    )?;
    let psi_d = game.psi_matrix(Agent::Defender)?;
    let (d, eu) = best_response_to_distribution(&psi_d, pi_hat.probs());
    let mut notes = Vec::new();
    belief_note(judgments, &mut notes);
    let max_se = pi_hat.max_std_err();
    Ok(DecisionReport {
        concept: "ara_simultaneous".into(),
        chosen: vec![game.defender_actions().name(d).to_string()],
        expected_utility: eu,
        attack_distribution: Some(pi_hat),
        conditional_distribution: None,
        policy: None,
        seed,
        samples: k_samples,
        diagnostics: Diagnostics {
            max_std_err: Some(max_se),
            notes,
            ..Diagnostics::default()
        },
    })
}

/// Sequential defend-attack ARA: estimate `p_hat(a|d)` by Monte Carlo and
/// pick `d* = argmax_d sum_a psi_D(d,a) p_hat(a|d)`.
pub fn ara_sequential<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    if game.structure() != GameStructure::SequentialDefendAttack {
        return Err(ModelError::StructureMismatch {
            expected: GameStructure::SequentialDefendAttack.name().into(),
            got: game.structure().name().into(),
        }
        .into());
    }
    let p_hat = estimate_conditional_attack_distribution(game, judgments, k_samples, seed)?;
    let psi_d = game.psi_matrix(Agent::Defender)?;
    let nd = game.n_defenses();
    let values: Vec<T> = (0..nd)
        .map(|d| {
            let row = p_hat.row(d);
            let mut v = T::zero();
            for (a, p) in row.probs().iter().enumerate() {
                v += psi_d[(d, a)] * *p;
            }
            v
        })
        .collect();
    let d = argmax(&values);
    let max_se = p_hat
        .rows()
        .iter()
        .map(|r| r.max_std_err())
        .fold(T::zero(), |acc, s| acc.max(s));
    Ok(DecisionReport {
        concept: "ara_sequential".into(),
        chosen: vec![game.defender_actions().name(d).to_string()],
        expected_utility: values[d],
        attack_distribution: None,
        conditional_distribution: Some(p_hat),
        policy: None,
        seed,
        samples: k_samples,
        diagnostics: Diagnostics {
            max_std_err: Some(max_se),
            ..Diagnostics::default()
        },
    })
}

fn require_mirror<'a, T>(judgments: &'a JudgmentModel<T>, what: &str) -> SolveResult<&'a MirrorModel<T>> {
    judgments
        .mirror
        .as_ref()
        .ok_or_else(|| ModelError::JudgmentsAbsent(format!("mirror judgments ({what})")).into())
}

/// Attack-defend ARA: the attacker moves first, the defender observes and
/// responds. Returns the contingency plan `d*(a)` plus the estimated
/// distribution over opening attacks, in which the attacker anticipates the
/// defender's response through the sampled mirror judgments.
pub fn ara_attack_defend<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    if game.structure() != GameStructure::SequentialAttackDefend {
        return Err(ModelError::StructureMismatch {
            expected: GameStructure::SequentialAttackDefend.name().into(),
            got: game.structure().name().into(),
        }
        .into());
    }
    if k_samples == 0 {
        return Err(ModelError::BadConfig("sample count K must be >= 1".into()).into());
    }
    let shape = GameShape::of_game(game);
    judgments.validate(&shape)?;
    let mirror = require_mirror(judgments, "defender response anticipation")?;
    let mirror_prob = mirror.prob.as_ref().ok_or_else(|| {
        SolveError::from(ModelError::JudgmentsAbsent(
            "mirror probability judgments".into(),
        ))
    })?;

    let psi_d = game.psi_matrix(Agent::Defender)?;
    let (nd, na) = psi_d.dim();

    // exact contingency plan from the defender's own tables
    let plan: Vec<usize> = (0..na)
        .map(|a| argmax(&(0..nd).map(|d| psi_d[(d, a)]).collect::<Vec<_>>()))
        .collect();

    // his view: respond per attack under mirror tables, then attack best
    let picks: Vec<usize> = (0..k_samples)
        .into_par_iter()
        .map(|k| -> SolveResult<usize> {
            let mut rng = sample_stream(seed, Purpose::AttackDefend, k);
            let (u_a, p_a) = judgments.attacker.sample_tables(&mut rng)?;
            let u_mir = mirror.util.sample(&mut rng)?;
            let p_mir = mirror_prob.sample(&mut rng)?;
            let u_a: Array3<T> = u_a.into_owned().into_dimensionality().expect("3-d table");
            let p_a: Array3<T> = p_a.into_owned().into_dimensionality().expect("3-d table");
            let u_mir: Array3<T> = u_mir.into_dimensionality().expect("3-d table");
            let p_mir: Array3<T> = p_mir.into_dimensionality().expect("3-d table");
            let mut best = (T::neg_infinity(), 0usize);
            for a in 0..na {
                // anticipated defense under this draw
                let mut d_hat = 0usize;
                let mut d_val = T::neg_infinity();
                for d in 0..nd {
                    let v = psi_cell(
                        u_mir.index_axis(Axis(0), d).index_axis(Axis(0), a),
                        p_mir.index_axis(Axis(0), d).index_axis(Axis(0), a),
                    );
                    if v > d_val {
                        d_val = v;
                        d_hat = d;
                    }
                }
                let v = psi_cell(
                    u_a.index_axis(Axis(0), d_hat).index_axis(Axis(0), a),
                    p_a.index_axis(Axis(0), d_hat).index_axis(Axis(0), a),
                );
                if v > best.0 {
                    best = (v, a);
                }
            }
            Ok(best.1)
        })
        .collect::<SolveResult<_>>()?;

    let mut counts = vec![0u64; na];
    for p in picks {
        counts[p] += 1;
    }
    let pi_hat = ActionDistribution::<T>::from_counts(game.attacker_actions().names().to_vec(), &counts)?;

    let mut eu = T::zero();
    for a in 0..na {
        eu += pi_hat.probs()[a] * psi_d[(plan[a], a)];
    }
    let policy: Vec<PolicyEntry> = (0..na)
        .map(|a| PolicyEntry {
            context: game.attacker_actions().name(a).to_string(),
            action: game.defender_actions().name(plan[a]).to_string(),
        })
        .collect();
    let max_se = pi_hat.max_std_err();
    Ok(DecisionReport {
        concept: "ara_attack_defend".into(),
        chosen: policy.iter().map(|p| p.action.clone()).collect(),
        expected_utility: eu,
        attack_distribution: Some(pi_hat),
        conditional_distribution: None,
        policy: Some(policy),
        seed,
        samples: k_samples,
        diagnostics: Diagnostics {
            max_std_err: Some(max_se),
            ..Diagnostics::default()
        },
    })
}

/// Private-information ARA: the attacker never observes the signal, so his
/// anticipated view of the defender is the marginal one; the defender then
/// best-responds separately for each observed signal.
pub fn ara_private_info<T: Real>(
    game: &PrivateInfoGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    let shape = GameShape::of_private_info(game);
    let pi_hat = estimate_core(
        &shape,
        game.attacker_actions().names(),
        judgments,
        k_samples,
        seed,
    )?;

    let n_signals = game.signals().len();
    let mut policy = Vec::with_capacity(n_signals);
    let mut chosen = Vec::with_capacity(n_signals);
    let mut eu = T::zero();
    for v in 0..n_signals {
        let slice = game.slice(v)?;
        let psi_d = slice.psi_matrix(Agent::Defender)?;
        let (d, value) = best_response_to_distribution(&psi_d, pi_hat.probs());
        eu += game.signal_prior()[v] * value;
        chosen.push(game.defender_actions().name(d).to_string());
        policy.push(PolicyEntry {
            context: game.signals().name(v).to_string(),
            action: game.defender_actions().name(d).to_string(),
        });
    }
    let mut notes = Vec::new();
    belief_note(judgments, &mut notes);
    let max_se = pi_hat.max_std_err();
    Ok(DecisionReport {
        concept: "ara_private_info".into(),
        chosen,
        expected_utility: eu,
        attack_distribution: Some(pi_hat),
        conditional_distribution: None,
        policy: Some(policy),
        seed,
        samples: k_samples,
        diagnostics: Diagnostics {
            max_std_err: Some(max_se),
            notes,
            ..Diagnostics::default()
        },
    })
}

/// Defend-attack-defend ARA. The defender's mitigation policy
/// `d2*(d1, a, s) = argmax_{d2} u_D(d1, a, s, d2)` is exact; the attacker
/// anticipates her mitigation through the sampled mirror utilities within
/// each draw, yielding `p_hat(a|d1)`; the opening defense maximizes
/// `sum_a p_hat(a|d1) sum_s p_D(s|d1,a) u_D(d1, a, s, d2*)`.
pub fn ara_defend_attack_defend<T: Real>(
    game: &DefendAttackDefendGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    if k_samples == 0 {
        return Err(ModelError::BadConfig("sample count K must be >= 1".into()).into());
    }
    let shape = GameShape::of_defend_attack_defend(game);
    judgments.validate(&shape)?;
    let mirror = require_mirror(judgments, "mitigation anticipation")?;

    let nd1 = game.defense_actions().len();
    let na = game.attacker_actions().len();
    let ns = game.outcomes().len();
    let nd2 = game.mitigation_actions().len();
    let u_d = game.util_d();
    let p_d = game.prob_d();

    // exact mitigation policy
    let mut mitigation = vec![vec![vec![0usize; ns]; na]; nd1];
    for d1 in 0..nd1 {
        for a in 0..na {
            for s in 0..ns {
                let vals: Vec<T> = (0..nd2).map(|d2| u_d[(d1, a, s, d2)]).collect();
                mitigation[d1][a][s] = argmax(&vals);
            }
        }
    }

    let maps: Vec<Vec<usize>> = (0..k_samples)
        .into_par_iter()
        .map(|k| -> SolveResult<Vec<usize>> {
            let mut rng = sample_stream(seed, Purpose::DefendAttackDefend, k);
            let (u_a, p_a) = judgments.attacker.sample_tables(&mut rng)?;
            let u_mir = mirror.util.sample(&mut rng)?;
            let mut response = Vec::with_capacity(nd1);
            for d1 in 0..nd1 {
                let mut best = (T::neg_infinity(), 0usize);
                for a in 0..na {
                    let mut v = T::zero();
                    for s in 0..ns {
                        // his anticipated mitigation under this draw
                        let mut d2_hat = 0usize;
                        for d2 in 1..nd2 {
                            if u_mir[[d1, a, s, d2]] > u_mir[[d1, a, s, d2_hat]] {
                                d2_hat = d2;
                            }
                        }
                        v += p_a[[d1, a, s]] * u_a[[d1, a, s, d2_hat]];
                    }
                    if v > best.0 {
                        best = (v, a);
                    }
                }
                response.push(best.1);
            }
            Ok(response)
        })
        .collect::<SolveResult<_>>()?;

    let mut counts = vec![vec![0u64; na]; nd1];
    for map in maps {
        for (d1, a) in map.into_iter().enumerate() {
            counts[d1][a] += 1;
        }
    }
    let rows = counts
        .iter()
        .map(|c| ActionDistribution::<T>::from_counts(game.attacker_actions().names().to_vec(), c))
        .collect::<Result<Vec<_>, _>>()?;
    let p_hat =
        ConditionalActionDistribution::new(game.defense_actions().names().to_vec(), rows)?;

    let values: Vec<T> = (0..nd1)
        .map(|d1| {
            let mut v = T::zero();
            for a in 0..na {
                let mut inner = T::zero();
                for s in 0..ns {
                    inner += p_d[(d1, a, s)] * u_d[(d1, a, s, mitigation[d1][a][s])];
                }
                v += p_hat.row(d1).probs()[a] * inner;
            }
            v
        })
        .collect();
    let d1_star = argmax(&values);

    let mut policy = Vec::new();
    for d1 in 0..nd1 {
        for a in 0..na {
            for s in 0..ns {
                policy.push(PolicyEntry {
                    context: format!(
                        "{}|{}|{}",
                        game.defense_actions().name(d1),
                        game.attacker_actions().name(a),
                        game.outcomes().name(s)
                    ),
                    action: game
                        .mitigation_actions()
                        .name(mitigation[d1][a][s])
                        .to_string(),
                });
            }
        }
    }
    let max_se = p_hat
        .rows()
        .iter()
        .map(|r| r.max_std_err())
        .fold(T::zero(), |acc, s| acc.max(s));
    Ok(DecisionReport {
        concept: "ara_defend_attack_defend".into(),
        chosen: vec![game.defense_actions().name(d1_star).to_string()],
        expected_utility: values[d1_star],
        attack_distribution: None,
        conditional_distribution: Some(p_hat),
        policy: Some(policy),
        seed,
        samples: k_samples,
        diagnostics: Diagnostics {
            max_std_err: Some(max_se),
            ..Diagnostics::default()
        },
    })
}
