//! ARA against several adversaries.
//!
//! Each opponent is modeled through their own two-agent game and judgment
//! model; the supported agent's utility is a table over her action and the
//! joint opponent profile. Under conditional independence the joint
//! distribution is the product of per-opponent level-1 estimates; otherwise
//! all opponents are sampled jointly per draw and joint profiles tallied.

use ndarray::ArrayD;
use rayon::prelude::*;

use crate::error::{ModelError, SolveError, SolveResult};
use crate::game::{DiscreteGame, Labels};
use crate::judgments::{GameShape, JudgmentModel};
use crate::numeric::argmax;
use crate::report::{ActionDistribution, DecisionReport, Diagnostics};
use crate::rng::{sample_stream, Purpose};
use crate::scalar::Real;

use super::estimate::{resolve_belief, PsiSampler};

pub const DEFAULT_JOINT_CAP: u128 = 1_000_000;

/// One opponent: the two-agent game projecting the interaction with them
/// (defender side must match the supported agent's actions), plus the
/// judgments driving their level-1 analysis.
#[derive(Debug, Clone)]
pub struct OpponentModel<T> {
    pub game: DiscreteGame<T>,
    pub judgments: JudgmentModel<T>,
}

#[derive(Debug, Clone)]
pub struct MultiAgentProblem<T> {
    pub own_actions: Labels,
    pub opponents: Vec<OpponentModel<T>>,
    /// Utility over `(own action, opponent_1 action, ..., opponent_n action)`.
    pub util: ArrayD<T>,
    pub cap: Option<u128>,
}

impl<T: Real> MultiAgentProblem<T> {
    fn validate(&self) -> SolveResult<(Vec<usize>, u128)> {
        if self.opponents.is_empty() {
            return Err(ModelError::BadConfig("at least one opponent required".into()).into());
        }
        let mut dims = vec![self.own_actions.len()];
        for o in &self.opponents {
            if o.game.defender_actions().names() != self.own_actions.names() {
                return Err(ModelError::ShapeConflict(
                    "opponent game defender actions differ from own actions".into(),
                )
                .into());
            }
            o.judgments.validate(&GameShape::of_game(&o.game))?;
            dims.push(o.game.n_attacks());
        }
        if self.util.shape() != dims.as_slice() {
            return Err(ModelError::BadTableShape {
                name: "multi-agent utility".into(),
                got: self.util.shape().to_vec(),
                expected: dims,
            }
            .into());
        }
        let joint: u128 = self.opponents.iter().map(|o| o.game.n_attacks() as u128).product();
        let cap = self.cap.unwrap_or(DEFAULT_JOINT_CAP);
        if joint > cap {
            return Err(SolveError::JointSpaceCapExceeded { size: joint, cap });
        }
        Ok((dims, joint))
    }
}

fn joint_labels<T: Real>(problem: &MultiAgentProblem<T>) -> Vec<String> {
    let mut combos: Vec<String> = vec![String::new()];
    for o in &problem.opponents {
        let mut next = Vec::with_capacity(combos.len() * o.game.n_attacks());
        for c in &combos {
            for a in o.game.attacker_actions().names() {
                next.push(if c.is_empty() {
                    a.clone()
                } else {
                    format!("{c}+{a}")
                });
            }
        }
        combos = next;
    }
    combos
}

/// `a1* = argmax over own actions of sum_j u(a1, a_{-1}^j) pi_hat(a_{-1}^j)`.
pub fn multi_agent_ara<T: Real>(
    problem: &MultiAgentProblem<T>,
    independence: bool,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    if k_samples == 0 {
        return Err(ModelError::BadConfig("sample count K must be >= 1".into()).into());
    }
    let (_, joint) = problem.validate()?;
    let joint = joint as usize;
    let n_opp = problem.opponents.len();
    let sizes: Vec<usize> = problem.opponents.iter().map(|o| o.game.n_attacks()).collect();

    let joint_probs: Vec<T> = if independence {
        // product of per-opponent level-1 estimates
        let mut marginals = Vec::with_capacity(n_opp);
        for (i, o) in problem.opponents.iter().enumerate() {
            let shape = GameShape::of_game(&o.game);
            let resolved = resolve_belief(&shape, &o.judgments.belief, seed)?;
            let sampler = PsiSampler::new(&o.judgments.attacker);
            let lane_base = (i as u64) * k_samples;
            let picks: Vec<usize> = (0..k_samples)
                .into_par_iter()
                .map(|k| -> SolveResult<usize> {
                    let mut rng = sample_stream(seed, Purpose::MultiAgent, lane_base + k);
                    let psi = sampler.sample(&mut rng)?;
                    let belief = match &resolved {
                        Some(b) => b.clone(),
                        None => o.judgments.belief.sample(shape.n_defenses, &mut rng)?,
                    };
                    Ok(super::column_best_response(psi.as_ref(), &belief).0)
                })
                .collect::<SolveResult<_>>()?;
            let mut counts = vec![0u64; sizes[i]];
            for p in picks {
                counts[p] += 1;
            }
            let k = T::c(k_samples as f64);
            marginals.push(
                counts
                    .into_iter()
                    .map(|c| T::c(c as f64) / k)
                    .collect::<Vec<T>>(),
            );
        }
        let mut probs = vec![T::one(); joint];
        for (j, p) in probs.iter_mut().enumerate() {
            let mut rem = j;
            for i in (0..n_opp).rev() {
                let idx = rem % sizes[i];
                rem /= sizes[i];
                *p *= marginals[i][idx];
            }
        }
        probs
    } else {
        // joint sampling: one profile per draw
        let resolved: Vec<Option<Vec<T>>> = problem
            .opponents
            .iter()
            .map(|o| resolve_belief(&GameShape::of_game(&o.game), &o.judgments.belief, seed))
            .collect::<SolveResult<_>>()?;
        let samplers: Vec<PsiSampler<'_, T>> = problem
            .opponents
            .iter()
            .map(|o| PsiSampler::new(&o.judgments.attacker))
            .collect();
        let profiles: Vec<usize> = (0..k_samples)
            .into_par_iter()
            .map(|k| -> SolveResult<usize> {
                let mut combo = 0usize;
                for i in 0..n_opp {
                    let o = &problem.opponents[i];
                    let lane_base = (i as u64) * k_samples;
                    let mut rng = sample_stream(seed, Purpose::MultiAgent, lane_base + k);
                    let psi = samplers[i].sample(&mut rng)?;
                    let belief = match &resolved[i] {
                        Some(b) => b.clone(),
                        None => o
                            .judgments
                            .belief
                            .sample(o.game.n_defenses(), &mut rng)?,
                    };
                    let pick = super::column_best_response(psi.as_ref(), &belief).0;
                    combo = combo * sizes[i] + pick;
                }
                Ok(combo)
            })
            .collect::<SolveResult<_>>()?;
        let mut counts = vec![0u64; joint];
        for p in profiles {
            counts[p] += 1;
        }
        let k = T::c(k_samples as f64);
        counts.into_iter().map(|c| T::c(c as f64) / k).collect()
    };

    let values: Vec<T> = (0..problem.own_actions.len())
        .map(|d| {
            let mut v = T::zero();
            for (j, p) in joint_probs.iter().enumerate() {
                let mut idx = vec![0usize; n_opp + 1];
                idx[0] = d;
                let mut rem = j;
                for i in (0..n_opp).rev() {
                    idx[i + 1] = rem % sizes[i];
                    rem /= sizes[i];
                }
                v += problem.util[idx.as_slice()] * *p;
            }
            v
        })
        .collect();
    let d = argmax(&values);

    let pi_hat = ActionDistribution::new(joint_labels(problem), joint_probs, k_samples)?;
    let max_se = pi_hat.max_std_err();
    Ok(DecisionReport {
        concept: if independence {
            "multi_agent_independent".into()
        } else {
            "multi_agent_joint".into()
        },
        chosen: vec![problem.own_actions.name(d).to_string()],
        expected_utility: values[d],
        attack_distribution: Some(pi_hat),
        conditional_distribution: None,
        policy: None,
        seed,
        samples: k_samples,
        diagnostics: Diagnostics {
            max_std_err: Some(max_se),
            ..Diagnostics::default()
        },
    })
}
