//! Empirical-frequency estimation of the opponent-action distribution.

use std::borrow::Cow;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{ModelError, SolveResult};
use crate::game::{psi_from_tables, DiscreteGame};
use crate::judgments::{AttackerRandomModel, GameShape, JudgmentModel, RandomBeliefSpec};
use crate::numeric::argmax;
use crate::report::{ActionDistribution, ConditionalActionDistribution};
use crate::rng::{sample_stream, Purpose};
use crate::scalar::Real;

/// How attacker indifference within a sample is resolved. The default is
/// the lowest action index, which keeps runs reproducible across
/// platforms; the randomized variant draws uniformly among the tied
/// actions from the sample's own substream (still deterministic per seed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestIndex,
    Randomized,
}

pub(crate) fn argmax_with_ties<T: Real, R: Rng>(
    values: &[T],
    ties: TieBreak,
    rng: &mut R,
) -> usize {
    match ties {
        TieBreak::LowestIndex => argmax(values),
        TieBreak::Randomized => {
            let best = values[argmax(values)];
            let tied: Vec<usize> = values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == best)
                .map(|(i, _)| i)
                .collect();
            if tied.len() == 1 {
                tied[0]
            } else {
                tied[rng.random_range(0..tied.len())]
            }
        }
    }
}

/// Prepared per-sample access to the attacker's random expected utility.
/// Type mixtures draw a component index against precomputed psi matrices;
/// factored models sample tables and reduce them.
pub(crate) struct PsiSampler<'a, T> {
    model: &'a AttackerRandomModel<T>,
    per_type_psi: Option<Vec<Array2<T>>>,
}

impl<'a, T: Real> PsiSampler<'a, T> {
    pub fn new(model: &'a AttackerRandomModel<T>) -> Self {
        let per_type_psi = match model {
            AttackerRandomModel::TypeMixture { utils, probs, .. } => Some(
                utils
                    .iter()
                    .zip(probs)
                    .map(|(u, p)| {
                        psi_from_tables(
                            &u.clone().into_dimensionality().expect("3-d util table"),
                            &p.clone().into_dimensionality().expect("3-d prob table"),
                        )
                    })
                    .collect(),
            ),
            AttackerRandomModel::Factored { .. } => None,
        };
        PsiSampler {
            model,
            per_type_psi,
        }
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> SolveResult<Cow<'_, Array2<T>>> {
        match (self.model, &self.per_type_psi) {
            (AttackerRandomModel::TypeMixture { prior, .. }, Some(psis)) => {
                let u = T::c(rng.random::<f64>());
                let mut acc = T::zero();
                let mut pick = prior.len() - 1;
                for (i, p) in prior.iter().enumerate() {
                    acc += *p;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                Ok(Cow::Borrowed(&psis[pick]))
            }
            (AttackerRandomModel::Factored { .. }, _) => {
                let (u, p) = self.model.sample_tables(rng)?;
                Ok(Cow::Owned(psi_from_tables(
                    &u.into_owned().into_dimensionality().expect("3-d util table"),
                    &p.into_owned().into_dimensionality().expect("3-d prob table"),
                )))
            }
            _ => unreachable!("sampler matches model kind"),
        }
    }
}

/// Resolve a `Recursive` belief to a concrete distribution over defenses;
/// other belief forms pass through untouched as per-sample specs.
pub(crate) fn resolve_belief<T: Real>(
    shape: &GameShape,
    belief: &RandomBeliefSpec<T>,
    seed: u64,
) -> SolveResult<Option<Vec<T>>> {
    match belief {
        RandomBeliefSpec::Recursive { config } => {
            let dist = super::level_k::hierarchy_distribution(
                shape,
                &config.levels,
                crate::game::Agent::Defender,
                config.base_belief.as_deref(),
                config.samples_per_level,
                seed,
            )?;
            Ok(Some(dist))
        }
        _ => Ok(None),
    }
}

/// Core simultaneous-style estimator over an explicit shape: per sample,
/// best response to the sampled belief; frequencies over `k_samples`.
pub(crate) fn estimate_core<T: Real>(
    shape: &GameShape,
    attack_labels: &[String],
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<ActionDistribution<T>> {
    estimate_core_with_ties(
        shape,
        attack_labels,
        judgments,
        k_samples,
        seed,
        TieBreak::LowestIndex,
    )
}

pub(crate) fn estimate_core_with_ties<T: Real>(
    shape: &GameShape,
    attack_labels: &[String],
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
    ties: TieBreak,
) -> SolveResult<ActionDistribution<T>> {
    if k_samples == 0 {
        return Err(ModelError::BadConfig("sample count K must be >= 1".into()).into());
    }
    judgments.validate(shape)?;
    let resolved = resolve_belief(shape, &judgments.belief, seed)?;
    let sampler = PsiSampler::new(&judgments.attacker);
    let n_defenses = shape.n_defenses;

    let picks: Vec<usize> = (0..k_samples)
        .into_par_iter()
        .map(|k| -> SolveResult<usize> {
            let mut rng = sample_stream(seed, Purpose::Estimate, k);
            let psi = sampler.sample(&mut rng)?;
            let belief = match &resolved {
                Some(b) => b.clone(),
                None => judgments.belief.sample(n_defenses, &mut rng)?,
            };
            let (nd, na) = psi.dim();
            debug_assert_eq!(nd, belief.len());
            let objective: Vec<T> = (0..na)
                .map(|a| {
                    let mut v = T::zero();
                    for d in 0..nd {
                        v += psi.as_ref()[(d, a)] * belief[d];
                    }
                    v
                })
                .collect();
            Ok(argmax_with_ties(&objective, ties, &mut rng))
        })
        .collect::<SolveResult<_>>()?;

    let mut counts = vec![0u64; attack_labels.len()];
    for p in picks {
        counts[p] += 1;
    }
    Ok(ActionDistribution::from_counts(
        attack_labels.to_vec(),
        &counts,
    )?)
}

/// Estimate the attack distribution `pi_hat(a)`: for each draw from the
/// judgments, the attacker's optimal action against his sampled belief;
/// returned as empirical frequencies with per-action standard errors.
/// In-sample ties break to the lowest action index.
pub fn estimate_attack_distribution<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<ActionDistribution<T>> {
    estimate_core(
        &GameShape::of_game(game),
        game.attacker_actions().names(),
        judgments,
        k_samples,
        seed,
    )
}

/// [`estimate_attack_distribution`] with an explicit tie-break rule.
pub fn estimate_attack_distribution_with_ties<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
    ties: TieBreak,
) -> SolveResult<ActionDistribution<T>> {
    estimate_core_with_ties(
        &GameShape::of_game(game),
        game.attacker_actions().names(),
        judgments,
        k_samples,
        seed,
        ties,
    )
}

/// Estimate `p_hat(a|d)` for sequential defend-attack games. One judgment
/// draw per sample yields the whole response map: the attacker observes `d`,
/// so his belief plays no role and the best response is computed per
/// defense from the same sampled tables.
pub fn estimate_conditional_attack_distribution<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<ConditionalActionDistribution<T>> {
    if k_samples == 0 {
        return Err(ModelError::BadConfig("sample count K must be >= 1".into()).into());
    }
    let shape = GameShape::of_game(game);
    judgments.validate(&shape)?;
    let sampler = PsiSampler::new(&judgments.attacker);
    let nd = game.n_defenses();

    let maps: Vec<Vec<usize>> = (0..k_samples)
        .into_par_iter()
        .map(|k| -> SolveResult<Vec<usize>> {
            let mut rng = sample_stream(seed, Purpose::Estimate, k);
            let psi = sampler.sample(&mut rng)?;
            Ok((0..nd)
                .map(|d| argmax(&psi.row(d).to_vec()))
                .collect())
        })
        .collect::<SolveResult<_>>()?;

    let mut counts = vec![vec![0u64; game.n_attacks()]; nd];
    for map in maps {
        for (d, a) in map.into_iter().enumerate() {
            counts[d][a] += 1;
        }
    }
    let rows = counts
        .into_iter()
        .map(|c| ActionDistribution::from_counts(game.attacker_actions().names().to_vec(), &c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConditionalActionDistribution::new(
        game.defender_actions().names().to_vec(),
        rows,
    )?)
}
