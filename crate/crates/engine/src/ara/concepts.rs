//! Solution concepts and concept mixtures.
//!
//! A concept maps to a distribution over the opponent's actions; the
//! defender then best-responds to it. Mixtures combine component
//! distributions convexly, expressing uncertainty about which reasoning the
//! opponent actually uses.

use rayon::prelude::*;

use crate::error::{ModelError, SolveError, SolveResult};
use crate::game::{psi_from_tables, Agent, DiscreteGame};
use crate::gt::pure_nash_from_psi;
use crate::judgments::{GameShape, JudgmentModel};
use crate::report::{ActionDistribution, DecisionReport, Diagnostics};
use crate::rng::{sample_stream, Purpose};
use crate::scalar::{prob_tolerance, Real};

use super::level_k::{hierarchy_distribution, LevelKConfig};

/// How the defender believes the attacker selects his action.
#[derive(Debug, Clone)]
pub enum SolutionConcept<T> {
    /// Plays a known prior distribution over his own actions.
    NonStrategic { prior: Vec<T> },
    /// Reasons k levels deep, bottoming out in a non-strategic base.
    LevelK { config: LevelKConfig<T> },
    /// Plays his part of a pure Nash equilibrium of the game he perceives,
    /// sampled from the judgments (attacker tables plus mirror tables).
    /// Draws with no pure equilibrium are skipped and counted.
    NashSeeking,
    /// Dirichlet-multinomial prediction from observed play counts.
    FictitiousPlay { alphas: Vec<T>, counts: Vec<u64> },
    /// Convex mixture of concepts; weights must sum to 1.
    Mixture { components: Vec<(T, SolutionConcept<T>)> },
}

impl<T: Real> SolutionConcept<T> {
    pub fn name(&self) -> String {
        match self {
            Self::NonStrategic { .. } => "non_strategic".into(),
            Self::LevelK { config } => format!("level-{}", config.depth),
            Self::NashSeeking => "nash_seeking".into(),
            Self::FictitiousPlay { .. } => "fictitious_play".into(),
            Self::Mixture { .. } => "mixture".into(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::NonStrategic { prior } => {
                let sum: T = prior.iter().copied().sum();
                if prior.is_empty()
                    || prior.iter().any(|p| *p < T::zero())
                    || (sum - T::one()).abs() > prob_tolerance::<T>()
                {
                    return Err(ModelError::BadProbabilityRow {
                        context: "non-strategic prior".into(),
                        sum: sum.to_f64_lossy(),
                    });
                }
                Ok(())
            }
            Self::LevelK { config } => config.validate(),
            Self::NashSeeking => Ok(()),
            Self::FictitiousPlay { alphas, counts } => {
                if alphas.len() != counts.len() {
                    return Err(ModelError::ShapeConflict(format!(
                        "fictitious play history length {} vs alphas length {}",
                        counts.len(),
                        alphas.len()
                    )));
                }
                if alphas.is_empty() || alphas.iter().any(|a| *a <= T::zero()) {
                    return Err(ModelError::BadDistribution(
                        "fictitious play alphas must be > 0".into(),
                    ));
                }
                Ok(())
            }
            Self::Mixture { components } => {
                if components.is_empty() {
                    return Err(ModelError::BadConfig("empty mixture".into()));
                }
                let sum: T = components.iter().map(|(w, _)| *w).sum();
                if components.iter().any(|(w, _)| *w < T::zero())
                    || (sum - T::one()).abs() > prob_tolerance::<T>()
                {
                    return Err(ModelError::BadProbabilityRow {
                        context: "mixture weights".into(),
                        sum: sum.to_f64_lossy(),
                    });
                }
                for (_, c) in components {
                    c.validate()?;
                }
                Ok(())
            }
        }
    }
}

/// Dirichlet-multinomial posterior predictive over the next action:
/// `pi(a_i) = (alpha_i + x_i) / sum_j (alpha_j + x_j)`.
pub fn fictitious_play_predict<T: Real>(
    counts: &[u64],
    alphas: &[T],
    labels: &[String],
) -> SolveResult<ActionDistribution<T>> {
    if counts.len() != alphas.len() || counts.len() != labels.len() {
        return Err(ModelError::ShapeConflict(format!(
            "fictitious play lengths: counts {}, alphas {}, labels {}",
            counts.len(),
            alphas.len(),
            labels.len()
        ))
        .into());
    }
    if alphas.iter().any(|a| *a <= T::zero()) {
        return Err(ModelError::BadDistribution("fictitious play alphas must be > 0".into()).into());
    }
    let total: T = alphas
        .iter()
        .zip(counts)
        .map(|(a, x)| *a + T::c(*x as f64))
        .sum();
    let probs: Vec<T> = alphas
        .iter()
        .zip(counts)
        .map(|(a, x)| (*a + T::c(*x as f64)) / total)
        .collect();
    let observed: u64 = counts.iter().sum();
    Ok(ActionDistribution::new(
        labels.to_vec(),
        probs,
        observed.max(1),
    )?)
}

fn nash_seeking_distribution<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
    lane_base: u64,
) -> SolveResult<(ActionDistribution<T>, u64)> {
    let shape = GameShape::of_game(game);
    judgments.validate(&shape)?;
    let mirror = judgments.mirror.as_ref().ok_or_else(|| {
        SolveError::from(ModelError::JudgmentsAbsent(
            "mirror judgments (Nash-seeking needs the attacker's view of the defender)".into(),
        ))
    })?;
    let mirror_prob = mirror.prob.as_ref().ok_or_else(|| {
        SolveError::from(ModelError::JudgmentsAbsent(
            "mirror probability judgments".into(),
        ))
    })?;

    let picks: Vec<Option<usize>> = (0..k_samples)
        .into_par_iter()
        .map(|k| -> SolveResult<Option<usize>> {
            let mut rng = sample_stream(seed, Purpose::NashSeeking, lane_base + k);
            let (u_a, p_a) = judgments.attacker.sample_tables(&mut rng)?;
            let u_mir = mirror.util.sample(&mut rng)?;
            let p_mir = mirror_prob.sample(&mut rng)?;
            let psi_a = psi_from_tables(
                &u_a.into_owned().into_dimensionality().expect("3-d table"),
                &p_a.into_owned().into_dimensionality().expect("3-d table"),
            );
            let psi_d = psi_from_tables(
                &u_mir.into_dimensionality().expect("3-d table"),
                &p_mir.into_dimensionality().expect("3-d table"),
            );
            let eqs = pure_nash_from_psi(&psi_d, &psi_a);
            Ok(eqs.first().map(|&(_, a)| a))
        })
        .collect::<SolveResult<_>>()?;

    let mut counts = vec![0u64; game.n_attacks()];
    let mut skipped = 0u64;
    for p in picks {
        match p {
            Some(a) => counts[a] += 1,
            None => skipped += 1,
        }
    }
    if counts.iter().all(|c| *c == 0) {
        return Err(SolveError::AllSamplesSkipped { samples: k_samples });
    }
    Ok((
        ActionDistribution::from_counts(game.attacker_actions().names().to_vec(), &counts)?,
        skipped,
    ))
}

/// Evaluate a concept's distribution over the attacker's actions.
///
/// `lane_counter` allocates disjoint substream blocks to nested components,
/// in depth-first order, so mixture evaluation stays deterministic.
fn concept_distribution<T: Real>(
    game: &DiscreteGame<T>,
    concept: &SolutionConcept<T>,
    judgments: Option<&JudgmentModel<T>>,
    k_samples: u64,
    seed: u64,
    lane_counter: &mut u64,
    components_out: &mut Vec<(String, ActionDistribution<T>)>,
    skipped: &mut u64,
) -> SolveResult<ActionDistribution<T>> {
    let labels = game.attacker_actions().names();
    match concept {
        SolutionConcept::NonStrategic { prior } => {
            if prior.len() != labels.len() {
                return Err(ModelError::ShapeConflict(format!(
                    "non-strategic prior length {} vs {} attacks",
                    prior.len(),
                    labels.len()
                ))
                .into());
            }
            Ok(ActionDistribution::new(labels.to_vec(), prior.clone(), 1)?)
        }
        SolutionConcept::LevelK { config } => {
            config.validate()?;
            let shape = GameShape::of_game(game);
            let dist = hierarchy_distribution(
                &shape,
                &config.levels,
                Agent::Attacker,
                config.base_belief.as_deref(),
                config.samples_per_level,
                seed,
            )?;
            let samples = if config.levels.is_empty() {
                1
            } else {
                config.samples_per_level
            };
            Ok(ActionDistribution::new(labels.to_vec(), dist, samples)?)
        }
        SolutionConcept::NashSeeking => {
            let j = judgments.ok_or_else(|| {
                SolveError::from(ModelError::JudgmentsAbsent(
                    "judgment model (required by nash_seeking)".into(),
                ))
            })?;
            let lane_base = *lane_counter;
            *lane_counter += k_samples;
            let (dist, skip) = nash_seeking_distribution(game, j, k_samples, seed, lane_base)?;
            *skipped += skip;
            Ok(dist)
        }
        SolutionConcept::FictitiousPlay { alphas, counts } => {
            fictitious_play_predict(counts, alphas, labels)
        }
        SolutionConcept::Mixture { components } => {
            concept.validate()?;
            let mut dists = Vec::with_capacity(components.len());
            for (i, (w, c)) in components.iter().enumerate() {
                let dist = concept_distribution(
                    game,
                    c,
                    judgments,
                    k_samples,
                    seed,
                    lane_counter,
                    components_out,
                    skipped,
                )
                .map_err(|e| SolveError::ComponentFailed {
                    component: format!("{}#{i}", c.name()),
                    source: Box::new(e),
                })?;
                components_out.push((format!("{}#{i}", c.name()), dist.clone()));
                dists.push((*w, dist));
            }
            let refs: Vec<(T, &ActionDistribution<T>)> =
                dists.iter().map(|(w, d)| (*w, d)).collect();
            Ok(ActionDistribution::mix(&refs)?)
        }
    }
}

/// Public entry point for a single concept's attack distribution.
pub fn concept_attack_distribution<T: Real>(
    game: &DiscreteGame<T>,
    concept: &SolutionConcept<T>,
    judgments: Option<&JudgmentModel<T>>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<(ActionDistribution<T>, u64)> {
    concept.validate()?;
    let mut lane = 0u64;
    let mut components = Vec::new();
    let mut skipped = 0u64;
    let dist = concept_distribution(
        game,
        concept,
        judgments,
        k_samples,
        seed,
        &mut lane,
        &mut components,
        &mut skipped,
    )?;
    Ok((dist, skipped))
}

/// Solve the defender's problem under any concept: compute the concept's
/// attack distribution and best-respond to it.
pub fn solve_with_concept<T: Real>(
    game: &DiscreteGame<T>,
    concept: &SolutionConcept<T>,
    judgments: Option<&JudgmentModel<T>>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    concept.validate()?;
    let mut lane = 0u64;
    let mut components = Vec::new();
    let mut skipped = 0u64;
    let pi_hat = concept_distribution(
        game,
        concept,
        judgments,
        k_samples,
        seed,
        &mut lane,
        &mut components,
        &mut skipped,
    )?;
    let psi_d = game.psi_matrix(Agent::Defender)?;
    let (d, eu) = super::best_response_to_distribution(&psi_d, pi_hat.probs());
    let max_se = pi_hat.max_std_err();
    Ok(DecisionReport {
        concept: concept.name(),
        chosen: vec![game.defender_actions().name(d).to_string()],
        expected_utility: eu,
        attack_distribution: Some(pi_hat),
        conditional_distribution: None,
        policy: None,
        seed,
        samples: k_samples,
        diagnostics: Diagnostics {
            skipped_samples: skipped,
            max_std_err: Some(max_se),
            components: if components.is_empty() {
                None
            } else {
                Some(components)
            },
            ..Diagnostics::default()
        },
    })
}

/// Spec-level mixture entry point: `pi_mix = sum_i w_i pi_i`, then the
/// defender maximizes against the mixture. Component distributions are
/// listed in the report diagnostics.
pub fn mixture_solve<T: Real>(
    game: &DiscreteGame<T>,
    components: Vec<(T, SolutionConcept<T>)>,
    judgments: Option<&JudgmentModel<T>>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    solve_with_concept(
        game,
        &SolutionConcept::Mixture { components },
        judgments,
        k_samples,
        seed,
    )
}
