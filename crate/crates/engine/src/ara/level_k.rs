//! Level-k recursion.
//!
//! The hierarchy alternates agents downward from the decision-maker: a
//! level-k defender models a level-(k-1) attacker, who models a level-(k-2)
//! defender, and so on. The level-0 agent is non-strategic and simply plays
//! the base belief (uniform unless supplied). Each modeled level `m >= 1`
//! carries its own random utility and probability judgments; the
//! distribution over that agent's actions is tallied by Monte Carlo best
//! response against the level below.

use rayon::prelude::*;

use crate::error::{ModelError, SolveResult};
use crate::game::{psi_from_tables, Agent, DiscreteGame};
use crate::judgments::{GameShape, RandomProbabilitySpec, RandomUtilitySpec};
use crate::report::{ActionDistribution, DecisionReport, Diagnostics};
use crate::rng::{sample_stream, Purpose};
use crate::scalar::{prob_tolerance, Real};

/// Judgments for one modeled level of the hierarchy: the random utility and
/// outcome-probability tables ascribed to the agent reasoning at that level.
#[derive(Debug, Clone)]
pub struct LevelModel<T> {
    pub util: RandomUtilitySpec<T>,
    pub prob: RandomProbabilitySpec<T>,
}

/// Configuration of a level-k solve for a depth-`k` defender.
///
/// `levels[m-1]` models the agent at hierarchy level `m`, deepest first, so
/// a depth-k solve supplies `k - 1` models (the top level is the defender's
/// own exact problem, and level 0 is the non-strategic base belief — the
/// base counts as the 0th judgment level).
#[derive(Debug, Clone)]
pub struct LevelKConfig<T> {
    pub depth: usize,
    pub levels: Vec<LevelModel<T>>,
    /// Distribution over the level-0 agent's own actions; uniform if None.
    pub base_belief: Option<Vec<T>>,
    pub samples_per_level: u64,
}

/// People rarely reason past level 2; the engine refuses configs past 5.
pub const MAX_LEVEL_K_DEPTH: usize = 5;

impl<T: Real> LevelKConfig<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.depth > MAX_LEVEL_K_DEPTH {
            return Err(ModelError::BadConfig(format!(
                "level-k depth {} exceeds the cap of {MAX_LEVEL_K_DEPTH}",
                self.depth
            )));
        }
        let needed = self.depth.saturating_sub(1);
        if self.levels.len() != needed {
            return Err(ModelError::BadConfig(format!(
                "depth {} requires {} nested judgment level(s) beyond the base belief, got {} \
                 (level {} model absent)",
                self.depth,
                needed,
                self.levels.len(),
                self.levels.len() + 1,
            )));
        }
        if self.samples_per_level == 0 && needed > 0 {
            return Err(ModelError::BadConfig(
                "samples_per_level must be >= 1".into(),
            ));
        }
        if let Some(b) = &self.base_belief {
            let sum: T = b.iter().copied().sum();
            if b.iter().any(|p| *p < T::zero()) || (sum - T::one()).abs() > prob_tolerance::<T>() {
                return Err(ModelError::BadProbabilityRow {
                    context: "level-k base belief".into(),
                    sum: sum.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// Config for the game restricted to surviving actions.
    pub fn restrict(&self, keep_d: &[usize], keep_a: &[usize]) -> Self {
        // base belief ranges over the level-0 agent's actions; its axis
        // depends on hierarchy parity, which is fixed only at solve time.
        // Restriction is supported for configs whose base is uniform.
        LevelKConfig {
            depth: self.depth,
            levels: self
                .levels
                .iter()
                .map(|m| LevelModel {
                    util: restrict_util(&m.util, keep_d, keep_a),
                    prob: restrict_prob(&m.prob, keep_d, keep_a),
                })
                .collect(),
            base_belief: None,
            samples_per_level: self.samples_per_level,
        }
    }
}

fn restrict_util<T: Real>(
    spec: &RandomUtilitySpec<T>,
    keep_d: &[usize],
    keep_a: &[usize],
) -> RandomUtilitySpec<T> {
    use ndarray::Axis;
    match spec {
        RandomUtilitySpec::PerCell { cells } => RandomUtilitySpec::PerCell {
            cells: cells.select(Axis(0), keep_d).select(Axis(1), keep_a),
        },
        RandomUtilitySpec::Affine { base, scale, shift } => RandomUtilitySpec::Affine {
            base: base.select(Axis(0), keep_d).select(Axis(1), keep_a),
            scale: scale.clone(),
            shift: shift.clone(),
        },
    }
}

fn restrict_prob<T: Real>(
    spec: &RandomProbabilitySpec<T>,
    keep_d: &[usize],
    keep_a: &[usize],
) -> RandomProbabilitySpec<T> {
    use ndarray::Axis;
    match spec {
        RandomProbabilitySpec::Fixed { rows } => RandomProbabilitySpec::Fixed {
            rows: rows.select(Axis(0), keep_d).select(Axis(1), keep_a),
        },
        RandomProbabilitySpec::DirichletRows { alphas } => RandomProbabilitySpec::DirichletRows {
            alphas: alphas.select(Axis(0), keep_d).select(Axis(1), keep_a),
        },
    }
}

fn action_count(shape: &GameShape, agent: Agent) -> usize {
    match agent {
        Agent::Defender => shape.n_defenses,
        Agent::Attacker => shape.n_attacks,
    }
}

/// Distribution over the actions of the agent at the top of a modeled
/// hierarchy of height `levels.len()`, alternating downward from
/// `top_agent`, with the level-0 agent playing `base_belief` (uniform by
/// default). Used both for level-k solves (top = attacker being modeled)
/// and for resolving recursive beliefs (top = defender as the attacker
/// models her).
pub(crate) fn hierarchy_distribution<T: Real>(
    shape: &GameShape,
    levels: &[LevelModel<T>],
    top_agent: Agent,
    base_belief: Option<&[T]>,
    samples_per_level: u64,
    seed: u64,
) -> SolveResult<Vec<T>> {
    let height = levels.len();
    // agent at level m, counting the top as level `height`
    let agent_at = |m: usize| -> Agent {
        if (height - m) % 2 == 0 {
            top_agent
        } else {
            top_agent.other()
        }
    };

    let base_agent = agent_at(0);
    let n0 = action_count(shape, base_agent);
    let mut dist: Vec<T> = match base_belief {
        Some(b) => {
            if b.len() != n0 {
                return Err(ModelError::ShapeConflict(format!(
                    "base belief length {} vs {} actions of the level-0 {}",
                    b.len(),
                    n0,
                    base_agent.name()
                ))
                .into());
            }
            let sum: T = b.iter().copied().sum();
            b.iter().map(|p| *p / sum).collect()
        }
        None => vec![T::one() / T::from_usize_c(n0); n0],
    };

    for (m, model) in levels.iter().enumerate().map(|(i, m)| (i + 1, m)) {
        model.util.validate(&shape.util_dims)?;
        model.prob.validate(&shape.prob_dims)?;
        let agent = agent_at(m);
        let n_own = action_count(shape, agent);
        let prev = dist;
        let lane_base = (m as u64) * samples_per_level;

        let picks: Vec<usize> = (0..samples_per_level)
            .into_par_iter()
            .map(|k| -> SolveResult<usize> {
                let mut rng = sample_stream(seed, Purpose::LevelK, lane_base + k);
                let util = model.util.sample(&mut rng)?;
                let prob = model.prob.sample(&mut rng)?;
                let psi = psi_from_tables(
                    &util.into_dimensionality().expect("3-d util table"),
                    &prob.into_dimensionality().expect("3-d prob table"),
                );
                Ok(match agent {
                    Agent::Defender => super::best_response_to_distribution(&psi, &prev).0,
                    Agent::Attacker => super::column_best_response(&psi, &prev).0,
                })
            })
            .collect::<SolveResult<_>>()?;

        let mut counts = vec![0u64; n_own];
        for p in picks {
            counts[p] += 1;
        }
        let k = T::c(samples_per_level as f64);
        dist = counts.into_iter().map(|c| T::c(c as f64) / k).collect();
    }
    Ok(dist)
}

/// Solve the defender's problem as a level-`depth` thinker.
///
/// Depth 0 and depth 1 both best-respond to the base belief over attacks
/// (the depth-0 base case is defined as the uniform-belief response); depth
/// k >= 2 models the attacker as a level-(k-1) thinker using the configured
/// judgment levels.
pub fn level_k_solve<T: Real>(
    game: &DiscreteGame<T>,
    config: &LevelKConfig<T>,
    seed: u64,
) -> SolveResult<DecisionReport<T>> {
    config.validate()?;
    let shape = GameShape::of_game(game);
    let attack_dist = hierarchy_distribution(
        &shape,
        &config.levels,
        Agent::Attacker,
        config.base_belief.as_deref(),
        config.samples_per_level,
        seed,
    )?;
    let psi_d = game.psi_matrix(Agent::Defender)?;
    let (d, eu) = super::best_response_to_distribution(&psi_d, &attack_dist);

    let samples = if config.levels.is_empty() {
        1
    } else {
        config.samples_per_level
    };
    let pi_hat = ActionDistribution::new(
        game.attacker_actions().names().to_vec(),
        attack_dist,
        samples,
    )?;
    let max_se = pi_hat.max_std_err();
    Ok(DecisionReport {
        concept: format!("level-{}", config.depth),
        chosen: vec![game.defender_actions().name(d).to_string()],
        expected_utility: eu,
        attack_distribution: Some(pi_hat),
        conditional_distribution: None,
        policy: None,
        seed,
        samples,
        diagnostics: Diagnostics {
            max_std_err: Some(max_se),
            recursion_depth: Some(config.depth),
            ..Diagnostics::default()
        },
    })
}
