//! Shared builders and instance generators for the integration suites.

#![allow(dead_code)]

use ara_engine::dist::DistributionSpec;
use ara_engine::game::{DiscreteGame, GameStructure, Labels, TypeOverride, TypeSpace};
use ara_engine::judgments::{
    AttackerRandomModel, JudgmentModel, MirrorModel, RandomBeliefSpec, RandomProbabilitySpec,
    RandomUtilitySpec,
};
use ara_engine::rng::{sample_stream, EngineRng, Purpose};
use ndarray::{Array2, Array3, ArrayD, Axis, IxDyn};
use rand::Rng;

pub fn gen_rng(seed: u64, index: u64) -> EngineRng {
    sample_stream(seed, Purpose::External, index)
}

/// Single-outcome game from payoff matrices (defender rows, attacker cols).
pub fn matrix_game(
    structure: GameStructure,
    pay_d: Array2<f64>,
    pay_a: Option<Array2<f64>>,
) -> DiscreteGame<f64> {
    let (nd, na) = pay_d.dim();
    let prob = Array3::from_elem((nd, na, 1), 1.0);
    DiscreteGame::new(
        structure,
        Labels::new((0..nd).map(|i| format!("d{i}")), "d").unwrap(),
        Labels::new((0..na).map(|i| format!("a{i}")), "a").unwrap(),
        Labels::new(["s0"], "s").unwrap(),
        prob.clone(),
        Array3::from_shape_fn((nd, na, 1), |(d, a, _)| pay_d[(d, a)]),
        pay_a.as_ref().map(|_| prob.clone()),
        pay_a.map(|p| Array3::from_shape_fn((nd, na, 1), |(d, a, _)| p[(d, a)])),
    )
    .unwrap()
}

/// Random game with `ns` outcomes and utilities in [0, scale).
pub fn random_game(
    rng: &mut EngineRng,
    structure: GameStructure,
    nd: usize,
    na: usize,
    ns: usize,
    scale: f64,
) -> DiscreteGame<f64> {
    let util_d = Array3::from_shape_fn((nd, na, ns), |_| rng.random::<f64>() * scale);
    let util_a = Array3::from_shape_fn((nd, na, ns), |_| rng.random::<f64>() * scale);
    let mut prob_d = Array3::from_shape_fn((nd, na, ns), |_| rng.random::<f64>() + 0.05);
    let mut prob_a = Array3::from_shape_fn((nd, na, ns), |_| rng.random::<f64>() + 0.05);
    for table in [&mut prob_d, &mut prob_a] {
        for mut row in table.lanes_mut(Axis(2)) {
            let s: f64 = row.iter().sum();
            row.mapv_inplace(|v| v / s);
        }
    }
    DiscreteGame::new(
        structure,
        Labels::new((0..nd).map(|i| format!("d{i}")), "d").unwrap(),
        Labels::new((0..na).map(|i| format!("a{i}")), "a").unwrap(),
        Labels::new((0..ns).map(|i| format!("s{i}")), "s").unwrap(),
        prob_d,
        util_d,
        Some(prob_a),
        Some(util_a),
    )
    .unwrap()
}

/// Judgments concentrated exactly at the game's attacker tables.
pub fn degenerate_judgments(game: &DiscreteGame<f64>) -> JudgmentModel<f64> {
    JudgmentModel::degenerate(game).unwrap()
}

/// Factored judgments with iid uniform utility cells on [lo, hi), fixed
/// probability rows equal to the game's defender beliefs, uniform belief.
pub fn uniform_cell_judgments(
    game: &DiscreteGame<f64>,
    lo: f64,
    hi: f64,
) -> JudgmentModel<f64> {
    let dims = [game.n_defenses(), game.n_attacks(), game.n_outcomes()];
    JudgmentModel {
        attacker: AttackerRandomModel::Factored {
            util: RandomUtilitySpec::PerCell {
                cells: ArrayD::from_elem(IxDyn(&dims), DistributionSpec::Uniform { lo, hi }),
            },
            prob: RandomProbabilitySpec::Fixed {
                rows: game
                    .prob_table(ara_engine::game::Agent::Defender)
                    .unwrap()
                    .clone()
                    .into_dyn(),
            },
        },
        belief: RandomBeliefSpec::Uniform,
        mirror: None,
    }
}

/// Add a degenerate mirror (the game's own defender tables) to judgments.
pub fn with_degenerate_mirror(
    mut j: JudgmentModel<f64>,
    game: &DiscreteGame<f64>,
) -> JudgmentModel<f64> {
    j.mirror = Some(MirrorModel {
        util: RandomUtilitySpec::point_mass(
            game.util_table(ara_engine::game::Agent::Defender)
                .unwrap()
                .clone()
                .into_dyn(),
        ),
        prob: Some(RandomProbabilitySpec::Fixed {
            rows: game
                .prob_table(ara_engine::game::Agent::Defender)
                .unwrap()
                .clone()
                .into_dyn(),
        }),
        belief: None,
    });
    j
}

/// Random attacker type space with `n_types` full table overrides.
pub fn random_type_space(
    rng: &mut EngineRng,
    game: &DiscreteGame<f64>,
    n_types: usize,
    scale: f64,
) -> TypeSpace<f64> {
    let (nd, na, ns) = (game.n_defenses(), game.n_attacks(), game.n_outcomes());
    let mut prior: Vec<f64> = (0..n_types).map(|_| rng.random::<f64>() + 0.1).collect();
    let z: f64 = prior.iter().sum();
    prior.iter_mut().for_each(|p| *p /= z);
    let overrides = (0..n_types)
        .map(|_| {
            let util = Array3::from_shape_fn((nd, na, ns), |_| rng.random::<f64>() * scale);
            let mut prob = Array3::from_shape_fn((nd, na, ns), |_| rng.random::<f64>() + 0.05);
            for mut row in prob.lanes_mut(Axis(2)) {
                let s: f64 = row.iter().sum();
                row.mapv_inplace(|v| v / s);
            }
            TypeOverride { util, prob }
        })
        .collect();
    TypeSpace {
        attacker_types: Labels::new((0..n_types).map(|i| format!("t{i}")), "types").unwrap(),
        attacker_prior: prior,
        attacker_overrides: overrides,
        defender_types: None,
        defender_prior: None,
        defender_overrides: None,
    }
}
