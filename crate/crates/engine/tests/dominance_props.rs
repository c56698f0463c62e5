//! Property checks for the elimination machinery: non-domination of the
//! ARA action, soundness of support-separation elimination, and order
//! monitoring.

mod common;

use ara_engine::ara::estimate_attack_distribution;
use ara_engine::dist::DistributionSpec;
use ara_engine::dominance::{check_prop1, iterative_eliminate, EliminationOrder};
use ara_engine::error::SolveError;
use ara_engine::game::GameStructure;
use ara_engine::judgments::{
    AttackerRandomModel, JudgmentModel, RandomBeliefSpec, RandomProbabilitySpec,
    RandomUtilitySpec,
};
use common::*;
use ndarray::{Array2, ArrayD, IxDyn};

#[test]
fn prop1_guard_fires_on_zero_mass() {
    // a dominated attack never gets sampled, so its estimate is zero
    let pay_a = ndarray::array![[1.0, 5.0], [1.0, 5.0]];
    let g = matrix_game(GameStructure::Simultaneous, Array2::zeros((2, 2)), Some(pay_a));
    let j = degenerate_judgments(&g);
    let err = check_prop1(&g, &j, 200, 3).unwrap_err();
    assert!(matches!(err, SolveError::Prop1PreconditionUnmet { .. }));
}

#[test]
fn prop1_randomized_sweep_never_fails() {
    let mut rng = gen_rng(101, 0);
    let mut verdicts = 0;
    let mut attempts = 0;
    while verdicts < 100 && attempts < 400 {
        attempts += 1;
        let g = random_game(&mut rng, GameStructure::Simultaneous, 3, 3, 2, 10.0);
        let j = uniform_cell_judgments(&g, 0.0, 1.0);
        match check_prop1(&g, &j, 300, attempts) {
            Ok(report) => {
                verdicts += 1;
                assert!(
                    report.passed(),
                    "ARA action {} dominated: {:?}",
                    report.chosen,
                    report.dominated
                );
            }
            Err(SolveError::Prop1PreconditionUnmet { .. }) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(verdicts >= 100, "only {verdicts} verdicts in {attempts} attempts");
}

fn separated_judgments(nd: usize, low: std::ops::Range<f64>, high: std::ops::Range<f64>) -> JudgmentModel<f64> {
    // attack 0 support strictly below attack 1 support for every defense
    let cells = ArrayD::from_shape_fn(IxDyn(&[nd, 2, 1]), |ix| {
        if ix[1] == 0 {
            DistributionSpec::Uniform { lo: low.start, hi: low.end }
        } else {
            DistributionSpec::Uniform { lo: high.start, hi: high.end }
        }
    });
    JudgmentModel {
        attacker: AttackerRandomModel::Factored {
            util: RandomUtilitySpec::PerCell { cells },
            prob: RandomProbabilitySpec::Fixed {
                rows: ArrayD::from_elem(IxDyn(&[nd, 2, 1]), 1.0),
            },
        },
        belief: RandomBeliefSpec::Uniform,
        mirror: None,
    }
}

#[test]
fn eliminated_attacks_receive_exactly_zero_mass() {
    // elimination soundness: the separated action is never sampled on the
    // original game
    let g = matrix_game(GameStructure::Simultaneous, Array2::zeros((2, 2)), None);
    let j = separated_judgments(2, 0.0..1.0, 2.0..3.0);
    let out = iterative_eliminate(&g, &j, EliminationOrder::DefenderFirst).unwrap();
    assert_eq!(out.kept_attacks, vec![1]);
    let pi = estimate_attack_distribution(&g, &j, 10_000, 7).unwrap();
    assert_eq!(pi.probs()[0], 0.0, "eliminated action must get zero samples");
}

#[test]
fn elimination_never_removes_the_ara_optimal_defense() {
    let mut rng = gen_rng(103, 0);
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 50 && seed < 200 {
        seed += 1;
        let g = random_game(&mut rng, GameStructure::Simultaneous, 3, 3, 2, 10.0);
        let j = uniform_cell_judgments(&g, 0.0, 1.0);
        let pi = estimate_attack_distribution(&g, &j, 400, seed).unwrap();
        if pi.probs().iter().any(|p| *p <= 0.0) {
            continue; // Prop. 1 precondition unmet; skip
        }
        checked += 1;
        let report = ara_engine::ara::ara_simultaneous(&g, &j, 400, seed).unwrap();
        let out = iterative_eliminate(&g, &j, EliminationOrder::DefenderFirst).unwrap();
        let kept: Vec<String> = out
            .kept_defenses
            .iter()
            .map(|&i| g.defender_actions().name(i).to_string())
            .collect();
        assert!(
            kept.contains(&report.chosen_action().to_string()),
            "optimal defense {} eliminated; log {:?}",
            report.chosen_action(),
            out.log
        );
    }
    assert!(checked >= 50);
}

/// Order independence at the fixed point is monitored, not assumed: the
/// run logs any disagreement between defender-first and attacker-first
/// sweeps instead of failing on it.
#[test]
fn elimination_order_monitor() {
    let mut rng = gen_rng(107, 0);
    let mut mismatches = 0;
    for _ in 0..200 {
        let g = random_game(&mut rng, GameStructure::Simultaneous, 3, 3, 1, 4.0);
        let j = degenerate_judgments(&g);
        let a = iterative_eliminate(&g, &j, EliminationOrder::DefenderFirst).unwrap();
        let b = iterative_eliminate(&g, &j, EliminationOrder::AttackerFirst).unwrap();
        // both sweeps must reach a fixed point
        assert!(a.kept_defenses.len() >= 1 && a.kept_attacks.len() >= 1);
        assert!(b.kept_defenses.len() >= 1 && b.kept_attacks.len() >= 1);
        if a.kept_defenses != b.kept_defenses || a.kept_attacks != b.kept_attacks {
            mismatches += 1;
            eprintln!(
                "order-dependent reduction: defender-first kept ({:?}, {:?}), attacker-first kept ({:?}, {:?})",
                a.kept_defenses, a.kept_attacks, b.kept_defenses, b.kept_attacks
            );
        }
    }
    eprintln!("elimination order mismatches: {mismatches}/200");
}

#[test]
fn restricted_judgments_follow_the_reduced_game() {
    let g = matrix_game(
        GameStructure::Simultaneous,
        ndarray::array![[5.0, 5.0, 0.0], [1.0, 1.0, 0.0]],
        None,
    );
    let cells = ArrayD::from_shape_fn(IxDyn(&[2, 3, 1]), |ix| DistributionSpec::Uniform {
        lo: ix[1] as f64 * 2.0,
        hi: ix[1] as f64 * 2.0 + 1.0,
    });
    let j = JudgmentModel {
        attacker: AttackerRandomModel::Factored {
            util: RandomUtilitySpec::PerCell { cells },
            prob: RandomProbabilitySpec::Fixed {
                rows: ArrayD::from_elem(IxDyn(&[2, 3, 1]), 1.0),
            },
        },
        belief: RandomBeliefSpec::Dirichlet { alphas: vec![1.0, 1.0] },
        mirror: None,
    };
    let out = iterative_eliminate(&g, &j, EliminationOrder::DefenderFirst).unwrap();
    // supports: a0 in [0,1], a1 in [2,3], a2 in [4,5] -> a0 and a1 eliminated;
    // defender d1 dominated by d0
    assert_eq!(out.kept_attacks, vec![2]);
    assert_eq!(out.kept_defenses, vec![0]);
    // the restricted judgments validate against the reduced game
    out.judgments
        .validate(&ara_engine::judgments::GameShape::of_game(&out.game))
        .unwrap();
    assert_eq!(out.log.len(), 3);
    let rounds: Vec<usize> = out.log.entries.iter().map(|e| e.round).collect();
    assert_eq!(rounds, vec![1, 2, 3], "rounds strictly increase");
}
