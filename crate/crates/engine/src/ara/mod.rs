//! Monte Carlo ARA solvers.
//!
//! These estimate the opponent-action distribution under a chosen solution
//! concept by propagating the defender's judgments through the attacker's
//! optimization, then maximize her expected utility against the estimate.
//! Sample `k` of every phase draws from the substream `(seed, purpose, k)`,
//! so results are independent of worker count.

mod concepts;
mod estimate;
mod level_k;
mod multi;
mod solve;

pub use concepts::{
    concept_attack_distribution, fictitious_play_predict, mixture_solve, solve_with_concept,
    SolutionConcept,
};
pub use estimate::{
    estimate_attack_distribution, estimate_attack_distribution_with_ties,
    estimate_conditional_attack_distribution, TieBreak,
};
pub use level_k::{level_k_solve, LevelKConfig, LevelModel, MAX_LEVEL_K_DEPTH};
pub use multi::{multi_agent_ara, MultiAgentProblem, OpponentModel, DEFAULT_JOINT_CAP};
pub use solve::{
    ara_attack_defend, ara_defend_attack_defend, ara_private_info, ara_sequential,
    ara_simultaneous,
};

use ndarray::Array2;

use crate::scalar::Real;

/// Defender's best response to a distribution over attacks:
/// `argmax_d sum_a psi_D(d,a) dist(a)`, summed in ascending action index
/// and tie-broken to the lowest index.
pub(crate) fn best_response_to_distribution<T: Real>(psi: &Array2<T>, dist: &[T]) -> (usize, T) {
    let (nd, na) = psi.dim();
    debug_assert_eq!(na, dist.len());
    let values: Vec<T> = (0..nd)
        .map(|d| {
            let mut v = T::zero();
            for a in 0..na {
                v += psi[(d, a)] * dist[a];
            }
            v
        })
        .collect();
    let best = crate::numeric::argmax(&values);
    (best, values[best])
}

/// Opposite orientation: the modeled agent picks a column against a
/// distribution over rows.
pub(crate) fn column_best_response<T: Real>(psi: &Array2<T>, dist: &[T]) -> (usize, T) {
    let (nd, na) = psi.dim();
    debug_assert_eq!(nd, dist.len());
    let values: Vec<T> = (0..na)
        .map(|a| {
            let mut v = T::zero();
            for d in 0..nd {
                v += psi[(d, a)] * dist[d];
            }
            v
        })
        .collect();
    let best = crate::numeric::argmax(&values);
    (best, values[best])
}
