//! Rationality machinery: non-domination of ARA actions, elimination of
//! attacker actions whose random-utility supports are separated, the
//! alternating elimination loop, and stochastic-dominance comparisons.

use ndarray::Array2;
use rayon::prelude::*;

use crate::ara::{ara_simultaneous, estimate_attack_distribution};
use crate::error::{ModelError, ModelResult, SolveError, SolveResult};
use crate::game::{psi_from_tables, Agent, DiscreteGame};
use crate::judgments::{GameShape, JudgmentModel};
use crate::report::{ActionDistribution, EliminationLog, EliminationRule};
use crate::rng::{sample_stream, Purpose};
use crate::scalar::Real;

/// Evidence that `action` is weakly dominated with a strict improvement
/// somewhere.
#[derive(Debug, Clone)]
pub struct DominanceWitness {
    pub dominating: String,
    /// Opponent action at which the improvement is strict.
    pub strict_at: String,
}

fn dominated_row<T: Real>(psi: &Array2<T>, row: usize, strict_only: bool) -> Option<(usize, usize)> {
    let (nr, nc) = psi.dim();
    'cand: for r2 in 0..nr {
        if r2 == row {
            continue;
        }
        let mut strict = None;
        for c in 0..nc {
            if psi[(r2, c)] < psi[(row, c)] {
                continue 'cand;
            }
            if strict_only && psi[(r2, c)] <= psi[(row, c)] {
                continue 'cand;
            }
            if psi[(r2, c)] > psi[(row, c)] && strict.is_none() {
                strict = Some(c);
            }
        }
        if let Some(c) = strict {
            return Some((r2, c));
        }
    }
    None
}

/// Weak dominance with a strictness witness: `action` is dominated iff some
/// other action of the same agent does at least as well against every
/// opponent action and strictly better against at least one. Pass
/// `strict_only` for strict dominance throughout.
pub fn is_dominated<T: Real>(
    game: &DiscreteGame<T>,
    agent: Agent,
    action: &str,
    strict_only: bool,
) -> SolveResult<Option<DominanceWitness>> {
    let psi = game.psi_matrix(agent)?;
    match agent {
        Agent::Defender => {
            let row = game.defender_actions().position(action)?;
            Ok(dominated_row(&psi, row, strict_only).map(|(r2, c)| DominanceWitness {
                dominating: game.defender_actions().name(r2).to_string(),
                strict_at: game.attacker_actions().name(c).to_string(),
            }))
        }
        Agent::Attacker => {
            let col = game.attacker_actions().position(action)?;
            let flipped = psi.t().to_owned();
            Ok(dominated_row(&flipped, col, strict_only).map(|(c2, r)| DominanceWitness {
                dominating: game.attacker_actions().name(c2).to_string(),
                strict_at: game.defender_actions().name(r).to_string(),
            }))
        }
    }
}

/// Verdict of a non-domination check on the ARA action.
#[derive(Debug, Clone)]
pub struct Prop1Report<T> {
    pub chosen: String,
    pub pi_hat: ActionDistribution<T>,
    /// `None` means the check passed; a witness means it failed.
    pub dominated: Option<DominanceWitness>,
}

impl<T> Prop1Report<T> {
    pub fn passed(&self) -> bool {
        self.dominated.is_none()
    }
}

/// Check that the ARA-optimal defense is non-dominated. Requires the
/// estimated attack distribution to be strictly positive everywhere; a zero
/// entry is a precondition error, not a verdict.
pub fn check_prop1<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<Prop1Report<T>> {
    let pi_hat = estimate_attack_distribution(game, judgments, k_samples, seed)?;
    for (a, p) in pi_hat.actions().iter().zip(pi_hat.probs()) {
        if *p <= T::zero() {
            return Err(SolveError::Prop1PreconditionUnmet { action: a.clone() });
        }
    }
    let report = ara_simultaneous(game, judgments, k_samples, seed)?;
    let chosen = report.chosen_action().to_string();
    let dominated = is_dominated(game, Agent::Defender, &chosen, false)?;
    Ok(Prop1Report {
        chosen,
        pi_hat,
        dominated,
    })
}

/// Monte Carlo draws of the attacker's random expected utility for one
/// attack: `per_defense[(d, k)]` is the k-th sampled value of `Psi(d, a)`.
#[derive(Debug, Clone)]
pub struct UtilitySampleMatrix<T> {
    pub attack: String,
    pub per_defense: Array2<T>,
}

impl<T: Real> UtilitySampleMatrix<T> {
    pub fn validate(&self) -> ModelResult<()> {
        if self.per_defense.is_empty() {
            return Err(ModelError::BadTableShape {
                name: format!("samples for {}", self.attack),
                got: self.per_defense.shape().to_vec(),
                expected: vec![1, 1],
            });
        }
        if self.per_defense.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteUtility(format!(
                "samples for {}",
                self.attack
            )));
        }
        Ok(())
    }

    fn range(&self, d: usize) -> (T, T) {
        let row = self.per_defense.row(d);
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for v in row {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }
}

/// Sample the random expected-utility matrices used for support and
/// stochastic-dominance checks: one judgment draw per sample, shared across
/// the whole (d, a) table.
pub fn sample_utility_matrices<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    k_samples: u64,
    seed: u64,
) -> SolveResult<Vec<UtilitySampleMatrix<T>>> {
    if k_samples == 0 {
        return Err(ModelError::BadConfig("sample count K must be >= 1".into()).into());
    }
    let shape = GameShape::of_game(game);
    judgments.validate(&shape)?;
    let (nd, na) = (game.n_defenses(), game.n_attacks());
    let psis: Vec<Array2<T>> = (0..k_samples)
        .into_par_iter()
        .map(|k| -> SolveResult<Array2<T>> {
            let mut rng = sample_stream(seed, Purpose::Dominance, k);
            let (u, p) = judgments.attacker.sample_tables(&mut rng)?;
            Ok(psi_from_tables(
                &u.into_owned().into_dimensionality().expect("3-d table"),
                &p.into_owned().into_dimensionality().expect("3-d table"),
            ))
        })
        .collect::<SolveResult<_>>()?;
    Ok((0..na)
        .map(|a| UtilitySampleMatrix {
            attack: game.attacker_actions().name(a).to_string(),
            per_defense: Array2::from_shape_fn((nd, k_samples as usize), |(d, k)| {
                psis[k][(d, a)]
            }),
        })
        .collect())
}

fn separated<T: Real>(
    sup_of: impl Fn(usize, usize) -> (T, T),
    nd: usize,
    a: usize,
    a2: usize,
) -> bool {
    (0..nd).all(|d| sup_of(d, a).1 < sup_of(d, a2).0)
}

/// Indices of attacks whose support lies strictly below another attack's
/// support for every defense, paired with the dominating attack. Empirical
/// supports are `[min sample, max sample]`; the inequality is strict.
pub fn eliminate_support_separated<T: Real>(
    samples: &[UtilitySampleMatrix<T>],
) -> ModelResult<Vec<(usize, usize)>> {
    if samples.len() < 2 {
        return Ok(Vec::new());
    }
    let nd = samples[0].per_defense.nrows();
    let k = samples[0].per_defense.ncols();
    for m in samples {
        m.validate()?;
        if m.per_defense.nrows() != nd || m.per_defense.ncols() != k {
            return Err(ModelError::ShapeConflict(
                "utility sample matrices must share dimensions".into(),
            ));
        }
    }
    let ranges: Vec<Vec<(T, T)>> = samples
        .iter()
        .map(|m| (0..nd).map(|d| m.range(d)).collect())
        .collect();
    let mut out = Vec::new();
    for a in 0..samples.len() {
        for a2 in 0..samples.len() {
            if a == a2 {
                continue;
            }
            if separated(|d, x| ranges[x][d], nd, a, a2) {
                out.push((a, a2));
                break;
            }
        }
    }
    Ok(out)
}

/// Which side is scanned first in each elimination round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EliminationOrder {
    #[default]
    DefenderFirst,
    AttackerFirst,
}

/// Result of iterative elimination: the reduced game and judgments, the
/// surviving original indices, and the removal log.
#[derive(Debug, Clone)]
pub struct EliminationOutcome<T> {
    pub game: DiscreteGame<T>,
    pub judgments: JudgmentModel<T>,
    pub kept_defenses: Vec<usize>,
    pub kept_attacks: Vec<usize>,
    pub log: EliminationLog,
}

/// Alternate defender dominance elimination and attacker support-separation
/// elimination until a fixed point. Attacker supports come from the exact
/// closed-form supports of the judgment specs (a sound outer hull where the
/// row is Dirichlet). Terminates after at most `|D| + |A|` removals.
pub fn iterative_eliminate<T: Real>(
    game: &DiscreteGame<T>,
    judgments: &JudgmentModel<T>,
    order: EliminationOrder,
) -> SolveResult<EliminationOutcome<T>> {
    judgments.validate(&GameShape::of_game(game))?;
    let mut kept_d: Vec<usize> = (0..game.n_defenses()).collect();
    let mut kept_a: Vec<usize> = (0..game.n_attacks()).collect();
    let mut log = EliminationLog::default();

    loop {
        let mut changed = false;
        let phases: [Agent; 2] = match order {
            EliminationOrder::DefenderFirst => [Agent::Defender, Agent::Attacker],
            EliminationOrder::AttackerFirst => [Agent::Attacker, Agent::Defender],
        };
        for phase in phases {
            loop {
                let sub = game.restrict(&kept_d, &kept_a)?;
                match phase {
                    Agent::Defender => {
                        if kept_d.len() <= 1 {
                            break;
                        }
                        let psi = sub.psi_matrix(Agent::Defender)?;
                        let found = (0..kept_d.len())
                            .find_map(|r| dominated_row(&psi, r, false).map(|(r2, c)| (r, r2, c)));
                        let Some((r, r2, c)) = found else { break };
                        log.push(
                            Agent::Defender,
                            sub.defender_actions().name(r),
                            EliminationRule::DefenderDominated,
                            format!(
                                "dominated by {} (strict vs {})",
                                sub.defender_actions().name(r2),
                                sub.attacker_actions().name(c)
                            ),
                        );
                        kept_d.remove(r);
                        changed = true;
                    }
                    Agent::Attacker => {
                        if kept_a.len() <= 1 {
                            break;
                        }
                        let sub_j = judgments.restrict(&kept_d, &kept_a);
                        let shape = GameShape::of_game(&sub);
                        let supports = sub_j.attacker.psi_supports(&shape)?;
                        let nd = kept_d.len();
                        let na = kept_a.len();
                        let mut removal = None;
                        'outer: for a in 0..na {
                            for a2 in 0..na {
                                if a != a2 && separated(|d, x| supports[(d, x)], nd, a, a2) {
                                    removal = Some((a, a2));
                                    break 'outer;
                                }
                            }
                        }
                        let Some((a, a2)) = removal else { break };
                        log.push(
                            Agent::Attacker,
                            sub.attacker_actions().name(a),
                            EliminationRule::AttackerSupportSeparated,
                            format!(
                                "support below {} for every defense",
                                sub.attacker_actions().name(a2)
                            ),
                        );
                        kept_a.remove(a);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    Ok(EliminationOutcome {
        game: game.restrict(&kept_d, &kept_a)?,
        judgments: judgments.restrict(&kept_d, &kept_a),
        kept_defenses: kept_d,
        kept_attacks: kept_a,
        log,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StochasticOrder {
    /// Pairwise per-sample comparison.
    State,
    /// Empirical CDF ordering.
    First,
    /// Integrated empirical CDF ordering.
    Second,
}

/// Per-defense verdicts of whether `a'` dominates `a`.
#[derive(Debug, Clone)]
pub struct StochasticVerdict {
    pub per_defense: Vec<bool>,
    pub dominates_for_all: bool,
}

fn sorted_row<T: Real>(m: &UtilitySampleMatrix<T>, d: usize) -> Vec<T> {
    let mut v: Vec<T> = m.per_defense.row(d).to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    v
}

/// Expected shortfall `E[(t - X)+]`, the integrated empirical CDF at `t`.
fn integrated_cdf<T: Real>(sorted: &[T], t: T) -> T {
    let mut acc = T::zero();
    for x in sorted {
        if *x >= t {
            break;
        }
        acc += t - *x;
    }
    acc / T::from_usize_c(sorted.len())
}

/// Does `a'` stochastically dominate `a` given matched sample matrices?
pub fn stochastic_dominance<T: Real>(
    samples_a: &UtilitySampleMatrix<T>,
    samples_a_prime: &UtilitySampleMatrix<T>,
    order: StochasticOrder,
) -> ModelResult<StochasticVerdict> {
    samples_a.validate()?;
    samples_a_prime.validate()?;
    if samples_a.per_defense.dim() != samples_a_prime.per_defense.dim() {
        return Err(ModelError::ShapeConflict(
            "stochastic dominance requires matched sample counts".into(),
        ));
    }
    let nd = samples_a.per_defense.nrows();
    let per_defense: Vec<bool> = (0..nd)
        .map(|d| match order {
            StochasticOrder::State => {
                let x = samples_a.per_defense.row(d);
                let y = samples_a_prime.per_defense.row(d);
                let ge = x.iter().zip(y.iter()).all(|(a, b)| b >= a);
                let strict = x.iter().zip(y.iter()).any(|(a, b)| b > a);
                ge && strict
            }
            StochasticOrder::First => {
                // equal-count empirical FOSD == order-statistic ordering
                let x = sorted_row(samples_a, d);
                let y = sorted_row(samples_a_prime, d);
                let ge = x.iter().zip(&y).all(|(a, b)| b >= a);
                let strict = x.iter().zip(&y).any(|(a, b)| b > a);
                ge && strict
            }
            StochasticOrder::Second => {
                let x = sorted_row(samples_a, d);
                let y = sorted_row(samples_a_prime, d);
                let mut grid: Vec<T> = x.iter().chain(&y).copied().collect();
                grid.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
                let mut ge = true;
                let mut strict = false;
                for t in grid {
                    let ix = integrated_cdf(&x, t);
                    let iy = integrated_cdf(&y, t);
                    if iy > ix {
                        ge = false;
                        break;
                    }
                    if iy < ix {
                        strict = true;
                    }
                }
                ge && strict
            }
        })
        .collect();
    let dominates_for_all = per_defense.iter().all(|b| *b);
    Ok(StochasticVerdict {
        per_defense,
        dominates_for_all,
    })
}
