//! The defender's random model of her opponent.
//!
//! A [`JudgmentModel`] captures epistemic uncertainty about the attacker's
//! utilities, outcome probabilities, and beliefs as sampleable objects.
//! Sampling is pure given `(spec, seed, sample index)`: callers hand in an
//! explicit substream, so parallel and serial runs see identical draws.

use std::borrow::Cow;

use ndarray::{Array2, ArrayD, Axis, IxDyn};
use rand::Rng;

use crate::dist::{sample_dirichlet, DistributionSpec};
use crate::error::{ModelError, ModelResult};
use crate::game::{Agent, DefendAttackDefendGame, DiscreteGame, PrivateInfoGame, TypeSpace};
use crate::scalar::{prob_tolerance, Real};

/// Table dimensions a judgment model must match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameShape {
    pub util_dims: Vec<usize>,
    pub prob_dims: Vec<usize>,
    pub n_defenses: usize,
    pub n_attacks: usize,
}

impl GameShape {
    pub fn of_game<T: Real>(game: &DiscreteGame<T>) -> Self {
        let dims = vec![game.n_defenses(), game.n_attacks(), game.n_outcomes()];
        GameShape {
            util_dims: dims.clone(),
            prob_dims: dims,
            n_defenses: game.n_defenses(),
            n_attacks: game.n_attacks(),
        }
    }

    /// Attacker-side shape of a private-information game: the attacker does
    /// not observe the signal, so his tables carry no signal axis.
    pub fn of_private_info<T: Real>(game: &PrivateInfoGame<T>) -> Self {
        let dims = vec![
            game.defender_actions().len(),
            game.attacker_actions().len(),
            game.outcomes().len(),
        ];
        GameShape {
            util_dims: dims.clone(),
            prob_dims: dims,
            n_defenses: game.defender_actions().len(),
            n_attacks: game.attacker_actions().len(),
        }
    }

    pub fn of_defend_attack_defend<T: Real>(game: &DefendAttackDefendGame<T>) -> Self {
        let nd1 = game.defense_actions().len();
        let na = game.attacker_actions().len();
        let ns = game.outcomes().len();
        let nd2 = game.mitigation_actions().len();
        GameShape {
            util_dims: vec![nd1, na, ns, nd2],
            prob_dims: vec![nd1, na, ns],
            n_defenses: nd1,
            n_attacks: na,
        }
    }
}

/// Random utility table: either an independent distribution per cell, or a
/// base table under a random positive affine transform (which preserves the
/// ordinal structure of the base table in every draw).
#[derive(Debug, Clone)]
pub enum RandomUtilitySpec<T> {
    PerCell { cells: ArrayD<DistributionSpec<T>> },
    Affine {
        base: ArrayD<T>,
        scale: DistributionSpec<T>,
        shift: DistributionSpec<T>,
    },
}

impl<T: Real> RandomUtilitySpec<T> {
    /// Degenerate spec concentrated on `base`.
    pub fn point_mass(base: ArrayD<T>) -> Self {
        let cells = base.mapv(|v| DistributionSpec::PointMass { value: v });
        RandomUtilitySpec::PerCell { cells }
    }

    pub fn shape(&self) -> &[usize] {
        match self {
            Self::PerCell { cells } => cells.shape(),
            Self::Affine { base, .. } => base.shape(),
        }
    }

    pub fn validate(&self, dims: &[usize]) -> ModelResult<()> {
        if self.shape() != dims {
            return Err(ModelError::ShapeConflict(format!(
                "random utility shape {:?} vs game {:?}",
                self.shape(),
                dims
            )));
        }
        match self {
            Self::PerCell { cells } => {
                for c in cells.iter() {
                    c.validate()?;
                    if matches!(c, DistributionSpec::Dirichlet { .. }) {
                        return Err(ModelError::Multivariate("dirichlet utility cell"));
                    }
                }
            }
            Self::Affine { base, scale, shift } => {
                if base.iter().any(|v| !v.is_finite()) {
                    return Err(ModelError::NonFiniteUtility("affine base".into()));
                }
                scale.validate()?;
                shift.validate()?;
                if scale.support().0 <= T::zero() {
                    return Err(ModelError::BadDistribution(
                        "affine scale must have strictly positive support".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> ModelResult<ArrayD<T>> {
        match self {
            Self::PerCell { cells } => {
                let mut out = ArrayD::zeros(IxDyn(cells.shape()));
                for (o, c) in out.iter_mut().zip(cells.iter()) {
                    *o = c.sample(rng)?;
                }
                Ok(out)
            }
            Self::Affine { base, scale, shift } => {
                let s = scale.sample(rng)?;
                let t = shift.sample(rng)?;
                Ok(base.mapv(|v| s * v + t))
            }
        }
    }

    /// Exact per-cell support intervals. For the affine form the interval is
    /// exact per cell (the coupling across cells only tightens joint sets).
    pub fn cell_supports(&self) -> ArrayD<(T, T)> {
        match self {
            Self::PerCell { cells } => cells.mapv(|ref c| c.support()),
            Self::Affine { base, scale, shift } => {
                let (s_lo, s_hi) = scale.support();
                let (t_lo, t_hi) = shift.support();
                base.mapv(|b| {
                    if b >= T::zero() {
                        (s_lo * b + t_lo, s_hi * b + t_hi)
                    } else {
                        (s_hi * b + t_lo, s_lo * b + t_hi)
                    }
                })
            }
        }
    }

    fn restrict(&self, keep_d: &[usize], keep_a: &[usize]) -> Self {
        match self {
            Self::PerCell { cells } => Self::PerCell {
                cells: cells.select(Axis(0), keep_d).select(Axis(1), keep_a),
            },
            Self::Affine { base, scale, shift } => Self::Affine {
                base: base.select(Axis(0), keep_d).select(Axis(1), keep_a),
                scale: scale.clone(),
                shift: shift.clone(),
            },
        }
    }
}

/// Random outcome-probability table: point mass at fixed rows, or an
/// independent Dirichlet per (d, a) row over the outcome simplex.
#[derive(Debug, Clone)]
pub enum RandomProbabilitySpec<T> {
    Fixed { rows: ArrayD<T> },
    DirichletRows { alphas: ArrayD<T> },
}

impl<T: Real> RandomProbabilitySpec<T> {
    pub fn shape(&self) -> &[usize] {
        match self {
            Self::Fixed { rows } => rows.shape(),
            Self::DirichletRows { alphas } => alphas.shape(),
        }
    }

    pub fn validate(&self, dims: &[usize]) -> ModelResult<()> {
        if self.shape() != dims {
            return Err(ModelError::ShapeConflict(format!(
                "random probability shape {:?} vs game {:?}",
                self.shape(),
                dims
            )));
        }
        match self {
            Self::Fixed { rows } => {
                let tol = prob_tolerance::<T>();
                for row in rows.lanes(Axis(rows.ndim() - 1)) {
                    let sum: T = row.iter().copied().sum();
                    if row.iter().any(|p| *p < -tol) || (sum - T::one()).abs() > tol {
                        return Err(ModelError::BadProbabilityRow {
                            context: "fixed probability judgment".into(),
                            sum: sum.to_f64_lossy(),
                        });
                    }
                }
            }
            Self::DirichletRows { alphas } => {
                if alphas.iter().any(|a| !a.is_finite() || *a <= T::zero()) {
                    return Err(ModelError::BadDistribution(
                        "dirichlet row alphas must be > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> ModelResult<ArrayD<T>> {
        match self {
            Self::Fixed { rows } => {
                let mut out = rows.clone();
                let last = out.ndim() - 1;
                for mut row in out.lanes_mut(Axis(last)) {
                    let sum: T = row.iter().copied().sum();
                    for v in row.iter_mut() {
                        *v = (*v).max(T::zero()) / sum;
                    }
                }
                Ok(out)
            }
            Self::DirichletRows { alphas } => {
                let mut out = ArrayD::zeros(IxDyn(alphas.shape()));
                let last = alphas.ndim() - 1;
                for (mut row, arow) in out.lanes_mut(Axis(last)).into_iter().zip(alphas.lanes(Axis(last))) {
                    let a: Vec<T> = arow.iter().copied().collect();
                    let drawn = sample_dirichlet(&a, rng);
                    for (r, v) in row.iter_mut().zip(drawn) {
                        *r = v;
                    }
                }
                Ok(out)
            }
        }
    }

    fn restrict(&self, keep_d: &[usize], keep_a: &[usize]) -> Self {
        match self {
            Self::Fixed { rows } => Self::Fixed {
                rows: rows.select(Axis(0), keep_d).select(Axis(1), keep_a),
            },
            Self::DirichletRows { alphas } => Self::DirichletRows {
                alphas: alphas.select(Axis(0), keep_d).select(Axis(1), keep_a),
            },
        }
    }
}

/// The defender's model of the attacker's belief over her own actions.
/// `Recursive` delegates to the level-k machinery; solvers resolve it to a
/// concrete distribution before sampling.
#[derive(Debug, Clone)]
pub enum RandomBeliefSpec<T> {
    Uniform,
    Fixed { probs: Vec<T> },
    Dirichlet { alphas: Vec<T> },
    Recursive { config: Box<crate::ara::LevelKConfig<T>> },
}

impl<T: Real> RandomBeliefSpec<T> {
    pub fn validate(&self, n_defenses: usize) -> ModelResult<()> {
        match self {
            Self::Uniform => Ok(()),
            Self::Fixed { probs } => {
                if probs.len() != n_defenses {
                    return Err(ModelError::ShapeConflict(format!(
                        "belief length {} vs {} defender actions",
                        probs.len(),
                        n_defenses
                    )));
                }
                let sum: T = probs.iter().copied().sum();
                if probs.iter().any(|p| *p < T::zero()) || (sum - T::one()).abs() > prob_tolerance::<T>()
                {
                    return Err(ModelError::BadProbabilityRow {
                        context: "fixed belief".into(),
                        sum: sum.to_f64_lossy(),
                    });
                }
                Ok(())
            }
            Self::Dirichlet { alphas } => {
                if alphas.len() != n_defenses {
                    return Err(ModelError::ShapeConflict(format!(
                        "belief alphas length {} vs {} defender actions",
                        alphas.len(),
                        n_defenses
                    )));
                }
                if alphas.iter().any(|a| *a <= T::zero()) {
                    return Err(ModelError::BadDistribution("belief alphas must be > 0".into()));
                }
                Ok(())
            }
            Self::Recursive { config } => config.validate(),
        }
    }

    /// Draw one belief vector. `Recursive` must be resolved by the caller.
    pub fn sample<R: Rng>(&self, n_defenses: usize, rng: &mut R) -> ModelResult<Vec<T>> {
        match self {
            Self::Uniform => {
                let p = T::one() / T::from_usize_c(n_defenses);
                Ok(vec![p; n_defenses])
            }
            Self::Fixed { probs } => {
                let sum: T = probs.iter().copied().sum();
                Ok(probs.iter().map(|p| *p / sum).collect())
            }
            Self::Dirichlet { alphas } => Ok(sample_dirichlet(alphas, rng)),
            Self::Recursive { .. } => Err(ModelError::BadConfig(
                "recursive belief must be resolved through the level-k solver".into(),
            )),
        }
    }

    fn restrict(&self, keep_d: &[usize], keep_a: &[usize]) -> Self {
        match self {
            Self::Uniform => Self::Uniform,
            Self::Fixed { probs } => Self::Fixed {
                probs: keep_d.iter().map(|&i| probs[i]).collect(),
            },
            Self::Dirichlet { alphas } => Self::Dirichlet {
                alphas: keep_d.iter().map(|&i| alphas[i]).collect(),
            },
            Self::Recursive { config } => Self::Recursive {
                config: Box::new(config.restrict(keep_d, keep_a)),
            },
        }
    }
}

/// Joint random model of the attacker's utility and probability tables:
/// cellwise-independent specs, or a finite mixture over complete table
/// pairs (the Harsanyi-type reading, where one draw picks a type).
#[derive(Debug, Clone)]
pub enum AttackerRandomModel<T> {
    Factored {
        util: RandomUtilitySpec<T>,
        prob: RandomProbabilitySpec<T>,
    },
    TypeMixture {
        prior: Vec<T>,
        utils: Vec<ArrayD<T>>,
        probs: Vec<ArrayD<T>>,
    },
}

impl<T: Real> AttackerRandomModel<T> {
    pub fn validate(&self, shape: &GameShape) -> ModelResult<()> {
        match self {
            Self::Factored { util, prob } => {
                util.validate(&shape.util_dims)?;
                prob.validate(&shape.prob_dims)
            }
            Self::TypeMixture { prior, utils, probs } => {
                if prior.is_empty() || prior.len() != utils.len() || prior.len() != probs.len() {
                    return Err(ModelError::ShapeConflict(
                        "type mixture prior/components length mismatch".into(),
                    ));
                }
                let sum: T = prior.iter().copied().sum();
                if prior.iter().any(|p| *p < T::zero())
                    || (sum - T::one()).abs() > prob_tolerance::<T>()
                {
                    return Err(ModelError::BadProbabilityRow {
                        context: "type mixture prior".into(),
                        sum: sum.to_f64_lossy(),
                    });
                }
                for (u, p) in utils.iter().zip(probs) {
                    if u.shape() != shape.util_dims.as_slice() {
                        return Err(ModelError::ShapeConflict(format!(
                            "type utility shape {:?} vs game {:?}",
                            u.shape(),
                            shape.util_dims
                        )));
                    }
                    if p.shape() != shape.prob_dims.as_slice() {
                        return Err(ModelError::ShapeConflict(format!(
                            "type probability shape {:?} vs game {:?}",
                            p.shape(),
                            shape.prob_dims
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Draw the type index for a mixture, or None for factored models.
    fn sample_type<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        match self {
            Self::Factored { .. } => None,
            Self::TypeMixture { prior, .. } => {
                let u = T::c(rng.random::<f64>());
                let mut acc = T::zero();
                for (i, p) in prior.iter().enumerate() {
                    acc += *p;
                    if u < acc {
                        return Some(i);
                    }
                }
                Some(prior.len() - 1)
            }
        }
    }

    pub fn sample_tables<R: Rng>(&self, rng: &mut R) -> ModelResult<(Cow<'_, ArrayD<T>>, Cow<'_, ArrayD<T>>)> {
        match self {
            Self::Factored { util, prob } => {
                let u = util.sample(rng)?;
                let p = prob.sample(rng)?;
                Ok((Cow::Owned(u), Cow::Owned(p)))
            }
            Self::TypeMixture { utils, probs, .. } => {
                let i = self.sample_type(rng).expect("mixture yields a type");
                Ok((Cow::Borrowed(&utils[i]), Cow::Borrowed(&probs[i])))
            }
        }
    }

    /// Per-(d, a) interval containing the support of the induced random
    /// expected utility. Exact for fixed probability rows and type
    /// mixtures; a sound outer hull for Dirichlet rows.
    pub fn psi_supports(&self, shape: &GameShape) -> ModelResult<Array2<(T, T)>> {
        if shape.util_dims.len() != 3 {
            return Err(ModelError::ShapeConflict(
                "psi supports need (d, a, s) tables".into(),
            ));
        }
        let (nd, na, ns) = (shape.util_dims[0], shape.util_dims[1], shape.util_dims[2]);
        match self {
            Self::Factored { util, prob } => {
                let cells = util.cell_supports();
                let mut out = Array2::from_elem((nd, na), (T::zero(), T::zero()));
                for d in 0..nd {
                    for a in 0..na {
                        let interval = match prob {
                            RandomProbabilitySpec::Fixed { rows } => {
                                let mut lo = T::zero();
                                let mut hi = T::zero();
                                for s in 0..ns {
                                    let p = rows[[d, a, s]];
                                    let (clo, chi) = cells[[d, a, s]];
                                    lo += p * clo;
                                    hi += p * chi;
                                }
                                (lo, hi)
                            }
                            RandomProbabilitySpec::DirichletRows { .. } => {
                                let mut lo = T::infinity();
                                let mut hi = T::neg_infinity();
                                for s in 0..ns {
                                    let (clo, chi) = cells[[d, a, s]];
                                    lo = lo.min(clo);
                                    hi = hi.max(chi);
                                }
                                (lo, hi)
                            }
                        };
                        out[(d, a)] = interval;
                    }
                }
                Ok(out)
            }
            Self::TypeMixture { prior, utils, probs } => {
                let mut out = Array2::from_elem((nd, na), (T::infinity(), T::neg_infinity()));
                for ((w, u), p) in prior.iter().zip(utils).zip(probs) {
                    if *w <= T::zero() {
                        continue;
                    }
                    for d in 0..nd {
                        for a in 0..na {
                            let mut psi = T::zero();
                            for s in 0..ns {
                                psi += u[[d, a, s]] * p[[d, a, s]];
                            }
                            let cur = out[(d, a)];
                            out[(d, a)] = (cur.0.min(psi), cur.1.max(psi));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    fn restrict(&self, keep_d: &[usize], keep_a: &[usize]) -> Self {
        match self {
            Self::Factored { util, prob } => Self::Factored {
                util: util.restrict(keep_d, keep_a),
                prob: prob.restrict(keep_d, keep_a),
            },
            Self::TypeMixture { prior, utils, probs } => Self::TypeMixture {
                prior: prior.clone(),
                utils: utils
                    .iter()
                    .map(|u| u.select(Axis(0), keep_d).select(Axis(1), keep_a))
                    .collect(),
                probs: probs
                    .iter()
                    .map(|p| p.select(Axis(0), keep_d).select(Axis(1), keep_a))
                    .collect(),
            },
        }
    }
}

/// The defender's random model of what the attacker believes about *her*
/// tables; used when a solver must anticipate her behavior inside his head.
#[derive(Debug, Clone)]
pub struct MirrorModel<T> {
    pub util: RandomUtilitySpec<T>,
    pub prob: Option<RandomProbabilitySpec<T>>,
    pub belief: Option<RandomBeliefSpec<T>>,
}

/// Full judgment model `F ~ (U_A, P_A, Pi_A)` plus optional mirror specs.
#[derive(Debug, Clone)]
pub struct JudgmentModel<T> {
    pub attacker: AttackerRandomModel<T>,
    pub belief: RandomBeliefSpec<T>,
    pub mirror: Option<MirrorModel<T>>,
}

/// One coherent draw from the judgment model.
#[derive(Debug, Clone)]
pub struct AttackerSample<T> {
    pub util: ArrayD<T>,
    pub prob: ArrayD<T>,
    pub belief: Vec<T>,
}

impl<T: Real> JudgmentModel<T> {
    /// Degenerate model concentrated at the game's own attacker tables,
    /// with a uniform belief over defenses.
    pub fn degenerate(game: &DiscreteGame<T>) -> ModelResult<Self> {
        let util = game
            .util_table(Agent::Attacker)
            .ok_or_else(|| ModelError::JudgmentsAbsent("attacker utility table".into()))?;
        let prob = game
            .prob_table(Agent::Attacker)
            .ok_or_else(|| ModelError::JudgmentsAbsent("attacker probability table".into()))?;
        Ok(JudgmentModel {
            attacker: AttackerRandomModel::Factored {
                util: RandomUtilitySpec::point_mass(util.clone().into_dyn()),
                prob: RandomProbabilitySpec::Fixed {
                    rows: prob.clone().into_dyn(),
                },
            },
            belief: RandomBeliefSpec::Uniform,
            mirror: None,
        })
    }

    /// Judgments equal to a finite type space sampled with its prior.
    pub fn from_type_space(game: &DiscreteGame<T>, types: &TypeSpace<T>) -> ModelResult<Self> {
        types.validate(game)?;
        Ok(JudgmentModel {
            attacker: AttackerRandomModel::TypeMixture {
                prior: types.attacker_prior.clone(),
                utils: types
                    .attacker_overrides
                    .iter()
                    .map(|o| o.util.clone().into_dyn())
                    .collect(),
                probs: types
                    .attacker_overrides
                    .iter()
                    .map(|o| o.prob.clone().into_dyn())
                    .collect(),
            },
            belief: RandomBeliefSpec::Uniform,
            mirror: None,
        })
    }

    pub fn validate(&self, shape: &GameShape) -> ModelResult<()> {
        self.attacker.validate(shape)?;
        self.belief.validate(shape.n_defenses)?;
        if let Some(m) = &self.mirror {
            m.util.validate(&shape.util_dims)?;
            if let Some(p) = &m.prob {
                p.validate(&shape.prob_dims)?;
            }
            if let Some(b) = &m.belief {
                b.validate(shape.n_attacks)?;
            }
        }
        Ok(())
    }

    /// One draw `{u_A, p_A, pi_A}`. The belief portion must not be
    /// `Recursive` (solvers resolve that first).
    pub fn sample_attacker_problem<R: Rng>(
        &self,
        shape: &GameShape,
        rng: &mut R,
    ) -> ModelResult<AttackerSample<T>> {
        self.validate(shape)?;
        let (util, prob) = self.attacker.sample_tables(rng)?;
        let belief = self.belief.sample(shape.n_defenses, rng)?;
        Ok(AttackerSample {
            util: util.into_owned(),
            prob: prob.into_owned(),
            belief,
        })
    }

    /// Judgments for the game restricted to surviving actions; belief
    /// vectors are sliced and renormalized downstream.
    pub fn restrict(&self, keep_d: &[usize], keep_a: &[usize]) -> Self {
        JudgmentModel {
            attacker: self.attacker.restrict(keep_d, keep_a),
            belief: self.belief.restrict(keep_d, keep_a),
            mirror: self.mirror.as_ref().map(|m| MirrorModel {
                util: m.util.restrict(keep_d, keep_a),
                prob: m.prob.as_ref().map(|p| p.restrict(keep_d, keep_a)),
                // the mirror belief ranges over attacker actions
                belief: m.belief.as_ref().map(|b| match b {
                    RandomBeliefSpec::Uniform => RandomBeliefSpec::Uniform,
                    RandomBeliefSpec::Fixed { probs } => RandomBeliefSpec::Fixed {
                        probs: keep_a.iter().map(|&i| probs[i]).collect(),
                    },
                    RandomBeliefSpec::Dirichlet { alphas } => RandomBeliefSpec::Dirichlet {
                        alphas: keep_a.iter().map(|&i| alphas[i]).collect(),
                    },
                    RandomBeliefSpec::Recursive { config } => RandomBeliefSpec::Recursive {
                        config: Box::new(config.restrict(keep_d, keep_a)),
                    },
                }),
            }),
        }
    }
}
