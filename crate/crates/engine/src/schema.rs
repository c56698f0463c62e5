//! Versioned JSON input schemas (v1) and their conversion into typed
//! models. Games, judgments, and auction specs are all plain JSON objects;
//! see the repository README for the field-by-field layout.

use std::collections::BTreeMap;

use ndarray::{Array3, Array4, ArrayD, IxDyn};
use serde::Deserialize;
use thiserror::Error;

use crate::ara::{LevelKConfig, LevelModel, SolutionConcept};
use crate::auction::{AuctionSpec, BidGrid, MirrorAuctionBeliefs};
use crate::dist::DistributionSpec;
use crate::error::ModelError;
use crate::game::{
    DefendAttackDefendGame, DiscreteGame, GameStructure, Labels, PrivateInfoGame, TypeOverride,
    TypeSpace,
};
use crate::judgments::{
    AttackerRandomModel, JudgmentModel, MirrorModel, RandomBeliefSpec, RandomProbabilitySpec,
    RandomUtilitySpec,
};
use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<serde_json::Error> for SchemaError {
    fn from(e: serde_json::Error) -> Self {
        SchemaError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn bad(msg: impl Into<String>) -> SchemaError {
    SchemaError::Model(ModelError::BadConfig(msg.into()))
}

fn check_version(v: u32) -> Result<(), SchemaError> {
    if v != SCHEMA_VERSION {
        return Err(bad(format!(
            "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// distribution specs

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpecFile {
    PointMass { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Triangular { lo: f64, mode: f64, hi: f64 },
    Beta { alpha: f64, beta: f64 },
    Power { k: f64 },
    Categorical { values: Vec<f64>, probs: Vec<f64> },
    Dirichlet { alphas: Vec<f64> },
}

impl DistSpecFile {
    pub fn build<T: Real>(&self) -> Result<DistributionSpec<T>, SchemaError> {
        let spec = match self {
            Self::PointMass { value } => DistributionSpec::PointMass { value: T::c(*value) },
            Self::Uniform { lo, hi } => DistributionSpec::Uniform {
                lo: T::c(*lo),
                hi: T::c(*hi),
            },
            Self::Triangular { lo, mode, hi } => DistributionSpec::Triangular {
                lo: T::c(*lo),
                mode: T::c(*mode),
                hi: T::c(*hi),
            },
            Self::Beta { alpha, beta } => DistributionSpec::Beta {
                alpha: T::c(*alpha),
                beta: T::c(*beta),
            },
            Self::Power { k } => DistributionSpec::Power { k: T::c(*k) },
            Self::Categorical { values, probs } => DistributionSpec::Categorical {
                values: values.iter().map(|v| T::c(*v)).collect(),
                probs: probs.iter().map(|p| T::c(*p)).collect(),
            },
            Self::Dirichlet { alphas } => DistributionSpec::Dirichlet {
                alphas: alphas.iter().map(|a| T::c(*a)).collect(),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

// ---------------------------------------------------------------------------
// games

type NestedRows<L> = BTreeMap<String, BTreeMap<String, L>>;

/// Leaf of a (d, a)-nested table: per-outcome values, or per-outcome rows
/// of per-mitigation values in defend-attack-defend games.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TableLeaf {
    Flat(Vec<f64>),
    PerMitigation(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypesFile {
    pub labels: Vec<String>,
    pub prior: Vec<f64>,
    pub overrides: BTreeMap<String, TypeOverrideFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeOverrideFile {
    pub util_a: NestedRows<TableLeaf>,
    pub prob_a: NestedRows<TableLeaf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivateInfoFile {
    pub labels: Vec<String>,
    pub prior: Vec<f64>,
    pub prob_d: BTreeMap<String, NestedRows<TableLeaf>>,
    pub util_d: BTreeMap<String, NestedRows<TableLeaf>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub schema_version: u32,
    pub structure: String,
    pub actions_d: Vec<String>,
    pub actions_a: Vec<String>,
    #[serde(default)]
    pub actions_d2: Option<Vec<String>>,
    pub outcomes: Vec<String>,
    #[serde(default)]
    pub prob_d: Option<NestedRows<TableLeaf>>,
    #[serde(default)]
    pub util_d: Option<NestedRows<TableLeaf>>,
    #[serde(default)]
    pub prob_a: Option<NestedRows<TableLeaf>>,
    #[serde(default)]
    pub util_a: Option<NestedRows<TableLeaf>>,
    #[serde(default)]
    pub types: Option<TypesFile>,
    #[serde(default)]
    pub private_info: Option<PrivateInfoFile>,
}

fn parse_structure(s: &str) -> Result<GameStructure, SchemaError> {
    Ok(match s {
        "simultaneous" => GameStructure::Simultaneous,
        "sequential_da" | "sequential_defend_attack" => GameStructure::SequentialDefendAttack,
        "sequential_ad" | "sequential_attack_defend" => GameStructure::SequentialAttackDefend,
        "sequential_da_private_info" | "sequential_defend_attack_private_info" => {
            GameStructure::SequentialDefendAttackPrivateInfo
        }
        "defend_attack_defend" => GameStructure::DefendAttackDefend,
        other => return Err(bad(format!("unknown structure `{other}`"))),
    })
}

fn flat_leaf(leaf: &TableLeaf, name: &str, d: &str, a: &str) -> Result<Vec<f64>, SchemaError> {
    match leaf {
        TableLeaf::Flat(v) => Ok(v.clone()),
        TableLeaf::PerMitigation(_) => Err(bad(format!(
            "{name}[{d}][{a}] is nested but this structure expects per-outcome arrays"
        ))),
    }
}

fn nested_to_array3<T: Real>(
    rows: &NestedRows<TableLeaf>,
    actions_d: &[String],
    actions_a: &[String],
    n_outcomes: usize,
    name: &str,
) -> Result<Array3<T>, SchemaError> {
    let mut out = Array3::zeros((actions_d.len(), actions_a.len(), n_outcomes));
    for (di, d) in actions_d.iter().enumerate() {
        let row = rows
            .get(d)
            .ok_or_else(|| bad(format!("{name} is missing row for defense `{d}`")))?;
        for (ai, a) in actions_a.iter().enumerate() {
            let leaf = row
                .get(a)
                .ok_or_else(|| bad(format!("{name}[{d}] is missing entry for attack `{a}`")))?;
            let vals = flat_leaf(leaf, name, d, a)?;
            if vals.len() != n_outcomes {
                return Err(bad(format!(
                    "{name}[{d}][{a}] has {} entries, expected {} outcomes",
                    vals.len(),
                    n_outcomes
                )));
            }
            for (si, v) in vals.iter().enumerate() {
                out[(di, ai, si)] = T::c(*v);
            }
        }
    }
    Ok(out)
}

fn nested_to_array4<T: Real>(
    rows: &NestedRows<TableLeaf>,
    actions_d: &[String],
    actions_a: &[String],
    n_outcomes: usize,
    n_mitigations: usize,
    name: &str,
) -> Result<Array4<T>, SchemaError> {
    let mut out = Array4::zeros((actions_d.len(), actions_a.len(), n_outcomes, n_mitigations));
    for (di, d) in actions_d.iter().enumerate() {
        let row = rows
            .get(d)
            .ok_or_else(|| bad(format!("{name} is missing row for defense `{d}`")))?;
        for (ai, a) in actions_a.iter().enumerate() {
            let leaf = row
                .get(a)
                .ok_or_else(|| bad(format!("{name}[{d}] is missing entry for attack `{a}`")))?;
            let TableLeaf::PerMitigation(per_outcome) = leaf else {
                return Err(bad(format!(
                    "{name}[{d}][{a}] must nest per-outcome rows of per-mitigation values"
                )));
            };
            if per_outcome.len() != n_outcomes {
                return Err(bad(format!(
                    "{name}[{d}][{a}] has {} outcome rows, expected {n_outcomes}",
                    per_outcome.len()
                )));
            }
            for (si, per_d2) in per_outcome.iter().enumerate() {
                if per_d2.len() != n_mitigations {
                    return Err(bad(format!(
                        "{name}[{d}][{a}][outcome {si}] has {} entries, expected {n_mitigations} mitigations",
                        per_d2.len()
                    )));
                }
                for (mi, v) in per_d2.iter().enumerate() {
                    out[(di, ai, si, mi)] = T::c(*v);
                }
            }
        }
    }
    Ok(out)
}

/// Any of the game shapes the engine solves.
#[derive(Debug, Clone)]
pub enum LoadedGame<T> {
    Two(DiscreteGame<T>),
    PrivateInfo(PrivateInfoGame<T>),
    DefendAttackDefend(DefendAttackDefendGame<T>),
}

#[derive(Debug, Clone)]
pub struct GameDocument<T> {
    pub game: LoadedGame<T>,
    pub types: Option<TypeSpace<T>>,
}

impl<T: Real> GameDocument<T> {
    pub fn structure(&self) -> GameStructure {
        match &self.game {
            LoadedGame::Two(g) => g.structure(),
            LoadedGame::PrivateInfo(_) => GameStructure::SequentialDefendAttackPrivateInfo,
            LoadedGame::DefendAttackDefend(_) => GameStructure::DefendAttackDefend,
        }
    }

    pub fn shape(&self) -> crate::judgments::GameShape {
        match &self.game {
            LoadedGame::Two(g) => crate::judgments::GameShape::of_game(g),
            LoadedGame::PrivateInfo(g) => crate::judgments::GameShape::of_private_info(g),
            LoadedGame::DefendAttackDefend(g) => {
                crate::judgments::GameShape::of_defend_attack_defend(g)
            }
        }
    }
}

pub fn parse_game<T: Real>(json: &str) -> Result<GameDocument<T>, SchemaError> {
    let file: GameFile = serde_json::from_str(json)?;
    check_version(file.schema_version)?;
    let structure = parse_structure(&file.structure)?;
    let n_outcomes = file.outcomes.len();

    let types = |game: &DiscreteGame<T>| -> Result<Option<TypeSpace<T>>, SchemaError> {
        let Some(tf) = &file.types else {
            return Ok(None);
        };
        let labels = Labels::new(tf.labels.clone(), "attacker types")?;
        let mut overrides = Vec::with_capacity(tf.labels.len());
        for l in &tf.labels {
            let o = tf
                .overrides
                .get(l)
                .ok_or_else(|| bad(format!("types.overrides missing entry for type `{l}`")))?;
            overrides.push(TypeOverride {
                util: nested_to_array3(
                    &o.util_a,
                    &file.actions_d,
                    &file.actions_a,
                    n_outcomes,
                    "types.util_a",
                )?,
                prob: nested_to_array3(
                    &o.prob_a,
                    &file.actions_d,
                    &file.actions_a,
                    n_outcomes,
                    "types.prob_a",
                )?,
            });
        }
        let spec = TypeSpace {
            attacker_types: labels,
            attacker_prior: tf.prior.iter().map(|p| T::c(*p)).collect(),
            attacker_overrides: overrides,
            defender_types: None,
            defender_prior: None,
            defender_overrides: None,
        };
        spec.validate(game)?;
        Ok(Some(spec))
    };

    match structure {
        GameStructure::SequentialDefendAttackPrivateInfo => {
            let pi = file
                .private_info
                .as_ref()
                .ok_or_else(|| bad("structure sequential_da_private_info requires `private_info`"))?;
            let n_signals = pi.labels.len();
            let nd = file.actions_d.len();
            let na = file.actions_a.len();
            let mut prob = Array4::zeros((n_signals, nd, na, n_outcomes));
            let mut util = Array4::zeros((n_signals, nd, na, n_outcomes));
            for (vi, v) in pi.labels.iter().enumerate() {
                let p = pi
                    .prob_d
                    .get(v)
                    .ok_or_else(|| bad(format!("private_info.prob_d missing signal `{v}`")))?;
                let u = pi
                    .util_d
                    .get(v)
                    .ok_or_else(|| bad(format!("private_info.util_d missing signal `{v}`")))?;
                let p3: Array3<T> =
                    nested_to_array3(p, &file.actions_d, &file.actions_a, n_outcomes, "prob_d")?;
                let u3: Array3<T> =
                    nested_to_array3(u, &file.actions_d, &file.actions_a, n_outcomes, "util_d")?;
                for d in 0..nd {
                    for a in 0..na {
                        for s in 0..n_outcomes {
                            prob[(vi, d, a, s)] = p3[(d, a, s)];
                            util[(vi, d, a, s)] = u3[(d, a, s)];
                        }
                    }
                }
            }
            let prob_a = file
                .prob_a
                .as_ref()
                .map(|t| nested_to_array3(t, &file.actions_d, &file.actions_a, n_outcomes, "prob_a"))
                .transpose()?;
            let util_a = file
                .util_a
                .as_ref()
                .map(|t| nested_to_array3(t, &file.actions_d, &file.actions_a, n_outcomes, "util_a"))
                .transpose()?;
            let game = PrivateInfoGame::new(
                Labels::new(file.actions_d.clone(), "defender actions")?,
                Labels::new(file.actions_a.clone(), "attacker actions")?,
                Labels::new(file.outcomes.clone(), "outcomes")?,
                Labels::new(pi.labels.clone(), "signals")?,
                pi.prior.iter().map(|p| T::c(*p)).collect(),
                prob,
                util,
                prob_a,
                util_a,
            )?;
            Ok(GameDocument {
                game: LoadedGame::PrivateInfo(game),
                types: None,
            })
        }
        GameStructure::DefendAttackDefend => {
            let d2 = file
                .actions_d2
                .as_ref()
                .ok_or_else(|| bad("structure defend_attack_defend requires `actions_d2`"))?;
            let prob_rows = file
                .prob_d
                .as_ref()
                .ok_or_else(|| bad("`prob_d` is required"))?;
            let util_rows = file
                .util_d
                .as_ref()
                .ok_or_else(|| bad("`util_d` is required"))?;
            let prob = nested_to_array3(prob_rows, &file.actions_d, &file.actions_a, n_outcomes, "prob_d")?;
            let util = nested_to_array4(
                util_rows,
                &file.actions_d,
                &file.actions_a,
                n_outcomes,
                d2.len(),
                "util_d",
            )?;
            let prob_a = file
                .prob_a
                .as_ref()
                .map(|t| nested_to_array3(t, &file.actions_d, &file.actions_a, n_outcomes, "prob_a"))
                .transpose()?;
            let util_a = file
                .util_a
                .as_ref()
                .map(|t| {
                    nested_to_array4(
                        t,
                        &file.actions_d,
                        &file.actions_a,
                        n_outcomes,
                        d2.len(),
                        "util_a",
                    )
                })
                .transpose()?;
            let game = DefendAttackDefendGame::new(
                Labels::new(file.actions_d.clone(), "defense actions")?,
                Labels::new(file.actions_a.clone(), "attacker actions")?,
                Labels::new(file.outcomes.clone(), "outcomes")?,
                Labels::new(d2.clone(), "mitigation actions")?,
                prob,
                util,
                prob_a,
                util_a,
            )?;
            Ok(GameDocument {
                game: LoadedGame::DefendAttackDefend(game),
                types: None,
            })
        }
        _ => {
            let prob_rows = file
                .prob_d
                .as_ref()
                .ok_or_else(|| bad("`prob_d` is required"))?;
            let util_rows = file
                .util_d
                .as_ref()
                .ok_or_else(|| bad("`util_d` is required"))?;
            let prob = nested_to_array3(prob_rows, &file.actions_d, &file.actions_a, n_outcomes, "prob_d")?;
            let util = nested_to_array3(util_rows, &file.actions_d, &file.actions_a, n_outcomes, "util_d")?;
            let prob_a = file
                .prob_a
                .as_ref()
                .map(|t| nested_to_array3(t, &file.actions_d, &file.actions_a, n_outcomes, "prob_a"))
                .transpose()?;
            let util_a = file
                .util_a
                .as_ref()
                .map(|t| nested_to_array3(t, &file.actions_d, &file.actions_a, n_outcomes, "util_a"))
                .transpose()?;
            let game = DiscreteGame::new(
                structure,
                Labels::new(file.actions_d.clone(), "defender actions")?,
                Labels::new(file.actions_a.clone(), "attacker actions")?,
                Labels::new(file.outcomes.clone(), "outcomes")?,
                prob,
                util,
                prob_a,
                util_a,
            )?;
            let types = types(&game)?;
            Ok(GameDocument {
                game: LoadedGame::Two(game),
                types,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// judgments

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CellLeaf {
    Flat(Vec<DistSpecFile>),
    PerMitigation(Vec<Vec<DistSpecFile>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilSpecFile {
    PerCell { cells: NestedRows<CellLeaf> },
    Affine {
        base: NestedRows<TableLeaf>,
        scale: DistSpecFile,
        shift: DistSpecFile,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbSpecFile {
    Fixed { rows: NestedRows<TableLeaf> },
    Dirichlet { alphas: NestedRows<TableLeaf> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BeliefSpecFile {
    Uniform,
    Fixed { probs: Vec<f64> },
    Dirichlet { alphas: Vec<f64> },
    Recursive { config: LevelKFile },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelKFile {
    pub depth: usize,
    #[serde(default)]
    pub levels: Vec<LevelModelFile>,
    #[serde(default)]
    pub base_belief: Option<Vec<f64>>,
    pub samples_per_level: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelModelFile {
    pub util: UtilSpecFile,
    pub prob: ProbSpecFile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackerModelFile {
    Factored { util: UtilSpecFile, prob: ProbSpecFile },
    TypeMixture {
        prior: Vec<f64>,
        components: Vec<TypeComponentFile>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeComponentFile {
    pub util: NestedRows<TableLeaf>,
    pub prob: NestedRows<TableLeaf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorFile {
    pub util: UtilSpecFile,
    #[serde(default)]
    pub prob: Option<ProbSpecFile>,
    #[serde(default)]
    pub belief: Option<BeliefSpecFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonStrategicFile {
    pub prior: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FictitiousFile {
    pub alphas: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponentFile {
    pub weight: f64,
    pub concept: String,
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    #[serde(default)]
    pub level_k: Option<LevelKFile>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub counts: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureFile {
    pub components: Vec<MixtureComponentFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentsFile {
    pub schema_version: u32,
    #[serde(default)]
    pub attacker: Option<AttackerModelFile>,
    #[serde(default)]
    pub belief: Option<BeliefSpecFile>,
    #[serde(default)]
    pub mirror: Option<MirrorFile>,
    #[serde(default)]
    pub non_strategic: Option<NonStrategicFile>,
    #[serde(default)]
    pub fictitious: Option<FictitiousFile>,
    #[serde(default)]
    pub level_k: Option<LevelKFile>,
    #[serde(default)]
    pub mixture: Option<MixtureFile>,
}

/// Axis labels a judgment file is resolved against.
#[derive(Debug, Clone)]
pub struct JudgmentContext {
    pub actions_d: Vec<String>,
    pub actions_a: Vec<String>,
    pub n_outcomes: usize,
    /// Mitigation count for defend-attack-defend games.
    pub n_mitigations: Option<usize>,
}

impl JudgmentContext {
    pub fn of<T: Real>(doc: &GameDocument<T>) -> Self {
        match &doc.game {
            LoadedGame::Two(g) => JudgmentContext {
                actions_d: g.defender_actions().names().to_vec(),
                actions_a: g.attacker_actions().names().to_vec(),
                n_outcomes: g.n_outcomes(),
                n_mitigations: None,
            },
            LoadedGame::PrivateInfo(g) => JudgmentContext {
                actions_d: g.defender_actions().names().to_vec(),
                actions_a: g.attacker_actions().names().to_vec(),
                n_outcomes: g.outcomes().len(),
                n_mitigations: None,
            },
            LoadedGame::DefendAttackDefend(g) => JudgmentContext {
                actions_d: g.defense_actions().names().to_vec(),
                actions_a: g.attacker_actions().names().to_vec(),
                n_outcomes: g.outcomes().len(),
                n_mitigations: Some(g.mitigation_actions().len()),
            },
        }
    }

    fn table_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.actions_d.len(), self.actions_a.len(), self.n_outcomes];
        if let Some(m) = self.n_mitigations {
            dims.push(m);
        }
        dims
    }
}

fn nested_to_dyn<T: Real>(
    rows: &NestedRows<TableLeaf>,
    ctx: &JudgmentContext,
    name: &str,
) -> Result<ArrayD<T>, SchemaError> {
    match ctx.n_mitigations {
        None => Ok(
            nested_to_array3::<T>(rows, &ctx.actions_d, &ctx.actions_a, ctx.n_outcomes, name)?
                .into_dyn(),
        ),
        Some(m) => Ok(nested_to_array4::<T>(
            rows,
            &ctx.actions_d,
            &ctx.actions_a,
            ctx.n_outcomes,
            m,
            name,
        )?
        .into_dyn()),
    }
}

fn cells_to_dyn<T: Real>(
    rows: &NestedRows<CellLeaf>,
    ctx: &JudgmentContext,
    name: &str,
) -> Result<ArrayD<DistributionSpec<T>>, SchemaError> {
    let dims = ctx.table_dims();
    let mut out = ArrayD::from_elem(IxDyn(&dims), DistributionSpec::PointMass { value: T::zero() });
    for (di, d) in ctx.actions_d.iter().enumerate() {
        let row = rows
            .get(d)
            .ok_or_else(|| bad(format!("{name} is missing row for defense `{d}`")))?;
        for (ai, a) in ctx.actions_a.iter().enumerate() {
            let leaf = row
                .get(a)
                .ok_or_else(|| bad(format!("{name}[{d}] is missing entry for attack `{a}`")))?;
            match (leaf, ctx.n_mitigations) {
                (CellLeaf::Flat(specs), None) => {
                    if specs.len() != ctx.n_outcomes {
                        return Err(bad(format!(
                            "{name}[{d}][{a}] has {} specs, expected {} outcomes",
                            specs.len(),
                            ctx.n_outcomes
                        )));
                    }
                    for (si, f) in specs.iter().enumerate() {
                        out[IxDyn(&[di, ai, si])] = f.build()?;
                    }
                }
                (CellLeaf::PerMitigation(per_outcome), Some(m)) => {
                    if per_outcome.len() != ctx.n_outcomes {
                        return Err(bad(format!(
                            "{name}[{d}][{a}] has {} outcome rows, expected {}",
                            per_outcome.len(),
                            ctx.n_outcomes
                        )));
                    }
                    for (si, per_d2) in per_outcome.iter().enumerate() {
                        if per_d2.len() != m {
                            return Err(bad(format!(
                                "{name}[{d}][{a}][outcome {si}] has {} specs, expected {m}",
                                per_d2.len()
                            )));
                        }
                        for (mi, f) in per_d2.iter().enumerate() {
                            out[IxDyn(&[di, ai, si, mi])] = f.build()?;
                        }
                    }
                }
                _ => {
                    return Err(bad(format!(
                        "{name}[{d}][{a}] nesting does not match the game structure"
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn build_util_spec<T: Real>(
    f: &UtilSpecFile,
    ctx: &JudgmentContext,
    name: &str,
) -> Result<RandomUtilitySpec<T>, SchemaError> {
    match f {
        UtilSpecFile::PerCell { cells } => Ok(RandomUtilitySpec::PerCell {
            cells: cells_to_dyn(cells, ctx, name)?,
        }),
        UtilSpecFile::Affine { base, scale, shift } => Ok(RandomUtilitySpec::Affine {
            base: nested_to_dyn(base, ctx, name)?,
            scale: scale.build()?,
            shift: shift.build()?,
        }),
    }
}

fn build_prob_spec<T: Real>(
    f: &ProbSpecFile,
    ctx: &JudgmentContext,
    name: &str,
) -> Result<RandomProbabilitySpec<T>, SchemaError> {
    // probability rows never carry a mitigation axis
    let prob_ctx = JudgmentContext {
        n_mitigations: None,
        ..ctx.clone()
    };
    match f {
        ProbSpecFile::Fixed { rows } => Ok(RandomProbabilitySpec::Fixed {
            rows: nested_to_dyn(rows, &prob_ctx, name)?,
        }),
        ProbSpecFile::Dirichlet { alphas } => Ok(RandomProbabilitySpec::DirichletRows {
            alphas: nested_to_dyn(alphas, &prob_ctx, name)?,
        }),
    }
}

fn build_level_k<T: Real>(
    f: &LevelKFile,
    ctx: &JudgmentContext,
) -> Result<LevelKConfig<T>, SchemaError> {
    let levels = f
        .levels
        .iter()
        .enumerate()
        .map(|(i, m)| -> Result<LevelModel<T>, SchemaError> {
            Ok(LevelModel {
                util: build_util_spec(&m.util, ctx, &format!("level_k.levels[{i}].util"))?,
                prob: build_prob_spec(&m.prob, ctx, &format!("level_k.levels[{i}].prob"))?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = LevelKConfig {
        depth: f.depth,
        levels,
        base_belief: f
            .base_belief
            .as_ref()
            .map(|b| b.iter().map(|p| T::c(*p)).collect()),
        samples_per_level: f.samples_per_level,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn build_belief<T: Real>(
    f: &BeliefSpecFile,
    ctx: &JudgmentContext,
) -> Result<RandomBeliefSpec<T>, SchemaError> {
    Ok(match f {
        BeliefSpecFile::Uniform => RandomBeliefSpec::Uniform,
        BeliefSpecFile::Fixed { probs } => RandomBeliefSpec::Fixed {
            probs: probs.iter().map(|p| T::c(*p)).collect(),
        },
        BeliefSpecFile::Dirichlet { alphas } => RandomBeliefSpec::Dirichlet {
            alphas: alphas.iter().map(|a| T::c(*a)).collect(),
        },
        BeliefSpecFile::Recursive { config } => RandomBeliefSpec::Recursive {
            config: Box::new(build_level_k(config, ctx)?),
        },
    })
}

/// Everything a judgments file can carry: the judgment model itself plus
/// concept parameter blocks used by `solve --concept=...`.
#[derive(Debug, Clone)]
pub struct JudgmentsDocument<T> {
    pub model: Option<JudgmentModel<T>>,
    pub non_strategic_prior: Option<Vec<T>>,
    pub fictitious: Option<(Vec<T>, Vec<u64>)>,
    pub level_k: Option<LevelKConfig<T>>,
    pub mixture: Option<Vec<(T, SolutionConcept<T>)>>,
}

pub fn parse_judgments<T: Real>(
    json: &str,
    ctx: &JudgmentContext,
) -> Result<JudgmentsDocument<T>, SchemaError> {
    let file: JudgmentsFile = serde_json::from_str(json)?;
    check_version(file.schema_version)?;

    let model = match (&file.attacker, &file.belief) {
        (Some(att), belief) => {
            let attacker = match att {
                AttackerModelFile::Factored { util, prob } => AttackerRandomModel::Factored {
                    util: build_util_spec(util, ctx, "attacker.util")?,
                    prob: build_prob_spec(prob, ctx, "attacker.prob")?,
                },
                AttackerModelFile::TypeMixture { prior, components } => {
                    AttackerRandomModel::TypeMixture {
                        prior: prior.iter().map(|p| T::c(*p)).collect(),
                        utils: components
                            .iter()
                            .map(|c| nested_to_dyn(&c.util, ctx, "attacker.components.util"))
                            .collect::<Result<_, _>>()?,
                        probs: components
                            .iter()
                            .map(|c| {
                                let prob_ctx = JudgmentContext {
                                    n_mitigations: None,
                                    ..ctx.clone()
                                };
                                nested_to_dyn(&c.prob, &prob_ctx, "attacker.components.prob")
                            })
                            .collect::<Result<_, _>>()?,
                    }
                }
            };
            let belief = match belief {
                Some(b) => build_belief(b, ctx)?,
                None => RandomBeliefSpec::Uniform,
            };
            let mirror = file
                .mirror
                .as_ref()
                .map(|m| -> Result<MirrorModel<T>, SchemaError> {
                    Ok(MirrorModel {
                        util: build_util_spec(&m.util, ctx, "mirror.util")?,
                        prob: m
                            .prob
                            .as_ref()
                            .map(|p| build_prob_spec(p, ctx, "mirror.prob"))
                            .transpose()?,
                        belief: m
                            .belief
                            .as_ref()
                            .map(|b| build_belief(b, ctx))
                            .transpose()?,
                    })
                })
                .transpose()?;
            Some(JudgmentModel {
                attacker,
                belief,
                mirror,
            })
        }
        (None, _) => None,
    };

    let mixture = file
        .mixture
        .as_ref()
        .map(|m| -> Result<Vec<(T, SolutionConcept<T>)>, SchemaError> {
            m.components
                .iter()
                .map(|c| -> Result<(T, SolutionConcept<T>), SchemaError> {
                    let concept = match c.concept.as_str() {
                        "non-strategic" => SolutionConcept::NonStrategic {
                            prior: c
                                .prior
                                .as_ref()
                                .ok_or_else(|| bad("non-strategic component needs `prior`"))?
                                .iter()
                                .map(|p| T::c(*p))
                                .collect(),
                        },
                        "level-k" => SolutionConcept::LevelK {
                            config: build_level_k(
                                c.level_k
                                    .as_ref()
                                    .ok_or_else(|| bad("level-k component needs `level_k`"))?,
                                ctx,
                            )?,
                        },
                        "nash-seeking" | "bne" => SolutionConcept::NashSeeking,
                        "fictitious-play" => SolutionConcept::FictitiousPlay {
                            alphas: c
                                .alphas
                                .as_ref()
                                .ok_or_else(|| bad("fictitious-play component needs `alphas`"))?
                                .iter()
                                .map(|a| T::c(*a))
                                .collect(),
                            counts: c
                                .counts
                                .clone()
                                .ok_or_else(|| bad("fictitious-play component needs `counts`"))?,
                        },
                        other => return Err(bad(format!("unknown mixture concept `{other}`"))),
                    };
                    Ok((T::c(c.weight), concept))
                })
                .collect()
        })
        .transpose()?;

    Ok(JudgmentsDocument {
        model,
        non_strategic_prior: file
            .non_strategic
            .as_ref()
            .map(|n| n.prior.iter().map(|p| T::c(*p)).collect()),
        fictitious: file
            .fictitious
            .as_ref()
            .map(|f| {
                (
                    f.alphas.iter().map(|a| T::c(*a)).collect(),
                    f.counts.clone(),
                )
            }),
        level_k: file
            .level_k
            .as_ref()
            .map(|f| build_level_k(f, ctx))
            .transpose()?,
        mixture,
    })
}

// ---------------------------------------------------------------------------
// auctions

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidGridFile {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorAuctionFile {
    pub value_dist: DistSpecFile,
    pub fraction_dist: DistSpecFile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionFile {
    pub schema_version: u32,
    pub my_value: f64,
    pub opponent_value_dist: DistSpecFile,
    pub fraction_dist: DistSpecFile,
    pub bid_grid: BidGridFile,
    #[serde(default)]
    pub mirror: Option<MirrorAuctionFile>,
    #[serde(default)]
    pub my_value_dist: Option<DistSpecFile>,
    #[serde(default)]
    pub currency: Option<String>,
}

pub fn parse_auction<T: Real>(json: &str) -> Result<AuctionSpec<T>, SchemaError> {
    let file: AuctionFile = serde_json::from_str(json)?;
    check_version(file.schema_version)?;
    let spec = AuctionSpec {
        my_value: T::c(file.my_value),
        opponent_value_dist: file.opponent_value_dist.build()?,
        fraction_dist: file.fraction_dist.build()?,
        grid: BidGrid::new(
            T::c(file.bid_grid.lo),
            T::c(file.bid_grid.hi),
            file.bid_grid.points,
        )?,
        mirror: file
            .mirror
            .as_ref()
            .map(|m| -> Result<MirrorAuctionBeliefs<T>, SchemaError> {
                Ok(MirrorAuctionBeliefs {
                    value_dist: m.value_dist.build()?,
                    fraction_dist: m.fraction_dist.build()?,
                })
            })
            .transpose()?,
        my_value_dist: file
            .my_value_dist
            .as_ref()
            .map(|d| d.build())
            .transpose()?,
        currency: file.currency.clone(),
    };
    spec.validate()?;
    Ok(spec)
}
