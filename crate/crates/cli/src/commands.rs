//! Argument parsing, command dispatch, and report emission.
//!
//! All outputs are deterministic byte-for-byte given identical inputs and
//! seed: reports never embed timestamps or worker counts, and every solver
//! draws from counter-addressed substreams.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ara_engine::ara::{
    ara_attack_defend, ara_defend_attack_defend, ara_private_info, ara_sequential,
    ara_simultaneous, estimate_attack_distribution, estimate_conditional_attack_distribution,
    fictitious_play_predict, level_k_solve, solve_with_concept, SolutionConcept,
};
use ara_engine::auction::{
    mirror_equilibrium, nonstrategic_bid_cdf, optimal_bid, BidCdf, level2_analysis,
};
use ara_engine::dominance::{iterative_eliminate, EliminationOrder};
use ara_engine::error::{ModelError, SolveError};
use ara_engine::game::GameStructure;
use ara_engine::gt::{bne_sequential, bne_simultaneous, pure_nash, stackelberg_solve};
use ara_engine::judgments::JudgmentModel;
use ara_engine::report::{ActionDistribution, ConditionalActionDistribution, DecisionReport};
use ara_engine::schema::{
    parse_auction, parse_game, parse_judgments, GameDocument, JudgmentContext, JudgmentsDocument,
    LoadedGame, SchemaError,
};

pub const TOOL_NAME: &str = "ara-engine";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Bad inputs: malformed JSON, schema violations, missing sections,
    /// incompatible flags. Exit code 2.
    Validation(String),
    /// The model was valid but solving failed. Exit code 3.
    Solver(String),
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => CliError::Validation(m.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

type CliResult<V> = Result<V, CliError>;

#[derive(Parser)]
#[command(
    name = TOOL_NAME,
    version = TOOL_VERSION,
    about = "Adversarial risk analysis solvers and auction analyses"
)]
pub struct Cli {
    /// Worker threads (falls back to ARA_ENGINE_THREADS, then all cores).
    /// Results are identical for every thread count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Solve a game under a solution concept and write a decision report.
    Solve(SolveArgs),
    /// Estimate the opponent-action distribution and write it with
    /// standard errors.
    SimulateAttacks(SimulateArgs),
    /// Iteratively eliminate dominated defenses and support-separated
    /// attacks.
    Eliminate(EliminateArgs),
    /// Sealed-bid auction analyses on a continuous bid grid.
    Auction(AuctionArgs),
    /// Validate, eliminate, simulate, and solve in one run, emitting a
    /// consolidated report.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct IoArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args)]
pub struct GameArgs {
    /// Game specification (JSON, schema v1).
    #[arg(long, visible_alias = "input")]
    pub game: PathBuf,
    /// Judgments specification (JSON, schema v1).
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long = "K", default_value_t = 10_000)]
    pub samples: u64,
    /// Master seed; all substreams derive from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// ne | stackelberg | bne | ara | non-strategic | level-k |
    /// nash-seeking | fictitious-play | mixture
    #[arg(long)]
    pub concept: String,
    /// Level-k depth; must match the judgments file's level_k config.
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Args)]
pub struct EliminateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Which side is scanned first in each round.
    #[arg(long, value_enum, default_value_t = OrderArg::DefenderFirst)]
    pub order: OrderArg,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OrderArg {
    DefenderFirst,
    AttackerFirst,
}

#[derive(Args)]
pub struct AuctionArgs {
    /// Auction specification (JSON, schema v1).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub analysis: AnalysisArg,
    /// Convergence tolerance override (mirror analysis).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap for the mirror analysis.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AnalysisArg {
    Nonstrategic,
    Level1,
    Level2,
    Mirror,
}

#[derive(Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Concept for the final solve stage (defaults to ara).
    #[arg(long, default_value = "ara")]
    pub concept: String,
    #[arg(long)]
    pub k: Option<usize>,
    /// Skip the elimination stage.
    #[arg(long)]
    pub skip_eliminate: bool,
    #[arg(long, value_enum, default_value_t = OrderArg::DefenderFirst)]
    pub order: OrderArg,
    #[command(flatten)]
    pub io: IoArgs,
}

// ---------------------------------------------------------------------------
// report envelope

#[derive(Serialize)]
struct InputRecord {
    role: &'static str,
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Envelope {
    schema_version: u32,
    tool: ToolRecord,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    concept: Option<String>,
    seed: u64,
    samples: u64,
    inputs: Vec<InputRecord>,
    result: serde_json::Value,
}

#[derive(Serialize)]
struct ToolRecord {
    name: &'static str,
    version: &'static str,
}

struct LoadedInput {
    record: InputRecord,
    text: String,
}

fn load_input(role: &'static str, path: &Path) -> CliResult<LoadedInput> {
    let bytes = fs::read(path).map_err(|e| {
        CliError::Validation(format!("cannot read {role} file `{}`: {e}", path.display()))
    })?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| {
        CliError::Validation(format!("{role} file `{}` is not UTF-8: {e}", path.display()))
    })?;
    Ok(LoadedInput {
        record: InputRecord {
            role,
            path: path.display().to_string(),
            sha256,
        },
        text,
    })
}

fn emit(io: &IoArgs, payload: String) -> CliResult<()> {
    match &io.out {
        Some(path) => fs::write(path, payload).map_err(|e| {
            CliError::Validation(format!("cannot write `{}`: {e}", path.display()))
        }),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn json_payload(envelope: &Envelope) -> String {
    let mut s = serde_json::to_string_pretty(envelope).expect("report serializes");
    s.push('\n');
    s
}

fn to_value<V: Serialize>(v: &V) -> serde_json::Value {
    serde_json::to_value(v).expect("result serializes")
}

// ---------------------------------------------------------------------------
// CSV writers

fn csv_attack_distribution(pi: &ActionDistribution<f64>) -> String {
    let mut out = String::from("action,prob,std_err\n");
    for (i, a) in pi.actions().iter().enumerate() {
        writeln!(out, "{a},{},{}", pi.probs()[i], pi.std_err(i)).unwrap();
    }
    out
}

fn csv_conditional(cond: &ConditionalActionDistribution<f64>) -> String {
    let mut out = String::from("defense,action,prob,std_err\n");
    for (d, row) in cond.defenses().iter().zip(cond.rows()) {
        for (i, a) in row.actions().iter().enumerate() {
            writeln!(out, "{d},{a},{},{}", row.probs()[i], row.std_err(i)).unwrap();
        }
    }
    out
}

fn csv_bid_curve(cdf: &BidCdf<f64>, my_value: f64) -> String {
    let mut out = String::from("bid,cdf,expected_profit\n");
    for (b, p) in cdf.bids().iter().zip(cdf.probs()) {
        writeln!(out, "{b},{p},{}", (my_value - b) * p).unwrap();
    }
    out
}

// ---------------------------------------------------------------------------
// judgments resolution

fn parse_judgments_doc(
    args: &GameArgs,
    doc: &GameDocument<f64>,
    inputs: &mut Vec<InputRecord>,
) -> CliResult<Option<JudgmentsDocument<f64>>> {
    match &args.judgments {
        None => Ok(None),
        Some(path) => {
            let loaded = load_input("judgments", path)?;
            let ctx = JudgmentContext::of(doc);
            let parsed = parse_judgments::<f64>(&loaded.text, &ctx)?;
            inputs.push(loaded.record);
            Ok(Some(parsed))
        }
    }
}

/// Judgment model for ARA concepts: the judgments file's model, or the
/// game's own type space sampled with its prior.
fn require_model(
    doc: &GameDocument<f64>,
    judgments: &Option<JudgmentsDocument<f64>>,
) -> CliResult<JudgmentModel<f64>> {
    if let Some(j) = judgments {
        if let Some(model) = &j.model {
            return Ok(model.clone());
        }
    }
    if let (LoadedGame::Two(game), Some(types)) = (&doc.game, &doc.types) {
        return Ok(JudgmentModel::from_type_space(game, types)?);
    }
    Err(CliError::Validation(
        "this concept needs a judgments file with an `attacker` model (or a game with `types`)"
            .into(),
    ))
}

fn two_player<'a>(doc: &'a GameDocument<f64>, concept: &str) -> CliResult<&'a ara_engine::Game> {
    match &doc.game {
        LoadedGame::Two(g) => Ok(g),
        _ => Err(CliError::Validation(format!(
            "concept `{concept}` requires a two-agent game structure, got {}",
            doc.structure().name()
        ))),
    }
}

// ---------------------------------------------------------------------------
// solve

fn solve_result(
    doc: &GameDocument<f64>,
    judgments: &Option<JudgmentsDocument<f64>>,
    concept: &str,
    k: Option<usize>,
    samples: u64,
    seed: u64,
) -> CliResult<serde_json::Value> {
    let value = match concept {
        "ne" => {
            let eq = pure_nash(two_player(doc, concept)?)?;
            serde_json::json!({
                "kind": "pure_nash",
                "equilibria": eq.labeled(),
                "empty": eq.is_empty(),
            })
        }
        "stackelberg" => {
            let sol = stackelberg_solve(two_player(doc, concept)?)?;
            let mut v = to_value(&sol);
            v["kind"] = "stackelberg".into();
            v
        }
        "bne" => {
            let game = two_player(doc, concept)?;
            let types = doc.types.as_ref().ok_or_else(|| {
                CliError::Validation("concept `bne` requires a `types` section in the game".into())
            })?;
            if game.structure() == GameStructure::SequentialDefendAttack {
                let sol = bne_sequential(game, types)?;
                let mut v = to_value(&sol);
                v["kind"] = "bne_sequential".into();
                v
            } else {
                let profiles = bne_simultaneous(game, types, None)?;
                serde_json::json!({
                    "kind": "bne_profiles",
                    "profiles": to_value(&profiles),
                })
            }
        }
        "ara" => {
            let model = require_model(doc, judgments)?;
            let report = match &doc.game {
                LoadedGame::Two(g) => match g.structure() {
                    GameStructure::SequentialDefendAttack => {
                        ara_sequential(g, &model, samples, seed)?
                    }
                    GameStructure::SequentialAttackDefend => {
                        ara_attack_defend(g, &model, samples, seed)?
                    }
                    _ => ara_simultaneous(g, &model, samples, seed)?,
                },
                LoadedGame::PrivateInfo(g) => ara_private_info(g, &model, samples, seed)?,
                LoadedGame::DefendAttackDefend(g) => {
                    ara_defend_attack_defend(g, &model, samples, seed)?
                }
            };
            decision_value(&report)
        }
        "non-strategic" => {
            let game = two_player(doc, concept)?;
            let prior = judgments
                .as_ref()
                .and_then(|j| j.non_strategic_prior.clone())
                .ok_or_else(|| {
                    CliError::Validation(
                        "concept `non-strategic` needs a `non_strategic` section in the judgments file".into(),
                    )
                })?;
            let report =
                solve_with_concept(game, &SolutionConcept::NonStrategic { prior }, None, samples, seed)?;
            decision_value(&report)
        }
        "level-k" => {
            let game = two_player(doc, concept)?;
            let config = judgments
                .as_ref()
                .and_then(|j| j.level_k.clone())
                .ok_or_else(|| {
                    CliError::Validation(
                        "concept `level-k` needs a `level_k` section in the judgments file".into(),
                    )
                })?;
            if let Some(k) = k {
                if k != config.depth {
                    return Err(CliError::Validation(format!(
                        "--k {k} conflicts with the judgments level_k depth {}",
                        config.depth
                    )));
                }
            }
            let report = level_k_solve(game, &config, seed)?;
            decision_value(&report)
        }
        "nash-seeking" => {
            let game = two_player(doc, concept)?;
            let model = require_model(doc, judgments)?;
            let report = solve_with_concept(
                game,
                &SolutionConcept::NashSeeking,
                Some(&model),
                samples,
                seed,
            )?;
            decision_value(&report)
        }
        "fictitious-play" => {
            let game = two_player(doc, concept)?;
            let (alphas, counts) = judgments
                .as_ref()
                .and_then(|j| j.fictitious.clone())
                .ok_or_else(|| {
                    CliError::Validation(
                        "concept `fictitious-play` needs a `fictitious` section in the judgments file".into(),
                    )
                })?;
            let pi = fictitious_play_predict(
                &counts,
                &alphas,
                game.attacker_actions().names(),
            )?;
            let report = solve_with_concept(
                game,
                &SolutionConcept::NonStrategic { prior: pi.probs().to_vec() },
                None,
                samples.max(1),
                seed,
            )?;
            let mut v = decision_value(&report);
            v["concept"] = "fictitious_play".into();
            v["attack_distribution"] = to_value(&pi);
            v
        }
        "mixture" => {
            let game = two_player(doc, concept)?;
            let components = judgments
                .as_ref()
                .and_then(|j| j.mixture.clone())
                .ok_or_else(|| {
                    CliError::Validation(
                        "concept `mixture` needs a `mixture` section in the judgments file".into(),
                    )
                })?;
            let model = judgments.as_ref().and_then(|j| j.model.clone());
            let report = solve_with_concept(
                game,
                &SolutionConcept::Mixture { components },
                model.as_ref(),
                samples,
                seed,
            )?;
            decision_value(&report)
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown concept `{other}` (expected ne, stackelberg, bne, ara, non-strategic, \
                 level-k, nash-seeking, fictitious-play, or mixture)"
            )))
        }
    };
    Ok(value)
}

fn decision_value(report: &DecisionReport<f64>) -> serde_json::Value {
    let mut v = to_value(report);
    v["kind"] = "decision".into();
    v
}

fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    let game_input = load_input("game", &args.game.game)?;
    let doc: GameDocument<f64> = parse_game(&game_input.text)?;
    let mut inputs = vec![game_input.record];
    let judgments = parse_judgments_doc(&args.game, &doc, &mut inputs)?;
    let result = solve_result(
        &doc,
        &judgments,
        &args.concept,
        args.k,
        args.game.samples,
        args.game.seed,
    )?;

    match args.io.format {
        Format::Json => {
            let envelope = Envelope {
                schema_version: 1,
                tool: ToolRecord { name: TOOL_NAME, version: TOOL_VERSION },
                command: "solve",
                concept: Some(args.concept.clone()),
                seed: args.game.seed,
                samples: args.game.samples,
                inputs,
                result,
            };
            emit(&args.io, json_payload(&envelope))
        }
        Format::Csv => {
            let payload = csv_from_result(&result)?;
            emit(&args.io, payload)
        }
    }
}

fn csv_from_result(result: &serde_json::Value) -> CliResult<String> {
    // decision results carry their distribution inline
    if let Some(pi) = result.get("attack_distribution").filter(|v| !v.is_null()) {
        return Ok(csv_from_distribution_value(pi));
    }
    if let Some(cond) = result
        .get("conditional_distribution")
        .filter(|v| !v.is_null())
    {
        let defenses = cond["defenses"].as_array().unwrap();
        let rows = cond["rows"].as_array().unwrap();
        let mut out = String::from("defense,action,prob,std_err\n");
        for (d, row) in defenses.iter().zip(rows) {
            out.push_str(&csv_rows_of(row, Some(d.as_str().unwrap())));
        }
        return Ok(out);
    }
    Err(CliError::Validation(
        "csv format requires a concept that produces an action distribution".into(),
    ))
}

fn csv_from_distribution_value(pi: &serde_json::Value) -> String {
    let mut out = String::from("action,prob,std_err\n");
    out.push_str(&csv_rows_of(pi, None));
    out
}

fn csv_rows_of(dist: &serde_json::Value, defense: Option<&str>) -> String {
    let actions = dist["actions"].as_array().unwrap();
    let probs = dist["probs"].as_array().unwrap();
    let errs = dist["std_errs"].as_array().unwrap();
    let mut out = String::new();
    for i in 0..actions.len() {
        let a = actions[i].as_str().unwrap();
        let p = probs[i].as_f64().unwrap();
        let e = errs[i].as_f64().unwrap();
        match defense {
            Some(d) => writeln!(out, "{d},{a},{p},{e}").unwrap(),
            None => writeln!(out, "{a},{p},{e}").unwrap(),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// simulate-attacks

enum Simulated {
    Marginal(ActionDistribution<f64>),
    Conditional(ConditionalActionDistribution<f64>),
}

fn simulate(doc: &GameDocument<f64>, model: &JudgmentModel<f64>, samples: u64, seed: u64) -> CliResult<Simulated> {
    Ok(match &doc.game {
        LoadedGame::Two(g) => match g.structure() {
            GameStructure::SequentialDefendAttack => Simulated::Conditional(
                estimate_conditional_attack_distribution(g, model, samples, seed)?,
            ),
            GameStructure::SequentialAttackDefend => {
                let report = ara_attack_defend(g, model, samples, seed)?;
                Simulated::Marginal(report.attack_distribution.expect("attack distribution"))
            }
            _ => Simulated::Marginal(estimate_attack_distribution(g, model, samples, seed)?),
        },
        LoadedGame::PrivateInfo(g) => {
            let report = ara_private_info(g, model, samples, seed)?;
            Simulated::Marginal(report.attack_distribution.expect("attack distribution"))
        }
        LoadedGame::DefendAttackDefend(g) => {
            let report = ara_defend_attack_defend(g, model, samples, seed)?;
            Simulated::Conditional(report.conditional_distribution.expect("conditional"))
        }
    })
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let game_input = load_input("game", &args.game.game)?;
    let doc: GameDocument<f64> = parse_game(&game_input.text)?;
    let mut inputs = vec![game_input.record];
    let judgments = parse_judgments_doc(&args.game, &doc, &mut inputs)?;
    let model = require_model(&doc, &judgments)?;
    let simulated = simulate(&doc, &model, args.game.samples, args.game.seed)?;

    match args.io.format {
        Format::Json => {
            let result = match &simulated {
                Simulated::Marginal(pi) => {
                    let mut v = to_value(pi);
                    v["kind"] = "attack_distribution".into();
                    v
                }
                Simulated::Conditional(c) => {
                    let mut v = to_value(c);
                    v["kind"] = "conditional_attack_distribution".into();
                    v
                }
            };
            let envelope = Envelope {
                schema_version: 1,
                tool: ToolRecord { name: TOOL_NAME, version: TOOL_VERSION },
                command: "simulate-attacks",
                concept: None,
                seed: args.game.seed,
                samples: args.game.samples,
                inputs,
                result,
            };
            emit(&args.io, json_payload(&envelope))
        }
        Format::Csv => {
            let payload = match &simulated {
                Simulated::Marginal(pi) => csv_attack_distribution(pi),
                Simulated::Conditional(c) => csv_conditional(c),
            };
            emit(&args.io, payload)
        }
    }
}

// ---------------------------------------------------------------------------
// eliminate

fn cmd_eliminate(args: EliminateArgs) -> CliResult<()> {
    let game_input = load_input("game", &args.game.game)?;
    let doc: GameDocument<f64> = parse_game(&game_input.text)?;
    let mut inputs = vec![game_input.record];
    let judgments = parse_judgments_doc(&args.game, &doc, &mut inputs)?;
    let model = require_model(&doc, &judgments)?;
    let LoadedGame::Two(game) = &doc.game else {
        return Err(CliError::Validation(
            "eliminate requires a two-agent game structure".into(),
        ));
    };
    let order = match args.order {
        OrderArg::DefenderFirst => EliminationOrder::DefenderFirst,
        OrderArg::AttackerFirst => EliminationOrder::AttackerFirst,
    };
    let outcome = iterative_eliminate(game, &model, order)?;

    match args.io.format {
        Format::Json => {
            let result = serde_json::json!({
                "kind": "elimination",
                "log": to_value(&outcome.log),
                "kept_defenses": outcome.game.defender_actions().names(),
                "kept_attacks": outcome.game.attacker_actions().names(),
            });
            let envelope = Envelope {
                schema_version: 1,
                tool: ToolRecord { name: TOOL_NAME, version: TOOL_VERSION },
                command: "eliminate",
                concept: None,
                seed: args.game.seed,
                samples: args.game.samples,
                inputs,
                result,
            };
            emit(&args.io, json_payload(&envelope))
        }
        Format::Csv => {
            let mut out = String::from("round,agent,action,rule,witness\n");
            for e in &outcome.log.entries {
                writeln!(
                    out,
                    "{},{},{},{:?},{}",
                    e.round, e.agent, e.action, e.rule, e.witness
                )
                .unwrap();
            }
            emit(&args.io, out)
        }
    }
}

// ---------------------------------------------------------------------------
// auction

fn cmd_auction(args: AuctionArgs) -> CliResult<()> {
    let spec_input = load_input("auction spec", &args.spec)?;
    let spec: ara_engine::Auction = parse_auction(&spec_input.text)?;
    let inputs = vec![spec_input.record];
    let tol = args.tol.unwrap_or(1e-4);

    let (result, curve): (serde_json::Value, BidCdf<f64>) = match args.analysis {
        AnalysisArg::Nonstrategic => {
            let cdf = nonstrategic_bid_cdf(&spec.opponent_value_dist, &spec.fraction_dist, &spec.grid)?;
            (
                serde_json::json!({
                    "kind": "auction_nonstrategic",
                    "currency": spec.currency,
                    "grid": {"lo": spec.grid.lo, "hi": spec.grid.hi, "points": spec.grid.points},
                }),
                cdf,
            )
        }
        AnalysisArg::Level1 => {
            let cdf = nonstrategic_bid_cdf(&spec.opponent_value_dist, &spec.fraction_dist, &spec.grid)?;
            let out = optimal_bid(spec.my_value, &cdf);
            (
                serde_json::json!({
                    "kind": "auction_level1",
                    "currency": spec.currency,
                    "my_value": spec.my_value,
                    "bid": out.bid,
                    "expected_profit": out.expected_profit,
                    "profitable": out.profitable,
                }),
                cdf,
            )
        }
        AnalysisArg::Level2 => {
            let report = level2_analysis(&spec)?;
            (
                serde_json::json!({
                    "kind": "auction_level2",
                    "currency": spec.currency,
                    "my_value": spec.my_value,
                    "bid": report.optimal.bid,
                    "expected_profit": report.optimal.expected_profit,
                    "profitable": report.optimal.profitable,
                }),
                report.opponent_bid_cdf,
            )
        }
        AnalysisArg::Mirror => {
            let mine = spec.my_value_dist.clone().ok_or_else(|| {
                CliError::Validation(
                    "mirror analysis requires `my_value_dist` in the auction spec".into(),
                )
            })?;
            let (f_d, f_a, diag) =
                mirror_equilibrium(&mine, &spec.opponent_value_dist, &spec.grid, tol, args.max_iter)?;
            let out = optimal_bid(spec.my_value, &f_a);
            let _ = f_d;
            (
                serde_json::json!({
                    "kind": "auction_mirror",
                    "currency": spec.currency,
                    "my_value": spec.my_value,
                    "bid": out.bid,
                    "expected_profit": out.expected_profit,
                    "profitable": out.profitable,
                    "converged": diag.converged,
                    "iterations": diag.iterations,
                    "residuals": diag.residuals,
                }),
                f_a,
            )
        }
    };

    match args.io.format {
        Format::Json => {
            let envelope = Envelope {
                schema_version: 1,
                tool: ToolRecord { name: TOOL_NAME, version: TOOL_VERSION },
                command: "auction",
                concept: None,
                seed: 0,
                samples: 0,
                inputs,
                result,
            };
            emit(&args.io, json_payload(&envelope))
        }
        Format::Csv => emit(&args.io, csv_bid_curve(&curve, spec.my_value)),
    }
}

// ---------------------------------------------------------------------------
// pipeline

fn stage<V>(name: &str, r: CliResult<V>) -> CliResult<V> {
    r.map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("stage {name}: {m}")),
        CliError::Solver(m) => CliError::Solver(format!("stage {name}: {m}")),
    })
}

fn cmd_pipeline(args: PipelineArgs) -> CliResult<()> {
    // stage 1: model validation
    let game_input = load_input("game", &args.game.game)?;
    let doc: GameDocument<f64> = stage("validate", parse_game(&game_input.text).map_err(Into::into))?;
    let mut inputs = vec![game_input.record];
    let judgments = stage(
        "validate",
        parse_judgments_doc(&args.game, &doc, &mut inputs),
    )?;
    let model = stage("validate", require_model(&doc, &judgments))?;

    // stage 2: elimination (two-agent structures only)
    let mut elimination = None;
    let (solve_doc, solve_model) = if !args.skip_eliminate {
        match &doc.game {
            LoadedGame::Two(game) => {
                let order = match args.order {
                    OrderArg::DefenderFirst => EliminationOrder::DefenderFirst,
                    OrderArg::AttackerFirst => EliminationOrder::AttackerFirst,
                };
                let outcome = stage(
                    "eliminate",
                    iterative_eliminate(game, &model, order).map_err(Into::into),
                )?;
                let reduced_doc = GameDocument {
                    game: LoadedGame::Two(outcome.game.clone()),
                    types: doc.types.clone(),
                };
                elimination = Some(outcome.log.clone());
                (reduced_doc, outcome.judgments)
            }
            _ => (doc.clone(), model.clone()),
        }
    } else {
        (doc.clone(), model.clone())
    };

    // stage 3: attack simulation on the reduced model
    let simulated = stage(
        "simulate",
        simulate(&solve_doc, &solve_model, args.game.samples, args.game.seed),
    )?;

    // stage 4: defense adoption
    let reduced_judgments = judgments.map(|j| JudgmentsDocument {
        model: Some(solve_model.clone()),
        ..j
    });
    let mut decision = stage(
        "solve",
        solve_result(
            &solve_doc,
            &reduced_judgments,
            &args.concept,
            args.k,
            args.game.samples,
            args.game.seed,
        ),
    )?;
    if let Some(log) = &elimination {
        if decision.get("diagnostics").is_some() {
            decision["diagnostics"]["elimination_log"] = to_value(log);
        }
    }

    match args.io.format {
        Format::Json => {
            let result = serde_json::json!({
                "kind": "pipeline",
                "elimination": elimination.as_ref().map(to_value),
                "simulated": match &simulated {
                    Simulated::Marginal(pi) => to_value(pi),
                    Simulated::Conditional(c) => to_value(c),
                },
                "decision": decision,
            });
            let envelope = Envelope {
                schema_version: 1,
                tool: ToolRecord { name: TOOL_NAME, version: TOOL_VERSION },
                command: "pipeline",
                concept: Some(args.concept.clone()),
                seed: args.game.seed,
                samples: args.game.samples,
                inputs,
                result,
            };
            emit(&args.io, json_payload(&envelope))
        }
        Format::Csv => {
            let payload = match &simulated {
                Simulated::Marginal(pi) => csv_attack_distribution(pi),
                Simulated::Conditional(c) => csv_conditional(c),
            };
            emit(&args.io, payload)
        }
    }
}

// ---------------------------------------------------------------------------

fn configure_threads(requested: Option<usize>) -> CliResult<()> {
    let n = match requested {
        Some(n) => Some(n),
        None => std::env::var("ARA_ENGINE_THREADS")
            .ok()
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    CliError::Validation(format!("ARA_ENGINE_THREADS=`{v}` is not a thread count"))
                })
            })
            .transpose()?,
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Validation("thread count must be >= 1".into()));
        }
        // ignore AlreadyInitialized: tests may run several commands in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::SimulateAttacks(args) => cmd_simulate(args),
        Command::Eliminate(args) => cmd_eliminate(args),
        Command::Auction(args) => cmd_auction(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    }
}
