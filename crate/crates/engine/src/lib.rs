//! Adversarial risk analysis engine.
//!
//! A solver library for decision-making against intelligent opponents
//! without common-knowledge assumptions: the supported agent (the
//! "defender") expresses probabilistic judgments about her opponent's
//! utilities, outcome beliefs, and reasoning, and the engine propagates
//! them by Monte Carlo into a distribution over opponent actions under a
//! chosen solution concept (non-strategic, level-k, Nash-seeking,
//! fictitious play, or mixtures), then maximizes her expected utility.
//! Classical baselines (pure Nash, subgame-perfect, Bayes-Nash) are
//! included for comparison, along with dominance-based action elimination
//! and a continuous-bid sealed-auction module.
//!
//! Everything numeric is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the aliases below fix the common `f64` instantiation.
//! All Monte Carlo work draws from counter-addressed substreams keyed by
//! `(seed, purpose, sample index)`, so results are bit-identical across
//! thread counts.

pub mod ara;
pub mod auction;
pub mod dist;
pub mod dominance;
pub mod error;
pub mod game;
pub mod gt;
pub mod judgments;
pub mod numeric;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod schema;

pub use error::{ModelError, ModelResult, SolveError, SolveResult};
pub use scalar::Real;

/// Default-precision aliases.
pub type Dist = dist::DistributionSpec<f64>;
pub type Game = game::DiscreteGame<f64>;
pub type PrivateInfoGame = game::PrivateInfoGame<f64>;
pub type DefendAttackDefendGame = game::DefendAttackDefendGame<f64>;
pub type TypeSpace = game::TypeSpace<f64>;
pub type Judgments = judgments::JudgmentModel<f64>;
pub type AttackDistribution = report::ActionDistribution<f64>;
pub type Report = report::DecisionReport<f64>;
pub type Auction = auction::AuctionSpec<f64>;
