//! Leader/follower games where the leader does not know how altruistic the
//! follower is, and learns it by acting.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod dynamics;
pub mod error;
pub mod explore;
pub mod game;
pub mod interval;
pub mod planner;
pub mod scenario;
pub mod sim;

pub use belief::{
    partition_domain, passive_update, AlphaRange, BeliefCell, IntervalBelief, Partition,
};
pub use dynamics::{
    cost, features, rollout, step, Control, FeatureParams, Features, VehicleParams, VehicleState,
    Weights, FEATURE_COUNT,
};
pub use error::{Error, Result};
pub use explore::{
    conflict_adjusted_reward, conflict_aware_expected_reward, conflict_probability,
    conflict_region, expected_leader_reward, expected_reward_gain_bonus, info_gain_bonus,
    predicted_outcome_distribution, select_action, total_expected_reward, ActionEvaluation,
    Decision, ExplorationStrategy, StrategyKind,
};
pub use game::{
    build_responsibility_matrix, AltruismGame, CellLabels, Equilibrium, OutcomeLabel, Player,
    RewardPair,
};
pub use interval::{AlphaInterval, AlphaSet};
pub use planner::{MpcStep, Plan, PlanRequest, Planner, PlannerConfig};
pub use scenario::{CellWeights, FollowerMode, Scenario, WeightTable};
pub use sim::{
    observation_likelihoods, run_conflict_experiment, run_episode, softmax_likelihoods,
    ConflictComparison, Episode, EpisodeSummary, RelativeOutcome, StepRecord,
};
