//! Leader action selection under uncertainty about the follower's altruism.
//!
//! Each leader action is scored as its expected reward under the current
//! belief plus `λ` times an exploration bonus. The bonus is the expectation,
//! over the follower responses the belief predicts, of how much observing that
//! response would change things:
//!
//! * information gain: the drop in belief entropy;
//! * expected reward gain: the absolute change in `F(b)`, the summed expected
//!   reward of all leader actions.
//!
//! Expected reward gain vanishes once no further observation could change any
//! best response inside the belief support, so exploration stops when the
//! leader already knows enough to act.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::belief::{partition_domain, IntervalBelief};
use crate::error::{check_alpha, invalid, Result};
use crate::game::{tied, AltruismGame};
use crate::interval::AlphaSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    /// No bonus: maximise immediate expected reward.
    #[serde(rename = "passive")]
    Passive,
    #[serde(rename = "info-gain")]
    InfoGain,
    #[serde(rename = "reward-gain")]
    ExpectedRewardGain,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::Passive,
        StrategyKind::InfoGain,
        StrategyKind::ExpectedRewardGain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Passive => "passive",
            StrategyKind::InfoGain => "info-gain",
            StrategyKind::ExpectedRewardGain => "reward-gain",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "passive" => Ok(StrategyKind::Passive),
            "info-gain" => Ok(StrategyKind::InfoGain),
            "reward-gain" => Ok(StrategyKind::ExpectedRewardGain),
            other => Err(invalid(format!(
                "unknown strategy '{other}' (expected passive, info-gain or reward-gain)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationStrategy {
    pub kind: StrategyKind,
    /// Weight of the bonus relative to expected reward.
    pub lambda: f64,
    /// Score expected rewards with the conflict-adjusted reward.
    pub conflict_aware: bool,
    /// Count only increases of `F(b)` in the expected reward gain.
    pub positive_part: bool,
}

impl ExplorationStrategy {
    pub fn new(kind: StrategyKind, lambda: f64) -> Result<Self> {
        let s = Self {
            kind,
            lambda,
            conflict_aware: false,
            positive_part: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn passive() -> Self {
        Self {
            kind: StrategyKind::Passive,
            ..Self::default()
        }
    }

    pub fn with_conflict_awareness(mut self, on: bool) -> Self {
        self.conflict_aware = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

impl Default for ExplorationStrategy {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Passive,
            lambda: 1.0,
            conflict_aware: false,
            positive_part: false,
        }
    }
}

/// Score of one leader action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEvaluation {
    pub action: usize,
    pub expected_reward: f64,
    pub bonus: f64,
    /// `expected_reward + λ · bonus`.
    pub total: f64,
    /// Probability of each follower column under the current belief.
    pub outcome_distribution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub chosen: usize,
    pub evaluations: Vec<ActionEvaluation>,
}

fn game_breakpoints(game: &AltruismGame) -> Vec<f64> {
    partition_domain(game).interior().to_vec()
}

fn check_inputs(game: &AltruismGame, b: &IntervalBelief, i: usize) -> Result<()> {
    if i >= game.leader_count() {
        return Err(invalid(format!(
            "leader action {i} outside 0..{}",
            game.leader_count()
        )));
    }
    b.check_refines(&game_breakpoints(game))
}

fn expected_unchecked(game: &AltruismGame, b: &IntervalBelief, i: usize) -> f64 {
    b.expectation(|a| game.leader_reward_unchecked(i, a))
}

/// `E_{α∼b}[R_R(i, α)]`.
pub fn expected_leader_reward(game: &AltruismGame, b: &IntervalBelief, i: usize) -> Result<f64> {
    check_inputs(game, b, i)?;
    Ok(expected_unchecked(game, b, i))
}

fn outcome_unchecked(game: &AltruismGame, b: &IntervalBelief, i: usize) -> Vec<f64> {
    let mut dist = vec![0.0; game.follower_count()];
    for cell in b.cells().filter(|c| c.mass > 0.0) {
        dist[game.best_response_unchecked(i, cell.representative())] += cell.mass;
    }
    dist
}

/// Probability of each follower response to action `i` under `b`.
pub fn predicted_outcome_distribution(
    game: &AltruismGame,
    b: &IntervalBelief,
    i: usize,
) -> Result<Vec<f64>> {
    check_inputs(game, b, i)?;
    Ok(outcome_unchecked(game, b, i))
}

/// Belief after observing each possible response to `i`, paired with the
/// response's predicted probability. Impossible responses are skipped.
fn outcome_posteriors(
    game: &AltruismGame,
    b: &IntervalBelief,
    i: usize,
) -> Vec<(f64, IntervalBelief)> {
    outcome_unchecked(game, b, i)
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(j, p)| {
            let post = b
                .reweighted(|c| {
                    if game.best_response_unchecked(i, c.representative()) == j {
                        1.0
                    } else {
                        0.0
                    }
                })
                .expect("a response with positive probability has positive mass");
            (p, post)
        })
        .collect()
}

/// `F(b) = Σ_a E_{α∼b}[R_R(a, α)]`.
pub fn total_expected_reward(game: &AltruismGame, b: &IntervalBelief) -> Result<f64> {
    b.check_refines(&game_breakpoints(game))?;
    Ok(total_unchecked(game, b))
}

fn total_unchecked(game: &AltruismGame, b: &IntervalBelief) -> f64 {
    (0..game.leader_count())
        .map(|a| expected_unchecked(game, b, a))
        .sum()
}

/// Expected entropy reduction from playing `i`.
pub fn info_gain_bonus(game: &AltruismGame, b: &IntervalBelief, i: usize) -> Result<f64> {
    check_inputs(game, b, i)?;
    Ok(info_gain_unchecked(game, b, i))
}

fn info_gain_unchecked(game: &AltruismGame, b: &IntervalBelief, i: usize) -> f64 {
    let prior = b.entropy();
    let posterior: f64 = outcome_posteriors(game, b, i)
        .iter()
        .map(|(p, post)| p * post.entropy())
        .sum();
    (prior - posterior).max(0.0)
}

/// Expected absolute change of `F(b)` from playing `i`; with `positive_part`
/// only increases count.
pub fn expected_reward_gain_bonus(
    game: &AltruismGame,
    b: &IntervalBelief,
    i: usize,
    positive_part: bool,
) -> Result<f64> {
    check_inputs(game, b, i)?;
    Ok(reward_gain_unchecked(game, b, i, positive_part))
}

fn reward_gain_unchecked(
    game: &AltruismGame,
    b: &IntervalBelief,
    i: usize,
    positive_part: bool,
) -> f64 {
    let before = total_unchecked(game, b);
    outcome_posteriors(game, b, i)
        .iter()
        .map(|(p, post)| {
            let change = total_unchecked(game, post) - before;
            p * if positive_part {
                change.max(0.0)
            } else {
                change.abs()
            }
        })
        .sum()
}

/// Scores every leader action and picks the best; ties go to the lowest index.
pub fn select_action(
    game: &AltruismGame,
    b: &IntervalBelief,
    strategy: &ExplorationStrategy,
) -> Result<Decision> {
    strategy.validate()?;
    b.check_refines(&game_breakpoints(game))?;
    let conflict = strategy
        .conflict_aware
        .then(|| ConflictContext::new(game, b));
    let evaluations: Vec<ActionEvaluation> = (0..game.leader_count())
        .map(|i| {
            let expected_reward = match &conflict {
                Some(ctx) => ctx.expected_reward(game, i),
                None => expected_unchecked(game, b, i),
            };
            let bonus = match strategy.kind {
                StrategyKind::Passive => 0.0,
                StrategyKind::InfoGain => info_gain_unchecked(game, b, i),
                StrategyKind::ExpectedRewardGain => {
                    reward_gain_unchecked(game, b, i, strategy.positive_part)
                }
            };
            ActionEvaluation {
                action: i,
                expected_reward,
                bonus,
                total: expected_reward + strategy.lambda * bonus,
                outcome_distribution: outcome_unchecked(game, b, i),
            }
        })
        .collect();
    let best = evaluations
        .iter()
        .map(|e| e.total)
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen = evaluations
        .iter()
        .position(|e| e.total == best || tied(e.total, best))
        .expect("a game has at least one leader action");
    Ok(Decision {
        chosen,
        evaluations,
    })
}

fn in_conflict(game: &AltruismGame, alpha: f64) -> bool {
    let eq = game.equilibrium_unchecked(alpha);
    let preferred = game
        .leader_preference_of_follower(alpha)
        .expect("alpha comes from [0, 1]");
    preferred != eq.follower_action
}

/// The α values for which the follower, believing itself the leader, would
/// pick a different column than the one it plays as follower at the leader's
/// equilibrium action.
pub fn conflict_region(game: &AltruismGame) -> AlphaSet {
    let mut points = vec![0.0];
    points.extend(game.all_crossings());
    points.push(1.0);
    AlphaSet::from_piecewise(&points, |a| in_conflict(game, a))
}

/// Belief mass of [`conflict_region`].
pub fn conflict_probability(game: &AltruismGame, b: &IntervalBelief) -> f64 {
    b.mass_in(&conflict_region(game))
}

/// `(1 - p)·R_R(i, j) + p·R_R(i, j')`, where `p` is the conflict probability
/// under `b` and `j'` is the column the follower would choose as leader.
pub fn conflict_adjusted_reward(
    game: &AltruismGame,
    b: &IntervalBelief,
    cell: (usize, usize),
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let (i, j) = cell;
    if i >= game.leader_count() || j >= game.follower_count() {
        return Err(invalid(format!("cell ({i}, {j}) out of range")));
    }
    let p = conflict_probability(game, b);
    let preferred = game.leader_preference_of_follower(alpha)?;
    Ok((1.0 - p) * game.leader_value(i, j) + p * game.leader_value(i, preferred))
}

/// Expected conflict-adjusted reward of action `i`, integrating the follower's
/// response and its leader preference over the belief.
pub fn conflict_aware_expected_reward(
    game: &AltruismGame,
    b: &IntervalBelief,
    i: usize,
) -> Result<f64> {
    check_inputs(game, b, i)?;
    Ok(ConflictContext::new(game, b).expected_reward(game, i))
}

struct ConflictContext {
    probability: f64,
    /// Belief split wherever the follower's leader preference may change.
    refined: IntervalBelief,
}

impl ConflictContext {
    fn new(game: &AltruismGame, b: &IntervalBelief) -> Self {
        Self {
            probability: conflict_probability(game, b),
            refined: b.refined(&game.all_crossings()),
        }
    }

    fn expected_reward(&self, game: &AltruismGame, i: usize) -> f64 {
        let p = self.probability;
        self.refined.expectation(|a| {
            let j = game.best_response_unchecked(i, a);
            let preferred = game
                .leader_preference_of_follower(a)
                .expect("alpha in [0, 1]");
            (1.0 - p) * game.leader_value(i, j) + p * game.leader_value(i, preferred)
        })
    }
}
