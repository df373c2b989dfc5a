//! Closed-loop lane-merge episodes.
//!
//! Every step the leader picks a game action from its belief, both vehicles
//! plan for their cell and execute one control, and the leader updates its
//! belief from the follower's observed control.

use serde::{Deserialize, Serialize};

use crate::belief::{partition_domain, AlphaRange, IntervalBelief, MASS_TOLERANCE};
use crate::dynamics::{dot, features, step, Control, VehicleState};
use crate::error::{invalid, Error, Result};
use crate::explore::{select_action, ActionEvaluation, ExplorationStrategy};
use crate::planner::PlanRequest;
use crate::scenario::{FollowerMode, Scenario};

/// `softmax(logits / temperature)`.
pub fn softmax_likelihoods(logits: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(invalid("softmax of an empty logit vector"));
    }
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(invalid(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(invalid("logits must be finite"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits
        .iter()
        .map(|l| ((l - max) / temperature).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Probability of each follower column given the follower applied `control`
/// from `follower` while the leader moved to `leader_next`.
///
/// Column `k`'s logit is `w_ikC · φ(follower', leader_next)`.
pub fn observation_likelihoods(
    scenario: &Scenario,
    leader_action: usize,
    follower: &VehicleState,
    control: Control,
    leader_next: &VehicleState,
) -> Result<Vec<f64>> {
    if leader_action >= scenario.game.leader_count() {
        return Err(invalid(format!(
            "leader action {leader_action} out of range"
        )));
    }
    let planner = &scenario.planner;
    let next = step(follower, control, planner.config.dt, &planner.vehicle)?;
    let phi = features(&next, leader_next, &planner.features);
    let logits: Vec<f64> = (0..scenario.game.follower_count())
        .map(|k| dot(&scenario.weights.get(leader_action, k).follower, &phi))
        .collect();
    softmax_likelihoods(&logits, scenario.observation_temperature)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Leader's game action.
    pub leader_action: usize,
    /// Follower column the leader planned for (its most likely prediction).
    pub predicted_response: usize,
    /// Column the simulated follower actually played.
    pub follower_action: usize,
    pub leader_control: Control,
    pub follower_control: Control,
    /// States after executing the controls.
    pub leader_state: VehicleState,
    pub follower_state: VehicleState,
    pub evaluations: Vec<ActionEvaluation>,
    pub likelihoods: Vec<f64>,
    /// Belief after this step's update.
    pub belief: IntervalBelief,
    pub warning: Option<String>,
}

impl StepRecord {
    /// The cell the leader committed to: `(leader_action, predicted_response)`.
    pub fn chosen_cell(&self) -> [usize; 2] {
        [self.leader_action, self.predicted_response]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelativeOutcome {
    Ahead,
    Behind,
    Level,
}

impl RelativeOutcome {
    pub fn from_gap(gap: f64) -> Self {
        if gap > 0.0 {
            RelativeOutcome::Ahead
        } else if gap < 0.0 {
            RelativeOutcome::Behind
        } else {
            RelativeOutcome::Level
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub scenario: String,
    pub strategy: ExplorationStrategy,
    pub true_alpha: f64,
    pub seed: u64,
    pub steps: usize,
    /// Leader minus follower longitudinal position at the end (m).
    pub final_relative_position: f64,
    /// Where the leader ended relative to the follower.
    pub outcome: RelativeOutcome,
    /// Smallest range holding every belief cell with non-negligible mass.
    pub final_support: AlphaRange,
    pub final_belief: IntervalBelief,
    pub chosen_cells: Vec<[usize; 2]>,
    pub chosen_actions: Vec<String>,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub records: Vec<StepRecord>,
    pub summary: EpisodeSummary,
}

fn significant_support(b: &IntervalBelief) -> AlphaRange {
    let mut cells = b.cells().filter(|c| c.mass > MASS_TOLERANCE);
    let Some(first) = cells.next() else {
        return AlphaRange::full();
    };
    let hi = cells.last().map_or(first.hi, |c| c.hi);
    AlphaRange { lo: first.lo, hi }
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

/// Runs one closed-loop episode.
pub fn run_episode(scenario: &Scenario) -> Result<Episode> {
    scenario.validate()?;
    let game = &scenario.game;
    let planner = &scenario.planner;
    let initial_belief = IntervalBelief::uniform_on(&partition_domain(game));
    let mut belief = initial_belief.clone();
    let mut leader = scenario.initial_leader;
    let mut follower = scenario.initial_follower;
    let mut records = Vec::with_capacity(scenario.steps);

    for t in 0..scenario.steps {
        let decision = select_action(game, &belief, &scenario.strategy)?;
        let i = decision.chosen;
        let predicted = argmax_lowest(&decision.evaluations[i].outcome_distribution);
        let actual = match scenario.follower_mode {
            FollowerMode::Follower => game.follower_best_response(i, scenario.true_alpha)?,
            FollowerMode::Leader => game.leader_preference_of_follower(scenario.true_alpha)?,
        };

        let assumed = scenario.weights.get(i, predicted);
        let request = PlanRequest {
            leader,
            follower,
            leader_weights: assumed.leader,
            follower_weights: assumed.follower,
        };
        let executed = planner.mpc_step(&request, &scenario.weights.get(i, actual).follower)?;

        let likelihoods = observation_likelihoods(
            scenario,
            i,
            &follower,
            executed.follower_control,
            &executed.leader_state,
        )?;
        let mut warning = None;
        belief = match belief.bayes_update(game, i, &likelihoods) {
            Ok(b) => b,
            Err(Error::InferenceContradiction(msg)) => {
                log::warn!("step {t}: {msg}; resetting belief to uniform");
                warning = Some(msg);
                initial_belief.clone()
            }
            Err(e) => return Err(e),
        };

        leader = executed.leader_state;
        follower = executed.follower_state;
        records.push(StepRecord {
            step: t,
            leader_action: i,
            predicted_response: predicted,
            follower_action: actual,
            leader_control: executed.leader_control,
            follower_control: executed.follower_control,
            leader_state: leader,
            follower_state: follower,
            evaluations: decision.evaluations,
            likelihoods,
            belief: belief.clone(),
            warning,
        });
    }

    let gap = leader.y - follower.y;
    let summary = EpisodeSummary {
        scenario: scenario.name.clone(),
        strategy: scenario.strategy,
        true_alpha: scenario.true_alpha,
        seed: scenario.seed,
        steps: scenario.steps,
        final_relative_position: gap,
        outcome: RelativeOutcome::from_gap(gap),
        final_support: significant_support(&belief),
        chosen_cells: records.iter().map(StepRecord::chosen_cell).collect(),
        chosen_actions: records
            .iter()
            .map(|r| game.leader_actions()[r.leader_action].clone())
            .collect(),
        warnings: records.iter().filter(|r| r.warning.is_some()).count(),
        final_belief: belief,
    };
    Ok(Episode { records, summary })
}

/// The same scenario with and without conflict awareness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictComparison {
    pub unaware: Episode,
    pub aware: Episode,
}

pub fn run_conflict_experiment(scenario: &Scenario) -> Result<ConflictComparison> {
    let with = |on: bool| {
        let mut s = scenario.clone();
        s.strategy = ExplorationStrategy {
            conflict_aware: on,
            ..s.strategy
        };
        run_episode(&s)
    };
    Ok(ConflictComparison {
        unaware: with(false)?,
        aware: with(true)?,
    })
}
