//! Lane-merge scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! true_alpha = 0.9
//!
//! [game]
//! leader_actions = ["A", "B"]
//! follower_actions = ["Behind", "Ahead"]
//! rewards = [[[3, -2], [-10, 3]], [[0, -2], [1, 3]]]
//!
//! [initial.leader]
//! x = 2.5
//! y = 0.0
//! v = 12.0
//! theta = 0.0
//!
//! [initial.follower]
//! x = -2.5
//! y = 2.0
//! v = 12.0
//! theta = 0.0
//!
//! [[weights]]
//! cell = ["A", "Behind"]
//! leader = [-1, 0, -1, -1, 1, 1]
//! follower = [-1, 0, 0, -1, 1, -1]
//! ```
//!
//! The game takes either `rewards` (a `[leader, follower]` pair per cell) or
//! `labels` (an outcome label pair per cell). Every cell needs one
//! `[[weights]]` entry. Optional tables `strategy`, `planner`, `vehicle` and
//! `features` override defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{FeatureParams, VehicleParams, VehicleState, Weights};
use crate::error::{check_alpha, Error, Result};
use crate::explore::ExplorationStrategy;
use crate::game::{AltruismGame, CellLabels, OutcomeLabel, RewardPair};
use crate::planner::{Planner, PlannerConfig};

/// How the simulated follower picks its game column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FollowerMode {
    /// Best-respond to the leader's action.
    #[default]
    Follower,
    /// Act as if it were the leader and play its role-swapped equilibrium.
    Leader,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellWeights {
    pub leader: Weights,
    pub follower: Weights,
}

/// Cost weights for every game cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    cells: Vec<Vec<CellWeights>>,
}

impl WeightTable {
    pub fn new(cells: Vec<Vec<CellWeights>>) -> Result<Self> {
        let width = cells.first().map_or(0, Vec::len);
        if cells.is_empty() || width == 0 || cells.iter().any(|row| row.len() != width) {
            return Err(Error::Scenario(
                "weight table must be a non-empty rectangle".into(),
            ));
        }
        if cells
            .iter()
            .flatten()
            .any(|c| c.leader.iter().chain(&c.follower).any(|w| !w.is_finite()))
        {
            return Err(Error::Scenario("weights must be finite".into()));
        }
        Ok(Self { cells })
    }

    /// The same weights in every cell.
    pub fn uniform(rows: usize, cols: usize, weights: CellWeights) -> Self {
        Self {
            cells: vec![vec![weights; cols]; rows],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &CellWeights {
        &self.cells[i][j]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.cells.len(), self.cells[0].len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub game: AltruismGame,
    pub weights: WeightTable,
    pub planner: Planner,
    pub initial_leader: VehicleState,
    pub initial_follower: VehicleState,
    /// The follower's altruism; never shown to the leader.
    pub true_alpha: f64,
    pub strategy: ExplorationStrategy,
    pub steps: usize,
    pub follower_mode: FollowerMode,
    /// Divides the observation logits before the softmax.
    pub observation_temperature: f64,
    /// Recorded with every run. The solver is deterministic.
    pub seed: u64,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        file.build()
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.true_alpha)?;
        self.strategy.validate()?;
        self.planner.config.validate()?;
        self.planner.vehicle.validate()?;
        self.planner.features.validate()?;
        self.initial_leader.validate()?;
        self.initial_follower.validate()?;
        if self.weights.shape() != (self.game.leader_count(), self.game.follower_count()) {
            return Err(Error::Scenario(
                "weight table does not match the game shape".into(),
            ));
        }
        if !(self.observation_temperature > 0.0) || !self.observation_temperature.is_finite() {
            return Err(Error::Scenario(format!(
                "observation_temperature must be positive, got {}",
                self.observation_temperature
            )));
        }
        if self.steps == 0 {
            return Err(Error::Scenario("steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.planner.config.dt
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    true_alpha: f64,
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default)]
    follower_mode: FollowerMode,
    #[serde(default = "default_temperature")]
    observation_temperature: f64,
    game: GameSection,
    #[serde(default)]
    strategy: ExplorationStrategy,
    #[serde(default)]
    planner: PlannerConfig,
    #[serde(default)]
    vehicle: VehicleParams,
    #[serde(default)]
    features: FeatureParams,
    initial: InitialSection,
    weights: Vec<WeightEntry>,
}

fn default_steps() -> usize {
    30
}

fn default_temperature() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameSection {
    leader_actions: Vec<String>,
    follower_actions: Vec<String>,
    #[serde(default)]
    alpha_leader: f64,
    rewards: Option<Vec<Vec<[f64; 2]>>>,
    labels: Option<Vec<Vec<[OutcomeLabel; 2]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    leader: StateEntry,
    follower: StateEntry,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    x: f64,
    y: f64,
    v: f64,
    #[serde(default)]
    theta: f64,
}

impl From<StateEntry> for VehicleState {
    fn from(s: StateEntry) -> Self {
        VehicleState::new(s.x, s.y, s.v, s.theta)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightEntry {
    cell: [String; 2],
    leader: Weights,
    follower: Weights,
}

fn scenario_error(e: Error) -> Error {
    match e {
        Error::InvalidInput(msg) => Error::Scenario(msg),
        other => other,
    }
}

impl ScenarioFile {
    fn build(self) -> Result<Scenario> {
        let g = self.game;
        let game = match (g.rewards, g.labels) {
            (Some(rewards), None) => {
                let grid = rewards
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|[r, c]| RewardPair::new(r, c))
                            .collect()
                    })
                    .collect();
                AltruismGame::new(g.leader_actions, g.follower_actions, grid, g.alpha_leader)
            }
            (None, Some(labels)) => {
                let grid: Vec<Vec<CellLabels>> = labels
                    .into_iter()
                    .map(|row| row.into_iter().map(|[r, c]| (r, c).into()).collect())
                    .collect();
                AltruismGame::from_labels(
                    g.leader_actions,
                    g.follower_actions,
                    &grid,
                    g.alpha_leader,
                )
            }
            _ => Err(Error::Scenario(
                "game needs exactly one of `rewards` or `labels`".into(),
            )),
        }
        .map_err(scenario_error)?;

        let (m, n) = (game.leader_count(), game.follower_count());
        let mut cells: Vec<Vec<Option<CellWeights>>> = vec![vec![None; n]; m];
        for entry in self.weights {
            let [row, col] = &entry.cell;
            let i = game.leader_index(row).ok_or_else(|| {
                Error::Scenario(format!("weights: unknown leader action '{row}'"))
            })?;
            let j = game.follower_index(col).ok_or_else(|| {
                Error::Scenario(format!("weights: unknown follower action '{col}'"))
            })?;
            if cells[i][j]
                .replace(CellWeights {
                    leader: entry.leader,
                    follower: entry.follower,
                })
                .is_some()
            {
                return Err(Error::Scenario(format!(
                    "weights: cell ({row}, {col}) given twice"
                )));
            }
        }
        let cells = cells
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, c)| {
                        c.ok_or_else(|| {
                            Error::Scenario(format!(
                                "weights: missing cell ({}, {})",
                                game.leader_actions()[i],
                                game.follower_actions()[j]
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let scenario = Scenario {
            name: self.name.unwrap_or_else(|| "scenario".into()),
            weights: WeightTable::new(cells)?,
            planner: Planner {
                config: self.planner,
                vehicle: self.vehicle,
                features: self.features,
            },
            initial_leader: self.initial.leader.into(),
            initial_follower: self.initial.follower.into(),
            true_alpha: self.true_alpha,
            strategy: self.strategy,
            steps: self.steps,
            follower_mode: self.follower_mode,
            observation_temperature: self.observation_temperature,
            seed: self.seed,
            game,
        };
        scenario.validate().map_err(scenario_error)?;
        Ok(scenario)
    }
}
