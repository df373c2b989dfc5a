//! Bimatrix Stackelberg games with altruism reweighting.
//!
//! The row player `R` leads and the column player `C` follows. Each player
//! blends its own cell reward with the other player's according to an
//! altruism coefficient in `[0, 1]`:
//!
//! ```text
//! r_a(i, j, α) = (1 - α) · r_ij(a) + α · r_ij(other)
//! ```
//!
//! Every quantity that depends on the follower's coefficient is piecewise
//! constant in α, with breakpoints where two of the follower's reward lines
//! cross. Those crossings are computed exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, invalid, Result};
use crate::interval::AlphaSet;

/// Relative tolerance under which two rewards count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Breakpoints closer than this are merged.
pub const BREAKPOINT_DEDUP: f64 = 1e-9;

pub(crate) fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    /// The row player `R`.
    Leader,
    /// The column player `C`.
    Follower,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::Leader => Player::Follower,
            Player::Follower => Player::Leader,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardPair {
    pub leader: f64,
    pub follower: f64,
}

impl RewardPair {
    pub fn new(leader: f64, follower: f64) -> Self {
        Self { leader, follower }
    }

    pub fn get(&self, player: Player) -> f64 {
        match player {
            Player::Leader => self.leader,
            Player::Follower => self.follower,
        }
    }
}

impl From<(f64, f64)> for RewardPair {
    fn from((leader, follower): (f64, f64)) -> Self {
        Self { leader, follower }
    }
}

/// Per-player outcome tag used to derive trinary rewards from accident
/// responsibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeLabel {
    /// The outcome is an accident and this player is to blame.
    #[serde(alias = "responsible")]
    AccidentResponsible,
    /// The outcome achieves this player's goal.
    #[serde(alias = "goal")]
    GoalAchieved,
    Neutral,
}

impl OutcomeLabel {
    pub fn reward(self) -> f64 {
        match self {
            OutcomeLabel::AccidentResponsible => -1.0,
            OutcomeLabel::GoalAchieved => 1.0,
            OutcomeLabel::Neutral => 0.0,
        }
    }
}

/// Labels for one cell, one per player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLabels {
    pub leader: OutcomeLabel,
    pub follower: OutcomeLabel,
}

impl From<(OutcomeLabel, OutcomeLabel)> for CellLabels {
    fn from((leader, follower): (OutcomeLabel, OutcomeLabel)) -> Self {
        Self { leader, follower }
    }
}

/// Maps a label grid to trinary rewards, each player independently.
pub fn build_responsibility_matrix(labels: &[Vec<CellLabels>]) -> Vec<Vec<RewardPair>> {
    labels
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| RewardPair::new(cell.leader.reward(), cell.follower.reward()))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub leader_action: usize,
    pub follower_action: usize,
    /// Raw (unweighted) reward of the chosen cell.
    pub leader_reward: f64,
    pub follower_reward: f64,
}

/// A leader/follower bimatrix game with a known leader altruism coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AltruismGame {
    leader_actions: Vec<String>,
    follower_actions: Vec<String>,
    rewards: Vec<Vec<RewardPair>>,
    alpha_leader: f64,
}

impl AltruismGame {
    pub fn new(
        leader_actions: Vec<String>,
        follower_actions: Vec<String>,
        rewards: Vec<Vec<RewardPair>>,
        alpha_leader: f64,
    ) -> Result<Self> {
        if leader_actions.is_empty() || follower_actions.is_empty() {
            return Err(invalid("a game needs at least one action per player"));
        }
        if rewards.len() != leader_actions.len() {
            return Err(invalid(format!(
                "reward grid has {} rows but there are {} leader actions",
                rewards.len(),
                leader_actions.len()
            )));
        }
        for (i, row) in rewards.iter().enumerate() {
            if row.len() != follower_actions.len() {
                return Err(invalid(format!(
                    "reward row {i} has {} cells but there are {} follower actions",
                    row.len(),
                    follower_actions.len()
                )));
            }
            if row
                .iter()
                .any(|r| !r.leader.is_finite() || !r.follower.is_finite())
            {
                return Err(invalid(format!("reward row {i} holds a non-finite value")));
            }
        }
        check_alpha(alpha_leader)?;
        Ok(Self {
            leader_actions,
            follower_actions,
            rewards,
            alpha_leader,
        })
    }

    /// Builds a game with generated labels `A1..Am` and `B1..Bn` and `α_R = 0`.
    pub fn from_rewards<R: Into<RewardPair> + Copy>(rewards: &[Vec<R>]) -> Result<Self> {
        let m = rewards.len();
        let n = rewards.first().map_or(0, Vec::len);
        let grid = rewards
            .iter()
            .map(|row| row.iter().map(|&r| r.into()).collect())
            .collect();
        Self::new(
            (1..=m).map(|i| format!("A{i}")).collect(),
            (1..=n).map(|j| format!("B{j}")).collect(),
            grid,
            0.0,
        )
    }

    pub fn from_labels(
        leader_actions: Vec<String>,
        follower_actions: Vec<String>,
        labels: &[Vec<CellLabels>],
        alpha_leader: f64,
    ) -> Result<Self> {
        Self::new(
            leader_actions,
            follower_actions,
            build_responsibility_matrix(labels),
            alpha_leader,
        )
    }

    pub fn with_alpha_leader(mut self, alpha_leader: f64) -> Result<Self> {
        check_alpha(alpha_leader)?;
        self.alpha_leader = alpha_leader;
        Ok(self)
    }

    pub fn leader_actions(&self) -> &[String] {
        &self.leader_actions
    }

    pub fn follower_actions(&self) -> &[String] {
        &self.follower_actions
    }

    pub fn leader_count(&self) -> usize {
        self.leader_actions.len()
    }

    pub fn follower_count(&self) -> usize {
        self.follower_actions.len()
    }

    pub fn alpha_leader(&self) -> f64 {
        self.alpha_leader
    }

    pub fn rewards(&self) -> &[Vec<RewardPair>] {
        &self.rewards
    }

    pub fn reward(&self, i: usize, j: usize) -> RewardPair {
        self.rewards[i][j]
    }

    pub fn leader_index(&self, label: &str) -> Option<usize> {
        self.leader_actions.iter().position(|a| a == label)
    }

    pub fn follower_index(&self, label: &str) -> Option<usize> {
        self.follower_actions.iter().position(|a| a == label)
    }

    fn check_cell(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.leader_count() || j >= self.follower_count() {
            return Err(invalid(format!(
                "cell ({i}, {j}) outside a {}x{} game",
                self.leader_count(),
                self.follower_count()
            )));
        }
        Ok(())
    }

    fn check_row(&self, i: usize) -> Result<()> {
        if i >= self.leader_count() {
            return Err(invalid(format!(
                "leader action {i} outside 0..{}",
                self.leader_count()
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn weighted(&self, i: usize, j: usize, player: Player, alpha: f64) -> f64 {
        let cell = self.rewards[i][j];
        (1.0 - alpha) * cell.get(player) + alpha * cell.get(player.other())
    }

    /// Reward of `player` in cell `(i, j)` after blending with the other
    /// player's reward at coefficient `alpha`.
    pub fn altruistic_reward(&self, i: usize, j: usize, player: Player, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        self.check_cell(i, j)?;
        Ok(self.weighted(i, j, player, alpha))
    }

    /// Leader's own (altruism-weighted at `α_R`) reward in a cell.
    #[inline]
    pub(crate) fn leader_value(&self, i: usize, j: usize) -> f64 {
        self.weighted(i, j, Player::Leader, self.alpha_leader)
    }

    pub(crate) fn best_response_unchecked(&self, i: usize, alpha: f64) -> usize {
        let mut best = 0;
        let mut best_val = self.weighted(i, 0, Player::Follower, alpha);
        let mut best_lead = self.leader_value(i, 0);
        for j in 1..self.follower_count() {
            let val = self.weighted(i, j, Player::Follower, alpha);
            let lead = self.leader_value(i, j);
            let better = if tied(val, best_val) {
                lead > best_lead && !tied(lead, best_lead)
            } else {
                val > best_val
            };
            if better {
                best = j;
                best_val = val;
                best_lead = lead;
            }
        }
        best
    }

    /// The follower's rational reply to leader action `i`.
    ///
    /// Ties go to the column with the larger leader reward, then to the lowest
    /// column index.
    pub fn follower_best_response(&self, i: usize, alpha: f64) -> Result<usize> {
        check_alpha(alpha)?;
        self.check_row(i)?;
        Ok(self.best_response_unchecked(i, alpha))
    }

    pub(crate) fn leader_reward_unchecked(&self, i: usize, alpha: f64) -> f64 {
        self.leader_value(i, self.best_response_unchecked(i, alpha))
    }

    /// What the leader receives for playing `i` when the follower's
    /// coefficient is `alpha` and it replies rationally.
    pub fn leader_reward_given_alpha(&self, i: usize, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        self.check_row(i)?;
        Ok(self.leader_reward_unchecked(i, alpha))
    }

    pub(crate) fn equilibrium_unchecked(&self, alpha_follower: f64) -> Equilibrium {
        let mut best = (0, self.best_response_unchecked(0, alpha_follower));
        let mut best_val = self.leader_value(best.0, best.1);
        for i in 1..self.leader_count() {
            let j = self.best_response_unchecked(i, alpha_follower);
            let val = self.leader_value(i, j);
            if val > best_val && !tied(val, best_val) {
                best = (i, j);
                best_val = val;
            }
        }
        let cell = self.rewards[best.0][best.1];
        Equilibrium {
            leader_action: best.0,
            follower_action: best.1,
            leader_reward: cell.leader,
            follower_reward: cell.follower,
        }
    }

    /// Pure-strategy Stackelberg equilibrium with `R` leading. Leader ties go
    /// to the lowest row index.
    pub fn stackelberg_equilibrium(&self, alpha_follower: f64) -> Result<Equilibrium> {
        check_alpha(alpha_follower)?;
        Ok(self.equilibrium_unchecked(alpha_follower))
    }

    /// The same game with roles exchanged: `C` leads with coefficient
    /// `alpha_new_leader` and `R` follows.
    pub fn role_swapped(&self, alpha_new_leader: f64) -> Result<Self> {
        check_alpha(alpha_new_leader)?;
        let rewards = (0..self.follower_count())
            .map(|j| {
                (0..self.leader_count())
                    .map(|i| {
                        let r = self.rewards[i][j];
                        RewardPair::new(r.follower, r.leader)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            leader_actions: self.follower_actions.clone(),
            follower_actions: self.leader_actions.clone(),
            rewards,
            alpha_leader: alpha_new_leader,
        })
    }

    /// The column `C` would commit to if it believed itself the leader.
    pub fn leader_preference_of_follower(&self, alpha_follower: f64) -> Result<usize> {
        let swapped = self.role_swapped(alpha_follower)?;
        Ok(swapped
            .equilibrium_unchecked(self.alpha_leader)
            .leader_action)
    }

    /// Every α (unfiltered) where two of the follower's reward lines in row
    /// `i` cross, exactly, sorted and deduplicated.
    pub fn row_crossings_exact(&self, i: usize) -> Vec<BigRational> {
        let row = &self.rewards[i];
        let mut out = Vec::new();
        for j in 0..row.len() {
            for k in (j + 1)..row.len() {
                if let Some(x) = crossing_exact(row[j], row[k]) {
                    out.push(x);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Points strictly inside `(0, 1)` where the follower's preference
    /// between some pair of columns in row `i` flips, as exact fractions.
    pub fn intersection_points_exact(&self, i: usize) -> Vec<BigRational> {
        let zero = BigRational::zero();
        let one = BigRational::from_integer(BigInt::from(1));
        self.row_crossings_exact(i)
            .into_iter()
            .filter(|x| *x > zero && *x < one)
            .collect()
    }

    pub fn intersection_points(&self, i: usize) -> Vec<f64> {
        to_sorted_floats(self.intersection_points_exact(i))
    }

    /// Crossings in `(0, 1)` between the follower's reward lines of any two
    /// cells of the matrix. Every α-dependent decision in the game (either
    /// role assignment) is constant between consecutive crossings.
    pub fn all_crossings(&self) -> Vec<f64> {
        let cells: Vec<RewardPair> = self.rewards.iter().flatten().copied().collect();
        let zero = BigRational::zero();
        let one = BigRational::from_integer(BigInt::from(1));
        let mut out = Vec::new();
        for a in 0..cells.len() {
            for b in (a + 1)..cells.len() {
                if let Some(x) = crossing_exact(cells[a], cells[b]) {
                    if x > zero && x < one {
                        out.push(x);
                    }
                }
            }
        }
        to_sorted_floats(out)
    }

    /// The α values for which the follower answers leader action `i` with
    /// column `j`.
    pub fn response_set(&self, i: usize, j: usize) -> Result<AlphaSet> {
        self.check_cell(i, j)?;
        let mut points = vec![0.0];
        points.extend(self.intersection_points(i));
        points.push(1.0);
        Ok(AlphaSet::from_piecewise(&points, |a| {
            self.best_response_unchecked(i, a) == j
        }))
    }
}

/// α at which the follower values two cells equally, if the lines are not
/// parallel.
fn crossing_exact(a: RewardPair, b: RewardPair) -> Option<BigRational> {
    let exact = |x: f64| BigRational::from_float(x).expect("rewards are validated finite");
    let (ac, ar) = (exact(a.follower), exact(a.leader));
    let (bc, br) = (exact(b.follower), exact(b.leader));
    // (1-α)·ac + α·ar = (1-α)·bc + α·br
    let denom = (&ar - &ac) - (&br - &bc);
    if denom.is_zero() {
        return None;
    }
    Some((bc - ac) / denom)
}

fn to_sorted_floats(exact: Vec<BigRational>) -> Vec<f64> {
    let mut values: Vec<f64> = exact.iter().filter_map(ToPrimitive::to_f64).collect();
    values.sort_by(f64::total_cmp);
    dedup_close(&mut values);
    values
}

pub(crate) fn dedup_close(values: &mut Vec<f64>) {
    values.dedup_by(|b, a| (*b - *a).abs() <= BREAKPOINT_DEDUP);
}
