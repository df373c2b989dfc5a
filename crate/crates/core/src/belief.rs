//! The leader's belief over the follower's altruism coefficient.
//!
//! Beliefs are piecewise-uniform densities on a finite partition of `[0, 1]`.
//! Every decision in a bimatrix game is constant on the cells of the partition
//! induced by the game's reward-line crossings, so this representation is
//! exact: expectations, conditionals and entropies need no sampling.
//!
//! A cell of zero width carries a point mass. Point masses arise when passive
//! interval updates collapse the support to a single value.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, invalid, Error, Result};
use crate::game::{dedup_close, AltruismGame};
use crate::interval::{AlphaInterval, AlphaSet};

/// Width assigned to a point mass when computing entropy, so that a fully
/// collapsed belief has the finite entropy `ln(1e-6)`.
pub const POINT_MASS_WIDTH: f64 = 1e-6;

/// Masses must sum to one within this tolerance.
pub const MASS_TOLERANCE: f64 = 1e-9;

const SPLIT_EPS: f64 = 1e-12;

/// Ordered breakpoints `0 = t0 < t1 < … < tK = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    breakpoints: Vec<f64>,
}

impl Partition {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(invalid("a partition must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("partition breakpoints must be strictly increasing"));
        }
        Ok(Self { breakpoints })
    }

    /// Partition of `[0, 1]` at the given interior points. Points outside
    /// `(0, 1)` are dropped and near-duplicates merged.
    pub fn from_interior(points: impl IntoIterator<Item = f64>) -> Self {
        let mut pts: Vec<f64> = points
            .into_iter()
            .filter(|p| *p > 0.0 && *p < 1.0)
            .collect();
        pts.sort_by(f64::total_cmp);
        dedup_close(&mut pts);
        let mut breakpoints = Vec::with_capacity(pts.len() + 2);
        breakpoints.push(0.0);
        breakpoints.extend(pts);
        breakpoints.push(1.0);
        Self { breakpoints }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn interior(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }
}

/// The union of all follower-preference breakpoints of every leader action.
pub fn partition_domain(game: &AltruismGame) -> Partition {
    Partition::from_interior((0..game.leader_count()).flat_map(|i| game.intersection_points(i)))
}

/// A closed range `[lo, hi] ⊆ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRange {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        check_alpha(lo)?;
        check_alpha(hi)?;
        if lo > hi {
            return Err(invalid(format!("empty range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn full() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Intersects the current range with an observed one, clamping so the result
/// is never empty. A disjoint observation collapses the range onto the
/// nearest endpoint of the current range.
pub fn passive_update(current: AlphaRange, observed: AlphaRange) -> AlphaRange {
    let lo = current.lo.max(current.hi.min(observed.lo));
    let hi = current.hi.min(current.lo.max(observed.hi));
    AlphaRange { lo, hi }
}

/// One cell of a belief: `[lo, hi]` carrying `mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefCell {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl BeliefCell {
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// A value of α that lies inside the cell (its midpoint).
    pub fn representative(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Piecewise-uniform probability distribution over α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBelief {
    breakpoints: Vec<f64>,
    masses: Vec<f64>,
}

impl IntervalBelief {
    /// `U(0, 1)`.
    pub fn uniform() -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            masses: vec![1.0],
        }
    }

    /// `U(0, 1)` expressed on the cells of `partition`.
    pub fn uniform_on(partition: &Partition) -> Self {
        Self {
            breakpoints: partition.breakpoints().to_vec(),
            masses: partition.cells().map(|(lo, hi)| hi - lo).collect(),
        }
    }

    /// Uniform on `range`; a point mass when the range has zero width.
    pub fn uniform_range(range: AlphaRange) -> Self {
        let mut breakpoints = vec![0.0];
        let mut masses = Vec::new();
        if range.lo > 0.0 {
            breakpoints.push(range.lo);
            masses.push(0.0);
        }
        breakpoints.push(range.hi);
        masses.push(1.0);
        if range.hi < 1.0 {
            breakpoints.push(1.0);
            masses.push(0.0);
        }
        Self {
            breakpoints,
            masses,
        }
    }

    pub fn point(alpha: f64) -> Result<Self> {
        Ok(Self::uniform_range(AlphaRange::new(alpha, alpha)?))
    }

    /// Builds a belief from non-decreasing breakpoints spanning `[0, 1]` and
    /// one mass per cell. Equal consecutive breakpoints denote a point mass.
    pub fn from_cells(breakpoints: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(invalid("belief breakpoints must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(invalid("belief breakpoints must be non-decreasing"));
        }
        if masses.len() + 1 != breakpoints.len() {
            return Err(invalid("need exactly one mass per belief cell"));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(invalid("belief masses must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(invalid(format!("belief masses sum to {total}, not 1")));
        }
        Ok(Self {
            breakpoints,
            masses,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn cells(&self) -> impl Iterator<Item = BeliefCell> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.masses)
            .map(|(w, &mass)| BeliefCell {
                lo: w[0],
                hi: w[1],
                mass,
            })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Smallest closed range holding all positive mass.
    pub fn support(&self) -> AlphaRange {
        let mut cells = self.cells().filter(|c| c.mass > 0.0);
        let first = cells.next().expect("a valid belief has positive mass");
        let hi = cells.last().map_or(first.hi, |c| c.hi);
        AlphaRange { lo: first.lo, hi }
    }

    /// Splits cells at `points` without changing the distribution.
    pub fn refined(&self, points: &[f64]) -> Self {
        let mut cuts: Vec<f64> = points
            .iter()
            .copied()
            .filter(|p| *p > 0.0 && *p < 1.0)
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut breakpoints = vec![0.0];
        let mut masses = Vec::with_capacity(self.masses.len() + cuts.len());
        for cell in self.cells() {
            let width = cell.hi - cell.lo;
            let mut lo = cell.lo;
            for &p in cuts
                .iter()
                .filter(|&&p| p > cell.lo + SPLIT_EPS && p < cell.hi - SPLIT_EPS)
            {
                breakpoints.push(p);
                masses.push(cell.mass * (p - lo) / width);
                lo = p;
            }
            breakpoints.push(cell.hi);
            masses.push(if lo == cell.lo {
                cell.mass
            } else {
                cell.mass * (cell.hi - lo) / width
            });
        }
        Self {
            breakpoints,
            masses,
        }
    }

    /// Fails with [`Error::PartitionMismatch`] when some point of `points`
    /// lies strictly inside a cell.
    pub fn check_refines(&self, points: &[f64]) -> Result<()> {
        for &p in points {
            if self
                .cells()
                .any(|c| p > c.lo + SPLIT_EPS && p < c.hi - SPLIT_EPS)
            {
                return Err(Error::PartitionMismatch(p));
            }
        }
        Ok(())
    }

    /// Differential entropy `-Σ m_k ln(m_k / w_k)` of the density. Point
    /// masses use width [`POINT_MASS_WIDTH`].
    pub fn entropy(&self) -> f64 {
        self.cells()
            .filter(|c| c.mass > 0.0)
            .map(|c| {
                let width = if c.is_point() {
                    POINT_MASS_WIDTH
                } else {
                    c.hi - c.lo
                };
                -c.mass * (c.mass / width).ln()
            })
            .sum()
    }

    /// `P(α < x)`.
    pub fn mass_below(&self, x: f64) -> Result<f64> {
        check_alpha(x)?;
        Ok(self
            .cells()
            .map(|c| {
                if c.is_point() {
                    if c.lo < x {
                        c.mass
                    } else {
                        0.0
                    }
                } else {
                    c.mass * ((x - c.lo) / (c.hi - c.lo)).clamp(0.0, 1.0)
                }
            })
            .sum())
    }

    pub fn mass_in_interval(&self, iv: &AlphaInterval) -> f64 {
        if iv.is_empty() {
            return 0.0;
        }
        self.cells()
            .map(|c| {
                if c.is_point() {
                    if iv.contains(c.lo) {
                        c.mass
                    } else {
                        0.0
                    }
                } else {
                    let overlap = (c.hi.min(iv.hi) - c.lo.max(iv.lo)).max(0.0);
                    c.mass * overlap / (c.hi - c.lo)
                }
            })
            .sum()
    }

    pub fn mass_in(&self, set: &AlphaSet) -> f64 {
        set.intervals()
            .iter()
            .map(|iv| self.mass_in_interval(iv))
            .sum()
    }

    /// `E[f(α)]` for an `f` that is constant on every cell.
    pub fn expectation(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.cells()
            .filter(|c| c.mass > 0.0)
            .map(|c| c.mass * f(c.representative()))
            .sum()
    }

    /// Multiplies each cell's mass by `weight(cell)` and renormalizes.
    pub(crate) fn reweighted(&self, mut weight: impl FnMut(&BeliefCell) -> f64) -> Result<Self> {
        let masses: Vec<f64> = self.cells().map(|c| c.mass * weight(&c)).collect();
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InferenceContradiction(
                "observation has zero probability under the current belief".into(),
            ));
        }
        Ok(Self {
            breakpoints: self.breakpoints.clone(),
            masses: masses.into_iter().map(|m| m / total).collect(),
        })
    }

    /// Restriction of the belief to the closed range `range`, renormalized.
    pub fn condition_on_interval(&self, range: AlphaRange) -> Result<Self> {
        let iv = AlphaInterval::closed(range.lo, range.hi);
        self.refined(&[range.lo, range.hi])
            .reweighted(|c| {
                let inside = if c.is_point() {
                    iv.contains(c.lo)
                } else {
                    c.lo >= range.lo - SPLIT_EPS && c.hi <= range.hi + SPLIT_EPS
                };
                if inside {
                    1.0
                } else {
                    0.0
                }
            })
            .map(Self::compact)
            .map_err(|_| {
                Error::InferenceContradiction(format!(
                    "range [{}, {}] has zero mass under the current belief",
                    range.lo, range.hi
                ))
            })
    }

    /// Bayes update after the leader played `leader_action` and observed
    /// evidence with per-column likelihoods `P(column | evidence)`.
    ///
    /// Each cell's mass is multiplied by the likelihood of the column the
    /// follower would choose for any α inside it. Cells are first split at the
    /// row's breakpoints so that every cell maps to a single column.
    pub fn bayes_update(
        &self,
        game: &AltruismGame,
        leader_action: usize,
        likelihoods: &[f64],
    ) -> Result<Self> {
        if leader_action >= game.leader_count() {
            return Err(invalid(format!(
                "leader action {leader_action} out of range"
            )));
        }
        if likelihoods.len() != game.follower_count() {
            return Err(invalid(format!(
                "expected {} likelihoods, got {}",
                game.follower_count(),
                likelihoods.len()
            )));
        }
        if likelihoods.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(invalid("likelihoods must be finite and nonnegative"));
        }
        if !likelihoods.iter().any(|l| *l > 0.0) {
            return Err(invalid("at least one likelihood must be positive"));
        }
        self.refined(&game.intersection_points(leader_action))
            .reweighted(|c| {
                likelihoods[game.best_response_unchecked(leader_action, c.representative())]
            })
    }

    /// Drops zero-width cells that carry no mass.
    fn compact(self) -> Self {
        let mut breakpoints = vec![0.0];
        let mut masses = Vec::with_capacity(self.masses.len());
        for cell in self.cells() {
            if cell.is_point() && cell.mass == 0.0 {
                continue;
            }
            breakpoints.push(cell.hi);
            masses.push(cell.mass);
        }
        Self {
            breakpoints,
            masses,
        }
    }
}

impl Default for IntervalBelief {
    fn default() -> Self {
        Self::uniform()
    }
}
