//! Bi-level trajectory optimisation and the receding-horizon loop.
//!
//! Each vehicle's control sequence over the horizon is parameterised by four
//! numbers: a constant acceleration and steering angle for the first half of
//! the horizon and another pair for the second half. Both levels use the same
//! derivative-free coordinate search, starting from zero controls:
//!
//! 1. sweep the coordinates, trying `grid_points` evenly spaced offsets each
//!    and keeping the best if it improves the objective by more than
//!    `tolerance`;
//! 2. repeat sweeps until none improves (at most `sweeps` times);
//! 3. shrink the offset spacing by 3 and go back to 1, `refinements` times.
//!
//! The leader's objective for a candidate is evaluated after the follower has
//! re-optimised its own controls against that candidate.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    cost_unchecked, rollout_into, step_unchecked, Control, FeatureParams, VehicleParams,
    VehicleState, Weights,
};
use crate::error::{invalid, Result};

const PARAMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Horizon length in steps.
    pub horizon: usize,
    /// Integration step (s).
    pub dt: f64,
    /// Offsets tried per coordinate, including the current value. Odd.
    pub grid_points: usize,
    pub sweeps: usize,
    pub refinements: usize,
    /// Smallest objective improvement that counts.
    pub tolerance: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            horizon: 6,
            dt: 0.2,
            grid_points: 7,
            sweeps: 4,
            refinements: 3,
            tolerance: 1e-6,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("planner horizon must be at least one step"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid(format!(
                "planner dt must be positive, got {}",
                self.dt
            )));
        }
        if self.grid_points < 3 || self.grid_points % 2 == 0 {
            return Err(invalid(format!(
                "grid_points must be odd and at least 3, got {}",
                self.grid_points
            )));
        }
        if self.sweeps == 0 {
            return Err(invalid("sweeps must be at least 1"));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(invalid("tolerance must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Inputs of one bi-level solve for a single game cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub leader: VehicleState,
    pub follower: VehicleState,
    pub leader_weights: Weights,
    pub follower_weights: Weights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub leader_controls: Vec<Control>,
    pub follower_controls: Vec<Control>,
    pub leader_trajectory: Vec<VehicleState>,
    pub follower_trajectory: Vec<VehicleState>,
    pub leader_cost: f64,
    pub follower_cost: f64,
}

/// Result of one receding-horizon step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcStep {
    pub leader_control: Control,
    pub follower_control: Control,
    pub leader_state: VehicleState,
    pub follower_state: VehicleState,
    /// The leader's plan, including the follower response it anticipated.
    pub plan: Plan,
    /// Controls the follower actually planned against the leader's plan.
    pub follower_controls: Vec<Control>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Planner {
    pub config: PlannerConfig,
    pub vehicle: VehicleParams,
    pub features: FeatureParams,
}

impl Planner {
    pub fn new(
        config: PlannerConfig,
        vehicle: VehicleParams,
        features: FeatureParams,
    ) -> Result<Self> {
        config.validate()?;
        vehicle.validate()?;
        features.validate()?;
        Ok(Self {
            config,
            vehicle,
            features,
        })
    }

    fn controls(&self, p: &[f64; PARAMS]) -> impl Iterator<Item = Control> + '_ {
        let n = self.config.horizon;
        let first = n.div_ceil(2);
        let (a0, s0, a1, s1) = (p[0], p[1], p[2], p[3]);
        (0..n).map(move |k| {
            if k < first {
                Control::new(a0, s0)
            } else {
                Control::new(a1, s1)
            }
        })
    }

    fn limits(&self) -> [f64; PARAMS] {
        let v = &self.vehicle;
        [v.accel_max, v.steer_max, v.accel_max, v.steer_max]
    }

    /// Maximises `objective` over the control parameters.
    fn search(&self, mut objective: impl FnMut(&[f64; PARAMS]) -> f64) -> ([f64; PARAMS], f64) {
        let cfg = &self.config;
        let limits = self.limits();
        let half = (cfg.grid_points / 2) as i32;
        let mut spacing = limits.map(|l| l / half as f64);
        let mut best = [0.0; PARAMS];
        let mut best_value = objective(&best);
        for _ in 0..=cfg.refinements {
            for _ in 0..cfg.sweeps {
                let mut improved = false;
                for c in 0..PARAMS {
                    let mut round_best = best;
                    let mut round_value = best_value;
                    for k in (-half..=half).filter(|&k| k != 0) {
                        let mut candidate = best;
                        candidate[c] =
                            (best[c] + k as f64 * spacing[c]).clamp(-limits[c], limits[c]);
                        if candidate[c] == best[c] {
                            continue;
                        }
                        let value = objective(&candidate);
                        if value > round_value {
                            round_best = candidate;
                            round_value = value;
                        }
                    }
                    if round_value > best_value + cfg.tolerance {
                        best = round_best;
                        best_value = round_value;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            spacing = spacing.map(|s| s / 3.0);
        }
        (best, best_value)
    }

    fn follower_search(
        &self,
        follower: &VehicleState,
        leader_trajectory: &[VehicleState],
        weights: &Weights,
        buf: &mut Vec<VehicleState>,
    ) -> ([f64; PARAMS], f64) {
        let dt = self.config.dt;
        self.search(|p| {
            rollout_into(follower, self.controls(p), dt, &self.vehicle, buf);
            cost_unchecked(buf, leader_trajectory, weights, &self.features)
        })
    }

    fn validate_states(&self, states: &[&VehicleState]) -> Result<()> {
        states.iter().try_for_each(|s| s.validate())
    }

    /// The follower's best controls against a fixed leader control sequence.
    pub fn follower_plan(
        &self,
        follower: &VehicleState,
        leader: &VehicleState,
        leader_controls: &[Control],
        follower_weights: &Weights,
    ) -> Result<Vec<Control>> {
        self.validate_states(&[follower, leader])?;
        if leader_controls.len() != self.config.horizon {
            return Err(invalid(format!(
                "leader controls have length {} but the horizon is {}",
                leader_controls.len(),
                self.config.horizon
            )));
        }
        for &u in leader_controls {
            self.vehicle.check_control(u)?;
        }
        let mut leader_trajectory = Vec::new();
        rollout_into(
            leader,
            leader_controls.iter().copied(),
            self.config.dt,
            &self.vehicle,
            &mut leader_trajectory,
        );
        let mut buf = Vec::with_capacity(self.config.horizon);
        let (p, _) = self.follower_search(follower, &leader_trajectory, follower_weights, &mut buf);
        Ok(self.controls(&p).collect())
    }

    /// Leader controls maximising the leader cost when the follower
    /// best-responds to every candidate.
    pub fn bilevel_plan(&self, request: &PlanRequest) -> Result<Plan> {
        self.validate_states(&[&request.leader, &request.follower])?;
        let dt = self.config.dt;
        let mut leader_buf = Vec::with_capacity(self.config.horizon);
        let mut follower_buf = Vec::with_capacity(self.config.horizon);
        let (leader_params, _) = self.search(|p| {
            rollout_into(
                &request.leader,
                self.controls(p),
                dt,
                &self.vehicle,
                &mut leader_buf,
            );
            let (fp, _) = self.follower_search(
                &request.follower,
                &leader_buf,
                &request.follower_weights,
                &mut follower_buf,
            );
            rollout_into(
                &request.follower,
                self.controls(&fp),
                dt,
                &self.vehicle,
                &mut follower_buf,
            );
            cost_unchecked(
                &leader_buf,
                &follower_buf,
                &request.leader_weights,
                &self.features,
            )
        });
        let leader_controls: Vec<Control> = self.controls(&leader_params).collect();
        let mut leader_trajectory = Vec::new();
        rollout_into(
            &request.leader,
            leader_controls.iter().copied(),
            dt,
            &self.vehicle,
            &mut leader_trajectory,
        );
        let (follower_params, _) = self.follower_search(
            &request.follower,
            &leader_trajectory,
            &request.follower_weights,
            &mut follower_buf,
        );
        let follower_controls: Vec<Control> = self.controls(&follower_params).collect();
        let mut follower_trajectory = Vec::new();
        rollout_into(
            &request.follower,
            follower_controls.iter().copied(),
            dt,
            &self.vehicle,
            &mut follower_trajectory,
        );
        let leader_cost = cost_unchecked(
            &leader_trajectory,
            &follower_trajectory,
            &request.leader_weights,
            &self.features,
        );
        let follower_cost = cost_unchecked(
            &follower_trajectory,
            &leader_trajectory,
            &request.follower_weights,
            &self.features,
        );
        Ok(Plan {
            leader_controls,
            follower_controls,
            leader_trajectory,
            follower_trajectory,
            leader_cost,
            follower_cost,
        })
    }

    /// Plans for the leader with `request`, lets the follower re-plan against
    /// the published leader controls with its own weights, and executes the
    /// first control of each.
    pub fn mpc_step(&self, request: &PlanRequest, follower_weights: &Weights) -> Result<MpcStep> {
        let plan = self.bilevel_plan(request)?;
        let follower_controls = self.follower_plan(
            &request.follower,
            &request.leader,
            &plan.leader_controls,
            follower_weights,
        )?;
        let leader_control = plan.leader_controls[0];
        let follower_control = follower_controls[0];
        let dt = self.config.dt;
        Ok(MpcStep {
            leader_control,
            follower_control,
            leader_state: step_unchecked(&request.leader, leader_control, dt, &self.vehicle),
            follower_state: step_unchecked(&request.follower, follower_control, dt, &self.vehicle),
            plan,
            follower_controls,
        })
    }
}
