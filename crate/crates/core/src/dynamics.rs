//! Kinematic bicycle model and the six trajectory cost features.
//!
//! Coordinates: `x` is lateral, `y` longitudinal, and `θ = 0` points along +y.
//! Positive steering turns toward +x.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const FEATURE_COUNT: usize = 6;

/// Values of φ0..φ5 at one instant.
pub type Features = [f64; FEATURE_COUNT];

/// Per-feature cost weights; a player maximizes `w · φ`.
pub type Weights = [f64; FEATURE_COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    /// Lateral position (m).
    pub x: f64,
    /// Longitudinal position (m).
    pub y: f64,
    /// Speed (m/s).
    pub v: f64,
    /// Heading (rad).
    pub theta: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, v: f64, theta: f64) -> Self {
        Self { x, y, v, theta }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x, self.y, self.v, self.theta]
            .iter()
            .all(|c| c.is_finite())
        {
            return Err(invalid(format!("vehicle state {self:?} is not finite")));
        }
        if self.v < 0.0 {
            return Err(invalid(format!("vehicle speed {} is negative", self.v)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    /// Longitudinal acceleration (m/s²).
    pub accel: f64,
    /// Front-wheel steering angle (rad).
    pub steer: f64,
}

impl Control {
    pub fn new(accel: f64, steer: f64) -> Self {
        Self { accel, steer }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub wheelbase: f64,
    pub accel_max: f64,
    pub steer_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.7,
            accel_max: 3.0,
            steer_max: 0.3,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("wheelbase", self.wheelbase),
            ("accel_max", self.accel_max),
            ("steer_max", self.steer_max),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(invalid(format!(
                    "vehicle {name} must be positive, got {value}"
                )));
            }
        }
        if self.steer_max >= std::f64::consts::FRAC_PI_2 {
            return Err(invalid("steer_max must be below π/2"));
        }
        Ok(())
    }

    pub fn check_control(&self, control: Control) -> Result<()> {
        // allow for rounding in controls produced by grid arithmetic
        let slack = 1e-12;
        if !control.accel.is_finite() || control.accel.abs() > self.accel_max + slack {
            return Err(invalid(format!(
                "acceleration {} exceeds the limit {}",
                control.accel, self.accel_max
            )));
        }
        if !control.steer.is_finite() || control.steer.abs() > self.steer_max + slack {
            return Err(invalid(format!(
                "steering {} exceeds the limit {}",
                control.steer, self.steer_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureParams {
    /// Lateral lane-keeping shape (m⁻²).
    pub lambda_x: f64,
    /// Heading shape (rad⁻²).
    pub lambda_theta: f64,
    /// Speed-error shape (s²/m²).
    pub lambda_v: f64,
    /// Vehicle width (m).
    pub width: f64,
    /// Vehicle length (m).
    pub length: f64,
    /// Lateral safety margin (m).
    pub epsilon: f64,
    /// Longitudinal safety margin (m).
    pub delta: f64,
    /// Left lane centre (m).
    pub x_left: f64,
    /// Right lane centre (m).
    pub x_right: f64,
    pub v_limit: f64,
    pub theta_lane: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            lambda_x: 0.5,
            lambda_theta: 2.0,
            lambda_v: 0.25,
            width: 2.0,
            length: 4.5,
            epsilon: 0.5,
            delta: 2.0,
            x_left: -2.5,
            x_right: 2.5,
            v_limit: 15.0,
            theta_lane: 0.0,
        }
    }
}

impl FeatureParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_x", self.lambda_x),
            ("lambda_theta", self.lambda_theta),
            ("lambda_v", self.lambda_v),
            ("width", self.width),
            ("length", self.length),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(invalid(format!(
                    "feature parameter {name} must be positive, got {value}"
                )));
            }
        }
        let finite = [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("x_left", self.x_left),
            ("x_right", self.x_right),
            ("v_limit", self.v_limit),
            ("theta_lane", self.theta_lane),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(invalid(format!("feature parameter {name} must be finite")));
            }
        }
        if self.width + self.epsilon <= 0.0 || self.length + self.delta <= 0.0 {
            return Err(invalid("safety ellipse axes must be positive"));
        }
        Ok(())
    }
}

/// One integration step of length `dt`.
///
/// Speed is updated first and the new speed drives heading and position, so a
/// single step's acceleration already moves the vehicle.
pub fn step(
    state: &VehicleState,
    control: Control,
    dt: f64,
    params: &VehicleParams,
) -> Result<VehicleState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    state.validate()?;
    params.check_control(control)?;
    Ok(step_unchecked(state, control, dt, params))
}

#[inline]
pub(crate) fn step_unchecked(
    s: &VehicleState,
    u: Control,
    dt: f64,
    params: &VehicleParams,
) -> VehicleState {
    let v = (s.v + u.accel * dt).max(0.0);
    let theta = s.theta + v / params.wheelbase * u.steer.tan() * dt;
    let (sin, cos) = theta.sin_cos();
    VehicleState {
        x: s.x + v * sin * dt,
        y: s.y + v * cos * dt,
        v,
        theta,
    }
}

/// States after each control, starting from (and excluding) `initial`.
pub fn rollout(
    initial: &VehicleState,
    controls: &[Control],
    dt: f64,
    params: &VehicleParams,
) -> Result<Vec<VehicleState>> {
    let mut state = *initial;
    controls
        .iter()
        .map(|&u| {
            state = step(&state, u, dt, params)?;
            Ok(state)
        })
        .collect()
}

pub(crate) fn rollout_into(
    initial: &VehicleState,
    controls: impl Iterator<Item = Control>,
    dt: f64,
    params: &VehicleParams,
    out: &mut Vec<VehicleState>,
) {
    out.clear();
    let mut state = *initial;
    for u in controls {
        state = step_unchecked(&state, u, dt, params);
        out.push(state);
    }
}

#[inline]
fn bump(lambda: f64, err: f64) -> f64 {
    1.0 - (-lambda * err * err).exp()
}

/// Feature vector of vehicle `own` with respect to vehicle `other`:
///
/// * φ0, φ1: lateral offset from the left and right lane centres;
/// * φ2: speed error against the limit;
/// * φ3: heading error against the lane;
/// * φ4: intrusion into the safety ellipse around `other` (−1 at its centre,
///   0 outside);
/// * φ5: `tanh` of the longitudinal lead over `other`.
///
/// φ0..φ3 are `1 − exp(−λ e²)`: zero on target, approaching 1 far from it.
pub fn features(own: &VehicleState, other: &VehicleState, p: &FeatureParams) -> Features {
    let dx = own.x - other.x;
    let dy = own.y - other.y;
    let (sin, cos) = other.theta.sin_cos();
    let lateral = (dx * cos - dy * sin) / (p.width + p.epsilon);
    let longitudinal = (dx * sin + dy * cos) / (p.length + p.delta);
    let intrusion = (1.0 - lateral * lateral - longitudinal * longitudinal).max(0.0);
    [
        bump(p.lambda_x, own.x - p.x_left),
        bump(p.lambda_x, own.x - p.x_right),
        bump(p.lambda_v, own.v - p.v_limit),
        bump(p.lambda_theta, own.theta - p.theta_lane),
        -intrusion,
        dy.tanh(),
    ]
}

#[inline]
pub(crate) fn dot(w: &Weights, phi: &Features) -> f64 {
    w.iter().zip(phi).map(|(a, b)| a * b).sum()
}

pub(crate) fn cost_unchecked(
    own: &[VehicleState],
    other: &[VehicleState],
    weights: &Weights,
    params: &FeatureParams,
) -> f64 {
    own.iter()
        .zip(other)
        .map(|(a, b)| dot(weights, &features(a, b, params)))
        .sum()
}

/// `Σ_t w · φ(own_t, other_t)` over two equal-length trajectories.
pub fn cost(
    own: &[VehicleState],
    other: &[VehicleState],
    weights: &Weights,
    params: &FeatureParams,
) -> Result<f64> {
    if own.len() != other.len() {
        return Err(invalid(format!(
            "trajectory lengths differ: {} vs {}",
            own.len(),
            other.len()
        )));
    }
    Ok(cost_unchecked(own, other, weights, params))
}
