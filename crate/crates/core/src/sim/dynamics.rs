use serde::{Deserialize, Serialize};

use super::env::Environment;
use super::geometry::{wrap_360, Vec2};
use crate::action::Action;
use crate::record::Pose;

/// Gap left between a resolved collision and the surface it hit.
pub const CONTACT_MARGIN_M: f64 = 1e-3;

/// Full physical state. The pilot never sees this.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlimpState {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    /// Compass heading, 0 = north, clockwise, in [0, 360).
    pub heading_deg: f64,
    pub v_forward_mps: f64,
    pub v_vertical_mps: f64,
    pub omega_dps: f64,
}

impl BlimpState {
    pub fn at_rest(position: Vec2, z_m: f64, heading_deg: f64) -> Self {
        Self {
            x_m: position.x,
            y_m: position.y,
            z_m,
            heading_deg: wrap_360(heading_deg),
            v_forward_mps: 0.0,
            v_vertical_mps: 0.0,
            omega_dps: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x_m, self.y_m)
    }

    pub fn pose(&self) -> Pose {
        Pose {
            x_m: self.x_m,
            y_m: self.y_m,
            z_m: self.z_m,
            heading_deg: self.heading_deg,
        }
    }
}

/// Think-time distribution of one decision cycle, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyModel {
    pub mean_s: f64,
    pub sd_s: f64,
    /// Samples are clamped from below to this.
    #[serde(default = "default_min_latency")]
    pub min_s: f64,
}

fn default_min_latency() -> f64 {
    0.1
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            mean_s: 2.8,
            sd_s: 0.3,
            min_s: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt_s: f64,
    pub thrust_accel_mps2: f64,
    pub drag_per_s: f64,
    pub turn_rate_dps: f64,
    pub vertical_rate_mps: f64,
    pub latency: LatencyModel,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_s: 0.1,
            thrust_accel_mps2: 0.15,
            drag_per_s: 0.3,
            turn_rate_dps: 20.0,
            vertical_rate_mps: 0.2,
            latency: LatencyModel::default(),
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("dt_s must be positive, got {0}")]
    BadDt(f64),
    #[error("drag_per_s must be >= 0 with drag * dt <= 1, got {0}")]
    BadDrag(f64),
    #[error("latency sd must be >= 0 and mean positive")]
    BadLatency,
    #[error("{0} must be finite and >= 0")]
    Negative(&'static str),
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(ConfigError::BadDt(self.dt_s));
        }
        if !(self.drag_per_s >= 0.0 && self.drag_per_s * self.dt_s <= 1.0) {
            return Err(ConfigError::BadDrag(self.drag_per_s));
        }
        let l = &self.latency;
        if !(l.sd_s >= 0.0
            && l.mean_s > 0.0
            && l.min_s >= 0.0
            && l.sd_s.is_finite()
            && l.mean_s.is_finite())
        {
            return Err(ConfigError::BadLatency);
        }
        for (name, v) in [
            ("thrust_accel_mps2", self.thrust_accel_mps2),
            ("turn_rate_dps", self.turn_rate_dps),
            ("vertical_rate_mps", self.vertical_rate_mps),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::Negative(name));
            }
        }
        Ok(())
    }

    /// Terminal forward speed under sustained thrust.
    pub fn terminal_speed_mps(&self) -> f64 {
        if self.drag_per_s > 0.0 {
            self.thrust_accel_mps2 / self.drag_per_s
        } else {
            f64::INFINITY
        }
    }
}

/// Advances one step of `dt_s` with `active` held.
///
/// Forward speed follows dv/dt = thrust - drag*v, integrated exactly over
/// the step, so carried speed decays by e^(-drag*dt) and never exceeds
/// thrust/drag. Turns always thrust forward, so they arc rather than pivot.
/// Position moves the exact travel distance along the mid-step heading. Collisions are resolved last.
pub fn step(
    state: &BlimpState,
    env: &Environment,
    active: Action,
    cfg: &SimConfig,
    dt_s: f64,
) -> (BlimpState, bool) {
    let thrust = match active {
        Action::Forward | Action::TurnLeft | Action::TurnRight => cfg.thrust_accel_mps2,
        Action::Reverse => -cfg.thrust_accel_mps2,
        Action::Up | Action::Down | Action::Stop => 0.0,
    };
    let omega = match active {
        Action::TurnLeft => -cfg.turn_rate_dps,
        Action::TurnRight => cfg.turn_rate_dps,
        _ => 0.0,
    };
    let v_vertical = match active {
        Action::Up => cfg.vertical_rate_mps,
        Action::Down => -cfg.vertical_rate_mps,
        _ => 0.0,
    };

    // Exact solution of dv/dt = thrust - drag * v over the step.
    let v_old = state.v_forward_mps;
    let k = cfg.drag_per_s;
    let (v_new, travel) = if k > 0.0 {
        let v_inf = thrust / k;
        let decay = libm::exp(-k * dt_s);
        let v_new = v_inf + (v_old - v_inf) * decay;
        (v_new, v_inf * dt_s + (v_old - v_inf) * (1.0 - decay) / k)
    } else {
        (v_old + thrust * dt_s, (v_old + 0.5 * thrust * dt_s) * dt_s)
    };
    let heading = wrap_360(state.heading_deg + omega * dt_s);
    let pos =
        state.position() + Vec2::from_heading(state.heading_deg + 0.5 * omega * dt_s) * travel;
    let (z_lo, z_hi) = env.altitude_band();
    let z = (state.z_m + v_vertical * dt_s).clamp(z_lo, z_hi);

    let next = BlimpState {
        x_m: pos.x,
        y_m: pos.y,
        z_m: z,
        heading_deg: heading,
        v_forward_mps: v_new,
        v_vertical_mps: v_vertical,
        omega_dps: omega,
    };
    check_collision(&next, env)
}

/// Projects a blimp that entered an obstacle or left the bounds back to the
/// nearest free point and kills its forward speed. Touching a boundary
/// exactly is not a collision.
pub fn check_collision(state: &BlimpState, env: &Environment) -> (BlimpState, bool) {
    let mut p = state.position();
    let mut collided = false;
    let heading_dir = Vec2::from_heading(state.heading_deg);
    // Pushing out of one shape can land in another or past a wall.
    for _ in 0..8 {
        let mut moved = false;
        for o in &env.obstacles {
            if o.shape.contains_strict(p) {
                p = o.shape.push_out(p, CONTACT_MARGIN_M, heading_dir);
                moved = true;
            }
        }
        let b = &env.bounds;
        if !b.contains(p) {
            p = Vec2::new(
                p.x.clamp(b.min.x + CONTACT_MARGIN_M, b.max.x - CONTACT_MARGIN_M),
                p.y.clamp(b.min.y + CONTACT_MARGIN_M, b.max.y - CONTACT_MARGIN_M),
            );
            moved = true;
        }
        if !moved {
            break;
        }
        collided = true;
    }
    let mut out = *state;
    if collided {
        out.x_m = p.x;
        out.y_m = p.y;
        out.v_forward_mps = 0.0;
    }
    (out, collided)
}
