use alloc::vec::Vec;

use super::dynamics::{step, BlimpState, ConfigError, SimConfig};
use super::env::{EnvError, Environment};
use super::geometry::Vec2;
use super::observe::{observe, ViewParams};
use crate::action::Action;
use crate::percept::Observation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("flight duration must be positive, got {0}")]
    BadDuration(f64),
}

#[derive(Debug, Clone)]
struct Walker {
    path: Vec<Vec2>,
    pos: Vec2,
    next: usize,
    speed: f64,
}

impl Walker {
    fn advance(&mut self, dt: f64) {
        if self.path.len() < 2 || self.speed <= 0.0 {
            return;
        }
        let mut budget = self.speed * dt;
        // A full lap per step is impossible at walking speed; bound the loop anyway.
        for _ in 0..=self.path.len() {
            let target = self.path[self.next];
            let gap = self.pos.distance(target);
            if gap > budget {
                self.pos = self.pos + (target - self.pos) * (budget / gap);
                return;
            }
            budget -= gap;
            self.pos = target;
            self.next = (self.next + 1) % self.path.len();
        }
    }
}

/// A running simulation: the blimp, the people, the latched action and the clock.
///
/// The latched action stays in force until [`World::set_action`] replaces
/// it, however long that takes.
#[derive(Debug, Clone)]
pub struct World {
    env: Environment,
    cfg: SimConfig,
    state: BlimpState,
    walkers: Vec<Walker>,
    active: Action,
    time_ms: u64,
    collisions: u64,
}

impl World {
    pub fn new(env: Environment, cfg: SimConfig) -> Result<Self, SimError> {
        env.validate()?;
        cfg.validate()?;
        let (lo, hi) = env.altitude_band();
        let state = BlimpState::at_rest(
            env.spawn.position,
            env.spawn.z_m.clamp(lo, hi),
            env.spawn.heading_deg,
        );
        let walkers = env
            .humans
            .iter()
            .map(|h| {
                let mut path = Vec::with_capacity(h.waypoints.len() + 1);
                path.push(h.start);
                path.extend(h.waypoints.iter().copied());
                Walker {
                    pos: h.start,
                    next: 1 % path.len(),
                    path,
                    speed: h.speed_mps,
                }
            })
            .collect();
        Ok(Self {
            env,
            cfg,
            state,
            walkers,
            active: Action::Stop,
            time_ms: 0,
            collisions: 0,
        })
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn state(&self) -> &BlimpState {
        &self.state
    }

    pub fn active(&self) -> Action {
        self.active
    }

    pub fn time_ms(&self) -> u64 {
        self.time_ms
    }

    /// Collision events since the start.
    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    pub fn humans(&self) -> Vec<Vec2> {
        self.walkers.iter().map(|w| w.pos).collect()
    }

    pub fn set_action(&mut self, action: Action) {
        self.active = action;
    }

    /// Runs physics for `ms` milliseconds in steps of `dt_s` (the last one
    /// shortened). Returns whether any step collided.
    pub fn advance(&mut self, ms: u64) -> bool {
        let dt_ms = libm::round(self.cfg.dt_s * 1000.0).max(1.0) as u64;
        let mut left = ms;
        let mut hit = false;
        while left > 0 {
            let chunk = left.min(dt_ms);
            let dt = if chunk == dt_ms {
                self.cfg.dt_s
            } else {
                chunk as f64 / 1000.0
            };
            let (next, collided) = step(&self.state, &self.env, self.active, &self.cfg, dt);
            self.state = next;
            if collided {
                self.collisions += 1;
                hit = true;
            }
            for w in &mut self.walkers {
                w.advance(dt);
            }
            left -= chunk;
            self.time_ms += chunk;
        }
        hit
    }

    pub fn observe(&self) -> Observation {
        self.observe_with(ViewParams::default())
    }

    pub fn panorama(&self) -> Observation {
        self.observe_with(ViewParams::panorama())
    }

    pub fn observe_with(&self, view: ViewParams) -> Observation {
        observe(&self.state, &self.env, &self.humans(), view, self.time_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn humans_walk_their_loop() {
        let env = Environment::corridor();
        let mut w = World::new(env, SimConfig::default()).unwrap();
        let start = w.humans()[0];
        w.advance(10_000);
        let moved = w.humans()[0].distance(start);
        assert!((moved - 8.0).abs() < 1e-9, "{moved}");
        // 26 m out and 26 m back at 0.8 m/s is 65 s per lap
        w.advance(55_000);
        assert!(w.humans()[0].distance(start) < 1e-6);
        assert_eq!(w.time_ms(), 65_000);
    }

    #[test]
    fn partial_steps_keep_clock_exact() {
        let mut w = World::new(Environment::atrium(), SimConfig::default()).unwrap();
        w.set_action(Action::Forward);
        w.advance(2_837);
        assert_eq!(w.time_ms(), 2_837);
        assert!(w.state().v_forward_mps > 0.0);
    }
}
