use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::geometry::{Rect, Shape, Side, Vec2};

/// Walking speed of simulated people.
pub const HUMAN_SPEED_MPS: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub label: String,
    #[serde(flatten)]
    pub shape: Shape,
}

/// A person who walks a closed loop start -> waypoints... -> start, or
/// stands still when there are no waypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanSpec {
    #[serde(default)]
    pub label: String,
    pub start: Vec2,
    #[serde(default)]
    pub waypoints: Vec<Vec2>,
    #[serde(default = "default_human_speed")]
    pub speed_mps: f64,
}

fn default_human_speed() -> f64 {
    HUMAN_SPEED_MPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Landmark {
    pub label: String,
    pub position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spawn {
    pub position: Vec2,
    #[serde(default)]
    pub heading_deg: f64,
    #[serde(default = "default_spawn_z")]
    pub z_m: f64,
}

fn default_spawn_z() -> f64 {
    1.5
}

/// Static description of an indoor arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub name: String,
    pub bounds: Rect,
    pub ceiling_m: f64,
    pub spawn: Spawn,
    /// Walls that are glazed and show up as windows.
    #[serde(default)]
    pub glass_walls: Vec<Side>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub humans: Vec<HumanSpec>,
    #[serde(default)]
    pub landmarks: Vec<Landmark>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("bounds are empty or inverted")]
    BadBounds,
    #[error("ceiling {0} m leaves no flight band")]
    BadCeiling(f64),
    #[error("obstacle {0:?} extends outside the bounds")]
    ObstacleOutOfBounds(String),
    #[error("obstacle {0:?} has a non-positive size")]
    BadObstacle(String),
    #[error("spawn point is outside the bounds or inside obstacle {0:?}")]
    SpawnBlocked(String),
    #[error("human {0:?} walks outside the bounds")]
    HumanOutOfBounds(String),
    #[error("landmark {0:?} is outside the bounds")]
    LandmarkOutOfBounds(String),
}

impl Environment {
    pub fn validate(&self) -> Result<(), EnvError> {
        let b = &self.bounds;
        if !(b.width() > 0.0 && b.height() > 0.0) {
            return Err(EnvError::BadBounds);
        }
        if !(self.ceiling_m > 0.4) {
            return Err(EnvError::BadCeiling(self.ceiling_m));
        }
        for o in &self.obstacles {
            let ok = match o.shape {
                Shape::Circle { radius, .. } => radius > 0.0,
                Shape::Box { size, .. } => size.x > 0.0 && size.y > 0.0,
            };
            if !ok {
                return Err(EnvError::BadObstacle(o.label.clone()));
            }
            if !b.contains_rect(&o.shape.bounding_rect()) {
                return Err(EnvError::ObstacleOutOfBounds(o.label.clone()));
            }
        }
        let spawn = self.spawn.position;
        if !b.contains(spawn) {
            return Err(EnvError::SpawnBlocked(String::from("bounds")));
        }
        if let Some(o) = self
            .obstacles
            .iter()
            .find(|o| o.shape.contains_strict(spawn))
        {
            return Err(EnvError::SpawnBlocked(o.label.clone()));
        }
        for h in &self.humans {
            if !core::iter::once(&h.start)
                .chain(&h.waypoints)
                .all(|p| b.contains(*p))
            {
                return Err(EnvError::HumanOutOfBounds(h.label.clone()));
            }
        }
        for l in &self.landmarks {
            if !b.contains(l.position) {
                return Err(EnvError::LandmarkOutOfBounds(l.label.clone()));
            }
        }
        Ok(())
    }

    pub fn is_glass(&self, side: Side) -> bool {
        self.glass_walls.contains(&side)
    }

    /// Altitude band the blimp may occupy.
    pub fn altitude_band(&self) -> (f64, f64) {
        (0.2, self.ceiling_m - 0.2)
    }

    pub fn preset(name: &str) -> Option<Environment> {
        match name {
            "atrium" => Some(Self::atrium()),
            "corridor" => Some(Self::corridor()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 2] = ["atrium", "corridor"];

    /// A 26 x 19.5 m atrium with a spiral staircase, a curved central seating
    /// island, a glazed north facade and two people walking loops. The
    /// dimensions are invented.
    pub fn atrium() -> Environment {
        let circle = |label: &str, x, y, r| Obstacle {
            label: label.into(),
            shape: Shape::Circle {
                center: Vec2::new(x, y),
                radius: r,
            },
        };
        Environment {
            name: "atrium".into(),
            bounds: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(26.0, 19.5)),
            ceiling_m: 6.0,
            spawn: Spawn {
                position: Vec2::new(13.0, 3.9),
                heading_deg: 0.0,
                z_m: 1.5,
            },
            glass_walls: vec![Side::North],
            obstacles: vec![
                circle("white spiral staircase", 5.2, 14.3, 1.2),
                circle("central curved seating", 13.0, 9.75, 1.6),
                Obstacle {
                    label: "coffee table".into(),
                    shape: Shape::Box {
                        center: Vec2::new(20.2, 5.2),
                        size: Vec2::new(1.6, 1.0),
                    },
                },
                circle("planter", 21.5, 15.6, 0.5),
                circle("speaker stand", 2.6, 3.9, 0.3),
            ],
            humans: vec![
                HumanSpec {
                    label: "visitor".into(),
                    start: Vec2::new(7.8, 5.2),
                    waypoints: vec![
                        Vec2::new(18.2, 5.2),
                        Vec2::new(18.2, 14.3),
                        Vec2::new(9.1, 15.0),
                    ],
                    speed_mps: HUMAN_SPEED_MPS,
                },
                HumanSpec {
                    label: "attendant".into(),
                    start: Vec2::new(23.4, 2.6),
                    waypoints: vec![Vec2::new(23.4, 16.9), Vec2::new(15.6, 17.5)],
                    speed_mps: HUMAN_SPEED_MPS,
                },
            ],
            landmarks: vec![
                Landmark {
                    label: "white spiral staircase".into(),
                    position: Vec2::new(5.2, 14.3),
                },
                Landmark {
                    label: "central curved seating".into(),
                    position: Vec2::new(13.0, 9.75),
                },
                Landmark {
                    label: "big window".into(),
                    position: Vec2::new(13.0, 19.5),
                },
                Landmark {
                    label: "distant lights".into(),
                    position: Vec2::new(24.0, 18.2),
                },
            ],
        }
    }

    /// A 30 x 4 m corridor with a bench, a pillar and one person pacing
    /// its length. Dimensions are invented.
    pub fn corridor() -> Environment {
        Environment {
            name: "corridor".into(),
            bounds: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(30.0, 4.0)),
            ceiling_m: 3.0,
            spawn: Spawn {
                position: Vec2::new(3.0, 2.5),
                heading_deg: 90.0,
                z_m: 1.5,
            },
            glass_walls: vec![Side::North],
            obstacles: vec![
                Obstacle {
                    label: "bench".into(),
                    shape: Shape::Box {
                        center: Vec2::new(8.0, 0.4),
                        size: Vec2::new(2.0, 0.6),
                    },
                },
                Obstacle {
                    label: "pillar".into(),
                    shape: Shape::Circle {
                        center: Vec2::new(15.0, 2.0),
                        radius: 0.4,
                    },
                },
                Obstacle {
                    label: "plant".into(),
                    shape: Shape::Circle {
                        center: Vec2::new(24.0, 3.5),
                        radius: 0.4,
                    },
                },
            ],
            humans: vec![HumanSpec {
                label: "passer-by".into(),
                start: Vec2::new(2.0, 1.2),
                waypoints: vec![Vec2::new(28.0, 1.2)],
                speed_mps: HUMAN_SPEED_MPS,
            }],
            landmarks: vec![
                Landmark {
                    label: "exit sign".into(),
                    position: Vec2::new(29.8, 2.0),
                },
                Landmark {
                    label: "notice board".into(),
                    position: Vec2::new(12.0, 3.9),
                },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in Environment::PRESETS {
            let env = Environment::preset(name).unwrap();
            assert_eq!(env.validate(), Ok(()), "{name}");
        }
        assert!(Environment::preset("moon").is_none());
    }

    #[test]
    fn validation_failures() {
        let mut env = Environment::atrium();
        env.spawn.position = Vec2::new(13.0, 9.75);
        assert!(
            matches!(env.validate(), Err(EnvError::SpawnBlocked(l)) if l == "central curved seating")
        );

        let mut env = Environment::atrium();
        env.obstacles[0].shape = Shape::Circle {
            center: Vec2::new(0.5, 5.0),
            radius: 1.0,
        };
        assert!(matches!(
            env.validate(),
            Err(EnvError::ObstacleOutOfBounds(_))
        ));

        let mut env = Environment::atrium();
        env.ceiling_m = 0.3;
        assert!(matches!(env.validate(), Err(EnvError::BadCeiling(_))));
    }
}
