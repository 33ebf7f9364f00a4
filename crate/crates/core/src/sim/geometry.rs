use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Point or vector on the floor plane, meters. `x` east, `y` north.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn length(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (o - self).length()
    }

    /// Unit vector for a compass heading (0 = north, clockwise).
    pub fn from_heading(heading_deg: f64) -> Vec2 {
        let h = heading_deg.to_radians();
        Vec2::new(libm::sin(h), libm::cos(h))
    }

    /// Compass heading of this vector, degrees in [0, 360).
    pub fn heading_deg(self) -> f64 {
        wrap_360(libm::atan2(self.x, self.y).to_degrees())
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

pub fn wrap_360(deg: f64) -> f64 {
    let w = deg % 360.0;
    let w = if w < 0.0 { w + 360.0 } else { w };
    // -1e-17 % 360 + 360 rounds to 360.0
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Wraps to (-180, 180].
pub fn wrap_180(deg: f64) -> f64 {
    let w = wrap_360(deg);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Bearing of `target` seen from `origin` facing `heading_deg`; positive to the right.
pub fn relative_bearing(origin: Vec2, heading_deg: f64, target: Vec2) -> f64 {
    wrap_180((target - origin).heading_deg() - heading_deg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    North,
    South,
    East,
    West,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::North, Side::South, Side::East, Side::West];

    pub const fn name(self) -> &'static str {
        match self {
            Side::North => "north",
            Side::South => "south",
            Side::East => "east",
            Side::West => "west",
        }
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub const fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Closed containment: points on the edge are inside.
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        self.contains(o.min) && self.contains(o.max)
    }

    /// Distance from an interior point to the boundary along `dir`, with the wall hit.
    pub fn exit_distance(&self, origin: Vec2, dir: Vec2) -> (f64, Side) {
        let mut best = (f64::INFINITY, Side::North);
        if dir.x > 0.0 {
            best = min_hit(best, ((self.max.x - origin.x) / dir.x, Side::East));
        } else if dir.x < 0.0 {
            best = min_hit(best, ((self.min.x - origin.x) / dir.x, Side::West));
        }
        if dir.y > 0.0 {
            best = min_hit(best, ((self.max.y - origin.y) / dir.y, Side::North));
        } else if dir.y < 0.0 {
            best = min_hit(best, ((self.min.y - origin.y) / dir.y, Side::South));
        }
        (best.0.max(0.0), best.1)
    }

    /// Nearest point on one side's segment.
    pub fn nearest_on_side(&self, side: Side, p: Vec2) -> Vec2 {
        let cx = p.x.clamp(self.min.x, self.max.x);
        let cy = p.y.clamp(self.min.y, self.max.y);
        match side {
            Side::North => Vec2::new(cx, self.max.y),
            Side::South => Vec2::new(cx, self.min.y),
            Side::East => Vec2::new(self.max.x, cy),
            Side::West => Vec2::new(self.min.x, cy),
        }
    }
}

fn min_hit(a: (f64, Side), b: (f64, Side)) -> (f64, Side) {
    if b.0 < a.0 {
        b
    } else {
        a
    }
}

/// Obstacle footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Circle {
        center: Vec2,
        radius: f64,
    },
    /// Axis-aligned box; `size` is full width and depth.
    Box {
        center: Vec2,
        size: Vec2,
    },
}

impl Shape {
    pub fn center(&self) -> Vec2 {
        match *self {
            Shape::Circle { center, .. } | Shape::Box { center, .. } => center,
        }
    }

    pub fn bounding_rect(&self) -> Rect {
        match *self {
            Shape::Circle { center, radius } => Rect::new(
                Vec2::new(center.x - radius, center.y - radius),
                Vec2::new(center.x + radius, center.y + radius),
            ),
            Shape::Box { center, size } => Rect::new(center - size * 0.5, center + size * 0.5),
        }
    }

    /// Open-set containment: the boundary itself is free space.
    pub fn contains_strict(&self, p: Vec2) -> bool {
        match *self {
            Shape::Circle { center, radius } => p.distance(center) < radius,
            Shape::Box { center, size } => {
                (p.x - center.x).abs() < size.x * 0.5 && (p.y - center.y).abs() < size.y * 0.5
            }
        }
    }

    /// Nearest point of the closed shape to `p` (p itself when inside).
    pub fn nearest_point(&self, p: Vec2) -> Vec2 {
        match *self {
            Shape::Circle { center, radius } => {
                let d = p - center;
                let len = d.length();
                if len <= radius {
                    p
                } else {
                    center + d * (radius / len)
                }
            }
            Shape::Box { .. } => {
                let r = self.bounding_rect();
                Vec2::new(p.x.clamp(r.min.x, r.max.x), p.y.clamp(r.min.y, r.max.y))
            }
        }
    }

    /// First intersection distance of a ray with the closed shape, if any.
    /// Zero when the origin is already inside.
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        match *self {
            Shape::Circle { center, radius } => {
                let oc = origin - center;
                let c = oc.dot(oc) - radius * radius;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let b = oc.dot(dir);
                let disc = b * b - c;
                if b >= 0.0 || disc < 0.0 {
                    return None;
                }
                Some(-b - libm::sqrt(disc))
            }
            Shape::Box { .. } => {
                let r = self.bounding_rect();
                let mut t_min = 0.0f64;
                let mut t_max = f64::INFINITY;
                for (o, d, lo, hi) in [
                    (origin.x, dir.x, r.min.x, r.max.x),
                    (origin.y, dir.y, r.min.y, r.max.y),
                ] {
                    if d == 0.0 {
                        if o < lo || o > hi {
                            return None;
                        }
                    } else {
                        let (a, b) = ((lo - o) / d, (hi - o) / d);
                        let (a, b) = if a <= b { (a, b) } else { (b, a) };
                        t_min = t_min.max(a);
                        t_max = t_max.min(b);
                        if t_min > t_max {
                            return None;
                        }
                    }
                }
                Some(t_min)
            }
        }
    }

    /// Moves a point that is strictly inside to just outside the nearest edge.
    pub fn push_out(&self, p: Vec2, margin: f64, fallback_dir: Vec2) -> Vec2 {
        match *self {
            Shape::Circle { center, radius } => {
                let d = p - center;
                let len = d.length();
                let dir = if len > 0.0 {
                    d * (1.0 / len)
                } else {
                    fallback_dir * -1.0
                };
                center + dir * (radius + margin)
            }
            Shape::Box { .. } => {
                let r = self.bounding_rect();
                let candidates = [
                    (p.x - r.min.x, Vec2::new(r.min.x - margin, p.y)),
                    (r.max.x - p.x, Vec2::new(r.max.x + margin, p.y)),
                    (p.y - r.min.y, Vec2::new(p.x, r.min.y - margin)),
                    (r.max.y - p.y, Vec2::new(p.x, r.max.y + margin)),
                ];
                candidates
                    .iter()
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|c| c.1)
                    .unwrap()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn headings_and_bearings() {
        let o = Vec2::new(0.0, 0.0);
        assert!(close(Vec2::new(0.0, 1.0).heading_deg(), 0.0));
        assert!(close(Vec2::new(1.0, 0.0).heading_deg(), 90.0));
        assert!(close(Vec2::new(-1.0, 0.0).heading_deg(), 270.0));
        // facing north, a point to the east is 90 degrees right
        assert!(close(relative_bearing(o, 0.0, Vec2::new(1.0, 0.0)), 90.0));
        assert!(close(relative_bearing(o, 90.0, Vec2::new(0.0, 1.0)), -90.0));
        assert!(close(relative_bearing(o, 0.0, Vec2::new(0.0, -1.0)), 180.0));
        assert!(close(wrap_180(-180.0), 180.0));
        assert!(close(wrap_360(-30.0), 330.0));
        assert!(close(wrap_360(720.0), 0.0));
    }

    #[test]
    fn ray_casts() {
        let c = Shape::Circle {
            center: Vec2::new(5.0, 0.0),
            radius: 1.0,
        };
        let east = Vec2::from_heading(90.0);
        assert!(close(c.ray_hit(Vec2::new(0.0, 0.0), east).unwrap(), 4.0));
        assert!(c.ray_hit(Vec2::new(0.0, 0.0), east * -1.0).is_none());
        assert_eq!(c.ray_hit(Vec2::new(5.0, 0.5), east), Some(0.0));

        let b = Shape::Box {
            center: Vec2::new(0.0, 5.0),
            size: Vec2::new(2.0, 2.0),
        };
        let north = Vec2::from_heading(0.0);
        assert!(close(b.ray_hit(Vec2::new(0.5, 0.0), north).unwrap(), 4.0));
        assert!(b.ray_hit(Vec2::new(1.5, 0.0), north).is_none());

        let room = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 5.0));
        let (t, side) = room.exit_distance(Vec2::new(2.0, 2.0), east);
        assert!(close(t, 8.0));
        assert_eq!(side, Side::East);
        let (t, side) = room.exit_distance(Vec2::new(2.0, 2.0), Vec2::from_heading(225.0));
        assert!(close(t, 2.0 * core::f64::consts::SQRT_2));
        assert!(side == Side::South || side == Side::West);
    }

    #[test]
    fn open_set_boundary() {
        let c = Shape::Circle {
            center: Vec2::new(0.0, 0.0),
            radius: 1.0,
        };
        assert!(!c.contains_strict(Vec2::new(1.0, 0.0)));
        assert!(c.contains_strict(Vec2::new(0.999, 0.0)));
        let b = Shape::Box {
            center: Vec2::new(0.0, 0.0),
            size: Vec2::new(2.0, 2.0),
        };
        assert!(!b.contains_strict(Vec2::new(1.0, 0.5)));
        let out = b.push_out(Vec2::new(0.9, 0.1), 1e-3, Vec2::new(1.0, 0.0));
        assert!(close(out.x, 1.001) && close(out.y, 0.1));
    }
}
