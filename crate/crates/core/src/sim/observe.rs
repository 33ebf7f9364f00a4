//! Structured stand-in for the camera: every wall, obstacle, landmark and
//! person inside the field of view and range, plus the widest open sectors.
//! There is no occlusion.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::dynamics::BlimpState;
use super::env::Environment;
use super::geometry::{relative_bearing, Side, Vec2};
use crate::percept::{EntityKind, Observation, SceneEntity, CAMERA_FOV_DEG};

pub const DEFAULT_MAX_RANGE_M: f64 = 8.0;
/// Number of open sectors reported per view.
pub const OPEN_SECTORS: usize = 3;
/// A ray counts as open when its free distance is at least this fraction
/// of the longest free ray in view.
pub const OPEN_FRACTION: f64 = 0.75;
const MIN_RANGE_M: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewParams {
    pub fov_deg: f64,
    pub max_range_m: f64,
}

impl Default for ViewParams {
    fn default() -> Self {
        Self {
            fov_deg: CAMERA_FOV_DEG,
            max_range_m: DEFAULT_MAX_RANGE_M,
        }
    }
}

impl ViewParams {
    pub fn panorama() -> Self {
        Self {
            fov_deg: 360.0,
            ..Default::default()
        }
    }

    /// Integer-degree ray bearings covering the view.
    fn ray_bearings(&self) -> impl Iterator<Item = f64> {
        let (lo, hi) = if self.fov_deg >= 360.0 {
            (-179i32, 180i32)
        } else {
            let half = libm::floor(self.fov_deg / 2.0) as i32;
            (-half, half)
        };
        (lo..=hi).map(f64::from)
    }

    fn in_view(&self, bearing: f64) -> bool {
        bearing.abs() <= self.fov_deg / 2.0
    }
}

struct Ray {
    bearing: f64,
    /// Distance to the first wall or obstacle, capped at max range.
    free: f64,
    wall: (f64, Side),
}

fn wall_entity(env: &Environment, side: Side, bearing: f64, range: f64) -> SceneEntity {
    let kind = if env.is_glass(side) {
        EntityKind::Window
    } else {
        EntityKind::Wall
    };
    SceneEntity::new(
        kind,
        bearing,
        range.max(MIN_RANGE_M),
        format!(
            "{} {}",
            side.name(),
            if kind == EntityKind::Window {
                "window"
            } else {
                "wall"
            }
        ),
    )
}

/// Snapshot of what the camera would show.
pub fn observe(
    state: &BlimpState,
    env: &Environment,
    humans: &[Vec2],
    view: ViewParams,
    timestamp_ms: u64,
) -> Observation {
    let origin = state.position();
    let heading = state.heading_deg;
    let max_range = view.max_range_m;

    let rays: Vec<Ray> = view
        .ray_bearings()
        .map(|bearing| {
            let dir = Vec2::from_heading(heading + bearing);
            let wall = env.bounds.exit_distance(origin, dir);
            let free = env
                .obstacles
                .iter()
                .filter_map(|o| o.shape.ray_hit(origin, dir))
                .fold(wall.0, f64::min)
                .min(max_range);
            Ray {
                bearing,
                free,
                wall,
            }
        })
        .collect();

    let mut entities = Vec::new();

    for side in Side::ALL {
        let foot = env.bounds.nearest_on_side(side, origin);
        let mut best: Option<(f64, f64)> = None;
        let foot_bearing = relative_bearing(origin, heading, foot);
        let foot_range = origin.distance(foot);
        if foot_range > 0.0 && view.in_view(foot_bearing) {
            best = Some((foot_range, foot_bearing));
        }
        for r in rays.iter().filter(|r| r.wall.1 == side) {
            if best.is_none_or(|(d, _)| r.wall.0 < d) {
                best = Some((r.wall.0, r.bearing));
            }
        }
        if let Some((range, bearing)) = best.filter(|(d, _)| *d <= max_range) {
            entities.push(wall_entity(env, side, bearing, range));
        }
    }

    for o in &env.obstacles {
        let mut best: Option<(f64, f64)> = None;
        let near = o.shape.nearest_point(origin);
        let near_range = origin.distance(near);
        if near_range > 0.0 {
            let b = relative_bearing(origin, heading, near);
            if view.in_view(b) {
                best = Some((near_range, b));
            }
        }
        for r in &rays {
            let dir = Vec2::from_heading(heading + r.bearing);
            if let Some(t) = o.shape.ray_hit(origin, dir) {
                if best.is_none_or(|(d, _)| t < d) {
                    best = Some((t, r.bearing));
                }
            }
        }
        if let Some((range, bearing)) = best.filter(|(d, _)| *d <= max_range) {
            entities.push(SceneEntity::new(
                EntityKind::Obstacle,
                bearing,
                range.max(MIN_RANGE_M),
                o.label.clone(),
            ));
        }
    }

    for l in &env.landmarks {
        push_point(
            &mut entities,
            EntityKind::Landmark,
            &l.label,
            origin,
            heading,
            l.position,
            view,
        );
    }
    for (i, h) in humans.iter().enumerate() {
        let label = env
            .humans
            .get(i)
            .map(|s| s.label.clone())
            .filter(|l| !l.is_empty())
            .unwrap_or_else(|| String::from("person"));
        push_point(
            &mut entities,
            EntityKind::Human,
            &label,
            origin,
            heading,
            *h,
            view,
        );
    }

    entities.extend(open_sectors(&rays, view.fov_deg >= 360.0));

    Observation {
        entities,
        fov_deg: view.fov_deg,
        timestamp_ms,
    }
}

fn push_point(
    out: &mut Vec<SceneEntity>,
    kind: EntityKind,
    label: &str,
    origin: Vec2,
    heading: f64,
    target: Vec2,
    view: ViewParams,
) {
    let range = origin.distance(target);
    if !(range > 0.0) || range > view.max_range_m {
        return;
    }
    let bearing = relative_bearing(origin, heading, target);
    if view.in_view(bearing) {
        out.push(SceneEntity::new(kind, bearing, range, label));
    }
}

/// Runs of rays whose free distance is near the longest one, widest first.
fn open_sectors(rays: &[Ray], wraps: bool) -> Vec<SceneEntity> {
    let longest = rays.iter().map(|r| r.free).fold(0.0, f64::max);
    if !(longest > 0.0) {
        return Vec::new();
    }
    let threshold = OPEN_FRACTION * longest;
    let open: Vec<bool> = rays.iter().map(|r| r.free >= threshold).collect();
    let n = rays.len();

    // (start, len) runs over the ray list; for a full circle, start the scan
    // at a closed ray so no run is split by the seam.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let offset = if wraps {
        match open.iter().position(|o| !o) {
            Some(i) => i,
            None => {
                let r = &rays[n / 2];
                return alloc::vec![SceneEntity::new(
                    EntityKind::OpenSpace,
                    r.bearing,
                    r.free,
                    format!("OpenSpace@{}", r.bearing as i64)
                )];
            }
        }
    } else {
        0
    };
    let mut current: Option<(usize, usize)> = None;
    for k in 0..n {
        let i = (k + offset) % n;
        if open[i] {
            current = Some(match current {
                Some((s, len)) => (s, len + 1),
                None => (k, 1),
            });
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    runs.extend(current);

    let mean_free = |&(s, len): &(usize, usize)| {
        (s..s + len)
            .map(|k| rays[(k + offset) % n].free)
            .sum::<f64>()
            / len as f64
    };
    let centre = |&(s, len): &(usize, usize)| &rays[(s + len / 2 + offset) % n];
    runs.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(mean_free(b).total_cmp(&mean_free(a)))
            .then(centre(a).bearing.abs().total_cmp(&centre(b).bearing.abs()))
    });
    runs.iter()
        .take(OPEN_SECTORS)
        .map(|run| {
            let r = centre(run);
            SceneEntity::new(
                EntityKind::OpenSpace,
                r.bearing,
                r.free,
                format!("OpenSpace@{}", r.bearing as i64),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::env::Spawn;
    use crate::sim::geometry::Rect;
    use alloc::vec;

    fn empty_room() -> Environment {
        Environment {
            name: "empty".into(),
            bounds: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0)),
            ceiling_m: 3.0,
            spawn: Spawn {
                position: Vec2::new(5.0, 5.0),
                heading_deg: 0.0,
                z_m: 1.0,
            },
            glass_walls: vec![],
            obstacles: vec![],
            humans: vec![],
            landmarks: vec![],
        }
    }

    #[test]
    fn human_dead_ahead() {
        let env = empty_room();
        let s = BlimpState::at_rest(Vec2::new(5.0, 2.0), 1.0, 0.0);
        let obs = observe(&s, &env, &[Vec2::new(5.0, 4.0)], ViewParams::default(), 0);
        let h = obs.nearest(EntityKind::Human).unwrap();
        assert!(h.bearing_deg.abs() < 1e-9);
        assert!((h.range_m - 2.0).abs() < 1e-12);
        assert!(obs.validate().is_ok());
    }

    #[test]
    fn human_behind_is_invisible() {
        let env = empty_room();
        let s = BlimpState::at_rest(Vec2::new(5.0, 5.0), 1.0, 0.0);
        let obs = observe(&s, &env, &[Vec2::new(5.0, 3.0)], ViewParams::default(), 0);
        assert!(!obs.human_visible());
        let pano = observe(&s, &env, &[Vec2::new(5.0, 3.0)], ViewParams::panorama(), 0);
        assert!(pano.human_visible());
    }

    #[test]
    fn empty_room_shows_only_walls_and_open_space() {
        let env = empty_room();
        let s = BlimpState::at_rest(Vec2::new(5.0, 5.0), 1.0, 30.0);
        let obs = observe(&s, &env, &[], ViewParams::default(), 7);
        assert_eq!(obs.timestamp_ms, 7);
        assert!(obs
            .entities
            .iter()
            .all(|e| matches!(e.kind, EntityKind::Wall | EntityKind::OpenSpace)));
        let open = obs.of_kind(EntityKind::OpenSpace).count();
        assert!((1..=OPEN_SECTORS).contains(&open));
        assert!(obs.of_kind(EntityKind::Wall).count() >= 1);
        assert!(obs.validate().is_ok());
    }

    #[test]
    fn open_space_range_is_free_travel() {
        let env = empty_room();
        let s = BlimpState::at_rest(Vec2::new(5.0, 1.0), 1.0, 0.0);
        let obs = observe(&s, &env, &[], ViewParams::default(), 0);
        for e in obs.of_kind(EntityKind::OpenSpace) {
            let dir = Vec2::from_heading(e.bearing_deg);
            let free = env
                .bounds
                .exit_distance(s.position(), dir)
                .0
                .min(DEFAULT_MAX_RANGE_M);
            assert!((e.range_m - free).abs() < 1e-9, "{e:?}");
        }
        // widest sector is straight up the room
        let first = obs.of_kind(EntityKind::OpenSpace).next().unwrap();
        assert!(first.bearing_deg.abs() < 30.0);
    }

    #[test]
    fn near_wall_is_reported_in_cone() {
        let env = empty_room();
        let s = BlimpState::at_rest(Vec2::new(5.0, 9.5), 1.0, 10.0);
        let obs = observe(&s, &env, &[], ViewParams::default(), 0);
        let w = obs.nearest(EntityKind::Wall).unwrap();
        assert!((w.range_m - 0.5).abs() < 1e-9);
        assert!((w.bearing_deg + 10.0).abs() < 1e-9);
    }

    #[test]
    fn glass_and_obstacles() {
        let mut env = empty_room();
        env.glass_walls.push(Side::North);
        env.obstacles.push(crate::sim::env::Obstacle {
            label: "crate".into(),
            shape: crate::sim::geometry::Shape::Box {
                center: Vec2::new(5.0, 8.0),
                size: Vec2::new(2.0, 1.0),
            },
        });
        let s = BlimpState::at_rest(Vec2::new(5.0, 5.0), 1.0, 0.0);
        let obs = observe(&s, &env, &[], ViewParams::default(), 0);
        let o = obs.nearest(EntityKind::Obstacle).unwrap();
        assert_eq!(o.label, "crate");
        assert!((o.range_m - 2.5).abs() < 1e-9);
        assert!(obs.of_kind(EntityKind::Window).count() == 1);
    }

    #[test]
    fn panorama_stays_in_range() {
        let env = crate::sim::env::Environment::atrium();
        let s = BlimpState::at_rest(env.spawn.position, 1.5, 0.0);
        let pano = observe(&s, &env, &[], ViewParams::panorama(), 0);
        assert!(pano.validate().is_ok());
        assert!(pano.of_kind(EntityKind::OpenSpace).count() >= 1);
    }
}
