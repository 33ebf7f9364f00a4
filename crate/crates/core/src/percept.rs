//! What the pilot sees: structured scene entities in camera-relative polar
//! coordinates, and the four-part semantic map built once per session.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Horizontal field of view of the forward fish-eye camera.
pub const CAMERA_FOV_DEG: f64 = 160.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Wall,
    Window,
    Landmark,
    Human,
    Obstacle,
    OpenSpace,
}

impl EntityKind {
    pub const fn name(self) -> &'static str {
        match self {
            EntityKind::Wall => "Wall",
            EntityKind::Window => "Window",
            EntityKind::Landmark => "Landmark",
            EntityKind::Human => "Human",
            EntityKind::Obstacle => "Obstacle",
            EntityKind::OpenSpace => "OpenSpace",
        }
    }

    /// Walls, windows and obstacles: things the blimp can hit.
    pub const fn is_solid(self) -> bool {
        matches!(
            self,
            EntityKind::Wall | EntityKind::Window | EntityKind::Obstacle
        )
    }
}

/// One thing in view. Bearing is degrees from camera forward, positive to
/// the right (clockwise seen from above).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneEntity {
    pub kind: EntityKind,
    pub bearing_deg: f64,
    pub range_m: f64,
    #[serde(default)]
    pub label: String,
}

impl SceneEntity {
    pub fn new(kind: EntityKind, bearing_deg: f64, range_m: f64, label: impl Into<String>) -> Self {
        Self {
            kind,
            bearing_deg,
            range_m,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObservationError {
    #[error("entity {index} bearing {bearing_deg} outside +/-{half_fov} degrees")]
    BearingOutsideFov {
        index: usize,
        bearing_deg: f64,
        half_fov: f64,
    },
    #[error("entity {index} has non-positive range {range_m}")]
    NonPositiveRange { index: usize, range_m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub entities: Vec<SceneEntity>,
    pub fov_deg: f64,
    pub timestamp_ms: u64,
}

impl Observation {
    pub fn new(entities: Vec<SceneEntity>, timestamp_ms: u64) -> Self {
        Self {
            entities,
            fov_deg: CAMERA_FOV_DEG,
            timestamp_ms,
        }
    }

    /// An all-around view, used as the session panorama.
    pub fn panorama(entities: Vec<SceneEntity>, timestamp_ms: u64) -> Self {
        Self {
            entities,
            fov_deg: 360.0,
            timestamp_ms,
        }
    }

    pub fn validate(&self) -> Result<(), ObservationError> {
        let half = self.fov_deg / 2.0;
        for (index, e) in self.entities.iter().enumerate() {
            if !(e.bearing_deg.abs() <= half) {
                return Err(ObservationError::BearingOutsideFov {
                    index,
                    bearing_deg: e.bearing_deg,
                    half_fov: half,
                });
            }
            if !(e.range_m > 0.0) {
                return Err(ObservationError::NonPositiveRange {
                    index,
                    range_m: e.range_m,
                });
            }
        }
        Ok(())
    }

    pub fn of_kind(&self, kind: EntityKind) -> impl Iterator<Item = &SceneEntity> {
        self.entities.iter().filter(move |e| e.kind == kind)
    }

    pub fn nearest(&self, kind: EntityKind) -> Option<&SceneEntity> {
        self.of_kind(kind)
            .min_by(|a, b| a.range_m.total_cmp(&b.range_m))
    }

    pub fn human_visible(&self) -> bool {
        self.of_kind(EntityKind::Human).next().is_some()
    }
}

/// The four-category semantic summary of the whole operating area.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentalMap {
    pub boundaries: Vec<String>,
    pub landmarks: Vec<String>,
    pub fly_zones: Vec<String>,
    pub obstacles: Vec<String>,
}

impl MentalMap {
    /// Sorts panorama entities into the four categories. Humans are
    /// transient and do not enter the map. Duplicates are dropped,
    /// first occurrence wins.
    pub fn from_panorama(panorama: &Observation) -> Self {
        let mut map = MentalMap::default();
        for e in &panorama.entities {
            let (list, entry) = match e.kind {
                EntityKind::Wall | EntityKind::Window => (&mut map.boundaries, label_or_kind(e)),
                EntityKind::Landmark => (&mut map.landmarks, label_or_kind(e)),
                EntityKind::Obstacle => (&mut map.obstacles, label_or_kind(e)),
                EntityKind::OpenSpace => (
                    &mut map.fly_zones,
                    format!("OpenSpace@{}", libm::round(e.bearing_deg) as i64),
                ),
                EntityKind::Human => continue,
            };
            if !list.contains(&entry) {
                list.push(entry);
            }
        }
        map
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
            && self.landmarks.is_empty()
            && self.fly_zones.is_empty()
            && self.obstacles.is_empty()
    }

    /// Every list entry must be non-empty text.
    pub fn is_well_formed(&self) -> bool {
        [
            &self.boundaries,
            &self.landmarks,
            &self.fly_zones,
            &self.obstacles,
        ]
        .iter()
        .all(|l| l.iter().all(|s| !s.trim().is_empty()))
    }
}

fn label_or_kind(e: &SceneEntity) -> String {
    let label = e.label.trim();
    if label.is_empty() {
        String::from(e.kind.name())
    } else {
        String::from(label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn map_from_panorama_sorts_by_kind() {
        let pano = Observation::panorama(
            vec![
                SceneEntity::new(EntityKind::Wall, 90.0, 3.0, ""),
                SceneEntity::new(EntityKind::Landmark, 0.0, 5.0, "spiral staircase"),
                SceneEntity::new(EntityKind::OpenSpace, 180.0, 7.0, ""),
            ],
            0,
        );
        let map = MentalMap::from_panorama(&pano);
        assert_eq!(map.boundaries, ["Wall"]);
        assert_eq!(map.landmarks, ["spiral staircase"]);
        assert_eq!(map.fly_zones, ["OpenSpace@180"]);
        assert!(map.obstacles.is_empty());
        assert!(map.is_well_formed());
    }

    #[test]
    fn empty_panorama_gives_empty_map() {
        let map = MentalMap::from_panorama(&Observation::panorama(Vec::new(), 0));
        assert!(map.is_empty());
    }

    #[test]
    fn map_dedups_and_skips_humans() {
        let pano = Observation::panorama(
            vec![
                SceneEntity::new(EntityKind::Window, 10.0, 3.0, "glass facade"),
                SceneEntity::new(EntityKind::Window, 20.0, 3.5, "glass facade"),
                SceneEntity::new(EntityKind::Human, 0.0, 2.0, "visitor"),
                SceneEntity::new(EntityKind::Obstacle, -30.0, 2.0, "bench"),
            ],
            0,
        );
        let map = MentalMap::from_panorama(&pano);
        assert_eq!(map.boundaries, ["glass facade"]);
        assert_eq!(map.obstacles, ["bench"]);
        assert!(map.landmarks.is_empty());
    }

    #[test]
    fn validation_catches_fov_and_range() {
        let ok = Observation::new(vec![SceneEntity::new(EntityKind::Human, 80.0, 1.0, "")], 0);
        assert!(ok.validate().is_ok());
        let wide = Observation::new(vec![SceneEntity::new(EntityKind::Human, 81.0, 1.0, "")], 0);
        assert!(matches!(
            wide.validate(),
            Err(ObservationError::BearingOutsideFov { index: 0, .. })
        ));
        let zero = Observation::new(vec![SceneEntity::new(EntityKind::Wall, 0.0, 0.0, "")], 0);
        assert!(matches!(
            zero.validate(),
            Err(ObservationError::NonPositiveRange { .. })
        ));
    }

    #[test]
    fn nearest_human() {
        let obs = Observation::new(
            vec![
                SceneEntity::new(EntityKind::Human, 30.0, 4.0, "a"),
                SceneEntity::new(EntityKind::Human, -10.0, 2.0, "b"),
            ],
            0,
        );
        assert_eq!(obs.nearest(EntityKind::Human).unwrap().label, "b");
        assert!(obs.human_visible());
    }
}
