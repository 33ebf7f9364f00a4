use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::table::ContingencyTable;
use crate::action::Action;
use crate::percept::{EntityKind, Observation};
use crate::record::FlightRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Approach,
    Avoid,
    NotApplicable,
}

/// Geometry of the approach test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceRule {
    /// Forward counts as approaching when the nearest human is within this
    /// bearing.
    pub cone_deg: f64,
}

impl Default for StanceRule {
    fn default() -> Self {
        Self { cone_deg: 45.0 }
    }
}

impl StanceRule {
    /// Approach when moving forward at a human inside the cone, or turning
    /// so that the human's bearing shrinks; everything else avoids.
    pub fn classify(&self, action: Action, observation: &Observation) -> Stance {
        let Some(human) = observation.nearest(EntityKind::Human) else {
            return Stance::NotApplicable;
        };
        let b = human.bearing_deg;
        let approach = match action {
            Action::Forward => b.abs() <= self.cone_deg,
            Action::TurnRight => b > 0.0,
            Action::TurnLeft => b < 0.0,
            _ => false,
        };
        if approach {
            Stance::Approach
        } else {
            Stance::Avoid
        }
    }
}

pub fn classify_stance(record: &FlightRecord, observation: &Observation) -> Stance {
    StanceRule::default().classify(record.action, observation)
}

const PEOPLE_WORDS: [&str; 2] = ["human", "person"];
const AVOID_WORDS: [&str; 3] = ["avoid", "ascend", "away"];
const APPROACH_WORDS: [&str; 3] = ["towards", "greet", "approach"];

/// Whether a reason names a human or person.
pub fn mentions_people(reason: &str) -> bool {
    let reason = reason.to_lowercase();
    PEOPLE_WORDS.iter().any(|w| reason.contains(w))
}

/// Heuristic stance from the reason text alone, for logs without
/// observations. A reason naming a human or person is applicable; avoidance
/// words win over approach words, and neither counts as avoidance.
pub fn classify_stance_keywords(record: &FlightRecord) -> Stance {
    let reason = record.reason.to_lowercase();
    let has = |words: &[&str]| words.iter().any(|w| reason.contains(w));
    if !mentions_people(&reason) {
        Stance::NotApplicable
    } else if has(&AVOID_WORDS) {
        Stance::Avoid
    } else if has(&APPROACH_WORDS) {
        Stance::Approach
    } else {
        Stance::Avoid
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaStance {
    pub persona_id: String,
    pub approach_count: u64,
    pub avoid_count: u64,
    pub not_applicable: u64,
}

impl PersonaStance {
    fn new(persona_id: &str) -> Self {
        Self {
            persona_id: persona_id.into(),
            approach_count: 0,
            avoid_count: 0,
            not_applicable: 0,
        }
    }

    pub fn applicable(&self) -> u64 {
        self.approach_count + self.avoid_count
    }

    /// Share of applicable decisions that approached; `None` when there were none.
    pub fn approach_rate(&self) -> Option<f64> {
        let n = self.applicable();
        (n > 0).then(|| self.approach_count as f64 / n as f64)
    }

    pub fn avoid_rate(&self) -> Option<f64> {
        self.approach_rate().map(|r| 1.0 - r)
    }

    fn add(&mut self, stance: Stance) {
        match stance {
            Stance::Approach => self.approach_count += 1,
            Stance::Avoid => self.avoid_count += 1,
            Stance::NotApplicable => self.not_applicable += 1,
        }
    }
}

/// Per-persona stance counts, in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceSummary {
    pub personas: Vec<PersonaStance>,
}

impl StanceSummary {
    pub fn add(&mut self, persona_id: &str, stance: Stance) {
        let entry = match self
            .personas
            .iter()
            .position(|p| p.persona_id == persona_id)
        {
            Some(i) => &mut self.personas[i],
            None => {
                self.personas.push(PersonaStance::new(persona_id));
                self.personas.last_mut().expect("just pushed")
            }
        };
        entry.add(stance);
    }

    pub fn get(&self, persona_id: &str) -> Option<&PersonaStance> {
        self.personas.iter().find(|p| p.persona_id == persona_id)
    }

    /// Persona x {approach, avoid} counts for the independence test.
    pub fn table(&self) -> ContingencyTable {
        ContingencyTable::new(
            self.personas.iter().map(|p| p.persona_id.clone()).collect(),
            alloc::vec!["approach".into(), "avoid".into()],
            self.personas
                .iter()
                .map(|p| alloc::vec![p.approach_count, p.avoid_count])
                .collect(),
        )
        .expect("two columns per row")
    }
}

/// Classifies every (record, observation) pair with `rule`.
pub fn stance_summary<'a>(
    pairs: impl IntoIterator<Item = (&'a FlightRecord, &'a Observation)>,
    rule: &StanceRule,
) -> StanceSummary {
    let mut summary = StanceSummary::default();
    for (rec, obs) in pairs {
        summary.add(&rec.persona_id, rule.classify(rec.action, obs));
    }
    summary
}

/// [`stance_summary`] using [`classify_stance_keywords`] on bare records.
pub fn stance_summary_keywords<'a>(
    records: impl IntoIterator<Item = &'a FlightRecord>,
) -> StanceSummary {
    let mut summary = StanceSummary::default();
    for rec in records {
        summary.add(&rec.persona_id, classify_stance_keywords(rec));
    }
    summary
}
