//! The decision loop against a real (or emulated) robot.

use std::time::{Duration, Instant};

use sg_core::analytics::mentions_people;
use sg_core::mind::{Mind, MindError, Percept};
use sg_core::{Action, FlightRecord, Observation, PersonaSpec};

use crate::link::{JpegFrame, LinkError, LinkHandle};

#[derive(Debug, Clone, Copy)]
pub struct LiveOptions {
    pub duration_s: f64,
    pub max_decisions: Option<usize>,
    pub frame_timeout_ms: u64,
    /// Hand the mind the `#OBS` record instead of the JPEG when one came
    /// with the frame.
    pub prefer_observation: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LiveLog {
    pub records: Vec<FlightRecord>,
    /// Observation paired with each record, when the robot sent one.
    pub observations: Vec<Option<Observation>>,
    pub frame_seqs: Vec<u64>,
    pub mind_errors: u32,
    /// Why the loop ended early, if it did. The log is valid either way.
    pub ended_by: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LiveError {
    #[error("waiting for the first frame: {0}")]
    NoFirstFrame(LinkError),
    #[error("starting the session: {0}")]
    Session(MindError),
}

fn percept<'a>(frame: &'a JpegFrame, prefer_obs: bool) -> Percept<'a> {
    match (&frame.observation, prefer_obs) {
        (Some(obs), true) => Percept::Observation(obs),
        _ => Percept::Image(&frame.bytes),
    }
}

/// Runs the two-stage loop over `link`. The first frame stands in for the
/// panorama. Each later frame gets one decision, which is sent at once;
/// the robot holds it until the next one. A final Stop is sent on exit.
pub fn run_live<M: Mind>(
    persona: &PersonaSpec,
    mind: &mut M,
    link: &LinkHandle,
    opts: LiveOptions,
    mut on_record: impl FnMut(&FlightRecord),
) -> Result<LiveLog, LiveError> {
    let started = Instant::now();
    let end = started + Duration::from_secs_f64(opts.duration_s.max(0.0));
    let first = link
        .next_frame(opts.frame_timeout_ms)
        .map_err(LiveError::NoFirstFrame)?;
    let mut session = mind
        .start_session(persona, percept(&first, opts.prefer_observation))
        .map_err(LiveError::Session)?;
    let mut log = LiveLog::default();

    while Instant::now() < end && opts.max_decisions.is_none_or(|m| log.records.len() < m) {
        let frame = match link.next_frame(opts.frame_timeout_ms) {
            Ok(f) => f,
            Err(LinkError::CorruptFrame { len }) => {
                log::warn!("dropping corrupt frame of {len} bytes");
                continue;
            }
            Err(e) => {
                log.ended_by = Some(e.to_string());
                break;
            }
        };
        let t0 = Instant::now();
        let decided = mind.decide(&mut session, percept(&frame, opts.prefer_observation));
        let latency_ms = t0.elapsed().as_millis() as u64;
        if decided.error.is_some() {
            log.mind_errors += 1;
        }
        let action = decided.decision.action;
        if let Err(e) = link.send_command(action) {
            log.ended_by = Some(e.to_string());
            break;
        }
        let human_visible = match &frame.observation {
            Some(obs) => obs.human_visible(),
            None => mentions_people(&decided.decision.reason),
        };
        let record = FlightRecord {
            t_ms: started.elapsed().as_millis() as u64,
            persona_id: session.persona_id().to_string(),
            action,
            reason: decided.decision.reason,
            latency_ms,
            pose: None,
            human_visible,
            collision: false,
        };
        on_record(&record);
        log.records.push(record);
        log.observations.push(frame.observation);
        if let Some(seq) = frame.seq {
            log.frame_seqs.push(seq);
        }
    }
    if log.ended_by.is_none() {
        if let Err(e) = link.send_command(Action::Stop) {
            log::warn!("final stop not delivered: {e}");
        }
    }
    Ok(log)
}
