use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dynamics::{LatencyModel, SimConfig};
use super::env::Environment;
use super::world::{SimError, World};
use crate::mind::{Mind, MindError, Percept, ScriptedMind};
use crate::percept::Observation;
use crate::persona::PersonaSpec;
use crate::record::FlightRecord;

/// Draws think times from a normal distribution clamped below at `min_s`.
#[derive(Debug, Clone)]
pub struct LatencySampler {
    normal: Normal<f64>,
    min_s: f64,
    rng: ChaCha8Rng,
}

impl LatencySampler {
    pub fn new(model: LatencyModel, seed: u64) -> Self {
        Self {
            normal: Normal::new(model.mean_s, model.sd_s).expect("validated latency model"),
            min_s: model.min_s,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample_s(&mut self) -> f64 {
        self.normal.sample(&mut self.rng).max(self.min_s)
    }

    pub fn sample_ms(&mut self) -> u64 {
        libm::round(self.sample_s() * 1000.0).max(1.0) as u64
    }
}

/// Output of one simulated flight. `observations[i]` is what the pilot
/// saw when it produced `records[i]`.
#[derive(Debug, Clone, Default)]
pub struct FlightLog {
    pub records: Vec<FlightRecord>,
    pub observations: Vec<Observation>,
    pub preamble_latency_ms: u64,
    /// Replies that fell back to Stop.
    pub mind_errors: u32,
    /// Set when the session could not start; the log is then empty.
    pub aborted: Option<MindError>,
    pub collisions: u64,
}

/// Flies `persona` through `env` for `duration_s` simulated seconds.
///
/// Each cycle observes, asks the mind, and keeps the previous action
/// latched in the physics for the whole think time; the new action takes
/// over when the answer arrives, at which point the record is written.
/// A decision that would arrive after the end is dropped. The record's
/// `collision` flag covers the think interval that ends at it.
pub fn run_flight<M: Mind>(
    persona: &PersonaSpec,
    mind: &mut M,
    env: &Environment,
    cfg: &SimConfig,
    duration_s: f64,
    mut on_record: impl FnMut(&World, &FlightRecord),
) -> Result<FlightLog, SimError> {
    if !(duration_s > 0.0) {
        return Err(SimError::BadDuration(duration_s));
    }
    let mut world = World::new(env.clone(), *cfg)?;
    let mut sampler = LatencySampler::new(cfg.latency, cfg.rng_seed);
    let end_ms = libm::round(duration_s * 1000.0) as u64;
    let mut log = FlightLog::default();

    let pano = world.panorama();
    let mut session = match mind.start_session(persona, Percept::Observation(&pano)) {
        Ok(s) => s,
        Err(e) => {
            log.aborted = Some(e);
            return Ok(log);
        }
    };
    log.preamble_latency_ms = session.preamble_latency_ms();

    loop {
        let obs = world.observe();
        let decided = mind.decide(&mut session, Percept::Observation(&obs));
        let latency_ms = if mind.simulated_latency() {
            sampler.sample_ms()
        } else {
            decided.decision.latency_ms.max(1)
        };
        if world.time_ms() + latency_ms > end_ms {
            break;
        }
        let collision = world.advance(latency_ms);
        world.set_action(decided.decision.action);
        if decided.error.is_some() {
            log.mind_errors += 1;
        }
        let record = FlightRecord {
            t_ms: world.time_ms(),
            persona_id: String::from(session.persona_id()),
            action: decided.decision.action,
            reason: decided.decision.reason,
            latency_ms,
            pose: Some(world.state().pose()),
            human_visible: obs.human_visible(),
            collision,
        };
        on_record(&world, &record);
        log.records.push(record);
        log.observations.push(obs);
    }
    log.collisions = world.collisions();
    Ok(log)
}

/// [`run_flight`] with the scripted backend seeded from `cfg.rng_seed`.
pub fn run_scripted_flight(
    persona: &PersonaSpec,
    env: &Environment,
    cfg: &SimConfig,
    duration_s: f64,
) -> Result<FlightLog, SimError> {
    let mut mind = ScriptedMind::for_run(persona, cfg.rng_seed);
    run_flight(persona, &mut mind, env, cfg, duration_s, |_, _| {})
}
