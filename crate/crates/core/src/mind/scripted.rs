use alloc::format;
use alloc::string::String;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::phrases::{table, PhraseKey};
use super::{
    format_reply, Decided, Mind, MindError, Percept, SessionHandle, SessionMap, READY_PHRASE,
};
use crate::action::Action;
use crate::percept::{EntityKind, MentalMap, Observation, SceneEntity};
use crate::persona::{PersonaSpec, ScriptedPolicyParams, Voice};
use crate::record::Decision;

/// Solid entities closer than this, inside the proximity cone, force an
/// avoidance turn.
pub const PROXIMITY_RANGE_M: f64 = 1.0;
pub const PROXIMITY_CONE_DEG: f64 = 30.0;
/// A solid this close in front means the blimp is already touching it; any
/// turn would arc further in, so it backs off.
pub const CONTACT_RANGE_M: f64 = 0.3;
pub const CONTACT_CONE_DEG: f64 = 60.0;
/// With no human in view, a solid this close ahead means backing off. The
/// frame is a think-time old, so the last command has been closing in since.
pub const LOOM_RANGE_M: f64 = 2.5;
pub const LOOM_CONE_DEG: f64 = 45.0;
/// A visible human within this bearing is approached head-on.
pub const HEAD_ON_DEG: f64 = 20.0;
/// Forward counts as approaching a human within this bearing.
pub const STANCE_CONE_DEG: f64 = 45.0;
/// An open sector within this bearing counts as straight ahead.
pub const AHEAD_DEG: f64 = 15.0;
/// Half-width of the corridor checked for solids before floating forward.
pub const AHEAD_CONE_DEG: f64 = 25.0;
/// Minimum free travel ahead before committing to a forward float. One held
/// decision at terminal speed covers about 1.4 m.
pub const FORWARD_CLEARANCE_M: f64 = 3.5;
/// Solids nearer than this block any open sector whose bearing they sit
/// in front of (between the nose and the sector, with a margin).
pub const ARC_CLEARANCE_M: f64 = 3.5;
pub const ARC_MARGIN_DEG: f64 = 20.0;
/// Heading change over one held turn at the default rate and think time.
pub const TURN_SWEEP_DEG: f64 = 56.0;

/// Which branch of the policy produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Contact,
    Retreat,
    Proximity,
    ApproachHuman,
    AvoidHuman,
    Contemplate,
    Explore,
}

fn turn_toward(bearing_deg: f64) -> Action {
    if bearing_deg < 0.0 {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

fn turn_away(bearing_deg: f64) -> Action {
    if bearing_deg < 0.0 {
        Action::TurnRight
    } else {
        Action::TurnLeft
    }
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, voice: Voice, key: PhraseKey) -> &'a str {
    let phrases = table(voice, key);
    phrases[rng.random_range(0..phrases.len())]
}

/// Open space on each side of the forward axis, for breaking ties when a
/// hazard sits dead ahead.
fn open_bias(observation: &Observation) -> f64 {
    observation
        .of_kind(EntityKind::OpenSpace)
        .map(|e| {
            e.range_m * libm::copysign(1.0, e.bearing_deg) * (e.bearing_deg != 0.0) as u8 as f64
        })
        .sum()
}

/// The deterministic persona engine.
///
/// Rules, first match wins:
/// 0. touching a solid within +/-60 degrees: reverse;
/// 1. no human in view and a solid closer than 2.5 m within +/-45 degrees: reverse;
/// 2. a wall, window or obstacle closer than 1 m within +/-30 degrees: turn away from the nearest;
/// 3. a human in view: approach with `approach_human_prob` (forward when
///    within +/-20 degrees, otherwise turn toward), else rise with
///    `vertical_avoid_prob` or turn away;
/// 4. stop with `stop_prob`;
/// 5. explore: pick an open sector with weight `range^explore_bias` and head for it.
pub fn scripted_policy<R: Rng + ?Sized>(
    params: &ScriptedPolicyParams,
    voice: Voice,
    observation: &Observation,
    rng: &mut R,
) -> (Decision, Rule) {
    let touching = observation.entities.iter().any(|e| {
        e.kind.is_solid() && e.range_m < CONTACT_RANGE_M && e.bearing_deg.abs() <= CONTACT_CONE_DEG
    });
    if touching {
        let reason = pick(rng, voice, PhraseKey::Contact);
        return (Decision::new(Action::Reverse, reason), Rule::Contact);
    }

    let looming = !observation.human_visible()
        && observation.entities.iter().any(|e| {
            e.kind.is_solid() && e.range_m < LOOM_RANGE_M && e.bearing_deg.abs() <= LOOM_CONE_DEG
        });
    if looming {
        let reason = pick(rng, voice, PhraseKey::ExploreReverse);
        return (Decision::new(Action::Reverse, reason), Rule::Retreat);
    }

    let hazard = observation
        .entities
        .iter()
        .filter(|e| {
            e.kind.is_solid()
                && e.range_m < PROXIMITY_RANGE_M
                && e.bearing_deg.abs() <= PROXIMITY_CONE_DEG
        })
        .min_by(|a, b| a.range_m.total_cmp(&b.range_m));
    if let Some(h) = hazard {
        let action = if h.bearing_deg == 0.0 {
            // Dead ahead: turn to whichever side has more open space.
            if open_bias(observation) > 0.0 {
                Action::TurnRight
            } else {
                Action::TurnLeft
            }
        } else {
            turn_away(h.bearing_deg)
        };
        let reason = pick(rng, voice, PhraseKey::Proximity);
        return (Decision::new(action, reason), Rule::Proximity);
    }

    if let Some(human) = observation.nearest(EntityKind::Human) {
        let b = human.bearing_deg;
        if rng.random::<f64>() < params.approach_human_prob {
            // A blocked path swaps forward and turn; both still close on the human.
            let head_on = b.abs() < HEAD_ON_DEG;
            let forward = if head_on {
                ahead_free(observation) >= FORWARD_CLEARANCE_M
                    || b == 0.0
                    || arc_blocked(observation, b)
            } else {
                arc_blocked(observation, b)
                    && b.abs() <= STANCE_CONE_DEG
                    && ahead_free(observation) >= FORWARD_CLEARANCE_M
            };
            let (action, key) = if forward {
                (Action::Forward, PhraseKey::ApproachForward)
            } else {
                (turn_toward(b), PhraseKey::ApproachTurn)
            };
            return (
                Decision::new(action, pick(rng, voice, key)),
                Rule::ApproachHuman,
            );
        }
        let rise = rng.random::<f64>() < params.vertical_avoid_prob;
        let (action, key) = if rise || arc_blocked(observation, -b) {
            (Action::Up, PhraseKey::AvoidUp)
        } else {
            (turn_away(b), PhraseKey::AvoidTurn)
        };
        return (
            Decision::new(action, pick(rng, voice, key)),
            Rule::AvoidHuman,
        );
    }

    if rng.random::<f64>() < params.stop_prob {
        let reason = pick(rng, voice, PhraseKey::Contemplate);
        return (Decision::new(Action::Stop, reason), Rule::Contemplate);
    }

    let ahead_free = ahead_free(observation);
    let cramped = observation
        .entities
        .iter()
        .any(|e| e.kind.is_solid() && e.range_m < ARC_CLEARANCE_M);
    let (action, key) = match choose_open_space(observation, params.explore_bias, rng) {
        Some(space) if space.bearing_deg.abs() > AHEAD_DEG => {
            (turn_toward(space.bearing_deg), PhraseKey::ExploreTurn)
        }
        Some(space) if ahead_free.min(space.range_m) >= FORWARD_CLEARANCE_M => {
            (Action::Forward, PhraseKey::ExploreForward)
        }
        None if !cramped => (Action::Forward, PhraseKey::ExploreForward),
        _ => (Action::Reverse, PhraseKey::ExploreReverse),
    };
    (Decision::new(action, pick(rng, voice, key)), Rule::Explore)
}

/// Nearest solid within the forward corridor, or infinity.
fn ahead_free(observation: &Observation) -> f64 {
    observation
        .entities
        .iter()
        .filter(|e| e.kind.is_solid() && e.bearing_deg.abs() <= AHEAD_CONE_DEG)
        .map(|e| e.range_m)
        .fold(f64::INFINITY, f64::min)
}

/// Whether a turn toward `bearing_deg` would sweep the nose past a nearby solid.
fn arc_blocked(observation: &Observation, bearing_deg: f64) -> bool {
    let sweep = if bearing_deg < 0.0 {
        bearing_deg.min(-TURN_SWEEP_DEG)
    } else {
        bearing_deg.max(TURN_SWEEP_DEG)
    };
    let lo = sweep.min(0.0) - ARC_MARGIN_DEG;
    let hi = sweep.max(0.0) + ARC_MARGIN_DEG;
    observation.entities.iter().any(|s| {
        s.kind.is_solid() && s.range_m < ARC_CLEARANCE_M && (lo..=hi).contains(&s.bearing_deg)
    })
}

fn choose_open_space<'o, R: Rng + ?Sized>(
    observation: &'o Observation,
    bias: f64,
    rng: &mut R,
) -> Option<&'o SceneEntity> {
    let weight = |e: &SceneEntity| libm::pow(e.range_m.max(1e-6), bias);
    let reachable = |e: &&SceneEntity| !arc_blocked(observation, e.bearing_deg);
    let total: f64 = observation
        .of_kind(EntityKind::OpenSpace)
        .filter(reachable)
        .map(weight)
        .sum();
    if !(total > 0.0) {
        return None;
    }
    let mut target = rng.random::<f64>() * total;
    let mut last = None;
    for e in observation.of_kind(EntityKind::OpenSpace).filter(reachable) {
        last = Some(e);
        target -= weight(e);
        if target < 0.0 {
            return Some(e);
        }
    }
    last
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Backend driven by [`scripted_policy`]. Its only state is the RNG, so a
/// (params, seed, percept stream) triple fully determines its output.
#[derive(Debug, Clone)]
pub struct ScriptedMind {
    params: ScriptedPolicyParams,
    voice: Voice,
    rng: ChaCha8Rng,
    last_rule: Option<Rule>,
}

impl ScriptedMind {
    pub fn new(params: ScriptedPolicyParams, voice: Voice) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        Self {
            params,
            voice,
            rng,
            last_rule: None,
        }
    }

    /// Seeds from both the persona's own seed and a per-run seed.
    pub fn for_run(persona: &PersonaSpec, run_seed: u64) -> Self {
        let mut mind = Self::new(persona.policy.clone(), persona.voice);
        mind.rng =
            ChaCha8Rng::seed_from_u64(splitmix64(persona.policy.rng_seed ^ splitmix64(run_seed)));
        mind
    }

    pub fn params(&self) -> &ScriptedPolicyParams {
        &self.params
    }

    /// Rule that fired on the most recent successful decision.
    pub fn last_rule(&self) -> Option<Rule> {
        self.last_rule
    }
}

impl Mind for ScriptedMind {
    fn start_session(
        &mut self,
        persona: &PersonaSpec,
        panorama: Percept<'_>,
    ) -> Result<SessionHandle, MindError> {
        let Percept::Observation(pano) = panorama else {
            return Err(match panorama {
                Percept::Image([]) => MindError::EmptyPanorama,
                _ => MindError::UnsupportedPercept,
            });
        };
        let map = MentalMap::from_panorama(pano);
        Ok(SessionHandle::opened(
            persona.id.clone(),
            persona.preamble_prompt.clone(),
            format!("{READY_PHRASE}."),
            SessionMap::Known(map),
            0,
        ))
    }

    fn decide(&mut self, session: &mut SessionHandle, percept: Percept<'_>) -> Decided {
        let prompt = String::from("<directional prompt>");
        if !session.is_ready() {
            return session.fail(prompt, "", MindError::NotReady);
        }
        let Percept::Observation(obs) = percept else {
            return session.fail(prompt, "", MindError::UnsupportedPercept);
        };
        let (decision, rule) = scripted_policy(&self.params, self.voice, obs, &mut self.rng);
        self.last_rule = Some(rule);
        session.push_exchange(
            format!(
                "[observation t={}ms, {} entities]",
                obs.timestamp_ms,
                obs.entities.len()
            ),
            format_reply(decision.action, &decision.reason),
        );
        Decided::ok(decision)
    }

    fn simulated_latency(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mind::parse_decision;
    use alloc::vec;
    use alloc::vec::Vec;

    fn params(approach: f64, stop: f64, vertical: f64) -> ScriptedPolicyParams {
        ScriptedPolicyParams {
            approach_human_prob: approach,
            stop_prob: stop,
            vertical_avoid_prob: vertical,
            explore_bias: 2.0,
            rng_seed: 11,
        }
    }

    fn obs(entities: Vec<SceneEntity>) -> Observation {
        Observation::new(entities, 0)
    }

    fn run(p: &ScriptedPolicyParams, o: &Observation) -> (Decision, Rule) {
        let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
        scripted_policy(p, Voice::Cloud, o, &mut rng)
    }

    #[test]
    fn wall_dead_ahead_turns() {
        for seed in 0..20 {
            let mut p = params(1.0, 1.0, 1.0);
            p.rng_seed = seed;
            let (d, rule) = run(
                &p,
                &obs(vec![
                    SceneEntity::new(EntityKind::Wall, 0.0, 0.5, ""),
                    SceneEntity::new(EntityKind::Human, 5.0, 2.0, ""),
                ]),
            );
            assert_eq!(rule, Rule::Proximity);
            assert!(d.action.is_turn());
        }
    }

    #[test]
    fn proximity_turns_away_from_side() {
        let p = params(0.5, 0.0, 0.0);
        let far_human = || SceneEntity::new(EntityKind::Human, -70.0, 7.0, "");
        let right = obs(vec![
            SceneEntity::new(EntityKind::Obstacle, 20.0, 0.8, ""),
            far_human(),
        ]);
        assert_eq!(run(&p, &right).0.action, Action::TurnLeft);
        let left = obs(vec![
            SceneEntity::new(EntityKind::Window, -25.0, 0.9, ""),
            far_human(),
        ]);
        assert_eq!(run(&p, &left).0.action, Action::TurnRight);
        let dead_ahead_open_right = obs(vec![
            SceneEntity::new(EntityKind::Wall, 0.0, 0.4, ""),
            SceneEntity::new(EntityKind::OpenSpace, 60.0, 6.0, ""),
            far_human(),
        ]);
        assert_eq!(run(&p, &dead_ahead_open_right).0.action, Action::TurnRight);
    }

    #[test]
    fn hazards_outside_cone_or_range_ignored() {
        let p = params(0.0, 1.0, 0.0);
        let o = obs(vec![
            SceneEntity::new(EntityKind::Wall, 50.0, 0.5, ""),
            SceneEntity::new(EntityKind::Wall, 0.0, 2.5, ""),
        ]);
        let (d, rule) = run(&p, &o);
        assert_eq!((d.action, rule), (Action::Stop, Rule::Contemplate));
    }

    #[test]
    fn retreats_from_looming_solid_unless_a_human_is_in_view() {
        let p = params(1.0, 1.0, 0.0);
        let wall = || SceneEntity::new(EntityKind::Wall, -40.0, 2.0, "");
        let (d, rule) = run(&p, &obs(vec![wall()]));
        assert_eq!((d.action, rule), (Action::Reverse, Rule::Retreat));
        let with_human = obs(vec![
            wall(),
            SceneEntity::new(EntityKind::Human, 5.0, 4.0, ""),
        ]);
        assert_eq!(run(&p, &with_human).1, Rule::ApproachHuman);
    }

    #[test]
    fn human_approach_and_avoid() {
        let ahead = obs(vec![SceneEntity::new(EntityKind::Human, 10.0, 2.0, "")]);
        let (d, rule) = run(&params(1.0, 0.0, 0.0), &ahead);
        assert_eq!((d.action, rule), (Action::Forward, Rule::ApproachHuman));
        let (d, rule) = run(&params(0.0, 0.0, 1.0), &ahead);
        assert_eq!((d.action, rule), (Action::Up, Rule::AvoidHuman));
        let (d, _) = run(&params(0.0, 0.0, 0.0), &ahead);
        assert_eq!(d.action, Action::TurnLeft);

        let left = obs(vec![SceneEntity::new(EntityKind::Human, -50.0, 3.0, "")]);
        assert_eq!(
            run(&params(1.0, 0.0, 0.0), &left).0.action,
            Action::TurnLeft
        );
        assert_eq!(
            run(&params(0.0, 0.0, 0.0), &left).0.action,
            Action::TurnRight
        );
    }

    #[test]
    fn empty_view_stop_or_drift_on() {
        let (d, rule) = run(&params(0.5, 1.0, 0.5), &obs(Vec::new()));
        assert_eq!((d.action, rule), (Action::Stop, Rule::Contemplate));
        let (d, _) = run(&params(0.5, 0.0, 0.5), &obs(Vec::new()));
        assert_eq!(d.action, Action::Forward);
        let boxed_in = obs(vec![SceneEntity::new(EntityKind::Wall, 70.0, 1.5, "")]);
        assert_eq!(
            run(&params(0.5, 0.0, 0.5), &boxed_in).0.action,
            Action::Reverse
        );
    }

    #[test]
    fn touching_backs_off() {
        for b in [-60.0, -10.0, 0.0, 45.0] {
            let o = obs(vec![
                SceneEntity::new(EntityKind::Obstacle, b, 0.1, ""),
                SceneEntity::new(EntityKind::Human, 5.0, 2.0, ""),
            ]);
            let (d, rule) = run(&params(1.0, 0.0, 0.0), &o);
            assert_eq!((d.action, rule), (Action::Reverse, Rule::Contact));
        }
        let side = obs(vec![SceneEntity::new(EntityKind::Wall, 80.0, 0.0, "")]);
        assert_ne!(run(&params(1.0, 0.0, 0.0), &side).1, Rule::Contact);
    }

    #[test]
    fn blocked_paths_keep_stance() {
        // Head-on human behind a nearby pillar: turn toward instead of ramming.
        let o = obs(vec![
            SceneEntity::new(EntityKind::Human, 10.0, 4.0, ""),
            SceneEntity::new(EntityKind::Obstacle, -22.0, 2.0, ""),
        ]);
        assert_eq!(run(&params(1.0, 0.0, 0.0), &o).0.action, Action::TurnRight);
        // Off-axis human with the turn blocked: float forward while still in the cone.
        let o = obs(vec![
            SceneEntity::new(EntityKind::Human, 35.0, 4.0, ""),
            SceneEntity::new(EntityKind::Obstacle, 60.0, 1.5, ""),
        ]);
        assert_eq!(run(&params(1.0, 0.0, 0.0), &o).0.action, Action::Forward);
        // Avoidance turn into a wall becomes a climb.
        let o = obs(vec![
            SceneEntity::new(EntityKind::Human, 30.0, 4.0, ""),
            SceneEntity::new(EntityKind::Wall, -50.0, 2.0, ""),
        ]);
        let (d, rule) = run(&params(0.0, 0.0, 0.0), &o);
        assert_eq!((d.action, rule), (Action::Up, Rule::AvoidHuman));
    }

    #[test]
    fn explores_toward_open_space() {
        let p = params(0.5, 0.0, 0.5);
        let left = obs(vec![SceneEntity::new(
            EntityKind::OpenSpace,
            -40.0,
            6.0,
            "",
        )]);
        assert_eq!(run(&p, &left).0.action, Action::TurnLeft);
        let ahead = obs(vec![SceneEntity::new(EntityKind::OpenSpace, 5.0, 6.0, "")]);
        assert_eq!(run(&p, &ahead).0.action, Action::Forward);
        let cramped = obs(vec![SceneEntity::new(EntityKind::OpenSpace, 0.0, 1.5, "")]);
        assert_eq!(run(&p, &cramped).0.action, Action::Reverse);
    }

    #[test]
    fn large_bias_takes_widest() {
        let mut p = params(0.5, 0.0, 0.5);
        p.explore_bias = 60.0;
        let o = obs(vec![
            SceneEntity::new(EntityKind::OpenSpace, 50.0, 4.0, ""),
            SceneEntity::new(EntityKind::OpenSpace, -40.0, 8.0, ""),
        ]);
        for seed in 0..50 {
            p.rng_seed = seed;
            assert_eq!(run(&p, &o).0.action, Action::TurnLeft);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let p = params(0.5, 0.3, 0.5);
        let stream = [
            obs(vec![SceneEntity::new(EntityKind::Human, 30.0, 2.0, "")]),
            obs(vec![
                SceneEntity::new(EntityKind::OpenSpace, -40.0, 6.0, ""),
                SceneEntity::new(EntityKind::OpenSpace, 40.0, 5.0, ""),
            ]),
            obs(Vec::new()),
        ];
        let collect = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            stream
                .iter()
                .cycle()
                .take(60)
                .map(|o| scripted_policy(&p, Voice::Observer, o, &mut rng).0)
                .collect::<Vec<_>>()
        };
        assert_eq!(collect(), collect());
    }

    #[test]
    fn session_and_transcript() {
        let persona = PersonaSpec {
            id: "cloud".into(),
            voice: Voice::Cloud,
            preamble_prompt: "pre".into(),
            directional_prompt: "dir".into(),
            policy: params(0.5, 0.2, 0.5),
        };
        let mut mind = ScriptedMind::for_run(&persona, 3);
        let pano = Observation::panorama(Vec::new(), 0);
        let mut session = mind
            .start_session(&persona, Percept::Observation(&pano))
            .unwrap();
        assert!(session.is_ready());
        assert_eq!(session.transcript().len(), 2);
        assert!(session.transcript()[1].content.contains(READY_PHRASE));
        assert_eq!(
            session.mental_map(),
            &SessionMap::Known(MentalMap::default())
        );
        let o = obs(vec![SceneEntity::new(EntityKind::OpenSpace, 0.0, 5.0, "")]);
        for n in 1..=5 {
            let d = mind.decide(&mut session, Percept::Observation(&o));
            assert!(d.error.is_none());
            assert_eq!(session.transcript().len(), 2 + 2 * n);
            let reply = &session.transcript().last().unwrap().content;
            assert_eq!(parse_decision(reply).unwrap().action, d.decision.action);
        }
        let d = mind.decide(&mut session, Percept::Image(b"\xff\xd8"));
        assert_eq!(d.decision.action, Action::Stop);
        assert_eq!(session.error_count(), 1);
    }

    #[test]
    fn empty_image_panorama_rejected() {
        let persona = PersonaSpec {
            id: "cloud".into(),
            voice: Voice::Cloud,
            preamble_prompt: "pre".into(),
            directional_prompt: "dir".into(),
            policy: params(0.5, 0.2, 0.5),
        };
        let mut mind = ScriptedMind::new(persona.policy.clone(), Voice::Cloud);
        assert_eq!(
            mind.start_session(&persona, Percept::Image(&[]))
                .unwrap_err(),
            MindError::EmptyPanorama
        );
    }
}
