use proptest::prelude::*;
use sg_core::sim::{step, BlimpState, Environment, Obstacle, Rect, Shape, SimConfig, Spawn, Vec2};
use sg_core::Action;

fn action() -> impl Strategy<Value = Action> {
    prop::sample::select(Action::ALL.to_vec())
}

fn open_field() -> Environment {
    Environment {
        name: "field".into(),
        bounds: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(1000.0, 1000.0)),
        ceiling_m: 10.0,
        spawn: Spawn {
            position: Vec2::new(500.0, 500.0),
            heading_deg: 0.0,
            z_m: 2.0,
        },
        glass_walls: vec![],
        obstacles: vec![],
        humans: vec![],
        landmarks: vec![],
    }
}

fn cluttered() -> Environment {
    let mut env = Environment::atrium();
    env.obstacles.push(Obstacle {
        label: "crate".into(),
        shape: Shape::Box {
            center: Vec2::new(13.0, 6.0),
            size: Vec2::new(0.6, 0.6),
        },
    });
    env
}

/// Continuous-time model integrated with plain Euler at 1 ms: dv/dt = a - k v,
/// dh/dt = omega, dp/dt = v * dir(h). Written independently of `step`.
fn fine_oracle(start: Vec2, heading: f64, plan: &[(Action, f64)], cfg: &SimConfig) -> (Vec2, f64) {
    let dt = 0.001;
    let (mut x, mut y, mut h, mut v) = (start.x, start.y, heading, 0.0);
    for &(a, dur) in plan {
        let thrust = match a {
            Action::Forward | Action::TurnLeft | Action::TurnRight => cfg.thrust_accel_mps2,
            Action::Reverse => -cfg.thrust_accel_mps2,
            _ => 0.0,
        };
        let omega = match a {
            Action::TurnLeft => -cfg.turn_rate_dps,
            Action::TurnRight => cfg.turn_rate_dps,
            _ => 0.0,
        };
        let n = (dur / dt).round() as usize;
        for _ in 0..n {
            v += (thrust - cfg.drag_per_s * v) * dt;
            h += omega * dt;
            let r = h.to_radians();
            x += v * r.sin() * dt;
            y += v * r.cos() * dt;
        }
    }
    (Vec2::new(x, y), v)
}

fn run_steps(
    env: &Environment,
    start: BlimpState,
    plan: &[(Action, f64)],
    cfg: &SimConfig,
) -> BlimpState {
    let mut s = start;
    for &(a, dur) in plan {
        let n = (dur / cfg.dt_s).round() as usize;
        for _ in 0..n {
            s = step(&s, env, a, cfg, cfg.dt_s).0;
        }
    }
    s
}

#[test]
fn forward_from_rest_matches_closed_form() {
    // x(t) = (a/k) (t - (1 - e^{-kt}) / k) with a = 0.15, k = 0.3
    let cfg = SimConfig::default();
    let env = open_field();
    let start = BlimpState::at_rest(env.spawn.position, 2.0, 90.0);
    for (t, want) in [(1.0, 0.068_030_368), (10.0, 3.416_311_781)] {
        let s = run_steps(&env, start, &[(Action::Forward, t)], &cfg);
        let got = s.x_m - 500.0;
        assert!(((got - want) / want).abs() < 0.02, "t={t}: {got} vs {want}");
        let (oracle, _) = fine_oracle(env.spawn.position, 90.0, &[(Action::Forward, t)], &cfg);
        assert!(
            ((oracle.x - 500.0 - want) / want).abs() < 2e-3,
            "oracle drifted at t={t}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn refinement_within_two_percent(
        plan in prop::collection::vec((action(), 1u32..=40), 1..12),
        heading in 0.0f64..360.0,
    ) {
        let cfg = SimConfig::default();
        // Hold times in whole steps, trimmed to a 10 s horizon.
        let mut left = 100u32;
        let mut timed = Vec::new();
        for (a, n) in plan {
            let n = n.min(left);
            if n == 0 { break; }
            timed.push((a, f64::from(n) * 0.1));
            left -= n;
        }
        if left > 0 {
            timed.push((Action::Stop, f64::from(left) * 0.1));
        }
        let env = open_field();
        let start = BlimpState::at_rest(env.spawn.position, 2.0, heading);
        let s = run_steps(&env, start, &timed, &cfg);
        let (oracle, _) = fine_oracle(env.spawn.position, heading, &timed, &cfg);
        let disp = oracle.distance(env.spawn.position);
        let err = s.position().distance(oracle);
        // Relative to the oracle displacement, with a 5 cm floor for near-zero nets.
        prop_assert!(err <= 0.02 * disp.max(0.05), "err {err} over displacement {disp}");
    }

    #[test]
    fn invariants_hold_along_random_sequences(
        actions in prop::collection::vec((action(), 1usize..30), 1..20),
        heading in 0.0f64..360.0,
    ) {
        let cfg = SimConfig::default();
        let env = cluttered();
        let vmax = cfg.terminal_speed_mps();
        let (z_lo, z_hi) = env.altitude_band();
        let mut s = BlimpState::at_rest(env.spawn.position, env.spawn.z_m, heading);
        for (a, n) in actions {
            for _ in 0..n {
                let (next, collided) = step(&s, &env, a, &cfg, cfg.dt_s);
                prop_assert!(next.v_forward_mps.abs() <= vmax + 1e-12, "speed {}", next.v_forward_mps);
                prop_assert!(env.bounds.contains(next.position()));
                prop_assert!(env.obstacles.iter().all(|o| !o.shape.contains_strict(next.position())));
                prop_assert!((z_lo..=z_hi).contains(&next.z_m));
                match a {
                    Action::Stop | Action::Up | Action::Down => {
                        prop_assert!(next.v_forward_mps.abs() <= s.v_forward_mps.abs() + 1e-15);
                        if !collided {
                            let want = s.v_forward_mps * (-cfg.drag_per_s * cfg.dt_s).exp();
                            prop_assert!((next.v_forward_mps - want).abs() < 1e-15);
                        }
                    }
                    Action::TurnLeft | Action::TurnRight if !collided => {
                        // Turns thrust forward: speed ends above the unpowered decay.
                        prop_assert!(next.v_forward_mps > s.v_forward_mps * (-cfg.drag_per_s * cfg.dt_s).exp());
                        let sign = if a == Action::TurnRight { 1.0 } else { -1.0 };
                        let turned = sg_core::sim::wrap_180(next.heading_deg - s.heading_deg);
                        prop_assert!((turned - sign * cfg.turn_rate_dps * cfg.dt_s).abs() < 1e-9);
                    }
                    _ => {}
                }
                s = next;
            }
        }
    }

    #[test]
    fn turns_from_rest_arc_forward(heading in 0.0f64..360.0, steps in 1usize..40, right in any::<bool>()) {
        let cfg = SimConfig::default();
        let env = open_field();
        let a = if right { Action::TurnRight } else { Action::TurnLeft };
        let start = BlimpState::at_rest(env.spawn.position, 2.0, heading);
        let s = run_steps(&env, start, &[(a, steps as f64 * 0.1)], &cfg);
        let moved = s.position() - start.position();
        let fwd = Vec2::from_heading(heading);
        let side = Vec2::from_heading(heading + 90.0);
        prop_assert!(moved.dot(fwd) > 0.0, "no forward progress");
        let lateral = moved.dot(side);
        if right { prop_assert!(lateral >= 0.0) } else { prop_assert!(lateral <= 0.0) }
    }

    #[test]
    fn rest_without_thrust_stays_put(heading in 0.0f64..360.0, n in 1usize..50) {
        let cfg = SimConfig::default();
        let env = cluttered();
        let start = BlimpState::at_rest(env.spawn.position, 1.5, heading);
        for a in [Action::Stop, Action::Up, Action::Down] {
            let s = run_steps(&env, start, &[(a, n as f64 * 0.1)], &cfg);
            prop_assert_eq!(s.v_forward_mps, 0.0);
            prop_assert_eq!(s.position(), start.position());
        }
    }

    #[test]
    fn stop_settles_within_drag_bound(heading in 0.0f64..360.0, pulse in 1usize..200) {
        let cfg = SimConfig::default();
        let env = open_field();
        let mut s = BlimpState::at_rest(env.spawn.position, 2.0, heading);
        for _ in 0..pulse {
            s = step(&s, &env, Action::Forward, &cfg, cfg.dt_s).0;
        }
        let v0 = s.v_forward_mps;
        prop_assume!(v0 > 0.01);
        let bound_steps = ((v0 / 0.01).ln() / cfg.drag_per_s / cfg.dt_s).ceil() as usize;
        for _ in 0..bound_steps {
            s = step(&s, &env, Action::Stop, &cfg, cfg.dt_s).0;
        }
        prop_assert!(s.v_forward_mps < 0.01 + 1e-12, "still {} after {bound_steps} steps", s.v_forward_mps);
    }
}
