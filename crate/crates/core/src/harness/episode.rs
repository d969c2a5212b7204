//! The closed loop: scan, plan, filter, step, until an outcome is reached.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::sonar::{pivot_sweep, scan, scan_noisy, SonarScan};
use crate::spd2c::Maneuver;
use crate::vehicle::{advance, goal_reached, VehicleState};
use crate::world::Vec3;

use super::controller::{Algorithm, CycleOutput, Planner};
use super::log::{write_decision, write_scan_block, LogRecord, TrajectoryLog, SCAN_HEADER};
use super::metrics::{compute_metrics, CycleTimes, Metrics, Outcome};
use super::scenario::Scenario;

/// Optional per-cycle dumps.
#[derive(Default)]
pub struct Dumps<'a> {
    pub scans: Option<&'a mut dyn Write>,
    pub decisions: Option<&'a mut dyn Write>,
}

fn mode_name(m: Maneuver) -> &'static str {
    match m {
        Maneuver::Horizontal => "horizontal",
        Maneuver::Vertical => "vertical",
        Maneuver::FallbackTurn => "fallback_turn",
        Maneuver::Hover => "hover",
    }
}

fn record(cycle: usize, s: &VehicleState, out: Option<&CycleOutput>, event: &str, clearance: f64) -> LogRecord {
    let zero = Vec3::zeros();
    let (mode, vn, rn, vs, rc) = match out {
        Some(o) => (mode_name(o.mode), o.v_nominal, o.r_nominal, o.v_safe, o.r_cmd),
        None => ("end", zero, 0.0, zero, 0.0),
    };
    let f = out.and_then(|o| o.filter);
    LogRecord {
        cycle,
        time: s.time,
        x: s.position.x,
        y: s.position.y,
        z: s.position.z,
        heading: s.heading,
        u: s.velocity.x,
        v: s.velocity.y,
        w: s.velocity.z,
        yaw_rate: s.yaw_rate,
        mode: mode.to_string(),
        vr_x: vn.x,
        vr_y: vn.y,
        vr_z: vn.z,
        r_ref: rn,
        vs_x: vs.x,
        vs_y: vs.y,
        vs_z: vs.z,
        r_cmd: rc,
        h: f.and_then(|f| f.h),
        constraint_active: f.is_some_and(|f| f.constraint_active),
        memory_size: out.map_or(0, |o| o.memory_size),
        closest: out.and_then(|o| o.closest_distance),
        pivot_angle: out.and_then(|o| o.pivot),
        event: event.to_string(),
        clearance,
    }
}

pub fn run_episode(scenario: &Scenario, algo: Algorithm) -> (TrajectoryLog, Metrics) {
    run_episode_with(scenario, algo, Dumps::default()).expect("episodes without dumps do not fail")
}

/// Runs one episode, streaming the requested dumps. Errors only come from
/// writing the dumps.
pub fn run_episode_with(scenario: &Scenario, algo: Algorithm, mut dumps: Dumps<'_>) -> Result<(TrajectoryLog, Metrics)> {
    let world = &scenario.world;
    let sonar = &scenario.sonar;
    let goal = scenario.goal;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut planner = Planner::new(algo, scenario);
    let mut state = scenario.start_state();
    let mut current: Option<SonarScan> = None;
    let mut pending: Option<Vec<SonarScan>> = None;
    let mut records = Vec::new();
    let mut timings = Vec::new();
    if let Some(w) = dumps.scans.as_mut() {
        writeln!(w, "{SCAN_HEADER}").map_err(|e| crate::Error::Log(e.to_string()))?;
    }

    let mut cycle = 0usize;
    let outcome = loop {
        let clearance = world.distance_to_surface(&state.position);
        if clearance <= 0.0 {
            break (Outcome::Collision, clearance);
        }
        if goal_reached(&state, &goal, scenario.goal_tolerance) {
            break (Outcome::Success, clearance);
        }
        if state.time >= scenario.time_budget {
            break (Outcome::Timeout, clearance);
        }

        if current.is_none() || cycle % sonar.refresh_every == 0 {
            current = Some(if sonar.noise_amplitude > 0.0 {
                scan_noisy(world, &state, 0.0, sonar, &mut rng)
            } else {
                scan(world, &state, 0.0, sonar)
            });
        }
        let level = current.as_ref().expect("scan taken above");
        let sweep = pending.take();

        let started = Instant::now();
        let out = planner.cycle(scenario, level, sweep.as_deref(), &state, &goal);
        timings.push(started.elapsed().as_secs_f64());

        if let Some(w) = dumps.scans.as_mut() {
            write_scan_block(w, cycle, state.time, std::slice::from_ref(level))?;
            if let Some(sw) = &sweep {
                write_scan_block(w, cycle, state.time, sw)?;
            }
        }
        if let (Some(w), Some(d)) = (dumps.decisions.as_mut(), out.decision.as_ref()) {
            write_decision(w, cycle, state.time, d)?;
        }

        let event = if out.request_sweep { "sweep" } else { "" };
        records.push(record(cycle, &state, Some(&out), event, clearance));

        if out.request_sweep {
            pending = Some(pivot_sweep(world, &state, &sonar.pivot_sweep, sonar));
        }
        state = advance(&state, &out.v_safe, out.r_cmd, &scenario.limits, &scenario.tracking, scenario.control_period);
        if out.request_sweep && sonar.sweep_time_cost > 0.0 {
            state = advance(&state, &Vec3::zeros(), 0.0, &scenario.limits, &scenario.tracking, sonar.sweep_time_cost);
        }
        cycle += 1;
    };
    records.push(record(cycle, &state, None, outcome.0.name(), outcome.1));

    let log = TrajectoryLog {
        scenario: scenario.name.clone(),
        algo: algo.name().to_string(),
        seed: scenario.seed,
        records,
    };
    let mut metrics = compute_metrics(&log, scenario);
    metrics.cycle_time = CycleTimes::from_samples(&timings);
    Ok((log, metrics))
}
