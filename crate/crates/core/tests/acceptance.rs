//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL
//! line; the process exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use eroas::harness::{run_episode, Algorithm, Metrics, Scenario, TrajectoryLog};
use eroas::scg::{ContextMode, LocalMemory};
use eroas::sonar::SonarScan;
use eroas::spd2c::{
    convexity, evaluate_pivot_sweep, find_gaps, fit_quadratic, ConvexityLabel, PivotWindow, Spd2cConfig,
};
use eroas::stcbf::{filter, CbfConfig};
use eroas::vehicle::VehicleState;
use eroas::world::{ObstaclePrimitive, Vec2, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn scenario(name: &str, seed: Option<u64>) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    Scenario::load(&path, seed).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn forward_invariance() -> Verdict {
    let started = Instant::now();
    let r_o = CbfConfig::default().obstacle_radius;
    let mut worst = f64::INFINITY;
    let mut worst_seed = 0;
    let mut skipped = 0;
    for seed in 0..50 {
        let sc = scenario("cluttered_field", Some(seed));
        if sc.world.distance_to_surface(&sc.start.position) <= sc.cbf.obstacle_radius {
            skipped += 1;
            continue;
        }
        let (_, m) = run_episode(&sc, Algorithm::Eroas);
        if m.min_clearance < worst {
            worst = m.min_clearance;
            worst_seed = seed;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Verdict::new(
        skipped == 0 && worst >= r_o - 0.1 && secs < 120.0,
        format!("50 seeds, min clearance {worst:.4} m (seed {worst_seed}) vs floor {:.1} m, {secs:.1} s", r_o - 0.1),
    )
}

/// Minimizer of ‖u − u_r‖ over `g·u ≥ b` by successively refined grid
/// search. The grid axes run along and across `g`, with one family of grid
/// lines through the constraint boundary.
fn grid_search(u_r: Vec2, g: Vec2, b: f64) -> Vec2 {
    let e1 = g.normalize();
    let e2 = Vec2::new(-e1.y, e1.x);
    let edge = b / g.norm();
    let (mut a0, mut b0) = (edge, 0.0);
    let mut half = 4.0 * (u_r.norm() + edge.abs() + 1.0);
    let n = 40;
    for _ in 0..14 {
        let step = half / n as f64;
        let mut best: Option<(f64, f64, f64)> = None;
        for i in -n..=n {
            let alpha = a0 + i as f64 * step;
            if alpha < edge {
                continue;
            }
            for j in -n..=n {
                let beta = b0 + j as f64 * step;
                let cost = (e1 * alpha + e2 * beta - u_r).norm_squared();
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, alpha, beta));
                }
            }
        }
        let (_, alpha, beta) = best.expect("the grid always reaches the feasible side");
        (a0, b0) = (alpha, beta);
        half *= 0.25;
    }
    e1 * a0 + e2 * b0
}

fn qp_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = CbfConfig::default();
    let (mut worst_component, mut worst_formula) = (0.0f64, 0.0f64);
    let mut active = 0;
    for _ in 0..1000 {
        let heading = rng.random_range(-3.1..3.1);
        let state = VehicleState::at_rest(Vec3::new(0.0, 0.0, -10.0), heading);
        let point = state.position
            + Vec3::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0), rng.random_range(-1.0..1.0));
        let mut memory = LocalMemory::new(15.0);
        memory.update(&[point], &state.position);
        let Some(ctx) = memory.context(&state.position, ContextMode::Horizontal) else {
            continue;
        };
        let v_ref = Vec3::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-0.5..0.5));
        let out = filter(&v_ref, &state, Some(&ctx), &cfg);

        let (s, c) = heading.sin_cos();
        let rel = Vec2::new(state.position.x - ctx.point.x, state.position.y - ctx.point.y);
        let h = rel.norm_squared() - cfg.obstacle_radius.powi(2);
        let g = 2.0 * rel;
        let b = -cfg.gain * h;
        let u_r = Vec2::new(v_ref.x * c - v_ref.y * s, v_ref.x * s + v_ref.y * c);
        let u = Vec2::new(out.velocity.x * c - out.velocity.y * s, out.velocity.x * s + out.velocity.y * c);
        let oracle = grid_search(u_r, g, b);
        worst_component = worst_component.max((u - oracle).abs().max());
        let formula = (b - g.dot(&u_r)).max(0.0) / g.norm();
        worst_formula = worst_formula.max((out.deviation - formula).abs());
        active += out.constraint_active as usize;
    }
    Verdict::new(
        worst_component <= 1e-3 && worst_formula <= 1e-9 && active > 100,
        format!("1000 instances ({active} active), max component error {worst_component:.2e} m/s, deviation formula error {worst_formula:.2e}"),
    )
}

fn random_mask(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    let mut mask = vec![true; n];
    for _ in 0..rng.random_range(0..6) {
        let start = rng.random_range(0..n);
        let len = rng.random_range(1..n / 3);
        for m in mask.iter_mut().skip(start).take(len) {
            *m = false;
        }
    }
    for m in mask.iter_mut() {
        if rng.random_bool(0.002) {
            *m = false;
        }
    }
    mask
}

fn gap_equivalence() -> Verdict {
    let cfg = Spd2cConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut gap_mismatch, mut gap_nonempty) = (0, 0);
    for _ in 0..1000 {
        let mask = random_mask(&mut rng, 512);
        let free: Vec<usize> = (1..=512).filter(|&b| mask[b - 1]).collect();
        let got: Vec<(usize, usize)> = find_gaps(&free, cfg.gap_length).iter().map(|g| (g.start, g.mid)).collect();
        let want: Vec<(usize, usize)> = (1..=512 - cfg.gap_length + 1)
            .filter(|&s| (s..s + cfg.gap_length).all(|b| mask[b - 1]))
            .map(|s| (s, s + cfg.gap_length / 2))
            .collect();
        gap_mismatch += (got != want) as usize;
        gap_nonempty += !want.is_empty() as usize;
    }

    let (lo, hi) = cfg.central_sector;
    let angles: Vec<f64> = (-45..=45).map(|d| (d as f64).to_radians()).collect();
    let (mut pivot_mismatch, mut pivot_some) = (0, 0);
    for _ in 0..1000 {
        let accepted: Vec<bool> = if rng.random_bool(0.5) {
            random_mask(&mut rng, angles.len())
        } else {
            (0..angles.len()).map(|_| rng.random_bool(0.9)).collect()
        };
        let scans: Vec<SonarScan> = angles
            .iter()
            .zip(&accepted)
            .map(|(&a, &ok)| {
                let mut intensities = vec![0.0; 512];
                if !ok {
                    intensities[rng.random_range(lo - 1..hi)] = 100.0;
                }
                // Returns outside the central sector never block an angle.
                intensities[rng.random_range(0..lo - 1)] = 100.0;
                SonarScan {
                    pivot_angle: a,
                    fov_h: std::f64::consts::FRAC_PI_2,
                    ranges: intensities.iter().map(|&i| (i > 0.0).then_some(10.0)).collect(),
                    intensities,
                    pose: VehicleState::at_rest(Vec3::zeros(), 0.0),
                }
            })
            .collect();
        let target = rng.random_range(-0.8..0.8);
        let got = evaluate_pivot_sweep(&scans, cfg.central_sector, cfg.intensity_threshold, cfg.pivot_group_length, target);
        let l = cfg.pivot_group_length;
        let want = (0..=angles.len() - l)
            .filter(|&s| accepted[s..s + l].iter().all(|&a| a))
            .map(|s| PivotWindow {
                start: s,
                first_angle: angles[s],
                last_angle: angles[s + l - 1],
                mid_angle: 0.5 * (angles[s] + angles[s + l - 1]),
            })
            .min_by(|a, b| {
                (a.mid_angle - target)
                    .abs()
                    .total_cmp(&(b.mid_angle - target).abs())
                    .then(a.mid_angle.total_cmp(&b.mid_angle))
            });
        pivot_mismatch += (got != want) as usize;
        pivot_some += want.is_some() as usize;
    }
    Verdict::new(
        gap_mismatch == 0 && pivot_mismatch == 0,
        format!(
            "gaps: {gap_mismatch}/1000 mismatches ({gap_nonempty} masks with gaps), pivot windows: {pivot_mismatch}/1000 mismatches ({pivot_some} with a window)"
        ),
    )
}

fn convexity_fit() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, b, c) = (rng.random_range(-0.5..0.5), rng.random_range(-2.0..2.0), rng.random_range(-20.0..20.0));
        let n = rng.random_range(3..200);
        let x0 = rng.random_range(-15.0..0.0);
        let pts: Vec<Vec2> = (0..n)
            .map(|k| {
                let x: f64 = x0 + 15.0 * k as f64 / (n - 1) as f64;
                Vec2::new(x, (a * x + b) * x + c)
            })
            .collect();
        let fit = fit_quadratic(&pts).expect("distinct abscissae");
        worst = worst.max((fit.a - a).abs()).max((fit.b - b).abs()).max((fit.c - c).abs());
    }
    let th = Spd2cConfig::default().convexity_threshold;
    let on_boundary: Vec<Vec2> = (-10..=10).map(|k| Vec2::new(k as f64, th * (k * k) as f64)).collect();
    let fit = fit_quadratic(&on_boundary).expect("boundary fit");
    let at = convexity(&on_boundary, fit.a).label;
    let above = convexity(&on_boundary, fit.a.next_up()).label;
    let boundary = convexity(&on_boundary, th).label;
    Verdict::new(
        worst <= 1e-6 && at == ConvexityLabel::Convex && above == ConvexityLabel::Concave && boundary == ConvexityLabel::Convex,
        format!(
            "max coefficient error {worst:.2e}; a = {} fits {:.17}, labelled {boundary:?}; threshold at fit {at:?}, one ulp above {above:?}",
            th, fit.a
        ),
    )
}

fn describe(m: &Metrics) -> String {
    format!(
        "{} {} in {:.1} s (clearance {:.2} m)",
        m.algo,
        m.outcome.map_or("?", |o| o.name()),
        m.travel_time,
        m.min_clearance
    )
}

fn dead_end_corridor() -> Verdict {
    let started = Instant::now();
    let sc = scenario("dead_end_corridor", None);
    let runs: Vec<Metrics> = Algorithm::ALL.iter().map(|&a| run_episode(&sc, a).1).collect();
    let secs = started.elapsed().as_secs_f64();
    let ok = runs.iter().all(|m| (m.algo == "eroas") == m.success) && secs < 30.0;
    let text: Vec<String> = runs.iter().map(describe).collect();
    Verdict::new(ok, format!("{}; {secs:.1} s", text.join(", ")))
}

fn cluttered_ordering() -> Verdict {
    let algos = [Algorithm::Eroas, Algorithm::Dwa, Algorithm::Apf];
    let mut per_seed = Vec::new();
    for seed in 0..5 {
        let sc = scenario("cluttered_field", Some(seed));
        per_seed.push(algos.map(|a| run_episode(&sc, a).1));
    }
    let ordered = |v: [f64; 3]| v[0] < v[1] && v[1] < v[2];
    let mut seeds_ok = 0;
    let mut lines = Vec::new();
    for (seed, runs) in per_seed.iter().enumerate() {
        let all_ok = runs.iter().all(|m| m.success);
        let len = runs.each_ref().map(|m| m.path_length);
        let jerk = runs.each_ref().map(|m| m.mean_angular_jerk);
        let ok = all_ok && ordered(len) && ordered(jerk);
        seeds_ok += ok as usize;
        lines.push(format!(
            "seed {seed}: len {:.1}/{:.1}/{:.1} jerk {:.3}/{:.3}/{:.3}{}",
            len[0],
            len[1],
            len[2],
            jerk[0],
            jerk[1],
            jerk[2],
            if all_ok { "" } else { " (not all succeeded)" }
        ));
    }
    let med = |k: usize, f: fn(&Metrics) -> f64| {
        median(per_seed.iter().filter(|r| r[k].success).map(|r| f(&r[k])).collect())
    };
    let med_len = [0, 1, 2].map(|k| med(k, |m| m.path_length));
    let med_jerk = [0, 1, 2].map(|k| med(k, |m| m.mean_angular_jerk));
    let reduction = 1.0 - med_jerk[0] / med_jerk[2];
    let pass = ordered(med_len) && ordered(med_jerk) && reduction >= 0.5 && seeds_ok >= 4;
    let successes = [0, 1, 2].map(|k| per_seed.iter().filter(|r| r[k].success).count());
    Verdict::new(
        pass,
        format!(
            "eroas/dwa/apf successes {}/{}/{}; median len {:.1}/{:.1}/{:.1} m, median jerk {:.3}/{:.3}/{:.3}, jerk cut vs apf {:.0}%, ordered seeds {seeds_ok}/5 [{}]",
            successes[0],
            successes[1],
            successes[2],
            med_len[0],
            med_len[1],
            med_len[2],
            med_jerk[0],
            med_jerk[1],
            med_jerk[2],
            100.0 * reduction,
            lines.join("; ")
        ),
    )
}

fn wall_top(sc: &Scenario) -> f64 {
    sc.world
        .obstacles
        .iter()
        .map(|o| match *o {
            ObstaclePrimitive::WallSegment { base_depth, height, .. } => base_depth + height,
            _ => f64::NEG_INFINITY,
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn wall_ascent() -> Verdict {
    let sc = scenario("full_width_wall", None);
    let (log, m) = run_episode(&sc, Algorithm::Eroas);
    let top = wall_top(&sc);
    let z_max = log.records.iter().map(|r| r.z).fold(f64::NEG_INFINITY, f64::max);
    let final_z = log.records.last().map_or(f64::NAN, |r| r.z);
    let vertical = log.records.iter().any(|r| r.mode == "vertical");
    let rise = z_max - top;
    let pass = m.pivots > 0 && vertical && rise >= sc.cbf.obstacle_radius && (final_z - sc.goal.z).abs() <= sc.goal_tolerance;
    Verdict::new(
        pass,
        format!(
            "{} pivot sweeps, peak z {z_max:.2} m is {rise:.2} m over the top at {top:.1} m, final z {final_z:.2} m vs goal {:.1} m, {}",
            m.pivots,
            sc.goal.z,
            describe(&m)
        ),
    )
}

fn throughput() -> Verdict {
    let mut medians = Vec::new();
    let mut worst = 0.0f64;
    for (name, seed) in [("cluttered_field", Some(0)), ("full_width_wall", None), ("dead_end_corridor", None)] {
        let (_, m) = run_episode(&scenario(name, seed), Algorithm::Eroas);
        let ct = m.cycle_time.expect("episodes time their cycles");
        medians.push((name, ct.median));
        worst = worst.max(ct.median);
    }
    let text: Vec<String> = medians.iter().map(|(n, t)| format!("{n} {:.3} ms", 1e3 * t)).collect();
    Verdict::new(worst < 0.125, format!("median cycle {}; 1 ms target {}", text.join(", "), if worst < 1e-3 { "met" } else { "missed" }))
}

fn bytes(log: &TrajectoryLog) -> Vec<u8> {
    log.to_bytes().expect("logs serialize")
}

fn determinism() -> Verdict {
    let mut noisy = scenario("cluttered_field", Some(7));
    noisy.sonar.noise_amplitude = 10.0;
    let cases = [
        ("cluttered_field", scenario("cluttered_field", Some(1))),
        ("dead_end_corridor", scenario("dead_end_corridor", None)),
        ("noisy cluttered_field", noisy),
    ];
    let mut diffs = Vec::new();
    let mut compared = 0;
    for (name, sc) in &cases {
        for algo in Algorithm::ALL {
            let a = bytes(&run_episode(sc, algo).0);
            let b = bytes(&run_episode(sc, algo).0);
            compared += 1;
            if a != b {
                diffs.push(format!("{name}/{algo}"));
            }
        }
    }
    Verdict::new(
        diffs.is_empty(),
        format!("{compared} log pairs compared, differing: {}", if diffs.is_empty() { "none".into() } else { diffs.join(", ") }),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("forward invariance", forward_invariance),
        ("qp oracle equivalence", qp_oracle),
        ("gap finder equivalence", gap_equivalence),
        ("convexity fit", convexity_fit),
        ("dead-end corridor", dead_end_corridor),
        ("cluttered-field ordering", cluttered_ordering),
        ("3d wall ascent", wall_ascent),
        ("throughput", throughput),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        println!("criterion {} {name}: {} ({})", k + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
