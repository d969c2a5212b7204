//! Ray casting checked against a 1 mm marching oracle over the signed
//! distance field.

use eroas::world::{ObstaclePrimitive, Vec2, Vec3, World};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-3;
const R_MIN: f64 = 0.5;
const R_MAX: f64 = 30.0;
const RAYS: usize = 10_000;

/// First 1 mm lattice point at or inside a surface, starting from `R_MIN`.
/// The field is exact, so lattice points closer than the current distance
/// cannot cross a surface and are skipped without changing the result.
fn march(world: &World, origin: &Vec3, dir: &Vec3) -> Option<f64> {
    let start_inside = world.distance_to_surface(&(origin + dir * R_MIN)) <= 0.0;
    let mut k = (R_MIN / STEP).round() as i64;
    let last = (R_MAX / STEP).round() as i64;
    while k <= last {
        let t = k as f64 * STEP;
        let d = world.distance_to_surface(&(origin + dir * t));
        if (d <= 0.0) != start_inside {
            return Some(t);
        }
        k += ((d.abs() / STEP).floor() as i64).max(1);
    }
    None
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Rays start 6 to 14 m from `centre` and aim within 5 m of it, so most hit.
fn check(name: &str, obstacle: ObstaclePrimitive, centre: Vec3, seed: u64) {
    let world = World::new(vec![obstacle]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut hits, mut grazes) = (0, 0);
    for _ in 0..RAYS {
        let origin = loop {
            let o = centre + unit(&mut rng) * rng.random_range(6.0..14.0);
            if world.distance_to_surface(&o) > 0.5 {
                break o;
            }
        };
        let aim = centre + unit(&mut rng) * rng.random_range(0.0..5.0);
        let dir = (aim - origin).normalize();
        let got = world.ray_cast(&origin, &dir, R_MIN, R_MAX).unwrap();
        let want = march(&world, &origin, &dir);
        match (got, want) {
            (Some(t), Some(m)) => {
                hits += 1;
                assert!((t - m).abs() <= 2e-3, "{name}: cast {t} vs march {m} from {origin:?} along {dir:?}");
            }
            (None, None) => {}
            (Some(t), None) => {
                // A chord shorter than the step slips between lattice points.
                let near = world.distance_to_surface(&(origin + dir * t)).abs();
                assert!(near <= 2e-3, "{name}: cast {t} but march found nothing");
                grazes += 1;
            }
            (None, Some(m)) => panic!("{name}: march crossed at {m}, cast missed from {origin:?} along {dir:?}"),
        }
    }
    assert!(hits > RAYS / 4, "{name}: only {hits} hits");
    assert!(grazes < RAYS / 100, "{name}: {grazes} grazing rays");
}

#[test]
fn sphere_rays_match_marching() {
    let c = Vec3::new(1.0, -2.0, -10.0);
    check("sphere", ObstaclePrimitive::sphere(c, 3.0), c, 1);
}

#[test]
fn box_rays_match_marching() {
    let (lo, hi) = (Vec3::new(-2.0, -1.0, -14.0), Vec3::new(3.0, 4.0, -8.0));
    check("box", ObstaclePrimitive::aabb(lo, hi), 0.5 * (lo + hi), 2);
}

#[test]
fn cylinder_rays_match_marching() {
    let base = Vec3::new(2.0, 1.0, -16.0);
    check("cylinder", ObstaclePrimitive::cylinder(base, 2.5, 8.0), base + Vec3::new(0.0, 0.0, 4.0), 3);
}

#[test]
fn wall_rays_match_marching() {
    let w = ObstaclePrimitive::wall(Vec2::new(-4.0, -3.0), Vec2::new(5.0, 4.0), 1.0, -14.0, 8.0);
    check("wall", w, Vec3::new(0.5, 0.5, -10.0), 4);
}

#[test]
fn signed_distance_sign_matches_containment() {
    let world = World::new(vec![
        ObstaclePrimitive::sphere(Vec3::new(0.0, 0.0, 0.0), 2.0),
        ObstaclePrimitive::aabb(Vec3::new(5.0, -1.0, -1.0), Vec3::new(7.0, 1.0, 1.0)),
        ObstaclePrimitive::cylinder(Vec3::new(-6.0, 0.0, -2.0), 1.5, 4.0),
    ])
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20_000 {
        let p = Vec3::new(rng.random_range(-9.0..9.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let inside_sphere = p.norm() < 2.0;
        let inside_box = (5.0..7.0).contains(&p.x) && p.y.abs() < 1.0 && p.z.abs() < 1.0;
        let inside_cyl = (p.x + 6.0).hypot(p.y) < 1.5 && p.z > -2.0 && p.z < 2.0;
        let d = world.distance_to_surface(&p);
        if inside_sphere || inside_box || inside_cyl {
            assert!(d <= 1e-12, "{p:?} inside but d = {d}");
        } else {
            assert!(d >= -1e-12, "{p:?} outside but d = {d}");
        }
    }
}
