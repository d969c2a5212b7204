use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::world::Vec3;

use super::Spd2cConfig;

/// Heading offset toward beam `beam`; positive turns left (toward beam 1).
pub fn heading_from_beam(beam: usize, k_r: f64) -> f64 {
    FRAC_PI_2 - (k_r * beam as f64 + FRAC_PI_4)
}

/// Velocity mapping from a heading offset and a pivot elevation to a body
/// velocity reference and yaw-rate reference. Sway is always zero.
pub fn reference_commands(psi_r: f64, theta_cl: f64, cfg: &Spd2cConfig) -> (Vec3, f64) {
    let v_x = (cfg.k_v * (cfg.psi_max - psi_r.abs())).max(0.0);
    let v_z = v_x * theta_cl.tan();
    (Vec3::new(v_x, 0.0, v_z), cfg.k_t * psi_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    const K_R: f64 = FRAC_PI_2 / 512.0;

    #[test]
    fn beam_to_heading_examples() {
        assert!(heading_from_beam(256, K_R).abs() < 1e-15);
        assert!((heading_from_beam(1, K_R) - (FRAC_PI_4 - K_R)).abs() < 1e-15);
        assert!((heading_from_beam(1, K_R) - 0.7823).abs() < 1e-4);
        assert!((heading_from_beam(512, K_R) + FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn mapping_examples() {
        let cfg = Spd2cConfig::default();
        let (v, r) = reference_commands(0.0, 0.0, &cfg);
        assert!((v.x - 0.35 * FRAC_PI_2).abs() < 1e-15);
        assert!((v.x - 0.5498).abs() < 1e-4);
        assert_eq!((v.y, v.z, r), (0.0, 0.0, 0.0));

        let (v, _) = reference_commands(cfg.psi_max, 0.0, &cfg);
        assert_eq!(v.x, 0.0);

        let (v, _) = reference_commands(0.0, 30f64.to_radians(), &cfg);
        assert!((v.z - 0.35 * FRAC_PI_2 * 30f64.to_radians().tan()).abs() < 1e-15);
        assert!((v.z - 0.3174).abs() < 1e-4);

        let (_, r) = reference_commands(-0.5, 0.0, &cfg);
        assert!((r + 0.06).abs() < 1e-15);
    }


    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn heading_is_affine_and_decreasing(b in 1usize..512) {
                let step = heading_from_beam(b, K_R) - heading_from_beam(b + 1, K_R);
                prop_assert!((step - K_R).abs() < 1e-12);
                prop_assert!(step > 0.0);
            }

            #[test]
            fn forward_speed_bounded(psi in -3.2f64..3.2, theta in -0.8f64..0.8) {
                let cfg = Spd2cConfig::default();
                let (v, r) = reference_commands(psi, theta, &cfg);
                prop_assert!(v.x >= 0.0);
                prop_assert!(v.x <= cfg.k_v * cfg.psi_max + 1e-15);
                prop_assert_eq!(v.y, 0.0);
                prop_assert!((r - cfg.k_t * psi).abs() < 1e-15);
            }
        }
    }
}
