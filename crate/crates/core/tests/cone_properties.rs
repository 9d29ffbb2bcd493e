use conic_multipliers::cones::sample;
use conic_multipliers::linalg::{dist, dot, norm};
use conic_multipliers::Cone;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cones() -> Vec<Cone> {
    vec![
        Cone::Zero(3),
        Cone::Nonpos(4),
        Cone::Lorentz(1),
        Cone::Lorentz(3),
        Cone::Psd(1),
        Cone::Psd(3),
        Cone::Product(vec![Cone::Zero(1), Cone::Nonpos(2), Cone::Lorentz(3)]),
    ]
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 6)
}

proptest! {
    #[test]
    fn moreau_decomposition(z in point()) {
        for cone in cones() {
            let z = &z[..cone.dim()];
            let (p, w) = cone.decompose(z).unwrap();
            let m = cone.moreau_check(z).unwrap();
            prop_assert_eq!(m.recon_residual, 0.0);
            prop_assert!(m.orth_residual <= 1e-8 * (1.0 + dot(z, z)), "{} {:?}", cone, m);
            prop_assert!(cone.contains(&p, 1e-9 * (1.0 + norm(z))).unwrap());
            prop_assert!(cone.dist_to_polar(&w).unwrap() <= 1e-9 * (1.0 + norm(z)));
        }
    }

    #[test]
    fn projection_characterization(z in point(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cone in cones() {
            let z = &z[..cone.dim()];
            let p = cone.project(z).unwrap();
            let w: Vec<f64> = z.iter().zip(&p).map(|(a, b)| a - b).collect();
            for _ in 0..20 {
                let c = sample::random_member(&mut rng, &cone);
                let diff: Vec<f64> = c.iter().zip(&p).map(|(a, b)| a - b).collect();
                prop_assert!(dot(&w, &diff) <= 1e-9 * (1.0 + norm(z)) * (1.0 + norm(&c)));
            }
        }
    }

    #[test]
    fn idempotent_and_homogeneous(z in point(), alpha in 0.01..100.0f64) {
        for cone in cones() {
            let z = &z[..cone.dim()];
            let p = cone.project(z).unwrap();
            prop_assert!(dist(&cone.project(&p).unwrap(), &p) <= 1e-10 * (1.0 + norm(z)));
            let scaled: Vec<f64> = z.iter().map(|v| alpha * v).collect();
            let expected: Vec<f64> = p.iter().map(|v| alpha * v).collect();
            prop_assert!(dist(&cone.project(&scaled).unwrap(), &expected) <= 1e-10 * (1.0 + alpha * norm(z)));
        }
    }

    #[test]
    fn projection_is_nonexpansive(a in point(), b in point()) {
        for cone in cones() {
            let d = cone.dim();
            let (a, b) = (&a[..d], &b[..d]);
            let pa = cone.project(a).unwrap();
            let pb = cone.project(b).unwrap();
            prop_assert!(dist(&pa, &pb) <= dist(a, b) + 1e-12 * (1.0 + norm(a) + norm(b)));
        }
    }

    #[test]
    fn distances_use_the_complementary_projection(z in point()) {
        for cone in cones() {
            let z = &z[..cone.dim()];
            let p = cone.project(z).unwrap();
            prop_assert_eq!(cone.dist_to_cone(z).unwrap(), norm(&cone.project_polar(z).unwrap()));
            let gap = (cone.dist_to_cone(z).unwrap() - dist(z, &p)).abs();
            prop_assert!(gap <= 1e-15 * (1.0 + norm(z)));
        }
    }

    #[test]
    fn polar_members_are_fixed_by_the_polar_projection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cone in cones() {
            let w = sample::random_polar_member(&mut rng, &cone);
            prop_assert!(cone.dist_to_polar(&w).unwrap() <= 1e-9 * (1.0 + norm(&w)));
            prop_assert!(dist(&cone.project_polar(&w).unwrap(), &w) <= 1e-9 * (1.0 + norm(&w)));
        }
    }
}

/// Brute-force distance from `l` to the polar of `Lorentz(2)`, which is
/// `{w : −w₁ ≥ |w₂|}`, over a fine grid of the polar.
fn sampled_dist_to_lorentz2_polar(l: &[f64]) -> f64 {
    let mut best = norm(l);
    let steps = 800;
    for i in 0..=steps {
        let t = 8.0 * i as f64 / steps as f64;
        for j in 0..=steps {
            let s = -t + 2.0 * t * j as f64 / steps as f64;
            best = best.min(dist(l, &[-t, s]));
        }
    }
    best
}

#[test]
fn polar_distance_matches_sampled_minimization() {
    let cone = Cone::Lorentz(2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let l = sample::gaussian_vec(&mut rng, 2, 1.5);
        let exact = cone.dist_to_polar(&l).unwrap();
        let sampled = sampled_dist_to_lorentz2_polar(&l);
        assert!(exact <= sampled + 1e-12, "{l:?}: {exact} > {sampled}");
        assert!(sampled - exact <= 1e-2, "{l:?}: {exact} vs {sampled}");
    }
}

#[test]
fn nonpos_projection_against_coordinatewise_oracle() {
    let cone = Cone::Nonpos(5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let z = sample::gaussian_vec(&mut rng, 5, 2.0);
        let oracle: Vec<f64> = z.iter().map(|v| v.min(0.0)).collect();
        assert_eq!(cone.project(&z).unwrap(), oracle);
    }
}
