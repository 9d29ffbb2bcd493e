//! Seeded property batteries behind `cone-test` and `grad-test`.

use conic_multipliers::cones::sample;
use conic_multipliers::expr::{finite_difference_grad, random::random_expr};
use conic_multipliers::linalg::{dist, dot, norm, Matrix};
use conic_multipliers::{Cone, ConeError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Step of the central finite differences.
pub const FD_STEP: f64 = 1e-6;
/// Bound on the orthogonality and characterization residuals.
pub const CONE_TOL: f64 = 1e-8;
/// Bound on idempotence, homogeneity and Lipschitz residuals.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Bound on finite-difference relative errors.
pub const GRAD_TOL: f64 = 1e-5;
/// Cone members tested against each point's projection.
pub const MEMBERS_PER_POINT: usize = 100;

/// Maximum residuals of the cone battery. Every residual except the
/// reconstruction one is scaled as described on its field.
#[derive(Debug, Clone, Serialize)]
pub struct ConeBatteryReport {
    pub cone: String,
    pub samples: usize,
    pub seed: u64,
    /// `‖(z − Π_K(z)) − Π_{K°}(z)‖`, zero exactly.
    pub recon_residual: f64,
    /// `|⟨Π_K(z), Π_{K°}(z)⟩| / (1 + ‖z‖²)`
    pub orth_residual: f64,
    /// `max(0, ⟨z − Π_K(z), c − Π_K(z)⟩) / ((1 + ‖z‖)(1 + ‖c‖))` over members `c`.
    pub characterization_residual: f64,
    /// `‖Π_K(Π_K(z)) − Π_K(z)‖ / (1 + ‖z‖)`
    pub idempotence_residual: f64,
    /// `‖Π_K(αz) − αΠ_K(z)‖ / (1 + α‖z‖)` for random `α > 0`.
    pub homogeneity_residual: f64,
    /// `max(0, ‖Π_K(z) − Π_K(z′)‖ − ‖z − z′‖) / (1 + ‖z‖ + ‖z′‖)`
    pub lipschitz_residual: f64,
    /// `‖g − g_fd‖ / max(1, ‖g‖)` for `g = ∇‖Π_{K°}(z)‖²`.
    pub gradient_rel_error: f64,
    /// Points near a Lorentz boundary included in the gradient check.
    pub boundary_points: usize,
    pub pass: bool,
}

pub fn cone_battery(cone: &Cone, samples: usize, seed: u64) -> Result<ConeBatteryReport, ConeError> {
    cone.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity = Matrix::identity(cone.dim());
    let mut r = ConeBatteryReport {
        cone: cone.to_string(),
        samples,
        seed,
        recon_residual: 0.0,
        orth_residual: 0.0,
        characterization_residual: 0.0,
        idempotence_residual: 0.0,
        homogeneity_residual: 0.0,
        lipschitz_residual: 0.0,
        gradient_rel_error: 0.0,
        boundary_points: 0,
        pass: false,
    };

    for i in 0..samples {
        let z = sample::random_point(&mut rng, cone);
        let nz = norm(&z);
        let m = cone.moreau_check(&z)?;
        r.recon_residual = r.recon_residual.max(m.recon_residual);
        r.orth_residual = r.orth_residual.max(m.orth_residual / (1.0 + nz * nz));

        let (p, w) = cone.decompose(&z)?;
        for _ in 0..MEMBERS_PER_POINT {
            let c = sample::random_member(&mut rng, cone);
            let diff: Vec<f64> = c.iter().zip(&p).map(|(a, b)| a - b).collect();
            let excess = dot(&w, &diff).max(0.0) / ((1.0 + nz) * (1.0 + norm(&c)));
            r.characterization_residual = r.characterization_residual.max(excess);
        }

        let pp = cone.project(&p)?;
        r.idempotence_residual = r.idempotence_residual.max(dist(&pp, &p) / (1.0 + nz));

        let alpha = 10f64.powf(rng.random_range(-2.0..2.0));
        let scaled: Vec<f64> = z.iter().map(|v| alpha * v).collect();
        let p_scaled = cone.project(&scaled)?;
        let expected: Vec<f64> = p.iter().map(|v| alpha * v).collect();
        r.homogeneity_residual = r
            .homogeneity_residual
            .max(dist(&p_scaled, &expected) / (1.0 + alpha * nz));

        let z2 = sample::random_point(&mut rng, cone);
        let p2 = cone.project(&z2)?;
        let excess = (dist(&p, &p2) - dist(&z, &z2)).max(0.0) / (1.0 + nz + norm(&z2));
        r.lipschitz_residual = r.lipschitz_residual.max(excess);

        // every other gradient point is pushed next to a Lorentz boundary
        let (zg, near) = if i % 2 == 1 {
            near_boundary_point(&mut rng, cone)
        } else {
            (z.clone(), false)
        };
        r.boundary_points += usize::from(near);
        let g = cone.penalty_grad_chain(&zg, &identity)?;
        let fd = finite_difference_grad(|y| Ok(cone.penalty_value(y).expect("dimension checked")), &zg, FD_STEP)
            .expect("penalty is total");
        r.gradient_rel_error = r.gradient_rel_error.max(dist(&g, &fd) / norm(&g).max(1.0));
    }

    r.pass = r.recon_residual == 0.0
        && r.orth_residual <= CONE_TOL
        && r.characterization_residual <= CONE_TOL
        && r.idempotence_residual <= PROJECTION_TOL
        && r.homogeneity_residual <= PROJECTION_TOL
        && r.lipschitz_residual <= PROJECTION_TOL
        && r.gradient_rel_error <= GRAD_TOL;
    Ok(r)
}

/// A random point whose Lorentz blocks of dimension ≥ 2 have tail norm
/// `|z₁|·(1 ± 10⁻³)`. Returns `false` when the cone has no such block.
fn near_boundary_point<R: Rng>(rng: &mut R, cone: &Cone) -> (Vec<f64>, bool) {
    match cone {
        Cone::Lorentz(d) if *d >= 2 => {
            let factor = if rng.random_bool(0.5) { 1.0 + 1e-3 } else { 1.0 - 1e-3 };
            (sample::near_lorentz_boundary(rng, *d, factor), true)
        }
        Cone::Product(parts) => {
            let mut z = Vec::with_capacity(cone.dim());
            let mut any = false;
            for part in parts {
                let (block, near) = near_boundary_point(rng, part);
                any |= near;
                z.extend(block);
            }
            (z, any)
        }
        other => (sample::random_point(rng, other), false),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradBatteryReport {
    pub samples: usize,
    pub seed: u64,
    /// Largest `|g_j − fd_j| / max(1, |g_j|)` over all pairs and coordinates.
    pub max_rel_error: f64,
    /// Expression attaining the largest error.
    pub worst_expr: String,
    pub worst_point: Vec<f64>,
    /// Pairs above the tolerance.
    pub failures: usize,
    pub pass: bool,
}

/// Compares dual-number gradients with central differences on random
/// smooth expressions in 1 to 4 variables at random points of `[−2, 2]ⁿ`.
pub fn grad_battery(samples: usize, seed: u64) -> GradBatteryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = GradBatteryReport {
        samples,
        seed,
        max_rel_error: 0.0,
        worst_expr: String::new(),
        worst_point: Vec::new(),
        failures: 0,
        pass: false,
    };
    for _ in 0..samples {
        let dim = rng.random_range(1..=4);
        let depth = rng.random_range(1..=4);
        let e = random_expr(&mut rng, dim, depth);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let err = match (e.grad(&x), finite_difference_grad(|y| e.eval(y), &x, FD_STEP)) {
            (Ok(g), Ok(fd)) => g
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        };
        if !(err <= GRAD_TOL) {
            r.failures += 1;
        }
        if !(err <= r.max_rel_error) {
            r.max_rel_error = err;
            r.worst_expr = e.to_string();
            r.worst_point = x;
        }
    }
    r.pass = r.failures == 0;
    r
}
