//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion fails that is not listed in `UNATTAINABLE`.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use conic_multipliers::kkt::{conic_regularity_check, licq_check, ConicCheckOptions, DEFAULT_RANK_TOL};
use conic_multipliers::linalg::{dist, norm};
use conic_multipliers::penalty::{replay, ReplayOutcome};
use conic_multipliers::{Cone, Problem, SolverConfig};
use conic_multipliers_cli::battery::{cone_battery, grad_battery, CONE_TOL, GRAD_TOL};
use conic_multipliers_cli::{
    cmd_check, cmd_replay, cmd_solve, CheckArgs, GlobalArgs, PenaltyArgs, Point, ProblemFile, ReplayArgs, RunStatus,
    SolveArgs,
};

/// Criteria that cannot hold as stated, with the reason. They are still
/// evaluated and reported.
const UNATTAINABLE: &[(u32, &str)] = &[
    (
        5,
        "for h = x1^2 the penalized minimizer is x ~ -(2k)^(-1/3), so |lambda_k| = k x^2 grows like k^(1/3): about 2.15x per decade, never 10x",
    ),
    (
        6,
        "psd-min: +0.1 on the off-diagonal svec coordinate leaves stationarity and complementarity at 0 and moves dual feasibility only to ~5e-3",
    ),
];

const REGISTRY: &[&str] = &[
    "eq-circle",
    "ineq-bound",
    "soc-min",
    "psd-min",
    "licq-fail",
    "mixed",
    "mixed-slack",
];

fn problem_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(format!("{name}.json"))
}

fn load(name: &str) -> (ProblemFile, Problem) {
    let file = ProblemFile::load(&problem_path(name)).expect("registry file loads");
    let p = file.to_problem().expect("registry problem builds");
    (file, p)
}

fn replay_registry(name: &str) -> ReplayOutcome {
    let (file, p) = load(name);
    let cfg = SolverConfig {
        delta: file.delta.unwrap_or(1.0),
        ..SolverConfig::replay_default()
    };
    replay(&p, p.known_solution().expect("known solution"), &cfg).expect("replay runs")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn moreau_cones() -> Vec<Cone> {
    vec![
        Cone::Zero(3),
        Cone::Nonpos(4),
        Cone::Lorentz(3),
        Cone::Psd(3),
        Cone::Product(vec![Cone::Zero(1), Cone::Nonpos(2), Cone::Lorentz(3)]),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, cone) in moreau_cones().iter().enumerate() {
        let r = cone_battery(cone, 1000, 100 + i as u64).unwrap();
        let ok = r.recon_residual == 0.0 && r.orth_residual <= CONE_TOL && r.characterization_residual <= CONE_TOL;
        pass &= ok;
        parts.push(format!(
            "{}: recon {:e} orth {:.1e} char {:.1e}",
            r.cone, r.recon_residual, r.orth_residual, r.characterization_residual
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 5.0;
    outcome(pass, format!("{}; {secs:.2}s", parts.join("; ")))
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, cone) in moreau_cones().iter().enumerate() {
        let r = cone_battery(cone, 200, 200 + i as u64).unwrap();
        pass &= r.gradient_rel_error <= GRAD_TOL;
        parts.push(format!("{}: {:.1e} ({} near boundary)", r.cone, r.gradient_rel_error, r.boundary_points));
    }
    outcome(pass, format!("max relative error {}", parts.join("; ")))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let args = ReplayArgs {
        file: problem_path("eq-circle"),
        xbar: None,
        delta: Some(0.5),
        penalty: PenaltyArgs::default(),
    };
    let r = cmd_replay(&args, &GlobalArgs::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let s = r.replay.as_ref().unwrap();
    let lambda_err = (r.lambda.as_ref().unwrap()[0] - 0.5).abs();
    let k_max = *s.penalty_weights.last().unwrap();
    let pass = lambda_err <= 1e-3
        && s.x_error <= 1e-3
        && s.max_phi_excess <= 1e-6
        && k_max == 1e6
        && s.penalty_weights.len() == 7
        && secs < 2.0;
    outcome(
        pass,
        format!(
            "|lambda-0.5| {lambda_err:.1e}, |x-xbar| {:.1e}, max phi_k-f(xbar) {:.1e}, k up to {k_max:e}, {secs:.2}s",
            s.x_error, s.max_phi_excess
        ),
    )
}

fn criterion_4() -> Outcome {
    let ineq = replay_registry("ineq-bound");
    let ineq_err = (ineq.last().lambda[0] - 1.0).abs();
    let ineq_nonneg = ineq.records.iter().all(|r| r.lambda[0] >= 0.0);

    let soc = replay_registry("soc-min");
    let soc_err = dist(&soc.last().lambda, &[-1.0, 0.0]);
    let soc_dual = soc.records.iter().map(|r| r.dual_feasibility).fold(0.0, f64::max);

    let psd = replay_registry("psd-min");
    let psd_err = dist(&psd.last().lambda, &[-1.0, 0.0, 0.0]);

    let pass = ineq_err <= 1e-3 && ineq_nonneg && soc_err <= 1e-3 && soc_dual <= 1e-8 && psd_err <= 1e-3;
    outcome(
        pass,
        format!(
            "ineq-bound err {ineq_err:.1e} (all lambda >= 0: {ineq_nonneg}); soc-min err {soc_err:.1e}, max dist(lambda,K°) {soc_dual:.1e}; psd-min err {psd_err:.1e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let out = replay_registry("licq-fail");
    let norms = out.multiplier_norms();
    let per_decade: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0]).collect();
    let growth_ok = per_decade.iter().all(|&r| r >= 10.0);
    let three_decades: Vec<f64> = norms.windows(4).map(|w| w[3] / w[0]).collect();

    let status = Command::new(env!("CARGO_BIN_EXE_conmult"))
        .args(["solve", "--json"])
        .arg(problem_path("licq-fail"))
        .output()
        .unwrap()
        .status
        .code();

    let (_, p) = load("licq-fail");
    let licq = licq_check(&p, &[0.0], DEFAULT_RANK_TOL).unwrap();
    let conic = conic_regularity_check(&p, &[0.0], &ConicCheckOptions::default()).unwrap();

    let pass = growth_ok && status == Some(3) && !licq.verdict && !conic.verdict;
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(",");
    outcome(
        pass,
        format!(
            "per-decade growth [{}]; growth over 3 decades [{}]; solve exit {:?}; licq fail {}; conic fail {}",
            fmt(&per_decade),
            fmt(&three_decades),
            status,
            !licq.verdict,
            !conic.verdict
        ),
    )
}

fn criterion_6() -> Outcome {
    let global = GlobalArgs {
        tol: Some(1e-6),
        ..GlobalArgs::default()
    };
    let mut pass = true;
    let mut notes = Vec::new();
    for name in REGISTRY {
        let (file, _) = load(name);
        let (Some(x), Some(lambda)) = (file.known_solution.clone(), file.known_multiplier.clone()) else {
            notes.push(format!("{name}: no multiplier exists, skipped"));
            continue;
        };
        let check = |l: Vec<f64>| {
            cmd_check(
                &CheckArgs {
                    file: problem_path(name),
                    x: Point(x.clone()),
                    lambda: Point(l),
                },
                &global,
            )
            .unwrap()
        };
        let at_solution = check(lambda.clone());
        if !at_solution.kkt.pass {
            pass = false;
            notes.push(format!("{name}: known pair fails ({:.1e})", at_solution.kkt.max_residual()));
        }
        for i in 0..lambda.len() {
            let mut l = lambda.clone();
            l[i] += 0.1;
            let r = check(l).kkt.max_residual();
            if !(r > 1e-2) {
                pass = false;
                notes.push(format!("{name}: lambda[{i}]+0.1 gives max residual only {r:.2e}"));
            }
        }
    }
    if pass {
        notes.insert(0, "all known pairs pass, all perturbations exceed 1e-2".into());
    }
    outcome(pass, notes.join("; "))
}

fn criterion_7() -> Outcome {
    let r = grad_battery(1000, 7);
    outcome(
        r.pass && r.samples == 1000,
        format!("{} pairs, max relative error {:.1e}, {} above 1e-5", r.samples, r.max_rel_error, r.failures),
    )
}

fn criterion_8() -> Outcome {
    let solve_file = |name: &str| {
        cmd_solve(
            &SolveArgs {
                file: problem_path(name),
                x0: None,
                penalty: PenaltyArgs::default(),
            },
            &GlobalArgs::default(),
        )
        .unwrap()
    };
    let mixed = solve_file("mixed");
    let slack = solve_file("mixed-slack");
    let lambda = mixed.lambda.as_ref().unwrap();
    let x = mixed.x.as_ref().unwrap();
    let xs = slack.x.as_ref().unwrap();
    let gap = dist(x, &xs[..2]);
    let pass = mixed.status == RunStatus::Ok
        && mixed.kkt.as_ref().unwrap().pass
        && lambda[1] >= 0.0
        && slack.status == RunStatus::Ok
        && gap <= 1e-4;
    outcome(
        pass,
        format!(
            "mixed x {x:?} lambda {lambda:?} status {:?}; slack form x {:?}; primal gap {gap:.1e}; |lambda| {:.3}",
            mixed.status,
            &xs[..2],
            norm(lambda)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "Moreau decomposition battery", criterion_1),
        (2, "penalty gradient vs finite differences", criterion_2),
        (3, "replay convergence on eq-circle", criterion_3),
        (4, "conic replay: ineq-bound, soc-min, psd-min", criterion_4),
        (5, "regularity-failure detection on licq-fail", criterion_5),
        (6, "KKT oracle equivalence on the registry", criterion_6),
        (7, "dual-number gradients vs finite differences", criterion_7),
        (8, "KKT specialization on mixed and its slack form", criterion_8),
    ];

    let mut unexpected = 0;
    for (id, title, run) in criteria {
        let o = run();
        let known = UNATTAINABLE.iter().find(|(c, _)| *c == id);
        println!("criterion {id} {}: {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("    known unattainable: {why}"),
            (false, None) => unexpected += 1,
            _ => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
