use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use conic_multipliers_cli::{
    cmd_check, cmd_cone_test, cmd_grad_test, cmd_replay, cmd_solve, Cli, CliError, Command, RunResult,
};
use serde::Serialize;

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    // a closed pipe (e.g. `| head`) is not an error worth a panic
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn fail(err: CliError, json: bool) -> ExitCode {
    if json {
        print_json(&RunResult::error(&err));
    } else {
        eprintln!("error: {err}");
    }
    ExitCode::from(1)
}

fn summarize_run(r: &RunResult) {
    eprintln!("status: {:?}", r.status);
    if let (Some(x), Some(l)) = (&r.x, &r.lambda) {
        eprintln!("x = {x:?}");
        eprintln!("lambda = {l:?}");
    }
    if let Some(k) = &r.kkt {
        eprintln!(
            "kkt: stationarity {:e}, feasibility {:e}, complementarity {:e}, dual feasibility {:e}",
            k.stationarity, k.feasibility, k.complementarity, k.dual_feasibility
        );
    }
    if let Some(m) = &r.message {
        eprintln!("{m}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let g = &cli.global;

    let code = match &cli.command {
        Command::Solve(args) => match cmd_solve(args, g) {
            Ok(r) => {
                print_json(&r);
                if !g.json {
                    summarize_run(&r);
                }
                r.exit_code()
            }
            Err(e) => return fail(e, g.json),
        },
        Command::Replay(args) => match cmd_replay(args, g) {
            Ok(r) => {
                print_json(&r);
                if !g.json {
                    summarize_run(&r);
                    if let Some(s) = &r.replay {
                        eprintln!("multiplier norms by k: {:?}", s.multiplier_norms);
                    }
                }
                r.exit_code()
            }
            Err(e) => return fail(e, g.json),
        },
        Command::Check(args) => match cmd_check(args, g) {
            Ok(r) => {
                print_json(&r);
                if !g.json {
                    eprintln!("kkt {}", if r.kkt.pass { "pass" } else { "fail" });
                    if r.conic.heuristic {
                        eprintln!("note: the conic regularity verdict is heuristic (multistart search)");
                    }
                }
                r.exit_code()
            }
            Err(e) => return fail(e, g.json),
        },
        Command::ConeTest(args) => match cmd_cone_test(args, g) {
            Ok(r) => {
                print_json(&r);
                if r.pass {
                    0
                } else {
                    2
                }
            }
            Err(e) => return fail(e, g.json),
        },
        Command::GradTest(args) => match cmd_grad_test(args, g) {
            Ok(r) => {
                print_json(&r);
                if r.pass {
                    0
                } else {
                    2
                }
            }
            Err(e) => return fail(e, g.json),
        },
    };
    ExitCode::from(code as u8)
}
