//! Parsing and running a scenario file programmatically, as the
//! `exactme run` command does.

use exactme::cli::{parse_scenario, run, RunOptions, TaskStatus};

const SCENARIO: &str = "\
[system]
statistics = fermion
energy = 1
initial = fock 1

[reservoir lead]
spectral = flat
kappa = 0.2
lower = -5
upper = 5
temperature = 0.5
chemical_potential = 0

[grid]
t_max = 20
dt = 0.01

[tasks]
run = u, occupation, coefficients, rho, bound_states
";

fn main() {
    let scenario = match parse_scenario(SCENARIO) {
        Ok(s) => s,
        Err(diagnostics) => {
            for d in diagnostics {
                eprintln!("{d}");
            }
            std::process::exit(2);
        }
    };
    let out = std::env::temp_dir().join("exactme-scenario-example");
    let report = run(&scenario, &RunOptions { out_dir: Some(out), threads: Some(2), strict: false });
    for task in &report.tasks {
        let status = if task.status == TaskStatus::Ok { "ok" } else { "failed" };
        println!("{:<14} {status:<6} {}", task.task, task.file.as_deref().unwrap_or("-"));
    }
    println!("report in {} (exit code {})", report.output_directory, report.exit_code);
}
