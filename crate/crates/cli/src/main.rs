//! Command-line front end for the thermal-light nonclassicality toolkit.
//!
//! Exit statuses: 0 success, 1 usage error, 2 computation or check
//! failure, 3 I/O error.

mod args;
mod svg;

use std::io::Write;
use std::path::Path;

use tanp::entanglement::{lnp, lnp_ground_closed_form};
use tanp::fock::DensityMatrix;
use tanp::jc::apply;
use tanp::selftest::run_selftest;
use tanp::sweep::{format_real, run_sweep, write_csv, AuxValue, SweepRecord, SweepSpec};

use args::{parse_args, Action, ParseOutcome, RunConfig};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_CHECK: i32 = 2;
const EXIT_IO: i32 = 3;

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let env_workers = std::env::var("TANP_WORKERS").ok();
    std::process::exit(cli_main(&argv, env_workers.as_deref()));
}

fn cli_main(argv: &[String], env_workers: Option<&str>) -> i32 {
    match parse_args(argv, env_workers) {
        Ok(ParseOutcome::Help(text)) => {
            println!("{text}");
            EXIT_OK
        }
        Ok(ParseOutcome::Config(config)) => run(config),
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!("run tanp --help for usage");
            EXIT_USAGE
        }
    }
}

fn run(config: RunConfig) -> i32 {
    match &config.action {
        Action::Selftest => selftest(config.seed),
        Action::ClosedFormCheck => closed_form_check(),
        Action::Sweep(spec) => sweep(spec, &config, false),
        Action::Asymptotic(spec) => sweep(spec, &config, true),
    }
}

fn selftest(seed: u64) -> i32 {
    let report = run_selftest(seed);
    for result in &report.results {
        if result.passed {
            println!("ok   {}::{}", result.module, result.name);
        } else {
            eprintln!("FAIL {}::{}: {}", result.module, result.name, result.detail);
        }
    }
    println!("{} passed, {} failed", report.passed(), report.failed());
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECK
    }
}

/// Grid agreement between the pipeline and the absorbed-vacuum closed form.
fn closed_form_check() -> i32 {
    let pi = std::f64::consts::PI;
    let vacuum = match DensityMatrix::fock_state(0, 2) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK;
        }
    };
    let mut worst = 0.0f64;
    for i in 0..20 {
        let pe = 0.5 * i as f64 / 19.0;
        for j in 0..20 {
            let gt = pi * j as f64 / 19.0;
            let pair = apply(&vacuum, pe, gt)
                .and_then(|out| lnp(&out))
                .and_then(|got| lnp_ground_closed_form(pe, gt).map(|want| (got, want)));
            match pair {
                Ok((got, want)) => worst = worst.max((got - want).abs()),
                Err(e) => {
                    eprintln!("error: pe {pe}, gt {gt}: {e}");
                    return EXIT_CHECK;
                }
            }
        }
    }
    println!("maximum deviation {} over a 20 x 20 grid", format_real(worst));
    if worst <= 1e-8 {
        EXIT_OK
    } else {
        eprintln!("error: deviation above the 1e-8 agreement threshold");
        EXIT_CHECK
    }
}

fn sweep(spec: &SweepSpec, config: &RunConfig, order_search: bool) -> i32 {
    let records = match run_sweep(spec, config.workers) {
        Ok(records) => records,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK;
        }
    };
    let bytes = if order_search {
        order_search_csv(&records).into_bytes()
    } else {
        let mut bytes = Vec::new();
        if let Err(e) = write_csv(&records, &mut bytes) {
            eprintln!("error: {e}");
            return EXIT_CHECK;
        }
        bytes
    };
    if let Err(code) = deliver(&bytes, config.output_path.as_deref()) {
        return code;
    }
    if let Some(path) = &config.svg_path {
        // parse_args only passes two-axis grids through
        let image = svg::render_heatmap(&records, &spec.axes[0], &spec.axes[1]);
        if let Err(e) = std::fs::write(path, image) {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_IO;
        }
    }
    let failed = records.iter().filter(|r| r.aux.contains_key("error")).count();
    if failed > 0 {
        eprintln!("error: {failed} of {} cells failed; see the error column", records.len());
        return EXIT_CHECK;
    }
    EXIT_OK
}

fn deliver(bytes: &[u8], path: Option<&Path>) -> Result<(), i32> {
    let outcome = match path {
        Some(path) => std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(bytes).map_err(|e| e.to_string()),
    };
    outcome.map_err(|message| {
        eprintln!("error: {message}");
        EXIT_IO
    })
}

/// The per-order search table with its documented column names.
fn order_search_csv(records: &[SweepRecord]) -> String {
    let mut text = String::from("n,gt_star,pe_star,bound\n");
    for record in records {
        let aux_real = |key: &str| match record.aux.get(key) {
            Some(AuxValue::Real(v)) => format_real(*v),
            _ => String::new(),
        };
        text.push_str(&format!(
            "{},{},{},{}\n",
            format_real(record.coordinates[0].1),
            aux_real("gt_star"),
            record.value.map(format_real).unwrap_or_default(),
            aux_real("bound"),
        ));
    }
    text
}
