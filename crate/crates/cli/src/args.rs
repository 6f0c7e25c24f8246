//! Flag parsing for the tanp binary.
//!
//! Flags follow "--name value". A value containing a colon is a range
//! (start:stop:step, or start:stop with step 1) and turns that flag into a
//! grid axis; a plain number holds the flag fixed. Ranged flags become axes
//! in a fixed canonical order so the output layout never depends on flag
//! order. Unknown flags are hard errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use tanp::sweep::{AxisSpec, Quantity, SweepSpec, AXIS_NAMES};

/// What the binary should do, fully validated.
#[derive(Debug, PartialEq)]
pub enum Action {
    /// Run a grid sweep and emit its CSV.
    Sweep(SweepSpec),
    /// Per-order optimum search; CSV columns n, gt_star, pe_star, bound.
    Asymptotic(SweepSpec),
    /// Compare the absorbed-vacuum potential against its closed form.
    ClosedFormCheck,
    /// Run the invariant battery of every module.
    Selftest,
}

/// A parsed invocation.
#[derive(Debug, PartialEq)]
pub struct RunConfig {
    pub action: Action,
    pub output_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
    pub workers: usize,
    pub seed: u64,
}

/// Either something to execute or help text to print.
#[derive(Debug, PartialEq)]
pub enum ParseOutcome {
    Config(RunConfig),
    Help(String),
}

struct ParamDef {
    name: &'static str,
    default: &'static str,
    rangeable: bool,
    help: &'static str,
}

struct SubcommandDef {
    name: &'static str,
    summary: &'static str,
    quantity: Option<Quantity>,
    params: &'static [ParamDef],
    takes_out: bool,
    takes_svg: bool,
    takes_workers: bool,
    takes_seed: bool,
}

const NBAR_HELP: &str = "mean occupation of the input thermal field";
const GT_HELP: &str = "pulse area of the absorption interaction";
const PE_HELP: &str = "excitation probability of the two-level absorber";

const SUBCOMMANDS: &[SubcommandDef] = &[
    SubcommandDef {
        name: "lnp-sweep",
        summary: "entanglement potential of absorbed thermal light over a grid",
        quantity: Some(Quantity::Lnp),
        params: &[
            ParamDef { name: "nbar", default: "0:5:0.1", rangeable: true, help: NBAR_HELP },
            ParamDef { name: "gt", default: "0:10:0.05", rangeable: true, help: GT_HELP },
            ParamDef { name: "pe", default: "0", rangeable: true, help: PE_HELP },
        ],
        takes_out: true,
        takes_svg: true,
        takes_workers: true,
        takes_seed: false,
    },
    SubcommandDef {
        name: "filter-sweep",
        summary: "potential after projecting both split modes below a cutoff",
        quantity: Some(Quantity::LnpFiltered),
        params: &[
            ParamDef { name: "nbar", default: "0:5:0.1", rangeable: true, help: NBAR_HELP },
            ParamDef { name: "gt", default: "4.442882938158366", rangeable: true, help: GT_HELP },
            ParamDef { name: "pe", default: "0", rangeable: true, help: PE_HELP },
            ParamDef {
                name: "D_f",
                default: "0:10:1",
                rangeable: true,
                help: "highest Fock level kept by the filter",
            },
        ],
        takes_out: true,
        takes_svg: true,
        takes_workers: true,
        takes_seed: false,
    },
    SubcommandDef {
        name: "repeat-sweep",
        summary: "potential after M ground-state absorption passes",
        quantity: Some(Quantity::LnpRepeat),
        params: &[
            ParamDef { name: "nbar", default: "0:5:0.1", rangeable: true, help: NBAR_HELP },
            ParamDef { name: "gt", default: "3.141592653589793", rangeable: true, help: GT_HELP },
            ParamDef {
                name: "M",
                default: "1:10:1",
                rangeable: true,
                help: "number of absorption passes",
            },
        ],
        takes_out: true,
        takes_svg: true,
        takes_workers: true,
        takes_seed: false,
    },
    SubcommandDef {
        name: "klyshko-scan",
        summary: "first violated witness order over an occupation/pulse-area grid",
        quantity: Some(Quantity::KlyshkoMinOrder),
        params: &[
            ParamDef { name: "nbar", default: "0.1:5:0.1", rangeable: true, help: NBAR_HELP },
            ParamDef { name: "gt", default: "2:10:0.1", rangeable: true, help: GT_HELP },
            ParamDef { name: "pe", default: "0", rangeable: true, help: PE_HELP },
            ParamDef {
                name: "order",
                default: "3",
                rangeable: true,
                help: "highest witness order evaluated",
            },
        ],
        takes_out: true,
        takes_svg: true,
        takes_workers: true,
        takes_seed: false,
    },
    SubcommandDef {
        name: "robust-scan",
        summary: "first witness order surviving worst-case measurement noise",
        quantity: Some(Quantity::KlyshkoRobustMinOrder),
        params: &[
            ParamDef { name: "nbar", default: "0.1:5:0.1", rangeable: true, help: NBAR_HELP },
            ParamDef { name: "gt", default: "2:10:0.1", rangeable: true, help: GT_HELP },
            ParamDef {
                name: "sigma",
                default: "0.01",
                rangeable: true,
                help: "one-sigma error on every measured population",
            },
            ParamDef {
                name: "order",
                default: "3",
                rangeable: true,
                help: "highest witness order evaluated",
            },
            ParamDef {
                name: "populations",
                default: "5",
                rangeable: false,
                help: "how many lowest populations the experiment measures",
            },
        ],
        takes_out: true,
        takes_svg: true,
        takes_workers: true,
        takes_seed: false,
    },
    SubcommandDef {
        name: "asymptotic",
        summary: "largest detectable excitation probability per witness order",
        quantity: Some(Quantity::AsymptoticPeStar),
        params: &[ParamDef {
            name: "n",
            default: "1:30",
            rangeable: true,
            help: "witness orders to search",
        }],
        takes_out: true,
        takes_svg: false,
        takes_workers: true,
        takes_seed: false,
    },
    SubcommandDef {
        name: "closed-form-check",
        summary: "verify the absorbed-vacuum potential against its closed form",
        quantity: None,
        params: &[],
        takes_out: false,
        takes_svg: false,
        takes_workers: false,
        takes_seed: false,
    },
    SubcommandDef {
        name: "selftest",
        summary: "run the invariant battery of every module",
        quantity: None,
        params: &[],
        takes_out: false,
        takes_svg: false,
        takes_workers: false,
        takes_seed: true,
    },
];

fn find_subcommand(name: &str) -> Option<&'static SubcommandDef> {
    SUBCOMMANDS.iter().find(|s| s.name == name)
}

fn parse_finite(flag: &str, text: &str) -> Result<f64, String> {
    let value: f64 = text
        .parse()
        .map_err(|_| format!("--{flag}: {text} is not a number"))?;
    if !value.is_finite() {
        return Err(format!("--{flag}: {text} is not finite"));
    }
    Ok(value)
}

fn parse_range(flag: &str, text: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop] => Ok((parse_finite(flag, start)?, parse_finite(flag, stop)?, 1.0)),
        [start, stop, step] => Ok((
            parse_finite(flag, start)?,
            parse_finite(flag, stop)?,
            parse_finite(flag, step)?,
        )),
        _ => Err(format!("--{flag}: ranges are start:stop or start:stop:step, got {text}")),
    }
}

fn global_help() -> String {
    let mut text = String::from(
        "usage: tanp <subcommand> [flags]\n\nturns thermal light nonclassical by resonant \
         absorption and quantifies the result\n\nsubcommands:\n",
    );
    for sub in SUBCOMMANDS {
        text.push_str(&format!("  {:<18} {}\n", sub.name, sub.summary));
    }
    text.push_str("\nrun tanp <subcommand> --help for flags and defaults");
    text
}

fn subcommand_help(sub: &SubcommandDef) -> String {
    let mut text = format!("usage: tanp {} [flags]\n\n{}\n\nflags:\n", sub.name, sub.summary);
    for p in sub.params {
        text.push_str(&format!("  --{:<12} {:<55} default {}\n", p.name, p.help, p.default));
    }
    if sub.takes_out {
        text.push_str("  --out          CSV destination (stdout when omitted)\n");
    }
    if sub.takes_svg {
        text.push_str("  --svg          monochrome heatmap destination, two-axis grids only\n");
    }
    if sub.takes_workers {
        text.push_str(
            "  --workers      worker threads; default TANP_WORKERS, else all cores\n",
        );
    }
    if sub.takes_seed {
        text.push_str("  --seed         seed for the randomized checks, default 0\n");
    }
    if sub.params.iter().any(|p| p.rangeable) {
        text.push_str(
            "\nranges: start:stop:step, or start:stop with step 1; a plain number holds the \
             flag fixed.\nranged flags become grid axes in the order nbar, gt, pe, D_f, M, \
             order, sigma;\nthe last axis varies fastest in the CSV",
        );
    }
    text
}

/// Parses argv (without the program name). `env_workers` is the value of
/// the TANP_WORKERS environment variable, if set.
pub fn parse_args(argv: &[String], env_workers: Option<&str>) -> Result<ParseOutcome, String> {
    let Some(first) = argv.first() else {
        return Err("missing subcommand".into());
    };
    if first == "--help" || first == "-h" || first == "help" {
        return Ok(ParseOutcome::Help(global_help()));
    }
    let sub = find_subcommand(first)
        .ok_or_else(|| format!("unknown subcommand {first}"))?;
    if argv[1..].iter().any(|a| a == "--help" || a == "-h") {
        return Ok(ParseOutcome::Help(subcommand_help(sub)));
    }

    let mut given: BTreeMap<String, String> = BTreeMap::new();
    let mut rest = &argv[1..];
    while let Some(flag) = rest.first() {
        let Some(name) = flag.strip_prefix("--") else {
            return Err(format!("expected a --flag, got {flag}"));
        };
        let Some(value) = rest.get(1) else {
            return Err(format!("--{name} needs a value"));
        };
        let known = sub.params.iter().any(|p| p.name == name)
            || (sub.takes_out && name == "out")
            || (sub.takes_svg && name == "svg")
            || (sub.takes_workers && name == "workers")
            || (sub.takes_seed && name == "seed");
        if !known {
            return Err(format!("{} does not take --{name}", sub.name));
        }
        if given.insert(name.into(), value.clone()).is_some() {
            return Err(format!("--{name} given twice"));
        }
        rest = &rest[2..];
    }

    let output_path = given.remove("out").map(PathBuf::from);
    let svg_path = given.remove("svg").map(PathBuf::from);
    let seed = match given.remove("seed") {
        Some(text) => text
            .parse::<u64>()
            .map_err(|_| format!("--seed: {text} is not an unsigned integer"))?,
        None => 0,
    };
    let workers = match given.remove("workers").as_deref().or(env_workers) {
        Some(text) => {
            let n: usize = text.parse().map_err(|_| {
                format!("worker count {text} is not a positive integer (--workers or TANP_WORKERS)")
            })?;
            if n == 0 {
                return Err("worker count must be positive".into());
            }
            n
        }
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };

    let action = match sub.name {
        "closed-form-check" => Action::ClosedFormCheck,
        "selftest" => Action::Selftest,
        _ => {
            let quantity = sub.quantity.expect("sweep subcommands carry a quantity");
            let mut axes = Vec::new();
            let mut fixed = BTreeMap::new();
            // canonical axis order, independent of flag order on the line
            for name in AXIS_NAMES {
                let Some(p) = sub.params.iter().find(|p| {
                    p.name == name || (p.name == "n" && name == "order")
                }) else {
                    continue;
                };
                let text = given.remove(p.name).unwrap_or_else(|| p.default.into());
                // the order search always sweeps, even over one point
                if text.contains(':') || p.name == "n" {
                    if !p.rangeable {
                        return Err(format!("--{} cannot be a range", p.name));
                    }
                    let (start, stop, step) = if text.contains(':') {
                        parse_range(p.name, &text)?
                    } else {
                        let v = parse_finite(p.name, &text)?;
                        (v, v, 1.0)
                    };
                    let axis = AxisSpec::new(name, start, stop, step)
                        .map_err(|e| format!("--{}: {e}", p.name))?;
                    axes.push(axis);
                } else {
                    fixed.insert(name.to_string(), parse_finite(p.name, &text)?);
                }
            }
            // parameters outside the axis set stay fixed by definition
            for p in sub.params.iter().filter(|p| !p.rangeable) {
                if let Some(text) = given.remove(p.name) {
                    if text.contains(':') {
                        return Err(format!("--{} cannot be a range", p.name));
                    }
                    fixed.insert(p.name.to_string(), parse_finite(p.name, &text)?);
                } else if !fixed.contains_key(p.name) && !AXIS_NAMES.contains(&p.name) {
                    fixed.insert(p.name.to_string(), parse_finite(p.name, p.default)?);
                }
            }
            let spec = SweepSpec { axes, fixed, quantity };
            spec.validate().map_err(|e| e.to_string())?;
            if svg_path.is_some() && spec.axes.len() != 2 {
                return Err(format!(
                    "--svg needs exactly two ranged flags, this grid has {}",
                    spec.axes.len()
                ));
            }
            if sub.name == "asymptotic" {
                Action::Asymptotic(spec)
            } else {
                Action::Sweep(spec)
            }
        }
    };
    if !given.is_empty() {
        let stray: Vec<&str> = given.keys().map(String::as_str).collect();
        return Err(format!("unused flags: {}", stray.join(", ")));
    }
    Ok(ParseOutcome::Config(RunConfig { action, output_path, svg_path, workers, seed }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn config(list: &[&str]) -> RunConfig {
        match parse_args(&args(list), None).unwrap() {
            ParseOutcome::Config(c) => c,
            ParseOutcome::Help(_) => panic!("unexpected help"),
        }
    }

    fn sweep_spec(config: &RunConfig) -> &SweepSpec {
        match &config.action {
            Action::Sweep(s) | Action::Asymptotic(s) => s,
            other => panic!("not a sweep: {other:?}"),
        }
    }

    #[test]
    fn surface_invocation_maps_to_axes_and_fixed() {
        let c = config(&[
            "lnp-sweep", "--pe", "0", "--nbar", "0:5:0.1", "--gt", "0:10:0.05", "--out",
            "fig2a.csv",
        ]);
        let s = sweep_spec(&c);
        assert_eq!(s.quantity, Quantity::Lnp);
        assert_eq!(s.axes.len(), 2);
        assert_eq!(s.axes[0], AxisSpec::new("nbar", 0.0, 5.0, 0.1).unwrap());
        assert_eq!(s.axes[1], AxisSpec::new("gt", 0.0, 10.0, 0.05).unwrap());
        assert_eq!(s.fixed.get("pe"), Some(&0.0));
        assert_eq!(c.output_path, Some(PathBuf::from("fig2a.csv")));
        assert_eq!(s.cell_count(), 51 * 201);
    }

    #[test]
    fn robust_invocation_fills_defaults() {
        let c = config(&["robust-scan", "--sigma", "0.01", "--populations", "5", "--out", "f.csv"]);
        let s = sweep_spec(&c);
        assert_eq!(s.quantity, Quantity::KlyshkoRobustMinOrder);
        assert_eq!(s.axes[0].name, "nbar");
        assert_eq!(s.axes[1].name, "gt");
        assert_eq!(s.fixed.get("sigma"), Some(&0.01));
        assert_eq!(s.fixed.get("order"), Some(&3.0));
        assert_eq!(s.fixed.get("populations"), Some(&5.0));
    }

    #[test]
    fn backwards_range_is_a_usage_error() {
        let err = parse_args(&args(&["lnp-sweep", "--gt", "5:0:0.1"]), None).unwrap_err();
        assert!(err.contains("gt"), "unhelpful message: {err}");
    }

    #[test]
    fn axis_order_is_canonical_not_positional() {
        let c = config(&["lnp-sweep", "--gt", "0:1:0.5", "--nbar", "0:1:0.5", "--pe", "0.1"]);
        let s = sweep_spec(&c);
        assert_eq!(s.axes[0].name, "nbar");
        assert_eq!(s.axes[1].name, "gt");
    }

    #[test]
    fn two_part_ranges_step_by_one() {
        let c = config(&["repeat-sweep", "--M", "1:4", "--nbar", "1", "--gt", "3.1"]);
        let s = sweep_spec(&c);
        assert_eq!(s.axes, vec![AxisSpec::new("M", 1.0, 4.0, 1.0).unwrap()]);
        assert_eq!(s.fixed.get("nbar"), Some(&1.0));
    }

    #[test]
    fn bad_flags_are_hard_errors() {
        assert!(parse_args(&args(&["lnp-sweep", "--frequency", "2"]), None).is_err());
        assert!(parse_args(&args(&["lnp-sweep", "--pe"]), None).is_err());
        assert!(parse_args(&args(&["lnp-sweep", "--pe", "0", "--pe", "0.1"]), None).is_err());
        assert!(parse_args(&args(&["spectrum"]), None).is_err());
        assert!(parse_args(&args(&[]), None).is_err());
        assert!(parse_args(&args(&["closed-form-check", "--out", "x.csv"]), None).is_err());
        assert!(parse_args(&args(&["robust-scan", "--populations", "4:6"]), None).is_err());
        assert!(parse_args(&args(&["lnp-sweep", "--pe", "0.5.1"]), None).is_err());
    }

    #[test]
    fn workers_come_from_flag_then_environment() {
        let c = config(&["lnp-sweep", "--nbar", "0:1:1", "--workers", "3"]);
        assert_eq!(c.workers, 3);
        let c = match parse_args(&args(&["lnp-sweep", "--nbar", "0:1:1"]), Some("7")).unwrap() {
            ParseOutcome::Config(c) => c,
            _ => panic!(),
        };
        assert_eq!(c.workers, 7);
        let flag_wins =
            match parse_args(&args(&["lnp-sweep", "--workers", "2"]), Some("7")).unwrap() {
                ParseOutcome::Config(c) => c,
                _ => panic!(),
            };
        assert_eq!(flag_wins.workers, 2);
        assert!(parse_args(&args(&["lnp-sweep"]), Some("zero")).is_err());
        assert!(parse_args(&args(&["lnp-sweep", "--workers", "0"]), None).is_err());
    }

    #[test]
    fn order_search_always_gets_an_axis() {
        let c = config(&["asymptotic", "--n", "1:30"]);
        let s = sweep_spec(&c);
        assert_eq!(s.quantity, Quantity::AsymptoticPeStar);
        assert_eq!(s.axes, vec![AxisSpec::new("order", 1.0, 30.0, 1.0).unwrap()]);
        let single = config(&["asymptotic", "--n", "5"]);
        assert_eq!(
            sweep_spec(&single).axes,
            vec![AxisSpec::new("order", 5.0, 5.0, 1.0).unwrap()]
        );
    }

    #[test]
    fn selftest_takes_a_seed() {
        let c = config(&["selftest", "--seed", "99"]);
        assert_eq!(c.action, Action::Selftest);
        assert_eq!(c.seed, 99);
        assert_eq!(config(&["selftest"]).seed, 0);
        assert!(parse_args(&args(&["selftest", "--seed", "-1"]), None).is_err());
    }

    #[test]
    fn help_lists_defaults_without_running() {
        let ParseOutcome::Help(text) = parse_args(&args(&["lnp-sweep", "--help"]), None).unwrap()
        else {
            panic!("expected help");
        };
        assert!(text.contains("--nbar"));
        assert!(text.contains("default 0:5:0.1"));
        assert!(text.contains("start:stop:step"));
        let ParseOutcome::Help(global) = parse_args(&args(&["--help"]), None).unwrap() else {
            panic!("expected help");
        };
        for sub in ["lnp-sweep", "robust-scan", "selftest", "closed-form-check"] {
            assert!(global.contains(sub), "missing {sub}");
        }
    }

    #[test]
    fn svg_needs_a_two_axis_grid() {
        assert!(parse_args(
            &args(&["lnp-sweep", "--nbar", "0:1:1", "--gt", "1", "--svg", "x.svg"]),
            None
        )
        .is_err());
        let c = config(&["lnp-sweep", "--nbar", "0:1:1", "--gt", "0:1:1", "--svg", "x.svg"]);
        assert_eq!(c.svg_path, Some(PathBuf::from("x.svg")));
    }

    #[test]
    fn filter_default_pulse_area_is_the_second_resonance() {
        let c = config(&["filter-sweep"]);
        let s = sweep_spec(&c);
        assert_eq!(s.fixed.get("gt"), Some(&(std::f64::consts::PI * 2f64.sqrt())));
        assert_eq!(s.axes[0].name, "nbar");
        assert_eq!(s.axes[1].name, "D_f");
    }
}
