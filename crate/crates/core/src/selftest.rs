//! Runtime invariant battery behind the selftest subcommand.
//!
//! Re-checks each module's load-bearing properties on freshly drawn random
//! inputs, so a rebuilt or cross-compiled binary can vouch for itself
//! without the test harness. Every check returns a short failure detail
//! instead of panicking.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{asymptotic_criterion, big_f, pe_bound, search_max_pe};
use crate::entanglement::{filter_project, lnp, lnp_ground_closed_form, split_state};
use crate::fock::{
    equilibrium_pe, poisson_distribution, required_dim, thermal_state, DensityMatrix,
    NumberDistribution,
};
use crate::ion::{robust_region_scan, worst_case_klyshko, MeasurementModel};
use crate::jc::{apply, output_number_stats, repeated_absorption, KrausSet};
use crate::klyshko::{detect, is_violation, klyshko_value, ratio_check, region_scan};
use crate::sweep::{format_real, run_sweep, sweep_to_csv, AxisSpec, Quantity, SweepSpec};

/// Outcome of one invariant check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// All check outcomes from one battery run.
#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub results: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.results.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

type Check = (&'static str, &'static str, fn(&mut ChaCha8Rng) -> Result<(), String>);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn lib<T>(r: crate::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_diagonal(rng: &mut ChaCha8Rng, dim: usize) -> Result<DensityMatrix<f64>, String> {
    let mut probs: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    lib(DensityMatrix::from_diagonal(&probs))
}

fn thermal_is_geometric(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..5 {
        let nbar: f64 = rng.gen_range(0.05..4.0);
        let dim = lib(required_dim(nbar, 1e-9))?;
        let rho = lib(thermal_state(nbar, dim))?;
        let p = lib(rho.number_distribution())?;
        let ratio = nbar / (1.0 + nbar);
        for n in 0..dim - 1 {
            let got = p.get(n + 1) / p.get(n);
            ensure!((got - ratio).abs() <= 1e-12, "ratio {got} at n {n}, nbar {nbar}");
        }
        ensure!(rho.leakage() <= 1e-9, "leakage {} above tail tolerance", rho.leakage());
    }
    Ok(())
}

fn poisson_is_normalized(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mean: f64 = rng.gen_range(0.5..5.0);
    let p = lib(poisson_distribution(mean, 60))?;
    let total: f64 = p.iter().sum();
    ensure!((total - 1.0).abs() <= 1e-9, "total {total}");
    let got: f64 = p.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
    ensure!((got - mean).abs() <= 1e-6, "mean {got} wanted {mean}");
    Ok(())
}

fn required_dim_is_monotone(_: &mut ChaCha8Rng) -> Result<(), String> {
    let mut last = 0;
    for k in 0..50 {
        let nbar = 0.1 * k as f64;
        let dim = lib(required_dim(nbar, 1e-9))?;
        ensure!(dim >= last, "dim dropped to {dim} at nbar {nbar}");
        last = dim;
    }
    let loose = lib(required_dim(1.0, 1e-6))?;
    let tight = lib(required_dim(1.0, 1e-12))?;
    ensure!(tight > loose, "tighter tail {tight} not above {loose}");
    Ok(())
}

fn equilibrium_matches_occupation(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..10 {
        let nbar: f64 = rng.gen_range(0.0..20.0);
        let pe = lib(equilibrium_pe(nbar))?;
        ensure!(
            (pe - nbar / (1.0 + 2.0 * nbar)).abs() <= 1e-15,
            "pe {pe} at nbar {nbar}"
        );
        ensure!((0.0..0.5).contains(&pe), "pe {pe} outside [0, 1/2)");
    }
    ensure!(equilibrium_pe(-0.1).is_err(), "negative occupation accepted");
    Ok(())
}

fn kraus_branches_are_complete(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..20 {
        let gt = rng.gen_range(0.0..10.0);
        let dim = rng.gen_range(3..30);
        let set = lib(KrausSet::<f64>::new(gt, dim))?;
        let g = set.ground_completeness_deviation();
        ensure!(g <= 1e-12, "ground branch off by {g} at gt {gt}, dim {dim}");
        let e = set.excited_completeness_deviation();
        ensure!(e <= 1e-12, "excited interior off by {e} at gt {gt}, dim {dim}");
    }
    Ok(())
}

fn absorption_preserves_trace(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..10 {
        let dim = rng.gen_range(2..12);
        let rho = random_diagonal(rng, dim)?;
        let pe = rng.gen_range(0.0..0.5);
        let gt = rng.gen_range(0.0..10.0);
        let out = lib(apply(&rho, pe, gt))?;
        ensure!(out.dim() == dim + 1, "workspace {} from {dim}", out.dim());
        let drift = (out.trace() - rho.trace()).abs();
        ensure!(drift <= 1e-12, "trace drift {drift}");
        ensure!(out.is_diagonal(1e-14), "diagonal input left the diagonal");
    }
    Ok(())
}

fn closed_form_matches_matrix_route(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..10 {
        let nbar: f64 = rng.gen_range(0.0..3.0);
        let pe = rng.gen_range(0.0..0.5);
        let gt = rng.gen_range(0.0..10.0);
        let dim = lib(required_dim(nbar, 1e-9))?;
        let fast = lib(output_number_stats(nbar, pe, gt, dim))?;
        let out = lib(apply(&lib(thermal_state(nbar, dim))?, pe, gt))?;
        let slow = lib(out.number_distribution())?;
        for n in 0..dim {
            let dev = (fast.get(n) - slow.get(n)).abs();
            ensure!(dev <= 1e-11, "stats deviate by {dev} at n {n}");
        }
    }
    Ok(())
}

fn equilibrium_is_a_fixed_point(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..5 {
        let nbar: f64 = rng.gen_range(0.2..2.5);
        let gt = rng.gen_range(0.0..8.0);
        let pe = lib(equilibrium_pe(nbar))?;
        let dim = lib(required_dim(nbar, 1e-13))?;
        let stats = lib(output_number_stats(nbar, pe, gt, dim))?;
        let input = lib(lib(thermal_state(nbar, dim))?.number_distribution())?;
        for n in 0..dim {
            let dev = (stats.get(n) - input.get(n)).abs();
            ensure!(dev <= 1e-9, "equilibrium moved by {dev} at n {n}");
        }
    }
    Ok(())
}

fn repeated_absorption_concentrates(_: &mut ChaCha8Rng) -> Result<(), String> {
    let pi = std::f64::consts::PI;
    let dim = lib(required_dim(3.0, 1e-9))?;
    let rho = lib(thermal_state(3.0, dim))?;
    let out = lib(repeated_absorption(&rho, pi, 30))?;
    let p = lib(out.number_distribution())?;
    // at gt = pi the square ladder n = k^2 is immune to absorption
    let off_ladder: f64 = p
        .iter()
        .enumerate()
        .filter(|(n, _)| {
            let r = (*n as f64).sqrt().round() as usize;
            r * r != *n
        })
        .map(|(_, q)| q)
        .sum();
    ensure!(off_ladder < 1e-3, "off-ladder mass {off_ladder}");
    Ok(())
}

fn split_preserves_trace_and_energy(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..5 {
        let dim = rng.gen_range(2..9);
        let rho = random_diagonal(rng, dim)?;
        let split = lib(split_state(&rho))?;
        let trace = split.trace();
        ensure!((trace - 1.0).abs() <= 1e-12, "split trace {trace}");
        let mean_in = lib(rho.number_distribution())?.mean();
        let mean_a = lib(split.reduced_a())?.mean();
        ensure!(
            (mean_a - mean_in / 2.0).abs() <= 1e-11,
            "marginal mean {mean_a} wanted {}",
            mean_in / 2.0
        );
    }
    Ok(())
}

fn negativity_routes_agree(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..5 {
        let dim = rng.gen_range(2..8);
        let rho = random_diagonal(rng, dim)?;
        let split = lib(split_state(&rho))?;
        ensure!(split.is_sector_form(), "diagonal input missed the fast route");
        let fast = lib(split.pt_trace_norm())?;
        let dense = lib(crate::entanglement::TwoModeDensityMatrix::from_dense(
            split.to_dense(),
        ))?;
        let slow = lib(dense.pt_trace_norm())?;
        ensure!((fast - slow).abs() <= 1e-10, "trace norms {fast} vs {slow}");
    }
    Ok(())
}

fn classical_states_have_no_potential(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let nbar: f64 = rng.gen_range(0.3..1.5);
    let dim = lib(required_dim(nbar, 1e-12))?;
    let value = lib(lnp(&lib(thermal_state(nbar, dim))?))?;
    ensure!(value.abs() <= 1e-9, "thermal potential {value}");
    Ok(())
}

fn ground_absorption_matches_closed_form(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..5 {
        let pe: f64 = rng.gen_range(0.0..0.5);
        let gt: f64 = rng.gen_range(0.0..3.0);
        let vacuum = lib(DensityMatrix::fock_state(0, 2))?;
        let got = lib(lnp(&lib(apply(&vacuum, pe, gt))?))?;
        let want = lib(lnp_ground_closed_form(pe, gt))?;
        ensure!((got - want).abs() <= 1e-10, "lnp {got} wanted {want}");
    }
    Ok(())
}

fn half_ebit_at_the_hot_limit(_: &mut ChaCha8Rng) -> Result<(), String> {
    let value = lib(lnp_ground_closed_form(0.5, std::f64::consts::FRAC_PI_2))?;
    ensure!((value - 0.5).abs() <= 1e-12, "hot-limit potential {value}");
    Ok(())
}

fn filter_success_is_kept_trace(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dim = rng.gen_range(3..7);
    let rho = random_diagonal(rng, dim)?;
    let split = lib(split_state(&rho))?;
    let (_, success) = lib(filter_project(&split, 1))?;
    ensure!((0.0..=1.0 + 1e-12).contains(&success), "success {success}");
    let (kept, all) = lib(filter_project(&split, dim + 1))?;
    ensure!((all - split.trace()).abs() <= 1e-12, "loose filter lost mass");
    let drift = (lib(kept.lnp())? - lib(split.lnp())?).abs();
    ensure!(drift <= 1e-10, "loose filter moved the potential by {drift}");
    Ok(())
}

fn thermal_witness_is_positive(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let nbar: f64 = rng.gen_range(0.1..8.0);
    let dim = lib(required_dim(nbar, 1e-9))?;
    let p = lib(lib(thermal_state(nbar, dim))?.number_distribution())?;
    for order in 1..=8 {
        let value = lib(klyshko_value(&p, order))?;
        let want = p.get(order) * p.get(order);
        ensure!((value - want).abs() <= 1e-12 * want.max(1e-300), "order {order}: {value}");
        ensure!(!is_violation(value), "thermal flagged at order {order}");
    }
    Ok(())
}

fn poisson_sits_on_the_boundary(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mean: f64 = rng.gen_range(0.5..4.0);
    let p = lib(poisson_distribution(mean, 40))?;
    for order in 1..=10 {
        let value = lib(klyshko_value(&p, order))?;
        ensure!(value.abs() <= 1e-12, "order {order} value {value} at mean {mean}");
    }
    Ok(())
}

fn classical_mixtures_stay_sound(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..50 {
        let parts = rng.gen_range(1..5);
        let mut probs = vec![0.0f64; 14];
        let mut weight_left = 1.0;
        for k in 0..parts {
            let w = if k == parts - 1 { weight_left } else { rng.gen_range(0.0..weight_left) };
            weight_left -= w;
            let mean: f64 = rng.gen_range(0.1..6.0);
            let p = lib(poisson_distribution(mean, 14))?;
            for (slot, q) in probs.iter_mut().zip(p.iter()) {
                *slot += w * q;
            }
        }
        let p = lib(NumberDistribution::new(probs))?;
        for order in 1..=12 {
            let value = lib(klyshko_value(&p, order))?;
            ensure!(value >= -1e-12, "mixture violated order {order} by {value}");
        }
    }
    Ok(())
}

fn witness_forms_agree(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..50 {
        let mut probs: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = probs.iter().sum();
        for q in &mut probs {
            *q /= total;
        }
        let p = lib(NumberDistribution::new(probs))?;
        let difference = is_violation(lib(klyshko_value(&p, 1))?);
        let ratio = lib(ratio_check(&p))?;
        ensure!(difference == ratio, "forms disagree on {p:?}");
    }
    Ok(())
}

fn absorbed_thermal_is_detected(_: &mut ChaCha8Rng) -> Result<(), String> {
    let dim = lib(required_dim(1.0, 1e-9))?.max(5);
    let stats = lib(output_number_stats(1.0, 0.0, 5.0, dim))?;
    let report = lib(detect(&stats, 3))?;
    ensure!(report.first_violation.is_some(), "no violation at nbar 1, gt 5");
    Ok(())
}

fn big_f_stays_in_range(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..100 {
        let gt: f64 = rng.gen_range(0.0..20.0);
        let n = rng.gen_range(0..200);
        let f = big_f(gt, n);
        ensure!((0.0..=2.0).contains(&f), "F {f} at gt {gt}, n {n}");
    }
    Ok(())
}

fn hot_two_level_system_is_blind(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..20 {
        let gt: f64 = rng.gen_range(0.0..10.0);
        let n = rng.gen_range(1..60);
        let value = lib(asymptotic_criterion(gt, n, 0.5))?;
        ensure!((value + 1.0).abs() <= 1e-12, "criterion {value} at pe 1/2");
    }
    Ok(())
}

fn detection_bound_grows_with_order(_: &mut ChaCha8Rng) -> Result<(), String> {
    let mut last = 0.0;
    for n in 1..=40 {
        let bound = lib(pe_bound::<f64>(n))?;
        ensure!(bound > last, "bound {bound} at n {n} not above {last}");
        ensure!(bound < 0.5, "bound {bound} reached one half");
        last = bound;
    }
    let known = lib(pe_bound::<f64>(25))?;
    ensure!((known - 0.4950975679639241).abs() <= 1e-15, "bound(25) {known}");
    Ok(())
}

fn order_one_search_finds_known_optimum(_: &mut ChaCha8Rng) -> Result<(), String> {
    let result = lib(search_max_pe::<f64>(1, (0.0, 10.0), 1e-2))?;
    ensure!(result.detected, "order-1 search found nothing");
    ensure!(
        (result.pe_star - 0.364053272).abs() <= 2e-3,
        "pe_star {} strayed from the known optimum",
        result.pe_star
    );
    Ok(())
}

fn zero_noise_is_the_plain_witness(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let model = lib(MeasurementModel::new(0.0, 6, (1..=4).collect()))?;
    for _ in 0..20 {
        let mut probs: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = probs.iter().sum();
        for q in &mut probs {
            *q /= total;
        }
        let p = lib(NumberDistribution::new(probs))?;
        for order in 1..=4 {
            let robust = lib(worst_case_klyshko(&p, &model, order))?;
            let plain = lib(klyshko_value(&p, order))?;
            ensure!(robust == plain, "order {order}: {robust} vs {plain}");
        }
    }
    Ok(())
}

fn noise_only_weakens_detection(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..20 {
        let mut probs: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = probs.iter().sum();
        for q in &mut probs {
            *q /= total;
        }
        let p = lib(NumberDistribution::new(probs))?;
        let mut last = f64::NEG_INFINITY;
        for sigma in [0.0, 0.005, 0.02, 0.1] {
            let model = lib(MeasurementModel::new(sigma, 5, (1..=3).collect()))?;
            let value = lib(worst_case_klyshko(&p, &model, 1))?;
            ensure!(value >= last - 1e-15, "sigma {sigma} lowered the witness");
            last = value;
        }
    }
    Ok(())
}

fn robust_region_nests_inside_plain(_: &mut ChaCha8Rng) -> Result<(), String> {
    let nbars = [0.1f64, 2.5];
    let gts = [3.0f64, 5.0, 8.0];
    let plain = lib(region_scan(&nbars, &gts, 0.0, 3))?;
    let model = lib(MeasurementModel::new(0.01, 5, (1..=3).collect()))?;
    let robust = lib(robust_region_scan(&nbars, &gts, &model))?;
    for i in 0..nbars.len() {
        for j in 0..gts.len() {
            if robust.first_violation(i, j).is_some() {
                ensure!(
                    plain.first_violation(i, j).is_some(),
                    "robust detection outside the plain region at ({i}, {j})"
                );
            }
        }
    }
    let sigma_zero = lib(MeasurementModel::new(0.0, 5, (1..=3).collect()))?;
    let same = lib(robust_region_scan(&nbars, &gts, &sigma_zero))?;
    ensure!(same.cells() == plain.cells(), "zero-noise scan differs from plain scan");
    Ok(())
}

fn sweeps_are_deterministic(_: &mut ChaCha8Rng) -> Result<(), String> {
    let spec = SweepSpec {
        axes: vec![
            lib(AxisSpec::new("nbar", 0.2, 1.0, 0.4))?,
            lib(AxisSpec::new("gt", 2.0, 4.0, 1.0))?,
        ],
        fixed: BTreeMap::from([("pe".into(), 0.1), ("D_f".into(), 1.0)]),
        quantity: Quantity::LnpFiltered,
    };
    let one = lib(sweep_to_csv(&spec, 1))?;
    let three = lib(sweep_to_csv(&spec, 3))?;
    ensure!(one == three, "worker count changed the bytes");
    let records = lib(run_sweep(&spec, 2))?;
    ensure!(records.len() == spec.cell_count(), "{} records", records.len());
    Ok(())
}

fn csv_round_trips(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..200 {
        let x = rng.gen_range(-1.0f64..1.0) * 10f64.powi(rng.gen_range(-12..12));
        let text = format_real(x);
        let back: f64 = text.parse().map_err(|e| format!("unparseable {text}: {e}"))?;
        let tol = 1e-11 * x.abs().max(1e-300);
        ensure!((back - x).abs() <= tol, "{x} -> {text} -> {back}");
    }
    ensure!(format_real(0.0) == "0", "zero format");
    Ok(())
}

const CHECKS: &[Check] = &[
    ("fock", "thermal-distribution-is-geometric", thermal_is_geometric),
    ("fock", "poisson-distribution-is-normalized", poisson_is_normalized),
    ("fock", "required-dim-is-monotone", required_dim_is_monotone),
    ("fock", "equilibrium-matches-occupation", equilibrium_matches_occupation),
    ("jc", "kraus-branches-are-complete", kraus_branches_are_complete),
    ("jc", "absorption-preserves-trace", absorption_preserves_trace),
    ("jc", "closed-form-matches-matrix-route", closed_form_matches_matrix_route),
    ("jc", "equilibrium-is-a-fixed-point", equilibrium_is_a_fixed_point),
    ("jc", "repeated-absorption-concentrates", repeated_absorption_concentrates),
    ("entanglement", "split-preserves-trace-and-energy", split_preserves_trace_and_energy),
    ("entanglement", "negativity-routes-agree", negativity_routes_agree),
    ("entanglement", "classical-states-have-no-potential", classical_states_have_no_potential),
    ("entanglement", "ground-absorption-matches-closed-form", ground_absorption_matches_closed_form),
    ("entanglement", "half-ebit-at-the-hot-limit", half_ebit_at_the_hot_limit),
    ("entanglement", "filter-success-is-kept-trace", filter_success_is_kept_trace),
    ("klyshko", "thermal-witness-is-positive", thermal_witness_is_positive),
    ("klyshko", "poisson-sits-on-the-boundary", poisson_sits_on_the_boundary),
    ("klyshko", "classical-mixtures-stay-sound", classical_mixtures_stay_sound),
    ("klyshko", "witness-forms-agree", witness_forms_agree),
    ("klyshko", "absorbed-thermal-is-detected", absorbed_thermal_is_detected),
    ("asymptotics", "big-f-stays-in-range", big_f_stays_in_range),
    ("asymptotics", "hot-two-level-system-is-blind", hot_two_level_system_is_blind),
    ("asymptotics", "detection-bound-grows-with-order", detection_bound_grows_with_order),
    ("asymptotics", "order-one-search-finds-known-optimum", order_one_search_finds_known_optimum),
    ("ion", "zero-noise-is-the-plain-witness", zero_noise_is_the_plain_witness),
    ("ion", "noise-only-weakens-detection", noise_only_weakens_detection),
    ("ion", "robust-region-nests-inside-plain", robust_region_nests_inside_plain),
    ("sweep", "sweeps-are-deterministic", sweeps_are_deterministic),
    ("sweep", "csv-round-trips", csv_round_trips),
];

/// Runs every check with its own stream off the given seed.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let results = CHECKS
        .iter()
        .enumerate()
        .map(|(i, (module, name, check))| {
            let stream = seed.wrapping_add((i as u64).wrapping_mul(0x9E3779B97F4A7C15));
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            match check(&mut rng) {
                Ok(()) => CheckResult { module, name, passed: true, detail: String::new() },
                Err(detail) => CheckResult { module, name, passed: false, detail },
            }
        })
        .collect();
    SelftestReport { results }
}
