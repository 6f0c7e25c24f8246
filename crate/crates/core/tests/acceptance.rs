//! Acceptance battery: twelve numbered end-to-end checks over the public
//! API. Each test prints one PASS/FAIL line; run with `--nocapture` to see
//! them. Every tolerance is pinned inline next to the check it gates.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tanp::asymptotics::search_max_pe;
use tanp::entanglement::{lnp, lnp_ground_closed_form};
use tanp::fock::{
    equilibrium_pe, poisson_distribution, required_dim, thermal_state, DensityMatrix,
    NumberDistribution, DEFAULT_TAIL_TOL,
};
use tanp::ion::{robust_region_scan, MeasurementModel};
use tanp::jc::{apply, output_number_stats, repeated_absorption};
use tanp::klyshko::{klyshko_value, region_scan};
use tanp::sweep::{sweep_to_csv, AxisSpec, Quantity, SweepSpec};

fn verdict(number: u32, name: &str, pass: bool, detail: &str) {
    if pass {
        println!("criterion {number} ({name}): PASS");
    } else {
        println!("criterion {number} ({name}): FAIL  {detail}");
    }
    assert!(pass, "criterion {number} ({name}): {detail}");
}

#[test]
fn criterion_01_closed_form_agreement() {
    let clock = Instant::now();
    let ground = DensityMatrix::fock_state(0, 2).unwrap();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let pe = 0.5 * i as f64 / 19.0;
        for j in 0..20 {
            let gt = PI * j as f64 / 19.0;
            let full = lnp(&apply(&ground, pe, gt).unwrap()).unwrap();
            let closed = lnp_ground_closed_form(pe, gt).unwrap();
            worst = worst.max((full - closed).abs());
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    verdict(
        1,
        "closed-form agreement",
        worst <= 1e-8 && elapsed < 10.0,
        &format!("max deviation {worst:.3e} over a 20 x 20 grid in {elapsed:.2} s (gates 1e-8 and 10 s)"),
    );
}

#[test]
fn criterion_02_half_ebit_peak() {
    let ground = DensityMatrix::fock_state(0, 2).unwrap();
    let value = lnp(&apply(&ground, 0.5, FRAC_PI_2).unwrap()).unwrap();
    verdict(
        2,
        "half e-bit peak",
        (value - 0.5).abs() <= 1e-9,
        &format!("lnp at (pe 1/2, gt pi/2) = {value:.12}, want 0.5 within 1e-9"),
    );
}

#[test]
fn criterion_03_short_time_law() {
    let ground = DensityMatrix::fock_state(0, 2).unwrap();
    let mut bad = Vec::new();
    for &pe in &[0.1, 0.3, 0.5] {
        for &gt in &[0.02f64, 0.05] {
            let value = lnp(&apply(&ground, pe, gt).unwrap()).unwrap();
            let law = gt.powi(4) * pe * pe / LN_2;
            let ratio = value / law;
            if !(0.95..=1.05).contains(&ratio) {
                bad.push(format!("pe {pe} gt {gt}: ratio {ratio:.4}"));
            }
        }
    }
    verdict(
        3,
        "short-time law",
        bad.is_empty(),
        &format!("ratios outside [0.95, 1.05]: {}", bad.join("; ")),
    );
}

#[test]
fn criterion_04_equilibrium_fixed_point() {
    // Entry comparison uses a 1e-13 tail so truncation sits below the 1e-12
    // gate; the residual-lnp check reuses the default tail, its gate is far
    // looser than the 1e-9 truncation noise.
    let mut worst_entry = 0.0f64;
    let mut worst_lnp = 0.0f64;
    for &nbar in &[0.5, 1.0, 2.0, 5.0] {
        let pe = equilibrium_pe(nbar).unwrap();
        let dim = required_dim(nbar, 1e-13).unwrap();
        let input = thermal_state(nbar, dim).unwrap();
        let p_in = input.number_distribution().unwrap();
        let small_dim = required_dim(nbar, DEFAULT_TAIL_TOL).unwrap();
        let small = thermal_state(nbar, small_dim).unwrap();
        for &gt in &[0.5, FRAC_PI_2, PI, 6.0] {
            let p_out = apply(&input, pe, gt).unwrap().number_distribution().unwrap();
            for n in 0..p_out.len() {
                worst_entry = worst_entry.max((p_in.get(n) - p_out.get(n)).abs());
            }
            let residual = lnp(&apply(&small, pe, gt).unwrap()).unwrap();
            worst_lnp = worst_lnp.max(residual);
        }
    }
    verdict(
        4,
        "equilibrium fixed point",
        worst_entry <= 1e-12 && worst_lnp <= 1e-7,
        &format!("max entry drift {worst_entry:.3e} (gate 1e-12), max residual lnp {worst_lnp:.3e} (gate 1e-7)"),
    );
}

#[test]
fn criterion_05_stats_route_equivalence() {
    let mut worst = 0.0f64;
    for i in 0..10 {
        let nbar = 0.5 * i as f64;
        let dim = required_dim(nbar, DEFAULT_TAIL_TOL).unwrap().max(4);
        let rho = thermal_state(nbar, dim).unwrap();
        for j in 0..10 {
            let pe = 0.5 * j as f64 / 9.0;
            for k in 0..10 {
                let gt = 10.0 * k as f64 / 9.0;
                let direct = output_number_stats(nbar, pe, gt, dim).unwrap();
                let matrix = apply(&rho, pe, gt).unwrap().number_distribution().unwrap();
                // the matrix route gains one level above the closed form's
                // support; it carries only truncation-tail mass, so the
                // entry-for-entry claim lives on the shared levels
                for n in 0..direct.len() {
                    worst = worst.max((direct.get(n) - matrix.get(n)).abs());
                }
            }
        }
    }
    verdict(
        5,
        "stats route equivalence",
        worst <= 1e-11,
        &format!("max entry deviation {worst:.3e} over the 10 x 10 x 10 grid (gate 1e-11)"),
    );
}

#[test]
fn criterion_06_energy_trends() {
    let curve = |pe: f64, gt: f64| -> Vec<f64> {
        (0..=5)
            .map(|k| {
                let nbar = k as f64;
                let dim = required_dim(nbar, DEFAULT_TAIL_TOL).unwrap();
                lnp(&apply(&thermal_state(nbar, dim).unwrap(), pe, gt).unwrap()).unwrap()
            })
            .collect()
    };
    // 1e-7 slack is the residual-lnp noise floor: hot-atom values beyond
    // nbar = 2 are zeros jittered at the 1e-9 truncation tail
    let absorbed = curve(0.0, PI * 2f64.sqrt());
    let grows = absorbed.windows(2).all(|w| w[1] >= w[0] - 1e-7);
    let positive = absorbed[1..].iter().all(|&v| v > 1e-3);
    let heated = curve(0.5, FRAC_PI_2);
    let shrinks = heated.windows(2).all(|w| w[1] <= w[0] + 1e-7);
    verdict(
        6,
        "energy trends",
        grows && positive && shrinks,
        &format!(
            "absorption curve {absorbed:?} must not decrease and must stay positive past the vacuum; \
             hot-atom curve {heated:?} must not increase"
        ),
    );
}

#[test]
fn criterion_07_witness_coverage() {
    let clock = Instant::now();
    let nbars: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
    let gts: Vec<f64> = (20..=100).map(|i| i as f64 * 0.1).collect();
    let grid = region_scan(&nbars, &gts, 0.0, 3).unwrap();
    let missed = grid.cells().iter().filter(|c| c.is_none()).count();
    let wider = region_scan(&nbars, &gts, 0.0, 4).unwrap();
    let missed_by_four = wider.cells().iter().filter(|c| c.is_none()).count();
    let elapsed = clock.elapsed().as_secs_f64();
    verdict(
        7,
        "witness coverage",
        missed == 0 && elapsed < 60.0,
        &format!(
            "{missed} of {} cells undetected by orders 1-3 in {elapsed:.2} s (gates 0 and 60 s); \
             the misses sit at pulse areas near 7.7-7.9 and 9.1-9.4 where order 4 fires instead, \
             and orders 1-4 leave {missed_by_four} cells undetected",
            grid.cells().len()
        ),
    );
}

#[test]
fn criterion_08_witness_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let len = 64;
    let mut floor = f64::INFINITY;
    for _ in 0..1000 {
        let parts = rng.gen_range(1..=4);
        let raw: Vec<f64> = (0..parts).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let mut mixed = vec![0.0f64; len];
        for &w in &raw {
            let mean = rng.gen_range(0.05..6.0);
            let p = poisson_distribution(mean, len).unwrap();
            for n in 0..len {
                mixed[n] += w / total * p.get(n);
            }
        }
        let p = NumberDistribution::new(mixed).unwrap();
        for order in 1..=20 {
            floor = floor.min(klyshko_value(&p, order).unwrap());
        }
    }
    for &nbar in &[0.1, 1.0, 10.0] {
        let dim = required_dim(nbar, DEFAULT_TAIL_TOL).unwrap().max(22);
        let p = thermal_state(nbar, dim).unwrap().number_distribution().unwrap();
        for order in 1..=20 {
            floor = floor.min(klyshko_value(&p, order).unwrap());
        }
    }
    verdict(
        8,
        "witness soundness",
        floor >= -1e-12,
        &format!("most negative witness value {floor:.3e} on classical inputs (gate -1e-12)"),
    );
}

#[test]
fn criterion_09_threshold_bound() {
    // The search window (0, 10) in pulse area and the 1e-3 grid are the
    // documented scan configuration.
    let results: Vec<_> = (1..=30)
        .map(|n| search_max_pe(n, (0.0, 10.0), 1e-3).unwrap())
        .collect();
    let mut worst_ratio = f64::INFINITY;
    for &n in &[10usize, 15, 20, 25, 30] {
        let r = &results[n - 1];
        worst_ratio = worst_ratio.min(r.pe_star / r.bound);
    }
    let near_bound = worst_ratio >= 0.90 && worst_ratio <= 1.0 + 1e-9;
    let dips: Vec<String> = results
        .windows(2)
        .filter(|w| w[1].pe_star < w[0].pe_star)
        .map(|w| format!("n {} drops by {:.1e}", w[1].n, w[0].pe_star - w[1].pe_star))
        .collect();
    verdict(
        9,
        "threshold bound",
        near_bound && dips.is_empty(),
        &format!(
            "within-10%-of-bound clause: worst ratio {worst_ratio:.5} ({}); \
             the nondecreasing clause fails because the resonance pi sqrt(n) leaves \
             the (0, 10) search window for n >= 11, so the reachable optimum dips: {}",
            if near_bound { "holds" } else { "fails" },
            dips.join(", ")
        ),
    );
}

#[test]
fn criterion_10_robust_region() {
    let nbars: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
    let gts: Vec<f64> = (20..=100).map(|i| i as f64 * 0.1).collect();
    let plain = region_scan(&nbars, &gts, 0.0, 3).unwrap();
    let model = MeasurementModel::new(0.01, 5, BTreeSet::from([1, 2, 3])).unwrap();
    let robust = robust_region_scan(&nbars, &gts, &model).unwrap();
    let mut outside = 0usize;
    let mut lost = 0usize;
    for (p, r) in plain.cells().iter().zip(robust.cells()) {
        match (p.is_some(), r.is_some()) {
            (false, true) => outside += 1,
            (true, false) => lost += 1,
            _ => {}
        }
    }
    // retained fraction of each band's row block, all gt in [2, 10]
    let band = |lo: f64, hi: f64| -> f64 {
        let mut kept = 0usize;
        let mut total = 0usize;
        for (i, &nbar) in nbars.iter().enumerate() {
            if nbar < lo - 1e-9 || nbar > hi + 1e-9 {
                continue;
            }
            for j in 0..gts.len() {
                total += 1;
                if robust.first_violation(i, j).is_some() {
                    kept += 1;
                }
            }
        }
        kept as f64 / total as f64
    };
    let hot = band(2.0, 3.0);
    let cold = band(0.0, 0.5);
    verdict(
        10,
        "robust region",
        outside == 0 && lost > 0 && hot > cold,
        &format!(
            "noisy region escapes the exact one on {outside} cells (gate 0), shrinks it by \
             {lost} cells (gate > 0); retained fraction {hot:.3} on the 2..3 band vs {cold:.3} \
             on the 0..0.5 band"
        ),
    );
}

#[test]
fn criterion_11_repeated_absorption_ladder() {
    let dim = required_dim(3.0, DEFAULT_TAIL_TOL).unwrap();
    let rho = thermal_state(3.0, dim).unwrap();
    let settled = repeated_absorption(&rho, PI, 50).unwrap();
    let p = settled.number_distribution().unwrap();
    let mut off_ladder = 0.0f64;
    for n in 0..p.len() {
        let root = (n as f64).sqrt().round() as usize;
        if root * root != n {
            off_ladder += p.get(n);
        }
    }
    let early = lnp(&repeated_absorption(&rho, PI, 1).unwrap()).unwrap();
    let late = lnp(&repeated_absorption(&rho, PI, 10).unwrap()).unwrap();
    verdict(
        11,
        "repeated absorption ladder",
        off_ladder < 1e-3 && late > early,
        &format!(
            "population off the square ladder after 50 rounds: {off_ladder:.3e} (gate 1e-3); \
             lnp after 10 rounds {late:.6} must exceed lnp after 1 round {early:.6}"
        ),
    );
}

#[test]
fn criterion_12_sweep_determinism() {
    let surface = SweepSpec {
        axes: vec![
            AxisSpec { name: "nbar".into(), start: 0.0, stop: 1.0, step: 0.25 },
            AxisSpec { name: "gt".into(), start: 2.0, stop: 3.0, step: 0.25 },
        ],
        fixed: BTreeMap::from([("pe".to_string(), 0.0)]),
        quantity: Quantity::Lnp,
    };
    let orders = SweepSpec {
        axes: vec![
            AxisSpec { name: "nbar".into(), start: 0.5, stop: 1.5, step: 0.5 },
            AxisSpec { name: "gt".into(), start: 3.0, stop: 5.0, step: 0.5 },
        ],
        fixed: BTreeMap::from([("pe".to_string(), 0.0), ("order".to_string(), 3.0)]),
        quantity: Quantity::KlyshkoMinOrder,
    };
    let mut stable = true;
    for spec in [&surface, &orders] {
        let single = sweep_to_csv(spec, 1).unwrap();
        for workers in [2, 3, 7] {
            stable &= sweep_to_csv(spec, workers).unwrap() == single;
        }
    }
    verdict(
        12,
        "sweep determinism",
        stable,
        "worker counts 1, 2, 3, 7 must produce byte-identical CSV",
    );
}
