//! Detection feasibility with realistic population measurements, modeled on
//! a single trapped ion whose motional state is probed through sideband
//! pulses.
//!
//! Each population estimate carries an error bar sigma. Before declaring
//! nonclassicality, every population entering the witness is shifted by
//! sigma in whichever direction most opposes the violation; light that
//! still violates is detectable with that measurement precision.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fock::{required_dim, NumberDistribution, DEFAULT_TAIL_TOL};
use crate::jc::output_number_stats;
use crate::klyshko::{is_violation, ViolationGrid};
use crate::scalar::Scalar;

/// Lamb-Dicke parameter of the reference trap.
pub const LAMB_DICKE: f64 = 0.1;
/// Carrier Rabi frequency divided by 2 pi, in Hz.
pub const RABI_FREQUENCY_HZ: f64 = 1e5;
/// Effective sideband coupling g divided by 2 pi, in Hz: Lamb-Dicke times
/// the carrier Rabi frequency.
pub const SIDEBAND_COUPLING_HZ: f64 = 1e4;
/// Trap frequency divided by 2 pi, in Hz.
pub const TRAP_FREQUENCY_HZ: f64 = 1e6;

/// Pulse area gt accumulated by driving the sideband for `seconds`.
pub fn pulse_area_from_duration(seconds: f64) -> f64 {
    2.0 * std::f64::consts::PI * SIDEBAND_COUPLING_HZ * seconds
}

/// Which populations are measured, how precisely, and which witness orders
/// are evaluated from them.
#[derive(Debug, Clone)]
pub struct MeasurementModel<F: Scalar> {
    sigma: F,
    n_measured: usize,
    orders: BTreeSet<usize>,
}

impl<F: Scalar> MeasurementModel<F> {
    /// Builds a model; each order n needs P(n-1), P(n), P(n+1) inside the
    /// measured window of `n_measured` lowest populations.
    pub fn new(sigma: F, n_measured: usize, orders: BTreeSet<usize>) -> Result<Self> {
        if !sigma.is_finite() || sigma < F::zero() || sigma > F::of(0.1) {
            return Err(Error::InvalidParameter(format!(
                "population error must lie in [0, 0.1], got {sigma}"
            )));
        }
        if n_measured == 0 {
            return Err(Error::InvalidParameter(
                "at least one population must be measured".into(),
            ));
        }
        for &order in &orders {
            if order == 0 {
                return Err(Error::InvalidParameter(
                    "witness order starts at 1".into(),
                ));
            }
            if order + 1 >= n_measured {
                return Err(Error::UnmeasurableOrder { order, measured: n_measured });
            }
        }
        Ok(Self { sigma, n_measured, orders })
    }

    pub fn sigma(&self) -> F {
        self.sigma
    }

    pub fn n_measured(&self) -> usize {
        self.n_measured
    }

    pub fn orders(&self) -> &BTreeSet<usize> {
        &self.orders
    }

    /// Largest order this model can evaluate anywhere.
    pub fn max_order(&self) -> usize {
        self.orders.iter().next_back().copied().unwrap_or(0)
    }
}

impl<F: Scalar> Default for MeasurementModel<F> {
    /// The reference scenario: the five lowest populations at one-percent
    /// precision, witness orders 1 through 3.
    fn default() -> Self {
        Self {
            sigma: F::of(0.01),
            n_measured: 5,
            orders: [1, 2, 3].into_iter().collect(),
        }
    }
}

/// Order-n witness value with every population shifted by sigma against
/// detection: neighbors up (clamped to 1), the center down (clamped to 0).
///
/// Negative only when no combination of measurement errors could explain
/// the violation away.
pub fn worst_case_klyshko<F: Scalar>(
    p: &NumberDistribution<F>,
    model: &MeasurementModel<F>,
    order: usize,
) -> Result<F> {
    if order == 0 {
        return Err(Error::InvalidParameter("witness order starts at 1".into()));
    }
    if order + 1 >= model.n_measured {
        return Err(Error::UnmeasurableOrder { order, measured: model.n_measured });
    }
    let needed = order + 2;
    if p.len() < needed {
        return Err(Error::DistributionTooShort { needed, len: p.len() });
    }
    let one = F::one();
    let sigma = model.sigma;
    let up = |x: F| (x + sigma).min(one);
    let down = |x: F| (x - sigma).max(F::zero());
    let n = F::of(order as f64);
    let np1 = F::of((order + 1) as f64);
    let center = down(p.get(order));
    Ok(np1 * up(p.get(order - 1)) * up(p.get(order + 1)) - n * center * center)
}

/// Minimal order in the model's set whose worst-case witness still fires,
/// or None.
pub fn robust_first_violation<F: Scalar>(
    p: &NumberDistribution<F>,
    model: &MeasurementModel<F>,
) -> Result<Option<usize>> {
    for &order in &model.orders {
        if is_violation(worst_case_klyshko(p, model, order)?) {
            return Ok(Some(order));
        }
    }
    Ok(None)
}

/// Like the plain detection-region scan, but each cell must survive the
/// worst-case measurement shifts. The atom is reset to the ground state
/// every pass, so pe = 0 throughout.
pub fn robust_region_scan<F: Scalar>(
    nbars: &[F],
    gts: &[F],
    model: &MeasurementModel<F>,
) -> Result<ViolationGrid<F>> {
    if model.orders.is_empty() {
        return Err(Error::InvalidParameter(
            "no witness orders to evaluate".into(),
        ));
    }
    let max_order = model.max_order();
    let mut cells = Vec::with_capacity(nbars.len() * gts.len());
    for &nbar in nbars {
        let dim = required_dim(nbar, F::of(DEFAULT_TAIL_TOL))?.max(max_order + 2);
        for &gt in gts {
            let stats = output_number_stats(nbar, F::zero(), gt, dim)?;
            cells.push(robust_first_violation(&stats, model)?);
        }
    }
    ViolationGrid::from_parts(nbars.to_vec(), gts.to_vec(), cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::thermal_state;
    use crate::klyshko::{klyshko_value, region_scan};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn model(sigma: f64) -> MeasurementModel<f64> {
        MeasurementModel::new(sigma, 5, [1, 2, 3].into_iter().collect()).unwrap()
    }

    fn random_dist(rng: &mut ChaCha8Rng, len: usize) -> NumberDistribution<f64> {
        let mut probs: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        NumberDistribution::new(probs).unwrap()
    }

    #[test]
    fn zero_noise_reduces_to_the_plain_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = model(0.0);
        for _ in 0..50 {
            let p = random_dist(&mut rng, 6);
            for order in 1..=3 {
                assert_eq!(
                    worst_case_klyshko(&p, &m, order).unwrap(),
                    klyshko_value(&p, order).unwrap()
                );
            }
        }
    }

    #[test]
    fn single_photon_survives_one_percent_noise() {
        let p = NumberDistribution::new(vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let value = worst_case_klyshko(&p, &model(0.01), 1).unwrap();
        assert_close(value, 2.0 * 0.01 * 0.01 - 0.99 * 0.99, 1e-15);
        assert!(is_violation(value));
    }

    #[test]
    fn thermal_light_is_never_falsely_detected() {
        for nbar in [0.1f64, 1.0, 10.0] {
            let dim = required_dim(nbar, 1e-9).unwrap();
            let p = thermal_state(nbar, dim)
                .unwrap()
                .number_distribution()
                .unwrap();
            for sigma in [0.0, 0.01, 0.1] {
                let m = model(sigma);
                for order in 1..=3 {
                    let value = worst_case_klyshko(&p, &m, order).unwrap();
                    assert!(value > 0.0, "nbar {nbar} sigma {sigma} order {order}");
                }
            }
        }
    }

    #[test]
    fn more_noise_never_helps_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sigmas = [0.0, 0.003, 0.01, 0.03, 0.1];
        for _ in 0..50 {
            let p = random_dist(&mut rng, 6);
            for order in 1..=3 {
                let mut prev = f64::NEG_INFINITY;
                for &sigma in &sigmas {
                    let value = worst_case_klyshko(&p, &model(sigma), order).unwrap();
                    assert!(value >= prev - 1e-15, "order {order} sigma {sigma}");
                    prev = value;
                }
            }
        }
    }

    #[test]
    fn shifted_populations_stay_clamped() {
        let p = NumberDistribution::new(vec![0.995, 0.005, 0.0, 0.0, 0.0]).unwrap();
        let value = worst_case_klyshko(&p, &model(0.1), 1).unwrap();
        // neighbor 0.995 clamps to 1, center 0.005 clamps to 0
        assert_close(value, 2.0 * 1.0 * 0.1, 1e-15);
        assert!(value.is_finite());
    }

    #[test]
    fn model_validation_catches_bad_setups() {
        assert!(MeasurementModel::new(0.2f64, 5, [1].into_iter().collect()).is_err());
        assert!(MeasurementModel::new(-0.01f64, 5, [1].into_iter().collect()).is_err());
        match MeasurementModel::new(0.01f64, 5, [4].into_iter().collect()) {
            Err(Error::UnmeasurableOrder { order: 4, measured: 5 }) => {}
            other => panic!("expected unmeasurable order, got {other:?}"),
        }
        assert!(MeasurementModel::new(0.01f64, 5, [0].into_iter().collect()).is_err());
        let m = model(0.01);
        let p = NumberDistribution::new(vec![0.2f64; 5]).unwrap();
        assert!(matches!(
            worst_case_klyshko(&p, &m, 4),
            Err(Error::UnmeasurableOrder { .. })
        ));
        let defaults: MeasurementModel<f64> = MeasurementModel::default();
        assert_eq!(defaults.n_measured(), 5);
        assert_eq!(defaults.max_order(), 3);
        assert_close(defaults.sigma(), 0.01, 0.0);
    }

    #[test]
    fn noiseless_scan_equals_the_plain_scan() {
        let nbars = [0.5f64, 1.5];
        let gts = [3.0f64, 5.0, 8.0];
        let robust = robust_region_scan(&nbars, &gts, &model(0.0)).unwrap();
        let plain = region_scan(&nbars, &gts, 0.0, 3).unwrap();
        assert_eq!(robust.cells(), plain.cells());
    }

    #[test]
    fn noise_shrinks_the_detection_region_from_the_cold_side() {
        let nbars = [0.05f64, 0.1, 0.25, 2.5];
        let gts: Vec<f64> = (0..17).map(|i| 2.0 + 0.5 * i as f64).collect();
        let plain = region_scan(&nbars, &gts, 0.0, 3).unwrap();
        let robust = robust_region_scan(&nbars, &gts, &model(0.01)).unwrap();
        let mut lost = 0;
        for i in 0..nbars.len() {
            for j in 0..gts.len() {
                let p = plain.first_violation(i, j);
                let r = robust.first_violation(i, j);
                if r.is_some() {
                    assert!(p.is_some(), "robust detection outside plain region");
                }
                if p.is_some() && r.is_none() {
                    lost += 1;
                }
            }
        }
        assert!(lost > 0, "one-percent noise should cost some cells");
    }

    #[test]
    fn pulse_area_conversion() {
        assert_close(
            pulse_area_from_duration(0.5e-4),
            std::f64::consts::PI,
            1e-12,
        );
        assert_close(LAMB_DICKE * RABI_FREQUENCY_HZ, SIDEBAND_COUPLING_HZ, 0.0);
    }
}
