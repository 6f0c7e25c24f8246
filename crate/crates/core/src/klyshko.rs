//! Nonclassicality witnesses built from three neighboring photon-number
//! populations.
//!
//! For any classical (diagonal-coherent-mixture) state,
//! (n+1) P(n-1) P(n+1) >= n P(n)^2 holds at every order n. A negative value
//! of the difference therefore certifies nonclassical light using nothing
//! but photon counting. Thermal light sits safely inside the classical set,
//! Poisson light exactly on its boundary.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fock::{required_dim, NumberDistribution, DEFAULT_TAIL_TOL};
use crate::jc::output_number_stats;
use crate::scalar::Scalar;

fn check_window<F: Scalar>(p: &NumberDistribution<F>, order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidParameter(
            "witness order starts at 1".into(),
        ));
    }
    let needed = order + 2;
    if p.len() < needed {
        return Err(Error::DistributionTooShort { needed, len: p.len() });
    }
    Ok(())
}

/// The order-n witness value (n+1) P(n-1) P(n+1) - n P(n)^2.
///
/// Negative beyond noise level means nonclassical; zero is the Poisson
/// boundary.
pub fn klyshko_value<F: Scalar>(p: &NumberDistribution<F>, order: usize) -> Result<F> {
    check_window(p, order)?;
    let n = F::of(order as f64);
    let np1 = F::of((order + 1) as f64);
    Ok(np1 * p.get(order - 1) * p.get(order + 1) - n * p.get(order) * p.get(order))
}

/// Whether `value` is negative enough to count as a violation rather than
/// rounding noise.
pub fn is_violation<F: Scalar>(value: F) -> bool {
    value < -F::NOISE_TOL
}

/// The order-1 witness in ratio form: is P(0) P(2) / P(1)^2 below 1/2?
///
/// Refused when P(1) = 0 while the numerator is not, since the ratio
/// carries no information there.
pub fn ratio_check<F: Scalar>(p: &NumberDistribution<F>) -> Result<bool> {
    check_window(p, 1)?;
    let numerator = p.get(0) * p.get(2);
    let p1 = p.get(1);
    if p1 == F::zero() {
        if numerator > F::zero() {
            return Err(Error::UndefinedRatio);
        }
        return Ok(false);
    }
    Ok(numerator / (p1 * p1) < F::of(0.5))
}

/// Witness values for orders 1..=max_order and which of them certify.
#[derive(Debug, Clone)]
pub struct KlyshkoReport<F: Scalar> {
    /// values[n - 1] is the order-n witness value.
    pub values: Vec<F>,
    pub violated_orders: BTreeSet<usize>,
    pub first_violation: Option<usize>,
}

/// Evaluates all witness orders up to `max_order` on one distribution.
pub fn detect<F: Scalar>(
    p: &NumberDistribution<F>,
    max_order: usize,
) -> Result<KlyshkoReport<F>> {
    check_window(p, max_order)?;
    let mut values = Vec::with_capacity(max_order);
    let mut violated_orders = BTreeSet::new();
    for order in 1..=max_order {
        let value = klyshko_value(p, order)?;
        if is_violation(value) {
            violated_orders.insert(order);
        }
        values.push(value);
    }
    let first_violation = violated_orders.iter().next().copied();
    Ok(KlyshkoReport { values, violated_orders, first_violation })
}

/// Grid of first violating orders over mean occupation and pulse area.
#[derive(Debug, Clone)]
pub struct ViolationGrid<F: Scalar> {
    pub nbars: Vec<F>,
    pub gts: Vec<F>,
    cells: Vec<Option<usize>>,
}

impl<F: Scalar> ViolationGrid<F> {
    /// Assembles a grid from row-major cells, mean occupation as the slow
    /// index.
    pub fn from_parts(
        nbars: Vec<F>,
        gts: Vec<F>,
        cells: Vec<Option<usize>>,
    ) -> Result<Self> {
        if cells.len() != nbars.len() * gts.len() {
            return Err(Error::InvalidDimension(format!(
                "{} cells cannot tile a {} x {} grid",
                cells.len(),
                nbars.len(),
                gts.len()
            )));
        }
        Ok(Self { nbars, gts, cells })
    }

    /// First violating order at (nbars[i], gts[j]), if any.
    pub fn first_violation(&self, i: usize, j: usize) -> Option<usize> {
        self.cells[i * self.gts.len() + j]
    }

    /// Row-major cells, mean occupation as the slow index.
    pub fn cells(&self) -> &[Option<usize>] {
        &self.cells
    }

    /// True when every cell certifies at some order.
    pub fn all_detected(&self) -> bool {
        self.cells.iter().all(|c| c.is_some())
    }
}

/// Runs one absorption step per grid cell and records the first violating
/// witness order of the output light.
pub fn region_scan<F: Scalar>(
    nbars: &[F],
    gts: &[F],
    pe: F,
    max_order: usize,
) -> Result<ViolationGrid<F>> {
    let mut cells = Vec::with_capacity(nbars.len() * gts.len());
    for &nbar in nbars {
        let dim = required_dim(nbar, F::of(DEFAULT_TAIL_TOL))?.max(max_order + 2);
        for &gt in gts {
            let stats = output_number_stats(nbar, pe, gt, dim)?;
            cells.push(detect(&stats, max_order)?.first_violation);
        }
    }
    Ok(ViolationGrid { nbars: nbars.to_vec(), gts: gts.to_vec(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{equilibrium_pe, poisson_distribution, thermal_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn dist(probs: &[f64]) -> NumberDistribution<f64> {
        NumberDistribution::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn single_photon_is_maximally_nonclassical_at_order_one() {
        let p = dist(&[0.0, 1.0, 0.0]);
        assert_close(klyshko_value(&p, 1).unwrap(), -1.0, 0.0);
        let report = detect(&p, 1).unwrap();
        assert_eq!(report.first_violation, Some(1));
        assert!(report.violated_orders.contains(&1));
    }

    #[test]
    fn thermal_values_are_squared_populations() {
        let p = thermal_state(1.0f64, 30)
            .unwrap()
            .number_distribution()
            .unwrap();
        for order in 1..=10 {
            let value = klyshko_value(&p, order).unwrap();
            let pn = p.get(order);
            assert_close(value, pn * pn, 1e-12 * pn * pn + 1e-300);
        }
        assert_eq!(detect(&p, 8).unwrap().first_violation, None);
    }

    #[test]
    fn poisson_sits_on_the_classical_boundary() {
        for mean in [0.5f64, 1.5, 4.0] {
            let p = poisson_distribution(mean, 25).unwrap();
            for order in 1..=10 {
                let value = klyshko_value(&p, order).unwrap();
                assert!(value.abs() <= 1e-14, "order {order} value {value}");
            }
            assert_eq!(detect(&p, 10).unwrap().first_violation, None);
        }
    }

    #[test]
    fn absorbed_thermal_light_violates_a_low_order() {
        let dim = required_dim(1.0f64, 1e-9).unwrap();
        let stats = output_number_stats(1.0, 0.0, 5.0, dim).unwrap();
        let report = detect(&stats, 3).unwrap();
        match report.first_violation {
            Some(order) => assert!(order <= 3),
            None => panic!("no violation found: {:?}", report.values),
        }
    }

    #[test]
    fn equilibrium_absorption_never_flags() {
        for nbar in [0.5f64, 2.0] {
            let dim = required_dim(nbar, 1e-11).unwrap();
            let pe = equilibrium_pe(nbar).unwrap();
            for gt in [0.8, 3.0, 7.5] {
                let stats = output_number_stats(nbar, pe, gt, dim).unwrap();
                let report = detect(&stats, 8).unwrap();
                assert_eq!(report.first_violation, None, "gt {gt}");
                // the fixed point is thermal, so values stay at P(n)^2
                for order in 1..=4usize {
                    let pn = stats.get(order);
                    assert_close(report.values[order - 1], pn * pn, 1e-12 * pn * pn);
                }
            }
        }
    }

    #[test]
    fn witness_scales_with_the_population_square() {
        let p = dist(&[0.3, 0.4, 0.2, 0.1]);
        let half = dist(&[0.15, 0.2, 0.1, 0.05]);
        for order in 1..=2 {
            let full = klyshko_value(&p, order).unwrap();
            let scaled = klyshko_value(&half, order).unwrap();
            assert_close(scaled, 0.25 * full, 1e-16);
        }
    }

    #[test]
    fn ratio_form_agrees_with_difference_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut probs: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = probs.iter().sum();
            for q in &mut probs {
                *q /= total;
            }
            let p = dist(&probs);
            let by_ratio = ratio_check(&p).unwrap();
            let by_value = klyshko_value(&p, 1).unwrap() < 0.0;
            assert_eq!(by_ratio, by_value, "probs {probs:?}");
        }
    }

    #[test]
    fn degenerate_and_short_inputs_are_refused() {
        let p = dist(&[0.5, 0.0, 0.5]);
        assert!(matches!(ratio_check(&p), Err(Error::UndefinedRatio)));
        let vacuum_like = dist(&[1.0, 0.0, 0.0]);
        assert_eq!(ratio_check(&vacuum_like).unwrap(), false);
        let short = dist(&[0.6, 0.4]);
        assert!(matches!(
            ratio_check(&short),
            Err(Error::DistributionTooShort { needed: 3, len: 2 })
        ));
        let p4 = dist(&[0.4, 0.3, 0.2, 0.1]);
        assert!(matches!(
            detect(&p4, 3),
            Err(Error::DistributionTooShort { needed: 5, len: 4 })
        ));
        assert!(klyshko_value(&p4, 0).is_err());
    }

    #[test]
    fn classical_mixtures_never_violate() {
        // random mixtures of Poisson light are classical; no order may dip
        // below noise level
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let len = 14;
        for _ in 0..200 {
            let components = rng.gen_range(1..=4);
            let mut probs = vec![0.0f64; len];
            let mut weights: Vec<f64> =
                (0..components).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            for &w in &weights {
                let mean = rng.gen_range(0.05..6.0);
                let pois = poisson_distribution(mean, len).unwrap();
                for (slot, q) in probs.iter_mut().zip(pois.iter()) {
                    *slot += w * q;
                }
            }
            let p = dist(&probs);
            let report = detect(&p, 12).unwrap();
            for value in &report.values {
                assert!(*value > -1e-12, "classical value {value}");
            }
        }
    }

    #[test]
    fn region_scan_layout_matches_direct_evaluation() {
        let nbars = [0.5f64, 1.0];
        let gts = [3.0f64, 5.0, 7.0];
        let grid = region_scan(&nbars, &gts, 0.0, 3).unwrap();
        assert_eq!(grid.cells().len(), 6);
        assert!(grid.all_detected());
        let dim = required_dim(1.0f64, 1e-9).unwrap().max(5);
        let stats = output_number_stats(1.0, 0.0, 7.0, dim).unwrap();
        let direct = detect(&stats, 3).unwrap().first_violation;
        assert_eq!(grid.first_violation(1, 2), direct);
    }

    #[test]
    fn f32_witness_smoke() {
        let p = NumberDistribution::new(vec![0.0f32, 1.0, 0.0]).unwrap();
        let value = klyshko_value(&p, 1).unwrap();
        assert!((value + 1.0).abs() < 1e-6);
        assert!(is_violation(value));
    }
}
