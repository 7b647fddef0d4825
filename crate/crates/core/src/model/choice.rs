//! Discrete-choice and waiting-time formulas.

use ndarray::Array2;

use super::units::MINUTES_PER_HOUR;
use super::ModelError;

/// Numerically stable 1 / (1 + e^{-z}).
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Passenger generalized cost of an (i, j) trip: waiting time valued at
/// `alpha` plus the fare over the trip time.
#[inline]
pub fn generalized_cost(alpha: f64, w_p: f64, r: f64, t: f64) -> f64 {
    alpha * w_p + r * t
}

/// Binary-logit ride-sourcing demand against an outside option of cost `c0`.
#[inline]
pub fn demand_rate(lambda0: f64, c: f64, c0: f64, eps: f64) -> f64 {
    if lambda0 == 0.0 || c == f64::INFINITY {
        return 0.0;
    }
    lambda0 * logistic(eps * (c0 - c))
}

/// Square-root law for the average passenger wait in a zone.
pub fn passenger_wait(wait_coeff: f64, idle: f64) -> Result<f64, ModelError> {
    if idle > 0.0 && idle.is_finite() {
        Ok(wait_coeff / idle.sqrt())
    } else {
        Err(ModelError::NoIdleVehicles { idle })
    }
}

/// Logit labour supply: drivers out of `n0` who work at hourly wage `q`.
#[inline]
pub fn driver_supply(n0: f64, q: f64, q0: f64, sigma: f64) -> f64 {
    n0 * logistic(sigma * (q - q0))
}

/// dF_d/dq for the logit supply, per driver in the pool.
#[inline]
pub fn driver_supply_slope(q: f64, q0: f64, sigma: f64) -> f64 {
    let f = logistic(sigma * (q - q0));
    sigma * f * (1.0 - f)
}

/// Repositioning choice probabilities of idle human drivers.
///
/// Earnings per trip `ebar` are in $ and times in minutes; the utility of a
/// destination is its expected earning rate in $/hour, scaled by `eta`.
/// `ebar[j]`/`tbar[j]` are `None` for zones without outbound demand; such
/// destinations get a utility 10/η below the worst defined alternative of the
/// row. `w_d[j]` must be finite wherever `tbar[j]` is defined.
pub fn reposition_probs(
    ebar: &[Option<f64>],
    tbar: &[Option<f64>],
    w_d: &[f64],
    t: &Array2<f64>,
    eta: f64,
) -> Array2<f64> {
    let m = ebar.len();
    let mut p = Array2::zeros((m, m));
    let mut utility = vec![f64::NAN; m];
    for i in 0..m {
        let mut lowest = f64::INFINITY;
        for j in 0..m {
            utility[j] = match (ebar[j], tbar[j]) {
                (Some(e), Some(tb)) if w_d[j].is_finite() => {
                    let transit = if i == j { 0.0 } else { t[[i, j]] };
                    let u = MINUTES_PER_HOUR * e / (w_d[j] + transit + tb);
                    lowest = lowest.min(u);
                    u
                }
                _ => f64::NAN,
            };
        }
        if eta == 0.0 || !lowest.is_finite() {
            p.row_mut(i).fill(1.0 / m as f64);
            continue;
        }
        let fallback = lowest - 10.0 / eta;
        let mut top = f64::NEG_INFINITY;
        for u in utility.iter_mut() {
            if u.is_nan() {
                *u = fallback;
            }
            top = top.max(eta * *u);
        }
        let mut total = 0.0;
        for j in 0..m {
            let w = (eta * utility[j] - top).exp();
            p[[i, j]] = w;
            total += w;
        }
        p.row_mut(i).mapv_inplace(|w| w / total);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn generalized_cost_examples() {
        assert_eq!(generalized_cost(3.0, 1.0, 1.0, 10.0), 13.0);
        assert_eq!(generalized_cost(3.0, 0.0, 0.0, 10.0), 0.0);
        assert_eq!(generalized_cost(3.0, 1.0, 0.5, 20.0), 13.0);
    }

    #[test]
    fn demand_rate_examples() {
        assert_eq!(demand_rate(10.0, 7.0, 7.0, 0.12), 5.0);
        assert_eq!(demand_rate(10.0, f64::INFINITY, 7.0, 0.12), 0.0);
        assert!(demand_rate(10.0, 1e6, 7.0, 0.12) < 1e-300);
        // 10 / (1 + e^{-1.2}), evaluated with 30-digit arithmetic.
        assert_relative_eq!(
            demand_rate(10.0, 20.0, 30.0, 0.12),
            7.685_247_834_990_176,
            max_relative = 1e-14
        );
        // No overflow on the other tail either.
        assert_relative_eq!(demand_rate(10.0, -1e6, 7.0, 0.12), 10.0);
    }

    #[test]
    fn passenger_wait_examples() {
        assert_eq!(passenger_wait(43.0, 1849.0).unwrap(), 1.0);
        assert_eq!(passenger_wait(43.0, 7396.0).unwrap(), 0.5);
        assert_eq!(passenger_wait(1.0, 1.0).unwrap(), 1.0);
        assert!(passenger_wait(43.0, 0.0).is_err());
        assert!(passenger_wait(43.0, -1.0).is_err());
    }

    #[test]
    fn driver_supply_examples() {
        assert_relative_eq!(driver_supply(10_000.0, 29.34, 29.34, 0.17), 5000.0);
        // 10000 / (1 + e^{0.17 * 29.34}) with 30-digit arithmetic.
        assert_relative_eq!(
            driver_supply(10_000.0, 0.0, 29.34, 0.17),
            67.744_472_787_974_61,
            max_relative = 1e-12
        );
        // 10000 / (1 + e^{0.17 * 3.14}) with 30-digit arithmetic.
        assert_relative_eq!(
            driver_supply(10_000.0, 26.2, 29.34, 0.17),
            3_696.310_352_997_437_5,
            max_relative = 1e-12
        );
        assert_relative_eq!(driver_supply(10_000.0, 1e5, 29.34, 0.17), 10_000.0);
    }

    #[test]
    fn reposition_eta_zero_is_uniform() {
        let t = array![[1.0, 5.0, 7.0], [5.0, 1.0, 2.0], [7.0, 2.0, 1.0]];
        let e = [Some(10.0), Some(3.0), Some(8.0)];
        let tb = [Some(10.0), Some(12.0), Some(5.0)];
        let p = reposition_probs(&e, &tb, &[1.0, 2.0, 3.0], &t, 0.0);
        for v in p.iter() {
            assert_relative_eq!(*v, 1.0 / 3.0);
        }
    }

    #[test]
    fn reposition_identical_zones_split_evenly() {
        let t = array![[0.0, 0.0], [0.0, 0.0]];
        let e = [Some(10.0), Some(10.0)];
        let tb = [Some(10.0), Some(10.0)];
        let p = reposition_probs(&e, &tb, &[2.0, 2.0], &t, 0.1);
        for v in p.iter() {
            assert_relative_eq!(*v, 0.5);
        }
    }

    #[test]
    fn reposition_two_choice_closed_form() {
        // Staying in zone 1 is worth ln(3)/η more than moving to zone 2,
        // so the two-choice logit gives 3/(3+1).
        let eta = 0.1;
        let t12 = 4.0;
        let (wd2, tb2, e2) = (2.0, 10.0, 8.0);
        let u12 = 60.0 * e2 / (wd2 + t12 + tb2);
        let u11 = u12 + 3f64.ln() / eta;
        let (wd1, tb1) = (3.0, 9.0);
        let e1 = u11 * (wd1 + tb1) / 60.0;
        let t = array![[1.0, t12], [t12, 1.0]];
        let p = reposition_probs(&[Some(e1), Some(e2)], &[Some(tb1), Some(tb2)], &[wd1, wd2], &t, eta);
        assert_relative_eq!(p[[0, 0]], 0.75, max_relative = 1e-12);
        assert_relative_eq!(p[[0, 1]], 0.25, max_relative = 1e-12);
    }

    #[test]
    fn undefined_zone_is_effectively_never_chosen() {
        let t = array![[1.0, 1.0], [1.0, 1.0]];
        let p = reposition_probs(&[Some(10.0), None], &[Some(10.0), None], &[1.0, f64::INFINITY], &t, 0.1);
        // utility gap of 10/η gives odds e^{-10}
        assert_relative_eq!(p[[0, 1]] / p[[0, 0]], (-10.0f64).exp(), max_relative = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn demand_strictly_decreasing_in_fare_and_wait(
            l0 in 0.01f64..50.0,
            alpha in 0.1f64..5.0,
            w in 0.1f64..20.0,
            r in 0.05f64..5.0,
            t in 1.0f64..40.0,
            c0 in 0.0f64..80.0,
            eps in 0.01f64..0.5,
        ) {
            let base = demand_rate(l0, generalized_cost(alpha, w, r, t), c0, eps);
            let h = 1e-3;
            let up_r = demand_rate(l0, generalized_cost(alpha, w, r + h, t), c0, eps);
            let up_w = demand_rate(l0, generalized_cost(alpha, w + h, r, t), c0, eps);
            prop_assert!(up_r <= base && up_w <= base);
            // strict wherever the logistic is not saturated in f64
            if (eps * (c0 - generalized_cost(alpha, w, r, t))).abs() < 20.0 {
                prop_assert!(up_r < base);
                prop_assert!(up_w < base);
                prop_assert!(base > 0.0 && base < l0);
            }
        }

        #[test]
        fn supply_strictly_increasing(q in 0.0f64..80.0, q0 in 5.0f64..50.0, sigma in 0.01f64..0.5) {
            let lo = driver_supply(10_000.0, q, q0, sigma);
            let hi = driver_supply(10_000.0, q + 1e-3, q0, sigma);
            prop_assert!(hi >= lo);
            if (sigma * (q - q0)).abs() < 20.0 {
                prop_assert!(hi > lo);
            }
        }

        #[test]
        fn probability_rows_and_shift_invariance(
            m in 1usize..8,
            seed in proptest::collection::vec(0.5f64..30.0, 64),
            eta in 0.0f64..3.0,
            shift in -50.0f64..50.0,
        ) {
            let t = Array2::from_shape_fn((m, m), |(i, j)| seed[(i * 7 + j) % 64]);
            let e: Vec<_> = (0..m).map(|j| Some(seed[(j * 3 + 1) % 64])).collect();
            let tb: Vec<_> = (0..m).map(|j| Some(seed[(j * 5 + 2) % 64])).collect();
            let wd: Vec<_> = (0..m).map(|j| seed[(j * 11 + 3) % 64]).collect();
            let p = reposition_probs(&e, &tb, &wd, &t, eta);
            for row in p.rows() {
                prop_assert!(row.iter().all(|v| *v >= 0.0));
                prop_assert!((row.sum() - 1.0).abs() <= 1e-9);
            }
            // A constant added to every utility of a row leaves the row unchanged;
            // scaling ē_j by (1 + shift/u_ij) is not constant, so check the
            // softmax directly on shifted utilities instead.
            for i in 0..m {
                let u: Vec<f64> = (0..m).map(|j| {
                    let transit = if i == j { 0.0 } else { t[[i, j]] };
                    60.0 * e[j].unwrap() / (wd[j] + transit + tb[j].unwrap())
                }).collect();
                let soft = |shift: f64| {
                    let top = u.iter().map(|x| eta * (x + shift)).fold(f64::NEG_INFINITY, f64::max);
                    let w: Vec<f64> = u.iter().map(|x| (eta * (x + shift) - top).exp()).collect();
                    let s: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / s).collect::<Vec<_>>()
                };
                let shifted = soft(shift);
                for j in 0..m {
                    prop_assert!((shifted[j] - p[[i, j]]).abs() <= 1e-9);
                }
            }
        }
    }
}
