//! Time-unit conversions.
//!
//! Everything inside the solver runs per minute. Wages and the AV cost enter
//! and leave the library in $/hour.

pub const MINUTES_PER_HOUR: f64 = 60.0;

/// $/hour -> $/min.
#[inline]
pub fn hourly_to_per_minute(rate: f64) -> f64 {
    rate / MINUTES_PER_HOUR
}

/// $/min -> $/hour.
#[inline]
pub fn per_minute_to_hourly(rate: f64) -> f64 {
    rate * MINUTES_PER_HOUR
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thirty_per_hour_is_half_per_minute() {
        assert_eq!(hourly_to_per_minute(30.0), 0.5);
        assert_eq!(per_minute_to_hourly(0.5), 30.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip_within_ulps(x in 1e-6f64..1e6) {
            let back = per_minute_to_hourly(hourly_to_per_minute(x));
            prop_assert!((back - x).abs() <= 4.0 * f64::EPSILON * x);
        }
    }
}
