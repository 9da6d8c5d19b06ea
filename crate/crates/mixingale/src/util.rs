//! Small numeric helpers shared across the crate.

/// Compensated (Neumaier) summation.
///
/// Block averages and probability-weight checks compare against absolute
/// tolerances of 1e-12 on spaces with up to a million atoms, where a naive
/// left-to-right sum can lose exactly the digits under test.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut compensation = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Weighted mean of `values` under nonnegative `weights` summing to one.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    neumaier_sum(values.iter().zip(weights).map(|(v, w)| v * w))
}

/// Weighted population standard deviation.
pub fn weighted_std(values: &[f64], weights: &[f64]) -> f64 {
    let mean = weighted_mean(values, weights);
    let var = neumaier_sum(
        values
            .iter()
            .zip(weights)
            .map(|(v, w)| (v - mean) * (v - mean) * w),
    );
    var.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_digits() {
        // 1 + 1e-16 repeated: naive summation drops every tiny term.
        let n = 1_000_000;
        let mut values = vec![1e-16; n];
        values.push(1.0);
        let total = neumaier_sum(values.iter().copied());
        assert!((total - (1.0 + n as f64 * 1e-16)).abs() < 1e-15);
    }

    #[test]
    fn weighted_stats_on_fair_coin() {
        let values = [1.0, -1.0];
        let weights = [0.5, 0.5];
        assert_eq!(weighted_mean(&values, &weights), 0.0);
        assert!((weighted_std(&values, &weights) - 1.0).abs() < 1e-15);
    }
}
