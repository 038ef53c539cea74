//! Log-domain helpers.
//!
//! Shell multiplicities such as `2^n M_B(E)` overflow any fixed-width type,
//! so spectra are carried as logarithms and combined with these routines.

use std::cmp::Ordering;

/// `ln(sum(exp(x_i)))`, accumulated in descending order of the terms.
///
/// The sort makes the result a function of the multiset of terms alone, so
/// two code paths that produce the same terms in a different order agree
/// bit for bit.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = terms
        .iter()
        .copied()
        .filter(|t| *t != f64::NEG_INFINITY)
        .collect();
    if sorted.is_empty() {
        return f64::NEG_INFINITY;
    }
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let max = sorted[0];
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = sorted.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(exp(a) - exp(b))` for `a >= b`; returns `-inf` when the difference
/// vanishes.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp_m1()).ln()
}

/// Natural log of a count.
pub fn ln_count(count: u64) -> f64 {
    (count as f64).ln()
}

/// `ln(M) - beta * E`, the log Boltzmann weight of a level block.
///
/// Every place that sums Boltzmann weights goes through here so the
/// terms are bitwise identical across code paths.
pub fn log_boltzmann_weight(multiplicity: u64, energy: f64, beta: f64) -> f64 {
    ln_count(multiplicity) - beta * energy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [-1.0, -2.0, -3.0];
        let direct = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_survives_huge_arguments() {
        let xs = [1000.0 * std::f64::consts::LN_2, 1000.0 * std::f64::consts::LN_2];
        let expected = 1001.0 * std::f64::consts::LN_2;
        assert!((log_sum_exp(&xs) - expected).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_is_order_independent() {
        let a = [0.3, -7.1, 2.2, 1e-3, -0.4];
        let mut b = a;
        b.reverse();
        assert_eq!(log_sum_exp(&a).to_bits(), log_sum_exp(&b).to_bits());
    }

    #[test]
    fn empty_and_neg_infinity() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 0.5), 0.5);
    }

    #[test]
    fn diff_exp() {
        let v = log_diff_exp(2.0f64.ln(), 0.5f64.ln());
        assert!((v - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(log_diff_exp(0.0, 0.0), f64::NEG_INFINITY);
    }
}
