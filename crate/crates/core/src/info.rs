//! Scalar information-theoretic helpers.

use crate::error::{Error, Result};

/// `h(e) = −e log2 e − (1−e) log2(1−e)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::InvalidParameter {
            name: "e",
            value: e,
            reason: "binary entropy is defined on [0, 1]",
        });
    }
    Ok(h(e))
}

/// Binary entropy for arguments already known to lie in `[0, 1]`.
pub(crate) fn h(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        return 0.0;
    }
    -e * e.log2() - (1.0 - e) * (1.0 - e).log2()
}

/// Probability of an odd number of flips among independent events.
pub(crate) fn odd_parity(rates: impl IntoIterator<Item = f64>) -> f64 {
    let even_minus_odd: f64 = rates.into_iter().map(|e| 1.0 - 2.0 * e).product();
    0.5 * (1.0 - even_minus_odd)
}

/// Shannon entropy of a distribution, in bits.
pub(crate) fn shannon(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}
