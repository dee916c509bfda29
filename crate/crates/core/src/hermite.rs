//! Hermite polynomials `H_ℓ(x; σ)` with variance parameter and the Wick
//! algebra built on them.
//!
//! `H_ℓ(x; σ)` are the Taylor coefficients of `e^{tx − σt²/2}`:
//! `H₀ = 1`, `H₁ = x`, `H₂ = x² − σ`, `H₃ = x³ − 3σx`, and in general
//! `H_{ℓ+1} = x·H_ℓ − ℓσ·H_{ℓ−1}`. At `σ = 0` they reduce to `x^ℓ`.

use crate::error::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: usize = 16;

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderOutOfRange { order, max: MAX_ORDER });
    }
    Ok(())
}

/// `H_ℓ(x; σ)`.
pub fn hermite(order: usize, x: f64, sigma: f64) -> Result<f64> {
    check_order(order)?;
    if sigma < 0.0 {
        return Err(Error::invalid(format!("variance must be nonnegative, got {sigma}")));
    }
    Ok(hermite_unchecked(order, x, sigma))
}

pub(crate) fn hermite_unchecked(order: usize, x: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return x.powi(order as i32);
    }
    let (mut prev, mut cur) = (1.0, x);
    if order == 0 {
        return prev;
    }
    for l in 1..order {
        let next = x * cur - l as f64 * sigma * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[ℓ] = H_ℓ(x; σ)` for `ℓ = 0..out.len()`.
pub fn hermite_table(x: f64, sigma: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for l in 1..out.len().saturating_sub(1) {
        out[l + 1] = x * out[l] - l as f64 * sigma * out[l - 1];
    }
}

/// Binomial coefficient as a float (exact for `n ≤ 60`).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1u128;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as f64
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `Σ_ℓ C(k,ℓ) x^{k−ℓ} H_ℓ(y; σ)`, which equals `H_k(x + y; σ)`.
pub fn hermite_translate(k: usize, x: f64, y: f64, sigma: f64) -> Result<f64> {
    check_order(k)?;
    let mut h = [0.0; MAX_ORDER + 1];
    hermite_table(y, sigma, &mut h[..=k]);
    let terms = (0..=k).map(|l| binomial(k, l) * x.powi((k - l) as i32) * h[l]);
    Ok(crate::stats::kahan_sum(terms))
}

/// Coefficients `c_m` with `x^k = Σ_m c_m H_{k−2m}(x; σ)`, as pairs `(m, c_m)`.
pub fn monomial_expansion(k: usize, sigma: f64) -> Result<Vec<(usize, f64)>> {
    check_order(k)?;
    Ok((0..=k / 2)
        .map(|m| {
            let pairing = factorial(2 * m) / (2f64.powi(m as i32) * factorial(m));
            (m, binomial(k, 2 * m) * pairing * sigma.powi(m as i32))
        })
        .collect())
}

/// `𝔼[H_k(f; σ_f) H_m(g; σ_g)] = δ_{km} k! 𝔼[fg]^k` for jointly Gaussian `f, g`.
pub fn wick_pair_expectation(k: usize, m: usize, covariance: f64) -> f64 {
    if k != m {
        return 0.0;
    }
    factorial(k) * covariance.powi(k as i32)
}

/// `(p − 1)^{k/2}·‖X‖_{L²}`, the `L^p` bound for an element of the `k`-th chaos.
pub fn hypercontractivity_bound(k: usize, p: f64, l2norm: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::invalid(format!("hypercontractivity needs p ≥ 2, got {p}")));
    }
    Ok((p - 1.0).powf(k as f64 / 2.0) * l2norm)
}

/// `𝔼 g^p` for a standard Gaussian: `(p−1)!!` for even `p`, zero for odd.
pub fn gaussian_moment(p: usize) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    (1..p).step_by(2).fold(1.0, |acc, i| acc * i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Taylor coefficient of `t ↦ e^{tx − σt²/2}` via a trapezoidal Cauchy integral.
    fn taylor_oracle(l: usize, x: f64, sigma: f64) -> f64 {
        let points = 256;
        let radius = 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..points {
            let t = Complex64::from_polar(radius, 2.0 * PI * j as f64 / points as f64);
            acc += (t * x - t * t * sigma / 2.0).exp() / t.powu(l as u32);
        }
        factorial(l) * acc.re / points as f64
    }

    /// Sum of absolute values of the explicit expansion, used to scale tolerances.
    fn magnitude(l: usize, x: f64, sigma: f64) -> f64 {
        (0..=l / 2)
            .map(|b| {
                factorial(l) / (factorial(l - 2 * b) * factorial(b))
                    * x.abs().powi((l - 2 * b) as i32)
                    * (sigma / 2.0).powi(b as i32)
            })
            .sum()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(hermite(2, 2.0, 1.0).unwrap(), 3.0);
        assert_eq!(hermite(0, 1.7, 0.3).unwrap(), 1.0);
        assert_eq!(hermite(4, 0.0, 2.0).unwrap(), 12.0);
        assert_eq!(hermite(3, 1.0, 2.0).unwrap(), -5.0);
        assert_eq!(hermite(5, 1.3, 0.0).unwrap(), 1.3f64.powi(5));
        assert!(matches!(hermite(17, 0.0, 1.0), Err(Error::OrderOutOfRange { order: 17, .. })));
        assert!(hermite(16, 0.0, 1.0).is_ok());
    }

    #[test]
    fn translate_examples() {
        assert_eq!(hermite_translate(2, 1.0, 1.0, 1.0).unwrap(), 3.0);
        assert_eq!(hermite_translate(5, 0.0, 0.7, 1.5).unwrap(), hermite(5, 0.7, 1.5).unwrap());
        // (2)³H₀ + 3·2²·H₁(0) + 3·2·H₂(0;1) + H₃(0;1) = 8 + 0 − 6 + 0
        assert_eq!(hermite_translate(3, 2.0, 0.0, 1.0).unwrap(), 2.0);
        assert_eq!(hermite(3, 2.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(monomial_expansion(2, 1.0).unwrap(), vec![(0, 1.0), (1, 1.0)]);
        assert_eq!(monomial_expansion(1, 3.0).unwrap(), vec![(0, 1.0)]);
        let c = monomial_expansion(4, 1.0).unwrap();
        assert_eq!(c, vec![(0, 1.0), (1, 6.0), (2, 3.0)]);
        let at2: f64 = c.iter().map(|(m, cm)| cm * hermite(4 - 2 * m, 2.0, 1.0).unwrap()).sum();
        assert_eq!(at2, 16.0);
    }

    #[test]
    fn pairing_and_hypercontractivity_examples() {
        assert_eq!(wick_pair_expectation(2, 2, 1.0), 2.0);
        assert_eq!(wick_pair_expectation(1, 3, 0.4), 0.0);
        assert_eq!(wick_pair_expectation(1, 1, 0.4), 0.4);
        assert_eq!(hypercontractivity_bound(3, 2.0, 1.25).unwrap(), 1.25);
        let b = hypercontractivity_bound(2, 4.0, 2f64.sqrt()).unwrap();
        assert!((b - 3.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(hypercontractivity_bound(2, 1.5, 1.0).is_err());
    }

    #[test]
    fn fourth_moment_of_second_chaos() {
        // 𝔼(g² − 1)⁴ by binomial expansion of the moments
        let e: f64 = (0..=4)
            .map(|j| binomial(4, j) * (-1f64).powi((4 - j) as i32) * gaussian_moment(2 * j))
            .sum();
        assert_eq!(e, 60.0);
        let l4 = e.powf(0.25);
        assert!((l4 - 2.7832).abs() < 1e-4);
        let l2 = wick_pair_expectation(2, 2, 1.0).sqrt();
        assert!(l4 <= hypercontractivity_bound(2, 4.0, l2).unwrap());
    }

    #[test]
    fn table_matches_scalar() {
        let mut t = [0.0; 9];
        hermite_table(0.8, 1.7, &mut t);
        for (l, v) in t.iter().enumerate() {
            assert!((v - hermite(l, 0.8, 1.7).unwrap()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_generating_function(l in 0usize..=8, x in -3.0f64..3.0, sigma in 0.1f64..4.0) {
            let h = hermite(l, x, sigma).unwrap();
            let oracle = taylor_oracle(l, x, sigma);
            prop_assert!((h - oracle).abs() <= 1e-8 * magnitude(l, x, sigma));
        }

        #[test]
        fn scaling_law(l in 0usize..=10, x in -4.0f64..4.0, sigma in 0.05f64..6.0) {
            let lhs = hermite(l, x, sigma).unwrap();
            let rhs = sigma.powf(l as f64 / 2.0) * hermite(l, x / sigma.sqrt(), 1.0).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * magnitude(l, x, sigma).max(1.0));
        }

        #[test]
        fn translation_identity(k in 0usize..=8, x in -3.0f64..3.0, y in -3.0f64..3.0, sigma in 0.0f64..4.0) {
            let lhs = hermite_translate(k, x, y, sigma).unwrap();
            let rhs = hermite(k, x + y, sigma).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * magnitude(k, x.abs() + y.abs(), sigma).max(1.0));
        }

        #[test]
        fn monomials_reassemble(k in 0usize..=12, x in -2.0f64..2.0, sigma in 0.0f64..3.0) {
            let c = monomial_expansion(k, sigma).unwrap();
            let sum: f64 = c.iter().map(|(m, cm)| cm * hermite(k - 2 * m, x, sigma).unwrap()).sum();
            prop_assert!((sum - x.powi(k as i32)).abs() <= 1e-10 * magnitude(k, x, sigma).max(1.0));
        }
    }
}
