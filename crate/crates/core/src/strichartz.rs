//! Exact rational arithmetic for wave Strichartz exponents on 𝕋².
//!
//! A pair `(q, r)` is *s-admissible* when
//! `1/q + 2/r = 1 − s`, `2/q + 1/r ≤ 1/2`, `2 < q ≤ ∞`, `2 ≤ r < ∞`, and
//! `(q̃, r̃)` is *dual s-admissible* when
//! `1/q̃ + 2/r̃ = 3 − s`, `2/q̃ + 1/r̃ ≥ 5/2`, `1 ≤ q̃ < 2`, `1 < r̃ ≤ 2`.
//! Exponents `q` are carried as reciprocals so that `q = ∞` is `1/q = 0`.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Denominator cap used when converting a float to a rational.
pub const DEFAULT_DENOMINATOR_CAP: u64 = 1_000_000_000_000;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation with denominator at most `cap`, by continued
/// fractions. Exact for floats that are close to a small-denominator rational.
pub fn rational_approx(x: f64, cap: u64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("cannot convert {x} to a rational")));
    }
    let exact = Rational::from_float(x).expect("finite float");
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    let cap = BigInt::from(cap);
    loop {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > cap {
            break;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &rest - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rest = frac.recip();
    }
    Ok(Rational::new(h1, k1))
}

/// `s_crit(k)`: `max(1 − 2/(k−1), 3/4 − 1/(k−1), 0)` for integer `k`, and
/// `max(1 − 2/(k−1), 3/4 − 1/(k−1), 3/4 − 3/(2k))` otherwise.
pub fn s_crit(k: &Rational) -> Result<Rational> {
    if *k < int(2) {
        return Err(Error::invalid(format!("s_crit needs k ≥ 2, got {k}")));
    }
    let km1 = k - int(1);
    let scaling = int(1) - int(2) / &km1;
    let conformal = rat(3, 4) - int(1) / &km1;
    let third = if k.is_integer() { int(0) } else { rat(3, 4) - rat(3, 2) / k };
    Ok(scaling.max(conformal).max(third))
}

pub fn s_crit_int(k: u32) -> Result<Rational> {
    s_crit(&int(k as i64))
}

/// Floating-point `s_crit` for real `k ≥ 2`, used for plotting.
pub fn s_crit_f64(k: f64) -> f64 {
    let base = (1.0 - 2.0 / (k - 1.0)).max(0.75 - 1.0 / (k - 1.0));
    if k.fract() == 0.0 {
        base.max(0.0)
    } else {
        base.max(0.75 - 1.5 / k)
    }
}

/// `(1/k, s_crit(k))` at `points` equally spaced values of `1/k` in `(0, 1/2]`.
pub fn figure_data(points: usize) -> Vec<(f64, f64)> {
    (1..=points)
        .map(|i| {
            let inv_k = 0.5 * i as f64 / points as f64;
            (inv_k, s_crit_f64(1.0 / inv_k))
        })
        .collect()
}

fn check_s(s: &Rational) -> Result<()> {
    if !s.is_positive() || *s >= int(1) {
        return Err(Error::invalid(format!("regularity must lie in (0, 1), got {s}")));
    }
    Ok(())
}

/// s-admissibility of `(q, r)` with `inv_q = 1/q`.
pub fn is_admissible(s: &Rational, inv_q: &Rational, r: &Rational) -> bool {
    if !r.is_positive() || inv_q.is_negative() {
        return false;
    }
    let inv_r = r.recip();
    inv_q + &inv_r * int(2) == int(1) - s
        && inv_q * int(2) + &inv_r <= rat(1, 2)
        && *inv_q < rat(1, 2)
        && *r >= int(2)
}

/// Dual s-admissibility of `(q̃, r̃)` with `inv_qd = 1/q̃`.
pub fn is_dual_admissible(s: &Rational, inv_qd: &Rational, rd: &Rational) -> bool {
    if !rd.is_positive() {
        return false;
    }
    let inv_rd = rd.recip();
    inv_qd + &inv_rd * int(2) == int(3) - s
        && inv_qd * int(2) + &inv_rd >= rat(5, 2)
        && *inv_qd <= int(1)
        && *inv_qd > rat(1, 2)
        && *rd > int(1)
        && *rd <= int(2)
}

/// Upper end of the `r` range of `K(s)`; `None` when unbounded (`s ≥ 3/4`).
fn r_upper(s: &Rational) -> Option<Rational> {
    let d = int(3) - s * int(4);
    d.is_positive().then(|| int(6) / d)
}

fn rd_lower(s: &Rational) -> Rational {
    (int(6) / (int(7) - s * int(4))).max(int(1))
}

fn rd_upper(s: &Rational) -> Rational {
    int(2) / (int(2) - s)
}

/// `(r, r̃) ∈ K(s) = [2, 6/(3−4s)₊] × [max{1, 6/(7−4s)}, 2/(2−s)]`.
pub fn in_k_set(s: &Rational, r: &Rational, rd: &Rational) -> bool {
    *r >= int(2)
        && r_upper(s).map_or(true, |u| *r <= u)
        && *rd >= rd_lower(s)
        && *rd <= rd_upper(s)
}

/// `J(r, r̃) = (r/r̃)·min{1, ((3−s)r̃ − 2)/((1−s)r − 2)}`; a nonpositive
/// denominator (where `1/q ≤ 0`) counts as `+∞` inside the minimum.
pub fn j_value(s: &Rational, r: &Rational, rd: &Rational) -> Result<Rational> {
    check_s(s)?;
    if !in_k_set(s, r, rd) {
        return Err(Error::invalid(format!("({r}, {rd}) lies outside K({s})")));
    }
    Ok(j_unchecked(s, r, rd))
}

fn j_unchecked(s: &Rational, r: &Rational, rd: &Rational) -> Rational {
    let ratio = r / rd;
    let den = (int(1) - s) * r - int(2);
    if !den.is_positive() {
        return ratio;
    }
    let num = (int(3) - s) * rd - int(2);
    ratio * (num / den).min(int(1))
}

/// Where the maximum of `J` over `K(s)` is attained.
#[derive(Clone, Debug, PartialEq)]
pub enum Argmax {
    Point { r: Rational, rd: Rational },
    /// `{(r, slope·r) : r_low ≤ r ≤ r_high}`.
    Segment { r_low: Rational, r_high: Rational, slope: Rational },
}

impl Argmax {
    /// Distance-style membership test with tolerance `tol` in both coordinates.
    pub fn contains_approx(&self, r: f64, rd: f64, tol: f64) -> bool {
        match self {
            Argmax::Point { r: a, rd: b } => (r - to_f64(a)).abs() <= tol && (rd - to_f64(b)).abs() <= tol,
            Argmax::Segment { r_low, r_high, slope } => {
                let (lo, hi, m) = (to_f64(r_low), to_f64(r_high), to_f64(slope));
                let rc = r.clamp(lo, hi);
                (r - rc).abs() <= tol && (rd - m * rc).abs() <= tol * (1.0 + m)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxJ {
    pub value: Rational,
    pub argmax: Argmax,
}

/// Closed-form maximum of `J` over `K(s)`:
/// `6/(3−4s)` for `s ≤ 1/4`, `(7−4s)/(3−4s)` for `1/4 ≤ s ≤ 1/2`, and
/// `(3−s)/(1−s)` for `s ≥ 1/2`.
pub fn max_j(s: &Rational) -> Result<MaxJ> {
    check_s(s)?;
    let quarter = rat(1, 4);
    let half = rat(1, 2);
    if *s <= quarter {
        let r = int(6) / (int(3) - s * int(4));
        return Ok(MaxJ { value: r.clone(), argmax: Argmax::Point { r, rd: int(1) } });
    }
    if *s <= half {
        let r = int(6) / (int(3) - s * int(4));
        let rd = int(6) / (int(7) - s * int(4));
        let value = (int(7) - s * int(4)) / (int(3) - s * int(4));
        return Ok(MaxJ { value, argmax: Argmax::Point { r, rd } });
    }
    let slope = (int(1) - s) / (int(3) - s);
    let r_low = int(6) / (int(7) - s * int(4)) / &slope;
    let cap_from_rd = rd_upper(s) / &slope;
    let r_high = match r_upper(s) {
        Some(u) => u.min(cap_from_rd),
        None => cap_from_rd,
    };
    Ok(MaxJ { value: (int(3) - s) / (int(1) - s), argmax: Argmax::Segment { r_low, r_high, slope } })
}

/// An admissible pair together with a dual admissible pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSpec {
    pub s: Rational,
    pub inv_q: Rational,
    pub r: Rational,
    pub inv_qd: Rational,
    pub rd: Rational,
}

impl PairSpec {
    /// `q`, or `None` for `q = ∞`.
    pub fn q(&self) -> Option<Rational> {
        (!self.inv_q.is_zero()).then(|| self.inv_q.recip())
    }

    pub fn qd(&self) -> Rational {
        self.inv_qd.recip()
    }

    /// `q/q̃`, or `None` when `q = ∞`.
    pub fn q_ratio(&self) -> Option<Rational> {
        (!self.inv_q.is_zero()).then(|| &self.inv_qd / &self.inv_q)
    }

    pub fn r_ratio(&self) -> Rational {
        &self.r / &self.rd
    }

    /// `1/q̃ − k/q`, the power of `T` gained by Hölder in time.
    pub fn time_exponent(&self, k: u32) -> Rational {
        &self.inv_qd - &self.inv_q * int(k as i64)
    }

    /// All four defining relations, checked exactly.
    pub fn is_valid(&self) -> bool {
        is_admissible(&self.s, &self.inv_q, &self.r) && is_dual_admissible(&self.s, &self.inv_qd, &self.rd)
    }

    fn from_rs(s: &Rational, r: Rational, rd: Rational) -> PairSpec {
        let inv_q = int(1) - s - int(2) / &r;
        let inv_qd = int(3) - s - int(2) / &rd;
        PairSpec { s: s.clone(), inv_q, r, inv_qd, rd }
    }

    /// `min(q/q̃, r/r̃) ≥ k`, strictly when `strict`.
    fn meets(&self, k: u32, strict: bool) -> bool {
        let k = int(k as i64);
        let r_ok = if strict { self.r_ratio() > k } else { self.r_ratio() >= k };
        let q_ok = match self.q_ratio() {
            None => true,
            Some(qr) => {
                if strict {
                    qr > k
                } else {
                    qr >= k
                }
            }
        };
        r_ok && q_ok
    }
}

/// Selected pair and the Hölder time exponent `1/q̃ − k/q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairChoice {
    pub pair: PairSpec,
    pub time_exponent: Rational,
}

/// An admissible/dual admissible pair with `q ≥ k q̃` and `r ≥ k r̃` (strict
/// for `k ∈ {2, 3}`), taken from the maximising set of `J` with the smallest
/// `r`. When the maximiser has the inadmissible `r̃ = 1`, `r̃` is moved into
/// the open interval `(1, min(r/k, 2/(2−s)))`.
pub fn choose_pair(k: u32, s: &Rational) -> Result<PairChoice> {
    check_s(s)?;
    if k < 2 {
        return Err(Error::invalid(format!("degree must be at least 2, got {k}")));
    }
    let strict = k <= 3;
    let best = max_j(s)?;
    let kk = int(k as i64);
    let feasible_value = if strict { best.value > kk } else { best.value >= kk };
    if !feasible_value {
        return Err(Error::Infeasible(format!("max J({s}) = {} is below the required {k}", best.value)));
    }
    let (r, rd) = match best.argmax {
        Argmax::Point { r, rd } => (r, rd),
        Argmax::Segment { r_low, slope, .. } => {
            let rd = &slope * &r_low;
            (r_low, rd)
        }
    };
    let mut pair = PairSpec::from_rs(s, r, rd);
    if !pair.is_valid() || !pair.meets(k, strict) {
        let top = (&pair.r / &kk).min(rd_upper(s));
        if top <= int(1) {
            return Err(Error::Infeasible(format!("no admissible r̃ above 1 for k = {k}, s = {s}")));
        }
        let rd = (int(1) + top) / int(2);
        pair = PairSpec::from_rs(s, pair.r.clone(), rd);
    }
    if !pair.is_valid() || !pair.meets(k, strict) {
        return Err(Error::Infeasible(format!("no admissible pair meets the ratio {k} at s = {s}")));
    }
    let time_exponent = pair.time_exponent(k);
    Ok(PairChoice { pair, time_exponent })
}

/// `choose_pair` for a float `s`, converted with [`DEFAULT_DENOMINATOR_CAP`].
pub fn choose_pair_f64(k: u32, s: f64) -> Result<PairChoice> {
    choose_pair(k, &rational_approx(s, DEFAULT_DENOMINATOR_CAP)?)
}

/// Smallest `s` (to within `tol`) at which [`choose_pair`] succeeds, by bisection on `[lo, hi]`.
pub fn feasibility_threshold(k: u32, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let feasible = |s: f64| choose_pair_f64(k, s).is_ok();
    if !feasible(hi) {
        return Err(Error::Infeasible(format!("k = {k} is infeasible at the upper end s = {hi}")));
    }
    let (mut a, mut b) = (lo, hi);
    if feasible(a) {
        return Ok(a);
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if feasible(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn s_crit_table() {
        assert_eq!(s_crit_int(2).unwrap(), int(0));
        assert_eq!(s_crit_int(3).unwrap(), rat(1, 4));
        assert_eq!(s_crit_int(4).unwrap(), rat(5, 12));
        assert_eq!(s_crit_int(5).unwrap(), rat(1, 2));
        assert_eq!(s_crit(&rat(5, 2)).unwrap(), rat(3, 20));
        assert!(s_crit(&rat(3, 2)).is_err());
        assert!((s_crit_f64(2.5) - 0.15).abs() < 1e-15);
        assert_eq!(figure_data(200).len(), 200);
    }

    #[test]
    fn admissibility_examples() {
        let half = rat(1, 2);
        assert!(is_admissible(&half, &rat(1, 6), &int(6)));
        assert!(!is_admissible(&half, &rat(1, 4), &int(8)));
        assert!(is_dual_admissible(&half, &int(1), &rat(4, 3)));
        assert!(!is_dual_admissible(&half, &rat(1, 2), &int(2)));
        // r below 2/(1 − s) would need 1/q < 0
        assert!(!is_admissible(&half, &rat(-1, 6), &int(3)));
    }

    #[test]
    fn j_examples() {
        let half = rat(1, 2);
        assert_eq!(j_value(&half, &int(6), &rat(6, 5)).unwrap(), int(5));
        let s = rat(1, 10);
        let j = j_value(&s, &(int(6) / rat(26, 10)), &int(1)).unwrap();
        assert!((to_f64(&j) - 2.30769).abs() < 1e-5);
        assert!(j_value(&half, &int(7), &rat(6, 5)).is_err());
        // on the ray r̃ = (1−s)/(3−s)·r the minimum is attained at 1
        let s = rat(3, 5);
        let r = int(4);
        let rd = (int(1) - &s) / (int(3) - &s) * &r;
        assert_eq!(j_unchecked(&s, &r, &rd), (int(3) - &s) / (int(1) - &s));
    }

    #[test]
    fn max_j_examples_and_continuity() {
        assert_eq!(max_j(&rat(1, 2)).unwrap().value, int(5));
        assert_eq!(max_j(&rat(1, 4)).unwrap().value, int(3));
        let q = rat(1, 4);
        assert_eq!(int(6) / (int(3) - &q * int(4)), (int(7) - &q * int(4)) / (int(3) - &q * int(4)));
        let h = rat(1, 2);
        assert_eq!((int(7) - &h * int(4)) / (int(3) - &h * int(4)), (int(3) - &h) / (int(1) - &h));
        assert!(max_j(&int(0)).is_err());
    }

    #[test]
    fn segment_breakpoint() {
        // below 3 − √6 the segment ends at 6/(3−4s), above it at the r̃ cap
        let lo = max_j(&rat(11, 20)).unwrap();
        let hi = max_j(&rat(56, 100)).unwrap();
        match (lo.argmax, hi.argmax) {
            (Argmax::Segment { r_high: a, .. }, Argmax::Segment { r_high: b, slope, .. }) => {
                let s = rat(11, 20);
                assert_eq!(a, int(6) / (int(3) - &s * int(4)));
                let s = rat(56, 100);
                assert_eq!(b, rd_upper(&s) / slope);
            }
            _ => panic!("expected segments"),
        }
    }

    #[test]
    fn worked_pair() {
        let c = choose_pair(4, &rat(5, 12)).unwrap();
        assert_eq!(c.pair.r, rat(9, 2));
        assert_eq!(c.pair.rd, rat(9, 8));
        assert_eq!(c.pair.q().unwrap(), rat(36, 5));
        assert_eq!(c.pair.qd(), rat(36, 29));
        assert_eq!(c.pair.q_ratio().unwrap(), rat(29, 5));
        assert_eq!(c.pair.r_ratio(), int(4));
        assert_eq!(c.time_exponent, rat(1, 4));
    }

    #[test]
    fn endpoint_and_case_one_perturbation() {
        assert!(matches!(choose_pair(3, &rat(1, 4)), Err(Error::Infeasible(_))));
        let c = choose_pair(2, &rat(1, 5)).unwrap();
        assert!(c.pair.is_valid());
        assert!(c.pair.r_ratio() > int(2));
        assert!(c.pair.q_ratio().map_or(true, |q| q > int(2)));
        assert!(choose_pair(4, &rat(2, 5)).is_err());
    }

    #[test]
    fn rational_conversion() {
        assert_eq!(rational_approx(5.0 / 12.0, DEFAULT_DENOMINATOR_CAP).unwrap(), rat(5, 12));
        assert_eq!(rational_approx(0.1, 1000).unwrap(), rat(1, 10));
        assert_eq!(rational_approx(-2.5, 10).unwrap(), rat(-5, 2));
        let pi = rational_approx(std::f64::consts::PI, 1000).unwrap();
        assert_eq!(pi, rat(355, 113));
    }

    proptest! {
        #[test]
        fn chosen_pairs_satisfy_all_relations(k in 2u32..=8, num in 1i64..1000) {
            let s = rat(num, 1000);
            if let Ok(c) = choose_pair(k, &s) {
                let p = &c.pair;
                prop_assert!(p.is_valid());
                prop_assert_eq!(&p.inv_q + int(2) / &p.r, int(1) - &s);
                prop_assert_eq!(&p.inv_qd + int(2) / &p.rd, int(3) - &s);
                prop_assert!(p.r_ratio() >= int(k as i64));
                prop_assert!(p.q_ratio().map_or(true, |q| q >= int(k as i64)));
            }
        }

        #[test]
        fn closed_form_maximum_dominates_samples(num in 1i64..100, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let s = rat(num, 100);
            let best = max_j(&s).unwrap();
            let lo = to_f64(&rd_lower(&s));
            let hi = to_f64(&rd_upper(&s));
            let r_hi = r_upper(&s).map_or(60.0, |u| to_f64(&u).min(60.0));
            let r = rational_approx(2.0 + a * (r_hi - 2.0), 1 << 20).unwrap();
            let rd = rational_approx(lo + b * (hi - lo), 1 << 20).unwrap();
            if in_k_set(&s, &r, &rd) {
                prop_assert!(j_unchecked(&s, &r, &rd) <= best.value);
            }
        }
    }
}
