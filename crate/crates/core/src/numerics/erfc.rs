//! Complementary error function.
//!
//! Below `SERIES_SPLIT` the positive-term series for `erf` is used and
//! `erfc = 1 - erf`; above it the Laplace continued fraction is evaluated
//! with the modified Lentz algorithm. Negative arguments use the
//! reflection `erfc(-x) = 2 - erfc(x)`.

use crate::Scalar;

const SERIES_SPLIT: f64 = 1.0;
const MAX_TERMS: usize = 20_000;

/// `erfc(x) = (2 / sqrt(pi)) * int_x^inf exp(-t^2) dt`.
pub fn erfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x.is_infinite() {
        return T::zero();
    }
    if x < T::lit(SERIES_SPLIT) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// `erf(x) = 1 - erfc(x)`, computed without cancellation for small `|x|`.
pub fn erf<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.abs() < T::lit(SERIES_SPLIT) {
        erf_series(x)
    } else {
        x.signum() * (T::one() - erfc(x.abs()))
    }
}

/// `exp(-x^2)` with the rounding error of `x*x` folded back in.
fn exp_neg_square<T: Scalar>(x: T) -> T {
    let sq = x * x;
    let err = x.mul_add(x, -sq);
    (-sq).exp() * (T::one() - err)
}

// erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1))
fn erf_series<T: Scalar>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term = term * two_x2 / T::int(2 * n as i64 + 1);
        sum += term;
        if term.abs() <= sum.abs() * T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    T::lit(2.0) / T::PI().sqrt() * exp_neg_square(x) * sum
}

// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
fn erfc_continued_fraction<T: Scalar>(x: T) -> T {
    exp_neg_square(x) / (T::PI().sqrt() * laplace_fraction(x, 1))
}

/// Tail `x + a_k/(x + a_{k+1}/(x + ...))` of the Laplace continued
/// fraction, `a_n = n/2`, by the modified Lentz algorithm.
fn laplace_fraction<T: Scalar>(x: T, first: usize) -> T {
    let tiny = T::min_positive_value() * T::lit(1e10);
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for n in first..first + MAX_TERMS {
        let a = T::int(n as i64) * T::lit(0.5);
        d = x + a * d;
        if d == T::zero() {
            d = tiny;
        }
        c = x + a / c;
        if c == T::zero() {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() * T::lit(0.5) {
            break;
        }
    }
    f
}

/// Integrated complementary error function
/// `ierfc(x) = int_x^inf erfc(t) dt = exp(-x^2)/sqrt(pi) - x erfc(x)`.
/// For `x >= 1` the difference is taken inside the continued fraction,
/// so the far tail keeps full relative accuracy.
pub fn ierfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x == T::infinity() {
        return T::zero();
    }
    if x < T::lit(SERIES_SPLIT) {
        return exp_neg_square(x) / T::PI().sqrt() - x * erfc(x);
    }
    // erfc = e/(sqrt(pi) K1), K1 = x + (1/2)/K2  =>  ierfc = e (1/2) / (sqrt(pi) K1 K2)
    let k2 = laplace_fraction(x, 2);
    let k1 = x + T::lit(0.5) / k2;
    exp_neg_square(x) * T::lit(0.5) / (T::PI().sqrt() * k1 * k2)
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath, 40 digits
    const TABLE: &[(f64, f64)] = &[
        (0.0, 1.0),
        (0.01, 0.9887165844441503830840905),
        (0.3, 0.671373240540872572361086),
        (0.5, 0.4795001221869534623172533),
        (1.0, 0.1572992070502851306587794),
        (1.5, 0.03389485352468927293302374),
        (2.0, 0.004677734981047265837930744),
        (2.5, 0.0004069520174449589395642157),
        (3.0, 0.00002209049699858544137277613),
        (5.0, 1.537459794428034850188343e-12),
        (10.0, 2.088487583762544757000786e-45),
        (-0.3, 1.328626759459127427638914),
        (-2.5, 1.999593047982555041060436),
    ];

    #[test]
    fn matches_high_precision_table() {
        for &(x, want) in TABLE {
            let got = erfc(x);
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-14, "erfc({x}) = {got:e}, want {want:e}, rel {rel:e}");
        }
    }

    #[test]
    fn reflection_and_limits() {
        assert_eq!(erfc(0.0_f64), 1.0);
        for x in [0.3_f64, 2.5] {
            assert!((erfc(-x) - (2.0 - erfc(x))).abs() < 1e-15);
        }
        assert_eq!(erfc(40.0_f64), 0.0);
        assert_eq!(erfc(-40.0_f64), 2.0);
        assert!(erfc(f64::NAN).is_nan());
    }

    #[test]
    fn erf_is_complement() {
        for x in [-3.0_f64, -0.7, 0.0, 0.2, 0.99, 1.0, 4.0] {
            assert!((erf(x) + erfc(x) - 1.0).abs() < 2e-16);
        }
    }

    #[test]
    fn single_precision() {
        assert!((erfc(1.0_f32) - 0.15729921).abs() < 1e-6);
    }

    #[test]
    fn ierfc_matches_oracle() {
        // mpmath: exp(-x^2)/sqrt(pi) - x*erfc(x), 30 digits
        let table: [(f64, f64); 6] = [
            (0.0, 0.5641895835477562869480795),
            (0.5, 0.1996412283742456658882353),
            (1.0, 0.05025454166001222101135476),
            (2.0, 0.0009780227149514952526729834),
            (5.0, 1.481342933684934031799667e-13),
            (10.0, 1.034053191466368804277368e-46),
        ];
        for (x, want) in table {
            let got = ierfc(x);
            assert!(((got - want) / want).abs() < 1e-13, "x = {x}: {got} vs {want}");
        }
    }
}
