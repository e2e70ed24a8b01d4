//! Small numerical kernels shared by the spectral and summation modules.

use num_complex::Complex64;
use std::f64::consts::PI;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `cos(pi * num / den)` with the argument reduced exactly in integers
/// before any rounding happens. Zeros land on exact `0.0`.
pub fn cos_pi_frac(num: i128, den: i128) -> f64 {
    assert!(den > 0, "cos_pi_frac: den must be positive");
    let mut m = num.rem_euclid(2 * den);
    if m > den {
        m = 2 * den - m;
    }
    // m/den in [0, 1]
    if 2 * m == den {
        return 0.0;
    }
    if 2 * m > den {
        -cos_pi_first_quadrant(den - m, den)
    } else {
        cos_pi_first_quadrant(m, den)
    }
}

// m/den in [0, 1/2)
fn cos_pi_first_quadrant(m: i128, den: i128) -> f64 {
    if 4 * m <= den {
        (PI * m as f64 / den as f64).cos()
    } else {
        (PI * (den - 2 * m) as f64 / (2 * den) as f64).sin()
    }
}

/// `sin(pi * num / den)`, exact reduction as in [`cos_pi_frac`].
pub fn sin_pi_frac(num: i128, den: i128) -> f64 {
    cos_pi_frac(2 * num - den, 2 * den)
}

/// `exp(i * pi * num / den)`.
pub fn unit_phase(num: i128, den: i128) -> Complex64 {
    Complex64::new(cos_pi_frac(num, den), sin_pi_frac(num, den))
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `ln(sum(exp(x_i)))`, anchored at the maximum term. Returns `-inf` on an
/// empty input.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let rest = compensated_sum(terms.iter().map(|&t| (t - max).exp()));
    max + rest.ln()
}

/// `ln prod |x_i|` without overflow or underflow, with a single logarithm.
pub fn log_abs_product<I: IntoIterator<Item = f64>>(factors: I) -> f64 {
    const HI: f64 = 1e150;
    const LO: f64 = 1e-150;
    let mut mant = 1.0f64;
    let mut exp: i64 = 0;
    for x in factors {
        mant *= x.abs();
        if !(LO..=HI).contains(&mant) {
            if mant == 0.0 {
                return f64::NEG_INFINITY;
            }
            if !mant.is_finite() {
                return f64::INFINITY;
            }
            let k = (mant.to_bits() >> 52) as i64 - 1023;
            mant = f64::from_bits(((mant.to_bits() << 12) >> 12) | (1023u64 << 52));
            exp += k;
        }
    }
    mant.ln() + exp as f64 * std::f64::consts::LN_2
}

/// Safeguarded Newton iteration on a sign-changing bracket.
///
/// `f` returns the function value and its derivative. The caller states
/// which end of the bracket is negative; the endpoints themselves are never
/// evaluated, so `f` may be singular there. Newton steps that leave the
/// bracket or fail to halve it are replaced by bisection. Iteration stops at
/// a zero, at a bracket of width `x_tol` (absolute) plus a few ulps, or after
/// `max_iter` steps.
pub fn bracketed_newton<F>(mut f: F, neg_end: f64, pos_end: f64, start: f64, x_tol: f64, max_iter: usize) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut neg = neg_end;
    let mut pos = pos_end;
    let inside = |x: f64, a: f64, b: f64| x > a.min(b) && x < a.max(b);
    let mut x = if inside(start, neg, pos) { start } else { 0.5 * (neg + pos) };
    let mut prev_width = (pos - neg).abs();

    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx.is_nan() {
            // Treat as unusable and bisect.
            x = 0.5 * (neg + pos);
            continue;
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let width = (pos - neg).abs();
        let scale = neg.abs().max(pos.abs());
        if width <= x_tol + 4.0 * f64::EPSILON * scale {
            return 0.5 * (neg + pos);
        }
        let newton = x - fx / dfx;
        let shrinking = width <= 0.5 * prev_width;
        let next = if newton.is_finite() && inside(newton, neg, pos) && (shrinking || (newton - x).abs() < 0.25 * width) {
            newton
        } else {
            0.5 * (neg + pos)
        };
        prev_width = width;
        if next == x {
            return x;
        }
        x = next;
    }
    x
}

/// Bisection on a sign predicate. `is_positive(x)` must be false at
/// `neg_end` side and true at `pos_end` side. Runs to machine resolution.
pub fn bisect_sign<F>(mut is_positive: F, neg_end: f64, pos_end: f64, x_tol: f64) -> f64
where
    F: FnMut(f64) -> bool,
{
    let mut neg = neg_end;
    let mut pos = pos_end;
    loop {
        let mid = 0.5 * (neg + pos);
        if mid == neg || mid == pos || (pos - neg).abs() <= x_tol {
            return mid;
        }
        if is_positive(mid) {
            pos = mid;
        } else {
            neg = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_pi_frac_exact_points() {
        assert_eq!(cos_pi_frac(1, 2), 0.0);
        assert_eq!(cos_pi_frac(3, 2), 0.0);
        assert_eq!(cos_pi_frac(0, 7), 1.0);
        assert_eq!(cos_pi_frac(7, 7), -1.0);
        assert_eq!(cos_pi_frac(-14, 7), 1.0);
        assert_eq!(sin_pi_frac(5, 5), 0.0);
    }

    #[test]
    fn cos_pi_frac_matches_libm() {
        for den in 1..40i128 {
            for num in -100..100i128 {
                let direct = (PI * num as f64 / den as f64).cos();
                assert!((cos_pi_frac(num, den) - direct).abs() < 1e-13, "{num}/{den}");
                let direct = (PI * num as f64 / den as f64).sin();
                assert!((sin_pi_frac(num, den) - direct).abs() < 1e-13, "{num}/{den}");
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(terms), 2.0);
    }

    #[test]
    fn log_sum_exp_large_terms() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_abs_product_spans_range() {
        let v = log_abs_product(std::iter::repeat(1e-30).take(50));
        assert!((v - 50.0 * 1e-30f64.ln()).abs() < 1e-10);
        let v = log_abs_product([2.0, -3.0, 0.25]);
        assert!((v - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(log_abs_product([1.0, 0.0]), f64::NEG_INFINITY);
        assert_eq!(log_abs_product([]), 0.0);
    }

    #[test]
    fn newton_finds_cube_root() {
        let r = bracketed_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1.0, 0.0, 100);
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn newton_survives_singular_ends() {
        // -1/x on (0, inf) shifted: root of 1 - 1/x at x = 1
        let r = bracketed_newton(|x| (1.0 - 1.0 / x, 1.0 / (x * x)), 0.0, 10.0, 9.0, 0.0, 200);
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bisect_sign_resolves_to_ulp() {
        let r = bisect_sign(|x| x > std::f64::consts::E, 0.0, 4.0, 0.0);
        assert!((r - std::f64::consts::E).abs() < 1e-15);
    }
}
