//! Trigonometric sums behind the logarithms `L_k` whose exponentials add up
//! to `|sigma'(0)|`: the kernel `F(l, k)`, the weighted sum `S_k`, the
//! digamma route to `L_k`, and the complex sums `S(p/q, gamma)` and
//! `T(p/q, gamma, delta)`.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

use crate::contfrac::ReducedFraction;
use crate::error::{Error, Result};
use crate::numeric::{cos_pi_frac, gcd, sin_pi_frac, unit_phase, CompensatedComplexSum, CompensatedSum};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `4 (1/e + asinh(4/pi))`.
pub fn beta() -> f64 {
    4.0 * ((-1.0f64).exp() + (4.0 / PI).asinh())
}

/// `(4 + beta/ln 2) ln q + 9`, the cap on `|S_k|` for parity-admissible `p/q`.
pub fn sum_bound(q: u64) -> f64 {
    (4.0 + beta() / LN_2) * (q as f64).ln() + 9.0
}

/// A frequency `p/q` with odd `q` and a shift `k` in `0..=(q-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SumContext {
    p: u64,
    q: u64,
    k: u64,
}

impl SumContext {
    pub fn new(p: u64, q: u64, k: u64) -> Result<Self> {
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(Error::NotCoprime { num: p, den: q });
        }
        if q % 2 == 0 {
            return Err(Error::EvenDenominator(q));
        }
        let s = (q - 1) / 2;
        if k > s {
            return Err(Error::InvalidInput(format!("k = {k} outside 0..={s}")));
        }
        Ok(Self { p, q, k })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `(q - 1)/2`.
    pub fn s(&self) -> u64 {
        (self.q - 1) / 2
    }
}

fn check_ell(ell: u64, ctx: &SumContext) -> Result<()> {
    if ell == 0 || ell >= ctx.q {
        return Err(Error::InvalidInput(format!("ell = {ell} outside 1..{}", ctx.q)));
    }
    Ok(())
}

/// `F(l, k) = cos(pi (p/q) l (4k + 1)) / cos(pi (p/q) l)`. The denominator
/// never vanishes for odd `q`.
pub fn f_closed(ell: u64, ctx: &SumContext) -> Result<f64> {
    check_ell(ell, ctx)?;
    let (p, q, k) = (ctx.p as i128, ctx.q as i128, ctx.k as i128);
    let pl = p * ell as i128;
    Ok(cos_pi_frac(pl * (4 * k + 1), q) / cos_pi_frac(pl, q))
}

/// `F(l, k)` as the sum `-2 sum_{j=1..s} cos(4 pi (p/q) l (j + k))`.
pub fn f_brute(ell: u64, ctx: &SumContext) -> Result<f64> {
    check_ell(ell, ctx)?;
    let (p, q, k) = (ctx.p as i128, ctx.q as i128, ctx.k as i128);
    let pl = p * ell as i128;
    let sum = (1..=ctx.s() as i128).fold(CompensatedSum::new(), |mut acc, j| {
        acc.add(cos_pi_frac(4 * pl * (j + k), q));
        acc
    });
    Ok(-2.0 * sum.value())
}

/// `sum_{l=1}^{q-1} F(l, k)`, which equals `q - 1`.
pub fn f_total(ctx: &SumContext) -> f64 {
    let mut acc = CompensatedSum::new();
    for ell in 1..ctx.q {
        acc.add(f_closed(ell, ctx).expect("ell in range"));
    }
    acc.value()
}

/// Digamma `psi(x)` for `x > 0`: shift up to `x >= 10`, then the asymptotic
/// series through the `x^-14` term.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DigammaDomain(x));
    }
    let mut shift = CompensatedSum::new();
    let mut y = x;
    while y < 10.0 {
        shift.add(-1.0 / y);
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    // B_{2n}/(2n) for n = 7 down to 1
    const COEFFS: [f64; 7] = [
        1.0 / 12.0,
        -691.0 / 32760.0,
        1.0 / 132.0,
        -1.0 / 240.0,
        1.0 / 252.0,
        -1.0 / 120.0,
        1.0 / 12.0,
    ];
    let tail = COEFFS.iter().fold(0.0, |acc, &c| acc * inv2 + c) * inv2;
    shift.add(y.ln());
    shift.add(-0.5 / y);
    shift.add(-tail);
    Ok(shift.value())
}

/// `L_k = 2 sum_{j=1..s} ln|2 sin(2 pi (p/q)(j + k))|`.
pub fn l_direct(ctx: &SumContext) -> Result<f64> {
    let (p, q, k) = (ctx.p as i128, ctx.q as i128, ctx.k as i128);
    let mut acc = CompensatedSum::new();
    for j in 1..=ctx.s() as i128 {
        let v = 2.0 * sin_pi_frac(2 * p * (j + k), q);
        if v == 0.0 {
            return Err(Error::SingularTerm(format!("2 pi {p}({j}+{k})/{q}")));
        }
        acc.add(v.abs().ln());
    }
    Ok(2.0 * acc.value())
}

/// `L_k = -((q-1)/q) gamma_0 - (1/q) sum_l F(l, k) psi(1 + l/q) + S_k`.
pub fn l_formula(ctx: &SumContext) -> Result<f64> {
    let q = ctx.q as f64;
    let mut acc = CompensatedSum::new();
    acc.add(-(q - 1.0) / q * EULER_GAMMA);
    acc.add(-digamma_weighted_sum(ctx)?);
    acc.add(s_k(ctx));
    Ok(acc.value())
}

/// `(1/q) sum_l F(l, k) psi(1 + l/q)`.
pub fn digamma_weighted_sum(ctx: &SumContext) -> Result<f64> {
    let q = ctx.q as f64;
    let mut acc = CompensatedSum::new();
    for ell in 1..ctx.q {
        acc.add(f_closed(ell, ctx)? * digamma(1.0 + ell as f64 / q)?);
    }
    Ok(acc.value() / q)
}

/// `S_k = sum_{m=1}^{q-1} F(m, k)/m`.
pub fn s_k(ctx: &SumContext) -> f64 {
    let mut acc = CompensatedSum::new();
    for m in 1..ctx.q {
        acc.add(f_closed(m, ctx).expect("m in range") / m as f64);
    }
    acc.value()
}

/// Arguments of the complex sums `S` and `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexSumSpec {
    pub frac: ReducedFraction,
    pub gamma: f64,
    /// 0 or 1; only read by `T`.
    pub delta: u8,
}

impl ComplexSumSpec {
    pub fn new(frac: ReducedFraction, gamma: f64, delta: u8) -> Self {
        Self { frac, gamma, delta }
    }
}

/// `exp(-2 pi i x)` with `x` reduced modulo 1 first.
fn turn(x: f64) -> Complex64 {
    let r = x.rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * r)
}

/// `S(p/q, gamma) = sum_{m=1}^{q-1} e^{i pi (p/q) m - 2 pi i gamma m} / (m cos(pi (p/q) m))`
/// for odd `q`. Its real part at `gamma = -2kp/q` is `S_k`.
pub fn s_complex(spec: &ComplexSumSpec) -> Result<Complex64> {
    let (p, q) = (spec.frac.num() as i128, spec.frac.den() as i128);
    if q % 2 == 0 {
        return Err(Error::EvenDenominator(q as u64));
    }
    let mut acc = CompensatedComplexSum::new();
    for m in 1..q {
        let phase = unit_phase(p * m, q) * turn(spec.gamma * m as f64);
        acc.add(phase / (m as f64 * cos_pi_frac(p * m, q)));
    }
    Ok(acc.value())
}

/// `T(p/q, gamma, delta) = 2 sum_{n=1}^{q} s w_n / (1 - s w_n) * e^{-2 pi i gamma (n - 1/2)} / (n - 1/2)`
/// with `s = (-1)^delta` and `w_n = e^{2 pi i (p/q)(n - 1/2)}`. Needs `p` odd
/// for `delta = 0`, and `p`, `q` of opposite parity for `delta = 1`.
pub fn t_complex(spec: &ComplexSumSpec) -> Result<Complex64> {
    let (p, q) = (spec.frac.num(), spec.frac.den());
    match spec.delta {
        0 if p % 2 == 1 => {}
        0 => return Err(Error::HalfIntegerSumUndefined(format!("delta = 0 needs odd p, got {p}/{q}"))),
        1 if (p + q) % 2 == 1 => {}
        1 => {
            return Err(Error::HalfIntegerSumUndefined(format!("delta = 1 needs p, q of opposite parity, got {p}/{q}")))
        }
        d => return Err(Error::InvalidInput(format!("delta must be 0 or 1, got {d}"))),
    }
    let sign = if spec.delta == 0 { 1.0 } else { -1.0 };
    let (pi, qi) = (p as i128, q as i128);
    let mut acc = CompensatedComplexSum::new();
    for n in 1..=qi {
        // w = e^{i pi p (2n - 1)/q}
        let w = unit_phase(pi * (2 * n - 1), qi) * sign;
        let half = n as f64 - 0.5;
        acc.add(w / (Complex64::new(1.0, 0.0) - w) * turn(spec.gamma * half) / half);
    }
    Ok(acc.value() * 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, q: u64, k: u64) -> SumContext {
        SumContext::new(p, q, k).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let c = ctx(1, 5, 1);
        let brute = -2.0 * ((8.0 * PI / 5.0).cos() + (12.0 * PI / 5.0).cos());
        assert!((f_closed(1, &c).unwrap() - brute).abs() < 1e-12);
        assert!((f_closed(1, &c).unwrap() + 1.2360680).abs() < 1e-7);
        assert!((f_closed(2, &c).unwrap() - 3.2360680).abs() < 1e-7);
        assert_eq!(f_closed(3, &ctx(2, 7, 0)).unwrap(), 1.0);
        assert!(f_closed(0, &c).is_err());
    }

    #[test]
    fn kernel_totals() {
        assert!((f_total(&ctx(1, 5, 1)) - 4.0).abs() < 1e-12);
        assert!((f_total(&ctx(1, 3, 0)) - 2.0).abs() < 1e-12);
        assert!((f_total(&ctx(1, 7, 3)) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-14);
        // psi(3/2) = 2 - gamma_0 - 2 ln 2
        let exact = 2.0 - EULER_GAMMA - 2.0 * LN_2;
        assert!((digamma(1.5).unwrap() - exact).abs() < 1e-14);
        assert!((digamma(1.5).unwrap() - 0.0364899).abs() < 1e-7);
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
    }

    #[test]
    fn log_terms_small_cases() {
        assert!((l_direct(&ctx(1, 5, 0)).unwrap() - 5f64.ln()).abs() < 1e-13);
        assert!((l_direct(&ctx(1, 3, 0)).unwrap() - 3f64.ln()).abs() < 1e-13);
        assert!((l_direct(&ctx(1, 3, 1)).unwrap() - 3f64.ln()).abs() < 1e-13);
        for (p, q, k) in [(1, 5, 0), (1, 3, 0), (1, 3, 1)] {
            let c = ctx(p, q, k);
            assert!((l_formula(&c).unwrap() - l_direct(&c).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn weighted_sum_examples() {
        assert!((s_k(&ctx(1, 5, 0)) - 25.0 / 12.0).abs() < 1e-14);
        assert!((s_k(&ctx(2, 3, 0)) - 1.5).abs() < 1e-14);
        assert!(s_k(&ctx(1, 7, 2)).abs() < sum_bound(7));
    }

    #[test]
    fn complex_sum_examples() {
        let f = ReducedFraction::new(2, 3).unwrap();
        // m = 1: e^{2 pi i/3}/cos(2 pi/3); m = 2: e^{4 pi i/3}/(2 cos(4 pi/3))
        let direct = unit_phase(2, 3) / (-0.5) + unit_phase(4, 3) / (2.0 * -0.5);
        for gamma in [1.0, 0.0] {
            let s = s_complex(&ComplexSumSpec::new(f, gamma, 0)).unwrap();
            assert!((s - direct).norm() < 1e-13);
            assert!((s - Complex64::new(1.5, -0.8660254)).norm() < 1e-7);
        }
        let f = ReducedFraction::new(1, 5).unwrap();
        assert!((s_complex(&ComplexSumSpec::new(f, 0.0, 0)).unwrap().re - 25.0 / 12.0).abs() < 1e-13);
        // S_k is the real part at gamma = -2kp/q
        let c = ctx(3, 11, 4);
        let s = s_complex(&ComplexSumSpec::new(ReducedFraction::new(3, 11).unwrap(), -24.0 / 11.0, 0)).unwrap();
        assert!((s.re - s_k(&c)).abs() < 1e-12);
    }

    #[test]
    fn half_integer_sum() {
        let f = ReducedFraction::new(1, 2).unwrap();
        let t = t_complex(&ComplexSumSpec::new(f, 0.5, 1)).unwrap();
        // n = 1, 2 with w = e^{i pi/2}, e^{3 i pi/2}, s = -1
        let mut brute = Complex64::new(0.0, 0.0);
        for n in 1..=2 {
            let x = n as f64 - 0.5;
            let w = -Complex64::from_polar(1.0, PI * x);
            brute += 2.0 * w / (1.0 - w) * Complex64::from_polar(1.0, -PI * x) / x;
        }
        assert!((t - brute).norm() < 1e-13);
        assert!(t_complex(&ComplexSumSpec::new(ReducedFraction::new(2, 3).unwrap(), 0.5, 0)).is_err());
        assert!(t_complex(&ComplexSumSpec::new(ReducedFraction::new(1, 1).unwrap(), 0.5, 1)).is_err());
    }
}
