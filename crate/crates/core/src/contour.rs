//! The contour integrals `I(p/q, gamma)` and `J(p/q, gamma, delta)` over the
//! pair of horizontal lines `Im z = pi/2` (left to right) and
//! `Im z = 2 pi (q - 1/4)` (right to left), and the continued-fraction
//! recursion that rewrites `S(p/q, gamma)` as a chain of such integrals.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::contfrac::{parity_check, tails, ContinuedFraction, Rational, ReducedFraction};
use crate::error::{Error, Result};
use crate::numeric::CompensatedComplexSum;
use crate::trigsums::{beta, s_complex, s_k, sum_bound, ComplexSumSpec, SumContext};

/// Panel refinements tried before giving up on a tolerance.
const MAX_REFINEMENTS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Target absolute error.
    pub tol: f64,
    /// Gauss nodes per panel, at least 8.
    pub panel_order: usize,
    /// Extra length added to the decay-derived cutoff on each side.
    pub truncation_margin: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { tol: 1e-10, panel_order: 16, truncation_margin: 10.0 }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.panel_order < 8 || !(self.truncation_margin >= 0.0) {
            return Err(Error::InvalidInput(format!("bad quadrature config {self:?}")));
        }
        Ok(())
    }
}

/// A quadrature value with the difference between the last two panel
/// widths as its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// `4 ln(q/p) + 5/(e pi p) + beta`.
pub fn integral_bound(frac: ReducedFraction) -> f64 {
    let (p, q) = (frac.num() as f64, frac.den() as f64);
    4.0 * (q / p).ln() + 5.0 / (std::f64::consts::E * PI * p) + beta()
}

fn admissible(frac: ReducedFraction, gamma: f64) -> Result<()> {
    let t = frac.to_f64();
    let (lo, hi) = (0.5 * t, 1.0 + 0.5 * t);
    // a gamma computed as a rounded rational may sit an ulp outside
    let slack = 4.0 * f64::EPSILON * hi;
    if gamma < lo - slack || gamma > hi + slack {
        return Err(Error::DivergentTail { gamma, lo, hi });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    /// `-2 e^{(1+t)z} / ((1 + e^{tz})(1 - e^z))`
    First,
    /// `2 s e^{(1+t)z} / ((1 - s e^{tz})(1 + e^z))` with `s = (-1)^delta`
    Second { sign: f64 },
}

/// The integrand, including `e^{-gamma z}/z`, written so that no exponential
/// of a large positive real part is ever formed.
fn integrand(kernel: Kernel, t: f64, gamma: f64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let (a, b, scale) = match kernel {
        Kernel::First => (1.0, -1.0, -2.0),
        Kernel::Second { sign } => (-sign, 1.0, 2.0 * sign),
    };
    // e^{(1+t-gamma)z} / ((1 + a e^{tz})(1 + b e^z)), with the exponents
    // merged so both tails underflow cleanly
    let ratio = if z.re > 0.0 {
        (-gamma * z).exp() / (((-t * z).exp() + a) * ((-z).exp() + b))
    } else {
        (z * (1.0 + t - gamma)).exp() / ((one + a * (t * z).exp()) * (one + b * z.exp()))
    };
    scale * ratio / z
}

fn integrate(kernel: Kernel, frac: ReducedFraction, gamma: f64, cfg: &QuadratureConfig) -> Result<Quadrature> {
    cfg.validate()?;
    let t = frac.to_f64();
    let q = frac.den() as f64;
    // both tails decay at least like e^{-(t/2)|x|}
    let cutoff = (2.0 / t) * (1.0 / cfg.tol).ln() + cfg.truncation_margin;
    let rule = GaussLegendre::new(NonZeroUsize::new(cfg.panel_order).expect("order >= 8"));
    let nodes = rule.as_node_weight_pairs();
    let lower = PI / 2.0;
    let upper = 2.0 * PI * (q - 0.25);
    let line = |height: f64, panels: usize| {
        let h = 2.0 * cutoff / panels as f64;
        let mut acc = CompensatedComplexSum::new();
        for k in 0..panels {
            let mid = -cutoff + (k as f64 + 0.5) * h;
            for &(x, w) in nodes {
                let z = Complex64::new(mid + 0.5 * h * x, height);
                acc.add(integrand(kernel, t, gamma, z) * (0.5 * h * w));
            }
        }
        acc.value()
    };
    let eval = |panels: usize| line(lower, panels) - line(upper, panels);
    let mut panels = (2.0 * cutoff / PI).ceil() as usize;
    let mut value = eval(panels);
    let mut estimate = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        panels *= 2;
        let finer = eval(panels);
        estimate = (finer - value).norm();
        value = finer;
        if estimate <= cfg.tol {
            return Ok(Quadrature { value, error_estimate: estimate });
        }
    }
    Err(Error::QuadratureUnconverged { estimate, tol: cfg.tol })
}

/// `I(p/q, gamma)` for odd `q >= 3` and `t/2 <= gamma <= 1 + t/2`.
pub fn i_integral(frac: ReducedFraction, gamma: f64, cfg: &QuadratureConfig) -> Result<Quadrature> {
    if frac.den() < 3 || frac.den() % 2 == 0 {
        return Err(Error::InvalidInput(format!("I needs odd q >= 3, got {}/{}", frac.num(), frac.den())));
    }
    admissible(frac, gamma)?;
    integrate(Kernel::First, frac, gamma, cfg)
}

/// `J(p/q, gamma, delta)`: `p` odd for `delta = 0`, `p` and `q` of opposite
/// parity for `delta = 1`.
pub fn j_integral(frac: ReducedFraction, gamma: f64, delta: u8, cfg: &QuadratureConfig) -> Result<Quadrature> {
    let (p, q) = (frac.num(), frac.den());
    let ok = match delta {
        0 => p % 2 == 1,
        1 => (p + q) % 2 == 1,
        _ => return Err(Error::InvalidInput(format!("delta must be 0 or 1, got {delta}"))),
    };
    if !ok || q < 2 {
        return Err(Error::ParityViolated(vec![p, q, delta as u64]));
    }
    admissible(frac, gamma)?;
    let sign = if delta == 0 { 1.0 } else { -1.0 };
    integrate(Kernel::Second { sign }, frac, gamma, cfg)
}

/// `A_delta`: `1/sin(pi p/q)` for `delta = 0`, 1 for `delta = 1`.
pub fn second_integral_factor(frac: ReducedFraction, delta: u8) -> f64 {
    if delta == 0 {
        let c = (PI * frac.to_f64()).cos();
        (1.0 - c * c).powf(-0.5)
    } else {
        1.0
    }
}

/// A phase shifted by an integer into the window `[t/2, 1 + t/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormalizedGamma {
    pub gamma: Rational,
    pub k_shift: i64,
    /// Parity of `k_shift`.
    pub eps: u8,
}

/// Shifts `raw` by the smallest integer that lands it in `[t/2, 1 + t/2]`.
pub fn normalize_gamma(t: ReducedFraction, raw: Rational) -> Result<NormalizedGamma> {
    if t.num() == 0 {
        return Err(Error::NotInUnitInterval { num: t.num(), den: t.den() });
    }
    let lo = Rational::new(t.num() as i64, 2 * t.den() as i64)?;
    let k_shift = lo.checked_sub(&raw)?.ceil();
    let gamma = raw.add_integer(k_shift)?;
    Ok(NormalizedGamma { gamma, k_shift, eps: k_shift.rem_euclid(2) as u8 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionLevel {
    pub j: usize,
    pub t: ReducedFraction,
    pub gamma: Rational,
    /// `gamma_1 = -2k t_1 + k_1`, `gamma_j = k_{j-1} t_j + k_j`.
    pub k: i64,
    /// Sign exponent in front of this level's integral.
    pub eps: u8,
    /// 1 for `J` levels; `a_1 mod 2` at the `I` level.
    pub delta: u8,
    pub integral: Complex64,
    pub error_estimate: f64,
    /// Cap on `|integral|`: `4 ln(q/p) + 5/(e pi p) + beta` at the tail.
    pub bound: f64,
}

impl RecursionLevel {
    pub fn within_bound(&self) -> bool {
        self.integral.norm() < self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionTrace {
    pub levels: Vec<RecursionLevel>,
    pub boundary_term: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionCheck {
    pub cf: ContinuedFraction,
    pub k: u64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub trace: RecursionTrace,
}

impl RecursionCheck {
    pub fn all_within_bounds(&self) -> bool {
        self.trace.levels.iter().all(RecursionLevel::within_bound)
    }
}

/// Evaluates both sides of
/// `S(p/q, gamma_1) = I(t_1, gamma_1) + sum_{j>=2} (-1)^{eps_j} J(t_j, gamma_j, 1) + 2 (-1)^{eps_n} e^{-i pi gamma_n a_n}`
/// for a continued fraction with `a_1` odd and the rest even.
pub fn recursion_check(cf: &ContinuedFraction, k: u64, cfg: &QuadratureConfig) -> Result<RecursionCheck> {
    if !parity_check(cf) {
        return Err(Error::ParityViolated(cf.coeffs().to_vec()));
    }
    let frac = cf.value()?;
    if frac.den() < 3 {
        return Err(Error::InvalidInput(format!("recursion needs q >= 3, got {cf}")));
    }
    let ctx = SumContext::new(frac.num(), frac.den(), k)?;
    let tails = tails(cf)?;
    let a = cf.coeffs();
    let n = a.len();

    let t1 = tails.tails()[0];
    let raw = Rational::from(t1).checked_mul(&Rational::integer(-2 * ctx.k() as i64))?;
    let first = normalize_gamma(t1, raw)?;
    let mut gamma = first.gamma;
    let mut k_cur = first.k_shift;
    // running sign of the next level's term, and its exponent
    let mut sign_exp: u8 = 0;
    let mut levels = Vec::with_capacity(n);
    let mut rhs = CompensatedComplexSum::new();

    let i = i_integral(t1, gamma.to_f64(), cfg)?;
    rhs.add(i.value);
    levels.push(RecursionLevel {
        j: 1,
        t: t1,
        gamma,
        k: k_cur,
        eps: 0,
        delta: (a[0] % 2) as u8,
        integral: i.value,
        error_estimate: i.error_estimate,
        bound: integral_bound(t1),
    });
    let lhs = s_complex(&ComplexSumSpec::new(frac, gamma.to_f64(), 0))?;

    for j in 2..=n {
        let prev_t = tails.tails()[j - 2];
        let t = tails.tails()[j - 1];
        let raw = gamma.checked_div(&Rational::from(prev_t))?;
        let next = normalize_gamma(t, raw)?;
        // S = I + s_2 T_2 and T_j = J_j - s'_{j+1} T_{j+1}
        sign_exp = if j == 2 { next.eps } else { (sign_exp + 1 + next.eps) % 2 };
        gamma = next.gamma;
        let k_next = gamma.checked_sub(&Rational::from(t).checked_mul(&Rational::integer(k_cur))?)?;
        if !k_next.is_integer() {
            return Err(Error::InvalidInput(format!("gamma_{j} = {gamma} is not k t_{j} + integer")));
        }
        k_cur = k_next.num();
        let jv = j_integral(t, gamma.to_f64(), 1, cfg)?;
        let signed = if sign_exp == 0 { jv.value } else { -jv.value };
        rhs.add(signed);
        levels.push(RecursionLevel {
            j,
            t,
            gamma,
            k: k_cur,
            eps: sign_exp,
            delta: 1,
            integral: jv.value,
            error_estimate: jv.error_estimate,
            bound: second_integral_factor(t, 1) * integral_bound(t),
        });
    }

    // residue left at the last level, 2 e^{-i pi gamma_n a_n}
    let an = a[n - 1] as i64;
    let phase = gamma.checked_mul(&Rational::integer(an))?;
    let boundary = 2.0 * Complex64::from_polar(1.0, -PI * phase.to_f64().rem_euclid(2.0));
    // with a single coefficient the residue at z = i pi q sits inside I itself,
    // so it enters with a minus sign
    if n == 1 {
        sign_exp = 1;
    }
    let boundary = if sign_exp == 0 { boundary } else { -boundary };
    rhs.add(boundary);
    let rhs = rhs.value();
    Ok(RecursionCheck {
        cf: cf.clone(),
        k,
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        trace: RecursionTrace { levels, boundary_term: boundary },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumBoundCheck {
    pub p: u64,
    pub q: u64,
    pub k: u64,
    pub abs_sum: f64,
    pub bound: f64,
    pub slack: f64,
}

/// `|S_k|` against `(4 + beta/ln 2) ln q + 9`.
pub fn sum_bound_check(cf: &ContinuedFraction, k: u64) -> Result<SumBoundCheck> {
    if !parity_check(cf) {
        return Err(Error::ParityViolated(cf.coeffs().to_vec()));
    }
    let frac = cf.value()?;
    let ctx = SumContext::new(frac.num(), frac.den(), k)?;
    let abs_sum = s_k(&ctx).abs();
    let bound = sum_bound(frac.den());
    Ok(SumBoundCheck { p: frac.num(), q: frac.den(), k, abs_sum, bound, slack: bound - abs_sum })
}
