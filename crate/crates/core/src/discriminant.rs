//! The discriminant `sigma(E)` of the critical almost Mathieu operator at
//! frequency `p/q`, its derivative, and the closed-form `sigma'(0)`.
//!
//! `sigma(E) = -tr(A_1 A_2 ... A_q)` with
//! `A_j = [[E - 2cos(2 pi j p/q + pi/(2q)), -1], [1, 0]]`. The same polynomial
//! is, up to the sign `(-1)^(q+1)`, the characteristic polynomial
//! `det(H - E I)` of the `q x q` Jacobi matrix with zero diagonal and
//! off-diagonals `2 sin(pi p j/q)`. Its leading coefficient is `-1` for every
//! `q`, so `sigma(E) = -prod_k (E - lambda_k)` over the Jacobi eigenvalues.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cos_pi_frac, gcd, log_sum_exp, sin_pi_frac};
use crate::scaled::ScaledReal;
use crate::tridiag::SymTridiagonal;

/// Running transfer-matrix product, renormalized to unit max-norm by an
/// exact power of two after every factor. The true partial product is
/// `matrix * 2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferProductState {
    pub matrix: [[f64; 2]; 2],
    pub exponent: i64,
    pub steps_done: usize,
}

impl TransferProductState {
    pub fn identity() -> Self {
        Self { matrix: [[1.0, 0.0], [0.0, 1.0]], exponent: 0, steps_done: 0 }
    }

    pub fn log_scale(&self) -> f64 {
        self.exponent as f64 * std::f64::consts::LN_2
    }

    /// Right-multiplies by `[[x, -1], [1, 0]]`.
    #[inline]
    pub fn step(&mut self, x: f64) {
        let [[a, b], [c, d]] = self.matrix;
        self.matrix = [[a * x + b, -a], [c * x + d, -c]];
        self.steps_done += 1;
        self.renormalize();
    }

    #[inline]
    fn renormalize(&mut self) {
        let m = self.matrix[0][0]
            .abs()
            .max(self.matrix[0][1].abs())
            .max(self.matrix[1][0].abs())
            .max(self.matrix[1][1].abs());
        if m == 0.0 || !m.is_finite() {
            return;
        }
        // m = f * 2^e with f in [1/2, 1)
        let e = frexp_exponent(m);
        if e != 0 {
            let s = pow2(-e);
            for row in &mut self.matrix {
                for v in row.iter_mut() {
                    *v *= s;
                }
            }
            self.exponent += e as i64;
        }
    }

    pub fn trace(&self) -> ScaledReal {
        ScaledReal::from_f64(self.matrix[0][0] + self.matrix[1][1]).scale_pow2(self.exponent)
    }
}

#[inline]
fn frexp_exponent(m: f64) -> i32 {
    let bits = m.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        // subnormal: normalize first
        return frexp_exponent(m * pow2(64)) - 64;
    }
    biased - 1022
}

#[inline]
fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

fn check_frequency(p: u64, q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be >= 1".into()));
    }
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { num: p, den: q });
    }
    Ok(())
}

/// Precomputed data for one frequency: the `q` potential values of the
/// transfer factors and the Jacobi matrix.
#[derive(Debug, Clone)]
pub struct Discriminant {
    p: u64,
    q: u64,
    potential: Vec<f64>,
    jacobi: SymTridiagonal,
}

impl Discriminant {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        check_frequency(p, q)?;
        let (pi, qi) = (p as i128, q as i128);
        // angle_j = pi (4 j p + 1) / (2q)
        let potential = (1..=qi).map(|j| 2.0 * cos_pi_frac(4 * j * pi + 1, 2 * qi)).collect();
        let jacobi = SymTridiagonal::new(vec![0.0; q as usize], jacobi_off_diagonal(p, q));
        Ok(Self { p, q, potential, jacobi })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn jacobi(&self) -> &SymTridiagonal {
        &self.jacobi
    }

    pub fn transfer_state(&self, e: f64) -> TransferProductState {
        let mut st = TransferProductState::identity();
        for &v in &self.potential {
            st.step(e - v);
        }
        st
    }

    /// `sigma(E)` from the transfer product.
    pub fn eval(&self, e: f64) -> ScaledReal {
        -self.transfer_state(e).trace()
    }

    /// `det(H - E I)` by the three-term recurrence
    /// `D_k = -E D_{k-1} - b_{k-1}^2 D_{k-2}`, kept in scaled form.
    pub fn det_recurrence(&self, e: f64) -> ScaledReal {
        let off = self.jacobi.off();
        let (mut prev, mut cur) = (1.0f64, -e);
        let mut exponent: i64 = 0;
        for b in off {
            let next = -e * cur - b * b * prev;
            prev = cur;
            cur = next;
            let m = prev.abs().max(cur.abs());
            if m != 0.0 && m.is_finite() {
                let k = frexp_exponent(m);
                if k != 0 {
                    let s = pow2(-k);
                    prev *= s;
                    cur *= s;
                    exponent += k as i64;
                }
            }
        }
        ScaledReal::from_f64(cur).scale_pow2(exponent)
    }

    /// `+1` when `sigma = det(H - E I)` (odd `q`), `-1` for even `q`.
    pub fn orientation(&self) -> i8 {
        if self.q % 2 == 1 {
            1
        } else {
            -1
        }
    }

    /// All zeros of `sigma`, ascending: the Jacobi eigenvalues.
    pub fn zeros(&self) -> Vec<f64> {
        self.jacobi.eigenvalues(0.0)
    }

    /// `sigma'(E)` by the product rule over known zeros of `sigma`.
    pub fn derivative_from_zeros(zeros: &[f64], e: f64) -> ScaledReal {
        if zeros.is_empty() {
            return ScaledReal::ZERO;
        }
        let near = zeros
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - e).abs().partial_cmp(&(b.1 - e).abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let d_near = e - zeros[near];
        let others = zeros.iter().enumerate().filter(|&(i, _)| i != near).map(|(_, &l)| e - l);
        let prod = ScaledReal::product(others.clone());
        let correction = 1.0 + d_near * crate::numeric::compensated_sum(others.map(|d| 1.0 / d));
        -(prod * ScaledReal::from_f64(correction))
    }
}

/// Off-diagonals `b_j = 2 sin(pi p j / q)`, `j = 1..q-1`. The main diagonal
/// is identically zero.
pub fn jacobi_off_diagonal(p: u64, q: u64) -> Vec<f64> {
    (1..q as i128).map(|j| 2.0 * sin_pi_frac(p as i128 * j, q as i128)).collect()
}

pub fn jacobi_matrix(p: u64, q: u64) -> Result<Vec<f64>> {
    check_frequency(p, q)?;
    Ok(jacobi_off_diagonal(p, q))
}

pub fn sigma(p: u64, q: u64, e: f64) -> Result<ScaledReal> {
    Ok(Discriminant::new(p, q)?.eval(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Consistency {
    pub transfer: ScaledReal,
    pub determinant: ScaledReal,
    /// `|ln|a| - ln|b|| / max(1, |ln|a||, |ln|b||)`; zero when both vanish.
    pub discrepancy: f64,
    pub signs_agree: bool,
}

/// Compares the transfer-product `sigma(E)` with the signed determinant
/// recurrence `(-1)^(q+1) det(H - E I)`.
pub fn sigma_consistency(p: u64, q: u64, e: f64) -> Result<Consistency> {
    let d = Discriminant::new(p, q)?;
    Ok(consistency_of(&d, e))
}

pub fn consistency_of(d: &Discriminant, e: f64) -> Consistency {
    let transfer = d.eval(e);
    let mut determinant = d.det_recurrence(e);
    if d.orientation() < 0 {
        determinant = -determinant;
    }
    let (discrepancy, signs_agree) = match (transfer.is_zero(), determinant.is_zero()) {
        (true, true) => (0.0, true),
        (false, false) => {
            let (a, b) = (transfer.log_mag(), determinant.log_mag());
            ((a - b).abs() / 1f64.max(a.abs()).max(b.abs()), transfer.sign() == determinant.sign())
        }
        _ => (f64::INFINITY, false),
    };
    Consistency { transfer, determinant, discrepancy, signs_agree }
}

/// The logarithms `L_k`, `k = 0..s`, whose exponentials sum to `|sigma'(0)|`
/// for odd `q`:
/// `L_k = 2 sum_{j<=k} ln|2 sin(pi p (2j-1)/q)| + 2 sum_{j>k} ln|2 sin(2 pi p j/q)|`.
/// Evaluated with prefix sums in `O(q)`.
pub fn sigma_prime0_log_terms(p: u64, q: u64) -> Result<Vec<f64>> {
    check_frequency(p, q)?;
    if q % 2 == 0 {
        return Err(Error::EvenDenominator(q));
    }
    let s = ((q - 1) / 2) as usize;
    let (pi, qi) = (p as i128, q as i128);
    let odd: Vec<f64> = (1..=s as i128).map(|j| (2.0 * sin_pi_frac(pi * (2 * j - 1), qi)).abs().ln()).collect();
    let even: Vec<f64> = (1..=s as i128).map(|j| (2.0 * sin_pi_frac(pi * 2 * j, qi)).abs().ln()).collect();
    let mut suffix = vec![0.0; s + 1];
    for j in (0..s).rev() {
        suffix[j] = suffix[j + 1] + even[j];
    }
    let mut prefix = 0.0;
    let mut out = Vec::with_capacity(s + 1);
    for k in 0..=s {
        if k > 0 {
            prefix += odd[k - 1];
        }
        out.push(2.0 * (prefix + suffix[k]));
    }
    Ok(out)
}

/// `sigma'(0)`. Magnitude is the log-sum-exp of [`sigma_prime0_log_terms`];
/// the sign is `+` for `q = 3 mod 4` and `-` for `q = 1 mod 4`. For even `q`
/// the derivative vanishes and the result has sign 0.
pub fn sigma_prime0(p: u64, q: u64) -> Result<ScaledReal> {
    check_frequency(p, q)?;
    if q % 2 == 0 {
        return Ok(ScaledReal::ZERO);
    }
    let terms = sigma_prime0_log_terms(p, q)?;
    let sign = if q % 4 == 3 { 1 } else { -1 };
    Ok(ScaledReal::new(sign, log_sum_exp(&terms)))
}

/// `sigma'(E)`: product rule over the zeros of `sigma`, cross-checked
/// against a Richardson-extrapolated central difference.
pub fn sigma_prime(p: u64, q: u64, e: f64) -> Result<ScaledReal> {
    let d = Discriminant::new(p, q)?;
    let product_rule = Discriminant::derivative_from_zeros(&d.zeros(), e);
    let fd = finite_difference(&d, e);
    let scale = product_rule.abs();
    let scale = if scale.cmp_abs(&fd) == std::cmp::Ordering::Less { fd.abs() } else { scale };
    let value_scale = d.eval(e).abs();
    let scale = if scale.cmp_abs(&value_scale) == std::cmp::Ordering::Less { value_scale } else { scale };
    let diff = product_rule.sub(&fd).abs();
    let tol = ScaledReal::from_f64(1e-5) * scale;
    if diff.cmp_abs(&tol) == std::cmp::Ordering::Greater {
        return Err(Error::DerivativeUnresolved {
            energy: e,
            product_rule: product_rule.to_f64(),
            finite_difference: fd.to_f64(),
        });
    }
    Ok(product_rule)
}

fn finite_difference(d: &Discriminant, e: f64) -> ScaledReal {
    let h = 1e-6f64.max(1e-6 * e.abs());
    let central = |h: f64| d.eval(e + h).sub(&d.eval(e - h)) * ScaledReal::from_f64(0.5 / h);
    let coarse = central(h);
    let fine = central(0.5 * h);
    (fine * ScaledReal::from_f64(4.0)).sub(&coarse) * ScaledReal::from_f64(1.0 / 3.0)
}
