//! Exact rational and continued-fraction arithmetic.
//!
//! A frequency `p/q` in `(0,1]` is written `[a_1, ..., a_n] = 1/(a_1 + 1/(a_2 + ...))`.
//! All arithmetic is exact at 64-bit width; anything that would overflow is
//! reported as [`Error::Overflow`] instead of wrapping.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::gcd;

/// Nonnegative fraction in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ReducedFraction {
    num: u64,
    den: u64,
}

impl ReducedFraction {
    /// Accepts only fractions already in lowest terms.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput(format!("zero denominator in {num}/0")));
        }
        if gcd(num, den) != 1 {
            return Err(Error::NotCoprime { num, den });
        }
        Ok(Self { num, den })
    }

    /// Divides out the common factor.
    pub fn reduced(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput(format!("zero denominator in {num}/0")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `0 < num/den <= 1`.
    pub fn is_unit_frequency(&self) -> bool {
        self.num > 0 && self.num <= self.den
    }

    /// Exact product, reduced by cross-cancellation before multiplying.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let g1 = gcd(self.num, other.den).max(1);
        let g2 = gcd(other.num, self.den).max(1);
        let num = (self.num / g1)
            .checked_mul(other.num / g2)
            .ok_or(Error::Overflow("fraction product"))?;
        let den = (self.den / g2)
            .checked_mul(other.den / g1)
            .ok_or(Error::Overflow("fraction product"))?;
        Self::reduced(num, den)
    }
}

impl fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl PartialOrd for ReducedFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ReducedFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

/// Signed rational in lowest terms with positive denominator. Used for the
/// phase parameters of the contour recursion, which must be shifted by exact
/// integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = num.checked_neg().ok_or(Error::Overflow("rational sign"))?;
            den = den.checked_neg().ok_or(Error::Overflow("rational sign"))?;
        }
        Ok(Self { num, den })
    }

    pub fn integer(n: i64) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn floor(&self) -> i64 {
        self.num.div_euclid(self.den)
    }

    pub fn ceil(&self) -> i64 {
        -(-self.num).div_euclid(self.den)
    }

    fn from_i128(num: i128, den: i128) -> Result<Self> {
        let g = gcd(num.unsigned_abs() as u64, den.unsigned_abs() as u64).max(1) as i128;
        let (num, den) = (num / g, den / g);
        let num = i64::try_from(num).map_err(|_| Error::Overflow("rational"))?;
        let den = i64::try_from(den).map_err(|_| Error::Overflow("rational"))?;
        Self::new(num, den)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let num = self.num as i128 * other.den as i128 + other.num as i128 * self.den as i128;
        let den = self.den as i128 * other.den as i128;
        Self::from_i128(num, den)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&Self { num: -other.num, den: other.den })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        Self::from_i128(self.num as i128 * other.num as i128, self.den as i128 * other.den as i128)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.num == 0 {
            return Err(Error::InvalidInput("division by zero rational".into()));
        }
        Self::from_i128(self.num as i128 * other.den as i128, self.den as i128 * other.num as i128)
    }

    pub fn add_integer(&self, k: i64) -> Result<Self> {
        self.checked_add(&Self::integer(k))
    }
}

impl From<ReducedFraction> for Rational {
    fn from(f: ReducedFraction) -> Self {
        Self { num: f.num as i64, den: f.den as i64 }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

/// Coefficients `a_1..a_n`, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ContinuedFraction {
    coeffs: Vec<u64>,
}

impl ContinuedFraction {
    pub fn new(coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("continued fraction needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|&a| a == 0) {
            return Err(Error::InvalidInput(format!("coefficients must be >= 1: {coeffs:?}")));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Folds a trailing `..., a, 1` into `..., a + 1`.
    pub fn canonical(&self) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() >= 2 && *coeffs.last().unwrap() == 1 {
            coeffs.pop();
            let last = coeffs.last_mut().unwrap();
            *last = last.checked_add(1).ok_or(Error::Overflow("canonical form"))?;
        }
        Ok(Self { coeffs })
    }

    /// Prefix `[a_1..a_m]`.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.coeffs.len() {
            return Err(Error::InvalidInput(format!("prefix length {m} out of range 1..={}", self.coeffs.len())));
        }
        Ok(Self { coeffs: self.coeffs[..m].to_vec() })
    }

    pub fn value(&self) -> Result<ReducedFraction> {
        Ok(*convergents(self)?.last().expect("nonempty expansion"))
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

impl std::str::FromStr for ContinuedFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        let coeffs = trimmed
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::InvalidInput(format!("bad coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }
}

/// Euclid's algorithm. The result is canonical: `a_n >= 2` whenever `n >= 2`.
pub fn expand(frac: ReducedFraction) -> Result<ContinuedFraction> {
    if !frac.is_unit_frequency() {
        return Err(Error::NotInUnitInterval { num: frac.num, den: frac.den });
    }
    let (mut num, mut den) = (frac.num, frac.den);
    let mut coeffs = Vec::new();
    while num != 0 {
        coeffs.push(den / num);
        let r = den % num;
        den = num;
        num = r;
    }
    ContinuedFraction::new(coeffs)
}

/// `p_k/q_k` for `k = 1..n` via `q_k = a_k q_{k-1} + q_{k-2}`.
pub fn convergents(cf: &ContinuedFraction) -> Result<Vec<ReducedFraction>> {
    let (mut p_prev, mut p) = (1u64, 0u64);
    let (mut q_prev, mut q) = (0u64, 1u64);
    let mut out = Vec::with_capacity(cf.len());
    for &a in cf.coeffs() {
        let p_next = a
            .checked_mul(p)
            .and_then(|x| x.checked_add(p_prev))
            .ok_or(Error::Overflow("convergent numerator"))?;
        let q_next = a
            .checked_mul(q)
            .and_then(|x| x.checked_add(q_prev))
            .ok_or(Error::Overflow("convergent denominator"))?;
        p_prev = p;
        p = p_next;
        q_prev = q;
        q = q_next;
        out.push(ReducedFraction::new(p, q)?);
    }
    Ok(out)
}

/// Tails `t_j = [a_j, ..., a_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TailSequence {
    tails: Vec<ReducedFraction>,
}

impl TailSequence {
    pub fn tails(&self) -> &[ReducedFraction] {
        &self.tails
    }

    /// `t_1 t_2 ... t_n`, reduced at each step.
    pub fn product(&self) -> Result<ReducedFraction> {
        self.tails
            .iter()
            .try_fold(ReducedFraction { num: 1, den: 1 }, |acc, t| acc.checked_mul(t))
    }
}

/// Backward recurrence `t_j = 1/(a_j + t_{j+1})`, `t_{n+1} = 0`.
pub fn tails(cf: &ContinuedFraction) -> Result<TailSequence> {
    let mut out = vec![ReducedFraction { num: 0, den: 1 }; cf.len()];
    let (mut num, mut den) = (0u64, 1u64);
    for (j, &a) in cf.coeffs().iter().enumerate().rev() {
        let new_den = a
            .checked_mul(den)
            .and_then(|x| x.checked_add(num))
            .ok_or(Error::Overflow("tail denominator"))?;
        num = den;
        den = new_den;
        out[j] = ReducedFraction::new(num, den)?;
    }
    Ok(TailSequence { tails: out })
}

/// `a_1` odd and every later coefficient even.
pub fn parity_check(cf: &ContinuedFraction) -> bool {
    let a = cf.coeffs();
    a[0] % 2 == 1 && a[1..].iter().all(|x| x % 2 == 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub q_n: u64,
    pub a_next: u64,
    pub q_next: u64,
    /// `a_{n+1} > c3 q_n^(kappa-2)`
    pub coefficient_condition: bool,
    /// `q_{n+1} > (c3/2) q_n^(kappa-1)`
    pub denominator_condition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub kappa: f64,
    pub c3: f64,
    pub rows: Vec<GrowthRow>,
}

impl GrowthReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.coefficient_condition && r.denominator_condition)
    }
}

/// Reports the coefficient and denominator growth conditions at every level
/// `n = 1..len-1`. Comparisons are made on logarithms, so `kappa = 56` is fine.
pub fn growth_check(cf: &ContinuedFraction, kappa: f64, c3: f64) -> Result<GrowthReport> {
    if !(kappa > 2.0) || !(c3 > 0.0) {
        return Err(Error::InvalidInput(format!("growth check needs kappa > 2 and c3 > 0, got {kappa}, {c3}")));
    }
    let conv = convergents(cf)?;
    let a = cf.coeffs();
    let ln_c3 = c3.ln();
    let rows = (1..cf.len())
        .map(|n| {
            let q_n = conv[n - 1].den();
            let q_next = conv[n].den();
            let a_next = a[n];
            let ln_q = (q_n as f64).ln();
            GrowthRow {
                n,
                q_n,
                a_next,
                q_next,
                coefficient_condition: (a_next as f64).ln() > ln_c3 + (kappa - 2.0) * ln_q,
                denominator_condition: (q_next as f64).ln() > ln_c3 - std::f64::consts::LN_2 + (kappa - 1.0) * ln_q,
            }
        })
        .collect();
    Ok(GrowthReport { kappa, c3, rows })
}

/// Upper bound on the expansion length when denominators grow like
/// `q_{k+1} >= q_k^nu` and `q_2 >= 3`: `ln(ln q_n / ln 3)/ln nu + 2`.
pub fn length_bound_power_growth(q_n: u64, nu: f64) -> f64 {
    ((q_n as f64).ln() / 3f64.ln()).ln() / nu.ln() + 2.0
}

/// Enumerates every `p/q` in `(0,1]` with `q <= q_max` whose canonical
/// expansion passes [`parity_check`], ordered by `(q, p)`.
pub fn parity_admissible_fractions(q_max: u64) -> Vec<ReducedFraction> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        for p in 1..=q {
            if gcd(p, q) != 1 {
                continue;
            }
            let frac = ReducedFraction { num: p, den: q };
            if expand(frac).map(|cf| parity_check(&cf)).unwrap_or(false) {
                out.push(frac);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cf(a: &[u64]) -> ContinuedFraction {
        ContinuedFraction::new(a.to_vec()).unwrap()
    }

    fn frac(p: u64, q: u64) -> ReducedFraction {
        ReducedFraction::new(p, q).unwrap()
    }

    // independent forward evaluation 1/(a1 + 1/(a2 + ...)) in u128
    fn forward_eval(a: &[u64]) -> (u128, u128) {
        let (mut num, mut den) = (0u128, 1u128);
        for &x in a.iter().rev() {
            // value = 1/(x + num/den) = den/(x*den + num)
            let nd = x as u128 * den + num;
            num = den;
            den = nd;
        }
        let g = gcd(num as u64, den as u64) as u128;
        (num / g, den / g)
    }

    #[test]
    fn expand_examples() {
        assert_eq!(expand(frac(2, 3)).unwrap().coeffs(), &[1, 2]);
        assert_eq!(expand(frac(1, 1)).unwrap().coeffs(), &[1]);
        assert_eq!(forward_eval(&[1, 2, 100]), (201, 301));
        assert_eq!(expand(frac(201, 301)).unwrap().coeffs(), &[1, 2, 100]);
    }

    #[test]
    fn expand_rejects_zero() {
        let err = expand(ReducedFraction::new(0, 1).unwrap()).unwrap_err();
        assert!(err.to_string().contains("not in (0,1]"));
        assert!(expand(ReducedFraction::new(3, 2).unwrap()).is_err());
    }

    #[test]
    fn fraction_constructor_rejects_common_factor() {
        assert_eq!(ReducedFraction::new(2, 4), Err(Error::NotCoprime { num: 2, den: 4 }));
        assert_eq!(ReducedFraction::reduced(2, 4).unwrap(), frac(1, 2));
    }

    #[test]
    fn convergents_examples() {
        assert_eq!(convergents(&cf(&[1, 2, 2])).unwrap(), vec![frac(1, 1), frac(2, 3), frac(5, 7)]);
        assert_eq!(convergents(&cf(&[1])).unwrap(), vec![frac(1, 1)]);
        assert_eq!(convergents(&cf(&[1, 2, 100])).unwrap(), vec![frac(1, 1), frac(2, 3), frac(201, 301)]);
        for prefix in 1..=3 {
            let a = &[1u64, 2, 100][..prefix];
            let (n, d) = forward_eval(a);
            assert_eq!(convergents(&cf(a)).unwrap().last().unwrap(), &frac(n as u64, d as u64));
        }
    }

    #[test]
    fn convergents_overflow_is_reported() {
        let huge = cf(&[u64::MAX / 2, u64::MAX / 2, 7]);
        assert!(matches!(convergents(&huge), Err(Error::Overflow(_))));
    }

    #[test]
    fn tails_examples() {
        let t = tails(&cf(&[1, 2, 100])).unwrap();
        assert_eq!(t.tails(), &[frac(201, 301), frac(100, 201), frac(1, 100)]);
        assert_eq!(tails(&cf(&[1])).unwrap().tails(), &[frac(1, 1)]);
        let t = tails(&cf(&[1, 2])).unwrap();
        assert_eq!(t.tails(), &[frac(2, 3), frac(1, 2)]);
        assert_eq!(t.product().unwrap(), frac(1, 3));
    }

    #[test]
    fn parity_examples() {
        assert!(parity_check(&cf(&[1, 2, 100])));
        assert!(!parity_check(&cf(&[2, 2])));
        assert!(!parity_check(&cf(&[1, 3])));
    }

    #[test]
    fn growth_examples() {
        let r = growth_check(&cf(&[1, 2]), 3.0, 1.0).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].coefficient_condition);
        let r = growth_check(&cf(&[1, 2, 100]), 4.0, 1.0).unwrap();
        assert_eq!(r.rows[1].q_n, 3);
        assert!(r.rows[1].coefficient_condition);
        let r = growth_check(&cf(&[1, 2, 2]), 56.0, 1.0).unwrap();
        assert!(!r.rows[1].coefficient_condition);
        assert!(!r.all_hold());
        assert!(growth_check(&cf(&[1, 2]), 2.0, 1.0).is_err());
    }

    #[test]
    fn canonical_folds_trailing_one() {
        assert_eq!(cf(&[1, 1, 1]).canonical().unwrap(), cf(&[1, 2]));
        assert_eq!(cf(&[1]).canonical().unwrap(), cf(&[1]));
    }

    #[test]
    fn parse_coefficients() {
        let parsed: ContinuedFraction = "1,2,100".parse().unwrap();
        assert_eq!(parsed, cf(&[1, 2, 100]));
        assert!("1,0".parse::<ContinuedFraction>().is_err());
        assert_eq!(parsed.to_string(), "[1,2,100]");
    }

    #[test]
    fn rational_shift_and_rounding() {
        let g = Rational::new(-4, 3).unwrap();
        assert_eq!(g.floor(), -2);
        assert_eq!(g.ceil(), -1);
        assert_eq!(g.add_integer(2).unwrap(), Rational::new(2, 3).unwrap());
        assert_eq!(Rational::new(3, -6).unwrap(), Rational::new(-1, 2).unwrap());
    }

    #[test]
    fn admissible_enumeration_small() {
        let got: Vec<(u64, u64)> = parity_admissible_fractions(7).iter().map(|f| (f.num(), f.den())).collect();
        // [1]=1, [1,2]=2/3, [3]=1/3, [1,4]=4/5, [5]=1/5, [1,2,2]=5/7, [1,6]=6/7, [3,2]=2/7, [7]=1/7
        assert_eq!(got, vec![(1, 1), (1, 3), (2, 3), (1, 5), (4, 5), (1, 7), (2, 7), (5, 7), (6, 7)]);
    }

    fn coeffs_strategy() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(1u64..40, 1..8)
    }

    fn admissible_strategy() -> impl Strategy<Value = Vec<u64>> {
        (0u64..6, prop::collection::vec(1u64..12, 0..7)).prop_map(|(a1, rest)| {
            let mut v = vec![2 * a1 + 1];
            v.extend(rest.into_iter().map(|x| 2 * x));
            v
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_canonical(a in coeffs_strategy()) {
            let c = cf(&a);
            let value = c.value().unwrap();
            prop_assert_eq!(expand(value).unwrap(), c.canonical().unwrap());
            let (n, d) = forward_eval(&a);
            prop_assert_eq!((value.num() as u128, value.den() as u128), (n, d));
        }

        #[test]
        fn tail_product_is_inverse_denominator(a in coeffs_strategy()) {
            let c = cf(&a);
            let q_n = c.value().unwrap().den();
            let prod = tails(&c).unwrap().product().unwrap();
            prop_assert_eq!(prod, frac(1, q_n));
            // t_j = 1/(a_j + t_{j+1})
            let t = tails(&c).unwrap();
            for j in 0..a.len() {
                let next = if j + 1 < a.len() { t.tails()[j + 1] } else { frac(0, 1) };
                let lhs = t.tails()[j];
                prop_assert_eq!(lhs.num() as u128 * (a[j] as u128 * next.den() as u128 + next.num() as u128),
                                lhs.den() as u128 * next.den() as u128);
            }
        }

        #[test]
        fn convergent_denominators_increase(a in coeffs_strategy()) {
            let conv = convergents(&cf(&a)).unwrap();
            for w in conv.windows(2) {
                prop_assert!(w[1].den() > w[0].den());
            }
            for f in &conv {
                prop_assert_eq!(gcd(f.num(), f.den()), 1);
            }
        }

        #[test]
        fn parity_consequences(a in admissible_strategy()) {
            let c = cf(&a);
            prop_assert!(parity_check(&c));
            let conv = convergents(&c).unwrap();
            prop_assert!(conv.iter().all(|f| f.den() % 2 == 1));
            let n = a.len();
            let t = tails(&c).unwrap();
            for (j, tj) in t.tails().iter().enumerate() {
                prop_assert!(tj.num() >= 1u64 << (n - 1 - j));
            }
            let q_n = conv[n - 1].den() as f64;
            prop_assert!(n as f64 <= q_n.ln() / 2f64.ln() + 1.0 + 1e-12);
        }

        #[test]
        fn length_bound_under_power_growth(a in prop::collection::vec(2u64..30, 2..6), nu_pct in 101u32..200) {
            let c = cf(&a);
            let conv = convergents(&c).unwrap();
            let nu = nu_pct as f64 / 100.0;
            let holds = conv[1].den() >= 3
                && conv.windows(2).all(|w| (w[1].den() as f64).ln() >= nu * (w[0].den() as f64).ln());
            if holds {
                prop_assert!(a.len() as f64 <= length_bound_power_growth(conv[a.len() - 1].den(), nu) + 1e-12);
            }
        }
    }
}
