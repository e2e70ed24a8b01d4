//! Multiprecision refinement of Jacobi eigenvalues that sit closer together
//! than `f64` can separate.
//!
//! At small `p/q` the band centers group into clusters whose internal
//! splittings are exponentially small (below `1e-25` already for `q` near
//! 200). The matrix entries are recomputed in MPFR at the working precision,
//! because rounding them to `f64` perturbs the cluster by more than its width.

use rug::float::Constant;
use rug::ops::{NegAssign, SubFrom};
use rug::{Assign, Float};

use crate::error::{Error, Result};

const START_PRECISION: u32 = 128;
const MAX_PRECISION: u32 = 4096;
/// Bits by which a resolved separation must exceed the working resolution.
const SEPARATION_MARGIN: u32 = 50;

#[derive(Debug, Clone)]
struct PreciseJacobi {
    prec: u32,
    off_sq: Vec<Float>,
}

/// Jacobi matrices of one frequency at each precision used so far, and the
/// precision that last sufficed for each kind of task. Clusters and gaps are
/// visited outward from the spectrum's center, where the precision they need
/// grows steadily, so the last one is a good place to start the next.
#[derive(Debug, Clone)]
pub(crate) struct PreciseCache {
    p: u64,
    q: u64,
    levels: Vec<PreciseJacobi>,
    cluster_prec: u32,
    gap_prec: u32,
}

impl PreciseCache {
    pub(crate) fn new(p: u64, q: u64) -> Self {
        Self { p, q, levels: Vec::new(), cluster_prec: START_PRECISION, gap_prec: START_PRECISION }
    }

    fn at(&mut self, prec: u32) -> &PreciseJacobi {
        match self.levels.iter().position(|m| m.prec == prec) {
            Some(i) => &self.levels[i],
            None => {
                self.levels.push(PreciseJacobi::new(self.p, self.q, prec));
                self.levels.last().expect("just pushed")
            }
        }
    }
}

impl PreciseJacobi {
    fn new(p: u64, q: u64, prec: u32) -> Self {
        let work = prec + 32;
        let pi = Float::with_val(work, Constant::Pi);
        let off_sq = (1..q)
            .map(|j| {
                // reduce p j modulo 2q exactly before touching pi
                let m = ((p as u128 * j as u128) % (2 * q as u128)) as u64;
                let mut a = Float::with_val(work, &pi * m);
                a /= q;
                a.sin_mut();
                a.square_mut();
                a *= 4u32;
                Float::with_val(prec, &a)
            })
            .collect();
        Self { prec, off_sq }
    }

    fn guard(d: &mut Float) {
        if d.is_zero() {
            d.assign(-1e-300);
        }
    }

    fn count(&self, x: &Float) -> usize {
        let mut d = Float::with_val(self.prec, -x);
        let mut t = Float::new(self.prec);
        Self::guard(&mut d);
        let mut count = usize::from(d.is_sign_negative());
        for b2 in &self.off_sq {
            t.assign(b2 / &d);
            d.assign(-x);
            d -= &t;
            Self::guard(&mut d);
            if d.is_sign_negative() {
                count += 1;
            }
        }
        count
    }

    /// Sturm count and `d/dx ln|det(T - xI)|`.
    fn count_and_log_derivative(&self, x: &Float) -> (usize, Float) {
        let prec = self.prec;
        let mut d = Float::with_val(prec, -x);
        Self::guard(&mut d);
        let mut count = usize::from(d.is_sign_negative());
        let mut r = Float::with_val(prec, -1.0 / &d);
        let mut sum = r.clone();
        let mut t = Float::new(prec);
        let mut dp = Float::new(prec);
        for b2 in &self.off_sq {
            t.assign(b2 / &d);
            dp.assign(&t * &r);
            dp -= 1u32;
            d.assign(-x);
            d -= &t;
            Self::guard(&mut d);
            if d.is_sign_negative() {
                count += 1;
            }
            r.assign(&dp / &d);
            sum += &r;
        }
        (count, sum)
    }

    /// Sturm count with the first and second derivatives of
    /// `ln|det(T - xI)|`, accumulated pivot by pivot.
    fn count_and_log_derivatives(&self, x: &Float) -> (usize, Float, Float) {
        let prec = self.prec;
        let mut d = Float::with_val(prec, -x);
        Self::guard(&mut d);
        let mut count = usize::from(d.is_sign_negative());
        // r = d'/d and s = d''/d for the current pivot d
        let mut r = Float::with_val(prec, -1.0 / &d);
        let mut s = Float::new(prec);
        let mut first = r.clone();
        let mut second = Float::with_val(prec, -r.clone().square());
        let mut t = Float::new(prec);
        let mut dp = Float::new(prec);
        let mut dpp = Float::new(prec);
        let mut r2 = Float::new(prec);
        for b2 in &self.off_sq {
            // next pivot: d = -x - b^2/d, d' = -1 + t r, d'' = t (s - 2 r^2)
            t.assign(b2 / &d);
            r2.assign(r.square_ref());
            dpp.assign(&r2 * 2u32);
            dpp.sub_from(&s);
            dpp *= &t;
            dp.assign(&t * &r);
            dp -= 1u32;
            d.assign(-x);
            d -= &t;
            Self::guard(&mut d);
            if d.is_sign_negative() {
                count += 1;
            }
            r.assign(&dp / &d);
            s.assign(&dpp / &d);
            first += &r;
            second += &s;
            r2.assign(r.square_ref());
            second -= &r2;
        }
        (count, first, second)
    }
}

impl PreciseJacobi {
    /// `det(T - E I)` and its derivatives in `E` up to `order` (at most 2);
    /// higher entries are left at zero.
    fn det_derivatives(&self, e: &Float, order: usize) -> [Float; 3] {
        let prec = self.prec;
        let zero = || Float::new(prec);
        let mut prev = [Float::with_val(prec, 1), zero(), zero()];
        let mut cur = [Float::with_val(prec, -e), Float::with_val(prec, -1), zero()];
        let mut next = [zero(), zero(), zero()];
        let mut t = zero();
        for b2 in &self.off_sq {
            // D_k = -E D_{k-1} - b^2 D_{k-2}
            // D'_k = -D_{k-1} - E D'_{k-1} - b^2 D'_{k-2}
            // D''_k = -2 D'_{k-1} - E D''_{k-1} - b^2 D''_{k-2}
            for r in 0..=order {
                next[r].assign(e * &cur[r]);
                t.assign(b2 * &prev[r]);
                next[r] += &t;
                if r > 0 {
                    t.assign(&cur[r - 1] * r as u32);
                    next[r] += &t;
                }
                next[r].neg_assign();
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}

/// Edges around a gap whose excess `|sigma| - 4` at the critical point is
/// too small for `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NarrowGap {
    /// Right half-width of the band below the gap.
    pub w_below: f64,
    /// Left half-width of the band above the gap.
    pub w_prime_above: f64,
    pub delta: f64,
    pub residual_below: f64,
    pub residual_above: f64,
}

/// Resolves the gap between centers `lo_center < hi_center` whose critical
/// point is near `lo_center + critical_offset`, working in multiprecision until the excess of
/// `|sigma|` over 4 at the critical point is resolved.
pub(crate) fn resolve_narrow_gap(
    cache: &mut PreciseCache,
    lo_center: &Float,
    hi_center: &Float,
    critical_offset: f64,
) -> Result<NarrowGap> {
    let (p, q) = (cache.p, cache.q);
    let mut prec = cache.gap_prec;
    while prec <= MAX_PRECISION {
        let mat = cache.at(prec);
        if let Some(gap) = try_narrow_gap(mat, lo_center, hi_center, critical_offset) {
            cache.gap_prec = prec;
            return Ok(gap);
        }
        prec *= 2;
    }
    Err(Error::InterlacingViolated(format!(
        "{p}/{q}: |sigma| does not exceed 4 in the gap above {} at {MAX_PRECISION} bits",
        lo_center.to_f64()
    )))
}

fn try_narrow_gap(mat: &PreciseJacobi, lo_center: &Float, hi_center: &Float, critical_offset: f64) -> Option<NarrowGap> {
    let prec = mat.prec;
    let lo = Float::with_val(prec, lo_center);
    let hi = Float::with_val(prec, hi_center);
    if Float::with_val(prec, &hi - &lo) <= resolution(prec, &hi) << SEPARATION_MARGIN {
        return None;
    }

    // critical point: D' = 0, D' changes sign across it
    let mut c = Float::with_val(prec, &lo + critical_offset);
    if c <= lo || c >= hi {
        c = Float::with_val(prec, &lo + &hi) / 2u32;
    }
    let d_at_lo = mat.det_derivatives(&lo, 1);
    let slope_sign_lo = d_at_lo[1].is_sign_positive();
    let (c, _) = mp_newton(
        |x| {
            let [_, d1, d2] = mat.det_derivatives(x, 2);
            // oriented so the function is negative near lo
            if slope_sign_lo {
                (-d1, -d2)
            } else {
                (d1, d2)
            }
        },
        lo.clone(),
        hi.clone(),
        c,
        &(Float::with_val(prec, &hi - &lo) >> 40),
        prec,
    );
    let [dc, _, d2c] = mat.det_derivatives(&c, 2);
    let four = Float::with_val(prec, 4);
    let excess = Float::with_val(prec, dc.clone().abs() - &four);
    // demand a margin well above the rounding level of the recurrence
    if excess <= (Float::with_val(prec, 4) >> (prec as i32 - 40)) {
        return None;
    }
    let positive = dc.is_sign_positive();
    // |D(x)| - 4, positive at c and -4 at the neighbouring centers
    let level = |x: &Float| -> (Float, Float) {
        let [d0, d1, _] = mat.det_derivatives(x, 1);
        if positive {
            (Float::with_val(prec, &d0 - &four), d1)
        } else {
            (Float::with_val(prec, -&d0) - &four, -d1)
        }
    };
    let guess = Float::with_val(prec, &excess * 2u32) / d2c.abs();
    let guess = guess.sqrt();
    // about a 2^-40 share of the expected gap length
    let x_tol = Float::with_val(prec, &guess >> 40);
    let (below, err_below) = mp_newton(
        &level,
        lo.clone(),
        c.clone(),
        Float::with_val(prec, &c - &guess),
        &x_tol,
        prec,
    );
    let (above, err_above) = mp_newton(
        &level,
        hi.clone(),
        c.clone(),
        Float::with_val(prec, &c + &guess),
        &x_tol,
        prec,
    );
    let width = Float::with_val(prec, &above - &below);
    if width <= resolution(prec, &c) << SEPARATION_MARGIN {
        return None;
    }
    // edges sit on a flat stretch of |D|, so their noise floor can be far
    // above the working resolution
    if width <= Float::with_val(prec, &err_below + &err_above) << 30 {
        return None;
    }
    let residual = |x: &Float| level(x).0.abs().to_f64();
    Some(NarrowGap {
        w_below: Float::with_val(prec, &below - &lo).to_f64(),
        w_prime_above: Float::with_val(prec, &hi - &above).to_f64(),
        delta: Float::with_val(prec, &above - &below).to_f64(),
        residual_below: residual(&below),
        residual_above: residual(&above),
    })
}

/// Safeguarded Newton in multiprecision. `f` is negative at `neg_end` and
/// positive at `pos_end`; neither endpoint is evaluated. Iteration stops
/// once the root is pinned to within `x_tol` or the working resolution,
/// whichever is larger. Returns the root
/// and an error estimate: the last Newton step, or the final bracket when
/// bisection finished the job. Iteration stops early once steps stop
/// shrinking, which means rounding noise in `f` has taken over.
fn mp_newton<F>(mut f: F, neg_end: Float, pos_end: Float, start: Float, x_tol: &Float, prec: u32) -> (Float, Float)
where
    F: FnMut(&Float) -> (Float, Float),
{
    let mut neg = neg_end;
    let mut pos = pos_end;
    let inside = |x: &Float, a: &Float, b: &Float| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        x > lo && x < hi
    };
    let mut x = if inside(&start, &neg, &pos) { start } else { Float::with_val(prec, &neg + &pos) / 2u32 };
    let mut prev_width = Float::with_val(prec, &pos - &neg).abs();
    let mut prev_step: Option<Float> = None;
    for _ in 0..(4 * prec as usize) {
        let (fx, dfx) = f(&x);
        if fx.is_zero() {
            let err = resolution(prec, &x);
            return (x, err);
        }
        if fx.is_sign_negative() {
            neg.assign(&x);
        } else {
            pos.assign(&x);
        }
        let width = Float::with_val(prec, &pos - &neg).abs();
        let mid = Float::with_val(prec, &neg + &pos) / 2u32;
        let tol = resolution(prec, &mid).max(x_tol);
        if width <= tol {
            return (mid, width);
        }
        let step = Float::with_val(prec, &fx / &dfx).abs();
        let newton = Float::with_val(prec, &x - &fx / dfx);
        // a converged step may round back onto x itself, which is a bracket end
        if step <= tol {
            return (newton, step);
        }
        let quarter = Float::with_val(prec, &width / 4u32);
        let halved = Float::with_val(prec, &prev_width / 2u32);
        let ok = newton.is_finite() && inside(&newton, &neg, &pos) && (width <= halved || step < quarter);
        prev_width = width;
        if ok {
            if let Some(prev) = &prev_step {
                if step >= *prev {
                    return (newton, step);
                }
            }
            prev_step = Some(step);
            x = newton;
        } else {
            prev_step = None;
            x = mid;
        }
    }
    let err = Float::with_val(prec, &pos - &neg).abs();
    (x, err)
}

fn resolution(prec: u32, x: &Float) -> Float {
    // a few ulps of max(|x|, 1) at the working precision
    let mag = x.clone().abs().max(&Float::with_val(prec, 1));
    mag >> (prec as i32 - 8)
}

/// The `m` eigenvalues with global indices `first..first + m`, known to lie
/// in `[lo, hi)` up to `f64` error, refined in multiprecision. Precision
/// doubles until every eigenvalue sits in its own bracket.
pub(crate) fn refine_cluster(cache: &mut PreciseCache, first: usize, m: usize, lo: f64, hi: f64) -> Result<Vec<Float>> {
    let (p, q) = (cache.p, cache.q);
    let mut prec = cache.cluster_prec;
    while prec <= MAX_PRECISION {
        let mat = cache.at(prec);
        if let Some(values) = try_refine(mat, first, m, lo, hi)? {
            cache.cluster_prec = prec;
            return Ok(values);
        }
        prec *= 2;
    }
    Err(Error::InterlacingViolated(format!(
        "eigenvalues {first}..{} of {p}/{q} not separated at {MAX_PRECISION} bits",
        first + m
    )))
}

// None: the precision is too low to separate the cluster
fn try_refine(mat: &PreciseJacobi, first: usize, m: usize, lo: f64, hi: f64) -> Result<Option<Vec<Float>>> {
    let prec = mat.prec;
    // f64 brackets can be off by a few ulps; widen until the counts agree
    let mut pad = 0.0f64;
    let (a, b) = loop {
        let a = Float::with_val(prec, lo - pad);
        let b = Float::with_val(prec, hi + pad);
        if mat.count(&a) == first && mat.count(&b) == first + m {
            break (a, b);
        }
        pad = if pad == 0.0 { 1e-14 * hi.abs().max(lo.abs()).max(1.0) } else { 4.0 * pad };
        if pad > 1e-6 {
            return Err(Error::InterlacingViolated(format!(
                "cluster bracket [{lo}, {hi}) does not hold eigenvalues {first}..{}",
                first + m
            )));
        }
    };

    let mut out = Vec::with_capacity(m);
    // brackets with their eigenvalue counts and an optional starting guess
    let mut stack = vec![(a, b, first, first + m, None::<(Float, Float)>)];
    while let Some((a, b, na, nb, start)) = stack.pop() {
        if nb <= na {
            continue;
        }
        if nb - na == 1 {
            out.push(polish(mat, a, b, na, start));
            continue;
        }
        if nb - na == 2 {
            match split_pair(mat, &a, &b, na) {
                PairSplit::Found(split, low, high) => {
                    let spacing = Float::with_val(prec, &high - &low);
                    stack.push((split.clone(), b, na + 1, nb, Some((high, spacing.clone()))));
                    stack.push((a, split, na, na + 1, Some((low, spacing))));
                    continue;
                }
                PairSplit::Unresolved => return Ok(None),
                PairSplit::NoFit => {}
            }
        }
        let mid = Float::with_val(prec, &a + &b) / 2u32;
        let width = Float::with_val(prec, &b - &a);
        if width <= resolution(prec, &mid) {
            return Ok(None);
        }
        let nm = mat.count(&mid).clamp(na, nb);
        stack.push((mid.clone(), b, nm, nb, None));
        stack.push((a, mid, na, nm, None));
    }
    // separations must be resolved to many bits, not just be nonzero
    for w in out.windows(2) {
        let sep = Float::with_val(prec, &w[1] - &w[0]);
        if sep <= resolution(prec, &w[1]) << SEPARATION_MARGIN {
            return Ok(None);
        }
    }
    Ok(Some(out))
}

enum PairSplit {
    /// A point strictly between the two roots, and estimates of both.
    Found(Float, Float, Float),
    /// The pair is narrower than the working precision can resolve.
    Unresolved,
    /// The two-root model does not describe the bracket.
    NoFit,
}

/// The two eigenvalues in `(a, b)`, where `na` lie below `a`, from a local
/// model `det ~ (x - c)^2 - h^2` fitted to the first two log-derivatives.
/// From outside a tight pair the fit lands near its midpoint in one step;
/// from near the midpoint it reads off both roots.
fn split_pair(mat: &PreciseJacobi, a: &Float, b: &Float, na: usize) -> PairSplit {
    let prec = mat.prec;
    let mut x = Float::with_val(prec, a + b) / 2u32;
    for _ in 0..16 {
        let (_, l1, l2) = mat.count_and_log_derivatives(&x);
        // with u = x - c and P = u^2 - h^2: L = 2u/P, L' + L^2 = 2/P,
        // and P < 0 between the two roots
        let denom = Float::with_val(prec, l1.square_ref()) + &l2;
        if !denom.is_normal() {
            return PairSplit::NoFit;
        }
        let u = Float::with_val(prec, &l1 / &denom);
        let p = Float::with_val(prec, 2u32 / &denom);
        let h2 = Float::with_val(prec, u.square_ref()) - &p;
        let h = if h2.is_sign_positive() { h2.sqrt() } else { Float::new(prec) };
        let floor = resolution(prec, &x) << SEPARATION_MARGIN;
        if h <= floor && Float::with_val(prec, u.abs_ref()) <= floor {
            return PairSplit::Unresolved;
        }
        let c = Float::with_val(prec, &x - &u);
        if !(c > *a && c < *b) {
            return PairSplit::NoFit;
        }
        // the split point only has to fall between the roots; polishing
        // each root afterwards supplies the accuracy
        let settled = !h.is_zero() && Float::with_val(prec, u.abs_ref()) <= Float::with_val(prec, &h >> 4);
        x = c;
        if settled {
            if mat.count(&x) != na + 1 {
                return PairSplit::NoFit;
            }
            let low = Float::with_val(prec, &x - &h);
            let high = Float::with_val(prec, &x + &h);
            return PairSplit::Found(x, low, high);
        }
    }
    PairSplit::NoFit
}

/// The single eigenvalue in `[a, b)`, where `k` lie below `a`, by Newton on
/// `det` with bisection as a fallback. A starting guess comes with the
/// distance to its nearest neighbour, and the root is then only pinned to a
/// `2^-60` share of that distance.
fn polish(mat: &PreciseJacobi, mut a: Float, mut b: Float, k: usize, start: Option<(Float, Float)>) -> Float {
    let prec = mat.prec;
    let (start, x_tol) = match start {
        Some((s, spacing)) => (Some(s), spacing >> 60),
        None => (None, Float::new(prec)),
    };
    let mut x = match start {
        Some(s) if s > a && s < b => s,
        _ => Float::with_val(prec, &a + &b) / 2u32,
    };
    let mut prev_width = Float::with_val(prec, &b - &a);
    let mut prev_step: Option<Float> = None;
    for _ in 0..(4 * prec as usize) {
        let (c, log_deriv) = mat.count_and_log_derivative(&x);
        if c > k {
            b.assign(&x);
        } else {
            a.assign(&x);
        }
        let width = Float::with_val(prec, &b - &a);
        let mid = Float::with_val(prec, &a + &b) / 2u32;
        let res = resolution(prec, &mid).max(&x_tol);
        if width <= res {
            return mid;
        }
        let step = Float::with_val(prec, 1u32 / &log_deriv);
        let newton = Float::with_val(prec, &x - &step);
        let step = step.abs();
        // converged, or the step no longer shrinks because rounding noise
        // has the last word; x then already sits at a bracket end
        if step <= res || prev_step.as_ref().is_some_and(|p| step >= *p) {
            return if newton > a && newton < b { newton } else { x };
        }
        let halved = Float::with_val(prec, &prev_width / 2u32);
        let quarter = Float::with_val(prec, &width / 4u32);
        let ok = newton.is_finite() && newton > a && newton < b && (width <= halved || step < quarter);
        prev_width = width;
        if ok {
            prev_step = Some(step);
            x = newton;
        } else {
            prev_step = None;
            x = mid;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_a_known_cluster() {
        // 2/199 has a pair near -2.2730598060989316 split by about 3.0892e-27
        let t = crate::tridiag::SymTridiagonal::new(vec![0.0; 199], crate::discriminant::jacobi_off_diagonal(2, 199));
        let (lo, hi) = (-2.27305980609894, -2.27305980609892);
        let first = t.sturm_count(lo);
        let values = refine_cluster(&mut PreciseCache::new(2, 199), first, 2, lo, hi).unwrap();
        let split = Float::with_val(256, &values[1] - &values[0]).to_f64();
        assert!((split - 3.0892e-27).abs() < 1e-31, "{split}");
    }

    #[test]
    fn agrees_with_f64_on_isolated_values() {
        let t = crate::tridiag::SymTridiagonal::new(vec![0.0; 7], crate::discriminant::jacobi_off_diagonal(3, 7));
        let ev = t.eigenvalues(0.0);
        for (i, &l) in ev.iter().enumerate() {
            let v = refine_cluster(&mut PreciseCache::new(3, 7), i, 1, l - 1e-12, l + 1e-12).unwrap();
            assert!((v[0].to_f64() - l).abs() < 1e-14);
        }
    }
}
