//! Eigenvalues of a symmetric tridiagonal matrix by Sturm-count bisection.

/// Symmetric tridiagonal matrix: main diagonal and first off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    off_sq: Vec<f64>,
    pivmin: f64,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n-1");
        let off_sq: Vec<f64> = off.iter().map(|b| b * b).collect();
        let max_sq = off_sq.iter().copied().fold(1.0, f64::max);
        Self { diag, off, off_sq, pivmin: f64::MIN_POSITIVE * max_sq }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Number of eigenvalues strictly below `x`: the count of negative
    /// pivots in the LDL^T factorization of `T - xI`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d.abs() <= self.pivmin {
            d = -self.pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            d = self.diag[i] - x - self.off_sq[i - 1] / d;
            if d.abs() <= self.pivmin {
                d = -self.pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        let pad = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) + 2.0 * self.pivmin;
        (lo - pad, hi + pad)
    }

    /// All eigenvalues in ascending order. Each is bisected until its
    /// bracket is narrower than `tol` or cannot be split further in `f64`.
    pub fn eigenvalues(&self, tol: f64) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        self.eigenvalues_in(lo, hi, tol)
    }

    /// Sturm count at `x` together with `d/dx ln|det(T - xI)|`, accumulated
    /// from the same pivots.
    pub fn sturm_with_log_derivative(&self, x: f64) -> (usize, f64) {
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d.abs() <= self.pivmin {
            d = -self.pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        // r = d'/d for the current pivot
        let mut r = -1.0 / d;
        let mut log_deriv = r;
        for i in 1..self.diag.len() {
            let t = self.off_sq[i - 1] / d;
            let dp = -1.0 + t * r;
            d = self.diag[i] - x - t;
            if d.abs() <= self.pivmin {
                d = -self.pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
            r = dp / d;
            log_deriv += r;
        }
        (count, log_deriv)
    }

    /// Eigenvalues in `[lo, hi)`, ascending.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
        let n_lo = self.sturm_count(lo);
        let n_hi = self.sturm_count(hi);
        self.eigenvalues_counted(lo, hi, n_lo, n_hi, tol)
    }

    /// Eigenvalues in `[lo, hi)` when the counts at both ends are already
    /// known, for instance from a symmetry of the spectrum.
    pub fn eigenvalues_counted(&self, lo: f64, hi: f64, n_lo: usize, n_hi: usize, tol: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_hi.saturating_sub(n_lo));
        // depth-first, left branch first, so output comes out sorted
        let mut stack = vec![(lo, hi, n_lo, n_hi)];
        while let Some((a, b, na, nb)) = stack.pop() {
            if nb <= na {
                continue;
            }
            let mid = 0.5 * (a + b);
            if b - a <= tol || mid <= a || mid >= b {
                out.extend(std::iter::repeat(mid).take(nb - na));
                continue;
            }
            let nm = self.sturm_count(mid).clamp(na, nb);
            stack.push((mid, b, nm, nb));
            stack.push((a, mid, na, nm));
        }
        out
    }

    /// Eigenvalues in `[lo, hi)` to full `f64` resolution. Bisection runs only
    /// until each eigenvalue sits alone in its bracket; Newton steps on
    /// `ln|det(T - xI)|` then finish it, falling back to bisection whenever a
    /// step leaves the bracket or stalls. Eigenvalues closer together than
    /// `f64` can separate come out as repeated or adjacent values.
    pub fn eigenvalues_isolated(&self, lo: f64, hi: f64, n_lo: usize, n_hi: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_hi.saturating_sub(n_lo));
        let mut stack = vec![(lo, hi, n_lo, n_hi)];
        while let Some((a, b, na, nb)) = stack.pop() {
            if nb <= na {
                continue;
            }
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                out.extend(std::iter::repeat(mid).take(nb - na));
                continue;
            }
            if nb - na == 1 {
                out.push(self.polish(a, b, na));
                continue;
            }
            let nm = self.sturm_count(mid).clamp(na, nb);
            stack.push((mid, b, nm, nb));
            stack.push((a, mid, na, nm));
        }
        out
    }

    // the single eigenvalue in [a, b), where sturm_count(a) == k
    fn polish(&self, mut a: f64, mut b: f64, k: usize) -> f64 {
        let mut x = 0.5 * (a + b);
        let mut prev_width = b - a;
        for _ in 0..200 {
            let (c, log_deriv) = self.sturm_with_log_derivative(x);
            if c > k {
                b = x;
            } else {
                a = x;
            }
            let width = b - a;
            let next_mid = 0.5 * (a + b);
            if next_mid <= a || next_mid >= b {
                return next_mid;
            }
            // Newton on det: x - det/det' = x - 1/(ln det)'
            let newton = x - 1.0 / log_deriv;
            let ok = newton.is_finite()
                && newton > a
                && newton < b
                && (width <= 0.5 * prev_width || (newton - x).abs() < 0.25 * width);
            prev_width = width;
            let next = if ok { newton } else { next_mid };
            if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return next;
            }
            x = next;
        }
        x
    }
}
