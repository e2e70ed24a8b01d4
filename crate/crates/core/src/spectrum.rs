//! Band and gap structure of the spectrum at rational frequency `p/q`.
//!
//! The spectrum is `{E : |sigma(E)| <= 4}`, a union of `q` bands, one around
//! each zero `lambda_j` of `sigma`. Bands are numbered `j = -s..=s` from left
//! to right for odd `q = 2s + 1`. Edges are found as offsets from their band
//! center by solving `ln|sigma| = ln 4` in the factored form
//! `sigma(E) = -prod_k (E - lambda_k)`, so bands far narrower than an `f64`
//! ulp of their position keep full relative accuracy in their widths.

use std::f64::consts::{E as EULER, LN_2};

use rug::Float;
use serde::Serialize;

use crate::contfrac::ReducedFraction;
use crate::discriminant::jacobi_off_diagonal;
use crate::error::{Error, Result};
use crate::numeric::{bracketed_newton, compensated_sum, gcd};
use std::cell::RefCell;

use crate::precise::{refine_cluster, resolve_narrow_gap, NarrowGap, PreciseCache};
use crate::scaled::ScaledReal;
use crate::tridiag::SymTridiagonal;

/// Neighbouring centers closer than this are re-resolved in multiprecision,
/// so that every center difference carries at least nine correct digits.
const CLUSTER_GAP: f64 = 1e-6;

/// Gaps shorter than this cannot be told apart from touching bands by
/// looking at the `f64` edge positions alone.
pub const GAP_RESOLUTION: f64 = 1e-12;

/// Gaps where `ln(|sigma| / 4)` at the critical point is below this are
/// resolved in multiprecision; in `f64` their length would be lost to
/// cancellation between the two adjacent half-widths.
const NARROW_GAP_LEVEL: f64 = 1e-6;

/// Outer bracket for the extreme edges; the spectrum lies in `[-4, 4]`.
const OUTER_EDGE: f64 = 4.0 + 1e-9;

fn check_frequency(p: u64, q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be >= 1".into()));
    }
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { num: p, den: q });
    }
    Ok(())
}

/// The zeros of `sigma`, ascending, with multiprecision values kept for
/// clusters so that differences between them stay accurate.
#[derive(Debug, Clone)]
pub struct Centers {
    p: u64,
    q: u64,
    values: Vec<f64>,
    /// `precise - values` for refined centers, zero elsewhere.
    residue: Vec<f64>,
    cluster: Vec<Option<usize>>,
    precise: Vec<Vec<Float>>,
    cluster_start: Vec<usize>,
    cache: RefCell<PreciseCache>,
}

impl Centers {
    /// Eigenvalues of the Jacobi matrix for `p/q`. Works for every `q`; the
    /// band taxonomy on top of it is only defined for odd `q`.
    pub fn compute(p: u64, q: u64) -> Result<Self> {
        check_frequency(p, q)?;
        let n = q as usize;
        if n == 1 {
            return Ok(Self {
                p,
                q,
                values: vec![0.0],
                residue: vec![0.0],
                cluster: vec![None],
                precise: vec![],
                cluster_start: vec![],
                cache: RefCell::new(PreciseCache::new(p, q)),
            });
        }
        let t = SymTridiagonal::new(vec![0.0; n], jacobi_off_diagonal(p, q));
        let (_, hi) = t.gershgorin();
        // The spectrum is symmetric about 0, and for odd q the middle
        // eigenvalue is exactly 0. Only the positive half is bisected.
        let upper_start = n / 2 + n % 2;
        let positive = t.eigenvalues_isolated(0.0, hi, upper_start, n);
        if positive.len() != n - upper_start {
            return Err(Error::InterlacingViolated(format!("expected {} positive centers", n - upper_start)));
        }
        let mut values: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
        if n % 2 == 1 {
            values.push(0.0);
        }
        values.extend_from_slice(&positive);

        let mut centers = Self {
            p,
            q,
            values,
            residue: vec![0.0; n],
            cluster: vec![None; n],
            precise: vec![],
            cluster_start: vec![],
            cache: RefCell::new(PreciseCache::new(p, q)),
        };
        centers.refine_clusters()?;
        Ok(centers)
    }

    fn refine_clusters(&mut self) -> Result<()> {
        let n = self.values.len();
        let mut groups = Vec::new();
        let mut i = 0;
        while i < n {
            let mut k = i;
            while k + 1 < n && self.values[k + 1] - self.values[k] < CLUSTER_GAP {
                k += 1;
            }
            if k > i {
                groups.push((i, k));
            }
            i = k + 1;
        }
        // upper-half and self-mirrored groups are refined, the rest mirrored
        let mut refined: Vec<Option<Vec<Float>>> = vec![None; groups.len()];
        for (g, &(a, b)) in groups.iter().enumerate() {
            if a + b + 1 >= n {
                let lo = self.values[a];
                let hi = self.values[b];
                let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
                refined[g] = Some(refine_cluster(self.cache.get_mut(), a, b - a + 1, lo - pad, hi + pad)?);
            }
        }
        for (g, &(a, b)) in groups.iter().enumerate() {
            if refined[g].is_none() {
                let mirror = groups.iter().position(|&(c, d)| c == n - 1 - b && d == n - 1 - a);
                let values = match mirror.and_then(|m| refined[m].as_ref()) {
                    Some(v) => v.iter().rev().map(|x| -x.clone()).collect(),
                    None => {
                        let lo = self.values[a];
                        let hi = self.values[b];
                        let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
                        refine_cluster(self.cache.get_mut(), a, b - a + 1, lo - pad, hi + pad)?
                    }
                };
                refined[g] = Some(values);
            }
        }
        for (g, ((a, _), values)) in groups.into_iter().zip(refined).enumerate() {
            let values = values.expect("every group refined");
            for (off, v) in values.iter().enumerate() {
                let hi = v.to_f64();
                self.values[a + off] = hi;
                self.residue[a + off] = Float::with_val(v.prec(), v - hi).to_f64();
                self.cluster[a + off] = Some(g);
            }
            self.precise.push(values);
            self.cluster_start.push(a);
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nearest `f64` values, ascending (ties possible inside clusters).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of centers that needed multiprecision refinement.
    pub fn refined_count(&self) -> usize {
        self.cluster.iter().filter(|c| c.is_some()).count()
    }

    /// `lambda_a - lambda_b` by position in the sorted list, accurate to
    /// about nine significant digits or better even inside clusters.
    pub fn diff(&self, a: usize, b: usize) -> f64 {
        match (self.cluster[a], self.cluster[b]) {
            (Some(ca), Some(cb)) if ca == cb => {
                let start = self.cluster_start[ca];
                let vals = &self.precise[ca];
                let x = &vals[a - start];
                let y = &vals[b - start];
                Float::with_val(x.prec(), x - y).to_f64()
            }
            _ => (self.values[a] - self.values[b]) + (self.residue[a] - self.residue[b]),
        }
    }

    /// Multiprecision value of center `i` (exact conversion of the `f64`
    /// value outside clusters).
    pub(crate) fn precise_value(&self, i: usize) -> Float {
        match self.cluster[i] {
            Some(c) => self.precise[c][i - self.cluster_start[c]].clone(),
            None => Float::with_val(53, self.values[i]),
        }
    }

    /// Differences `lambda_i - lambda_k` for all `k`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut row: Vec<f64> = self
            .values
            .iter()
            .zip(&self.residue)
            .map(|(v, r)| (self.values[i] - v) + (self.residue[i] - r))
            .collect();
        if let Some(c) = self.cluster[i] {
            let start = self.cluster_start[c];
            for k in start..start + self.precise[c].len() {
                row[k] = self.diff(i, k);
            }
        }
        row[i] = 0.0;
        row
    }
}

/// `ln|sigma(lambda_i + u)| - ln 4` and its `u`-derivative, from the row of
/// center differences `row[k] = lambda_i - lambda_k`.
fn edge_equation(row: &[f64], i: usize, u: f64) -> (f64, f64) {
    let mut deriv = 1.0 / u;
    let mut mant = u.abs();
    let mut exp: i64 = 0;
    for (k, &d) in row.iter().enumerate() {
        if k == i {
            continue;
        }
        let x = u + d;
        deriv += 1.0 / x;
        mant *= x.abs();
        if !(1e-150..=1e150).contains(&mant) {
            let bits = mant.to_bits();
            exp += (bits >> 52) as i64 - 1023;
            mant = f64::from_bits(((bits << 12) >> 12) | (1023u64 << 52));
        }
    }
    (mant.ln() + exp as f64 * LN_2 - 4f64.ln(), deriv)
}

/// `d/du ln|sigma(lambda_i + u)|` and its derivative; zero at a critical
/// point of `sigma`.
fn critical_equation(row: &[f64], i: usize, u: f64) -> (f64, f64) {
    let mut h = 1.0 / u;
    let mut dh = -h * h;
    for (k, &d) in row.iter().enumerate() {
        if k == i {
            continue;
        }
        let r = 1.0 / (u + d);
        h += r;
        dh -= r * r;
    }
    (h, dh)
}

/// Raw per-band data indexed by position `0..q` in the sorted center list.
#[derive(Debug, Clone)]
struct RawBands {
    right: Vec<f64>,
    left: Vec<f64>,
    log_sigma_prime: Vec<f64>,
    residual_right: Vec<f64>,
    residual_left: Vec<f64>,
    /// Offsets from `lambda_i` of the critical point in gap `i` (between
    /// centers `i` and `i + 1`).
    critical: Vec<f64>,
    closed: Vec<bool>,
    narrow: Vec<Option<NarrowGap>>,
}

fn solve_critical(row: &[f64], i: usize) -> f64 {
    let span = -row[i + 1];
    bracketed_newton(|u| critical_equation(row, i, u), span, 0.0, 0.5 * span, 0.0, 200)
}

fn residual(row: &[f64], i: usize, u: f64) -> f64 {
    let (g, _) = edge_equation(row, i, u);
    4.0 * g.exp_m1().abs()
}

fn solve_bands(centers: &Centers, mirror: bool) -> Result<RawBands> {
    let n = centers.len();
    let mut raw = RawBands {
        right: vec![0.0; n],
        left: vec![0.0; n],
        log_sigma_prime: vec![0.0; n],
        residual_right: vec![0.0; n],
        residual_left: vec![0.0; n],
        critical: vec![0.0; n.saturating_sub(1)],
        closed: vec![false; n.saturating_sub(1)],
        narrow: vec![None; n.saturating_sub(1)],
    };
    if n == 1 {
        // sigma(E) = -E: the single band is exactly [-4, 4]
        raw.right[0] = 4.0;
        raw.left[0] = 4.0;
        return Ok(raw);
    }
    let first = if mirror { n / 2 } else { 0 };
    // the central gap of an even q is closed: sigma touches +-4 at E = 0
    let central_gap = if n % 2 == 0 { Some(n / 2 - 1) } else { None };

    let rows: Vec<Option<Vec<f64>>> =
        (0..n).map(|i| if i + 1 >= first { Some(centers.row(i)) } else { None }).collect();

    for gap in first.saturating_sub(1)..n - 1 {
        let row = rows[gap].as_ref().expect("row computed");
        if Some(gap) == central_gap {
            raw.critical[gap] = -centers.values()[gap];
            raw.closed[gap] = true;
            continue;
        }
        let c = solve_critical(row, gap);
        let (g, _) = edge_equation(row, gap, c);
        if g < NARROW_GAP_LEVEL {
            let lo = centers.precise_value(gap);
            let hi = centers.precise_value(gap + 1);
            raw.narrow[gap] = Some(resolve_narrow_gap(&mut centers.cache.borrow_mut(), &lo, &hi, c)?);
        }
        raw.critical[gap] = c;
    }

    for i in first..n {
        let row = rows[i].as_ref().expect("row computed");
        let log_sp = crate::numeric::log_abs_product(row.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &d)| d));
        raw.log_sigma_prime[i] = log_sp;
        let ell = (4f64.ln() - log_sp).exp();

        // right edge: u in (0, c_i)
        if i + 1 < n && raw.closed[i] {
            raw.right[i] = raw.critical[i];
        } else if let Some(ng) = raw.narrow.get(i).copied().flatten() {
            raw.right[i] = ng.w_below;
            raw.residual_right[i] = ng.residual_below;
        } else {
            let hi = if i + 1 < n { raw.critical[i] } else { OUTER_EDGE - centers.values()[i] };
            let u = bracketed_newton(|u| edge_equation(row, i, u), 0.0, hi, ell.min(0.5 * hi), 0.0, 200);
            raw.right[i] = u;
            raw.residual_right[i] = residual(row, i, u);
        }

        // left edge: v in (0, lambda_i - critical point of gap i-1)
        if i > 0 && raw.closed[i - 1] {
            raw.left[i] = centers.values()[i];
        } else if let Some(ng) = if i > 0 { raw.narrow[i - 1] } else { None } {
            raw.left[i] = ng.w_prime_above;
            raw.residual_left[i] = ng.residual_above;
        } else if mirror && i == first && n % 2 == 1 {
            // centermost band of odd q is symmetric about 0
            raw.left[i] = raw.right[i];
            raw.residual_left[i] = raw.residual_right[i];
        } else {
            let hi = if i > 0 {
                row[i - 1] - raw.critical[i - 1]
            } else {
                centers.values()[i] + OUTER_EDGE
            };
            let v = bracketed_newton(
                |v| {
                    let (g, dg) = edge_equation(row, i, -v);
                    (g, -dg)
                },
                0.0,
                hi,
                ell.min(0.5 * hi),
                0.0,
                200,
            );
            raw.left[i] = v;
            raw.residual_left[i] = residual(row, i, -v);
        }
    }

    if mirror {
        for i in 0..first {
            let m = n - 1 - i;
            raw.right[i] = raw.left[m];
            raw.left[i] = raw.right[m];
            raw.log_sigma_prime[i] = raw.log_sigma_prime[m];
            raw.residual_right[i] = raw.residual_left[m];
            raw.residual_left[i] = raw.residual_right[m];
        }
        for gap in 0..first.saturating_sub(1) {
            let m = n - 2 - gap;
            raw.critical[gap] = -row_span(centers, m) - raw.critical[m];
            raw.closed[gap] = raw.closed[m];
            raw.narrow[gap] = raw.narrow[m].map(|ng| NarrowGap {
                w_below: ng.w_prime_above,
                w_prime_above: ng.w_below,
                delta: ng.delta,
                residual_below: ng.residual_above,
                residual_above: ng.residual_below,
            });
        }
    }
    Ok(raw)
}

fn row_span(centers: &Centers, gap: usize) -> f64 {
    centers.diff(gap, gap + 1)
}

#[derive(Debug, Clone, Serialize)]
pub struct Band {
    /// Band number in `-s..=s`.
    pub j: i64,
    pub lambda: f64,
    pub left: f64,
    pub right: f64,
    /// Edge where `sigma = +4` when `q = 3 mod 4`, `-4` when `q = 1 mod 4`.
    pub mu: f64,
    pub eta: f64,
    /// Right half-width `right - lambda`.
    pub w: f64,
    /// Left half-width `lambda - left`.
    pub w_prime: f64,
    /// `4 / |sigma'(lambda)|`.
    pub ell: f64,
    pub sigma_prime: ScaledReal,
    /// `||sigma(edge)| - 4|` at each edge.
    pub residual_left: f64,
    pub residual_right: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gap {
    /// Gap `j` lies between bands `j` and `j + 1`.
    pub j: i64,
    pub left: f64,
    pub right: f64,
    pub delta: f64,
    /// The gap is shorter than [`GAP_RESOLUTION`]; its length is still
    /// computed from center differences and is reported as is.
    pub below_resolution: bool,
}

/// Full band/gap taxonomy for odd `q`.
#[derive(Debug, Clone, Serialize)]
pub struct BandStructure {
    pub p: u64,
    pub q: u64,
    pub s: i64,
    pub bands: Vec<Band>,
    pub gaps: Vec<Gap>,
    #[serde(skip)]
    centers: Centers,
}

impl BandStructure {
    fn pos(&self, j: i64) -> usize {
        assert!(j.abs() <= self.s, "band index {j} outside -{}..={}", self.s, self.s);
        (j + self.s) as usize
    }

    pub fn band(&self, j: i64) -> &Band {
        &self.bands[self.pos(j)]
    }

    /// Gap between bands `j` and `j + 1`, `j in -s..s`.
    pub fn gap(&self, j: i64) -> &Gap {
        assert!(j >= -self.s && j < self.s, "gap index {j} outside -{}..{}", self.s, self.s);
        &self.gaps[(j + self.s) as usize]
    }

    pub fn lambda(&self, j: i64) -> f64 {
        self.band(j).lambda
    }

    pub fn w(&self, j: i64) -> f64 {
        self.band(j).w
    }

    pub fn w_prime(&self, j: i64) -> f64 {
        self.band(j).w_prime
    }

    pub fn delta(&self, j: i64) -> f64 {
        self.gap(j).delta
    }

    pub fn ell(&self, j: i64) -> f64 {
        self.band(j).ell
    }

    /// `lambda_j - lambda_k`, accurate even for clustered centers.
    pub fn center_diff(&self, j: i64, k: i64) -> f64 {
        self.centers.diff(self.pos(j), self.pos(k))
    }

    /// `lambda_j - mu_k` without cancellation.
    pub fn center_minus_mu(&self, j: i64, k: i64) -> f64 {
        let b = self.band(k);
        let offset = if k.rem_euclid(2) == 0 { b.w } else { -b.w_prime };
        self.center_diff(j, k) - offset
    }

    /// `lambda_j - eta_k` without cancellation.
    pub fn center_minus_eta(&self, j: i64, k: i64) -> f64 {
        let b = self.band(k);
        let offset = if k.rem_euclid(2) == 0 { -b.w_prime } else { b.w };
        self.center_diff(j, k) - offset
    }

    pub fn centers(&self) -> &Centers {
        &self.centers
    }

    /// Sign of `sigma` at `mu_j` (the same for every `j`).
    pub fn mu_level(&self) -> f64 {
        mu_level(self.q)
    }

    pub fn measure(&self) -> f64 {
        compensated_sum(self.bands.iter().map(|b| b.w + b.w_prime))
    }
}

/// `sigma(mu_j)`: `+4` for `q = 3 mod 4`, `-4` for `q = 1 mod 4`.
pub fn mu_level(q: u64) -> f64 {
    if q % 4 == 3 {
        4.0
    } else {
        -4.0
    }
}

fn require_odd(q: u64) -> Result<()> {
    if q % 2 == 0 {
        Err(Error::EvenDenominator(q))
    } else {
        Ok(())
    }
}

/// Band centers `lambda_{-s..=s}` for odd `q`.
pub fn band_centers(p: u64, q: u64) -> Result<Centers> {
    check_frequency(p, q)?;
    require_odd(q)?;
    Centers::compute(p, q)
}

pub fn band_edges(centers: Centers) -> Result<BandStructure> {
    let q = centers.q();
    require_odd(q)?;
    let raw = solve_bands(&centers, true)?;
    Ok(assemble(centers, raw))
}

/// Same as [`band_edges`] but solves every band independently instead of
/// mirroring the upper half.
pub fn band_edges_unmirrored(centers: Centers) -> Result<BandStructure> {
    require_odd(centers.q())?;
    let raw = solve_bands(&centers, false)?;
    Ok(assemble(centers, raw))
}

fn assemble(centers: Centers, raw: RawBands) -> BandStructure {
    let q = centers.q();
    let n = centers.len();
    let s = (n as i64 - 1) / 2;
    let vals = centers.values();
    let bands: Vec<Band> = (0..n)
        .map(|i| {
            let j = i as i64 - s;
            let lambda = vals[i];
            let (w, w_prime) = (raw.right[i], raw.left[i]);
            let (left, right) = (lambda - w_prime, lambda + w);
            let (mu, eta) = if j.rem_euclid(2) == 0 { (right, left) } else { (left, right) };
            // sigma = -prod (E - lambda_k): sign of sigma' at lambda_i is
            // -(-1)^(number of centers above)
            let above = n - 1 - i;
            let sign = if above % 2 == 0 { -1 } else { 1 };
            BandStructure::band_from_parts(j, lambda, left, right, mu, eta, w, w_prime, sign, &raw, i)
        })
        .collect();
    let gaps = (0..n.saturating_sub(1))
        .map(|i| {
            let j = i as i64 - s;
            let delta = if raw.closed[i] {
                0.0
            } else if let Some(ng) = raw.narrow[i] {
                ng.delta
            } else {
                centers.diff(i + 1, i) - raw.right[i] - raw.left[i + 1]
            };
            Gap {
                j,
                left: bands[i].right,
                right: bands[i + 1].left,
                delta,
                below_resolution: delta < GAP_RESOLUTION,
            }
        })
        .collect();
    BandStructure { p: centers.p(), q, s, bands, gaps, centers }
}

impl BandStructure {
    #[allow(clippy::too_many_arguments)]
    fn band_from_parts(
        j: i64,
        lambda: f64,
        left: f64,
        right: f64,
        mu: f64,
        eta: f64,
        w: f64,
        w_prime: f64,
        sign: i8,
        raw: &RawBands,
        i: usize,
    ) -> Band {
        let log_sp = raw.log_sigma_prime[i];
        Band {
            j,
            lambda,
            left,
            right,
            mu,
            eta,
            w,
            w_prime,
            ell: (4f64.ln() - log_sp).exp(),
            sigma_prime: ScaledReal::new(sign, log_sp),
            residual_left: raw.residual_left[i],
            residual_right: raw.residual_right[i],
        }
    }
}

/// Centers plus edges for odd `q`.
pub fn extract(p: u64, q: u64) -> Result<BandStructure> {
    band_edges(band_centers(p, q)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    pub measure: f64,
    pub measure_bound: f64,
    pub max_half_width: f64,
    pub half_width_bound: f64,
    pub pass: bool,
}

/// Total band length, checked against `8e/q`, and the largest half-width,
/// checked against `4e/q`.
pub fn measure(bs: &BandStructure) -> MeasureReport {
    let q = bs.q as f64;
    let m = bs.measure();
    let max_w = bs.bands.iter().map(|b| b.w.max(b.w_prime)).fold(0.0, f64::max);
    let measure_bound = 8.0 * EULER / q;
    let half_width_bound = 4.0 * EULER / q;
    MeasureReport {
        measure: m,
        measure_bound,
        max_half_width: max_w,
        half_width_bound,
        pass: m <= measure_bound && max_w < half_width_bound,
    }
}

/// `|sum_j 1/|sigma'(lambda_j)| - 1/q|`.
pub fn last_wilkinson_residual(bs: &BandStructure) -> f64 {
    let sum = compensated_sum(bs.bands.iter().map(|b| (-b.sigma_prime.log_mag()).exp()));
    (sum - 1.0 / bs.q as f64).abs()
}

/// A closed band of the spectrum for any `q`. `band_index` is the band
/// number for odd `q` and `None` for even `q`, whose two central bands
/// touch at 0 and are merged into one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub band_index: Option<i64>,
    pub left: f64,
    pub right: f64,
}

/// The spectrum as a sorted list of disjoint closed intervals.
pub fn spectrum_intervals(p: u64, q: u64) -> Result<Vec<Interval>> {
    if q % 2 == 1 {
        let bs = extract(p, q)?;
        return Ok(bs
            .bands
            .iter()
            .map(|b| Interval { band_index: Some(b.j), left: b.left, right: b.right })
            .collect());
    }
    let centers = Centers::compute(p, q)?;
    let raw = solve_bands(&centers, true)?;
    let vals = centers.values();
    let mut out: Vec<Interval> = Vec::with_capacity(vals.len());
    for i in 0..vals.len() {
        let left = vals[i] - raw.left[i];
        let right = vals[i] + raw.right[i];
        match out.last_mut() {
            Some(last) if i > 0 && raw.closed[i - 1] => last.right = right,
            _ => out.push(Interval { band_index: None, left, right }),
        }
    }
    Ok(out)
}

fn distance_to(intervals: &[Interval], x: f64) -> f64 {
    // first interval whose right end is >= x
    let idx = intervals.partition_point(|iv| iv.right < x);
    let mut best = f64::INFINITY;
    if idx < intervals.len() {
        best = (intervals[idx].left - x).max(0.0);
    }
    if idx > 0 {
        best = best.min(x - intervals[idx - 1].right);
    }
    best
}

/// `sup_{E in a} dist(E, b)` for two sorted interval lists.
pub fn one_sided_hausdorff(a: &[Interval], b: &[Interval]) -> f64 {
    let mut worst = 0.0f64;
    for iv in a {
        worst = worst.max(distance_to(b, iv.left)).max(distance_to(b, iv.right));
        // inside a band the distance peaks at midpoints of gaps of b
        let start = b.partition_point(|x| x.right < iv.left);
        for w in b[start.saturating_sub(1)..].windows(2) {
            let mid = 0.5 * (w[0].right + w[1].left);
            if mid > iv.right {
                break;
            }
            if mid >= iv.left {
                worst = worst.max(distance_to(b, mid));
            }
        }
    }
    worst
}

/// One-sided Hausdorff distance from `S(from)` to `S(to)`.
pub fn hausdorff_gap(from: ReducedFraction, to: ReducedFraction) -> Result<f64> {
    let a = spectrum_intervals(from.num(), from.den())?;
    let b = spectrum_intervals(to.num(), to.den())?;
    Ok(one_sided_hausdorff(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn q3_exact_structure() {
        let bs = extract(1, 3).unwrap();
        let six = 6f64.sqrt();
        let r3 = 3f64.sqrt();
        assert!(close(bs.lambda(-1), -six, 1e-14) && bs.lambda(0) == 0.0 && close(bs.lambda(1), six, 1e-14));
        assert!(close(bs.w(0), r3 - 1.0, 1e-13));
        assert!(close(bs.w_prime(0), r3 - 1.0, 1e-13));
        assert!(close(bs.delta(0), 3.0 - r3, 1e-13));
        assert!(close(bs.delta(-1), 3.0 - r3, 1e-13));
        // outer band [2, 1 + sqrt 3]
        assert!(close(bs.band(1).left, 2.0, 1e-13) && close(bs.band(1).right, 1.0 + r3, 1e-13));
        assert!(last_wilkinson_residual(&bs) < 1e-15);
        assert!(close(bs.band(0).sigma_prime.to_f64(), 6.0, 1e-12));
    }

    #[test]
    fn q1_single_band() {
        let bs = extract(1, 1).unwrap();
        assert_eq!(bs.bands.len(), 1);
        assert!(bs.gaps.is_empty());
        assert_eq!((bs.band(0).left, bs.band(0).right), (-4.0, 4.0));
        assert_eq!(measure(&bs).measure, 8.0);
        assert_eq!(last_wilkinson_residual(&bs), 0.0);
    }

    #[test]
    fn q5_central_band() {
        let bs = extract(1, 5).unwrap();
        let w0 = bs.w(0);
        assert!((w0 - 0.3825).abs() < 1e-3, "{w0}");
        assert!(w0 >= 4.0 / 11.90983);
        let expected = [-2.9356, -1.17564, 0.0, 1.17564, 2.9356];
        for (j, e) in (-2..=2).zip(expected) {
            assert!(close(bs.lambda(j), e, 1e-4));
        }
    }

    #[test]
    fn rejects_even_q() {
        assert_eq!(extract(1, 4).unwrap_err(), Error::EvenDenominator(4));
        assert!(Centers::compute(1, 4).is_ok());
    }

    #[test]
    fn mirrored_and_direct_agree() {
        for (p, q) in [(1, 7), (2, 9), (5, 21), (8, 45)] {
            let a = band_edges(band_centers(p, q).unwrap()).unwrap();
            let b = band_edges_unmirrored(band_centers(p, q).unwrap()).unwrap();
            for (x, y) in a.bands.iter().zip(&b.bands) {
                assert!((x.w - y.w).abs() <= 1e-12 * x.w, "{p}/{q} j={}", x.j);
                assert!((x.w_prime - y.w_prime).abs() <= 1e-12 * x.w_prime);
            }
        }
    }

    #[test]
    fn clustered_centers_are_resolved() {
        let c = band_centers(2, 199).unwrap();
        assert!(c.refined_count() > 0);
        for i in 0..c.len() - 1 {
            assert!(c.diff(i + 1, i) > 0.0, "centers {i}, {} not separated", i + 1);
        }
        let bs = band_edges(c).unwrap();
        for g in &bs.gaps {
            assert!(g.delta > 0.0);
        }
        assert!(last_wilkinson_residual(&bs) < 1e-8 / 199.0);
    }

    #[test]
    fn even_q_intervals_merge_center() {
        let iv = spectrum_intervals(1, 2).unwrap();
        // sigma = -(E^2 - 4) ... bands touch at 0
        assert_eq!(iv.len(), 1);
        assert!(close(iv[0].left, -8f64.sqrt(), 1e-12) && close(iv[0].right, 8f64.sqrt(), 1e-12));
        let iv = spectrum_intervals(1, 4).unwrap();
        assert_eq!(iv.len(), 3);
        for w in iv.windows(2) {
            assert!(w[0].right < w[1].left);
        }
    }

    #[test]
    fn hausdorff_identical_is_zero() {
        let a = ReducedFraction::new(2, 5).unwrap();
        assert_eq!(hausdorff_gap(a, a).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_of_point_sets() {
        let a = [Interval { band_index: None, left: 0.0, right: 10.0 }];
        let b = [
            Interval { band_index: None, left: 0.0, right: 1.0 },
            Interval { band_index: None, left: 5.0, right: 6.0 },
        ];
        assert_eq!(one_sided_hausdorff(&a, &b), 4.0);
        assert_eq!(one_sided_hausdorff(&b, &a), 0.0);
    }
}
