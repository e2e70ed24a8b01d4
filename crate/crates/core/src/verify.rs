//! Checkers for the inequalities and identities satisfied by the band
//! structure at rational frequency. Each check records both sides, the
//! slack and a verdict; nothing here panics on a failed inequality.

use std::f64::consts::{E, LN_2};

use serde::Serialize;

use crate::contfrac::{convergents, expand, parity_check, ContinuedFraction, ReducedFraction};
use crate::discriminant::{consistency_of, jacobi_off_diagonal, sigma_prime0, Discriminant};
use crate::error::{Error, Result};
use crate::numeric::{gcd, log_abs_product};
use crate::spectrum::{extract, last_wilkinson_residual, measure, one_sided_hausdorff, spectrum_intervals, BandStructure};
use crate::trigsums::{beta, EULER_GAMMA};

/// Relative slack allowed before a strict inequality counts as failed:
/// `1e-9 max(|lhs|, |rhs|)` for linear quantities and
/// `1e-9 max(1, |lhs|, |rhs|)` for logarithms.
pub const NUMERICAL_TOLERANCE: f64 = 1e-9;

/// Gaps this long or longer have well-conditioned midpoints for `sigma`.
pub const WIDE_GAP: f64 = 1e-3;

/// Relative tolerance of the product identities `prod_k |lambda_j - mu_k| = 4`.
pub const PRODUCT_IDENTITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub gamma0: f64,
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_ams: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Constants {
    pub fn new() -> Self {
        let c2 = 10f64.exp();
        Self {
            gamma0: EULER_GAMMA,
            beta: beta(),
            c0: 1.0 + 2.0 * E / (5f64.sqrt() - 1.0),
            c1: 14.0,
            c2,
            c_ams: 60.0,
            c3: 16.0 * 3600.0 * c2.powi(4),
            c4: 2.0 * c2 * c2,
        }
    }

    /// `gamma_0 + 5 + beta/ln 2`, the exponent of the refined bound on `|sigma'(0)|`.
    pub fn refined_exponent(&self) -> f64 {
        self.gamma0 + 5.0 + self.beta / LN_2
    }

    /// `ln((2/3) e^{9 + 4 gamma_0/3})`.
    pub fn ln_refined_prefactor(&self) -> f64 {
        (2.0f64 / 3.0).ln() + 9.0 + 4.0 * self.gamma0 / 3.0
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::new()
    }
}

/// How `lhs` and `rhs` are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    /// Natural logarithms, for quantities outside the `f64` range.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckInputs {
    pub p: u64,
    pub q: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
}

impl CheckInputs {
    fn new(p: u64, q: u64) -> Self {
        Self { p, q, j: None, k: None }
    }

    fn at(p: u64, q: u64, j: i64) -> Self {
        Self { p, q, j: Some(j), k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub inputs: CheckInputs,
    pub lhs: f64,
    pub rhs: f64,
    pub scale: Scale,
    /// Positive when the claimed relation holds strictly.
    pub slack: f64,
    pub pass: bool,
    /// Holds only within [`NUMERICAL_TOLERANCE`].
    pub marginal: bool,
    /// Holds with `lhs == rhs` exactly.
    pub equality: bool,
}

impl Check {
    fn with_slack(name: &str, inputs: CheckInputs, lhs: f64, rhs: f64, scale: Scale, slack: f64) -> Self {
        let floor = if scale == Scale::Log { 1.0 } else { 0.0 };
        let tol = NUMERICAL_TOLERANCE * lhs.abs().max(rhs.abs()).max(floor);
        let pass = slack >= -tol;
        Self {
            name: name.to_string(),
            inputs,
            lhs,
            rhs,
            scale,
            slack,
            pass,
            marginal: pass && slack <= tol,
            equality: slack == 0.0,
        }
    }

    /// `lhs > rhs` (or `>=`; the two differ only in the `marginal` flag).
    fn greater(name: &str, inputs: CheckInputs, lhs: f64, rhs: f64, scale: Scale) -> Self {
        Self::with_slack(name, inputs, lhs, rhs, scale, lhs - rhs)
    }

    /// `lhs < rhs`.
    fn less(name: &str, inputs: CheckInputs, lhs: f64, rhs: f64, scale: Scale) -> Self {
        Self::with_slack(name, inputs, lhs, rhs, scale, rhs - lhs)
    }

    /// `|lhs - rhs| <= tol * |rhs|`.
    fn relative(name: &str, inputs: CheckInputs, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = tol * rhs.abs() - (lhs - rhs).abs();
        let pass = slack >= 0.0;
        Self {
            name: name.to_string(),
            inputs,
            lhs,
            rhs,
            scale: Scale::Linear,
            slack,
            pass,
            marginal: false,
            equality: lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// Orders checks by name, then inputs, so merged reports are canonical.
    pub fn sort(&mut self) {
        self.checks
            .sort_by(|a, b| (&a.name, a.inputs.p, a.inputs.q, a.inputs.j, a.inputs.k).cmp(&(&b.name, b.inputs.p, b.inputs.q, b.inputs.j, b.inputs.k)));
    }
}

fn require_odd_at_least_three(q: u64) -> Result<()> {
    if q % 2 == 0 {
        return Err(Error::EvenDenominator(q));
    }
    if q < 3 {
        return Err(Error::InvalidInput(format!("q = {q}: the check needs q >= 3")));
    }
    Ok(())
}

fn require_admissible(p: u64, q: u64) -> Result<ContinuedFraction> {
    let cf = expand(ReducedFraction::new(p, q)?)?;
    if !parity_check(&cf) {
        return Err(Error::ParityViolated(cf.coeffs().to_vec()));
    }
    Ok(cf)
}

/// `mu_j - lambda_j`: `w_j` for even `j`, `-w'_j` for odd `j`.
fn mu_offset(bs: &BandStructure, j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        bs.w(j)
    } else {
        -bs.w_prime(j)
    }
}

/// Gap and band width comparisons for `0 <= j < s`:
/// `Delta_0 > (w_0/4)^2`, `Delta_j > w_j^2 / (4 C_0^{2(j+1)})`,
/// `Delta_j > (w_0/8)^{2j}` and `Delta_j > min(w_j^2, w'_{j+1}^2) / (4q)`.
pub fn lemma1_checks(bs: &BandStructure) -> VerificationReport {
    let c = Constants::new();
    let (p, q, s) = (bs.p, bs.q, bs.s);
    let mut out = VerificationReport::default();
    if s == 0 {
        return out;
    }
    let ln_w0 = bs.w(0).ln();
    let d0 = bs.delta(0);
    out.checks.push(Check::greater("lemma1.central", CheckInputs::at(p, q, 0), d0, (bs.w(0) / 4.0).powi(2), Scale::Linear));
    for j in 0..s {
        let ln_delta = bs.delta(j).ln();
        let inputs = CheckInputs::at(p, q, j);
        if j >= 1 && j < s {
            let rhs = 2.0 * bs.w(j).ln() - 4f64.ln() - 2.0 * (j + 1) as f64 * c.c0.ln();
            out.checks.push(Check::greater("lemma1.band_ratio", inputs, ln_delta, rhs, Scale::Log));
            let rhs = 2.0 * j as f64 * (ln_w0 - 8f64.ln());
            out.checks.push(Check::greater("lemma1.central_power", inputs, ln_delta, rhs, Scale::Log));
        }
        let m = bs.w(j).min(bs.w_prime(j + 1));
        let rhs = 2.0 * m.ln() - (4.0 * q as f64).ln();
        out.checks.push(Check::greater("lemma1.last_remark", inputs, ln_delta, rhs, Scale::Log));
    }
    out
}

pub fn check_lemma1(p: u64, q: u64) -> Result<VerificationReport> {
    require_odd_at_least_three(q)?;
    Ok(lemma1_checks(&extract(p, q)?))
}

/// Points `left_i, lambda_i, right_i` of every band in order, joined by
/// segments of length `w'_i`, `w_i` and `Delta_i`. Distances are summed
/// segment by segment, so none of them comes from a cancelling difference.
struct EdgeLine {
    seg: Vec<f64>,
}

impl EdgeLine {
    fn new(bs: &BandStructure) -> Self {
        let mut seg = Vec::with_capacity(3 * bs.bands.len());
        for (i, b) in bs.bands.iter().enumerate() {
            seg.push(b.w_prime);
            seg.push(b.w);
            if i + 1 < bs.bands.len() {
                seg.push(bs.gaps[i].delta);
            }
        }
        Self { seg }
    }

    fn left(i: usize) -> usize {
        3 * i
    }

    fn center(i: usize) -> usize {
        3 * i + 1
    }

    fn right(i: usize) -> usize {
        3 * i + 2
    }

    /// Distance from point `anchor` to every point.
    fn distances(&self, anchor: usize) -> Vec<f64> {
        let n = self.seg.len() + 1;
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        for m in anchor + 1..n {
            acc += self.seg[m - 1];
            out[m] = acc;
        }
        acc = 0.0;
        for m in (0..anchor).rev() {
            acc += self.seg[m];
            out[m] = acc;
        }
        out
    }
}

/// Point index of `mu_k` (`eta_k` when `mu` is false) for band position `i`.
fn edge_point(bs: &BandStructure, i: usize, mu: bool) -> usize {
    let j = bs.bands[i].j;
    // mu is the right edge for even j
    if (j.rem_euclid(2) == 0) == mu {
        EdgeLine::right(i)
    } else {
        EdgeLine::left(i)
    }
}

/// `prod_{k != j} |mu_j - mu_k| >= 1`, the same for `eta`, and
/// `prod_k |lambda_j - mu_k| = prod_k |lambda_j - eta_k| = 4`.
pub fn cey_checks(bs: &BandStructure) -> VerificationReport {
    let (p, q) = (bs.p, bs.q);
    let line = EdgeLine::new(bs);
    let n = bs.bands.len();
    let mut out = VerificationReport::default();
    for i in 0..n {
        let inputs = CheckInputs::at(p, q, bs.bands[i].j);
        let mut ln_edges = [0.0; 2];
        for (slot, mu) in [(0, true), (1, false)] {
            let from = line.distances(edge_point(bs, i, mu));
            ln_edges[slot] = log_abs_product((0..n).filter(|&k| k != i).map(|k| from[edge_point(bs, k, mu)]));
        }
        out.checks.push(Check::greater("cey.mu", inputs, ln_edges[0], 0.0, Scale::Log));
        out.checks.push(Check::greater("cey.eta", inputs, ln_edges[1], 0.0, Scale::Log));
        let from = line.distances(EdgeLine::center(i));
        let mu4 = log_abs_product((0..n).map(|k| from[edge_point(bs, k, true)])).exp();
        let eta4 = log_abs_product((0..n).map(|k| from[edge_point(bs, k, false)])).exp();
        out.checks.push(Check::relative("product_identity.mu", inputs, mu4, 4.0, PRODUCT_IDENTITY_TOLERANCE));
        out.checks.push(Check::relative("product_identity.eta", inputs, eta4, 4.0, PRODUCT_IDENTITY_TOLERANCE));
    }
    out
}

pub fn check_cey_products(p: u64, q: u64) -> Result<VerificationReport> {
    require_odd_at_least_three(q)?;
    Ok(cey_checks(&extract(p, q)?))
}

/// `q < |sigma'(0)| < C_2 q^{C_1}`, the refined upper bound, and
/// `w_0 >= 4/|sigma'(0)|`.
pub fn lemma2_checks(bs: &BandStructure) -> Result<VerificationReport> {
    let c = Constants::new();
    let (p, q) = (bs.p, bs.q);
    require_admissible(p, q)?;
    let ln_q = (q as f64).ln();
    let ln_sp = sigma_prime0(p, q)?.log_mag();
    let inputs = CheckInputs::new(p, q);
    let mut out = VerificationReport::default();
    if q > 1 {
        out.checks.push(Check::greater("lemma2.lower", inputs, ln_sp, ln_q, Scale::Log));
    }
    out.checks.push(Check::less("lemma2.upper", inputs, ln_sp, c.c2.ln() + c.c1 * ln_q, Scale::Log));
    let refined = c.refined_exponent() * ln_q + c.ln_refined_prefactor();
    out.checks.push(Check::less("lemma2.upper_refined", inputs, ln_sp, refined, Scale::Log));
    out.checks.push(Check::less("lemma2.refined_below_c2", inputs, refined, c.c2.ln() + c.c1 * ln_q, Scale::Log));
    let w0 = bs.w(0);
    let ell = if ln_sp == 0.0 { 4.0 } else { 4.0 * (-ln_sp).exp() };
    out.checks.push(Check::greater("lemma2.central_width", inputs, w0, ell, Scale::Linear));
    Ok(out)
}

pub fn check_lemma2(p: u64, q: u64) -> Result<VerificationReport> {
    require_admissible(p, q)?;
    lemma2_checks(&extract(p, q)?)
}

/// `Delta_0 > (C_2 q^{C_1})^{-2}` and `Delta_j > (2 C_2 q^{C_1})^{-2j}`.
pub fn theorem3_checks(bs: &BandStructure) -> Result<VerificationReport> {
    let c = Constants::new();
    let (p, q, s) = (bs.p, bs.q, bs.s);
    require_admissible(p, q)?;
    let ln_base = c.c2.ln() + c.c1 * (q as f64).ln();
    let mut out = VerificationReport::default();
    if s == 0 {
        return Ok(out);
    }
    out.checks.push(Check::greater("theorem3.central", CheckInputs::at(p, q, 0), bs.delta(0).ln(), -2.0 * ln_base, Scale::Log));
    for j in 1..s {
        let rhs = -2.0 * j as f64 * (2f64.ln() + ln_base);
        out.checks.push(Check::greater("theorem3.gap", CheckInputs::at(p, q, j), bs.delta(j).ln(), rhs, Scale::Log));
    }
    Ok(out)
}

pub fn check_theorem3(p: u64, q: u64) -> Result<VerificationReport> {
    require_admissible(p, q)?;
    require_odd_at_least_three(q)?;
    theorem3_checks(&extract(p, q)?)
}

/// `(sqrt 5 - 1)/2 * l_j < w_j, w'_j < e l_j`, `w_j < 4e/q`, total measure
/// at most `8e/q`, and the Last-Wilkinson sum within `1e-8/q` of `1/q`.
pub fn width_checks(bs: &BandStructure) -> VerificationReport {
    let (p, q) = (bs.p, bs.q);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut out = VerificationReport::default();
    for b in &bs.bands {
        let inputs = CheckInputs::at(p, q, b.j);
        for (name, w) in [("last.right", b.w), ("last.left", b.w_prime)] {
            out.checks.push(Check::greater(&format!("{name}_lower"), inputs, w, golden * b.ell, Scale::Linear));
            out.checks.push(Check::less(&format!("{name}_upper"), inputs, w, E * b.ell, Scale::Linear));
        }
    }
    let inputs = CheckInputs::new(p, q);
    let m = measure(bs);
    out.checks.push(Check::less("measure.total", inputs, m.measure, m.measure_bound, Scale::Linear));
    out.checks.push(Check::less("measure.half_width", inputs, m.max_half_width, m.half_width_bound, Scale::Linear));
    let residual = last_wilkinson_residual(bs);
    out.checks.push(Check::less("last_wilkinson", inputs, residual, 1e-8 / q as f64, Scale::Linear));
    out
}

/// Transfer product against determinant recurrence, and the symmetry
/// `sigma(E) = (-1)^q sigma(-E)`, outside the spectrum and at midpoints of
/// gaps at least [`WIDE_GAP`] long. Near narrow gaps `sigma'` is so large
/// that the rounding of `E` alone moves `sigma` by more than the tolerance.
/// Discrepancies are in `ln|sigma|`, relative to `max(1, |ln|sigma||)`.
pub fn discriminant_checks(bs: &BandStructure) -> Result<VerificationReport> {
    discriminant_checks_for(bs.p, bs)
}

/// [`discriminant_checks`] for the operator at `p/q`, sampling energies from
/// a band structure with the same spectrum (`p/q` or `(q-p)/q`).
fn discriminant_checks_for(p: u64, bs: &BandStructure) -> Result<VerificationReport> {
    let q = bs.q;
    let d = Discriminant::new(p, q)?;
    let mut energies: Vec<f64> =
        bs.gaps.iter().filter(|g| g.delta >= WIDE_GAP).map(|g| 0.5 * (g.left + g.right)).collect();
    energies.extend([-5.0, -4.25, 4.25, 5.0]);
    let mut worst_agreement = 0f64;
    let mut worst_symmetry = 0f64;
    let flip = if q % 2 == 0 { 1 } else { -1 };
    for e in energies {
        let c = consistency_of(&d, e);
        worst_agreement = worst_agreement.max(if c.signs_agree { c.discrepancy } else { f64::INFINITY });
        let (a, b) = (d.eval(e), d.eval(-e));
        let sym = if a.sign() == flip * b.sign() && !a.is_zero() {
            (a.log_mag() - b.log_mag()).abs() / 1f64.max(a.log_mag().abs()).max(b.log_mag().abs())
        } else {
            f64::INFINITY
        };
        worst_symmetry = worst_symmetry.max(sym);
    }
    let inputs = CheckInputs::new(p, q);
    let mut out = VerificationReport::default();
    out.checks.push(Check::less("sigma.transfer_vs_determinant", inputs, worst_agreement, 1e-9, Scale::Linear));
    out.checks.push(Check::less("sigma.symmetry", inputs, worst_symmetry, 1e-10, Scale::Linear));
    Ok(out)
}

/// Discriminant and width checks over every coprime `p/q` with odd
/// `q <= q_max`. Frequencies `p/q` and `(q-p)/q` give the same Jacobi
/// matrix, so bands are extracted once per pair; the discriminant checks
/// still run separately for each numerator.
pub fn identity_sweep(q_max: u64) -> Result<VerificationReport> {
    let mut out = VerificationReport::default();
    for q in (1..=q_max).step_by(2) {
        for p in 1..=(q / 2).max(1) {
            if gcd(p, q) != 1 {
                continue;
            }
            let bs = extract(p, q)?;
            let widths = width_checks(&bs);
            out.extend(discriminant_checks_for(p, &bs)?);
            if q > 1 {
                let mirror = q - p;
                let mismatch = jacobi_off_diagonal(p, q)
                    .iter()
                    .zip(jacobi_off_diagonal(mirror, q))
                    .map(|(a, b)| (a.abs() - b.abs()).abs())
                    .fold(0.0, f64::max);
                out.checks.push(Check::less("mirror.same_operator", CheckInputs::new(mirror, q), mismatch, 1e-15, Scale::Linear));
                out.extend(discriminant_checks_for(mirror, &bs)?);
                let mut relabelled = widths.clone();
                for c in &mut relabelled.checks {
                    c.inputs.p = mirror;
                }
                out.extend(relabelled);
            }
            out.extend(widths);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Lemma1,
    Lemma2,
    Thm3,
    Thm4,
}

/// Every applicable check for a single `p/q`. The admissibility-dependent
/// checks are skipped for fractions that fail the parity condition.
pub fn check_all(p: u64, q: u64) -> Result<VerificationReport> {
    let bs = extract(p, q)?;
    let mut out = VerificationReport::default();
    out.extend(discriminant_checks(&bs)?);
    out.extend(width_checks(&bs));
    if q >= 3 {
        out.extend(lemma1_checks(&bs));
        out.extend(cey_checks(&bs));
    }
    if require_admissible(p, q).is_ok() {
        out.extend(lemma2_checks(&bs)?);
        out.extend(theorem3_checks(&bs)?);
    }
    Ok(out)
}

/// Hausdorff distances between `S(f1)` and `S(f2)` against `60 |f1 - f2|^{1/2}`.
pub fn check_ams_continuity(f1: ReducedFraction, f2: ReducedFraction) -> Result<AmsReport> {
    let a = spectrum_intervals(f1.num(), f1.den())?;
    let b = spectrum_intervals(f2.num(), f2.den())?;
    let c = Constants::new();
    let diff = (f1.num() as f64 * f2.den() as f64 - f2.num() as f64 * f1.den() as f64).abs()
        / (f1.den() as f64 * f2.den() as f64);
    let bound = c.c_ams * diff.sqrt();
    let forward = one_sided_hausdorff(&a, &b);
    let backward = one_sided_hausdorff(&b, &a);
    let inputs = CheckInputs { p: f1.num(), q: f1.den(), j: Some(f2.num() as i64), k: Some(f2.den() as i64) };
    let mut report = VerificationReport::default();
    report.checks.push(Check::less("ams.forward", inputs, forward, bound, Scale::Linear));
    report.checks.push(Check::less("ams.backward", inputs, backward, bound, Scale::Linear));
    Ok(AmsReport { frequency_distance: diff, bound, forward, backward, vacuous: bound >= 8.0, report })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmsReport {
    pub frequency_distance: f64,
    pub bound: f64,
    pub forward: f64,
    pub backward: f64,
    /// The bound exceeds the diameter of `[-4, 4]`.
    pub vacuous: bool,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedInterval {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub outer: ReducedFraction,
    pub inner: ReducedFraction,
    /// `mu_0` of the outer level; its central band is `[-E2, E2]`.
    pub e2: f64,
    /// `mu_0` of the inner level.
    pub e0: f64,
    pub gap0_closure: ClosedInterval,
    pub gap_minus1_closure: ClosedInterval,
    /// `E2 - max(right end of gap_0 closure, -left end of gap_-1 closure)`.
    pub margin: f64,
    pub contained: bool,
}

fn level(cf: &ContinuedFraction, n: usize) -> Result<ReducedFraction> {
    if n == 0 || n > cf.len() {
        return Err(Error::InvalidInput(format!("level {n} outside 1..={}", cf.len())));
    }
    Ok(convergents(cf)?[n - 1])
}

fn require_levels(cf: &ContinuedFraction, n: usize) -> Result<(ReducedFraction, ReducedFraction)> {
    if !parity_check(cf) {
        return Err(Error::ParityViolated(cf.coeffs().to_vec()));
    }
    if n == 0 || n + 1 > cf.len() {
        return Err(Error::InvalidInput(format!("need 1 <= n < {} for {cf}", cf.len())));
    }
    Ok((level(cf, n)?, level(cf, n + 1)?))
}

/// Whether the interior of the central band at level `n` contains the
/// central band and the closures of the two central gaps at level `n + 1`.
/// Reports the outcome without asserting it.
pub fn check_containment(cf: &ContinuedFraction, n: usize) -> Result<ContainmentReport> {
    let (outer, inner) = require_levels(cf, n)?;
    let a = extract(outer.num(), outer.den())?;
    let b = extract(inner.num(), inner.den())?;
    let e2 = a.lambda(0) + mu_offset(&a, 0);
    let e0 = b.lambda(0) + mu_offset(&b, 0);
    let (gap0, gap_m1) = if b.s >= 1 {
        let g0 = b.gap(0);
        let gm = b.gap(-1);
        (ClosedInterval { left: g0.left, right: g0.right }, ClosedInterval { left: gm.left, right: gm.right })
    } else {
        let c = ClosedInterval { left: e0, right: e0 };
        (c, ClosedInterval { left: -e0, right: -e0 })
    };
    let reach = gap0.right.max(-gap_m1.left).max(e0);
    let margin = e2 - reach;
    Ok(ContainmentReport { outer, inner, e2, e0, gap0_closure: gap0, gap_minus1_closure: gap_m1, margin, contained: margin > 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapOverlap {
    /// `-1` or `0`: which central gap of level `n`.
    pub gap: i64,
    pub length: f64,
    /// Longest overlap with a single gap of level `n + 1`.
    pub overlap: f64,
    /// `1 / (C_4 q_n^{kappa/2})`.
    pub bound: f64,
    pub exceeds_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapInheritanceReport {
    pub outer: ReducedFraction,
    pub inner: ReducedFraction,
    pub kappa: f64,
    pub c4: f64,
    /// Empty when level `n` has no gaps.
    pub overlaps: Vec<GapOverlap>,
    pub vacuous: bool,
}

/// Overlap of the central gaps `G_{-1}`, `G_0` at level `n` with the gaps
/// at level `n + 1`, compared with `1/(C_4 q_n^{kappa/2})`.
pub fn check_gap_inheritance(cf: &ContinuedFraction, n: usize, kappa: f64, c4: f64) -> Result<GapInheritanceReport> {
    let (outer, inner) = require_levels(cf, n)?;
    let a = extract(outer.num(), outer.den())?;
    let inner_gaps = if inner.den() % 2 == 1 {
        extract(inner.num(), inner.den())?.gaps.iter().map(|g| (g.left, g.right)).collect::<Vec<_>>()
    } else {
        spectrum_intervals(inner.num(), inner.den())?.windows(2).map(|w| (w[0].right, w[1].left)).collect()
    };
    let bound = 1.0 / (c4 * (outer.den() as f64).powf(kappa / 2.0));
    let mut overlaps = Vec::new();
    if a.s >= 1 {
        for j in [-1, 0] {
            let g = a.gap(j);
            let overlap = inner_gaps
                .iter()
                .map(|&(l, r)| (r.min(g.right) - l.max(g.left)).max(0.0))
                .fold(0.0, f64::max);
            overlaps.push(GapOverlap { gap: j, length: g.delta, overlap, bound, exceeds_bound: overlap > bound });
        }
    }
    let vacuous = overlaps.is_empty();
    Ok(GapInheritanceReport { outer, inner, kappa, c4, overlaps, vacuous })
}
