//! Band rows for the butterfly plot over all frequencies `p/q` with
//! `q <= q_max`. Odd `q` uses the full band taxonomy; even `q` falls back
//! to sign sampling of `|sigma(E)| - 4`.

use serde::Serialize;

use crate::discriminant::Discriminant;
use crate::error::Result;
use crate::numeric::{bisect_sign, gcd};
use crate::spectrum::extract;

/// Bisection stops once the bracket is this short.
const SAMPLE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ButterflyRow {
    pub p: u64,
    pub q: u64,
    /// Signed index `j` for odd `q`; position from the left for even `q`.
    pub band_index: i64,
    pub left: f64,
    pub right: f64,
    /// Whether `band_index` is the signed taxonomy index.
    pub taxonomy: bool,
}

/// Numerators used for denominator `q`: `0 <= p <= q` coprime to `q`.
pub fn numerators(q: u64) -> impl Iterator<Item = u64> {
    (0..=q).filter(move |&p| gcd(p, q) == 1)
}

/// All band rows for `1 <= q <= q_max`, ordered by `q`, then `p`, then band.
pub fn butterfly_rows(q_max: u64) -> Result<Vec<ButterflyRow>> {
    let mut rows = Vec::new();
    for q in 1..=q_max {
        for p in numerators(q) {
            rows.extend(frequency_rows(p, q)?);
        }
    }
    Ok(rows)
}

/// Band rows for one frequency.
pub fn frequency_rows(p: u64, q: u64) -> Result<Vec<ButterflyRow>> {
    if q % 2 == 1 {
        let bs = extract(p, q)?;
        return Ok(bs
            .bands
            .iter()
            .map(|b| ButterflyRow { p, q, band_index: b.j, left: b.left, right: b.right, taxonomy: true })
            .collect());
    }
    Ok(sampled_bands(p, q)?
        .into_iter()
        .enumerate()
        .map(|(i, (left, right))| ButterflyRow { p, q, band_index: i as i64, left, right, taxonomy: false })
        .collect())
}

/// Bands of `sigma^{-1}([-4, 4])` found by bisecting the sign of
/// `|sigma(E)| - 4`. Each band holds one zero of `sigma`; between two
/// zeros `ln|sigma|` is concave, so its maximum brackets both edges.
pub fn sampled_bands(p: u64, q: u64) -> Result<Vec<(f64, f64)>> {
    let d = Discriminant::new(p, q)?;
    let zeros = d.zeros();
    let outside = |e: f64| d.eval(e).log_mag() > 4f64.ln();
    let n = zeros.len();
    let mut peaks = Vec::with_capacity(n + 1);
    peaks.push(zeros[0].min(-4.0) - 1.0);
    for w in zeros.windows(2) {
        // the log-derivative sum_k 1/(E - lambda_k) decreases between zeros
        let slope_negative = |e: f64| zeros.iter().map(|z| 1.0 / (e - z)).sum::<f64>() < 0.0;
        peaks.push(bisect_sign(slope_negative, w[0], w[1], SAMPLE_TOLERANCE));
    }
    peaks.push(zeros[n - 1].max(4.0) + 1.0);
    let mut bands = Vec::with_capacity(n);
    for (i, &z) in zeros.iter().enumerate() {
        let (lo, hi) = (peaks[i], peaks[i + 1]);
        let left = if outside(lo) { bisect_sign(|e| !outside(e), lo, z, SAMPLE_TOLERANCE) } else { lo };
        let right = if outside(hi) { bisect_sign(outside, z, hi, SAMPLE_TOLERANCE) } else { hi };
        bands.push((left, right));
    }
    Ok(bands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::spectrum_intervals;

    #[test]
    fn q2_bands_touch_at_zero() {
        // sigma = E^2 - 4 up to sign for 1/2: bands [-2 sqrt 2, 0], [0, 2 sqrt 2]
        let b = sampled_bands(1, 2).unwrap();
        let r = 8f64.sqrt();
        assert_eq!(b.len(), 2);
        assert!((b[0].0 + r).abs() < 1e-12 && b[0].1.abs() < 1e-12);
        assert!(b[1].0.abs() < 1e-12 && (b[1].1 - r).abs() < 1e-12);
    }

    #[test]
    fn sampled_matches_edge_solver_for_even_q() {
        for (p, q) in [(1, 4), (3, 8), (5, 12), (7, 20)] {
            let sampled = sampled_bands(p, q).unwrap();
            let solved = spectrum_intervals(p, q).unwrap();
            assert!((sampled[0].0 - solved[0].left).abs() < 1e-10);
            assert!((sampled[q as usize - 1].1 - solved.last().unwrap().right).abs() < 1e-10);
            // the merged central interval spans the two central sampled bands
            let mid = q as usize / 2;
            let central = solved.iter().find(|iv| iv.left < 0.0 && iv.right > 0.0).unwrap();
            assert!((sampled[mid - 1].0 - central.left).abs() < 1e-10);
            assert!((sampled[mid].1 - central.right).abs() < 1e-10);
        }
    }

    #[test]
    fn odd_rows_carry_taxonomy() {
        let rows = frequency_rows(2, 5).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.taxonomy));
        assert_eq!(rows.iter().map(|r| r.band_index).collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn row_count_covers_every_band() {
        let rows = butterfly_rows(6).unwrap();
        // q bands for every coprime numerator in [0, q]; q = 1 has both 0/1 and 1/1
        let expected: u64 = (1..=6u64).map(|q| numerators(q).count() as u64 * q).sum();
        assert_eq!(rows.len() as u64, expected);
    }
}
