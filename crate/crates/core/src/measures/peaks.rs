use std::f64::consts::PI;

use super::PhaseDistribution;

/// A local maximum counts as a positive peak above this height.
pub const POSITIVE_PEAK_TOL: f64 = 1e-12;
/// Peaks closer than this in height are treated as equal.
pub const PEAK_EQUALITY_TOL: f64 = 1e-12;

const MIN_SCAN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub phi: f64,
    pub height: f64,
}

/// Height difference between the two largest positive peaks of `S2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncMeasure {
    pub value: f64,
    pub peak_main: Option<Peak>,
    pub peak_second: Option<Peak>,
}

impl SyncMeasure {
    /// Number of positive peaks found (0, 1 or 2).
    pub fn positive_peaks(&self) -> usize {
        self.peak_main.is_some() as usize + self.peak_second.is_some() as usize
    }
}

/// Local maxima of the two-harmonic curve on the circle, heights descending.
pub fn local_maxima(dist: &PhaseDistribution) -> Vec<Peak> {
    let n = dist.samples.len().max(MIN_SCAN);
    let step = 2.0 * PI / n as f64;
    let slope: Vec<f64> = (0..n).map(|k| dist.derivative(k as f64 * step)).collect();
    let mut peaks: Vec<Peak> = Vec::new();
    for k in 0..n {
        let next = (k + 1) % n;
        if slope[k] > 0.0 && slope[next] <= 0.0 {
            let phi = bisect_slope(dist, k as f64 * step, (k + 1) as f64 * step);
            let phi = phi.rem_euclid(2.0 * PI);
            peaks.push(Peak { phi, height: dist.value(phi) });
        }
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    peaks
}

/// Root of the (decreasing) slope inside `[lo, hi]`.
fn bisect_slope(dist: &PhaseDistribution, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist.derivative(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn peak_contrast(dist: &PhaseDistribution) -> SyncMeasure {
    let positive: Vec<Peak> =
        local_maxima(dist).into_iter().filter(|p| p.height > POSITIVE_PEAK_TOL).collect();
    let peak_main = positive.first().copied();
    let peak_second = positive.get(1).copied();
    let main = peak_main.map_or(0.0, |p| p.height);
    let second = peak_second.map_or(0.0, |p| p.height);
    let value = if peak_second.is_some() && main - second <= PEAK_EQUALITY_TOL {
        0.0
    } else {
        (main - second).max(0.0)
    };
    SyncMeasure { value, peak_main, peak_second }
}
