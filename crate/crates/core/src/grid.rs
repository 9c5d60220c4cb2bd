//! Uniform periodic 1-D grids, quasi-periodic phase fields, and local
//! cubic interpolation.
//!
//! Phase fields `S` are stored as unwrapped samples of a function with a
//! fixed winding `W = S(x + L) - S(x)`; single-valuedness of `e^{iS}`
//! forces `W` to be an integer multiple of 2π, which lets the winding be
//! recovered robustly from samples by rounding. Spectral operations act
//! on the periodic remainder `S(x) - (W/L)·x`.

use crate::error::{Error, Result};
use crate::spectral;
use std::f64::consts::PI;

/// Uniform grid on a circle of circumference `length` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid1 {
    pub n: usize,
    pub length: f64,
}

impl PeriodicGrid1 {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput(format!("grid size {n} < 8")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidInput(format!("grid length {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.length * i as f64 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Trapezoid integral on the circle (exact = rectangle rule here).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.dx() * values.iter().sum::<f64>()
    }

    pub fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n {
            return Err(Error::GridMismatch { expected: self.n, got: values.len() });
        }
        Ok(())
    }
}

/// Winding `S(x+L) - S(x)` of an unwrapped phase sample vector, rounded
/// to the nearest multiple of 2π (single-valuedness of `e^{iS}`).
///
/// The sample at `x = L` is linearly extrapolated from the last two
/// points; the rounding absorbs the O(dx) extrapolation error as long as
/// the phase advances by much less than π per grid cell.
pub fn winding_of(s: &[f64]) -> f64 {
    let n = s.len();
    let extrapolated = 2.0 * s[n - 1] - s[n - 2];
    2.0 * PI * ((extrapolated - s[0]) / (2.0 * PI)).round()
}

/// Gradient of a quasi-periodic field: the linear winding part is
/// handled analytically, the periodic remainder spectrally.
pub fn quasi_periodic_gradient(s: &[f64], grid: &PeriodicGrid1) -> Vec<f64> {
    let sigma = winding_of(s) / grid.length;
    let tilde: Vec<f64> = s
        .iter()
        .enumerate()
        .map(|(i, &v)| v - sigma * grid.point(i))
        .collect();
    let mut d = spectral::derivative(&tilde, grid.length);
    for v in d.iter_mut() {
        *v += sigma;
    }
    d
}

/// Cubic Lagrange interpolation through four points `(xs, ys)` at `x`.
/// The abscissae need not be uniform but must be distinct.
pub fn cubic_lagrange(xs: &[f64; 4], ys: &[f64; 4], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut term = ys[i];
        for j in 0..4 {
            if i != j {
                term *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += term;
    }
    acc
}

/// Periodic cubic interpolation of grid samples at an arbitrary point.
pub fn interp_grid_periodic(values: &[f64], grid: &PeriodicGrid1, x: f64) -> f64 {
    let n = values.len();
    let dx = grid.dx();
    let xw = x.rem_euclid(grid.length);
    let i0 = (xw / dx).floor() as i64;
    let mut xs = [0.0; 4];
    let mut ys = [0.0; 4];
    for (slot, off) in (-1..=2).enumerate() {
        let idx = i0 + off;
        let wrapped = idx.rem_euclid(n as i64) as usize;
        xs[slot] = idx as f64 * dx;
        ys[slot] = values[wrapped];
    }
    cubic_lagrange(&xs, &ys, xw)
}

/// Interpolate a periodic function known at sorted, strictly increasing
/// sample positions `us` spanning one period (`us[i+M] ≡ us[i] + L`,
/// `ys[i+M] ≡ ys[i]`) onto an arbitrary point.
pub fn interp_sorted_periodic(us: &[f64], ys: &[f64], length: f64, x: f64) -> f64 {
    let m = us.len();
    debug_assert_eq!(m, ys.len());
    // Map x into [us[0], us[0] + L).
    let shift = ((x - us[0]) / length).floor();
    let xw = x - shift * length;
    // Binary search for the bracketing interval.
    let mut lo = 0usize;
    let mut hi = m; // conceptual node m is us[0] + L
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let u_mid = if mid == m { us[0] + length } else { us[mid] };
        if u_mid <= xw {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut xs = [0.0; 4];
    let mut vs = [0.0; 4];
    for (slot, off) in (-1..=2).enumerate() {
        let idx = lo as i64 + off;
        let wrapped = idx.rem_euclid(m as i64) as usize;
        // idx - wrapped is a multiple of m; each full period adds L.
        let periods = (idx - wrapped as i64) / m as i64;
        xs[slot] = us[wrapped] + periods as f64 * length;
        vs[slot] = ys[wrapped];
    }
    cubic_lagrange(&xs, &vs, xw)
}
