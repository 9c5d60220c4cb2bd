//! Fourier-based operators on uniform periodic grids.
//!
//! Real fields are transformed through complex FFTs (rustfft); plans are
//! cached per size in thread-local storage. Differentiation multiplies
//! mode k by ik with the Nyquist mode zeroed, which makes the discrete
//! derivative matrix exactly antisymmetric: summation by parts
//! `Σ f·(Dg) = -Σ (Df)·g` holds to round-off, and the coadjoint
//! constructions built on it satisfy their pairing identities to the
//! same accuracy.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Forward transform of a real field; unnormalized rustfft convention.
pub fn forward(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    plan(values.len(), false).process(&mut buf);
    buf
}

/// Inverse transform back to a real field (imaginary parts discarded).
pub fn inverse_real(mut modes: Vec<Complex<f64>>) -> Vec<f64> {
    let n = modes.len();
    plan(n, true).process(&mut modes);
    let scale = 1.0 / n as f64;
    modes.iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber (in index units) of FFT bin `i` for size `n`.
pub fn wavenumber_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Apply a per-mode complex multiplier `f(k)` where `k` is the physical
/// wavenumber `2π·m / length`, and return the resulting real field.
pub fn map_modes<F>(values: &[f64], length: f64, f: F) -> Vec<f64>
where
    F: Fn(f64) -> Complex<f64>,
{
    let n = values.len();
    let mut modes = forward(values);
    for (i, c) in modes.iter_mut().enumerate() {
        let k = 2.0 * PI * wavenumber_index(i, n) as f64 / length;
        *c *= f(k);
    }
    inverse_real(modes)
}

/// Spectral d/dx of a periodic field. The Nyquist mode is zeroed.
pub fn derivative(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
    let mut modes = forward(values);
    for (i, c) in modes.iter_mut().enumerate() {
        if Some(i) == nyquist {
            *c = Complex::new(0.0, 0.0);
            continue;
        }
        let k = 2.0 * PI * wavenumber_index(i, n) as f64 / length;
        *c *= Complex::new(0.0, k);
    }
    inverse_real(modes)
}

/// Zero-mean spectral antiderivative: returns `g` with `dg/dx = f - mean(f)`
/// and `mean(g) = 0`.
pub fn antiderivative(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
    let mut modes = forward(values);
    for (i, c) in modes.iter_mut().enumerate() {
        if i == 0 || Some(i) == nyquist {
            *c = Complex::new(0.0, 0.0);
            continue;
        }
        let k = 2.0 * PI * wavenumber_index(i, n) as f64 / length;
        *c /= Complex::new(0.0, k);
    }
    inverse_real(modes)
}

/// Spectral derivative with a 2/3-rule dealiasing filter applied in the
/// same pass (modes |m| > n/3 are dropped).
pub fn derivative_dealiased(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let cutoff = n as i64 / 3;
    let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
    let mut modes = forward(values);
    for (i, c) in modes.iter_mut().enumerate() {
        let m = wavenumber_index(i, n);
        if Some(i) == nyquist || m.abs() > cutoff {
            *c = Complex::new(0.0, 0.0);
            continue;
        }
        let k = 2.0 * PI * m as f64 / length;
        *c *= Complex::new(0.0, k);
    }
    inverse_real(modes)
}

// ---------------------------------------------------------------------
// 2-D transforms (square grid, row-major storage)
// ---------------------------------------------------------------------

/// In-place 2-D FFT along both axes of a row-major `n × n` buffer.
fn fft2_in_place(buf: &mut [Complex<f64>], n: usize, inverse: bool) {
    let p = plan(n, inverse);
    // Rows.
    for row in buf.chunks_exact_mut(n) {
        p.process(row);
    }
    // Columns via transpose, transform, transpose back.
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = buf[i * n + j];
        }
        p.process(&mut col);
        for i in 0..n {
            buf[i * n + j] = col[i];
        }
    }
}

/// Forward 2-D transform of a real `n × n` field.
pub fn forward2(values: &[f64], n: usize) -> Vec<Complex<f64>> {
    assert_eq!(values.len(), n * n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft2_in_place(&mut buf, n, false);
    buf
}

/// Inverse 2-D transform back to a real field.
pub fn inverse2_real(mut modes: Vec<Complex<f64>>, n: usize) -> Vec<f64> {
    fft2_in_place(&mut modes, n, true);
    let scale = 1.0 / (n * n) as f64;
    modes.iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * PI;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| TWO_PI * i as f64 / n as f64).collect()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let n = 64;
        let xs = grid(n);
        let f: Vec<f64> = xs.iter().map(|&x| x.sin()).collect();
        let d = derivative(&f, TWO_PI);
        for (i, &x) in xs.iter().enumerate() {
            assert!((d[i] - x.cos()).abs() < 1e-12, "at x={x}: {}", d[i]);
        }
    }

    #[test]
    fn derivative_is_antisymmetric() {
        let n = 32;
        let mut r = crate::rng::SplitMix64::new(11);
        let f = r.signed_vec(n);
        let g = r.signed_vec(n);
        let df = derivative(&f, TWO_PI);
        let dg = derivative(&g, TWO_PI);
        let lhs: f64 = f.iter().zip(&dg).map(|(a, b)| a * b).sum();
        let rhs: f64 = df.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert!((lhs + rhs).abs() < 1e-11, "{lhs} vs {rhs}");
    }

    #[test]
    fn antiderivative_inverts_derivative_on_zero_mean() {
        let n = 64;
        let xs = grid(n);
        let f: Vec<f64> = xs.iter().map(|&x| x.cos() + 0.3 * (2.0 * x).sin()).collect();
        let g = antiderivative(&f, TWO_PI);
        let back = derivative(&g, TWO_PI);
        for i in 0..n {
            assert!((back[i] - f[i]).abs() < 1e-12);
        }
        let mean: f64 = g.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-13);
    }

    #[test]
    fn fft2_round_trip() {
        let n = 16;
        let mut r = crate::rng::SplitMix64::new(3);
        let f = r.signed_vec(n * n);
        let back = inverse2_real(forward2(&f, n), n);
        for i in 0..n * n {
            assert!((back[i] - f[i]).abs() < 1e-12);
        }
    }
}
