//! Semidirect-product fluid dynamics on periodic grids.
//!
//! 1-D compressible isentropic flow evolves the dual variables
//! `(ρ, σ, ρp)` (mass density, entropy density, momentum density):
//!
//! * `ρ̇ = −√⁻¹ ∂(ρ v √)`
//! * `σ̇ = −√⁻¹ ∂(σ v √)`   (entropy advected as a density)
//! * `(ρp)˙ = −√⁻¹ ∂(v ρ p √) − ∂P`
//!
//! with the flat-metric velocity convention `v = p` (kinetic term
//! `½∫ρ p²`) and the first-law-consistent pressure
//! `P = ρ(ρ ∂U/∂ρ + σ ∂U/∂σ)`. The metric volume factor `√` is carried
//! through the formulas but exercised at 1. Space derivatives are
//! spectral with 2/3-rule dealiasing of the nonlinear fluxes.
//!
//! 2-D incompressible flow on `[0, 2π)²` eliminates the pressure with
//! the orthogonal divergence-free projection `u ↦ u − ∇θ`,
//! `∇²θ = ∇·u`, giving `∂u/∂t = −P(u·∇u)`.

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid1;
use crate::spectral;
use rustfft::num_complex::Complex;
use std::f64::consts::PI;

type Fn2 = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Tolerance of the internal-energy derivative consistency check.
pub const ENERGY_CHECK_TOL: f64 = 1e-8;
/// Max allowed divergence of an incompressible velocity field.
pub const SOLENOIDAL_TOL: f64 = 1e-8;

/// Thermodynamic internal energy `U(ρ, σ)` with analytic partials,
/// validated against central differences on construction.
pub struct InternalEnergy {
    u: Fn2,
    du_drho: Fn2,
    du_dsigma: Fn2,
}

impl InternalEnergy {
    pub fn new(
        u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        du_drho: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        du_dsigma: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let this = Self {
            u: Box::new(u),
            du_drho: Box::new(du_drho),
            du_dsigma: Box::new(du_dsigma),
        };
        for &rho in &[0.5, 1.0, 2.0] {
            for &sigma in &[0.0, 0.7, 1.5] {
                let h = 1e-5;
                let num_r = ((this.u)(rho + h, sigma) - (this.u)(rho - h, sigma)) / (2.0 * h);
                let num_s = ((this.u)(rho, sigma + h) - (this.u)(rho, sigma - h)) / (2.0 * h);
                if ((this.du_drho)(rho, sigma) - num_r).abs()
                    > ENERGY_CHECK_TOL * (1.0 + num_r.abs())
                    || ((this.du_dsigma)(rho, sigma) - num_s).abs()
                        > ENERGY_CHECK_TOL * (1.0 + num_s.abs())
                {
                    return Err(Error::InvalidInput(format!(
                        "internal-energy partials inconsistent at (ρ={rho}, σ={sigma})"
                    )));
                }
            }
        }
        Ok(this)
    }

    /// `U = a·ρ + b·σ`.
    pub fn linear(a: f64, b: f64) -> Self {
        Self {
            u: Box::new(move |rho, sigma| a * rho + b * sigma),
            du_drho: Box::new(move |_, _| a),
            du_dsigma: Box::new(move |_, _| b),
        }
    }

    /// Barotropic power law `U = κ·ρ^(γ−1)`.
    pub fn power(kappa: f64, gamma: f64) -> Self {
        Self {
            u: Box::new(move |rho: f64, _| kappa * rho.powf(gamma - 1.0)),
            du_drho: Box::new(move |rho: f64, _| kappa * (gamma - 1.0) * rho.powf(gamma - 2.0)),
            du_dsigma: Box::new(|_, _| 0.0),
        }
    }

    pub fn value(&self, rho: f64, sigma: f64) -> f64 {
        (self.u)(rho, sigma)
    }

    pub fn d_rho(&self, rho: f64, sigma: f64) -> f64 {
        (self.du_drho)(rho, sigma)
    }

    pub fn d_sigma(&self, rho: f64, sigma: f64) -> f64 {
        (self.du_dsigma)(rho, sigma)
    }
}

/// First-law-consistent pressure `P = ρ(ρ ∂U/∂ρ + σ ∂U/∂σ)`.
pub fn pressure(rho: &[f64], sigma: &[f64], u: &InternalEnergy) -> Vec<f64> {
    rho.iter()
        .zip(sigma)
        .map(|(&r, &s)| r * (r * u.d_rho(r, s) + s * u.d_sigma(r, s)))
        .collect()
}

/// 1-D compressible state `(ρ, σ, p)` on a periodic grid, with the
/// metric volume factor carried explicitly (1 on the flat circle).
#[derive(Debug, Clone, PartialEq)]
pub struct CompressibleState {
    pub grid: PeriodicGrid1,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub p: Vec<f64>,
    pub sqrt_g: Vec<f64>,
    pub time: f64,
}

impl CompressibleState {
    pub fn new(grid: PeriodicGrid1, rho: Vec<f64>, sigma: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        grid.check_len(&rho)?;
        grid.check_len(&sigma)?;
        grid.check_len(&p)?;
        if rho.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("mass density must be nonnegative and finite".into()));
        }
        if sigma.iter().any(|v| !v.is_finite()) || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("fields must be finite".into()));
        }
        let sqrt_g = vec![1.0; grid.n];
        Ok(Self { grid, rho, sigma, p, sqrt_g, time: 0.0 })
    }

    /// Total mass `∫ρ √ dx`.
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.rho.iter().zip(&self.sqrt_g).map(|(r, s)| r * s).sum::<f64>()
    }

    /// Total entropy `∫σ √ dx`.
    pub fn entropy(&self) -> f64 {
        self.grid.dx() * self.sigma.iter().zip(&self.sqrt_g).map(|(r, s)| r * s).sum::<f64>()
    }

    /// Total momentum `∫ρ p √ dx`.
    pub fn momentum_total(&self) -> f64 {
        self.grid.dx()
            * (0..self.grid.n).map(|i| self.rho[i] * self.p[i] * self.sqrt_g[i]).sum::<f64>()
    }

    /// Total energy `½∫ρ p² + ∫ρ U`.
    pub fn energy(&self, u: &InternalEnergy) -> f64 {
        self.grid.dx()
            * (0..self.grid.n)
                .map(|i| {
                    self.sqrt_g[i]
                        * (0.5 * self.rho[i] * self.p[i] * self.p[i]
                            + self.rho[i] * u.value(self.rho[i], self.sigma[i]))
                })
                .sum::<f64>()
    }
}

/// Evolution rates of the dual variables `(ρ, σ, m = ρp)`.
#[derive(Debug, Clone)]
pub struct CompressibleRates {
    pub rho_dot: Vec<f64>,
    pub sigma_dot: Vec<f64>,
    pub momentum_dot: Vec<f64>,
}

fn rates(
    grid: &PeriodicGrid1,
    sqrt_g: &[f64],
    rho: &[f64],
    sigma: &[f64],
    p: &[f64],
    u: &InternalEnergy,
) -> CompressibleRates {
    let n = grid.n;
    let l = grid.length;
    // Flat metric: v = p.
    let v = p;
    let flux_rho: Vec<f64> = (0..n).map(|i| rho[i] * v[i] * sqrt_g[i]).collect();
    let flux_sigma: Vec<f64> = (0..n).map(|i| sigma[i] * v[i] * sqrt_g[i]).collect();
    let flux_m: Vec<f64> = (0..n).map(|i| v[i] * rho[i] * p[i] * sqrt_g[i]).collect();
    let d_flux_rho = spectral::derivative_dealiased(&flux_rho, l);
    let d_flux_sigma = spectral::derivative_dealiased(&flux_sigma, l);
    let d_flux_m = spectral::derivative_dealiased(&flux_m, l);
    let pr = pressure(rho, sigma, u);
    let d_pr = spectral::derivative_dealiased(&pr, l);
    CompressibleRates {
        rho_dot: (0..n).map(|i| -d_flux_rho[i] / sqrt_g[i]).collect(),
        sigma_dot: (0..n).map(|i| -d_flux_sigma[i] / sqrt_g[i]).collect(),
        momentum_dot: (0..n).map(|i| -d_flux_m[i] / sqrt_g[i] - d_pr[i]).collect(),
    }
}

/// Rates at a state.
pub fn compressible_rhs(state: &CompressibleState, u: &InternalEnergy) -> CompressibleRates {
    rates(&state.grid, &state.sqrt_g, &state.rho, &state.sigma, &state.p, u)
}

/// One RK4 step of the compressible system in the conserved variables
/// `(ρ, σ, ρp)`, with the advective CFL bound `dt ≤ 0.5·dx/max|v|`
/// enforced.
pub fn step_compressible(
    state: &CompressibleState,
    u: &InternalEnergy,
    dt: f64,
) -> Result<CompressibleState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let vmax = state.p.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if vmax > 0.0 {
        let limit = 0.5 * state.grid.dx() / vmax;
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
    }
    let n = state.grid.n;
    let m0: Vec<f64> = (0..n).map(|i| state.rho[i] * state.p[i]).collect();
    let eval = |rho: &[f64], sigma: &[f64], m: &[f64]| -> Result<CompressibleRates> {
        let mut p = vec![0.0; n];
        for i in 0..n {
            if !(rho[i] > 0.0) {
                return Err(Error::InvalidInput(
                    "density reached zero during a step; state left the smooth regime".into(),
                ));
            }
            p[i] = m[i] / rho[i];
        }
        Ok(rates(&state.grid, &state.sqrt_g, rho, sigma, &p, u))
    };
    let stage = |base: &(Vec<f64>, Vec<f64>, Vec<f64>), k: &CompressibleRates, a: f64| {
        (
            (0..n).map(|i| base.0[i] + a * k.rho_dot[i]).collect::<Vec<f64>>(),
            (0..n).map(|i| base.1[i] + a * k.sigma_dot[i]).collect::<Vec<f64>>(),
            (0..n).map(|i| base.2[i] + a * k.momentum_dot[i]).collect::<Vec<f64>>(),
        )
    };
    let y0 = (state.rho.clone(), state.sigma.clone(), m0);
    let k1 = eval(&y0.0, &y0.1, &y0.2)?;
    let y1 = stage(&y0, &k1, dt / 2.0);
    let k2 = eval(&y1.0, &y1.1, &y1.2)?;
    let y2 = stage(&y0, &k2, dt / 2.0);
    let k3 = eval(&y2.0, &y2.1, &y2.2)?;
    let y3 = stage(&y0, &k3, dt);
    let k4 = eval(&y3.0, &y3.1, &y3.2)?;
    let mut rho = vec![0.0; n];
    let mut sigma = vec![0.0; n];
    let mut p = vec![0.0; n];
    for i in 0..n {
        rho[i] = y0.0[i]
            + dt / 6.0
                * (k1.rho_dot[i] + 2.0 * k2.rho_dot[i] + 2.0 * k3.rho_dot[i] + k4.rho_dot[i]);
        sigma[i] = y0.1[i]
            + dt / 6.0
                * (k1.sigma_dot[i]
                    + 2.0 * k2.sigma_dot[i]
                    + 2.0 * k3.sigma_dot[i]
                    + k4.sigma_dot[i]);
        let m = y0.2[i]
            + dt / 6.0
                * (k1.momentum_dot[i]
                    + 2.0 * k2.momentum_dot[i]
                    + 2.0 * k3.momentum_dot[i]
                    + k4.momentum_dot[i]);
        if !(rho[i] > 0.0) || !rho[i].is_finite() || !m.is_finite() {
            return Err(Error::NonFinite { step: 0 });
        }
        p[i] = m / rho[i];
    }
    Ok(CompressibleState {
        grid: state.grid,
        rho,
        sigma,
        p,
        sqrt_g: state.sqrt_g.clone(),
        time: state.time + dt,
    })
}

// ---------------------------------------------------------------------
// 2-D incompressible flow on [0, 2π)²
// ---------------------------------------------------------------------

/// Velocity field on the `n × n` periodic grid over `[0, 2π)²`,
/// row-major with `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField2d {
    pub n: usize,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
}

impl VelocityField2d {
    pub fn new(n: usize, ux: Vec<f64>, uy: Vec<f64>) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput(format!("grid size {n} < 8")));
        }
        if ux.len() != n * n || uy.len() != n * n {
            return Err(Error::GridMismatch { expected: n * n, got: ux.len().max(uy.len()) });
        }
        if ux.iter().chain(uy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("velocity field must be finite".into()));
        }
        Ok(Self { n, ux, uy })
    }

    /// Build from samples of a function `(x, y) → value`, row-major.
    pub fn from_fn(
        n: usize,
        fx: impl Fn(f64, f64) -> f64,
        fy: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let h = 2.0 * PI / n as f64;
        let mut ux = Vec::with_capacity(n * n);
        let mut uy = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                ux.push(fx(x, y));
                uy.push(fy(x, y));
            }
        }
        Self::new(n, ux, uy)
    }

    /// Exactly solenoidal field from a streamfunction:
    /// `u = (∂ψ/∂y, −∂ψ/∂x)` computed spectrally.
    pub fn from_streamfunction(n: usize, psi: &[f64]) -> Result<Self> {
        if psi.len() != n * n {
            return Err(Error::GridMismatch { expected: n * n, got: psi.len() });
        }
        let modes = spectral::forward2(psi, n);
        let mut mx = modes.clone();
        let mut my = modes;
        apply_mode_derivative(&mut mx, n, Axis2::Y);
        apply_mode_derivative(&mut my, n, Axis2::X);
        let ux = spectral::inverse2_real(mx, n);
        let uy: Vec<f64> = spectral::inverse2_real(my, n).iter().map(|v| -v).collect();
        Self::new(n, ux, uy)
    }

    /// Kinetic energy `½ ∫ |u|² dx dy`.
    pub fn kinetic_energy(&self) -> f64 {
        let cell = (2.0 * PI / self.n as f64).powi(2);
        0.5 * cell
            * self
                .ux
                .iter()
                .zip(&self.uy)
                .map(|(&a, &b)| a * a + b * b)
                .sum::<f64>()
    }

    /// Enstrophy `½ ∫ ω²` with `ω = ∂uy/∂x − ∂ux/∂y`.
    pub fn enstrophy(&self) -> f64 {
        let n = self.n;
        let mut gx = spectral::forward2(&self.uy, n);
        apply_mode_derivative(&mut gx, n, Axis2::X);
        let mut gy = spectral::forward2(&self.ux, n);
        apply_mode_derivative(&mut gy, n, Axis2::Y);
        let duy_dx = spectral::inverse2_real(gx, n);
        let dux_dy = spectral::inverse2_real(gy, n);
        let cell = (2.0 * PI / n as f64).powi(2);
        0.5 * cell
            * duy_dx
                .iter()
                .zip(&dux_dy)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<f64>()
    }
}

#[derive(Clone, Copy)]
enum Axis2 {
    X,
    Y,
}

fn mode_k(i: usize, n: usize) -> f64 {
    // Zero the Nyquist mode so derivatives stay antisymmetric.
    if n % 2 == 0 && i == n / 2 {
        0.0
    } else {
        spectral::wavenumber_index(i, n) as f64
    }
}

fn apply_mode_derivative(modes: &mut [Complex<f64>], n: usize, axis: Axis2) {
    for j in 0..n {
        for i in 0..n {
            let k = match axis {
                Axis2::X => mode_k(i, n),
                Axis2::Y => mode_k(j, n),
            };
            modes[j * n + i] *= Complex::new(0.0, k);
        }
    }
}

fn dealias_23(modes: &mut [Complex<f64>], n: usize) {
    let cutoff = n as i64 / 3;
    for j in 0..n {
        let kj = spectral::wavenumber_index(j, n);
        for i in 0..n {
            let ki = spectral::wavenumber_index(i, n);
            if ki.abs() > cutoff || kj.abs() > cutoff {
                modes[j * n + i] = Complex::new(0.0, 0.0);
            }
        }
    }
}

fn project_modes(mx: &mut [Complex<f64>], my: &mut [Complex<f64>], n: usize) {
    for j in 0..n {
        let ky = mode_k(j, n);
        for i in 0..n {
            let kx = mode_k(i, n);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let idx = j * n + i;
            let s = (kx * mx[idx] + ky * my[idx]) / k2;
            mx[idx] -= kx * s;
            my[idx] -= ky * s;
        }
    }
}

/// Pointwise divergence `∂ux/∂x + ∂uy/∂y` (spectral).
pub fn divergence(u: &VelocityField2d) -> Vec<f64> {
    let n = u.n;
    let mut mx = spectral::forward2(&u.ux, n);
    let mut my = spectral::forward2(&u.uy, n);
    apply_mode_derivative(&mut mx, n, Axis2::X);
    apply_mode_derivative(&mut my, n, Axis2::Y);
    let dx = spectral::inverse2_real(mx, n);
    let dy = spectral::inverse2_real(my, n);
    dx.iter().zip(&dy).map(|(a, b)| a + b).collect()
}

/// Orthogonal projection onto divergence-free fields: solves
/// `∇²θ = ∇·u` spectrally (zero-mean θ) and returns `u − ∇θ`.
/// Linear, idempotent, and self-adjoint in the grid L² inner product.
pub fn project_divfree(u: &VelocityField2d) -> VelocityField2d {
    let n = u.n;
    let mut mx = spectral::forward2(&u.ux, n);
    let mut my = spectral::forward2(&u.uy, n);
    project_modes(&mut mx, &mut my, n);
    VelocityField2d {
        n,
        ux: spectral::inverse2_real(mx, n),
        uy: spectral::inverse2_real(my, n),
    }
}

/// Incompressible Euler right-hand side `−P(u·∇u)` (pressure eliminated
/// by projection). Rejects inputs whose divergence exceeds
/// [`SOLENOIDAL_TOL`].
pub fn euler_rhs(u: &VelocityField2d) -> Result<VelocityField2d> {
    let n = u.n;
    let max_div = divergence(u).iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if max_div > SOLENOIDAL_TOL {
        return Err(Error::NotSolenoidal { max_div });
    }
    let mx = spectral::forward2(&u.ux, n);
    let my = spectral::forward2(&u.uy, n);
    let deriv = |modes: &[Complex<f64>], axis: Axis2| -> Vec<f64> {
        let mut m = modes.to_vec();
        apply_mode_derivative(&mut m, n, axis);
        spectral::inverse2_real(m, n)
    };
    let dux_dx = deriv(&mx, Axis2::X);
    let dux_dy = deriv(&mx, Axis2::Y);
    let duy_dx = deriv(&my, Axis2::X);
    let duy_dy = deriv(&my, Axis2::Y);
    let adv_x: Vec<f64> =
        (0..n * n).map(|i| u.ux[i] * dux_dx[i] + u.uy[i] * dux_dy[i]).collect();
    let adv_y: Vec<f64> =
        (0..n * n).map(|i| u.ux[i] * duy_dx[i] + u.uy[i] * duy_dy[i]).collect();
    let mut ax = spectral::forward2(&adv_x, n);
    let mut ay = spectral::forward2(&adv_y, n);
    dealias_23(&mut ax, n);
    dealias_23(&mut ay, n);
    project_modes(&mut ax, &mut ay, n);
    let rx = spectral::inverse2_real(ax, n);
    let ry = spectral::inverse2_real(ay, n);
    Ok(VelocityField2d {
        n,
        ux: rx.iter().map(|v| -v).collect(),
        uy: ry.iter().map(|v| -v).collect(),
    })
}

/// One RK4 step of 2-D incompressible Euler; the result is re-projected
/// to keep divergence from accumulating.
pub fn step_euler(u: &VelocityField2d, dt: f64) -> Result<VelocityField2d> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let n = u.n;
    let combine = |base: &VelocityField2d, k: &VelocityField2d, a: f64| VelocityField2d {
        n,
        ux: (0..n * n).map(|i| base.ux[i] + a * k.ux[i]).collect(),
        uy: (0..n * n).map(|i| base.uy[i] + a * k.uy[i]).collect(),
    };
    let k1 = euler_rhs(u)?;
    let k2 = euler_rhs(&combine(u, &k1, dt / 2.0))?;
    let k3 = euler_rhs(&combine(u, &k2, dt / 2.0))?;
    let k4 = euler_rhs(&combine(u, &k3, dt))?;
    let mut next = VelocityField2d {
        n,
        ux: (0..n * n)
            .map(|i| u.ux[i] + dt / 6.0 * (k1.ux[i] + 2.0 * k2.ux[i] + 2.0 * k3.ux[i] + k4.ux[i]))
            .collect(),
        uy: (0..n * n)
            .map(|i| u.uy[i] + dt / 6.0 * (k1.uy[i] + 2.0 * k2.uy[i] + 2.0 * k3.uy[i] + k4.uy[i]))
            .collect(),
    };
    next = project_divfree(&next);
    if next.ux.iter().chain(next.uy.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0 });
    }
    Ok(next)
}
