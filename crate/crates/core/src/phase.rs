//! Phase-field transport on a periodic 1-D grid by the method of
//! characteristics.
//!
//! The state carries a synchronicity phase `S` (the section `η = e^{iS}`
//! of the circle bundle over the grid, stored unwrapped), an
//! emergence-density `ρ`, and a set of markers that ride the
//! characteristics of a point Hamiltonian `H(x, p)`:
//!
//! * canonical momentum is the phase gradient, `p = ħ̄ ∂S/∂x`;
//! * markers obey `ẋ = ∂H/∂p`, `ṗ = −∂H/∂x` and accumulate phase at the
//!   rate `L/ħ̄` with `L = v·p − H`;
//! * grid `S` and `ρ` are resampled views of the marker data. Density is
//!   resampled through each marker's frozen cumulative-mass coordinate,
//!   which keeps `∫ρ dx` constant to round-off.
//!
//! A reference phase `R*` (external time section) turns the state into
//! emergence diagnostics: the shadow phase is `R = R* − S`, the
//! emergence frequency is `f = −(1/2π) ∂R/∂t` (sign fixed by
//! `ς = e^{iR}`), `f` is transported along characteristics, and marker
//! histories where `R` crosses `0 mod 2π` are the emergence events.
//!
//! Caustics (crossing characteristics) are detected and reported as
//! errors, not handled; the scheme assumes the smooth regime.

use crate::error::{Error, Result};
use crate::grid::{self, PeriodicGrid1};
use crate::spectral;
use std::f64::consts::PI;

type Fn2 = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Tolerance of the Hamiltonian gradient consistency check.
pub const HAMILTONIAN_CHECK_TOL: f64 = 1e-6;

/// A point Hamiltonian `H(x, p)` with optional analytic partials
/// (central differences otherwise).
pub struct Hamiltonian1d {
    h: Fn2,
    dp: Option<Fn2>,
    dx: Option<Fn2>,
    pub time_dependent: bool,
}

impl Hamiltonian1d {
    pub fn new(h: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { h: Box::new(h), dp: None, dx: None, time_dependent: false }
    }

    pub fn with_dp(mut self, dp: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dp = Some(Box::new(dp));
        self
    }

    pub fn with_dx(mut self, dx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dx = Some(Box::new(dx));
        self
    }

    /// `H = p²/2m`.
    pub fn free_particle(mass: f64) -> Self {
        Self::new(move |_x, p| p * p / (2.0 * mass))
            .with_dp(move |_x, p| p / mass)
            .with_dx(|_x, _p| 0.0)
    }

    /// `H = p²/2m + V(x)` with analytic `V'`.
    pub fn with_potential(
        mass: f64,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(move |x, p| p * p / (2.0 * mass) + v(x))
            .with_dp(move |_x, p| p / mass)
            .with_dx(move |x, _p| dv(x))
    }

    /// `H = c·√(p² + m²c²)`.
    pub fn relativistic(mass: f64, c: f64) -> Self {
        Self::new(move |_x, p| c * (p * p + mass * mass * c * c).sqrt())
            .with_dp(move |_x, p| c * p / (p * p + mass * mass * c * c).sqrt())
            .with_dx(|_x, _p| 0.0)
    }

    pub fn value(&self, x: f64, p: f64) -> f64 {
        (self.h)(x, p)
    }

    pub fn d_dp(&self, x: f64, p: f64) -> f64 {
        match &self.dp {
            Some(f) => f(x, p),
            None => {
                let eps = 1e-6 * (1.0 + p.abs());
                ((self.h)(x, p + eps) - (self.h)(x, p - eps)) / (2.0 * eps)
            }
        }
    }

    pub fn d_dx(&self, x: f64, p: f64) -> f64 {
        match &self.dx {
            Some(f) => f(x, p),
            None => {
                let eps = 1e-6 * (1.0 + x.abs());
                ((self.h)(x + eps, p) - (self.h)(x - eps, p)) / (2.0 * eps)
            }
        }
    }

    /// Check analytic partials against central differences at probes.
    pub fn check_consistency(&self, probes: &[(f64, f64)]) -> Result<()> {
        for &(x, p) in probes {
            let eps_p = 1e-6 * (1.0 + p.abs());
            let num_dp = ((self.h)(x, p + eps_p) - (self.h)(x, p - eps_p)) / (2.0 * eps_p);
            let eps_x = 1e-6 * (1.0 + x.abs());
            let num_dx = ((self.h)(x + eps_x, p) - (self.h)(x - eps_x, p)) / (2.0 * eps_x);
            let got_dp = self.d_dp(x, p);
            let got_dx = self.d_dx(x, p);
            if (got_dp - num_dp).abs() > HAMILTONIAN_CHECK_TOL * (1.0 + num_dp.abs())
                || (got_dx - num_dx).abs() > HAMILTONIAN_CHECK_TOL * (1.0 + num_dx.abs())
            {
                return Err(Error::InvalidInput(format!(
                    "Hamiltonian partials inconsistent at (x={x}, p={p})"
                )));
            }
        }
        Ok(())
    }
}

/// A characteristic marker. Positions are unwrapped (not reduced mod L)
/// so marker ordering on the circle stays explicit; `s_acc` is the total
/// synchronicity phase carried by the marker (initialized to `S(x₀)`);
/// `mass_coord` is the frozen cumulative-mass label used for density
/// resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub p: f64,
    pub s_acc: f64,
    pub weight: f64,
    pub mass_coord: f64,
}

/// Grid state: phase `S`, emergence-density `ρ`, markers, `ħ̄`, time.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub grid: PeriodicGrid1,
    pub s: Vec<f64>,
    pub rho: Vec<f64>,
    pub markers: Vec<Marker>,
    pub hbar: f64,
    pub time: f64,
    winding: f64,
    mass: f64,
}

impl PhaseState {
    /// Build a state from grid samples of `S` and `ρ`, seeding one
    /// marker per grid point. Marker weights are `ρ_i / Σρ_j` so they
    /// sum to one exactly.
    pub fn new(grid: PeriodicGrid1, s: Vec<f64>, rho: Vec<f64>, hbar: f64) -> Result<Self> {
        grid.check_len(&s)?;
        grid.check_len(&rho)?;
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        if s.iter().any(|v| !v.is_finite()) || rho.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite field values".into()));
        }
        if rho.iter().any(|&v| v < -1e-12) {
            return Err(Error::InvalidInput("emergence-density must be nonnegative".into()));
        }
        let rho: Vec<f64> = rho.iter().map(|&v| v.max(0.0)).collect();
        let rho_sum: f64 = rho.iter().sum();
        if rho_sum <= 0.0 {
            return Err(Error::InvalidInput("emergence-density has zero total mass".into()));
        }
        let winding = grid::winding_of(&s);
        let mass = grid.integrate(&rho);
        let sigma = winding / grid.length;
        let s_tilde: Vec<f64> =
            s.iter().enumerate().map(|(i, &v)| v - sigma * grid.point(i)).collect();
        let mut p = spectral::derivative(&s_tilde, grid.length);
        for v in p.iter_mut() {
            *v = hbar * (*v + sigma);
        }
        // Cumulative mass C(x) = (mass/L)·x + zero-mean antiderivative.
        let cumulative = spectral::antiderivative(&rho, grid.length);
        let markers = (0..grid.n)
            .map(|i| {
                let x = grid.point(i);
                Marker {
                    x,
                    p: p[i],
                    s_acc: s[i],
                    weight: rho[i] / rho_sum,
                    mass_coord: mass / grid.length * x + cumulative[i],
                }
            })
            .collect();
        Ok(Self { grid, s, rho, markers, hbar, time: 0.0, winding, mass })
    }

    /// Phase winding `S(x+L) − S(x)` (a multiple of 2π, conserved).
    pub fn winding(&self) -> f64 {
        self.winding
    }

    /// Total grid mass `∫ρ dx` (conserved by resampling).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Canonical momentum field `p = ħ̄ ∂S/∂x` (spectral).
    pub fn momentum(&self) -> Vec<f64> {
        let sigma = self.winding / self.grid.length;
        let tilde: Vec<f64> = self
            .s
            .iter()
            .enumerate()
            .map(|(i, &v)| v - sigma * self.grid.point(i))
            .collect();
        let mut d = spectral::derivative(&tilde, self.grid.length);
        for v in d.iter_mut() {
            *v = self.hbar * (*v + sigma);
        }
        d
    }

    /// Velocity field `v = ∂H/∂p(x, p(x))`.
    pub fn velocity(&self, h: &Hamiltonian1d) -> Vec<f64> {
        let p = self.momentum();
        (0..self.grid.n).map(|i| h.d_dp(self.grid.point(i), p[i])).collect()
    }

    /// Lagrangian field `L = v·p − H(x, p)` (Legendre back-transform).
    pub fn lagrangian(&self, h: &Hamiltonian1d) -> Vec<f64> {
        let p = self.momentum();
        (0..self.grid.n)
            .map(|i| {
                let x = self.grid.point(i);
                h.d_dp(x, p[i]) * p[i] - h.value(x, p[i])
            })
            .collect()
    }
}

fn marker_rates(h: &Hamiltonian1d, hbar: f64, x: f64, p: f64) -> (f64, f64, f64) {
    let v = h.d_dp(x, p);
    let pdot = -h.d_dx(x, p);
    let sdot = (v * p - h.value(x, p)) / hbar;
    (v, pdot, sdot)
}

fn advance_marker(h: &Hamiltonian1d, hbar: f64, m: &Marker, dt: f64) -> Marker {
    let (k1x, k1p, k1s) = marker_rates(h, hbar, m.x, m.p);
    let (k2x, k2p, k2s) = marker_rates(h, hbar, m.x + dt / 2.0 * k1x, m.p + dt / 2.0 * k1p);
    let (k3x, k3p, k3s) = marker_rates(h, hbar, m.x + dt / 2.0 * k2x, m.p + dt / 2.0 * k2p);
    let (k4x, k4p, k4s) = marker_rates(h, hbar, m.x + dt * k3x, m.p + dt * k3p);
    Marker {
        x: m.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        p: m.p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
        s_acc: m.s_acc + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
        weight: m.weight,
        mass_coord: m.mass_coord,
    }
}

/// One transport step: advect markers by Hamilton's equations (RK4),
/// accumulate phase at rate `L/ħ̄`, then resample grid `S` and `ρ` from
/// the markers. Fails with [`Error::Caustic`] if marker order on the
/// circle breaks.
pub fn step(state: &PhaseState, h: &Hamiltonian1d, dt: f64) -> Result<PhaseState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let markers: Vec<Marker> =
        state.markers.iter().map(|m| advance_marker(h, state.hbar, m, dt)).collect();
    let t_next = state.time + dt;
    for m in &markers {
        if !(m.x.is_finite() && m.p.is_finite() && m.s_acc.is_finite()) {
            return Err(Error::NonFinite { step: 0 });
        }
    }
    // Characteristic-crossing check: unwrapped positions must stay
    // strictly increasing cyclically.
    let n = markers.len();
    for i in 0..n {
        let gap = if i + 1 < n {
            markers[i + 1].x - markers[i].x
        } else {
            markers[0].x + state.grid.length - markers[n - 1].x
        };
        if gap <= 0.0 {
            return Err(Error::Caustic { time: t_next });
        }
    }
    let (s, rho) = resample(&markers, state);
    Ok(PhaseState {
        grid: state.grid,
        s,
        rho,
        markers,
        hbar: state.hbar,
        time: t_next,
        winding: state.winding,
        mass: state.mass,
    })
}

/// Resample `(S, ρ)` at the grid points from marker data.
///
/// `S` is interpolated through the periodic remainder of the marker
/// phases; `ρ` is interpolated through the cumulative-mass coordinates
/// and differentiated spectrally, so the grid integral equals the frozen
/// total mass exactly.
fn resample(markers: &[Marker], state: &PhaseState) -> (Vec<f64>, Vec<f64>) {
    let grid = &state.grid;
    let l = grid.length;
    let sigma_s = state.winding / l;
    let sigma_c = state.mass / l;
    let us: Vec<f64> = markers.iter().map(|m| m.x).collect();
    let g_phase: Vec<f64> = markers.iter().map(|m| m.s_acc - sigma_s * m.x).collect();
    let g_mass: Vec<f64> = markers.iter().map(|m| m.mass_coord - sigma_c * m.x).collect();
    let mut s = Vec::with_capacity(grid.n);
    let mut c_tilde = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.point(i);
        s.push(sigma_s * x + grid::interp_sorted_periodic(&us, &g_phase, l, x));
        c_tilde.push(grid::interp_sorted_periodic(&us, &g_mass, l, x));
    }
    let mut rho = spectral::derivative(&c_tilde, l);
    for v in rho.iter_mut() {
        *v += sigma_c;
        // Interpolation can undershoot slightly near zeros of the density.
        if *v < 0.0 && *v > -1e-9 {
            *v = 0.0;
        }
    }
    (s, rho)
}

/// Per-step conservation record for a phase trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiag {
    pub time: f64,
    /// Grid mass ∫ρ dx after resampling.
    pub grid_mass: f64,
    /// Σ marker weights (constant exactly).
    pub weight_sum: f64,
    /// max_i |H(x_i, p_i) − H(x_i(0), p_i(0))| over markers.
    pub max_energy_dev: f64,
}

/// Recorded trajectory: snapshots at a stride, diagnostics every step.
#[derive(Debug, Clone)]
pub struct PhaseTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub diagnostics: Vec<PhaseDiag>,
}

/// Integrate `n_steps ≥ 1` steps, recording a snapshot every
/// `record_every` steps (the initial and final states always included).
pub fn run(
    state0: &PhaseState,
    h: &Hamiltonian1d,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<PhaseTrajectory> {
    if n_steps < 1 {
        return Err(Error::InvalidInput("n_steps must be at least 1".into()));
    }
    if record_every < 1 {
        return Err(Error::InvalidInput("record_every must be at least 1".into()));
    }
    let probes: Vec<(f64, f64)> = state0
        .markers
        .iter()
        .step_by((state0.markers.len() / 4).max(1))
        .map(|m| (m.x, m.p))
        .collect();
    h.check_consistency(&probes)?;
    let e0: Vec<f64> = state0.markers.iter().map(|m| h.value(m.x, m.p)).collect();
    let diag = |state: &PhaseState| -> PhaseDiag {
        let max_energy_dev = state
            .markers
            .iter()
            .zip(&e0)
            .map(|(m, &e)| (h.value(m.x, m.p) - e).abs())
            .fold(0.0, f64::max);
        PhaseDiag {
            time: state.time,
            grid_mass: state.grid.integrate(&state.rho),
            weight_sum: state.markers.iter().map(|m| m.weight).sum(),
            max_energy_dev,
        }
    };
    let mut times = vec![state0.time];
    let mut states = vec![state0.clone()];
    let mut diagnostics = vec![diag(state0)];
    let mut current = state0.clone();
    for k in 1..=n_steps {
        current = step(&current, h, dt).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { step: k },
            other => other,
        })?;
        diagnostics.push(diag(&current));
        if k % record_every == 0 || k == n_steps {
            times.push(current.time);
            states.push(current.clone());
        }
    }
    Ok(PhaseTrajectory { times, states, diagnostics })
}

/// Max per-marker energy deviation over a trajectory. Requires a
/// time-independent Hamiltonian.
pub fn energy_drift(traj: &PhaseTrajectory, h: &Hamiltonian1d) -> Result<f64> {
    if h.time_dependent {
        return Err(Error::InvalidInput(
            "energy drift is only meaningful for time-independent Hamiltonians".into(),
        ));
    }
    Ok(traj.diagnostics.iter().map(|d| d.max_energy_dev).fold(0.0, f64::max))
}

/// Externally supplied reference section `η* = e^{iR*}`.
///
/// `Locked` pins the reference to the evolving synchronicity phase
/// (internal time = external time everywhere), making the shadow phase
/// identically zero. `Analytic` supplies `R*(x, t)` and optionally its
/// time derivative (central differences in `t` otherwise).
pub enum ReferencePhase {
    Locked,
    Analytic {
        value: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        rate: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
    },
}

impl ReferencePhase {
    pub fn analytic(value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ReferencePhase::Analytic { value: Box::new(value), rate: None }
    }

    pub fn with_rate(self, rate: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        match self {
            ReferencePhase::Analytic { value, .. } => {
                ReferencePhase::Analytic { value, rate: Some(Box::new(rate)) }
            }
            locked => locked,
        }
    }

    fn rate_at(&self, x: f64, t: f64) -> f64 {
        match self {
            ReferencePhase::Locked => 0.0,
            ReferencePhase::Analytic { value, rate } => match rate {
                Some(r) => r(x, t),
                None => {
                    let eps = 1e-6 * (1.0 + t.abs());
                    (value(x, t + eps) - value(x, t - eps)) / (2.0 * eps)
                }
            },
        }
    }
}

/// Emergence-frequency field `f = −(1/2π) ∂R/∂t` for the shadow phase
/// `R = R* − S`.
///
/// The synchronicity rate is evaluated from the state itself,
/// `∂S/∂t = L/ħ̄ − v ∂S/∂x`. With a `Locked` reference the result is
/// identically zero. `f` may legitimately be negative; no clamping.
pub fn shadow_frequency(
    state: &PhaseState,
    shadow: &ReferencePhase,
    h: &Hamiltonian1d,
) -> Vec<f64> {
    if matches!(shadow, ReferencePhase::Locked) {
        return vec![0.0; state.grid.n];
    }
    let p = state.momentum();
    (0..state.grid.n)
        .map(|i| {
            let x = state.grid.point(i);
            let v = h.d_dp(x, p[i]);
            let lag = v * p[i] - h.value(x, p[i]);
            let s_rate = lag / state.hbar - v * p[i] / state.hbar;
            let r_rate = shadow.rate_at(x, state.time) - s_rate;
            -r_rate / (2.0 * PI)
        })
        .collect()
}

/// Max drift of the emergence frequency along marker paths:
/// `max_{i,t} |f(x_i(t), t) − f(x_i(0), 0)|` over recorded snapshots.
pub fn frequency_drift(
    traj: &PhaseTrajectory,
    shadow: &ReferencePhase,
    h: &Hamiltonian1d,
) -> f64 {
    let initial = shadow_frequency(&traj.states[0], shadow, h);
    let grid = traj.states[0].grid;
    let f0: Vec<f64> = traj.states[0]
        .markers
        .iter()
        .map(|m| grid::interp_grid_periodic(&initial, &grid, m.x))
        .collect();
    let mut worst = 0.0f64;
    for state in traj.states.iter().skip(1) {
        let f = shadow_frequency(state, shadow, h);
        for (m, &f_init) in state.markers.iter().zip(&f0) {
            let f_here = grid::interp_grid_periodic(&f, &grid, m.x);
            worst = worst.max((f_here - f_init).abs());
        }
    }
    worst
}

/// An emergence event: marker index and (interpolated) time.
#[derive(Debug, Clone, PartialEq)]
pub struct EmergenceEvent {
    pub marker: usize,
    pub time: f64,
}

/// Transversal crossing times of a sampled phase through `0 mod 2π`,
/// linearly interpolated between samples. Adding `2πn` to all samples
/// leaves the result unchanged; a constant phase yields no events.
pub fn phase_crossings(times: &[f64], r: &[f64]) -> Vec<f64> {
    debug_assert_eq!(times.len(), r.len());
    let two_pi = 2.0 * PI;
    let mut events = Vec::new();
    for i in 1..r.len() {
        let (r0, r1) = (r[i - 1], r[i]);
        let a = (r0 / two_pi).floor() as i64;
        let b = (r1 / two_pi).floor() as i64;
        if b > a {
            for level in a + 1..=b {
                let target = two_pi * level as f64;
                let frac = (target - r0) / (r1 - r0);
                events.push(times[i - 1] + frac * (times[i] - times[i - 1]));
            }
        } else if b < a {
            for level in (b + 1..=a).rev() {
                let target = two_pi * level as f64;
                let frac = (target - r0) / (r1 - r0);
                events.push(times[i - 1] + frac * (times[i] - times[i - 1]));
            }
        }
    }
    events
}

/// Detect emergence events over recorded marker histories: times where
/// the per-marker shadow phase `R(t) = R*(x_t, t) − S_acc(t)` crosses
/// `0 mod 2π`. A `Locked` reference never fires.
pub fn detect_emergence(traj: &PhaseTrajectory, shadow: &ReferencePhase) -> Vec<EmergenceEvent> {
    let value = match shadow {
        ReferencePhase::Locked => return Vec::new(),
        ReferencePhase::Analytic { value, .. } => value,
    };
    let n_markers = traj.states[0].markers.len();
    let mut events = Vec::new();
    for j in 0..n_markers {
        let r: Vec<f64> = traj
            .states
            .iter()
            .map(|st| value(st.markers[j].x, st.time) - st.markers[j].s_acc)
            .collect();
        for t in phase_crossings(&traj.times, &r) {
            events.push(EmergenceEvent { marker: j, time: t });
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    events
}

/// Action `S_A = ħ̄⁻¹ ∫ L(x, ẋ) dt` along a uniformly sampled path via
/// composite Simpson quadrature; velocities by central differences
/// (fourth-order stencils when five or more samples are available).
pub fn action_along_path(
    lagrangian: impl Fn(f64, f64) -> f64,
    positions: &[f64],
    dt: f64,
    hbar: f64,
) -> Result<f64> {
    let n = positions.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 samples, got {n}")));
    }
    if !(dt > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidInput("dt and hbar must be positive".into()));
    }
    let x = positions;
    let mut v = vec![0.0; n];
    if n >= 5 {
        for i in 2..n - 2 {
            v[i] = (x[i - 2] - 8.0 * x[i - 1] + 8.0 * x[i + 1] - x[i + 2]) / (12.0 * dt);
        }
        v[0] = (-25.0 * x[0] + 48.0 * x[1] - 36.0 * x[2] + 16.0 * x[3] - 3.0 * x[4]) / (12.0 * dt);
        v[1] = (-3.0 * x[0] - 10.0 * x[1] + 18.0 * x[2] - 6.0 * x[3] + x[4]) / (12.0 * dt);
        v[n - 1] = (25.0 * x[n - 1] - 48.0 * x[n - 2] + 36.0 * x[n - 3] - 16.0 * x[n - 4]
            + 3.0 * x[n - 5])
            / (12.0 * dt);
        v[n - 2] = (3.0 * x[n - 1] + 10.0 * x[n - 2] - 18.0 * x[n - 3] + 6.0 * x[n - 4]
            - x[n - 5])
            / (12.0 * dt);
    } else {
        for i in 1..n - 1 {
            v[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
        }
        v[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
        v[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
    }
    let g: Vec<f64> = (0..n).map(|i| lagrangian(x[i], v[i])).collect();
    Ok(simpson(&g, dt) / hbar)
}

/// Composite Simpson weights; a 3/8 block absorbs an odd interval count.
fn simpson(g: &[f64], dt: f64) -> f64 {
    let m = g.len() - 1; // intervals
    let mut acc = 0.0;
    let (simpson_end, tail38) = if m % 2 == 0 { (m, false) } else { (m - 3, true) };
    if simpson_end >= 2 {
        let mut s = g[0] + g[simpson_end];
        for (i, &v) in g.iter().enumerate().take(simpson_end).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        acc += s * dt / 3.0;
    }
    if tail38 {
        let s = simpson_end;
        acc += 3.0 * dt / 8.0 * (g[s] + 3.0 * g[s + 1] + 3.0 * g[s + 2] + g[s + 3]);
    }
    acc
}

/// Max pointwise discrepancy between two independent discrete forms of
/// the density/momentum evolution at a state:
///
/// * conservative Lie-Poisson form (metric factor `√` carried, here 1):
///   `ρ̇ = −√⁻¹∂(vρ√)`, `(ρp)˙ = −√⁻¹∂(vρp√) − ρp∂v + ρ∂(pv − H)`;
/// * characteristic transport form: `ρ̇ = −v∂ρ − ρ√⁻¹∂(v√)` and
///   `ṗ = ∂L − v∂p − p∂v` combined by the product rule.
///
/// Both converge spectrally to the same continuum rates; the residual
/// measures discretization only and decreases under grid refinement.
pub fn lie_poisson_transport_residual(state: &PhaseState, h: &Hamiltonian1d) -> f64 {
    let ones = vec![1.0; state.grid.n];
    lie_poisson_transport_residual_with_metric(state, h, &ones)
}

/// Same as [`lie_poisson_transport_residual`] with an explicit metric
/// volume factor `√` (exercised at 1 on the flat circle).
pub fn lie_poisson_transport_residual_with_metric(
    state: &PhaseState,
    h: &Hamiltonian1d,
    sqrt_g: &[f64],
) -> f64 {
    let grid = &state.grid;
    let n = grid.n;
    let l = grid.length;
    let p = state.momentum();
    let rho = &state.rho;
    let xs = grid.points();
    let v: Vec<f64> = (0..n).map(|i| h.d_dp(xs[i], p[i])).collect();
    let ham: Vec<f64> = (0..n).map(|i| h.value(xs[i], p[i])).collect();
    let lag: Vec<f64> = (0..n).map(|i| v[i] * p[i] - ham[i]).collect();

    let d = |f: &[f64]| spectral::derivative(f, l);

    // Conservative form.
    let flux_rho: Vec<f64> = (0..n).map(|i| v[i] * rho[i] * sqrt_g[i]).collect();
    let d_flux_rho = d(&flux_rho);
    let rho_dot_a: Vec<f64> = (0..n).map(|i| -d_flux_rho[i] / sqrt_g[i]).collect();

    let flux_m: Vec<f64> = (0..n).map(|i| v[i] * rho[i] * p[i] * sqrt_g[i]).collect();
    let d_flux_m = d(&flux_m);
    let dv = d(&v);
    let d_lag = d(&lag);
    let m_dot_a: Vec<f64> = (0..n)
        .map(|i| -d_flux_m[i] / sqrt_g[i] - rho[i] * p[i] * dv[i] + rho[i] * d_lag[i])
        .collect();

    // Transport form.
    let d_rho = d(rho);
    let v_sqrt: Vec<f64> = (0..n).map(|i| v[i] * sqrt_g[i]).collect();
    let d_v_sqrt = d(&v_sqrt);
    let rho_dot_b: Vec<f64> =
        (0..n).map(|i| -v[i] * d_rho[i] - rho[i] * d_v_sqrt[i] / sqrt_g[i]).collect();
    let dp = d(&p);
    let p_dot_b: Vec<f64> = (0..n).map(|i| d_lag[i] - v[i] * dp[i] - p[i] * dv[i]).collect();
    let m_dot_b: Vec<f64> =
        (0..n).map(|i| rho_dot_b[i] * p[i] + rho[i] * p_dot_b[i]).collect();

    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((rho_dot_a[i] - rho_dot_b[i]).abs());
        worst = worst.max((m_dot_a[i] - m_dot_b[i]).abs());
    }
    worst
}
