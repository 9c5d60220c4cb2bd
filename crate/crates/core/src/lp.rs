//! Generic Lie-Poisson time evolution `dμ/dt = ad*_{∂H/∂μ} μ` on the
//! dual of a finite-dimensional Lie algebra, with per-step conservation
//! diagnostics.
//!
//! Two steppers are provided: classical RK4 (the default; not a Poisson
//! integrator but fourth-order accurate) and the implicit midpoint rule
//! (second order, conserves quadratic invariants such as the so(3)
//! Casimir |μ|² up to the nonlinear-solve tolerance), kept for drift
//! comparison.

use crate::algebra::{AlgebraElement, DualElement, LieAlgebra};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use std::fmt::Write as _;

type ScalarFn = Box<dyn Fn(&DualElement) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&DualElement) -> AlgebraElement + Send + Sync>;

/// Tolerance of the gradient consistency check run at the start of each
/// trajectory: |⟨ξ, ∂H/∂μ⟩ − d/dε H(μ+εξ)| scaled by 1 + |value|.
pub const GRAD_CHECK_TOL: f64 = 1e-6;

/// A Hamiltonian system on the dual of a Lie algebra.
pub struct LpSystem {
    pub algebra: LieAlgebra,
    pub name: String,
    hamiltonian: ScalarFn,
    gradient: Option<GradFn>,
    casimirs: Vec<(String, ScalarFn)>,
}

impl LpSystem {
    pub fn new(
        algebra: LieAlgebra,
        name: impl Into<String>,
        hamiltonian: impl Fn(&DualElement) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            algebra,
            name: name.into(),
            hamiltonian: Box::new(hamiltonian),
            gradient: None,
            casimirs: Vec::new(),
        }
    }

    /// Supply an analytic gradient ∂H/∂μ. Without one, central
    /// differences with step `1e-6·(1 + |μ|)` are used.
    pub fn with_gradient(
        mut self,
        grad: impl Fn(&DualElement) -> AlgebraElement + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Box::new(grad));
        self
    }

    pub fn with_casimir(
        mut self,
        name: impl Into<String>,
        f: impl Fn(&DualElement) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.casimirs.push((name.into(), Box::new(f)));
        self
    }

    /// Free rigid body on so(3)*: `H = ½ Σ μ_i²/I_i` with the Casimir
    /// |μ|² registered.
    pub fn rigid_body(inertia: [f64; 3]) -> Self {
        let i = inertia;
        LpSystem::new(LieAlgebra::so3(), "rigid body", move |mu| {
            0.5 * (mu.0[0] * mu.0[0] / i[0] + mu.0[1] * mu.0[1] / i[1] + mu.0[2] * mu.0[2] / i[2])
        })
        .with_gradient(move |mu| {
            AlgebraElement(vec![mu.0[0] / i[0], mu.0[1] / i[1], mu.0[2] / i[2]])
        })
        .with_casimir("mu_sq", |mu| mu.0.iter().map(|x| x * x).sum())
    }

    pub fn hamiltonian(&self, mu: &DualElement) -> f64 {
        (self.hamiltonian)(mu)
    }

    pub fn casimir_names(&self) -> Vec<&str> {
        self.casimirs.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn casimir_values(&self, mu: &DualElement) -> Vec<f64> {
        self.casimirs.iter().map(|(_, f)| f(mu)).collect()
    }

    /// ∂H/∂μ, analytic when supplied, else central differences (raised
    /// through the pairing metric).
    pub fn grad_h(&self, mu: &DualElement) -> AlgebraElement {
        match &self.gradient {
            Some(g) => g(mu),
            None => central_gradient(&self.algebra, &*self.hamiltonian, mu),
        }
    }

    /// Directional-derivative consistency of the supplied gradient at a
    /// probe point, against random directions.
    pub fn check_gradient(&self, mu: &DualElement) -> Result<()> {
        let dim = self.algebra.dim();
        let mut rng = SplitMix64::new(0x6c70_6772_6164);
        for _ in 0..3 {
            let xi = rng.signed_vec(dim);
            let grad = self.grad_h(mu);
            let paired = self.algebra.pairing(&DualElement(xi.clone()), &grad)?;
            let eps = 1e-6 * (1.0 + mu.norm());
            let mut plus = mu.clone();
            let mut minus = mu.clone();
            for k in 0..dim {
                plus.0[k] += eps * xi[k];
                minus.0[k] -= eps * xi[k];
            }
            let numeric = ((self.hamiltonian)(&plus) - (self.hamiltonian)(&minus)) / (2.0 * eps);
            let scale = 1.0 + numeric.abs();
            if (paired - numeric).abs() > GRAD_CHECK_TOL * scale {
                return Err(Error::InvalidInput(format!(
                    "gradient of '{}' inconsistent with Hamiltonian: ⟨ξ,∂H⟩ = {paired}, \
                     directional derivative = {numeric}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn central_gradient(
    algebra: &LieAlgebra,
    h: &dyn Fn(&DualElement) -> f64,
    mu: &DualElement,
) -> AlgebraElement {
    let eps = 1e-6 * (1.0 + mu.norm());
    let mut g = vec![0.0; mu.dim()];
    for k in 0..mu.dim() {
        let mut plus = mu.clone();
        let mut minus = mu.clone();
        plus.0[k] += eps;
        minus.0[k] -= eps;
        g[k] = (h(&plus) - h(&minus)) / (2.0 * eps);
    }
    // Coordinate partials satisfy d/dε H(μ+εξ) = ξ·g; the gradient in
    // the metric pairing is the raised covector.
    AlgebraElement(algebra.raise(&g).expect("dimension checked"))
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    /// Implicit midpoint (fixed-point solve).
    Midpoint,
}

/// Right-hand side `ad*_{∂H/∂μ} μ` of the Lie-Poisson equation.
pub fn lp_rhs(sys: &LpSystem, mu: &DualElement) -> Result<DualElement> {
    sys.algebra.ad_star(&sys.grad_h(mu), mu)
}

fn axpy(mu: &DualElement, k: &DualElement, a: f64) -> DualElement {
    DualElement(mu.0.iter().zip(&k.0).map(|(m, v)| m + a * v).collect())
}

/// One step of the named scheme. Deterministic; rejects non-finite
/// states and non-positive dt.
pub fn step(sys: &LpSystem, mu: &DualElement, dt: f64, scheme: Scheme) -> Result<DualElement> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let next = match scheme {
        Scheme::Rk4 => {
            let k1 = lp_rhs(sys, mu)?;
            let k2 = lp_rhs(sys, &axpy(mu, &k1, dt / 2.0))?;
            let k3 = lp_rhs(sys, &axpy(mu, &k2, dt / 2.0))?;
            let k4 = lp_rhs(sys, &axpy(mu, &k3, dt))?;
            DualElement(
                (0..mu.dim())
                    .map(|i| {
                        mu.0[i] + dt / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i])
                    })
                    .collect(),
            )
        }
        Scheme::Midpoint => {
            // Fixed point for m = μ + (dt/2)·f(m); μ' = 2m − μ.
            let mut m = mu.clone();
            let mut converged = false;
            for _ in 0..100 {
                let f = lp_rhs(sys, &m)?;
                let next = axpy(mu, &f, dt / 2.0);
                let delta: f64 = next
                    .0
                    .iter()
                    .zip(&m.0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                m = next;
                if delta <= 1e-15 * (1.0 + m.norm()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::InvalidInput(
                    "implicit midpoint iteration failed to converge; reduce dt".into(),
                ));
            }
            DualElement((0..mu.dim()).map(|i| 2.0 * m.0[i] - mu.0[i]).collect())
        }
    };
    if next.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0 });
    }
    Ok(next)
}

/// Per-step conservation record.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagRecord {
    pub time: f64,
    pub energy: f64,
    pub casimirs: Vec<f64>,
}

/// A computed trajectory with diagnostics at every stored state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DualElement>,
    pub diagnostics: Vec<DiagRecord>,
}

impl Trajectory {
    /// Diagnostics CSV: `time,H,casimir_0,…` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,H");
        for i in 0..self.diagnostics.first().map_or(0, |d| d.casimirs.len()) {
            let _ = write!(out, ",casimir_{i}");
        }
        out.push('\n');
        for d in &self.diagnostics {
            let _ = write!(out, "{:.16e},{:.16e}", d.time, d.energy);
            for c in &d.casimirs {
                let _ = write!(out, ",{c:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Integrate `n_steps ≥ 1` steps from `mu0`, recording states and
/// diagnostics at every step (including the initial one).
pub fn run(
    sys: &LpSystem,
    mu0: &DualElement,
    dt: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<Trajectory> {
    if n_steps < 1 {
        return Err(Error::InvalidInput("n_steps must be at least 1".into()));
    }
    if mu0.dim() != sys.algebra.dim() {
        return Err(Error::DimensionMismatch { expected: sys.algebra.dim(), got: mu0.dim() });
    }
    sys.check_gradient(mu0)?;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut diagnostics = Vec::with_capacity(n_steps + 1);
    let mut mu = mu0.clone();
    for k in 0..=n_steps {
        let t = k as f64 * dt;
        times.push(t);
        diagnostics.push(DiagRecord {
            time: t,
            energy: sys.hamiltonian(&mu),
            casimirs: sys.casimir_values(&mu),
        });
        states.push(mu.clone());
        if k < n_steps {
            mu = step(sys, &mu, dt, scheme).map_err(|e| match e {
                Error::NonFinite { .. } => Error::NonFinite { step: k + 1 },
                other => other,
            })?;
        }
    }
    Ok(Trajectory { times, states, diagnostics })
}

/// Per-state residual of the observable evolution equation
/// `d/dt F(μ_t) = ⟨μ_t, [∂H/∂μ, ∂F/∂μ]⟩` along a trajectory.
///
/// The time derivative of `F` is taken by second-order differences
/// (one-sided at the ends), so the residual of an exact trajectory is
/// O(dt²).
pub fn heisenberg_residual(
    sys: &LpSystem,
    traj: &Trajectory,
    f: impl Fn(&DualElement) -> f64,
) -> Result<Vec<f64>> {
    let n = traj.states.len();
    if n < 3 {
        return Err(Error::InvalidInput("trajectory too short for residuals".into()));
    }
    let dt = traj.times[1] - traj.times[0];
    let values: Vec<f64> = traj.states.iter().map(&f).collect();
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let dfdt = if i == 0 {
            (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt)
        } else if i == n - 1 {
            (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dt)
        } else {
            (values[i + 1] - values[i - 1]) / (2.0 * dt)
        };
        let mu = &traj.states[i];
        let grad_f = central_gradient(&sys.algebra, &|m: &DualElement| f(m), mu);
        let bracket = sys.algebra.bracket(&sys.grad_h(mu), &grad_f)?;
        let rhs = sys.algebra.pairing(mu, &bracket)?;
        residuals.push((dfdt - rhs).abs());
    }
    Ok(residuals)
}

/// Max drift `|Q(μ_t) − Q(μ_0)|` of a charge functional over a
/// trajectory.
pub fn charge_drift(traj: &Trajectory, q: impl Fn(&DualElement) -> f64) -> f64 {
    let q0 = q(&traj.states[0]);
    traj.states.iter().map(|mu| (q(mu) - q0).abs()).fold(0.0, f64::max)
}
