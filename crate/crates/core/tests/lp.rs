//! Oracle tests for the Lie-Poisson integrator: closed-form precession,
//! a dense matrix-exponential oracle for one-step accuracy, observable
//! evolution residuals, charge drift, and the coadjoint-orbit
//! reconstruction check on so(3).

use lplab_core::algebra::{AlgebraElement, DualElement, LieAlgebra};
use lplab_core::lp::{self, LpSystem, Scheme};
use lplab_core::suite;

/// Taylor-series matrix exponential (3×3), converges for the small
/// norms used here.
fn expm3(m: &[[f64; 3]; 3], t: f64) -> [[f64; 3]; 3] {
    let mut result = [[0.0; 3]; 3];
    let mut term = [[0.0; 3]; 3];
    for i in 0..3 {
        result[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for k in 1..60 {
        let mut next = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    next[i][j] += term[i][l] * m[l][j] * t / k as f64;
                }
            }
        }
        term = next;
        for i in 0..3 {
            for j in 0..3 {
                result[i][j] += term[i][j];
            }
        }
    }
    result
}

#[test]
fn rk4_one_step_matches_matrix_exponential_to_fifth_order() {
    // Linear Hamiltonian H = ⟨μ, ξ₀⟩ has constant gradient ξ₀, so the
    // Lie-Poisson equation is linear: dμ/dt = M μ with
    // M_{jk} = Σ_i c^k'... determined column by column from ad*.
    let alg = LieAlgebra::so3();
    let xi0 = AlgebraElement(vec![0.4, -0.7, 0.9]);
    let sys = {
        let x = xi0.clone();
        let x2 = xi0.clone();
        LpSystem::new(LieAlgebra::so3(), "linear", move |mu| {
            mu.0.iter().zip(&x.0).map(|(a, b)| a * b).sum()
        })
        .with_gradient(move |_| x2.clone())
    };
    // Assemble M from the action on basis duals.
    let mut m = [[0.0; 3]; 3];
    for k in 0..3 {
        let col = alg.ad_star(&xi0, &DualElement::basis(3, k)).unwrap();
        for j in 0..3 {
            m[j][k] = col.0[j];
        }
    }
    let mu0 = DualElement(vec![0.3, 0.8, -0.5]);
    let err_at = |dt: f64| -> f64 {
        let num = lp::step(&sys, &mu0, dt, Scheme::Rk4).unwrap();
        let e = expm3(&m, dt);
        let mut worst = 0.0f64;
        for j in 0..3 {
            let exact: f64 = (0..3).map(|k| e[j][k] * mu0.0[k]).sum();
            worst = worst.max((num.0[j] - exact).abs());
        }
        worst
    };
    let e1 = err_at(0.1);
    let e2 = err_at(0.05);
    // One-step error is O(dt⁵): halving reduces it ~32×.
    let ratio = e1 / e2;
    assert!(ratio > 24.0 && ratio < 40.0, "one-step ratio {ratio} (e1={e1:e}, e2={e2:e})");
}

#[test]
fn symmetric_top_precession_closed_form() {
    let m = suite::rigid_body_measurement([1.0, 1.0, 2.0], [1.0, 0.0, 1.0], 1e-3, 2000, false)
        .unwrap();
    assert!(m.max_precession_err < 1e-8, "error {:e}", m.max_precession_err);
}

#[test]
fn flipped_coadjoint_sign_is_caught_by_the_oracle() {
    // Mutation check: negating ∂H/∂μ reverses the precession and the
    // closed-form comparison must fail loudly.
    let m = suite::rigid_body_measurement([1.0, 1.0, 2.0], [1.0, 0.0, 1.0], 1e-3, 1000, true)
        .unwrap();
    assert!(m.max_precession_err > 1e-2, "mutation not detected: {:e}", m.max_precession_err);
}

#[test]
fn rk4_halving_reduces_global_error_sixteenfold() {
    let run_err = |dt: f64| {
        suite::rigid_body_measurement([1.0, 1.0, 2.0], [1.0, 0.2, 1.0], dt, (2.0 / dt) as usize, false)
            .unwrap()
            .max_precession_err
    };
    let e1 = run_err(0.04);
    let e2 = run_err(0.02);
    let ratio = e1 / e2;
    assert!(ratio > 12.0 && ratio < 20.0, "global ratio {ratio}");
}

#[test]
fn energy_and_casimir_drift_scale_as_dt4() {
    // The asymmetric top keeps the reduced dynamics nonlinear; for the
    // symmetric top the reduced flow is linear and RK4's energy error
    // superconverges at O(dt⁵).
    let inertia = [1.0, 1.6, 2.4];
    let sys = LpSystem::rigid_body(inertia);
    let mu0 = DualElement(vec![1.0, 0.4, 0.7]);
    let horizon = 20.0;
    let drift_at = |dt: f64| {
        let traj = lp::run(&sys, &mu0, dt, (horizon / dt) as usize, Scheme::Rk4).unwrap();
        let e = lp::charge_drift(&traj, |mu| {
            0.5 * (mu.0[0] * mu.0[0] / inertia[0]
                + mu.0[1] * mu.0[1] / inertia[1]
                + mu.0[2] * mu.0[2] / inertia[2])
        });
        let c = lp::charge_drift(&traj, |mu| mu.0.iter().map(|x| x * x).sum());
        (e, c)
    };
    let (e1, c1) = drift_at(0.05);
    let (e2, c2) = drift_at(0.025);
    let (e3, c3) = drift_at(0.0125);
    for (a, b, what) in
        [(e1, e2, "energy 1"), (e2, e3, "energy 2"), (c1, c2, "casimir 1"), (c2, c3, "casimir 2")]
    {
        let slope = (a / b).log2();
        assert!((slope - 4.0).abs() < 0.3, "{what} slope {slope}");
    }
}

#[test]
fn heisenberg_residual_is_second_order() {
    let sys = LpSystem::rigid_body([1.0, 1.0, 2.0]);
    let mu0 = DualElement(vec![1.0, 0.0, 1.0]);
    let residual_of = |dt: f64, f: &dyn Fn(&DualElement) -> f64| -> f64 {
        let traj = lp::run(&sys, &mu0, dt, (1.0 / dt) as usize, Scheme::Rk4).unwrap();
        lp::heisenberg_residual(&sys, &traj, f).unwrap().iter().cloned().fold(0.0, f64::max)
    };
    // A genuinely varying observable shows the O(dt²) envelope of the
    // finite-difference time derivative.
    let r1 = residual_of(0.02, &|mu| mu.0[0]);
    let r2 = residual_of(0.01, &|mu| mu.0[0]);
    let ratio = r1 / r2;
    assert!((ratio - 4.0).abs() < 0.5, "mu1 residual ratio {ratio} (r1={r1:e}, r2={r2:e})");
    // Conserved observables sit far below that envelope: the bracket
    // side vanishes by antisymmetry (F = H) / the Casimir property.
    let rh = residual_of(
        0.01,
        &|mu| 0.5 * (mu.0[0] * mu.0[0] + mu.0[1] * mu.0[1] + mu.0[2] * mu.0[2] / 2.0),
    );
    let rc = residual_of(0.01, &|mu| mu.0.iter().map(|x| x * x).sum());
    assert!(rh < 1e-9, "H residual {rh:e}");
    assert!(rc < 1e-9, "Casimir residual {rc:e}");
}

#[test]
fn heisenberg_rate_of_mu1_matches_precession() {
    // dμ₁/dt = −ω μ₂ with ω = μ₃(1/I₁ − 1/I₃).
    let sys = LpSystem::rigid_body([1.0, 1.0, 2.0]);
    let mu0 = DualElement(vec![1.0, 0.0, 1.0]);
    let dt = 1e-3;
    let traj = lp::run(&sys, &mu0, dt, 1000, Scheme::Rk4).unwrap();
    let omega = 0.5;
    let residuals = lp::heisenberg_residual(&sys, &traj, |mu| mu.0[0]).unwrap();
    assert!(residuals.iter().all(|&r| r < 1e-5));
    // Direct check of the rate against the analytic value at interior
    // points.
    for k in (100..900).step_by(100) {
        let num = (traj.states[k + 1].0[0] - traj.states[k - 1].0[0]) / (2.0 * dt);
        let expect = -omega * traj.states[k].0[1];
        assert!((num - expect).abs() < 1e-5, "step {k}: {num} vs {expect}");
    }
}

#[test]
fn fallback_gradient_respects_a_non_identity_pairing() {
    // Abelian 2-D algebra with metric G = [[2, 0], [0, 4]] and
    // H = ½|μ|²: coordinate partials are μ, so the metric-paired
    // gradient must be G⁻¹μ, and the run-time gradient check must
    // accept the finite-difference fallback.
    let c = vec![vec![vec![0.0; 2]; 2]; 2];
    let metric = vec![vec![2.0, 0.0], vec![0.0, 4.0]];
    let alg = LieAlgebra::new(2, c, Some(metric), None).unwrap();
    let sys = LpSystem::new(alg, "weighted", |mu| {
        0.5 * (mu.0[0] * mu.0[0] + mu.0[1] * mu.0[1])
    });
    let mu = DualElement(vec![1.0, 2.0]);
    let g = sys.grad_h(&mu);
    assert!((g.0[0] - 0.5).abs() < 1e-8, "{:?}", g.0);
    assert!((g.0[1] - 0.5).abs() < 1e-8, "{:?}", g.0);
    assert!(sys.check_gradient(&mu).is_ok());
}

#[test]
fn charge_drift_cases() {
    let sys = LpSystem::rigid_body([1.0, 1.0, 2.0]);
    let mu0 = DualElement(vec![1.0, 0.0, 1.0]);
    let traj = lp::run(&sys, &mu0, 1e-3, 10_000, Scheme::Rk4).unwrap();
    // Casimir.
    let casimir = lp::charge_drift(&traj, |mu| mu.0.iter().map(|x| x * x).sum());
    assert!(casimir <= 1e-8, "casimir drift {casimir:e}");
    // Constant charge: exactly zero.
    assert_eq!(lp::charge_drift(&traj, |_| 42.0), 0.0);
    // Energy as a charge.
    let energy = lp::charge_drift(&traj, |mu| {
        0.5 * (mu.0[0] * mu.0[0] + mu.0[1] * mu.0[1] + mu.0[2] * mu.0[2] / 2.0)
    });
    assert!(energy <= 1e-8, "energy drift {energy:e}");
}

#[test]
fn so3_coadjoint_reconstruction() {
    // Formal solution: μ_t = R_tᵀ μ₀ where Ṙ = R Ω̂ reconstructs the
    // attitude from the body angular velocity Ω = ∂H/∂μ. Integrates the
    // rotation matrix alongside and compares (both RK4, so the residual
    // is O(dt⁴) globally).
    let inertia = [1.0, 1.3, 2.0];
    let sys = LpSystem::rigid_body(inertia);
    let mu0 = DualElement(vec![1.0, 0.4, 0.7]);
    let dt = 1e-3;
    let n_steps = 2000;
    let traj = lp::run(&sys, &mu0, dt, n_steps, Scheme::Rk4).unwrap();

    let hat = |w: &[f64; 3]| -> [[f64; 3]; 3] {
        [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
    };
    let matmul = |a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]| -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    };
    let mut r = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut worst = 0.0f64;
    for step in 0..n_steps {
        // RK4 for Ṙ = R Ω̂(μ(t)) using the stored momenta; Ω varies
        // slowly so the interpolated midpoint uses the average.
        let omega_of = |mu: &DualElement| -> [f64; 3] {
            [mu.0[0] / inertia[0], mu.0[1] / inertia[1], mu.0[2] / inertia[2]]
        };
        let w0 = omega_of(&traj.states[step]);
        let w1 = omega_of(&traj.states[step + 1]);
        let wm = [(w0[0] + w1[0]) / 2.0, (w0[1] + w1[1]) / 2.0, (w0[2] + w1[2]) / 2.0];
        let k1 = matmul(&r, &hat(&w0));
        let add = |a: &[[f64; 3]; 3], b: &[[f64; 3]; 3], s: f64| -> [[f64; 3]; 3] {
            let mut c = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    c[i][j] = a[i][j] + s * b[i][j];
                }
            }
            c
        };
        let k2 = matmul(&add(&r, &k1, dt / 2.0), &hat(&wm));
        let k3 = matmul(&add(&r, &k2, dt / 2.0), &hat(&wm));
        let k4 = matmul(&add(&r, &k3, dt), &hat(&w1));
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += dt / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
        // μ_{t} = Rᵀ μ₀ (spatial momentum R μ is conserved).
        let mu = &traj.states[step + 1];
        for i in 0..3 {
            let recon: f64 = (0..3).map(|k| r[k][i] * mu0.0[k]).sum();
            worst = worst.max((mu.0[i] - recon).abs());
        }
    }
    assert!(worst < 1e-8, "reconstruction residual {worst:e}");
}
