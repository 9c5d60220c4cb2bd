//! Oracle tests for the fluid engines: first-law consistency of the
//! pressure, a linearized sound-speed dispersion fit, and the 2-D
//! conservation checks on a short horizon.

use lplab_core::fluids::{
    self, CompressibleState, InternalEnergy, VelocityField2d,
};
use lplab_core::grid::PeriodicGrid1;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

#[test]
fn pressure_first_law_consistency_for_barotropic_laws() {
    // For U = U(ρ): P = ρ²U′, so dP/dρ = 2ρU′ + ρ²U″. Check the
    // pressure function against hand-derived dP/dρ via central
    // differences for two test laws.
    let cases: Vec<(InternalEnergy, Box<dyn Fn(f64) -> f64>)> = vec![
        (
            // U = κρ^(γ−1), γ = 1.4: dP/dρ = κγ(γ−1)ρ^(γ−1).
            InternalEnergy::power(0.8, 1.4),
            Box::new(|r: f64| 0.8 * 1.4 * 0.4 * r.powf(0.4)),
        ),
        (
            // U = aρ: P = aρ², dP/dρ = 2aρ.
            InternalEnergy::linear(0.6, 0.0),
            Box::new(|r: f64| 1.2 * r),
        ),
    ];
    for (u, dp_drho) in &cases {
        for &r in &[0.5, 1.0, 1.7, 2.3] {
            let h = 1e-6 * (1.0 + r);
            let p_plus = fluids::pressure(&[r + h], &[0.0], u)[0];
            let p_minus = fluids::pressure(&[r - h], &[0.0], u)[0];
            let numeric = (p_plus - p_minus) / (2.0 * h);
            let hand = dp_drho(r);
            assert!((numeric - hand).abs() < 1e-10 * (1.0 + hand.abs()), "{numeric} vs {hand}");
        }
    }
}

#[test]
fn linearized_sound_speed_matches_dispersion_fit() {
    // Small standing wave around (ρ₀ = 1, p = 0) with U = ρ/2:
    // c² = dP/dρ|ρ₀ = 2ρ₀U′ = ρ₀ = 1, so the k = 1 mode oscillates at
    // ω = 1. Fit ω from the zero crossings of the mode projection over
    // ten periods.
    let n = 64;
    let grid = PeriodicGrid1::new(n, TWO_PI).unwrap();
    let eps = 1e-4;
    let rho: Vec<f64> = grid.points().iter().map(|&x| 1.0 + eps * x.sin()).collect();
    let st0 = CompressibleState::new(grid, rho, vec![0.0; n], vec![0.0; n]).unwrap();
    let u = InternalEnergy::linear(0.5, 0.0);
    let dt = 5e-3;
    let t_end = 10.0 * TWO_PI;
    let n_steps = (t_end / dt) as usize;
    let mut st = st0.clone();
    let project = |s: &CompressibleState| -> f64 {
        let mut acc = 0.0;
        for (i, &x) in s.grid.points().iter().enumerate() {
            acc += (s.rho[i] - 1.0) * x.sin();
        }
        acc * 2.0 / n as f64
    };
    let mut samples = vec![(0.0, project(&st))];
    for k in 1..=n_steps {
        st = fluids::step_compressible(&st, &u, dt).unwrap();
        samples.push((k as f64 * dt, project(&st)));
    }
    // Zero crossings of the projection a(t) = ε cos(ωt).
    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        let ((t0, a0), (t1, a1)) = (w[0], w[1]);
        if a0 == 0.0 || a0 * a1 >= 0.0 {
            continue;
        }
        crossings.push(t0 + a0 / (a0 - a1) * (t1 - t0));
    }
    assert!(crossings.len() >= 18, "only {} crossings", crossings.len());
    let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let omega = PI / mean_gap;
    assert!((omega - 1.0).abs() < 1e-3, "fitted omega {omega}");
}

#[test]
fn compressible_self_convergence_order_four() {
    let grid = PeriodicGrid1::new(64, TWO_PI).unwrap();
    let xs = grid.points();
    let rho: Vec<f64> = xs.iter().map(|&x| 1.0 + 0.2 * x.sin()).collect();
    let sigma: Vec<f64> = xs.iter().map(|&x| 0.1 * x.cos()).collect();
    let p: Vec<f64> = xs.iter().map(|&x| 0.2 * x.cos()).collect();
    let st0 = CompressibleState::new(grid, rho, sigma, p).unwrap();
    let u = InternalEnergy::linear(0.5, 0.1);
    let run = |dt: f64| -> Vec<f64> {
        let mut st = st0.clone();
        for _ in 0..(0.4 / dt) as usize {
            st = fluids::step_compressible(&st, &u, dt).unwrap();
        }
        st.rho
    };
    let (a, b, c) = (run(0.01), run(0.005), run(0.0025));
    let diff = |x: &[f64], y: &[f64]| -> f64 {
        x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    };
    let slope = (diff(&a, &b) / diff(&b, &c)).log2();
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn conservation_drifts_over_short_horizon() {
    let grid = PeriodicGrid1::new(128, TWO_PI).unwrap();
    let xs = grid.points();
    let rho: Vec<f64> = xs.iter().map(|&x| 1.0 + 0.1 * x.sin()).collect();
    let sigma: Vec<f64> = xs.iter().map(|&x| 0.2 + 0.05 * (2.0 * x).cos()).collect();
    let p: Vec<f64> = xs.iter().map(|&x| 0.05 * x.cos()).collect();
    let u = InternalEnergy::linear(0.5, 0.2);
    let mut st = CompressibleState::new(grid, rho, sigma, p).unwrap();
    let (m0, s0, q0, e0) = (st.mass(), st.entropy(), st.momentum_total(), st.energy(&u));
    for _ in 0..200 {
        st = fluids::step_compressible(&st, &u, 1e-3).unwrap();
    }
    assert!((st.mass() - m0).abs() < 1e-12);
    assert!((st.entropy() - s0).abs() < 1e-12);
    assert!((st.momentum_total() - q0).abs() < 1e-12);
    assert!((st.energy(&u) - e0).abs() < 1e-8);
}

#[test]
fn euler2d_conserves_energy_and_enstrophy_short_run() {
    let n = 64;
    let h = TWO_PI / n as f64;
    let mut psi = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (i as f64 * h, j as f64 * h);
            psi[j * n + i] = x.sin() * y.sin() + 0.25 * (2.0 * x + y).sin();
        }
    }
    let mut u = VelocityField2d::from_streamfunction(n, &psi).unwrap();
    let ke0 = u.kinetic_energy();
    let en0 = u.enstrophy();
    for _ in 0..100 {
        u = fluids::step_euler(&u, 1e-3).unwrap();
    }
    assert!((u.kinetic_energy() - ke0).abs() < 1e-8, "energy drift");
    assert!((u.enstrophy() - en0).abs() < 1e-8, "enstrophy drift");
}

#[test]
fn projector_is_linear() {
    let n = 32;
    let a = VelocityField2d::from_fn(n, |x, y| (x + y).sin(), |x, _| x.cos()).unwrap();
    let b = VelocityField2d::from_fn(n, |_, y| (2.0 * y).cos(), |x, y| (x - y).sin()).unwrap();
    let (alpha, beta) = (0.7, -1.3);
    let combo = VelocityField2d::new(
        n,
        (0..n * n).map(|i| alpha * a.ux[i] + beta * b.ux[i]).collect(),
        (0..n * n).map(|i| alpha * a.uy[i] + beta * b.uy[i]).collect(),
    )
    .unwrap();
    let lhs = fluids::project_divfree(&combo);
    let pa = fluids::project_divfree(&a);
    let pb = fluids::project_divfree(&b);
    for i in 0..n * n {
        assert!((lhs.ux[i] - (alpha * pa.ux[i] + beta * pb.ux[i])).abs() < 1e-12);
        assert!((lhs.uy[i] - (alpha * pa.uy[i] + beta * pb.uy[i])).abs() < 1e-12);
    }
}

#[test]
fn streamfunction_fields_are_solenoidal() {
    let n = 32;
    let h = TWO_PI / n as f64;
    let mut psi = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (i as f64 * h, j as f64 * h);
            psi[j * n + i] = (x + y).cos() + 0.3 * (2.0 * y).sin();
        }
    }
    let u = VelocityField2d::from_streamfunction(n, &psi).unwrap();
    let max_div = fluids::divergence(&u).iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    assert!(max_div < 1e-12, "div {max_div}");
}
