//! Scenario execution: dispatch to the engines, write CSV outputs
//! atomically (temp file + rename), and report a summary.

use crate::expr::Expr;
use crate::scenario::{
    AlgebraChoice, EosConfig, FluidCompressibleParams, FluidEuler2dParams,
    FunctionalCheckParams, LiePoissonParams, ProtoParams, Scenario, ShadowConfig,
};
use lplab_core::algebra::{AlgebraElement, DualElement, LieAlgebra};
use lplab_core::fluids::{self, CompressibleState, InternalEnergy, VelocityField2d};
use lplab_core::functionals::{self, Ensemble, EnsembleMember, PolyFunctional};
use lplab_core::grid::PeriodicGrid1;
use lplab_core::lp::{self, LpSystem, Scheme};
use lplab_core::phase::{self, Hamiltonian1d, PhaseState, ReferencePhase};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Failure modes mapped to process exit codes by `main`.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or arguments (exit 1).
    Validation(String),
    /// Engine/runtime failure (exit 2).
    Engine(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "validation error: {m}"),
            RunError::Engine(m) => write!(f, "engine error: {m}"),
        }
    }
}

impl From<lplab_core::Error> for RunError {
    fn from(e: lplab_core::Error) -> Self {
        RunError::Engine(e.to_string())
    }
}

pub struct Summary {
    pub lines: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub wall_seconds: f64,
}

/// Atomic write: the full contents go to a temp file in the target
/// directory, then a rename moves it into place, so failures never
/// leave partial outputs.
fn write_atomic(path: &Path, contents: &str) -> Result<(), RunError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| RunError::Engine(format!("creating {}: {e}", dir.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default(),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)
        .map_err(|e| RunError::Engine(format!("writing {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| RunError::Engine(format!("renaming to {}: {e}", path.display())))?;
    Ok(())
}

fn fmt_row(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
    out
}

fn eval_field(expr: &str, xs: &[f64]) -> Result<Vec<f64>, RunError> {
    let e = Expr::parse(expr).map_err(|err| RunError::Validation(err.to_string()))?;
    Ok(xs.iter().map(|&x| e.eval(x, 0.0)).collect())
}

/// Execute a scenario, writing outputs under `out_dir`. Deterministic
/// for a given configuration and seed.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path, seed: u64) -> Result<Summary, RunError> {
    let start = Instant::now();
    let mut summary = match scenario {
        Scenario::LiePoisson(p) => run_lie_poisson(p, out_dir)?,
        Scenario::Proto(p) => run_proto(p, out_dir)?,
        Scenario::FunctionalCheck(p) => run_functional(p, out_dir)?,
        Scenario::FluidCompressible(p) => run_compressible(p, out_dir)?,
        Scenario::FluidEuler2d(p) => run_euler2d(p, out_dir)?,
    };
    summary.lines.push(format!("seed: {seed}"));
    summary.wall_seconds = start.elapsed().as_secs_f64();
    Ok(summary)
}

fn build_lp_system(p: &LiePoissonParams) -> Result<LpSystem, RunError> {
    let algebra = match &p.algebra {
        AlgebraChoice::Named(_) => LieAlgebra::so3(),
        AlgebraChoice::Inline(doc) => LieAlgebra::from_json(&doc.to_string())
            .map_err(|e| RunError::Validation(e.to_string()))?,
    };
    if algebra.dim() != p.mu0.len() {
        return Err(RunError::Validation(format!(
            "algebra dimension {} does not match mu0 length {}",
            algebra.dim(),
            p.mu0.len()
        )));
    }
    let inertia = p.inertia.clone();
    let inertia2 = p.inertia.clone();
    let mut sys = LpSystem::new(algebra, "scenario", move |mu| {
        0.5 * mu.0.iter().zip(&inertia).map(|(m, i)| m * m / i).sum::<f64>()
    })
    .with_gradient(move |mu| {
        AlgebraElement(mu.0.iter().zip(&inertia2).map(|(m, i)| m / i).collect())
    });
    if matches!(&p.algebra, AlgebraChoice::Named(_)) {
        // |μ|² is a Casimir of so(3)*; for inline algebras no Casimir is
        // assumed.
        sys = sys.with_casimir("mu_sq", |mu| mu.0.iter().map(|x| x * x).sum());
    }
    Ok(sys)
}

fn run_lie_poisson(p: &LiePoissonParams, out_dir: &Path) -> Result<Summary, RunError> {
    let sys = build_lp_system(p)?;
    let mu0 = DualElement(p.mu0.clone());
    let scheme = if p.scheme == "midpoint" { Scheme::Midpoint } else { Scheme::Rk4 };
    let csv = if p.n_steps == 0 {
        // Zero-step run: initial diagnostics row only.
        let mut csv = String::from("time,H");
        for i in 0..sys.casimir_values(&mu0).len() {
            let _ = write!(csv, ",casimir_{i}");
        }
        csv.push('\n');
        let mut row = vec![0.0, sys.hamiltonian(&mu0)];
        row.extend(sys.casimir_values(&mu0));
        csv.push_str(&fmt_row(&row));
        csv
    } else {
        let traj = lp::run(&sys, &mu0, p.dt, p.n_steps, scheme)?;
        traj.to_csv()
    };
    let out = out_dir.join(&p.diagnostics_out);
    write_atomic(&out, &csv)?;
    let final_h = csv.lines().last().unwrap_or_default().to_string();
    Ok(Summary {
        lines: vec![
            format!("lie_poisson: {} steps of {} at dt={}", p.n_steps, p.scheme, p.dt),
            format!("final diagnostics: {final_h}"),
        ],
        outputs: vec![out],
        wall_seconds: 0.0,
    })
}

fn proto_snapshot_csv(state: &PhaseState, h: &Hamiltonian1d) -> String {
    let mut csv = String::from("x,S,rho,p,v\n");
    let p = state.momentum();
    let v = state.velocity(h);
    for (i, &x) in state.grid.points().iter().enumerate() {
        csv.push_str(&fmt_row(&[x, state.s[i], state.rho[i], p[i], v[i]]));
    }
    csv
}

fn run_proto(p: &ProtoParams, out_dir: &Path) -> Result<Summary, RunError> {
    let grid = PeriodicGrid1::new(p.n, p.lbox)?;
    let xs = grid.points();
    let s0 = eval_field(&p.s0, &xs)?;
    let rho0 = eval_field(&p.rho0, &xs)?;
    let state = PhaseState::new(grid, s0, rho0, p.hbar)?;
    let v_expr = Expr::parse(&p.potential).map_err(|e| RunError::Validation(e.to_string()))?;
    let mass = p.mass;
    let h = Hamiltonian1d::new(move |x, q| q * q / (2.0 * mass) + v_expr.eval(x, 0.0))
        .with_dp(move |_x, q| q / mass);

    let mut outputs = Vec::new();
    let mut lines = vec![format!(
        "proto: N={}, {} steps at dt={}, hbar={}",
        p.n, p.n_steps, p.dt, p.hbar
    )];

    if p.n_steps == 0 {
        // Zero-step run: initial snapshot only.
        let out = out_dir.join(&p.snapshot_out);
        write_atomic(&out, &proto_snapshot_csv(&state, &h))?;
        outputs.push(out);
        lines.push("zero-step run: initial snapshot written".into());
        return Ok(Summary { lines, outputs, wall_seconds: 0.0 });
    }

    let traj = phase::run(&state, &h, p.dt, p.n_steps, p.record_every)?;
    let final_state = traj.states.last().unwrap();

    let snap = out_dir.join(&p.snapshot_out);
    write_atomic(&snap, &proto_snapshot_csv(final_state, &h))?;
    outputs.push(snap);

    let mut diag_csv = String::from("time,grid_mass,weight_sum,max_energy_dev\n");
    for d in &traj.diagnostics {
        diag_csv.push_str(&fmt_row(&[d.time, d.grid_mass, d.weight_sum, d.max_energy_dev]));
    }
    let diag = out_dir.join(&p.diagnostics_out);
    write_atomic(&diag, &diag_csv)?;
    outputs.push(diag);

    if let Some(cfg) = &p.shadow {
        let shadow = match cfg {
            ShadowConfig::Locked => ReferencePhase::Locked,
            ShadowConfig::Analytic { r_star, rate } => {
                let value =
                    Expr::parse(r_star).map_err(|e| RunError::Validation(e.to_string()))?;
                let base = ReferencePhase::analytic(move |x, t| value.eval(x, t));
                match rate {
                    Some(rate) => {
                        let r =
                            Expr::parse(rate).map_err(|e| RunError::Validation(e.to_string()))?;
                        base.with_rate(move |x, t| r.eval(x, t))
                    }
                    None => base,
                }
            }
        };
        let events = phase::detect_emergence(&traj, &shadow);
        let mut ev_csv = String::from("marker_id,t_event\n");
        for ev in &events {
            let _ = writeln!(ev_csv, "{},{:.16e}", ev.marker, ev.time);
        }
        let ev_path = out_dir.join(&p.events_out);
        write_atomic(&ev_path, &ev_csv)?;
        outputs.push(ev_path);
        lines.push(format!("emergence events: {}", events.len()));
        let f = phase::shadow_frequency(final_state, &shadow, &h);
        let drift = phase::frequency_drift(&traj, &shadow, &h);
        let f_mean = f.iter().sum::<f64>() / f.len() as f64;
        lines.push(format!("final mean frequency {f_mean:.6e}, transport drift {drift:.3e}"));
    }

    let last = traj.diagnostics.last().unwrap();
    lines.push(format!(
        "final: t={:.6}, grid mass {:.12e}, max energy dev {:.3e}",
        last.time, last.grid_mass, last.max_energy_dev
    ));
    Ok(Summary { lines, outputs, wall_seconds: 0.0 })
}

fn run_functional(p: &FunctionalCheckParams, out_dir: &Path) -> Result<Summary, RunError> {
    let grid = PeriodicGrid1::new(p.n, p.lbox)?;
    let xs = grid.points();
    let f = PolyFunctional::parse(&p.functional)
        .map_err(|e| RunError::Validation(e.to_string()))?;
    let mut members = Vec::new();
    for m in &p.members {
        members.push(EnsembleMember {
            weight: m.weight,
            s: eval_field(&m.s0, &xs)?,
            rho: eval_field(&m.rho0, &xs)?,
        });
    }
    let j = Ensemble::new(grid, members)?;
    let value = functionals::evaluate(&f, &j, p.hbar)?;
    let order = f.classify_order();
    let null_residual = functionals::null_lagrangian_residual(&f, &j, p.hbar)?;
    let normalization = j.normalization();

    let mut csv = String::from("name,value\n");
    let _ = writeln!(csv, "value,{value:.16e}");
    let _ = writeln!(csv, "order,{order}");
    let _ = writeln!(csv, "null_lagrangian_residual,{null_residual:.16e}");
    let _ = writeln!(csv, "normalization,{normalization:.16e}");
    let out = out_dir.join(&p.report_out);
    write_atomic(&out, &csv)?;
    Ok(Summary {
        lines: vec![
            format!("functional_check: '{}' (order {order})", p.functional),
            format!("value {value:.12e}, null-Lagrangian residual {null_residual:.3e}"),
        ],
        outputs: vec![out],
        wall_seconds: 0.0,
    })
}

fn build_eos(eos: &EosConfig) -> InternalEnergy {
    match *eos {
        EosConfig::Linear { a, b } => InternalEnergy::linear(a, b),
        EosConfig::Power { kappa, gamma } => InternalEnergy::power(kappa, gamma),
    }
}

fn compressible_snapshot_csv(st: &CompressibleState) -> String {
    let mut csv = String::from("x,rho,sigma,p\n");
    for (i, &x) in st.grid.points().iter().enumerate() {
        csv.push_str(&fmt_row(&[x, st.rho[i], st.sigma[i], st.p[i]]));
    }
    csv
}

fn run_compressible(p: &FluidCompressibleParams, out_dir: &Path) -> Result<Summary, RunError> {
    let grid = PeriodicGrid1::new(p.n, p.lbox)?;
    let xs = grid.points();
    let rho0 = eval_field(&p.rho0, &xs)?;
    let sigma0 = eval_field(&p.sigma0, &xs)?;
    let p0 = eval_field(&p.p0, &xs)?;
    let u = build_eos(&p.eos);
    let mut st = CompressibleState::new(grid, rho0, sigma0, p0)?;

    let mut diag_csv = String::from("time,mass,entropy,momentum,energy\n");
    let record = |csv: &mut String, st: &CompressibleState| {
        csv.push_str(&fmt_row(&[
            st.time,
            st.mass(),
            st.entropy(),
            st.momentum_total(),
            st.energy(&u),
        ]));
    };
    record(&mut diag_csv, &st);
    for _ in 0..p.n_steps {
        st = fluids::step_compressible(&st, &u, p.dt)?;
        record(&mut diag_csv, &st);
    }

    let snap = out_dir.join(&p.snapshot_out);
    write_atomic(&snap, &compressible_snapshot_csv(&st))?;
    let diag = out_dir.join(&p.diagnostics_out);
    write_atomic(&diag, &diag_csv)?;
    Ok(Summary {
        lines: vec![
            format!("fluid_compressible: N={}, {} steps at dt={}", p.n, p.n_steps, p.dt),
            format!(
                "final: t={:.6}, mass {:.12e}, entropy {:.12e}, momentum {:.12e}, energy {:.12e}",
                st.time,
                st.mass(),
                st.entropy(),
                st.momentum_total(),
                st.energy(&u)
            ),
        ],
        outputs: vec![snap, diag],
        wall_seconds: 0.0,
    })
}

fn run_euler2d(p: &FluidEuler2dParams, out_dir: &Path) -> Result<Summary, RunError> {
    let n = p.n;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut u = if let Some(psi_expr) = &p.psi0 {
        let e = Expr::parse(psi_expr).map_err(|err| RunError::Validation(err.to_string()))?;
        let mut psi = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                psi[j * n + i] = e.eval(i as f64 * h, j as f64 * h);
            }
        }
        VelocityField2d::from_streamfunction(n, &psi)?
    } else {
        let ex = Expr::parse(p.ux0.as_deref().unwrap_or("0"))
            .map_err(|err| RunError::Validation(err.to_string()))?;
        let ey = Expr::parse(p.uy0.as_deref().unwrap_or("0"))
            .map_err(|err| RunError::Validation(err.to_string()))?;
        let raw = VelocityField2d::from_fn(n, |x, y| ex.eval(x, y), |x, y| ey.eval(x, y))?;
        fluids::project_divfree(&raw)
    };

    let mut diag_csv = String::from("time,energy,enstrophy\n");
    diag_csv.push_str(&fmt_row(&[0.0, u.kinetic_energy(), u.enstrophy()]));
    for k in 1..=p.n_steps {
        u = fluids::step_euler(&u, p.dt)?;
        diag_csv.push_str(&fmt_row(&[k as f64 * p.dt, u.kinetic_energy(), u.enstrophy()]));
    }
    let diag = out_dir.join(&p.diagnostics_out);
    write_atomic(&diag, &diag_csv)?;
    let mut outputs = vec![diag];
    if let Some(snap_name) = &p.snapshot_out {
        let mut csv = String::from("x,y,ux,uy\n");
        for j in 0..n {
            for i in 0..n {
                csv.push_str(&fmt_row(&[
                    i as f64 * h,
                    j as f64 * h,
                    u.ux[j * n + i],
                    u.uy[j * n + i],
                ]));
            }
        }
        let snap = out_dir.join(snap_name);
        write_atomic(&snap, &csv)?;
        outputs.push(snap);
    }
    Ok(Summary {
        lines: vec![
            format!("fluid_euler2d: N={}, {} steps at dt={}", p.n, p.n_steps, p.dt),
            format!(
                "final: energy {:.12e}, enstrophy {:.12e}",
                u.kinetic_energy(),
                u.enstrophy()
            ),
        ],
        outputs,
        wall_seconds: 0.0,
    })
}
