//! Scenario configuration: JSON documents with per-kind parameter
//! blocks, strict unknown-key rejection, documented defaults, and
//! validation with distinct messages per failure.

use crate::expr::Expr;
use serde::{Deserialize, Serialize};

/// A validated scenario. JSON form:
/// `{"kind": "<kind>", "params": { ... }}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Scenario {
    LiePoisson(LiePoissonParams),
    Proto(ProtoParams),
    FunctionalCheck(FunctionalCheckParams),
    FluidCompressible(FluidCompressibleParams),
    FluidEuler2d(FluidEuler2dParams),
}

fn default_dt() -> f64 {
    1e-3
}

fn default_hbar() -> f64 {
    1.0
}

fn default_lbox() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_one() -> usize {
    1
}

fn default_scheme() -> String {
    "rk4".into()
}

fn default_expr_zero() -> String {
    "0".into()
}

fn default_expr_one() -> String {
    "1".into()
}

/// Algebra selection: the name `"so3"` or an inline structure-constant
/// document `{"dim": n, "c": [[i,j,k,value],...], "metric": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraChoice {
    Named(String),
    Inline(serde_json::Value),
}

impl Default for AlgebraChoice {
    fn default() -> Self {
        AlgebraChoice::Named("so3".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiePoissonParams {
    /// Algebra: "so3" (default) or inline structure constants.
    #[serde(default)]
    pub algebra: AlgebraChoice,
    /// Diagonal quadratic Hamiltonian H = ½ Σ μ_i²/I_i.
    pub inertia: Vec<f64>,
    pub mu0: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_steps: usize,
    /// "rk4" (default) or "midpoint".
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "LiePoissonParams::default_out")]
    pub diagnostics_out: String,
    #[serde(default)]
    pub seed: u64,
}

impl LiePoissonParams {
    fn default_out() -> String {
        "lie_poisson_diagnostics.csv".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShadowConfig {
    /// Reference phase locked to the synchronicity phase.
    Locked,
    /// Analytic R*(x, t); in the expressions `y` is bound to `t`.
    Analytic {
        r_star: String,
        #[serde(default)]
        rate: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtoParams {
    #[serde(default = "ProtoParams::default_n")]
    pub n: usize,
    #[serde(default = "default_lbox")]
    pub lbox: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "default_hbar")]
    pub mass: f64,
    /// Potential V(x) in H = p²/2m + V(x).
    #[serde(default = "default_expr_zero")]
    pub potential: String,
    /// Initial phase S(x).
    #[serde(default = "default_expr_zero")]
    pub s0: String,
    /// Initial emergence-density ρ(x) ≥ 0.
    #[serde(default = "default_expr_one")]
    pub rho0: String,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "default_one")]
    pub record_every: usize,
    #[serde(default)]
    pub shadow: Option<ShadowConfig>,
    #[serde(default = "ProtoParams::default_snapshot")]
    pub snapshot_out: String,
    #[serde(default = "ProtoParams::default_diag")]
    pub diagnostics_out: String,
    #[serde(default = "ProtoParams::default_events")]
    pub events_out: String,
    #[serde(default)]
    pub seed: u64,
}

impl ProtoParams {
    fn default_n() -> usize {
        128
    }
    fn default_snapshot() -> String {
        "proto_snapshot.csv".into()
    }
    fn default_diag() -> String {
        "proto_diagnostics.csv".into()
    }
    fn default_events() -> String {
        "proto_events.csv".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    #[serde(default = "MemberConfig::default_weight")]
    pub weight: f64,
    pub s0: String,
    #[serde(default = "default_expr_one")]
    pub rho0: String,
}

impl MemberConfig {
    fn default_weight() -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalCheckParams {
    /// Compact text form, e.g. "2.0 * p^2 + 1.0 * D1p^2".
    pub functional: String,
    #[serde(default = "ProtoParams::default_n")]
    pub n: usize,
    #[serde(default = "default_lbox")]
    pub lbox: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub members: Vec<MemberConfig>,
    #[serde(default = "FunctionalCheckParams::default_out")]
    pub report_out: String,
    #[serde(default)]
    pub seed: u64,
}

impl FunctionalCheckParams {
    fn default_out() -> String {
        "functional_report.csv".into()
    }
}

/// Internal energy selection for the compressible fluid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum EosConfig {
    /// U = a·ρ + b·σ.
    Linear { a: f64, b: f64 },
    /// Barotropic U = κ·ρ^(γ−1).
    Power { kappa: f64, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidCompressibleParams {
    #[serde(default = "FluidCompressibleParams::default_n")]
    pub n: usize,
    #[serde(default = "default_lbox")]
    pub lbox: f64,
    pub eos: EosConfig,
    #[serde(default = "default_expr_one")]
    pub rho0: String,
    #[serde(default = "default_expr_zero")]
    pub sigma0: String,
    #[serde(default = "default_expr_zero")]
    pub p0: String,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "FluidCompressibleParams::default_snapshot")]
    pub snapshot_out: String,
    #[serde(default = "FluidCompressibleParams::default_diag")]
    pub diagnostics_out: String,
    #[serde(default)]
    pub seed: u64,
}

impl FluidCompressibleParams {
    fn default_n() -> usize {
        256
    }
    fn default_snapshot() -> String {
        "fluid_snapshot.csv".into()
    }
    fn default_diag() -> String {
        "fluid_diagnostics.csv".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidEuler2dParams {
    #[serde(default = "FluidEuler2dParams::default_n")]
    pub n: usize,
    /// Streamfunction ψ(x, y); u = (∂ψ/∂y, −∂ψ/∂x) is exactly
    /// divergence-free. Mutually exclusive with ux0/uy0.
    #[serde(default)]
    pub psi0: Option<String>,
    /// Raw velocity components, projected to divergence-free at init.
    #[serde(default)]
    pub ux0: Option<String>,
    #[serde(default)]
    pub uy0: Option<String>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "FluidEuler2dParams::default_diag")]
    pub diagnostics_out: String,
    #[serde(default)]
    pub snapshot_out: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

impl FluidEuler2dParams {
    fn default_n() -> usize {
        64
    }
    fn default_diag() -> String {
        "euler2d_diagnostics.csv".into()
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<Scenario, String> {
    let scenario: Scenario =
        serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
    validate(&scenario)?;
    Ok(scenario)
}

fn check_expr(name: &str, text: &str) -> Result<(), String> {
    Expr::parse(text).map(|_| ()).map_err(|e| format!("{name}: {e}"))
}

fn check_dt(dt: f64) -> Result<(), String> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(format!("dt must be positive and finite, got {dt}"));
    }
    Ok(())
}

fn check_pow2(n: usize) -> Result<(), String> {
    if !n.is_power_of_two() || n < 8 {
        return Err(format!("grid size must be a power of two >= 8, got {n}"));
    }
    Ok(())
}

pub fn validate(s: &Scenario) -> Result<(), String> {
    match s {
        Scenario::LiePoisson(p) => {
            check_dt(p.dt)?;
            if let AlgebraChoice::Named(name) = &p.algebra {
                if name != "so3" {
                    return Err(format!("unknown algebra name '{name}' (expected \"so3\")"));
                }
            }
            if p.mu0.is_empty() {
                return Err("mu0 must be nonempty".into());
            }
            if p.inertia.len() != p.mu0.len() {
                return Err(format!(
                    "inertia length {} does not match mu0 length {}",
                    p.inertia.len(),
                    p.mu0.len()
                ));
            }
            if p.inertia.iter().any(|&i| !(i > 0.0)) {
                return Err("inertia entries must be positive".into());
            }
            if p.scheme != "rk4" && p.scheme != "midpoint" {
                return Err(format!("scheme must be \"rk4\" or \"midpoint\", got \"{}\"", p.scheme));
            }
            Ok(())
        }
        Scenario::Proto(p) => {
            check_dt(p.dt)?;
            check_pow2(p.n)?;
            if !(p.lbox > 0.0) {
                return Err(format!("lbox must be positive, got {}", p.lbox));
            }
            if !(p.hbar > 0.0) {
                return Err(format!("hbar must be positive, got {}", p.hbar));
            }
            if !(p.mass > 0.0) {
                return Err(format!("mass must be positive, got {}", p.mass));
            }
            if p.record_every < 1 {
                return Err("record_every must be at least 1".into());
            }
            check_expr("potential", &p.potential)?;
            check_expr("s0", &p.s0)?;
            check_expr("rho0", &p.rho0)?;
            if let Some(ShadowConfig::Analytic { r_star, rate }) = &p.shadow {
                check_expr("shadow.r_star", r_star)?;
                if let Some(rate) = rate {
                    check_expr("shadow.rate", rate)?;
                }
            }
            Ok(())
        }
        Scenario::FunctionalCheck(p) => {
            check_pow2(p.n)?;
            if !(p.lbox > 0.0) {
                return Err(format!("lbox must be positive, got {}", p.lbox));
            }
            if !(p.hbar > 0.0) {
                return Err(format!("hbar must be positive, got {}", p.hbar));
            }
            if p.members.is_empty() {
                return Err("members must be nonempty".into());
            }
            lplab_core::functionals::PolyFunctional::parse(&p.functional)
                .map_err(|e| format!("functional: {e}"))?;
            for (i, m) in p.members.iter().enumerate() {
                if !(m.weight >= 0.0) {
                    return Err(format!("members[{i}].weight must be nonnegative"));
                }
                check_expr(&format!("members[{i}].s0"), &m.s0)?;
                check_expr(&format!("members[{i}].rho0"), &m.rho0)?;
            }
            Ok(())
        }
        Scenario::FluidCompressible(p) => {
            check_dt(p.dt)?;
            check_pow2(p.n)?;
            if !(p.lbox > 0.0) {
                return Err(format!("lbox must be positive, got {}", p.lbox));
            }
            if let EosConfig::Power { gamma, .. } = p.eos {
                if !(gamma > 1.0) {
                    return Err(format!("eos gamma must exceed 1, got {gamma}"));
                }
            }
            check_expr("rho0", &p.rho0)?;
            check_expr("sigma0", &p.sigma0)?;
            check_expr("p0", &p.p0)?;
            Ok(())
        }
        Scenario::FluidEuler2d(p) => {
            check_dt(p.dt)?;
            check_pow2(p.n)?;
            match (&p.psi0, &p.ux0, &p.uy0) {
                (Some(psi), None, None) => check_expr("psi0", psi),
                (None, Some(ux), Some(uy)) => {
                    check_expr("ux0", ux)?;
                    check_expr("uy0", uy)
                }
                _ => Err("specify either psi0 or both ux0 and uy0".into()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_rigid_body_config_fills_defaults() {
        let text = r#"{"kind": "lie_poisson",
            "params": {"inertia": [1.0, 1.0, 2.0], "mu0": [1.0, 0.0, 1.0], "n_steps": 10}}"#;
        let s = parse_config(text).unwrap();
        match s {
            Scenario::LiePoisson(p) => {
                assert_eq!(p.dt, 1e-3);
                assert_eq!(p.scheme, "rk4");
                assert_eq!(p.algebra, AlgebraChoice::Named("so3".into()));
                assert_eq!(p.diagnostics_out, "lie_poisson_diagnostics.csv");
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let text = r#"{"kind": "lie_poisson",
            "params": {"inertia": [1.0], "mu0": [1.0], "n_steps": 1, "dtt": 0.1}}"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.contains("dtt"), "error should name the key: {err}");
    }

    #[test]
    fn bad_values_have_distinct_messages() {
        let bad_dt = r#"{"kind": "lie_poisson",
            "params": {"inertia": [1.0], "mu0": [1.0], "n_steps": 1, "dt": -0.5}}"#;
        assert!(parse_config(bad_dt).unwrap_err().contains("dt must be positive"));
        let bad_n = r#"{"kind": "proto", "params": {"n_steps": 1, "n": 100}}"#;
        assert!(parse_config(bad_n).unwrap_err().contains("power of two"));
        let bad_scheme = r#"{"kind": "lie_poisson",
            "params": {"inertia": [1.0], "mu0": [1.0], "n_steps": 1, "scheme": "euler"}}"#;
        assert!(parse_config(bad_scheme).unwrap_err().contains("scheme"));
        let bad_expr = r#"{"kind": "proto", "params": {"n_steps": 1, "s0": "sin x"}}"#;
        assert!(parse_config(bad_expr).unwrap_err().contains("s0"));
        let bad_euler = r#"{"kind": "fluid_euler2d", "params": {"n_steps": 1}}"#;
        assert!(parse_config(bad_euler).unwrap_err().contains("psi0"));
    }

    #[test]
    fn serialize_reparse_is_identity() {
        let text = r#"{"kind": "proto", "params": {
            "n": 64, "s0": "sin(x)", "rho0": "1 + 0.5*cos(x)",
            "n_steps": 5, "shadow": {"kind": "analytic", "r_star": "x - 0.5*y"}}}"#;
        let s = parse_config(text).unwrap();
        let round = parse_config(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, round);
    }
}
