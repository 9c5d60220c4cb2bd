//! Property test: any generated configuration that parses serializes
//! back to a document that reparses to an equal scenario.

use lplab_cli::scenario::parse_config;
use proptest::prelude::*;

fn grid_size() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![8usize, 16, 32, 64, 128, 256])
}

fn expr_string() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "0".to_string(),
        "1".to_string(),
        "x".to_string(),
        "sin(x)".to_string(),
        "1 + 0.5*cos(x)".to_string(),
        "2*x - 0.1*sin(2*x)".to_string(),
        "exp(-x/pi)".to_string(),
    ])
}

fn lie_poisson_json() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(0.5f64..3.0, 3),
        prop::collection::vec(-2.0f64..2.0, 3),
        1e-4f64..1e-2,
        0usize..500,
        prop::bool::ANY,
    )
        .prop_map(|(inertia, mu0, dt, n_steps, midpoint)| {
            format!(
                r#"{{"kind": "lie_poisson", "params": {{
                    "inertia": {inertia:?}, "mu0": {mu0:?}, "dt": {dt},
                    "n_steps": {n_steps}, "scheme": "{}"}}}}"#,
                if midpoint { "midpoint" } else { "rk4" }
            )
        })
}

fn proto_json() -> impl Strategy<Value = String> {
    (grid_size(), expr_string(), expr_string(), 1e-4f64..1e-2, 0usize..200).prop_map(
        |(n, s0, rho0, dt, n_steps)| {
            format!(
                r#"{{"kind": "proto", "params": {{
                    "n": {n}, "s0": "{s0}", "rho0": "1 + 0.1*{rho0}",
                    "dt": {dt}, "n_steps": {n_steps}}}}}"#
            )
        },
    )
}

fn euler_json() -> impl Strategy<Value = String> {
    (grid_size(), 1e-4f64..1e-2, 0usize..100).prop_map(|(n, dt, n_steps)| {
        format!(
            r#"{{"kind": "fluid_euler2d", "params": {{
                "n": {n}, "psi0": "sin(x)*sin(y)", "dt": {dt}, "n_steps": {n_steps}}}}}"#
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_serialize_reparse_is_identity(
        text in prop_oneof![lie_poisson_json(), proto_json(), euler_json()]
    ) {
        let scenario = parse_config(&text).unwrap();
        let serialized = serde_json::to_string(&scenario).unwrap();
        let reparsed = parse_config(&serialized).unwrap();
        prop_assert_eq!(scenario, reparsed);
    }
}
