//! Finite-dimensional Lie algebras by structure constants, plus a
//! discretized semidirect-product algebra of periodic vector fields with
//! advected scalar functions.
//!
//! Conventions:
//!
//! * `[e_i, e_j] = Σ_k c^k_{ij} e_k`, with antisymmetry `c^k_{ij} = -c^k_{ji}`
//!   and the Jacobi identity validated on construction.
//! * The pairing is `⟨μ, ξ⟩ = μᵀ G ξ` for a symmetric positive-definite
//!   matrix `G` (identity by default).
//! * The coadjoint action uses the plus sign convention
//!   `⟨ad*_ξ μ, ζ⟩ = ⟨μ, [ξ, ζ]⟩` for every ζ. The opposite sign belongs
//!   to the opposite invariance convention; only this one is provided,
//!   and the rigid-body dynamics in [`crate::lp`] pin its physical
//!   correctness (it reproduces Euler's equations on so(3)).
//!
//! so(3) is realized with ε_{ijk} structure constants and the identity
//! pairing, so `ad*_ξ μ = μ × ξ`.

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid1;
use crate::spectral;
use serde::Deserialize;

const ANTISYMMETRY_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-12;

/// Element of the algebra g (coordinates in the chosen basis).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(pub Vec<f64>);

/// Element of the dual g* (coordinates in the dual basis).
#[derive(Debug, Clone, PartialEq)]
pub struct DualElement(pub Vec<f64>);

impl AlgebraElement {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl DualElement {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// A finite-dimensional Lie algebra given by structure constants and a
/// pairing matrix.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    /// c[i][j][k] = c^k_{ij}
    c: Vec<Vec<Vec<f64>>>,
    metric: Vec<Vec<f64>>,
    /// Lower Cholesky factor of the metric, for solving G ν = a.
    chol: Vec<Vec<f64>>,
    pub basis_labels: Vec<String>,
}

/// JSON document form: `{"dim": n, "c": [[i, j, k, value], ...],
/// "metric": [[...], ...]}` with 0-based indices. Entries are literal
/// assignments of `c^k_{ij}`; the loader does not symmetrize, so both
/// orientations of each bracket must be present.
#[derive(Debug, Deserialize)]
struct AlgebraJson {
    dim: usize,
    c: Vec<(usize, usize, usize, f64)>,
    #[serde(default)]
    metric: Option<Vec<Vec<f64>>>,
}

fn cholesky(g: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = g[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::InvalidAlgebra(
                        "pairing matrix is not positive definite".into(),
                    ));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}

impl LieAlgebra {
    /// Build and validate an algebra from structure constants
    /// `c[i][j][k] = c^k_{ij}` and an optional pairing matrix.
    pub fn new(
        dim: usize,
        c: Vec<Vec<Vec<f64>>>,
        metric: Option<Vec<Vec<f64>>>,
        basis_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidAlgebra("dimension must be positive".into()));
        }
        if c.len() != dim || c.iter().any(|m| m.len() != dim || m.iter().any(|r| r.len() != dim)) {
            return Err(Error::InvalidAlgebra(
                "structure constant tensor must be dim×dim×dim".into(),
            ));
        }
        // Antisymmetry.
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if (c[i][j][k] + c[j][i][k]).abs() > ANTISYMMETRY_TOL {
                        return Err(Error::InvalidAlgebra(format!(
                            "antisymmetry violated at c^{k}_{{{i}{j}}}"
                        )));
                    }
                }
            }
        }
        // Jacobi identity, fully contracted:
        // Σ_l c^l_{jk} c^m_{il} + c^l_{ki} c^m_{jl} + c^l_{ij} c^m_{kl} = 0.
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for m in 0..dim {
                        let mut sum = 0.0;
                        for l in 0..dim {
                            sum += c[j][k][l] * c[i][l][m]
                                + c[k][i][l] * c[j][l][m]
                                + c[i][j][l] * c[k][l][m];
                        }
                        if sum.abs() > JACOBI_TOL {
                            return Err(Error::InvalidAlgebra(format!(
                                "Jacobi identity violated: residual {sum:e} at ({i},{j},{k},{m})"
                            )));
                        }
                    }
                }
            }
        }
        let metric = metric.unwrap_or_else(|| {
            (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()
        });
        if metric.len() != dim || metric.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidAlgebra("pairing matrix must be dim×dim".into()));
        }
        for i in 0..dim {
            for j in 0..dim {
                if (metric[i][j] - metric[j][i]).abs() > ANTISYMMETRY_TOL {
                    return Err(Error::InvalidAlgebra("pairing matrix is not symmetric".into()));
                }
            }
        }
        let chol = cholesky(&metric)?;
        let basis_labels =
            basis_labels.unwrap_or_else(|| (1..=dim).map(|i| format!("e{i}")).collect());
        if basis_labels.len() != dim {
            return Err(Error::InvalidAlgebra("basis label count must equal dim".into()));
        }
        Ok(Self { dim, c, metric, chol, basis_labels })
    }

    /// so(3) with ε_{ijk} structure constants and identity pairing.
    pub fn so3() -> Self {
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        // [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2 and antisymmetric partners.
        for &(i, j, k, v) in &[
            (0usize, 1usize, 2usize, 1.0),
            (1, 0, 2, -1.0),
            (1, 2, 0, 1.0),
            (2, 1, 0, -1.0),
            (2, 0, 1, 1.0),
            (0, 2, 1, -1.0),
        ] {
            c[i][j][k] = v;
        }
        Self::new(3, c, None, None).expect("so(3) constants are valid")
    }

    /// Load from the JSON document form (see module docs).
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: AlgebraJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("algebra JSON: {e}")))?;
        let dim = parsed.dim;
        if dim == 0 {
            return Err(Error::InvalidAlgebra("dimension must be positive".into()));
        }
        let mut c = vec![vec![vec![0.0; dim]; dim]; dim];
        for (i, j, k, v) in parsed.c {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidAlgebra(format!(
                    "structure constant index ({i},{j},{k}) out of range for dim {dim}"
                )));
            }
            c[i][j][k] = v;
        }
        Self::new(dim, c, parsed.metric, None)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &[Vec<f64>] {
        &self.metric
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got });
        }
        Ok(())
    }

    /// `[x, y]_k = Σ_{ij} c^k_{ij} x_i y_j`.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(x.dim())?;
        self.check_dim(y.dim())?;
        let mut z = vec![0.0; self.dim];
        for i in 0..self.dim {
            if x.0[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                let xy = x.0[i] * y.0[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..self.dim {
                    z[k] += self.c[i][j][k] * xy;
                }
            }
        }
        Ok(AlgebraElement(z))
    }

    /// `⟨μ, ξ⟩ = μᵀ G ξ`.
    pub fn pairing(&self, mu: &DualElement, xi: &AlgebraElement) -> Result<f64> {
        self.check_dim(mu.dim())?;
        self.check_dim(xi.dim())?;
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += mu.0[i] * self.metric[i][j] * xi.0[j];
            }
        }
        Ok(acc)
    }

    /// Coadjoint action, plus convention: the unique ν with
    /// `⟨ν, ζ⟩ = ⟨μ, [ξ, ζ]⟩` for all ζ.
    pub fn ad_star(&self, xi: &AlgebraElement, mu: &DualElement) -> Result<DualElement> {
        self.check_dim(xi.dim())?;
        self.check_dim(mu.dim())?;
        // a_j = Σ_{m,k,i} μ_m G_{mk} c^k_{ij} ξ_i, then solve G ν = a.
        let mut gmu = vec![0.0; self.dim];
        for k in 0..self.dim {
            for m in 0..self.dim {
                gmu[k] += mu.0[m] * self.metric[m][k];
            }
        }
        let mut a = vec![0.0; self.dim];
        for i in 0..self.dim {
            if xi.0[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                let mut s = 0.0;
                for k in 0..self.dim {
                    s += gmu[k] * self.c[i][j][k];
                }
                a[j] += s * xi.0[i];
            }
        }
        Ok(DualElement(chol_solve(&self.chol, &a)))
    }

    /// Index raising against the pairing matrix: solves `G·x = b`.
    ///
    /// Coordinate partials `∂H/∂μ_k` of a function on the dual pair
    /// with probes through the plain dot product; the algebra-side
    /// gradient that satisfies `d/dε H(μ+εξ) = ⟨ξ, grad⟩` under the
    /// metric pairing is their raise.
    pub fn raise(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(b.len())?;
        Ok(chol_solve(&self.chol, b))
    }

    /// Max fully-contracted Jacobi residual (diagnostic; zero for a
    /// valid algebra by construction).
    pub fn jacobi_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    for m in 0..self.dim {
                        let mut sum = 0.0;
                        for l in 0..self.dim {
                            sum += self.c[j][k][l] * self.c[i][l][m]
                                + self.c[k][i][l] * self.c[j][l][m]
                                + self.c[i][j][l] * self.c[k][l][m];
                        }
                        worst = worst.max(sum.abs());
                    }
                }
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------
// Semidirect product of gridded vector fields with advected scalars
// ---------------------------------------------------------------------

/// Element `(v, U_1, …, U_m)` of the semidirect-product algebra: a
/// vector field on the periodic grid plus `m` scalar functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridElement {
    pub v: Vec<f64>,
    pub scalars: Vec<Vec<f64>>,
}

/// Dual element `(m, a_1, …, a_m)`: a momentum density against the
/// vector-field part and one density per advected scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDualElement {
    pub momentum: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
}

/// The semidirect-product Lie algebra of vector fields on a 1-D
/// periodic grid acting on `n_functions` advected scalar functions:
///
/// `[(v₁,U₁,…), (v₂,U₂,…)] = ([v₁,v₂], v₁∂U₂ − v₂∂U₁, …)`
///
/// with `[v₁,v₂] = v₁∂v₂ − v₂∂v₁` and the abelian scalar part
/// commuting. Derivatives are spectral, which keeps the discrete
/// coadjoint action exactly adjoint to the discrete bracket.
#[derive(Debug, Clone)]
pub struct GridAlgebra {
    pub grid: PeriodicGrid1,
    pub n_functions: usize,
}

impl GridAlgebra {
    /// Extend the gridded vector-field algebra by `n_functions` ∈ {1, 2}
    /// advected scalars.
    pub fn semidirect(grid: PeriodicGrid1, n_functions: usize) -> Result<Self> {
        if !(1..=2).contains(&n_functions) {
            return Err(Error::InvalidInput(format!(
                "n_functions must be 1 or 2, got {n_functions}"
            )));
        }
        Ok(Self { grid, n_functions })
    }

    fn check_element(&self, e: &GridElement) -> Result<()> {
        self.grid.check_len(&e.v)?;
        if e.scalars.len() != self.n_functions {
            return Err(Error::DimensionMismatch {
                expected: self.n_functions,
                got: e.scalars.len(),
            });
        }
        for s in &e.scalars {
            self.grid.check_len(s)?;
        }
        Ok(())
    }

    fn check_dual(&self, e: &GridDualElement) -> Result<()> {
        self.grid.check_len(&e.momentum)?;
        if e.densities.len() != self.n_functions {
            return Err(Error::DimensionMismatch {
                expected: self.n_functions,
                got: e.densities.len(),
            });
        }
        for s in &e.densities {
            self.grid.check_len(s)?;
        }
        Ok(())
    }

    pub fn bracket(&self, a: &GridElement, b: &GridElement) -> Result<GridElement> {
        self.check_element(a)?;
        self.check_element(b)?;
        let l = self.grid.length;
        let da = spectral::derivative(&a.v, l);
        let db = spectral::derivative(&b.v, l);
        let v: Vec<f64> =
            (0..self.grid.n).map(|i| a.v[i] * db[i] - b.v[i] * da[i]).collect();
        let scalars = (0..self.n_functions)
            .map(|s| {
                let du_b = spectral::derivative(&b.scalars[s], l);
                let du_a = spectral::derivative(&a.scalars[s], l);
                (0..self.grid.n).map(|i| a.v[i] * du_b[i] - b.v[i] * du_a[i]).collect()
            })
            .collect();
        Ok(GridElement { v, scalars })
    }

    /// L² pairing with the grid measure:
    /// `⟨(m, a_s), (v, U_s)⟩ = ∫ m·v dx + Σ_s ∫ a_s·U_s dx`.
    pub fn pairing(&self, mu: &GridDualElement, xi: &GridElement) -> Result<f64> {
        self.check_dual(mu)?;
        self.check_element(xi)?;
        let mut acc = 0.0;
        for i in 0..self.grid.n {
            acc += mu.momentum[i] * xi.v[i];
        }
        for s in 0..self.n_functions {
            for i in 0..self.grid.n {
                acc += mu.densities[s][i] * xi.scalars[s][i];
            }
        }
        Ok(acc * self.grid.dx())
    }

    /// Discrete coadjoint action, adjoint to [`Self::bracket`] under
    /// [`Self::pairing`] by summation by parts:
    ///
    /// `ad*_ξ μ = ( -∂(m v) - m ∂v - Σ_s a_s ∂U_s , -∂(a_s v) )`
    ///
    /// for `ξ = (v, U_s)` and `μ = (m, a_s)`.
    pub fn ad_star(&self, xi: &GridElement, mu: &GridDualElement) -> Result<GridDualElement> {
        self.check_element(xi)?;
        self.check_dual(mu)?;
        let n = self.grid.n;
        let l = self.grid.length;
        let mv: Vec<f64> = (0..n).map(|i| mu.momentum[i] * xi.v[i]).collect();
        let d_mv = spectral::derivative(&mv, l);
        let dv = spectral::derivative(&xi.v, l);
        let mut momentum: Vec<f64> =
            (0..n).map(|i| -d_mv[i] - mu.momentum[i] * dv[i]).collect();
        for s in 0..self.n_functions {
            let du = spectral::derivative(&xi.scalars[s], l);
            for i in 0..n {
                momentum[i] -= mu.densities[s][i] * du[i];
            }
        }
        let densities = (0..self.n_functions)
            .map(|s| {
                let av: Vec<f64> = (0..n).map(|i| mu.densities[s][i] * xi.v[i]).collect();
                spectral::derivative(&av, l).iter().map(|d| -d).collect()
            })
            .collect();
        Ok(GridDualElement { momentum, densities })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_bracket_basis() {
        let a = LieAlgebra::so3();
        let e1 = AlgebraElement::basis(3, 0);
        let e2 = AlgebraElement::basis(3, 1);
        let z = a.bracket(&e1, &e2).unwrap();
        assert_eq!(z.0, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn bracket_of_element_with_itself_is_zero() {
        let a = LieAlgebra::so3();
        let x = AlgebraElement(vec![0.3, -1.2, 0.7]);
        let z = a.bracket(&x, &x).unwrap();
        assert_eq!(z.0, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn pairing_identity_metric() {
        let a = LieAlgebra::so3();
        let e1d = DualElement::basis(3, 0);
        let e1 = AlgebraElement::basis(3, 0);
        let e2 = AlgebraElement::basis(3, 1);
        assert_eq!(a.pairing(&e1d, &e1).unwrap(), 1.0);
        assert_eq!(a.pairing(&e1d, &e2).unwrap(), 0.0);
    }

    #[test]
    fn ad_star_so3_is_mu_cross_xi() {
        let a = LieAlgebra::so3();
        let xi = AlgebraElement::basis(3, 0); // e1
        let mu = DualElement::basis(3, 1); // e2
        let v = a.ad_star(&xi, &mu).unwrap();
        // μ × ξ = e2 × e1 = -e3
        assert!((v.0[0]).abs() < 1e-15);
        assert!((v.0[1]).abs() < 1e-15);
        assert!((v.0[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn ad_star_of_zero_xi_is_zero() {
        let a = LieAlgebra::so3();
        let mu = DualElement(vec![1.0, -2.0, 0.5]);
        let v = a.ad_star(&AlgebraElement::zero(3), &mu).unwrap();
        assert_eq!(v.0, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = LieAlgebra::so3();
        let bad = AlgebraElement(vec![1.0, 2.0]);
        let ok = AlgebraElement::basis(3, 0);
        assert!(matches!(
            a.bracket(&bad, &ok),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn antisymmetry_validated() {
        let mut c = vec![vec![vec![0.0; 2]; 2]; 2];
        c[0][1][0] = 1.0; // missing the antisymmetric partner
        assert!(matches!(LieAlgebra::new(2, c, None, None), Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn jacobi_validated() {
        // Antisymmetric but Jacobi-violating: [e1,e2]=e3, [e2,e3]=e1,
        // [e3,e1]=e1 gives [[e3,e1],e2] = e3 with the other two cyclic
        // terms vanishing.
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        c[0][1][2] = 1.0;
        c[1][0][2] = -1.0;
        c[1][2][0] = 1.0;
        c[2][1][0] = -1.0;
        c[2][0][0] = 1.0;
        c[0][2][0] = -1.0;
        assert!(matches!(LieAlgebra::new(3, c, None, None), Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn metric_must_be_spd() {
        let c = vec![vec![vec![0.0; 2]; 2]; 2]; // abelian, always valid
        let bad = vec![vec![1.0, 0.0], vec![0.0, -1.0]];
        assert!(LieAlgebra::new(2, c.clone(), Some(bad), None).is_err());
        let asym = vec![vec![1.0, 0.5], vec![0.0, 1.0]];
        assert!(LieAlgebra::new(2, c, Some(asym), None).is_err());
    }

    #[test]
    fn json_round_trip_so3() {
        let text = r#"{"dim": 3, "c": [
            [0,1,2, 1.0], [1,0,2, -1.0],
            [1,2,0, 1.0], [2,1,0, -1.0],
            [2,0,1, 1.0], [0,2,1, -1.0]
        ]}"#;
        let a = LieAlgebra::from_json(text).unwrap();
        let ref_a = LieAlgebra::so3();
        let x = AlgebraElement(vec![1.0, 2.0, 3.0]);
        let y = AlgebraElement(vec![4.0, 5.0, 6.0]);
        assert_eq!(a.bracket(&x, &y).unwrap(), ref_a.bracket(&x, &y).unwrap());
    }

    #[test]
    fn json_rejects_bad_index() {
        let text = r#"{"dim": 2, "c": [[0,1,5, 1.0]]}"#;
        assert!(LieAlgebra::from_json(text).is_err());
    }

    #[test]
    fn semidirect_scalar_part_commutes() {
        let grid = PeriodicGrid1::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let alg = GridAlgebra::semidirect(grid, 1).unwrap();
        let xs = grid.points();
        let u1: Vec<f64> = xs.iter().map(|&x| x.sin()).collect();
        let u2: Vec<f64> = xs.iter().map(|&x| (2.0 * x).cos()).collect();
        let a = GridElement { v: vec![0.0; 32], scalars: vec![u1] };
        let b = GridElement { v: vec![0.0; 32], scalars: vec![u2] };
        let z = alg.bracket(&a, &b).unwrap();
        assert!(z.v.iter().all(|&v| v.abs() < 1e-14));
        assert!(z.scalars[0].iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn semidirect_vector_acts_on_scalar() {
        let grid = PeriodicGrid1::new(64, 2.0 * std::f64::consts::PI).unwrap();
        let alg = GridAlgebra::semidirect(grid, 1).unwrap();
        let xs = grid.points();
        let v: Vec<f64> = xs.iter().map(|&x| 1.0 + 0.5 * x.sin()).collect();
        let u: Vec<f64> = xs.iter().map(|&x| (2.0 * x).cos()).collect();
        let a = GridElement { v: v.clone(), scalars: vec![vec![0.0; 64]] };
        let b = GridElement { v: vec![0.0; 64], scalars: vec![u] };
        let z = alg.bracket(&a, &b).unwrap();
        assert!(z.v.iter().all(|&w| w.abs() < 1e-13));
        for (i, &x) in xs.iter().enumerate() {
            let expected = v[i] * (-2.0 * (2.0 * x).sin());
            assert!((z.scalars[0][i] - expected).abs() < 1e-11);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let grid = PeriodicGrid1::new(32, 1.0).unwrap();
        let alg = GridAlgebra::semidirect(grid, 1).unwrap();
        let a = GridElement { v: vec![0.0; 16], scalars: vec![vec![0.0; 16]] };
        assert!(alg.bracket(&a, &a).is_err());
    }
}
