//! Polynomial functionals of the momentum field and its derivatives.
//!
//! A functional is a sum of monomials `coeff · x^a · ∏_k (D^{d_k} p)^{m_k}`
//! where the derivative operator carries one factor of `ħ̄` per order:
//! `D^d p = ħ̄^d ∂^d p`. Functionals of derivative order 0 are classical
//! (local in `p`); each additional derivative order enlarges the class,
//! and the classical limit `ħ̄ → 0` at fixed `p` kills the derivative
//! terms order by order.
//!
//! Over a weighted ensemble of phase sections the expectation value is
//! `Σ_e w_e ∫ ρ_e F(x, p_e, Dp_e, …) dx`, and the density-weighted
//! variational derivative is the Euler-Lagrange form
//!
//! `𝒟_ρF = ρ⁻¹ Σ_d (−∂)^d ( ρ · ħ̄^d · ∂F/∂(D^d p) · ħ̄^{…} )`
//!
//! written so that the Gateaux property
//! `d/dε 𝓕(p + ε δp)|₀ = ∫ ρ δp 𝒟_ρF dx` holds exactly in the discrete
//! inner product (spectral derivatives are exactly antisymmetric).
//! Points where ρ vanishes are masked. The induced pair
//! `F̂ = (𝒟_ρF, −p·𝒟_ρF + F)` satisfies the null-Lagrangian identity
//! `𝓕(𝒥) = ⟨𝒥, F̂⟩` identically.

use crate::error::{Error, Result};
use crate::grid::{self, PeriodicGrid1};
use crate::spectral;

/// One monomial `coeff · x^{x_power} · ∏ (D^{order} p)^{power}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub x_power: u32,
    /// (derivative order, power) factors; powers are ≥ 1.
    pub factors: Vec<(u32, u32)>,
}

impl Monomial {
    fn max_order(&self) -> u32 {
        self.factors.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    /// Total derivative weight Σ d_k·m_k (the power of ħ̄ the monomial
    /// carries through the D-operators).
    pub fn derivative_weight(&self) -> u32 {
        self.factors.iter().map(|&(d, m)| d * m).sum()
    }
}

/// A polynomial functional in `(x, p, Dp, …, Dⁿp)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyFunctional {
    pub terms: Vec<Monomial>,
}

impl PolyFunctional {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    /// Parse the compact text form, e.g. `"2.0 * p^2 + 1.0 * D1p^2"`.
    ///
    /// Grammar: `+`-separated terms; each term is a coefficient followed
    /// by `*`-separated tokens `x`, `p` or `D<k>p`, each with an
    /// optional `^<power>`.
    pub fn parse(text: &str) -> Result<Self> {
        parse_functional(text)
    }

    /// Order classification: `1 + max derivative order`; order 1 means
    /// classical (local in p).
    pub fn classify_order(&self) -> u32 {
        1 + self.terms.iter().map(Monomial::max_order).max().unwrap_or(0)
    }

    fn max_order(&self) -> u32 {
        self.terms.iter().map(Monomial::max_order).max().unwrap_or(0)
    }

    /// Split into (classical terms, derivative-bearing terms).
    pub fn split_classical(&self) -> (PolyFunctional, PolyFunctional) {
        let (cl, dv): (Vec<Monomial>, Vec<Monomial>) =
            self.terms.iter().cloned().partition(|t| t.derivative_weight() == 0);
        (PolyFunctional::new(cl), PolyFunctional::new(dv))
    }

    /// Pointwise integrand `F(x, p, Dp, …)` given the derivative stack
    /// `ys[d][i] = (D^d p)(x_i)`.
    fn integrand_at(&self, x: f64, ys: &[Vec<f64>], i: usize) -> f64 {
        let mut acc = 0.0;
        for term in &self.terms {
            let mut val = term.coeff * x.powi(term.x_power as i32);
            for &(d, m) in &term.factors {
                val *= ys[d as usize][i].powi(m as i32);
            }
            acc += val;
        }
        acc
    }

    /// ∂F/∂(D^d p) pointwise.
    fn partial_at(&self, x: f64, ys: &[Vec<f64>], i: usize, order: u32) -> f64 {
        let mut acc = 0.0;
        for term in &self.terms {
            for (fi, &(d, m)) in term.factors.iter().enumerate() {
                if d != order {
                    continue;
                }
                let mut val = term.coeff * x.powi(term.x_power as i32) * m as f64;
                val *= ys[d as usize][i].powi(m as i32 - 1);
                for (fj, &(d2, m2)) in term.factors.iter().enumerate() {
                    if fj != fi {
                        val *= ys[d2 as usize][i].powi(m2 as i32);
                    }
                }
                acc += val;
            }
        }
        acc
    }
}

/// Derivative stack `ys[d] = D^d p = ħ̄^d ∂^d p` up to `max_order`.
fn derivative_stack(p: &[f64], grid: &PeriodicGrid1, hbar: f64, max_order: u32) -> Vec<Vec<f64>> {
    let mut ys = Vec::with_capacity(max_order as usize + 1);
    ys.push(p.to_vec());
    for _ in 0..max_order {
        let prev = ys.last().unwrap();
        let mut d = spectral::derivative(prev, grid.length);
        for v in d.iter_mut() {
            *v *= hbar;
        }
        ys.push(d);
    }
    ys
}

/// Evaluate `∫ ρ F(x, p, Dp, …) dx` for explicit `ρ` and `p` fields.
pub fn evaluate_fields(
    f: &PolyFunctional,
    rho: &[f64],
    p: &[f64],
    grid: &PeriodicGrid1,
    hbar: f64,
) -> Result<f64> {
    grid.check_len(rho)?;
    grid.check_len(p)?;
    let ys = derivative_stack(p, grid, hbar, f.max_order());
    let total: f64 = (0..grid.n).map(|i| rho[i] * f.integrand_at(grid.point(i), &ys, i)).sum();
    Ok(total * grid.dx())
}

/// A weighted ensemble of phase sections on a shared grid: the finite
/// discretization of a measure over sections, each member carrying its
/// own `S` and emergence-density `ρ`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub grid: PeriodicGrid1,
    members: Vec<EnsembleMember>,
}

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub weight: f64,
    pub s: Vec<f64>,
    pub rho: Vec<f64>,
}

impl Ensemble {
    /// Weights are normalized to sum to one; densities must be
    /// nonnegative.
    pub fn new(grid: PeriodicGrid1, members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("ensemble needs at least one member".into()));
        }
        let wsum: f64 = members.iter().map(|m| m.weight).sum();
        if !(wsum > 0.0) {
            return Err(Error::InvalidInput("ensemble weights must have positive sum".into()));
        }
        let mut normalized = Vec::with_capacity(members.len());
        for m in members {
            grid.check_len(&m.s)?;
            grid.check_len(&m.rho)?;
            if m.weight < 0.0 {
                return Err(Error::InvalidInput("ensemble weights must be nonnegative".into()));
            }
            if m.rho.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidInput("member densities must be nonnegative".into()));
            }
            normalized.push(EnsembleMember { weight: m.weight / wsum, ..m });
        }
        Ok(Self { grid, members: normalized })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    /// Momentum field `ħ̄ ∂S/∂x` of one member.
    pub fn member_momentum(&self, idx: usize, hbar: f64) -> Vec<f64> {
        let mut p = grid::quasi_periodic_gradient(&self.members[idx].s, &self.grid);
        for v in p.iter_mut() {
            *v *= hbar;
        }
        p
    }

    /// Normalization `𝓘 = Σ_e w_e ∫ρ_e dx`.
    pub fn normalization(&self) -> f64 {
        self.members.iter().map(|m| m.weight * self.grid.integrate(&m.rho)).sum()
    }
}

/// Ensemble expectation `Σ_e w_e ∫ ρ_e F(x, p_e, Dp_e, …) dx` with
/// `p_e = ħ̄ ∂S_e/∂x`.
pub fn evaluate(f: &PolyFunctional, j: &Ensemble, hbar: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (idx, m) in j.members.iter().enumerate() {
        let p = j.member_momentum(idx, hbar);
        acc += m.weight * evaluate_fields(f, &m.rho, &p, &j.grid, hbar)?;
    }
    Ok(acc)
}

/// Density-weighted variational derivative `𝒟_ρF` on the grid.
///
/// Fails if ρ ≤ 0 everywhere; isolated zeros of ρ are masked to 0.
pub fn variational_derivative(
    f: &PolyFunctional,
    rho: &[f64],
    p: &[f64],
    grid: &PeriodicGrid1,
    hbar: f64,
) -> Result<Vec<f64>> {
    grid.check_len(rho)?;
    grid.check_len(p)?;
    if rho.iter().all(|&r| r <= 0.0) {
        return Err(Error::InvalidInput("density vanishes everywhere".into()));
    }
    let max_order = f.max_order();
    let ys = derivative_stack(p, grid, hbar, max_order);
    let n = grid.n;
    let mut total = vec![0.0; n];
    for d in 0..=max_order {
        // W_d = ρ · ħ̄^d · ∂F/∂(D^d p); contribute (−1)^d ∂^d W_d.
        let hpow = hbar.powi(d as i32);
        let mut w: Vec<f64> =
            (0..n).map(|i| rho[i] * hpow * f.partial_at(grid.point(i), &ys, i, d)).collect();
        for _ in 0..d {
            w = spectral::derivative(&w, grid.length);
        }
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..n {
            total[i] += sign * w[i];
        }
    }
    Ok((0..n).map(|i| if rho[i] > 0.0 { total[i] / rho[i] } else { 0.0 }).collect())
}

/// The operator pair `F̂ = (X, U)` with `X = 𝒟_ρF` and
/// `U = −p·𝒟_ρF + F(x, p, …)` for one ensemble member.
pub fn hat_operator(
    f: &PolyFunctional,
    rho: &[f64],
    p: &[f64],
    grid: &PeriodicGrid1,
    hbar: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x_field = variational_derivative(f, rho, p, grid, hbar)?;
    let ys = derivative_stack(p, grid, hbar, f.max_order());
    let u_field: Vec<f64> = (0..grid.n)
        .map(|i| -p[i] * x_field[i] + f.integrand_at(grid.point(i), &ys, i))
        .collect();
    Ok((x_field, u_field))
}

/// `|𝓕(𝒥) − ⟨𝒥, F̂⟩|` with
/// `⟨𝒥, F̂⟩ = Σ_e w_e ∫ (ρ p·X + ρ U) dx`. Holds structurally; a
/// nonzero residual beyond round-off indicates a wiring bug.
pub fn null_lagrangian_residual(f: &PolyFunctional, j: &Ensemble, hbar: f64) -> Result<f64> {
    let direct = evaluate(f, j, hbar)?;
    let mut paired = 0.0;
    for (idx, m) in j.members.iter().enumerate() {
        let p = j.member_momentum(idx, hbar);
        let (x_field, u_field) = hat_operator(f, &m.rho, &p, &j.grid, hbar)?;
        let integral: f64 = (0..j.grid.n)
            .map(|i| m.rho[i] * (p[i] * x_field[i] + u_field[i]))
            .sum::<f64>()
            * j.grid.dx();
        paired += m.weight * integral;
    }
    Ok((direct - paired).abs())
}

/// One sample of the classical-limit scaling study.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSample {
    pub hbar: f64,
    /// Value of the derivative-free terms (ħ̄-independent at fixed p).
    pub classical_part: f64,
    /// Value of the derivative-bearing terms; a monomial of total
    /// derivative weight w scales as ħ̄^w.
    pub derivative_part: f64,
}

/// Evaluate the classical and derivative parts of `F` at each ħ̄ in
/// `hbars`, holding the momentum field fixed (computed once at
/// `hbars[0]`, the classical-limit convention of varying ħ̄ at fixed
/// |p|). Only the D-operator weights vary across the list.
pub fn classical_limit_scaling(
    f: &PolyFunctional,
    j: &Ensemble,
    hbars: &[f64],
) -> Result<Vec<ScalingSample>> {
    if hbars.is_empty() {
        return Err(Error::InvalidInput("need at least one hbar value".into()));
    }
    let (classical, derivative) = f.split_classical();
    let p_fields: Vec<Vec<f64>> =
        (0..j.members.len()).map(|idx| j.member_momentum(idx, hbars[0])).collect();
    let mut out = Vec::with_capacity(hbars.len());
    for &hb in hbars {
        let mut classical_part = 0.0;
        let mut derivative_part = 0.0;
        for (idx, m) in j.members.iter().enumerate() {
            classical_part +=
                m.weight * evaluate_fields(&classical, &m.rho, &p_fields[idx], &j.grid, hb)?;
            derivative_part +=
                m.weight * evaluate_fields(&derivative, &m.rho, &p_fields[idx], &j.grid, hb)?;
        }
        out.push(ScalingSample { hbar: hb, classical_part, derivative_part });
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Text form parser
// ---------------------------------------------------------------------

fn parse_functional(text: &str) -> Result<PolyFunctional> {
    let mut terms = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0usize;
    skip_ws(&chars, &mut pos);
    if pos == chars.len() {
        return Err(Error::Parse("empty functional".into()));
    }
    loop {
        terms.push(parse_term(&chars, &mut pos)?);
        skip_ws(&chars, &mut pos);
        if pos == chars.len() {
            break;
        }
        if chars[pos] != '+' {
            return Err(Error::Parse(format!(
                "expected '+' between terms at position {pos}, found '{}'",
                chars[pos]
            )));
        }
        pos += 1;
    }
    Ok(PolyFunctional::new(terms))
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_term(chars: &[char], pos: &mut usize) -> Result<Monomial> {
    skip_ws(chars, pos);
    let coeff = parse_number(chars, pos)?;
    let mut x_power = 0u32;
    let mut factors: Vec<(u32, u32)> = Vec::new();
    loop {
        skip_ws(chars, pos);
        if *pos >= chars.len() || chars[*pos] != '*' {
            break;
        }
        *pos += 1;
        skip_ws(chars, pos);
        if *pos >= chars.len() {
            return Err(Error::Parse("dangling '*' at end of term".into()));
        }
        let (order, is_x) = parse_symbol(chars, pos)?;
        let power = if *pos < chars.len() && chars[*pos] == '^' {
            *pos += 1;
            parse_uint(chars, pos)?
        } else {
            1
        };
        if power == 0 {
            return Err(Error::Parse("zero powers are not allowed".into()));
        }
        if is_x {
            x_power += power;
        } else {
            factors.push((order, power));
        }
    }
    Ok(Monomial { coeff, x_power, factors })
}

/// `x`, `p`, or `D<k>p`; returns (derivative order, is_x).
fn parse_symbol(chars: &[char], pos: &mut usize) -> Result<(u32, bool)> {
    match chars[*pos] {
        'x' => {
            *pos += 1;
            Ok((0, true))
        }
        'p' => {
            *pos += 1;
            Ok((0, false))
        }
        'D' => {
            *pos += 1;
            let order = parse_uint(chars, pos)?;
            if *pos >= chars.len() || chars[*pos] != 'p' {
                return Err(Error::Parse(format!("expected 'p' after D{order}")));
            }
            *pos += 1;
            Ok((order, false))
        }
        other => Err(Error::Parse(format!("unexpected symbol '{other}' at position {pos}"))),
    }
}

fn parse_uint(chars: &[char], pos: &mut usize) -> Result<u32> {
    let start = *pos;
    while *pos < chars.len() && chars[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse(format!("expected an integer at position {start}")));
    }
    chars[start..*pos]
        .iter()
        .collect::<String>()
        .parse()
        .map_err(|e| Error::Parse(format!("bad integer: {e}")))
}

fn parse_number(chars: &[char], pos: &mut usize) -> Result<f64> {
    let start = *pos;
    if *pos < chars.len() && (chars[*pos] == '+' || chars[*pos] == '-') {
        *pos += 1;
    }
    while *pos < chars.len() && (chars[*pos].is_ascii_digit() || chars[*pos] == '.') {
        *pos += 1;
    }
    if *pos < chars.len() && (chars[*pos] == 'e' || chars[*pos] == 'E') {
        *pos += 1;
        if *pos < chars.len() && (chars[*pos] == '+' || chars[*pos] == '-') {
            *pos += 1;
        }
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
    }
    if start == *pos {
        return Err(Error::Parse(format!("expected a coefficient at position {start}")));
    }
    chars[start..*pos]
        .iter()
        .collect::<String>()
        .parse()
        .map_err(|e| Error::Parse(format!("bad coefficient: {e}")))
}
