//! Exact-rational linear programming in equality form, Gomory cuts, slack
//! elimination, and a cutting-plane feasibility and optimization loop.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Sort;
use crate::rational::{fmt_q, frac, lcm_denominators, parse_q, serde_q, to_decimal, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilpError {
    #[error("a pure fractional cut was requested from a row with real-sorted variables")]
    MixedRow,
    #[error("slack {slack} has negative coefficient {coeff} after weakening")]
    NegativeSlack { slack: usize, coeff: String },
    #[error("combination has {got} entries but the tableau has {rows} rows ({constraints} constraints)")]
    Dimension { got: usize, rows: usize, constraints: usize },
    #[error("LP format: {0}")]
    LpFormat(String),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// A bounded decision variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort, lo: Q, hi: Q) -> Self {
        Var { name: name.into(), sort, lo, hi }
    }
}

/// `coeffs · x + constant >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "serde_q::vec")]
    pub coeffs: Vec<Q>,
    #[serde(with = "serde_q")]
    pub constant: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, constant: Q) -> Self {
        Constraint { coeffs, constant }
    }

    pub fn value(&self, x: &[Q]) -> Q {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).fold(self.constant.clone(), |s, t| s + t)
    }

    pub fn holds(&self, x: &[Q]) -> bool {
        !self.value(x).is_negative()
    }

    /// Renders over the given variable names.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (a, n) in self.coeffs.iter().zip(names) {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() {
                out.push_str(&fmt_q(&mag));
                out.push('*');
            }
            out.push_str(n);
        }
        if out.is_empty() {
            out = fmt_q(&self.constant);
        } else if !self.constant.is_zero() {
            out.push_str(if self.constant.is_negative() { " - " } else { " + " });
            out.push_str(&fmt_q(&self.constant.abs()));
        }
        out
    }
}

/// Bounded variables and `>= 0` constraints.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MilpProblem {
    pub vars: Vec<Var>,
    pub constraints: Vec<Constraint>,
}

impl MilpProblem {
    pub fn new(vars: Vec<Var>, constraints: Vec<Constraint>) -> Result<Self, MilpError> {
        let p = MilpProblem { vars, constraints };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        for v in &self.vars {
            if v.lo > v.hi {
                return Err(MilpError::Invalid(format!("empty bounds for `{}`", v.name)));
            }
        }
        for c in &self.constraints {
            if c.coeffs.len() != self.vars.len() {
                return Err(MilpError::Invalid("constraint dimension mismatch".into()));
            }
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    /// Bounds, sorts and constraints all hold at `x`.
    pub fn is_feasible_point(&self, x: &[Q]) -> bool {
        x.len() == self.vars.len()
            && self.vars.iter().zip(x).all(|(v, xv)| {
                &v.lo <= xv && xv <= &v.hi && (v.sort == Sort::Real || xv.is_integer())
            })
            && self.constraints.iter().all(|c| c.holds(x))
    }
}

// ---------------------------------------------------------------------------
// Equality form
// ---------------------------------------------------------------------------

/// Where a tableau row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowOrigin {
    Constraint(usize),
    Upper(usize),
}

/// Equality form over shifted variables `y = x - lo >= 0`. Row `i` reads
/// `s_i = a_i · y + b_i` with `s_i >= 0`. Rows whose variables are all
/// integer-sorted are scaled by the least common multiple of their
/// denominators, which makes their slack integer-valued.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    pub n_struct: usize,
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub origin: Vec<RowOrigin>,
    pub scale: Vec<Q>,
    pub struct_sorts: Vec<Sort>,
    pub slack_sorts: Vec<Sort>,
    pub shift: Vec<Q>,
    pub n_constraints: usize,
}

impl Tableau {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    /// `λ` padded to the full row count; shorter vectors cover only the
    /// constraint rows.
    pub fn expand_lambda(&self, lambda: &[Q]) -> Result<Vec<Q>, MilpError> {
        if lambda.len() == self.rows() {
            return Ok(lambda.to_vec());
        }
        if lambda.len() == self.n_constraints {
            let mut l = lambda.to_vec();
            l.resize(self.rows(), Q::zero());
            return Ok(l);
        }
        Err(MilpError::Dimension {
            got: lambda.len(),
            rows: self.rows(),
            constraints: self.n_constraints,
        })
    }
}

pub fn to_equality_form(p: &MilpProblem) -> Tableau {
    let n = p.vars.len();
    let shift: Vec<Q> = p.vars.iter().map(|v| v.lo.clone()).collect();
    let struct_sorts: Vec<Sort> = p.vars.iter().map(|v| v.sort).collect();
    let mut t = Tableau {
        n_struct: n,
        a: Vec::new(),
        b: Vec::new(),
        origin: Vec::new(),
        scale: Vec::new(),
        struct_sorts: struct_sorts.clone(),
        slack_sorts: Vec::new(),
        shift: shift.clone(),
        n_constraints: p.constraints.len(),
    };
    let mut push_row = |coeffs: Vec<Q>, constant: Q, origin: RowOrigin| {
        let b: Q = coeffs.iter().zip(&shift).map(|(a, l)| a * l).fold(constant, |s, x| s + x);
        let all_int = coeffs
            .iter()
            .zip(&struct_sorts)
            .all(|(a, s)| a.is_zero() || *s == Sort::Integer);
        let (scale, sort) = if all_int {
            let l = lcm_denominators(coeffs.iter().chain(std::iter::once(&b)));
            (Q::from_integer(l), Sort::Integer)
        } else {
            (Q::one(), Sort::Real)
        };
        t.a.push(coeffs.iter().map(|c| c * &scale).collect());
        t.b.push(b * &scale);
        t.origin.push(origin);
        t.scale.push(scale);
        t.slack_sorts.push(sort);
    };
    for (i, c) in p.constraints.iter().enumerate() {
        push_row(c.coeffs.clone(), c.constant.clone(), RowOrigin::Constraint(i));
    }
    for (k, v) in p.vars.iter().enumerate() {
        let mut coeffs = vec![Q::zero(); n];
        coeffs[k] = -Q::one();
        push_row(coeffs, v.hi.clone(), RowOrigin::Upper(k));
    }
    t
}

// ---------------------------------------------------------------------------
// Simplex
// ---------------------------------------------------------------------------

/// Infeasibility certificate in original coordinates: `mu` weights the
/// constraints then the upper bounds `hi - x >= 0`; `nu` weights the lower
/// bounds `x - lo >= 0`. The weighted sum has zero coefficients and a
/// negative constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Farkas {
    #[serde(with = "serde_q::vec")]
    pub mu: Vec<Q>,
    #[serde(with = "serde_q::vec")]
    pub nu: Vec<Q>,
}

impl Farkas {
    /// The constant of the combination if it is a valid contradiction.
    pub fn check(&self, p: &MilpProblem) -> Option<Q> {
        let n = p.vars.len();
        let m = p.constraints.len();
        if self.mu.len() != m + n || self.nu.len() != n {
            return None;
        }
        if self.mu.iter().chain(&self.nu).any(|v| v.is_negative()) {
            return None;
        }
        let mut coeffs = vec![Q::zero(); n];
        let mut constant = Q::zero();
        for (c, w) in p.constraints.iter().zip(&self.mu) {
            for (k, a) in c.coeffs.iter().enumerate() {
                coeffs[k] += w * a;
            }
            constant += w * &c.constant;
        }
        for (k, v) in p.vars.iter().enumerate() {
            let u = &self.mu[m + k];
            coeffs[k] -= u;
            constant += u * &v.hi;
            let l = &self.nu[k];
            coeffs[k] += l;
            constant -= l * &v.lo;
        }
        (coeffs.iter().all(Q::is_zero) && constant.is_negative()).then_some(constant)
    }
}

/// An optimal basic solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    /// Values of the original variables.
    pub x: Vec<Q>,
    pub objective: Q,
    /// For each tableau position, the basic column (structural `k` or
    /// slack `n + i`) and the row combination `λ` that produced that row.
    pub rows: Vec<(usize, Vec<Q>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible(Farkas),
    Unbounded,
}

struct Simplex {
    t: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    init_basis: Vec<usize>,
    flip: Vec<bool>,
}

impl Simplex {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let prow = self.t[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.t.len() {
            if i == r {
                continue;
            }
            let f = self.t[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.t[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · v` from the current basis with Bland's rule.
    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[Q], allow: usize) -> bool {
        loop {
            let m = self.t.len();
            let mut entering = None;
            for j in 0..allow {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for r in 0..m {
                    let cb = &cost[self.basis[r]];
                    if !cb.is_zero() && !self.t[r][j].is_zero() {
                        d -= cb * &self.t[r][j];
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for r in 0..m {
                if self.t[r][j].is_positive() {
                    let ratio = &self.rhs[r] / &self.t[r][j];
                    let better = match &leave {
                        None => true,
                        Some((lr, lv)) => ratio < *lv || (ratio == *lv && self.basis[r] < self.basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, j),
            }
        }
    }

    /// `(B⁻¹)_{r,i}` with the initial row sign flips undone, so that row `r`
    /// equals `Σ_i λ_i · (original row i)`.
    fn lambda(&self, r: usize) -> Vec<Q> {
        self.init_basis
            .iter()
            .zip(&self.flip)
            .map(|(&c, &f)| if f { -self.t[r][c].clone() } else { self.t[r][c].clone() })
            .collect()
    }
}

/// Maximizes `objective · x` (original coordinates) over the LP relaxation.
pub fn simplex_solve(t: &Tableau, objective: &[Q]) -> LpOutcome {
    let n = t.n_struct;
    let m = t.rows();
    let flip: Vec<bool> = t.b.iter().map(|b| b.is_negative()).collect();
    let n_art = flip.iter().filter(|f| **f).count();
    let ncols = n + m + n_art;
    let art_start = n + m;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = art_start;
    for i in 0..m {
        // -a_i · y + s_i = b_i
        let mut row = vec![Q::zero(); ncols];
        for k in 0..n {
            row[k] = -t.a[i][k].clone();
        }
        row[n + i] = Q::one();
        let mut r = t.b[i].clone();
        if flip[i] {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            r = -r;
            row[art] = Q::one();
            basis.push(art);
            art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
        rhs.push(r);
    }
    let mut sx = Simplex {
        t: rows,
        rhs,
        init_basis: basis.clone(),
        basis,
        flip,
    };
    if n_art > 0 {
        let mut cost = vec![Q::zero(); ncols];
        for c in cost.iter_mut().skip(art_start) {
            *c = Q::one();
        }
        sx.optimize(&cost, ncols);
        let w: Q = (0..m)
            .filter(|&r| sx.basis[r] >= art_start)
            .map(|r| sx.rhs[r].clone())
            .fold(Q::zero(), |a, b| a + b);
        if w.is_positive() {
            // Phase-1 duals: π_i = Σ_r c_B(r) (B⁻¹)_{r,i}; μ = -D π.
            let mut pi = vec![Q::zero(); m];
            for r in 0..m {
                if sx.basis[r] >= art_start {
                    for (i, &c) in sx.init_basis.iter().enumerate() {
                        pi[i] += &sx.t[r][c];
                    }
                }
            }
            let mu_rows: Vec<Q> = pi
                .iter()
                .zip(&sx.flip)
                .map(|(p, &f)| if f { p.clone() } else { -p.clone() })
                .collect();
            return LpOutcome::Infeasible(farkas_from_rows(t, &mu_rows));
        }
        for r in 0..m {
            if sx.basis[r] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| !sx.t[r][j].is_zero()) {
                    sx.pivot(r, j);
                }
            }
        }
    }
    let mut cost = vec![Q::zero(); ncols];
    for k in 0..n {
        cost[k] = -objective.get(k).cloned().unwrap_or_else(Q::zero);
    }
    if !sx.optimize(&cost, art_start) {
        return LpOutcome::Unbounded;
    }
    let mut y = vec![Q::zero(); n];
    for r in 0..m {
        if sx.basis[r] < n {
            y[sx.basis[r]] = sx.rhs[r].clone();
        }
    }
    let x: Vec<Q> = y.iter().zip(&t.shift).map(|(a, b)| a + b).collect();
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).fold(Q::zero(), |a, b| a + b);
    let rows = (0..m)
        .filter(|&r| sx.basis[r] < art_start)
        .map(|r| (sx.basis[r], sx.lambda(r)))
        .collect();
    LpOutcome::Optimal(LpSolution { x, objective: value, rows })
}

/// Converts row multipliers over tableau rows into an original-coordinate
/// Farkas certificate.
fn farkas_from_rows(t: &Tableau, mu_rows: &[Q]) -> Farkas {
    let n = t.n_struct;
    let mut mu = vec![Q::zero(); t.n_constraints + n];
    let mut comb = vec![Q::zero(); n];
    for (i, w) in mu_rows.iter().enumerate() {
        let w_orig = w * &t.scale[i];
        match t.origin[i] {
            RowOrigin::Constraint(c) => mu[c] = w_orig,
            RowOrigin::Upper(k) => mu[t.n_constraints + k] = w_orig,
        }
        for k in 0..n {
            comb[k] += w * &t.a[i][k];
        }
    }
    let nu = comb.into_iter().map(|c| (-c).max(Q::zero())).collect();
    Farkas { mu, nu }
}

// ---------------------------------------------------------------------------
// Gomory cuts
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    Fractional,
    MixedInteger,
}

/// `y_coeffs · y + s_coeffs · s + constant >= 0` over the tableau variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutInequality {
    pub y_coeffs: Vec<Q>,
    pub s_coeffs: Vec<Q>,
    pub constant: Q,
    pub kind: CutKind,
    pub lambda: Vec<Q>,
}

/// The combined row `Σ α_j v_j = β` over `(y, s)` for multipliers `λ`.
pub fn combined_row(t: &Tableau, lambda: &[Q]) -> Result<(Vec<Q>, Vec<Q>, Q), MilpError> {
    let l = t.expand_lambda(lambda)?;
    let n = t.n_struct;
    let mut ay = vec![Q::zero(); n];
    let mut beta = Q::zero();
    for (i, w) in l.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for k in 0..n {
            if !t.a[i][k].is_zero() {
                ay[k] -= w * &t.a[i][k];
            }
        }
        beta += w * &t.b[i];
    }
    Ok((ay, l, beta))
}

/// Gomory cut from the combination `λ` of tableau rows: the fractional cut
/// when every variable in the row is integer-sorted, otherwise the mixed
/// integer cut. `None` when the right-hand side is integral.
pub fn gomory_cut(t: &Tableau, lambda: &[Q]) -> Result<Option<CutInequality>, MilpError> {
    let (ay, as_, beta) = combined_row(t, lambda)?;
    let f0 = frac(&beta);
    if f0.is_zero() {
        return Ok(None);
    }
    let mixed = ay.iter().zip(&t.struct_sorts).any(|(a, s)| !a.is_zero() && *s == Sort::Real)
        || as_.iter().zip(&t.slack_sorts).any(|(a, s)| !a.is_zero() && *s == Sort::Real);
    if !mixed {
        return Ok(Some(CutInequality {
            y_coeffs: ay.iter().map(frac).collect(),
            s_coeffs: as_.iter().map(frac).collect(),
            constant: -f0,
            kind: CutKind::Fractional,
            lambda: as_,
        }));
    }
    let one_minus = Q::one() - &f0;
    let gmi = |a: &Q, sort: Sort| -> Q {
        match sort {
            Sort::Integer => {
                let fj = frac(a);
                if fj <= f0 {
                    fj / &f0
                } else {
                    (Q::one() - fj) / &one_minus
                }
            }
            Sort::Real => {
                if a.is_negative() {
                    -a / &one_minus
                } else {
                    a / &f0
                }
            }
        }
    };
    Ok(Some(CutInequality {
        y_coeffs: ay.iter().zip(&t.struct_sorts).map(|(a, s)| gmi(a, *s)).collect(),
        s_coeffs: as_.iter().zip(&t.slack_sorts).map(|(a, s)| gmi(a, *s)).collect(),
        constant: -Q::one(),
        kind: CutKind::MixedInteger,
        lambda: as_,
    }))
}

/// Fractional cut only; rows with real-sorted variables are an error.
pub fn gomory_cut_pure(t: &Tableau, lambda: &[Q]) -> Result<Option<CutInequality>, MilpError> {
    match gomory_cut(t, lambda)? {
        Some(c) if c.kind == CutKind::MixedInteger => Err(MilpError::MixedRow),
        other => Ok(other),
    }
}

/// Replaces every slack by its defining expression after adding the
/// weakening `w` to its coefficient. The result is over original `x`.
pub fn eliminate_slacks(c: &CutInequality, t: &Tableau, w: &[Q]) -> Result<Constraint, MilpError> {
    let n = t.n_struct;
    let mut y = c.y_coeffs.clone();
    let mut constant = c.constant.clone();
    for (i, g) in c.s_coeffs.iter().enumerate() {
        let coeff = g + w.get(i).cloned().unwrap_or_else(Q::zero);
        if coeff.is_negative() {
            return Err(MilpError::NegativeSlack { slack: i, coeff: fmt_q(&coeff) });
        }
        if coeff.is_zero() {
            continue;
        }
        for k in 0..n {
            if !t.a[i][k].is_zero() {
                y[k] += &coeff * &t.a[i][k];
            }
        }
        constant += &coeff * &t.b[i];
    }
    // y = x - shift
    for k in 0..n {
        constant -= &y[k] * &t.shift[k];
    }
    Ok(Constraint::new(y, constant))
}

/// Chvátal-Gomory strengthening of a cut over integer variables: scale to
/// coprime integer coefficients and round the constant down. Cuts touching
/// real-sorted variables are returned unchanged.
pub fn round_cut(c: &Constraint, sorts: &[Sort]) -> Constraint {
    let pure = c.coeffs.iter().zip(sorts).all(|(a, s)| a.is_zero() || *s == Sort::Integer);
    if !pure || c.coeffs.iter().all(Q::is_zero) {
        return c.clone();
    }
    let l = Q::from_integer(lcm_denominators(c.coeffs.iter()));
    let ints: Vec<BigInt> = c.coeffs.iter().map(|a| (a * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let g = Q::from_integer(g);
    let scale = &l / &g;
    Constraint::new(
        c.coeffs.iter().map(|a| a * &scale).collect(),
        (&c.constant * &scale).floor(),
    )
}

/// Cut derived from `λ`, slack-eliminated with weakening `w`, then rounded.
pub fn derive_cut(p: &MilpProblem, t: &Tableau, lambda: &[Q], w: &[Q]) -> Result<Option<(Constraint, CutKind)>, MilpError> {
    let Some(cut) = gomory_cut(t, lambda)? else { return Ok(None) };
    let kind = cut.kind;
    let c = eliminate_slacks(&cut, t, w)?;
    let sorts: Vec<Sort> = p.vars.iter().map(|v| v.sort).collect();
    Ok(Some((round_cut(&c, &sorts), kind)))
}

// ---------------------------------------------------------------------------
// Cutting-plane loop
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutSource {
    /// Tableau row of the current optimum, by basic column.
    TableauRow(usize),
    /// Breadth-first combination search.
    Enumerated,
}

/// One added cut: the multipliers over the rows of the tableau of the
/// problem at that point (constraints, earlier cuts, then upper bounds).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutStep {
    pub source: CutSource,
    #[serde(with = "serde_q::vec")]
    pub lambda: Vec<Q>,
    pub cut: Constraint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilpCertificate {
    pub cuts: Vec<CutStep>,
    /// Over the constraints plus all cuts, then upper bounds.
    pub farkas: Farkas,
}

impl MilpCertificate {
    /// Replays every cut from its multipliers and checks the contradiction.
    pub fn verify(&self, p: &MilpProblem) -> bool {
        let mut cur = p.clone();
        for step in &self.cuts {
            let t = to_equality_form(&cur);
            match derive_cut(&cur, &t, &step.lambda, &[]) {
                Ok(Some((c, _))) if c == step.cut => cur.constraints.push(c),
                _ => return false,
            }
        }
        self.farkas.check(&cur).is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Feasible(Vec<Q>),
    Infeasible(MilpCertificate),
    BudgetExhausted,
}

/// Candidate cuts from the fractional integer-sorted basic rows of an
/// optimum, most fractional right-hand side first.
fn row_cut_candidates(p: &MilpProblem, t: &Tableau, sol: &LpSolution) -> Vec<(usize, Vec<Q>)> {
    let n = t.n_struct;
    let mut cands: Vec<(Q, usize, Vec<Q>)> = Vec::new();
    for (col, lambda) in &sol.rows {
        let sort = if *col < n { p.vars[*col].sort } else { t.slack_sorts[col - n] };
        if sort != Sort::Integer {
            continue;
        }
        let beta = combined_row(t, lambda).map(|r| r.2).unwrap_or_else(|_| Q::zero());
        let f = frac(&beta);
        if !f.is_zero() {
            cands.push((f, *col, lambda.clone()));
        }
    }
    cands.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    cands.into_iter().map(|(_, c, l)| (c, l)).collect()
}

/// A cut violated by the optimum `sol`: tableau rows first, then the
/// bounded combination search.
pub fn separating_cut(p: &MilpProblem, t: &Tableau, sol: &LpSolution) -> Option<CutStep> {
    for (col, lambda) in row_cut_candidates(p, t, sol) {
        if let Ok(Some((cut, _))) = derive_cut(p, t, &lambda, &[]) {
            if !cut.holds(&sol.x) {
                return Some(CutStep { source: CutSource::TableauRow(col), lambda, cut });
            }
        }
    }
    enumerate_cut(p, t, &sol.x)
}

/// Breadth-first search over nonnegative multipliers `k/d` with growing
/// numerator and denominator bounds, stopping at the first cut that
/// separates `x`.
fn enumerate_cut(p: &MilpProblem, t: &Tableau, x: &[Q]) -> Option<CutStep> {
    let rows = t.rows();
    const MAX_BOUND: i64 = 3;
    const MAX_SUPPORT: usize = 2;
    for bound in 1..=MAX_BOUND {
        for support in 1..=MAX_SUPPORT.min(rows) {
            let mut idx: Vec<usize> = (0..support).collect();
            loop {
                for den in 2..=bound.max(2) {
                    let mut nums = vec![1i64; support];
                    loop {
                        let mut lambda = vec![Q::zero(); rows];
                        for (j, &r) in idx.iter().enumerate() {
                            lambda[r] = Q::new(BigInt::from(nums[j]), BigInt::from(den));
                        }
                        if let Ok(Some((cut, _))) = derive_cut(p, t, &lambda, &[]) {
                            if !cut.holds(x) {
                                return Some(CutStep { source: CutSource::Enumerated, lambda, cut });
                            }
                        }
                        let mut k = 0;
                        while k < support {
                            nums[k] += 1;
                            if nums[k] <= bound * den {
                                break;
                            }
                            nums[k] = 1;
                            k += 1;
                        }
                        if k == support {
                            break;
                        }
                    }
                }
                // next combination of row indices
                let mut k = support;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    if idx[k] < rows - support + k {
                        idx[k] += 1;
                        for j in k + 1..support {
                            idx[j] = idx[j - 1] + 1;
                        }
                        k = usize::MAX;
                        break;
                    }
                }
                if k != usize::MAX {
                    break;
                }
            }
        }
    }
    None
}

/// Decides integer feasibility by repeated Gomory cuts; `budget` bounds the
/// number of cuts added.
pub fn milp_decide(p: &MilpProblem, budget: usize) -> Decision {
    milp_decide_traced(p, budget).0
}

/// As `milp_decide`, also returning every cut added, whatever the outcome.
pub fn milp_decide_traced(p: &MilpProblem, budget: usize) -> (Decision, Vec<CutStep>) {
    let zero = vec![Q::zero(); p.vars.len()];
    let mut cur = p.clone();
    let mut cuts: Vec<CutStep> = Vec::new();
    loop {
        let t = to_equality_form(&cur);
        match simplex_solve(&t, &zero) {
            LpOutcome::Infeasible(farkas) => {
                let cert = MilpCertificate { cuts: cuts.clone(), farkas };
                return (Decision::Infeasible(cert), cuts);
            }
            LpOutcome::Unbounded => unreachable!("bounded variables"),
            LpOutcome::Optimal(sol) => {
                if cur.is_feasible_point(&sol.x) {
                    return (Decision::Feasible(sol.x), cuts);
                }
                if cuts.len() >= budget {
                    return (Decision::BudgetExhausted, cuts);
                }
                match separating_cut(&cur, &t, &sol) {
                    Some(step) => {
                        cur.constraints.push(step.cut.clone());
                        cuts.push(step);
                    }
                    None => return (Decision::BudgetExhausted, cuts),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Optimization {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    /// Budget ran out; `upper` bounds the optimum from above.
    Bounds { upper: Q },
}

/// Maximizes `objective · x` over the integer points by cutting planes.
pub fn milp_optimize(p: &MilpProblem, objective: &[Q], budget: usize) -> Optimization {
    milp_optimize_traced(p, objective, budget).0
}

/// As `milp_optimize`, also returning every cut added.
pub fn milp_optimize_traced(p: &MilpProblem, objective: &[Q], budget: usize) -> (Optimization, Vec<CutStep>) {
    let mut cur = p.clone();
    let mut cuts: Vec<CutStep> = Vec::new();
    loop {
        let t = to_equality_form(&cur);
        match simplex_solve(&t, objective) {
            LpOutcome::Infeasible(_) => return (Optimization::Infeasible, cuts),
            LpOutcome::Unbounded => unreachable!("bounded variables"),
            LpOutcome::Optimal(sol) => {
                if cur.is_feasible_point(&sol.x) {
                    return (Optimization::Optimal { value: sol.objective, x: sol.x }, cuts);
                }
                if cuts.len() >= budget {
                    return (Optimization::Bounds { upper: sol.objective }, cuts);
                }
                match separating_cut(&cur, &t, &sol) {
                    Some(step) => {
                        cur.constraints.push(step.cut.clone());
                        cuts.push(step);
                    }
                    None => return (Optimization::Bounds { upper: sol.objective }, cuts),
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// LP text format
// ---------------------------------------------------------------------------

fn lp_name(k: usize) -> String {
    format!("x{}", k + 1)
}

fn lp_terms(coeffs: &[Q], exact: bool) -> String {
    let mut out = String::new();
    for (k, a) in coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let sign = if a.is_negative() { "-" } else { "+" };
        let mag = if exact { fmt_q(&a.abs()) } else { to_decimal(&a.abs(), 12) };
        out.push_str(&format!(" {sign} {mag} {}", lp_name(k)));
    }
    if out.is_empty() {
        out.push_str(" 0 x1");
    }
    out
}

/// Writes the problem in LP text format. Exact rationals accompany every
/// row and bound as `\ exact:` comments.
pub fn to_lp_format(p: &MilpProblem, objective: Option<&[Q]>) -> String {
    let mut s = String::new();
    for (k, v) in p.vars.iter().enumerate() {
        s.push_str(&format!("\\ {} = {}\n", lp_name(k), v.name));
    }
    s.push_str("Maximize\n");
    let zero = vec![Q::zero(); p.vars.len()];
    let obj = objective.unwrap_or(&zero);
    s.push_str(&format!("\\ exact:{}\n obj:{}\n", lp_terms(obj, true), lp_terms(obj, false)));
    s.push_str("Subject To\n");
    for (i, c) in p.constraints.iter().enumerate() {
        let rhs = -c.constant.clone();
        s.push_str(&format!("\\ exact:{} >= {}\n", lp_terms(&c.coeffs, true), fmt_q(&rhs)));
        s.push_str(&format!(" c{}:{} >= {}\n", i + 1, lp_terms(&c.coeffs, false), to_decimal(&rhs, 12)));
    }
    s.push_str("Bounds\n");
    for (k, v) in p.vars.iter().enumerate() {
        s.push_str(&format!("\\ exact: {} <= {} <= {}\n", fmt_q(&v.lo), lp_name(k), fmt_q(&v.hi)));
        s.push_str(&format!(" {} <= {} <= {}\n", to_decimal(&v.lo, 12), lp_name(k), to_decimal(&v.hi, 12)));
    }
    let ints: Vec<String> = (0..p.vars.len())
        .filter(|&k| p.vars[k].sort == Sort::Integer)
        .map(lp_name)
        .collect();
    if !ints.is_empty() {
        s.push_str("General\n");
        s.push_str(&format!(" {}\n", ints.join(" ")));
    }
    s.push_str("End\n");
    s
}

fn parse_lp_expr(text: &str, index: &BTreeMap<String, usize>, n: usize) -> Result<Vec<Q>, MilpError> {
    let mut coeffs = vec![Q::zero(); n];
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut i = 0;
    while i < toks.len() {
        let mut sign = Q::one();
        if toks[i] == "+" || toks[i] == "-" {
            if toks[i] == "-" {
                sign = -sign;
            }
            i += 1;
        }
        let (c, name) = match toks.get(i).and_then(|t| parse_q(t)) {
            Some(c) => {
                i += 1;
                (c, toks.get(i).copied())
            }
            None => (Q::one(), toks.get(i).copied()),
        };
        let name = name.ok_or_else(|| MilpError::LpFormat(format!("dangling coefficient in `{text}`")))?;
        let k = *index
            .get(name)
            .ok_or_else(|| MilpError::LpFormat(format!("unknown variable `{name}`")))?;
        coeffs[k] += sign * c;
        i += 1;
    }
    Ok(coeffs)
}

/// Reads LP text written by [`to_lp_format`], preferring the exact comments
/// and falling back to the decimal rows. Variable display names are restored
/// from the header comments.
pub fn from_lp_format(text: &str) -> Result<MilpProblem, MilpError> {
    let mut names: Vec<(String, String)> = Vec::new();
    let mut section = "";
    let mut pending_exact: Option<String> = None;
    let mut rows: Vec<String> = Vec::new();
    let mut bounds: Vec<String> = Vec::new();
    let mut ints: Vec<String> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('\\') {
            let c = c.trim();
            if let Some(e) = c.strip_prefix("exact:") {
                pending_exact = Some(e.trim().to_string());
            } else if let Some((a, b)) = c.split_once(" = ") {
                if section.is_empty() {
                    names.push((a.trim().to_string(), b.trim().to_string()));
                }
            }
            continue;
        }
        let lower = line.to_ascii_lowercase();
        match lower.as_str() {
            "maximize" | "minimize" | "subject to" | "bounds" | "general" | "generals" | "integer" | "end" => {
                section = match lower.as_str() {
                    "maximize" | "minimize" => "obj",
                    "subject to" => "st",
                    "bounds" => "bounds",
                    "end" => "end",
                    _ => "general",
                };
                pending_exact = None;
                continue;
            }
            _ => {}
        }
        let exact = pending_exact.take();
        match section {
            "st" => rows.push(exact.unwrap_or_else(|| line.split_once(':').map(|x| x.1).unwrap_or(line).to_string())),
            "bounds" => bounds.push(exact.unwrap_or_else(|| line.to_string())),
            "general" => ints.extend(line.split_whitespace().map(String::from)),
            _ => {}
        }
    }
    let n = names.len();
    let index: BTreeMap<String, usize> = names.iter().enumerate().map(|(k, (a, _))| (a.clone(), k)).collect();
    let mut vars: Vec<Var> = names
        .iter()
        .map(|(_, disp)| Var::new(disp.clone(), Sort::Real, Q::zero(), Q::zero()))
        .collect();
    for b in &bounds {
        let parts: Vec<&str> = b.split("<=").map(str::trim).collect();
        if parts.len() != 3 {
            return Err(MilpError::LpFormat(format!("unsupported bound `{b}`")));
        }
        let k = *index
            .get(parts[1])
            .ok_or_else(|| MilpError::LpFormat(format!("unknown variable `{}`", parts[1])))?;
        vars[k].lo = parse_q(parts[0]).ok_or_else(|| MilpError::LpFormat(format!("bad number `{}`", parts[0])))?;
        vars[k].hi = parse_q(parts[2]).ok_or_else(|| MilpError::LpFormat(format!("bad number `{}`", parts[2])))?;
    }
    for name in &ints {
        let k = *index.get(name).ok_or_else(|| MilpError::LpFormat(format!("unknown variable `{name}`")))?;
        vars[k].sort = Sort::Integer;
    }
    let mut constraints = Vec::new();
    for r in &rows {
        let (lhs, rhs) = r
            .split_once(">=")
            .ok_or_else(|| MilpError::LpFormat(format!("expected `>=` in `{r}`")))?;
        let coeffs = parse_lp_expr(lhs, &index, n)?;
        let rhs = parse_q(rhs.trim()).ok_or_else(|| MilpError::LpFormat(format!("bad number `{}`", rhs.trim())))?;
        constraints.push(Constraint::new(coeffs, -rhs));
    }
    MilpProblem::new(vars, constraints)
}

impl fmt::Display for MilpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names();
        for v in &self.vars {
            let sort = if v.sort == Sort::Integer { "int" } else { "real" };
            writeln!(f, "{} in {sort}[{}, {}]", v.name, fmt_q(&v.lo), fmt_q(&v.hi))?;
        }
        for c in &self.constraints {
            writeln!(f, "{} >= 0", c.render(&names))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn int_var(name: &str, lo: i64, hi: i64) -> Var {
        Var::new(name, Sort::Integer, qi(lo), qi(hi))
    }

    fn cons(coeffs: &[i64], c: i64) -> Constraint {
        Constraint::new(coeffs.iter().map(|&a| qi(a)).collect(), qi(c))
    }

    #[test]
    fn equality_form_shapes() {
        let p = MilpProblem::new(vec![int_var("x", 0, 8)], vec![cons(&[1], -2)]).unwrap();
        let t = to_equality_form(&p);
        assert_eq!(t.rows(), 2);
        assert_eq!(t.a[0], vec![qi(1)]);
        assert_eq!(t.b[0], qi(-2));
        assert_eq!(t.slack_sorts[0], Sort::Integer);
        let empty = MilpProblem::new(vec![int_var("x", 0, 8)], vec![]).unwrap();
        assert_eq!(to_equality_form(&empty).rows(), 1);
    }

    #[test]
    fn lp_maximum_on_box() {
        let p = MilpProblem::new(vec![int_var("x", 0, 8)], vec![]).unwrap();
        match simplex_solve(&to_equality_form(&p), &[qi(1)]) {
            LpOutcome::Optimal(s) => assert_eq!(s.objective, qi(8)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_relaxation_optimum() {
        let vars = (1..=4).map(|k| int_var(&format!("x{k}"), 0, 8)).collect();
        let cons_ = vec![cons(&[1, -2, 0, 0], 0), cons(&[0, 1, -2, 0], 0), cons(&[0, 0, 1, -2], 0), cons(&[0, 0, 0, -1], 0)];
        let p = MilpProblem::new(vars, cons_).unwrap();
        match simplex_solve(&to_equality_form(&p), &[qi(1), qi(0), qi(0), qi(0)]) {
            LpOutcome::Optimal(s) => {
                assert_eq!(s.objective, qi(8));
                assert!(p.is_feasible_point(&s.x));
                assert!(p.is_feasible_point(&[qi(8), qi(4), qi(2), qi(0)]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn farkas_of_contradictory_pair() {
        let p = MilpProblem::new(vec![Var::new("x", Sort::Real, qi(-5), qi(5))], vec![cons(&[1], -1), cons(&[-1], 0)]).unwrap();
        match simplex_solve(&to_equality_form(&p), &[qi(0)]) {
            LpOutcome::Infeasible(f) => {
                assert_eq!(f.check(&p), Some(qi(-1)));
                assert_eq!(&f.mu[..2], &[qi(1), qi(1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn half_row_gives_contradictory_cut() {
        // 2x - 1 = s with x integer in [0, 1]; λ = 1/2 on the row.
        let p = MilpProblem::new(vec![int_var("x", 0, 1)], vec![cons(&[2], -1)]).unwrap();
        let t = to_equality_form(&p);
        let cut = gomory_cut(&t, &[q(1, 2)]).unwrap().unwrap();
        assert_eq!(cut.kind, CutKind::Fractional);
        assert_eq!(cut.constant, q(-1, 2));
        assert!(cut.y_coeffs.iter().all(Q::is_zero));
        assert_eq!(gomory_cut(&t, &[qi(1)]).unwrap(), None);
    }

    #[test]
    fn slack_elimination_substitutes() {
        let p = MilpProblem::new(vec![int_var("x", 0, 8)], vec![cons(&[1], -2)]).unwrap();
        let t = to_equality_form(&p);
        let cut = CutInequality {
            y_coeffs: vec![qi(0)],
            s_coeffs: vec![qi(1), qi(0)],
            constant: qi(-1),
            kind: CutKind::Fractional,
            lambda: vec![],
        };
        assert_eq!(eliminate_slacks(&cut, &t, &[]).unwrap(), cons(&[1], -3));
        let neg = CutInequality { s_coeffs: vec![qi(-1), qi(0)], ..cut };
        assert!(eliminate_slacks(&neg, &t, &[]).is_err());
        assert_eq!(eliminate_slacks(&neg, &t, &[qi(1)]).unwrap(), cons(&[0], -1));
    }

    #[test]
    fn decide_examples() {
        let p = MilpProblem::new(vec![int_var("x", 0, 1)], vec![cons(&[2], -1), cons(&[-2], 1)]).unwrap();
        match milp_decide(&p, 10) {
            Decision::Infeasible(cert) => {
                assert_eq!(cert.cuts.len(), 1);
                assert!(cert.verify(&p));
            }
            other => panic!("{other:?}"),
        }
        let empty = MilpProblem::new(vec![int_var("x", 2, 5)], vec![]).unwrap();
        assert_eq!(milp_decide(&empty, 0), Decision::Feasible(vec![qi(2)]));
    }

    #[test]
    fn optimize_schema() {
        let vars = (1..=4).map(|k| int_var(&format!("x{k}"), 0, 8)).collect();
        let cons_ = vec![cons(&[1, -2, 0, 0], 0), cons(&[0, 1, -2, 0], 0), cons(&[0, 0, 1, -2], 0), cons(&[0, 0, 0, -1], 0)];
        let p = MilpProblem::new(vars, cons_).unwrap();
        match milp_optimize(&p, &[qi(1), qi(0), qi(0), qi(0)], 100) {
            Optimization::Optimal { value, x } => {
                assert_eq!(value, qi(8));
                assert!(p.is_feasible_point(&x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lp_round_trip() {
        let p = MilpProblem::new(
            vec![int_var("x(S(nil))", 0, 8), Var::new("r", Sort::Real, q(-1, 3), q(1, 2))],
            vec![Constraint::new(vec![q(1, 3), qi(-2)], q(-1, 7))],
        )
        .unwrap();
        let text = to_lp_format(&p, None);
        assert_eq!(from_lp_format(&text).unwrap(), p);
    }
}
