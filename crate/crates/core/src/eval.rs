//! Semantics over finite explicit models, and exhaustive model enumeration
//! used as a test oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::ast::{Atom, Formula, PredAtom, Signature, Sort, Term};
use crate::exec::Exec;
use crate::normal::push_inward;
use crate::rational::{fmt_q, parse_q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("function table has no entry for {0}")]
    MissingFunction(String),
    #[error("predicate table has no entry for {0}")]
    MissingPredicate(String),
    #[error("model has no objects")]
    EmptyDomain,
    #[error("value {value} of {atom} is outside its range")]
    OutOfRange { atom: String, value: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("enumeration needs {needed} models, above the cap of {cap}")]
    CapExceeded { needed: String, cap: u64 },
    #[error("model syntax: {0}")]
    Syntax(String),
}

/// Objects, function table and predicate table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub objects: Vec<String>,
    pub funcs: BTreeMap<String, BTreeMap<Vec<String>, String>>,
    pub preds: BTreeMap<String, BTreeMap<Vec<String>, Q>>,
}

/// Variable assignment to object ids.
pub type Valuation = BTreeMap<String, String>;

impl Model {
    pub fn new(objects: Vec<String>) -> Self {
        Model { objects, ..Default::default() }
    }

    pub fn set_func(&mut self, f: &str, args: &[&str], value: &str) {
        self.funcs
            .entry(f.to_string())
            .or_default()
            .insert(args.iter().map(|s| s.to_string()).collect(), value.to_string());
    }

    pub fn set_pred(&mut self, p: &str, args: &[&str], value: Q) {
        self.preds
            .entry(p.to_string())
            .or_default()
            .insert(args.iter().map(|s| s.to_string()).collect(), value);
    }

    /// Parses `object a, b; fun father(a) = a; fun Stanley = a; pred eagle(a) = 1;`.
    pub fn parse(text: &str) -> Result<Model, EvalError> {
        let mut m = Model::default();
        let cleaned: String = text
            .lines()
            .map(|l| {
                let cut = [l.find('#'), l.find("//")].into_iter().flatten().min().unwrap_or(l.len());
                &l[..cut]
            })
            .collect::<Vec<_>>()
            .join("\n");
        for stmt in cleaned.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (kw, rest) = stmt
                .split_once(char::is_whitespace)
                .ok_or_else(|| EvalError::Syntax(format!("incomplete statement `{stmt}`")))?;
            match kw {
                "object" | "objects" => {
                    for o in rest.split(',').map(str::trim) {
                        if o.is_empty() || m.objects.iter().any(|x| x == o) {
                            return Err(EvalError::Syntax(format!("bad or duplicate object `{o}`")));
                        }
                        m.objects.push(o.to_string());
                    }
                }
                "fun" | "pred" => {
                    let (lhs, rhs) = rest
                        .split_once('=')
                        .ok_or_else(|| EvalError::Syntax(format!("missing `=` in `{stmt}`")))?;
                    let (name, args) = parse_app(lhs.trim())?;
                    if kw == "fun" {
                        m.funcs.entry(name).or_default().insert(args, rhs.trim().to_string());
                    } else {
                        let v = parse_q(rhs.trim())
                            .ok_or_else(|| EvalError::Syntax(format!("bad value `{}`", rhs.trim())))?;
                        m.preds.entry(name).or_default().insert(args, v);
                    }
                }
                other => return Err(EvalError::Syntax(format!("unknown statement `{other}`"))),
            }
        }
        for table in m.funcs.values() {
            for (args, v) in table {
                for o in args.iter().chain(std::iter::once(v)) {
                    if !m.objects.contains(o) {
                        return Err(EvalError::UnknownObject(o.clone()));
                    }
                }
            }
        }
        for table in m.preds.values() {
            for o in table.keys().flatten() {
                if !m.objects.contains(o) {
                    return Err(EvalError::UnknownObject(o.clone()));
                }
            }
        }
        Ok(m)
    }

    /// Checks totality and ranges for every symbol of `sig` mentioned in `f`.
    pub fn validate(&self, f: &Formula, sig: &Signature) -> Result<(), EvalError> {
        if self.objects.is_empty() {
            return Err(EvalError::EmptyDomain);
        }
        let mut preds = BTreeMap::new();
        let mut funcs = BTreeMap::new();
        f.collect_symbols(&mut preds, &mut funcs);
        for (g, arity) in funcs {
            for args in tuples(&self.objects, arity) {
                if arity == 0 && self.objects.contains(&g) {
                    continue;
                }
                if self.funcs.get(&g).and_then(|t| t.get(&args)).is_none() {
                    return Err(EvalError::MissingFunction(format!("{g}({})", args.join(", "))));
                }
            }
        }
        for (p, arity) in preds {
            let range = sig.range(&p);
            for args in tuples(&self.objects, arity) {
                let v = self
                    .preds
                    .get(&p)
                    .and_then(|t| t.get(&args))
                    .ok_or_else(|| EvalError::MissingPredicate(format!("{p}({})", args.join(", "))))?;
                if let Some(r) = range {
                    let ok = &r.lo <= v && v <= &r.hi && (r.sort == Sort::Real || v.is_integer());
                    if !ok {
                        return Err(EvalError::OutOfRange {
                            atom: format!("{p}({})", args.join(", ")),
                            value: fmt_q(v),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_app(s: &str) -> Result<(String, Vec<String>), EvalError> {
    match s.split_once('(') {
        None => Ok((s.to_string(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| EvalError::Syntax(format!("unbalanced `{s}`")))?;
            let args = inner
                .split(',')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(String::from)
                .collect();
            Ok((name.trim().to_string(), args))
        }
    }
}

fn tuples(objects: &[String], arity: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                objects.iter().map(move |o| {
                    let mut t2 = t.clone();
                    t2.push(o.clone());
                    t2
                })
            })
            .collect();
    }
    out
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "object {};", self.objects.join(", "))?;
        for (name, table) in &self.funcs {
            for (args, v) in table {
                if args.is_empty() {
                    writeln!(f, "fun {name} = {v};")?;
                } else {
                    writeln!(f, "fun {name}({}) = {v};", args.join(", "))?;
                }
            }
        }
        for (name, table) in &self.preds {
            for (args, v) in table {
                if args.is_empty() {
                    writeln!(f, "pred {name} = {};", fmt_q(v))?;
                } else {
                    writeln!(f, "pred {name}({}) = {};", args.join(", "), fmt_q(v))?;
                }
            }
        }
        Ok(())
    }
}

/// Interprets a term as an object id. A constant with no table entry that
/// names an object denotes that object.
pub fn evaluate_term(t: &Term, m: &Model, i: &Valuation) -> Result<String, EvalError> {
    match t {
        Term::Var(v) => i.get(v).cloned().ok_or_else(|| EvalError::UnboundVariable(v.clone())),
        Term::App(f, args) => {
            let vals = args.iter().map(|a| evaluate_term(a, m, i)).collect::<Result<Vec<_>, _>>()?;
            if let Some(v) = m.funcs.get(f).and_then(|t| t.get(&vals)) {
                return Ok(v.clone());
            }
            if vals.is_empty() && m.objects.contains(f) {
                return Ok(f.clone());
            }
            Err(EvalError::MissingFunction(format!("{f}({})", vals.join(", "))))
        }
    }
}

fn evaluate_atom(p: &PredAtom, m: &Model, i: &Valuation) -> Result<Q, EvalError> {
    let args = p.args.iter().map(|a| evaluate_term(a, m, i)).collect::<Result<Vec<_>, _>>()?;
    m.preds
        .get(&p.pred)
        .and_then(|t| t.get(&args))
        .cloned()
        .ok_or_else(|| EvalError::MissingPredicate(format!("{}({})", p.pred, args.join(", "))))
}

/// Value of `s` in `m` under `i`.
pub fn evaluate(s: &Formula, m: &Model, i: &Valuation) -> Result<Q, EvalError> {
    match s {
        Formula::Atom(Atom::Scalar(c)) => Ok(c.clone()),
        Formula::Atom(Atom::Pred(p)) => evaluate_atom(p, m, i),
        Formula::Neg(a) => Ok(-evaluate(a, m, i)?),
        Formula::Scale(c, a) => Ok(c * evaluate(a, m, i)?),
        Formula::Add(a, b) => Ok(evaluate(a, m, i)? + evaluate(b, m, i)?),
        Formula::Sub(a, b) => Ok(evaluate(a, m, i)? - evaluate(b, m, i)?),
        Formula::Min(a, b) => Ok(evaluate(a, m, i)?.min(evaluate(b, m, i)?)),
        Formula::Max(a, b) => Ok(evaluate(a, m, i)?.max(evaluate(b, m, i)?)),
        Formula::Inf(v, body) | Formula::Sup(v, body) => {
            if m.objects.is_empty() {
                return Err(EvalError::EmptyDomain);
            }
            let mut best: Option<Q> = None;
            let mut j = i.clone();
            for o in &m.objects {
                j.insert(v.clone(), o.clone());
                let x = evaluate(body, m, &j)?;
                best = Some(match best {
                    None => x,
                    Some(b) if matches!(s, Formula::Inf(..)) => b.min(x),
                    Some(b) => b.max(x),
                });
            }
            Ok(best.expect("nonempty domain"))
        }
    }
}

/// Value of a sentence; free variables are inf-quantified.
pub fn sentence_value(s: &Formula, m: &Model) -> Result<Q, EvalError> {
    evaluate(&s.clone().close_inf(), m, &Valuation::new())
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

/// Oracle settings.
#[derive(Clone, Debug)]
pub struct BruteForceConfig {
    /// Maximum number of models to enumerate.
    pub cap: u64,
    /// Grid for real-sorted predicates; `None` means endpoints plus midpoint.
    pub real_grid: Option<Vec<Q>>,
    pub exec: Exec,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        BruteForceConfig {
            cap: 1 << 22,
            real_grid: None,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
enum CTerm {
    Var(usize),
    App { cell: usize, args: Vec<CTerm> },
}

#[derive(Clone, Debug)]
enum CForm {
    Const(i128),
    Atom { cell: usize, arity: usize, args: Vec<CTerm>, vals: Vec<i128> },
    Add(Box<CForm>, Box<CForm>),
    Min(Box<CForm>, Box<CForm>),
    Max(Box<CForm>, Box<CForm>),
    Inf(usize, Box<CForm>),
    Sup(usize, Box<CForm>),
}

#[derive(Clone, Debug)]
struct Symbol {
    name: String,
    arity: usize,
    offset: usize,
    /// Grid of values (predicates only).
    grid: Vec<Q>,
}

/// The family of all models over `n` objects for a set of formulas: every
/// function table and every predicate table drawn from the grid.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    n: usize,
    funcs: Vec<Symbol>,
    preds: Vec<Symbol>,
    radices: Vec<u64>,
    total: Option<u64>,
    forms: Vec<CForm>,
    slots: usize,
    scale: i128,
}

impl ModelSpace {
    pub fn new(formulas: &[Formula], sig: &Signature, n: usize, cfg: &BruteForceConfig) -> Result<Self, EvalError> {
        if n == 0 {
            return Err(EvalError::EmptyDomain);
        }
        let mut preds = BTreeMap::new();
        let mut funcs = BTreeMap::new();
        let pushed: Vec<Formula> = formulas.iter().map(|f| push_inward(&f.clone().close_inf())).collect();
        for f in &pushed {
            f.collect_symbols(&mut preds, &mut funcs);
        }
        let mut radices = Vec::new();
        let mut fsyms = Vec::new();
        for (name, arity) in funcs {
            let offset = radices.len();
            let cells = n.pow(arity as u32);
            radices.extend(std::iter::repeat_n(n as u64, cells));
            fsyms.push(Symbol { name, arity, offset, grid: Vec::new() });
        }
        let mut psyms = Vec::new();
        for (name, arity) in preds {
            let range = sig.range(&name).cloned().unwrap_or_else(crate::ast::Range::boolean);
            let (lo, hi) = range.effective();
            let grid: Vec<Q> = match range.sort {
                Sort::Integer => {
                    let (a, b) = (lo.to_integer(), hi.to_integer());
                    let mut g = Vec::new();
                    let mut k = a;
                    while k <= b {
                        g.push(Q::from_integer(k.clone()));
                        k += 1;
                    }
                    g
                }
                Sort::Real => match &cfg.real_grid {
                    Some(g) => g.iter().filter(|v| &lo <= *v && *v <= &hi).cloned().collect(),
                    None => {
                        let mid = (&lo + &hi) / Q::from_integer(BigInt::from(2));
                        let mut g = vec![lo.clone(), mid, hi.clone()];
                        g.dedup();
                        g
                    }
                },
            };
            if grid.is_empty() {
                return Err(EvalError::OutOfRange { atom: name, value: "empty grid".into() });
            }
            let offset = radices.len();
            let cells = n.pow(arity as u32);
            radices.extend(std::iter::repeat_n(grid.len() as u64, cells));
            psyms.push(Symbol { name, arity, offset, grid });
        }
        let mut total: Option<u64> = Some(1);
        for r in &radices {
            total = total.and_then(|t| t.checked_mul(*r));
        }
        // Common scale so every atom contribution and constant is integral.
        let mut den = BigInt::one();
        for f in &pushed {
            for s in f.scalars() {
                den = den.lcm(s.denom());
            }
        }
        let mut gden = BigInt::one();
        for p in &psyms {
            for g in &p.grid {
                gden = gden.lcm(g.denom());
            }
        }
        let scale = (den * gden)
            .to_i128()
            .ok_or_else(|| EvalError::Syntax("coefficients too large for enumeration".into()))?;
        let mut space = ModelSpace {
            n,
            funcs: fsyms,
            preds: psyms,
            radices,
            total,
            forms: Vec::new(),
            slots: 0,
            scale,
        };
        let forms = pushed
            .iter()
            .map(|f| space.compile(f, &mut Vec::new(), &Q::one()))
            .collect::<Result<Vec<_>, _>>()?;
        space.forms = forms;
        Ok(space)
    }

    /// Number of models in the family, if it fits in 64 bits.
    pub fn count(&self) -> Option<u64> {
        self.total
    }

    fn check_cap(&self, cap: u64) -> Result<u64, EvalError> {
        match self.total {
            Some(t) if t <= cap => Ok(t),
            Some(t) => Err(EvalError::CapExceeded { needed: t.to_string(), cap }),
            None => Err(EvalError::CapExceeded { needed: "more than 2^64".into(), cap }),
        }
    }

    fn to_scaled(&self, v: &Q) -> Result<i128, EvalError> {
        let s = v * Q::from_integer(BigInt::from(self.scale));
        if !s.is_integer() {
            return Err(EvalError::Syntax("internal scaling error".into()));
        }
        s.to_integer()
            .to_i128()
            .ok_or_else(|| EvalError::Syntax("value too large for enumeration".into()))
    }

    fn compile_term(&self, t: &Term, env: &[(String, usize)]) -> CTerm {
        match t {
            Term::Var(v) => {
                let slot = env
                    .iter()
                    .rev()
                    .find(|(n, _)| n == v)
                    .map(|(_, s)| *s)
                    .expect("closed formula");
                CTerm::Var(slot)
            }
            Term::App(f, args) => {
                let sym = self.funcs.iter().find(|s| &s.name == f).expect("collected symbol");
                CTerm::App {
                    cell: sym.offset,
                    args: args.iter().map(|a| self.compile_term(a, env)).collect(),
                }
            }
        }
    }

    fn compile(&mut self, f: &Formula, env: &mut Vec<(String, usize)>, coeff: &Q) -> Result<CForm, EvalError> {
        Ok(match f {
            Formula::Atom(Atom::Scalar(c)) => CForm::Const(self.to_scaled(&(coeff * c))?),
            Formula::Atom(Atom::Pred(p)) => {
                let sym = self.preds.iter().find(|s| s.name == p.pred).expect("collected symbol").clone();
                let vals = sym
                    .grid
                    .iter()
                    .map(|g| self.to_scaled(&(coeff * g)))
                    .collect::<Result<Vec<_>, _>>()?;
                CForm::Atom {
                    cell: sym.offset,
                    arity: sym.arity,
                    args: p.args.iter().map(|a| self.compile_term(a, env)).collect(),
                    vals,
                }
            }
            Formula::Scale(c, a) => self.compile(a, env, &(coeff * c))?,
            Formula::Add(a, b) => CForm::Add(Box::new(self.compile(a, env, coeff)?), Box::new(self.compile(b, env, coeff)?)),
            Formula::Min(a, b) => CForm::Min(Box::new(self.compile(a, env, coeff)?), Box::new(self.compile(b, env, coeff)?)),
            Formula::Max(a, b) => CForm::Max(Box::new(self.compile(a, env, coeff)?), Box::new(self.compile(b, env, coeff)?)),
            Formula::Inf(v, a) | Formula::Sup(v, a) => {
                let slot = self.slots;
                self.slots += 1;
                env.push((v.clone(), slot));
                let body = self.compile(a, env, coeff)?;
                env.pop();
                if matches!(f, Formula::Inf(..)) {
                    CForm::Inf(slot, Box::new(body))
                } else {
                    CForm::Sup(slot, Box::new(body))
                }
            }
            Formula::Neg(_) | Formula::Sub(..) => unreachable!("pushed inward"),
        })
    }

    fn eval_term(&self, t: &CTerm, state: &[u64], env: &[usize]) -> usize {
        match t {
            CTerm::Var(s) => env[*s],
            CTerm::App { cell, args } => {
                let mut idx = 0usize;
                for a in args {
                    idx = idx * self.n + self.eval_term(a, state, env);
                }
                state[cell + idx] as usize
            }
        }
    }

    fn eval(&self, f: &CForm, state: &[u64], env: &mut Vec<usize>) -> i128 {
        match f {
            CForm::Const(c) => *c,
            CForm::Atom { cell, arity, args, vals } => {
                let mut idx = 0usize;
                for a in args {
                    idx = idx * self.n + self.eval_term(a, state, env);
                }
                debug_assert_eq!(args.len(), *arity);
                vals[state[cell + idx] as usize]
            }
            CForm::Add(a, b) => self.eval(a, state, env) + self.eval(b, state, env),
            CForm::Min(a, b) => self.eval(a, state, env).min(self.eval(b, state, env)),
            CForm::Max(a, b) => self.eval(a, state, env).max(self.eval(b, state, env)),
            CForm::Inf(s, body) | CForm::Sup(s, body) => {
                let inf = matches!(f, CForm::Inf(..));
                let mut best = if inf { i128::MAX } else { i128::MIN };
                for o in 0..self.n {
                    env[*s] = o;
                    let v = self.eval(body, state, env);
                    best = if inf { best.min(v) } else { best.max(v) };
                }
                best
            }
        }
    }

    fn decode(&self, mut index: u64, state: &mut [u64]) {
        for (k, r) in self.radices.iter().enumerate().rev() {
            state[k] = index % r;
            index /= r;
        }
    }

    fn advance(&self, state: &mut [u64]) {
        for k in (0..state.len()).rev() {
            state[k] += 1;
            if state[k] < self.radices[k] {
                return;
            }
            state[k] = 0;
        }
    }

    fn scaled_values(&self, state: &[u64], env: &mut Vec<usize>) -> Vec<i128> {
        self.forms.iter().map(|f| self.eval(f, state, env)).collect()
    }

    fn unscale(&self, v: i128) -> Q {
        Q::new(BigInt::from(v), BigInt::from(self.scale))
    }

    /// Folds every model's formula values chunk by chunk; chunk results are
    /// combined in index order.
    fn fold<A, F, G>(&self, cfg: &BruteForceConfig, init: A, step: F, combine: G) -> Result<A, EvalError>
    where
        A: Send + Clone + Sync,
        F: Fn(&mut A, &[i128]) + Sync + Send,
        G: Fn(A, A) -> A,
    {
        let total = self.check_cap(cfg.cap)?;
        let chunk = (total / 256).max(1024);
        let parts = cfg.exec.map_chunks(total, chunk, |a, b| {
            let mut acc = init.clone();
            let mut state = vec![0u64; self.radices.len()];
            let mut env = vec![0usize; self.slots];
            self.decode(a, &mut state);
            for _ in a..b {
                let vals = self.scaled_values(&state, &mut env);
                step(&mut acc, &vals);
                self.advance(&mut state);
            }
            acc
        });
        Ok(parts.into_iter().fold(init, combine))
    }

    /// Maximum value of formula `k` over the family.
    pub fn max_value(&self, k: usize, cfg: &BruteForceConfig) -> Result<Q, EvalError> {
        let best = self.fold(
            cfg,
            i128::MIN,
            |acc, vals| *acc = (*acc).max(vals[k]),
            |a, b| a.max(b),
        )?;
        Ok(self.unscale(best))
    }

    /// Every distinct value formula `k` takes over the family.
    pub fn value_set(&self, k: usize, cfg: &BruteForceConfig) -> Result<BTreeSet<Q>, EvalError> {
        let set = self.fold(
            cfg,
            BTreeSet::new(),
            |acc, vals| {
                acc.insert(vals[k]);
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        Ok(set.into_iter().map(|v| self.unscale(v)).collect())
    }

    /// Index of the first model whose formula values satisfy `pred`.
    pub fn find_model<F>(&self, cfg: &BruteForceConfig, pred: F) -> Result<Option<u64>, EvalError>
    where
        F: Fn(&[Q]) -> bool + Sync + Send,
    {
        let first = self.fold(
            cfg,
            (None::<u64>, 0u64),
            |acc, vals| {
                if acc.0.is_none() {
                    let qs: Vec<Q> = vals.iter().map(|v| self.unscale(*v)).collect();
                    if pred(&qs) {
                        acc.0 = Some(acc.1);
                    }
                }
                acc.1 += 1;
            },
            |a, b| match (a.0, b.0) {
                (Some(x), _) => (Some(x), a.1 + b.1),
                (None, Some(y)) => (Some(a.1 + y), a.1 + b.1),
                (None, None) => (None, a.1 + b.1),
            },
        )?;
        Ok(first.0)
    }

    /// Values of all formulas in model `index`.
    pub fn values_at(&self, index: u64) -> Vec<Q> {
        let mut state = vec![0u64; self.radices.len()];
        let mut env = vec![0usize; self.slots];
        self.decode(index, &mut state);
        self.scaled_values(&state, &mut env)
            .into_iter()
            .map(|v| self.unscale(v))
            .collect()
    }

    /// The explicit model with the given index, objects named `1..=n`.
    pub fn model_at(&self, index: u64) -> Model {
        let mut state = vec![0u64; self.radices.len()];
        self.decode(index, &mut state);
        let names: Vec<String> = (1..=self.n).map(|k| k.to_string()).collect();
        let mut m = Model::new(names.clone());
        for f in &self.funcs {
            for (k, args) in tuples(&names, f.arity).into_iter().enumerate() {
                m.funcs
                    .entry(f.name.clone())
                    .or_default()
                    .insert(args, names[state[f.offset + k] as usize].clone());
            }
        }
        for p in &self.preds {
            for (k, args) in tuples(&names, p.arity).into_iter().enumerate() {
                m.preds
                    .entry(p.name.clone())
                    .or_default()
                    .insert(args, p.grid[state[p.offset + k] as usize].clone());
            }
        }
        m
    }
}

/// Maximum of the sentence value over all models with exactly `n` objects,
/// all function tables, and predicate tables from the grid. Exact for the
/// integer fragment restricted to `n` objects; a lower bound on the value
/// over all models otherwise.
pub fn brute_force_value(s: &Formula, sig: &Signature, n: usize, cfg: &BruteForceConfig) -> Result<Q, EvalError> {
    ModelSpace::new(std::slice::from_ref(s), sig, n, cfg)?.max_value(0, cfg)
}

/// Largest value over all domain sizes `1..=max_n`.
pub fn brute_force_value_upto(s: &Formula, sig: &Signature, max_n: usize, cfg: &BruteForceConfig) -> Result<Q, EvalError> {
    let mut best: Option<Q> = None;
    for n in 1..=max_n {
        let v = brute_force_value(s, sig, n, cfg)?;
        best = Some(match best {
            Some(b) => b.max(v),
            None => v,
        });
    }
    best.ok_or(EvalError::EmptyDomain)
}
