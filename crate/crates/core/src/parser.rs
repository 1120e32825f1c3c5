//! Surface syntax: `.fop` problem files, `.fol` formulas, and the two
//! FOL-to-FOP translations.
//!
//! Operator precedence, tightest first: negation and scalar multiplication,
//! `+`/`-`, `^` (min), `v` (max), then the quantifiers `!x.` (inf) and `?x.`
//! (sup), whose bodies extend as far right as possible.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::ast::{is_constant_name, Atom, Formula, PredAtom, Range, Signature, Sort, Term, NIL};
use crate::rational::{parse_q, q, qi, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("lexical error: {0}")]
    Lexical(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("`{name}` declared with arity {declared} but used with {used} argument(s)")]
    Arity { name: String, declared: usize, used: usize },
    #[error("invalid range: {0}")]
    Range(String),
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 22] = [
    "->", "(", ")", ",", ";", ".", "*", "+", "-", "^", "!", "?", "/", "=", "[", "]", "{", "}", "~", "&", "|", ":",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(s), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Num(s), line: l0, col: c0 });
            continue;
        }
        let alias = match c {
            '∨' => Some(Tok::Ident("v".into())),
            '∧' => Some(Tok::Sym("^")),
            '⋀' => Some(Tok::Sym("!")),
            '⋁' => Some(Tok::Sym("?")),
            '−' => Some(Tok::Sym("-")),
            '·' | '×' => Some(Tok::Sym("*")),
            _ => None,
        };
        if let Some(tok) = alias {
            i += 1;
            col += 1;
            out.push(Token { tok, line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            i += sym.len();
            col += sym.len();
            out.push(Token { tok: Tok::Sym(sym), line: l0, col: c0 });
            continue;
        }
        return Err(ParseError {
            line,
            col,
            kind: ParseErrorKind::Lexical(format!("unexpected character `{c}`")),
        });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

/// A parsed `.fop` file.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub signature: Signature,
    pub sentence: Formula,
    pub query: Option<Formula>,
    pub threshold: Option<Q>,
    /// Domain-closure object list for concrete mode.
    pub objects: Option<Vec<String>>,
    /// Known function values: symbol -> argument tuple -> result object.
    pub function_table: BTreeMap<String, BTreeMap<Vec<String>, String>>,
}

#[derive(Clone, Debug)]
struct Use {
    name: String,
    is_pred: bool,
    arity: usize,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    uses: Vec<Use>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            uses: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            kind: ParseErrorKind::Syntax(msg.into()),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn natural(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Num(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                self.bump();
                s.parse().or_else(|_| self.err("number too large"))
            }
            t => self.err(format!("expected a natural number, found {}", describe(&t))),
        }
    }

    /// `[-] NUM [/ NUM]`
    fn rational(&mut self) -> Result<Q, ParseError> {
        let neg = self.eat_sym("-");
        let v = self.unsigned_rational()?;
        Ok(if neg { -v } else { v })
    }

    fn unsigned_rational(&mut self) -> Result<Q, ParseError> {
        let num = match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                s
            }
            t => return self.err(format!("expected a number, found {}", describe(&t))),
        };
        let mut text = num;
        if self.is_sym("/") && matches!(self.peek_at(1), Tok::Num(_)) && !text.contains('.') {
            self.bump();
            if let Tok::Num(d) = self.bump() {
                text = format!("{text}/{d}");
            }
        }
        match parse_q(&text) {
            Some(v) => Ok(v),
            None => self.err(format!("invalid number `{text}`")),
        }
    }

    // -- terms --------------------------------------------------------------

    fn term(&mut self) -> Result<Term, ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Num(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                self.bump();
                self.uses.push(Use { name: s.clone(), is_pred: false, arity: 0, line, col });
                Ok(Term::constant(s))
            }
            Tok::Ident(name) if name != "v" => {
                self.bump();
                if self.eat_sym("(") {
                    let slot = self.uses.len();
                    self.uses.push(Use { name: name.clone(), is_pred: false, arity: 0, line, col });
                    let args = self.term_list()?;
                    self.uses[slot].arity = args.len();
                    Ok(Term::App(name, args))
                } else if is_constant_name(&name) {
                    self.uses.push(Use { name: name.clone(), is_pred: false, arity: 0, line, col });
                    Ok(Term::constant(name))
                } else {
                    Ok(Term::Var(name))
                }
            }
            t => self.err(format!("expected a term, found {}", describe(&t))),
        }
    }

    /// Arguments after `(`, through the closing `)`.
    fn term_list(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    // -- formulas -----------------------------------------------------------

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.is_sym("!") || self.is_sym("?") {
            return self.quantified();
        }
        self.max_expr()
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let inf = self.is_sym("!");
        self.bump();
        let v = self.ident()?;
        if v == "v" || is_constant_name(&v) {
            return self.err(format!("`{v}` cannot be a variable"));
        }
        self.expect_sym(".")?;
        let body = self.formula()?;
        Ok(if inf { Formula::inf(v, body) } else { Formula::sup(v, body) })
    }

    fn max_expr(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.min_expr()?;
        while self.is_ident("v") {
            self.bump();
            let rhs = self.min_expr()?;
            acc = Formula::max(acc, rhs);
        }
        Ok(acc)
    }

    fn min_expr(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.sum_expr()?;
        while self.eat_sym("^") {
            let rhs = self.sum_expr()?;
            acc = Formula::min(acc, rhs);
        }
        Ok(acc)
    }

    fn sum_expr(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.product()?;
        loop {
            if self.eat_sym("+") {
                let rhs = self.product()?;
                acc = Formula::add(acc, rhs);
            } else if self.eat_sym("-") {
                let rhs = self.product()?;
                acc = Formula::sub(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.is_sym("*") {
            self.bump();
            let rhs = self.unary()?;
            acc = match (acc, rhs) {
                (Formula::Atom(Atom::Scalar(c)), rhs) => Formula::scale(c, rhs),
                (lhs, Formula::Atom(Atom::Scalar(c))) => Formula::scale(c, lhs),
                _ => return self.err("product of two non-scalar formulas is not linear"),
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.is_sym("-") {
            self.bump();
            if matches!(self.peek(), Tok::Num(_)) {
                let v = self.unsigned_rational()?;
                return Ok(Formula::scalar(-v));
            }
            return Ok(self.unary()?.neg());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Num(_) => Ok(Formula::scalar(self.unsigned_rational()?)),
            Tok::Sym("(") => {
                self.bump();
                let f = self.formula()?;
                self.expect_sym(")")?;
                Ok(f)
            }
            Tok::Sym("!") | Tok::Sym("?") => self.quantified(),
            Tok::Ident(name) if name != "v" => {
                self.bump();
                let slot = self.uses.len();
                self.uses.push(Use { name: name.clone(), is_pred: true, arity: 0, line, col });
                let args = if self.eat_sym("(") { self.term_list()? } else { Vec::new() };
                self.uses[slot].arity = args.len();
                Ok(Formula::pred(name, args))
            }
            t => self.err(format!("expected a formula, found {}", describe(&t))),
        }
    }

    fn statement_end(&mut self) -> Result<(), ParseError> {
        self.expect_sym(";")
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(s) => format!("`{s}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

fn check_uses(uses: &[Use], sig: &Signature) -> Result<(), ParseError> {
    for u in uses {
        let declared = if u.is_pred {
            sig.preds.get(&u.name).map(|d| d.arity)
        } else {
            sig.funcs.get(&u.name).copied()
        };
        let kind = if u.is_pred { "predicate" } else { "function" };
        match declared {
            None => {
                return Err(ParseError {
                    line: u.line,
                    col: u.col,
                    kind: ParseErrorKind::Undeclared { kind, name: u.name.clone() },
                })
            }
            Some(a) if a != u.arity => {
                return Err(ParseError {
                    line: u.line,
                    col: u.col,
                    kind: ParseErrorKind::Arity {
                        name: u.name.clone(),
                        declared: a,
                        used: u.arity,
                    },
                })
            }
            _ => {}
        }
    }
    Ok(())
}

/// Parses a `.fop` problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    parse_problem_with(text, &Signature::new())
}

/// Parses a `.fop` file whose declarations extend `base` (used for query files).
pub fn parse_problem_with(text: &str, base: &Signature) -> Result<ProblemFile, ParseError> {
    let mut p = Parser::new(text)?;
    let mut sig = base.clone();
    let mut sentence = None;
    let mut query = None;
    let mut threshold = None;
    let mut objects: Option<Vec<String>> = None;
    let mut table: BTreeMap<String, BTreeMap<Vec<String>, String>> = BTreeMap::new();
    let mut table_uses = Vec::new();

    while *p.peek() != Tok::Eof {
        let (line, col) = p.here();
        let kw = p.ident()?;
        match kw.as_str() {
            "pred" => {
                let name = p.ident()?;
                p.expect_sym("/")?;
                let arity = p.natural()?;
                let range = if p.is_ident("in") {
                    p.bump();
                    let sort = match p.ident()?.as_str() {
                        "int" => Sort::Integer,
                        "real" => Sort::Real,
                        other => return p.err(format!("expected `int` or `real`, found `{other}`")),
                    };
                    p.expect_sym("[")?;
                    let lo = p.rational()?;
                    p.expect_sym(",")?;
                    let hi = p.rational()?;
                    p.expect_sym("]")?;
                    Range::new(lo, hi, sort)
                } else {
                    return p.err("predicate declarations need a bounded range `in int[l,u]` or `in real[l,u]`");
                };
                if range.lo > range.hi {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Range(format!("empty range for `{name}`")),
                    });
                }
                if range.sort == Sort::Integer && range.lo.ceil() > range.hi.floor() {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Range(format!("no integer lies in the range of `{name}`")),
                    });
                }
                sig.declare_pred(name, arity, range).map_err(|e| ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax(e.to_string()),
                })?;
                p.statement_end()?;
            }
            "fun" => {
                let name = p.ident()?;
                if p.eat_sym("/") {
                    let arity = p.natural()?;
                    sig.declare_func(name, arity).map_err(|e| ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Syntax(e.to_string()),
                    })?;
                } else {
                    // Function table entry `fun f(a, b) = c;` or `fun C = d;`.
                    let args = if p.eat_sym("(") {
                        let ts = p.term_list()?;
                        ts.into_iter()
                            .map(|t| match t {
                                Term::App(n, a) if a.is_empty() => Ok(n),
                                other => Err(other),
                            })
                            .collect::<Result<Vec<_>, _>>()
                            .or_else(|t| p.err(format!("function table arguments must be object constants, found `{t}`")))?
                    } else {
                        Vec::new()
                    };
                    p.expect_sym("=")?;
                    let target = match p.term()? {
                        Term::App(n, a) if a.is_empty() => n,
                        t => return p.err(format!("function table value must be an object constant, found `{t}`")),
                    };
                    table_uses.push(Use { name: name.clone(), is_pred: false, arity: args.len(), line, col });
                    table.entry(name).or_default().insert(args, target);
                }
                p.statement_end()?;
            }
            "objects" => {
                let mut objs = Vec::new();
                loop {
                    let name = match p.bump() {
                        Tok::Ident(s) | Tok::Num(s) => s,
                        t => return p.err(format!("expected an object name, found {}", describe(&t))),
                    };
                    if !is_constant_name(&name) {
                        return p.err(format!("object `{name}` must start with an uppercase letter or digit"));
                    }
                    sig.declare_func(name.clone(), 0).map_err(|e| ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Syntax(e.to_string()),
                    })?;
                    objs.push(name);
                    if !p.eat_sym(",") {
                        break;
                    }
                }
                objects = Some(objs);
                p.statement_end()?;
            }
            "sentence" | "query" => {
                let f = p.formula()?;
                p.statement_end()?;
                let slot = if kw == "sentence" { &mut sentence } else { &mut query };
                if slot.is_some() {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Syntax(format!("duplicate `{kw}`")),
                    });
                }
                *slot = Some(f);
            }
            "threshold" => {
                threshold = Some(p.rational()?);
                p.statement_end()?;
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax(format!("unknown directive `{other}`")),
                })
            }
        }
    }
    check_uses(&p.uses, &sig)?;
    check_uses(&table_uses, &sig)?;
    let sentence = match sentence {
        Some(s) => s,
        None => {
            let (line, col) = p.here();
            return Err(ParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax("missing `sentence`".into()),
            });
        }
    };
    Ok(ProblemFile {
        signature: sig,
        sentence,
        query,
        threshold,
        objects,
        function_table: table,
    })
}

/// Parses a standalone formula, checking its symbols against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    check_uses(&p.uses, sig)?;
    Ok(f)
}

/// Parses a term such as `S(S(i))`, checking function symbols against `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    check_uses(&p.uses, sig)?;
    Ok(t)
}

/// Parses a sum-clause written as a linear formula.
pub fn parse_sum_clause(text: &str, sig: &Signature) -> Result<crate::ast::SumClause, ParseError> {
    let f = parse_formula(text, sig)?;
    crate::normal::as_sum_clause(&f).ok_or(ParseError {
        line: 1,
        col: 1,
        kind: ParseErrorKind::Syntax(format!("`{text}` is not a sum of literals")),
    })
}

// ---------------------------------------------------------------------------
// First-order logic front end
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FolFormula {
    True,
    False,
    Atom(PredAtom),
    Not(Box<FolFormula>),
    And(Box<FolFormula>, Box<FolFormula>),
    Or(Box<FolFormula>, Box<FolFormula>),
    Implies(Box<FolFormula>, Box<FolFormula>),
    Forall(String, Box<FolFormula>),
    Exists(String, Box<FolFormula>),
}

impl FolFormula {
    pub fn atom(pred: &str, args: Vec<Term>) -> Self {
        FolFormula::Atom(PredAtom::new(pred, args))
    }

    pub fn not(self) -> Self {
        FolFormula::Not(Box::new(self))
    }

    pub fn and(a: Self, b: Self) -> Self {
        FolFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        FolFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        FolFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, b: Self) -> Self {
        FolFormula::Forall(v.into(), Box::new(b))
    }

    pub fn exists(v: &str, b: Self) -> Self {
        FolFormula::Exists(v.into(), Box::new(b))
    }
}

/// A parsed `.fol` file: declarations plus one formula.
#[derive(Clone, Debug, PartialEq)]
pub struct FolFile {
    pub signature: Signature,
    pub formula: FolFormula,
}

impl Parser {
    fn fol(&mut self) -> Result<FolFormula, ParseError> {
        if self.is_ident("forall") || self.is_ident("exists") {
            return self.fol_quant();
        }
        let lhs = self.fol_or()?;
        if self.eat_sym("->") {
            let rhs = self.fol()?;
            return Ok(FolFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn fol_quant(&mut self) -> Result<FolFormula, ParseError> {
        let all = self.is_ident("forall");
        self.bump();
        let v = self.ident()?;
        self.expect_sym(".")?;
        let body = self.fol()?;
        Ok(if all { FolFormula::forall(&v, body) } else { FolFormula::exists(&v, body) })
    }

    fn fol_or(&mut self) -> Result<FolFormula, ParseError> {
        let mut acc = self.fol_and()?;
        while self.eat_sym("|") {
            acc = FolFormula::or(acc, self.fol_and()?);
        }
        Ok(acc)
    }

    fn fol_and(&mut self) -> Result<FolFormula, ParseError> {
        let mut acc = self.fol_unary()?;
        while self.eat_sym("&") {
            acc = FolFormula::and(acc, self.fol_unary()?);
        }
        Ok(acc)
    }

    fn fol_unary(&mut self) -> Result<FolFormula, ParseError> {
        let (line, col) = self.here();
        if self.eat_sym("~") {
            return Ok(self.fol_unary()?.not());
        }
        if self.eat_sym("(") {
            let f = self.fol()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        if self.is_ident("forall") || self.is_ident("exists") {
            return self.fol_quant();
        }
        let name = self.ident()?;
        match name.as_str() {
            "T" => return Ok(FolFormula::True),
            "F" => return Ok(FolFormula::False),
            _ => {}
        }
        let slot = self.uses.len();
        self.uses.push(Use { name: name.clone(), is_pred: true, arity: 0, line, col });
        let args = if self.eat_sym("(") { self.term_list()? } else { Vec::new() };
        self.uses[slot].arity = args.len();
        Ok(FolFormula::atom(&name, args))
    }
}

/// Parses a `.fol` file: `pred p/1;`, `fun f/1;`, then `formula ...;`.
/// Every predicate gets the integer range {0, 1}.
pub fn parse_fol(text: &str) -> Result<FolFile, ParseError> {
    let mut p = Parser::new(text)?;
    let mut sig = Signature::new();
    let mut formula = None;
    while *p.peek() != Tok::Eof {
        let (line, col) = p.here();
        let kw = p.ident()?;
        let wrap = |e: crate::ast::AstError| ParseError { line, col, kind: ParseErrorKind::Syntax(e.to_string()) };
        match kw.as_str() {
            "pred" => {
                let name = p.ident()?;
                p.expect_sym("/")?;
                let arity = p.natural()?;
                sig.declare_pred(name, arity, Range::boolean()).map_err(wrap)?;
            }
            "fun" => {
                let name = p.ident()?;
                p.expect_sym("/")?;
                let arity = p.natural()?;
                sig.declare_func(name, arity).map_err(wrap)?;
            }
            "formula" => formula = Some(p.fol()?),
            other => {
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax(format!("unknown directive `{other}`")),
                })
            }
        }
        p.statement_end()?;
    }
    check_uses(&p.uses, &sig)?;
    let formula = formula.ok_or_else(|| ParseError {
        line: 1,
        col: 1,
        kind: ParseErrorKind::Syntax("missing `formula`".into()),
    })?;
    Ok(FolFile { signature: sig, formula })
}

/// Which column of the FOL-to-FOP translation table to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationMode {
    /// T = 1, F = -1, negation is arithmetic negation; compare against 0.
    /// A 0-1 atom `p` is read as the signed truth value `2*p - 1`.
    A,
    /// T = 1, F = 0, negation is `1 - P`, disjunction is `1 ^ (P + Q)`;
    /// compare against 1/2.
    B,
}

impl TranslationMode {
    /// The value threshold at which a translated sentence counts as true.
    pub fn threshold(self) -> Q {
        match self {
            TranslationMode::A => Q::zero(),
            TranslationMode::B => q(1, 2),
        }
    }
}

/// Structure-preserving FOL to FOP translation. Implications are first
/// rewritten as `~P | Q`.
pub fn translate_fol(f: &FolFormula, mode: TranslationMode) -> Formula {
    use FolFormula as F;
    match f {
        F::True => Formula::scalar(qi(1)),
        F::False => Formula::scalar(match mode {
            TranslationMode::A => qi(-1),
            TranslationMode::B => qi(0),
        }),
        F::Atom(a) => {
            let p = Formula::Atom(Atom::Pred(a.clone()));
            match mode {
                TranslationMode::A => Formula::sub(Formula::scale(qi(2), p), Formula::scalar(qi(1))),
                TranslationMode::B => p,
            }
        }
        F::Not(p) => {
            let t = translate_fol(p, mode);
            match mode {
                TranslationMode::A => t.neg(),
                TranslationMode::B => Formula::sub(Formula::scalar(qi(1)), t),
            }
        }
        F::And(a, b) => Formula::min(translate_fol(a, mode), translate_fol(b, mode)),
        F::Or(a, b) => {
            let (ta, tb) = (translate_fol(a, mode), translate_fol(b, mode));
            match mode {
                TranslationMode::A => Formula::max(ta, tb),
                TranslationMode::B => Formula::min(Formula::scalar(qi(1)), Formula::add(ta, tb)),
            }
        }
        F::Implies(a, b) => translate_fol(&F::or(F::Not(a.clone()), (**b).clone()), mode),
        F::Forall(v, b) => Formula::inf(v.clone(), translate_fol(b, mode)),
        F::Exists(v, b) => Formula::sup(v.clone(), translate_fol(b, mode)),
    }
}

/// Mode-B translation rewritten into a sign-equivalent sentence compared
/// against 0 instead of 1/2: top-level conjunctions are split, each conjunct
/// `1 ^ X` is reduced to `X`, and sums of 0-1 atoms with integer coefficients
/// have their constant rounded. Conjuncts that do not fit that shape become
/// `t - 1/2`.
pub fn translate_fol_simplified(f: &FolFormula) -> Formula {
    let mut conjuncts = Vec::new();
    split_and(f, &mut conjuncts);
    Formula::min_all(conjuncts.into_iter().map(simplify_conjunct)).expect("at least one conjunct")
}

fn split_and<'a>(f: &'a FolFormula, out: &mut Vec<&'a FolFormula>) {
    match f {
        FolFormula::And(a, b) => {
            split_and(a, out);
            split_and(b, out);
        }
        other => out.push(other),
    }
}

fn simplify_conjunct(f: &FolFormula) -> Formula {
    let t = translate_fol(f, TranslationMode::B);
    // `1 ^ X` against 1/2 has the sign of `X - 1/2`.
    let body = match &t {
        Formula::Min(a, b) if matches!(**a, Formula::Atom(Atom::Scalar(ref c)) if c.is_one()) => (**b).clone(),
        _ => t.clone(),
    };
    if let Some(clause) = crate::normal::as_sum_clause(&body) {
        let integral = clause.literals.iter().all(|l| l.coeff.is_integer())
            && clause.constant().is_integer();
        if integral {
            // X - 1/2 >= 0 iff X - 1 >= 0 for integer-valued X.
            let shifted = clause.plus(&crate::ast::SumClause::new(vec![crate::ast::Literal::constant(qi(-1))]));
            let mut s = shifted.simplified();
            s.literals.sort_by_key(|l| match &l.atom {
                Atom::Scalar(_) => 2,
                Atom::Pred(_) if l.coeff > Q::zero() => 0,
                Atom::Pred(_) => 1,
            });
            return s.to_formula();
        }
    }
    Formula::sub(t, Formula::scalar(q(1, 2)))
}

/// Text for the constant `nil`, exported for callers that build terms.
pub fn nil_term() -> Term {
    Term::constant(NIL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_declarations() {
        let p = parse_problem("pred x/1 in int[0,8]; fun S/1; sentence x(i) - 2*x(S(i));").unwrap();
        let d = p.signature.pred("x").unwrap();
        assert_eq!(d.arity, 1);
        assert_eq!(d.range, Range::new(qi(0), qi(8), Sort::Integer));
        assert_eq!(p.signature.funcs["S"], 1);
        assert_eq!(p.sentence.to_string(), "x(i) - 2*x(S(i))");
        assert_eq!(p.sentence.free_vars_ordered(), vec!["i".to_string()]);
    }

    #[test]
    fn constant_sentence() {
        let p = parse_problem("sentence 3;").unwrap();
        assert_eq!(p.sentence, Formula::scalar(qi(3)));
    }

    #[test]
    fn min_binds_tighter_than_max() {
        let p = parse_problem(
            "pred p/1 in int[0,1]; pred q/1 in int[0,1]; pred r/1 in int[0,1]; sentence p(x) ^ q(x) v r(x);",
        )
        .unwrap();
        let px = || Formula::pred("p", vec![Term::var("x")]);
        let qx = || Formula::pred("q", vec![Term::var("x")]);
        let rx = || Formula::pred("r", vec![Term::var("x")]);
        assert_eq!(p.sentence, Formula::max(Formula::min(px(), qx()), rx()));
    }

    #[test]
    fn arity_error_has_position() {
        let err = parse_problem("pred p/1 in int[0,1];\nsentence p(A, B);").unwrap_err();
        assert_eq!((err.line, err.col), (2, 10));
        assert!(matches!(err.kind, ParseErrorKind::Arity { .. }));
    }

    #[test]
    fn undeclared_and_unbounded() {
        let err = parse_problem("sentence q(x);").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Undeclared { .. }));
        let err = parse_problem("pred p/0; sentence p;").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        let err = parse_problem("pred p/0 in int[2,1]; sentence p;").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Range(_)));
        let err = parse_problem("sentence 1 $ 2;").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Lexical(_)));
    }

    #[test]
    fn nonlinear_product_rejected() {
        let err = parse_problem("pred p/0 in int[0,1]; sentence p * p;").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn scalars_and_negation() {
        let sig = parse_problem("pred p/0 in real[0,1]; sentence 0;").unwrap().signature;
        assert_eq!(parse_formula("-1/2", &sig).unwrap(), Formula::scalar(q(-1, 2)));
        assert_eq!(parse_formula("-(1/2)", &sig).unwrap(), Formula::scalar(q(1, 2)).neg());
        assert_eq!(parse_formula("p*3", &sig).unwrap(), Formula::scale(qi(3), Formula::pred("p", vec![])));
        assert_eq!(parse_formula("0.25*p", &sig).unwrap(), Formula::scale(q(1, 4), Formula::pred("p", vec![])));
        assert_eq!(
            parse_formula("1 - -p", &sig).unwrap(),
            Formula::sub(Formula::scalar(qi(1)), Formula::pred("p", vec![]).neg())
        );
    }

    #[test]
    fn concrete_directives() {
        let p = parse_problem(
            "pred x/1 in int[0,8]; fun S/1; objects 1, 2; fun S(1) = 2; fun S(2) = 2; sentence x(1) - 1; threshold 1/2;",
        )
        .unwrap();
        assert_eq!(p.objects.as_deref(), Some(&["1".to_string(), "2".to_string()][..]));
        assert_eq!(p.function_table["S"][&vec!["1".to_string()]], "2");
        assert_eq!(p.threshold, Some(q(1, 2)));
    }

    fn eagle_fol() -> FolFile {
        parse_fol(
            "pred bird/1; pred flies/1; pred eagle/1; fun father/1; fun Stanley/0;
             formula (bird(x) -> flies(x)) & (eagle(y) -> bird(y)) & (eagle(z) -> eagle(father(z))) & eagle(Stanley);",
        )
        .unwrap()
    }

    #[test]
    fn translation_table_rows() {
        let p = FolFormula::atom("P", vec![]);
        assert_eq!(translate_fol(&FolFormula::True, TranslationMode::A), Formula::scalar(qi(1)));
        assert_eq!(translate_fol(&FolFormula::True, TranslationMode::B), Formula::scalar(qi(1)));
        assert_eq!(translate_fol(&FolFormula::False, TranslationMode::A), Formula::scalar(qi(-1)));
        assert_eq!(translate_fol(&FolFormula::False, TranslationMode::B), Formula::scalar(qi(0)));
        assert_eq!(translate_fol(&p.clone().not(), TranslationMode::A).to_string(), "-(2*P - 1)");
        assert_eq!(translate_fol(&p.clone().not(), TranslationMode::B).to_string(), "1 - P");
        let q_ = FolFormula::atom("Q", vec![]);
        assert_eq!(translate_fol(&FolFormula::or(p.clone(), q_.clone()), TranslationMode::A).to_string(), "2*P - 1 v 2*Q - 1");
        assert_eq!(translate_fol(&FolFormula::or(p, q_), TranslationMode::B).to_string(), "1 ^ P + Q");
    }

    #[test]
    fn eagle_simplified_translation() {
        let f = eagle_fol();
        let t = translate_fol_simplified(&f.formula);
        assert_eq!(
            t.to_string(),
            "flies(x) - bird(x) ^ bird(y) - eagle(y) ^ eagle(father(z)) - eagle(z) ^ eagle(Stanley) - 1"
        );
    }

    #[test]
    fn fol_precedence() {
        let f = parse_fol("pred p/0; pred q/0; pred r/0; formula ~p & q | r -> p;").unwrap();
        let p = || FolFormula::atom("p", vec![]);
        let q_ = || FolFormula::atom("q", vec![]);
        let r = || FolFormula::atom("r", vec![]);
        assert_eq!(
            f.formula,
            FolFormula::implies(FolFormula::or(FolFormula::and(p().not(), q_()), r()), p())
        );
    }
}
