//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

mod common;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use common::*;
use fop_core::ast::{Formula, Substitution, Term};
use fop_core::eval::{brute_force_value, evaluate, BruteForceConfig, EvalError, Model, ModelSpace, Valuation};
use fop_core::exec::Exec;
use fop_core::ground::{concrete_epigraph, concrete_value, naive_infer, NaiveConfig, NaiveOutcome};
use fop_core::lifted::{
    entailment_refutand, entails, lift_naive_certificate, lifted_cut, verify_trace, CutRequest, Outcome, Pick,
    RefuteConfig, Side,
};
use fop_core::milp::{milp_decide_traced, milp_optimize_traced, Decision, Optimization};
use fop_core::normal::{epsilon_of, is_integer_fragment, normalize, to_min_normal};
use fop_core::parser::{parse_formula, parse_problem, parse_term, translate_fol, TranslationMode};
use fop_core::rational::{q, qi};
use fop_core::Q;
use rand::Rng;
use num_traits::Zero;

const DOUBLING: &str = "pred x/1 in int[0,8]; fun S/1; sentence x(i) - 2*x(S(i));";
const EAGLE: &str = "pred bird/1 in int[0,1]; pred flies/1 in int[0,1]; pred eagle/1 in int[0,1];
    fun father/1; fun Stanley/0;
    sentence (flies(x) - bird(x)) ^ (bird(y) - eagle(y)) ^ (eagle(father(z)) - eagle(z)) ^ (eagle(Stanley) - 1);";
const SCHEMA: &str = "pred x/1 in int[0,8]; fun S/1;
    objects 1, 2, 3, 4; fun S(1) = 2; fun S(2) = 3; fun S(3) = 4; fun S(4) = 4;
    sentence x(1) + 16*(0 ^ !i. (x(i) - 2*x(S(i))));";

const LIMIT_C1: Duration = Duration::from_secs(5);
const LIMIT_C2: Duration = Duration::from_secs(30);
const LIMIT_C3: Duration = Duration::from_secs(5);

/// Seeds for the generated suites.
const SEED_FOL: u64 = 4;
const SEED_NORMAL: u64 = 6;
const SEED_MILP: u64 = 7;
const SEED_EPS: u64 = 8;
const SEED_LIFT: u64 = 9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn oracle_cfg(exec: Exec) -> BruteForceConfig {
    BruteForceConfig { cap: 1 << 20, real_grid: None, exec }
}

fn cut_request_as_stated(sig: &fop_core::Signature) -> CutRequest {
    let t = |s: &str| parse_term(s, sig).unwrap();
    let picks = ["j", "k", "l", "m"]
        .iter()
        .map(|v| Pick::Clause { clause: 0, vars: vec![v.to_string()] })
        .chain(std::iter::once(Pick::Implicit { pred: "x".into(), side: Side::Upper, vars: vec!["n".into()] }))
        .collect();
    let substitution = Substitution::from_pairs([
        ("j".to_string(), t("i")),
        ("k".to_string(), t("S(i)")),
        ("l".to_string(), t("S(S(i))")),
        ("m".to_string(), t("S(S(S(i)))")),
        ("n".to_string(), t("i")),
    ])
    .unwrap();
    CutRequest {
        picks,
        substitution,
        lambda: [1, 2, 4, 8, 1].iter().map(|&k| q(k, 16)).collect(),
        weakening: Vec::new(),
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let p = parse_problem(DOUBLING).unwrap();
    let r = normalize(&p.sentence, &p.signature);
    let cut = lifted_cut(&r, &cut_request_as_stated(&p.signature));
    let expected = "-x(S(S(S(i1))))";
    let got = match &cut {
        Ok(c) => c.clause.to_string(),
        Err(e) => format!("error {e}"),
    };
    let q3 = parse_formula("-x(S(S(S(i))))", &p.signature).unwrap();
    let cfg = RefuteConfig { cut_budget: 50, ..Default::default() };
    let proved = match entails(&p.sentence, &q3, &p.signature, &cfg) {
        Ok(Outcome::Proved(t)) => {
            let refutand = entailment_refutand(&p.sentence, &q3, &p.signature).unwrap();
            verify_trace(&refutand, &p.signature, &t).is_ok()
        }
        _ => false,
    };
    let elapsed = start.elapsed();
    verdict(
        got == expected && proved && elapsed < LIMIT_C1,
        format!("cut {got} (expected {expected}); third-successor entailment proved: {proved}; {elapsed:.2?}"),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let p = parse_problem(EAGLE).unwrap();
    let query = parse_formula("flies(father(Stanley)) - 1", &p.signature).unwrap();
    let cfg = RefuteConfig { cut_budget: 200, ..Default::default() };
    let (proved, verified, steps) = match entails(&p.sentence, &query, &p.signature, &cfg) {
        Ok(Outcome::Proved(t)) => {
            let refutand = entailment_refutand(&p.sentence, &query, &p.signature).unwrap();
            (true, verify_trace(&refutand, &p.signature, &t).is_ok(), t.steps.len())
        }
        _ => (false, false, 0),
    };
    let elapsed = start.elapsed();
    verdict(
        proved && verified && elapsed < LIMIT_C2,
        format!("proved {proved}, verified {verified}, {steps} cut steps, {elapsed:.2?}"),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let p = parse_problem(SCHEMA).unwrap();
    let v = concrete_value(&p, 500).unwrap();
    let c = concrete_epigraph(&p).unwrap();
    let mut point = vec![Q::zero(); c.problem.atoms.len()];
    for (k, a) in c.problem.atoms.iter().enumerate() {
        point[k] = match a.to_string().as_str() {
            "x(1)" => qi(8),
            "x(2)" => qi(4),
            "x(3)" => qi(2),
            "x(4)" => qi(0),
            _ => v.value.clone(),
        };
    }
    let witness = c.problem.milp.is_feasible_point(&point);
    let elapsed = start.elapsed();
    verdict(
        v.value == qi(8) && witness && elapsed < LIMIT_C3,
        format!("value {}, witness (8,4,2,0) feasible {witness}, {elapsed:.2?}", v.value),
    )
}

fn criterion_4() -> Verdict {
    let mut r = rng(SEED_FOL);
    let cfg = oracle_cfg(Exec::default());
    let mut checks = 0;
    let mut bad = Vec::new();
    for i in 0..200 {
        let c = random_fol(&mut r);
        for n in 1..=2 {
            let sat = fol_satisfiable(&c, n);
            for mode in [TranslationMode::A, TranslationMode::B] {
                let f = translate_fol(&c.formula, mode);
                let v = brute_force_value(&f, &c.signature, n, &cfg).unwrap();
                checks += 1;
                if (v >= mode.threshold()) != sat {
                    bad.push(format!("#{i} n={n} {mode:?}"));
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checks} checks, {} discrepancies {:?}", bad.len(), bad.iter().take(5).collect::<Vec<_>>()))
}

fn criterion_5() -> Verdict {
    let mut checks = 0;
    let mut bad = 0;
    for n in 1..=6usize {
        let sig = {
            let p = parse_problem("pred p/1 in int[0,1]; sentence 0;").unwrap();
            p.signature
        };
        let objects: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
        let val: Valuation = (1..=n).map(|k| (format!("x{k}"), k.to_string())).collect();
        for k in 0..=n {
            let sum = (1..=n)
                .map(|j| Formula::pred("p", vec![Term::var(format!("x{j}"))]))
                .reduce(Formula::add)
                .unwrap();
            let f = Formula::sub(sum, Formula::scalar(qi(k as i64)));
            sig.check(&f).unwrap();
            for table in 0u32..(1 << n) {
                let mut m = Model::new(objects.clone());
                for (j, o) in objects.iter().enumerate() {
                    m.set_pred("p", &[o], qi(((table >> j) & 1) as i64));
                }
                let v = evaluate(&f, &m, &val).unwrap();
                checks += 1;
                if (v >= Q::zero()) != (table.count_ones() as usize >= k) {
                    bad += 1;
                }
            }
        }
    }
    verdict(bad == 0, format!("{checks} tables, {bad} discrepancies"))
}

fn criterion_6() -> Verdict {
    let mut r = rng(SEED_NORMAL);
    let cfg = oracle_cfg(Exec::default());
    let (mut done, mut skipped, mut attempts) = (0, 0, 0);
    let mut bad = Vec::new();
    while done < 100 && attempts < 2000 {
        attempts += 1;
        let sig = fop_signature(r.gen_bool(0.3));
        let s = random_fop(&mut r, &sig, false).close_inf();
        let m = to_min_normal(&s, &sig);
        let mf = m.to_formula().close_inf();
        let red = normalize(&s, &sig);
        let rf = red.to_formula().close_inf();
        let mut rows = Vec::new();
        let mut capped = false;
        for n in 1..=2 {
            let vals = (
                brute_force_value(&s, &sig, n, &cfg),
                brute_force_value(&mf, &m.signature, n, &cfg),
                brute_force_value(&rf, &red.signature, n, &cfg),
            );
            match vals {
                (Ok(a), Ok(b), Ok(c)) => rows.push((n, a, b, c)),
                (Err(EvalError::CapExceeded { .. }), _, _)
                | (_, Err(EvalError::CapExceeded { .. }), _)
                | (_, _, Err(EvalError::CapExceeded { .. })) => capped = true,
                other => panic!("oracle error on {}: {other:?}", s.to_ascii()),
            }
        }
        if capped {
            skipped += 1;
            continue;
        }
        done += 1;
        for (n, a, b, c) in rows {
            if a != b || (a >= Q::zero()) != (c >= Q::zero()) {
                bad.push(format!("{} n={n}: {a} {b} {c}", s.to_ascii()));
            }
        }
    }
    verdict(
        done == 100 && bad.is_empty(),
        format!("{done} sentences, {skipped} over cap, {} discrepancies {:?}", bad.len(), bad.first()),
    )
}


fn criterion_7() -> Verdict {
    let mut r = rng(SEED_MILP);
    let (mut feasible, mut infeasible, mut cuts, mut exhausted) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    for i in 0..500 {
        let p = random_milp(&mut r);
        let pts = feasible_points(&p);
        let (d, steps) = milp_decide_traced(&p, 1000);
        let objective: Vec<Q> = (0..p.vars.len()).map(|_| qi(r.gen_range(-3..=3))).collect();
        let (o, osteps) = milp_optimize_traced(&p, &objective, 1000);
        for s in steps.iter().chain(&osteps) {
            cuts += 1;
            if pts.iter().any(|x| !s.cut.holds(x)) {
                bad.push(format!("#{i}: cut excludes a feasible point"));
            }
        }
        match d {
            Decision::Feasible(x) => {
                feasible += 1;
                if !p.is_feasible_point(&x) {
                    bad.push(format!("#{i}: witness infeasible"));
                }
            }
            Decision::Infeasible(cert) => {
                infeasible += 1;
                if !pts.is_empty() || !cert.verify(&p) {
                    bad.push(format!("#{i}: infeasible claim wrong or unverified"));
                }
            }
            Decision::BudgetExhausted => exhausted += 1,
        }
        let best = pts
            .iter()
            .map(|x| x.iter().zip(&objective).map(|(a, b)| a * b).sum::<Q>())
            .max();
        match (o, best) {
            (Optimization::Optimal { value, .. }, Some(b)) if value == b => {}
            (Optimization::Infeasible, None) => {}
            (Optimization::Bounds { .. }, _) => exhausted += 1,
            (o, b) => bad.push(format!("#{i}: optimize {o:?} vs enumeration {b:?}")),
        }
    }
    verdict(
        bad.is_empty() && exhausted == 0,
        format!(
            "{feasible} feasible, {infeasible} infeasible, {cuts} cuts checked, {exhausted} budget exhausted, {} discrepancies {:?}",
            bad.len(),
            bad.first()
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut r = rng(SEED_EPS);
    let cfg = oracle_cfg(Exec::default());
    let (mut done, mut values, mut attempts, mut fractional) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    while done < 100 && attempts < 2000 {
        attempts += 1;
        let sig = fop_signature(r.gen_bool(0.3));
        let s = random_fop(&mut r, &sig, true).close_inf();
        if !is_integer_fragment(&s, &sig) {
            continue;
        }
        let eps = epsilon_of(&s, &sig).unwrap();
        let mut sets = Vec::new();
        for n in 1..=2 {
            match ModelSpace::new(std::slice::from_ref(&s), &sig, n, &cfg).and_then(|m| m.value_set(0, &cfg)) {
                Ok(v) => sets.push(v),
                Err(EvalError::CapExceeded { .. }) => break,
                Err(e) => panic!("{e}"),
            }
        }
        if sets.len() < 2 {
            continue;
        }
        done += 1;
        if eps < qi(1) {
            fractional += 1;
        }
        for v in sets.iter().flatten() {
            values += 1;
            if !(v / &eps).is_integer() {
                bad.push(format!("{}: {v} not a multiple of {eps}", s.to_ascii()));
            }
        }
    }
    verdict(
        done == 100 && bad.is_empty(),
        format!("{done} sentences ({fractional} with fractional spacing), {values} values, {} violations {:?}", bad.len(), bad.first()),
    )
}

/// Lifted traces for the first `count` naive certificates that use at least
/// one cut, as JSON, with a per-certificate verdict.
fn lifting_run(count: usize, exec: Exec) -> Vec<(String, bool, usize)> {
    let mut r = rng(SEED_LIFT);
    let cfg = NaiveConfig { max_depth: 2, max_subproblems: 60, exec, ..Default::default() };
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 5000 {
        attempts += 1;
        let (f, sig) = random_clause_set(&mut r);
        let red = normalize(&f, &sig);
        if let NaiveOutcome::Infeasible(c) = naive_infer(&red, &cfg) {
            if c.certificate.cuts.is_empty() {
                continue;
            }
            let res = match lift_naive_certificate(&f, &sig, &c) {
                Ok(t) => {
                    let ok = t.steps.len() == c.certificate.cuts.len() && verify_trace(&f, &sig, &t).is_ok();
                    (t.to_json(), ok, c.certificate.cuts.len())
                }
                Err(e) => (format!("{}: {e}", f.to_ascii()), false, c.certificate.cuts.len()),
            };
            out.push(res);
        }
    }
    out
}

fn criterion_9() -> Verdict {
    let runs = lifting_run(20, Exec::default());
    let ok = runs.iter().filter(|r| r.1).count();
    let with_cuts = runs.iter().filter(|r| r.2 > 0).count();
    let total: usize = runs.iter().map(|r| r.2).sum();
    let first_bad = runs.iter().find(|r| !r.1).map(|r| r.0.clone());
    verdict(
        runs.len() == 20 && ok == 20,
        format!("{} certificates, {ok} verified, {with_cuts} with cuts ({total} cuts total) {}", runs.len(), first_bad.unwrap_or_default()),
    )
}

/// Every deterministic artifact the suite produces, concatenated.
fn fingerprint(exec: Exec) -> String {
    let mut out = String::new();
    let cfg = RefuteConfig { exec, ..Default::default() };
    let p = parse_problem(EAGLE).unwrap();
    let query = parse_formula("flies(father(Stanley)) - 1", &p.signature).unwrap();
    if let Ok(Outcome::Proved(t)) = entails(&p.sentence, &query, &p.signature, &cfg) {
        out.push_str(&t.to_json());
    }
    let p = parse_problem(DOUBLING).unwrap();
    let q4 = parse_formula("-x(S(S(S(S(i)))))", &p.signature).unwrap();
    let cfg50 = RefuteConfig { cut_budget: 50, ..cfg.clone() };
    writeln!(out, "{:?}", entails(&p.sentence, &q4, &p.signature, &cfg50)).unwrap();
    let r = normalize(&p.sentence, &p.signature);
    writeln!(out, "{:?}", lifted_cut(&r, &cut_request_as_stated(&p.signature))).unwrap();
    let p = parse_problem(SCHEMA).unwrap();
    writeln!(out, "{:?}", concrete_value(&p, 500)).unwrap();
    let mut rm = rng(SEED_MILP);
    for _ in 0..100 {
        let m = random_milp(&mut rm);
        writeln!(out, "{:?}", milp_decide_traced(&m, 1000)).unwrap();
    }
    let bf = oracle_cfg(exec);
    let mut rf = rng(SEED_EPS);
    for _ in 0..30 {
        let sig = fop_signature(false);
        let s = random_fop(&mut rf, &sig, true).close_inf();
        let m = to_min_normal(&s, &sig);
        writeln!(out, "{} | {} | {:?}", s.to_ascii(), m.to_formula().to_ascii(), brute_force_value(&s, &sig, 2, &bf)).unwrap();
    }
    for (json, ok, _) in lifting_run(5, exec) {
        writeln!(out, "{ok} {json}").unwrap();
    }
    out
}

fn criterion_10() -> Verdict {
    let a = fingerprint(Exec::Parallel);
    let b = fingerprint(Exec::Parallel);
    let c = fingerprint(Exec::Sequential);
    verdict(
        a == b && a == c,
        format!("{} bytes; repeat identical {}, sequential identical {}", a.len(), a == b, a == c),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (k, run) in criteria {
        let start = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {k}: {} {} [{:.2?}]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
