//! SMT-LIB2 command interpreter over the solver core.

use crate::sexpr::{Reader, Sexp};
use crate::solver::{solve, LinExpr, ModelVal, Outcome};
use crate::term::{term_of_sexp, Cmp, Sort, Term};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Default)]
struct Frame {
    decls: Vec<String>,
    asserts_len: usize,
    objective_was: Option<Option<Term>>,
}

pub struct Engine {
    vars: BTreeMap<String, Sort>,
    asserts: Vec<Term>,
    frames: Vec<Frame>,
    objective: Option<Term>,
    last_model: Option<BTreeMap<String, ModelVal>>,
}

impl Engine {
    pub fn new() -> Self {
        Engine {
            vars: BTreeMap::new(),
            asserts: Vec::new(),
            frames: Vec::new(),
            objective: None,
            last_model: None,
        }
    }

    /// Runs a chunk of SMT-LIB2 text and returns the printed responses.
    pub fn run(&mut self, text: &str) -> String {
        let mut out = String::new();
        let mut reader = Reader::new(text);
        loop {
            match reader.next() {
                Ok(None) => break,
                Ok(Some(cmd)) => {
                    if let Some(resp) = self.exec(&cmd) {
                        out.push_str(&resp);
                        out.push('\n');
                    }
                }
                Err(e) => {
                    out.push_str(&format!("(error \"{}\")\n", e));
                    break;
                }
            }
        }
        out
    }

    pub fn exec(&mut self, cmd: &Sexp) -> Option<String> {
        let items = match cmd.as_list() {
            Some(i) if !i.is_empty() => i,
            _ => return Some("(error \"malformed command\")".into()),
        };
        let head = items[0].as_atom()?;
        match head {
            "set-logic" | "set-option" | "set-info" => None,
            "echo" => items.get(1).map(|s| s.to_string()),
            "exit" => None,
            "reset" => {
                *self = Engine::new();
                None
            }
            "declare-const" => {
                if items.len() != 3 {
                    return Some("(error \"declare-const arity\")".into());
                }
                self.declare(&items[1], &items[2])
            }
            "declare-fun" => {
                if items.len() != 4 || items[2].as_list().map_or(true, |l| !l.is_empty()) {
                    return Some("(error \"only nullary declare-fun supported\")".into());
                }
                self.declare(&items[1], &items[3])
            }
            "assert" => {
                if items.len() != 2 {
                    return Some("(error \"assert arity\")".into());
                }
                match term_of_sexp(&items[1], &self.vars) {
                    Ok(t) => {
                        self.asserts.push(t);
                        None
                    }
                    Err(e) => Some(format!("(error \"{}\")", e)),
                }
            }
            "minimize" => {
                if items.len() != 2 {
                    return Some("(error \"minimize arity\")".into());
                }
                match term_of_sexp(&items[1], &self.vars) {
                    Ok(t) => {
                        self.objective = Some(t);
                        None
                    }
                    Err(e) => Some(format!("(error \"{}\")", e)),
                }
            }
            "push" => {
                let n = items
                    .get(1)
                    .and_then(|s| s.as_atom())
                    .and_then(|a| a.parse::<usize>().ok())
                    .unwrap_or(1);
                for _ in 0..n {
                    self.frames.push(Frame {
                        decls: Vec::new(),
                        asserts_len: self.asserts.len(),
                        objective_was: Some(self.objective.clone()),
                    });
                }
                None
            }
            "pop" => {
                let n = items
                    .get(1)
                    .and_then(|s| s.as_atom())
                    .and_then(|a| a.parse::<usize>().ok())
                    .unwrap_or(1);
                for _ in 0..n {
                    if let Some(f) = self.frames.pop() {
                        self.asserts.truncate(f.asserts_len);
                        for d in f.decls {
                            self.vars.remove(&d);
                        }
                        if let Some(obj) = f.objective_was {
                            self.objective = obj;
                        }
                    }
                }
                None
            }
            "check-sat" => Some(self.check_sat()),
            "get-model" => Some(self.get_model()),
            _ => Some(format!("(error \"unsupported command {}\")", head)),
        }
    }

    fn declare(&mut self, name: &Sexp, sort: &Sexp) -> Option<String> {
        let n = match name.as_atom() {
            Some(a) => a.to_string(),
            None => return Some("(error \"bad symbol\")".into()),
        };
        let s = match Sort::parse(sort) {
            Ok(s) => s,
            Err(e) => return Some(format!("(error \"{}\")", e)),
        };
        self.vars.insert(n.clone(), s);
        if let Some(f) = self.frames.last_mut() {
            f.decls.push(n);
        }
        None
    }

    fn check_sat(&mut self) -> String {
        self.last_model = None;
        let base = solve(&self.asserts, &self.vars);
        match base {
            Outcome::Unsat => "unsat".into(),
            Outcome::Unknown(r) => {
                let _ = r;
                "unknown".into()
            }
            Outcome::Sat(model) => {
                let improved = match &self.objective {
                    Some(obj) => self.minimize(obj.clone(), model),
                    None => model,
                };
                self.last_model = Some(improved);
                "sat".into()
            }
        }
    }

    /// Geometric probing on the objective: keeps the first model whose
    /// objective value fits the smallest bound in 0,1,2,4,...
    fn minimize(
        &self,
        obj: Term,
        fallback: BTreeMap<String, ModelVal>,
    ) -> BTreeMap<String, ModelVal> {
        let mut bound = BigRational::zero();
        let two = BigRational::from_integer(BigInt::from(2));
        for _ in 0..24 {
            let mut asserts = self.asserts.clone();
            asserts.push(Term::Cmp(
                Cmp::Le,
                Box::new(obj.clone()),
                Box::new(Term::Num(bound.clone())),
            ));
            if let Outcome::Sat(m) = solve(&asserts, &self.vars) {
                return m;
            }
            if bound.is_zero() {
                bound = BigRational::from_integer(BigInt::from(1));
            } else {
                bound = &bound * &two;
            }
        }
        fallback
    }

    fn get_model(&self) -> String {
        match &self.last_model {
            None => "(error \"no model available\")".into(),
            Some(m) => {
                let mut out = String::from("(");
                for (name, val) in m {
                    let sort = self.vars.get(name).copied().unwrap_or(Sort::Real);
                    let sort_s = match sort {
                        Sort::Bool => "Bool",
                        Sort::Int => "Int",
                        Sort::Real => "Real",
                    };
                    let val_s = match val {
                        ModelVal::B(b) => b.to_string(),
                        ModelVal::Q(q) => print_rational(q, sort),
                    };
                    out.push_str(&format!(
                        "\n  (define-fun {} () {} {})",
                        name, sort_s, val_s
                    ));
                }
                out.push_str("\n)");
                out
            }
        }
    }
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

fn print_rational(q: &BigRational, sort: Sort) -> String {
    let print_nonneg = |q: &BigRational| -> String {
        if q.is_integer() {
            match sort {
                Sort::Int => q.numer().to_string(),
                _ => format!("{}.0", q.numer()),
            }
        } else {
            format!("(/ {}.0 {}.0)", q.numer(), q.denom())
        }
    };
    if q.is_negative() {
        format!("(- {})", print_nonneg(&-q))
    } else {
        print_nonneg(q)
    }
}

// keep LinExpr referenced for downstream users of this module
#[allow(dead_code)]
fn _touch(_: Option<LinExpr>) {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sat_unsat_roundtrip() {
        let mut e = Engine::new();
        let out = e.run(
            "(set-logic QF_LIRA)\n(declare-const x Int)\n(assert (>= x 0))\n(assert (<= x (- 1)))\n(check-sat)\n",
        );
        assert_eq!(out.trim(), "unsat");
        let mut e = Engine::new();
        let out = e.run("(declare-const x Int)\n(assert (= x 42))\n(check-sat)\n(get-model)\n");
        assert!(out.starts_with("sat"));
        assert!(out.contains("(define-fun x () Int 42)"));
    }

    #[test]
    fn validity_by_negation() {
        // x=42 => x>=0 is valid, so its negation is unsat
        let mut e = Engine::new();
        let out = e.run(
            "(declare-const x Int)\n(assert (= x 42))\n(assert (not (>= x 0)))\n(check-sat)\n",
        );
        assert_eq!(out.trim(), "unsat");
    }

    #[test]
    fn push_pop() {
        let mut e = Engine::new();
        let out = e.run(
            "(declare-const x Real)\n(push 1)\n(assert (< x 0.0))\n(assert (> x 1.0))\n(check-sat)\n(pop 1)\n(assert (> x (/ 1.0 2.0)))\n(check-sat)\n",
        );
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines, vec!["unsat", "sat"]);
    }

    #[test]
    fn integer_branching() {
        // 2x = 1 has no integer solution but a real one
        let mut e = Engine::new();
        let out = e.run("(declare-const x Int)\n(assert (= (* 2 x) 1))\n(check-sat)\n");
        assert_eq!(out.trim(), "unsat");
        let mut e = Engine::new();
        let out = e.run("(declare-const x Real)\n(assert (= (* 2 x) 1))\n(check-sat)\n");
        assert_eq!(out.trim(), "sat");
    }

    #[test]
    fn ite_and_abs() {
        let mut e = Engine::new();
        let out = e.run(
            "(declare-const x Real)\n(declare-const r Real)\n(assert (= x (- 3.0)))\n(assert (= r (abs (+ x 1.0))))\n(assert (not (= r 2.0)))\n(check-sat)\n",
        );
        assert_eq!(out.trim(), "unsat");
    }

    #[test]
    fn minimize_probing() {
        let mut e = Engine::new();
        let out = e.run(
            "(declare-const x Int)\n(assert (>= x 3))\n(minimize x)\n(check-sat)\n(get-model)\n",
        );
        assert!(out.contains("(define-fun x () Int 3)"), "{}", out);
    }
}
