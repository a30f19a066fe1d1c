//! Typed terms over Bool/Int/Real, built from s-expressions.

use crate::sexpr::Sexp;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

impl Sort {
    pub fn parse(s: &Sexp) -> Result<Sort, String> {
        match s.as_atom() {
            Some("Bool") => Ok(Sort::Bool),
            Some("Int") => Ok(Sort::Int),
            Some("Real") => Ok(Sort::Real),
            _ => Err(format!("unsupported sort {}", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(String),
    True,
    False,
    Num(BigRational),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    IteB(Box<Term>, Box<Term>, Box<Term>),
    EqB(Box<Term>, Box<Term>),
    Cmp(Cmp, Box<Term>, Box<Term>),
    Add(Vec<Term>),
    Sub(Vec<Term>),
    Mul(Vec<Term>),
    Neg(Box<Term>),
    IteN(Box<Term>, Box<Term>, Box<Term>),
}

fn parse_numeral(s: &str) -> Option<BigRational> {
    if let Ok(i) = BigInt::from_str(s) {
        return Some(BigRational::from_integer(i));
    }
    // decimal like 1.5 or 0.125
    if let Some(dot) = s.find('.') {
        let (int_part, frac_part) = (&s[..dot], &s[dot + 1..]);
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int_part.starts_with('-');
        let int_abs = int_part.trim_start_matches('-');
        if !int_abs.bytes().all(|b| b.is_ascii_digit()) || int_abs.is_empty() {
            return None;
        }
        let digits = format!("{}{}", int_abs, frac_part);
        let num = BigInt::from_str(&digits).ok()?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        let q = BigRational::new(num, den);
        return Some(if neg { -q } else { q });
    }
    None
}

/// Builds a typed term from an s-expression given variable sorts.
pub fn term_of_sexp(s: &Sexp, vars: &BTreeMap<String, Sort>) -> Result<Term, String> {
    match s {
        Sexp::Atom(a) => {
            if a == "true" {
                return Ok(Term::True);
            }
            if a == "false" {
                return Ok(Term::False);
            }
            if let Some(q) = parse_numeral(a) {
                return Ok(Term::Num(q));
            }
            if vars.contains_key(a) {
                return Ok(Term::Var(a.clone()));
            }
            Err(format!("unknown symbol {}", a))
        }
        Sexp::List(items) => {
            if items.is_empty() {
                return Err("empty application".into());
            }
            let head = items[0]
                .as_atom()
                .ok_or_else(|| format!("non-atomic head in {}", s))?;
            let args: Vec<Term> = items[1..]
                .iter()
                .map(|x| term_of_sexp(x, vars))
                .collect::<Result<_, _>>()?;
            match head {
                "not" => {
                    expect_arity(&args, 1, head)?;
                    Ok(Term::Not(Box::new(args.into_iter().next().unwrap())))
                }
                "and" => Ok(Term::And(args)),
                "or" => Ok(Term::Or(args)),
                "=>" => {
                    if args.len() < 2 {
                        return Err("=> needs two arguments".into());
                    }
                    // right-associative chain
                    let mut it = args.into_iter().rev();
                    let mut acc = it.next().unwrap();
                    for a in it {
                        acc = Term::Implies(Box::new(a), Box::new(acc));
                    }
                    Ok(acc)
                }
                "ite" => {
                    expect_arity(&args, 3, head)?;
                    let mut it = args.into_iter();
                    let c = it.next().unwrap();
                    let t = it.next().unwrap();
                    let e = it.next().unwrap();
                    if is_boolish(&t, vars) {
                        Ok(Term::IteB(Box::new(c), Box::new(t), Box::new(e)))
                    } else {
                        Ok(Term::IteN(Box::new(c), Box::new(t), Box::new(e)))
                    }
                }
                "=" => {
                    expect_arity(&args, 2, head)?;
                    let mut it = args.into_iter();
                    let a = it.next().unwrap();
                    let b = it.next().unwrap();
                    if is_boolish(&a, vars) || is_boolish(&b, vars) {
                        Ok(Term::EqB(Box::new(a), Box::new(b)))
                    } else {
                        Ok(Term::Cmp(Cmp::Eq, Box::new(a), Box::new(b)))
                    }
                }
                "<=" | "<" | ">=" | ">" => {
                    expect_arity(&args, 2, head)?;
                    let op = match head {
                        "<=" => Cmp::Le,
                        "<" => Cmp::Lt,
                        ">=" => Cmp::Ge,
                        _ => Cmp::Gt,
                    };
                    let mut it = args.into_iter();
                    Ok(Term::Cmp(
                        op,
                        Box::new(it.next().unwrap()),
                        Box::new(it.next().unwrap()),
                    ))
                }
                "+" => Ok(Term::Add(args)),
                "-" => {
                    if args.len() == 1 {
                        Ok(Term::Neg(Box::new(args.into_iter().next().unwrap())))
                    } else {
                        Ok(Term::Sub(args))
                    }
                }
                "*" => Ok(Term::Mul(args)),
                "/" => {
                    expect_arity(&args, 2, head)?;
                    match (&args[0], &args[1]) {
                        (Term::Num(a), Term::Num(b)) => {
                            if b.is_zero() {
                                Err("division by zero".into())
                            } else {
                                Ok(Term::Num(a / b))
                            }
                        }
                        (_, Term::Num(b)) => {
                            if b.is_zero() {
                                Err("division by zero".into())
                            } else {
                                Ok(Term::Mul(vec![
                                    Term::Num(BigRational::one() / b),
                                    args[0].clone(),
                                ]))
                            }
                        }
                        _ => Err("non-constant divisor".into()),
                    }
                }
                "to_real" | "to-real" => {
                    expect_arity(&args, 1, head)?;
                    Ok(args.into_iter().next().unwrap())
                }
                "abs" => {
                    expect_arity(&args, 1, head)?;
                    let a = args.into_iter().next().unwrap();
                    let zero = Term::Num(BigRational::zero());
                    Ok(Term::IteN(
                        Box::new(Term::Cmp(Cmp::Ge, Box::new(a.clone()), Box::new(zero))),
                        Box::new(a.clone()),
                        Box::new(Term::Neg(Box::new(a))),
                    ))
                }
                _ => Err(format!("unsupported operator {}", head)),
            }
        }
    }
}

fn expect_arity(args: &[Term], n: usize, head: &str) -> Result<(), String> {
    if args.len() != n {
        Err(format!("{} expects {} arguments", head, n))
    } else {
        Ok(())
    }
}

fn is_boolish(t: &Term, vars: &BTreeMap<String, Sort>) -> bool {
    match t {
        Term::True | Term::False | Term::Not(_) | Term::And(_) | Term::Or(_) => true,
        Term::Implies(..) | Term::EqB(..) | Term::Cmp(..) => true,
        Term::IteB(..) => true,
        Term::Var(v) => vars.get(v) == Some(&Sort::Bool),
        _ => false,
    }
}
