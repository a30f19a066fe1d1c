//! Satisfiability core: boolean search over linear-arithmetic atoms.

use crate::simplex::{QDelta, Simplex};
use crate::term::{Cmp, Sort, Term};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinExpr {
    pub coef: BTreeMap<String, BigRational>,
    pub konst: BigRational,
}

impl LinExpr {
    fn zero() -> Self {
        LinExpr {
            coef: BTreeMap::new(),
            konst: BigRational::zero(),
        }
    }

    fn constant(q: BigRational) -> Self {
        LinExpr {
            coef: BTreeMap::new(),
            konst: q,
        }
    }

    fn var(v: &str) -> Self {
        let mut coef = BTreeMap::new();
        coef.insert(v.to_string(), BigRational::from_integer(BigInt::from(1)));
        LinExpr {
            coef,
            konst: BigRational::zero(),
        }
    }

    fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coef {
            let e = out
                .coef
                .entry(v.clone())
                .or_insert_with(BigRational::zero);
            *e += c;
        }
        out.konst += &other.konst;
        out.coef.retain(|_, c| !c.is_zero());
        out
    }

    fn scale(&self, k: &BigRational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coef: self.coef.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            konst: &self.konst * k,
        }
    }

    fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(&BigRational::from_integer(BigInt::from(-1))))
    }

    fn is_constant(&self) -> bool {
        self.coef.is_empty()
    }

    pub fn eval(&self, model: &BTreeMap<String, BigRational>) -> BigRational {
        let mut acc = self.konst.clone();
        for (v, c) in &self.coef {
            let x = model.get(v).cloned().unwrap_or_else(BigRational::zero);
            acc += c * x;
        }
        acc
    }
}

/// Rewrites numeric ites away by splitting the enclosing comparison.
fn lift_ites(t: &Term) -> Term {
    match t {
        Term::Not(a) => Term::Not(Box::new(lift_ites(a))),
        Term::And(xs) => Term::And(xs.iter().map(lift_ites).collect()),
        Term::Or(xs) => Term::Or(xs.iter().map(lift_ites).collect()),
        Term::Implies(a, b) => Term::Implies(Box::new(lift_ites(a)), Box::new(lift_ites(b))),
        Term::IteB(c, a, b) => Term::IteB(
            Box::new(lift_ites(c)),
            Box::new(lift_ites(a)),
            Box::new(lift_ites(b)),
        ),
        Term::EqB(a, b) => Term::EqB(Box::new(lift_ites(a)), Box::new(lift_ites(b))),
        Term::Cmp(op, l, r) => {
            if let Some((c, tl, el)) = split_first_ite(l) {
                let then_t = Term::Cmp(*op, Box::new(tl), r.clone());
                let else_t = Term::Cmp(*op, Box::new(el), r.clone());
                return lift_ites(&Term::IteB(c, Box::new(then_t), Box::new(else_t)));
            }
            if let Some((c, tr, er)) = split_first_ite(r) {
                let then_t = Term::Cmp(*op, l.clone(), Box::new(tr));
                let else_t = Term::Cmp(*op, l.clone(), Box::new(er));
                return lift_ites(&Term::IteB(c, Box::new(then_t), Box::new(else_t)));
            }
            t.clone()
        }
        _ => t.clone(),
    }
}

/// Finds the first numeric ite in a numeric term; returns (condition,
/// term-with-then-branch, term-with-else-branch).
fn split_first_ite(t: &Term) -> Option<(Box<Term>, Term, Term)> {
    match t {
        Term::IteN(c, a, b) => Some((c.clone(), (**a).clone(), (**b).clone())),
        Term::Add(xs) | Term::Sub(xs) | Term::Mul(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if let Some((c, xt, xe)) = split_first_ite(x) {
                    let mut then_xs = xs.clone();
                    then_xs[i] = xt;
                    let mut else_xs = xs.clone();
                    else_xs[i] = xe;
                    let rebuild = |v: Vec<Term>| match t {
                        Term::Add(_) => Term::Add(v),
                        Term::Sub(_) => Term::Sub(v),
                        _ => Term::Mul(v),
                    };
                    return Some((c, rebuild(then_xs), rebuild(else_xs)));
                }
            }
            None
        }
        Term::Neg(x) => {
            let (c, xt, xe) = split_first_ite(x)?;
            Some((c, Term::Neg(Box::new(xt)), Term::Neg(Box::new(xe))))
        }
        _ => None,
    }
}

fn linearize(t: &Term) -> Result<LinExpr, String> {
    match t {
        Term::Var(v) => Ok(LinExpr::var(v)),
        Term::Num(q) => Ok(LinExpr::constant(q.clone())),
        Term::Add(xs) => {
            let mut acc = LinExpr::zero();
            for x in xs {
                acc = acc.add(&linearize(x)?);
            }
            Ok(acc)
        }
        Term::Sub(xs) => {
            if xs.is_empty() {
                return Err("empty subtraction".into());
            }
            let mut acc = linearize(&xs[0])?;
            for x in &xs[1..] {
                acc = acc.sub(&linearize(x)?);
            }
            Ok(acc)
        }
        Term::Neg(x) => Ok(LinExpr::zero().sub(&linearize(x)?)),
        Term::Mul(xs) => {
            let parts: Vec<LinExpr> = xs.iter().map(linearize).collect::<Result<_, _>>()?;
            let mut acc = LinExpr::constant(BigRational::from_integer(BigInt::from(1)));
            for p in parts {
                if acc.is_constant() {
                    acc = p.scale(&acc.konst);
                } else if p.is_constant() {
                    acc = acc.scale(&p.konst);
                } else {
                    return Err("nonlinear multiplication".into());
                }
            }
            Ok(acc)
        }
        _ => Err(format!("cannot linearize {:?}", t)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    BoolVar(String),
    /// expr `rel` 0 with rel in {Le, Lt, Eq}
    Lin(Cmp, Vec<(String, BigRational)>, BigRational),
}

#[derive(Clone, Debug)]
pub enum Nnf {
    True,
    False,
    Lit(usize, bool),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

pub struct Interner {
    atoms: Vec<Atom>,
    index: BTreeMap<Atom, usize>,
}

impl Interner {
    pub fn new() -> Self {
        Interner {
            atoms: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn intern(&mut self, a: Atom) -> usize {
        if let Some(i) = self.index.get(&a) {
            return *i;
        }
        let i = self.atoms.len();
        self.atoms.push(a.clone());
        self.index.insert(a, i);
        i
    }
}

impl Default for Interner {
    fn default() -> Self {
        Self::new()
    }
}

fn atom_of_cmp(op: Cmp, l: &Term, r: &Term, intern: &mut Interner) -> Result<(usize, bool), String> {
    let le = linearize(l)?;
    let re = linearize(r)?;
    // normalize to expr rel 0
    let (expr, rel, pos) = match op {
        Cmp::Le => (le.sub(&re), Cmp::Le, true),
        Cmp::Lt => (le.sub(&re), Cmp::Lt, true),
        Cmp::Ge => (re.sub(&le), Cmp::Le, true),
        Cmp::Gt => (re.sub(&le), Cmp::Lt, true),
        Cmp::Eq => (le.sub(&re), Cmp::Eq, true),
    };
    let coef: Vec<(String, BigRational)> =
        expr.coef.iter().map(|(v, c)| (v.clone(), c.clone())).collect();
    if coef.is_empty() {
        // ground truth
        let k = &expr.konst;
        let truth = match rel {
            Cmp::Le => !k.is_positive(),
            Cmp::Lt => k.is_negative(),
            Cmp::Eq => k.is_zero(),
            _ => unreachable!(),
        };
        // encode as trivial atom via 0 <= 0 / 0 < 0
        let a = if truth {
            Atom::Lin(Cmp::Le, Vec::new(), BigRational::zero())
        } else {
            Atom::Lin(Cmp::Lt, Vec::new(), BigRational::zero())
        };
        return Ok((intern.intern(a), pos));
    }
    Ok((intern.intern(Atom::Lin(rel, coef, expr.konst)), pos))
}

fn nnf_of(t: &Term, pos: bool, intern: &mut Interner) -> Result<Nnf, String> {
    match t {
        Term::True => Ok(if pos { Nnf::True } else { Nnf::False }),
        Term::False => Ok(if pos { Nnf::False } else { Nnf::True }),
        Term::Var(v) => Ok(Nnf::Lit(intern.intern(Atom::BoolVar(v.clone())), pos)),
        Term::Not(a) => nnf_of(a, !pos, intern),
        Term::And(xs) => {
            let parts: Vec<Nnf> = xs
                .iter()
                .map(|x| nnf_of(x, pos, intern))
                .collect::<Result<_, _>>()?;
            Ok(if pos { Nnf::And(parts) } else { Nnf::Or(parts) })
        }
        Term::Or(xs) => {
            let parts: Vec<Nnf> = xs
                .iter()
                .map(|x| nnf_of(x, pos, intern))
                .collect::<Result<_, _>>()?;
            Ok(if pos { Nnf::Or(parts) } else { Nnf::And(parts) })
        }
        Term::Implies(a, b) => {
            let na = nnf_of(a, !pos, intern)?;
            let nb = nnf_of(b, pos, intern)?;
            Ok(if pos {
                Nnf::Or(vec![na, nb])
            } else {
                // ¬(a → b) = a ∧ ¬b ; here na = nnf(a, false)… recompute properly
                let pa = nnf_of(a, true, intern)?;
                Nnf::And(vec![pa, nb])
            })
        }
        Term::IteB(c, a, b) => {
            let pc = nnf_of(c, true, intern)?;
            let nc = nnf_of(c, false, intern)?;
            let ta = nnf_of(a, pos, intern)?;
            let eb = nnf_of(b, pos, intern)?;
            Ok(if pos {
                Nnf::Or(vec![Nnf::And(vec![pc, ta]), Nnf::And(vec![nc, eb])])
            } else {
                Nnf::And(vec![Nnf::Or(vec![nc, ta]), Nnf::Or(vec![pc, eb])])
            })
        }
        Term::EqB(a, b) => {
            let expanded = Term::And(vec![
                Term::Implies(a.clone(), b.clone()),
                Term::Implies(b.clone(), a.clone()),
            ]);
            nnf_of(&expanded, pos, intern)
        }
        Term::Cmp(op, l, r) => {
            let (atom, p) = atom_of_cmp(*op, l, r, intern)?;
            Ok(Nnf::Lit(atom, p == pos))
        }
        _ => Err(format!("non-boolean term in formula position: {:?}", t)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelVal {
    B(bool),
    Q(BigRational),
}

pub enum Outcome {
    Sat(BTreeMap<String, ModelVal>),
    Unsat,
    Unknown(String),
}

enum Status {
    True,
    False,
    Unit(usize, bool),
    Open(usize, bool),
}

fn status(n: &Nnf, assign: &[Option<bool>]) -> Status {
    match n {
        Nnf::True => Status::True,
        Nnf::False => Status::False,
        Nnf::Lit(a, p) => match assign[*a] {
            Some(v) => {
                if v == *p {
                    Status::True
                } else {
                    Status::False
                }
            }
            None => Status::Unit(*a, *p),
        },
        Nnf::And(xs) => {
            let mut pending: Option<Status> = None;
            let mut npending = 0;
            for x in xs {
                match status(x, assign) {
                    Status::False => return Status::False,
                    Status::True => {}
                    s => {
                        npending += 1;
                        if pending.is_none() {
                            pending = Some(s);
                        }
                    }
                }
            }
            match (npending, pending) {
                (0, _) => Status::True,
                (1, Some(s)) => s,
                (_, Some(s)) => match s {
                    Status::Unit(a, p) | Status::Open(a, p) => Status::Open(a, p),
                    other => other,
                },
                _ => Status::True,
            }
        }
        Nnf::Or(xs) => {
            let mut pending: Option<Status> = None;
            let mut npending = 0;
            for x in xs {
                match status(x, assign) {
                    Status::True => return Status::True,
                    Status::False => {}
                    s => {
                        npending += 1;
                        if pending.is_none() {
                            pending = Some(s);
                        }
                    }
                }
            }
            match (npending, pending) {
                (0, _) => Status::False,
                (1, Some(s)) => s,
                (_, Some(s)) => match s {
                    Status::Unit(a, p) | Status::Open(a, p) => Status::Open(a, p),
                    other => other,
                },
                _ => Status::False,
            }
        }
    }
}

pub struct Problem<'a> {
    pub atoms: &'a [Atom],
    pub asserts: &'a [Nnf],
    pub var_sorts: &'a BTreeMap<String, Sort>,
}

const MAX_NODES: usize = 200_000;
const MAX_BB_NODES: usize = 4_000;

pub struct Search<'a> {
    prob: Problem<'a>,
    nodes: usize,
    exhausted_budget: bool,
}

impl<'a> Search<'a> {
    pub fn new(prob: Problem<'a>) -> Self {
        Search {
            prob,
            nodes: 0,
            exhausted_budget: false,
        }
    }

    pub fn run(&mut self) -> Outcome {
        let mut assign: Vec<Option<bool>> = vec![None; self.prob.atoms.len()];
        match self.search(&mut assign) {
            Some(model) => Outcome::Sat(model),
            None => {
                if self.exhausted_budget {
                    Outcome::Unknown("search budget exhausted".into())
                } else {
                    Outcome::Unsat
                }
            }
        }
    }

    fn search(&mut self, assign: &mut Vec<Option<bool>>) -> Option<BTreeMap<String, ModelVal>> {
        self.nodes += 1;
        if self.nodes > MAX_NODES {
            self.exhausted_budget = true;
            return None;
        }
        // propagate units
        let mut trail: Vec<usize> = Vec::new();
        loop {
            let mut forced: Option<(usize, bool)> = None;
            let mut all_true = true;
            let mut conflict = false;
            for a in self.prob.asserts {
                match status(a, assign) {
                    Status::False => {
                        conflict = true;
                        break;
                    }
                    Status::True => {}
                    Status::Unit(x, p) => {
                        all_true = false;
                        if forced.is_none() {
                            forced = Some((x, p));
                        }
                    }
                    Status::Open(_, _) => {
                        all_true = false;
                    }
                }
            }
            if conflict {
                for t in trail {
                    assign[t] = None;
                }
                return None;
            }
            if let Some((x, p)) = forced {
                assign[x] = Some(p);
                trail.push(x);
                if !self.theory_feasible(assign) {
                    for t in trail {
                        assign[t] = None;
                    }
                    return None;
                }
                continue;
            }
            if all_true {
                let res = self.theory_model(assign);
                if res.is_none() {
                    for t in trail {
                        assign[t] = None;
                    }
                }
                return res;
            }
            break;
        }
        // decide
        let mut decision: Option<(usize, bool)> = None;
        for a in self.prob.asserts {
            if let Status::Open(x, p) = status(a, assign) {
                decision = Some((x, p));
                break;
            }
        }
        let (x, p) = decision.expect("open assertion must yield a literal");
        for value in [p, !p] {
            assign[x] = Some(value);
            if self.theory_feasible(assign) {
                if let Some(m) = self.search(assign) {
                    return Some(m);
                }
            }
            assign[x] = None;
            if self.exhausted_budget {
                for t in trail {
                    assign[t] = None;
                }
                return None;
            }
        }
        for t in trail {
            assign[t] = None;
        }
        None
    }

    fn assigned_lin(&self, assign: &[Option<bool>]) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for (i, a) in self.prob.atoms.iter().enumerate() {
            if let Some(v) = assign[i] {
                if matches!(a, Atom::Lin(..)) {
                    out.push((i, v));
                }
            }
        }
        out
    }

    fn theory_feasible(&mut self, assign: &[Option<bool>]) -> bool {
        let lits = self.assigned_lin(assign);
        self.lra_check(&lits, false).is_some()
    }

    fn theory_model(&mut self, assign: &[Option<bool>]) -> Option<BTreeMap<String, ModelVal>> {
        let lits = self.assigned_lin(assign);
        let nums = self.lra_check(&lits, true)?;
        let mut model: BTreeMap<String, ModelVal> = BTreeMap::new();
        for (v, s) in self.prob.var_sorts {
            match s {
                Sort::Bool => {
                    let val = self
                        .prob
                        .atoms
                        .iter()
                        .enumerate()
                        .find_map(|(i, a)| match a {
                            Atom::BoolVar(n) if n == v => assign[i],
                            _ => None,
                        })
                        .unwrap_or(false);
                    model.insert(v.clone(), ModelVal::B(val));
                }
                _ => {
                    let q = nums.get(v).cloned().unwrap_or_else(BigRational::zero);
                    model.insert(v.clone(), ModelVal::Q(q));
                }
            }
        }
        Some(model)
    }

    /// Checks the conjunction of linear literals. When `want_int` is set,
    /// enforces integrality of Int-sorted variables via branch and bound and
    /// returns a concrete model.
    fn lra_check(
        &mut self,
        lits: &[(usize, bool)],
        want_int: bool,
    ) -> Option<BTreeMap<String, BigRational>> {
        // split negated equalities into < and > alternatives
        let mut base: Vec<(Cmp, &Vec<(String, BigRational)>, &BigRational, bool)> = Vec::new();
        let mut neg_eqs: Vec<(&Vec<(String, BigRational)>, &BigRational)> = Vec::new();
        for (i, pos) in lits {
            if let Atom::Lin(rel, coef, k) = &self.prob.atoms[*i] {
                if coef.is_empty() {
                    let truth = match rel {
                        Cmp::Le => !k.is_positive(),
                        Cmp::Lt => k.is_negative(),
                        Cmp::Eq => k.is_zero(),
                        _ => unreachable!(),
                    };
                    if truth != *pos {
                        return None;
                    }
                    continue;
                }
                if *pos {
                    base.push((*rel, coef, k, false));
                } else {
                    match rel {
                        Cmp::Le => base.push((Cmp::Lt, coef, k, true)), // ¬(e ≤ 0) ⇔ -e < 0
                        Cmp::Lt => base.push((Cmp::Le, coef, k, true)), // ¬(e < 0) ⇔ -e ≤ 0
                        Cmp::Eq => neg_eqs.push((coef, k)),
                        _ => unreachable!(),
                    }
                }
            }
        }
        self.branch_neg_eqs(&base, &neg_eqs, 0, want_int)
    }

    fn branch_neg_eqs(
        &mut self,
        base: &[(Cmp, &Vec<(String, BigRational)>, &BigRational, bool)],
        neg_eqs: &[(&Vec<(String, BigRational)>, &BigRational)],
        idx: usize,
        want_int: bool,
    ) -> Option<BTreeMap<String, BigRational>> {
        if idx == neg_eqs.len() {
            return self.lp_solve(base, want_int);
        }
        let (coef, k) = neg_eqs[idx];
        for flip in [false, true] {
            let mut ext = base.to_vec();
            // e ≠ 0 ⇔ e < 0 ∨ -e < 0
            ext.push((Cmp::Lt, coef, k, flip));
            if let Some(m) = self.branch_neg_eqs(&ext, neg_eqs, idx + 1, want_int) {
                return Some(m);
            }
        }
        None
    }

    fn lp_solve(
        &mut self,
        cons: &[(Cmp, &Vec<(String, BigRational)>, &BigRational, bool)],
        want_int: bool,
    ) -> Option<BTreeMap<String, BigRational>> {
        let mut cols: BTreeMap<String, usize> = BTreeMap::new();
        let mut simplex = Simplex::new();
        for (_, coef, _, _) in cons {
            for (v, _) in coef.iter() {
                cols.entry(v.clone()).or_insert_with(|| simplex.fresh_var());
            }
        }
        for (rel, coef, k, negated) in cons {
            let sign = if *negated {
                BigRational::from_integer(BigInt::from(-1))
            } else {
                BigRational::from_integer(BigInt::from(1))
            };
            let terms: Vec<(usize, BigRational)> = coef
                .iter()
                .map(|(v, c)| (cols[v], c * &sign))
                .collect();
            let slack = simplex.add_row(&terms);
            let rhs = -(*k).clone() * &sign;
            let ok = match rel {
                Cmp::Le => simplex.assert_upper(slack, QDelta::rat(rhs)),
                Cmp::Lt => simplex.assert_upper(slack, QDelta::with_delta(rhs, -1)),
                Cmp::Eq => {
                    simplex.assert_upper(slack, QDelta::rat(rhs.clone()))
                        && simplex.assert_lower(slack, QDelta::rat(rhs))
                }
                _ => unreachable!(),
            };
            if !ok {
                return None;
            }
        }
        if !simplex.check() {
            return None;
        }
        if !want_int {
            return Some(BTreeMap::new());
        }
        let int_cols: Vec<(String, usize)> = cols
            .iter()
            .filter(|(v, _)| self.prob.var_sorts.get(*v) == Some(&Sort::Int))
            .map(|(v, c)| (v.clone(), *c))
            .collect();
        let mut nodes = 0usize;
        self.branch_and_bound(&mut simplex, &cols, &int_cols, &mut nodes)
    }

    fn branch_and_bound(
        &mut self,
        simplex: &mut Simplex,
        cols: &BTreeMap<String, usize>,
        int_cols: &[(String, usize)],
        nodes: &mut usize,
    ) -> Option<BTreeMap<String, BigRational>> {
        *nodes += 1;
        if *nodes > MAX_BB_NODES {
            self.exhausted_budget = true;
            return None;
        }
        if !simplex.check() {
            return None;
        }
        let values = simplex.concrete_values();
        let fractional = int_cols.iter().find_map(|(v, c)| {
            let q = &values[*c];
            if q.is_integer() {
                None
            } else {
                Some((v.clone(), *c, q.clone()))
            }
        });
        match fractional {
            None => {
                let mut model = BTreeMap::new();
                for (v, c) in cols {
                    model.insert(v.clone(), values[*c].clone());
                }
                Some(model)
            }
            Some((_, col, q)) => {
                let fl = q.floor();
                // x <= floor(q)
                {
                    let mut s1 = simplex.clone();
                    if s1.assert_upper(col, QDelta::rat(fl.clone())) {
                        if let Some(m) = self.branch_and_bound(&mut s1, cols, int_cols, nodes) {
                            return Some(m);
                        }
                    }
                }
                // x >= floor(q) + 1
                let fl1 = &fl + BigRational::from_integer(BigInt::from(1));
                let mut s2 = simplex.clone();
                if s2.assert_lower(col, QDelta::rat(fl1)) {
                    self.branch_and_bound(&mut s2, cols, int_cols, nodes)
                } else {
                    None
                }
            }
        }
    }
}

/// Entry point: decide the conjunction of `asserts`.
pub fn solve(
    asserts: &[Term],
    var_sorts: &BTreeMap<String, Sort>,
) -> Outcome {
    let mut intern = Interner::new();
    let mut nnfs = Vec::new();
    for a in asserts {
        let lifted = lift_ites(a);
        match nnf_of(&lifted, true, &mut intern) {
            Ok(n) => nnfs.push(n),
            Err(e) => return Outcome::Unknown(e),
        }
    }
    let prob = Problem {
        atoms: &intern.atoms,
        asserts: &nnfs,
        var_sorts,
    };
    let mut search = Search::new(prob);
    search.run()
}
