//! Exact rational simplex for bound-constrained linear arithmetic.
//!
//! Variables carry optional lower/upper bounds over `QDelta` values
//! (rational plus an infinitesimal multiple, for strict inequalities).
//! Rows keep basic variables expressed over nonbasic ones; `check`
//! restores bound consistency by Bland-rule pivoting.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QDelta {
    pub r: BigRational,
    pub d: BigRational,
}

impl QDelta {
    pub fn rat(r: BigRational) -> Self {
        QDelta {
            r,
            d: BigRational::zero(),
        }
    }

    pub fn with_delta(r: BigRational, d: i64) -> Self {
        QDelta {
            r,
            d: BigRational::from_integer(BigInt::from(d)),
        }
    }

    pub fn zero() -> Self {
        QDelta::rat(BigRational::zero())
    }

    fn add(&self, other: &QDelta) -> QDelta {
        QDelta {
            r: &self.r + &other.r,
            d: &self.d + &other.d,
        }
    }

    fn sub(&self, other: &QDelta) -> QDelta {
        QDelta {
            r: &self.r - &other.r,
            d: &self.d - &other.d,
        }
    }

    fn scale(&self, k: &BigRational) -> QDelta {
        QDelta {
            r: &self.r * k,
            d: &self.d * k,
        }
    }
}

impl PartialOrd for QDelta {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QDelta {
    fn cmp(&self, other: &Self) -> Ordering {
        self.r.cmp(&other.r).then_with(|| self.d.cmp(&other.d))
    }
}

#[derive(Clone)]
struct Row {
    basic: usize,
    coef: BTreeMap<usize, BigRational>,
}

#[derive(Clone)]
pub struct Simplex {
    lower: Vec<Option<QDelta>>,
    upper: Vec<Option<QDelta>>,
    val: Vec<QDelta>,
    rows: Vec<Row>,
    in_row: Vec<Option<usize>>,
}

impl Simplex {
    pub fn new() -> Self {
        Simplex {
            lower: Vec::new(),
            upper: Vec::new(),
            val: Vec::new(),
            rows: Vec::new(),
            in_row: Vec::new(),
        }
    }

    pub fn fresh_var(&mut self) -> usize {
        let v = self.val.len();
        self.lower.push(None);
        self.upper.push(None);
        self.val.push(QDelta::zero());
        self.in_row.push(None);
        v
    }

    /// Introduces a slack variable constrained to equal the given linear
    /// combination of existing variables, and returns it.
    pub fn add_row(&mut self, coeffs: &[(usize, BigRational)]) -> usize {
        let s = self.fresh_var();
        let mut coef: BTreeMap<usize, BigRational> = BTreeMap::new();
        let mut value = QDelta::zero();
        for (v, c) in coeffs {
            if c.is_zero() {
                continue;
            }
            // substitute basic variables by their rows
            if let Some(ri) = self.in_row[*v] {
                let row_coef: Vec<(usize, BigRational)> = self.rows[ri]
                    .coef
                    .iter()
                    .map(|(k, q)| (*k, q.clone()))
                    .collect();
                for (k, q) in row_coef {
                    let e = coef.entry(k).or_insert_with(BigRational::zero);
                    *e += c * &q;
                }
            } else {
                let e = coef.entry(*v).or_insert_with(BigRational::zero);
                *e += c;
            }
        }
        coef.retain(|_, q| !q.is_zero());
        for (k, q) in &coef {
            value = value.add(&self.val[*k].scale(q));
        }
        self.val[s] = value;
        self.in_row[s] = Some(self.rows.len());
        self.rows.push(Row { basic: s, coef });
        s
    }

    pub fn value(&self, v: usize) -> &QDelta {
        &self.val[v]
    }

    /// Tightens the lower bound; returns false on an immediately trivial conflict.
    pub fn assert_lower(&mut self, v: usize, b: QDelta) -> bool {
        if let Some(u) = &self.upper[v] {
            if b > *u {
                return false;
            }
        }
        let tighter = match &self.lower[v] {
            Some(l) => b > *l,
            None => true,
        };
        if tighter {
            self.lower[v] = Some(b.clone());
            if self.in_row[v].is_none() && self.val[v] < b {
                self.update(v, b);
            }
        }
        true
    }

    pub fn assert_upper(&mut self, v: usize, b: QDelta) -> bool {
        if let Some(l) = &self.lower[v] {
            if b < *l {
                return false;
            }
        }
        let tighter = match &self.upper[v] {
            Some(u) => b < *u,
            None => true,
        };
        if tighter {
            self.upper[v] = Some(b.clone());
            if self.in_row[v].is_none() && self.val[v] > b {
                self.update(v, b);
            }
        }
        true
    }

    fn update(&mut self, nonbasic: usize, v: QDelta) {
        let delta = v.sub(&self.val[nonbasic]);
        for row in &self.rows {
            if let Some(c) = row.coef.get(&nonbasic) {
                let nb = self.val[row.basic].add(&delta.scale(c));
                self.val[row.basic] = nb;
            }
        }
        self.val[nonbasic] = v;
    }

    fn out_of_bounds(&self) -> Option<(usize, bool)> {
        // (variable, violates_lower)
        let mut best: Option<(usize, bool)> = None;
        for row in &self.rows {
            let v = row.basic;
            if let Some(l) = &self.lower[v] {
                if self.val[v] < *l && best.map_or(true, |(b, _)| v < b) {
                    best = Some((v, true));
                }
            }
            if let Some(u) = &self.upper[v] {
                if self.val[v] > *u && best.map_or(true, |(b, _)| v < b) {
                    best = Some((v, false));
                }
            }
        }
        best
    }

    pub fn check(&mut self) -> bool {
        loop {
            let (xi, needs_increase) = match self.out_of_bounds() {
                None => return true,
                Some((v, low)) => (v, low),
            };
            let ri = self.in_row[xi].expect("out-of-bounds var must be basic");
            let target = if needs_increase {
                self.lower[xi].clone().unwrap()
            } else {
                self.upper[xi].clone().unwrap()
            };
            // Bland: smallest suitable nonbasic column
            let mut pivot: Option<usize> = None;
            for (xj, a) in &self.rows[ri].coef {
                let a_pos = a.is_positive();
                let can_move = if needs_increase == a_pos {
                    // xj must increase
                    match &self.upper[*xj] {
                        Some(u) => self.val[*xj] < *u,
                        None => true,
                    }
                } else {
                    match &self.lower[*xj] {
                        Some(l) => self.val[*xj] > *l,
                        None => true,
                    }
                };
                if can_move {
                    pivot = Some(*xj);
                    break;
                }
            }
            let xj = match pivot {
                Some(x) => x,
                None => return false,
            };
            self.pivot_and_update(xi, ri, xj, target);
        }
    }

    fn pivot_and_update(&mut self, xi: usize, ri: usize, xj: usize, target: QDelta) {
        let aij = self.rows[ri].coef.get(&xj).unwrap().clone();
        let theta = target.sub(&self.val[xi]).scale(&(BigRational::one() / &aij));
        // update assignment
        self.val[xi] = target;
        let new_xj = self.val[xj].add(&theta);
        for (k, row) in self.rows.iter().enumerate() {
            if k == ri {
                continue;
            }
            if let Some(c) = row.coef.get(&xj) {
                let nb = self.val[row.basic].add(&theta.scale(c));
                self.val[row.basic] = nb;
            }
        }
        self.val[xj] = new_xj;

        // pivot the tableau: xj becomes basic in row ri
        let old = std::mem::replace(
            &mut self.rows[ri],
            Row {
                basic: xj,
                coef: BTreeMap::new(),
            },
        );
        let inv = BigRational::one() / &aij;
        let mut new_coef: BTreeMap<usize, BigRational> = BTreeMap::new();
        new_coef.insert(xi, inv.clone());
        for (k, c) in &old.coef {
            if *k == xj {
                continue;
            }
            let q = -(c * &inv);
            if !q.is_zero() {
                new_coef.insert(*k, q);
            }
        }
        self.rows[ri].coef = new_coef;
        self.in_row[xi] = None;
        self.in_row[xj] = Some(ri);

        // substitute into other rows
        let subst: Vec<(usize, BigRational)> = self.rows[ri]
            .coef
            .iter()
            .map(|(k, q)| (*k, q.clone()))
            .collect();
        for k in 0..self.rows.len() {
            if k == ri {
                continue;
            }
            if let Some(c) = self.rows[k].coef.remove(&xj) {
                for (col, q) in &subst {
                    let e = self.rows[k]
                        .coef
                        .entry(*col)
                        .or_insert_with(BigRational::zero);
                    *e += &c * q;
                }
                self.rows[k].coef.retain(|_, q| !q.is_zero());
            }
        }
    }

    /// Picks a concrete positive value for delta and returns rational values
    /// for all variables. Only meaningful after a successful `check`.
    pub fn concrete_values(&self) -> Vec<BigRational> {
        let mut max_delta: Option<BigRational> = None;
        let mut consider = |v: &QDelta, b: &QDelta, v_ge_b: bool| {
            // constraint: v >= b (or b >= v), already true symbolically
            let (hi, lo) = if v_ge_b { (v, b) } else { (b, v) };
            let dr = &hi.r - &lo.r;
            let dd = &hi.d - &lo.d;
            if dd.is_negative() && dr.is_positive() {
                let cand = dr / -dd;
                if max_delta.as_ref().map_or(true, |m| cand < *m) {
                    max_delta = Some(cand);
                }
            }
        };
        for v in 0..self.val.len() {
            if let Some(l) = &self.lower[v] {
                consider(&self.val[v], l, true);
            }
            if let Some(u) = &self.upper[v] {
                consider(&self.val[v], u, false);
            }
        }
        let one = BigRational::one();
        let delta = match max_delta {
            Some(m) => {
                if m > one {
                    one
                } else {
                    m / BigRational::from_integer(BigInt::from(2))
                }
            }
            None => one,
        };
        self.val.iter().map(|q| &q.r + &q.d * &delta).collect()
    }
}

impl Default for Simplex {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn q(n: i64) -> BigRational {
        BigRational::from_i64(n).unwrap()
    }

    #[test]
    fn feasible_simple() {
        // x >= 1, y >= 1, x + y <= 3
        let mut s = Simplex::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        assert!(s.assert_lower(x, QDelta::rat(q(1))));
        assert!(s.assert_lower(y, QDelta::rat(q(1))));
        let sxy = s.add_row(&[(x, q(1)), (y, q(1))]);
        assert!(s.assert_upper(sxy, QDelta::rat(q(3))));
        assert!(s.check());
        let m = s.concrete_values();
        assert!(m[x] >= q(1) && m[y] >= q(1) && &m[x] + &m[y] <= q(3));
    }

    #[test]
    fn infeasible_strict() {
        // x > 0, x < 0
        let mut s = Simplex::new();
        let x = s.fresh_var();
        assert!(s.assert_lower(x, QDelta::with_delta(q(0), 1)));
        assert!(!s.assert_upper(x, QDelta::with_delta(q(0), -1)) || !s.check());
    }

    #[test]
    fn infeasible_rows() {
        // x + y >= 3, x <= 1, y <= 1
        let mut s = Simplex::new();
        let x = s.fresh_var();
        let y = s.fresh_var();
        let sxy = s.add_row(&[(x, q(1)), (y, q(1))]);
        assert!(s.assert_lower(sxy, QDelta::rat(q(3))));
        assert!(s.assert_upper(x, QDelta::rat(q(1))));
        assert!(s.assert_upper(y, QDelta::rat(q(1))));
        assert!(!s.check());
    }
}
