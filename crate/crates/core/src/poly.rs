//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Poly`] lives over a [`VarTable`], an ordered list of variables.
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded lexicographic with respect to the table order, so iteration,
//! printing and serialization are deterministic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A polynomial variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Entry `a_ij` (`i <= j`, 1-based) of a symbolic symmetric matrix.
    Sym(usize, usize),
    /// Entry `s_ij` (`i <= j`, 1-based) of the coset matrix `S = g gᵀ`.
    Entry(usize, usize),
    /// A named chart direction.
    Chart(String),
}

impl Var {
    /// Symmetric-matrix entry with the indices put in `i <= j` order.
    pub fn sym(i: usize, j: usize) -> Var {
        Var::Sym(i.min(j), i.max(j))
    }

    pub fn entry(i: usize, j: usize) -> Var {
        Var::Entry(i.min(j), i.max(j))
    }

    pub fn chart(name: impl Into<String>) -> Var {
        Var::Chart(name.into())
    }

    /// The index pair for `Sym`/`Entry` variables.
    pub fn indices(&self) -> Option<(usize, usize)> {
        match *self {
            Var::Sym(i, j) | Var::Entry(i, j) => Some((i, j)),
            Var::Chart(_) => None,
        }
    }
}

fn index_suffix(i: usize, j: usize) -> String {
    if i < 10 && j < 10 {
        format!("{i}{j}")
    } else {
        format!("{i}_{j}")
    }
}

fn parse_index_suffix(s: &str) -> Option<(usize, usize)> {
    if let Some((a, b)) = s.split_once('_') {
        return Some((a.parse().ok()?, b.parse().ok()?));
    }
    let bytes = s.as_bytes();
    if bytes.len() == 2 && bytes.iter().all(u8::is_ascii_digit) {
        return Some(((bytes[0] - b'0') as usize, (bytes[1] - b'0') as usize));
    }
    None
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Sym(i, j) => write!(f, "a{}", index_suffix(*i, *j)),
            Var::Entry(i, j) => write!(f, "s{}", index_suffix(*i, *j)),
            Var::Chart(name) => f.write_str(name),
        }
    }
}

impl FromStr for Var {
    type Err = Error;

    fn from_str(s: &str) -> Result<Var> {
        let indexed = |rest: &str| parse_index_suffix(rest).filter(|&(i, j)| i >= 1 && j >= 1);
        if let Some(rest) = s.strip_prefix('a') {
            if let Some((i, j)) = indexed(rest) {
                return Ok(Var::sym(i, j));
            }
        }
        if let Some(rest) = s.strip_prefix('s') {
            if let Some((i, j)) = indexed(rest) {
                return Ok(Var::entry(i, j));
            }
        }
        let ident = !s.is_empty()
            && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ident {
            Ok(Var::Chart(s.to_string()))
        } else {
            Err(Error::Parse(format!("`{s}` is not a variable name")))
        }
    }
}

#[derive(Debug)]
struct TableInner {
    vars: Vec<Var>,
    index: HashMap<Var, usize>,
}

/// Ordered, duplicate-free list of variables. Cheap to clone.
#[derive(Clone, Debug)]
pub struct VarTable(Arc<TableInner>);

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.vars == other.0.vars
    }
}

impl Eq for VarTable {}

impl VarTable {
    pub fn new(vars: Vec<Var>) -> Result<VarTable> {
        let mut index = HashMap::with_capacity(vars.len());
        for (k, v) in vars.iter().enumerate() {
            if index.insert(v.clone(), k).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate variable `{v}`")));
            }
        }
        Ok(VarTable(Arc::new(TableInner { vars, index })))
    }

    /// `a_11, a_12, …, a_1n, a_22, …, a_nn`.
    pub fn sym(n: usize) -> VarTable {
        let vars = upper_pairs(n).map(|(i, j)| Var::Sym(i, j)).collect();
        VarTable::new(vars).expect("distinct by construction")
    }

    /// The symmetric table with `a_nn` dropped: coordinates on traceless
    /// symmetric matrices.
    pub fn reduced_sym(n: usize) -> VarTable {
        let vars = upper_pairs(n)
            .filter(|&(i, j)| !(i == n && j == n))
            .map(|(i, j)| Var::Sym(i, j))
            .collect();
        VarTable::new(vars).expect("distinct by construction")
    }

    /// `s_11, …, s_nn` in the same order as [`VarTable::sym`].
    pub fn entries(n: usize) -> VarTable {
        let vars = upper_pairs(n).map(|(i, j)| Var::Entry(i, j)).collect();
        VarTable::new(vars).expect("distinct by construction")
    }

    pub fn empty() -> VarTable {
        VarTable::new(Vec::new()).expect("empty")
    }

    pub fn len(&self) -> usize {
        self.0.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.vars.is_empty()
    }

    pub fn vars(&self) -> &[Var] {
        &self.0.vars
    }

    pub fn index_of(&self, v: &Var) -> Option<usize> {
        self.0.index.get(v).copied()
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.index.contains_key(v)
    }

    /// Concatenation of two tables; fails on shared variables.
    pub fn concat(&self, other: &VarTable) -> Result<VarTable> {
        let mut vars = self.0.vars.clone();
        vars.extend(other.0.vars.iter().cloned());
        VarTable::new(vars)
    }
}

/// Upper-triangle index pairs `(i, j)`, `1 <= i <= j <= n`, row by row.
pub fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (i..=n).map(move |j| (i, j)))
}

/// Exponent vector. The derived ordering compares total degree first and
/// then exponents lexicographically, which is exactly graded lex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    degree: u32,
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Monomial {
        let degree = exps.iter().sum();
        Monomial { degree, exps }
    }

    pub fn one(nvars: usize) -> Monomial {
        Monomial {
            degree: 0,
            exps: vec![0; nvars],
        }
    }

    pub fn var(nvars: usize, k: usize) -> Monomial {
        let mut exps = vec![0; nvars];
        exps[k] = 1;
        Monomial { degree: 1, exps }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| a + b)
            .collect();
        Monomial {
            degree: self.degree + other.degree,
            exps,
        }
    }

    /// Product of the factorials of the exponents.
    pub fn factorial(&self) -> Rational {
        self.exps.iter().map(|&e| Rational::factorial(e)).product()
    }
}

/// Polynomial over a [`VarTable`] with nonzero rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    table: VarTable,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(table: &VarTable) -> Poly {
        Poly {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(table: &VarTable) -> Poly {
        Poly::constant(table, Rational::one())
    }

    pub fn constant(table: &VarTable, c: Rational) -> Poly {
        let mut p = Poly::zero(table);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(table.len()), c);
        }
        p
    }

    pub fn var(table: &VarTable, v: &Var) -> Result<Poly> {
        let k = table
            .index_of(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        let mut p = Poly::zero(table);
        p.terms
            .insert(Monomial::var(table.len(), k), Rational::one());
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(table: &VarTable, terms: I) -> Result<Poly>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Poly::zero(table);
        for (exps, c) in terms {
            if exps.len() != table.len() {
                return Err(Error::InvalidParameter(format!(
                    "exponent vector has length {}, table has {} variables",
                    exps.len(),
                    table.len()
                )));
            }
            p.add_term(Monomial::new(exps), c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub(crate) fn from_map(table: &VarTable, acc: HashMap<Monomial, Rational>) -> Poly {
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Poly {
            table: table.clone(),
            terms,
        }
    }

    pub fn table(&self) -> &VarTable {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .next_back()
            .map_or(-1, |m| m.degree() as i64)
    }

    /// Smallest total degree of a term; `None` for zero.
    pub fn low_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.table.len()))
    }

    /// The homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == d)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    /// Drops every term of total degree above `d`.
    pub fn truncate(&self, d: u32) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() <= d)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    fn check_table(&self, other: &Poly) -> Result<()> {
        if self.table == other.table {
            Ok(())
        } else {
            Err(Error::VarTableMismatch)
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_table(other)?;
        Ok(self.mul_truncated(other, u32::MAX))
    }

    /// Product with every term of degree above `max_degree` discarded.
    /// Tables are assumed equal.
    pub(crate) fn mul_truncated(&self, other: &Poly, max_degree: u32) -> Poly {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        // Both operands iterate in ascending degree, so once a pair overflows
        // the cap the rest of the inner loop does too.
        for (ma, ca) in &self.terms {
            if ma.degree() > max_degree {
                break;
            }
            let room = max_degree - ma.degree();
            for (mb, cb) in &other.terms {
                if mb.degree() > room {
                    break;
                }
                let prod = ca * cb;
                acc.entry(ma.mul(mb))
                    .and_modify(|c| *c += &prod)
                    .or_insert(prod);
            }
        }
        Poly::from_map(&self.table, acc)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.table);
        }
        let terms = self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect();
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one(&self.table);
        for _ in 0..e {
            out = out.mul_truncated(self, u32::MAX);
        }
        out
    }

    /// Formal partial derivative with respect to `v`.
    pub fn partial(&self, v: &Var) -> Result<Poly> {
        let k = self
            .table
            .index_of(v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
        let mut out = Poly::zero(&self.table);
        for (m, c) in &self.terms {
            let e = m.exps[k];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.clone();
            exps[k] -= 1;
            out.add_term(Monomial::new(exps), c * &Rational::from(e as i64));
        }
        Ok(out)
    }

    /// Exact value at a point; every variable of the table must be assigned.
    pub fn eval(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational> {
        let values = self
            .table
            .vars()
            .iter()
            .map(|v| {
                point
                    .get(v)
                    .cloned()
                    .ok_or_else(|| Error::MissingAssignment(v.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.eval_slice(&values))
    }

    /// Evaluation with values given in table order.
    pub fn eval_slice(&self, values: &[Rational]) -> Rational {
        assert_eq!(values.len(), self.table.len());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in values.iter().zip(&m.exps) {
                if e > 0 {
                    t *= x.pow(e);
                }
            }
            acc += t;
        }
        acc
    }

    /// Replaces each variable by a polynomial of degree at most one over
    /// `target`. Every variable of this polynomial's table needs an image.
    pub fn substitute_linear(
        &self,
        images: &BTreeMap<Var, Poly>,
        target: &VarTable,
    ) -> Result<Poly> {
        let mut ordered = Vec::with_capacity(self.table.len());
        for v in self.table.vars() {
            let img = images
                .get(v)
                .ok_or_else(|| Error::MissingImage(v.to_string()))?;
            if img.table != *target {
                return Err(Error::VarTableMismatch);
            }
            if img.degree() > 1 {
                return Err(Error::InvalidParameter(format!(
                    "image of `{v}` has degree {}, expected at most 1",
                    img.degree()
                )));
            }
            ordered.push(img.clone());
        }
        Ok(self.substitute_ordered(&ordered, target))
    }

    /// General substitution with images given in table order. Powers of the
    /// images are cached.
    pub(crate) fn substitute_ordered(&self, images: &[Poly], target: &VarTable) -> Poly {
        let mut powers: Vec<Vec<Poly>> = images
            .iter()
            .map(|p| vec![Poly::one(target), p.clone()])
            .collect();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut term = Poly::constant(target, c.clone());
            for (k, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[k].len() <= e as usize {
                    let next = powers[k]
                        .last()
                        .unwrap()
                        .mul_truncated(&images[k], u32::MAX);
                    powers[k].push(next);
                }
                term = term.mul_truncated(&powers[k][e as usize], u32::MAX);
            }
            for (mm, cc) in term.terms {
                out.add_term(mm, cc);
            }
        }
        out
    }

    /// Re-expresses this polynomial over a table that contains all of its
    /// variables.
    pub fn embed(&self, target: &VarTable) -> Result<Poly> {
        if self.table == *target {
            return Ok(self.clone());
        }
        let map = self
            .table
            .vars()
            .iter()
            .map(|v| {
                target
                    .index_of(v)
                    .ok_or_else(|| Error::UnknownVariable(v.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut exps = vec![0; target.len()];
            for (k, &e) in m.exps.iter().enumerate() {
                exps[map[k]] = e;
            }
            out.terms.insert(Monomial::new(exps), c.clone());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: self.table.vars().iter().map(ToString::to_string).collect(),
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(m, c)| TermJson {
                    exp: m.exps.clone(),
                    coeff: c.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Poly> {
        let vars = json
            .vars
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Var>>>()?;
        let table = VarTable::new(vars)?;
        Poly::from_terms(
            &table,
            json.terms.iter().map(|t| (t.exp.clone(), t.coeff.clone())),
        )
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("plain data serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Poly> {
        let json: PolyJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Poly::from_json(&json)
    }
}

/// Wire form of a polynomial. Terms are listed from the leading (largest
/// graded-lex) monomial down.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coeff: Rational,
}

impl fmt::Display for Poly {
    /// Plain text, leading term first: `a11^2 + 2*a12^2 - 1/2*a22`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let factors: Vec<String> = m
                .exps
                .iter()
                .zip(self.table.vars())
                .filter(|(&e, _)| e > 0)
                .map(|(&e, v)| {
                    if e == 1 {
                        v.to_string()
                    } else {
                        format!("{v}^{e}")
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                f.write_str(&factors.join("*"))?;
            }
        }
        Ok(())
    }
}

macro_rules! poly_binop {
    ($Trait:ident, $method:ident, $checked:ident) => {
        impl<'a, 'b> std::ops::$Trait<&'b Poly> for &'a Poly {
            type Output = Poly;
            /// Panics if the operands live over different tables.
            fn $method(self, rhs: &'b Poly) -> Poly {
                self.$checked(rhs)
                    .expect("polynomials over different variable tables")
            }
        }
        impl std::ops::$Trait for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self)
                    .$checked(&rhs)
                    .expect("polynomials over different variable tables")
            }
        }
    };
}

poly_binop!(Add, add, try_add);
poly_binop!(Sub, sub, try_sub);
poly_binop!(Mul, mul, try_mul);

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl std::ops::Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(i: usize, j: usize, t: &VarTable) -> Poly {
        Poly::var(t, &Var::sym(i, j)).unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    /// Term-by-term product written without the truncation machinery.
    fn naive_mul(p: &Poly, q: &Poly) -> Poly {
        let mut out = Poly::zero(p.table());
        for (ma, ca) in p.terms() {
            for (mb, cb) in q.terms() {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    #[test]
    fn monomial_product() {
        let t = VarTable::sym(2);
        let p = &a(1, 1, &t) * &a(1, 1, &t);
        assert_eq!(p.to_string(), "a11^2");
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn multiply_by_one() {
        let t = VarTable::sym(2);
        let p = &a(1, 1, &t) + &a(2, 2, &t);
        assert_eq!(&p * &Poly::one(&t), p);
    }

    #[test]
    fn square_of_sum() {
        let t = VarTable::sym(2);
        let p = &a(1, 1, &t) + &a(2, 2, &t);
        let sq = &p * &p;
        assert_eq!(sq, naive_mul(&p, &p));
        let expected = Poly::from_terms(
            &t,
            [
                (vec![2, 0, 0], r(1)),
                (vec![1, 0, 1], r(2)),
                (vec![0, 0, 2], r(1)),
            ],
        )
        .unwrap();
        assert_eq!(sq, expected);
        assert_eq!(sq.to_string(), "a11^2 + 2*a11*a22 + a22^2");
    }

    #[test]
    fn mismatched_tables_error() {
        let p = Poly::one(&VarTable::sym(2));
        let q = Poly::one(&VarTable::sym(3));
        assert_eq!(p.try_mul(&q), Err(Error::VarTableMismatch));
    }

    #[test]
    fn zero_has_degree_minus_one() {
        assert_eq!(Poly::zero(&VarTable::sym(2)).degree(), -1);
        assert_eq!(Poly::zero(&VarTable::sym(2)).to_string(), "0");
    }

    #[test]
    fn substitute_trace_on_traceless() {
        let t = VarTable::sym(2);
        let p = &a(1, 1, &t) + &a(2, 2, &t);
        let images = BTreeMap::from([
            (Var::sym(1, 1), a(1, 1, &t)),
            (Var::sym(1, 2), a(1, 2, &t)),
            (Var::sym(2, 2), -a(1, 1, &t)),
        ]);
        assert!(p.substitute_linear(&images, &t).unwrap().is_zero());
    }

    #[test]
    fn substitute_shift() {
        let t = VarTable::sym(2);
        let p = a(1, 1, &t).pow(2);
        let shift = &a(1, 1, &t) + &a(2, 2, &t);
        let images = BTreeMap::from([
            (Var::sym(1, 1), shift.clone()),
            (Var::sym(1, 2), a(1, 2, &t)),
            (Var::sym(2, 2), a(2, 2, &t)),
        ]);
        let out = p.substitute_linear(&images, &t).unwrap();
        assert_eq!(out, naive_mul(&shift, &shift));
    }

    #[test]
    fn substitute_identity_and_missing() {
        let t = VarTable::sym(2);
        let p = a(1, 2, &t);
        let ident: BTreeMap<Var, Poly> = t
            .vars()
            .iter()
            .map(|v| (v.clone(), Poly::var(&t, v).unwrap()))
            .collect();
        assert_eq!(p.substitute_linear(&ident, &t).unwrap(), p);
        let mut partial = ident.clone();
        partial.remove(&Var::sym(2, 2));
        assert_eq!(
            p.substitute_linear(&partial, &t),
            Err(Error::MissingImage("a22".into()))
        );
    }

    #[test]
    fn substitute_rejects_nonlinear_images() {
        let t = VarTable::sym(1);
        let images = BTreeMap::from([(Var::sym(1, 1), a(1, 1, &t).pow(2))]);
        assert!(a(1, 1, &t).substitute_linear(&images, &t).is_err());
    }

    #[test]
    fn partial_derivatives() {
        let t = VarTable::sym(2);
        let sq = a(1, 1, &t).pow(2);
        assert_eq!(
            sq.partial(&Var::sym(1, 1)).unwrap(),
            a(1, 1, &t).scale(&r(2))
        );
        let p = &a(1, 1, &t) * &a(2, 2, &t);
        assert!(p.partial(&Var::sym(1, 2)).unwrap().is_zero());
        let tr2 = &(&sq + &a(1, 2, &t).pow(2).scale(&r(2))) + &a(2, 2, &t).pow(2);
        assert_eq!(
            tr2.partial(&Var::sym(1, 1)).unwrap(),
            a(1, 1, &t).scale(&r(2))
        );
        assert!(matches!(
            tr2.partial(&Var::sym(3, 3)),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn evaluation() {
        let t = VarTable::sym(2);
        let tr = &a(1, 1, &t) + &a(2, 2, &t);
        let pt = BTreeMap::from([
            (Var::sym(1, 1), r(1)),
            (Var::sym(1, 2), r(0)),
            (Var::sym(2, 2), r(2)),
        ]);
        assert_eq!(tr.eval(&pt).unwrap(), r(3));
        // tr(A^2) for A = diag(1, 2), computed by hand as 1*1 + 2*2.
        let tr2 = &(&a(1, 1, &t).pow(2) + &a(1, 2, &t).pow(2).scale(&r(2))) + &a(2, 2, &t).pow(2);
        assert_eq!(tr2.eval(&pt).unwrap(), r(5));
        let with_const = &tr2 + &Poly::constant(&t, r(7));
        let origin: BTreeMap<Var, Rational> = t.vars().iter().map(|v| (v.clone(), r(0))).collect();
        assert_eq!(with_const.eval(&origin).unwrap(), r(7));
        let mut missing = pt.clone();
        missing.remove(&Var::sym(1, 2));
        assert!(matches!(
            tr2.eval(&missing),
            Err(Error::MissingAssignment(_))
        ));
    }

    #[test]
    fn json_shape() {
        let t = VarTable::sym(2);
        let p = &(&a(1, 1, &t) * &a(2, 2, &t)) - &a(1, 2, &t).pow(2).scale(&Rational::new(1, 2));
        let s = p.to_json_string();
        assert_eq!(
            s,
            r#"{"vars":["a11","a12","a22"],"terms":[{"exp":[1,0,1],"coeff":"1"},{"exp":[0,2,0],"coeff":"-1/2"}]}"#
        );
        assert_eq!(Poly::from_json_str(&s).unwrap(), p);
    }

    #[test]
    fn var_names() {
        for s in ["a11", "a3_12", "s23", "x11", "z1_2"] {
            assert_eq!(s.parse::<Var>().unwrap().to_string(), s);
        }
        assert_eq!("a21".parse::<Var>().unwrap(), Var::Sym(1, 2));
        assert!("1x".parse::<Var>().is_err());
    }
}
