//! Truncated power series ("jets") and the chart jets of `Pos_n` / `SPos_n`.
//!
//! A [`Jet`] is a polynomial in chart variables together with a truncation
//! degree `d`; products drop everything above `d`. Because every matrix we
//! exponentiate has entries without constant term, the truncated exponential
//! is a finite sum and all results are exact.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::RatMatrix;
use crate::poly::{upper_pairs, Monomial, Poly, PolyJson, Var, VarTable};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    poly: Poly,
    degree: u32,
}

impl Jet {
    /// Wraps `poly`, discarding terms above `degree`.
    pub fn new(poly: Poly, degree: u32) -> Jet {
        Jet {
            poly: poly.truncate(degree),
            degree,
        }
    }

    pub fn zero(table: &VarTable, degree: u32) -> Jet {
        Jet {
            poly: Poly::zero(table),
            degree,
        }
    }

    pub fn constant(table: &VarTable, c: Rational, degree: u32) -> Jet {
        Jet {
            poly: Poly::constant(table, c),
            degree,
        }
    }

    pub fn one(table: &VarTable, degree: u32) -> Jet {
        Jet::constant(table, Rational::one(), degree)
    }

    pub fn var(table: &VarTable, v: &Var, degree: u32) -> Result<Jet> {
        Ok(Jet::new(Poly::var(table, v)?, degree))
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn table(&self) -> &VarTable {
        self.poly.table()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn constant_term(&self) -> Rational {
        self.poly.constant_term()
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        if self.table() != other.table() {
            return Err(Error::VarTableMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet {
            poly: self.poly.try_add(&other.poly)?,
            degree: self.degree,
        })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet {
            poly: self.poly.try_sub(&other.poly)?,
            degree: self.degree,
        })
    }

    /// Truncated product.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet {
            poly: self.poly.mul_truncated(&other.poly, self.degree),
            degree: self.degree,
        })
    }

    pub fn scale(&self, c: &Rational) -> Jet {
        Jet {
            poly: self.poly.scale(c),
            degree: self.degree,
        }
    }

    /// Same series viewed at a lower (or equal) truncation degree.
    pub fn truncate(&self, degree: u32) -> Jet {
        Jet::new(self.poly.clone(), degree.min(self.degree))
    }

    pub fn to_json(&self) -> JetJson {
        JetJson {
            poly: self.poly.to_json(),
            degree: self.degree,
        }
    }

    pub fn from_json(json: &JetJson) -> Result<Jet> {
        Ok(Jet::new(Poly::from_json(&json.poly)?, json.degree))
    }
}

/// Wire form of a jet: the polynomial fields plus `"degree"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetJson {
    #[serde(flatten)]
    pub poly: PolyJson,
    pub degree: u32,
}

macro_rules! jet_binop {
    ($Trait:ident, $method:ident, $checked:ident) => {
        impl<'a, 'b> std::ops::$Trait<&'b Jet> for &'a Jet {
            type Output = Jet;
            /// Panics on mismatched tables or truncation degrees.
            fn $method(self, rhs: &'b Jet) -> Jet {
                self.$checked(rhs)
                    .expect("jets with different tables or degrees")
            }
        }
    };
}

jet_binop!(Add, add, try_add);
jet_binop!(Sub, sub, try_sub);
jet_binop!(Mul, mul, try_mul);

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(&-Rational::one())
    }
}

/// Square matrix of jets over one table and one truncation degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetMatrix {
    n: usize,
    entries: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Jet) -> JetMatrix {
        let entries: Vec<Jet> = (0..n * n).map(|k| f(k / n, k % n)).collect();
        if let Some(first) = entries.first() {
            assert!(
                entries
                    .iter()
                    .all(|e| e.degree == first.degree && e.table() == first.table()),
                "jet matrix entries must share table and degree"
            );
        }
        JetMatrix { n, entries }
    }

    pub fn constant(m: &RatMatrix, table: &VarTable, degree: u32) -> JetMatrix {
        assert!(m.is_square());
        JetMatrix::from_fn(m.rows(), |i, j| {
            Jet::constant(table, m[(i, j)].clone(), degree)
        })
    }

    pub fn identity(n: usize, table: &VarTable, degree: u32) -> JetMatrix {
        JetMatrix::constant(&RatMatrix::identity(n), table, degree)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.n + j]
    }

    pub fn degree(&self) -> u32 {
        self.entries[0].degree
    }

    pub fn table(&self) -> &VarTable {
        self.entries[0].table()
    }

    pub fn try_mul(&self, other: &JetMatrix) -> Result<JetMatrix> {
        if self.n != other.n {
            return Err(Error::InvalidParameter(
                "jet matrices of different sizes".into(),
            ));
        }
        self.entries[0].check(&other.entries[0])?;
        let n = self.n;
        let d = self.degree();
        let table = self.table().clone();
        Ok(JetMatrix::from_fn(n, |i, j| {
            let mut acc = Poly::zero(&table);
            for k in 0..n {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc
                    .try_add(&a.poly.mul_truncated(&b.poly, d))
                    .expect("shared table");
            }
            Jet {
                poly: acc,
                degree: d,
            }
        }))
    }

    /// Left and right multiplication by constant matrices: `l · self · r`.
    pub fn sandwich(&self, l: &RatMatrix, r: &RatMatrix) -> JetMatrix {
        let n = self.n;
        let d = self.degree();
        let table = self.table().clone();
        let mid = JetMatrix::from_fn(n, |i, j| {
            let mut acc = Poly::zero(&table);
            for k in 0..n {
                acc = &acc + &self.get(i, k).poly.scale(&r[(k, j)]);
            }
            Jet {
                poly: acc,
                degree: d,
            }
        });
        JetMatrix::from_fn(n, |i, j| {
            let mut acc = Poly::zero(&table);
            for k in 0..n {
                acc = &acc + &mid.get(k, j).poly.scale(&l[(i, k)]);
            }
            Jet {
                poly: acc,
                degree: d,
            }
        })
    }

    pub fn add(&self, other: &JetMatrix) -> JetMatrix {
        JetMatrix::from_fn(self.n, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn scale(&self, c: &Rational) -> JetMatrix {
        JetMatrix::from_fn(self.n, |i, j| self.get(i, j).scale(c))
    }

    pub fn transpose(&self) -> JetMatrix {
        JetMatrix::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> Jet {
        let mut acc = Jet::zero(self.table(), self.degree());
        for i in 0..self.n {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    /// Truncated determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Jet {
        fn minor_det(m: &JetMatrix, rows: &[usize], cols: &[usize]) -> Jet {
            if rows.len() == 1 {
                return m.get(rows[0], cols[0]).clone();
            }
            let mut acc = Jet::zero(m.table(), m.degree());
            for (k, &c) in cols.iter().enumerate() {
                let entry = m.get(rows[0], c);
                if entry.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = entry * &minor_det(m, &rows[1..], &rest);
                acc = if k % 2 == 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            acc
        }
        let idx: Vec<usize> = (0..self.n).collect();
        minor_det(self, &idx, &idx)
    }
}

/// `Σ_{m=0}^{d} N^m / m!` for a jet matrix whose entries have no constant
/// term. Exact at the truncation degree.
pub fn jet_matrix_exp(nil: &JetMatrix) -> Result<JetMatrix> {
    let n = nil.size();
    for i in 0..n {
        for j in 0..n {
            if !nil.get(i, j).constant_term().is_zero() {
                return Err(Error::NotNilpotent(i, j));
            }
        }
    }
    let d = nil.degree();
    let mut sum = JetMatrix::identity(n, nil.table(), d);
    let mut power = sum.clone();
    for m in 1..=d {
        power = power.try_mul(nil)?.scale(&Rational::new(1, m as i64));
        if power.entries.iter().all(Jet::is_zero) {
            break;
        }
        sum = sum.add(&power);
    }
    Ok(sum)
}

/// How a chart parametrizes a neighbourhood of the base point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartMode {
    /// `g·exp(X)` on `Pos_n`, `X` symmetric.
    Pos,
    /// `g·exp(X − tr(X)/n·1)` on `SPos_n`, `X` symmetric.
    SposProjection,
    /// `g·exp(Y)` on `SPos_n`, `Y` traceless symmetric.
    SposChart,
}

impl ChartMode {
    pub fn name(self) -> &'static str {
        match self {
            ChartMode::Pos => "pos",
            ChartMode::SposProjection => "spos-projection",
            ChartMode::SposChart => "spos-chart",
        }
    }

    pub fn is_spos(self) -> bool {
        !matches!(self, ChartMode::Pos)
    }
}

impl std::fmt::Display for ChartMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Name of the chart variable paired with the symbol variable `a_ij`.
pub fn chart_var(prefix: &str, i: usize, j: usize) -> Var {
    if i < 10 && j < 10 {
        Var::Chart(format!("{prefix}{i}{j}"))
    } else {
        Var::Chart(format!("{prefix}{i}_{j}"))
    }
}

/// A chart at a base point: mode, base point `g`, named directions `B_v`
/// and truncation degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartSpec {
    pub mode: ChartMode,
    pub base: RatMatrix,
    pub basis: Vec<(Var, RatMatrix)>,
    pub degree: u32,
}

impl ChartSpec {
    /// The standard chart whose variables pair with symbol variables.
    ///
    /// For `Pos` and `SposProjection` the direction for `x_ii` is `E_ii` and
    /// for `x_ij` (`i < j`) it is `E_ij + E_ji`. For `SposChart` there is no
    /// `x_nn`; the diagonal directions are `E_ii − 1/n·1`, which pair with
    /// traceless matrices exactly like `E_ii` does, so a symbol written in the
    /// reduced coordinates applies with the same rule.
    pub fn standard(
        mode: ChartMode,
        base: RatMatrix,
        degree: u32,
        prefix: &str,
    ) -> Result<ChartSpec> {
        let n = base.rows();
        let mut basis = Vec::new();
        for (i, j) in upper_pairs(n) {
            let dir = if i != j {
                RatMatrix::sym_unit(n, i - 1, j - 1)
            } else if mode == ChartMode::SposChart {
                if i == n {
                    continue;
                }
                let shift = RatMatrix::identity(n).scale(&Rational::new(-1, n as i64));
                RatMatrix::sym_unit(n, i - 1, i - 1).add(&shift)
            } else {
                RatMatrix::sym_unit(n, i - 1, i - 1)
            };
            basis.push((chart_var(prefix, i, j), dir));
        }
        let spec = ChartSpec {
            mode,
            base,
            basis,
            degree,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn size(&self) -> usize {
        self.base.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidChart(m.to_string()));
        if !self.base.is_square() {
            return bad("base point must be square");
        }
        let n = self.size();
        let det = self.base.det()?;
        if det.is_zero() {
            return bad("base point must be invertible");
        }
        if self.mode.is_spos() && !det.is_one() {
            return bad("SPOS charts need a base point of determinant 1");
        }
        for (v, b) in &self.basis {
            if b.rows() != n || !b.is_symmetric() {
                return Err(Error::InvalidChart(format!(
                    "direction for `{v}` is not a symmetric {n}x{n} matrix"
                )));
            }
            if self.mode == ChartMode::SposChart && !b.trace().is_zero() {
                return Err(Error::InvalidChart(format!(
                    "direction for `{v}` is not traceless"
                )));
            }
        }
        let mut flat = RatMatrix::zeros(self.basis.len(), n * n);
        for (r, (_, b)) in self.basis.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    flat[(r, i * n + j)] = b[(i, j)].clone();
                }
            }
        }
        if linalg::rank(&flat) != self.basis.len() {
            return bad("chart directions are linearly dependent");
        }
        VarTable::new(self.basis.iter().map(|(v, _)| v.clone()).collect())?;
        Ok(())
    }

    pub fn var_table(&self) -> VarTable {
        VarTable::new(self.basis.iter().map(|(v, _)| v.clone()).collect()).expect("validated")
    }

    /// `X(t) = Σ t_v B_v` as a jet matrix over `table` (which must contain the
    /// chart variables), traceless-projected in `SposProjection` mode.
    pub fn generator(&self, table: &VarTable, degree: u32) -> Result<JetMatrix> {
        let n = self.size();
        let mut dirs: Vec<(Poly, &RatMatrix)> = Vec::with_capacity(self.basis.len());
        for (v, b) in &self.basis {
            dirs.push((Poly::var(table, v)?, b));
        }
        let project = self.mode == ChartMode::SposProjection;
        let inv_n = Rational::new(1, n as i64);
        Ok(JetMatrix::from_fn(n, |i, j| {
            let mut acc = Poly::zero(table);
            for (t, b) in &dirs {
                let mut c = b[(i, j)].clone();
                if project && i == j {
                    c -= &b.trace() * &inv_n;
                }
                if !c.is_zero() {
                    acc = &acc + &t.scale(&c);
                }
            }
            Jet::new(acc, degree)
        }))
    }

    /// `⟨X(t), A⟩ = Σ_v t_v tr(B_v A)` as a degree-1 jet.
    pub fn pairing(&self, a: &RatMatrix, table: &VarTable, degree: u32) -> Result<Jet> {
        let mut acc = Poly::zero(table);
        for (v, b) in &self.basis {
            let c = b.mul(a)?.trace();
            acc = &acc + &Poly::var(table, v)?.scale(&c);
        }
        Ok(Jet::new(acc, degree))
    }

    /// Jet of `e^{⟨X(t), A⟩}`: `Σ_{m ≤ d} ⟨X(t),A⟩^m / m!`.
    pub fn exp_pairing_jet(&self, a: &RatMatrix) -> Result<Jet> {
        let table = self.var_table();
        let lin = self.pairing(a, &table, self.degree)?;
        let mut sum = Jet::one(&table, self.degree);
        let mut power = sum.clone();
        for m in 1..=self.degree {
            power = (&power * &lin).scale(&Rational::new(1, m as i64));
            sum = &sum + &power;
        }
        Ok(sum)
    }
}

/// Coset matrix along a chart: `S(t) = g·exp(2·X(t))·gᵀ`, where `X(t)` is the
/// (possibly projected) chart generator.
pub fn chart_jet(spec: &ChartSpec) -> Result<JetMatrix> {
    spec.validate()?;
    let table = spec.var_table();
    let gen = spec.generator(&table, spec.degree)?;
    let e = jet_matrix_exp(&gen.scale(&Rational::from(2)))?;
    Ok(e.sandwich(&spec.base, &spec.base.transpose()))
}

/// Coset matrix of the two-step point `g·exp(X(t))·exp(Z(s))`:
/// `g·exp(X)·exp(2Z)·exp(X)·gᵀ`, truncated at the sum of the two chart
/// degrees. The inner chart's base point is ignored.
pub fn product_chart_jet(outer: &ChartSpec, inner: &ChartSpec) -> Result<JetMatrix> {
    outer.validate()?;
    inner.validate()?;
    if outer.size() != inner.size() {
        return Err(Error::InvalidChart("charts of different sizes".into()));
    }
    let table = outer.var_table().concat(&inner.var_table())?;
    let d = outer.degree + inner.degree;
    let e_outer = jet_matrix_exp(&outer.generator(&table, d)?)?;
    let e_inner = jet_matrix_exp(&inner.generator(&table, d)?.scale(&Rational::from(2)))?;
    let s = e_outer.try_mul(&e_inner)?.try_mul(&e_outer)?;
    Ok(s.sandwich(&outer.base, &outer.base.transpose()))
}

/// Applies the constant-coefficient operator `Q(∂/∂X)` in the chart variables
/// named `prefix·ij` and leaves the remaining variables alone.
///
/// Each monomial `a^α` of `Q` becomes `c(α)·α!` times the coefficient of
/// `t^α`, with `c(α) = Π_{i<j} (1/2)^{α_ij}` for the halved off-diagonal
/// entries of `∂/∂X`. The result lives over `rest` and is truncated at
/// `jet.degree − deg Q`.
pub fn contract_symbol(q: &Poly, jet: &Jet, prefix: &str, rest: &VarTable) -> Result<Jet> {
    let deg_q = q.degree().max(0) as u32;
    if jet.degree() < deg_q {
        return Err(Error::DegreeTooLow {
            have: jet.degree(),
            need: deg_q,
        });
    }
    let jt = jet.table();
    let mut paired = Vec::with_capacity(q.table().len());
    let mut halves = Vec::with_capacity(q.table().len());
    for v in q.table().vars() {
        let Var::Sym(i, j) = *v else {
            return Err(Error::InvalidParameter(format!(
                "symbol variable `{v}` is not a matrix entry a_ij"
            )));
        };
        let cv = chart_var(prefix, i, j);
        let k = jt
            .index_of(&cv)
            .ok_or_else(|| Error::UnknownVariable(cv.to_string()))?;
        paired.push(k);
        halves.push(i != j);
    }
    // jet index -> position in `rest`, or None when the index is paired
    let mut rest_pos = vec![None; jt.len()];
    for (k, v) in jt.vars().iter().enumerate() {
        if paired.contains(&k) {
            continue;
        }
        rest_pos[k] = Some(
            rest.index_of(v)
                .ok_or_else(|| Error::UnknownVariable(v.to_string()))?,
        );
    }
    let half = Rational::new(1, 2);
    let mut weights: HashMap<Monomial, Rational> = HashMap::new();
    for (m, c) in q.terms() {
        let mut w = c * &m.factorial();
        for (&e, &h) in m.exps().iter().zip(&halves) {
            if h && e > 0 {
                w *= half.pow(e);
            }
        }
        weights.insert(m.clone(), w);
    }
    let mut acc: HashMap<Monomial, Rational> = HashMap::new();
    for (m, c) in jet.poly().terms() {
        let alpha = Monomial::new(paired.iter().map(|&k| m.exps()[k]).collect());
        let Some(w) = weights.get(&alpha) else {
            continue;
        };
        let mut exps = vec![0; rest.len()];
        for (k, &e) in m.exps().iter().enumerate() {
            if let Some(p) = rest_pos[k] {
                exps[p] = e;
            }
        }
        let val = w * c;
        acc.entry(Monomial::new(exps))
            .and_modify(|x| *x += &val)
            .or_insert(val);
    }
    Ok(Jet::new(Poly::from_map(rest, acc), jet.degree() - deg_q))
}

/// `Q(∂/∂X)|_{X=0}` applied to a jet whose variables are all chart variables
/// `prefix·ij`.
pub fn apply_symbol_to_jet(q: &Poly, jet: &Jet, prefix: &str) -> Result<Rational> {
    Ok(contract_symbol(q, jet, prefix, &VarTable::empty())?.constant_term())
}
