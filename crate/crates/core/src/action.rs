//! Operators acting on functions of the coset matrix `S = g·gᵀ`.
//!
//! Test functions are polynomials in the entries `s_ij` of `S`. To apply an
//! operator at a base point we push the function through a chart jet and
//! contract the result with the operator symbol. Composition uses a two-step
//! chart `g·exp(X(t))·exp(Z(s))` and contracts the inner variables first.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::jet::{
    apply_symbol_to_jet, chart_jet, contract_symbol, product_chart_jet, ChartMode, ChartSpec, Jet,
    JetMatrix,
};
use crate::linalg;
use crate::matrix::RatMatrix;
use crate::poly::{upper_pairs, Monomial, Poly, Var, VarTable};
use crate::rational::Rational;
use crate::symbols::{maass_selberg_symbol, Space, SymbolPoly};

const OUTER: &str = "x";
const INNER: &str = "z";

/// A polynomial in the entries `s_ij` (`i <= j`) of the coset matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFunction {
    poly: Poly,
    n: usize,
}

impl TestFunction {
    /// Accepts any polynomial whose variables are among `s_11, …, s_nn`.
    pub fn new(poly: &Poly, n: usize) -> Result<TestFunction> {
        Ok(TestFunction {
            poly: poly.embed(&VarTable::entries(n))?,
            n,
        })
    }

    pub fn constant(n: usize, c: Rational) -> TestFunction {
        TestFunction {
            poly: Poly::constant(&VarTable::entries(n), c),
            n,
        }
    }

    pub fn entry(n: usize, i: usize, j: usize) -> TestFunction {
        let table = VarTable::entries(n);
        TestFunction {
            poly: Poly::var(&table, &Var::entry(i, j)).expect("index in range"),
            n,
        }
    }

    /// `tr(S)`.
    pub fn trace(n: usize) -> TestFunction {
        let table = VarTable::entries(n);
        let poly = (1..=n).fold(Poly::zero(&table), |acc, i| {
            &acc + &Poly::var(&table, &Var::entry(i, i)).unwrap()
        });
        TestFunction { poly, n }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exact value at a concrete coset matrix.
    pub fn eval(&self, s: &RatMatrix) -> Rational {
        let values: Vec<Rational> = upper_pairs(self.n)
            .map(|(i, j)| s[(i - 1, j - 1)].clone())
            .collect();
        self.poly.eval_slice(&values)
    }

    /// `f∘τ_g`, i.e. `S ↦ f(g·S·gᵀ)`.
    pub fn translate(&self, g: &RatMatrix) -> Result<TestFunction> {
        let n = self.n;
        if g.rows() != n || !g.is_square() {
            return Err(Error::InvalidParameter(
                "translation has the wrong size".into(),
            ));
        }
        let table = VarTable::entries(n);
        let s = |p: usize, r: usize| Poly::var(&table, &Var::entry(p + 1, r + 1)).unwrap();
        let mut images = std::collections::BTreeMap::new();
        for (i, j) in upper_pairs(n) {
            let mut acc = Poly::zero(&table);
            for p in 0..n {
                for r in 0..n {
                    let c = &g[(i - 1, p)] * &g[(j - 1, r)];
                    if !c.is_zero() {
                        acc = &acc + &s(p, r).scale(&c);
                    }
                }
            }
            images.insert(Var::entry(i, j), acc);
        }
        Ok(TestFunction {
            poly: self.poly.substitute_linear(&images, &table)?,
            n,
        })
    }
}

/// All monomials `Π s_ij^{β_ij}` with `|β| <= max_degree`, constant first.
pub fn monomial_battery(n: usize, max_degree: u32) -> Vec<TestFunction> {
    let table = VarTable::entries(n);
    monomials_up_to(table.len(), max_degree)
        .into_iter()
        .map(|m| TestFunction {
            poly: Poly::from_terms(&table, [(m.exps().to_vec(), Rational::one())]).unwrap(),
            n,
        })
        .collect()
}

/// Every exponent vector of length `nvars` and total degree `<= d`, in
/// ascending graded-lex order.
pub fn monomials_up_to(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if pos == cur.len() {
            out.push(Monomial::new(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(0, d, &mut vec![0; nvars], &mut out);
    out.sort();
    out
}

/// A chart jet at a base point plus a cache of already evaluated monomials
/// in its entries, so a whole battery of test functions shares the work.
#[derive(Debug)]
pub struct ChartEvaluator {
    n: usize,
    entries: Vec<Jet>,
    cache: HashMap<Monomial, Jet>,
}

impl ChartEvaluator {
    pub fn new(s: JetMatrix) -> ChartEvaluator {
        let n = s.size();
        let entries = upper_pairs(n)
            .map(|(i, j)| s.get(i - 1, j - 1).clone())
            .collect();
        ChartEvaluator {
            n,
            entries,
            cache: HashMap::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.entries[0].degree()
    }

    pub fn table(&self) -> &VarTable {
        self.entries[0].table()
    }

    fn monomial(&mut self, m: &Monomial) -> Jet {
        if let Some(j) = self.cache.get(m) {
            return j.clone();
        }
        let value = match m.exps().iter().position(|&e| e > 0) {
            None => Jet::one(self.table(), self.degree()),
            Some(k) => {
                let mut rest = m.exps().to_vec();
                rest[k] -= 1;
                let prev = self.monomial(&Monomial::new(rest));
                &prev * &self.entries[k]
            }
        };
        self.cache.insert(m.clone(), value.clone());
        value
    }

    /// Jet of `f` along the chart.
    pub fn eval(&mut self, f: &TestFunction) -> Result<Jet> {
        if f.n != self.n {
            return Err(Error::InvalidParameter(
                "test function has the wrong size".into(),
            ));
        }
        let mut acc = Poly::zero(self.table());
        for (m, c) in f.poly.terms() {
            let j = self.monomial(m);
            acc = &acc + &j.poly().scale(c);
        }
        Ok(Jet::new(acc, self.degree()))
    }
}

fn check_mode(q: &SymbolPoly, mode: ChartMode) -> Result<()> {
    let ok = match mode {
        ChartMode::Pos | ChartMode::SposProjection => q.space() == Space::Pos,
        ChartMode::SposChart => q.space() == Space::Spos,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ModeMismatch {
            mode: mode.to_string(),
            space: q.space().to_string(),
        })
    }
}

fn symbol_degree(q: &SymbolPoly) -> u32 {
    q.degree().max(0) as u32
}

/// An operator applied at base points through charts of one mode.
///
/// `Pos` symbols go through `Pos` charts (the operator itself) or
/// `SposProjection` charts (its radial part); `Spos` symbols go through
/// `SposChart` charts.
#[derive(Debug)]
pub struct OperatorAction {
    symbol: SymbolPoly,
    mode: ChartMode,
    charts: HashMap<Vec<Vec<Rational>>, ChartEvaluator>,
}

impl OperatorAction {
    pub fn new(symbol: SymbolPoly, mode: ChartMode) -> Result<OperatorAction> {
        check_mode(&symbol, mode)?;
        Ok(OperatorAction {
            symbol,
            mode,
            charts: HashMap::new(),
        })
    }

    pub fn symbol(&self) -> &SymbolPoly {
        &self.symbol
    }

    pub fn mode(&self) -> ChartMode {
        self.mode
    }

    /// `(D f)(g)`. Chart jets are cached per base point.
    pub fn apply(&mut self, f: &TestFunction, g: &RatMatrix) -> Result<Rational> {
        if g.rows() != self.symbol.n() || f.n() != self.symbol.n() {
            return Err(Error::InvalidParameter(
                "sizes of symbol, function and base point differ".into(),
            ));
        }
        let key = g.to_rows();
        if !self.charts.contains_key(&key) {
            let spec =
                ChartSpec::standard(self.mode, g.clone(), symbol_degree(&self.symbol), OUTER)?;
            self.charts
                .insert(key.clone(), ChartEvaluator::new(chart_jet(&spec)?));
        }
        let jet = self.charts.get_mut(&key).unwrap().eval(f)?;
        apply_symbol_to_jet(self.symbol.poly(), &jet, OUTER)
    }
}

/// `(D f)(g)` for the operator with symbol `q`, through a chart of `mode`.
pub fn apply_operator(
    q: &SymbolPoly,
    f: &TestFunction,
    g: &RatMatrix,
    mode: ChartMode,
) -> Result<Rational> {
    OperatorAction::new(q.clone(), mode)?.apply(f, g)
}

/// `D_1 D_2` at one base point, with the two-step chart cached.
#[derive(Debug)]
pub struct Composer {
    outer_symbol: SymbolPoly,
    inner_symbol: SymbolPoly,
    outer_table: VarTable,
    chart: ChartEvaluator,
}

impl Composer {
    pub fn new(
        q1: &SymbolPoly,
        q2: &SymbolPoly,
        g: &RatMatrix,
        mode: ChartMode,
    ) -> Result<Composer> {
        Composer::with_degrees(q1, q2, g, mode, symbol_degree(q1), symbol_degree(q2))
    }

    /// Explicit chart degrees; each must cover its symbol.
    pub fn with_degrees(
        q1: &SymbolPoly,
        q2: &SymbolPoly,
        g: &RatMatrix,
        mode: ChartMode,
        d1: u32,
        d2: u32,
    ) -> Result<Composer> {
        check_mode(q1, mode)?;
        check_mode(q2, mode)?;
        if q1.n() != q2.n() || g.rows() != q1.n() {
            return Err(Error::InvalidParameter(
                "sizes of symbols and base point differ".into(),
            ));
        }
        if d1 < symbol_degree(q1) {
            return Err(Error::DegreeTooLow {
                have: d1,
                need: symbol_degree(q1),
            });
        }
        if d2 < symbol_degree(q2) {
            return Err(Error::DegreeTooLow {
                have: d2,
                need: symbol_degree(q2),
            });
        }
        let n = q1.n();
        let outer = ChartSpec::standard(mode, g.clone(), d1, OUTER)?;
        let inner = ChartSpec::standard(mode, RatMatrix::identity(n), d2, INNER)?;
        let chart = ChartEvaluator::new(product_chart_jet(&outer, &inner)?);
        Ok(Composer {
            outer_symbol: q1.clone(),
            inner_symbol: q2.clone(),
            outer_table: outer.var_table(),
            chart,
        })
    }

    /// `(D_1 (D_2 f))(g)`.
    pub fn apply(&mut self, f: &TestFunction) -> Result<Rational> {
        let jet = self.chart.eval(f)?;
        let inner = contract_symbol(self.inner_symbol.poly(), &jet, INNER, &self.outer_table)?;
        apply_symbol_to_jet(self.outer_symbol.poly(), &inner, OUTER)
    }
}

/// `(D_1 D_2 f)(g)` for symbols `q1`, `q2` through charts of `mode`.
pub fn compose_apply(
    q1: &SymbolPoly,
    q2: &SymbolPoly,
    f: &TestFunction,
    g: &RatMatrix,
    mode: ChartMode,
) -> Result<Rational> {
    Composer::new(q1, q2, g, mode)?.apply(f)
}

/// Reconstructs the `Pos_n` symbol of an operator from its values at the
/// identity coset.
///
/// The probes are the monomials `Π (s_ij − δ_ij)^{β_ij}`, `|β| <= d`. Their
/// chart jets at the identity are triangular in the symbol monomials, so the
/// linear system has a unique solution whenever the action really comes from
/// an operator of degree at most `d`.
pub fn recover_symbol<F>(mut action: F, n: usize, d: u32) -> Result<SymbolPoly>
where
    F: FnMut(&TestFunction) -> Result<Rational>,
{
    if n < 1 {
        return Err(Error::InvalidParameter(
            "matrix size must be at least 1".into(),
        ));
    }
    let sym = VarTable::sym(n);
    let entries = VarTable::entries(n);
    let monos = monomials_up_to(sym.len(), d);
    let spec = ChartSpec::standard(ChartMode::Pos, RatMatrix::identity(n), d, OUTER)?;
    let mut chart = ChartEvaluator::new(chart_jet(&spec)?);

    // s_ij − δ_ij
    let shifted: Vec<Poly> = upper_pairs(n)
        .map(|(i, j)| {
            let s = Poly::var(&entries, &Var::entry(i, j)).unwrap();
            if i == j {
                &s - &Poly::one(&entries)
            } else {
                s
            }
        })
        .collect();

    let half = Rational::new(1, 2);
    let pair_is_off: Vec<bool> = upper_pairs(n).map(|(i, j)| i != j).collect();
    let weight = |m: &Monomial| -> Rational {
        let mut w = m.factorial();
        for (&e, &off) in m.exps().iter().zip(&pair_is_off) {
            if off && e > 0 {
                w *= half.pow(e);
            }
        }
        w
    };

    let size = monos.len();
    let mut system = RatMatrix::zeros(size, size);
    let mut rhs = Vec::with_capacity(size);
    for (row, beta) in monos.iter().enumerate() {
        let mut probe = Poly::one(&entries);
        for (k, &e) in beta.exps().iter().enumerate() {
            if e > 0 {
                probe = &probe * &shifted[k].pow(e);
            }
        }
        let f = TestFunction { poly: probe, n };
        let jet = chart.eval(&f)?;
        for (col, alpha) in monos.iter().enumerate() {
            // chart variables x_ij are in the same order as a_ij
            let c = jet.poly().coeff(alpha);
            if !c.is_zero() {
                system[(row, col)] = &c * &weight(alpha);
            }
        }
        rhs.push(action(&f)?);
    }
    let solution = linalg::solve(&system, &rhs)
        .map_err(|_| Error::Singular("action is not an operator of the given degree".into()))?;
    let poly = Poly::from_terms(&sym, monos.iter().map(|m| m.exps().to_vec()).zip(solution))?;
    SymbolPoly::new(poly, n, Space::Pos)
}

/// Symbol of the composite `δ_j ∘ δ_k` on `Pos_n`, recovered from its
/// action at the identity.
pub fn composite_symbol(q1: &SymbolPoly, q2: &SymbolPoly) -> Result<SymbolPoly> {
    let n = q1.n();
    let mut composer = Composer::new(q1, q2, &RatMatrix::identity(n), ChartMode::Pos)?;
    let d = symbol_degree(q1) + symbol_degree(q2);
    recover_symbol(|f| composer.apply(f), n, d)
}

/// Outcome of comparing the composite symbol against the product symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingSymbolReport {
    pub composite: SymbolPoly,
    pub product: SymbolPoly,
    /// `composite − product`.
    pub remainder: Poly,
    pub holds: bool,
}

/// Checks that `δ_j δ_k` has symbol `tr(A^j)·tr(A^k)` plus terms of degree
/// strictly below `j + k`.
pub fn leading_symbol_product_report(j: usize, k: usize, n: usize) -> Result<LeadingSymbolReport> {
    let q1 = maass_selberg_symbol(n, j)?;
    let q2 = maass_selberg_symbol(n, k)?;
    let composite = composite_symbol(&q1, &q2)?;
    let product = q1.mul(&q2)?;
    let top = (j + k) as u32;
    let remainder = composite.poly().try_sub(product.poly())?;
    let holds = composite.poly().homogeneous_part(top) == product.poly().homogeneous_part(top)
        && remainder.degree() < top as i64;
    Ok(LeadingSymbolReport {
        composite,
        product,
        remainder,
        holds,
    })
}

pub fn leading_symbol_product_check(j: usize, k: usize, n: usize) -> Result<bool> {
    Ok(leading_symbol_product_report(j, k, n)?.holds)
}

/// `D(f∘τ_g)(h) = (Df)(g·h)` for unimodular `g`.
pub fn equivariance_check(
    q: &SymbolPoly,
    g: &RatMatrix,
    f: &TestFunction,
    h: &RatMatrix,
    mode: ChartMode,
) -> Result<bool> {
    if !g.det()?.is_one() {
        return Err(Error::InvalidParameter(
            "translation must have determinant 1".into(),
        ));
    }
    let lhs = apply_operator(q, &f.translate(g)?, h, mode)?;
    let rhs = apply_operator(q, f, &g.mul(h)?, mode)?;
    Ok(lhs == rhs)
}

/// Unimodular base points: the identity and two fixed non-diagonal ones.
pub fn base_point_battery(n: usize) -> Vec<RatMatrix> {
    let mut upper = RatMatrix::identity(n);
    for i in 0..n.saturating_sub(1) {
        upper[(i, i + 1)] = Rational::from((i + 1) as i64);
    }
    let mut lower = RatMatrix::identity(n);
    if n >= 2 {
        lower[(0, 0)] = Rational::from(2);
        lower[(1, 1)] = Rational::new(1, 2);
        lower[(1, 0)] = Rational::one();
    }
    if n >= 3 {
        lower[(2, 1)] = Rational::one();
    }
    vec![RatMatrix::identity(n), upper, lower]
}

/// Two non-trivial unimodular translations.
pub fn translation_battery(n: usize) -> Vec<RatMatrix> {
    let mut shear = RatMatrix::identity(n);
    if n >= 2 {
        shear[(0, 1)] = Rational::one();
    }
    let mut mixed = RatMatrix::identity(n);
    if n >= 2 {
        mixed[(n - 1, 0)] = Rational::from(-1);
        mixed[(0, 0)] = Rational::new(1, 3);
        mixed[(n - 1, n - 1)] = Rational::from(3);
    }
    vec![shear, mixed]
}
