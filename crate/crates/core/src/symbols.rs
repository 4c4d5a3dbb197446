//! Operator symbols on `Pos_n` and `SPos_n`.
//!
//! An invariant differential operator on `Pos_n` is stored through its symbol,
//! an `O(n)`-invariant polynomial in the entries `a_ij` of a symmetric
//! matrix. Its `SPos_n`-radial part is the restriction of that polynomial to
//! traceless matrices, kept in coordinates that omit `a_nn`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::RatMatrix;
use crate::poly::{upper_pairs, Monomial, Poly, Var, VarTable};
use crate::rational::Rational;

/// Which symmetric space a symbol (or chart) belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Space {
    Pos,
    Spos,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Pos => "POS",
            Space::Spos => "SPOS",
        })
    }
}

/// Named operator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    /// `δ_k`, symbol `tr(A^k)`.
    MaassSelberg,
    /// `η_k`, symbol = sum of the `k×k` principal minors.
    Minor,
}

impl Family {
    pub fn symbol(self, n: usize, k: usize) -> Result<SymbolPoly> {
        match self {
            Family::MaassSelberg => maass_selberg_symbol(n, k),
            Family::Minor => minor_sum_symbol(n, k),
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Family::MaassSelberg => "delta",
            Family::Minor => "eta",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::MaassSelberg => "MAASS_SELBERG",
            Family::Minor => "MINOR",
        })
    }
}

/// Provenance of a symbol built by one of the family constructors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolLabel {
    pub family: Family,
    pub k: usize,
    /// `false` for `δ_k` with `k > n`, which is not among the generators.
    pub generator: bool,
    /// Set once the symbol has been pushed to `SPos_n`.
    pub projected: bool,
}

impl fmt::Display for SymbolLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.projected {
            write!(f, "P({}_{})", self.family.short_name(), self.k)
        } else {
            write!(f, "{}_{}", self.family.short_name(), self.k)
        }
    }
}

/// A symbol together with its matrix size and space.
///
/// `Pos` symbols live over [`VarTable::sym`], `Spos` symbols over
/// [`VarTable::reduced_sym`] (no `a_nn`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolPoly {
    poly: Poly,
    n: usize,
    space: Space,
    label: Option<SymbolLabel>,
}

impl SymbolPoly {
    pub fn new(poly: Poly, n: usize, space: Space) -> Result<SymbolPoly> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "matrix size must be at least 1".into(),
            ));
        }
        let expected = symbol_table(n, space);
        if *poly.table() != expected {
            return Err(Error::VarTableMismatch);
        }
        Ok(SymbolPoly {
            poly,
            n,
            space,
            label: None,
        })
    }

    /// Accepts a polynomial over any table whose variables are entries of the
    /// right kind, re-embedding it into the canonical table.
    pub fn from_poly(poly: &Poly, n: usize, space: Space) -> Result<SymbolPoly> {
        SymbolPoly::new(poly.embed(&symbol_table(n, space))?, n, space)
    }

    pub fn with_label(mut self, label: SymbolLabel) -> SymbolPoly {
        self.label = Some(label);
        self
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn label(&self) -> Option<&SymbolLabel> {
        self.label.as_ref()
    }

    pub fn degree(&self) -> i64 {
        self.poly.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Product of two symbols of the same size and space.
    pub fn mul(&self, other: &SymbolPoly) -> Result<SymbolPoly> {
        if self.n != other.n || self.space != other.space {
            return Err(Error::VarTableMismatch);
        }
        SymbolPoly::new(self.poly.try_mul(&other.poly)?, self.n, self.space)
    }

    pub fn to_latex(&self) -> String {
        to_latex(&self.poly)
    }
}

impl fmt::Display for SymbolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.poly, f)
    }
}

pub fn symbol_table(n: usize, space: Space) -> VarTable {
    match space {
        Space::Pos => VarTable::sym(n),
        Space::Spos => VarTable::reduced_sym(n),
    }
}

/// The symbolic symmetric matrix `A = (a_ij)` over `table`.
pub fn symbolic_matrix(n: usize, table: &VarTable) -> Result<Vec<Vec<Poly>>> {
    (1..=n)
        .map(|i| (1..=n).map(|j| Poly::var(table, &Var::sym(i, j))).collect())
        .collect()
}

fn matmul(a: &[Vec<Poly>], b: &[Vec<Poly>], table: &VarTable) -> Vec<Vec<Poly>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Poly::zero(table), |acc, k| &acc + &(&a[i][k] * &b[k][j])))
                .collect()
        })
        .collect()
}

/// Symbol `tr(A^k)` of the Maass-Selberg operator `δ_k`.
pub fn maass_selberg_symbol(n: usize, k: usize) -> Result<SymbolPoly> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "matrix size must be at least 1".into(),
        ));
    }
    if k < 1 {
        return Err(Error::InvalidParameter(
            "operator order must be at least 1".into(),
        ));
    }
    let table = VarTable::sym(n);
    let a = symbolic_matrix(n, &table)?;
    let mut power = a.clone();
    for _ in 1..k {
        power = matmul(&power, &a, &table);
    }
    let trace = (0..n).fold(Poly::zero(&table), |acc, i| &acc + &power[i][i]);
    let label = SymbolLabel {
        family: Family::MaassSelberg,
        k,
        generator: k <= n,
        projected: false,
    };
    Ok(SymbolPoly::new(trace, n, Space::Pos)?.with_label(label))
}

/// All permutations of `0..k` with their signs.
fn signed_permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(
        prefix: &mut Vec<usize>,
        used: &mut [bool],
        sign: i64,
        out: &mut Vec<(Vec<usize>, i64)>,
    ) {
        let k = used.len();
        if prefix.len() == k {
            out.push((prefix.clone(), sign));
            return;
        }
        for v in 0..k {
            if used[v] {
                continue;
            }
            // inversions contributed by placing v after the current prefix
            let inv = prefix.iter().filter(|&&p| p > v).count();
            used[v] = true;
            prefix.push(v);
            rec(prefix, used, if inv % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            used[v] = false;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], 1, &mut out);
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Symbol `F_k(A)` of `η_k`: the sum of all `k×k` principal minors, each
/// expanded as a signed sum over permutations.
pub fn minor_sum_symbol(n: usize, k: usize) -> Result<SymbolPoly> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "matrix size must be at least 1".into(),
        ));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "minor order {k} outside 1..={n}"
        )));
    }
    let table = VarTable::sym(n);
    let a = symbolic_matrix(n, &table)?;
    let perms = signed_permutations(k);
    let mut sum = Poly::zero(&table);
    for idx in subsets(n, k) {
        for (perm, sign) in &perms {
            let mut term = Poly::constant(&table, Rational::from(*sign));
            for (j, &p) in perm.iter().enumerate() {
                term = &term * &a[idx[j]][idx[p]];
            }
            sum = &sum + &term;
        }
    }
    let label = SymbolLabel {
        family: Family::Minor,
        k,
        generator: true,
        projected: false,
    };
    Ok(SymbolPoly::new(sum, n, Space::Pos)?.with_label(label))
}

/// How to push a `Pos` symbol down to `SPos`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProjectionMode {
    /// Restrict to traceless matrices: `a_nn ↦ −(a_11 + … + a_{n−1,n−1})`.
    Restrict,
    /// Precompose with `A ↦ A − tr(A)/n·1`, then restrict.
    PiPrecompose,
}

/// `a_nn ↦ −Σ_{i<n} a_ii`, all other variables fixed, onto the reduced table.
fn restriction_images(n: usize) -> Result<BTreeMap<Var, Poly>> {
    let reduced = VarTable::reduced_sym(n);
    let mut images = BTreeMap::new();
    for (i, j) in upper_pairs(n) {
        let img = if i == n && j == n {
            (1..n).fold(Poly::zero(&reduced), |acc, m| {
                &acc - &Poly::var(&reduced, &Var::sym(m, m)).unwrap()
            })
        } else {
            Poly::var(&reduced, &Var::sym(i, j))?
        };
        images.insert(Var::sym(i, j), img);
    }
    Ok(images)
}

/// `a_ii ↦ a_ii − (a_11 + … + a_nn)/n`, off-diagonal variables fixed.
fn pi_images(n: usize, table: &VarTable) -> Result<BTreeMap<Var, Poly>> {
    let trace = (1..=n).fold(Poly::zero(table), |acc, m| {
        &acc + &Poly::var(table, &Var::sym(m, m)).unwrap()
    });
    let shift = trace.scale(&Rational::new(1, n as i64));
    let mut images = BTreeMap::new();
    for v in table.vars() {
        let x = Poly::var(table, v)?;
        let img = match *v {
            Var::Sym(i, j) if i == j => &x - &shift,
            _ => x,
        };
        images.insert(v.clone(), img);
    }
    Ok(images)
}

/// The `SPos_n`-radial part of a `Pos_n` symbol.
pub fn project_symbol(q: &SymbolPoly, mode: ProjectionMode) -> Result<SymbolPoly> {
    if q.space != Space::Pos {
        return Err(Error::InvalidParameter(
            "only POS symbols can be projected".into(),
        ));
    }
    let n = q.n;
    let full = VarTable::sym(n);
    let source = match mode {
        ProjectionMode::Restrict => q.poly.clone(),
        ProjectionMode::PiPrecompose => q.poly.substitute_linear(&pi_images(n, &full)?, &full)?,
    };
    let reduced = VarTable::reduced_sym(n);
    let out = source.substitute_linear(&restriction_images(n)?, &reduced)?;
    let mut sym = SymbolPoly::new(out, n, Space::Spos)?;
    if let Some(l) = &q.label {
        sym.label = Some(SymbolLabel {
            projected: true,
            ..l.clone()
        });
    }
    Ok(sym)
}

/// Symbol-level splitting: extends a reduced symbol to all of `Sym_n` as
/// `Q1 ∘ π`, `π(A) = A − tr(A)/n·1`.
pub fn split_symbol(q1: &SymbolPoly) -> Result<SymbolPoly> {
    if q1.space != Space::Spos {
        return Err(Error::InvalidParameter(
            "only SPOS symbols can be split".into(),
        ));
    }
    let n = q1.n;
    let full = VarTable::sym(n);
    let mut images = BTreeMap::new();
    let trace_over_n = (1..=n)
        .fold(Poly::zero(&full), |acc, m| {
            &acc + &Poly::var(&full, &Var::sym(m, m)).unwrap()
        })
        .scale(&Rational::new(1, n as i64));
    for v in q1.poly.table().vars() {
        let x = Poly::var(&full, v)?;
        let img = match *v {
            Var::Sym(i, j) if i == j => &x - &trace_over_n,
            _ => x,
        };
        images.insert(v.clone(), img);
    }
    let out = q1.poly.substitute_linear(&images, &full)?;
    SymbolPoly::new(out, n, Space::Pos)
}

/// A rational matrix `K` with `K·Kᵀ = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalRational(RatMatrix);

impl OrthogonalRational {
    pub fn new(k: RatMatrix) -> Result<OrthogonalRational> {
        if !k.is_square() || k.mul(&k.transpose())? != RatMatrix::identity(k.rows()) {
            return Err(Error::InvalidParameter("matrix is not orthogonal".into()));
        }
        Ok(OrthogonalRational(k))
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.0
    }

    pub fn det(&self) -> Rational {
        self.0.det().expect("square")
    }
}

/// Cayley transform `(1 − S)(1 + S)^{-1}` of a skew-symmetric matrix.
pub fn cayley_orthogonal(skew: &RatMatrix) -> Result<OrthogonalRational> {
    if !skew.is_skew() {
        return Err(Error::InvalidParameter(
            "Cayley transform needs a skew-symmetric matrix".into(),
        ));
    }
    let one = RatMatrix::identity(skew.rows());
    let plus = one.add(skew);
    let minus = one.add(&skew.neg());
    let inv = plus
        .inverse()
        .map_err(|_| Error::Singular("1 + S is not invertible".into()))?;
    OrthogonalRational::new(minus.mul(&inv)?)
}

/// Whether `Q(K·A·Kᵀ) = Q(A)` as polynomials.
pub fn check_orthogonal_invariance(q: &SymbolPoly, k: &OrthogonalRational) -> Result<bool> {
    if q.space != Space::Pos {
        return Err(Error::InvalidParameter(
            "invariance is checked on POS symbols".into(),
        ));
    }
    let n = q.n;
    if k.0.rows() != n {
        return Err(Error::InvalidParameter(
            "orthogonal matrix has the wrong size".into(),
        ));
    }
    let table = VarTable::sym(n);
    let a = symbolic_matrix(n, &table)?;
    let km = &k.0;
    let mut images = BTreeMap::new();
    for (i, j) in upper_pairs(n) {
        // (K A Kᵀ)_ij = Σ_{p,r} K_ip a_pr K_jr
        let mut acc = Poly::zero(&table);
        for p in 0..n {
            for r in 0..n {
                let c = &km[(i - 1, p)] * &km[(j - 1, r)];
                if !c.is_zero() {
                    acc = &acc + &a[p][r].scale(&c);
                }
            }
        }
        images.insert(Var::sym(i, j), acc);
    }
    let rotated = q.poly.substitute_linear(&images, &table)?;
    Ok(rotated == q.poly)
}

/// Coefficients of `det(t·1 − A)` in powers of `t`, index `m` holding the
/// coefficient of `t^m`, computed by cofactor expansion.
pub fn char_poly_coefficients(n: usize) -> Result<Vec<Poly>> {
    let sym = VarTable::sym(n);
    let t_var = Var::chart("t");
    let table = sym.concat(&VarTable::new(vec![t_var.clone()])?)?;
    let t = Poly::var(&table, &t_var)?;
    let m: Vec<Vec<Poly>> = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    let a = Poly::var(&table, &Var::sym(i, j)).unwrap();
                    if i == j {
                        &t - &a
                    } else {
                        -a
                    }
                })
                .collect()
        })
        .collect();
    fn cofactor_det(m: &[Vec<Poly>], rows: &[usize], cols: &[usize], table: &VarTable) -> Poly {
        if rows.is_empty() {
            return Poly::one(table);
        }
        let mut acc = Poly::zero(table);
        for (k, &c) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = &m[rows[0]][c] * &cofactor_det(m, &rows[1..], &rest, table);
            acc = if k % 2 == 0 {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    let det = cofactor_det(&m, &idx, &idx, &table);
    let t_pos = table.index_of(&t_var).unwrap();
    let mut coeffs = vec![Poly::zero(&sym); n + 1];
    for (mono, c) in det.terms() {
        let e = mono.exps()[t_pos] as usize;
        let mut exps = mono.exps().to_vec();
        exps.remove(t_pos);
        coeffs[e] = &coeffs[e] + &Poly::from_terms(&sym, [(exps, c.clone())])?;
    }
    Ok(coeffs)
}

/// Checks `det(t·1 − A) = t^n + Σ_k (−1)^k F_k(A) t^{n−k}`.
pub fn char_poly_identity_check(n: usize) -> Result<bool> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "matrix size must be at least 1".into(),
        ));
    }
    let coeffs = char_poly_coefficients(n)?;
    if coeffs[n] != Poly::one(&VarTable::sym(n)) {
        return Ok(false);
    }
    for k in 1..=n {
        let f = minor_sum_symbol(n, k)?;
        let expected = if k % 2 == 0 {
            f.poly.clone()
        } else {
            -f.poly.clone()
        };
        if coeffs[n - k] != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks Newton's identity
/// `p_k − e_1 p_{k−1} + … + (−1)^{k−1} e_{k−1} p_1 + (−1)^k k e_k = 0`
/// with `p_j = tr(A^j)` and `e_j = F_j(A)`.
pub fn newton_identity_check(n: usize, k: usize) -> Result<bool> {
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "order {k} outside 1..={n}"
        )));
    }
    let table = VarTable::sym(n);
    let e = |j: usize| -> Result<Poly> {
        if j == 0 {
            Ok(Poly::one(&table))
        } else {
            Ok(minor_sum_symbol(n, j)?.poly)
        }
    };
    let mut acc = Poly::zero(&table);
    for i in 0..k {
        let term = &e(i)? * &maass_selberg_symbol(n, k - i)?.poly;
        acc = if i % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    let last = e(k)?.scale(&Rational::from(k as i64));
    acc = if k.is_multiple_of(2) {
        &acc + &last
    } else {
        &acc - &last
    };
    Ok(acc.is_zero())
}

/// Rank over ℚ of the Jacobian `[∂q_r/∂v_c](point)`.
pub fn jacobian_rank(symbols: &[SymbolPoly], point: &BTreeMap<Var, Rational>) -> Result<usize> {
    let Some(first) = symbols.first() else {
        return Ok(0);
    };
    let table = first.poly.table().clone();
    if symbols.iter().any(|s| *s.poly.table() != table) {
        return Err(Error::VarTableMismatch);
    }
    Ok(linalg::rank(&jacobian_at(symbols, point)?))
}

/// The evaluated Jacobian matrix, rows = symbols, columns = table variables.
pub fn jacobian_at(symbols: &[SymbolPoly], point: &BTreeMap<Var, Rational>) -> Result<RatMatrix> {
    let Some(first) = symbols.first() else {
        return Ok(RatMatrix::zeros(0, 0));
    };
    let vars = first.poly.table().vars().to_vec();
    let mut m = RatMatrix::zeros(symbols.len(), vars.len());
    for (r, s) in symbols.iter().enumerate() {
        for (c, v) in vars.iter().enumerate() {
            m[(r, c)] = s.poly.partial(v)?.eval(point)?;
        }
    }
    Ok(m)
}

/// One sampled point that reached (or failed to reach) the target rank.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankWitness {
    pub target_rank: usize,
    pub achieved_rank: usize,
    pub trials_used: usize,
    pub point: BTreeMap<String, Rational>,
    pub success: bool,
}

/// Jacobian certificate for one family at one size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceCertificate {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    /// `P(F_2), …, P(F_n)` on traceless matrices, target rank `n − 1`.
    pub spos: RankWitness,
    /// `F_1, …, F_n` on all of `Sym_n`, target rank `n`.
    pub pos: RankWitness,
}

impl IndependenceCertificate {
    pub fn success(&self) -> bool {
        self.spos.success && self.pos.success
    }
}

/// Integer point with entries uniform in `[−9, 9]`, drawn from the stream
/// `(seed, stream)` so every trial is reproducible on its own.
pub fn sample_point(table: &VarTable, seed: u64, stream: u64) -> BTreeMap<Var, Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    table
        .vars()
        .iter()
        .map(|v| (v.clone(), Rational::from(rng.random_range(-9i64..=9))))
        .collect()
}

fn certify(
    symbols: &[SymbolPoly],
    target: usize,
    trials: usize,
    seed: u64,
    stream_base: u64,
) -> Result<RankWitness> {
    let table = symbols[0].poly.table().clone();
    let mut best = RankWitness {
        target_rank: target,
        achieved_rank: 0,
        trials_used: 0,
        point: BTreeMap::new(),
        success: false,
    };
    for trial in 0..trials {
        let point = sample_point(&table, seed, stream_base + trial as u64);
        let rank = jacobian_rank(symbols, &point)?;
        if trial == 0 || rank > best.achieved_rank {
            best.achieved_rank = rank;
            best.point = point
                .iter()
                .map(|(v, x)| (v.to_string(), x.clone()))
                .collect();
        }
        best.trials_used = trial + 1;
        if rank == target {
            best.success = true;
            break;
        }
    }
    Ok(best)
}

/// Jacobian-criterion certificate that `P(F_2), …, P(F_n)` are algebraically
/// independent on `SSym_n` and `F_1, …, F_n` on `Sym_n`.
pub fn independence_certificate(
    family: Family,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<IndependenceCertificate> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "independence certificates need n >= 2".into(),
        ));
    }
    if trials < 1 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let full: Vec<SymbolPoly> = (1..=n)
        .map(|k| family.symbol(n, k))
        .collect::<Result<_>>()?;
    let projected: Vec<SymbolPoly> = full[1..]
        .iter()
        .map(|s| project_symbol(s, ProjectionMode::Restrict))
        .collect::<Result<_>>()?;
    let spos = certify(&projected, n - 1, trials, seed, 0)?;
    let pos = certify(&full, n, trials, seed, 1 << 32)?;
    Ok(IndependenceCertificate {
        family,
        n,
        seed,
        trials,
        spos,
        pos,
    })
}

/// LaTeX rendering with `a_{ij}` variables, leading term first.
pub fn to_latex(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let var_tex = |v: &Var| match *v {
        Var::Sym(i, j) if i < 10 && j < 10 => format!("a_{{{i}{j}}}"),
        Var::Sym(i, j) => format!("a_{{{i},{j}}}"),
        Var::Entry(i, j) if i < 10 && j < 10 => format!("s_{{{i}{j}}}"),
        Var::Entry(i, j) => format!("s_{{{i},{j}}}"),
        Var::Chart(ref name) => name.clone(),
    };
    let mut out = String::new();
    for (k, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mag = c.abs();
        let monomial: String = monomial_tex(m, p.table(), &var_tex);
        let coeff = if mag.is_integer() {
            mag.to_string()
        } else {
            format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom())
        };
        if monomial.is_empty() {
            out.push_str(&coeff);
        } else {
            if !mag.is_one() {
                out.push_str(&coeff);
            }
            out.push_str(&monomial);
        }
    }
    out
}

fn monomial_tex(m: &Monomial, table: &VarTable, var_tex: &dyn Fn(&Var) -> String) -> String {
    let mut s = String::new();
    for (&e, v) in m.exps().iter().zip(table.vars()) {
        match e {
            0 => {}
            1 => s.push_str(&var_tex(v)),
            e if e < 10 => s.push_str(&format!("{}^{e}", var_tex(v))),
            e => s.push_str(&format!("{}^{{{e}}}", var_tex(v))),
        }
    }
    s
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

    /// Determinant of a symbolic matrix by the Leibniz formula on explicit
    /// index lists, used as an independent oracle for small minors.
    fn det2(t: &VarTable, i: usize, j: usize) -> Poly {
        &(&a(i, i, t) * &a(j, j, t)) - &a(i, j, t).pow(2)
    }

    #[test]
    fn maass_selberg_examples() {
        let t2 = VarTable::sym(2);
        assert_eq!(
            maass_selberg_symbol(2, 1).unwrap().poly,
            &a(1, 1, &t2) + &a(2, 2, &t2)
        );
        let expected =
            &(&a(1, 1, &t2).pow(2) + &a(1, 2, &t2).pow(2).scale(&r(2))) + &a(2, 2, &t2).pow(2);
        assert_eq!(maass_selberg_symbol(2, 2).unwrap().poly, expected);
        let t3 = VarTable::sym(3);
        assert_eq!(
            maass_selberg_symbol(3, 1).unwrap().poly,
            &(&a(1, 1, &t3) + &a(2, 2, &t3)) + &a(3, 3, &t3)
        );
        assert!(maass_selberg_symbol(0, 1).is_err());
        let high = maass_selberg_symbol(2, 3).unwrap();
        assert!(!high.label().unwrap().generator);
    }

    #[test]
    fn minor_examples() {
        for n in 1..=4 {
            assert_eq!(
                minor_sum_symbol(n, 1).unwrap().poly,
                maass_selberg_symbol(n, 1).unwrap().poly
            );
        }
        let t2 = VarTable::sym(2);
        assert_eq!(minor_sum_symbol(2, 2).unwrap().poly, det2(&t2, 1, 2));
        let t3 = VarTable::sym(3);
        let expected = &(&det2(&t3, 1, 2) + &det2(&t3, 1, 3)) + &det2(&t3, 2, 3);
        assert_eq!(minor_sum_symbol(3, 2).unwrap().poly, expected);
        assert!(minor_sum_symbol(2, 3).is_err());
    }

    #[test]
    fn kernel_and_restriction_example() {
        for mode in [ProjectionMode::Restrict, ProjectionMode::PiPrecompose] {
            assert!(project_symbol(&maass_selberg_symbol(3, 1).unwrap(), mode)
                .unwrap()
                .is_zero());
            assert!(project_symbol(&minor_sum_symbol(3, 1).unwrap(), mode)
                .unwrap()
                .is_zero());
        }
        let p = project_symbol(
            &maass_selberg_symbol(2, 2).unwrap(),
            ProjectionMode::Restrict,
        )
        .unwrap();
        let red = VarTable::reduced_sym(2);
        let expected = &a(1, 1, &red).pow(2).scale(&r(2)) + &a(1, 2, &red).pow(2).scale(&r(2));
        assert_eq!(p.poly, expected);
        assert_eq!(p.label().unwrap().to_string(), "P(delta_2)");
    }

    #[test]
    fn split_examples() {
        let red = VarTable::reduced_sym(2);
        let full = VarTable::sym(2);
        let zero = SymbolPoly::new(Poly::zero(&red), 2, Space::Spos).unwrap();
        assert!(split_symbol(&zero).unwrap().is_zero());
        let x = SymbolPoly::new(a(1, 1, &red), 2, Space::Spos).unwrap();
        let expected = (&a(1, 1, &full) - &a(2, 2, &full)).scale(&Rational::new(1, 2));
        assert_eq!(split_symbol(&x).unwrap().poly, expected);
        let pd2 = project_symbol(
            &maass_selberg_symbol(2, 2).unwrap(),
            ProjectionMode::Restrict,
        )
        .unwrap();
        let lifted = split_symbol(&pd2).unwrap();
        // tr(π(A)^2) for n = 2 is ((a11 - a22)^2)/2 + 2 a12^2
        let d = &a(1, 1, &full) - &a(2, 2, &full);
        let tr_pi_sq = &d.pow(2).scale(&Rational::new(1, 2)) + &a(1, 2, &full).pow(2).scale(&r(2));
        assert_eq!(lifted.poly, tr_pi_sq);
        assert_eq!(
            project_symbol(&lifted, ProjectionMode::Restrict)
                .unwrap()
                .poly,
            pd2.poly
        );
    }

    #[test]
    fn cayley_examples() {
        assert_eq!(
            cayley_orthogonal(&RatMatrix::zeros(3, 3)).unwrap().matrix(),
            &RatMatrix::identity(3)
        );
        let s = RatMatrix::from_i64(&[&[0, 1], &[-1, 0]]);
        assert_eq!(
            cayley_orthogonal(&s).unwrap().matrix(),
            &RatMatrix::from_i64(&[&[0, -1], &[1, 0]])
        );
        let mut half = RatMatrix::zeros(2, 2);
        half[(0, 1)] = Rational::new(1, 2);
        half[(1, 0)] = Rational::new(-1, 2);
        let k = cayley_orthogonal(&half).unwrap();
        let expected = RatMatrix::from_rows(vec![
            vec![Rational::new(3, 5), Rational::new(-4, 5)],
            vec![Rational::new(4, 5), Rational::new(3, 5)],
        ])
        .unwrap();
        assert_eq!(k.matrix(), &expected);
        assert!(cayley_orthogonal(&RatMatrix::from_i64(&[&[0, 1], &[1, 0]])).is_err());
    }

    #[test]
    fn invariance_examples() {
        let k = OrthogonalRational::new(RatMatrix::from_i64(&[&[0, -1], &[1, 0]])).unwrap();
        assert!(check_orthogonal_invariance(&maass_selberg_symbol(2, 2).unwrap(), &k).unwrap());
        let lone = SymbolPoly::new(a(1, 1, &VarTable::sym(2)), 2, Space::Pos).unwrap();
        assert!(!check_orthogonal_invariance(&lone, &k).unwrap());
        let id = OrthogonalRational::new(RatMatrix::identity(2)).unwrap();
        assert!(check_orthogonal_invariance(&lone, &id).unwrap());
    }

    #[test]
    fn char_poly_n2_explicit() {
        let c = char_poly_coefficients(2).unwrap();
        let t = VarTable::sym(2);
        assert_eq!(c[2], Poly::one(&t));
        assert_eq!(c[1], -(&a(1, 1, &t) + &a(2, 2, &t)));
        assert_eq!(c[0], det2(&t, 1, 2));
        for n in 1..=3 {
            assert!(char_poly_identity_check(n).unwrap());
        }
    }

    #[test]
    fn newton_examples() {
        assert!(newton_identity_check(2, 1).unwrap());
        assert!(newton_identity_check(2, 2).unwrap());
        assert!(newton_identity_check(3, 3).unwrap());
        assert!(newton_identity_check(2, 3).is_err());
    }

    fn point(t: &VarTable, vals: &[i64]) -> BTreeMap<Var, Rational> {
        t.vars()
            .iter()
            .cloned()
            .zip(vals.iter().map(|&x| r(x)))
            .collect()
    }

    #[test]
    fn jacobian_examples() {
        let pd2 = project_symbol(
            &maass_selberg_symbol(2, 2).unwrap(),
            ProjectionMode::Restrict,
        )
        .unwrap();
        let red = VarTable::reduced_sym(2);
        assert_eq!(
            jacobian_rank(std::slice::from_ref(&pd2), &point(&red, &[1, 1])).unwrap(),
            1
        );
        assert_eq!(jacobian_rank(&[pd2], &point(&red, &[0, 0])).unwrap(), 0);
        let full = VarTable::sym(2);
        let fam = [
            maass_selberg_symbol(2, 1).unwrap(),
            maass_selberg_symbol(2, 2).unwrap(),
        ];
        assert_eq!(jacobian_rank(&fam, &point(&full, &[1, 0, 2])).unwrap(), 2);
        let mixed = [fam[0].clone(), minor_sum_symbol(3, 2).unwrap()];
        assert_eq!(
            jacobian_rank(&mixed, &point(&full, &[1, 0, 2])),
            Err(Error::VarTableMismatch)
        );
    }

    #[test]
    fn certificates_small() {
        let c = independence_certificate(Family::MaassSelberg, 2, 5, 11).unwrap();
        assert!(c.success());
        assert_eq!(c.spos.achieved_rank, 1);
        let c = independence_certificate(Family::MaassSelberg, 3, 5, 7).unwrap();
        assert!(c.success());
        assert_eq!(c.spos.achieved_rank, 2);
        let c = independence_certificate(Family::Minor, 3, 5, 7).unwrap();
        assert!(c.success());
        assert_eq!(c.pos.achieved_rank, 3);
        assert!(independence_certificate(Family::Minor, 1, 5, 7).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let t = VarTable::sym(3);
        assert_eq!(sample_point(&t, 42, 3), sample_point(&t, 42, 3));
        assert_ne!(sample_point(&t, 42, 3), sample_point(&t, 42, 4));
        assert!(sample_point(&t, 1, 0).values().all(|x| x.abs() <= r(9)));
    }

    #[test]
    fn latex_rendering() {
        assert_eq!(
            maass_selberg_symbol(2, 2).unwrap().to_latex(),
            "a_{11}^2 + 2a_{12}^2 + a_{22}^2"
        );
        assert_eq!(
            minor_sum_symbol(2, 2).unwrap().to_latex(),
            "a_{11}a_{22} - a_{12}^2"
        );
        let p = project_symbol(
            &maass_selberg_symbol(2, 1).unwrap(),
            ProjectionMode::Restrict,
        )
        .unwrap();
        assert_eq!(p.to_latex(), "0");
        let red = VarTable::reduced_sym(2);
        let x = SymbolPoly::new(a(1, 1, &red), 2, Space::Spos).unwrap();
        assert_eq!(
            split_symbol(&x).unwrap().to_latex(),
            "\\frac{1}{2}a_{11} - \\frac{1}{2}a_{22}"
        );
    }
}
