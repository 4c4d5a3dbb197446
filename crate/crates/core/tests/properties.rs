use std::collections::BTreeMap;

use invdiff::action::{apply_operator, equivariance_check, TestFunction};
use invdiff::jet::{
    apply_symbol_to_jet, chart_jet, chart_var, jet_matrix_exp, ChartMode, ChartSpec, Jet, JetMatrix,
};
use invdiff::linalg::{rank, solve};
use invdiff::matrix::RatMatrix;
use invdiff::poly::{upper_pairs, Poly, Var, VarTable};
use invdiff::rational::Rational;
use invdiff::symbols::{
    cayley_orthogonal, check_orthogonal_invariance, project_symbol, split_symbol, Family,
    ProjectionMode, Space, SymbolPoly,
};
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, q)| Rational::new(p, q))
}

fn poly_over(table: VarTable, max_exp: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    let nvars = table.len();
    prop::collection::vec(
        (prop::collection::vec(0..=max_exp, nvars), rat()),
        0..=max_terms,
    )
    .prop_map(move |terms| Poly::from_terms(&table, terms).unwrap())
}

fn sym2_poly() -> impl Strategy<Value = Poly> {
    poly_over(VarTable::sym(2), 2, 5)
}

fn symmetric(n: usize) -> impl Strategy<Value = RatMatrix> {
    prop::collection::vec(rat(), n * (n + 1) / 2).prop_map(move |vals| {
        let mut m = RatMatrix::zeros(n, n);
        for ((i, j), v) in upper_pairs(n).zip(vals) {
            m[(i - 1, j - 1)] = v.clone();
            m[(j - 1, i - 1)] = v;
        }
        m
    })
}

fn skew(n: usize) -> impl Strategy<Value = RatMatrix> {
    symmetric(n).prop_map(move |s| {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = s[(i, j)].clone();
                m[(j, i)] = -&s[(i, j)];
            }
        }
        m
    })
}

/// Unimodular: lower unitriangular times upper unitriangular.
fn unimodular(n: usize) -> impl Strategy<Value = RatMatrix> {
    (skew(n), skew(n)).prop_map(move |(a, b)| {
        let mut l = RatMatrix::identity(n);
        let mut u = RatMatrix::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                l[(j, i)] = a[(i, j)].clone();
                u[(i, j)] = b[(i, j)].clone();
            }
        }
        l.mul(&u).unwrap()
    })
}

fn point(table: &VarTable, vals: &[Rational]) -> BTreeMap<Var, Rational> {
    table
        .vars()
        .iter()
        .cloned()
        .zip(vals.iter().cloned())
        .collect()
}

fn assignment(table: &VarTable, a: &RatMatrix) -> BTreeMap<Var, Rational> {
    table
        .vars()
        .iter()
        .map(|v| {
            let (i, j) = v.indices().unwrap();
            (v.clone(), a[(i - 1, j - 1)].clone())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_field_laws(a in rat(), b in rat(), c in rat()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if !a.is_zero() {
            prop_assert!((&a * &a.recip().unwrap()).is_one());
        }
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
    }

    #[test]
    fn poly_ring_laws(p in sym2_poly(), q in sym2_poly(), r in sym2_poly()) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        let table = VarTable::sym(2);
        prop_assert_eq!(&p * &Poly::one(&table), p.clone());
    }

    #[test]
    fn degree_of_product(p in sym2_poly(), q in sym2_poly()) {
        if !p.is_zero() && !q.is_zero() {
            prop_assert_eq!((&p * &q).degree(), p.degree() + q.degree());
        }
    }

    #[test]
    fn evaluation_is_a_ring_morphism(p in sym2_poly(), q in sym2_poly(), vals in prop::collection::vec(rat(), 3)) {
        let at = point(&VarTable::sym(2), &vals);
        let (pv, qv) = (p.eval(&at).unwrap(), q.eval(&at).unwrap());
        prop_assert_eq!((&p * &q).eval(&at).unwrap(), &pv * &qv);
        prop_assert_eq!((&p + &q).eval(&at).unwrap(), &pv + &qv);
        prop_assert_eq!(p.eval_slice(&vals), pv);
    }

    #[test]
    fn partial_derivative_leibniz(p in sym2_poly(), q in sym2_poly(), k in 0usize..3) {
        let v = VarTable::sym(2).vars()[k].clone();
        let lhs = (&p * &q).partial(&v).unwrap();
        let rhs = &(&p.partial(&v).unwrap() * &q) + &(&p * &q.partial(&v).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn linear_substitution_is_a_morphism(
        p in sym2_poly(),
        q in sym2_poly(),
        images in prop::collection::vec(poly_over(VarTable::sym(2), 1, 3), 3),
    ) {
        let table = VarTable::sym(2);
        let images: BTreeMap<Var, Poly> = table
            .vars()
            .iter()
            .cloned()
            .zip(images.into_iter().map(|img| img.truncate(1)))
            .collect();
        let sub = |x: &Poly| x.substitute_linear(&images, &table).unwrap();
        prop_assert_eq!(sub(&(&p * &q)), &sub(&p) * &sub(&q));
        prop_assert_eq!(sub(&(&p + &q)), &sub(&p) + &sub(&q));
    }

    #[test]
    fn poly_json_round_trip(p in sym2_poly()) {
        prop_assert_eq!(Poly::from_json_str(&p.to_json_string()).unwrap(), p);
    }

    #[test]
    fn jet_truncation_commutes_with_product(p in sym2_poly(), q in sym2_poly(), d in 0u32..4) {
        let lhs = Jet::new(&p * &q, d);
        let rhs = Jet::new(p.clone(), d).try_mul(&Jet::new(q.clone(), d)).unwrap();
        prop_assert_eq!(lhs, rhs);
        let back = Jet::from_json(&Jet::new(p.clone(), d).to_json()).unwrap();
        prop_assert_eq!(back, Jet::new(p, d));
    }

    #[test]
    fn exp_of_nilpotent_is_invertible(coeffs in prop::collection::vec(rat(), 9), d in 1u32..4) {
        let table = VarTable::new(vec![chart_var("x", 1, 1), chart_var("x", 1, 2), chart_var("x", 2, 2)]).unwrap();
        let lin = |k: usize| {
            let terms = (0..3).map(|v| {
                let mut e = vec![0, 0, 0];
                e[v] = 1;
                (e, coeffs[3 * k + v].clone())
            });
            Jet::new(Poly::from_terms(&table, terms).unwrap(), d)
        };
        let n = JetMatrix::from_fn(2, |i, j| lin(i + j));
        let fwd = jet_matrix_exp(&n).unwrap();
        let back = jet_matrix_exp(&n.scale(&Rational::from(-1))).unwrap();
        prop_assert_eq!(fwd.try_mul(&back).unwrap(), JetMatrix::identity(2, &table, d));
        prop_assert!(fwd.is_symmetric());
    }

    #[test]
    fn pos_chart_jet_shape(g in unimodular(3), diag in prop::collection::vec(1i64..5, 3)) {
        let mut scaled = g.clone();
        for j in 0..3 {
            for i in 0..3 {
                scaled[(i, j)] = &scaled[(i, j)] * &Rational::from(diag[j]);
            }
        }
        let spec = ChartSpec::standard(ChartMode::Pos, scaled.clone(), 2, "x").unwrap();
        let s = chart_jet(&spec).unwrap();
        prop_assert!(s.is_symmetric());
        let ggt = scaled.mul(&scaled.transpose()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(s.get(i, j).constant_term(), ggt[(i, j)].clone());
            }
        }
        // det(g e^{2X} gᵀ) = det(g)² e^{2 tr X}
        let det_g = scaled.det().unwrap();
        let two = RatMatrix::identity(3).scale(&Rational::from(2));
        let expected = spec.exp_pairing_jet(&two).unwrap().scale(&(&det_g * &det_g));
        prop_assert_eq!(s.det(), expected);
    }

    #[test]
    fn spos_charts_have_unit_determinant(g in unimodular(3)) {
        for mode in [ChartMode::SposProjection, ChartMode::SposChart] {
            let spec = ChartSpec::standard(mode, g.clone(), 3, "x").unwrap();
            let s = chart_jet(&spec).unwrap();
            prop_assert_eq!(s.det(), Jet::one(s.table(), 3));
        }
    }

    #[test]
    fn exponentials_are_eigenfunctions(a in symmetric(3), k in 1usize..=3) {
        for fam in [Family::MaassSelberg, Family::Minor] {
            let q = fam.symbol(3, k).unwrap();
            let spec = ChartSpec::standard(ChartMode::Pos, RatMatrix::identity(3), k as u32, "x").unwrap();
            let value = apply_symbol_to_jet(q.poly(), &spec.exp_pairing_jet(&a).unwrap(), "x").unwrap();
            prop_assert_eq!(value, q.poly().eval(&assignment(q.poly().table(), &a)).unwrap());
        }
    }

    #[test]
    fn restriction_is_multiplicative(p in sym2_poly(), q in sym2_poly()) {
        let sp = SymbolPoly::new(p.clone(), 2, Space::Pos).unwrap();
        let sq = SymbolPoly::new(q.clone(), 2, Space::Pos).unwrap();
        for mode in [ProjectionMode::Restrict, ProjectionMode::PiPrecompose] {
            let prod = project_symbol(&sp.mul(&sq).unwrap(), mode).unwrap();
            let lhs = project_symbol(&sp, mode).unwrap();
            let rhs = project_symbol(&sq, mode).unwrap();
            prop_assert_eq!(prod.poly().clone(), lhs.poly() * rhs.poly());
        }
    }

    #[test]
    fn projection_undoes_splitting(p in poly_over(VarTable::reduced_sym(3), 2, 5)) {
        let q1 = SymbolPoly::new(p.clone(), 3, Space::Spos).unwrap();
        let back = project_symbol(&split_symbol(&q1).unwrap(), ProjectionMode::Restrict).unwrap();
        prop_assert_eq!(back.poly(), &p);
    }

    #[test]
    fn families_are_orthogonally_invariant(s in skew(3), k in 1usize..=3) {
        let orth = cayley_orthogonal(&s).unwrap();
        let m = orth.matrix();
        prop_assert_eq!(m.mul(&m.transpose()).unwrap(), RatMatrix::identity(3));
        for fam in [Family::MaassSelberg, Family::Minor] {
            prop_assert!(check_orthogonal_invariance(&fam.symbol(3, k).unwrap(), &orth).unwrap());
        }
    }

    #[test]
    fn rank_is_transpose_invariant(m in symmetric(3), c in skew(3)) {
        let a = m.add(&c);
        prop_assert_eq!(rank(&a), rank(&a.transpose()));
        prop_assert!(rank(&a.mul(&c).unwrap()) <= rank(&c));
    }

    #[test]
    fn solve_inverts_unimodular(g in unimodular(3), b in prop::collection::vec(rat(), 3)) {
        let x = solve(&g, &b).unwrap();
        for i in 0..3 {
            let row: Rational = (0..3).map(|j| &g[(i, j)] * &x[j]).sum();
            prop_assert_eq!(&row, &b[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn operators_are_linear(p in poly_over(VarTable::entries(2), 2, 4), q in poly_over(VarTable::entries(2), 2, 4), c in rat(), h in unimodular(2)) {
        let d2 = Family::MaassSelberg.symbol(2, 2).unwrap();
        let f = TestFunction::new(&p, 2).unwrap();
        let g = TestFunction::new(&q, 2).unwrap();
        let sum = TestFunction::new(&(&p + &q.scale(&c)), 2).unwrap();
        for mode in [ChartMode::Pos, ChartMode::SposProjection] {
            let lhs = apply_operator(&d2, &sum, &h, mode).unwrap();
            let rhs = &apply_operator(&d2, &f, &h, mode).unwrap() + &(&c * &apply_operator(&d2, &g, &h, mode).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn operators_commute_with_translations(p in poly_over(VarTable::entries(2), 2, 4), g in unimodular(2), h in unimodular(2)) {
        let f = TestFunction::new(&p, 2).unwrap();
        let d2 = Family::MaassSelberg.symbol(2, 2).unwrap();
        let pd2 = project_symbol(&d2, ProjectionMode::Restrict).unwrap();
        prop_assert!(equivariance_check(&d2, &g, &f, &h, ChartMode::Pos).unwrap());
        prop_assert!(equivariance_check(&Family::Minor.symbol(2, 2).unwrap(), &g, &f, &h, ChartMode::Pos).unwrap());
        prop_assert!(equivariance_check(&pd2, &g, &f, &h, ChartMode::SposChart).unwrap());
    }

    #[test]
    fn chart_and_projection_modes_agree(p in poly_over(VarTable::entries(3), 2, 4), h in unimodular(3), k in 1usize..=3) {
        let f = TestFunction::new(&p, 3).unwrap();
        let q = Family::MaassSelberg.symbol(3, k).unwrap();
        let pq = project_symbol(&q, ProjectionMode::Restrict).unwrap();
        prop_assert_eq!(
            apply_operator(&q, &f, &h, ChartMode::SposProjection).unwrap(),
            apply_operator(&pq, &f, &h, ChartMode::SposChart).unwrap()
        );
    }
}
