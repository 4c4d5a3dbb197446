//! Named verification suites.
//!
//! Every suite is deterministic given its configuration: the batteries are
//! fixed here and all randomness flows from the seed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::action::{
    base_point_battery, leading_symbol_product_report, monomial_battery, recover_symbol,
    translation_battery, Composer, OperatorAction, TestFunction,
};
use crate::error::{Error, Result};
use crate::jet::{apply_symbol_to_jet, ChartMode, ChartSpec};
use crate::matrix::RatMatrix;
use crate::poly::{upper_pairs, Var};
use crate::rational::Rational;
use crate::report::{Check, VerificationReport};
use crate::symbols::{
    cayley_orthogonal, char_poly_identity_check, check_orthogonal_invariance,
    independence_certificate, newton_identity_check, project_symbol, split_symbol, Family,
    OrthogonalRational, ProjectionMode, SymbolPoly,
};

const FAMILIES: [Family; 2] = [Family::MaassSelberg, Family::Minor];
const MODES: [ProjectionMode; 2] = [ProjectionMode::Restrict, ProjectionMode::PiPrecompose];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Suite {
    Kernel,
    ProjectionEquiv,
    Splitting,
    Invariance,
    Newton,
    Charpoly,
    Independence,
    ChartAgreement,
    Morphism,
    Composition,
    Equivariance,
    Recovery,
    Eigenfunction,
    All,
}

impl Suite {
    pub const EACH: [Suite; 13] = [
        Suite::Kernel,
        Suite::ProjectionEquiv,
        Suite::Splitting,
        Suite::Invariance,
        Suite::Newton,
        Suite::Charpoly,
        Suite::Independence,
        Suite::ChartAgreement,
        Suite::Morphism,
        Suite::Composition,
        Suite::Equivariance,
        Suite::Recovery,
        Suite::Eigenfunction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "KERNEL",
            Suite::ProjectionEquiv => "PROJECTION_EQUIV",
            Suite::Splitting => "SPLITTING",
            Suite::Invariance => "INVARIANCE",
            Suite::Newton => "NEWTON",
            Suite::Charpoly => "CHARPOLY",
            Suite::Independence => "INDEPENDENCE",
            Suite::ChartAgreement => "CHART_AGREEMENT",
            Suite::Morphism => "MORPHISM",
            Suite::Composition => "COMPOSITION",
            Suite::Equivariance => "EQUIVARIANCE",
            Suite::Recovery => "RECOVERY",
            Suite::Eigenfunction => "EIGENFUNCTION",
            Suite::All => "ALL",
        }
    }

    /// Suites that only manipulate symbols default to `n_max = 4`; those that
    /// push functions through jets default to 3.
    pub fn default_n_max(self) -> usize {
        match self {
            Suite::Kernel
            | Suite::ProjectionEquiv
            | Suite::Splitting
            | Suite::Invariance
            | Suite::Newton
            | Suite::Charpoly
            | Suite::Independence => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Suite::EACH
            .iter()
            .chain(&[Suite::All])
            .copied()
            .find(|suite| suite.name() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

/// Knobs shared by all suites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    /// Overrides each suite's default upper size when set.
    pub n_max: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    /// Highest composite degree recovered in the composition suite.
    pub degree: u32,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n_max: None,
            seed: 7,
            trials: 5,
            degree: 4,
        }
    }
}

impl SuiteConfig {
    fn n_max_for(&self, suite: Suite) -> usize {
        self.n_max.unwrap_or_else(|| suite.default_n_max())
    }
}

/// Runs one suite (or all of them) and assembles the report.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<VerificationReport> {
    if let Some(n) = config.n_max {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_max must be at least 2, got {n}"
            )));
        }
    }
    if config.trials < 1 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut checks = Vec::new();
    let targets: Vec<Suite> = if suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![suite]
    };
    let mut reported_n_max = 0;
    for s in targets {
        let n_max = config.n_max_for(s);
        reported_n_max = reported_n_max.max(n_max);
        let mut found = match s {
            Suite::Kernel => kernel(n_max)?,
            Suite::ProjectionEquiv => projection_equiv(n_max)?,
            Suite::Splitting => splitting(n_max)?,
            Suite::Invariance => invariance(n_max)?,
            Suite::Newton => newton(n_max)?,
            Suite::Charpoly => charpoly(n_max)?,
            Suite::Independence => independence(n_max, config.trials, config.seed)?,
            Suite::ChartAgreement => chart_agreement(n_max)?,
            Suite::Morphism => morphism(n_max)?,
            Suite::Composition => composition(n_max, config.degree)?,
            Suite::Equivariance => equivariance(n_max)?,
            Suite::Recovery => recovery(n_max)?,
            Suite::Eigenfunction => eigenfunction(n_max, config.seed)?,
            Suite::All => unreachable!(),
        };
        if suite == Suite::All {
            for c in &mut found {
                c.name = format!("{}/{}", s.name().to_ascii_lowercase(), c.name);
            }
        }
        checks.extend(found);
    }
    Ok(VerificationReport::new(
        suite.name(),
        reported_n_max,
        config.seed,
        checks,
    ))
}

fn mode_tag(m: ProjectionMode) -> &'static str {
    match m {
        ProjectionMode::Restrict => "restrict",
        ProjectionMode::PiPrecompose => "pi",
    }
}

/// `P(δ₁) = P(η₁) = 0` in both projection modes.
pub fn kernel(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for fam in FAMILIES {
            let q = fam.symbol(n, 1)?;
            for mode in MODES {
                let p = project_symbol(&q, mode)?;
                out.push(
                    Check::new(
                        format!("{}_1/n={n}/{}", fam.short_name(), mode_tag(mode)),
                        p.is_zero(),
                    )
                    .param("n", n)
                    .param("family", fam)
                    .param("mode", mode)
                    .witness("projected", p.to_string()),
                );
            }
        }
    }
    Ok(out)
}

/// Restriction and π-precomposition give the same radial part.
pub fn projection_equiv(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for fam in FAMILIES {
            for k in 1..=n {
                let q = fam.symbol(n, k)?;
                let a = project_symbol(&q, ProjectionMode::Restrict)?;
                let b = project_symbol(&q, ProjectionMode::PiPrecompose)?;
                out.push(
                    Check::new(
                        format!("{}_{k}/n={n}", fam.short_name()),
                        a.poly() == b.poly(),
                    )
                    .param("n", n)
                    .param("k", k)
                    .param("family", fam)
                    .witness("terms", a.poly().num_terms()),
                );
            }
        }
    }
    Ok(out)
}

/// Projecting the split of `P(F_k)` returns `P(F_k)`.
pub fn splitting(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for fam in FAMILIES {
            for k in 2..=n {
                let p = project_symbol(&fam.symbol(n, k)?, ProjectionMode::Restrict)?;
                let back = project_symbol(&split_symbol(&p)?, ProjectionMode::Restrict)?;
                out.push(
                    Check::new(
                        format!("{}_{k}/n={n}", fam.short_name()),
                        back.poly() == p.poly(),
                    )
                    .param("n", n)
                    .param("k", k)
                    .param("family", fam),
                );
            }
        }
    }
    Ok(out)
}

/// Three fixed skew matrices per size, turned orthogonal by Cayley.
pub fn orthogonal_battery(n: usize) -> Result<Vec<OrthogonalRational>> {
    let skew = |f: &dyn Fn(usize, usize) -> Rational| {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                m[(j, i)] = -&v;
                m[(i, j)] = v;
            }
        }
        m
    };
    let first = skew(&|i, j| {
        if i == 0 && j == 1 {
            Rational::new(1, 2)
        } else {
            Rational::zero()
        }
    });
    let second = skew(&|i, j| Rational::from((i + j) as i64));
    let third =
        skew(&|i, j| Rational::new(if (i + j) % 2 == 0 { 1 } else { -2 }, (j - i + 2) as i64));
    [first, second, third]
        .iter()
        .map(cayley_orthogonal)
        .collect()
}

/// Exact `O(n)` invariance of every `δ_k`, `η_k`.
pub fn invariance(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let ks = orthogonal_battery(n)?;
        for fam in FAMILIES {
            for k in 1..=n {
                let q = fam.symbol(n, k)?;
                for (w, orth) in ks.iter().enumerate() {
                    out.push(
                        Check::new(
                            format!("{}_{k}/n={n}/K{w}", fam.short_name()),
                            check_orthogonal_invariance(&q, orth)?,
                        )
                        .param("n", n)
                        .param("k", k)
                        .param("family", fam)
                        .witness("K", orth.matrix()),
                    );
                }
            }
        }
    }
    Ok(out)
}

pub fn newton(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for k in 1..=n {
            out.push(
                Check::new(format!("n={n}/k={k}"), newton_identity_check(n, k)?)
                    .param("n", n)
                    .param("k", k),
            );
        }
    }
    Ok(out)
}

pub fn charpoly(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        out.push(Check::new(format!("n={n}"), char_poly_identity_check(n)?).param("n", n));
    }
    Ok(out)
}

/// Jacobian rank certificates for both families.
pub fn independence(n_max: usize, trials: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for fam in FAMILIES {
            let cert = independence_certificate(fam, n, trials, seed)?;
            out.push(
                Check::new(
                    format!("{}/n={n}/spos", fam.short_name()),
                    cert.spos.success,
                )
                .param("n", n)
                .param("family", fam)
                .param("trials", trials)
                .witness("rank", cert.spos.achieved_rank)
                .witness("target", cert.spos.target_rank)
                .witness("trials_used", cert.spos.trials_used)
                .witness("point", &cert.spos.point),
            );
            out.push(
                Check::new(format!("{}/n={n}/pos", fam.short_name()), cert.pos.success)
                    .param("n", n)
                    .param("family", fam)
                    .param("trials", trials)
                    .witness("rank", cert.pos.achieved_rank)
                    .witness("target", cert.pos.target_rank)
                    .witness("trials_used", cert.pos.trials_used)
                    .witness("point", &cert.pos.point),
            );
        }
    }
    Ok(out)
}

/// Compares two value streams over a battery; records the first mismatch.
fn battery_check(
    name: String,
    battery: &[TestFunction],
    mut lhs: impl FnMut(&TestFunction) -> Result<Rational>,
    mut rhs: impl FnMut(&TestFunction) -> Result<Rational>,
) -> Result<Check> {
    let mut mismatch = None;
    let mut nonzero = 0usize;
    for f in battery {
        let a = lhs(f)?;
        let b = rhs(f)?;
        if !a.is_zero() {
            nonzero += 1;
        }
        if a != b && mismatch.is_none() {
            mismatch = Some((f.poly().to_string(), a, b));
        }
    }
    let mut check = Check::new(name, mismatch.is_none())
        .witness("functions", battery.len())
        .witness("nonzero_values", nonzero);
    if let Some((f, a, b)) = mismatch {
        check = check
            .witness("function", f)
            .witness("lhs", a)
            .witness("rhs", b);
    }
    Ok(check)
}

/// `δ_k` through projected charts equals `P(δ_k)` through traceless charts,
/// on the degree-≤3 monomial battery at the fixed base points.
pub fn chart_agreement(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let battery = monomial_battery(n, 3);
        for fam in FAMILIES {
            for k in 1..=n {
                let q = fam.symbol(n, k)?;
                let p = project_symbol(&q, ProjectionMode::Restrict)?;
                let mut lhs = OperatorAction::new(q, ChartMode::SposProjection)?;
                let mut rhs = OperatorAction::new(p, ChartMode::SposChart)?;
                for (b, g) in base_point_battery(n).iter().enumerate() {
                    let name = format!("{}_{k}/n={n}/g{b}", fam.short_name());
                    let check =
                        battery_check(name, &battery, |f| lhs.apply(f, g), |f| rhs.apply(f, g))?;
                    out.push(
                        check
                            .param("n", n)
                            .param("k", k)
                            .param("family", fam)
                            .param("base", g),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// `P(δ_j δ_k) f = P(δ_j) P(δ_k) f` on the battery; for `j = 1` both sides
/// must also vanish identically.
pub fn morphism(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let battery = monomial_battery(n, 3);
        for j in 1..=2 {
            for k in 1..=2 {
                let dj = Family::MaassSelberg.symbol(n, j)?;
                let dk = Family::MaassSelberg.symbol(n, k)?;
                let pj = project_symbol(&dj, ProjectionMode::Restrict)?;
                let pk = project_symbol(&dk, ProjectionMode::Restrict)?;
                for (b, g) in base_point_battery(n).iter().enumerate() {
                    let degs = (j as u32, k as u32);
                    let mut lhs = Composer::with_degrees(
                        &dj,
                        &dk,
                        g,
                        ChartMode::SposProjection,
                        degs.0,
                        degs.1,
                    )?;
                    let mut rhs =
                        Composer::with_degrees(&pj, &pk, g, ChartMode::SposChart, degs.0, degs.1)?;
                    let name = format!("delta_{j}.delta_{k}/n={n}/g{b}");
                    let mut check =
                        battery_check(name, &battery, |f| lhs.apply(f), |f| rhs.apply(f))?;
                    if j == 1 {
                        let zero = check.witnesses["nonzero_values"] == serde_json::json!(0);
                        check.pass &= zero;
                        check = check.witness("zero_operator", zero);
                    }
                    out.push(
                        check
                            .param("n", n)
                            .param("j", j)
                            .param("k", k)
                            .param("base", g),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// `(j, k)` pairs for the composition suite: every `j <= k <= n` with
/// `j + k` at most `degree` (at most 3 once `n >= 3`).
pub fn composition_pairs(n: usize, degree: u32) -> Vec<(usize, usize)> {
    let cap = if n >= 3 { degree.min(3) } else { degree } as usize;
    let mut pairs = Vec::new();
    for j in 1..=n {
        for k in j..=n {
            if j + k <= cap {
                pairs.push((j, k));
            }
        }
    }
    pairs
}

/// Leading symbol of `δ_j δ_k` is `tr(A^j) tr(A^k)`.
pub fn composition(n_max: usize, degree: u32) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for (j, k) in composition_pairs(n, degree) {
            let r = leading_symbol_product_report(j, k, n)?;
            out.push(
                Check::new(format!("delta_{j}.delta_{k}/n={n}"), r.holds)
                    .param("n", n)
                    .param("j", j)
                    .param("k", k)
                    .witness("composite", r.composite.poly().to_json())
                    .witness("remainder_degree", r.remainder.degree()),
            );
        }
    }
    Ok(out)
}

/// `D(f∘τ_g)(h) = (Df)(g·h)` for `δ₂` on `Pos_n` and `P(δ₂)` on `SPos_n`.
pub fn equivariance(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let battery = monomial_battery(n, 3);
        let d2 = Family::MaassSelberg.symbol(n, 2)?;
        let p2 = project_symbol(&d2, ProjectionMode::Restrict)?;
        for (tag, q, mode) in [
            ("delta_2", d2, ChartMode::Pos),
            ("P(delta_2)", p2, ChartMode::SposChart),
        ] {
            let mut action = OperatorAction::new(q, mode)?;
            for (t, g) in translation_battery(n).iter().enumerate() {
                for (b, h) in base_point_battery(n).iter().enumerate() {
                    let gh = g.mul(h)?;
                    let mut mismatch = None;
                    for f in &battery {
                        let lhs = action.apply(&f.translate(g)?, h)?;
                        let rhs = action.apply(f, &gh)?;
                        if lhs != rhs && mismatch.is_none() {
                            mismatch = Some((f.poly().to_string(), lhs, rhs));
                        }
                    }
                    let mut check =
                        Check::new(format!("{tag}/n={n}/t{t}/g{b}"), mismatch.is_none())
                            .param("n", n)
                            .param("mode", mode)
                            .param("translation", g)
                            .param("base", h)
                            .witness("functions", battery.len());
                    if let Some((f, a, b)) = mismatch {
                        check = check
                            .witness("function", f)
                            .witness("lhs", a)
                            .witness("rhs", b);
                    }
                    out.push(check);
                }
            }
        }
    }
    Ok(out)
}

/// Symbols recovered from black-box actions match the builders.
pub fn recovery(n_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let targets = [
            ("delta_1", Family::MaassSelberg.symbol(n, 1)?),
            ("delta_2", Family::MaassSelberg.symbol(n, 2)?),
            ("eta_2", Family::Minor.symbol(n, 2)?),
        ];
        let id = RatMatrix::identity(n);
        for (tag, q) in targets {
            let d = q.degree() as u32;
            let mut action = OperatorAction::new(q.clone(), ChartMode::Pos)?;
            let rec = recover_symbol(|f| action.apply(f, &id), n, d)?;
            out.push(
                Check::new(format!("{tag}/n={n}"), rec.poly() == q.poly())
                    .param("n", n)
                    .param("degree", d)
                    .witness("recovered", rec.to_string()),
            );
        }
    }
    Ok(out)
}

/// Seeded symmetric rationals with entries `p/q`, `|p| <= 9`, `1 <= q <= 4`.
pub fn random_symmetric(n: usize, seed: u64, stream: u64) -> RatMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut m = RatMatrix::zeros(n, n);
    for (i, j) in upper_pairs(n) {
        let v = Rational::new(rng.random_range(-9..=9), rng.random_range(1..=4));
        m[(i - 1, j - 1)] = v.clone();
        m[(j - 1, i - 1)] = v;
    }
    m
}

fn traceless(a: &RatMatrix) -> RatMatrix {
    let n = a.rows();
    let shift = RatMatrix::identity(n).scale(&(a.trace() / Rational::from(n as i64)));
    a.add(&shift.neg())
}

fn assignment(q: &SymbolPoly, a: &RatMatrix) -> BTreeMap<Var, Rational> {
    q.poly()
        .table()
        .vars()
        .iter()
        .map(|v| {
            let (i, j) = v.indices().expect("symbol variables are matrix entries");
            (v.clone(), a[(i - 1, j - 1)].clone())
        })
        .collect()
}

/// `Q(∂)` applied to the jet of `e^{⟨X,A⟩}` returns `Q(A)`, on `Pos_n` with
/// random symmetric `A` and on `SPos_n` with their traceless parts.
pub fn eigenfunction(n_max: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let samples: Vec<RatMatrix> = (0..10)
            .map(|s| random_symmetric(n, seed, (n * 100 + s) as u64))
            .collect();
        for fam in FAMILIES {
            for k in 1..=n {
                let q = fam.symbol(n, k)?;
                let p = project_symbol(&q, ProjectionMode::Restrict)?;
                let mut pos_ok = true;
                let mut spos_ok = true;
                for a in &samples {
                    let pos_chart =
                        ChartSpec::standard(ChartMode::Pos, RatMatrix::identity(n), k as u32, "x")?;
                    let lhs = apply_symbol_to_jet(q.poly(), &pos_chart.exp_pairing_jet(a)?, "x")?;
                    pos_ok &= lhs == q.poly().eval(&assignment(&q, a))?;

                    let a0 = traceless(a);
                    let spos_chart = ChartSpec::standard(
                        ChartMode::SposChart,
                        RatMatrix::identity(n),
                        k as u32,
                        "x",
                    )?;
                    let lhs =
                        apply_symbol_to_jet(p.poly(), &spos_chart.exp_pairing_jet(&a0)?, "x")?;
                    spos_ok &= lhs == p.poly().eval(&assignment(&p, &a0))?
                        && lhs == q.poly().eval(&assignment(&q, &a0))?;
                }
                let base = format!("{}_{k}/n={n}", fam.short_name());
                out.push(
                    Check::new(format!("{base}/pos"), pos_ok)
                        .param("n", n)
                        .param("k", k)
                        .param("samples", 10),
                );
                out.push(
                    Check::new(format!("{base}/spos"), spos_ok)
                        .param("n", n)
                        .param("k", k)
                        .param("samples", 10),
                );
            }
        }
    }
    Ok(out)
}
