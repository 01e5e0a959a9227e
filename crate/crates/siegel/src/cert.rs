//! Machine-checkable certificates.
//!
//! Every verification routine in this module produces a [`Certificate`]: an
//! ordered list of steps, each carrying its inputs as plain literals, the
//! computed value, the expected value, and a pass flag. A certificate passes
//! exactly when all of its steps pass, and every step can be recomputed from
//! its recorded inputs alone.
//!
//! The routines fall into four groups:
//!
//! * closed-form cocycle lemmas checked against the numeric oracle on
//!   seeded random instances ([`verify_lemma`]);
//! * the seven-matrix commutation identity and its cocycle side conditions
//!   ([`bms_build`], [`bms_w_check`]);
//! * exact 2x2 identities used by the symbol calculus
//!   ([`small_identities`]) and the Kronecker square-root and sign chains
//!   ([`krons_certificate`], [`zpir_check`], [`deligne_certificate`]);
//! * empirical Mennicke-symbol axioms for a concrete multiplier evaluator
//!   ([`mennicke_axiom_check`]).
//!
//! Orientation. Cocycle values appear in two orientations: the continuation
//! orientation computed by [`crate::cocycle::w_cocycle`], and the composition
//! orientation (its negative) in which multiplier systems multiply; see
//! [`crate::genus1`]. Chain steps that feed a multiplier relation record the
//! composition value and cross-check the continuation value beside it.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

use crate::cocycle::{self, CocycleError};
use crate::forms::{self, FormsError};
use crate::genus1::{self, TableError};
use crate::matrix::{MatrixError, ParabolicClass, SiegelPoint, SymplecticMatrix};
use crate::sample::{self, SampleError};
use crate::symbols::{self, SymbolError};

#[derive(Debug, thiserror::Error)]
pub enum CertError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("unknown lemma tag {0:?}")]
    UnknownTag(String),
    #[error("level must be a positive multiple of 4, got {0}")]
    BadLevel(i64),
    #[error("parameter constraint violated: {0}")]
    BadParameters(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search exhausted below bound {bound} at level {q}")]
    SearchExhausted { q: i64, bound: i64 },
}

/// One verification step; `pass` states whether computed met expected.
#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub description: String,
    pub inputs: BTreeMap<String, String>,
    pub computed: String,
    pub expected: String,
    pub pass: bool,
}

/// An ordered, self-contained verification record.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub claim: String,
    pub level: Option<i64>,
    pub steps: Vec<Step>,
    pub conclusion: String,
    pub pass: bool,
}

impl Certificate {
    fn new(claim: impl Into<String>, level: Option<i64>) -> Self {
        Certificate {
            claim: claim.into(),
            level,
            steps: Vec::new(),
            conclusion: String::new(),
            pass: true,
        }
    }

    fn push(&mut self, step: Step) {
        self.pass &= step.pass;
        self.steps.push(step);
    }

    fn conclude(&mut self, text: impl Into<String>) {
        self.conclusion = text.into();
    }

    /// Deterministic JSON rendering (stable field and key order).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn inputs(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Step whose pass flag is exact string equality.
fn exact_step(
    description: impl Into<String>,
    ins: BTreeMap<String, String>,
    computed: impl Into<String>,
    expected: impl Into<String>,
) -> Step {
    let computed = computed.into();
    let expected = expected.into();
    let pass = computed == expected;
    Step { description: description.into(), inputs: ins, computed, expected, pass }
}

/// Step with an externally decided pass flag (numeric comparisons).
fn judged_step(
    description: impl Into<String>,
    ins: BTreeMap<String, String>,
    computed: impl Into<String>,
    expected: impl Into<String>,
    pass: bool,
) -> Step {
    Step {
        description: description.into(),
        inputs: ins,
        computed: computed.into(),
        expected: expected.into(),
        pass,
    }
}

fn fmt_c(v: Complex64) -> String {
    format!("{:+.12e}{:+.12e}i", v.re, v.im)
}

// ---------------------------------------------------------------------------
// lemma suite

/// Tags of the closed-form cocycle lemmas the suite can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaTag {
    LTra,
    TraTr,
    Pval,
    ParM,
    KSz,
    ITra,
    TraI,
    IEiZw,
    Iota3w,
}

impl LemmaTag {
    pub const ALL: [LemmaTag; 9] = [
        LemmaTag::LTra,
        LemmaTag::TraTr,
        LemmaTag::Pval,
        LemmaTag::ParM,
        LemmaTag::KSz,
        LemmaTag::ITra,
        LemmaTag::TraI,
        LemmaTag::IEiZw,
        LemmaTag::Iota3w,
    ];
}

impl fmt::Display for LemmaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LemmaTag::LTra => "LTra",
            LemmaTag::TraTr => "TraTr",
            LemmaTag::Pval => "Pval",
            LemmaTag::ParM => "ParM",
            LemmaTag::KSz => "KSz",
            LemmaTag::ITra => "ITra",
            LemmaTag::TraI => "TraI",
            LemmaTag::IEiZw => "iEiZ-w",
            LemmaTag::Iota3w => "iota3-w",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for LemmaTag {
    type Err = CertError;

    fn from_str(s: &str) -> Result<Self, CertError> {
        Ok(match s {
            "LTra" => LemmaTag::LTra,
            "TraTr" => LemmaTag::TraTr,
            "Pval" => LemmaTag::Pval,
            "ParM" => LemmaTag::ParM,
            "KSz" => LemmaTag::KSz,
            "ITra" => LemmaTag::ITra,
            "TraI" => LemmaTag::TraI,
            "iEiZ-w" => LemmaTag::IEiZw,
            "iota3-w" => LemmaTag::Iota3w,
            other => return Err(CertError::UnknownTag(other.to_string())),
        })
    }
}

fn big_trace(s: &[BigInt], g: usize) -> BigInt {
    (0..g).map(|i| s[i * g + i].clone()).sum()
}

/// Check one closed-form lemma on `samples` seeded random instances of its
/// hypothesis family; every instance is recorded as a step.
pub fn verify_lemma(tag: LemmaTag, samples: usize, seed: u64) -> Result<Certificate, CertError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cert = Certificate::new(tag.to_string(), None);
    let p = SymplecticMatrix::swap_p();
    let inv2 = SymplecticMatrix::involution(2);

    for k in 0..samples.max(1) {
        let step = match tag {
            LemmaTag::LTra => {
                let s = sample::random_symmetric(&mut rng, 2, 3);
                let t = SymplecticMatrix::translation(2, &s)?;
                let m = sample::random_sp4(&mut rng, 4, 60);
                let w = cocycle::w_cocycle(&t, &m)?.w;
                exact_step(
                    format!("instance {k}: w(translation, M) vanishes"),
                    inputs(&[("translation", t.to_string()), ("m", m.to_string())]),
                    w.to_string(),
                    "0",
                )
            }
            LemmaTag::TraTr => {
                let m = sample::random_sl2(&mut rng, 40);
                let x = rng.gen_range(-5..=5i64);
                let t: SymplecticMatrix = format!("1,{x};0,1").parse().unwrap();
                let wl = cocycle::w_cocycle(&m, &t)?.w;
                let wr = cocycle::w_cocycle(&t, &m)?.w;
                exact_step(
                    format!("instance {k}: w(M, T^x) and w(T^x, M) vanish"),
                    inputs(&[("m", m.to_string()), ("x", x.to_string())]),
                    format!("({wl}, {wr})"),
                    "(0, 0)",
                )
            }
            LemmaTag::Pval => {
                let m = sample::random_sp4(&mut rng, 4, 60);
                let z = m.j_base_exact();
                // closed form on z = det(iC + D); boundary Im z = 0 resolved
                // by the principal value of Arg(-z) - Arg(z) - pi
                let expected = if z.im.is_negative() {
                    0
                } else if z.im.is_positive() {
                    -1
                } else if z.re.is_positive() {
                    0
                } else {
                    -1
                };
                let wl = cocycle::w_cocycle(&p, &m)?.w;
                let wr = cocycle::w_cocycle(&m, &p)?.w;
                exact_step(
                    format!("instance {k}: both w(P, M) and w(M, P) match the sign of Im det(iC+D)"),
                    inputs(&[("m", m.to_string()), ("det(iC+D)", z.to_string())]),
                    format!("({wl}, {wr})"),
                    format!("({expected}, {expected})"),
                )
            }
            LemmaTag::ParM => {
                let m = sample::random_siegel_parabolic(&mut rng, true);
                let any_sign = rng.gen_bool(0.5);
                let n = sample::random_siegel_parabolic(&mut rng, any_sign);
                let w = cocycle::w_cocycle(&m, &n)?.w;
                exact_step(
                    format!("instance {k}: Siegel parabolics with det D(M) > 0"),
                    inputs(&[
                        ("m", m.to_string()),
                        ("n", n.to_string()),
                        ("eps(n)", n.epsilon()?.to_string()),
                    ]),
                    w.to_string(),
                    "0",
                )
            }
            LemmaTag::KSz => {
                let axis = if rng.gen_bool(0.5) { 1 } else { 2 };
                let m = sample::random_klingen(&mut rng, axis);
                let n = sample::random_siegel_parabolic(&mut rng, true);
                let w = cocycle::w_cocycle(&m, &n)?.w;
                exact_step(
                    format!("instance {k}: Klingen parabolic times Siegel parabolic with det D(N) > 0"),
                    inputs(&[("m", m.to_string()), ("n", n.to_string()), ("axis", axis.to_string())]),
                    w.to_string(),
                    "0",
                )
            }
            LemmaTag::ITra => {
                let s = sample::random_symmetric(&mut rng, 2, 3);
                let t = SymplecticMatrix::translation(2, &s)?;
                let tr = big_trace(&s, 2);
                let expected = if tr >= BigInt::zero() { 0 } else { -1 };
                let w = cocycle::w_cocycle(&inv2, &t)?.w;
                exact_step(
                    format!("instance {k}: w(I, translation) decided by tr(S)"),
                    inputs(&[("s_trace", tr.to_string()), ("translation", t.to_string())]),
                    w.to_string(),
                    expected.to_string(),
                )
            }
            LemmaTag::TraI => {
                let s = sample::random_symmetric(&mut rng, 2, 3);
                let t = SymplecticMatrix::lower_translation(2, &s)?;
                let tr = big_trace(&s, 2);
                // boundary tr S = 0: a traceless symmetric S has det <= 0,
                // so z = 1 - det S is positive real and Arg(-z) = +pi gives
                // w = 0, the strict-inequality branch
                let expected = if tr > BigInt::zero() { -1 } else { 0 };
                let w = cocycle::w_cocycle(&t, &inv2)?.w;
                exact_step(
                    format!("instance {k}: w(lower translation, I) decided by tr(S)"),
                    inputs(&[("s_trace", tr.to_string()), ("translation", t.to_string())]),
                    w.to_string(),
                    expected.to_string(),
                )
            }
            LemmaTag::IEiZw => {
                let m = sample::random_sl2(&mut rng, 40);
                let left = cocycle::w_cocycle(&SymplecticMatrix::iota2(&m)?, &p)?.w;
                let right = cocycle::w_cocycle(&p, &SymplecticMatrix::iota1(&m)?)?.w;
                judged_step(
                    format!("instance {k}: w(iota2(m), P) equals w(P, iota1(m))"),
                    inputs(&[("m", m.to_string())]),
                    format!("({left}, {right})"),
                    "equal pair",
                    left == right,
                )
            }
            LemmaTag::Iota3w => {
                let u = sample::random_sl2(&mut rng, 40);
                let v = sample::random_sl2(&mut rng, 40);
                let w = cocycle::w_cocycle(
                    &SymplecticMatrix::iota3(&u)?,
                    &SymplecticMatrix::iota3(&v)?,
                )?
                .w;
                exact_step(
                    format!("instance {k}: w vanishes on the third embedding"),
                    inputs(&[("u", u.to_string()), ("v", v.to_string())]),
                    w.to_string(),
                    "0",
                )
            }
        };
        cert.push(step);
    }
    cert.conclude(format!(
        "{} instances of {} checked against the numeric cocycle: {}",
        samples.max(1),
        tag,
        if cert.pass { "all match" } else { "MISMATCH found" }
    ));
    Ok(cert)
}

// ---------------------------------------------------------------------------
// seven-matrix identity

/// The parameter tuple of the seven-matrix identity; `y` is derived.
#[derive(Debug, Clone)]
pub struct BmsParameters {
    pub a: i64,
    pub b1: i64,
    pub c1: i64,
    pub d1: i64,
    pub b2: i64,
    pub c2: i64,
    pub d2: i64,
    pub y: BigInt,
}

impl BmsParameters {
    pub fn new(
        a: i64,
        b1: i64,
        c1: i64,
        d1: i64,
        b2: i64,
        c2: i64,
        d2: i64,
    ) -> Result<Self, CertError> {
        let det1 = a as i128 * d1 as i128 - b1 as i128 * c1 as i128;
        let det2 = a as i128 * d2 as i128 - b2 as i128 * c2 as i128;
        if det1 != 1 {
            return Err(CertError::BadParameters(format!("a d1 - b1 c1 = {det1}, want 1")));
        }
        if det2 != 1 {
            return Err(CertError::BadParameters(format!("a d2 - b2 c2 = {det2}, want 1")));
        }
        let big = BigInt::from;
        let y = big(d1) - big(b1) * big(c1) * big(d2)
            + big(c1) * big(c2) * big(b1) * big(b2) * big(d1);
        Ok(BmsParameters { a, b1, c1, d1, b2, c2, d2, y })
    }
}

/// The seven matrices of the commutation identity.
#[derive(Debug, Clone)]
pub struct BmsMatrices {
    pub h1: SymplecticMatrix,
    pub h2: SymplecticMatrix,
    pub h3: SymplecticMatrix,
    pub r1: SymplecticMatrix,
    pub r2: SymplecticMatrix,
    pub r3: SymplecticMatrix,
    pub r4: SymplecticMatrix,
}

/// Build the seven matrices and check `R2 H3 = H1 H2 R1 R3 R4` exactly.
pub fn bms_build(p: &BmsParameters) -> Result<(BmsMatrices, bool), CertError> {
    let big = BigInt::from;
    let h1 = SymplecticMatrix::iota3(
        &format!("{},{};{},{}", p.d1, -p.c1, -p.b1, p.a).parse::<SymplecticMatrix>()?,
    )?;
    let h2 = SymplecticMatrix::iota1(
        &format!("{},{};{},{}", p.a, p.b2, p.c2, p.d2).parse::<SymplecticMatrix>()?,
    )?;
    let b1b1b2 = big(p.b1) * big(p.b1) * big(p.b2);
    let c1c1c2 = big(p.c1) * big(p.c1) * big(p.c2);
    let h3 = SymplecticMatrix::iota2(
        &format!("{},{};{},{}", p.a, b1b1b2, c1c1c2, p.y).parse::<SymplecticMatrix>()?,
    )?;
    let r1 = SymplecticMatrix::iota3(&format!("1,0;{},1", p.b1).parse::<SymplecticMatrix>()?)?;
    let ac2 = big(p.a) * big(p.c2);
    let c1c2 = big(p.c1) * big(p.c2);
    let r2 = SymplecticMatrix::lower_translation(
        2,
        &[ac2, c1c2.clone(), c1c2, BigInt::zero()],
    )?;
    let r3 = SymplecticMatrix::iota3(&format!("1,{};0,1", p.c1).parse::<SymplecticMatrix>()?)?;
    let mad1d1b2 = -(big(p.a) * big(p.d1) * big(p.d1) * big(p.b2));
    let b1b2d1 = big(p.b1) * big(p.b2) * big(p.d1);
    let r4 = SymplecticMatrix::translation(
        2,
        &[mad1d1b2, b1b2d1.clone(), b1b2d1, BigInt::zero()],
    )?;

    let left = r2.mul(&h3)?;
    let right = h1.mul(&h2)?.mul(&r1)?.mul(&r3)?.mul(&r4)?;
    let holds = left == right;
    Ok((BmsMatrices { h1, h2, h3, r1, r2, r3, r4 }, holds))
}

/// Certificate for the identity plus the cocycle side facts used with it.
/// Requires `c1 c2 != 0`; the degenerate case makes the matrices collapse.
pub fn bms_w_check(p: &BmsParameters) -> Result<Certificate, CertError> {
    if p.c1 == 0 || p.c2 == 0 {
        return Err(CertError::Precondition(format!(
            "c1 c2 must be nonzero, got c1 = {}, c2 = {}",
            p.c1, p.c2
        )));
    }
    let big = BigInt::from;
    let mut cert = Certificate::new("bms", None);
    let (m, holds) = bms_build(p)?;
    let param_inputs = inputs(&[
        ("a", p.a.to_string()),
        ("b1", p.b1.to_string()),
        ("c1", p.c1.to_string()),
        ("d1", p.d1.to_string()),
        ("b2", p.b2.to_string()),
        ("c2", p.c2.to_string()),
        ("d2", p.d2.to_string()),
        ("y", p.y.to_string()),
    ]);
    cert.push(judged_step(
        "exact product identity R2 H3 = H1 H2 R1 R3 R4",
        param_inputs.clone(),
        if holds { "equal" } else { "differ" },
        "equal",
        holds,
    ));

    // exact imaginary parts of J at the base point
    let lhs = m.r2.mul(&m.h3)?;
    let z_prod = lhs.j_base_exact();
    let want_prod = big(p.c2) * (BigInt::from(1) + big(p.c1) * big(p.c1));
    cert.push(exact_step(
        "Im J(R2 H3, iE) = c2 (1 + c1^2)",
        inputs(&[("r2h3", lhs.to_string())]),
        z_prod.im.to_string(),
        want_prod.to_string(),
    ));
    let z_h3 = m.h3.j_base_exact();
    let want_h3 = big(p.c1) * big(p.c1) * big(p.c2);
    cert.push(exact_step(
        "Im J(H3, iE) = c1^2 c2",
        inputs(&[("h3", m.h3.to_string())]),
        z_h3.im.to_string(),
        want_h3.to_string(),
    ));

    // numeric J agrees with the exact evaluation
    let base = SiegelPoint::base(2);
    let jn = lhs.j_factor(&base)?;
    let exact_c = z_prod.to_complex();
    let dev = (jn - exact_c).norm();
    cert.push(judged_step(
        "numeric J(R2 H3, iE) matches the exact value",
        inputs(&[("r2h3", lhs.to_string())]),
        fmt_c(jn),
        fmt_c(exact_c),
        dev < 1e-9 * (1.0 + exact_c.norm()),
    ));

    // cocycle side facts
    let w = cocycle::w_cocycle(&m.r2, &m.h3)?;
    cert.push(exact_step(
        "w(R2, H3) = 0",
        inputs(&[("r2", m.r2.to_string()), ("h3", m.h3.to_string())]),
        w.w.to_string(),
        "0",
    ));

    let tail = m.r1.mul(&m.r3)?.mul(&m.r4)?;
    let class = tail.classify_parabolic()?;
    let eps = tail.epsilon()?;
    cert.push(judged_step(
        "R1 R3 R4 is Siegel parabolic with det D = 1",
        inputs(&[("r1r3r4", tail.to_string())]),
        format!("{class:?}, det D = {eps}"),
        "Siegel, det D = 1",
        class == ParabolicClass::Siegel && eps == BigInt::from(1),
    ));
    let w = cocycle::w_cocycle(&m.h2, &tail)?;
    cert.push(exact_step(
        "w(H2, R1 R3 R4) = 0",
        inputs(&[("h2", m.h2.to_string()), ("r1r3r4", tail.to_string())]),
        w.w.to_string(),
        "0",
    ));
    let rest = m.h2.mul(&tail)?;
    let w = cocycle::w_cocycle(&m.h1, &rest)?;
    cert.push(exact_step(
        "w(H1, H2 R1 R3 R4) = 0 (J(H1, .) is the constant 1)",
        inputs(&[("h1", m.h1.to_string()), ("rest", rest.to_string())]),
        w.w.to_string(),
        "0",
    ));
    cert.conclude(
        "identity and cocycle side conditions verified; v(H3) = v(H1) v(H2) follows",
    );
    Ok(cert)
}

// ---------------------------------------------------------------------------
// exact 2x2 identities

fn second_row(m: &SymplecticMatrix) -> String {
    format!("({}, {})", m.entry(1, 0), m.entry(1, 1))
}

fn top_row(m: &SymplecticMatrix) -> String {
    format!("({}, {})", m.entry(0, 0), m.entry(0, 1))
}

/// Exact identities behind the symbol calculus, on pinned and random
/// integer parameters. All checks are integer-exact.
pub fn small_identities() -> Result<Certificate, CertError> {
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut cert = Certificate::new("small-identities", None);
    let q = 4i64;

    // unipotent conjugation producing second row (1-a, a); the middle
    // factor must be (1,0;1-a,1) for the product to come out this way
    for a in [5i64, 1, -3, 13, 29, 4 * rng.gen_range(2..=20) + 1] {
        let u: SymplecticMatrix = "1,1;0,1".parse().unwrap();
        let mid: SymplecticMatrix = format!("1,0;{},1", 1 - a).parse().unwrap();
        let uinv: SymplecticMatrix = "1,-1;0,1".parse().unwrap();
        let prod = u.mul(&mid)?.mul(&uinv)?;
        let want: SymplecticMatrix =
            format!("{},{};{},{}", 2 - a, a - 1, 1 - a, a).parse().unwrap();
        cert.push(exact_step(
            format!("unipotent conjugation of (1,0;1-a,1) at a = {a}"),
            inputs(&[("a", a.to_string())]),
            prod.to_string(),
            want.to_string(),
        ));
    }

    // second-row behavior under upper conjugation and lower multiplication
    for k in 0..6 {
        let m = sample::random_sl2(&mut rng, 30);
        let c = m.entry(1, 0).clone();
        let d = m.entry(1, 1).clone();
        let y = rng.gen_range(-3..=3i64);
        let upper: SymplecticMatrix = format!("1,{y};0,1").parse().unwrap();
        let upper_inv: SymplecticMatrix = format!("1,{};0,1", -y).parse().unwrap();
        let conj = upper_inv.mul(&m)?.mul(&upper)?;
        cert.push(exact_step(
            format!("conjugation instance {k}: second row becomes (c, d + c y)"),
            inputs(&[("m", m.to_string()), ("y", y.to_string())]),
            second_row(&conj),
            format!("({}, {})", c, &d + &c * BigInt::from(y)),
        ));

        let x = rng.gen_range(-3..=3i64);
        let lower: SymplecticMatrix = format!("1,0;{},1", q * x).parse().unwrap();
        let prod = m.mul(&lower)?;
        cert.push(exact_step(
            format!("multiplication instance {k}: second row becomes (c + d q x, d)"),
            inputs(&[("m", m.to_string()), ("qx", (q * x).to_string())]),
            second_row(&prod),
            format!("({}, {})", &c + &d * BigInt::from(q * x), d),
        ));
    }

    // top-row behavior: the two row operations of the bracket symbol
    for k in 0..6 {
        let m = sample::random_sl2(&mut rng, 30);
        let a = m.entry(0, 0).clone();
        let b = m.entry(0, 1).clone();
        let y = rng.gen_range(-3..=3i64);
        let shift: SymplecticMatrix = format!("1,{};0,1", q * y).parse().unwrap();
        let prod = m.mul(&shift)?;
        cert.push(exact_step(
            format!("bracket shift instance {k}: top row becomes (a, b + q a y)"),
            inputs(&[("m", m.to_string()), ("qy", (q * y).to_string())]),
            top_row(&prod),
            format!("({}, {})", a, &b + &a * BigInt::from(q * y)),
        ));

        let x = rng.gen_range(-3..=3i64);
        let lo: SymplecticMatrix = format!("1,0;{x},1").parse().unwrap();
        let lo_inv: SymplecticMatrix = format!("1,0;{},1", -x).parse().unwrap();
        let conj = lo_inv.mul(&m)?.mul(&lo)?;
        cert.push(exact_step(
            format!("bracket conjugation instance {k}: top row becomes (a + x b, b)"),
            inputs(&[("m", m.to_string()), ("x", x.to_string())]),
            top_row(&conj),
            format!("({}, {})", &a + BigInt::from(x) * &b, b),
        ));
    }

    // the squaring step: row (c^2, a) times (1,0;-c^2,1) has second row
    // (c^2 (1 - a), a), and the cocycle value of that product vanishes
    for (c, a) in [(4i64, 5i64), (4, 13), (8, 5), (12, 17)] {
        let m = complete_bottom_row(c * c, a)?;
        let s: SymplecticMatrix = format!("1,0;{},1", -c * c).parse().unwrap();
        let prod = m.mul(&s)?;
        cert.push(exact_step(
            format!("squaring step at (c, a) = ({c}, {a}): second row"),
            inputs(&[("m", m.to_string()), ("s", s.to_string())]),
            second_row(&prod),
            format!("({}, {})", c * c * (1 - a), a),
        ));
        let zero = genus1::corollary_zero(&m, &s)?;
        let table = genus1::defect_exact(&m, &s)?;
        let oracle = cocycle::w_cocycle(&m, &s)?.w;
        cert.push(judged_step(
            format!("squaring step at (c, a) = ({c}, {a}): cocycle vanishes both orientations"),
            inputs(&[("m", m.to_string()), ("s", s.to_string())]),
            format!("corollary {zero}, table {table}, oracle {oracle}"),
            "corollary true, table 0, oracle 0",
            zero && table == 0 && oracle == 0,
        ));
    }

    // recorded table value s = w(M, (1,0;qx,1)) for a sample instance
    {
        let m = complete_bottom_row(24, 5)?;
        let x = -1i64;
        let s: SymplecticMatrix = format!("1,0;{},1", q * x).parse().unwrap();
        let table = genus1::defect_exact(&m, &s)?;
        let oracle = cocycle::w_cocycle(&m, &s)?.w;
        cert.push(judged_step(
            "shear defect s at (c, d) = (24, 5), q = 4, x = -1",
            inputs(&[("m", m.to_string()), ("s", s.to_string())]),
            format!("table {table}, oracle {oracle}"),
            "table 0, oracle 0",
            table == 0 && oracle == 0,
        ));
    }

    cert.conclude("all exact 2x2 identities hold");
    Ok(cert)
}

/// Smallest completion of a bottom row (c, d) to an integral matrix of
/// determinant 1, with no congruence normalization.
fn complete_bottom_row(c: i64, d: i64) -> Result<SymplecticMatrix, CertError> {
    let (g, x, y) = symbols::egcd(d, c);
    if g != 1 {
        return Err(CertError::Precondition(format!("({c}, {d}) is not coprime")));
    }
    Ok(format!("{},{};{c},{d}", x, -y).parse::<SymplecticMatrix>()?)
}

// ---------------------------------------------------------------------------
// square-root chain

fn check_level(q: i64) -> Result<(), CertError> {
    if q < 4 || q % 4 != 0 {
        return Err(CertError::BadLevel(q));
    }
    Ok(())
}

/// Search certificate: every matrix in the level-`q` congruence group whose
/// bottom row has Kronecker symbol +1 has trivial multiplier. The search
/// walks the smallest prime `d = 1 mod q` and multiples `c` of `q`, records
/// each rejected candidate, verifies the square-root chain
/// `c = q x^2 + d q y` on the accepted one, and checks the vanishing of the
/// cocycle value along the way.
pub fn krons_certificate(q: i64, search_bound: i64) -> Result<Certificate, CertError> {
    check_level(q)?;
    let mut cert = Certificate::new("krons", Some(q));

    let d = symbols::find_prime_in_ap(1, q, search_bound)
        .map_err(|_| CertError::SearchExhausted { q, bound: search_bound })?;
    cert.push(judged_step(
        "smallest prime d = 1 mod q",
        inputs(&[("q", q.to_string()), ("bound", search_bound.to_string())]),
        d.to_string(),
        format!("prime, = 1 mod {q}"),
        symbols::is_prime(d) && d.rem_euclid(q) == 1,
    ));

    // (q/d) = 1 holds for every d = 1 mod q; record the evaluation
    let qd = symbols::kronecker(q, d)?;
    cert.push(exact_step(
        "(q/d) = 1",
        inputs(&[("q", q.to_string()), ("d", d.to_string())]),
        qd.to_string(),
        "1",
    ));

    let mut accepted = None;
    let mut c = q;
    let mut degenerate_shown = false;
    while c <= search_bound {
        if symbols::gcd(c, d) != 1 {
            cert.push(judged_step(
                format!("candidate c = {c}: skipped, shares a factor with d"),
                inputs(&[("c", c.to_string()), ("d", d.to_string())]),
                symbols::gcd(c, d).to_string(),
                "1 required",
                true,
            ));
            c += q;
            continue;
        }
        let sym = symbols::kronecker(c, d)?;
        if sym != 1 {
            cert.push(judged_step(
                format!("candidate c = {c}: skipped, symbol (c/d) = {sym}"),
                inputs(&[("c", c.to_string()), ("d", d.to_string())]),
                sym.to_string(),
                "+1 required",
                true,
            ));
            c += q;
            continue;
        }
        let k = c / q;
        let x = symbols::sqrt_mod(k.rem_euclid(d), d)?;
        let y_num = c - q * x * x;
        debug_assert_eq!(y_num.rem_euclid(d * q), 0);
        let y = y_num / (d * q);
        if y == 0 {
            // valid but degenerate: the shear factor collapses to E
            if !degenerate_shown {
                cert.push(judged_step(
                    format!("candidate c = {c}: degenerate chain c = q x^2 accepted, skipped for the main instance"),
                    inputs(&[
                        ("c", c.to_string()),
                        ("d", d.to_string()),
                        ("x", x.to_string()),
                    ]),
                    format!("c - q x^2 = {}", c - q * x * x),
                    "0 (shear factor is the identity, w trivially 0)",
                    c == q * x * x,
                ));
                degenerate_shown = true;
            }
            c += q;
            continue;
        }
        accepted = Some((c, x, y));
        break;
    }
    let Some((c, x, y)) = accepted else {
        return Err(CertError::SearchExhausted { q, bound: search_bound });
    };

    cert.push(exact_step(
        "square root: x^2 = c/q mod d",
        inputs(&[("c/q", (c / q).to_string()), ("d", d.to_string()), ("x", x.to_string())]),
        (x * x).rem_euclid(d).to_string(),
        (c / q).rem_euclid(d).to_string(),
    ));
    cert.push(exact_step(
        "decomposition c = q x^2 + d q y",
        inputs(&[
            ("c", c.to_string()),
            ("d", d.to_string()),
            ("x", x.to_string()),
            ("y", y.to_string()),
        ]),
        (q * x * x + d * q * y).to_string(),
        c.to_string(),
    ));

    // the product carrying the chain: row (q x^2, d) times the shear
    let m1 = sample::complete_congruence_row(q * x * x, d, q)?;
    let shear: SymplecticMatrix = format!("1,0;{},1", q * y).parse().unwrap();
    let prod = m1.mul(&shear)?;
    cert.push(exact_step(
        "product row: (q x^2, d) shear gives (c, d)",
        inputs(&[("m1", m1.to_string()), ("shear", shear.to_string())]),
        second_row(&prod),
        format!("({c}, {d})"),
    ));

    let zero = genus1::corollary_zero(&m1, &shear)?;
    let table = genus1::defect_exact(&m1, &shear)?;
    let oracle = cocycle::w_cocycle(&m1, &shear)?.w;
    cert.push(judged_step(
        "sign pattern (m1, c, m1') is (+, *, +) or (+, -, *): cocycle value vanishes",
        inputs(&[("m1", m1.to_string()), ("shear", shear.to_string())]),
        format!("corollary {zero}, table {table}, oracle {oracle}"),
        "corollary true, table 0, oracle 0",
        zero && table == 0 && oracle == 0,
    ));

    // the remaining symbol chain; each rewrite's side condition is exact
    cert.push(exact_step(
        "{x^2 q / d} = {q (q x)^2 / d}: multiplying the top by q^2",
        inputs(&[("x", x.to_string()), ("q", q.to_string())]),
        (q * (q * x) * (q * x)).to_string(),
        (x * x * q * q * q).to_string(),
    ));
    let y0 = (1 - d) / q;
    cert.push(exact_step(
        "{q/d} = {q/1}: bottom shift 1 = d + y0 q",
        inputs(&[("d", d.to_string()), ("q", q.to_string()), ("y0", y0.to_string())]),
        (d + y0 * q).to_string(),
        "1",
    ));
    let unipotent = sample::complete_congruence_row(q, 1, q)?;
    cert.push(judged_step(
        "{q/1} = 1: the completion is a lower unipotent with trivial multiplier",
        inputs(&[("q", q.to_string())]),
        unipotent.to_string(),
        format!("1,0;{q},1"),
        unipotent.to_string() == format!("1,0;{q},1"),
    ));

    cert.conclude(format!(
        "v(M) = 1 for M in the level-{q} group with bottom row ({c}, {d}); chain closes at the trivial symbol"
    ));
    Ok(cert)
}

// ---------------------------------------------------------------------------
// negative-symbol value

/// The shear companion used by the negative-symbol argument at level `q`.
pub fn zpir_companion(q: i64) -> SymplecticMatrix {
    format!("{},{};{},{}", 1 - q, -q, q, 1 + q).parse().expect("companion is unimodular")
}

/// Verify the value `v(M) = e^(-2 pi i r)` chain for a single matrix:
/// requires `M` in the level-`q` group, all entries positive,
/// `d q < c (q - 1)` and Kronecker symbol `(c/d) = -1`.
pub fn zpir_check(m: &SymplecticMatrix, q: i64) -> Result<Certificate, CertError> {
    check_level(q)?;
    if m.genus() != 1 {
        return Err(CertError::Precondition(format!("genus-1 matrix required, got {}", m.genus())));
    }
    if !m.in_principal_congruence(q as u32) {
        return Err(CertError::Precondition(format!("{m} is not in the level-{q} group")));
    }
    let a = m.entry_i64(0, 0)?;
    let b = m.entry_i64(0, 1)?;
    let c = m.entry_i64(1, 0)?;
    let d = m.entry_i64(1, 1)?;
    if a <= 0 || b <= 0 || c <= 0 || d <= 0 {
        return Err(CertError::Precondition(format!("all entries of {m} must be positive")));
    }
    if d * q >= c * (q - 1) {
        return Err(CertError::Precondition(format!(
            "need d q < c (q - 1): {} >= {}",
            d * q,
            c * (q - 1)
        )));
    }
    let sym = symbols::kronecker(c, d)?;
    if sym != -1 {
        return Err(CertError::Precondition(format!("need (c/d) = -1, got {sym}")));
    }

    let mut cert = Certificate::new("zpir", Some(q));
    let s = zpir_companion(q);
    let prod = m.mul(&s)?;
    let n = c - q * c + d * q;
    let den = -c * q + d + d * q;
    cert.push(exact_step(
        "product row after the companion shear",
        inputs(&[("m", m.to_string()), ("s", s.to_string())]),
        second_row(&prod),
        format!("({n}, {den})"),
    ));

    cert.push(exact_step(
        "(q / (1+q)) = 1",
        inputs(&[("q", q.to_string())]),
        symbols::kronecker(q, 1 + q)?.to_string(),
        "1",
    ));

    // symbol chain for (n / den); each rewrite with its side condition
    let lhs = symbols::kronecker(n, den)?;
    cert.push(judged_step(
        "bottom shift mod n (n = 0 mod 4): (n/den) = (n/(d-c))",
        inputs(&[("n", n.to_string()), ("den", den.to_string()), ("d-c", (d - c).to_string())]),
        format!("{} vs {}", lhs, symbols::kronecker(n, d - c)?),
        "equal, den - (d-c) = n and n = 0 mod 4",
        lhs == symbols::kronecker(n, d - c)?
            && den - (d - c) == n
            && n.rem_euclid(4) == 0,
    ));
    let split = symbols::kronecker(n, -1)? * symbols::kronecker(n, c - d)?;
    cert.push(judged_step(
        "bottom multiplicativity: (n/(d-c)) = (n/-1)(n/(c-d))",
        inputs(&[("n", n.to_string()), ("c-d", (c - d).to_string())]),
        format!("{} vs {}", symbols::kronecker(n, d - c)?, split),
        "equal",
        symbols::kronecker(n, d - c)? == split,
    ));
    cert.push(judged_step(
        "sign factor: n < 0 so (n/-1) = -1, and c - d > 0",
        inputs(&[("n", n.to_string()), ("c-d", (c - d).to_string())]),
        format!("(n/-1) = {}, n = {}, c-d = {}", symbols::kronecker(n, -1)?, n, c - d),
        "-1, negative, positive",
        symbols::kronecker(n, -1)? == -1 && n < 0 && c - d > 0,
    ));
    cert.push(judged_step(
        "top shift mod (c-d): (n/(c-d)) = (c/(c-d)), n - c = -q (c-d)",
        inputs(&[("n", n.to_string()), ("c", c.to_string()), ("c-d", (c - d).to_string())]),
        format!("{} vs {}", symbols::kronecker(n, c - d)?, symbols::kronecker(c, c - d)?),
        "equal",
        symbols::kronecker(n, c - d)? == symbols::kronecker(c, c - d)?
            && n - c == -q * (c - d),
    ));
    cert.push(judged_step(
        "bottom shift mod c (c = 0 mod 4): (c/(c-d)) = (c/-d)",
        inputs(&[("c", c.to_string()), ("d", d.to_string())]),
        format!("{} vs {}", symbols::kronecker(c, c - d)?, symbols::kronecker(c, -d)?),
        "equal, c = 0 mod 4",
        symbols::kronecker(c, c - d)? == symbols::kronecker(c, -d)?
            && c.rem_euclid(4) == 0,
    ));
    cert.push(judged_step(
        "positive top: (c/-d) = (c/d), hence (n/den) = -(c/d) = 1",
        inputs(&[("c", c.to_string()), ("d", d.to_string())]),
        format!("(c/-d) = {}, (c/d) = {}, (n/den) = {}", symbols::kronecker(c, -d)?, sym, lhs),
        "(c/d) = -1 and (n/den) = +1",
        symbols::kronecker(c, -d)? == sym && lhs == 1,
    ));

    // the cocycle value feeding the multiplier relation
    let table = genus1::defect_exact(m, &s)?;
    let oracle = cocycle::w_cocycle(m, &s)?.w;
    let data = genus1::SecondRowData::from_pair(m, &s)?;
    let sg = |x: &BigInt| -> i8 {
        if x.is_zero() {
            0
        } else if x.is_positive() {
            1
        } else {
            -1
        }
    };
    let (s1, s2, s3) = (sg(&data.m1), sg(&data.c), sg(&data.m1p));
    cert.push(judged_step(
        "sign pattern (m1, c, m1') = (+, +, -): composition-orientation w = 1",
        inputs(&[("m", m.to_string()), ("s", s.to_string())]),
        format!("signs ({s1}, {s2}, {s3}), table {table}, continuation oracle {oracle}"),
        "signs (1, 1, -1), table 1, continuation oracle -1",
        s1 == 1 && s2 == 1 && s3 == -1 && table == 1 && oracle == -1,
    ));

    cert.conclude("v(M S) = 1 and the composition w-value is 1, so v(M) = e^(-2 pi i r)");
    Ok(cert)
}

// ---------------------------------------------------------------------------
// weight constraint endgame

/// End-to-end certificate that multiplier weights at level `q` satisfy
/// `2r` integral: finds a negative-symbol matrix, applies the
/// negative-symbol chain, squares it, and closes with the Kronecker
/// computation for the square.
pub fn deligne_certificate(q: i64, search_bound: i64) -> Result<Certificate, CertError> {
    check_level(q)?;
    let mut cert = Certificate::new("deligne", Some(q));

    // search: smallest c = 0 mod q admitting d = 1 mod q with symbol -1,
    // the inequality d q < c (q-1), and an all-positive completion
    let mut found = None;
    'outer: for c in (q..=search_bound).step_by(q as usize) {
        let mut d = 1;
        while d * q < c * (q - 1) {
            if d > 1 && symbols::gcd(c, d) == 1 && symbols::kronecker(c, d)? == -1 {
                let m = sample::complete_congruence_row(c, d, q)?;
                let all_positive = (0..2)
                    .all(|r| (0..2).all(|s| m.entry(r, s) > &BigInt::zero()));
                if all_positive {
                    found = Some((c, d, m));
                    break 'outer;
                }
            }
            d += q;
        }
    }
    let Some((c, d, m)) = found else {
        return Err(CertError::SearchExhausted { q, bound: search_bound });
    };
    cert.push(judged_step(
        "search: bottom row with negative symbol and all-positive completion",
        inputs(&[("q", q.to_string()), ("bound", search_bound.to_string())]),
        format!("c = {c}, d = {d}, M = {m}"),
        format!("(c/d) = -1, d q < c (q-1), M = E mod {q}, entries positive"),
        symbols::kronecker(c, d)? == -1
            && d * q < c * (q - 1)
            && m.in_principal_congruence(q as u32),
    ));

    // the negative-symbol chain on M
    let sub = zpir_check(&m, q)?;
    for step in sub.steps {
        cert.push(Step { description: format!("zpir: {}", step.description), ..step });
    }

    // w(M, M) vanishes because every entry is positive
    let zero = genus1::corollary_zero(&m, &m)?;
    let table = genus1::defect_exact(&m, &m)?;
    let oracle = cocycle::w_cocycle(&m, &m)?.w;
    cert.push(judged_step(
        "w(M, M) = 0 in both orientations (all entries positive)",
        inputs(&[("m", m.to_string())]),
        format!("corollary {zero}, table {table}, oracle {oracle}"),
        "corollary true, table 0, oracle 0",
        zero && table == 0 && oracle == 0,
    ));

    // the square and its symbol
    let n = m.mul(&m)?;
    let a = m.entry_i64(0, 0)?;
    let b = m.entry_i64(0, 1)?;
    let gamma = n.entry_i64(1, 0)?;
    let delta = n.entry_i64(1, 1)?;
    cert.push(exact_step(
        "square: bottom row of M^2 is (c (a+d), c b + d^2)",
        inputs(&[("m", m.to_string()), ("m^2", n.to_string())]),
        format!("({gamma}, {delta})"),
        format!("({}, {})", c * (a + d), c * b + d * d),
    ));
    cert.push(exact_step(
        "identity c b + d^2 = d (a+d) - 1 (from det M = 1)",
        inputs(&[("a", a.to_string()), ("b", b.to_string()), ("c", c.to_string()), ("d", d.to_string())]),
        (c * b + d * d).to_string(),
        (d * (a + d) - 1).to_string(),
    ));

    let g_sym = symbols::kronecker(gamma, delta)?;
    let split = symbols::kronecker(c, delta)? * symbols::kronecker(a + d, delta)?;
    cert.push(judged_step(
        "top multiplicativity: (gamma/delta) = (c/delta)((a+d)/delta)",
        inputs(&[("gamma", gamma.to_string()), ("delta", delta.to_string())]),
        format!("{g_sym} vs {split}"),
        "equal",
        g_sym == split,
    ));
    cert.push(judged_step(
        "bottom shift mod c (c = 0 mod 4): (c/delta) = (c/d^2) = 1",
        inputs(&[("c", c.to_string()), ("delta", delta.to_string()), ("d^2", (d * d).to_string())]),
        format!(
            "(c/delta) = {}, (c/d^2) = {}",
            symbols::kronecker(c, delta)?,
            symbols::kronecker(c, d * d)?
        ),
        "both 1, delta - d^2 = c b",
        symbols::kronecker(c, delta)? == 1
            && symbols::kronecker(c, d * d)? == 1
            && delta - d * d == c * b,
    ));
    cert.push(exact_step(
        "parity gate: a + d = 2 mod 4",
        inputs(&[("a", a.to_string()), ("d", d.to_string())]),
        (a + d).rem_euclid(4).to_string(),
        "2",
    ));
    cert.push(judged_step(
        "bottom shift mod 4(a+d): ((a+d)/delta) = ((a+d)/(a+d-1)), gap (d-1)(a+d)",
        inputs(&[("a+d", (a + d).to_string()), ("delta", delta.to_string())]),
        format!(
            "{} vs {}",
            symbols::kronecker(a + d, delta)?,
            symbols::kronecker(a + d, a + d - 1)?
        ),
        "equal, (d-1)(a+d) = 0 mod 4(a+d)",
        symbols::kronecker(a + d, delta)? == symbols::kronecker(a + d, a + d - 1)?
            && (d - 1).rem_euclid(4) == 0,
    ));
    cert.push(judged_step(
        "top shift: ((a+d)/(a+d-1)) = (1/(a+d-1)) = 1",
        inputs(&[("a+d", (a + d).to_string())]),
        format!(
            "{} and (1/(a+d-1)) = {}",
            symbols::kronecker(a + d, a + d - 1)?,
            symbols::kronecker(1, a + d - 1)?
        ),
        "both 1",
        symbols::kronecker(a + d, a + d - 1)? == 1 && symbols::kronecker(1, a + d - 1)? == 1,
    ));
    cert.push(exact_step(
        "master check: (gamma/delta) = +1, so v(M^2) = 1",
        inputs(&[("gamma", gamma.to_string()), ("delta", delta.to_string())]),
        g_sym.to_string(),
        "1",
    ));

    cert.conclude(
        "v(M) = e^(-2 pi i r) and v(M^2) = v(M)^2 = 1, hence e^(-4 pi i r) = 1 and 2r is integral",
    );
    Ok(cert)
}

// ---------------------------------------------------------------------------
// empirical symbol axioms

/// Which embedding an evaluator is asked to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedAxis {
    One,
    Two,
    Three,
}

fn embed(axis: EmbedAxis, m: &SymplecticMatrix) -> Result<SymplecticMatrix, MatrixError> {
    match axis {
        EmbedAxis::One => SymplecticMatrix::iota1(m),
        EmbedAxis::Two => SymplecticMatrix::iota2(m),
        EmbedAxis::Three => SymplecticMatrix::iota3(m),
    }
}

/// Genus-2 sample points whose entries all have denominator 4.
fn dyadic_samples() -> Result<Vec<SiegelPoint>, FormsError> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let zero = c(0.0, 0.0);
    let rows = [
        [c(0.0, 1.0), zero, zero, c(0.0, 1.0)],
        [c(0.0, 2.0), zero, zero, c(0.0, 2.0)],
        [c(0.5, 1.0), c(0.25, 0.0), c(0.25, 0.0), c(0.5, 1.0)],
        [c(-0.5, 1.5), c(0.25, 0.0), c(0.25, 0.0), c(-0.75, 1.25)],
    ];
    rows.into_iter()
        .map(|e| SiegelPoint::new(2, e.to_vec()).map_err(FormsError::from))
        .collect()
}

/// The weight-1/2 theta multiplier on an embedded genus-1 matrix, with
/// sample points adapted to the matrix's pole so both the point and its
/// image keep a workable imaginary part.
pub fn theta_embedded_evaluator(
    axis: EmbedAxis,
    m: &SymplecticMatrix,
) -> Result<Complex64, FormsError> {
    let big = embed(axis, m)?;
    let samples: Vec<SiegelPoint> = match axis {
        // dyadic entries only: the third embedding conjugates the point by
        // the full matrix, and with denominator-4 entries that conjugation
        // is exact in doubles, so the series loses no phase accuracy even
        // for completions with very large entries
        EmbedAxis::Three => dyadic_samples()?,
        _ => {
            let line = forms::adapted_samples(m)?;
            let spare = [1.0f64, 1.3, 0.8];
            line.iter()
                .zip(spare.iter())
                .map(|(z, &s)| {
                    let zero = Complex64::new(0.0, 0.0);
                    let w = z.entry(0, 0);
                    let other = Complex64::new(0.0, s);
                    let entries = match axis {
                        EmbedAxis::One => vec![w, zero, zero, other],
                        _ => vec![other, zero, zero, w],
                    };
                    SiegelPoint::new(2, entries).map_err(FormsError::from)
                })
                .collect::<Result<_, _>>()?
        }
    };
    forms::theta_multiplier(&big, &samples).map(|ev| ev.value)
}

struct SymbolCalc<'a, F> {
    evaluator: &'a F,
    q: i64,
}

impl<'a, F> SymbolCalc<'a, F>
where
    F: Fn(EmbedAxis, &SymplecticMatrix) -> Result<Complex64, FormsError>,
{
    /// Bracket: evaluator on the third embedding of any completion of the
    /// top row (a, b).
    fn bracket(&self, a: i64, b: i64) -> Result<Complex64, CertError> {
        let (g, x, y) = symbols::egcd(a, b);
        if g != 1 {
            return Err(CertError::Precondition(format!("({a}, {b}) is not coprime")));
        }
        // a x + b y = 1 means the completion (a, b; -y, x) has det 1
        let m: SymplecticMatrix = format!("{a},{b};{},{}", -y, x).parse()?;
        Ok((self.evaluator)(EmbedAxis::Three, &m)?)
    }

    /// Brace: inverse of the evaluator on the first embedding of the
    /// canonical congruence completion of the bottom row (c, d).
    fn brace(&self, c: i64, d: i64) -> Result<Complex64, CertError> {
        let m = sample::complete_congruence_row(c, d, self.q)?;
        let v = (self.evaluator)(EmbedAxis::One, &m)?;
        Ok(v.conj() / v.norm_sqr().max(f64::MIN_POSITIVE))
    }
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() < tol
}

/// Empirical check of the symbol axioms for a multiplier evaluator at
/// level `q`, escalating by doubling the level when an axiom fails, up to
/// four doublings. The certificate's `level` reports the minimal passing
/// level; every failing instance is recorded with its inputs.
pub fn mennicke_axiom_check<F>(
    evaluator: F,
    q: i64,
    samples: usize,
    seed: u64,
) -> Result<Certificate, CertError>
where
    F: Fn(EmbedAxis, &SymplecticMatrix) -> Result<Complex64, FormsError>,
{
    check_level(q)?;
    let tol = forms::RELATION_TOL;
    let mut cert = Certificate::new("mennicke", None);
    let mut passing_level = None;

    let mut level = q;
    for escalation in 0..=4u32 {
        let calc = SymbolCalc { evaluator: &evaluator, q: level };
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(escalation as u64));
        let mut level_ok = true;

        // trivial bracket
        let v = calc.bracket(1, 0)?;
        let ok = close(v, Complex64::new(1.0, 0.0), tol);
        level_ok &= ok;
        cert.push(judged_step(
            format!("level {level}: trivial bracket [0/1]"),
            inputs(&[("a", "1".into()), ("b", "0".into())]),
            fmt_c(v),
            "1",
            ok,
        ));

        let span = 6i64;
        let bracket_pair = |rng: &mut ChaCha8Rng| loop {
            let a = 1 + level * rng.gen_range(1..=span);
            let b = level * rng.gen_range(1..=span) * if rng.gen_bool(0.5) { 1 } else { -1 };
            if symbols::gcd(a, b) == 1 {
                return (a, b);
            }
        };

        for k in 0..samples.max(1) {
            // MS1 shift: [b/a] = [(b + q a y)/a]
            let (a, b) = bracket_pair(&mut rng);
            let y = rng.gen_range(1..=2i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
            let lhs = calc.bracket(a, b)?;
            let rhs = calc.bracket(a, b + level * a * y)?;
            let ok = close(lhs, rhs, tol);
            level_ok &= ok;
            cert.push(judged_step(
                format!("level {level}: MS1 shift instance {k}"),
                inputs(&[("a", a.to_string()), ("b", b.to_string()), ("y", y.to_string())]),
                format!("{} vs {}", fmt_c(lhs), fmt_c(rhs)),
                "equal within 1e-9",
                ok,
            ));

            // MS1 conjugation: [b/a] = [b/(a + x b)]
            let (a, b) = bracket_pair(&mut rng);
            let x = rng.gen_range(1..=2i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
            let lhs = calc.bracket(a, b)?;
            let rhs = calc.bracket(a + x * b, b)?;
            let ok = close(lhs, rhs, tol);
            level_ok &= ok;
            cert.push(judged_step(
                format!("level {level}: MS1 conjugation instance {k}"),
                inputs(&[("a", a.to_string()), ("b", b.to_string()), ("x", x.to_string())]),
                format!("{} vs {}", fmt_c(lhs), fmt_c(rhs)),
                "equal within 1e-9",
                ok,
            ));

            // MS2: [b1 b2 / a] = [b1/a][b2/a]
            let (a, b1) = bracket_pair(&mut rng);
            let b2 = loop {
                let b2 = level * rng.gen_range(1..=span) * if rng.gen_bool(0.5) { 1 } else { -1 };
                if symbols::gcd(a, b2) == 1 {
                    break b2;
                }
            };
            let lhs = calc.bracket(a, b1 * b2)?;
            let rhs = calc.bracket(a, b1)? * calc.bracket(a, b2)?;
            let ok = close(lhs, rhs, tol);
            level_ok &= ok;
            cert.push(judged_step(
                format!("level {level}: MS2 multiplicativity instance {k}"),
                inputs(&[("a", a.to_string()), ("b1", b1.to_string()), ("b2", b2.to_string())]),
                format!("{} vs {}", fmt_c(lhs), fmt_c(rhs)),
                "equal within 1e-9",
                ok,
            ));

            // bracket-brace exchange: [c1/a]{c2/a} = {c1^2 c2 / a}; small
            // factors keep the pole of the cubed-level brace shallow, and
            // a = 1 mod level makes coprimality automatic
            let a = 1 + level * rng.gen_range(1..=4);
            let sign = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { 1 } else { -1 };
            let c1 = level * rng.gen_range(1..=2) * sign(&mut rng);
            let c2 = level * rng.gen_range(1..=2) * sign(&mut rng);
            let lhs = calc.bracket(a, c1)? * calc.brace(c2, a)?;
            let rhs = calc.brace(c1 * c1 * c2, a)?;
            let ok = close(lhs, rhs, tol);
            level_ok &= ok;
            cert.push(judged_step(
                format!("level {level}: bracket-brace exchange instance {k}"),
                inputs(&[("a", a.to_string()), ("c1", c1.to_string()), ("c2", c2.to_string())]),
                format!("{} vs {}", fmt_c(lhs), fmt_c(rhs)),
                "equal within 1e-9",
                ok,
            ));

            // brace is completion-independent, and both embeddings agree
            let (c, d) = sample::random_congruence_pair(&mut rng, level, 24 * level);
            let m = sample::complete_congruence_row(c, d, level)?;
            let shifted: SymplecticMatrix = {
                let a2 = m.entry_i64(0, 0)? + level * c;
                let b2 = m.entry_i64(0, 1)? + level * d;
                format!("{a2},{b2};{c},{d}").parse()?
            };
            let v1 = (evaluator)(EmbedAxis::One, &m)?;
            let v2 = (evaluator)(EmbedAxis::One, &shifted)?;
            let ok = close(v1, v2, tol);
            level_ok &= ok;
            cert.push(judged_step(
                format!("level {level}: brace completion independence instance {k}"),
                inputs(&[("m", m.to_string()), ("shifted", shifted.to_string())]),
                format!("{} vs {}", fmt_c(v1), fmt_c(v2)),
                "equal within 1e-9",
                ok,
            ));

            let w1 = (evaluator)(EmbedAxis::One, &m)?;
            let w2 = (evaluator)(EmbedAxis::Two, &m)?;
            let ok = close(w1, w2, tol);
            level_ok &= ok;
            cert.push(judged_step(
                format!("level {level}: first and second embedding agree, instance {k}"),
                inputs(&[("m", m.to_string())]),
                format!("{} vs {}", fmt_c(w1), fmt_c(w2)),
                "equal within 1e-9",
                ok,
            ));
        }

        if level_ok {
            passing_level = Some(level);
            break;
        }
        level *= 2;
    }

    match passing_level {
        Some(l) => {
            cert.level = Some(l);
            // a failed lower level leaves failing steps; the certificate
            // verdict is the escalation outcome
            cert.pass = true;
            cert.conclude(format!("all axioms hold at level {l} (minimal passing level)"));
        }
        None => {
            cert.pass = false;
            cert.conclude(format!(
                "axioms still fail after 4 doublings (last level {})",
                level / 2
            ));
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_tags_round_trip() {
        for tag in LemmaTag::ALL {
            let s = tag.to_string();
            assert_eq!(s.parse::<LemmaTag>().unwrap(), tag);
        }
        assert!("nope".parse::<LemmaTag>().is_err());
    }

    #[test]
    fn lemma_suite_small_run() {
        for tag in LemmaTag::ALL {
            let cert = verify_lemma(tag, 12, 9).unwrap();
            assert!(cert.pass, "lemma {tag} failed: {}", cert.to_json());
            assert_eq!(cert.steps.len(), 12);
        }
    }

    #[test]
    fn lemma_suite_is_seed_reproducible() {
        let a = verify_lemma(LemmaTag::Pval, 6, 42).unwrap();
        let b = verify_lemma(LemmaTag::Pval, 6, 42).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = verify_lemma(LemmaTag::Pval, 6, 43).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn bms_pinned_parameters() {
        let p = BmsParameters::new(5, 1, 4, 1, 1, 4, 1).unwrap();
        assert_eq!(p.y, BigInt::from(13));
        let (_, holds) = bms_build(&p).unwrap();
        assert!(holds);
        let cert = bms_w_check(&p).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
    }

    #[test]
    fn bms_degenerate_parameters() {
        let p = BmsParameters::new(1, 0, 0, 1, 0, 0, 1).unwrap();
        assert_eq!(p.y, BigInt::from(1));
        let (m, holds) = bms_build(&p).unwrap();
        assert!(holds);
        assert!(m.h3.is_identity());
        assert!(matches!(bms_w_check(&p), Err(CertError::Precondition(_))));
    }

    #[test]
    fn bms_negative_c2_instance() {
        // both imaginary parts share the sign of c2
        let p = BmsParameters::new(5, 1, 4, 1, -1, -4, 1).unwrap();
        let cert = bms_w_check(&p).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
    }

    #[test]
    fn bms_rejects_bad_determinant() {
        assert!(matches!(
            BmsParameters::new(2, 1, 1, 1, 1, 4, 1),
            Err(CertError::BadParameters(_))
        ));
    }

    #[test]
    fn small_identities_pass() {
        let cert = small_identities().unwrap();
        assert!(cert.pass, "{}", cert.to_json());
        // the pinned instance a = 5 gives the product (-3,4;-4,5)
        let pinned = cert
            .steps
            .iter()
            .find(|s| s.description.contains("a = 5"))
            .expect("pinned step present");
        assert_eq!(pinned.computed, "-3,4;-4,5");
    }

    #[test]
    fn krons_level_four() {
        let cert = krons_certificate(4, 200).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
        assert_eq!(cert.level, Some(4));
        // main instance: d = 5, c = 24, x = 1, y = 1
        let dec = cert
            .steps
            .iter()
            .find(|s| s.description.starts_with("decomposition"))
            .unwrap();
        assert_eq!(dec.inputs["c"], "24");
        assert_eq!(dec.inputs["d"], "5");
        assert_eq!(dec.inputs["x"], "1");
        assert_eq!(dec.inputs["y"], "1");
        // the degenerate candidate c = 4 is recorded and accepted
        assert!(cert
            .steps
            .iter()
            .any(|s| s.description.contains("degenerate") && s.inputs["c"] == "4" && s.pass));
    }

    #[test]
    fn krons_level_eight() {
        let cert = krons_certificate(8, 600).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
    }

    #[test]
    fn zpir_pinned_instance() {
        let m: SymplecticMatrix = "13,8;8,5".parse().unwrap();
        let cert = zpir_check(&m, 4).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
        let row = cert.steps.iter().find(|s| s.description.starts_with("product row")).unwrap();
        assert_eq!(row.computed, "(-4, -7)");
    }

    #[test]
    fn zpir_guards() {
        // wrong symbol: (24/5) = +1
        let m: SymplecticMatrix = "77,16;24,5".parse().unwrap();
        assert!(matches!(zpir_check(&m, 4), Err(CertError::Precondition(_))));
        // inequality violated: d q >= c (q-1)
        let m: SymplecticMatrix = "5,4;16,13".parse().unwrap();
        assert!(matches!(zpir_check(&m, 4), Err(CertError::Precondition(_))));
    }

    #[test]
    fn deligne_level_four_pinned_chain() {
        let cert = deligne_certificate(4, 400).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
        let search = &cert.steps[0];
        assert!(search.computed.contains("c = 8, d = 5"));
        assert!(search.computed.contains("13,8;8,5"));
        let square = cert.steps.iter().find(|s| s.description.starts_with("square:")).unwrap();
        assert_eq!(square.computed, "(144, 89)");
        assert!(cert.conclusion.contains("2r is integral"));
    }

    #[test]
    fn deligne_reproducible_bytes() {
        let a = deligne_certificate(4, 400).unwrap().to_json();
        let b = deligne_certificate(4, 400).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn deligne_level_eight() {
        let cert = deligne_certificate(8, 1200).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
        let search = &cert.steps[0];
        assert!(search.computed.contains("c = 24, d = 17"), "{}", search.computed);
    }

    #[test]
    fn mennicke_small_run_at_level_four() {
        let cert = mennicke_axiom_check(theta_embedded_evaluator, 4, 2, 7).unwrap();
        assert!(cert.pass, "{}", cert.to_json());
        assert_eq!(cert.level, Some(4));
    }
}
