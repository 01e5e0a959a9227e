//! Closed-form evaluation of the genus-1 cocycle via the classical
//! Petersson/Maass five-case sign table.
//!
//! The table reads only the signs of five integers: the second row
//! `(m1, m2)` of `M`, the first column entries `a, c` of `S`, and the
//! second-row entries `(m1p, m2p)` of the product `MS`.
//!
//! Orientation: the table as classically printed evaluates the *composition*
//! orientation of the cocycle (the one in which multiplier systems multiply,
//! see [`crate::cocycle::WeightedFactor`]); the continuation definition used
//! by [`crate::cocycle::w_cocycle`] has the opposite sign in every case,
//! including all degenerate ones. [`w_exact`] returns the value matching the
//! continuation definition; [`defect_exact`] returns the printed table value.
//! [`orientation_report`] documents the relation empirically against the
//! numeric oracle, case by case.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cocycle::{self, CocycleError};
use crate::matrix::{MatrixError, RealSymplectic, SymplecticMatrix};
use crate::sample;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("expected genus-1 input, got genus {0}")]
    WrongGenus(usize),
    #[error("table case {case} produced {value}, which is not divisible by 4")]
    NotDivisible { case: usize, value: i64 },
    #[error("sign of a floating entry could not be determined (NaN)")]
    BadRealSign,
    #[error(transparent)]
    Oracle(#[from] CocycleError),
}

/// The sign-relevant data of a genus-1 pair: second row of `M`, first column
/// of `S`, second row of the exact product `MS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondRowData {
    pub m1: BigInt,
    pub m2: BigInt,
    pub a: BigInt,
    pub c: BigInt,
    pub m1p: BigInt,
    pub m2p: BigInt,
}

impl SecondRowData {
    pub fn from_pair(m: &SymplecticMatrix, s: &SymplecticMatrix) -> Result<Self, TableError> {
        if m.genus() != 1 {
            return Err(TableError::WrongGenus(m.genus()));
        }
        if s.genus() != 1 {
            return Err(TableError::WrongGenus(s.genus()));
        }
        let ms = m.mul(s)?;
        Ok(SecondRowData {
            m1: m.entry(1, 0).clone(),
            m2: m.entry(1, 1).clone(),
            a: s.entry(0, 0).clone(),
            c: s.entry(1, 0).clone(),
            m1p: ms.entry(1, 0).clone(),
            m2p: ms.entry(1, 1).clone(),
        })
    }

    fn signs(&self) -> Signs {
        let sg = |x: &BigInt| -> i64 {
            if x.is_zero() {
                0
            } else if x.is_positive() {
                1
            } else {
                -1
            }
        };
        Signs {
            m1: sg(&self.m1),
            m2: sg(&self.m2),
            a: sg(&self.a),
            c: sg(&self.c),
            m1p: sg(&self.m1p),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Signs {
    m1: i64,
    m2: i64,
    a: i64,
    c: i64,
    m1p: i64,
}

/// The five-case table on sign data. Returns `(case_index, value)` where the
/// raw case expression has already been checked to be divisible by 4.
fn table_cases(s: Signs) -> Result<(usize, i64), TableError> {
    let (case, four_w) = if s.m1 * s.c * s.m1p != 0 {
        (1, s.c + s.m1 - s.m1p - s.c * s.m1 * s.m1p)
    } else if s.c * s.m1 != 0 {
        // m1p = 0
        (2, -(1 - s.c) * (1 - s.m1))
    } else if s.c * s.m1p != 0 {
        // m1 = 0
        (3, (1 + s.c) * (1 - s.m2))
    } else if s.m1 * s.m1p != 0 {
        // c = 0
        (4, (1 - s.a) * (1 + s.m1))
    } else {
        // c = m1 = m1p = 0
        (5, (1 - s.a) * (1 - s.m2))
    };
    if four_w % 4 != 0 {
        return Err(TableError::NotDivisible { case, value: four_w });
    }
    Ok((case, four_w / 4))
}

/// Printed table value (composition orientation) for an exact pair.
pub fn defect_exact(m: &SymplecticMatrix, s: &SymplecticMatrix) -> Result<i64, TableError> {
    let data = SecondRowData::from_pair(m, s)?;
    table_cases(data.signs()).map(|(_, v)| v)
}

/// Exact genus-1 cocycle value in the orientation of the continuation
/// definition; agrees with [`crate::cocycle::w_cocycle`] in every case.
/// Equal to the negative of [`defect_exact`].
pub fn w_exact(m: &SymplecticMatrix, s: &SymplecticMatrix) -> Result<i64, TableError> {
    defect_exact(m, s).map(|v| -v)
}

/// Case index (1..=5) hit by a pair; used by reports.
pub fn case_index(m: &SymplecticMatrix, s: &SymplecticMatrix) -> Result<usize, TableError> {
    let data = SecondRowData::from_pair(m, s)?;
    table_cases(data.signs()).map(|(c, _)| c)
}

fn real_sign(x: f64) -> Result<i64, TableError> {
    if x.is_nan() {
        return Err(TableError::BadRealSign);
    }
    Ok(if x == 0.0 {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    })
}

/// Real-entry variant of [`defect_exact`]; signs are read from the floating
/// entries directly.
pub fn defect_real(m: &RealSymplectic, s: &RealSymplectic) -> Result<i64, TableError> {
    if m.genus() != 1 {
        return Err(TableError::WrongGenus(m.genus()));
    }
    if s.genus() != 1 {
        return Err(TableError::WrongGenus(s.genus()));
    }
    let m1 = m.entry(1, 0);
    let m2 = m.entry(1, 1);
    let m1p = m1 * s.entry(0, 0) + m2 * s.entry(1, 0);
    let signs = Signs {
        m1: real_sign(m1)?,
        m2: real_sign(m2)?,
        a: real_sign(s.entry(0, 0))?,
        c: real_sign(s.entry(1, 0))?,
        m1p: real_sign(m1p)?,
    };
    table_cases(signs).map(|(_, v)| v)
}

/// Real-entry variant of [`w_exact`].
pub fn w_real(m: &RealSymplectic, s: &RealSymplectic) -> Result<i64, TableError> {
    defect_real(m, s).map(|v| -v)
}

/// Sufficient condition for `w(M, S) = 0`: `m1 c m1p != 0` together with
/// `m1 m1p > 0` or `m1 c < 0`.
pub fn corollary_zero(m: &SymplecticMatrix, s: &SymplecticMatrix) -> Result<bool, TableError> {
    let d = SecondRowData::from_pair(m, s)?;
    if (&d.m1 * &d.c * &d.m1p).is_zero() {
        return Ok(false);
    }
    Ok((&d.m1 * &d.m1p).is_positive() || (&d.m1 * &d.c).is_negative())
}

/// Cocycle values of `M` against the translation `(1, x; 0, 1)` in both
/// orders. Both are zero; the pair of table evaluations is returned so the
/// caller can assert it.
pub fn translation_rule_values(
    m: &SymplecticMatrix,
    x: i64,
) -> Result<(i64, i64), TableError> {
    let t: SymplecticMatrix = format!("1,{x};0,1").parse()?;
    let left = w_exact(m, &t)?;
    let right = w_exact(&t, m)?;
    Ok((left, right))
}

/// Per-case comparison of the two table orientations against the numeric
/// continuation oracle.
#[derive(Debug, Clone, Serialize)]
pub struct CaseTally {
    pub case_label: String,
    pub samples: usize,
    /// `w_exact` agreement with the oracle (must equal `samples`).
    pub oracle_matches_exact: usize,
    /// printed table agreement with the oracle as-is.
    pub printed_matches_oracle: usize,
    /// printed table agreement with the negated oracle.
    pub printed_matches_negated_oracle: usize,
    /// first pair (if any) where `w_exact` deviated from the oracle.
    pub first_exact_mismatch: Option<String>,
}

/// Empirical orientation report over the degenerate case families and a
/// general-position family, including the pinned pair `M = S = -E` in the
/// fully degenerate family. The printed table systematically matches the
/// negated oracle; `w_exact` must match the oracle everywhere.
#[derive(Debug, Clone, Serialize)]
pub struct OrientationReport {
    pub tallies: Vec<CaseTally>,
    /// Printed table value on `M = S = -E` (the classical boundary case).
    pub minus_identity_printed: i64,
    /// Continuation oracle value on the same pair.
    pub minus_identity_oracle: i64,
}

impl OrientationReport {
    /// True when `w_exact` agreed with the oracle on every sample.
    pub fn exact_clean(&self) -> bool {
        self.tallies.iter().all(|t| t.oracle_matches_exact == t.samples)
    }
}

pub fn orientation_report(
    samples_per_case: usize,
    seed: u64,
) -> Result<OrientationReport, TableError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    // random upper-triangular genus-1 matrix (eps, k; 0, eps)
    fn upper(rng: &mut rand_chacha::ChaCha8Rng) -> SymplecticMatrix {
        use rand::Rng;
        let eps: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let k: i64 = rng.gen_range(-20..=20);
        format!("{eps},{k};0,{eps}").parse().unwrap()
    }

    let mut tallies = Vec::new();
    for family in 0..5usize {
        let label = match family {
            0 => "general position (m1 c m1p != 0)",
            1 => "m1p = 0",
            2 => "m1 = 0",
            3 => "c = 0",
            _ => "c = m1 = m1p = 0",
        };
        let mut tally = CaseTally {
            case_label: label.to_string(),
            samples: 0,
            oracle_matches_exact: 0,
            printed_matches_oracle: 0,
            printed_matches_negated_oracle: 0,
            first_exact_mismatch: None,
        };
        let mut produced = 0usize;
        while produced < samples_per_case {
            let (m, s) = match family {
                0 => {
                    let m = sample::random_sl2(&mut rng, 30);
                    let s = sample::random_sl2(&mut rng, 30);
                    let d = SecondRowData::from_pair(&m, &s)?;
                    if (&d.m1 * &d.c * &d.m1p).is_zero() {
                        continue;
                    }
                    (m, s)
                }
                1 => {
                    // M = U S^-1 makes the product MS upper-triangular
                    let u = upper(&mut rng);
                    let s = loop {
                        let s = sample::random_sl2(&mut rng, 30);
                        if !s.entry(1, 0).is_zero() {
                            break s;
                        }
                    };
                    (u.mul(&s.inverse()).unwrap(), s)
                }
                2 => {
                    let m = upper(&mut rng);
                    let s = loop {
                        let s = sample::random_sl2(&mut rng, 30);
                        if !s.entry(1, 0).is_zero() {
                            break s;
                        }
                    };
                    (m, s)
                }
                3 => {
                    let m = loop {
                        let m = sample::random_sl2(&mut rng, 30);
                        if !m.entry(1, 0).is_zero() {
                            break m;
                        }
                    };
                    (m, upper(&mut rng))
                }
                _ => {
                    // fully degenerate; seed the family with M = S = -E
                    if produced == 0 {
                        let neg = SymplecticMatrix::minus_identity(1);
                        (neg.clone(), neg)
                    } else {
                        (upper(&mut rng), upper(&mut rng))
                    }
                }
            };
            // family sanity: resample if the intended degeneracy was missed
            let d = SecondRowData::from_pair(&m, &s)?;
            let ok = match family {
                0 => !(&d.m1 * &d.c * &d.m1p).is_zero(),
                1 => d.m1p.is_zero() && !(&d.m1 * &d.c).is_zero(),
                2 => d.m1.is_zero() && !(&d.c * &d.m1p).is_zero(),
                3 => d.c.is_zero() && !(&d.m1 * &d.m1p).is_zero(),
                _ => d.c.is_zero() && d.m1.is_zero() && d.m1p.is_zero(),
            };
            if !ok {
                continue;
            }
            produced += 1;
            let printed = defect_exact(&m, &s)?;
            let exact = -printed;
            let oracle = cocycle::w_cocycle(&m, &s)?.w;
            tally.samples += 1;
            if exact == oracle {
                tally.oracle_matches_exact += 1;
            } else if tally.first_exact_mismatch.is_none() {
                tally.first_exact_mismatch = Some(format!("M = {m}; S = {s}"));
            }
            if printed == oracle {
                tally.printed_matches_oracle += 1;
            }
            if printed == -oracle {
                tally.printed_matches_negated_oracle += 1;
            }
        }
        tallies.push(tally);
    }

    let neg = SymplecticMatrix::minus_identity(1);
    let minus_identity_printed = defect_exact(&neg, &neg)?;
    let minus_identity_oracle = cocycle::w_cocycle(&neg, &neg)?.w;
    Ok(OrientationReport { tallies, minus_identity_printed, minus_identity_oracle })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> SymplecticMatrix {
        s.parse().unwrap()
    }

    #[test]
    fn general_position_examples() {
        // all signs positive: zero in both orientations
        let u = m("1,0;1,1");
        assert_eq!(w_exact(&u, &u).unwrap(), 0);
        assert_eq!(defect_exact(&u, &u).unwrap(), 0);

        // signs (+, +, -): printed value 1, continuation value -1
        let s = m("-2,-3;1,1");
        assert_eq!(defect_exact(&u, &s).unwrap(), 1);
        assert_eq!(w_exact(&u, &s).unwrap(), -1);
        // the oracle agrees with w_exact
        assert_eq!(cocycle::w_cocycle(&u, &s).unwrap().w, -1);
    }

    #[test]
    fn degenerate_inversion_pair() {
        // c m1 != 0, m1p = 0: both orientations give 0 here
        let s1 = m("0,-1;1,0");
        assert_eq!(w_exact(&s1, &s1).unwrap(), 0);
        assert_eq!(cocycle::w_cocycle(&s1, &s1).unwrap().w, 0);
    }

    #[test]
    fn fully_degenerate_minus_identity() {
        let neg = SymplecticMatrix::minus_identity(1);
        assert_eq!(defect_exact(&neg, &neg).unwrap(), 1);
        assert_eq!(w_exact(&neg, &neg).unwrap(), -1);
        assert_eq!(cocycle::w_cocycle(&neg, &neg).unwrap().w, -1);
    }

    #[test]
    fn corollary_examples() {
        let a = m("13,8;8,5");
        assert!(corollary_zero(&a, &a).unwrap());
        assert_eq!(w_exact(&a, &a).unwrap(), 0);

        let u = m("1,0;1,1");
        let s = m("-2,-3;1,1");
        assert!(!corollary_zero(&u, &s).unwrap());

        // c = 0 fails the hypothesis
        let t = m("1,3;0,1");
        assert!(!corollary_zero(&u, &t).unwrap());
    }

    #[test]
    fn translation_rules_are_zero() {
        for (mm, x) in [(m("0,-1;1,0"), 5), (SymplecticMatrix::minus_identity(1), 1), (SymplecticMatrix::identity(1), 0)] {
            assert_eq!(translation_rule_values(&mm, x).unwrap(), (0, 0));
        }
    }

    #[test]
    fn real_variant_agrees_with_exact() {
        let pairs = [
            (m("1,0;1,1"), m("-2,-3;1,1")),
            (m("13,8;8,5"), m("-3,-4;4,5")),
            (m("0,-1;1,0"), m("1,4;0,1")),
        ];
        for (a, b) in pairs {
            let ra = a.to_real();
            let rb = b.to_real();
            assert_eq!(w_real(&ra, &rb).unwrap(), w_exact(&a, &b).unwrap());
        }
    }

    #[test]
    fn pinned_level4_instance() {
        // the level-4 chain pair: printed +1, continuation -1
        let a = m("13,8;8,5");
        let s = m("-3,-4;4,5");
        assert_eq!(defect_exact(&a, &s).unwrap(), 1);
        assert_eq!(w_exact(&a, &s).unwrap(), -1);
    }

    #[test]
    fn small_orientation_report_is_clean() {
        let rep = orientation_report(40, 17).unwrap();
        assert!(rep.exact_clean());
        assert_eq!(rep.minus_identity_printed, 1);
        assert_eq!(rep.minus_identity_oracle, -1);
        // printed == -oracle throughout
        for t in &rep.tallies {
            assert_eq!(t.printed_matches_negated_oracle, t.samples, "{}", t.case_label);
        }
    }
}
