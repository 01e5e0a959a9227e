//! Seeded random instance generators for tests and certificates.
//!
//! Everything here is a pure function of the supplied RNG, so a fixed seed
//! reproduces the exact instance stream. Generators reject oversized results
//! instead of clamping, keeping distributions simple and entries bounded.

use num_bigint::BigInt;
use rand::Rng;

use crate::matrix::{SymplecticMatrix, TriangleKind};
use crate::symbols;

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("row ({c}, {d}) is not a valid level-{q} congruence row")]
    BadCongruenceRow { c: i64, d: i64, q: i64 },
}

/// Random element of `SL2(Z)` with all entries bounded by `bound`.
/// Samples a coprime bottom row, completes it, and applies a small random
/// row shift; rejects completions that exceed the bound.
pub fn random_sl2<R: Rng>(rng: &mut R, bound: i64) -> SymplecticMatrix {
    let half = (bound / 2).max(1);
    loop {
        let c = rng.gen_range(-half..=half);
        let d = rng.gen_range(-half..=half);
        if c == 0 && d == 0 {
            continue;
        }
        let (g, x, y) = symbols::egcd(d, c);
        if g != 1 {
            continue;
        }
        // d*x + c*y = 1, so (a, b) = (x, -y) solves a d - b c = 1
        let k = rng.gen_range(-2..=2i64);
        let a = x + k * c;
        let b = -y + k * d;
        if a.abs() > bound || b.abs() > bound {
            continue;
        }
        return format!("{a},{b};{c},{d}")
            .parse()
            .expect("completed row is unimodular");
    }
}

/// Random symmetric integer block, entries in `[-bound, bound]`.
pub fn random_symmetric<R: Rng>(rng: &mut R, genus: usize, bound: i64) -> Vec<BigInt> {
    let mut s = vec![BigInt::from(0); genus * genus];
    for r in 0..genus {
        for c in r..genus {
            let v = BigInt::from(rng.gen_range(-bound..=bound));
            s[r * genus + c] = v.clone();
            s[c * genus + r] = v;
        }
    }
    s
}

fn sp4_generator<R: Rng>(rng: &mut R) -> SymplecticMatrix {
    match rng.gen_range(0..8u8) {
        0 => SymplecticMatrix::iota1(&random_sl2(rng, 3)).unwrap(),
        1 => SymplecticMatrix::iota2(&random_sl2(rng, 3)).unwrap(),
        2 => SymplecticMatrix::iota3(&random_sl2(rng, 3)).unwrap(),
        3 => SymplecticMatrix::translation(2, &random_symmetric(rng, 2, 2)).unwrap(),
        4 => SymplecticMatrix::lower_translation(2, &random_symmetric(rng, 2, 2)).unwrap(),
        5 => SymplecticMatrix::involution(2),
        6 => SymplecticMatrix::swap_p(),
        _ => SymplecticMatrix::minus_identity(2),
    }
}

/// Random element of `Sp(2, Z)` as a word of at most `words` standard
/// generators, with all entries bounded by `bound`.
pub fn random_sp4<R: Rng>(rng: &mut R, words: usize, bound: i64) -> SymplecticMatrix {
    let bound = BigInt::from(bound);
    let mut len = words.max(1);
    loop {
        for _ in 0..200 {
            let mut m = SymplecticMatrix::identity(2);
            for _ in 0..len {
                m = m.mul(&sp4_generator(rng)).unwrap();
            }
            if m.max_entry_abs() <= bound {
                return m;
            }
        }
        // bound too tight for this word length; shorten
        if len > 1 {
            len -= 1;
        }
    }
}

/// Random symplectic matrix of arbitrary genus from translation/involution
/// words (sufficient for sampling; entries bounded by `bound`).
pub fn random_sp<R: Rng>(rng: &mut R, genus: usize, words: usize, bound: i64) -> SymplecticMatrix {
    let bound = BigInt::from(bound);
    let mut len = words.max(1);
    loop {
        for _ in 0..200 {
            let mut m = SymplecticMatrix::identity(genus);
            for _ in 0..len {
                let g = match rng.gen_range(0..3u8) {
                    0 => SymplecticMatrix::translation(genus, &random_symmetric(rng, genus, 2))
                        .unwrap(),
                    1 => SymplecticMatrix::lower_translation(
                        genus,
                        &random_symmetric(rng, genus, 2),
                    )
                    .unwrap(),
                    _ => SymplecticMatrix::involution(genus),
                };
                m = m.mul(&g).unwrap();
            }
            if m.max_entry_abs() <= bound {
                return m;
            }
        }
        if len > 1 {
            len -= 1;
        }
    }
}

/// Random genus-2 Siegel parabolic `(A, AS; 0, A'^-1)` with `det D` of the
/// requested sign.
pub fn random_siegel_parabolic<R: Rng>(rng: &mut R, positive_eps: bool) -> SymplecticMatrix {
    let a = random_sl2(rng, 5);
    let mut u = vec![
        a.entry(0, 0).clone(),
        a.entry(0, 1).clone(),
        a.entry(1, 0).clone(),
        a.entry(1, 1).clone(),
    ];
    if !positive_eps {
        // flip the second column: det becomes -1
        u[1] = -u[1].clone();
        u[3] = -u[3].clone();
    }
    let rot = SymplecticMatrix::unimodular_embed(2, &u).unwrap();
    let t = SymplecticMatrix::translation(2, &random_symmetric(rng, 2, 4)).unwrap();
    rot.mul(&t).unwrap()
}

/// Random genus-2 Klingen parabolic fixing the given axis (1 or 2), as a
/// short word in the parabolic's generators.
pub fn random_klingen<R: Rng>(rng: &mut R, axis: u8) -> SymplecticMatrix {
    use crate::matrix::ParabolicClass;
    assert!(axis == 1 || axis == 2, "axis must be 1 or 2");
    let len = rng.gen_range(2..=4usize);
    loop {
        let mut m = SymplecticMatrix::identity(2);
        for _ in 0..len {
            let g = match rng.gen_range(0..4u8) {
                0 => {
                    let s = random_sl2(rng, 4);
                    if axis == 1 {
                        SymplecticMatrix::iota1(&s).unwrap()
                    } else {
                        SymplecticMatrix::iota2(&s).unwrap()
                    }
                }
                1 => SymplecticMatrix::translation(2, &random_symmetric(rng, 2, 3)).unwrap(),
                2 => {
                    let s = BigInt::from(rng.gen_range(-3..=3i64));
                    let z = BigInt::from(0);
                    let block = if axis == 1 {
                        vec![s, z.clone(), z.clone(), z]
                    } else {
                        vec![z.clone(), z.clone(), z, s]
                    };
                    SymplecticMatrix::lower_translation(2, &block).unwrap()
                }
                _ => {
                    let neg = SymplecticMatrix::minus_identity(1);
                    if axis == 1 {
                        SymplecticMatrix::iota2(&neg).unwrap()
                    } else {
                        SymplecticMatrix::iota1(&neg).unwrap()
                    }
                }
            };
            m = m.mul(&g).unwrap();
        }
        let class = m.classify_parabolic().unwrap();
        let want = if axis == 1 { ParabolicClass::Klingen1 } else { ParabolicClass::Klingen2 };
        // the Siegel pattern is a sub-pattern reported with priority
        if class == want || class == ParabolicClass::Siegel {
            return m;
        }
    }
}

/// Random element of the genus-2 theta group (`A B'` and `C D'` with even
/// diagonal) as a word of at most `max_words` theta-group generators.
pub fn random_theta_group<R: Rng>(rng: &mut R, max_words: usize) -> SymplecticMatrix {
    let len = rng.gen_range(1..=max_words.max(1));
    let mut m = SymplecticMatrix::identity(2);
    for _ in 0..len {
        let g = match rng.gen_range(0..8u8) {
            0 => SymplecticMatrix::translation(2, &even_diagonal_symmetric(rng)).unwrap(),
            1 => SymplecticMatrix::lower_translation(2, &even_diagonal_symmetric(rng)).unwrap(),
            2 => SymplecticMatrix::involution(2),
            3 => SymplecticMatrix::iota3(&random_sl2(rng, 4)).unwrap(),
            4 => SymplecticMatrix::iota1(&"0,-1;1,0".parse().unwrap()).unwrap(),
            5 => SymplecticMatrix::iota2(&"0,-1;1,0".parse().unwrap()).unwrap(),
            6 => SymplecticMatrix::iota1(&"1,2;0,1".parse().unwrap()).unwrap(),
            _ => SymplecticMatrix::iota2(&"1,0;2,1".parse().unwrap()).unwrap(),
        };
        m = m.mul(&g).unwrap();
    }
    m
}

fn even_diagonal_symmetric<R: Rng>(rng: &mut R) -> Vec<BigInt> {
    let d1 = 2 * rng.gen_range(-1..=1i64);
    let d2 = 2 * rng.gen_range(-1..=1i64);
    let off = rng.gen_range(-2..=2i64);
    vec![BigInt::from(d1), BigInt::from(off), BigInt::from(off), BigInt::from(d2)]
}

/// Random bottom row `(c, d)` of a level-`q` congruence matrix:
/// `c = 0 (mod q)`, `d = 1 (mod q)`, coprime, `c != 0`, both bounded.
pub fn random_congruence_pair<R: Rng>(rng: &mut R, q: i64, bound: i64) -> (i64, i64) {
    let span = (bound / q).max(1);
    loop {
        let c = q * rng.gen_range(-span..=span);
        let d = 1 + q * rng.gen_range(-span..=span);
        if c != 0 && symbols::gcd(c, d) == 1 {
            return (c, d);
        }
    }
}

/// Canonical completion of a level-`q` congruence row `(c, d)` to a matrix
/// `(a, b; c, d)` that is the identity mod `q`.
///
/// The completion is deterministic: the base solution takes
/// `a0 = d^-1 mod |c|` in `[0, |c|)`, and the final row adds the smallest
/// nonnegative multiple `k < q` of `(c, d)` that makes `b = 0 (mod q)`.
pub fn complete_congruence_row(c: i64, d: i64, q: i64) -> Result<SymplecticMatrix, SampleError> {
    let bad = || SampleError::BadCongruenceRow { c, d, q };
    if q < 1 || c.rem_euclid(q) != 0 || d.rem_euclid(q) != 1 || symbols::gcd(c, d) != 1 {
        return Err(bad());
    }
    if c == 0 {
        // d = +-1; b must vanish mod q, take the diagonal representative
        return match d {
            1 => Ok(SymplecticMatrix::identity(1)),
            -1 => Ok(SymplecticMatrix::minus_identity(1)),
            _ => Err(bad()),
        };
    }
    let a0 = symbols::mod_inverse(d, c.abs()).ok_or_else(bad)?;
    let b0 = (a0 * d - 1) / c;
    // b0 + k d = 0 (mod q); d = 1 (mod q) makes this k = -b0 (mod q)
    let k = (-b0).rem_euclid(q);
    let a = a0 + k * c;
    let b = b0 + k * d;
    Ok(format!("{a},{b};{c},{d}").parse().expect("completion is unimodular"))
}

/// Random parameter tuple `(a, b1, c1, d1, b2, c2, d2)` with
/// `a d1 - b1 c1 = 1` and `a d2 - b2 c2 = 1`, both `c` entries nonzero.
pub fn random_bms_parameters<R: Rng>(rng: &mut R, bound: i64) -> [i64; 7] {
    loop {
        let m1 = random_sl2(rng, bound);
        let a = m1.entry_i64(0, 0).unwrap();
        let b1 = m1.entry_i64(0, 1).unwrap();
        let c1 = m1.entry_i64(1, 0).unwrap();
        let d1 = m1.entry_i64(1, 1).unwrap();
        if c1 == 0 {
            continue;
        }
        // second completion shares the upper-left entry
        let mut found = None;
        for _ in 0..40 {
            let c2 = rng.gen_range(-bound.max(2)..=bound.max(2));
            if c2 == 0 || symbols::gcd(a, c2) != 1 {
                continue;
            }
            let (_, x, y) = symbols::egcd(a, c2);
            // a x + c2 y = 1: take d2 = x + j c2, b2 = -(y - j a)
            let j = rng.gen_range(-1..=1i64);
            let d2 = x + j * c2;
            let b2 = -(y - j * a);
            debug_assert_eq!(a * d2 - b2 * c2, 1);
            if d2.abs() <= 3 * bound && b2.abs() <= 3 * bound {
                found = Some([a, b1, c1, d1, b2, c2, d2]);
                break;
            }
        }
        if let Some(p) = found {
            return p;
        }
    }
}

/// Genus-1 unipotent at level `q` (used by commutator certificates).
pub fn congruence_unipotent(q: i64, x: i64, kind: TriangleKind) -> SymplecticMatrix {
    SymplecticMatrix::bms_r_generator(q, x, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sl2_samples_are_valid_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m = random_sl2(&mut rng, 50);
            assert_eq!(m.genus(), 1);
            assert!(m.max_entry_abs() <= BigInt::from(50));
        }
    }

    #[test]
    fn sp4_samples_are_valid_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let m = random_sp4(&mut rng, 4, 50);
            assert_eq!(m.genus(), 2);
            assert!(m.max_entry_abs() <= BigInt::from(50));
        }
    }

    #[test]
    fn parabolic_samples_classify() {
        use crate::matrix::ParabolicClass;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let m = random_siegel_parabolic(&mut rng, true);
            assert_eq!(m.classify_parabolic().unwrap(), ParabolicClass::Siegel);
            assert!(m.epsilon().unwrap() > BigInt::from(0));
            let m = random_siegel_parabolic(&mut rng, false);
            assert!(m.epsilon().unwrap() < BigInt::from(0));
        }
        for _ in 0..40 {
            let k = random_klingen(&mut rng, 1);
            assert!(matches!(
                k.classify_parabolic().unwrap(),
                ParabolicClass::Klingen1 | ParabolicClass::Siegel
            ));
        }
    }

    #[test]
    fn congruence_completion_pinned() {
        let m = complete_congruence_row(8, 5, 4).unwrap();
        assert_eq!(m.to_string(), "13,8;8,5");
        assert!(m.in_principal_congruence(4));

        let m = complete_congruence_row(24, 17, 8).unwrap();
        assert_eq!(m.to_string(), "113,80;24,17");
        assert!(m.in_principal_congruence(8));

        assert!(complete_congruence_row(8, 3, 4).is_err());
    }

    #[test]
    fn congruence_pairs_satisfy_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let (c, d) = random_congruence_pair(&mut rng, 4, 200);
            assert_eq!(c.rem_euclid(4), 0);
            assert_eq!(d.rem_euclid(4), 1);
            assert_eq!(symbols::gcd(c, d), 1);
            let m = complete_congruence_row(c, d, 4).unwrap();
            assert!(m.in_principal_congruence(4));
        }
    }

    #[test]
    fn bms_parameters_satisfy_determinant_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let [a, b1, c1, d1, b2, c2, d2] = random_bms_parameters(&mut rng, 6);
            assert_eq!(a * d1 - b1 * c1, 1);
            assert_eq!(a * d2 - b2 * c2, 1);
            assert!(c1 != 0 && c2 != 0);
        }
    }

    #[test]
    fn theta_group_samples_have_even_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..60 {
            let m = random_theta_group(&mut rng, 6);
            // AB' and CD' have even diagonals
            let g = 2;
            for (x, y) in [(m.a_block(), m.b_block()), (m.c_block(), m.d_block())] {
                for r in 0..g {
                    let mut diag = BigInt::from(0);
                    for k in 0..g {
                        diag += &x[r * g + k] * &y[r * g + k];
                    }
                    assert!((&diag % 2u8).bits() == 0, "odd diagonal in theta sample");
                }
            }
        }
    }
}
