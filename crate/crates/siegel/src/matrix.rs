//! Exact symplectic matrices over the integers and points of the Siegel
//! upper half-space.
//!
//! A matrix `M` of size `2g x 2g` with blocks `(A, B; C, D)` is symplectic
//! when `M' I M = I` for `I = (0, -E; E, 0)`. Equivalently: `A'C` and `B'D`
//! are symmetric and `A'D - C'B = E`. All symplectic checks here are exact
//! (arbitrary-precision integers); the half-space side is `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg;

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("entry list has length {got}, expected {expected} for genus {genus}")]
    BadShape { genus: usize, expected: usize, got: usize },
    #[error("matrix is not symplectic: (M'IM - I) has nonzero entry {value} at ({row}, {col})")]
    NotSymplectic { row: usize, col: usize, value: BigInt },
    #[error("real matrix is not symplectic within {tol:e}: deviation {dev:e} at ({row}, {col})")]
    NotSymplecticReal { row: usize, col: usize, dev: f64, tol: f64 },
    #[error("genus mismatch: {left} vs {right}")]
    GenusMismatch { left: usize, right: usize },
    #[error("expected genus {expected}, got {got}")]
    WrongGenus { expected: usize, got: usize },
    #[error("matrix literal is malformed: {0}")]
    Parse(String),
    #[error("translation block must be symmetric: S[{row}][{col}] != S[{col}][{row}]")]
    NotSymmetricBlock { row: usize, col: usize },
    #[error("embedded block must be unimodular, det = {0}")]
    NotUnimodular(BigInt),
    #[error("point is not symmetric within 1e-12: deviation {dev:e} at ({row}, {col})")]
    PointNotSymmetric { row: usize, col: usize, dev: f64 },
    #[error("imaginary part is not positive definite: leading minor {index} is {value:e}")]
    NotPositiveDefinite { index: usize, value: f64 },
    #[error("action produced an asymmetric image (deviation {dev:e}); input is likely invalid")]
    ActAsymmetric { dev: f64 },
    #[error("linear solve in the half-space action was singular")]
    ActSingular,
    #[error("matrix is not a Siegel parabolic (C != 0)")]
    NotSiegelParabolic,
    #[error("entry {value} at ({row}, {col}) does not fit in i64")]
    EntryOverflow { row: usize, col: usize, value: BigInt },
    #[error("zero determinant encountered where a nonzero value is required")]
    ZeroDeterminant,
}

/// Gaussian integer with arbitrary-precision parts. Used for exact values of
/// `det(iC + D)`, which pin the endpoints of argument continuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn new(re: BigInt, im: BigInt) -> Self {
        GaussInt { re, im }
    }

    pub fn zero() -> Self {
        GaussInt { re: BigInt::zero(), im: BigInt::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, other: &Self) -> Self {
        GaussInt {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    fn sub(&self, other: &Self) -> Self {
        GaussInt { re: &self.re - &other.re, im: &self.im - &other.im }
    }

    fn add(&self, other: &Self) -> Self {
        GaussInt { re: &self.re + &other.re, im: &self.im + &other.im }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.im.is_positive() {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

/// Determinant of an n x n Gaussian-integer matrix by cofactor expansion.
/// Exact; intended for the small n that occur here.
fn gauss_det(n: usize, a: &[GaussInt]) -> GaussInt {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => GaussInt::new(BigInt::one(), BigInt::zero()),
        1 => a[0].clone(),
        2 => a[0].mul(&a[3]).sub(&a[1].mul(&a[2])),
        _ => {
            let mut acc = GaussInt::zero();
            for j in 0..n {
                if a[j].is_zero() {
                    continue;
                }
                let minor: Vec<GaussInt> = (1..n)
                    .flat_map(|r| (0..n).filter(|&c| c != j).map(move |c| (r, c)))
                    .map(|(r, c)| a[r * n + c].clone())
                    .collect();
                let term = a[j].mul(&gauss_det(n - 1, &minor));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Determinant of an n x n integer matrix by cofactor expansion.
fn big_det(n: usize, a: &[BigInt]) -> BigInt {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => BigInt::one(),
        1 => a[0].clone(),
        2 => &a[0] * &a[3] - &a[1] * &a[2],
        _ => {
            let mut acc = BigInt::zero();
            for j in 0..n {
                if a[j].is_zero() {
                    continue;
                }
                let minor: Vec<BigInt> = (1..n)
                    .flat_map(|r| (0..n).filter(|&c| c != j).map(move |c| (r, c)))
                    .map(|(r, c)| a[r * n + c].clone())
                    .collect();
                let term = &a[j] * big_det(n - 1, &minor);
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// Parabolic type of a genus-2 symplectic matrix, by zero pattern.
///
/// `Siegel` means `C = 0`. The two Klingen patterns fix the first or second
/// coordinate axis respectively; they are swapped by conjugation with the
/// coordinate-swap matrix. A matrix matching several patterns (for example
/// the identity) is reported with the priority Siegel, Klingen1, Klingen2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParabolicClass {
    Siegel,
    Klingen1,
    Klingen2,
    None,
}

/// Which triangle a one-parameter unipotent sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleKind {
    Upper,
    Lower,
}

/// An exact integer symplectic matrix of genus `g` (size `2g x 2g`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticMatrix {
    genus: usize,
    e: Vec<BigInt>,
}

impl SymplecticMatrix {
    /// Validates the symplectic identity `M'IM = I` exactly and reports the
    /// first violated entry otherwise. Entries are row-major, length `4g^2`.
    pub fn new(genus: usize, entries: Vec<BigInt>) -> Result<Self, MatrixError> {
        let n = 2 * genus;
        if genus == 0 || entries.len() != n * n {
            return Err(MatrixError::BadShape {
                genus,
                expected: n * n,
                got: entries.len(),
            });
        }
        let m = SymplecticMatrix { genus, e: entries };
        m.check_symplectic()?;
        Ok(m)
    }

    fn check_symplectic(&self) -> Result<(), MatrixError> {
        let n = 2 * self.genus;
        let g = self.genus;
        // S = M' I M, computed as (M' I) M; I M stacks (-C, -D; A, B).
        let im = |r: usize, c: usize| -> BigInt {
            if r < g {
                -&self.e[(r + g) * n + c]
            } else {
                self.e[(r - g) * n + c].clone()
            }
        };
        for r in 0..n {
            for c in 0..n {
                let mut s = BigInt::zero();
                for k in 0..n {
                    s += &self.e[k * n + r] * im(k, c);
                }
                // target entry of I
                let target: BigInt = if r < g && c == r + g {
                    -BigInt::one()
                } else if r >= g && c + g == r {
                    BigInt::one()
                } else {
                    BigInt::zero()
                };
                let diff = s - target;
                if !diff.is_zero() {
                    return Err(MatrixError::NotSymplectic { row: r, col: c, value: diff });
                }
            }
        }
        Ok(())
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn dim(&self) -> usize {
        2 * self.genus
    }

    pub fn entry(&self, r: usize, c: usize) -> &BigInt {
        &self.e[r * self.dim() + c]
    }

    /// Entry as i64, with an overflow error for oversized values.
    pub fn entry_i64(&self, r: usize, c: usize) -> Result<i64, MatrixError> {
        self.entry(r, c).to_i64().ok_or_else(|| MatrixError::EntryOverflow {
            row: r,
            col: c,
            value: self.entry(r, c).clone(),
        })
    }

    /// Largest absolute value among the entries.
    pub fn max_entry_abs(&self) -> BigInt {
        self.e.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero)
    }

    pub fn identity(genus: usize) -> Self {
        let n = 2 * genus;
        let mut e = vec![BigInt::zero(); n * n];
        for k in 0..n {
            e[k * n + k] = BigInt::one();
        }
        SymplecticMatrix { genus, e }
    }

    pub fn minus_identity(genus: usize) -> Self {
        let n = 2 * genus;
        let mut e = vec![BigInt::zero(); n * n];
        for k in 0..n {
            e[k * n + k] = -BigInt::one();
        }
        SymplecticMatrix { genus, e }
    }

    /// The standard involution `I = (0, -E; E, 0)`.
    pub fn involution(genus: usize) -> Self {
        let n = 2 * genus;
        let mut e = vec![BigInt::zero(); n * n];
        for k in 0..genus {
            e[k * n + (k + genus)] = -BigInt::one();
            e[(k + genus) * n + k] = BigInt::one();
        }
        SymplecticMatrix { genus, e }
    }

    /// Upper translation `(E, S; 0, E)` for a symmetric integer block `S`
    /// (row-major, length `g^2`).
    pub fn translation(genus: usize, s: &[BigInt]) -> Result<Self, MatrixError> {
        check_symmetric_block(genus, s)?;
        let n = 2 * genus;
        let mut m = Self::identity(genus);
        for r in 0..genus {
            for c in 0..genus {
                m.e[r * n + (c + genus)] = s[r * genus + c].clone();
            }
        }
        Ok(m)
    }

    /// Lower translation `(E, 0; S, E)` for a symmetric integer block `S`.
    pub fn lower_translation(genus: usize, s: &[BigInt]) -> Result<Self, MatrixError> {
        check_symmetric_block(genus, s)?;
        let n = 2 * genus;
        let mut m = Self::identity(genus);
        for r in 0..genus {
            for c in 0..genus {
                m.e[(r + genus) * n + c] = s[r * genus + c].clone();
            }
        }
        Ok(m)
    }

    /// The genus-2 coordinate swap: the symplectic permutation exchanging the
    /// two coordinate axes of the half-space (and `z1` with `z2`).
    pub fn swap_p() -> Self {
        let rows: [[i64; 4]; 4] = [
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ];
        SymplecticMatrix {
            genus: 2,
            e: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        }
    }

    /// Embeds a genus-1 matrix into genus 2 acting on the first coordinate.
    pub fn iota1(m: &SymplecticMatrix) -> Result<Self, MatrixError> {
        if m.genus != 1 {
            return Err(MatrixError::WrongGenus { expected: 1, got: m.genus });
        }
        let (a, b, c, d) = (m.entry(0, 0), m.entry(0, 1), m.entry(1, 0), m.entry(1, 1));
        let z = BigInt::zero;
        let o = BigInt::one;
        let e = vec![
            a.clone(), z(), b.clone(), z(),
            z(), o(), z(), z(),
            c.clone(), z(), d.clone(), z(),
            z(), z(), z(), o(),
        ];
        Ok(SymplecticMatrix { genus: 2, e })
    }

    /// Embeds a genus-1 matrix into genus 2 acting on the second coordinate.
    /// Equals the swap-conjugate of [`Self::iota1`].
    pub fn iota2(m: &SymplecticMatrix) -> Result<Self, MatrixError> {
        if m.genus != 1 {
            return Err(MatrixError::WrongGenus { expected: 1, got: m.genus });
        }
        let (a, b, c, d) = (m.entry(0, 0), m.entry(0, 1), m.entry(1, 0), m.entry(1, 1));
        let z = BigInt::zero;
        let o = BigInt::one;
        let e = vec![
            o(), z(), z(), z(),
            z(), a.clone(), z(), b.clone(),
            z(), z(), o(), z(),
            z(), c.clone(), z(), d.clone(),
        ];
        Ok(SymplecticMatrix { genus: 2, e })
    }

    /// Embeds a genus-1 matrix `m` as the block rotation `(m, 0; 0, m'^-1)`
    /// of genus 2.
    pub fn iota3(m: &SymplecticMatrix) -> Result<Self, MatrixError> {
        if m.genus != 1 {
            return Err(MatrixError::WrongGenus { expected: 1, got: m.genus });
        }
        let u: Vec<BigInt> = vec![
            m.entry(0, 0).clone(),
            m.entry(0, 1).clone(),
            m.entry(1, 0).clone(),
            m.entry(1, 1).clone(),
        ];
        Self::unimodular_embed(2, &u)
    }

    /// The rotation `(U, 0; 0, U'^-1)` for a unimodular integer block `U`.
    pub fn unimodular_embed(genus: usize, u: &[BigInt]) -> Result<Self, MatrixError> {
        let g = genus;
        assert_eq!(u.len(), g * g, "unimodular block has wrong shape");
        let det = big_det(g, u);
        let det_i: i64 = if det == BigInt::one() {
            1
        } else if det == -BigInt::one() {
            -1
        } else {
            return Err(MatrixError::NotUnimodular(det));
        };
        // inverse-transpose via the adjugate: (U^-1)_{rc} = cof_{cr} / det
        let mut inv_t = vec![BigInt::zero(); g * g];
        for r in 0..g {
            for c in 0..g {
                let minor: Vec<BigInt> = (0..g)
                    .filter(|&rr| rr != r)
                    .flat_map(|rr| (0..g).filter(|&cc| cc != c).map(move |cc| (rr, cc)))
                    .map(|(rr, cc)| u[rr * g + cc].clone())
                    .collect();
                let mut cof = big_det(g - 1, &minor);
                if (r + c) % 2 == 1 {
                    cof = -cof;
                }
                // (U'^-1)_{rc} = (U^-1)_{cr} = cof_{rc} / det
                inv_t[r * g + c] = if det_i == 1 { cof } else { -cof };
            }
        }
        let n = 2 * g;
        let mut e = vec![BigInt::zero(); n * n];
        for r in 0..g {
            for c in 0..g {
                e[r * n + c] = u[r * g + c].clone();
                e[(r + g) * n + (c + g)] = inv_t[r * g + c].clone();
            }
        }
        let m = SymplecticMatrix { genus: g, e };
        m.check_symplectic()?;
        Ok(m)
    }

    /// Genus-1 unipotent generators `(1, qx; 0, 1)` and `(1, 0; qx, 1)` of the
    /// level-`q` congruence subgroup.
    pub fn bms_r_generator(q: i64, x: i64, kind: TriangleKind) -> Self {
        let t = BigInt::from(q) * BigInt::from(x);
        let o = BigInt::one;
        let z = BigInt::zero;
        let e = match kind {
            TriangleKind::Upper => vec![o(), t, z(), o()],
            TriangleKind::Lower => vec![o(), z(), t, o()],
        };
        SymplecticMatrix { genus: 1, e }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.genus)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.genus != other.genus {
            return Err(MatrixError::GenusMismatch { left: self.genus, right: other.genus });
        }
        let n = self.dim();
        let mut e = vec![BigInt::zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let x = &self.e[r * n + k];
                if x.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let y = &other.e[k * n + c];
                    if !y.is_zero() {
                        e[r * n + c] += x * y;
                    }
                }
            }
        }
        Ok(SymplecticMatrix { genus: self.genus, e })
    }

    /// Exact inverse via the block formula `M^-1 = (D', -B'; -C', A')`.
    pub fn inverse(&self) -> Self {
        let g = self.genus;
        let n = self.dim();
        let mut e = vec![BigInt::zero(); n * n];
        for r in 0..g {
            for c in 0..g {
                // A^-1-block = D', B-block = -B', C-block = -C', D-block = A'
                e[r * n + c] = self.e[(c + g) * n + (r + g)].clone();
                e[r * n + (c + g)] = -&self.e[c * n + (r + g)];
                e[(r + g) * n + c] = -&self.e[(c + g) * n + r];
                e[(r + g) * n + (c + g)] = self.e[c * n + r].clone();
            }
        }
        SymplecticMatrix { genus: g, e }
    }

    pub fn transpose(&self) -> Result<Self, MatrixError> {
        let n = self.dim();
        let mut e = vec![BigInt::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                e[r * n + c] = self.e[c * n + r].clone();
            }
        }
        // the transpose of a symplectic matrix is symplectic; still validate
        SymplecticMatrix::new(self.genus, e)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.genus);
        for _ in 0..k {
            acc = acc.mul(self).expect("same genus");
        }
        acc
    }

    fn block(&self, row_off: usize, col_off: usize) -> Vec<BigInt> {
        let g = self.genus;
        let n = self.dim();
        let mut out = Vec::with_capacity(g * g);
        for r in 0..g {
            for c in 0..g {
                out.push(self.e[(r + row_off) * n + (c + col_off)].clone());
            }
        }
        out
    }

    pub fn a_block(&self) -> Vec<BigInt> {
        self.block(0, 0)
    }

    pub fn b_block(&self) -> Vec<BigInt> {
        self.block(0, self.genus)
    }

    pub fn c_block(&self) -> Vec<BigInt> {
        self.block(self.genus, 0)
    }

    pub fn d_block(&self) -> Vec<BigInt> {
        self.block(self.genus, self.genus)
    }

    /// Exact value of `det(C i E + D)` as a Gaussian integer. This is the
    /// automorphy factor at the base point `iE` and anchors all argument
    /// continuation exactly.
    pub fn j_base_exact(&self) -> GaussInt {
        let g = self.genus;
        let c = self.c_block();
        let d = self.d_block();
        let m: Vec<GaussInt> = (0..g * g)
            .map(|k| GaussInt::new(d[k].clone(), c[k].clone()))
            .collect();
        gauss_det(g, &m)
    }

    /// `det(CZ + D)` at a general point, in floating point.
    pub fn j_factor(&self, z: &SiegelPoint) -> Result<Complex64, MatrixError> {
        if self.genus != z.genus() {
            return Err(MatrixError::GenusMismatch { left: self.genus, right: z.genus() });
        }
        let g = self.genus;
        let mut q = vec![Complex64::new(0.0, 0.0); g * g];
        let c = self.c_block();
        let d = self.d_block();
        for r in 0..g {
            for col in 0..g {
                let mut acc = Complex64::new(d[r * g + col].to_f64().unwrap_or(f64::NAN), 0.0);
                for k in 0..g {
                    acc += c[r * g + k].to_f64().unwrap_or(f64::NAN) * z.entry(k, col);
                }
                q[r * g + col] = acc;
            }
        }
        Ok(linalg::det(g, &mut q))
    }

    /// The fractional-linear action `Z -> (AZ + B)(CZ + D)^-1`.
    pub fn act(&self, z: &SiegelPoint) -> Result<SiegelPoint, MatrixError> {
        if self.genus != z.genus() {
            return Err(MatrixError::GenusMismatch { left: self.genus, right: z.genus() });
        }
        let g = self.genus;
        let to_c = |x: &BigInt| Complex64::new(x.to_f64().unwrap_or(f64::NAN), 0.0);
        let a = self.a_block();
        let b = self.b_block();
        let c = self.c_block();
        let d = self.d_block();
        let mut w = if c.iter().all(|x| x.is_zero()) {
            // C = 0: the symplectic relation A'D = E makes D the inverse
            // transpose of A, so the image is the exact product (AZ + B) A'
            // and no linear solve is needed; with integer blocks and dyadic
            // entries of Z this path commits no rounding at all, which the
            // theta evaluator relies on for large embedded matrices
            let mut nb = vec![Complex64::new(0.0, 0.0); g * g];
            for r in 0..g {
                for col in 0..g {
                    let mut acc = to_c(&b[r * g + col]);
                    for k in 0..g {
                        acc += to_c(&a[r * g + k]) * z.entry(k, col);
                    }
                    nb[r * g + col] = acc;
                }
            }
            let mut w = vec![Complex64::new(0.0, 0.0); g * g];
            for r in 0..g {
                for col in 0..g {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..g {
                        acc += nb[r * g + k] * to_c(&a[col * g + k]);
                    }
                    w[r * g + col] = acc;
                }
            }
            w
        } else {
            // Q = CZ + D and N = AZ + B, both transposed for the solve
            let mut qt = vec![Complex64::new(0.0, 0.0); g * g];
            let mut nt = vec![Complex64::new(0.0, 0.0); g * g];
            for r in 0..g {
                for col in 0..g {
                    let mut accq = to_c(&d[r * g + col]);
                    let mut accn = to_c(&b[r * g + col]);
                    for k in 0..g {
                        accq += to_c(&c[r * g + k]) * z.entry(k, col);
                        accn += to_c(&a[r * g + k]) * z.entry(k, col);
                    }
                    qt[col * g + r] = accq;
                    nt[col * g + r] = accn;
                }
            }
            // solve Q' W' = N'; then W = (W')'
            linalg::solve(g, &mut qt, &mut nt, g).ok_or(MatrixError::ActSingular)?;
            let mut w = vec![Complex64::new(0.0, 0.0); g * g];
            for r in 0..g {
                for col in 0..g {
                    w[r * g + col] = nt[col * g + r];
                }
            }
            w
        };
        // the exact image is symmetric; large asymmetry means bad input
        let mut dev = 0.0f64;
        let mut scale = 1.0f64;
        for r in 0..g {
            for col in (r + 1)..g {
                dev = dev.max((w[r * g + col] - w[col * g + r]).norm());
                scale = scale.max(w[r * g + col].norm());
            }
        }
        if dev > 1e-9 * scale.max(1.0) {
            return Err(MatrixError::ActAsymmetric { dev });
        }
        for r in 0..g {
            for col in (r + 1)..g {
                let avg = (w[r * g + col] + w[col * g + r]) * 0.5;
                w[r * g + col] = avg;
                w[col * g + r] = avg;
            }
        }
        SiegelPoint::new(g, w)
    }

    /// Whether `M = E (mod q)` entrywise.
    pub fn in_principal_congruence(&self, q: u32) -> bool {
        let n = self.dim();
        let qq = BigInt::from(q);
        for r in 0..n {
            for c in 0..n {
                let mut v = self.e[r * n + c].clone();
                if r == c {
                    v -= BigInt::one();
                }
                if !v.mod_floor(&qq).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Zero-pattern classification of genus-2 parabolics.
    pub fn classify_parabolic(&self) -> Result<ParabolicClass, MatrixError> {
        if self.genus != 2 {
            return Err(MatrixError::WrongGenus { expected: 2, got: self.genus });
        }
        let zero_at = |pat: &[(usize, usize)]| pat.iter().all(|&(r, c)| self.entry(r, c).is_zero());
        let siegel = [(2, 0), (2, 1), (3, 0), (3, 1)];
        let klingen1 = [(0, 1), (2, 1), (3, 0), (3, 1), (3, 2)];
        let klingen2 = [(1, 0), (2, 0), (2, 1), (2, 3), (3, 0)];
        Ok(if zero_at(&siegel) {
            ParabolicClass::Siegel
        } else if zero_at(&klingen1) {
            ParabolicClass::Klingen1
        } else if zero_at(&klingen2) {
            ParabolicClass::Klingen2
        } else {
            ParabolicClass::None
        })
    }

    /// `det D` for a Siegel parabolic `(A, B; 0, D)`; errors when `C != 0`.
    pub fn epsilon(&self) -> Result<BigInt, MatrixError> {
        let g = self.genus;
        if !self.c_block().iter().all(|x| x.is_zero()) {
            return Err(MatrixError::NotSiegelParabolic);
        }
        Ok(big_det(g, &self.d_block()))
    }

    pub fn to_real(&self) -> RealSymplectic {
        RealSymplectic {
            genus: self.genus,
            e: self.e.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }
}

fn check_symmetric_block(genus: usize, s: &[BigInt]) -> Result<(), MatrixError> {
    assert_eq!(s.len(), genus * genus, "translation block has wrong shape");
    for r in 0..genus {
        for c in (r + 1)..genus {
            if s[r * genus + c] != s[c * genus + r] {
                return Err(MatrixError::NotSymmetricBlock { row: r, col: c });
            }
        }
    }
    Ok(())
}

impl fmt::Display for SymplecticMatrix {
    /// Literal format: rows separated by `;`, entries by `,`. Example:
    /// `13,8;8,5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        for r in 0..n {
            if r > 0 {
                write!(f, ";")?;
            }
            for c in 0..n {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.e[r * n + c])?;
            }
        }
        Ok(())
    }
}

impl FromStr for SymplecticMatrix {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rows: Vec<&str> = s.split(';').collect();
        let n = rows.len();
        if n == 0 || n % 2 != 0 {
            return Err(MatrixError::Parse(format!(
                "need an even number of rows, got {n}"
            )));
        }
        let mut e = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != n {
                return Err(MatrixError::Parse(format!(
                    "row {} has {} entries, expected {}",
                    r,
                    cells.len(),
                    n
                )));
            }
            for cell in cells {
                let t = cell.trim();
                let v = BigInt::from_str(t)
                    .map_err(|_| MatrixError::Parse(format!("bad integer literal {t:?}")))?;
                e.push(v);
            }
        }
        SymplecticMatrix::new(n / 2, e)
    }
}

/// A symplectic matrix with floating-point entries, checked at tolerance
/// `1e-9`. Only the structure needed by the real-entry genus-1 table is
/// exposed.
#[derive(Debug, Clone)]
pub struct RealSymplectic {
    genus: usize,
    e: Vec<f64>,
}

impl RealSymplectic {
    pub fn new(genus: usize, entries: Vec<f64>) -> Result<Self, MatrixError> {
        let n = 2 * genus;
        if genus == 0 || entries.len() != n * n {
            return Err(MatrixError::BadShape {
                genus,
                expected: n * n,
                got: entries.len(),
            });
        }
        let m = RealSymplectic { genus, e: entries };
        m.check(1e-9)?;
        Ok(m)
    }

    fn check(&self, tol: f64) -> Result<(), MatrixError> {
        let n = 2 * self.genus;
        let g = self.genus;
        let im = |r: usize, c: usize| -> f64 {
            if r < g {
                -self.e[(r + g) * n + c]
            } else {
                self.e[(r - g) * n + c]
            }
        };
        for r in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.e[k * n + r] * im(k, c);
                }
                let target = if r < g && c == r + g {
                    -1.0
                } else if r >= g && c + g == r {
                    1.0
                } else {
                    0.0
                };
                let dev = (s - target).abs();
                if dev > tol {
                    return Err(MatrixError::NotSymplecticReal { row: r, col: c, dev, tol });
                }
            }
        }
        Ok(())
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.e[r * 2 * self.genus + c]
    }
}

/// A point of the Siegel upper half-space: a complex symmetric `g x g`
/// matrix with positive-definite imaginary part (leading minors checked
/// with tolerance `1e-12`).
#[derive(Debug, Clone)]
pub struct SiegelPoint {
    genus: usize,
    z: Vec<Complex64>,
}

impl SiegelPoint {
    pub fn new(genus: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        let g = genus;
        if g == 0 || entries.len() != g * g {
            return Err(MatrixError::BadShape { genus: g, expected: g * g, got: entries.len() });
        }
        let mut z = entries;
        for r in 0..g {
            for c in (r + 1)..g {
                let dev = (z[r * g + c] - z[c * g + r]).norm();
                if dev > 1e-12 {
                    return Err(MatrixError::PointNotSymmetric { row: r, col: c, dev });
                }
                let avg = (z[r * g + c] + z[c * g + r]) * 0.5;
                z[r * g + c] = avg;
                z[c * g + r] = avg;
            }
        }
        // the imaginary part must be positive definite; thresholds are
        // relative to the form's own scale because legitimate images of the
        // action can be uniformly tiny (det Im MZ = det Im Z / |J|^2). In
        // genus 2 the form is Gauss-reduced first (exact swaps and integer
        // shears), which keeps the determinant well conditioned for points
        // conjugated by large integer matrices whose raw minors cancel
        // catastrophically; a reduced positive form has det >= 3 a c / 4,
        // far above the relative cutoff.
        if g == 2 {
            let (a, b, c) = reduced_binary_im(z[0].im, z[1].im, z[3].im);
            let det = a * c - b * b;
            if a <= 0.0 {
                return Err(MatrixError::NotPositiveDefinite { index: 1, value: a });
            }
            if det <= 1e-12 * a * c {
                return Err(MatrixError::NotPositiveDefinite { index: 2, value: det });
            }
        } else {
            let mut scale = 1.0f64;
            for k in 1..=g {
                let pivot = z[(k - 1) * g + (k - 1)].im;
                if pivot <= 0.0 {
                    return Err(MatrixError::NotPositiveDefinite { index: k, value: pivot });
                }
                scale *= pivot;
                let mut minor = vec![0.0f64; k * k];
                for r in 0..k {
                    for c in 0..k {
                        minor[r * k + c] = z[r * g + c].im;
                    }
                }
                let d = real_det(k, &mut minor);
                // Hadamard: a positive minor is at most the diagonal product
                if d <= 1e-12 * scale {
                    return Err(MatrixError::NotPositiveDefinite { index: k, value: d });
                }
            }
        }
        Ok(SiegelPoint { genus: g, z })
    }

    /// The base point `iE`.
    pub fn base(genus: usize) -> Self {
        let mut z = vec![Complex64::new(0.0, 0.0); genus * genus];
        for k in 0..genus {
            z[k * genus + k] = Complex64::new(0.0, 1.0);
        }
        SiegelPoint { genus, z }
    }

    /// `t * iE` for `t > 0`.
    pub fn scaled_base(genus: usize, t: f64) -> Result<Self, MatrixError> {
        let mut z = vec![Complex64::new(0.0, 0.0); genus * genus];
        for k in 0..genus {
            z[k * genus + k] = Complex64::new(0.0, t);
        }
        SiegelPoint::new(genus, z)
    }

    /// Adds a real symmetric shift (row-major, length `g^2`).
    pub fn with_real_shift(&self, s: &[f64]) -> Result<Self, MatrixError> {
        let g = self.genus;
        assert_eq!(s.len(), g * g, "shift has wrong shape");
        let mut z = self.z.clone();
        for k in 0..g * g {
            z[k] += s[k];
        }
        SiegelPoint::new(g, z)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.z[r * self.genus + c]
    }

    pub(crate) fn raw(&self) -> &[Complex64] {
        &self.z
    }

    /// Straight-line interpolation `(1-t) self + t other`; stays in the
    /// half-space because the half-space is convex.
    pub fn lerp(&self, other: &SiegelPoint, t: f64) -> SiegelPoint {
        debug_assert_eq!(self.genus, other.genus);
        let z = self
            .z
            .iter()
            .zip(other.z.iter())
            .map(|(a, b)| a * (1.0 - t) + b * t)
            .collect();
        SiegelPoint { genus: self.genus, z }
    }
}

fn real_det(n: usize, a: &mut [f64]) -> f64 {
    let mut d = 1.0f64;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for r in (k + 1)..n {
            if a[r * n + k].abs() > best {
                best = a[r * n + k].abs();
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            d = -d;
        }
        let p = a[k * n + k];
        d *= p;
        for r in (k + 1)..n {
            let f = a[r * n + k] / p;
            for c in k..n {
                a[r * n + c] -= f * a[k * n + c];
            }
        }
    }
    d
}

/// Gauss reduction of a real binary quadratic form (a, b; b, c). Swaps put
/// the smaller diagonal entry first and integer shears shrink the off
/// diagonal to |b| <= a / 2, after which a*c - b*b >= 3*a*c / 4 so the
/// determinant test has no cancellation. Every intermediate value is
/// bounded by the largest initial entry, and when the entries are
/// integer-valued floats below 2^53 the arithmetic here is exact.
fn reduced_binary_im(mut a: f64, mut b: f64, mut c: f64) -> (f64, f64, f64) {
    for _ in 0..256 {
        if c < a {
            std::mem::swap(&mut a, &mut c);
        }
        if a <= 0.0 {
            break;
        }
        let k = (b / a).round();
        if k == 0.0 {
            break;
        }
        // row-and-column shear by the integer -k: b -> b - k a,
        // c -> c - 2 k b + k^2 a evaluated as (b - k a) + (b' := b - k a)
        let b1 = b - k * a;
        c = c - k * (b + b1);
        b = b1;
    }
    if c < a {
        std::mem::swap(&mut a, &mut c);
    }
    (a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> SymplecticMatrix {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_formats_literals() {
        let a = m("13,8;8,5");
        assert_eq!(a.genus(), 1);
        assert_eq!(a.to_string(), "13,8;8,5");
        let p = m("0,1,0,0;1,0,0,0;0,0,0,1;0,0,1,0");
        assert_eq!(p, SymplecticMatrix::swap_p());
    }

    #[test]
    fn rejects_non_symplectic() {
        // det = 2
        let err = "2,0;0,1".parse::<SymplecticMatrix>().unwrap_err();
        match err {
            MatrixError::NotSymplectic { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn square_of_pinned_matrix() {
        let a = m("13,8;8,5");
        let sq = a.pow(2);
        assert_eq!(sq, m("233,144;144,89"));
    }

    #[test]
    fn inverse_is_exact() {
        let a = m("13,8;8,5");
        assert!(a.mul(&a.inverse()).unwrap().is_identity());
        let p = SymplecticMatrix::involution(2);
        assert!(p.mul(&p.inverse()).unwrap().is_identity());
    }

    #[test]
    fn act_on_base_point_genus1() {
        // (1,0;1,1) sends i to (1+i)/2
        let a = m("1,0;1,1");
        let z = a.act(&SiegelPoint::base(1)).unwrap();
        let got = z.entry(0, 0);
        assert!((got - Complex64::new(0.5, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn j_factor_examples() {
        // det(iE) = -1 for the genus-2 involution at the base point
        let i2 = SymplecticMatrix::involution(2);
        let j = i2.j_factor(&SiegelPoint::base(2)).unwrap();
        assert!((j - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let exact = i2.j_base_exact();
        assert_eq!(exact, GaussInt::new(BigInt::from(-1), BigInt::from(0)));

        // (0, -E; E, S) = I * T_upper(S) with S = diag(1, 0): det(iE + S) = -1 + i
        let s = [BigInt::from(1), BigInt::from(0), BigInt::from(0), BigInt::from(0)];
        let t = SymplecticMatrix::translation(2, &s).unwrap();
        let mm = SymplecticMatrix::involution(2).mul(&t).unwrap();
        let j2 = mm.j_base_exact();
        assert_eq!(j2, GaussInt::new(BigInt::from(-1), BigInt::from(1)));
    }

    #[test]
    fn embeddings_are_homomorphisms() {
        let a = m("1,1;0,1");
        let b = m("0,-1;1,0");
        for embed in [SymplecticMatrix::iota1, SymplecticMatrix::iota2, SymplecticMatrix::iota3] {
            let lhs = embed(&a.mul(&b).unwrap()).unwrap();
            let rhs = embed(&a).unwrap().mul(&embed(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn iota2_is_swap_conjugate_of_iota1() {
        let a = m("2,1;1,1");
        let p = SymplecticMatrix::swap_p();
        let lhs = SymplecticMatrix::iota2(&a).unwrap();
        let rhs = p.mul(&SymplecticMatrix::iota1(&a).unwrap()).unwrap().mul(&p).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn parabolic_classification() {
        let tr = SymplecticMatrix::translation(
            2,
            &[BigInt::from(1), BigInt::from(2), BigInt::from(2), BigInt::from(3)],
        )
        .unwrap();
        assert_eq!(tr.classify_parabolic().unwrap(), ParabolicClass::Siegel);
        assert_eq!(tr.epsilon().unwrap(), BigInt::one());

        let k1 = SymplecticMatrix::iota1(&m("0,-1;1,0")).unwrap();
        assert_eq!(k1.classify_parabolic().unwrap(), ParabolicClass::Klingen1);
        let k2 = SymplecticMatrix::iota2(&m("0,-1;1,0")).unwrap();
        assert_eq!(k2.classify_parabolic().unwrap(), ParabolicClass::Klingen2);

        assert_eq!(
            SymplecticMatrix::involution(2).classify_parabolic().unwrap(),
            ParabolicClass::None
        );
        assert!(SymplecticMatrix::involution(2).epsilon().is_err());
    }

    #[test]
    fn congruence_membership() {
        let a = m("13,8;8,5"); // = E mod 4 but not mod 8
        assert!(a.in_principal_congruence(4));
        assert!(!a.in_principal_congruence(8));
        assert!(!m("1,1;0,1").in_principal_congruence(4));
        let b = m("5,4;16,13"); // = E mod 4
        assert!(b.in_principal_congruence(4));
        assert!(!b.in_principal_congruence(8));
        // negative entries reduce correctly
        let c = m("1,-4;0,1");
        assert!(c.in_principal_congruence(4));
    }

    #[test]
    fn point_validation() {
        // diag(i, i) fine; asymmetric or non-positive-definite rejected
        assert!(SiegelPoint::base(3).genus() == 3);
        let bad = SiegelPoint::new(
            2,
            vec![
                Complex64::new(0.0, 1.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 1.0),
            ],
        );
        assert!(matches!(bad, Err(MatrixError::PointNotSymmetric { .. })));
        let nd = SiegelPoint::new(
            2,
            vec![
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(0.0, 1.0),
            ],
        );
        assert!(matches!(nd, Err(MatrixError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn real_symplectic_tolerance() {
        let ok = RealSymplectic::new(1, vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(ok.entry(1, 0), 1.0);
        assert!(RealSymplectic::new(1, vec![1.0, 0.0, 1.0, 1.0 + 1e-6]).is_err());
        assert!(RealSymplectic::new(1, vec![1.0, 0.0, 1.0 + 1e-12, 1.0]).is_ok());
    }

    #[test]
    fn unimodular_embed_rejects_non_unit_det() {
        let u = [BigInt::from(2), BigInt::from(0), BigInt::from(0), BigInt::from(1)];
        assert!(matches!(
            SymplecticMatrix::unimodular_embed(2, &u),
            Err(MatrixError::NotUnimodular(_))
        ));
    }
}
