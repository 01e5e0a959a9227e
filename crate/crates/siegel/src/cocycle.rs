//! Continuous arguments of `det(CZ + D)` and the integer cocycle they define.
//!
//! For symplectic `M`, the function `J(M, Z) = det(CZ + D)` never vanishes on
//! the upper half-space, so its argument continues uniquely along paths.
//! `L(M, Z)` is the continuation along the straight segment from the base
//! point `iE` (the half-space is convex), normalized to the principal value
//! at `iE`. The combination
//!
//! ```text
//! w(M, N) = (L(MN, Z) - L(M, NZ) - L(N, Z)) / 2pi
//! ```
//!
//! is an integer independent of `Z`; it is evaluated here at `Z = iE`, where
//! the two outer terms are principal arguments of exact Gaussian integers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::linalg;
use crate::matrix::{GaussInt, MatrixError, SiegelPoint, SymplecticMatrix};

/// Residual bound above which a rounded cocycle value is not trusted.
/// Far above double-precision noise, far below the quantum 1/(2 pi).
pub const INTEGRALITY_GUARD: f64 = 1e-6;

const MAX_DEPTH: usize = 40;
const INITIAL_SEGMENTS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum CocycleError {
    #[error("principal argument of zero is undefined")]
    ZeroArgument,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("argument continuation stalled at depth {depth} (last step {jump:.4} rad)")]
    PathDepthExceeded { depth: usize, jump: f64 },
    #[error("cocycle residual {residual:e} exceeds the integrality guard {guard:e} (raw value {raw})")]
    ResidualGuard { residual: f64, guard: f64, raw: f64 },
}

/// An integer cocycle value together with the numerical evidence behind the
/// rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocycleValue {
    /// The integer `w(M, N)` in the orientation of the defining formula.
    pub w: i64,
    /// Absolute deviation of the raw quotient from `w`. Always below
    /// [`INTEGRALITY_GUARD`]; producing operations error otherwise.
    pub residual: f64,
    /// Number of accepted path segments across all continuations involved.
    pub path_steps: usize,
}

/// A unit complex composition factor for weight-`r` automorphy.
///
/// Writing `B_r(M, Z) = exp(r (log|J(M,Z)| + i L(M,Z)))`, factors compose as
/// `B_r(MN, Z) = B_r(M, NZ) B_r(N, Z) exp(2 pi i r w(M,N))`, so a multiplier
/// system `v` satisfies `v(MN) = v(M) v(N) exp(-2 pi i r w(M,N))`. The factor
/// stored here is that composition factor: `value = exp(2 pi i r defect)`
/// with `defect = -w`. For integral `2 r w` the sign of the exponent is
/// immaterial; for generic real weight it is not, and the composition
/// orientation is the one under which actual multiplier systems multiply.
#[derive(Debug, Clone, Copy)]
pub struct WeightedFactor {
    /// The weight `r`.
    pub weight: f64,
    /// `-w` for the paired cocycle value; `value = exp(2 pi i weight * defect)`.
    pub defect: i64,
    /// Unit-modulus composition factor.
    pub value: Complex64,
    /// The cocycle evaluation the factor came from.
    pub cocycle: CocycleValue,
}

/// Principal argument in `(-pi, pi]`. The boundary convention matters:
/// negative reals map to `+pi`, also when the imaginary part is `-0.0`.
pub fn principal_arg(z: Complex64) -> Result<f64, CocycleError> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(CocycleError::ZeroArgument);
    }
    if z.im == 0.0 {
        return Ok(if z.re > 0.0 { 0.0 } else { PI });
    }
    Ok(z.im.atan2(z.re))
}

/// Principal argument of an exact Gaussian integer; the real-axis cases are
/// decided exactly.
pub(crate) fn arg_of_gauss(g: &GaussInt) -> Result<f64, CocycleError> {
    if g.is_zero() {
        return Err(CocycleError::ZeroArgument);
    }
    if g.im.is_zero() {
        return Ok(if g.re.is_positive() { 0.0 } else { PI });
    }
    let re = g.re.to_f64().unwrap_or(f64::NAN);
    let im = g.im.to_f64().unwrap_or(f64::NAN);
    Ok(im.atan2(re))
}

/// Evaluator of `J(M, Z) = det(CZ + D)` with the blocks flattened once.
struct JEval {
    g: usize,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl JEval {
    fn new(m: &SymplecticMatrix) -> Self {
        let g = m.genus();
        let to = |v: Vec<num_bigint::BigInt>| -> Vec<f64> {
            v.into_iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
        };
        JEval { g, c: to(m.c_block()), d: to(m.d_block()) }
    }

    fn eval_lerp(&self, z0: &SiegelPoint, z1: &SiegelPoint, t: f64) -> Complex64 {
        let g = self.g;
        let r0 = z0.raw();
        let r1 = z1.raw();
        let mut q = vec![Complex64::new(0.0, 0.0); g * g];
        for r in 0..g {
            for c in 0..g {
                let mut acc = Complex64::new(self.d[r * g + c], 0.0);
                for k in 0..g {
                    let zk = r0[k * g + c] * (1.0 - t) + r1[k * g + c] * t;
                    acc += self.c[r * g + k] * zk;
                }
                q[r * g + c] = acc;
            }
        }
        linalg::det(g, &mut q)
    }
}

/// Argument increment over one leg `[z0, z1]`, as a sum of principal
/// arguments of consecutive ratios, refined until each is below `bound`.
fn leg_increment(
    ev: &JEval,
    z0: &SiegelPoint,
    z1: &SiegelPoint,
    bound: f64,
) -> Result<(f64, usize), CocycleError> {
    let mut total = 0.0;
    let mut steps = 0usize;
    let mut t_lo = 0.0;
    let mut phi_lo = ev.eval_lerp(z0, z1, 0.0);
    for k in 1..=INITIAL_SEGMENTS {
        let t_hi = k as f64 / INITIAL_SEGMENTS as f64;
        let phi_hi = ev.eval_lerp(z0, z1, t_hi);
        let (inc, s) = refine(ev, z0, z1, t_lo, phi_lo, t_hi, phi_hi, bound, 0)?;
        total += inc;
        steps += s;
        t_lo = t_hi;
        phi_lo = phi_hi;
    }
    Ok((total, steps))
}

#[allow(clippy::too_many_arguments)]
fn refine(
    ev: &JEval,
    z0: &SiegelPoint,
    z1: &SiegelPoint,
    t_lo: f64,
    phi_lo: Complex64,
    t_hi: f64,
    phi_hi: Complex64,
    bound: f64,
    depth: usize,
) -> Result<(f64, usize), CocycleError> {
    let jump = principal_arg(phi_hi / phi_lo)?;
    if jump.abs() < bound {
        return Ok((jump, 1));
    }
    if depth >= MAX_DEPTH {
        return Err(CocycleError::PathDepthExceeded { depth, jump: jump.abs() });
    }
    let t_mid = 0.5 * (t_lo + t_hi);
    let phi_mid = ev.eval_lerp(z0, z1, t_mid);
    let (a, sa) = refine(ev, z0, z1, t_lo, phi_lo, t_mid, phi_mid, bound, depth + 1)?;
    let (b, sb) = refine(ev, z0, z1, t_mid, phi_mid, t_hi, phi_hi, bound, depth + 1)?;
    Ok((a + b, sa + sb))
}

fn l_value_bounded(
    m: &SymplecticMatrix,
    z: &SiegelPoint,
    bound: f64,
) -> Result<(f64, usize), CocycleError> {
    if m.genus() != z.genus() {
        return Err(MatrixError::GenusMismatch { left: m.genus(), right: z.genus() }.into());
    }
    let start = arg_of_gauss(&m.j_base_exact())?;
    let ev = JEval::new(m);
    let base = SiegelPoint::base(m.genus());
    let (inc, steps) = leg_increment(&ev, &base, z, bound)?;
    Ok((start + inc, steps))
}

/// The continued argument `L(M, Z)` of `J(M, .)` along the straight segment
/// from `iE` to `Z`, starting from the principal value at `iE`.
pub fn l_value(m: &SymplecticMatrix, z: &SiegelPoint) -> Result<f64, CocycleError> {
    l_value_bounded(m, z, FRAC_PI_2).map(|(v, _)| v)
}

/// The same continuation along a polyline `iE -> waypoints... -> Z`. The
/// half-space is simply connected and `J` never vanishes, so the result
/// agrees with [`l_value`]; used as a consistency check.
pub fn l_value_via(
    m: &SymplecticMatrix,
    waypoints: &[SiegelPoint],
    z: &SiegelPoint,
) -> Result<f64, CocycleError> {
    let start = arg_of_gauss(&m.j_base_exact())?;
    let ev = JEval::new(m);
    let base = SiegelPoint::base(m.genus());
    let mut total = start;
    let mut prev = &base;
    for p in waypoints.iter().chain(std::iter::once(z)) {
        let (inc, _) = leg_increment(&ev, prev, p, FRAC_PI_2)?;
        total += inc;
        prev = p;
    }
    Ok(total)
}

/// The integer cocycle `w(M, N)`, evaluated at the base point `iE` where the
/// outer terms are principal arguments of exact Gaussian integers.
pub fn w_cocycle(m: &SymplecticMatrix, n: &SymplecticMatrix) -> Result<CocycleValue, CocycleError> {
    let mn = m.mul(n)?;
    let arg_mn = arg_of_gauss(&mn.j_base_exact())?;
    let arg_n = arg_of_gauss(&n.j_base_exact())?;
    let nz = n.act(&SiegelPoint::base(m.genus()))?;
    let mut last = (f64::INFINITY, 0.0);
    for bound in [FRAC_PI_2, FRAC_PI_8] {
        let (l_m, steps) = l_value_bounded(m, &nz, bound)?;
        let raw = (arg_mn - l_m - arg_n) / (2.0 * PI);
        let w = raw.round();
        let residual = (raw - w).abs();
        if residual < INTEGRALITY_GUARD {
            return Ok(CocycleValue { w: w as i64, residual, path_steps: steps });
        }
        last = (residual, raw);
    }
    Err(CocycleError::ResidualGuard { residual: last.0, guard: INTEGRALITY_GUARD, raw: last.1 })
}

/// `w(M, N)` computed at an arbitrary base point. The value does not depend
/// on the base point; this exists to test exactly that.
pub fn w_cocycle_at(
    m: &SymplecticMatrix,
    n: &SymplecticMatrix,
    base: &SiegelPoint,
) -> Result<CocycleValue, CocycleError> {
    let mn = m.mul(n)?;
    let nb = n.act(base)?;
    let mut last = (f64::INFINITY, 0.0);
    for bound in [FRAC_PI_2, FRAC_PI_8] {
        let (l_mn, s1) = l_value_bounded(&mn, base, bound)?;
        let (l_m, s2) = l_value_bounded(m, &nb, bound)?;
        let (l_n, s3) = l_value_bounded(n, base, bound)?;
        let raw = (l_mn - l_m - l_n) / (2.0 * PI);
        let w = raw.round();
        let residual = (raw - w).abs();
        if residual < INTEGRALITY_GUARD {
            return Ok(CocycleValue { w: w as i64, residual, path_steps: s1 + s2 + s3 });
        }
        last = (residual, raw);
    }
    Err(CocycleError::ResidualGuard { residual: last.0, guard: INTEGRALITY_GUARD, raw: last.1 })
}

/// The weight-`r` composition factor `exp(-2 pi i r w(M, N))`.
/// See [`WeightedFactor`] for the orientation convention.
pub fn sigma_factor(
    r: f64,
    m: &SymplecticMatrix,
    n: &SymplecticMatrix,
) -> Result<WeightedFactor, CocycleError> {
    let cocycle = w_cocycle(m, n)?;
    let defect = -cocycle.w;
    let value = Complex64::from_polar(1.0, 2.0 * PI * r * defect as f64);
    Ok(WeightedFactor { weight: r, defect, value, cocycle })
}

/// The two sides of the cocycle identity
/// `w(M1 M2, M3) + w(M1, M2) = w(M1, M2 M3) + w(M2, M3)`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityCheck {
    pub w_prod_left: CocycleValue,
    pub w_inner_left: CocycleValue,
    pub w_prod_right: CocycleValue,
    pub w_inner_right: CocycleValue,
    pub holds: bool,
}

pub fn cocycle_identity_check(
    m1: &SymplecticMatrix,
    m2: &SymplecticMatrix,
    m3: &SymplecticMatrix,
) -> Result<IdentityCheck, CocycleError> {
    let m12 = m1.mul(m2)?;
    let m23 = m2.mul(m3)?;
    let w_prod_left = w_cocycle(&m12, m3)?;
    let w_inner_left = w_cocycle(m1, m2)?;
    let w_prod_right = w_cocycle(m1, &m23)?;
    let w_inner_right = w_cocycle(m2, m3)?;
    let holds = w_prod_left.w + w_inner_left.w == w_prod_right.w + w_inner_right.w;
    Ok(IdentityCheck { w_prod_left, w_inner_left, w_prod_right, w_inner_right, holds })
}
