//! Concrete multiplier systems and the series they come from.
//!
//! Two constructions live here:
//!
//! * the theta series, a weight-1/2 form on the theta group, whose
//!   multiplier is evaluated numerically from the quotient
//!   `theta(MZ) / (J^(1/2) theta(Z))`;
//! * the discriminant-based system of arbitrary real weight in genus 1,
//!   built from a continuous branch of `log Delta` and the integer `d(M)`
//!   it attaches to each matrix.
//!
//! The half power of the automorphy factor is always
//! `exp(1/2 (log|J| + i L(M, Z)))` with the continued argument, never a
//! principal square root of the value.
//!
//! Exponent convention. The series is summed as `exp(pi i n'Zn)` by
//! default. With the doubled exponent `exp(2 pi i n'Zn)` every integral
//! translation fixes theta term by term, and the quotient above fails to be
//! independent of `Z` on the theta group; the halved exponent is the one
//! that produces a multiplier system. [`verified_exponent`] reproduces that
//! experiment, and every entry point taking a [`ThetaExponent`] lets the
//! caller pick explicitly.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::cocycle::{self, CocycleError};
use crate::matrix::{MatrixError, SiegelPoint, SymplecticMatrix};
use num_bigint::BigInt;
use num_traits::Zero;

/// Absolute tail budget for all series truncations.
pub const SERIES_TAIL: f64 = 1e-14;
/// Largest lattice radius the theta summation will attempt.
pub const RADIUS_CAP: usize = 4000;
/// Default tolerance for multiplier relation checks.
pub const RELATION_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum FormsError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("expected a genus-1 point or matrix, got genus {0}")]
    WrongGenus(usize),
    #[error("imaginary part admits no positive lower bound for the tail estimate")]
    NoDecayBound,
    #[error("truncation radius {given} is insufficient, need {needed}")]
    InsufficientRadius { needed: usize, given: usize },
    #[error("required lattice radius {needed} exceeds the cap {cap}")]
    RadiusCap { needed: usize, cap: usize },
    #[error("term budget {given} is insufficient, need {needed}")]
    TermBudget { needed: usize, given: usize },
    #[error("quotient is not an integer within guard: residual {residual:.3e}")]
    NonIntegral { residual: f64 },
    #[error("matrix is not in the theta group")]
    NotThetaGroup,
    #[error("multiplier deviates across sample points by {deviation:.3e}")]
    DeviationGuard { deviation: f64 },
    #[error("need at least {needed} sample points")]
    TooFewSamples { needed: usize },
}

/// Exponent convention for the theta series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaExponent {
    /// `theta(Z) = sum exp(pi i n'Zn)`; the convention under which the
    /// weight-1/2 multiplier exists on the theta group.
    #[default]
    Pi,
    /// `theta(Z) = sum exp(2 pi i n'Zn)`; invariant under all integral
    /// translations, but the multiplier quotient is not Z-independent.
    TwoPi,
}

impl ThetaExponent {
    fn rate(self) -> f64 {
        match self {
            ThetaExponent::Pi => PI,
            ThetaExponent::TwoPi => 2.0 * PI,
        }
    }
}

/// A planned lattice cutoff `|n_i| <= radius` with its certified tail.
#[derive(Debug, Clone, Copy)]
pub struct SeriesTruncation {
    pub radius: usize,
    /// Upper bound on the absolute value of everything outside the box.
    pub tail_bound: f64,
}

impl SeriesTruncation {
    /// A cutoff chosen by the caller; the tail is certified at use time.
    pub fn with_radius(radius: usize) -> Self {
        SeriesTruncation { radius, tail_bound: f64::INFINITY }
    }
}

/// Numerical evaluation of a multiplier value across sample points.
#[derive(Debug, Clone, Copy)]
pub struct MultiplierEvaluation {
    /// The unit-modulus multiplier.
    pub value: Complex64,
    /// Max pairwise distance of the raw quotient across the samples.
    pub deviation: f64,
    /// `(log|J|, L)` of the automorphy factor at the first sample point.
    pub branch_log: (f64, f64),
}

// ---------------------------------------------------------------------------
// theta series

/// `sum_{n} exp(w n²)` majorant pieces: tail of a one-dimensional Gaussian
/// sum beyond `n`, and the full sum. `beta` is the decay rate in
/// `exp(-beta n²)`.
fn gauss_line_tail(beta: f64, n: usize) -> f64 {
    // sum_{k>n} e^{-beta k^2} <= e^{-beta (n+1)^2} / (1 - e^{-beta (2n+3)})
    let first = (-beta * ((n + 1) * (n + 1)) as f64).exp();
    let ratio = (-beta * (2 * n + 3) as f64).exp();
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    2.0 * first / (1.0 - ratio)
}

fn gauss_line_full(beta: f64, n: usize) -> f64 {
    let mut s = 1.0;
    for k in 1..=n {
        s += 2.0 * (-beta * (k * k) as f64).exp();
    }
    s + gauss_line_tail(beta, n)
}

/// Smallest radius with `gauss_line_tail < budget`, or `None` past the cap.
fn radius_for(beta: f64, budget: f64) -> Option<usize> {
    if beta <= 0.0 {
        return None;
    }
    let mut n = (2.0 * f64::ln(1.0 / budget) / beta).sqrt().ceil() as usize;
    n = n.max(1).min(RADIUS_CAP);
    while gauss_line_tail(beta, n) >= budget {
        if n >= RADIUS_CAP {
            return None;
        }
        n += 1;
    }
    // shrink back to the minimum
    while n > 1 && gauss_line_tail(beta, n - 1) < budget {
        n -= 1;
    }
    Some(n)
}

/// Unimodular reduction of a positive binary form. Returns the reduced
/// complex matrix `U'ZU` (theta is invariant under the re-indexing
/// `n -> Un`) with `Im` satisfying `0 < a <= c`, `|b| <= a/2`.
fn reduce_binary(z: &[Complex64]) -> [Complex64; 4] {
    let mut m = [z[0], z[1], z[2], z[3]];
    // U accumulates implicitly: we only need the transformed matrix
    for _ in 0..256 {
        let a = m[0].im;
        let b = m[1].im;
        let c = m[3].im;
        if a > c {
            // swap the two axes: U = (0,1;1,0), U'MU flips diagonal
            m = [m[3], m[1], m[2], m[0]];
            continue;
        }
        let k = (b / a).round();
        if k != 0.0 {
            // shear n2 -> n2 - k n1: column op then row op
            let kc = Complex64::new(k, 0.0);
            // M <- S' M S with S = (1, -k; 0, 1)
            let m00 = m[0];
            let m01 = m[1] - m00 * kc;
            let m11 = m[3] - m[1] * kc - kc * (m[1] - m00 * kc);
            m = [m00, m01, m01, m11];
            continue;
        }
        break;
    }
    m
}

/// Plan a truncation achieving the standard tail budget at `z`.
pub fn plan_truncation(
    exponent: ThetaExponent,
    z: &SiegelPoint,
) -> Result<SeriesTruncation, FormsError> {
    let (radii, tail) = plan_axes(exponent, z)?;
    Ok(SeriesTruncation { radius: radii.iter().copied().max().unwrap_or(1), tail_bound: tail })
}

/// Per-axis radii and the certified total tail bound.
fn plan_axes(
    exponent: ThetaExponent,
    z: &SiegelPoint,
) -> Result<(Vec<usize>, f64), FormsError> {
    let g = z.genus();
    let rate = exponent.rate();
    // per-axis quadratic lower bounds q(n) >= sum beta_i n_i^2 / rate
    let betas: Vec<f64> = match g {
        1 => vec![rate * z.entry(0, 0).im],
        2 => {
            let r = reduce_binary(z.raw());
            // reduced: q(n) >= (a n1^2 + c n2^2) / 2
            vec![rate * r[0].im / 2.0, rate * r[3].im / 2.0]
        }
        _ => {
            // Gershgorin lower bound on the least eigenvalue of Im Z
            let mut lam = f64::INFINITY;
            for i in 0..g {
                let mut row = z.entry(i, i).im;
                for j in 0..g {
                    if j != i {
                        row -= z.entry(i, j).im.abs();
                    }
                }
                lam = lam.min(row);
            }
            if lam <= 0.0 {
                return Err(FormsError::NoDecayBound);
            }
            vec![rate * lam; g]
        }
    };
    if betas.iter().any(|&b| b <= 0.0) {
        return Err(FormsError::NoDecayBound);
    }
    let per_axis_budget = SERIES_TAIL / g as f64;
    let mut radii = Vec::with_capacity(g);
    for &beta in &betas {
        // the other axes contribute at most their full line sums
        let others: f64 = betas
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != radii.len())
            .map(|(_, &b)| gauss_line_full(b, RADIUS_CAP.min(64)))
            .product();
        let budget = per_axis_budget / others.max(1.0);
        let n = radius_for(beta, budget)
            .ok_or(FormsError::RadiusCap { needed: RADIUS_CAP + 1, cap: RADIUS_CAP })?;
        radii.push(n);
    }
    // total tail: union bound over the per-axis overshoots
    let mut tail = 0.0;
    for (i, &beta) in betas.iter().enumerate() {
        let mut piece = gauss_line_tail(beta, radii[i]);
        for (j, &b) in betas.iter().enumerate() {
            if j != i {
                piece *= gauss_line_full(b, radii[j]);
            }
        }
        tail += piece;
    }
    Ok((radii, tail))
}

/// Truncated theta series under the default exponent convention.
pub fn theta_value(z: &SiegelPoint, trunc: &SeriesTruncation) -> Result<Complex64, FormsError> {
    theta_value_with(ThetaExponent::default(), z, trunc)
}

/// Shift the real part into the unit box by an integral symmetric matrix
/// with even diagonal; the series is exactly invariant under such shifts.
/// For dyadic entries the subtraction is exact, so huge real parts coming
/// from conjugation by large integer matrices cost no phase precision.
fn reduce_real_shift(g: usize, z: &mut [Complex64]) {
    for r in 0..g {
        for c in 0..g {
            let re = z[r * g + c].re;
            let k = if r == c { 2.0 * (re / 2.0).round() } else { re.round() };
            if k != 0.0 {
                z[r * g + c].re = re - k;
            }
        }
    }
}

/// Truncated theta series under an explicit exponent convention.
///
/// The requested radius is validated against the decay of `Im Z`; if it
/// cannot push the tail below the standard budget the call fails rather
/// than return silently degraded digits.
pub fn theta_value_with(
    exponent: ThetaExponent,
    z: &SiegelPoint,
    trunc: &SeriesTruncation,
) -> Result<Complex64, FormsError> {
    let (radii, _) = plan_axes(exponent, z)?;
    let needed = radii.iter().copied().max().unwrap_or(1);
    if needed > trunc.radius {
        return Err(FormsError::InsufficientRadius { needed, given: trunc.radius });
    }
    let g = z.genus();
    // reduce first in genus 2: same value, much smaller box at skew points
    let mut work: Vec<Complex64> =
        if g == 2 { reduce_binary(z.raw()).to_vec() } else { z.raw().to_vec() };
    reduce_real_shift(g, &mut work);
    let rate = exponent.rate();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut idx = vec![0i64; g];
    let bounds: Vec<i64> = radii.iter().map(|&n| n as i64).collect();
    for i in 0..g {
        idx[i] = -bounds[i];
    }
    loop {
        // q = n' Z n
        let mut q = Complex64::new(0.0, 0.0);
        for r in 0..g {
            for c in 0..g {
                q += work[r * g + c] * (idx[r] * idx[c]) as f64;
            }
        }
        // exp(i rate q) = exp(-rate Im q) * cis(rate Re q)
        sum += Complex64::from_polar((-rate * q.im).exp(), rate * q.re);
        // advance the odometer
        let mut k = 0;
        loop {
            if k == g {
                return Ok(sum);
            }
            idx[k] += 1;
            if idx[k] <= bounds[k] {
                break;
            }
            idx[k] = -bounds[k];
            k += 1;
        }
    }
}

/// Whether `A B'` and `C D'` both have even diagonal.
pub fn is_theta_group(m: &SymplecticMatrix) -> bool {
    let g = m.genus();
    let two = BigInt::from(2);
    for (x, y) in [(m.a_block(), m.b_block()), (m.c_block(), m.d_block())] {
        for r in 0..g {
            let mut diag = BigInt::zero();
            for k in 0..g {
                diag += &x[r * g + k] * &y[r * g + k];
            }
            if !(&diag % &two).is_zero() {
                return false;
            }
        }
    }
    true
}

/// The documented fixed sample points for Z-independence tests.
pub fn default_samples(genus: usize) -> Vec<SiegelPoint> {
    let base = SiegelPoint::base(genus);
    let mut s0 = vec![0.0; genus * genus];
    let mut s1 = vec![0.0; genus * genus];
    for r in 0..genus {
        for c in 0..genus {
            if r == c {
                s0[r * genus + c] = 0.5;
                s1[r * genus + c] = 0.3;
            } else {
                s0[r * genus + c] = 0.25;
                s1[r * genus + c] = -0.2;
            }
        }
    }
    vec![
        base.clone(),
        SiegelPoint::scaled_base(genus, 2.0).unwrap(),
        SiegelPoint::scaled_base(genus, 1.5).unwrap(),
        base.with_real_shift(&s0).unwrap(),
        SiegelPoint::scaled_base(genus, 1.25).unwrap().with_real_shift(&s1).unwrap(),
    ]
}

/// Sample points adapted to a genus-1 matrix: near the pole `-d/c` of the
/// action both `z` and `Mz` keep imaginary part of order `1/|c|`, which a
/// fixed sample list cannot guarantee.
pub fn adapted_samples(m: &SymplecticMatrix) -> Result<Vec<SiegelPoint>, FormsError> {
    if m.genus() != 1 {
        return Err(FormsError::WrongGenus(m.genus()));
    }
    let c = m.entry_i64(1, 0)?;
    let d = m.entry_i64(1, 1)?;
    let mk = |re: f64, im: f64| {
        SiegelPoint::new(1, vec![Complex64::new(re, im)]).map_err(FormsError::from)
    };
    if c == 0 {
        return Ok(vec![mk(0.0, 1.0)?, mk(0.0, 2.0)?, mk(0.3, 1.0)?]);
    }
    let x = -(d as f64) / (c as f64);
    let s = c.unsigned_abs() as f64;
    Ok(vec![mk(x, 0.7 / s)?, mk(x, 1.0 / s)?, mk(x, 1.4 / s)?])
}

fn half_power_factor(m: &SymplecticMatrix, z: &SiegelPoint) -> Result<(f64, f64), FormsError> {
    let j = m.j_factor(z)?;
    let l = cocycle::l_value(m, z)?;
    Ok((j.norm().ln(), l))
}

fn theta_quotients(
    exponent: ThetaExponent,
    m: &SymplecticMatrix,
    samples: &[SiegelPoint],
) -> Result<MultiplierEvaluation, FormsError> {
    if samples.is_empty() {
        return Err(FormsError::TooFewSamples { needed: 1 });
    }
    let mut values = Vec::with_capacity(samples.len());
    let mut branch = (0.0, 0.0);
    for (i, z) in samples.iter().enumerate() {
        let mz = m.act(z)?;
        let tz = theta_value_with(exponent, z, &plan_truncation(exponent, z)?)?;
        let tmz = theta_value_with(exponent, &mz, &plan_truncation(exponent, &mz)?)?;
        let (lm, la) = half_power_factor(m, z)?;
        if i == 0 {
            branch = (lm, la);
        }
        let half = Complex64::from_polar((0.5 * lm).exp(), 0.5 * la);
        values.push(tmz / (half * tz));
    }
    let mut deviation: f64 = 0.0;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            deviation = deviation.max((values[i] - values[j]).norm());
        }
    }
    let mean = values.iter().sum::<Complex64>() / values.len() as f64;
    let value = mean / mean.norm();
    Ok(MultiplierEvaluation { value, deviation, branch_log: branch })
}

/// Weight-1/2 theta multiplier under the default exponent convention.
///
/// Fails if `M` is outside the theta group or if the quotient varies
/// across the sample points beyond the relation tolerance; a deviation
/// there signals a branch or convention error, not a rounding artifact.
pub fn theta_multiplier(
    m: &SymplecticMatrix,
    samples: &[SiegelPoint],
) -> Result<MultiplierEvaluation, FormsError> {
    if !is_theta_group(m) {
        return Err(FormsError::NotThetaGroup);
    }
    let ev = theta_quotients(ThetaExponent::default(), m, samples)?;
    if ev.deviation >= RELATION_TOL {
        return Err(FormsError::DeviationGuard { deviation: ev.deviation });
    }
    Ok(ev)
}

/// The same quotient without the deviation guard, under any convention;
/// this is the instrument for the convention experiment.
pub fn theta_multiplier_with(
    exponent: ThetaExponent,
    m: &SymplecticMatrix,
    samples: &[SiegelPoint],
) -> Result<MultiplierEvaluation, FormsError> {
    if !is_theta_group(m) {
        return Err(FormsError::NotThetaGroup);
    }
    theta_quotients(exponent, m, samples)
}

/// Decide the exponent convention numerically: evaluate the multiplier
/// quotient on theta-group matrices that mix all generator kinds and
/// return the convention whose quotient is Z-independent.
pub fn verified_exponent() -> Result<ThetaExponent, FormsError> {
    let words: Vec<SymplecticMatrix> = {
        let i1: SymplecticMatrix = "0,-1;1,0".parse().unwrap();
        let u: SymplecticMatrix = "1,1;0,1".parse().unwrap();
        let emb1 = SymplecticMatrix::iota1(&i1).unwrap();
        let emb3 = SymplecticMatrix::iota3(&u).unwrap();
        let tr = SymplecticMatrix::translation(
            2,
            &[BigInt::from(2), BigInt::from(1), BigInt::from(1), BigInt::from(0)],
        )
        .unwrap();
        vec![
            emb1.clone(),
            emb1.mul(&tr).unwrap(),
            tr.mul(&emb3).unwrap().mul(&emb1).unwrap(),
            SymplecticMatrix::involution(2).mul(&tr).unwrap(),
        ]
    };
    let samples = default_samples(2);
    let mut best = None;
    for exponent in [ThetaExponent::Pi, ThetaExponent::TwoPi] {
        let mut worst: f64 = 0.0;
        for m in &words {
            worst = worst.max(theta_multiplier_with(exponent, m, &samples)?.deviation);
        }
        if worst < RELATION_TOL {
            best = Some(exponent);
            break;
        }
    }
    best.ok_or(FormsError::DeviationGuard { deviation: f64::NAN })
}

// ---------------------------------------------------------------------------
// discriminant branch and the Rademacher integer

/// Terms needed for the `log Delta` series tail at `Im z = y`.
fn delta_terms_needed(y: f64) -> usize {
    // term n contributes about 24 e^{-2 pi n y}; solve for the budget
    let t = (f64::ln(48.0 / SERIES_TAIL) / (2.0 * PI * y)).ceil() as usize;
    t.max(60) + 10
}

/// Continuous branch of `log Delta`: `2 pi i z + 24 sum log(1 - q^n)` with
/// principal logs. Each summand stays in the right half-plane, so the sum
/// itself is the continuous branch.
pub fn delta_log(z: &SiegelPoint, terms: usize) -> Result<Complex64, FormsError> {
    if z.genus() != 1 {
        return Err(FormsError::WrongGenus(z.genus()));
    }
    let zz = z.entry(0, 0);
    let needed = delta_terms_needed(zz.im);
    if terms < needed {
        return Err(FormsError::TermBudget { needed, given: terms });
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut acc = two_pi_i * zz;
    for n in 1..=needed {
        let q_n = (two_pi_i * zz * n as f64).exp();
        acc += 24.0 * (Complex64::new(1.0, 0.0) - q_n).ln();
    }
    Ok(acc)
}

/// Default adequate term budget for `delta_log` at `z`.
pub fn delta_terms_for(z: &SiegelPoint) -> Result<usize, FormsError> {
    if z.genus() != 1 {
        return Err(FormsError::WrongGenus(z.genus()));
    }
    Ok(delta_terms_needed(z.entry(0, 0).im))
}

/// Per-sample raw values of the branch defect
/// `(log Delta(Mz) - log Delta(z) - 12 (log|J| + i L)) / 2 pi i`.
fn rademacher_raw(m: &SymplecticMatrix) -> Result<Vec<Complex64>, FormsError> {
    if m.genus() != 1 {
        return Err(FormsError::WrongGenus(m.genus()));
    }
    let samples = adapted_samples(m)?;
    let mut out = Vec::with_capacity(samples.len());
    for z in &samples {
        let mz = m.act(z)?;
        let top = delta_log(&mz, delta_terms_for(&mz)?)?;
        let bottom = delta_log(z, delta_terms_for(z)?)?;
        let (lm, la) = half_power_factor(m, z)?;
        let num = top - bottom - 12.0 * Complex64::new(lm, la);
        // divide by 2 pi i
        out.push(Complex64::new(num.im, -num.re) / (2.0 * PI));
    }
    Ok(out)
}

/// The integer `d(M)` in
/// `log Delta(Mz) = log Delta(z) + 12 (log|J(M,z)| + i L(M,z)) + 2 pi i d(M)`
/// with `L` the continued argument: the z-independent integer value of the
/// branch defect above, checked at three sample points.
pub fn rademacher_integer(m: &SymplecticMatrix) -> Result<i64, FormsError> {
    let raw = rademacher_raw(m)?;
    let mean = raw.iter().map(|v| v.re).sum::<f64>() / raw.len() as f64;
    let d = mean.round();
    let mut residual: f64 = 0.0;
    for v in &raw {
        residual = residual.max((v.re - d).abs()).max(v.im.abs());
    }
    if residual > 1e-6 {
        return Err(FormsError::NonIntegral { residual });
    }
    Ok(d as i64)
}

/// The weight-`r` discriminant multiplier `v_r(M) = exp((r/12) 2 pi i d(M))`.
pub fn delta_multiplier(r: f64, m: &SymplecticMatrix) -> Result<MultiplierEvaluation, FormsError> {
    let raw = rademacher_raw(m)?;
    let d = rademacher_integer(m)?;
    let angle = |x: f64| 2.0 * PI * r / 12.0 * x;
    let value = Complex64::from_polar(1.0, angle(d as f64));
    let vals: Vec<Complex64> =
        raw.iter().map(|v| Complex64::from_polar(1.0, angle(v.re))).collect();
    let mut deviation: f64 = 0.0;
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            deviation = deviation.max((vals[i] - vals[j]).norm());
        }
    }
    let z0 = &adapted_samples(m)?[0];
    let branch_log = half_power_factor(m, z0)?;
    Ok(MultiplierEvaluation { value, deviation, branch_log })
}

/// Outcome of checking `v(MN) = v(M) v(N) sigma_r(M, N)` over pairs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RelationReport {
    pub pairs_checked: usize,
    pub worst_deviation: f64,
    pub worst_pair: Option<(String, String)>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check the multiplier relation for an arbitrary evaluator.
pub fn verify_multiplier_relation<F>(
    evaluator: F,
    r: f64,
    pairs: &[(SymplecticMatrix, SymplecticMatrix)],
    tolerance: f64,
) -> Result<RelationReport, FormsError>
where
    F: Fn(&SymplecticMatrix) -> Result<Complex64, FormsError>,
{
    let mut worst: f64 = 0.0;
    let mut worst_pair = None;
    for (m, n) in pairs {
        let mn = m.mul(n)?;
        let v_mn = evaluator(&mn)?;
        let v_m = evaluator(m)?;
        let v_n = evaluator(n)?;
        let sigma = cocycle::sigma_factor(r, m, n)?.value;
        let dev = (v_mn - v_m * v_n * sigma).norm();
        if dev > worst {
            worst = dev;
            worst_pair = Some((m.to_string(), n.to_string()));
        }
    }
    Ok(RelationReport {
        pairs_checked: pairs.len(),
        worst_deviation: worst,
        worst_pair,
        tolerance,
        pass: worst < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(re: f64, im: f64) -> SiegelPoint {
        SiegelPoint::new(1, vec![Complex64::new(re, im)]).unwrap()
    }

    fn m1(s: &str) -> SymplecticMatrix {
        s.parse().unwrap()
    }

    #[test]
    fn theta_pinned_values_both_conventions() {
        let i = p1(0.0, 1.0);
        let trunc = plan_truncation(ThetaExponent::Pi, &i).unwrap();
        assert!(trunc.tail_bound < SERIES_TAIL);
        let v = theta_value(&i, &trunc).unwrap();
        // sum exp(-pi n^2) = pi^(1/4) / Gamma(3/4)
        assert!((v.re - 1.0864348112).abs() < 1e-8, "got {}", v.re);
        assert!(v.im.abs() < 1e-12);

        let trunc2 = plan_truncation(ThetaExponent::TwoPi, &i).unwrap();
        let v2 = theta_value_with(ThetaExponent::TwoPi, &i, &trunc2).unwrap();
        // 1 + 2 e^{-2 pi} + 2 e^{-8 pi} + ...
        assert!((v2.re - 1.0037348855).abs() < 1e-8, "got {}", v2.re);
    }

    #[test]
    fn theta_diagonal_genus2_factorizes() {
        for exponent in [ThetaExponent::Pi, ThetaExponent::TwoPi] {
            let z1 = p1(0.0, 1.0);
            let z2 = SiegelPoint::base(2);
            let a = theta_value_with(exponent, &z1, &plan_truncation(exponent, &z1).unwrap())
                .unwrap();
            let b = theta_value_with(exponent, &z2, &plan_truncation(exponent, &z2).unwrap())
                .unwrap();
            assert!((b - a * a).norm() < 1e-12);
        }
    }

    #[test]
    fn theta_huge_imaginary_part_is_one() {
        let z = p1(0.25, 40.0);
        let v = theta_value(&z, &plan_truncation(ThetaExponent::Pi, &z).unwrap()).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn theta_rejects_insufficient_radius() {
        let z = p1(0.0, 0.01);
        let err = theta_value(&z, &SeriesTruncation::with_radius(3)).unwrap_err();
        assert!(matches!(err, FormsError::InsufficientRadius { .. }));
    }

    #[test]
    fn theta_reduction_matches_direct_sum_on_skew_point() {
        // strongly correlated imaginary part; reduction shrinks the box
        let z = SiegelPoint::new(
            2,
            vec![
                Complex64::new(0.1, 1.0),
                Complex64::new(0.0, 0.93),
                Complex64::new(0.0, 0.93),
                Complex64::new(-0.2, 1.0),
            ],
        )
        .unwrap();
        let v = theta_value(&z, &plan_truncation(ThetaExponent::Pi, &z).unwrap()).unwrap();
        // direct summation over a generous fixed box, no reduction
        let mut direct = Complex64::new(0.0, 0.0);
        for n1 in -60i64..=60 {
            for n2 in -60i64..=60 {
                let q = z.entry(0, 0) * (n1 * n1) as f64
                    + z.entry(0, 1) * (2 * n1 * n2) as f64
                    + z.entry(1, 1) * (n2 * n2) as f64;
                direct += Complex64::from_polar((-PI * q.im).exp(), PI * q.re);
            }
        }
        assert!((v - direct).norm() < 1e-11, "reduced {v} direct {direct}");
    }

    #[test]
    fn theta_group_membership_examples() {
        assert!(is_theta_group(&SymplecticMatrix::identity(2)));
        let i1 = SymplecticMatrix::iota1(&m1("0,-1;1,0")).unwrap();
        assert!(is_theta_group(&i1));
        let odd = SymplecticMatrix::translation(2, &[1, 0, 0, 0].map(BigInt::from)).unwrap();
        assert!(!is_theta_group(&odd));
        let even =
            SymplecticMatrix::translation(2, &[2, 1, 1, 0].map(BigInt::from)).unwrap();
        assert!(is_theta_group(&even));
    }

    #[test]
    fn theta_multiplier_trivial_cases() {
        let samples = default_samples(2);
        let one = theta_multiplier(&SymplecticMatrix::identity(2), &samples).unwrap();
        assert!((one.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(one.deviation < 1e-12);

        let even =
            SymplecticMatrix::translation(2, &[2, 1, 1, 0].map(BigInt::from)).unwrap();
        let ev = theta_multiplier(&even, &samples).unwrap();
        assert!((ev.value - Complex64::new(1.0, 0.0)).norm() < 1e-9);

        let u = SymplecticMatrix::iota3(&m1("1,1;0,1")).unwrap();
        let ev = theta_multiplier(&u, &samples).unwrap();
        assert!((ev.value - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn convention_experiment_selects_halved_exponent() {
        assert_eq!(verified_exponent().unwrap(), ThetaExponent::Pi);

        // and the doubled exponent visibly fails Z-independence
        let i1 = SymplecticMatrix::iota1(&m1("0,-1;1,0")).unwrap();
        let tr = SymplecticMatrix::translation(2, &[2, 1, 1, 0].map(BigInt::from)).unwrap();
        let m = i1.mul(&tr).unwrap();
        let ev =
            theta_multiplier_with(ThetaExponent::TwoPi, &m, &default_samples(2)).unwrap();
        assert!(ev.deviation > 1e-3, "doubled exponent deviation {}", ev.deviation);
    }

    #[test]
    fn delta_log_pinned_values() {
        let zi = p1(0.0, 1.0);
        let d = delta_log(&zi, delta_terms_for(&zi).unwrap()).unwrap();
        assert!(d.im.abs() < 1e-12, "Delta(i) is real positive, got im {}", d.im);

        let zi1 = p1(1.0, 1.0);
        let d1 = delta_log(&zi1, delta_terms_for(&zi1).unwrap()).unwrap();
        assert!((d1 - d - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);

        let far = p1(0.0, 30.0);
        let dfar = delta_log(&far, delta_terms_for(&far).unwrap()).unwrap();
        assert!((dfar - Complex64::new(0.0, 2.0 * PI) * far.entry(0, 0)).norm() < 1e-12);

        assert!(matches!(
            delta_log(&p1(0.0, 0.5), 10),
            Err(FormsError::TermBudget { .. })
        ));
    }

    #[test]
    fn rademacher_pinned_values() {
        let cases = [
            ("1,0;0,1", 0),
            ("1,1;0,1", 1),
            ("0,-1;1,0", -3),
            ("-1,0;0,-1", -6),
            ("0,1;-1,0", 3),
        ];
        for (s, want) in cases {
            assert_eq!(rademacher_integer(&m1(s)).unwrap(), want, "d({s})");
        }
    }

    #[test]
    fn rademacher_bridge_on_minus_identity() {
        // d(MN) - d(M) - d(N) = 12 * defect orientation of the cocycle
        let neg = SymplecticMatrix::minus_identity(1);
        let d_prod = rademacher_integer(&neg.mul(&neg).unwrap()).unwrap();
        let d_each = rademacher_integer(&neg).unwrap();
        let sigma = cocycle::sigma_factor(1.0, &neg, &neg).unwrap();
        assert_eq!(d_prod - 2 * d_each, 12 * sigma.defect);
    }

    #[test]
    fn delta_multiplier_weights() {
        let s = m1("0,-1;1,0");
        // r = 12: v = exp(2 pi i d) = 1
        let ev = delta_multiplier(12.0, &s).unwrap();
        assert!((ev.value - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        // r = 1: v = exp(2 pi i (-3) / 12) = exp(-pi i / 2) = -i
        let ev = delta_multiplier(1.0, &s).unwrap();
        assert!((ev.value - Complex64::new(0.0, -1.0)).norm() < 1e-9);
        assert!(ev.deviation < 1e-9);
    }

    #[test]
    fn relation_holds_on_small_pair_set() {
        let pairs: Vec<(SymplecticMatrix, SymplecticMatrix)> = vec![
            (m1("1,1;0,1"), m1("0,-1;1,0")),
            (m1("0,-1;1,0"), m1("0,-1;1,0")),
            (m1("-1,0;0,-1"), m1("-1,0;0,-1")),
            (m1("13,8;8,5"), m1("-3,-4;4,5")),
            (m1("2,1;1,1"), m1("1,0;-4,1")),
        ];
        let eval = |m: &SymplecticMatrix| delta_multiplier(0.3, m).map(|e| e.value);
        let report = verify_multiplier_relation(eval, 0.3, &pairs, RELATION_TOL).unwrap();
        assert!(report.pass, "worst {}", report.worst_deviation);

        // weight 12 makes both sides trivially 1
        let eval = |m: &SymplecticMatrix| delta_multiplier(12.0, m).map(|e| e.value);
        let report = verify_multiplier_relation(eval, 12.0, &pairs, RELATION_TOL).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn theta_relation_on_embedded_pairs() {
        let i1 = m1("0,-1;1,0");
        let t2 = m1("1,2;0,1");
        let pairs: Vec<(SymplecticMatrix, SymplecticMatrix)> = vec![
            (
                SymplecticMatrix::iota1(&i1).unwrap(),
                SymplecticMatrix::iota1(&t2).unwrap(),
            ),
            (
                SymplecticMatrix::involution(2),
                SymplecticMatrix::iota2(&i1).unwrap(),
            ),
        ];
        let samples = default_samples(2);
        let eval = |m: &SymplecticMatrix| theta_multiplier(m, &samples).map(|e| e.value);
        let report = verify_multiplier_relation(eval, 0.5, &pairs, RELATION_TOL).unwrap();
        assert!(report.pass, "worst {}", report.worst_deviation);
    }
}
