//! Kronecker/Jacobi/Legendre symbols and the small integer utilities the
//! certificate chains need.
//!
//! The Kronecker symbol here is the full extension: multiplicative in both
//! arguments, `(c/2)` by the `c mod 8` rule, `(c/-1) = sgn c`, `(c/0)`
//! nonzero only for `c = +-1`. An independent Euler-criterion oracle
//! ([`legendre_oracle`]) pins the prime case.

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("kronecker symbol (0/0) is undefined")]
    UndefinedSymbol,
    #[error("{0} is not an odd prime")]
    NotOddPrime(i64),
    #[error("{a} is not a quadratic residue modulo {p}")]
    NoSquareRoot { a: i64, p: i64 },
    #[error("no prime = {a} (mod {m}) up to {bound}")]
    NoPrimeFound { a: i64, m: i64, bound: i64 },
    #[error("modulus {0} must be positive")]
    BadModulus(i64),
}

/// Extended gcd: returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i64, 0i64);
    let (mut y0, mut y1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    egcd(a, b).0
}

/// Inverse of `a` modulo `m > 0`, in `[0, m)`, when it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m <= 0 {
        return None;
    }
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m))
}

/// The Kronecker symbol `(c/d)`, defined for all integer pairs except
/// `(0, 0)`.
pub fn kronecker(c: i64, d: i64) -> Result<i8, SymbolError> {
    if c == 0 && d == 0 {
        return Err(SymbolError::UndefinedSymbol);
    }
    if d == 0 {
        return Ok(if c.abs() == 1 { 1 } else { 0 });
    }
    let mut a = c;
    let mut b = d;
    let mut v: i8 = 1;
    if b < 0 {
        b = -b;
        if a < 0 {
            v = -v;
        }
    }
    // (2/a) table indexed by a mod 8, zero entries never read for odd a
    const TAB2: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    while b % 2 == 0 {
        b /= 2;
        if a % 2 == 0 {
            return Ok(0);
        }
        v *= TAB2[a.rem_euclid(8) as usize];
    }
    // b odd positive: Jacobi loop with reciprocity
    loop {
        a = a.rem_euclid(b);
        if a == 0 {
            return Ok(if b == 1 { v } else { 0 });
        }
        while a % 2 == 0 {
            a /= 2;
            v *= TAB2[b.rem_euclid(8) as usize];
        }
        if a.rem_euclid(4) == 3 && b.rem_euclid(4) == 3 {
            v = -v;
        }
        std::mem::swap(&mut a, &mut b);
    }
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3i64;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

fn pow_mod(base: i64, mut exp: i64, m: i64) -> i64 {
    let mm = m as i128;
    let mut b = (base.rem_euclid(m)) as i128;
    let mut acc: i128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % mm;
        }
        b = b * b % mm;
        exp >>= 1;
    }
    acc as i64
}

/// Euler-criterion evaluation of the Legendre symbol: `c^((p-1)/2) mod p`,
/// mapped to `{-1, 0, 1}`. Requires `p` an odd prime; the independent oracle
/// for [`kronecker`] on prime bottoms.
pub fn legendre_oracle(c: i64, p: i64) -> Result<i8, SymbolError> {
    if p < 3 || !is_prime(p) {
        return Err(SymbolError::NotOddPrime(p));
    }
    let r = pow_mod(c, (p - 1) / 2, p);
    Ok(if r == 0 {
        0
    } else if r == 1 {
        1
    } else if r == p - 1 {
        -1
    } else {
        // impossible for prime p
        unreachable!("euler criterion out of range")
    })
}

/// Smallest square root of `a` modulo an odd prime `p`, by exhaustive scan.
pub fn sqrt_mod(a: i64, p: i64) -> Result<i64, SymbolError> {
    if p < 3 || !is_prime(p) {
        return Err(SymbolError::NotOddPrime(p));
    }
    let target = a.rem_euclid(p);
    (0..p)
        .find(|&x| (x as i128 * x as i128 % p as i128) as i64 == target)
        .ok_or(SymbolError::NoSquareRoot { a, p })
}

/// Smallest prime `p = a (mod m)` with `p <= bound`.
pub fn find_prime_in_ap(a: i64, m: i64, bound: i64) -> Result<i64, SymbolError> {
    if m <= 0 {
        return Err(SymbolError::BadModulus(m));
    }
    let mut n = a.rem_euclid(m);
    if n == 0 {
        n = m;
    }
    while n <= bound {
        if is_prime(n) {
            return Ok(n);
        }
        n += m;
    }
    Err(SymbolError::NoPrimeFound { a, m, bound })
}
