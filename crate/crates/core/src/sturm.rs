//! Exact count of distinct real roots via a Sturm chain over big integers.
//!
//! Each `f64` coefficient is a dyadic rational, so after a common power-of-two
//! shift the polynomial has integer coefficients and the chain can be built
//! with pseudo-remainders without any rounding.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

type Poly = Vec<BigInt>;

/// Splits a finite non-zero `f64` into `(mantissa, exponent)` with `x = m * 2^e`.
fn decompose(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp - 1075)
    };
    (sign * m, e)
}

fn to_integer_poly(coeffs: &[f64]) -> Poly {
    let parts: Vec<Option<(i64, i32)>> = coeffs.iter().map(|&c| (c != 0.0).then(|| decompose(c))).collect();
    let min_e = parts.iter().flatten().map(|&(_, e)| e).min().unwrap_or(0);
    let mut p: Poly = parts
        .iter()
        .map(|part| match part {
            Some((m, e)) => BigInt::from(*m) << ((e - min_e) as usize),
            None => BigInt::zero(),
        })
        .collect();
    trim(&mut p);
    p
}

fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn degree(p: &Poly) -> usize {
    p.len().saturating_sub(1)
}

fn derivative(p: &Poly) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect()
}

/// `lc(b)^(deg a - deg b + 1) * a mod b`.
fn pseudo_remainder(a: &Poly, b: &Poly) -> Poly {
    let m = degree(b);
    let lcb = b.last().unwrap();
    let mut r = a.clone();
    for i in (0..=degree(a) - m).rev() {
        let top = r[m + i].clone();
        for c in r.iter_mut() {
            *c *= lcb;
        }
        for (k, bk) in b.iter().enumerate() {
            r[i + k] -= &top * bk;
        }
    }
    r.truncate(m);
    trim(&mut r);
    r
}

fn primitive(mut p: Poly) -> Poly {
    let g = p.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && g != BigInt::from(1) {
        for c in p.iter_mut() {
            *c /= &g;
        }
    }
    p
}

fn sign_changes(signs: impl Iterator<Item = Sign>) -> usize {
    let mut last = Sign::NoSign;
    let mut n = 0;
    for s in signs.filter(|s| *s != Sign::NoSign) {
        if last != Sign::NoSign && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Number of distinct real roots of `sum coeffs[k] x^k`.
pub fn count_real_roots(coeffs: &[f64]) -> usize {
    assert!(coeffs.iter().all(|c| c.is_finite()), "non-finite coefficient");
    let p0 = to_integer_poly(coeffs);
    if degree(&p0) == 0 {
        return 0;
    }
    let mut chain = vec![primitive(p0.clone()), primitive(derivative(&p0))];
    loop {
        let n = chain.len();
        if degree(&chain[n - 1]) == 0 {
            break;
        }
        let a = &chain[n - 2];
        let b = &chain[n - 1];
        let r = pseudo_remainder(a, b);
        if r.is_empty() {
            break;
        }
        // The Sturm step needs -rem(a, b); the pseudo-remainder carries the
        // factor lc(b)^(da - db + 1), whose sign must be undone.
        let d = degree(a) - degree(b) + 1;
        let factor_negative = b.last().unwrap().is_negative() && d % 2 == 1;
        let next: Poly = if factor_negative {
            r
        } else {
            r.into_iter().map(|c| -c).collect()
        };
        chain.push(primitive(next));
    }
    let at_pos_inf = sign_changes(chain.iter().map(|p| p.last().unwrap().sign()));
    let at_neg_inf = sign_changes(chain.iter().map(|p| {
        let s = p.last().unwrap().sign();
        if degree(p) % 2 == 1 {
            -s
        } else {
            s
        }
    }));
    at_neg_inf - at_pos_inf
}
