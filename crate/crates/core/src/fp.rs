//! Word-sized prime-field arithmetic, `F_p[x]` factorization and small
//! integer number theory (primality, factoring, square roots mod p).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Inverse modulo `m` (not necessarily prime); `None` if not a unit.
pub fn invmod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Reduce a signed integer into `[0, p)`.
pub fn reduce_i128(a: i128, p: u64) -> u64 {
    a.rem_euclid(p as i128) as u64
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| addmod(mulmod(x, x, n), c, n);
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization as sorted `(prime, exponent)` pairs.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let mut m = m;
        let mut split = false;
        for sp in 2u64..1000 {
            if m % sp == 0 {
                while m % sp == 0 {
                    primes.push(sp);
                    m /= sp;
                }
                split = true;
            }
        }
        if split {
            stack.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match out.last_mut() {
            Some((r, e)) if *r == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out
}

/// Primes below `bound`.
pub fn primes_below(bound: u64) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i < n {
        if sieve[i] {
            let mut j = i * i;
            while j < n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Legendre symbol for odd prime `p`.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if powmod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli-Shanks square root modulo an odd prime.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| legendre(z, p) == -1).unwrap();
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt, p);
            i += 1;
        }
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

/// Polynomial over `F_p`, low degree first, trimmed (no trailing zeros).
pub type FpPoly = Vec<u64>;

pub fn ptrim(mut a: FpPoly) -> FpPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn padd(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    ptrim(
        (0..n)
            .map(|i| addmod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
            .collect(),
    )
}

pub fn psub(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    ptrim(
        (0..n)
            .map(|i| submod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
            .collect(),
    )
}

pub fn pmul(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = addmod(out[i + j], mulmod(x, y, p), p);
        }
    }
    ptrim(out)
}

pub fn pdivrem(a: &[u64], b: &[u64], p: u64) -> (FpPoly, FpPoly) {
    let db = b.len() - 1;
    if a.len() <= db {
        return (Vec::new(), ptrim(a.to_vec()));
    }
    let inv = invmod(b[db], p).expect("nonzero leading coefficient");
    let mut r = a.to_vec();
    let mut q = vec![0u64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = mulmod(r[i + db], inv, p);
        if c != 0 {
            for j in 0..=db {
                r[i + j] = submod(r[i + j], mulmod(c, b[j], p), p);
            }
        }
        q[i] = c;
    }
    r.truncate(db);
    (ptrim(q), ptrim(r))
}

pub fn prem(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    pdivrem(a, b, p).1
}

pub fn pmonic(a: &[u64], p: u64) -> FpPoly {
    match a.last() {
        None => Vec::new(),
        Some(&l) => {
            let inv = invmod(l, p).expect("nonzero leading coefficient");
            a.iter().map(|&c| mulmod(c, inv, p)).collect()
        }
    }
}

pub fn pgcd(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let (mut x, mut y) = (ptrim(a.to_vec()), ptrim(b.to_vec()));
    while !y.is_empty() {
        let r = prem(&x, &y, p);
        x = y;
        y = r;
    }
    pmonic(&x, p)
}

/// Returns `(d, s, t)` with `s a + t b = d`, `d` monic.
pub fn pxgcd(a: &[u64], b: &[u64], p: u64) -> (FpPoly, FpPoly, FpPoly) {
    let (mut r0, mut r1) = (ptrim(a.to_vec()), ptrim(b.to_vec()));
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = pdivrem(&r0, &r1, p);
        let s2 = psub(&s0, &pmul(&q, &s1, p), p);
        let t2 = psub(&t0, &pmul(&q, &t1, p), p);
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, s2);
        (t0, t1) = (t1, t2);
    }
    let inv = invmod(*r0.last().expect("not both zero"), p).unwrap();
    let sc = |v: &[u64]| ptrim(v.iter().map(|&c| mulmod(c, inv, p)).collect());
    (sc(&r0), sc(&s0), sc(&t0))
}

pub fn pderiv(a: &[u64], p: u64) -> FpPoly {
    ptrim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mulmod(c, i as u64 % p, p))
            .collect(),
    )
}

pub fn peval(a: &[u64], x: u64, p: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| addmod(mulmod(acc, x, p), c, p))
}

/// `base^e mod m`.
pub fn ppowmod(base: &[u64], mut e: u128, m: &[u64], p: u64) -> FpPoly {
    let mut acc = prem(&[1], m, p);
    let mut b = prem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = prem(&pmul(&acc, &b, p), m, p);
        }
        e >>= 1;
        if e > 0 {
            b = prem(&pmul(&b, &b, p), m, p);
        }
    }
    acc
}

/// Reduce integer coefficients modulo `p`.
pub fn reduce_coeffs(coeffs: &[i128], p: u64) -> FpPoly {
    ptrim(coeffs.iter().map(|&c| reduce_i128(c, p)).collect())
}

pub fn is_squarefree(f: &[u64], p: u64) -> bool {
    let d = pderiv(f, p);
    !d.is_empty() && pgcd(f, &d, p).len() == 1
}

/// Rabin irreducibility test.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let f = pmonic(f, p);
    let x = vec![0, 1];
    // x^(p^k) mod f for k = 0..=n.
    let mut frob = vec![prem(&x, &f, p)];
    for k in 1..=n {
        let prev = frob[k - 1].clone();
        frob.push(ppowmod(&prev, p as u128, &f, p));
    }
    if psub(&frob[n], &x, p) != prem(&[], &f, p) {
        return false;
    }
    for (r, _) in factor_u64(n as u64) {
        let k = n / r as usize;
        let g = pgcd(&f, &psub(&frob[k], &x, p), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Factor a monic squarefree polynomial over `F_p` (p odd) into monic
/// irreducibles, sorted by degree then coefficients.
pub fn factor_squarefree(f: &[u64], p: u64) -> Vec<FpPoly> {
    let f = pmonic(f, p);
    let mut out = Vec::new();
    // Distinct-degree factorization.
    let x = vec![0u64, 1];
    let mut rest = f.clone();
    let mut h = prem(&x, &rest, p);
    let mut d = 0usize;
    while rest.len() > 1 {
        d += 1;
        if 2 * d > rest.len() - 1 {
            out.push(rest.clone());
            break;
        }
        h = ppowmod(&h, p as u128, &rest, p);
        let g = pgcd(&rest, &psub(&h, &x, p), p);
        if g.len() > 1 {
            out.extend(equal_degree_split(&g, d, p));
            rest = pdivrem(&rest, &g, p).0;
            h = prem(&h, &rest, p);
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn equal_degree_split(g: &[u64], d: usize, p: u64) -> Vec<FpPoly> {
    let n = g.len() - 1;
    if n == d {
        return vec![g.to_vec()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ p ^ (n as u64) << 32);
    let e = ((p as u128).pow(d as u32) - 1) / 2;
    loop {
        let a: FpPoly = ptrim((0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.len() < 2 {
            continue;
        }
        let b = psub(&ppowmod(&a, e, g, p), &[1], p);
        let h = pgcd(g, &b, p);
        if h.len() > 1 && h.len() < g.len() {
            let other = pdivrem(g, &h, p).0;
            let mut out = equal_degree_split(&h, d, p);
            out.extend(equal_degree_split(&pmonic(&other, p), d, p));
            return out;
        }
    }
}

/// Distinct roots of `f` in `F_p`, sorted.
pub fn roots(f: &[u64], p: u64) -> Vec<u64> {
    let f = ptrim(f.to_vec());
    if f.len() <= 1 {
        return Vec::new();
    }
    let x = vec![0u64, 1];
    let xp = ppowmod(&x, p as u128, &f, p);
    let g = pgcd(&f, &psub(&xp, &x, p), p);
    if g.len() <= 1 {
        return Vec::new();
    }
    let mut r: Vec<u64> = equal_degree_split(&g, 1, p)
        .into_iter()
        .map(|l| submod(0, l[0], p))
        .collect();
    r.sort_unstable();
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_and_factoring() {
        assert!(is_prime(109));
        assert!(!is_prime(12100));
        assert_eq!(factor_u64(12100), vec![(2, 2), (5, 2), (11, 2)]);
        let big = 1_000_003u64 * 999_983;
        assert_eq!(factor_u64(big), vec![(999_983, 1), (1_000_003, 1)]);
        assert_eq!(primes_below(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn square_roots() {
        for p in [3u64, 5, 13, 109, 1_000_003] {
            for a in 0..50u64 {
                if let Some(r) = sqrt_mod(a, p) {
                    assert_eq!(mulmod(r, r, p), a % p);
                } else {
                    assert_eq!(legendre(a, p), -1);
                }
            }
        }
    }

    #[test]
    fn cube_root_of_two_mod_small_primes() {
        // x^3 - 2 splits completely mod 31 and is irreducible mod 7.
        let f = vec![29u64, 0, 0, 1];
        let fac = factor_squarefree(&f, 31);
        assert_eq!(fac.len(), 3);
        let f7 = vec![5u64, 0, 0, 1];
        assert!(is_irreducible(&f7, 7));
        assert_eq!(factor_squarefree(&f7, 7), vec![f7.clone()]);
        // mod 5: one linear and one quadratic factor.
        let f5 = vec![3u64, 0, 0, 1];
        let fac5 = factor_squarefree(&f5, 5);
        assert_eq!(fac5.iter().map(|g| g.len() - 1).collect::<Vec<_>>(), vec![1, 2]);
        let prod = pmul(&fac5[0], &fac5[1], 5);
        assert_eq!(prod, f5);
    }

    #[test]
    fn root_finding() {
        // (x-1)(x-3)(x^2+1) mod 7
        let f = pmul(&pmul(&[6, 1], &[4, 1], 7), &[1, 0, 1], 7);
        assert_eq!(roots(&f, 7), vec![1, 3]);
    }
}
