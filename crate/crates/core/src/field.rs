//! Arithmetic in the prime field F_p.
//!
//! A [`PrimeField`] owns the modulus, its smallest primitive root and a full
//! discrete-logarithm table. Field elements are plain `u64` values in
//! `0..p`; every operation reduces its result.

use thiserror::Error;

/// Largest modulus accepted by [`PrimeField::new`]. The log table costs four
/// bytes per element.
pub const DEFAULT_MAX_MODULUS: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("modulus {p} exceeds the table budget of {max}")]
    TooLarge { p: u64, max: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// The field F_p with a fixed generator and discrete-log table.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    generator: u64,
    log_table: Vec<u32>,
}

impl std::fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrimeField")
            .field("p", &self.p)
            .field("generator", &self.generator)
            .finish_non_exhaustive()
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        Self::with_limit(p, DEFAULT_MAX_MODULUS)
    }

    /// Builds the field, rejecting moduli above `max_modulus`.
    pub fn with_limit(p: u64, max_modulus: u64) -> Result<Self, FieldError> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p > max_modulus {
            return Err(FieldError::TooLarge { p, max: max_modulus });
        }
        let generator = smallest_primitive_root(p);
        let mut log_table = vec![0u32; p as usize];
        let mut acc = 1u64;
        for t in 0..(p - 1) {
            log_table[acc as usize] = t as u32;
            acc = acc * generator % p;
        }
        Ok(PrimeField {
            p,
            generator,
            log_table,
        })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Index of nonzero `x` base the generator, in `0..p-1`.
    #[inline]
    pub fn log(&self, x: u64) -> Option<u64> {
        let x = x % self.p;
        if x == 0 {
            None
        } else {
            Some(self.log_table[x as usize] as u64)
        }
    }

    /// Reduces a signed integer into `0..p`.
    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    pub fn pow(&self, x: u64, e: u64) -> u64 {
        pow_mod(x % self.p, e, self.p)
    }

    pub fn inv(&self, x: u64) -> Result<u64, FieldError> {
        let x = x % self.p;
        if x == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(pow_mod(x, self.p - 2, self.p))
    }

    /// Checks every structural invariant of the field, including the full
    /// log table round trip. Linear in `p`.
    pub fn check_invariants(&self) -> Result<(), String> {
        let p = self.p;
        if !is_prime(p) {
            return Err(format!("modulus {p} is not prime"));
        }
        for q in prime_factors(p - 1) {
            if pow_mod(self.generator, (p - 1) / q, p) == 1 {
                return Err(format!("generator {} has order dividing (p-1)/{q}", self.generator));
            }
        }
        let mut seen = vec![false; (p - 1) as usize];
        for x in 1..p {
            let t = self.log_table[x as usize] as u64;
            if t >= p - 1 || seen[t as usize] {
                return Err(format!("log table is not a bijection at x = {x}"));
            }
            seen[t as usize] = true;
            if pow_mod(self.generator, t, p) != x {
                return Err(format!("generator^log({x}) != {x}"));
            }
        }
        Ok(())
    }

    /// Swaps two log-table entries. Only for exercising the verification
    /// driver's failure path.
    #[doc(hidden)]
    pub fn corrupt_log_table(&mut self) {
        if self.p > 3 {
            self.log_table.swap(1, 2);
        }
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all `n < 3.3e24`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn smallest_primitive_root(p: u64) -> u64 {
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime field has a primitive root")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_order(g: u64, p: u64) -> u64 {
        let mut acc = g % p;
        let mut k = 1;
        while acc != 1 {
            acc = acc * g % p;
            k += 1;
        }
        k
    }

    #[test]
    fn generator_of_f7_is_primitive() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.generator(), 3);
        let powers: Vec<u64> = (1..=6).map(|e| f.pow(3, e)).collect();
        assert_eq!(powers, vec![3, 2, 6, 4, 5, 1]);
        // every primitive root candidate by brute force
        let prims: Vec<u64> = (1..7).filter(|&g| brute_order(g, 7) == 6).collect();
        assert!(prims.contains(&f.generator()));
        assert_eq!(prims[0], f.generator());
    }

    #[test]
    fn log_table_in_f5() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.generator(), 2);
        assert_eq!(f.log(4), Some(2));
        assert_eq!(f.log(0), None);
    }

    #[test]
    fn rejects_composites_and_large_moduli() {
        assert_eq!(PrimeField::new(4).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(PrimeField::new(2).unwrap_err(), FieldError::NotPrime(2));
        assert_eq!(PrimeField::new(561).unwrap_err(), FieldError::NotPrime(561));
        assert!(matches!(
            PrimeField::with_limit(101, 100),
            Err(FieldError::TooLarge { p: 101, max: 100 })
        ));
    }

    #[test]
    fn inverse_and_powers() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.inv(3).unwrap(), 5);
        assert_eq!(f.inv(0), Err(FieldError::ZeroInverse));
        assert_eq!(f.pow(2, 6), 1);
        // 3 is a non-residue mod 7: Euler's criterion by brute force
        let squares: Vec<u64> = (1..7).map(|x| x * x % 7).collect();
        assert!(!squares.contains(&3));
        assert_eq!(f.pow(3, 3), 6);
    }

    #[test]
    fn inverse_and_log_round_trip_exhaustive() {
        for p in [3u64, 5, 11, 101, 1009] {
            let f = PrimeField::new(p).unwrap();
            for x in 1..p {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
                assert_eq!(f.pow(f.generator(), f.log(x).unwrap()), x);
            }
            f.check_invariants().unwrap();
        }
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(10007));
        assert!(!is_prime(3215031751));
    }

    #[test]
    fn corruption_is_detected() {
        let mut f = PrimeField::new(31).unwrap();
        f.corrupt_log_table();
        assert!(f.check_invariants().is_err());
    }
}
