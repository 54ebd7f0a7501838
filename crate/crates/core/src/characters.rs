//! Multiplicative and additive characters of F_p as complex numbers.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::field::PrimeField;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("character order {order} does not divide p - 1 = {p_minus_1}")]
    OrderNotDividing { order: u64, p_minus_1: u64 },
    #[error("power {power} is not coprime to the order {order}")]
    PowerNotCoprime { power: u64, order: u64 },
}

/// `chi(g^t) = exp(2 pi i * power * t / order)` where `g` is the field's
/// generator.
#[derive(Clone, Debug)]
pub struct MultChar {
    field: Arc<PrimeField>,
    order: u64,
    power: u64,
    roots: Vec<Complex64>,
}

impl MultChar {
    /// The canonical character of exact order `order`.
    pub fn new(field: Arc<PrimeField>, order: u64) -> Result<Self, CharacterError> {
        Self::with_power(field, order, 1)
    }

    /// `chi^power` for the canonical `chi` of the given order; `power` must
    /// be coprime to `order` so the result still has exact order `order`.
    pub fn with_power(field: Arc<PrimeField>, order: u64, power: u64) -> Result<Self, CharacterError> {
        let p_minus_1 = field.modulus() - 1;
        if order == 0 || p_minus_1 % order != 0 {
            return Err(CharacterError::OrderNotDividing { order, p_minus_1 });
        }
        let power = power % order;
        if order > 1 && num_integer_gcd(power, order) != 1 {
            return Err(CharacterError::PowerNotCoprime { power, order });
        }
        let roots = (0..order)
            .map(|t| Complex64::from_polar(1.0, TAU * t as f64 / order as f64))
            .collect();
        Ok(MultChar {
            field,
            order,
            power,
            roots,
        })
    }

    pub fn trivial(field: Arc<PrimeField>) -> Self {
        Self::new(field, 1).expect("1 divides p - 1")
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn power(&self) -> u64 {
        self.power
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    /// The conjugate character `chi^(order - power)`.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.power = (self.order - self.power) % self.order;
        out
    }

    /// Index `power * log(x) mod order` of `chi(x)` among the order-th roots
    /// of unity, or `None` at zero.
    pub fn index(&self, x: u64) -> Option<u64> {
        self.field
            .log(x)
            .map(|t| (t % self.order) * self.power % self.order)
    }

    /// `chi(x)`; zero maps to 0 for nontrivial characters and to 1 for the
    /// trivial one.
    pub fn eval(&self, x: u64) -> Complex64 {
        match self.index(x) {
            Some(i) => self.roots[i as usize],
            None if self.is_trivial() => Complex64::new(1.0, 0.0),
            None => Complex64::new(0.0, 0.0),
        }
    }
}

fn num_integer_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `psi(x) = exp(2 pi i k x / p)`.
#[derive(Clone, Debug)]
pub struct AddChar {
    field: Arc<PrimeField>,
    frequency: u64,
}

impl AddChar {
    pub fn new(field: Arc<PrimeField>, frequency: u64) -> Self {
        let frequency = frequency % field.modulus();
        AddChar { field, frequency }
    }

    pub fn frequency(&self) -> u64 {
        self.frequency
    }

    pub fn is_trivial(&self) -> bool {
        self.frequency == 0
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn conj(&self) -> Self {
        AddChar::new(self.field.clone(), self.field.modulus() - self.frequency)
    }

    pub fn eval(&self, x: u64) -> Complex64 {
        e_p(self.field.mul(self.frequency, x % self.field.modulus()), self.field.modulus())
    }
}

/// `exp(2 pi i r / p)` for a residue `r`.
#[inline]
pub fn e_p(r: u64, p: u64) -> Complex64 {
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, TAU * r as f64 / p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> Arc<PrimeField> {
        Arc::new(PrimeField::new(p).unwrap())
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn quadratic_character_mod_7() {
        let chi = MultChar::new(field(7), 2).unwrap();
        // Euler's criterion
        for x in 1..7u64 {
            let euler = if crate::field::pow_mod(x, 3, 7) == 1 { 1.0 } else { -1.0 };
            assert!(close(chi.eval(x), Complex64::new(euler, 0.0), 1e-15));
        }
        assert!(close(chi.eval(2), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(chi.eval(3), Complex64::new(-1.0, 0.0), 1e-15));
        assert_eq!(chi.eval(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn trivial_and_invalid_orders() {
        let chi = MultChar::new(field(7), 1).unwrap();
        for x in 0..7 {
            assert_eq!(chi.eval(x), Complex64::new(1.0, 0.0));
        }
        assert_eq!(
            MultChar::new(field(7), 4).unwrap_err(),
            CharacterError::OrderNotDividing { order: 4, p_minus_1: 6 }
        );
        assert!(matches!(
            MultChar::with_power(field(7), 6, 2),
            Err(CharacterError::PowerNotCoprime { .. })
        ));
    }

    #[test]
    fn orthogonality() {
        for p in [31u64, 101, 211] {
            let f = field(p);
            let psi = AddChar::new(f.clone(), 1);
            assert_eq!(psi.eval(0), Complex64::new(1.0, 0.0));
            let s: Complex64 = (0..p).map(|x| psi.eval(x)).sum();
            assert!(s.norm() <= 1e-10 * p as f64);
            for a in [2u64, 3, 5, 6] {
                if (p - 1) % a != 0 {
                    continue;
                }
                let chi = MultChar::new(f.clone(), a).unwrap();
                let s: Complex64 = (1..p).map(|x| chi.eval(x)).sum();
                assert!(s.norm() <= 1e-10 * p as f64, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn homomorphism_and_exact_order() {
        let p = 211; // p - 1 = 2 * 3 * 5 * 7
        let f = field(p);
        for a in [2u64, 3, 5, 6, 7, 10, 14, 15] {
            let chi = MultChar::new(f.clone(), a).unwrap();
            for x in 1..p {
                for y in [1u64, 2, 17, 100, 210] {
                    let lhs = chi.eval(f.mul(x, y));
                    assert!(close(lhs, chi.eval(x) * chi.eval(y), 1e-12));
                }
            }
            let mut hit = vec![false; a as usize];
            for x in 1..p {
                hit[chi.index(x).unwrap() as usize] = true;
            }
            assert!(hit.iter().all(|&h| h), "value set of order {a} is incomplete");
        }
    }

    #[test]
    fn conjugates() {
        let f = field(31);
        let chi = MultChar::with_power(f.clone(), 5, 2).unwrap();
        let psi = AddChar::new(f.clone(), 7);
        for x in 0..31 {
            assert!(close(chi.conj().eval(x), chi.eval(x).conj(), 1e-12));
            assert!(close(psi.conj().eval(x), psi.eval(x).conj(), 1e-12));
            for y in [0u64, 3, 30] {
                assert!(close(psi.eval(f.add(x, y)), psi.eval(x) * psi.eval(y), 1e-12));
            }
            assert!((psi.eval(x).norm() - 1.0).abs() < 1e-12);
        }
    }
}
