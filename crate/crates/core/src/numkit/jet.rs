//! Truncated Taylor polynomials in the switching rate ε.
//!
//! A [`Jet`] of order `K` stores `c_0 + c_1 h + … + c_K h^K`, the expansion of
//! some quantity about a base point `ε_0` in the offset `h = ε − ε_0`. All
//! arithmetic truncates at `h^K`, so propagating jets through a recursion
//! yields its value and first `K` derivatives without symbolic work.
//!
//! The `std::ops` impls panic when two jets of different order meet; use
//! [`jet_mul`], [`Jet::checked_add`] and [`jet_recip`] where the orders are
//! not known to agree.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<C64>,
}

impl Jet {
    /// Jet from explicit coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Contract("a jet needs at least one coefficient".into()));
        }
        Ok(Jet { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Jet { coeffs: vec![C64::new(0.0, 0.0); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(C64::new(1.0, 0.0), order)
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = c;
        j
    }

    /// The affine jet `c0 + c1·h`.
    pub fn affine(c0: C64, c1: C64, order: usize) -> Self {
        let mut j = Self::constant(c0, order);
        if order >= 1 {
            j.coeffs[1] = c1;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `h^k`; zero beyond the stored order.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// `k`-th derivative with respect to ε at the base point (`k!·c_k`).
    pub fn derivative(&self, k: usize) -> C64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeff(k) * fact
    }

    /// Evaluate the truncated polynomial at offset `h`.
    pub fn eval(&self, h: f64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * h + c)
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    fn same_order(&self, other: &Jet) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::Contract(format!(
                "jet order mismatch: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        self.same_order(other)?;
        Ok(Jet { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        self.same_order(other)?;
        let k = self.order();
        let mut out = vec![C64::new(0.0, 0.0); k + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs[..=k - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(Jet { coeffs: out })
    }

    pub fn recip(&self) -> Result<Jet> {
        let c0 = self.coeffs[0];
        if c0 == C64::new(0.0, 0.0) {
            return Err(Error::SingularJet);
        }
        let inv0 = c0.inv();
        let k = self.order();
        let mut out = vec![C64::new(0.0, 0.0); k + 1];
        out[0] = inv0;
        // a·b = 1  =>  b_n = -(Σ_{j=1}^{n} a_j b_{n-j}) / a_0
        for n in 1..=k {
            let mut s = C64::new(0.0, 0.0);
            for j in 1..=n {
                s += self.coeffs[j] * out[n - j];
            }
            out[n] = -s * inv0;
        }
        Ok(Jet { coeffs: out })
    }

    /// Largest |c_k|, used for tolerance comparisons.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Cauchy product truncated at the shared order.
pub fn jet_mul(a: &Jet, b: &Jet) -> Result<Jet> {
    a.checked_mul(b)
}

/// Multiplicative inverse; fails with [`Error::SingularJet`] when `c_0 = 0`.
pub fn jet_recip(a: &Jet) -> Result<Jet> {
    a.recip()
}

fn expect<T>(r: Result<T>) -> T {
    r.unwrap_or_else(|e| panic!("{e}"))
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        expect(self.checked_add(rhs))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        expect(self.checked_add(&-rhs))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        expect(self.checked_mul(rhs))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Mul<C64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: C64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: C64) -> Jet {
        self.scale(rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        expect(self.same_order(rhs));
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        expect(self.same_order(rhs));
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real_jet(v: &[f64]) -> Jet {
        Jet::from_coeffs(v.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    fn assert_jet_close(a: &Jet, b: &Jet, tol: f64) {
        assert_eq!(a.order(), b.order());
        for k in 0..=a.order() {
            assert!((a.coeff(k) - b.coeff(k)).norm() <= tol, "coeff {k}: {} vs {}", a.coeff(k), b.coeff(k));
        }
    }

    #[test]
    fn mul_truncates() {
        let p = jet_mul(&real_jet(&[1.0, 1.0]), &real_jet(&[1.0, -1.0])).unwrap();
        assert_jet_close(&p, &real_jet(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn mul_scalar_jets() {
        let p = jet_mul(&Jet::constant(c(0.0, 2.0), 0), &Jet::constant(c(0.5, 0.0), 0)).unwrap();
        assert_eq!(p.value(), c(0.0, 1.0));
    }

    #[test]
    fn mul_hand_expanded() {
        // (1 + 2h + 3h²)(4 + 5h) = 4 + 13h + 22h² + 15h³
        let p = jet_mul(&real_jet(&[1.0, 2.0, 3.0]), &real_jet(&[4.0, 5.0, 0.0])).unwrap();
        assert_jet_close(&p, &real_jet(&[4.0, 13.0, 22.0]), 1e-15);
    }

    #[test]
    fn mul_order_mismatch_is_error() {
        let err = jet_mul(&Jet::one(1), &Jet::one(2)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    #[should_panic(expected = "order mismatch")]
    fn operator_mismatch_panics() {
        let _ = &Jet::one(1) * &Jet::one(3);
    }

    #[test]
    fn recip_examples() {
        // 1/(2i + h) = 1/(2i) - h/(2i)² = -0.5i + 0.25h
        let r = jet_recip(&Jet::affine(c(0.0, 2.0), c(1.0, 0.0), 1)).unwrap();
        assert_jet_close(&r, &Jet::affine(c(0.0, -0.5), c(0.25, 0.0), 1), 1e-16);

        assert_jet_close(&jet_recip(&Jet::one(3)).unwrap(), &Jet::one(3), 0.0);
        assert_jet_close(&jet_recip(&Jet::constant(c(4.0, 0.0), 1)).unwrap(), &real_jet(&[0.25, 0.0]), 0.0);
    }

    #[test]
    fn recip_singular() {
        assert_eq!(jet_recip(&Jet::affine(c(0.0, 0.0), c(1.0, 0.0), 2)), Err(Error::SingularJet));
    }

    #[test]
    fn derivative_and_eval() {
        let j = real_jet(&[1.0, 2.0, 3.0]);
        assert_eq!(j.derivative(2), c(6.0, 0.0));
        assert_eq!(j.eval(2.0), c(17.0, 0.0));
        assert_eq!(j.coeff(7), c(0.0, 0.0));
    }

    fn jet_strategy(order: usize, min_c0: f64) -> impl Strategy<Value = Jet> {
        let c0 = (min_c0..2.0f64, 0.0..std::f64::consts::TAU)
            .prop_map(|(r, th)| C64::from_polar(r, th));
        let rest = proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), order);
        (c0, rest).prop_map(|(c0, rest)| {
            let mut coeffs = vec![c0];
            coeffs.extend(rest.into_iter().map(|(re, im)| C64::new(re, im)));
            Jet::from_coeffs(coeffs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn recip_is_inverse(a in (0usize..=4).prop_flat_map(|k| jet_strategy(k, 0.1))) {
            let r = jet_recip(&a).unwrap();
            let p = &a * &r;
            let k = a.order();
            prop_assert!((p.value() - 1.0).norm() <= 1e-12);
            for i in 1..=k {
                // roundoff scale of the i-th convolution sum
                let scale: f64 = (0..=i).map(|j| a.coeff(j).norm() * r.coeff(i - j).norm()).sum();
                prop_assert!(p.coeff(i).norm() <= 1e-13 * scale, "coeff {} = {} (scale {})", i, p.coeff(i), scale);
            }
        }

        #[test]
        fn ring_laws(
            (a, b, c) in (0usize..=4).prop_flat_map(|k| (jet_strategy(k, 0.0), jet_strategy(k, 0.0), jet_strategy(k, 0.0)))
        ) {
            let assoc_l = &(&a * &b) * &c;
            let assoc_r = &a * &(&b * &c);
            let dist_l = &a * &(&b + &c);
            let dist_r = &(&a * &b) + &(&a * &c);
            for k in 0..=a.order() {
                prop_assert!((assoc_l.coeff(k) - assoc_r.coeff(k)).norm() <= 1e-12);
                prop_assert!((dist_l.coeff(k) - dist_r.coeff(k)).norm() <= 1e-12);
            }
        }
    }
}
