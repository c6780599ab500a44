//! Exact arithmetic in the finite Grassmann algebra Λ_L over ℂ.
//!
//! Elements are stored sparsely as a sorted list of (generator subset bitmask,
//! complex coefficient) pairs. Generator ζ_j (1-based) is bit `j - 1`. A
//! monomial is always kept in increasing index order, so the product sign is
//! the parity of the number of inversions needed to merge two subsets.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest algebra accepted from user input.
pub const MAX_L: usize = 12;
/// Largest algebra used internally (user algebra plus odd coordinate symbols).
pub const MAX_INTERNAL_L: usize = 16;
/// Default tolerance below which a body counts as zero.
pub const DEFAULT_BODY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Mixed => "mixed",
        })
    }
}

/// Largest generator count whose products accumulate into a dense buffer.
const DENSE_MUL_MAX_L: usize = 12;

/// True when reordering ζ_A ζ_B into increasing order flips the sign.
#[inline]
pub fn reorder_sign(a: u32, b: u32) -> bool {
    let mut count = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        count += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    count & 1 == 1
}

/// An element of Λ_L.
#[derive(Clone, Debug, PartialEq)]
pub struct Grassmann {
    l: usize,
    terms: Vec<(u32, Complex64)>,
}

impl Grassmann {
    pub fn zero(l: usize) -> Self {
        assert!(l <= MAX_INTERNAL_L, "generator count {l} too large");
        Grassmann { l, terms: Vec::new() }
    }

    pub fn one(l: usize) -> Self {
        Self::scalar(l, ONE)
    }

    pub fn scalar(l: usize, c: Complex64) -> Self {
        let mut g = Self::zero(l);
        if c != ZERO {
            g.terms.push((0, c));
        }
        g
    }

    pub fn real(l: usize, x: f64) -> Self {
        Self::scalar(l, Complex64::new(x, 0.0))
    }

    /// The generator ζ_j, 1-based.
    pub fn generator(l: usize, j: usize) -> Self {
        assert!(j >= 1 && j <= l, "generator index {j} out of range 1..={l}");
        let mut g = Self::zero(l);
        g.terms.push((1 << (j - 1), ONE));
        g
    }

    /// c·ζ_S for a bitmask S.
    pub fn monomial(l: usize, mask: u32, c: Complex64) -> Self {
        assert!(l == 32 || (mask >> l) == 0, "mask {mask:#b} exceeds {l} generators");
        let mut g = Self::zero(l);
        if c != ZERO {
            g.terms.push((mask, c));
        }
        g
    }

    /// Builds an element from arbitrary (mask, coefficient) pairs, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (u32, Complex64)>>(l: usize, terms: I) -> Self {
        let mut v: Vec<(u32, Complex64)> = terms.into_iter().collect();
        for (m, _) in &v {
            assert!((*m as u64) >> l == 0, "mask {m:#b} exceeds {l} generators");
        }
        normalize(&mut v);
        Grassmann { l, terms: v }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn terms(&self) -> &[(u32, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn coeff(&self, mask: u32) -> Complex64 {
        match self.terms.binary_search_by_key(&mask, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => ZERO,
        }
    }

    pub fn body(&self) -> Complex64 {
        self.coeff(0)
    }

    pub fn soul(&self) -> Self {
        Grassmann { l: self.l, terms: self.terms.iter().copied().filter(|t| t.0 != 0).collect() }
    }

    pub fn is_body_only(&self) -> bool {
        self.terms.iter().all(|t| t.0 == 0)
    }

    pub fn parity(&self) -> Parity {
        let even = self.terms.iter().any(|t| t.0.count_ones() % 2 == 0);
        let odd = self.terms.iter().any(|t| t.0.count_ones() % 2 == 1);
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// Zero counts as both even and odd.
    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|t| t.0.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.iter().all(|t| t.0.count_ones() % 2 == 1)
    }

    /// Even and odd parts.
    pub fn split_parity(&self) -> (Self, Self) {
        let (e, o): (Vec<_>, Vec<_>) = self.terms.iter().partition(|t| t.0.count_ones() % 2 == 0);
        (Grassmann { l: self.l, terms: e }, Grassmann { l: self.l, terms: o })
    }

    /// Bitwise union of all generator subsets present.
    pub fn support(&self) -> u32 {
        self.terms.iter().fold(0, |acc, t| acc | t.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| acc.max(t.1.norm()))
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        Grassmann { l: self.l, terms: self.terms.iter().copied().filter(|t| t.1.norm() > tol).collect() }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).max_abs() <= tol
    }

    /// Reinterprets the element in a larger algebra.
    pub fn embed(&self, l: usize) -> Self {
        assert!(l >= self.l, "cannot embed Λ_{} into Λ_{}", self.l, l);
        Grassmann { l, terms: self.terms.clone() }
    }

    /// Keeps only the terms that live in Λ_l and relabels the algebra.
    pub fn truncate(&self, l: usize) -> Self {
        let keep = if l >= 32 { u32::MAX } else { (1u32 << l) - 1 };
        Grassmann { l, terms: self.terms.iter().copied().filter(|t| t.0 & !keep == 0).collect() }
    }

    /// Embeds, or truncates if the element provably lives in the smaller algebra.
    pub fn with_l(&self, l: usize) -> Result<Self> {
        if l >= self.l {
            return Ok(self.embed(l));
        }
        let keep = (1u32 << l) - 1;
        if self.support() & !keep != 0 {
            return Err(Error::TooManyGenerators(self.l, l));
        }
        Ok(self.truncate(l))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return Self::zero(self.l);
        }
        let mut terms: Vec<_> = self.terms.iter().map(|&(m, x)| (m, x * c)).collect();
        terms.retain(|t| t.1 != ZERO);
        Grassmann { l: self.l, terms }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn conj_coeffs(&self) -> Self {
        Grassmann { l: self.l, terms: self.terms.iter().map(|&(m, c)| (m, c.conj())).collect() }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.l != other.l {
            return Err(Error::GeneratorMismatch(self.l, other.l));
        }
        Ok(self.mul_unchecked(other))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.l != other.l {
            return Err(Error::GeneratorMismatch(self.l, other.l));
        }
        Ok(merge_add(self, other, ONE))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        if self.terms.is_empty() || other.terms.is_empty() {
            return Self::zero(self.l);
        }
        if self.terms.len() == 1 && self.terms[0].0 == 0 {
            return other.scale(self.terms[0].1);
        }
        if other.terms.len() == 1 && other.terms[0].0 == 0 {
            return self.scale(other.terms[0].1);
        }
        if self.terms == other.terms && self.is_odd() {
            return Self::zero(self.l);
        }
        if self.l <= DENSE_MUL_MAX_L {
            let mut dense = vec![ZERO; 1 << self.l];
            for &(ma, ca) in &self.terms {
                for &(mb, cb) in &other.terms {
                    if ma & mb != 0 {
                        continue;
                    }
                    let c = ca * cb;
                    dense[(ma | mb) as usize] += if reorder_sign(ma, mb) { -c } else { c };
                }
            }
            let terms = dense.into_iter().enumerate().filter(|t| t.1 != ZERO).map(|(m, c)| (m as u32, c)).collect();
            return Grassmann { l: self.l, terms };
        }
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ma, ca) in &self.terms {
            for &(mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let c = ca * cb;
                out.push((ma | mb, if reorder_sign(ma, mb) { -c } else { c }));
            }
        }
        normalize(&mut out);
        Grassmann { l: self.l, terms: out }
    }

    /// Left derivative ∂/∂ζ_j (1-based generator index).
    pub fn left_derivative(&self, j: usize) -> Self {
        let bit = 1u32 << (j - 1);
        let below = bit - 1;
        let terms = self
            .terms
            .iter()
            .filter(|t| t.0 & bit != 0)
            .map(|&(m, c)| {
                let c = if (m & below).count_ones() % 2 == 1 { -c } else { c };
                (m & !bit, c)
            })
            .collect::<Vec<_>>();
        Grassmann::from_terms(self.l, terms)
    }

    /// Integer power; negative exponents go through the inverse.
    pub fn int_pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.invert()?.int_pow(-k);
        }
        let mut result = Self::one(self.l);
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    pub fn invert(&self) -> Result<Self> {
        self.invert_tol(DEFAULT_BODY_TOL)
    }

    /// Σ (−1)ⁿ a_Sⁿ / a_B^{n+1}, finite by nilpotency.
    pub fn invert_tol(&self, tol: f64) -> Result<Self> {
        let b = self.body();
        if b.norm() < tol {
            return Err(Error::ZeroBody(b.norm()));
        }
        let inv_b = b.inv();
        let s = self.soul().scale(-inv_b);
        Ok(self.series(&s, |_| ONE).scale(inv_b))
    }

    /// Σ_n coef(n)·sⁿ, stopping once sⁿ vanishes.
    fn series(&self, s: &Self, coef: impl Fn(usize) -> Complex64) -> Self {
        let mut acc = Self::one(self.l).scale(coef(0));
        let mut power = Self::one(self.l);
        let mut n = 0usize;
        loop {
            n += 1;
            power = &power * s;
            if power.is_zero() {
                break;
            }
            acc += &power.scale(coef(n));
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let s = self.soul();
        let mut fact = 1.0f64;
        let mut facts = vec![1.0f64];
        for n in 1..=(2 * self.l + 2) {
            fact *= n as f64;
            facts.push(fact);
        }
        self.series(&s, |n| Complex64::new(1.0 / facts[n], 0.0)).scale(self.body().exp())
    }

    /// Principal branch on the body.
    pub fn log(&self) -> Result<Self> {
        let b = self.body();
        if b.norm() < DEFAULT_BODY_TOL {
            return Err(Error::ZeroBody(b.norm()));
        }
        let s = self.soul().scale(b.inv());
        let mut out = self.series(&s, |n| {
            if n == 0 {
                ZERO
            } else {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                Complex64::new(sign / n as f64, 0.0)
            }
        });
        out += &Self::scalar(self.l, b.ln());
        Ok(out)
    }

    /// Square root with the principal body root, or its negative when `principal` is false.
    pub fn sqrt(&self, principal: bool) -> Result<Self> {
        self.pow_c(Complex64::new(0.5, 0.0)).map(|r| if principal { r } else { -r })
    }

    /// a^c = a_B^c Σ binom(c, n) (a_S/a_B)ⁿ with the principal body power.
    pub fn pow_c(&self, c: Complex64) -> Result<Self> {
        let b = self.body();
        if b.norm() < DEFAULT_BODY_TOL {
            return Err(Error::ZeroBody(b.norm()));
        }
        let s = self.soul().scale(b.inv());
        let mut binoms = vec![ONE];
        for n in 1..=(2 * self.l + 2) {
            let prev = binoms[n - 1];
            binoms.push(prev * (c - Complex64::new((n - 1) as f64, 0.0)) / n as f64);
        }
        Ok(self.series(&s, |n| binoms[n]).scale(b.powc(c)))
    }
}

fn normalize(v: &mut Vec<(u32, Complex64)>) {
    v.sort_unstable_by_key(|t| t.0);
    let mut out: Vec<(u32, Complex64)> = Vec::with_capacity(v.len());
    for &(m, c) in v.iter() {
        match out.last_mut() {
            Some(last) if last.0 == m => last.1 += c,
            _ => out.push((m, c)),
        }
    }
    out.retain(|t| t.1 != ZERO);
    *v = out;
}

fn merge_add(a: &Grassmann, b: &Grassmann, sb: Complex64) -> Grassmann {
    let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() || j < b.terms.len() {
        let ord = match (a.terms.get(i), b.terms.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                out.push(a.terms[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push((b.terms[j].0, b.terms[j].1 * sb));
                j += 1;
            }
            Ordering::Equal => {
                let c = a.terms[i].1 + b.terms[j].1 * sb;
                if c != ZERO {
                    out.push((a.terms[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    Grassmann { l: a.l, terms: out }
}

fn check_l(a: &Grassmann, b: &Grassmann) {
    assert_eq!(a.l, b.l, "Grassmann generator counts differ");
}

impl Add<&Grassmann> for &Grassmann {
    type Output = Grassmann;
    fn add(self, rhs: &Grassmann) -> Grassmann {
        check_l(self, rhs);
        merge_add(self, rhs, ONE)
    }
}

impl Sub<&Grassmann> for &Grassmann {
    type Output = Grassmann;
    fn sub(self, rhs: &Grassmann) -> Grassmann {
        check_l(self, rhs);
        merge_add(self, rhs, -ONE)
    }
}

impl Mul<&Grassmann> for &Grassmann {
    type Output = Grassmann;
    fn mul(self, rhs: &Grassmann) -> Grassmann {
        check_l(self, rhs);
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Grassmann {
    type Output = Grassmann;
    fn neg(self) -> Grassmann {
        Grassmann { l: self.l, terms: self.terms.iter().map(|&(m, c)| (m, -c)).collect() }
    }
}

impl Neg for Grassmann {
    type Output = Grassmann;
    fn neg(self) -> Grassmann {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Grassmann> for Grassmann {
            type Output = Grassmann;
            fn $m(self, rhs: Grassmann) -> Grassmann {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Grassmann> for Grassmann {
            type Output = Grassmann;
            fn $m(self, rhs: &Grassmann) -> Grassmann {
                (&self).$m(rhs)
            }
        }
        impl $tr<Grassmann> for &Grassmann {
            type Output = Grassmann;
            fn $m(self, rhs: Grassmann) -> Grassmann {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&Grassmann> for Grassmann {
    fn add_assign(&mut self, rhs: &Grassmann) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Grassmann> for Grassmann {
    fn sub_assign(&mut self, rhs: &Grassmann) {
        *self = &*self - rhs;
    }
}

impl fmt::Display for Grassmann {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, &(m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for j in MultiIndex::from_mask(m).indices() {
                write!(f, "ζ{j}")?;
            }
        }
        Ok(())
    }
}

/// A strictly increasing list of generator indices.
///
/// The order is by length first, then lexicographic, which is the basis order
/// under which multiplication by an invertible even element is lower triangular.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    indices: Vec<u8>,
}

impl MultiIndex {
    pub fn new(indices: Vec<u8>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!("indices {indices:?} are not strictly increasing")));
        }
        if indices.first() == Some(&0) {
            return Err(Error::Invalid("generator indices are 1-based".into()));
        }
        Ok(MultiIndex { indices })
    }

    pub fn from_mask(mask: u32) -> Self {
        let indices = (0..32u8).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        MultiIndex { indices }
    }

    pub fn mask(&self) -> u32 {
        self.indices.iter().fold(0, |acc, &j| acc | 1 << (j - 1))
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_odd(&self) -> bool {
        self.indices.len() % 2 == 1
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices.len().cmp(&other.indices.len()).then_with(|| self.indices.cmp(&other.indices))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All subsets of {1..l} with the given parity, in multi-index order.
pub fn multi_indices(l: usize, odd: bool) -> Vec<MultiIndex> {
    let mut v: Vec<MultiIndex> = (0u32..(1u32 << l))
        .filter(|m| (m.count_ones() % 2 == 1) == odd)
        .map(MultiIndex::from_mask)
        .collect();
    v.sort();
    v
}

/// Matrix of θ ↦ g·θ on the odd subspace of Λ_l, in multi-index order.
///
/// Entry (r, c) is the coefficient of basis element r in g times basis element c.
pub fn odd_mult_matrix(g: &Grassmann, l: usize) -> Result<DMatrix<Complex64>> {
    if g.l() != l {
        return Err(Error::GeneratorMismatch(g.l(), l));
    }
    if !g.is_even() {
        return Err(Error::Parity(format!("multiplier must be even, found {}", g.parity())));
    }
    if g.body().norm() < DEFAULT_BODY_TOL {
        return Err(Error::ZeroBody(g.body().norm()));
    }
    let basis = multi_indices(l, true);
    let position: std::collections::HashMap<u32, usize> =
        basis.iter().enumerate().map(|(i, m)| (m.mask(), i)).collect();
    let n = basis.len();
    let mut mat = DMatrix::from_element(n, n, ZERO);
    for (col, b) in basis.iter().enumerate() {
        let prod = g * &Grassmann::monomial(l, b.mask(), ONE);
        for &(m, c) in prod.terms() {
            mat[(position[&m], col)] = c;
        }
    }
    Ok(mat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn z(l: usize, j: usize) -> Grassmann {
        Grassmann::generator(l, j)
    }

    #[test]
    fn generators_anticommute() {
        let prod = z(3, 2) * z(3, 1);
        assert_eq!(prod, Grassmann::monomial(3, 0b11, c(-1.0)));
    }

    #[test]
    fn square_of_nilpotent_sum() {
        let a = Grassmann::one(3) + z(3, 1);
        assert_eq!(&a * &a, Grassmann::one(3) + z(3, 1).scale_re(2.0));
    }

    #[test]
    fn repeated_generator_kills_product() {
        let a = z(3, 1) * z(3, 2);
        let b = z(3, 2) * z(3, 3);
        assert!((a * b).is_zero());
    }

    #[test]
    fn invert_examples() {
        assert_eq!(Grassmann::real(2, 2.0).invert().unwrap(), Grassmann::real(2, 0.5));
        let a = Grassmann::one(2) + z(2, 1) * z(2, 2);
        assert_eq!(a.invert().unwrap(), Grassmann::one(2) - z(2, 1) * z(2, 2));
        assert!(matches!((z(2, 1) * z(2, 2)).invert(), Err(Error::ZeroBody(_))));
    }

    #[test]
    fn exp_log_sqrt_examples() {
        let s = z(2, 1) * z(2, 2);
        assert_eq!(s.exp(), Grassmann::one(2) + &s);
        let r = (Grassmann::one(2) + &s).sqrt(true).unwrap();
        assert!(r.approx_eq(&(Grassmann::one(2) + s.scale_re(0.5)), 1e-15));
        let r = (Grassmann::one(2) + &s).sqrt(false).unwrap();
        assert!(r.approx_eq(&-(Grassmann::one(2) + s.scale_re(0.5)), 1e-15));
        let a = Grassmann::real(4, 0.3) + (z(4, 1) * z(4, 2) * z(4, 3) * z(4, 4)).scale_re(2.0);
        assert!(a.exp().log().unwrap().approx_eq(&a, 1e-12));
        assert!(matches!(s.log(), Err(Error::ZeroBody(_))));
    }

    #[test]
    fn int_pow_matches_repeated_product() {
        let a = Grassmann::real(3, 1.5) + z(3, 1) * z(3, 2) + z(3, 3);
        let cube = &(&a * &a) * &a;
        assert!(a.int_pow(3).unwrap().approx_eq(&cube, 1e-13));
        let inv = a.int_pow(-2).unwrap();
        assert!((&inv * &a.int_pow(2).unwrap()).approx_eq(&Grassmann::one(3), 1e-13));
    }

    #[test]
    fn left_derivative_signs() {
        // ∂/∂ζ2 (ζ1ζ2) = −ζ1
        let a = z(3, 1) * z(3, 2);
        assert_eq!(a.left_derivative(2), -z(3, 1));
        assert_eq!(a.left_derivative(1), z(3, 2));
        assert!(a.left_derivative(3).is_zero());
    }

    #[test]
    fn parity_classification() {
        assert_eq!(z(2, 1).parity(), Parity::Odd);
        assert_eq!((z(2, 1) * z(2, 2)).parity(), Parity::Even);
        assert_eq!((Grassmann::one(2) + z(2, 1)).parity(), Parity::Mixed);
        assert!(Grassmann::zero(2).is_even() && Grassmann::zero(2).is_odd());
    }

    #[test]
    fn multi_index_order() {
        let odd = multi_indices(4, true);
        let lists: Vec<Vec<u8>> = odd.iter().map(|m| m.indices().to_vec()).collect();
        assert_eq!(
            lists,
            vec![vec![1], vec![2], vec![3], vec![4], vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]
        );
        assert!(MultiIndex::new(vec![2, 1]).is_err());
    }

    #[test]
    fn odd_mult_matrix_scalar_is_scaled_identity() {
        let m = odd_mult_matrix(&Grassmann::real(4, 3.0), 4).unwrap();
        assert_eq!(m, DMatrix::from_diagonal_element(8, 8, c(3.0)));
    }

    #[test]
    fn odd_mult_matrix_of_one_plus_pair() {
        let g = Grassmann::one(4) + z(4, 1) * z(4, 2);
        let m = odd_mult_matrix(&g, 4).unwrap();
        let mut expected = DMatrix::from_diagonal_element(8, 8, c(1.0));
        // basis: ζ1 ζ2 ζ3 ζ4 ζ1ζ2ζ3 ζ1ζ2ζ4 ζ1ζ3ζ4 ζ2ζ3ζ4
        expected[(4, 2)] = c(1.0);
        expected[(5, 3)] = c(1.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn odd_mult_matrix_rejects_bad_input() {
        assert!(matches!(odd_mult_matrix(&z(4, 1), 4), Err(Error::Parity(_))));
        assert!(matches!(odd_mult_matrix(&(z(4, 1) * z(4, 2)), 4), Err(Error::ZeroBody(_))));
    }
}
