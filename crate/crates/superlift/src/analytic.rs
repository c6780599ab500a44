//! Grassmann-valued analytic functions of one even variable.
//!
//! Symbolic functions are finite sums Σ_λ P_λ(z)·e^{λz} where each P_λ is a
//! Laurent polynomial with Grassmann coefficients and λ is a complex rate. This
//! family contains Laurent polynomials and the exponential-affine form
//! scale·e^{rate·z}·prefactor, and it is closed under sums, products and
//! differentiation. Anything outside it is carried as a sampled function that
//! returns derivative jets at body points.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grassmann::{Grassmann, Parity};

/// Points used on the unit circle by [`winding_degree`].
pub const WINDING_SAMPLES: usize = 4096;
/// Minimum body modulus on the circle accepted by [`winding_degree`].
pub const BODY_VANISH_TOL: f64 = 1e-9;
/// Relative tolerance under which two exponential rates are merged.
const RATE_MERGE_TOL: f64 = 1e-12;
/// Base points remembered by each sampled composition before its cache is reset.
const JET_CACHE_LIMIT: usize = 4096;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Where a function is analytic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Entire,
    /// ℂ×: everywhere except the origin.
    Punctured,
    /// inner < |z| < outer.
    Annulus { inner: f64, outer: f64 },
}

impl Domain {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Domain::Entire => true,
            Domain::Punctured => z.norm() > 0.0,
            Domain::Annulus { inner, outer } => z.norm() > inner && z.norm() < outer,
        }
    }

    fn meet(self, other: Domain) -> Domain {
        match (self, other) {
            (Domain::Entire, d) | (d, Domain::Entire) => d,
            (Domain::Annulus { inner: a, outer: b }, Domain::Annulus { inner: c, outer: d }) => {
                Domain::Annulus { inner: a.max(c), outer: b.min(d) }
            }
            (d @ Domain::Annulus { .. }, Domain::Punctured) | (Domain::Punctured, d @ Domain::Annulus { .. }) => d,
            (Domain::Punctured, Domain::Punctured) => Domain::Punctured,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Entire => "entire",
            Domain::Punctured => "punctured",
            Domain::Annulus { .. } => "annulus",
        }
    }
}

// ---------------------------------------------------------------------------
// Laurent polynomials
// ---------------------------------------------------------------------------

/// Σ c_k z^k with Grassmann coefficients c_k in Λ_l.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    l: usize,
    coeffs: BTreeMap<i32, Grassmann>,
}

impl Laurent {
    pub fn zero(l: usize) -> Self {
        Laurent { l, coeffs: BTreeMap::new() }
    }

    pub fn constant(c: Grassmann) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(power: i32, c: Grassmann) -> Self {
        let mut p = Self::zero(c.l());
        if !c.is_zero() {
            p.coeffs.insert(power, c);
        }
        p
    }

    /// The identity function z.
    pub fn z(l: usize) -> Self {
        Self::monomial(1, Grassmann::one(l))
    }

    /// Builds from (power, coefficient) pairs, summing repeats.
    pub fn from_pairs<I: IntoIterator<Item = (i32, Grassmann)>>(l: usize, pairs: I) -> Self {
        let mut p = Self::zero(l);
        for (k, c) in pairs {
            assert_eq!(c.l(), l, "coefficient lives in a different algebra");
            p.add_term(k, &c);
        }
        p
    }

    /// Complex-coefficient Laurent polynomial lifted into Λ_l.
    pub fn from_complex<I: IntoIterator<Item = (i32, Complex64)>>(l: usize, pairs: I) -> Self {
        Self::from_pairs(l, pairs.into_iter().map(|(k, c)| (k, Grassmann::scalar(l, c))))
    }

    fn add_term(&mut self, k: i32, c: &Grassmann) {
        if c.is_zero() {
            return;
        }
        let sum = match self.coeffs.get(&k) {
            Some(old) => old + c,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, sum);
        }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Grassmann> {
        &self.coeffs
    }

    pub fn coeff(&self, k: i32) -> Grassmann {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| Grassmann::zero(self.l))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_power(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_power(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn has_negative_powers(&self) -> bool {
        self.min_power().is_some_and(|k| k < 0)
    }

    pub fn parity(&self) -> Parity {
        combine_parities(self.coeffs.values().map(|c| c.parity()))
    }

    pub fn is_body_only(&self) -> bool {
        self.coeffs.values().all(|c| c.is_body_only())
    }

    pub fn map_coeffs(&self, l: usize, f: impl Fn(&Grassmann) -> Grassmann) -> Self {
        Self::from_pairs(l, self.coeffs.iter().map(|(&k, c)| (k, f(c))))
    }

    pub fn body(&self) -> Self {
        self.map_coeffs(self.l, |c| Grassmann::scalar(self.l, c.body()))
    }

    pub fn soul(&self) -> Self {
        self.map_coeffs(self.l, |c| c.soul())
    }

    pub fn scale_left(&self, g: &Grassmann) -> Self {
        self.map_coeffs(self.l, |c| g * c)
    }

    pub fn scale_right(&self, g: &Grassmann) -> Self {
        self.map_coeffs(self.l, |c| c * g)
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        self.map_coeffs(self.l, |c| c.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l, "Laurent generator counts differ");
        let mut out = self.clone();
        for (&k, c) in &other.coeffs {
            out.add_term(k, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(self.l, |c| -c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l, "Laurent generator counts differ");
        let mut acc: BTreeMap<i32, Vec<(u32, Complex64)>> = BTreeMap::new();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                let p = a * b;
                if !p.is_zero() {
                    acc.entry(i + j).or_default().extend_from_slice(p.terms());
                }
            }
        }
        let mut out = Self::zero(self.l);
        for (k, terms) in acc {
            let c = Grassmann::from_terms(self.l, terms);
            if !c.is_zero() {
                out.coeffs.insert(k, c);
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        Self::from_pairs(self.l, self.coeffs.iter().filter(|(&k, _)| k != 0).map(|(&k, c)| (k - 1, c.scale_re(k as f64))))
    }

    pub fn eval(&self, z: Complex64) -> Result<Grassmann> {
        if self.has_negative_powers() && z.norm() == 0.0 {
            return Err(Error::DomainViolation("Laurent polynomial with poles evaluated at 0".into()));
        }
        let mut out = Grassmann::zero(self.l);
        for (&k, c) in &self.coeffs {
            out += &c.scale(z.powi(k));
        }
        Ok(out)
    }

    pub fn chop(&self, tol: f64) -> Self {
        self.map_coeffs(self.l, |c| c.chop(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |acc, c| acc.max(c.max_abs()))
    }

    pub fn with_l(&self, l: usize) -> Result<Self> {
        let mut out = Self::zero(l);
        for (&k, c) in &self.coeffs {
            out.coeffs.insert(k, c.with_l(l)?);
        }
        Ok(out)
    }

    pub fn truncate(&self, l: usize) -> Self {
        self.map_coeffs(l, |c| c.truncate(l))
    }

    /// Substitutes z ↦ c·z^k.
    fn subst_monomial(&self, c: Complex64, k: i32) -> Self {
        Self::from_pairs(self.l, self.coeffs.iter().map(|(&p, g)| (p * k, g.scale(c.powi(p)))))
    }

    /// Substitutes z ↦ a·z + b for a polynomial (no negative powers when b ≠ 0).
    fn subst_affine(&self, a: Complex64, b: Complex64) -> Option<Self> {
        if b == ZERO {
            return Some(self.subst_monomial(a, 1));
        }
        if self.has_negative_powers() {
            return None;
        }
        let mut out = Self::zero(self.l);
        for (&p, g) in &self.coeffs {
            let p = p as usize;
            for j in 0..=p {
                let s = a.powi(j as i32) * b.powi((p - j) as i32) * binomial(p, j);
                out.add_term(j as i32, &g.scale(s));
            }
        }
        Some(out)
    }
}

fn combine_parities<I: Iterator<Item = Parity>>(it: I) -> Parity {
    let mut even = false;
    let mut odd = false;
    for p in it {
        match p {
            Parity::Even => even = true,
            Parity::Odd => odd = true,
            Parity::Mixed => return Parity::Mixed,
        }
    }
    match (even, odd) {
        (true, true) => Parity::Mixed,
        (false, true) => Parity::Odd,
        _ => Parity::Even,
    }
}

// ---------------------------------------------------------------------------
// Exponential polynomials
// ---------------------------------------------------------------------------

/// Σ_λ P_λ(z)·e^{λz}, rates sorted and distinct, no zero polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    l: usize,
    terms: Vec<(Complex64, Laurent)>,
}

fn rate_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn rates_close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= RATE_MERGE_TOL * (1.0f64).max(a.norm())
}

impl ExpPoly {
    pub fn zero(l: usize) -> Self {
        ExpPoly { l, terms: Vec::new() }
    }

    pub fn from_laurent(p: Laurent) -> Self {
        Self::from_terms(p.l(), vec![(ZERO, p)])
    }

    pub fn from_terms(l: usize, terms: Vec<(Complex64, Laurent)>) -> Self {
        let mut out = ExpPoly { l, terms: Vec::new() };
        for (rate, p) in terms {
            out.add_term(rate, p);
        }
        out
    }

    fn add_term(&mut self, rate: Complex64, p: Laurent) {
        if p.is_zero() {
            return;
        }
        if let Some(pos) = self.terms.iter().position(|t| rates_close(t.0, rate)) {
            let sum = self.terms[pos].1.add(&p);
            if sum.is_zero() {
                self.terms.remove(pos);
            } else {
                self.terms[pos].1 = sum;
            }
            return;
        }
        let pos = self.terms.partition_point(|t| rate_cmp(&t.0, &rate) == std::cmp::Ordering::Less);
        self.terms.insert(pos, (rate, p));
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn terms(&self) -> &[(Complex64, Laurent)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The Laurent polynomial, when there is no exponential factor.
    pub fn as_laurent(&self) -> Option<Laurent> {
        match self.terms.as_slice() {
            [] => Some(Laurent::zero(self.l)),
            [(r, p)] if *r == ZERO => Some(p.clone()),
            _ => None,
        }
    }

    pub fn parity(&self) -> Parity {
        combine_parities(self.terms.iter().map(|t| t.1.parity()))
    }

    pub fn domain(&self) -> Domain {
        if self.terms.iter().any(|t| t.1.has_negative_powers()) {
            Domain::Punctured
        } else {
            Domain::Entire
        }
    }

    pub fn map_laurent(&self, l: usize, f: impl Fn(&Laurent) -> Laurent) -> Self {
        Self::from_terms(l, self.terms.iter().map(|(r, p)| (*r, f(p))).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l, "function generator counts differ");
        let mut out = self.clone();
        for (r, p) in &other.terms {
            out.add_term(*r, p.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l, "function generator counts differ");
        let mut out = Self::zero(self.l);
        for (r1, p1) in &self.terms {
            for (r2, p2) in &other.terms {
                out.add_term(r1 + r2, p1.mul(p2));
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        Self::from_terms(self.l, self.terms.iter().map(|(r, p)| (*r, p.derivative().add(&p.scale_c(*r)))).collect())
    }

    pub fn eval(&self, z: Complex64) -> Result<Grassmann> {
        let mut out = Grassmann::zero(self.l);
        for (r, p) in &self.terms {
            out += &p.eval(z)?.scale((r * z).exp());
        }
        Ok(out)
    }

    fn jet(&self, z: Complex64, order: usize) -> Result<Vec<Grassmann>> {
        let mut out = Vec::with_capacity(order + 1);
        let mut d = self.clone();
        for k in 0..=order {
            out.push(d.eval(z)?);
            if k < order {
                d = d.derivative();
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| acc.max(t.1.max_abs()))
    }

    /// Substitutes a body map z ↦ inner(z) when the result stays in the family.
    fn compose_body(&self, inner: &ExpPoly) -> Option<ExpPoly> {
        let l = self.l;
        if let Some(lin) = inner.as_laurent() {
            let powers: Vec<i32> = lin.coeffs().keys().copied().collect();
            let coef = |k| lin.coeff(k).body();
            // constant inner map
            if powers.iter().all(|&k| k == 0) {
                let c = coef(0);
                return self.eval(c).ok().map(|g| ExpPoly::from_laurent(Laurent::constant(g)));
            }
            // affine inner map a·z + b
            if powers.iter().all(|&k| k == 0 || k == 1) {
                let (a, b) = (coef(1), coef(0));
                let mut out = ExpPoly::zero(l);
                for (r, p) in &self.terms {
                    let q = p.subst_affine(a, b)?;
                    out.add_term(r * a, q.scale_c((r * b).exp()));
                }
                return Some(out);
            }
            // monomial inner map c·z^k
            if powers.len() == 1 {
                let k = powers[0];
                if self.terms.iter().any(|t| t.0 != ZERO) {
                    return None;
                }
                let p = self.as_laurent()?;
                return Some(ExpPoly::from_laurent(p.subst_monomial(coef(k), k)));
            }
        }
        // polynomial outer: Horner in the ring of exponential polynomials
        let p = self.as_laurent()?;
        if p.has_negative_powers() {
            return None;
        }
        let inner_l = inner.map_laurent(l, |q| q.with_l(l).expect("body-only inner map"));
        let top = p.max_power().unwrap_or(0);
        let mut acc = ExpPoly::zero(l);
        for k in (0..=top).rev() {
            acc = acc.mul(&inner_l).add(&ExpPoly::from_laurent(Laurent::constant(p.coeff(k))));
        }
        Some(acc)
    }
}

// ---------------------------------------------------------------------------
// Sampled functions and jets
// ---------------------------------------------------------------------------

/// Returns [f(z), f′(z), …, f^{(order)}(z)] at a body point.
pub type JetFn = dyn Fn(Complex64, usize) -> Result<Vec<Grassmann>> + Send + Sync;

/// A function known only through its derivative jets at body points.
#[derive(Clone)]
pub struct Sampled {
    l: usize,
    domain: Domain,
    parity: Parity,
    jet: Arc<JetFn>,
}

impl Sampled {
    pub fn new(l: usize, domain: Domain, parity: Parity, jet: Arc<JetFn>) -> Self {
        Sampled { l, domain, parity, jet }
    }

    fn jet(&self, z: Complex64, order: usize) -> Result<Vec<Grassmann>> {
        if !self.domain.contains(z) {
            return Err(Error::DomainViolation(format!("{z} lies outside the {} domain", self.domain.name())));
        }
        let v = (self.jet)(z, order)?;
        if v.len() != order + 1 {
            return Err(Error::Invalid(format!("sampled jet returned {} entries, expected {}", v.len(), order + 1)));
        }
        Ok(v)
    }
}

/// Derivatives of a function at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub base: Complex64,
    pub derivs: Vec<Grassmann>,
}

impl Jet {
    pub fn of(f: &AnalyticFn, base: Complex64, order: usize) -> Result<Jet> {
        Ok(Jet { base, derivs: f.jet(base, order)? })
    }

    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let derivs = self.derivs.iter().zip(&other.derivs).map(|(a, b)| a + b).collect();
        Jet { base: self.base, derivs }
    }

    pub fn scale_re(&self, x: f64) -> Jet {
        Jet { base: self.base, derivs: self.derivs.iter().map(|d| d.scale_re(x)).collect() }
    }

    /// Leibniz rule.
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.order().min(other.order());
        let derivs = (0..=n)
            .map(|k| {
                let mut acc = Grassmann::zero(self.derivs[0].l());
                for i in 0..=k {
                    acc += &(&self.derivs[i] * &other.derivs[k - i]).scale_re(binomial(k, i));
                }
                acc
            })
            .collect();
        Jet { base: self.base, derivs }
    }

    /// Jet of outer∘self, given the jet of `outer` at the body value of self.
    ///
    /// `self` must be body-valued; the Faà di Bruno sum is evaluated as a
    /// truncated power series composition.
    pub fn chain(&self, outer: &Jet) -> Jet {
        let n = self.order().min(outer.order());
        let l = outer.derivs[0].l();
        // Taylor coefficients of the inner increment u(ε) = h(z+ε) − h(z)
        let u: Vec<Complex64> = (0..=n).map(|k| if k == 0 { ZERO } else { self.derivs[k].body() / factorial(k) }).collect();
        let mut series = vec![Grassmann::zero(l); n + 1];
        let mut power = vec![ZERO; n + 1];
        power[0] = ONE;
        for j in 0..=n {
            let c = outer.derivs[j].scale_re(1.0 / factorial(j));
            for k in 0..=n {
                if power[k] != ZERO {
                    series[k] += &c.scale(power[k]);
                }
            }
            let mut next = vec![ZERO; n + 1];
            for a in 0..=n {
                for b in 1..=n - a {
                    next[a + b] += power[a] * u[b];
                }
            }
            power = next;
        }
        let derivs = series.into_iter().enumerate().map(|(k, c)| c.scale_re(factorial(k))).collect();
        Jet { base: self.base, derivs }
    }

    /// Jet of 1/self, assuming the values commute (even functions).
    pub fn reciprocal(&self) -> Result<Jet> {
        let n = self.order();
        let inv0 = self.derivs[0].invert()?;
        let mut g: Vec<Grassmann> = vec![inv0.clone()];
        for k in 1..=n {
            let mut acc = Grassmann::zero(inv0.l());
            for i in 1..=k {
                acc += &(&self.derivs[i] * &g[k - i]).scale_re(binomial(k, i));
            }
            g.push(-(&inv0 * &acc));
        }
        Ok(Jet { base: self.base, derivs: g })
    }
}

// ---------------------------------------------------------------------------
// The public function type
// ---------------------------------------------------------------------------

/// A Grassmann-valued analytic function of one even variable.
#[derive(Clone)]
pub enum AnalyticFn {
    Symbolic(ExpPoly),
    Sampled(Sampled),
}

impl fmt::Debug for AnalyticFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticFn::Symbolic(p) => write!(f, "{p:?}"),
            AnalyticFn::Sampled(s) => write!(f, "Sampled(L={}, {:?}, {})", s.l, s.domain, s.parity),
        }
    }
}

impl PartialEq for AnalyticFn {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (AnalyticFn::Symbolic(a), AnalyticFn::Symbolic(b)) => a == b,
            (AnalyticFn::Sampled(a), AnalyticFn::Sampled(b)) => Arc::ptr_eq(&a.jet, &b.jet),
            _ => false,
        }
    }
}

impl From<Laurent> for AnalyticFn {
    fn from(p: Laurent) -> Self {
        AnalyticFn::Symbolic(ExpPoly::from_laurent(p))
    }
}

impl From<ExpPoly> for AnalyticFn {
    fn from(p: ExpPoly) -> Self {
        AnalyticFn::Symbolic(p)
    }
}

impl AnalyticFn {
    pub fn zero(l: usize) -> Self {
        Laurent::zero(l).into()
    }

    pub fn constant(c: Grassmann) -> Self {
        Laurent::constant(c).into()
    }

    pub fn constant_c(l: usize, c: Complex64) -> Self {
        Self::constant(Grassmann::scalar(l, c))
    }

    pub fn one(l: usize) -> Self {
        Self::constant(Grassmann::one(l))
    }

    pub fn z(l: usize) -> Self {
        Laurent::z(l).into()
    }

    pub fn monomial(power: i32, c: Grassmann) -> Self {
        Laurent::monomial(power, c).into()
    }

    /// c·z^k with a complex coefficient.
    pub fn monomial_c(l: usize, power: i32, c: Complex64) -> Self {
        Self::monomial(power, Grassmann::scalar(l, c))
    }

    /// prefactor(z)·scale·e^{rate·z}; a rate with soul is expanded into the prefactor.
    pub fn exp_affine(scale: &Grassmann, rate: &Grassmann, prefactor: Option<&Laurent>) -> Result<Self> {
        let l = scale.l();
        if rate.l() != l {
            return Err(Error::GeneratorMismatch(l, rate.l()));
        }
        let rs = rate.soul();
        // e^{r_S z} = Σ r_Sᵏ zᵏ / k!
        let mut soul_exp = Laurent::zero(l);
        let mut power = Grassmann::one(l);
        let mut k = 0i32;
        while !power.is_zero() {
            soul_exp = soul_exp.add(&Laurent::monomial(k, power.scale_re(1.0 / factorial(k as usize))));
            k += 1;
            power = &power * &rs;
        }
        let mut p = soul_exp.scale_left(scale);
        if let Some(pre) = prefactor {
            if pre.l() != l {
                return Err(Error::GeneratorMismatch(l, pre.l()));
            }
            p = pre.mul(&p);
        }
        Ok(ExpPoly::from_terms(l, vec![(rate.body(), p)]).into())
    }

    pub fn sampled(s: Sampled) -> Self {
        AnalyticFn::Sampled(s)
    }

    pub fn l(&self) -> usize {
        match self {
            AnalyticFn::Symbolic(p) => p.l(),
            AnalyticFn::Sampled(s) => s.l,
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            AnalyticFn::Symbolic(p) => p.parity(),
            AnalyticFn::Sampled(s) => s.parity,
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            AnalyticFn::Symbolic(p) => p.domain(),
            AnalyticFn::Sampled(s) => s.domain,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, AnalyticFn::Symbolic(_))
    }

    pub fn as_exp_poly(&self) -> Option<&ExpPoly> {
        match self {
            AnalyticFn::Symbolic(p) => Some(p),
            AnalyticFn::Sampled(_) => None,
        }
    }

    pub fn as_laurent(&self) -> Option<Laurent> {
        self.as_exp_poly().and_then(|p| p.as_laurent())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, AnalyticFn::Symbolic(p) if p.is_zero())
    }

    /// Converts to the sampled representation.
    pub fn to_sampled(&self) -> Sampled {
        match self {
            AnalyticFn::Sampled(s) => s.clone(),
            AnalyticFn::Symbolic(p) => {
                let q = p.clone();
                Sampled::new(p.l(), p.domain(), p.parity(), Arc::new(move |z, n| q.jet(z, n)))
            }
        }
    }

    /// Derivatives 0..=order at a body point.
    pub fn jet(&self, z: Complex64, order: usize) -> Result<Vec<Grassmann>> {
        match self {
            AnalyticFn::Symbolic(p) => p.jet(z, order),
            AnalyticFn::Sampled(s) => s.jet(z, order),
        }
    }

    /// Value at a body point.
    pub fn eval_body(&self, z: Complex64) -> Result<Grassmann> {
        match self {
            AnalyticFn::Symbolic(p) => p.eval(z),
            AnalyticFn::Sampled(s) => Ok(s.jet(z, 0)?.remove(0)),
        }
    }

    /// Superanalytic value f(z_B + z_S) = Σ_l z_Sˡ/l!·f⁽ˡ⁾(z_B).
    pub fn eval_at(&self, z: &Grassmann) -> Result<Grassmann> {
        if z.l() != self.l() {
            return Err(Error::GeneratorMismatch(self.l(), z.l()));
        }
        if !z.is_even() {
            return Err(Error::Parity(format!("evaluation point must be even, found {}", z.parity())));
        }
        let zb = z.body();
        if !self.domain().contains(zb) {
            return Err(Error::DomainViolation(format!("body {zb} lies outside the {} domain", self.domain().name())));
        }
        let s = z.soul();
        let mut powers = vec![Grassmann::one(z.l())];
        loop {
            let next = powers.last().unwrap() * &s;
            if next.is_zero() {
                break;
            }
            powers.push(next);
        }
        let jet = self.jet(zb, powers.len() - 1)?;
        let mut out = Grassmann::zero(self.l());
        for (k, (d, p)) in jet.iter().zip(&powers).enumerate() {
            out += &(d * p).scale_re(1.0 / factorial(k));
        }
        Ok(out)
    }

    fn binary(&self, other: &Self, sym: impl Fn(&ExpPoly, &ExpPoly) -> ExpPoly, jet: fn(&Jet, &Jet) -> Jet, parity: Parity) -> Self {
        assert_eq!(self.l(), other.l(), "function generator counts differ");
        if let (AnalyticFn::Symbolic(a), AnalyticFn::Symbolic(b)) = (self, other) {
            return sym(a, b).into();
        }
        let (a, b) = (self.to_sampled(), other.to_sampled());
        let domain = a.domain.meet(b.domain);
        let l = self.l();
        AnalyticFn::Sampled(Sampled::new(
            l,
            domain,
            parity,
            Arc::new(move |z, n| {
                let ja = Jet { base: z, derivs: a.jet(z, n)? };
                let jb = Jet { base: z, derivs: b.jet(z, n)? };
                Ok(jet(&ja, &jb).derivs)
            }),
        ))
    }

    pub fn add(&self, other: &Self) -> Self {
        let parity = combine_parities([self.parity(), other.parity()].into_iter());
        self.binary(other, |a, b| a.add(b), |a, b| a.add(b), parity)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let parity = match (self.parity(), other.parity()) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        };
        self.binary(other, |a, b| a.mul(b), |a, b| a.mul(b), parity)
    }

    /// Applies a linear map to every coefficient (or jet entry).
    pub fn map_coeffs(&self, l: usize, f: impl Fn(&Grassmann) -> Grassmann + Send + Sync + 'static) -> Self {
        match self {
            AnalyticFn::Symbolic(p) => p.map_laurent(l, |q| q.map_coeffs(l, &f)).into(),
            AnalyticFn::Sampled(s) => {
                let s2 = s.clone();
                let probe = f(&Grassmann::zero(s.l));
                debug_assert!(probe.is_zero(), "map_coeffs expects a linear map");
                AnalyticFn::Sampled(Sampled::new(
                    l,
                    s.domain,
                    s.parity,
                    Arc::new(move |z, n| Ok(s2.jet(z, n)?.iter().map(&f).collect())),
                ))
            }
        }
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(self.l(), |c| -c)
    }

    pub fn scale_c(&self, c: Complex64) -> Self {
        self.map_coeffs(self.l(), move |g| g.scale(c))
    }

    pub fn scale_left(&self, g: &Grassmann) -> Self {
        let g = g.clone();
        self.map_coeffs(self.l(), move |c| &g * c)
    }

    pub fn scale_right(&self, g: &Grassmann) -> Self {
        let g = g.clone();
        self.map_coeffs(self.l(), move |c| c * &g)
    }

    pub fn derivative(&self) -> Self {
        match self {
            AnalyticFn::Symbolic(p) => p.derivative().into(),
            AnalyticFn::Sampled(s) => {
                let s2 = s.clone();
                AnalyticFn::Sampled(Sampled::new(
                    s.l,
                    s.domain,
                    s.parity,
                    Arc::new(move |z, n| Ok(s2.jet(z, n + 1)?.split_off(1))),
                ))
            }
        }
    }

    pub fn embed(&self, l: usize) -> Self {
        assert!(l >= self.l());
        self.map_coeffs(l, move |c| c.embed(l))
    }

    pub fn truncate(&self, l: usize) -> Self {
        self.map_coeffs(l, move |c| c.truncate(l))
    }

    pub fn with_l(&self, l: usize) -> Result<Self> {
        match self {
            AnalyticFn::Symbolic(p) => {
                let mut terms = Vec::new();
                for (r, q) in p.terms() {
                    terms.push((*r, q.with_l(l)?));
                }
                Ok(ExpPoly::from_terms(l, terms).into())
            }
            AnalyticFn::Sampled(_) if l >= self.l() => Ok(self.embed(l)),
            AnalyticFn::Sampled(_) => Ok(self.truncate(l)),
        }
    }

    /// Complex-valued part (empty-subset coefficients).
    pub fn body(&self) -> Self {
        let l = self.l();
        self.map_coeffs(l, move |c| Grassmann::scalar(l, c.body()))
    }

    pub fn soul(&self) -> Self {
        self.map_coeffs(self.l(), |c| c.soul())
    }

    /// Complex coefficient function of one generator monomial ζ_S, lifted into Λ_l.
    pub fn component(&self, mask: u32) -> Self {
        let l = self.l();
        self.map_coeffs(l, move |c| Grassmann::scalar(l, c.coeff(mask)))
    }

    pub fn chop(&self, tol: f64) -> Self {
        match self {
            AnalyticFn::Symbolic(p) => p.map_laurent(p.l(), |q| q.chop(tol)).into(),
            AnalyticFn::Sampled(_) => self.clone(),
        }
    }

    /// Largest coefficient modulus of a symbolic function.
    pub fn coeff_max_abs(&self) -> Option<f64> {
        self.as_exp_poly().map(|p| p.max_abs())
    }

    /// Largest coefficient modulus of the values at `samples` points on |z| = radius.
    pub fn max_abs_on_circle(&self, radius: f64, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..samples {
            let t = 2.0 * PI * (k as f64 + 0.25) / samples as f64;
            let z = Complex64::from_polar(radius, t);
            worst = worst.max(self.eval_body(z)?.max_abs());
        }
        Ok(worst)
    }

    /// Coefficientwise comparison for symbolic pairs, circle sampling otherwise.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let diff = self.sub(other);
        if let Some(m) = diff.coeff_max_abs() {
            return m <= tol;
        }
        [0.5, 1.0, 2.0].iter().all(|&r| diff.max_abs_on_circle(r, 64).is_ok_and(|m| m <= tol))
    }

    /// Substitutes a body-valued inner map: (self∘inner)(z) = self(inner(z)).
    pub fn compose_body(&self, inner: &AnalyticFn, allow_sampled: bool) -> Result<Self> {
        let l = self.l();
        if let (AnalyticFn::Symbolic(p), AnalyticFn::Symbolic(q)) = (self, inner) {
            if !q.terms().iter().all(|t| t.1.is_body_only()) {
                return Err(Error::Invalid("inner map of compose_body must be body-valued".into()));
            }
            if let Some(r) = p.compose_body(q) {
                return Ok(r.into());
            }
        }
        if !allow_sampled {
            return Err(Error::UnsupportedComposition(
                "result leaves the Laurent/exponential family and sampled fallback is disabled".into(),
            ));
        }
        let outer = self.to_sampled();
        let inner_s = inner.to_sampled();
        let domain = inner_s.domain;
        let parity = outer.parity;
        Ok(AnalyticFn::Sampled(Sampled::new(
            l,
            domain,
            parity,
            Arc::new(move |z, n| {
                let ij = Jet { base: z, derivs: inner_s.jet(z, n)? };
                if !ij.derivs.iter().all(|d| d.is_body_only()) {
                    return Err(Error::Invalid("inner map of compose_body must be body-valued".into()));
                }
                let w = ij.derivs[0].body();
                let oj = Jet { base: w, derivs: outer.jet(w, n)?.into_iter().map(|g| g.with_l(l)).collect::<Result<_>>()? };
                Ok(ij.chain(&oj).derivs)
            }),
        )))
    }

    /// Superanalytic composition self(inner(z)) for an even inner map with nilpotent soul.
    pub fn compose(&self, inner: &AnalyticFn, allow_sampled: bool) -> Result<Self> {
        if self.l() != inner.l() {
            return Err(Error::GeneratorMismatch(self.l(), inner.l()));
        }
        match self.compose_symbolic(inner) {
            Err(Error::UnsupportedComposition(_)) if allow_sampled => Ok(self.compose_sampled(inner)),
            r => r,
        }
    }

    /// One closure for Σ_k f⁽ᵏ⁾(b)·sᵏ/k!, sharing a single outer jet per point.
    fn compose_sampled(&self, inner: &AnalyticFn) -> Self {
        let l = self.l();
        let outer = self.to_sampled();
        let inner_s = inner.to_sampled();
        let max_k = l / 2 + 1;
        let cache: Mutex<HashMap<(u64, u64), Vec<Grassmann>>> = Mutex::new(HashMap::new());
        AnalyticFn::Sampled(Sampled::new(
            l,
            inner_s.domain,
            outer.parity,
            Arc::new(move |z, n| {
                let key = (z.re.to_bits(), z.im.to_bits());
                if let Some(hit) = cache.lock().unwrap().get(&key).filter(|v| v.len() > n) {
                    return Ok(hit[..=n].to_vec());
                }
                let ij = inner_s.jet(z, n)?;
                let bj = Jet { base: z, derivs: ij.iter().map(|g| Grassmann::scalar(l, g.body())).collect() };
                let sj = Jet { base: z, derivs: ij.iter().map(|g| g.soul()).collect() };
                let w = ij[0].body();
                let oj: Vec<Grassmann> = outer.jet(w, n + max_k)?;
                let mut acc = Jet { base: z, derivs: vec![Grassmann::zero(l); n + 1] };
                let mut power = Jet { base: z, derivs: (0..=n).map(|k| if k == 0 { Grassmann::one(l) } else { Grassmann::zero(l) }).collect() };
                for k in 0..=max_k {
                    if k > 0 {
                        power = power.mul(&sj);
                        if power.derivs.iter().all(|d| d.is_zero()) {
                            break;
                        }
                    }
                    let dk = bj.chain(&Jet { base: w, derivs: oj[k..=k + n].to_vec() });
                    acc = acc.add(&dk.mul(&power).scale_re(1.0 / factorial(k)));
                }
                let mut cache = cache.lock().unwrap();
                if cache.len() >= JET_CACHE_LIMIT {
                    cache.clear();
                }
                cache.insert(key, acc.derivs.clone());
                Ok(acc.derivs)
            }),
        ))
    }

    fn compose_symbolic(&self, inner: &AnalyticFn) -> Result<Self> {
        let allow_sampled = false;
        let b = inner.body();
        let s = inner.soul();
        let mut out = self.compose_body(&b, allow_sampled)?;
        let mut deriv = self.clone();
        let mut power = AnalyticFn::one(self.l());
        let max_k = self.l() + 1;
        for k in 1..=max_k {
            power = power.mul(&s);
            if power.is_zero() {
                break;
            }
            deriv = deriv.derivative();
            let term = deriv.compose_body(&b, allow_sampled)?.mul(&power).scale_c(Complex64::new(1.0 / factorial(k), 0.0));
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Multiplicative inverse of a unit.
    ///
    /// Symbolic units are c·z^k·e^{λz}·(1 + s) with s soul-valued.
    pub fn invert(&self, allow_sampled: bool) -> Result<Self> {
        if let Some(u) = self.unit_parts() {
            let UnitParts { power, body, rate, rel_soul } = u;
            let l = self.l();
            // (1+s)^{-1} = Σ (−s)^m
            let mut inv = Laurent::constant(Grassmann::one(l));
            let mut p = Laurent::constant(Grassmann::one(l));
            let neg = rel_soul.neg();
            loop {
                p = p.mul(&neg);
                if p.is_zero() {
                    break;
                }
                inv = inv.add(&p);
            }
            let lead = Laurent::monomial(-power, Grassmann::scalar(l, body.inv()));
            return Ok(ExpPoly::from_terms(l, vec![(-rate, lead.mul(&inv))]).into());
        }
        if !allow_sampled {
            return Err(Error::NonInvertible("function is not a unit of the Laurent/exponential family".into()));
        }
        let s = self.to_sampled();
        Ok(AnalyticFn::Sampled(Sampled::new(
            s.l,
            s.domain,
            s.parity,
            Arc::new(move |z, n| Ok(Jet { base: z, derivs: s.jet(z, n)? }.reciprocal()?.derivs)),
        )))
    }

    /// Decomposes c·z^k·e^{λz}·(1 + s), or None when not of that shape.
    pub fn unit_parts(&self) -> Option<UnitParts> {
        let p = self.as_exp_poly()?;
        let [(rate, poly)] = p.terms() else { return None };
        let body = poly.body();
        if body.coeffs().len() != 1 {
            return None;
        }
        let (&power, c) = body.coeffs().iter().next()?;
        let c = c.body();
        let l = p.l();
        let rel_soul = poly.soul().scale_c(c.inv()).mul(&Laurent::monomial(-power, Grassmann::one(l)));
        Some(UnitParts { power, body: c, rate: *rate, rel_soul })
    }

    /// Returns (n, q) with self = zⁿ·exp(q), q symbolic, for units.
    pub fn log_unit(&self) -> Result<(i32, AnalyticFn)> {
        let u = self.unit_parts().ok_or_else(|| Error::NonInvertible("function is not a unit".into()))?;
        let l = self.l();
        let mut q = Laurent::from_complex(l, [(0, u.body.ln()), (1, u.rate)]);
        let mut p = Laurent::constant(Grassmann::one(l));
        let mut m = 1usize;
        loop {
            p = p.mul(&u.rel_soul);
            if p.is_zero() {
                break;
            }
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            q = q.add(&p.scale_c(Complex64::new(sign / m as f64, 0.0)));
            m += 1;
        }
        Ok((u.power, q.into()))
    }

    /// exp(self) for a + λz + (soul Laurent); other shapes need the sampled fallback.
    pub fn exp(&self, allow_sampled: bool) -> Result<Self> {
        let l = self.l();
        if let Some(p) = self.as_laurent() {
            let body = p.body();
            if body.coeffs().keys().all(|&k| k == 0 || k == 1) {
                let a = body.coeff(0).body();
                let rate = body.coeff(1).body();
                let s = p.sub(&body);
                let mut series = Laurent::constant(Grassmann::one(l));
                let mut power = Laurent::constant(Grassmann::one(l));
                let mut m = 1usize;
                loop {
                    power = power.mul(&s);
                    if power.is_zero() {
                        break;
                    }
                    series = series.add(&power.scale_c(Complex64::new(1.0 / factorial(m), 0.0)));
                    m += 1;
                }
                return Ok(ExpPoly::from_terms(l, vec![(rate, series.scale_c(a.exp()))]).into());
            }
        }
        if !allow_sampled {
            return Err(Error::UnsupportedComposition("exponential leaves the Laurent/exponential family".into()));
        }
        let exp_fn = AnalyticFn::Sampled(Sampled::new(
            l,
            Domain::Entire,
            Parity::Even,
            Arc::new(move |z, n| Ok(vec![Grassmann::scalar(l, z.exp()); n + 1])),
        ));
        exp_fn.compose(self, true)
    }
}

/// Shape data of a symbolic unit c·z^k·e^{λz}·(1 + s).
#[derive(Clone, Debug)]
pub struct UnitParts {
    pub power: i32,
    pub body: Complex64,
    pub rate: Complex64,
    /// s as a Laurent polynomial with soul coefficients.
    pub rel_soul: Laurent,
}

/// Argument-principle degree of the body of `f` around |z| = 1.
pub fn winding_degree(f: &AnalyticFn) -> Result<i64> {
    let mut prev: Option<Complex64> = None;
    let mut first = ZERO;
    let mut total = 0.0;
    let mut min_abs = f64::INFINITY;
    for k in 0..WINDING_SAMPLES {
        let t = 2.0 * PI * k as f64 / WINDING_SAMPLES as f64;
        let v = f.eval_body(Complex64::from_polar(1.0, t))?.body();
        min_abs = min_abs.min(v.norm());
        if let Some(p) = prev {
            total += (v / p).arg();
        } else {
            first = v;
        }
        prev = Some(v);
    }
    if min_abs < BODY_VANISH_TOL {
        return Err(Error::BodyVanishes(min_abs));
    }
    total += (first / prev.unwrap()).arg();
    Ok((total / (2.0 * PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zeta(l: usize, j: usize) -> Grassmann {
        Grassmann::generator(l, j)
    }

    #[test]
    fn square_at_nilpotent_shift() {
        let f = AnalyticFn::monomial_c(2, 2, ONE);
        let s = &zeta(2, 1) * &zeta(2, 2);
        let z = Grassmann::one(2) + &s;
        assert!(f.eval_at(&z).unwrap().approx_eq(&(Grassmann::one(2) + s.scale_re(2.0)), 1e-15));
    }

    #[test]
    fn reciprocal_at_nilpotent_shift() {
        let f = AnalyticFn::monomial_c(2, -1, ONE);
        let s = &zeta(2, 1) * &zeta(2, 2);
        let z = Grassmann::real(2, 2.0) + &s;
        let expected = Grassmann::real(2, 0.5) - s.scale_re(0.25);
        assert!(f.eval_at(&z).unwrap().approx_eq(&expected, 1e-15));
        assert!(matches!(f.eval_at(&s), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn exponential_at_quartic_soul() {
        let l = 4;
        let f = AnalyticFn::exp_affine(&Grassmann::one(l), &Grassmann::scalar(l, c(0.0, PI)), None).unwrap();
        let s = &(&zeta(l, 1) * &zeta(l, 2)) * &(&zeta(l, 3) * &zeta(l, 4));
        let z = Grassmann::one(l) + &s;
        let e = c(0.0, PI).exp();
        let expected = (Grassmann::one(l) + s.scale(c(0.0, PI))).scale(e);
        assert!(f.eval_at(&z).unwrap().approx_eq(&expected, 1e-14));
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_degree(&AnalyticFn::monomial_c(2, 3, ONE)).unwrap(), 3);
        let f = AnalyticFn::constant_c(2, c(2.0, 0.0)).add(&AnalyticFn::monomial(5, &zeta(2, 1) * &zeta(2, 2)));
        assert_eq!(winding_degree(&f).unwrap(), 0);
        assert_eq!(winding_degree(&AnalyticFn::monomial_c(2, -2, c(3.0, 0.0))).unwrap(), -2);
        let vanishing = AnalyticFn::z(1).sub(&AnalyticFn::one(1));
        assert!(matches!(winding_degree(&vanishing), Err(Error::BodyVanishes(_))));
    }

    #[test]
    fn compose_body_families() {
        let l = 1;
        let f = Laurent::from_complex(l, [(-2, c(1.0, 0.0)), (3, c(2.0, 0.0))]);
        let f: AnalyticFn = f.into();
        let inv = AnalyticFn::monomial_c(l, -1, ONE);
        let got = f.compose_body(&inv, false).unwrap();
        let want: AnalyticFn = Laurent::from_complex(l, [(2, c(1.0, 0.0)), (-3, c(2.0, 0.0))]).into();
        assert!(got.approx_eq(&want, 1e-15));
        let shift = AnalyticFn::z(l).add(&AnalyticFn::constant_c(l, c(1.0, 0.0)));
        assert!(matches!(f.compose_body(&shift, false), Err(Error::UnsupportedComposition(_))));
        let sampled = f.compose_body(&shift, true).unwrap();
        let z0 = c(0.3, 0.4);
        let direct = f.eval_body(z0 + 1.0).unwrap();
        assert!(sampled.eval_body(z0).unwrap().approx_eq(&direct, 1e-12));
    }

    #[test]
    fn sampled_derivative_matches_symbolic() {
        let l = 2;
        let f: AnalyticFn = Laurent::from_pairs(l, [(3, zeta(l, 1) * zeta(l, 2)), (-1, Grassmann::real(l, 2.0))]).into();
        let s = AnalyticFn::Sampled(f.to_sampled());
        let z0 = c(0.7, -0.2);
        let a = s.derivative().derivative().eval_body(z0).unwrap();
        let b = f.derivative().derivative().eval_body(z0).unwrap();
        assert!(a.approx_eq(&b, 1e-12));
    }

    #[test]
    fn unit_inverse_and_log() {
        let l = 2;
        let s = &zeta(l, 1) * &zeta(l, 2);
        let f: AnalyticFn = Laurent::from_pairs(l, [(2, Grassmann::real(l, 3.0)), (4, s.clone())]).into();
        let inv = f.invert(false).unwrap();
        assert!(f.mul(&inv).approx_eq(&AnalyticFn::one(l), 1e-14));
        let (n, q) = f.log_unit().unwrap();
        assert_eq!(n, 2);
        let back = q.exp(false).unwrap().mul(&AnalyticFn::monomial_c(l, 2, ONE));
        assert!(back.approx_eq(&f, 1e-14));
    }
}
