//! Theta-function types and N=2 supertori over ℂ/(ℤ + τℤ), plus the N=1
//! spin-structure tori.
//!
//! A type assigns a_γ, b_γ ∈ Λ⁰ to lattice vectors γ = m + nτ. Only the values on
//! the generators 1 and τ are stored; the rest follow from additivity of a and
//! b_{γ₁+γ₂} = b_{γ₁} + b_{γ₂} + a_{γ₁}γ₂ (mod ℤ on the body).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analytic::AnalyticFn;
use crate::cech::{check_atlas_cocycle, Atlas, Cover, Transition};
use crate::error::{Error, Result};
use crate::grassmann::Grassmann;
use crate::supermap::{Coords, N1Map, N2Map, DEFAULT_SAMPLES};

/// Tolerance for integrality of bodies.
pub const INTEGER_TOL: f64 = 1e-9;
/// Tolerance for vanishing of souls.
pub const SOUL_TOL: f64 = 1e-12;

const TWO_PI_I: Complex64 = Complex64 { re: 0.0, im: 2.0 * PI };

/// Values of the type maps on the lattice generators 1 and τ.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaType {
    pub tau: Complex64,
    pub a1: Grassmann,
    pub a_tau: Grassmann,
    pub b1: Grassmann,
    pub b_tau: Grassmann,
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= INTEGER_TOL
}

/// p + qτ = w with real p, q.
fn lattice_coordinates(w: Complex64, tau: Complex64) -> (f64, f64) {
    let q = w.im / tau.im;
    (w.re - q * tau.re, q)
}

impl ThetaType {
    pub fn zero(l: usize, tau: Complex64) -> Self {
        let z = Grassmann::zero(l);
        ThetaType { tau, a1: z.clone(), a_tau: z.clone(), b1: z.clone(), b_tau: z }
    }

    /// a ≡ 0, b₁ = 0, b_τ = 1/2.
    pub fn spin(l: usize, tau: Complex64) -> Self {
        ThetaType { b_tau: Grassmann::real(l, 0.5), ..Self::zero(l, tau) }
    }

    /// Type of the Jacobi theta function Σ e^{πin²τ + 2πinz}.
    pub fn jacobi(l: usize, tau: Complex64) -> Self {
        ThetaType { a_tau: Grassmann::real(l, -1.0), b_tau: Grassmann::scalar(l, -tau / 2.0), ..Self::zero(l, tau) }
    }

    /// Type of e^{az² + bz + c}: a_γ = (−i/π)aγ, b_γ = (−i/2π)(bγ + aγ²).
    pub fn trivial_from(a: &Grassmann, b: &Grassmann, tau: Complex64) -> Self {
        let k = Complex64::new(0.0, -1.0 / PI);
        let h = Complex64::new(0.0, -0.5 / PI);
        ThetaType {
            tau,
            a1: a.scale(k),
            a_tau: a.scale(k * tau),
            b1: (b + a).scale(h),
            b_tau: (&b.scale(tau) + &a.scale(tau * tau)).scale(h),
        }
    }

    pub fn l(&self) -> usize {
        self.a1.l()
    }

    fn check_shape(&self) -> Result<()> {
        if self.tau.im <= 0.0 {
            return Err(Error::Invalid(format!("Im τ = {} must be positive", self.tau.im)));
        }
        let l = self.l();
        for (name, x) in [("a_tau", &self.a_tau), ("b1", &self.b1), ("b_tau", &self.b_tau)] {
            if x.l() != l {
                return Err(Error::GeneratorMismatch(l, x.l()));
            }
            if !x.is_even() {
                return Err(Error::Parity(format!("{name} must be even")));
            }
        }
        if !self.a1.is_even() {
            return Err(Error::Parity("a1 must be even".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &ThetaType) -> ThetaType {
        ThetaType {
            tau: self.tau,
            a1: &self.a1 + &other.a1,
            a_tau: &self.a_tau + &other.a_tau,
            b1: &self.b1 + &other.b1,
            b_tau: &self.b_tau + &other.b_tau,
        }
    }

    pub fn neg(&self) -> ThetaType {
        ThetaType { tau: self.tau, a1: -&self.a1, a_tau: -&self.a_tau, b1: -&self.b1, b_tau: -&self.b_tau }
    }

    pub fn sub(&self, other: &ThetaType) -> ThetaType {
        self.add(&other.neg())
    }

    /// Component of every value at one generator monomial (body-only type over Λ_l).
    pub fn component(&self, mask: u32) -> ThetaType {
        let l = self.l();
        let pick = |x: &Grassmann| Grassmann::scalar(l, x.coeff(mask));
        ThetaType { tau: self.tau, a1: pick(&self.a1), a_tau: pick(&self.a_tau), b1: pick(&self.b1), b_tau: pick(&self.b_tau) }
    }

    /// a_{m+nτ}.
    pub fn a(&self, m: i64, n: i64) -> Grassmann {
        &self.a1.scale_re(m as f64) + &self.a_tau.scale_re(n as f64)
    }

    /// b_{m+nτ} from the generator values.
    pub fn b(&self, m: i64, n: i64) -> Grassmann {
        let (mf, nf) = (m as f64, n as f64);
        let mut out = &self.b1.scale_re(mf) + &self.b_tau.scale_re(nf);
        out += &self.a1.scale_re(mf * (mf - 1.0) / 2.0);
        out += &self.a_tau.scale(self.tau * (nf * (nf - 1.0) / 2.0));
        out += &self.a1.scale(self.tau * (mf * nf));
        out
    }

    /// a₁τ − a_τ.
    pub fn chern_element(&self) -> Grassmann {
        &self.a1.scale(self.tau) - &self.a_tau
    }

    /// g_γ(z) = e^{2πi(a_γ z + b_γ)}.
    pub fn multiplier(&self, m: i64, n: i64) -> Result<AnalyticFn> {
        let scale = self.b(m, n).scale(TWO_PI_I).exp();
        AnalyticFn::exp_affine(&scale, &self.a(m, n).scale(TWO_PI_I), None)
    }

    /// Transition (z + γ, θ⁺g_γ, θ⁻g_γ⁻¹), without validating the type.
    pub fn transition_unchecked(&self, m: i64, n: i64) -> Result<N2Map> {
        let l = self.l();
        let gamma = Complex64::new(m as f64, 0.0) + self.tau * n as f64;
        let g = self.multiplier(m, n)?;
        let f = AnalyticFn::z(l).add(&AnalyticFn::constant_c(l, gamma));
        N2Map::new(Coords::Homogeneous, f, [AnalyticFn::zero(l), AnalyticFn::zero(l)], [g.clone(), g.invert(false)?])
    }
}

/// Checks the type relations on generator pairs and returns the Chern integer body(a₁τ − a_τ).
pub fn validate_theta_type(t: &ThetaType) -> Result<i64> {
    t.check_shape()?;
    let gens = [(1i64, 0i64), (0, 1)];
    for &(m1, n1) in &gens {
        for &(m2, n2) in &gens {
            let gamma2 = Complex64::new(m2 as f64, 0.0) + t.tau * n2 as f64;
            let lhs = t.b(m1 + m2, n1 + n2);
            let rhs = &(&t.b(m1, n1) + &t.b(m2, n2)) + &t.a(m1, n1).scale(gamma2);
            let d = &lhs - &rhs;
            let body = d.body();
            if !near_integer(body.re) || body.im.abs() > INTEGER_TOL || d.soul().max_abs() > SOUL_TOL {
                return Err(Error::InconsistentType(format!(
                    "b relation fails on ({}, {}) by {d}",
                    if n1 == 0 { "1" } else { "tau" },
                    if n2 == 0 { "1" } else { "tau" }
                )));
            }
        }
    }
    let c = t.chern_element();
    let body = c.body();
    if !near_integer(body.re) || body.im.abs() > INTEGER_TOL {
        return Err(Error::InconsistentType(format!("chern body {body} is not an integer")));
    }
    if c.soul().max_abs() > SOUL_TOL {
        return Err(Error::InconsistentType("chern element has a soul".into()));
    }
    Ok(body.re.round() as i64)
}

/// Whether the type is that of e^{az² + bz + c} for some even a, b, c.
///
/// a is fixed by a₁ and forces a_τ = a₁τ; with a known, b is fixed mod ℤ by b₁
/// and b_τ must then satisfy b_τ − b₁τ + (a₁/2)(τ − τ²) ∈ ℤ + τℤ with no soul.
pub fn is_trivial_type(t: &ThetaType) -> bool {
    let c = t.chern_element();
    if c.max_abs() > SOUL_TOL.max(INTEGER_TOL * 1e-3) {
        return false;
    }
    let x = &(&t.b_tau - &t.b1.scale(t.tau)) + &t.a1.scale((t.tau - t.tau * t.tau) / 2.0);
    let (p, q) = lattice_coordinates(x.body(), t.tau);
    near_integer(p) && near_integer(q) && x.soul().max_abs() <= SOUL_TOL
}

pub fn types_equivalent(t1: &ThetaType, t2: &ThetaType) -> bool {
    (t1.tau - t2.tau).norm() <= 1e-12 && t1.l() == t2.l() && is_trivial_type(&t1.sub(t2))
}

/// N=2 supertorus from a validated type.
#[derive(Clone, Debug)]
pub struct TorusStructure {
    pub theta_type: ThetaType,
    pub chern: i64,
    pub h1: N2Map,
    pub h_tau: N2Map,
}

impl TorusStructure {
    pub fn tau(&self) -> Complex64 {
        self.theta_type.tau
    }

    /// H_{m+nτ}.
    pub fn transition(&self, m: i64, n: i64) -> Result<N2Map> {
        self.theta_type.transition_unchecked(m, n)
    }

    pub fn atlas(&self) -> Result<Atlas> {
        torus_atlas(&self.theta_type)
    }
}

/// Generator transitions of a (possibly invalid) type as an atlas.
pub fn torus_atlas(t: &ThetaType) -> Result<Atlas> {
    let mut transitions = BTreeMap::new();
    transitions.insert("1".to_string(), Transition::N2(t.transition_unchecked(1, 0)?));
    transitions.insert("tau".to_string(), Transition::N2(t.transition_unchecked(0, 1)?));
    transitions.insert("1+tau".to_string(), Transition::N2(t.transition_unchecked(1, 1)?));
    Ok(Atlas { cover: Cover::Torus { tau: t.tau }, transitions })
}

pub fn make_supertorus(t: &ThetaType) -> Result<TorusStructure> {
    let chern = validate_theta_type(t)?;
    let s = TorusStructure { theta_type: t.clone(), chern, h1: t.transition_unchecked(1, 0)?, h_tau: t.transition_unchecked(0, 1)? };
    let report = check_atlas_cocycle(&s.atlas()?, DEFAULT_SAMPLES, 1e-9)?;
    if !report.passed() {
        return Err(Error::InconsistentType(format!("cocycle residual {:e}", report.max_residual())));
    }
    Ok(s)
}

pub fn supertori_equivalent(a: &TorusStructure, b: &TorusStructure) -> bool {
    types_equivalent(&a.theta_type, &b.theta_type)
}

// ---------------------------------------------------------------------------
// N=1 spin tori
// ---------------------------------------------------------------------------

/// Spin structure data for an N=1 torus.
#[derive(Clone, Debug, PartialEq)]
pub enum SpinKind {
    /// θ ↦ ε₁θ along 1 and θ ↦ ε₂θ along τ, (ε₁, ε₂) ≠ (1, 1).
    Nontrivial { eps1: i8, eps2: i8 },
    /// Shift by b ∈ Λ⁰ with body τ, and odd δ along τ.
    Trivial { b: Grassmann, delta: Grassmann },
}

fn spin_validate(kind: &SpinKind, tau: Complex64) -> Result<()> {
    if tau.im <= 0.0 {
        return Err(Error::Invalid(format!("Im τ = {} must be positive", tau.im)));
    }
    match kind {
        SpinKind::Nontrivial { eps1, eps2 } => {
            let ok = |e: i8| e == 1 || e == -1;
            if !ok(*eps1) || !ok(*eps2) || (*eps1, *eps2) == (1, 1) {
                return Err(Error::Invalid(format!("invalid spin signs ({eps1}, {eps2})")));
            }
        }
        SpinKind::Trivial { b, delta } => {
            if (b.body() - tau).norm() > 1e-12 || !b.is_even() {
                return Err(Error::Invalid("b must be even with body τ".into()));
            }
            if !delta.is_odd() && !delta.is_zero() {
                return Err(Error::Parity("δ must be odd".into()));
            }
            if delta.l() != b.l() {
                return Err(Error::GeneratorMismatch(b.l(), delta.l()));
            }
        }
    }
    Ok(())
}

/// H_{m+nτ} of the spin torus over Λ_l.
pub fn spin_transition_n1(kind: &SpinKind, tau: Complex64, l: usize, m: i64, n: i64) -> Result<N1Map> {
    spin_validate(kind, tau)?;
    let zero = AnalyticFn::zero(l);
    match kind {
        SpinKind::Nontrivial { eps1, eps2 } => {
            let sign = (*eps1 as f64).powi(m as i32) * (*eps2 as f64).powi(n as i32);
            let shift = Complex64::new(m as f64, 0.0) + tau * n as f64;
            let f = AnalyticFn::z(l).add(&AnalyticFn::constant_c(l, shift));
            N1Map::new(f, zero.clone(), zero, AnalyticFn::constant_c(l, Complex64::new(sign, 0.0)))
        }
        SpinKind::Trivial { b, delta } => {
            let b = b.with_l(l)?;
            let delta = delta.with_l(l)?;
            let shift = &Grassmann::real(l, m as f64) + &b.scale_re(n as f64);
            let d = AnalyticFn::constant(delta.scale_re(n as f64));
            let f = AnalyticFn::z(l).add(&AnalyticFn::constant(shift));
            N1Map::new(f, d.clone(), d, AnalyticFn::one(l))
        }
    }
}

/// Generator atlas of an N=1 spin torus, cocycle-checked.
pub fn spin_structure_torus_n1(kind: &SpinKind, tau: Complex64, l: usize) -> Result<Atlas> {
    let mut transitions = BTreeMap::new();
    transitions.insert("1".to_string(), Transition::N1(spin_transition_n1(kind, tau, l, 1, 0)?));
    transitions.insert("tau".to_string(), Transition::N1(spin_transition_n1(kind, tau, l, 0, 1)?));
    transitions.insert("1+tau".to_string(), Transition::N1(spin_transition_n1(kind, tau, l, 1, 1)?));
    let atlas = Atlas { cover: Cover::Torus { tau }, transitions };
    let report = check_atlas_cocycle(&atlas, DEFAULT_SAMPLES, 1e-9)?;
    if !report.passed() {
        return Err(Error::InconsistentType(format!("spin cocycle residual {:e}", report.max_residual())));
    }
    Ok(atlas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supermap::f2_functor;

    const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

    /// Σ_{|n|≤30} e^{πin²τ + 2πinz}.
    fn jacobi_theta(z: Complex64, tau: Complex64) -> Complex64 {
        (-30..=30).map(|n: i32| (I * PI * (n * n) as f64 * tau + 2.0 * I * PI * n as f64 * z).exp()).sum()
    }

    #[test]
    fn jacobi_type_matches_series() {
        let tau = Complex64::new(0.1, 1.1);
        let t = ThetaType::jacobi(0, tau);
        assert_eq!(validate_theta_type(&t).unwrap(), 1);
        for k in 0..20 {
            let z = Complex64::new(-0.4 + 0.045 * k as f64, 0.3 - 0.02 * k as f64);
            let th = jacobi_theta(z, tau);
            assert!((jacobi_theta(z + 1.0, tau) - th).norm() < 1e-10 * th.norm().max(1.0));
            let g = t.multiplier(0, 1).unwrap().eval_body(z).unwrap().body();
            assert!((jacobi_theta(z + tau, tau) - g * th).norm() < 1e-9 * th.norm().max(1.0));
        }
    }

    #[test]
    fn trivial_type_example() {
        let tau = Complex64::new(0.3, 0.9);
        let t = ThetaType::trivial_from(&Grassmann::one(2), &Grassmann::zero(2), tau);
        assert_eq!(validate_theta_type(&t).unwrap(), 0);
        assert!(is_trivial_type(&t));
    }

    #[test]
    fn half_integer_chern_is_rejected() {
        let t = ThetaType { a_tau: Grassmann::real(0, 0.5), ..ThetaType::zero(0, I) };
        assert!(matches!(validate_theta_type(&t), Err(Error::InconsistentType(_))));
    }

    #[test]
    fn spin_type_is_nontrivial() {
        let t = ThetaType::spin(1, I);
        assert_eq!(validate_theta_type(&t).unwrap(), 0);
        assert!(!is_trivial_type(&t));
        assert!(types_equivalent(&t, &t));
        let s = make_supertorus(&t).unwrap();
        let h = s.transition(2, 3).unwrap();
        assert!(h.g[0].approx_eq(&AnalyticFn::constant_c(1, Complex64::new(-1.0, 0.0)), 1e-12));
        assert!(h.g[1].approx_eq(&AnalyticFn::constant_c(1, Complex64::new(-1.0, 0.0)), 1e-12));
        assert!(!supertori_equivalent(&s, &make_supertorus(&ThetaType::zero(1, I)).unwrap()));
    }

    #[test]
    fn jacobi_torus_cocycle_and_perturbation() {
        let tau = Complex64::new(0.0, 1.0);
        let t = ThetaType::jacobi(1, tau);
        let s = make_supertorus(&t).unwrap();
        let rep = check_atlas_cocycle(&s.atlas().unwrap(), 32, 1e-9).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let bad = ThetaType { a_tau: &t.a_tau + &Grassmann::real(1, 0.1), ..t };
        let rep = check_atlas_cocycle(&torus_atlas(&bad).unwrap(), 32, 1e-9).unwrap();
        assert!(!rep.passed());
        assert!(rep.entries[0].max_residual() > 1e-3);
    }

    #[test]
    fn nonhomogeneous_torus_transition() {
        let t = ThetaType::jacobi(0, Complex64::new(0.2, 1.0));
        let h = t.transition_unchecked(0, 1).unwrap();
        let g = h.g[0].clone();
        let ginv = h.g[1].clone();
        let nh = h.to_nonhomogeneous();
        assert!(nh.g[0].approx_eq(&g.add(&ginv).scale_c(Complex64::new(0.5, 0.0)), 1e-14));
        assert!(nh.g[1].approx_eq(&g.sub(&ginv).scale_c(-I * 0.5), 1e-14));
        assert!(nh.check_superconformal(32, 1e-9).unwrap().passed());
    }

    #[test]
    fn spin_tori() {
        let tau = I;
        let kind = SpinKind::Nontrivial { eps1: -1, eps2: -1 };
        spin_structure_torus_n1(&kind, tau, 1).unwrap();
        let h = spin_transition_n1(&kind, tau, 1, 1, 1).unwrap();
        assert!(h.f.approx_eq(&AnalyticFn::z(1).add(&AnalyticFn::constant_c(1, 1.0 + tau)), 0.0));
        assert!(h.g.approx_eq(&AnalyticFn::one(1), 0.0));
        assert!(spin_structure_torus_n1(&SpinKind::Nontrivial { eps1: 1, eps2: 1 }, tau, 1).is_err());

        let z1 = Grassmann::generator(1, 1);
        let triv = SpinKind::Trivial { b: Grassmann::scalar(1, tau), delta: z1.clone() };
        spin_structure_torus_n1(&triv, tau, 1).unwrap();
        let h = spin_transition_n1(&triv, tau, 1, 0, 1).unwrap();
        assert_eq!(h.xi, AnalyticFn::constant(z1.clone()));
        assert_eq!(h.psi, AnalyticFn::constant(z1));

        // F2 of the nontrivial transition is the spin supertorus transition
        let kind = SpinKind::Nontrivial { eps1: 1, eps2: -1 };
        let spin = make_supertorus(&ThetaType::spin(1, tau)).unwrap();
        for (m, n) in [(1, 0), (0, 1), (2, 3)] {
            let h2 = f2_functor(&spin_transition_n1(&kind, tau, 1, m, n).unwrap(), false).unwrap();
            assert!(h2.distance(&spin.transition(m, n).unwrap(), 32).unwrap() < 1e-12);
        }
    }
}
