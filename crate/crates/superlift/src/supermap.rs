//! N=1 and N=2 superanalytic coordinate maps.
//!
//! A superfunction over Λ_L with n odd coordinates is an [`AnalyticFn`] over
//! Λ_{L+n} whose generators L+1..L+n stand for the odd coordinates (θ⁺, θ⁻ or
//! θ₁, θ₂ for N=2, θ for N=1). Maps are stored by their defining component
//! data and expanded into superfunctions on demand.

use std::f64::consts::FRAC_1_SQRT_2;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analytic::AnalyticFn;
use crate::error::{Error, Result};
use crate::grassmann::{Grassmann, Parity, MAX_L};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default number of circle samples used by condition checks.
pub const DEFAULT_SAMPLES: usize = 32;
/// Default residual tolerance for condition checks.
pub const DEFAULT_TOL: f64 = 1e-9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Sample points on the unit circle, offset away from the real axis.
pub fn circle_points(samples: usize) -> Vec<Complex64> {
    (0..samples).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / samples as f64)).collect()
}

/// Largest coefficient modulus of the values of `f` at the sample points.
pub fn sampled_norm(f: &AnalyticFn, samples: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for z in circle_points(samples) {
        worst = worst.max(f.eval_body(z)?.max_abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Superfunctions
// ---------------------------------------------------------------------------

/// The odd coordinate θ_j (0-based among the odd coordinates) as a constant superfunction.
pub fn theta(l: usize, n: usize, j: usize) -> AnalyticFn {
    AnalyticFn::constant(Grassmann::generator(l + n, l + j + 1))
}

/// θ^c for a bitmask c over the odd coordinates, in increasing index order.
pub fn theta_monomial(l: usize, n: usize, c: u32) -> AnalyticFn {
    AnalyticFn::constant(Grassmann::monomial(l + n, c << l, Complex64::new(1.0, 0.0)))
}

/// F_c in F = Σ_c θ^c F_c(z), as a function over Λ_l.
pub fn theta_component(f: &AnalyticFn, l: usize, c: u32) -> AnalyticFn {
    let low = (1u32 << l) - 1;
    let nc = c.count_ones();
    f.map_coeffs(l, move |g| {
        Grassmann::from_terms(
            l,
            g.terms()
                .iter()
                .filter(|(m, _)| m >> l == c)
                .map(|&(m, v)| {
                    let s = m & low;
                    let sign = if (s.count_ones() * nc) % 2 == 1 { -1.0 } else { 1.0 };
                    (s, v * sign)
                })
                .collect::<Vec<_>>(),
        )
    })
}

/// Σ_c θ^c F_c(z) from components over Λ_l.
pub fn from_theta_components(l: usize, n: usize, parts: &[(u32, AnalyticFn)]) -> AnalyticFn {
    let mut out = AnalyticFn::zero(l + n);
    for (cm, fc) in parts {
        out = out.add(&theta_monomial(l, n, *cm).mul(&fc.embed(l + n)));
    }
    out
}

fn left_derivative_fn(f: &AnalyticFn, gen: usize) -> AnalyticFn {
    f.map_coeffs(f.l(), move |g| g.left_derivative(gen))
}

/// ∂/∂θ_j + θ_k ∂/∂z on a superfunction over Λ_{l+n}.
fn superderivation(f: &AnalyticFn, l: usize, n: usize, j: usize, k: usize) -> AnalyticFn {
    left_derivative_fn(f, l + j + 1).add(&theta(l, n, k).mul(&f.derivative()))
}

/// D⁺ = ∂/∂θ⁺ + θ⁻∂/∂z (homogeneous N=2).
pub fn d_plus(f: &AnalyticFn, l: usize) -> AnalyticFn {
    superderivation(f, l, 2, 0, 1)
}

/// D⁻ = ∂/∂θ⁻ + θ⁺∂/∂z (homogeneous N=2).
pub fn d_minus(f: &AnalyticFn, l: usize) -> AnalyticFn {
    superderivation(f, l, 2, 1, 0)
}

/// D_j = ∂/∂θ_j + θ_j∂/∂z (nonhomogeneous N=2, j ∈ {0, 1}).
pub fn d_nonhomogeneous(f: &AnalyticFn, l: usize, j: usize) -> AnalyticFn {
    superderivation(f, l, 2, j, j)
}

/// D = ∂/∂θ + θ∂/∂z (N=1).
pub fn d_n1(f: &AnalyticFn, l: usize) -> AnalyticFn {
    superderivation(f, l, 1, 0, 0)
}

/// A point of superspace with coordinates in Λ_L.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperPoint {
    pub z: Grassmann,
    pub theta: Vec<Grassmann>,
}

impl SuperPoint {
    pub fn new(z: Grassmann, theta: Vec<Grassmann>) -> Result<Self> {
        if !z.is_even() {
            return Err(Error::Parity(format!("even coordinate has parity {}", z.parity())));
        }
        for (j, t) in theta.iter().enumerate() {
            if t.l() != z.l() {
                return Err(Error::GeneratorMismatch(z.l(), t.l()));
            }
            if !t.is_odd() {
                return Err(Error::Parity(format!("odd coordinate {} has parity {}", j + 1, t.parity())));
            }
        }
        Ok(SuperPoint { z, theta })
    }
}

/// A superanalytic map given by its superfunction components over Λ_{l+n}.
#[derive(Clone, Debug)]
pub struct SuperMap {
    pub l: usize,
    pub z: AnalyticFn,
    pub theta: Vec<AnalyticFn>,
}

impl SuperMap {
    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn identity(l: usize, n: usize) -> Self {
        SuperMap { l, z: AnalyticFn::z(l + n), theta: (0..n).map(|j| theta(l, n, j)).collect() }
    }

    fn components(&self) -> impl Iterator<Item = &AnalyticFn> {
        std::iter::once(&self.z).chain(self.theta.iter())
    }

    fn zip_with(&self, other: &SuperMap, f: impl Fn(&AnalyticFn, &AnalyticFn) -> AnalyticFn) -> SuperMap {
        assert_eq!(self.n(), other.n());
        SuperMap { l: self.l, z: f(&self.z, &other.z), theta: self.theta.iter().zip(&other.theta).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn sub(&self, other: &SuperMap) -> SuperMap {
        self.zip_with(other, |a, b| a.sub(b))
    }

    /// Evaluates a superfunction F at (Z, Θ) = self: Σ_c Θ^c F_c(Z).
    pub fn pull_back(&self, f: &AnalyticFn, allow_sampled: bool) -> Result<AnalyticFn> {
        let (l, n) = (self.l, self.n());
        if f.l() != l + n {
            return Err(Error::GeneratorMismatch(l + n, f.l()));
        }
        let mut out = AnalyticFn::zero(l + n);
        for cm in 0..(1u32 << n) {
            let fc = theta_component(f, l, cm);
            if fc.is_zero() {
                continue;
            }
            let mut term = fc.embed(l + n).compose(&self.z, allow_sampled)?;
            for j in (0..n).rev() {
                if cm >> j & 1 == 1 {
                    term = self.theta[j].mul(&term);
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// self ∘ inner.
    pub fn compose(&self, inner: &SuperMap, allow_sampled: bool) -> Result<SuperMap> {
        if self.l != inner.l || self.n() != inner.n() {
            return Err(Error::GeneratorMismatch(self.l + self.n(), inner.l + inner.n()));
        }
        Ok(SuperMap {
            l: self.l,
            z: inner.pull_back(&self.z, allow_sampled)?,
            theta: self.theta.iter().map(|t| inner.pull_back(t, allow_sampled)).collect::<Result<_>>()?,
        })
    }

    /// Image of a point with coordinates in Λ_l.
    pub fn apply(&self, p: &SuperPoint) -> Result<SuperPoint> {
        if p.theta.len() != self.n() {
            return Err(Error::Invalid(format!("point has {} odd coordinates, map has {}", p.theta.len(), self.n())));
        }
        if p.z.l() != self.l {
            return Err(Error::GeneratorMismatch(self.l, p.z.l()));
        }
        let eval = |f: &AnalyticFn| -> Result<Grassmann> {
            let mut out = Grassmann::zero(self.l);
            for cm in 0..(1u32 << self.n()) {
                let fc = theta_component(f, self.l, cm);
                if fc.is_zero() {
                    continue;
                }
                let mut term = fc.eval_at(&p.z)?;
                for j in (0..self.n()).rev() {
                    if cm >> j & 1 == 1 {
                        term = &p.theta[j] * &term;
                    }
                }
                out += &term;
            }
            Ok(out)
        };
        let z = eval(&self.z)?;
        let theta = self.theta.iter().map(eval).collect::<Result<Vec<_>>>()?;
        Ok(SuperPoint { z, theta })
    }

    /// Largest sampled residual between corresponding components.
    pub fn distance(&self, other: &SuperMap, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in self.components().zip(other.components()) {
            worst = worst.max(sampled_norm(&a.sub(b), samples)?);
        }
        Ok(worst)
    }

    /// Inverse of a map of the form id + n with n in the ideal of the ζ generators.
    pub fn invert_unipotent(&self, allow_sampled: bool) -> Result<SuperMap> {
        let id = SuperMap::identity(self.l, self.n());
        let nil = self.sub(&id);
        let mut k = id.clone();
        for _ in 0..self.l + 3 {
            k = id.sub(&nil.compose(&k, allow_sampled)?);
        }
        Ok(k)
    }
}

/// Coordinate transformations between nonhomogeneous and homogeneous N=2 superspace.
fn to_homogeneous_coords(l: usize) -> SuperMap {
    let s = c(FRAC_1_SQRT_2);
    let (t1, t2) = (theta(l, 2, 0), theta(l, 2, 1));
    SuperMap { l, z: AnalyticFn::z(l + 2), theta: vec![t1.add(&t2.scale_c(I)).scale_c(s), t1.sub(&t2.scale_c(I)).scale_c(s)] }
}

fn to_nonhomogeneous_coords(l: usize) -> SuperMap {
    let s = c(FRAC_1_SQRT_2);
    let (tp, tm) = (theta(l, 2, 0), theta(l, 2, 1));
    SuperMap { l, z: AnalyticFn::z(l + 2), theta: vec![tp.add(&tm).scale_c(s), tp.sub(&tm).scale_c(-I * s)] }
}

// ---------------------------------------------------------------------------
// Condition reports
// ---------------------------------------------------------------------------

/// Residuals of the conditions a map is checked against.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub residuals: Vec<(String, f64)>,
    pub failures: Vec<String>,
    pub tol: f64,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.residuals.iter().all(|(_, r)| *r <= self.tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, (_, r)| a.max(*r))
    }
}

/// Sampled residuals of the homogeneous N=2 superconformal conditions on a superfunction map.
pub fn n2_homogeneous_residuals(m: &SuperMap, samples: usize) -> Result<Vec<(String, f64)>> {
    let l = m.l;
    let (z, tp, tm) = (&m.z, &m.theta[0], &m.theta[1]);
    let conds = [
        ("D+theta-", d_plus(tm, l)),
        ("D-theta+", d_minus(tp, l)),
        ("D+z-theta-D+theta+", d_plus(z, l).sub(&tm.mul(&d_plus(tp, l)))),
        ("D-z-theta+D-theta-", d_minus(z, l).sub(&tp.mul(&d_minus(tm, l)))),
    ];
    conds.into_iter().map(|(name, f)| Ok((name.to_string(), sampled_norm(&f, samples)?))).collect()
}

// ---------------------------------------------------------------------------
// N=2 maps
// ---------------------------------------------------------------------------

/// Coordinate system of an N=2 map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coords {
    Homogeneous,
    Nonhomogeneous,
}

impl Coords {
    pub fn name(&self) -> &'static str {
        match self {
            Coords::Homogeneous => "homogeneous",
            Coords::Nonhomogeneous => "nonhomogeneous",
        }
    }
}

/// Restriction of coefficients to the subalgebra generated by the first m generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoeffMask {
    #[default]
    Unrestricted,
    FirstGenerators(usize),
}

impl CoeffMask {
    pub fn check(&self, what: &str, f: &AnalyticFn) -> Result<()> {
        let CoeffMask::FirstGenerators(m) = *self else { return Ok(()) };
        let allowed = (1u32 << m) - 1;
        let support = |g: &Grassmann| g.terms().iter().fold(0u32, |acc, (mask, _)| acc | mask);
        let used = match f.as_exp_poly() {
            Some(p) => p.terms().iter().flat_map(|t| t.1.coeffs().values()).fold(0u32, |acc, g| acc | support(g)),
            None => f.jet(Complex64::new(1.0, 0.0), 0)?.iter().fold(0u32, |acc, g| acc | support(g)),
        };
        if used & !allowed != 0 {
            return Err(Error::CoefficientMask(format!("{what} uses generators beyond the first {m}")));
        }
        Ok(())
    }
}

fn expect_parity(what: &str, f: &AnalyticFn, want: Parity) -> Result<()> {
    let p = f.parity();
    if p != want && !f.is_zero() {
        return Err(Error::Parity(format!("{what} must be {want}, found {p}")));
    }
    Ok(())
}

/// An N=2 superconformal map given by f, ψ, g in one coordinate system.
///
/// Homogeneous data is (f, ψ⁺, ψ⁻, g⁺, g⁻); nonhomogeneous data is
/// (f, ψ₁, ψ₂, g₁, g₂).
#[derive(Clone, Debug, PartialEq)]
pub struct N2Map {
    pub coords: Coords,
    pub f: AnalyticFn,
    pub psi: [AnalyticFn; 2],
    pub g: [AnalyticFn; 2],
}

impl N2Map {
    pub fn new(coords: Coords, f: AnalyticFn, psi: [AnalyticFn; 2], g: [AnalyticFn; 2]) -> Result<Self> {
        let l = f.l();
        if l > MAX_L {
            return Err(Error::TooManyGenerators(l, MAX_L));
        }
        for h in psi.iter().chain(g.iter()) {
            if h.l() != l {
                return Err(Error::GeneratorMismatch(l, h.l()));
            }
        }
        expect_parity("f", &f, Parity::Even)?;
        expect_parity("psi[0]", &psi[0], Parity::Odd)?;
        expect_parity("psi[1]", &psi[1], Parity::Odd)?;
        expect_parity("g[0]", &g[0], Parity::Even)?;
        expect_parity("g[1]", &g[1], Parity::Even)?;
        Ok(N2Map { coords, f, psi, g })
    }

    pub fn identity(l: usize, coords: Coords) -> Self {
        let (one, zero) = (AnalyticFn::one(l), AnalyticFn::zero(l));
        let g = match coords {
            Coords::Homogeneous => [one.clone(), one],
            Coords::Nonhomogeneous => [one, zero.clone()],
        };
        N2Map { coords, f: AnalyticFn::z(l), psi: [zero.clone(), zero], g }
    }

    pub fn l(&self) -> usize {
        self.f.l()
    }

    pub fn check_mask(&self, mask: CoeffMask) -> Result<()> {
        mask.check("f", &self.f)?;
        for (j, h) in self.psi.iter().enumerate() {
            mask.check(&format!("psi[{j}]"), h)?;
        }
        for (j, h) in self.g.iter().enumerate() {
            mask.check(&format!("g[{j}]"), h)?;
        }
        Ok(())
    }

    pub fn to_homogeneous(&self) -> N2Map {
        match self.coords {
            Coords::Homogeneous => self.clone(),
            Coords::Nonhomogeneous => {
                let s = c(FRAC_1_SQRT_2);
                let [p1, p2] = &self.psi;
                let [g1, g2] = &self.g;
                N2Map {
                    coords: Coords::Homogeneous,
                    f: self.f.clone(),
                    psi: [p1.add(&p2.scale_c(I)).scale_c(s), p1.sub(&p2.scale_c(I)).scale_c(s)],
                    g: [g1.add(&g2.scale_c(I)), g1.sub(&g2.scale_c(I))],
                }
            }
        }
    }

    pub fn to_nonhomogeneous(&self) -> N2Map {
        match self.coords {
            Coords::Nonhomogeneous => self.clone(),
            Coords::Homogeneous => {
                let s = c(FRAC_1_SQRT_2);
                let [pp, pm] = &self.psi;
                let [gp, gm] = &self.g;
                N2Map {
                    coords: Coords::Nonhomogeneous,
                    f: self.f.clone(),
                    psi: [pp.add(pm).scale_c(s), pp.sub(pm).scale_c(-I * s)],
                    g: [gp.add(gm).scale_c(c(0.5)), gp.sub(gm).scale_c(-I * 0.5)],
                }
            }
        }
    }

    pub fn in_coords(&self, coords: Coords) -> N2Map {
        match coords {
            Coords::Homogeneous => self.to_homogeneous(),
            Coords::Nonhomogeneous => self.to_nonhomogeneous(),
        }
    }

    /// Superfunction components (z̃, θ̃) in the map's own coordinate system.
    pub fn to_super(&self) -> SuperMap {
        let l = self.l();
        let n = 2;
        let comp = |parts: Vec<(u32, AnalyticFn)>| from_theta_components(l, n, &parts);
        let [p0, p1] = &self.psi;
        let [g0, g1] = &self.g;
        match self.coords {
            Coords::Homogeneous => {
                let z = comp(vec![
                    (0, self.f.clone()),
                    (1, g0.mul(p1)),
                    (2, g1.mul(p0)),
                    (3, p0.mul(p1).derivative()),
                ]);
                let tp = comp(vec![(0, p0.clone()), (1, g0.clone()), (3, p0.derivative())]);
                let tm = comp(vec![(0, p1.clone()), (2, g1.clone()), (3, p1.derivative().neg())]);
                SuperMap { l, z, theta: vec![tp, tm] }
            }
            Coords::Nonhomogeneous => {
                let z = comp(vec![
                    (0, self.f.clone()),
                    (1, g0.mul(p0).add(&g1.mul(p1))),
                    (2, g0.mul(p1).sub(&g1.mul(p0))),
                    (3, p0.mul(p1).derivative().neg()),
                ]);
                let t1 = comp(vec![(0, p0.clone()), (1, g0.clone()), (2, g1.neg()), (3, p1.derivative())]);
                let t2 = comp(vec![(0, p1.clone()), (1, g1.clone()), (2, g0.clone()), (3, p0.derivative().neg())]);
                SuperMap { l, z, theta: vec![t1, t2] }
            }
        }
    }

    /// Reads the defining data back from superfunction components.
    pub fn from_super(m: &SuperMap, coords: Coords) -> N2Map {
        let l = m.l;
        let f = theta_component(&m.z, l, 0);
        let psi = [theta_component(&m.theta[0], l, 0), theta_component(&m.theta[1], l, 0)];
        let g = match coords {
            Coords::Homogeneous => [theta_component(&m.theta[0], l, 1), theta_component(&m.theta[1], l, 2)],
            Coords::Nonhomogeneous => [theta_component(&m.theta[0], l, 1), theta_component(&m.theta[1], l, 1)],
        };
        N2Map { coords, f, psi, g }
    }

    /// Superfunction components in homogeneous coordinates.
    pub fn to_homogeneous_super(&self, allow_sampled: bool) -> Result<SuperMap> {
        let s = self.to_super();
        match self.coords {
            Coords::Homogeneous => Ok(s),
            Coords::Nonhomogeneous => {
                let l = self.l();
                to_homogeneous_coords(l).compose(&s, allow_sampled)?.compose(&to_nonhomogeneous_coords(l), allow_sampled)
            }
        }
    }

    /// ψ⁺′ψ⁻ − ψ⁺ψ⁻′ + g⁺g⁻ − f′ in homogeneous data.
    pub fn scalar_residual(&self) -> AnalyticFn {
        let h = self.to_homogeneous();
        let [pp, pm] = &h.psi;
        let [gp, gm] = &h.g;
        pp.derivative().mul(pm).sub(&pp.mul(&pm.derivative())).add(&gp.mul(gm)).sub(&h.f.derivative())
    }

    /// Checks the superconformal conditions by applying D± to the expanded map.
    pub fn check_superconformal(&self, samples: usize, tol: f64) -> Result<ConditionReport> {
        let mut residuals = n2_homogeneous_residuals(&self.to_homogeneous_super(true)?, samples)?;
        residuals.push(("scalar".to_string(), sampled_norm(&self.scalar_residual(), samples)?));
        let mut failures = Vec::new();
        let h = self.to_homogeneous();
        for (name, g) in [("g_plus", &h.g[0]), ("g_minus", &h.g[1])] {
            let mut min_body = f64::INFINITY;
            for z in circle_points(samples) {
                min_body = min_body.min(g.eval_body(z)?.body().norm());
            }
            if min_body < tol {
                failures.push(format!("{name} body vanishes at a sample point"));
            }
        }
        Ok(ConditionReport { residuals, failures, tol })
    }

    pub fn is_superconformal(&self, tol: f64) -> Result<bool> {
        Ok(self.check_superconformal(DEFAULT_SAMPLES, tol)?.passed())
    }

    /// self ∘ inner as superfunctions (no re-synthesis).
    pub fn compose_super(&self, inner: &N2Map, allow_sampled: bool) -> Result<SuperMap> {
        let inner = inner.in_coords(self.coords);
        self.to_super().compose(&inner.to_super(), allow_sampled)
    }

    /// self ∘ inner in the coordinate system of self.
    pub fn compose(&self, inner: &N2Map, allow_sampled: bool) -> Result<N2Map> {
        Ok(N2Map::from_super(&self.compose_super(inner, allow_sampled)?, self.coords))
    }

    /// Inverse map, found around the inverted body map.
    pub fn invert(&self, allow_sampled: bool) -> Result<N2Map> {
        let h = self.to_homogeneous();
        let l = h.l();
        let n = 2;
        let body = h.f.body();
        let lin = body.as_laurent().ok_or_else(|| Error::NonInvertible("body map is not a Laurent polynomial".into()))?;
        let powers: Vec<i32> = lin.coeffs().keys().copied().collect();
        let coef = |k| lin.coeff(k).body();
        let body_inv = if powers.iter().all(|&k| k == 0 || k == 1) && coef(1).norm() > 0.0 {
            AnalyticFn::z(l).sub(&AnalyticFn::constant_c(l, coef(0))).scale_c(coef(1).inv())
        } else if powers == [-1] {
            AnalyticFn::monomial_c(l, -1, coef(-1))
        } else {
            return Err(Error::NonInvertible("body map must be affine or c/z".into()));
        };
        let ln = l + n;
        let scale_inv = |g: &AnalyticFn| -> Result<AnalyticFn> {
            let r = g.body().invert(allow_sampled)?;
            Ok(r.compose_body(&body_inv, allow_sampled)?.embed(ln))
        };
        // A⁻¹ = (B⁻¹(w), ρ⁺/g⁺_B(B⁻¹ w), ρ⁻/g⁻_B(B⁻¹ w))
        let a_inv = SuperMap {
            l,
            z: body_inv.embed(ln),
            theta: vec![theta(l, n, 0).mul(&scale_inv(&h.g[0])?), theta(l, n, 1).mul(&scale_inv(&h.g[1])?)],
        };
        let nmap = a_inv.compose(&h.to_super(), allow_sampled)?;
        let k = nmap.invert_unipotent(allow_sampled)?;
        let inv = k.compose(&a_inv, allow_sampled)?;
        Ok(N2Map::from_super(&inv, Coords::Homogeneous).in_coords(self.coords))
    }

    /// Chops coefficients below tol in all component data.
    pub fn chop(&self, tol: f64) -> N2Map {
        N2Map {
            coords: self.coords,
            f: self.f.chop(tol),
            psi: [self.psi[0].chop(tol), self.psi[1].chop(tol)],
            g: [self.g[0].chop(tol), self.g[1].chop(tol)],
        }
    }

    pub fn embed(&self, l: usize) -> N2Map {
        N2Map {
            coords: self.coords,
            f: self.f.embed(l),
            psi: [self.psi[0].embed(l), self.psi[1].embed(l)],
            g: [self.g[0].embed(l), self.g[1].embed(l)],
        }
    }

    /// Largest sampled difference of the component data after conversion to homogeneous.
    pub fn distance(&self, other: &N2Map, samples: usize) -> Result<f64> {
        let (a, b) = (self.to_homogeneous(), other.to_homogeneous());
        let mut worst = sampled_norm(&a.f.sub(&b.f), samples)?;
        for j in 0..2 {
            worst = worst.max(sampled_norm(&a.psi[j].sub(&b.psi[j]), samples)?);
            worst = worst.max(sampled_norm(&a.g[j].sub(&b.g[j]), samples)?);
        }
        Ok(worst)
    }
}

// ---------------------------------------------------------------------------
// N=1 maps
// ---------------------------------------------------------------------------

/// An N=1 superanalytic map (f + θξ, ψ + θg).
#[derive(Clone, Debug, PartialEq)]
pub struct N1Map {
    pub f: AnalyticFn,
    pub xi: AnalyticFn,
    pub psi: AnalyticFn,
    pub g: AnalyticFn,
}

/// Choice of square root when building an N=1 superconformal map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl N1Map {
    pub fn new(f: AnalyticFn, xi: AnalyticFn, psi: AnalyticFn, g: AnalyticFn) -> Result<Self> {
        let l = f.l();
        if l > MAX_L {
            return Err(Error::TooManyGenerators(l, MAX_L));
        }
        for h in [&xi, &psi, &g] {
            if h.l() != l {
                return Err(Error::GeneratorMismatch(l, h.l()));
            }
        }
        expect_parity("f", &f, Parity::Even)?;
        expect_parity("xi", &xi, Parity::Odd)?;
        expect_parity("psi", &psi, Parity::Odd)?;
        expect_parity("g", &g, Parity::Even)?;
        Ok(N1Map { f, xi, psi, g })
    }

    pub fn identity(l: usize) -> Self {
        N1Map { f: AnalyticFn::z(l), xi: AnalyticFn::zero(l), psi: AnalyticFn::zero(l), g: AnalyticFn::one(l) }
    }

    pub fn l(&self) -> usize {
        self.f.l()
    }

    pub fn to_super(&self) -> SuperMap {
        let l = self.l();
        SuperMap {
            l,
            z: from_theta_components(l, 1, &[(0, self.f.clone()), (1, self.xi.clone())]),
            theta: vec![from_theta_components(l, 1, &[(0, self.psi.clone()), (1, self.g.clone())])],
        }
    }

    pub fn from_super(m: &SuperMap) -> N1Map {
        let l = m.l;
        N1Map {
            f: theta_component(&m.z, l, 0),
            xi: theta_component(&m.z, l, 1),
            psi: theta_component(&m.theta[0], l, 0),
            g: theta_component(&m.theta[0], l, 1),
        }
    }

    pub fn compose(&self, inner: &N1Map, allow_sampled: bool) -> Result<N1Map> {
        Ok(N1Map::from_super(&self.to_super().compose(&inner.to_super(), allow_sampled)?))
    }

    /// Residuals of DZ − ΘDΘ = 0 and of its component form ξ = gψ, g² = f′ + ψψ′.
    pub fn check_superconformal(&self, samples: usize, tol: f64) -> Result<ConditionReport> {
        let l = self.l();
        let s = self.to_super();
        let th = &s.theta[0];
        let total = d_n1(&s.z, l).sub(&th.mul(&d_n1(th, l)));
        let xi_res = self.xi.sub(&self.g.mul(&self.psi));
        let g_res = self.g.mul(&self.g).sub(&self.f.derivative()).sub(&self.psi.mul(&self.psi.derivative()));
        let residuals = vec![
            ("Dz-thetaDtheta".to_string(), sampled_norm(&total, samples)?),
            ("xi-g*psi".to_string(), sampled_norm(&xi_res, samples)?),
            ("g^2-f'-psi*psi'".to_string(), sampled_norm(&g_res, samples)?),
        ];
        Ok(ConditionReport { residuals, failures: Vec::new(), tol })
    }

    pub fn distance(&self, other: &N1Map, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in [(&self.f, &other.f), (&self.xi, &other.xi), (&self.psi, &other.psi), (&self.g, &other.g)] {
            worst = worst.max(sampled_norm(&a.sub(b), samples)?);
        }
        Ok(worst)
    }
}

/// Square root of a symbolic unit c·z^{2k}·e^{λz}(1 + s), or of a perfect-square body Laurent polynomial.
pub fn function_sqrt(h: &AnalyticFn, branch: Branch) -> Result<AnalyticFn> {
    let l = h.l();
    let sign = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    };
    if let Some(u) = h.unit_parts() {
        if u.power % 2 != 0 {
            return Err(Error::NoSquareRoot(format!("leading power {} is odd", u.power)));
        }
        // (1+s)^{1/2} = Σ binom(1/2, m) s^m
        let mut series = crate::analytic::Laurent::constant(Grassmann::one(l));
        let mut p = series.clone();
        let mut coef = 1.0;
        let mut m = 0usize;
        loop {
            p = p.mul(&u.rel_soul);
            if p.is_zero() {
                break;
            }
            coef *= (0.5 - m as f64) / (m as f64 + 1.0);
            m += 1;
            series = series.add(&p.scale_c(c(coef)));
        }
        let lead = crate::analytic::Laurent::monomial(u.power / 2, Grassmann::scalar(l, u.body.sqrt() * sign));
        let poly = lead.mul(&series);
        return Ok(crate::analytic::ExpPoly::from_terms(l, vec![(u.rate / 2.0, poly)]).into());
    }
    let p = h.as_laurent().ok_or_else(|| Error::NoSquareRoot("function is not a Laurent polynomial or unit".into()))?;
    if !p.is_body_only() || p.is_zero() {
        return Err(Error::NoSquareRoot("non-unit with soul part".into()));
    }
    let (lo, hi) = (p.min_power().unwrap(), p.max_power().unwrap());
    if lo % 2 != 0 || hi % 2 != 0 {
        return Err(Error::NoSquareRoot("odd extreme power".into()));
    }
    let (qlo, qhi) = (lo / 2, hi / 2);
    let mut q: std::collections::BTreeMap<i32, Complex64> = std::collections::BTreeMap::new();
    let top = p.coeff(hi).body().sqrt() * sign;
    q.insert(qhi, top);
    for k in (qlo..qhi).rev() {
        // coefficient of z^{qhi+k} in q² fixes q_k
        let target = p.coeff(qhi + k).body();
        let mut acc = Complex64::new(0.0, 0.0);
        for (&i, &a) in &q {
            let j = qhi + k - i;
            if j != qhi && j != k && q.contains_key(&j) {
                acc += a * q[&j];
            }
        }
        q.insert(k, (target - acc) / (2.0 * top));
    }
    let root: AnalyticFn = crate::analytic::Laurent::from_complex(l, q).into();
    if !root.mul(&root).approx_eq(h, 1e-10 * (1.0 + p.max_abs())) {
        return Err(Error::NoSquareRoot("body Laurent polynomial is not a perfect square".into()));
    }
    Ok(root)
}

/// N=1 superconformal map z̃ = f + θgψ, θ̃ = ψ + θg with g² = f′ + ψψ′.
pub fn build_n1_superconformal(f: &AnalyticFn, psi: &AnalyticFn, branch: Branch) -> Result<N1Map> {
    let h = f.derivative().add(&psi.mul(&psi.derivative()));
    let g = function_sqrt(&h, branch)?;
    N1Map::new(f.clone(), g.mul(psi), psi.clone(), g)
}

/// F1: N=2 homogeneous superconformal map to the N=1 map (f + ψ⁺ψ⁻ + 2θg⁺ψ⁻, ψ⁺ + θg⁺).
pub fn f1_functor(h: &N2Map) -> Result<N1Map> {
    let h = h.to_homogeneous();
    let [pp, pm] = &h.psi;
    let gp = &h.g[0];
    N1Map::new(h.f.add(&pp.mul(pm)), gp.mul(pm).scale_c(c(2.0)), pp.clone(), gp.clone())
}

/// F2: inverse of F1 on maps with invertible g.
pub fn f2_functor(m: &N1Map, allow_sampled: bool) -> Result<N2Map> {
    let ginv = m.g.invert(allow_sampled)?;
    let psi_minus = m.xi.mul(&ginv).scale_c(c(0.5));
    let f = m.f.sub(&m.psi.mul(&psi_minus));
    let g_minus = m.f.derivative().mul(&ginv).sub(&m.psi.derivative().mul(&m.xi).mul(&ginv).mul(&ginv));
    N2Map::new(Coords::Homogeneous, f, [m.psi.clone(), psi_minus], [m.g.clone(), g_minus])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::Laurent;

    fn zeta(l: usize, j: usize) -> Grassmann {
        Grassmann::generator(l, j)
    }

    #[test]
    fn identity_is_superconformal_in_both_systems() {
        for coords in [Coords::Homogeneous, Coords::Nonhomogeneous] {
            let r = N2Map::identity(2, coords).check_superconformal(32, 1e-12).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.max_residual() < 1e-15);
        }
    }

    #[test]
    fn theta_component_signs_round_trip() {
        let l = 2;
        let f = AnalyticFn::monomial(1, zeta(l, 1));
        let sup = from_theta_components(l, 2, &[(3, f.clone()), (1, f.clone())]);
        assert_eq!(theta_component(&sup, l, 3), f);
        assert_eq!(theta_component(&sup, l, 1), f);
        assert!(theta_component(&sup, l, 2).is_zero());
    }

    #[test]
    fn n1_examples() {
        let l = 1;
        let id = build_n1_superconformal(&AnalyticFn::z(l), &AnalyticFn::zero(l), Branch::Plus).unwrap();
        assert_eq!(id, N1Map::identity(l));
        let m = build_n1_superconformal(&AnalyticFn::z(l), &AnalyticFn::constant(zeta(l, 1)), Branch::Plus).unwrap();
        assert_eq!(m.xi, AnalyticFn::constant(zeta(l, 1)));
        assert_eq!(m.g, AnalyticFn::one(l));
        assert!(m.check_superconformal(32, 1e-12).unwrap().passed());
        let sq = AnalyticFn::monomial_c(l, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(build_n1_superconformal(&sq, &AnalyticFn::zero(l), Branch::Plus), Err(Error::NoSquareRoot(_))));
        let bad = N1Map::new(AnalyticFn::z(l), AnalyticFn::one(l), AnalyticFn::zero(l), AnalyticFn::one(l));
        assert!(matches!(bad, Err(Error::Parity(_))));
    }

    #[test]
    fn perfect_square_body() {
        let l = 0;
        let h: AnalyticFn = Laurent::from_complex(l, [(0, c(1.0)), (1, c(2.0)), (2, c(1.0))]).into();
        let r = function_sqrt(&h, Branch::Plus).unwrap();
        assert!(r.mul(&r).approx_eq(&h, 1e-12));
    }

    #[test]
    fn f2_example() {
        let l = 1;
        let m = N1Map::new(AnalyticFn::z(l), AnalyticFn::zero(l), AnalyticFn::constant(zeta(l, 1)), AnalyticFn::one(l)).unwrap();
        let h = f2_functor(&m, false).unwrap();
        assert!(h.f.approx_eq(&AnalyticFn::z(l), 0.0));
        assert!(h.psi[0].approx_eq(&AnalyticFn::constant(zeta(l, 1)), 0.0));
        assert!(h.psi[1].is_zero());
        assert!(h.g[0].approx_eq(&AnalyticFn::one(l), 0.0));
        assert!(h.g[1].approx_eq(&AnalyticFn::one(l), 0.0));
        assert!(h.check_superconformal(32, 1e-12).unwrap().passed());
    }

    #[test]
    fn fiber_scalings_compose() {
        let l = 2;
        let a = |k: f64| AnalyticFn::monomial_c(l, 1, c(k)).add(&AnalyticFn::one(l));
        let h1 = N2Map { coords: Coords::Homogeneous, f: AnalyticFn::z(l), psi: [AnalyticFn::zero(l), AnalyticFn::zero(l)], g: [a(1.0), a(2.0)] };
        let h2 = N2Map { coords: Coords::Homogeneous, f: AnalyticFn::z(l), psi: [AnalyticFn::zero(l), AnalyticFn::zero(l)], g: [a(3.0), a(4.0)] };
        let h = h1.compose(&h2, false).unwrap();
        assert!(h.g[0].approx_eq(&a(1.0).mul(&a(3.0)), 1e-14));
        assert!(h.g[1].approx_eq(&a(2.0).mul(&a(4.0)), 1e-14));
    }

    #[test]
    fn conversion_matches_coordinate_change() {
        let l = 2;
        let psi1 = AnalyticFn::monomial(1, zeta(l, 1)).add(&AnalyticFn::constant(zeta(l, 2)));
        let psi2 = AnalyticFn::monomial(-1, zeta(l, 2));
        let g1 = AnalyticFn::one(l);
        let g2 = AnalyticFn::zero(l);
        // f′ = g₁² + g₂² − ψ₁ψ₁′ − ψ₂ψ₂′
        let fp = g1.mul(&g1).add(&g2.mul(&g2)).sub(&psi1.mul(&psi1.derivative())).sub(&psi2.mul(&psi2.derivative()));
        let f = AnalyticFn::z(l).add(&AnalyticFn::monomial(1, &zeta(l, 1) * &zeta(l, 2)));
        assert!(f.derivative().approx_eq(&fp, 1e-14), "{:?} vs {:?}", f.derivative(), fp);
        let hn = N2Map::new(Coords::Nonhomogeneous, f, [psi1, psi2], [g1, g2]).unwrap();
        let via_data = hn.to_homogeneous().to_super();
        let via_coords = hn.to_homogeneous_super(false).unwrap();
        assert!(via_data.distance(&via_coords, 32).unwrap() < 1e-14);
        assert!(hn.check_superconformal(32, 1e-12).unwrap().passed());
        assert!(hn.to_homogeneous().to_nonhomogeneous().distance(&hn, 32).unwrap() < 1e-14);
    }

    #[test]
    fn inverse_of_reflection() {
        let l = 1;
        let i1 = N2Map {
            coords: Coords::Homogeneous,
            f: AnalyticFn::monomial_c(l, -1, c(1.0)),
            psi: [AnalyticFn::zero(l), AnalyticFn::zero(l)],
            g: [AnalyticFn::monomial_c(l, -1, I), AnalyticFn::monomial_c(l, -1, I)],
        };
        let inv = i1.invert(false).unwrap();
        let want_g = AnalyticFn::monomial_c(l, -1, -I);
        assert!(inv.f.approx_eq(&i1.f, 1e-15));
        assert!(inv.g[0].approx_eq(&want_g, 1e-15) && inv.g[1].approx_eq(&want_g, 1e-15));
        let round = i1.compose(&inv, false).unwrap();
        assert!(round.distance(&N2Map::identity(l, Coords::Homogeneous), 32).unwrap() < 1e-14);
    }
}
