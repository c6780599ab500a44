//! N=2 superconformal structures over the Riemann sphere.
//!
//! The sphere is covered by a northern chart with coordinate z and a southern
//! chart with coordinate w; the transition maps nor to sou and has body
//! w = 1/z. The canonical transitions are
//! I_g(z, θ⁺, θ⁻) = (1/z, iθ⁺g(z)/z, iθ⁻/(z·g(z))).

use num_complex::Complex64;

use crate::analytic::{winding_degree, AnalyticFn, Laurent};
use crate::cech::{solve_coboundary, CLaurent, CoboundaryOutcome, CoboundaryProblem};
use crate::error::{Error, Result};
use crate::grassmann::{multi_indices, Grassmann, MultiIndex};
use crate::supermap::{CoeffMask, Coords, N2Map, SuperPoint, DEFAULT_SAMPLES};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Coefficients below this are treated as numerical noise by the pipeline.
pub const CHOP_TOL: f64 = 1e-12;
/// Tolerance for the final comparison against the canonical transition.
pub const VERIFY_TOL: f64 = 1e-9;

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Which chart a point or chart change lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    Nor,
    Sou,
}

impl Chart {
    pub fn name(&self) -> &'static str {
        match self {
            Chart::Nor => "nor",
            Chart::Sou => "sou",
        }
    }
}

/// A two-chart N=2 superconformal structure over the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereStructure {
    /// Homogeneous transition from the nor chart to the sou chart.
    pub transition: N2Map,
    /// Degree, once known.
    pub degree: Option<i64>,
}

fn check_nonvanishing(g: &AnalyticFn) -> Result<()> {
    let mut min_abs = f64::INFINITY;
    for r in [0.5, 1.0, 2.0] {
        for k in 0..64 {
            let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / 64.0);
            min_abs = min_abs.min(g.eval_body(z)?.body().norm());
        }
    }
    if min_abs < crate::analytic::BODY_VANISH_TOL {
        return Err(Error::BodyVanishes(min_abs));
    }
    if g.is_symbolic() && g.body().unit_parts().is_none() {
        return Err(Error::BodyVanishes(0.0));
    }
    Ok(())
}

/// The transition I_g.
pub fn i_g(g: &AnalyticFn) -> Result<N2Map> {
    check_nonvanishing(g)?;
    let l = g.l();
    let inv_z = AnalyticFn::monomial_c(l, -1, cx(1.0));
    let g_plus = g.mul(&inv_z).scale_c(I);
    let g_minus = g.invert(true)?.mul(&inv_z).scale_c(I);
    N2Map::new(Coords::Homogeneous, inv_z, [AnalyticFn::zero(l), AnalyticFn::zero(l)], [g_plus, g_minus])
}

/// I_{zⁿ} over Λ_l.
pub fn canonical_transition(l: usize, n: i32) -> N2Map {
    N2Map {
        coords: Coords::Homogeneous,
        f: AnalyticFn::monomial_c(l, -1, cx(1.0)),
        psi: [AnalyticFn::zero(l), AnalyticFn::zero(l)],
        g: [AnalyticFn::monomial_c(l, n - 1, I), AnalyticFn::monomial_c(l, -n - 1, I)],
    }
}

/// The sphere whose transition is I_g.
pub fn make_supersphere(g: &AnalyticFn) -> Result<SphereStructure> {
    let transition = i_g(g)?;
    let report = transition.check_superconformal(DEFAULT_SAMPLES, VERIFY_TOL)?;
    if !report.passed() {
        return Err(Error::Invalid(format!("I_g failed its superconformal check: {:?}", report.residuals)));
    }
    Ok(SphereStructure { transition, degree: None })
}

/// g = −iz·g⁺ when the transition has the I_g shape (body 1/z, no ψ, no f soul).
pub fn i_g_parameter(t: &N2Map) -> Option<AnalyticFn> {
    let t = t.to_homogeneous();
    let l = t.l();
    let inv_z = AnalyticFn::monomial_c(l, -1, cx(1.0));
    if !t.f.approx_eq(&inv_z, 0.0) || !t.psi[0].is_zero() || !t.psi[1].is_zero() {
        return None;
    }
    let g = t.g[0].mul(&AnalyticFn::monomial_c(l, 1, -I));
    let expect_minus = g.invert(true).ok()?.mul(&inv_z).scale_c(I);
    t.g[1].approx_eq(&expect_minus, 1e-12).then_some(g)
}

/// Degree n of the structure: the winding degree of g for I_g shapes, else via uniformization.
pub fn sphere_degree(s: &SphereStructure) -> Result<i64> {
    if let Some(n) = s.degree {
        return Ok(n);
    }
    match i_g_parameter(&s.transition) {
        Some(g) => winding_degree(&g),
        None => Ok(uniformize_sphere(&s.transition)?.n as i64),
    }
}

pub fn spheres_equivalent(a: &SphereStructure, b: &SphereStructure) -> Result<bool> {
    Ok(sphere_degree(a)? == sphere_degree(b)?)
}

// ---------------------------------------------------------------------------
// Uniformization
// ---------------------------------------------------------------------------

/// One applied pair of chart changes.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub stage: String,
    pub level: String,
    pub nor: N2Map,
    pub sou: N2Map,
}

/// Result of the uniformization pipeline.
#[derive(Clone, Debug)]
pub struct Uniformization {
    pub n: i32,
    /// Accumulated chart change on the nor chart.
    pub nor: N2Map,
    /// Accumulated chart change on the sou chart.
    pub sou: N2Map,
    /// Canonical transition I_{zⁿ}.
    pub canonical: SphereStructure,
    /// The input transition after all chart changes, chopped at the pipeline tolerance.
    pub transition: N2Map,
    /// Residual of sou∘T∘nor⁻¹ against the canonical transition.
    pub verification_residual: f64,
    pub steps: Vec<StepRecord>,
}

struct Pipeline {
    l: usize,
    t: N2Map,
    nor: N2Map,
    sou: N2Map,
    steps: Vec<StepRecord>,
}

impl Pipeline {
    /// T ← K_sou∘T∘K_nor⁻¹.
    fn apply(&mut self, stage: &str, level: String, k_nor: N2Map, k_sou: N2Map) -> Result<()> {
        let inv = k_nor.invert(false)?;
        self.t = k_sou.compose(&self.t.compose(&inv, false)?, false)?.chop(1e-15);
        self.nor = k_nor.compose(&self.nor, false)?;
        self.sou = k_sou.compose(&self.sou, false)?;
        log::debug!("{stage} {level}: applied chart changes");
        self.steps.push(StepRecord { stage: stage.to_string(), level, nor: k_nor, sou: k_sou });
        Ok(())
    }

    fn identity(&self) -> N2Map {
        N2Map::identity(self.l, Coords::Homogeneous)
    }

    fn poly(&self, c: &CLaurent, mask: u32) -> AnalyticFn {
        let m = Grassmann::monomial(self.l, mask, cx(1.0));
        Laurent::from_pairs(self.l, c.iter().map(|(&k, &v)| (k, m.scale(v)))).into()
    }
}

fn level_name(j: &MultiIndex) -> String {
    let idx: Vec<String> = j.indices().iter().map(|i| i.to_string()).collect();
    format!("({})", idx.join(","))
}

fn level_coefficients(f: &AnalyticFn, mask: u32) -> Result<CLaurent> {
    let p = f
        .component(mask)
        .as_laurent()
        .ok_or_else(|| Error::UnsupportedBody("transition component is not a Laurent polynomial".into()))?;
    Ok(p.coeffs().iter().map(|(&k, g)| (k, g.body())).filter(|(_, v)| v.norm() > CHOP_TOL).collect())
}

fn solve_level(ell: CLaurent, coeff: Complex64, power: i32, level: &str) -> Result<crate::cech::Splitting> {
    match solve_coboundary(&CoboundaryProblem::new(ell, coeff, power))? {
        CoboundaryOutcome::Solved(s) => Ok(s),
        CoboundaryOutcome::Obstructed(o) => Err(Error::Obstructed { level: level.to_string(), powers: o.uncovered_powers }),
    }
}

/// Brings a two-chart transition with body 1/z to the canonical I_{zⁿ}.
pub fn uniformize_sphere(transition: &N2Map) -> Result<Uniformization> {
    let t0 = transition.to_homogeneous();
    let l = t0.l();
    let inv_z = AnalyticFn::monomial_c(l, -1, cx(1.0));
    if !t0.f.body().approx_eq(&inv_z, CHOP_TOL) {
        return Err(Error::UnsupportedBody("transition body must be z ↦ 1/z".into()));
    }
    let id = N2Map::identity(l, Coords::Homogeneous);
    let mut p = Pipeline { l, t: t0.clone(), nor: id.clone(), sou: id, steps: Vec::new() };

    // normalize the body of g = −iz·g⁺ to zⁿ
    let g_body = p.t.g[0].body().mul(&AnalyticFn::monomial_c(l, 1, -I));
    let u = g_body
        .unit_parts()
        .ok_or_else(|| Error::UnsupportedBody("body of g must be c·zⁿ·e^{λz}".into()))?;
    let n = u.power;
    if (u.body - 1.0).norm() > CHOP_TOL || u.rate.norm() > CHOP_TOL {
        let h = AnalyticFn::exp_affine(&Grassmann::scalar(l, u.body), &Grassmann::scalar(l, u.rate), None)?;
        let k = N2Map { g: [h.clone(), h.invert(false)?], ..p.identity() };
        p.apply("body", "()".into(), k, p.identity())?;
    }

    // odd levels: kill ψ⁺ with weight i·z^{n−1} and ψ⁻ with weight i·z^{−n−1}
    let mut odd = multi_indices(l, true);
    odd.sort();
    for j in &odd {
        for (s, power) in [(0usize, n - 1), (1usize, -n - 1)] {
            let ell = level_coefficients(&p.t.psi[s], j.mask())?;
            if ell.is_empty() {
                continue;
            }
            let name = format!("psi{} {}", if s == 0 { "+" } else { "-" }, level_name(j));
            let split = solve_level(ell, I, power, &name)?;
            let mut k_nor = p.identity();
            let mut k_sou = p.identity();
            k_nor.psi[s] = p.poly(&split.b_nor, j.mask());
            k_sou.psi[s] = p.poly(&split.b_sou, j.mask());
            p.apply("psi", name, k_nor, k_sou)?;
        }
    }

    // even levels: kill the soul of f with the tangent weight −1/z²
    let mut even: Vec<MultiIndex> = multi_indices(l, false).into_iter().filter(|j| !j.is_empty()).collect();
    even.sort();
    for j in &even {
        let ell = level_coefficients(&p.t.f, j.mask())?;
        if ell.is_empty() {
            continue;
        }
        let name = format!("f {}", level_name(j));
        let split = solve_level(ell, cx(-1.0), -2, &name)?;
        let tangent = |b: &CLaurent| -> N2Map {
            let bf = p.poly(b, j.mask());
            let mut k = p.identity();
            k.f = AnalyticFn::z(l).add(&bf);
            k.g[0] = AnalyticFn::one(l).add(&bf.derivative());
            k
        };
        let (k_nor, k_sou) = (tangent(&split.b_nor), tangent(&split.b_sou));
        p.apply("f", name, k_nor, k_sou)?;
    }

    // soul of g: additive splitting of log g between the charts
    let g = p.t.g[0].mul(&AnalyticFn::monomial_c(l, 1, -I));
    let (n_log, q) = g.log_unit()?;
    if n_log != n {
        return Err(Error::Invalid(format!("g changed degree during the pipeline ({n} → {n_log})")));
    }
    let q = q.chop(CHOP_TOL).as_laurent().expect("log of a unit is a Laurent polynomial");
    let q_nor = Laurent::from_pairs(l, q.coeffs().iter().filter(|(&k, _)| k >= 0).map(|(&k, c)| (k, c.clone())));
    let q_neg = Laurent::from_pairs(l, q.coeffs().iter().filter(|(&k, _)| k < 0).map(|(&k, c)| (k, c.clone())));
    if !q_nor.is_zero() || !q_neg.is_zero() {
        let h_nor = AnalyticFn::from(q_nor).exp(false)?;
        let q_sou = AnalyticFn::from(q_neg).compose_body(&AnalyticFn::monomial_c(l, -1, cx(1.0)), false)?;
        let h_sou = q_sou.neg().exp(false)?;
        let k_nor = N2Map { g: [h_nor.clone(), h_nor.invert(false)?], ..p.identity() };
        let k_sou = N2Map { g: [h_sou.clone(), h_sou.invert(false)?], ..p.identity() };
        p.apply("g", "log".into(), k_nor, k_sou)?;
    }

    let g_final = p.t.g[0].mul(&AnalyticFn::monomial_c(l, 1, -I));
    let winding = winding_degree(&g_final)?;
    if winding != n as i64 {
        return Err(Error::Invalid(format!("winding degree {winding} disagrees with leading power {n}")));
    }
    let canonical = canonical_transition(l, n);
    let chopped = p.t.chop(CHOP_TOL);
    let direct = chopped.distance(&canonical, DEFAULT_SAMPLES)?;
    let recomposed = p.sou.compose(&t0.compose(&p.nor.invert(false)?, false)?, false)?;
    let verification_residual = direct.max(recomposed.distance(&canonical, DEFAULT_SAMPLES)?);
    if verification_residual > VERIFY_TOL {
        return Err(Error::Invalid(format!("pipeline residual {verification_residual:e} exceeds {VERIFY_TOL:e}")));
    }
    Ok(Uniformization {
        n,
        nor: p.nor.chop(CHOP_TOL),
        sou: p.sou.chop(CHOP_TOL),
        canonical: SphereStructure { transition: canonical, degree: Some(n as i64) },
        transition: chopped,
        verification_residual,
        steps: p.steps,
    })
}

// ---------------------------------------------------------------------------
// SL(2) × GL(1) action
// ---------------------------------------------------------------------------

/// 2×2 matrix ((a, b), (c, d)) with even Grassmann entries.
pub type Mobius = [[Grassmann; 2]; 2];

fn check_mobius(alpha: &Mobius, eps: &Grassmann, mask: CoeffMask) -> Result<()> {
    for e in alpha.iter().flatten().chain([eps]) {
        if !e.is_even() {
            return Err(Error::Parity("Möbius entries and ε must be even".into()));
        }
        mask.check("mobius entry", &AnalyticFn::constant(e.clone()))?;
    }
    let [[a, b], [c, d]] = alpha;
    let det = &(a * d) - &(b * c);
    if !det.approx_eq(&Grassmann::one(a.l()), 1e-12) {
        return Err(Error::Invalid(format!("det α = {det} is not 1")));
    }
    if eps.body().norm() < crate::grassmann::DEFAULT_BODY_TOL {
        return Err(Error::ZeroBody(eps.body().norm()));
    }
    Ok(())
}

/// α·ₙ(z, θ⁺, θ⁻) on the chosen chart; returns the chart the image lives on.
pub fn mobius_action(n: i32, alpha: &Mobius, eps: &Grassmann, p: &SuperPoint, chart: Chart) -> Result<(Chart, SuperPoint)> {
    mobius_action_in(n, alpha, eps, p, chart, CoeffMask::Unrestricted)
}

/// As [`mobius_action`], with α and ε restricted to a coefficient subalgebra.
pub fn mobius_action_in(n: i32, alpha: &Mobius, eps: &Grassmann, p: &SuperPoint, chart: Chart, mask: CoeffMask) -> Result<(Chart, SuperPoint)> {
    check_mobius(alpha, eps, mask)?;
    if p.theta.len() != 2 {
        return Err(Error::Invalid("N=2 point expected".into()));
    }
    let [[a, b], [c, d]] = alpha;
    let z = &p.z;
    let eps_inv = eps.invert()?;
    let scaled = |num: &Grassmann, den: &Grassmann, phase: Complex64| -> Result<SuperPoint> {
        let den_inv = den.invert()?;
        let zt = num * &den_inv;
        let tp = &(&p.theta[0] * eps) * &den.int_pow((n - 1) as i64)?;
        let tm = &(&p.theta[1] * &eps_inv) * &den.int_pow((-n - 1) as i64)?;
        Ok(SuperPoint { z: zt, theta: vec![tp.scale(phase), tm.scale(phase)] })
    };
    let zb = z.body().norm();
    let tol = crate::grassmann::DEFAULT_BODY_TOL;
    match chart {
        Chart::Sou => {
            let den = &(c * z) + d;
            if den.body().norm() > tol {
                Ok((Chart::Sou, scaled(&(&(a * z) + b), &den, cx(1.0))?))
            } else if d.body().norm() <= tol && zb <= tol {
                Ok((Chart::Nor, scaled(&den, &(&(a * z) + b), -I)?))
            } else {
                Err(Error::OutsideDomain(format!("cz+d has vanishing body at z = {}", z.body())))
            }
        }
        Chart::Nor => {
            let den = a + &(b * z);
            if den.body().norm() > tol {
                Ok((Chart::Nor, scaled(&(c + &(d * z)), &den, cx(1.0))?))
            } else if a.body().norm() <= tol && zb <= tol {
                Ok((Chart::Sou, scaled(&den, &(c + &(d * z)), I)?))
            } else {
                Err(Error::OutsideDomain(format!("a+bz has vanishing body at z = {}", z.body())))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta(l: usize, j: usize) -> Grassmann {
        Grassmann::generator(l, j)
    }

    #[test]
    fn reflection_at_a_point() {
        let l = 2;
        let s = make_supersphere(&AnalyticFn::one(l)).unwrap();
        let p = SuperPoint::new(Grassmann::real(l, 2.0), vec![zeta(l, 1), zeta(l, 2)]).unwrap();
        let q = s.transition.to_super().apply(&p).unwrap();
        assert!(q.z.approx_eq(&Grassmann::real(l, 0.5), 1e-15));
        assert!(q.theta[0].approx_eq(&zeta(l, 1).scale(I * 0.5), 1e-15));
        assert!(q.theta[1].approx_eq(&zeta(l, 2).scale(I * 0.5), 1e-15));
    }

    #[test]
    fn cubic_transition_and_degree() {
        let l = 2;
        let s = make_supersphere(&AnalyticFn::monomial_c(l, 3, cx(1.0))).unwrap();
        assert!(s.transition.g[0].approx_eq(&AnalyticFn::monomial_c(l, 2, I), 0.0));
        assert!(s.transition.g[1].approx_eq(&AnalyticFn::monomial_c(l, -4, I), 1e-15));
        assert_eq!(sphere_degree(&s).unwrap(), 3);
        let vanishing = AnalyticFn::z(l).sub(&AnalyticFn::one(l));
        assert!(matches!(make_supersphere(&vanishing), Err(Error::BodyVanishes(_))));
    }

    #[test]
    fn degree_ignores_soul_exponential() {
        let l = 2;
        let e = AnalyticFn::monomial(1, &zeta(l, 1) * &zeta(l, 2)).exp(false).unwrap();
        let g = AnalyticFn::monomial_c(l, 3, cx(1.0)).mul(&e);
        assert_eq!(sphere_degree(&make_supersphere(&g).unwrap()).unwrap(), 3);
        let a = make_supersphere(&AnalyticFn::z(l)).unwrap();
        let b = make_supersphere(&AnalyticFn::monomial_c(l, -1, cx(1.0))).unwrap();
        assert!(!spheres_equivalent(&a, &b).unwrap());
    }

    #[test]
    fn canonical_input_needs_no_changes() {
        let u = uniformize_sphere(&canonical_transition(2, 2)).unwrap();
        assert_eq!(u.n, 2);
        assert!(u.steps.is_empty());
    }

    #[test]
    fn conjugated_sphere_recovers_inverse_change() {
        let l = 2;
        let h = AnalyticFn::one(l).add(&AnalyticFn::monomial(1, &zeta(l, 1) * &zeta(l, 2)));
        let k = N2Map { g: [h.clone(), h.invert(false).unwrap()], ..N2Map::identity(l, Coords::Homogeneous) };
        let t = canonical_transition(l, 0).compose(&k.invert(false).unwrap(), false).unwrap();
        let u = uniformize_sphere(&t).unwrap();
        assert_eq!(u.n, 0);
        let k_inv = k.invert(false).unwrap();
        assert!(u.nor.distance(&k_inv, 32).unwrap() < 1e-14);
        assert!(u.sou.distance(&N2Map::identity(l, Coords::Homogeneous), 32).unwrap() < 1e-14);
    }

    #[test]
    fn psi_perturbation_is_killed() {
        let l = 1;
        let mut t = canonical_transition(l, 0);
        t.psi[0] = AnalyticFn::constant(zeta(l, 1));
        let u = uniformize_sphere(&t).unwrap();
        assert_eq!(u.n, 0);
        let first = &u.steps[0];
        assert_eq!(first.stage, "psi");
        assert!(first.nor.psi[0].approx_eq(&AnalyticFn::monomial(1, zeta(l, 1).scale(-I)), 1e-15));
        assert!(first.sou.psi[0].is_zero());
    }

    #[test]
    fn mobius_examples() {
        let l = 2;
        let one = Grassmann::one(l);
        let zero = Grassmann::zero(l);
        let p = SuperPoint::new(Grassmann::real(l, 2.0), vec![zeta(l, 1), zeta(l, 2)]).unwrap();
        let id = [[one.clone(), zero.clone()], [zero.clone(), one.clone()]];
        let (chart, q) = mobius_action(3, &id, &one, &p, Chart::Sou).unwrap();
        assert_eq!(chart, Chart::Sou);
        assert_eq!(q, p);
        let s = [[zero.clone(), one.clone()], [-&one, zero.clone()]];
        let (_, q) = mobius_action(0, &s, &one, &p, Chart::Sou).unwrap();
        assert!(q.z.approx_eq(&Grassmann::real(l, -0.5), 1e-15));
        assert!(q.theta[0].approx_eq(&zeta(l, 1).scale_re(-0.5), 1e-15));
        assert!(q.theta[1].approx_eq(&zeta(l, 2).scale_re(-0.5), 1e-15));
    }
}
