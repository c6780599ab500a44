#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superlift::analytic::{AnalyticFn, Laurent};
use superlift::supermap::{build_n1_superconformal, Branch, Coords, N1Map, N2Map};
use superlift::torus::ThetaType;
use superlift::Grassmann;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rand_c(r: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

/// Multiple of 1/8 in [−1, 1], so sums and products stay exact.
pub fn rand_dyadic(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.gen_range(-8i32..=8) as f64 / 8.0, r.gen_range(-8i32..=8) as f64 / 8.0)
}

#[derive(Clone, Copy, PartialEq)]
pub enum Kind {
    Any,
    Even,
    Odd,
    EvenSoul,
}

fn admits(kind: Kind, mask: u32) -> bool {
    let odd = mask.count_ones() % 2 == 1;
    match kind {
        Kind::Any => true,
        Kind::Even => !odd,
        Kind::Odd => odd,
        Kind::EvenSoul => !odd && mask != 0,
    }
}

/// Random element whose monomials are each present with probability `density`.
pub fn rand_grassmann_with(r: &mut ChaCha8Rng, l: usize, kind: Kind, density: f64, scale: f64, dyadic: bool) -> Grassmann {
    let mut terms = Vec::new();
    for mask in 0..(1u32 << l) {
        if admits(kind, mask) && r.gen_bool(density) {
            let c = if dyadic { rand_dyadic(r) } else { rand_c(r, scale) };
            terms.push((mask, c));
        }
    }
    Grassmann::from_terms(l, terms)
}

pub fn rand_grassmann(r: &mut ChaCha8Rng, l: usize, kind: Kind) -> Grassmann {
    rand_grassmann_with(r, l, kind, 0.5, 1.0, false)
}

/// Random element with body of modulus in [0.5, 1.5].
pub fn rand_unit(r: &mut ChaCha8Rng, l: usize) -> Grassmann {
    let body = Complex64::from_polar(r.gen_range(0.5..1.5), r.gen_range(0.0..std::f64::consts::TAU));
    &Grassmann::scalar(l, body) + &rand_grassmann_with(r, l, Kind::EvenSoul, 0.5, 0.5, false)
}

/// Sparse Laurent polynomial with `terms` coefficients of the given kind and powers in [lo, hi].
pub fn rand_laurent(r: &mut ChaCha8Rng, l: usize, kind: Kind, lo: i32, hi: i32, terms: usize, scale: f64) -> Laurent {
    let mut p = Laurent::zero(l);
    for _ in 0..terms {
        let k = r.gen_range(lo..=hi);
        p = p.add(&Laurent::monomial(k, rand_grassmann_with(r, l, kind, 0.4, scale, false)));
    }
    p
}

/// Random homogeneous N=2 superconformal map with body a·z^k (+ b when k = 1, |b| < 0.2).
///
/// ψ± and the souls of f and g⁺ are random; g⁻ is fixed by the scalar condition.
pub fn rand_n2_superconformal(r: &mut ChaCha8Rng, l: usize, k: i32, deg: i32) -> N2Map {
    let a = Complex64::from_polar(r.gen_range(0.8..1.4), r.gen_range(0.0..std::f64::consts::TAU));
    let mut f = Laurent::monomial(k, Grassmann::scalar(l, a));
    if k == 1 {
        f = f.add(&Laurent::constant(Grassmann::scalar(l, rand_c(r, 0.14))));
    }
    f = f.add(&rand_laurent(r, l, Kind::EvenSoul, -deg, deg, 3, 0.5));
    let pp = rand_laurent(r, l, Kind::Odd, -deg, deg, 2, 0.5);
    let pm = rand_laurent(r, l, Kind::Odd, -deg, deg, 2, 0.5);
    let (lo, hi) = ((k - 1).min(0), (k - 1).max(0));
    let j = r.gen_range(lo..=hi);
    let c = Complex64::from_polar(r.gen_range(0.6..1.4), r.gen_range(0.0..std::f64::consts::TAU));
    let gp = Laurent::monomial(j, Grassmann::scalar(l, c)).mul(&Laurent::constant(Grassmann::one(l)).add(&rand_laurent(r, l, Kind::EvenSoul, -deg, deg, 2, 0.5)));
    let (f, pp, pm, gp): (AnalyticFn, AnalyticFn, AnalyticFn, AnalyticFn) = (f.into(), pp.into(), pm.into(), gp.into());
    let rhs = f.derivative().sub(&pp.derivative().mul(&pm)).add(&pp.mul(&pm.derivative()));
    let gm = rhs.mul(&gp.invert(false).expect("g⁺ is a unit"));
    N2Map::new(Coords::Homogeneous, f, [pp, pm], [gp, gm]).expect("parities are correct by construction")
}

/// Superconformal chart change with identity body and polynomial data of degree ≤ deg.
pub fn rand_chart_change(r: &mut ChaCha8Rng, l: usize, deg: i32) -> N2Map {
    let f: AnalyticFn = Laurent::z(l).add(&rand_laurent(r, l, Kind::EvenSoul, 0, deg, 2, 0.5)).into();
    let pp: AnalyticFn = rand_laurent(r, l, Kind::Odd, 0, deg, 2, 0.5).into();
    let pm: AnalyticFn = rand_laurent(r, l, Kind::Odd, 0, deg, 2, 0.5).into();
    let gp: AnalyticFn = Laurent::constant(Grassmann::one(l)).add(&rand_laurent(r, l, Kind::EvenSoul, 0, deg, 2, 0.5)).into();
    let rhs = f.derivative().sub(&pp.derivative().mul(&pm)).add(&pp.mul(&pm.derivative()));
    let gm = rhs.mul(&gp.invert(false).unwrap());
    N2Map::new(Coords::Homogeneous, f, [pp, pm], [gp, gm]).unwrap()
}

/// Random N=1 superconformal map with body a·z^k, k ∈ {−1, 1, 3}.
pub fn rand_n1_superconformal(r: &mut ChaCha8Rng, l: usize, deg: i32) -> N1Map {
    let k = [-1, 1, 3][r.gen_range(0..3)];
    let a = Complex64::from_polar(r.gen_range(0.6..1.4), r.gen_range(0.0..std::f64::consts::TAU));
    let f: AnalyticFn = Laurent::monomial(k, Grassmann::scalar(l, a)).add(&rand_laurent(r, l, Kind::EvenSoul, -deg, deg, 3, 0.5)).into();
    let psi: AnalyticFn = rand_laurent(r, l, Kind::Odd, -deg, deg, 2, 0.5).into();
    let branch = if r.gen_bool(0.5) { Branch::Plus } else { Branch::Minus };
    build_n1_superconformal(&f, &psi, branch).expect("f′ + ψψ′ is a unit with even leading power")
}

/// Largest coefficient modulus of a − b for symbolic functions.
pub fn coeff_diff(a: &AnalyticFn, b: &AnalyticFn) -> f64 {
    a.sub(b).coeff_max_abs().expect("symbolic")
}

pub fn n2_coeff_diff(a: &N2Map, b: &N2Map) -> f64 {
    let mut d = coeff_diff(&a.f, &b.f);
    for k in 0..2 {
        d = d.max(coeff_diff(&a.psi[k], &b.psi[k])).max(coeff_diff(&a.g[k], &b.g[k]));
    }
    d
}

pub fn n1_coeff_diff(a: &N1Map, b: &N1Map) -> f64 {
    coeff_diff(&a.f, &b.f).max(coeff_diff(&a.xi, &b.xi)).max(coeff_diff(&a.psi, &b.psi)).max(coeff_diff(&a.g, &b.g))
}

pub fn rand_tau(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.gen_range(-0.5..0.5), r.gen_range(0.8..1.5))
}

/// k·Jacobi + trivial(a, b) + e·spin over Λ_l: always a valid type.
pub fn rand_theta_type(r: &mut ChaCha8Rng, l: usize, tau: Complex64) -> (ThetaType, i64) {
    let k: i64 = r.gen_range(-2..=2);
    let mut t = ThetaType::zero(l, tau);
    let j = ThetaType::jacobi(l, tau);
    for _ in 0..k.abs() {
        t = if k > 0 { t.add(&j) } else { t.sub(&j) };
    }
    let a = &Grassmann::scalar(l, rand_c(r, 0.3)) + &rand_grassmann_with(r, l, Kind::EvenSoul, 0.4, 0.3, false);
    let b = &Grassmann::scalar(l, rand_c(r, 0.3)) + &rand_grassmann_with(r, l, Kind::EvenSoul, 0.4, 0.3, false);
    t = t.add(&ThetaType::trivial_from(&a, &b, tau));
    if r.gen_bool(0.5) {
        t = t.add(&ThetaType::spin(l, tau));
    }
    (t, k)
}
