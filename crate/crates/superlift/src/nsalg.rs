//! Neveu-Schwarz algebras at central charge zero realized by superderivations.
//!
//! A superderivation X = X^z ∂_z + Σ_k X^k ∂_{θ_k} has coefficients that are
//! Laurent polynomials with values in Λ_{l+n}; the last n generators are the θ's.
//! Odd generators G_{k−1/2} are indexed by the integer k.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::analytic::{AnalyticFn, Laurent};
use crate::error::{Error, Result};
use crate::grassmann::{Grassmann, Parity};
use crate::supermap::{CoeffMask, Coords, N2Map};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Coordinate system a superderivation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsCoords {
    N1,
    N2Homogeneous,
    N2Nonhomogeneous,
}

impl NsCoords {
    pub fn n_theta(&self) -> usize {
        match self {
            NsCoords::N1 => 1,
            _ => 2,
        }
    }
}

/// Generator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GenKind {
    L,
    J,
    G,
    GStar,
    G1,
    G2,
    GPlus,
    GMinus,
}

impl GenKind {
    pub fn is_odd(&self) -> bool {
        !matches!(self, GenKind::L | GenKind::J)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GenKind::L => "L",
            GenKind::J => "J",
            GenKind::G => "G",
            GenKind::GStar => "G*",
            GenKind::G1 => "G1",
            GenKind::G2 => "G2",
            GenKind::GPlus => "G+",
            GenKind::GMinus => "G-",
        }
    }
}

/// A first-order differential operator on superfunctions.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperDerivation {
    pub coords: NsCoords,
    /// Number of ζ generators in the coefficient ring (0 for the bare algebra).
    pub l: usize,
    pub parity: Parity,
    /// comps[0] multiplies ∂_z, comps[k] multiplies ∂_{θ_k}.
    pub comps: Vec<Laurent>,
}

impl fmt::Display for SuperDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = match self.coords {
            NsCoords::N1 => vec!["d/dz", "d/dtheta"],
            NsCoords::N2Homogeneous => vec!["d/dz", "d/dtheta+", "d/dtheta-"],
            NsCoords::N2Nonhomogeneous => vec!["d/dz", "d/dtheta1", "d/dtheta2"],
        };
        let mut first = true;
        for (c, name) in self.comps.iter().zip(names) {
            for (k, g) in c.coeffs() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({g}) z^{k} {name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl SuperDerivation {
    pub fn zero(coords: NsCoords, l: usize, parity: Parity) -> Self {
        let total = l + coords.n_theta();
        SuperDerivation { coords, l, parity, comps: vec![Laurent::zero(total); coords.n_theta() + 1] }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// X(F) for a function F with values in Λ_{l+n}.
    pub fn apply(&self, f: &Laurent) -> Laurent {
        let mut out = self.comps[0].mul(&f.derivative());
        for k in 1..self.comps.len() {
            let gen = self.l + k;
            let d = f.map_coeffs(f.l(), |c| c.left_derivative(gen));
            out = out.add(&self.comps[k].mul(&d));
        }
        out
    }

    pub fn add(&self, other: &SuperDerivation) -> SuperDerivation {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        SuperDerivation { comps, ..self.clone() }
    }

    pub fn scale_c(&self, s: Complex64) -> SuperDerivation {
        SuperDerivation { comps: self.comps.iter().map(|c| c.scale_c(s)).collect(), ..self.clone() }
    }

    /// Coordinate functions z, θ_1, …, θ_n.
    pub fn coordinates(coords: NsCoords, l: usize) -> Vec<Laurent> {
        let total = l + coords.n_theta();
        let mut out = vec![Laurent::z(total)];
        for k in 1..=coords.n_theta() {
            out.push(Laurent::constant(Grassmann::generator(total, l + k)));
        }
        out
    }

    /// Largest coefficient modulus of self − other.
    pub fn distance(&self, other: &SuperDerivation) -> f64 {
        self.comps.iter().zip(&other.comps).fold(0.0, |a, (x, y)| a.max(x.sub(y).max_abs()))
    }
}

/// [X, Y] = XY − (−1)^{|X||Y|} YX.
pub fn super_bracket(x: &SuperDerivation, y: &SuperDerivation) -> Result<SuperDerivation> {
    if x.coords != y.coords || x.l != y.l {
        return Err(Error::Invalid("bracket operands act on different superspaces".into()));
    }
    if x.parity == Parity::Mixed || y.parity == Parity::Mixed {
        return Err(Error::Parity("bracket operands must have definite parity".into()));
    }
    let both_odd = x.parity == Parity::Odd && y.parity == Parity::Odd;
    let comps = x
        .comps
        .iter()
        .zip(&y.comps)
        .map(|(xi, yi)| {
            let a = x.apply(yi);
            let b = y.apply(xi);
            if both_odd {
                a.add(&b)
            } else {
                a.sub(&b)
            }
        })
        .collect();
    let parity = if (x.parity == Parity::Odd) != (y.parity == Parity::Odd) { Parity::Odd } else { Parity::Even };
    Ok(SuperDerivation { coords: x.coords, l: x.l, parity, comps })
}

/// c·z^p·θ^mask over Λ_{n}.
fn term(n: usize, p: i32, mask: u32, c: Complex64) -> Laurent {
    Laurent::monomial(p, Grassmann::monomial(n, mask, c))
}

/// Generator of the given kind and index; odd kinds return G_{n−1/2}.
pub fn make_generator(kind: GenKind, n: i32, coords: NsCoords) -> Result<SuperDerivation> {
    use GenKind::*;
    let nt = coords.n_theta();
    let nf = n as f64;
    let parity = if kind.is_odd() { Parity::Odd } else { Parity::Even };
    let mut x = SuperDerivation::zero(coords, 0, parity);
    let half = -(nf + 1.0) / 2.0;
    let mismatch = || Error::Invalid(format!("generator {} does not exist in {:?} coordinates", kind.name(), coords));
    match (coords, kind) {
        (_, L) => {
            x.comps[0] = term(nt, n + 1, 0, cx(-1.0));
            for k in 1..=nt {
                x.comps[k] = term(nt, n, 1 << (k - 1), cx(half));
            }
        }
        (NsCoords::N1, G) => {
            x.comps[0] = term(1, n, 1, cx(1.0));
            x.comps[1] = term(1, n, 0, cx(-1.0));
        }
        (NsCoords::N1, J) => {
            x.comps[1] = term(1, n, 1, cx(1.0));
        }
        (NsCoords::N1, GStar) => {
            x.comps[0] = term(1, n, 1, I);
            x.comps[1] = term(1, n, 0, I);
        }
        (NsCoords::N2Nonhomogeneous, J) => {
            x.comps[1] = term(2, n, 2, -I);
            x.comps[2] = term(2, n, 1, I);
        }
        (NsCoords::N2Nonhomogeneous, G1) => {
            x.comps[0] = term(2, n, 1, cx(1.0));
            x.comps[1] = term(2, n, 0, cx(-1.0));
            x.comps[2] = term(2, n - 1, 3, cx(nf));
        }
        (NsCoords::N2Nonhomogeneous, G2) => {
            x.comps[0] = term(2, n, 2, cx(1.0));
            x.comps[1] = term(2, n - 1, 3, cx(-nf));
            x.comps[2] = term(2, n, 0, cx(-1.0));
        }
        (NsCoords::N2Homogeneous, J) => {
            x.comps[1] = term(2, n, 1, cx(-1.0));
            x.comps[2] = term(2, n, 2, cx(1.0));
        }
        (NsCoords::N2Homogeneous, GPlus) => {
            x.comps[0] = term(2, n, 2, cx(1.0));
            x.comps[1] = term(2, n, 0, cx(-1.0)).add(&term(2, n - 1, 3, cx(-nf)));
        }
        (NsCoords::N2Homogeneous, GMinus) => {
            x.comps[0] = term(2, n, 1, cx(1.0));
            x.comps[2] = term(2, n, 0, cx(-1.0)).add(&term(2, n - 1, 3, cx(nf)));
        }
        _ => return Err(mismatch()),
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Relation tables
// ---------------------------------------------------------------------------

/// Generator families whose relation tables can be verified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsFamily {
    /// L, G on (1|1) superspace.
    N1,
    /// L, J, G1, G2 in nonhomogeneous coordinates.
    N2Nonhomogeneous,
    /// L, G, J, G* on (1|1) superspace, realizing the N=2 algebra.
    N1Extended,
    /// L, J, G+, G− in homogeneous coordinates.
    N2Homogeneous,
}

impl NsFamily {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "n1" => Some(NsFamily::N1),
            "n2-nonhomogeneous" => Some(NsFamily::N2Nonhomogeneous),
            "n1-extended" => Some(NsFamily::N1Extended),
            "n2-homogeneous" => Some(NsFamily::N2Homogeneous),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NsFamily::N1 => "n1",
            NsFamily::N2Nonhomogeneous => "n2-nonhomogeneous",
            NsFamily::N1Extended => "n1-extended",
            NsFamily::N2Homogeneous => "n2-homogeneous",
        }
    }

    pub fn coords(&self) -> NsCoords {
        match self {
            NsFamily::N1 | NsFamily::N1Extended => NsCoords::N1,
            NsFamily::N2Nonhomogeneous => NsCoords::N2Nonhomogeneous,
            NsFamily::N2Homogeneous => NsCoords::N2Homogeneous,
        }
    }

    pub fn kinds(&self) -> Vec<GenKind> {
        use GenKind::*;
        match self {
            NsFamily::N1 => vec![L, G],
            NsFamily::N2Nonhomogeneous => vec![L, J, G1, G2],
            NsFamily::N1Extended => vec![L, J, G, GStar],
            NsFamily::N2Homogeneous => vec![L, J, GPlus, GMinus],
        }
    }

    /// Role of a kind in the nonhomogeneous N=2 relations (1 or 2 for odd kinds).
    fn odd_slot(&self, k: GenKind) -> u8 {
        match (self, k) {
            (_, GenKind::G1) | (NsFamily::N1, GenKind::G) | (NsFamily::N1Extended, GenKind::G) => 1,
            (_, GenKind::G2) | (_, GenKind::GStar) => 2,
            (_, GenKind::GPlus) => 1,
            (_, GenKind::GMinus) => 2,
            _ => 0,
        }
    }

    fn odd_kind(&self, slot: u8) -> GenKind {
        match (self, slot) {
            (NsFamily::N1 | NsFamily::N1Extended, 1) => GenKind::G,
            (NsFamily::N1Extended, _) => GenKind::GStar,
            (NsFamily::N2Nonhomogeneous, 1) => GenKind::G1,
            (NsFamily::N2Nonhomogeneous, _) => GenKind::G2,
            (NsFamily::N2Homogeneous, 1) => GenKind::GPlus,
            _ => GenKind::GMinus,
        }
    }
}

/// A linear combination of generators: (coefficient, kind, index).
pub type Combination = Vec<(Complex64, GenKind, i32)>;

/// Structure constants at d = 0: [X_a, Y_b] as a combination of generators.
pub fn structure_constants(family: NsFamily, x: GenKind, a: i32, y: GenKind, b: i32) -> Combination {
    use GenKind::*;
    let (af, bf) = (a as f64, b as f64);
    let homogeneous = family == NsFamily::N2Homogeneous;
    match (x, y) {
        (L, L) => vec![(cx(af - bf), L, a + b)],
        (L, J) => vec![(cx(-bf), J, a + b)],
        (J, L) => vec![(cx(af), J, a + b)],
        (J, J) => vec![],
        // [L_m, G_{k−1/2}] = (m/2 − k + 1/2) G_{m+k−1/2}
        (L, g) if g.is_odd() => vec![(cx(af / 2.0 - bf + 0.5), g, a + b)],
        (g, L) if g.is_odd() => vec![(cx(-(bf / 2.0 - af + 0.5)), g, a + b)],
        (J, g) | (g, J) if g.is_odd() => {
            let (m, k, sign) = if x == J { (a, b, 1.0) } else { (b, a, -1.0) };
            let slot = family.odd_slot(g);
            let (c, target) = if homogeneous {
                (if slot == 1 { cx(1.0) } else { cx(-1.0) }, g)
            } else if slot == 1 {
                (-I, family.odd_kind(2))
            } else {
                (I, family.odd_kind(1))
            };
            vec![(c * sign, target, m + k)]
        }
        (gx, gy) => {
            // both odd: r − s = a − b, r + s = a + b − 1
            let (sx, sy) = (family.odd_slot(gx), family.odd_slot(gy));
            let diff = af - bf;
            let sum = a + b - 1;
            if homogeneous {
                match (sx, sy) {
                    (1, 2) => vec![(cx(2.0), L, sum), (cx(diff), J, sum)],
                    (2, 1) => vec![(cx(2.0), L, sum), (cx(-diff), J, sum)],
                    _ => vec![],
                }
            } else if sx == sy {
                vec![(cx(2.0), L, sum)]
            } else if sx == 1 {
                vec![(-I * diff, J, sum)]
            } else {
                vec![(I * diff, J, sum)]
            }
        }
    }
}

fn realize(family: NsFamily, comb: &Combination, parity: Parity) -> Result<SuperDerivation> {
    let mut out = SuperDerivation::zero(family.coords(), 0, parity);
    for &(c, k, n) in comb {
        out = out.add(&make_generator(k, n, family.coords())?.scale_c(c));
    }
    Ok(out)
}

/// One failed relation.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub bracket: String,
    pub computed: String,
    pub expected: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NsReport {
    pub family: NsFamily,
    pub max_n: i32,
    /// Number of unordered generator pairs, self-pairs included.
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl NsReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn label(k: GenKind, n: i32) -> String {
    if k.is_odd() {
        format!("{}_({}-1/2)", k.name(), n)
    } else {
        format!("{}_{}", k.name(), n)
    }
}

/// Brackets every pair of generators with index in [−max_n, max_n] and compares
/// with the structure constants by exact coefficient equality.
pub fn verify_ns_relations(family: NsFamily, max_n: i32) -> Result<NsReport> {
    let coords = family.coords();
    let mut gens = Vec::new();
    for k in family.kinds() {
        for n in -max_n..=max_n {
            gens.push((k, n, make_generator(k, n, coords)?));
        }
    }
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for i in 0..gens.len() {
        for j in i..gens.len() {
            let (kx, a, x) = &gens[i];
            let (ky, b, y) = &gens[j];
            checked += 1;
            let got = super_bracket(x, y)?;
            let want = realize(family, &structure_constants(family, *kx, *a, *ky, *b), got.parity)?;
            if got != want {
                mismatches.push(Mismatch {
                    bracket: format!("[{}, {}]", label(*kx, *a), label(*ky, *b)),
                    computed: got.to_string(),
                    expected: want.to_string(),
                });
            }
        }
    }
    Ok(NsReport { family, max_n, checked, mismatches })
}

// ---------------------------------------------------------------------------
// Loop group
// ---------------------------------------------------------------------------

fn loop_exponent(a: &BTreeMap<i32, Grassmann>, l: usize) -> Result<Laurent> {
    let mut q = Laurent::zero(l);
    for (&n, c) in a {
        if c.l() != l {
            return Err(Error::GeneratorMismatch(l, c.l()));
        }
        if !c.is_even() {
            return Err(Error::Parity(format!("A_{n} must be even")));
        }
        q = q.add(&Laurent::monomial(n, c.clone()));
    }
    Ok(q)
}

/// (z, θ⁺a₀e^{ΣAₙzⁿ}, θ⁻a₀⁻¹e^{−ΣAₙzⁿ}) in homogeneous coordinates over Λ_l.
pub fn loop_exponential(a: &BTreeMap<i32, Grassmann>, a0: &Grassmann, l: usize) -> Result<N2Map> {
    loop_exponential_in(a, a0, l, CoeffMask::Unrestricted)
}

/// As [`loop_exponential`], with a₀ restricted to a coefficient subalgebra.
pub fn loop_exponential_in(a: &BTreeMap<i32, Grassmann>, a0: &Grassmann, l: usize, mask: CoeffMask) -> Result<N2Map> {
    if a0.l() != l {
        return Err(Error::GeneratorMismatch(l, a0.l()));
    }
    if !a0.is_even() {
        return Err(Error::Parity("a0 must be even".into()));
    }
    mask.check("a0", &AnalyticFn::constant(a0.clone()))?;
    let a0_inv = a0.invert().map_err(|_| Error::NonInvertible("a0 has zero body".into()))?;
    let q: AnalyticFn = loop_exponent(a, l)?.into();
    let g_plus = q.exp(true)?.scale_left(a0);
    let g_minus = q.neg().exp(true)?.scale_left(&a0_inv);
    N2Map::new(Coords::Homogeneous, AnalyticFn::z(l), [AnalyticFn::zero(l), AnalyticFn::zero(l)], [g_plus, g_minus])
}

/// −ΣAₙJₙ over Λ_{l+2}.
pub fn loop_generator(a: &BTreeMap<i32, Grassmann>, l: usize) -> Result<SuperDerivation> {
    let total = l + 2;
    let q = loop_exponent(a, l)?.with_l(total)?;
    let mut x = SuperDerivation::zero(NsCoords::N2Homogeneous, l, Parity::Even);
    x.comps[1] = q.scale_right(&Grassmann::generator(total, l + 1));
    x.comps[2] = q.scale_right(&Grassmann::generator(total, l + 2)).neg();
    Ok(x)
}

/// Σ_k X^k(F)/k!, which must terminate within `max_terms` terms.
pub fn operator_exponential(x: &SuperDerivation, f: &Laurent, max_terms: usize) -> Result<Laurent> {
    let mut out = f.clone();
    let mut term = f.clone();
    for k in 1..=max_terms {
        term = x.apply(&term).scale_c(cx(1.0 / k as f64));
        if term.is_zero() {
            return Ok(out);
        }
        out = out.add(&term);
    }
    Err(Error::Invalid(format!("operator exponential did not terminate within {max_terms} terms")))
}

/// The loop-group element computed as exp(−ΣAₙJₙ) followed by the diagonal a₀ scaling,
/// returned as the superfunction components (z̃, θ̃⁺, θ̃⁻) over Λ_{l+2}.
pub fn loop_exponential_operator(a: &BTreeMap<i32, Grassmann>, a0: &Grassmann, l: usize) -> Result<Vec<Laurent>> {
    let x = loop_generator(a, l)?;
    let coords = SuperDerivation::coordinates(NsCoords::N2Homogeneous, l);
    let a0e = a0.embed(l + 2);
    let a0_inv = a0.invert()?.embed(l + 2);
    let mut out = Vec::new();
    for (k, c) in coords.iter().enumerate() {
        let scaled = match k {
            1 => c.scale_right(&a0e),
            2 => c.scale_right(&a0_inv),
            _ => c.clone(),
        };
        out.push(operator_exponential(&x, &scaled, 4 * (l + 2) + 4)?);
    }
    Ok(out)
}
