//! Atlas consistency checks and the weighted Laurent splitting used to kill
//! transition data one soul level at a time.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::supermap::{N1Map, N2Map, SuperMap};

/// Complex Laurent polynomial as power → coefficient.
pub type CLaurent = BTreeMap<i32, Complex64>;

/// Cover shape of an atlas.
#[derive(Clone, Debug, PartialEq)]
pub enum Cover {
    /// Two charts "nor" and "sou"; the transition key "sou|nor" maps nor to sou coordinates.
    Sphere2,
    /// Lattice generators "1" and "tau" acting on one chart of ℂ.
    Torus { tau: Complex64 },
    /// Arbitrary charts with transitions keyed "a|b" mapping b to a coordinates.
    Generic,
}

/// A transition function of either supersymmetry.
#[derive(Clone, Debug, PartialEq)]
pub enum Transition {
    N1(N1Map),
    N2(N2Map),
}

impl Transition {
    fn to_super(&self) -> SuperMap {
        match self {
            Transition::N1(m) => m.to_super(),
            Transition::N2(m) => m.to_super(),
        }
    }

    fn l(&self) -> usize {
        match self {
            Transition::N1(m) => m.l(),
            Transition::N2(m) => m.l(),
        }
    }

    fn n(&self) -> usize {
        match self {
            Transition::N1(_) => 1,
            Transition::N2(_) => 2,
        }
    }
}

/// Charts and transition maps.
#[derive(Clone, Debug, PartialEq)]
pub struct Atlas {
    pub cover: Cover,
    pub transitions: BTreeMap<String, Transition>,
}

/// One compared pair of maps and its largest sampled residual per component.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleEntry {
    pub label: String,
    pub residuals: Vec<(String, f64)>,
}

impl CocycleEntry {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, (_, r)| a.max(*r))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleReport {
    pub entries: Vec<CocycleEntry>,
    pub tol: f64,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|e| e.max_residual() <= self.tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.max_residual()))
    }
}

fn component_names(n: usize) -> Vec<&'static str> {
    match n {
        1 => vec!["z", "theta"],
        _ => vec!["z", "theta1", "theta2"],
    }
}

/// Residuals are measured relative to max(1, |b|) at each sample point.
fn compare(label: String, a: &SuperMap, b: &SuperMap, samples: usize) -> Result<CocycleEntry> {
    let names = component_names(a.n());
    let mut residuals = Vec::new();
    let comps_a = std::iter::once(&a.z).chain(a.theta.iter());
    let comps_b = std::iter::once(&b.z).chain(b.theta.iter());
    for ((fa, fb), name) in comps_a.zip(comps_b).zip(names) {
        let diff = fa.sub(fb);
        let mut worst = 0.0f64;
        for z in crate::supermap::circle_points(samples) {
            let scale = fb.eval_body(z)?.max_abs().max(1.0);
            worst = worst.max(diff.eval_body(z)?.max_abs() / scale);
        }
        residuals.push((name.to_string(), worst));
    }
    Ok(CocycleEntry { label, residuals })
}

fn get<'a>(atlas: &'a Atlas, key: &str) -> Result<&'a Transition> {
    atlas.transitions.get(key).ok_or_else(|| Error::Invalid(format!("atlas lacks transition {key:?}")))
}

fn inverse_super(t: &Transition) -> Result<SuperMap> {
    match t {
        Transition::N2(m) => Ok(m.invert(true)?.to_super()),
        Transition::N1(_) => Err(Error::Invalid("N=1 pair consistency needs both transition directions".into())),
    }
}

/// Compares composed transitions with the direct ones on every overlap the cover provides.
///
/// The two-chart sphere has no triple of distinct charts, so its check is pair
/// consistency H_{sou,nor}∘H_{nor,sou} = id.
pub fn check_atlas_cocycle(atlas: &Atlas, samples: usize, tol: f64) -> Result<CocycleReport> {
    let mut entries = Vec::new();
    match &atlas.cover {
        Cover::Sphere2 => {
            let h = get(atlas, "sou|nor")?;
            let id = SuperMap::identity(h.l(), h.n());
            let back = match atlas.transitions.get("nor|sou") {
                Some(b) => b.to_super(),
                None => inverse_super(h)?,
            };
            let fwd = h.to_super();
            entries.push(compare("sou|nor o nor|sou vs id".into(), &fwd.compose(&back, true)?, &id, samples)?);
            entries.push(compare("nor|sou o sou|nor vs id".into(), &back.compose(&fwd, true)?, &id, samples)?);
        }
        Cover::Torus { .. } => {
            let h1 = get(atlas, "1")?.to_super();
            let ht = get(atlas, "tau")?.to_super();
            let a = h1.compose(&ht, true)?;
            let b = ht.compose(&h1, true)?;
            entries.push(compare("1 o tau vs tau o 1".into(), &a, &b, samples)?);
            if let Some(hs) = atlas.transitions.get("1+tau") {
                entries.push(compare("1 o tau vs 1+tau".into(), &a, &hs.to_super(), samples)?);
            }
        }
        Cover::Generic => {
            let mut keyed: BTreeMap<(String, String), SuperMap> = BTreeMap::new();
            for (key, t) in &atlas.transitions {
                let (a, b) = key.split_once('|').ok_or_else(|| Error::Invalid(format!("transition key {key:?} is not of the form a|b")))?;
                keyed.insert((a.to_string(), b.to_string()), t.to_super());
            }
            for ((a, b), hab) in &keyed {
                for ((b2, c), hbc) in &keyed {
                    if b2 != b || c == b {
                        continue;
                    }
                    let composed = hab.compose(hbc, true)?;
                    if c == a {
                        let id = SuperMap::identity(hab.l, hab.n());
                        entries.push(compare(format!("{a}|{b} o {b}|{a} vs id"), &composed, &id, samples)?);
                    } else if let Some(hac) = keyed.get(&(a.clone(), c.clone())) {
                        entries.push(compare(format!("{a}|{b} o {b}|{c} vs {a}|{c}"), &composed, hac, samples)?);
                    }
                }
            }
        }
    }
    Ok(CocycleReport { entries, tol })
}

// ---------------------------------------------------------------------------
// Coboundary solver
// ---------------------------------------------------------------------------

/// ℓ(z) = weight(z)·b_nor(z) − b_sou(1/z) with weight = c·z^k.
#[derive(Clone, Debug, PartialEq)]
pub struct CoboundaryProblem {
    pub ell: CLaurent,
    pub weight_coeff: Complex64,
    pub weight_power: i32,
    /// Maximal degree of b_nor and b_sou; defaults to 2·(max |power|) + 4.
    pub degree_bound: Option<usize>,
    /// Coefficients at or below this modulus count as zero.
    pub tol: f64,
}

impl CoboundaryProblem {
    pub fn new(ell: CLaurent, weight_coeff: Complex64, weight_power: i32) -> Self {
        CoboundaryProblem { ell, weight_coeff, weight_power, degree_bound: None, tol: 1e-12 }
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound.unwrap_or_else(|| {
            let m = self.ell.keys().map(|k| k.unsigned_abs()).chain([self.weight_power.unsigned_abs()]).max().unwrap_or(0);
            2 * m as usize + 4
        })
    }
}

/// Polynomials b_nor(z) and b_sou(w) as power → coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting {
    pub b_nor: CLaurent,
    pub b_sou: CLaurent,
}

/// Powers of ℓ that no choice of b_nor, b_sou can reach.
#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction {
    pub uncovered_powers: Vec<i32>,
    pub residual: CLaurent,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoboundaryOutcome {
    Solved(Splitting),
    Obstructed(Obstruction),
}

/// Matches Laurent coefficients of ℓ = c·z^k·b_nor(z) − b_sou(1/z).
///
/// weight·b_nor covers powers k..k+D and b_sou(1/z) covers −D..0. Powers in
/// both ranges go to b_nor.
pub fn solve_coboundary(p: &CoboundaryProblem) -> Result<CoboundaryOutcome> {
    if p.weight_coeff.norm() == 0.0 {
        return Err(Error::Invalid("coboundary weight vanishes".into()));
    }
    let d = p.degree_bound() as i32;
    let k = p.weight_power;
    let mut b_nor = CLaurent::new();
    let mut b_sou = CLaurent::new();
    let mut residual = CLaurent::new();
    for (&pow, &v) in &p.ell {
        if v.norm() <= p.tol {
            continue;
        }
        if pow >= k && pow <= k + d {
            b_nor.insert(pow - k, v / p.weight_coeff);
        } else if pow <= 0 && pow >= -d {
            b_sou.insert(-pow, -v);
        } else if pow > 0 && pow < k {
            residual.insert(pow, v);
        } else {
            return Err(Error::DegreeBoundExceeded(format!("power {pow} needs degree above {d}")));
        }
    }
    if !residual.is_empty() {
        return Ok(CoboundaryOutcome::Obstructed(Obstruction { uncovered_powers: (1..k).collect(), residual }));
    }
    Ok(CoboundaryOutcome::Solved(Splitting { b_nor, b_sou }))
}

/// weight·b_nor(z) − b_sou(1/z) − ℓ(z) as a Laurent polynomial.
pub fn splitting_residual(p: &CoboundaryProblem, s: &Splitting) -> CLaurent {
    let mut out = CLaurent::new();
    for (&m, &v) in &s.b_nor {
        *out.entry(m + p.weight_power).or_default() += p.weight_coeff * v;
    }
    for (&m, &v) in &s.b_sou {
        *out.entry(-m).or_default() -= v;
    }
    for (&m, &v) in &p.ell {
        *out.entry(m).or_default() -= v;
    }
    out.retain(|_, v| v.norm() > 0.0);
    out
}
