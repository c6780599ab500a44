//! JSON encoding of supernumbers, functions, maps, atlases and theta types.
//!
//! Decoding reports the failing field as a JSON path; syntax errors carry line
//! and column.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::analytic::{AnalyticFn, ExpPoly, Laurent};
use crate::cech::{Atlas, Cover, Transition};
use crate::error::{Error, Result};
use crate::grassmann::{Grassmann, MultiIndex, MAX_L};
use crate::supermap::{CoeffMask, Coords, N1Map, N2Map};
use crate::torus::ThetaType;

/// Parses text, mapping syntax errors to line/column diagnostics.
pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

/// Generator count shared by every supernumber in a document, or the override.
pub fn document_l(v: &Value, l_override: Option<usize>) -> Result<usize> {
    if let Some(l) = l_override {
        return Ok(l);
    }
    let mut found = BTreeMap::new();
    collect_l(v, "$", &mut found);
    let mut values = found.into_iter();
    match values.next() {
        None => Ok(0),
        Some((l, _)) => match values.next() {
            None => Ok(l),
            Some((l2, path)) => Err(Error::schema(path, format!("L = {l2} conflicts with L = {l} elsewhere; pass --L to embed"))),
        },
    }
}

fn collect_l(v: &Value, path: &str, found: &mut BTreeMap<usize, String>) {
    match v {
        Value::Object(m) => {
            if let Some(l) = m.get("L").and_then(Value::as_u64) {
                found.entry(l as usize).or_insert_with(|| format!("{path}.L"));
            }
            for (k, x) in m {
                collect_l(x, &format!("{path}.{k}"), found);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                collect_l(x, &format!("{path}[{i}]"), found);
            }
        }
        _ => {}
    }
}

fn field<'a>(v: &'a Value, path: &str, key: &str) -> Result<&'a Value> {
    let obj = v.as_object().ok_or_else(|| Error::schema(path, "expected an object"))?;
    obj.get(key).ok_or_else(|| Error::schema(path, format!("missing field {key:?}")))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::schema(path, "expected an object"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::schema(path, "expected a number"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::schema(path, "expected a string"))
}

fn lib_err(path: &str, e: Error) -> Error {
    match e {
        Error::Schema { .. } => e,
        other => Error::schema(path, other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

pub fn encode_complex(c: Complex64) -> Value {
    json!({"re": c.re, "im": c.im})
}

/// {"re","im"}; a bare number is read as real.
pub fn decode_complex(v: &Value, path: &str) -> Result<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    let obj = object(v, path)?;
    for k in obj.keys() {
        if k != "re" && k != "im" {
            return Err(Error::schema(format!("{path}.{k}"), "unknown field"));
        }
    }
    let re = obj.get("re").map(|x| number(x, &format!("{path}.re"))).transpose()?.unwrap_or(0.0);
    let im = obj.get("im").map(|x| number(x, &format!("{path}.im"))).transpose()?.unwrap_or(0.0);
    Ok(Complex64::new(re, im))
}

pub fn encode_grassmann(g: &Grassmann) -> Value {
    let terms: Vec<Value> = g
        .terms()
        .iter()
        .map(|&(mask, c)| json!({"idx": MultiIndex::from_mask(mask).indices(), "re": c.re, "im": c.im}))
        .collect();
    json!({"L": g.l(), "terms": terms})
}

/// Reads {"L", "terms"} and re-expresses it over Λ_l.
pub fn decode_grassmann(v: &Value, path: &str, l: usize) -> Result<Grassmann> {
    let declared = field(v, path, "L")?.as_u64().ok_or_else(|| Error::schema(format!("{path}.L"), "expected a non-negative integer"))? as usize;
    if declared > MAX_L {
        return Err(Error::schema(format!("{path}.L"), format!("L = {declared} exceeds {MAX_L}")));
    }
    let tp = format!("{path}.terms");
    let terms = field(v, path, "terms")?.as_array().ok_or_else(|| Error::schema(&tp, "expected an array"))?;
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        let p = format!("{tp}[{i}]");
        let ip = format!("{p}.idx");
        let idx = field(t, &p, "idx")?.as_array().ok_or_else(|| Error::schema(&ip, "expected an array"))?;
        let mut mask = 0u32;
        let mut last = 0u64;
        for (k, j) in idx.iter().enumerate() {
            let j = j.as_u64().ok_or_else(|| Error::schema(format!("{ip}[{k}]"), "expected a positive integer"))?;
            if j == 0 || j as usize > declared {
                return Err(Error::schema(format!("{ip}[{k}]"), format!("generator {j} outside 1..={declared}")));
            }
            if j <= last {
                return Err(Error::schema(&ip, "indices must be strictly increasing"));
            }
            last = j;
            mask |= 1 << (j - 1);
        }
        if !seen.insert(mask) {
            return Err(Error::schema(&ip, "duplicate subset"));
        }
        let c = decode_complex(&json!({"re": t.get("re").cloned().unwrap_or(json!(0.0)), "im": t.get("im").cloned().unwrap_or(json!(0.0))}), &p)?;
        out.push((mask, c));
    }
    Grassmann::from_terms(declared, out).with_l(l).map_err(|e| lib_err(path, e))
}

// ---------------------------------------------------------------------------
// Functions
// ---------------------------------------------------------------------------

fn encode_coeffs(p: &Laurent) -> Value {
    let mut m = Map::new();
    for (k, g) in p.coeffs() {
        m.insert(k.to_string(), encode_grassmann(g));
    }
    Value::Object(m)
}

fn decode_coeffs(v: &Value, path: &str, l: usize) -> Result<Laurent> {
    let obj = object(v, path)?;
    let mut pairs = Vec::new();
    for (k, g) in obj {
        let p = format!("{path}.{k}");
        let power: i32 = k.parse().map_err(|_| Error::schema(&p, "power key must be an integer"))?;
        pairs.push((power, decode_grassmann(g, &p, l)?));
    }
    Ok(Laurent::from_pairs(l, pairs))
}

/// Laurent polynomials as "laurent", other exponential polynomials as "exp_sum".
pub fn encode_fn(f: &AnalyticFn) -> Result<Value> {
    let p = f.as_exp_poly().ok_or_else(|| Error::Invalid("sampled functions have no JSON form".into()))?;
    if let Some(lp) = p.as_laurent() {
        return Ok(json!({"variant": "laurent", "coeffs": encode_coeffs(&lp)}));
    }
    let terms: Vec<Value> = p.terms().iter().map(|(r, lp)| json!({"rate": encode_complex(*r), "coeffs": encode_coeffs(lp)})).collect();
    Ok(json!({"variant": "exp_sum", "terms": terms}))
}

pub fn decode_fn(v: &Value, path: &str, l: usize) -> Result<AnalyticFn> {
    let variant = string(field(v, path, "variant")?, &format!("{path}.variant"))?;
    match variant {
        "laurent" => Ok(decode_coeffs(field(v, path, "coeffs")?, &format!("{path}.coeffs"), l)?.into()),
        "exp_affine" => {
            let scale = decode_grassmann(field(v, path, "scale")?, &format!("{path}.scale"), l)?;
            let rate = decode_grassmann(field(v, path, "rate")?, &format!("{path}.rate"), l)?;
            let pre = match v.get("prefactor") {
                Some(p) => Some(decode_coeffs(p, &format!("{path}.prefactor"), l)?),
                None => None,
            };
            AnalyticFn::exp_affine(&scale, &rate, pre.as_ref()).map_err(|e| lib_err(path, e))
        }
        "exp_sum" => {
            let tp = format!("{path}.terms");
            let arr = field(v, path, "terms")?.as_array().ok_or_else(|| Error::schema(&tp, "expected an array"))?;
            let mut terms = Vec::new();
            for (i, t) in arr.iter().enumerate() {
                let p = format!("{tp}[{i}]");
                let rate = decode_complex(field(t, &p, "rate")?, &format!("{p}.rate"))?;
                terms.push((rate, decode_coeffs(field(t, &p, "coeffs")?, &format!("{p}.coeffs"), l)?));
            }
            Ok(ExpPoly::from_terms(l, terms).into())
        }
        other => Err(Error::schema(format!("{path}.variant"), format!("unknown variant {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

fn mask_value(v: &Value, path: &str) -> Result<CoeffMask> {
    match v.get("coeff_mask") {
        None | Some(Value::Null) => Ok(CoeffMask::Unrestricted),
        Some(m) => m
            .as_u64()
            .map(|m| CoeffMask::FirstGenerators(m as usize))
            .ok_or_else(|| Error::schema(format!("{path}.coeff_mask"), "expected a non-negative integer")),
    }
}

pub fn encode_n2(m: &N2Map) -> Result<Value> {
    let (ps, gs) = match m.coords {
        Coords::Homogeneous => (["psi_plus", "psi_minus"], ["g_plus", "g_minus"]),
        Coords::Nonhomogeneous => (["psi_1", "psi_2"], ["g_1", "g_2"]),
    };
    let mut o = Map::new();
    o.insert("kind".into(), json!("n2"));
    o.insert("coords".into(), json!(m.coords.name()));
    o.insert("f".into(), encode_fn(&m.f)?);
    for k in 0..2 {
        o.insert(ps[k].into(), encode_fn(&m.psi[k])?);
        o.insert(gs[k].into(), encode_fn(&m.g[k])?);
    }
    Ok(Value::Object(o))
}

pub fn encode_n1(m: &N1Map) -> Result<Value> {
    Ok(json!({"kind": "n1", "f": encode_fn(&m.f)?, "xi": encode_fn(&m.xi)?, "psi": encode_fn(&m.psi)?, "g": encode_fn(&m.g)?}))
}

pub fn encode_transition(t: &Transition) -> Result<Value> {
    match t {
        Transition::N1(m) => encode_n1(m),
        Transition::N2(m) => encode_n2(m),
    }
}

/// Decodes an "n1" or "n2" map record.
pub fn decode_transition(v: &Value, path: &str, l: usize) -> Result<Transition> {
    let kind = string(field(v, path, "kind")?, &format!("{path}.kind"))?;
    let get = |k: &str| decode_fn(field(v, path, k)?, &format!("{path}.{k}"), l);
    match kind {
        "n2" => {
            let coords = match string(field(v, path, "coords")?, &format!("{path}.coords"))? {
                "homogeneous" => Coords::Homogeneous,
                "nonhomogeneous" => Coords::Nonhomogeneous,
                other => return Err(Error::schema(format!("{path}.coords"), format!("unknown coordinates {other:?}"))),
            };
            let (ps, gs) = match coords {
                Coords::Homogeneous => (["psi_plus", "psi_minus"], ["g_plus", "g_minus"]),
                Coords::Nonhomogeneous => (["psi_1", "psi_2"], ["g_1", "g_2"]),
            };
            let m = N2Map::new(coords, get("f")?, [get(ps[0])?, get(ps[1])?], [get(gs[0])?, get(gs[1])?]).map_err(|e| lib_err(path, e))?;
            m.check_mask(mask_value(v, path)?).map_err(|e| lib_err(path, e))?;
            Ok(Transition::N2(m))
        }
        "n1" => Ok(Transition::N1(N1Map::new(get("f")?, get("xi")?, get("psi")?, get("g")?).map_err(|e| lib_err(path, e))?)),
        other => Err(Error::schema(format!("{path}.kind"), format!("unknown map kind {other:?}"))),
    }
}

pub fn decode_n2(v: &Value, path: &str, l: usize) -> Result<N2Map> {
    match decode_transition(v, path, l)? {
        Transition::N2(m) => Ok(m),
        Transition::N1(_) => Err(Error::schema(format!("{path}.kind"), "expected an n2 map")),
    }
}

pub fn decode_n1(v: &Value, path: &str, l: usize) -> Result<N1Map> {
    match decode_transition(v, path, l)? {
        Transition::N1(m) => Ok(m),
        Transition::N2(_) => Err(Error::schema(format!("{path}.kind"), "expected an n1 map")),
    }
}

// ---------------------------------------------------------------------------
// Atlases and types
// ---------------------------------------------------------------------------

pub fn encode_atlas(a: &Atlas) -> Result<Value> {
    let mut ts = Map::new();
    for (k, t) in &a.transitions {
        ts.insert(k.clone(), encode_transition(t)?);
    }
    let mut o = Map::new();
    match a.cover {
        Cover::Sphere2 => {
            o.insert("cover".into(), json!("sphere2"));
        }
        Cover::Torus { tau } => {
            o.insert("cover".into(), json!("torus"));
            o.insert("tau".into(), encode_complex(tau));
        }
        Cover::Generic => {
            o.insert("cover".into(), json!("generic"));
        }
    }
    o.insert("transitions".into(), Value::Object(ts));
    Ok(Value::Object(o))
}

pub fn decode_atlas(v: &Value, path: &str, l: usize) -> Result<Atlas> {
    let cover = match string(field(v, path, "cover")?, &format!("{path}.cover"))? {
        "sphere2" => Cover::Sphere2,
        "torus" => Cover::Torus { tau: decode_complex(field(v, path, "tau")?, &format!("{path}.tau"))? },
        "generic" => Cover::Generic,
        other => return Err(Error::schema(format!("{path}.cover"), format!("unknown cover {other:?}"))),
    };
    let tp = format!("{path}.transitions");
    let mut transitions = BTreeMap::new();
    for (k, t) in object(field(v, path, "transitions")?, &tp)? {
        transitions.insert(k.clone(), decode_transition(t, &format!("{tp}.{k}"), l)?);
    }
    Ok(Atlas { cover, transitions })
}

pub fn encode_theta_type(t: &ThetaType) -> Value {
    json!({
        "tau": encode_complex(t.tau),
        "a1": encode_grassmann(&t.a1),
        "a_tau": encode_grassmann(&t.a_tau),
        "b1": encode_grassmann(&t.b1),
        "b_tau": encode_grassmann(&t.b_tau),
    })
}

pub fn decode_theta_type(v: &Value, path: &str, l: usize) -> Result<ThetaType> {
    let g = |k: &str| decode_grassmann(field(v, path, k)?, &format!("{path}.{k}"), l);
    Ok(ThetaType {
        tau: decode_complex(field(v, path, "tau")?, &format!("{path}.tau"))?,
        a1: g("a1")?,
        a_tau: g("a_tau")?,
        b1: g("b1")?,
        b_tau: g("b_tau")?,
    })
}

/// Input of the loop-group exponential.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopInput {
    pub l: usize,
    pub a0: Grassmann,
    pub a: BTreeMap<i32, Grassmann>,
}

/// {"L", "a0" (default 1), "A": {"n": <Grassmann>}}.
pub fn decode_loop_input(v: &Value, path: &str, l_override: Option<usize>) -> Result<LoopInput> {
    let l = match l_override {
        Some(l) => l,
        None => field(v, path, "L")?.as_u64().ok_or_else(|| Error::schema(format!("{path}.L"), "expected a non-negative integer"))? as usize,
    };
    let a0 = match v.get("a0") {
        Some(x) => decode_grassmann(x, &format!("{path}.a0"), l)?,
        None => Grassmann::one(l),
    };
    let ap = format!("{path}.A");
    let mut a = BTreeMap::new();
    for (k, g) in object(field(v, path, "A")?, &ap)? {
        let p = format!("{ap}.{k}");
        let n: i32 = k.parse().map_err(|_| Error::schema(&p, "index key must be an integer"))?;
        a.insert(n, decode_grassmann(g, &p, l)?);
    }
    Ok(LoopInput { l, a0, a })
}

pub fn encode_loop_input(x: &LoopInput) -> Value {
    let mut a = Map::new();
    for (n, g) in &x.a {
        a.insert(n.to_string(), encode_grassmann(g));
    }
    json!({"L": x.l, "a0": encode_grassmann(&x.a0), "A": a})
}
