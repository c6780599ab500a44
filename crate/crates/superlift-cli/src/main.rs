use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use superlift::cech::{check_atlas_cocycle, Atlas, Cover, Transition};
use superlift::json;
use superlift::nsalg::{loop_exponential, loop_exponential_operator, verify_ns_relations, NsFamily};
use superlift::sphere::{sphere_degree, uniformize_sphere, SphereStructure, StepRecord};
use superlift::supermap::{f1_functor, f2_functor, ConditionReport, N2Map, DEFAULT_SAMPLES, DEFAULT_TOL};
use superlift::torus::{is_trivial_type, make_supertorus, types_equivalent, validate_theta_type};
use superlift::Error;

#[derive(Parser, Debug)]
#[command(name = "superlift", version, about = "N=1 and N=2 superconformal structures on superspheres and supertori")]
struct Cli {
    /// Residual tolerance for pass/fail.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Re-express every supernumber over this many generators.
    #[arg(long = "L", global = true)]
    l: Option<usize>,
    /// Sample points per circle for sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the superconformal conditions of an N=1 or N=2 map.
    VerifySuperconformal { map: PathBuf },
    /// Compose two maps (first ∘ second).
    Compose { outer: PathBuf, inner: PathBuf },
    /// Apply F1 to an N=2 map.
    F1 { map: PathBuf },
    /// Apply F2 to an N=1 map.
    F2 { map: PathBuf },
    /// Degree of a two-chart supersphere.
    ClassifySphere { atlas: PathBuf },
    /// Bring a two-chart supersphere to canonical form.
    Uniformize {
        atlas: PathBuf,
        /// Write the accumulated chart changes here.
        #[arg(long)]
        emit_changes: Option<PathBuf>,
    },
    /// Validate a theta type and report its Chern number.
    TorusCheck { theta_type: PathBuf },
    /// Decide whether two theta types give equivalent supertori.
    TorusEquiv { first: PathBuf, second: PathBuf },
    /// Verify the bracket relations of a generator family.
    NsVerify {
        #[arg(long)]
        family: String,
        #[arg(long)]
        max_n: i32,
    },
    /// Loop-group exponential from its coefficients.
    LoopExp { coeffs: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifySuperconformal { .. } => "verify-superconformal",
            Command::Compose { .. } => "compose",
            Command::F1 { .. } => "f1",
            Command::F2 { .. } => "f2",
            Command::ClassifySphere { .. } => "classify-sphere",
            Command::Uniformize { .. } => "uniformize",
            Command::TorusCheck { .. } => "torus-check",
            Command::TorusEquiv { .. } => "torus-equiv",
            Command::NsVerify { .. } => "ns-verify",
            Command::LoopExp { .. } => "loop-exp",
        }
    }
}

/// A library or input failure with the operation that raised it.
struct Failure {
    operation: String,
    error: Error,
}

type Outcome = std::result::Result<(Status, Map<String, Value>), Failure>;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Obstructed,
}

trait Op<T> {
    fn op(self, name: &str) -> std::result::Result<T, Failure>;
}

impl<T> Op<T> for superlift::Result<T> {
    fn op(self, name: &str) -> std::result::Result<T, Failure> {
        self.map_err(|error| Failure { operation: name.to_string(), error })
    }
}

struct Ctx {
    tol: f64,
    l: Option<usize>,
    samples: usize,
}

impl Ctx {
    fn load(&self, path: &Path) -> std::result::Result<(Value, usize), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
            .op("read")?;
        let v = json::parse(&text).op("parse")?;
        let l = json::document_l(&v, self.l).op("parse")?;
        Ok((v, l))
    }

    fn transition(&self, path: &Path) -> std::result::Result<Transition, Failure> {
        let (v, l) = self.load(path)?;
        json::decode_transition(&v, "$", l).op("parse")
    }

    fn n2(&self, path: &Path) -> std::result::Result<N2Map, Failure> {
        let (v, l) = self.load(path)?;
        json::decode_n2(&v, "$", l).op("parse")
    }

    fn atlas(&self, path: &Path) -> std::result::Result<Atlas, Failure> {
        let (v, l) = self.load(path)?;
        json::decode_atlas(&v, "$", l).op("parse")
    }

    fn check(&self, t: &Transition) -> std::result::Result<ConditionReport, Failure> {
        match t {
            Transition::N1(m) => m.check_superconformal(self.samples, self.tol),
            Transition::N2(m) => m.check_superconformal(self.samples, self.tol),
        }
        .op("check_superconformal")
    }
}

fn residuals_value(r: &ConditionReport) -> Value {
    let mut m = Map::new();
    for (k, v) in &r.residuals {
        m.insert(k.clone(), json!(v));
    }
    Value::Object(m)
}

fn condition_details(r: &ConditionReport, out: &mut Map<String, Value>) {
    out.insert("residuals".into(), residuals_value(r));
    out.insert("max_residual".into(), json!(r.max_residual()));
    if !r.failures.is_empty() {
        out.insert("failures".into(), json!(r.failures));
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Map record, or null with a note when a component has no closed form.
fn map_value(t: &Transition, out: &mut Map<String, Value>) {
    match json::encode_transition(t) {
        Ok(v) => {
            out.insert("map".into(), v);
        }
        Err(e) => {
            out.insert("map".into(), Value::Null);
            out.insert("note".into(), json!(e.to_string()));
        }
    }
}

fn sphere_transition(atlas: &Atlas) -> std::result::Result<N2Map, Failure> {
    if atlas.cover != Cover::Sphere2 {
        return Err(Error::Invalid("expected a sphere2 atlas".into())).op("parse");
    }
    match atlas.transitions.get("sou|nor") {
        Some(Transition::N2(m)) => Ok(m.clone()),
        Some(Transition::N1(_)) => Err(Error::Invalid("sphere transition must be an n2 map".into())).op("parse"),
        None => Err(Error::Invalid("atlas lacks transition \"sou|nor\"".into())).op("parse"),
    }
}

fn step_value(s: &StepRecord) -> superlift::Result<Value> {
    Ok(json!({"stage": s.stage, "level": s.level, "nor": json::encode_n2(&s.nor)?, "sou": json::encode_n2(&s.sou)?}))
}

fn run(cmd: &Command, ctx: &Ctx) -> Outcome {
    let mut out = Map::new();
    let status = match cmd {
        Command::VerifySuperconformal { map } => {
            let t = ctx.transition(map)?;
            let r = ctx.check(&t)?;
            condition_details(&r, &mut out);
            pass_if(r.passed())
        }
        Command::Compose { outer, inner } => {
            let composed = match (ctx.transition(outer)?, ctx.transition(inner)?) {
                (Transition::N2(a), Transition::N2(b)) => Transition::N2(a.compose(&b, true).op("compose")?),
                (Transition::N1(a), Transition::N1(b)) => Transition::N1(a.compose(&b, true).op("compose")?),
                _ => return Err(Error::Invalid("cannot compose an n1 map with an n2 map".into())).op("compose"),
            };
            let r = ctx.check(&composed)?;
            condition_details(&r, &mut out);
            map_value(&composed, &mut out);
            pass_if(r.passed())
        }
        Command::F1 { map } => {
            let m = ctx.n2(map)?;
            let t = Transition::N1(f1_functor(&m).op("f1_functor")?);
            let r = ctx.check(&t)?;
            condition_details(&r, &mut out);
            map_value(&t, &mut out);
            pass_if(r.passed())
        }
        Command::F2 { map } => {
            let (v, l) = ctx.load(map)?;
            let m = json::decode_n1(&v, "$", l).op("parse")?;
            let t = Transition::N2(f2_functor(&m, true).op("f2_functor")?);
            let r = ctx.check(&t)?;
            condition_details(&r, &mut out);
            map_value(&t, &mut out);
            pass_if(r.passed())
        }
        Command::ClassifySphere { atlas } => {
            let transition = sphere_transition(&ctx.atlas(atlas)?)?;
            let s = SphereStructure { transition, degree: None };
            match sphere_degree(&s) {
                Ok(n) => {
                    out.insert("degree".into(), json!(n));
                    Status::Pass
                }
                Err(Error::Obstructed { level, powers }) => {
                    out.insert("level".into(), json!(level));
                    out.insert("uncovered_powers".into(), json!(powers));
                    Status::Obstructed
                }
                Err(e) => return Err(e).op("sphere_degree"),
            }
        }
        Command::Uniformize { atlas, emit_changes } => {
            let transition = sphere_transition(&ctx.atlas(atlas)?)?;
            let u = match uniformize_sphere(&transition) {
                Ok(u) => u,
                Err(Error::Obstructed { level, powers }) => {
                    out.insert("level".into(), json!(level));
                    out.insert("uncovered_powers".into(), json!(powers));
                    return Ok((Status::Obstructed, out));
                }
                Err(e) => return Err(e).op("uniformize_sphere"),
            };
            out.insert("degree".into(), json!(u.n));
            out.insert("verification_residual".into(), json!(u.verification_residual));
            out.insert("steps".into(), json!(u.steps.len()));
            if let Some(path) = emit_changes {
                let steps: Vec<Value> = u.steps.iter().map(step_value).collect::<superlift::Result<_>>().op("emit_changes")?;
                let doc = json!({
                    "degree": u.n,
                    "nor": json::encode_n2(&u.nor).op("emit_changes")?,
                    "sou": json::encode_n2(&u.sou).op("emit_changes")?,
                    "canonical": json::encode_n2(&u.canonical.transition).op("emit_changes")?,
                    "steps": steps,
                });
                let text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
                std::fs::write(path, text + "\n")
                    .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
                    .op("emit_changes")?;
                out.insert("changes".into(), json!(path.display().to_string()));
            }
            pass_if(u.verification_residual <= ctx.tol)
        }
        Command::TorusCheck { theta_type } => {
            let (v, l) = ctx.load(theta_type)?;
            let t = json::decode_theta_type(&v, "$", l).op("parse")?;
            match validate_theta_type(&t) {
                Ok(chern) => {
                    let s = make_supertorus(&t).op("make_supertorus")?;
                    let r = check_atlas_cocycle(&s.atlas().op("torus_atlas")?, ctx.samples, ctx.tol).op("check_atlas_cocycle")?;
                    out.insert("chern".into(), json!(chern));
                    out.insert("trivial".into(), json!(is_trivial_type(&t)));
                    out.insert("cocycle_residual".into(), json!(r.max_residual()));
                    pass_if(r.passed())
                }
                Err(Error::InconsistentType(msg)) => {
                    out.insert("reason".into(), json!(msg));
                    Status::Fail
                }
                Err(e) => return Err(e).op("validate_theta_type"),
            }
        }
        Command::TorusEquiv { first, second } => {
            let (v1, l1) = ctx.load(first)?;
            let (v2, l2) = ctx.load(second)?;
            let l = l1.max(l2);
            let t1 = json::decode_theta_type(&v1, "$", l).op("parse")?;
            let t2 = json::decode_theta_type(&v2, "$", l).op("parse")?;
            let c1 = validate_theta_type(&t1).op("validate_theta_type")?;
            let c2 = validate_theta_type(&t2).op("validate_theta_type")?;
            let eq = types_equivalent(&t1, &t2);
            out.insert("chern".into(), json!([c1, c2]));
            out.insert("equivalent".into(), json!(eq));
            pass_if(eq)
        }
        Command::NsVerify { family, max_n } => {
            let fam = NsFamily::parse(family)
                .ok_or_else(|| Error::Invalid(format!("unknown family {family:?}; expected n1, n2-nonhomogeneous, n1-extended or n2-homogeneous")))
                .op("parse")?;
            if *max_n < 0 {
                return Err(Error::Invalid("--max-n must be non-negative".into())).op("parse");
            }
            let r = verify_ns_relations(fam, *max_n).op("verify_ns_relations")?;
            out.insert("family".into(), json!(fam.name()));
            out.insert("checked".into(), json!(r.checked));
            out.insert("mismatch_count".into(), json!(r.mismatches.len()));
            let shown: Vec<Value> = r
                .mismatches
                .iter()
                .take(20)
                .map(|m| json!({"bracket": m.bracket, "computed": m.computed, "expected": m.expected}))
                .collect();
            out.insert("mismatches".into(), Value::Array(shown));
            pass_if(r.passed())
        }
        Command::LoopExp { coeffs } => {
            let text = std::fs::read_to_string(coeffs)
                .map_err(|e| Error::Invalid(format!("{}: {e}", coeffs.display())))
                .op("read")?;
            let v = json::parse(&text).op("parse")?;
            let input = json::decode_loop_input(&v, "$", ctx.l).op("parse")?;
            let m = loop_exponential(&input.a, &input.a0, input.l).op("loop_exponential")?;
            let op = loop_exponential_operator(&input.a, &input.a0, input.l).op("loop_exponential_operator")?;
            let sup = m.to_super();
            let closed = std::iter::once(&sup.z).chain(sup.theta.iter());
            let mut diff: f64 = 0.0;
            for (x, y) in op.into_iter().zip(closed) {
                let d = superlift::analytic::AnalyticFn::from(x).sub(y);
                diff = diff.max(d.coeff_max_abs().unwrap_or(f64::INFINITY));
            }
            let r = m.check_superconformal(ctx.samples, ctx.tol).op("check_superconformal")?;
            condition_details(&r, &mut out);
            out.insert("operator_difference".into(), json!(diff));
            map_value(&Transition::N2(m), &mut out);
            pass_if(r.passed() && diff <= ctx.tol)
        }
    };
    Ok((status, out))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SUPERLIFT_LOG")).init();
    let cli = Cli::parse();
    let ctx = Ctx { tol: cli.tol, l: cli.l, samples: cli.samples };
    let name = cli.command.name();
    let (status, mut body, code) = match run(&cli.command, &ctx) {
        Ok((s, body)) => {
            let (label, code) = match s {
                Status::Pass => ("pass", 0),
                Status::Fail => ("fail", 1),
                Status::Obstructed => ("obstructed", 1),
            };
            (label, body, code)
        }
        Err(f) => {
            log::error!("{}: {}", f.operation, f.error);
            let mut body = Map::new();
            body.insert("operation".into(), json!(f.operation));
            body.insert("error".into(), json!(f.error.to_string()));
            if let Error::Schema { path, .. } = &f.error {
                body.insert("field".into(), json!(path));
            }
            ("error", body, 2)
        }
    };
    body.insert("command".into(), json!(name));
    body.insert("status".into(), json!(status));
    println!("{}", serde_json::to_string_pretty(&Value::Object(body)).expect("JSON values always serialize"));
    ExitCode::from(code)
}
