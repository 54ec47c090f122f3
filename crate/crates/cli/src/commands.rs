use std::path::Path;
use std::time::Instant;

use lempertkit::ball::{ball_busemann, ball_poisson_kernel};
use lempertkit::rep::BASE_POINT_RADIUS;
use lempertkit::*;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::io::*;
use crate::*;

/// Cells per independent kernel cache in field dumps; fixed so that output does
/// not depend on the worker count.
const FIELD_CHUNK: usize = 16;

type Evaluator = Box<dyn Fn(&CVector) -> lempertkit::Result<f64>>;

struct Ctx {
    seed: u64,
    verbose: u8,
    start: Instant,
}

impl Ctx {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("[{:8.3}s] {}", self.start.elapsed().as_secs_f64(), msg.as_ref());
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn run(cli: &Cli) -> CmdResult<()> {
    let ctx = Ctx { seed: cli.seed, verbose: cli.verbose, start: Instant::now() };
    match &cli.command {
        Command::Geodesic(GeodesicCmd::Solve { domain, problem, out }) => geodesic_solve(&ctx, domain, problem, out),
        Command::Geodesic(GeodesicCmd::Certify { domain, pair, out }) => geodesic_certify(&ctx, domain, pair, out),
        Command::Distance(a) => distance(&ctx, a),
        Command::Metric(a) => metric(&ctx, a),
        Command::Rep(RepCmd::Map { base, z, out }) => rep_map(&ctx, base, z, out),
        Command::Rep(RepCmd::Inverse { base, w, out }) => rep_inverse(&ctx, base, w, out),
        Command::Rep(RepCmd::Horosphere(a)) | Command::Horosphere(a) => horosphere(&ctx, a),
        Command::Rep(RepCmd::Busemann(a)) | Command::Busemann(a) => busemann_cmd(&ctx, a),
        Command::Ma(MaCmd::Verify { base, samples, shrink, out }) => ma_verify_cmd(&ctx, base, *samples, *shrink, out),
        Command::Ma(MaCmd::Field(a)) | Command::Field(a) => field(&ctx, a),
        Command::Rigidity(RigidityCmd::Verify { f, grid, exclusion, out }) => rigidity(&ctx, f, grid, *exclusion, out),
        Command::Verify(a) => verify(&ctx, a),
    }
}

fn out_path(o: &OutArg) -> Option<&Path> {
    o.out.as_deref()
}

struct Base {
    domain: DomainSpec,
    config: SolverConfig,
    p: CVector,
}

fn load_base(b: &BaseArgs) -> CmdResult<Base> {
    let domain = load_domain(&b.domain.domain)?;
    let config = load_config(b.domain.config.as_deref())?;
    let p = boundary_point(&domain, &b.p)?;
    Ok(Base { domain, config, p })
}

/// A boundary point, or with the prefix `ray:` the exit point of the ray from
/// the domain's anchor in the given direction.
fn boundary_point(domain: &DomainSpec, s: &str) -> CmdResult<CVector> {
    match s.strip_prefix("ray:") {
        Some(dir) => {
            let d = point_in(domain, dir)?;
            Ok(domain.radial_projection(&(domain.anchor() + &d))?)
        }
        None => point_in(domain, s),
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    #[serde(flatten)]
    pair: &'a GeodesicPair,
    certificate: &'a Certificate,
}

fn certified_output(ctx: &Ctx, domain: &DomainSpec, pair: &GeodesicPair, out: &OutArg) -> CmdResult<()> {
    let certificate = geodesic_certificate(pair, domain);
    ctx.log(format!("certificate: {}", certificate.summary()));
    emit_json(&SolveOutput { pair, certificate: &certificate }, out_path(out))?;
    if !certificate.pass {
        return Err(Failure::verdict(format!("certificate FAIL: {}", certificate.summary())));
    }
    Ok(())
}

fn geodesic_solve(ctx: &Ctx, d: &DomainArg, problem: &str, out: &OutArg) -> CmdResult<()> {
    let domain = load_domain(&d.domain)?;
    let config = load_config(d.config.as_deref())?;
    let problem: StationaryProblem = load_json(problem)?;
    ctx.log("solving");
    let pair = solve_stationary(&domain, &problem, &config)?;
    ctx.log(format!("solved at degree {}", pair.phi.degree()));
    certified_output(ctx, &domain, &pair, out)
}

fn geodesic_certify(ctx: &Ctx, d: &DomainArg, pair: &str, out: &OutArg) -> CmdResult<()> {
    let domain = load_domain(&d.domain)?;
    let stored: GeodesicPair = load_json(pair)?;
    let pair = GeodesicPair::assemble(stored.phi, stored.dual, stored.mu, &domain)?;
    certified_output(ctx, &domain, &pair, out)
}

fn distance(ctx: &Ctx, a: &DistanceArgs) -> CmdResult<()> {
    let domain = load_domain(&a.domain.domain)?;
    let config = load_config(a.domain.config.as_deref())?;
    let (z, w) = (point_in(&domain, &a.z)?, point_in(&domain, &a.w)?);
    let d = kobayashi_distance(&domain, &z, &w, &config)?;
    ctx.log(format!("k = {}", d.value));
    emit_json(&d, out_path(&a.out))
}

fn metric(ctx: &Ctx, a: &MetricArgs) -> CmdResult<()> {
    let domain = load_domain(&a.domain.domain)?;
    let config = load_config(a.domain.config.as_deref())?;
    let (z, v) = (point_in(&domain, &a.z)?, point_in(&domain, &a.v)?);
    let m = kobayashi_metric(&domain, &z, &v, &config)?;
    ctx.log(format!("κ = {}", m.value));
    emit_json(&m, out_path(&a.out))
}

fn rep_map(ctx: &Ctx, b: &BaseArgs, z: &str, out: &OutArg) -> CmdResult<()> {
    let base = load_base(b)?;
    let z = point_in(&base.domain, z)?;
    let rep = SphericalRep::new(&base.domain, &base.p, &base.config)?;
    let point = rep.map(&z)?;
    ctx.log(format!("|Ψ(z)| = {}", point.w.norm()));
    emit_json(&point, out_path(out))
}

#[derive(Serialize)]
struct InverseOutput {
    w: CVector,
    z: CVector,
}

fn rep_inverse(ctx: &Ctx, b: &BaseArgs, w: &str, out: &OutArg) -> CmdResult<()> {
    let base = load_base(b)?;
    let w = point_in(&base.domain, w)?;
    let rep = SphericalRep::new(&base.domain, &base.p, &base.config)?;
    let z = rep.inverse(&w)?;
    ctx.log(format!("r(z) = {:e}", base.domain.value(z.as_slice())));
    emit_json(&InverseOutput { w, z }, out_path(out))
}

#[derive(Serialize)]
struct HorosphereOutput {
    z: CVector,
    z0: CVector,
    radius: f64,
    /// B(z,z₀) computed in the ball image.
    busemann: f64,
    member: bool,
}

fn horosphere(ctx: &Ctx, a: &HorosphereArgs) -> CmdResult<()> {
    let base = load_base(&a.base)?;
    let z = point_in(&base.domain, &a.z)?;
    let z0 = point_in(&base.domain, &a.z0)?;
    base.domain.require_interior(&z0)?;
    let rep = SphericalRep::new(&base.domain, &base.p, &base.config)?;
    let member = rep.horosphere_membership(&z0, a.radius, &z)?;
    let (w, w0) = (rep.map(&z)?.w, rep.map(&z0)?.w);
    let busemann = ball_busemann(&w, &w0, rep.nu())?;
    ctx.log(format!("B = {busemann}, ½ log R = {}", 0.5 * a.radius.ln()));
    emit_json(&HorosphereOutput { z, z0, radius: a.radius, busemann, member }, out_path(&a.out))
}

fn busemann_cmd(ctx: &Ctx, a: &BusemannArgs) -> CmdResult<()> {
    let base = load_base(&a.base)?;
    let z = point_in(&base.domain, &a.z)?;
    let z0 = point_in(&base.domain, &a.z0)?;
    let rep = SphericalRep::new(&base.domain, &base.p, &base.config)?;
    let report = busemann(&rep, &z, &z0)?;
    ctx.log(format!("limit {} vs kernel {}", report.limit, report.kernel));
    emit_json(&report, out_path(&a.out))
}

fn ma_verify_cmd(ctx: &Ctx, b: &BaseArgs, samples: usize, shrink: Option<f64>, out: &OutArg) -> CmdResult<()> {
    let base = load_base(b)?;
    if samples == 0 {
        return Err(Failure::input("--samples must be positive"));
    }
    let (fd, tol, default_shrink) = ma_defaults(&base.domain);
    let shrink = shrink.unwrap_or(default_shrink);
    if !(shrink > 0.0 && shrink < 1.0) {
        return Err(Failure::input("--shrink must lie in (0,1)"));
    }
    let field = KernelField::new(&base.domain, &base.p, &base.config)?;
    let mut rng = ctx.rng();
    let pts: Vec<CVector> = (0..samples).map(|_| base.domain.sample_interior(&mut rng, shrink)).collect();
    ctx.log(format!("{samples} Hessians"));
    let report = ma_verify(&field, &pts, &fd, &tol)?;
    emit_json(&report, out_path(out))?;
    if !report.pass {
        let worst = report
            .samples
            .iter()
            .max_by(|x, y| x.det.abs().total_cmp(&y.det.abs()))
            .map(|s| format!("worst sample z = {:?}: det {:e}, λmin {:e}, angle {:e}", s.z.as_slice(), s.det, s.min_eig, s.null_angle))
            .unwrap_or_default();
        return Err(Failure::verdict(format!(
            "ma FAIL: max |det| {:e} (tol {:e}), λmin {:e} (tol −{:e}), max angle {:e} (tol {:e}); {worst}",
            report.max_abs_det, tol.det, report.min_eig, tol.psd, report.max_null_angle, tol.angle
        )));
    }
    Ok(())
}

fn vector_or(arg: Option<&str>, domain: &DomainSpec, fallback: CVector) -> CmdResult<CVector> {
    match arg {
        Some(s) => Ok(point_in(domain, s)?),
        None => Ok(fallback),
    }
}

fn field(ctx: &Ctx, a: &FieldArgs) -> CmdResult<()> {
    let base = load_base(&a.base)?;
    let n = base.domain.dim();
    let (sa, ta) = parse_grid(&a.grid)?;
    let origin = vector_or(a.origin.as_deref(), &base.domain, CVector::zeros(n))?;
    let u = vector_or(a.u.as_deref(), &base.domain, CVector::basis(n, 0))?;
    let v = vector_or(a.v.as_deref(), &base.domain, CVector::basis(n, 1))?;
    let ss = sa.values();
    let ts = ta.map(|t| t.values()).unwrap_or_else(|| vec![0.0]);
    let reach = (sa.step() * u.norm()).hypot(ta.map_or(0.0, |t| t.step()) * v.norm());
    let singular = match a.kind {
        FieldKind::Poisson => base.p.clone(),
        FieldKind::Green => {
            let w = a.w.as_deref().ok_or_else(|| Failure::input("--kind green needs --w"))?;
            let w = point_in(&base.domain, w)?;
            base.domain.require_interior(&w)?;
            w
        }
    };
    let cells: Vec<(usize, usize, f64, f64, CVector)> = ts
        .iter()
        .enumerate()
        .flat_map(|(j, &t)| ss.iter().enumerate().map(move |(i, &s)| (i, j, s, t)))
        .map(|(i, j, s, t)| {
            let z = &(&origin + &u.scale(Complex::new(s, 0.0))) + &v.scale(Complex::new(t, 0.0));
            (i, j, s, t, z)
        })
        .collect();
    ctx.log(format!("{} cells", cells.len()));
    // cells closer to the singularity than one cell diagonal are not evaluated
    let near = |z: &CVector| z.dist(&singular) < (reach * (1.0 - 1e-9)).max(BASE_POINT_RADIUS);
    let chunks: Vec<Vec<Option<f64>>> = cells
        .par_chunks(FIELD_CHUNK)
        .map(|chunk| -> CmdResult<Vec<Option<f64>>> {
            let eval: Evaluator = match a.kind {
                FieldKind::Poisson if base.domain.is_ball() => {
                    let p = base.p.clone();
                    Box::new(move |z| ball_poisson_kernel(z, &p))
                }
                FieldKind::Poisson => {
                    let f = KernelField::new(&base.domain, &base.p, &base.config)?;
                    Box::new(move |z| f.value(z))
                }
                FieldKind::Green => {
                    let g = GreenField::new(&base.domain, &singular, &base.config)?;
                    Box::new(move |z| g.value(z))
                }
            };
            chunk
                .iter()
                .map(|(_, _, _, _, z)| {
                    let r = base.domain.value(z.as_slice());
                    let outside = match a.kind {
                        FieldKind::Poisson => r >= 1e-9,
                        FieldKind::Green => r >= 0.0,
                    };
                    if near(z) || outside {
                        return Ok(None);
                    }
                    if r > -1e-9 && a.kind == FieldKind::Poisson {
                        return Ok(Some(0.0));
                    }
                    Ok(Some(eval(z)?))
                })
                .collect()
        })
        .collect::<CmdResult<_>>()?;
    let mut csv = String::from("i,j,s,t");
    for k in 1..=n {
        csv.push_str(&format!(",re_z{k},im_z{k}"));
    }
    csv.push_str(",value\n");
    for ((i, j, s, t, z), value) in cells.iter().zip(chunks.into_iter().flatten()) {
        csv.push_str(&format!("{i},{j},{s},{t}"));
        for c in z.as_slice() {
            csv.push_str(&format!(",{},{}", c.re, c.im));
        }
        match value {
            Some(x) => csv.push_str(&format!(",{x}\n")),
            None => csv.push_str(",nan\n"),
        }
    }
    emit_text(&csv, out_path(&a.out))
}

#[derive(Serialize)]
struct Margins {
    i: f64,
    ii: f64,
}

#[derive(Serialize)]
struct RigidityOutput {
    label: String,
    margins: Margins,
    f3_estimate: f64,
    f3_error: f64,
    verdict: &'static str,
    grid: DiscGrid,
    report: lempertkit::rigidity::BkReport,
}

fn rigidity(ctx: &Ctx, f: &str, grid: &str, exclusion: f64, out: &OutArg) -> CmdResult<()> {
    let spec: SelfMapSpec = load_json(f)?;
    let (radii, angles) = grid
        .split_once(['x', 'X'])
        .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
        .filter(|&(a, b)| a > 0 && b > 0)
        .ok_or_else(|| Failure::input(format!("grid {grid:?} must look like RADIIxANGLES")))?;
    if exclusion.is_nan() || exclusion < 0.0 {
        return Err(Failure::input("--exclusion must be nonnegative"));
    }
    let grid = DiscGrid { radii, angles, exclusion };
    let map = spec.build()?;
    ctx.log(format!("{} grid points", grid.points().len()));
    let report = verify_bk_inequalities(&map, &grid)?;
    let pass = report.pass_i && report.pass_ii;
    let output = RigidityOutput {
        label: report.label.clone(),
        margins: Margins { i: report.margin_i, ii: report.margin_ii },
        f3_estimate: report.f3.value,
        f3_error: report.f3.radial_error,
        verdict: if pass { "PASS" } else { "FAIL" },
        grid,
        report,
    };
    emit_json(&output, out_path(out))?;
    if !pass {
        return Err(Failure::verdict(format!(
            "rigidity FAIL: margin (i) {:e} at ζ = {}, margin (ii) {:e} at ζ = {}",
            output.report.margin_i, output.report.worst_i, output.report.margin_ii, output.report.worst_ii
        )));
    }
    Ok(())
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> CmdResult<()> {
    let suite: Suite = a.suite.parse()?;
    let domain = a.domain.as_deref().map(load_domain).transpose()?;
    let config = load_config(a.config.as_deref())?;
    if a.samples == 0 {
        return Err(Failure::input("--samples must be positive"));
    }
    let opts = SuiteOptions { seed: ctx.seed, samples: a.samples, config };
    ctx.log(format!("suite {suite:?}"));
    let report = run_suite(suite, domain.as_ref(), &opts)?;
    let mut text = report.to_json()?;
    text.push('\n');
    emit_text(&text, out_path(&a.out))?;
    if !report.pass {
        let lines: Vec<String> = report
            .failures()
            .map(|c| format!("  {}: value {:e}, limit {:e} ({:?})", c.name, c.value, c.limit, c.bound))
            .collect();
        return Err(Failure::verdict(format!("verify {} FAIL\n{}", a.suite, lines.join("\n"))));
    }
    Ok(())
}
