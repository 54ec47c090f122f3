//! Acceptance run: one PASS/FAIL line per criterion; exits non-zero on any failure.

use std::time::{Duration, Instant};

use lempertkit::ball::{ball_busemann, phase_align};
use lempertkit::ma::{
    boundary_asymptotics, green_normal_derivative_relation, ma_verify, slice_check, FdOptions, KernelField, MaTolerances,
};
use lempertkit::rep::{BusemannLimit, SphericalRep};
use lempertkit::rigidity::{
    contact_family, shoikhet_counterexample, verify_bk_inequalities, DiscGrid, MobiusMix, SAFE_CONTACT_SCALE,
};
use lempertkit::verify::{boundary_hausdorff, random_direction, random_linear_ball, run_suite, Suite, SuiteOptions};
use lempertkit::{
    ball_geodesic, geodesic_certificate, solve_stationary, BoundaryDirection, CVector, Certificate, DomainSpec,
    GeodesicPair, Result, SolverConfig, StationaryProblem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn run(id: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let in_time = limit.map_or(true, |l| elapsed <= l);
    let (pass, detail) = match res {
        Ok(o) => (o.pass && in_time, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let budget = limit.map_or(String::new(), |l| format!(" / {} s", l.as_secs()));
    println!(
        "[{}] {id:>2} {title}: {detail} ({:.1} s{budget})",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn perturbed() -> DomainSpec {
    DomainSpec::perturbed_ball(2, 0.1).expect("perturbed ball")
}

/// Certificate figures accumulated over every certified pair.
#[derive(Default)]
struct CertStats {
    pairs: usize,
    pullback: f64,
    gradient: f64,
    bad_windings: usize,
    probes: usize,
}

impl CertStats {
    fn add(&mut self, c: &Certificate) {
        self.pairs += 1;
        self.pullback = self.pullback.max(c.pullback);
        self.gradient = self.gradient.max(c.gradient_pullback);
        self.bad_windings += c.windings.iter().filter(|&&w| w != 1).count();
        self.probes += c.windings.len();
    }
}

fn boundary_solve(domain: &DomainSpec, p: &CVector, v: &CVector, cfg: &SolverConfig) -> Result<GeodesicPair> {
    solve_stationary(domain, &StationaryProblem::Boundary { p: p.clone(), v: v.clone() }, cfg)
}

fn apply(m: &nalgebra::DMatrix<lempertkit::C64>, z: &CVector) -> CVector {
    let n = z.len();
    CVector::new((0..n).map(|i| (0..n).map(|k| m[(i, k)] * z[k]).sum()).collect()).expect("finite")
}

fn main() {
    let cfg = SolverConfig::default();
    let mut results = Vec::new();
    let mut certs = CertStats::default();

    results.push(run(1, "ball spherical representation is the identity", Some(Duration::from_secs(5)), || {
        let mut worst: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for n in [2, 3] {
            let ball = DomainSpec::ball(n)?;
            let p = ball.sample_boundary(&mut rng);
            let rep = SphericalRep::new(&ball, &p, &cfg)?;
            for _ in 0..100 {
                let z = ball.sample_interior(&mut rng, 1.0);
                worst = worst.max(rep.solve_from(&z, None)?.point.w.dist(&z));
                worst = worst.max(rep.map(&z)?.w.dist(&z));
            }
        }
        outcome(worst < 1e-8, format!("max |Ψ(z)−z| = {worst:.2e} < 1e-8 over 2×100 points"))
    }));

    results.push(run(2, "ball boundary solves match η_v", Some(Duration::from_secs(60)), || {
        let ball = DomainSpec::ball(2)?;
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let p = ball.sample_boundary(&mut rng);
            let v = random_direction(&mut rng, &p, 0.1);
            let pair = boundary_solve(&ball, &p, &v, &cfg)?;
            certs.add(&geodesic_certificate(&pair, &ball));
            let eta = ball_geodesic(&BoundaryDirection::new(p, v)?, cfg.grid)?;
            worst = worst.max(pair.phi.boundary_distance(&eta.phi, 4 * cfg.grid));
        }
        outcome(worst < 1e-8, format!("sup |φ−η_v| on ∂Δ = {worst:.2e} < 1e-8 over 50 directions"))
    }));

    results.push(run(3, "linear-ball discs are A-images of ball discs", Some(Duration::from_secs(60)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let mut worst: f64 = 0.0;
        let mut uncertified = 0;
        for _ in 0..20 {
            let domain = random_linear_ball(&mut rng, 2, 5.0)?;
            let (a, a_inv, b) = domain.linear_parts().expect("linear ball");
            let p = domain.sample_boundary(&mut rng);
            let nu = domain.unit_normal(&p)?;
            let v = random_direction(&mut rng, &nu, 0.1);
            let pair = boundary_solve(&domain, &p, &v, &cfg)?;
            let cert = geodesic_certificate(&pair, &domain);
            uncertified += usize::from(!cert.pass);
            certs.add(&cert);
            let pb = apply(a_inv, &(&p - b));
            let vb = phase_align(&apply(a_inv, &v), &pb)?;
            let eta = ball_geodesic(&BoundaryDirection::new(pb, vb)?, cfg.grid)?;
            let image = eta.phi.affine_image(a, b)?;
            worst = worst.max(boundary_hausdorff(&pair.phi, &image, 512));
        }
        outcome(
            worst < 1e-6 && uncertified == 0,
            format!("Hausdorff = {worst:.2e} < 1e-6 over 20 domains, {uncertified} uncertified"),
        )
    }));

    results.push(run(4, "left-inverse certificates", None, || {
        let domain = perturbed();
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        for _ in 0..10 {
            let p = domain.sample_boundary(&mut rng);
            let nu = domain.unit_normal(&p)?;
            let v = random_direction(&mut rng, &nu, 0.1);
            certs.add(&geodesic_certificate(&boundary_solve(&domain, &p, &v, &cfg)?, &domain));
        }
        let c = &certs;
        outcome(
            c.pullback < 1e-7 && c.bad_windings == 0 && c.probes == 50 * c.pairs && c.gradient < 1e-8,
            format!(
                "{} pairs: pullback {:.2e} < 1e-7, winding ≠ 1 at {}/{} probes, |grad ϱ∘φ − φ*| {:.2e} < 1e-8",
                c.pairs, c.pullback, c.bad_windings, c.probes, c.gradient
            ),
        )
    }));

    results.push(run(5, "Monge–Ampère degeneracy", Some(Duration::from_secs(120)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(105);
        let ball = DomainSpec::ball(2)?;
        let p = ball.sample_boundary(&mut rng);
        let field = KernelField::new(&ball, &p, &cfg)?;
        let zs: Vec<CVector> = (0..100).map(|_| ball.sample_interior(&mut rng, 0.6)).collect();
        let tb = MaTolerances { psd: 1e-10, det: 1e-8, angle: 1e-2 };
        let rb = ma_verify(&field, &zs, &FdOptions::closed_form(), &tb)?;
        let domain = perturbed();
        let p = domain.sample_boundary(&mut rng);
        let field = KernelField::new(&domain, &p, &cfg)?;
        let zs: Vec<CVector> = (0..50).map(|_| domain.sample_interior(&mut rng, 0.7)).collect();
        let tp = MaTolerances { psd: 1e-4, det: 1e-6, angle: 1e-2 };
        let rp = ma_verify(&field, &zs, &FdOptions::default(), &tp)?;
        outcome(
            rb.pass && rp.pass,
            format!(
                "ball det {:.1e} < 1e-8, λmin {:.1e} ≥ −1e-10; perturbed det {:.1e} < 1e-6, λmin {:.1e} ≥ −1e-4; null angle {:.1e} < 1e-2",
                rb.max_abs_det,
                rb.min_eig,
                rp.max_abs_det,
                rp.min_eig,
                rb.max_null_angle.max(rp.max_null_angle)
            ),
        )
    }));

    results.push(run(6, "slice identity", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(106);
        let domain = perturbed();
        let p = domain.sample_boundary(&mut rng);
        let field = KernelField::new(&domain, &p, &cfg)?;
        let nu = field.rep().nu().clone();
        let mut pert: f64 = 0.0;
        for _ in 0..20 {
            pert = pert.max(slice_check(&field, &random_direction(&mut rng, &nu, 0.1))?.max_error);
        }
        let ball = DomainSpec::ball(2)?;
        let q = ball.sample_boundary(&mut rng);
        let field = KernelField::new(&ball, &q, &cfg)?;
        let normal = slice_check(&field, &q)?.max_error;
        let mut rel: f64 = 0.0;
        for _ in 0..20 {
            rel = rel.max(slice_check(&field, &random_direction(&mut rng, &q, 0.1))?.max_relative_error);
        }
        outcome(
            pert < 1e-6 && normal < 1e-12 && rel < 1e-12,
            format!("perturbed {pert:.2e} < 1e-6 (20 v); ball normal {normal:.2e}, ball relative {rel:.2e} < 1e-12"),
        )
    }));

    results.push(run(7, "boundary asymptotics", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let mut domains = vec![DomainSpec::ball(2)?, perturbed()];
        domains.push(random_linear_ball(&mut rng, 2, 5.0)?);
        let mut worst: f64 = 0.0;
        let mut normal_limit = f64::NAN;
        for (i, domain) in domains.iter().enumerate() {
            let p = domain.sample_boundary(&mut rng);
            let field = KernelField::new(domain, &p, &cfg)?;
            let nu = field.rep().nu().clone();
            for k in 0..10 {
                let u = if k == 0 { nu.clone() } else { random_direction(&mut rng, &nu, 0.2) };
                let r = boundary_asymptotics(&field, &u)?;
                if i == 0 && k == 0 {
                    normal_limit = r.limit;
                }
                worst = worst.max(r.relative_error);
            }
        }
        outcome(
            worst < 1e-3 && (normal_limit + 2.0).abs() < 2e-3,
            format!("relative error {worst:.2e} < 1e-3 on 3×10 lines; ball normal ray {normal_limit:.6}"),
        )
    }));

    results.push(run(8, "horosphere preservation", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(108);
        let mut probes = 0;
        let mut disagree = 0;
        let mut skipped = 0;
        for domain in [DomainSpec::ball(2)?, perturbed()] {
            let p = domain.sample_boundary(&mut rng);
            let rep = SphericalRep::new(&domain, &p, &cfg)?;
            let is_ball = domain.is_ball();
            let lim = if is_ball { None } else { Some(BusemannLimit::new(&rep, 3, 9)?) };
            let busemann = |z: &CVector, b0: f64| -> Result<f64> {
                match &lim {
                    Some(l) => Ok(l.profile(z)?.value.re - b0),
                    None => Ok(ball_busemann(z, &CVector::zeros(2), &p)? - b0),
                }
            };
            for _ in 0..10 {
                let z0 = domain.sample_interior(&mut rng, 0.8);
                let b0 = busemann(&z0, 0.0)?;
                let radius = (rng.gen_range(-1.5f64..1.5)).exp();
                let mut count = 0;
                while count < 50 {
                    let z = domain.sample_interior(&mut rng, 0.95);
                    let b = busemann(&z, b0)?;
                    let margin = b - 0.5 * radius.ln();
                    if margin.abs() < 1e-4 {
                        skipped += 1;
                        continue;
                    }
                    count += 1;
                    probes += 1;
                    let image = rep.horosphere_membership(&z0, radius, &z)?;
                    disagree += usize::from(image != (margin < 0.0));
                }
            }
        }
        outcome(
            disagree == 0 && probes == 1000,
            format!("{disagree}/{probes} disagreements ({skipped} probes in the 1e-4 shell redrawn)"),
        )
    }));

    results.push(run(9, "Burns–Krantz suite", Some(Duration::from_secs(30)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let grid = DiscGrid::default();
        let (mut mi, mut mii) = (f64::INFINITY, f64::INFINITY);
        let mut samples = 0;
        for _ in 0..100 {
            let chi = MobiusMix::random(&mut rng, 3);
            let s = rng.gen_range(0.05..SAFE_CONTACT_SCALE);
            let f = contact_family(&chi, s)?;
            f.check_self_map(&grid)?;
            let r = verify_bk_inequalities(&f, &grid)?;
            mi = mi.min(r.margin_i);
            mii = mii.min(r.margin_ii);
            samples = r.samples;
        }
        let sh = shoikhet_counterexample()?;
        let f3_err = (sh.f3.value + 0.6).abs();
        outcome(
            mi >= -1e-10 && mii >= -1e-8 && sh.violated && sh.lhs > sh.rhs_incorrect && f3_err < 1e-6,
            format!(
                "margins (i) {mi:.2e} ≥ −1e-10, (ii) {mii:.2e} ≥ −1e-8 over 100 maps × {samples} points; Shoikhet LHS {:.7} > RHS {:.7}, f‴(1) = {:.9}",
                sh.lhs, sh.rhs_incorrect, sh.f3.value
            ),
        )
    }));

    results.push(run(10, "Green/Poisson normal-derivative relation", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(110);
        let mut worst: f64 = 0.0;
        for domain in [DomainSpec::ball(2)?, perturbed()] {
            let p = domain.sample_boundary(&mut rng);
            let field = KernelField::new(&domain, &p, &cfg)?;
            for _ in 0..10 {
                let z = domain.sample_interior(&mut rng, 0.8);
                worst = worst.max(green_normal_derivative_relation(&field, &z, 8)?.relative_error);
            }
        }
        outcome(worst < 1e-3, format!("relative error {worst:.2e} < 1e-3 at 2×10 points"))
    }));

    results.push(run(11, "verify suites are deterministic", None, || {
        let small = SuiteOptions { seed: 11, samples: 3, config: cfg };
        let cases = [
            (Suite::Rigidity, None),
            (Suite::Geodesics, Some(perturbed())),
            (Suite::Rep, Some(perturbed())),
            (Suite::Ma, Some(DomainSpec::ball(2)?)),
            (Suite::Ma, Some(perturbed())),
        ];
        let mut identical = 0;
        let mut passing = 0;
        for (suite, domain) in &cases {
            let a = run_suite(*suite, domain.as_ref(), &small)?;
            let b = run_suite(*suite, domain.as_ref(), &small)?;
            identical += usize::from(a.to_json()? == b.to_json()?);
            passing += usize::from(a.pass);
        }
        outcome(
            identical == cases.len() && passing == cases.len(),
            format!("{identical}/{} byte-identical report pairs, {passing} suites passing", cases.len()),
        )
    }));

    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
