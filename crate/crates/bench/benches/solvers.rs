use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lempertkit::rigidity::MobiusMix;
use lempertkit::*;
use lempertkit_bench::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn geodesics(c: &mut Criterion) {
    let ball = DomainSpec::ball(2).unwrap();
    let pert = perturbed();
    let cfg = config();
    let mut g = c.benchmark_group("geodesic");
    g.sample_size(20);
    for (name, d) in [("ball", &ball), ("perturbed", &pert)] {
        let problem = boundary_problem(d);
        g.bench_function(format!("boundary/{name}"), |b| b.iter(|| solve_stationary(d, black_box(&problem), &cfg).unwrap()));
    }
    let z = point(&[(0.1, 0.0), (0.0, 0.2)]);
    let w = point(&[(-0.3, 0.1), (0.2, 0.0)]);
    g.bench_function("distance/perturbed", |b| b.iter(|| kobayashi_distance(&pert, black_box(&z), &w, &cfg).unwrap()));
    let pair = solve_stationary(&pert, &boundary_problem(&pert), &cfg).unwrap();
    g.bench_function("certificate/perturbed", |b| b.iter(|| geodesic_certificate(black_box(&pair), &pert)));
    g.finish();
}

fn representation(c: &mut Criterion) {
    let pert = perturbed();
    let cfg = config();
    let p = pert.radial_projection(&point(&[(1.0, 0.0), (0.0, 0.0)])).unwrap();
    let z = point(&[(0.2, 0.0), (0.0, 0.3)]);
    let mut g = c.benchmark_group("rep");
    g.sample_size(20);
    g.bench_function("map/cold", |b| {
        b.iter(|| SphericalRep::new(&pert, &p, &cfg).unwrap().map(black_box(&z)).unwrap())
    });
    let rep = SphericalRep::new(&pert, &p, &cfg).unwrap();
    rep.map(&z).unwrap();
    g.bench_function("map/cached", |b| b.iter(|| rep.map(black_box(&z)).unwrap()));
    let field = KernelField::new(&pert, &p, &cfg).unwrap();
    let (fd, _, _) = ma_defaults(&pert);
    g.sample_size(10);
    g.bench_function("hessian/perturbed", |b| b.iter(|| field.hessian(black_box(&z), &fd).unwrap()));
    g.finish();
}

fn rigidity(c: &mut Criterion) {
    let grid = DiscGrid::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = contact_family(&MobiusMix::random(&mut rng, 3), 0.2).unwrap();
    let mut g = c.benchmark_group("rigidity");
    g.sample_size(20);
    g.bench_function("bk/contact-family", |b| b.iter(|| verify_bk_inequalities(black_box(&f), &grid).unwrap()));
    g.bench_function("shoikhet", |b| b.iter(shoikhet_counterexample));
    g.finish();
}

criterion_group!(benches, geodesics, representation, rigidity);
criterion_main!(benches);
