use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kzcocycle::deviation::ClassicalIet;
use kzcocycle::homology::{intersection_form, split_homology};
use kzcocycle::{
    catalog, estimate_spectrum, orient_double_cover, run_fixture_suite, zorich_step, EstimatorConfig, InductionState, LengthVector,
    SingularityPattern,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STRATA: [&str; 3] = ["2,-1,-1", "2,1,-1^3", "12"];

fn entry(s: &str) -> kzcocycle::CatalogEntry {
    catalog(&s.parse::<SingularityPattern>().unwrap(), "").unwrap()
}

fn zorich(c: &mut Criterion) {
    let mut g = c.benchmark_group("zorich_step");
    for s in STRATA {
        let p = entry(s).permutation;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut state = InductionState::new(&p, LengthVector::random(&p, &mut rng)).unwrap();
        g.bench_function(BenchmarkId::from_parameter(s), |b| {
            b.iter(|| {
                if zorich_step(&mut state).is_err() || state.lengths.total() < 1e-9 {
                    state = InductionState::new(&p, LengthVector::random(&p, &mut rng)).unwrap();
                }
                state.renormalize();
            })
        });
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_spectrum_1e4");
    g.sample_size(10);
    for s in STRATA {
        let p = entry(s).permutation;
        let cfg = EstimatorConfig { steps: 10_000, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(s), |b| b.iter(|| estimate_spectrum(black_box(&p), &cfg).unwrap()));
    }
    g.finish();
}

fn homology(c: &mut Criterion) {
    let mut g = c.benchmark_group("split_homology");
    for s in STRATA {
        let cover = orient_double_cover(&entry(s).permutation).unwrap();
        g.bench_function(BenchmarkId::from_parameter(s), |b| {
            b.iter(|| {
                let form = intersection_form(black_box(&cover));
                split_homology(&cover, &form).unwrap()
            })
        });
    }
    g.finish();
}

fn orbit(c: &mut Criterion) {
    let p = entry("2,-1,-1").permutation;
    let cover = orient_double_cover(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lengths = LengthVector::random(&p, &mut rng).cover_lengths();
    let iet = ClassicalIet::new(cover.cover_top(), cover.cover_bottom(), &lengths);
    let start = iet.total() * 0.377_123_1;
    c.bench_function("cover_orbit_1e5", |b| b.iter(|| iet.orbit(black_box(start), 100_000, &[100_000]).unwrap()));
}

fn periodic(c: &mut Criterion) {
    let mut g = c.benchmark_group("fixture_suite");
    g.sample_size(10);
    g.bench_function("50_fixtures", |b| b.iter(|| run_fixture_suite(50, black_box(3), 24)));
    g.finish();
}

criterion_group!(benches, zorich, spectrum, homology, orbit, periodic);
criterion_main!(benches);
