//! Acceptance criteria 1 to 10. Runs as a plain binary and prints one
//! verdict line per criterion. Pass criterion numbers as arguments to run
//! a subset, e.g. `cargo test --release --test acceptance -- 7 9`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use kzcocycle::homology::{check_splitting, check_symplectic, intersection_form, split_homology};
use kzcocycle::{
    catalog, catalog_entries, estimate_spectrum, estimate_unsplit, fit_slopes, fixed_matrix_selftest, orient_double_cover,
    run_fixture_suite, run_orbit, stratum_info, CatalogEntry, EstimatorConfig, Exponent, InductionState, LengthVector,
    SingularityPattern, SpectrumEstimate, TransitionMatrix,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    summary: String,
}

fn pattern(s: &str) -> SingularityPattern {
    s.parse().unwrap()
}

fn entry(s: &str, component: &str) -> CatalogEntry {
    catalog(&pattern(s), component).unwrap()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn show(v: &[Exponent]) -> String {
    v.iter().map(|e| format!("{:.5}±{:.5}", e.value, e.se)).collect::<Vec<_>>().join(" ")
}

/// Runs `cfg` and reports the estimate with its wall-clock time.
fn timed(p: &CatalogEntry, cfg: &EstimatorConfig) -> (SpectrumEstimate, Duration) {
    let t = Instant::now();
    let est = estimate_spectrum(&p.permutation, cfg).unwrap();
    (est, t.elapsed())
}

fn production() -> EstimatorConfig {
    EstimatorConfig { steps: 10_000_000, seed: 1, replicas: 8, ..Default::default() }
}

/// `(block, index from 1, target)` with block `+` or `-`.
type Expected = (char, usize, f64);

fn check_values(name: &str, est: &SpectrumEstimate, expected: &[Expected], tol: f64, elapsed: Duration) -> (bool, String) {
    let mut ok = elapsed <= Duration::from_secs(600);
    let mut parts = Vec::new();
    for &(block, i, target) in expected {
        let v = if block == '+' { &est.lambda_plus } else { &est.lambda_minus };
        let x = v[i - 1].value;
        let good = within(x, target, tol);
        ok &= good;
        parts.push(format!("λ{i}{block} = {x:.5} (want {target:.5} ± {tol})"));
    }
    println!("    {name}: {} in {:.0} s", parts.join(", "), elapsed.as_secs_f64());
    (ok, format!("{name} {}", if ok { "ok" } else { "off" }))
}

fn criterion_1() -> Verdict {
    let cfg = production();
    let cases: [(&str, &[Expected]); 3] = [
        ("2,-1,-1", &[('+', 1, 0.5)]),
        ("-1^2,1^2", &[('+', 1, 2.0 / 3.0), ('-', 2, 1.0 / 3.0)]),
        ("2,1,-1^3", &[('+', 1, 0.5), ('-', 2, 1.0 / 3.0)]),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (s, expected) in cases {
        let (est, el) = timed(&entry(s, ""), &cfg);
        let (ok, note) = check_values(&format!("Q({s})"), &est, expected, 0.01, el);
        pass &= ok;
        notes.push(note);
    }
    Verdict { pass, summary: notes.join(", ") }
}

fn criterion_2() -> Verdict {
    let (est, el) = timed(&entry("8", ""), &production());
    let (pass, summary) =
        check_values("Q(8)", &est, &[('+', 1, 0.660), ('+', 2, 0.397), ('+', 3, 0.142), ('-', 2, 0.200)], 0.02, el);
    Verdict { pass, summary }
}

fn full_block(e: &CatalogEntry, steps: u64, replicas: usize) -> EstimatorConfig {
    let info = stratum_info(&e.stratum);
    EstimatorConfig {
        steps,
        seed: 1,
        replicas,
        k_plus: Some(info.dim_invariant as usize),
        k_minus: Some(info.dim_anti_invariant as usize),
        ..Default::default()
    }
}

fn criterion_3() -> Verdict {
    let mut failed = Vec::new();
    let entries = catalog_entries();
    for e in &entries {
        let info = stratum_info(&e.stratum);
        let est = estimate_spectrum(&e.permutation, &full_block(e, 2_000_000, 2)).unwrap();
        let positive = |v: &[Exponent]| v.iter().filter(|x| x.value > 3.0 * x.se).count() as i64;
        let (np, nm) = (positive(&est.lambda_plus), positive(&est.lambda_minus));
        let top_is_one = est.lambda_minus[0].value == 1.0;
        let rest_below = est.lambda_minus[1..].iter().all(|x| x.value < 1.0 - 3.0 * x.se);
        let ok = np == info.positive_invariant_count && nm == info.positive_anti_invariant_count && top_is_one && rest_below;
        let name = format!("{} {}", e.stratum, e.component_label);
        println!(
            "    {name}: {np} of {} positive (+), {nm} of {} positive (-), λ1- = {}{}",
            info.positive_invariant_count,
            info.positive_anti_invariant_count,
            est.lambda_minus[0].value,
            if ok { "" } else { "  <-- mismatch" }
        );
        if !ok {
            failed.push(name);
        }
    }
    let summary = if failed.is_empty() { format!("{} catalog entries", entries.len()) } else { format!("mismatch on {}", failed.join(", ")) };
    Verdict { pass: failed.is_empty(), summary }
}

fn criterion_4() -> Verdict {
    let mut pass = true;
    let mut worst = 0.0f64;
    for s in ["2,-1,-1", "-1^2,1^2"] {
        let e = entry(s, "");
        let est = estimate_spectrum(&e.permutation, &full_block(&e, 2_000_000, 4)).unwrap();
        for v in [&est.lambda_plus, &est.lambda_minus] {
            let n = v.len();
            for i in 0..n {
                let (a, b) = (v[i], v[n - 1 - i]);
                let joint = (a.se * a.se + b.se * b.se).sqrt();
                let gap = (a.value + b.value).abs();
                worst = worst.max(if joint > 0.0 { gap / joint } else { 0.0 });
                pass &= gap <= 3.0 * joint || gap < 1e-12;
            }
        }
        println!("    Q({s}): + [{}]  - [{}]", show(&est.lambda_plus), show(&est.lambda_minus));
    }
    Verdict { pass, summary: format!("worst |λi + λ(dim+1-i)| = {worst:.2} joint SEs") }
}

#[derive(Default)]
struct WalkCounts {
    products: usize,
    symplectic: usize,
    plus_minus: usize,
    c_block: usize,
    rank: usize,
}

/// Checks products of 1 to 50 consecutive moves along random induction
/// paths until `products` products have been tested.
fn walk(entry: &CatalogEntry, products: usize, seed: u64) -> WalkCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = &entry.permutation;
    let ghat = stratum_info(&entry.stratum).cover_genus as usize;
    let fresh = |rng: &mut ChaCha8Rng| InductionState::new(p, LengthVector::random(p, rng)).unwrap();
    let mut state = fresh(&mut rng);
    let mut form = intersection_form(&state.cover());
    let mut split = split_homology(&state.cover(), &form).unwrap();
    let mut out = WalkCounts::default();
    while out.products < products {
        let len = rng.gen_range(1..=50);
        let mut t = TransitionMatrix::identity(p.d());
        let mut ok = true;
        for _ in 0..len {
            match state.advance() {
                Ok(m) => t.push_move(&m),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
            if state.lengths.total() < 1e-6 {
                state.renormalize();
            }
        }
        if !ok {
            state = fresh(&mut rng);
            form = intersection_form(&state.cover());
            split = split_homology(&state.cover(), &form).unwrap();
            continue;
        }
        let c2 = state.cover();
        let f2 = intersection_form(&c2);
        let s2 = split_homology(&c2, &f2).unwrap();
        out.products += 1;
        out.symplectic += check_symplectic(&t, &form, &f2) as usize;
        let sc = check_splitting(&t, &f2, &split, &s2);
        out.plus_minus += (sc.plus && sc.minus) as usize;
        out.c_block += sc.c as usize;
        out.rank += (f2.rank() == 2 * ghat) as usize;
        form = f2;
        split = s2;
    }
    out
}

/// Genus columns of the reference table: stratum, component, g, ĝ.
const GENI: [(&str, &str, i64, i64); 17] = [
    ("2,-1,-1", "", 1, 2),
    ("2,1,-1^3", "", 1, 3),
    ("8", "", 3, 5),
    ("-1,3,3,3", "adj", 3, 4),
    ("-1,3,3,3", "irr", 3, 4),
    ("-1,3,6", "adj", 3, 3),
    ("-1,3,6", "irr", 3, 3),
    ("-1,9", "adj", 3, 3),
    ("-1,9", "irr", 3, 3),
    ("12", "I", 4, 7),
    ("12", "II", 4, 7),
    ("4,4", "", 3, 2),
    ("-1^2,1^2", "", 1, 3),
    ("-1^3,1^3", "", 1, 4),
    ("-1^4,1^4", "", 1, 5),
    ("-1^5,5", "", 1, 4),
    ("-1,2,3", "", 2, 4),
];

fn criterion_5() -> Verdict {
    let mut pass = true;
    let entries = catalog_entries();
    for (i, e) in entries.iter().enumerate() {
        let c = walk(e, 10_000, 100 + i as u64);
        let n = c.products;
        let ok = c.symplectic == n && c.plus_minus == n && c.c_block == n && c.rank == n;
        pass &= ok;
        println!(
            "    {} {}: symplectic {}/{n}, ± blocks {}/{n}, C block {}/{n}, rank 2ĝ {}/{n}",
            e.stratum, e.component_label, c.symplectic, c.plus_minus, c.c_block, c.rank
        );
    }
    let mut geni_ok = 0;
    for (s, comp, g, ghat) in GENI {
        let info = stratum_info(&pattern(s));
        if info.genus == g && info.cover_genus == ghat {
            geni_ok += 1;
        } else {
            println!("    Geni Q({s}) {comp}: computed g = {}, ĝ = {}; table g = {g}, ĝ = {ghat}", info.genus, info.cover_genus);
        }
    }
    pass &= geni_ok == GENI.len();
    Verdict { pass, summary: format!("10^4 products per catalog entry, Geni rows {geni_ok}/{}", GENI.len()) }
}

fn criterion_6() -> Verdict {
    let e = entry("2,1,-1^3", "");
    let cfg = EstimatorConfig { steps: 2_000_000, seed: 1, replicas: 4, ..Default::default() };
    let split = estimate_spectrum(&e.permutation, &cfg).unwrap();
    let unsplit = estimate_unsplit(&e.permutation, &cfg).unwrap();
    println!("    split:   + [{}]  - [{}]", show(&split.lambda_plus), show(&split.lambda_minus));
    println!("    unsplit: + [{}]  - [{}]", show(&unsplit.lambda_plus), show(&unsplit.lambda_minus));
    let same_shape = split.lambda_plus.len() == unsplit.lambda_plus.len() && split.lambda_minus.len() == unsplit.lambda_minus.len();
    let mut worst = 0.0f64;
    let mut pass = same_shape;
    if same_shape {
        let pairs = split.lambda_plus.iter().zip(&unsplit.lambda_plus).chain(split.lambda_minus.iter().zip(&unsplit.lambda_minus));
        for (a, b) in pairs {
            let joint = (a.se * a.se + b.se * b.se).sqrt();
            let gap = (a.value - b.value).abs();
            pass &= gap <= 2.0 * joint;
            if joint > 0.0 {
                worst = worst.max(gap / joint);
            }
        }
    }
    Verdict { pass, summary: format!("worst difference {worst:.3} joint SEs") }
}

/// Log-moduli of the eigenvalues, largest first.
fn oracle_exponents(b: &[Vec<i64>]) -> Vec<f64> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| b[i][j] as f64);
    let mut v: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm().ln()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut tested = 0;
    while tested < 20 {
        let b: Vec<Vec<i64>> = (0..4).map(|_| (0..4).map(|_| rng.gen_range(-5..=5)).collect()).collect();
        let m = DMatrix::from_fn(4, 4, |i, j| b[i][j] as f64);
        if m.determinant().abs() < 0.5 {
            continue;
        }
        tested += 1;
        let exact = oracle_exponents(&b);
        let est = fixed_matrix_selftest(&b, 2_000_000).unwrap();
        // Norm-wise: a unit-modulus eigenvalue has log-modulus 0.
        let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let rel = exact.iter().zip(&est).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
        worst = worst.max(rel);
        if rel > 1e-6 {
            println!("    {b:?}: oracle {exact:.9?}, engine {est:.9?}, relative error {rel:.2e}");
        }
    }
    Verdict { pass: worst <= 1e-6, summary: format!("20 matrices, worst relative error {worst:.2e}") }
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let r = run_fixture_suite(500, 8, 24);
    let el = t.elapsed();
    println!(
        "    inequality {}/{}, equality {}/{} (2+ odd points), monodromy {}/{}, integrals {}/{} paths, isotropy {}/{}",
        r.rank_inequality,
        r.fixtures,
        r.rank_equality,
        r.rank_equality_applicable,
        r.monodromy,
        r.fixtures,
        r.paths_agreeing,
        r.paths_tested,
        r.area_and_isotropy,
        r.fixtures
    );
    let pass = r.all_passed() && el <= Duration::from_secs(60);
    Verdict { pass, summary: format!("500 fixtures in {:.1} s", el.as_secs_f64()) }
}

fn criterion_9() -> Verdict {
    let t = Instant::now();
    let e = entry("2,-1,-1", "");
    let seed = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths = LengthVector::random(&e.permutation, &mut rng);
    let cover = orient_double_cover(&e.permutation).unwrap();
    let series = run_orbit(&cover, &lengths, 100_000_000, seed).unwrap();
    let fit = fit_slopes(&series).unwrap();
    let el = t.elapsed();
    let tail: Vec<f64> = fit.rows.iter().rev().take(5).rev().map(|r| r.base).collect();
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = tail.iter().map(|b| format!("{b:.3e}")).collect();
    println!("    base norms over the last five checkpoints: {}", shown.join(" "));
    let pass = within(fit.slope_minus_top, 1.0, 0.05) && within(fit.slope_plus_top, 0.5, 0.1) && decreasing && el <= Duration::from_secs(300);
    Verdict {
        pass,
        summary: format!(
            "slope_minus_top {:.4}, slope_plus_top {:.4}, base decreasing: {decreasing}, {:.1} s",
            fit.slope_minus_top,
            fit.slope_plus_top,
            el.as_secs_f64()
        ),
    }
}

/// Raw bytes of the record body on each output line.
fn bodies(stdout: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(stdout)
        .lines()
        .map(|l| {
            let start = l.find("\"body\":").expect("record has a body") + 7;
            let end = l.rfind(",\"wall_clock_seconds\"").expect("record has a wall clock");
            l[start..end].to_string()
        })
        .collect()
}

fn kzc(args: &[&str]) -> Vec<String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kzc")).args(args).output().expect("kzc runs");
    assert!(out.status.success(), "kzc {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    bodies(&out.stdout)
}

fn criterion_10() -> Verdict {
    let runs: [&[&str]; 3] = [
        &["spectrum", "--stratum", "2,1,-1^3", "--steps", "2e5", "--seeds", "3"],
        &["deviation", "--stratum", "2,-1,-1", "--T", "2e7", "--seed", "4"],
        &["check-periodic", "--fixtures", "50", "--seed", "5", "--format", "json"],
    ];
    let mut pass = true;
    for args in runs {
        let (a, b) = (kzc(args), kzc(args));
        let same = !a.is_empty() && a == b;
        pass &= same;
        println!("    {}: {}", args[0], if same { "identical bodies" } else { "bodies differ" });
    }
    let mut jobs = vec!["--jobs", "2"];
    jobs.extend_from_slice(runs[0]);
    let threaded = kzc(&jobs) == kzc(runs[0]);
    println!("    spectrum with --jobs 2: {}", if threaded { "identical body" } else { "body differs" });
    pass &= threaded;
    Verdict { pass, summary: "repeated spectrum, deviation and check-periodic runs".into() }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact-value strata", criterion_1),
        ("non-exact spot checks", criterion_2),
        ("structural counts", criterion_3),
        ("spectrum symmetry", criterion_4),
        ("exact integer invariants", criterion_5),
        ("route equivalence", criterion_6),
        ("estimator self-test", criterion_7),
        ("periodic lemma suite", criterion_8),
        ("deviation experiment", criterion_9),
        ("determinism", criterion_10),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !wanted.is_empty() && !wanted.contains(&k) {
            continue;
        }
        ran += 1;
        println!("criterion {k} ({title})");
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Verdict { pass: false, summary: format!("panicked: {}", msg.unwrap_or_default()) }
        });
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {k}: {} ({:.1} s)", if v.pass { "PASS" } else { "FAIL" }, v.summary, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
