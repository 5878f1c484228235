use std::fmt;
use std::time::Instant;

use kzcocycle::deviation::NormRow;
use kzcocycle::{
    catalog, catalog_entries, estimate_spectrum, estimate_unsplit, fit_slopes, orient_double_cover, run_fixture_suite, run_orbit,
    stratum_info, stratum_of, EstimatorConfig, Exponent, GeneralizedPermutation, LengthVector, SingularityPattern, SpectrumEstimate,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::{DeviationArgs, Format, Input, PeriodicArgs, SpectrumArgs, TableArgs};
use crate::record::{emit, needs_header, version, Body, RunRecord};

/// Failure with its exit status: 1 for a broken invariant, 2 for bad input.
#[derive(Debug)]
pub enum CliError {
    Invariant(String),
    User(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::User(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invariant(m) => write!(f, "invariant violation: {m}"),
            CliError::User(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<kzcocycle::Error> for CliError {
    fn from(e: kzcocycle::Error) -> Self {
        use kzcocycle::Error as E;
        match e {
            E::RankMismatch { .. } | E::MoveUndefined(_) | E::LengthUnderflow | E::WinOverflow { .. } | E::Singular => {
                CliError::Invariant(format!("{e:?}: {e}"))
            }
            _ => CliError::User(format!("{e:?}: {e}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(format!("i/o: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Resolved {
    stratum: String,
    component: Option<String>,
    permutation: GeneralizedPermutation,
}

fn resolve(input: &Input, component: &str) -> Result<Resolved> {
    if let Some(s) = &input.stratum {
        let pattern: SingularityPattern = s.parse()?;
        let entry = catalog(&pattern, component)?;
        return Ok(Resolved { stratum: pattern.key(), component: Some(entry.component_label), permutation: entry.permutation });
    }
    let path = input.perm_file.as_ref().expect("clap enforces one input");
    let text = std::fs::read_to_string(path).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
    let permutation = GeneralizedPermutation::parse(&text)?;
    Ok(Resolved { stratum: stratum_of(&permutation).key(), component: None, permutation })
}

fn exponents(v: &[Exponent]) -> String {
    v.iter().map(|e| format!("{:.6}±{:.6}", e.value, e.se)).collect::<Vec<_>>().join(";")
}

pub fn stratum_info_cmd(stratum: &str, format: Format) -> Result<()> {
    let pattern: SingularityPattern = stratum.parse()?;
    let info = stratum_info(&pattern);
    let text = match format {
        Format::Json => serde_json::to_string(&info).expect("serializable") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["stratum", "g", "ghat", "tau", "nu", "dim_complex", "dim_plus", "dim_minus", "count_plus", "count_minus"])
                .and_then(|_| {
                    w.write_record([
                        pattern.to_string(),
                        info.genus.to_string(),
                        info.cover_genus.to_string(),
                        info.tau.to_string(),
                        info.nu.to_string(),
                        info.dim_complex.to_string(),
                        info.dim_invariant.to_string(),
                        info.dim_anti_invariant.to_string(),
                        info.positive_invariant_count.to_string(),
                        info.positive_anti_invariant_count.to_string(),
                    ])
                })
                .map_err(|e| CliError::User(e.to_string()))?;
            String::from_utf8(w.into_inner().map_err(|e| CliError::User(e.to_string()))?).expect("utf-8")
        }
        Format::Text => format!(
            "{pattern}\n  g = {}, ghat = {}\n  cover orders: {}\n  singularities: {} ({} odd)\n  complex dimension: {}\n  H+ dimension: {}, H- dimension: {}\n  positive exponents: {} invariant, {} anti-invariant\n",
            info.genus,
            info.cover_genus,
            info.cover_pattern.key(),
            info.tau,
            info.nu,
            info.dim_complex,
            info.dim_invariant,
            info.dim_anti_invariant,
            info.positive_invariant_count,
            info.positive_anti_invariant_count,
        ),
    };
    emit(None, &text)?;
    Ok(())
}

fn estimator_config(steps: u64, seeds: Vec<u64>, reorth_every: u64, burn_in: Option<u64>, batches: usize) -> EstimatorConfig {
    EstimatorConfig {
        steps,
        reorth_every,
        seed: seeds[0],
        replicas: seeds.len(),
        seed_list: Some(seeds),
        burn_in,
        batch_count: batches,
        ..Default::default()
    }
}

pub fn spectrum(a: &SpectrumArgs) -> Result<()> {
    let started = Instant::now();
    let r = resolve(&a.input, &a.component)?;
    let seeds = a.seeds.resolve(a.seed);
    let cfg = estimator_config(a.steps, seeds.clone(), a.reorth_every, a.burn_in, a.batches);
    let est = if a.unsplit { estimate_unsplit(&r.permutation, &cfg)? } else { estimate_spectrum(&r.permutation, &cfg)? };
    let out = a.out.as_deref();
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut rows = Vec::new();
            if needs_header(out) {
                rows.push(vec!["stratum", "component", "fingerprint", "route", "steps", "seeds", "lambda_plus", "lambda_minus"].into_iter().map(String::from).collect());
            }
            rows.push(vec![
                r.stratum.clone(),
                r.component.clone().unwrap_or_default(),
                r.permutation.fingerprint(),
                if a.unsplit { "unsplit" } else { "split" }.to_string(),
                a.steps.to_string(),
                seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
                exponents(&est.lambda_plus),
                exponents(&est.lambda_minus),
            ]);
            for row in rows {
                w.write_record(&row).map_err(|e| CliError::User(e.to_string()))?;
            }
            let text = String::from_utf8(w.into_inner().map_err(|e| CliError::User(e.to_string()))?).expect("utf-8");
            emit(out, &text)?;
        }
        _ => {
            let body = spectrum_body(&r, &cfg, a.unsplit, &est);
            emit(out, &(RunRecord::new(body, started.elapsed().as_secs_f64()).to_line() + "\n"))?;
        }
    }
    Ok(())
}

fn spectrum_body(r: &Resolved, cfg: &EstimatorConfig, unsplit: bool, est: &SpectrumEstimate) -> Body {
    Body {
        command: "spectrum".into(),
        config: json!({ "route": if unsplit { "unsplit" } else { "split" }, "estimator": cfg }),
        stratum: Some(r.stratum.clone()),
        component: r.component.clone(),
        permutation: Some(r.permutation.render()),
        fingerprint: Some(r.permutation.fingerprint()),
        seeds: cfg.seeds(),
        estimates: json!({
            "lambda_plus": est.lambda_plus,
            "lambda_minus": est.lambda_minus,
            "theta_top": est.theta_top,
        }),
        diagnostics: json!(est.diagnostics),
        version: version(),
    }
}

/// `pattern` or `pattern:component`.
fn parse_subset(text: &str) -> Vec<(String, String)> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.split_once(':') {
            Some((p, c)) => (p.trim().to_string(), c.trim().to_string()),
            None => (s.to_string(), String::new()),
        })
        .collect()
}

pub const TABLE_HEADER: [&str; 4] = ["Stratum", "Geni", "Invariant Exponents", "Anti-Invariant Exponents"];

pub fn table(a: &TableArgs) -> Result<()> {
    let subset: Vec<(String, String)> = match &a.strata {
        Some(s) => parse_subset(s),
        None => catalog_entries().into_iter().map(|e| (e.stratum.key(), e.component_label)).collect(),
    };
    let seeds = a.seeds.resolve(a.seed);
    let cfg = estimator_config(a.steps, seeds, a.reorth_every, a.burn_in, EstimatorConfig::default().batch_count);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut problems = Vec::new();
    let mut rows = vec![TABLE_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for (pattern, component) in &subset {
        let label = if component.is_empty() { format!("Q({pattern})") } else { format!("Q({pattern}) {component}") };
        let row = pattern
            .parse::<SingularityPattern>()
            .and_then(|p| Ok((stratum_info(&p), catalog(&p, component)?)))
            .and_then(|(info, entry)| Ok((info, entry.clone(), estimate_spectrum(&entry.permutation, &cfg)?)));
        match row {
            Ok((info, entry, est)) => {
                let label = if entry.component_label.is_empty() {
                    info.pattern.to_string()
                } else {
                    format!("{} {}", info.pattern, entry.component_label)
                };
                rows.push(vec![
                    label,
                    format!("g={} ghat={}", info.genus, info.cover_genus),
                    exponents(&est.lambda_plus),
                    exponents(&est.lambda_minus),
                ]);
            }
            Err(e) => {
                eprintln!("{label}: {e}");
                problems.push(CliError::from(e));
                rows.push(vec![label, "SKIPPED".into(), String::new(), String::new()]);
            }
        }
    }
    for row in &rows {
        w.write_record(row).map_err(|e| CliError::User(e.to_string()))?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::User(e.to_string()))?).expect("utf-8");
    emit(a.out.as_deref(), &text)?;
    match problems.into_iter().max_by_key(|p| p.code()) {
        None => Ok(()),
        Some(CliError::User(_)) => Err(CliError::User("some rows were skipped".into())),
        Some(CliError::Invariant(_)) => Err(CliError::Invariant("some rows failed".into())),
    }
}

pub fn deviation(a: &DeviationArgs) -> Result<()> {
    let started = Instant::now();
    let r = resolve(&a.input, &a.component)?;
    let cover = orient_double_cover(&r.permutation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let lengths = LengthVector::random(&r.permutation, &mut rng);
    let series = run_orbit(&cover, &lengths, a.t_max, a.seed)?;
    let out = a.out.as_deref();
    if a.format == Format::Csv {
        emit(out, &series.to_csv()?)?;
        return Ok(());
    }
    let fit = fit_slopes(&series)?;
    eprintln!(
        "slope_minus_top {:.4}  slope_plus_top {:.4}  base norm {:.3e}",
        fit.slope_minus_top, fit.slope_plus_top, fit.base_asymptotic_norm
    );
    let rows: Vec<NormRow> = fit.rows.clone();
    let body = Body {
        command: "deviation".into(),
        config: json!({ "T": a.t_max, "seed": a.seed, "lengths": lengths.lengths }),
        stratum: Some(r.stratum.clone()),
        component: r.component.clone(),
        permutation: Some(r.permutation.render()),
        fingerprint: Some(r.permutation.fingerprint()),
        seeds: vec![a.seed],
        estimates: json!({
            "slope_minus_top": fit.slope_minus_top,
            "slope_plus_top": fit.slope_plus_top,
            "r_squared_minus": fit.r_squared_minus,
            "r_squared_plus": fit.r_squared_plus,
            "base_asymptotic_norm": fit.base_asymptotic_norm,
        }),
        diagnostics: json!({ "restarts": series.restarts, "checkpoints_used": fit.checkpoints_used, "checkpoints": rows }),
        version: version(),
    };
    emit(out, &(RunRecord::new(body, started.elapsed().as_secs_f64()).to_line() + "\n"))?;
    Ok(())
}

pub fn check_periodic(a: &PeriodicArgs) -> Result<()> {
    let started = Instant::now();
    if a.max_squares < 2 {
        return Err(CliError::User("--max-squares must be at least 2".into()));
    }
    let rep = run_fixture_suite(a.fixtures, a.seed, a.max_squares);
    let text = if a.format == Format::Json {
        let body = Body {
            command: "check-periodic".into(),
            config: json!({ "fixtures": a.fixtures, "seed": a.seed, "max_squares": a.max_squares }),
            stratum: None,
            component: None,
            permutation: None,
            fingerprint: None,
            seeds: vec![a.seed],
            estimates: json!(rep),
            diagnostics: json!({ "all_passed": rep.all_passed() }),
            version: version(),
        };
        RunRecord::new(body, started.elapsed().as_secs_f64()).to_line() + "\n"
    } else {
        let n = rep.fixtures;
        format!(
            "fixtures: {n}\narea and isotropy: {}/{n}\nrank lemma inequality: {}/{n}\nrank lemma equality (2+ odd points): {}/{}\nmonodromy: {}/{n}\nleaf integrals: {}/{} paths\n{}\n",
            rep.area_and_isotropy,
            rep.rank_inequality,
            rep.rank_equality,
            rep.rank_equality_applicable,
            rep.monodromy,
            rep.paths_agreeing,
            rep.paths_tested,
            if rep.all_passed() { "PASS" } else { "FAIL" },
        )
    };
    emit(a.out.as_deref(), &text)?;
    if rep.all_passed() {
        Ok(())
    } else {
        Err(CliError::Invariant("cylinder lemma check failed".into()))
    }
}

pub fn catalog_cmd(stratum: Option<&str>, component: &str, format: Format) -> Result<()> {
    let entries = match stratum {
        Some(s) => vec![catalog(&s.parse()?, component)?],
        None => catalog_entries(),
    };
    let text = match format {
        Format::Json => {
            let v: Vec<_> = entries
                .iter()
                .map(|e| {
                    json!({
                        "stratum": e.stratum.key(),
                        "component": e.component_label,
                        "letters": e.permutation.d(),
                        "permutation": e.permutation.render(),
                        "fingerprint": e.permutation.fingerprint(),
                        "notes": e.notes,
                    })
                })
                .collect();
            serde_json::to_string(&v).expect("serializable") + "\n"
        }
        _ if stratum.is_some() => {
            let e = &entries[0];
            let mut t = format!("# stratum: {}\n", e.stratum.key());
            if !e.component_label.is_empty() {
                t += &format!("# component: {}\n", e.component_label);
            }
            for n in &e.notes {
                t += &format!("# {n}\n");
            }
            t + &e.permutation.to_file_string()
        }
        _ => entries
            .iter()
            .map(|e| format!("{:<16} {:<4} d={:<3} {}\n", e.stratum.to_string(), e.component_label, e.permutation.d(), e.permutation.render()))
            .collect(),
    };
    emit(None, &text)?;
    Ok(())
}
