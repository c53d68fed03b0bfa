use std::io::Write;
use std::time::Instant;

use dyadic_core::chains::{build_block_matrix, build_edge_matrix, Chain, ChainConfig, ChainKind};
use dyadic_core::combinatorics::{self, CountTable, ExactRatio};
use dyadic_core::coupling::{contraction_survey, DistanceParams, MAX_EXHAUSTIVE_SURVEY_K};
use dyadic_core::enumeration::{
    boundary_set, count_streaming, diameter, enumerate_ladder, flip_graph, upsilon_set, TilingIndex,
};
use dyadic_core::mixing::{self, StartSet};
use dyadic_core::sparse::SparseSymmetricStochastic;
use dyadic_core::spectral;
use dyadic_core::Tiling;
use serde_json::{json, Value};

use crate::output::{sink, write_json, write_text, Envelope, Header};
use crate::*;

fn ratio(r: &ExactRatio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_start(enc: &Option<String>, k: u32) -> Result<Tiling, CliError> {
    let t = match enc {
        Some(s) => Tiling::decode(s).map_err(dyadic_core::Error::from)?,
        None => Tiling::vertical_strips(k),
    };
    if t.k() != k {
        return Err(usage(format!("start tiling has k = {}, expected {k}", t.k())));
    }
    Ok(t)
}

fn matrix(ladder: &[TilingIndex], k: u32, kind: ChainKind) -> Result<SparseSymmetricStochastic, CliError> {
    Ok(match kind {
        ChainKind::Edge => build_edge_matrix(&ladder[k as usize])?,
        ChainKind::Block => {
            if k == 0 {
                return Err(dyadic_core::Error::TooSmall { what: "block chain", k, min: 1 }.into());
            }
            build_block_matrix(&ladder[k as usize], &ladder[k as usize - 1])?
        }
    })
}

pub fn count_payload(a: &CountArgs) -> Result<Value, CliError> {
    let table = CountTable::up_to_with_cap(a.k, a.cap)?;
    let rows: Vec<Value> = (0..=a.k)
        .map(|k| {
            let mut row = json!({
                "k": k,
                "A_k": table.count(k).to_string(),
            });
            if k >= 1 {
                row["growth_constant_estimate"] = json!(table.growth_constant_estimate(k));
            }
            if k >= 2 {
                let m = row.as_object_mut().expect("object");
                m.insert("f_k".into(), json!(ratio(&table.half_bisector_fraction(k))));
                m.insert(
                    "f_k_recurrence".into(),
                    json!(ratio(&combinatorics::half_bisector_fraction_by_recurrence(k))),
                );
                m.insert("subset_counts".into(), serde_json::to_value(table.subset_counts(k)).expect("serializable"));
                m.insert("plus_ratio".into(), json!(ratio(&table.plus_ratio(k))));
                m.insert("upsilon_count".into(), json!(table.upsilon_count(k).to_string()));
                m.insert("boundary_count".into(), json!(table.boundary_count(k).to_string()));
                m.insert("variance_vertical".into(), json!(ratio(&table.variance_vertical_indicator(k))));
                m.insert("dirichlet_vertical".into(), json!(ratio(&table.dirichlet_vertical_indicator(k))));
            }
            row
        })
        .collect();
    let mut out = json!({
        "k": a.k,
        "A_k": table.count(a.k).to_string(),
        "growth_constant": combinatorics::OMEGA,
        "table": rows,
    });
    if a.streaming {
        out["streaming_count"] = json!(count_streaming(a.k)?.to_string());
    }
    Ok(out)
}

pub fn gap_payload(a: &GapArgs) -> Result<(Value, Vec<String>), CliError> {
    let opts = a.solver.options();
    let kind: ChainKind = a.chain.into();
    let ladder = enumerate_ladder(a.k)?;
    let p = matrix(&ladder, a.k, kind)?;
    if let Some(path) = &a.matrix {
        write_text(path, &p.to_triplets())?;
    }
    let mut report = spectral::spectral_gap(&p, &opts)?;
    report.k = Some(a.k);
    report.chain = Some(kind);
    let mut failures = Vec::new();
    let mut out = json!({ "report": report });
    if a.recursion {
        let r = spectral::verify_gap_recursion(a.k, &opts)?;
        if !r.holds {
            failures.push(format!("gap recursion fails at k = {}", a.k));
        }
        out["recursion"] = serde_json::to_value(r)?;
    }
    if a.lower_bound {
        let r = spectral::lower_bound_check(a.k, &opts)?;
        if !r.holds {
            failures.push(format!("lower-bound check fails at k = {}", a.k));
        }
        out["lower_bound"] = serde_json::to_value(r)?;
    }
    Ok((out, failures))
}

pub fn mix_payload(a: &MixArgs) -> Result<(Value, Vec<String>), CliError> {
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(usage("--epsilon must lie in (0, 1)"));
    }
    let kind: ChainKind = a.chain.into();
    let opts = a.solver.options();
    let start = parse_start(&a.start, a.k)?;
    let mut failures = Vec::new();
    let mut out = json!({});
    let exact_k = a.k.max(a.scaling.unwrap_or(0));
    let ladder = if exact_k <= dyadic_core::enumeration::MAX_MATERIALIZED_K {
        Some(enumerate_ladder(exact_k)?)
    } else {
        None
    };
    match &ladder {
        Some(ladder) if a.k >= 1 => {
            let index = &ladder[a.k as usize];
            let p = matrix(ladder, a.k, kind)?;
            let s = index.index_of(&start).expect("decoded tiling is enumerated");
            let curve = mixing::exact_tv_curve(&p, index, kind, s, a.t_max)?;
            if let Some(path) = &a.csv {
                let mut buf = Vec::new();
                curve.write_csv(&mut buf)?;
                std::fs::write(path, buf)?;
            }
            out["curve"] = serde_json::to_value(&curve)?;
            if let Some(which) = a.mixing_time {
                let set = match which {
                    StartsArg::All => StartSet::All,
                    StartsArg::Surrogate => StartSet::Surrogate { random: a.random_starts, seed: a.seed },
                };
                let m = mixing::mixing_time(&p, index, kind, &set, a.epsilon, 100_000_000)?;
                out["mixing_time"] = serde_json::to_value(m)?;
            }
            if a.sandwich {
                if kind != ChainKind::Edge || a.k > 3 || a.k < 2 {
                    return Err(usage("--sandwich needs the edge chain and 2 <= k <= 3"));
                }
                let r = mixing::sandwich(ladder, a.k, a.epsilon, &opts)?;
                if !r.holds {
                    failures.push(format!("sandwich fails at k = {}", a.k));
                }
                out["sandwich"] = serde_json::to_value(r)?;
            }
            if let Some(km) = a.scaling {
                out["scaling"] = serde_json::to_value(mixing::scaling_report(ladder, km, &opts)?)?;
            }
            if a.statistic_samples.is_some() && a.k >= 2 {
                out["statistic_exact"] = json!(mixing::statistic_tv_exact(&p, index, s, a.statistic_t)?);
            }
        }
        _ => {
            if a.mixing_time.is_some() || a.sandwich || a.scaling.is_some() {
                return Err(dyadic_core::Error::SizeGuard {
                    what: "exact mixing analysis",
                    k: exact_k,
                    max: dyadic_core::enumeration::MAX_MATERIALIZED_K,
                }
                .into());
            }
        }
    }
    if let Some(n) = a.statistic_samples {
        let chain = Chain::new(ChainConfig { k: a.k, kind, seed: a.seed })?;
        let r = mixing::statistic_tv_lower_bound(&chain, &start, a.statistic_t, n)?;
        out["statistic"] = serde_json::to_value(r)?;
    }
    Ok((out, failures))
}

pub fn couple_payload(a: &CoupleArgs) -> Result<(Value, Vec<String>), CliError> {
    let params = DistanceParams::new(a.b)?;
    if a.exhaustive && a.k > MAX_EXHAUSTIVE_SURVEY_K {
        return Err(dyadic_core::Error::SizeGuard {
            what: "exhaustive coupling survey",
            k: a.k,
            max: MAX_EXHAUSTIVE_SURVEY_K,
        }
        .into());
    }
    if a.k < 2 {
        return Err(dyadic_core::Error::TooSmall { what: "coupling survey", k: a.k, min: 2 }.into());
    }
    let ladder = enumerate_ladder(a.k)?;
    let mut rng = dyadic_core::chains::rng_from_seed(a.seed);
    let seed = (a.k > MAX_EXHAUSTIVE_SURVEY_K).then_some(a.seed);
    let r = contraction_survey(
        &ladder[a.k as usize],
        &ladder[a.k as usize - 1],
        &params,
        a.samples.unwrap_or(1000),
        seed,
        &mut rng,
    )?;
    let mut failures = Vec::new();
    if !r.bounds_hold {
        failures.push("a per-case bound is violated".to_string());
    }
    if r.bounds_imply_target && !r.target_observed {
        failures.push("case bounds imply the target ratio but it is not observed".to_string());
    }
    Ok((serde_json::to_value(r)?, failures))
}

pub fn sample_payload(a: &SampleArgs) -> Result<Value, CliError> {
    let start = parse_start(&a.start, a.k)?;
    if a.every == 0 {
        return Err(usage("--every must be positive"));
    }
    let chain = Chain::new(ChainConfig { k: a.k, kind: a.chain.into(), seed: a.seed })?;
    let tr = chain.run(&start, a.steps, Some((a.statistic.into(), a.every)), &mut chain.rng())?;
    if let Some(path) = &a.csv {
        let mut buf = Vec::new();
        tr.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    Ok(json!({
        "start": tr.start.encode(),
        "end": tr.end.encode(),
        "steps": tr.steps,
        "accepted": tr.accepted,
        "statistic": a.statistic,
        "trace": tr.trace,
    }))
}

fn finish(cli: &Cli, name: &str, header: Header, payload: Value, started: Instant, failures: Vec<String>) -> Result<(), CliError> {
    let env = Envelope::new(header, payload, started);
    let mut w = sink(cli, &format!("{name}.json"))?;
    write_json(&mut *w, &env, cli.compact)?;
    w.flush()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(failures.join("; ")))
    }
}

fn enumerate_cmd(cli: &Cli, a: &EnumerateArgs, started: Instant) -> Result<(), CliError> {
    let ladder = enumerate_ladder(a.k)?;
    let index = &ladder[a.k as usize];
    let items: Vec<Value> = match a.set {
        SetArg::All => index
            .encodings()
            .iter()
            .enumerate()
            .map(|(i, e)| json!({ "index": i, "encoding": e }))
            .collect(),
        SetArg::Boundary => boundary_set(index)?
            .iter()
            .map(|b| {
                json!({
                    "index": index.index_of(&b.tiling),
                    "encoding": b.tiling.encode(),
                    "partner": b.partner.encode(),
                })
            })
            .collect(),
        SetArg::Upsilon => upsilon_set(&ladder, a.k)?
            .iter()
            .map(|t| json!({ "index": index.index_of(t), "encoding": t.encode() }))
            .collect(),
    };
    let mut payload = json!({ "k": a.k, "set": a.set, "count": items.len() });
    if a.diameter || a.edges.is_some() {
        let g = flip_graph(index)?;
        payload["edges"] = json!(g.edge_count());
        if a.diameter {
            payload["diameter"] = json!(diameter(&g)?);
        }
        if let Some(path) = &a.edges {
            write_text(path, &g.edge_list())?;
        }
    }
    let header = Header::new("enumerate", a, None)?;
    let env = Envelope::new(header, payload, started);
    let mut w = sink(cli, "enumerate.jsonl")?;
    write_json(&mut *w, &env, true)?;
    for item in items {
        write_json(&mut *w, &item, true)?;
    }
    w.flush()?;
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match &cli.command {
        Command::Count(a) => {
            let payload = count_payload(a)?;
            finish(cli, "count", Header::new("count", a, None)?, payload, started, vec![])
        }
        Command::Enumerate(a) => enumerate_cmd(cli, a, started),
        Command::Gap(a) => {
            let (payload, failures) = gap_payload(a)?;
            finish(cli, "gap", Header::new("gap", a, None)?, payload, started, failures)
        }
        Command::Mix(a) => {
            let (payload, failures) = mix_payload(a)?;
            finish(cli, "mix", Header::new("mix", a, Some(a.seed))?, payload, started, failures)
        }
        Command::Couple(a) => {
            let (payload, failures) = couple_payload(a)?;
            finish(cli, "couple", Header::new("couple", a, Some(a.seed))?, payload, started, failures)
        }
        Command::Sample(a) => {
            let payload = sample_payload(a)?;
            finish(cli, "sample", Header::new("sample", a, Some(a.seed))?, payload, started, vec![])
        }
        Command::VerifyAll(a) => {
            let results = verify::run_all(a.seed);
            let failures: Vec<String> = results
                .iter()
                .filter(|r| !r.passed)
                .map(|r| format!("{} {}", r.id, r.title))
                .collect();
            for r in &results {
                eprintln!("{r}");
            }
            let payload = json!({ "passed": failures.is_empty(), "checks": results });
            finish(cli, "verify-all", Header::new("verify-all", a, Some(a.seed))?, payload, started, failures)
        }
    }
}
