//! Command bodies and their JSON/CSV reports.
//!
//! JSON goes through `serde_json::Value`, whose maps are ordered by key, so
//! equal inputs give byte-identical reports.

use std::ops::Range;

use dmupf::analysis::{
    check_r_feasible, exhaustive_correctness_with, exhaustive_privacy, inner_bounds, outer_bounds,
    rate_report,
};
use dmupf::dmuss::{param_sample, RateVector};
use dmupf::protocol::{
    self, stream_rng, ParamPolicy, ProtocolConfig, RetrievalMode, Transcript, STREAM_PARAMS,
};
use dmupf::FieldCtx;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{CliError, Resolved};

#[derive(Clone, Copy)]
pub struct RunOptions {
    pub peeling: bool,
    pub break_privacy: bool,
}

fn to_text(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
    s.push('\n');
    s
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn field_json(field: &FieldCtx) -> Value {
    json!({ "q": field.q(), "m": field.m(), "modulus": field.modulus() })
}

fn protocol_config(
    cfg: &RunConfig,
    seed: u64,
    opts: RunOptions,
) -> Result<ProtocolConfig, CliError> {
    let mut p = cfg.protocol(seed)?;
    if opts.peeling {
        p.retrieval = RetrievalMode::Peeling;
    }
    if opts.break_privacy {
        p.policy = ParamPolicy::Adversarial;
    }
    Ok(p)
}

fn user_verdicts(transcript: &Transcript, users: usize) -> Vec<Value> {
    (1..=users)
        .map(|k| {
            let mine: Vec<_> = transcript
                .rounds
                .iter()
                .flat_map(|r| &r.outcomes)
                .filter(|o| o.user == k)
                .collect();
            let failures = mine.iter().filter(|o| !o.correct).count();
            json!({
                "user": k,
                "retrievals": mine.len(),
                "failures": failures,
                "correct": failures == 0,
                "matches_decoding": mine.iter().all(|o| o.matches_decoding),
            })
        })
        .collect()
}

pub fn run(cfg: &RunConfig, seed: u64, opts: RunOptions) -> Result<(String, bool), CliError> {
    let p = protocol_config(cfg, seed, opts)?;
    let transcript = protocol::run(&p)?;
    let rates = rate_report(&p.access, &p.rates, p.domain, p.field.q(), p.field.m())?;
    let ok = transcript.all_correct();
    let report = json!({
        "command": "run",
        "seed": seed,
        "field": field_json(&p.field),
        "T": p.domain,
        "N": p.access.servers(),
        "access": p.access.sets(),
        "R": p.rates,
        "retrieval": value(&p.retrieval),
        "param_policy": value(&p.policy),
        "users": user_verdicts(&transcript, p.access.users()),
        "all_correct": ok,
        "rates": value(&rates),
        "transcript": value(&transcript),
    });
    Ok((to_text(report), ok))
}

pub fn sweep(
    cfg: &RunConfig,
    seeds: Range<u64>,
    opts: RunOptions,
) -> Result<(String, bool), CliError> {
    let results: Vec<Result<Value, CliError>> = seeds
        .clone()
        .into_par_iter()
        .map(|seed| {
            let p = protocol_config(cfg, seed, opts)?;
            match protocol::run(&p) {
                Ok(t) => Ok(json!({
                    "seed": seed,
                    "all_correct": t.all_correct(),
                    "retrievals": t.retrievals(),
                    "failures": t.rounds.iter().flat_map(|r| &r.outcomes).filter(|o| !o.correct).count(),
                    "attempts": t.params.attempts,
                })),
                Err(dmupf::Error::ParamSearchFailed { attempts, report }) => Ok(json!({
                    "seed": seed,
                    "all_correct": false,
                    "error": format!("parameter search failed after {attempts} attempts: {}", report.summary()),
                })),
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let ok = runs.iter().all(|r| r["all_correct"] == json!(true));
    let report = json!({
        "command": "sweep",
        "seeds": [seeds.start, seeds.end],
        "runs": runs,
        "all_correct": ok,
    });
    Ok((to_text(report), ok))
}

/// Mutual information as text: exactly `"0"` for independent pairs.
fn mi_text(mi: f64, independent: bool) -> String {
    if independent {
        "0".into()
    } else {
        format!("{mi}")
    }
}

pub fn verify(cfg: &RunConfig, seed: u64, break_privacy: bool) -> Result<(String, bool), CliError> {
    let p = protocol_config(
        cfg,
        seed,
        RunOptions {
            peeling: false,
            break_privacy,
        },
    )?;
    let budget = cfg.budget()?;
    let placement = protocol::placement(&p)?;
    let privacy = exhaustive_privacy(&placement.params, p.domain, budget)?;
    let correctness = exhaustive_correctness_with(&p, &placement, budget)?;
    let pairs: Vec<Value> = privacy
        .pairs
        .iter()
        .map(|pair| {
            json!({
                "user": pair.user,
                "observer": pair.observer,
                "mutual_information": mi_text(pair.mutual_information, pair.independent),
                "independent": pair.independent,
                "secret_support": pair.secret_support,
                "observation_support": pair.observation_support,
                "joint_support": pair.joint_support,
                "response_mutual_information": mi_text(pair.response_mutual_information, pair.response_independent),
            })
        })
        .collect();
    let ok = privacy.pass && correctness.pass;
    let report = json!({
        "command": "verify",
        "seed": seed,
        "field": field_json(&p.field),
        "T": p.domain,
        "N": p.access.servers(),
        "access": p.access.sets(),
        "R": p.rates,
        "param_policy": value(&p.policy),
        "validation": value(placement.params.report()),
        "privacy": {
            "states": privacy.states,
            "budget": budget,
            "pairs": pairs,
            "pass": privacy.pass,
        },
        "correctness": value(&correctness),
        "pass": ok,
    });
    Ok((to_text(report), ok))
}

fn region_domain(r: &Resolved) -> Result<usize, CliError> {
    r.domain
        .ok_or_else(|| CliError::Invalid("-T/--domain or --config is required".into()))
}

pub fn region_json(r: &Resolved) -> Result<String, CliError> {
    let domain = region_domain(r)?;
    let outer = outer_bounds(&r.access)?;
    let inner = inner_bounds(&r.access, domain, r.field.q(), r.field.m())?;
    let report = json!({
        "command": "region",
        "field": field_json(&r.field),
        "T": domain,
        "N": r.access.servers(),
        "access": r.access.sets(),
        "outer": outer.iter().map(|c| json!({
            "constraint": value(c),
            "text": c.to_string(),
            "normalized_bound": c.bound() as f64 / domain as f64,
        })).collect::<Vec<_>>(),
        "inner": value(&inner.constraints),
        "feasible": value(&inner.feasible),
        "maximal": inner.maximal,
    });
    Ok(to_text(report))
}

/// One row per feasible tuple: block lengths, maximality, achieved rates.
pub fn region_csv(r: &Resolved) -> Result<String, CliError> {
    let inner = inner_bounds(&r.access, region_domain(r)?, r.field.q(), r.field.m())?;
    let k = r.access.users();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=k).map(|i| format!("R_{i}")).collect();
    header.push("maximal".into());
    header.extend((1..=k).map(|i| format!("r_{i}")));
    let io = |e: csv::Error| CliError::Invalid(format!("cannot write CSV: {e}"));
    w.write_record(&header).map_err(io)?;
    for t in &inner.feasible {
        let mut row: Vec<String> = t.rates.iter().map(|x| x.to_string()).collect();
        row.push(t.maximal.to_string());
        row.extend(t.achieved.iter().map(|u| u.achieved.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Invalid(format!("cannot write CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

fn pass_text(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn params(r: &Resolved, seed: u64, max_retries: usize) -> Result<(String, bool), CliError> {
    let rates = r
        .rates
        .clone()
        .ok_or_else(|| CliError::Invalid("--rates or --config is required".into()))?;
    let feasibility = check_r_feasible(&r.access, &rates)?;
    let rate_vec = RateVector::new(&r.access, rates.clone())?;
    let mut rng = stream_rng(seed, STREAM_PARAMS);
    let base = json!({
        "command": "params",
        "seed": seed,
        "field": field_json(&r.field),
        "N": r.access.servers(),
        "access": r.access.sets(),
        "R": rates,
        "max_retries": max_retries,
        "feasibility": {
            "feasible": feasibility.feasible,
            "violations": feasibility.violations.iter().map(|v| json!({
                "violation": value(v),
                "text": v.to_string(),
            })).collect::<Vec<_>>(),
        },
    });
    let Value::Object(mut report) = base else {
        unreachable!("object literal")
    };
    let ok = match param_sample(&r.field, &r.access, &rate_vec, &mut rng, max_retries) {
        Ok(p) => {
            let users = protocol::ParamsRecord::from_params(&p);
            report.insert("search".into(), json!("ok"));
            report.insert("attempts".into(), json!(p.attempts()));
            report.insert("users".into(), value(&users.users));
            report.insert("nullity".into(), json!(p.nullity()));
            insert_validation(&mut report, p.report());
            true
        }
        Err(dmupf::Error::ParamSearchFailed {
            attempts,
            report: last,
        }) => {
            report.insert("search".into(), json!("failed"));
            report.insert("attempts".into(), json!(attempts));
            insert_validation(&mut report, &last);
            for v in &feasibility.violations {
                eprintln!("dmupf: {v}");
            }
            false
        }
        Err(e) => return Err(e.into()),
    };
    Ok((to_text(Value::Object(report)), ok))
}

fn insert_validation(
    report: &mut serde_json::Map<String, Value>,
    validation: &dmupf::dmuss::ValidationReport,
) {
    report.insert(
        "decodability".into(),
        json!(pass_text(validation.decodability.pass)),
    );
    report.insert(
        "privacy".into(),
        json!(pass_text(validation.privacy.iter().all(|p| p.pass))),
    );
    report.insert("validation".into(), value(validation));
    report.insert("summary".into(), json!(validation.summary()));
}
