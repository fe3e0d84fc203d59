//! Corpus runs: every `NAME.json` interpretation is paired with a
//! `NAME.forp` letter program, and every `NAME.enum.json` enumerator with a
//! `NAME.enum.forp` tuple program.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use polyreg::forprog::{run_enumerator, run_program};
use polyreg::interpretation::{evaluate_interpretation, validate_order, Interpretation};
use polyreg::logic::Logic;
use polyreg::pipeline::{compile_enumeration, enumerate_definable, interpret_via_pipeline, DefinableEnumerator, PipelineError, PipelineOptions};

use crate::commands::{load_interpretation, load_program, read, tuples_text, words};

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub fixture: String,
    pub inputs: Vec<String>,
    pub outputs: Outputs,
    /// Program and pipeline agree with the oracle wherever they ran.
    pub oracle_agreement: bool,
    /// `None` when the pipeline does not apply (MSO or successor order).
    pub fallback: Option<bool>,
    pub timing_ms: u128,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Outputs {
    pub words_tested: usize,
    pub program_agrees: bool,
    pub pipeline_agrees: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_violation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<String>,
}

enum Fixture {
    Interpretation { name: String, json: PathBuf, forp: PathBuf },
    Enumerator { name: String, json: PathBuf, forp: PathBuf },
}

fn discover(dir: &Path) -> Result<Vec<Fixture>> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .with_context(|| format!("cannot read corpus {}", dir.display()))?
        .map(|e| Ok(e?.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_>>()?;
    names.sort();
    let mut out = Vec::new();
    for n in &names {
        if let Some(stem) = n.strip_suffix(".forp") {
            if !names.contains(&format!("{stem}.json")) {
                bail!("program {n} has no {stem}.json");
            }
            continue;
        }
        let Some(stem) = n.strip_suffix(".json") else { continue };
        let forp = format!("{stem}.forp");
        if !names.contains(&forp) {
            bail!("fixture {n} has no {forp}");
        }
        let (json, forp) = (dir.join(n), dir.join(&forp));
        let name = stem.to_string();
        out.push(if stem.ends_with(".enum") {
            Fixture::Enumerator { name, json, forp }
        } else {
            Fixture::Interpretation { name, json, forp }
        });
    }
    Ok(out)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Runs every paired fixture of `dir` on all words of length 2 to `max_len`.
pub fn corpus_check(dir: &Path, max_len: usize) -> Result<Vec<RunReport>> {
    discover(dir)?
        .into_iter()
        .map(|f| {
            let start = Instant::now();
            let (name, inputs, outputs, fallback) = match &f {
                Fixture::Interpretation { name, json, forp } => {
                    let i = load_interpretation(json)?;
                    let (o, fb) = check_interpretation(&i, &load_program(forp)?, max_len)?;
                    (name, [json, forp], o, fb)
                }
                Fixture::Enumerator { name, json, forp } => {
                    let e = DefinableEnumerator::from_json(&read(json)?)
                        .with_context(|| format!("malformed enumerator {}", json.display()))?;
                    let (o, fb) = check_enumerator(&e, &load_program(forp)?, max_len)?;
                    (name, [json, forp], o, Some(fb))
                }
            };
            Ok(RunReport {
                command: "corpus-check".into(),
                fixture: name.clone(),
                inputs: inputs.iter().map(|p| file_name(p)).collect(),
                oracle_agreement: outputs.program_agrees && outputs.pipeline_agrees != Some(false),
                outputs,
                fallback,
                timing_ms: start.elapsed().as_millis(),
            })
        })
        .collect()
}

fn check_interpretation(i: &Interpretation, p: &polyreg::forprog::ForProgram, max_len: usize) -> Result<(Outputs, Option<bool>)> {
    let pipelined = i.flavor == Logic::Fo && !i.is_successor();
    let opts = PipelineOptions::default();
    let mut o = Outputs { program_agrees: true, pipeline_agrees: pipelined.then_some(true), ..Outputs::default() };
    let mut fallback = pipelined.then_some(false);
    for w in words(&i.input_alphabet, 2, max_len) {
        o.words_tested += 1;
        let report = validate_order(i, &w)?;
        if let Some(v) = report.violation {
            o.order_violation = Some(format!("on {w}: {v}"));
            o.program_agrees = false;
            o.pipeline_agrees = o.pipeline_agrees.map(|_| false);
            break;
        }
        let oracle = evaluate_interpretation(i, &w)?.output;
        let program = run_program(p, &w)?;
        if program != oracle {
            o.program_agrees = false;
            o.mismatch = Some(format!("on {w}: oracle {oracle}, program {program}"));
            break;
        }
        if pipelined {
            let r = interpret_via_pipeline(i, &w, &opts)?;
            fallback = Some(fallback == Some(true) || r.run.fallback_used);
            if r.output != oracle {
                o.pipeline_agrees = Some(false);
                o.mismatch = Some(format!("on {w}: oracle {oracle}, pipeline {}", r.output));
                break;
            }
        }
    }
    Ok((o, fallback))
}

fn check_enumerator(e: &DefinableEnumerator, p: &polyreg::forprog::ForProgram, max_len: usize) -> Result<(Outputs, bool)> {
    let alphabet = e.alphabet.clone().unwrap_or_else(|| vec!['a', 'b']);
    let opts = PipelineOptions::default();
    let mut o = Outputs { program_agrees: true, pipeline_agrees: Some(true), ..Outputs::default() };
    let mut fallback = false;
    for w in words(&alphabet, 2, max_len) {
        o.words_tested += 1;
        let oracle = match enumerate_definable(e, &w) {
            Ok(t) => t,
            Err(PipelineError::InvalidOrder(v)) => {
                o.order_violation = Some(format!("on {w}: {v}"));
                o.program_agrees = false;
                o.pipeline_agrees = Some(false);
                break;
            }
            Err(err) => return Err(err.into()),
        };
        let program = run_enumerator(p, &w)?;
        if program != oracle {
            o.program_agrees = false;
            o.mismatch = Some(format!("on {w}: oracle {}, program {}", tuples_text(&oracle), tuples_text(&program)));
            break;
        }
        let run = compile_enumeration(e, &w, &opts)?;
        fallback |= run.fallback_used;
        if run.tuples != oracle {
            o.pipeline_agrees = Some(false);
            o.mismatch = Some(format!("on {w}: oracle {}, pipeline {}", tuples_text(&oracle), run));
            break;
        }
    }
    Ok((o, fallback))
}

pub fn run(dir: &Path, max_len: usize, json: bool) -> Result<bool> {
    let reports = corpus_check(dir, max_len)?;
    let agreed = reports.iter().filter(|r| r.oracle_agreement).count();
    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        let flag = |b: Option<bool>, yes: &str, no: &str| match b {
            Some(true) => yes.to_string(),
            Some(false) => no.to_string(),
            None => "n/a".to_string(),
        };
        for r in &reports {
            println!(
                "{}: {} (words {}, program {}, pipeline {}, fallback {})",
                r.fixture,
                if r.oracle_agreement { "ok" } else { "FAILED" },
                r.outputs.words_tested,
                flag(Some(r.outputs.program_agrees), "agrees", "differs"),
                flag(r.outputs.pipeline_agrees, "agrees", "differs"),
                flag(r.fallback, "yes", "no"),
            );
            if let Some(v) = &r.outputs.order_violation {
                println!("  order violation {v}");
            }
            if let Some(m) = &r.outputs.mismatch {
                println!("  mismatch {m}");
            }
        }
        println!("{agreed} of {} fixtures agree", reports.len());
    }
    Ok(agreed == reports.len())
}
