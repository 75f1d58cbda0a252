//! Decompose, assemble and verify, retrying with fresh seeds on failure.

use serde::Serialize;
use thiserror::Error;

use crate::assemble::{assemble, AssembleError, Assembly};
use crate::decompose::{decompose, DecomposeError, DecompositionPlan, MIN_DEGREE};
use crate::graph::BipartiteGraph;
use crate::verify::{verify, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("minimum degree {0} < {MIN_DEGREE}")]
    MinDegree(usize),
    #[error("all {attempts} attempts failed; last error: {last}")]
    Exhausted { attempts: usize, last: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub seed: u64,
    /// Additional attempts after the first, each with seed `seed + attempt`.
    pub max_retries: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: 0,
            max_retries: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub plan: DecompositionPlan,
    pub assembly: Assembly,
    pub verdict: Verdict,
    /// Earlier attempts that failed, in order.
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn labels(&self) -> &[u64] {
        &self.assembly.labeling.label_of_edge
    }
}

fn attempt(g: &BipartiteGraph, seed: u64) -> Result<(DecompositionPlan, Assembly), String> {
    let plan = decompose(g, seed).map_err(|e: DecomposeError| e.to_string())?;
    let assembly = assemble(g, &plan).map_err(|e: AssembleError| e.to_string())?;
    Ok((plan, assembly))
}

/// Labels `g`. Every returned labeling has passed [`verify`].
pub fn label_graph(g: &BipartiteGraph, opts: Options) -> Result<Outcome, PipelineError> {
    let delta = g.min_degree();
    if delta < MIN_DEGREE {
        return Err(PipelineError::MinDegree(delta));
    }
    let mut failures = Vec::new();
    for k in 0..=opts.max_retries {
        let seed = opts.seed.wrapping_add(k as u64);
        match attempt(g, seed) {
            Ok((plan, assembly)) => {
                let verdict = verify(g, &assembly.labeling.label_of_edge);
                if verdict.antimagic {
                    return Ok(Outcome {
                        plan,
                        assembly,
                        verdict,
                        failures,
                    });
                }
                failures.push(Failure {
                    seed,
                    error: format!("{} vertex sum collisions", verdict.collisions.len()),
                });
            }
            Err(error) => failures.push(Failure { seed, error }),
        }
    }
    let last = failures.last().map(|f| f.error.clone()).unwrap_or_default();
    Err(PipelineError::Exhausted {
        attempts: opts.max_retries + 1,
        last,
    })
}
