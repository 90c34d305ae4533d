//! Bounded path-exhaustive test generation — no solver, just runs.
//!
//! Inputs of the entry function range over a finite integer domain; every
//! nondeterministic choice made by a contract stand-in ranges over a (possibly
//! different) finite domain. For one input vector, the interpreter is run with
//! a stream of nondet values; when the run asks for one value more than the
//! stream holds, the stream is extended with each domain value in turn —
//! a depth-first walk of the whole nondet choice tree. Together with the
//! input enumeration this visits, within budget, *every* feasible execution
//! over the chosen domains, so "no failure found" over a completed search is
//! a definite *no* relative to those domains, not a sampling statement.
//!
//! Exploration order is canonical and fully deterministic: input vectors are
//! enumerated odometer-style (rightmost dimension fastest), nondet extensions
//! depth-first in domain order. The reported failure is always the first one
//! in this order. With a non-zero seed, the *value order* of every dimension
//! is shuffled (deterministically per seed), which permutes the search while
//! keeping it exhaustive.
//!
//! The parallel build explores chunks of input vectors concurrently and then
//! replays the sequential budget accounting over the per-input summaries, so
//! its results — including the reported failure and all statistics — are
//! bit-identical to the sequential build's (wall-clock budgets excepted).

pub mod brute;

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{run, RunLimits, RunOutcome, TestDatum};
use crate::lang::{Program, ScalarType, SubcontractRef, VarType};
use crate::par;
use crate::transform::{translate_gsw, translate_nc, translate_ssw, InstrumentedProgram, Variant};

/// Inclusive integer domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub min: i64,
    pub max: i64,
}

impl Domain {
    pub fn new(min: i64, max: i64) -> Self {
        assert!(min <= max, "empty domain");
        Domain { min, max }
    }

    pub fn size(&self) -> u64 {
        (self.max - self.min) as u64 + 1
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain { min: -8, max: 8 }
    }
}

/// Everything a bounded search needs. `seed = 0` keeps every dimension in
/// ascending order; any other seed shuffles the value orders
/// deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Domain of the entry inputs.
    pub input_domain: Domain,
    /// Domain of stand-in nondet choices.
    pub nondet_domain: Domain,
    /// Maximum number of interpreter runs (extension probes included).
    pub max_runs: u64,
    /// Optional wall-clock budget. When it fires the search reports
    /// `complete = false`; results may then differ between builds and
    /// machines, unlike with the run budget alone.
    pub budget_ms: Option<u64>,
    pub seed: u64,
    pub limits: RunLimits,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            input_domain: Domain::default(),
            nondet_domain: Domain::default(),
            max_runs: 200_000,
            budget_ms: None,
            seed: 0,
            limits: RunLimits::default(),
        }
    }
}

impl SearchConfig {
    pub fn with_domain(mut self, min: i64, max: i64) -> Self {
        self.input_domain = Domain::new(min, max);
        self.nondet_domain = Domain::new(min, max);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_runs(mut self, max_runs: u64) -> Self {
        self.max_runs = max_runs;
        self
    }
}

/// A counter-example found by a search: the datum and how it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub datum: TestDatum,
    pub outcome: RunOutcome,
}

/// Outcome of one bounded search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreResult {
    /// First failure in canonical order, if any.
    pub failure: Option<Failure>,
    /// Interpreter invocations consumed (extension probes included).
    pub runs: u64,
    /// Runs that reached a verdict (passed, failed, or were infeasible).
    pub completed_runs: u64,
    /// Runs discarded because an assumption was violated.
    pub infeasible_runs: u64,
    /// Distinct control-flow paths among passing runs of fully explored
    /// input vectors.
    pub distinct_paths: u64,
    /// Input vectors whose whole nondet tree was explored.
    pub inputs_explored: u64,
    /// True iff the entire input × nondet space was explored without hitting
    /// any budget or resource limit — only then is "no failure" a definite
    /// answer for the domains.
    pub complete: bool,
}

/// Three-valued answer of a detector search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchVerdict {
    FoundCe,
    NoCe,
    Unknown,
}

impl ExploreResult {
    pub fn verdict(&self) -> SearchVerdict {
        if self.failure.is_some() {
            SearchVerdict::FoundCe
        } else if self.complete {
            SearchVerdict::NoCe
        } else {
            SearchVerdict::Unknown
        }
    }
}

/// One detector run: which variant was searched and what came of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub variant: Variant,
    pub explore: ExploreResult,
}

// ---------------------------------------------------------------------------
// value orders and input enumeration
// ---------------------------------------------------------------------------

const INT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const BOOL_SALT: u64 = 0xd1b5_4a32_d192_ed03;

fn int_order(domain: Domain, seed: u64) -> Vec<i64> {
    let mut vals: Vec<i64> = (domain.min..=domain.max).collect();
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ INT_SALT);
        vals.shuffle(&mut rng);
    }
    vals
}

fn bool_order(seed: u64) -> Vec<i64> {
    let mut vals = vec![0i64, 1];
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BOOL_SALT);
        vals.shuffle(&mut rng);
    }
    vals
}

/// Odometer over the entry inputs: one `Vec<i64>` per input vector, rightmost
/// dimension advancing fastest. An entry without inputs yields exactly one
/// empty vector.
struct InputEnum {
    dims: Vec<Vec<i64>>,
    idx: Vec<usize>,
    done: bool,
}

impl InputEnum {
    fn new(ip: &InstrumentedProgram, cfg: &SearchConfig) -> Self {
        let ints = int_order(cfg.input_domain, cfg.seed);
        let bools = bool_order(cfg.seed);
        let mut dims = Vec::new();
        for input in &ip.inputs {
            match input.ty {
                VarType::Scalar(ScalarType::Int) => dims.push(ints.clone()),
                VarType::Scalar(ScalarType::Bool) => dims.push(bools.clone()),
                VarType::IntArray(n) => {
                    for _ in 0..n {
                        dims.push(ints.clone());
                    }
                }
            }
        }
        let idx = vec![0; dims.len()];
        InputEnum {
            dims,
            idx,
            done: false,
        }
    }

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let vec: Vec<i64> = self
            .dims
            .iter()
            .zip(&self.idx)
            .map(|(vals, &i)| vals[i])
            .collect();
        // advance, rightmost fastest
        let mut pos = self.dims.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.dims[pos].len() {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(vec)
    }
}

// ---------------------------------------------------------------------------
// per-input nondet tree walk
// ---------------------------------------------------------------------------

/// Summary of the depth-first walk of one input vector's nondet tree,
/// sufficient to replay sequential budget accounting after the fact.
struct InputOutcome {
    runs_used: u64,
    completed_runs: u64,
    infeasible_runs: u64,
    failure: Option<Failure>,
    fully_explored: bool,
    resource_hit: bool,
    path_hashes: HashSet<u64>,
}

struct Orders {
    ints: Vec<i64>,
    bools: Vec<i64>,
}

fn explore_input(
    ip: &InstrumentedProgram,
    main: &[i64],
    limits: &RunLimits,
    orders: &Orders,
    cap: u64,
    deadline: Option<Instant>,
) -> InputOutcome {
    let mut out = InputOutcome {
        runs_used: 0,
        completed_runs: 0,
        infeasible_runs: 0,
        failure: None,
        fully_explored: false,
        resource_hit: false,
        path_hashes: HashSet::new(),
    };
    let mut stack: Vec<Vec<i64>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if out.runs_used >= cap {
            return out; // truncated: not fully explored
        }
        if let Some(d) = deadline {
            if Instant::now() >= d {
                return out;
            }
        }
        let datum = TestDatum {
            main: main.to_vec(),
            nondet: prefix.clone(),
        };
        let r = run(ip, &datum, limits);
        out.runs_used += 1;
        match r.outcome {
            RunOutcome::NondetExhausted { ty } => {
                let order = match ty {
                    ScalarType::Int => &orders.ints,
                    ScalarType::Bool => &orders.bools,
                };
                for v in order.iter().rev() {
                    let mut child = prefix.clone();
                    child.push(*v);
                    stack.push(child);
                }
            }
            RunOutcome::Ok => {
                out.completed_runs += 1;
                out.path_hashes.insert(r.path_hash);
            }
            RunOutcome::AssumptionViolated { .. } => {
                out.completed_runs += 1;
                out.infeasible_runs += 1;
            }
            RunOutcome::CheckFailed { .. } | RunOutcome::RuntimeError { .. } => {
                out.completed_runs += 1;
                out.failure = Some(Failure {
                    datum: TestDatum {
                        main: main.to_vec(),
                        // Keep only the stream values the failing run
                        // actually consumed, so witnesses are minimal.
                        nondet: prefix[..r.nondet_used].to_vec(),
                    },
                    outcome: r.outcome,
                });
                return out;
            }
            RunOutcome::ResourceExhausted { .. } => {
                out.resource_hit = true;
            }
        }
    }
    out.fully_explored = true;
    out
}

// ---------------------------------------------------------------------------
// whole-space exploration
// ---------------------------------------------------------------------------

/// Inputs handled per scheduling round. Each round's inputs may run
/// concurrently; accounting is replayed sequentially afterwards.
const CHUNK: usize = 64;

/// Explores the instrumented program over the configured domains, in
/// parallel when the `parallel` feature is enabled.
pub fn explore(ip: &InstrumentedProgram, cfg: &SearchConfig) -> ExploreResult {
    explore_impl(ip, cfg, true)
}

/// Always-sequential exploration; the parallel [`explore`] must produce
/// bit-identical results.
pub fn explore_seq(ip: &InstrumentedProgram, cfg: &SearchConfig) -> ExploreResult {
    explore_impl(ip, cfg, false)
}

fn explore_impl(ip: &InstrumentedProgram, cfg: &SearchConfig, parallel: bool) -> ExploreResult {
    let orders = Orders {
        ints: int_order(cfg.nondet_domain, cfg.seed),
        bools: bool_order(cfg.seed),
    };
    let deadline = cfg
        .budget_ms
        .map(|ms| Instant::now() + std::time::Duration::from_millis(ms));

    let mut inputs = InputEnum::new(ip, cfg);
    let mut acc = ExploreResult {
        failure: None,
        runs: 0,
        completed_runs: 0,
        infeasible_runs: 0,
        distinct_paths: 0,
        inputs_explored: 0,
        complete: true,
    };
    let mut all_hashes: HashSet<u64> = HashSet::new();
    let mut remaining = cfg.max_runs;

    'outer: loop {
        let mut chunk: Vec<Vec<i64>> = Vec::with_capacity(CHUNK);
        while chunk.len() < CHUNK {
            match inputs.next() {
                Some(m) => chunk.push(m),
                None => break,
            }
        }
        if chunk.is_empty() {
            break;
        }
        if remaining == 0 {
            acc.complete = false;
            break;
        }
        let cap = remaining;
        let limits = &cfg.limits;
        let ords = &orders;
        let summaries: Vec<InputOutcome> = if parallel {
            par::map_ordered(chunk, |m| {
                explore_input(ip, &m, limits, ords, cap, deadline)
            })
        } else {
            chunk
                .into_iter()
                .map(|m| explore_input(ip, &m, limits, ords, cap, deadline))
                .collect()
        };

        for s in summaries {
            if s.failure.is_some() && s.runs_used <= remaining {
                acc.runs += s.runs_used;
                acc.completed_runs += s.completed_runs;
                acc.infeasible_runs += s.infeasible_runs;
                acc.failure = s.failure;
                acc.complete = false;
                break 'outer;
            }
            if s.fully_explored && s.runs_used <= remaining {
                remaining -= s.runs_used;
                acc.runs += s.runs_used;
                acc.completed_runs += s.completed_runs;
                acc.infeasible_runs += s.infeasible_runs;
                acc.inputs_explored += 1;
                if s.resource_hit {
                    acc.complete = false;
                }
                all_hashes.extend(s.path_hashes);
                continue;
            }
            // Truncation: the input needed more than the remaining budget
            // (or the wall clock fired). The sequential search would have
            // stopped mid-input after `remaining` runs.
            let consumed = s.runs_used.min(remaining);
            acc.runs += consumed;
            acc.complete = false;
            break 'outer;
        }
    }

    acc.distinct_paths = all_hashes.len() as u64;
    acc
}

// ---------------------------------------------------------------------------
// detectors
// ---------------------------------------------------------------------------

/// Non-compliance detection: search the fully checked variant.
pub fn ncd(program: &Program, cfg: &SearchConfig) -> Detection {
    let ip = translate_nc(program);
    Detection {
        explore: explore(&ip, cfg),
        variant: ip.variant,
    }
}

/// Global subcontract-weakness detection: search the variant with every
/// non-imbricated subcontract substituted.
pub fn gswd(program: &Program, cfg: &SearchConfig) -> Detection {
    let ip = translate_gsw(program);
    Detection {
        explore: explore(&ip, cfg),
        variant: ip.variant,
    }
}

/// Single subcontract-weakness detection: one bounded search per
/// non-imbricated subcontract, each substituting only that site. Every site
/// gets the full budget.
///
/// This detector never concludes *no*: even a completed search without a
/// failure only means no single substitution explains the proof failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SswdReport {
    pub per_site: Vec<(SubcontractRef, Detection)>,
}

impl SswdReport {
    /// Sites whose lone substitution produced a counter-example.
    pub fn blamed(&self) -> Vec<&SubcontractRef> {
        self.per_site
            .iter()
            .filter(|(_, d)| d.explore.failure.is_some())
            .map(|(site, _)| site)
            .collect()
    }

    /// True when every site's search completed (so an empty blame list is a
    /// definitive "no single site explains it", though still not a *no*).
    pub fn all_sites_complete(&self) -> bool {
        self.per_site
            .iter()
            .all(|(_, d)| d.explore.complete || d.explore.failure.is_some())
    }
}

pub fn sswd(program: &Program, cfg: &SearchConfig) -> SswdReport {
    let sites = crate::lang::subcontracts(program, &program.entry);
    let per_site = par::map_ordered(sites, |site| {
        let ip = translate_ssw(program, &site);
        let det = Detection {
            explore: explore(&ip, cfg),
            variant: ip.variant,
        };
        (site, det)
    });
    SswdReport { per_site }
}

/// Combined subcontract-weakness detection: single substitutions first; the
/// global substitution is consulted only when no single site is to blame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwdReport {
    pub sswd: SswdReport,
    /// `None` when the single-site pass already produced blame and the
    /// global variant was never searched.
    pub gswd: Option<Detection>,
}

pub fn swd(program: &Program, cfg: &SearchConfig) -> SwdReport {
    let sswd_report = sswd(program, cfg);
    if !sswd_report.blamed().is_empty() {
        return SwdReport {
            sswd: sswd_report,
            gswd: None,
        };
    }
    let gswd_report = gswd(program, cfg);
    SwdReport {
        sswd: sswd_report,
        gswd: Some(gswd_report),
    }
}

// ---------------------------------------------------------------------------
// file configuration
// ---------------------------------------------------------------------------

/// On-disk search configuration (TOML). All fields optional; unknown fields
/// are rejected.
///
/// ```toml
/// seed = 7
/// [domain]
/// min = -4
/// max = 4
/// [budget]
/// paths = 50000
/// ms = 2000
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub domain: Option<FileDomain>,
    pub budget: Option<FileBudget>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDomain {
    pub min: i64,
    pub max: i64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileBudget {
    pub paths: Option<u64>,
    pub ms: Option<u64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Applies the file settings onto a config (file beats defaults; callers
    /// apply command-line flags afterwards so flags beat the file).
    pub fn apply(&self, cfg: &mut SearchConfig) {
        if let Some(d) = &self.domain {
            cfg.input_domain = Domain::new(d.min, d.max);
            cfg.nondet_domain = Domain::new(d.min, d.max);
        }
        if let Some(b) = &self.budget {
            if let Some(p) = b.paths {
                cfg.max_runs = p;
            }
            if b.ms.is_some() {
                cfg.budget_ms = b.ms;
            }
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}
