//! The membership-model and extension-model approximation drivers.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{CoveringFamily, ExtensionFamily};
use crate::limits::Limits;
use crate::oracles::{ExtensionOracle, QueryLedger};
use crate::par;
use crate::problems::{exact_opt, SetSystem};
use crate::subset::Subset;
use crate::weighted::{covering_impl, extension_impl, CoveringMode};

/// Relative slack when comparing an achieved ratio with its target.
pub const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembershipMode {
    /// Weighted covering family with the `α - 1/log₂ n` inner target.
    Schedule,
    /// Weighted covering family with a fixed split of `α`.
    Fixed,
    /// The power set; returns an exact optimum.
    Exhaustive,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub problem: String,
    pub model: &'static str,
    pub oracle: Option<String>,
    pub n: usize,
    pub alpha: f64,
    pub c: f64,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub output_set: Subset,
    pub output_weight: u64,
    pub opt_weight: Option<u64>,
    pub achieved_ratio: Option<f64>,
    pub family_size: usize,
    pub ledger: QueryLedger,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    problem: &'a str,
    model: &'a str,
    oracle: Option<&'a str>,
    n: usize,
    alpha: f64,
    c: f64,
    beta: Option<f64>,
    eps: Option<f64>,
    output_set: Vec<usize>,
    output_weight: u64,
    opt_weight: Option<u64>,
    ratio: Option<f64>,
    family_size: usize,
    queries: usize,
    cost_log: f64,
    seed: Option<u64>,
}

impl RunReport {
    /// The factor the output is guaranteed to meet: `β` for extension runs,
    /// `α` for membership runs.
    pub fn target_factor(&self) -> f64 {
        self.beta.unwrap_or(self.alpha)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    /// Copies the optimum and ratio from a verification.
    pub fn attach(&mut self, verdict: &RunVerdict) {
        self.opt_weight = verdict.opt_weight;
        self.achieved_ratio = verdict.achieved_ratio;
    }

    /// The report as pretty JSON. Wall time is left out so that reruns
    /// serialize identically.
    pub fn to_json(&self) -> String {
        let json = ReportJson {
            problem: &self.problem,
            model: self.model,
            oracle: self.oracle.as_deref(),
            n: self.n,
            alpha: self.alpha,
            c: self.c,
            beta: self.beta,
            eps: self.eps,
            output_set: self.output_set.iter().map(|v| v + 1).collect(),
            output_weight: self.output_weight,
            opt_weight: self.opt_weight,
            ratio: self.achieved_ratio,
            family_size: self.family_size,
            queries: self.ledger.len(),
            cost_log: self.ledger.cost_log(),
            seed: self.seed,
        };
        serde_json::to_string_pretty(&json).expect("report fields are finite")
    }
}

type Key = (u64, usize, u64);

fn key(s: Subset, weights: &[u64]) -> Key {
    (s.weight(weights), s.len(), s.bits())
}

fn membership_family<P: SetSystem + ?Sized>(
    system: &P,
    alpha: f64,
    mode: MembershipMode,
    limits: &Limits,
) -> Result<CoveringFamily> {
    match mode {
        MembershipMode::Exhaustive => {
            limits.check_family("power-set family", system.universe_size())?;
            Ok(CoveringFamily::power_set(system.universe_size()))
        }
        MembershipMode::Schedule => Ok(covering_impl(system.weights(), alpha, CoveringMode::Schedule, limits, false)?.family),
        MembershipMode::Fixed => Ok(covering_impl(system.weights(), alpha, CoveringMode::Fixed, limits, false)?.family),
    }
}

/// Evaluates membership on every set of an α-covering family and returns
/// the lightest solution among them.
pub fn approximate_membership<P: SetSystem + ?Sized>(
    system: &P,
    alpha: f64,
    mode: MembershipMode,
    limits: &Limits,
) -> Result<RunReport> {
    let start = Instant::now();
    let family = membership_family(system, alpha, mode, limits)?;
    let weights = system.weights();
    let keys = par::map(&family.sets, |&s| system.is_solution(s).then(|| key(s, weights)));
    let (_, _, bits) = keys
        .into_iter()
        .flatten()
        .min()
        .ok_or_else(|| Error::Internal("covering family contains no solution".into()))?;
    let mut ledger = QueryLedger::new(1.0);
    for s in &family.sets {
        ledger.record(s.len(), 0);
    }
    ledger.wall_time = start.elapsed();
    let out = Subset(bits);
    Ok(RunReport {
        problem: system.problem().into(),
        model: "membership",
        oracle: None,
        n: system.universe_size(),
        alpha: if mode == MembershipMode::Exhaustive { 1.0 } else { alpha },
        c: 1.0,
        beta: None,
        eps: None,
        seed: None,
        output_set: out,
        output_weight: out.weight(weights),
        opt_weight: None,
        achieved_ratio: None,
        family_size: family.len(),
        ledger,
    })
}

/// Queries the oracle once per entry `(T, ℓ)` of a weighted extension
/// family and returns the lightest `T ∪ X`.
///
/// Every entry is queried, so the ledger cost equals the family cost.
/// A completion that fails the membership check aborts the run.
pub fn approximate_extension<P, O>(system: &P, oracle: &O, beta: f64, eps: f64, limits: &Limits) -> Result<RunReport>
where
    P: SetSystem + ?Sized,
    O: ExtensionOracle + ?Sized,
{
    let start = Instant::now();
    let (alpha, c) = (oracle.declared_alpha(), oracle.declared_c());
    let family: ExtensionFamily = extension_impl(system.weights(), alpha, c, beta, eps, limits, false)?.family;
    let weights = system.weights();
    let results = par::map(&family.entries, |e| {
        let x = oracle.extend(e.set, e.budget);
        let t = e.set.union(x);
        (system.is_solution(t), key(t, weights))
    });
    if let Some(i) = results.iter().position(|r| !r.0) {
        let e = family.entries[i];
        return Err(Error::Internal(format!(
            "oracle {} returned an infeasible completion for T = {:?}, budget {}",
            oracle.name(),
            e.set,
            e.budget
        )));
    }
    let (_, _, bits) = results
        .into_iter()
        .map(|r| r.1)
        .min()
        .ok_or_else(|| Error::Internal("extension family is empty".into()))?;
    let mut ledger = QueryLedger::new(c);
    for e in &family.entries {
        ledger.record(e.set.len(), e.budget);
    }
    ledger.wall_time = start.elapsed();
    let out = Subset(bits);
    Ok(RunReport {
        problem: system.problem().into(),
        model: "extension",
        oracle: Some(oracle.name().into()),
        n: system.universe_size(),
        alpha,
        c,
        beta: Some(beta),
        eps: Some(eps),
        seed: None,
        output_set: out,
        output_weight: out.weight(weights),
        opt_weight: None,
        achieved_ratio: None,
        family_size: family.len(),
        ledger,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunVerdict {
    pub passed: bool,
    pub reason: Option<String>,
    pub opt_weight: Option<u64>,
    pub achieved_ratio: Option<f64>,
}

/// Checks membership of the reported set and, within the exact cap, its
/// ratio against a fresh optimum.
pub fn verify_run<P: SetSystem + ?Sized>(
    system: &P,
    report: &RunReport,
    target: f64,
    limits: &Limits,
) -> Result<RunVerdict> {
    let fail = |reason: &str, opt, ratio| RunVerdict {
        passed: false,
        reason: Some(reason.into()),
        opt_weight: opt,
        achieved_ratio: ratio,
    };
    if !system.is_solution(report.output_set) {
        return Ok(fail("not a solution", None, None));
    }
    if system.universe_size() > limits.exact_cap {
        return Ok(RunVerdict { passed: true, reason: None, opt_weight: None, achieved_ratio: None });
    }
    let (_, opt) = exact_opt(system, limits)?;
    let w = report.output_weight;
    let ratio = match (w, opt) {
        (0, _) => Some(1.0),
        (_, 0) => None,
        _ => Some(w as f64 / opt as f64),
    };
    if w as f64 > target * opt as f64 * (1.0 + RATIO_TOL) {
        return Ok(fail("ratio exceeded", Some(opt), ratio));
    }
    Ok(RunVerdict { passed: true, reason: None, opt_weight: Some(opt), achieved_ratio: ratio })
}
