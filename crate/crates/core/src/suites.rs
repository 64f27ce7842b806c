//! Self-check suites run by `wamls verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{amls_bound, brute_bound, BoundParams};
use crate::driver::{approximate_extension, verify_run};
use crate::error::{Error, Result};
use crate::families::Verdict;
use crate::limits::Limits;
use crate::oracles::{
    BranchingHsOracle, BranchingVcOracle, ExactOracle, ExtensionOracle, LocalRatioFvs, LocalRatioHs, LocalRatioVc,
};
use crate::problems::{random_instance, Instance, ProblemKind, RandomSpec, SetSystem};
use crate::subset::Subset;
use crate::table::Preset;
use crate::weighted::{build_weighted_covering, build_weighted_extension, CoveringMode};

/// Published three-decimal values for the `(α = 1, c)` row of each preset,
/// with the `brute` row where one is listed.
pub const REFERENCE: &[(Preset, f64, f64, [f64; 9])] = &[
    (Preset::Vc, 1.0, 1.363, [1.158, 1.123, 1.103, 1.089, 1.078, 1.07, 1.064, 1.058, 1.054]),
    (Preset::Vc, 2.0, 1.0, [1.659, 1.485, 1.366, 1.277, 1.208, 1.151, 1.104, 1.064, 1.03]),
    (Preset::Fvs, 1.0, 3.618, [1.489, 1.39, 1.327, 1.283, 1.25, 1.225, 1.204, 1.187, 1.172]),
    (Preset::Tfvs, 1.0, 2.0, [1.251, 1.181, 1.143, 1.119, 1.102, 1.089, 1.079, 1.071, 1.065]),
    (Preset::Tfvs, 3.0, 1.0, [1.566, 1.393, 1.286, 1.211, 1.155, 1.111, 1.076, 1.047, 1.022]),
    (Preset::Hs3, 1.0, 2.168, [1.274, 1.197, 1.156, 1.13, 1.111, 1.097, 1.086, 1.078, 1.071]),
    (Preset::Hs4, 1.0, 3.168, [1.305, 1.209, 1.16, 1.13, 1.11, 1.095, 1.084, 1.075, 1.068]),
    (Preset::Hs4, 4.0, 1.0, [1.489, 1.325, 1.231, 1.168, 1.122, 1.087, 1.059, 1.036, 1.017]),
    (Preset::Hs5, 1.0, 4.168, [1.302, 1.199, 1.149, 1.12, 1.1, 1.086, 1.076, 1.067, 1.061]),
    (Preset::Hs5, 5.0, 1.0, [1.43, 1.276, 1.193, 1.139, 1.101, 1.072, 1.048, 1.03, 1.014]),
];

/// Published `brute(β)` rows keyed by preset columns.
pub const REFERENCE_BRUTE: &[(Preset, [f64; 9])] = &[
    (Preset::Vc, [1.716, 1.583, 1.496, 1.433, 1.385, 1.347, 1.317, 1.291, 1.269]),
    (Preset::Tfvs, [1.583, 1.433, 1.347, 1.291, 1.25, 1.22, 1.196, 1.177, 1.162]),
    (Preset::Hs4, [1.496, 1.347, 1.269, 1.22, 1.186, 1.162, 1.143, 1.128, 1.116]),
    (Preset::Hs5, [1.433, 1.291, 1.22, 1.177, 1.149, 1.128, 1.112, 1.1, 1.09]),
];

pub const REFERENCE_TOL: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bounds,
    Families,
    Oracles,
    EndToEnd,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bounds" => Some(Suite::Bounds),
            "families" => Some(Suite::Families),
            "oracles" => Some(Suite::Oracles),
            "end-to-end" => Some(Suite::EndToEnd),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub max_n: usize,
    pub trials: usize,
    pub seed: u64,
    pub limits: Limits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { max_n: 10, trials: 20, seed: 0, limits: Limits::default() }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub failures: usize,
    pub messages: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { suite: name.into(), ..Default::default() }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            self.messages.push(msg());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn run(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::Bounds => vec![bounds_suite()?],
        Suite::Families => vec![families_suite(cfg)?],
        Suite::Oracles => vec![oracles_suite(cfg)?],
        Suite::EndToEnd => vec![end_to_end_suite(cfg)?],
        Suite::All => vec![bounds_suite()?, families_suite(cfg)?, oracles_suite(cfg)?, end_to_end_suite(cfg)?],
    })
}

pub fn bounds_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("bounds");
    for &(preset, alpha, c, expected) in REFERENCE {
        for (beta, want) in preset.betas().into_iter().zip(expected) {
            let got = amls_bound(BoundParams::new(alpha, c, beta))?.value;
            rep.check((got - want).abs() <= REFERENCE_TOL, || {
                format!("amls({alpha}, {c}, {beta}) = {got:.6}, expected {want}")
            });
        }
    }
    for &(preset, expected) in REFERENCE_BRUTE {
        for (beta, want) in preset.betas().into_iter().zip(expected) {
            let got = brute_bound(beta)?;
            rep.check((got - want).abs() <= REFERENCE_TOL, || format!("brute({beta}) = {got:.6}, expected {want}"));
        }
    }
    for (alpha, want) in [(1.0, 2.0), (2.0, 1.25)] {
        let got = brute_bound(alpha)?;
        rep.check((got - want).abs() <= 1e-9, || format!("brute({alpha}) = {got}, expected {want}"));
    }
    Ok(rep)
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(1..=100)).collect()
}

fn verdict_msg(v: &Verdict) -> String {
    match v {
        Verdict::Pass => "pass".into(),
        Verdict::Fail { witness } => format!("fail, witness {witness:?}"),
    }
}

pub fn families_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("families");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_n = cfg.max_n.min(cfg.limits.family_cap);
    for t in 0..cfg.trials {
        let n = 1 + t % max_n.max(1);
        let w = random_weights(&mut rng, n);
        for alpha in [1.5, 2.0, 3.0] {
            let r = build_weighted_covering(&w, alpha, CoveringMode::Schedule, &cfg.limits)?;
            let v = r.verdict.ok_or_else(|| Error::Internal("covering family was not verified".into()))?;
            rep.check(v.is_pass(), || format!("covering n={n} alpha={alpha} w={w:?}: {}", verdict_msg(&v)));
        }
        for (alpha, beta, c) in [(1.0, 1.3, 2.0), (2.0, 1.7, 1.0), (1.0, 2.0, 1.0), (2.0, 2.0, 2.0)] {
            let r = build_weighted_extension(&w, alpha, c, beta, 0.05, &cfg.limits)?;
            let v = r.verdict.ok_or_else(|| Error::Internal("extension family was not verified".into()))?;
            rep.check(v.is_pass(), || {
                format!("extension n={n} alpha={alpha} beta={beta} c={c} w={w:?}: {}", verdict_msg(&v))
            });
        }
    }
    Ok(rep)
}

fn spec_for(kind: ProblemKind, n: usize, seed: u64) -> RandomSpec {
    RandomSpec::new(kind, n, 0.3, (1, 100), seed)
}

/// The implemented oracles for an instance, including the exhaustive one.
pub fn oracles_for<'a>(inst: &'a Instance, limits: &Limits) -> Result<Vec<Box<dyn ExtensionOracle + 'a>>> {
    let mut out: Vec<Box<dyn ExtensionOracle + 'a>> = vec![Box::new(ExactOracle::new(inst, limits)?)];
    match inst {
        Instance::Vc(i) => {
            out.push(Box::new(BranchingVcOracle::new(i)));
            out.push(Box::new(LocalRatioVc::new(i)));
        }
        Instance::Hs(i) => {
            out.push(Box::new(BranchingHsOracle::new(i)));
            out.push(Box::new(LocalRatioHs::new(i)));
        }
        Instance::Fvs(i) => out.push(Box::new(LocalRatioFvs::new(i))),
        Instance::Pvc(_) => {}
    }
    Ok(out)
}

pub fn oracles_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("oracles");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6f72);
    let max_n = cfg.max_n.min(cfg.limits.exact_cap).max(1);
    for t in 0..cfg.trials {
        let kind = [ProblemKind::Wvc, ProblemKind::Whs, ProblemKind::Wfvs][t % 3];
        let n = rng.gen_range(1..=max_n);
        let inst = random_instance(&spec_for(kind, n, rng.gen()))?;
        let exact = ExactOracle::new(&inst, &cfg.limits)?;
        for o in oracles_for(&inst, &cfg.limits)? {
            for _ in 0..10 {
                let s = Subset(rng.gen()).intersection(Subset::full(n));
                let ell = rng.gen_range(0..=n as u32);
                let x = o.extend(s, ell);
                rep.check(inst.is_solution(s.union(x)), || format!("{} infeasible on S={s:?}, l={ell}", o.name()));
                if let Some(opt) = exact.restricted_opt(s, ell) {
                    let (wx, wo) = (inst.weight(x) as f64, inst.weight(opt) as f64);
                    rep.check(wx <= o.declared_alpha() * wo + 1e-9, || {
                        format!("{} weight {wx} above {} x {wo} on S={s:?}, l={ell}", o.name(), o.declared_alpha())
                    });
                }
            }
        }
    }
    Ok(rep)
}

pub fn end_to_end_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("end-to-end");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6532);
    let max_n = cfg.max_n.min(cfg.limits.exact_cap).max(1);
    for t in 0..cfg.trials {
        let kind = [ProblemKind::Wvc, ProblemKind::Whs, ProblemKind::Wfvs][t % 3];
        let n = rng.gen_range(1..=max_n);
        let inst = random_instance(&spec_for(kind, n, rng.gen()))?;
        let beta = [1.2, 1.5, 1.9][t / 3 % 3];
        for o in oracles_for(&inst, &cfg.limits)? {
            let report = approximate_extension(&inst, o.as_ref(), beta, 0.05, &cfg.limits)?;
            let v = verify_run(&inst, &report, beta, &cfg.limits)?;
            rep.check(v.passed, || {
                format!(
                    "{} {} n={n} beta={beta}: {}",
                    inst.problem(),
                    o.name(),
                    v.reason.clone().unwrap_or_default()
                )
            });
        }
    }
    Ok(rep)
}
