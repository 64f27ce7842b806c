//! Covering and extension families for arbitrary integer weights.
//!
//! Elements are bucketed into geometric weight classes `U_i = {u : γ^i <=
//! w(u) < γ^{i+1}}` with `γ = 1 + δ/2`. Each class gets a uniform-weight
//! family; for every nonempty class `k` the output contains the product of
//! the families of the classes in the window `[k - d, k]`, each member
//! joined with the cheap prefix `W_k` of all classes below the window.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::bounds::{self, BoundParams};
use crate::error::{Error, Result};
use crate::families::{
    self, build_unweighted_covering, build_unweighted_extension, CoveringFamily, ExtensionEntry, ExtensionFamily,
    Verdict,
};
use crate::limits::Limits;
use crate::subset::{Subset, MAX_UNIVERSE};

/// Largest number of product entries a weighted family may materialize.
pub const MAX_FAMILY_ENTRIES: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightClassPartition {
    pub gamma: f64,
    pub delta: f64,
    pub n: usize,
    /// Window width `⌈(2/δ)·log₂(2n/δ)⌉`, raised if rounding left `γ^d < 2n/δ`.
    pub d: u32,
    /// Class index of every element.
    pub class_of: Vec<u32>,
    /// Members of each nonempty class, in increasing element order.
    pub classes: BTreeMap<u32, Vec<usize>>,
    /// Sorted indices of the nonempty classes.
    pub index_set: Vec<u32>,
}

impl WeightClassPartition {
    pub fn members(&self, class: u32) -> Subset {
        Subset::from_elems(self.classes.get(&class).into_iter().flatten().copied())
    }

    /// Classes of the window ending at `k`.
    pub fn window(&self, k: u32) -> impl Iterator<Item = u32> + '_ {
        let lo = k.saturating_sub(self.d);
        self.index_set.iter().copied().filter(move |&i| lo <= i && i <= k)
    }

    /// Union of the classes strictly below the window ending at `k`.
    pub fn prefix(&self, k: u32) -> Subset {
        let below = |i: u32| (i as i64) < k as i64 - self.d as i64;
        self.index_set
            .iter()
            .filter(|&&i| below(i))
            .fold(Subset::EMPTY, |acc, &i| acc.union(self.members(i)))
    }
}

fn class_index(w: u64, gamma: f64) -> u32 {
    let w = w as f64;
    let mut i = (w.ln() / gamma.ln()).floor().max(0.0) as i32;
    while i > 0 && gamma.powi(i) > w {
        i -= 1;
    }
    while gamma.powi(i + 1) <= w {
        i += 1;
    }
    i as u32
}

pub fn partition_by_weight(weights: &[u64], delta: f64) -> Result<WeightClassPartition> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if let Some(i) = weights.iter().position(|&w| w == 0) {
        return Err(Error::domain(format!("weights must be >= 1 (element {i} has weight 0)")));
    }
    let n = weights.len();
    let gamma = 1.0 + delta / 2.0;
    let class_of: Vec<u32> = weights.iter().map(|&w| class_index(w, gamma)).collect();
    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (u, &i) in class_of.iter().enumerate() {
        classes.entry(i).or_default().push(u);
    }
    let index_set = classes.keys().copied().collect();
    let d = if n == 0 {
        0
    } else {
        let target = 2.0 * n as f64 / delta;
        let mut d = ((2.0 / delta) * target.log2()).ceil() as u32;
        while gamma.powi(d as i32) < target {
            d += 1;
        }
        d
    };
    Ok(WeightClassPartition { gamma, delta, n, d, class_of, classes, index_set })
}

/// Lazy product of per-class entry lists, each unioned with a fixed prefix
/// and with budgets summed.
pub struct BlockProduct<'a> {
    prefix: Subset,
    factors: Vec<&'a [ExtensionEntry]>,
    odometer: Vec<usize>,
    done: bool,
}

impl<'a> BlockProduct<'a> {
    /// Number of entries the product yields.
    pub fn size(&self) -> u128 {
        self.factors.iter().map(|f| f.len() as u128).product()
    }
}

impl Iterator for BlockProduct<'_> {
    type Item = ExtensionEntry;

    fn next(&mut self) -> Option<ExtensionEntry> {
        if self.done {
            return None;
        }
        let mut set = self.prefix;
        let mut budget = 0;
        for (f, &j) in self.factors.iter().zip(&self.odometer) {
            set = set.union(f[j].set);
            budget += f[j].budget;
        }
        // advance, last factor fastest
        self.done = true;
        for pos in (0..self.factors.len()).rev() {
            self.odometer[pos] += 1;
            if self.odometer[pos] < self.factors[pos].len() {
                self.done = false;
                break;
            }
            self.odometer[pos] = 0;
        }
        Some(ExtensionEntry { set, budget })
    }
}

/// The block `𝒬_k`: every combination of one entry per class in the window
/// ending at `k`, joined with `W_k`. `per_class` holds entries already
/// lifted to global element indices. Covering families use budget 0.
pub fn combine_blocks<'a>(
    partition: &WeightClassPartition,
    per_class: &'a BTreeMap<u32, Vec<ExtensionEntry>>,
    k: u32,
) -> BlockProduct<'a> {
    let factors: Vec<&[ExtensionEntry]> = partition
        .window(k)
        .map(|i| per_class.get(&i).map_or(&[][..], |v| v.as_slice()))
        .collect();
    let done = factors.iter().any(|f| f.is_empty());
    BlockProduct { prefix: partition.prefix(k), odometer: vec![0; factors.len()], factors, done }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoveringMode {
    /// Inner target `α - 1/log₂ n`, falling back to `Fixed` for small `n`.
    Schedule,
    /// `δ = (α-1)/(α+1)`, inner target `(α+1)/2`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub mode: String,
    pub delta: f64,
    /// The inner approximation target handed to the uniform constructions.
    pub inner_target: f64,
    pub gamma: f64,
    pub d: u32,
    /// `(class index, class size, class family size)`.
    pub class_families: Vec<(u32, usize, usize)>,
}

impl Schedule {
    pub fn dump_comment(&self) -> String {
        format!(
            "schedule mode={} delta={} inner={} d={} gamma={}",
            self.mode, self.delta, self.inner_target, self.d, self.gamma
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedFamilyReport<F> {
    pub family: F,
    pub schedule: Schedule,
    /// `ln` of the c-cost (extension families only).
    pub cost_log: Option<f64>,
    /// Exhaustive verdict, when `n` is within the family cap.
    pub verdict: Option<Verdict>,
}

fn check_weights(weights: &[u64]) -> Result<()> {
    if weights.len() > MAX_UNIVERSE {
        return Err(Error::domain(format!("at most {MAX_UNIVERSE} elements are supported, got {}", weights.len())));
    }
    if let Some(i) = weights.iter().position(|&w| w == 0) {
        return Err(Error::domain(format!("weights must be >= 1 (element {i} has weight 0)")));
    }
    Ok(())
}

/// `(δ, inner target, mode used)` with `(1 + δ)·inner = α`.
pub fn covering_split(n: usize, alpha: f64, mode: CoveringMode) -> (f64, f64, CoveringMode) {
    if mode == CoveringMode::Schedule && n >= 2 {
        let inner = alpha - 1.0 / (n as f64).log2();
        let delta = alpha / inner - 1.0;
        if inner > 1.0 && delta > 0.0 && delta < 1.0 {
            return (delta, inner, CoveringMode::Schedule);
        }
    }
    let delta = (alpha - 1.0) / (alpha + 1.0);
    (delta, (alpha + 1.0) / 2.0, CoveringMode::Fixed)
}

fn lift(entries: &[ExtensionEntry], members: &[usize]) -> Vec<ExtensionEntry> {
    entries.iter().map(|e| ExtensionEntry { set: e.set.remap(members), budget: e.budget }).collect()
}

fn assemble(
    partition: &WeightClassPartition,
    per_class: &BTreeMap<u32, Vec<ExtensionEntry>>,
) -> Result<Vec<ExtensionEntry>> {
    let blocks: Vec<BlockProduct> = partition.index_set.iter().map(|&k| combine_blocks(partition, per_class, k)).collect();
    let total: u128 = blocks.iter().map(BlockProduct::size).sum();
    if total > MAX_FAMILY_ENTRIES {
        return Err(Error::FamilyTooLarge { size: total, cap: MAX_FAMILY_ENTRIES });
    }
    Ok(blocks.into_iter().flatten().collect())
}

/// Builds the per-class uniform families, sharing work between classes of
/// equal size.
fn per_class_families<F>(partition: &WeightClassPartition, mut build: F) -> Result<BTreeMap<u32, Vec<ExtensionEntry>>>
where
    F: FnMut(usize) -> Result<Vec<ExtensionEntry>>,
{
    let mut by_size: HashMap<usize, Vec<ExtensionEntry>> = HashMap::new();
    let mut out = BTreeMap::new();
    for (&i, members) in &partition.classes {
        let n_i = members.len();
        if let std::collections::hash_map::Entry::Vacant(e) = by_size.entry(n_i) {
            e.insert(build(n_i)?);
        }
        out.insert(i, lift(&by_size[&n_i], members));
    }
    Ok(out)
}

/// An α-covering family of `(U, w)`.
pub fn build_weighted_covering(
    weights: &[u64],
    alpha: f64,
    mode: CoveringMode,
    limits: &Limits,
) -> Result<WeightedFamilyReport<CoveringFamily>> {
    covering_impl(weights, alpha, mode, limits, true)
}

pub(crate) fn covering_impl(
    weights: &[u64],
    alpha: f64,
    mode: CoveringMode,
    limits: &Limits,
    verify: bool,
) -> Result<WeightedFamilyReport<CoveringFamily>> {
    check_weights(weights)?;
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::domain(format!("covering alpha must be > 1, got {alpha}")));
    }
    let n = weights.len();
    let (delta, inner, used) = covering_split(n, alpha, mode);
    let partition = partition_by_weight(weights, delta)?;
    let per_class = per_class_families(&partition, |n_i| {
        let f = build_unweighted_covering(n_i, inner, limits)?;
        Ok(f.sets.into_iter().map(|s| ExtensionEntry::new(s, 0)).collect())
    })?;
    let mut family = CoveringFamily::new(n, alpha);
    family.sets = if n == 0 {
        vec![Subset::EMPTY]
    } else {
        assemble(&partition, &per_class)?.into_iter().map(|e| e.set).collect()
    };
    family.dedup();
    let verdict = if verify && n <= limits.family_cap {
        Some(families::verify_covering(&family, weights, limits)?)
    } else {
        None
    };
    let schedule = Schedule {
        mode: format!("{used:?}").to_lowercase(),
        delta,
        inner_target: inner,
        gamma: partition.gamma,
        d: partition.d,
        class_families: per_class.iter().map(|(&i, f)| (i, partition.classes[&i].len(), f.len())).collect(),
    };
    Ok(WeightedFamilyReport { family, schedule, cost_log: None, verdict })
}

const ZETA_PROBES: u32 = 40;

/// Inner target `ζ' ∈ (1, β)` with `amls(α, c, ζ') <= amls(α, c, β) + ε/2`,
/// probing `β - (β-1)/2^j` for `j = 1, 2, ..` and keeping the first (the
/// smallest) probe that qualifies. Falls back to `(1 + β)/2`.
pub fn select_inner_target(alpha: f64, c: f64, beta: f64, eps: f64) -> Result<f64> {
    let precision = (eps / 8.0).min(1e-6);
    let base = bounds::amls_bound(BoundParams::new(alpha, c, beta).with_precision(precision))?;
    let target = base.value + eps / 2.0;
    for j in 1..=ZETA_PROBES {
        let zeta = beta - (beta - 1.0) / 2f64.powi(j as i32);
        if zeta <= 1.0 || zeta >= beta {
            break;
        }
        let sp = bounds::amls_bound(BoundParams::new(alpha, c, zeta).with_precision(precision))?;
        if sp.value + sp.err_bound + base.err_bound <= target {
            return Ok(zeta);
        }
    }
    Ok((1.0 + beta) / 2.0)
}

/// An (α, β)-extension family of `(U, w)` whose c-cost tracks
/// `amls(α, c, β) + ε`.
pub fn build_weighted_extension(
    weights: &[u64],
    alpha: f64,
    c: f64,
    beta: f64,
    eps: f64,
    limits: &Limits,
) -> Result<WeightedFamilyReport<ExtensionFamily>> {
    extension_impl(weights, alpha, c, beta, eps, limits, true)
}

pub(crate) fn extension_impl(
    weights: &[u64],
    alpha: f64,
    c: f64,
    beta: f64,
    eps: f64,
    limits: &Limits,
    verify: bool,
) -> Result<WeightedFamilyReport<ExtensionFamily>> {
    check_weights(weights)?;
    if !alpha.is_finite() || alpha < 1.0 || !c.is_finite() || c < 1.0 {
        return Err(Error::domain(format!("alpha and c must be >= 1, got ({alpha}, {c})")));
    }
    if !beta.is_finite() || beta <= 1.0 {
        return Err(Error::domain(format!("beta must be > 1, got {beta}")));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let n = weights.len();
    let zeta = select_inner_target(alpha, c, beta, eps)?;
    let delta = beta / zeta - 1.0;
    let partition = partition_by_weight(weights, delta)?;
    let per_class = per_class_families(&partition, |n_i| {
        Ok(build_unweighted_extension(n_i, alpha, c, zeta, limits)?.entries)
    })?;
    let mut family = ExtensionFamily::new(n, alpha, beta);
    family.entries = if n == 0 {
        vec![ExtensionEntry::new(Subset::EMPTY, 0)]
    } else {
        assemble(&partition, &per_class)?
    };
    family.dedup();
    let verdict = if verify && n <= limits.family_cap {
        Some(families::verify_extension(&family, weights, limits)?)
    } else {
        None
    };
    let cost_log = Some(families::family_cost(&family, c));
    let schedule = Schedule {
        mode: "extension".into(),
        delta,
        inner_target: zeta,
        gamma: partition.gamma,
        d: partition.d,
        class_families: per_class.iter().map(|(&i, f)| (i, partition.classes[&i].len(), f.len())).collect(),
    };
    Ok(WeightedFamilyReport { family, schedule, cost_log, verdict })
}

/// Per-class uniform extension families lifted to global indices, for
/// callers that want to stream blocks through [`combine_blocks`].
pub fn extension_class_families(
    partition: &WeightClassPartition,
    alpha: f64,
    c: f64,
    inner_beta: f64,
    limits: &Limits,
) -> Result<BTreeMap<u32, Vec<ExtensionEntry>>> {
    per_class_families(partition, |n_i| Ok(build_unweighted_extension(n_i, alpha, c, inner_beta, limits)?.entries))
}
