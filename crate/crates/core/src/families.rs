//! Covering and extension families over small universes: layered greedy
//! constructions for uniform weights, exhaustive verifiers for arbitrary
//! weights, c-cost accounting and a line-oriented dump format.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::cost;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::par;
use crate::subset::{k_subsets, Subset};

/// Relative slack on the right-hand side of the weight inequalities.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Slack when rounding `β·s` and `(β·s - t)/α` down to integers.
const FLOOR_EPS: f64 = 1e-12;

pub(crate) fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + WEIGHT_TOL * rhs.abs().max(1.0)
}

fn floor_slack(x: f64) -> i64 {
    (x + FLOOR_EPS).floor() as i64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringFamily {
    pub universe_size: usize,
    pub alpha: f64,
    pub sets: Vec<Subset>,
}

impl CoveringFamily {
    pub fn new(universe_size: usize, alpha: f64) -> Self {
        CoveringFamily { universe_size, alpha, sets: Vec::new() }
    }

    /// Every subset of the universe; the degenerate exact family.
    pub fn power_set(universe_size: usize) -> Self {
        let sets = (0..1u64 << universe_size).map(Subset).collect();
        CoveringFamily { universe_size, alpha: 1.0, sets }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Drops repeated sets, keeping first occurrences in order.
    pub fn dedup(&mut self) {
        let mut seen = HashSet::with_capacity(self.sets.len());
        self.sets.retain(|s| seen.insert(*s));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtensionEntry {
    pub set: Subset,
    pub budget: u32,
}

impl ExtensionEntry {
    pub fn new(set: Subset, budget: u32) -> Self {
        ExtensionEntry { set, budget }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionFamily {
    pub universe_size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub entries: Vec<ExtensionEntry>,
}

impl ExtensionFamily {
    pub fn new(universe_size: usize, alpha: f64, beta: f64) -> Self {
        ExtensionFamily { universe_size, alpha, beta, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops repeated `(T, ℓ)` pairs. Entries that share `T` with different
    /// budgets are both kept.
    pub fn dedup(&mut self) {
        let mut seen = HashSet::with_capacity(self.entries.len());
        self.entries.retain(|e| seen.insert(*e));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    /// The numerically least subset that has no witness.
    Fail { witness: Subset },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Greedily covers every `s`-subset `S` of `{0..n-1}` by `t`-subsets `T`
/// with `|S ∩ T| >= need`. Ties go to the numerically smallest `T`.
/// Returns `None` if some `S` cannot be covered.
fn greedy_layer(n: usize, s: usize, t: usize, need: usize) -> Option<Vec<Subset>> {
    let candidates: Vec<Subset> = k_subsets(n, t).collect();
    if need == 0 {
        return candidates.first().map(|&c| vec![c]);
    }
    let targets: Vec<Subset> = k_subsets(n, s).collect();
    let mut uncovered = vec![true; targets.len()];
    let mut remaining = targets.len();
    let covers = |t: Subset, s: Subset| t.intersection(s).len() >= need;

    let initial = par::map(&candidates, |&cand| targets.iter().filter(|&&s| covers(cand, s)).count());
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = initial
        .into_iter()
        .enumerate()
        .filter(|&(_, g)| g > 0)
        .map(|(i, g)| (g, Reverse(i)))
        .collect();

    let mut picked = Vec::new();
    while remaining > 0 {
        let (stale, Reverse(idx)) = heap.pop()?;
        let cand = candidates[idx];
        let gain = targets
            .iter()
            .zip(&uncovered)
            .filter(|&(&s, &u)| u && covers(cand, s))
            .count();
        if gain == stale {
            for (s, u) in targets.iter().zip(uncovered.iter_mut()) {
                if *u && covers(cand, *s) {
                    *u = false;
                }
            }
            remaining -= gain;
            picked.push(cand);
        } else if gain > 0 {
            heap.push((gain, Reverse(idx)));
        }
    }
    Some(picked)
}

/// An α-covering family for `n` elements of unit weight.
pub fn build_unweighted_covering(n: usize, alpha: f64, limits: &Limits) -> Result<CoveringFamily> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::domain(format!("covering alpha must be > 1, got {alpha}")));
    }
    limits.check_family("unweighted covering construction", n)?;
    let layers: Vec<usize> = (0..=n).collect();
    let per_layer = par::map(&layers, |&s| {
        let t = (floor_slack(alpha * s as f64) as usize).min(n);
        // t >= s, so each S is at worst covered by itself
        greedy_layer(n, s, t, s).unwrap_or_else(|| k_subsets(n, s).collect())
    });
    let mut family = CoveringFamily::new(n, alpha);
    family.sets = per_layer.into_iter().flatten().collect();
    family.dedup();
    Ok(family)
}

/// Budget `ℓ = ⌊(β·s - t)/α⌋`, or `None` when a `t`-set cannot serve `s`-sets.
fn layer_budget(s: usize, t: usize, alpha: f64, beta: f64) -> Option<usize> {
    let ell = floor_slack((beta * s as f64 - t as f64) / alpha);
    if ell < 0 {
        return None;
    }
    let ell = ell as usize;
    (s.saturating_sub(t) <= ell).then_some(ell)
}

/// Chooses the size `t` of the sets `T` used for the `s`-th layer, starting
/// from the rounded optimal `τ*·n` and moving to the nearest feasible size.
pub(crate) fn extension_layer_plan(n: usize, s: usize, alpha: f64, c: f64, beta: f64) -> (usize, usize) {
    let t_max = (floor_slack(beta * s as f64).max(0) as usize).min(n);
    let t0 = if n == 0 {
        0
    } else {
        let kappa = (s as f64 / n as f64).min(1.0 / beta);
        match bounds::g_star(alpha, beta, c, kappa, 1e-9) {
            Ok((_, tau)) => ((tau * n as f64).round().max(0.0) as usize).min(t_max),
            Err(_) => s,
        }
    };
    let feasible = |t: usize| layer_budget(s, t, alpha, beta).map(|ell| (t, ell));
    feasible(t0)
        .or_else(|| (t0 + 1..=t_max).find_map(feasible))
        .or_else(|| (0..t0).rev().find_map(feasible))
        .unwrap_or((s, 0))
}

/// An (α, β)-extension family for `n` elements of unit weight.
pub fn build_unweighted_extension(n: usize, alpha: f64, c: f64, beta: f64, limits: &Limits) -> Result<ExtensionFamily> {
    if !alpha.is_finite() || alpha < 1.0 || !c.is_finite() || c < 1.0 {
        return Err(Error::domain(format!("alpha and c must be >= 1, got ({alpha}, {c})")));
    }
    if !beta.is_finite() || beta <= 1.0 {
        return Err(Error::domain(format!("extension beta must be > 1, got {beta}")));
    }
    limits.check_family("unweighted extension construction", n)?;
    let layers: Vec<usize> = (0..=n).collect();
    let per_layer = par::map(&layers, |&s| {
        let (t, ell) = extension_layer_plan(n, s, alpha, c, beta);
        let need = s.saturating_sub(ell);
        match greedy_layer(n, s, t, need) {
            Some(sets) => sets.into_iter().map(|set| ExtensionEntry::new(set, ell as u32)).collect::<Vec<_>>(),
            None => k_subsets(n, s).map(|set| ExtensionEntry::new(set, 0)).collect(),
        }
    });
    let mut family = ExtensionFamily::new(n, alpha, beta);
    family.entries = per_layer.into_iter().flatten().collect();
    family.dedup();
    Ok(family)
}

fn check_weights(universe_size: usize, weights: &[u64]) -> Result<()> {
    if weights.len() != universe_size {
        return Err(Error::domain(format!(
            "expected {universe_size} weights, got {}",
            weights.len()
        )));
    }
    if let Some(i) = weights.iter().position(|&w| w == 0) {
        return Err(Error::domain(format!("weights must be >= 1 (element {i} has weight 0)")));
    }
    Ok(())
}

/// `w(S)` for every `S ⊆ {0..n-1}`, indexed by bitmask.
pub(crate) fn subset_weights(weights: &[u64]) -> Vec<u64> {
    let n = weights.len();
    let mut table = vec![0u64; 1 << n];
    for mask in 1..table.len() {
        let low = mask.trailing_zeros() as usize;
        table[mask] = table[mask & (mask - 1)] + weights[low];
    }
    table
}

/// Exhaustively checks that every `S` has `T ⊇ S` in the family with
/// `w(T) <= α·w(S)`.
pub fn verify_covering(family: &CoveringFamily, weights: &[u64], limits: &Limits) -> Result<Verdict> {
    let n = family.universe_size;
    limits.check_family("covering verification", n)?;
    check_weights(n, weights)?;
    let full = Subset::full(n);
    if let Some(bad) = family.sets.iter().find(|s| !s.is_subset_of(full)) {
        return Err(Error::domain(format!("family set {bad:?} is not inside the universe")));
    }
    let ws = subset_weights(weights);
    // lightest[S] = min weight of a family member containing S
    let mut lightest = vec![u64::MAX; 1 << n];
    for set in &family.sets {
        lightest[set.bits() as usize] = ws[set.bits() as usize];
    }
    for bit in 0..n {
        for mask in 0..lightest.len() {
            if mask >> bit & 1 == 0 {
                let sup = lightest[mask | 1 << bit];
                if sup < lightest[mask] {
                    lightest[mask] = sup;
                }
            }
        }
    }
    let alpha = family.alpha;
    let bad = par::find_first(1u64 << n, |s| {
        let best = lightest[s as usize];
        best == u64::MAX || !leq(best as f64, alpha * ws[s as usize] as f64)
    });
    Ok(bad.map_or(Verdict::Pass, |s| Verdict::Fail { witness: Subset(s) }))
}

/// The family with repeated `T` merged into its largest budget; verdicts
/// are unchanged since only `|S \ T| <= ℓ` depends on `ℓ`.
fn widest_budgets(family: &ExtensionFamily) -> Vec<ExtensionEntry> {
    let mut widest: BTreeMap<Subset, u32> = BTreeMap::new();
    for e in &family.entries {
        let slot = widest.entry(e.set).or_insert(e.budget);
        *slot = (*slot).max(e.budget);
    }
    widest.into_iter().map(|(set, budget)| ExtensionEntry { set, budget }).collect()
}

fn witnesses_entry(e: &ExtensionEntry, s: Subset, ws: &[u64], alpha: f64, beta: f64) -> bool {
    let rest = s.difference(e.set);
    rest.len() <= e.budget as usize
        && leq(
            ws[e.set.bits() as usize] as f64 + alpha * ws[rest.bits() as usize] as f64,
            beta * ws[s.bits() as usize] as f64,
        )
}

/// Exhaustively checks that every `S` has an entry `(T, ℓ)` with
/// `|S \ T| <= ℓ` and `w(T) + α·w(S \ T) <= β·w(S)`.
pub fn verify_extension(family: &ExtensionFamily, weights: &[u64], limits: &Limits) -> Result<Verdict> {
    let n = family.universe_size;
    limits.check_family("extension verification", n)?;
    check_weights(n, weights)?;
    let full = Subset::full(n);
    if let Some(bad) = family.entries.iter().find(|e| !e.set.is_subset_of(full)) {
        return Err(Error::domain(format!("family set {:?} is not inside the universe", bad.set)));
    }
    let ws = subset_weights(weights);
    let entries = widest_budgets(family);
    let (alpha, beta) = (family.alpha, family.beta);
    let bad = par::find_first(1u64 << n, |s| {
        !entries.iter().any(|e| witnesses_entry(e, Subset(s), &ws, alpha, beta))
    });
    Ok(bad.map_or(Verdict::Pass, |s| Verdict::Fail { witness: Subset(s) }))
}

/// Indices of the entries that witness `s`.
pub fn extension_witnesses(family: &ExtensionFamily, weights: &[u64], s: Subset) -> Result<Vec<usize>> {
    check_weights(family.universe_size, weights)?;
    let ws = subset_weights(weights);
    Ok(family
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| witnesses_entry(e, s, &ws, family.alpha, family.beta))
        .map(|(i, _)| i)
        .collect())
}

/// `ln Σ c^ℓ` over the entries.
pub fn family_cost(family: &ExtensionFamily, c: f64) -> f64 {
    cost::log_cost(family.entries.iter().map(|e| e.budget), c)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyDump {
    Covering(CoveringFamily),
    Extension(ExtensionFamily),
}

impl FamilyDump {
    pub fn universe_size(&self) -> usize {
        match self {
            FamilyDump::Covering(f) => f.universe_size,
            FamilyDump::Extension(f) => f.universe_size,
        }
    }
}

/// Serializes a family; `comments` become `# `-prefixed lines after the header.
pub fn write_dump(family: &FamilyDump, comments: &[String]) -> String {
    let mut out = String::new();
    match family {
        FamilyDump::Covering(f) => {
            writeln!(out, "family covering n={} alpha={}", f.universe_size, f.alpha).unwrap();
        }
        FamilyDump::Extension(f) => {
            writeln!(out, "family extension n={} alpha={} beta={}", f.universe_size, f.alpha, f.beta).unwrap();
        }
    }
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    match family {
        FamilyDump::Covering(f) => {
            for s in &f.sets {
                writeln!(out, "{s:x}").unwrap();
            }
        }
        FamilyDump::Extension(f) => {
            for e in &f.entries {
                writeln!(out, "{:x} {}", e.set, e.budget).unwrap();
            }
        }
    }
    out
}

pub fn parse_dump(text: &str) -> Result<FamilyDump> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing family header"))?;
    let mut words = header.split_whitespace();
    if words.next() != Some("family") {
        return Err(Error::parse(hline, "header must start with `family`"));
    }
    let kind = words.next().ok_or_else(|| Error::parse(hline, "missing family kind"))?;
    let mut fields = BTreeMap::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::parse(hline, format!("malformed header field `{w}`")))?;
        fields.insert(k, v);
    }
    let field = |k: &str| -> Result<&str> {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| Error::parse(hline, format!("missing header field `{k}`")))
    };
    let n: usize = field("n")?.parse().map_err(|_| Error::parse(hline, "n must be an integer"))?;
    if n > crate::subset::MAX_UNIVERSE {
        return Err(Error::parse(hline, format!("n = {n} exceeds {}", crate::subset::MAX_UNIVERSE)));
    }
    let real = |k: &str| -> Result<f64> {
        field(k)?
            .parse()
            .map_err(|_| Error::parse(hline, format!("{k} must be a real number")))
    };
    let full = Subset::full(n);
    let parse_set = |line: usize, tok: &str| -> Result<Subset> {
        let bits = u64::from_str_radix(tok, 16).map_err(|_| Error::parse(line, format!("bad hex bitmask `{tok}`")))?;
        let set = Subset(bits);
        if !set.is_subset_of(full) {
            return Err(Error::parse(line, format!("bitmask `{tok}` exceeds n = {n}")));
        }
        Ok(set)
    };
    match kind {
        "covering" => {
            let mut f = CoveringFamily::new(n, real("alpha")?);
            for (line, l) in lines {
                let mut toks = l.split_whitespace();
                let tok = toks.next().expect("non-empty line");
                if toks.next().is_some() {
                    return Err(Error::parse(line, "covering entries take a single bitmask"));
                }
                f.sets.push(parse_set(line, tok)?);
            }
            Ok(FamilyDump::Covering(f))
        }
        "extension" => {
            let mut f = ExtensionFamily::new(n, real("alpha")?, real("beta")?);
            for (line, l) in lines {
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(Error::parse(line, "extension entries are `<hex> <budget>`"));
                }
                let budget: u32 = toks[1].parse().map_err(|_| Error::parse(line, "budget must be a non-negative integer"))?;
                if budget as usize > n {
                    return Err(Error::parse(line, format!("budget {budget} exceeds n = {n}")));
                }
                f.entries.push(ExtensionEntry::new(parse_set(line, toks[0])?, budget));
            }
            Ok(FamilyDump::Extension(f))
        }
        other => Err(Error::parse(hline, format!("unknown family kind `{other}`"))),
    }
}
