//! Membership and extension oracles with query accounting.
//!
//! Every extension oracle returns a completion `X` with `S ∪ X` a solution.
//! When no completion of size at most `ℓ` exists the bound is vacuous and
//! the oracles return `U ∖ S`. Ties are broken by weight, then cardinality,
//! then bitmask.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cost::LogSumExp;
use crate::error::Result;
use crate::limits::Limits;
use crate::problems::{FvsInstance, HsInstance, SetSystem, VcInstance};
use crate::subset::{k_subsets, Subset};

pub trait ExtensionOracle: Sync {
    fn name(&self) -> &'static str;
    fn declared_alpha(&self) -> f64;
    fn declared_c(&self) -> f64;
    fn extend(&self, s: Subset, budget: u32) -> Subset;
}

impl<O: ExtensionOracle + ?Sized> ExtensionOracle for &O {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn declared_alpha(&self) -> f64 {
        (**self).declared_alpha()
    }
    fn declared_c(&self) -> f64 {
        (**self).declared_c()
    }
    fn extend(&self, s: Subset, budget: u32) -> Subset {
        (**self).extend(s, budget)
    }
}

type Key = (u64, usize, u64);

fn key(x: Subset, weights: &[u64]) -> Key {
    (x.weight(weights), x.len(), x.bits())
}

fn keep_better(best: &mut Option<Key>, cand: Key) {
    if best.is_none_or(|b| cand < b) {
        *best = Some(cand);
    }
}

/// Exhaustive extension oracle over any set system (`α = 1`).
pub struct ExactOracle<'a, P: SetSystem + ?Sized> {
    system: &'a P,
    c: f64,
}

impl<'a, P: SetSystem + ?Sized> ExactOracle<'a, P> {
    pub fn new(system: &'a P, limits: &Limits) -> Result<Self> {
        limits.check_exact("exact extension oracle", system.universe_size())?;
        Ok(ExactOracle { system, c: 2.0 })
    }

    /// Overrides the nominal per-query cost base (default 2).
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    /// The restricted optimum `min{w(X) : |X| ≤ ℓ, S ∪ X ∈ F}`, if finite.
    pub fn restricted_opt(&self, s: Subset, budget: u32) -> Option<Subset> {
        let n = self.system.universe_size();
        let weights = self.system.weights();
        let rest: Vec<usize> = Subset::full(n).difference(s).iter().collect();
        let mut best: Option<Key> = None;
        for k in 0..=(budget as usize).min(rest.len()) {
            for local in k_subsets(rest.len(), k) {
                let x = local.remap(&rest);
                let cand = key(x, weights);
                if best.is_none_or(|b| cand < b) && self.system.is_solution(s.union(x)) {
                    best = Some(cand);
                }
            }
        }
        best.map(|(_, _, m)| Subset(m))
    }
}

impl<P: SetSystem + ?Sized> ExtensionOracle for ExactOracle<'_, P> {
    fn name(&self) -> &'static str {
        "exact"
    }
    fn declared_alpha(&self) -> f64 {
        1.0
    }
    fn declared_c(&self) -> f64 {
        self.c
    }
    fn extend(&self, s: Subset, budget: u32) -> Subset {
        self.restricted_opt(s, budget)
            .unwrap_or_else(|| Subset::full(self.system.universe_size()).difference(s))
    }
}

/// Bounded search tree for vertex cover: branch on the lowest uncovered edge.
pub struct BranchingVcOracle<'a> {
    inst: &'a VcInstance,
}

impl<'a> BranchingVcOracle<'a> {
    pub fn new(inst: &'a VcInstance) -> Self {
        BranchingVcOracle { inst }
    }

    fn search(&self, s: Subset, x: Subset, depth: u32, best: &mut Option<Key>) {
        let w = &self.inst.weights;
        if best.is_some_and(|b| x.weight(w) > b.0) {
            return;
        }
        match self.inst.uncovered(s.union(x)).next() {
            None => keep_better(best, key(x, w)),
            Some(_) if depth == 0 => {}
            Some((u, v)) => {
                self.search(s, x.with(u), depth - 1, best);
                self.search(s, x.with(v), depth - 1, best);
            }
        }
    }
}

impl ExtensionOracle for BranchingVcOracle<'_> {
    fn name(&self) -> &'static str {
        "branching-vc"
    }
    fn declared_alpha(&self) -> f64 {
        1.0
    }
    fn declared_c(&self) -> f64 {
        2.0
    }
    fn extend(&self, s: Subset, budget: u32) -> Subset {
        let mut best = None;
        self.search(s, Subset::EMPTY, budget, &mut best);
        best.map_or_else(|| Subset::full(self.inst.weights.len()).difference(s), |(_, _, m)| Subset(m))
    }
}

/// Bounded search tree for d-hitting set: branch on the lowest unhit set.
pub struct BranchingHsOracle<'a> {
    inst: &'a HsInstance,
}

impl<'a> BranchingHsOracle<'a> {
    pub fn new(inst: &'a HsInstance) -> Self {
        BranchingHsOracle { inst }
    }

    fn search(&self, s: Subset, x: Subset, depth: u32, best: &mut Option<Key>) {
        let w = &self.inst.weights;
        if best.is_some_and(|b| x.weight(w) > b.0) {
            return;
        }
        match self.inst.unhit(s.union(x)).next() {
            None => keep_better(best, key(x, w)),
            Some(_) if depth == 0 => {}
            Some(f) => {
                for e in f.iter() {
                    self.search(s, x.with(e), depth - 1, best);
                }
            }
        }
    }
}

impl ExtensionOracle for BranchingHsOracle<'_> {
    fn name(&self) -> &'static str {
        "branching-hs"
    }
    fn declared_alpha(&self) -> f64 {
        1.0
    }
    fn declared_c(&self) -> f64 {
        self.inst.d as f64
    }
    fn extend(&self, s: Subset, budget: u32) -> Subset {
        let mut best = None;
        self.search(s, Subset::EMPTY, budget, &mut best);
        best.map_or_else(|| Subset::full(self.inst.weights.len()).difference(s), |(_, _, m)| Subset(m))
    }
}

/// Drops members of `order`, latest first, while `ok` still accepts the rest.
fn reverse_delete(order: &[usize], ok: impl Fn(Subset) -> bool) -> Subset {
    let mut x = Subset::from_elems(order.iter().copied());
    for &v in order.iter().rev() {
        if ok(x.without(v)) {
            x = x.without(v);
        }
    }
    x
}

/// Local ratio over the edges (or sets) not hit by `S`. Each element of
/// `groups` is a set of candidates; the cheapest residual is subtracted from
/// all of them.
fn local_ratio_sets(weights: &[u64], groups: impl Iterator<Item = Subset>) -> Vec<usize> {
    let mut residual = weights.to_vec();
    let mut zeroed = Vec::new();
    for g in groups {
        let m = g.iter().map(|v| residual[v]).min().unwrap_or(0);
        if m == 0 {
            continue;
        }
        for v in g.iter() {
            residual[v] -= m;
            if residual[v] == 0 {
                zeroed.push(v);
            }
        }
    }
    zeroed
}

/// Bar-Yehuda–Even local ratio for vertex cover (`α = 2`, `c = 1`).
pub struct LocalRatioVc<'a> {
    inst: &'a VcInstance,
}

impl<'a> LocalRatioVc<'a> {
    pub fn new(inst: &'a VcInstance) -> Self {
        LocalRatioVc { inst }
    }
}

impl ExtensionOracle for LocalRatioVc<'_> {
    fn name(&self) -> &'static str {
        "local-ratio-vc"
    }
    fn declared_alpha(&self) -> f64 {
        2.0
    }
    fn declared_c(&self) -> f64 {
        1.0
    }
    fn extend(&self, s: Subset, _budget: u32) -> Subset {
        let edges = self.inst.uncovered(s).map(|(u, v)| Subset::from_elems([u, v]));
        let order = local_ratio_sets(&self.inst.weights, edges);
        reverse_delete(&order, |x| self.inst.is_solution(s.union(x)))
    }
}

/// Local ratio for d-hitting set (`α = d`, `c = 1`).
pub struct LocalRatioHs<'a> {
    inst: &'a HsInstance,
}

impl<'a> LocalRatioHs<'a> {
    pub fn new(inst: &'a HsInstance) -> Self {
        LocalRatioHs { inst }
    }
}

impl ExtensionOracle for LocalRatioHs<'_> {
    fn name(&self) -> &'static str {
        "local-ratio-hs"
    }
    fn declared_alpha(&self) -> f64 {
        self.inst.d as f64
    }
    fn declared_c(&self) -> f64 {
        1.0
    }
    fn extend(&self, s: Subset, _budget: u32) -> Subset {
        let order = local_ratio_sets(&self.inst.weights, self.inst.unhit(s));
        reverse_delete(&order, |x| self.inst.is_solution(s.union(x)))
    }
}

/// Multigraph after vertex deletions; self-loops count twice toward degree.
struct Residual<'a> {
    edges: &'a [(usize, usize)],
    adj: Vec<Vec<usize>>,
    edge_alive: Vec<bool>,
    alive: Subset,
    deg: Vec<usize>,
}

impl<'a> Residual<'a> {
    fn new(n: usize, edges: &'a [(usize, usize)], removed: Subset) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut deg = vec![0; n];
        let mut edge_alive = vec![false; edges.len()];
        for (id, &(u, v)) in edges.iter().enumerate() {
            if removed.contains(u) || removed.contains(v) {
                continue;
            }
            edge_alive[id] = true;
            adj[u].push(id);
            if u != v {
                adj[v].push(id);
            }
            deg[u] += 1;
            deg[v] += 1;
        }
        Residual { edges, adj, edge_alive, alive: Subset::full(n).difference(removed), deg }
    }

    fn other(&self, id: usize, v: usize) -> usize {
        let (a, b) = self.edges[id];
        if a == v {
            b
        } else {
            a
        }
    }

    fn live_edges(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied().filter(|&id| self.edge_alive[id])
    }

    fn remove(&mut self, v: usize) {
        for i in 0..self.adj[v].len() {
            let id = self.adj[v][i];
            if self.edge_alive[id] {
                self.edge_alive[id] = false;
                let (a, b) = self.edges[id];
                self.deg[a] -= 1;
                self.deg[b] -= 1;
            }
        }
        self.alive = self.alive.without(v);
    }

    /// Repeatedly deletes vertices of degree at most one.
    fn cleanup(&mut self) {
        while let Some(v) = self.alive.iter().find(|&v| self.deg[v] <= 1) {
            self.remove(v);
        }
    }

    /// Walks from `start` along `first` through degree-2 vertices. Returns
    /// the interior vertices and the endpoint reached.
    fn walk(&self, start: usize, first: usize) -> (Vec<usize>, usize) {
        let mut path = Vec::new();
        let (mut via, mut cur) = (first, self.other(first, start));
        while cur != start && self.deg[cur] == 2 {
            path.push(cur);
            via = self.live_edges(cur).find(|&id| id != via).expect("degree-2 vertex has two live edges");
            cur = self.other(via, cur);
        }
        (path, cur)
    }

    /// A cycle in which every vertex but at most one has degree 2.
    fn semidisjoint_cycle(&self) -> Option<Vec<usize>> {
        for v in self.alive.iter() {
            if self.live_edges(v).any(|id| self.edges[id].0 == self.edges[id].1) {
                return Some(vec![v]);
            }
        }
        for v in self.alive.iter().filter(|&v| self.deg[v] == 2) {
            let ids: Vec<usize> = self.live_edges(v).collect();
            let (mut p1, e1) = self.walk(v, ids[0]);
            p1.push(v);
            if e1 == v {
                return Some(p1);
            }
            let (p2, e2) = self.walk(v, ids[1]);
            if e1 == e2 {
                p1.extend(p2);
                p1.push(e1);
                return Some(p1);
            }
        }
        None
    }
}

/// Bafna–Berman–Fujito local ratio for feedback vertex set (`α = 2`, `c = 1`).
pub struct LocalRatioFvs<'a> {
    inst: &'a FvsInstance,
}

impl<'a> LocalRatioFvs<'a> {
    pub fn new(inst: &'a FvsInstance) -> Self {
        LocalRatioFvs { inst }
    }
}

/// Residuals at or below this fraction of the original weight count as zero.
const ZERO_TOL: f64 = 1e-12;

impl ExtensionOracle for LocalRatioFvs<'_> {
    fn name(&self) -> &'static str {
        "local-ratio-fvs"
    }
    fn declared_alpha(&self) -> f64 {
        2.0
    }
    fn declared_c(&self) -> f64 {
        1.0
    }
    fn extend(&self, s: Subset, _budget: u32) -> Subset {
        let w = &self.inst.weights;
        let mut g = Residual::new(w.len(), &self.inst.edges, s);
        g.cleanup();
        let mut r: Vec<f64> = w.iter().map(|&x| x as f64).collect();
        let mut order = Vec::new();
        while !g.alive.is_empty() {
            let factors: Vec<(usize, f64)> = match g.semidisjoint_cycle() {
                Some(cycle) => cycle.into_iter().map(|v| (v, 1.0)).collect(),
                None => g.alive.iter().map(|v| (v, (g.deg[v] - 1) as f64)).collect(),
            };
            let (vmin, gamma) = factors
                .iter()
                .map(|&(v, f)| (v, r[v] / f))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("nonempty residual graph");
            for &(v, f) in &factors {
                r[v] -= gamma * f;
            }
            r[vmin] = 0.0;
            let mut zeros: Vec<usize> = factors.iter().map(|&(v, _)| v).filter(|&v| r[v] <= ZERO_TOL * w[v] as f64).collect();
            zeros.sort_unstable();
            for v in zeros {
                r[v] = 0.0;
                order.push(v);
                g.remove(v);
            }
            g.cleanup();
        }
        reverse_delete(&order, |x| self.inst.is_solution(s.union(x)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryRecord {
    pub size_s: usize,
    pub ell: u32,
    pub cumulative_cost_log: f64,
}

/// Queries issued and `ln Σ c^ℓ` over them.
#[derive(Debug, Clone)]
pub struct QueryLedger {
    ln_c: f64,
    acc: LogSumExp,
    pub queries: Vec<QueryRecord>,
    pub wall_time: Duration,
}

impl QueryLedger {
    pub fn new(c: f64) -> Self {
        QueryLedger { ln_c: c.ln(), acc: LogSumExp::new(), queries: Vec::new(), wall_time: Duration::ZERO }
    }

    pub fn record(&mut self, size_s: usize, ell: u32) {
        self.acc.push(ell as f64 * self.ln_c);
        self.queries.push(QueryRecord { size_s, ell, cumulative_cost_log: self.acc.value() });
    }

    /// `-inf` when no query was recorded.
    pub fn cost_log(&self) -> f64 {
        self.acc.value()
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn to_json_lines(&self) -> String {
        self.queries.iter().map(|q| serde_json::to_string(q).expect("finite record") + "\n").collect()
    }
}

/// An oracle paired with its own ledger. Not shared between threads; the
/// driver records queries itself when it fans out.
pub struct Ledgered<O> {
    pub oracle: O,
    pub ledger: QueryLedger,
}

impl<O: ExtensionOracle> Ledgered<O> {
    pub fn extend(&mut self, s: Subset, budget: u32) -> Subset {
        let start = Instant::now();
        let x = self.oracle.extend(s, budget);
        self.ledger.wall_time += start.elapsed();
        self.ledger.record(s.len(), budget);
        x
    }
}

pub fn wrap_with_ledger<O: ExtensionOracle>(oracle: O, c: f64) -> Ledgered<O> {
    Ledgered { oracle, ledger: QueryLedger::new(c) }
}

/// A set system that counts membership queries.
pub struct CountingMembership<'a, P: SetSystem + ?Sized> {
    inner: &'a P,
    queries: AtomicU64,
}

impl<'a, P: SetSystem + ?Sized> CountingMembership<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        CountingMembership { inner, queries: AtomicU64::new(0) }
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

impl<P: SetSystem + ?Sized> SetSystem for CountingMembership<'_, P> {
    fn universe_size(&self) -> usize {
        self.inner.universe_size()
    }
    fn weights(&self) -> &[u64] {
        self.inner.weights()
    }
    fn is_solution(&self, s: Subset) -> bool {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.inner.is_solution(s)
    }
    fn problem(&self) -> &'static str {
        self.inner.problem()
    }
}
