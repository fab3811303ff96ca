// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Coverage-based path partitioning: a depth-first search over
//! (node, coverage) pairs that emits one representative path per distinct
//! coverage set reaching EXIT.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::cfg::{Cfg, NodeId};

/// Fixed-width bitset over CFG node ids.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet {
    words: Vec<u64>,
}

impl NodeSet {
    pub fn with_capacity(n: usize) -> Self {
        NodeSet { words: vec![0; n.div_ceil(64)] }
    }

    pub fn insert(&mut self, id: NodeId) -> bool {
        let (w, b) = (id / 64, id % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.words.get(id / 64).is_some_and(|w| w & (1 << (id % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(i, &w)| (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| i * 64 + b))
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.words.iter().enumerate().all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn to_btree(&self) -> BTreeSet<NodeId> {
        self.iter().collect()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        let mut s = NodeSet::default();
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    /// Emission order of the search.
    pub id: usize,
    /// Representative walk from ENTRY to EXIT.
    pub path: Vec<NodeId>,
    pub coverage: NodeSet,
}

#[derive(Clone, Copy, Debug)]
pub struct PartitionLimits {
    /// Stop after this many partitions.
    pub max_partitions: usize,
    /// Stop after visiting this many (node, coverage) states.
    pub max_states: usize,
}

impl Default for PartitionLimits {
    fn default() -> Self {
        PartitionLimits { max_partitions: 10_000, max_states: 2_000_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionSet {
    pub partitions: Vec<Partition>,
    pub states_visited: usize,
    /// True when a limit cut the search short.
    pub truncated: bool,
}

impl PartitionSet {
    pub fn coverages(&self) -> BTreeSet<NodeSet> {
        self.partitions.iter().map(|p| p.coverage.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("partition sets serialize")
    }
}

struct State {
    node: NodeId,
    parent: Option<usize>,
}

/// Enumerates coverage-distinct partitions. A (node, coverage) pair is
/// explored at most once, where coverage already includes the node; the
/// search therefore terminates and reaches every coverage set of every
/// ENTRY-to-EXIT walk. Successors are visited in stored order.
pub fn gen_partitions(cfg: &Cfg, limits: PartitionLimits) -> PartitionSet {
    let mut seen: HashSet<(NodeId, NodeSet)> = HashSet::new();
    let mut arena: Vec<State> = Vec::new();
    let mut partitions = Vec::new();
    let mut truncated = false;
    // Stack entries: (node, coverage before visiting, parent state).
    let mut stack: Vec<(NodeId, NodeSet, Option<usize>)> = vec![(cfg.entry, NodeSet::with_capacity(cfg.len()), None)];
    while let Some((node, mut cov, parent)) = stack.pop() {
        cov.insert(node);
        if seen.contains(&(node, cov.clone())) {
            continue;
        }
        if seen.len() >= limits.max_states {
            truncated = true;
            break;
        }
        seen.insert((node, cov.clone()));
        let idx = arena.len();
        arena.push(State { node, parent });
        if node == cfg.exit {
            partitions.push(Partition { id: partitions.len(), path: path_to(&arena, idx), coverage: cov });
            if partitions.len() >= limits.max_partitions {
                truncated = true;
                break;
            }
            continue;
        }
        for &s in cfg.succs[node].iter().rev() {
            stack.push((s, cov.clone(), Some(idx)));
        }
    }
    if truncated {
        log::warn!("partition search stopped at a limit after {} partitions", partitions.len());
    }
    PartitionSet { partitions, states_visited: seen.len(), truncated }
}

fn path_to(arena: &[State], mut idx: usize) -> Vec<NodeId> {
    let mut path = vec![arena[idx].node];
    while let Some(p) = arena[idx].parent {
        path.push(arena[p].node);
        idx = p;
    }
    path.reverse();
    path
}

/// Brute-force reference: the coverage sets of all ENTRY-to-EXIT walks that
/// take each back edge at most `loop_bound` times. Back edges are found by
/// an independent depth-first search rather than read from the CFG.
pub fn coverage_oracle(cfg: &Cfg, loop_bound: usize) -> BTreeSet<NodeSet> {
    let back = dfs_back_edges(cfg);
    let mut out = BTreeSet::new();
    let mut memo: HashSet<(NodeId, NodeSet, Vec<usize>)> = HashSet::new();
    let mut cov = NodeSet::with_capacity(cfg.len());
    cov.insert(cfg.entry);
    let mut counts = vec![0usize; back.len()];
    walk(cfg, cfg.entry, &mut cov, &mut counts, &back, loop_bound, &mut memo, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn walk(
    cfg: &Cfg,
    node: NodeId,
    cov: &mut NodeSet,
    counts: &mut Vec<usize>,
    back: &[(NodeId, NodeId)],
    bound: usize,
    memo: &mut HashSet<(NodeId, NodeSet, Vec<usize>)>,
    out: &mut BTreeSet<NodeSet>,
) {
    // Walks continuing from an identical state yield identical results.
    if !memo.insert((node, cov.clone(), counts.clone())) {
        return;
    }
    if node == cfg.exit {
        out.insert(cov.clone());
        return;
    }
    for &s in &cfg.succs[node] {
        let edge = back.iter().position(|&e| e == (node, s));
        if let Some(k) = edge {
            if counts[k] == bound {
                continue;
            }
            counts[k] += 1;
        }
        let added = cov.insert(s);
        walk(cfg, s, cov, counts, back, bound, memo, out);
        if added {
            cov.words[s / 64] &= !(1 << (s % 64));
        }
        if let Some(k) = edge {
            counts[k] -= 1;
        }
    }
}

fn dfs_back_edges(cfg: &Cfg) -> Vec<(NodeId, NodeId)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; cfg.len()];
    let mut out = Vec::new();
    let mut stack = vec![(cfg.entry, 0usize)];
    mark[cfg.entry] = Mark::Open;
    while let Some(&mut (n, ref mut k)) = stack.last_mut() {
        if let Some(&s) = cfg.succs[n].get(*k) {
            *k += 1;
            match mark[s] {
                Mark::New => {
                    mark[s] = Mark::Open;
                    stack.push((s, 0));
                }
                Mark::Open => out.push((n, s)),
                Mark::Done => {}
            }
        } else {
            mark[n] = Mark::Done;
            stack.pop();
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}
