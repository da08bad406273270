//! Exact greedy tree growing on presorted feature orders.
//!
//! Each feature keeps the sample rows sorted by value. A node owns the same
//! index range in every order array; splitting a node stably partitions that
//! range in each array, so children stay sorted without re-sorting. A parallel
//! `rows` array in row-index order gives every node its gradient sums in a
//! fixed summation order, which keeps fits bit-reproducible and unchanged by
//! strictly increasing transforms of any feature.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::{Node, Split, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Policy {
    DepthWise,
    LeafWise,
    Symmetric,
}

#[derive(Debug, Clone)]
pub(crate) struct GrowParams {
    pub policy: Policy,
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    pub min_samples_leaf: usize,
    pub l2: f64,
    /// Features sampled per node; `None` scans all of them.
    pub mtry: Option<usize>,
}

/// Row orders of every feature, ties broken by row index.
#[derive(Debug, Clone)]
pub(crate) struct Presorted {
    pub order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &[&[f64]]) -> Presorted {
        let order = x
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Presorted { order }
    }
}

/// Training inputs of one tree. `count[i] == 0` drops row `i` from the tree;
/// larger counts weight it (bootstrap multiplicity). `g` and `h` must already
/// include that weighting.
pub(crate) struct GrowInput<'a> {
    pub x: &'a [&'a [f64]],
    pub pre: &'a Presorted,
    pub g: &'a [f64],
    pub h: &'a [f64],
    pub count: &'a [u32],
}

#[inline]
fn score(g: f64, h: f64, l2: f64) -> f64 {
    let d = h + l2;
    if d > 0.0 {
        g * g / d
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn leaf_weight(g: f64, h: f64, l2: f64) -> f64 {
    let d = h + l2;
    if d > 0.0 {
        -g / d
    } else {
        0.0
    }
}

/// Threshold between consecutive distinct values `a < b`, kept so that
/// `a <= t < b`.
#[inline]
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    g: f64,
    h: f64,
    n: u64,
}

/// Best split of one node on one feature's sorted segment.
#[allow(clippy::too_many_arguments)]
fn scan_feature(
    col: &[f64],
    seg: &[u32],
    g: &[f64],
    h: &[f64],
    count: &[u32],
    total: Stats,
    min_leaf: u64,
    l2: f64,
) -> Option<(f64, f64)> {
    let parent = score(total.g, total.h, l2);
    let mut gl = 0.0;
    let mut hl = 0.0;
    let mut nl: u64 = 0;
    let mut best: Option<(f64, f64)> = None;
    for w in 0..seg.len().saturating_sub(1) {
        let i = seg[w] as usize;
        gl += g[i];
        hl += h[i];
        nl += u64::from(count[i]);
        let next = seg[w + 1] as usize;
        if col[next] <= col[i] {
            continue;
        }
        let nr = total.n - nl;
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let gain = score(gl, hl, l2) + score(total.g - gl, total.h - hl, l2) - parent;
        if gain > 0.0 && best.is_none_or(|(bg, _)| gain > bg) {
            best = Some((gain, midpoint(col[i], col[next])));
        }
    }
    best
}

struct Leaf {
    node: usize,
    start: usize,
    end: usize,
    depth: usize,
    stats: Stats,
    best: Option<Candidate>,
}

struct Partitioner<'a> {
    input: &'a GrowInput<'a>,
    params: &'a GrowParams,
    rows: Vec<u32>,
    order: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<Node>,
}

impl<'a> Partitioner<'a> {
    fn new(input: &'a GrowInput<'a>, params: &'a GrowParams) -> Self {
        let keep = |&i: &u32| input.count[i as usize] > 0;
        let rows: Vec<u32> = (0..input.count.len() as u32).filter(keep).collect();
        let order = input
            .pre
            .order
            .iter()
            .map(|o| o.iter().copied().filter(keep).collect())
            .collect();
        Partitioner {
            input,
            params,
            goes_left: vec![false; input.count.len()],
            scratch: Vec::with_capacity(rows.len()),
            rows,
            order,
            nodes: Vec::new(),
        }
    }

    fn stats(&self, start: usize, end: usize) -> Stats {
        let (mut g, mut h, mut n) = (0.0, 0.0, 0u64);
        for &r in &self.rows[start..end] {
            let i = r as usize;
            g += self.input.g[i];
            h += self.input.h[i];
            n += u64::from(self.input.count[i]);
        }
        Stats { g, h, n }
    }

    fn new_leaf(&mut self, start: usize, end: usize, depth: usize, rng: &mut Option<&mut ChaCha8Rng>) -> Leaf {
        let stats = self.stats(start, end);
        let node = self.nodes.len();
        self.nodes.push(Node {
            value: leaf_weight(stats.g, stats.h, self.params.l2),
            split: None,
        });
        let mut leaf = Leaf {
            node,
            start,
            end,
            depth,
            stats,
            best: None,
        };
        leaf.best = self.best_split(&leaf, rng);
        leaf
    }

    fn best_split(&self, leaf: &Leaf, rng: &mut Option<&mut ChaCha8Rng>) -> Option<Candidate> {
        let p = &self.params;
        if p.max_depth.is_some_and(|d| leaf.depth >= d) {
            return None;
        }
        let min_leaf = p.min_samples_leaf.max(1) as u64;
        if leaf.stats.n < 2 * min_leaf {
            return None;
        }
        let n_features = self.order.len();
        let features: Vec<usize> = match (p.mtry, rng.as_deref_mut()) {
            (Some(m), Some(r)) if m < n_features => {
                let mut f = sample(r, n_features, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..n_features).collect(),
        };
        let mut best: Option<Candidate> = None;
        for f in features {
            let seg = &self.order[f][leaf.start..leaf.end];
            let found = scan_feature(
                self.input.x[f],
                seg,
                self.input.g,
                self.input.h,
                self.input.count,
                leaf.stats,
                min_leaf,
                p.l2,
            );
            if let Some((gain, threshold)) = found {
                if best.is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    /// Stably partition the leaf's range in every array; returns the split
    /// position.
    fn partition(&mut self, leaf: &Leaf, c: Candidate) -> usize {
        let col = self.input.x[c.feature];
        for &r in &self.rows[leaf.start..leaf.end] {
            self.goes_left[r as usize] = col[r as usize] <= c.threshold;
        }
        let goes_left = &self.goes_left;
        let scratch = &mut self.scratch;
        let mut stable = |seg: &mut [u32]| -> usize {
            scratch.clear();
            let mut w = 0;
            for k in 0..seg.len() {
                let r = seg[k];
                if goes_left[r as usize] {
                    seg[w] = r;
                    w += 1;
                } else {
                    scratch.push(r);
                }
            }
            seg[w..].copy_from_slice(scratch);
            w
        };
        let mid = leaf.start + stable(&mut self.rows[leaf.start..leaf.end]);
        for o in self.order.iter_mut() {
            stable(&mut o[leaf.start..leaf.end]);
        }
        mid
    }

    fn split(&mut self, leaf: &Leaf, c: Candidate, rng: &mut Option<&mut ChaCha8Rng>) -> (Leaf, Leaf) {
        let mid = self.partition(leaf, c);
        let left = self.new_leaf(leaf.start, mid, leaf.depth + 1, rng);
        let right = self.new_leaf(mid, leaf.end, leaf.depth + 1, rng);
        self.nodes[leaf.node].split = Some(Split {
            feature: c.feature,
            threshold: c.threshold,
            gain: c.gain,
            left: left.node,
            right: right.node,
        });
        (left, right)
    }
}

/// Grow one tree. `rng` drives per-node feature sampling and is only
/// consulted when `params.mtry` is set.
pub(crate) fn grow_tree(input: &GrowInput, params: &GrowParams, mut rng: Option<&mut ChaCha8Rng>) -> Tree {
    if params.policy == Policy::Symmetric {
        return grow_symmetric(input, params);
    }
    let mut part = Partitioner::new(input, params);
    let n = part.rows.len();
    let root = part.new_leaf(0, n, 0, &mut rng);
    let max_leaves = params.max_leaves.unwrap_or(usize::MAX).max(1);
    let mut n_leaves = 1;
    match params.policy {
        Policy::DepthWise => {
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(leaf) = queue.pop_front() {
                if n_leaves >= max_leaves {
                    break;
                }
                if let Some(c) = leaf.best {
                    let (l, r) = part.split(&leaf, c, &mut rng);
                    n_leaves += 1;
                    queue.push_back(l);
                    queue.push_back(r);
                }
            }
        }
        Policy::LeafWise => {
            let mut open = vec![root];
            while n_leaves < max_leaves {
                // Highest gain first; equal gains go to the older node.
                let pick = open
                    .iter()
                    .enumerate()
                    .filter_map(|(k, l)| l.best.map(|c| (k, c.gain, l.node)))
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.2.cmp(&a.2)));
                let Some((k, _, _)) = pick else { break };
                let leaf = open.swap_remove(k);
                let c = leaf.best.expect("picked leaves have a candidate");
                let (l, r) = part.split(&leaf, c, &mut rng);
                n_leaves += 1;
                open.push(l);
                open.push(r);
            }
        }
        Policy::Symmetric => unreachable!(),
    }
    Tree { nodes: part.nodes }
}

/// Oblivious growth: every leaf of a level is split on the same
/// (feature, threshold), chosen to maximize the summed gain over leaves.
/// Leaves that would send all their rows one way are left unsplit.
fn grow_symmetric(input: &GrowInput, params: &GrowParams) -> Tree {
    let l2 = params.l2;
    let min_leaf = params.min_samples_leaf.max(1) as u64;
    let n = input.count.len();
    let sample_rows: Vec<usize> = (0..n).filter(|&i| input.count[i] > 0).collect();
    let order: Vec<Vec<u32>> = input
        .pre
        .order
        .iter()
        .map(|o| o.iter().copied().filter(|&i| input.count[i as usize] > 0).collect())
        .collect();

    let leaf_stats = |leaf_of: &[usize], n_leaves: usize| -> Vec<Stats> {
        let mut s = vec![Stats { g: 0.0, h: 0.0, n: 0 }; n_leaves];
        for &i in &sample_rows {
            let l = &mut s[leaf_of[i]];
            l.g += input.g[i];
            l.h += input.h[i];
            l.n += u64::from(input.count[i]);
        }
        s
    };

    // leaf_of maps rows to positions in `frontier`, which holds node ids.
    let mut leaf_of = vec![0usize; n];
    let mut nodes = Vec::new();
    let root = leaf_stats(&leaf_of, 1)[0];
    nodes.push(Node {
        value: leaf_weight(root.g, root.h, l2),
        split: None,
    });
    let mut frontier = vec![0usize];
    let max_depth = params.max_depth.unwrap_or(usize::MAX);

    let mut depth = 0;
    while depth < max_depth {
        let stats = leaf_stats(&leaf_of, frontier.len());
        let base: Vec<f64> = stats.iter().map(|s| score(s.g, s.h, l2)).collect();
        let mut best: Option<Candidate> = None;
        let k = frontier.len();
        let mut gl = vec![0.0; k];
        let mut hl = vec![0.0; k];
        let mut nl = vec![0u64; k];
        let mut contrib = vec![0.0; k];
        let mut bad = vec![false; k];
        for (f, ord) in order.iter().enumerate() {
            let col = input.x[f];
            gl.iter_mut().for_each(|v| *v = 0.0);
            hl.iter_mut().for_each(|v| *v = 0.0);
            nl.iter_mut().for_each(|v| *v = 0);
            contrib.iter_mut().for_each(|v| *v = 0.0);
            bad.iter_mut().for_each(|v| *v = false);
            let mut total = 0.0;
            let mut n_bad = 0usize;
            for w in 0..ord.len().saturating_sub(1) {
                let i = ord[w] as usize;
                let l = leaf_of[i];
                gl[l] += input.g[i];
                hl[l] += input.h[i];
                nl[l] += u64::from(input.count[i]);
                let s = stats[l];
                let nr = s.n - nl[l];
                let c = if nr == 0 {
                    0.0
                } else {
                    score(gl[l], hl[l], l2) + score(s.g - gl[l], s.h - hl[l], l2) - base[l]
                };
                total += c - contrib[l];
                contrib[l] = c;
                let is_bad = (nl[l] > 0 && nl[l] < min_leaf) || (nr > 0 && nr < min_leaf);
                if is_bad != bad[l] {
                    if is_bad {
                        n_bad += 1;
                    } else {
                        n_bad -= 1;
                    }
                    bad[l] = is_bad;
                }
                let next = ord[w + 1] as usize;
                if col[next] <= col[i] || n_bad > 0 {
                    continue;
                }
                if total > 0.0 && best.is_none_or(|b| total > b.gain) {
                    best = Some(Candidate {
                        feature: f,
                        threshold: midpoint(col[i], col[next]),
                        gain: total,
                    });
                }
            }
        }
        let Some(c) = best else { break };

        let col = input.x[c.feature];
        let mut left_stats = vec![Stats { g: 0.0, h: 0.0, n: 0 }; k];
        for &i in &sample_rows {
            if col[i] <= c.threshold {
                let s = &mut left_stats[leaf_of[i]];
                s.g += input.g[i];
                s.h += input.h[i];
                s.n += u64::from(input.count[i]);
            }
        }
        // Children get new frontier slots; leaves not split keep one slot.
        let mut next_frontier = Vec::new();
        let mut slot_left = vec![usize::MAX; k];
        let mut slot_right = vec![usize::MAX; k];
        let mut split_any = false;
        for l in 0..k {
            let s = stats[l];
            let ls = left_stats[l];
            // Right-side sums are recomputed below in row order; this only
            // decides whether the leaf is split at all.
            if ls.n == 0 || ls.n == s.n {
                slot_left[l] = next_frontier.len();
                slot_right[l] = next_frontier.len();
                next_frontier.push(frontier[l]);
                continue;
            }
            split_any = true;
            let left_id = nodes.len();
            nodes.push(Node { value: 0.0, split: None });
            let right_id = nodes.len();
            nodes.push(Node { value: 0.0, split: None });
            let gain = score(ls.g, ls.h, l2) + score(s.g - ls.g, s.h - ls.h, l2) - base[l];
            nodes[frontier[l]].split = Some(Split {
                feature: c.feature,
                threshold: c.threshold,
                gain,
                left: left_id,
                right: right_id,
            });
            slot_left[l] = next_frontier.len();
            next_frontier.push(left_id);
            slot_right[l] = next_frontier.len();
            next_frontier.push(right_id);
        }
        if !split_any {
            break;
        }
        for &i in &sample_rows {
            let l = leaf_of[i];
            leaf_of[i] = if col[i] <= c.threshold { slot_left[l] } else { slot_right[l] };
        }
        frontier = next_frontier;
        let child_stats = leaf_stats(&leaf_of, frontier.len());
        for (slot, &node) in frontier.iter().enumerate() {
            nodes[node].value = leaf_weight(child_stats[slot].g, child_stats[slot].h, l2);
        }
        depth += 1;
    }
    Tree { nodes }
}
