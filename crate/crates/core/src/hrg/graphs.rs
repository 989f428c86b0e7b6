use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{arg, Result};

/// Connected vertex-coloured multigraph; `adjacency[u][u]` counts self-loops.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FeynGraph {
    pub colors: Vec<usize>,
    pub adjacency: Vec<Vec<u32>>,
    pub aut: u64,
}

/// Vertex type available to the enumerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexKind {
    pub max_valence: u32,
    /// Budget consumed by one vertex of this kind.
    pub cost: u32,
    /// Counted against the genus bound.
    pub hbar: u32,
}

impl FeynGraph {
    /// Validates and brings the graph to canonical labelling.
    pub fn new(colors: Vec<usize>, adjacency: Vec<Vec<u32>>) -> Result<FeynGraph> {
        let n = colors.len();
        if n == 0 {
            return arg("graph needs a vertex");
        }
        if adjacency.len() != n || adjacency.iter().any(|r| r.len() != n) {
            return arg("adjacency must be square");
        }
        for u in 0..n {
            for v in 0..n {
                if adjacency[u][v] != adjacency[v][u] {
                    return arg("adjacency must be symmetric");
                }
            }
        }
        if !connected(&adjacency) {
            return arg("graph is not connected");
        }
        let aut = automorphisms(&colors, &adjacency);
        let (colors, adjacency) = canonical_form(&colors, &adjacency);
        Ok(FeynGraph { colors, adjacency, aut })
    }

    pub fn vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn edges(&self) -> u32 {
        let n = self.vertices();
        (0..n).map(|u| (u..n).map(|v| self.adjacency[u][v]).sum::<u32>()).sum()
    }

    pub fn genus(&self) -> u32 {
        self.edges() + 1 - self.vertices() as u32
    }

    pub fn valence(&self, u: usize) -> u32 {
        self.adjacency[u].iter().sum::<u32>() + self.adjacency[u][u]
    }

    /// Text form `colours|u-v^m,...`, e.g. `0,0|0-1^3` for the theta graph.
    pub fn encoding(&self) -> String {
        let mut s = self.colors.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        s.push('|');
        let mut first = true;
        for u in 0..self.vertices() {
            for v in u..self.vertices() {
                let m = self.adjacency[u][v];
                if m > 0 {
                    if !first {
                        s.push(',');
                    }
                    first = false;
                    let _ = write!(s, "{u}-{v}");
                    if m > 1 {
                        let _ = write!(s, "^{m}");
                    }
                }
            }
        }
        s
    }
}

fn connected(adj: &[Vec<u32>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && adj[u][v] > 0 {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

type Invariant = usize;

/// Colour refinement: start from (colour, loops, valence) and repeatedly
/// split classes by the multiset of neighbouring classes and multiplicities.
fn invariants(colors: &[usize], adj: &[Vec<u32>]) -> Vec<Invariant> {
    let n = colors.len();
    let rank = |keys: Vec<Vec<u64>>| -> Vec<usize> {
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        keys.iter().map(|k| sorted.binary_search(k).expect("present")).collect()
    };
    let mut class = rank(
        (0..n)
            .map(|u| vec![colors[u] as u64, adj[u][u] as u64, (adj[u].iter().sum::<u32>() + adj[u][u]) as u64])
            .collect(),
    );
    loop {
        let keys = (0..n)
            .map(|u| {
                let mut nb: Vec<u64> = (0..n)
                    .filter(|&v| v != u && adj[u][v] > 0)
                    .map(|v| ((class[v] as u64) << 32) | adj[u][v] as u64)
                    .collect();
                nb.sort();
                let mut k = vec![class[u] as u64];
                k.extend(nb);
                k
            })
            .collect();
        let next = rank(keys);
        let count = |c: &[usize]| c.iter().max().map_or(0, |m| m + 1);
        if count(&next) == count(&class) {
            return next;
        }
        class = next;
    }
}

fn encode(adj: &[Vec<u32>], order: &[usize]) -> Vec<u32> {
    let n = order.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            out.push(adj[order[a]][order[b]]);
        }
    }
    out
}

/// Canonical relabelling: vertices are sorted by an isomorphism invariant,
/// then the lexicographically smallest adjacency encoding is taken over all
/// orderings that permute vertices with equal invariants.
fn canonical_form(colors: &[usize], adj: &[Vec<u32>]) -> (Vec<usize>, Vec<Vec<u32>>) {
    let n = colors.len();
    let inv = invariants(colors, adj);
    let mut base: Vec<usize> = (0..n).collect();
    base.sort_by(|&a, &b| inv[a].cmp(&inv[b]));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &u in &base {
        match blocks.last_mut() {
            Some(b) if inv[b[0]] == inv[u] => b.push(u),
            _ => blocks.push(vec![u]),
        }
    }
    let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
    let mut order = Vec::with_capacity(n);
    block_orders(&blocks, 0, &mut order, &mut |ord: &[usize]| {
        let code = encode(adj, ord);
        if best.as_ref().map_or(true, |(b, _)| code < *b) {
            best = Some((code, ord.to_vec()));
        }
    });
    let (_, ord) = best.expect("at least one ordering");
    let colors2 = ord.iter().map(|&u| colors[u]).collect();
    let adj2 = ord.iter().map(|&u| ord.iter().map(|&v| adj[u][v]).collect()).collect();
    (colors2, adj2)
}

/// `|Aut Γ|`: colour-preserving vertex symmetries times edge permutations
/// within each multi-edge and flips of self-loops.
fn automorphisms(colors: &[usize], adj: &[Vec<u32>]) -> u64 {
    let n = colors.len();
    let inv = invariants(colors, adj);
    let mut by_inv: BTreeMap<&Invariant, Vec<usize>> = BTreeMap::new();
    for u in 0..n {
        by_inv.entry(&inv[u]).or_default().push(u);
    }
    let slots: Vec<Vec<usize>> = by_inv.into_values().collect();
    let identity_code = encode(adj, &(0..n).collect::<Vec<_>>());
    let mut fixing = 0u64;
    let mut perm = vec![0usize; n];
    count_fixing(&slots, 0, &mut perm, adj, &identity_code, &mut fixing);
    let mut edge_sym = 1u64;
    for u in 0..n {
        for v in u..n {
            let m = adj[u][v];
            edge_sym *= factorial(m);
            if u == v {
                edge_sym *= 1u64 << m;
            }
        }
    }
    fixing * edge_sym
}

fn block_orders(blocks: &[Vec<usize>], i: usize, order: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if i == blocks.len() {
        f(order);
        return;
    }
    let mut b = blocks[i].clone();
    permutations(&mut b, 0, &mut |p: &[usize]| {
        let len = order.len();
        order.extend_from_slice(p);
        block_orders(blocks, i + 1, order, f);
        order.truncate(len);
    });
}

fn permutations(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, f);
        items.swap(k, i);
    }
}

fn count_fixing(slots: &[Vec<usize>], i: usize, perm: &mut Vec<usize>, adj: &[Vec<u32>], target: &[u32], count: &mut u64) {
    if i == slots.len() {
        // perm maps position u to vertex perm[u]
        if encode(adj, perm) == target {
            *count += 1;
        }
        return;
    }
    let mut images = slots[i].clone();
    let sources = slots[i].clone();
    permutations(&mut images, 0, &mut |p: &[usize]| {
        for (s, t) in sources.iter().zip(p) {
            perm[*s] = *t;
        }
        count_fixing(slots, i + 1, perm, adj, target, count);
    });
}

/// Constraints for [`enumerate_graphs`].
#[derive(Debug, Clone)]
pub struct GraphBounds {
    /// Maximum total vertex cost.
    pub budget: u32,
    /// Bound on genus plus the vertices' `hbar` offsets.
    pub genus_max: u32,
}

/// One representative per isomorphism class of connected graphs whose vertex
/// colours index `kinds`, in a deterministic order.
pub fn enumerate_graphs(kinds: &[VertexKind], bounds: &GraphBounds) -> Vec<FeynGraph> {
    enumerate_filtered(kinds, bounds, &|_| true)
}

type Key = (Vec<usize>, Vec<u32>);

struct Partial {
    colors: Vec<usize>,
    adj: Vec<Vec<u32>>,
    cost: u32,
    hbar: u32,
}

impl Partial {
    fn edges(&self) -> u32 {
        let n = self.colors.len();
        (0..n).map(|u| (u..n).map(|v| self.adj[u][v]).sum::<u32>()).sum()
    }

    fn valence(&self, u: usize) -> u32 {
        self.adj[u].iter().sum::<u32>() + self.adj[u][u]
    }
}

/// Grows graphs one vertex at a time: every connected graph arises from a
/// connected graph on one vertex fewer by attaching a vertex that is not a
/// cut vertex. Each level is reduced to canonical representatives.
pub(crate) fn enumerate_filtered(
    kinds: &[VertexKind],
    bounds: &GraphBounds,
    accept: &dyn Fn(&FeynGraph) -> bool,
) -> Vec<FeynGraph> {
    let mut out: BTreeMap<(usize, Key), FeynGraph> = BTreeMap::new();
    let mut level: BTreeMap<Key, Partial> = BTreeMap::new();
    for (c, k) in kinds.iter().enumerate() {
        if k.cost > bounds.budget || k.hbar > bounds.genus_max {
            continue;
        }
        for l in 0..=(k.max_valence / 2).min(bounds.genus_max - k.hbar) {
            let p = Partial { colors: vec![c], adj: vec![vec![l]], cost: k.cost, hbar: k.hbar };
            level.insert((vec![c], vec![l]), p);
        }
    }
    while !level.is_empty() {
        let mut next: BTreeMap<Key, Partial> = BTreeMap::new();
        for (key, g) in &level {
            let n = g.colors.len();
            let genus = g.edges() + 1 - n as u32;
            let fg = FeynGraph { colors: g.colors.clone(), adjacency: g.adj.clone(), aut: automorphisms(&g.colors, &g.adj) };
            if accept(&fg) {
                out.insert((n, key.clone()), fg);
            }
            let caps: Vec<u32> = (0..n).map(|u| kinds[g.colors[u]].max_valence - g.valence(u)).collect();
            for (c, k) in kinds.iter().enumerate() {
                if g.cost + k.cost > bounds.budget || genus + g.hbar + k.hbar > bounds.genus_max {
                    continue;
                }
                let slack = bounds.genus_max - genus - g.hbar - k.hbar;
                let mut att = vec![0u32; n];
                attachments(&caps, 0, &mut att, 0, k.max_valence, &mut |att: &[u32], t: u32| {
                    // t edges to the old graph raise the genus by t − 1, each loop by 1
                    if t == 0 || t - 1 > slack {
                        return;
                    }
                    for l in 0..=((k.max_valence - t) / 2).min(slack - (t - 1)) {
                        let mut colors = g.colors.clone();
                        colors.push(c);
                        let mut adj: Vec<Vec<u32>> = g.adj.iter().map(|r| {
                            let mut r = r.clone();
                            r.push(0);
                            r
                        }).collect();
                        adj.push(vec![0; n + 1]);
                        for u in 0..n {
                            adj[u][n] = att[u];
                            adj[n][u] = att[u];
                        }
                        adj[n][n] = l;
                        let (c2, a2) = canonical_form(&colors, &adj);
                        let key = (c2.clone(), encode(&a2, &(0..=n).collect::<Vec<_>>()));
                        next.entry(key).or_insert(Partial { colors: c2, adj: a2, cost: g.cost + k.cost, hbar: g.hbar + k.hbar });
                    }
                });
            }
        }
        level = next;
    }
    out.into_values().collect()
}

fn attachments(caps: &[u32], i: usize, att: &mut Vec<u32>, total: u32, max: u32, f: &mut dyn FnMut(&[u32], u32)) {
    if i == caps.len() {
        f(att, total);
        return;
    }
    let mut m = 0;
    while m <= caps[i] && total + m <= max {
        att[i] = m;
        attachments(caps, i + 1, att, total + m, max, f);
        m += 1;
    }
    att[i] = 0;
}
