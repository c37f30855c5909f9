//! Brute-force ground truth.
//!
//! Every search here enumerates candidates exhaustively and checks
//! feasibility only; node budgets keep them usable on small inputs.

use std::collections::{BTreeSet, HashSet};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::digraph::{Digraph, Embedding, RayLabel, VertexId};
use crate::error::GraphError;
use crate::ray::{prefix_isomorphic, RaySpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub max_results: usize,
    /// Advisory wall-clock hint in seconds.
    pub time_hint: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 50_000_000, max_results: 2_000_000, time_hint: 60.0 }
    }
}

impl FromStr for SearchBudget {
    type Err = String;

    /// `key=value` pairs separated by commas; keys `nodes`, `results`,
    /// `time`. Missing keys keep their defaults.
    fn from_str(s: &str) -> Result<Self, String> {
        let mut b = SearchBudget::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let bad = |_| format!("bad value for {k}: {v:?}");
            match k.trim() {
                "nodes" => b.max_nodes = v.trim().parse().map_err(bad)?,
                "results" => b.max_results = v.trim().parse().map_err(bad)?,
                "time" => b.time_hint = v.trim().parse().map_err(|_| format!("bad value for time: {v:?}"))?,
                other => return Err(format!("unknown budget key {other:?}")),
            }
        }
        if b.max_nodes == 0 || b.max_results == 0 || b.time_hint <= 0.0 {
            return Err("budget values must be positive".into());
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search budget exceeded (best found {best})")]
    BudgetExceeded { best: usize },
    #[error("digraph too large for the oracle ({0} vertices)")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CopyCount {
    AtLeast(usize),
    Exactly(usize),
    BudgetExceeded { best: usize },
}

/// Every embedding of the first `prefix_len` arcs of `spec`, from every
/// live vertex.
pub fn all_embeddings(d: &Digraph, spec: &RaySpec, prefix_len: usize, max_results: usize) -> Result<Vec<Embedding>, GraphError> {
    let mut out = Vec::new();
    for v in d.vertices() {
        let left = max_results.saturating_sub(out.len());
        out.extend(d.trace_pattern(v, spec, prefix_len, left)?);
    }
    Ok(out)
}

struct Bits(Vec<u64>);

impl Bits {
    fn of(vs: &[VertexId], n: usize) -> Bits {
        let mut b = vec![0u64; n.div_ceil(64)];
        for v in vs {
            b[v.0 / 64] |= 1 << (v.0 % 64);
        }
        Bits(b)
    }

    fn disjoint(&self, o: &[u64]) -> bool {
        self.0.iter().zip(o).all(|(a, b)| a & b == 0)
    }

    fn toggle(&self, o: &mut [u64]) {
        for (a, b) in o.iter_mut().zip(&self.0) {
            *a ^= b;
        }
    }
}

/// Exact search for `target` pairwise vertex-disjoint embeddings of the
/// pattern prefix.
pub fn max_disjoint_copies(d: &Digraph, spec: &RaySpec, prefix_len: usize, target: usize, budget: SearchBudget) -> CopyCount {
    let embs = match all_embeddings(d, spec, prefix_len, budget.max_results) {
        Ok(e) => e,
        Err(_) => return CopyCount::BudgetExceeded { best: 0 },
    };
    let n = d.id_bound();
    let sets: BTreeSet<Vec<VertexId>> = embs
        .iter()
        .map(|e| {
            let mut v = e.vertices.clone();
            v.sort();
            v
        })
        .collect();
    let cands: Vec<Bits> = sets.iter().map(|v| Bits::of(v, n)).collect();
    let mut used = vec![0u64; n.div_ceil(64)];
    let mut nodes = 0u64;
    let mut best = 0;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        cands: &[Bits],
        from: usize,
        depth: usize,
        target: usize,
        used: &mut [u64],
        nodes: &mut u64,
        limit: u64,
        best: &mut usize,
    ) -> Result<bool, ()> {
        *nodes += 1;
        if *nodes > limit {
            return Err(());
        }
        *best = (*best).max(depth);
        if depth == target {
            return Ok(true);
        }
        for j in from..cands.len() {
            if cands[j].disjoint(used) {
                cands[j].toggle(used);
                let r = rec(cands, j + 1, depth + 1, target, used, nodes, limit, best);
                cands[j].toggle(used);
                if r? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    match rec(&cands, 0, 0, target, &mut used, &mut nodes, budget.max_nodes, &mut best) {
        Ok(true) => CopyCount::AtLeast(target),
        Ok(false) => CopyCount::Exactly(best),
        Err(()) => CopyCount::BudgetExceeded { best },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Confinement {
    Confined(RayLabel),
    Mixed(Vec<RayLabel>),
}

/// Whether the last `window` arcs of `emb` run consecutively along a
/// single constituent.
pub fn tail_confinement(d: &Digraph, emb: &Embedding, window: usize) -> Confinement {
    let start = emb.len().saturating_sub(window);
    let arcs: Vec<_> = emb.arcs[start..].iter().map(|&a| d.arc(a)).collect();
    let labels: BTreeSet<RayLabel> = arcs.iter().filter_map(|a| a.label).collect();
    let single = labels.len() == 1 && arcs.iter().all(|a| a.label.is_some());
    if !single {
        return Confinement::Mixed(labels.into_iter().collect());
    }
    let idx: Vec<i64> = arcs.iter().map(|a| a.arc_index as i64).collect();
    let steps: HashSet<i64> = idx.windows(2).map(|w| w[1] - w[0]).collect();
    let label = *labels.iter().next().expect("one label");
    if steps.len() <= 1 && steps.iter().all(|s| s.abs() == 1) {
        Confinement::Confined(label)
    } else {
        Confinement::Mixed(vec![label])
    }
}

/// Exact maximum number of vertex-disjoint `sources`-`sinks` dipaths.
///
/// Candidate paths meet the source set only at their first vertex and the
/// sink set only at their last; branching is over which source each path
/// starts from.
pub fn brute_max_disjoint_dipaths(
    arcs: &[(VertexId, VertexId)],
    sources: &[VertexId],
    sinks: &[VertexId],
    budget: SearchBudget,
) -> Result<usize, OracleError> {
    let verts: BTreeSet<VertexId> = arcs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .chain(sources.iter().copied())
        .chain(sinks.iter().copied())
        .collect();
    let verts: Vec<VertexId> = verts.into_iter().collect();
    if verts.len() > 64 {
        return Err(OracleError::TooLarge(verts.len()));
    }
    let ix = |v: VertexId| verts.binary_search(&v).expect("collected");
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for &(a, b) in arcs {
        if a != b {
            out[ix(a)].push(ix(b));
        }
    }
    let u_mask: u64 = sources.iter().fold(0, |m, &v| m | 1 << ix(v));
    let w_mask: u64 = sinks.iter().fold(0, |m, &v| m | 1 << ix(v));
    let srcs: Vec<usize> = {
        let mut s: Vec<usize> = sources.iter().map(|&v| ix(v)).collect();
        s.sort();
        s.dedup();
        s
    };

    let mut nodes = 0u64;
    let mut by_source: Vec<Vec<u64>> = Vec::new();
    for &u in &srcs {
        let mut found = Vec::new();
        let mut stack = vec![(u, 1u64 << u)];
        while let Some((x, mask)) = stack.pop() {
            nodes += 1;
            if nodes > budget.max_nodes {
                return Err(OracleError::BudgetExceeded { best: 0 });
            }
            if w_mask >> x & 1 == 1 {
                found.push(mask);
                continue;
            }
            for &y in &out[x] {
                if mask >> y & 1 == 0 && u_mask >> y & 1 == 0 {
                    stack.push((y, mask | 1 << y));
                }
            }
        }
        by_source.push(found);
    }

    fn rec(by_source: &[Vec<u64>], i: usize, used: u64, nodes: &mut u64, limit: u64, best: &mut usize, depth: usize) -> Result<(), ()> {
        *nodes += 1;
        if *nodes > limit {
            return Err(());
        }
        if i == by_source.len() {
            *best = (*best).max(depth);
            return Ok(());
        }
        rec(by_source, i + 1, used, nodes, limit, best, depth)?;
        for &p in &by_source[i] {
            if p & used == 0 {
                rec(by_source, i + 1, used | p, nodes, limit, best, depth + 1)?;
            }
        }
        Ok(())
    }

    let mut best = 0;
    rec(&by_source, 0, 0, &mut nodes, budget.max_nodes, &mut best, 0).map_err(|()| OracleError::BudgetExceeded { best })?;
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Periodicity {
    Aperiodic,
    PeriodicWitness(usize, usize),
}

/// First pair of shifts `k1 < k2 <= shift_bound` whose tails agree on a
/// window of `window` arcs.
pub fn periodicity_probe(spec: &RaySpec, shift_bound: usize, window: usize) -> Periodicity {
    for k1 in 0..shift_bound {
        for k2 in k1 + 1..=shift_bound {
            if prefix_isomorphic(spec, k1, spec, k2, window) {
                return Periodicity::PeriodicWitness(k1, k2);
            }
        }
    }
    Periodicity::Aperiodic
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::DigraphBuilder;
    use crate::ray::Orientation;

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn disjoint_copies_in_constituent_union() {
        let spec = RaySpec::periodic(&[1, 1], Orientation::Out);
        let mut b = DigraphBuilder::new();
        for n in 0..=2 {
            b.add_ray_prefix(RayLabel::new(n, 2), &spec, 20).unwrap();
        }
        let d = b.freeze();
        assert_eq!(max_disjoint_copies(&d, &spec, 10, 3, SearchBudget::default()), CopyCount::AtLeast(3));
    }

    #[test]
    fn single_dipath_has_one_copy() {
        let mut b = DigraphBuilder::new();
        b.add_ray_prefix(RayLabel::new(0, 0), &RaySpec::all_out(), 12).unwrap();
        let d = b.freeze();
        assert_eq!(max_disjoint_copies(&d, &RaySpec::all_out(), 12, 2, SearchBudget::default()), CopyCount::Exactly(1));
    }

    #[test]
    fn small_budget_is_reported() {
        let spec = RaySpec::periodic(&[1, 1], Orientation::Out);
        let mut b = DigraphBuilder::new();
        b.add_ray_prefix(RayLabel::new(0, 0), &spec, 30).unwrap();
        let d = b.freeze();
        let budget = SearchBudget { max_nodes: 3, ..Default::default() };
        assert!(matches!(max_disjoint_copies(&d, &spec, 2, 20, budget), CopyCount::BudgetExceeded { .. }));
    }

    #[test]
    fn confinement_of_constituent_prefix() {
        let spec = RaySpec::periodic(&[2, 1], Orientation::Out);
        let mut b = DigraphBuilder::new();
        let o0 = b.add_ray_prefix(RayLabel::new(0, 0), &spec, 10).unwrap();
        let o1 = b.add_ray_prefix(RayLabel::new(0, 1), &spec, 10).unwrap();
        let d0 = b.freeze();
        let r = d0.ray(RayLabel::new(0, 0)).unwrap();
        let e = d0.embed_walk(&r, &spec).unwrap();
        assert_eq!(tail_confinement(&d0, &e, 6), Confinement::Confined(RayLabel::new(0, 0)));

        // glue position 3 of both and walk across
        let a = b.ray_vertex(RayLabel::new(0, 0), 3).unwrap();
        let c = b.ray_vertex(RayLabel::new(0, 1), 3).unwrap();
        let g = b.identify(a, c).unwrap();
        let d = b.freeze();
        let mut walk: Vec<VertexId> = (0..3).map(|k| d.ray_vertex(RayLabel::new(0, 0), k).unwrap()).collect();
        walk.push(g);
        walk.extend((4..=6).map(|k| d.ray_vertex(RayLabel::new(0, 1), k).unwrap()));
        assert_eq!(walk[0], o0);
        let e = d.embed_walk(&walk, &spec).unwrap();
        assert!(matches!(tail_confinement(&d, &e, 5), Confinement::Mixed(_)));
        assert_ne!(o0, o1);
    }

    #[test]
    fn brute_dipath_counts() {
        let single = [(v(0), v(1)), (v(1), v(2))];
        assert_eq!(brute_max_disjoint_dipaths(&single, &[v(0)], &[v(2)], SearchBudget::default()), Ok(1));
        let par: Vec<_> = (0..4).flat_map(|k| [(v(3 * k), v(3 * k + 1)), (v(3 * k + 1), v(3 * k + 2))]).collect();
        let us: Vec<_> = (0..4).map(|k| v(3 * k)).collect();
        let ws: Vec<_> = (0..4).map(|k| v(3 * k + 2)).collect();
        assert_eq!(brute_max_disjoint_dipaths(&par, &us, &ws, SearchBudget::default()), Ok(4));
        let bottleneck = [(v(0), v(2)), (v(1), v(2)), (v(2), v(3)), (v(2), v(4))];
        assert_eq!(brute_max_disjoint_dipaths(&bottleneck, &[v(0), v(1)], &[v(3), v(4)], SearchBudget::default()), Ok(1));
    }

    #[test]
    fn periodicity_examples() {
        let alt = RaySpec::periodic(&[1, 1], Orientation::Out);
        assert_eq!(periodicity_probe(&alt, 4, 100), Periodicity::PeriodicWitness(0, 2));
        assert_eq!(periodicity_probe(&RaySpec::all_out(), 2, 10), Periodicity::PeriodicWitness(0, 1));
        let grow = RaySpec::growing(1, 1, Orientation::Out);
        assert_eq!(periodicity_probe(&grow, 30, 100), Periodicity::Aperiodic);
    }

    #[test]
    fn budget_parsing() {
        let b: SearchBudget = "nodes=10, results=5".parse().unwrap();
        assert_eq!((b.max_nodes, b.max_results), (10, 5));
        assert!("nodes=0".parse::<SearchBudget>().is_err());
        assert!("depth=3".parse::<SearchBudget>().is_err());
    }
}
