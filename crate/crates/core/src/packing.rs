//! Disjoint out-dipath packing.
//!
//! [`vertex_disjoint_dipaths`] is the Menger step: unit vertex capacities
//! via vertex splitting, augmenting paths in ascending vertex order, and a
//! minimum vertex cut read off the final residual graph.
//!
//! [`extend_family`] performs one level of the recursive construction that
//! turns a thick tribe of out-dipaths into ever larger families of disjoint
//! out-dipaths with prescribed start vertices; [`pack_out_rays`] drives it
//! and [`assemble_positive`] adds the forked hats back on for patterns
//! whose tail is a single infinite phase.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::digraph::{Digraph, Embedding, VertexId};
use crate::error::GraphError;
use crate::ray::{Orientation, RaySpec, TailGen};
use crate::tribe::{forked_subtribe_with_limit, hat_vertices, Tribe, TribeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackingError {
    #[error("level {level}: layer of size {available} is below the demand {needed}")]
    LayerTooSmall { level: usize, needed: usize, available: usize },
    #[error("level {level}: {what} needs at least {needed} vertices")]
    LayerTooShort { level: usize, what: String, needed: usize },
    #[error("level {level}: reroute found {found} of {needed} disjoint dipaths (cut {cut:?})")]
    RerouteFailed { level: usize, needed: usize, found: usize, cut: Vec<VertexId> },
    #[error("level {level}: no layer meets the demand {demand} (largest layer has {largest})")]
    InsufficientTribe { level: usize, demand: usize, largest: usize },
    #[error("level {level}: counting guard {guard} failed ({value} < {bound})")]
    GuardViolated { level: usize, guard: &'static str, value: usize, bound: usize },
    #[error("family invariant violated: {0}")]
    InvariantViolated(String),
    #[error("member is not an out-dipath starting in the start set")]
    BadMember,
    #[error("pattern {0} does not end in a single infinite phase")]
    NotUbiquitous(String),
    #[error(transparent)]
    Tribe(#[from] TribeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Disjoint dipaths together with a vertex cut of the same size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointPaths {
    pub paths: Vec<Vec<VertexId>>,
    pub cut: Vec<VertexId>,
}

struct FlowEdge {
    to: usize,
    cap: usize,
    orig: usize,
    rev: usize,
}

struct Network {
    adj: Vec<Vec<FlowEdge>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network { adj: (0..n).map(|_| Vec::new()).collect() }
    }

    fn add(&mut self, a: usize, b: usize, cap: usize) {
        let ra = self.adj[b].len();
        let rb = self.adj[a].len();
        self.adj[a].push(FlowEdge { to: b, cap, orig: cap, rev: ra });
        self.adj[b].push(FlowEdge { to: a, cap: 0, orig: 0, rev: rb });
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for (ei, e) in self.adj[x].iter().enumerate() {
                if e.cap > 0 && !seen[e.to] {
                    seen[e.to] = true;
                    prev[e.to] = Some((x, ei));
                    if e.to == t {
                        q.clear();
                        break;
                    }
                    q.push_back(e.to);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut v = t;
        while let Some((u, ei)) = prev[v] {
            self.adj[u][ei].cap -= 1;
            let rev = self.adj[u][ei].rev;
            self.adj[v][rev].cap += 1;
            v = u;
        }
        true
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for e in &self.adj[x] {
                if e.cap > 0 && !seen[e.to] {
                    seen[e.to] = true;
                    q.push_back(e.to);
                }
            }
        }
        seen
    }
}

/// Maximum family of vertex-disjoint directed paths from `sources` to
/// `sinks` in the digraph given by `arcs`, with a certifying vertex cut.
///
/// Returned paths meet the sink set only at their last vertex and the
/// source set only at their first; a vertex in both sets is a zero-length
/// path.
pub fn vertex_disjoint_dipaths_in(
    arcs: &[(VertexId, VertexId)],
    sources: &[VertexId],
    sinks: &[VertexId],
) -> DisjointPaths {
    let verts: BTreeSet<VertexId> = arcs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .chain(sources.iter().copied())
        .chain(sinks.iter().copied())
        .collect();
    let verts: Vec<VertexId> = verts.into_iter().collect();
    let idx: HashMap<VertexId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = verts.len();
    let (s, t) = (2 * n, 2 * n + 1);
    let inf = n + 1;
    let mut net = Network::new(2 * n + 2);
    let src: BTreeSet<usize> = sources.iter().map(|v| idx[v]).collect();
    let snk: BTreeSet<usize> = sinks.iter().map(|v| idx[v]).collect();
    for &u in &src {
        net.add(s, 2 * u, inf);
    }
    for i in 0..n {
        net.add(2 * i, 2 * i + 1, 1);
    }
    let mut sorted: Vec<(usize, usize)> = arcs.iter().map(|(a, b)| (idx[a], idx[b])).filter(|(a, b)| a != b).collect();
    sorted.sort_unstable();
    sorted.dedup();
    for (a, b) in sorted {
        net.add(2 * a + 1, 2 * b, inf);
    }
    for &w in &snk {
        net.add(2 * w + 1, t, inf);
    }
    while net.augment(s, t) {}

    let reach = net.reachable(s);
    let cut: Vec<VertexId> = (0..n).filter(|&i| reach[2 * i] && !reach[2 * i + 1]).map(|i| verts[i]).collect();

    // decompose: every vertex carries at most one unit
    let mut paths = Vec::new();
    for &u in &src {
        let flow_in = net.adj[s].iter().find(|e| e.to == 2 * u).map(|e| inf - e.cap).unwrap_or(0);
        if flow_in == 0 {
            continue;
        }
        let mut path = vec![u];
        let mut cur = u;
        loop {
            let out = 2 * cur + 1;
            let next = net.adj[out].iter().position(|e| e.cap < e.orig);
            let Some(ei) = next else { break };
            let to = net.adj[out][ei].to;
            net.adj[out][ei].cap += 1;
            if to == t {
                break;
            }
            cur = to / 2;
            path.push(cur);
        }
        let end = path.iter().position(|v| snk.contains(v)).expect("flow paths end in a sink");
        path.truncate(end + 1);
        let start = path.iter().rposition(|v| src.contains(v)).expect("flow paths start in a source");
        paths.push(path[start..].iter().map(|&i| verts[i]).collect());
    }
    paths.sort();
    DisjointPaths { paths, cut }
}

/// [`vertex_disjoint_dipaths_in`] over all arcs of `h`.
pub fn vertex_disjoint_dipaths(h: &Digraph, sources: &[VertexId], sinks: &[VertexId]) -> DisjointPaths {
    let arcs: Vec<(VertexId, VertexId)> = h.arcs().iter().map(|a| (a.tail, a.head)).collect();
    vertex_disjoint_dipaths_in(&arcs, sources, sinks)
}

/// Checks that no dipath from `sources` to `sinks` survives deleting `cut`.
pub fn cut_separates(arcs: &[(VertexId, VertexId)], sources: &[VertexId], sinks: &[VertexId], cut: &[VertexId]) -> bool {
    let cut: HashSet<VertexId> = cut.iter().copied().collect();
    let sinks: HashSet<VertexId> = sinks.iter().copied().collect();
    let mut out: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for &(a, b) in arcs {
        out.entry(a).or_default().push(b);
    }
    let mut seen: HashSet<VertexId> = sources.iter().copied().filter(|v| !cut.contains(v)).collect();
    let mut q: VecDeque<VertexId> = seen.iter().copied().collect();
    while let Some(x) = q.pop_front() {
        if sinks.contains(&x) {
            return false;
        }
        for &y in out.get(&x).map(Vec::as_slice).unwrap_or(&[]) {
            if !cut.contains(&y) && seen.insert(y) {
                q.push_back(y);
            }
        }
    }
    true
}

/// Level-`ℓ` family: `ℓ` disjoint out-dipaths with a marker on each.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FamilyState {
    pub rays: Vec<Vec<VertexId>>,
    pub markers: Vec<usize>,
}

impl FamilyState {
    pub fn level(&self) -> usize {
        self.rays.len()
    }

    /// Vertices of all marker prefixes `R_k u_k`.
    pub fn prefix_union(&self) -> BTreeSet<VertexId> {
        self.rays
            .iter()
            .zip(&self.markers)
            .flat_map(|(r, &u)| r[..=u].iter().copied())
            .collect()
    }

    fn check(&self, x: &HashSet<VertexId>, d: &Digraph) -> Result<(), PackingError> {
        let mut seen = HashSet::new();
        for (k, r) in self.rays.iter().enumerate() {
            if !x.contains(&r[0]) {
                return Err(PackingError::InvariantViolated(format!("ray {k} starts outside the start set")));
            }
            if self.markers[k] >= r.len() {
                return Err(PackingError::InvariantViolated(format!("marker of ray {k} is off the ray")));
            }
            for v in r {
                if !seen.insert(*v) {
                    return Err(PackingError::InvariantViolated(format!("ray {k} meets another ray at {v}")));
                }
            }
            if d.dipath(r).is_err() {
                return Err(PackingError::InvariantViolated(format!("ray {k} is not a dipath")));
            }
        }
        Ok(())
    }
}

/// Counters recorded by one call of [`extend_family`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub level: usize,
    pub layer_index: usize,
    pub layer_size: usize,
    pub prefix_union: usize,
    pub demand: usize,
    pub deleted_by_prefixes: usize,
    pub survivors: usize,
    pub adopted: Vec<usize>,
    pub deleted_by_adoption: usize,
    pub remaining: usize,
    pub rerouted: Vec<usize>,
    pub menger_paths: usize,
    pub cut_size: usize,
}

#[allow(clippy::int_plus_one)]
impl LevelTrace {
    /// At least `ℓ² + 1` members survive the prefix deletions.
    pub fn survivors_guard(&self) -> bool {
        self.level == 0 || self.survivors >= self.level * self.level + 1
    }

    /// `|F'| >= (ℓ - m) ℓ + 1` with `m` adopted rays.
    pub fn remaining_guard(&self) -> bool {
        self.level == 0 || self.remaining >= (self.level - self.adopted.len()) * self.level + 1
    }
}

fn too_short(level: usize, what: impl Into<String>, needed: usize) -> PackingError {
    PackingError::LayerTooShort { level, what: what.into(), needed }
}

/// One induction step from level `ℓ` to `ℓ + 1` using `layer`, a set of
/// pairwise disjoint out-dipaths.
pub fn extend_family(
    state: &FamilyState,
    layer: &[Embedding],
    d: &Digraph,
) -> Result<(FamilyState, LevelTrace), PackingError> {
    let members: Vec<Vec<VertexId>> = layer.iter().map(|e| e.vertices.clone()).collect();
    extend_family_paths(state, &members, d)
}

fn extend_family_paths(
    state: &FamilyState,
    layer: &[Vec<VertexId>],
    d: &Digraph,
) -> Result<(FamilyState, LevelTrace), PackingError> {
    let l = state.level();
    let mut trace = LevelTrace { level: l, layer_size: layer.len(), ..Default::default() };

    if l == 0 {
        let first = layer.first().ok_or(PackingError::LayerTooSmall { level: 0, needed: 1, available: 0 })?;
        trace.demand = 1;
        trace.survivors = layer.len();
        trace.remaining = layer.len();
        return Ok((FamilyState { rays: vec![first.clone()], markers: vec![0] }, trace));
    }

    let prefix = state.prefix_union();
    trace.prefix_union = prefix.len();
    trace.demand = prefix.len() + l * l + 1;
    if layer.len() < trace.demand {
        return Err(PackingError::LayerTooSmall { level: l, needed: trace.demand, available: layer.len() });
    }

    // (a) drop members meeting a marker prefix
    let mut alive: Vec<usize> = (0..layer.len()).filter(|&i| !layer[i].iter().any(|v| prefix.contains(v))).collect();
    trace.deleted_by_prefixes = layer.len() - alive.len();
    trace.survivors = alive.len();
    if !trace.survivors_guard() {
        return Err(PackingError::GuardViolated { level: l, guard: "survivors >= l^2 + 1", value: alive.len(), bound: l * l + 1 });
    }

    let owner = |alive: &[usize]| -> HashMap<VertexId, usize> {
        alive.iter().flat_map(|&i| layer[i].iter().map(move |&v| (v, i))).collect()
    };
    let met = |ray: &[VertexId], own: &HashMap<VertexId, usize>| -> BTreeSet<usize> {
        ray.iter().filter_map(|v| own.get(v).copied()).collect()
    };

    // (b) adopt rays meeting at most ℓ of the remaining members
    let mut next_rays: Vec<Option<(Vec<VertexId>, usize)>> = vec![None; l];
    loop {
        let own = owner(&alive);
        let pick = (0..l).find(|&i| next_rays[i].is_none() && met(&state.rays[i], &own).len() <= l);
        let Some(i) = pick else { break };
        let ray = &state.rays[i];
        let u = state.markers[i] + 1;
        if u >= ray.len() {
            return Err(too_short(l, format!("adopted ray {i}"), u + 1));
        }
        let hit = met(ray, &own);
        trace.deleted_by_adoption += hit.len();
        alive.retain(|m| !hit.contains(m));
        next_rays[i] = Some((ray.clone(), u));
        trace.adopted.push(i);
    }
    trace.remaining = alive.len();
    if !trace.remaining_guard() {
        let bound = (l - trace.adopted.len()) * l + 1;
        return Err(PackingError::GuardViolated { level: l, guard: "|F'| >= (l - m) l + 1", value: alive.len(), bound });
    }

    let j_set: Vec<usize> = (0..l).filter(|&i| next_rays[i].is_none()).collect();
    trace.rerouted = j_set.clone();

    // (c) c_j: first vertex where R_j meets its ℓ-th member of F'
    let own = owner(&alive);
    let mut cpos: BTreeMap<usize, usize> = BTreeMap::new();
    for &j in &j_set {
        let mut seen = BTreeSet::new();
        let ray = &state.rays[j];
        let c = ray
            .iter()
            .position(|v| {
                if let Some(&m) = own.get(v) {
                    seen.insert(m);
                }
                seen.len() == l
            })
            .ok_or_else(|| PackingError::InvariantViolated(format!("ray {j} meets fewer than {} members", l + 1)))?;
        if c <= state.markers[j] {
            return Err(PackingError::InvariantViolated(format!("c_{j} does not lie beyond the marker")));
        }
        cpos.insert(j, c);
    }

    // (d) new ray avoiding every R_j c_j
    let blocked: HashSet<VertexId> = j_set.iter().flat_map(|&j| state.rays[j][..=cpos[&j]].iter().copied()).collect();
    let new_idx = *alive
        .iter()
        .find(|&&i| !layer[i].iter().any(|v| blocked.contains(v)))
        .ok_or_else(|| PackingError::InvariantViolated("no member avoids the truncated rays".into()))?;

    let mut rays = Vec::with_capacity(l + 1);
    let mut markers = Vec::with_capacity(l + 1);

    if !j_set.is_empty() {
        // (e) w_i beyond every vertex of the segments u_j R_j c_j
        let segs: HashSet<VertexId> = j_set
            .iter()
            .flat_map(|&j| state.rays[j][state.markers[j]..=cpos[&j]].iter().copied())
            .collect();
        let mut arcs: Vec<(VertexId, VertexId)> = Vec::new();
        for &j in &j_set {
            let seg = &state.rays[j][state.markers[j]..=cpos[&j]];
            arcs.extend(seg.windows(2).map(|w| (w[0], w[1])));
        }
        let mut w_of: HashMap<VertexId, (usize, usize)> = HashMap::new();
        for &i in alive.iter().filter(|&&i| i != new_idx) {
            let s = &layer[i];
            let w = s.iter().rposition(|v| segs.contains(v)).map_or(0, |p| p + 1);
            if w >= s.len() {
                return Err(too_short(l, format!("layer member {i}"), w + 1));
            }
            arcs.extend(s[..=w].windows(2).map(|p| (p[0], p[1])));
            w_of.insert(s[w], (i, w));
        }

        // (f) Menger between U = {u_j} and W = {w_i}
        let sources: Vec<VertexId> = j_set.iter().map(|&j| state.rays[j][state.markers[j]]).collect();
        let sinks: Vec<VertexId> = w_of.keys().copied().collect();
        let dp = vertex_disjoint_dipaths_in(&arcs, &sources, &sinks);
        trace.menger_paths = dp.paths.len();
        trace.cut_size = dp.cut.len();
        if dp.paths.len() < j_set.len() {
            return Err(PackingError::RerouteFailed { level: l, needed: j_set.len(), found: dp.paths.len(), cut: dp.cut });
        }
        let by_start: HashMap<VertexId, &Vec<VertexId>> = dp.paths.iter().map(|p| (p[0], p)).collect();
        for &j in &j_set {
            let u = state.markers[j];
            let p = by_start[&state.rays[j][u]];
            let (i, w) = w_of[p.last().expect("non-empty path")];
            let mut ray: Vec<VertexId> = state.rays[j][..u].to_vec();
            ray.extend_from_slice(p);
            let marker = ray.len() - 1;
            ray.extend_from_slice(&layer[i][w + 1..]);
            next_rays[j] = Some((ray, marker));
        }
    }

    for (k, slot) in next_rays.into_iter().enumerate() {
        let (r, u) = slot.expect("every ray adopted or rerouted");
        if u <= state.markers[k] || r[..=state.markers[k]] != state.rays[k][..=state.markers[k]] {
            return Err(PackingError::InvariantViolated(format!("marker prefix of ray {k} did not grow")));
        }
        rays.push(r);
        markers.push(u);
    }
    rays.push(layer[new_idx].clone());
    markers.push(0);
    let next = FamilyState { rays, markers };
    let starts: HashSet<VertexId> = next.rays.iter().map(|r| r[0]).collect();
    next.check(&starts, d)?;
    Ok((next, trace))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packing {
    pub rays: Vec<Embedding>,
    pub trace: Vec<LevelTrace>,
}

/// `n` pairwise disjoint out-dipaths of length at least `min_len` whose
/// first vertices lie in `x`, built level by level from the tribe.
pub fn pack_out_rays(
    d: &Digraph,
    tribe: &Tribe,
    x: &BTreeSet<VertexId>,
    n: usize,
    min_len: usize,
) -> Result<Packing, PackingError> {
    pack_out_rays_avoiding(d, tribe, x, n, min_len, &BTreeSet::new())
}

/// [`pack_out_rays`] inside the induced subdigraph `d - avoid`.
pub fn pack_out_rays_avoiding(
    d: &Digraph,
    tribe: &Tribe,
    x: &BTreeSet<VertexId>,
    n: usize,
    min_len: usize,
    avoid: &BTreeSet<VertexId>,
) -> Result<Packing, PackingError> {
    let layers: Vec<Vec<Vec<VertexId>>> = tribe
        .layers
        .iter()
        .map(|l| l.iter().map(|e| e.vertices.clone()).collect())
        .collect();
    for e in tribe.members() {
        if !e.is_dipath() || !x.contains(&e.first()) || e.vertices.iter().any(|v| avoid.contains(v)) {
            return Err(PackingError::BadMember);
        }
    }
    let xs: HashSet<VertexId> = x.iter().copied().collect();
    let mut state = FamilyState::default();
    let mut trace = Vec::new();
    while state.level() < n {
        let l = state.level();
        let demand = if l == 0 { 1 } else { state.prefix_union().len() + l * l + 1 };
        let largest = layers.iter().map(Vec::len).max().unwrap_or(0);
        let li = layers
            .iter()
            .position(|layer| layer.len() >= demand)
            .ok_or(PackingError::InsufficientTribe { level: l, demand, largest })?;
        let (next, mut t) = extend_family_paths(&state, &layers[li], d)?;
        t.layer_index = li;
        next.check(&xs, d)?;
        state = next;
        trace.push(t);
    }
    let mut rays = Vec::with_capacity(n);
    for (k, r) in state.rays.iter().enumerate() {
        if r.len() < min_len + 1 {
            return Err(too_short(n, format!("final ray {k}"), min_len + 1));
        }
        rays.push(d.dipath(r)?);
    }
    Ok(Packing { rays, trace })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembly {
    pub embeddings: Vec<Embedding>,
    pub forked: Option<Tribe>,
    pub packing: Packing,
}

/// `n` disjoint embeddings of the pattern prefix (length at least
/// `min_len`) for a pattern whose tail is a single infinite phase.
///
/// Hats (all finite phases) come from a forked subtribe; the out-dipaths
/// continuing them are packed in `d` minus every hat.
pub fn assemble_positive(d: &Digraph, tribe: &Tribe, n: usize, min_len: usize) -> Result<Assembly, PackingError> {
    let pattern = tribe.pattern.normalized();
    match pattern.tail {
        TailGen::AllOut => assemble_out(d, tribe, &pattern, n, min_len),
        TailGen::AllIn => {
            let flip = |e: &Embedding, p: &RaySpec| Embedding {
                forward: e.forward.iter().map(|f| !f).collect(),
                pattern: Some(p.clone()),
                ..e.clone()
            };
            let rp = pattern.reverse();
            let rd = d.reversed();
            let rt = Tribe {
                layers: tribe.layers.iter().map(|l| l.iter().map(|e| flip(e, &rp)).collect()).collect(),
                pattern: rp.clone(),
                hat_len: tribe.hat_len,
            };
            let mut a = assemble_out(&rd, &rt, &rp, n, min_len)?;
            a.embeddings = a.embeddings.iter().map(|e| flip(e, &pattern)).collect();
            Ok(a)
        }
        _ => Err(PackingError::NotUbiquitous(pattern.to_string())),
    }
}

fn assemble_out(d: &Digraph, tribe: &Tribe, pattern: &RaySpec, n: usize, min_len: usize) -> Result<Assembly, PackingError> {
    let h = pattern.finite_part_len().expect("single-phase tail");
    if h == 0 {
        let x: BTreeSet<VertexId> = tribe.members().map(Embedding::first).collect();
        let out = Tribe { layers: tribe.layers.clone(), pattern: pattern.clone(), hat_len: 0 };
        let packing = pack_out_rays(d, &out, &x, n, min_len)?;
        let embeddings = packing
            .rays
            .iter()
            .map(|r| Embedding { pattern: Some(pattern.clone()), ..r.clone() })
            .collect();
        return Ok(Assembly { embeddings, forked: None, packing });
    }

    let hatted = Tribe::new(
        pattern.clone(),
        h,
        tribe
            .layers
            .iter()
            .map(|l| l.iter().filter(|e| e.len() > h).cloned().collect())
            .collect(),
    )?;
    let widest = hatted.layers.iter().map(Vec::len).max().unwrap_or(0);
    let mut max_layer = widest.saturating_sub(h + 1);
    let forked = loop {
        match forked_subtribe_with_limit(&hatted, max_layer, usize::MAX) {
            Ok((f, _)) => break f,
            Err(TribeError::InsufficientThickness { .. }) if max_layer > n => max_layer -= 1,
            Err(e) => return Err(e.into()),
        }
    };

    let mut x = BTreeSet::new();
    let mut y = BTreeSet::new();
    let mut start_of: BTreeMap<VertexId, &Embedding> = BTreeMap::new();
    for e in forked.members() {
        x.insert(e.vertices[h + 1]);
        y.extend(hat_vertices(e, h).iter().copied());
        start_of.entry(e.vertices[h + 1]).or_insert(e);
    }
    let out_layers: Vec<Vec<Embedding>> = forked
        .layers
        .iter()
        .filter(|l| !l.is_empty())
        .map(|l| l.iter().map(|e| d.dipath(&e.vertices[h + 1..])).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let out = Tribe { layers: out_layers, pattern: RaySpec::all_out(), hat_len: 0 };
    let packing = pack_out_rays_avoiding(d, &out, &x, n, min_len.saturating_sub(h + 1), &y)?;

    let mut embeddings = Vec::with_capacity(n);
    for r in &packing.rays {
        let hat = start_of[&r.first()];
        let mut vs = hat.vertices[..=h].to_vec();
        vs.extend_from_slice(&r.vertices);
        embeddings.push(d.embed_walk(&vs, pattern)?);
    }
    for (i, a) in embeddings.iter().enumerate() {
        if embeddings[i + 1..].iter().any(|b| a.meets(b)) {
            return Err(PackingError::InvariantViolated("assembled copies intersect".into()));
        }
    }
    Ok(Assembly { embeddings, forked: Some(forked), packing })
}

/// Orientation word of an embedding, for reporting.
pub fn orientation_word(e: &Embedding) -> String {
    e.orientations()
        .iter()
        .map(|o| if *o == Orientation::Out { '+' } else { '-' })
        .collect()
}
