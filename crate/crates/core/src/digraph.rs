//! Finite multidigraphs built from labeled ray prefixes.
//!
//! Vertices keep the id they were created with; identifying two vertices
//! keeps the smaller id live and records the other as an alias. Arcs are
//! never merged or dropped, so every arc of a constituent ray `R(n, m)`
//! stays addressable by `(label, arc_index)` after any number of
//! identifications.
//!
//! Mutation happens on a [`DigraphBuilder`]; [`DigraphBuilder::freeze`]
//! produces an immutable [`Digraph`] with sorted adjacency, which is what
//! every query runs against.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::ray::{Orientation, RaySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub usize);

/// Index `(n, m)` of a constituent ray, `n <= m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct RayLabel {
    pub n: usize,
    pub m: usize,
}

impl RayLabel {
    pub fn new(n: usize, m: usize) -> Self {
        RayLabel { n, m }
    }
}

impl From<[usize; 2]> for RayLabel {
    fn from([n, m]: [usize; 2]) -> Self {
        RayLabel { n, m }
    }
}

impl From<RayLabel> for [usize; 2] {
    fn from(l: RayLabel) -> Self {
        [l.n, l.m]
    }
}

impl fmt::Display for RayLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R({},{})", self.n, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
    pub label: Option<RayLabel>,
    pub arc_index: usize,
    orig_tail: VertexId,
    orig_head: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identification {
    pub step: usize,
    #[serde(rename = "merged_id")]
    pub merged: VertexId,
    pub members: [VertexId; 2],
}

/// An injective walk in the underlying undirected graph together with the
/// direction in which each arc is traversed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Embedding {
    pub vertices: Vec<VertexId>,
    pub arcs: Vec<ArcId>,
    /// `forward[i]` iff arc `i` is traversed from its tail to its head.
    pub forward: Vec<bool>,
    pub pattern: Option<RaySpec>,
}

impl Embedding {
    pub fn trivial(v: VertexId) -> Self {
        Embedding { vertices: vec![v], arcs: Vec::new(), forward: Vec::new(), pattern: None }
    }

    /// Number of arcs.
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().expect("embeddings have at least one vertex")
    }

    pub fn orientations(&self) -> Vec<Orientation> {
        self.forward
            .iter()
            .map(|&f| if f { Orientation::Out } else { Orientation::In })
            .collect()
    }

    pub fn realizes(&self, spec: &RaySpec) -> bool {
        self.orientations().iter().enumerate().all(|(i, o)| spec.orientation_at(i) == *o)
    }

    pub fn is_dipath(&self) -> bool {
        self.forward.iter().all(|&f| f)
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.vertices.iter().copied().collect()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn meets(&self, other: &Embedding) -> bool {
        let mine = self.vertex_set();
        other.vertices.iter().any(|v| mine.contains(v))
    }

    /// The initial segment with `len` arcs.
    pub fn prefix(&self, len: usize) -> Embedding {
        let len = len.min(self.len());
        Embedding {
            vertices: self.vertices[..=len].to_vec(),
            arcs: self.arcs[..len].to_vec(),
            forward: self.forward[..len].to_vec(),
            pattern: self.pattern.clone(),
        }
    }

    /// The segment starting at vertex position `k`.
    pub fn suffix(&self, k: usize) -> Embedding {
        Embedding {
            vertices: self.vertices[k..].to_vec(),
            arcs: self.arcs[k..].to_vec(),
            forward: self.forward[k..].to_vec(),
            pattern: self.pattern.as_ref().map(|p| p.tail_spec(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Core {
    /// Alias sets by original id; `Some` exactly for live vertices.
    aliases: Vec<Option<Vec<VertexId>>>,
    /// Original id to live representative.
    rep: Vec<VertexId>,
    arcs: Vec<Arc>,
    identifications: Vec<Identification>,
    /// Original vertex ids of every constituent, by position.
    rays: BTreeMap<RayLabel, Vec<VertexId>>,
    position: Vec<Option<(RayLabel, usize)>>,
}

impl Core {
    fn push_vertex(&mut self, pos: Option<(RayLabel, usize)>) -> VertexId {
        let id = VertexId(self.aliases.len());
        self.aliases.push(Some(vec![id]));
        self.rep.push(id);
        self.position.push(pos);
        id
    }

    fn is_live(&self, v: VertexId) -> bool {
        matches!(self.aliases.get(v.0), Some(Some(_)))
    }

    fn resolve(&self, orig: VertexId) -> VertexId {
        self.rep[orig.0]
    }
}

#[derive(Debug, Clone, Default)]
pub struct DigraphBuilder {
    core: Core,
    consumed: HashMap<VertexId, usize>,
}

impl DigraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.core.push_vertex(None)
    }

    /// Adds an unlabeled arc between live vertices.
    pub fn add_arc(&mut self, tail: VertexId, head: VertexId) -> Result<ArcId, GraphError> {
        for v in [tail, head] {
            if !self.core.is_live(v) {
                return Err(GraphError::DeadVertex(v));
            }
        }
        let id = ArcId(self.core.arcs.len());
        self.core.arcs.push(Arc { tail, head, label: None, arc_index: id.0, orig_tail: tail, orig_head: head });
        Ok(id)
    }

    /// Adds `length + 1` fresh vertices and `length` arcs realizing the first
    /// `length` orientations of `spec`; returns the origin.
    pub fn add_ray_prefix(&mut self, label: RayLabel, spec: &RaySpec, length: usize) -> Result<VertexId, GraphError> {
        if label.n > label.m {
            return Err(GraphError::InvalidLabel(label));
        }
        if self.core.rays.contains_key(&label) {
            return Err(GraphError::DuplicateLabel(label));
        }
        if length == 0 {
            return Err(GraphError::EmptyPrefix);
        }
        let verts: Vec<VertexId> = (0..=length).map(|k| self.core.push_vertex(Some((label, k)))).collect();
        for k in 0..length {
            let (tail, head) = match spec.orientation_at(k) {
                Orientation::Out => (verts[k], verts[k + 1]),
                Orientation::In => (verts[k + 1], verts[k]),
            };
            self.core.arcs.push(Arc { tail, head, label: Some(label), arc_index: k, orig_tail: tail, orig_head: head });
        }
        let first = verts[0];
        self.core.rays.insert(label, verts);
        Ok(first)
    }

    /// Identifies `u` and `v`, recording the identification as the next step.
    pub fn identify(&mut self, u: VertexId, v: VertexId) -> Result<VertexId, GraphError> {
        let step = self.core.identifications.len();
        self.identify_at(u, v, step)
    }

    pub fn identify_at(&mut self, u: VertexId, v: VertexId, step: usize) -> Result<VertexId, GraphError> {
        if u == v {
            return Err(GraphError::SelfIdentification(u));
        }
        for w in [u, v] {
            if !self.core.is_live(w) {
                return Err(GraphError::DeadVertex(w));
            }
            if self.consumed.get(&w) == Some(&step) {
                return Err(GraphError::AlreadyIdentified(w, step));
            }
        }
        let (keep, gone) = if u < v { (u, v) } else { (v, u) };
        let moved = self.core.aliases[gone.0].take().expect("live");
        let kept = self.core.aliases[keep.0].as_mut().expect("live");
        kept.extend(moved.iter().copied());
        kept.sort();
        for a in moved {
            self.core.rep[a.0] = keep;
        }
        for arc in &mut self.core.arcs {
            if arc.tail == gone {
                arc.tail = keep;
            }
            if arc.head == gone {
                arc.head = keep;
            }
        }
        self.core.identifications.push(Identification { step, merged: keep, members: [u, v] });
        self.consumed.insert(keep, step);
        Ok(keep)
    }

    pub fn resolve(&self, orig: VertexId) -> VertexId {
        self.core.resolve(orig)
    }

    /// Live vertex at `pos` on constituent `label`.
    pub fn ray_vertex(&self, label: RayLabel, pos: usize) -> Option<VertexId> {
        self.core.rays.get(&label).and_then(|r| r.get(pos)).map(|&o| self.core.resolve(o))
    }

    pub fn freeze(&self) -> Digraph {
        Digraph::from_core(self.core.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    core: Core,
    out_adj: Vec<Vec<ArcId>>,
    in_adj: Vec<Vec<ArcId>>,
    /// Incident arcs ignoring direction: (neighbor, arc, traversed forward).
    und_adj: Vec<Vec<(VertexId, ArcId, bool)>>,
    ray_arcs: BTreeMap<RayLabel, Vec<ArcId>>,
}

impl Digraph {
    fn from_core(core: Core) -> Self {
        let n = core.aliases.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut und_adj = vec![Vec::new(); n];
        for (i, a) in core.arcs.iter().enumerate() {
            out_adj[a.tail.0].push(ArcId(i));
            in_adj[a.head.0].push(ArcId(i));
            und_adj[a.tail.0].push((a.head, ArcId(i), true));
            und_adj[a.head.0].push((a.tail, ArcId(i), false));
        }
        for l in &mut out_adj {
            l.sort_by_key(|&id| (core.arcs[id.0].head, id));
        }
        for l in &mut in_adj {
            l.sort_by_key(|&id| (core.arcs[id.0].tail, id));
        }
        for l in &mut und_adj {
            l.sort_by_key(|&(w, id, f)| (w, id, !f));
        }
        let mut ray_arcs: BTreeMap<RayLabel, Vec<ArcId>> = BTreeMap::new();
        for (l, r) in &core.rays {
            ray_arcs.insert(*l, vec![ArcId(usize::MAX); r.len() - 1]);
        }
        for (i, a) in core.arcs.iter().enumerate() {
            if let Some(slot) = a.label.and_then(|l| ray_arcs.get_mut(&l)).and_then(|v| v.get_mut(a.arc_index)) {
                *slot = ArcId(i);
            }
        }
        Digraph { core, out_adj, in_adj, und_adj, ray_arcs }
    }

    /// A builder holding the same constituents and arcs with every
    /// identification undone.
    pub fn unidentified(&self) -> DigraphBuilder {
        let mut core = self.core.clone();
        for (i, a) in core.aliases.iter_mut().enumerate() {
            *a = Some(vec![VertexId(i)]);
        }
        for (i, r) in core.rep.iter_mut().enumerate() {
            *r = VertexId(i);
        }
        for arc in &mut core.arcs {
            arc.tail = arc.orig_tail;
            arc.head = arc.orig_head;
        }
        core.identifications.clear();
        DigraphBuilder { core, consumed: HashMap::new() }
    }

    pub fn to_builder(&self) -> DigraphBuilder {
        DigraphBuilder { core: self.core.clone(), consumed: HashMap::new() }
    }

    /// Every arc reversed; constituents and identifications unchanged.
    pub fn reversed(&self) -> Digraph {
        let mut core = self.core.clone();
        for a in &mut core.arcs {
            std::mem::swap(&mut a.tail, &mut a.head);
            std::mem::swap(&mut a.orig_tail, &mut a.orig_head);
        }
        Digraph::from_core(core)
    }

    /// Size of the original id space (live and merged ids).
    pub fn id_bound(&self) -> usize {
        self.core.aliases.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.core
            .aliases
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_some())
            .map(|(i, _)| VertexId(i))
    }

    pub fn vertex_count(&self) -> usize {
        self.core.aliases.iter().filter(|a| a.is_some()).count()
    }

    pub fn is_live(&self, v: VertexId) -> bool {
        self.core.is_live(v)
    }

    pub fn aliases(&self, v: VertexId) -> &[VertexId] {
        self.core.aliases[v.0].as_deref().unwrap_or(&[])
    }

    pub fn resolve(&self, orig: VertexId) -> VertexId {
        self.core.resolve(orig)
    }

    pub fn arc_count(&self) -> usize {
        self.core.arcs.len()
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.core.arcs[id.0]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.core.arcs
    }

    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.out_adj[v.0]
    }

    pub fn in_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.in_adj[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.und_adj[v.0].len()
    }

    pub fn identifications(&self) -> &[Identification] {
        &self.core.identifications
    }

    pub fn ray_labels(&self) -> impl Iterator<Item = RayLabel> + '_ {
        self.core.rays.keys().copied()
    }

    /// Live vertices of a constituent, by position.
    pub fn ray(&self, label: RayLabel) -> Option<Vec<VertexId>> {
        self.core.rays.get(&label).map(|r| r.iter().map(|&o| self.core.resolve(o)).collect())
    }

    /// Arc count of a constituent.
    pub fn ray_len(&self, label: RayLabel) -> Option<usize> {
        self.core.rays.get(&label).map(|r| r.len() - 1)
    }

    pub fn ray_vertex(&self, label: RayLabel, pos: usize) -> Option<VertexId> {
        self.core.rays.get(&label).and_then(|r| r.get(pos)).map(|&o| self.core.resolve(o))
    }

    /// Every constituent position the live vertex `v` occupies.
    pub fn positions(&self, v: VertexId) -> Vec<(RayLabel, usize)> {
        self.aliases(v).iter().filter_map(|a| self.core.position[a.0]).collect()
    }

    pub fn position_on(&self, v: VertexId, label: RayLabel) -> Option<usize> {
        self.positions(v).into_iter().find(|(l, _)| *l == label).map(|(_, p)| p)
    }

    /// Orientation of arc `k` of a constituent as read along the ray.
    pub fn ray_orientation(&self, label: RayLabel, k: usize) -> Option<Orientation> {
        let r = self.core.rays.get(&label)?;
        let a = self.arc_of(label, k)?;
        Some(if self.core.arcs[a.0].orig_tail == r[k] { Orientation::Out } else { Orientation::In })
    }

    /// The arc of constituent `label` at `arc_index`.
    pub fn arc_of(&self, label: RayLabel, k: usize) -> Option<ArcId> {
        self.ray_arcs.get(&label)?.get(k).copied().filter(|a| a.0 != usize::MAX)
    }

    pub fn is_identification_vertex(&self, v: VertexId) -> bool {
        self.aliases(v).len() > 1
    }

    /// Shortest hop count ignoring arc directions.
    pub fn underlying_distance(&self, u: VertexId, v: VertexId) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; self.id_bound()];
        let mut queue = VecDeque::from([u]);
        dist[u.0] = 0;
        while let Some(x) = queue.pop_front() {
            for &(y, _, _) in &self.und_adj[x.0] {
                if dist[y.0] == usize::MAX {
                    dist[y.0] = dist[x.0] + 1;
                    if y == v {
                        return Some(dist[y.0]);
                    }
                    queue.push_back(y);
                }
            }
        }
        None
    }

    /// Every path from `u` to `v` in the underlying multigraph, each reported
    /// once (parallel arcs give distinct paths).
    pub fn enumerate_paths(&self, u: VertexId, v: VertexId, cap: usize) -> Result<Vec<Embedding>, GraphError> {
        let mut out = Vec::new();
        let mut on_path = vec![false; self.id_bound()];
        let mut walk = Embedding::trivial(u);
        on_path[u.0] = true;
        self.paths_rec(v, cap, &mut on_path, &mut walk, &mut out)?;
        Ok(out)
    }

    fn paths_rec(
        &self,
        target: VertexId,
        cap: usize,
        on_path: &mut [bool],
        walk: &mut Embedding,
        out: &mut Vec<Embedding>,
    ) -> Result<(), GraphError> {
        let cur = walk.last();
        if cur == target {
            if out.len() == cap {
                return Err(GraphError::CapExceeded(cap));
            }
            out.push(walk.clone());
            return Ok(());
        }
        for &(w, a, fwd) in &self.und_adj[cur.0] {
            if on_path[w.0] {
                continue;
            }
            on_path[w.0] = true;
            walk.vertices.push(w);
            walk.arcs.push(a);
            walk.forward.push(fwd);
            let r = self.paths_rec(target, cap, on_path, walk, out);
            walk.vertices.pop();
            walk.arcs.pop();
            walk.forward.pop();
            on_path[w.0] = false;
            r?;
        }
        Ok(())
    }

    /// All embeddings of the first `length` arcs of `spec` that start at
    /// `start`, lowest-id continuation first.
    pub fn trace_pattern(
        &self,
        start: VertexId,
        spec: &RaySpec,
        length: usize,
        max_results: usize,
    ) -> Result<Vec<Embedding>, GraphError> {
        let want = spec.orientations(length);
        let mut out = Vec::new();
        let mut on_path = vec![false; self.id_bound()];
        let mut walk = Embedding::trivial(start);
        walk.pattern = Some(spec.clone());
        on_path[start.0] = true;
        self.trace_rec(&want, max_results, &mut on_path, &mut walk, &mut out)?;
        Ok(out)
    }

    fn trace_rec(
        &self,
        want: &[Orientation],
        cap: usize,
        on_path: &mut [bool],
        walk: &mut Embedding,
        out: &mut Vec<Embedding>,
    ) -> Result<(), GraphError> {
        let i = walk.len();
        if i == want.len() {
            if out.len() == cap {
                return Err(GraphError::ResultCapExceeded(cap));
            }
            out.push(walk.clone());
            return Ok(());
        }
        let cur = walk.last();
        let (list, fwd) = match want[i] {
            Orientation::Out => (&self.out_adj[cur.0], true),
            Orientation::In => (&self.in_adj[cur.0], false),
        };
        for &a in list {
            let arc = &self.core.arcs[a.0];
            let w = if fwd { arc.head } else { arc.tail };
            if on_path[w.0] {
                continue;
            }
            on_path[w.0] = true;
            walk.vertices.push(w);
            walk.arcs.push(a);
            walk.forward.push(fwd);
            let r = self.trace_rec(want, cap, on_path, walk, out);
            walk.vertices.pop();
            walk.arcs.pop();
            walk.forward.pop();
            on_path[w.0] = false;
            r?;
        }
        Ok(())
    }

    /// Realizes a vertex sequence as an embedding of `spec`, choosing the
    /// lowest-id arc at every step.
    pub fn embed_walk(&self, vertices: &[VertexId], spec: &RaySpec) -> Result<Embedding, GraphError> {
        let mut seen = BTreeSet::new();
        for &v in vertices {
            if !self.is_live(v) {
                return Err(GraphError::DeadVertex(v));
            }
            if !seen.insert(v) {
                return Err(GraphError::NotAnEmbedding(0));
            }
        }
        let mut e = Embedding::trivial(*vertices.first().ok_or(GraphError::NotAnEmbedding(0))?);
        e.pattern = Some(spec.clone());
        for (i, w) in vertices.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let fwd = spec.orientation_at(i) == Orientation::Out;
            let found = if fwd {
                self.out_adj[a.0].iter().find(|&&id| self.core.arcs[id.0].head == b)
            } else {
                self.in_adj[a.0].iter().find(|&&id| self.core.arcs[id.0].tail == b)
            };
            let &id = found.ok_or(GraphError::NotAnEmbedding(i))?;
            e.vertices.push(b);
            e.arcs.push(id);
            e.forward.push(fwd);
        }
        Ok(e)
    }

    /// A vertex sequence as a dipath embedding.
    pub fn dipath(&self, vertices: &[VertexId]) -> Result<Embedding, GraphError> {
        self.embed_walk(vertices, &RaySpec::all_out())
    }

    /// Checks the embedding invariant: distinct vertices, incidence, and the
    /// traversal flags agree with the stored arc directions.
    pub fn is_valid_embedding(&self, e: &Embedding) -> bool {
        if e.vertices.len() != e.arcs.len() + 1 || e.forward.len() != e.arcs.len() {
            return false;
        }
        let distinct: BTreeSet<_> = e.vertices.iter().collect();
        if distinct.len() != e.vertices.len() {
            return false;
        }
        e.arcs.iter().enumerate().all(|(i, &a)| {
            let Some(arc) = self.core.arcs.get(a.0) else { return false };
            let (from, to) = (e.vertices[i], e.vertices[i + 1]);
            if e.forward[i] {
                arc.tail == from && arc.head == to
            } else {
                arc.head == from && arc.tail == to
            }
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct VertexRecord {
    id: VertexId,
    aliases: Vec<VertexId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ArcRecord {
    tail: VertexId,
    head: VertexId,
    label: Option<RayLabel>,
    arc_index: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct RayRecord {
    label: RayLabel,
    vertices: Vec<VertexId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DigraphFile {
    vertices: Vec<VertexRecord>,
    arcs: Vec<ArcRecord>,
    identifications: Vec<Identification>,
    rays: Vec<RayRecord>,
}

impl Digraph {
    /// Native structured-text form (pretty JSON, stable key order).
    pub fn to_native(&self) -> String {
        let file = DigraphFile {
            vertices: self
                .vertices()
                .map(|v| VertexRecord { id: v, aliases: self.aliases(v).to_vec() })
                .collect(),
            arcs: self
                .core
                .arcs
                .iter()
                .map(|a| ArcRecord { tail: a.tail, head: a.head, label: a.label, arc_index: a.arc_index })
                .collect(),
            identifications: self.core.identifications.clone(),
            rays: self
                .core
                .rays
                .iter()
                .map(|(l, vs)| RayRecord { label: *l, vertices: vs.clone() })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("digraph serializes");
        s.push('\n');
        s
    }

    pub fn from_native(text: &str) -> Result<Digraph, GraphError> {
        let file: DigraphFile = serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
        let bound = file
            .vertices
            .iter()
            .flat_map(|v| v.aliases.iter())
            .map(|a| a.0 + 1)
            .max()
            .unwrap_or(0);
        let mut core = Core {
            aliases: vec![None; bound],
            rep: vec![VertexId(usize::MAX); bound],
            position: vec![None; bound],
            ..Core::default()
        };
        for rec in &file.vertices {
            if rec.id.0 >= bound || !rec.aliases.contains(&rec.id) {
                return Err(GraphError::Format(format!("vertex {} must alias itself", rec.id)));
            }
            for a in &rec.aliases {
                if core.rep[a.0].0 != usize::MAX {
                    return Err(GraphError::Format(format!("alias {a} listed twice")));
                }
                core.rep[a.0] = rec.id;
            }
            core.aliases[rec.id.0] = Some(rec.aliases.clone());
        }
        if core.rep.iter().any(|r| r.0 == usize::MAX) {
            return Err(GraphError::Format("aliases do not cover the id space".into()));
        }
        for ray in &file.rays {
            for (k, v) in ray.vertices.iter().enumerate() {
                if v.0 >= bound {
                    return Err(GraphError::Format(format!("ray vertex {v} out of range")));
                }
                core.position[v.0] = Some((ray.label, k));
            }
            core.rays.insert(ray.label, ray.vertices.clone());
        }
        for rec in &file.arcs {
            for v in [rec.tail, rec.head] {
                if !core.is_live(v) {
                    return Err(GraphError::Format(format!("arc endpoint {v} is not live")));
                }
            }
            let (orig_tail, orig_head) = match rec.label.and_then(|l| core.rays.get(&l)) {
                Some(r) if rec.arc_index + 1 < r.len() => {
                    let (a, b) = (r[rec.arc_index], r[rec.arc_index + 1]);
                    if core.rep[a.0] == rec.tail && core.rep[b.0] == rec.head {
                        (a, b)
                    } else if core.rep[b.0] == rec.tail && core.rep[a.0] == rec.head {
                        (b, a)
                    } else {
                        return Err(GraphError::Format(format!(
                            "arc {} of a constituent does not join its positions",
                            rec.arc_index
                        )));
                    }
                }
                Some(_) => return Err(GraphError::Format("constituent arc index out of range".into())),
                None => (rec.tail, rec.head),
            };
            core.arcs.push(Arc {
                tail: rec.tail,
                head: rec.head,
                label: rec.label,
                arc_index: rec.arc_index,
                orig_tail,
                orig_head,
            });
        }
        core.identifications = file.identifications;
        Ok(Digraph::from_core(core))
    }

    /// Graphviz rendering: constituent labels as edge labels, identification
    /// vertices double-circled.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph D {\n");
        for v in self.vertices() {
            if self.is_identification_vertex(v) {
                s.push_str(&format!("  {v} [shape=doublecircle];\n"));
            } else {
                s.push_str(&format!("  {v};\n"));
            }
        }
        for a in &self.core.arcs {
            match a.label {
                Some(l) => s.push_str(&format!(
                    "  {} -> {} [label=\"{},{}:{}\"];\n",
                    a.tail, a.head, l.n, l.m, a.arc_index
                )),
                None => s.push_str(&format!("  {} -> {};\n", a.tail, a.head)),
            }
        }
        s.push_str("}\n");
        s
    }
}
