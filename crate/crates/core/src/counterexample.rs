//! Identification hosts that contain any finite number of disjoint copies
//! of a pattern but force every copy to settle into one constituent.
//!
//! The host starts as disjoint constituents `R(n, m)` (`n <= m <= M`), each
//! a prefix of the pattern with `L` arcs. A stream of label pairs with
//! `m0 < m1` drives a sequence of identifications `g0 ~ g1`; the bounded and
//! unbounded builders differ only in how the two vertices are chosen.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, DigraphBuilder, Embedding, RayLabel, VertexId};
use crate::error::GraphError;
use crate::ray::{classify, Orientation, PhaseView, RaySpec, TailGen, Verdict};

/// Per-query cap on `enumerate_paths`.
pub const PATH_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("pattern {0} does not have a bounded representing sequence")]
    SpecNotBounded(String),
    #[error("pattern {0} does not have an unbounded representing sequence")]
    SpecNotUnbounded(String),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("malformed plan: {0}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A pair of constituent labels with `low.m < high.m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JPair {
    pub low: RayLabel,
    pub high: RayLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JEnumeration {
    pub rounds: usize,
    pub emitted: Vec<JPair>,
}

/// Pairs whose four coordinates are all at most `r`, lexicographically.
pub fn j_round(r: usize) -> Vec<JPair> {
    let mut out = Vec::new();
    for n0 in 0..=r {
        for m0 in n0..=r {
            for n1 in 0..=r {
                for m1 in n1.max(m0 + 1)..=r {
                    out.push(JPair { low: RayLabel::new(n0, m0), high: RayLabel::new(n1, m1) });
                }
            }
        }
    }
    out
}

/// Rounds `1..=rounds` concatenated.
pub fn enumerate_j(rounds: usize) -> JEnumeration {
    JEnumeration { rounds, emitted: (1..=rounds).flat_map(j_round).collect() }
}

/// The round stream restricted to constituents with `m <= max_m`.
pub fn j_stream(max_m: usize) -> impl Iterator<Item = JPair> {
    (1..).flat_map(j_round).filter(move |p| p.high.m <= max_m)
}

/// Labels of the host in creation order: by `m`, then `n`.
pub fn host_labels(max_m: usize) -> Vec<RayLabel> {
    (0..=max_m).flat_map(|m| (0..=m).map(move |n| RayLabel::new(n, m))).collect()
}

/// Disjoint constituents `R(n, m)`, `n <= m <= max_m`, each with `len` arcs.
pub fn host(spec: &RaySpec, max_m: usize, len: usize) -> Result<DigraphBuilder, ConstructionError> {
    let mut b = DigraphBuilder::new();
    for label in host_labels(max_m) {
        b.add_ray_prefix(label, spec, len)?;
    }
    Ok(b)
}

/// Position of a vertex on a named constituent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GVertex {
    pub label: RayLabel,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryMeta {
    Bounded {
        c: usize,
        /// Out-phase of `R1` starting at `g1`, as vertex positions.
        phase1: [usize; 2],
        /// Out-phase of `R0` ending at `g0`.
        phase0: [usize; 2],
    },
    Unbounded {
        x0: usize,
        x1: usize,
        z0: usize,
        z1: usize,
        m0: [usize; 2],
        m1: [usize; 2],
        /// Distances from `g` to the start and end of `M0`, then of `M1`.
        distances: [usize; 4],
        paths0: usize,
        mismatched0: usize,
        paths1: usize,
        mismatched1: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub step: usize,
    pub pair: JPair,
    pub g0: GVertex,
    pub g1: GVertex,
    pub merged: VertexId,
    pub meta: EntryMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    /// No admissible vertex within the truncation length at this step.
    DepthExhausted { step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CheckMode {
    Bounded { c: usize },
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationPlan {
    pub mode: CheckMode,
    /// Pattern of the constituents (after reversal, if any).
    pub spec: String,
    pub reversed: bool,
    pub max_m: usize,
    pub len: usize,
    pub requested_steps: usize,
    pub entries: Vec<PlanEntry>,
    pub stop: Option<StopReason>,
}

impl IdentificationPlan {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ConstructionError> {
        serde_json::from_str(text).map_err(|e| ConstructionError::Format(e.to_string()))
    }

    pub fn spec(&self) -> Result<RaySpec, ConstructionError> {
        self.spec.parse().map_err(|e| ConstructionError::Format(format!("{e}")))
    }

    /// Largest position of any identified vertex.
    pub fn deepest(&self) -> usize {
        self.entries.iter().map(|e| e.g0.pos.max(e.g1.pos)).max().unwrap_or(0)
    }

    pub fn completed(&self) -> usize {
        self.entries.len()
    }
}

fn check_params(max_m: usize, len: usize, steps: usize) -> Result<(), ConstructionError> {
    if len == 0 {
        return Err(ConstructionError::Parameters("length must be at least 1".into()));
    }
    if max_m == 0 && steps > 0 {
        return Err(ConstructionError::Parameters("identifications need max m of at least 1".into()));
    }
    Ok(())
}

fn orient(spec: &RaySpec, k: usize) -> Orientation {
    spec.orientation_at(k)
}

/// `p` is a turn at which an out-phase of exactly `c` arcs starts, with
/// the arc closing that phase inside the first `len` arcs.
fn starts_out_phase(spec: &RaySpec, p: usize, c: usize, len: usize) -> bool {
    p >= 1
        && p + c < len
        && orient(spec, p - 1) == Orientation::In
        && (p..p + c).all(|k| orient(spec, k) == Orientation::Out)
        && orient(spec, p + c) == Orientation::In
}

/// `q` is a turn at which an out-phase of exactly `c` arcs ends.
fn ends_out_phase(spec: &RaySpec, q: usize, c: usize, len: usize) -> bool {
    q > c
        && q < len
        && orient(spec, q - c - 1) == Orientation::In
        && (q - c..q).all(|k| orient(spec, k) == Orientation::Out)
        && orient(spec, q) == Orientation::In
}

/// The periodic tail has out-phases of length `c`.
fn has_out_phase(spec: &RaySpec, c: usize) -> bool {
    let TailGen::Periodic { period, first } = &spec.tail else { return false };
    let reps = if period.len() % 2 == 0 { 1 } else { 2 };
    let mut o = *first;
    for &l in period.iter().cycle().take(reps * period.len()) {
        if l == c && o == Orientation::Out {
            return true;
        }
        o = o.flip();
    }
    false
}

/// Host plus bounded-case identifications.
///
/// `g1` is the earliest turn beyond the earlier identifications on `R1`
/// that starts an out-phase of length `c`; `g0` is the earliest turn on
/// `R0`, beyond the earlier identifications there and beyond `g1`'s
/// position, that ends such a phase.
pub fn build_bounded(
    spec: &RaySpec,
    max_m: usize,
    len: usize,
    steps: usize,
) -> Result<(Digraph, IdentificationPlan), ConstructionError> {
    let Verdict::NonUbiquitousBounded { c } = classify(spec) else {
        return Err(ConstructionError::SpecNotBounded(spec.to_string()));
    };
    check_params(max_m, len, steps)?;
    let reversed = !has_out_phase(spec, c);
    let eff = if reversed { spec.reverse() } else { spec.clone() };
    let mut b = host(&eff, max_m, len)?;
    let mut deepest: BTreeMap<RayLabel, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    let mut stop = None;
    for (step, pair) in j_stream(max_m).take(steps).enumerate() {
        let from1 = deepest.get(&pair.high).map_or(1, |d| d + 1);
        let p = (from1..len).find(|&p| starts_out_phase(&eff, p, c, len));
        let from0 = deepest.get(&pair.low).map_or(0, |d| d + 1);
        let q = p.and_then(|p| (from0.max(p + 1)..len).find(|&q| ends_out_phase(&eff, q, c, len)));
        let (Some(p), Some(q)) = (p, q) else {
            stop = Some(StopReason::DepthExhausted { step });
            break;
        };
        let u = b.ray_vertex(pair.low, q).expect("position within the constituent");
        let v = b.ray_vertex(pair.high, p).expect("position within the constituent");
        let merged = b.identify(u, v)?;
        deepest.insert(pair.low, q);
        deepest.insert(pair.high, p);
        entries.push(PlanEntry {
            step,
            pair,
            g0: GVertex { label: pair.low, pos: q },
            g1: GVertex { label: pair.high, pos: p },
            merged,
            meta: EntryMeta::Bounded { c, phase1: [p, p + c], phase0: [q - c, q] },
        });
    }
    let plan = IdentificationPlan {
        mode: CheckMode::Bounded { c },
        spec: eff.to_string(),
        reversed,
        max_m,
        len,
        requested_steps: steps,
        entries,
        stop,
    };
    Ok((b.freeze(), plan))
}

/// Selection data on one side of an unbounded step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideChoice {
    pub x: usize,
    pub z: usize,
    pub paths: usize,
    pub mismatched: usize,
}

/// Whether the walk reads as an initial segment of the pattern.
pub fn is_initial_segment(e: &Embedding, spec: &RaySpec) -> bool {
    e.orientations() == spec.orientations(e.len())
}

fn phase_containing(phases: &[PhaseView], pos: usize) -> impl Iterator<Item = &PhaseView> {
    phases.iter().filter(move |ph| ph.start_vertex() <= pos && pos <= ph.end_vertex())
}

/// `x` beyond every phase of `label` holding a marked vertex, the initial
/// segment paths into `x`, and the first vertex `z` beyond which none of
/// the mismatched paths extends along the constituent.
pub fn choose_side(
    d: &Digraph,
    spec: &RaySpec,
    label: RayLabel,
    marked: &BTreeSet<VertexId>,
    starts: &BTreeSet<VertexId>,
    len: usize,
) -> Result<Option<SideChoice>, ConstructionError> {
    let phases = spec.phases(len);
    let x = marked
        .iter()
        .filter_map(|&v| d.position_on(v, label))
        .flat_map(|p| phase_containing(&phases, p).map(|ph| ph.end_vertex() + 1).collect::<Vec<_>>())
        .max()
        .unwrap_or(0);
    if x > len {
        return Ok(None);
    }
    let xv = d.ray_vertex(label, x).expect("position within the constituent");
    let mut paths = 0;
    let mut mismatched = 0;
    let mut z = x;
    for &v in starts {
        for e in d.enumerate_paths(v, xv, PATH_CAP)? {
            if !is_initial_segment(&e, spec) {
                continue;
            }
            paths += 1;
            let q = e.len();
            if q == x {
                continue;
            }
            mismatched += 1;
            let Some(j) = (0..len - x).find(|&j| orient(spec, q + j) != orient(spec, x + j)) else {
                return Ok(None);
            };
            z = z.max(x + j + 1);
        }
    }
    Ok(Some(SideChoice { x, z, paths, mismatched }))
}

/// Host plus unbounded-case identifications.
///
/// Vertices are enumerated in creation order. At step `i`, `z0`/`z1` come
/// from [`choose_side`] with marks `{g_0..g_{i-1}, v_0..v_i}`; `M0` is the
/// first complete phase of length at least 3 starting at or beyond `z0`
/// with `g0` one arc into it, and `M1` the first complete phase beyond
/// `z1` of length at least `2|M0| + 1` with `g1` at distance `|M0|` from
/// its start.
pub fn build_unbounded(
    spec: &RaySpec,
    max_m: usize,
    len: usize,
    steps: usize,
) -> Result<(Digraph, IdentificationPlan), ConstructionError> {
    if classify(spec) != Verdict::NonUbiquitousUnbounded {
        return Err(ConstructionError::SpecNotUnbounded(spec.to_string()));
    }
    check_params(max_m, len, steps)?;
    let mut b = host(spec, max_m, len)?;
    let phases: Vec<PhaseView> = spec.phases(len).into_iter().filter(|p| !p.truncated).collect();
    let mut gs: Vec<VertexId> = Vec::new();
    let mut entries = Vec::new();
    let mut stop = None;
    for (i, pair) in j_stream(max_m).take(steps).enumerate() {
        let d = b.freeze();
        let starts: BTreeSet<VertexId> = (0..=i).map(|k| d.resolve(VertexId(k))).collect();
        let mut marked: BTreeSet<VertexId> = gs.iter().map(|&g| d.resolve(g)).collect();
        marked.extend(starts.iter().copied());
        let s0 = choose_side(&d, spec, pair.low, &marked, &starts, len)?;
        let s1 = choose_side(&d, spec, pair.high, &marked, &starts, len)?;
        let (Some(s0), Some(s1)) = (s0, s1) else {
            stop = Some(StopReason::DepthExhausted { step: i });
            break;
        };
        let m0 = phases.iter().find(|p| p.start_vertex() >= s0.z && p.length >= 3);
        let m1 = m0.and_then(|m0| {
            phases.iter().find(|p| p.start_vertex() >= s1.z && p.length > 2 * m0.length)
        });
        let (Some(m0), Some(m1)) = (m0, m1) else {
            stop = Some(StopReason::DepthExhausted { step: i });
            break;
        };
        let q = m0.start_vertex() + 1;
        let p = m1.start_vertex() + m0.length;
        let u = b.ray_vertex(pair.low, q).expect("position within the constituent");
        let v = b.ray_vertex(pair.high, p).expect("position within the constituent");
        let merged = b.identify(u, v)?;
        gs.push(merged);
        entries.push(PlanEntry {
            step: i,
            pair,
            g0: GVertex { label: pair.low, pos: q },
            g1: GVertex { label: pair.high, pos: p },
            merged,
            meta: EntryMeta::Unbounded {
                x0: s0.x,
                x1: s1.x,
                z0: s0.z,
                z1: s1.z,
                m0: [m0.start_vertex(), m0.end_vertex()],
                m1: [m1.start_vertex(), m1.end_vertex()],
                distances: [1, m0.length - 1, m0.length, m1.length - m0.length],
                paths0: s0.paths,
                mismatched0: s0.mismatched,
                paths1: s1.paths,
                mismatched1: s1.mismatched,
            },
        });
    }
    let plan = IdentificationPlan {
        mode: CheckMode::Unbounded,
        spec: spec.to_string(),
        reversed: false,
        max_m,
        len,
        requested_steps: steps,
        entries,
        stop,
    };
    Ok((b.freeze(), plan))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step: Option<usize>,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PlanReport {
    pub entries: usize,
    pub paths_examined: usize,
    pub violations: Vec<Violation>,
}

impl PlanReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, step: Option<usize>, check: &'static str, detail: impl Into<String>) {
        self.violations.push(Violation { step, check, detail: detail.into() });
    }
}

/// Orientations of a constituent read off the digraph.
fn ray_word(d: &Digraph, label: RayLabel) -> Vec<Orientation> {
    let n = d.ray_len(label).unwrap_or(0);
    (0..n).map(|k| d.ray_orientation(label, k).expect("arc present")).collect()
}

fn is_turn(word: &[Orientation], pos: usize) -> bool {
    pos >= 1 && pos < word.len() && word[pos - 1] != word[pos]
}

/// Maximal run of equal orientations containing vertex `pos` strictly
/// inside, as vertex positions.
fn phase_around(word: &[Orientation], pos: usize) -> Option<[usize; 2]> {
    if pos == 0 || pos >= word.len() || word[pos - 1] != word[pos] {
        return None;
    }
    let o = word[pos];
    let mut s = pos;
    while s > 0 && word[s - 1] == o {
        s -= 1;
    }
    let mut e = pos;
    while e < word.len() && word[e] == o {
        e += 1;
    }
    Some([s, e])
}

/// Re-verifies a plan against the digraph, independently of the builder.
pub fn check_plan(d: &Digraph, plan: &IdentificationPlan, mode: CheckMode) -> PlanReport {
    let mut r = PlanReport { entries: plan.entries.len(), ..Default::default() };
    check_framework(d, plan, &mut r);
    match mode {
        CheckMode::Bounded { c } => check_bounded(d, plan, c, &mut r),
        CheckMode::Unbounded => check_unbounded(d, plan, &mut r),
    }
    r
}

fn check_framework(d: &Digraph, plan: &IdentificationPlan, r: &mut PlanReport) {
    let mut by_m: BTreeMap<usize, Vec<RayLabel>> = BTreeMap::new();
    for l in d.ray_labels() {
        by_m.entry(l.m).or_default().push(l);
    }
    for (m, labels) in &by_m {
        let mut seen: BTreeMap<VertexId, RayLabel> = BTreeMap::new();
        for &l in labels {
            for v in d.ray(l).unwrap_or_default() {
                if let Some(other) = seen.insert(v, l) {
                    if other != l {
                        r.flag(None, "framework", format!("{other} and {l} share {v} (m = {m})"));
                    }
                }
            }
        }
    }
    let mut used: BTreeSet<GVertex> = BTreeSet::new();
    let mut merged: BTreeSet<VertexId> = BTreeSet::new();
    let mut deepest: BTreeMap<RayLabel, usize> = BTreeMap::new();
    for e in &plan.entries {
        let s = Some(e.step);
        if e.pair.low.m >= e.pair.high.m || e.pair.low.n > e.pair.low.m || e.pair.high.n > e.pair.high.m {
            r.flag(s, "pair", format!("{:?} is not an admissible pair", e.pair));
        }
        if e.g0.label != e.pair.low || e.g1.label != e.pair.high {
            r.flag(s, "pair", "identified vertices are not on the paired constituents");
        }
        for g in [e.g0, e.g1] {
            if !used.insert(g) {
                r.flag(s, "disjoint", format!("{} position {} reused", g.label, g.pos));
            }
            if let Some(&prev) = deepest.get(&g.label) {
                if g.pos <= prev {
                    r.flag(s, "beyond", format!("{} position {} not beyond {}", g.label, g.pos, prev));
                }
            }
        }
        deepest.insert(e.g0.label, e.g0.pos);
        deepest.insert(e.g1.label, e.g1.pos);
        let a = d.ray_vertex(e.g0.label, e.g0.pos);
        let b = d.ray_vertex(e.g1.label, e.g1.pos);
        if a.is_none() || a != b || a != Some(e.merged) {
            r.flag(s, "merged", format!("{a:?} and {b:?} are not the recorded vertex {}", e.merged));
        } else if !merged.insert(e.merged) {
            r.flag(s, "disjoint", format!("vertex {} merged twice", e.merged));
        } else if d.degree(e.merged) != 4 {
            r.flag(s, "degree", format!("vertex {} has degree {}", e.merged, d.degree(e.merged)));
        }
    }
}

fn check_bounded(d: &Digraph, plan: &IdentificationPlan, c: usize, r: &mut PlanReport) {
    let mut words: BTreeMap<RayLabel, Vec<Orientation>> = BTreeMap::new();
    for e in &plan.entries {
        let s = Some(e.step);
        let w1 = words.entry(e.g1.label).or_insert_with(|| ray_word(d, e.g1.label)).clone();
        let w0 = words.entry(e.g0.label).or_insert_with(|| ray_word(d, e.g0.label)).clone();
        let (p, q) = (e.g1.pos, e.g0.pos);
        let out_run = |w: &[Orientation], a: usize, b: usize| b <= w.len() && (a..b).all(|k| w[k] == Orientation::Out);
        let ok1 = is_turn(&w1, p) && p + c < w1.len() && out_run(&w1, p, p + c) && w1[p + c] == Orientation::In;
        if !ok1 {
            r.flag(s, "bounded(i)", format!("{} position {p} does not start an out-phase of length {c}", e.g1.label));
        }
        let ok0 = is_turn(&w0, q) && q > c && out_run(&w0, q - c, q) && w0[q - c - 1] == Orientation::In;
        if !ok0 {
            r.flag(s, "bounded(ii)", format!("{} position {q} does not end an out-phase of length {c}", e.g0.label));
        }
        if q <= p {
            r.flag(s, "bounded(ii)", format!("initial segment {q} is not longer than {p}"));
        }
    }
}

/// Replays the identifications one at a time; `D_i` is yielded after
/// entry `i`.
fn replay(d: &Digraph, plan: &IdentificationPlan) -> Result<Vec<Digraph>, GraphError> {
    let mut b = d.unidentified();
    let mut out = Vec::with_capacity(plan.entries.len());
    for e in &plan.entries {
        let u = b.ray_vertex(e.g0.label, e.g0.pos).ok_or(GraphError::Format("position off the constituent".into()))?;
        let v = b.ray_vertex(e.g1.label, e.g1.pos).ok_or(GraphError::Format("position off the constituent".into()))?;
        b.identify(u, v)?;
        out.push(b.freeze());
    }
    Ok(out)
}

fn check_unbounded(d: &Digraph, plan: &IdentificationPlan, r: &mut PlanReport) {
    let Ok(spec) = plan.spec() else {
        r.flag(None, "spec", "unreadable pattern");
        return;
    };
    let gs: BTreeSet<VertexId> = plan.entries.iter().map(|e| e.merged).collect();
    for e in &plan.entries {
        let s = Some(e.step);
        let mut dist = Vec::new();
        for g in [e.g0, e.g1] {
            let w = ray_word(d, g.label);
            if is_turn(&w, g.pos) {
                r.flag(s, "not-turn", format!("{} position {} is a turn", g.label, g.pos));
                continue;
            }
            let Some([a, b]) = phase_around(&w, g.pos) else {
                r.flag(s, "not-turn", format!("{} position {} is not interior", g.label, g.pos));
                continue;
            };
            dist.push(g.pos - a);
            dist.push(b - g.pos);
            for k in a..=b {
                if let Some(v) = d.ray_vertex(g.label, k) {
                    if v != e.merged && gs.contains(&v) {
                        r.flag(s, "phase-exclusive", format!("phase {a}..{b} of {} contains {v}", g.label));
                    }
                }
            }
        }
        let distinct: BTreeSet<usize> = dist.iter().copied().collect();
        if dist.len() == 4 && distinct.len() != 4 {
            r.flag(s, "distances", format!("distances {dist:?} are not pairwise distinct"));
        }
        if let EntryMeta::Unbounded { distances, .. } = &e.meta {
            if dist.len() == 4 && distances[..] != dist[..] {
                r.flag(s, "distances", format!("recorded {distances:?}, measured {dist:?}"));
            }
        }
    }

    let stages = match replay(d, plan) {
        Ok(s) => s,
        Err(err) => {
            r.flag(None, "replay", err.to_string());
            return;
        }
    };
    for (e, di) in plan.entries.iter().zip(&stages) {
        let s = Some(e.step);
        let g = di.ray_vertex(e.g0.label, e.g0.pos).expect("replayed position");
        let lens = [e.g0.pos, e.g1.pos];
        let starts: BTreeSet<VertexId> = (0..=e.step).map(|k| di.resolve(VertexId(k))).collect();
        for v in starts {
            match di.enumerate_paths(v, g, PATH_CAP) {
                Ok(paths) => {
                    r.paths_examined += paths.len();
                    for p in paths.iter().filter(|p| is_initial_segment(p, &spec)) {
                        if !lens.contains(&p.len()) {
                            r.flag(s, "path-length", format!("{v}-{g} initial segment of length {} (expected {lens:?})", p.len()));
                        }
                    }
                }
                Err(err) => r.flag(s, "path-length", err.to_string()),
            }
        }
    }
}

/// Which of the three admissible configurations an embedding shows at an
/// identification vertex it passes through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SplitCase {
    /// Both arcs on the lower constituent.
    Low,
    /// Both arcs on the higher constituent.
    High,
    /// Enters along the higher constituent's initial segment and leaves
    /// onto the lower constituent's tail (or the reverse).
    Cross,
}

/// Classifies the two arcs of `e` at vertex index `t`; `None` if they fit
/// none of the three configurations.
pub fn split_case(d: &Digraph, entry: &PlanEntry, e: &Embedding, t: usize) -> Option<SplitCase> {
    let side = |i: usize| {
        let a = d.arc(e.arcs[i]);
        let l = a.label?;
        let k = a.arc_index;
        if l == entry.g0.label {
            Some((0, k >= entry.g0.pos))
        } else if l == entry.g1.label {
            Some((1, k >= entry.g1.pos))
        } else {
            None
        }
    };
    let (a, b) = (side(t - 1)?, side(t)?);
    match (a.0, b.0) {
        (0, 0) => Some(SplitCase::Low),
        (1, 1) => Some(SplitCase::High),
        _ => {
            let (lo, hi) = if a.0 == 0 { (a, b) } else { (b, a) };
            (lo.1 && !hi.1).then_some(SplitCase::Cross)
        }
    }
}

/// Index of the first pattern vertex at or after the explicit prefix where
/// a phase starts.
pub fn suffix_start(spec: &RaySpec) -> usize {
    let p = spec.prefix.len();
    (p.max(1)..).find(|&k| orient(spec, k - 1) != orient(spec, k)).unwrap_or(p)
}

/// Constituent label of arc `i` of `e` and whether it is walked towards
/// higher positions.
pub fn traversal(d: &Digraph, e: &Embedding, i: usize) -> Option<(RayLabel, bool)> {
    let a = d.arc(e.arcs[i]);
    let l = a.label?;
    let along = d.position_on(e.vertices[i + 1], l) == Some(a.arc_index + 1);
    Some((l, along))
}

/// Counters from auditing embeddings in a bounded host.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SplitAudit {
    pub checked: usize,
    pub low: usize,
    pub high: usize,
    pub cross: usize,
    pub violations: usize,
    pub direction_changes: usize,
}

/// Checks the three-case split at every identification vertex of `e` with
/// at least `c` arcs on both sides inside the turn-started suffix, and
/// that the traversal direction does not change across those vertices.
pub fn audit_split(d: &Digraph, plan: &IdentificationPlan, c: usize, spec: &RaySpec, e: &Embedding, acc: &mut SplitAudit) {
    let by_vertex: BTreeMap<VertexId, &PlanEntry> = plan.entries.iter().map(|p| (p.merged, p)).collect();
    let s = suffix_start(spec);
    let n = e.len();
    for t in (s + c)..=n.saturating_sub(c) {
        if t == 0 || t >= n {
            continue;
        }
        let Some(entry) = by_vertex.get(&e.vertices[t]) else { continue };
        acc.checked += 1;
        match split_case(d, entry, e, t) {
            Some(SplitCase::Low) => acc.low += 1,
            Some(SplitCase::High) => acc.high += 1,
            Some(SplitCase::Cross) => acc.cross += 1,
            None => acc.violations += 1,
        }
        let before = traversal(d, e, t - 1).map(|x| x.1);
        let after = traversal(d, e, t).map(|x| x.1);
        if before != after {
            acc.direction_changes += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_rounds() {
        let j = enumerate_j(2);
        assert_eq!(j.emitted[0], JPair { low: RayLabel::new(0, 0), high: RayLabel::new(0, 1) });
        assert!(j.emitted.iter().all(|p| p.low.m < p.high.m && p.low.n <= p.low.m && p.high.n <= p.high.m));
        let first = j.emitted[0];
        assert_eq!(j.emitted.iter().filter(|&&p| p == first).count(), 2);
        let r1 = j_round(1);
        assert_eq!(r1.len(), 2);
        let mut sorted = j_round(3);
        sorted.sort();
        assert_eq!(sorted, j_round(3));
    }

    #[test]
    fn stream_respects_max_m() {
        let s: Vec<_> = j_stream(2).take(40).collect();
        assert!(s.iter().all(|p| p.high.m <= 2));
        assert_eq!(s[0], JPair { low: RayLabel::new(0, 0), high: RayLabel::new(0, 1) });
    }

    fn alternating() -> RaySpec {
        RaySpec::periodic(&[1, 1], Orientation::Out)
    }

    #[test]
    fn bounded_single_step() {
        let (d, plan) = build_bounded(&alternating(), 1, 40, 1).unwrap();
        assert_eq!(plan.entries.len(), 1);
        let e = &plan.entries[0];
        assert_eq!(e.g0.label, RayLabel::new(0, 0));
        assert!(e.g0.pos > e.g1.pos);
        assert_eq!(d.degree(e.merged), 4);
        assert!(check_plan(&d, &plan, plan.mode).ok());
    }

    #[test]
    fn zero_steps_is_the_disjoint_host() {
        let (d, plan) = build_bounded(&alternating(), 2, 10, 0).unwrap();
        assert!(plan.entries.is_empty());
        assert_eq!(d.vertex_count(), 6 * 11);
        let (d, plan) = build_unbounded(&RaySpec::growing(1, 1, Orientation::Out), 1, 10, 0).unwrap();
        assert!(plan.entries.is_empty());
        assert_eq!(d.vertex_count(), 3 * 11);
    }

    #[test]
    fn wrong_class_is_rejected() {
        assert!(matches!(build_bounded(&RaySpec::all_out(), 1, 10, 1), Err(ConstructionError::SpecNotBounded(_))));
        assert!(matches!(build_unbounded(&alternating(), 1, 10, 1), Err(ConstructionError::SpecNotUnbounded(_))));
    }

    #[test]
    fn in_phases_trigger_reversal() {
        // out-phases have length 1, in-phases length 2
        let spec = RaySpec::periodic(&[1, 2], Orientation::Out);
        let (d, plan) = build_bounded(&spec, 1, 40, 2).unwrap();
        assert!(plan.reversed);
        assert_eq!(plan.entries.len(), 2);
        assert!(check_plan(&d, &plan, plan.mode).ok());
    }

    #[test]
    fn short_host_stops_early() {
        let (_, plan) = build_bounded(&alternating(), 1, 4, 3).unwrap();
        assert!(plan.entries.len() < 3);
        assert!(matches!(plan.stop, Some(StopReason::DepthExhausted { .. })));
    }

    #[test]
    fn shifted_g1_is_flagged() {
        let (d, mut plan) = build_bounded(&alternating(), 1, 40, 1).unwrap();
        plan.entries[0].g1.pos += 1;
        let r = check_plan(&d, &plan, plan.mode);
        assert!(r.violations.iter().any(|v| v.check == "bounded(i)"));
    }

    #[test]
    fn unbounded_single_step() {
        let spec = RaySpec::growing(1, 1, Orientation::Out);
        let (d, plan) = build_unbounded(&spec, 1, 300, 1).unwrap();
        assert_eq!(plan.entries.len(), 1);
        let EntryMeta::Unbounded { distances, m0, m1, .. } = plan.entries[0].meta else { panic!() };
        let set: BTreeSet<_> = distances.iter().collect();
        assert_eq!(set.len(), 4);
        assert!(m0[1] - m0[0] >= 3);
        assert!(m1[1] - m1[0] > 2 * (m0[1] - m0[0]));
        let r = check_plan(&d, &plan, CheckMode::Unbounded);
        assert!(r.ok(), "{:?}", r.violations);
        assert!(r.paths_examined > 0);
    }

    #[test]
    fn plan_json_round_trip() {
        let (_, plan) = build_bounded(&alternating(), 1, 40, 2).unwrap();
        assert_eq!(IdentificationPlan::from_json(&plan.to_json()).unwrap(), plan);
    }

    #[test]
    fn phase_helpers() {
        use Orientation::{In as I, Out as O};
        let w = [O, O, O, I, I, O];
        assert!(is_turn(&w, 3));
        assert!(!is_turn(&w, 2));
        assert_eq!(phase_around(&w, 1), Some([0, 3]));
        assert_eq!(phase_around(&w, 3), None);
        assert_eq!(suffix_start(&alternating()), 1);
        let s = RaySpec::periodic(&[2, 1], Orientation::Out).with_prefix(&[O]);
        assert_eq!(suffix_start(&s), 3);
    }
}
