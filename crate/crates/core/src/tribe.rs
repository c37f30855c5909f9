//! Tribes of disjoint embeddings and forked-subtribe extraction.
//!
//! A tribe is a list of layers; each layer is a set of pairwise
//! vertex-disjoint embeddings of the same pattern prefix. The hat of a
//! member is its first `hat_len` arcs (no vertices at all when
//! `hat_len == 0`). A tribe is forked when no member meets the hat of a
//! different member.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, Embedding, VertexId};
use crate::error::GraphError;
use crate::ray::RaySpec;

/// Layers wider than this are rejected by [`forked_subtribe`] unless a
/// larger limit is passed to [`forked_subtribe_with_limit`].
pub const DEFAULT_WIDE_LAYER_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TribeError {
    #[error("layer {layer}: members {a} and {b} share a vertex")]
    LayerNotDisjoint { layer: usize, a: usize, b: usize },
    #[error("layer {layer}, member {member}: does not realize the pattern for {needed} arcs")]
    PatternMismatch { layer: usize, member: usize, needed: usize },
    #[error("insufficient thickness at n={n}: {bound} requires {needed}, largest available is {available}")]
    InsufficientThickness { n: usize, bound: &'static str, needed: usize, available: usize },
    #[error("chosen layer has {size} members, above the limit of {limit}")]
    LayerTooWide { size: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed tribe dump: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tribe {
    pub layers: Vec<Vec<Embedding>>,
    pub pattern: RaySpec,
    pub hat_len: usize,
}

/// Pigeonhole bookkeeping of one recursion step of [`forked_subtribe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForkStep {
    pub n: usize,
    pub chosen_layer_size: usize,
    /// Members removed from the other layers for meeting a hat of the
    /// chosen layer.
    pub deleted: usize,
    /// Size of the largest auxiliary layer and the pigeonhole target
    /// `floor(size / C(|L|, n))` it guarantees.
    pub aux_layer_size: usize,
    pub pigeonhole_target: usize,
    /// Size of the preimage of the selected n-subset in that layer.
    pub preimage_size: usize,
}

pub fn hat_vertices(e: &Embedding, hat_len: usize) -> &[VertexId] {
    if hat_len == 0 {
        &[]
    } else {
        &e.vertices[..=hat_len.min(e.len())]
    }
}

impl Tribe {
    /// Validates pattern realization and per-layer disjointness.
    pub fn new(pattern: RaySpec, hat_len: usize, layers: Vec<Vec<Embedding>>) -> Result<Tribe, TribeError> {
        for (li, layer) in layers.iter().enumerate() {
            for (mi, m) in layer.iter().enumerate() {
                if m.len() < hat_len || !m.realizes(&pattern) {
                    return Err(TribeError::PatternMismatch { layer: li, member: mi, needed: hat_len.max(m.len()) });
                }
            }
            for a in 0..layer.len() {
                for b in a + 1..layer.len() {
                    if layer[a].meets(&layer[b]) {
                        return Err(TribeError::LayerNotDisjoint { layer: li, a, b });
                    }
                }
            }
        }
        Ok(Tribe { layers, pattern, hat_len })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn members(&self) -> impl Iterator<Item = &Embedding> {
        self.layers.iter().flatten()
    }

    /// Number of vertices in each member's hat.
    pub fn hat_size(&self) -> usize {
        if self.hat_len == 0 {
            0
        } else {
            self.hat_len + 1
        }
    }

    /// For every `k <= n` some layer has at least `k` members.
    pub fn is_thick_upto(&self, n: usize) -> bool {
        self.layers.iter().map(Vec::len).max().unwrap_or(0) >= n
    }

    pub fn is_forked(&self) -> bool {
        let all: Vec<&Embedding> = self.members().collect();
        for (i, a) in all.iter().enumerate() {
            let hat: HashSet<VertexId> = hat_vertices(a, self.hat_len).iter().copied().collect();
            if hat.is_empty() {
                continue;
            }
            for (j, b) in all.iter().enumerate() {
                if i != j && b.vertices.iter().any(|v| hat.contains(v)) {
                    return false;
                }
            }
        }
        true
    }

    /// Every layer of `self` is a subset of some layer of `parent`.
    pub fn is_subtribe_of(&self, parent: &Tribe) -> bool {
        let parents: Vec<BTreeSet<&Vec<VertexId>>> = parent
            .layers
            .iter()
            .map(|l| l.iter().map(|e| &e.vertices).collect())
            .collect();
        self.layers.iter().all(|layer| {
            parents
                .iter()
                .any(|p| layer.iter().all(|e| p.contains(&e.vertices)))
        })
    }

    pub fn to_dump(&self) -> String {
        let dump = TribeDump {
            pattern: self.pattern.to_string(),
            hat_len: self.hat_len,
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(|e| e.vertices.clone()).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&dump).expect("tribe serializes");
        s.push('\n');
        s
    }

    pub fn from_dump(text: &str, d: &Digraph) -> Result<Tribe, TribeError> {
        let dump: TribeDump = serde_json::from_str(text).map_err(|e| TribeError::Format(e.to_string()))?;
        let pattern: RaySpec = dump.pattern.parse().map_err(|e| TribeError::Format(format!("{e}")))?;
        let layers = dump
            .layers
            .iter()
            .map(|l| l.iter().map(|vs| d.embed_walk(vs, &pattern)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Tribe::new(pattern, dump.hat_len, layers)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TribeDump {
    pattern: String,
    hat_len: usize,
    layers: Vec<Vec<Vec<VertexId>>>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

pub fn forked_subtribe(t: &Tribe, max_layer: usize) -> Result<Tribe, TribeError> {
    forked_subtribe_with_limit(t, max_layer, DEFAULT_WIDE_LAYER_LIMIT).map(|(t, _)| t)
}

/// Extracts layers `F_0, ..., F_max_layer` with `|F_n| = n`, each a subset
/// of an input layer, forming a tribe forked at the hat.
///
/// Step `n` picks the smallest remaining layer `L` with at least `h + n`
/// members, drops from every other layer the members that meet a hat of
/// `L`, maps each surviving member `H'` to the lexicographically least
/// n-subset of `L` avoiding the hat of `H'`, and keeps the n-subset whose
/// preimages are largest. Those preimages form the remaining tribe.
pub fn forked_subtribe_with_limit(
    t: &Tribe,
    max_layer: usize,
    wide_limit: usize,
) -> Result<(Tribe, Vec<ForkStep>), TribeError> {
    let members: Vec<&Embedding> = t.members().collect();
    let full: Vec<HashSet<VertexId>> = members.iter().map(|e| e.vertices.iter().copied().collect()).collect();
    let hats: Vec<Vec<VertexId>> = members.iter().map(|e| hat_vertices(e, t.hat_len).to_vec()).collect();
    // does member `x` meet the hat of member `y`
    let meets_hat = |x: usize, y: usize| hats[y].iter().any(|v| full[x].contains(v));

    let mut offset = 0;
    let mut tribe: Vec<Vec<usize>> = Vec::new();
    for l in &t.layers {
        tribe.push((offset..offset + l.len()).collect());
        offset += l.len();
    }
    let h = t.hat_size();
    let mut chosen: Vec<Vec<usize>> = vec![Vec::new()];
    let mut steps = Vec::new();

    for n in 1..=max_layer {
        let largest = tribe.iter().map(Vec::len).max().unwrap_or(0);
        let Some(li) = (0..tribe.len())
            .filter(|&i| tribe[i].len() >= h + n)
            .min_by_key(|&i| (tribe[i].len(), i))
        else {
            return Err(TribeError::InsufficientThickness {
                n,
                bound: "a layer of size h + n",
                needed: h + n,
                available: largest,
            });
        };
        let big = tribe[li].clone();
        if big.len() > wide_limit {
            return Err(TribeError::LayerTooWide { size: big.len(), limit: wide_limit });
        }

        let mut deleted = 0;
        let reduced: Vec<Vec<usize>> = tribe
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                if i == li {
                    return layer.clone();
                }
                let kept: Vec<usize> = layer.iter().copied().filter(|&x| !big.iter().any(|&y| meets_hat(x, y))).collect();
                deleted += layer.len() - kept.len();
                kept
            })
            .collect();

        // selector: each member picks the first n members of L avoiding its hat
        let mut groups: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
        for (ci, layer) in reduced.iter().enumerate() {
            for &x in layer {
                let pick: Vec<usize> = (0..big.len()).filter(|&k| !meets_hat(big[k], x)).take(n).collect();
                assert_eq!(pick.len(), n, "a hat meets at most h members of a disjoint layer");
                let g = groups.entry(pick).or_insert_with(|| vec![Vec::new(); reduced.len()]);
                g[ci].push(x);
            }
        }
        let score = |g: &Vec<Vec<usize>>| {
            let mut s: Vec<usize> = g.iter().map(Vec::len).collect();
            s.sort_unstable_by(|a, b| b.cmp(a));
            s
        };
        let (subset, preimage) = groups
            .iter()
            .max_by(|a, b| score(a.1).cmp(&score(b.1)).then_with(|| b.0.cmp(a.0)))
            .map(|(k, g)| (k.clone(), g.clone()))
            .ok_or(TribeError::InsufficientThickness {
                n,
                bound: "a non-empty auxiliary layer",
                needed: 1,
                available: 0,
            })?;

        // pigeonhole over the largest auxiliary layer
        let (aux, aux_size) = reduced
            .iter()
            .enumerate()
            .map(|(i, l)| (i, l.len()))
            .max_by_key(|&(i, s)| (s, std::cmp::Reverse(i)))
            .expect("tribe has a layer");
        let classes = binomial(big.len(), n);
        let target = (aux_size as u128 / classes) as usize;
        let best_in_aux = groups.values().map(|g| g[aux].len()).max().unwrap_or(0);
        assert!(best_in_aux >= target, "pigeonhole: some n-subset has at least {target} preimages");

        steps.push(ForkStep {
            n,
            chosen_layer_size: big.len(),
            deleted,
            aux_layer_size: aux_size,
            pigeonhole_target: target,
            preimage_size: preimage.iter().map(Vec::len).max().unwrap_or(0),
        });
        chosen.push(subset.iter().map(|&k| big[k]).collect());
        tribe = preimage.into_iter().filter(|l| !l.is_empty()).collect();
        if tribe.is_empty() && n < max_layer {
            return Err(TribeError::InsufficientThickness {
                n: n + 1,
                bound: "a layer of size h + n",
                needed: h + n + 1,
                available: 0,
            });
        }
    }

    let layers = chosen
        .into_iter()
        .map(|l| l.into_iter().map(|i| members[i].clone()).collect())
        .collect();
    Ok((Tribe { layers, pattern: t.pattern.clone(), hat_len: t.hat_len }, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{DigraphBuilder, RayLabel};
    use crate::ray::Orientation::{In, Out};

    fn disjoint_tribe(sizes: &[usize], len: usize) -> (Digraph, Tribe) {
        let spec = RaySpec::all_out().with_prefix(&[In, Out]);
        let mut b = DigraphBuilder::new();
        let mut origins = Vec::new();
        let mut k = 0;
        for &s in sizes {
            let mut layer = Vec::new();
            for _ in 0..s {
                layer.push(b.add_ray_prefix(RayLabel::new(k, k), &spec, len).unwrap());
                k += 1;
            }
            origins.push(layer);
        }
        let d = b.freeze();
        let layers = origins
            .iter()
            .map(|l| l.iter().map(|&o| d.trace_pattern(o, &spec, len, 2).unwrap().remove(0)).collect())
            .collect();
        let t = Tribe::new(spec, 2, layers).unwrap();
        (d, t)
    }

    #[test]
    fn thickness_examples() {
        let (_, t) = disjoint_tribe(&[1, 2, 3], 3);
        assert!(t.is_thick_upto(3));
        let (_, t) = disjoint_tribe(&[5], 3);
        assert!(t.is_thick_upto(5));
        let (_, t) = disjoint_tribe(&[1, 1], 3);
        assert!(!t.is_thick_upto(2));
    }

    #[test]
    fn forkedness_examples() {
        let (_, mut t) = disjoint_tribe(&[3, 3], 4);
        assert!(t.is_forked());
        // the same member in two layers meets its own hat
        let dup = t.layers[0][0].clone();
        t.layers[1].push(dup);
        assert!(!t.is_forked());
        t.hat_len = 0;
        assert!(t.is_forked());
    }

    #[test]
    fn max_layer_zero_gives_empty_layer() {
        let (_, t) = disjoint_tribe(&[2], 3);
        let f = forked_subtribe(&t, 0).unwrap();
        assert_eq!(f.layers, vec![Vec::<Embedding>::new()]);
    }

    #[test]
    fn disjoint_input_sizes() {
        let (_, t) = disjoint_tribe(&[4, 5, 6, 7, 8], 4);
        let f = forked_subtribe(&t, 4).unwrap();
        assert_eq!(f.layer_sizes(), vec![0, 1, 2, 3, 4]);
        assert!(f.is_forked());
        assert!(f.is_subtribe_of(&t));
    }

    #[test]
    fn insufficient_thickness_reports_the_failing_n() {
        let (_, t) = disjoint_tribe(&[4, 4], 4);
        match forked_subtribe(&t, 2) {
            Err(TribeError::InsufficientThickness { n: 2, needed: 5, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wide_layers_need_override() {
        let (_, t) = disjoint_tribe(&[24], 3);
        assert!(matches!(forked_subtribe(&t, 1), Err(TribeError::LayerTooWide { size: 24, limit: 20 })));
        assert!(forked_subtribe_with_limit(&t, 1, 30).is_ok());
    }

    #[test]
    fn dump_round_trip() {
        let (d, t) = disjoint_tribe(&[2, 3], 4);
        let back = Tribe::from_dump(&t.to_dump(), &d).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(3, 5), 0);
    }
}
