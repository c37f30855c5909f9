//! Finitely described oriented rays.
//!
//! A ray is encoded as the sequence of its arc orientations read from the
//! degree-one origin: `Out` means the arc points away from the origin, `In`
//! means it points back towards it. A [`RaySpec`] is an explicit prefix
//! followed by one of four tail generators, which is enough to realize
//! every case of the ubiquity classification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseSpecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Out,
    In,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Out => Orientation::In,
            Orientation::In => Orientation::Out,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Orientation::Out => '+',
            Orientation::In => '-',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Orientation::Out),
            '-' => Some(Orientation::In),
            _ => None,
        }
    }
}

/// Generator for the infinite part of a ray.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TailGen {
    AllOut,
    AllIn,
    /// Phase lengths repeat `period`; orientation alternates phase by phase,
    /// starting with `first`. With an odd number of phases the arc-level word
    /// repeats every two periods.
    Periodic { period: Vec<usize>, first: Orientation },
    /// Phase lengths `start, start + step, start + 2 * step, ...`.
    Growing { start: usize, step: usize, first: Orientation },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RaySpec {
    pub prefix: Vec<Orientation>,
    pub tail: TailGen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseView {
    pub index: usize,
    pub length: usize,
    pub orientation: Orientation,
    pub first_arc: usize,
    pub last_arc: usize,
    /// The phase continues past the inspected window.
    pub truncated: bool,
}

impl PhaseView {
    /// Vertex position where the phase starts.
    pub fn start_vertex(&self) -> usize {
        self.first_arc
    }

    /// Vertex position where the phase ends.
    pub fn end_vertex(&self) -> usize {
        self.last_arc + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// All but finitely many arcs share one orientation.
    Ubiquitous,
    /// Bounded representing sequence; `c` is the largest phase length that
    /// occurs infinitely often.
    NonUbiquitousBounded { c: usize },
    NonUbiquitousUnbounded,
}

impl Verdict {
    /// Discriminant-only comparison key.
    pub fn variant(&self) -> &'static str {
        match self {
            Verdict::Ubiquitous => "ubiquitous",
            Verdict::NonUbiquitousBounded { .. } => "bounded",
            Verdict::NonUbiquitousUnbounded => "unbounded",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Ubiquitous => write!(f, "Ubiquitous (finitely many turns)"),
            Verdict::NonUbiquitousBounded { c } => write!(f, "NonUbiquitous (bounded, c={c})"),
            Verdict::NonUbiquitousUnbounded => write!(f, "NonUbiquitous (unbounded)"),
        }
    }
}

impl TailGen {
    pub fn periodic(period: &[usize], first: Orientation) -> Self {
        TailGen::Periodic { period: period.to_vec(), first }
    }

    pub fn growing(start: usize, step: usize, first: Orientation) -> Self {
        TailGen::Growing { start, step, first }
    }

    fn validate(&self) -> Result<(), ParseSpecError> {
        match self {
            TailGen::Periodic { period, .. } => {
                if period.is_empty() || period.contains(&0) {
                    return Err(ParseSpecError::InvalidTail(
                        "period phases must be non-empty and of length >= 1".into(),
                    ));
                }
            }
            TailGen::Growing { start, step, .. } => {
                if *start == 0 || *step == 0 {
                    return Err(ParseSpecError::InvalidTail(
                        "growing start and step must be >= 1".into(),
                    ));
                }
            }
            TailGen::AllOut | TailGen::AllIn => {}
        }
        Ok(())
    }

    /// Orientation of the `j`-th arc produced by the generator.
    fn at(&self, j: usize) -> Orientation {
        match self {
            TailGen::AllOut => Orientation::Out,
            TailGen::AllIn => Orientation::In,
            TailGen::Periodic { period, first } => {
                let total: usize = period.iter().sum();
                let cycle = if period.len() % 2 == 0 { total } else { 2 * total };
                let mut j = j % cycle;
                let mut o = *first;
                for &len in period.iter().cycle() {
                    if j < len {
                        return o;
                    }
                    j -= len;
                    o = o.flip();
                }
                unreachable!("cycle iterator is infinite")
            }
            TailGen::Growing { start, step, first } => {
                let (phase, _) = growing_locate(*start, *step, j);
                if phase % 2 == 0 {
                    *first
                } else {
                    first.flip()
                }
            }
        }
    }

    fn flipped(&self) -> Self {
        match self {
            TailGen::AllOut => TailGen::AllIn,
            TailGen::AllIn => TailGen::AllOut,
            TailGen::Periodic { period, first } => TailGen::Periodic {
                period: period.clone(),
                first: first.flip(),
            },
            TailGen::Growing { start, step, first } => TailGen::Growing {
                start: *start,
                step: *step,
                first: first.flip(),
            },
        }
    }

    /// Splits the generator at arc `j`: returns the arcs that remain of the
    /// phase containing `j` (empty when `j` starts a phase) and the
    /// generator for everything after them.
    fn shift(&self, j: usize) -> (Vec<Orientation>, TailGen) {
        match self {
            TailGen::AllOut | TailGen::AllIn => (Vec::new(), self.clone()),
            TailGen::Periodic { period, first } => {
                let total: usize = period.iter().sum();
                let cycle = if period.len() % 2 == 0 { total } else { 2 * total };
                let mut rem = j % cycle;
                let mut phase = 0usize;
                let mut o = *first;
                loop {
                    let len = period[phase % period.len()];
                    if rem < len {
                        let p = period.len();
                        let rotate = |k: usize| -> Vec<usize> {
                            (0..p).map(|t| period[(k + t) % p]).collect()
                        };
                        if rem == 0 {
                            return (Vec::new(), TailGen::Periodic { period: rotate(phase), first: o });
                        }
                        let left = vec![o; len - rem];
                        return (
                            left,
                            TailGen::Periodic { period: rotate(phase + 1), first: o.flip() },
                        );
                    }
                    rem -= len;
                    phase += 1;
                    o = o.flip();
                }
            }
            TailGen::Growing { start, step, first } => {
                let (phase, offset) = growing_locate(*start, *step, j);
                let o = if phase % 2 == 0 { *first } else { first.flip() };
                let len = start + phase * step;
                if offset == 0 {
                    (Vec::new(), TailGen::Growing { start: len, step: *step, first: o })
                } else {
                    (
                        vec![o; len - offset],
                        TailGen::Growing { start: len + step, step: *step, first: o.flip() },
                    )
                }
            }
        }
    }
}

/// Phase index and offset of arc `j` in a growing generator.
fn growing_locate(start: usize, step: usize, mut j: usize) -> (usize, usize) {
    let mut phase = 0usize;
    let mut len = start;
    while j >= len {
        j -= len;
        phase += 1;
        len += step;
    }
    (phase, j)
}

impl RaySpec {
    pub fn new(prefix: Vec<Orientation>, tail: TailGen) -> Self {
        RaySpec { prefix, tail }
    }

    pub fn all_out() -> Self {
        RaySpec::new(Vec::new(), TailGen::AllOut)
    }

    pub fn all_in() -> Self {
        RaySpec::new(Vec::new(), TailGen::AllIn)
    }

    pub fn periodic(period: &[usize], first: Orientation) -> Self {
        RaySpec::new(Vec::new(), TailGen::periodic(period, first))
    }

    pub fn growing(start: usize, step: usize, first: Orientation) -> Self {
        RaySpec::new(Vec::new(), TailGen::growing(start, step, first))
    }

    pub fn with_prefix(mut self, prefix: &[Orientation]) -> Self {
        self.prefix = prefix.to_vec();
        self
    }

    pub fn orientation_at(&self, i: usize) -> Orientation {
        match self.prefix.get(i) {
            Some(o) => *o,
            None => self.tail.at(i - self.prefix.len()),
        }
    }

    pub fn orientations(&self, len: usize) -> Vec<Orientation> {
        (0..len).map(|i| self.orientation_at(i)).collect()
    }

    /// Maximal same-orientation runs over arcs `[0, upto_arc)`.
    pub fn phases(&self, upto_arc: usize) -> Vec<PhaseView> {
        phases_in(0..upto_arc, |i| self.orientation_at(i))
    }

    /// Turn positions among vertices `1..upto_vertex`.
    pub fn turns(&self, upto_vertex: usize) -> Vec<usize> {
        (1..upto_vertex)
            .filter(|&j| self.orientation_at(j - 1) != self.orientation_at(j))
            .collect()
    }

    /// First `n_terms` complete phase lengths, or `None` when the ray has
    /// only finitely many turns.
    pub fn representing_sequence(&self, n_terms: usize) -> Option<Vec<usize>> {
        if matches!(self.tail, TailGen::AllOut | TailGen::AllIn) {
            return None;
        }
        let mut out = Vec::with_capacity(n_terms);
        let mut i = 0usize;
        let mut run = 0usize;
        let mut cur = self.orientation_at(0);
        while out.len() < n_terms {
            let o = self.orientation_at(i);
            if o == cur {
                run += 1;
            } else {
                out.push(run);
                run = 1;
                cur = o;
            }
            i += 1;
        }
        Some(out)
    }

    pub fn reverse(&self) -> RaySpec {
        RaySpec {
            prefix: self.prefix.iter().map(|o| o.flip()).collect(),
            tail: self.tail.flipped(),
        }
    }

    /// The tail starting at vertex position `k`, in normal form.
    pub fn tail_spec(&self, k: usize) -> RaySpec {
        let spec = if k < self.prefix.len() {
            RaySpec::new(self.prefix[k..].to_vec(), self.tail.clone())
        } else {
            let (left, tail) = self.tail.shift(k - self.prefix.len());
            RaySpec::new(left, tail)
        };
        spec.normalized()
    }

    /// Folds trailing prefix arcs into the generator where the generator
    /// can absorb them.
    pub fn normalized(&self) -> RaySpec {
        let mut prefix = self.prefix.clone();
        let mut tail = self.tail.clone();
        while let Some(&last) = prefix.last() {
            match &mut tail {
                TailGen::AllOut if last == Orientation::Out => {
                    prefix.pop();
                }
                TailGen::AllIn if last == Orientation::In => {
                    prefix.pop();
                }
                TailGen::Periodic { period, first } => {
                    let prev = *period.last().expect("non-empty period");
                    let o = first.flip();
                    if trailing_run(&prefix, o) < prev {
                        break;
                    }
                    prefix.truncate(prefix.len() - prev);
                    period.rotate_right(1);
                    *first = o;
                }
                TailGen::Growing { start, step, first } => {
                    if *start <= *step {
                        break;
                    }
                    let prev = *start - *step;
                    let o = first.flip();
                    if trailing_run(&prefix, o) < prev {
                        break;
                    }
                    prefix.truncate(prefix.len() - prev);
                    *start = prev;
                    *first = o;
                }
                _ => break,
            }
        }
        RaySpec { prefix, tail }
    }

    /// Index one past the last `In` arc when the tail is `AllOut`, i.e. the
    /// number of arcs covered by the finite phases.
    pub fn finite_part_len(&self) -> Option<usize> {
        match self.tail {
            TailGen::AllOut => Some(
                self.prefix
                    .iter()
                    .rposition(|&o| o == Orientation::In)
                    .map_or(0, |t| t + 1),
            ),
            TailGen::AllIn => Some(
                self.prefix
                    .iter()
                    .rposition(|&o| o == Orientation::Out)
                    .map_or(0, |t| t + 1),
            ),
            _ => None,
        }
    }
}

fn trailing_run(prefix: &[Orientation], o: Orientation) -> usize {
    prefix.iter().rev().take_while(|&&p| p == o).count()
}

pub(crate) fn phases_in(
    range: std::ops::Range<usize>,
    orientation: impl Fn(usize) -> Orientation,
) -> Vec<PhaseView> {
    let mut out: Vec<PhaseView> = Vec::new();
    let end = range.end;
    for i in range {
        let o = orientation(i);
        match out.last_mut() {
            Some(p) if p.orientation == o => {
                p.length += 1;
                p.last_arc = i;
            }
            _ => out.push(PhaseView {
                index: out.len(),
                length: 1,
                orientation: o,
                first_arc: i,
                last_arc: i,
                truncated: false,
            }),
        }
    }
    if let Some(p) = out.last_mut() {
        p.truncated = orientation(end) == p.orientation;
    }
    out
}

pub fn orientation_at(spec: &RaySpec, i: usize) -> Orientation {
    spec.orientation_at(i)
}

/// True iff the orientation windows of length `len` agree.
pub fn prefix_isomorphic(a: &RaySpec, offset_a: usize, b: &RaySpec, offset_b: usize, len: usize) -> bool {
    (0..len).all(|i| a.orientation_at(offset_a + i) == b.orientation_at(offset_b + i))
}

pub fn classify(spec: &RaySpec) -> Verdict {
    match &spec.tail {
        TailGen::AllOut | TailGen::AllIn => Verdict::Ubiquitous,
        TailGen::Periodic { period, .. } => Verdict::NonUbiquitousBounded {
            c: *period.iter().max().expect("non-empty period"),
        },
        TailGen::Growing { .. } => Verdict::NonUbiquitousUnbounded,
    }
}

fn word(os: &[Orientation]) -> String {
    os.iter().map(|o| o.symbol()).collect()
}

impl fmt::Display for RaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prefix={};tail=", word(&self.prefix))?;
        match &self.tail {
            TailGen::AllOut => write!(f, "out"),
            TailGen::AllIn => write!(f, "in"),
            TailGen::Periodic { period, first } => {
                let reps = if period.len() % 2 == 0 { 1 } else { 2 };
                let mut o = *first;
                let mut w = String::new();
                for &len in period.iter().cycle().take(reps * period.len()) {
                    w.extend(std::iter::repeat_n(o.symbol(), len));
                    o = o.flip();
                }
                write!(f, "period:{w}")
            }
            TailGen::Growing { start, step, first } => {
                write!(f, "grow:{start},{step},{}", first.symbol())
            }
        }
    }
}

fn parse_word(s: &str) -> Result<Vec<Orientation>, ParseSpecError> {
    s.chars()
        .map(|c| Orientation::from_symbol(c).ok_or(ParseSpecError::BadSymbol(c)))
        .collect()
}

/// Turns an arc-level period word into a phase-level generator, moving a
/// leading partial phase into the returned prefix.
fn periodic_from_word(w: &[Orientation]) -> (Vec<Orientation>, TailGen) {
    let n = w.len();
    let Some(s) = (1..n).find(|&i| w[i] != w[i - 1]) else {
        let tail = if w[0] == Orientation::Out { TailGen::AllOut } else { TailGen::AllIn };
        return (Vec::new(), tail);
    };
    let (lead, tail_gen) = if w[n - 1] != w[0] {
        (Vec::new(), w.to_vec())
    } else {
        (w[..s].to_vec(), w[s..].iter().chain(&w[..s]).copied().collect())
    };
    let mut period = Vec::new();
    let mut run = 0;
    for (i, o) in tail_gen.iter().enumerate() {
        if i > 0 && *o != tail_gen[i - 1] {
            period.push(run);
            run = 0;
        }
        run += 1;
    }
    period.push(run);
    (lead, TailGen::Periodic { period, first: tail_gen[0] })
}

impl FromStr for RaySpec {
    type Err = ParseSpecError;

    /// Grammar: `prefix=<+|-string>;tail=out|in|period:<word>|grow:<start>,<step>,<+|->`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (p, t) = s.split_once(';').ok_or(ParseSpecError::Missing("';' separator"))?;
        let prefix = p
            .trim()
            .strip_prefix("prefix=")
            .ok_or(ParseSpecError::Missing("prefix="))?;
        let tail = t.trim().strip_prefix("tail=").ok_or(ParseSpecError::Missing("tail="))?;
        let mut prefix = parse_word(prefix)?;
        let tail = match tail {
            "out" => TailGen::AllOut,
            "in" => TailGen::AllIn,
            _ if tail.starts_with("period:") => {
                let w = parse_word(&tail["period:".len()..])?;
                if w.is_empty() {
                    return Err(ParseSpecError::InvalidTail("empty period word".into()));
                }
                let (lead, gen) = periodic_from_word(&w);
                prefix.extend(lead);
                gen
            }
            _ if tail.starts_with("grow:") => {
                let parts: Vec<&str> = tail["grow:".len()..].split(',').collect();
                let [start, step, first] = parts.as_slice() else {
                    return Err(ParseSpecError::InvalidTail(tail.to_string()));
                };
                let num = |x: &str| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| ParseSpecError::InvalidTail(format!("not a count: {x}")))
                };
                let first = match parse_word(first.trim())?.as_slice() {
                    [o] => *o,
                    _ => return Err(ParseSpecError::InvalidTail(format!("bad orientation {first}"))),
                };
                TailGen::Growing { start: num(start)?, step: num(step)?, first }
            }
            other => return Err(ParseSpecError::InvalidTail(other.to_string())),
        };
        tail.validate()?;
        Ok(RaySpec { prefix, tail })
    }
}

#[cfg(test)]
mod tests {
    use super::Orientation::{In, Out};
    use super::*;

    fn spec(s: &str) -> RaySpec {
        s.parse().unwrap()
    }

    #[test]
    fn orientation_examples() {
        let s = RaySpec::all_out().with_prefix(&[Out, In]);
        assert_eq!(s.orientation_at(1), In);
        assert_eq!(RaySpec::all_out().orientation_at(1_000_000), Out);
        assert_eq!(RaySpec::periodic(&[1, 2], Out).orientation_at(2), In);
        // odd number of phases keeps alternating across period boundaries
        assert_eq!(RaySpec::periodic(&[2], Out).orientations(6), vec![Out, Out, In, In, Out, Out]);
        assert_eq!(RaySpec::periodic(&[2, 1], Out).orientations(6), vec![Out, Out, In, Out, Out, In]);
    }

    #[test]
    fn phase_examples() {
        let s = RaySpec::all_in().with_prefix(&[Out, Out, In]);
        let ph = s.phases(3);
        assert_eq!(ph.len(), 2);
        assert_eq!((ph[0].length, ph[0].orientation), (2, Out));
        assert_eq!((ph[1].length, ph[1].orientation), (1, In));
        assert!(ph[1].truncated);

        let ph = RaySpec::all_out().phases(5);
        assert_eq!(ph.len(), 1);
        assert!(ph[0].truncated && ph[0].length == 5);

        let ph = RaySpec::periodic(&[1, 1], Out).phases(4);
        assert_eq!(ph.iter().map(|p| p.length).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        assert_eq!(ph[2].orientation, Out);
    }

    #[test]
    fn turn_examples() {
        assert_eq!(RaySpec::all_in().with_prefix(&[Out, In, Out]).turns(3), vec![1, 2]);
        assert!(RaySpec::all_out().turns(100).is_empty());
        assert_eq!(RaySpec::all_in().with_prefix(&[Out, Out, In]).turns(3), vec![2]);
    }

    #[test]
    fn representing_sequence_examples() {
        assert_eq!(RaySpec::periodic(&[1, 1], Out).representing_sequence(4), Some(vec![1, 1, 1, 1]));
        assert_eq!(RaySpec::growing(1, 1, Out).representing_sequence(4), Some(vec![1, 2, 3, 4]));
        assert_eq!(RaySpec::all_out().representing_sequence(4), None);
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(RaySpec::all_out().reverse(), RaySpec::all_in());
        let s = RaySpec::periodic(&[2, 1], Out).with_prefix(&[Out, In]);
        let r = RaySpec::periodic(&[2, 1], In).with_prefix(&[In, Out]);
        assert_eq!(s.reverse(), r);
        assert_eq!(s.reverse().reverse(), s);
    }

    #[test]
    fn tail_spec_examples() {
        assert_eq!(RaySpec::all_out().tail_spec(7), RaySpec::all_out());
        assert_eq!(RaySpec::periodic(&[1, 1], Out).tail_spec(1), RaySpec::periodic(&[1, 1], In));
        assert_eq!(RaySpec::all_out().with_prefix(&[In]).tail_spec(1), RaySpec::all_out());
        assert_eq!(RaySpec::growing(1, 1, Out).tail_spec(1), RaySpec::growing(2, 1, In));
        // mid-phase split keeps the remainder as prefix
        let t = RaySpec::growing(1, 1, Out).tail_spec(2);
        assert_eq!(t, RaySpec::growing(3, 1, Out).with_prefix(&[In]));
    }

    #[test]
    fn normalization_folds_whole_phases() {
        let s = RaySpec::periodic(&[1, 1], In).with_prefix(&[Out]);
        assert_eq!(s.normalized(), RaySpec::periodic(&[1, 1], Out));
        let g = RaySpec::growing(3, 1, Out).with_prefix(&[In, In]);
        assert_eq!(g.normalized(), RaySpec::growing(2, 1, In));
    }

    #[test]
    fn prefix_isomorphism_examples() {
        let g = RaySpec::growing(1, 1, Out);
        assert!(prefix_isomorphic(&g, 5, &g, 5, 40));
        // arcs O,I,I,O,O,O: window at 0 is O,I,I and at 1 is I,I,O
        assert!(!prefix_isomorphic(&g, 0, &g, 1, 3));
        let p = RaySpec::periodic(&[1, 1], Out);
        assert!(prefix_isomorphic(&p, 0, &p, 2, 50));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&RaySpec::all_out().with_prefix(&[In, In, Out])), Verdict::Ubiquitous);
        assert_eq!(
            classify(&RaySpec::periodic(&[1, 1], Out)),
            Verdict::NonUbiquitousBounded { c: 1 }
        );
        assert_eq!(classify(&RaySpec::growing(1, 1, Out)), Verdict::NonUbiquitousUnbounded);
        assert_eq!(
            classify(&RaySpec::periodic(&[2, 1], Out).with_prefix(&[Out; 9])),
            Verdict::NonUbiquitousBounded { c: 2 }
        );
    }

    #[test]
    fn text_grammar() {
        assert_eq!(spec("prefix=;tail=out"), RaySpec::all_out());
        assert_eq!(spec("prefix=;tail=period:+-"), RaySpec::periodic(&[1, 1], Out));
        assert_eq!(spec("prefix=-+;tail=grow:1,2,-"), RaySpec::growing(1, 2, In).with_prefix(&[In, Out]));
        // a period word that starts mid-phase
        let s = spec("prefix=;tail=period:+-+");
        assert_eq!(s.orientations(9), parse_word("+-++-++-+").unwrap());
        assert_eq!(spec("prefix=;tail=period:++"), RaySpec::all_out());
        assert!("prefix=x;tail=out".parse::<RaySpec>().is_err());
        assert!("prefix=;tail=grow:0,1,+".parse::<RaySpec>().is_err());
        assert!("tail=out".parse::<RaySpec>().is_err());
    }

    #[test]
    fn display_round_trips_orientations() {
        for s in [
            RaySpec::periodic(&[2, 1], Out).with_prefix(&[In]),
            RaySpec::periodic(&[1, 3], In),
            RaySpec::growing(2, 3, In),
            RaySpec::all_in().with_prefix(&[Out, Out]),
        ] {
            let back: RaySpec = s.to_string().parse().unwrap();
            assert_eq!(back.orientations(80), s.orientations(80), "{s}");
        }
    }
}
