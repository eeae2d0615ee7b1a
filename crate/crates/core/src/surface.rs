//! Pants decompositions and the one-relator presentation of π₁(S).
//!
//! Generators are `a_1, b_1, …, a_g, b_g` with indices `2(k−1)` and
//! `2(k−1)+1`, and the relator is `[a_1,b_1]⋯[a_g,b_g]` with
//! `[x,y] = x y x⁻¹ y⁻¹`.
//!
//! The only layout the holonomy builder understands is the linear chain:
//!
//! ```text
//!  a_1 ─ P ─ c_1 ─ Q_2 ─ d_2 ─ R_2 ─ c_2 ─ … ─ c_{g−1} ─ P' ─ a_g
//!               (a_2 joins Q_2 and R_2)
//! ```
//!
//! Curves are ordered `a_1..a_g, c_1..c_{g−1}, d_2..d_{g−1}` and edge `j` of
//! the graph is curve `j`. Each `a_k` is non-separating; the `c` and `d`
//! curves form a spanning tree of the pants graph.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moebius::Letter;

/// A word in the surface generators.
pub type Word = Vec<Letter>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("invalid pants decomposition: {}", format_diagnostics(.0))]
    InvalidDecomposition(Vec<Diagnostic>),
    #[error("only the linear-chain layout is supported")]
    UnsupportedLayout,
    #[error("genus must be at least 2, got {0}")]
    GenusTooSmall(usize),
    #[error("malformed pants graph JSON: {0}")]
    Json(String),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Diagnostic {
    BadCounts {
        genus: usize,
        vertices: usize,
        edges: usize,
    },
    SlotOutOfRange {
        edge: usize,
        slot: SlotRef,
    },
    DanglingSlot {
        slot: SlotRef,
    },
    ReusedSlot {
        slot: SlotRef,
    },
    Disconnected {
        components: usize,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::BadCounts {
                genus,
                vertices,
                edges,
            } => write!(
                f,
                "genus {genus} needs {} pants and {} curves, found {vertices} and {edges}",
                2 * genus - 2,
                3 * genus - 3
            ),
            Diagnostic::SlotOutOfRange { edge, slot } => {
                write!(f, "edge {edge} refers to missing slot {slot}")
            }
            Diagnostic::DanglingSlot { slot } => write!(f, "slot {slot} is not glued"),
            Diagnostic::ReusedSlot { slot } => write!(f, "slot {slot} is glued twice"),
            Diagnostic::Disconnected { components } => {
                write!(f, "pants graph has {components} components")
            }
        }
    }
}

/// A boundary slot `(pants, slot)` with `slot ∈ {0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct SlotRef {
    pub vertex: usize,
    pub slot: usize,
}

impl SlotRef {
    pub const fn new(vertex: usize, slot: usize) -> Self {
        SlotRef { vertex, slot }
    }
}

impl From<[usize; 2]> for SlotRef {
    fn from(v: [usize; 2]) -> Self {
        SlotRef::new(v[0], v[1])
    }
}

impl From<SlotRef> for [usize; 2] {
    fn from(s: SlotRef) -> Self {
        [s.vertex, s.slot]
    }
}

impl fmt::Display for SlotRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.vertex, self.slot)
    }
}

/// A pair of pants. Carries only a display name; slots are addressed by
/// position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pants {
    pub name: String,
}

/// A gluing of two boundary slots along one pants curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub from: SlotRef,
    pub to: SlotRef,
}

/// Trivalent pants graph of a closed surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PantsDecomposition {
    pub genus: usize,
    pub vertices: Vec<Pants>,
    pub edges: Vec<Gluing>,
}

impl PantsDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pants graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SurfaceError> {
        serde_json::from_str(s).map_err(|e| SurfaceError::Json(e.to_string()))
    }

    pub fn curve_count(&self) -> usize {
        self.edges.len()
    }

    /// Curve glued into each slot of each pants.
    pub fn slot_curves(&self) -> Vec<[usize; 3]> {
        let mut out = vec![[usize::MAX; 3]; self.vertices.len()];
        for (j, e) in self.edges.iter().enumerate() {
            for s in [e.from, e.to] {
                if let Some(v) = out.get_mut(s.vertex) {
                    if s.slot < 3 {
                        v[s.slot] = j;
                    }
                }
            }
        }
        out
    }
}

/// Generators, relator and pants-curve words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfacePresentation {
    pub genus: usize,
    pub relator: Word,
    pub pants_curve_words: Vec<Word>,
}

impl SurfacePresentation {
    pub fn generator_count(&self) -> usize {
        2 * self.genus
    }

    /// `a1`, `b1`, … in generator order.
    pub fn generator_names(&self) -> Vec<String> {
        (0..self.generator_count()).map(generator_name).collect()
    }
}

pub fn a(k: usize) -> usize {
    2 * (k - 1)
}

pub fn b(k: usize) -> usize {
    2 * (k - 1) + 1
}

pub fn generator_name(i: usize) -> String {
    let kind = if i % 2 == 0 { 'a' } else { 'b' };
    format!("{kind}{}", i / 2 + 1)
}

/// Human-readable word; inverses are written with upper-case letters.
pub fn format_word(w: &[Letter]) -> String {
    w.iter()
        .map(|l| {
            let n = generator_name(l.generator);
            if l.inverse {
                n.to_uppercase()
            } else {
                n
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn inverse_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inverted()).collect()
}

fn commutator(x: usize, y: usize) -> Word {
    vec![Letter::new(x), Letter::new(y), Letter::inv(x), Letter::inv(y)]
}

/// `∏_{i ≤ k} [a_i, b_i]`.
fn partial_relator(k: usize) -> Word {
    (1..=k).flat_map(|i| commutator(a(i), b(i))).collect()
}

pub fn surface_relator(genus: usize) -> Word {
    partial_relator(genus)
}

/// True when no adjacent pair cancels, cyclically.
pub fn is_cyclically_reduced(w: &[Letter]) -> bool {
    if w.is_empty() {
        return false;
    }
    let n = w.len();
    (0..n).all(|i| {
        let (x, y) = (w[i], w[(i + 1) % n]);
        n == 1 || !(x.generator == y.generator && x.inverse != y.inverse)
    })
}

/// Pants index of `Q_k` and `R_k` in the chain.
fn middle_pants(k: usize) -> (usize, usize) {
    (2 * k - 3, 2 * k - 2)
}

/// The linear-chain model of genus `g`.
pub fn canonical_chain(genus: usize) -> Result<(PantsDecomposition, SurfacePresentation), SurfaceError> {
    if genus < 2 {
        return Err(SurfaceError::GenusTooSmall(genus));
    }
    let g = genus;
    let last = 2 * g - 3;
    let mut vertices = vec![Pants { name: "P1".into() }];
    for k in 2..g {
        vertices.push(Pants {
            name: format!("Q{k}"),
        });
        vertices.push(Pants {
            name: format!("R{k}"),
        });
    }
    vertices.push(Pants {
        name: format!("P{g}"),
    });

    let mut edges = Vec::with_capacity(3 * g - 3);
    // a-curves
    edges.push(Gluing {
        from: SlotRef::new(0, 0),
        to: SlotRef::new(0, 1),
    });
    for k in 2..g {
        let (q, r) = middle_pants(k);
        edges.push(Gluing {
            from: SlotRef::new(q, 1),
            to: SlotRef::new(r, 1),
        });
    }
    edges.push(Gluing {
        from: SlotRef::new(last, 1),
        to: SlotRef::new(last, 2),
    });
    // c-curves: c_k leaves the piece ending handle k
    for k in 1..g {
        let left = if k == 1 { 0 } else { middle_pants(k).1 };
        let right = if k + 1 == g { last } else { middle_pants(k + 1).0 };
        edges.push(Gluing {
            from: SlotRef::new(left, 2),
            to: SlotRef::new(right, 0),
        });
    }
    // d-curves
    for k in 2..g {
        let (q, r) = middle_pants(k);
        edges.push(Gluing {
            from: SlotRef::new(q, 2),
            to: SlotRef::new(r, 0),
        });
    }

    let mut words: Vec<Word> = (1..=g).map(|k| vec![Letter::new(a(k))]).collect();
    words.extend((1..g).map(partial_relator));
    for k in 2..g {
        let mut w = partial_relator(k - 1);
        w.push(Letter::new(a(k)));
        words.push(w);
    }

    Ok((
        PantsDecomposition {
            genus,
            vertices,
            edges,
        },
        SurfacePresentation {
            genus,
            relator: surface_relator(genus),
            pants_curve_words: words,
        },
    ))
}

/// The genus-2 model: curves `a_1`, `a_2`, `[a_1, b_1]`.
pub fn canonical_genus2() -> (PantsDecomposition, SurfacePresentation) {
    canonical_chain(2).expect("genus 2 is valid")
}

/// Checks counts, slot bijectivity and connectivity.
pub fn validate(d: &PantsDecomposition) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let g = d.genus;
    if g < 2 || d.vertices.len() != 2 * g - 2 || d.edges.len() != 3 * g - 3 {
        diags.push(Diagnostic::BadCounts {
            genus: g,
            vertices: d.vertices.len(),
            edges: d.edges.len(),
        });
    }
    let nv = d.vertices.len();
    let mut used = vec![[0usize; 3]; nv];
    for (j, e) in d.edges.iter().enumerate() {
        for s in [e.from, e.to] {
            if s.vertex >= nv || s.slot >= 3 {
                diags.push(Diagnostic::SlotOutOfRange { edge: j, slot: s });
            } else {
                used[s.vertex][s.slot] += 1;
            }
        }
    }
    for (v, slots) in used.iter().enumerate() {
        for (s, &n) in slots.iter().enumerate() {
            let slot = SlotRef::new(v, s);
            if n == 0 {
                diags.push(Diagnostic::DanglingSlot { slot });
            } else if n > 1 {
                diags.push(Diagnostic::ReusedSlot { slot });
            }
        }
    }
    let components = count_components(d);
    if components > 1 {
        diags.push(Diagnostic::Disconnected { components });
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

fn count_components(d: &PantsDecomposition) -> usize {
    let nv = d.vertices.len();
    let mut adj = vec![Vec::new(); nv];
    for e in &d.edges {
        if e.from.vertex < nv && e.to.vertex < nv {
            adj[e.from.vertex].push(e.to.vertex);
            adj[e.to.vertex].push(e.from.vertex);
        }
    }
    let mut seen = vec![false; nv];
    let mut components = 0;
    for start in 0..nv {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    components
}

fn same_gluing(x: &Gluing, y: &Gluing) -> bool {
    (x.from == y.from && x.to == y.to) || (x.from == y.to && x.to == y.from)
}

/// Requires `d` to be valid and to be the linear chain of its genus.
pub(crate) fn check_chain(d: &PantsDecomposition) -> Result<(), SurfaceError> {
    validate(d).map_err(SurfaceError::InvalidDecomposition)?;
    let (chain, _) = canonical_chain(d.genus)?;
    let matches = chain.vertices.len() == d.vertices.len()
        && chain
            .edges
            .iter()
            .zip(d.edges.iter())
            .all(|(x, y)| same_gluing(x, y));
    if matches {
        Ok(())
    } else {
        Err(SurfaceError::UnsupportedLayout)
    }
}

/// One word per edge, in the generator layout used by the holonomy builder.
pub fn pants_curve_words(d: &PantsDecomposition) -> Result<Vec<Word>, SurfaceError> {
    check_chain(d)?;
    Ok(canonical_chain(d.genus)?.1.pants_curve_words)
}

/// Presentation matching [`pants_curve_words`].
pub fn presentation(d: &PantsDecomposition) -> Result<SurfacePresentation, SurfaceError> {
    check_chain(d)?;
    Ok(canonical_chain(d.genus)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus2_model() {
        let (d, p) = canonical_genus2();
        assert_eq!(d.vertices.len(), 2);
        assert_eq!(d.edges.len(), 3);
        assert_eq!(p.relator.len(), 8);
        assert_eq!(validate(&d), Ok(()));
        let names: Vec<String> = p.pants_curve_words.iter().map(|w| format_word(w)).collect();
        assert_eq!(names, ["a1", "a2", "a1 b1 A1 B1"]);
    }

    #[test]
    fn genus3_words() {
        let (d, _) = canonical_chain(3).unwrap();
        let words = pants_curve_words(&d).unwrap();
        assert_eq!(words.len(), 6);
        let lens: Vec<usize> = words.iter().map(|w| w.len()).collect();
        assert_eq!(lens, [1, 1, 1, 4, 8, 5]);
        assert!(words.iter().all(|w| is_cyclically_reduced(w)));
    }

    #[test]
    fn bad_counts() {
        let (mut d, _) = canonical_chain(3).unwrap();
        d.vertices.pop();
        let diags = validate(&d).unwrap_err();
        assert!(matches!(diags[0], Diagnostic::BadCounts { vertices: 3, .. }));
    }

    #[test]
    fn disconnected_graph() {
        // two disjoint copies of the genus-2 graph, claimed as genus 3
        let (g2, _) = canonical_genus2();
        let mut edges = g2.edges.clone();
        for e in &g2.edges {
            edges.push(Gluing {
                from: SlotRef::new(e.from.vertex + 2, e.from.slot),
                to: SlotRef::new(e.to.vertex + 2, e.to.slot),
            });
        }
        let d = PantsDecomposition {
            genus: 3,
            vertices: (0..4).map(|i| Pants { name: format!("X{i}") }).collect(),
            edges,
        };
        assert_eq!(validate(&d), Err(vec![Diagnostic::Disconnected { components: 2 }]));
    }

    #[test]
    fn dangling_slot() {
        let (mut d, _) = canonical_genus2();
        d.edges[0].to = SlotRef::new(0, 0);
        let diags = validate(&d).unwrap_err();
        assert!(diags.contains(&Diagnostic::DanglingSlot {
            slot: SlotRef::new(0, 1)
        }));
        assert!(diags.contains(&Diagnostic::ReusedSlot {
            slot: SlotRef::new(0, 0)
        }));
        assert!(matches!(
            pants_curve_words(&d),
            Err(SurfaceError::InvalidDecomposition(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let (d, _) = canonical_chain(3).unwrap();
        let s = d.to_json();
        assert_eq!(PantsDecomposition::from_json(&s).unwrap(), d);
    }

    #[test]
    fn genus_one_rejected() {
        assert_eq!(canonical_chain(1).unwrap_err(), SurfaceError::GenusTooSmall(1));
    }
}
