//! Graph hierarchies approximating the Sierpinski gasket and the circle.
//!
//! SG vertices are addressed by itineraries `w ī` (a finite word followed by a
//! repeated symbol). Interior vertices have two itineraries; the
//! lexicographically smaller one is canonical, which for a reduced word means
//! the last letter of `w` is smaller than the tail. Vertices are numbered by
//! `(|w|, w, tail)`, so the ids of `V_m` are a prefix of the ids of `V_n` for
//! every `m <= n`. Ids are computed in closed form from the itinerary; no
//! coordinate lookups are involved.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RealField;

pub const SG_MAX_LEVEL: u32 = 12;
pub const RING_MIN_LEVEL: u32 = 1;
pub const RING_MAX_LEVEL: u32 = 20;

/// Corners of the base triangle: `v_1`, `v_2`, `v_3`.
pub const SG_CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [0.5, 0.866_025_403_784_438_6], [1.0, 0.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FractalKind {
    Sg,
    Ring,
}

impl FractalKind {
    pub fn radix(self) -> u64 {
        match self {
            FractalKind::Sg => 3,
            FractalKind::Ring => 2,
        }
    }

    /// Offset added to 0-based digits when printing words (SG letters are 1..=3).
    fn symbol_offset(self) -> u8 {
        match self {
            FractalKind::Sg => 1,
            FractalKind::Ring => 0,
        }
    }
}

impl fmt::Display for FractalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FractalKind::Sg => f.write_str("sg"),
            FractalKind::Ring => f.write_str("ring"),
        }
    }
}

impl std::str::FromStr for FractalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sg" => Ok(FractalKind::Sg),
            "ring" => Ok(FractalKind::Ring),
            other => Err(Error::Unsupported(format!("fractal '{other}'"))),
        }
    }
}

/// A finite word stored as a fixed-radix integer plus its length.
///
/// Digits are 0-based. The derived ordering is `(len, code)`, which is the
/// `(|w|, lexicographic)` order used for loop bases and degree vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    code: u64,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, code: 0 };

    pub fn new(len: u32, code: u64) -> Word {
        Word { len: len as u8, code }
    }

    pub fn from_digits(digits: &[u8], radix: u64) -> Word {
        let code = digits.iter().fold(0u64, |acc, &d| {
            debug_assert!((d as u64) < radix);
            acc * radix + d as u64
        });
        Word::new(digits.len() as u32, code)
    }

    pub fn len(self) -> u32 {
        self.len as u32
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn code(self) -> u64 {
        self.code
    }

    pub fn push(self, digit: u8, radix: u64) -> Word {
        Word {
            len: self.len + 1,
            code: self.code * radix + digit as u64,
        }
    }

    pub fn last(self, radix: u64) -> Option<u8> {
        (self.len > 0).then(|| (self.code % radix) as u8)
    }

    pub fn parent(self, radix: u64) -> Word {
        debug_assert!(self.len > 0);
        Word {
            len: self.len - 1,
            code: self.code / radix,
        }
    }

    /// Digits from first to last.
    pub fn digits(self, radix: u64) -> Vec<u8> {
        let mut out = vec![0u8; self.len as usize];
        let mut c = self.code;
        for d in out.iter_mut().rev() {
            *d = (c % radix) as u8;
            c /= radix;
        }
        out
    }

    pub fn has_prefix(self, prefix: Word, radix: u64) -> bool {
        prefix.len <= self.len && self.code / radix.pow((self.len - prefix.len) as u32) == prefix.code
    }

    /// All words of the given length in lexicographic order.
    pub fn all(len: u32, radix: u64) -> impl Iterator<Item = Word> {
        (0..radix.pow(len)).map(move |code| Word::new(len, code))
    }

    /// All words of length `<= max_len`, ordered by `(|w|, lex)`.
    pub fn up_to(max_len: u32, radix: u64) -> impl Iterator<Item = Word> {
        (0..=max_len).flat_map(move |l| Word::all(l, radix))
    }

    pub fn label(self, kind: FractalKind) -> String {
        if self.len == 0 {
            return "eps".to_string();
        }
        self.digits(kind.radix())
            .into_iter()
            .map(|d| char::from(b'0' + d + kind.symbol_offset()))
            .collect()
    }

    pub fn parse(s: &str, kind: FractalKind) -> Result<Word> {
        let s = s.trim();
        if s == "eps" || s.is_empty() {
            return Ok(Word::EMPTY);
        }
        let radix = kind.radix();
        let mut digits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let d = ch
                .to_digit(10)
                .and_then(|d| (d as u8).checked_sub(kind.symbol_offset()))
                .filter(|&d| (d as u64) < radix)
                .ok_or_else(|| Error::UnknownWord(s.to_string()))?;
            digits.push(d);
        }
        Ok(Word::from_digits(&digits, radix))
    }
}

/// Symbolic address `w ī` of a vertex, in canonical (reduced, lexicographically smaller) form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itinerary {
    pub word: Word,
    /// 0-based repeated symbol.
    pub tail: u8,
}

impl Itinerary {
    pub fn label(&self, kind: FractalKind) -> String {
        let w = if self.word.is_empty() {
            String::new()
        } else {
            self.word.label(kind)
        };
        format!("{w}~{}", self.tail + kind.symbol_offset())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub itinerary: Itinerary,
    pub coords: [f64; 2],
    pub is_boundary: bool,
}

/// Number of vertices of `Γ_n` for the gasket: `(3^{n+1} + 3) / 2`.
pub fn sg_vertex_count(level: u32) -> usize {
    (3usize.pow(level + 1) + 3) / 2
}

/// Reduces `F_w(v_i)` to its canonical itinerary.
fn sg_canonical(mut word: Word, corner: u8) -> Itinerary {
    while word.last(3) == Some(corner) {
        word = word.parent(3);
    }
    match word.last(3) {
        None => Itinerary { word, tail: corner },
        Some(a) if a < corner => Itinerary { word, tail: corner },
        Some(a) => Itinerary {
            word: word.parent(3).push(corner, 3),
            tail: a,
        },
    }
}

fn sg_itinerary_id(it: Itinerary) -> usize {
    if it.word.is_empty() {
        return it.tail as usize;
    }
    let last = it.word.last(3).unwrap();
    debug_assert!(last < it.tail);
    let pair = (last + it.tail - 1) as usize;
    sg_vertex_count(it.word.len() - 1) + 3 * it.word.parent(3).code() as usize + pair
}

/// Id of the corner `F_w(v_{corner+1})` of the SG cell `T_w`; valid in every `Γ_n` with `n >= |w|`.
pub fn sg_corner_id(word: Word, corner: u8) -> usize {
    sg_itinerary_id(sg_canonical(word, corner))
}

fn sg_point(word: Word, corner: u8) -> [f64; 2] {
    let mut p = SG_CORNERS[corner as usize];
    for d in word.digits(3).into_iter().rev() {
        let q = SG_CORNERS[d as usize];
        p = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
    }
    p
}

/// Weighted undirected graph consumed by the dynamics and energy routines.
pub trait Network {
    fn vertex_count(&self) -> usize;
    fn edges(&self) -> &[[usize; 2]];
    /// Per-edge coupling weights (conductance times multiplicity).
    fn weights(&self) -> &[f64];
}

/// One level `Γ_n` of the SG or ring hierarchy. Immutable once built.
#[derive(Clone, Debug)]
pub struct FractalGraph {
    kind: FractalKind,
    level: u32,
    vertices: Vec<Vertex>,
    edges: Vec<[usize; 2]>,
    weights: Vec<f64>,
    conductance: f64,
    /// Flattened cell corners, `corners_per_cell` entries per word in lexicographic order.
    cells: Vec<usize>,
    corners_per_cell: usize,
    adjacency_offsets: Vec<usize>,
    adjacency: Vec<(usize, usize)>,
}

/// Builds `Γ_n` for the Sierpinski gasket.
pub fn build_sg_graph(level: u32) -> Result<FractalGraph> {
    if level > SG_MAX_LEVEL {
        return Err(Error::LevelOutOfRange {
            level,
            min: 0,
            max: SG_MAX_LEVEL,
        });
    }
    let n_vertices = sg_vertex_count(level);
    let mut vertices = Vec::with_capacity(n_vertices);
    for tail in 0..3u8 {
        let it = Itinerary {
            word: Word::EMPTY,
            tail,
        };
        vertices.push(Vertex {
            id: tail as usize,
            itinerary: it,
            coords: SG_CORNERS[tail as usize],
            is_boundary: true,
        });
    }
    for k in 1..=level {
        for prefix in Word::all(k - 1, 3) {
            for (last, tail) in [(0u8, 1u8), (0, 2), (1, 2)] {
                let word = prefix.push(last, 3);
                let it = Itinerary { word, tail };
                let id = vertices.len();
                debug_assert_eq!(id, sg_itinerary_id(it));
                vertices.push(Vertex {
                    id,
                    itinerary: it,
                    coords: sg_point(word, tail),
                    is_boundary: false,
                });
            }
        }
    }

    let conductance = (5.0f64 / 3.0).powi(level as i32);
    let n_cells = 3usize.pow(level);
    let mut cells = Vec::with_capacity(3 * n_cells);
    let mut edges = Vec::with_capacity(3 * n_cells);
    for w in Word::all(level, 3) {
        let c = [0u8, 1, 2].map(|i| sg_corner_id(w, i));
        cells.extend_from_slice(&c);
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            edges.push(ordered(c[a], c[b]));
        }
    }
    let weights = vec![conductance; edges.len()];
    Ok(FractalGraph::assemble(
        FractalKind::Sg,
        level,
        vertices,
        edges,
        weights,
        conductance,
        cells,
        3,
    ))
}

/// Builds the nearest-neighbour ring with `2^n` vertices at `i 2^{-n}`.
///
/// At `n = 1` both neighbours `i ± 1` coincide; the pair is stored as one edge
/// carrying multiplicity 2 in its weight.
pub fn build_ring_graph(level: u32) -> Result<FractalGraph> {
    if !(RING_MIN_LEVEL..=RING_MAX_LEVEL).contains(&level) {
        return Err(Error::LevelOutOfRange {
            level,
            min: RING_MIN_LEVEL,
            max: RING_MAX_LEVEL,
        });
    }
    let size = 1usize << level;
    let vertices = (0..size)
        .map(|i| Vertex {
            id: i,
            itinerary: ring_itinerary(i, level),
            coords: [i as f64 / size as f64, 0.0],
            is_boundary: i == 0,
        })
        .collect();
    let conductance = size as f64;
    let (edges, weights) = if size == 2 {
        (vec![[0, 1]], vec![2.0 * conductance])
    } else {
        (
            (0..size).map(|i| ordered(i, (i + 1) % size)).collect(),
            vec![conductance; size],
        )
    };
    let cells = (0..size).flat_map(|i| [i, (i + 1) % size]).collect();
    Ok(FractalGraph::assemble(
        FractalKind::Ring,
        level,
        vertices,
        edges,
        weights,
        conductance,
        cells,
        2,
    ))
}

fn ring_itinerary(i: usize, level: u32) -> Itinerary {
    if i == 0 {
        return Itinerary {
            word: Word::EMPTY,
            tail: 0,
        };
    }
    // i 2^{-n} = 0.b_1..b_k with b_k = 1; canonical form is b_1..b_{k-1} 0 followed by 1̄.
    let tz = i.trailing_zeros();
    let k = level - tz;
    let code = (i >> tz) as u64 - 1;
    Itinerary {
        word: Word::new(k, code),
        tail: 1,
    }
}

fn ordered(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl FractalGraph {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: FractalKind,
        level: u32,
        vertices: Vec<Vertex>,
        edges: Vec<[usize; 2]>,
        weights: Vec<f64>,
        conductance: f64,
        cells: Vec<usize>,
        corners_per_cell: usize,
    ) -> Self {
        let n = vertices.len();
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e[0]] += 1;
            degree[e[1]] += 1;
        }
        let mut adjacency_offsets = Vec::with_capacity(n + 1);
        adjacency_offsets.push(0);
        for d in &degree {
            adjacency_offsets.push(adjacency_offsets.last().unwrap() + d);
        }
        let mut fill = adjacency_offsets.clone();
        let mut adjacency = vec![(0, 0); adjacency_offsets[n]];
        for (k, e) in edges.iter().enumerate() {
            adjacency[fill[e[0]]] = (e[1], k);
            fill[e[0]] += 1;
            adjacency[fill[e[1]]] = (e[0], k);
            fill[e[1]] += 1;
        }
        FractalGraph {
            kind,
            level,
            vertices,
            edges,
            weights,
            conductance,
            cells,
            corners_per_cell,
            adjacency_offsets,
            adjacency,
        }
    }

    pub fn kind(&self) -> FractalKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Level conductance: `(5/3)^n` for SG, `2^n` for the ring.
    pub fn conductance(&self) -> f64 {
        self.conductance
    }

    pub fn boundary_ids(&self) -> Vec<usize> {
        match self.kind {
            FractalKind::Sg => vec![0, 1, 2],
            FractalKind::Ring => vec![0],
        }
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.vertices.get(v).is_some_and(|x| x.is_boundary)
    }

    /// `(neighbour, edge index)` pairs of vertex `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.adjacency_offsets[v]..self.adjacency_offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / self.corners_per_cell
    }

    pub fn corners_per_cell(&self) -> usize {
        self.corners_per_cell
    }

    /// Corners of the cell with the given word code at the graph's own level.
    pub fn cell_by_code(&self, code: usize) -> &[usize] {
        let k = self.corners_per_cell;
        &self.cells[k * code..k * (code + 1)]
    }

    /// Corner ids of cell `T_w`, ordered `(F_w(v_1), F_w(v_2), F_w(v_3))` (pair for the ring).
    pub fn cell_vertices(&self, w: Word) -> Result<&[usize]> {
        if w.len() != self.level || w.code() as usize >= self.cell_count() {
            return Err(Error::UnknownWord(w.label(self.kind)));
        }
        Ok(self.cell_by_code(w.code() as usize))
    }

    /// Iterates `(word, corners)` over all `n`-cells.
    pub fn cells(&self) -> impl Iterator<Item = (Word, &[usize])> + '_ {
        let level = self.level;
        self.cells
            .chunks(self.corners_per_cell)
            .enumerate()
            .map(move |(c, corners)| (Word::new(level, c as u64), corners))
    }

    /// Ids in this graph of the vertices of the coarser level `m`, in `V_m` order.
    pub fn coarse_ids(&self, m: u32) -> Result<Vec<usize>> {
        if m > self.level {
            return Err(Error::LevelOutOfRange {
                level: m,
                min: 0,
                max: self.level,
            });
        }
        Ok(match self.kind {
            FractalKind::Sg => (0..sg_vertex_count(m)).collect(),
            FractalKind::Ring => {
                if m < RING_MIN_LEVEL {
                    return Err(Error::LevelOutOfRange {
                        level: m,
                        min: RING_MIN_LEVEL,
                        max: self.level,
                    });
                }
                let stride = 1usize << (self.level - m);
                (0..1usize << m).map(|i| i * stride).collect()
            }
        })
    }

    /// Restriction `P_m f = f|_{V_m}`.
    pub fn restrict(&self, m: u32, f: &RealField) -> Result<RealField> {
        self.check_field(f)?;
        let ids = self.coarse_ids(m)?;
        Ok(RealField::new(m, ids.iter().map(|&i| f.values()[i]).collect()))
    }

    pub fn check_len(&self, len: usize, level: u32) -> Result<()> {
        if len != self.len() || level != self.level {
            return Err(Error::FieldMismatch {
                expected: self.len(),
                got: len,
                level: self.level,
                got_level: level,
            });
        }
        Ok(())
    }

    pub fn check_field(&self, f: &RealField) -> Result<()> {
        self.check_len(f.len(), f.level())
    }

    pub fn export(&self) -> GraphExport {
        GraphExport {
            kind: self.kind,
            level: self.level,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexExport {
                    id: v.id,
                    itinerary: v.itinerary.label(self.kind),
                    x: v.coords[0],
                    y: v.coords[1],
                    boundary: v.is_boundary,
                })
                .collect(),
            edges: self.edges.clone(),
            cells: self.cells().map(|(w, c)| (w.label(self.kind), c.to_vec())).collect(),
        }
    }
}

impl Network for FractalGraph {
    fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VertexExport {
    pub id: usize,
    pub itinerary: String,
    pub x: f64,
    pub y: f64,
    pub boundary: bool,
}

/// JSON layout of an exported graph.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphExport {
    pub kind: FractalKind,
    pub level: u32,
    pub vertices: Vec<VertexExport>,
    pub edges: Vec<[usize; 2]>,
    pub cells: BTreeMap<String, Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sg_small_counts() {
        for (n, v, e, c) in [(0, 3, 3, 1), (1, 6, 9, 3), (2, 15, 27, 9)] {
            let g = build_sg_graph(n).unwrap();
            assert_eq!(g.len(), v);
            assert_eq!(g.edges().len(), e);
            assert_eq!(g.cell_count(), c);
        }
    }

    #[test]
    fn sg_level_guard() {
        assert!(matches!(
            build_sg_graph(13),
            Err(Error::LevelOutOfRange { level: 13, .. })
        ));
    }

    #[test]
    fn sg_order_starts_with_boundary_then_level_one() {
        let g = build_sg_graph(2).unwrap();
        let labels: Vec<_> = g.vertices()[..6]
            .iter()
            .map(|v| v.itinerary.label(FractalKind::Sg))
            .collect();
        assert_eq!(labels, ["~1", "~2", "~3", "1~2", "1~3", "2~3"]);
    }

    #[test]
    fn sg_degrees() {
        let g = build_sg_graph(4).unwrap();
        for v in g.vertices() {
            assert_eq!(g.degree(v.id), if v.is_boundary { 2 } else { 4 });
        }
    }

    #[test]
    fn sg_conductance_scaling() {
        let g = build_sg_graph(3).unwrap();
        assert!((g.conductance() - (5.0f64 / 3.0).powi(3)).abs() < 1e-15);
        assert!(g.weights().iter().all(|&w| w == g.conductance()));
    }

    #[test]
    fn cell_vertices_root_and_children() {
        let g0 = build_sg_graph(0).unwrap();
        assert_eq!(g0.cell_vertices(Word::EMPTY).unwrap(), &[0, 1, 2]);

        let g1 = build_sg_graph(1).unwrap();
        let c = g1.cell_vertices(Word::parse("1", FractalKind::Sg).unwrap()).unwrap();
        let pts: Vec<_> = c.iter().map(|&i| g1.vertices()[i].coords).collect();
        let expect = [[0.0, 0.0], [0.25, SG_CORNERS[1][1] / 2.0], [0.5, 0.0]];
        for (p, q) in pts.iter().zip(expect) {
            assert!((p[0] - q[0]).abs() < 1e-15 && (p[1] - q[1]).abs() < 1e-15);
        }
        assert!(g1.cell_vertices(Word::EMPTY).is_err());
    }

    #[test]
    fn ring_shapes() {
        let g = build_ring_graph(2).unwrap();
        let xs: Vec<_> = g.vertices().iter().map(|v| v.coords[0]).collect();
        assert_eq!(xs, [0.0, 0.25, 0.5, 0.75]);

        let g3 = build_ring_graph(3).unwrap();
        assert_eq!(g3.len(), 8);
        assert_eq!(g3.edges().len(), 8);
        assert!((0..8).all(|v| g3.degree(v) == 2));

        let g1 = build_ring_graph(1).unwrap();
        assert_eq!(g1.edges(), &[[0, 1]]);
        assert_eq!(g1.weights(), &[4.0]);
        assert!(build_ring_graph(0).is_err());
        assert!(build_ring_graph(21).is_err());
    }

    #[test]
    fn ring_itineraries_are_distinct() {
        let g = build_ring_graph(4).unwrap();
        let mut its: Vec<_> = g.vertices().iter().map(|v| v.itinerary).collect();
        its.sort();
        its.dedup();
        assert_eq!(its.len(), 16);
        assert_eq!(g.vertices()[4].itinerary.label(FractalKind::Ring), "00~1");
    }

    #[test]
    fn word_parse_and_label() {
        let w = Word::parse("32", FractalKind::Sg).unwrap();
        assert_eq!(w.digits(3), vec![2, 1]);
        assert_eq!(w.label(FractalKind::Sg), "32");
        assert_eq!(Word::parse("eps", FractalKind::Sg).unwrap(), Word::EMPTY);
        assert!(Word::parse("4", FractalKind::Sg).is_err());
        assert!(w.has_prefix(Word::parse("3", FractalKind::Sg).unwrap(), 3));
        assert!(!w.has_prefix(Word::parse("2", FractalKind::Sg).unwrap(), 3));
    }

    #[test]
    fn restrict_identity_and_error() {
        let g = build_sg_graph(2).unwrap();
        let f = RealField::new(2, (0..g.len()).map(|i| i as f64).collect());
        assert_eq!(g.restrict(2, &f).unwrap(), f);
        assert!(g.restrict(3, &f).is_err());
    }
}
