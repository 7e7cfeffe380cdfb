//! Triangular loop basis `{∂T_w}`, discrete lifts and degree vectors.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{nearest_rep, PhaseField};
use crate::graph::{sg_corner_id, FractalGraph, FractalKind, Word};

/// Absolute tolerance on the closure of a lift before rounding to an integer.
pub const INTEGRALITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub kind: FractalKind,
    pub word: Word,
    /// Closed vertex cycle (first id repeated at the end), clockwise from the leftmost vertex.
    pub vertex_cycle: Vec<usize>,
}

impl Loop {
    pub fn label(&self) -> String {
        self.word.label(self.kind)
    }

    pub fn reversed(&self) -> Loop {
        let mut cycle = self.vertex_cycle.clone();
        cycle.reverse();
        Loop {
            kind: self.kind,
            word: self.word,
            vertex_cycle: cycle,
        }
    }

    /// Vertices on the loop without the closing repeat.
    pub fn vertices(&self) -> &[usize] {
        &self.vertex_cycle[..self.vertex_cycle.len() - 1]
    }
}

/// Side of `∂T_w` from corner `a` to corner `b`, through every vertex of level `n`.
fn sg_side(w: Word, a: u8, b: u8, n: u32, out: &mut Vec<usize>) {
    if w.len() == n {
        if out.last() != Some(&sg_corner_id(w, a)) {
            out.push(sg_corner_id(w, a));
        }
        out.push(sg_corner_id(w, b));
        return;
    }
    sg_side(w.push(a, 3), a, b, n, out);
    sg_side(w.push(b, 3), a, b, n, out);
}

/// `∂T_w` traced `v_1 → v_2 → v_3 → v_1` in level-`n` vertices.
pub fn sg_loop(w: Word, n: u32) -> Loop {
    let mut cycle = Vec::with_capacity(3 * (1usize << (n - w.len())) + 1);
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        sg_side(w, a, b, n, &mut cycle);
    }
    Loop {
        kind: FractalKind::Sg,
        word: w,
        vertex_cycle: cycle,
    }
}

/// One loop per word of length `<= max_order`, ordered by `(|w|, lex)`.
pub fn loop_basis(g: &FractalGraph, max_order: u32) -> Result<Vec<Loop>> {
    match g.kind() {
        FractalKind::Sg => {
            if max_order > g.level() {
                return Err(Error::LevelOutOfRange {
                    level: max_order,
                    min: 0,
                    max: g.level(),
                });
            }
            Ok(Word::up_to(max_order, 3).map(|w| sg_loop(w, g.level())).collect())
        }
        FractalKind::Ring => {
            if max_order > 0 {
                return Err(Error::Unsupported("the ring has a single basis loop".into()));
            }
            let mut cycle: Vec<usize> = (0..g.len()).collect();
            cycle.push(0);
            Ok(vec![Loop {
                kind: FractalKind::Ring,
                word: Word::EMPTY,
                vertex_cycle: cycle,
            }])
        }
    }
}

pub fn lift_along_loop(f: &PhaseField, gamma: &Loop) -> Result<Vec<f64>> {
    let vals = f.values();
    let cyc = &gamma.vertex_cycle;
    let mut out = Vec::with_capacity(cyc.len());
    out.push(vals[cyc[0]]);
    for k in 1..cyc.len() {
        let (from, to) = (cyc[k - 1], cyc[k]);
        let d = nearest_rep(vals[to] - vals[from]);
        if d.abs() >= 0.5 {
            return Err(Error::UnresolvedWinding {
                word: gamma.label(),
                from,
                to,
                distance: d.abs(),
            });
        }
        out.push(out[k - 1] + d);
    }
    Ok(out)
}

pub fn loop_winding(f: &PhaseField, gamma: &Loop) -> Result<i64> {
    let lift = lift_along_loop(f, gamma)?;
    let w = lift[lift.len() - 1] - lift[0];
    let r = w.round();
    if (w - r).abs() > INTEGRALITY_TOL {
        return Err(Error::NonIntegerWinding {
            word: gamma.label(),
            value: w,
        });
    }
    Ok(r as i64)
}

/// Finitely supported integer vector indexed by basis loops; zero entries are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeVector {
    kind: FractalKind,
    entries: BTreeMap<Word, i64>,
}

impl DegreeVector {
    pub fn zero(kind: FractalKind) -> Self {
        DegreeVector {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I: IntoIterator<Item = (Word, i64)>>(kind: FractalKind, entries: I) -> Self {
        DegreeVector {
            kind,
            entries: entries.into_iter().filter(|(_, v)| *v != 0).collect(),
        }
    }

    /// Values listed in basis order `(ε, 1, 2, 3, 11, 12, ...)`.
    pub fn from_dense(kind: FractalKind, values: &[i64]) -> Result<Self> {
        let radix = kind.radix();
        let max_len = match kind {
            FractalKind::Sg => 12,
            FractalKind::Ring => 0,
        };
        let words: Vec<Word> = Word::up_to(max_len, radix).take(values.len()).collect();
        if words.len() < values.len() {
            return Err(Error::ParseDegree(format!(
                "{} entries exceed the basis supported for {kind}",
                values.len()
            )));
        }
        Ok(DegreeVector::from_entries(
            kind,
            words.into_iter().zip(values.iter().copied()),
        ))
    }

    /// Parses the dense form `1,0,0` or the sparse form `eps:1,1:2`.
    pub fn parse(kind: FractalKind, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(DegreeVector::zero(kind));
        }
        let bad = || Error::ParseDegree(s.to_string());
        if s.contains(':') {
            let mut entries = BTreeMap::new();
            for part in s.split(',') {
                let (w, v) = part.split_once(':').ok_or_else(bad)?;
                let word = Word::parse(w, kind).map_err(|_| bad())?;
                if kind == FractalKind::Ring && !word.is_empty() {
                    return Err(bad());
                }
                let v: i64 = v.trim().parse().map_err(|_| bad())?;
                if entries.insert(word, v).is_some() {
                    return Err(bad());
                }
            }
            Ok(DegreeVector::from_entries(kind, entries))
        } else {
            let values = s
                .split(',')
                .map(|p| p.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            DegreeVector::from_dense(kind, &values).map_err(|_| bad())
        }
    }

    pub fn kind(&self) -> FractalKind {
        self.kind
    }

    pub fn entries(&self) -> &BTreeMap<Word, i64> {
        &self.entries
    }

    pub fn get(&self, w: Word) -> i64 {
        self.entries.get(&w).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `|w|` with a nonzero entry.
    pub fn max_order(&self) -> Option<u32> {
        self.entries.keys().map(|w| w.len()).max()
    }

    pub fn scaled(&self, c: i64) -> Self {
        DegreeVector::from_entries(self.kind, self.entries.iter().map(|(w, v)| (*w, v * c)))
    }

    /// Dense array over all words of length `<= order`.
    pub fn to_dense(&self, order: u32) -> Vec<i64> {
        Word::up_to(order, self.kind.radix()).map(|w| self.get(w)).collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, i64> {
        self.entries.iter().map(|(w, v)| (w.label(self.kind), *v)).collect()
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dense = self.to_dense(self.max_order().unwrap_or(0));
        let parts: Vec<String> = dense.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for DegreeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

/// Winding numbers on every basis loop of order `<= max_order`.
pub fn degree(f: &PhaseField, g: &FractalGraph, max_order: u32) -> Result<DegreeVector> {
    g.check_len(f.len(), f.level())?;
    let mut entries = Vec::new();
    for gamma in loop_basis(g, max_order)? {
        entries.push((gamma.word, loop_winding(f, &gamma)?));
    }
    Ok(DegreeVector::from_entries(g.kind(), entries))
}

/// Smallest slack `1/2 - max |increment|` over all basis loops of order `<= max_order`.
pub fn min_edge_slack(f: &PhaseField, g: &FractalGraph, max_order: u32) -> Result<f64> {
    let vals = f.values();
    let mut worst = 0.0f64;
    for gamma in loop_basis(g, max_order)? {
        for pair in gamma.vertex_cycle.windows(2) {
            worst = worst.max(nearest_rep(vals[pair[1]] - vals[pair[0]]).abs());
        }
    }
    Ok(0.5 - worst)
}
