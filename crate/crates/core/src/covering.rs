//! Fundamental domain of the covering space for a prescribed degree, and the
//! jump-constrained minimization that yields harmonic maps into the circle.
//!
//! The cut graph keeps every base vertex under its own id (this is the `-` copy of a
//! cut vertex) and appends one `+` copy per cut after the base vertices. Cells whose
//! word starts with a cut's `plus_prefix` attach to the `+` copy.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dirichlet::{harmonic_extend_once, network_energy, network_laplacian};
use crate::error::{Error, Result};
use crate::field::{circle_distance, compensated_sum, wrap, PhaseField};
use crate::graph::{build_ring_graph, build_sg_graph, sg_corner_id, FractalGraph, FractalKind, Network, Word};
use crate::linalg::{self, SolveMethod, SymAssembler};
use crate::winding::{sg_loop, DegreeVector};

/// Maximum cut-pair mismatch tolerated when projecting to the circle.
pub const PROJECTION_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CutSpec {
    pub kind: FractalKind,
    pub word: Word,
    pub cut_vertex: usize,
    pub minus_id: usize,
    pub plus_id: usize,
    pub jump: i64,
    /// Cells below this word attach to the `+` copy.
    pub plus_prefix: Word,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutExport {
    pub word: String,
    pub cut_vertex: usize,
    pub minus_id: usize,
    pub plus_id: usize,
    pub jump: i64,
}

impl CutSpec {
    pub fn label(&self) -> String {
        self.word.label(self.kind)
    }

    pub fn export(&self) -> CutExport {
        CutExport {
            word: self.label(),
            cut_vertex: self.cut_vertex,
            minus_id: self.minus_id,
            plus_id: self.plus_id,
            jump: self.jump,
        }
    }

    fn attaches_plus(&self, cell: Word, radix: u64) -> bool {
        cell.has_prefix(self.plus_prefix, radix)
    }
}

/// Minimal level at which cut vertices for `ω` exist.
pub fn required_level(omega: &DegreeVector) -> u32 {
    match omega.kind() {
        FractalKind::Sg => omega.max_order().map_or(0, |m| m + 1),
        FractalKind::Ring => 1,
    }
}

/// One cut per nonzero entry of `ω`, in `(|w|, lex)` order.
///
/// For `∂T_w` the candidates are the side midpoints `z` (side `3→1`), `x` (side `1→2`) and
/// `y` (side `2→3`) of `T_w`; the first that lies on no coarser basis loop is taken. The `+`
/// copy collects the cells of `T_{wa}`, where `a` starts the cut side in clockwise order.
pub fn select_cut_vertices(g: &FractalGraph, omega: &DegreeVector) -> Result<Vec<CutSpec>> {
    if omega.kind() != g.kind() {
        return Err(Error::Unsupported(format!(
            "degree for {} used on a {} graph",
            omega.kind(),
            g.kind()
        )));
    }
    let needed = required_level(omega);
    if g.level() < needed {
        return Err(Error::LevelTooCoarse {
            level: g.level(),
            order: omega.max_order().unwrap_or(0),
            needed,
        });
    }
    let base_len = g.len();
    let mut cuts = Vec::with_capacity(omega.entries().len());
    match g.kind() {
        FractalKind::Ring => {
            if let Some((&w, &jump)) = omega.entries().iter().next() {
                cuts.push(CutSpec {
                    kind: FractalKind::Ring,
                    word: w,
                    cut_vertex: 0,
                    minus_id: 0,
                    plus_id: base_len,
                    jump,
                    plus_prefix: Word::new(1, 1),
                });
            }
        }
        FractalKind::Sg => {
            let mut coarse: HashSet<usize> = HashSet::new();
            let mut coarse_order = 0;
            for (&w, &jump) in omega.entries() {
                let order = w.len();
                if order > coarse_order || coarse.is_empty() {
                    // Vertices of V_{order+1} on all loops of order < |w|.
                    coarse.clear();
                    for u in Word::up_to(order.saturating_sub(1), 3).filter(|u| u.len() < order) {
                        coarse.extend(sg_loop(u, order + 1).vertex_cycle);
                    }
                    coarse_order = order;
                }
                // (cut vertex, start corner of its clockwise side)
                let candidates = [
                    (sg_corner_id(w.push(2, 3), 0), 2u8),
                    (sg_corner_id(w.push(0, 3), 1), 0u8),
                    (sg_corner_id(w.push(1, 3), 2), 1u8),
                ];
                let (cut_vertex, start) = candidates
                    .into_iter()
                    .find(|(v, _)| !coarse.contains(v))
                    .ok_or_else(|| Error::NoAdmissibleCut(w.label(FractalKind::Sg)))?;
                cuts.push(CutSpec {
                    kind: FractalKind::Sg,
                    word: w,
                    cut_vertex,
                    minus_id: cut_vertex,
                    plus_id: base_len + cuts.len(),
                    jump,
                    plus_prefix: w.push(start, 3),
                });
            }
        }
    }
    Ok(cuts)
}

/// Single sheet of the covering space: the base graph cut open at the selected vertices.
#[derive(Clone, Debug)]
pub struct CoveringDomain {
    base: FractalGraph,
    omega: DegreeVector,
    cuts: Vec<CutSpec>,
    edges: Vec<[usize; 2]>,
    weights: Vec<f64>,
    /// Cell corners resolved to cut-graph ids, `corners_per_cell` per cell.
    cells: Vec<usize>,
}

/// Pinned vertex `v_1`, held at 0.
pub const PIN: usize = 0;

impl CoveringDomain {
    pub fn new(base: FractalGraph, omega: &DegreeVector) -> Result<Self> {
        let cuts = select_cut_vertices(&base, omega)?;
        let radix = base.kind().radix();
        let k = base.corners_per_cell();
        let mut cells = Vec::with_capacity(k * base.cell_count());
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        let pairs: &[(usize, usize)] = match base.kind() {
            FractalKind::Sg => &[(0, 1), (1, 2), (0, 2)],
            FractalKind::Ring => &[(0, 1)],
        };
        let c = base.conductance();
        for (w, corners) in base.cells() {
            let resolved: Vec<usize> = corners
                .iter()
                .map(|&v| {
                    cuts.iter()
                        .find(|cut| cut.cut_vertex == v && cut.attaches_plus(w, radix))
                        .map_or(v, |cut| cut.plus_id)
                })
                .collect();
            for &(a, b) in pairs {
                edges.push([resolved[a], resolved[b]]);
                weights.push(c);
            }
            cells.extend(resolved);
        }
        Ok(CoveringDomain {
            base,
            omega: omega.clone(),
            cuts,
            edges,
            weights,
            cells,
        })
    }

    pub fn build(kind: FractalKind, level: u32, omega: &DegreeVector) -> Result<Self> {
        let g = match kind {
            FractalKind::Sg => build_sg_graph(level)?,
            FractalKind::Ring => build_ring_graph(level)?,
        };
        CoveringDomain::new(g, omega)
    }

    /// Same degree on a different level of the same hierarchy.
    pub fn at_level(&self, level: u32) -> Result<Self> {
        if level == self.level() {
            return Ok(self.clone());
        }
        CoveringDomain::build(self.base.kind(), level, &self.omega)
    }

    pub fn base(&self) -> &FractalGraph {
        &self.base
    }

    pub fn level(&self) -> u32 {
        self.base.level()
    }

    pub fn omega(&self) -> &DegreeVector {
        &self.omega
    }

    pub fn cuts(&self) -> &[CutSpec] {
        &self.cuts
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    /// Resolved corners of the cell with the given code.
    pub fn cell(&self, code: usize) -> &[usize] {
        let k = self.base.corners_per_cell();
        &self.cells[k * code..k * (code + 1)]
    }

    pub fn export(&self) -> CoveringExport {
        CoveringExport {
            kind: self.base.kind(),
            level: self.level(),
            degree: self.omega.to_map(),
            pinned: PIN,
            cuts: self.cuts.iter().map(CutSpec::export).collect(),
            edges: self.edges.clone(),
        }
    }
}

impl Network for CoveringDomain {
    fn vertex_count(&self) -> usize {
        self.base_len() + self.cuts.len()
    }

    fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringExport {
    pub kind: FractalKind,
    pub level: u32,
    pub degree: std::collections::BTreeMap<String, i64>,
    pub pinned: usize,
    pub cuts: Vec<CutExport>,
    pub edges: Vec<[usize; 2]>,
}

/// Real values on the cut graph: base vertices first, then one `+` copy per cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftField {
    pub level: u32,
    pub values: Vec<f64>,
}

impl LiftField {
    pub fn base_values(&self, base_len: usize) -> &[f64] {
        &self.values[..base_len]
    }

    pub fn max_abs_diff(&self, other: &LiftField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimizes the cut-graph energy subject to `f(v_1) = 0` and `f(z_+) = f(z_-) + ρ`.
pub fn minimize_constrained(dom: &CoveringDomain, solver: SolveMethod) -> Result<LiftField> {
    let cuts: Vec<(usize, i64)> = dom.cuts.iter().map(|c| (c.cut_vertex, c.jump)).collect();
    let values = solve_jump_constrained(dom, dom.base_len(), &cuts, PIN, solver)?;
    Ok(LiftField {
        level: dom.level(),
        values,
    })
}

/// Minimizer of the energy of a cut graph whose vertices `base_len + k` are copies of
/// `cuts[k].0` shifted by `cuts[k].1`, with `f(pin) = 0`.
///
/// The constraints are eliminated by substitution: the unknowns are the base values
/// other than the pin, and each copy contributes its jump as an edge offset.
pub fn solve_jump_constrained<N: Network + ?Sized>(
    net: &N,
    base_len: usize,
    cuts: &[(usize, i64)],
    pin: usize,
    solver: SolveMethod,
) -> Result<Vec<f64>> {
    let source = |v: usize| -> (usize, f64) {
        if v < base_len {
            (v, 0.0)
        } else {
            let (b, j) = cuts[v - base_len];
            (b, j as f64)
        }
    };
    let mut slot = vec![usize::MAX; base_len];
    let mut free = Vec::with_capacity(base_len.saturating_sub(1));
    // Reverse id order keeps the direct factorization sparse.
    for v in (0..base_len).rev().filter(|&v| v != pin) {
        slot[v] = free.len();
        free.push(v);
    }
    let mut a = SymAssembler::new(free.len());
    let mut rhs = vec![0.0; free.len()];
    for (e, &w) in net.edges().iter().zip(net.weights()) {
        let (i, oi) = source(e[0]);
        let (j, oj) = source(e[1]);
        let theta = oj - oi;
        // Edge term w (f_j - f_i + θ)^2 / 2 with f_pin = 0.
        match (slot[i] != usize::MAX, slot[j] != usize::MAX) {
            (true, true) => {
                a.add_edge(slot[i], slot[j], w);
                rhs[slot[i]] += w * theta;
                rhs[slot[j]] -= w * theta;
            }
            (true, false) => {
                a.add_diag(slot[i], w);
                rhs[slot[i]] += w * theta;
            }
            (false, true) => {
                a.add_diag(slot[j], w);
                rhs[slot[j]] -= w * theta;
            }
            (false, false) => {}
        }
    }
    let mut values = vec![0.0; base_len + cuts.len()];
    if !free.is_empty() {
        let x = linalg::solve(&a, &rhs, solver)?;
        for (k, &v) in free.iter().enumerate() {
            values[v] = x[k];
        }
    }
    for (k, &(b, jump)) in cuts.iter().enumerate() {
        values[base_len + k] = values[b] + jump as f64;
    }
    Ok(values)
}

/// Minimizer at level `m` of the hierarchy that `dom` belongs to.
pub fn minimize_at_level(dom: &CoveringDomain, m: u32, solver: SolveMethod) -> Result<(CoveringDomain, LiftField)> {
    let d = dom.at_level(m)?;
    let f = minimize_constrained(&d, solver)?;
    Ok((d, f))
}

/// Harmonic extension of a lift cell by cell, with cut copies treated as distinct corners.
pub fn extend_lift(dom: &CoveringDomain, f: &LiftField, n: u32) -> Result<(CoveringDomain, LiftField)> {
    if f.values.len() != dom.vertex_count() || f.level != dom.level() {
        return Err(Error::FieldMismatch {
            expected: dom.vertex_count(),
            got: f.values.len(),
            level: dom.level(),
            got_level: f.level,
        });
    }
    if n < dom.level() {
        return Err(Error::LevelOutOfRange {
            level: n,
            min: dom.level(),
            max: n.max(dom.level()),
        });
    }
    let target = dom.at_level(n)?;
    let m = dom.level();
    let old_base = dom.base_len();
    let mut base: Vec<f64> = f.values[..old_base].to_vec();
    let plus: Vec<f64> = f.values[old_base..].to_vec();
    let cuts = dom.cuts();
    let corner = |base: &[f64], v: usize, cell: Word, radix: u64| -> f64 {
        cuts.iter()
            .position(|c| c.cut_vertex == v && c.attaches_plus(cell, radix))
            .map_or(base[v], |k| plus[k])
    };
    match dom.base.kind() {
        FractalKind::Sg => {
            base.reserve(target.base_len() - old_base);
            for k in m..n {
                for w in Word::all(k, 3) {
                    let [a, b, c] = [0u8, 1, 2].map(|i| corner(&base, sg_corner_id(w, i), w, 3));
                    let (x, y, z) = harmonic_extend_once(a, b, c);
                    base.extend([x, z, y]);
                }
            }
        }
        FractalKind::Ring => {
            for k in m..n {
                let size = base.len();
                let mut next = Vec::with_capacity(2 * size);
                for i in 0..size {
                    let w = Word::new(k, i as u64);
                    let right = corner(&base, (i + 1) % size, w, 2);
                    next.push(base[i]);
                    next.push(0.5 * (base[i] + right));
                }
                base = next;
            }
        }
    }
    debug_assert_eq!(base.len(), target.base_len());
    base.extend(plus);
    Ok((target, LiftField { level: n, values: base }))
}

pub fn lift_energy(dom: &CoveringDomain, f: &LiftField) -> f64 {
    network_energy(dom, &f.values)
}

/// Reduces a lift mod 1 onto the uncut graph; each cut pair must collapse to one circle value.
pub fn project_to_circle(dom: &CoveringDomain, f: &LiftField) -> Result<PhaseField> {
    for cut in dom.cuts() {
        let mismatch = circle_distance(wrap(f.values[cut.plus_id]), wrap(f.values[cut.minus_id]));
        if mismatch > PROJECTION_TOL {
            return Err(Error::ConstraintViolation {
                word: cut.label(),
                mismatch,
            });
        }
    }
    Ok(PhaseField::from_lift(f.level, f.base_values(dom.base_len())))
}

/// Normal derivatives at the boundary vertices of the cut graph.
///
/// At free boundary vertices this is the Laplacian sum; at the pin it follows from the
/// divergence identity: the Laplacians over the whole cut graph sum to zero.
pub fn neumann_check(dom: &CoveringDomain, f: &LiftField) -> Vec<f64> {
    let lap = network_laplacian(dom, &f.values);
    let boundary = dom.base.boundary_ids();
    let mut out: Vec<f64> = boundary.iter().map(|&v| lap[v]).collect();
    let mut plus_of = vec![None; dom.base_len()];
    for cut in dom.cuts() {
        plus_of[cut.cut_vertex] = Some(cut.plus_id);
    }
    // Combined Laplacian of both copies at every cut pair other than the pin.
    let rest = (0..dom.base_len())
        .filter(|&v| v != PIN)
        .map(|v| lap[v] + plus_of[v].map_or(0.0, |p| lap[p]));
    out[0] = -compensated_sum(rest);
    out
}

/// Degree vector, cut domain, level-`n` lift and projected phases of the harmonic map.
#[derive(Clone, Debug)]
pub struct HarmonicMap {
    pub domain: CoveringDomain,
    pub lift: LiftField,
    pub phases: PhaseField,
}

/// Minimizes at the coarsest admissible level and extends to level `n`.
pub fn harmonic_map(kind: FractalKind, omega: &DegreeVector, n: u32) -> Result<HarmonicMap> {
    let m = required_level(omega).max(1);
    if n < m {
        return Err(Error::LevelTooCoarse {
            level: n,
            order: omega.max_order().unwrap_or(0),
            needed: m,
        });
    }
    let coarse = CoveringDomain::build(kind, m, omega)?;
    let f = minimize_constrained(&coarse, SolveMethod::Direct)?;
    let (domain, lift) = extend_lift(&coarse, &f, n)?;
    let phases = project_to_circle(&domain, &lift)?;
    Ok(HarmonicMap { domain, lift, phases })
}
