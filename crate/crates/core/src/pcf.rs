//! Harmonic structures on post-critically finite self-similar sets.
//!
//! A structure is given by contractions `F_i`, renormalization weights `r_i`, the
//! boundary `V_0` with its conductances, boundary identifications and a rule producing
//! the cycle basis with its cut vertices. Level-`n` graphs, energies, harmonic extension
//! and the covering construction are derived from these data alone; the gasket and the
//! circle are the two instances provided.

use std::collections::HashMap;

use serde::Serialize;

use crate::covering::solve_jump_constrained;
use crate::dirichlet::network_energy;
use crate::error::{Error, Result};
use crate::field::PhaseField;
use crate::graph::{
    build_ring_graph, build_sg_graph, FractalGraph, FractalKind, Network, Word, RING_MAX_LEVEL, SG_CORNERS,
    SG_MAX_LEVEL,
};
use crate::kuramoto::{self, default_step, EquilibriumReport, FlowConfig};
use crate::linalg::{self, SolveMethod, SymAssembler};
use crate::winding::DegreeVector;

pub type ExtensionRule = (Vec<[f64; 2]>, Vec<Vec<f64>>);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Similitude {
    pub ratio: f64,
    pub fixed_point: [f64; 2],
}

impl Similitude {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let c = self.fixed_point;
        [c[0] + self.ratio * (p[0] - c[0]), c[1] + self.ratio * (p[1] - c[1])]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleBasisRule {
    /// Loops `∂T_w` around every cell; cut at the first admissible junction of two children.
    CellBoundaries,
    /// One cycle closed by a boundary identification; cut at the identified point.
    IdentifiedBoundary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicStructure {
    pub kind: FractalKind,
    pub maps: Vec<Similitude>,
    pub weights: Vec<f64>,
    pub boundary: Vec<[f64; 2]>,
    /// Level-0 conductances `(i, j, c_ij)` between boundary points.
    pub base_conductances: Vec<(usize, usize, f64)>,
    /// Boundary pairs `(a, b)` glued together; `b` is replaced by `a`.
    pub identified: Vec<(usize, usize)>,
    pub cycle_basis: CycleBasisRule,
}

pub fn sg_structure() -> HarmonicStructure {
    HarmonicStructure {
        kind: FractalKind::Sg,
        maps: SG_CORNERS
            .iter()
            .map(|&p| Similitude {
                ratio: 0.5,
                fixed_point: p,
            })
            .collect(),
        weights: vec![0.6; 3],
        boundary: SG_CORNERS.to_vec(),
        base_conductances: vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
        identified: Vec::new(),
        cycle_basis: CycleBasisRule::CellBoundaries,
    }
}

pub fn ring_structure() -> HarmonicStructure {
    HarmonicStructure {
        kind: FractalKind::Ring,
        maps: [[0.0, 0.0], [1.0, 0.0]]
            .iter()
            .map(|&p| Similitude {
                ratio: 0.5,
                fixed_point: p,
            })
            .collect(),
        weights: vec![0.5; 2],
        boundary: vec![[0.0, 0.0], [1.0, 0.0]],
        base_conductances: vec![(0, 1, 1.0)],
        identified: vec![(0, 1)],
        cycle_basis: CycleBasisRule::IdentifiedBoundary,
    }
}

type Key = (i64, i64);

fn key(p: [f64; 2]) -> Key {
    ((p[0] * 1e10).round() as i64, (p[1] * 1e10).round() as i64)
}

impl HarmonicStructure {
    pub fn structure_for(kind: FractalKind) -> Self {
        match kind {
            FractalKind::Sg => sg_structure(),
            FractalKind::Ring => ring_structure(),
        }
    }

    fn radix(&self) -> u64 {
        self.maps.len() as u64
    }

    fn max_level(&self) -> u32 {
        match self.kind {
            FractalKind::Sg => SG_MAX_LEVEL,
            FractalKind::Ring => RING_MAX_LEVEL,
        }
    }

    /// `F_w(p) = F_{w_1} ∘ … ∘ F_{w_k}(p)`.
    pub fn apply_word(&self, w: Word, p: [f64; 2]) -> [f64; 2] {
        w.digits(self.radix())
            .into_iter()
            .rev()
            .fold(p, |q, d| self.maps[d as usize].apply(q))
    }

    /// `r_w^{-1} = Π r_{w_i}^{-1}`.
    pub fn cell_scale(&self, w: Word) -> f64 {
        w.digits(self.radix())
            .into_iter()
            .map(|d| 1.0 / self.weights[d as usize])
            .product()
    }

    /// Points of the unidentified level-1 graph not in `V_0`, and the harmonic extension
    /// matrix mapping boundary values to them.
    pub fn extension_rule(&self) -> Result<ExtensionRule> {
        let g1 = GenericGraph::build(self, 1, false)?;
        let nb = self.boundary.len();
        let interior = g1.len() - nb;
        let mut a = SymAssembler::new(interior);
        let mut coupling = vec![vec![0.0; nb]; interior];
        for (e, &w) in g1.edges().iter().zip(g1.weights()) {
            let (i, j) = (e[0], e[1]);
            match (i >= nb, j >= nb) {
                (true, true) => a.add_edge(i - nb, j - nb, w),
                (true, false) => {
                    a.add_diag(i - nb, w);
                    coupling[i - nb][j] += w;
                }
                (false, true) => {
                    a.add_diag(j - nb, w);
                    coupling[j - nb][i] += w;
                }
                (false, false) => {}
            }
        }
        let mut matrix = vec![vec![0.0; nb]; interior];
        for b in 0..nb {
            let rhs: Vec<f64> = coupling.iter().map(|row| row[b]).collect();
            let x = linalg::solve(&a, &rhs, SolveMethod::Direct)?;
            for q in 0..interior {
                matrix[q][b] = x[q];
            }
        }
        Ok((g1.coords[nb..].to_vec(), matrix))
    }
}

/// Level-`n` graph of a harmonic structure; vertices deduplicated by position and
/// numbered by first appearance, so `V_m` is a prefix of `V_n`.
#[derive(Clone, Debug)]
pub struct GenericGraph {
    structure: HarmonicStructure,
    level: u32,
    identify: bool,
    coords: Vec<[f64; 2]>,
    index: HashMap<Key, usize>,
    level_counts: Vec<usize>,
    edges: Vec<[usize; 2]>,
    weights: Vec<f64>,
    cells: Vec<usize>,
}

impl GenericGraph {
    pub fn build(s: &HarmonicStructure, level: u32, identify: bool) -> Result<Self> {
        if level > s.max_level() {
            return Err(Error::LevelOutOfRange {
                level,
                min: 0,
                max: s.max_level(),
            });
        }
        let mut g = GenericGraph {
            structure: s.clone(),
            level,
            identify,
            coords: Vec::new(),
            index: HashMap::new(),
            level_counts: Vec::with_capacity(level as usize + 1),
            edges: Vec::new(),
            weights: Vec::new(),
            cells: Vec::new(),
        };
        let radix = s.radix();
        for k in 0..=level {
            for w in Word::all(k, radix) {
                for &b in &s.boundary {
                    let p = g.canonical(s.apply_word(w, b));
                    if let std::collections::hash_map::Entry::Vacant(e) = g.index.entry(key(p)) {
                        e.insert(g.coords.len());
                        g.coords.push(p);
                    }
                }
            }
            g.level_counts.push(g.coords.len());
        }
        let mut edge_slot: HashMap<(usize, usize), usize> = HashMap::new();
        for w in Word::all(level, radix) {
            let ids: Vec<usize> = s
                .boundary
                .iter()
                .map(|&b| g.index[&key(g.canonical(s.apply_word(w, b)))])
                .collect();
            let scale = s.cell_scale(w);
            for &(a, b, c) in &s.base_conductances {
                let (i, j) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                let slot = *edge_slot.entry((i, j)).or_insert_with(|| {
                    g.edges.push([i, j]);
                    g.weights.push(0.0);
                    g.edges.len() - 1
                });
                g.weights[slot] += c * scale;
            }
            g.cells.extend(ids);
        }
        Ok(g)
    }

    fn canonical(&self, p: [f64; 2]) -> [f64; 2] {
        if self.identify {
            for &(a, b) in &self.structure.identified {
                if key(p) == key(self.structure.boundary[b]) {
                    return self.structure.boundary[a];
                }
            }
        }
        p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn count_at(&self, m: u32) -> usize {
        self.level_counts[m as usize]
    }

    pub fn id_of(&self, p: [f64; 2]) -> Option<usize> {
        self.index.get(&key(self.canonical(p))).copied()
    }

    pub fn cell(&self, code: usize) -> &[usize] {
        let k = self.structure.boundary.len();
        &self.cells[k * code..k * (code + 1)]
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / self.structure.boundary.len()
    }

    /// `perm[i]` is the generic id of vertex `i` of the specialized graph.
    pub fn permutation_from(&self, g: &FractalGraph) -> Result<Vec<usize>> {
        g.vertices()
            .iter()
            .map(|v| {
                self.id_of(v.coords)
                    .ok_or_else(|| Error::Unsupported(format!("vertex {} has no generic counterpart", v.id)))
            })
            .collect()
    }

    /// Harmonic extension from `V_m` to `V_n`; `corner` resolves a cell's corner value
    /// (it receives the current values, the cell word, and the corner id).
    pub fn extend_with<F>(&self, values: &[f64], m: u32, corner: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64], Word, usize) -> f64,
    {
        if values.len() != self.count_at(m) {
            return Err(Error::FieldMismatch {
                expected: self.count_at(m),
                got: values.len(),
                level: m,
                got_level: m,
            });
        }
        let s = &self.structure;
        let (points, matrix) = s.extension_rule()?;
        let mut out = values.to_vec();
        for k in m..self.level {
            out.resize(self.count_at(k + 1), 0.0);
            for w in Word::all(k, s.radix()) {
                let cv: Vec<f64> = s
                    .boundary
                    .iter()
                    .map(|&b| corner(&out, w, self.id_of(s.apply_word(w, b)).unwrap()))
                    .collect();
                for (q, &p) in points.iter().enumerate() {
                    let id = self.id_of(s.apply_word(w, p)).unwrap();
                    out[id] = matrix[q].iter().zip(&cv).map(|(a, c)| a * c).sum();
                }
            }
        }
        Ok(out)
    }

    pub fn extend(&self, values: &[f64], m: u32) -> Result<Vec<f64>> {
        self.extend_with(values, m, |v, _, id| v[id])
    }
}

impl Network for GenericGraph {
    fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `(E_n(u), Σ_i r_i^{-1} E_{n-1}(u ∘ F_i))` for a field given as a function of position.
pub fn self_similarity(s: &HarmonicStructure, n: u32, u: &dyn Fn([f64; 2]) -> f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::LevelOutOfRange {
            level: 0,
            min: 1,
            max: s.max_level(),
        });
    }
    let fine = GenericGraph::build(s, n, false)?;
    let coarse = GenericGraph::build(s, n - 1, false)?;
    let lhs = network_energy(&fine, &fine.coords.iter().map(|&p| u(p)).collect::<Vec<_>>());
    let rhs = s
        .maps
        .iter()
        .zip(&s.weights)
        .map(|(f, r)| {
            let vals: Vec<f64> = coarse.coords.iter().map(|&p| u(f.apply(p))).collect();
            network_energy(&coarse, &vals) / r
        })
        .sum();
    Ok((lhs, rhs))
}

/// `(E_{n-1}(u), min { E_n(ū) : ū|_{V_{n-1}} = u })` with the minimum found by a linear solve.
pub fn compatibility(s: &HarmonicStructure, n: u32, u: &[f64]) -> Result<(f64, f64)> {
    let fine = GenericGraph::build(s, n, true)?;
    let coarse = GenericGraph::build(s, n - 1, true)?;
    if u.len() != coarse.len() {
        return Err(Error::FieldMismatch {
            expected: coarse.len(),
            got: u.len(),
            level: n - 1,
            got_level: n - 1,
        });
    }
    let fixed = coarse.len();
    let free = fine.len() - fixed;
    let mut a = SymAssembler::new(free);
    let mut rhs = vec![0.0; free];
    for (e, &w) in fine.edges().iter().zip(fine.weights()) {
        let (i, j) = (e[0], e[1]);
        match (i >= fixed, j >= fixed) {
            (true, true) => a.add_edge(i - fixed, j - fixed, w),
            (true, false) => {
                a.add_diag(i - fixed, w);
                rhs[i - fixed] += w * u[j];
            }
            (false, true) => {
                a.add_diag(j - fixed, w);
                rhs[j - fixed] += w * u[i];
            }
            (false, false) => {}
        }
    }
    let mut full = u.to_vec();
    full.extend(linalg::solve(&a, &rhs, SolveMethod::Direct)?);
    Ok((network_energy(&coarse, u), network_energy(&fine, &full)))
}

/// Cut vertex `id` whose copy attaches to cells below `plus_prefix`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenericCut {
    pub vertex: usize,
    pub plus_prefix: Word,
    pub jump: i64,
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy);
    let q = [a[0] + t * dx, a[1] + t * dy];
    (-1e-12..=1.0 + 1e-12).contains(&t) && (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-12
}

/// Cut vertices for `ω` under the structure's cycle-basis rule.
pub fn generic_cuts(g: &GenericGraph, omega: &DegreeVector) -> Result<Vec<GenericCut>> {
    let s = &g.structure;
    let radix = s.radix();
    let mut cuts = Vec::new();
    match s.cycle_basis {
        CycleBasisRule::IdentifiedBoundary => {
            let (a, b) = s.identified[0];
            let vertex = g.id_of(s.boundary[a]).unwrap();
            let side = s
                .maps
                .iter()
                .position(|f| key(f.fixed_point) == key(s.boundary[b]))
                .ok_or_else(|| Error::NoAdmissibleCut("identified boundary".into()))?;
            for &jump in omega.entries().values() {
                cuts.push(GenericCut {
                    vertex,
                    plus_prefix: Word::new(1, side as u64),
                    jump,
                });
            }
        }
        CycleBasisRule::CellBoundaries => {
            let nb = s.boundary.len();
            for (&w, &jump) in omega.entries() {
                if g.level < w.len() + 1 {
                    return Err(Error::LevelTooCoarse {
                        level: g.level,
                        order: w.len(),
                        needed: w.len() + 1,
                    });
                }
                let coarse: Vec<Vec<[f64; 2]>> = Word::up_to(w.len().saturating_sub(1), radix)
                    .filter(|u| u.len() < w.len())
                    .map(|u| s.boundary.iter().map(|&b| s.apply_word(u, b)).collect())
                    .collect();
                let on_coarse = |p: [f64; 2]| {
                    coarse
                        .iter()
                        .any(|poly| (0..nb).any(|i| on_segment(p, poly[i], poly[(i + 1) % nb])))
                };
                // Sides in clockwise order starting with the closing side.
                let sides = (0..nb).map(|i| ((i + nb - 1) % nb, i));
                let (vertex, start) = sides
                    .map(|(a, b)| (s.apply_word(w.push(a as u8, radix), s.boundary[b]), a))
                    .find(|(p, _)| !on_coarse(*p))
                    .map(|(p, a)| (g.id_of(p).unwrap(), a))
                    .ok_or_else(|| Error::NoAdmissibleCut(w.label(s.kind)))?;
                cuts.push(GenericCut {
                    vertex,
                    plus_prefix: w.push(start as u8, radix),
                    jump,
                });
            }
        }
    }
    Ok(cuts)
}

/// Cut graph of a generic structure at the level of `g`.
#[derive(Clone, Debug)]
pub struct GenericDomain {
    pub graph: GenericGraph,
    pub cuts: Vec<GenericCut>,
    edges: Vec<[usize; 2]>,
    weights: Vec<f64>,
}

impl GenericDomain {
    pub fn new(graph: GenericGraph, omega: &DegreeVector) -> Result<Self> {
        let cuts = generic_cuts(&graph, omega)?;
        let s = &graph.structure;
        let radix = s.radix();
        let base_len = graph.len();
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        for (code, w) in Word::all(graph.level, radix).enumerate() {
            let resolved: Vec<usize> = graph
                .cell(code)
                .iter()
                .map(|&v| {
                    cuts.iter()
                        .position(|c| c.vertex == v && w.has_prefix(c.plus_prefix, radix))
                        .map_or(v, |k| base_len + k)
                })
                .collect();
            let scale = s.cell_scale(w);
            for &(a, b, c) in &s.base_conductances {
                edges.push([resolved[a], resolved[b]]);
                weights.push(c * scale);
            }
        }
        Ok(GenericDomain {
            graph,
            cuts,
            edges,
            weights,
        })
    }
}

impl Network for GenericDomain {
    fn vertex_count(&self) -> usize {
        self.graph.len() + self.cuts.len()
    }

    fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Level-`n` lift on the generic cut graph and its generic graph.
#[derive(Clone, Debug)]
pub struct GenericHarmonicMap {
    pub graph: GenericGraph,
    /// Values at the base vertices of the level-`n` graph.
    pub lift: Vec<f64>,
    pub cuts: Vec<GenericCut>,
}

/// Covering pipeline through the generic interface: minimize at the coarsest admissible
/// level, then extend cell by cell.
pub fn generic_harmonic_map(s: &HarmonicStructure, omega: &DegreeVector, n: u32) -> Result<GenericHarmonicMap> {
    if omega.kind() != s.kind {
        return Err(Error::Unsupported("degree does not match the structure".into()));
    }
    let m = omega.max_order().map_or(1, |o| o + 1).max(1);
    if n < m {
        return Err(Error::LevelTooCoarse {
            level: n,
            order: omega.max_order().unwrap_or(0),
            needed: m,
        });
    }
    let coarse = GenericDomain::new(GenericGraph::build(s, m, true)?, omega)?;
    let cut_src: Vec<(usize, i64)> = coarse.cuts.iter().map(|c| (c.vertex, c.jump)).collect();
    let sol = solve_jump_constrained(&coarse, coarse.graph.len(), &cut_src, 0, SolveMethod::Direct)?;
    let base = &sol[..coarse.graph.len()];
    let fine = GenericGraph::build(s, n, true)?;
    let radix = s.radix();
    let cuts = coarse.cuts.clone();
    let lift = fine.extend_with(base, m, |v, w, id| {
        cuts.iter()
            .find(|c| c.vertex == id && w.has_prefix(c.plus_prefix, radix))
            .map_or(v[id], |c| v[id] + c.jump as f64)
    })?;
    Ok(GenericHarmonicMap {
        graph: fine,
        lift,
        cuts: coarse.cuts,
    })
}

/// Kuramoto flow on the generic conductances from the projected generic harmonic map; the result
/// is reported in the specialized vertex order of the instance.
pub fn generic_km(s: &HarmonicStructure, omega: &DegreeVector, n: u32, cfg: &FlowConfig) -> Result<EquilibriumReport> {
    let hm = generic_harmonic_map(s, omega, n)?;
    let step = cfg.step.unwrap_or_else(|| default_step(s.kind, n));
    let phases = PhaseField::from_lift(n, &hm.lift);
    let out = kuramoto::integrate(&hm.graph, phases.values(), step, cfg);
    let g = match s.kind {
        FractalKind::Sg => build_sg_graph(n)?,
        FractalKind::Ring => build_ring_graph(n)?,
    };
    let perm = hm.graph.permutation_from(&g)?;
    let mut mapped = out.clone();
    mapped.values = perm.iter().map(|&k| out.values[k]).collect();
    Ok(kuramoto::equilibrium_report(
        &g,
        mapped,
        cfg.pin.unwrap_or(0),
        omega.max_order().unwrap_or(0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::harmonic_extend_once;

    #[test]
    fn sg_counts_match() {
        let s = sg_structure();
        for n in 0..=4 {
            let g = GenericGraph::build(&s, n, true).unwrap();
            let direct = build_sg_graph(n).unwrap();
            assert_eq!(g.len(), direct.len());
            assert_eq!(g.edges().len(), direct.edges().len());
            assert!(g.weights().iter().all(|&w| (w - direct.conductance()).abs() < 1e-12));
        }
    }

    #[test]
    fn ring_counts_and_multiplicity() {
        let s = ring_structure();
        let g1 = GenericGraph::build(&s, 1, true).unwrap();
        assert_eq!(g1.len(), 2);
        assert_eq!(g1.edges(), &[[0, 1]]);
        assert_eq!(g1.weights(), &[4.0]);
        let g4 = GenericGraph::build(&s, 4, true).unwrap();
        assert_eq!(g4.len(), 16);
        assert!(g4.weights().iter().all(|&w| w == 16.0));
    }

    #[test]
    fn extension_rules() {
        let (pts, m) = sg_structure().extension_rule().unwrap();
        assert_eq!(pts.len(), 3);
        let (x, y, z) = harmonic_extend_once(1.0, 0.0, 0.0);
        // Enumeration order is x, z, y.
        assert!((m[0][0] - x).abs() < 1e-14 && (m[1][0] - z).abs() < 1e-14 && (m[2][0] - y).abs() < 1e-14);
        let (rp, rm) = ring_structure().extension_rule().unwrap();
        assert_eq!(rp, vec![[0.5, 0.0]]);
        assert!((rm[0][0] - 0.5).abs() < 1e-15 && (rm[0][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn self_similarity_exact() {
        let f = |p: [f64; 2]| 1.0 + 2.0 * p[0] - p[1] + 3.0 * p[0] * p[1] - p[1] * p[1];
        for s in [sg_structure(), ring_structure()] {
            let (l, r) = self_similarity(&s, 3, &f).unwrap();
            assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0), "{l} {r}");
        }
    }

    #[test]
    fn compatibility_min() {
        let s = sg_structure();
        let coarse = GenericGraph::build(&s, 3, true).unwrap();
        let u: Vec<f64> = coarse.coords().iter().map(|p| p[0] * p[0] - p[1]).collect();
        let (e, m) = compatibility(&s, 4, &u).unwrap();
        assert!((e - m).abs() <= 1e-12 * e);
    }

    #[test]
    fn cuts_match_specialized() {
        use crate::covering::CoveringDomain;
        let s = sg_structure();
        for d in ["1", "1,1,1,1", "0,2,0,-1,0,0,0,0,1,0,0,0,0"] {
            let omega = DegreeVector::parse(FractalKind::Sg, d).unwrap();
            let n = omega.max_order().unwrap() + 1;
            let g = GenericGraph::build(&s, n, true).unwrap();
            let direct = CoveringDomain::build(FractalKind::Sg, n, &omega).unwrap();
            let perm = g.permutation_from(direct.base()).unwrap();
            let gc = generic_cuts(&g, &omega).unwrap();
            for (c, sc) in gc.iter().zip(direct.cuts()) {
                assert_eq!(c.vertex, perm[sc.cut_vertex]);
                assert_eq!(c.plus_prefix, sc.plus_prefix);
            }
        }
    }

    #[test]
    fn ring_twist_through_generic() {
        let omega = DegreeVector::parse(FractalKind::Ring, "2").unwrap();
        let hm = generic_harmonic_map(&ring_structure(), &omega, 5).unwrap();
        for (i, p) in hm.graph.coords().iter().enumerate() {
            assert!((hm.lift[i] - 2.0 * p[0]).abs() < 1e-12);
        }
    }
}
