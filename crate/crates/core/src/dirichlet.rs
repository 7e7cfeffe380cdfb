//! Discrete Dirichlet energies, Laplacians and harmonic functions on `Γ_n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{compensated_sum, RealField};
use crate::graph::{sg_corner_id, sg_vertex_count, FractalGraph, FractalKind, Network, Word};
use crate::linalg::{self, SolveMethod, SymAssembler};

/// Levels up to which the linear-solve path factorizes directly.
pub const DIRECT_SOLVE_MAX_LEVEL: u32 = 8;

/// `log(5/3) / (2 log 2)`.
pub fn sg_holder_exponent() -> f64 {
    (5.0f64 / 3.0).ln() / (2.0 * 2.0f64.ln())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub kind: FractalKind,
    pub level: u32,
    pub energy: f64,
    /// Contribution of each `n`-cell, indexed by word code.
    pub per_cell: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyExport {
    pub level: u32,
    pub energy: f64,
    pub per_cell: BTreeMap<String, f64>,
}

impl EnergyReport {
    pub fn export(&self) -> EnergyExport {
        EnergyExport {
            level: self.level,
            energy: self.energy,
            per_cell: self
                .per_cell
                .iter()
                .enumerate()
                .map(|(c, &e)| (Word::new(self.level, c as u64).label(self.kind), e))
                .collect(),
        }
    }
}

/// Boundary values keyed by the ids of `V_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub values: BTreeMap<usize, f64>,
}

impl BoundaryData {
    /// Values listed in boundary-id order.
    pub fn for_graph(g: &FractalGraph, values: &[f64]) -> Result<Self> {
        let ids = g.boundary_ids();
        if values.len() != ids.len() {
            return Err(Error::Boundary(format!(
                "expected {} boundary values, got {}",
                ids.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Boundary(format!("non-finite value {v}")));
        }
        Ok(BoundaryData {
            values: ids.into_iter().zip(values.iter().copied()).collect(),
        })
    }

    pub fn parse(g: &FractalGraph, text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Boundary(format!("cannot parse '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        BoundaryData::for_graph(g, &values)
    }

    fn check(&self, g: &FractalGraph) -> Result<()> {
        let ids = g.boundary_ids();
        if self.values.len() != ids.len() || !ids.iter().all(|i| self.values.contains_key(i)) {
            return Err(Error::Boundary(format!(
                "keys {:?} do not match boundary {:?}",
                self.values.keys().collect::<Vec<_>>(),
                ids
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirichletMethod {
    Extension,
    LinearSolve,
}

/// Corner pairs of a cell that carry an edge.
fn cell_pairs(kind: FractalKind) -> &'static [(usize, usize)] {
    match kind {
        FractalKind::Sg => &[(0, 1), (1, 2), (0, 2)],
        FractalKind::Ring => &[(0, 1)],
    }
}

pub fn dirichlet_energy(g: &FractalGraph, f: &RealField) -> Result<EnergyReport> {
    g.check_field(f)?;
    let c = g.conductance();
    let v = f.values();
    let pairs = cell_pairs(g.kind());
    let per_cell: Vec<f64> = g
        .cells()
        .map(|(_, corners)| {
            compensated_sum(pairs.iter().map(|&(a, b)| {
                let d = v[corners[b]] - v[corners[a]];
                0.5 * c * d * d
            }))
        })
        .collect();
    Ok(EnergyReport {
        kind: g.kind(),
        level: g.level(),
        energy: compensated_sum(per_cell.iter().copied()),
        per_cell,
    })
}

/// Weighted energy `Σ_e w_e (f_j - f_i)^2 / 2` over any network.
pub fn network_energy<N: Network + ?Sized>(g: &N, f: &[f64]) -> f64 {
    compensated_sum(g.edges().iter().zip(g.weights()).map(|(e, w)| {
        let d = f[e[1]] - f[e[0]];
        0.5 * w * d * d
    }))
}

pub fn network_laplacian<N: Network + ?Sized>(g: &N, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.vertex_count()];
    for (e, w) in g.edges().iter().zip(g.weights()) {
        let d = w * (f[e[1]] - f[e[0]]);
        out[e[0]] += d;
        out[e[1]] -= d;
    }
    out
}

/// `Δ_n f` at every vertex, boundary included.
pub fn laplacian(g: &FractalGraph, f: &RealField) -> Result<RealField> {
    g.check_field(f)?;
    Ok(RealField::new(g.level(), network_laplacian(g, f.values())))
}

/// The 1/5–2/5 rule: values at the midpoints `x` (of `ab`), `y` (of `bc`), `z` (of `ca`).
pub fn harmonic_extend_once(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    (
        (2.0 * a + 2.0 * b + c) / 5.0,
        (a + 2.0 * b + 2.0 * c) / 5.0,
        (2.0 * a + b + 2.0 * c) / 5.0,
    )
}

/// Harmonic extension of SG values on `V_from` to `V_to`; input and output in id order.
pub fn sg_extend(values: &[f64], from: u32, to: u32) -> Result<Vec<f64>> {
    if values.len() != sg_vertex_count(from) {
        return Err(Error::FieldMismatch {
            expected: sg_vertex_count(from),
            got: values.len(),
            level: from,
            got_level: from,
        });
    }
    if to < from {
        return Err(Error::LevelOutOfRange {
            level: to,
            min: from,
            max: crate::graph::SG_MAX_LEVEL,
        });
    }
    let mut out = Vec::with_capacity(sg_vertex_count(to));
    out.extend_from_slice(values);
    for k in from..to {
        for w in Word::all(k, 3) {
            let [a, b, c] = [0u8, 1, 2].map(|i| out[sg_corner_id(w, i)]);
            let (x, y, z) = harmonic_extend_once(a, b, c);
            // New ids of level k+1 come per parent cell in the order x, z, y.
            out.extend([x, z, y]);
        }
    }
    Ok(out)
}

/// Midpoint-rule extension of a ring field from level `from` to `to`.
pub fn ring_extend(values: &[f64], from: u32, to: u32) -> Vec<f64> {
    let mut cur = values.to_vec();
    for _ in from..to {
        let n = cur.len();
        let mut next = Vec::with_capacity(2 * n);
        for i in 0..n {
            next.push(cur[i]);
            next.push(0.5 * (cur[i] + cur[(i + 1) % n]));
        }
        cur = next;
    }
    cur
}

pub fn solve_dirichlet(g: &FractalGraph, phi: &BoundaryData, method: DirichletMethod) -> Result<RealField> {
    phi.check(g)?;
    let values = match (method, g.kind()) {
        (DirichletMethod::Extension, FractalKind::Sg) => {
            let base: Vec<f64> = phi.values.values().copied().collect();
            sg_extend(&base, 0, g.level())?
        }
        (DirichletMethod::Extension, FractalKind::Ring) => {
            // With a single boundary vertex the level-1 solution is constant.
            let p = phi.values[&0];
            ring_extend(&[p, p], 1, g.level())
        }
        (DirichletMethod::LinearSolve, _) => {
            let solver = if g.level() <= DIRECT_SOLVE_MAX_LEVEL {
                SolveMethod::Direct
            } else {
                SolveMethod::ConjugateGradient
            };
            solve_interior(g, phi, solver)?
        }
    };
    Ok(RealField::new(g.level(), values))
}

/// Solves `Δ f = 0` on interior vertices with `f = φ` on the boundary.
///
/// Unknowns are numbered in reverse id order so the factorization eliminates the
/// finest vertices first, which keeps the Cholesky factor sparse.
fn solve_interior(g: &FractalGraph, phi: &BoundaryData, solver: SolveMethod) -> Result<Vec<f64>> {
    let n = g.len();
    let mut slot = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for v in (0..n).rev() {
        if !g.is_boundary(v) {
            slot[v] = interior.len();
            interior.push(v);
        }
    }
    let mut values = vec![0.0; n];
    for (&id, &p) in &phi.values {
        values[id] = p;
    }
    if interior.is_empty() {
        return Ok(values);
    }
    let mut a = SymAssembler::new(interior.len());
    let mut rhs = vec![0.0; interior.len()];
    for (e, &w) in g.edges().iter().zip(g.weights()) {
        let (i, j) = (e[0], e[1]);
        match (slot[i] != usize::MAX, slot[j] != usize::MAX) {
            (true, true) => a.add_edge(slot[i], slot[j], w),
            (true, false) => {
                a.add_diag(slot[i], w);
                rhs[slot[i]] += w * values[j];
            }
            (false, true) => {
                a.add_diag(slot[j], w);
                rhs[slot[j]] += w * values[i];
            }
            (false, false) => {}
        }
    }
    let x = linalg::solve(&a, &rhs, solver)?;
    for (k, &v) in interior.iter().enumerate() {
        values[v] = x[k];
    }
    Ok(values)
}

/// Linear-solve path with an explicit solver choice.
pub fn solve_dirichlet_with(g: &FractalGraph, phi: &BoundaryData, solver: SolveMethod) -> Result<RealField> {
    phi.check(g)?;
    Ok(RealField::new(g.level(), solve_interior(g, phi, solver)?))
}

/// `∂_n f(v) = c_m Σ_{y ~ v} (f(y) - f(v))` at a boundary vertex.
pub fn normal_derivative(g: &FractalGraph, f: &RealField, v: usize) -> Result<f64> {
    g.check_field(f)?;
    if !g.is_boundary(v) {
        return Err(Error::NotBoundary(v));
    }
    let vals = f.values();
    Ok(compensated_sum(
        g.neighbors(v)
            .iter()
            .map(|&(y, e)| g.weights()[e] * (vals[y] - vals[v])),
    ))
}

/// Largest interior Laplacian magnitude.
pub fn interior_residual(g: &FractalGraph, f: &RealField) -> Result<f64> {
    let lap = laplacian(g, f)?;
    Ok(lap
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| !g.is_boundary(*i))
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max))
}

/// `max_{x≠y} |f(x) - f(y)| / |x - y|^β` over all vertex pairs.
pub fn holder_ratio(g: &FractalGraph, f: &RealField, beta: f64) -> Result<f64> {
    g.check_field(f)?;
    let pts: Vec<[f64; 2]> = g.vertices().iter().map(|v| v.coords).collect();
    let vals = f.values();
    let half = 0.5 * beta;
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in 0..i {
            let df = (vals[i] - vals[j]).abs();
            if df == 0.0 {
                continue;
            }
            let dx = pts[i][0] - pts[j][0];
            let dy = pts[i][1] - pts[j][1];
            let r2 = dx * dx + dy * dy;
            // r^β >= r^2 for r <= 1, so such a pair cannot raise the maximum.
            if df <= best * r2.max(1e-300) && r2 <= 1.0 {
                continue;
            }
            best = best.max(df / r2.powf(half));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_ring_graph, build_sg_graph};

    fn harmonic(n: u32, phi: [f64; 3]) -> (FractalGraph, RealField) {
        let g = build_sg_graph(n).unwrap();
        let b = BoundaryData::for_graph(&g, &phi).unwrap();
        let f = solve_dirichlet(&g, &b, DirichletMethod::Extension).unwrap();
        (g, f)
    }

    #[test]
    fn level_zero_energy() {
        let g = build_sg_graph(0).unwrap();
        let f = RealField::new(0, vec![0.0, 0.0, 1.0]);
        assert_eq!(dirichlet_energy(&g, &f).unwrap().energy, 1.0);
    }

    #[test]
    fn extend_once_columns() {
        assert_eq!(harmonic_extend_once(1.0, 0.0, 0.0), (0.4, 0.2, 0.4));
        assert_eq!(harmonic_extend_once(0.0, 0.0, 1.0), (0.2, 0.4, 0.4));
        assert_eq!(harmonic_extend_once(1.0, 1.0, 1.0), (1.0, 1.0, 1.0));
    }

    #[test]
    fn level_one_values() {
        let (_, f) = harmonic(1, [0.0, 0.0, 1.0]);
        // ids 3,4,5 are x (v1v2), z (v1v3), y (v2v3)
        let v = f.values();
        assert!((v[3] - 0.2).abs() < 1e-15);
        assert!((v[4] - 0.4).abs() < 1e-15);
        assert!((v[5] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn methods_agree() {
        for n in 1..=6 {
            let g = build_sg_graph(n).unwrap();
            let b = BoundaryData::for_graph(&g, &[0.3, -1.0, 2.0]).unwrap();
            let e = solve_dirichlet(&g, &b, DirichletMethod::Extension).unwrap();
            let l = solve_dirichlet(&g, &b, DirichletMethod::LinearSolve).unwrap();
            let c = solve_dirichlet_with(&g, &b, SolveMethod::ConjugateGradient).unwrap();
            assert!(e.max_abs_diff(&l) < 1e-10);
            assert!(e.max_abs_diff(&c) < 1e-10);
            assert!(interior_residual(&g, &e).unwrap() < 1e-10);
        }
    }

    #[test]
    fn normal_derivative_constant_in_level() {
        for n in 0..=5 {
            let (g, f) = harmonic(n, [0.0, 0.0, 1.0]);
            let d = normal_derivative(&g, &f, 0).unwrap();
            assert!((d - 1.0).abs() < 1e-12, "n={n}: {d}");
        }
        let (g, f) = harmonic(2, [0.0, 0.0, 1.0]);
        assert_eq!(normal_derivative(&g, &f, 5), Err(Error::NotBoundary(5)));
    }

    #[test]
    fn ring_twist_energy() {
        let n = 4;
        let g = build_ring_graph(n).unwrap();
        let q = 3.0;
        let size = 1usize << n;
        // Lift on the cut ring: closing edge carries the jump q.
        let lift: Vec<f64> = (0..=size).map(|i| q * i as f64 / size as f64).collect();
        let e: f64 = (0..size)
            .map(|i| 0.5 * g.conductance() * (lift[i + 1] - lift[i]).powi(2))
            .sum();
        assert!((e - q * q / 2.0).abs() < 1e-12);
    }

    #[test]
    fn ring_harmonic_is_constant() {
        let g = build_ring_graph(4).unwrap();
        let b = BoundaryData::for_graph(&g, &[0.7]).unwrap();
        for m in [DirichletMethod::Extension, DirichletMethod::LinearSolve] {
            let f = solve_dirichlet(&g, &b, m).unwrap();
            assert!(f.values().iter().all(|&v| (v - 0.7).abs() < 1e-12));
        }
    }

    #[test]
    fn boundary_validation() {
        let g = build_sg_graph(1).unwrap();
        assert!(BoundaryData::parse(&g, "0,1").is_err());
        assert!(BoundaryData::parse(&g, "0,a,1").is_err());
        assert!(BoundaryData::parse(&g, "0,0,1").is_ok());
    }

    #[test]
    fn energy_export_labels() {
        let (g, f) = harmonic(1, [0.0, 0.0, 1.0]);
        let r = dirichlet_energy(&g, &f).unwrap();
        let ex = r.export();
        assert_eq!(ex.per_cell.keys().collect::<Vec<_>>(), ["1", "2", "3"]);
        assert!((r.energy - 1.0).abs() < 1e-14);
    }
}
