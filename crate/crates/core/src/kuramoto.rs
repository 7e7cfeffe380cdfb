//! Kuramoto dynamics `u̇ = -2π ∇J` on weighted graphs, energy minimization and stability.

use std::f64::consts::{PI, TAU};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{compensated_sum, nearest_rep, PhaseField, RealField};
use crate::graph::{FractalGraph, FractalKind, Network};
use crate::linalg::{self, SymAssembler};
use crate::winding::{degree, DegreeVector};

/// Eigenvalues within this band of zero are classified degenerate.
pub const STABILITY_TOL: f64 = 1e-9;
/// Largest residual accepted by the Hessian test.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
/// Relative slack of the energy-decay monitor.
const DECAY_SLACK: f64 = 1e-12;
/// Relative rounding level of a compensated energy evaluation.
const ENERGY_NOISE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Saddle,
    Degenerate,
}

impl Stability {
    pub fn classify(min_eig: f64) -> Self {
        if min_eig > STABILITY_TOL {
            Stability::Stable
        } else if min_eig < -STABILITY_TOL {
            Stability::Saddle
        } else {
            Stability::Degenerate
        }
    }
}

/// `Σ_j w_ij sin(2π(u_j - u_i))` at every vertex.
///
/// Differences are reduced to their nearest representative first, so states whose
/// edge differences are exact multiples of a grid step give exact cancellations.
pub fn km_rhs<N: Network + ?Sized>(g: &N, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.vertex_count()];
    km_rhs_into(g, u, &mut out);
    out
}

fn km_rhs_into<N: Network + ?Sized>(g: &N, u: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (e, &w) in g.edges().iter().zip(g.weights()) {
        let s = w * (TAU * nearest_rep(u[e[1]] - u[e[0]])).sin();
        out[e[0]] += s;
        out[e[1]] -= s;
    }
}

/// `J = Σ_e w_e (1 - cos 2πd_e) / 4π²`, evaluated as `2 sin²(πd)` for accuracy at small `d`.
pub fn km_energy_value<N: Network + ?Sized>(g: &N, u: &[f64]) -> f64 {
    compensated_sum(
        g.edges()
            .iter()
            .zip(g.weights())
            .map(|(e, &w)| edge_energy(w, u[e[1]] - u[e[0]])),
    )
}

fn edge_energy(w: f64, d: f64) -> f64 {
    let s = (PI * nearest_rep(d)).sin();
    w * 2.0 * s * s / (4.0 * PI * PI)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KuramotoEnergyReport {
    pub energy: f64,
    pub grad_inf_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_edge: Option<Vec<f64>>,
}

pub fn km_rhs_field(g: &FractalGraph, u: &PhaseField) -> Result<RealField> {
    g.check_len(u.len(), u.level())?;
    Ok(RealField::new(g.level(), km_rhs(g, u.values())))
}

pub fn km_energy(g: &FractalGraph, u: &PhaseField, per_edge: bool) -> Result<KuramotoEnergyReport> {
    g.check_len(u.len(), u.level())?;
    let vals = u.values();
    let rhs = km_rhs(g, vals);
    Ok(KuramotoEnergyReport {
        energy: km_energy_value(g, vals),
        grad_inf_norm: inf_norm(&rhs) / TAU,
        per_edge: per_edge.then(|| {
            g.edges()
                .iter()
                .zip(g.weights())
                .map(|(e, &w)| edge_energy(w, vals[e[1]] - vals[e[0]]))
                .collect()
        }),
    })
}

/// Default RK4 step: `0.2 (3/5)^n` for SG, `0.2 4^{-n}` for the ring.
pub fn default_step(kind: FractalKind, level: u32) -> f64 {
    match kind {
        FractalKind::Sg => 0.2 * 0.6f64.powi(level as i32),
        FractalKind::Ring => 0.2 * 0.25f64.powi(level as i32),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowConfig {
    /// RK4 step; `None` selects [`default_step`].
    pub step: Option<f64>,
    pub max_time: f64,
    pub max_steps: usize,
    /// Residual tolerance on `‖rhs‖_∞`.
    pub tol: f64,
    /// Vertex held fixed; `None` evolves all phases (the flow conserves their mean).
    pub pin: Option<usize>,
    /// Record `(time, energy, residual)` every this many steps.
    pub snapshot_every: Option<usize>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step: None,
            max_time: 200.0,
            max_steps: 2_000_000,
            tol: 1e-10,
            pin: None,
            snapshot_every: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub energy: f64,
    pub residual: f64,
}

/// Raw outcome of a flow or descent run on real representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowOutcome {
    pub values: Vec<f64>,
    pub residual: f64,
    pub energy: f64,
    pub steps: usize,
    pub time: f64,
    pub final_step: f64,
    pub step_halvings: usize,
    pub converged: bool,
    pub snapshots: Vec<Snapshot>,
}

fn zero_pin(v: &mut [f64], pin: Option<usize>) {
    if let Some(p) = pin {
        v[p] = 0.0;
    }
}

/// Fixed-step RK4 on lifted phases with an energy-decay monitor that halves the step
/// whenever a step would raise `J`.
pub fn integrate<N: Network + ?Sized>(g: &N, u0: &[f64], step: f64, cfg: &FlowConfig) -> FlowOutcome {
    let n = g.vertex_count();
    let mut u = u0.to_vec();
    let mut h = step;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut energy = km_energy_value(g, &u);
    let mut time = 0.0;
    let mut steps = 0;
    let mut halvings = 0;
    let mut snapshots = Vec::new();
    km_rhs_into(g, &u, &mut k1);
    zero_pin(&mut k1, cfg.pin);
    let mut residual = inf_norm(&k1);
    loop {
        if let Some(every) = cfg.snapshot_every {
            if steps % every.max(1) == 0 {
                snapshots.push(Snapshot { time, energy, residual });
            }
        }
        if residual < cfg.tol || steps >= cfg.max_steps || time >= cfg.max_time || h < 1e-300 {
            break;
        }
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * h * k1[i];
        }
        km_rhs_into(g, &tmp, &mut k2);
        zero_pin(&mut k2, cfg.pin);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * h * k2[i];
        }
        km_rhs_into(g, &tmp, &mut k3);
        zero_pin(&mut k3, cfg.pin);
        for i in 0..n {
            tmp[i] = u[i] + h * k3[i];
        }
        km_rhs_into(g, &tmp, &mut k4);
        zero_pin(&mut k4, cfg.pin);
        for i in 0..n {
            next[i] = u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let e_next = km_energy_value(g, &next);
        if e_next > energy + DECAY_SLACK * energy.max(f64::MIN_POSITIVE) {
            h *= 0.5;
            halvings += 1;
            continue;
        }
        std::mem::swap(&mut u, &mut next);
        energy = e_next;
        time += h;
        steps += 1;
        km_rhs_into(g, &u, &mut k1);
        zero_pin(&mut k1, cfg.pin);
        residual = inf_norm(&k1);
    }
    FlowOutcome {
        values: u,
        residual,
        energy,
        steps,
        time,
        final_step: h,
        step_halvings: halvings,
        converged: residual < cfg.tol,
        snapshots,
    }
}

/// Gradient descent with Armijo backtracking, `u(pin) ≡ 0`, until `‖∇J‖_∞ < tol`.
///
/// Each line search starts from the Barzilai–Borwein step length of the previous iterate.
pub fn descend<N: Network + ?Sized>(g: &N, u0: &[f64], pin: usize, tol: f64, max_iter: usize) -> FlowOutcome {
    let n = g.vertex_count();
    let shift = u0[pin];
    let mut u: Vec<f64> = u0.iter().map(|v| v - shift).collect();
    let mut dir = vec![0.0; n];
    let mut prev_dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut energy = km_energy_value(g, &u);
    let mut alpha = 1.0 / g.weights().iter().fold(1.0f64, |a, &w| a.max(w));
    let mut iters = 0;
    let mut halvings = 0;
    let mut grad_norm;
    let mut last_step = 0.0;
    loop {
        // Descent direction rhs = -2π ∇J; the pinned component is reported but not moved.
        km_rhs_into(g, &u, &mut dir);
        grad_norm = inf_norm(&dir) / TAU;
        dir[pin] = 0.0;
        if grad_norm < tol || iters >= max_iter {
            break;
        }
        if iters > 0 {
            // s = last_step * prev_dir, y = prev_dir - dir (in rhs units).
            let sy: f64 = prev_dir.iter().zip(&dir).map(|(p, d)| p * (p - d)).sum();
            let ss: f64 = linalg::dot(&prev_dir, &prev_dir);
            if sy > 0.0 {
                alpha = last_step * ss / sy;
            }
        }
        let slope = linalg::dot(&dir, &dir) / TAU;
        // Near the minimum the required decrease falls below the rounding error of J.
        let noise = ENERGY_NOISE * energy;
        loop {
            for i in 0..n {
                trial[i] = u[i] + alpha * dir[i];
            }
            let e = km_energy_value(g, &trial);
            if e <= energy - 1e-4 * alpha * slope + noise || alpha < 1e-300 {
                energy = e;
                break;
            }
            alpha *= 0.5;
            halvings += 1;
        }
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut prev_dir, &mut dir);
        last_step = alpha;
        iters += 1;
    }
    FlowOutcome {
        residual: grad_norm * TAU,
        values: u,
        energy,
        steps: iters,
        time: 0.0,
        final_step: alpha,
        step_halvings: halvings,
        converged: grad_norm < tol,
        snapshots: Vec::new(),
    }
}

/// Hessian of `J` with the pinned row and column removed; unknowns in reverse id order.
pub fn hessian<N: Network + ?Sized>(g: &N, u: &[f64], pin: usize) -> SymAssembler {
    let n = g.vertex_count();
    let slot = |v: usize| -> Option<usize> {
        match v.cmp(&pin) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some(n - 2 - v),
            std::cmp::Ordering::Greater => Some(n - 1 - v),
        }
    };
    let mut h = SymAssembler::new(n - 1);
    for (e, &w) in g.edges().iter().zip(g.weights()) {
        let c = w * (TAU * (u[e[1]] - u[e[0]])).cos();
        match (slot(e[0]), slot(e[1])) {
            (Some(i), Some(j)) => h.add_edge(i, j, c),
            (Some(i), None) | (None, Some(i)) => h.add_diag(i, c),
            (None, None) => {}
        }
    }
    h
}

pub fn hessian_stability<N: Network + ?Sized>(g: &N, u: &[f64], pin: usize) -> Result<(f64, Stability)> {
    let residual = inf_norm(&km_rhs(g, u));
    if residual >= EQUILIBRIUM_TOL {
        return Err(Error::NotEquilibrium(residual));
    }
    let lam = linalg::min_eigenvalue(&hessian(g, u, pin));
    Ok((lam, Stability::classify(lam)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub field: PhaseField,
    pub residual: f64,
    pub energy: f64,
    pub hessian_min_eig: Option<f64>,
    pub stability: Option<Stability>,
    #[serde(serialize_with = "ser_degree")]
    pub degree: Option<DegreeVector>,
    pub steps: usize,
    pub time: f64,
    pub final_step: f64,
    pub converged: bool,
    #[serde(skip)]
    pub lift: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
}

fn ser_degree<S: Serializer>(d: &Option<DegreeVector>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => d.serialize(s),
        None => s.serialize_none(),
    }
}

impl EquilibriumReport {
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from("time,energy,residual\n");
        for snap in &self.snapshots {
            s.push_str(&format!(
                "{},{},{}\n",
                crate::field::fmt_num(snap.time),
                crate::field::fmt_num(snap.energy),
                crate::field::fmt_num(snap.residual)
            ));
        }
        s
    }
}

/// Wraps a raw run on `g` into a report with Hessian verdict and degree.
pub fn equilibrium_report(g: &FractalGraph, out: FlowOutcome, pin: usize, degree_order: u32) -> EquilibriumReport {
    let field = PhaseField::from_lift(g.level(), &out.values);
    let (hessian_min_eig, stability) = match hessian_stability(g, &out.values, pin) {
        Ok((l, s)) => (Some(l), Some(s)),
        Err(_) => (None, None),
    };
    let degree = degree(&field, g, degree_order.min(g.level())).ok();
    EquilibriumReport {
        field,
        residual: out.residual,
        energy: out.energy,
        hessian_min_eig,
        stability,
        degree,
        steps: out.steps,
        time: out.time,
        final_step: out.final_step,
        converged: out.converged,
        lift: out.values,
        snapshots: out.snapshots,
    }
}

fn lifted(g: &FractalGraph, u0: &PhaseField) -> Result<Vec<f64>> {
    g.check_len(u0.len(), u0.level())?;
    Ok(u0.values().to_vec())
}

/// Runs the flow from `u0` and classifies the end state; degrees are taken on loops of order `<= degree_order`.
pub fn integrate_to_equilibrium(
    g: &FractalGraph,
    u0: &PhaseField,
    cfg: &FlowConfig,
    degree_order: u32,
) -> Result<EquilibriumReport> {
    let u = lifted(g, u0)?;
    let step = cfg.step.unwrap_or_else(|| default_step(g.kind(), g.level()));
    let out = integrate(g, &u, step, cfg);
    Ok(equilibrium_report(g, out, cfg.pin.unwrap_or(0), degree_order))
}

pub fn minimize_energy(
    g: &FractalGraph,
    u0: &PhaseField,
    pin: usize,
    tol: f64,
    max_iter: usize,
    degree_order: u32,
) -> Result<EquilibriumReport> {
    if pin >= g.len() {
        return Err(Error::Unsupported(format!("pin {pin} is not a vertex")));
    }
    let u = lifted(g, u0)?;
    let out = descend(g, &u, pin, tol, max_iter);
    Ok(equilibrium_report(g, out, pin, degree_order))
}

/// `u_i = q i 2^{-n} mod 1`, computed exactly in integers.
pub fn twisted_state(level: u32, q: i64) -> PhaseField {
    let size = 1i64 << level;
    let vals: Vec<f64> = (0..size)
        .map(|i| (q * i).rem_euclid(size) as f64 / size as f64)
        .collect();
    PhaseField::from_lift(level, &vals)
}

/// `u(v_i) = r i / (2^n - 2)` for `i = 1..2^n`, with `v_i` at vertex id `i - 1`.
pub fn half_twisted_state(level: u32, r: f64) -> PhaseField {
    let size = 1usize << level;
    let vals: Vec<f64> = (1..=size).map(|i| r * i as f64 / (size as f64 - 2.0)).collect();
    PhaseField::from_lift(level, &vals)
}
