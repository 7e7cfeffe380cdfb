//! wasm-bindgen bindings for the static demo page in `www/`.

use fractal_kuramoto::covering::harmonic_map;
use fractal_kuramoto::dirichlet::{dirichlet_energy, solve_dirichlet, BoundaryData, DirichletMethod};
use fractal_kuramoto::graph::{build_sg_graph, FractalGraph, FractalKind};
use fractal_kuramoto::kuramoto::{default_step, integrate, km_energy_value, FlowConfig};
use fractal_kuramoto::render::{render_svg, ColorScheme};
use fractal_kuramoto::winding::{degree, DegreeVector};
use fractal_kuramoto::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Levels beyond this make the page sluggish.
pub const MAX_LEVEL: u32 = 7;

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(fractal_kuramoto::Error::LevelOutOfRange {
            level,
            min: 0,
            max: MAX_LEVEL,
        });
    }
    Ok(())
}

fn js(e: fractal_kuramoto::Error) -> JsError {
    JsError::new(&e.to_string())
}

pub struct HarmonicView {
    pub svg: String,
    pub energy: f64,
}

pub fn harmonic_view(level: u32, a: f64, b: f64, c: f64) -> Result<HarmonicView> {
    check_level(level)?;
    let g = build_sg_graph(level)?;
    let f = solve_dirichlet(
        &g,
        &BoundaryData::for_graph(&g, &[a, b, c])?,
        DirichletMethod::Extension,
    )?;
    let energy = dirichlet_energy(&g, &f)?.energy;
    let scheme = ColorScheme::Real {
        min: a.min(b).min(c),
        max: a.max(b).max(c),
    };
    Ok(HarmonicView {
        svg: render_svg(&g, f.values(), scheme),
        energy,
    })
}

/// SVG of the harmonic field with corner values `a`, `b`, `c`.
#[wasm_bindgen]
pub fn harmonic_svg(level: u32, a: f64, b: f64, c: f64) -> std::result::Result<String, JsError> {
    harmonic_view(level, a, b, c).map(|v| v.svg).map_err(js)
}

#[wasm_bindgen]
pub fn harmonic_energy(level: u32, a: f64, b: f64, c: f64) -> std::result::Result<f64, JsError> {
    harmonic_view(level, a, b, c).map(|v| v.energy).map_err(js)
}

/// Kuramoto network on the level-`n` gasket started from the harmonic map of a degree.
#[wasm_bindgen]
pub struct KuramotoSim {
    graph: FractalGraph,
    omega: DegreeVector,
    phases: Vec<f64>,
    step: f64,
    time: f64,
}

impl KuramotoSim {
    pub fn create(degree_text: &str, level: u32, noise: f64, seed: u64) -> Result<KuramotoSim> {
        check_level(level)?;
        let omega = DegreeVector::parse(FractalKind::Sg, degree_text)?;
        let hm = harmonic_map(FractalKind::Sg, &omega, level)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases = hm
            .phases
            .values()
            .iter()
            .map(|v| v + noise * (rng.gen::<f64>() - 0.5))
            .collect();
        Ok(KuramotoSim {
            graph: hm.domain.base().clone(),
            omega,
            phases,
            step: default_step(FractalKind::Sg, level),
            time: 0.0,
        })
    }

    pub fn degree_text(&self) -> String {
        let order = self.omega.max_order().unwrap_or(0);
        let field = fractal_kuramoto::field::PhaseField::from_lift(self.graph.level(), &self.phases);
        degree(&field, &self.graph, order).map_or_else(|e| format!("unresolved ({})", e.kind()), |d| d.to_string())
    }
}

#[wasm_bindgen]
impl KuramotoSim {
    #[wasm_bindgen(constructor)]
    pub fn new(degree_text: &str, level: u32, noise: f64, seed: u64) -> std::result::Result<KuramotoSim, JsError> {
        KuramotoSim::create(degree_text, level, noise, seed).map_err(js)
    }

    /// Advances `steps` RK4 steps; returns the residual `‖rhs‖_∞`.
    pub fn advance(&mut self, steps: usize) -> f64 {
        let cfg = FlowConfig {
            max_steps: steps,
            tol: 0.0,
            ..FlowConfig::default()
        };
        let out = integrate(&self.graph, &self.phases, self.step, &cfg);
        self.phases = out.values;
        self.step = out.final_step;
        self.time += out.time;
        out.residual
    }

    pub fn energy(&self) -> f64 {
        km_energy_value(&self.graph, &self.phases)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn degree(&self) -> String {
        self.degree_text()
    }

    pub fn svg(&self) -> String {
        render_svg(&self.graph, &self.phases, ColorScheme::Phase)
    }

    pub fn phases(&self) -> Vec<f64> {
        self.phases.clone()
    }
}
