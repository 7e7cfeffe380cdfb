use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fractal_kuramoto::graph::FractalKind;
use fractal_kuramoto::kuramoto::FlowConfig;
use fractal_kuramoto::winding::DegreeVector;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// RK4 integration of the Kuramoto flow.
    Flow,
    /// Gradient descent on the Kuramoto energy.
    Minimize,
}

/// Flags shared by all subcommands; each overrides the matching `--config` entry.
#[derive(Args, Clone, Debug, Default)]
pub struct Opts {
    /// JSON run file with any of the fields below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// sg or ring.
    #[arg(long)]
    pub fractal: Option<FractalKind>,
    #[arg(long)]
    pub level: Option<u32>,
    /// Level range for verify and sweep: "3..7" or "3,4,5".
    #[arg(long)]
    pub levels: Option<String>,
    /// Dense "1,0,0,0" or sparse "eps:1,1:2".
    #[arg(long, allow_hyphen_values = true)]
    pub degree: Option<String>,
    /// Degrees for sweep, separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    pub degrees: Option<String>,
    /// Boundary values "a,b,c"; the ring uses the first value as its pin.
    #[arg(long, allow_hyphen_values = true)]
    pub boundary: Option<String>,
    /// Residual tolerance on the flow or descent.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub max_time: Option<f64>,
    #[arg(long)]
    pub pin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Initial state for flow: harmonic, random, twisted:Q or csv:PATH.
    #[arg(long)]
    pub init: Option<String>,
    /// Uniform perturbation amplitude added to the initial state.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Record (time, energy, residual) every this many steps.
    #[arg(long)]
    pub trajectory: Option<usize>,
    /// Also write an SVG rendering.
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractal: Option<FractalKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Loads `--config` if given, then applies the flags on top.
    pub fn resolve(mode: &str, opts: &Opts) -> Result<Self, CliError> {
        let mut cfg = match &opts.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                serde_json::from_str::<RunConfig>(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(m) = &cfg.mode {
            if m != mode {
                return Err(CliError::Usage(format!("run file is for mode '{m}', not '{mode}'")));
            }
        }
        cfg.mode = Some(mode.to_string());
        let o = opts.clone();
        cfg.fractal = o.fractal.or(cfg.fractal);
        cfg.level = o.level.or(cfg.level);
        cfg.levels = o.levels.or(cfg.levels);
        cfg.degree = o.degree.or(cfg.degree);
        cfg.degrees = o.degrees.or(cfg.degrees);
        cfg.boundary = o.boundary.or(cfg.boundary);
        cfg.tol = o.tol.or(cfg.tol);
        cfg.step = o.step.or(cfg.step);
        cfg.max_time = o.max_time.or(cfg.max_time);
        cfg.pin = o.pin.or(cfg.pin);
        cfg.seed = o.seed.or(cfg.seed);
        cfg.method = o.method.or(cfg.method);
        cfg.init = o.init.or(cfg.init);
        cfg.noise = o.noise.or(cfg.noise);
        cfg.trajectory = o.trajectory.or(cfg.trajectory);
        if o.svg {
            cfg.svg = Some(true);
        }
        cfg.out = o.out.or(cfg.out);
        Ok(cfg)
    }

    pub fn fractal(&self) -> FractalKind {
        self.fractal.unwrap_or(FractalKind::Sg)
    }

    pub fn level(&self) -> Result<u32, CliError> {
        self.level.ok_or_else(|| CliError::Usage("--level is required".into()))
    }

    pub fn degree(&self) -> Result<DegreeVector, CliError> {
        let text = self
            .degree
            .as_deref()
            .ok_or_else(|| CliError::Usage("--degree is required".into()))?;
        Ok(DegreeVector::parse(self.fractal(), text)?)
    }

    pub fn levels(&self) -> Result<Vec<u32>, CliError> {
        let text = self
            .levels
            .as_deref()
            .ok_or_else(|| CliError::Usage("--levels is required".into()))?;
        parse_levels(text)
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or(Method::Flow)
    }

    pub fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn svg(&self) -> bool {
        self.svg.unwrap_or(false)
    }

    pub fn flow_config(&self) -> FlowConfig {
        let d = FlowConfig::default();
        FlowConfig {
            step: self.step,
            max_time: self.max_time.unwrap_or(d.max_time),
            tol: self.tol.unwrap_or(d.tol),
            pin: self.pin,
            snapshot_every: self.trajectory,
            ..d
        }
    }
}

pub fn parse_levels(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse levels '{text}'"));
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let b = b.trim_start_matches('=');
        let lo: u32 = a.trim().parse().map_err(|_| bad())?;
        let hi: u32 = b.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    t.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}
