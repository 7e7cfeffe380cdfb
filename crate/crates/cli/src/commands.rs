use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::thread;

use fractal_kuramoto::covering::{harmonic_map, lift_energy, neumann_check, HarmonicMap};
use fractal_kuramoto::dirichlet::{dirichlet_energy, network_energy, solve_dirichlet, BoundaryData, DirichletMethod};
use fractal_kuramoto::field::{circle_distance, fmt_num, PhaseField, RealField};
use fractal_kuramoto::graph::{build_ring_graph, build_sg_graph, FractalGraph, FractalKind, Network};
use fractal_kuramoto::kuramoto::{
    integrate_to_equilibrium, km_energy_value, minimize_energy, twisted_state, EquilibriumReport, Stability,
};
use fractal_kuramoto::pcf::HarmonicStructure;
use fractal_kuramoto::render::{render_svg, ColorScheme};
use fractal_kuramoto::winding::{degree, DegreeVector};
use fractal_kuramoto::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Method, RunConfig};
use crate::error::CliError;
use crate::output::OutDir;

const DESCENT_MAX_ITER: usize = 5_000_000;

pub struct Done {
    pub out: OutDir,
    pub summary: Vec<String>,
}

fn graph(kind: FractalKind, n: u32) -> Result<FractalGraph, CliError> {
    Ok(match kind {
        FractalKind::Sg => build_sg_graph(n)?,
        FractalKind::Ring => build_ring_graph(n)?,
    })
}

fn with_hint(e: Error, n: u32) -> CliError {
    match e {
        Error::UnresolvedWinding { .. } => CliError::Hint {
            hint: format!("rerun with --level {} or higher", n + 1),
            source: e,
        },
        other => other.into(),
    }
}

pub fn build_graph(cfg: &RunConfig) -> Result<Done, CliError> {
    let kind = cfg.fractal();
    let n = cfg.level()?;
    let g = graph(kind, n)?;
    let mut out = OutDir::create(&cfg.out())?;
    out.write_json("graph.json", &g.export())?;
    out.write_json("structure.json", &HarmonicStructure::structure_for(kind))?;
    Ok(Done {
        out,
        summary: vec![format!(
            "{kind} level {n}: {} vertices, {} edges, {} cells",
            g.len(),
            g.edges().len(),
            g.cell_count()
        )],
    })
}

pub fn harmonic(cfg: &RunConfig) -> Result<Done, CliError> {
    let kind = cfg.fractal();
    let n = cfg.level()?;
    let g = graph(kind, n)?;
    let phi = match (kind, cfg.boundary.as_deref()) {
        (FractalKind::Sg, None) => return Err(CliError::Usage("--boundary a,b,c is required".into())),
        (FractalKind::Sg, Some(b)) => BoundaryData::parse(&g, b)?,
        (FractalKind::Ring, b) => {
            let first = b.unwrap_or("0").split(',').next().unwrap_or("0");
            BoundaryData::parse(&g, first)?
        }
    };
    let f = solve_dirichlet(&g, &phi, DirichletMethod::Extension)?;
    let report = dirichlet_energy(&g, &f)?;
    let mut out = OutDir::create(&cfg.out())?;
    out.write("harmonic.csv", &f.to_csv())?;
    out.write_json("energy.json", &report.export())?;
    if cfg.svg() {
        out.write(
            "harmonic.svg",
            &render_svg(&g, f.values(), ColorScheme::real_for(f.values())),
        )?;
    }
    Ok(Done {
        out,
        summary: vec![format!("energy {}", fmt_num(report.energy))],
    })
}

#[derive(Serialize)]
struct CoveringSummary {
    level: u32,
    lift_energy: f64,
    boundary_normal_derivatives: Vec<f64>,
}

pub fn covering(cfg: &RunConfig) -> Result<Done, CliError> {
    let kind = cfg.fractal();
    let omega = cfg.degree()?;
    let n = match cfg.level {
        Some(n) => n,
        None => fractal_kuramoto::covering::required_level(&omega).max(1),
    };
    let hm = harmonic_map(kind, &omega, n).map_err(|e| with_hint(e, n))?;
    let summary = CoveringSummary {
        level: n,
        lift_energy: lift_energy(&hm.domain, &hm.lift),
        boundary_normal_derivatives: neumann_check(&hm.domain, &hm.lift),
    };
    let mut out = OutDir::create(&cfg.out())?;
    out.write_json("covering.json", &hm.domain.export())?;
    out.write_json("lift.json", &hm.lift)?;
    out.write("lift.csv", &RealField::new(n, hm.lift.values.clone()).to_csv())?;
    out.write("phases.csv", &hm.phases.to_csv())?;
    out.write_json("summary.json", &summary)?;
    if cfg.svg() {
        out.write(
            "phases.svg",
            &render_svg(hm.domain.base(), hm.phases.values(), ColorScheme::Phase),
        )?;
    }
    Ok(Done {
        out,
        summary: vec![
            format!(
                "cuts {}",
                hm.domain.cuts().iter().map(|c| c.label()).collect::<Vec<_>>().join(" ")
            ),
            format!("lift energy {}", fmt_num(summary.lift_energy)),
        ],
    })
}

fn relax(g: &FractalGraph, u0: &PhaseField, cfg: &RunConfig, order: u32) -> Result<EquilibriumReport, CliError> {
    let fc = cfg.flow_config();
    Ok(match cfg.method() {
        Method::Flow => integrate_to_equilibrium(g, u0, &fc, order)?,
        Method::Minimize => minimize_energy(g, u0, cfg.pin.unwrap_or(0), fc.tol, DESCENT_MAX_ITER, order)?,
    })
}

fn max_distance(a: &PhaseField, b: &PhaseField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max(circle_distance(*x, *y)))
}

struct TwistRun {
    hm: HarmonicMap,
    report: EquilibriumReport,
    deviation: f64,
}

fn twist_run(kind: FractalKind, omega: &DegreeVector, n: u32, cfg: &RunConfig) -> Result<TwistRun, CliError> {
    let hm = harmonic_map(kind, omega, n).map_err(|e| with_hint(e, n))?;
    let order = omega.max_order().unwrap_or(0);
    let start = degree(&hm.phases, hm.domain.base(), order).map_err(|e| with_hint(e, n))?;
    if &start != omega {
        return Err(CliError::Unresolved(format!(
            "level {n} resolves the harmonic map as degree {start}, not {omega}; rerun with --level {} or higher",
            n + 1
        )));
    }
    let report = relax(hm.domain.base(), &hm.phases, cfg, order)?;
    let deviation = max_distance(&report.field, &hm.phases);
    Ok(TwistRun { hm, report, deviation })
}

fn verdict(run: &TwistRun, omega: &DegreeVector) -> Option<String> {
    let r = &run.report;
    if !r.converged {
        return Some(format!("flow did not converge (residual {:e})", r.residual));
    }
    if r.stability != Some(Stability::Stable) {
        return Some(format!("equilibrium is {:?}", r.stability));
    }
    if r.degree.as_ref() != Some(omega) {
        return Some(format!(
            "degree {} differs from {omega}",
            r.degree.as_ref().map_or("unknown".into(), |d| d.to_string())
        ));
    }
    None
}

#[derive(Serialize)]
struct TwistSummary<'a> {
    requested_degree: String,
    deviation_from_harmonic_map: f64,
    report: &'a EquilibriumReport,
}

pub fn twist(cfg: &RunConfig) -> Result<Done, CliError> {
    let kind = cfg.fractal();
    let omega = cfg.degree()?;
    let n = cfg.level()?;
    let run = twist_run(kind, &omega, n, cfg)?;
    let mut out = OutDir::create(&cfg.out())?;
    out.write("harmonic.csv", &run.hm.phases.to_csv())?;
    out.write("phases.csv", &run.report.field.to_csv())?;
    out.write_json(
        "equilibrium.json",
        &TwistSummary {
            requested_degree: omega.to_string(),
            deviation_from_harmonic_map: run.deviation,
            report: &run.report,
        },
    )?;
    out.write(
        "twist.svg",
        &render_svg(run.hm.domain.base(), run.report.field.values(), ColorScheme::Phase),
    )?;
    if cfg.trajectory.is_some() {
        out.write("trajectory.csv", &run.report.trajectory_csv())?;
    }
    if let Some(why) = verdict(&run, &omega) {
        out.finish("twist", cfg)?;
        return Err(CliError::Verification(why));
    }
    Ok(Done {
        out,
        summary: equilibrium_lines(&run.report, Some(run.deviation)),
    })
}

fn equilibrium_lines(r: &EquilibriumReport, deviation: Option<f64>) -> Vec<String> {
    let mut lines = vec![
        format!(
            "converged {} after {} steps, residual {:e}",
            r.converged, r.steps, r.residual
        ),
        format!("energy {}", fmt_num(r.energy)),
        format!(
            "stability {}, hessian min eigenvalue {}",
            r.stability
                .map_or("unknown".into(), |s| format!("{s:?}").to_lowercase()),
            r.hessian_min_eig.map_or("n/a".into(), fmt_num)
        ),
        format!(
            "degree {}",
            r.degree.as_ref().map_or("unknown".into(), |d| d.to_string())
        ),
    ];
    if let Some(d) = deviation {
        lines.push(format!("max distance to harmonic map {d:e}"));
    }
    lines
}

fn initial_state(cfg: &RunConfig, kind: FractalKind, n: u32) -> Result<PhaseField, CliError> {
    let g = graph(kind, n)?;
    let init = cfg.init.as_deref().unwrap_or("harmonic");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let base = if init == "harmonic" {
        harmonic_map(kind, &cfg.degree()?, n)
            .map_err(|e| with_hint(e, n))?
            .phases
    } else if init == "random" {
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen::<f64>()).collect();
        PhaseField::from_lift(n, &vals)
    } else if let Some(q) = init.strip_prefix("twisted:") {
        if kind != FractalKind::Ring {
            return Err(CliError::Usage("twisted states exist on the ring only".into()));
        }
        let q: i64 = q.parse().map_err(|_| CliError::Usage(format!("bad twist '{q}'")))?;
        twisted_state(n, q)
    } else if let Some(path) = init.strip_prefix("csv:") {
        let path = PathBuf::from(path);
        let text = fs::read_to_string(&path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let f = RealField::from_csv(n, &text)?;
        g.check_len(f.len(), n)?;
        PhaseField::from_lift(n, f.values())
    } else {
        return Err(CliError::Usage(format!("unknown --init '{init}'")));
    };
    match cfg.noise {
        Some(a) if a > 0.0 => {
            let vals: Vec<f64> = base.values().iter().map(|v| v + a * (rng.gen::<f64>() - 0.5)).collect();
            Ok(PhaseField::from_lift(n, &vals))
        }
        _ => Ok(base),
    }
}

pub fn flow(cfg: &RunConfig) -> Result<Done, CliError> {
    let kind = cfg.fractal();
    let n = cfg.level()?;
    let g = graph(kind, n)?;
    let u0 = initial_state(cfg, kind, n)?;
    let order = match &cfg.degree {
        Some(_) => cfg.degree()?.max_order().unwrap_or(0),
        None => 0,
    };
    let report = relax(&g, &u0, cfg, order)?;
    let mut out = OutDir::create(&cfg.out())?;
    out.write("initial.csv", &u0.to_csv())?;
    out.write("phases.csv", &report.field.to_csv())?;
    out.write_json("equilibrium.json", &report)?;
    if cfg.trajectory.is_some() {
        out.write("trajectory.csv", &report.trajectory_csv())?;
    }
    if cfg.svg() {
        out.write("phases.svg", &render_svg(&g, report.field.values(), ColorScheme::Phase))?;
    }
    Ok(Done {
        out,
        summary: equilibrium_lines(&report, None),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub level: u32,
    pub lift_energy: f64,
    pub km_energy: f64,
    pub gap: f64,
    pub max_deviation: f64,
    pub hessian_min_eig: Option<f64>,
    pub residual: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_gap: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    fractal: FractalKind,
    degree: String,
    rows: Vec<VerifyRow>,
    fitted_exponent: Option<f64>,
    reference_exponent: Option<f64>,
    relative_deviation: Option<f64>,
}

/// `J_n - E_n` of the `q`-twisted ring state.
fn ring_gap(q: i64, n: u32) -> f64 {
    let size = (1u64 << n) as f64;
    let s = (PI * q as f64 / size).sin();
    size * size * 2.0 * s * s / (4.0 * PI * PI) - (q * q) as f64 / 2.0
}

/// Least-squares slope of `ln y` against `x` over the positive samples.
pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (*x, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Runs `job` on every item across the available cores and returns results in input order.
fn fan_out<T: Sync, R: Send>(items: &[T], job: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len().max(1));
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let job = &job;
                s.spawn(move || {
                    items
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .map(|(i, it)| (i, job(it)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}

pub fn verify(cfg: &RunConfig) -> Result<Done, CliError> {
    let kind = cfg.fractal();
    let omega = cfg.degree()?;
    let levels = cfg.levels()?;
    let results = fan_out(&levels, |&n| -> Result<VerifyRow, CliError> {
        let run = twist_run(kind, &omega, n, cfg)?;
        let e = network_energy(&run.hm.domain, &run.hm.lift.values);
        let j = km_energy_value(run.hm.domain.base(), &run.report.lift);
        let closed_form_gap = match kind {
            FractalKind::Ring => Some(ring_gap(omega.entries().values().next().copied().unwrap_or(0), n)),
            FractalKind::Sg => None,
        };
        Ok(VerifyRow {
            level: n,
            lift_energy: e,
            km_energy: j,
            gap: (j - e).abs(),
            max_deviation: run.deviation,
            hessian_min_eig: run.report.hessian_min_eig,
            residual: run.report.residual,
            converged: run.report.converged,
            closed_form_gap,
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.level as f64).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let fitted = fit_exponent(&xs, &gaps);
    let reference = match kind {
        FractalKind::Sg => Some(0.6f64.ln()),
        FractalKind::Ring => None,
    };
    let relative = fitted.zip(reference).map(|(f, r)| ((f - r) / r).abs());
    let report = VerifyReport {
        fractal: kind,
        degree: omega.to_string(),
        rows: rows.clone(),
        fitted_exponent: fitted,
        reference_exponent: reference,
        relative_deviation: relative,
    };
    let mut csv = String::from("level,lift_energy,km_energy,gap,max_deviation,hessian_min_eig,residual,converged\n");
    let mut summary = vec![format!(
        "{:>5} {:>24} {:>24} {:>24} {:>24} {:>24}",
        "n", "E_n(lift)", "J_n(u^n)", "|J_n-E_n|", "d_n", "hessian min eig"
    )];
    for r in &rows {
        let eig = r.hessian_min_eig.map_or("nan".into(), fmt_num);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.level,
            fmt_num(r.lift_energy),
            fmt_num(r.km_energy),
            fmt_num(r.gap),
            fmt_num(r.max_deviation),
            eig,
            fmt_num(r.residual),
            r.converged
        ));
        summary.push(format!(
            "{:>5} {:>24} {:>24} {:>24} {:>24} {:>24}",
            r.level,
            fmt_num(r.lift_energy),
            fmt_num(r.km_energy),
            fmt_num(r.gap),
            fmt_num(r.max_deviation),
            eig
        ));
    }
    summary.push(match (fitted, reference) {
        (Some(f), Some(r)) => format!(
            "fitted gap exponent {f:.6} per level, reference log(3/5) = {r:.6}, relative deviation {:.1}%",
            100.0 * ((f - r) / r).abs()
        ),
        (Some(f), None) => format!("fitted gap exponent {f:.6} per level"),
        (None, _) => "fitted gap exponent undefined (gaps vanish)".into(),
    });
    if let Some(worst) = rows
        .iter()
        .filter_map(|r| r.closed_form_gap.map(|c| (r.km_energy - r.lift_energy - c).abs()))
        .reduce(f64::max)
    {
        summary.push(format!("max deviation from closed-form gap {worst:e}"));
    }
    let mut out = OutDir::create(&cfg.out())?;
    out.write_json("verify.json", &report)?;
    out.write("verify.csv", &csv)?;
    Ok(Done { out, summary })
}

#[derive(Serialize)]
struct SweepRow {
    degree: String,
    level: u32,
    converged: bool,
    residual: f64,
    energy: f64,
    stability: Option<Stability>,
    degree_found: Option<String>,
    max_deviation: f64,
    error: Option<String>,
}

pub fn sweep(cfg: &RunConfig) -> Result<Done, CliError> {
    let kind = cfg.fractal();
    let levels = cfg.levels()?;
    let degrees: Vec<String> = cfg
        .degrees
        .as_deref()
        .or(cfg.degree.as_deref())
        .ok_or_else(|| CliError::Usage("--degrees is required".into()))?
        .split(';')
        .map(|s| s.trim().to_string())
        .collect();
    let omegas = degrees
        .iter()
        .map(|d| DegreeVector::parse(kind, d))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, u32)> = (0..omegas.len())
        .flat_map(|i| levels.iter().map(move |&n| (i, n)))
        .collect();
    let rows = fan_out(&jobs, |&(i, n)| {
        let omega = &omegas[i];
        match twist_run(kind, omega, n, cfg) {
            Ok(run) => SweepRow {
                degree: omega.to_string(),
                level: n,
                converged: run.report.converged,
                residual: run.report.residual,
                energy: run.report.energy,
                stability: run.report.stability,
                degree_found: run.report.degree.as_ref().map(|d| d.to_string()),
                max_deviation: run.deviation,
                error: None,
            },
            Err(e) => SweepRow {
                degree: omega.to_string(),
                level: n,
                converged: false,
                residual: f64::NAN,
                energy: f64::NAN,
                stability: None,
                degree_found: None,
                max_deviation: f64::NAN,
                error: Some(e.line()),
            },
        }
    });
    let mut csv = String::from("degree,level,converged,residual,energy,stability,degree_found,max_deviation,error\n");
    let mut summary = Vec::new();
    for r in &rows {
        let stability = r.stability.map_or(String::new(), |s| format!("{s:?}").to_lowercase());
        csv.push_str(&format!(
            "\"{}\",{},{},{},{},{},\"{}\",{},\"{}\"\n",
            r.degree,
            r.level,
            r.converged,
            fmt_num(r.residual),
            fmt_num(r.energy),
            stability,
            r.degree_found.clone().unwrap_or_default(),
            fmt_num(r.max_deviation),
            r.error.clone().unwrap_or_default()
        ));
        summary.push(format!(
            "{} n={}: {} {} degree {}",
            r.degree,
            r.level,
            if r.converged { "converged" } else { "not converged" },
            stability,
            r.degree_found.clone().unwrap_or_else(|| "-".into())
        ));
    }
    let mut out = OutDir::create(&cfg.out())?;
    out.write_json("sweep.json", &rows)?;
    out.write("sweep.csv", &csv)?;
    Ok(Done { out, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_fit() {
        let xs = [1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (0.6f64).powf(*x)).collect();
        assert!((fit_exponent(&xs, &ys).unwrap() - 0.6f64.ln()).abs() < 1e-12);
        assert!(fit_exponent(&xs, &[0.0; 3]).is_none());
    }

    #[test]
    fn fan_out_keeps_order() {
        let v: Vec<u32> = (0..17).collect();
        assert_eq!(fan_out(&v, |x| x * 2), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn ring_gap_small_for_fine_levels() {
        assert!(ring_gap(1, 10).abs() < 1e-5);
        assert_eq!(ring_gap(0, 4), 0.0);
    }
}
