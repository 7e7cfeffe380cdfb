use std::f64::consts::PI;
use std::time::Instant;

use fractal_kuramoto::covering::{extend_lift, harmonic_map, minimize_constrained, neumann_check, CoveringDomain};
use fractal_kuramoto::dirichlet::{
    dirichlet_energy, harmonic_extend_once, holder_ratio, interior_residual, laplacian, network_energy,
    network_laplacian, normal_derivative, ring_extend, sg_extend, sg_holder_exponent, solve_dirichlet, BoundaryData,
    DirichletMethod,
};
use fractal_kuramoto::field::{circle_distance, RealField};
use fractal_kuramoto::graph::{build_ring_graph, build_sg_graph, FractalKind};
use fractal_kuramoto::kuramoto::{
    half_twisted_state, hessian_stability, integrate_to_equilibrium, km_energy_value, km_rhs, twisted_state,
    FlowConfig, Stability,
};
use fractal_kuramoto::linalg::SolveMethod;
use fractal_kuramoto::pcf::{generic_harmonic_map, generic_km, ring_structure, sg_structure, GenericGraph};
use fractal_kuramoto::winding::{degree, DegreeVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sg(d: &str) -> DegreeVector {
    DegreeVector::parse(FractalKind::Sg, d).unwrap()
}

fn c01() -> Check {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for rho in [1i64, 2, -1, 3] {
        let omega = DegreeVector::from_dense(FractalKind::Sg, &[rho]).map_err(|e| e.to_string())?;
        let dom = CoveringDomain::build(FractalKind::Sg, 1, &omega).map_err(|e| e.to_string())?;
        let f = minimize_constrained(&dom, SolveMethod::Direct).map_err(|e| e.to_string())?;
        let plus = dom.cuts()[0].plus_id;
        // (x, v2, y, v3, z+) in V_1 ids.
        let got = [f.values[3], f.values[1], f.values[5], f.values[2], f.values[plus]];
        for (k, v) in got.iter().enumerate() {
            worst = worst.max((v - (k + 1) as f64 * rho as f64 / 6.0).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(
        worst < 1e-12 && secs < 1.0,
        format!("max error {worst:.2e}, {secs:.3} s"),
    )
}

fn c02() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut rel, mut res) = (0.0f64, 0.0f64);
    for m in 0..=7u32 {
        let g = build_sg_graph(m).map_err(|e| e.to_string())?;
        let fine = build_sg_graph(m + 1).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let phi = BoundaryData::for_graph(&g, &b).map_err(|e| e.to_string())?;
            let f = solve_dirichlet(&g, &phi, DirichletMethod::LinearSolve).map_err(|e| e.to_string())?;
            let ext = RealField::new(m + 1, sg_extend(f.values(), m, m + 1).map_err(|e| e.to_string())?);
            let e0 = dirichlet_energy(&g, &f).map_err(|e| e.to_string())?.energy;
            let e1 = dirichlet_energy(&fine, &ext).map_err(|e| e.to_string())?.energy;
            rel = rel.max((e1 - e0).abs() / e0.abs().max(f64::MIN_POSITIVE));
            res = res.max(interior_residual(&fine, &ext).map_err(|e| e.to_string())?);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(
        rel < 1e-12 && res < 1e-10 && secs < 10.0,
        format!("energy rel {rel:.2e}, residual {res:.2e}, {secs:.2} s"),
    )
}

fn c03() -> Check {
    let got = harmonic_extend_once(1.0, 0.0, 0.0);
    ensure(got == (0.4, 0.2, 0.4), format!("{got:?}"))
}

fn c04() -> Check {
    let mut spread = 0.0f64;
    let mut per_vertex: Vec<Vec<f64>> = vec![Vec::new(); 3];
    for m in 0..=6u32 {
        let g = build_sg_graph(m).map_err(|e| e.to_string())?;
        let phi = BoundaryData::for_graph(&g, &[0.0, 0.0, 1.0]).map_err(|e| e.to_string())?;
        let f = solve_dirichlet(&g, &phi, DirichletMethod::Extension).map_err(|e| e.to_string())?;
        for (k, &v) in g.boundary_ids().iter().enumerate() {
            per_vertex[k].push(normal_derivative(&g, &f, v).map_err(|e| e.to_string())?);
        }
    }
    for d in &per_vertex {
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
    }
    let dom = CoveringDomain::build(FractalKind::Sg, 1, &sg("1")).map_err(|e| e.to_string())?;
    let f = minimize_constrained(&dom, SolveMethod::Direct).map_err(|e| e.to_string())?;
    let mut neumann = 0.0f64;
    for m in 1..=6 {
        let (d, fm) = extend_lift(&dom, &f, m).map_err(|e| e.to_string())?;
        neumann = neumann_check(&d, &fm).iter().fold(neumann, |a, x| a.max(x.abs()));
    }
    ensure(
        spread < 1e-10 && neumann < 1e-9,
        format!("normal derivative spread {spread:.2e}, covering Neumann max {neumann:.2e}"),
    )
}

fn c05() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for n in 3..=5u32 {
        let g = build_sg_graph(n).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let mut u: Vec<f64> = (0..g.len()).map(|_| rng.gen::<f64>()).collect();
            let rhs = km_rhs(&g, &u);
            let mut err = 0.0f64;
            for i in 0..u.len() {
                let x = u[i];
                u[i] = x + h;
                let jp = km_energy_value(&g, &u);
                u[i] = x - h;
                let jm = km_energy_value(&g, &u);
                u[i] = x;
                let fd = -2.0 * PI * (jp - jm) / (2.0 * h);
                err = err.max((rhs[i] - fd).abs());
            }
            let scale = rhs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            worst = worst.max(err / scale);
        }
    }
    ensure(worst < 1e-5, format!("max relative error {worst:.2e} over 300 fields"))
}

fn c06() -> Check {
    let mut max_rhs = 0.0f64;
    let mut checked = 0;
    for n in 2..=10u32 {
        let g = build_ring_graph(n).map_err(|e| e.to_string())?;
        let size = 1i64 << n;
        let quarter = size / 4;
        for q in -quarter..=quarter {
            let u = twisted_state(n, q);
            max_rhs = km_rhs(&g, u.values()).iter().fold(max_rhs, |a, x| a.max(x.abs()));
        }
        let qs: Vec<i64> = if n <= 6 {
            (-size / 2..=size / 2).collect()
        } else {
            let mut v = vec![
                0,
                1,
                -1,
                quarter - 1,
                quarter,
                quarter + 1,
                -quarter,
                -quarter - 1,
                size / 2,
            ];
            v.sort();
            v.dedup();
            v
        };
        for q in qs {
            let u = twisted_state(n, q);
            let (lam, s) = hessian_stability(&g, u.values(), 0).map_err(|e| e.to_string())?;
            let want = match (q.abs() * 4).cmp(&size) {
                std::cmp::Ordering::Less => Stability::Stable,
                std::cmp::Ordering::Equal => Stability::Degenerate,
                std::cmp::Ordering::Greater => Stability::Saddle,
            };
            if s != want {
                return Err(format!(
                    "n={n} q={q}: verdict {s:?} (min eig {lam:e}), expected {want:?}"
                ));
            }
            checked += 1;
        }
    }
    for n in 3..=6u32 {
        let g = build_ring_graph(n).map_err(|e| e.to_string())?;
        let u = half_twisted_state(n, 0.5);
        let (lam, s) = hessian_stability(&g, u.values(), 0).map_err(|e| e.to_string())?;
        if s != Stability::Saddle {
            return Err(format!("half-twisted n={n}: {s:?} (min eig {lam:e})"));
        }
    }
    ensure(
        max_rhs < 1e-13,
        format!("twisted max |rhs| {max_rhs:.2e}, {checked} Hessian verdicts, half-twisted saddles n=3..6"),
    )
}

fn gap_run(d: &str, levels: std::ops::RangeInclusive<u32>) -> Check {
    let omega = sg(d);
    let order = omega.max_order().unwrap();
    let mut ds = Vec::new();
    for n in levels.clone() {
        let hm = harmonic_map(FractalKind::Sg, &omega, n).map_err(|e| e.to_string())?;
        let g = hm.domain.base();
        let rep = integrate_to_equilibrium(g, &hm.phases, &FlowConfig::default(), order).map_err(|e| e.to_string())?;
        if !rep.converged || rep.residual >= 1e-10 {
            return Err(format!("{d} n={n}: residual {:.2e}", rep.residual));
        }
        if rep.stability != Some(Stability::Stable) {
            return Err(format!("{d} n={n}: stability {:?}", rep.stability));
        }
        if rep.degree.as_ref() != Some(&omega) {
            return Err(format!("{d} n={n}: degree {:?}", rep.degree.map(|x| x.to_string())));
        }
        let dn = rep
            .field
            .values()
            .iter()
            .zip(hm.phases.values())
            .fold(0.0f64, |a, (x, y)| a.max(circle_distance(*x, *y)));
        ds.push(dn);
    }
    let monotone = ds.windows(2).all(|w| w[1] <= w[0]);
    let halved = ds[ds.len() - 1] < ds[0] / 2.0;
    let list: Vec<String> = ds.iter().map(|x| format!("{x:.2e}")).collect();
    ensure(monotone && halved, format!("({d}) d_n [{}]", list.join(", ")))
}

fn c07() -> Check {
    let t = Instant::now();
    let a = gap_run("1", 3..=7)?;
    let b = gap_run("1,1,1,1", 4..=7)?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 300.0, format!("{a}; {b}; {secs:.1} s"))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn c08() -> Check {
    let omega = sg("1");
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for n in 3..=7u32 {
        let hm = harmonic_map(FractalKind::Sg, &omega, n).map_err(|e| e.to_string())?;
        let e = network_energy(&hm.domain, &hm.lift.values);
        let j = km_energy_value(hm.domain.base(), hm.phases.values());
        if j >= e {
            return Err(format!("n={n}: J_n(u*) = {j} is not below E_n = {e}"));
        }
        xs.push(n as f64);
        ys.push((j - e).abs().ln());
    }
    let fitted = slope(&xs, &ys);
    let target = (0.6f64).ln();
    let sg_ok = (fitted - target).abs() <= 0.15 * target.abs();

    let mut ring_err = 0.0f64;
    for n in 3..=10u32 {
        let g = build_ring_graph(n).map_err(|e| e.to_string())?;
        let hm = harmonic_map(
            FractalKind::Ring,
            &DegreeVector::parse(FractalKind::Ring, "1").unwrap(),
            n,
        )
        .map_err(|e| e.to_string())?;
        let gap = km_energy_value(&g, hm.phases.values()) - network_energy(&hm.domain, &hm.lift.values);
        let s = (PI / (1u64 << n) as f64).sin();
        let closed = (1u64 << (2 * n)) as f64 * 2.0 * s * s / (4.0 * PI * PI) - 0.5;
        ring_err = ring_err.max((gap - closed).abs());
    }
    let ring_ok = ring_err < 1e-12;
    ensure(
        sg_ok && ring_ok,
        format!(
            "SG gaps [{}], fitted exponent {fitted:.4} vs log(3/5) = {target:.4} ({}); ring closed-form error {ring_err:.2e} ({})",
            ys.iter().map(|y| format!("{:.3e}", y.exp())).collect::<Vec<_>>().join(", "),
            if sg_ok { "within 15%" } else { "outside 15%" },
            if ring_ok { "ok" } else { "mismatch" }
        ),
    )
}

fn c09() -> Check {
    let mut seen = Vec::new();
    for d in ["1", "2", "-1", "1,0,1,0", "1,1,1,1"] {
        let omega = sg(d);
        let order = omega.max_order().unwrap();
        let hm = harmonic_map(FractalKind::Sg, &omega, order + 3).map_err(|e| e.to_string())?;
        let got = degree(&hm.phases, hm.domain.base(), order).map_err(|e| e.to_string())?;
        if got != omega {
            return Err(format!("{d}: got {got}"));
        }
        seen.push(got.to_string());
    }
    Ok(format!("recovered {}", seen.join(" ")))
}

fn c10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut e_err, mut l_err, mut x_err, mut q_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for case in 0..100 {
        let ring = case % 2 == 1;
        let (s, kind) = if ring {
            (ring_structure(), FractalKind::Ring)
        } else {
            (sg_structure(), FractalKind::Sg)
        };
        let n = if ring {
            rng.gen_range(3..=6)
        } else {
            rng.gen_range(2..=4)
        };
        let direct = if ring { build_ring_graph(n) } else { build_sg_graph(n) }.map_err(|e| e.to_string())?;
        let gen = GenericGraph::build(&s, n, true).map_err(|e| e.to_string())?;
        let perm = gen.permutation_from(&direct).map_err(|e| e.to_string())?;

        let f: Vec<f64> = (0..direct.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut fg = vec![0.0; gen.len()];
        for (i, &k) in perm.iter().enumerate() {
            fg[k] = f[i];
        }
        let es = dirichlet_energy(&direct, &RealField::new(n, f.clone()))
            .map_err(|e| e.to_string())?
            .energy;
        e_err = e_err.max((network_energy(&gen, &fg) - es).abs() / es);
        let ls = laplacian(&direct, &RealField::new(n, f.clone())).map_err(|e| e.to_string())?;
        let lg = network_laplacian(&gen, &fg);
        for (i, &k) in perm.iter().enumerate() {
            l_err = l_err.max((lg[k] - ls.values()[i]).abs());
        }

        let m = n - 1;
        let coarse_direct = if ring { build_ring_graph(m) } else { build_sg_graph(m) }.map_err(|e| e.to_string())?;
        let coarse_gen = GenericGraph::build(&s, m, true).map_err(|e| e.to_string())?;
        let cperm = coarse_gen.permutation_from(&coarse_direct).map_err(|e| e.to_string())?;
        let c: Vec<f64> = (0..coarse_direct.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut cg = vec![0.0; coarse_gen.len()];
        for (i, &k) in cperm.iter().enumerate() {
            cg[k] = c[i];
        }
        let xs = if ring {
            ring_extend(&c, m, n)
        } else {
            sg_extend(&c, m, n).map_err(|e| e.to_string())?
        };
        let xg = gen.extend(&cg, m).map_err(|e| e.to_string())?;
        for (i, &k) in perm.iter().enumerate() {
            x_err = x_err.max((xg[k] - xs[i]).abs());
        }

        let omega = if ring {
            DegreeVector::from_dense(kind, &[rng.gen_range(-1..=1)]).map_err(|e| e.to_string())?
        } else {
            let order = rng.gen_range(0..=1usize);
            let len = if order == 0 { 1 } else { 4 };
            let dense: Vec<i64> = (0..len).map(|_| rng.gen_range(-1..=1)).collect();
            DegreeVector::from_dense(kind, &dense).map_err(|e| e.to_string())?
        };
        let level = omega.max_order().map_or(n.max(2), |o| (o + 2).max(n));
        let hs = harmonic_map(kind, &omega, level).map_err(|e| e.to_string())?;
        let hg = generic_harmonic_map(&s, &omega, level).map_err(|e| e.to_string())?;
        let hperm = hg.graph.permutation_from(hs.domain.base()).map_err(|e| e.to_string())?;
        for (i, &k) in hperm.iter().enumerate() {
            x_err = x_err.max((hg.lift[k] - hs.lift.values[i]).abs());
        }
        let cfg = FlowConfig {
            tol: 1e-13,
            ..FlowConfig::default()
        };
        let order = omega.max_order().unwrap_or(0);
        let rs = integrate_to_equilibrium(hs.domain.base(), &hs.phases, &cfg, order).map_err(|e| e.to_string())?;
        let rg = generic_km(&s, &omega, level, &cfg).map_err(|e| e.to_string())?;
        q_err = q_err.max(rs.field.max_distance(&rg.field));
        if rs.stability != rg.stability || rs.degree != rg.degree {
            return Err(format!("case {case}: verdicts differ"));
        }
    }
    ensure(
        e_err < 1e-10 && l_err < 1e-10 && x_err < 1e-10 && q_err < 1e-10,
        format!("energy {e_err:.1e}, Laplacian {l_err:.1e}, extension {x_err:.1e}, equilibrium {q_err:.1e}"),
    )
}

fn c11() -> Check {
    let beta = sg_holder_exponent();
    let mut worst = 0.0f64;
    for b in [[0.0, 0.0, 1.0], [1.0, -0.5, 0.25], [0.3, 0.9, -0.7]] {
        let mut ratios = Vec::new();
        for n in [4u32, 8] {
            let g = build_sg_graph(n).map_err(|e| e.to_string())?;
            let phi = BoundaryData::for_graph(&g, &b).map_err(|e| e.to_string())?;
            let f = solve_dirichlet(&g, &phi, DirichletMethod::Extension).map_err(|e| e.to_string())?;
            ratios.push(holder_ratio(&g, &f, beta).map_err(|e| e.to_string())?);
        }
        worst = worst.max(ratios[1] / ratios[0]);
    }
    ensure(worst <= 1.05, format!("max ratio(n=8)/ratio(n=4) {worst:.4}"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let checks: [Criterion; 11] = [
        ("c01 level-1 covering minimizer", c01),
        ("c02 harmonic extension exactness", c02),
        ("c03 1/5-2/5 rule", c03),
        ("c04 normal derivatives", c04),
        ("c05 gradient identity", c05),
        ("c06 ring twisted states", c06),
        ("c07 flow to harmonic map", c07),
        ("c08 energy gap decay", c08),
        ("c09 degree round trip", c09),
        ("c10 generic structure agreement", c10),
        ("c11 Hölder ratio", c11),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
