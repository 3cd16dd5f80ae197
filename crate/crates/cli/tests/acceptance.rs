//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use nama::comparison::{gradient_matching_residual, vilsmeier_check_1d, wall_pairing, Quadratic, TransitionMap};
use nama::geometry::{
    calabi_ode_residual, fiber_lagrangian_residual, fiber_phase_residual, semiflat_form, volume_identity_check,
    CalabiPotential, FiberFrame,
};
use nama::hybrid_mc::{pushforward_distance, sample_cy_measure, volume_growth_exponent, LocalModel, Polynomial};
use nama::na_potential::{dj_class, na_ma_model_metric, rational_curve_chain, IntersectionTable};
use nama::real_ma::{ma_measure, ma_measure_oracle, solve, ConvexPL, Domain, SolverOptions, TargetMeasure};
use nama::scalar::{int, ratio, Rational};
use nama::skeleton::SncModel;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Cycle {
    d: Vec<i64>,
    c: Vec<i64>,
}

fn random_cycles() -> Vec<Cycle> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..20)
        .map(|_| {
            let len = rng.gen_range(3..=50);
            Cycle {
                d: (0..len).map(|_| rng.gen_range(-6..=6)).collect(),
                c: (0..len).map(|_| rng.gen_range(-20..=20)).collect(),
            }
        })
        .collect()
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn mass_conservation() -> Outcome {
    let start = Instant::now();
    let mut worst = String::new();
    for cy in random_cycles() {
        let len = cy.d.len();
        let l_total: i64 = cy.d.iter().sum();
        let model = SncModel::cycle(len).map_err(|e| e.to_string())?;
        let table = IntersectionTable::cycle(&ints(&cy.d));
        let mu = na_ma_model_metric(&model, &table, &ints(&cy.c)).map_err(|e| e.to_string())?;
        let total: Rational = mu.masses().iter().sum();
        // On a cycle of (-2)-curves the twist acts by the discrete Laplacian.
        for (i, m) in mu.masses().iter().enumerate() {
            let expected = cy.d[i] + cy.c[(i + len - 1) % len] - 2 * cy.c[i] + cy.c[(i + 1) % len];
            if *m != int(expected) {
                worst = format!("N = {len}: mass {m} at {i}, expected {expected}");
            }
        }
        if total != int(l_total) {
            return Err(format!("N = {len}: total {total} != (L) = {l_total}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if !worst.is_empty() {
        return Err(worst);
    }
    ensure(secs < 1.0, format!("20 cycles, totals exact, {secs:.3} s (budget 1 s)"))
}

fn vilsmeier() -> Outcome {
    let mut negative = 0;
    for cy in random_cycles() {
        let l_total: i64 = cy.d.iter().sum();
        let r = vilsmeier_check_1d(&ints(&cy.d), &ints(&cy.c), &int(l_total)).map_err(|e| e.to_string())?;
        if !r.holds() {
            return Err(format!("N = {}: discrepancy {}", cy.d.len(), r.max_discrepancy));
        }
        negative += r.negative.len();
    }
    Ok(format!("20 cycles, residual exactly 0 ({negative} negative masses among them)"))
}

fn random_convex_pl(rng: &mut ChaCha8Rng) -> ConvexPL<f64> {
    let domain = Domain::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let mut nodes = vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![1.0, 1.0], vec![-1.0, 1.0]];
    let on_boundary = rng.gen_range(0..=6);
    for _ in 0..on_boundary {
        let t = rng.gen_range(-0.9..0.9);
        nodes.push(match rng.gen_range(0..4) {
            0 => vec![t, -1.0],
            1 => vec![1.0, t],
            2 => vec![t, 1.0],
            _ => vec![-1.0, t],
        });
    }
    let interior = rng.gen_range(1..=25 - nodes.len());
    for _ in 0..interior {
        nodes.push(vec![rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95)]);
    }
    let planes: Vec<[f64; 3]> =
        (0..rng.gen_range(1..=4)).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5)]).collect();
    let (a, b, c) = (rng.gen_range(0.2..2.0), rng.gen_range(-0.1..0.1), rng.gen_range(0.2..2.0));
    let values = nodes
        .iter()
        .map(|x| {
            let q = 0.5 * (a * x[0] * x[0] + 2.0 * b * x[0] * x[1] + c * x[1] * x[1]);
            q + planes.iter().map(|p| p[0] * x[0] + p[1] * x[1] + p[2]).fold(0.0, f64::max)
        })
        .collect();
    ConvexPL::new(domain, nodes, values).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let pl = random_convex_pl(&mut rng);
        let exact = ma_measure(&pl);
        let raster = ma_measure_oracle(&pl, 2000).ok_or("oracle unavailable")?;
        for (a, b) in exact.masses.iter().zip(&raster) {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= 5e-3 && secs < 60.0,
        format!("50 functions, max per-node difference {worst:.3e} (tol 5e-3), {secs:.2} s (budget 60 s)"),
    )
}

fn solver_1d() -> Outcome {
    let domain = Domain::interval(0.0, 1.0).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for count in [10usize, 100, 1000] {
        let nodes: Vec<Vec<f64>> = (0..=count).map(|i| vec![i as f64 / count as f64]).collect();
        let target = TargetMeasure::from_density(&domain, &nodes, 2.0).map_err(|e| e.to_string())?;
        let sol = solve(&domain, &nodes, &target, &vec![0.0; nodes.len()], &SolverOptions::default())
            .map_err(|e| e.to_string())?;
        let err = nodes
            .iter()
            .zip(sol.function.values())
            .map(|(x, v)| (v - (x[0] * x[0] - x[0])).abs())
            .fold(0.0, f64::max);
        ok &= err <= 1e-12;
        parts.push(format!("N = {count}: {err:.1e}"));
    }
    ensure(ok, format!("max |u - (x^2 - x)|: {} (tol 1e-12)", parts.join(", ")))
}

fn square(n: usize) -> Result<(f64, f64), String> {
    let domain = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).map_err(|e| e.to_string())?;
    let h = 1.0 / (n - 1) as f64;
    let nodes: Vec<Vec<f64>> = (0..n).flat_map(|i| (0..n).map(move |j| vec![i as f64 * h, j as f64 * h])).collect();
    let half = |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]);
    let boundary: Vec<f64> = nodes.iter().map(|x| half(x)).collect();
    let target = TargetMeasure::uniform(&domain, &nodes, 1.0).map_err(|e| e.to_string())?;
    let sol = solve(&domain, &nodes, &target, &boundary, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let interior: Vec<usize> = (0..nodes.len()).filter(|&k| !domain.on_boundary(&nodes[k])).collect();
    let achieved = ma_measure(&sol.function);
    let residual = interior.iter().map(|&k| (achieved.masses[k] - target.masses[k]).abs()).fold(0.0, f64::max);
    let dist = interior.iter().map(|&k| (sol.function.values()[k] - half(&nodes[k])).abs()).fold(0.0, f64::max);
    Ok((residual, dist))
}

fn solver_2d() -> Outcome {
    let (r9, e9) = square(9)?;
    let (r17, e17) = square(17)?;
    let ratio = e9 / e17;
    ensure(
        r9 <= 1e-8 && r17 <= 1e-8 && ratio >= 1.7,
        format!("residuals {r9:.1e}, {r17:.1e} (tol 1e-8); sup distance {e9:.3e} -> {e17:.3e}, ratio {ratio:.2} (min 1.7)"),
    )
}

fn pushforward() -> Outcome {
    let t0 = Instant::now();
    let flat = LocalModel::with_log_scale(vec![1, 1], Polynomial::one(), 0, 20.0).map_err(|e| e.to_string())?;
    let d1 = pushforward_distance(&sample_cy_measure(&flat, 1_000_000, 42), 2);
    let s1 = t0.elapsed().as_secs_f64();

    let u: Polynomial = "1 + z0".parse().map_err(|e| format!("{e:?}"))?;
    let run = |l: f64| -> Result<(f64, f64), String> {
        let t = Instant::now();
        let m = LocalModel::with_log_scale(vec![1, 1, 1], u.clone(), 0, l).map_err(|e| e.to_string())?;
        let d = pushforward_distance(&sample_cy_measure(&m, 4_000_000, 7), 2).statistic;
        Ok((d, t.elapsed().as_secs_f64()))
    };
    let (near, s2) = run(20.0)?;
    let (far, s3) = run(40.0)?;
    let slowest = s1.max(s2).max(s3);
    ensure(
        d1.statistic <= 3.0 * d1.standard_error && far <= 0.6 * near && slowest < 30.0,
        format!(
            "n = 1: KS {:.2e} vs 3 se {:.2e}; n = 2: {near:.3e} at e^-20, {far:.3e} at e^-40, ratio {:.3} (max 0.6); slowest run {slowest:.1} s",
            d1.statistic,
            3.0 * d1.standard_error,
            far / near
        ),
    )
}

fn growth() -> Outcome {
    let scales = [20.0, 40.0, 80.0];
    let models: Vec<LocalModel> = scales
        .iter()
        .map(|&l| LocalModel::with_log_scale(vec![1, 1, 1], Polynomial::one(), 0, l))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let fit = volume_growth_exponent(&models, 100_000, 5).map_err(|e| e.to_string())?;
    let n = 2;
    let mut worst_sigma = 0.0f64;
    for p in &fit.points {
        let exact = 2f64.powi(n) * std::f64::consts::TAU.powi(n) * p.log_scale.powi(n) / 2.0;
        let gap = (p.integral.value - exact).abs();
        // Constant weights have zero sampling error; allow rounding only.
        if gap > 3.0 * p.integral.standard_error + 1e-12 * exact {
            return Err(format!("L = {}: integral {} vs exact {exact}", p.log_scale, p.integral.value));
        }
        if p.integral.standard_error > 0.0 {
            worst_sigma = worst_sigma.max(gap / p.integral.standard_error);
        }
    }
    ensure(
        (fit.exponent - 2.0).abs() <= 0.1,
        format!("fitted exponent {:.4} (2 +- 0.1); integrals match 2^n (2 pi)^n L^n / n! (worst {worst_sigma:.2} se)", fit.exponent),
    )
}

fn slag() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut lag, mut phase) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-3.0..3.0));
        let h = &a + a.transpose();
        let scale = rng.gen_range(1.0..100.0);
        let base: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..0.0)).collect();
        let form = semiflat_form(&h, scale).map_err(|e| e.to_string())?;
        let frame = FiberFrame::torus(base);
        lag = lag.max(fiber_lagrangian_residual(&form, &frame).map_err(|e| e.to_string())?);
        phase = phase.max(fiber_phase_residual(n, &frame).map_err(|e| e.to_string())?.residual);
    }
    ensure(lag <= 1e-12 && phase <= 1e-12, format!("100 Hessians, lagrangian {lag:.1e}, phase {phase:.1e} (tol 1e-12)"))
}

fn calabi() -> Outcome {
    let xs: Vec<f64> = (0..=40).map(|k| 10f64.powf(-2.0 + 0.1 * k as f64)).collect();
    let (mut spread, mut offset) = (0.0f64, 0.0f64);
    for n in 1..=6usize {
        let r = calabi_ode_residual(n, &CalabiPotential { n }, &xs).map_err(|e| e.to_string())?;
        let expected = ((n as u128 + 1).pow(n as u32)) as f64 / (n as u128).pow(n as u32 + 1) as f64;
        spread = spread.max(r.residual);
        offset = offset.max((r.constant - expected).abs());
    }
    ensure(
        spread <= 1e-12 && offset <= 1e-12,
        format!("n = 1..6 on [1e-2, 1e2]: spread {spread:.1e}, |c - (n+1)^n / n^(n+1)| {offset:.1e} (tol 1e-12)"),
    )
}

fn gcalabi() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let scales: Vec<f64> = (2..=6).map(|k| 10f64.powi(k)).collect();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(1..n);
        let k = n - m;
        let a = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
        let p = &a * a.transpose() + DMatrix::identity(m, m);
        let c = DMatrix::from_fn(k, k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = &c * c.adjoint() + DMatrix::identity(k, k);
        let b = DMatrix::from_fn(m, k, |_, _| 0.5 * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let r = volume_identity_check(&p, &q, &b, &scales).map_err(|e| e.to_string())?;
        let s = r.slope.ok_or_else(|| format!("m = {m}, n = {n}: error below rounding"))?;
        worst = worst.max((s + 1.0).abs());
    }
    ensure(worst <= 0.05, format!("20 instances, max |slope + 1| {worst:.4} (tol 0.05)"))
}

fn matching() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let n = rng.gen_range(2..=4);
        let d: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(-3..=3)).collect();
        let t = TransitionMap::new(d.clone());

        let mut a = vec![vec![int(0); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = ratio(rng.gen_range(-6..=6), rng.gen_range(1..=5));
                a[i][j] = v.clone();
                a[j][i] = v;
            }
        }
        let b: Vec<Rational> = (0..n).map(|_| ratio(rng.gen_range(-6..=6), rng.gen_range(1..=5))).collect();
        let q = Quadratic { a, b, c: int(0) };
        let qr = q.compose_linear(&t.matrix(), &vec![int(0); n]);
        let points: Vec<Vec<Rational>> = (0..3)
            .map(|_| {
                let mut x = vec![int(0)];
                x.extend((1..n).map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=7))));
                x
            })
            .collect();
        let exact = gradient_matching_residual(|x| q.gradient(x), |y| qr.gradient(y), &t, &points)
            .map_err(|e| e.to_string())?;
        if let Some(r) = exact.iter().find(|r| r.residuals.iter().any(|v| *v != int(0))) {
            return Err(format!("rational residual {:?} at {:?}", r.residuals, r.point));
        }

        let to_f = |q: &Quadratic<Rational>| Quadratic {
            a: q.a.iter().map(|r| r.iter().map(nama::scalar::rational_to_f64).collect()).collect(),
            b: q.b.iter().map(nama::scalar::rational_to_f64).collect(),
            c: 0.0,
        };
        let (qf, qrf) = (to_f(&q), to_f(&qr));
        let fpoints: Vec<Vec<f64>> =
            points.iter().map(|x| x.iter().map(nama::scalar::rational_to_f64).collect()).collect();
        for r in gradient_matching_residual(|x| qf.gradient(x), |y| qrf.gradient(y), &t, &fpoints)
            .map_err(|e| e.to_string())?
        {
            worst = worst.max(r.max_abs());
        }

        // Chain E_1..E_n over the wall curve, closed by d_n = 2 - sum d_i with
        // the gauge g_n = 0; E_0 and E_{n+1} are the two chambers.
        let mut chain = ints(&d);
        chain.push(int(2 - d.iter().sum::<i64>()));
        let (model, table) = rational_curve_chain(&chain).map_err(|e| e.to_string())?;
        for x in &points {
            let gl = q.gradient(x);
            let gr = qr.gradient(&t.apply(x));
            let mut g: BTreeMap<usize, Rational> = (0..n).map(|i| (i, gl[i].clone())).collect();
            g.insert(n, int(0));
            g.insert(n + 1, gr[0].clone());
            let stratum: Vec<usize> = (1..=n).collect();
            let pairing = dj_class(&model, &table, None, &g, &stratum).map_err(|e| e.to_string())?.pairing;
            if pairing != int(0) || wall_pairing(&ints(&d), &gl, &gr[0]) != int(0) {
                return Err(format!("D_J . E_J = {pairing} at {x:?}"));
            }
        }
    }
    ensure(worst <= 1e-12, format!("25 quadratics: rational residuals 0, D_J . E_J = 0; f64 residual {worst:.1e} (tol 1e-12)"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").canonicalize().unwrap()
}

fn run_cli(args: &[String], out: &Path) -> Result<(Option<i32>, BTreeMap<String, Vec<u8>>), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_nama"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--seed")
        .arg("7")
        .output()
        .map_err(|e| e.to_string())?;
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(out).map_err(|e| format!("{args:?}: {e}"))? {
        let entry = entry.map_err(|e| e.to_string())?;
        files.insert(entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path()).map_err(|e| e.to_string())?);
    }
    Ok((status.status.code(), files))
}

fn determinism() -> Outcome {
    let c = configs();
    let p = |f: &str| c.join(f).display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["model".into(), "validate".into(), p("segment.json")],
        vec!["model".into(), "skeleton".into(), p("chain.json")],
        vec!["namma".into(), p("cycle6.json")],
        vec!["realma".into(), "solve".into(), p("unit_square.json")],
        vec!["realma".into(), "solve".into(), p("interval.json"), "--scheme".into(), "lifting".into()],
        vec!["realma".into(), "measure".into(), p("nodes.csv"), "--oracle".into(), "400".into()],
        vec!["compare".into(), "vilsmeier".into(), p("cycle6.json")],
        vec!["compare".into(), "--mode".into(), "mass".into(), p("cycle6.json")],
        vec!["compare".into(), "lowerface".into(), p("lowerface.json")],
        vec!["compare".into(), "pde".into(), p("pde.json")],
        vec!["compare".into(), "matching".into(), p("matching.json")],
        "hybrid pushforward --n 2 --t-exp 20,40 --samples 200000 --uJ 1+z0".split(' ').map(String::from).collect(),
        "hybrid pushforward --n 1 --t-exp 20 --samples 100000".split(' ').map(String::from).collect(),
        "hybrid growth --n 2 --t-exp 20,40,80 --samples 20000".split(' ').map(String::from).collect(),
        vec!["geometry".into(), "slag-check".into(), "--hessian".into(), p("hessian.csv")],
        "geometry calabi --n 3".split(' ').map(String::from).collect(),
        "geometry calabi --n 2 --finite-difference".split(' ').map(String::from).collect(),
        vec![
            "geometry".into(),
            "gcalabi".into(),
            "--m".into(),
            "2".into(),
            "--n".into(),
            "3".into(),
            "--L".into(),
            "1e2,1e3,1e4,1e5,1e6".into(),
            "--p".into(),
            p("gcalabi_p.csv"),
            "--q".into(),
            p("gcalabi_q.csv"),
            "--b".into(),
            p("gcalabi_b.csv"),
        ],
    ];
    let mut bytes = 0;
    for args in &runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (code_a, files_a) = run_cli(args, a.path())?;
        let (code_b, files_b) = run_cli(args, b.path())?;
        if code_a != code_b || files_a != files_b {
            return Err(format!("`nama {}` differs between runs", args.join(" ")));
        }
        if files_a.is_empty() || !files_a.contains_key("manifest.json") {
            return Err(format!("`nama {}` wrote no manifest (exit {code_a:?})", args.join(" ")));
        }
        bytes += files_a.values().map(Vec::len).sum::<usize>();
    }
    Ok(format!("{} commands run twice, {bytes} bytes identical", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("NA mass conservation", mass_conservation),
        ("Vilsmeier identity", vilsmeier),
        ("subgradient oracle equivalence", oracle_equivalence),
        ("real MA solver, 1D exactness", solver_1d),
        ("real MA solver, 2D consistency", solver_2d),
        ("hybrid pushforward", pushforward),
        ("volume growth order", growth),
        ("model SLag identities", slag),
        ("Calabi ansatz", calabi),
        ("generalized Calabi volume identity", gcalabi),
        ("gradient matching", matching),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{secs:.2} s]", k + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
