use nama::real_ma::{
    ma_measure, ma_measure_oracle, slope_jumps_1d, solve, ConvexPL, Domain, SolverOptions, TargetMeasure,
};
use nama::scalar::{int, Rational};
use proptest::prelude::*;

fn grid(n: usize) -> Vec<Vec<f64>> {
    let h = 1.0 / (n - 1) as f64;
    (0..n).flat_map(|i| (0..n).map(move |j| vec![i as f64 * h, j as f64 * h])).collect()
}

#[test]
fn quadratic_in_one_dimension_for_many_node_counts() {
    let d = Domain::interval(0.0, 1.0).unwrap();
    for count in [10usize, 100, 1000] {
        let nodes: Vec<Vec<f64>> = (0..=count).map(|i| vec![i as f64 / count as f64]).collect();
        let t = TargetMeasure::from_density(&d, &nodes, 2.0).unwrap();
        let sol = solve(&d, &nodes, &t, &vec![0.0; nodes.len()], &SolverOptions::default()).unwrap();
        let worst = nodes
            .iter()
            .zip(sol.function.values())
            .map(|(x, v)| (v - (x[0] * x[0] - x[0])).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "N = {count}: {worst:e}");
    }
}

fn square_error(n: usize) -> (f64, f64) {
    let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let nodes = grid(n);
    let half = |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]);
    let bv: Vec<f64> = nodes.iter().map(|x| half(x)).collect();
    let t = TargetMeasure::uniform(&d, &nodes, 1.0).unwrap();
    let sol = solve(&d, &nodes, &t, &bv, &SolverOptions::default()).unwrap();
    let mean = t.total() / ((n - 2) * (n - 2)) as f64;
    let residual = sol
        .masses
        .iter()
        .zip(&t.masses)
        .enumerate()
        .filter(|(k, _)| !sol.function.is_boundary(*k))
        .map(|(_, (m, w))| (m - w).abs())
        .fold(0.0, f64::max)
        / mean;
    let dist = nodes
        .iter()
        .zip(sol.function.values())
        .map(|(x, v)| (v - half(x)).abs())
        .fold(0.0, f64::max);
    (residual, dist)
}

#[test]
fn square_refinement() {
    let (r9, e9) = square_error(9);
    let (r17, e17) = square_error(17);
    assert!(r9 <= 1e-8 && r17 <= 1e-8, "{r9:e} {r17:e}");
    assert!(e9 / e17 >= 1.7, "{e9} {e17}");
}

#[test]
fn three_dimensional_cells() {
    let d = Domain::cuboid(&[-1.0; 3], &[1.0; 3]).unwrap();
    let mut nodes = Vec::new();
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                nodes.push(vec![i as f64, j as f64, k as f64]);
            }
        }
    }
    let values: Vec<f64> = nodes.iter().map(|x| x.iter().map(|v| v.abs()).sum()).collect();
    let pl = ConvexPL::new(d, nodes, values).unwrap();
    let mu = ma_measure(&pl);
    // |x|_1 has the cube [-1,1]^3 as subdifferential at the origin.
    assert!((mu.masses[13] - 8.0).abs() < 1e-12);
    assert!((mu.total() - 8.0).abs() < 1e-12);
}

fn random_convex(seed: &[f64], interior: usize) -> ConvexPL<f64> {
    let d = Domain::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let mut nodes = vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![1.0, 1.0], vec![-1.0, 1.0]];
    for k in 0..interior {
        nodes.push(vec![seed[2 * k] * 0.95, seed[2 * k + 1] * 0.95]);
    }
    let (a, b, c) = (1.0 + seed[40].abs(), 0.3 * seed[41], 1.0 + seed[42].abs());
    let values = nodes
        .iter()
        .map(|x| {
            let q = 0.5 * (a * x[0] * x[0] + 2.0 * b * x[0] * x[1] + c * x[1] * x[1]);
            q + (x[0] - 0.3 * seed[43]).max(0.5 * x[1]).max(0.0)
        })
        .collect();
    ConvexPL::new(d, nodes, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn oracle_agrees_with_exact_cells(seed in prop::collection::vec(-1.0f64..1.0, 44), interior in 1usize..=12) {
        let pl = random_convex(&seed, interior);
        let exact = ma_measure(&pl);
        let oracle = ma_measure_oracle(&pl, 600).unwrap();
        for (a, b) in exact.masses.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 2e-2, "{a} vs {b}");
        }
    }

    #[test]
    fn total_mass_is_the_boundary_slope_gap(values in prop::collection::vec(-20i64..20, 3..12)) {
        // Convexify by cumulative sums of increasing slopes.
        let mut slopes = values.clone();
        slopes.sort();
        let count = slopes.len();
        let x: Vec<Rational> = (0..=count).map(|i| Rational::new((i as i64).into(), (count as i64).into())).collect();
        let mut v = vec![int(0)];
        for (k, s) in slopes.iter().enumerate() {
            let step = (&x[k + 1] - &x[k]) * int(*s);
            let next = v[k].clone() + step;
            v.push(next);
        }
        let d = Domain::interval(int(0), int(1)).unwrap();
        let pl = ConvexPL::new(d, x.iter().map(|t| vec![t.clone()]).collect(), v.clone()).unwrap();
        let mu = ma_measure(&pl);
        prop_assert_eq!(mu.total(), int(slopes[count - 1] - slopes[0]));
        let jumps = slope_jumps_1d(&x, &v);
        prop_assert_eq!(&mu.masses[1..count], &jumps[..]);
    }

    #[test]
    fn comparison_principle(extra in prop::collection::vec(0.0f64..0.5, 9), base in 0.2f64..1.0) {
        let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let nodes = grid(5);
        let bv: Vec<f64> = nodes.iter().map(|x| x[0] * x[0] + 0.5 * x[1]).collect();
        let interior: Vec<usize> = (0..nodes.len()).filter(|&k| !d.on_boundary(&nodes[k])).collect();
        let mut small = vec![0.0; nodes.len()];
        let mut large = vec![0.0; nodes.len()];
        for (s, &k) in interior.iter().enumerate() {
            small[k] = base / 16.0;
            large[k] = (base + extra[s]) / 16.0;
        }
        let opts = SolverOptions::default();
        let u = solve(&d, &nodes, &TargetMeasure::from_masses(large), &bv, &opts).unwrap();
        let w = solve(&d, &nodes, &TargetMeasure::from_masses(small), &bv, &opts).unwrap();
        for (a, b) in u.function.values().iter().zip(w.function.values()) {
            prop_assert!(*a <= b + 1e-10);
        }
    }

    #[test]
    fn affine_equivariance(a0 in -2.0f64..2.0, a1 in -2.0f64..2.0, a2 in -2.0f64..2.0) {
        let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let nodes = grid(5);
        let bv: Vec<f64> = nodes.iter().map(|x| 0.5 * (x[0] * x[0] + x[1] * x[1])).collect();
        let ell = |x: &[f64]| a0 + a1 * x[0] + a2 * x[1];
        let shifted: Vec<f64> = nodes.iter().zip(&bv).map(|(x, v)| v + ell(x)).collect();
        let t = TargetMeasure::uniform(&d, &nodes, 1.0).unwrap();
        let opts = SolverOptions::default();
        let u = solve(&d, &nodes, &t, &bv, &opts).unwrap();
        let w = solve(&d, &nodes, &t, &shifted, &opts).unwrap();
        for ((x, a), b) in nodes.iter().zip(u.function.values()).zip(w.function.values()) {
            prop_assert!((a + ell(x) - b).abs() < 1e-9);
        }
    }
}
