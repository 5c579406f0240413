//! Built-in property battery behind `mfgsl validate`: quick structural
//! checks of the interpolation, the transport step, the metric and one
//! coarse coupled solve. Meant as a smoke test of an installed binary, not
//! a replacement for the test suites.

use mfgsl_core::fokker_planck::DensityField;
use mfgsl_core::*;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

// splitmix-style generator, good enough for smoke checks
struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn run_battery(seed: u64) -> Vec<Check> {
    let mut rng = Lcg(seed.wrapping_mul(2654435761).wrapping_add(1));
    let mut checks = Vec::new();

    // hat weights: partition of unity and affine reproduction
    let grid = Grid::from_counts(-1.0, 2.0, 48, 12, 1.2).unwrap();
    let mut worst_unity = 0.0f64;
    let mut worst_affine = 0.0f64;
    let affine: Vec<f64> = grid.nodes().iter().map(|&x| 1.7 * x - 0.3).collect();
    for _ in 0..10_000 {
        let x = -1.2 + 3.4 * rng.next_f64();
        let w = grid.barycentric_weights(x).unwrap();
        worst_unity = worst_unity.max((w.w_left + w.w_right - 1.0).abs());
        let inside = x.clamp(grid.x_min(), grid.x_max());
        let got = grid.interpolate(&affine, inside).unwrap();
        worst_affine = worst_affine.max((got - (1.7 * inside - 0.3)).abs());
    }
    checks.push(check(
        "interpolation",
        worst_unity <= 1e-15 && worst_affine <= 1e-13,
        format!("unity {worst_unity:.2e}, affine {worst_affine:.2e}"),
    ));

    // conservative transport against random drifts
    let mut worst_mass = 0.0f64;
    let mut nonneg = true;
    for _ in 0..50 {
        let n = grid.num_nodes();
        let mut m: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let total: f64 = m.iter().sum();
        m.iter_mut().for_each(|w| *w /= total);
        let drift: Vec<f64> = (0..n)
            .map(|i| 3.0 * (5.0 * grid.node(i) + rng.next_f64()).sin())
            .collect();
        let slice = flows(&drift, 0.4 * rng.next_f64(), &grid).unwrap();
        let out = push_forward(&m, &slice, &grid).unwrap();
        worst_mass = worst_mass.max((out.iter().sum::<f64>() - 1.0).abs());
        nonneg &= out.iter().all(|&w| w >= 0.0);
    }
    checks.push(check(
        "transport",
        worst_mass <= 1e-12 && nonneg,
        format!("mass deviation {worst_mass:.2e}, nonnegative {nonneg}"),
    ));

    // metric axioms on random pairs
    let mut sym = true;
    let mut tri = true;
    for _ in 0..40 {
        let n = grid.num_nodes();
        let draw = |rng: &mut Lcg| -> Vec<f64> {
            let mut w: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            w
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let c = draw(&mut rng);
        let dab = wasserstein1_1d(&a, &b, &grid).unwrap();
        sym &= dab == wasserstein1_1d(&b, &a, &grid).unwrap();
        tri &= dab
            <= wasserstein1_1d(&a, &c, &grid).unwrap()
                + wasserstein1_1d(&c, &b, &grid).unwrap()
                + 1e-12;
    }
    checks.push(check(
        "transport metric",
        sym && tri,
        format!("symmetry {sym}, triangle {tri}"),
    ));

    // value sweep axioms on a small instance
    let vgrid = Grid::from_counts(0.0, 1.0, 24, 12, 1.0).unwrap();
    let cfg = MinimizerConfig::for_terminal_lipschitz(1.5);
    let mut monotone = true;
    let mut worst_shift = 0.0f64;
    for _ in 0..100 {
        let n = vgrid.num_nodes();
        let f: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let g: Vec<f64> = f.iter().map(|v| v + rng.next_f64()).collect();
        let i = (rng.next_f64() * n as f64) as usize % n;
        let sigma = 0.5 * rng.next_f64();
        let c = 4.0 * rng.next_f64() - 2.0;
        let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
        let (vf, _) = s_hat(&vgrid, &f, i, 0.0, sigma, &cfg).unwrap();
        let (vg, _) = s_hat(&vgrid, &g, i, 0.0, sigma, &cfg).unwrap();
        let (vs, _) = s_hat(&vgrid, &shifted, i, 0.0, sigma, &cfg).unwrap();
        monotone &= vf <= vg;
        worst_shift = worst_shift.max((vs - (vf + c)).abs());
    }
    checks.push(check(
        "value operator",
        monotone && worst_shift <= 1e-12,
        format!("monotone {monotone}, shift {worst_shift:.2e}"),
    ));

    // one coarse coupled solve keeps the probability structure
    let problem = test_problem(2).unwrap();
    let grid = problem.grid_with(1.0 / 40.0, 1.0 / 40.0).unwrap();
    let fp = FixedPointConfig {
        tau: 1e-3,
        max_iters: 10,
        damping: 0.0,
    };
    let sol = solve(
        &problem,
        &grid,
        default_epsilon(grid.h()),
        &fp,
        &MinimizerConfig::default(),
    )
    .unwrap();
    checks.push(check(
        "coupled solve",
        sol.converged && sol.m.max_mass_deviation() <= 1e-12,
        format!(
            "converged {} in {} iterations, mass deviation {:.2e}",
            sol.converged,
            sol.iterations,
            sol.m.max_mass_deviation()
        ),
    ));

    // chain sampler agrees with the transport sweep on a small instance
    let m0 = initial_density(problem.initial_density.as_ref(), &grid).unwrap();
    let mu = DensityField::constant_in_time(&m0, &grid);
    let v = solve_backward(&problem, &mu, &grid, &MinimizerConfig::default()).unwrap();
    let smoother = build_kernel(default_epsilon(grid.h()), &grid).unwrap();
    let drift = drift_field(&v, &smoother, &grid);
    let sigma = problem.sigma_samples(&grid);
    let (pushed, _) = solve_forward(&m0, &drift, &sigma, &grid).unwrap();
    let empirical = simulate_scheme(&m0, &drift, &sigma, &grid, 200_000, seed).unwrap();
    let mut worst_d1 = 0.0f64;
    for k in 0..=grid.num_steps() {
        let d = wasserstein1_1d(empirical.slice(k), pushed.slice(k), &grid).unwrap();
        worst_d1 = worst_d1.max(d);
    }
    checks.push(check(
        "chain sampler",
        worst_d1 <= 5e-3,
        format!("max d1 {worst_d1:.2e} over {} slices", grid.num_steps() + 1),
    ));

    checks
}
