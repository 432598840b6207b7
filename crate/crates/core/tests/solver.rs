use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbsde_core::solver::*;
use rbsde_core::tree::{AdaptedProcess, PathTree};
use rbsde_core::{BarrierSpec, TimeGrid};

fn clamp_terminal(c: f64) -> TerminalSpec {
    TerminalSpec::OfTerminalW { g: TerminalFn::Clamp { lo: -c, hi: c }, scale: 1.0 }
}

fn spec(band: f64, driver: DriverSpec, terminal: TerminalSpec) -> ScenarioSpec {
    ScenarioSpec {
        horizon: 1.0,
        lower: BarrierSpec::Constant(-band),
        upper: BarrierSpec::Constant(band),
        driver,
        terminal,
    }
}

fn resistance() -> ScenarioSpec {
    let kind = DriverKind::Affine { a: 0.0, b_y: 0.025, b_z: 0.025, b_k: -0.05 };
    spec(0.4, DriverSpec::new(kind, 0.05, 0.05).unwrap(), clamp_terminal(0.4))
}

fn random_quad(t: &PathTree, rng: &mut ChaCha8Rng) -> SolutionQuad {
    let mut r = || AdaptedProcess::from_fn(t, |_, _| rng.random_range(-0.5..0.5));
    SolutionQuad { y: r(), z: r(), kl: r(), ku: r() }
}

#[test]
fn remainder_matches_forward_sums() {
    let kind = DriverKind::Affine { a: 0.1, b_y: 0.3, b_z: -0.2, b_k: 0.4 };
    let s = spec(2.0, DriverSpec::tight(kind), clamp_terminal(1.0)).build(6).unwrap();
    let t = *s.tree();
    let dt = t.grid().dt();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let q = random_quad(&t, &mut rng);
    let d = s.driver();
    for w in 0..t.num_paths() {
        let m = remainder_path(&s, &q, w).unwrap();
        for k in 0..=6 {
            let mut drift = 0.0;
            let mut noise = 0.0;
            for i in k..6 {
                let kk = q.kl.at(i, w) - q.ku.at(i, w);
                drift += d.eval(t.grid().time(i), q.y.at(i, w), q.z.at(i, w), kk) * dt;
                noise += q.z.at(i, w) * t.increment(i, w);
            }
            assert!((m.get(k) - (s.terminal()[w] + drift - noise)).abs() <= 1e-13);
        }
    }
}

#[test]
fn remainder_of_brownian_terminal_is_brownian() {
    let s = spec(5.0, DriverSpec::zero(), TerminalSpec::OfTerminalW { g: TerminalFn::Identity, scale: 1.0 })
        .build(8)
        .unwrap();
    let mut q = SolutionQuad::zeros(8);
    q.z = q.z.map(|_| 1.0);
    for w in [0, 17, 255] {
        let m = remainder_path(&s, &q, w).unwrap();
        for k in 0..=8 {
            assert!((m.get(k) - s.tree().brownian(k, w)).abs() <= 1e-14);
        }
    }
    assert!(remainder_path(&s, &q, 256).is_err());
}

#[test]
fn trivial_scenario_converges_in_two_iterations() {
    let s = spec(5.0, DriverSpec::zero(), TerminalSpec::OfTerminalW { g: TerminalFn::Identity, scale: 1.0 })
        .build(8)
        .unwrap();
    let r = solve_picard(&s, &PicardConfig::default()).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 2);
    let w = s.tree().brownian_process();
    assert!(r.solution.y.max_abs_diff(&w) <= 1e-13);
    assert!(r.solution.z.level(0).iter().all(|&z| (z - 1.0).abs() <= 1e-12));
    assert_eq!(r.residuals.regulator_variation, 0.0);
    assert!(r.residuals.equation <= 1e-13);
}

// Game value for f = 0 computed from explicit path enumeration: the value at a
// node is the clamp of the mean of its children's values, children found by
// filtering all paths on their prefix.
fn brute_game_value(s: &Scenario) -> Vec<Vec<f64>> {
    let t = s.tree();
    let n = t.depth();
    let (lo, hi) = (s.barriers().lower().values(), s.barriers().upper().values());
    let mut v: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    v[n] = s.terminal().to_vec();
    for k in (0..n).rev() {
        v[k] = (0..1usize << k)
            .map(|p| {
                let kids: Vec<f64> =
                    (0..1usize << (k + 1)).filter(|q| q % (1 << k) == p).map(|q| v[k + 1][q]).collect();
                (kids.iter().sum::<f64>() / kids.len() as f64).clamp(lo[k], hi[k])
            })
            .collect();
    }
    v
}

#[test]
fn oracle_and_picard_match_game_value() {
    let s = spec(0.3, DriverSpec::zero(), clamp_terminal(0.3)).build(9).unwrap();
    let brute = brute_game_value(&s);
    let oracle = backward_induction_oracle(&s).unwrap();
    let picard = solve_picard(&s, &PicardConfig::default()).unwrap();
    assert!(picard.converged);
    for (k, level) in brute.iter().enumerate() {
        for (p, v) in level.iter().enumerate() {
            assert!((oracle.y.node(k, p) - v).abs() <= 1e-14);
            assert!((picard.solution.y.node(k, p) - v).abs() <= 1e-12);
        }
    }
    assert!(picard.solution.k().max_abs_diff(&oracle.k()) <= 1e-12);
}

#[test]
fn z_only_driver_matches_oracle() {
    // without y or k dependence the implicit and explicit schemes coincide
    let kind = DriverKind::Affine { a: 0.3, b_y: 0.0, b_z: 0.2, b_k: 0.0 };
    let s = spec(0.25, DriverSpec::tight(kind), clamp_terminal(0.25)).build(8).unwrap();
    let oracle = backward_induction_oracle(&s).unwrap();
    let r = solve_picard(&s, &PicardConfig::default()).unwrap();
    assert!(r.converged);
    assert!(r.solution.y.max_abs_diff(&oracle.y) <= 1e-10);
    assert!(r.solution.z.max_abs_diff(&oracle.z) <= 1e-9);
    assert!(r.solution.k().max_abs_diff(&oracle.k()) <= 1e-10);
    assert!(r.residuals.regulator_variation > 0.0);
}

#[test]
fn resistance_scenario_fixed_point() {
    let s = resistance().build(10).unwrap();
    let cfg = PicardConfig::default();
    let r = solve_picard(&s, &cfg).unwrap();
    assert!(r.converged && r.iterations <= 30);
    assert!(r.empirical_contraction);
    let dt = s.grid().dt();
    assert!(r.residuals.passes(dt, 0.05, 0.05), "{:?}", r.residuals);
    assert_eq!(r.residuals.containment, 0.0);
    assert_eq!(r.max_formula_gap, 0.0);
    // one more step barely moves
    let again = phi_iterate(&s, &r.solution, &cfg).unwrap();
    assert!(picard_distance(&again, &r.solution, s.grid(), cfg.alpha, cfg.beta) <= 1e-9);

    let warm = solve_picard_from(&s, &cfg, warm_start_quad(&s)).unwrap();
    assert!(warm.converged);
    assert!(r.solution.y.max_abs_diff(&warm.solution.y) <= 1e-7);
    assert!(r.solution.z.max_abs_diff(&warm.solution.z) <= 1e-7);
    assert!(r.solution.k().max_abs_diff(&warm.solution.k()) <= 1e-7);
}

fn strongly_reflected() -> Scenario {
    let kind = DriverKind::Affine { a: 2.0, b_y: 0.0, b_z: 0.0, b_k: -0.05 };
    spec(0.2, DriverSpec::tight(kind), clamp_terminal(0.2)).build(8).unwrap()
}

#[test]
fn predictable_projection_gives_one_fixed_point() {
    let s = strongly_reflected();
    let cfg = PicardConfig::default();
    let cold = solve_picard(&s, &cfg).unwrap();
    let warm = solve_picard_from(&s, &cfg, warm_start_quad(&s)).unwrap();
    assert!(cold.converged && warm.converged);
    assert!(cold.solution.z.max_abs_diff(&warm.solution.z) <= 1e-9);
    assert!(cold.solution.k().max_abs_diff(&warm.solution.k()) <= 1e-9);
}

#[test]
fn optional_projection_leaves_fixed_points_undetermined() {
    // Both runs stop at a fixed point with clean residuals, yet the split of
    // the push between sibling nodes differs.
    let s = strongly_reflected();
    let cfg = PicardConfig { projection: KProjection::Optional, ..PicardConfig::default() };
    let cold = solve_picard(&s, &cfg).unwrap();
    let warm = solve_picard_from(&s, &cfg, warm_start_quad(&s)).unwrap();
    assert!(cold.converged && warm.converged);
    let dt = s.grid().dt();
    assert!(cold.residuals.passes(dt, 0.0, 0.05) && warm.residuals.passes(dt, 0.0, 0.05));
    assert!(cold.solution.z.max_abs_diff(&warm.solution.z) > 0.1);
}

#[test]
fn picard_image_stays_inside_the_barriers() {
    let s = spec(0.3, DriverSpec::tight(DriverKind::BoundedNonlinear { scale: 0.5 }), clamp_terminal(0.3))
        .build(7)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let q = random_quad(s.tree(), &mut rng);
    let step = phi_step(&s, &q, KProjection::Predictable).unwrap();
    let r = residual_check(&s, &step.quad).unwrap();
    assert_eq!(r.containment, 0.0);
    assert!(r.min_increment >= 0.0);
    for w in 0..s.tree().num_paths() {
        for k in 0..=7 {
            assert!(step.raw_y.at(k, w).abs() <= 0.3);
        }
    }
}

#[test]
fn bad_inputs() {
    let s = resistance().build(4).unwrap();
    assert!(phi_iterate(&s, &SolutionQuad::zeros(3), &PicardConfig::default()).is_err());
    assert!(solve_picard(&s, &PicardConfig { tol: -1.0, ..PicardConfig::default() }).is_err());
    assert!(matches!(backward_induction_oracle(&s), Err(rbsde_core::Error::UnsupportedDriver { .. })));
    let grid = TimeGrid::uniform(1.0, 4).unwrap();
    assert_eq!(s.grid(), &grid);
}
