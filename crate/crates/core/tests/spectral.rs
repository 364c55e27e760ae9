use critwave::spectral::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RK4 for `w'' + w' + ξ² w = 0`, returning `(w, w')` at `t`.
fn rk4(xi: f64, w0: f64, w1: f64, t: f64) -> (f64, f64) {
    let steps = ((t * xi.max(1.0) / 2e-4).ceil() as usize).max(1);
    let h = t / steps as f64;
    let f = |w: f64, z: f64| (z, -z - xi * xi * w);
    let (mut w, mut z) = (w0, w1);
    for _ in 0..steps {
        let k1 = f(w, z);
        let k2 = f(w + 0.5 * h * k1.0, z + 0.5 * h * k1.1);
        let k3 = f(w + 0.5 * h * k2.0, z + 0.5 * h * k2.1);
        let k4 = f(w + h * k3.0, z + h * k3.1);
        w += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        z += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (w, z)
}

#[test]
fn multipliers_match_ode_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let t = rng.gen_range(0.0..30.0);
        let xi = if rng.gen_bool(0.2) {
            rng.gen_range(0.45..0.55)
        } else {
            rng.gen_range(0.0..4.0)
        };
        let m = multipliers(t, xi);
        let (a, da) = rk4(xi, 1.0, 0.0, t);
        let (b, db) = rk4(xi, 0.0, 1.0, t);
        let scale0 = a.abs().max(da.abs());
        let scale1 = b.abs().max(db.abs());
        for (got, want, scale) in [
            (m.k0, a, scale0),
            (m.dt_k0, da, scale0),
            (m.k1, b, scale1),
            (m.dt_k1, db, scale1),
        ] {
            assert!((got - want).abs() <= 1e-9 * scale, "t={t} xi={xi}: {got} vs {want}");
        }
    }
}

#[test]
fn zero_mode_identities() {
    for t in [0.0, 0.1, 1.0, 10.0, 100.0] {
        assert!((kernel_multiplier(t, 0.0, Kernel::K0) - 1.0).abs() < 1e-12);
        assert!((kernel_multiplier(t, 0.0, Kernel::K1) - (1.0 - (-t).exp())).abs() < 1e-12);
    }
}

#[test]
fn finite_propagation_speed() {
    let grid = Grid::new(1, 60.0, 4096).unwrap();
    let bump = GridField::radial(grid, |r| {
        if r < 1.0 {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    });
    let t = 10.0;
    let (w, _) = linear_evolve(&bump, &bump, t).unwrap();
    let axis = grid.axis();
    let peak = w.max_abs();
    let outside = axis
        .iter()
        .zip(&w.values)
        .filter(|(x, _)| x.abs() > 1.0 + t + 1.0)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    assert!(outside < 1e-6 * peak, "{outside} vs {peak}");
}

#[test]
fn linear_flow_conserves_mass_law() {
    // ∫w obeys the zero-mode ODE: ∫w(t) = ∫w₀ + (1 − e^{-t}) ∫w₁
    let grid = Grid::new(2, 30.0, 128).unwrap();
    let g0 = GridField::radial(grid, |r| (-r * r).exp());
    let g1 = g0.scaled(0.5);
    for t in [0.5, 3.0, 12.0] {
        let (w, wt) = linear_evolve(&g0, &g1, t).unwrap();
        let want = g0.integral() + (1.0 - (-t).exp()) * g1.integral();
        assert!((w.integral() - want).abs() < 1e-10 * want);
        assert!((wt.integral() - (-t).exp() * g1.integral()).abs() < 1e-10);
    }
}

#[test]
fn snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(2, 5.0, 16).unwrap();
    let f = GridField::from_fn(grid, |x| x[0] - 2.0 * x[1]);
    let path = dir.path().join("f.bin");
    write_snapshot(&path, &f, 1.25, "u").unwrap();
    let (g, t) = read_snapshot(&path).unwrap();
    assert_eq!(t, 1.25);
    assert_eq!(g, f);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.bin.json")).unwrap()).unwrap();
    assert_eq!(meta["label"], "u");
}
