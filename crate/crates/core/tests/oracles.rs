use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use y00_numerics::deltarho::{build_auto, build_coefficient_matrix, SignalParams, DEFAULT_TRUNCATION_TOL};
use y00_numerics::discrimination::{attacker_error_probability, spectral_error_probability, Method};
use y00_numerics::encoding::{fan_angles, wheel_angles};
use y00_numerics::fockoracle::{mixed_state_delta, oracle_error_probability};
use y00_numerics::numkernel::{hermitian_eigenvalues, scaled_bessel_i, HermitianMatrix, ScaledBesselTable, C64};

fn params(n: f64) -> SignalParams {
    SignalParams::new(n).unwrap()
}

// e^{-x} I_n(x) from the power series, terms by recurrence
fn bessel_series(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=n {
        term *= h / j as f64;
    }
    let mut sum = 0.0;
    let mut k = 0.0;
    loop {
        sum += term;
        k += 1.0;
        term *= h * h / (k * (k + n as f64));
        if term < sum * 1e-18 {
            break;
        }
    }
    sum * (-x).exp()
}

#[test]
fn bessel_matches_series() {
    for &x in &[0.01, 0.1, 0.5, 1.0, 2.5, 5.0, 10.0, 15.0, 20.0] {
        let table = ScaledBesselTable::new(x, 40).unwrap();
        for n in 0..=40u32 {
            let want = bessel_series(n, x);
            let got = scaled_bessel_i(n as i64, x).unwrap();
            let from_table = table.value(n as i64).unwrap();
            if want < 1e-290 {
                continue;
            }
            assert!(((got - want) / want).abs() < 1e-12, "n={n} x={x}: {got} vs {want}");
            assert!(((from_table - want) / want).abs() < 1e-12, "n={n} x={x}");
        }
    }
}

#[test]
fn bessel_normalization() {
    for &x in &[0.1f64, 1.0, 10.0, 100.0, 1000.0] {
        let order = (x + 40.0 * (x + 1.0).sqrt()) as usize + 40;
        let t = ScaledBesselTable::new(x, order).unwrap();
        let total = t.value(0).unwrap() + 2.0 * (1..=order as i64).map(|n| t.value(n).unwrap()).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-10, "x={x}: {total}");
    }
}

#[test]
fn pinned_bessel() {
    let v = scaled_bessel_i(0, 1.0).unwrap();
    assert!((v - 0.465_759_607_593_640_4).abs() < 1e-15);
}

// eigenvalues of a 3x3 Hermitian matrix from its characteristic cubic
fn cubic_eigenvalues(h: &HermitianMatrix) -> Vec<f64> {
    let a = |i, j| h.get(i, j);
    let tr = h.trace();
    let c1 = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)
        + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)
        + a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
    .re;
    let det = (a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)))
    .re;
    // lambda = t + tr/3, t^3 + p t + q = 0
    let s = tr / 3.0;
    let p = c1 - tr * tr / 3.0;
    let q = -2.0 * s * s * s + s * c1 - det;
    let mut out: Vec<f64> = if p.abs() < 1e-300 {
        vec![s; 3]
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| s + 2.0 * r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    };
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

#[test]
fn eigensolver_matches_cubic_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let mut u = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let vals: Vec<C64> = (0..6).map(|_| u()).collect();
        let h = HermitianMatrix::from_upper_fn(3, |i, j| match (i, j) {
            (0, 1) => vals[0],
            (0, 2) => vals[1],
            (1, 2) => vals[2],
            (i, _) => vals[3 + i],
        });
        let got = hermitian_eigenvalues(&h).unwrap();
        let want = cubic_eigenvalues(&h);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn spectrum_is_permutation_invariant() {
    let a = wheel_angles(8).unwrap();
    let c = build_auto(&a, &params(3.0), DEFAULT_TRUNCATION_TOL).unwrap();
    let dim = c.dim();
    let perm: Vec<usize> = (0..dim).map(|i| (i * 7 + 3) % dim).collect();
    assert!(!dim.is_multiple_of(7));
    let ev = hermitian_eigenvalues(c.entries()).unwrap();
    let evp = hermitian_eigenvalues(&c.entries().permuted(&perm)).unwrap();
    for (x, y) in ev.iter().zip(&evp) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn analytic_matrix_matches_oracle_entrywise() {
    let a = wheel_angles(4).unwrap();
    let p = params(2.0);
    let order = 24;
    let c = build_coefficient_matrix(&a, &p, order, DEFAULT_TRUNCATION_TOL).unwrap();
    let delta = mixed_state_delta(&a, &p, 40).unwrap();
    let proj = delta.in_difference_basis(&p, order);
    let span = 2 * order as i64;
    for (r, row) in proj.iter().enumerate() {
        for (s, &v) in row.iter().enumerate() {
            let want = c.entry(r as i64 - span, s as i64 - span).unwrap();
            assert!((v - want).norm() < 1e-8, "({r},{s}): {v} vs {want}");
        }
    }
}

#[test]
fn pinned_oracle_value() {
    let a = wheel_angles(4).unwrap();
    let pe = oracle_error_probability(&a, &params(2.0), 40).unwrap();
    assert!((pe.value - 0.334_235_732_302_740_95).abs() < 1e-10, "{}", pe.value);
    let analytic = attacker_error_probability(&build_auto(&a, &params(2.0), DEFAULT_TRUNCATION_TOL).unwrap()).unwrap();
    assert!((analytic.value - pe.value).abs() < 1e-10);
}

#[test]
fn oracle_sector_invariant() {
    let a = fan_angles(2, 2).unwrap();
    let delta = mixed_state_delta(&a, &params(1.5), 14).unwrap();
    let d = 15;
    let mut odd_seen = false;
    for i in 0..d * d {
        for j in 0..d * d {
            let (m1, m2) = ((i % d) as i64 - (i / d) as i64, (j % d) as i64 - (j / d) as i64);
            let v = delta.matrix.get(i, j).norm();
            if (m1 - m2).rem_euclid(4) == 0 {
                assert!(v < 1e-15, "{i},{j}: {v}");
            } else if v > 1e-6 {
                odd_seen = true;
            }
        }
    }
    assert!(odd_seen);
}

#[test]
fn oracle_and_analytic_agree_on_fans() {
    for &(m_f, f) in &[(2usize, 2usize), (4, 2), (2, 4)] {
        let a = fan_angles(m_f, f).unwrap();
        for &n in &[0.5, 3.0] {
            let o = oracle_error_probability(&a, &params(n), 36).unwrap().value;
            let s = attacker_error_probability(&build_auto(&a, &params(n), DEFAULT_TRUNCATION_TOL).unwrap())
                .unwrap()
                .value;
            assert!((o - s).abs() < 1e-9, "M_f={m_f} f={f} n={n}: {o} vs {s}");
        }
    }
}

#[test]
fn helstrom_single_basis() {
    let a = wheel_angles(1).unwrap();
    let c = build_auto(&a, &params(1.0), DEFAULT_TRUNCATION_TOL).unwrap();
    let pe = spectral_error_probability(c.entries(), Method::AnalyticSpectral).unwrap().value;
    assert!((pe - 0.035_063_252_483_903_13).abs() < 1e-12, "{pe}");
}
