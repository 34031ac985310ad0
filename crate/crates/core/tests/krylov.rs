mod common;

use common::{run, start_vector, METHODS, RATIONAL};
use geomean::baselines::{dense_geomean, relative_error};
use geomean::krylov::{
    arnoldi_geomean, decomposition_residual, rational_arnoldi_geomean, GeomeanConfig, Termination,
};
use geomean::poles::{AdaptivePoles, FixedPoles, Pole};
use geomean::solvers::{extreme_pencil_eigs, rayleigh_probe};
use geomean::sparse::{
    lap1d, lap2d, pencil_combine, random_spd, random_spd_with_condition, SparseMatrix,
};

#[test]
fn equal_arguments_give_matvec() {
    let a = random_spd(20, 3).unwrap();
    let v = start_vector(20);
    let av = a.matvec(&v).unwrap();
    for m in METHODS {
        let out = run(m, &a, &a, &v, &GeomeanConfig::default(), None).unwrap();
        let err = relative_error(&out.value, &av).unwrap();
        assert!(err <= 1e-10, "{m}: {err:e}");
    }
}

#[test]
fn lanczos_on_diagonal_with_identity() {
    let a = SparseMatrix::diagonal(&[1.0, 4.0]).unwrap();
    let out = run(
        "genlanczos",
        &a,
        &SparseMatrix::identity(2),
        &[1.0, 0.0],
        &GeomeanConfig::default(),
        None,
    )
    .unwrap();
    assert!(
        (out.value[0] - 1.0).abs() < 1e-14 && out.value[1].abs() < 1e-14,
        "{:?}",
        out.value
    );
    assert_eq!(out.report.termination, Termination::Breakdown);
}

#[test]
fn arnoldi_scalar() {
    let a = SparseMatrix::diagonal(&[4.0]).unwrap();
    let out = run(
        "arnoldi",
        &a,
        &SparseMatrix::identity(1),
        &[3.0],
        &GeomeanConfig::default(),
        None,
    )
    .unwrap();
    assert!((out.value[0] - 6.0).abs() < 1e-14);
}

#[test]
fn full_dimension_matches_dense() {
    for (n, seed) in [(10, 1u64), (30, 2), (50, 3)] {
        let a = random_spd_with_condition(n, 30.0, seed).unwrap();
        let b = random_spd_with_condition(n, 20.0, seed + 100).unwrap();
        let v = start_vector(n);
        let reference = dense_geomean(&a, &b).unwrap().matvec(&v);
        for m in METHODS {
            let out = run(m, &a, &b, &v, &GeomeanConfig::fixed_steps(n), None).unwrap();
            let err = relative_error(&out.value, &reference).unwrap();
            assert!(err <= 1e-8, "n = {n}, {m}: {err:e}");
        }
    }
}

#[test]
fn infinite_poles_reproduce_arnoldi() {
    let a = random_spd_with_condition(60, 50.0, 8).unwrap();
    let b = random_spd_with_condition(60, 50.0, 9).unwrap();
    let v = start_vector(60);
    let cfg = GeomeanConfig {
        record_steps: true,
        ..GeomeanConfig::fixed_steps(20)
    };
    let poly = arnoldi_geomean(&a, &b, &v, &cfg, None).unwrap();
    let rat =
        rational_arnoldi_geomean(&a, &b, &v, &mut FixedPoles::polynomial(), &cfg, None).unwrap();
    let xs = poly.report.per_step_approximations.unwrap();
    let ys = rat.report.per_step_approximations.unwrap();
    assert_eq!(xs.len(), 20);
    for (j, (x, y)) in xs.iter().zip(&ys).enumerate() {
        let err = relative_error(y, x).unwrap();
        assert!(err <= 1e-12, "step {}: {err:e}", j + 1);
    }
    assert_eq!(poly.decomposition.h(), rat.decomposition.h());
}

#[test]
fn basis_and_residual_hold_at_every_step() {
    let k = 8;
    let pencils = [
        (
            random_spd_with_condition(100, 50.0, 7).unwrap(),
            random_spd_with_condition(100, 50.0, 11).unwrap(),
        ),
        (lap1d(k * k).unwrap(), lap2d(k).unwrap()),
    ];
    for (a, b) in &pencils {
        let v = vec![1.0; a.n_rows()];
        for m in METHODS {
            let out = run(m, a, b, &v, &GeomeanConfig::fixed_steps(30), None).unwrap();
            let dec = &out.decomposition;
            let weight = (m == "genlanczos").then_some(b);
            for step in 1..=dec.steps() {
                let p = dec.prefix(step);
                let loss = p.orthonormality_loss(weight).unwrap();
                assert!(loss <= 1e-8, "{m} step {step}: Gram loss {loss:e}");
                let res = decomposition_residual(&p, a, b).unwrap();
                assert!(res <= 1e-8, "{m} step {step}: residual {res:e}");
            }
        }
    }
}

#[test]
fn adaptive_poles_keep_pencils_definite() {
    let k = 12;
    let a = lap1d(k * k).unwrap();
    let b = lap2d(k).unwrap();
    let v = vec![1.0; k * k];
    let mut strategy = AdaptivePoles::new();
    let out = rational_arnoldi_geomean(
        &a,
        &b,
        &v,
        &mut strategy,
        &GeomeanConfig::fixed_steps(30),
        None,
    )
    .unwrap();
    assert_eq!(out.report.poles.len(), 30);
    assert_eq!(out.report.poles[0], Pole::Infinity);
    for pole in &out.report.poles[1..] {
        let Pole::Finite(xi) = *pole else {
            panic!("adaptive pole {pole} is not finite");
        };
        assert!(xi < 0.0, "{xi}");
        // B - A/xi is the matrix every finite-pole step solves with
        let shifted = pencil_combine(1.0, &b, -1.0 / xi, &a).unwrap();
        assert!(
            rayleigh_probe(&shifted, 16, 5).unwrap() > 0.0,
            "xi = {xi:e}"
        );
    }
}

#[test]
fn ritz_values_stay_in_spectral_interval() {
    let a = random_spd_with_condition(80, 100.0, 21).unwrap();
    let b = random_spd_with_condition(80, 10.0, 22).unwrap();
    let bounds = extreme_pencil_eigs(&a, &b, 1e-8).unwrap();
    let out = run(
        "rat-adaptive",
        &a,
        &b,
        &start_vector(80),
        &GeomeanConfig::fixed_steps(15),
        None,
    )
    .unwrap();
    let dec = &out.decomposition;
    let m = dec.steps();
    let hm = dec.h().top_left(m, m);
    let km = dec.k().unwrap().top_left(m, m);
    let am = geomean::dense::small_solve(&km.transpose(), &hm.transpose())
        .unwrap()
        .transpose();
    for z in geomean::dense::ritz_values(&am).unwrap() {
        assert!(z.im.abs() <= 1e-8 * bounds.lambda_max);
        assert!(
            bounds.contains(z.re),
            "{z} outside [{}, {}]",
            bounds.lambda_min,
            bounds.lambda_max
        );
    }
}

#[test]
fn rational_methods_converge_on_random_pencil() {
    let a = random_spd_with_condition(100, 50.0, 7).unwrap();
    let b = random_spd_with_condition(100, 50.0, 11).unwrap();
    let v = vec![1.0; 100];
    let reference = dense_geomean(&a, &b).unwrap().matvec(&v);
    let cfg = GeomeanConfig::fixed_steps(30);
    for (m, bound) in [
        ("rat-leja", 1e-8),
        ("rat-adaptive", 1e-8),
        ("rat-extended", 1e-5),
    ] {
        let out = run(m, &a, &b, &v, &cfg, Some(&reference)).unwrap();
        let last = *out.report.per_step_rel_error.last().unwrap();
        assert!(last <= bound, "{m}: {last:e}");
        assert_eq!(out.report.per_step_rel_error.len(), 30);
        assert_eq!(out.report.per_step_seconds.len(), 30);
    }
}

#[test]
fn arnoldi_converges_on_shifted_random_pencil() {
    let a = random_spd(100, 1).unwrap();
    let b = random_spd(100, 2).unwrap();
    let v = vec![1.0; 100];
    let reference = dense_geomean(&a, &b).unwrap().matvec(&v);
    for m in ["arnoldi", "arnoldi-swapped", "genlanczos"] {
        let out = run(
            m,
            &a,
            &b,
            &v,
            &GeomeanConfig::fixed_steps(30),
            Some(&reference),
        )
        .unwrap();
        let errs = &out.report.per_step_rel_error;
        assert!(errs[29] <= 1e-6, "{m}: {:e}", errs[29]);
        assert!(errs[29] < errs[0]);
    }
}

#[test]
fn early_stop_reports_convergence() {
    let a = random_spd(40, 5).unwrap();
    let b = random_spd(40, 6).unwrap();
    let v = start_vector(40);
    for m in RATIONAL.iter().chain(&["genlanczos"]) {
        let out = run(m, &a, &b, &v, &GeomeanConfig::default(), None).unwrap();
        assert!(
            matches!(
                out.report.termination,
                Termination::Converged | Termination::Breakdown
            ),
            "{m}: {:?} after {} steps",
            out.report.termination,
            out.report.steps
        );
        assert!(out.report.steps < 30, "{m}");
    }
}

#[test]
fn inputs_are_validated() {
    let a = random_spd(5, 1).unwrap();
    let small = SparseMatrix::identity(4);
    let cfg = GeomeanConfig::default();
    assert!(run("arnoldi", &a, &small, &[1.0; 5], &cfg, None).is_err());
    assert!(run("genlanczos", &a, &a, &[0.0; 5], &cfg, None).is_err());
    assert!(run("rat-adaptive", &a, &a, &[1.0; 4], &cfg, None).is_err());
    assert!(run("rat-nonsense", &a, &a, &[1.0; 5], &cfg, None).is_err());
    let bad = GeomeanConfig {
        max_steps: 0,
        ..cfg
    };
    assert!(run("rat-poly", &a, &a, &[1.0; 5], &bad, None).is_err());
}
