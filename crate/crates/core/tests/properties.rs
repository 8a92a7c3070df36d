mod common;

use krein_core::cone::{dominates_ball, w_gauge, Cone, Tolerances};
use krein_core::contraction::{
    build_te_dual, difference_quotient, dirder, solve_te_eigenvector, te_membership,
    verify_face_theorem, MonotoneSpace,
};
use krein_core::io::{self, EigenpairJson};
use krein_core::krein::{
    common_eigenvector, krein_map, plus_identity_transfer, solve_dual_eigenvector,
    CommutingFamily, PositiveOperator,
};
use krein_core::l1::{
    find_certificate_index, generators_preserved, interior_perturbation, satisfies_tkk, L1Matrix,
};
use krein_core::linalg::{self, CMatrix};
use krein_core::matrix_order::{
    adjoint_superop, eig_function, face_psd, pinch_majorization, HermMatrix, SuperOp,
};
use krein_core::oracle::{dense_dual_eigs, differential_run, generate, Family, Instance, InstanceSpec};
use krein_core::random::{self, SeededRng};
use krein_core::NormTag;
use nalgebra::{Complex, DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn nonneg(r: &mut SeededRng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.random_range(0.0..1.0))
}

fn positive(r: &mut SeededRng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.random_range(0.05..1.0))
}

/// A random unit vector `e >= 0` for `norm`, with a non-trivial peak set.
fn unit_apex(r: &mut SeededRng, n: usize, norm: &NormTag) -> DVector<f64> {
    let e = random::uniform_vector(r, n, 0.1, 1.0);
    norm.normalize(&e)
}

/// Cones of dimension `n` paired with a sampler of their members.
fn cone_zoo(r: &mut SeededRng, n: usize) -> Vec<Cone> {
    let gens = (0..n + 2)
        .map(|_| random::uniform_vector(r, n, -0.3, 1.0))
        .collect();
    let mut e = random::uniform_vector(r, n, 0.5, 1.5);
    e[0] = 2.0;
    vec![
        Cone::orthant(n),
        Cone::l1_krein(n, r.random_range(0..n)).unwrap(),
        Cone::Polyhedral { n, generators: gens },
        Cone::ShiftedBall {
            e: e.clone(),
            norm: NormTag::Linf,
        },
        Cone::ShiftedBall {
            e: e.clone(),
            norm: NormTag::L2,
        },
        Cone::ShiftedBall {
            e,
            norm: NormTag::L1,
        },
        Cone::TeCone {
            e: unit_apex(r, n, &NormTag::Linf),
            norm: NormTag::Linf,
        },
        Cone::TeCone {
            e: unit_apex(r, n, &NormTag::L1),
            norm: NormTag::L1,
        },
    ]
}

/// A random element of the dual of `TeCone(e, norm)`.
fn te_dual_point(r: &mut SeededRng, e: &DVector<f64>, norm: &NormTag) -> DVector<f64> {
    let n = e.len();
    match norm {
        NormTag::L1 => {
            let c = r.random_range(0.1..1.0);
            DVector::from_fn(n, |i, _| if e[i] > 0.0 { c } else { r.random_range(0.0..c) })
        }
        _ => DVector::from_fn(n, |i, _| {
            if e[i] >= 1.0 - 1e-12 {
                r.random_range(0.0..1.0)
            } else {
                0.0
            }
        }),
    }
}

fn ball_point(r: &mut SeededRng, n: usize, norm: &NormTag) -> DVector<f64> {
    let v = random::normal_vector(r, n);
    let s = norm.norm(&v);
    v * (r.random_range(0.0..1.0) / s)
}

fn member(r: &mut SeededRng, cone: &Cone) -> DVector<f64> {
    let n = cone.dim();
    match cone {
        Cone::Orthant { .. } => random::uniform_vector(r, n, 0.0, 1.0),
        Cone::L1Krein { k, .. } => {
            let mut x = random::uniform_vector(r, n, -1.0, 1.0);
            x[*k] = 0.0;
            x[*k] = x.abs().sum() + r.random_range(0.0..1.0);
            x
        }
        Cone::Polyhedral { generators, .. } => generators
            .iter()
            .fold(DVector::zeros(n), |acc, g| acc + g * r.random_range(0.0..1.0)),
        Cone::ShiftedBall { e, norm } => (e + ball_point(r, n, norm)) * r.random_range(0.0..2.0),
        Cone::TeCone { e, norm } => {
            random::uniform_vector(r, n, 0.0, 1.0)
                + (e - ball_point(r, n, norm)) * r.random_range(0.0..2.0)
        }
        Cone::Psd { n } => {
            let g = random::normal_matrix(r, *n, *n);
            let m = &g * g.transpose();
            DVector::from_row_slice(m.transpose().as_slice())
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cones_are_convex(seed in any::<u64>(), n in 1usize..6) {
        let mut r = random::rng(seed);
        let mut zoo = cone_zoo(&mut r, n);
        zoo.push(Cone::Psd { n: n.min(3) });
        for cone in &zoo {
            for _ in 0..25 {
                let x = member(&mut r, cone);
                let y = member(&mut r, cone);
                prop_assert!(cone.contains(&x, &tol()).unwrap(), "{:?} {}", cone, x);
                let (s, t) = (r.random_range(0.0..3.0), r.random_range(0.0..3.0));
                let z = &x * s + &y * t;
                prop_assert!(cone.contains(&z, &tol()).unwrap(), "{:?} {}", cone, z);
            }
        }
    }
}

#[test]
fn te_cone_bipolar() {
    let mut r = random::rng(17);
    for trial in 0..1000 {
        let n = 1 + trial % 5;
        let norm = if trial % 2 == 0 { NormTag::Linf } else { NormTag::L1 };
        let e = unit_apex(&mut r, n, &norm);
        let dual = build_te_dual(&e, &norm).unwrap();
        let x = random::normal_vector(&mut r, n) + &e * r.random_range(0.0..2.0);
        let m = te_membership(&x, &dual, &tol()).unwrap();
        if m.member {
            // Every sampled dual element is non-negative on x.
            for _ in 0..10 {
                let f = te_dual_point(&mut r, &e, &norm);
                assert!(dual.contains_functional(&f, 1e-9));
                assert!(f.dot(&x) >= -1e-9 * x.amax(), "{f} {x}");
            }
        } else {
            let f = m.separating.expect("separating functional");
            assert!(dual.contains_functional(&f, 1e-9));
            assert!(f.dot(&x) < 0.0);
        }
    }
}

#[test]
fn positive_functionals_attain_their_norm_at_e() {
    let mut r = random::rng(23);
    for trial in 0..300 {
        let n = 1 + trial % 5;
        let (cone, norm, e) = match trial % 3 {
            0 => (Cone::orthant(n), NormTag::Linf, DVector::from_element(n, 1.0)),
            1 => (Cone::l1_krein(n, 0).unwrap(), NormTag::L1, common::unit(n, 0)),
            _ => {
                let e = unit_apex(&mut r, n, &NormTag::Linf);
                (
                    Cone::TeCone {
                        e: e.clone(),
                        norm: NormTag::Linf,
                    },
                    NormTag::Linf,
                    e,
                )
            }
        };
        assert!(dominates_ball(&cone, &norm, &e, &tol()).unwrap().dominates);
        let f = match &cone {
            Cone::L1Krein { .. } => {
                let mut f = random::uniform_vector(&mut r, n, -1.0, 1.0);
                f[0] = f.rows(1, n - 1).amax() + r.random_range(0.0..1.0);
                f
            }
            Cone::TeCone { .. } => te_dual_point(&mut r, &e, &NormTag::Linf),
            _ => random::uniform_vector(&mut r, n, 0.0, 1.0),
        };
        assert!(cone.dual_contains(&f, &tol()).unwrap());
        let sampled_max = (0..200)
            .map(|_| f.dot(&ball_point(&mut r, n, &norm)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(sampled_max <= f.dot(&e) + 1e-9);
        assert!((norm.dual_norm(&f) - f.dot(&e)).abs() <= 1e-9 * f.amax().max(1.0));
    }
}

#[test]
fn shifted_l1_ball_and_l1krein_agree() {
    let mut r = random::rng(29);
    for trial in 0..10_000 {
        let n = 1 + trial % 6;
        let e = common::unit(n, 0);
        let shifted = Cone::ShiftedBall {
            e,
            norm: NormTag::L1,
        };
        let krein = Cone::l1_krein(n, 0).unwrap();
        let x = random::normal_vector(&mut r, n);
        let margin = x[0] - x.rows(1, n - 1).abs().sum();
        if margin.abs() < 1e-6 * x.amax() {
            continue;
        }
        assert_eq!(
            shifted.contains(&x, &tol()).unwrap(),
            krein.contains(&x, &tol()).unwrap(),
            "{x}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_is_homogeneous_and_subadditive(seed in any::<u64>(), n in 1usize..5, l2 in any::<bool>()) {
        let mut r = random::rng(seed);
        let norm = if l2 { NormTag::L2 } else { NormTag::Linf };
        let mut e = random::uniform_vector(&mut r, n, 0.2, 1.0);
        e = &e * (r.random_range(1.3..3.0) / norm.norm(&e));
        let x = random::normal_vector(&mut r, n);
        let y = random::normal_vector(&mut r, n);
        let t = r.random_range(0.1..5.0);
        let gx = w_gauge(&e, &norm, &x).unwrap();
        let gy = w_gauge(&e, &norm, &y).unwrap();
        let gtx = w_gauge(&e, &norm, &(&x * t)).unwrap();
        let gxy = w_gauge(&e, &norm, &(&x + &y)).unwrap();
        prop_assert!((gtx - t * gx).abs() <= 1e-9 * (1.0 + t * gx));
        prop_assert!(gxy <= gx + gy + 1e-9 * (1.0 + gx + gy));
    }
}

fn orthant_op(t: DMatrix<f64>) -> PositiveOperator {
    let n = t.nrows();
    PositiveOperator::new(t, Cone::orthant(n), DVector::from_element(n, 1.0), NormTag::Linf, &tol())
        .unwrap()
}

#[test]
fn krein_map_stays_on_the_dual_simplex() {
    let mut r = random::rng(31);
    for trial in 0..1000 {
        let n = 1 + trial % 7;
        let op = orthant_op(nonneg(&mut r, n));
        let f = random::uniform_vector(&mut r, n, 0.0, 1.0) + common::unit(n, trial % n) * 0.01;
        let g = krein_map(&op, &f).unwrap();
        assert!(Cone::orthant(n).dual_contains(&g, &tol()).unwrap());
        assert!((g.sum() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn fixed_points_are_exactly_dual_eigenvectors() {
    let mut r = random::rng(37);
    for trial in 0..200 {
        let n = 1 + trial % 6;
        let t = positive(&mut r, n);
        let op = orthant_op(t.clone());
        // Dense eigenvectors in the dual simplex are fixed by the map.
        let spec = dense_dual_eigs(&t).unwrap();
        let (_, h) = spec
            .dual_cone_witness(&Cone::orthant(n), op.e(), &tol())
            .unwrap()
            .expect("a dual-cone eigenvector exists");
        let fh = krein_map(&op, &h).unwrap();
        assert!((&fh - &h).amax() <= 1e-9, "{fh} {h}");
        // Fixed points returned by the solver are eigenvectors.
        let p = solve_dual_eigenvector(&op, &tol(), 10_000).unwrap();
        let fp = krein_map(&op, &p.h).unwrap();
        assert!((&fp - &p.h).amax() <= 1e-8);
        assert!((t.transpose() * &p.h - &p.h * p.lambda).amax() <= 1e-8);
        // A non-eigenvector is moved.
        if n > 1 {
            let f = common::unit(n, 0);
            let moved = (krein_map(&op, &f).unwrap() - &f).amax();
            let eig = (t.transpose() * &f - &f * (t.transpose() * &f).sum()).amax();
            assert_eq!(moved > 1e-12, eig > 1e-12);
        }
    }
}

#[test]
fn positive_matrices_reach_the_perron_root() {
    let mut r = random::rng(41);
    for trial in 0..200 {
        let n = 1 + trial % 12;
        let t = positive(&mut r, n);
        let p = solve_dual_eigenvector(&orthant_op(t.clone()), &tol(), 10_000).unwrap();
        let rho = linalg::spectral_radius(&t).unwrap();
        assert!((p.lambda - rho).abs() <= 1e-6 * rho.max(1.0));
        assert!(dense_dual_eigs(&t).unwrap().has_real(p.lambda, 1e-6));
    }
}

#[test]
fn common_eigenvectors_are_fixed_by_every_map() {
    let mut r = random::rng(43);
    for trial in 0..100 {
        let n = 1 + trial % 6;
        let a = positive(&mut r, n);
        let b = &a * &a * 0.5 + &a * 2.0 + DMatrix::identity(n, n);
        let c = &a * &a * &a;
        let ops = vec![orthant_op(a), orthant_op(b), orthant_op(c)];
        let ctol = 1e-10 * ops.iter().map(|o| o.matrix().norm()).product::<f64>().max(1.0);
        let fam = CommutingFamily::new(ops.clone(), ctol).unwrap();
        let res = common_eigenvector(&fam, &tol(), 10_000).unwrap();
        for op in &ops {
            let fh = krein_map(op, &res.h).unwrap();
            assert!((&fh - &res.h).amax() <= 1e-8);
        }
    }
}

#[test]
fn plus_identity_transfer_matches_direct_solve() {
    let mut r = random::rng(47);
    for trial in 0..100 {
        let n = 1 + trial % 8;
        let t = positive(&mut r, n);
        let direct = solve_dual_eigenvector(&orthant_op(t.clone()), &tol(), 10_000).unwrap();
        let shifted = t.clone() + DMatrix::identity(n, n);
        let via = solve_dual_eigenvector(&orthant_op(shifted), &tol(), 10_000).unwrap();
        let back = plus_identity_transfer(&via, &t, &tol()).unwrap();
        assert!((back.lambda - direct.lambda).abs() <= 1e-6 * direct.lambda.max(1.0));
    }
}

/// Matrices near the criterion boundary: `S + R` at a random index, or
/// plain Gaussian.
fn criterion_candidate(r: &mut SeededRng, n: usize) -> (DMatrix<f64>, usize) {
    let k = r.random_range(0..n);
    if r.random_bool(0.5) {
        let mut m = random::normal_matrix(r, n, n) * r.random_range(0.0..0.3);
        m[(k, k)] += 1.0;
        (m, k)
    } else {
        (random::normal_matrix(r, n, n), k)
    }
}

#[test]
fn criterion_equals_generator_invariance() {
    let mut r = random::rng(53);
    let mut accepted = 0;
    for trial in 0..500 {
        let n = 1 + trial % 6;
        let (m, k) = criterion_candidate(&mut r, n);
        let lm = L1Matrix::new(m.clone()).unwrap();
        let crit = satisfies_tkk(&lm, k, 1e-12);
        accepted += crit as usize;
        assert_eq!(crit, generators_preserved(&m, k, 1e-12), "{m} k={k}");
    }
    assert!(accepted > 50 && accepted < 450);
}

/// `S + R` moved to index `k` by swapping coordinates `0` and `k`.
fn certified_at(r: &mut SeededRng, n: usize, k: usize) -> DMatrix<f64> {
    let raw = random::normal_matrix(r, n, n);
    let norm = L1Matrix::new(raw.clone()).unwrap().norm();
    let mut m = raw * (r.random_range(0.0..0.199) / norm);
    m[(0, 0)] += 1.0;
    let mut p = DMatrix::<f64>::identity(n, n);
    p.swap_rows(0, k);
    &p * m * &p
}

#[test]
fn preserving_matrices_form_a_cone_and_semigroup() {
    let mut r = random::rng(59);
    for trial in 0..300 {
        let n = 1 + trial % 6;
        let k = r.random_range(0..n);
        let a = certified_at(&mut r, n, k);
        let b = certified_at(&mut r, n, k);
        assert!(generators_preserved(&a, k, 1e-12) && generators_preserved(&b, k, 1e-12));
        let c = r.random_range(0.0..5.0);
        for m in [&a + &b, &a * c, &a * &b] {
            assert!(generators_preserved(&m, k, 1e-12));
            assert!(satisfies_tkk(&L1Matrix::new(m).unwrap(), k, 1e-12));
        }
    }
}

#[test]
fn fifth_ball_lies_inside() {
    let mut r = random::rng(61);
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let raw = random::normal_matrix(&mut r, n, n);
        let norm = L1Matrix::new(raw.clone()).unwrap().norm();
        let radius = if trial % 4 == 0 { 0.199 } else { r.random_range(0.0..0.199) };
        let rm = L1Matrix::new(raw * (radius / norm)).unwrap();
        assert!(interior_perturbation(&rm, 0.0).unwrap().holds);
    }
}

#[test]
fn certified_matrices_have_l1krein_eigenvectors() {
    let mut r = random::rng(67);
    for trial in 0..100 {
        let n = 1 + trial % 6;
        let k = r.random_range(0..n);
        let m = certified_at(&mut r, n, k);
        let found = find_certificate_index(&L1Matrix::new(m.clone()).unwrap(), 1e-12).unwrap();
        let op = PositiveOperator::new(
            m.clone(),
            Cone::l1_krein(n, found).unwrap(),
            common::unit(n, found),
            NormTag::L1,
            &tol(),
        )
        .unwrap();
        let p = solve_dual_eigenvector(&op, &tol(), 10_000).unwrap();
        assert!(p.residual <= 1e-8);
        assert!(op.cone().dual_contains(&p.h, &tol()).unwrap());
    }
}

#[test]
fn difference_quotients_increase_with_alpha() {
    let mut r = random::rng(71);
    for trial in 0..300 {
        let n = 1 + trial % 5;
        for norm in [NormTag::Linf, NormTag::L1, NormTag::L2] {
            let e = unit_apex(&mut r, n, &norm);
            let x = random::normal_vector(&mut r, n);
            let mut prev = f64::NEG_INFINITY;
            for i in (0..=26).rev() {
                let a = 2f64.powi(-i);
                let q = difference_quotient(&norm, &e, &x, a);
                let roundoff = 8.0 * f64::EPSILON * (1.0 + x.amax()) / a;
                assert!(q >= prev - roundoff, "{norm:?} {e} {x} a={a}");
                prev = q;
            }
        }
    }
}

#[test]
fn sup_norm_face_is_hereditary_additive_and_closed() {
    let mut r = random::rng(73);
    for trial in 0..1000 {
        let n = 2 + trial % 5;
        let e = unit_apex(&mut r, n, &NormTag::Linf);
        let face = krein_core::contraction::compute_face(&NormTag::Linf, &e, &tol()).unwrap();
        let sample = |r: &mut SeededRng| {
            let mut x = random::uniform_vector(r, n, 0.0, 1.0);
            for &i in face.zero_set() {
                x[i] = 0.0;
            }
            x
        };
        let x = sample(&mut r);
        let y = sample(&mut r);
        assert!(face.contains(&(&x + &y), 1e-12).unwrap());
        let below = x.map(|v| v * r.random_range(0.0..1.0));
        assert!(face.contains(&below, 1e-12).unwrap());
        // Pushing a member out of the face by eps moves the derivative by at
        // most eps.
        let out = common::unit(n, face.zero_set()[0]);
        for eps in [1e-1, 1e-2, 1e-3] {
            let d = dirder(&NormTag::Linf, &e, &(&x + &out * eps), 1e-7).unwrap();
            assert!(d <= eps + 1e-6);
        }
    }
}

fn te_instance(seed: u64, n: usize) -> (DMatrix<f64>, DVector<f64>) {
    match generate(&InstanceSpec {
        family: Family::TeContraction,
        n,
        seed,
    })
    .unwrap()
    {
        Instance::TeContraction { t, e } => (t, e),
        _ => unreachable!(),
    }
}

#[test]
fn separation_constant_on_generated_contractions() {
    for seed in 0..60u64 {
        let n = 2 + (seed as usize) % 6;
        let (t, e) = te_instance(seed, n);
        let space = MonotoneSpace::new(n, NormTag::Linf).unwrap();
        let rep = verify_face_theorem(&t, &e, &space, &tol()).unwrap();
        assert!(rep.checks.separation_min >= 1.0 / 3.0 - 1e-6);
        assert!(rep.checks.alpha_bound_min >= 2.0 / 3.0 - 1e-9);
        assert!(rep.checks.all_passed());
    }
}

#[test]
fn te_membership_matches_generator_hull() {
    let mut r = random::rng(79);
    let mut disagreements = 0;
    for trial in 0..500 {
        let n = 1 + trial % 6;
        let l1 = trial % 3 == 0;
        let norm = if l1 { NormTag::L1 } else { NormTag::Linf };
        let e = unit_apex(&mut r, n, &norm);
        let dual = build_te_dual(&e, &norm).unwrap();
        let x = random::normal_vector(&mut r, n) + &e * r.random_range(0.0..2.0);
        let m = te_membership(&x, &dual, &tol()).unwrap();
        if m.value.abs() < 1e-6 * x.amax() {
            continue;
        }
        let (hull, _) = common::in_hull(&common::te_generators(&e, l1), &x);
        disagreements += (hull != m.member) as usize;
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn te_eigenvectors_live_on_the_peak() {
    for seed in 0..40u64 {
        let n = 2 + (seed as usize) % 5;
        let (t, e) = te_instance(seed, n);
        let p = solve_te_eigenvector(&t, &e, &NormTag::Linf, &tol(), 10_000).unwrap();
        assert!(p.h.min() >= -1e-9);
        assert!((p.h.dot(&e) - p.h.abs().sum()).abs() <= 1e-8);
        for i in 0..n {
            if e[i] < 1.0 - 1e-9 {
                assert!(p.h[i].abs() <= 1e-7, "{} {}", p.h, e);
            }
        }
    }
}

#[test]
fn positive_maps_have_density_fixed_states() {
    for family in [Family::PositiveMapKraus, Family::PositiveMapTransposeComposed] {
        for n in 1..=4 {
            let s = differential_run(family, n, 25, 0x5eed + n as u64);
            assert!(s.all_passed(), "{family} n={n}: {:?}", s.failures);
        }
    }
}

#[test]
fn adjoint_is_an_involution() {
    let mut r = random::rng(83);
    for n in 1..=4 {
        for _ in 0..10 {
            let a = random::complex_normal_matrix(&mut r, n * n, n * n);
            let phi = SuperOp::from_action(n, a).unwrap();
            let back = adjoint_superop(&adjoint_superop(&phi).unwrap()).unwrap();
            assert!((back.action() - phi.action()).camax() <= 1e-12);
        }
    }
}

fn herm(r: &mut SeededRng, n: usize) -> HermMatrix {
    HermMatrix::hermitian_part(&random::hermitian(r, n))
}

#[test]
fn eig_function_and_ky_fan_subadditivity() {
    let mut r = random::rng(89);
    for trial in 0..300 {
        let n = 1 + trial % 6;
        let x = herm(&mut r, n);
        let y = herm(&mut r, n);
        let (vals, vecs) = linalg::hermitian_eigen(x.matrix());
        let abs = vecs.clone()
            * CMatrix::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|v| Complex::new(v.abs(), 0.0))))
            * vecs.adjoint();
        let mu_abs = eig_function(&HermMatrix::hermitian_part(&abs));
        let mu = eig_function(&x);
        for (a, b) in mu_abs.values.iter().zip(&mu.values) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b));
        }
        let sum = HermMatrix::hermitian_part(&(x.matrix() + y.matrix()));
        let (ms, my) = (eig_function(&sum), eig_function(&y));
        for k in 0..=4 * n {
            let a = k as f64 * 0.37;
            assert!(ms.integral(a) <= mu.integral(a) + my.integral(a) + 1e-10);
        }
    }
}

fn random_partition(r: &mut SeededRng, n: usize) -> Vec<Vec<usize>> {
    let blocks = r.random_range(1..=n);
    let mut p: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for i in 0..n {
        let b = if i < blocks { i } else { r.random_range(0..blocks) };
        p[b].push(i);
    }
    p
}

#[test]
fn pinching_is_majorized() {
    let mut r = random::rng(97);
    for trial in 0..500 {
        let n = 1 + trial % 8;
        let x = herm(&mut r, n);
        let part = random_partition(&mut r, n);
        let rep = pinch_majorization(&x, &part).unwrap();
        assert!(rep.holds && rep.max_excess <= 1e-10, "{}", rep.max_excess);
    }
}

#[test]
fn psd_face_is_hereditary() {
    let mut r = random::rng(101);
    for trial in 0..200 {
        let n = 2 + trial % 4;
        let u = random::complex_normal_matrix(&mut r, n, n).qr().q();
        let peak = 1 + r.random_range(0..n - 1);
        let d: Vec<f64> = (0..n)
            .map(|i| if i < peak { 1.0 } else { r.random_range(0.0..0.8) })
            .collect();
        let e = HermMatrix::hermitian_part(&(&u * HermMatrix::diagonal(&d).matrix() * u.adjoint()));
        // y = sum w w* over vectors orthogonal to the peak space.
        let ws: Vec<DVector<Complex<f64>>> = (0..3)
            .map(|_| {
                let c = random::complex_normal_vector(&mut r, n - peak);
                u.columns(peak, n - peak) * c
            })
            .collect();
        let y = ws.iter().fold(CMatrix::zeros(n, n), |acc, w| acc + w * w.adjoint());
        let x = ws.iter().fold(CMatrix::zeros(n, n), |acc, w| {
            acc + w * w.adjoint() * Complex::new(r.random_range(0.0..1.0), 0.0)
        });
        let (y, x) = (HermMatrix::hermitian_part(&y), HermMatrix::hermitian_part(&x));
        assert!(HermMatrix::hermitian_part(&(y.matrix() - x.matrix())).min_eigenvalue() >= -1e-10);
        assert!(face_psd(&e, &y, 1e-9, 1e-7).unwrap().member);
        assert!(face_psd(&e, &x, 1e-9, 1e-7).unwrap().member);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), idx in 0usize..6, n in 2usize..5) {
        let family = Family::ALL[idx];
        let spec = InstanceSpec { family, n, seed };
        let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn summaries_are_reproducible_and_merge(seed in any::<u64>(), idx in 0usize..6) {
        let family = Family::ALL[idx];
        let s1 = differential_run(family, 3, 6, seed);
        let s2 = differential_run(family, 3, 6, seed);
        prop_assert_eq!(&s1, &s2);
        let mut left = s1.clone();
        let right_records = left.records.split_off(2);
        let mut right = s1.clone();
        right.records = right_records;
        // Merging the two halves in either order gives back the whole.
        let ab = krein_core::oracle::Summary::merge(left.clone(), right.clone());
        let ba = krein_core::oracle::Summary::merge(right, left);
        prop_assert_eq!(&ab, &s1);
        prop_assert_eq!(&ba, &s1);
    }

    #[test]
    fn nonnegative_instances_have_dual_orthant_eigenvectors(seed in any::<u64>(), n in 1usize..10) {
        let t = match generate(&InstanceSpec { family: Family::NonnegOrthant, n, seed }).unwrap() {
            Instance::NonnegOrthant { t } => t,
            _ => unreachable!(),
        };
        let e = DVector::from_element(n, 1.0);
        let spec = dense_dual_eigs(&t).unwrap();
        prop_assert!(spec.dual_cone_witness(&Cone::orthant(n), &e, &tol()).unwrap().is_some());
        let p = solve_dual_eigenvector(&orthant_op(t), &tol(), 10_000).unwrap();
        prop_assert!(spec.has_real(p.lambda, 1e-6));
    }

    #[test]
    fn eigenpair_json_round_trips(seed in any::<u64>(), n in 1usize..6) {
        let mut r = random::rng(seed);
        let p = solve_dual_eigenvector(&orthant_op(positive(&mut r, n)), &tol(), 10_000).unwrap();
        let j = EigenpairJson::from(&p);
        let text = serde_json::to_string(&j).unwrap();
        let back: EigenpairJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, j);
        let v = io::vector_to_json(&p.h);
        prop_assert_eq!(io::vector_from_json(&v).unwrap(), p.h);
    }
}
