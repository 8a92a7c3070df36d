mod common;

use std::process::ExitCode;
use std::time::Instant;

use krein_core::cone::{Cone, Tolerances};
use krein_core::contraction::{
    build_te_dual, dirder, dirder_closed_form, solve_te_eigenvector, te_membership,
    verify_face_theorem, MonotoneSpace,
};
use krein_core::krein::{common_eigenvector, solve_dual_eigenvector, CommutingFamily, PositiveOperator};
use krein_core::l1::{criterion_implies_invariance, find_certificate_index, tkk_violation, L1Matrix};
use krein_core::linalg::{self, CMatrix};
use krein_core::matrix_order::{
    adjoint_superop, fixed_state, op_norm_dirder, pinch_majorization, unit_dominates_sa_ball, HermMatrix,
};
use krein_core::oracle::{dense_dual_eigs, generate, Family, Instance, InstanceSpec};
use krein_core::random::{self, SeededRng};
use krein_core::{Error, NormTag};
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

const MAX_ITER: usize = 10_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn instance(family: Family, n: usize, seed: u64) -> Instance {
    generate(&InstanceSpec { family, n, seed }).expect("generation")
}

fn eig_residual(t: &DMatrix<f64>, h: &DVector<f64>, lambda: f64) -> f64 {
    (t.transpose() * h - h * lambda).amax()
}

fn nonnegative_eigenvectors() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let n = 1 + (seed as usize) % 20;
        let Instance::NonnegOrthant { t } = instance(Family::NonnegOrthant, n, seed) else {
            unreachable!()
        };
        let e = DVector::from_element(n, 1.0);
        let op = PositiveOperator::new(t.clone(), Cone::orthant(n), e.clone(), NormTag::Linf, &tol());
        let p = match op.and_then(|op| solve_dual_eigenvector(&op, &tol(), MAX_ITER)) {
            Ok(p) => p,
            Err(err) => {
                failures.push(format!("seed {seed}: {err}"));
                continue;
            }
        };
        let rho = linalg::spectral_radius(&t).expect("spectral radius");
        let rel = (p.lambda - rho).abs() / rho.max(f64::MIN_POSITIVE);
        let res = eig_residual(&t, &p.h, p.lambda);
        worst = worst.max(res);
        let ok = p.h.min() >= -1e-12
            && (p.h.dot(&e) - 1.0).abs() <= 1e-12
            && res <= 1e-8
            && (rho == 0.0 && p.lambda.abs() <= 1e-12 || rel <= 1e-6);
        if !ok {
            failures.push(format!("seed {seed}: lambda {} vs {rho}, residual {res}", p.lambda));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = failures.is_empty() && secs < 10.0;
    outcome(
        passed,
        format!(
            "200 instances in {secs:.2}s, worst residual {worst:.1e}, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn column_criterion_pipeline() -> Outcome {
    let mut failures = Vec::new();
    let mut max_radius = 0.0f64;
    for seed in 0..200u64 {
        let n = 1 + (seed as usize) % 12;
        let Instance::L1Krein { t, r } = instance(Family::L1kreinViaPerturbation, n, 1000 + seed) else {
            unreachable!()
        };
        let radius = L1Matrix::new(r).expect("finite").norm();
        max_radius = max_radius.max(radius);
        let m = L1Matrix::new(t.clone()).expect("finite");
        if find_certificate_index(&m, 1e-12) != Some(0) {
            failures.push(format!("seed {seed}: certificate index"));
            continue;
        }
        if !matches!(criterion_implies_invariance(&m, 0, 1e-12), Ok(true)) {
            failures.push(format!("seed {seed}: invariance"));
            continue;
        }
        let cone = Cone::l1_krein(n, 0).expect("cone");
        let op = PositiveOperator::new(t.clone(), cone.clone(), common::unit(n, 0), NormTag::L1, &tol());
        match op.and_then(|op| solve_dual_eigenvector(&op, &tol(), MAX_ITER)) {
            Ok(p) => {
                let res = eig_residual(&t, &p.h, p.lambda);
                let in_dual = cone.dual_contains(&p.h, &tol()).unwrap_or(false);
                let real = dense_dual_eigs(&t).map(|s| s.has_real(p.lambda, 1e-6)).unwrap_or(false);
                if res > 1e-8 || !in_dual || !real || (p.h[0] - 1.0).abs() > 1e-12 {
                    failures.push(format!("seed {seed}: residual {res}, dual {in_dual}, real {real}"));
                }
            }
            Err(err) => failures.push(format!("seed {seed}: {err}")),
        }
    }
    let passed = failures.is_empty() && max_radius >= 0.199 - 1e-12;
    outcome(
        passed,
        format!(
            "200 instances, largest perturbation norm {max_radius:.4}, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn face_theorem() -> Outcome {
    let mut failures = Vec::new();
    let mut sep = f64::INFINITY;
    let mut alpha = f64::INFINITY;
    for seed in 0..100u64 {
        let n = 2 + (seed as usize) % 11;
        let Instance::TeContraction { t, e } = instance(Family::TeContraction, n, 2000 + seed) else {
            unreachable!()
        };
        let space = MonotoneSpace::new(n, NormTag::Linf).expect("space");
        match verify_face_theorem(&t, &e, &space, &tol()) {
            Ok(rep) => {
                let c = &rep.checks;
                sep = sep.min(c.separation_min);
                alpha = alpha.min(c.alpha_bound_min);
                let ok = c.te_minus_e_in_face
                    && c.invariant
                    && c.e_outside
                    && c.separation_min >= 1.0 / 3.0 - 1e-6
                    && c.all_passed();
                if !ok {
                    failures.push(format!("seed {seed}: {c:?}"));
                }
            }
            Err(err) => failures.push(format!("seed {seed}: {err}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "100 instances, min separation {sep:.4}, min 2a/3 bound {alpha:.4}, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn commuting_pairs() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let n = 1 + (seed as usize) % 16;
        let Instance::CommutingPair { a, b } = instance(Family::CommutingPair, n, 3000 + seed) else {
            unreachable!()
        };
        let e = DVector::from_element(n, 1.0);
        let mk = |t: &DMatrix<f64>| {
            PositiveOperator::new(t.clone(), Cone::orthant(n), e.clone(), NormTag::Linf, &tol())
        };
        let ctol = 1e-12 * (a.norm() * b.norm()).max(1.0);
        let res = mk(&a)
            .and_then(|oa| Ok((oa, mk(&b)?)))
            .and_then(|(oa, ob)| CommutingFamily::new(vec![oa, ob], ctol))
            .and_then(|fam| common_eigenvector(&fam, &tol(), MAX_ITER));
        match res {
            Ok(c) => {
                let (la, lb) = (c.lambdas[0], c.lambdas[1]);
                let ra = eig_residual(&a, &c.h, la);
                let rb = eig_residual(&b, &c.h, lb);
                let p = la * la + la;
                let ok = ra <= 1e-8 && rb <= 1e-8 && (lb - p).abs() <= 1e-6 * p.abs().max(1.0);
                if !ok {
                    failures.push(format!("seed {seed}: residuals {ra:.1e} {rb:.1e}, {lb} vs {p}"));
                }
            }
            Err(err) => failures.push(format!("seed {seed}: {err}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!("100 pairs (T, T^2 + T), {} failures {:?}", failures.len(), failures.first()),
    )
}

fn positive_maps() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let n = 1 + (seed as usize) % 6;
        let family = if seed % 2 == 0 {
            Family::PositiveMapKraus
        } else {
            Family::PositiveMapTransposeComposed
        };
        let Instance::PositiveMap { phi } = instance(family, n, 4000 + seed) else {
            unreachable!()
        };
        match fixed_state(&phi, 1e-9, MAX_ITER) {
            Ok(s) => {
                let adj = adjoint_superop(&phi).expect("adjoint");
                let image = adj.apply(s.rho.matrix()).expect("apply");
                let res = (image - s.rho.matrix() * Complex::new(s.lambda, 0.0)).camax();
                worst = worst.max(res);
                let ok = s.rho.min_eigenvalue() >= -1e-10
                    && (s.rho.trace() - 1.0).abs() <= 1e-10
                    && res <= 1e-8;
                if !ok {
                    failures.push(format!("seed {seed}: residual {res}, min eig {}", s.rho.min_eigenvalue()));
                }
            }
            Err(err) => failures.push(format!("seed {seed}: {err}")),
        }
    }
    let ball = unit_dominates_sa_ball(8, 500, 5).unwrap_or(false);
    outcome(
        failures.is_empty() && ball,
        format!(
            "200 maps, worst residual {worst:.1e}, {} failures {:?}, unit ball domination at n=8: {ball}",
            failures.len(),
            failures.first()
        ),
    )
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

fn pinching_majorization() -> Outcome {
    let mut r = random::rng(6);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for trial in 0..500 {
        let n = 1 + trial % 8;
        let x = HermMatrix::hermitian_part(&random::hermitian(&mut r, n));
        let part = random_partition(&mut r, n);
        let rep = pinch_majorization(&x, &part).expect("valid partition");
        // Partial sums recomputed here rather than trusting the report.
        let mut excess = f64::NEG_INFINITY;
        let (mut a, mut b) = (0.0, 0.0);
        for (p, o) in rep.sigma_pinched.iter().zip(&rep.sigma_x) {
            a += p;
            b += o;
            excess = excess.max(a - b);
        }
        worst = worst.max(excess);
        failures += (excess > 1e-10 || !rep.holds) as usize;
    }
    outcome(
        failures == 0,
        format!("500 pairs, largest partial-sum excess {worst:.1e}, {failures} failures"),
    )
}

fn hypothesis_guards() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, alpha) in [(2, 1.5), (3, 2.0), (5, 1.1), (8, 3.0)] {
        let t = DMatrix::from_fn(n, n, |i, j| if j == i + 1 { alpha } else { 0.0 });
        let e = DVector::from_element(n, 1.0);
        match solve_te_eigenvector(&t, &e, &NormTag::Linf, &tol(), MAX_ITER) {
            Err(Error::Hypothesis { witness, .. }) if !witness.is_empty() => {
                // The witness is a unit vector on which the norm exceeds one.
                let w = DVector::from_vec(witness);
                let grows = w.amax() <= 1.0 + 1e-12 && (&t * &w).amax() > 1.0;
                ok &= grows;
                notes.push(format!("shift n={n} a={alpha} rejected"));
            }
            other => {
                ok = false;
                notes.push(format!("shift n={n} a={alpha}: {:?}", other.map(|p| p.lambda)));
            }
        }
    }
    let mut r = random::rng(7);
    let mut violations = 0;
    for trial in 0..100 {
        let n = 2 + trial % 6;
        let t = random::normal_matrix(&mut r, n, n) - DMatrix::identity(n, n) * 2.0;
        let m = L1Matrix::new(t.clone()).expect("finite");
        let Some(v) = tkk_violation(&m, 0, 1e-12) else { continue };
        violations += 1;
        // Recheck the witness inequality independently.
        let s = if v.sign == '+' { 1.0 } else { -1.0 };
        let lhs = t[(v.k, v.k)] + s * t[(v.k, v.j)];
        let rhs: f64 = (0..n)
            .filter(|&i| i != v.k)
            .map(|i| (t[(i, v.k)] + s * t[(i, v.j)]).abs())
            .sum();
        let x = common::unit(n, v.k) + common::unit(n, v.j) * s;
        let tx = &t * &x;
        let leaves = tx[v.k] < tx.iter().enumerate().filter(|(i, _)| *i != v.k).map(|(_, y)| y.abs()).sum::<f64>();
        let errs = matches!(
            criterion_implies_invariance(&m, 0, 1e-12),
            Err(Error::CriterionViolated { .. })
        );
        ok &= lhs < rhs && leaves && errs && v.j != v.k;
    }
    ok &= violations > 0;
    outcome(ok, format!("{}; {violations} criterion violations witnessed", notes.join(", ")))
}

fn oracle_equivalence() -> Outcome {
    let mut r = random::rng(8);
    let (mut compared, mut disagreements) = (0, 0);
    for trial in 0..500 {
        let n = 1 + trial % 6;
        let l1 = trial % 2 == 1;
        let norm = if l1 { NormTag::L1 } else { NormTag::Linf };
        let e = norm.normalize(&random::uniform_vector(&mut r, n, 0.1, 1.0));
        let dual = build_te_dual(&e, &norm).expect("dual");
        let x = random::normal_vector(&mut r, n) + &e * r.random_range(0.0..2.0);
        let m = te_membership(&x, &dual, &tol()).expect("membership");
        let (hull, resid) = common::in_hull(&common::te_generators(&e, l1), &x);
        compared += 1;
        let near_boundary = m.value.abs() <= 1e-9 * x.amax().max(1.0) || (resid - 1e-8).abs() < 1e-10;
        if hull != m.member && !near_boundary {
            disagreements += 1;
        }
    }
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = 1 + trial % 8;
        if trial % 2 == 0 {
            let e = NormTag::Linf.normalize(&random::uniform_vector(&mut r, n, 0.0, 1.0));
            let x = random::uniform_vector(&mut r, n, 0.0, 1.0);
            let d = dirder(&NormTag::Linf, &e, &x, 1e-7).expect("dirder");
            worst = worst.max((d - dirder_closed_form(&NormTag::Linf, &e, &x)).abs());
        } else {
            let u = random::complex_normal_matrix(&mut r, n, n).qr().q();
            let peak = 1 + r.random_range(0..n);
            let d: Vec<f64> = (0..n)
                .map(|i| if i < peak { 1.0 } else { r.random_range(0.0..0.8) })
                .collect();
            let e = HermMatrix::hermitian_part(&(&u * HermMatrix::diagonal(&d).matrix() * u.adjoint()));
            let x = HermMatrix::hermitian_part(&random::hermitian(&mut r, n));
            let numeric = op_norm_dirder(&e, &x, 1e-7).expect("dirder");
            // Largest eigenvalue of x compressed to the peak eigenspace.
            let v = u.columns(0, peak).into_owned();
            let compressed: CMatrix = v.adjoint() * x.matrix() * &v;
            let exact = HermMatrix::hermitian_part(&compressed).max_eigenvalue();
            worst = worst.max((numeric - exact).abs());
        }
    }
    outcome(
        disagreements == 0 && worst <= 1e-6,
        format!(
            "{compared} membership points, {disagreements} disagreements; 100 derivatives, worst gap {worst:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("nonnegative eigenvectors", nonnegative_eigenvectors),
        ("column criterion pipeline", column_criterion_pipeline),
        ("invariant face", face_theorem),
        ("commuting families", commuting_pairs),
        ("positive maps", positive_maps),
        ("pinching majorization", pinching_majorization),
        ("hypothesis guards", hypothesis_guards),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.passed;
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {}", i + 1, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
