//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Reference values are computed here independently of the library where
//! practical: closed forms and nalgebra eigensolvers.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use serde_json::Value;
use tfock_core::ergodic::{
    cesaro_decay_curve, commutant_dimension, commutant_dimension_dense, decay_slope,
    full_space_fixed_points, norm_report, r_equals_a_check, sample_cesaro_specs, simplex_check,
    BoundForm, CommutantConfig, GeneratorFamily, DEFAULT_NORM_TOL,
};
use tfock_core::fock::position;
use tfock_core::spectral::cauchy::{cauchy_cfrac_truncated, cauchy_hierarchy, cauchy_rational};
use tfock_core::spectral::measure::{
    residue_weight, truncated_measure, vacuum_polynomial_residual,
};
use tfock_core::spectral::spectrum::{
    full_jacobi_top_eigenvalue, moments_check, spectrum_truncated,
};
use tfock_core::wick::{
    extreme_state, fixed_point_expectation, invariant_state_eval, normal_order, sample_monomials,
    soundness, RewriteSystem,
};
use tfock_core::{Complex64, FockVector, Generator, ModelParams, Monomial};

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

const SEED: u64 = 7;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn tfock(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tfock"))
        .args(args)
        .env_remove("TFOCK_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| v.to_string().parse().unwrap())
}

/// Jacobi matrix with zero diagonal and off-diagonal `√β_k`, `β = (1, t, t, …)`.
fn jacobi(size: usize, t: f64) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i.abs_diff(j) == 1 {
            if i.min(j) == 0 {
                1.0
            } else {
                t.sqrt()
            }
        } else {
            0.0
        }
    })
}

/// Atoms and weights of the vacuum measure from a dense eigensolver.
fn reference_measure(m: usize, t: f64) -> Vec<(f64, f64)> {
    let eig = SymmetricEigen::new(jacobi(m + 1, t));
    let mut atoms: Vec<(f64, f64)> = (0..=m)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms
}

fn sorted_union(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        if out.last().is_none_or(|&y| (x - y).abs() > tol) {
            out.push(x);
        }
    }
    out
}

/// Eigenvalues of a real symmetric sparse matrix, found by splitting it into
/// connected components and diagonalizing each one densely.
fn component_eigenvalues(cols: &[Vec<(usize, Complex64)>]) -> Vec<f64> {
    let d = cols.len();
    let mut seen = vec![false; d];
    let mut out = Vec::with_capacity(d);
    for root in 0..d {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut members = vec![root];
        let mut k = 0;
        while k < members.len() {
            for &(r, _) in &cols[members[k]] {
                if !seen[r] {
                    seen[r] = true;
                    members.push(r);
                }
            }
            k += 1;
        }
        let local = |g: usize| members.iter().position(|&x| x == g).unwrap();
        let mut block = DMatrix::<f64>::zeros(members.len(), members.len());
        for (j, &c) in members.iter().enumerate() {
            for &(r, v) in &cols[c] {
                block[(local(r), j)] = v.re;
            }
        }
        out.extend(SymmetricEigen::new(block).eigenvalues.iter());
    }
    out
}

fn c1_measure_closed_forms() -> Outcome {
    for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
        let out = tfock(&["measure", "--m", "1", "--t", &t.to_string()]);
        ensure(out.status.success(), || {
            format!("measure --m 1 --t {t} exited {:?}", out.status.code())
        })?;
        let v: Value = serde_json::from_slice(&out.stdout).map_err(e)?;
        let atoms = v["atoms"].as_array().ok_or("no atoms")?;
        ensure(atoms.len() == 2, || format!("t={t}: {} atoms", atoms.len()))?;
        for (a, z) in atoms.iter().zip([-1.0, 1.0]) {
            let (az, ab) = (num(&a["z"]), num(&a["b"]));
            ensure((az - z).abs() <= 1e-12 && (ab - 0.5).abs() <= 1e-12, || {
                format!("t={t}: atom ({az}, {ab})")
            })?;
        }
    }
    let mut worst = 0.0f64;
    for m in 1..=10usize {
        let out = tfock(&["measure", "--m", &m.to_string(), "--t", "1"]);
        let v: Value = serde_json::from_slice(&out.stdout).map_err(e)?;
        let atoms = v["atoms"].as_array().ok_or("no atoms")?;
        ensure(atoms.len() == m + 1, || {
            format!("m={m}: {} atoms", atoms.len())
        })?;
        let d = (m + 2) as f64;
        for (a, k) in atoms.iter().zip((1..=m + 1).rev()) {
            let th = k as f64 * PI / d;
            worst = worst
                .max((num(&a["z"]) - 2.0 * th.cos()).abs())
                .max((num(&a["b"]) - 2.0 * th.sin().powi(2) / d).abs());
        }
    }
    ensure(worst <= 1e-10, || {
        format!("t=1 closed form off by {worst:.3e}")
    })?;
    Ok(format!(
        "Bernoulli exact at m=1; t=1 cosine atoms within {worst:.1e}"
    ))
}

fn c2_dual_path() -> Outcome {
    let (mut gap, mut eig_gap, mut residual) = (0.0f64, 0.0f64, 0.0f64);
    for m in 1..=12 {
        for t in [0.1, 0.25, 0.5, 1.0, 2.0, 10.0] {
            let mu = truncated_measure(m, t).map_err(e)?;
            let reference = reference_measure(m, t);
            for (a, (z, b)) in mu.atoms.iter().zip(&reference) {
                gap = gap.max((residue_weight(m, t, a.z) - b).abs());
                eig_gap = eig_gap.max((a.z - z).abs()).max((a.b - b).abs());
                residual = residual.max(vacuum_polynomial_residual(m, t, a.z));
            }
        }
    }
    ensure(gap <= 1e-9 && eig_gap <= 1e-9, || {
        format!("residue/eigenvector gap {gap:.3e}, atoms {eig_gap:.3e}")
    })?;
    ensure(residual <= 1e-8, || {
        format!("polynomial residual {residual:.3e}")
    })?;
    Ok(format!(
        "weight gap {gap:.1e}, polynomial residual {residual:.1e}"
    ))
}

fn c3_moments() -> Outcome {
    let (mut worst, mut odd) = (0.0f64, 0.0f64);
    for m in 1..=4 {
        for t in [0.25, 1.0, 4.0] {
            let report = moments_check(m, t, 8).map_err(e)?;
            // Operator side recomputed directly; measure side from the dense eigensolver.
            let params = ModelParams::new(t, m, 8).map_err(e)?;
            let omega = FockVector::vacuum(&params);
            let mut v = omega.clone();
            let reference = reference_measure(m, t);
            for n in 0..=8i32 {
                if n > 0 {
                    v = v.apply_position(0).map_err(e)?;
                }
                let op = tfock_core::fock::inner_product(&v, &omega).map_err(e)?;
                let meas: f64 = reference.iter().map(|(z, b)| b * z.powi(n)).sum();
                let lib = &report.rows[n as usize];
                worst = worst
                    .max((op.re - meas).abs() / meas.abs().max(1.0))
                    .max((lib.operator - meas).abs() / meas.abs().max(1.0))
                    .max(op.im.abs());
                if n % 2 == 1 {
                    odd = odd.max(op.norm()).max(lib.measure.abs());
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("moment gap {worst:.3e}"))?;
    ensure(odd < 1e-12, || format!("odd moment {odd:.3e}"))?;
    Ok(format!(
        "moments n <= 8 agree within {worst:.1e}; odd moments {odd:.1e}"
    ))
}

fn c4_spectrum() -> Outcome {
    let mut summary = Vec::new();
    for m in 1..=3usize {
        for t in [0.25f64, 1.0, 2.0] {
            let params = ModelParams::new(t, m, m as i64 + 3).map_err(e)?;
            let x = position(1, &params).map_err(e)?;
            let window = sorted_union(
                component_eigenvalues(&x.orthonormal_columns().map_err(e)?),
                1e-8,
            );
            // √t z over the t = 1 support for every lower level, plus 0 and the vacuum atoms.
            let mut formula: Vec<f64> = reference_measure(m, t).iter().map(|a| a.0).collect();
            for k in 1..m {
                let d = (k + 2) as f64;
                formula.extend((1..=k + 1).map(|j| t.sqrt() * 2.0 * (j as f64 * PI / d).cos()));
            }
            formula.push(0.0);
            let formula = sorted_union(formula, 1e-8);
            ensure(window.len() == formula.len(), || {
                format!("m={m}, t={t}: {} vs {} points", window.len(), formula.len())
            })?;
            for (a, b) in window.iter().zip(&formula) {
                ensure((a - b).abs() <= 1e-8, || {
                    format!("m={m}, t={t}: {a} vs {b}")
                })?;
            }
            let lib = spectrum_truncated(m, t).map_err(e)?;
            let lib = lib.points().ok_or("library spectrum not finite")?;
            ensure(
                lib.len() == formula.len()
                    && lib.iter().zip(&formula).all(|(a, b)| (a - b).abs() <= 1e-8),
                || format!("m={m}, t={t}: library union {lib:?}"),
            )?;
            let support = truncated_measure(m, t).map_err(e)?.support();
            ensure(
                support.len() == m + 1 && support.len() < window.len(),
                || {
                    format!(
                        "m={m}, t={t}: |supp| = {}, |σ| = {}",
                        support.len(),
                        window.len()
                    )
                },
            )?;
            if t == 1.0 {
                summary.push(format!("m={m}: {}<{}", support.len(), window.len()));
            }
        }
    }
    Ok(format!(
        "window eigenvalues equal the union formula; {}",
        summary.join(", ")
    ))
}

fn c5_outlier() -> Outcome {
    let mut parts = Vec::new();
    for t in [0.1f64, 0.25, 0.4] {
        let top = full_jacobi_top_eigenvalue(t, 200).map_err(e)?;
        let dense = SymmetricEigen::new(jacobi(200, t)).eigenvalues.max();
        let target = 1.0 / (1.0 - t).sqrt();
        ensure(
            (top - target).abs() <= 1e-6 && (dense - target).abs() <= 1e-6,
            || format!("t={t}: {top} vs {target}"),
        )?;
        parts.push(format!("{:.1e}", (top - target).abs()));
    }
    for t in [0.5f64, 1.0, 2.0] {
        let top = full_jacobi_top_eigenvalue(t, 200).map_err(e)?;
        let target = 2.0 * t.sqrt();
        ensure((top - target).abs() <= 1e-3, || {
            format!("t={t}: {top} vs {target}")
        })?;
        parts.push(format!("{:.1e}", (top - target).abs()));
    }
    Ok(format!("top-eigenvalue gaps {}", parts.join(", ")))
}

fn c6_cauchy() -> Outcome {
    let mut worst = 0.0f64;
    for m in 1..=6 {
        for t in [0.5, 1.0, 2.0] {
            let mu = truncated_measure(m, t).map_err(e)?;
            let reference = reference_measure(m, t);
            for i in 0..10 {
                for j in 0..10 {
                    let z = Complex64::new(-3.0 + 6.0 * i as f64 / 9.0, 0.1 + 1.9 * j as f64 / 9.0);
                    let direct: Complex64 = reference.iter().map(|(x, b)| *b / (z - *x)).sum();
                    let r = cauchy_rational(&mu, z).map_err(e)?;
                    let c = cauchy_cfrac_truncated(m, t, z).map_err(e)?;
                    let h = cauchy_hierarchy(m, t, z).map_err(e)?;
                    worst = worst
                        .max((r - c).norm())
                        .max((r - h).norm())
                        .max((direct - c).norm());
                }
            }
        }
    }
    ensure(worst <= 1e-10, || {
        format!("evaluators disagree by {worst:.3e}")
    })?;
    Ok(format!("100 strip points agree within {worst:.1e}"))
}

fn c7_wick() -> Outcome {
    let (mut worst, mut steps) = (0.0f64, 0usize);
    for (k, w) in sample_monomials(200, 6, 1, 3, SEED).iter().enumerate() {
        let m = 1 + k % 3;
        let t = [0.3, 1.0, 2.5][k / 3 % 3];
        let w = Monomial::new(
            w.factors
                .iter()
                .map(|g| match *g {
                    Generator::Projection(h) => Generator::Projection(h.min(m)),
                    g => g,
                })
                .collect(),
        );
        let params = ModelParams::new(t, m, 1).map_err(e)?;
        let r = soundness(&RewriteSystem::new(&params), &w, &params).map_err(e)?;
        ensure(r.holds(1e-12), || {
            format!(
                "'{w}' (m={m}, t={t}): gap {:.3e}, steps {}/{}",
                r.max_diff, r.steps, r.step_bound
            )
        })?;
        worst = worst.max(r.max_diff);
        steps = steps.max(r.steps);
    }
    Ok(format!(
        "200 monomials within {worst:.1e}; max steps {steps}"
    ))
}

fn c8a_norm_bound() -> Outcome {
    let specs = sample_cesaro_specs(50, (0.1, 4.0), SEED).map_err(e)?;
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for (k, spec) in specs.iter().enumerate() {
        let r =
            norm_report(spec, BoundForm::SqrtNt, DEFAULT_NORM_TOL, SEED + k as u64).map_err(e)?;
        worst = worst.max(r.ratio);
        if !r.holds() {
            violations.push(format!(
                "'{}' n={} t={:.3} m={}: {:.4} > {:.4}",
                spec.word, spec.n, spec.params.t, spec.params.m, r.measured_norm, r.bound
            ));
        }
    }
    ensure(violations.is_empty(), || {
        format!(
            "{}/50 configurations exceed sqrt(nt)*max(1,sqrt t)^(len-1); first: {}",
            violations.len(),
            violations[0]
        )
    })?;
    Ok(format!("50 configurations, max ratio {worst:.4}"))
}

fn c8b_decay() -> Outcome {
    let params = ModelParams::new(1.0, 1, 256).map_err(e)?;
    let ns: Vec<usize> = (2..=8).map(|p| 1usize << p).collect();
    let word: Monomial = "c0".parse().map_err(e)?;
    let curve = cesaro_decay_curve(&word, &params, &ns, DEFAULT_NORM_TOL, SEED).map_err(e)?;
    for p in &curve.points {
        // ‖(1/n) Σ a†_k‖ = ‖(1/n) Σ a†_k Ω‖ = 1/√n at t = 1.
        ensure((p.norm - 1.0 / (p.n as f64).sqrt()).abs() <= 1e-8, || {
            format!("n={}: {}", p.n, p.norm)
        })?;
    }
    let slope = decay_slope(&curve.points).map_err(e)?;
    ensure((slope + 0.5).abs() <= 0.05, || format!("slope {slope}"))?;
    Ok(format!("slope {slope:.6} on n = 4..256"))
}

fn c9_fixed_points() -> Outcome {
    for m in 1..=3usize {
        let params = ModelParams::new(0.6, m, 1).map_err(e)?;
        for w in sample_monomials(60, 6, 1, m, SEED + m as u64) {
            let ex = fixed_point_expectation(&normal_order(&w, &params).map_err(e)?);
            ensure(ex.projection_coefficients().is_some(), || {
                format!("E('{w}') = {ex} outside span of P_h")
            })?;
        }
        for i in 0..=m {
            for j in 0..=m {
                let p = Monomial::new(vec![Generator::Projection(j)]);
                let v = invariant_state_eval(&extreme_state(i, m), &p, &params).map_err(e)?;
                let target = if i == j { 1.0 } else { 0.0 };
                ensure((v.re - target).abs() == 0.0 && v.im == 0.0, || {
                    format!("m={m}: ω_{i}(P_{j}) = {v}")
                })?;
            }
        }
    }
    let s = simplex_check(4, 25, SEED).map_err(e)?;
    ensure(s.extreme_rank == 5 && s.recovery_gap < 1e-14, || {
        format!("{s:?}")
    })?;
    let words: Vec<Monomial> = ["a1 c1", "c1", "a1 a2 c2 c1", "a1 c2", "a1 c1 a1 c1"]
        .iter()
        .map(|s| s.parse().map_err(e))
        .collect::<Result<_, _>>()?;
    for t in [0.5, 1.0, 2.0] {
        let r = full_space_fixed_points(t, 8, &words).map_err(e)?;
        ensure(r.range_ok(1e-12), || format!("t={t}: {r:?}"))?;
        let scalar = r.rows.iter().all(|row| row.scalar);
        ensure(scalar == (t == 1.0), || {
            format!("t={t}: scalars only = {scalar}")
        })?;
    }
    Ok(
        "E onto span{P_0..P_m}; ω_i(P_j) = δ_ij; full space span{P_Ω, I-P_Ω}, scalars at t=1"
            .into(),
    )
}

fn c10_irreducibility() -> Outcome {
    let mut worst = 0.0f64;
    for (m, t, l) in [(1, 0.5, 1), (2, 0.3, 2), (3, 2.0, 2), (3, 0.7, 1)] {
        let params = ModelParams::new(t, m, l).map_err(e)?;
        let modes: Vec<i64> = (-l..=l).collect();
        let r = r_equals_a_check(&params, &modes).map_err(e)?;
        worst = worst.max(r.max_diff).max(r.max_adjoint_diff);
    }
    ensure(worst <= 1e-12, || format!("a = Σ P x P off by {worst:.3e}"))?;
    for (m, l) in [(1usize, 1i64), (2, 1), (1, 2)] {
        let params = ModelParams::new(0.7, m, l).map_err(e)?;
        let config = CommutantConfig {
            params,
            family: GeneratorFamily::All,
            depth: m + 1,
        };
        let sparse = commutant_dimension(&config).map_err(e)?.dimension;
        let dense = commutant_dimension_dense(&config).map_err(e)?;
        ensure(sparse == 1 && dense == 1, || {
            format!("(m, L) = ({m}, {l}): dimension {sparse} / dense {dense}")
        })?;
    }
    Ok(format!(
        "a = Σ P x P within {worst:.1e}; commutant dimension 1 for (1,1), (2,1), (1,2)"
    ))
}

fn c11_negative_control() -> Outcome {
    let clean = tfock(&["check", "--suite", "wick", "--seed", "7"]);
    ensure(clean.status.code() == Some(0), || {
        format!("unmutated wick suite exited {:?}", clean.status.code())
    })?;
    let out = tfock(&[
        "check",
        "--suite",
        "wick",
        "--seed",
        "7",
        "--mutation",
        "contraction-t",
    ]);
    ensure(out.status.code() == Some(1), || {
        format!("mutated wick suite exited {:?}", out.status.code())
    })?;
    let failed = String::from_utf8_lossy(&out.stderr)
        .lines()
        .filter(|l| l.starts_with("FAIL"))
        .count();
    Ok(format!(
        "mutation t -> t+0.01 exits 1 with {failed} failing checks"
    ))
}

// The mutation also has a library-level witness: the perturbed system must
// disagree with the operator matrices on `a1 c1`.
fn mutation_witness() -> Result<(), String> {
    let params = ModelParams::new(0.7, 2, 1).map_err(e)?;
    let w: Monomial = "a1 c1".parse().map_err(e)?;
    let r = soundness(
        &RewriteSystem::new(&params).with_contraction_perturbation(0.01),
        &w,
        &params,
    )
    .map_err(e)?;
    ensure(!r.holds(1e-12), || "perturbed rewrite still sound".into())
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            "1",
            "measure closed forms",
            Duration::from_secs(1),
            c1_measure_closed_forms,
        ),
        (
            "2",
            "dual-path agreement",
            Duration::from_secs(5),
            c2_dual_path,
        ),
        ("3", "moment identity", Duration::from_secs(10), c3_moments),
        ("4", "spectrum union", Duration::from_secs(30), c4_spectrum),
        (
            "5",
            "full-space outlier",
            Duration::from_secs(1),
            c5_outlier,
        ),
        ("6", "Cauchy three-way", Duration::from_secs(1), c6_cauchy),
        ("7", "Wick soundness", Duration::from_secs(30), c7_wick),
        (
            "8a",
            "norm bound on random Cesaro sums",
            Duration::from_secs(120),
            c8a_norm_bound,
        ),
        (
            "8b",
            "single-creator decay slope",
            Duration::from_secs(120),
            c8b_decay,
        ),
        (
            "9",
            "fixed points and simplex",
            Duration::from_secs(1),
            c9_fixed_points,
        ),
        (
            "10",
            "R = A and irreducibility",
            Duration::from_secs(10),
            c10_irreducibility,
        ),
        ("11", "negative control", Duration::from_secs(60), || {
            mutation_witness().and_then(|_| c11_negative_control())
        }),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > budget => Err(format!("{d}; took {elapsed:.2?}, budget {budget:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {id:>3} {name} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {id:>3} {name} ({elapsed:.2?}): {detail}");
            }
        }
    }
    println!("acceptance: {failures} failing");
    if failures > 0 {
        std::process::exit(1);
    }
}
