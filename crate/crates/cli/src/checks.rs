//! Check suites run by `tfock check`.

use std::f64::consts::PI;

use rayon::prelude::*;
use tfock_core::ergodic::{
    cesaro_decay_curve, check_norm_bound, commutant_dimension, contraction_ratio, decay_slope,
    expectation_consistency, full_space_fixed_points, mean_square_limit, mean_square_test_family,
    norm_report, r_equals_a_check, sample_cesaro_specs, simplex_check, BoundForm, CommutantConfig,
    GeneratorFamily,
};
use tfock_core::spectral::cauchy::{cauchy_cfrac_truncated, cauchy_hierarchy, cauchy_rational};
use tfock_core::spectral::measure::{
    truncated_measure, truncated_measure_report, WEIGHT_AGREEMENT_TOL, ZERO_RESIDUAL_TOL,
};
use tfock_core::spectral::spectrum::{
    full_jacobi_top_eigenvalue, moments_check, strict_inclusion_check, verify_spectrum,
};
use tfock_core::wick::full::normal_order_full;
use tfock_core::wick::{
    fixed_point_expectation, sample_monomials, soundness, NormalTerm, RewriteSystem,
};
use tfock_core::{Complex64, ModelParams, Monomial, NormalForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Spectral,
    Wick,
    Ergodic,
    All,
}

/// Deliberate corruptions used as negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mutation {
    /// Contraction coefficient `t → t + 0.01` in the rewrite system.
    ContractionT,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub seed: u64,
    pub norm_tol: f64,
    pub mutation: Option<Mutation>,
}

impl CheckOptions {
    fn rewrite_system(&self, params: &ModelParams) -> RewriteSystem {
        let system = RewriteSystem::new(params);
        match self.mutation {
            Some(Mutation::ContractionT) => system.with_contraction_perturbation(0.01),
            None => system,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Note,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Note => "note",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;
type CheckFn = fn(&CheckOptions) -> Vec<(Status, String)>;

fn single(outcome: Outcome) -> Vec<(Status, String)> {
    vec![match outcome {
        Ok(d) => (Status::Pass, d),
        Err(d) => (Status::Fail, d),
    }]
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: tfock_core::Error) -> String {
    e.to_string()
}

const T_GRID: [f64; 6] = [0.1, 0.25, 0.5, 1.0, 2.0, 10.0];

fn measure_closed_forms(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let mu = truncated_measure(1, t).map_err(err)?;
            let expect = [(-1.0, 0.5), (1.0, 0.5)];
            for (a, (z, b)) in mu.atoms.iter().zip(expect) {
                ensure((a.z - z).abs() <= 1e-12 && (a.b - b).abs() <= 1e-12, || {
                    format!("m=1, t={t}: atom {a:?}")
                })?;
            }
        }
        let mut worst = 0.0f64;
        for m in 1..=10usize {
            let mu = truncated_measure(m, 1.0).map_err(err)?;
            let d = (m + 2) as f64;
            for (a, k) in mu.atoms.iter().zip((1..=m + 1).rev()) {
                let th = k as f64 * PI / d;
                worst = worst
                    .max((a.z - 2.0 * th.cos()).abs())
                    .max((a.b - 2.0 * th.sin().powi(2) / d).abs());
            }
        }
        ensure(worst <= 1e-10, || {
            format!("t=1 closed form off by {worst:e}")
        })?;
        Ok(format!(
            "m=1 Bernoulli exact; t=1 cosine atoms within {worst:.1e}"
        ))
    })())
}

fn dual_path(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let (mut gap, mut residual) = (0.0f64, 0.0f64);
        for m in 1..=12 {
            for t in T_GRID {
                let r = truncated_measure_report(m, t).map_err(|e| format!("m={m}, t={t}: {e}"))?;
                gap = gap.max(r.max_weight_gap);
                residual = residual.max(r.max_zero_residual);
            }
        }
        ensure(
            gap <= WEIGHT_AGREEMENT_TOL && residual <= ZERO_RESIDUAL_TOL,
            || format!("weight gap {gap:e}, residual {residual:e}"),
        )?;
        Ok(format!(
            "max weight gap {gap:.1e}, max polynomial residual {residual:.1e}"
        ))
    })())
}

fn moments(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let mut odd = 0.0f64;
        for m in 1..=4 {
            for t in [0.25, 1.0, 4.0] {
                let r = moments_check(m, t, 8).map_err(err)?;
                odd = odd.max(r.max_odd);
            }
        }
        ensure(odd < 1e-12, || format!("odd moment {odd:e}"))?;
        Ok(format!("n <= 8 moments agree; max odd moment {odd:.1e}"))
    })())
}

fn spectrum_oracle(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let mut blocks = 0;
        for m in 1..=3usize {
            for t in [0.25, 1.0, 2.0] {
                let v = verify_spectrum(m, t, m as i64 + 3)
                    .map_err(|e| format!("m={m}, t={t}: {e}"))?;
                blocks += v.blocks;
                strict_inclusion_check(m, t).map_err(err)?;
            }
        }
        Ok(format!(
            "window eigenvalues match the union formula ({blocks} blocks); inclusion strict"
        ))
    })())
}

fn full_outlier(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        for t in [0.1f64, 0.25, 0.4] {
            let top = full_jacobi_top_eigenvalue(t, 200).map_err(err)?;
            let target = 1.0 / (1.0 - t).sqrt();
            ensure((top - target).abs() <= 1e-6, || {
                format!("t={t}: {top} vs {target}")
            })?;
        }
        for t in [0.5f64, 1.0, 2.0] {
            let top = full_jacobi_top_eigenvalue(t, 200).map_err(err)?;
            let target = 2.0 * t.sqrt();
            ensure((top - target).abs() <= 1e-3, || {
                format!("t={t}: {top} vs {target}")
            })?;
        }
        Ok("outliers 1/sqrt(1-t) below t=1/2, band edge 2 sqrt(t) above".into())
    })())
}

/// 100 points `x + iy` with `x ∈ [−3, 3]`, `y ∈ [0.1, 2]`.
pub fn strip_points() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            out.push(Complex64::new(
                -3.0 + 6.0 * i as f64 / 9.0,
                0.1 + 1.9 * j as f64 / 9.0,
            ));
        }
    }
    out
}

fn cauchy_three_way(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let mut worst = 0.0f64;
        for m in 1..=6 {
            for t in [0.5, 1.0, 2.0] {
                let mu = truncated_measure(m, t).map_err(err)?;
                for z in strip_points() {
                    let r = cauchy_rational(&mu, z).map_err(err)?;
                    let c = cauchy_cfrac_truncated(m, t, z).map_err(err)?;
                    let h = cauchy_hierarchy(m, t, z).map_err(err)?;
                    worst = worst.max((r - c).norm()).max((r - h).norm());
                }
            }
        }
        ensure(worst <= 1e-10, || {
            format!("evaluators disagree by {worst:e}")
        })?;
        Ok(format!(
            "rational, continued fraction and hierarchy agree within {worst:.1e}"
        ))
    })())
}

fn wick_soundness(opts: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let words = sample_monomials(200, 6, 1, 3, opts.seed);
        let (mut worst, mut steps) = (0.0f64, 0usize);
        for (k, w) in words.iter().enumerate() {
            let m = 1 + k % 3;
            let t = [0.3, 1.0, 2.5][k / 3 % 3];
            let w = Monomial::new(
                w.factors
                    .iter()
                    .map(|g| match *g {
                        tfock_core::Generator::Projection(h) => {
                            tfock_core::Generator::Projection(h.min(m))
                        }
                        g => g,
                    })
                    .collect(),
            );
            let params = ModelParams::new(t, m, 1).map_err(err)?;
            let r = soundness(&opts.rewrite_system(&params), &w, &params).map_err(err)?;
            ensure(r.holds(1e-12), || {
                format!(
                    "'{w}' (m={m}, t={t}): gap {:e}, steps {}/{}",
                    r.max_diff, r.steps, r.step_bound
                )
            })?;
            worst = worst.max(r.max_diff);
            steps = steps.max(r.steps);
        }
        Ok(format!(
            "200 words sound within {worst:.1e}; max branch steps {steps}"
        ))
    })())
}

fn contraction_example(opts: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let params = ModelParams::new(0.7, 3, 1).map_err(err)?;
        let word: Monomial = "a1 c1".parse().map_err(err)?;
        let (nf, _) = opts.rewrite_system(&params).normalize(&word).map_err(err)?;
        let one = Complex64::new(1.0, 0.0);
        let expect = NormalForm::from_terms(
            3,
            [
                (NormalTerm::projection(0), one),
                (NormalTerm::projection(1), 0.7 * one),
                (NormalTerm::projection(2), 0.7 * one),
            ],
        );
        ensure(nf == expect, || format!("a1 c1 -> {nf}, expected {expect}"))?;
        Ok(format!("a1 c1 -> {nf}"))
    })())
}

fn expectation_range(opts: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        for (k, w) in sample_monomials(100, 6, 1, 2, opts.seed ^ 0x5eed)
            .iter()
            .enumerate()
        {
            let m = 2 + k % 2;
            let params = ModelParams::new(0.4 + 0.3 * (k % 5) as f64, m, 1).map_err(err)?;
            let (nf, _) = opts.rewrite_system(&params).normalize(w).map_err(err)?;
            let e = fixed_point_expectation(&nf);
            ensure(e.projection_coefficients().is_some(), || {
                format!("E('{w}') = {e} leaves span of P_h")
            })?;
            ensure(fixed_point_expectation(&e) == e, || {
                format!("E not idempotent on '{w}'")
            })?;
        }
        let s = simplex_check(4, 25, opts.seed).map_err(err)?;
        ensure(
            s.extreme_gap == 0.0 && s.extreme_rank == 5 && s.recovery_gap < 1e-14,
            || format!("{s:?}"),
        )?;
        Ok("E maps into span{P_h}, is idempotent; m+1 independent extreme states".into())
    })())
}

fn full_space(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let words: Vec<Monomial> = [
            "a1 c1",
            "c1",
            "a1",
            "a1 a2 c2 c1",
            "a1 c2",
            "c1 a1",
            "a1 c1 a1 c1",
        ]
        .iter()
        .map(|s| s.parse().map_err(err))
        .collect::<Result<_, _>>()?;
        for t in [0.3, 0.5, 1.0, 2.0] {
            let r = full_space_fixed_points(t, 8, &words).map_err(err)?;
            ensure(r.range_ok(1e-12), || format!("t={t}: {r:?}"))?;
        }
        let e = normal_order_full(&words[0], 0.5)
            .map_err(err)?
            .expectation();
        ensure(
            (e.vacuum - 1.0).norm() < 1e-15 && (e.rest - 0.5).norm() < 1e-15,
            || format!("{e:?}"),
        )?;
        Ok("full-space E spanned by P_Omega, I - P_Omega; scalars at t = 1".into())
    })())
}

fn norm_bounds(opts: &CheckOptions) -> Vec<(Status, String)> {
    let specs = match sample_cesaro_specs(50, (0.1, 4.0), opts.seed) {
        Ok(s) => s,
        Err(e) => return single(Err(err(e))),
    };
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    let mut notes = 0;
    for (k, spec) in specs.iter().enumerate() {
        let seed = opts.seed.wrapping_add(k as u64);
        let label = format!(
            "'{}' n={} t={:.4} m={}",
            spec.word, spec.n, spec.params.t, spec.params.m
        );
        match check_norm_bound(spec, BoundForm::Corrected, opts.norm_tol, seed) {
            Ok(r) => worst = worst.max(r.ratio),
            Err(e) => {
                out.push((Status::Fail, format!("{label}: {e}")));
                continue;
            }
        }
        match norm_report(spec, BoundForm::SqrtNt, opts.norm_tol, seed) {
            Ok(r) if r.holds() => {}
            Ok(r) if spec.params.t < 1.0 => {
                notes += 1;
                out.push((
                    Status::Note,
                    format!(
                        "{label}: sqrt(nt) form exceeded below t = 1 ({:.6} > {:.6})",
                        r.measured_norm, r.bound
                    ),
                ));
            }
            Ok(r) => out.push((
                Status::Fail,
                format!("{label}: {:.6} > {:.6}", r.measured_norm, r.bound),
            )),
            Err(e) => out.push((Status::Fail, format!("{label}: {e}"))),
        }
    }
    out.insert(
        0,
        (
            Status::Pass,
            format!("50 configurations; corrected-bound ratio <= {worst:.4}; {notes} notes"),
        ),
    );
    if out.iter().any(|(s, _)| *s == Status::Fail) {
        out.remove(0);
    }
    out
}

fn decay(opts: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let params = ModelParams::new(1.0, 1, 256).map_err(err)?;
        let ns: Vec<usize> = (2..=8).map(|p| 1usize << p).collect();
        let word: Monomial = "c0".parse().map_err(err)?;
        let curve =
            cesaro_decay_curve(&word, &params, &ns, opts.norm_tol, opts.seed).map_err(err)?;
        let slope = decay_slope(&curve.points).map_err(err)?;
        ensure((slope + 0.5).abs() <= 0.05, || format!("slope {slope}"))?;
        Ok(format!("single-creator decay slope {slope:.6}"))
    })())
}

fn r_equals_a(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let mut worst = 0.0f64;
        for (m, t, l) in [(1, 0.5, 1), (2, 0.3, 2), (3, 2.0, 2)] {
            let params = ModelParams::new(t, m, l).map_err(err)?;
            let modes: Vec<i64> = (-l..=l).collect();
            let r = r_equals_a_check(&params, &modes).map_err(err)?;
            worst = worst.max(r.max_diff).max(r.max_adjoint_diff);
        }
        ensure(worst <= 1e-12, || format!("identity off by {worst:e}"))?;
        Ok(format!("a = sum P x P within {worst:.1e}"))
    })())
}

fn commutant(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        for (m, l) in [(1usize, 1i64), (2, 1), (1, 2)] {
            let params = ModelParams::new(0.7, m, l).map_err(err)?;
            let all = commutant_dimension(&CommutantConfig {
                params,
                family: GeneratorFamily::All,
                depth: m + 1,
            })
            .map_err(err)?;
            ensure(all.dimension == 1, || {
                format!("(m, L) = ({m}, {l}): commutant dimension {}", all.dimension)
            })?;
        }
        for m in 1..=3usize {
            let params = ModelParams::new(0.7, m, 1).map_err(err)?;
            let p = commutant_dimension(&CommutantConfig {
                params,
                family: GeneratorFamily::ProjectionsOnly,
                depth: m + 1,
            })
            .map_err(err)?;
            ensure(p.dimension == m + 1, || {
                format!("projections only, m={m}: {}", p.dimension)
            })?;
        }
        Ok("trivial commutant on reachable interior subspaces; projections alone give m+1".into())
    })())
}

fn mean_square(_: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        for m in 1..=3 {
            let params = ModelParams::new(0.5, m, 65).map_err(err)?;
            let fam = mean_square_test_family(&params, 3).map_err(err)?;
            let a = mean_square_limit(&params, 8, &fam).map_err(err)?;
            let b = mean_square_limit(&params, 64, &fam).map_err(err)?;
            for (x, y) in a.rows.iter().zip(&b.rows) {
                ensure(y.deviation <= x.deviation + 1e-15, || {
                    format!("m={m}, {}: {} -> {}", x.vector, x.deviation, y.deviation)
                })?;
            }
        }
        Ok("mean-square averages approach P_0 + t sum P_h on the test family".into())
    })())
}

fn averaging(opts: &CheckOptions) -> Vec<(Status, String)> {
    single((|| {
        let params = ModelParams::new(0.5, 2, 40).map_err(err)?;
        for w in ["a0 c0", "c0 a1", "a0 c0 c1", "p1 a0 c0"] {
            let word: Monomial = w.parse().map_err(err)?;
            let r = expectation_consistency(&word, 32, &params, opts.seed).map_err(err)?;
            ensure(r.distance <= r.threshold + 1e-12, || {
                format!("'{w}': {r:?}")
            })?;
        }
        let params = ModelParams::new(1.7, 2, 12).map_err(err)?;
        for w in ["c0", "c0 a1", "a2 c0 c1", "c0 p1 a0", "p2"] {
            let word: Monomial = w.parse().map_err(err)?;
            let ratio = contraction_ratio(&word, 6, &params, opts.seed).map_err(err)?;
            ensure(ratio <= 1.0 + 1e-9, || {
                format!("'{w}': contraction ratio {ratio}")
            })?;
        }
        Ok("Cesaro averages approach E and are contractive".into())
    })())
}

const CHECKS: &[(Suite, &str, CheckFn)] = &[
    (
        Suite::Spectral,
        "measure_closed_forms",
        measure_closed_forms,
    ),
    (Suite::Spectral, "dual_path_weights", dual_path),
    (Suite::Spectral, "moments", moments),
    (Suite::Spectral, "spectrum_oracle", spectrum_oracle),
    (Suite::Spectral, "full_space_outlier", full_outlier),
    (Suite::Spectral, "cauchy_three_way", cauchy_three_way),
    (Suite::Wick, "normal_order_soundness", wick_soundness),
    (Suite::Wick, "contraction_example", contraction_example),
    (Suite::Wick, "expectation_and_simplex", expectation_range),
    (Suite::Wick, "full_space_expectation", full_space),
    (Suite::Ergodic, "norm_bounds", norm_bounds),
    (Suite::Ergodic, "decay_slope", decay),
    (Suite::Ergodic, "r_equals_a", r_equals_a),
    (Suite::Ergodic, "commutant", commutant),
    (Suite::Ergodic, "mean_square_limit", mean_square),
    (Suite::Ergodic, "cesaro_vs_expectation", averaging),
];

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Spectral => "spectral",
        Suite::Wick => "wick",
        Suite::Ergodic => "ergodic",
        Suite::All => "all",
    }
}

/// Runs the selected checks in parallel; results come back in table order.
pub fn run(suite: Suite, opts: &CheckOptions) -> Vec<CheckResult> {
    CHECKS
        .par_iter()
        .filter(|(s, _, _)| suite == Suite::All || *s == suite)
        .map(|&(s, name, f)| {
            f(opts)
                .into_iter()
                .map(|(status, detail)| CheckResult {
                    suite: suite_name(s),
                    name,
                    status,
                    detail,
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn suite_label(s: Suite) -> &'static str {
    suite_name(s)
}
