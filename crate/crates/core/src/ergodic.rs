//! Shift averages on the finite window: Cesàro sums and their norms, the
//! mean-square limit of `x_k²`, the `a = Σ P x P` identity, commutant
//! dimensions, the full-space fixed-point algebra and the state simplex.

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, creation, level_projection, position, FockVector, FockWord, ModelParams,
    SparseOperator,
};
use crate::linalg::{rank, spectral_norm, NormEstimate, NormMethod};
use crate::wick::full::{normal_order_full, FullExpectation};
use crate::wick::{
    extreme_state, fixed_point_expectation, invariant_state_eval, normal_order, Generator, Monomial,
};

pub const DEFAULT_NORM_TOL: f64 = 1e-8;
pub const BOUND_SLACK: f64 = 1e-9;

/// `Σ_{k=0}^{n−1} τ^k(word)` on the window of `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroSpec {
    pub word: Monomial,
    pub n: usize,
    pub params: ModelParams,
}

impl CesaroSpec {
    /// Requires `L ≥ max|i| + n` so every shifted copy fits in the window.
    pub fn new(word: Monomial, n: usize, params: ModelParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        word.validate(&params)?;
        let reach = word.max_abs_mode() + n as i64;
        if word.factors.iter().any(|g| g.mode().is_some()) && reach > params.window {
            return Err(Error::WindowOverflow {
                index: reach,
                window: params.window,
            });
        }
        Ok(Self { word, n, params })
    }

    /// No projections, and a leading creator or trailing annihilator.
    pub fn has_bound_shape(&self) -> bool {
        !self.word.has_projection()
            && (matches!(self.word.factors.first(), Some(Generator::Creator(_)))
                || matches!(self.word.factors.last(), Some(Generator::Annihilator(_))))
    }

    /// Normal-ordered `a†…a…` with at least one factor.
    pub fn is_wick_ordered(&self) -> bool {
        let f = &self.word.factors;
        !f.is_empty()
            && f.iter().all(|g| !matches!(g, Generator::Projection(_)))
            && f.windows(2).all(|p| {
                !matches!(
                    (p[0], p[1]),
                    (Generator::Annihilator(_), Generator::Creator(_))
                )
            })
    }
}

pub fn cesaro_sum(spec: &CesaroSpec) -> Result<SparseOperator> {
    let params = spec.params;
    let shifted = (0..spec.n as i64)
        .map(|k| spec.word.shifted(k, params.window))
        .collect::<Result<Vec<_>>>()?;
    SparseOperator::from_word_map(
        &params,
        format!("Σ_{{k<{}}} τ^k({})", spec.n, spec.word),
        |w| shifted.iter().filter_map(|s| s.act(w, &params)).collect(),
    )
}

/// Fock-space operator norm, computed in the orthonormalized basis.
pub fn operator_norm(op: &SparseOperator, tol: f64, seed: u64) -> Result<NormEstimate> {
    spectral_norm(&op.orthonormal_columns()?, tol, seed)
}

/// Which upper bound on `‖Σ_{k<n} τ^k(w)‖` to test, with `M = max{1, √t}`
/// and `|w|` the number of factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundForm {
    /// `√(nt)·M^{|w|−1}`.
    SqrtNt,
    /// `√(nt)·M^{2m−1}` for normal-ordered words on the truncated space.
    WickOrdered,
    /// `√n·M^{|w|}`, which also covers a creator acting on the vacuum.
    Corrected,
}

impl BoundForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundForm::SqrtNt => "sqrt-nt",
            BoundForm::WickOrdered => "wick-ordered",
            BoundForm::Corrected => "corrected",
        }
    }

    pub fn value(&self, n: usize, t: f64, len: usize, m: usize) -> f64 {
        let big = t.sqrt().max(1.0);
        let n = n as f64;
        match self {
            BoundForm::SqrtNt => (n * t).sqrt() * big.powi(len as i32 - 1),
            BoundForm::WickOrdered => (n * t).sqrt() * big.powi(2 * m as i32 - 1),
            BoundForm::Corrected => n.sqrt() * big.powi(len as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub form: BoundForm,
    pub measured_norm: f64,
    pub bound: f64,
    pub ratio: f64,
    pub method: NormMethod,
    pub iterations: usize,
}

impl NormReport {
    pub fn holds(&self) -> bool {
        self.measured_norm <= self.bound + BOUND_SLACK
    }
}

/// Measures the Cesàro sum and reports it against `form`, without failing.
pub fn norm_report(spec: &CesaroSpec, form: BoundForm, tol: f64, seed: u64) -> Result<NormReport> {
    match form {
        BoundForm::SqrtNt | BoundForm::Corrected if !spec.has_bound_shape() => {
            return Err(Error::InvalidParams(format!(
                "'{}' needs a leading creator or trailing annihilator and no projections",
                spec.word
            )))
        }
        BoundForm::WickOrdered if !spec.is_wick_ordered() => {
            return Err(Error::InvalidParams(format!(
                "'{}' is not of the form a†…a…",
                spec.word
            )))
        }
        _ => {}
    }
    let est = operator_norm(&cesaro_sum(spec)?, tol, seed)?;
    let measured = est.value * spec.word.coeff.norm();
    let bound =
        form.value(spec.n, spec.params.t, spec.word.len(), spec.params.m) * spec.word.coeff.norm();
    Ok(NormReport {
        form,
        measured_norm: measured,
        bound,
        ratio: if bound > 0.0 { measured / bound } else { 0.0 },
        method: est.method,
        iterations: est.iterations,
    })
}

/// Like [`norm_report`], but a violation beyond [`BOUND_SLACK`] is an error.
pub fn check_norm_bound(
    spec: &CesaroSpec,
    form: BoundForm,
    tol: f64,
    seed: u64,
) -> Result<NormReport> {
    let report = norm_report(spec, form, tol, seed)?;
    if !report.holds() {
        return Err(Error::Tolerance(format!(
            "{} bound violated for '{}' (n={}, t={}, m={}): {} > {}",
            form.as_str(),
            spec.word,
            spec.n,
            spec.params.t,
            spec.params.m,
            report.measured_norm,
            report.bound
        )));
    }
    Ok(report)
}

/// Random Cesàro configurations with a leading creator, `t` drawn
/// log-uniformly from `t_range`, `m ≤ 3` and windows kept small enough for
/// a quick norm computation.
pub fn sample_cesaro_specs(
    count: usize,
    t_range: (f64, f64),
    seed: u64,
) -> Result<Vec<CesaroSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (t_range.0.ln(), t_range.1.ln());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = rng.gen_range(1..=3usize);
        let t = if hi > lo {
            rng.gen_range(lo..hi).exp()
        } else {
            t_range.0
        };
        let n = match m {
            1 => rng.gen_range(1..=24usize),
            2 => rng.gen_range(1..=12),
            _ => rng.gen_range(1..=5),
        };
        let len = rng.gen_range(1..=(2 * m).min(4));
        let spread = 2i64;
        let mut factors = vec![Generator::Creator(rng.gen_range(-spread..=spread))];
        for _ in 1..len {
            let i = rng.gen_range(-spread..=spread);
            factors.push(if rng.gen_bool(0.5) {
                Generator::Creator(i)
            } else {
                Generator::Annihilator(i)
            });
        }
        let word = Monomial::new(factors);
        let params = ModelParams::new(t, m, word.max_abs_mode() + n as i64)?;
        out.push(CesaroSpec::new(word, n, params)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub n: usize,
    /// `‖(1/n) Σ_{k<n} τ^k(w)‖`.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    pub points: Vec<DecayPoint>,
    /// The word contains no creators or annihilators, so `τ` fixes it.
    pub fixed_point: bool,
}

pub fn cesaro_decay_curve(
    word: &Monomial,
    params: &ModelParams,
    n_list: &[usize],
    tol: f64,
    seed: u64,
) -> Result<DecayCurve> {
    let points = n_list
        .iter()
        .map(|&n| {
            let spec = CesaroSpec::new(word.clone(), n, *params)?;
            let est = operator_norm(&cesaro_sum(&spec)?, tol, seed)?;
            Ok(DecayPoint {
                n,
                norm: est.value / n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayCurve {
        points,
        fixed_point: word.factors.iter().all(|g| g.mode().is_none()),
    })
}

/// Least-squares slope of `ln norm` against `ln n`.
pub fn decay_slope(points: &[DecayPoint]) -> Result<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.norm > 0.0)
        .map(|p| ((p.n as f64).ln(), p.norm.ln()))
        .collect();
    if xy.len() < 2 {
        return Err(Error::InvalidParams(
            "slope needs two points with nonzero norm".into(),
        ));
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("slope needs two distinct n".into()));
    }
    Ok(xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// `(1/(2n+1)) Σ_{k=−n}^{n} x_k² v`.
pub fn mean_square_average(v: &FockVector, n: usize) -> Result<FockVector> {
    let window = v.params().window;
    if (n as i64) + 1 > window {
        return Err(Error::WindowOverflow {
            index: n as i64 + 1,
            window,
        });
    }
    let mut acc = FockVector::zero(v.params());
    for k in -(n as i64)..=(n as i64) {
        acc = acc.add(&v.apply_position(k)?.apply_position(k)?)?;
    }
    Ok(acc.scale(Complex64::new(1.0 / (2 * n + 1) as f64, 0.0)))
}

/// `(P_0 + t Σ_{h=1}^{m−1} P_h) v`.
pub fn mean_square_limit_action(v: &FockVector) -> FockVector {
    let p = *v.params();
    v.map_words(|w| {
        let c = match w.len() {
            0 => 1.0,
            h if h < p.m => p.t,
            _ => 0.0,
        };
        (c != 0.0).then(|| (Complex64::new(c, 0.0), w.clone()))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanSquareRow {
    pub vector: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanSquareReport {
    pub n: usize,
    pub rows: Vec<MeanSquareRow>,
}

/// `Ω`, `e_j` and `e_j^{⊗m}` for a fixed mode `j`.
pub fn mean_square_test_family(params: &ModelParams, j: i64) -> Result<Vec<FockVector>> {
    let mut out = vec![
        FockVector::vacuum(params),
        FockVector::word(params, FockWord::new(vec![j]))?,
    ];
    if params.m > 1 {
        out.push(FockVector::word(params, FockWord::new(vec![j; params.m]))?);
    }
    Ok(out)
}

/// Distance between the averaged action and the limit action on each vector.
pub fn mean_square_limit(
    params: &ModelParams,
    n: usize,
    vectors: &[FockVector],
) -> Result<MeanSquareReport> {
    let rows = vectors
        .iter()
        .map(|v| {
            if v.params() != params {
                return Err(Error::ParamsMismatch);
            }
            let diff = mean_square_average(v, n)?.sub(&mean_square_limit_action(v))?;
            let label = v
                .terms()
                .keys()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" + ");
            Ok(MeanSquareRow {
                vector: label,
                deviation: diff.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanSquareReport { n, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaReport {
    /// `max |a_i − Σ_k P_k x_i P_{k+1}|` entrywise over the sampled modes.
    pub max_diff: f64,
    /// Same for `a†_i` against `Σ_k P_{k+1} x_i P_k`.
    pub max_adjoint_diff: f64,
}

pub fn r_equals_a_check(params: &ModelParams, modes: &[i64]) -> Result<RaReport> {
    let projections = (0..=params.m)
        .map(|h| level_projection(h, params))
        .collect::<Result<Vec<_>>>()?;
    let mut report = RaReport {
        max_diff: 0.0,
        max_adjoint_diff: 0.0,
    };
    for &i in modes {
        let x = position(i, params)?;
        let mut lower = SparseOperator::zero(params)?;
        let mut raise = SparseOperator::zero(params)?;
        for k in 0..params.m {
            lower = lower.add(&projections[k].compose(&x)?.compose(&projections[k + 1])?)?;
            raise = raise.add(&projections[k + 1].compose(&x)?.compose(&projections[k])?)?;
        }
        report.max_diff = report
            .max_diff
            .max(annihilation(i, params)?.max_abs_diff(&lower)?);
        report.max_adjoint_diff = report
            .max_adjoint_diff
            .max(creation(i, params)?.max_abs_diff(&raise)?);
        // The adjoint of the compressed sum must be the compressed creator sum.
        report.max_adjoint_diff = report
            .max_adjoint_diff
            .max(lower.adjoint()?.max_abs_diff(&raise)?);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFamily {
    /// `a_i`, `a†_i` for interior modes and every `P_h`.
    All,
    /// Only the level projections.
    ProjectionsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutantConfig {
    pub params: ModelParams,
    pub family: GeneratorFamily,
    /// Maximal number of generator applications used to reach words from `Ω`.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutantReport {
    pub dimension: usize,
    pub reachable_dim: usize,
    pub interior_modes: Vec<i64>,
}

/// Modes `|i| < L`; for `L = 1` just `{0}`.
pub fn interior_modes(window: i64) -> Vec<i64> {
    if window <= 1 {
        vec![0]
    } else {
        (-(window - 1)..window).collect()
    }
}

fn all_generators(params: &ModelParams, modes: &[i64]) -> Vec<Generator> {
    let mut gens: Vec<Generator> = modes
        .iter()
        .flat_map(|&i| [Generator::Creator(i), Generator::Annihilator(i)])
        .collect();
    gens.extend((0..=params.m).map(Generator::Projection));
    gens
}

/// Basis words reached from `Ω` by at most `depth` generator applications.
pub fn reachable_words(params: &ModelParams, modes: &[i64], depth: usize) -> Vec<FockWord> {
    let gens = all_generators(params, modes);
    let mut seen: BTreeSet<FockWord> = BTreeSet::from([FockWord::vacuum()]);
    let mut frontier = vec![FockWord::vacuum()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                if let Some((_, image)) = g.act(w, params) {
                    if seen.insert(image.clone()) {
                        next.push(image);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen.into_iter().collect()
}

/// Generator matrices compressed to `words`, as `(row, col) → value` maps.
fn compressed(
    gens: &[Generator],
    words: &[FockWord],
    params: &ModelParams,
) -> Vec<HashMap<(usize, usize), f64>> {
    let index: HashMap<&FockWord, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    gens.iter()
        .map(|g| {
            let mut m = HashMap::new();
            for (c, w) in words.iter().enumerate() {
                if let Some((k, image)) = g.act(w, params) {
                    if let Some(&r) = index.get(&image) {
                        m.insert((r, c), k);
                    }
                }
            }
            m
        })
        .collect()
}

/// Weighted union-find over the unknowns `T_pq`: each stores its ratio to
/// the class root, and a class may be forced to zero.
struct RatioClasses {
    parent: Vec<usize>,
    ratio: Vec<f64>,
    zero: Vec<bool>,
}

impl RatioClasses {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            ratio: vec![1.0; n],
            zero: vec![false; n],
        }
    }

    /// Root of `u` and `x_u / x_root`.
    fn find(&mut self, u: usize) -> (usize, f64) {
        let p = self.parent[u];
        if p == u {
            return (u, 1.0);
        }
        let (root, r) = self.find(p);
        self.parent[u] = root;
        self.ratio[u] *= r;
        (root, self.ratio[u])
    }

    fn force_zero(&mut self, u: usize) {
        let (root, _) = self.find(u);
        self.zero[root] = true;
    }

    /// Imposes `α x_u = β x_v`.
    fn relate(&mut self, u: usize, alpha: f64, v: usize, beta: f64) {
        let (ru, pu) = self.find(u);
        let (rv, pv) = self.find(v);
        if ru == rv {
            // α pu x_r = β pv x_r: consistent only if the coefficients match.
            let (a, b) = (alpha * pu, beta * pv);
            if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
                self.zero[ru] = true;
            }
            return;
        }
        // x_ru = (β pv / (α pu)) x_rv
        self.parent[ru] = rv;
        self.ratio[ru] = beta * pv / (alpha * pu);
        self.zero[rv] |= self.zero[ru];
    }

    fn free_classes(&mut self) -> usize {
        let n = self.parent.len();
        (0..n)
            .filter(|&u| self.find(u).0 == u && !self.zero[u])
            .count()
    }
}

/// Dimension of `{T : T A = A T}` for the chosen generator family, on the
/// subspace reachable from `Ω` through interior-mode generators.
///
/// Every generator acts on basis words as a partial monomial matrix (at
/// most one entry per row and per column), so each entry of `TA − AT`
/// involves at most two unknowns and the solution space is counted by
/// merging unknowns into proportionality classes.
pub fn commutant_dimension(config: &CommutantConfig) -> Result<CommutantReport> {
    let params = &config.params;
    let modes = interior_modes(params.window);
    let words = reachable_words(params, &modes, config.depth);
    let gens = match config.family {
        GeneratorFamily::All => all_generators(params, &modes),
        GeneratorFamily::ProjectionsOnly => (0..=params.m).map(Generator::Projection).collect(),
    };
    let d = words.len();
    let mats = compressed(&gens, &words, params);
    let mut classes = RatioClasses::new(d * d);
    let var = |p: usize, q: usize| p * d + q;
    for a in &mats {
        let mut col_of_row: Vec<Option<(usize, f64)>> = vec![None; d];
        let mut row_of_col: Vec<Option<(usize, f64)>> = vec![None; d];
        for (&(r, c), &v) in a {
            col_of_row[r] = Some((c, v));
            row_of_col[c] = Some((r, v));
        }
        // (TA)_pq = T_{p r} A_{r q} with r the row hit by column q;
        // (AT)_pq = A_{p s} T_{s q} with s the column feeding row p.
        for (p, &feeds_p) in col_of_row.iter().enumerate() {
            for (q, &hit_by_q) in row_of_col.iter().enumerate() {
                match (hit_by_q, feeds_p) {
                    (None, None) => {}
                    (Some((r, _)), None) => classes.force_zero(var(p, r)),
                    (None, Some((s, _))) => classes.force_zero(var(s, q)),
                    (Some((r, alpha)), Some((s, beta))) => {
                        classes.relate(var(p, r), alpha, var(s, q), beta)
                    }
                }
            }
        }
    }
    Ok(CommutantReport {
        dimension: classes.free_classes(),
        reachable_dim: d,
        interior_modes: modes,
    })
}

/// Dense cross-check of [`commutant_dimension`] by Gaussian elimination on
/// the full `d² × d²` system; only for tiny instances.
pub fn commutant_dimension_dense(config: &CommutantConfig) -> Result<usize> {
    let params = &config.params;
    let modes = interior_modes(params.window);
    let words = reachable_words(params, &modes, config.depth);
    let gens = match config.family {
        GeneratorFamily::All => all_generators(params, &modes),
        GeneratorFamily::ProjectionsOnly => (0..=params.m).map(Generator::Projection).collect(),
    };
    let d = words.len();
    if d > 24 {
        return Err(Error::CapacityExceeded {
            dim: (d * d) as u128,
            cap: 576,
        });
    }
    let mut rows = Vec::new();
    for a in compressed(&gens, &words, params) {
        let dense = |r: usize, c: usize| a.get(&(r, c)).copied().unwrap_or(0.0);
        for p in 0..d {
            for q in 0..d {
                let mut row = vec![0.0; d * d];
                for r in 0..d {
                    row[p * d + r] += dense(r, q);
                    row[r * d + q] -= dense(p, r);
                }
                if row.iter().any(|x| *x != 0.0) {
                    rows.push(row);
                }
            }
        }
    }
    Ok(d * d - rank(rows, d * d, 1e-12))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullFixedPointRow {
    pub word: String,
    pub expectation: FullExpectation,
    pub scalar: bool,
    /// Largest gap between the full-space coefficients and the truncated
    /// expectation on the proxy, over the levels the proxy resolves.
    pub proxy_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullFixedPointReport {
    pub t: f64,
    pub m_proxy: usize,
    pub rows: Vec<FullFixedPointRow>,
}

impl FullFixedPointReport {
    /// Every expectation lies in `span{P_Ω, I − P_Ω}` by construction; for
    /// `t = 1` they must all be scalars.
    pub fn range_ok(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.proxy_gap <= tol)
            && ((self.t - 1.0).abs() > tol || self.rows.iter().all(|r| r.scalar))
    }
}

/// Expectations of full-space words, each compared with the truncated
/// expectation on `m_proxy`, whose level-`h` coefficient must agree with the
/// full one whenever `h + |w| ≤ m_proxy`.
pub fn full_space_fixed_points(
    t: f64,
    m_proxy: usize,
    words: &[Monomial],
) -> Result<FullFixedPointReport> {
    if m_proxy < 1 {
        return Err(Error::InvalidParams("m_proxy must be at least 1".into()));
    }
    let rows = words
        .iter()
        .map(|w| {
            let e = normal_order_full(w, t)?.expectation();
            let params = ModelParams::new(t, m_proxy, w.max_abs_mode().max(1))?;
            let coeffs = fixed_point_expectation(&normal_order(w, &params)?)
                .projection_coefficients()
                .expect("expectation is a combination of projections");
            let mut gap = 0.0f64;
            for (h, c) in coeffs
                .iter()
                .enumerate()
                .take(m_proxy.saturating_sub(w.len()) + 1)
            {
                let full = if h == 0 { e.vacuum } else { e.rest };
                gap = gap.max((c - full).norm());
            }
            Ok(FullFixedPointRow {
                word: w.to_string(),
                expectation: e,
                scalar: e.is_scalar(1e-12),
                proxy_gap: gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FullFixedPointReport { t, m_proxy, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexReport {
    /// `max |ω_i(P_j) − δ_ij|`.
    pub extreme_gap: f64,
    /// Rank of the matrix `[ω_i(P_j)]`.
    pub extreme_rank: usize,
    /// Largest error when reading random barycentric weights back off `P_j`.
    pub recovery_gap: f64,
}

pub fn simplex_check(m: usize, samples: usize, seed: u64) -> Result<SimplexReport> {
    let params = ModelParams::new(1.0, m, 1)?;
    let proj = |j| Monomial::new(vec![Generator::Projection(j)]);
    let mut table = Vec::new();
    let mut extreme_gap = 0.0f64;
    for i in 0..=m {
        let w = extreme_state(i, m);
        let row = (0..=m)
            .map(|j| invariant_state_eval(&w, &proj(j), &params).map(|z| z.re))
            .collect::<Result<Vec<_>>>()?;
        for (j, v) in row.iter().enumerate() {
            extreme_gap = extreme_gap.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
        table.push(row);
    }
    let extreme_rank = rank(table, m + 1, 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recovery_gap = 0.0f64;
    for _ in 0..samples {
        let raw: Vec<f64> = (0..=m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let tail: f64 = w[1..].iter().sum();
        w[0] = 1.0 - tail;
        for (j, wj) in w.iter().enumerate() {
            let v = invariant_state_eval(&w, &proj(j), &params)?;
            recovery_gap = recovery_gap.max((v - wj).norm());
        }
    }
    Ok(SimplexReport {
        extreme_gap,
        extreme_rank,
        recovery_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// `‖(1/n) Σ_{k<n} τ^k(w) − E(w)‖`.
    pub distance: f64,
    /// `2 Σ_{deg>0} |c|·M^{2m}/√n`, twice the corrected bound for the
    /// non-fixed part of the normal form, divided by `n`.
    pub threshold: f64,
}

/// Compares the Cesàro average of `word` with the matrix of its symbolic
/// fixed-point expectation.
pub fn expectation_consistency(
    word: &Monomial,
    n: usize,
    params: &ModelParams,
    seed: u64,
) -> Result<ConsistencyReport> {
    let spec = CesaroSpec::new(word.clone(), n, *params)?;
    let avg = cesaro_sum(&spec)?.scale(Complex64::new(1.0 / n as f64, 0.0));
    let nf = normal_order(word, params)?;
    let e = fixed_point_expectation(&nf).to_operator(params)?;
    let distance = operator_norm(&avg.sub(&e)?, DEFAULT_NORM_TOL, seed)?.value;
    let moving: f64 = nf
        .terms()
        .filter(|(t, _)| t.degree() > 0)
        .map(|(_, c)| c.norm())
        .sum();
    let big = params.t.sqrt().max(1.0);
    let threshold = 2.0 * moving * big.powi(2 * params.m as i32) / (n as f64).sqrt();
    Ok(ConsistencyReport {
        distance,
        threshold,
    })
}

/// `‖(1/n) Σ_{k<n} τ^k(w)‖ / ‖w‖`; at most 1 when averaging is contractive.
pub fn contraction_ratio(
    word: &Monomial,
    n: usize,
    params: &ModelParams,
    seed: u64,
) -> Result<f64> {
    let single = operator_norm(&word.to_operator(params)?, DEFAULT_NORM_TOL, seed)?.value;
    let spec = CesaroSpec::new(word.clone(), n, *params)?;
    let avg = operator_norm(&cesaro_sum(&spec)?, DEFAULT_NORM_TOL, seed)?.value / n as f64;
    Ok(if single > 0.0 { avg / single } else { 0.0 })
}
