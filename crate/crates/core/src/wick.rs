//! Symbolic monomials in creators, annihilators and level projections, and
//! the rewrite system that brings them to Wick normal order
//! `a†…a† a…a [P_h]` on the m-truncated space.
//!
//! The rewrite rules are the matrix identities
//!
//! ```text
//! a_i a†_j      = δ_ij (P_0 + t Σ_{h=1}^{m-1} P_h)
//! P_h a_i       = a_i P_{h+1}       (0 when h = m)
//! P_h a†_i      = a†_i P_{h-1}      (0 when h = 0)
//! P_h P_k       = δ_hk P_h
//! ```
//!
//! applied leftmost-first, contractions before projection moves.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{annihilate_word, create_word, FockWord, ModelParams, SparseOperator};
use crate::PRUNE_EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Creator(i64),
    Annihilator(i64),
    Projection(usize),
}

impl Generator {
    /// Action on a basis word: at most one image word with a real coefficient.
    pub fn act(&self, word: &FockWord, params: &ModelParams) -> Option<(f64, FockWord)> {
        match *self {
            Generator::Creator(i) => create_word(i, word, params.m).map(|w| (1.0, w)),
            Generator::Annihilator(i) => annihilate_word(i, word, params.t),
            Generator::Projection(h) => (word.len() == h).then(|| (1.0, word.clone())),
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        match *self {
            Generator::Creator(i) | Generator::Annihilator(i) => params.check_mode(i),
            Generator::Projection(h) => params.check_level(h),
        }
    }

    pub fn shifted(&self, k: i64, window: i64) -> Result<Self> {
        let shift = |i: i64| {
            let s = i + k;
            if s.abs() > window {
                Err(Error::WindowOverflow { index: s, window })
            } else {
                Ok(s)
            }
        };
        Ok(match *self {
            Generator::Creator(i) => Generator::Creator(shift(i)?),
            Generator::Annihilator(i) => Generator::Annihilator(shift(i)?),
            p @ Generator::Projection(_) => p,
        })
    }

    pub fn mode(&self) -> Option<i64> {
        match *self {
            Generator::Creator(i) | Generator::Annihilator(i) => Some(i),
            Generator::Projection(_) => None,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Creator(i) => write!(f, "c{i}"),
            Generator::Annihilator(i) => write!(f, "a{i}"),
            Generator::Projection(h) => write!(f, "p{h}"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(tok: &str) -> Result<Self> {
        let bad = || {
            Error::Parse(format!(
                "bad generator token {tok:?}; expected c<i>, a<i> or p<h>"
            ))
        };
        let mut chars = tok.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let rest = chars.as_str();
        match kind {
            'c' => rest.parse().map(Generator::Creator).map_err(|_| bad()),
            'a' => rest.parse().map(Generator::Annihilator).map_err(|_| bad()),
            'p' => rest.parse().map(Generator::Projection).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// Ordered product of generators with a coefficient; no factors is the unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub factors: Vec<Generator>,
}

impl Monomial {
    pub fn new(factors: Vec<Generator>) -> Self {
        Self {
            coeff: Complex64::new(1.0, 0.0),
            factors,
        }
    }

    pub fn unit() -> Self {
        Self::new(Vec::new())
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        self.factors.iter().try_for_each(|g| g.validate(params))
    }

    /// Largest `|index|` among the creator/annihilator factors.
    pub fn max_abs_mode(&self) -> i64 {
        self.factors
            .iter()
            .filter_map(Generator::mode)
            .map(i64::abs)
            .max()
            .unwrap_or(0)
    }

    pub fn creators(&self) -> usize {
        self.factors
            .iter()
            .filter(|g| matches!(g, Generator::Creator(_)))
            .count()
    }

    pub fn annihilators(&self) -> usize {
        self.factors
            .iter()
            .filter(|g| matches!(g, Generator::Annihilator(_)))
            .count()
    }

    pub fn has_projection(&self) -> bool {
        self.factors
            .iter()
            .any(|g| matches!(g, Generator::Projection(_)))
    }

    pub fn shifted(&self, k: i64, window: i64) -> Result<Self> {
        let factors = self
            .factors
            .iter()
            .map(|g| g.shifted(k, window))
            .collect::<Result<_>>()?;
        Ok(Self {
            coeff: self.coeff,
            factors,
        })
    }

    /// Image of a basis word under the whole product (rightmost factor first).
    pub fn act(&self, word: &FockWord, params: &ModelParams) -> Option<(Complex64, FockWord)> {
        let mut coeff = self.coeff;
        let mut w = word.clone();
        for g in self.factors.iter().rev() {
            let (k, image) = g.act(&w, params)?;
            coeff *= k;
            w = image;
        }
        Some((coeff, w))
    }

    pub fn to_operator(&self, params: &ModelParams) -> Result<SparseOperator> {
        self.validate(params)?;
        SparseOperator::from_word_map(params, self.to_string(), |w| {
            self.act(w, params).into_iter().collect()
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff != Complex64::new(1.0, 0.0) {
            write!(f, "({}) ", self.coeff)?;
        }
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let toks: Vec<String> = self.factors.iter().map(ToString::to_string).collect();
        write!(f, "{}", toks.join(" "))
    }
}

impl FromStr for Monomial {
    type Err = Error;

    /// Whitespace-separated tokens `c<i>`, `a<i>`, `p<h>`; the empty string is the unit.
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_>>()?;
        Ok(Self::new(factors))
    }
}

/// `a†_{i1}…a†_{ir} a_{j1}…a_{jl} [P_h]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalTerm {
    pub creators: Vec<i64>,
    pub annihilators: Vec<i64>,
    pub projection: Option<usize>,
}

impl NormalTerm {
    pub fn projection(h: usize) -> Self {
        Self {
            creators: Vec::new(),
            annihilators: Vec::new(),
            projection: Some(h),
        }
    }

    pub fn unit() -> Self {
        Self {
            creators: Vec::new(),
            annihilators: Vec::new(),
            projection: None,
        }
    }

    /// Number of creation plus annihilation factors.
    pub fn degree(&self) -> usize {
        self.creators.len() + self.annihilators.len()
    }

    pub fn factors(&self) -> Vec<Generator> {
        self.creators
            .iter()
            .map(|&i| Generator::Creator(i))
            .chain(self.annihilators.iter().map(|&j| Generator::Annihilator(j)))
            .chain(self.projection.map(Generator::Projection))
            .collect()
    }

    /// Whether the term can act non-trivially on the m-truncated space.
    pub fn is_admissible(&self, m: usize) -> bool {
        let (r, l) = (self.creators.len(), self.annihilators.len());
        match self.projection {
            Some(h) => h <= m && h >= l && h - l + r <= m,
            None => r <= m && l <= m,
        }
    }

    pub fn shifted(&self, k: i64, window: i64) -> Result<Self> {
        let shift = |v: &[i64]| {
            v.iter()
                .map(|&i| {
                    let s = i + k;
                    if s.abs() > window {
                        Err(Error::WindowOverflow { index: s, window })
                    } else {
                        Ok(s)
                    }
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            creators: shift(&self.creators)?,
            annihilators: shift(&self.annihilators)?,
            projection: self.projection,
        })
    }
}

impl fmt::Display for NormalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Monomial::new(self.factors()))
    }
}

/// Linear combination of normal-ordered terms on the m-truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    m: usize,
    terms: BTreeMap<NormalTerm, Complex64>,
}

impl NormalForm {
    pub fn zero(m: usize) -> Self {
        Self {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(m: usize, terms: impl IntoIterator<Item = (NormalTerm, Complex64)>) -> Self {
        let mut nf = Self::zero(m);
        for (term, c) in terms {
            nf.push(term, c);
        }
        nf.prune();
        nf
    }

    fn push(&mut self, term: NormalTerm, c: Complex64) {
        *self.terms.entry(term).or_default() += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE_EPS);
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NormalTerm, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, term: &NormalTerm) -> Complex64 {
        self.terms.get(term).copied().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.push(t.clone(), *c);
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.m, self.terms.iter().map(|(t, c)| (t.clone(), c * s)))
    }

    /// Every term is `a†…a…[P_h]` and admissible for `m`.
    pub fn satisfies_pattern(&self) -> bool {
        self.terms.keys().all(|t| t.is_admissible(self.m))
    }

    /// Coefficients of `P_0..P_m` for a combination of pure projections and
    /// the unit (the unit contributes to every level). `None` if some term
    /// has creators or annihilators.
    pub fn projection_coefficients(&self) -> Option<Vec<Complex64>> {
        let mut out = vec![Complex64::default(); self.m + 1];
        for (term, c) in &self.terms {
            if term.degree() > 0 {
                return None;
            }
            match term.projection {
                Some(h) => out[h] += c,
                None => out.iter_mut().for_each(|x| *x += c),
            }
        }
        Some(out)
    }

    pub fn shifted(&self, k: i64, window: i64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(t, c)| t.shifted(k, window).map(|s| (s, *c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_terms(self.m, terms))
    }

    pub fn to_operator(&self, params: &ModelParams) -> Result<SparseOperator> {
        if params.m != self.m {
            return Err(Error::ParamsMismatch);
        }
        let mut op = SparseOperator::zero(params)?;
        for (term, c) in &self.terms {
            let mono = Monomial {
                coeff: *c,
                factors: term.factors(),
            };
            op = op.add(&mono.to_operator(params)?)?;
        }
        Ok(op.with_descriptor(self.to_string()))
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| format!("({c})·{}", Monomial::new(t.factors())))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Step counts of one normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RewriteStats {
    /// Longest chain of rewrites applied to any single branch.
    pub max_branch_steps: usize,
    pub total_steps: usize,
}

impl RewriteStats {
    /// `(len + 1)²`, an upper bound on any branch length for a word of length `len`.
    pub fn step_bound(len: usize) -> usize {
        (len + 1) * (len + 1)
    }
}

/// The truncated-space rewrite system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewriteSystem {
    m: usize,
    /// Coefficient of `P_h` (`1 ≤ h ≤ m−1`) in the contraction `a_i a†_i`; `t` unless mutated.
    contraction_t: f64,
}

enum Step {
    Branch(Vec<(Complex64, Vec<Generator>)>),
    Done,
}

impl RewriteSystem {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            m: params.m,
            contraction_t: params.t,
        }
    }

    /// A deliberately corrupted system used as a negative control: the
    /// contraction coefficient `t` becomes `t + delta`.
    pub fn with_contraction_perturbation(mut self, delta: f64) -> Self {
        self.contraction_t += delta;
        self
    }

    pub fn normalize(&self, word: &Monomial) -> Result<(NormalForm, RewriteStats)> {
        for g in &word.factors {
            if let Generator::Projection(h) = *g {
                if h > self.m {
                    return Err(Error::LevelOutOfRange {
                        level: h,
                        m: self.m,
                    });
                }
            }
        }
        let mut out = NormalForm::zero(self.m);
        let mut stats = RewriteStats::default();
        let mut stack = vec![(word.coeff, word.factors.clone(), 0usize)];
        while let Some((coeff, factors, steps)) = stack.pop() {
            match self.step(&factors) {
                Step::Done => {
                    stats.max_branch_steps = stats.max_branch_steps.max(steps);
                    if let Some(term) = self.terminal(&factors) {
                        out.push(term, coeff);
                    }
                }
                Step::Branch(children) => {
                    stats.total_steps += 1;
                    if children.is_empty() {
                        stats.max_branch_steps = stats.max_branch_steps.max(steps + 1);
                    }
                    // Reverse so the stack pops branches in order.
                    for (k, f) in children.into_iter().rev() {
                        stack.push((coeff * k, f, steps + 1));
                    }
                }
            }
        }
        out.prune();
        Ok((out, stats))
    }

    fn step(&self, f: &[Generator]) -> Step {
        use Generator::*;
        let one = Complex64::new(1.0, 0.0);
        // a_i a†_j contractions, leftmost first.
        for p in 0..f.len().saturating_sub(1) {
            if let (Annihilator(i), Creator(j)) = (f[p], f[p + 1]) {
                if i != j {
                    return Step::Branch(Vec::new());
                }
                let branches = (0..self.m)
                    .map(|h| {
                        let c = if h == 0 { 1.0 } else { self.contraction_t };
                        let mut g = f[..p].to_vec();
                        g.push(Projection(h));
                        g.extend_from_slice(&f[p + 2..]);
                        (Complex64::new(c, 0.0), g)
                    })
                    .collect();
                return Step::Branch(branches);
            }
        }
        // Move the leftmost non-trailing projection one slot to the right.
        for p in 0..f.len().saturating_sub(1) {
            if let Projection(h) = f[p] {
                let replacement = match f[p + 1] {
                    Projection(k) => (h == k).then(|| vec![Projection(h)]),
                    Annihilator(i) => (h < self.m).then(|| vec![Annihilator(i), Projection(h + 1)]),
                    Creator(i) => (h > 0).then(|| vec![Creator(i), Projection(h - 1)]),
                };
                return Step::Branch(match replacement {
                    None => Vec::new(),
                    Some(mid) => {
                        let mut g = f[..p].to_vec();
                        g.extend(mid);
                        g.extend_from_slice(&f[p + 2..]);
                        vec![(one, g)]
                    }
                });
            }
        }
        Step::Done
    }

    /// Reads off a fully reduced word, dropping terms that vanish on the truncated space.
    fn terminal(&self, f: &[Generator]) -> Option<NormalTerm> {
        let mut term = NormalTerm::unit();
        for g in f {
            match *g {
                Generator::Creator(i) => term.creators.push(i),
                Generator::Annihilator(j) => term.annihilators.push(j),
                Generator::Projection(h) => term.projection = Some(h),
            }
        }
        term.is_admissible(self.m).then_some(term)
    }
}

/// Normal form of `word` on the m-truncated space.
pub fn normal_order(word: &Monomial, params: &ModelParams) -> Result<NormalForm> {
    RewriteSystem::new(params).normalize(word).map(|(nf, _)| nf)
}

/// Shift-fixed-point conditional expectation of a normal form: terms with any
/// creator or annihilator average to zero, pure projections are fixed, and
/// the unit is resolved as `Σ_h P_h`.
pub fn fixed_point_expectation(nf: &NormalForm) -> NormalForm {
    let mut out = NormalForm::zero(nf.m);
    for (term, c) in &nf.terms {
        if term.degree() > 0 {
            continue;
        }
        match term.projection {
            Some(h) => out.push(NormalTerm::projection(h), *c),
            None => (0..=nf.m).for_each(|h| out.push(NormalTerm::projection(h), *c)),
        }
    }
    out.prune();
    out
}

/// Checks that `weights` is a probability vector of length `m + 1`.
pub fn validate_state_weights(weights: &[f64], m: usize) -> Result<()> {
    if weights.len() != m + 1 {
        return Err(Error::InvalidProbability(format!(
            "expected {} weights, got {}",
            m + 1,
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidProbability(format!(
            "negative or non-finite weight {w}"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidProbability(format!("weights sum to {sum}")));
    }
    Ok(())
}

/// Shift-invariant state with barycentric weights `c_h` on the extreme states
/// `ω_h`, evaluated on a monomial.
pub fn invariant_state_eval(
    weights: &[f64],
    word: &Monomial,
    params: &ModelParams,
) -> Result<Complex64> {
    validate_state_weights(weights, params.m)?;
    let expectation = fixed_point_expectation(&normal_order(word, params)?);
    let coeffs = expectation
        .projection_coefficients()
        .expect("expectation contains only projections");
    Ok(coeffs.iter().zip(weights).map(|(c, w)| c * *w).sum())
}

/// Weights of the `i`-th extreme invariant state.
pub fn extreme_state(i: usize, m: usize) -> Vec<f64> {
    (0..=m).map(|h| if h == i { 1.0 } else { 0.0 }).collect()
}

/// Random monomials with up to `max_len` factors over modes `[-window, window]`
/// and projections `P_0..P_m`, each factor kind equally likely.
pub fn sample_monomials(
    count: usize,
    max_len: usize,
    window: i64,
    m: usize,
    seed: u64,
) -> Vec<Monomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            let factors = (0..len)
                .map(|_| match rng.gen_range(0..3) {
                    0 => Generator::Creator(rng.gen_range(-window..=window)),
                    1 => Generator::Annihilator(rng.gen_range(-window..=window)),
                    _ => Generator::Projection(rng.gen_range(0..=m)),
                })
                .collect();
            Monomial::new(factors)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundnessReport {
    /// Entrywise gap between the matrices of the word and of its normal form.
    pub max_diff: f64,
    pub steps: usize,
    pub step_bound: usize,
    pub pattern_ok: bool,
}

impl SoundnessReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_diff <= tol && self.steps <= self.step_bound && self.pattern_ok
    }
}

/// Normalizes `word` with `system` and compares matrices on `params`.
pub fn soundness(
    system: &RewriteSystem,
    word: &Monomial,
    params: &ModelParams,
) -> Result<SoundnessReport> {
    let (nf, stats) = system.normalize(word)?;
    let max_diff = word
        .to_operator(params)?
        .max_abs_diff(&nf.to_operator(params)?)?;
    Ok(SoundnessReport {
        max_diff,
        steps: stats.max_branch_steps,
        step_bound: RewriteStats::step_bound(word.len()),
        pattern_ok: nf.satisfies_pattern(),
    })
}

/// Words in the creators of the full (untruncated) t-free space, where the
/// only relations are `l_i l†_j = δ_ij (P_Ω + t (I − P_Ω))`,
/// `l_i P_Ω = 0 = P_Ω l†_i`.
pub mod full {
    use super::*;

    /// `l†…l† [P_Ω] l…l`.
    #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
    pub struct FullTerm {
        pub creators: Vec<i64>,
        pub vacuum: bool,
        pub annihilators: Vec<i64>,
    }

    impl FullTerm {
        pub fn degree(&self) -> usize {
            self.creators.len() + self.annihilators.len()
        }
    }

    impl fmt::Display for FullTerm {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let mut toks: Vec<String> = self.creators.iter().map(|i| format!("c{i}")).collect();
            if self.vacuum {
                toks.push("P_Ω".into());
            }
            toks.extend(self.annihilators.iter().map(|j| format!("a{j}")));
            if toks.is_empty() {
                write!(f, "I")
            } else {
                write!(f, "{}", toks.join(" "))
            }
        }
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct FullNormalForm {
        pub terms: BTreeMap<FullTerm, Complex64>,
    }

    /// Coefficients of `E(w) = vacuum·P_Ω + rest·(I − P_Ω)`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct FullExpectation {
        pub vacuum: Complex64,
        pub rest: Complex64,
    }

    impl FullExpectation {
        /// True when `E(w)` is a multiple of the identity.
        pub fn is_scalar(&self, tol: f64) -> bool {
            (self.vacuum - self.rest).norm() <= tol
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    enum Tok {
        Cre(i64),
        Ann(i64),
        Vac,
    }

    pub fn normal_order_full(word: &Monomial, t: f64) -> Result<FullNormalForm> {
        let toks = word
            .factors
            .iter()
            .map(|g| match *g {
                Generator::Creator(i) => Ok(Tok::Cre(i)),
                Generator::Annihilator(j) => Ok(Tok::Ann(j)),
                Generator::Projection(_) => Err(Error::Parse(
                    "full-space words are built from creators and annihilators only".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut terms: BTreeMap<FullTerm, Complex64> = BTreeMap::new();
        let mut stack = vec![(word.coeff, toks)];
        'outer: while let Some((coeff, f)) = stack.pop() {
            for p in 0..f.len().saturating_sub(1) {
                let splice = |mid: &[Tok]| {
                    let mut g = f[..p].to_vec();
                    g.extend_from_slice(mid);
                    g.extend_from_slice(&f[p + 2..]);
                    g
                };
                match (f[p], f[p + 1]) {
                    (Tok::Ann(i), Tok::Cre(j)) => {
                        if i == j {
                            // P_Ω + t(I − P_Ω) = t·I + (1 − t)·P_Ω
                            stack.push((coeff * (1.0 - t), splice(&[Tok::Vac])));
                            stack.push((coeff * t, splice(&[])));
                        }
                        continue 'outer;
                    }
                    (Tok::Ann(_), Tok::Vac) | (Tok::Vac, Tok::Cre(_)) => continue 'outer,
                    (Tok::Vac, Tok::Vac) => {
                        stack.push((coeff, splice(&[Tok::Vac])));
                        continue 'outer;
                    }
                    _ => {}
                }
            }
            let mut term = FullTerm {
                creators: Vec::new(),
                vacuum: false,
                annihilators: Vec::new(),
            };
            for tok in f {
                match tok {
                    Tok::Cre(i) => term.creators.push(i),
                    Tok::Ann(j) => term.annihilators.push(j),
                    Tok::Vac => term.vacuum = true,
                }
            }
            *terms.entry(term).or_default() += coeff;
        }
        terms.retain(|_, c| c.norm() > PRUNE_EPS);
        Ok(FullNormalForm { terms })
    }

    impl FullNormalForm {
        /// Drops every term with a creator or annihilator; what remains is a
        /// combination of `I` and `P_Ω`, reported in the basis `{P_Ω, I − P_Ω}`.
        pub fn expectation(&self) -> FullExpectation {
            let (mut id, mut vac) = (Complex64::default(), Complex64::default());
            for (term, c) in &self.terms {
                if term.degree() > 0 {
                    continue;
                }
                if term.vacuum {
                    vac += c;
                } else {
                    id += c;
                }
            }
            FullExpectation {
                vacuum: id + vac,
                rest: id,
            }
        }
    }
}
