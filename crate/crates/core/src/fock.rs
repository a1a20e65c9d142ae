//! Finite-window realization of the m-truncated t-free Fock space.
//!
//! Modes live in the window `[-L, L]`. Basis words are ordered first by
//! length and then lexicographically, so the vacuum has index 0 and every
//! level projection is a contiguous diagonal block.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::PRUNE_EPS;

pub const DEFAULT_DIM_CAP: usize = 5_000_000;

/// Deformation parameter, truncation level and mode window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub t: f64,
    pub m: usize,
    pub window: i64,
    pub dim_cap: usize,
}

impl ModelParams {
    pub fn new(t: f64, m: usize, window: i64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
        }
        if m < 1 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if window < 1 {
            return Err(Error::InvalidParams(format!(
                "window half-width must be at least 1, got {window}"
            )));
        }
        Ok(Self {
            t,
            m,
            window,
            dim_cap: DEFAULT_DIM_CAP,
        })
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    /// Number of modes in the window, `2L + 1`.
    pub fn modes(&self) -> usize {
        (2 * self.window + 1) as usize
    }

    /// `sum_{k=0..m} (2L+1)^k`, saturating instead of overflowing.
    pub fn dimension(&self) -> u128 {
        let base = self.modes() as u128;
        let mut total: u128 = 0;
        let mut pow: u128 = 1;
        for _ in 0..=self.m {
            total = total.saturating_add(pow);
            pow = pow.saturating_mul(base);
        }
        total
    }

    pub fn contains_mode(&self, mode: i64) -> bool {
        mode.abs() <= self.window
    }

    pub fn check_mode(&self, mode: i64) -> Result<()> {
        if self.contains_mode(mode) {
            Ok(())
        } else {
            Err(Error::ModeOutOfWindow {
                mode,
                window: self.window,
            })
        }
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level <= self.m {
            Ok(())
        } else {
            Err(Error::LevelOutOfRange { level, m: self.m })
        }
    }

    /// Squared norm of a basis word of the given length: `t^(len-1)`, or 1 for the vacuum.
    pub fn word_weight(&self, len: usize) -> f64 {
        if len == 0 {
            1.0
        } else {
            self.t.powi(len as i32 - 1)
        }
    }

    fn same_space(&self, other: &Self) -> bool {
        self.t == other.t && self.m == other.m && self.window == other.window
    }
}

/// A basis tensor `e_{j1} ⊗ … ⊗ e_{jk}`; the empty word is the vacuum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FockWord(Vec<i64>);

impl FockWord {
    pub fn vacuum() -> Self {
        Self(Vec::new())
    }

    pub fn new(modes: impl Into<Vec<i64>>) -> Self {
        Self(modes.into())
    }

    pub fn modes(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_vacuum()
    }

    pub fn first(&self) -> Option<i64> {
        self.0.first().copied()
    }

    /// Word with every mode moved by `k`; fails if any mode leaves the window.
    pub fn shifted(&self, k: i64, window: i64) -> Result<Self> {
        self.0
            .iter()
            .map(|&j| {
                let s = j + k;
                if s.abs() > window {
                    Err(Error::WindowOverflow { index: s, window })
                } else {
                    Ok(s)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Ord for FockWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FockWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FockWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "Ω");
        }
        for (n, j) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, "⊗")?;
            }
            write!(f, "e{j}")?;
        }
        Ok(())
    }
}

/// `a†_i w`: prepend `e_i`, or zero at the truncation level.
pub fn create_word(mode: i64, word: &FockWord, m: usize) -> Option<FockWord> {
    if word.len() >= m {
        return None;
    }
    let mut modes = Vec::with_capacity(word.len() + 1);
    modes.push(mode);
    modes.extend_from_slice(&word.0);
    Some(FockWord(modes))
}

/// `a_i w`: strip a leading `e_i`, with a factor `t` above level one.
pub fn annihilate_word(mode: i64, word: &FockWord, t: f64) -> Option<(f64, FockWord)> {
    match word.first() {
        Some(j) if j == mode => {
            let coeff = if word.len() == 1 { 1.0 } else { t };
            Some((coeff, FockWord(word.0[1..].to_vec())))
        }
        _ => None,
    }
}

/// Implicit index of the finite-window basis.
#[derive(Debug, Clone)]
pub struct Basis {
    params: ModelParams,
    offsets: Vec<usize>,
    dim: usize,
}

impl Basis {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let dim = params.dimension();
        if dim > params.dim_cap as u128 {
            return Err(Error::CapacityExceeded {
                dim,
                cap: params.dim_cap,
            });
        }
        let base = params.modes();
        let mut offsets = Vec::with_capacity(params.m + 2);
        let mut acc = 0usize;
        let mut pow = 1usize;
        for _ in 0..=params.m {
            offsets.push(acc);
            acc += pow;
            pow *= base;
        }
        offsets.push(acc);
        Ok(Self {
            params: *params,
            offsets,
            dim: acc,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Indices of the words of length `h`.
    pub fn level_range(&self, h: usize) -> Range<usize> {
        self.offsets[h]..self.offsets[h + 1]
    }

    pub fn level_of(&self, index: usize) -> usize {
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    pub fn index_of(&self, word: &FockWord) -> Option<usize> {
        if word.len() > self.params.m {
            return None;
        }
        let base = self.params.modes();
        let mut idx = 0usize;
        for &j in word.modes() {
            if !self.params.contains_mode(j) {
                return None;
            }
            idx = idx * base + (j + self.params.window) as usize;
        }
        Some(self.offsets[word.len()] + idx)
    }

    pub fn word(&self, index: usize) -> FockWord {
        let len = self.level_of(index);
        let base = self.params.modes();
        let mut rem = index - self.offsets[len];
        let mut modes = vec![0i64; len];
        for slot in modes.iter_mut().rev() {
            *slot = (rem % base) as i64 - self.params.window;
            rem /= base;
        }
        FockWord(modes)
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.params.word_weight(self.level_of(index))
    }

    pub fn words(&self) -> impl Iterator<Item = FockWord> + '_ {
        (0..self.dim).map(move |i| self.word(i))
    }
}

/// All basis words of length `0..=m` in `(length, lex)` order; index 0 is the vacuum.
pub fn enumerate_basis(params: &ModelParams) -> Result<Vec<FockWord>> {
    let basis = Basis::new(params)?;
    Ok(basis.words().collect())
}

/// Sparse combination of basis words.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    params: ModelParams,
    terms: BTreeMap<FockWord, Complex64>,
}

impl FockVector {
    pub fn zero(params: &ModelParams) -> Self {
        Self {
            params: *params,
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(params: &ModelParams) -> Self {
        Self::word(params, FockWord::vacuum()).expect("vacuum is always admissible")
    }

    pub fn word(params: &ModelParams, word: FockWord) -> Result<Self> {
        Self::from_terms(params, [(word, Complex64::new(1.0, 0.0))])
    }

    pub fn from_terms(
        params: &ModelParams,
        terms: impl IntoIterator<Item = (FockWord, Complex64)>,
    ) -> Result<Self> {
        let mut v = Self::zero(params);
        for (w, c) in terms {
            if w.len() > params.m {
                return Err(Error::InvalidParams(format!(
                    "word {w} longer than m = {}",
                    params.m
                )));
            }
            for &j in w.modes() {
                params.check_mode(j)?;
            }
            *v.terms.entry(w).or_default() += c;
        }
        v.prune();
        Ok(v)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn terms(&self) -> &BTreeMap<FockWord, Complex64> {
        &self.terms
    }

    pub fn amplitude(&self, word: &FockWord) -> Complex64 {
        self.terms.get(word).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE_EPS);
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out.prune();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.params.same_space(&other.params) {
            return Err(Error::ParamsMismatch);
        }
        let mut out = self.clone();
        for (w, c) in &other.terms {
            *out.terms.entry(w.clone()).or_default() += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(w, c)| c.norm_sqr() * self.params.word_weight(w.len()))
            .sum::<f64>()
            .sqrt()
    }

    /// Applies a map sending each basis word to at most one word with a coefficient.
    pub fn map_words<F>(&self, f: F) -> Self
    where
        F: Fn(&FockWord) -> Option<(Complex64, FockWord)>,
    {
        let mut out = Self::zero(&self.params);
        for (w, c) in &self.terms {
            if let Some((k, image)) = f(w) {
                *out.terms.entry(image).or_default() += c * k;
            }
        }
        out.prune();
        out
    }

    pub fn apply_creation(&self, mode: i64) -> Result<Self> {
        self.params.check_mode(mode)?;
        let m = self.params.m;
        Ok(self.map_words(|w| create_word(mode, w, m).map(|img| (Complex64::new(1.0, 0.0), img))))
    }

    pub fn apply_annihilation(&self, mode: i64) -> Result<Self> {
        self.params.check_mode(mode)?;
        let t = self.params.t;
        Ok(self.map_words(|w| {
            annihilate_word(mode, w, t).map(|(k, img)| (Complex64::new(k, 0.0), img))
        }))
    }

    pub fn apply_position(&self, mode: i64) -> Result<Self> {
        self.apply_creation(mode)?
            .add(&self.apply_annihilation(mode)?)
    }

    pub fn apply_projection(&self, level: usize) -> Result<Self> {
        self.params.check_level(level)?;
        let mut out = self.clone();
        out.terms.retain(|w, _| w.len() == level);
        Ok(out)
    }

    pub fn to_dense(&self, basis: &Basis) -> Result<Vec<Complex64>> {
        if !self.params.same_space(basis.params()) {
            return Err(Error::ParamsMismatch);
        }
        let mut v = vec![Complex64::default(); basis.dim()];
        for (w, c) in &self.terms {
            let i = basis.index_of(w).ok_or(Error::ParamsMismatch)?;
            v[i] = *c;
        }
        Ok(v)
    }

    pub fn from_dense(basis: &Basis, amplitudes: &[Complex64]) -> Self {
        let mut out = Self::zero(basis.params());
        for (i, c) in amplitudes.iter().enumerate() {
            if c.norm() > PRUNE_EPS {
                out.terms.insert(basis.word(i), *c);
            }
        }
        out
    }
}

/// `⟨v, w⟩`, linear in `v` and conjugate-linear in `w`, with level weights `t^(len-1)`.
pub fn inner_product(v: &FockVector, w: &FockVector) -> Result<Complex64> {
    if !v.params.same_space(&w.params) {
        return Err(Error::ParamsMismatch);
    }
    Ok(v.terms
        .iter()
        .filter_map(|(word, a)| {
            w.terms
                .get(word)
                .map(|b| a * b.conj() * v.params.word_weight(word.len()))
        })
        .sum())
}

/// Weighted inner product of dense amplitude vectors over a [`Basis`].
pub fn dense_inner_product(basis: &Basis, v: &[Complex64], w: &[Complex64]) -> Complex64 {
    v.iter()
        .zip(w)
        .enumerate()
        .map(|(i, (a, b))| a * b.conj() * basis.weight(i))
        .sum()
}

/// Column-sparse matrix of an operator on the window basis.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    params: ModelParams,
    columns: Vec<Vec<(usize, Complex64)>>,
    descriptor: String,
}

impl SparseOperator {
    pub fn from_columns(
        params: &ModelParams,
        descriptor: impl Into<String>,
        mut columns: Vec<Vec<(usize, Complex64)>>,
    ) -> Self {
        for col in &mut columns {
            normalize_column(col);
        }
        Self {
            params: *params,
            columns,
            descriptor: descriptor.into(),
        }
    }

    /// Builds the operator column by column from its action on basis words.
    pub fn from_word_map<F>(
        params: &ModelParams,
        descriptor: impl Into<String>,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&FockWord) -> Vec<(Complex64, FockWord)>,
    {
        let basis = Basis::new(params)?;
        let mut columns = Vec::with_capacity(basis.dim());
        for w in basis.words() {
            let mut col = Vec::new();
            for (c, image) in f(&w) {
                let r = basis
                    .index_of(&image)
                    .ok_or_else(|| Error::WindowOverflow {
                        index: image
                            .modes()
                            .iter()
                            .copied()
                            .max_by_key(|j| j.abs())
                            .unwrap_or(0),
                        window: params.window,
                    })?;
                col.push((r, c));
            }
            columns.push(col);
        }
        Ok(Self::from_columns(params, descriptor, columns))
    }

    pub fn zero(params: &ModelParams) -> Result<Self> {
        let dim = Basis::new(params)?.dim();
        Ok(Self::from_columns(params, "0", vec![Vec::new(); dim]))
    }

    pub fn identity(params: &ModelParams) -> Result<Self> {
        let dim = Basis::new(params)?.dim();
        let cols = (0..dim)
            .map(|i| vec![(i, Complex64::new(1.0, 0.0))])
            .collect();
        Ok(Self::from_columns(params, "I", cols))
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.descriptor = descriptor.into();
        self
    }

    pub fn columns(&self) -> &[Vec<(usize, Complex64)>] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.dim()];
        for (c, col) in self.columns.iter().enumerate() {
            let x = v[c];
            if x == Complex64::default() {
                continue;
            }
            for &(r, a) in col {
                out[r] += a * x;
            }
        }
        out
    }

    pub fn apply_vector(&self, v: &FockVector) -> Result<FockVector> {
        let basis = Basis::new(&self.params)?;
        let dense = v.to_dense(&basis)?;
        Ok(FockVector::from_dense(&basis, &self.apply(&dense)))
    }

    /// Adjoint with respect to the t-weighted inner product: `G⁻¹ Aᴴ G`.
    pub fn adjoint(&self) -> Result<Self> {
        let basis = Basis::new(&self.params)?;
        let mut cols = vec![Vec::new(); self.dim()];
        for (c, col) in self.columns.iter().enumerate() {
            let wc = basis.weight(c);
            for &(r, a) in col {
                cols[r].push((c, a.conj() * (basis.weight(r) / wc)));
            }
        }
        Ok(Self::from_columns(
            &self.params,
            format!("({})*", self.descriptor),
            cols,
        ))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.params.same_space(&other.params) && self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::ParamsMismatch)
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let cols = other
            .columns
            .iter()
            .map(|col| {
                let mut out = Vec::new();
                for &(k, b) in col {
                    for &(r, a) in &self.columns[k] {
                        out.push((r, a * b));
                    }
                }
                out
            })
            .collect();
        Ok(Self::from_columns(
            &self.params,
            format!("{}·{}", self.descriptor, other.descriptor),
            cols,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let cols = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Ok(Self::from_columns(
            &self.params,
            format!("{} + {}", self.descriptor, other.descriptor),
            cols,
        ))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let cols = self
            .columns
            .iter()
            .map(|col| col.iter().map(|&(r, a)| (r, a * s)).collect())
            .collect();
        Self::from_columns(&self.params, format!("{s}·{}", self.descriptor), cols)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.columns[col]
            .iter()
            .find(|(r, _)| *r == row)
            .map(|(_, a)| *a)
            .unwrap_or_default()
    }

    /// Largest entrywise difference; also reports whether sparsity patterns coincide.
    pub fn compare(&self, other: &Self) -> Result<(f64, bool)> {
        self.check_same(other)?;
        let mut max = 0.0f64;
        let mut same_pattern = true;
        for (a, b) in self.columns.iter().zip(&other.columns) {
            let rows_a: Vec<usize> = a.iter().map(|e| e.0).collect();
            let rows_b: Vec<usize> = b.iter().map(|e| e.0).collect();
            same_pattern &= rows_a == rows_b;
            let mut merged: BTreeMap<usize, Complex64> = BTreeMap::new();
            for &(r, x) in a {
                *merged.entry(r).or_default() += x;
            }
            for &(r, x) in b {
                *merged.entry(r).or_default() -= x;
            }
            max = merged.values().fold(max, |m, d| m.max(d.norm()));
        }
        Ok((max, same_pattern))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.compare(other).map(|(d, _)| d)
    }

    /// Columns rescaled to the orthonormal basis `w / ‖w‖`, in which the
    /// Euclidean operator norm equals the Fock-space operator norm.
    pub fn orthonormal_columns(&self) -> Result<Vec<Vec<(usize, Complex64)>>> {
        let basis = Basis::new(&self.params)?;
        let norms: Vec<f64> = (0..self.dim()).map(|i| basis.weight(i).sqrt()).collect();
        Ok(self
            .columns
            .iter()
            .enumerate()
            .map(|(c, col)| {
                col.iter()
                    .map(|&(r, a)| (r, a * (norms[r] / norms[c])))
                    .collect()
            })
            .collect())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, a) in col {
                m[(r, c)] = a;
            }
        }
        m
    }

    pub fn to_orthonormal_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.orthonormal_columns()?.into_iter().enumerate() {
            for (r, a) in col {
                m[(r, c)] = a;
            }
        }
        Ok(m)
    }

    /// `U^k A U^-k` for the mode shift `U`, on the columns whose preimage
    /// lies inside the window; other columns are left empty.
    pub fn shift_conjugate(&self, k: i64) -> Result<Self> {
        let basis = Basis::new(&self.params)?;
        let window = self.params.window;
        let mut cols = vec![Vec::new(); self.dim()];
        for (c, target) in cols.iter_mut().enumerate() {
            let w = basis.word(c);
            let Ok(pre) = w.shifted(-k, window) else {
                continue;
            };
            let pc = basis.index_of(&pre).expect("shifted word stays in basis");
            for &(r, a) in &self.columns[pc] {
                let row = basis.word(r).shifted(k, window)?;
                target.push((basis.index_of(&row).expect("in window"), a));
            }
        }
        Ok(Self::from_columns(
            &self.params,
            format!("τ^{k}({})", self.descriptor),
            cols,
        ))
    }
}

fn normalize_column(col: &mut Vec<(usize, Complex64)>) {
    if col.len() > 1 {
        col.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(col.len());
        for &(r, a) in col.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += a,
                _ => merged.push((r, a)),
            }
        }
        *col = merged;
    }
    col.retain(|e| e.1.norm() > PRUNE_EPS);
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn creation(mode: i64, params: &ModelParams) -> Result<SparseOperator> {
    params.check_mode(mode)?;
    let m = params.m;
    SparseOperator::from_word_map(params, format!("a†_{mode}"), |w| {
        create_word(mode, w, m)
            .map(|img| (one(), img))
            .into_iter()
            .collect()
    })
}

pub fn annihilation(mode: i64, params: &ModelParams) -> Result<SparseOperator> {
    params.check_mode(mode)?;
    let t = params.t;
    SparseOperator::from_word_map(params, format!("a_{mode}"), |w| {
        annihilate_word(mode, w, t)
            .map(|(k, img)| (Complex64::new(k, 0.0), img))
            .into_iter()
            .collect()
    })
}

pub fn position(mode: i64, params: &ModelParams) -> Result<SparseOperator> {
    params.check_mode(mode)?;
    let (m, t) = (params.m, params.t);
    SparseOperator::from_word_map(params, format!("x_{mode}"), |w| {
        let mut out = Vec::with_capacity(2);
        if let Some(img) = create_word(mode, w, m) {
            out.push((one(), img));
        }
        if let Some((k, img)) = annihilate_word(mode, w, t) {
            out.push((Complex64::new(k, 0.0), img));
        }
        out
    })
}

pub fn level_projection(level: usize, params: &ModelParams) -> Result<SparseOperator> {
    params.check_level(level)?;
    let basis = Basis::new(params)?;
    let range = basis.level_range(level);
    let cols = (0..basis.dim())
        .map(|i| {
            if range.contains(&i) {
                vec![(i, one())]
            } else {
                Vec::new()
            }
        })
        .collect();
    Ok(SparseOperator::from_columns(
        params,
        format!("P_{level}"),
        cols,
    ))
}
