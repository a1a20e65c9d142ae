//! Small numerical kernels: symmetric tridiagonal eigenproblems, block
//! eigenvalues of sparse symmetric matrices, operator norms and ranks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidParams(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                offdiag.len()
            )));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::from_diagonal(&DVector::from_vec(self.diag.clone()));
        for (i, &b) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        debug_assert_eq!(m.nrows(), n);
        m
    }
}

/// Eigenvalues (ascending) and squared first components of the
/// corresponding orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    pub eigenvalues: Vec<f64>,
    pub first_components: Vec<f64>,
}

impl TridiagEigen {
    pub fn weights(&self) -> Vec<f64> {
        self.first_components.iter().map(|c| c * c).collect()
    }
}

const QL_MAX_SWEEPS: usize = 60;

/// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating only the
/// first row of the eigenvector matrix (the Golub–Welsch data).
pub fn tridiag_eigen(matrix: &SymTridiagonal) -> Result<TridiagEigen> {
    let n = matrix.size();
    let mut d = matrix.diag.clone();
    let mut e = matrix.offdiag.clone();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    let anorm = d
        .iter()
        .chain(&e)
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd.max(f64::EPSILON * anorm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    what: format!(
                        "tridiagonal QL on diag {:?}, offdiag {:?}",
                        matrix.diag, matrix.offdiag
                    ),
                    iterations: iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(TridiagEigen {
        eigenvalues: order.iter().map(|&i| d[i]).collect(),
        first_components: order.iter().map(|&i| z[i]).collect(),
    })
}

/// Connected components of the symmetrized sparsity graph of a column-sparse matrix.
pub fn connected_components(columns: &[Vec<(usize, Complex64)>]) -> Vec<Vec<usize>> {
    let n = columns.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (c, col) in columns.iter().enumerate() {
        for &(r, _) in col {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Eigenvalues of each diagonal block of a real symmetric matrix given in
/// column-sparse form (orthonormal basis), block by block.
pub fn block_symmetric_eigenvalues(
    columns: &[Vec<(usize, Complex64)>],
) -> Vec<(Vec<usize>, Vec<f64>)> {
    connected_components(columns)
        .into_iter()
        .map(|block| {
            let k = block.len();
            let pos: std::collections::HashMap<usize, usize> =
                block.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let mut m = DMatrix::<f64>::zeros(k, k);
            for (p, &c) in block.iter().enumerate() {
                for &(r, a) in &columns[c] {
                    m[(pos[&r], p)] = a.re;
                }
            }
            // Symmetrize against rounding in the rescaled entries.
            let sym = (&m + m.transpose()) * 0.5;
            let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            (block, ev)
        })
        .collect()
}

/// Which kernel produced an operator norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    DenseSvd,
    PowerIteration,
}

impl NormMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormMethod::DenseSvd => "dense-SVD",
            NormMethod::PowerIteration => "power-iteration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub iterations: usize,
}

pub const DENSE_NORM_LIMIT: usize = 2000;
pub const POWER_MAX_ITERATIONS: usize = 20_000;
pub const POWER_RESTARTS: usize = 3;

/// Largest singular value of a column-sparse square matrix.
///
/// Zero rows and columns are dropped first; if what remains fits in
/// [`DENSE_NORM_LIMIT`] a dense SVD is used, otherwise power iteration on
/// `AᴴA` with [`POWER_RESTARTS`] seeded random starts.
pub fn spectral_norm(
    columns: &[Vec<(usize, Complex64)>],
    tol: f64,
    seed: u64,
) -> Result<NormEstimate> {
    let n = columns.len();
    let mut row_used = vec![false; n];
    let mut col_ids = Vec::new();
    for (c, col) in columns.iter().enumerate() {
        if !col.is_empty() {
            col_ids.push(c);
        }
        for &(r, _) in col {
            row_used[r] = true;
        }
    }
    let row_ids: Vec<usize> = (0..n).filter(|&r| row_used[r]).collect();
    if col_ids.is_empty() {
        return Ok(NormEstimate {
            value: 0.0,
            method: NormMethod::DenseSvd,
            iterations: 0,
        });
    }
    if row_ids.len().max(col_ids.len()) <= DENSE_NORM_LIMIT {
        let mut row_pos = vec![usize::MAX; n];
        for (p, &r) in row_ids.iter().enumerate() {
            row_pos[r] = p;
        }
        let mut m = DMatrix::<Complex64>::zeros(row_ids.len(), col_ids.len());
        for (p, &c) in col_ids.iter().enumerate() {
            for &(r, a) in &columns[c] {
                m[(row_pos[r], p)] += a;
            }
        }
        let sv = m.singular_values();
        return Ok(NormEstimate {
            value: sv.iter().fold(0.0f64, |a, &b| a.max(b)),
            method: NormMethod::DenseSvd,
            iterations: 0,
        });
    }
    power_norm(columns, tol, seed)
}

/// Power iteration on `AᴴA`; the maximum over seeded restarts.
pub fn power_norm(
    columns: &[Vec<(usize, Complex64)>],
    tol: f64,
    seed: u64,
) -> Result<NormEstimate> {
    let n = columns.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let apply = |v: &[Complex64]| {
        let mut out = vec![Complex64::default(); n];
        for (c, col) in columns.iter().enumerate() {
            let x = v[c];
            for &(r, a) in col {
                out[r] += a * x;
            }
        }
        out
    };
    let apply_h = |v: &[Complex64]| {
        columns
            .iter()
            .map(|col| col.iter().map(|&(r, a)| a.conj() * v[r]).sum())
            .collect::<Vec<Complex64>>()
    };
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

    let mut best = 0.0f64;
    let mut total_iters = 0;
    for _ in 0..POWER_RESTARTS {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut sigma_sq = 0.0f64;
        let mut converged = false;
        for it in 1..=POWER_MAX_ITERATIONS {
            let w = apply_h(&apply(&v));
            let nw = norm(&w);
            total_iters += 1;
            if nw == 0.0 {
                sigma_sq = 0.0;
                converged = true;
                break;
            }
            // Rayleigh quotient of AᴴA at the normalized iterate.
            let rq: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
            v = w.into_iter().map(|x| x / nw).collect();
            if it > 1 && (rq - sigma_sq).abs() <= tol * rq.abs() {
                sigma_sq = rq;
                converged = true;
                break;
            }
            sigma_sq = rq;
        }
        if !converged {
            return Err(Error::NoConvergence {
                what: "power iteration".into(),
                iterations: total_iters,
            });
        }
        best = best.max(sigma_sq.max(0.0).sqrt());
    }
    Ok(NormEstimate {
        value: best,
        method: NormMethod::PowerIteration,
        iterations: total_iters,
    })
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank(mut rows: Vec<Vec<f64>>, cols: usize, rel_tol: f64) -> usize {
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows.len() {
            break;
        }
        let (pivot, val) =
            (rank..rows.len())
                .map(|r| (r, rows[r][col].abs()))
                .fold(
                    (rank, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if val <= tol {
            continue;
        }
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let factor = row[col] / pivot_row[col];
            if factor != 0.0 {
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= factor * p;
                }
            }
        }
        rank += 1;
    }
    rank
}
