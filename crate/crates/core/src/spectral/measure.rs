//! Jacobi parameters and the discrete vacuum measure of the truncated
//! position operator.

use crate::error::{Error, Result};
use crate::linalg::{tridiag_eigen, SymTridiagonal};

use super::chebyshev::{chebyshev_u, chebyshev_u_derivative};

/// Recurrence coefficients of a symmetric measure. Entries past the stored
/// `betas` take the value `beta_tail`; all `alpha` are zero unless given.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiParams {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub beta_tail: f64,
}

impl JacobiParams {
    /// `β = (1, t, …, t)` with `m` nonzero entries, zero afterwards: the
    /// continued fraction closes after `m + 1` levels.
    pub fn truncated(m: usize, t: f64) -> Self {
        let betas = (0..m).map(|n| if n == 0 { 1.0 } else { t }).collect();
        Self {
            alphas: Vec::new(),
            betas,
            beta_tail: 0.0,
        }
    }

    /// `β = (1, t, t, …)`, the full t-free space.
    pub fn full(t: f64) -> Self {
        Self {
            alphas: Vec::new(),
            betas: vec![1.0],
            beta_tail: t,
        }
    }

    pub fn alpha(&self, n: usize) -> f64 {
        self.alphas.get(n).copied().unwrap_or(0.0)
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.betas.get(n).copied().unwrap_or(self.beta_tail)
    }

    /// Leading `size × size` Jacobi matrix: diagonal `α_n`, off-diagonal `√β_n`.
    pub fn matrix(&self, size: usize) -> Result<SymTridiagonal> {
        let diag = (0..size).map(|n| self.alpha(n)).collect();
        let off = (0..size.saturating_sub(1))
            .map(|n| self.beta(n).sqrt())
            .collect();
        SymTridiagonal::new(diag, off)
    }
}

fn check_mt(m: usize, t: f64) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// `(m+1) × (m+1)` Jacobi matrix with zero diagonal and off-diagonal `(1, √t, …, √t)`.
pub fn jacobi_matrix(m: usize, t: f64) -> Result<SymTridiagonal> {
    check_mt(m, t)?;
    JacobiParams::truncated(m, t).matrix(m + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub z: f64,
    pub b: f64,
}

/// Finitely supported probability measure, atoms sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(mut atoms: Vec<Atom>) -> Self {
        atoms.sort_by(|a, b| a.z.total_cmp(&b.z));
        Self { atoms }
    }

    pub fn dirac(z: f64) -> Self {
        Self::new(vec![Atom { z, b: 1.0 }])
    }

    pub fn support(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.z).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.b).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.b).sum()
    }

    pub fn moment(&self, n: u32) -> f64 {
        self.atoms.iter().map(|a| a.b * a.z.powi(n as i32)).sum()
    }

    /// Distinct atoms (separation > 1e−8), unit mass (1e−10) and `z ↦ −z` symmetry (1e−10).
    pub fn check_invariants(&self) -> Result<()> {
        for pair in self.atoms.windows(2) {
            if pair[1].z - pair[0].z <= 1e-8 {
                return Err(Error::Tolerance(format!(
                    "atoms {} and {} are not separated",
                    pair[0].z, pair[1].z
                )));
            }
        }
        let mass = self.total_mass();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Tolerance(format!("total mass {mass}")));
        }
        let n = self.atoms.len();
        for i in 0..n {
            let (a, b) = (self.atoms[i], self.atoms[n - 1 - i]);
            if (a.z + b.z).abs() > 1e-10 || (a.b - b.b).abs() > 1e-10 {
                return Err(Error::Tolerance(format!(
                    "asymmetric pair ({}, {}), ({}, {})",
                    a.z, a.b, b.z, b.b
                )));
            }
        }
        Ok(())
    }
}

/// `√t·z·U_m(z/2√t) − U_{m−1}(z/2√t)`, whose zeros are the atoms.
pub fn vacuum_polynomial(m: usize, t: f64, z: f64) -> f64 {
    let st = t.sqrt();
    let y = z / (2.0 * st);
    st * z * chebyshev_u(m, y) - chebyshev_u(m - 1, y)
}

/// `|D(z)| / max(1, |√t z U_m| + |U_{m−1}|)`: the polynomial relative to the
/// size of the two terms that cancel at a zero.
pub fn vacuum_polynomial_residual(m: usize, t: f64, z: f64) -> f64 {
    let st = t.sqrt();
    let y = z / (2.0 * st);
    let lead = st * z * chebyshev_u(m, y);
    let tail = chebyshev_u(m - 1, y);
    (lead - tail).abs() / (lead.abs() + tail.abs()).max(1.0)
}

/// Residue of `G(z) = √t U_m(z/2√t) / D(z)` at a simple zero of `D`.
pub fn residue_weight(m: usize, t: f64, z: f64) -> f64 {
    let st = t.sqrt();
    let y = z / (2.0 * st);
    let numerator = st * chebyshev_u(m, y);
    // d/dz of D(z) with y' = 1/(2√t).
    let d_denominator = st * chebyshev_u(m, y) + z * chebyshev_u_derivative(m, y) / 2.0
        - chebyshev_u_derivative(m - 1, y) / (2.0 * st);
    numerator / d_denominator
}

/// The measure together with both weight computations.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub measure: DiscreteMeasure,
    pub eigen_weights: Vec<f64>,
    pub residue_weights: Vec<f64>,
    pub max_weight_gap: f64,
    pub max_zero_residual: f64,
}

pub const WEIGHT_AGREEMENT_TOL: f64 = 1e-9;
pub const ZERO_RESIDUAL_TOL: f64 = 1e-8;

/// Vacuum measure of the m-truncated position operator with both weight paths.
///
/// Atoms are the eigenvalues of [`jacobi_matrix`]; weights come from the
/// squared first eigenvector components and independently from residues of
/// the Chebyshev form of the Cauchy transform.
pub fn truncated_measure_report(m: usize, t: f64) -> Result<MeasureReport> {
    check_mt(m, t)?;
    let eig = tridiag_eigen(&jacobi_matrix(m, t)?)?;
    let eigen_weights = eig.weights();
    let residue_weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&z| residue_weight(m, t, z))
        .collect();
    let mut max_gap = 0.0f64;
    for ((&z, &we), &wr) in eig
        .eigenvalues
        .iter()
        .zip(&eigen_weights)
        .zip(&residue_weights)
    {
        let gap = (we - wr).abs();
        // NaN gaps fail too.
        if gap.is_nan() || gap > WEIGHT_AGREEMENT_TOL {
            return Err(Error::PathDisagreement {
                atom: z,
                residue: wr,
                eigen: we,
            });
        }
        max_gap = max_gap.max(gap);
    }
    let max_zero_residual = eig
        .eigenvalues
        .iter()
        .map(|&z| vacuum_polynomial_residual(m, t, z))
        .fold(0.0f64, f64::max);
    if max_zero_residual >= ZERO_RESIDUAL_TOL {
        return Err(Error::Tolerance(format!(
            "atom fails to annihilate the vacuum polynomial (residual {max_zero_residual:e})"
        )));
    }
    let measure = DiscreteMeasure::new(
        eig.eigenvalues
            .iter()
            .zip(&eigen_weights)
            .map(|(&z, &b)| Atom { z, b })
            .collect(),
    );
    Ok(MeasureReport {
        measure,
        eigen_weights,
        residue_weights,
        max_weight_gap: max_gap,
        max_zero_residual,
    })
}

pub fn truncated_measure(m: usize, t: f64) -> Result<DiscreteMeasure> {
    truncated_measure_report(m, t).map(|r| r.measure)
}
