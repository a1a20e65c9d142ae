//! Spectra of the position operator: the closed union formula, a
//! finite-window eigenvalue oracle, the full-space band, moments and the
//! strict-inclusion check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{inner_product, position, Basis, FockVector, ModelParams};
use crate::linalg::{block_symmetric_eigenvalues, tridiag_eigen};

use super::measure::{truncated_measure, DiscreteMeasure, JacobiParams};

pub const SET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSet {
    /// Sorted finite point set.
    Finite(Vec<f64>),
    /// `[-half_width, half_width]` plus isolated outliers.
    Band { half_width: f64, outliers: Vec<f64> },
}

impl SpectrumSet {
    pub fn points(&self) -> Option<&[f64]> {
        match self {
            SpectrumSet::Finite(p) => Some(p),
            SpectrumSet::Band { .. } => None,
        }
    }

    pub fn cardinality(&self) -> Option<usize> {
        self.points().map(<[f64]>::len)
    }
}

/// Sorts and merges values closer than `tol`.
pub fn dedup_sorted(mut values: Vec<f64>, tol: f64) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(&last) if (v - last).abs() <= tol => {}
            _ => out.push(v),
        }
    }
    out
}

/// Points of `a` with no partner in `b` within `tol`, and vice versa.
pub fn symmetric_difference(a: &[f64], b: &[f64], tol: f64) -> Vec<f64> {
    let missing = |x: &[f64], y: &[f64]| -> Vec<f64> {
        x.iter()
            .copied()
            .filter(|p| !y.iter().any(|q| (p - q).abs() <= tol))
            .collect()
    };
    let mut out = missing(a, b);
    out.extend(missing(b, a));
    out.sort_by(f64::total_cmp);
    out
}

/// `supp μ_t^(m) ∪ √t·(⋃_{k=1}^{m−1} supp μ_1^(k)) ∪ {0}`.
pub fn spectrum_truncated(m: usize, t: f64) -> Result<SpectrumSet> {
    let mut points = truncated_measure(m, t)?.support();
    let st = t.sqrt();
    for k in 1..m {
        points.extend(
            truncated_measure(k, 1.0)?
                .support()
                .into_iter()
                .map(|z| st * z),
        );
    }
    points.push(0.0);
    Ok(SpectrumSet::Finite(dedup_sorted(points, SET_TOL)))
}

/// Outcome of the finite-window eigenvalue oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVerification {
    pub window_spectrum: Vec<f64>,
    pub formula_spectrum: Vec<f64>,
    /// Number of invariant blocks of `x_1` on the window.
    pub blocks: usize,
    /// Blocks whose eigenvalues matched the predicted scaled free spectrum.
    pub scaled_blocks_checked: usize,
}

/// Diagonalizes `x_1` on the window `[-L, L]` block by block and compares
/// the eigenvalue set with [`spectrum_truncated`].
///
/// Every block is spanned by `e_1^{⊗q} ⊗ u` for a word `u` not starting
/// with mode 1. The vacuum block must reproduce `supp μ_t^(m)`; a block
/// with `|u| = ℓ ≥ 1` must equal `√t · supp μ_1^(m−ℓ)` (with `μ_1^(0) = δ_0`).
pub fn verify_spectrum(m: usize, t: f64, window: i64) -> Result<SpectrumVerification> {
    let params = ModelParams::new(t, m, window)?;
    let basis = Basis::new(&params)?;
    let x = position(1, &params)?;
    let blocks = block_symmetric_eigenvalues(&x.orthonormal_columns()?);

    let vacuum_support = truncated_measure(m, t)?.support();
    let st = t.sqrt();
    let mut free_supports: Vec<Vec<f64>> = vec![vec![0.0]];
    for k in 1..m {
        free_supports.push(
            truncated_measure(k, 1.0)?
                .support()
                .iter()
                .map(|z| st * z)
                .collect(),
        );
    }

    let mut all = Vec::new();
    let mut checked = 0;
    for (members, eigenvalues) in &blocks {
        let root_len = members
            .iter()
            .map(|&i| basis.level_of(i))
            .min()
            .unwrap_or(0);
        let expected = if root_len == 0 {
            &vacuum_support
        } else {
            &free_supports[m - root_len]
        };
        let diff = symmetric_difference(eigenvalues, expected, SET_TOL);
        if !diff.is_empty() || eigenvalues.len() != expected.len() {
            return Err(Error::SetMismatch(diff));
        }
        checked += 1;
        all.extend_from_slice(eigenvalues);
    }
    let window_spectrum = dedup_sorted(all, SET_TOL);
    let formula_spectrum = match spectrum_truncated(m, t)? {
        SpectrumSet::Finite(p) => p,
        SpectrumSet::Band { .. } => unreachable!("truncated spectrum is finite"),
    };
    let diff = symmetric_difference(&window_spectrum, &formula_spectrum, SET_TOL);
    if !diff.is_empty() {
        return Err(Error::SetMismatch(diff));
    }
    Ok(SpectrumVerification {
        window_spectrum,
        formula_spectrum,
        blocks: blocks.len(),
        scaled_blocks_checked: checked,
    })
}

/// Threshold below which the full-space spectrum carries outliers.
pub const OUTLIER_THRESHOLD: f64 = 0.5;

/// `[-2√t, 2√t]`, plus `±1/√(1−t)` when `t < 1/2`.
pub fn spectrum_full(t: f64) -> Result<SpectrumSet> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
    }
    let outliers = if t < OUTLIER_THRESHOLD {
        let o = 1.0 / (1.0 - t).sqrt();
        vec![-o, o]
    } else {
        Vec::new()
    };
    Ok(SpectrumSet::Band {
        half_width: 2.0 * t.sqrt(),
        outliers,
    })
}

/// Largest eigenvalue of the leading `size × size` Jacobi matrix with `β = (1, t, t, …)`.
pub fn full_jacobi_top_eigenvalue(t: f64, size: usize) -> Result<f64> {
    let eig = tridiag_eigen(&JacobiParams::full(t).matrix(size)?)?;
    Ok(*eig.eigenvalues.last().expect("nonempty matrix"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub n: u32,
    pub operator: f64,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsReport {
    pub rows: Vec<MomentRow>,
    pub max_odd: f64,
}

pub const MOMENT_TOL: f64 = 1e-9;

/// Compares `⟨xⁿΩ, Ω⟩` computed by repeated application of `x_0` on a
/// window of half-width `max(n_max, 1)` with `Σ b_i z_iⁿ`.
pub fn moments_check(m: usize, t: f64, n_max: u32) -> Result<MomentsReport> {
    let params = ModelParams::new(t, m, (n_max as i64).max(1))?;
    let measure: DiscreteMeasure = truncated_measure(m, t)?;
    let omega = FockVector::vacuum(&params);
    let mut v = omega.clone();
    let mut rows = Vec::new();
    let mut max_odd = 0.0f64;
    for n in 0..=n_max {
        if n > 0 {
            v = v.apply_position(0)?;
        }
        let op: Complex64 = inner_product(&v, &omega)?;
        let meas = measure.moment(n);
        if op.im.abs() > MOMENT_TOL || (op.re - meas).abs() > MOMENT_TOL * meas.abs().max(1.0) {
            return Err(Error::Tolerance(format!(
                "moment {n} for m={m}, t={t}: operator {op} vs measure {meas}"
            )));
        }
        if n % 2 == 1 {
            max_odd = max_odd.max(op.norm()).max(meas.abs());
        }
        rows.push(MomentRow {
            n,
            operator: op.re,
            measure: meas,
        });
    }
    Ok(MomentsReport { rows, max_odd })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrictInclusion {
    pub support_size: usize,
    pub spectrum_size: usize,
}

/// `|supp μ_t^(m)| = m + 1 < |σ(x^(m))|`.
pub fn strict_inclusion_check(m: usize, t: f64) -> Result<StrictInclusion> {
    let support = truncated_measure(m, t)?.support();
    let spectrum = spectrum_truncated(m, t)?;
    let points = spectrum.points().expect("finite");
    for z in &support {
        if !points.iter().any(|p| (p - z).abs() <= SET_TOL) {
            return Err(Error::Tolerance(format!(
                "atom {z} missing from the spectrum"
            )));
        }
    }
    let report = StrictInclusion {
        support_size: support.len(),
        spectrum_size: points.len(),
    };
    if report.support_size != m + 1 || report.support_size >= report.spectrum_size {
        return Err(Error::Tolerance(format!(
            "inclusion not strict: |supp| = {}, |σ| = {}",
            report.support_size, report.spectrum_size
        )));
    }
    Ok(report)
}

/// Smallest distance between `supp μ_1^(k)` and `supp μ_1^(k−1)`.
pub fn free_support_separation(k: usize) -> Result<f64> {
    let a = truncated_measure(k, 1.0)?.support();
    let b = if k >= 2 {
        truncated_measure(k - 1, 1.0)?.support()
    } else {
        vec![0.0]
    };
    Ok(a.iter()
        .flat_map(|x| b.iter().map(move |y| (x - y).abs()))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(s: SpectrumSet) -> Vec<f64> {
        s.points().unwrap().to_vec()
    }

    fn assert_set(got: &[f64], expect: &[f64]) {
        assert_eq!(got.len(), expect.len(), "{got:?} vs {expect:?}");
        for (a, b) in got.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {expect:?}");
        }
    }

    #[test]
    fn truncated_examples() {
        assert_set(
            &finite(spectrum_truncated(1, 0.37).unwrap()),
            &[-1.0, 0.0, 1.0],
        );
        let t: f64 = 0.6;
        let (s, r) = ((1.0 + t).sqrt(), t.sqrt());
        assert_set(
            &finite(spectrum_truncated(2, t).unwrap()),
            &[-s, -r, 0.0, r, s],
        );
        let s2 = 2f64.sqrt();
        assert_set(
            &finite(spectrum_truncated(2, 1.0).unwrap()),
            &[-s2, -1.0, 0.0, 1.0, s2],
        );
    }

    /// At t = 1 the union reduces to ⋃_{k=0..m} {2cos(lπ/(k+2)) : l = 1..k+1}.
    #[test]
    fn free_case_matches_cosine_union() {
        use std::f64::consts::PI;
        for m in 1..=6 {
            let mut pts = Vec::new();
            for k in 0..=m {
                for l in 1..=k + 1 {
                    pts.push(2.0 * (l as f64 * PI / (k as f64 + 2.0)).cos());
                }
            }
            let expect = dedup_sorted(pts, SET_TOL);
            let got = finite(spectrum_truncated(m, 1.0).unwrap());
            assert!(symmetric_difference(&got, &expect, 1e-10).is_empty());
        }
    }

    #[test]
    fn window_oracle_examples() {
        for (m, t, l) in [(1, 0.3, 4), (2, 2.0, 3), (3, 1.0, 5)] {
            let v = verify_spectrum(m, t, l).unwrap();
            assert_eq!(v.blocks, v.scaled_blocks_checked);
            assert!(symmetric_difference(&v.window_spectrum, &v.formula_spectrum, 1e-8).is_empty());
        }
    }

    #[test]
    fn full_space_band() {
        assert_eq!(
            spectrum_full(1.0).unwrap(),
            SpectrumSet::Band {
                half_width: 2.0,
                outliers: vec![]
            }
        );
        match spectrum_full(0.25).unwrap() {
            SpectrumSet::Band {
                half_width,
                outliers,
            } => {
                assert_eq!(half_width, 1.0);
                assert!((outliers[1] - 1.1547005383792515).abs() < 1e-15);
                assert_eq!(outliers[0], -outliers[1]);
            }
            _ => unreachable!(),
        }
        match spectrum_full(0.5).unwrap() {
            SpectrumSet::Band {
                half_width,
                outliers,
            } => {
                assert!((half_width - 2f64.sqrt()).abs() < 1e-15 && outliers.is_empty());
            }
            _ => unreachable!(),
        }
        assert!(spectrum_full(0.0).is_err());
    }

    #[test]
    fn full_space_top_eigenvalue_converges() {
        for t in [0.1f64, 0.25, 0.4] {
            let target = 1.0 / (1.0 - t).sqrt();
            assert!((full_jacobi_top_eigenvalue(t, 50).unwrap() - target).abs() < 1e-6);
            assert!((full_jacobi_top_eigenvalue(t, 200).unwrap() - target).abs() < 1e-6);
        }
        for t in [0.5, 1.0, 2.0] {
            let target = 2.0 * f64::sqrt(t);
            let top = full_jacobi_top_eigenvalue(t, 200).unwrap();
            assert!((top - target).abs() < 1e-3 && top <= target);
        }
    }

    #[test]
    fn moment_examples() {
        let r = moments_check(3, 0.7, 6).unwrap();
        assert_eq!(r.rows[0].operator, 1.0);
        for m in 1..=3 {
            for t in [0.2, 1.0, 5.0] {
                let r = moments_check(m, t, 2).unwrap();
                assert!((r.rows[2].operator - 1.0).abs() < 1e-14);
            }
        }
        let r = moments_check(2, 0.5, 4).unwrap();
        assert!((r.rows[4].operator - r.rows[4].measure).abs() < 1e-10);
        // ⟨x⁴Ω,Ω⟩ = 1 + β_1 = 1.5 for m = 2.
        assert!((r.rows[4].operator - 1.5).abs() < 1e-12);
        assert!(r.max_odd < 1e-12);
    }

    #[test]
    fn strict_inclusion_examples() {
        assert_eq!(
            strict_inclusion_check(1, 0.7).unwrap(),
            StrictInclusion {
                support_size: 2,
                spectrum_size: 3
            }
        );
        assert_eq!(
            strict_inclusion_check(2, 3.0).unwrap(),
            StrictInclusion {
                support_size: 3,
                spectrum_size: 5
            }
        );
        let r = strict_inclusion_check(5, 1.0).unwrap();
        assert_eq!(r.support_size, 6);
        assert!(r.spectrum_size > 6);
    }

    #[test]
    fn consecutive_free_supports_are_disjoint() {
        for k in 1..=12 {
            assert!(free_support_separation(k).unwrap() > 1e-6);
        }
    }
}
