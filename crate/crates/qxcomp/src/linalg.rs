//! Dense complex linear algebra: Hermitian eigendecomposition (cyclic
//! Jacobi), matrix functions, Kronecker products, and Uhlmann fidelity.
//!
//! Everything here is desk-scale (single-copy dimension capped at 64,
//! tensor powers capped by entry count), dense, and deterministic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_SLACK: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const SUPPORT_EIGENVALUE_TOL: f64 = 1e-12;
/// Default cap on total entries of a Kronecker product result.
pub const DEFAULT_KRON_ENTRY_CAP: u128 = 1 << 20;
/// Hard cap on single-copy matrix dimension.
pub const MAX_SINGLE_COPY_DIM: usize = 64;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFFNORM_TOL: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from real row data (imaginary parts zero).
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Checks every entry is finite.
    pub fn validate_finite(&self) -> Result<()> {
        for z in &self.data {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidInput("matrix contains non-finite entry".into()));
            }
        }
        Ok(())
    }

    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mat_mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= c;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Trace that must be real within tolerance.
    pub fn trace_real(&self) -> Result<f64> {
        let t = self.trace();
        if t.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidInput(format!(
                "trace has imaginary part {:.3e}",
                t.im
            )));
        }
        Ok(t.re)
    }

    /// Max entrywise |self - other|.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entrywise |m - m†|.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: "square".into(),
            });
        }
        let residual = self.hermiticity_residual();
        if residual > tol {
            return Err(Error::NotHermitian { residual, tol });
        }
        Ok(())
    }

    /// Kronecker product with an entry-count cap.
    pub fn kron_capped(&self, other: &ComplexMatrix, entry_cap: u128) -> Result<ComplexMatrix> {
        let rows = self.rows as u128 * other.rows as u128;
        let cols = self.cols as u128 * other.cols as u128;
        let entries = rows * cols;
        if entries > entry_cap {
            return Err(Error::SizeOverflow {
                entries,
                cap: entry_cap,
            });
        }
        let mut out = ComplexMatrix::zeros(rows as usize, cols as usize);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.kron_capped(other, DEFAULT_KRON_ENTRY_CAP)
    }

    /// N-fold tensor power.
    pub fn kron_power(&self, n: usize, entry_cap: u128) -> Result<ComplexMatrix> {
        assert!(n >= 1);
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron_capped(self, entry_cap)?;
        }
        Ok(out)
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// JSON schema for square matrices: {"dim": n, "re": [[...]], "im": [[...]]}.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl ComplexMatrix {
    pub fn from_json_str(s: &str) -> Result<ComplexMatrix> {
        let mj: MatrixJson = serde_json::from_str(s)?;
        if mj.dim == 0 {
            return Err(Error::InvalidInput("matrix dim must be positive".into()));
        }
        if mj.re.len() != mj.dim || mj.im.len() != mj.dim {
            return Err(Error::InvalidInput(format!(
                "expected {} rows, got re={} im={}",
                mj.dim,
                mj.re.len(),
                mj.im.len()
            )));
        }
        let mut m = ComplexMatrix::zeros(mj.dim, mj.dim);
        for i in 0..mj.dim {
            if mj.re[i].len() != mj.dim || mj.im[i].len() != mj.dim {
                return Err(Error::InvalidInput(format!("row {i} has wrong length")));
            }
            for j in 0..mj.dim {
                m[(i, j)] = Complex64::new(mj.re[i][j], mj.im[i][j]);
            }
        }
        m.validate_finite()?;
        Ok(m)
    }

    pub fn to_json_string(&self) -> Result<String> {
        if !self.is_square() {
            return Err(Error::InvalidInput(
                "JSON matrix schema covers square matrices only".into(),
            ));
        }
        let n = self.rows;
        let mj = MatrixJson {
            dim: n,
            re: (0..n)
                .map(|i| (0..n).map(|j| self[(i, j)].re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| self[(i, j)].im).collect())
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&mj)?)
    }
}

/// Eigenvalues (ascending) plus the orthonormal eigenbasis as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// V · diag(λ) · V†
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.eigenvalues[j];
            }
        }
        scaled.mat_mul(&self.eigenvectors.dagger()).expect("square")
    }
}

fn offdiag_frobenius(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigendecomposition by cyclic Jacobi with complex rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below 1e-12;
/// gives up after 100 sweeps. Output ordering is ascending eigenvalue,
/// and each eigenvector's first non-negligible component is phase-fixed
/// to positive real so repeated calls are deterministic.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    m.check_hermitian(HERMITIAN_TOL)?;
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize so round-off in the input cannot bias rotations
    for i in 0..n {
        for j in 0..n {
            let h = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = h;
            a[(j, i)] = h.conj();
        }
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = {
        let f: f64 = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if f > 0.0 {
            f
        } else {
            1.0
        }
    };

    let mut converged = offdiag_frobenius(&a) <= JACOBI_OFFNORM_TOL * scale.max(1.0);
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::EPSILON * scale {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R: R[p][p]=c, R[p][q]=s*phase, R[q][p]=-s*conj(phase), R[q][q]=c
                let spf = s * phase;
                let spc = s * phase.conj();
                // A <- R† A R : update columns p,q then rows p,q
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * spc;
                    a[(i, q)] = aip * spf + aiq * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * spf;
                    a[(q, j)] = apj * spc + aqj * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * spc;
                    v[(i, q)] = vip * spf + viq * c;
                }
            }
        }
        sweeps += 1;
        converged = offdiag_frobenius(&a) <= JACOBI_OFFNORM_TOL * scale.max(1.0);
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            offnorm: offdiag_frobenius(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src);
        // phase-fix on the first component with non-negligible magnitude
        let pivot = col
            .iter()
            .find(|z| z.norm() > 1e-8)
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0));
        let fix = pivot.conj() / pivot.norm();
        for i in 0..n {
            eigenvectors[(i, dst)] = col[i] * fix;
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Σ f(λ_i)|v_i⟩⟨v_i|. With `support_only`, eigenvalues below 1e-12 in
/// magnitude contribute nothing (used for log on rank-deficient states).
pub fn matrix_fn(
    s: &SpectralDecomposition,
    f: impl Fn(f64) -> f64,
    support_only: bool,
) -> Result<ComplexMatrix> {
    let n = s.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in s.eigenvalues.iter().enumerate() {
        if support_only && lambda.abs() < SUPPORT_EIGENVALUE_TOL {
            continue;
        }
        let fv = f(lambda);
        if !fv.is_finite() {
            return Err(Error::DomainError { eigenvalue: lambda });
        }
        let col = s.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += col[i] * col[j].conj() * fv;
            }
        }
    }
    Ok(out)
}

/// Validates the density-matrix contract: Hermitian, PSD within slack,
/// unit trace. Returns the (clamped) eigendecomposition.
pub fn check_density_matrix(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    m.check_hermitian(HERMITIAN_TOL)
        .map_err(|e| Error::NotDensityMatrix {
            reason: e.to_string(),
        })?;
    if m.rows() > MAX_SINGLE_COPY_DIM * MAX_SINGLE_COPY_DIM {
        return Err(Error::NotDensityMatrix {
            reason: format!("dimension {} beyond supported scale", m.rows()),
        });
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::NotDensityMatrix {
            reason: format!("trace = {tr} is not 1"),
        });
    }
    let mut dec = eig_hermitian(m).map_err(|e| Error::NotDensityMatrix {
        reason: e.to_string(),
    })?;
    for lambda in &mut dec.eigenvalues {
        if *lambda < -PSD_SLACK {
            return Err(Error::NotDensityMatrix {
                reason: format!("negative eigenvalue {lambda:.3e}"),
            });
        }
        if *lambda < 0.0 {
            *lambda = 0.0;
        }
    }
    Ok(dec)
}

/// Uhlmann fidelity F(ρ, γ) = (tr √(√ρ γ √ρ))², clamped to [0, 1].
pub fn fidelity(rho: &ComplexMatrix, gamma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != gamma.rows() || rho.cols() != gamma.cols() {
        return Err(Error::DimensionMismatch {
            left: format!("{}x{}", rho.rows(), rho.cols()),
            right: format!("{}x{}", gamma.rows(), gamma.cols()),
        });
    }
    let rho_dec = check_density_matrix(rho)?;
    check_density_matrix(gamma)?;
    let sqrt_rho = matrix_fn(&rho_dec, |x| x.max(0.0).sqrt(), false)?;
    let inner = sqrt_rho.mat_mul(gamma)?.mat_mul(&sqrt_rho)?;
    let inner_dec = eig_hermitian(&inner)?;
    let tr: f64 = inner_dec
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    let f = tr * tr;
    if !(-1e-8..=1.0 + 1e-8).contains(&f) {
        return Err(Error::InvalidInput(format!(
            "fidelity {f} outside [0,1] beyond tolerance"
        )));
    }
    Ok(f.clamp(0.0, 1.0))
}
