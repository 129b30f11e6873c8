//! Gaussian-state toolkit in quadrature form.
//!
//! Modes are interleaved `(x_1, p_1, …, x_M, p_M)` and the vacuum has unit
//! variance per quadrature. Complex mode maps enter through
//! [`embed_complex`]; everything downstream is real linear algebra.

use num_complex::Complex64;

use crate::channel::{ChannelMatrix, PASSIVITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};

/// Slack below one accepted for a symplectic eigenvalue before it is
/// treated as unphysical.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-9;

/// Relative cutoff of the pseudo-inverse used by homodyne conditioning.
pub const PINV_TOLERANCE: f64 = 1e-12;

const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Real symmetric 2M×2M covariance of M bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureCovariance {
    matrix: RMatrix,
}

impl QuadratureCovariance {
    /// Validates shape and symmetry (relative to the largest entry).
    pub fn new(matrix: RMatrix) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r % 2 != 0 {
            return Err(Error::Contract(format!(
                "covariance must be square with even size, got {r}x{c}"
            )));
        }
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE * scale || !asym.is_finite() {
            return Err(Error::Contract(format!(
                "covariance is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        Ok(QuadratureCovariance { matrix })
    }

    /// Averages away rounding asymmetry of an assembled matrix.
    pub(crate) fn symmetrized(matrix: RMatrix) -> Self {
        let m = (&matrix + matrix.transpose()) * 0.5;
        QuadratureCovariance { matrix: m }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::thermal(modes, 1.0)
    }

    pub fn thermal(modes: usize, variance: f64) -> Self {
        QuadratureCovariance {
            matrix: RMatrix::identity(2 * modes, 2 * modes) * variance,
        }
    }

    /// Two-mode squeezed vacuum: x–x correlated, p–p anti-correlated.
    pub fn two_mode_squeezed(variance: f64) -> Self {
        let c = (variance * variance - 1.0).max(0.0).sqrt();
        let mut m = RMatrix::identity(4, 4) * variance;
        m[(0, 2)] = c;
        m[(2, 0)] = c;
        m[(1, 3)] = -c;
        m[(3, 1)] = -c;
        QuadratureCovariance { matrix: m }
    }

    pub fn mode_count(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMatrix {
        self.matrix
    }

    /// Reduced state on the listed modes, in the listed order.
    pub fn marginal(&self, modes: &[usize]) -> Result<Self> {
        let idx = quadrature_indices(modes, self.mode_count())?;
        Ok(QuadratureCovariance {
            matrix: self.matrix.select_rows(&idx).select_columns(&idx),
        })
    }

    /// x-quadrature block of every mode.
    pub fn x_block(&self) -> RMatrix {
        let idx: Vec<usize> = (0..self.mode_count()).map(|k| 2 * k).collect();
        self.matrix.select_rows(&idx).select_columns(&idx)
    }

    pub fn direct_sum(&self, other: &QuadratureCovariance) -> Self {
        let (a, b) = (self.matrix.nrows(), other.matrix.nrows());
        let mut m = RMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.matrix);
        m.view_mut((a, a), (b, b)).copy_from(&other.matrix);
        QuadratureCovariance { matrix: m }
    }

    /// True when every symplectic eigenvalue is at least `1 - tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        match symplectic_eigenvalues(self) {
            Ok(s) => s.eigenvalues.iter().all(|&v| v >= 1.0 - tol),
            Err(_) => false,
        }
    }
}

fn quadrature_indices(modes: &[usize], mode_count: usize) -> Result<Vec<usize>> {
    let mut idx = Vec::with_capacity(2 * modes.len());
    for &m in modes {
        if m >= mode_count {
            return Err(Error::Contract(format!(
                "mode index {m} out of range for {mode_count} modes"
            )));
        }
        idx.push(2 * m);
        idx.push(2 * m + 1);
    }
    Ok(idx)
}

/// Maps a complex mode transformation to its quadrature action: each entry
/// `a + jb` becomes the block `[[a, -b], [b, a]]`.
pub fn embed_complex(map: &CMatrix) -> RMatrix {
    let (m, n) = map.shape();
    let mut out = RMatrix::zeros(2 * m, 2 * n);
    for j in 0..n {
        for i in 0..m {
            let z = map[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

/// Quadrature form of a Hermitian mode-space covariance `M`, i.e. the
/// covariance of a phase-insensitive state with `⟨a a†⟩`-type matrix `M`.
pub(crate) fn embed_hermitian(m: &CMatrix) -> RMatrix {
    let e = embed_complex(m);
    (&e + e.transpose()) * 0.5
}

/// Unitary dilation of a passive segment `H = U Σ V†` (rows m, cols n).
///
/// The environment injects m modes through `N = U S` and receives n modes
/// `f = −S̃ V† x + D̃ e`, with `S̃` n×n and `D̃` n×m holding `√(1−β)` and `√β`.
#[derive(Debug, Clone)]
pub struct ChannelDilation {
    pub left_unitary: CMatrix,
    pub right_unitary: CMatrix,
    /// √β_i, descending, length min(m, n).
    pub singular_values: Vec<f64>,
    /// N = U·S (m×m).
    pub coupling: CMatrix,
    pub rank: usize,
}

impl ChannelDilation {
    pub fn input_modes(&self) -> usize {
        self.right_unitary.nrows()
    }

    pub fn output_modes(&self) -> usize {
        self.left_unitary.nrows()
    }

    fn reflect(&self, size: usize) -> Vec<f64> {
        let mut s = vec![1.0; size];
        for (i, v) in self.singular_values.iter().enumerate() {
            s[i] = (1.0 - v * v).max(0.0).sqrt();
        }
        s
    }

    /// S (m×m), entries √(1−β_i) padded with ones.
    pub fn reflect_diag(&self) -> RMatrix {
        RMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.reflect(self.output_modes())))
    }

    /// D (min(m,n) square), entries √β_i.
    pub fn transmit_diag(&self) -> RMatrix {
        RMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.singular_values.clone()))
    }

    /// −S̃ V†: how the segment input leaks into the environment output (n×n).
    pub fn leak_map(&self) -> CMatrix {
        let s = self.reflect(self.input_modes());
        let mut m = self.right_unitary.adjoint();
        for (i, v) in s.iter().enumerate() {
            let w = Complex64::new(-v, 0.0);
            for z in m.row_mut(i).iter_mut() {
                *z *= w;
            }
        }
        m
    }

    /// D̃: how the injected environment reaches the environment output (n×m).
    pub fn pass_map(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.input_modes(), self.output_modes());
        for (i, v) in self.singular_values.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        m
    }

    /// Frobenius norm of `HH† + NN† − I` for the channel this came from.
    pub fn unitarity_residual(&self, channel: &ChannelMatrix) -> f64 {
        let h = &channel.entries;
        let m = h.nrows();
        let gram = h * h.adjoint() + &self.coupling * self.coupling.adjoint();
        linalg::frobenius(&(gram - CMatrix::identity(m, m)))
    }
}

pub fn dilate(channel: &ChannelMatrix) -> Result<ChannelDilation> {
    let svd = linalg::full_svd(&channel.entries)?;
    if let Some(&top) = svd.singular_values.first() {
        if top > 1.0 + PASSIVITY_TOLERANCE || !top.is_finite() {
            return Err(Error::Passivity {
                segment: channel.segment_tag.to_string(),
                singular_value: top,
            });
        }
    }
    let singular_values: Vec<f64> = svd.singular_values.iter().map(|s| s.min(1.0)).collect();
    let rank = singular_values.iter().filter(|s| **s * **s >= 1e-14).count();
    let m = channel.rows();
    let mut d = ChannelDilation {
        left_unitary: svd.left,
        right_unitary: svd.right,
        singular_values,
        coupling: CMatrix::zeros(m, m),
        rank,
    };
    let s = d.reflect(m);
    let mut coupling = d.left_unitary.clone();
    for (j, v) in s.iter().enumerate() {
        for z in coupling.column_mut(j).iter_mut() {
            *z *= *v;
        }
    }
    d.coupling = coupling;
    Ok(d)
}

/// Binary entropy-like function of one symplectic eigenvalue, in bits.
pub fn ho_entropy(nu: f64) -> Result<f64> {
    if !(nu >= 1.0 - EIGENVALUE_TOLERANCE) || !nu.is_finite() {
        return Err(Error::UnphysicalEigenvalue(nu));
    }
    if nu <= 1.0 {
        return Ok(0.0);
    }
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * (nu - 1.0);
    Ok(plus * plus.log2() - minus * minus.log2())
}

/// Symplectic eigenvalues, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub eigenvalues: Vec<f64>,
}

/// Computed from the antisymmetric matrix `Lᵀ Ω L` (with `Σ = L Lᵀ`), whose
/// singular values are the symplectic eigenvalues, each appearing twice.
pub fn symplectic_eigenvalues(state: &QuadratureCovariance) -> Result<SymplecticSpectrum> {
    let n = state.matrix.nrows();
    let modes = n / 2;
    if modes == 0 {
        return Ok(SymplecticSpectrum { eigenvalues: Vec::new() });
    }
    if modes == 1 {
        let m = &state.matrix;
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        return Ok(SymplecticSpectrum {
            eigenvalues: vec![det.max(0.0).sqrt()],
        });
    }
    let factor = match state.matrix.clone().cholesky() {
        Some(c) => c.l(),
        None => psd_sqrt(&state.matrix)?,
    };
    // Ω L: rows (2k, 2k+1) of L become (row 2k+1, −row 2k)
    let mut omega_l = RMatrix::zeros(n, n);
    for k in 0..modes {
        omega_l.set_row(2 * k, &factor.row(2 * k + 1));
        omega_l.set_row(2 * k + 1, &(-factor.row(2 * k)));
    }
    let a = factor.transpose() * omega_l;
    let sv = linalg::real_singular_values(&a)?;
    let eigenvalues = sv.chunks(2).map(|p| 0.5 * (p[0] + p[p.len() - 1])).collect();
    Ok(SymplecticSpectrum { eigenvalues })
}

/// V·√Λ, a (non-triangular) square root of a PSD matrix.
fn psd_sqrt(m: &RMatrix) -> Result<RMatrix> {
    let (values, mut v) = linalg::symmetric_eigen(m)?;
    for (k, &lambda) in values.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        for z in v.column_mut(k).iter_mut() {
            *z *= s;
        }
    }
    Ok(v)
}

pub fn von_neumann_entropy(state: &QuadratureCovariance) -> Result<f64> {
    symplectic_eigenvalues(state)?
        .eigenvalues
        .iter()
        .try_fold(0.0, |acc, &nu| Ok(acc + ho_entropy(nu)?))
}

/// State of `kept_modes` after x-homodyne detection of every mode in
/// `measured_modes`: `Σ_K − C (Π Σ_M Π)⁺ Cᵀ`.
pub fn homodyne_condition(
    joint: &QuadratureCovariance,
    kept_modes: &[usize],
    measured_modes: &[usize],
) -> Result<QuadratureCovariance> {
    if kept_modes.iter().any(|k| measured_modes.contains(k)) {
        return Err(Error::Contract("kept and measured modes overlap".into()));
    }
    let kept = quadrature_indices(kept_modes, joint.mode_count())?;
    let measured: Vec<usize> = quadrature_indices(measured_modes, joint.mode_count())?
        .into_iter()
        .step_by(2)
        .collect();
    let sigma_k = joint.matrix.select_rows(&kept).select_columns(&kept);
    if measured.is_empty() {
        return Ok(QuadratureCovariance { matrix: sigma_k });
    }
    let cross = joint.matrix.select_rows(&kept).select_columns(&measured);
    if cross.iter().all(|v| *v == 0.0) {
        return Ok(QuadratureCovariance { matrix: sigma_k });
    }
    let sigma_m = joint.matrix.select_rows(&measured).select_columns(&measured);
    let pinv = linalg::pinv_symmetric(&sigma_m, PINV_TOLERANCE)?;
    let reduced = sigma_k - &cross * pinv * cross.transpose();
    Ok(QuadratureCovariance::symmetrized(reduced))
}
