//! Dense non-Hermitian eigendecomposition with right/left pairing,
//! biorthogonal normalization, and quality diagnostics.
//!
//! Everything runs in standard double precision on LAPACK's general
//! complex solver. Near an exceptional point the returned basis is nearly
//! parallel and the residuals say so; nothing is re-orthogonalized behind
//! the caller's back, since that would mask the very signal this crate
//! looks for.

use crate::error::{Error, Result};
use crate::models::{Hamiltonian, ModelSpec};
use crate::C64;
use ndarray::Array2;
use ndarray_linalg::{Eig, Eigh, UPLO};

/// Eigenvalues with matched right (and optionally left) eigenvectors.
///
/// Columns of `right` are unit-normalized; eigenvalues are sorted by
/// (real part, then imaginary part) ascending with columns permuted
/// consistently. Each right column is rotated so its largest-magnitude
/// entry is real positive, which makes file outputs deterministic.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub dim: usize,
    pub eigenvalues: Vec<C64>,
    pub right: Array2<C64>,
    pub left: Option<Array2<C64>>,
    /// max_n ||H r_n - E_n r_n|| / ||H||_F, recorded even when large.
    pub residual_right: f64,
    /// max |<L,n|R,m> - delta_nm| when left vectors are present.
    pub biorth_residual: Option<f64>,
}

/// Scalar summary of one spectrum.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SpectrumSummary {
    pub max_imag: f64,
    pub is_real: bool,
    pub min_gap: f64,
}

fn eig_sorted(matrix: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    let (values, vectors) = matrix.eig().map_err(|e| {
        Error::Numerical(format!(
            "dense eigensolver failed on {}x{} matrix: {e}",
            matrix.nrows(),
            matrix.ncols()
        ))
    })?;
    finalize_basis(values.to_vec(), &vectors)
}

/// Shared output convention: unit columns, largest entry rotated real
/// positive, eigenvalues lex-sorted by (re, im) with columns permuted along.
fn finalize_basis(values: Vec<C64>, vectors: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (values[a].re, values[a].im)
            .partial_cmp(&(values[b].re, values[b].im))
            .expect("finite eigenvalues")
    });
    let mut sorted_values = Vec::with_capacity(n);
    let mut sorted_vectors = Array2::<C64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        sorted_values.push(values[src]);
        let col = vectors.column(src);
        // Unit norm, then largest-magnitude entry rotated to real positive.
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical(format!(
                "eigenvector {src} has norm {norm}"
            )));
        }
        let pivot = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let phase = col[pivot] / col[pivot].norm();
        let scale = phase.conj() / norm;
        for (i, z) in col.iter().enumerate() {
            sorted_vectors[[i, dst]] = z * scale;
        }
    }
    Ok((sorted_values, sorted_vectors))
}

fn max_eigen_residual(h: &Array2<C64>, values: &[C64], vectors: &Array2<C64>) -> f64 {
    let hv = h.dot(vectors);
    let mut worst = 0.0f64;
    for (n, &e) in values.iter().enumerate() {
        let r: f64 = hv
            .column(n)
            .iter()
            .zip(vectors.column(n).iter())
            .map(|(a, b)| (a - e * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    worst
}

/// Right eigendecomposition. Never fails on defective matrices: near an EP
/// it returns whatever nearly parallel basis the solver produced, with the
/// residual reported.
pub fn eig_right(h: &Hamiltonian) -> Result<EigenSystem> {
    eig_right_matrix(&h.entries)
}

/// [`eig_right`] on a bare matrix.
pub fn eig_right_matrix(m: &Array2<C64>) -> Result<EigenSystem> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput("matrix not square".into()));
    }
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let (values, vectors) = eig_sorted(m)?;
    let hnorm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let residual = max_eigen_residual(m, &values, &vectors) / hnorm.max(f64::MIN_POSITIVE);
    Ok(EigenSystem {
        dim: m.nrows(),
        eigenvalues: values,
        right: vectors,
        left: None,
        residual_right: residual,
        biorth_residual: None,
    })
}

/// Right eigendecomposition of `H = M^-1 H0` through its Hermitian form
/// `B = M^(1/2) H M^(-1/2)`, given the positive diagonal of `M`.
///
/// The Hermitian solver keeps near-degenerate pairs orthogonal where the
/// general solver would return them numerically coalesced, so this path is
/// preferred whenever the weights are known.
pub fn eig_weighted(m: &Array2<C64>, weights: &[f64]) -> Result<EigenSystem> {
    let n = m.nrows();
    if m.ncols() != n || weights.len() != n {
        return Err(Error::InvalidInput(format!(
            "matrix {}x{} with {} weights",
            n,
            m.ncols(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be positive".into()));
    }
    let d: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut b = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            b[[i, j]] = m[[i, j]] * (d[i] / d[j]);
        }
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((b[[i, j]] - b[[j, i]].conj()).norm());
        }
    }
    if defect > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "weighted form deviates from Hermitian by {defect:.3e}; wrong weights"
        )));
    }
    let bt = b.t().mapv(|z| z.conj());
    let sym = (&b + &bt).mapv(|z| z * 0.5);
    let (evals, u) = sym
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver failed: {e}")))?;
    let mut psi = u;
    for i in 0..n {
        for j in 0..n {
            psi[[i, j]] /= C64::new(d[i], 0.0);
        }
    }
    let values: Vec<C64> = evals.iter().map(|&e| C64::new(e, 0.0)).collect();
    let (values, vectors) = finalize_basis(values, &psi)?;
    let hnorm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let residual = max_eigen_residual(m, &values, &vectors) / hnorm.max(f64::MIN_POSITIVE);
    Ok(EigenSystem {
        dim: n,
        eigenvalues: values,
        right: vectors,
        left: None,
        residual_right: residual,
        biorth_residual: None,
    })
}

/// [`eig_right`], but routed through [`eig_weighted`] when the model is the
/// three-band chain whose weights `(1, 1/g^2, 1)` per cell are known.
pub fn eig_auto(h: &Hamiltonian) -> Result<EigenSystem> {
    if let Some(ModelSpec::SturmLiouvilleChain { g, cells, .. }) = h.spec {
        if g != 0.0 {
            let per_cell = [1.0, 1.0 / (g * g), 1.0];
            let weights: Vec<f64> = (0..3 * cells).map(|i| per_cell[i % 3]).collect();
            return eig_weighted(&h.entries, &weights);
        }
    }
    eig_right(h)
}

/// Right plus left eigenvectors with biorthogonal normalization
/// `<L,n|R,n> = 1`.
///
/// Left vectors come from the conjugate transpose; each left eigenvalue is
/// conjugated and paired to the nearest unused right eigenvalue, smallest
/// distance first. A pairing distance beyond `1e-6 * ||H||_F` (or an
/// overlap too small to normalize) signals a near-degenerate or defective
/// spectrum and is surfaced as [`Error::PairingFailure`].
pub fn eig_biorthogonal(h: &Hamiltonian) -> Result<EigenSystem> {
    eig_biorthogonal_matrix(&h.entries)
}

pub fn eig_biorthogonal_matrix(m: &Array2<C64>) -> Result<EigenSystem> {
    let mut es = eig_right_matrix(m)?;
    let n = es.dim;
    let hnorm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let adjoint = m.t().mapv(|z| z.conj());
    let (left_values, left_vectors) = eig_sorted(&adjoint)?;

    // Greedy smallest-distance-first assignment between conj(left) and
    // right eigenvalues, each used once.
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (l, lv) in left_values.iter().enumerate() {
        for (r, rv) in es.eigenvalues.iter().enumerate() {
            pairs.push(((lv.conj() - rv).norm(), l, r));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let limit = 1e-6 * hnorm.max(f64::MIN_POSITIVE);
    let mut left_used = vec![false; n];
    let mut right_used = vec![false; n];
    let mut assignment = vec![usize::MAX; n]; // right index -> left index
    let mut matched = 0;
    let mut worst = 0.0f64;
    for (d, l, r) in pairs {
        if left_used[l] || right_used[r] {
            continue;
        }
        left_used[l] = true;
        right_used[r] = true;
        assignment[r] = l;
        worst = worst.max(d);
        matched += 1;
        if matched == n {
            break;
        }
    }
    if worst > limit {
        return Err(Error::PairingFailure {
            distance: worst,
            limit,
        });
    }

    // Rescale each left column so <L,n|R,n> = 1.
    let mut left = Array2::<C64>::zeros((n, n));
    for r in 0..n {
        let l = assignment[r];
        let overlap: C64 = left_vectors
            .column(l)
            .iter()
            .zip(es.right.column(r).iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        if overlap.norm() < 1e-12 {
            return Err(Error::PairingFailure {
                distance: overlap.norm(),
                limit: 1e-12,
            });
        }
        let scale = C64::new(1.0, 0.0) / overlap.conj();
        for i in 0..n {
            left[[i, r]] = left_vectors[[i, l]] * scale;
        }
    }

    // biorth residual: max |L^dagger R - I|.
    let lh = left.t().mapv(|z| z.conj());
    let gram = lh.dot(&es.right);
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((gram[[i, j]] - target).norm());
        }
    }
    es.left = Some(left);
    es.biorth_residual = Some(residual);
    Ok(es)
}

/// Summarize a spectrum; `is_real` holds when the largest imaginary part
/// is below `real_tol * max(1, max |E_n|)`.
pub fn spectrum_summary(es: &EigenSystem, real_tol: f64) -> SpectrumSummary {
    let max_imag = es
        .eigenvalues
        .iter()
        .map(|e| e.im.abs())
        .fold(0.0f64, f64::max);
    let max_abs = es
        .eigenvalues
        .iter()
        .map(|e| e.norm())
        .fold(0.0f64, f64::max);
    let mut min_gap = f64::INFINITY;
    for i in 0..es.eigenvalues.len() {
        for j in (i + 1)..es.eigenvalues.len() {
            min_gap = min_gap.min((es.eigenvalues[i] - es.eigenvalues[j]).norm());
        }
    }
    if !min_gap.is_finite() {
        min_gap = 0.0;
    }
    SpectrumSummary {
        max_imag,
        is_real: max_imag <= real_tol * max_abs.max(1.0),
        min_gap,
    }
}
