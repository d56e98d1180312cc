//! Cyclic Jacobi diagonalization of dense Hermitian matrices.
//!
//! Each rotation annihilates one off-diagonal pair `(p, q)`. For a complex
//! entry `a_pq = |a_pq|·e^{iφ}` the rotation is the phase-conjugated real
//! Jacobi rotation
//!
//! ```text
//! G = [[ c,          s·e^{iφ} ],
//!      [ −s·e^{−iφ}, c        ]]
//! ```
//!
//! which leaves `G† A G` with a vanishing `(p, q)` entry. Sweeps run over the
//! upper triangle in fixed row-major order, so the result is a deterministic
//! function of the input.

use std::ops::Range;

use serde::Serialize;

use super::matrix::{ComplexMatrix, HermitianOperator, UnitaryOperator, C64, ZERO};
use crate::error::{Error, Result};

/// Sweep cap; 64-dimensional well-conditioned inputs converge in well under 20.
pub const MAX_SWEEPS: usize = 100;

/// Convergence when ‖offdiag‖_F ≤ `CONVERGENCE`·‖H‖_F.
pub const CONVERGENCE: f64 = 1e-14;

/// Eigenvalues closer than this (absolute, units of J) form one degeneracy class.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// Index ranges of eigenvalues that chain together within [`DEGENERACY_TOL`].
    pub fn degeneracy_classes(&self) -> Vec<Range<usize>> {
        degeneracy_classes(&self.eigenvalues, DEGENERACY_TOL)
    }

    /// V·Λ·V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(n, n, |r, c| v[(r, c)] * self.eigenvalues[c]);
        scaled.matmul(&v.adjoint())
    }

    /// V·f(Λ)·V† for a complex function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let phases: Vec<C64> = self.eigenvalues.iter().map(|&e| f(e)).collect();
        let scaled = ComplexMatrix::from_fn(n, n, |r, c| v[(r, c)] * phases[c]);
        scaled.matmul(&v.adjoint())
    }
}

pub fn degeneracy_classes(sorted: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut classes = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > tol {
            if k > start {
                classes.push(start..k);
            }
            start = k;
        }
    }
    classes
}

/// Full spectral decomposition of a Hermitian operator.
///
/// Eigenvalues come back ascending. Within each degeneracy class the
/// eigenvectors are replaced by a canonical basis: standard basis vectors
/// `e_0, e_1, …` are projected onto the class eigenspace in order,
/// Gram–Schmidt orthogonalized against the vectors already accepted, and kept
/// when the remaining norm² exceeds `1/(4n)`. The kept vector's component
/// along its seed `e_j` is real and positive, which also fixes the phase of
/// nondegenerate eigenvectors.
pub fn hermitian_eig(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm();
    let target = CONVERGENCE * scale;
    let mut converged = n < 2 || off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off_diagonal_norm(&a),
            });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re).then(x.cmp(&y)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);

    for class in degeneracy_classes(&eigenvalues, DEGENERACY_TOL) {
        canonicalize_class(&mut eigenvectors, class);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                sum += a[(r, c)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    if t == 0.0 {
        // |a_pq| is negligible next to the diagonal gap
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = apq / mag;
    let s_phase = phase * s; // s·e^{iφ}
    let s_phase_conj = s_phase.conj(); // s·e^{−iφ}
    let n = a.rows();

    // A ← A·G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s_phase_conj;
        a[(k, q)] = akp * s_phase + akq * c;
    }
    // A ← G†·A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s_phase;
        a[(q, k)] = apk * s_phase_conj + aqk * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(app - t * mag, 0.0);
    a[(q, q)] = C64::new(aqq + t * mag, 0.0);

    // V ← V·G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s_phase_conj;
        v[(k, q)] = vkp * s_phase + vkq * c;
    }
}

fn canonicalize_class(vectors: &mut ComplexMatrix, class: Range<usize>) {
    let n = vectors.rows();
    let k = class.len();
    let span: Vec<Vec<C64>> = class.clone().map(|c| vectors.column(c)).collect();
    let threshold = 0.25 / n as f64;
    let mut chosen: Vec<Vec<C64>> = Vec::with_capacity(k);

    for seed in 0..n {
        if chosen.len() == k {
            break;
        }
        // P e_seed = Σ_m v_m · conj(v_m[seed])
        let mut w = vec![ZERO; n];
        for vm in &span {
            let coef = vm[seed].conj();
            for (wi, &x) in w.iter_mut().zip(vm) {
                *wi += x * coef;
            }
        }
        for _ in 0..2 {
            for u in &chosen {
                let proj: C64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, &ui) in w.iter_mut().zip(u) {
                    *wi -= ui * proj;
                }
            }
        }
        let norm_sqr: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr > threshold {
            // fix the residual phase so the seed component is real positive
            let phase = w[seed].conj() / w[seed].norm();
            let scale = phase / norm_sqr.sqrt();
            chosen.push(w.into_iter().map(|z| z * scale).collect());
        }
    }
    debug_assert_eq!(
        chosen.len(),
        k,
        "canonicalization must recover the full eigenspace"
    );
    for (offset, col) in chosen.iter().enumerate() {
        vectors.set_column(class.start + offset, col);
    }
}

/// exp(−iHt) built from the spectral decomposition of `h`.
pub fn expm_minus_i_h_t(h: &HermitianOperator, t: f64) -> Result<UnitaryOperator> {
    if !t.is_finite() {
        return Err(Error::Precondition(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(UnitaryOperator::identity(h.dim()));
    }
    let spectrum = hermitian_eig(h)?;
    Ok(propagator_from_spectrum(&spectrum, t))
}

pub(crate) fn propagator_from_spectrum(
    spectrum: &SpectralDecomposition,
    t: f64,
) -> UnitaryOperator {
    UnitaryOperator::from_matrix_unchecked(spectrum.apply_fn(|e| C64::from_polar(1.0, -e * t)))
}
