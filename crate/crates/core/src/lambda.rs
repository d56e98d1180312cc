//! Adiabatic tracking of the two-qubit logical levels as an inter-triple
//! coupling J₁₄ is switched on.
//!
//! All four logical states share S_z = +1, so tracking runs in that 15-state
//! sector. At every step each reference vector is matched to the degeneracy
//! class that carries the largest share of its weight, then replaced by its
//! normalized projection onto that class.

use serde::Serialize;

use crate::encoding::LogicalLayout;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, C64, ZERO};
use crate::spin::{build_hamiltonian, sz_sector, CouplingGraph, SectorBasis};

/// Largest parameter increment between successive diagonalizations.
pub const TRACKING_STEP: f64 = 1e-3;

/// Minimum projected weight for an unambiguous match.
pub const MIN_OVERLAP: f64 = 0.5;

/// Follows the logical levels along a path `s ↦ graph(s)`.
#[derive(Clone)]
pub struct LevelTracker<F> {
    path: F,
    sector: SectorBasis,
    references: Vec<Vec<C64>>,
    energies: Vec<f64>,
    others: Vec<f64>,
    parameter: f64,
    max_step: f64,
}

impl<F: Fn(f64) -> Result<CouplingGraph>> LevelTracker<F> {
    /// Starts at `start` from the layout's logical basis states.
    pub fn new(path: F, layout: &LogicalLayout, start: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) || !start.is_finite() {
            return Err(Error::Precondition(format!(
                "invalid tracking start {start} / step {max_step}"
            )));
        }
        let sector = sz_sector(layout.n_sites(), layout.twice_m())?;
        let references = layout
            .basis_states()
            .iter()
            .map(|s| sector.restrict_vector(s.amplitudes()))
            .collect();
        let mut tracker = Self {
            path,
            sector,
            references,
            energies: Vec::new(),
            others: Vec::new(),
            parameter: start,
            max_step,
        };
        tracker.settle(start)?;
        Ok(tracker)
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    /// Tracked energies in logical basis order.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Sector eigenvalues not claimed by any tracked level, ascending.
    pub fn other_levels(&self) -> &[f64] {
        &self.others
    }

    /// Current tracked eigenvectors in sector coordinates.
    pub fn references(&self) -> &[Vec<C64>] {
        &self.references
    }

    pub fn sector(&self) -> &SectorBasis {
        &self.sector
    }

    /// Steps to `target` in increments of at most `max_step`.
    pub fn advance_to(&mut self, target: f64) -> Result<&[f64]> {
        if !target.is_finite() {
            return Err(Error::Precondition(format!(
                "tracking target must be finite, got {target}"
            )));
        }
        let span = target - self.parameter;
        let steps = (span.abs() / self.max_step).ceil().max(1.0) as usize;
        let origin = self.parameter;
        for k in 1..=steps {
            let s = if k == steps {
                target
            } else {
                origin + span * k as f64 / steps as f64
            };
            self.settle(s)?;
        }
        Ok(&self.energies)
    }

    fn settle(&mut self, s: f64) -> Result<()> {
        let graph = (self.path)(s)?;
        let block = self.sector.restrict(&build_hamiltonian(&graph));
        let spectrum = hermitian_eig(&block)?;
        let classes = spectrum.degeneracy_classes();
        let vectors: Vec<Vec<C64>> = (0..spectrum.dim())
            .map(|k| spectrum.eigenvector(k))
            .collect();
        let mut claims = vec![0usize; classes.len()];
        let mut energies = Vec::with_capacity(self.references.len());

        for reference in self.references.iter_mut() {
            let coefficients: Vec<C64> = vectors.iter().map(|v| dot(v, reference)).collect();
            let (best, weight) = classes
                .iter()
                .enumerate()
                .map(|(c, range)| {
                    (
                        c,
                        range
                            .clone()
                            .map(|k| coefficients[k].norm_sqr())
                            .sum::<f64>(),
                    )
                })
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                );
            if weight < MIN_OVERLAP {
                return Err(Error::TrackingAmbiguity {
                    j14: s,
                    overlap: weight,
                });
            }
            let range = classes[best].clone();
            claims[best] += 1;
            energies.push(
                range.clone().map(|k| spectrum.eigenvalues[k]).sum::<f64>() / range.len() as f64,
            );

            let mut next = vec![ZERO; reference.len()];
            for k in range {
                for (n, &x) in next.iter_mut().zip(&vectors[k]) {
                    *n += x * coefficients[k];
                }
            }
            let norm = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            *reference = next.into_iter().map(|z| z / norm).collect();
        }

        let mut others = Vec::new();
        for (c, range) in classes.iter().enumerate() {
            for k in range.clone().skip(claims[c]) {
                others.push(spectrum.eigenvalues[k]);
            }
        }
        self.energies = energies;
        self.others = others;
        self.parameter = s;
        Ok(())
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Tracked energies of the four two-qubit logical states at one J₁₄.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaTriple {
    pub j14: f64,
    pub lambda_00: f64,
    pub lambda_01: f64,
    pub lambda_10: f64,
    pub lambda_11: f64,
}

impl LambdaTriple {
    fn from_energies(j14: f64, e: &[f64]) -> Self {
        Self {
            j14,
            lambda_00: e[0],
            lambda_01: e[1],
            lambda_10: e[2],
            lambda_11: e[3],
        }
    }

    /// λ₀₀ + λ₁₁ − 2λ₀₁, the conditional-phase accumulation rate.
    pub fn entangling_rate(&self) -> f64 {
        self.lambda_00 + self.lambda_11 - 2.0 * self.lambda_01
    }
}

fn pair_path(field: f64) -> impl Fn(f64) -> Result<CouplingGraph> {
    move |j14| CouplingGraph::idle_pair(j14, field)
}

fn check_j14(j14: f64) -> Result<()> {
    if !(j14 >= 0.0 && j14.is_finite()) {
        return Err(Error::Precondition(format!(
            "J14 must be finite and non-negative, got {j14}"
        )));
    }
    Ok(())
}

/// Logical energies at `j14`, tracked up from J₁₄ = 0.
pub fn lambda_spectrum(j14: f64, field: f64) -> Result<LambdaTriple> {
    Ok(lambda_path(&[j14], field)?.remove(0))
}

/// Logical energies along an ascending grid, tracked in a single pass.
pub fn lambda_path(grid: &[f64], field: f64) -> Result<Vec<LambdaTriple>> {
    for &j in grid {
        check_j14(j)?;
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("J14 grid must be ascending".into()));
    }
    let mut tracker =
        LevelTracker::new(pair_path(field), &LogicalLayout::pair(), 0.0, TRACKING_STEP)?;
    grid.iter()
        .map(|&j| {
            let e = tracker.advance_to(j)?;
            Ok(LambdaTriple::from_energies(j, e))
        })
        .collect()
}

/// `4λ − (J − 9)`, which vanishes on the |00⟩ branch for every J.
pub fn line_00(lambda: f64, j14: f64) -> f64 {
    4.0 * lambda - (j14 - 9.0)
}

/// `4λ − (J − 3)`, the same line with constant 3.
pub fn line_00_c3(lambda: f64, j14: f64) -> f64 {
    4.0 * lambda - (j14 - 3.0)
}

/// `16λ² + 8Jλ − 3J² + 16J + 27`, as listed for the |11⟩ branch.
pub fn quadratic_11(lambda: f64, j14: f64) -> f64 {
    16.0 * lambda * lambda + 8.0 * j14 * lambda - 3.0 * j14 * j14 + 16.0 * j14 + 27.0
}

/// Discriminant of [`quadratic_11`] in λ, `64(4J² − 16J − 27)`. Negative on
/// 0 ≤ J < (4 + √43)/2, where the quadratic has no real root.
pub fn quadratic_11_discriminant(j14: f64) -> f64 {
    64.0 * (4.0 * j14 * j14 - 16.0 * j14 - 27.0)
}

/// `64λ³ + 16(J + 9)λ² − 4(5J² − 14J + 9)λ + 3J³ − 23J² + 37J − 81`, as
/// listed for the |01⟩ branch.
pub fn cubic_01(lambda: f64, j14: f64) -> f64 {
    let (l, j) = (lambda, j14);
    64.0 * l * l * l + 16.0 * (j + 9.0) * l * l - 4.0 * (5.0 * j * j - 14.0 * j + 9.0) * l
        + 3.0 * j * j * j
        - 23.0 * j * j
        + 37.0 * j
        - 81.0
}

/// Residuals of the closed-form level relations at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolynomialCheck {
    pub lambdas: LambdaTriple,
    pub line_00: f64,
    pub line_00_c3: f64,
    pub quadratic_11: f64,
    pub quadratic_11_has_real_root: bool,
    pub cubic_01: f64,
    /// The cubic evaluated on the |11⟩ branch instead.
    pub cubic_at_11: f64,
    /// The quadratic evaluated on the |01⟩ branch instead.
    pub quadratic_at_01: f64,
}

/// Evaluates every closed-form relation on the tracked levels over `grid`.
pub fn verify_lambda_polynomials(grid: &[f64], field: f64) -> Result<Vec<PolynomialCheck>> {
    Ok(lambda_path(grid, field)?
        .into_iter()
        .map(|l| PolynomialCheck {
            lambdas: l,
            line_00: line_00(l.lambda_00, l.j14),
            line_00_c3: line_00_c3(l.lambda_00, l.j14),
            quadratic_11: quadratic_11(l.lambda_11, l.j14),
            quadratic_11_has_real_root: quadratic_11_discriminant(l.j14) >= 0.0,
            cubic_01: cubic_01(l.lambda_01, l.j14),
            cubic_at_11: cubic_01(l.lambda_11, l.j14),
            quadratic_at_01: quadratic_11(l.lambda_01, l.j14),
        })
        .collect())
}

/// Least-squares polynomial fit, coefficients in ascending order.
///
/// The abscissae are scaled to [−1, 1] and the Vandermonde system is solved
/// by Householder QR.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = xs.len();
    let m = degree + 1;
    if ys.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} abscissae but {} ordinates",
            ys.len()
        )));
    }
    if n < m {
        return Err(Error::Precondition(format!(
            "degree {degree} fit needs at least {m} points, got {n}"
        )));
    }
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !(scale > 0.0) || xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Precondition(
            "fit data must be finite and not all at zero".into(),
        ));
    }

    // column-major Vandermonde in scaled variable
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|k| xs.iter().map(|x| (x / scale).powi(k as i32)).collect())
        .collect();
    let mut b = ys.to_vec();
    for k in 0..m {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Precondition("fit abscissae are degenerate".into()));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for col in a.iter_mut().skip(k).chain(std::iter::once(&mut b)) {
            let proj: f64 = v.iter().zip(&col[k..]).map(|(p, q)| p * q).sum::<f64>() * 2.0 / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= proj * vi;
            }
        }
    }
    let mut coeffs = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|j| a[j][k] * coeffs[j]).sum();
        coeffs[k] = (b[k] - s) / a[k][k];
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c /= scale.powi(k as i32);
    }
    Ok(coeffs)
}
