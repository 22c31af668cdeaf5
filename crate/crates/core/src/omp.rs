//! Joint-support orthogonal matching pursuit over a polar (or angular)
//! dictionary, and NMSE scoring.
//!
//! All `M` subcarriers share one support: each iteration scores every atom by
//! the energy of its correlation with the whole residual matrix, adds the
//! best one, refits the support coefficients, and updates the residual.

use log::warn;
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::config::{AtomSelection, CoefficientUpdate};
use crate::dictionary::PolarDictionary;
use crate::error::{Error, Result};
use crate::measurement::CombiningMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmpOptions {
    pub iterations: usize,
    pub selection: AtomSelection,
    pub update: CoefficientUpdate,
}

impl OmpOptions {
    pub fn new(iterations: usize) -> Self {
        Self {
            iterations,
            selection: AtomSelection::default(),
            update: CoefficientUpdate::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseEstimate {
    /// Selected columns in selection order.
    pub support: Vec<usize>,
    /// `S x M`, zero off the support.
    pub coeffs_polar: CMatrix,
    /// `N x M` antenna-domain estimate; empty when estimated from a bare
    /// sensing matrix.
    pub reconstructed: CMatrix,
    /// `||R||_F` after each iteration.
    pub residual_norms: Vec<f64>,
    /// Set when some least-squares refit fell back to the minimum-norm
    /// solution of a rank-deficient column set.
    pub rank_deficient: bool,
}

/// Least-squares fit of `y` on `columns`; returns the coefficients and
/// whether the column set was rank deficient.
fn least_squares(columns: &CMatrix, y: &CMatrix) -> (CMatrix, bool) {
    let svd = columns.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let tol = f64::EPSILON * columns.nrows().max(columns.ncols()) as f64 * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let coeffs = svd
        .solve(y, tol)
        .expect("SVD computed with both singular vector sets");
    (coeffs, rank < columns.ncols())
}

/// OMP on an explicit sensing matrix `A` (rows x S).
pub fn omp_sensing(y: &CMatrix, sensing: &CMatrix, options: OmpOptions) -> Result<SparseEstimate> {
    let rows = sensing.nrows();
    let s = sensing.ncols();
    let t = options.iterations;
    if y.nrows() != rows {
        return Err(Error::shape(
            format!("{rows} observation rows"),
            format!("{} x {}", y.nrows(), y.ncols()),
        ));
    }
    if t == 0 {
        return Err(Error::invalid("OMP needs at least one iteration"));
    }
    if t > rows {
        return Err(Error::invalid(format!(
            "{t} iterations exceed the {rows} measurements available for least squares"
        )));
    }
    if t > s {
        return Err(Error::invalid(format!("{t} iterations exceed the {s} dictionary columns")));
    }

    let column_energy: Vec<f64> = sensing.column_iter().map(|c| c.norm_squared()).collect();
    let mut residual = y.clone();
    let mut support: Vec<usize> = Vec::with_capacity(t);
    let mut selected = vec![false; s];
    let mut residual_norms = Vec::with_capacity(t);
    let mut rank_deficient = false;
    let mut support_coeffs = CMatrix::zeros(0, y.ncols());

    for _ in 0..t {
        let correlation = sensing.ad_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for k in (0..s).filter(|&k| !selected[k]) {
            let energy = correlation.row(k).norm_squared();
            let score = match options.selection {
                AtomSelection::Raw => energy,
                AtomSelection::Normalized if column_energy[k] > 0.0 => energy / column_energy[k],
                AtomSelection::Normalized => 0.0,
            };
            // Strict comparison: the lowest index wins ties.
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((k, score));
            }
        }
        let (k_star, _) = best.expect("t <= S leaves an unselected column");
        selected[k_star] = true;
        support.push(k_star);

        let columns = sensing.select_columns(&support);
        support_coeffs = match options.update {
            CoefficientUpdate::LeastSquares => {
                let (c, deficient) = least_squares(&columns, y);
                rank_deficient |= deficient;
                c
            }
            CoefficientUpdate::MatchedFilter => columns.ad_mul(y),
        };
        residual = y - &columns * &support_coeffs;
        residual_norms.push(residual.norm());
    }

    if rank_deficient {
        warn!("OMP support {support:?} is rank deficient; used minimum-norm coefficients");
    }
    let mut coeffs_polar = CMatrix::zeros(s, y.ncols());
    for (row, &k) in support.iter().enumerate() {
        coeffs_polar.set_row(k, &support_coeffs.row(row));
    }
    Ok(SparseEstimate {
        support,
        coeffs_polar,
        reconstructed: CMatrix::zeros(0, y.ncols()),
        residual_norms,
        rank_deficient,
    })
}

/// OMP with sensing matrix `A = W U`; fills in `reconstructed = U H^P`.
pub fn omp(
    y: &CMatrix,
    w: &CombiningMatrix,
    dict: &PolarDictionary,
    options: OmpOptions,
) -> Result<SparseEstimate> {
    if w.matrix.ncols() != dict.n_rows() {
        return Err(Error::shape(
            format!("combiner with {} columns", dict.n_rows()),
            format!("{} x {}", w.matrix.nrows(), w.matrix.ncols()),
        ));
    }
    let sensing = &w.matrix * dict.matrix();
    let mut estimate = omp_sensing(y, &sensing, options)?;
    estimate.reconstructed = reconstruct(&estimate, dict)?;
    Ok(estimate)
}

/// `H = U H^P`.
pub fn reconstruct(estimate: &SparseEstimate, dict: &PolarDictionary) -> Result<CMatrix> {
    dict.synthesize(&estimate.coeffs_polar)
}

/// `||H - H_hat||_F^2 / ||H||_F^2`.
pub fn nmse(h: &CMatrix, h_hat: &CMatrix) -> Result<f64> {
    if h.shape() != h_hat.shape() {
        return Err(Error::shape(
            format!("{:?}", h.shape()),
            format!("{:?}", h_hat.shape()),
        ));
    }
    let power = h.norm_squared();
    if !(power > 0.0) {
        return Err(Error::invalid("reference channel has zero norm"));
    }
    Ok((h - h_hat).norm_squared() / power)
}

pub fn nmse_db(h: &CMatrix, h_hat: &CMatrix) -> Result<f64> {
    Ok(10.0 * nmse(h, h_hat)?.log10())
}

/// Column `k` of `sensing` scaled by `c`, repeated over `m` subcarriers.
pub fn planted_observation(sensing: &CMatrix, k: usize, c: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(sensing.nrows(), c.len(), |i, m| sensing[(i, k)] * c[m])
}
