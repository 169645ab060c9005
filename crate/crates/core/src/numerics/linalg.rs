use nalgebra::linalg::SVD;

use crate::error::{check_dim, Error, Result};
use crate::numerics::{eigenvalues, Matrix, RngStream};

/// Relative singular-value cutoff for the unregularized (pseudo-inverse) solve.
pub const PINV_RCOND: f64 = 1e-12;

/// Matrix with i.i.d. entries uniform on `[lo, hi)`, drawn in row-major order.
pub fn uniform_matrix(
    rows: usize,
    cols: usize,
    lo: f64,
    hi: f64,
    rng: &mut RngStream,
) -> Result<Matrix> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidRange { lo, hi });
    }
    Ok(Matrix::from_fn(rows, cols, |_, _| rng.uniform(lo, hi)))
}

/// Orthogonal factor of the QR decomposition of an `n x n` matrix with
/// i.i.d. entries uniform on `[-1, 1)`.
pub fn qr_orthogonal(n: usize, rng: &mut RngStream) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "orthogonal matrix needs n >= 1".into(),
        ));
    }
    let a = uniform_matrix(n, n, -1.0, 1.0, rng)?;
    let q = a.to_dmatrix().qr().q();
    Ok(Matrix::from_dmatrix(&q))
}

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `m * (target / spectral_radius(m))`.
pub fn rescale_to_rho(m: &Matrix, target: f64) -> Result<Matrix> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidInput(format!(
            "target spectral radius must be positive, got {target}"
        )));
    }
    let rho = spectral_radius(m)?;
    // a radius at rounding level means the draw is numerically nilpotent
    if !(rho > f64::EPSILON * m.max_abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::CannotRescale);
    }
    Ok(m.scaled(target / rho))
}

fn svd(m: &Matrix, want_vectors: bool) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    SVD::try_new(m.to_dmatrix(), want_vectors, want_vectors, f64::EPSILON, 0)
        .ok_or_else(|| Error::Convergence("SVD did not converge".into()))
}

/// Largest singular value (the spectral norm).
pub fn operator_norm_2(m: &Matrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(svd(m, false)?.singular_values.max())
}

/// Ridge regression through the SVD of the design matrix.
///
/// Given states `h` (S x F) and targets `y` (S x O) returns `W` (O x F)
/// minimizing `||h Wᵀ - y||² + lambda ||W||²`. Singular values are filtered
/// by `σ / (σ² + λ)`; with `lambda == 0` this is the pseudo-inverse with
/// components below `PINV_RCOND * σ_max` dropped.
pub fn ridge_solve(h: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    check_dim("ridge sample count", h.rows(), y.rows())?;
    if h.rows() == 0 {
        return Err(Error::InsufficientData(
            "ridge regression needs at least one sample".into(),
        ));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ridge lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if !y.is_finite() {
        return Err(Error::InvalidInput(
            "targets have non-finite entries".into(),
        ));
    }
    let (s, f) = h.shape();
    let o = y.cols();
    if f == 0 {
        return Ok(Matrix::zeros(o, 0));
    }

    // Tall designs are compressed with a QR first: h = Q R, so the SVD of the
    // small R factor gives the same right singular system and Qᵀy stands in for y.
    let (core, rhs) = if s > 2 * f {
        let qr = h.to_dmatrix().qr();
        let (q, r) = qr.unpack();
        let qty = q.transpose() * y.to_dmatrix();
        (Matrix::from_dmatrix(&r), Matrix::from_dmatrix(&qty))
    } else {
        (h.clone(), y.clone())
    };

    let dec = svd(&core, true)?;
    let u = dec.u.as_ref().expect("left vectors requested");
    let vt = dec.v_t.as_ref().expect("right vectors requested");
    let sigma = &dec.singular_values;
    let sigma_max = sigma.max();
    let filt: Vec<f64> = sigma
        .iter()
        .map(|&sv| {
            if lambda == 0.0 {
                if sv > PINV_RCOND * sigma_max {
                    1.0 / sv
                } else {
                    0.0
                }
            } else {
                sv / (sv * sv + lambda)
            }
        })
        .collect();

    // W = (V diag(filt) Uᵀ rhs)ᵀ
    let uty = u.transpose() * rhs.to_dmatrix(); // k x O
    let k = filt.len();
    let mut w = Matrix::zeros(o, f);
    for out in 0..o {
        for comp in 0..k {
            let c = filt[comp] * uty[(comp, out)];
            if c == 0.0 {
                continue;
            }
            let row = w.row_mut(out);
            for (j, wj) in row.iter_mut().enumerate() {
                *wj += c * vt[(comp, j)];
            }
        }
    }
    Ok(w)
}
