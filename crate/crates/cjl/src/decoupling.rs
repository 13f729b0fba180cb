//! The decoupled matrix Y, its singular spectrum, and the summand operators.
//!
//! For f(x) = M D x with circulant symbol a and signs kappa, substituting
//! u = (j - i) mod d in the i-th output coordinate turns the random-in-a
//! product into a fixed matrix acting on a:
//!
//!   (M D x)[i] = sum_u a[u] * x[(u+i) mod d] * kappa[(u+i) mod d] = (Y a)[i],
//!
//! so Y[i][j] = x[(j+i) mod d] * kappa[(j+i) mod d]. All concentration
//! analysis happens through Y's singular values lambda_j (mu_j = lambda_j^2):
//! with the SVD Y = U Sigma V^T and b = V^T a, the embedded norm is
//! ||Y a||^2 = sum_j mu_j b_j^2. This module builds Y, extracts the
//! spectrum, and cross-checks the whole chain numerically.

use crate::circulant::SignDiagonal;
use crate::eigen::{sym_eigen, sym_eigenvalues};
use crate::embedder::CirculantEmbedder;
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::mat::{norm_sq, Mat};
use num_complex::Complex64;

/// Y together with its squared singular values, descending.
#[derive(Debug, Clone)]
pub struct DecoupledMatrix {
    y: Mat,
    mu: Vec<f64>,
    sigma_max: f64,
}

/// Build Y from a unit vector x and the sign diagonal.
///
/// Row i of Y is the pointwise product x .* kappa rotated left by i. The
/// unit-norm requirement is enforced rather than normalized away: every
/// row of Y then has norm exactly ||x|| = 1, which makes the Frobenius
/// identity sum(mu) = k a meaningful post-check on the eigensolve instead
/// of a tautology.
pub fn build_y(x: &[f64], kappa: &SignDiagonal, k: usize) -> Result<DecoupledMatrix> {
    let d = x.len();
    if kappa.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: kappa.len(),
        });
    }
    if k == 0 || k > d {
        return Err(Error::invalid(format!(
            "build_y: k={k} must satisfy 1 <= k <= d={d}"
        )));
    }
    let nrm = norm_sq(x).sqrt();
    if !nrm.is_finite() || (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "build_y: x must be a unit vector (||x|| = {nrm}); normalize upstream"
        )));
    }
    let w: Vec<f64> = x.iter().zip(kappa.signs()).map(|(xi, s)| xi * s).collect();
    let mut y = Mat::zeros(k, d);
    for i in 0..k {
        let row = y.row_mut(i);
        row[..d - i].copy_from_slice(&w[i..]);
        row[d - i..].copy_from_slice(&w[..i]);
    }

    // spectrum of Y Y^T, descending, clamped to [0, inf)
    let mut mu = sym_eigenvalues(&circular_gram(&w, k))?;
    mu.reverse();
    for m in mu.iter_mut() {
        *m = m.max(0.0);
    }
    let trace: f64 = mu.iter().sum();
    if (trace - k as f64).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "build_y: sum of squared singular values {trace} strayed from k={k}"
        )));
    }
    let sigma_max = mu[0].sqrt();
    Ok(DecoupledMatrix { y, mu, sigma_max })
}

impl DecoupledMatrix {
    pub fn k(&self) -> usize {
        self.y.rows()
    }

    pub fn d(&self) -> usize {
        self.y.cols()
    }

    pub fn matrix(&self) -> &Mat {
        &self.y
    }

    /// Squared singular values mu_j = lambda_j^2, descending.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// ||mu||_inf = mu_0, the squared spectral norm.
    pub fn mu_inf(&self) -> f64 {
        self.mu[0]
    }

    /// ||mu||_1 = sum(mu) = ||Y||_F^2, which equals k for unit x.
    pub fn mu_l1(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Y a.
    pub fn apply(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: a.len(),
            });
        }
        Ok(self.y.mul_vec(a))
    }

    /// Full thin SVD, recomputed from Y (the eigensolve here also produces
    /// the vectors, which the spectrum-only construction path skips).
    pub fn svd(&self) -> Result<SvdFactors> {
        SvdFactors::from_y(&self.y)
    }
}

/// Spectral norm ||Y|| = sigma_max, from the symmetric eigensolve of Y Y^T.
pub fn spectral_norm(y: &DecoupledMatrix) -> f64 {
    y.sigma_max
}

/// Gram matrix Y Y^T of the decoupled matrix built from `w`, without
/// materialising Y. Because row i of Y is w rotated left by i,
///
///   (Y Y^T)[i][l] = sum_u w[u] w[(u + l - i) mod d] = r[(l - i) mod d],
///
/// the circular autocorrelation of w at lag l - i. The full lag table comes
/// from one FFT round trip (r = IDFT(|DFT(w)|^2)), after which the k x k Gram
/// is a table lookup. This is the hot path of the Monte-Carlo estimators,
/// where the Gram is rebuilt for every resampled sign pattern.
pub(crate) fn circular_gram(w: &[f64], k: usize) -> Mat {
    let d = w.len();
    let plan = FftPlan::new(d);
    let mut what = plan.forward_real(w);
    for c in what.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    let r = plan.inverse(&what);
    let mut g = Mat::zeros(k, k);
    for i in 0..k {
        for l in 0..k {
            g[(i, l)] = r[(l + d - i) % d].re;
        }
    }
    // Exact symmetry is what the eigensolver's input check expects, and the
    // lag table gives it for free: r[lag] = r[d - lag] up to rounding.
    for i in 0..k {
        for l in 0..i {
            let s = 0.5 * (g[(i, l)] + g[(l, i)]);
            g[(i, l)] = s;
            g[(l, i)] = s;
        }
    }
    g
}

/// Thin SVD Y = U Sigma V^T with U k x k, Sigma descending, V d x k.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

impl SvdFactors {
    fn from_y(y: &Mat) -> Result<SvdFactors> {
        let (k, d) = (y.rows(), y.cols());
        let eig = sym_eigen(&y.gram())?;
        let vectors = eig.vectors.expect("eigensolve was asked for vectors");
        // ascending eigenpairs -> descending singular values
        let mut u = Mat::zeros(k, k);
        let mut sigma = vec![0.0; k];
        for j in 0..k {
            let src = k - 1 - j;
            sigma[j] = eig.values[src].max(0.0).sqrt();
            for r in 0..k {
                u[(r, j)] = vectors[(r, src)];
            }
        }
        // right factor: v_j = Y^T u_j / sigma_j while sigma_j is resolvable.
        // The Gram route floors the resolvable scale at sigma_max*sqrt(d*eps)
        // (eigenvalues of Y Y^T carry absolute noise ~ eps*||Y||^2); below it
        // the singular value is zeroed and the column completed orthonormally.
        let rank_floor = sigma[0] * (d as f64 * f64::EPSILON).sqrt();
        let mut v = Mat::zeros(d, k);
        for j in 0..k {
            if sigma[j] > rank_floor {
                let uj: Vec<f64> = (0..k).map(|r| u[(r, j)]).collect();
                let col = y.tr_mul_vec(&uj);
                for r in 0..d {
                    v[(r, j)] = col[r] / sigma[j];
                }
            } else {
                sigma[j] = 0.0;
                fill_orthonormal_column(&mut v, j)?;
            }
        }
        Ok(SvdFactors { u, sigma, v })
    }

    /// b = V^T a, the coefficient vector of a in the right singular basis.
    pub fn coefficients(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.v.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.v.rows(),
                got: a.len(),
            });
        }
        Ok(self.v.tr_mul_vec(a))
    }
}

/// Set column `j` of `v` to a unit vector orthogonal to columns 0..j, found
/// by Gram-Schmidt over canonical basis vectors (two passes for stability).
fn fill_orthonormal_column(v: &mut Mat, j: usize) -> Result<()> {
    let d = v.rows();
    for candidate in 0..d {
        let mut col = vec![0.0; d];
        col[candidate] = 1.0;
        for _pass in 0..2 {
            for prev in 0..j {
                let mut proj = 0.0;
                for r in 0..d {
                    proj += col[r] * v[(r, prev)];
                }
                for r in 0..d {
                    col[r] -= proj * v[(r, prev)];
                }
            }
        }
        let nrm = norm_sq(&col).sqrt();
        if nrm > 0.5 {
            for r in 0..d {
                v[(r, j)] = col[r] / nrm;
            }
            return Ok(());
        }
    }
    Err(Error::Numerical(
        "could not complete an orthonormal basis for V".into(),
    ))
}

/// The three routes to the embedded squared norm.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DecouplingReport {
    /// ||M D x||^2, computed through the FFT apply path (unscaled).
    pub lhs: f64,
    /// ||Y a||^2, computed by the dense matrix-vector product.
    pub rhs: f64,
    /// sum_j mu_j b_j^2 with b = V^T a from the SVD.
    pub svd_route: f64,
    /// true iff all three values agree within 1e-8 relative.
    pub ok: bool,
}

/// Check ||M D x||^2 = ||Y a||^2 = sum_j mu_j b_j^2 on one instance.
///
/// The three routes share no code: the first runs the frequency-domain
/// apply, the second a dense product against Y, the third goes through the
/// singular value decomposition. Their agreement is the decoupling identity.
pub fn verify_decoupling(e: &CirculantEmbedder, x: &[f64]) -> Result<DecouplingReport> {
    if x.len() != e.spec.d {
        return Err(Error::DimensionMismatch {
            expected: e.spec.d,
            got: x.len(),
        });
    }
    let lhs = norm_sq(&e.m.apply_fft(&e.dk.apply(x)?)?);

    let y = build_y(x, &e.dk, e.spec.k)?;
    let a = e.m.symbol();
    let rhs = norm_sq(&y.apply(a)?);

    let svd = y.svd()?;
    let b = svd.coefficients(a)?;
    let svd_route: f64 = svd
        .sigma
        .iter()
        .zip(&b)
        .map(|(s, bj)| s * s * bj * bj)
        .sum();

    let denom = rhs.max(f64::MIN_POSITIVE);
    let ok = (lhs - rhs).abs() / denom <= 1e-8 && (rhs - svd_route).abs() / denom <= 1e-8;
    Ok(DecouplingReport {
        lhs,
        rhs,
        svd_route,
        ok,
    })
}

/// The i-th summand B_i = x_i * S * P^i * C of the decomposition
/// Y = sum_i kappa_i B_i, materialized densely.
///
/// P is the cyclic down-shift (row r has its 1 in column (r-1) mod d), C the
/// index reversal fixing 0 (row r has its 1 in column (-r) mod d), S the
/// first-k-rows selector. Multiplying out gives the closed form
/// B_i[r][c] = x_i * [c == (i - r) mod d].
pub fn build_summand(x: &[f64], i: usize, k: usize, d: usize) -> Result<Mat> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if i >= d {
        return Err(Error::invalid(format!(
            "build_summand: index i={i} out of range for d={d}"
        )));
    }
    if k == 0 || k > d {
        return Err(Error::invalid(format!(
            "build_summand: k={k} must satisfy 1 <= k <= d={d}"
        )));
    }
    let mut b = Mat::zeros(k, d);
    for r in 0..k {
        let c = (i + d - r) % d;
        b[(r, c)] = x[i];
    }
    Ok(b)
}
