//! The end-to-end embedding f(x) = (1/sqrt(k)) * M * D * x, together with
//! embedding-dimension selection and pairwise distortion evaluation.

use crate::circulant::{PartialCirculant, SignDiagonal};
use crate::error::{Error, Result};
use crate::mat::norm_sq;
use crate::prng::{DistributionTag, SeedSpec};

/// Problem-size and tail parameters for one embedding setup.
///
/// `epsilon` is the relative distortion target, `delta` the exponent on the
/// log factor, and `tau` the concentration level used by the spectral-norm
/// event; together they drive both the tail bounds and [`choose_k`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EmbeddingSpec {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub tau: f64,
}

impl EmbeddingSpec {
    pub fn new(d: usize, k: usize, n: usize, epsilon: f64, delta: f64, tau: f64) -> Result<Self> {
        let spec = EmbeddingSpec {
            d,
            k,
            n,
            epsilon,
            delta,
            tau,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.d {
            return Err(Error::invalid(format!(
                "embedding dimension k={} must satisfy 1 <= k <= d={}",
                self.k, self.d
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::invalid(format!(
                "epsilon={} must lie in (0, 1/2)",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::invalid(format!(
                "delta={} must be positive",
                self.delta
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid(format!("tau={} must be positive", self.tau)));
        }
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "point count n={} must be at least 2",
                self.n
            )));
        }
        Ok(())
    }

    /// The log factor ln^delta(n) shared by the tail bounds.
    pub fn log_factor(&self) -> f64 {
        (self.n as f64).ln().powf(self.delta)
    }
}

/// A sampled embedding: f(x) = scale * M * D * x.
#[derive(Debug, Clone)]
pub struct CirculantEmbedder {
    pub spec: EmbeddingSpec,
    pub m: PartialCirculant,
    pub dk: SignDiagonal,
    pub dist: DistributionTag,
    pub scale: f64,
}

/// Smallest k making the two-sided union bound over all ordered pairs meet
/// `failure_budget`: k = ceil((8 tau / eps^2) * ln^delta(n) * ln(n(n-1)/budget)).
///
/// Natural logarithms throughout. Note this grows like eps^-2 log^(1+delta) n,
/// so desk-scale d is usually the binding constraint; callers clamp to d.
pub fn choose_k(
    n: usize,
    epsilon: f64,
    delta: f64,
    tau: f64,
    failure_budget: f64,
) -> Result<usize> {
    let raw = choose_k_raw(n, epsilon, delta, tau, failure_budget)?;
    Ok(raw.ceil() as usize)
}

/// The closed form before rounding; exposed for scaling diagnostics.
pub fn choose_k_raw(
    n: usize,
    epsilon: f64,
    delta: f64,
    tau: f64,
    failure_budget: f64,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("choose_k: n must be at least 2"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid("choose_k: epsilon must lie in (0, 1/2)"));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("choose_k: delta must be positive"));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("choose_k: tau must be positive"));
    }
    if !(failure_budget > 0.0 && failure_budget < 1.0) {
        return Err(Error::invalid(
            "choose_k: failure budget must lie in (0, 1)",
        ));
    }
    let n = n as f64;
    let pairs = n * (n - 1.0);
    Ok((8.0 * tau / (epsilon * epsilon)) * n.ln().powf(delta) * (pairs / failure_budget).ln())
}

/// Sample a fresh embedder: the circulant symbol `a` from `dist`, then the
/// sign diagonal (always Rademacher), both from the single stream named by
/// `seed`, so one (seed, stream) pair pins the entire embedder.
pub fn build_embedder(
    spec: EmbeddingSpec,
    dist: DistributionTag,
    seed: SeedSpec,
) -> Result<CirculantEmbedder> {
    spec.validate()?;
    let mut stream = crate::prng::Stream::new(seed);
    let mut a = vec![0.0; spec.d];
    stream.sample_into(dist, &mut a);
    let mut kappa = vec![0.0; spec.d];
    stream.sample_into(DistributionTag::Rademacher, &mut kappa);
    Ok(CirculantEmbedder {
        m: PartialCirculant::new(a, spec.k)?,
        dk: SignDiagonal::new(kappa)?,
        dist,
        scale: 1.0 / (spec.k as f64).sqrt(),
        spec,
    })
}

/// f(x) = scale * M * D * x via the FFT apply path.
pub fn embed_point(e: &CirculantEmbedder, x: &[f64]) -> Result<Vec<f64>> {
    let signed = e.dk.apply(x)?;
    let mut out = e.m.apply_fft(&signed)?;
    for v in out.iter_mut() {
        *v *= e.scale;
    }
    Ok(out)
}

/// Same map through the O(kd) row-by-row product; the reference route the
/// FFT path is checked against.
pub fn embed_point_naive(e: &CirculantEmbedder, x: &[f64]) -> Result<Vec<f64>> {
    let signed = e.dk.apply(x)?;
    let mut out = e.m.apply_naive(&signed)?;
    for v in out.iter_mut() {
        *v *= e.scale;
    }
    Ok(out)
}

/// Pairwise squared-distance distortion of one embedder on one point set.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DistortionReport {
    pub pair_count: usize,
    pub max_relative_error: f64,
    /// pairs with |  ||f(xi)-f(xj)||^2 - ||xi-xj||^2 | > eps * ||xi-xj||^2
    pub failures: usize,
    pub success: bool,
}

/// Check the squared-distance guarantee over all n(n-1)/2 unordered pairs.
///
/// Embeds every point once and differences in the image space (the map is
/// linear, so f(xi) - f(xj) = f(xi - xj)). Coincident pairs hold vacuously
/// and count as successes.
pub fn distortion_report(
    e: &CirculantEmbedder,
    points: &[Vec<f64>],
    epsilon: f64,
) -> Result<DistortionReport> {
    if points.len() < 2 {
        return Err(Error::invalid(
            "distortion_report: need at least two points",
        ));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid(
            "distortion_report: epsilon must be positive",
        ));
    }
    let d = e.spec.d;
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
    }
    let images: Vec<Vec<f64>> = points
        .iter()
        .map(|p| embed_point(e, p))
        .collect::<Result<_>>()?;
    let n = points.len();
    let mut failures = 0usize;
    let mut max_rel = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let orig: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if orig == 0.0 {
                continue;
            }
            let img: f64 = images[i]
                .iter()
                .zip(&images[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let rel = (img - orig).abs() / orig;
            max_rel = max_rel.max(rel);
            if rel > epsilon {
                failures += 1;
            }
        }
    }
    Ok(DistortionReport {
        pair_count: n * (n - 1) / 2,
        max_relative_error: max_rel,
        failures,
        success: failures == 0,
    })
}

/// Squared Euclidean norm of an embedded vector; the statistic every tail
/// experiment thresholds.
pub fn embedded_norm_sq(e: &CirculantEmbedder, x: &[f64]) -> Result<f64> {
    Ok(norm_sq(&embed_point(e, x)?))
}
