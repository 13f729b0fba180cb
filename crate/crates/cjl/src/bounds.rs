//! Closed-form evaluators for the analytic tail bounds.
//!
//! Every bound the Monte-Carlo harness compares against lives here as a pure
//! function: the spectral-norm bound (d+k)e^{-t^2/2}, the Gaussian-case norm
//! tail exp(-c(tau) k eps^2 / ln^delta n), the Laurent-Massart chi-square
//! quantiles, the subgaussian quadratic-form MGF bounds, and the subgaussian
//! tail bound exp(-c(theta,eta,tau) k eps^2 / ln^(2 delta) n) with its
//! parameter-regime validator. Natural logarithms throughout.

use crate::error::{Error, Result};

/// Parameters of the Gaussian-generator norm tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTailParams {
    pub k: usize,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub tau: f64,
    /// The constant c(tau) = 1/(8 tau).
    pub c_tau: f64,
}

impl GaussianTailParams {
    pub fn new(k: usize, n: usize, epsilon: f64, delta: f64, tau: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if n < 2 {
            return Err(Error::invalid("n must be at least 2"));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::invalid("epsilon must lie in (0, 1/2)"));
        }
        if !(delta > 0.0) {
            return Err(Error::invalid("delta must be positive"));
        }
        if !(tau > 0.0) {
            return Err(Error::invalid("tau must be positive"));
        }
        Ok(GaussianTailParams {
            k,
            n,
            epsilon,
            delta,
            tau,
            c_tau: 1.0 / (8.0 * tau),
        })
    }
}

/// Parameters of the subgaussian-generator norm tail bound, with the derived
/// quantities the theorem threads through its proof:
/// beta = theta*eps/(tau ln^(2 delta) n), the Laplace parameter
/// lambda = theta*eps/(2 eta tau ln^(2 delta) n) (so 2*lambda*eta = beta),
/// and the rate constant c = theta*(1/(2 tau eta) - 4 theta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgaussianParams {
    pub eta: f64,
    pub theta: f64,
    pub tau: f64,
    pub delta: f64,
    pub n: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub lambda: f64,
    pub c_const: f64,
}

impl SubgaussianParams {
    pub fn new(eta: f64, theta: f64, tau: f64, delta: f64, n: usize, epsilon: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(Error::invalid("eta must lie in (0, 1/2]"));
        }
        if !(tau > 0.0) {
            return Err(Error::invalid("tau must be positive"));
        }
        if !(delta > 0.0) {
            return Err(Error::invalid("delta must be positive"));
        }
        if n < 2 {
            return Err(Error::invalid("n must be at least 2"));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::invalid("epsilon must lie in (0, 1/2)"));
        }
        let theta_cap = (1.0 / (8.0 * eta * tau)).min(1.0);
        if !(theta > 0.0 && theta < theta_cap) {
            return Err(Error::invalid(format!(
                "theta={theta} must lie in (0, min(1, 1/(8*eta*tau)) = {theta_cap})"
            )));
        }
        let log2d = (n as f64).ln().powf(2.0 * delta);
        let beta = theta * epsilon / (tau * log2d);
        let lambda = theta * epsilon / (2.0 * eta * tau * log2d);
        let c_const = theta * (1.0 / (2.0 * tau * eta) - 4.0 * theta);
        Ok(SubgaussianParams {
            eta,
            theta,
            tau,
            delta,
            n,
            epsilon,
            beta,
            lambda,
            c_const,
        })
    }

    /// Check the theorem's validity regime, naming the first inequality that
    /// fails: beta < 1/2, the eta window (1/2)(1-beta^2)/(1+beta^2) <= eta
    /// <= 1/2, and the largeness condition 2*theta*eps/ln^delta(n) < 1/2.
    pub fn validate_regime(&self) -> Result<()> {
        check_eta_window(self.eta, self.beta)?;
        let largeness = 2.0 * self.theta * self.epsilon / (self.n as f64).ln().powf(self.delta);
        if !(largeness < 0.5) {
            return Err(Error::RegimeViolation(format!(
                "largeness condition failed: 2*theta*epsilon/ln^delta(n) = {largeness} must be < 1/2"
            )));
        }
        Ok(())
    }
}

/// The (eta, beta) window shared by the lower-tail MGF argument:
/// beta < 1/2 and (1/2)(1-beta^2)/(1+beta^2) <= eta <= 1/2.
fn check_eta_window(eta: f64, beta: f64) -> Result<()> {
    if !(beta < 0.5) {
        return Err(Error::RegimeViolation(format!(
            "beta = {beta} must be < 1/2"
        )));
    }
    let eta_floor = 0.5 * (1.0 - beta * beta) / (1.0 + beta * beta);
    if eta < eta_floor {
        return Err(Error::RegimeViolation(format!(
            "eta = {eta} is below the admissible floor (1/2)(1-beta^2)/(1+beta^2) = {eta_floor}"
        )));
    }
    if eta > 0.5 {
        return Err(Error::RegimeViolation(format!(
            "eta = {eta} must be at most 1/2"
        )));
    }
    Ok(())
}

/// Regime check for reusing the centered MGF bound on the lower tail,
/// at the lemma level where only (eta, lambda) are known: beta = 2*lambda*eta.
pub fn validate_mgf_regime(eta: f64, lambda: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::invalid("eta must lie in (0, 1/2]"));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    check_eta_window(eta, 2.0 * lambda * eta)
}

/// Chi-square weights and deviation level for the Laurent-Massart quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMassartInput {
    pub alpha: Vec<f64>,
    pub t: f64,
}

impl LaurentMassartInput {
    pub fn new(alpha: Vec<f64>, t: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid("weight vector must be non-empty"));
        }
        if !alpha.iter().all(|&a| a.is_finite() && a >= 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        if alpha.iter().all(|&a| a == 0.0) {
            return Err(Error::invalid(
                "weights must have at least one positive entry",
            ));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("t must be positive and finite"));
        }
        Ok(LaurentMassartInput { alpha, t })
    }

    pub fn l2(&self) -> f64 {
        self.alpha.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.alpha.iter().fold(0.0f64, |m, &a| m.max(a))
    }
}

/// Which chi-square tail a threshold guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum TailSide {
    Upper,
    Lower,
}

/// Spectral-norm tail bound min(1, (d+k) e^(-t^2/2)).
pub fn spectral_bound(d: usize, k: usize, t: f64) -> Result<f64> {
    Ok(spectral_bound_raw(d, k, t)?.min(1.0))
}

/// The same bound without the probability clamp (it exceeds 1 for small t).
pub fn spectral_bound_raw(d: usize, k: usize, t: f64) -> Result<f64> {
    if d == 0 || k == 0 || k > d {
        return Err(Error::invalid("need 1 <= k <= d"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t = {t} must be nonnegative")));
    }
    Ok((d + k) as f64 * (-t * t / 2.0).exp())
}

/// Gaussian-generator tail bound exp(-c(tau) k eps^2 / ln^delta n); each of
/// the upper and lower norm tails is bounded by this quantity separately.
pub fn gaussian_tail_bound(p: &GaussianTailParams) -> f64 {
    let exponent = p.c_tau * p.k as f64 * p.epsilon * p.epsilon / (p.n as f64).ln().powf(p.delta);
    (-exponent).exp()
}

/// Laurent-Massart deviation threshold for Z = sum alpha_i (a_i^2 - 1):
/// the upper tail P(Z >= 2 ||alpha||_2 sqrt(t) + 2 ||alpha||_inf t) and the
/// lower tail P(Z <= -2 ||alpha||_2 sqrt(t)) are each at most exp(-t).
pub fn laurent_massart_threshold(input: &LaurentMassartInput, side: TailSide) -> f64 {
    let base = 2.0 * input.l2() * input.t.sqrt();
    match side {
        TailSide::Upper => base + 2.0 * input.linf() * input.t,
        TailSide::Lower => base,
    }
}

/// Quadratic-form MGF bound E[exp(lambda W^2)] <= (1 - 4 eta lambda)^(-1/2),
/// for W a fixed unit-vector weighting of i.i.d. eta-subgaussian variables.
pub fn mgf_upper_bound(eta: f64, lambda: f64) -> Result<f64> {
    check_mgf_domain(eta, lambda)?;
    Ok(1.0 / (1.0 - 4.0 * eta * lambda).sqrt())
}

/// Centered log-MGF bound phi(lambda) <= 8 eta^2 lambda^2 / (1 - 4 eta lambda)
/// for phi(lambda) = ln E[exp(lambda (W^2 - 1))]; in the regime accepted by
/// [`validate_mgf_regime`] the same expression also bounds the lower-tail
/// function ln E[exp(lambda (1 - W^2))].
pub fn centered_mgf_bound(eta: f64, lambda: f64) -> Result<f64> {
    check_mgf_domain(eta, lambda)?;
    let q = 4.0 * eta * lambda;
    Ok(8.0 * eta * eta * lambda * lambda / (1.0 - q))
}

fn check_mgf_domain(eta: f64, lambda: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::invalid(format!("eta = {eta} must lie in (0, 1/2]")));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    if lambda >= 1.0 / (4.0 * eta) {
        return Err(Error::OutOfDomain(format!(
            "lambda = {lambda} must be below 1/(4*eta) = {}",
            1.0 / (4.0 * eta)
        )));
    }
    Ok(())
}

/// Subgaussian-generator tail bound exp(-c k eps^2 / ln^(2 delta) n), valid
/// only inside the parameter regime; refuses rather than extrapolates.
pub fn subgaussian_tail_bound(p: &SubgaussianParams, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    p.validate_regime()?;
    let exponent =
        p.c_const * k as f64 * p.epsilon * p.epsilon / (p.n as f64).ln().powf(2.0 * p.delta);
    Ok((-exponent).exp())
}

/// The theta maximizing c(theta, eta, tau) = theta (1/(2 tau eta) - 4 theta),
/// namely theta* = 1/(16 eta tau), giving c(theta*) = 1/(64 tau^2 eta^2).
pub fn suggest_theta(eta: f64, tau: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::invalid("eta must lie in (0, 1/2]"));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    Ok(1.0 / (16.0 * eta * tau))
}
