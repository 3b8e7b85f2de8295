//! Spectral gap certificates for transfer operators with almost-constant
//! potentials.
//!
//! The chain is: base gap of the zero-potential operator from a
//! Doeblin-Fortet inequality, a bound on the spectral projection, the
//! admissible perturbation radius, and finally the admissible potential
//! seminorm (threshold) and the gap size retained by a given potential.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interval_maps::MapSpec;
use crate::regularity::{exp_distance, Space};

/// Condition number of the zero-potential eigenpair (constant eigenfunction,
/// probability eigenform).
pub const TAU0: f64 = 1.0;

/// Sup-norm vs seminorm constant for both Hölder and p-variation spaces.
pub const UNIFORM_CONSTANT: f64 = 1.0;

/// Gap size `δ₀ = (1 − θ)/(1 + Dθ)` of an operator satisfying a
/// Doeblin-Fortet inequality with contraction `θ` and constant `D`.
pub fn doeblin_fortet_gap(theta: f64, d: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("theta must lie in (0, 1), got {theta}"));
    }
    if !(d > 0.0) || !d.is_finite() {
        return domain(format!("D must be positive, got {d}"));
    }
    Ok((1.0 - theta) / (1.0 + d * theta))
}

/// Bound `(2D + 2)/(D + 2)` on the norm of `f ↦ f − μ(f)`.
pub fn projection_norm_bound(d: f64) -> Result<f64> {
    if !(d > 0.0) || d.is_nan() {
        return domain(format!("D must be positive, got {d}"));
    }
    if d.is_infinite() {
        return Ok(2.0);
    }
    Ok((2.0 * d + 2.0) / (d + 2.0))
}

fn check_perturbation_inputs(delta0: f64, tau0: f64, pi_norm: f64) -> Result<()> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return domain(format!("delta0 must lie in (0, 1), got {delta0}"));
    }
    if !(tau0 >= 1.0) || !tau0.is_finite() {
        return domain(format!("tau0 must be ≥ 1, got {tau0}"));
    }
    if !(pi_norm >= 1.0) || !pi_norm.is_finite() {
        return domain(format!("projection norm must be ≥ 1, got {pi_norm}"));
    }
    Ok(())
}

/// Admissible `‖L − L₀‖` for `L` to keep a gap of size `delta` with constant 1:
/// `δ₀(δ₀ − δ) / (6(1 + δ₀ − δ) τ₀ ‖π₀‖)`.
pub fn perturbation_radius(delta0: f64, delta: f64, tau0: f64, pi_norm: f64) -> Result<f64> {
    check_perturbation_inputs(delta0, tau0, pi_norm)?;
    if !(delta >= 0.0 && delta < delta0) {
        return domain(format!(
            "delta must lie in [0, delta0 = {delta0}), got {delta}"
        ));
    }
    let room = delta0 - delta;
    Ok(delta0 * room / (6.0 * (1.0 + room) * tau0 * pi_norm))
}

/// Outcome of inverting the radius formula for the gap size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum GapSolve {
    /// Largest gap size `δ ∈ (0, δ₀]` retained at the given distance.
    Certified { delta: f64 },
    /// The distance reaches or exceeds the `δ = 0` radius.
    NotCertifiable { radius: f64 },
}

impl GapSolve {
    pub fn delta(&self) -> f64 {
        match *self {
            GapSolve::Certified { delta } => delta,
            GapSolve::NotCertifiable { .. } => 0.0,
        }
    }
}

/// Solves `ε = δ₀(δ₀ − δ)/(c(1 + δ₀ − δ))`, `c = 6τ₀‖π₀‖`, for `δ`:
/// `δ = (δ₀² − cε(1 + δ₀))/(δ₀ − cε)`.
pub fn certified_gap_size(delta0: f64, epsilon: f64, tau0: f64, pi_norm: f64) -> Result<GapSolve> {
    check_perturbation_inputs(delta0, tau0, pi_norm)?;
    if !(epsilon >= 0.0) || epsilon.is_infinite() {
        return domain(format!("epsilon must be finite and ≥ 0, got {epsilon}"));
    }
    let radius = perturbation_radius(delta0, 0.0, tau0, pi_norm)?;
    if epsilon >= radius {
        return Ok(GapSolve::NotCertifiable { radius });
    }
    let c = 6.0 * tau0 * pi_norm;
    let ce = c * epsilon;
    let delta = (delta0 * delta0 - ce * (1.0 + delta0)) / (delta0 - ce);
    Ok(GapSolve::Certified {
        delta: delta.clamp(0.0, delta0),
    })
}

/// Largest admissible `Hol_α(φ)`:
/// `(2/(3 diam^α)) log(1 + (1 − θ)²/(16(1 + θ)))`.
pub fn holder_threshold(alpha: f64, theta: f64, diam: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("theta must lie in (0, 1), got {theta}"));
    }
    if !(diam > 0.0) || !diam.is_finite() {
        return domain(format!("diam must be positive, got {diam}"));
    }
    let inner = (1.0 - theta).powi(2) / (16.0 * (1.0 + theta));
    Ok(2.0 / (3.0 * diam.powf(alpha)) * inner.ln_1p())
}

/// Largest admissible `BV_p(φ)` for a class-V map with `k` branches:
/// `(2/3) log(1 + (k^{1/p} − 1)²/(16 k^{1/p}(k^{1/p} + 1)))`.
pub fn bvp_threshold(k: usize, p: f64) -> Result<f64> {
    if k < 2 {
        return domain(format!("k must be ≥ 2, got {k}"));
    }
    if !(p >= 1.0) || p.is_nan() {
        return domain(format!("p must be ≥ 1, got {p}"));
    }
    let s = (k as f64).powf(1.0 / p);
    let inner = (s - 1.0).powi(2) / (16.0 * s * (s + 1.0));
    Ok(2.0 / 3.0 * inner.ln_1p())
}

/// The same threshold assembled from its parts: base gap, projection bound,
/// `δ = 0` radius, then `log(1 + radius)` rescaled by the centering factor.
pub fn assembled_threshold(theta: f64, diam_factor: f64) -> Result<f64> {
    let delta0 = doeblin_fortet_gap(theta, UNIFORM_CONSTANT)?;
    let pi = projection_norm_bound(UNIFORM_CONSTANT)?;
    let radius = perturbation_radius(delta0, 0.0, TAU0, pi)?;
    Ok(2.0 / (3.0 * diam_factor) * radius.ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStatus {
    Certified,
    NotCertified,
}

/// Full arithmetic trail of one certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub space: Space,
    pub k: usize,
    pub diam: f64,
    pub diam_factor: f64,
    pub theta: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub delta0: f64,
    pub pi_bound: f64,
    pub tau0: f64,
    /// `δ = 0` perturbation radius.
    pub radius: f64,
    pub threshold: f64,
    pub phi_seminorm: f64,
    /// `(3/2)·diam_factor·phi_seminorm`: norm of the centered potential.
    pub centered_norm: f64,
    /// `e^{centered_norm} − 1`: distance to the zero-potential operator.
    pub epsilon: f64,
    pub certified_delta: f64,
    pub status: CertificateStatus,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }

    /// Whether the certificate covers a gap of size `delta`.
    pub fn supports_gap(&self, delta: f64) -> bool {
        self.is_certified() && delta <= self.certified_delta
    }
}

/// Certifies the transfer operator of `map` with a potential whose seminorm in
/// `space` is at most `phi_seminorm_bound`.
///
/// Hölder spaces need the map in class `H(α, θ)` (θ from the class tag);
/// p-variation spaces need class `V` and use `θ = k^{−1/p}`.
pub fn certify(map: &MapSpec, space: Space, phi_seminorm_bound: f64) -> Result<Certificate> {
    space.check()?;
    if !(phi_seminorm_bound >= 0.0) || phi_seminorm_bound.is_infinite() {
        return domain(format!(
            "potential seminorm bound must be finite and ≥ 0, got {phi_seminorm_bound}"
        ));
    }
    let k = map.k();
    let diam = map.diam();
    let (theta, threshold) = match space {
        Space::Holder { alpha } => {
            let theta = map.holder_theta(alpha).ok_or_else(|| {
                Error::Usage(format!(
                    "map is not tagged as class H(α, θ) for α = {alpha} (class {})",
                    map.class_tag()
                ))
            })?;
            (theta, holder_threshold(alpha, theta, diam)?)
        }
        Space::Variation { p } => {
            if !map.class_tag().variation {
                return Err(Error::Usage(format!(
                    "p-variation certificates need a class-V map (class {})",
                    map.class_tag()
                )));
            }
            ((k as f64).powf(-1.0 / p), bvp_threshold(k, p)?)
        }
    };
    let diam_factor = space.diam_factor(diam);
    let delta0 = doeblin_fortet_gap(theta, UNIFORM_CONSTANT)?;
    let pi_bound = projection_norm_bound(UNIFORM_CONSTANT)?;
    let radius = perturbation_radius(delta0, 0.0, TAU0, pi_bound)?;
    let centered_norm = 1.5 * diam_factor * phi_seminorm_bound;
    let epsilon = exp_distance(centered_norm)?;
    let solve = certified_gap_size(delta0, epsilon, TAU0, pi_bound)?;
    let status = if phi_seminorm_bound <= threshold {
        CertificateStatus::Certified
    } else {
        CertificateStatus::NotCertified
    };
    let certified_delta = match status {
        CertificateStatus::Certified => solve.delta(),
        CertificateStatus::NotCertified => 0.0,
    };
    Ok(Certificate {
        space,
        k,
        diam,
        diam_factor,
        theta,
        d: UNIFORM_CONSTANT,
        delta0,
        pi_bound,
        tau0: TAU0,
        radius,
        threshold,
        phi_seminorm: phi_seminorm_bound,
        centered_norm,
        epsilon,
        certified_delta,
        status,
    })
}
