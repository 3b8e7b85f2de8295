//! Certified spectral gaps for transfer operators of interval maps with
//! almost-constant potentials, plus the numerical experiments that check
//! those certificates against discretized operators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certification;
pub mod error;
pub mod interval_maps;
pub mod optimal_transport;
pub mod regularity;
pub mod suite;
pub mod transfer_op;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// Root-finding tolerance for numerically inverted branches.
pub use interval_maps::EPS_ROOT;

/// Slack allowed when checking an inequality that holds exactly in theory.
pub const EPS_NUM: f64 = 1e-9;

/// Residual target of the power iterations.
pub const EPS_EIG: f64 = 1e-10;

/// Relative slack for comparisons between discretized and continuum bounds.
pub const TOL_DISC: f64 = 0.02;

/// The tolerance record embedded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_root: f64,
    pub eps_eig: f64,
    pub eps_num: f64,
    pub tol_disc: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_root: EPS_ROOT,
            eps_eig: EPS_EIG,
            eps_num: EPS_NUM,
            tol_disc: TOL_DISC,
        }
    }
}

impl Tolerances {
    pub fn check(&self) -> Result<()> {
        let all = [self.eps_root, self.eps_eig, self.eps_num, self.tol_disc];
        if all.iter().all(|t| *t > 0.0 && t.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "tolerances must be positive and finite: {self:?}"
            )))
        }
    }
}
