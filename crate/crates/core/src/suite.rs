//! The shipped certification cases: maps paired with potentials whose
//! declared seminorm sits at or below the certified threshold, plus one case
//! that is deliberately out of reach.

use crate::certification::{certify, Certificate};
use crate::error::Result;
use crate::interval_maps::{
    make_doubling, make_logistic, make_pomeau_manneville, make_tent, DoublingVariant, MapSpec,
};
use crate::regularity::{GridFunction, Space};
use crate::transfer_op::Basis;

/// Closed-form potential, sampled onto an operator grid on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// `slope · x`.
    Linear { slope: f64 },
    /// `amplitude · sin(2π frequency x)`.
    Sine { amplitude: f64, frequency: f64 },
    /// `height` on `[at, b]`, `0` before.
    Step { at: f64, height: f64 },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Linear { slope } => slope * x,
            Potential::Sine {
                amplitude,
                frequency,
            } => amplitude * (std::f64::consts::TAU * frequency * x).sin(),
            Potential::Step { at, height } => {
                if x >= at {
                    height
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, map: &MapSpec, m: usize, basis: Basis) -> Result<GridFunction> {
        GridFunction::sample(map.domain(), m, basis.interp(), |x| self.eval(x))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub name: &'static str,
    pub map: MapSpec,
    pub space: Space,
    pub potential: Potential,
    /// Declared seminorm of the potential in `space`.
    pub seminorm_bound: f64,
    pub basis: Basis,
}

impl SuiteCase {
    pub fn certificate(&self) -> Result<Certificate> {
        certify(&self.map, self.space, self.seminorm_bound)
    }
}

/// Every case in the shipped suite; all but the last certify.
pub fn shipped_suite() -> Result<Vec<SuiteCase>> {
    let lip = Space::lipschitz();
    let bv = Space::total_variation();
    let mut cases = Vec::new();
    for (name, q) in [
        ("pm-q0.5-linear", 0.5),
        ("pm-q1-linear", 1.0),
        ("pm-q2-linear", 2.0),
    ] {
        cases.push(SuiteCase {
            name,
            map: make_pomeau_manneville(q)?,
            space: lip,
            potential: Potential::Linear { slope: 0.0014 },
            seminorm_bound: 0.0014,
            basis: Basis::PiecewiseLinear,
        });
    }
    cases.push(SuiteCase {
        name: "pm-q1-sine",
        map: make_pomeau_manneville(1.0)?,
        space: lip,
        potential: Potential::Sine {
            amplitude: 0.0014 / std::f64::consts::TAU,
            frequency: 1.0,
        },
        seminorm_bound: 0.0014,
        basis: Basis::PiecewiseLinear,
    });
    cases.push(SuiteCase {
        name: "doubling-interval-linear",
        map: make_doubling(DoublingVariant::Interval),
        space: lip,
        potential: Potential::Linear { slope: 0.005 },
        seminorm_bound: 0.005,
        basis: Basis::PiecewiseLinear,
    });
    cases.push(SuiteCase {
        name: "tent-step",
        map: make_tent((0.0, 1.0), 0.5)?,
        space: bv,
        potential: Potential::Step {
            at: 0.3,
            height: 0.0069,
        },
        seminorm_bound: 0.0069,
        basis: Basis::PiecewiseConstant,
    });
    cases.push(SuiteCase {
        name: "logistic-linear",
        map: make_logistic(),
        space: bv,
        potential: Potential::Linear { slope: 0.0069 },
        seminorm_bound: 0.0069,
        basis: Basis::PiecewiseConstant,
    });
    cases.push(SuiteCase {
        name: "tent-step-too-large",
        map: make_tent((0.0, 1.0), 0.5)?,
        space: bv,
        potential: Potential::Step {
            at: 0.3,
            height: 0.01,
        },
        seminorm_bound: 0.01,
        basis: Basis::PiecewiseConstant,
    });
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::seminorm;

    #[test]
    fn declared_bounds_dominate_grid_seminorms() {
        for case in shipped_suite().unwrap() {
            let phi = case.potential.sample(&case.map, 512, case.basis).unwrap();
            let s = seminorm(&phi, case.space).unwrap();
            assert!(
                s <= case.seminorm_bound * (1.0 + 1e-12),
                "{}: {s}",
                case.name
            );
        }
    }

    #[test]
    fn certification_status() {
        let suite = shipped_suite().unwrap();
        let (last, rest) = suite.split_last().unwrap();
        for case in rest {
            let c = case.certificate().unwrap();
            assert!(c.is_certified() && c.certified_delta > 0.0, "{}", case.name);
        }
        assert!(!last.certificate().unwrap().is_certified());
    }
}
