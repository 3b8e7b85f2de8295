//! Interval maps described through their inverse branches.
//!
//! A [`MapSpec`] carries the `k` inverse branches `b_j`, the forward map `T`
//! and the regularity classes the map belongs to: class `H(α, θ)` (backward
//! θ-contracting on average for the metric `d^α`) and/or class `V` (monotone
//! branches whose images have disjoint interiors).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{domain, Error, Result};

/// Absolute tolerance of the implicit-branch root solver.
pub const EPS_ROOT: f64 = 1e-12;

/// Largest branch count for which the branch matching is brute-forced over `S_k`.
pub const BRUTE_FORCE_MAX_K: usize = 8;

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Membership of a map in class `H(α, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderClass {
    pub alpha: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassTag {
    pub holder: Option<HolderClass>,
    pub variation: bool,
}

impl ClassTag {
    pub fn is_holder(&self) -> bool {
        self.holder.is_some()
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.holder, self.variation) {
            (Some(h), true) => write!(f, "H({}, {}) + V", h.alpha, h.theta),
            (Some(h), false) => write!(f, "H({}, {})", h.alpha, h.theta),
            (None, true) => write!(f, "V"),
            (None, false) => write!(f, "unclassified"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoublingVariant {
    /// `2x mod 1` on the circle, represented on `[0, 1]` with `1 ≡ 0`.
    Circle,
    /// The full tent `2x` / `2 − 2x`.
    Tent,
    /// `2x` on `[0, 1/2)`, `2x − 1` on `[1/2, 1]`.
    Interval,
}

impl FromStr for DoublingVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Self::Circle),
            "tent" => Ok(Self::Tent),
            "interval" => Ok(Self::Interval),
            other => Err(Error::Usage(format!(
                "unknown doubling variant `{other}` (expected circle, tent or interval)"
            ))),
        }
    }
}

impl fmt::Display for DoublingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Circle => "circle",
            Self::Tent => "tent",
            Self::Interval => "interval",
        })
    }
}

/// Which constructor produced a map; drives serialization and the
/// family-specific contraction formulas.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    PomeauManneville {
        q: f64,
    },
    Doubling(DoublingVariant),
    /// Piecewise-affine full tent with its peak at `peak`.
    Tent {
        peak: f64,
    },
    /// `4x(1 − x)` on `[0, 1]`.
    Logistic,
    /// Unimodal map built from user evaluators; not serializable.
    Unimodal {
        peak: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PomeauManneville { .. } => "pomeau-manneville",
            Family::Doubling(_) => "doubling",
            Family::Tent { .. } => "tent",
            Family::Logistic => "logistic",
            Family::Unimodal { .. } => "unimodal",
        }
    }
}

/// An interval map given by `k` measurable inverse branches.
#[derive(Clone)]
pub struct MapSpec {
    domain: (f64, f64),
    branches: Vec<Evaluator>,
    forward: Evaluator,
    class_tag: ClassTag,
    exceptional_points: Vec<f64>,
    family: Family,
}

impl fmt::Debug for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSpec")
            .field("family", &self.family)
            .field("domain", &self.domain)
            .field("k", &self.k())
            .field("class_tag", &self.class_tag)
            .field("exceptional_points", &self.exceptional_points)
            .finish()
    }
}

impl MapSpec {
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn diam(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    pub fn k(&self) -> usize {
        self.branches.len()
    }

    pub fn class_tag(&self) -> ClassTag {
        self.class_tag
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn exceptional_points(&self) -> &[f64] {
        &self.exceptional_points
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    /// `b_j(x)` without any checks.
    #[inline]
    pub fn branch(&self, j: usize, x: f64) -> f64 {
        (self.branches[j])(x)
    }

    /// `b_j(x)`, checking that `x` is in the domain and the value is finite and
    /// lands in the domain.
    pub fn try_branch(&self, j: usize, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return domain(format!(
                "x = {x} outside [{}, {}]",
                self.domain.0, self.domain.1
            ));
        }
        let y = self.branch(j, x);
        let slack = EPS_ROOT * self.diam().max(1.0);
        if !y.is_finite() || y < self.domain.0 - slack || y > self.domain.1 + slack {
            return domain(format!(
                "b_{}({x}) = {y} is not a point of the domain",
                j + 1
            ));
        }
        Ok(y.clamp(self.domain.0, self.domain.1))
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    /// Contraction factor of the map as a member of class `H(alpha, ·)`.
    ///
    /// Known families use their own formula; otherwise a declared `H(α₀, θ₀)`
    /// yields `θ₀^{α/α₀}` for `α ≤ α₀` by Jensen's inequality.
    pub fn holder_theta(&self, alpha: f64) -> Option<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return None;
        }
        let declared = self.class_tag.holder?;
        if (alpha - declared.alpha).abs() < 1e-15 {
            return Some(declared.theta);
        }
        match &self.family {
            Family::PomeauManneville { .. } => Some(0.5 + 0.5f64.powf(1.0 + alpha)),
            Family::Doubling(_) => Some(0.5f64.powf(alpha)),
            Family::Tent { peak } => {
                let (a, b) = self.domain;
                let d = b - a;
                Some((((peak - a) / d).powf(alpha) + ((b - peak) / d).powf(alpha)) / 2.0)
            }
            _ if alpha <= declared.alpha => Some(declared.theta.powf(alpha / declared.alpha)),
            _ => None,
        }
    }

    /// The same map re-tagged as a member of `H(alpha, holder_theta(alpha))`.
    pub fn with_holder_exponent(&self, alpha: f64) -> Result<MapSpec> {
        let theta = self.holder_theta(alpha).ok_or_else(|| {
            Error::Usage(format!(
                "no contraction factor known for {} at alpha = {alpha}",
                self.family.name()
            ))
        })?;
        let mut out = self.clone();
        out.class_tag.holder = Some(HolderClass { alpha, theta });
        Ok(out)
    }

    /// Overrides the Hölder class with a user-declared `H(alpha, theta)`.
    pub fn with_declared_holder(&self, alpha: f64, theta: f64) -> Result<MapSpec> {
        if !(alpha > 0.0 && alpha <= 1.0) || !(theta > 0.0 && theta < 1.0) {
            return domain(format!("invalid class H({alpha}, {theta})"));
        }
        let mut out = self.clone();
        out.class_tag.holder = Some(HolderClass { alpha, theta });
        Ok(out)
    }

    /// Images `I_j = [min b_j, max b_j]` sampled on `n + 1` uniform points.
    pub fn branch_images(&self, n: usize) -> Vec<(f64, f64)> {
        let xs = uniform_points(self.domain, n.max(1));
        (0..self.k())
            .map(|j| {
                xs.iter()
                    .map(|&x| self.branch(j, x))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
                        (lo.min(y), hi.max(y))
                    })
            })
            .collect()
    }

    /// Checks the structural invariants on `n + 1` uniform sample points:
    /// branch values in the domain, `T(b_j(x)) = x` away from exceptional
    /// points, and for class `V` monotone branches with non-overlapping images.
    pub fn validate(&self, n: usize) -> Result<()> {
        let xs = uniform_points(self.domain, n.max(2));
        let tol = 1e3 * EPS_ROOT * self.diam().max(1.0);
        let mut bad = Vec::new();
        for &x in &xs {
            for j in 0..self.k() {
                if self.try_branch(j, x).is_err() {
                    bad.push(x);
                    continue;
                }
                if self.is_exceptional(x) {
                    continue;
                }
                let back = self.forward(self.branch(j, x));
                if (back - x).abs() > tol {
                    bad.push(x);
                }
            }
        }
        if !bad.is_empty() {
            bad.dedup();
            return Err(Error::Validation {
                message: "inverse branches are inconsistent with the forward map".into(),
                witnesses: bad,
            });
        }
        if self.class_tag.variation {
            self.validate_class_v(&xs, tol)?;
        }
        Ok(())
    }

    fn validate_class_v(&self, xs: &[f64], tol: f64) -> Result<()> {
        for j in 0..self.k() {
            let ys: Vec<f64> = xs.iter().map(|&x| self.branch(j, x)).collect();
            let up = ys.windows(2).all(|w| w[1] >= w[0] - tol);
            let down = ys.windows(2).all(|w| w[1] <= w[0] + tol);
            if !(up || down) {
                let witnesses = xs
                    .windows(2)
                    .zip(ys.windows(2))
                    .filter(|(_, y)| y[1] < y[0] - tol)
                    .map(|(x, _)| x[0])
                    .take(8)
                    .collect();
                return Err(Error::Validation {
                    message: format!("branch b_{} is not monotone", j + 1),
                    witnesses,
                });
            }
        }
        let mut images = self.branch_images(xs.len() - 1);
        images.sort_by(|p, q| p.0.total_cmp(&q.0));
        for w in images.windows(2) {
            if w[0].1 > w[1].0 + tol {
                return Err(Error::Validation {
                    message: "branch images overlap".into(),
                    witnesses: vec![w[1].0, w[0].1],
                });
            }
        }
        Ok(())
    }

    pub fn is_exceptional(&self, x: f64) -> bool {
        self.exceptional_points
            .iter()
            .any(|&e| (e - x).abs() <= EPS_ROOT * self.diam().max(1.0))
    }

    /// JSON-ready description of the map. Maps built from arbitrary user
    /// evaluators cannot be described and yield a usage error.
    pub fn to_config(&self) -> Result<MapConfig> {
        let mut parameters = BTreeMap::new();
        match &self.family {
            Family::PomeauManneville { q } => {
                parameters.insert("q".to_string(), Value::from(*q));
            }
            Family::Doubling(v) => {
                parameters.insert("variant".to_string(), Value::from(v.to_string()));
            }
            Family::Tent { peak } => {
                parameters.insert("peak".to_string(), Value::from(*peak));
            }
            Family::Logistic => {}
            Family::Unimodal { .. } => {
                return Err(Error::Usage(
                    "maps built from user evaluators cannot be serialized".into(),
                ))
            }
        }
        Ok(MapConfig {
            family: self.family.name().to_string(),
            parameters,
            domain: Some([self.domain.0, self.domain.1]),
            alpha: self.class_tag.holder.map(|h| h.alpha),
            theta: self.class_tag.holder.map(|h| h.theta),
            exceptional_points: self.exceptional_points.clone(),
        })
    }

    pub fn from_config(cfg: &MapConfig) -> Result<MapSpec> {
        let num = |key: &str| -> Result<f64> {
            cfg.parameters
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Parse(format!("field `parameters.{key}`: expected a number")))
        };
        let mut map = match cfg.family.as_str() {
            "pomeau-manneville" => make_pomeau_manneville(num("q")?)?,
            "doubling" => {
                let variant = cfg
                    .parameters
                    .get("variant")
                    .and_then(Value::as_str)
                    .ok_or_else(|| {
                        Error::Parse("field `parameters.variant`: expected a string".into())
                    })?;
                make_doubling(variant.parse()?)
            }
            "tent" => {
                let (a, b) = cfg.domain.map(|d| (d[0], d[1])).unwrap_or((0.0, 1.0));
                let peak = cfg
                    .parameters
                    .get("peak")
                    .and_then(Value::as_f64)
                    .unwrap_or(0.5 * (a + b));
                make_tent((a, b), peak)?
            }
            "logistic" => make_logistic(),
            other => {
                return Err(Error::Parse(format!(
                    "field `family`: unknown map family `{other}`"
                )))
            }
        };
        if let Some(d) = cfg.domain {
            if (d[0] - map.domain.0).abs() > 1e-15 || (d[1] - map.domain.1).abs() > 1e-15 {
                return Err(Error::Parse(format!(
                    "field `domain`: family `{}` lives on [{}, {}]",
                    cfg.family, map.domain.0, map.domain.1
                )));
            }
        }
        match (cfg.alpha, cfg.theta) {
            (Some(alpha), Some(theta)) => map = map.with_declared_holder(alpha, theta)?,
            (Some(alpha), None) => map = map.with_holder_exponent(alpha)?,
            (None, Some(_)) => {
                return Err(Error::Parse("field `theta` requires field `alpha`".into()))
            }
            (None, None) => {}
        }
        for &e in &cfg.exceptional_points {
            if !map.is_exceptional(e) {
                map.exceptional_points.push(e);
            }
        }
        Ok(map)
    }
}

/// Serialized form of a map: `{family, parameters, domain, alpha, theta, exceptional_points}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub family: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub exceptional_points: Vec<f64>,
}

pub(crate) fn uniform_points((a, b): (f64, f64), n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * (i as f64) / (n as f64)
            }
        })
        .collect()
}

/// Solves `f(y) = target` for `y ∈ [lo, hi]` where `f` is increasing there.
///
/// Bisection keeps a bracket; Newton steps (with `df` or a finite-difference
/// slope) are taken whenever they stay inside it.
pub fn invert_increasing(
    f: &dyn Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    if f(lo) >= target {
        return lo;
    }
    if f(hi) <= target {
        return hi;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = f(x) - target;
        if r == 0.0 {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= EPS_ROOT {
            return 0.5 * (lo + hi);
        }
        let slope = match df {
            Some(d) => d(x),
            None => {
                let h = 1e-7 * (hi - lo).max(1e-9);
                (f(x + h) - f(x - h)) / (2.0 * h)
            }
        };
        let newton = x - r / slope;
        if slope > 0.0 && newton > lo && newton < hi {
            if (newton - x).abs() <= 0.1 * EPS_ROOT {
                return newton;
            }
            x = newton;
        } else {
            x = 0.5 * (lo + hi);
        }
    }
    x
}

/// The Pomeau-Manneville map `T_q` on `[0, 1]`: `x(1 + (2x)^q)` on `[0, 1/2)`,
/// `2x − 1` on `[1/2, 1]`. Tagged `H(1, 3/4)` and `V`.
pub fn make_pomeau_manneville(q: f64) -> Result<MapSpec> {
    if !(q > 0.0) || !q.is_finite() {
        return domain(format!(
            "Pomeau-Manneville parameter q must be positive, got {q}"
        ));
    }
    let left = move |y: f64| y * (1.0 + (2.0 * y).powf(q));
    let left_slope = move |y: f64| 1.0 + (q + 1.0) * (2.0 * y).powf(q);
    let b1: Evaluator = Arc::new(move |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 0.5;
        }
        invert_increasing(&left, Some(&left_slope), x, 0.0, 0.5)
    });
    let b2: Evaluator = Arc::new(|x: f64| 0.5 * (x + 1.0));
    let forward: Evaluator = Arc::new(move |x: f64| if x < 0.5 { left(x) } else { 2.0 * x - 1.0 });
    Ok(MapSpec {
        domain: (0.0, 1.0),
        branches: vec![b1, b2],
        forward,
        class_tag: ClassTag {
            holder: Some(HolderClass {
                alpha: 1.0,
                theta: 0.75,
            }),
            variation: true,
        },
        // T(b_1(1)) = T(1/2) = 0
        exceptional_points: vec![1.0],
        family: Family::PomeauManneville { q },
    })
}

/// One of the three doubling variants, all of class `H(1, 1/2)`.
pub fn make_doubling(variant: DoublingVariant) -> MapSpec {
    let frac = |x: f64| x - x.floor();
    let (b1, b2, forward, variation, exceptional): (
        Evaluator,
        Evaluator,
        Evaluator,
        bool,
        Vec<f64>,
    ) = match variant {
        DoublingVariant::Circle => (
            Arc::new(move |x| frac(x) / 2.0),
            Arc::new(move |x| frac(x) / 2.0 + 0.5),
            Arc::new(move |x| frac(2.0 * x)),
            false,
            // the representative of 1 is 0
            vec![1.0],
        ),
        DoublingVariant::Tent => (
            Arc::new(|x| x / 2.0),
            Arc::new(|x| 1.0 - x / 2.0),
            Arc::new(|x| if x <= 0.5 { 2.0 * x } else { 2.0 - 2.0 * x }),
            true,
            vec![],
        ),
        DoublingVariant::Interval => (
            Arc::new(|x| x / 2.0),
            Arc::new(|x| x / 2.0 + 0.5),
            Arc::new(|x| if x < 0.5 { 2.0 * x } else { 2.0 * x - 1.0 }),
            true,
            vec![1.0],
        ),
    };
    MapSpec {
        domain: (0.0, 1.0),
        branches: vec![b1, b2],
        forward,
        class_tag: ClassTag {
            holder: Some(HolderClass {
                alpha: 1.0,
                theta: 0.5,
            }),
            variation,
        },
        exceptional_points: exceptional,
        family: Family::Doubling(variant),
    }
}

/// Piecewise-affine full tent on `[a, b]` with its peak at `peak`.
pub fn make_tent((a, b): (f64, f64), peak: f64) -> Result<MapSpec> {
    if !(a < b) || !(peak > a && peak < b) {
        return domain(format!(
            "tent needs a < peak < b, got [{a}, {b}] with peak {peak}"
        ));
    }
    let d = b - a;
    let b1: Evaluator = Arc::new(move |x| a + (x - a) * (peak - a) / d);
    let b2: Evaluator = Arc::new(move |x| peak + (b - x) * (b - peak) / d);
    let forward: Evaluator = Arc::new(move |x| {
        if x <= peak {
            a + (x - a) * d / (peak - a)
        } else {
            b - (x - peak) * d / (b - peak)
        }
    });
    Ok(MapSpec {
        domain: (a, b),
        branches: vec![b1, b2],
        forward,
        class_tag: ClassTag {
            holder: Some(HolderClass {
                alpha: 1.0,
                theta: 0.5,
            }),
            variation: true,
        },
        exceptional_points: vec![],
        family: Family::Tent { peak },
    })
}

/// The logistic map `4x(1 − x)`, built through [`make_unimodal`].
pub fn make_logistic() -> MapSpec {
    let mut map = make_unimodal(
        (0.0, 1.0),
        0.5,
        Arc::new(|x| 4.0 * x * (1.0 - x)),
        Arc::new(|x| 4.0 * x * (1.0 - x)),
    )
    .expect("logistic map is unimodal and onto");
    map.family = Family::Logistic;
    map
}

const UNIMODAL_SAMPLES: usize = 256;

/// A 2-to-1 unimodal map: `rising` maps `[a, c]` increasingly onto `[a, b]`,
/// `falling` maps `[c, b]` decreasingly onto `[a, b]`. Both are checked on a
/// sample grid; the inverse branches are computed numerically.
pub fn make_unimodal(
    (a, b): (f64, f64),
    c: f64,
    rising: Evaluator,
    falling: Evaluator,
) -> Result<MapSpec> {
    if !(a < b) || !(c > a && c < b) {
        return domain(format!(
            "unimodal map needs a < c < b, got [{a}, {b}], c = {c}"
        ));
    }
    let tol = 1e-9 * (b - a);
    let left = uniform_points((a, c), UNIMODAL_SAMPLES);
    let right = uniform_points((c, b), UNIMODAL_SAMPLES);

    let mut witnesses: Vec<f64> = left
        .windows(2)
        .filter(|w| rising(w[1]) <= rising(w[0]))
        .map(|w| w[0])
        .collect();
    witnesses.extend(
        right
            .windows(2)
            .filter(|w| falling(w[1]) >= falling(w[0]))
            .map(|w| w[0]),
    );
    if !witnesses.is_empty() {
        return Err(Error::Validation {
            message: "pieces are not strictly monotone".into(),
            witnesses,
        });
    }
    let endpoint_checks = [
        (a, rising(a), a),
        (c, rising(c), b),
        (c, falling(c), b),
        (b, falling(b), a),
    ];
    let witnesses: Vec<f64> = endpoint_checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > tol)
        .map(|(x, _, _)| *x)
        .collect();
    if !witnesses.is_empty() {
        return Err(Error::Validation {
            message: "pieces are not onto [a, b]".into(),
            witnesses,
        });
    }

    let r = rising.clone();
    let b1: Evaluator = Arc::new(move |x| invert_increasing(&|y| r(y), None, x, a, c));
    let fl = falling.clone();
    let b2: Evaluator = Arc::new(move |x| invert_increasing(&|y| -fl(y), None, -x, c, b));
    let forward: Evaluator = Arc::new(move |x| if x <= c { rising(x) } else { falling(x) });
    Ok(MapSpec {
        domain: (a, b),
        branches: vec![b1, b2],
        forward,
        class_tag: ClassTag {
            holder: None,
            variation: true,
        },
        exceptional_points: vec![],
        family: Family::Unimodal { peak: c },
    })
}

/// Minimum of `Σ_j cost[j][σ(j)]` over permutations `σ`.
///
/// Exhaustive for `k ≤ BRUTE_FORCE_MAX_K`, Hungarian algorithm above.
pub fn min_matching_cost(cost: &[Vec<f64>]) -> f64 {
    let k = cost.len();
    if k <= BRUTE_FORCE_MAX_K {
        brute_force_matching(cost)
    } else {
        hungarian(cost)
    }
}

pub(crate) fn brute_force_matching(cost: &[Vec<f64>]) -> f64 {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let eval = |p: &[usize]| p.iter().enumerate().map(|(j, &s)| cost[j][s]).sum::<f64>();
    let mut best = eval(&perm);
    // Heap's algorithm
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(eval(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

pub(crate) fn hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    // 1-based potentials formulation
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut matched = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[matched[j] - 1][j - 1]).sum()
}

/// Average contraction of one pair: `min_σ (1/k) Σ_j d(b_j(y), b_σ(j)(z))^α / d(y, z)^α`.
pub fn pair_contraction(map: &MapSpec, alpha: f64, y: f64, z: f64) -> f64 {
    let k = map.k();
    let by: Vec<f64> = (0..k).map(|j| map.branch(j, y)).collect();
    let bz: Vec<f64> = (0..k).map(|j| map.branch(j, z)).collect();
    let cost: Vec<Vec<f64>> = by
        .iter()
        .map(|&p| bz.iter().map(|&q| (p - q).abs().powf(alpha)).collect())
        .collect();
    min_matching_cost(&cost) / (k as f64) / (y - z).abs().powf(alpha)
}

/// Empirical lower bound on the best θ for which the map is backward
/// θ-contracting on average in `d^alpha`.
///
/// Takes the maximum of [`pair_contraction`] over `n_pairs` uniform random
/// pairs (seeded) and over a deterministic sweep of `n_pairs + 1` grid points
/// (adjacent pairs and pairs anchored at both endpoints).
pub fn estimate_theta(map: &MapSpec, alpha: f64, n_pairs: usize, seed: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    if n_pairs == 0 {
        return domain("n_pairs must be at least 1");
    }
    let (a, b) = map.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(4 * n_pairs);
    while pairs.len() < n_pairs {
        let y = rng.gen_range(a..=b);
        let z = rng.gen_range(a..=b);
        if y != z {
            pairs.push((y, z));
        }
    }
    let sweep = uniform_points((a, b), n_pairs);
    for i in 1..sweep.len() {
        pairs.push((sweep[i - 1], sweep[i]));
        pairs.push((a, sweep[i]));
        pairs.push((sweep[i - 1], b));
    }
    Ok(pairs
        .par_iter()
        .filter(|(y, z)| y != z)
        .map(|&(y, z)| pair_contraction(map, alpha, y, z))
        .reduce(|| 0.0, f64::max))
}
