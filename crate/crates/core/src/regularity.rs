//! Grid-sampled functions and the Hölder / bounded p-variation norms.
//!
//! All seminorms are computed on the stored grid, so they are lower bounds
//! for the seminorms of the underlying continuum functions (and exact for the
//! piecewise-linear interpolant when `α = 1`).

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::EPS_NUM;

/// Interpolation rule used to evaluate a [`GridFunction`] between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    PiecewiseLinear,
    /// `f(x) = f(x_i)` for `x_i ≤ x < x_{i+1}`.
    PiecewiseConstantLeft,
}

/// Function space carrying the regularity norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Space {
    /// `‖f‖_∞ + (diam Ω)^α Hol_α(f)`.
    Holder { alpha: f64 },
    /// `‖f‖_∞ + BV_p(f)`.
    Variation { p: f64 },
}

impl Space {
    pub fn lipschitz() -> Self {
        Space::Holder { alpha: 1.0 }
    }

    pub fn total_variation() -> Self {
        Space::Variation { p: 1.0 }
    }

    /// `(diam Ω)^α` for Hölder spaces, `1` for p-variation.
    pub fn diam_factor(&self, diam: f64) -> f64 {
        match *self {
            Space::Holder { alpha } => diam.powf(alpha),
            Space::Variation { .. } => 1.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            Space::Holder { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                domain(format!("Hölder exponent must lie in (0, 1], got {alpha}"))
            }
            Space::Variation { p } if !(p >= 1.0 && p.is_finite()) => {
                domain(format!("p-variation exponent must be ≥ 1, got {p}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Holder { alpha } => write!(f, "hol:{alpha}"),
            Space::Variation { p } => write!(f, "bvp:{p}"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    /// Parses `hol:α` or `bvp:p`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("space `{s}`: expected hol:<alpha> or bvp:<p>")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("space `{s}`: `{value}` is not a number")))?;
        let space = match kind.trim() {
            "hol" => Space::Holder { alpha: value },
            "bvp" => Space::Variation { p: value },
            other => {
                return Err(Error::Parse(format!(
                    "space `{s}`: unknown kind `{other}` (expected hol or bvp)"
                )))
            }
        };
        space.check()?;
        Ok(space)
    }
}

/// Values of a function on a strictly increasing grid inside a domain `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFunction")]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    interp: Interp,
    domain: (f64, f64),
}

#[derive(Deserialize)]
struct RawGridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    interp: Interp,
    domain: Option<(f64, f64)>,
}

impl TryFrom<RawGridFunction> for GridFunction {
    type Error = Error;

    fn try_from(raw: RawGridFunction) -> Result<Self> {
        let f = GridFunction::new(raw.grid, raw.values, raw.interp)?;
        match raw.domain {
            Some(d) => f.with_domain(d),
            None => Ok(f),
        }
    }
}

impl GridFunction {
    /// The domain defaults to `[x_0, x_n]`.
    pub fn new(grid: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self> {
        if grid.is_empty() {
            return domain("grid function needs at least one node");
        }
        if grid.len() != values.len() {
            return domain(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            ));
        }
        if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
            return domain(format!(
                "grid is not strictly increasing at index {}",
                i + 1
            ));
        }
        if let Some(i) = grid.iter().chain(&values).position(|v| !v.is_finite()) {
            return domain(format!("non-finite entry at position {i}"));
        }
        let domain = (grid[0], *grid.last().unwrap());
        Ok(Self {
            grid,
            values,
            interp,
            domain,
        })
    }

    pub fn with_domain(mut self, (a, b): (f64, f64)) -> Result<Self> {
        if !(a <= self.grid[0] && b >= *self.grid.last().unwrap() && a < b) {
            return domain(format!("domain [{a}, {b}] does not contain the grid"));
        }
        self.domain = (a, b);
        Ok(self)
    }

    /// Samples `f` on `m ≥ 2` uniform nodes spanning `[a, b]`.
    pub fn sample(
        (a, b): (f64, f64),
        m: usize,
        interp: Interp,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if m < 2 || !(a < b) {
            return domain(format!(
                "need m ≥ 2 nodes on a non-degenerate interval, got m = {m}"
            ));
        }
        let grid = uniform_grid((a, b), m);
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values, interp)
    }

    pub fn constant((a, b): (f64, f64), m: usize, interp: Interp, c: f64) -> Result<Self> {
        Self::sample((a, b), m, interp, |_| c)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn diam(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.grid == other.grid
    }

    /// Evaluates the interpolant; values outside the grid are clamped to the
    /// nearest end node.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return self.values[0];
        }
        if x >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        // first index with grid[i] > x, so grid[i-1] <= x < grid[i]
        let i = self.grid.partition_point(|&g| g <= x);
        match self.interp {
            Interp::PiecewiseConstantLeft => self.values[i - 1],
            Interp::PiecewiseLinear => {
                let (x0, x1) = (self.grid[i - 1], self.grid[i]);
                let t = (x - x0) / (x1 - x0);
                self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
            }
        }
    }

    /// Same grid, values replaced.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.grid.len() {
            return domain("value count does not match grid");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("non-finite value");
        }
        Ok(Self {
            grid: self.grid.clone(),
            values,
            interp: self.interp,
            domain: self.domain,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn product(&self, other: &GridFunction) -> Result<Self> {
        if !self.same_grid(other) {
            return domain("grid mismatch");
        }
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Reads `x,value` rows (a header line is optional).
    pub fn read_csv<R: Read>(reader: R, interp: Interp) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let (mut grid, mut values) = (Vec::new(), Vec::new());
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected 2 columns, found {}",
                    line + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(v)) => {
                    grid.push(x);
                    values.push(v);
                }
                _ if line == 0 => continue, // header
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: `{},{}` is not a pair of numbers",
                        line + 1,
                        &record[0],
                        &record[1]
                    )))
                }
            }
        }
        Self::new(grid, values, interp)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["x", "value"])?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            wtr.write_record([x.to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn uniform_grid((a, b): (f64, f64), m: usize) -> Vec<f64> {
    let n = m - 1;
    (0..m)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * (i as f64) / (n as f64)
            }
        })
        .collect()
}

/// Seminorm, uniform norm and full norm of one function in one space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityNorm {
    pub space: Space,
    pub seminorm: f64,
    #[serde(rename = "sup")]
    pub sup_norm: f64,
    #[serde(rename = "full")]
    pub full_norm: f64,
    #[serde(skip)]
    pub diam_factor: f64,
}

/// `max_{i≠j} |f(x_i) − f(x_j)| / |x_i − x_j|^α` over grid pairs.
pub fn holder_seminorm(f: &GridFunction, alpha: f64) -> Result<f64> {
    if f.len() < 2 {
        return domain("Hölder seminorm needs at least two grid points");
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("Hölder exponent must lie in (0, 1], got {alpha}"));
    }
    Ok(holder_seminorm_raw(f.grid(), f.values(), alpha))
}

pub(crate) fn holder_seminorm_raw(grid: &[f64], values: &[f64], alpha: f64) -> f64 {
    if alpha == 1.0 {
        // a chord slope is an average of the adjacent slopes it spans
        return grid
            .windows(2)
            .zip(values.windows(2))
            .map(|(x, v)| (v[1] - v[0]).abs() / (x[1] - x[0]))
            .fold(0.0, f64::max);
    }
    let mut best: f64 = 0.0;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let r = (values[j] - values[i]).abs() / (grid[j] - grid[i]).powf(alpha);
            best = best.max(r);
        }
    }
    best
}

#[inline]
fn pow_abs(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d.abs()
    } else if p == 2.0 {
        d * d
    } else {
        d.abs().powf(p)
    }
}

/// Keeps the first and last values and the strict turning points; repeated
/// values are dropped. Merging same-sign increments never lowers `v_p`, so
/// the optimal partitions live on this subsequence.
fn turning_points(values: &[f64]) -> Vec<f64> {
    let mut dedup: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if dedup.last() != Some(&v) {
            dedup.push(v);
        }
    }
    if dedup.len() <= 2 {
        return dedup;
    }
    let mut out = Vec::with_capacity(dedup.len());
    out.push(dedup[0]);
    for w in dedup.windows(3) {
        if (w[1] - w[0]) * (w[2] - w[1]) < 0.0 {
            out.push(w[1]);
        }
    }
    out.push(*dedup.last().unwrap());
    out
}

/// `BV_p(f) = sup_x̲ v_p(f, x̲)` over sub-partitions of the grid.
///
/// Dynamic programme `best[j] = max_{i<j} best[i] + |f_j − f_i|^p`, kept in
/// p-th powers; the root is taken once at the end.
pub fn bvp_seminorm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return domain(format!("p must be ≥ 1, got {p}"));
    }
    Ok(bvp_seminorm_raw(f.values(), p))
}

pub(crate) fn bvp_seminorm_raw(values: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    }
    let v = turning_points(values);
    let mut best = vec![0.0f64; v.len()];
    let mut overall: f64 = 0.0;
    for j in 1..v.len() {
        let vj = v[j];
        let mut acc: f64 = 0.0;
        for i in 0..j {
            acc = acc.max(best[i] + pow_abs(vj - v[i], p));
        }
        best[j] = acc;
        overall = overall.max(acc);
    }
    overall.powf(1.0 / p)
}

/// Largest grid size accepted by [`bvp_bruteforce_oracle`].
pub const ORACLE_MAX_POINTS: usize = 20;

/// Exhaustive p-variation over sub-partitions, under both conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionOracle {
    /// Partitions forced to contain `x_0` and `x_n`.
    pub anchored: f64,
    /// Any subset of at least two grid points.
    pub free: f64,
}

impl PartitionOracle {
    pub fn value(&self) -> f64 {
        self.anchored.max(self.free)
    }
}

/// Enumerates every sub-partition of a grid with at most
/// [`ORACLE_MAX_POINTS`] nodes. Independent of [`bvp_seminorm`].
pub fn bvp_bruteforce_oracle(f: &GridFunction, p: f64) -> Result<PartitionOracle> {
    let n = f.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::Capability(format!(
            "brute-force oracle handles at most {ORACLE_MAX_POINTS} points, got {n}"
        )));
    }
    if !(p >= 1.0) {
        return domain(format!("p must be ≥ 1, got {p}"));
    }
    let v = f.values();
    let full_mask: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let ends: u32 = if n >= 2 {
        1 | (1 << (n - 1))
    } else {
        full_mask
    };
    let (mut anchored, mut free) = (0.0f64, 0.0f64);
    for mask in 0..=full_mask {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut prev: Option<f64> = None;
        let mut sum = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if let Some(q) = prev {
                    sum += (vi - q).abs().powf(p);
                }
                prev = Some(vi);
            }
        }
        free = free.max(sum);
        if mask & ends == ends {
            anchored = anchored.max(sum);
        }
    }
    Ok(PartitionOracle {
        anchored: anchored.powf(1.0 / p),
        free: free.powf(1.0 / p),
    })
}

pub fn seminorm(f: &GridFunction, space: Space) -> Result<f64> {
    match space {
        Space::Holder { alpha } => holder_seminorm(f, alpha),
        Space::Variation { p } => bvp_seminorm(f, p),
    }
}

pub fn norm(f: &GridFunction, space: Space) -> Result<RegularityNorm> {
    space.check()?;
    let semi = seminorm(f, space)?;
    let diam_factor = space.diam_factor(f.diam());
    let sup_norm = f.sup_norm();
    Ok(RegularityNorm {
        space,
        seminorm: semi,
        sup_norm,
        full_norm: sup_norm + diam_factor * semi,
        diam_factor,
    })
}

/// Result of comparing `BV_{1/α}(f)` with the bound `Hol_α(f)(diam Ω)^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    pub bound: f64,
    pub bvp: f64,
}

/// Checks that an α-Hölder grid function has `1/α`-variation at most
/// `Hol_α(f)(diam Ω)^α`.
pub fn holder_implies_bvp(f: &GridFunction, alpha: f64) -> Result<EmbeddingCheck> {
    let hol = holder_seminorm(f, alpha)?;
    let bound = hol * f.diam().powf(alpha);
    let bvp = bvp_seminorm(f, 1.0 / alpha)?;
    if bvp > bound + EPS_NUM {
        return Err(Error::InequalityViolated {
            what: format!("BV_{}(f) ≤ Hol_{alpha}(f)(diam Ω)^{alpha}", 1.0 / alpha),
            lhs: bvp,
            rhs: bound,
        });
    }
    Ok(EmbeddingCheck { bound, bvp })
}

/// Returns `(‖fg‖, ‖f‖‖g‖)` in the full norm of `space` and checks the
/// Banach-algebra inequality between them.
pub fn banach_product_check(
    f: &GridFunction,
    g: &GridFunction,
    space: Space,
) -> Result<(f64, f64)> {
    if !f.same_grid(g) {
        return domain("banach_product_check needs both functions on the same grid");
    }
    let fg = f.product(g)?;
    let lhs = norm(&fg, space)?.full_norm;
    let rhs = norm(f, space)?.full_norm * norm(g, space)?.full_norm;
    if lhs > rhs + EPS_NUM {
        return Err(Error::InequalityViolated {
            what: format!("‖fg‖ ≤ ‖f‖‖g‖ in {space}"),
            lhs,
            rhs,
        });
    }
    Ok((lhs, rhs))
}

/// `‖φ − c‖` with `c = (sup φ + inf φ)/2`, checked against
/// `(3/2)·diam_factor·seminorm(φ)`.
pub fn centered_norm_excess(phi: &GridFunction, space: Space) -> Result<f64> {
    let c = 0.5 * (phi.max() + phi.min());
    let centered = phi.map(|v| v - c)?;
    let full = norm(&centered, space)?;
    let bound = 1.5 * full.diam_factor * full.seminorm;
    if full.full_norm > bound + EPS_NUM {
        return Err(Error::InequalityViolated {
            what: format!("‖φ − c‖ ≤ (3/2)·seminorm in {space}"),
            lhs: full.full_norm,
            rhs: bound,
        });
    }
    Ok(full.full_norm)
}

/// `e^x − 1`: bound on `‖L_φ − L_0‖` when `‖φ‖ ≤ x`.
pub fn exp_distance(phi_centered_norm: f64) -> Result<f64> {
    if !(phi_centered_norm >= 0.0) || !phi_centered_norm.is_finite() {
        return domain(format!(
            "norm must be finite and ≥ 0, got {phi_centered_norm}"
        ));
    }
    Ok(phi_centered_norm.exp_m1())
}
