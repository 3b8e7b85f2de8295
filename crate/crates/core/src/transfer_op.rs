//! Transfer operators `L_φ f(x) = (1/k) Σ_j e^{φ(b_j x)} f(b_j x)`, their
//! collocation discretization, eigendata and the numerical verification
//! experiments run on top of them.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interval_maps::MapSpec;
use crate::optimal_transport::DiscreteMeasure;
use crate::regularity::{
    bvp_seminorm_raw, holder_seminorm_raw, norm, seminorm, uniform_grid, GridFunction, Interp,
    Space,
};
use crate::{EPS_EIG, EPS_NUM};

/// Iteration cap for the power iterations.
pub const MAX_ITER: usize = 100_000;

/// Window of the geometric mean used by the subdominant estimate.
const SUBDOMINANT_WINDOW: usize = 50;
const SUBDOMINANT_MIN_ITER: usize = 200;
const SUBDOMINANT_MAX_ITER: usize = 20_000;
const SUBDOMINANT_SEED: u64 = 0x005e_ed0f_5ec7;

/// `L_φ f(x)` with `φ` and `f` evaluated through their interpolants.
pub fn apply(map: &MapSpec, phi: &GridFunction, f: &GridFunction, x: f64) -> Result<f64> {
    if !map.contains(x) {
        let (a, b) = map.domain();
        return domain(format!("x = {x} outside [{a}, {b}]"));
    }
    let k = map.k();
    let mut total = 0.0;
    for j in 0..k {
        let y = map.try_branch(j, x)?;
        total += phi.eval(y).exp() * f.eval(y);
    }
    Ok(total / k as f64)
}

/// Interpolation basis behind the columns of a discretized operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Hat functions: nodal values joined linearly.
    PiecewiseLinear,
    /// Cell indicators: `f = f(x_i)` on `[x_i, x_{i+1})`.
    PiecewiseConstant,
}

impl Basis {
    pub fn interp(self) -> Interp {
        match self {
            Basis::PiecewiseLinear => Interp::PiecewiseLinear,
            Basis::PiecewiseConstant => Interp::PiecewiseConstantLeft,
        }
    }

    /// Lipschitz for hats, total variation for indicators.
    pub fn default_space(self) -> Space {
        match self {
            Basis::PiecewiseLinear => Space::lipschitz(),
            Basis::PiecewiseConstant => Space::total_variation(),
        }
    }
}

/// Collocation matrix of `L_φ` on a uniform grid, stored row-compressed.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    map: MapSpec,
    potential: GridFunction,
    grid: Vec<f64>,
    basis: Basis,
    norm_space: Space,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Column weights of the basis functions at `y`.
fn basis_weights(grid: &[f64], basis: Basis, y: f64, out: &mut Vec<(usize, f64)>) {
    let m = grid.len();
    if y <= grid[0] {
        out.push((0, 1.0));
        return;
    }
    if y >= grid[m - 1] {
        out.push((m - 1, 1.0));
        return;
    }
    let i = grid.partition_point(|&g| g <= y);
    match basis {
        Basis::PiecewiseConstant => out.push((i - 1, 1.0)),
        Basis::PiecewiseLinear => {
            let t = (y - grid[i - 1]) / (grid[i] - grid[i - 1]);
            out.push((i - 1, 1.0 - t));
            out.push((i, t));
        }
    }
}

/// Builds the `m × m` collocation matrix of `L_φ` on `m ≥ 3` uniform nodes.
///
/// Row `i` holds `(1/k) Σ_j e^{φ(b_j x_i)} · basis(b_j x_i)`. Rows are built
/// in parallel; entries within a row are summed in a fixed order.
pub fn assemble(
    map: &MapSpec,
    phi: &GridFunction,
    m: usize,
    basis: Basis,
) -> Result<DiscretizedOperator> {
    if m < 3 {
        return domain(format!("grid needs at least 3 nodes, got {m}"));
    }
    let grid = uniform_grid(map.domain(), m);
    let k = map.k();
    let rows: Vec<Vec<(usize, f64)>> = grid
        .par_iter()
        .enumerate()
        .map(|(node, &x)| {
            let mut entries = Vec::with_capacity(2 * k);
            let mut weights = Vec::with_capacity(2);
            for j in 0..k {
                let y = map.try_branch(j, x).map_err(|e| Error::Branch {
                    node,
                    branch: j,
                    x,
                    reason: e.to_string(),
                })?;
                let w = phi.eval(y).exp() / k as f64;
                weights.clear();
                basis_weights(&grid, basis, y, &mut weights);
                entries.extend(weights.iter().map(|&(c, b)| (c, w * b)));
            }
            entries.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
            for (c, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            Ok(merged)
        })
        .collect::<Result<_>>()?;
    let mut row_ptr = Vec::with_capacity(m + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(DiscretizedOperator {
        map: map.clone(),
        potential: phi.clone(),
        grid,
        basis,
        norm_space: basis.default_space(),
        row_ptr,
        cols,
        vals,
    })
}

impl DiscretizedOperator {
    pub fn map(&self) -> &MapSpec {
        &self.map
    }

    pub fn potential(&self) -> &GridFunction {
        &self.potential
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    /// Space whose full norm measures decay in [`eigendata`] and
    /// [`gap_decay_check`].
    pub fn norm_space(&self) -> Space {
        self.norm_space
    }

    pub fn with_norm_space(mut self, space: Space) -> Result<Self> {
        space.check()?;
        self.norm_space = space;
        Ok(self)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.size())
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    /// `out = A v`.
    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(c, a)| a * v[c]).sum();
        }
    }

    /// `out = Aᵀ v`.
    pub fn mul_vec_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            for (c, a) in self.row(i) {
                out[c] += a * vi;
            }
        }
    }

    /// `A f` as a grid function on the operator grid.
    pub fn apply_grid(&self, f: &GridFunction) -> Result<GridFunction> {
        let coeffs = self.coefficients(f)?;
        let mut out = vec![0.0; self.size()];
        self.mul_vec(&coeffs, &mut out);
        self.grid_function(out)
    }

    fn coefficients(&self, f: &GridFunction) -> Result<Vec<f64>> {
        if f.grid() == self.grid.as_slice() {
            Ok(f.values().to_vec())
        } else {
            Ok(self.grid.iter().map(|&x| f.eval(x)).collect())
        }
    }

    pub fn grid_function(&self, values: Vec<f64>) -> Result<GridFunction> {
        GridFunction::new(self.grid.clone(), values, self.basis.interp())?
            .with_domain(self.map.domain())
    }

    /// Full norm of a coefficient vector in [`Self::norm_space`].
    pub fn full_norm(&self, v: &[f64]) -> f64 {
        let sup = v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let diam = self.map.diam();
        let semi = match self.norm_space {
            Space::Holder { alpha } => holder_seminorm_raw(&self.grid, v, alpha),
            Space::Variation { p } => bvp_seminorm_raw(v, p),
        };
        sup + self.norm_space.diam_factor(diam) * semi
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.size();
        (0..m)
            .map(|i| {
                let mut row = vec![0.0; m];
                for (c, v) in self.row(i) {
                    row[c] = v;
                }
                row
            })
            .collect()
    }

    /// Dense dump, one CSV row per matrix row.
    pub fn write_dense_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for row in self.to_dense() {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Dense dump: `m` as little-endian `u64`, then `m²` little-endian `f64`
    /// in row-major order.
    pub fn write_dense_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&(self.size() as u64).to_le_bytes())?;
        for row in self.to_dense() {
            for v in row {
                writer.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Leading eigendata of a discretized operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    pub lambda: f64,
    /// Positive eigenfunction with `ν(h) = 1`.
    pub h: GridFunction,
    /// Dual eigenprobability on the grid nodes.
    pub nu: DiscreteMeasure,
    /// `dμ = h dν`.
    pub mu: DiscreteMeasure,
    pub subdominant_modulus: f64,
    pub iterations: usize,
    /// `(‖Ah − λh‖_∞ / (λ‖h‖_∞), ‖Aᵀν − λν‖₁ / λ)`.
    pub residuals: (f64, f64),
}

/// JSON summary of a spectral computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub lambda: f64,
    pub subdominant: f64,
    pub ratio: f64,
    pub residuals: (f64, f64),
    pub iterations: usize,
}

impl SpectralData {
    pub fn summary(&self) -> SpectralSummary {
        SpectralSummary {
            lambda: self.lambda,
            subdominant: self.subdominant_modulus,
            ratio: self.subdominant_modulus / self.lambda,
            residuals: self.residuals,
            iterations: self.iterations,
        }
    }

    /// `ν(f) = Σ ν_i f(x_i)`.
    pub fn nu_of(&self, values: &[f64]) -> f64 {
        self.nu
            .weights()
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// [`eigendata_with`] at `ε_eig = 1e−10` and `10⁵` iterations.
pub fn eigendata(op: &DiscretizedOperator) -> Result<SpectralData> {
    eigendata_with(op, EPS_EIG, MAX_ITER)
}

/// Power iteration on `A` from `𝟙` for `(λ, h)` and on `Aᵀ` from uniform
/// weights for `ν`; then the growth rate of `g ↦ A(g − ν(g)h)` in the full
/// norm of [`DiscretizedOperator::norm_space`] estimates the subdominant
/// modulus.
pub fn eigendata_with(
    op: &DiscretizedOperator,
    eps_eig: f64,
    max_iter: usize,
) -> Result<SpectralData> {
    let m = op.size();
    let mut h = vec![1.0; m];
    let mut next = vec![0.0; m];
    let mut lambda = 0.0;
    let mut res_h = f64::INFINITY;
    let mut it_h = 0;
    while it_h < max_iter {
        op.mul_vec(&h, &mut next);
        it_h += 1;
        lambda = sup(&next);
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidEigendata(format!(
                "power iteration produced λ = {lambda}"
            )));
        }
        res_h = next
            .iter()
            .zip(&h)
            .fold(0.0f64, |s, (a, b)| s.max((a - lambda * b).abs()))
            / lambda;
        for (hi, ni) in h.iter_mut().zip(&next) {
            *hi = ni / lambda;
        }
        if res_h <= eps_eig {
            break;
        }
    }

    let mut nu = vec![1.0 / m as f64; m];
    let mut res_nu = f64::INFINITY;
    let mut it_nu = 0;
    while it_nu < max_iter {
        op.mul_vec_transpose(&nu, &mut next);
        it_nu += 1;
        let mass: f64 = next.iter().sum();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidEigendata(format!(
                "dual iteration produced mass {mass}"
            )));
        }
        res_nu = next
            .iter()
            .zip(&nu)
            .map(|(a, b)| (a - mass * b).abs())
            .sum::<f64>()
            / mass;
        for (vi, ni) in nu.iter_mut().zip(&next) {
            *vi = ni / mass;
        }
        if res_nu <= eps_eig {
            break;
        }
    }
    if res_h > eps_eig || res_nu > eps_eig {
        return Err(Error::Convergence {
            iterations: it_h.max(it_nu),
            residuals: (res_h, res_nu),
        });
    }

    // residuals against the final λ, then normalize ν(h) = 1
    op.mul_vec_transpose(&nu, &mut next);
    res_nu = next
        .iter()
        .zip(&nu)
        .map(|(a, b)| (a - lambda * b).abs())
        .sum::<f64>()
        / lambda;
    let nu_h: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    if !(nu_h > 0.0) {
        return Err(Error::InvalidEigendata(format!("ν(h) = {nu_h}")));
    }
    h.iter_mut().for_each(|x| *x /= nu_h);
    if let Some(i) = h.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::InvalidEigendata(format!(
            "h({}) = {} is not positive",
            op.grid[i], h[i]
        )));
    }
    let nu_measure = DiscreteMeasure::new(op.grid.clone(), nu.clone())?;
    let mu_weights: Vec<f64> = nu.iter().zip(&h).map(|(a, b)| a * b).collect();
    let mu = DiscreteMeasure::new(op.grid.clone(), mu_weights)?.normalized()?;
    let (subdominant, it_sub) = subdominant_modulus(op, &h, &nu);

    Ok(SpectralData {
        lambda,
        h: op.grid_function(h)?,
        nu: nu_measure,
        mu,
        subdominant_modulus: subdominant,
        iterations: it_h + it_nu + it_sub,
        residuals: (res_h, res_nu),
    })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |s, x| s.max(x.abs()))
}

fn project(g: &mut [f64], h: &[f64], nu: &[f64]) {
    let c: f64 = nu.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
    for (gi, hi) in g.iter_mut().zip(h) {
        *gi -= c * hi;
    }
}

/// Windowed geometric mean of the per-step growth of the deflated iterates.
fn subdominant_modulus(op: &DiscretizedOperator, h: &[f64], nu: &[f64]) -> (f64, usize) {
    let m = op.size();
    let mut rng = ChaCha8Rng::seed_from_u64(SUBDOMINANT_SEED);
    let mut g: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project(&mut g, h, nu);
    let n0 = op.full_norm(&g);
    if !(n0 > 0.0) {
        return (0.0, 0);
    }
    g.iter_mut().for_each(|x| *x /= n0);
    let mut next = vec![0.0; m];
    let mut logs: Vec<f64> = Vec::new();
    let window = |logs: &[f64], end: usize| -> f64 {
        let s: f64 = logs[end - SUBDOMINANT_WINDOW..end].iter().sum();
        (s / SUBDOMINANT_WINDOW as f64).exp()
    };
    while logs.len() < SUBDOMINANT_MAX_ITER {
        op.mul_vec(&g, &mut next);
        project(&mut next, h, nu);
        let s = op.full_norm(&next);
        if !(s > f64::MIN_POSITIVE) {
            return (0.0, logs.len() + 1);
        }
        logs.push(s.ln());
        for (gi, ni) in g.iter_mut().zip(&next) {
            *gi = ni / s;
        }
        let n = logs.len();
        if n >= SUBDOMINANT_MIN_ITER && n.is_multiple_of(SUBDOMINANT_WINDOW) {
            let (now, before) = (window(&logs, n), window(&logs, n - SUBDOMINANT_WINDOW));
            if (now - before).abs() <= 1e-6 * now.max(1e-300) {
                return (now, n);
            }
        }
    }
    let n = logs.len();
    (window(&logs, n), n)
}

/// RPF measure `h_i ν_i` renormalized to mass 1.
pub fn rpf_measure(sd: &SpectralData) -> Result<DiscreteMeasure> {
    if let Some((x, v)) =
        sd.h.grid()
            .iter()
            .zip(sd.h.values())
            .find(|(_, &v)| !(v > 0.0))
    {
        return Err(Error::InvalidEigendata(format!(
            "h({x}) = {v} is not positive"
        )));
    }
    let weights = sd
        .nu
        .support()
        .iter()
        .zip(sd.nu.weights())
        .map(|(&x, &w)| w * sd.h.eval(x))
        .collect();
    DiscreteMeasure::new(sd.nu.support().to_vec(), weights)?.normalized()
}

/// `max_f |∫ f∘T dμ − ∫ f dμ| / ‖f‖_Lip` over the test functions.
pub fn invariance_residual(
    map: &MapSpec,
    mu: &DiscreteMeasure,
    tests: &[GridFunction],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in tests {
        let scale = norm(f, Space::lipschitz())?.full_norm;
        if scale == 0.0 {
            continue;
        }
        let pushed = mu.integrate(|x| f.eval(map.forward(x)));
        let fixed = mu.integrate(|x| f.eval(x));
        worst = worst.max((pushed - fixed).abs() / scale);
    }
    Ok(worst)
}

/// Random test function on `m` uniform nodes of `[a, b]`, cycling through
/// random walks, trigonometric sums, ramps or steps, and white noise.
pub fn random_test_function(
    rng: &mut impl Rng,
    (a, b): (f64, f64),
    m: usize,
    interp: Interp,
) -> Result<GridFunction> {
    let kind = rng.gen_range(0..4);
    let grid = uniform_grid((a, b), m);
    let span = b - a;
    let values: Vec<f64> = match kind {
        0 => {
            let mut acc = 0.0;
            grid.iter()
                .map(|_| {
                    acc += rng.gen_range(-1.0..1.0);
                    acc
                })
                .collect()
        }
        1 => {
            let terms: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
                .map(|_| {
                    (
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(1..=20) as f64,
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            grid.iter()
                .map(|&x| {
                    let t = (x - a) / span;
                    terms
                        .iter()
                        .map(|(amp, freq, ph)| amp * (std::f64::consts::TAU * freq * t + ph).sin())
                        .sum()
                })
                .collect()
        }
        2 => {
            let c = rng.gen_range(a..b);
            let w = rng.gen_range(0.0..0.2) * span;
            let up = rng.gen_range(0.5..2.0);
            grid.iter()
                .map(|&x| match interp {
                    Interp::PiecewiseConstantLeft => {
                        if x >= c && x < c + w.max(span / m as f64) {
                            up
                        } else {
                            0.0
                        }
                    }
                    Interp::PiecewiseLinear => {
                        up * ((x - c) / w.max(span / m as f64)).clamp(0.0, 1.0)
                    }
                })
                .collect()
        }
        _ => grid.iter().map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    GridFunction::new(grid, values, interp)?.with_domain((a, b))
}

/// Ratio of seminorms before and after one application of `L_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LasotaYorkeReport {
    pub space: Space,
    /// `θ` for Hölder spaces, `k^{−1/p}` for p-variation.
    pub contraction: f64,
    pub tol: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub resampled: usize,
    pub grid: usize,
    pub seed: u64,
    pub pass: bool,
}

/// `L_0 f` sampled on the grid of `f`, using the interpolant of `f`.
pub fn apply_zero_potential(map: &MapSpec, f: &GridFunction) -> Result<GridFunction> {
    let k = map.k();
    let values = f
        .grid()
        .iter()
        .map(|&x| {
            let mut s = 0.0;
            for j in 0..k {
                s += f.eval(map.try_branch(j, x)?);
            }
            Ok(s / k as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    f.with_values(values)
}

/// Samples random grid functions and records `seminorm(L_0 f)/seminorm(f)`.
///
/// Hölder spaces use piecewise-linear functions and need class `H`;
/// p-variation uses piecewise-constant functions and needs class `V`.
/// Constant samples are redrawn.
pub fn lasota_yorke_check(
    map: &MapSpec,
    space: Space,
    samples: usize,
    m: usize,
    seed: u64,
    tol: f64,
) -> Result<LasotaYorkeReport> {
    space.check()?;
    let (contraction, interp) = match space {
        Space::Holder { alpha } => (
            map.holder_theta(alpha).ok_or_else(|| {
                Error::Usage(format!(
                    "map (class {}) is not in class H for α = {alpha}",
                    map.class_tag()
                ))
            })?,
            Interp::PiecewiseLinear,
        ),
        Space::Variation { p } => {
            if !map.class_tag().variation {
                return Err(Error::Usage(format!(
                    "p-variation contraction needs a class-V map (class {})",
                    map.class_tag()
                )));
            }
            (
                (map.k() as f64).powf(-1.0 / p),
                Interp::PiecewiseConstantLeft,
            )
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut functions: Vec<GridFunction> = Vec::with_capacity(samples);
    let mut resampled = 0;
    {
        let out = &mut functions;
        while out.len() < samples {
            let f = random_test_function(&mut rng, map.domain(), m, interp)?;
            if seminorm(&f, space)? > 0.0 {
                out.push(f);
            } else {
                resampled += 1;
                if resampled > 10 * samples + 100 {
                    return Err(Error::Capability(
                        "could not draw non-constant test functions".into(),
                    ));
                }
            }
        }
    }
    let ratios = functions
        .par_iter()
        .map(|f| {
            let before = seminorm(f, space)?;
            let after = seminorm(&apply_zero_potential(map, f)?, space)?;
            Ok(after / before)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(LasotaYorkeReport {
        space,
        contraction,
        tol,
        max_ratio,
        samples,
        resampled,
        grid: m,
        seed,
        pass: max_ratio <= contraction + tol,
    })
}

/// Decay of `A^n f` on the stable space `ker ν`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapDecayReport {
    pub delta: f64,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// `sup_{n, f} ‖Aⁿf‖ / (λⁿ(1−δ)ⁿ‖f‖)`.
    pub sup_constant: f64,
    /// Step at which the supremum was attained.
    pub worst_n: usize,
    /// Worst `(‖Aⁿf‖/(λⁿ‖f‖))^{1/n}` at `n = n_max`.
    pub empirical_rate: f64,
    pub c_bound: f64,
    pub pass: bool,
}

/// For `trials` random `f` with `ν(f) = 0`, tracks
/// `C_n = ‖Aⁿf‖ / (λⁿ(1−δ)ⁿ‖f‖)` for `n ≤ n_max` and reports the supremum.
pub fn gap_decay_check(
    op: &DiscretizedOperator,
    sd: &SpectralData,
    delta: f64,
    n_max: usize,
    trials: usize,
    seed: u64,
    c_bound: f64,
) -> Result<GapDecayReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    let h = sd.h.values();
    let nu = sd.nu.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interp = op.basis().interp();
    let (mut sup_c, mut worst_n, mut rate) = (0.0f64, 0, 0.0f64);
    let mut next = vec![0.0; op.size()];
    let mut done = 0;
    let mut attempts = 0;
    while done < trials {
        attempts += 1;
        if attempts > 10 * trials + 100 {
            return Err(Error::Capability(
                "could not draw nonzero stable-space functions".into(),
            ));
        }
        let f = random_test_function(&mut rng, op.map().domain(), op.size(), interp)?;
        let mut g = op.coefficients(&f)?;
        project(&mut g, h, nu);
        let n0 = op.full_norm(&g);
        if !(n0 > EPS_NUM) {
            continue;
        }
        done += 1;
        g.iter_mut().for_each(|x| *x /= n0);
        let mut log_growth = 0.0;
        for n in 1..=n_max {
            op.mul_vec(&g, &mut next);
            let s = op.full_norm(&next);
            if s == 0.0 {
                log_growth = f64::NEG_INFINITY;
                break;
            }
            log_growth += (s / sd.lambda).ln();
            for (gi, ni) in g.iter_mut().zip(&next) {
                *gi = ni / s;
            }
            let c_n = (log_growth - n as f64 * (1.0 - delta).ln()).exp();
            if c_n > sup_c {
                sup_c = c_n;
                worst_n = n;
            }
        }
        if n_max > 0 {
            rate = rate.max((log_growth / n_max as f64).exp());
        }
    }
    // the iterates were renormalized after each step, so ‖f‖ is 1 at n = 0
    sup_c = sup_c.max(1.0);
    Ok(GapDecayReport {
        delta,
        n_max,
        trials,
        seed,
        sup_constant: sup_c,
        worst_n,
        empirical_rate: rate,
        c_bound,
        pass: sup_c.is_finite() && sup_c <= c_bound,
    })
}

/// `C_n = |λ^{−n} ∫ f · Aⁿ(g h) dν − μ(f) μ(g)|` for `n = 0, …, n_max`.
pub fn correlation_sequence(
    op: &DiscretizedOperator,
    sd: &SpectralData,
    f: &GridFunction,
    g: &GridFunction,
    n_max: usize,
) -> Result<Vec<f64>> {
    let fv = op.coefficients(f)?;
    let gv = op.coefficients(g)?;
    let h = sd.h.values();
    let nu = sd.nu.weights();
    let mu_f = sd.mu.integrate(|x| f.eval(x));
    let mu_g = sd.mu.integrate(|x| g.eval(x));
    let mut w: Vec<f64> = gv.iter().zip(h).map(|(a, b)| a * b).collect();
    let mut next = vec![0.0; op.size()];
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            op.mul_vec(&w, &mut next);
            for (wi, ni) in w.iter_mut().zip(&next) {
                *wi = ni / sd.lambda;
            }
        }
        let integral: f64 = nu
            .iter()
            .zip(&fv)
            .zip(&w)
            .map(|((a, b), c)| a * b * c)
            .sum();
        out.push((integral - mu_f * mu_g).abs());
    }
    Ok(out)
}

/// Writes `(n, C_n)` rows with a header.
pub fn write_correlations_csv<W: Write>(values: &[f64], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["n", "C_n"])?;
    for (n, c) in values.iter().enumerate() {
        wtr.write_record([n.to_string(), c.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::{make_doubling, make_pomeau_manneville, DoublingVariant};

    fn zero(map: &MapSpec, m: usize) -> GridFunction {
        GridFunction::constant(map.domain(), m, Interp::PiecewiseLinear, 0.0).unwrap()
    }

    #[test]
    fn apply_examples() {
        let d = make_doubling(DoublingVariant::Interval);
        let phi = zero(&d, 5);
        let id = GridFunction::sample((0.0, 1.0), 5, Interp::PiecewiseLinear, |x| x).unwrap();
        assert!((apply(&d, &phi, &id, 0.5).unwrap() - 0.5).abs() < 1e-15);
        let one = GridFunction::constant((0.0, 1.0), 5, Interp::PiecewiseLinear, 1.0).unwrap();
        let pm = make_pomeau_manneville(1.0).unwrap();
        for x in [0.0, 0.3, 0.77, 1.0] {
            assert!((apply(&pm, &phi, &one, x).unwrap() - 1.0).abs() < 1e-15);
        }
        let c = GridFunction::constant((0.0, 1.0), 5, Interp::PiecewiseLinear, 0.3).unwrap();
        assert!((apply(&pm, &c, &one, 0.4).unwrap() - 0.3f64.exp()).abs() < 1e-15);
        assert!(matches!(apply(&pm, &phi, &one, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_potential_rows_are_stochastic() {
        let tent = make_doubling(DoublingVariant::Tent);
        let op = assemble(&tent, &zero(&tent, 3), 3, Basis::PiecewiseLinear).unwrap();
        for s in op.row_sums() {
            assert!((s - 1.0).abs() < EPS_NUM);
        }
        for q in [0.5, 1.0, 2.0] {
            let pm = make_pomeau_manneville(q).unwrap();
            for basis in [Basis::PiecewiseLinear, Basis::PiecewiseConstant] {
                let op = assemble(&pm, &zero(&pm, 65), 65, basis).unwrap();
                assert!(op.row_sums().iter().all(|s| (s - 1.0).abs() < EPS_NUM));
                assert!(op.to_dense().iter().flatten().all(|&v| v >= 0.0));
            }
        }
        assert!(assemble(&tent, &zero(&tent, 3), 2, Basis::PiecewiseLinear).is_err());
    }

    #[test]
    fn matrix_action_on_affine_function() {
        let d = make_doubling(DoublingVariant::Interval);
        let op = assemble(&d, &zero(&d, 33), 33, Basis::PiecewiseLinear).unwrap();
        let f = GridFunction::sample((0.0, 1.0), 33, Interp::PiecewiseLinear, |x| x - 0.5).unwrap();
        let lf = op.apply_grid(&f).unwrap();
        for (&x, &v) in lf.grid().iter().zip(lf.values()) {
            assert!((v - (x - 0.5) / 2.0).abs() < 1e-15);
        }
        for (i, &x) in op.grid().iter().enumerate() {
            let direct = apply(&d, &zero(&d, 33), &f, x).unwrap();
            assert!((direct - lf.values()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn doubling_spectrum() {
        let d = make_doubling(DoublingVariant::Interval);
        let op = assemble(&d, &zero(&d, 256), 256, Basis::PiecewiseLinear).unwrap();
        let sd = eigendata(&op).unwrap();
        assert!((sd.lambda - 1.0).abs() < 1e-9);
        assert!(sd.h.values().iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(
            (sd.subdominant_modulus - 0.5).abs() < 0.01,
            "{}",
            sd.subdominant_modulus
        );
        assert!((sd.nu.mass() - 1.0).abs() < 1e-12);
        assert!((sd.mu.mass() - 1.0).abs() < 1e-12);
        let mu = rpf_measure(&sd).unwrap();
        for (a, b) in mu.weights().iter().zip(sd.nu.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_potential_scales_lambda() {
        let pm = make_pomeau_manneville(1.0).unwrap();
        let base =
            eigendata(&assemble(&pm, &zero(&pm, 64), 64, Basis::PiecewiseLinear).unwrap()).unwrap();
        let c = GridFunction::constant((0.0, 1.0), 64, Interp::PiecewiseLinear, 0.7).unwrap();
        let sd = eigendata(&assemble(&pm, &c, 64, Basis::PiecewiseLinear).unwrap()).unwrap();
        assert!((sd.lambda - 0.7f64.exp()).abs() < 1e-9);
        assert!(sd.h.values().iter().all(|v| (v - 1.0).abs() < 1e-8));
        for (a, b) in sd.nu.weights().iter().zip(base.nu.weights()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn invariance_examples() {
        let tent = make_doubling(DoublingVariant::Tent);
        let m = 257;
        let uniform =
            DiscreteMeasure::from_atoms(uniform_grid((0.0, 1.0), m).into_iter().map(|x| (x, 1.0)))
                .unwrap()
                .normalized()
                .unwrap();
        let id = GridFunction::sample((0.0, 1.0), 33, Interp::PiecewiseLinear, |x| x).unwrap();
        let one = GridFunction::constant((0.0, 1.0), 33, Interp::PiecewiseLinear, 1.0).unwrap();
        let r = invariance_residual(&tent, &uniform, std::slice::from_ref(&id)).unwrap();
        assert!(r <= 2.0 / m as f64, "{r}");
        assert_eq!(invariance_residual(&tent, &uniform, &[one]).unwrap(), 0.0);
        // 2/3 is fixed by the tent
        let p = DiscreteMeasure::dirac(2.0 / 3.0);
        assert!(invariance_residual(&tent, &p, &[id]).unwrap() < 1e-15);
    }

    #[test]
    fn lasota_yorke_examples() {
        let tent = make_doubling(DoublingVariant::Tent);
        let interval = make_doubling(DoublingVariant::Interval);
        let id = GridFunction::sample((0.0, 1.0), 65, Interp::PiecewiseLinear, |x| x).unwrap();
        let lip = |f: &GridFunction| seminorm(f, Space::lipschitz()).unwrap();
        let ratio = lip(&apply_zero_potential(&interval, &id).unwrap()) / lip(&id);
        assert!((ratio - 0.5).abs() < 1e-12);
        // the two tent branches cancel the slope of x
        assert!(lip(&apply_zero_potential(&tent, &id).unwrap()) < 1e-15);
        let r = lasota_yorke_check(&tent, Space::total_variation(), 50, 128, 1, 0.02).unwrap();
        assert!(r.pass, "{r:?}");
        let circle = make_doubling(DoublingVariant::Circle);
        assert!(matches!(
            lasota_yorke_check(&circle, Space::total_variation(), 5, 64, 1, 0.02),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn gap_decay_examples() {
        let d = make_doubling(DoublingVariant::Interval);
        let op = assemble(&d, &zero(&d, 128), 128, Basis::PiecewiseLinear).unwrap();
        let sd = eigendata(&op).unwrap();
        let ok = gap_decay_check(&op, &sd, 0.33, 60, 10, 7, 10.0).unwrap();
        assert!(ok.pass, "{ok:?}");
        let bad = gap_decay_check(&op, &sd, 0.6, 60, 10, 7, 10.0).unwrap();
        assert!(!bad.pass, "{bad:?}");
        assert!(gap_decay_check(&op, &sd, 1.0, 10, 1, 7, 10.0).is_err());
    }

    #[test]
    fn correlation_examples() {
        let d = make_doubling(DoublingVariant::Interval);
        let m = 512;
        let op = assemble(&d, &zero(&d, m), m, Basis::PiecewiseLinear).unwrap();
        let sd = eigendata(&op).unwrap();
        let cos = GridFunction::sample((0.0, 1.0), m, Interp::PiecewiseLinear, |x| {
            (std::f64::consts::TAU * x).cos()
        })
        .unwrap();
        let one = GridFunction::constant((0.0, 1.0), m, Interp::PiecewiseLinear, 1.0).unwrap();
        let c = correlation_sequence(&op, &sd, &cos, &one, 5).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-12), "{c:?}");
        let c = correlation_sequence(&op, &sd, &cos, &cos, 5).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-3);
        assert!(c[1..].iter().all(|v| *v < 0.02), "{c:?}");
    }

    #[test]
    fn dense_exports() {
        let tent = make_doubling(DoublingVariant::Tent);
        let op = assemble(&tent, &zero(&tent, 3), 3, Basis::PiecewiseLinear).unwrap();
        let mut bin = Vec::new();
        op.write_dense_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 8 + 9 * 8);
        let mut csv = Vec::new();
        op.write_dense_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
    }
}
