//! Wasserstein distances between finitely supported measures on an interval.
//!
//! `W₁` uses the closed form `∫|F_μ − F_ν|`; `W_α` for general `α ∈ (0, 1]`
//! solves the finite transportation problem exactly with a primal network
//! simplex (the monotone coupling is only optimal for convex costs).

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interval_maps::MapSpec;
use crate::regularity::{holder_seminorm, GridFunction};
use crate::EPS_NUM;

/// Largest support accepted by [`w_alpha_lp`] on either side.
pub const LP_MAX_SUPPORT: usize = 200;

/// Duality gap above which an LP solution is rejected.
pub const LP_GAP_TOL: f64 = 1e-9;

/// Finitely supported nonnegative measure with sorted, distinct atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.support, raw.weights)
    }
}

impl DiscreteMeasure {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return domain("support and weights differ in length");
        }
        if let Some(i) = support.windows(2).position(|w| !(w[1] > w[0])) {
            return domain(format!(
                "support not strictly increasing at index {}",
                i + 1
            ));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return domain("non-finite support point");
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return domain("weights must be finite and nonnegative");
        }
        Ok(Self { support, weights })
    }

    /// Sorts the atoms and merges repeated points.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms
            .iter()
            .any(|(x, w)| !x.is_finite() || !(*w >= 0.0) || !w.is_finite())
        {
            return domain("atoms must have finite points and finite nonnegative weights");
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            if support.last() == Some(&x) {
                *weights.last_mut().unwrap() += w;
            } else {
                support.push(x);
                weights.push(w);
            }
        }
        Ok(Self { support, weights })
    }

    pub fn dirac(x: f64) -> Self {
        Self {
            support: vec![x],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0) {
            return domain("cannot normalize a zero measure");
        }
        Ok(Self {
            support: self.support.clone(),
            weights: self.weights.iter().map(|w| w / m).collect(),
        })
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut atoms = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected 2 columns (point, weight)",
                    line + 1
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(x), Ok(w)) => atoms.push((x, w)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: not a (point, weight) pair",
                        line + 1
                    )))
                }
            }
        }
        Self::from_atoms(atoms)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["point", "weight"])?;
        for (x, w) in self.support.iter().zip(&self.weights) {
            wtr.write_record([x.to_string(), w.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_masses(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    let (a, b) = (mu.mass(), nu.mass());
    if (a - b).abs() > EPS_NUM * a.max(b).max(1.0) {
        return domain(format!("measures have different masses ({a} vs {b})"));
    }
    if mu.is_empty() || nu.is_empty() {
        return domain("empty measure");
    }
    Ok(())
}

/// `W₁(μ, ν) = ∫ |F_μ − F_ν|` for measures of equal mass.
pub fn w1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    check_masses(mu, nu)?;
    let (xs, ys) = (mu.support(), nu.support());
    let (mut i, mut j) = (0, 0);
    let (mut fm, mut fn_) = (0.0f64, 0.0f64);
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    while i < xs.len() || j < ys.len() {
        let x = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            total += (fm - fn_).abs() * (x - p);
        }
        while i < xs.len() && xs[i] == x {
            fm += mu.weights()[i];
            i += 1;
        }
        while j < ys.len() && ys[j] == x {
            fn_ += nu.weights()[j];
            j += 1;
        }
        prev = Some(x);
    }
    Ok(total)
}

/// Optimal transport plan of a finite transportation problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub cost: f64,
    /// `(i, j, mass)` for the basic cells with positive mass.
    pub flows: Vec<(usize, usize, f64)>,
    /// `|primal − dual|` plus any dual infeasibility, scaled by the mass.
    pub dual_gap: f64,
    pub pivots: usize,
}

struct Cell {
    i: usize,
    j: usize,
    flow: f64,
}

/// Solves `min Σ c_ij x_ij` over couplings of `supply` and `demand`
/// (equal totals) with the primal transportation simplex.
///
/// Starts from the north-west corner basis, prices with the `u − v`
/// potentials and pivots along the basis-tree cycle. Dantzig pricing, with
/// Bland's rule after a run of degenerate pivots.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<TransportPlan> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return domain("empty transportation problem");
    }
    if cost.len() != m || cost.iter().any(|r| r.len() != n) {
        return domain("cost matrix has the wrong shape");
    }
    let total_a: f64 = supply.iter().sum();
    let total_b: f64 = demand.iter().sum();
    let demand: Vec<f64> = demand.iter().map(|b| b * total_a / total_b).collect();
    let cost_scale = cost
        .iter()
        .flatten()
        .fold(0.0f64, |s, c| s.max(c.abs()))
        .max(1e-300);
    let price_tol = 1e-13 * cost_scale;

    // north-west corner: a staircase spanning tree with m + n − 1 cells
    let mut cells: Vec<Cell> = Vec::with_capacity(m + n - 1);
    let mut basic_at = vec![usize::MAX; m * n];
    {
        let (mut ra, mut rb) = (supply.to_vec(), demand.clone());
        let (mut i, mut j) = (0, 0);
        loop {
            let x = ra[i].min(rb[j]).max(0.0);
            ra[i] -= x;
            rb[j] -= x;
            basic_at[i * n + j] = cells.len();
            cells.push(Cell { i, j, flow: x });
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || ra[i] <= rb[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let nodes = m + n;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut parent_edge = vec![usize::MAX; nodes];
    let mut seen = vec![false; nodes];
    let mut queue = Vec::with_capacity(nodes);
    let max_pivots = 50 * (m + n) * (m + n) + 1000;
    let mut pivots = 0;
    let mut degenerate_run = 0;

    loop {
        // potentials from the basis tree, rooted at row 0
        for a in adjacency.iter_mut() {
            a.clear();
        }
        for (e, c) in cells.iter().enumerate() {
            adjacency[c.i].push(e);
            adjacency[m + c.j].push(e);
        }
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        queue.push(0);
        seen[0] = true;
        u[0] = 0.0;
        let mut head = 0;
        while head < queue.len() {
            let node = queue[head];
            head += 1;
            for &e in &adjacency[node] {
                let c = &cells[e];
                let other = if node < m { m + c.j } else { c.i };
                if seen[other] {
                    continue;
                }
                seen[other] = true;
                if node < m {
                    v[c.j] = cost[c.i][c.j] - u[c.i];
                } else {
                    u[c.i] = cost[c.i][c.j] - v[c.j];
                }
                queue.push(other);
            }
        }
        if queue.len() != nodes {
            return Err(Error::Capability(
                "transport basis lost connectivity".into(),
            ));
        }

        // pricing
        let bland = degenerate_run > m + n;
        let mut entering: Option<(usize, usize, f64)> = None;
        'price: for i in 0..m {
            for j in 0..n {
                if basic_at[i * n + j] != usize::MAX {
                    continue;
                }
                let r = cost[i][j] - u[i] - v[j];
                if r < -price_tol {
                    match entering {
                        Some((_, _, best)) if best <= r => {}
                        _ => entering = Some((i, j, r)),
                    }
                    if bland {
                        break 'price;
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            break;
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Capability(format!(
                "transportation simplex exceeded {max_pivots} pivots"
            )));
        }

        // tree path from row node ei to column node m + ej
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        queue.push(ei);
        seen[ei] = true;
        let target = m + ej;
        let mut head = 0;
        while head < queue.len() && !seen[target] {
            let node = queue[head];
            head += 1;
            for &e in &adjacency[node] {
                let c = &cells[e];
                let other = if node < m { m + c.j } else { c.i };
                if !seen[other] {
                    seen[other] = true;
                    parent_edge[other] = e;
                    queue.push(other);
                }
            }
        }
        // walk back from the column node: signs −, +, −, ...
        let mut path = Vec::new();
        let mut node = target;
        while node != ei {
            let e = parent_edge[node];
            path.push(e);
            let c = &cells[e];
            node = if node < m { m + c.j } else { c.i };
        }
        let mut leaving = usize::MAX;
        let mut theta = f64::INFINITY;
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = cells[e].flow;
                let better = f < theta
                    || (f == theta
                        && bland
                        && (cells[e].i, cells[e].j) < (cells[leaving].i, cells[leaving].j));
                if better {
                    theta = f;
                    leaving = e;
                }
            }
        }
        let theta = theta.max(0.0);
        if theta == 0.0 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                cells[e].flow = (cells[e].flow - theta).max(0.0);
            } else {
                cells[e].flow += theta;
            }
        }
        let old = &cells[leaving];
        basic_at[old.i * n + old.j] = usize::MAX;
        cells[leaving] = Cell {
            i: ei,
            j: ej,
            flow: theta,
        };
        basic_at[ei * n + ej] = leaving;
    }

    let primal: f64 = cells.iter().map(|c| c.flow * cost[c.i][c.j]).sum();
    let dual: f64 = supply.iter().zip(&u).map(|(a, x)| a * x).sum::<f64>()
        + demand.iter().zip(&v).map(|(b, y)| b * y).sum::<f64>();
    let min_reduced = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| cost[i][j] - u[i] - v[j])
        .fold(0.0f64, f64::min);
    let dual_gap = (primal - dual).abs() + (-min_reduced) * total_a;
    if dual_gap > LP_GAP_TOL * total_a.max(1.0) * cost_scale.max(1.0) {
        return Err(Error::InequalityViolated {
            what: "transport LP duality gap".into(),
            lhs: dual_gap,
            rhs: LP_GAP_TOL,
        });
    }
    let flows = cells
        .iter()
        .filter(|c| c.flow > 0.0)
        .map(|c| (c.i, c.j, c.flow))
        .collect();
    Ok(TransportPlan {
        cost: primal,
        flows,
        dual_gap,
        pivots,
    })
}

/// Exact `W_α(μ, ν)` with cost `|x − y|^α` via [`solve_transport`].
pub fn w_alpha_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure, alpha: f64) -> Result<f64> {
    Ok(w_alpha_plan(mu, nu, alpha)?.cost)
}

pub fn w_alpha_plan(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    alpha: f64,
) -> Result<TransportPlan> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    if mu.len() > LP_MAX_SUPPORT || nu.len() > LP_MAX_SUPPORT {
        return Err(Error::Capability(format!(
            "supports of size {} and {} exceed the LP limit of {LP_MAX_SUPPORT}",
            mu.len(),
            nu.len()
        )));
    }
    check_masses(mu, nu)?;
    let cost: Vec<Vec<f64>> = mu
        .support()
        .iter()
        .map(|&x| {
            nu.support()
                .iter()
                .map(|&y| (x - y).abs().powf(alpha))
                .collect()
        })
        .collect();
    solve_transport(mu.weights(), nu.weights(), &cost)
}

/// `W_α`, through the CDF form when `α = 1` and the LP otherwise.
pub fn w_alpha(mu: &DiscreteMeasure, nu: &DiscreteMeasure, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        w1(mu, nu)
    } else {
        w_alpha_lp(mu, nu, alpha)
    }
}

/// Dual of the zero-potential transfer operator: each atom at `x` splits into
/// `k` atoms at `b_j(x)` carrying `1/k` of its weight.
pub fn pushforward(map: &MapSpec, mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let k = map.k();
    let mut atoms = Vec::with_capacity(mu.len() * k);
    for (&x, &w) in mu.support().iter().zip(mu.weights()) {
        for j in 0..k {
            atoms.push((map.try_branch(j, x)?, w / k as f64));
        }
    }
    DiscreteMeasure::from_atoms(atoms)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub alpha: f64,
    pub theta: f64,
    pub max_ratio: f64,
    pub pairs: usize,
    pub skipped: usize,
    pub seed: u64,
    pub pass: bool,
}

/// Random probability measure with 1 to `max_atoms` atoms in `[a, b]`.
pub fn random_measure(rng: &mut impl Rng, (a, b): (f64, f64), max_atoms: usize) -> DiscreteMeasure {
    let n = rng.gen_range(1..=max_atoms.max(1));
    let atoms: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(a..=b), rng.gen_range(0.05..1.0)))
        .collect();
    DiscreteMeasure::from_atoms(atoms)
        .and_then(|m| m.normalized())
        .expect("random atoms are valid")
}

/// Measures `max W_α(L₀*μ, L₀*ν) / W_α(μ, ν)` over `trials` random pairs of
/// discrete probabilities; pairs with `W_α(μ, ν) = 0` are skipped.
pub fn dual_contraction_check(
    map: &MapSpec,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<ContractionReport> {
    let theta = map.holder_theta(alpha).ok_or_else(|| {
        Error::Usage(format!(
            "map is not of class H(α, θ) for α = {alpha} (class {})",
            map.class_tag()
        ))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_ratio, mut pairs, mut skipped) = (0.0f64, 0, 0);
    for t in 0..trials {
        let (mu, nu) = if t % 10 == 0 {
            let x = rng.gen_range(map.domain().0..=map.domain().1);
            let y = rng.gen_range(map.domain().0..=map.domain().1);
            (DiscreteMeasure::dirac(x), DiscreteMeasure::dirac(y))
        } else {
            (
                random_measure(&mut rng, map.domain(), 8),
                random_measure(&mut rng, map.domain(), 8),
            )
        };
        let base = w_alpha(&mu, &nu, alpha)?;
        if base <= 1e-12 {
            skipped += 1;
            continue;
        }
        let pushed = w_alpha(&pushforward(map, &mu)?, &pushforward(map, &nu)?, alpha)?;
        max_ratio = max_ratio.max(pushed / base);
        pairs += 1;
    }
    Ok(ContractionReport {
        alpha,
        theta,
        max_ratio,
        pairs,
        skipped,
        seed,
        pass: max_ratio <= theta + EPS_NUM,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub w_alpha: f64,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
}

/// Weak Kantorovich duality: every candidate with `Hol_α(f) ≤ 1` satisfies
/// `|∫f dμ − ∫f dν| ≤ W_α(μ, ν)`. Candidates are evaluated through their
/// interpolants.
pub fn kantorovich_duality_check(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    alpha: f64,
    candidates: &[GridFunction],
) -> Result<DualityReport> {
    for (i, f) in candidates.iter().enumerate() {
        let h = holder_seminorm(f, alpha)?;
        if h > 1.0 + EPS_NUM {
            return Err(Error::Validation {
                message: format!("candidate {i} has Hölder seminorm {h} > 1"),
                witnesses: vec![i as f64],
            });
        }
    }
    let w = w_alpha_lp(mu, nu, alpha)?;
    let gaps: Vec<f64> = candidates
        .iter()
        .map(|f| (mu.integrate(|x| f.eval(x)) - nu.integrate(|x| f.eval(x))).abs())
        .collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    if max_gap > w + EPS_NUM {
        return Err(Error::InequalityViolated {
            what: "|∫f dμ − ∫f dν| ≤ W_α(μ, ν)".into(),
            lhs: max_gap,
            rhs: w,
        });
    }
    Ok(DualityReport {
        w_alpha: w,
        gaps,
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::{make_doubling, make_pomeau_manneville, DoublingVariant};
    use crate::regularity::Interp;

    fn m(atoms: &[(f64, f64)]) -> DiscreteMeasure {
        DiscreteMeasure::from_atoms(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn w1_examples() {
        let d = w1(&DiscreteMeasure::dirac(0.25), &DiscreteMeasure::dirac(0.75)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        let mu = m(&[(0.1, 0.3), (0.4, 0.7)]);
        assert_eq!(w1(&mu, &mu).unwrap(), 0.0);
        let half = m(&[(0.0, 0.5), (0.5, 0.5)]);
        let d = w1(&half, &DiscreteMeasure::dirac(0.25)).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
        assert!(
            (w_alpha_lp(&half, &DiscreteMeasure::dirac(0.25), 1.0).unwrap() - 0.25).abs() < 1e-15
        );
        let heavy = m(&[(0.0, 2.0)]);
        assert!(matches!(w1(&heavy, &half), Err(Error::Domain(_))));
    }

    #[test]
    fn w_alpha_examples() {
        let d = w_alpha_lp(
            &DiscreteMeasure::dirac(0.2),
            &DiscreteMeasure::dirac(0.6),
            0.5,
        )
        .unwrap();
        assert!((d - 0.4f64.sqrt()).abs() < 1e-15);
        // two extremal couplings: straight (√0.1) and crossed (√0.9)
        let mu = m(&[(0.0, 0.5), (1.0, 0.5)]);
        let nu = m(&[(0.1, 0.5), (0.9, 0.5)]);
        let straight = 0.5 * (0.1f64.sqrt() + 0.1f64.sqrt());
        let crossed = 0.5 * (0.9f64.sqrt() + 0.9f64.sqrt());
        let d = w_alpha_lp(&mu, &nu, 0.5).unwrap();
        assert!((d - straight.min(crossed)).abs() < 1e-15);
    }

    #[test]
    fn concave_cost_prefers_non_monotone_plan() {
        // with a concave cost, shared mass stays put and the rest travels far
        let mu = m(&[(0.0, 0.5), (0.5, 0.5)]);
        let nu = m(&[(0.5, 0.5), (1.0, 0.5)]);
        let plan = w_alpha_plan(&mu, &nu, 0.25).unwrap();
        let monotone = 0.5 * 0.5f64.powf(0.25) * 2.0;
        let crossed = 0.5 * 1.0;
        assert!((plan.cost - crossed).abs() < 1e-15, "{plan:?}");
        assert!(plan.cost < monotone);
        assert!(plan.dual_gap < 1e-12);
    }

    #[test]
    fn lp_rejects_oversized_supports() {
        let big = DiscreteMeasure::from_atoms((0..201).map(|i| (i as f64, 1.0))).unwrap();
        assert!(matches!(
            w_alpha_lp(&big, &big, 0.5),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn pushforward_tent_diracs() {
        let tent = make_doubling(DoublingVariant::Tent);
        let p0 = pushforward(&tent, &DiscreteMeasure::dirac(0.0)).unwrap();
        assert_eq!(p0.support(), &[0.0, 1.0]);
        let p1 = pushforward(&tent, &DiscreteMeasure::dirac(1.0)).unwrap();
        assert_eq!(p1.support(), &[0.5]);
        assert_eq!(p1.weights(), &[1.0]);
        let ratio = w1(&p0, &p1).unwrap()
            / w1(&DiscreteMeasure::dirac(0.0), &DiscreteMeasure::dirac(1.0)).unwrap();
        assert_eq!(ratio, 0.5);
    }

    #[test]
    fn dual_contraction_reports() {
        let pm = make_pomeau_manneville(1.0).unwrap();
        let r = dual_contraction_check(&pm, 1.0, 100, 3).unwrap();
        assert!(r.pass && r.max_ratio <= 0.75 + 1e-9, "{r:?}");
        let r = dual_contraction_check(&pm, 0.5, 30, 3).unwrap();
        assert!(r.pass, "{r:?}");
        let tent = make_doubling(DoublingVariant::Tent);
        let r = dual_contraction_check(&tent, 1.0, 100, 5).unwrap();
        assert!(r.max_ratio <= 0.5 + 1e-9);
    }

    #[test]
    fn duality_examples() {
        let (d0, d1) = (DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0));
        let id = GridFunction::sample((0.0, 1.0), 11, Interp::PiecewiseLinear, |x| x).unwrap();
        let c = GridFunction::constant((0.0, 1.0), 11, Interp::PiecewiseLinear, 4.0).unwrap();
        let r = kantorovich_duality_check(&d0, &d1, 1.0, &[id.clone(), c]).unwrap();
        assert!((r.gaps[0] - 1.0).abs() < 1e-15);
        assert_eq!(r.gaps[1], 0.0);
        assert!((r.w_alpha - 1.0).abs() < 1e-15);
        let steep = id.map(|v| 2.0 * v).unwrap();
        match kantorovich_duality_check(&d0, &d1, 1.0, &[id, steep]) {
            Err(Error::Validation { witnesses, .. }) => assert_eq!(witnesses, vec![1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn measure_csv_round_trip() {
        let mu = m(&[(0.1, 0.25), (0.7, 0.75)]);
        let mut buf = Vec::new();
        mu.write_csv(&mut buf).unwrap();
        assert_eq!(DiscreteMeasure::read_csv(buf.as_slice()).unwrap(), mu);
    }
}
