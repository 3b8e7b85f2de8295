//! `gapcert`: certify spectral gaps of transfer operators and run the
//! numerical checks behind the certificates.
//!
//! Exit codes: 0 success or certified, 2 not certified or a failed check,
//! 1 any error.

mod function_spec;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gapcert_core::certification::{
    bvp_threshold, certify, doeblin_fortet_gap, holder_threshold, perturbation_radius,
    projection_norm_bound,
};
use gapcert_core::interval_maps::{estimate_theta, MapConfig, MapSpec};
use gapcert_core::optimal_transport::dual_contraction_check;
use gapcert_core::regularity::{seminorm, Space};
use gapcert_core::transfer_op::{
    assemble, correlation_sequence, eigendata_with, lasota_yorke_check, Basis, MAX_ITER,
};
use gapcert_core::{Error, Result, Tolerances};
use serde::Serialize;
use serde_json::json;

use function_spec::FunctionSpec;
use report::{emit, Format, Report, Table, VERSION};

const DEFAULT_SEED: u64 = 20_240_601;
const THETA_SAMPLES: usize = 2000;

#[derive(Parser)]
#[command(name = "gapcert", version = VERSION, about = "Spectral gap certificates for transfer operators of interval maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Clone)]
struct Numerics {
    /// Number of grid nodes.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Residual target of the power iterations.
    #[arg(long)]
    eps_eig: Option<f64>,
    /// Slack between discretized and continuum bounds.
    #[arg(long)]
    tol_disc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    Linear,
    Constant,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Linear => Basis::PiecewiseLinear,
            BasisArg::Constant => Basis::PiecewiseConstant,
        }
    }
}

fn parse_space(s: &str) -> std::result::Result<Space, String> {
    s.parse::<Space>().map_err(|e| e.to_string())
}

fn parse_function(s: &str) -> std::result::Result<FunctionSpec, String> {
    s.parse::<FunctionSpec>().map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Certify a spectral gap for a potential with a bounded seminorm.
    Certify {
        /// Map configuration (JSON).
        #[arg(long)]
        map: PathBuf,
        /// Potential; its grid seminorm is used when no bound is declared.
        #[arg(long, value_parser = parse_function)]
        potential: Option<FunctionSpec>,
        /// `hol:α` or `bvp:p`.
        #[arg(long, value_parser = parse_space, default_value = "hol:1")]
        space: Space,
        /// Declared seminorm bound of the potential.
        #[arg(long)]
        seminorm_bound: Option<f64>,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        output: Output,
    },
    /// Leading eigendata of the discretized operator.
    Spectrum {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_function, default_value = "const:0")]
        potential: FunctionSpec,
        #[arg(long, value_enum, default_value_t = BasisArg::Linear)]
        basis: BasisArg,
        /// Dense matrix dump: binary when the path ends in `.bin`, CSV otherwise.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        output: Output,
    },
    /// Correlation sequence `C_n` of two observables under the RPF measure.
    Correlations {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_function, default_value = "const:0")]
        potential: FunctionSpec,
        #[arg(long, value_parser = parse_function)]
        f: FunctionSpec,
        #[arg(long, value_parser = parse_function)]
        g: FunctionSpec,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = BasisArg::Linear)]
        basis: BasisArg,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        output: Output,
    },
    /// Seminorm contraction of the zero-potential operator on random functions.
    CheckLy {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_space, default_value = "hol:1")]
        space: Space,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        numerics: Numerics,
        #[command(flatten)]
        output: Output,
    },
    /// Wasserstein contraction of the dual operator on random measure pairs.
    CheckTransport {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Recompute the headline thresholds and their intermediate constants.
    ReproduceConstants {
        #[command(flatten)]
        output: Output,
    },
}

fn tolerances(numerics: &Numerics) -> Result<Tolerances> {
    let mut t = Tolerances::default();
    if let Some(e) = numerics.eps_eig {
        t.eps_eig = e;
    }
    if let Some(d) = numerics.tol_disc {
        t.tol_disc = d;
    }
    t.check()?;
    if numerics.grid < 3 {
        return Err(Error::Usage(format!(
            "--grid must be at least 3, got {}",
            numerics.grid
        )));
    }
    Ok(t)
}

fn load_map(path: &Path) -> Result<(MapConfig, MapSpec)> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let cfg: MapConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let map =
        MapSpec::from_config(&cfg).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok((cfg, map))
}

fn interp_for(space: Space) -> Basis {
    match space {
        Space::Holder { .. } => Basis::PiecewiseLinear,
        Space::Variation { .. } => Basis::PiecewiseConstant,
    }
}

fn warn(warnings: &mut Vec<String>, message: String) {
    eprintln!("warning: {message}");
    warnings.push(message);
}

#[derive(Serialize)]
struct CertifyResult {
    certificate: gapcert_core::certification::Certificate,
    grid_seminorm: Option<f64>,
    estimated_theta: Option<f64>,
}

fn run_certify(
    map_path: &Path,
    potential: Option<&FunctionSpec>,
    space: Space,
    seminorm_bound: Option<f64>,
    numerics: &Numerics,
    output: &Output,
) -> Result<u8> {
    let tol = tolerances(numerics)?;
    space.check()?;
    let (cfg, map) = load_map(map_path)?;
    let mut warnings = Vec::new();
    let grid_seminorm = potential
        .map(|p| {
            let phi = p.grid_function(map.domain(), numerics.grid, interp_for(space).interp())?;
            seminorm(&phi, space)
        })
        .transpose()?;
    let bound = match (seminorm_bound, grid_seminorm) {
        (Some(b), Some(g)) => {
            if g > b * (1.0 + 1e-12) {
                warn(
                    &mut warnings,
                    format!("grid seminorm {g} of the potential exceeds the declared bound {b}"),
                );
            }
            b
        }
        (Some(b), None) => b,
        (None, Some(g)) => g,
        (None, None) => {
            return Err(Error::Usage(
                "certify needs --potential or --seminorm-bound".into(),
            ));
        }
    };
    let estimated_theta = match (space, cfg.theta) {
        (Space::Holder { alpha }, Some(declared)) => {
            let est = estimate_theta(&map, alpha, THETA_SAMPLES, numerics.seed)?;
            if est > declared + tol.eps_num {
                return Err(Error::Validation {
                    message: format!(
                        "declared θ = {declared} is below the sampled contraction {est}"
                    ),
                    witnesses: vec![est],
                });
            }
            Some(est)
        }
        _ => None,
    };
    let certificate = certify(&map, space, bound)?;
    let code = if certificate.is_certified() { 0 } else { 2 };
    let config = json!({
        "map": cfg,
        "potential": potential.map(FunctionSpec::describe),
        "space": space.to_string(),
        "seminorm_bound": seminorm_bound,
        "grid": numerics.grid,
    });
    let mut report = Report::new(
        "certify",
        Some(numerics.seed),
        tol,
        config,
        CertifyResult {
            certificate,
            grid_seminorm,
            estimated_theta,
        },
    );
    report.warnings = warnings;
    emit(&report, None, output.format, output.out.as_deref())?;
    Ok(code)
}

#[derive(Serialize)]
struct SpectrumResult {
    basis: Basis,
    lambda: f64,
    subdominant: f64,
    ratio: f64,
    residuals: (f64, f64),
    iterations: usize,
}

fn run_spectrum(
    map_path: &Path,
    potential: &FunctionSpec,
    basis: Basis,
    matrix_out: Option<&Path>,
    numerics: &Numerics,
    output: &Output,
) -> Result<u8> {
    let tol = tolerances(numerics)?;
    let (cfg, map) = load_map(map_path)?;
    let phi = potential.grid_function(map.domain(), numerics.grid, basis.interp())?;
    let op = assemble(&map, &phi, numerics.grid, basis)?;
    if let Some(path) = matrix_out {
        let file = fs::File::create(path)?;
        if path.extension().is_some_and(|e| e == "bin") {
            op.write_dense_binary(std::io::BufWriter::new(file))?;
        } else {
            op.write_dense_csv(file)?;
        }
    }
    let sd = eigendata_with(&op, tol.eps_eig, MAX_ITER)?;
    let s = sd.summary();
    let table = Table {
        header: ["x", "h", "nu", "mu"].map(String::from).to_vec(),
        rows: op
            .grid()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                vec![
                    x.to_string(),
                    sd.h.values()[i].to_string(),
                    sd.nu.weights()[i].to_string(),
                    sd.mu.weights()[i].to_string(),
                ]
            })
            .collect(),
    };
    let config = json!({
        "map": cfg,
        "potential": potential.describe(),
        "grid": numerics.grid,
        "basis": basis,
    });
    let report = Report::new(
        "spectrum",
        Some(numerics.seed),
        tol,
        config,
        SpectrumResult {
            basis,
            lambda: s.lambda,
            subdominant: s.subdominant,
            ratio: s.ratio,
            residuals: s.residuals,
            iterations: s.iterations,
        },
    );
    emit(&report, Some(table), output.format, output.out.as_deref())?;
    Ok(0)
}

#[derive(Serialize)]
struct CorrelationResult {
    lambda: f64,
    subdominant_ratio: f64,
    values: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_correlations(
    map_path: &Path,
    potential: &FunctionSpec,
    f: &FunctionSpec,
    g: &FunctionSpec,
    n_max: usize,
    basis: Basis,
    numerics: &Numerics,
    output: &Output,
) -> Result<u8> {
    let tol = tolerances(numerics)?;
    let (cfg, map) = load_map(map_path)?;
    let interp = basis.interp();
    let phi = potential.grid_function(map.domain(), numerics.grid, interp)?;
    let op = assemble(&map, &phi, numerics.grid, basis)?;
    let sd = eigendata_with(&op, tol.eps_eig, MAX_ITER)?;
    let fv = f.grid_function(map.domain(), numerics.grid, interp)?;
    let gv = g.grid_function(map.domain(), numerics.grid, interp)?;
    let values = correlation_sequence(&op, &sd, &fv, &gv, n_max)?;
    let table = Table {
        header: vec!["n".into(), "C_n".into()],
        rows: values
            .iter()
            .enumerate()
            .map(|(n, c)| vec![n.to_string(), c.to_string()])
            .collect(),
    };
    let config = json!({
        "map": cfg,
        "potential": potential.describe(),
        "f": f.describe(),
        "g": g.describe(),
        "n_max": n_max,
        "grid": numerics.grid,
        "basis": basis,
    });
    let report = Report::new(
        "correlations",
        Some(numerics.seed),
        tol,
        config,
        CorrelationResult {
            lambda: sd.lambda,
            subdominant_ratio: sd.subdominant_modulus / sd.lambda,
            values,
        },
    );
    emit(&report, Some(table), output.format, output.out.as_deref())?;
    Ok(0)
}

fn run_check_ly(
    map_path: &Path,
    space: Space,
    samples: usize,
    numerics: &Numerics,
    output: &Output,
) -> Result<u8> {
    let tol = tolerances(numerics)?;
    let (cfg, map) = load_map(map_path)?;
    let r = lasota_yorke_check(
        &map,
        space,
        samples,
        numerics.grid,
        numerics.seed,
        tol.tol_disc,
    )?;
    let code = if r.pass { 0 } else { 2 };
    let config = json!({
        "map": cfg,
        "space": space.to_string(),
        "samples": samples,
        "grid": numerics.grid,
    });
    emit(
        &Report::new("check-ly", Some(numerics.seed), tol, config, r),
        None,
        output.format,
        output.out.as_deref(),
    )?;
    Ok(code)
}

fn run_check_transport(
    map_path: &Path,
    alpha: f64,
    trials: usize,
    seed: u64,
    output: &Output,
) -> Result<u8> {
    let tol = Tolerances::default();
    let (cfg, map) = load_map(map_path)?;
    let r = dual_contraction_check(&map, alpha, trials, seed)?;
    let code = if r.pass { 0 } else { 2 };
    let config = json!({ "map": cfg, "alpha": alpha, "trials": trials });
    emit(
        &Report::new("check-transport", Some(seed), tol, config, r),
        None,
        output.format,
        output.out.as_deref(),
    )?;
    Ok(code)
}

#[derive(Serialize)]
struct ConstantLine {
    name: &'static str,
    value: f64,
    reference: f64,
    relation: &'static str,
    pass: bool,
}

fn line(name: &'static str, value: f64, reference: f64, relation: &'static str) -> ConstantLine {
    let pass = match relation {
        ">=" => value >= reference,
        "~2dp" => (value * 100.0).round() / 100.0 == reference,
        _ => (value - reference).abs() <= 1e-12,
    };
    ConstantLine {
        name,
        value,
        reference,
        relation,
        pass,
    }
}

fn run_reproduce_constants(output: &Output) -> Result<u8> {
    let pi = projection_norm_bound(1.0)?;
    let delta0_h = doeblin_fortet_gap(0.75, 1.0)?;
    let delta0_v = doeblin_fortet_gap(0.5, 1.0)?;
    let lines = vec![
        line("delta0 for theta = 3/4", delta0_h, 1.0 / 7.0, "=="),
        line("delta0 for theta = 1/2", delta0_v, 1.0 / 3.0, "=="),
        line("projection norm bound", pi, 4.0 / 3.0, "=="),
        line(
            "radius at delta = 0, theta = 3/4",
            perturbation_radius(delta0_h, 0.0, 1.0, pi)?,
            1.0 / 448.0,
            "==",
        ),
        line(
            "radius at delta = 0, theta = 1/2",
            perturbation_radius(delta0_v, 0.0, 1.0, pi)?,
            1.0 / 96.0,
            "==",
        ),
        line(
            "Lipschitz threshold",
            holder_threshold(1.0, 0.75, 1.0)?,
            0.0014,
            ">=",
        ),
        line(
            "total variation threshold",
            bvp_threshold(2, 1.0)?,
            0.0069,
            ">=",
        ),
        line(
            "BV_1 threshold as k grows",
            2.0 / 3.0 * (1.0f64 / 16.0).ln_1p(),
            0.04,
            "~2dp",
        ),
        line(
            "BV_1 threshold at k = 10^6",
            bvp_threshold(1_000_000, 1.0)?,
            0.04,
            "~2dp",
        ),
    ];
    for l in &lines {
        eprintln!(
            "{} {}: {:.10} {} {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.value,
            l.relation,
            l.reference
        );
    }
    let code = if lines.iter().all(|l| l.pass) { 0 } else { 2 };
    let table = Table {
        header: ["name", "value", "relation", "reference", "pass"]
            .map(String::from)
            .to_vec(),
        rows: lines
            .iter()
            .map(|l| {
                vec![
                    l.name.to_string(),
                    l.value.to_string(),
                    l.relation.to_string(),
                    l.reference.to_string(),
                    l.pass.to_string(),
                ]
            })
            .collect(),
    };
    let report = Report::new(
        "reproduce-constants",
        None,
        Tolerances::default(),
        json!({}),
        lines,
    );
    emit(&report, Some(table), output.format, output.out.as_deref())?;
    Ok(code)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GAPCERT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Usage(format!(
            "GAPCERT_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Capability(e.to_string()))
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Certify {
            map,
            potential,
            space,
            seminorm_bound,
            numerics,
            output,
        } => run_certify(
            &map,
            potential.as_ref(),
            space,
            seminorm_bound,
            &numerics,
            &output,
        ),
        Command::Spectrum {
            map,
            potential,
            basis,
            matrix_out,
            numerics,
            output,
        } => run_spectrum(
            &map,
            &potential,
            basis.into(),
            matrix_out.as_deref(),
            &numerics,
            &output,
        ),
        Command::Correlations {
            map,
            potential,
            f,
            g,
            n_max,
            basis,
            numerics,
            output,
        } => run_correlations(
            &map,
            &potential,
            &f,
            &g,
            n_max,
            basis.into(),
            &numerics,
            &output,
        ),
        Command::CheckLy {
            map,
            space,
            samples,
            numerics,
            output,
        } => run_check_ly(&map, space, samples, &numerics, &output),
        Command::CheckTransport {
            map,
            alpha,
            trials,
            seed,
            output,
        } => run_check_transport(&map, alpha, trials, seed, &output),
        Command::ReproduceConstants { output } => run_reproduce_constants(&output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are tool failures, not "not certified"
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
