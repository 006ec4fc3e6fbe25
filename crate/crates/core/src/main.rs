use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use hele_shaw_stability::audit::{
    boundedness_grid, extension_audit, full_audit, reference_checks, AuditDocument,
    BoundednessCase, ClaimReport, ClaimStatus,
};
use hele_shaw_stability::dispersion::{
    assign_branches, solve_sigma, Coefficient, DispersionError, RootLevel,
};
use hele_shaw_stability::model::ParamsCandidate;
use hele_shaw_stability::sweep::{emit_plots, parse_config, run_sweep, to_csv, to_json, RunConfig};

#[derive(Parser)]
#[command(
    name = "hs-stability",
    version,
    about = "Three-layer Hele-Shaw stability: roots, sweeps and audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a wavenumber sweep and write the configured CSV, JSON and SVG outputs.
    Sweep { config: PathBuf },
    /// Run every claim check and write the JSON report.
    Audit { config: PathBuf },
    /// Check the boundedness cases and the layer-width growth with built-in parameters.
    VerifyPaper {
        /// Also write the report, per-case sweeps and plots here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the roots at a single wavenumber.
    Roots {
        config: Option<PathBuf>,
        #[arg(long)]
        k: f64,
    },
}

/// Exit 2: bad invocation or configuration. Exit 1: computation or output failure.
enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Failure::Compute(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn ensure_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Failure::Compute(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    ensure_parent(path)?;
    fs::write(path, contents).map_err(|e| Failure::Compute(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn print_table(reports: &[ClaimReport]) {
    let width = reports.iter().map(|r| r.claim_id.len()).max().unwrap_or(0);
    for r in reports {
        let status = match r.status {
            ClaimStatus::Confirmed => "confirmed",
            ClaimStatus::Violated => "VIOLATED",
            ClaimStatus::Inconclusive => "inconclusive",
        };
        println!("{:<width$}  {:<12}  {}", r.claim_id, status, r.narrative);
    }
}

fn sweep(path: &Path) -> Result<bool, Failure> {
    let config = load_config(path)?;
    let result = run_sweep(&config).map_err(|e| Failure::Compute(e.to_string()))?;
    let outputs = &config.outputs;
    if outputs.csv.is_none()
        && outputs.json.is_none()
        && outputs.svg_dispersion.is_none()
        && outputs.svg_boundedness.is_none()
    {
        print!("{}", to_csv(&result));
        return Ok(true);
    }
    if let Some(p) = &outputs.csv {
        write(p, &to_csv(&result))?;
    }
    if let Some(p) = &outputs.json {
        write(p, &to_json(&result))?;
    }
    for p in [&outputs.svg_dispersion, &outputs.svg_boundedness]
        .into_iter()
        .flatten()
    {
        ensure_parent(p)?;
    }
    emit_plots(&result, &[], &config)
        .map_err(|e| Failure::Compute(format!("writing plots: {e}")))?;
    for p in [&outputs.svg_dispersion, &outputs.svg_boundedness]
        .into_iter()
        .flatten()
    {
        println!("wrote {}", p.display());
    }
    Ok(true)
}

fn audit(path: &Path) -> Result<bool, Failure> {
    let config = load_config(path)?;
    let audit_config = config
        .audit_config()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let reports =
        full_audit(&config.params, &audit_config).map_err(|e| Failure::Usage(e.to_string()))?;
    let doc = AuditDocument::new(reports, extension_audit(&config.params, &audit_config));
    print_table(&doc.reports);
    if !doc.extensions.is_empty() {
        println!("extensions (not counted):");
        print_table(&doc.extensions);
    }
    if let Some(p) = &config.outputs.report {
        write(p, &doc.to_json())?;
    }
    Ok(!doc.any_violated())
}

/// Config text for one boundedness case, so its outputs carry a config hash.
fn case_config_text(case: BoundednessCase) -> String {
    let g = case.geometry();
    let params = ParamsCandidate {
        a: g.a,
        b: g.b,
        ..ParamsCandidate::DEFAULT
    };
    let grid = boundedness_grid(&params.validate().expect("built-in geometry is valid"));
    let (kind, param) = (case.rule().kind(), case.rule().parameter());
    let mut text = format!(
        "# {}\nmu_L = {}\nmu = {}\nmu_R = {}\nU = {}\nT_a = {}\nT_b = {}\na = {}\nb = {}\nk_min = {}\nk_max = {}\nk_count = {}\nk_spacing = linear\nnormalization = {kind}\nbranch = A\n",
        case.claim_id(),
        params.mu_l,
        params.mu,
        params.mu_r,
        params.u,
        params.t_a,
        params.t_b,
        params.a,
        params.b,
        grid.min(),
        grid.max(),
        grid.count(),
    );
    if let Some(p) = param {
        text.push_str(&format!("normalization_param = {p}\n"));
    }
    text
}

fn verify(out_dir: Option<&Path>) -> Result<bool, Failure> {
    let reports = reference_checks();
    for r in &reports {
        let mark = if r.status == ClaimStatus::Confirmed {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{mark}  {:<32}  {}", r.claim_id, r.narrative);
    }
    let all_confirmed = reports.iter().all(|r| r.status == ClaimStatus::Confirmed);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::Compute(format!("{}: {e}", dir.display())))?;
        for case in BoundednessCase::ALL {
            let text = case_config_text(case);
            let config = parse_config(&text).map_err(|e| Failure::Compute(e.to_string()))?;
            let result = run_sweep(&config).map_err(|e| Failure::Compute(e.to_string()))?;
            let case_reports: Vec<ClaimReport> = reports
                .iter()
                .filter(|r| r.claim_id == case.claim_id())
                .cloned()
                .collect();
            write(&dir.join(format!("{}.conf", case.claim_id())), &text)?;
            write(
                &dir.join(format!("{}.csv", case.claim_id())),
                &to_csv(&result),
            )?;
            write(
                &dir.join(format!("{}.svg", case.claim_id())),
                &hele_shaw_stability::sweep::render_boundedness(
                    &result,
                    config.branch.primary(),
                    config.tolerances.fit_window_fraction,
                    &case_reports,
                ),
            )?;
        }
        write(
            &dir.join("report.json"),
            &AuditDocument::new(reports, Vec::new()).to_json(),
        )?;
    }
    Ok(all_confirmed)
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.12e}", z.re)
    } else {
        format!("{:.12e}{:+.12e}i", z.re, z.im)
    }
}

fn roots(path: Option<&Path>, k: f64) -> Result<bool, Failure> {
    let params = match path {
        Some(p) => load_config(p)?.params,
        None => ParamsCandidate::DEFAULT
            .validate()
            .expect("defaults are valid"),
    };
    let found = match solve_sigma(&params, k) {
        Ok(found) => found,
        Err(DispersionError::NoEigenvalue { .. }) => {
            println!("no eigenvalue at k={k}");
            return Ok(true);
        }
        Err(e @ DispersionError::InvalidWavenumber(_)) => {
            return Err(Failure::Usage(e.to_string()))
        }
        Err(e) => return Err(Failure::Compute(e.to_string())),
    };
    let level = RootLevel { k, roots: found };
    let labelled = assign_branches(&params, vec![level.clone()]).unwrap_or_else(|_| vec![level]);
    for root in &labelled[0].roots {
        let label = root
            .branch()
            .map_or("unlabelled".to_string(), |b| b.to_string());
        let p = root.point();
        println!(
            "{label}: sigma = {} s = {} residual = {:.3e}{}",
            complex(root.sigma()),
            complex(root.s()),
            root.residual(),
            if root.degenerate() {
                " (degenerate)"
            } else {
                ""
            }
        );
        let coefs: Vec<String> = Coefficient::ALL
            .iter()
            .map(|&w| format!("{} = {}", w.name(), complex(p.coefficient(w).to_complex())))
            .collect();
        println!("    {}", coefs.join("  "));
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sweep { config } => sweep(config),
        Command::Audit { config } => audit(config),
        Command::VerifyPaper { out_dir } => verify(out_dir.as_deref()),
        Command::Roots { config, k } => roots(config.as_deref(), *k),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => f.report(),
    }
}
