//! Command-line front end: system-description ingestion, deterministic CSV
//! and JSON-lines emission, and exit codes that make invariant violations
//! machine-detectable.
//!
//! Exit codes: 0 success, 1 input error (parsing or validation, with the
//! offending field named), 2 mathematical-invariant violation (for example
//! a variational margin below -1e-9). Identical inputs and seeds produce
//! byte-identical artifacts; all computation is sequential.

pub mod bundled;
pub mod table;

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, ValueEnum};
use subpress_core::measure::{cover_entropy, entropy_rate, joined_partition_entropy, OptMode};
use subpress_core::potential::check_conditions;
use subpress_core::pressure::{pressure_limit, topological_entropy};
use subpress_core::space::Partition;
use subpress_core::subadd::{check_properties, ow_limit, DeclaredProperties, SetFunction};
use subpress_core::system::SystemDescription;
use subpress_core::variational::{
    equilibrium_candidate, maximize_over_bernoulli, maximize_over_markov, verify_variational_bound,
};
use subpress_core::Budgets;

use table::ConvergenceTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    /// Normalized pressure of the potential relative to the cover.
    Pressure,
    /// Pressure of the zero potential (topological entropy).
    Entropy,
    /// Variational maximization and the margin report.
    Vp,
    /// Sampled verification of the potential conditions.
    CheckPotential,
    /// Ornstein-Weiss report for F -> H_mu(alpha_F).
    Ow,
    /// Finite-n equilibrium candidate marginals.
    Equilibrium,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Greedy,
}

impl From<ModeArg> for OptMode {
    fn from(m: ModeArg) -> OptMode {
        match m {
            ModeArg::Exact => OptMode::Exact,
            ModeArg::Greedy => OptMode::Greedy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Bernoulli,
    Markov,
}

/// One fully validated job; defaults are documented and stable.
#[derive(Parser, Debug)]
#[command(
    name = "subpress",
    about = "Pressure, entropies and variational checks for Z^d shift systems"
)]
pub struct JobSpec {
    /// System-description JSON file.
    #[arg(long)]
    pub system: PathBuf,
    /// What to compute.
    #[arg(long, value_enum)]
    pub command: CommandKind,
    /// Largest Følner box side.
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    /// Seed for every randomized subroutine.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Assignment optimizer mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Output directory for CSV / JSON artifacts.
    #[arg(long)]
    pub out: PathBuf,
    /// Margin tolerance for invariant checks.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Named cover from the system file.
    #[arg(long, default_value = "standard")]
    pub cover: String,
    /// Named measure (ow command; defaults to the first in the file).
    #[arg(long)]
    pub measure: Option<String>,
    /// Measure family for the vp command.
    #[arg(long, value_enum, default_value_t = FamilyArg::Bernoulli)]
    pub family: FamilyArg,
    /// Random restarts for the vp command.
    #[arg(long, default_value_t = 2)]
    pub restarts: u32,
    /// Box cap for entropy terms inside the vp objective.
    #[arg(long, default_value_t = 3)]
    pub n_entropy: u32,
    /// Sample count for check-potential.
    #[arg(long, default_value_t = 500)]
    pub samples: u32,
}

/// Runs a job; returns the process exit code.
pub fn run(job: &JobSpec) -> i32 {
    match execute(job) {
        Ok(violation) => {
            if violation {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(job: &JobSpec) -> Result<bool> {
    if job.n_max == 0 {
        return Err(anyhow!("--n-max must be >= 1"));
    }
    if job.tolerance.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(anyhow!("--tolerance must be positive"));
    }
    let text = fs::read_to_string(&job.system)
        .with_context(|| format!("reading {}", job.system.display()))?;
    let doc = SystemDescription::from_json(&text)?;
    let space = doc.build_space()?;
    let budgets = Budgets::roomy();
    fs::create_dir_all(&job.out).with_context(|| format!("creating {}", job.out.display()))?;

    let mut violation = false;
    match job.command {
        CommandKind::Pressure => {
            let cover = doc.build_cover(&space, &job.cover, &budgets)?;
            let potential = doc.build_potential()?;
            let report = pressure_limit(
                &space,
                &potential,
                &cover,
                job.n_max,
                job.mode.into(),
                &budgets,
            )?;
            write_table(job, "pressure.csv", ConvergenceTable::Pressure(&report))?;
            let mut lines = Vec::new();
            for (row, term) in report.rows.iter().zip(report.terms.iter()) {
                lines.push(format!(
                    "{{\"n\":{},\"row\":{},\"term\":{}}}",
                    row.n,
                    serde_json::to_string(row)?,
                    serde_json::to_string(term)?
                ));
            }
            fs::write(
                job.out.join("pressure_terms.jsonl"),
                lines.join("\n") + "\n",
            )?;
            println!("pressure estimate: {:.12e}", report.estimate);
        }
        CommandKind::Entropy => {
            let cover = doc.build_cover(&space, &job.cover, &budgets)?;
            let report = topological_entropy(&space, &cover, job.n_max, &budgets)?;
            write_table(job, "entropy.csv", ConvergenceTable::Pressure(&report))?;
            println!("entropy estimate: {:.12e}", report.estimate);
        }
        CommandKind::Vp => {
            let cover = doc.build_cover(&space, &job.cover, &budgets)?;
            let potential = doc.build_potential()?;
            let result = match job.family {
                FamilyArg::Bernoulli => maximize_over_bernoulli(
                    &space,
                    &potential,
                    &cover,
                    job.n_entropy,
                    job.n_max,
                    job.restarts,
                    job.seed,
                    &budgets,
                )?,
                FamilyArg::Markov => maximize_over_markov(
                    &space,
                    &potential,
                    &cover,
                    job.n_entropy,
                    job.n_max,
                    job.restarts,
                    job.seed,
                    &budgets,
                )?,
            };
            fs::write(
                job.out.join("vp.json"),
                serde_json::to_string_pretty(&result)? + "\n",
            )?;
            if result.gap < -job.tolerance {
                violation = true;
            }
            // Margins for every measure named in the file.
            let names = doc.measure_names();
            if !names.is_empty() {
                let measures: Vec<_> = names
                    .iter()
                    .map(|n| doc.build_measure(n))
                    .collect::<subpress_core::Result<_>>()?;
                let report = verify_variational_bound(
                    &space,
                    &potential,
                    &cover,
                    &measures,
                    job.n_max.min(8),
                    &budgets,
                )?;
                let mut lines = Vec::new();
                for (name, row) in names.iter().zip(report.per_measure.iter()) {
                    lines.push(format!(
                        "{{\"measure\":{},\"row\":{}}}",
                        serde_json::to_string(name)?,
                        serde_json::to_string(row)?
                    ));
                }
                fs::write(job.out.join("margins.jsonl"), lines.join("\n") + "\n")?;
                if report.min_margin < -job.tolerance {
                    violation = true;
                }
            }
            println!(
                "vp best value: {:.12e} (gap {:.3e})",
                result.best_value, result.gap
            );
        }
        CommandKind::CheckPotential => {
            let potential = doc.build_potential()?;
            let report = check_conditions(&space, &potential, job.samples, job.seed, &budgets)?;
            let mut lines = Vec::new();
            lines.push(format!(
                "{{\"condition\":\"C1\",\"verdict\":{},\"max_violation\":{:e},\"seed\":{}}}",
                report.c1_pass, report.c1_max_violation, report.seed
            ));
            lines.push(format!(
                "{{\"condition\":\"C2\",\"verdict\":{},\"max_deviation\":{:e},\"seed\":{}}}",
                report.c2_pass, report.c2_max_deviation, report.seed
            ));
            lines.push(format!(
                "{{\"condition\":\"C3\",\"verdict\":{},\"empirical_sup\":{:e},\"certified_bound\":{},\"seed\":{}}}",
                report.c3_pass,
                report.c3_empirical_sup,
                report
                    .c3_certified_bound
                    .map(|b| format!("{b:e}"))
                    .unwrap_or_else(|| "null".into()),
                report.seed
            ));
            if let (Some(v), Some(p)) = (report.strong_max_violation, report.strong_pass) {
                lines.push(format!(
                    "{{\"condition\":\"strong\",\"verdict\":{p},\"max_violation\":{v:e},\"seed\":{}}}",
                    report.seed
                ));
            }
            fs::write(job.out.join("conditions.jsonl"), lines.join("\n") + "\n")?;
            if !report.all_pass() {
                violation = true;
            }
            println!(
                "conditions: C1 {} C2 {} C3 {}",
                report.c1_pass, report.c2_pass, report.c3_pass
            );
        }
        CommandKind::Ow => {
            let cover = doc.build_cover(&space, &job.cover, &budgets)?;
            let alpha = Partition::try_new(&space, cover, &budgets).map_err(|e| {
                anyhow!(
                    "--cover {}: the ow command needs a partition: {e}",
                    job.cover
                )
            })?;
            let names = doc.measure_names();
            let name = match &job.measure {
                Some(n) => n.clone(),
                None => names
                    .first()
                    .ok_or_else(|| anyhow!("system file declares no measures"))?
                    .to_string(),
            };
            let mu = doc.build_measure(&name)?;
            // F -> H_mu(alpha_F) as a set function; the declaration is
            // sample-checked and its report shipped alongside.
            let f = {
                let space = space.clone();
                let mu = mu.clone();
                let alpha = alpha.clone();
                let budgets = budgets.clone();
                SetFunction::new(space.dim(), DeclaredProperties::all(), move |e| {
                    joined_partition_entropy(&space, &mu, &alpha, e, &budgets)
                })
            };
            let properties = check_properties(&f, 32, 4, job.seed)?;
            let mut lines = Vec::new();
            for check in &properties.checks {
                lines.push(serde_json::to_string(check)?);
            }
            fs::write(job.out.join("ow_properties.jsonl"), lines.join("\n") + "\n")?;
            if !properties.all_pass() {
                violation = true;
            }
            let estimate = ow_limit(&f, job.n_max)?;
            write_table(job, "ow.csv", ConvergenceTable::Ow(&estimate))?;
            // The full entropy-rate report for the same pair.
            let report = entropy_rate(&space, &mu, &alpha, job.n_max, &budgets)?;
            write_table(job, "entropy_rate.csv", ConvergenceTable::Entropy(&report))?;
            println!("ow estimate: {:.12e}", estimate.limit_estimate);
        }
        CommandKind::Equilibrium => {
            let cover = doc.build_cover(&space, &job.cover, &budgets)?;
            let alpha = Partition::try_new(&space, cover, &budgets).map_err(|e| {
                anyhow!(
                    "--cover {}: the equilibrium command needs a partition: {e}",
                    job.cover
                )
            })?;
            let potential = doc.build_potential()?;
            let cand = equilibrium_candidate(&space, &potential, &alpha, job.n_max, &budgets)?;
            fs::write(
                job.out.join("equilibrium.json"),
                serde_json::to_string_pretty(&cand)? + "\n",
            )?;
            println!(
                "equilibrium candidate at n = {}: {} atoms",
                cand.n, cand.atom_count
            );
        }
    }
    Ok(violation)
}

fn write_table(job: &JobSpec, name: &str, table: ConvergenceTable<'_>) -> Result<()> {
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    fs::write(job.out.join(name), buf)?;
    Ok(())
}

/// Exposed so the cover-entropy command path stays testable without a
/// binary run.
pub fn cover_entropy_of(
    doc: &SystemDescription,
    cover_name: &str,
    measure_name: &str,
    mode: OptMode,
) -> Result<f64> {
    let budgets = Budgets::roomy();
    let space = doc.build_space()?;
    let cover = doc.build_cover(&space, cover_name, &budgets)?;
    let mu = doc.build_measure(measure_name)?;
    Ok(cover_entropy(&space, &mu, &cover, mode, &budgets)?.value)
}
