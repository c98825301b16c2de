//! Subcommand arguments and their execution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Subcommand;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use gowers_lab::config::{OutputFormat, RunConfig};
use gowers_lab::gowers::{dual_function, gowers_norm_with_tol, von_neumann_check};
use gowers_lab::io::{csv_float, FunctionJson};
use gowers_lab::levelset::{build_level_set_algebra, AlphaChoice, LevelSetOptions};
use gowers_lab::partition::{conditional_expectation, energy, Partition, PartitionJson};
use gowers_lab::recurrence::{
    empirical_c, find_k_ap_in_set, finite_rank_sample, greedy_net, recurrence_average, second_moment_audit, RRange,
    SearchMode,
};
use gowers_lab::structure::{decompose, trace_csv, StructureConfig, Threshold};
use gowers_lab::uap::{
    certify_dual, certify_quasiperiodic, certify_wiener, duality_audit, verify_certificate, CertificateJson,
    CertifiedFunction,
};
use gowers_lab::vdw::{bound_recursion, find_mono_ap, vdw_number, Colouring};
use gowers_lab::{Error, GroupFunction, Result};

use crate::Command;

#[derive(Subcommand, Debug)]
pub enum GowersCmd {
    /// `‖f‖_{U^d}`.
    Norm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        order: usize,
    },
    /// The dual function `D_d f`.
    Dual {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        order: usize,
    },
    /// `|E Π T^{λ_j r} f_j|` against `min ‖f_j‖_{U^{k−1}}`.
    Vnn {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambdas: Vec<i64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum UapCmd {
    /// Re-checks every node of a certificate.
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Certificate for the dual function of order `d`.
    Dual {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        order: usize,
    },
    /// `|⟨f, F⟩| ≤ ‖f‖_{U^{k−1}}·M` for a certified `F`.
    Audit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum PartitionCmd {
    /// Common refinement of two partitions.
    Join {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// `E(f|B)`.
    Condexp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// `Σ_j ‖E(f_j|B)‖²`.
    Energy {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        partition: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum LevelsetCmd {
    /// Level-set partition of a function at scale ε, offset chosen from the seed.
    Build {
        /// Certificate JSON, or a function JSON to be certified.
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        eps: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum StructureCmd {
    /// Splits `f` into uniform, structured and almost-periodic parts.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
        /// `default`, `<c>/M` or a constant.
        #[arg(long, default_value = "default")]
        threshold: String,
        /// Where to write the energy trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum RecurCmd {
    /// `E(Π_{j<k} f(x + μjr))` over `x` and the chosen differences.
    Average {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        mu: i64,
        #[arg(long, requires = "r_max")]
        r_min: Option<usize>,
        #[arg(long, requires = "r_min")]
        r_max: Option<usize>,
    },
    /// Minimum recurrence average over dense sets, one row per modulus.
    EmpiricalC {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
        /// Sample this many random sets instead of enumerating.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Least `k`-term progression inside a set of integers.
    FindAp {
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<usize>,
        #[arg(long)]
        k: usize,
    },
    /// Greedy θ-net of functions restricted to a set.
    Net {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        theta: f64,
        /// Residues to restrict to; all of Z_N by default.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<usize>>,
    },
    /// Monte Carlo sampling of a weighted column average.
    Sample {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        /// One weight per column; uniform by default.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        d: usize,
        /// Number of trials for the second-moment audit; a single sample if omitted.
        #[arg(long)]
        trials: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VdwCmd {
    /// Exact `W(k, m)` by backtracking up to `--max`.
    Number {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        max: usize,
    },
    /// Upper bound from the colour-focusing recursion.
    Bound {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
    /// Least monochromatic progression in a colouring.
    Check {
        #[arg(long)]
        colouring: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("cannot parse {}: {e}", path.display())))
}

fn read_function(path: &Path) -> Result<GroupFunction> {
    read_json::<FunctionJson>(path)?.to_function()
}

fn read_functions(paths: &[PathBuf]) -> Result<Vec<GroupFunction>> {
    paths.iter().map(|p| read_function(p)).collect()
}

fn read_partition(path: &Path) -> Result<Partition> {
    Partition::from_json(&read_json::<PartitionJson>(path)?)
}

/// A certificate file, or a function file certified on the spot.
fn read_certified(path: &Path, tol: f64) -> Result<CertifiedFunction> {
    let value: Value = read_json(path)?;
    if value.get("order").is_some() {
        let cert: CertificateJson =
            serde_json::from_value(value).map_err(|e| Error::Input(format!("cannot parse {}: {e}", path.display())))?;
        return cert.to_certified();
    }
    let func: FunctionJson =
        serde_json::from_value(value).map_err(|e| Error::Input(format!("cannot parse {}: {e}", path.display())))?;
    match &func {
        FunctionJson::Quasiperiodic { n, .. } => {
            certify_quasiperiodic(&gowers_lab::cyclic::quasiperiodic(*n, &func.terms()?)?)
        }
        _ => certify_wiener(&func.to_function()?, 1, tol),
    }
}

fn to_value<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).expect("reports serialize")
}

/// JSON report with the provenance fields merged in.
fn json_report(config: &RunConfig, command: &str, report: Value) -> String {
    let mut object = match report {
        Value::Object(map) => map,
        other => {
            let mut map = serde_json::Map::new();
            map.insert("value".into(), other);
            map
        }
    };
    let provenance = config.provenance();
    object.insert("command".into(), json!(command));
    object.insert("seed".into(), json!(provenance.seed));
    object.insert("version".into(), json!(provenance.version));
    object.insert("config_digest".into(), json!(provenance.config_digest));
    let mut text = serde_json::to_string_pretty(&Value::Object(object)).expect("reports serialize");
    text.push('\n');
    text
}

fn json_only(config: &RunConfig, command: &str) -> Result<()> {
    match config.format {
        OutputFormat::Json => Ok(()),
        OutputFormat::Csv => Err(Error::Mode(format!("`{command}` has no CSV output"))),
    }
}

fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn run(command: Command, config: &RunConfig) -> Result<String> {
    match command {
        Command::Gowers(cmd) => gowers(cmd, config),
        Command::Uap(cmd) => uap(cmd, config),
        Command::Partition(cmd) => partition(cmd, config),
        Command::Levelset(cmd) => levelset(cmd, config),
        Command::Structure(cmd) => structure(cmd, config),
        Command::Recur(cmd) => recur(cmd, config),
        Command::Vdw(cmd) => vdw(cmd, config),
    }
}

fn gowers(cmd: GowersCmd, config: &RunConfig) -> Result<String> {
    let tol = config.tol;
    match cmd {
        GowersCmd::Norm { input, order } => {
            json_only(config, "gowers norm")?;
            let f = read_function(&input)?;
            let norm = gowers_norm_with_tol(&f, order, tol)?;
            let report = json!({
                "value": norm.value,
                "witnesses": { "order": order, "power": complex_pair(norm.power) },
            });
            Ok(json_report(config, "gowers norm", report))
        }
        GowersCmd::Dual { input, order } => {
            json_only(config, "gowers dual")?;
            let f = read_function(&input)?;
            if !f.is_bounded(tol) {
                return Err(Error::Precondition("dual functions need |f| <= 1".into()));
            }
            let dual = dual_function(&f, order);
            let pairing = f.inner_product(&dual)?;
            let norm = gowers_norm_with_tol(&f, order, tol)?;
            let report = json!({
                "value": FunctionJson::from_function(&dual),
                "witnesses": {
                    "inner_product": complex_pair(pairing),
                    "norm_power": norm.value.powi(1 << order),
                },
            });
            Ok(json_report(config, "gowers dual", report))
        }
        GowersCmd::Vnn { inputs, lambdas } => {
            json_only(config, "gowers vnn")?;
            let fs = read_functions(&inputs)?;
            let r = von_neumann_check(&fs, &lambdas, tol)?;
            let report = json!({
                "value": r.lhs,
                "witnesses": { "bound": r.rhs, "norms": r.norms, "holds": r.holds },
            });
            Ok(json_report(config, "gowers vnn", report))
        }
    }
}

fn uap(cmd: UapCmd, config: &RunConfig) -> Result<String> {
    let tol = config.tol;
    match cmd {
        UapCmd::Verify { cert } => {
            json_only(config, "uap verify")?;
            let cf: CertificateJson = read_json(&cert)?;
            let cf = cf.to_certified()?;
            let report = verify_certificate(&cf, tol)?;
            let mut value = to_value(&report);
            value["order"] = json!(cf.order());
            value["M"] = json!(cf.bound());
            Ok(json_report(config, "uap verify", value))
        }
        UapCmd::Dual { input, order } => {
            json_only(config, "uap dual")?;
            let f = read_function(&input)?;
            let cf = certify_dual(&f, order, config.budgets.cert_nodes, tol)?;
            let report = json!({ "certificate": CertificateJson::from_certified(&cf) });
            Ok(json_report(config, "uap dual", report))
        }
        UapCmd::Audit { input, cert } => {
            json_only(config, "uap audit")?;
            let f = read_function(&input)?;
            let cf: CertificateJson = read_json(&cert)?;
            let report = duality_audit(&f, &cf.to_certified()?, tol)?;
            Ok(json_report(config, "uap audit", to_value(&report)))
        }
    }
}

fn partition(cmd: PartitionCmd, config: &RunConfig) -> Result<String> {
    match cmd {
        PartitionCmd::Join { a, b } => {
            json_only(config, "partition join")?;
            let joined = read_partition(&a)?.join(&read_partition(&b)?)?;
            Ok(json_report(config, "partition join", to_value(&joined.to_json())))
        }
        PartitionCmd::Condexp { input, partition } => {
            json_only(config, "partition condexp")?;
            let e = conditional_expectation(&read_function(&input)?, &read_partition(&partition)?)?;
            let report = json!({ "value": FunctionJson::from_function(&e) });
            Ok(json_report(config, "partition condexp", report))
        }
        PartitionCmd::Energy { inputs, partition } => {
            json_only(config, "partition energy")?;
            let e = energy(&read_functions(&inputs)?, &read_partition(&partition)?)?;
            Ok(json_report(config, "partition energy", to_value(&e)))
        }
    }
}

fn levelset(cmd: LevelsetCmd, config: &RunConfig) -> Result<String> {
    let LevelsetCmd::Build { g, eps } = cmd;
    json_only(config, "levelset build")?;
    let source = Arc::new(read_certified(&g, config.tol)?);
    let options = LevelSetOptions::default();
    let algebra = build_level_set_algebra(source, eps, AlphaChoice::Seeded(config.seed), &options)?;
    let report = json!({
        "partition": algebra.partition.to_json(),
        "diagnostics": algebra.diagnostics(&options),
    });
    Ok(json_report(config, "levelset build", report))
}

fn structure(cmd: StructureCmd, config: &RunConfig) -> Result<String> {
    let StructureCmd::Decompose {
        input,
        k,
        delta,
        threshold,
        trace,
    } = cmd;
    let f = read_function(&input)?;
    let structure_config = StructureConfig {
        threshold: threshold.parse::<Threshold>()?,
        seed: config.seed,
        tol: config.tol,
        driver_steps: config.budgets.driver_steps,
        cert_nodes: config.budgets.cert_nodes,
        poly_degree: usize::try_from(config.budgets.poly_degree).unwrap_or(usize::MAX),
        ..StructureConfig::default()
    };
    let d = decompose(&f, k, delta, &structure_config)?;
    let csv = trace_csv(&d.energy_trace);
    if let Some(path) = trace {
        std::fs::write(&path, &csv).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    match config.format {
        OutputFormat::Csv => Ok(csv),
        OutputFormat::Json => Ok(json_report(config, "structure decompose", to_value(&d.report(&f, config.tol)?))),
    }
}

fn recur(cmd: RecurCmd, config: &RunConfig) -> Result<String> {
    match cmd {
        RecurCmd::Average {
            input,
            k,
            mu,
            r_min,
            r_max,
        } => {
            json_only(config, "recur average")?;
            let range = match (r_min, r_max) {
                (Some(lo), Some(hi)) => RRange::Interval(lo, hi),
                _ => RRange::Full,
            };
            let report = recurrence_average(&read_function(&input)?, k, range, mu)?;
            Ok(json_report(config, "recur average", to_value(&report)))
        }
        RecurCmd::EmpiricalC { n, k, delta, samples } => {
            let mode = match samples {
                Some(samples) => SearchMode::Random {
                    samples,
                    seed: config.seed,
                },
                None => SearchMode::Exhaustive,
            };
            let rows = n
                .iter()
                .map(|&n| empirical_c(k, delta, n, mode))
                .collect::<Result<Vec<_>>>()?;
            match config.format {
                OutputFormat::Csv => {
                    let mut out = String::from("N,k,delta,c_min,witness_set\n");
                    for r in &rows {
                        let witness: Vec<String> = r.witness.iter().map(|x| x.to_string()).collect();
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.n,
                            r.k,
                            csv_float(r.delta),
                            csv_float(r.c_min),
                            witness.join(" ")
                        ));
                    }
                    Ok(out)
                }
                OutputFormat::Json => Ok(json_report(config, "recur empirical-c", json!({ "rows": rows }))),
            }
        }
        RecurCmd::FindAp { set, k } => {
            json_only(config, "recur find-ap")?;
            let found = find_k_ap_in_set(&set, k)?;
            let report = match found {
                Some((a, r, k)) => json!({ "found": true, "a": a, "r": r, "k": k }),
                None => json!({ "found": false, "k": k }),
            };
            Ok(json_report(config, "recur find-ap", report))
        }
        RecurCmd::Net { inputs, theta, set } => {
            json_only(config, "recur net")?;
            let fs = read_functions(&inputs)?;
            let n = fs[0].modulus();
            let set = set.unwrap_or_else(|| (0..n).collect());
            if let Some(&x) = set.iter().find(|&&x| x >= n) {
                return Err(Error::Input(format!("residue {x} is outside Z_{n}")));
            }
            let vectors = fs
                .iter()
                .map(|f| {
                    if f.modulus() != n {
                        return Err(Error::Dimension {
                            expected: n,
                            found: f.modulus(),
                        });
                    }
                    Ok(set.iter().map(|&x| f.at(x)).collect())
                })
                .collect::<Result<Vec<Vec<Complex64>>>>()?;
            let net = greedy_net(&vectors, theta)?;
            let mut value = to_value(&net);
            if !net.separation.is_finite() {
                value["separation"] = Value::Null;
            }
            Ok(json_report(config, "recur net", value))
        }
        RecurCmd::Sample {
            inputs,
            weights,
            d,
            trials,
        } => {
            json_only(config, "recur sample")?;
            let columns = read_functions(&inputs)?;
            let weights = weights.unwrap_or_else(|| vec![1.0; columns.len()]);
            match trials {
                Some(trials) => {
                    let audit = second_moment_audit(&columns, &weights, d, trials, config.seed)?;
                    Ok(json_report(config, "recur sample", to_value(&audit)))
                }
                None => {
                    let s = finite_rank_sample(&columns, &weights, d, config.seed, 0)?;
                    let report = json!({
                        "indices": s.indices,
                        "error": s.error,
                        "approximant": FunctionJson::from_function(&s.approximant),
                    });
                    Ok(json_report(config, "recur sample", report))
                }
            }
        }
    }
}

fn vdw(cmd: VdwCmd, config: &RunConfig) -> Result<String> {
    match cmd {
        VdwCmd::Number { k, m, max } => {
            json_only(config, "vdw number")?;
            let r = vdw_number(k, m, max, config.budgets.vdw_nodes)?;
            Ok(json_report(config, "vdw number", to_value(&r)))
        }
        VdwCmd::Bound { k, m } => {
            json_only(config, "vdw bound")?;
            let r = bound_recursion(k, m, config.budgets.digit_limit)?;
            Ok(json_report(config, "vdw bound", to_value(&r)))
        }
        VdwCmd::Check { colouring, k } => {
            json_only(config, "vdw check")?;
            let c: Colouring = read_json(&colouring)?;
            c.validate()?;
            let found = find_mono_ap(&c, k)?;
            let mut report = BTreeMap::new();
            report.insert("k", json!(k));
            report.insert("found", json!(found.is_some()));
            if let Some((a, r)) = found {
                report.insert("a", json!(a));
                report.insert("r", json!(r));
                report.insert("colour", json!(c.colours[a - 1]));
            }
            Ok(json_report(config, "vdw check", to_value(&report)))
        }
    }
}
