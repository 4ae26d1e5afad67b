//! `ebr` - command-line front end for the extended Bloch representation
//! toolkit: generator bases, state conversions, seeded hidden-measurement
//! experiments, trajectory dumps, direct-sum decompositions, and the
//! rigid-rod Bell simulator.
//!
//! All randomized subcommands require an explicit `--seed`; identical
//! arguments and seed produce byte-identical output, independent of
//! `--threads`. JSON goes to stdout, diagnostics to stderr. Exit codes:
//! 0 success, 1 validation error, 2 usage error.

mod schema;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::fmt;
use std::path::PathBuf;

use ebr_core::bell_rod::{
    chsh, coplanar_axis, joint_distribution, order_invariance_check, ChshEstimate,
    JointDistribution, MeasurementOrder, OrderInvarianceReport, RodConfig,
};
use ebr_core::composite::{
    decompose_direct_sum, is_product, partial_trace, BipartiteState, Subsystem,
};
use ebr_core::hidden_measurement::{
    monte_carlo_report, project_onto_simplex, trajectory_stage1, trajectory_stage2, FrequencyReport,
};
use ebr_core::observables::{group_degenerate, simplex_of, spectral_decompose};
use ebr_core::state_space::to_bloch;
use ebr_core::su_basis::{build_tensor_basis, verify_basis, ValidationReport};
use ebr_core::tol;

use schema::{BasisKind, LoadedState, SCHEMA};

#[derive(Parser)]
#[command(name = "ebr", version, about = "Extended Bloch representation toolkit")]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a generator basis as JSON.
    Gen {
        #[arg(long, value_enum)]
        basis: BasisKind,
        /// Hilbert-space dimension (tensor basis requires 4).
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Check a generator basis against its structural invariants.
    Verify {
        #[arg(long, value_enum)]
        basis: BasisKind,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Convert a state file between matrix and Bloch form.
    Convert {
        #[arg(long)]
        input: PathBuf,
        /// Generator determination for the Bloch coordinates.
        #[arg(long, value_enum)]
        basis: Option<BasisKind>,
    },
    /// Run seeded hidden-measurement trials and report outcome frequencies.
    Measure {
        #[arg(long)]
        state: PathBuf,
        /// Path to an observable file, or a built-in:
        /// "pauli-x|y|z", "spin-product a=<deg> b=<deg>".
        #[arg(long)]
        observable: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Relative eigenvalue spread below which outcomes fuse.
        #[arg(long, default_value_t = tol::DEGENERACY_DEFAULT)]
        degenerate_tol: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Dump the two-stage measurement trajectory as CSV.
    Traject {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        observable: String,
        /// Steps per stage (rows per stage = steps + 1).
        #[arg(long)]
        steps: usize,
        /// Stage-2 target outcome (1-based; default: most probable).
        #[arg(long)]
        outcome: Option<usize>,
    },
    /// Split a two-qubit state into subsystem and correlation blocks.
    Decompose {
        #[arg(long)]
        state: PathBuf,
    },
    /// Estimate the CHSH quantity at four coplanar angles (degrees).
    Bell {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        aprime: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        bprime: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Joint outcome table of one rigid-rod configuration.
    Rod {
        /// A-axis angle in degrees (x-z plane).
        #[arg(long)]
        a: f64,
        /// B-axis angle in degrees (x-z plane).
        #[arg(long)]
        b: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Which particle is measured first.
        #[arg(long, value_parser = parse_order)]
        order: MeasurementOrder,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Also run the opposite order and report both against the oracle.
        #[arg(long)]
        check_order_invariance: bool,
    },
}

fn parse_order(s: &str) -> std::result::Result<MeasurementOrder, String> {
    match s {
        "A" | "a" => Ok(MeasurementOrder::AFirst),
        "B" | "b" => Ok(MeasurementOrder::BFirst),
        other => Err(format!("expected 'A' or 'B', got '{other}'")),
    }
}

/// Error class that maps to exit code 2 instead of 1.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|report| save_report(&report, cli.output.as_deref()));
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        let code = if e.downcast_ref::<UsageError>().is_some() {
            2
        } else {
            1
        };
        std::process::exit(code);
    }
}

/// Write a finished report to stdout or, when given, to a file.
fn save_report(report: &str, output: Option<&std::path::Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, report)
            .map_err(|e| anyhow!("cannot write report to {}: {e}", path.display())),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::Gen { basis, n } => cmd_gen(basis, n),
        Command::Verify { basis, n } => cmd_verify(basis, n),
        Command::Convert { input, basis } => cmd_convert(&input, basis),
        Command::Measure {
            state,
            observable,
            trials,
            seed,
            degenerate_tol,
            threads,
        } => cmd_measure(&state, &observable, trials, seed, degenerate_tol, threads),
        Command::Traject {
            state,
            observable,
            steps,
            outcome,
        } => cmd_traject(&state, &observable, steps, outcome),
        Command::Decompose { state } => cmd_decompose(&state),
        Command::Bell {
            a,
            aprime,
            b,
            bprime,
            trials,
            seed,
            threads,
        } => cmd_bell(a, aprime, b, bprime, trials, seed, threads),
        Command::Rod {
            a,
            b,
            trials,
            seed,
            order,
            threads,
            check_order_invariance,
        } => cmd_rod(a, b, trials, seed, order, threads, check_order_invariance),
    }
}

fn build_basis(kind: BasisKind, n: usize) -> Result<ebr_core::su_basis::GeneratorBasis> {
    match kind {
        BasisKind::Tensor if n != 4 => Err(anyhow!(UsageError(format!(
            "--basis tensor requires --n 4, got {n}"
        )))),
        _ => kind.build(n),
    }
}

#[derive(Serialize)]
struct BasisDoc {
    schema: &'static str,
    n: usize,
    determination: &'static str,
    c_n: f64,
    /// One flat row-major array of [re, im] pairs per generator.
    matrices: Vec<Vec<[f64; 2]>>,
}

fn cmd_gen(kind: BasisKind, n: usize) -> Result<String> {
    let basis = build_basis(kind, n)?;
    let matrices = basis
        .matrices()
        .iter()
        .map(|m| {
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect();
    to_json(&BasisDoc {
        schema: SCHEMA,
        n: basis.dimension(),
        determination: kind.label(),
        c_n: basis.c_n(),
        matrices,
    })
}

#[derive(Serialize)]
struct VerifyDoc {
    schema: &'static str,
    basis: &'static str,
    n: usize,
    #[serde(flatten)]
    report: ValidationReport,
}

fn cmd_verify(kind: BasisKind, n: usize) -> Result<String> {
    let basis = build_basis(kind, n)?;
    let report = verify_basis(&basis);
    to_json(&VerifyDoc {
        schema: SCHEMA,
        basis: kind.label(),
        n: basis.dimension(),
        report,
    })
}

fn cmd_convert(input: &std::path::Path, basis: Option<BasisKind>) -> Result<String> {
    let loaded = schema::load_state(input, basis)?;
    if loaded.was_bloch {
        to_json(&schema::matrix_doc(&loaded.density))
    } else {
        to_json(&schema::bloch_doc(&loaded.bloch, &loaded.basis))
    }
}

#[derive(Serialize)]
struct MeasureDoc {
    schema: &'static str,
    n: usize,
    observable: String,
    degenerate_tol: f64,
    #[serde(flatten)]
    report: FrequencyReport,
}

fn load_state_and_observable(
    state_path: &std::path::Path,
    observable: &str,
) -> Result<(LoadedState, ebr_core::linalg::CMatrix, String)> {
    let loaded = schema::load_state(state_path, None)?;
    let (n_obs, matrix, label) = schema::load_observable(observable)?;
    if n_obs != loaded.density.dimension() {
        bail!(
            "state dimension {} does not match observable dimension {n_obs}",
            loaded.density.dimension()
        );
    }
    Ok((loaded, matrix, label))
}

fn cmd_measure(
    state_path: &std::path::Path,
    observable: &str,
    trials: u64,
    seed: u64,
    degenerate_tol: f64,
    threads: usize,
) -> Result<String> {
    let (loaded, matrix, label) = load_state_and_observable(state_path, observable)?;
    let decomp = spectral_decompose(&matrix, tol::STRUCTURAL)?;
    let scale = decomp
        .eigenvalues()
        .iter()
        .fold(0.0f64, |m, o| m.max(o.abs()))
        .max(1.0);
    let grouping = group_degenerate(&decomp, degenerate_tol * scale);
    let sx = simplex_of(&decomp, &loaded.basis)?;
    let report = monte_carlo_report(&loaded.bloch, &sx, &grouping, trials, seed, threads)?;
    to_json(&MeasureDoc {
        schema: SCHEMA,
        n: loaded.density.dimension(),
        observable: label,
        degenerate_tol,
        report,
    })
}

fn cmd_traject(
    state_path: &std::path::Path,
    observable: &str,
    steps: usize,
    outcome: Option<usize>,
) -> Result<String> {
    if steps == 0 {
        bail!(UsageError("--steps must be at least 1".into()));
    }
    let (loaded, matrix, _) = load_state_and_observable(state_path, observable)?;
    let decomp = spectral_decompose(&matrix, tol::STRUCTURAL)?;
    let sx = simplex_of(&decomp, &loaded.basis)?;
    let on = project_onto_simplex(&loaded.bloch, &sx)?;

    let n = sx.dimension();
    let target = match outcome {
        Some(o) => {
            if o == 0 || o > n {
                bail!(UsageError(format!("--outcome must be in 1..={n}, got {o}")));
            }
            o - 1
        }
        None => {
            // most probable outcome, ties to the lowest index
            let bary = on.barycentric();
            (0..n)
                .max_by(|&i, &j| bary[i].partial_cmp(&bary[j]).unwrap().then(j.cmp(&i)))
                .unwrap()
        }
    };

    let dim = loaded.basis.bloch_dim();
    let header: Vec<String> = (1..=dim).map(|i| format!("r_{i}")).collect();
    let mut csv = format!("stage,tau,{}\n", header.join(","));
    let mut emit = |stage: u8, tau: f64, r: &ebr_core::state_space::BlochVector| {
        let row: Vec<String> = r.components().iter().map(|x| format!("{x}")).collect();
        csv.push_str(&format!("{stage},{tau},{}\n", row.join(",")));
    };
    for k in 0..=steps {
        let tau = k as f64 / steps as f64;
        emit(1, tau, &trajectory_stage1(&loaded.bloch, &sx, tau)?);
    }
    for k in 0..=steps {
        let tau = k as f64 / steps as f64;
        emit(2, tau, &trajectory_stage2(&on, &sx, target, tau)?);
    }
    Ok(csv)
}

#[derive(Serialize)]
struct DecomposeDoc {
    schema: &'static str,
    #[serde(rename = "rA")]
    r_a: Vec<f64>,
    #[serde(rename = "rB")]
    r_b: Vec<f64>,
    rcorr: Vec<f64>,
    product: bool,
}

fn cmd_decompose(state_path: &std::path::Path) -> Result<String> {
    let loaded = schema::load_state(state_path, Some(BasisKind::Tensor))?;
    if loaded.density.dimension() != 4 {
        bail!(
            "decompose needs a two-qubit state (n = 4), got n = {}",
            loaded.density.dimension()
        );
    }
    let tensor = build_tensor_basis(2, 2)?;
    let r = to_bloch(&loaded.density, &tensor)?;
    let d = decompose_direct_sum(&r, &tensor)?;
    // consistency: the blocks must agree with the partial traces
    let bip = BipartiteState::new(2, 2, loaded.density.clone())?;
    let _ = partial_trace(&bip, Subsystem::A);
    to_json(&DecomposeDoc {
        schema: SCHEMA,
        r_a: d.r_a.iter().cloned().collect(),
        r_b: d.r_b.iter().cloned().collect(),
        rcorr: d.r_corr.iter().cloned().collect(),
        product: is_product(&d, tol::GEOMETRY),
    })
}

#[derive(Serialize)]
struct BellDoc {
    schema: &'static str,
    angles_deg: [f64; 4],
    trials: u64,
    seed: u64,
    #[serde(rename = "E")]
    e: BellCorrelations,
    #[serde(rename = "S")]
    s: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct BellCorrelations {
    ab: f64,
    ab_prime: f64,
    a_prime_b: f64,
    a_prime_b_prime: f64,
}

fn cmd_bell(
    a: f64,
    aprime: f64,
    b: f64,
    bprime: f64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<String> {
    let est: ChshEstimate = chsh(
        coplanar_axis(a),
        coplanar_axis(aprime),
        coplanar_axis(b),
        coplanar_axis(bprime),
        trials,
        seed,
        threads,
    )?;
    to_json(&BellDoc {
        schema: SCHEMA,
        angles_deg: [a, aprime, b, bprime],
        trials,
        seed,
        e: BellCorrelations {
            ab: est.e_ab.e_hat,
            ab_prime: est.e_ab_prime.e_hat,
            a_prime_b: est.e_a_prime_b.e_hat,
            a_prime_b_prime: est.e_a_prime_b_prime.e_hat,
        },
        s: est.s_hat,
        stderr: est.std_error,
    })
}

#[derive(Serialize)]
struct RodDoc {
    schema: &'static str,
    a_deg: f64,
    b_deg: f64,
    #[serde(flatten)]
    joint: JointDistribution,
}

#[derive(Serialize)]
struct RodInvarianceDoc {
    schema: &'static str,
    a_deg: f64,
    b_deg: f64,
    seed: u64,
    #[serde(flatten)]
    report: OrderInvarianceReport,
}

fn cmd_rod(
    a: f64,
    b: f64,
    trials: u64,
    seed: u64,
    order: MeasurementOrder,
    threads: usize,
    check_order_invariance: bool,
) -> Result<String> {
    let cfg = RodConfig::new(coplanar_axis(a), coplanar_axis(b), order)?;
    if check_order_invariance {
        let report = order_invariance_check(&cfg, trials, seed, threads)?;
        to_json(&RodInvarianceDoc {
            schema: SCHEMA,
            a_deg: a,
            b_deg: b,
            seed,
            report,
        })
    } else {
        let joint = joint_distribution(&cfg, trials, seed, threads)?;
        to_json(&RodDoc {
            schema: SCHEMA,
            a_deg: a,
            b_deg: b,
            joint,
        })
    }
}
