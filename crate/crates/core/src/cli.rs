//! Command-line front end.
//!
//! Exit convention: 0 when the request succeeds (including "the
//! property holds"), 2 when a queried property does not hold (no
//! witness, strong check fails, privacy violated), 1 on any error.
//! Every invocation writes at least one line.

use std::ffi::OsString;
use std::io::Write;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::constructions::{fixture, reed_muller_lsss, shamir_msp, Fixture};
use crate::diamond::{multiplicativity_witness, strong_multiplicativity_check};
use crate::format::{parse_msp, serialize_msp};
use crate::mpcsim::{privacy_audit, simulate_fanin_product, AuditProtocol, FaninMode};
use crate::msp::{Msp, PlayerSet};
use crate::transform::lift_multiplicativity;

#[derive(Parser)]
#[command(
    name = "mspmul",
    version,
    about = "Monotone span programs, multiplicative secret sharing, and round-efficient product protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scheme and print it as an MSP file
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Print minimal access sets, maximal adversary sets, and Q^λ flags
    Access { file: String },
    /// Search for a λ-fold recombination witness
    Check {
        file: String,
        #[arg(long)]
        lambda: usize,
        /// Also print the witness coefficients
        #[arg(long)]
        emit_witness: bool,
    },
    /// Check strong λ-multiplicativity per maximal adversary set
    Strong {
        file: String,
        #[arg(long)]
        lambda: usize,
    },
    /// Lift a strongly λ-multiplicative scheme to a (λ+1)-multiplicative one
    Transform {
        file: String,
        #[arg(long)]
        lambda: usize,
    },
    /// Run the blinded fan-in product protocol and print its trace
    Simulate {
        file: String,
        /// Comma-separated factors
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<u64>,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        seed: u64,
    },
    /// Audit share-level privacy for an unqualified player set
    Audit {
        file: String,
        /// Player set, e.g. "1,3"
        #[arg(long)]
        set: String,
        /// Enables sampling when the state space is too large to enumerate
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    /// Threshold scheme with rows (1, x_i, …, x_i^t)
    Shamir {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        /// Comma-separated evaluation points (default 1..n)
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<u64>>,
    },
    /// Binary scheme from degree-≤r multilinear evaluations on F_2^m
    Rm {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        m: usize,
    },
    /// One of the pinned six-player schemes
    Fixture {
        #[arg(long, value_enum)]
        name: FixtureArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureArg {
    #[value(name = "M")]
    M,
    #[value(name = "Mprime")]
    Mprime,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lambda2,
    Lambda3,
}

fn emit(out: &mut impl Write, text: &str) {
    let _ = out.write_all(text.as_bytes());
}

fn fail(out: &mut impl Write, err: impl std::fmt::Display) -> i32 {
    emit(out, &format!("error: {err}\n"));
    1
}

fn load(path: &str, out: &mut impl Write) -> Result<Msp, i32> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(out, format_args!("cannot read {path}: {e}")))?;
    parse_msp(&text).map_err(|e| fail(out, e))
}

/// Runs one invocation against the given output stream and returns the
/// process exit code.
pub fn run<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            emit(out, &rendered);
            if !rendered.ends_with('\n') {
                emit(out, "\n");
            }
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match cli.command {
        Command::Gen { family } => {
            let scheme = match family {
                GenFamily::Shamir { t, n, q, points } => {
                    shamir_msp(t, n, q, points.as_deref())
                }
                GenFamily::Rm { r, m } => reed_muller_lsss(r, m),
                GenFamily::Fixture { name } => Ok(fixture(match name {
                    FixtureArg::M => Fixture::M,
                    FixtureArg::Mprime => Fixture::MPrime,
                })),
            };
            match scheme {
                Ok(scheme) => {
                    emit(out, &serialize_msp(&scheme));
                    0
                }
                Err(e) => fail(out, e),
            }
        }
        Command::Access { file } => {
            let scheme = match load(&file, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let access = match scheme.minimal_access_structure() {
                Ok(a) => a,
                Err(e) => return fail(out, e),
            };
            let adversary = match scheme.maximal_adversary_structure() {
                Ok(a) => a,
                Err(e) => return fail(out, e),
            };
            emit(out, "minimal access sets:\n");
            for set in access.sets() {
                emit(out, &format!("{set}\n"));
            }
            emit(out, "maximal adversary sets:\n");
            for set in adversary.sets() {
                emit(out, &format!("{set}\n"));
            }
            for lambda in 2..=4 {
                let verdict = if adversary.is_q_lambda(lambda) {
                    "yes"
                } else {
                    "no"
                };
                emit(out, &format!("Q^{lambda}: {verdict}\n"));
            }
            0
        }
        Command::Check {
            file,
            lambda,
            emit_witness,
        } => {
            let scheme = match load(&file, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match multiplicativity_witness(&scheme, lambda) {
                Ok(Some(witness)) => {
                    emit(out, "witness\n");
                    if emit_witness {
                        emit(out, &witness.serialize());
                    }
                    0
                }
                Ok(None) => {
                    emit(out, "none\n");
                    2
                }
                Err(e) => fail(out, e),
            }
        }
        Command::Strong { file, lambda } => {
            let scheme = match load(&file, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match strong_multiplicativity_check(&scheme, lambda) {
                Ok(result) => {
                    for (set, witness) in result.per_set() {
                        let verdict = if witness.is_some() { "witness" } else { "none" };
                        emit(out, &format!("{set} {verdict}\n"));
                    }
                    let verdict = if result.holds() { "yes" } else { "no" };
                    emit(out, &format!("strong multiplicativity: {verdict}\n"));
                    if result.holds() {
                        0
                    } else {
                        2
                    }
                }
                Err(e) => fail(out, e),
            }
        }
        Command::Transform { file, lambda } => {
            let scheme = match load(&file, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match lift_multiplicativity(&scheme, lambda) {
                Ok(lift) => {
                    emit(out, &serialize_msp(lift.scheme()));
                    0
                }
                Err(e) => fail(out, e),
            }
        }
        Command::Simulate {
            file,
            inputs,
            mode,
            seed,
        } => {
            let scheme = match load(&file, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let mode = match mode {
                ModeArg::Lambda2 => FaninMode::Lambda2,
                ModeArg::Lambda3 => FaninMode::Lambda3,
            };
            match simulate_fanin_product(&scheme, &inputs, mode, seed) {
                Ok(outcome) => {
                    emit(out, &outcome.log().to_trace());
                    emit(out, &format!("product {}\n", outcome.product().value()));
                    emit(out, &format!("rounds {}\n", outcome.rounds()));
                    0
                }
                Err(e) => fail(out, e),
            }
        }
        Command::Audit { file, set, seed } => {
            let scheme = match load(&file, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let set = match PlayerSet::from_str(&set) {
                Ok(s) => s,
                Err(e) => return fail(out, e),
            };
            match privacy_audit(&scheme, set, AuditProtocol::ShareOnly, seed) {
                Ok(true) => {
                    emit(out, "privacy: holds\n");
                    0
                }
                Ok(false) => {
                    emit(out, "privacy: violated\n");
                    2
                }
                Err(e) => fail(out, e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invoke(args: &[&str]) -> (i32, String) {
        let mut argv = vec!["mspmul"];
        argv.extend_from_slice(args);
        let mut buffer = Vec::new();
        let code = run(argv, &mut buffer);
        (code, String::from_utf8(buffer).unwrap())
    }

    #[test]
    fn gen_shamir_prints_an_msp_file() {
        let (code, text) = invoke(&["gen", "shamir", "--t", "1", "--n", "3", "--q", "7"]);
        assert_eq!(code, 0);
        assert!(text.starts_with("MSP v1\nfield 7\nplayers 3\ndims 3 2\n"));
    }

    #[test]
    fn gen_errors_exit_one_with_a_diagnostic() {
        let (code, text) = invoke(&["gen", "shamir", "--t", "3", "--n", "3", "--q", "11"]);
        assert_eq!(code, 1);
        assert!(text.starts_with("error: "));
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn unknown_flags_exit_one() {
        let (code, text) = invoke(&["gen", "shamir", "--bogus", "1"]);
        assert_eq!(code, 1);
        assert!(!text.is_empty());
    }

    #[test]
    fn help_exits_zero() {
        let (code, text) = invoke(&["--help"]);
        assert_eq!(code, 0);
        assert!(text.contains("Usage"));
    }
}
