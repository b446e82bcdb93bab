use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hbproof::cert::Certificate;
use hbproof::config::ProofConfig;
use hbproof::continuation::{continue_chunked, prove_interval, ContinuationConfig, ContinuationError, LedgerEntry};
use hbproof::export::{export, ExportKind};

#[derive(Parser)]
#[command(name = "hbproof", version, about = "Validated homoclinic orbits of u'''' + beta u'' + e^u - 1 = 0")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prove one parameter range and write its certificate.
    Prove {
        #[arg(long)]
        beta0: f64,
        #[arg(long)]
        beta1: f64,
        #[command(flatten)]
        proof: ProofArgs,
        /// Eigenvector scale; searched for when absent.
        #[arg(long)]
        gamma: Option<f64>,
        /// Certificate path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continue over a range, appending certificates to a JSON-lines ledger.
    Continue {
        #[arg(long, visible_alias = "beta0")]
        from: f64,
        #[arg(long, visible_alias = "beta1")]
        to: f64,
        #[command(flatten)]
        proof: ProofArgs,
        #[arg(long, default_value_t = 2.5e-4)]
        dbeta: f64,
        #[arg(long, default_value_t = 1e-6)]
        min_dbeta: f64,
        #[arg(long, default_value_t = 1.2)]
        growth: f64,
        #[arg(long, default_value_t = 40)]
        max_retries: usize,
        /// Eigenvector scale at the start; searched for when absent.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value = "ledger.jsonl")]
        out: PathBuf,
        /// Extend an existing ledger instead of starting over.
        #[arg(long)]
        resume: bool,
        /// Number of independently continued pieces.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-check a certificate or every entry of a ledger.
    Verify { path: PathBuf },
    /// Sample a certified solution as CSV.
    Export {
        path: PathBuf,
        /// orbit, decay, manifold or u-profile.
        #[arg(long, visible_alias = "what")]
        kind: String,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Ledger entry to use.
        #[arg(long, default_value_t = 0)]
        entry: usize,
        /// Use the right end of the range instead of the left.
        #[arg(long)]
        end: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ProofArgs {
    #[arg(long = "N", default_value_t = 30)]
    order: usize,
    #[arg(long, default_value_t = 350)]
    m: usize,
    #[arg(long, default_value_t = 400)]
    m_high: usize,
    #[arg(long, default_value_t = 1.8)]
    m_switch: f64,
    #[arg(long, default_value_t = 1.05)]
    nu: f64,
    #[arg(long, default_value_t = 0.895)]
    rho: f64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
}

impl ProofArgs {
    fn config(&self) -> ProofConfig {
        ProofConfig {
            order: self.order,
            m: self.m,
            m_high: self.m_high.max(self.m),
            m_switch: self.m_switch,
            nu: self.nu,
            rho: self.rho,
            eta: self.eta,
            ..ProofConfig::default()
        }
    }
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

fn bad_input(message: impl ToString) -> Failure {
    Failure {
        code: 4,
        kind: "bad_input",
        message: message.to_string(),
    }
}

fn unverified(message: impl ToString) -> Failure {
    Failure {
        code: 3,
        kind: "verification_failure",
        message: message.to_string(),
    }
}

impl From<ContinuationError> for Failure {
    fn from(e: ContinuationError) -> Self {
        match e {
            ContinuationError::Config(_) => bad_input(e),
            ContinuationError::Ledger(_) | ContinuationError::Certificate(_) => bad_input(e),
            _ => Failure {
                code: 2,
                kind: "proof_failure",
                message: e.to_string(),
            },
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| bad_input(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(bad_input),
    }
}

/// Certificates in a file holding either one certificate or a ledger.
fn load(path: &Path) -> Result<Vec<Certificate>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
    if lines.is_empty() {
        return Err(unverified("empty file"));
    }
    if lines.len() == 1 && lines[0].starts_with("{\"format\"") {
        return Certificate::from_json(lines[0]).map(|c| vec![c]).map_err(unverified);
    }
    lines
        .iter()
        .map(|l| LedgerEntry::from_line(l).map(|e| e.certificate).map_err(unverified))
        .collect()
}

fn run(cmd: Cmd) -> Result<serde_json::Value, Failure> {
    match cmd {
        Cmd::Prove {
            beta0,
            beta1,
            proof,
            gamma,
            out,
        } => {
            let cfg = proof.config();
            let cert = prove_interval(beta0, beta1, gamma, &cfg)?;
            let d = cert.decode().map_err(unverified)?;
            let mut text = cert.to_json();
            text.push('\n');
            write_text(out.as_deref(), &text)?;
            Ok(json!({
                "beta0": d.beta0, "beta1": d.beta1, "gamma": d.gamma,
                "r_m": d.r_m, "r": d.r, "L0": d.x0.l, "L1": d.x1.l,
            }))
        }
        Cmd::Continue {
            from,
            to,
            proof,
            dbeta,
            min_dbeta,
            growth,
            max_retries,
            gamma,
            out,
            resume,
            jobs,
        } => {
            if jobs == 0 {
                return Err(bad_input("jobs must be positive"));
            }
            let cfg = ContinuationConfig {
                proof: proof.config(),
                dbeta,
                min_dbeta,
                growth,
                max_retries,
                gamma,
                ..ContinuationConfig::new(from, to)
            };
            let ledger = continue_chunked(&cfg, jobs, Some(&out), resume)?;
            let (lo, hi) = ledger.covered()?;
            Ok(json!({ "steps": ledger.entries.len(), "beta0": lo, "beta1": hi, "ledger": out }))
        }
        Cmd::Verify { path } => {
            let certs = load(&path)?;
            let mut prev: Option<f64> = None;
            let mut worst_r: f64 = 0.0;
            let mut reproduced = true;
            for (k, c) in certs.iter().enumerate() {
                let rep = c.verify().map_err(|e| unverified(format!("entry {k}: {e}")))?;
                if let Some(p) = prev {
                    if p.to_bits() != rep.beta0.to_bits() {
                        return Err(unverified(format!("entry {k} does not abut its predecessor")));
                    }
                }
                prev = Some(rep.beta1);
                worst_r = worst_r.max(rep.r);
                reproduced &= rep.bounds_reproduced;
            }
            let first = certs[0].decode().map_err(unverified)?;
            Ok(json!({
                "verified": certs.len(), "beta0": first.beta0, "beta1": prev,
                "max_r": worst_r, "bounds_reproduced": reproduced,
            }))
        }
        Cmd::Export {
            path,
            kind,
            samples,
            entry,
            end,
            out,
        } => {
            let kind: ExportKind = kind.parse().map_err(bad_input)?;
            let certs = load(&path)?;
            let cert = certs
                .get(entry)
                .ok_or_else(|| bad_input(format!("no entry {entry} in {}", path.display())))?;
            let d = cert.decode().map_err(unverified)?;
            let (x, a, beta) = if end { (&d.x1, &d.a1, d.beta1) } else { (&d.x0, &d.a0, d.beta0) };
            let mut buf = Vec::new();
            export(kind, x, a, samples, &mut buf).map_err(bad_input)?;
            let text = String::from_utf8(buf).map_err(bad_input)?;
            write_text(out.as_deref(), &text)?;
            Ok(json!({ "beta": beta, "kind": format!("{kind:?}") }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "bad_input", "message": e.to_string() }));
            return ExitCode::from(4);
        }
    };
    let to_stdout = matches!(&cli.cmd, Cmd::Prove { out: Some(_), .. } | Cmd::Continue { .. } | Cmd::Verify { .. })
        || matches!(&cli.cmd, Cmd::Export { out: Some(_), .. });
    match run(cli.cmd) {
        Ok(summary) => {
            if to_stdout {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
