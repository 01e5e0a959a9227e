//! Command-line front end over the `siegel` library: cocycle values, lemma
//! certificates, the level weight-integrality certificate, and multiplier
//! relation reports.
//!
//! Machine-readable output (JSON for certificates and reports, a small fixed
//! text format for `w`) goes to standard output, or to a file when `--out` is
//! given; a one-line human summary always goes to standard error. Exit codes
//! are a stable contract: 0 means pass, 1 means a verified failure (a failing
//! certificate step, a guard or relation violation), 2 means a usage error
//! (bad flags, unparseable matrices, violated domain preconditions).
//!
//! All sampling commands take an explicit `--seed`; the same seed and flags
//! produce byte-identical output.

use std::fs;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use siegel::cert::{self, CertError, LemmaTag};
use siegel::forms::{self, FormsError, SeriesTruncation};
use siegel::matrix::SiegelPoint;
use siegel::{cocycle, genus1, sample, SymplecticMatrix};

/// Environment variable supplying the default tolerance; `--tol` wins.
const TOL_ENV: &str = "SIEGEL_TOL";

#[derive(Parser)]
#[command(
    name = "siegel",
    version,
    about = "Argument cocycle on symplectic groups, multiplier systems, and certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integer cocycle value w(M, N) and its rounding residual
    W {
        /// first matrix: inline literal "a,b;c,d" or @path
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        /// second matrix, same format and genus
        #[arg(long, allow_hyphen_values = true)]
        n: String,
        /// closed-form five-case evaluation; genus 1 only
        #[arg(long, conflicts_with = "numeric")]
        exact: bool,
        /// argument-continuation evaluation, any genus (the default)
        #[arg(long)]
        numeric: bool,
        /// residual guard; default 1e-6 (or SIEGEL_TOL)
        #[arg(long)]
        tol: Option<f64>,
        /// write the result here instead of standard output
        #[arg(long)]
        out: Option<String>,
    },
    /// Seeded verification certificate for one closed-form lemma
    Lemma {
        /// one of LTra, TraTr, Pval, ParM, KSz, ITra, TraI, iEiZ-w, iota3-w
        tag: String,
        /// random instances to verify
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// write the certificate here instead of standard output
        #[arg(long)]
        out: Option<String>,
    },
    /// Weight-integrality certificate at level q (2r integral)
    Deligne {
        /// level, a positive multiple of 4
        #[arg(long, default_value_t = 4)]
        q: i64,
        /// search bound for the negative-symbol bottom row
        #[arg(long, default_value_t = 100_000)]
        bound: i64,
        /// write the certificate here instead of standard output
        #[arg(long)]
        out: Option<String>,
    },
    /// Weight-1/2 theta multiplier report
    Theta {
        /// optional matrix whose multiplier value is reported
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
        /// random theta-group pairs for the relation check
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// relation tolerance; default 1e-9 (or SIEGEL_TOL)
        #[arg(long)]
        tol: Option<f64>,
        /// also evaluate the series at i with this truncation radius
        #[arg(long)]
        trunc: Option<usize>,
        /// write the report here instead of standard output
        #[arg(long)]
        out: Option<String>,
    },
    /// Real-weight discriminant multiplier report
    Delta {
        /// the weight r
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        /// optional matrix whose multiplier value is reported
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
        /// random genus-1 pairs for the relation check
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// relation tolerance; default 1e-9 (or SIEGEL_TOL)
        #[arg(long)]
        tol: Option<f64>,
        /// write the report here instead of standard output
        #[arg(long)]
        out: Option<String>,
    },
}

/// The two non-zero exit paths. `Usage` exits 2, `Verified` exits 1; the
/// distinction is whether the computation ran and produced a negative
/// verdict (1) or never validly started (2).
enum CmdError {
    Usage(String),
    Verified(String),
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Verified(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CmdError> {
    match command {
        Command::W { m, n, exact, numeric, tol, out } => cmd_w(&m, &n, exact, numeric, tol, &out),
        Command::Lemma { tag, samples, seed, out } => cmd_lemma(&tag, samples, seed, &out),
        Command::Deligne { q, bound, out } => cmd_deligne(q, bound, &out),
        Command::Theta { matrix, samples, seed, tol, trunc, out } => {
            cmd_theta(matrix.as_deref(), samples, seed, tol, trunc, &out)
        }
        Command::Delta { r, matrix, samples, seed, tol, out } => {
            cmd_delta(r, matrix.as_deref(), samples, seed, tol, &out)
        }
    }
}

// ---------------------------------------------------------------------------
// shared plumbing

/// Inline literal or `@path`; rows split by `;`, entries by `,`.
fn parse_matrix(arg: &str) -> Result<SymplecticMatrix, CmdError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CmdError::Usage(format!("cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    text.trim()
        .parse()
        .map_err(|e| CmdError::Usage(format!("bad matrix literal {:?}: {e}", arg)))
}

/// Flag value, else the environment variable, else the command's default.
fn tolerance(flag: Option<f64>, default: f64) -> Result<f64, CmdError> {
    let t = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CmdError::Usage(format!("{TOL_ENV} is not a number: {s:?}")))?,
            Err(_) => default,
        },
    };
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(CmdError::Usage(format!("tolerance must be positive and finite, got {t}")))
    }
}

fn require_samples(samples: usize) -> Result<(), CmdError> {
    if samples == 0 {
        return Err(CmdError::Usage("--samples must be at least 1".into()));
    }
    Ok(())
}

fn emit(text: &str, out: &Option<String>) -> Result<(), CmdError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CmdError::Usage(format!("cannot write {path}: {e}")))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Certificate errors that mean the input was never admissible exit 2;
/// everything else is a verified computational failure and exits 1.
fn cert_error(e: CertError) -> CmdError {
    match e {
        CertError::UnknownTag(_)
        | CertError::BadLevel(_)
        | CertError::BadParameters(_)
        | CertError::Precondition(_) => CmdError::Usage(e.to_string()),
        other => CmdError::Verified(other.to_string()),
    }
}

/// Same split for the multiplier evaluators.
fn forms_error(e: FormsError) -> CmdError {
    match e {
        FormsError::NotThetaGroup
        | FormsError::WrongGenus(_)
        | FormsError::InsufficientRadius { .. } => CmdError::Usage(e.to_string()),
        other => CmdError::Verified(other.to_string()),
    }
}

fn emit_certificate(
    cert: cert::Certificate,
    out: &Option<String>,
    what: &str,
) -> Result<(), CmdError> {
    emit(&cert.to_json(), out)?;
    if cert.pass {
        eprintln!("{what}: pass, {} steps: {}", cert.steps.len(), cert.conclusion);
        Ok(())
    } else {
        let detail = cert
            .steps
            .iter()
            .enumerate()
            .find(|(_, s)| !s.pass)
            .map(|(k, s)| format!("{what}: step {k} failed: {}", s.description))
            .unwrap_or_else(|| format!("{what}: certificate failed"));
        Err(CmdError::Verified(detail))
    }
}

/// Fixed-width complex rendering so reports are byte-stable.
fn fmt_complex(re: f64, im: f64) -> String {
    format!("{:+.12e}{:+.12e}i", re, im)
}

// ---------------------------------------------------------------------------
// commands

fn cmd_w(
    m_arg: &str,
    n_arg: &str,
    exact: bool,
    _numeric: bool,
    tol: Option<f64>,
    out: &Option<String>,
) -> Result<(), CmdError> {
    let m = parse_matrix(m_arg)?;
    let n = parse_matrix(n_arg)?;
    if m.genus() != n.genus() {
        return Err(CmdError::Usage(format!(
            "genus mismatch: {} vs {}",
            m.genus(),
            n.genus()
        )));
    }
    let tol = tolerance(tol, 1e-6)?;
    let (w, residual, mode, segments) = if exact {
        if m.genus() != 1 {
            return Err(CmdError::Usage(format!(
                "--exact applies to genus 1 only, got genus {}",
                m.genus()
            )));
        }
        let w = genus1::w_exact(&m, &n).map_err(|e| CmdError::Usage(e.to_string()))?;
        (w, 0.0, "exact", 0)
    } else {
        let v = cocycle::w_cocycle(&m, &n).map_err(|e| CmdError::Verified(e.to_string()))?;
        (v.w, v.residual, "numeric", v.path_steps)
    };
    emit(&format!("w={w}\nresidual={residual:e}"), out)?;
    eprintln!("w({m}, {n}) = {w} [{mode}, residual {residual:e}, {segments} segments]");
    if residual >= tol {
        return Err(CmdError::Verified(format!(
            "residual {residual:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(())
}

fn cmd_lemma(tag: &str, samples: usize, seed: u64, out: &Option<String>) -> Result<(), CmdError> {
    require_samples(samples)?;
    let tag = LemmaTag::from_str(tag).map_err(cert_error)?;
    let cert = cert::verify_lemma(tag, samples, seed).map_err(cert_error)?;
    emit_certificate(cert, out, &format!("lemma {tag}"))
}

fn cmd_deligne(q: i64, bound: i64, out: &Option<String>) -> Result<(), CmdError> {
    let cert = cert::deligne_certificate(q, bound).map_err(cert_error)?;
    emit_certificate(cert, out, &format!("deligne level {q}"))
}

/// Sample points matching the genus of a user matrix.
fn points_for(m: &SymplecticMatrix) -> Result<Vec<SiegelPoint>, CmdError> {
    if m.genus() == 1 {
        forms::adapted_samples(m).map_err(forms_error)
    } else {
        Ok(forms::default_samples(m.genus()))
    }
}

fn cmd_theta(
    matrix: Option<&str>,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
    trunc: Option<usize>,
    out: &Option<String>,
) -> Result<(), CmdError> {
    require_samples(samples)?;
    let tol = tolerance(tol, 1e-9)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(SymplecticMatrix, SymplecticMatrix)> = (0..samples)
        .map(|_| {
            (sample::random_theta_group(&mut rng, 6), sample::random_theta_group(&mut rng, 6))
        })
        .collect();
    let points = forms::default_samples(2);
    let eval =
        |m: &SymplecticMatrix| forms::theta_multiplier(m, &points).map(|e| e.value);
    let report =
        forms::verify_multiplier_relation(eval, 0.5, &pairs, tol).map_err(forms_error)?;

    let mut doc = json!({
        "command": "theta",
        "weight": 0.5,
        "seed": seed,
        "relation": &report,
    });
    if let Some(lit) = matrix {
        let m = parse_matrix(lit)?;
        let ev = forms::theta_multiplier(&m, &points_for(&m)?).map_err(forms_error)?;
        doc["matrix"] = json!({
            "literal": m.to_string(),
            "value": fmt_complex(ev.value.re, ev.value.im),
            "sample_deviation": format!("{:e}", ev.deviation),
        });
    }
    if let Some(radius) = trunc {
        let z = SiegelPoint::base(1);
        let v = forms::theta_value(&z, &SeriesTruncation::with_radius(radius))
            .map_err(forms_error)?;
        doc["series"] = json!({
            "point": "i",
            "radius": radius,
            "value": fmt_complex(v.re, v.im),
        });
    }
    emit(&to_pretty(&doc)?, out)?;
    eprintln!(
        "theta relation at weight 1/2: {} pairs, worst deviation {:.3e}, {}",
        report.pairs_checked,
        report.worst_deviation,
        if report.pass { "pass" } else { "fail" }
    );
    if !report.pass {
        return Err(CmdError::Verified(format!(
            "worst relation deviation {:.3e} exceeds tolerance {:e}",
            report.worst_deviation, tol
        )));
    }
    Ok(())
}

fn cmd_delta(
    r: f64,
    matrix: Option<&str>,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
    out: &Option<String>,
) -> Result<(), CmdError> {
    require_samples(samples)?;
    if !r.is_finite() {
        return Err(CmdError::Usage(format!("weight must be finite, got {r}")));
    }
    let tol = tolerance(tol, 1e-9)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(SymplecticMatrix, SymplecticMatrix)> = (0..samples)
        .map(|_| (sample::random_sl2(&mut rng, 20), sample::random_sl2(&mut rng, 20)))
        .collect();
    let eval = |m: &SymplecticMatrix| forms::delta_multiplier(r, m).map(|e| e.value);
    let report =
        forms::verify_multiplier_relation(eval, r, &pairs, tol).map_err(forms_error)?;

    let mut doc = json!({
        "command": "delta",
        "weight": r,
        "seed": seed,
        "relation": &report,
    });
    if let Some(lit) = matrix {
        let m = parse_matrix(lit)?;
        if m.genus() != 1 {
            return Err(CmdError::Usage(format!(
                "the discriminant multiplier is genus-1 only, got genus {}",
                m.genus()
            )));
        }
        let ev = forms::delta_multiplier(r, &m).map_err(forms_error)?;
        let d = forms::rademacher_integer(&m).map_err(forms_error)?;
        doc["matrix"] = json!({
            "literal": m.to_string(),
            "value": fmt_complex(ev.value.re, ev.value.im),
            "sample_deviation": format!("{:e}", ev.deviation),
            "rademacher": d,
        });
    }
    emit(&to_pretty(&doc)?, out)?;
    eprintln!(
        "delta relation at weight {r}: {} pairs, worst deviation {:.3e}, {}",
        report.pairs_checked,
        report.worst_deviation,
        if report.pass { "pass" } else { "fail" }
    );
    if !report.pass {
        return Err(CmdError::Verified(format!(
            "worst relation deviation {:.3e} exceeds tolerance {:e}",
            report.worst_deviation, tol
        )));
    }
    Ok(())
}

fn to_pretty(doc: &serde_json::Value) -> Result<String, CmdError> {
    serde_json::to_string_pretty(doc).map_err(|e| CmdError::Verified(e.to_string()))
}
