use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use hoffman_core::active::{cardinality_histogram, enumerate, maximal_sets};
use hoffman_core::analyzer::{
    check_error_bound, check_error_bound_with, check_stability, gen_worstcase, hoffman_exact,
    perturb, verify_certificate,
};
use hoffman_core::sampling::{estimate_sigma, SampleConfig, SamplingError};
use hoffman_core::{EvalMode, HoffmanConstant, InequalitySystem, Level, Perturbation, Scalar};
use sha2::{Digest, Sha256};

use crate::format::{parse_csv_vector, CertificateFile, SystemFile};
use crate::report::{BenchRow, CardinalityCount, EnumeratedSet, ExactValue, Payload, Report};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "hoffman", version, about = "Exact error-bound analysis of linear inequality systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Pos,
    Zero,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Level {
        match l {
            LevelArg::Pos => Level::Positive,
            LevelArg::Zero => Level::Zero,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the system admits an error bound.
    CheckEb { file: PathBuf },
    /// Decide whether the error bound survives small linear perturbations.
    CheckStability { file: PathBuf },
    /// Exact squared Hoffman constant.
    Hoffman { file: PathBuf },
    /// List the realizable active sets at one level.
    Enumerate {
        file: PathBuf,
        #[arg(long, value_enum)]
        level: LevelArg,
    },
    /// Error-bound verdict without the constant; the certificate, if any,
    /// can also be written to a file.
    Certify {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a certificate (bare, or embedded in a report) against a system.
    VerifyCert { file: PathBuf, cert: PathBuf },
    /// Write the perturbed system `a_i + eps u`, `b_i + eps u^T xbar`.
    Perturb {
        file: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        xbar: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Floating-point sampling estimate of the Hoffman constant.
    Estimate {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "box", default_value_t = 10.0)]
        box_radius: f64,
    },
    /// Time active-set enumeration on identity systems of growing size.
    Bench {
        /// Inclusive range such as `1..12`.
        #[arg(long)]
        m_range: String,
        #[arg(long, value_enum, default_value = "pos")]
        level: LevelArg,
        /// Each timing is the minimum over this many runs.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Affirmative,
    Negative,
}

impl Verdict {
    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Affirmative => 0,
            Verdict::Negative => 3,
        }
    }

    fn from_bool(yes: bool) -> Self {
        if yes {
            Verdict::Affirmative
        } else {
            Verdict::Negative
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub verdict: Verdict,
}

struct Input {
    sys: InequalitySystem,
    digest: String,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Input, CliError> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))?;
    let sys = SystemFile::parse(text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Input { sys, digest: hex_digest(&bytes) })
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn one_based(set: &hoffman_core::IndexSet) -> Vec<usize> {
    set.one_based()
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckEb { .. } => "check-eb",
            Command::CheckStability { .. } => "check-stability",
            Command::Hoffman { .. } => "hoffman",
            Command::Enumerate { .. } => "enumerate",
            Command::Certify { .. } => "certify",
            Command::VerifyCert { .. } => "verify-cert",
            Command::Perturb { .. } => "perturb",
            Command::Estimate { .. } => "estimate",
            Command::Bench { .. } => "bench",
        }
    }

    fn args(&self) -> Vec<String> {
        let p = |p: &PathBuf| p.display().to_string();
        match self {
            Command::CheckEb { file } | Command::CheckStability { file } | Command::Hoffman { file } => {
                vec![p(file)]
            }
            Command::Enumerate { file, level } => {
                vec![p(file), "--level".into(), Level::from(*level).as_str().into()]
            }
            Command::Certify { file, out } => {
                let mut v = vec![p(file)];
                if let Some(out) = out {
                    v.extend(["--out".into(), p(out)]);
                }
                v
            }
            Command::VerifyCert { file, cert } => vec![p(file), p(cert)],
            Command::Perturb { file, eps, u, xbar, out } => vec![
                p(file),
                "--eps".into(),
                eps.clone(),
                "--u".into(),
                u.clone(),
                "--xbar".into(),
                xbar.clone(),
                "--out".into(),
                p(out),
            ],
            Command::Estimate { file, samples, seed, box_radius } => vec![
                p(file),
                "--samples".into(),
                samples.to_string(),
                "--seed".into(),
                seed.to_string(),
                "--box".into(),
                box_radius.to_string(),
            ],
            Command::Bench { m_range, level, repeats } => vec![
                "--m-range".into(),
                m_range.clone(),
                "--level".into(),
                Level::from(*level).as_str().into(),
                "--repeats".into(),
                repeats.to_string(),
            ],
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let cmd = &cli.command;
    let (digest, result, certificate, verdict) = match cmd {
        Command::CheckEb { file } => {
            let input = load(file)?;
            let v = check_error_bound(&input.sys)?;
            let payload = Payload::ErrorBound {
                has_error_bound: v.has_error_bound,
                sigma: v.sigma_sq.as_ref().map(|s| s.to_f64().sqrt()),
                sigma_sq: v.sigma_sq.as_ref().map(ExactValue::from),
                checked_sets: v.checked_sets,
                family_size: v.family_size,
            };
            let cert = v.certificate.as_ref().map(CertificateFile::from_certificate);
            (input.digest, payload, cert, Verdict::from_bool(v.has_error_bound))
        }
        Command::Certify { file, out } => {
            let input = load(file)?;
            let v = check_error_bound_with(&input.sys, EvalMode::MaximalOnly, false)?;
            let cert = v.certificate.as_ref().map(CertificateFile::from_certificate);
            if let (Some(out), Some(cert)) = (out, &cert) {
                let text = serde_json::to_string_pretty(cert).expect("certificate serializes");
                write_atomic(out, text.as_bytes())?;
            }
            let payload = Payload::ErrorBound {
                has_error_bound: v.has_error_bound,
                sigma_sq: None,
                sigma: None,
                checked_sets: v.checked_sets,
                family_size: v.family_size,
            };
            (input.digest, payload, cert, Verdict::from_bool(v.has_error_bound))
        }
        Command::CheckStability { file } => {
            let input = load(file)?;
            let v = check_stability(&input.sys)?;
            let payload = Payload::Stability {
                stable: v.stable,
                violating_set: v.violating_set.as_ref().map(one_based),
                lower_bound_sq: v.lower_bound_sq.as_ref().map(ExactValue::from),
                checked_sets: v.checked_sets,
            };
            (input.digest, payload, None, Verdict::from_bool(v.stable))
        }
        Command::Hoffman { file } => {
            let input = load(file)?;
            let h = hoffman_exact(&input.sys)?;
            let status = match h {
                HoffmanConstant::Squared(_) => "finite",
                HoffmanConstant::NoErrorBound => "no_error_bound",
                HoffmanConstant::Infinite => "infinite",
            };
            let payload = Payload::Hoffman {
                status: status.into(),
                sigma_sq: h.squared().map(ExactValue::from),
            };
            let verdict = Verdict::from_bool(h != HoffmanConstant::NoErrorBound);
            (input.digest, payload, None, verdict)
        }
        Command::Enumerate { file, level } => {
            let input = load(file)?;
            let family = enumerate(&input.sys, (*level).into());
            let payload = Payload::Enumerate {
                level: Level::from(*level).as_str().into(),
                count: family.len(),
                sets: family
                    .entries()
                    .iter()
                    .map(|(set, w)| EnumeratedSet {
                        set: set.one_based(),
                        witness: w.iter().map(Scalar::to_string).collect(),
                    })
                    .collect(),
                maximal: maximal_sets(&family).iter().map(one_based).collect(),
                cardinalities: cardinality_histogram(&family)
                    .into_iter()
                    .map(|(size, count)| CardinalityCount { size, count })
                    .collect(),
            };
            (input.digest, payload, None, Verdict::Affirmative)
        }
        Command::VerifyCert { file, cert } => {
            let input = load(file)?;
            let bytes = read_bytes(cert)?;
            let cert_file = parse_certificate(&bytes)?;
            let parsed = cert_file.to_certificate(input.sys.m())?;
            let (valid, reason) = match parsed {
                None => (false, Some("active set is not a valid index set for this system".into())),
                Some(c) if verify_certificate(&input.sys, &c) => (true, None),
                Some(_) => (false, Some("certificate does not check out".into())),
            };
            let digest = format!("{}:{}", input.digest, hex_digest(&bytes));
            (digest, Payload::VerifyCertificate { valid, reason }, Some(cert_file), Verdict::from_bool(valid))
        }
        Command::Perturb { file, eps, u, xbar, out } => {
            let input = load(file)?;
            let epsilon: Scalar = eps.trim().parse().map_err(|e: hoffman_core::CoreError| CliError::Input(e.to_string()))?;
            let p = Perturbation::new(epsilon.clone(), parse_csv_vector(u)?, parse_csv_vector(xbar)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let perturbed = perturb(&input.sys, &p).map_err(|e| CliError::Input(e.to_string()))?;
            let text = serde_json::to_string_pretty(&SystemFile::from_system(&perturbed))
                .expect("system serializes");
            write_atomic(out, text.as_bytes())?;
            let payload = Payload::Perturb {
                output: out.display().to_string(),
                epsilon: ExactValue::from(&epsilon),
            };
            (input.digest, payload, None, Verdict::Affirmative)
        }
        Command::Estimate { file, samples, seed, box_radius } => {
            let input = load(file)?;
            let cfg = SampleConfig::new(*samples, *seed, *box_radius)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let (sigma_estimate, note) = match estimate_sigma(&input.sys, &cfg) {
                Ok(s) => (Some(s), None),
                Err(e @ (SamplingError::NoInfeasibleSample | SamplingError::EmptyPolyhedron)) => {
                    (None, Some(e.to_string()))
                }
                Err(e) => return Err(CliError::Internal(e.to_string())),
            };
            let payload = Payload::Estimate {
                samples: *samples,
                seed: *seed,
                box_radius: *box_radius,
                sigma_estimate,
                note,
            };
            (input.digest, payload, None, Verdict::Affirmative)
        }
        Command::Bench { m_range, level, repeats } => {
            let (lo, hi) = parse_range(m_range)?;
            if *repeats == 0 {
                return Err(CliError::Input("--repeats must be positive".into()));
            }
            let payload = bench(lo, hi, (*level).into(), *repeats);
            let ok = matches!(payload, Payload::Bench { counts_match: true, .. });
            (hex_digest(cmd.args().join(" ").as_bytes()), payload, None, Verdict::from_bool(ok))
        }
    };
    let report = Report {
        command: cmd.name().into(),
        args: cmd.args(),
        input_digest: digest,
        result,
        certificate,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Outcome { report, verdict })
}

/// Accepts a bare certificate or a report carrying one.
fn parse_certificate(bytes: &[u8]) -> Result<CertificateFile, CliError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| CliError::Input(format!("malformed certificate: {e}")))?;
    let inner = match value.get("certificate") {
        Some(serde_json::Value::Null) => {
            return Err(CliError::Input("report carries no certificate".into()))
        }
        Some(c) => c.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| CliError::Input(format!("malformed certificate: {e}")))
}

/// `A..B` or `A..=B`, both inclusive, with `1 <= A <= B`.
pub fn parse_range(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("bad range {text:?}, expected A..B"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo: usize = a.trim().parse().map_err(|_| bad())?;
    let hi: usize = b.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn bench(lo: usize, hi: usize, level: Level, repeats: usize) -> Payload {
    let mut rows = Vec::new();
    for m in lo..=hi {
        let sys = gen_worstcase(m);
        let mut best = f64::INFINITY;
        let mut size = 0;
        for _ in 0..repeats {
            let t = Instant::now();
            size = enumerate(&sys, level).len();
            best = best.min(t.elapsed().as_secs_f64() * 1e3);
        }
        rows.push(BenchRow { m, family_size: size, expected: (1u64 << m) - 1, elapsed_ms: best });
    }
    let counts_match = rows.iter().all(|r| r.family_size as u64 == r.expected);
    let log_log_slopes = segment_slopes(&rows);
    let superpolynomial =
        log_log_slopes.len() >= 2 && log_log_slopes.windows(2).all(|w| w[1] > w[0]);
    Payload::Bench {
        level: level.as_str().into(),
        repeats,
        rows,
        counts_match,
        log_log_slopes,
        superpolynomial,
    }
}

/// Splits the rows into three contiguous groups of at least two points and
/// fits `ln t = k ln m + c` on each. A polynomial has a bounded `k`; an
/// exponential keeps raising it. Ranges with fewer than six points yield no
/// slopes.
fn segment_slopes(rows: &[BenchRow]) -> Vec<f64> {
    let n = rows.len();
    if n < 6 {
        return Vec::new();
    }
    let bounds = [0, n / 3, 2 * n / 3, n];
    bounds
        .windows(2)
        .map(|w| {
            let pts: Vec<(f64, f64)> = rows[w[0]..w[1]]
                .iter()
                .map(|r| ((r.m as f64).ln(), r.elapsed_ms.max(1e-6).ln()))
                .collect();
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        })
        .collect()
}
