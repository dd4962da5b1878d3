//! Command-line front end.
//!
//! Every subcommand reads JSON files and writes one JSON document to
//! stdout; a short human-readable summary or error goes to stderr. Exit
//! codes: 0 success, 2 invalid input, 3 mathematical refusal (for example a
//! unitary with no commuting conjugation), 4 numerical tolerance failure.

use std::fs;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::antilinear::{
    commutation_defect, conjugation_report, AntilinearOperator, ConjugationReport,
};
use crate::conjugation_family::{
    canonical_conjugation, decompose, default_membership_threshold, sample, verify_membership,
    ConjugationParams, MembershipReport,
};
use crate::error::Error;
use crate::linalg::{frobenius, rng_from_seed, unitarity_defect, CMatrix, C64};
use crate::measure::AtomicMeasure;
use crate::shift::{
    grid_angle, phi_transpose_defect, phi_unitarity_defect, psi_conjugation, shift_conjugation,
    GridDefects, GridModel, PhiParams,
};
use crate::spectral::{check_selfdual, SpectralTolerance};
use crate::transforms::{FourBlockModel, FourierParams, TwoBlockModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotSelfDual(_) | Error::NotAbsolutelyContinuous { .. } => EXIT_REFUSED,
        Error::NotAMember(_) | Error::Tolerance(_) => EXIT_TOLERANCE,
        _ => EXIT_INVALID,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::NotSquare { .. } => "not_square",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::EmptyDimension => "empty_dimension",
        Error::NonFinite { .. } => "non_finite",
        Error::NotUnitary { .. } => "not_unitary",
        Error::NotSymmetric { .. } => "not_symmetric",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::NegativeEigenvalue { .. } => "negative_eigenvalue",
        Error::NotAConjugation(_) => "not_a_conjugation",
        Error::NotSelfDual(_) => "not_self_dual",
        Error::NotAbsolutelyContinuous { .. } => "not_absolutely_continuous",
        Error::NotAMember(_) => "not_a_member",
        Error::InvalidMeasure(_) => "invalid_measure",
        Error::InvalidParams(_) => "invalid_params",
        Error::Tolerance(_) => "tolerance",
    }
}

/// A dense complex matrix as `{"rows", "cols", "data": [[[re, im], …], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    /// Checks the declared shape and finiteness.
    pub fn to_matrix(&self) -> Result<CMatrix, String> {
        if self.data.len() != self.rows {
            return Err(format!(
                "data: expected {} rows, found {}",
                self.rows,
                self.data.len()
            ));
        }
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(format!(
                    "data[{i}]: expected {} columns, found {}",
                    self.cols,
                    row.len()
                ));
            }
            for (j, z) in row.iter().enumerate() {
                if !(z[0].is_finite() && z[1].is_finite()) {
                    return Err(format!("data[{i}][{j}]: entry is not finite"));
                }
            }
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            C64::new(self.data[i][j][0], self.data[i][j][1])
        }))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cconj",
    about = "Commuting conjugations of unitary matrices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether U admits a commuting conjugation.
    Check { unitary: String },
    /// Construct the canonical commuting conjugation of U.
    Canonical {
        unitary: String,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Draw a random commuting conjugation of U.
    Sample {
        unitary: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Check that C is a conjugation commuting with U.
    Verify {
        unitary: String,
        conjugation: String,
        /// Absolute defect threshold (default 1e-8·n).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Recover the free parameters of C relative to U's canonical form.
    Decompose {
        unitary: String,
        conjugation: String,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Write A as a multiple of a sum of four unitaries.
    Fourunit { matrix: String },
    /// Operations on atomic measures.
    Measure {
        #[command(subcommand)]
        op: MeasureOp,
    },
    /// Conjugations of the shift on the order-M roots of unity.
    ShiftDemo {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = Preset::Sincos)]
        preset: Preset,
    },
    /// Random conjugation commuting with the Fourier model.
    FourierDemo {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random conjugation commuting with the Hilbert model.
    HilbertDemo {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum MeasureOp {
    /// The reflected measure μ^c.
    Reflect { measure: String },
    /// The derivative dμ^c/dμ at every atom.
    Rn { measure: String },
    /// Atomwise minimum.
    Meet { left: String, right: String },
    /// Atomwise sum.
    Join { left: String, right: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Degree 1: u(e^{it}) = e^{i cos t}. Degree 2: s = sin.
    Sincos,
    /// Degree 1: u(e^{it}) = e^{iλ|t|}. Degree 2: s ≡ 0.6, α = λ|τ|; λ = 1.5.
    Lambda,
}

const PRESET_LAMBDA: f64 = 1.5;
const PRESET_S0: f64 = 0.6;

/// A failure with its exit code, JSON kind and message.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Self {
            code: exit_code(&err),
            kind: error_kind(&err).to_string(),
            message: err.to_string(),
        }
    }
}

impl Failure {
    fn invalid(kind: &str, message: String) -> Self {
        Self {
            code: EXIT_INVALID,
            kind: kind.to_string(),
            message,
        }
    }
}

type CliResult = std::result::Result<Outcome, Failure>;

/// Successful output: the JSON document, an exit code (0, or 4 for a
/// failed verification) and a one-line summary.
struct Outcome {
    json: String,
    code: i32,
    summary: String,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn ok<T: Serialize>(value: &T, summary: String) -> CliResult {
    Ok(Outcome {
        json: to_json(value),
        code: EXIT_OK,
        summary,
    })
}

fn read_json<T: DeserializeOwned>(path: &str) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid("io", format!("cannot read {path}: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let at = if at == "." {
            "document root".to_string()
        } else {
            format!("field `{at}`")
        };
        Failure::invalid("malformed_json", format!("{path}: {at}: {}", e.inner()))
    })
}

fn read_matrix(path: &str) -> std::result::Result<CMatrix, Failure> {
    let file: MatrixFile = read_json(path)?;
    file.to_matrix()
        .map_err(|m| Failure::invalid("malformed_json", format!("{path}: {m}")))
}

fn read_conjugation(path: &str) -> std::result::Result<AntilinearOperator, Failure> {
    Ok(AntilinearOperator::new(read_matrix(path)?)?)
}

fn write_json<T: Serialize>(path: &str, value: &T) -> std::result::Result<(), Failure> {
    fs::write(path, to_json(value))
        .map_err(|e| Failure::invalid("io", format!("cannot write {path}: {e}")))
}

#[derive(Serialize)]
struct MismatchJson {
    eigenvalue: [f64; 2],
    multiplicity: usize,
    conjugate_multiplicity: usize,
}

#[derive(Serialize)]
struct CheckJson {
    selfdual: bool,
    dimension: usize,
    mismatches: Vec<MismatchJson>,
}

#[derive(Serialize)]
struct ConjugationJson {
    dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conjugation: Option<MatrixFile>,
    report: MembershipReport,
}

#[derive(Serialize)]
struct PairJson {
    xi: [f64; 2],
    multiplicity: usize,
}

#[derive(Serialize)]
struct ParamsJson {
    pairs: Vec<PairJson>,
    ell: usize,
    kay: usize,
    w: MatrixFile,
    v_blocks: Vec<MatrixFile>,
    q_plus: MatrixFile,
    q_minus: MatrixFile,
}

#[derive(Serialize)]
struct DecomposeJson {
    dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ParamsJson>,
}

#[derive(Serialize)]
struct FourUnitJson {
    scale: f64,
    factors: Vec<MatrixFile>,
    reconstruction_residual: f64,
    unitarity_defects: Vec<f64>,
}

#[derive(Serialize)]
struct RnAtomJson {
    theta: f64,
    weight: f64,
    partner_theta: f64,
    h: f64,
}

#[derive(Serialize)]
struct RnJson {
    atoms: Vec<RnAtomJson>,
}

#[derive(Serialize)]
struct ShiftJson {
    order: usize,
    degree: usize,
    preset: String,
    defects: GridDefects,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_unitarity_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_transpose_defect: Option<f64>,
}

#[derive(Serialize)]
struct TransformJson {
    size: usize,
    seed: u64,
    conjugation: ConjugationReport,
    commutation_defect: f64,
    decomposition_error: f64,
}

fn conjugation_json(
    u: &CMatrix,
    c: &AntilinearOperator,
    seed: Option<u64>,
    output: Option<String>,
) -> std::result::Result<ConjugationJson, Failure> {
    let n = u.nrows();
    let report = verify_membership(u, c, default_membership_threshold(n))?;
    let conjugation = match &output {
        Some(path) => {
            write_json(path, &MatrixFile::from_matrix(c.matrix()))?;
            None
        }
        None => Some(MatrixFile::from_matrix(c.matrix())),
    };
    Ok(ConjugationJson {
        dimension: n,
        seed,
        output,
        conjugation,
        report,
    })
}

fn params_json(cf: &crate::spectral::CanonicalForm, p: &ConjugationParams) -> ParamsJson {
    ParamsJson {
        pairs: cf
            .layout
            .pairs
            .iter()
            .map(|q| PairJson {
                xi: [q.xi.re, q.xi.im],
                multiplicity: q.multiplicity,
            })
            .collect(),
        ell: cf.layout.ell,
        kay: cf.layout.kay,
        w: MatrixFile::from_matrix(&cf.w),
        v_blocks: p.v_blocks.iter().map(MatrixFile::from_matrix).collect(),
        q_plus: MatrixFile::from_matrix(&p.q_plus),
        q_minus: MatrixFile::from_matrix(&p.q_minus),
    }
}

fn dispatch(cmd: Command) -> CliResult {
    let tol = SpectralTolerance::default();
    match cmd {
        Command::Check { unitary } => {
            let u = read_matrix(&unitary)?;
            let report = check_selfdual(&u, tol)?;
            let summary = if report.self_dual {
                "U is self-dual: commuting conjugations exist".to_string()
            } else {
                format!("C_c(U) is empty: {}", report.describe())
            };
            ok(
                &CheckJson {
                    selfdual: report.self_dual,
                    dimension: u.nrows(),
                    mismatches: report
                        .mismatches
                        .iter()
                        .map(|m| MismatchJson {
                            eigenvalue: [m.eigenvalue.re, m.eigenvalue.im],
                            multiplicity: m.multiplicity,
                            conjugate_multiplicity: m.conjugate_multiplicity,
                        })
                        .collect(),
                },
                summary,
            )
        }
        Command::Canonical { unitary, output } => {
            let u = read_matrix(&unitary)?;
            let c = canonical_conjugation(&u, tol)?;
            let out = conjugation_json(&u, &c, None, output)?;
            let summary = format!(
                "canonical conjugation of a {}x{} unitary",
                u.nrows(),
                u.nrows()
            );
            ok(&out, summary)
        }
        Command::Sample {
            unitary,
            seed,
            output,
        } => {
            let u = read_matrix(&unitary)?;
            let c = sample(&u, seed, tol)?;
            let out = conjugation_json(&u, &c, Some(seed), output)?;
            ok(&out, format!("sampled commuting conjugation (seed {seed})"))
        }
        Command::Verify {
            unitary,
            conjugation,
            tol: threshold,
        } => {
            let u = read_matrix(&unitary)?;
            let c = read_conjugation(&conjugation)?;
            if let Some(t) = threshold {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Failure::invalid(
                        "invalid_params",
                        format!("--tol {t} must be non-negative"),
                    ));
                }
            }
            let threshold = threshold.unwrap_or(default_membership_threshold(u.nrows()));
            let report = verify_membership(&u, &c, threshold)?;
            let (code, summary) = if report.member {
                (EXIT_OK, "C is a conjugation commuting with U".to_string())
            } else {
                (
                    EXIT_TOLERANCE,
                    format!("verification failed: a defect exceeds {threshold:.3e}"),
                )
            };
            Ok(Outcome {
                json: to_json(&report),
                code,
                summary,
            })
        }
        Command::Decompose {
            unitary,
            conjugation,
            output,
        } => {
            let u = read_matrix(&unitary)?;
            let c = read_conjugation(&conjugation)?;
            let (cf, p) = decompose(&u, &c, tol)?;
            let params = params_json(&cf, &p);
            let out = match &output {
                Some(path) => {
                    write_json(path, &params)?;
                    DecomposeJson {
                        dimension: u.nrows(),
                        output: output.clone(),
                        params: None,
                    }
                }
                None => DecomposeJson {
                    dimension: u.nrows(),
                    output: None,
                    params: Some(params),
                },
            };
            ok(
                &out,
                format!("decomposed into {} pair block(s)", cf.layout.pairs.len()),
            )
        }
        Command::Fourunit { matrix } => {
            let a = read_matrix(&matrix)?;
            let split = crate::linalg::four_unitary_split(&a)?;
            let residual = frobenius(&(split.reconstruct() - &a));
            let defects = split
                .factors
                .iter()
                .map(|f| unitarity_defect(f).expect("square"))
                .collect();
            ok(
                &FourUnitJson {
                    scale: split.scale,
                    factors: split.factors.iter().map(MatrixFile::from_matrix).collect(),
                    reconstruction_residual: residual,
                    unitarity_defects: defects,
                },
                format!("split with scale {:.6e}", split.scale),
            )
        }
        Command::Measure { op } => measure(op),
        Command::ShiftDemo {
            order,
            degree,
            preset,
        } => shift_demo(order, degree, preset),
        Command::FourierDemo { size, seed } => {
            let model = FourBlockModel::new(size)?;
            let mut rng = rng_from_seed(seed);
            let p = FourierParams::random(model.class_size(), &mut rng)?;
            let c = model.conjugation(&p, tol.input)?;
            let back = model.decompose(&c, tol.input)?;
            ok(
                &TransformJson {
                    size,
                    seed,
                    conjugation: conjugation_report(&c),
                    commutation_defect: commutation_defect(&c, &model.diagonal(), tol.input)?,
                    decomposition_error: back.max_abs_diff(&p),
                },
                format!("random Fourier-commuting conjugation, N = {size}"),
            )
        }
        Command::HilbertDemo { size, seed } => {
            let model = TwoBlockModel::new(size)?;
            let mut rng = rng_from_seed(seed);
            let ui = crate::linalg::haar_unitary_with(model.half(), &mut rng)?;
            let c = model.conjugation(&ui, tol.input)?;
            let back = model.decompose(&c, tol.input)?;
            ok(
                &TransformJson {
                    size,
                    seed,
                    conjugation: conjugation_report(&c),
                    commutation_defect: commutation_defect(&c, &model.diagonal(), tol.input)?,
                    decomposition_error: (back - ui).iter().map(|z| z.norm()).fold(0.0, f64::max),
                },
                format!("random Hilbert-commuting conjugation, N = {size}"),
            )
        }
    }
}

fn measure(op: MeasureOp) -> CliResult {
    match op {
        MeasureOp::Reflect { measure } => {
            let mu: AtomicMeasure = read_json(&measure)?;
            ok(&mu.reflect(), format!("reflected {} atom(s)", mu.len()))
        }
        MeasureOp::Rn { measure } => {
            let mu: AtomicMeasure = read_json(&measure)?;
            let rn = mu.radon_nikodym()?;
            let atoms = mu
                .atoms()
                .iter()
                .enumerate()
                .map(|(k, a)| RnAtomJson {
                    theta: a.theta,
                    weight: a.weight,
                    partner_theta: mu.atoms()[rn.partner[k]].theta,
                    h: rn.h[k],
                })
                .collect();
            ok(
                &RnJson { atoms },
                "reflection is absolutely continuous".to_string(),
            )
        }
        MeasureOp::Meet { left, right } => {
            let (a, b): (AtomicMeasure, AtomicMeasure) = (read_json(&left)?, read_json(&right)?);
            ok(&a.meet(&b), "atomwise minimum".to_string())
        }
        MeasureOp::Join { left, right } => {
            let (a, b): (AtomicMeasure, AtomicMeasure) = (read_json(&left)?, read_json(&right)?);
            ok(&a.join(&b), "atomwise sum".to_string())
        }
    }
}

fn shift_demo(order: usize, degree: usize, preset: Preset) -> CliResult {
    let name = match preset {
        Preset::Sincos => "sincos",
        Preset::Lambda => "lambda",
    };
    let out = match degree {
        1 => {
            let u = GridModel::new(
                order,
                (0..order)
                    .map(|j| {
                        let t = grid_angle(order, j);
                        let phase = match preset {
                            Preset::Sincos => t.cos(),
                            Preset::Lambda => PRESET_LAMBDA * t.abs(),
                        };
                        C64::from_polar(1.0, phase)
                    })
                    .collect(),
            )?;
            ShiftJson {
                order,
                degree,
                preset: name.into(),
                defects: shift_conjugation(&u)?.defects(),
                phi_unitarity_defect: None,
                phi_transpose_defect: None,
            }
        }
        2 => {
            if !order.is_multiple_of(2) {
                return Err(Error::InvalidParams(format!(
                    "degree 2 needs an even order, got {order}"
                ))
                .into());
            }
            let p = match preset {
                Preset::Sincos => PhiParams::sincos(order / 2),
                Preset::Lambda => PhiParams::lambda(order / 2, PRESET_S0, PRESET_LAMBDA),
            };
            let c = psi_conjugation(&p, order)?;
            ShiftJson {
                order,
                degree,
                preset: name.into(),
                defects: c.to_fibers().defects(),
                phi_unitarity_defect: Some(phi_unitarity_defect(c.phi())),
                phi_transpose_defect: Some(phi_transpose_defect(c.phi())),
            }
        }
        _ => {
            return Err(Error::InvalidParams(format!(
                "presets exist for degree 1 and 2, not {degree}"
            ))
            .into());
        }
    };
    let summary = format!("max defect {:.3e}", out.defects.max());
    ok(&out, summary)
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: ErrorBody<'a>,
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit code, stdout and stderr.
pub fn run<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    (EXIT_OK, e.to_string(), String::new())
                }
                _ => {
                    let message = e.to_string();
                    let json = to_json(&ErrorJson {
                        error: ErrorBody {
                            kind: "usage",
                            message: message.trim_end(),
                        },
                    });
                    (EXIT_INVALID, json, message)
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(out) => (out.code, out.json, out.summary + "\n"),
        Err(f) => {
            let json = to_json(&ErrorJson {
                error: ErrorBody {
                    kind: &f.kind,
                    message: &f.message,
                },
            });
            (f.code, json, format!("error: {}\n", f.message))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diagonal, haar_unitary};

    fn temp_dir(name: &str) -> std::path::PathBuf {
        let dir =
            std::env::temp_dir().join(format!("cconj-cli-unit-{name}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_matrix(dir: &std::path::Path, name: &str, m: &CMatrix) -> String {
        let path = dir.join(name);
        fs::write(&path, to_json(&MatrixFile::from_matrix(m))).unwrap();
        path.to_string_lossy().into_owned()
    }

    #[test]
    fn matrix_file_round_trip() {
        let m = haar_unitary(3, 1).unwrap();
        let file = MatrixFile::from_matrix(&m);
        let text = to_json(&file);
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
        let ragged = MatrixFile {
            rows: 2,
            cols: 2,
            data: vec![vec![[1.0, 0.0]; 2], vec![[1.0, 0.0]]],
        };
        assert!(ragged.to_matrix().unwrap_err().contains("data[1]"));
    }

    #[test]
    fn exit_codes_follow_the_taxonomy() {
        assert_eq!(exit_code(&Error::NotSelfDual("x".into())), EXIT_REFUSED);
        assert_eq!(
            exit_code(&Error::NotAbsolutelyContinuous { theta: 1.0 }),
            EXIT_REFUSED
        );
        assert_eq!(exit_code(&Error::NotAMember("x".into())), EXIT_TOLERANCE);
        assert_eq!(exit_code(&Error::Tolerance("x".into())), EXIT_TOLERANCE);
        assert_eq!(exit_code(&Error::NotAConjugation("x".into())), EXIT_INVALID);
        assert_eq!(exit_code(&Error::EmptyDimension), EXIT_INVALID);
    }

    #[test]
    fn check_and_canonical_examples() {
        let dir = temp_dir("check");
        let good = write_matrix(&dir, "good.json", &diagonal(&[c(0., 1.), c(0., -1.)]));
        let (code, out, _) = run(["cconj", "check", &good]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["selfdual"], true);

        let bad = write_matrix(&dir, "bad.json", &diagonal(&[c(0., 1.), c(0., 1.)]));
        let (code, out, err) = run(["cconj", "canonical", &bad]);
        assert_eq!(code, 3);
        assert!(
            err.contains("C_c(U) is empty: eigenvalue i multiplicity 2, conjugate multiplicity 0")
        );
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["error"]["kind"], "not_self_dual");
    }

    #[test]
    fn malformed_json_names_the_field() {
        let dir = temp_dir("malformed");
        let path = dir.join("m.json");
        fs::write(&path, r#"{"rows": 1, "cols": 1, "data": [[[1.0, "x"]]]}"#).unwrap();
        let (code, _, err) = run(["cconj", "check", path.to_str().unwrap()]);
        assert_eq!(code, 2);
        assert!(err.contains("data[0][0][1]"), "{err}");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["cconj", "bogus"]).0, 2);
        assert_eq!(
            run(["cconj", "shift-demo", "--order", "8", "--degree", "3"]).0,
            2
        );
        assert_eq!(run(["cconj", "--help"]).0, 0);
    }
}
