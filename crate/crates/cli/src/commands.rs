use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ccfusion::instance::{self, AnyInstance, Entry, Instance, InstanceError, InstanceFile, DEFAULT_SAMPLES};
use ccfusion::random::{self, ControlConstraint, RNG_ALGORITHM};
use ccfusion::theorems::{self, TheoremId, TheoremReport, TransformMode};
use ccfusion::{Field, FrameError, Scalar, Tolerances};
use nalgebra::DVector;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::report::*;
use crate::{CliError, Cli, Command, Common, FieldArg, PerturbKind, EXIT_DEGENERATE, EXIT_ERROR, EXIT_OK};

const MIN_DIM: usize = 2;
const MAX_DIM: usize = 64;

macro_rules! each_field {
    ($inst:expr, $i:ident => $body:expr) => {
        match $inst {
            AnyInstance::Real($i) => $body,
            AnyInstance::Complex($i) => $body,
        }
    };
}

struct Loaded {
    path: String,
    sha256: String,
    instance: AnyInstance,
}

impl Loaded {
    fn echo(&self) -> InputEcho {
        InputEcho {
            path: self.path.clone(),
            sha256: self.sha256.clone(),
        }
    }

    fn missing(&self, source: InstanceError) -> CliError {
        CliError::Instance {
            path: self.path.clone(),
            source,
        }
    }
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load(path: &Path, tol: &Tolerances) -> Result<Loaded, CliError> {
    let shown = path.display().to_string();
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    let sha256 = sha256(&bytes);
    let parsed = std::str::from_utf8(&bytes)
        .map_err(|e| InstanceError::Json {
            line: 1,
            column: 1,
            message: format!("file is not UTF-8: {e}"),
        })
        .and_then(InstanceFile::from_json)
        .and_then(|file| file.load(tol));
    match parsed {
        Ok(instance) => Ok(Loaded {
            path: shown,
            sha256,
            instance,
        }),
        Err(source) => Err(CliError::Instance { path: shown, source }),
    }
}

/// Files as given; directories contribute their `*.json` entries in name order.
fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| io_error(p, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn seed_for(common: &Common, inst: &AnyInstance) -> u64 {
    common.seed.or(inst.params().seed).unwrap_or(0)
}

fn samples_for(common: &Common, inst: &AnyInstance) -> usize {
    common.samples.or(inst.params().samples).unwrap_or(DEFAULT_SAMPLES)
}

pub(crate) fn dispatch(cli: &Cli, tol: &Tolerances) -> Result<(RunReport, u8), CliError> {
    let start = Instant::now();
    let mut inputs = Vec::new();
    let mut results = Vec::new();
    let (name, code) = match &cli.command {
        Command::Bounds { instance } => {
            let l = load(instance, tol)?;
            inputs.push(l.echo());
            let report = each_field!(&l.instance, i => i.frame.bounds(tol));
            let (dim, subspaces) = each_field!(&l.instance, i => (i.frame.dim(), i.frame.len()));
            results.push(Body::Bounds(BoundsBody {
                instance: l.path.clone(),
                field: l.instance.field(),
                dim,
                subspaces,
                report,
            }));
            ("bounds", degenerate_unless(report.classification.is_frame()))
        }
        Command::Classify { instance } => {
            let l = load(instance, tol)?;
            inputs.push(l.echo());
            let body = each_field!(&l.instance, i => classify(&l.path, i, tol));
            let code = degenerate_unless(body.classification.is_frame());
            results.push(Body::Classify(body));
            ("classify", code)
        }
        Command::Reconstruct { instance, vector, random } => {
            if vector.is_none() && !random {
                return Err(CliError::Usage("reconstruct needs --vector or --random".into()));
            }
            let l = load(instance, tol)?;
            inputs.push(l.echo());
            let seed = random.then(|| seed_for(&cli.common, &l.instance));
            let body = each_field!(&l.instance, i => reconstruct(&l.path, i, vector.as_deref(), seed, tol))?;
            results.push(Body::Reconstruct(body));
            ("reconstruct", EXIT_OK)
        }
        Command::Qdual { instance } => {
            let l = load(instance, tol)?;
            inputs.push(l.echo());
            let seed = seed_for(&cli.common, &l.instance);
            let body = each_field!(&l.instance, i => qdual(&l, i, seed, tol))?;
            let code = if body.report.passes() { EXIT_OK } else { EXIT_ERROR };
            results.push(Body::QDual(body));
            ("qdual", code)
        }
        Command::Perturb { instance, kind } => {
            let l = load(instance, tol)?;
            inputs.push(l.echo());
            let ids = match kind {
                PerturbKind::Subspace => vec![TheoremId::SubspacePerturbation],
                PerturbKind::Lambda => vec![TheoremId::LambdaPerturbation],
                PerturbKind::All => vec![TheoremId::SubspacePerturbation, TheoremId::LambdaPerturbation],
            };
            let body = theorems_body(&cli.common, &l, &ids, false, tol);
            let code = theorems_code(&body);
            results.push(Body::Theorems(body));
            ("perturb", code)
        }
        Command::Verify { instances, theorem, all } => {
            let ids: Vec<TheoremId> = match theorem {
                Some(id) => vec![*id],
                None => TheoremId::ALL.to_vec(),
            };
            let mut code = EXIT_OK;
            for path in expand(instances)? {
                let l = load(&path, tol)?;
                inputs.push(l.echo());
                let body = theorems_body(&cli.common, &l, &ids, *all, tol);
                code = code.max(theorems_code(&body));
                results.push(Body::Theorems(body));
            }
            ("verify", code)
        }
        Command::Generate {
            dim,
            count,
            constraint,
            field,
            out,
        } => {
            let field = match field {
                FieldArg::Real => Field::Real,
                FieldArg::Complex => Field::Complex,
            };
            let seed = cli.common.seed.unwrap_or(0);
            for file in generate(dim, *count, *constraint, field, out, seed, tol)? {
                results.push(Body::Generated(file));
            }
            ("generate", EXIT_OK)
        }
    };
    let report = RunReport {
        command: name,
        rng: RNG_ALGORITHM,
        tolerances: *tol,
        inputs,
        results,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((report, code))
}

fn degenerate_unless(frame: bool) -> u8 {
    if frame {
        EXIT_OK
    } else {
        EXIT_DEGENERATE
    }
}

fn classify<T: Scalar>(path: &str, inst: &Instance<T>, tol: &Tolerances) -> ClassifyBody {
    let report = inst.frame.bounds(tol);
    let failures: Vec<GateFailure> = inst
        .frame
        .gate_status(tol)
        .into_iter()
        .enumerate()
        .filter_map(|(index, status)| {
            status.err().map(|e| GateFailure {
                index,
                reason: e.to_string(),
            })
        })
        .collect();
    ClassifyBody {
        instance: path.to_owned(),
        classification: report.classification,
        form_is_real: report.form_is_real,
        hermitian_residual: report.hermitian_residual,
        controls_residual: inst.frame.controls().squared_residual(),
        sqrt_gate_passed: failures.is_empty(),
        sqrt_gate_failures: failures,
    }
}

fn parse_vector<T: Scalar>(text: &str, n: usize) -> Result<DVector<T>, CliError> {
    let entries: Vec<Entry> = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--vector: {e}")))?;
    if entries.len() != n {
        return Err(FrameError::DimensionMismatch {
            expected: n,
            found: entries.len(),
        }
        .into());
    }
    let values = entries
        .into_iter()
        .enumerate()
        .map(|(k, e)| e.to_scalar::<T>(&format!("vector[{k}]")))
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Usage(format!("--vector: {e}")))?;
    Ok(DVector::from_vec(values))
}

fn reconstruct<T: Scalar>(
    path: &str,
    inst: &Instance<T>,
    vector: Option<&str>,
    seed: Option<u64>,
    tol: &Tolerances,
) -> Result<ReconstructBody, CliError> {
    let n = inst.frame.dim();
    let f: DVector<T> = match (vector, seed) {
        (Some(text), _) => parse_vector(text, n)?,
        (None, Some(seed)) => random::gaussian_vector(&mut random::rng(seed), n),
        (None, None) => unreachable!("checked by the caller"),
    };
    if f.norm() == 0.0 {
        return Err(CliError::Usage("--vector must be nonzero".into()));
    }
    let solver = inst.frame.reconstructor(tol)?;
    let g = inst.frame.frame_operator().as_matrix() * &f;
    let back = solver.solve(&g)?;
    Ok(ReconstructBody {
        instance: path.to_owned(),
        source: if vector.is_some() { "given" } else { "random" },
        seed: if vector.is_some() { None } else { seed },
        relative_error: (back - &f).norm() / f.norm(),
        condition_number: solver.condition_number(),
    })
}

fn qdual<T: Scalar>(l: &Loaded, inst: &Instance<T>, seed: u64, tol: &Tolerances) -> Result<QDualBody, CliError> {
    let w_tilde = inst.second().map_err(|e| l.missing(e))?;
    let q = theorems::construct_q_dual(&inst.frame, w_tilde, seed, tol)?;
    let report = theorems::verify_q_dual_bounds(&inst.frame, w_tilde, &q, tol)?;
    Ok(QDualBody {
        instance: l.path.clone(),
        seed,
        q_rows: q.q.nrows(),
        q_cols: q.q.ncols(),
        q_norm: q.q_norm,
        defect: q.defect,
        equivalence: q.equivalence,
        report,
    })
}

fn run_theorem<T: Scalar>(
    l: &Loaded,
    inst: &Instance<T>,
    id: TheoremId,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> Result<TheoremReport, CliError> {
    let w = &inst.frame;
    let second = || inst.second().map_err(|e| l.missing(e));
    let report = match id {
        TheoremId::TransformAdjoint | TheoremId::TransformUnitary => {
            let (u, _) = inst.transform().map_err(|e| l.missing(e))?;
            let mode = if id == TheoremId::TransformAdjoint {
                TransformMode::AdjointCommuting
            } else {
                TransformMode::UnitaryCommuting
            };
            theorems::verify_transform(w, u, mode, tol)?
        }
        TheoremId::ApproximateDual => theorems::verify_approximate_dual(w, second()?, tol)?,
        TheoremId::SubspacePerturbation => {
            let z = second()?;
            theorems::verify_subspace_perturbation(w, z.family().subspaces(), inst.params.epsilon, tol)?
        }
        TheoremId::LambdaPerturbation => {
            let z = second()?;
            let params = inst.perturbation_params().map_err(|e| l.missing(e))?;
            theorems::verify_lambda_perturbation(w, z, &params, samples, seed, tol)?
        }
        TheoremId::QDual => {
            let w_tilde = second()?;
            let q = theorems::construct_q_dual(w, w_tilde, seed, tol)?;
            theorems::verify_q_dual_bounds(w, w_tilde, &q, tol)?
        }
        TheoremId::Factorization => theorems::verify_factorization(w, tol)?,
    };
    Ok(report)
}

/// Under `--all` a transform theorem only runs when the instance's transform
/// has the matching mode.
fn mode_mismatch<T: Scalar>(inst: &Instance<T>, id: TheoremId) -> Option<String> {
    let wanted = match id {
        TheoremId::TransformAdjoint => TransformMode::AdjointCommuting,
        TheoremId::TransformUnitary => TransformMode::UnitaryCommuting,
        _ => return None,
    };
    match &inst.transform {
        Some((_, mode)) if *mode != wanted => Some(format!(
            "instance transform is {}, not {}",
            mode_name(*mode),
            mode_name(wanted)
        )),
        _ => None,
    }
}

fn mode_name(mode: TransformMode) -> &'static str {
    match mode {
        TransformMode::AdjointCommuting => "adjoint-commuting",
        TransformMode::UnitaryCommuting => "unitary-commuting",
    }
}

fn theorems_body(common: &Common, l: &Loaded, ids: &[TheoremId], skip_inapplicable: bool, tol: &Tolerances) -> TheoremsBody {
    let seed = seed_for(common, &l.instance);
    let samples = samples_for(common, &l.instance);
    let outcomes = ids
        .iter()
        .map(|&id| {
            let mismatch = if skip_inapplicable {
                each_field!(&l.instance, i => mode_mismatch(i, id))
            } else {
                None
            };
            if let Some(reason) = mismatch {
                return Outcome {
                    theorem: id,
                    status: Status::Skipped,
                    report: None,
                    reason: Some(reason),
                    exit_code: EXIT_OK,
                };
            }
            match each_field!(&l.instance, i => run_theorem(l, i, id, seed, samples, tol)) {
                Ok(report) => Outcome {
                    theorem: id,
                    status: Status::Checked,
                    report: Some(report),
                    reason: None,
                    exit_code: EXIT_OK,
                },
                Err(e) => Outcome {
                    theorem: id,
                    status: if skip_inapplicable { Status::Skipped } else { Status::Error },
                    report: None,
                    reason: Some(e.to_string()),
                    exit_code: if skip_inapplicable { EXIT_OK } else { e.exit_code() },
                },
            }
        })
        .collect();
    TheoremsBody {
        instance: l.path.clone(),
        seed,
        samples,
        outcomes,
    }
}

fn theorems_code(body: &TheoremsBody) -> u8 {
    body.outcomes
        .iter()
        .map(|o| if o.failed_containment() { EXIT_ERROR } else { o.exit_code })
        .max()
        .unwrap_or(EXIT_OK)
}

fn parse_dim(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::InvalidRange(format!("--dim expects N or LO-HI within {MIN_DIM}-{MAX_DIM}, got '{spec}'"));
    let (lo, hi) = match spec.split_once('-') {
        Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?),
        None => {
            let n = spec.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if !(MIN_DIM <= lo && lo <= hi && hi <= MAX_DIM) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Instance `k` gets its dimension and seed from the `k`-th pair of draws of
/// the master generator seeded with `seed`.
fn generate(
    dim: &str,
    count: usize,
    constraint: ControlConstraint,
    field: Field,
    out: &Path,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<GeneratedFile>, CliError> {
    let (lo, hi) = parse_dim(dim)?;
    if count == 0 {
        return Err(CliError::InvalidRange("--count must be at least 1".into()));
    }
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let width = (count - 1).to_string().len().max(3);
    let mut master = random::rng(seed);
    let mut files = Vec::with_capacity(count);
    for k in 0..count {
        let n = master.random_range(lo..=hi);
        let instance_seed: u64 = master.random();
        let text = instance::generate_file(instance_seed, n, field, constraint, tol).to_json();
        let path = out.join(format!("instance-{k:0width$}.json"));
        fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
        files.push(GeneratedFile {
            path: path.display().to_string(),
            sha256: sha256(text.as_bytes()),
            seed: instance_seed,
            field,
            dim: n,
        });
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    #[test]
    fn dimension_specs() {
        assert_eq!(parse_dim("5").unwrap(), (5, 5));
        assert_eq!(parse_dim("2-64").unwrap(), (2, 64));
        for bad in ["1", "65", "8-3", "x", "2-", ""] {
            assert!(matches!(parse_dim(bad), Err(CliError::InvalidRange(_))), "{bad}");
        }
    }

    #[test]
    fn vectors_parse_per_field() {
        let v: DVector<f64> = parse_vector("[1, 2.5, -3]", 3).unwrap();
        assert_eq!(v.as_slice(), [1.0, 2.5, -3.0]);
        assert!(parse_vector::<f64>("[[0, 1], 0]", 2).is_err());
        let z: DVector<Complex<f64>> = parse_vector("[[0, 1], 2]", 2).unwrap();
        assert_eq!(z[0].im, 1.0);
        assert!(matches!(
            parse_vector::<f64>("[1]", 2),
            Err(CliError::Frame(FrameError::DimensionMismatch { expected: 2, found: 1 }))
        ));
    }


    #[test]
    fn directories_expand_in_name_order() {
        let dir = std::env::temp_dir().join(format!("ccfusion-expand-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        for name in ["b.json", "a.json", "notes.txt"] {
            fs::write(dir.join(name), "{}").unwrap();
        }
        let found = expand(&[dir.clone(), PathBuf::from("x.json")]).unwrap();
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(found, [dir.join("a.json"), dir.join("b.json"), PathBuf::from("x.json")]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Frame(FrameError::NotAFrame { lower: 0.0 }).exit_code(), EXIT_DEGENERATE);
        assert_eq!(CliError::Frame(FrameError::NotSurjective { rank: 1, dim: 2 }).exit_code(), EXIT_ERROR);
        assert_eq!(CliError::InvalidRange("x".into()).exit_code(), EXIT_ERROR);
    }
}
