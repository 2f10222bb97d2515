//! Named, reproducible experiments. Each experiment produces CSV tables; its
//! assertions are a pure function of the parameters and those tables, so
//! stored outputs can be re-checked without recomputation.

mod forge_runs;
mod geometry_runs;
mod spectral;
mod table;
mod threshold;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub use table::{Cell, Table};

/// What to run and where to put it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    /// Experiment-specific parameters; omitted keys take their defaults and
    /// unknown keys are rejected.
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentManifest {
    pub fn new(id: &str) -> Self {
        Self { id: id.into(), ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// Property checked, as `module.property`.
    pub invariant: String,
    pub passed: bool,
    /// Report-only assertions do not affect the overall verdict.
    pub gating: bool,
    pub detail: String,
}

impl Assertion {
    pub fn gate(name: &str, invariant: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), invariant: invariant.into(), passed, gating: true, detail }
    }

    pub fn report(name: &str, invariant: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), invariant: invariant.into(), passed, gating: false, detail }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub id: String,
    pub seed: u64,
    pub params: Value,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub wall_clock: f64,
}

impl ExperimentResult {
    /// Every gating assertion passed.
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed || !a.gating)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn summary(&self) -> Summary {
        Summary {
            id: self.id.clone(),
            seed: self.seed,
            params: self.params.clone(),
            tables: self.tables.iter().map(|t| t.name.clone()).collect(),
            passed: self.passed(),
            assertions: self.assertions.clone(),
        }
    }

    /// Writes `<table>.csv` files and `summary.json`, which are deterministic,
    /// plus `timing.json`, which is not.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            t.write(dir)?;
        }
        let mut summary = serde_json::to_vec_pretty(&self.summary())?;
        summary.push(b'\n');
        std::fs::write(dir.join("summary.json"), summary)?;
        let timing = serde_json::json!({ "id": self.id, "wall_clock_seconds": self.wall_clock });
        std::fs::write(dir.join("timing.json"), serde_json::to_vec_pretty(&timing)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Summary {
    id: String,
    seed: u64,
    params: Value,
    tables: Vec<String>,
    passed: bool,
    assertions: Vec<Assertion>,
}

/// Tables of one run, looked up by name.
pub struct Tables<'a>(&'a [Table]);

impl Tables<'_> {
    pub fn get(&self, name: &str) -> Result<&Table> {
        self.0.iter().find(|t| t.name == name).ok_or_else(|| Error::Format(format!("missing table {name}")))
    }
}

pub(crate) trait Experiment {
    type Params: Serialize + DeserializeOwned + Default;
    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>>;
    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>>;
}

fn parse_params<P: DeserializeOwned + Default>(v: &Value) -> Result<P> {
    match v {
        Value::Null => Ok(P::default()),
        _ => serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("params: {e}"))),
    }
}

fn execute<E: Experiment>(m: &ExperimentManifest) -> Result<ExperimentResult> {
    let params: E::Params = parse_params(&m.params)?;
    let start = Instant::now();
    let tables = E::tables(&params, m.seed)?;
    let assertions = E::check(&params, &Tables(&tables))?;
    Ok(ExperimentResult {
        id: m.id.clone(),
        seed: m.seed,
        params: serde_json::to_value(&params)?,
        tables,
        assertions,
        wall_clock: start.elapsed().as_secs_f64(),
    })
}

fn recheck<E: Experiment>(params: &Value, tables: &[Table]) -> Result<Vec<Assertion>> {
    let params: E::Params = parse_params(params)?;
    E::check(&params, &Tables(tables))
}

/// Registry entry.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExperimentInfo {
    pub id: &'static str,
    pub about: &'static str,
    /// Wall-clock budget in seconds.
    pub budget: u64,
}

pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo { id: "isometry-sweep", about: "STFT isometry on random and Hermite fixtures", budget: 10 },
    ExperimentInfo {
        id: "covariance-lattice",
        about: "time-frequency covariance on a 5x5 on-grid shift lattice",
        budget: 30,
    },
    ExperimentInfo {
        id: "ambiguity-relation",
        about: "spectrogram transform equals the ambiguity product",
        budget: 30,
    },
    ExperimentInfo {
        id: "recover-noiseless",
        about: "ambiguity-division recovery from exact spectrograms",
        budget: 60,
    },
    ExperimentInfo {
        id: "recover-noisy",
        about: "recovery from spectrograms with additive noise (report only)",
        budget: 60,
    },
    ExperimentInfo {
        id: "prop21-gaussian-ratio",
        about: "blow-up of the modulus-to-phase ratio along the bump ladder",
        budget: 300,
    },
    ExperimentInfo { id: "lemma22-bounds", about: "norm bounds for the translated bump family", budget: 60 },
    ExperimentInfo { id: "thm15-sobolev-ratio", about: "Sobolev-level instability family of STFT moduli", budget: 300 },
    ExperimentInfo {
        id: "lp-reduction",
        about: "Littlewood-Paley reduction constants for the STFT family",
        budget: 300,
    },
    ExperimentInfo {
        id: "cheeger-gaussian",
        about: "Cheeger upper bound for the Gaussian spectrogram and its refinement",
        budget: 180,
    },
    ExperimentInfo { id: "cheeger-trend", about: "Cheeger upper bound against the number of bumps", budget: 180 },
    ExperimentInfo {
        id: "connectivity-gluing",
        about: "gluing bound against adversarial local constants",
        budget: 120,
    },
    ExperimentInfo { id: "poincare-square", about: "weighted Neumann Poincare constants", budget: 60 },
    ExperimentInfo {
        id: "certificate-polynomial",
        about: "stability certificates for polynomial Fock fields",
        budget: 120,
    },
    ExperimentInfo {
        id: "modulus-threshold",
        about: "Sobolev ratio of the modulus map below and above the threshold",
        budget: 120,
    },
    ExperimentInfo { id: "disjointness-link", about: "disjointness witness along the bump ladder", budget: 60 },
    ExperimentInfo { id: "window-ratio", about: "ambiguity ratio between two analysis windows", budget: 30 },
];

macro_rules! dispatch {
    ($id:expr, $f:ident, $($args:expr),*) => {
        match $id {
            "isometry-sweep" => $f::<spectral::IsometrySweep>($($args),*),
            "covariance-lattice" => $f::<spectral::CovarianceLattice>($($args),*),
            "ambiguity-relation" => $f::<spectral::AmbiguityRelation>($($args),*),
            "recover-noiseless" => $f::<spectral::RecoverNoiseless>($($args),*),
            "recover-noisy" => $f::<spectral::RecoverNoisy>($($args),*),
            "window-ratio" => $f::<spectral::WindowRatioRun>($($args),*),
            "prop21-gaussian-ratio" => $f::<forge_runs::GaussianRatio>($($args),*),
            "lemma22-bounds" => $f::<forge_runs::BumpBounds>($($args),*),
            "thm15-sobolev-ratio" => $f::<forge_runs::SobolevRatio>($($args),*),
            "lp-reduction" => $f::<forge_runs::LpReduction>($($args),*),
            "disjointness-link" => $f::<forge_runs::DisjointnessLink>($($args),*),
            "cheeger-gaussian" => $f::<geometry_runs::CheegerGaussian>($($args),*),
            "cheeger-trend" => $f::<geometry_runs::CheegerTrend>($($args),*),
            "connectivity-gluing" => $f::<geometry_runs::ConnectivityGluing>($($args),*),
            "poincare-square" => $f::<geometry_runs::PoincareSquare>($($args),*),
            "certificate-polynomial" => $f::<geometry_runs::CertificatePolynomial>($($args),*),
            "modulus-threshold" => $f::<threshold::ModulusThreshold>($($args),*),
            other => Err(Error::UnknownExperiment(other.to_string())),
        }
    };
}

pub fn info(id: &str) -> Result<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownExperiment(id.into()))
}

/// Runs an experiment and, when the manifest names an output directory, writes it there.
pub fn run(manifest: &ExperimentManifest) -> Result<ExperimentResult> {
    let result = dispatch!(manifest.id.as_str(), execute, manifest)?;
    if let Some(dir) = &manifest.out {
        result.write(dir)?;
    }
    Ok(result)
}

/// Outcome of re-checking a stored run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub id: String,
    /// Recomputed assertions equal the stored ones.
    pub consistent: bool,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub mismatches: Vec<String>,
}

/// Re-runs the assertions of a stored run from its CSV tables.
pub fn verify(dir: &Path) -> Result<VerifyReport> {
    let text = std::fs::read_to_string(dir.join("summary.json"))?;
    let summary: Summary = serde_json::from_str(&text).map_err(|e| Error::Format(format!("summary.json: {e}")))?;
    let tables = summary.tables.iter().map(|n| Table::read(dir, n)).collect::<Result<Vec<_>>>()?;
    let assertions = dispatch!(summary.id.as_str(), recheck, &summary.params, &tables)?;
    let mut mismatches = Vec::new();
    if assertions.len() != summary.assertions.len() {
        mismatches.push(format!("{} stored assertions, {} recomputed", summary.assertions.len(), assertions.len()));
    }
    for (a, b) in assertions.iter().zip(&summary.assertions) {
        if a != b {
            mismatches.push(format!(
                "{}: stored passed={} detail `{}`, recomputed passed={} detail `{}`",
                b.name, b.passed, b.detail, a.passed, a.detail
            ));
        }
    }
    let passed = assertions.iter().all(|a| a.passed || !a.gating);
    if passed != summary.passed {
        mismatches.push(format!("stored verdict {} differs from recomputed {passed}", summary.passed));
    }
    Ok(VerifyReport { id: summary.id, consistent: mismatches.is_empty(), passed, assertions, mismatches })
}

/// Shorthand for a single comparison assertion with its values in the detail.
pub(crate) fn at_most(name: &str, invariant: &str, value: f64, limit: f64) -> Assertion {
    Assertion::gate(name, invariant, value <= limit, format!("{value:e} <= {limit:e}"))
}

pub(crate) fn at_least(name: &str, invariant: &str, value: f64, limit: f64) -> Assertion {
    Assertion::gate(name, invariant, value >= limit, format!("{value:e} >= {limit:e}"))
}

pub(crate) fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(id: &str, out: &Path) -> ExperimentManifest {
        ExperimentManifest { out: Some(out.to_path_buf()), ..ExperimentManifest::new(id) }
    }

    fn deterministic_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.file_name().unwrap() != "timing.json")
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    }

    #[test]
    fn every_listed_id_dispatches() {
        for e in EXPERIMENTS {
            let m =
                ExperimentManifest { params: serde_json::json!({ "no_such_key": 1 }), ..ExperimentManifest::new(e.id) };
            match run(&m) {
                Err(Error::Config(msg)) => assert!(msg.contains("no_such_key"), "{}: {msg}", e.id),
                other => panic!("{}: expected a config error, got {other:?}", e.id),
            }
        }
        assert!(matches!(run(&ExperimentManifest::new("nope")), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn reruns_are_byte_identical_and_verify() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for id in ["window-ratio", "lemma22-bounds"] {
            let r = run(&manifest(id, &a.path().join(id))).unwrap();
            run(&manifest(id, &b.path().join(id))).unwrap();
            assert_eq!(deterministic_files(&a.path().join(id)), deterministic_files(&b.path().join(id)));
            let v = verify(&a.path().join(id)).unwrap();
            assert!(v.consistent, "{:?}", v.mismatches);
            assert_eq!(v.passed, r.passed());
        }
    }

    #[test]
    fn tampered_table_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        run(&manifest("lemma22-bounds", dir.path())).unwrap();
        let path = dir.path().join("bounds.csv");
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut cells: Vec<String> = lines[1].split(',').map(String::from).collect();
        let last = cells.len() - 1;
        cells[last] = "100".into();
        lines[1] = cells.join(",");
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        let v = verify(dir.path()).unwrap();
        assert!(!v.consistent && !v.passed);
    }

    #[test]
    fn manifest_rejects_unknown_keys() {
        let err = ExperimentManifest::from_json(r#"{"id": "window-ratio", "sede": 3}"#).unwrap_err();
        assert!(err.to_string().contains("sede"));
        let m = ExperimentManifest::from_json(r#"{"id": "window-ratio"}"#).unwrap();
        assert_eq!((m.seed, m.params.is_null()), (0, true));
    }
}
