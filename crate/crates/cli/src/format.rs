//! JSON and CSV encodings of inputs and results.

use std::fmt;
use std::path::Path;

use dyadic_weights_core::cz::{CzDecomposition, SparseFamily, SparseTrace};
use dyadic_weights_core::harness::{CubeRatio, DepthRow, VerificationReport};
use dyadic_weights_core::weights::{PowerWeight, WeightConstant, WeightSpec, DEFAULT_POWER_DEPTH};
use dyadic_weights_core::{DyadicCube, GridSpec, StepFunction};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// A real number whose non-finite values are written as `"inf"`, `"-inf"`
/// and `"nan"`, since JSON has no literal for them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;

        impl Visitor<'_> for RealVisitor {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(RealVisitor)
    }
}

fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

/// Step function file: `{n, root_corner, root_side, depth, values}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub n: usize,
    pub root_corner: Vec<f64>,
    pub root_side: f64,
    pub depth: u32,
    pub values: Vec<f64>,
}

impl StepFile {
    pub fn from_step(f: &StepFunction) -> Self {
        let grid = f.grid();
        Self {
            n: grid.dim(),
            root_corner: grid.corner().to_vec(),
            root_side: grid.side(),
            depth: grid.depth(),
            values: f.values().to_vec(),
        }
    }

    pub fn to_step(&self, path: &Path) -> Result<StepFunction, CliError> {
        let field = |field: &str, message: String| CliError::Field {
            path: path.to_path_buf(),
            field: field.to_string(),
            message,
        };
        if self.root_corner.len() != self.n {
            return Err(field(
                "root_corner",
                format!(
                    "has {} coordinates but n = {}",
                    self.root_corner.len(),
                    self.n
                ),
            ));
        }
        let grid = GridSpec::new(self.root_corner.clone(), self.root_side, self.depth)
            .map_err(|e| field("depth", e.to_string()))?;
        StepFunction::new(grid, self.values.clone()).map_err(|e| field("values", e.to_string()))
    }
}

/// Weight file, tagged by `mode`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightFile {
    Tabulated {
        step: StepFile,
        #[serde(default)]
        allow_zeros: bool,
    },
    Power {
        center: f64,
        exponent: f64,
        root: [f64; 2],
        #[serde(default)]
        depth: Option<u32>,
    },
}

impl WeightFile {
    pub fn to_spec(&self, path: &Path) -> Result<WeightSpec, CliError> {
        match self {
            Self::Tabulated { step, allow_zeros } => {
                let step = step.to_step(path)?;
                if *allow_zeros {
                    Ok(WeightSpec::tabulated_with_zeros(step))
                } else {
                    WeightSpec::tabulated(step).map_err(|e| CliError::Field {
                        path: path.to_path_buf(),
                        field: "step.values".into(),
                        message: e.to_string(),
                    })
                }
            }
            Self::Power {
                center,
                exponent,
                root,
                depth,
            } => {
                let depth = depth.unwrap_or(DEFAULT_POWER_DEPTH);
                PowerWeight::new(*center, *exponent, root[0], root[1], depth)
                    .map(WeightSpec::power)
                    .map_err(|e| CliError::Field {
                        path: path.to_path_buf(),
                        field: "root".into(),
                        message: e.to_string(),
                    })
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedFile {
    #[serde(rename = "mode")]
    _mode: String,
    step: StepFile,
    #[serde(default)]
    allow_zeros: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerFile {
    #[serde(rename = "mode")]
    _mode: String,
    center: f64,
    exponent: f64,
    root: [f64; 2],
    #[serde(default)]
    depth: Option<u32>,
}

#[derive(Deserialize)]
struct ModeOnly {
    mode: Option<String>,
}

/// Parses a weight file. The `mode` tag is read first so that errors in the
/// body keep their line numbers.
pub fn parse_weight_file(path: &Path, text: &str) -> Result<Option<WeightFile>, CliError> {
    let mode = serde_json::from_str::<ModeOnly>(text)
        .ok()
        .and_then(|m| m.mode);
    match mode.as_deref() {
        None => Ok(None),
        Some("tabulated") => {
            let t: TabulatedFile = parse(path, text)?;
            Ok(Some(WeightFile::Tabulated {
                step: t.step,
                allow_zeros: t.allow_zeros,
            }))
        }
        Some("power") => {
            let p: PowerFile = parse(path, text)?;
            Ok(Some(WeightFile::Power {
                center: p.center,
                exponent: p.exponent,
                root: p.root,
                depth: p.depth,
            }))
        }
        Some(other) => Err(CliError::Field {
            path: path.to_path_buf(),
            field: "mode".into(),
            message: format!("unknown mode {other:?}; expected \"tabulated\" or \"power\""),
        }),
    }
}

pub fn read_weight(path: &Path) -> Result<WeightSpec, CliError> {
    let text = read(path)?;
    match parse_weight_file(path, &text)? {
        Some(file) => file.to_spec(path),
        // surfaces the syntax error or the missing tag with its position
        None => parse::<WeightFile>(path, &text)?.to_spec(path),
    }
}

/// Reads a bare step function file, or a tabulated weight file.
pub fn read_function(path: &Path) -> Result<StepFunction, CliError> {
    let text = read(path)?;
    match parse_weight_file(path, &text)? {
        None => parse::<StepFile>(path, &text)?.to_step(path),
        Some(WeightFile::Tabulated { step, .. }) => step.to_step(path),
        Some(WeightFile::Power { .. }) => Err(CliError::Field {
            path: path.to_path_buf(),
            field: "mode".into(),
            message: "a function must be tabulated".into(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeJson {
    pub level: u32,
    pub index: Vec<u32>,
}

impl From<&DyadicCube> for CubeJson {
    fn from(q: &DyadicCube) -> Self {
        Self {
            level: q.level(),
            index: q.index().to_vec(),
        }
    }
}

fn index_label(index: &[u32]) -> String {
    index
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantJson {
    pub class: String,
    pub p: Option<Real>,
    pub q: Option<Real>,
    pub value: Real,
    pub witness: CubeJson,
}

impl From<&WeightConstant> for ConstantJson {
    fn from(c: &WeightConstant) -> Self {
        Self {
            class: c.class.label().to_string(),
            p: c.class.p().map(Real),
            q: c.class.q().map(Real),
            value: Real(c.value),
            witness: (&c.witness).into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaRhJson {
    pub c: Real,
    pub value: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRowJson {
    pub depth: u32,
    pub ap: Real,
    pub ap_star: Real,
}

impl From<&DepthRow> for DepthRowJson {
    fn from(r: &DepthRow) -> Self {
        Self {
            depth: r.depth,
            ap: Real(r.ap),
            ap_star: Real(r.ap_star),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub weight: String,
    pub seed: u64,
    pub constants: Vec<ConstantJson>,
    pub sigma_rh: Option<SigmaRhJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depth_sweep: Vec<DepthRowJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalReport {
    pub kind: String,
    pub alpha: Real,
    pub seed: u64,
    pub function: StepFile,
    pub values: Vec<Real>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseEntryJson {
    pub k: u32,
    pub j: usize,
    #[serde(rename = "Q")]
    pub cube: CubeJson,
    #[serde(rename = "E_cells")]
    pub e_cells: Vec<usize>,
}

pub fn family_json(family: &SparseFamily) -> Vec<SparseEntryJson> {
    family
        .entries()
        .iter()
        .map(|e| SparseEntryJson {
            k: e.k,
            j: e.j,
            cube: (&e.cube).into(),
            e_cells: e.e_cells.clone(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzLevelJson {
    pub k: u32,
    pub threshold: Real,
    pub cubes: Vec<CubeJson>,
    pub omega_measure: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzReport {
    pub seed: u64,
    pub base: Real,
    pub alpha: Real,
    pub levels: Vec<CzLevelJson>,
    pub min_ratio: Option<Real>,
    pub family: Vec<SparseEntryJson>,
}

impl CzReport {
    pub fn new(dec: &CzDecomposition, family: &SparseFamily, seed: u64) -> Self {
        Self {
            seed,
            base: Real(dec.base()),
            alpha: Real(dec.alpha()),
            levels: dec
                .levels()
                .iter()
                .map(|l| CzLevelJson {
                    k: l.k,
                    threshold: Real(l.threshold),
                    cubes: l.cubes.iter().map(CubeJson::from).collect(),
                    omega_measure: Real(dec.omega_measure(l.k)),
                })
                .collect(),
            min_ratio: family.min_ratio().map(Real),
            family: family_json(family),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextJson {
    pub weight: String,
    pub p: Real,
    pub q: Option<Real>,
    pub alpha: Real,
    pub n: usize,
    pub depth: u32,
    pub root_corner: Vec<Real>,
    pub root_side: Real,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub function: String,
    pub cube: Option<CubeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckJson {
    pub name: String,
    pub evaluated: usize,
    pub violations: usize,
    pub worst: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub name: String,
    pub value: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkJson {
    pub from: String,
    pub to: String,
    pub constant: Real,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceJson {
    pub terms: Vec<TermJson>,
    pub links: Vec<LinkJson>,
    pub star: Real,
    pub sigma_rh: Real,
    pub overall_constant: Real,
}

impl From<&SparseTrace> for TraceJson {
    fn from(t: &SparseTrace) -> Self {
        Self {
            terms: t
                .terms
                .iter()
                .map(|x| TermJson {
                    name: x.name.to_string(),
                    value: Real(x.value),
                })
                .collect(),
            links: t
                .links
                .iter()
                .map(|l| LinkJson {
                    from: l.from.to_string(),
                    to: l.to.to_string(),
                    constant: Real(l.constant),
                    holds: l.holds,
                })
                .collect(),
            star: Real(t.star),
            sigma_rh: Real(t.sigma_rh),
            overall_constant: Real(t.overall_constant),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRatioJson {
    pub level: u32,
    pub index: Vec<u32>,
    pub ratio: Option<Real>,
    pub lower_bound: Real,
}

impl From<&CubeRatio> for CubeRatioJson {
    fn from(c: &CubeRatio) -> Self {
        Self {
            level: c.cube.level(),
            index: c.cube.index().to_vec(),
            ratio: c.ratio.map(Real),
            lower_bound: Real(c.lower_bound),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub kind: String,
    pub context: ContextJson,
    pub measured_ratio: Real,
    pub theoretical_bound: Real,
    pub normalized: Real,
    pub tolerance_factor: Real,
    pub passed: bool,
    pub witness: Option<WitnessJson>,
    pub checks: Vec<CheckJson>,
    pub trace: Option<TraceJson>,
    pub per_cube: Vec<CubeRatioJson>,
    pub diagnostic: Option<String>,
}

impl From<&VerificationReport> for ReportJson {
    fn from(r: &VerificationReport) -> Self {
        let c = &r.context;
        Self {
            kind: r.kind.label().to_string(),
            context: ContextJson {
                weight: c.weight.clone(),
                p: Real(c.p),
                q: c.q.map(Real),
                alpha: Real(c.alpha),
                n: c.dim,
                depth: c.depth,
                root_corner: reals(&c.root_corner),
                root_side: Real(c.root_side),
                seed: c.seed,
            },
            measured_ratio: Real(r.measured_ratio),
            theoretical_bound: Real(r.theoretical_bound),
            normalized: Real(r.normalized),
            tolerance_factor: Real(r.tolerance_factor),
            passed: r.passed,
            witness: r.witness.as_ref().map(|w| WitnessJson {
                function: w.function.clone(),
                cube: w.cube.as_ref().map(CubeJson::from),
            }),
            checks: r
                .checks
                .iter()
                .map(|c| CheckJson {
                    name: c.name.clone(),
                    evaluated: c.evaluated,
                    violations: c.violations,
                    worst: Real(c.worst),
                })
                .collect(),
            trace: r.trace.as_ref().map(TraceJson::from),
            per_cube: r.per_cube.iter().map(CubeRatioJson::from).collect(),
            diagnostic: r.diagnostic.clone(),
        }
    }
}

/// One CSV row per report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: String,
    pub weight: String,
    pub p: Real,
    pub q: Option<Real>,
    pub alpha: Real,
    pub n: usize,
    pub depth: u32,
    pub seed: Option<u64>,
    pub measured_ratio: Real,
    pub theoretical_bound: Real,
    pub normalized: Real,
    pub tolerance_factor: Real,
    pub passed: bool,
}

impl From<&ReportJson> for ReportRow {
    fn from(r: &ReportJson) -> Self {
        Self {
            kind: r.kind.clone(),
            weight: r.context.weight.clone(),
            p: r.context.p,
            q: r.context.q,
            alpha: r.context.alpha,
            n: r.context.n,
            depth: r.context.depth,
            seed: r.context.seed,
            measured_ratio: r.measured_ratio,
            theoretical_bound: r.theoretical_bound,
            normalized: r.normalized,
            tolerance_factor: r.tolerance_factor,
            passed: r.passed,
        }
    }
}

#[derive(Serialize)]
struct ConstantRow<'a> {
    class: &'a str,
    p: Option<Real>,
    q: Option<Real>,
    value: Real,
    witness_level: u32,
    witness_index: String,
}

#[derive(Serialize)]
struct MaximalRow {
    cell: usize,
    center: String,
    f: Real,
    maximal: Real,
}

#[derive(Serialize)]
struct FamilyRow {
    k: u32,
    j: usize,
    level: u32,
    index: String,
    e_cells: usize,
}

#[derive(Serialize)]
struct CubePlotRow {
    level: u32,
    index: String,
    ratio: Option<Real>,
    lower_bound: Real,
}

fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn constants_csv(report: &ConstantsReport) -> Result<String, CliError> {
    let mut rows: Vec<ConstantRow> = report
        .constants
        .iter()
        .map(|c| ConstantRow {
            class: &c.class,
            p: c.p,
            q: c.q,
            value: c.value,
            witness_level: c.witness.level,
            witness_index: index_label(&c.witness.index),
        })
        .collect();
    if let Some(rh) = &report.sigma_rh {
        rows.push(ConstantRow {
            class: "sigma_RH",
            p: None,
            q: None,
            value: rh.value,
            witness_level: 0,
            witness_index: String::new(),
        });
    }
    csv_string(rows)
}

pub fn maximal_csv(f: &StepFunction, m: &StepFunction) -> Result<String, CliError> {
    let grid = f.grid();
    csv_string((0..grid.cell_count()).map(|cell| {
        MaximalRow {
            cell,
            center: grid
                .cell_center(cell)
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            f: Real(f.values()[cell]),
            maximal: Real(m.values()[cell]),
        }
    }))
}

pub fn family_csv(report: &CzReport) -> Result<String, CliError> {
    csv_string(report.family.iter().map(|e| FamilyRow {
        k: e.k,
        j: e.j,
        level: e.cube.level,
        index: index_label(&e.cube.index),
        e_cells: e.e_cells.len(),
    }))
}

pub fn report_csv(report: &ReportJson) -> Result<String, CliError> {
    csv_string([ReportRow::from(report)])
}

/// Plot data: ratio of `σχ_Q` per cube.
pub fn cube_plot_csv(report: &ReportJson) -> Result<String, CliError> {
    csv_string(report.per_cube.iter().map(|c| CubePlotRow {
        level: c.level,
        index: index_label(&c.index),
        ratio: c.ratio,
        lower_bound: c.lower_bound,
    }))
}

/// Plot data: constants against tabulation depth.
pub fn depth_plot_csv(rows: &[DepthRowJson]) -> Result<String, CliError> {
    csv_string(rows)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip() {
        for x in [1.5, -2.0, 0.0, f64::INFINITY, f64::NEG_INFINITY] {
            let text = serde_json::to_string(&Real(x)).unwrap();
            assert_eq!(serde_json::from_str::<Real>(&text).unwrap(), Real(x));
        }
        assert_eq!(
            serde_json::to_string(&Real(f64::INFINITY)).unwrap(),
            "\"inf\""
        );
        let nan: Real = serde_json::from_str("\"nan\"").unwrap();
        assert!(nan.0.is_nan());
        assert!(serde_json::from_str::<Real>("\"big\"").is_err());
    }

    #[test]
    fn weight_file_shapes() {
        let tab: WeightFile = serde_json::from_str(
            r#"{"mode":"tabulated","step":{"n":1,"root_corner":[0],"root_side":1,"depth":1,"values":[2,1]}}"#,
        )
        .unwrap();
        let spec = tab.to_spec(Path::new("w.json")).unwrap();
        assert_eq!(spec.as_step().unwrap().values(), &[2.0, 1.0]);
        let pow: WeightFile =
            serde_json::from_str(r#"{"mode":"power","center":0,"exponent":-1,"root":[0,1]}"#)
                .unwrap();
        match pow.to_spec(Path::new("w.json")).unwrap() {
            WeightSpec::Power(pw) => assert_eq!(pw.depth(), DEFAULT_POWER_DEPTH),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_errors_name_the_field() {
        let bad: WeightFile = serde_json::from_str(
            r#"{"mode":"tabulated","step":{"n":1,"root_corner":[0],"root_side":1,"depth":1,"values":[2]}}"#,
        )
        .unwrap();
        let err = bad.to_spec(Path::new("w.json")).unwrap_err().to_string();
        assert!(err.contains("values"), "{err}");
        let zero: WeightFile = serde_json::from_str(
            r#"{"mode":"tabulated","step":{"n":1,"root_corner":[0],"root_side":1,"depth":1,"values":[2,0]}}"#,
        )
        .unwrap();
        assert!(zero.to_spec(Path::new("w.json")).is_err());
        let missing = serde_json::from_str::<StepFile>("{\n\"n\": 1\n}")
            .unwrap_err()
            .to_string();
        assert!(
            missing.contains("root_corner") && missing.contains("line"),
            "{missing}"
        );
    }
}
