//! JSON and CSV formats. Complex entries are written as `[re, im]`.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::bds::{FourierMatrix, ProbabilityMatrix};
use crate::error::{Error, Result};
use crate::qlinalg::{BipartiteDims, CMatrix, C64};
use crate::search::SupportSet;
use crate::state::DensityMatrix;
use crate::witness::{SparseOutcome, WitnessOperator};

/// Significant digits of every number written to JSON or CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to `SIGNIFICANT_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn complex_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_complex_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("expected a nonempty rectangular array of [re, im] pairs".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn dims_of(d_a: usize, d_b: usize) -> Result<BipartiteDims> {
    BipartiteDims::new(d_a, d_b)
}

#[derive(Serialize, Deserialize)]
struct ProbabilityJson {
    #[serde(rename = "d_A")]
    d_a: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    p: Vec<Vec<f64>>,
}

impl Serialize for ProbabilityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dims();
        ProbabilityJson { d_a: d.d_a(), d_b: d.d_b(), p: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProbabilityMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = ProbabilityJson::deserialize(de)?;
        let parse = || -> Result<Self> {
            let dims = dims_of(j.d_a, j.d_b)?;
            if j.p.len() != j.d_a || j.p.iter().any(|r| r.len() != j.d_b) {
                return Err(Error::mismatch(dims, "shape of p"));
            }
            Self::new(dims, DMatrix::from_fn(j.d_a, j.d_b, |i, k| j.p[i][k]))
        };
        parse().map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct FourierJson {
    #[serde(rename = "d_A")]
    d_a: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    lambda: Vec<Vec<[f64; 2]>>,
}

impl Serialize for FourierMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dims();
        FourierJson { d_a: d.d_a(), d_b: d.d_b(), lambda: complex_rows(self.matrix()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = FourierJson::deserialize(de)?;
        let parse = || -> Result<Self> { Self::new(dims_of(j.d_a, j.d_b)?, matrix_from_complex_rows(&j.lambda)?) };
        parse().map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    #[serde(rename = "d_A")]
    d_a: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    rho: Vec<Vec<[f64; 2]>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dims();
        DensityJson { d_a: d.d_a(), d_b: d.d_b(), rho: complex_rows(self.matrix()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = DensityJson::deserialize(de)?;
        let parse = || -> Result<Self> { Self::new(matrix_from_complex_rows(&j.rho)?, dims_of(j.d_a, j.d_b)?) };
        parse().map_err(D::Error::custom)
    }
}

impl Serialize for WitnessOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dims();
        let mut st = s.serialize_struct("WitnessOperator", 6)?;
        st.serialize_field("d_A", &d.d_a())?;
        st.serialize_field("d_B", &d.d_b())?;
        st.serialize_field("x", &self.x())?;
        st.serialize_field("y", &self.y())?;
        st.serialize_field("coefficients", &complex_rows(self.coefficients()))?;
        st.serialize_field("matrix", &complex_rows(self.matrix()))?;
        st.end()
    }
}

impl Serialize for SparseOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SparseOutcome", 11)?;
        st.serialize_field("d_A", &self.dims.d_a())?;
        st.serialize_field("d_B", &self.dims.d_b())?;
        st.serialize_field("x", &self.x)?;
        st.serialize_field("y", &self.y)?;
        st.serialize_field("ell", &self.ell)?;
        st.serialize_field("support", &self.support)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("lower_bound", &self.lower_bound)?;
        st.serialize_field("detected", &self.detected())?;
        st.serialize_field("solver", &self.solver)?;
        st.serialize_field("u", &complex_rows(&self.u))?;
        st.end()
    }
}

/// Any of the accepted state descriptions, recognized by its array key:
/// `p`, `lambda`, `rho` or `points`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Probabilities(ProbabilityMatrix),
    Fourier(FourierMatrix),
    Density(DensityMatrix),
    Support(SupportSet),
}

pub fn parse_state_json(text: &str) -> Result<StateInput> {
    let mut v: Value = serde_json::from_str(text)?;
    // The report of the `state` command nests the state under these keys.
    for key in ["probabilities", "rho"] {
        if v.get(key).is_some_and(Value::is_object) {
            v = v[key].take();
            break;
        }
    }
    let has = |k: &str| v.get(k).is_some();
    Ok(if has("p") {
        StateInput::Probabilities(serde_json::from_value(v)?)
    } else if has("lambda") {
        StateInput::Fourier(serde_json::from_value(v)?)
    } else if has("rho") {
        StateInput::Density(serde_json::from_value(v)?)
    } else if has("points") {
        StateInput::Support(serde_json::from_value(v)?)
    } else {
        return Err(Error::InvalidInput("state JSON needs one of the keys p, lambda, rho or points".into()));
    })
}

pub fn read_state(path: &Path) -> Result<StateInput> {
    parse_state_json(&std::fs::read_to_string(path)?)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// JSON with every float rounded to `SIGNIFICANT_DIGITS` digits.
pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    Ok(if pretty { serde_json::to_string_pretty(&v)? } else { serde_json::to_string(&v)? })
}

/// Formats a float for CSV output.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r.is_finite() {
        format!("{r}")
    } else {
        format!("{x}")
    }
}

/// Writes a CSV table with a header row.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// `(alpha, beta, value)` rows of a probability matrix.
pub fn probability_grid_rows(p: &ProbabilityMatrix) -> Vec<Vec<String>> {
    let d = p.dims();
    (0..d.d_a())
        .flat_map(|a| (0..d.d_b()).map(move |b| vec![a.to_string(), b.to_string(), fmt_num(p.get(a, b))]))
        .collect()
}
