//! On-disk schemas and the codecs between them and validated objects.
//!
//! Loaders reject structural problems (bad JSON, malformed rationals,
//! indices out of range, contradictory entries) with positioned messages.
//! Whether the loaded data is mathematically sound is never decided here;
//! that is a verdict for a report, not a parse error.

use std::collections::HashMap;
use std::path::Path;

use exactlin::{Mat, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use quadlie::liealg::StructureData;

/// Structural problem in an input file. Every variant maps to exit code 2.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {err}")]
    Io {
        path: String,
        #[source]
        err: std::io::Error,
    },
    #[error("{path}: {err}")]
    Json { path: String, err: serde_json::Error },
    #[error("{0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> InputError {
    InputError::Malformed(msg.into())
}

/// One sparse structure constant: `[e_j, e_k]` carries `value * e_i`.
/// Files normally store only `j < k`; the loader fills in the mirror.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub j: usize,
    pub k: usize,
    pub i: usize,
    pub value: String,
}

/// An algebra on disk: labeled basis, sparse brackets, optional metric,
/// optional free-form tags (which fixture produced it, a declared nilradical).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub name: String,
    pub dim: usize,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<serde_json::Value>,
}

/// Square matrices acting on an algebra of the stated dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivationsFile {
    pub dim: usize,
    pub maps: Vec<Vec<Vec<String>>>,
}

/// Input for `double-extend`: a core algebra `h` with its form, the kernel
/// rank `r`, and the three families of structure maps, one per kernel
/// direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextFile {
    pub h: AlgebraFile,
    pub r: usize,
    pub phi: Vec<Vec<Vec<String>>>,
    pub psi: Vec<Vec<Vec<String>>>,
    pub omega: Vec<Vec<Vec<String>>>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = std::fs::read_to_string(path).map_err(|err| InputError::Io {
        path: path.display().to_string(),
        err,
    })?;
    serde_json::from_str(&text).map_err(|err| InputError::Json {
        path: path.display().to_string(),
        err,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(value).expect("schema types serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|err| InputError::Io {
        path: path.display().to_string(),
        err,
    })
}

/// Parses `"p"` or `"p/q"` with arbitrary-precision integers. The result is
/// reduced, so emitting it back may shorten the string but never changes
/// the value.
pub fn parse_scalar(text: &str) -> Result<Scalar, String> {
    let t = text.trim();
    let (ns, ds) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (t, None),
    };
    let numer: BigInt = ns
        .parse()
        .map_err(|_| format!("expected an integer, got {ns:?}"))?;
    let denom: BigInt = match ds {
        Some(d) => d
            .parse()
            .map_err(|_| format!("expected an integer denominator, got {d:?}"))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(format!("zero denominator in {t:?}"));
    }
    Ok(Scalar::new(numer, denom))
}

/// The canonical string for a rational: `p/q` reduced, `q` omitted when 1.
pub fn show_scalar(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Dense matrix from rows of rational strings. An empty list denotes the
/// `0 x cols_hint` matrix, since JSON rows cannot carry a column count of
/// their own.
pub fn parse_matrix(rows: &[Vec<String>], cols_hint: usize, what: &str) -> Result<Mat, InputError> {
    if rows.is_empty() {
        return Ok(Mat::zeros(0, cols_hint));
    }
    let cols = rows[0].len();
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(malformed(format!(
                "{what}: row {i} has {} entries, row 0 has {cols}",
                row.len()
            )));
        }
        let mut vals = Vec::with_capacity(cols);
        for (j, cell) in row.iter().enumerate() {
            vals.push(
                parse_scalar(cell)
                    .map_err(|e| malformed(format!("{what}: entry ({i},{j}): {e}")))?,
            );
        }
        out.push(vals);
    }
    Mat::from_rows(out).map_err(|e| malformed(format!("{what}: {e}")))
}

pub fn show_matrix(m: &Mat) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| show_scalar(&m[(i, j)])).collect())
        .collect()
}

/// The columns of `m` as vectors of strings; used for basis lists in tags.
pub fn show_columns(m: &Mat) -> Vec<Vec<String>> {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| show_scalar(&m[(i, j)])).collect())
        .collect()
}

/// A matrix file is a bare JSON array of rows of rational strings.
pub fn load_matrix_file(path: &Path, what: &str) -> Result<Mat, InputError> {
    let rows: Vec<Vec<String>> = read_json(path)?;
    parse_matrix(&rows, 0, what)
}

/// Turns a file into raw structure data plus the optional form matrix.
/// Explicit entries may appear in either index order and may repeat; equal
/// repeats are tolerated, contradictions (with each other or with the
/// implied skew mirror) are rejected. The form comes back unvalidated:
/// symmetry and invariance are verdicts for the caller's report.
pub fn load_structure(af: &AlgebraFile) -> Result<(StructureData, Option<Mat>), InputError> {
    let n = af.dim;
    if af.basis.len() != n {
        return Err(malformed(format!(
            "basis lists {} labels for dimension {n}",
            af.basis.len()
        )));
    }
    let mut explicit: HashMap<(usize, usize, usize), Scalar> = HashMap::new();
    for (pos, e) in af.brackets.iter().enumerate() {
        if e.i >= n || e.j >= n || e.k >= n {
            return Err(malformed(format!(
                "bracket entry {pos}: index out of range for dimension {n} (j={}, k={}, i={})",
                e.j, e.k, e.i
            )));
        }
        let v = parse_scalar(&e.value)
            .map_err(|err| malformed(format!("bracket entry {pos}: {err}")))?;
        if e.j == e.k && !v.is_zero() {
            return Err(malformed(format!(
                "bracket entry {pos}: [e_{j}, e_{j}] must vanish",
                j = e.j
            )));
        }
        if let Some(prev) = explicit.insert((e.i, e.j, e.k), v.clone()) {
            if prev != v {
                return Err(malformed(format!(
                    "bracket entry {pos}: conflicts with an earlier value for (j={}, k={}, i={})",
                    e.j, e.k, e.i
                )));
            }
        }
    }
    for ((i, j, k), v) in &explicit {
        if j != k {
            if let Some(w) = explicit.get(&(*i, *k, *j)) {
                if *w != -v.clone() {
                    return Err(malformed(format!(
                        "entries for (j={j}, k={k}, i={i}) and its mirror contradict skew-symmetry"
                    )));
                }
            }
        }
    }
    let mut data = StructureData::zeros(n);
    data.labels = af.basis.clone();
    for ((i, j, k), v) in &explicit {
        data.c[*i][*j][*k] = v.clone();
        if j != k && !explicit.contains_key(&(*i, *k, *j)) {
            data.c[*i][*k][*j] = -v.clone();
        }
    }
    let form = match &af.form {
        Some(rows) => {
            let m = parse_matrix(rows, n, "form")?;
            if m.rows() != n || m.cols() != n {
                return Err(malformed(format!(
                    "form is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            Some(m)
        }
        None => None,
    };
    Ok((data, form))
}

/// Renders validated data back to the schema. Only `j < k` slots are
/// written; reloading reproduces the full tensor exactly.
pub fn structure_to_file(
    name: &str,
    data: &StructureData,
    form: Option<&Mat>,
    tags: Option<serde_json::Value>,
) -> AlgebraFile {
    let n = data.labels.len();
    let mut brackets = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            for i in 0..n {
                let v = &data.c[i][j][k];
                if !v.is_zero() {
                    brackets.push(BracketEntry {
                        j,
                        k,
                        i,
                        value: show_scalar(v),
                    });
                }
            }
        }
    }
    AlgebraFile {
        name: name.to_string(),
        dim: n,
        basis: data.labels.clone(),
        brackets,
        form: form.map(show_matrix),
        tags,
    }
}

pub fn load_derivations(df: &DerivationsFile) -> Result<Vec<Mat>, InputError> {
    let n = df.dim;
    let mut maps = Vec::with_capacity(df.maps.len());
    for (idx, rows) in df.maps.iter().enumerate() {
        let what = format!("derivation {idx}");
        let m = parse_matrix(rows, n, &what)?;
        if m.rows() != n || m.cols() != n {
            return Err(malformed(format!(
                "{what} is {}x{}, expected {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
        maps.push(m);
    }
    Ok(maps)
}

/// A context file, parsed but not validated: core structure data with its
/// form, and the three map families with checked shapes.
pub struct ParsedContext {
    pub h_data: StructureData,
    pub h_form: Mat,
    pub r: usize,
    pub phi: Vec<Mat>,
    pub psi: Vec<Mat>,
    pub omega: Vec<Mat>,
}

pub fn load_context(cf: &ContextFile) -> Result<ParsedContext, InputError> {
    let (h_data, h_form) = load_structure(&cf.h)?;
    let h_form = h_form.ok_or_else(|| malformed("context: h needs a form"))?;
    let p = cf.h.dim;
    let r = cf.r;
    if r == 0 {
        return Err(malformed("context: r must be positive"));
    }
    let families = [
        ("phi", &cf.phi, p, p),
        ("psi", &cf.psi, p, r),
        ("omega", &cf.omega, r, r),
    ];
    let mut parsed: Vec<Vec<Mat>> = Vec::new();
    for (field, mats, rows, cols) in families {
        if mats.len() != r {
            return Err(malformed(format!(
                "context: {field} lists {} matrices, expected r = {r}",
                mats.len()
            )));
        }
        let mut out = Vec::with_capacity(r);
        for (idx, body) in mats.iter().enumerate() {
            let what = format!("{field}[{idx}]");
            let m = parse_matrix(body, cols, &what)?;
            let shape_ok = if m.rows() == 0 {
                rows == 0 && m.cols() == cols
            } else {
                m.rows() == rows && m.cols() == cols
            };
            if !shape_ok {
                return Err(malformed(format!(
                    "context: {what} is {}x{}, expected {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )));
            }
            out.push(m);
        }
        parsed.push(out);
    }
    let omega = parsed.pop().expect("three families were pushed");
    let psi = parsed.pop().expect("three families were pushed");
    let phi = parsed.pop().expect("three families were pushed");
    Ok(ParsedContext {
        h_data,
        h_form,
        r,
        phi,
        psi,
        omega,
    })
}

/// Context back to its file form, for emitting test inputs and fixtures.
pub fn context_to_file(
    h: AlgebraFile,
    r: usize,
    phi: &[Mat],
    psi: &[Mat],
    omega: &[Mat],
) -> ContextFile {
    ContextFile {
        h,
        r,
        phi: phi.iter().map(show_matrix).collect(),
        psi: psi.iter().map(show_matrix).collect(),
        omega: omega.iter().map(show_matrix).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use exactlin::int;

    fn entry(j: usize, k: usize, i: usize, value: &str) -> BracketEntry {
        BracketEntry {
            j,
            k,
            i,
            value: value.into(),
        }
    }

    fn plain_file(brackets: Vec<BracketEntry>) -> AlgebraFile {
        AlgebraFile {
            name: "t".into(),
            dim: 3,
            basis: vec!["x".into(), "y".into(), "z".into()],
            brackets,
            form: None,
            tags: None,
        }
    }

    #[test]
    fn scalar_strings_roundtrip() {
        for s in ["0", "7", "-3", "5/9", "-22/7"] {
            let v = parse_scalar(s).unwrap();
            assert_eq!(show_scalar(&v), s);
        }
        assert_eq!(show_scalar(&parse_scalar(" 4/6 ").unwrap()), "2/3");
        assert_eq!(show_scalar(&parse_scalar("3/-6").unwrap()), "-1/2");
    }

    #[test]
    fn scalar_rejects_garbage_and_zero_denominator() {
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("a").is_err());
        assert!(parse_scalar("1.5").is_err());
        assert!(parse_scalar("1/2/3").is_err());
        assert!(parse_scalar("").is_err());
    }

    #[test]
    fn loader_materializes_skew_mirror() {
        let (data, form) = load_structure(&plain_file(vec![entry(0, 1, 2, "1")])).unwrap();
        assert!(form.is_none());
        assert_eq!(data.c[2][0][1], int(1));
        assert_eq!(data.c[2][1][0], int(-1));
        assert_eq!(data.labels[1], "y");
    }

    #[test]
    fn loader_accepts_consistent_mirror_and_repeats() {
        let file = plain_file(vec![
            entry(0, 1, 2, "1"),
            entry(1, 0, 2, "-1"),
            entry(0, 1, 2, "1"),
        ]);
        let (data, _) = load_structure(&file).unwrap();
        assert_eq!(data.c[2][1][0], int(-1));
    }

    #[test]
    fn loader_rejects_contradictions() {
        let mirror = plain_file(vec![entry(0, 1, 2, "1"), entry(1, 0, 2, "1")]);
        assert!(load_structure(&mirror).is_err());
        let repeat = plain_file(vec![entry(0, 1, 2, "1"), entry(0, 1, 2, "2")]);
        assert!(load_structure(&repeat).is_err());
        let diagonal = plain_file(vec![entry(1, 1, 0, "1")]);
        assert!(load_structure(&diagonal).is_err());
        let range = plain_file(vec![entry(0, 3, 2, "1")]);
        assert!(load_structure(&range).is_err());
    }

    #[test]
    fn loader_checks_label_count_and_form_shape() {
        let mut file = plain_file(vec![]);
        file.basis.pop();
        assert!(load_structure(&file).is_err());

        let mut file = plain_file(vec![]);
        file.form = Some(vec![vec!["1".into(); 2]; 2]);
        assert!(load_structure(&file).is_err());
    }

    #[test]
    fn emit_then_load_is_exact() {
        let mut data = StructureData::zeros(3);
        data.set_bracket(0, 1, 2, Scalar::new(BigInt::from(2), BigInt::from(3)));
        data.set_bracket(0, 2, 1, int(-5));
        let form = Mat::from_int_rows(&[&[2, 0, 0], &[0, 0, 7], &[0, 7, 0]]);
        let file = structure_to_file("t", &data, Some(&form), None);
        for e in &file.brackets {
            assert!(e.j < e.k);
        }
        let (back, back_form) = load_structure(&file).unwrap();
        assert_eq!(back.c, data.c);
        assert_eq!(back_form.unwrap(), form);
    }

    #[test]
    fn empty_matrix_uses_column_hint() {
        let m = parse_matrix(&[], 4, "t").unwrap();
        assert_eq!((m.rows(), m.cols()), (0, 4));
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let rows = vec![vec!["1".into(), "2".into()], vec!["3".into()]];
        assert!(parse_matrix(&rows, 0, "t").is_err());
    }
}
