//! JSON wire formats.
//!
//! Complex numbers are `[re, im]`, matrices are row-major nested arrays and
//! an algebra element is its list of blocks. Every loader reports failures as
//! [`Error::Malformed`] carrying the JSON path of the offending value.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraShape, Tolerance};
use crate::cnd::CndTransform;
use crate::dense::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::kernel::KernelSample;
use crate::module::{ModuleElement, ModuleOperator};
use crate::rkhm::RkhmElement;

pub type WireComplex = [f64; 2];
pub type WireMatrix = Vec<Vec<WireComplex>>;
pub type WireAlgebra = Vec<WireMatrix>;
/// `k × k` entries of an operator, each an algebra element.
pub type WireOperator = Vec<Vec<WireAlgebra>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireModuleElement {
    pub shape: Vec<usize>,
    pub rank: usize,
    pub coords: Vec<WireAlgebra>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireKernel {
    pub shape: Vec<usize>,
    pub rank: usize,
    pub points: Vec<String>,
    pub hermitian: bool,
    pub ops: Vec<Vec<WireOperator>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireTerm {
    pub x: WireModuleElement,
    pub s: String,
    pub a: WireAlgebra,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireRkhmElement {
    pub terms: Vec<WireTerm>,
}

/// A kernel given inline or as a path relative to the referring file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelRef {
    Path(String),
    Inline(Box<WireKernel>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireTarget {
    pub s: String,
    pub y: WireModuleElement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireProblem {
    pub kernel: KernelRef,
    pub targets: Vec<WireTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireTransform {
    pub kernel: WireKernel,
    pub base_point: String,
    pub psi: Vec<WireOperator>,
}

fn malformed(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses JSON, reporting the path and position of the first failure.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        malformed(if path.is_empty() { ".".into() } else { path }, e.into_inner().to_string())
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| malformed(path.display().to_string(), e.to_string()))
}

pub fn complex_to_wire(c: C64) -> WireComplex {
    [c.re, c.im]
}

pub fn matrix_to_wire(m: &CMatrix) -> WireMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_wire(m[(i, j)])).collect())
        .collect()
}

pub fn algebra_to_wire(a: &AlgebraElement) -> WireAlgebra {
    a.blocks().iter().map(matrix_to_wire).collect()
}

pub fn operator_to_wire(t: &ModuleOperator) -> WireOperator {
    let k = t.rank();
    (0..k)
        .map(|i| (0..k).map(|j| algebra_to_wire(t.entry(i, j))).collect())
        .collect()
}

pub fn module_element_to_wire(x: &ModuleElement) -> WireModuleElement {
    WireModuleElement {
        shape: x.shape().block_dims().to_vec(),
        rank: x.rank(),
        coords: x.coords().iter().map(algebra_to_wire).collect(),
    }
}

/// The `hermitian` flag is written as computed under `tol`.
pub fn kernel_to_wire(k: &KernelSample, tol: &Tolerance) -> WireKernel {
    WireKernel {
        shape: k.shape().block_dims().to_vec(),
        rank: k.rank(),
        points: k.points().to_vec(),
        hermitian: k.is_hermitian(tol),
        ops: (0..k.len())
            .map(|i| (0..k.len()).map(|j| operator_to_wire(k.op(i, j))).collect())
            .collect(),
    }
}

pub fn rkhm_element_to_wire(f: &RkhmElement) -> WireRkhmElement {
    let points = f.kernel().points();
    WireRkhmElement {
        terms: f
            .terms()
            .iter()
            .map(|t| WireTerm {
                x: module_element_to_wire(&t.x),
                s: points[t.point].clone(),
                a: algebra_to_wire(&t.a),
            })
            .collect(),
    }
}

pub fn transform_to_wire(t: &CndTransform, tol: &Tolerance) -> WireTransform {
    WireTransform {
        kernel: kernel_to_wire(&t.kernel, tol),
        base_point: t.base_point.clone(),
        psi: t.psi.iter().map(operator_to_wire).collect(),
    }
}

fn field(path: &str, name: &str) -> String {
    if path.is_empty() {
        name.to_string()
    } else {
        format!("{path}.{name}")
    }
}

fn shape_from_wire(dims: &[usize], path: &str) -> Result<AlgebraShape> {
    AlgebraShape::new(dims.to_vec()).map_err(|e| malformed(path, e.to_string()))
}

fn matrix_from_wire(m: &WireMatrix, d: usize, path: &str) -> Result<CMatrix> {
    if m.len() != d {
        return Err(malformed(path, format!("expected {d} rows, found {}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != d {
            return Err(malformed(format!("{path}[{i}]"), format!("expected {d} columns, found {}", row.len())));
        }
    }
    Ok(CMatrix::from_fn(d, d, |i, j| C64::new(m[i][j][0], m[i][j][1])))
}

pub fn algebra_from_wire(a: &WireAlgebra, shape: &AlgebraShape, path: &str) -> Result<AlgebraElement> {
    if a.len() != shape.num_blocks() {
        return Err(malformed(
            path,
            format!("expected {} blocks for shape {shape}, found {}", shape.num_blocks(), a.len()),
        ));
    }
    let blocks = a
        .iter()
        .zip(shape.block_dims())
        .enumerate()
        .map(|(j, (m, &d))| matrix_from_wire(m, d, &format!("{path}[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    AlgebraElement::from_blocks(shape, blocks).map_err(|e| malformed(path, e.to_string()))
}

pub fn operator_from_wire(t: &WireOperator, shape: &AlgebraShape, rank: usize, path: &str) -> Result<ModuleOperator> {
    if t.len() != rank {
        return Err(malformed(path, format!("expected {rank} rows, found {}", t.len())));
    }
    let mut entries = Vec::with_capacity(rank * rank);
    for (i, row) in t.iter().enumerate() {
        if row.len() != rank {
            return Err(malformed(format!("{path}[{i}]"), format!("expected {rank} entries, found {}", row.len())));
        }
        for (j, a) in row.iter().enumerate() {
            entries.push(algebra_from_wire(a, shape, &format!("{path}[{i}][{j}]"))?);
        }
    }
    ModuleOperator::from_entries(shape, rank, entries).map_err(|e| malformed(path, e.to_string()))
}

/// Checks the element against an expected shape and rank when given.
pub fn module_element_from_wire(
    x: &WireModuleElement,
    expected: Option<(&AlgebraShape, usize)>,
    path: &str,
) -> Result<ModuleElement> {
    let shape = shape_from_wire(&x.shape, &field(path, "shape"))?;
    if let Some((s, k)) = expected {
        if *s != shape {
            return Err(malformed(field(path, "shape"), format!("expected {s}, found {shape}")));
        }
        if x.rank != k {
            return Err(malformed(field(path, "rank"), format!("expected {k}, found {}", x.rank)));
        }
    }
    if x.rank == 0 || x.coords.len() != x.rank {
        return Err(malformed(
            field(path, "coords"),
            format!("expected {} coordinates, found {}", x.rank, x.coords.len()),
        ));
    }
    let coords = x
        .coords
        .iter()
        .enumerate()
        .map(|(i, a)| algebra_from_wire(a, &shape, &format!("{}[{i}]", field(path, "coords"))))
        .collect::<Result<Vec<_>>>()?;
    ModuleElement::new(coords).map_err(|e| malformed(path, e.to_string()))
}

pub fn kernel_from_wire(w: &WireKernel, tol: &Tolerance, path: &str) -> Result<KernelSample> {
    let shape = shape_from_wire(&w.shape, &field(path, "shape"))?;
    if w.rank == 0 {
        return Err(malformed(field(path, "rank"), "rank must be positive"));
    }
    let n = w.points.len();
    if w.ops.len() != n {
        return Err(malformed(field(path, "ops"), format!("expected {n} rows, found {}", w.ops.len())));
    }
    let mut ops = Vec::with_capacity(n);
    for (i, row) in w.ops.iter().enumerate() {
        if row.len() != n {
            return Err(malformed(format!("{}[{i}]", field(path, "ops")), format!("expected {n} entries, found {}", row.len())));
        }
        ops.push(
            row.iter()
                .enumerate()
                .map(|(j, t)| operator_from_wire(t, &shape, w.rank, &format!("{}[{i}][{j}]", field(path, "ops"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let k = KernelSample::new(w.points.clone(), ops).map_err(|e| malformed(field(path, "points"), e.to_string()))?;
    if w.hermitian && !k.is_hermitian(tol) {
        return Err(malformed(
            field(path, "hermitian"),
            format!("claimed hermitian but defect is {:e}", k.hermitian_defect()),
        ));
    }
    Ok(k)
}

pub fn kernel_from_json(text: &str, tol: &Tolerance) -> Result<KernelSample> {
    kernel_from_wire(&parse(text)?, tol, "")
}

pub fn load_kernel(path: &Path, tol: &Tolerance) -> Result<KernelSample> {
    kernel_from_json(&read(path)?, tol)
}

pub fn kernel_to_json(k: &KernelSample, tol: &Tolerance) -> String {
    serde_json::to_string_pretty(&kernel_to_wire(k, tol)).expect("plain data serializes")
}

pub fn transform_from_json(text: &str, tol: &Tolerance) -> Result<CndTransform> {
    let w: WireTransform = parse(text)?;
    let kernel = kernel_from_wire(&w.kernel, tol, "kernel")?;
    kernel
        .index_of(&w.base_point)
        .map_err(|e| malformed("base_point", e.to_string()))?;
    if w.psi.len() != kernel.len() {
        return Err(malformed("psi", format!("expected {} operators, found {}", kernel.len(), w.psi.len())));
    }
    let psi = w
        .psi
        .iter()
        .enumerate()
        .map(|(i, t)| operator_from_wire(t, kernel.shape(), kernel.rank(), &format!("psi[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(CndTransform {
        kernel,
        base_point: w.base_point,
        psi,
    })
}

/// A loaded interpolation or extension problem.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub kernel: KernelSample,
    pub targets: Vec<(String, ModuleElement)>,
    pub m: Option<f64>,
}

/// `base` resolves a kernel given by path.
pub fn problem_from_json(text: &str, base: Option<&Path>, tol: &Tolerance) -> Result<ProblemFile> {
    let w: WireProblem = parse(text)?;
    let kernel = match &w.kernel {
        KernelRef::Inline(k) => kernel_from_wire(k, tol, "kernel")?,
        KernelRef::Path(p) => {
            let full = base.map_or_else(|| Path::new(p).to_path_buf(), |b| b.join(p));
            let text = read(&full)?;
            kernel_from_wire(&parse(&text)?, tol, &full.display().to_string())?
        }
    };
    let expected = Some((kernel.shape(), kernel.rank()));
    let targets = w
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            kernel
                .index_of(&t.s)
                .map_err(|e| malformed(format!("targets[{i}].s"), e.to_string()))?;
            Ok((t.s.clone(), module_element_from_wire(&t.y, expected, &format!("targets[{i}].y"))?))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(m) = w.m {
        if !(m >= 0.0) {
            return Err(malformed("m", format!("bound must be non-negative, found {m}")));
        }
    }
    Ok(ProblemFile {
        kernel,
        targets,
        m: w.m,
    })
}

pub fn load_problem(path: &Path, tol: &Tolerance) -> Result<ProblemFile> {
    problem_from_json(&read(path)?, path.parent(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnd::cnd_to_pd;
    use crate::random::Sampler;
    use crate::rkhm::Rkhm;

    #[test]
    fn kernel_round_trip() {
        let tol = Tolerance::default();
        let mut rng = Sampler::new(130);
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let k = rng.gram_kernel(&s, 2, 3, 1);
        let text = kernel_to_json(&k, &tol);
        assert_eq!(kernel_from_json(&text, &tol).unwrap(), k);
        let w: WireKernel = parse(&text).unwrap();
        assert!(w.hermitian);
    }

    #[test]
    fn transform_and_elements_round_trip() {
        let tol = Tolerance::default();
        let mut rng = Sampler::new(131);
        let s = AlgebraShape::new(vec![2]).unwrap();
        let l = rng.cnd_kernel(&s, 1, 3);
        let t = cnd_to_pd(&l, "s2", &tol).unwrap();
        let text = serde_json::to_string(&transform_to_wire(&t, &tol)).unwrap();
        assert_eq!(transform_from_json(&text, &tol).unwrap(), t);

        let x = rng.module_element(&s, 1);
        let w = module_element_to_wire(&x);
        assert_eq!(module_element_from_wire(&w, Some((&s, 1)), "x").unwrap(), x);
        assert!(module_element_from_wire(&w, Some((&s, 2)), "x").is_err());

        let rkhm = Rkhm::new(rng.gram_kernel(&s, 1, 3, 1), tol).unwrap();
        let f = rkhm.generator(&x, "s3").unwrap();
        let w = rkhm_element_to_wire(&f);
        assert_eq!(w.terms[0].s, "s3");
    }

    #[test]
    fn diagnostics_carry_paths() {
        let tol = Tolerance::default();
        let s = AlgebraShape::new(vec![1]).unwrap();
        let k = KernelSample::constant(vec!["a".into(), "b".into()], &ModuleOperator::identity(&s, 1)).unwrap();
        let good = serde_json::to_value(kernel_to_wire(&k, &tol)).unwrap();

        let mut v = good.clone();
        v["ops"][1][1][0][0][0][0] = serde_json::json!([[1.0, 0.0], [2.0, 0.0]]);
        match kernel_from_json(&v.to_string(), &tol) {
            Err(Error::Malformed { path, .. }) => assert_eq!(path, "ops[1][1][0][0][0][0]"),
            other => panic!("unexpected {other:?}"),
        }
        let mut v = good.clone();
        v["ops"][0][1][0][0][0][0][0] = serde_json::json!([1.0, "x"]);
        match kernel_from_json(&v.to_string(), &tol) {
            Err(Error::Malformed { path, message }) => {
                assert_eq!(path, "ops[0][1][0][0][0][0][0][1]");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut v = good.clone();
        v["ops"][0][1][0][0][0][0][0] = serde_json::json!([1.0, 1.0]);
        match kernel_from_json(&v.to_string(), &tol) {
            Err(Error::Malformed { path, .. }) => assert_eq!(path, "hermitian"),
            other => panic!("unexpected {other:?}"),
        }
        let mut v = good.clone();
        v["points"][1] = serde_json::json!("a");
        assert!(matches!(kernel_from_json(&v.to_string(), &tol), Err(Error::Malformed { .. })));
        let mut v = good;
        v["extra"] = serde_json::json!(1);
        assert!(matches!(kernel_from_json(&v.to_string(), &tol), Err(Error::Malformed { .. })));
        assert!(matches!(kernel_from_json("{", &tol), Err(Error::Malformed { .. })));
    }

    #[test]
    fn problems_resolve_kernel_paths() {
        let tol = Tolerance::default();
        let dir = tempfile::tempdir().unwrap();
        let mut rng = Sampler::new(132);
        let s = AlgebraShape::new(vec![1]).unwrap();
        let k = rng.gram_kernel(&s, 1, 2, 1);
        fs::write(dir.path().join("k.json"), kernel_to_json(&k, &tol)).unwrap();
        let y = serde_json::to_string(&module_element_to_wire(&rng.module_element(&s, 1))).unwrap();
        let text = format!(r#"{{"kernel":"k.json","targets":[{{"s":"s1","y":{y}}}],"m":2.0}}"#);
        fs::write(dir.path().join("p.json"), &text).unwrap();
        let p = load_problem(&dir.path().join("p.json"), &tol).unwrap();
        assert_eq!(p.kernel, k);
        assert_eq!(p.m, Some(2.0));
        let text = format!(r#"{{"kernel":"k.json","targets":[{{"s":"zz","y":{y}}}]}}"#);
        match problem_from_json(&text, Some(dir.path()), &tol) {
            Err(Error::Malformed { path, .. }) => assert_eq!(path, "targets[0].s"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
