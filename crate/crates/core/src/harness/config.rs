//! Flat `key = value` run configuration.
//!
//! A value holding commas is a list; lists on sweepable keys turn a
//! configuration into a sweep over their cartesian product. Keys named in
//! `paired` vary together instead of being crossed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{Problem, RunSpec, StepMesh, SweepSpec, DEFAULT_SWEEP_CAP};
use crate::anderson::{AndersonConfig, InnerProduct};
use crate::error::{Error, Result};
use crate::fem::ElementPair;
use crate::solvers::{Method, NsConfig, StoppingNorm};

/// Keys that accept value lists.
pub const SWEEPABLE: &[&str] = &["re", "element", "gamma", "rho", "alpha", "depth", "beta", "epsilon", "method", "h"];

const SCALAR: &[&str] = &[
    "problem",
    "tol",
    "max_iters",
    "out",
    "name",
    "stopping_norm",
    "inner_product",
    "step_mesh",
    "u_max",
    "vtk",
    "mesh_vtk",
    "plot",
    "max_runs",
    "paired",
];

const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../../configs/fig1.conf")),
    ("fig2", include_str!("../../configs/fig2.conf")),
    ("fig3", include_str!("../../configs/fig3.conf")),
    ("fig4", include_str!("../../configs/fig4.conf")),
    ("fig5", include_str!("../../configs/fig5.conf")),
    ("fig6", include_str!("../../configs/fig6.conf")),
    ("fig7", include_str!("../../configs/fig7.conf")),
    ("fig8", include_str!("../../configs/fig8.conf")),
    ("fig9", include_str!("../../configs/fig9.conf")),
];

/// Names of the shipped presets.
pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// `α` given directly or relative to the viscosity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    Value(f64),
    /// `ν⁻¹`.
    InverseNu,
    /// `ε / ν`.
    EpsOverNu,
}

impl AlphaSpec {
    pub fn resolve(self, nu: f64, epsilon: f64) -> f64 {
        match self {
            AlphaSpec::Value(v) => v,
            AlphaSpec::InverseNu => 1.0 / nu,
            AlphaSpec::EpsOverNu => epsilon / nu,
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(' ', "").as_str() {
            "1/nu" | "re" => Ok(AlphaSpec::InverseNu),
            "eps/nu" | "epsilon/nu" => Ok(AlphaSpec::EpsOverNu),
            other => parse_number(other).map(AlphaSpec::Value),
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Value(v) => write!(f, "{v}"),
            AlphaSpec::InverseNu => f.write_str("1/nu"),
            AlphaSpec::EpsOverNu => f.write_str("eps/nu"),
        }
    }
}

/// Parses a float, also accepting `a/b`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::config(format!("`{s}` is not a number"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(format!("{key} expects a boolean, got `{s}`"))),
    }
}

fn canonical_key(key: &str) -> String {
    let k = key.trim().to_ascii_lowercase().replace('-', "_");
    match k.as_str() {
        "m" => "depth".into(),
        "maxiters" => "max_iters".into(),
        "eps" => "epsilon".into(),
        _ => k,
    }
}

/// Raw configuration values by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, Vec<String>>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Self::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value, got `{line}`", no + 1)))?;
            p.set(k, v)?;
        }
        Ok(p)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let known: Vec<_> = preset_names().collect();
                Error::config(format!("unknown preset `{name}`; known: {}", known.join(", ")))
            })?;
        Self::parse(text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = canonical_key(key);
        let sweepable = SWEEPABLE.contains(&key.as_str());
        if !sweepable && !SCALAR.contains(&key.as_str()) {
            return Err(Error::config(format!("unknown key `{key}`")));
        }
        let list: Vec<String> = if key == "paired" || sweepable {
            value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
        } else {
            vec![value.trim().to_string()]
        };
        if list.is_empty() {
            return Err(Error::config(format!("`{key}` has no value")));
        }
        self.values.insert(key, list);
        Ok(())
    }

    /// Entries of `other` replace those here.
    pub fn merge(&mut self, other: &Params) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&[String]> {
        self.values.get(&canonical_key(key)).map(|v| v.as_slice())
    }

    pub fn is_sweep(&self) -> bool {
        self.values.iter().any(|(k, v)| k != "paired" && v.len() > 1)
    }

    pub fn out_dir(&self) -> Option<PathBuf> {
        self.get("out").map(|v| PathBuf::from(&v[0]))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.get(key).map(|v| parse_bool(key, &v[0])).unwrap_or(Ok(false))
    }

    /// Splits into fixed values and swept axes.
    pub fn to_sweep(&self) -> Result<SweepSpec> {
        let mut base = BTreeMap::new();
        let mut axes = Vec::new();
        for key in SWEEPABLE.iter().chain(SCALAR) {
            let Some(v) = self.values.get(*key) else { continue };
            if *key == "paired" {
                continue;
            }
            if v.len() == 1 {
                base.insert(key.to_string(), v[0].clone());
            } else {
                axes.push((key.to_string(), v.clone()));
            }
        }
        let paired = self.values.get("paired").cloned().unwrap_or_default();
        let paired: Vec<String> = paired.iter().map(|k| canonical_key(k)).collect();
        let cap = match base.get("max_runs") {
            Some(v) => v.parse().map_err(|_| Error::config(format!("max_runs expects an integer, got `{v}`")))?,
            None => DEFAULT_SWEEP_CAP,
        };
        SweepSpec::new(base, axes, paired, cap)
    }
}

impl RunSpec {
    /// Builds one run from single values; absent keys take the defaults of
    /// the chosen problem.
    pub fn from_values(values: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| values.get(k).map(String::as_str);
        let num = |k: &str| get(k).map(parse_number).transpose();
        let problem: Problem = get("problem").unwrap_or("cavity").parse()?;
        let re = num("re")?.unwrap_or(problem.default_re());
        if !(re > 0.0 && re.is_finite()) {
            return Err(Error::config(format!("re must be positive, got {re}")));
        }
        let mut ns = NsConfig::new(re);
        ns.element = get("element").map(str::parse).transpose()?.unwrap_or(ElementPair::ScottVogelius);
        ns.method = get("method").map(str::parse).transpose()?.unwrap_or(Method::GradDivAh);
        ns.gamma = num("gamma")?.unwrap_or(1.0);
        ns.rho = num("rho")?.unwrap_or(re);
        ns.epsilon = match num("epsilon")? {
            Some(e) => e,
            None if ns.gamma > 0.0 => 1.0 / ns.gamma,
            None => 0.1,
        };
        let alpha: AlphaSpec = get("alpha").map(str::parse).transpose()?.unwrap_or(AlphaSpec::InverseNu);
        ns.alpha = alpha.resolve(ns.nu, ns.epsilon);
        ns.tol = num("tol")?.unwrap_or(problem.default_tol());
        ns.max_iters = match get("max_iters") {
            Some(v) => v.parse().map_err(|_| Error::config(format!("max_iters expects an integer, got `{v}`")))?,
            None if re >= 5000.0 => 5000,
            None => 1000,
        };
        if let Some(s) = get("stopping_norm") {
            ns.stopping_norm = s.parse::<StoppingNorm>()?;
        }

        let depth = match get("depth") {
            Some(v) => Some(v.parse::<usize>().map_err(|_| Error::config(format!("depth expects an integer, got `{v}`")))?),
            None => None,
        };
        let beta = num("beta")?;
        let inner = match get("inner_product").map(str::to_ascii_lowercase).as_deref() {
            None | Some("h") => InnerProduct::H,
            Some("euclidean") | Some("l2") => InnerProduct::Euclidean,
            Some(o) => return Err(Error::config(format!("unknown inner product `{o}`"))),
        };
        // depth 0 with damping still runs through the accelerator
        let anderson = match (depth, beta) {
            (None | Some(0), None) => None,
            (d, b) => Some(
                AndersonConfig::new(d.unwrap_or(0))
                    .with_damping(b.unwrap_or(1.0))
                    .with_inner_product(inner),
            ),
        };

        let h = num("h")?.unwrap_or(problem.default_h());
        let step_mesh = match get("step_mesh").map(str::to_ascii_lowercase).as_deref() {
            None | Some("graded") => StepMesh::Graded,
            Some("uniform") => StepMesh::Uniform,
            Some(o) => return Err(Error::config(format!("step_mesh must be graded or uniform, got `{o}`"))),
        };
        let spec = RunSpec {
            name: get("name").map(str::to_string),
            problem,
            h,
            step_mesh,
            u_max: num("u_max")?.unwrap_or(1.0),
            ns,
            anderson,
            out_dir: get("out").map(PathBuf::from),
            write_vtk: get("vtk").map(|v| parse_bool("vtk", v)).transpose()?.unwrap_or(true),
            write_mesh: get("mesh_vtk").map(|v| parse_bool("mesh_vtk", v)).transpose()?.unwrap_or(false),
        };
        spec.validate()?;
        Ok(spec)
    }
}
