//! Experiment configuration: a TOML document describing the sets, the
//! algorithm, the start, the solution set and the checks to evaluate.

use std::collections::BTreeMap;

use feasibility::linalg::{AffineFrame, Point};
use feasibility::{OperatorSpec, SetSpec, SolutionSet};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub algorithm: AlgorithmConfig,
    pub start: StartConfig,
    pub solution: SolutionConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub regularity: RegularityConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    pub sets: BTreeMap<String, SetConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub offset: Vec<f64>,
    #[serde(default)]
    pub basis: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Affine {
        offset: Vec<f64>,
        #[serde(default)]
        basis: Vec<Vec<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    Union {
        frames: Vec<FrameConfig>,
    },
    /// The coordinate axes of `R^dim`.
    Axes {
        dim: usize,
    },
    Kinked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Map,
    Dr,
}

/// `map` iterates `P_a P_b`; `dr` iterates `½(R_a R_b + I)`, so `b` always acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartConfig {
    Point {
        x0: Vec<f64>,
    },
    /// `count` seeded uniform starts in `B_radius(center)`.
    Region {
        center: Vec<f64>,
        radius: f64,
        count: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolutionConfig {
    /// `S = {witness}`.
    Singleton { witness: Vec<f64> },
    /// `S` is the intersection of two affine sets, found in closed form.
    Affine { witness: Vec<f64> },
    /// A finite `S`; the first point is the witness.
    Points { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityConfig {
    /// Ball radii; empty means `{1, ½, ¼, ⅛}` times the start region radius,
    /// or `‖x₀ − x̂‖` for a single start.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    pub samples: usize,
    pub seed: u32,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        Self {
            deltas: Vec::new(),
            samples: feasibility::regularity::DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    /// Write every `csv_stride`-th iterate (the last one always).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_stride: Option<usize>,
}

/// A claim to verify, tagged with an acceptance-suite identifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub claim: String,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Every run ends with `dist_S < tol`.
    Converges {
        tol: f64,
    },
    /// Every run ends with `dist_S ≤ bound`.
    FinalDistAtMost {
        bound: f64,
    },
    /// The fitted rate of the first run is within `tolerance` of `target`.
    Rate {
        target: f64,
        tolerance: f64,
    },
    /// The fitted rate of the first run is at most `bound`.
    RateAtMost {
        bound: f64,
    },
    /// The fitted linearity flag of the first run.
    Linear {
        expected: bool,
    },
    /// The first run stagnates with `dist_S` within `tolerance` of `dist`.
    Stagnates {
        dist: f64,
        tolerance: f64,
    },
    /// The fitted rate of the first run is at most the inflated prediction.
    PredictedBound {
        algorithm: AlgorithmKind,
    },
    StronglyRegular {
        expected: bool,
    },
    Friedrichs {
        target: f64,
        tolerance: f64,
    },
    NormalAngle {
        target: f64,
        tolerance: f64,
    },
    /// Subregularity of the named set with respect to `S`, at the largest delta.
    Subregularity {
        set: String,
        min: f64,
        max: f64,
    },
    /// Pair regularity of the named set at the witness, with `delta`.
    PairRegularity {
        set: String,
        delta: f64,
        min: f64,
        max: f64,
    },
    /// The proximal normal cone of the named set at the witness is `{0}`.
    ZeroNormalCone {
        set: String,
    },
    /// A fixed-point probe from `samples` starts in `B_radius(witness)` finds a
    /// limit farther than `min_dist` from `S`.
    FixedPointOffSolution {
        radius: f64,
        samples: usize,
        min_dist: f64,
    },
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Syntax(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> CliError {
    CliError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

fn point(field: &str, coords: &[f64]) -> Result<Point, CliError> {
    Point::from_slice(coords).map_err(|e| invalid(field, e))
}

fn check_dim(field: &str, coords: &[f64], dim: usize) -> Result<(), CliError> {
    if coords.len() != dim {
        return Err(invalid(
            field,
            format!("expected dimension {dim}, found {}", coords.len()),
        ));
    }
    Ok(())
}

fn frame(field: &str, offset: &[f64], basis: &[Vec<f64>]) -> Result<AffineFrame, CliError> {
    let offset = point(&format!("{field}.offset"), offset)?;
    let spanning = basis
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let f = format!("{field}.basis[{i}]");
            check_dim(&f, v, offset.dim())?;
            point(&f, v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    AffineFrame::new(offset, &spanning).map_err(|e| invalid(field, e))
}

impl SetConfig {
    pub fn build(&self, field: &str) -> Result<SetSpec, CliError> {
        let wrap = |r: feasibility::Result<SetSpec>| r.map_err(|e| invalid(field, e));
        match self {
            SetConfig::Affine { offset, basis } => Ok(SetSpec::affine(frame(field, offset, basis)?)),
            SetConfig::Ball { center, radius } => {
                wrap(SetSpec::ball(point(&format!("{field}.center"), center)?, *radius))
            }
            SetConfig::Sphere { center, radius } => {
                wrap(SetSpec::sphere(point(&format!("{field}.center"), center)?, *radius))
            }
            SetConfig::Union { frames } => {
                let built = frames
                    .iter()
                    .enumerate()
                    .map(|(i, f)| frame(&format!("{field}.frames[{i}]"), &f.offset, &f.basis))
                    .collect::<Result<Vec<_>, _>>()?;
                wrap(SetSpec::union(built))
            }
            SetConfig::Axes { dim } => {
                if *dim == 0 {
                    return Err(invalid(format!("{field}.dim"), "must be positive"));
                }
                Ok(SetSpec::axes(*dim))
            }
            SetConfig::Kinked => Ok(SetSpec::kinked()),
        }
    }
}

/// The objects a configuration describes.
#[derive(Clone, Debug)]
pub struct Problem {
    pub a: SetSpec,
    pub b: SetSpec,
    pub operator: OperatorSpec,
    pub solution: SolutionSet,
    pub starts: Vec<Point>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.build().map(|_| ())
    }

    pub fn dim(&self) -> Result<usize, CliError> {
        Ok(self.build()?.a.dim())
    }

    pub fn build(&self) -> Result<Problem, CliError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let lookup = |field: &str, key: &str| -> Result<SetSpec, CliError> {
            self.sets
                .get(key)
                .ok_or_else(|| invalid(field, format!("unknown set `{key}`")))?
                .build(&format!("sets.{key}"))
        };
        let a = lookup("algorithm.a", &self.algorithm.a)?;
        let b = lookup("algorithm.b", &self.algorithm.b)?;
        let dim = a.dim();
        for (name, s) in &self.sets {
            let built = s.build(&format!("sets.{name}"))?;
            if built.dim() != dim {
                return Err(invalid(
                    format!("sets.{name}"),
                    format!("expected dimension {dim}, found {}", built.dim()),
                ));
            }
        }
        let operator = match self.algorithm.kind {
            AlgorithmKind::Map => OperatorSpec::map(a.clone(), b.clone()),
            AlgorithmKind::Dr => OperatorSpec::douglas_rachford(a.clone(), b.clone()),
        }
        .map_err(|e| invalid("algorithm", e))?;
        let solution = match &self.solution {
            SolutionConfig::Singleton { witness } => {
                check_dim("solution.witness", witness, dim)?;
                let w = point("solution.witness", witness)?;
                SolutionSet::singleton(&a, &b, w)
            }
            SolutionConfig::Affine { witness } => {
                check_dim("solution.witness", witness, dim)?;
                if !(a.is_affine() && b.is_affine()) {
                    return Err(invalid("solution.kind", "`affine` needs two affine sets"));
                }
                let w = point("solution.witness", witness)?;
                SolutionSet::affine_auto(&a, &b, w)
            }
            SolutionConfig::Points { points } => {
                if points.is_empty() {
                    return Err(invalid("solution.points", "missing solution witness"));
                }
                let pts = points
                    .iter()
                    .enumerate()
                    .map(|(i, q)| {
                        let f = format!("solution.points[{i}]");
                        check_dim(&f, q, dim)?;
                        point(&f, q)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                SolutionSet::points(&a, &b, pts)
            }
        }
        .map_err(|e| invalid("solution", e))?;
        let starts = match &self.start {
            StartConfig::Point { x0 } => {
                check_dim("start.x0", x0, dim)?;
                vec![point("start.x0", x0)?]
            }
            StartConfig::Region {
                center,
                radius,
                count,
                seed,
            } => {
                check_dim("start.center", center, dim)?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid("start.radius", "must be positive"));
                }
                if *count == 0 {
                    return Err(invalid("start.count", "must be positive"));
                }
                crate::random::uniform_ball(&point("start.center", center)?, *radius, *count, *seed)
            }
        };
        if self.budget.max_iters == 0 {
            return Err(invalid("budget.max_iters", "must be at least 1"));
        }
        if !(self.budget.tol.is_finite() && self.budget.tol > 0.0) {
            return Err(invalid("budget.tol", "must be positive"));
        }
        if self.regularity.samples == 0 {
            return Err(invalid("regularity.samples", "must be positive"));
        }
        for (i, d) in self.regularity.deltas.iter().enumerate() {
            if !(d.is_finite() && *d > 0.0) {
                return Err(invalid(format!("regularity.deltas[{i}]"), "must be positive"));
            }
        }
        if self.outputs.csv_stride == Some(0) {
            return Err(invalid("outputs.csv_stride", "must be positive"));
        }
        for (i, c) in self.checks.iter().enumerate() {
            let set = match &c.check {
                Check::Subregularity { set, .. }
                | Check::PairRegularity { set, .. }
                | Check::ZeroNormalCone { set } => Some(set),
                _ => None,
            };
            if let Some(set) = set {
                if !self.sets.contains_key(set) {
                    return Err(invalid(format!("checks[{i}].set"), format!("unknown set `{set}`")));
                }
            }
        }
        Ok(Problem {
            a,
            b,
            operator,
            solution,
            starts,
        })
    }
}
