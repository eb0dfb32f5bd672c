//! Built-in experiments for the reference geometries.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::config::{
    AlgorithmConfig, AlgorithmKind, BudgetConfig, Check, CheckConfig, ExperimentConfig, OutputConfig, RegularityConfig,
    SetConfig, SolutionConfig, StartConfig,
};
use crate::error::CliError;

/// Name of the randomized subspace sweep run by the suite.
pub const SUBSPACE_SWEEP: &str = "subspace-iff";

pub const PRESET_NAMES: &[&str] = &[
    "example-i",
    "example-i-map",
    "example-ii",
    "example-ii-plane",
    "example-iii",
    "example-iii-dr",
    "example-iv",
    "example-iv-dr",
    "example-v",
    "example-v-map",
    "kinked-regularity",
    "cross",
];

/// Final distance reachable by MAP on the tangent line and ball within 10⁶ cycles.
///
/// Iterates on the line satisfy `1/t² ↦ 1/t² + 1`, so `t_n = 1/sqrt(n + 1)`.
pub const TANGENT_MAP_REACHABLE: f64 = 1.1e-3;

fn line(offset: &[f64], dir: &[f64]) -> SetConfig {
    SetConfig::Affine {
        offset: offset.to_vec(),
        basis: vec![dir.to_vec()],
    }
}

fn check(claim: &str, check: Check) -> CheckConfig {
    CheckConfig {
        claim: claim.into(),
        check,
    }
}

struct Builder {
    cfg: ExperimentConfig,
}

impl Builder {
    fn new(name: &str, description: &str, kind: AlgorithmKind, a: &str, b: &str) -> Self {
        Self {
            cfg: ExperimentConfig {
                name: name.into(),
                description: description.into(),
                algorithm: AlgorithmConfig {
                    kind,
                    a: a.into(),
                    b: b.into(),
                },
                start: StartConfig::Point { x0: vec![] },
                solution: SolutionConfig::Singleton { witness: vec![] },
                budget: BudgetConfig::default(),
                regularity: RegularityConfig::default(),
                outputs: OutputConfig::default(),
                sets: BTreeMap::new(),
                checks: Vec::new(),
            },
        }
    }

    fn set(mut self, name: &str, s: SetConfig) -> Self {
        self.cfg.sets.insert(name.into(), s);
        self
    }

    fn x0(mut self, x0: &[f64]) -> Self {
        self.cfg.start = StartConfig::Point { x0: x0.to_vec() };
        self
    }

    fn region(mut self, center: &[f64], radius: f64, count: usize, seed: u64) -> Self {
        self.cfg.start = StartConfig::Region {
            center: center.to_vec(),
            radius,
            count,
            seed,
        };
        self
    }

    fn solution(mut self, s: SolutionConfig) -> Self {
        self.cfg.solution = s;
        self
    }

    fn budget(mut self, max_iters: usize, tol: f64) -> Self {
        self.cfg.budget = BudgetConfig { max_iters, tol };
        self
    }

    fn checks(mut self, checks: Vec<CheckConfig>) -> Self {
        self.cfg.checks = checks;
        self
    }

    fn build(self) -> ExperimentConfig {
        self.cfg
    }
}

fn singleton(w: &[f64]) -> SolutionConfig {
    SolutionConfig::Singleton { witness: w.to_vec() }
}

fn two_lines(name: &str, kind: AlgorithmKind) -> Builder {
    Builder::new(name, "Two lines in R² at 45 degrees", kind, "A", "B")
        .set("A", line(&[0.0, 0.0], &[1.0, 0.0]))
        .set("B", line(&[0.0, 0.0], &[1.0, 1.0]))
        .x0(&[1.0, 0.0])
        .solution(singleton(&[0.0, 0.0]))
        .budget(1000, 1e-10)
}

fn lines_in_r3(name: &str, description: &str) -> Builder {
    Builder::new(name, description, AlgorithmKind::Dr, "A", "B")
        .set("A", line(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]))
        .set("B", line(&[0.0, 0.0, 0.0], &[1.0, 1.0, 0.0]))
        .solution(singleton(&[0.0, 0.0, 0.0]))
        .budget(1000, 1e-10)
}

fn line_and_ball(name: &str, kind: AlgorithmKind) -> Builder {
    Builder::new(name, "A line tangent to a disc at the origin", kind, "A", "B")
        .set("A", line(&[0.0, 0.0], &[1.0, 0.0]))
        .set(
            "B",
            SetConfig::Ball {
                center: vec![0.0, 1.0],
                radius: 1.0,
            },
        )
        .solution(singleton(&[0.0, 0.0]))
}

fn cross_and_diagonal(name: &str, kind: AlgorithmKind) -> Builder {
    Builder::new(name, "The coordinate cross and the diagonal in R²", kind, "A", "B")
        .set("A", SetConfig::Axes { dim: 2 })
        .set("B", line(&[0.0, 0.0], &[1.0, 1.0]))
        .solution(singleton(&[0.0, 0.0]))
        .budget(10_000, 1e-10)
}

fn circle_and_line(name: &str, kind: AlgorithmKind) -> Builder {
    let s = FRAC_1_SQRT_2;
    // The line is B, so it is projected or reflected first.
    Builder::new(name, "The unit circle and the line x₂ = √2/2", kind, "A", "B")
        .set(
            "A",
            SetConfig::Sphere {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        )
        .set("B", line(&[0.0, s], &[1.0, 0.0]))
        .x0(&[s + 0.07, s - 0.07])
        .solution(SolutionConfig::Points {
            points: vec![vec![s, s], vec![-s, s]],
        })
        .budget(10_000, 1e-10)
}

/// The preset with the given name.
pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
    let s = FRAC_1_SQRT_2;
    let cfg = match name {
        "example-i" => two_lines(name, AlgorithmKind::Dr)
            .checks(vec![
                check("ac1-dr-converges", Check::Converges { tol: 1e-10 }),
                check(
                    "ac1-dr-rate",
                    Check::Rate {
                        target: s,
                        tolerance: 0.01,
                    },
                ),
                check(
                    "ac1-dr-bound",
                    Check::PredictedBound {
                        algorithm: AlgorithmKind::Dr,
                    },
                ),
                check("ac1-strongly-regular", Check::StronglyRegular { expected: true }),
                check(
                    "ac1-normal-angle",
                    Check::NormalAngle {
                        target: s,
                        tolerance: 1e-12,
                    },
                ),
                check(
                    "ac1-friedrichs",
                    Check::Friedrichs {
                        target: s,
                        tolerance: 1e-10,
                    },
                ),
            ])
            .build(),
        "example-i-map" => two_lines(name, AlgorithmKind::Map)
            .checks(vec![
                check("ac1-map-converges", Check::Converges { tol: 1e-10 }),
                check(
                    "ac1-map-rate",
                    Check::Rate {
                        target: 0.5,
                        tolerance: 0.01,
                    },
                ),
                check(
                    "ac1-map-bound",
                    Check::PredictedBound {
                        algorithm: AlgorithmKind::Map,
                    },
                ),
            ])
            .build(),
        "example-ii" => lines_in_r3(name, "Two lines in R³ meeting at the origin")
            .x0(&[0.0, 0.0, 1.0])
            .checks(vec![
                check(
                    "ac2-fixed-point-off-s",
                    Check::Stagnates {
                        dist: 1.0,
                        tolerance: 1e-12,
                    },
                ),
                check("ac2-not-strongly-regular", Check::StronglyRegular { expected: false }),
                check(
                    "ac2-friedrichs",
                    Check::Friedrichs {
                        target: s,
                        tolerance: 1e-10,
                    },
                ),
            ])
            .build(),
        "example-ii-plane" => lines_in_r3(name, "Two lines in R³, started in their span")
            .x0(&[1.0, 0.5, 0.0])
            .checks(vec![
                check("ac2-plane-converges", Check::Converges { tol: 1e-10 }),
                check(
                    "ac2-plane-rate",
                    Check::Rate {
                        target: s,
                        tolerance: 0.01,
                    },
                ),
            ])
            .build(),
        "example-iii" => {
            let mut b = line_and_ball(name, AlgorithmKind::Map)
                .x0(&[1.0, 0.0])
                .budget(1_000_000, 1e-6)
                .checks(vec![
                    check(
                        "ac3-map-reaches-budget-floor",
                        Check::FinalDistAtMost {
                            bound: TANGENT_MAP_REACHABLE,
                        },
                    ),
                    check("ac3-map-sublinear", Check::Linear { expected: false }),
                    check("ac3-not-strongly-regular", Check::StronglyRegular { expected: false }),
                ]);
            b.cfg.outputs.csv_stride = Some(1000);
            b.build()
        }
        "example-iii-dr" => line_and_ball(name, AlgorithmKind::Dr)
            .x0(&[0.5, 0.5])
            .budget(10_000, 1e-10)
            .checks(vec![check(
                "ac3-dr-fixed-point-off-s",
                Check::FixedPointOffSolution {
                    radius: 1.0,
                    samples: 16,
                    min_dist: 0.01,
                },
            )])
            .build(),
        "example-iv" | "example-iv-dr" => {
            let kind = if name == "example-iv" {
                AlgorithmKind::Map
            } else {
                AlgorithmKind::Dr
            };
            let prefix = if kind == AlgorithmKind::Map {
                "ac4-map"
            } else {
                "ac4-dr"
            };
            cross_and_diagonal(name, kind)
                .region(&[0.0, 0.0], 1.0, 100, 7)
                .checks(vec![
                    check(&format!("{prefix}-converges"), Check::Converges { tol: 1e-8 }),
                    check(
                        "ac4-cross-subregular",
                        Check::Subregularity {
                            set: "A".into(),
                            min: 0.0,
                            max: 1e-9,
                        },
                    ),
                    check("ac4-strongly-regular", Check::StronglyRegular { expected: true }),
                ])
                .build()
        }
        "example-v" | "example-v-map" => {
            let kind = if name == "example-v" {
                AlgorithmKind::Dr
            } else {
                AlgorithmKind::Map
            };
            let prefix = if kind == AlgorithmKind::Dr { "ac5-dr" } else { "ac5-map" };
            let mut checks = vec![
                check(&format!("{prefix}-converges"), Check::Converges { tol: 1e-10 }),
                check(&format!("{prefix}-linear"), Check::Linear { expected: true }),
                check(&format!("{prefix}-rate"), Check::RateAtMost { bound: 0.99 }),
            ];
            if kind == AlgorithmKind::Dr {
                checks.push(check("ac5-dr-bound", Check::PredictedBound { algorithm: kind }));
            }
            circle_and_line(name, kind).checks(checks).build()
        }
        "kinked-regularity" => Builder::new(
            name,
            "A region with a kink at the origin, against the origin itself",
            AlgorithmKind::Map,
            "A",
            "B",
        )
        .set("A", SetConfig::Kinked)
        .set(
            "B",
            SetConfig::Affine {
                offset: vec![0.0, 0.0],
                basis: vec![],
            },
        )
        .x0(&[0.5, 0.5])
        .solution(singleton(&[0.0, 0.0]))
        .checks(vec![
            check(
                "ac6-kinked-pair-regularity",
                Check::PairRegularity {
                    set: "A".into(),
                    delta: 1.0,
                    min: 0.70,
                    max: 0.7072,
                },
            ),
            check("ac6-kinked-zero-cone", Check::ZeroNormalCone { set: "A".into() }),
            check(
                "ac6-kinked-subregular",
                Check::Subregularity {
                    set: "A".into(),
                    min: 0.0,
                    max: 1e-9,
                },
            ),
        ])
        .build(),
        "cross" => cross_and_diagonal(name, AlgorithmKind::Map)
            .x0(&[0.3, 0.1])
            .checks(vec![
                check(
                    "ac4-cross-subregular",
                    Check::Subregularity {
                        set: "A".into(),
                        min: 0.0,
                        max: 1e-9,
                    },
                ),
                check(
                    "ac4-cross-not-regular",
                    Check::PairRegularity {
                        set: "A".into(),
                        delta: 1.0,
                        min: 0.99,
                        max: 1.0,
                    },
                ),
                check("ac4-cross-converges", Check::Converges { tol: 1e-10 }),
            ])
            .build(),
        _ => return Err(CliError::UnknownPreset(name.into())),
    };
    Ok(cfg)
}
