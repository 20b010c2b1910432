//! Wire formats: JSON/CSV shapes of every command's input and output.

use serde::{Deserialize, Serialize};

use nalgebra::Vector3;
use octasg::kinematics::{Configuration, PlatformScrew, Pose};
use octasg::orientation::EulerOrientation;
use octasg::planner::{GProfile, PlanFailure, SingularityField};
use octasg::redundant_legs::LambdaSweep;
use octasg::singularity::{Branch, PositionSet, UnavoidableStratum};

/// Pose input: `{"e":[e0,e1,e2,e3],"s":[x,y,z]}`, translation optional for
/// orientation-only commands.
#[derive(Debug, Deserialize)]
pub struct PoseDto {
    pub e: [f64; 4],
    #[serde(default)]
    pub s: Option<[f64; 3]>,
}

impl PoseDto {
    pub fn into_pose(self) -> Result<Pose, String> {
        let pose = Pose::new(
            EulerOrientation::from_array(self.e),
            Vector3::from(self.s.unwrap_or([0.0; 3])),
        );
        if !pose.is_valid() {
            return Err("pose components must be finite and the quadruple nonzero".into());
        }
        Ok(pose)
    }
}

/// Configuration input: pose fields plus `"g"`.
#[derive(Debug, Deserialize)]
pub struct ConfigDto {
    pub e: [f64; 4],
    #[serde(default)]
    pub s: Option<[f64; 3]>,
    pub g: f64,
}

impl ConfigDto {
    pub fn into_config(self) -> Result<Configuration, String> {
        let pose = PoseDto {
            e: self.e,
            s: self.s,
        }
        .into_pose()?;
        let cfg = Configuration::new(pose, self.g);
        if !cfg.is_valid() {
            return Err(format!("base circumradius must be positive, got {}", self.g));
        }
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct PoseOut {
    e: [f64; 4],
    s: [f64; 3],
}

impl From<&Pose> for PoseOut {
    fn from(p: &Pose) -> Self {
        Self {
            e: p.orientation.to_array(),
            s: [p.s.x, p.s.y, p.s.z],
        }
    }
}

pub fn lengths_json(lengths: &[f64; 6]) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        lengths: &'a [f64; 6],
    }
    serde_json::to_string_pretty(&Out { lengths }).unwrap()
}

pub fn screw_json(screw: &PlatformScrew) -> String {
    #[derive(Serialize)]
    struct Out {
        q: [f64; 3],
        qbar: [f64; 3],
    }
    serde_json::to_string_pretty(&Out {
        q: [screw.q.x, screw.q.y, screw.q.z],
        qbar: [screw.qbar.x, screw.qbar.y, screw.qbar.z],
    })
    .unwrap()
}

pub fn sigma_json(c: &octasg::SigmaCoefficients, tol: f64) -> String {
    #[derive(Serialize)]
    struct Out {
        c2: f64,
        c1: f64,
        c0: f64,
        scale: f64,
        unavoidable: bool,
    }
    serde_json::to_string_pretty(&Out {
        c2: c.c2,
        c1: c.c1,
        c0: c.c0,
        scale: c.scale,
        unavoidable: c.max_relative_coefficient() < tol,
    })
    .unwrap()
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum PositionOut {
    Plane { z: f64 },
    All,
    Point { p: [f64; 3] },
    Line { point: [f64; 3], dir: [f64; 3] },
}

impl From<&PositionSet> for PositionOut {
    fn from(ps: &PositionSet) -> Self {
        match ps {
            PositionSet::Plane { z } => PositionOut::Plane { z: *z },
            PositionSet::All => PositionOut::All,
            PositionSet::Point { p } => PositionOut::Point {
                p: [p.x, p.y, p.z],
            },
            PositionSet::Line { point, dir } => PositionOut::Line {
                point: [point.x, point.y, point.z],
                dir: [dir.x, dir.y, dir.z],
            },
        }
    }
}

pub fn strata_json(strata: &[UnavoidableStratum]) -> String {
    #[derive(Serialize)]
    struct Out {
        row: u8,
        #[serde(skip_serializing_if = "Option::is_none")]
        branch: Option<&'static str>,
        dim: u8,
        position: PositionOut,
        residuals: Vec<f64>,
    }
    let rows: Vec<Out> = strata
        .iter()
        .map(|s| Out {
            row: s.row,
            branch: s.branch.map(Branch::symbol),
            dim: s.dim,
            position: (&s.position_set).into(),
            residuals: s.orientation_residuals.clone(),
        })
        .collect();
    serde_json::to_string_pretty(&rows).unwrap()
}

pub fn field_json(field: &SingularityField) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        tau: &'a [f64],
        g: &'a [f64],
        margin: &'a [Vec<f64>],
        clearance: &'a [Vec<f64>],
    }
    serde_json::to_string_pretty(&Out {
        tau: &field.tau_grid,
        g: &field.g_grid,
        margin: &field.margins,
        clearance: &field.clearances,
    })
    .unwrap()
}

/// Row-major CSV: one line per (τ, g) cell.
pub fn field_csv(field: &SingularityField) -> String {
    let mut out = String::from("tau,g,margin,clearance\n");
    for (i, &tau) in field.tau_grid.iter().enumerate() {
        for (j, &g) in field.g_grid.iter().enumerate() {
            out.push_str(&format!(
                "{tau},{g},{m},{c}\n",
                m = field.margins[i][j],
                c = field.clearances[i][j]
            ));
        }
    }
    out
}

pub fn crossings_json(g: f64, taus: &[f64]) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        g: f64,
        tau: &'a [f64],
    }
    serde_json::to_string_pretty(&Out { g, tau: taus }).unwrap()
}

pub fn profile_json(p: &GProfile) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        tau: &'a [f64],
        g: &'a [f64],
        min_margin: f64,
        min_clearance: f64,
        total_variation: f64,
    }
    serde_json::to_string_pretty(&Out {
        tau: &p.tau,
        g: &p.g,
        min_margin: p.min_margin,
        min_clearance: p.min_clearance,
        total_variation: p.total_variation,
    })
    .unwrap()
}

pub fn failure_json(f: &PlanFailure) -> String {
    #[derive(Serialize)]
    struct Evidence<'a> {
        g: &'a [f64],
        margin: &'a [f64],
        clearance: &'a [f64],
    }
    #[derive(Serialize)]
    struct Out<'a> {
        kind: &'static str,
        blocking_tau: f64,
        evidence: Evidence<'a>,
    }
    serde_json::to_string_pretty(&Out {
        kind: f.kind.as_str(),
        blocking_tau: f.blocking_tau,
        evidence: Evidence {
            g: &f.g_grid,
            margin: &f.margins,
            clearance: &f.clearances,
        },
    })
    .unwrap()
}

pub fn sweep_json(pose: &Pose, sweep: &LambdaSweep) -> String {
    #[derive(Serialize)]
    struct Out {
        pose: PoseOut,
        grid_n: usize,
        max_margin: f64,
        argmax_lambda: [f64; 3],
        skipped_cells: usize,
    }
    serde_json::to_string_pretty(&Out {
        pose: pose.into(),
        grid_n: sweep.grid_n,
        max_margin: sweep.max_margin,
        argmax_lambda: sweep.argmax_lambda,
        skipped_cells: sweep.skipped_cells,
    })
    .unwrap()
}

pub fn samples_json(row: u8, branch: Option<Branch>, poses: &[Pose]) -> String {
    #[derive(Serialize)]
    struct Out {
        row: u8,
        #[serde(skip_serializing_if = "Option::is_none")]
        branch: Option<&'static str>,
        poses: Vec<PoseOut>,
    }
    serde_json::to_string_pretty(&Out {
        row,
        branch: branch.map(Branch::symbol),
        poses: poses.iter().map(PoseOut::from).collect(),
    })
    .unwrap()
}
