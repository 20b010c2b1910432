//! Base-reconfiguration planning along a prescribed platform motion.
//!
//! The workflow: sample the motion into a `(τ, g)` grid of singularity
//! margins and leg clearances ([`singularity_field`]), locate singularity
//! crossings at a fixed base radius ([`detect_crossings`]), and search the
//! grid for a reconfiguration profile `g(τ)` that stays clear of
//! singularities and leg interference ([`plan_g_profile`]). The planner is a
//! deterministic dynamic program: it first maximizes the worst margin along
//! the profile, then minimizes total variation of `g` among the maximin
//! optima, and its output is re-checkable cell by cell.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{leg_endpoints, margin, Configuration, Pose};

/// Leg pairs whose clearance is meaningful: pairs sharing a double joint
/// (platform pairs (1,2), (3,4), (5,6); base pairs (2,3), (4,5), (6,1)) are
/// excluded since they touch at the shared anchor by construction.
pub const CLEARANCE_PAIRS: [(usize, usize); 9] = [
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 4),
    (2, 5),
    (3, 5),
];

/// A platform motion given by pose samples over τ ∈ [0, 1]. Between samples
/// the orientation follows the shorter-arc spherical interpolation of the
/// canonical quadruples and the translation interpolates linearly, so a
/// two-pose path is the plain slerp/lerp motion.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPath {
    samples: Vec<Pose>,
}

/// Slerp-plus-lerp path between two poses with `n` samples.
pub fn make_path(start: &Pose, end: &Pose, n: usize) -> Result<MotionPath> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "path needs at least 2 samples, got {n}"
        )));
    }
    if !start.is_valid() || !end.is_valid() {
        return Err(Error::InvalidParameter("invalid endpoint pose".into()));
    }
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        samples.push(interpolate(start, end, t));
    }
    Ok(MotionPath { samples })
}

fn interpolate(a: &Pose, b: &Pose, t: f64) -> Pose {
    Pose::new(
        a.orientation.slerp(&b.orientation, t),
        a.s + (b.s - a.s) * t,
    )
}

impl MotionPath {
    /// Wrap an explicit pose list (uniform τ spacing).
    pub fn from_poses(samples: Vec<Pose>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "path needs at least 2 samples".into(),
            ));
        }
        if samples.iter().any(|p| !p.is_valid()) {
            return Err(Error::InvalidParameter("invalid pose in path".into()));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Pose] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// τ value of sample `i`.
    pub fn tau(&self, i: usize) -> f64 {
        i as f64 / (self.samples.len() - 1) as f64
    }

    /// Continuous evaluation: piecewise slerp/lerp between adjacent samples.
    pub fn pose_at(&self, tau: f64) -> Pose {
        let tau = tau.clamp(0.0, 1.0);
        let nseg = self.samples.len() - 1;
        let f = tau * nseg as f64;
        let i = (f.floor() as usize).min(nseg - 1);
        interpolate(&self.samples[i], &self.samples[i + 1], f - i as f64)
    }
}

/// Margins and clearances over a `(τ, g)` grid. Cells where a leg
/// degenerates hold `NaN` and are treated as infeasible by the planner.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityField {
    pub tau_grid: Vec<f64>,
    pub g_grid: Vec<f64>,
    /// `margins[i][j]` = normalized determinant at `(tau_grid[i], g_grid[j])`.
    pub margins: Vec<Vec<f64>>,
    /// Minimum leg-pair clearance at each cell.
    pub clearances: Vec<Vec<f64>>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn check_g_range(gmin: f64, gmax: f64, ng: usize) -> Result<()> {
    if !(gmin.is_finite() && gmax.is_finite() && gmin > 0.0 && gmax > gmin) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < gmin < gmax, got [{gmin}, {gmax}]"
        )));
    }
    if ng < 2 {
        return Err(Error::InvalidParameter(format!(
            "g grid needs at least 2 samples, got {ng}"
        )));
    }
    Ok(())
}

/// Evaluate margins and clearances over the motion samples × a uniform `g`
/// grid. Per-cell work is independent and runs in parallel.
pub fn singularity_field(
    path: &MotionPath,
    gmin: f64,
    gmax: f64,
    ng: usize,
) -> Result<SingularityField> {
    check_g_range(gmin, gmax, ng)?;
    let g_grid = linspace(gmin, gmax, ng);
    let tau_grid: Vec<f64> = (0..path.len()).map(|i| path.tau(i)).collect();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = path
        .samples()
        .par_iter()
        .map(|pose| {
            let mut m = Vec::with_capacity(ng);
            let mut c = Vec::with_capacity(ng);
            for &g in &g_grid {
                let cfg = Configuration::new(*pose, g);
                m.push(margin(&cfg).unwrap_or(f64::NAN));
                c.push(leg_clearance(&cfg).unwrap_or(f64::NAN));
            }
            (m, c)
        })
        .collect();
    let (margins, clearances) = rows.into_iter().unzip();
    Ok(SingularityField {
        tau_grid,
        g_grid,
        margins,
        clearances,
    })
}

/// τ values where the margin changes sign along the path at fixed `g`,
/// refined by bisection to |Δτ| < 1e-8. Degenerate samples are skipped.
pub fn detect_crossings(path: &MotionPath, g: f64) -> Vec<f64> {
    let n = path.len();
    let eval = |tau: f64| -> Option<f64> {
        margin(&Configuration::new(path.pose_at(tau), g)).ok()
    };
    let taus: Vec<f64> = (0..n).map(|i| path.tau(i)).collect();
    let values: Vec<Option<f64>> = taus.iter().map(|&t| eval(t)).collect();
    let mut out = Vec::new();
    for i in 0..n - 1 {
        let (Some(a), Some(b)) = (values[i], values[i + 1]) else {
            continue;
        };
        if a == 0.0 {
            out.push(taus[i]);
            continue;
        }
        if a * b >= 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (taus[i], taus[i + 1], a);
        while hi - lo > 1e-8 {
            let mid = 0.5 * (lo + hi);
            let fm = eval(mid).unwrap_or(0.0);
            if fm == 0.0 {
                lo = mid;
                break;
            }
            if flo * fm < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    if values.last().copied().flatten() == Some(0.0) {
        out.push(1.0);
    }
    out
}

/// Closest distance between segments `[p1, q1]` and `[p2, q2]`.
pub fn segment_distance(
    p1: &Vector3<f64>,
    q1: &Vector3<f64>,
    p2: &Vector3<f64>,
    q2: &Vector3<f64>,
) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut sv = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut tv = (b * sv + f) / e;
            if tv < 0.0 {
                tv = 0.0;
                sv = (-c / a).clamp(0.0, 1.0);
            } else if tv > 1.0 {
                tv = 1.0;
                sv = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = sv;
            t = tv;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Minimum clearance over the nine leg pairs that do not share a double
/// joint. Legs are zero-thickness segments from base anchor to platform
/// anchor; a physical leg radius belongs in the clearance threshold, not in
/// the geometry.
pub fn leg_clearance(config: &Configuration) -> Result<f64> {
    let ends = leg_endpoints(config)?;
    for (leg, (b, p)) in ends.iter().enumerate() {
        let len = (p - b).norm();
        if len < crate::kinematics::MIN_LEG_LENGTH {
            return Err(Error::DegenerateLeg { leg, length: len });
        }
    }
    let mut best = f64::INFINITY;
    for &(i, j) in &CLEARANCE_PAIRS {
        let d = segment_distance(&ends[i].0, &ends[i].1, &ends[j].0, &ends[j].1);
        best = best.min(d);
    }
    Ok(best)
}

/// Grid and feasibility parameters for [`plan_g_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanParams {
    pub gmin: f64,
    pub gmax: f64,
    pub ng: usize,
    /// Minimum |margin| for a feasible cell.
    pub eps_det: f64,
    /// Minimum leg clearance for a feasible cell.
    pub eps_clear: f64,
    /// Maximum |Δg| between consecutive τ columns.
    pub rate_bound: f64,
}

impl PlanParams {
    fn validate(&self) -> Result<()> {
        check_g_range(self.gmin, self.gmax, self.ng)?;
        if self.eps_det <= 0.0 || self.eps_clear < 0.0 || self.rate_bound <= 0.0 {
            return Err(Error::InvalidParameter(
                "eps_det, rate_bound must be positive and eps_clear nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// A feasible reconfiguration profile with its certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct GProfile {
    pub tau: Vec<f64>,
    pub g: Vec<f64>,
    /// Smallest |margin| along the profile.
    pub min_margin: f64,
    /// Smallest leg clearance along the profile.
    pub min_clearance: f64,
    /// Σ |Δg| over consecutive columns.
    pub total_variation: f64,
}

/// Why planning failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// The first τ column has no feasible cell.
    InfeasibleStart,
    /// The last τ column has no feasible cell.
    InfeasibleEnd,
    /// Some interior τ column has no feasible cell.
    InfeasibleColumn,
    /// Feasible cells exist in every column but no rate-bounded corridor
    /// connects start to end.
    Disconnected,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::InfeasibleStart => "infeasible-start",
            FailureKind::InfeasibleEnd => "infeasible-end",
            FailureKind::InfeasibleColumn => "infeasible-column",
            FailureKind::Disconnected => "disconnected",
        }
    }
}

/// Certificate for a failed plan: the margins and clearances of the full
/// blocking column.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanFailure {
    pub kind: FailureKind,
    pub blocking_tau: f64,
    pub g_grid: Vec<f64>,
    pub margins: Vec<f64>,
    pub clearances: Vec<f64>,
}

/// Planner result: a certified profile or a failure certificate.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Profile(GProfile),
    Failure(PlanFailure),
}

fn cell_feasible(m: f64, c: f64, p: &PlanParams) -> bool {
    m.is_finite() && c.is_finite() && m.abs() >= p.eps_det && c >= p.eps_clear
}

/// Plan a reconfiguration profile on the field grid. A cell is feasible when
/// its |margin| and clearance meet the thresholds; edges connect consecutive
/// τ columns with |Δg| ≤ `rate_bound` and equal margin sign (a sign flip
/// between feasible cells would cross the singular surface between grid
/// points). Objective: maximize the minimum |margin| along the profile,
/// then minimize Σ|Δg| among maximin-optimal profiles.
pub fn plan_g_profile(path: &MotionPath, params: &PlanParams) -> Result<PlanOutcome> {
    params.validate()?;
    let field = singularity_field(path, params.gmin, params.gmax, params.ng)?;
    Ok(plan_on_field(&field, params))
}

/// [`plan_g_profile`] on a precomputed field. The grids come from the field;
/// only the feasibility thresholds and the rate bound of `params` apply.
pub fn plan_on_field(field: &SingularityField, params: &PlanParams) -> PlanOutcome {
    let ntau = field.tau_grid.len();
    let ng = field.g_grid.len();
    let feasible: Vec<Vec<bool>> = (0..ntau)
        .map(|i| {
            (0..ng)
                .map(|j| cell_feasible(field.margins[i][j], field.clearances[i][j], params))
                .collect()
        })
        .collect();

    // any all-infeasible column is a certificate that no profile exists
    for (i, column) in feasible.iter().enumerate() {
        if column.iter().all(|&f| !f) {
            let kind = if i == 0 {
                FailureKind::InfeasibleStart
            } else if i == ntau - 1 {
                FailureKind::InfeasibleEnd
            } else {
                FailureKind::InfeasibleColumn
            };
            return PlanOutcome::Failure(column_certificate(field, i, kind));
        }
    }

    let step_ok = |ja: usize, jb: usize, i: usize| -> bool {
        (field.g_grid[ja] - field.g_grid[jb]).abs() <= params.rate_bound * (1.0 + 1e-12)
            && field.margins[i][ja].signum() == field.margins[i + 1][jb].signum()
    };
    let abs_margin = |i: usize, j: usize| field.margins[i][j].abs();

    // phase 1: maximin |margin| over rate-bounded, sign-consistent profiles
    let neg_inf = f64::NEG_INFINITY;
    let mut value = vec![neg_inf; ng];
    for (j, v) in value.iter_mut().enumerate() {
        if feasible[0][j] {
            *v = abs_margin(0, j);
        }
    }
    for (i, column) in feasible.iter().enumerate().skip(1) {
        let mut next = vec![neg_inf; ng];
        for (j, nj) in next.iter_mut().enumerate() {
            if !column[j] {
                continue;
            }
            let mut best = neg_inf;
            for (k, &vk) in value.iter().enumerate() {
                if vk > neg_inf && step_ok(k, j, i - 1) {
                    best = best.max(vk.min(abs_margin(i, j)));
                }
            }
            *nj = best;
        }
        if next.iter().all(|v| *v == neg_inf) {
            return PlanOutcome::Failure(column_certificate(field, i, FailureKind::Disconnected));
        }
        value = next;
    }
    let maximin = value.iter().cloned().fold(neg_inf, f64::max);

    // phase 2: among cells meeting the maximin level, minimize Σ|Δg|
    let ok = |i: usize, j: usize| feasible[i][j] && abs_margin(i, j) >= maximin;
    let mut cost = vec![f64::INFINITY; ng];
    let mut parent = vec![vec![usize::MAX; ng]; ntau];
    for (j, c) in cost.iter_mut().enumerate() {
        if ok(0, j) {
            *c = 0.0;
        }
    }
    for (i, parent_row) in parent.iter_mut().enumerate().skip(1) {
        let mut next = vec![f64::INFINITY; ng];
        for j in 0..ng {
            if !ok(i, j) {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut arg = usize::MAX;
            for (k, &ck) in cost.iter().enumerate() {
                if ck.is_finite() && step_ok(k, j, i - 1) {
                    let cand = ck + (field.g_grid[j] - field.g_grid[k]).abs();
                    if cand < best {
                        best = cand;
                        arg = k;
                    }
                }
            }
            next[j] = best;
            parent_row[j] = arg;
        }
        cost = next;
    }
    let (mut j, _) = cost
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_finite())
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("maximin profile exists by phase 1");

    let mut indices = vec![0usize; ntau];
    for i in (0..ntau).rev() {
        indices[i] = j;
        if i > 0 {
            j = parent[i][j];
        }
    }

    let g: Vec<f64> = indices.iter().map(|&j| field.g_grid[j]).collect();
    let min_margin = indices
        .iter()
        .enumerate()
        .map(|(i, &j)| abs_margin(i, j))
        .fold(f64::INFINITY, f64::min);
    let min_clearance = indices
        .iter()
        .enumerate()
        .map(|(i, &j)| field.clearances[i][j])
        .fold(f64::INFINITY, f64::min);
    let total_variation = g.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    PlanOutcome::Profile(GProfile {
        tau: field.tau_grid.clone(),
        g,
        min_margin,
        min_clearance,
        total_variation,
    })
}

fn column_certificate(field: &SingularityField, i: usize, kind: FailureKind) -> PlanFailure {
    PlanFailure {
        kind,
        blocking_tau: field.tau_grid[i],
        g_grid: field.g_grid.clone(),
        margins: field.margins[i].clone(),
        clearances: field.clearances[i].clone(),
    }
}

/// Re-check a profile against fresh margin/clearance evaluations, without
/// trusting the planner's own field. Returns the worst margin and clearance.
pub fn verify_profile(
    path: &MotionPath,
    profile: &GProfile,
    eps_det: f64,
    eps_clear: f64,
) -> Result<(f64, f64)> {
    if profile.tau.len() != path.len() || profile.g.len() != path.len() {
        return Err(Error::InvalidParameter(
            "profile does not match path sampling".into(),
        ));
    }
    let mut worst_m = f64::INFINITY;
    let mut worst_c = f64::INFINITY;
    for (i, pose) in path.samples().iter().enumerate() {
        let cfg = Configuration::new(*pose, profile.g[i]);
        let m = margin(&cfg)?.abs();
        let c = leg_clearance(&cfg)?;
        if m < eps_det || c < eps_clear {
            return Err(Error::InvalidParameter(format!(
                "profile violates feasibility at tau {}",
                profile.tau[i]
            )));
        }
        worst_m = worst_m.min(m);
        worst_c = worst_c.min(c);
    }
    Ok((worst_m, worst_c))
}
