//! The goal-oriented adaptive loop: solve, estimate, mark, refine.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::assembly::{solve_primal_dual, DiscreteSolution, Tabulated};
use crate::benchmarks::Problem;
use crate::error::{Error, Result};
use crate::estimators::{estimate_level_fields, GoalReport, LevelFields, LevelInputs};
use crate::fespace::P2DofMap;
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefinementMode {
    Adaptive,
    Uniform,
}

impl RefinementMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RefinementMode::Adaptive => "adaptive",
            RefinementMode::Uniform => "uniform",
        }
    }
}

impl fmt::Display for RefinementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RefinementMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<RefinementMode> {
        match s {
            "adaptive" => Ok(RefinementMode::Adaptive),
            "uniform" => Ok(RefinementMode::Uniform),
            other => Err(Error::InvalidConfig(format!("unknown refinement mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveConfig {
    /// Dörfler parameter in (0, 1).
    pub theta: f64,
    /// Number of refinements; levels `0..=levels` are computed.
    pub levels: usize,
    /// Interior penalty parameter.
    pub sigma: f64,
    pub mode: RefinementMode,
    /// Backward-error tolerance of the linear solves.
    pub tol: f64,
    /// Stop early once `η_abs` drops below this value.
    pub stop_tol: Option<f64>,
    /// Also evaluate the bound that keeps the data oscillation.
    pub full_bound: bool,
}

impl Default for AdaptiveConfig {
    fn default() -> AdaptiveConfig {
        AdaptiveConfig {
            theta: 0.25,
            levels: 13,
            sigma: 20.0,
            mode: RefinementMode::Adaptive,
            tol: 1e-10,
            stop_tol: None,
            full_bound: false,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidTheta(self.theta));
        }
        if self.levels < 1 {
            return Err(Error::InvalidConfig("at least one refinement level is required".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidPenalty(self.sigma));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if let Some(s) = self.stop_tol {
            if !(s > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "stopping tolerance must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Summary of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub n_triangles: usize,
    /// Free P2 unknowns.
    pub n_dofs: usize,
    pub report: GoalReport,
    /// Number of triangles marked for refinement; zero on the last level.
    pub n_marked: usize,
    pub seconds: f64,
}

/// Everything computed on one level, handed to observers.
pub struct LevelState<'a> {
    pub mesh: &'a Mesh,
    pub dofs: &'a P2DofMap,
    pub load: &'a Tabulated,
    pub goal: &'a Tabulated,
    pub solution: &'a DiscreteSolution,
    pub fields: &'a LevelFields,
    pub record: &'a LevelRecord,
}

/// Smallest prefix of the indicators sorted by decreasing size (ties by
/// index) whose sum reaches `theta` times the total. Takes squared
/// indicators and returns sorted triangle indices.
pub fn dorfler_mark(squared: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    if let Some(&value) = squared.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::NegativeEstimator {
            name: "indicator",
            value,
        });
    }
    let mut order: Vec<usize> = (0..squared.len()).collect();
    order.sort_by(|&a, &b| squared[b].total_cmp(&squared[a]).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&i| squared[i]).sum();
    let mut marked = Vec::new();
    if total == 0.0 {
        return Ok(marked);
    }
    let target = theta * total;
    let mut acc = 0.0;
    for &i in &order {
        if acc >= target {
            break;
        }
        acc += squared[i];
        marked.push(i);
    }
    marked.sort_unstable();
    Ok(marked)
}

fn squares(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x * x).collect()
}

/// Union of the three Dörfler sets of the primal, dual and
/// nonconformity indicators.
pub fn mark_level(report: &GoalReport, theta: f64) -> Result<Vec<usize>> {
    let mut set = BTreeSet::new();
    for ind in [&report.eta_h_k, &report.eta_tilde_k, &report.eta_nc_k] {
        set.extend(dorfler_mark(&squares(ind), theta)?);
    }
    Ok(set.into_iter().collect())
}

/// Runs the loop and returns one record per level.
pub fn run_adaptive(problem: &Problem, config: &AdaptiveConfig) -> Result<Vec<LevelRecord>> {
    run_adaptive_with(problem, config, |_| Ok(()))
}

/// [`run_adaptive`] calling `observe` after every level.
pub fn run_adaptive_with(
    problem: &Problem,
    config: &AdaptiveConfig,
    mut observe: impl FnMut(&LevelState) -> Result<()>,
) -> Result<Vec<LevelRecord>> {
    config.validate()?;
    let mut mesh = problem.initial_mesh.clone();
    let mut records = Vec::with_capacity(config.levels + 1);
    for level in 0..=config.levels {
        let at = |e: Error| Error::AtLevel {
            level,
            source: Box::new(e),
        };
        let start = Instant::now();
        let dofs = P2DofMap::new(&mesh);
        let load = Tabulated::new(&mesh, problem.load.as_ref());
        let goal = Tabulated::new(&mesh, &problem.goal);
        let solution = solve_primal_dual(&mesh, &dofs, config.sigma, &load, &goal, config.tol).map_err(at)?;
        let input = LevelInputs {
            mesh: &mesh,
            dofs: &dofs,
            load: &load,
            goal: &goal,
            solution: &solution,
            q_ref: Some(problem.q_ref),
            full_bound: config.full_bound,
        };
        let (report, fields) = estimate_level_fields(&input).map_err(at)?;
        let last = level == config.levels || config.stop_tol.is_some_and(|s| report.eta_abs < s);
        let next = if last {
            None
        } else {
            Some(match config.mode {
                RefinementMode::Uniform => (mesh.n_triangles(), mesh.refine_uniform()),
                RefinementMode::Adaptive => {
                    let marked = mark_level(&report, config.theta).map_err(at)?;
                    (marked.len(), mesh.refine_nvb(&marked))
                }
            })
        };
        let record = LevelRecord {
            level,
            n_triangles: mesh.n_triangles(),
            n_dofs: dofs.free_count(),
            report,
            n_marked: next.as_ref().map_or(0, |(n, _)| *n),
            seconds: start.elapsed().as_secs_f64(),
        };
        observe(&LevelState {
            mesh: &mesh,
            dofs: &dofs,
            load: &load,
            goal: &goal,
            solution: &solution,
            fields: &fields,
            record: &record,
        })
        .map_err(at)?;
        records.push(record);
        match next {
            Some((_, refined)) => mesh = refined,
            None => break,
        }
    }
    Ok(records)
}
