//! Nelder-Mead simplex search, decoupled from the physics through a
//! plain objective-function contract.
//!
//! One iteration reflects the worst vertex through the centroid of the
//! others and, depending on how the reflected value compares, expands,
//! contracts (outside or inside), or shrinks every non-best vertex
//! toward the best one. Proposals are clamped coordinate-wise to the
//! initialization box before evaluation, since the physical field
//! amplitudes they encode are bounded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::exec;

/// Search hyper-parameters. The four move factors default to the
/// standard choices alpha = 1, gamma = 2, beta = 1/2, shrink = 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Reflection factor, > 0.
    pub alpha: f64,
    /// Expansion factor, > 1.
    pub gamma_exp: f64,
    /// Contraction factor in (0, 1).
    pub beta: f64,
    /// Shrinkage factor in (0, 1).
    pub delta_shrink: f64,
    pub max_iterations: usize,
    /// Box from which initial vertices are drawn and into which every
    /// proposal is clamped.
    pub init_range: (f64, f64),
    pub seed: u64,
    /// Stop early when the best value improves by less than this over
    /// `stall_window` iterations.
    pub stall_tolerance: Option<f64>,
    pub stall_window: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma_exp: 2.0,
            beta: 0.5,
            delta_shrink: 0.5,
            max_iterations: 500,
            init_range: (-1.0, 1.0),
            seed: 0,
            stall_tolerance: None,
            stall_window: 10,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(CoreError::InvalidArgument("alpha must be > 0".into()));
        }
        if self.gamma_exp.is_nan() || self.gamma_exp <= 1.0 {
            return Err(CoreError::InvalidArgument("gamma_exp must be > 1".into()));
        }
        if self.beta.is_nan() || self.beta <= 0.0 || self.beta >= 1.0 {
            return Err(CoreError::InvalidArgument("beta must be in (0, 1)".into()));
        }
        if self.delta_shrink.is_nan() || self.delta_shrink <= 0.0 || self.delta_shrink >= 1.0 {
            return Err(CoreError::InvalidArgument("delta_shrink must be in (0, 1)".into()));
        }
        if self.init_range.0.is_nan() || self.init_range.1.is_nan() || self.init_range.0 >= self.init_range.1 {
            return Err(CoreError::InvalidArgument("init_range must satisfy lo < hi".into()));
        }
        if self.stall_tolerance.is_some() && self.stall_window == 0 {
            return Err(CoreError::InvalidArgument("stall_window must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which move produced the accepted vertex of an iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
}

impl Move {
    pub fn as_str(self) -> &'static str {
        match self {
            Move::Reflect => "reflect",
            Move::Expand => "expand",
            Move::ContractOutside => "contract_outside",
            Move::ContractInside => "contract_inside",
            Move::Shrink => "shrink",
        }
    }
}

impl std::str::FromStr for Move {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflect" => Ok(Move::Reflect),
            "expand" => Ok(Move::Expand),
            "contract_outside" => Ok(Move::ContractOutside),
            "contract_inside" => Ok(Move::ContractInside),
            "shrink" => Ok(Move::Shrink),
            other => Err(CoreError::InvalidArgument(format!("unknown move {other:?}"))),
        }
    }
}

/// The D+1 vertices of the search simplex, kept sorted by objective
/// value (ascending; ties preserve prior order).
#[derive(Clone, Debug)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    /// Builds a simplex from evaluated vertices and sorts it.
    pub fn from_evaluated(vertices: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if vertices.is_empty() || vertices.len() != values.len() {
            return Err(CoreError::InvalidArgument(
                "simplex needs matching vertex and value lists".into(),
            ));
        }
        let dim = vertices[0].len();
        if vertices.len() != dim + 1 {
            return Err(CoreError::InvalidArgument(format!(
                "dimension {dim} needs {} vertices, got {}",
                dim + 1,
                vertices.len()
            )));
        }
        let mut s = Self { vertices, values };
        s.sort();
        Ok(s)
    }

    fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Objective values, ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn best_vertex(&self) -> &[f64] {
        &self.vertices[0]
    }

    pub fn best_value(&self) -> f64 {
        self.values[0]
    }
}

/// One optimizer iteration as recorded in run logs.
#[derive(Clone, Debug)]
pub struct IterationEvent {
    /// 1-based iteration counter.
    pub iteration: usize,
    pub mv: Move,
    pub best_value: f64,
    pub best_vertex: Vec<f64>,
    /// Objective calls made during this iteration.
    pub evaluations_used: usize,
}

/// Full outcome of an optimization run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub best_vertex: Vec<f64>,
    pub best_value: f64,
    pub events: Vec<IterationEvent>,
    /// Best value of the freshly initialized simplex, before any move.
    pub initial_best_value: f64,
    pub initial_best_vertex: Vec<f64>,
    /// True when the stall criterion stopped the run before
    /// `max_iterations`.
    pub stalled: bool,
    /// Total objective calls including initialization.
    pub total_evaluations: usize,
}

fn sanitize(value: f64, at: &[f64]) -> f64 {
    if value.is_nan() {
        log::warn!("objective returned NaN at {at:?}; treating as +inf");
        f64::INFINITY
    } else {
        value
    }
}

/// Draws D+1 random vertices uniformly from the initialization box,
/// evaluates them (concurrently when the `parallel` feature is on), and
/// returns the sorted simplex.
pub fn initialize<F>(dimension: usize, config: &OptimizerConfig, objective: &F) -> Result<Simplex>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dimension == 0 {
        return Err(CoreError::InvalidArgument("dimension must be >= 1".into()));
    }
    config.validate()?;
    let (lo, hi) = config.init_range;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vertices: Vec<Vec<f64>> = (0..dimension + 1)
        .map(|_| (0..dimension).map(|_| rng.random_range(lo..=hi)).collect())
        .collect();
    let values: Vec<f64> = exec::map_collect(&vertices, |v| sanitize(objective(v), v));
    Simplex::from_evaluated(vertices, values)
}

fn clamp_to(range: (f64, f64), x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi = xi.clamp(range.0, range.1);
    }
}

/// One Nelder-Mead iteration on a sorted simplex.
///
/// Returns the updated simplex and the event describing the accepted
/// move; between 1 and D+2 objective evaluations are spent.
pub fn step<F>(
    simplex: &Simplex,
    config: &OptimizerConfig,
    objective: &F,
) -> (Simplex, IterationEvent)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = simplex.dimension();
    let worst_idx = d;
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        sanitize(objective(x), x)
    };

    // centroid of the best D vertices
    let mut centroid = vec![0.0; d];
    for v in &simplex.vertices[..d] {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x / d as f64;
        }
    }
    let worst = &simplex.vertices[worst_idx];
    let toward = |factor: f64| -> Vec<f64> {
        let mut x: Vec<f64> = centroid
            .iter()
            .zip(worst)
            .map(|(c, w)| c + factor * (c - w))
            .collect();
        clamp_to(config.init_range, &mut x);
        x
    };

    let f_best = simplex.values[0];
    let f_second_worst = simplex.values[d - 1];
    let f_worst = simplex.values[worst_idx];

    let reflected = toward(config.alpha);
    let f_reflected = eval(&reflected);

    let mut vertices = simplex.vertices.clone();
    let mut values = simplex.values.clone();
    let replace = |x: Vec<f64>, f: f64, vertices: &mut Vec<Vec<f64>>, values: &mut Vec<f64>| {
        vertices[worst_idx] = x;
        values[worst_idx] = f;
    };

    let mv = if f_reflected < f_best {
        let expanded = toward(config.gamma_exp * config.alpha);
        let f_expanded = eval(&expanded);
        if f_expanded < f_reflected {
            replace(expanded, f_expanded, &mut vertices, &mut values);
            Move::Expand
        } else {
            replace(reflected, f_reflected, &mut vertices, &mut values);
            Move::Reflect
        }
    } else if f_reflected < f_second_worst {
        replace(reflected, f_reflected, &mut vertices, &mut values);
        Move::Reflect
    } else {
        // contraction; shrink everything toward the best vertex if even
        // that fails
        let (candidate, accept, tag) = if f_reflected < f_worst {
            let outside = toward(config.beta * config.alpha);
            let f_outside = eval(&outside);
            (Some((outside, f_outside)), f_outside <= f_reflected, Move::ContractOutside)
        } else {
            let inside = toward(-config.beta * config.alpha);
            let f_inside = eval(&inside);
            (Some((inside, f_inside)), f_inside < f_worst, Move::ContractInside)
        };
        let (point, f_point) = candidate.expect("always built");
        if accept {
            replace(point, f_point, &mut vertices, &mut values);
            tag
        } else {
            let best = vertices[0].clone();
            for vertex in &mut vertices[1..] {
                for (x, b) in vertex.iter_mut().zip(&best) {
                    *x = b + config.delta_shrink * (*x - b);
                }
            }
            let shrunk: Vec<f64> =
                exec::map_collect(&vertices[1..], |v| sanitize(objective(v), v));
            evaluations += d;
            values[1..].copy_from_slice(&shrunk);
            Move::Shrink
        }
    };

    let mut next = Simplex { vertices, values };
    next.sort();
    let event = IterationEvent {
        iteration: 0, // filled in by the caller
        mv,
        best_value: next.best_value(),
        best_vertex: next.best_vertex().to_vec(),
        evaluations_used: evaluations,
    };
    (next, event)
}

/// Runs the full loop: initialization, up to `max_iterations` steps,
/// optional stall-based early stopping. Returns the best vertex seen
/// together with the complete per-iteration event log.
pub fn run<F>(dimension: usize, config: &OptimizerConfig, objective: &F) -> Result<RunResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut simplex = initialize(dimension, config, objective)?;
    let initial_best_value = simplex.best_value();
    let initial_best_vertex = simplex.best_vertex().to_vec();
    let mut total_evaluations = dimension + 1;
    let mut events = Vec::with_capacity(config.max_iterations);
    let mut stalled = false;
    let mut best_history = vec![initial_best_value];

    for g in 1..=config.max_iterations {
        let (next, mut event) = step(&simplex, config, objective);
        event.iteration = g;
        total_evaluations += event.evaluations_used;
        best_history.push(event.best_value);
        simplex = next;
        events.push(event);

        if let Some(tol) = config.stall_tolerance {
            if best_history.len() > config.stall_window {
                let window_ago = best_history[best_history.len() - 1 - config.stall_window];
                let now = *best_history.last().expect("nonempty");
                if window_ago - now < tol {
                    stalled = true;
                    break;
                }
            }
        }
    }

    Ok(RunResult {
        best_vertex: simplex.best_vertex().to_vec(),
        best_value: simplex.best_value(),
        events,
        initial_best_value,
        initial_best_vertex,
        stalled,
        total_evaluations,
    })
}
