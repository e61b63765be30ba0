use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::simplex::{self, ColMap, DualEnd, PrimalEnd, StandardForm, Tableau, TwoPhaseEnd};
use super::{LpError, LpModel, LpOutcome, LpSolution, Sense, VarKind, INTEGRALITY_TOL};

#[derive(Debug, Clone)]
pub struct MipOptions {
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    /// Relative optimality gap below which an open node is pruned.
    pub prune_rel_tol: f64,
    /// Re-optimize child nodes from the parent basis by dual simplex.
    pub warm_start: bool,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            node_limit: 200_000,
            time_limit: None,
            prune_rel_tol: 1e-10,
            warm_start: true,
        }
    }
}

/// Open node keyed for best-bound selection, deeper first on ties.
struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    fixes: Vec<i8>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: smallest bound must compare greatest.
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    model: &'a LpModel,
    sf: StandardForm,
    tab: Tableau,
    binaries: Vec<usize>,
    /// Internal column and shift offset per binary.
    columns: Vec<(usize, f64)>,
    warm_start: bool,
}

enum NodeResult {
    Infeasible,
    Solved { objective: f64, x: Vec<f64> },
}

impl<'a> Search<'a> {
    fn internal_bounds(&self, b: usize, fix: i8) -> (f64, f64) {
        let var = &self.model.variables[self.binaries[b]];
        let offset = self.columns[b].1;
        match fix {
            0 => (0.0 - offset, 0.0 - offset),
            1 => (1.0 - offset, 1.0 - offset),
            _ => (var.lower - offset, var.upper - offset),
        }
    }

    fn apply(&mut self, fixes: &[i8]) {
        for (b, &fix) in fixes.iter().enumerate() {
            let (lo, hi) = self.internal_bounds(b, fix);
            self.tab.set_bounds(self.columns[b].0, lo, hi);
        }
    }

    fn node_objective(&self, x: &[f64]) -> f64 {
        let objective = self.model.objective_value(x);
        match self.model.sense {
            Sense::Minimize => objective,
            Sense::Maximize => -objective,
        }
    }

    /// Re-optimizes the current tableau under `fixes`, falling back to a cold
    /// two-phase solve when warm starting is not possible.
    fn solve_node(&mut self, fixes: &[i8]) -> Result<NodeResult, LpError> {
        self.apply(fixes);
        let warm = if self.warm_start && self.tab.restore_dual_feasibility() {
            match self.tab.dual() {
                Ok(DualEnd::Infeasible) => return Ok(NodeResult::Infeasible),
                Ok(DualEnd::Optimal) => match self.tab.primal() {
                    Ok(PrimalEnd::Optimal) => true,
                    Ok(PrimalEnd::Unbounded { .. }) | Err(_) => false,
                },
                Err(_) => false,
            }
        } else {
            false
        };
        if !warm {
            let mut lb = self.sf.lb.clone();
            let mut ub = self.sf.ub.clone();
            for (b, &fix) in fixes.iter().enumerate() {
                let (lo, hi) = self.internal_bounds(b, fix);
                lb[self.columns[b].0] = lo;
                ub[self.columns[b].0] = hi;
            }
            self.tab = Tableau::new(&self.sf, &lb, &ub);
            match self.tab.two_phase()? {
                TwoPhaseEnd::Optimal => {}
                TwoPhaseEnd::Infeasible => return Ok(NodeResult::Infeasible),
                TwoPhaseEnd::Unbounded { .. } => {
                    return Err(LpError::InvalidModel(
                        "LP relaxation became unbounded below a bounded root".into(),
                    ))
                }
            }
        }
        let x = self.sf.to_original(&self.tab.structural_values());
        Ok(NodeResult::Solved {
            objective: self.node_objective(&x),
            x,
        })
    }

    fn most_fractional(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (b, &j) in self.binaries.iter().enumerate() {
            let frac = (x[j] - x[j].round()).abs();
            if frac > INTEGRALITY_TOL && best.is_none_or(|(_, f)| frac > f + 1e-12) {
                best = Some((b, frac));
            }
        }
        best.map(|(b, _)| b)
    }
}

pub(crate) fn solve(model: &LpModel, options: &MipOptions) -> Result<LpOutcome, LpError> {
    let binaries: Vec<usize> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let relaxed = model.relaxed();
    if binaries.is_empty() {
        return simplex::solve(&relaxed);
    }
    let started = Instant::now();
    let sf = StandardForm::build(&relaxed);
    let columns = binaries
        .iter()
        .map(|&j| match sf.map[j] {
            ColMap::Shift { col, offset } => (col, offset),
            // binaries always have a finite lower bound
            _ => unreachable!("binary variable without finite lower bound"),
        })
        .collect();
    let mut tab = Tableau::new(&sf, &sf.lb, &sf.ub);
    let root = tab.two_phase()?;
    if !matches!(root, TwoPhaseEnd::Optimal) {
        return Ok(simplex::outcome(&tab, root, &sf, &relaxed));
    }
    let mut search = Search {
        model: &relaxed,
        sf,
        tab,
        binaries,
        columns,
        warm_start: options.warm_start,
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        seq,
        fixes: vec![-1; search.binaries.len()],
    });
    // (internal minimization objective, x)
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let prune = |bound: f64, inc: &Option<(f64, Vec<f64>)>| -> bool {
        inc.as_ref()
            .is_some_and(|(best, _)| bound >= best - options.prune_rel_tol * best.abs().max(1.0))
    };
    let incumbent_report = |inc: &Option<(f64, Vec<f64>)>| {
        inc.as_ref().map(|(_, x)| {
            Box::new(LpSolution {
                objective: model.objective_value(x),
                x: x.clone(),
                duals: Vec::new(),
                reduced_costs: Vec::new(),
            })
        })
    };

    while let Some(node) = heap.pop() {
        if prune(node.bound, &incumbent) {
            continue;
        }
        if nodes >= options.node_limit {
            return Err(LpError::NodeLimit {
                nodes,
                incumbent: incumbent_report(&incumbent),
            });
        }
        if options.time_limit.is_some_and(|limit| started.elapsed() > limit) {
            return Err(LpError::TimeLimit {
                nodes,
                incumbent: incumbent_report(&incumbent),
            });
        }
        nodes += 1;
        let (objective, x) = match search.solve_node(&node.fixes)? {
            NodeResult::Infeasible => continue,
            NodeResult::Solved { objective, x } => (objective, x),
        };
        if prune(objective, &incumbent) {
            continue;
        }
        match search.most_fractional(&x) {
            None => incumbent = Some((objective, x)),
            Some(b) => {
                for value in [0i8, 1] {
                    let mut fixes = node.fixes.clone();
                    fixes[b] = value;
                    seq += 1;
                    heap.push(Node {
                        bound: objective,
                        depth: node.depth + 1,
                        seq,
                        fixes,
                    });
                }
            }
        }
    }
    log::debug!("branch-and-bound explored {nodes} nodes");

    let Some((_, x)) = incumbent else {
        // No certificate exists for integer infeasibility of a feasible relaxation.
        return Ok(LpOutcome::Infeasible { farkas: Vec::new() });
    };
    let fixes: Vec<i8> = search
        .binaries
        .iter()
        .map(|&j| if x[j] > 0.5 { 1 } else { 0 })
        .collect();
    match search.solve_node(&fixes)? {
        NodeResult::Solved { .. } => {
            let mut solution = search.tab.solution(&search.sf, model);
            for &j in &search.binaries {
                solution.x[j] = solution.x[j].round();
            }
            solution.objective = model.objective_value(&solution.x);
            Ok(LpOutcome::Optimal(solution))
        }
        NodeResult::Infeasible => Err(LpError::InvalidModel(
            "incumbent assignment became infeasible on re-solve".into(),
        )),
    }
}
