//! Dense bounded-variable tableau simplex.
//!
//! Every model variable is mapped to internal columns with a finite lower
//! bound: `x = l + x'`, `x = u - x'`, or `x = x⁺ - x⁻` for free variables.
//! Inequality rows receive a slack column; rows whose slack cannot start in
//! the basis get an artificial column, and phase 1 minimizes their sum.

use super::lu::DenseLu;
use super::{
    BasisState, LpError, LpModel, LpOutcome, LpSolution, Relation, Sense, FEASIBILITY_TOL,
    OPTIMALITY_TOL,
};

const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_STEP: f64 = 1e-12;
/// Pivots between refactorizations of the basis.
const REINVERT_EVERY: usize = 1000;

/// Consecutive degenerate pivots before switching from Dantzig to Bland.
pub(crate) const BLAND_AFTER: usize = 50;

#[derive(Debug, Clone, Copy)]
pub(crate) enum ColMap {
    Shift { col: usize, offset: f64 },
    Reflect { col: usize, offset: f64 },
    Split { pos: usize, neg: usize },
}

/// `min cost'x  s.t.  a x = b,  lb ≤ x ≤ ub` with finite `lb`.
pub(crate) struct StandardForm {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub cost: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub slack: Vec<Option<(usize, f64)>>,
    pub map: Vec<ColMap>,
    pub flip: f64,
}

impl StandardForm {
    pub(crate) fn build(model: &LpModel) -> Self {
        let flip = match model.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = Vec::new();
        let mut lb = Vec::new();
        let mut ub = Vec::new();
        let mut map = Vec::with_capacity(model.num_vars());
        for v in &model.variables {
            let col = cost.len();
            if v.lower.is_finite() {
                map.push(ColMap::Shift {
                    col,
                    offset: v.lower,
                });
                cost.push(flip * v.cost);
                lb.push(0.0);
                ub.push(v.upper - v.lower);
            } else if v.upper.is_finite() {
                map.push(ColMap::Reflect {
                    col,
                    offset: v.upper,
                });
                cost.push(-flip * v.cost);
                lb.push(0.0);
                ub.push(f64::INFINITY);
            } else {
                map.push(ColMap::Split {
                    pos: col,
                    neg: col + 1,
                });
                cost.extend([flip * v.cost, -flip * v.cost]);
                lb.extend([0.0, 0.0]);
                ub.extend([f64::INFINITY, f64::INFINITY]);
            }
        }
        let n_vars = cost.len();
        let m = model.num_constraints();
        let n_slack = model
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let n = n_vars + n_slack;
        cost.resize(n, 0.0);
        lb.resize(n, 0.0);
        ub.resize(n, f64::INFINITY);

        let mut a = vec![0.0; m * n];
        let mut b = Vec::with_capacity(m);
        let mut slack = Vec::with_capacity(m);
        let mut next_slack = n_vars;
        for (i, c) in model.constraints.iter().enumerate() {
            let row = &mut a[i * n..(i + 1) * n];
            let mut rhs = c.rhs;
            for (coef, cmap) in c.coeffs.iter().zip(&map) {
                if *coef == 0.0 {
                    continue;
                }
                match *cmap {
                    ColMap::Shift { col, offset } => {
                        row[col] = *coef;
                        rhs -= coef * offset;
                    }
                    ColMap::Reflect { col, offset } => {
                        row[col] = -coef;
                        rhs -= coef * offset;
                    }
                    ColMap::Split { pos, neg } => {
                        row[pos] = *coef;
                        row[neg] = -coef;
                    }
                }
            }
            let s = match c.relation {
                Relation::Le => Some((next_slack, 1.0)),
                Relation::Ge => Some((next_slack, -1.0)),
                Relation::Eq => None,
            };
            if let Some((col, sign)) = s {
                row[col] = sign;
                next_slack += 1;
            }
            slack.push(s);
            b.push(rhs);
        }
        Self {
            m,
            n,
            a,
            b,
            cost,
            lb,
            ub,
            slack,
            map,
            flip,
        }
    }

    pub(crate) fn to_original(&self, x_int: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|cmap| match *cmap {
                ColMap::Shift { col, offset } => offset + x_int[col],
                ColMap::Reflect { col, offset } => offset - x_int[col],
                ColMap::Split { pos, neg } => x_int[pos] - x_int[neg],
            })
            .collect()
    }

    fn direction_to_original(&self, d_int: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|cmap| match *cmap {
                ColMap::Shift { col, .. } => d_int[col],
                ColMap::Reflect { col, .. } => -d_int[col],
                ColMap::Split { pos, neg } => d_int[pos] - d_int[neg],
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
}

pub(crate) enum PrimalEnd {
    Optimal,
    Unbounded { col: usize, dir: f64 },
}

pub(crate) enum DualEnd {
    Optimal,
    Infeasible,
}

pub(crate) enum TwoPhaseEnd {
    Optimal,
    Infeasible,
    Unbounded { col: usize, dir: f64 },
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { row: usize, theta: f64 },
}

pub(crate) struct Tableau {
    m: usize,
    n: usize,
    n_struct: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    d: Vec<f64>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    /// `(row, sign)` of each artificial column, indexed from `n_struct`.
    artificial: Vec<(usize, f64)>,
    /// A unit column `(col, coefficient)` present in each row.
    unit_col: Vec<(usize, f64)>,
    phase: u8,
    iterations: usize,
    scratch_idx: Vec<usize>,
    scratch_val: Vec<f64>,
    /// Sparse structural rows and rhs of the standard form, for reinversion.
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    since_reinvert: usize,
    reinvert_every: usize,
}

impl Tableau {
    /// Starting tableau with every structural column at its lower bound.
    pub(crate) fn new(sf: &StandardForm, lb: &[f64], ub: &[f64]) -> Self {
        let (m, n_struct) = (sf.m, sf.n);
        let mut residual = sf.b.clone();
        for (j, &l) in lb.iter().enumerate() {
            if l != 0.0 {
                for (i, r) in residual.iter_mut().enumerate() {
                    *r -= sf.a[i * n_struct + j] * l;
                }
            }
        }
        let mut basis = Vec::with_capacity(m);
        let mut basic_sign = Vec::with_capacity(m);
        let mut unit_col = Vec::with_capacity(m);
        let mut artificial = Vec::new();
        for i in 0..m {
            match sf.slack[i] {
                Some((col, sign)) if residual[i] * sign >= 0.0 => {
                    basis.push(col);
                    basic_sign.push(sign);
                    unit_col.push((col, sign));
                }
                s => {
                    let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                    let col = n_struct + artificial.len();
                    artificial.push((i, sign));
                    basis.push(col);
                    basic_sign.push(sign);
                    unit_col.push(s.unwrap_or((col, sign)));
                }
            }
        }
        let n = n_struct + artificial.len();
        let mut t = vec![0.0; m * n];
        for i in 0..m {
            let inv = 1.0 / basic_sign[i];
            let src = &sf.a[i * n_struct..(i + 1) * n_struct];
            let dst = &mut t[i * n..(i + 1) * n];
            for (dv, sv) in dst.iter_mut().zip(src) {
                *dv = sv * inv;
            }
        }
        for (k, &(row, sign)) in artificial.iter().enumerate() {
            t[row * n + n_struct + k] = sign / basic_sign[row];
        }
        let beta = (0..m).map(|i| residual[i] / basic_sign[i]).collect();
        let mut state = vec![State::Lower; n];
        for &col in &basis {
            state[col] = State::Basic;
        }
        let mut full_lb = lb.to_vec();
        let mut full_ub = ub.to_vec();
        full_lb.resize(n, 0.0);
        full_ub.resize(n, f64::INFINITY);
        let mut cost = sf.cost.clone();
        cost.resize(n, 0.0);
        let rows: Vec<Vec<(usize, f64)>> = (0..m)
            .map(|i| {
                sf.a[i * n_struct..(i + 1) * n_struct]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        // A reinversion costs about 2m³ flops against m·n per pivot.
        let reinvert_every = REINVERT_EVERY;
        Self {
            m,
            n,
            n_struct,
            t,
            beta,
            d: vec![0.0; n],
            cost,
            lb: full_lb,
            ub: full_ub,
            basis,
            state,
            artificial,
            unit_col,
            phase: 1,
            iterations: 0,
            scratch_idx: Vec::new(),
            scratch_val: Vec::new(),
            rows,
            b: sf.b.clone(),
            since_reinvert: 0,
            reinvert_every,
        }
    }

    fn phase_cost(&self, j: usize) -> f64 {
        if self.phase == 1 {
            if j >= self.n_struct {
                1.0
            } else {
                0.0
            }
        } else {
            self.cost[j]
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let n = self.n;
        let mut d: Vec<f64> = (0..n).map(|j| self.phase_cost(j)).collect();
        for i in 0..self.m {
            let cb = self.phase_cost(self.basis[i]);
            if cb != 0.0 {
                let row = &self.t[i * n..(i + 1) * n];
                for (dj, &tij) in d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &col in &self.basis {
            d[col] = 0.0;
        }
        self.d = d;
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Upper => self.ub[j],
            _ => self.lb[j],
        }
    }

    fn iteration_limit(&self) -> usize {
        50_000 + 50 * (self.m + self.n)
    }

    fn failure(&self) -> LpError {
        LpError::NumericalFailure(Box::new(BasisState {
            phase: self.phase,
            iterations: self.iterations,
            basic_columns: self.basis.clone(),
        }))
    }

    /// Runs both phases from the starting basis.
    pub(crate) fn two_phase(&mut self) -> Result<TwoPhaseEnd, LpError> {
        if !self.artificial.is_empty() {
            self.phase = 1;
            self.recompute_reduced_costs();
            match self.primal()? {
                PrimalEnd::Optimal => {}
                // phase 1 is bounded below by zero
                PrimalEnd::Unbounded { .. } => return Err(self.failure()),
            }
            if self.infeasibility() > FEASIBILITY_TOL {
                return Ok(TwoPhaseEnd::Infeasible);
            }
            self.drive_out_artificials();
        }
        self.enter_phase_two();
        Ok(match self.primal()? {
            PrimalEnd::Optimal => TwoPhaseEnd::Optimal,
            PrimalEnd::Unbounded { col, dir } => TwoPhaseEnd::Unbounded { col, dir },
        })
    }

    fn infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.beta)
            .filter(|(&col, _)| col >= self.n_struct)
            .map(|(_, &v)| v)
            .sum()
    }

    fn drive_out_artificials(&mut self) {
        let n = self.n;
        for r in 0..self.m {
            if self.basis[r] < self.n_struct {
                continue;
            }
            let row = &self.t[r * n..r * n + self.n_struct];
            let best = (0..self.n_struct)
                .filter(|&j| self.state[j] != State::Basic)
                .map(|j| (j, row[j].abs()))
                .filter(|&(_, v)| v > 1e-7)
                .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
                    Some(b) if b.1 >= cur.1 => Some(b),
                    _ => Some(cur),
                });
            if let Some((q, _)) = best {
                let alpha = self.t[r * n + q];
                let delta = self.beta[r] / alpha;
                let entering = self.nonbasic_value(q) + delta;
                for i in 0..self.m {
                    self.beta[i] -= self.t[i * n + q] * delta;
                }
                let leaving = self.basis[r];
                self.state[leaving] = State::Lower;
                self.beta[r] = entering;
                self.pivot(r, q);
                self.basis[r] = q;
                self.state[q] = State::Basic;
            }
        }
    }

    fn enter_phase_two(&mut self) {
        for j in self.n_struct..self.n {
            self.lb[j] = 0.0;
            self.ub[j] = 0.0;
            if self.state[j] != State::Basic {
                self.state[j] = State::Lower;
            }
        }
        self.phase = 2;
        self.recompute_reduced_costs();
    }

    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n {
            let (dir, score) = match self.state[j] {
                State::Basic => continue,
                _ if self.lb[j] >= self.ub[j] => continue,
                State::Lower if self.d[j] < -OPTIMALITY_TOL => (1.0, -self.d[j]),
                State::Upper if self.d[j] > OPTIMALITY_TOL => (-1.0, self.d[j]),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|b| score > b.2) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Step {
        let n = self.n;
        let bound_ratio = |i: usize, g: f64, slack_tol: f64| -> Option<f64> {
            let col = self.basis[i];
            if g > PIVOT_TOL {
                Some((self.beta[i] - self.lb[col] + slack_tol) / g)
            } else if g < -PIVOT_TOL && self.ub[col].is_finite() {
                Some((self.ub[col] - self.beta[i] + slack_tol) / -g)
            } else {
                None
            }
        };
        let mut chosen: Option<(usize, f64)> = None;
        if bland {
            let mut best = f64::INFINITY;
            for i in 0..self.m {
                let g = self.t[i * n + q] * dir;
                if let Some(ratio) = bound_ratio(i, g, 0.0) {
                    let better = match chosen {
                        None => true,
                        Some((ci, _)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[ci])
                        }
                    };
                    if better {
                        best = ratio.min(best);
                        chosen = Some((i, ratio));
                    }
                }
            }
        } else {
            let mut theta_max = f64::INFINITY;
            for i in 0..self.m {
                let g = self.t[i * n + q] * dir;
                if let Some(ratio) = bound_ratio(i, g, FEASIBILITY_TOL) {
                    theta_max = theta_max.min(ratio);
                }
            }
            if theta_max.is_finite() {
                let mut best_pivot = 0.0;
                for i in 0..self.m {
                    let g = self.t[i * n + q] * dir;
                    if let Some(ratio) = bound_ratio(i, g, 0.0) {
                        if ratio <= theta_max && g.abs() > best_pivot {
                            best_pivot = g.abs();
                            chosen = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let range = self.ub[q] - self.lb[q];
        match chosen {
            Some((row, ratio)) => {
                let theta = ratio.max(0.0);
                if range <= theta {
                    Step::Flip(range)
                } else {
                    Step::Pivot { row, theta }
                }
            }
            None if range.is_finite() => Step::Flip(range),
            None => Step::Unbounded,
        }
    }

    pub(crate) fn primal(&mut self) -> Result<PrimalEnd, LpError> {
        let n = self.n;
        let limit = self.iteration_limit();
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= limit {
                return Err(self.failure());
            }
            self.maybe_reinvert();
            let bland = degenerate >= BLAND_AFTER;
            let Some((q, dir)) = self.price(bland) else {
                return Ok(PrimalEnd::Optimal);
            };
            let theta = match self.ratio_test(q, dir, bland) {
                Step::Unbounded => return Ok(PrimalEnd::Unbounded { col: q, dir }),
                Step::Flip(theta) => {
                    for i in 0..self.m {
                        self.beta[i] -= self.t[i * n + q] * dir * theta;
                    }
                    self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                    theta
                }
                Step::Pivot { row, theta } => {
                    let entering = self.nonbasic_value(q) + dir * theta;
                    let g_row = self.t[row * n + q] * dir;
                    for i in 0..self.m {
                        self.beta[i] -= self.t[i * n + q] * dir * theta;
                    }
                    let leaving = self.basis[row];
                    self.state[leaving] = if g_row > 0.0 {
                        State::Lower
                    } else {
                        State::Upper
                    };
                    self.beta[row] = entering;
                    self.pivot(row, q);
                    self.basis[row] = q;
                    self.state[q] = State::Basic;
                    theta
                }
            };
            self.iterations += 1;
            self.since_reinvert += 1;
            if theta <= DEGENERATE_STEP {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }

    /// Dual simplex from a dual-feasible basis.
    pub(crate) fn dual(&mut self) -> Result<DualEnd, LpError> {
        let n = self.n;
        let limit = self.iterations + self.iteration_limit();
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= limit {
                return Err(self.failure());
            }
            self.maybe_reinvert();
            let bland = degenerate >= BLAND_AFTER;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let col = self.basis[i];
                let viol = (self.lb[col] - self.beta[i]).max(self.beta[i] - self.ub[col]);
                if viol > FEASIBILITY_TOL {
                    let better = match leave {
                        None => true,
                        Some((ci, cv)) => {
                            if bland {
                                col < self.basis[ci]
                            } else {
                                viol > cv
                            }
                        }
                    };
                    if better {
                        leave = Some((i, viol));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(DualEnd::Optimal);
            };
            let col_r = self.basis[r];
            let (target, up) = if self.beta[r] < self.lb[col_r] {
                (self.lb[col_r], 1.0)
            } else {
                (self.ub[col_r], -1.0)
            };
            let row = &self.t[r * n..(r + 1) * n];
            let eligible = |j: usize| -> Option<f64> {
                if self.lb[j] >= self.ub[j] {
                    return None;
                }
                let alpha = row[j];
                match self.state[j] {
                    State::Lower if up * alpha < -PIVOT_TOL => Some(alpha),
                    State::Upper if up * alpha > PIVOT_TOL => Some(alpha),
                    _ => None,
                }
            };
            let mut chosen: Option<(usize, f64)> = None;
            if bland {
                let mut best = f64::INFINITY;
                for j in 0..n {
                    if let Some(alpha) = eligible(j) {
                        let ratio = self.d[j].abs() / alpha.abs();
                        if ratio < best - 1e-12 {
                            best = ratio;
                            chosen = Some((j, ratio));
                        }
                    }
                }
            } else {
                let mut ratio_max = f64::INFINITY;
                for j in 0..n {
                    if let Some(alpha) = eligible(j) {
                        ratio_max = ratio_max.min((self.d[j].abs() + OPTIMALITY_TOL) / alpha.abs());
                    }
                }
                let mut best_pivot = 0.0;
                for j in 0..n {
                    if let Some(alpha) = eligible(j) {
                        let ratio = self.d[j].abs() / alpha.abs();
                        if ratio <= ratio_max && alpha.abs() > best_pivot {
                            best_pivot = alpha.abs();
                            chosen = Some((j, ratio));
                        }
                    }
                }
            }
            let Some((q, ratio)) = chosen else {
                return Ok(DualEnd::Infeasible);
            };
            let alpha = self.t[r * n + q];
            let delta = (self.beta[r] - target) / alpha;
            let entering = self.nonbasic_value(q) + delta;
            for i in 0..self.m {
                self.beta[i] -= self.t[i * n + q] * delta;
            }
            self.state[col_r] = if up > 0.0 { State::Lower } else { State::Upper };
            self.beta[r] = entering;
            self.pivot(r, q);
            self.basis[r] = q;
            self.state[q] = State::Basic;
            self.iterations += 1;
            self.since_reinvert += 1;
            if ratio <= DEGENERATE_STEP {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let inv = 1.0 / self.t[r * n + q];
        self.scratch_idx.clear();
        self.scratch_val.clear();
        {
            let row_r = &mut self.t[r * n..(r + 1) * n];
            for (j, v) in row_r.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        self.scratch_idx.push(j);
                        self.scratch_val.push(*v);
                    }
                }
            }
            row_r[q] = 1.0;
        }
        let idx = &self.scratch_idx;
        let val = &self.scratch_val;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for (&j, &v) in idx.iter().zip(val) {
                let updated = row[j] - f * v;
                row[j] = if updated.abs() < DROP_TOL { 0.0 } else { updated };
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for (&j, &v) in idx.iter().zip(val) {
                self.d[j] -= f * v;
            }
        }
        self.d[q] = 0.0;
    }

    /// Changes the bounds of a structural column, keeping basic values consistent.
    pub(crate) fn set_bounds(&mut self, col: usize, lb: f64, ub: f64) {
        if self.state[col] == State::Basic {
            self.lb[col] = lb;
            self.ub[col] = ub;
            return;
        }
        let old = self.nonbasic_value(col);
        self.lb[col] = lb;
        self.ub[col] = ub;
        if self.state[col] == State::Upper && !ub.is_finite() {
            self.state[col] = State::Lower;
        }
        self.shift_nonbasic(col, old);
    }

    fn shift_nonbasic(&mut self, col: usize, old: f64) {
        let delta = self.nonbasic_value(col) - old;
        if delta != 0.0 {
            let n = self.n;
            for i in 0..self.m {
                self.beta[i] -= self.t[i * n + col] * delta;
            }
        }
    }

    /// Moves nonbasic columns to the bound their reduced cost prefers.
    /// `false` if some column would need an infinite bound.
    pub(crate) fn restore_dual_feasibility(&mut self) -> bool {
        for j in 0..self.n {
            if self.state[j] == State::Basic || self.lb[j] >= self.ub[j] {
                continue;
            }
            let old = self.nonbasic_value(j);
            match self.state[j] {
                State::Lower if self.d[j] < -OPTIMALITY_TOL => {
                    if !self.ub[j].is_finite() {
                        return false;
                    }
                    self.state[j] = State::Upper;
                }
                State::Upper if self.d[j] > OPTIMALITY_TOL => self.state[j] = State::Lower,
                _ => continue,
            }
            self.shift_nonbasic(j, old);
        }
        true
    }

    /// Current internal values of the structural columns, from the tableau.
    pub(crate) fn structural_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.n_struct).map(|j| self.nonbasic_value(j)).collect();
        for (i, &col) in self.basis.iter().enumerate() {
            if col < self.n_struct {
                x[col] = self.beta[i];
            }
        }
        x
    }

    fn maybe_reinvert(&mut self) {
        if self.since_reinvert >= self.reinvert_every && !self.reinvert() {
            log::debug!("basis singular at reinversion; continuing with updated tableau");
        }
    }

    /// Dense copy of the basis matrix built from the stored rows.
    fn basis_matrix(&self) -> Vec<f64> {
        let m = self.m;
        let mut pos = vec![usize::MAX; self.n];
        for (k, &col) in self.basis.iter().enumerate() {
            pos[col] = k;
        }
        let mut b = vec![0.0; m * m];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                if pos[j] != usize::MAX {
                    b[i * m + pos[j]] = v;
                }
            }
        }
        for (k, &(row, sign)) in self.artificial.iter().enumerate() {
            let p = pos[self.n_struct + k];
            if p != usize::MAX {
                b[row * m + p] = sign;
            }
        }
        b
    }

    /// Recomputes `B⁻¹A`, the basic values and the reduced costs from the
    /// original rows, discarding accumulated rounding error.
    pub(crate) fn reinvert(&mut self) -> bool {
        self.since_reinvert = 0;
        let (m, n) = (self.m, self.n);
        let Some(lu) = DenseLu::factor(m, self.basis_matrix()) else {
            return false;
        };
        // Row-major B⁻¹.
        let mut binv = vec![0.0; m * m];
        let mut e = vec![0.0; m];
        for i in 0..m {
            e[i] = 1.0;
            for (r, v) in lu.solve(&e).into_iter().enumerate() {
                binv[r * m + i] = v;
            }
            e[i] = 0.0;
        }
        self.t.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..m {
            let trow = &mut self.t[r * n..(r + 1) * n];
            for (i, row) in self.rows.iter().enumerate() {
                let f = binv[r * m + i];
                if f == 0.0 {
                    continue;
                }
                for &(j, v) in row {
                    trow[j] += f * v;
                }
            }
            for (k, &(row, sign)) in self.artificial.iter().enumerate() {
                trow[self.n_struct + k] = binv[r * m + row] * sign;
            }
            for v in trow.iter_mut() {
                if v.abs() < DROP_TOL {
                    *v = 0.0;
                }
            }
        }
        for (r, &col) in self.basis.iter().enumerate() {
            for i in 0..m {
                self.t[i * n + col] = if i == r { 1.0 } else { 0.0 };
            }
        }
        // Basic values from the nonbasic positions.
        let x_nb: Vec<f64> = (0..n)
            .map(|j| match self.state[j] {
                State::Basic => 0.0,
                _ => self.nonbasic_value(j),
            })
            .collect();
        let mut rhs = self.b.clone();
        for (i, row) in self.rows.iter().enumerate() {
            rhs[i] -= row.iter().map(|&(j, v)| v * x_nb[j]).sum::<f64>();
        }
        for (k, &(row, sign)) in self.artificial.iter().enumerate() {
            rhs[row] -= sign * x_nb[self.n_struct + k];
        }
        self.beta = lu.solve(&rhs);
        self.recompute_reduced_costs();
        true
    }

    fn basis_lu(&self, sf: &StandardForm) -> Option<DenseLu> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (k, &col) in self.basis.iter().enumerate() {
            if col < self.n_struct {
                for i in 0..m {
                    b[i * m + k] = sf.a[i * sf.n + col];
                }
            } else {
                let (row, sign) = self.artificial[col - self.n_struct];
                b[row * m + k] = sign;
            }
        }
        DenseLu::factor(m, b)
    }

    /// Structural values with basic components recomputed from the original
    /// rows via a fresh factorization.
    fn refined_values(&self, sf: &StandardForm, lu: Option<&DenseLu>) -> Vec<f64> {
        let Some(lu) = lu else {
            return self.structural_values();
        };
        let mut x: Vec<f64> = (0..self.n_struct).map(|j| self.nonbasic_value(j)).collect();
        for &col in &self.basis {
            if col < self.n_struct {
                x[col] = 0.0;
            }
        }
        let mut rhs = sf.b.clone();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= sf.a[i * sf.n + j] * xj;
                }
            }
        }
        let xb = lu.solve(&rhs);
        for (k, &col) in self.basis.iter().enumerate() {
            if col < self.n_struct {
                x[col] = xb[k];
            }
        }
        x
    }

    /// Row multipliers `y = B⁻ᵀ c_B` for the current phase's costs.
    fn row_duals(&self, lu: Option<&DenseLu>) -> Vec<f64> {
        match lu {
            Some(lu) => {
                let cb: Vec<f64> = self.basis.iter().map(|&c| self.phase_cost(c)).collect();
                lu.solve_transpose(&cb)
            }
            None => self
                .unit_col
                .iter()
                .map(|&(col, coef)| (self.phase_cost(col) - self.d[col]) / coef)
                .collect(),
        }
    }

    pub(crate) fn solution(&self, sf: &StandardForm, model: &LpModel) -> LpSolution {
        let lu = self.basis_lu(sf);
        let x_int = self.refined_values(sf, lu.as_ref());
        let x = sf.to_original(&x_int);
        let y_int = self.row_duals(lu.as_ref());
        let duals: Vec<f64> = y_int.iter().map(|y| sf.flip * y).collect();
        let reduced_costs = model
            .variables
            .iter()
            .enumerate()
            .map(|(j, v)| {
                v.cost
                    - model
                        .constraints
                        .iter()
                        .zip(&duals)
                        .map(|(c, y)| c.coeffs[j] * y)
                        .sum::<f64>()
            })
            .collect();
        LpSolution {
            objective: model.objective_value(&x),
            x,
            duals,
            reduced_costs,
        }
    }

    pub(crate) fn farkas(&self, sf: &StandardForm) -> Vec<f64> {
        debug_assert_eq!(self.phase, 1);
        let lu = self.basis_lu(sf);
        self.row_duals(lu.as_ref())
    }

    pub(crate) fn ray(&self, sf: &StandardForm, col: usize, dir: f64) -> Vec<f64> {
        let n = self.n;
        let mut d_int = vec![0.0; self.n_struct];
        d_int[col] = dir;
        match self.basis_lu(sf).filter(|_| col < self.n_struct) {
            Some(lu) => {
                let a_q: Vec<f64> = (0..self.m).map(|i| -dir * sf.a[i * sf.n + col]).collect();
                for (k, v) in lu.solve(&a_q).into_iter().enumerate() {
                    let c = self.basis[k];
                    if c < self.n_struct {
                        d_int[c] = v;
                    }
                }
            }
            None => {
                for i in 0..self.m {
                    let c = self.basis[i];
                    if c < self.n_struct {
                        d_int[c] = -dir * self.t[i * n + col];
                    }
                }
            }
        }
        let mut ray = sf.direction_to_original(&d_int);
        let scale = ray.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            ray.iter_mut().for_each(|v| *v /= scale);
        }
        ray
    }
}

pub(crate) fn outcome(
    tab: &Tableau,
    end: TwoPhaseEnd,
    sf: &StandardForm,
    model: &LpModel,
) -> LpOutcome {
    match end {
        TwoPhaseEnd::Optimal => LpOutcome::Optimal(tab.solution(sf, model)),
        TwoPhaseEnd::Infeasible => LpOutcome::Infeasible {
            farkas: tab.farkas(sf),
        },
        TwoPhaseEnd::Unbounded { col, dir } => LpOutcome::Unbounded {
            ray: tab.ray(sf, col, dir),
        },
    }
}

pub(crate) fn solve(model: &LpModel) -> Result<LpOutcome, LpError> {
    let sf = StandardForm::build(model);
    let mut tab = Tableau::new(&sf, &sf.lb, &sf.ub);
    let end = tab.two_phase()?;
    Ok(outcome(&tab, end, &sf, model))
}
