//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use wowa::lp::{LpModel, Relation, Sense, VarKind};
use wowa::model::{FirstStageRow, Scenario};
use wowa::report::SolveReport;
use wowa::{generate_weights_galpha, CutKind, TwoStageProblem, WeightKind, WeightVector};

/// Random probability vector with entries bounded away from zero.
pub fn random_simplex(rng: &mut StdRng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn random_galpha(rng: &mut StdRng, k: usize) -> (f64, WeightVector) {
    let alpha = rng.gen_range(1e-4..0.9999);
    (alpha, generate_weights_galpha(alpha, k).unwrap())
}

/// `w*` evaluated straight from its definition: linear between the points
/// `(i/K, w_1 + ... + w_i)`.
fn w_star(w: &[f64], t: f64) -> f64 {
    let k = w.len() as f64;
    let s = (t * k).clamp(0.0, k);
    let i = (s.floor() as usize).min(w.len() - 1);
    let below: f64 = w[..i].iter().sum();
    below + (s - i as f64) * w[i]
}

/// Maximum over every ordering of the scenarios of the increment sum.
pub fn permutation_max(w: &[f64], p: &[f64], a: &[f64]) -> f64 {
    fn rec(w: &[f64], p: &[f64], a: &[f64], used: &mut Vec<bool>, mass: f64, acc: f64) -> f64 {
        if used.iter().all(|u| *u) {
            return acc;
        }
        let mut best = f64::NEG_INFINITY;
        for k in 0..a.len() {
            if used[k] {
                continue;
            }
            used[k] = true;
            let next = mass + p[k];
            let inc = w_star(w, next) - w_star(w, mass);
            best = best.max(rec(w, p, a, used, next, acc + inc * a[k]));
            used[k] = false;
        }
        best
    }
    rec(w, p, a, &mut vec![false; a.len()], 0.0, 0.0)
}

/// Solves the square system `m x = b` by Gaussian elimination; `None` when
/// numerically singular.
fn solve_square(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-9 {
            return None;
        }
        m.swap(c, piv);
        b.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                if f != 0.0 {
                    for j in c..n {
                        m[r][j] -= f * m[c][j];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / m[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

/// Optimum over the vertices of `{rows, bounds}` with some variables
/// fixed. Every free variable must have finite bounds, so a nonempty region
/// is a polytope. Returns the optimum in the model's sense, `None` when no
/// vertex is feasible.
pub fn vertex_optimum_fixed(model: &LpModel, fixed: &[Option<f64>]) -> Option<f64> {
    let free: Vec<usize> = (0..model.num_vars()).filter(|&j| fixed[j].is_none()).collect();
    let base: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let feasible = |x: &[f64]| {
        model.variables.iter().enumerate().all(|(j, v)| {
            x[j] >= v.lower - 1e-7 * (1.0 + v.lower.abs())
                && x[j] <= v.upper + 1e-7 * (1.0 + v.upper.abs())
        }) && model.constraints.iter().all(|c| {
            let lhs = c.activity(x);
            c.relation.holds(lhs, c.rhs, 1e-7 * (1.0 + c.rhs.abs()))
        })
    };
    let better = |a: f64, b: f64| match model.sense {
        Sense::Minimize => a < b,
        Sense::Maximize => a > b,
    };
    if free.is_empty() {
        return feasible(&base).then(|| model.objective_value(&base));
    }
    // Hyperplanes over the free variables: (coefficients, rhs).
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &model.constraints {
        let mut rhs = c.rhs;
        for (j, a) in c.coeffs.iter().enumerate() {
            rhs -= a * base[j];
        }
        planes.push((free.iter().map(|&j| c.coeffs[j]).collect(), rhs));
    }
    for (pos, &j) in free.iter().enumerate() {
        let v = &model.variables[j];
        assert!(v.lower.is_finite() && v.upper.is_finite(), "oracle needs finite bounds");
        let mut e = vec![0.0; free.len()];
        e[pos] = 1.0;
        planes.push((e.clone(), v.lower));
        planes.push((e, v.upper));
    }
    let mut best: Option<f64> = None;
    combinations(planes.len(), free.len(), &mut |pick| {
        let m: Vec<Vec<f64>> = pick.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&i| planes[i].1).collect();
        if let Some(sol) = solve_square(m, b) {
            let mut x = base.clone();
            for (pos, &j) in free.iter().enumerate() {
                x[j] = sol[pos];
            }
            if feasible(&x) {
                let obj = model.objective_value(&x);
                if best.map_or(true, |b| better(obj, b)) {
                    best = Some(obj);
                }
            }
        }
    });
    best
}

pub fn vertex_optimum(model: &LpModel) -> Option<f64> {
    vertex_optimum_fixed(model, &vec![None; model.num_vars()])
}

/// Exhaustive enumeration of the binaries, each completion solved by
/// vertex enumeration.
pub fn enumerate_mip(model: &LpModel) -> Option<f64> {
    let bins: Vec<usize> = (0..model.num_vars())
        .filter(|&j| model.variables[j].kind == VarKind::Binary)
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0..(1u32 << bins.len()) {
        let mut fixed = vec![None; model.num_vars()];
        for (b, &j) in bins.iter().enumerate() {
            fixed[j] = Some(((mask >> b) & 1) as f64);
        }
        let relaxed = model.relaxed();
        if let Some(o) = vertex_optimum_fixed(&relaxed, &fixed) {
            let improves = match model.sense {
                Sense::Minimize => best.map_or(true, |b| o < b),
                Sense::Maximize => best.map_or(true, |b| o > b),
            };
            if improves {
                best = Some(o);
            }
        }
    }
    best
}

fn random_relation(rng: &mut StdRng) -> Relation {
    match rng.gen_range(0..10) {
        0..=3 => Relation::Le,
        4..=7 => Relation::Ge,
        _ => Relation::Eq,
    }
}

/// Right-hand side for `coeffs` that the point `x0` satisfies, except for
/// an occasional arbitrary value so some instances come out infeasible.
fn rhs_through(rng: &mut StdRng, coeffs: &[f64], x0: &[f64], rel: Relation) -> f64 {
    if rng.gen_bool(0.15) {
        return rng.gen_range(-6..=10) as f64;
    }
    let at: f64 = coeffs.iter().zip(x0).map(|(a, x)| a * x).sum();
    let slack = rng.gen_range(0..=3) as f64;
    match rel {
        Relation::Le => at.ceil() + slack,
        Relation::Ge => at.floor() - slack,
        Relation::Eq => at,
    }
}

/// Bounded LP with at most six variables and small integer data.
pub fn random_lp(rng: &mut StdRng) -> LpModel {
    let sense = if rng.gen_bool(0.5) {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    let mut model = LpModel::new(sense);
    let n = rng.gen_range(1..=6);
    let mut x0 = Vec::with_capacity(n);
    for _ in 0..n {
        let lower = rng.gen_range(-3..=1) as f64;
        let upper = lower + rng.gen_range(1..=8) as f64;
        model.add_var(lower, upper, rng.gen_range(-6..=6) as f64);
        x0.push(rng.gen_range(lower as i32..=upper as i32) as f64);
    }
    for _ in 0..rng.gen_range(1..=5) {
        let coeffs: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.7) {
                    rng.gen_range(-5..=5) as f64
                } else {
                    0.0
                }
            })
            .collect();
        let rel = random_relation(rng);
        let rhs = rhs_through(rng, &coeffs, &x0, rel);
        model.add_constraint(coeffs, rel, rhs);
    }
    model
}

/// MIP with up to `max_bins` binaries and up to three bounded continuous
/// variables linked to them.
pub fn random_mip(rng: &mut StdRng, max_bins: usize) -> LpModel {
    let sense = if rng.gen_bool(0.7) {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    let mut model = LpModel::new(sense);
    let nb = rng.gen_range(1..=max_bins);
    let nc = rng.gen_range(0..=3);
    let mut x0 = Vec::with_capacity(nb + nc);
    for _ in 0..nb {
        model.add_binary(rng.gen_range(-20..=40) as f64);
        x0.push(f64::from(u8::from(rng.gen_bool(0.5))));
    }
    for c in 0..nc {
        model.add_var(0.0, rng.gen_range(3..=20) as f64, rng.gen_range(-10..=20) as f64);
        x0.push(if x0[c % nb] > 0.0 { rng.gen_range(0..=3) as f64 } else { 0.0 });
    }
    for _ in 0..rng.gen_range(1..=6) {
        let coeffs: Vec<f64> = (0..nb + nc)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    rng.gen_range(-5..=9) as f64
                } else {
                    0.0
                }
            })
            .collect();
        let rel = if rng.gen_bool(0.5) {
            Relation::Ge
        } else {
            Relation::Le
        };
        let rhs = rhs_through(rng, &coeffs, &x0, rel);
        model.add_constraint(coeffs, rel, rhs);
    }
    for c in 0..nc {
        model.add_sparse_constraint(&[(nb + c, 1.0), (c % nb, -8.0)], Relation::Le, 0.0);
    }
    model
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// One plant that must cover every scenario's demand `h_k` without any
/// first-stage constraint tying production to demand. With `x = 0` every
/// scenario is infeasible, so the first master solution forces
/// feasibility cuts.
///
/// Second stage: `y` shipped, `s` unused capacity, `t` surplus;
/// `y + s = x`, `y - t = h_k`, cost `2y`.
pub fn under_production_instance(demands: &[f64], alpha: f64) -> TwoStageProblem {
    let k = demands.len();
    let scenarios = demands
        .iter()
        .map(|&h| Scenario {
            d: vec![2.0, 0.0, 0.0],
            a: vec![vec![-1.0], vec![0.0]],
            b: vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, -1.0]],
            h: vec![0.0, h],
        })
        .collect();
    TwoStageProblem::new(
        vec![1.0],
        vec![FirstStageRow {
            coeffs: vec![1.0],
            rel: Relation::Le,
            rhs: 100.0,
        }],
        vec![false],
        scenarios,
        WeightVector::uniform(k, WeightKind::Importance).unwrap(),
        generate_weights_galpha(alpha, k).unwrap(),
    )
    .unwrap()
}

/// Checks the bound and certificate properties of a decomposition report.
pub fn check_decomposition_report(r: &SolveReport, epsilon: f64) -> Result<(), String> {
    let tol = |v: f64| 1e-9 * (1.0 + v.abs());
    for pair in r.trace.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.lower_bound < a.lower_bound - tol(a.lower_bound) {
            return Err(format!(
                "{}: lower bound fell from {} to {} at iteration {}",
                r.method, a.lower_bound, b.lower_bound, b.iteration
            ));
        }
        if b.best_upper_bound > a.best_upper_bound + tol(a.best_upper_bound) {
            return Err(format!(
                "{}: best upper bound rose at iteration {}",
                r.method, b.iteration
            ));
        }
    }
    if !(r.final_gap < epsilon) {
        return Err(format!("{}: final gap {:.3e}", r.method, r.final_gap));
    }
    for cut in r.cut_log.iter().filter(|c| c.kind == CutKind::Feasibility) {
        if cut.dual_residual > 1e-7 {
            return Err(format!("ray with positive γ'B component {}", cut.dual_residual));
        }
        if !(cut.value_at_generation > 1e-7) {
            return Err(format!("ray margin {} not positive", cut.value_at_generation));
        }
    }
    Ok(())
}
