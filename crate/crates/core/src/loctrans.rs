//! Location-transportation benchmark.
//!
//! `m` candidate sites with capacity `M_i`, fixed cost `f_i` and unit
//! production cost `c_i` serve `n` customers at unit transport cost `d_ij`.
//! Site opening `z_i` and production `x_i` are decided before the demand
//! scenario `h^k` is revealed; shipments `y^k_ij` follow.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregation::{generate_weights_galpha, WeightKind, WeightVector};
use crate::lp::{LpModel, LpOutcome, Relation, Sense};
use crate::model::{
    parse_json, read_file, write_file, FirstStageRow, ModelError, Scenario, TwoStageProblem,
};

/// Deterministic splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[lo, hi]` by rejection sampling.
    pub fn uniform_int(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        let span = hi - lo;
        if span == u64::MAX {
            return self.next_u64();
        }
        let span = span + 1;
        let limit = u64::MAX - u64::MAX % span;
        loop {
            let v = self.next_u64();
            if v < limit {
                return lo + v % span;
            }
        }
    }
}

/// Independent sub-streams, one per data family.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Demands = 1,
    Costs = 2,
    Probabilities = 3,
    Capacities = 4,
}

fn stream(seed: u64, family: Stream) -> SplitMix64 {
    const STRIDE: u64 = 0xD1B5_4A32_D192_ED03;
    SplitMix64::new(seed.wrapping_add((family as u64).wrapping_mul(STRIDE)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocTransHeader {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocTransInstance {
    pub loctrans: LocTransHeader,
    /// `M_i`.
    pub capacity: Vec<f64>,
    /// `f_i`.
    pub fixed_cost: Vec<f64>,
    /// `c_i`.
    pub production_cost: Vec<f64>,
    /// `d_ij`, one row per site.
    pub transport_cost: Vec<Vec<f64>>,
    /// `h̄_j`.
    pub base_demand: Vec<f64>,
    /// `h^k_j`, one row per scenario.
    pub demand: Vec<Vec<f64>>,
    /// `p̄_k`.
    pub raw_probability: Vec<f64>,
    /// `p_k = p̄_k / Σ p̄`.
    pub probability: Vec<f64>,
}

/// Which preferential/importance pair a solve uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightChoice {
    /// `w` from `g_α`, `p` the scenario probabilities.
    GAlpha(f64),
    /// Uniform `w`: the expected cost.
    RiskNeutral,
    /// `w = e₁` with uniform `p`: the worst-case cost.
    Robust,
}

impl WeightChoice {
    pub fn label(&self) -> String {
        match self {
            WeightChoice::GAlpha(a) => format!("{a:e}"),
            WeightChoice::RiskNeutral => "riskneutral".into(),
            WeightChoice::Robust => "robust".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub first_stage_cost: f64,
    pub expected_cost: f64,
    pub worst_case_cost: f64,
}

impl LocTransInstance {
    pub fn m(&self) -> usize {
        self.loctrans.m
    }

    pub fn n(&self) -> usize {
        self.loctrans.n
    }

    pub fn k(&self) -> usize {
        self.loctrans.k
    }

    /// Largest scenario total demand.
    pub fn max_total_demand(&self) -> f64 {
        self.demand
            .iter()
            .map(|h| h.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let (m, n, k) = (self.m(), self.n(), self.k());
        if m == 0 || n == 0 || k == 0 {
            return Err(ModelError::Schema {
                location: "loctrans".into(),
                message: "m, n and K must be positive".into(),
            });
        }
        let check = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(ModelError::Schema {
                    location: name.into(),
                    message: format!("expected {want} entries, got {got}"),
                })
            }
        };
        check("capacity", self.capacity.len(), m)?;
        check("fixed_cost", self.fixed_cost.len(), m)?;
        check("production_cost", self.production_cost.len(), m)?;
        check("transport_cost", self.transport_cost.len(), m)?;
        for (i, row) in self.transport_cost.iter().enumerate() {
            check(&format!("transport_cost[{i}]"), row.len(), n)?;
        }
        check("base_demand", self.base_demand.len(), n)?;
        check("demand", self.demand.len(), k)?;
        for (s, row) in self.demand.iter().enumerate() {
            check(&format!("demand[{s}]"), row.len(), n)?;
        }
        check("raw_probability", self.raw_probability.len(), k)?;
        check("probability", self.probability.len(), k)?;
        WeightVector::importance(self.probability.clone()).map_err(|source| {
            ModelError::Weights {
                location: "probability".into(),
                source,
            }
        })?;
        Ok(())
    }

    pub fn probabilities(&self) -> WeightVector {
        WeightVector::importance(self.probability.clone()).expect("validated probabilities")
    }

    pub fn weights(&self, choice: WeightChoice) -> Result<(WeightVector, WeightVector), ModelError> {
        let k = self.k();
        let w = match choice {
            WeightChoice::GAlpha(alpha) => generate_weights_galpha(alpha, k),
            WeightChoice::RiskNeutral => WeightVector::uniform(k, WeightKind::Preferential),
            WeightChoice::Robust => WeightVector::worst_case(k),
        }
        .map_err(|source| ModelError::Weights {
            location: "w".into(),
            source,
        })?;
        let p = match choice {
            WeightChoice::Robust => WeightVector::uniform(k, WeightKind::Importance)
                .expect("K is positive"),
            _ => self.probabilities(),
        };
        Ok((w, p))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let inst: Self = parse_json(text, Path::new("<string>"))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let mut text = self.to_json();
        text.push('\n');
        write_file(path.as_ref(), &text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let inst: Self = parse_json(&read_file(path)?, path)?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Draws an instance: `h̄_j ∈ [10, 500]`, `h^k_j ∈ [h̄_j, 2h̄_j]`,
/// `f_i ∈ [100, 500]`, `c_i ∈ [10, 50]`, `d_ij ∈ [1, 1000]`,
/// `p̄_k ∈ [1, 100]`, and `M_i ∈ [⌈D/m⌉, 2⌈D/m⌉]` with `D` the largest
/// scenario total demand.
pub fn generate(n: usize, m: usize, k: usize, seed: u64) -> LocTransInstance {
    assert!(n >= 1 && m >= 1 && k >= 1, "n, m and K must be positive");
    let mut demands = stream(seed, Stream::Demands);
    let base_demand: Vec<u64> = (0..n).map(|_| demands.uniform_int(10, 500)).collect();
    let demand: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            base_demand
                .iter()
                .map(|&h| demands.uniform_int(h, 2 * h) as f64)
                .collect()
        })
        .collect();

    let mut costs = stream(seed, Stream::Costs);
    let fixed_cost: Vec<f64> = (0..m).map(|_| costs.uniform_int(100, 500) as f64).collect();
    let production_cost: Vec<f64> = (0..m).map(|_| costs.uniform_int(10, 50) as f64).collect();
    let transport_cost: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| costs.uniform_int(1, 1000) as f64).collect())
        .collect();

    let mut probs = stream(seed, Stream::Probabilities);
    let raw: Vec<u64> = (0..k).map(|_| probs.uniform_int(1, 100)).collect();
    let total: u64 = raw.iter().sum();
    let probability: Vec<f64> = raw.iter().map(|&r| r as f64 / total as f64).collect();

    let max_demand = demand
        .iter()
        .map(|h| h.iter().sum::<f64>() as u64)
        .max()
        .unwrap_or(0);
    let share = max_demand.div_ceil(m as u64);
    let mut caps = stream(seed, Stream::Capacities);
    let capacity: Vec<f64> = (0..m).map(|_| caps.uniform_int(share, 2 * share) as f64).collect();

    LocTransInstance {
        loctrans: LocTransHeader { m, n, k, seed },
        capacity,
        fixed_cost,
        production_cost,
        transport_cost,
        base_demand: base_demand.iter().map(|&v| v as f64).collect(),
        demand,
        raw_probability: raw.iter().map(|&v| v as f64).collect(),
        probability,
    }
}

/// First-stage column of `z_i` and `x_i`.
pub fn z_index(i: usize) -> usize {
    i
}

pub fn x_index(m: usize, i: usize) -> usize {
    m + i
}

/// Second-stage column of `y_ij`; the supply slacks `s_i` follow at
/// `mn + i` and the demand surpluses `t_j` at `mn + m + j`.
pub fn y_index(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

/// Maps the instance to the generic two-stage form with importance weights
/// equal to the scenario probabilities.
pub fn to_two_stage(inst: &LocTransInstance, w: WeightVector) -> Result<TwoStageProblem, ModelError> {
    to_two_stage_with(inst, w, inst.probabilities())
}

pub fn to_two_stage_with(
    inst: &LocTransInstance,
    w: WeightVector,
    p: WeightVector,
) -> Result<TwoStageProblem, ModelError> {
    inst.validate()?;
    let (m, n) = (inst.m(), inst.n());
    let n1 = 2 * m;
    let n2 = m * n + m + n;
    let mut c = inst.fixed_cost.clone();
    c.extend(&inst.production_cost);
    let first_stage_rows = (0..m)
        .map(|i| {
            let mut coeffs = vec![0.0; n1];
            coeffs[x_index(m, i)] = 1.0;
            coeffs[z_index(i)] = -inst.capacity[i];
            FirstStageRow {
                coeffs,
                rel: Relation::Le,
                rhs: 0.0,
            }
        })
        .collect();
    let binary_mask = (0..n1).map(|j| j < m).collect();

    let mut d = vec![0.0; n2];
    for i in 0..m {
        for j in 0..n {
            d[y_index(n, i, j)] = inst.transport_cost[i][j];
        }
    }
    // Σ_j y_ij + s_i - x_i = 0, then Σ_i y_ij - t_j = h_j.
    let mut a = vec![vec![0.0; n1]; m + n];
    let mut b = vec![vec![0.0; n2]; m + n];
    for i in 0..m {
        a[i][x_index(m, i)] = -1.0;
        for j in 0..n {
            b[i][y_index(n, i, j)] = 1.0;
        }
        b[i][m * n + i] = 1.0;
    }
    for j in 0..n {
        for i in 0..m {
            b[m + j][y_index(n, i, j)] = 1.0;
        }
        b[m + j][m * n + m + j] = -1.0;
    }
    let scenarios = inst
        .demand
        .iter()
        .map(|h| {
            let mut rhs = vec![0.0; m];
            rhs.extend(h);
            Scenario {
                d: d.clone(),
                a: a.clone(),
                b: b.clone(),
                h: rhs,
            }
        })
        .collect();
    TwoStageProblem::new(c, first_stage_rows, binary_mask, scenarios, p, w)
}

pub fn problem_for(inst: &LocTransInstance, choice: WeightChoice) -> Result<TwoStageProblem, ModelError> {
    let (w, p) = inst.weights(choice)?;
    to_two_stage_with(inst, w, p)
}

/// Expected and worst-case total cost of a first-stage decision `[z, x]`.
pub fn evaluate_solution(inst: &LocTransInstance, first_stage: &[f64]) -> Result<Evaluation, ModelError> {
    let problem = problem_for(inst, WeightChoice::RiskNeutral)?;
    let q = problem.recourse_values(first_stage)?;
    let first_stage_cost = problem.first_stage_cost(first_stage);
    let expected: f64 = q.iter().zip(&inst.probability).map(|(q, p)| q * p).sum();
    let worst = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Evaluation {
        first_stage_cost,
        expected_cost: first_stage_cost + expected,
        worst_case_cost: first_stage_cost + worst,
    })
}

/// The expected-cost model written directly with inequality rows:
///
/// ```text
/// min  f'z + c'x + Σ_k p_k Σ_ij d_ij y^k_ij
/// s.t. x_i ≤ M_i z_i,  Σ_j y^k_ij ≤ x_i,  Σ_i y^k_ij ≥ h^k_j
/// ```
///
/// Columns are `z`, `x`, then `y^k` blocks.
pub fn risk_neutral_model(inst: &LocTransInstance) -> LpModel {
    let (m, n, k) = (inst.m(), inst.n(), inst.k());
    let mut model = LpModel::new(Sense::Minimize);
    for &f in &inst.fixed_cost {
        model.add_binary(f);
    }
    for &c in &inst.production_cost {
        model.add_var(0.0, f64::INFINITY, c);
    }
    let y0 = model.num_vars();
    for &p in &inst.probability {
        for row in &inst.transport_cost {
            for &d in row {
                model.add_var(0.0, f64::INFINITY, p * d);
            }
        }
    }
    let y = |s: usize, i: usize, j: usize| y0 + s * m * n + y_index(n, i, j);
    for i in 0..m {
        model.add_sparse_constraint(&[(m + i, 1.0), (i, -inst.capacity[i])], Relation::Le, 0.0);
    }
    for s in 0..k {
        for i in 0..m {
            let mut row: Vec<(usize, f64)> = (0..n).map(|j| (y(s, i, j), 1.0)).collect();
            row.push((m + i, -1.0));
            model.add_sparse_constraint(&row, Relation::Le, 0.0);
        }
        for j in 0..n {
            let row: Vec<(usize, f64)> = (0..m).map(|i| (y(s, i, j), 1.0)).collect();
            model.add_sparse_constraint(&row, Relation::Ge, inst.demand[s][j]);
        }
    }
    model
}

/// Optimal value of [`risk_neutral_model`].
pub fn risk_neutral_optimum(inst: &LocTransInstance) -> Result<f64, ModelError> {
    match crate::lp::solve_mip(&risk_neutral_model(inst))? {
        LpOutcome::Optimal(s) => Ok(s.objective),
        other => Err(ModelError::Lp(crate::lp::LpError::InvalidModel(format!(
            "risk-neutral model ended {:?}",
            other.status()
        )))),
    }
}
