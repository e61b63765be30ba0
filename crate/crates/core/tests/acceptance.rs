//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wowa::cli::{bench_csv, run_bench, run_sweep, sweep_shape, BENCH_HEADER};
use wowa::direct::{wowa_lp_value_with, WowaLpPath};
use wowa::loctrans::{generate, problem_for, WeightChoice};
use wowa::lp::{solve_lp, solve_mip, LpOutcome};
use wowa::{
    generate_weights_galpha, solve, wowa, wowa_bruteforce_permutations, DecompositionParams,
    Method, SolveReport, Termination, WeightKind, WeightVector,
};

type Outcome = Result<String, String>;

/// Decomposition reports gathered by other criteria, checked together.
#[derive(Default)]
struct Runs {
    decomposition: Vec<(String, SolveReport)>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cross_method(runs: &mut Runs) -> Outcome {
    let plan: [((usize, usize, usize), u64); 3] = [((5, 5, 5), 7), ((5, 5, 10), 7), ((10, 10, 20), 6)];
    let params = DecompositionParams::default();
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    let mut count = 0;
    for ((n, m, k), seeds) in plan {
        for seed in 0..seeds {
            let started = Instant::now();
            let problem = problem_for(&generate(n, m, k, seed), WeightChoice::GAlpha(0.1))
                .map_err(|e| e.to_string())?;
            let mut objectives = Vec::new();
            for method in Method::ALL {
                let r = solve(&problem, method, &params)
                    .map_err(|e| format!("({n},{m},{k}) seed {seed} {method}: {e}"))?;
                objectives.push((method, r.objective));
                if method != Method::Direct {
                    runs.decomposition
                        .push((format!("({n},{m},{k}) seed {seed} {method}"), r));
                }
            }
            let elapsed = started.elapsed().as_secs_f64();
            slowest = slowest.max(elapsed);
            ensure(elapsed < 60.0, || {
                format!("({n},{m},{k}) seed {seed} took {elapsed:.1}s")
            })?;
            for (i, a) in objectives.iter().enumerate() {
                for b in &objectives[i + 1..] {
                    let d = rel_diff(a.1, b.1);
                    worst = worst.max(d);
                    ensure(d <= 1e-5, || {
                        format!(
                            "({n},{m},{k}) seed {seed}: {} {} vs {} {}",
                            a.0, a.1, b.0, b.1
                        )
                    })?;
                }
            }
            count += 1;
        }
    }
    Ok(format!(
        "{count} instances, max pairwise rel diff {worst:.2e}, slowest instance {slowest:.1}s"
    ))
}

fn permutation_identity(_: &mut Runs) -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let k = rng.gen_range(2..=6);
        let (alpha, w) = random_galpha(&mut rng, k);
        let p = random_simplex(&mut rng, k);
        let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-50.0..100.0)).collect();
        let pv = WeightVector::importance(p.clone()).map_err(|e| e.to_string())?;
        let value = wowa(&w, &pv, &a).map_err(|e| e.to_string())?;
        let oracle = permutation_max(w.entries(), &p, &a);
        let library = wowa_bruteforce_permutations(&w, &pv, &a).map_err(|e| e.to_string())?;
        let d = (value - oracle).abs().max((value - library).abs());
        worst = worst.max(d);
        ensure(d <= 1e-9, || {
            format!("trial {trial} (K={k}, α={alpha}): wowa {value}, permutation max {oracle}")
        })?;
    }
    Ok(format!("1000 triples, max abs diff {worst:.2e}"))
}

fn duality_chain(_: &mut Runs) -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for trial in 0..500 {
        let k = rng.gen_range(2..=10);
        let (_, w) = random_galpha(&mut rng, k);
        let p = WeightVector::importance(random_simplex(&mut rng, k)).map_err(|e| e.to_string())?;
        let q: Vec<f64> = (0..k).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let reference = wowa(&w, &p, &q).map_err(|e| e.to_string())?;
        for path in [WowaLpPath::Primal, WowaLpPath::Dual] {
            let v = wowa_lp_value_with(&q, &w, &p, path).map_err(|e| e.to_string())?;
            let d = (v - reference).abs();
            worst = worst.max(d);
            ensure(d <= 1e-8, || {
                format!("trial {trial} {path:?}: LP {v} vs wowa {reference}")
            })?;
        }
    }
    Ok(format!("500 vectors, both LP paths, max abs diff {worst:.2e}"))
}

fn reductions(_: &mut Runs) -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let k = rng.gen_range(1..=10);
        let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let probs = random_simplex(&mut rng, k);
        let p = WeightVector::importance(probs.clone()).map_err(|e| e.to_string())?;
        let uniform_w = WeightVector::uniform(k, WeightKind::Preferential).map_err(|e| e.to_string())?;
        let mean: f64 = a.iter().zip(&probs).map(|(a, p)| a * p).sum();
        let got = wowa(&uniform_w, &p, &a).map_err(|e| e.to_string())?;
        let d1 = (got - mean).abs();

        let e1 = WeightVector::worst_case(k).map_err(|e| e.to_string())?;
        let uniform_p = WeightVector::uniform(k, WeightKind::Importance).map_err(|e| e.to_string())?;
        let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let got_max = wowa(&e1, &uniform_p, &a).map_err(|e| e.to_string())?;
        let d2 = (got_max - max).abs();
        worst = worst.max(d1).max(d2);
        ensure(d1 <= 1e-12 && d2 <= 1e-12, || {
            format!("trial {trial}: mean {mean} vs {got}, max {max} vs {got_max}")
        })?;
    }
    Ok(format!("100 vectors, max abs diff {worst:.2e}"))
}

fn galpha_weights(_: &mut Runs) -> Outcome {
    let w = generate_weights_galpha(0.1, 5).map_err(|e| e.to_string())?;
    let expected = [0.41, 0.6688, 0.832, 0.935, 1.0];
    let mut cum = 0.0;
    let mut worst = 0.0f64;
    let mut sums = Vec::new();
    for (v, e) in w.entries().iter().zip(expected) {
        cum += v;
        sums.push(cum);
        worst = worst.max((cum - e).abs());
    }
    ensure(worst <= 5e-4, || format!("cumulative sums {sums:.4?}"))?;
    Ok(format!("cumulative sums {sums:.4?}, max deviation {worst:.1e}"))
}

fn soundness(runs: &mut Runs) -> Outcome {
    let mut feas = 0;
    for (label, r) in &runs.decomposition {
        ensure(r.termination == Termination::GapClosed, || {
            format!("{label}: terminated {:?}", r.termination)
        })?;
        check_decomposition_report(r, 1e-6).map_err(|e| format!("{label}: {e}"))?;
        feas += r.feasibility_cuts;
    }
    ensure(!runs.decomposition.is_empty(), || "no decomposition runs recorded".into())?;
    Ok(format!(
        "{} runs, {feas} feasibility cuts certified",
        runs.decomposition.len()
    ))
}

fn feasibility_cuts(runs: &mut Runs) -> Outcome {
    let problem = under_production_instance(&[2.0, 5.0, 3.0, 4.0], 0.1);
    let params = DecompositionParams::default();
    let direct = solve(&problem, Method::Direct, &params).map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    for method in [Method::Benders, Method::Subgradient] {
        let r = solve(&problem, method, &params).map_err(|e| format!("{method}: {e}"))?;
        let first_feas = r.trace.iter().position(|t| t.feasibility_cuts > 0);
        ensure(first_feas.is_some_and(|i| i + 1 < r.trace.len()), || {
            format!("{method}: no feasibility-cut iteration before convergence")
        })?;
        ensure(rel_diff(r.objective, direct.objective) <= 1e-6, || {
            format!("{method} objective {} vs direct {}", r.objective, direct.objective)
        })?;
        details.push(format!("{method} {} feasibility cut(s)", r.feasibility_cuts));
        runs.decomposition.push((format!("under-production {method}"), r));
    }
    Ok(details.join(", "))
}

fn sweep_endpoints(_: &mut Runs) -> Outcome {
    let mut choices = vec![WeightChoice::RiskNeutral];
    choices.extend((1..=9).map(|e| WeightChoice::GAlpha(10f64.powi(-e))));
    choices.push(WeightChoice::Robust);
    let params = DecompositionParams::default();
    let mut shapes = Vec::new();
    for seed in 0..5 {
        let inst = generate(5, 5, 10, 100 + seed);
        let records =
            run_sweep(&inst, &choices, Method::Direct, &params).map_err(|e| e.to_string())?;
        let min_expected = records.iter().map(|r| r.expected_cost).fold(f64::INFINITY, f64::min);
        let min_worst = records.iter().map(|r| r.worst_case_cost).fold(f64::INFINITY, f64::min);
        let neutral = &records[0];
        let robust = records.last().unwrap();
        ensure(neutral.expected_cost <= min_expected * (1.0 + 1e-6), || {
            format!("seed {seed}: risk-neutral expected {} > min {min_expected}", neutral.expected_cost)
        })?;
        ensure(robust.worst_case_cost <= min_worst * (1.0 + 1e-6), || {
            format!("seed {seed}: robust worst case {} > min {min_worst}", robust.worst_case_cost)
        })?;
        let (rising, falling) = sweep_shape(&records, 1e-3);
        shapes.push(format!(
            "{}{}",
            if rising { "E↑" } else { "E~" },
            if falling { "W↓" } else { "W~" }
        ));
    }
    Ok(format!("endpoints dominate on 5 instances; shape {}", shapes.join(" ")))
}

fn bench_structure(_: &mut Runs) -> Outcome {
    let sizes = [(5, 5, 10), (10, 10, 20)];
    let rows = run_bench(
        &sizes,
        3,
        &Method::ALL,
        0,
        WeightChoice::GAlpha(0.1),
        &DecompositionParams::default(),
        1,
    );
    let csv = bench_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    ensure(lines.first() == Some(&BENCH_HEADER), || "CSV header mismatch".into())?;
    ensure(lines.len() == 1 + sizes.len() * 3 * 4, || {
        format!("expected {} CSV lines, got {}", 1 + sizes.len() * 12, lines.len())
    })?;
    ensure(lines[1..].iter().all(|l| l.split(',').count() == 10), || {
        "CSV row with wrong field count".into()
    })?;
    ensure(rows.iter().all(|r| r.solved), || "unsolved benchmark instance".into())?;
    let find = |size: (usize, usize, usize), method, seed| {
        rows.iter()
            .find(|r| (r.n, r.m, r.k) == size && r.method == method && r.instance_seed == seed)
            .unwrap()
    };
    let (mut more_iters, mut more_master, mut total) = (0, 0, 0);
    for &size in &sizes {
        for seed in 0..3 {
            let b = find(size, Method::Benders, seed);
            let s = find(size, Method::Subgradient, seed);
            total += 1;
            more_iters += usize::from(s.iterations > b.iterations);
            more_master += usize::from(b.master_pct > s.master_pct);
        }
    }
    let detail = format!(
        "subgradient more iterations on {more_iters}/{total}, benders larger master share on {more_master}/{total}"
    );
    ensure(2 * more_iters > total && 2 * more_master > total, || detail.clone())?;
    Ok(detail)
}

fn kernel_certification(_: &mut Runs) -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut infeasible = 0;
    for trial in 0..200 {
        let model = random_lp(&mut rng);
        let oracle = vertex_optimum(&model);
        match (oracle, solve_lp(&model).map_err(|e| e.to_string())?) {
            (Some(o), LpOutcome::Optimal(s)) => ensure(rel_diff(o, s.objective) <= 1e-7, || {
                format!("LP {trial}: oracle {o}, simplex {}", s.objective)
            })?,
            (None, LpOutcome::Infeasible { .. }) => infeasible += 1,
            (o, got) => return Err(format!("LP {trial}: oracle {o:?}, simplex {:?}", got.status())),
        }
    }
    let mut mip_infeasible = 0;
    for trial in 0..100 {
        let model = random_mip(&mut rng, 12);
        let oracle = enumerate_mip(&model);
        match (oracle, solve_mip(&model).map_err(|e| e.to_string())?) {
            (Some(o), LpOutcome::Optimal(s)) => ensure(rel_diff(o, s.objective) <= 1e-7, || {
                format!("MIP {trial}: enumeration {o}, branch-and-bound {}", s.objective)
            })?,
            (None, LpOutcome::Infeasible { .. }) => mip_infeasible += 1,
            (o, got) => {
                return Err(format!("MIP {trial}: enumeration {o:?}, solver {:?}", got.status()))
            }
        }
    }
    Ok(format!(
        "200 LPs ({infeasible} infeasible), 100 MIPs ({mip_infeasible} infeasible) match"
    ))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn(&mut Runs) -> Outcome); 10] = [
        (1, "cross-method equivalence", cross_method),
        (2, "WOWA equals the permutation maximum", permutation_identity),
        (3, "WOWA LP duality chain", duality_chain),
        (4, "expected-value and worst-case reductions", reductions),
        (5, "g_alpha weights for alpha=0.1, K=5", galpha_weights),
        (7, "feasibility cuts exercised", feasibility_cuts),
        (6, "decomposition soundness", soundness),
        (8, "alpha-sweep endpoints", sweep_endpoints),
        (9, "benchmark harness structure", bench_structure),
        (10, "LP and MIP kernel certification", kernel_certification),
    ];
    let mut runs = Runs::default();
    let mut results = Vec::new();
    for (id, name, check) in criteria {
        let started = Instant::now();
        let outcome = check(&mut runs);
        results.push((id, name, outcome, started.elapsed()));
    }
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, outcome, elapsed) in &results {
        let secs = Duration::as_secs_f64(elapsed);
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
