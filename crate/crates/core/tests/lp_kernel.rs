mod common;

use common::{enumerate_mip, random_lp, random_mip, rel_diff, vertex_optimum};
use rand::rngs::StdRng;
use rand::SeedableRng;
use wowa::lp::{
    farkas_margin, solve_lp, solve_mip, solve_mip_with, LpOutcome, MipOptions, Relation, Sense,
};

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = StdRng::seed_from_u64(101);
    for trial in 0..300 {
        let model = random_lp(&mut rng);
        match (vertex_optimum(&model), solve_lp(&model).unwrap()) {
            (Some(o), LpOutcome::Optimal(s)) => {
                assert!(rel_diff(o, s.objective) <= 1e-7, "trial {trial}: {o} vs {}", s.objective)
            }
            (None, LpOutcome::Infeasible { .. }) => {}
            (o, got) => panic!("trial {trial}: oracle {o:?}, simplex {:?}", got.status()),
        }
    }
}

#[test]
fn optimal_duals_certify_optimality() {
    let mut rng = StdRng::seed_from_u64(202);
    let tol = 1e-7;
    let mut checked = 0;
    for trial in 0..300 {
        let model = random_lp(&mut rng);
        let LpOutcome::Optimal(s) = solve_lp(&model).unwrap() else {
            continue;
        };
        checked += 1;
        assert!(model.max_violation(&s.x) <= 1e-7, "trial {trial}");
        let flip = if model.sense == Sense::Minimize { 1.0 } else { -1.0 };
        for (c, &y) in model.constraints.iter().zip(&s.duals) {
            let slack = (c.activity(&s.x) - c.rhs).abs();
            match c.relation {
                Relation::Le => assert!(flip * y <= tol, "trial {trial}: Le dual {y}"),
                Relation::Ge => assert!(flip * y >= -tol, "trial {trial}: Ge dual {y}"),
                Relation::Eq => {}
            }
            if slack > 1e-6 {
                assert!(y.abs() <= tol, "trial {trial}: slack row has dual {y}");
            }
        }
        for (j, (v, &rc)) in model.variables.iter().zip(&s.reduced_costs).enumerate() {
            let signed = flip * rc;
            let at_lower = (s.x[j] - v.lower).abs() <= 1e-7;
            let at_upper = (s.x[j] - v.upper).abs() <= 1e-7;
            if !at_lower {
                assert!(signed <= tol, "trial {trial}: var {j} rc {rc} above lower bound");
            }
            if !at_upper {
                assert!(signed >= -tol, "trial {trial}: var {j} rc {rc} below upper bound");
            }
        }
        let dual = s.dual_objective(&model);
        assert!(rel_diff(dual, s.objective) <= 1e-7, "trial {trial}: {dual} vs {}", s.objective);
    }
    assert!(checked > 100);
}

#[test]
fn infeasible_lps_return_farkas_certificates() {
    let mut rng = StdRng::seed_from_u64(303);
    let mut seen = 0;
    for trial in 0..400 {
        let model = random_lp(&mut rng);
        if let LpOutcome::Infeasible { farkas } = solve_lp(&model).unwrap() {
            seen += 1;
            let margin = farkas_margin(&model, &farkas);
            assert!(margin.is_some_and(|m| m > 0.0), "trial {trial}: margin {margin:?}");
        }
    }
    assert!(seen > 10);
}

#[test]
fn repeated_solves_are_identical() {
    let mut rng = StdRng::seed_from_u64(404);
    for _ in 0..50 {
        let model = random_lp(&mut rng);
        let a = solve_lp(&model).unwrap();
        let b = solve_lp(&model).unwrap();
        assert_eq!(a.status(), b.status());
        if let (Some(x), Some(y)) = (a.optimal(), b.optimal()) {
            assert_eq!(x.objective.to_bits(), y.objective.to_bits());
        }
    }
}

#[test]
fn random_mips_match_enumeration() {
    let mut rng = StdRng::seed_from_u64(505);
    for trial in 0..150 {
        let model = random_mip(&mut rng, 12);
        let oracle = enumerate_mip(&model);
        for warm_start in [true, false] {
            let got = solve_mip_with(
                &model,
                &MipOptions {
                    warm_start,
                    ..MipOptions::default()
                },
            )
            .unwrap();
            match (oracle, &got) {
                (Some(o), LpOutcome::Optimal(s)) => assert!(
                    rel_diff(o, s.objective) <= 1e-7,
                    "trial {trial} warm={warm_start}: {o} vs {}",
                    s.objective
                ),
                (None, LpOutcome::Infeasible { .. }) => {}
                (o, g) => panic!("trial {trial}: oracle {o:?}, solver {:?}", g.status()),
            }
        }
    }
}

#[test]
fn mip_solutions_are_integral_and_feasible() {
    let mut rng = StdRng::seed_from_u64(606);
    for _ in 0..100 {
        let model = random_mip(&mut rng, 8);
        if let LpOutcome::Optimal(s) = solve_mip(&model).unwrap() {
            assert!(model.max_violation(&s.x) <= 1e-7);
            for (v, x) in model.variables.iter().zip(&s.x) {
                if v.kind == wowa::lp::VarKind::Binary {
                    assert!(*x == 0.0 || *x == 1.0, "binary value {x}");
                }
            }
        }
    }
}
