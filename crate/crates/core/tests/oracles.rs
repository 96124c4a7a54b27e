use gean::export::{assignment_from_embedding, build_udgp_model, UdgpModel};
use gean::feasibility::check_feasibility;
use gean::graph::{screen_embeddability_2d, Graph, ScreeningWarning};
use gean::layout::{lift_to_3d, Embedding};
use gean::loss::loss;
use gean::physics::{default_limits, PhysicsSpec, RegisterLimits};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn limits() -> RegisterLimits {
    default_limits(&PhysicsSpec::default(), 2).unwrap()
}

/// Points in a disc of random radius with a graph that is mostly the unit-disk
/// graph of the points, so that feasible and infeasible cases both occur.
fn random_case(rng: &mut ChaCha8Rng, l: &RegisterLimits) -> (Graph, Embedding) {
    let n = rng.gen_range(2..=10);
    let radius = rng.gen_range(6.0..50.0);
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    let e = Embedding::from_points(&pts).unwrap();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let udg = e.distance(i, j) <= l.r_blockade;
            let flip = rng.gen::<f64>() < 0.03;
            if udg != flip {
                edges.push((i + 1, j + 1));
            }
        }
    }
    (Graph::from_edges(n, edges).unwrap(), e)
}

#[test]
fn zero_loss_matches_feasibility_with_margin() {
    let l = limits();
    let no_margin = RegisterLimits { epsilon: 0.0, ..l };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut feasible, mut infeasible, mut in_margin) = (0, 0, 0);
    for _ in 0..1000 {
        let (g, e) = random_case(&mut rng, &l);
        let d = e.pair_distances();
        let report = check_feasibility(&e, &g, &l).unwrap();
        let clears_margin = report.metrics.r_nonadj.is_none_or(|r| r >= l.r_blockade + l.epsilon);

        let zero = loss(&d, &g, &l).unwrap().total == 0.0;
        assert_eq!(zero, report.feasible && clears_margin);
        if zero {
            assert!(report.feasible);
        }
        // without the margin the loss vanishes exactly on feasible embeddings,
        // except for a non-adjacent pair sitting on the radius itself
        if report.metrics.r_nonadj != Some(l.r_blockade) {
            assert_eq!(loss(&d, &g, &no_margin).unwrap().total == 0.0, report.feasible);
        }

        match (report.feasible, clears_margin) {
            (true, true) => feasible += 1,
            (true, false) => in_margin += 1,
            _ => infeasible += 1,
        }
    }
    assert!(
        feasible >= 100 && infeasible >= 100,
        "{feasible} feasible, {infeasible} infeasible"
    );
    assert!(in_margin >= 1, "no embedding landed inside the margin");
}

fn hexagon_points(count: usize, side: f64) -> Vec<[f64; 2]> {
    let mut pts = vec![[0.0, 0.0]];
    for k in 0..6 {
        let t = std::f64::consts::FRAC_PI_3 * k as f64;
        pts.push([side * t.cos(), side * t.sin()]);
    }
    pts.truncate(count);
    pts
}

#[test]
fn cliques_on_hexagonal_packing_are_feasible() {
    let l = limits();
    // √3 is irrational, so a side of exactly 4 rounds some neighbor distances to
    // one ulp below d_min; the checker is exact, so the side gets a hair of slack
    let side = 4.0 * (1.0 + 1e-12);
    for n in 1..=7 {
        let e = Embedding::from_points(&hexagon_points(n, side)).unwrap();
        let g = Graph::complete(n);
        let r = check_feasibility(&e, &g, &l).unwrap();
        assert!(r.feasible, "K{n}: {:?}", r.violations);
        assert!(r.metrics.r_max.is_none_or(|d| d <= 8.0 + 1e-9));
        let lifted = lift_to_3d(&e).unwrap();
        assert!(
            check_feasibility(&lifted, &g, &l.with_dims(3).unwrap())
                .unwrap()
                .feasible
        );
    }
    let k8 = screen_embeddability_2d(&Graph::complete(8)).unwrap();
    assert!(k8.violations.contains(&ScreeningWarning::MaxCliqueExceeded));
}

#[test]
fn spaced_lines_embed_paths_up_to_the_extent_limit() {
    let l = limits();
    let step = 0.9 * l.r_blockade;
    let longest = (l.d_max / step).floor() as usize + 1;
    for n in 2..=longest + 1 {
        let pts: Vec<[f64; 2]> = (0..n).map(|k| [step * k as f64 - 45.0, 0.0]).collect();
        let r = check_feasibility(&Embedding::from_points(&pts).unwrap(), &Graph::path(n), &l).unwrap();
        assert_eq!(r.feasible, n <= longest, "path of {n}");
    }
}

fn model_holds(model: &UdgpModel, e: &Embedding, gamma: f64) -> bool {
    model
        .violations(&assignment_from_embedding(e, gamma), 1e-9)
        .unwrap()
        .is_empty()
}

#[test]
fn exported_model_agrees_with_the_checker_outside_the_margin() {
    let l = limits();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let (g, e) = random_case(&mut rng, &l);
        let model = build_udgp_model(&g, &l, 2).unwrap();
        let report = check_feasibility(&e, &g, &l).unwrap();
        let clears_margin = report.metrics.r_nonadj.is_none_or(|r| r >= l.r_blockade + l.epsilon);
        assert_eq!(model_holds(&model, &e, 0.0), report.feasible && clears_margin);
        // every γ = 1 switches all pair constraints off inside the box
        assert!(model_holds(&model, &e, 1.0));
        let values = assignment_from_embedding(&e, 1.0);
        assert_eq!(model.objective_value(&values), (g.n() * (g.n() - 1) / 2) as f64);
    }
}
