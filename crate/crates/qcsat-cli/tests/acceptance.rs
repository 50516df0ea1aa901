//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers (visible with `--nocapture`).

use std::process::Command;

use qcsat::circuit::{
    gen_3sat_verifier, gen_random_circuit, random_3cnf, to_feasibility_network, CnfFormula,
    Structure,
};
use qcsat::exactsim::{acceptance_probability, simulate};
use qcsat::graphs::contractify;
use qcsat::network::{build_good_contraction_tree, validate_contraction_tree};
use qcsat::oracle::{brute_force_max, dm_simulate, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP};
use qcsat::satsolve::{
    epsilon_simulate, error_growth, solve_classical_assignment, SolveConfig,
    DEFAULT_MAX_SET_SIZE,
};
use qcsat::tensor::{contract, distance, NetParams, Tensor, TensorSet};
use qcsat::testutil::{
    network_of_graph, random_bounded_tensor, random_carving, random_connected_graph,
};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STRUCTURES: [Structure; 3] = [Structure::Path, Structure::Tree, Structure::Ladder];

fn random_initialized_circuit(
    rng: &mut ChaCha8Rng,
    max_qubits: usize,
    max_gates: usize,
    open: usize,
    seed: u64,
) -> qcsat::circuit::QuantumCircuit {
    let n = rng.gen_range(open.max(1)..=max_qubits);
    let min_gates = if n > 1 { n - 1 } else { 1 };
    let gates = rng.gen_range(min_gates..=max_gates.max(min_gates));
    let structure = STRUCTURES[rng.gen_range(0..3)];
    gen_random_circuit(n, gates, structure, 2, seed, open).unwrap()
}

/// Criterion 1: tensor-path value equals the density-matrix oracle within
/// 1e-9 on 200 random initialized circuits (<= 6 qubits, <= 12 gates, d=2).
#[test]
fn criterion_1_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut worst: f64 = 0.0;
    for trial in 0..200u64 {
        let c = random_initialized_circuit(&mut rng, 6, 12, 0, 10_000 + trial);
        let tensor = acceptance_probability(&c).unwrap();
        let oracle = dm_simulate(&c, &[], DEFAULT_WIRE_CAP).unwrap();
        let err = (tensor - oracle).abs();
        worst = worst.max(err);
        assert!(err <= 1e-9, "trial {trial}: |{tensor} - {oracle}| = {err}");
    }
    println!("[PASS] criterion 1: oracle equivalence on 200 circuits, worst gap {worst:.3e}");
}

/// Criterion 2: the solver's assignment is delta-optimal against the
/// brute-force optimum on 50 random circuits with <= 3 open inputs.
#[test]
fn criterion_2_satisfiability_correctness() {
    let delta = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut worst: f64 = 0.0;
    for trial in 0..50u64 {
        let open = 1 + (trial as usize) % 3;
        let c = random_initialized_circuit(&mut rng, 6, 12, open, 20_000 + trial);
        let report = solve_classical_assignment(&c, &SolveConfig::target_delta(delta)).unwrap();
        let (_, pr_cl) = brute_force_max(&c, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP).unwrap();
        let gap = (report.pr_exact - pr_cl).abs();
        worst = worst.max(gap);
        assert!(
            gap <= delta + 1e-12,
            "trial {trial}: |{} - {pr_cl}| = {gap} > {delta}",
            report.pr_exact
        );
        // The reported exact probability matches the oracle on the same y.
        let oracle = dm_simulate(&c, &report.y, DEFAULT_WIRE_CAP).unwrap();
        assert!(
            (report.pr_exact - oracle).abs() <= 1e-9,
            "trial {trial}: tensor/oracle disagree on the returned assignment"
        );
    }
    println!("[PASS] criterion 2: 50 solves within delta = {delta}, worst gap {worst:.3e}");
}

/// Criterion 3: contraction-tree rank equals the measured width of the
/// contractive carving on 100 random networks (<= 10 sets).
#[test]
fn criterion_3_rank_equals_carving_width() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    for trial in 0..100 {
        let g = random_connected_graph(2 + trial % 9, trial % 5, &mut rng);
        let network = network_of_graph(&g);
        let good = build_good_contraction_tree(&network, trial as u64).unwrap();
        validate_contraction_tree(&network, &good.tree).unwrap();
        assert_eq!(
            good.rank, good.carving_width,
            "trial {trial}: rank {} vs width {}",
            good.rank, good.carving_width
        );
    }
    println!("[PASS] criterion 3: rank == carving width on 100 networks");
}

/// Criterion 4: contractify output is contractive with width(out) <=
/// width(in) and height(out) <= width(in) * height(in), on 500 runs.
#[test]
fn criterion_4_contractify_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);
    let mut widest = 0usize;
    for trial in 0..500 {
        let n = 2 + trial % 11;
        let g = random_connected_graph(n, trial % 6, &mut rng);
        let carving = random_carving(&g, &mut rng);
        let out = contractify(&g, &carving).unwrap();
        assert!(out.is_contractive(), "trial {trial}: not contractive");
        assert!(
            out.width() <= carving.width(),
            "trial {trial}: width {} > {}",
            out.width(),
            carving.width()
        );
        assert!(
            out.height() <= carving.width() * carving.height().max(1),
            "trial {trial}: height {} > {} * {}",
            out.height(),
            carving.width(),
            carving.height()
        );
        widest = widest.max(carving.width());
    }
    println!("[PASS] criterion 4: 500 contractify runs within the width/height bounds (widest input {widest})");
}

/// Criterion 5: contraction error under eps-perturbations stays within
/// eps * 3 * d^(2 |shared|) on 1000 random pairs (rank <= 3, d = 2).
#[test]
fn criterion_5_contraction_error_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
    for trial in 0..1000usize {
        let shared_count = 1 + trial % 3;
        let shared: Vec<u32> = (1..=shared_count as u32).collect();
        let extra1 = trial % 2;
        let extra2 = (trial / 2) % 2;
        let i1: qcsat::network::IndexSet = shared
            .iter()
            .copied()
            .chain((0..extra1 as u32).map(|k| 10 + k))
            .collect();
        let i2: qcsat::network::IndexSet = shared
            .iter()
            .copied()
            .chain((0..extra2 as u32).map(|k| 20 + k))
            .collect();
        let eps = rng.gen::<f64>() * 0.4 + 1e-9;
        let g1 = random_bounded_tensor(2, i1.clone(), 1.0, &mut rng);
        let g2 = random_bounded_tensor(2, i2.clone(), 1.0, &mut rng);
        let perturb = |g: &Tensor, rng: &mut ChaCha8Rng| {
            let mut h = g.clone();
            for z in h.entries_mut() {
                let r = eps * rng.gen::<f64>();
                let a = rng.gen::<f64>() * std::f64::consts::TAU;
                *z += Complex64::from_polar(r, a);
            }
            h
        };
        let g1p = perturb(&g1, &mut rng);
        let g2p = perturb(&g2, &mut rng);
        let lhs =
            distance(&contract(&g1, &g2).unwrap(), &contract(&g1p, &g2p).unwrap()).unwrap();
        let bound = eps * 3.0 * 4f64.powi(shared_count as i32);
        assert!(lhs <= bound * (1.0 + 1e-12), "trial {trial}: {lhs} > {bound}");
    }
    println!("[PASS] criterion 5: 1000 perturbed contractions within the error bound");
}

/// Criterion 6: on exhaustively enumerable instances the DP root
/// approximates the true optimum within eps * (3 d^(2r) + 1)^h, and both
/// matching directions hold between root members and initializations.
#[test]
fn criterion_6_root_bound_and_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    let mut instances = 0;
    for trial in 0..20u64 {
        // Alternate circuit-derived and synthetic instances.
        let (network, sets) = if trial % 2 == 0 {
            let open = 1 + (trial as usize / 2) % 3;
            let c = random_initialized_circuit(&mut rng, 4, 8, open, 60_000 + trial);
            let feas = to_feasibility_network(&c).unwrap();
            (feas.network, feas.sets)
        } else {
            let g = random_connected_graph(3 + (trial as usize) % 3, trial as usize % 2, &mut rng);
            let network = network_of_graph(&g);
            let sets: Vec<TensorSet> = network
                .sets()
                .iter()
                .enumerate()
                .map(|(pos, s)| {
                    let members = if pos < 4 { 2 } else { 1 };
                    let bound = 0.4 / (4.0f64).powi(s.len() as i32);
                    let tensors = (0..members)
                        .map(|_| random_bounded_tensor(2, s.clone(), bound, &mut rng))
                        .collect();
                    TensorSet::from_tensors(2, s.clone(), tensors).unwrap()
                })
                .collect();
            (network, sets)
        };
        let total: usize = sets.iter().map(TensorSet::len).product();
        assert!(total <= 16, "instance must stay exhaustively enumerable");
        let good = build_good_contraction_tree(&network, trial).unwrap();
        // Exact scalar of every initialization.
        let mut scalars = Vec::with_capacity(total);
        for mut idx in 0..total {
            let assignment: Vec<Tensor> = sets
                .iter()
                .map(|s| {
                    let k = idx % s.len();
                    idx /= s.len();
                    s.members()[k].tensor.clone()
                })
                .collect();
            scalars.push(simulate(&network, &assignment, &good.tree).unwrap().scalar);
        }
        let val = scalars.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for eps in [1e-6, 1e-9] {
            let params = NetParams::new(eps).unwrap();
            let sim = epsilon_simulate(&network, &sets, &good.tree, &params, DEFAULT_MAX_SET_SIZE)
                .unwrap();
            let bound = eps * error_growth(2, good.rank, good.height);
            let root: Vec<Complex64> = sim.node_sets[sim.tree.root()]
                .members()
                .iter()
                .map(|m| m.tensor.scalar_value().unwrap())
                .collect();
            let alpha = root.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(
                (alpha - val).abs() <= bound,
                "trial {trial} eps {eps}: |alpha - VAL| = {} > {bound}",
                (alpha - val).abs()
            );
            // Direction (i): every initialization has a nearby root member.
            for (k, s) in scalars.iter().enumerate() {
                let nearest = root.iter().map(|g| (s - g).norm()).fold(f64::INFINITY, f64::min);
                assert!(
                    nearest <= bound,
                    "trial {trial} eps {eps}: initialization {k} is {nearest} from the root set"
                );
            }
            // Direction (ii): every root member has a nearby initialization.
            for (k, g) in root.iter().enumerate() {
                let nearest = scalars.iter().map(|s| (s - g).norm()).fold(f64::INFINITY, f64::min);
                assert!(
                    nearest <= bound,
                    "trial {trial} eps {eps}: root member {k} is {nearest} from every initialization"
                );
            }
        }
        instances += 1;
    }
    println!("[PASS] criterion 6: root bound and both matching directions on {instances} instances");
}

/// Criterion 7: verifier completeness and soundness through the oracle.
#[test]
fn criterion_7_verifier_completeness_soundness() {
    // Satisfiable formulas accept with probability exactly 1.
    for seed in 0..50u64 {
        let n = 1 + (seed as usize) % 4;
        let m = 1 + (seed as usize) % 6;
        let formula = random_3cnf(n, m, seed, true);
        let c = gen_3sat_verifier(&formula, 0, seed).unwrap();
        let (_, pr) = brute_force_max(&c, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP).unwrap();
        assert!(
            (pr - 1.0).abs() <= 1e-12,
            "seed {seed}: satisfiable formula has Pr^cl = {pr}"
        );
    }
    // The two-clause unsatisfiable fixture: exactly one clause holds under
    // either assignment, so Pr^cl = 1/2 <= 1 - 1/m.
    let toy = CnfFormula {
        n_vars: 1,
        clauses: vec![[1, 1, 1], [-1, -1, -1]],
    };
    let c = gen_3sat_verifier(&toy, 0, 0).unwrap();
    let (_, pr) = brute_force_max(&c, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP).unwrap();
    assert!((pr - 0.5).abs() <= 1e-12, "unsat toy: {pr}");
    assert!(pr <= 1.0 - 1.0 / 2.0 + 1e-12);
    // Majority amplification by 3 leaves the toy at 1/2.
    let amplified = gen_3sat_verifier(&toy, 3, 0).unwrap();
    let (_, pr3) = brute_force_max(&amplified, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP).unwrap();
    assert!((pr3 - 0.5).abs() <= 1e-12, "amplified toy: {pr3}");
    println!("[PASS] criterion 7: verifier completeness (50 formulas) and soundness fixtures");
}

/// Criterion 8: repeated satisfy runs with --threads 1 and --threads 8
/// produce byte-identical structured reports on 10 fixtures.
#[test]
fn criterion_8_report_determinism() {
    let bin = env!("CARGO_BIN_EXE_qcsat");
    let dir = tempfile::tempdir().unwrap();
    let mut fixtures: Vec<(std::path::PathBuf, Vec<String>)> = Vec::new();
    // Six random circuits with open inputs, via the CLI generator.
    for seed in 0..6u64 {
        let path = dir.path().join(format!("c{seed}.qc"));
        let structure = ["path", "tree", "ladder"][seed as usize % 3];
        let status = Command::new(bin)
            .args([
                "gen",
                "circuit",
                "--inputs",
                "4",
                "--gates",
                "7",
                "--structure",
                structure,
                "--open",
                &(1 + seed % 3).to_string(),
                "--seed",
                &seed.to_string(),
                "--out",
                path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        let mode = if seed % 2 == 0 {
            vec!["--delta".to_string(), "0.1".to_string()]
        } else {
            vec!["--epsilon".to_string(), "0.0001".to_string()]
        };
        fixtures.push((path, mode));
    }
    // Four single-clause verifiers.
    for seed in 0..4u64 {
        let path = dir.path().join(format!("v{seed}.qc"));
        let status = Command::new(bin)
            .args([
                "gen",
                "verifier",
                "--vars",
                "3",
                "--clauses",
                "1",
                "--satisfiable",
                "--seed",
                &seed.to_string(),
                "--out",
                path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        fixtures.push((path, vec!["--delta".to_string(), "0.2".to_string()]));
    }
    assert_eq!(fixtures.len(), 10);
    for (path, mode) in &fixtures {
        let run = |threads: &str| {
            let out = Command::new(bin)
                .arg("satisfy")
                .arg(path)
                .args(mode)
                .args(["--format", "records", "--threads", threads])
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "satisfy failed on {}: {}",
                path.display(),
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        };
        let single = run("1");
        let threaded = run("8");
        let repeat = run("1");
        assert_eq!(
            single,
            threaded,
            "thread count changed the report for {}",
            path.display()
        );
        assert_eq!(single, repeat, "rerun changed the report for {}", path.display());
    }
    println!("[PASS] criterion 8: byte-identical reports across --threads 1/8 on 10 fixtures");
}
