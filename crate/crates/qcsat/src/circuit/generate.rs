//! Benchmark circuit generators.
//!
//! The 3-SAT verifier streams the witness bits past a uniformly random
//! clause selector: a preparation channel emits the exact uniform mixture
//! over the m clause indices on ceil(log2 m) selector wires, and one
//! permutation gate per variable folds "the selected clause is satisfied so
//! far" into a flag wire (fresh ancilla each step, old wires leave as
//! garbage into identity measurements). A satisfiable formula is accepted
//! with probability exactly 1; an unsatisfiable one with probability at
//! most 1 - 1/m. With amplification q, q independent copies (each with its
//! own witness block) feed an adder chain and a strict-majority comparator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};

use super::{gatelib, validate_circuit, CEdge, Gate, QuantumCircuit, VertexKind};

/// 3-CNF formula; literals are nonzero integers, `+v`/`-v` for variable v
/// (1-based). Repeated literals inside a clause are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub n_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn validate(&self) -> Result<()> {
        if self.n_vars == 0 {
            return Err(Error::validation("formula needs at least one variable"));
        }
        if self.clauses.is_empty() {
            return Err(Error::validation("formula needs at least one clause"));
        }
        for (i, clause) in self.clauses.iter().enumerate() {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > self.n_vars {
                    return Err(Error::validation(format!(
                        "clause {i}: literal {lit} out of range"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let v = lit.unsigned_abs() as usize - 1;
                (lit > 0) == assignment[v]
            })
        })
    }

    /// DIMACS text: `p cnf <vars> <clauses>` then zero-terminated clauses.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n_vars, self.clauses.len());
        for clause in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", clause[0], clause[1], clause[2]));
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut n_vars = None;
        let mut clauses = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("p cnf") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(Error::validation("bad DIMACS problem line"));
                }
                n_vars = Some(
                    f[0].parse()
                        .map_err(|_| Error::validation("bad variable count"))?,
                );
                continue;
            }
            let lits: Result<Vec<i32>> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i32>()
                        .map_err(|_| Error::validation(format!("bad literal {t:?}")))
                })
                .collect();
            let lits = lits?;
            if lits.last() != Some(&0) || lits.len() != 4 {
                return Err(Error::validation(
                    "clauses must hold exactly three literals and end with 0",
                ));
            }
            clauses.push([lits[0], lits[1], lits[2]]);
        }
        let formula = CnfFormula {
            n_vars: n_vars.ok_or_else(|| Error::validation("missing problem line"))?,
            clauses,
        };
        formula.validate()?;
        Ok(formula)
    }
}

/// Random 3-CNF; with `plant` a hidden satisfying assignment is chosen and
/// every clause is patched to contain at least one literal it satisfies.
pub fn random_3cnf(n_vars: usize, n_clauses: usize, seed: u64, plant: bool) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<bool> = (0..n_vars).map(|_| rng.gen()).collect();
    let mut clauses = Vec::with_capacity(n_clauses);
    for _ in 0..n_clauses {
        let mut clause = [0i32; 3];
        for lit in clause.iter_mut() {
            let v = rng.gen_range(1..=n_vars) as i32;
            *lit = if rng.gen() { v } else { -v };
        }
        if plant {
            let satisfied = clause.iter().any(|&lit| {
                let v = lit.unsigned_abs() as usize - 1;
                (lit > 0) == hidden[v]
            });
            if !satisfied {
                let slot = rng.gen_range(0..3);
                let v = clause[slot].unsigned_abs() as i32;
                clause[slot] = if hidden[v as usize - 1] { v } else { -v };
            }
        }
        clauses.push(clause);
    }
    CnfFormula { n_vars, clauses }
}

/// Incremental circuit builder tracking live wires as (vertex, port) pairs.
struct Builder {
    d: usize,
    gates: Vec<Gate>,
    vertices: Vec<VertexKind>,
    edges: Vec<CEdge>,
    next_label: u32,
}

#[derive(Debug, Clone, Copy)]
struct Wire {
    vertex: usize,
    port: usize,
}

impl Builder {
    fn new(d: usize) -> Self {
        Builder {
            d,
            gates: Vec::new(),
            vertices: Vec::new(),
            edges: Vec::new(),
            next_label: 1,
        }
    }

    fn ensure_gate(&mut self, gate: Gate) {
        if !self.gates.iter().any(|g| g.name == gate.name) {
            self.gates.push(gate);
        }
    }

    fn add_input(&mut self, init: Option<usize>) -> Wire {
        self.vertices.push(VertexKind::Input { init });
        Wire {
            vertex: self.vertices.len() - 1,
            port: 0,
        }
    }

    fn add_gate(&mut self, name: &str, inputs: &[Wire]) -> Vec<Wire> {
        let outputs = self
            .gates
            .iter()
            .find(|g| g.name == name)
            .expect("gate registered before use")
            .outputs;
        self.vertices.push(VertexKind::Gate {
            gate: name.to_string(),
        });
        let v = self.vertices.len() - 1;
        for (port, w) in inputs.iter().enumerate() {
            self.edges.push(CEdge {
                label: self.next_label,
                from: (w.vertex, w.port),
                to: (v, port),
            });
            self.next_label += 1;
        }
        (0..outputs).map(|port| Wire { vertex: v, port }).collect()
    }

    fn add_output(&mut self, wire: Wire, measurement: CMatrix) {
        self.vertices.push(VertexKind::Output { measurement });
        let v = self.vertices.len() - 1;
        self.edges.push(CEdge {
            label: self.next_label,
            from: (wire.vertex, wire.port),
            to: (v, 0),
        });
        self.next_label += 1;
    }

    fn finish(self) -> QuantumCircuit {
        QuantumCircuit {
            d: self.d,
            gates: self.gates,
            vertices: self.vertices,
            edges: self.edges,
        }
    }
}

fn bit(z: usize, width: usize, i: usize) -> usize {
    (z >> (width - 1 - i)) & 1
}

/// Preparation channel: consumes one |0> ancilla and emits the uniform
/// mixture over the first `m` basis states of `c_sel` wires.
fn uniform_selector_gate(m: usize, c_sel: usize) -> Gate {
    let dim = 1 << c_sel;
    let s = 1.0 / (m as f64).sqrt();
    let kraus = (0..m)
        .map(|v| {
            let mut k = CMatrix::zeros(dim, 2);
            k.set(v, 0, Complex64::new(s, 0.0));
            k
        })
        .collect();
    Gate {
        name: format!("prep{m}"),
        inputs: 1,
        outputs: c_sel,
        kraus,
    }
}

/// Probabilistic 3-SAT verifier as a mixed-state circuit, with optional
/// majority-vote amplification (`amplify = 0` disables it).
pub fn gen_3sat_verifier(
    formula: &CnfFormula,
    amplify: usize,
    _seed: u64,
) -> Result<QuantumCircuit> {
    formula.validate()?;
    let n = formula.n_vars;
    let m = formula.clauses.len();
    let c_sel = if m > 1 {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    } else {
        0
    };
    let copies = amplify.max(1);
    let c2 = if amplify >= 1 {
        (usize::BITS - amplify.leading_zeros()) as usize
    } else {
        0
    };
    // Satisfaction contribution of variable j under selector value v.
    let h = |v: usize, j: usize, x: usize| -> bool {
        if v >= m {
            return false;
        }
        formula.clauses[v].iter().any(|&lit| {
            lit.unsigned_abs() as usize == j + 1 && (lit > 0) == (x == 1)
        })
    };

    let mut b = Builder::new(2);
    // Step gates are shared across copies.
    for j in 0..n {
        let gate = if j == 0 {
            // Wires [selector, x, anc]; anc ^= h.
            let w = c_sel + 2;
            let perm: Vec<usize> = (0..1usize << w)
                .map(|z| {
                    let v = z >> 2;
                    let x = bit(z, w, c_sel);
                    let flip = h(v, 0, x) as usize;
                    z ^ flip
                })
                .collect();
            gatelib::permutation(&format!("step{j}"), 2, w, &perm)
        } else {
            // Wires [selector, x, flag, anc]; anc ^= flag | h.
            let w = c_sel + 3;
            let perm: Vec<usize> = (0..1usize << w)
                .map(|z| {
                    let v = z >> 3;
                    let x = bit(z, w, c_sel);
                    let flag = bit(z, w, c_sel + 1);
                    let flip = (flag == 1 || h(v, j, x)) as usize;
                    z ^ flip
                })
                .collect();
            gatelib::permutation(&format!("step{j}"), 2, w, &perm)
        };
        b.ensure_gate(gate);
    }
    if c_sel > 0 {
        b.ensure_gate(uniform_selector_gate(m, c_sel));
    }
    if amplify >= 1 {
        // Adder: wires [flag, counter]; counter += flag.
        let w = 1 + c2;
        let perm: Vec<usize> = (0..1usize << w)
            .map(|z| {
                let flag = bit(z, w, 0);
                let k = z & ((1 << c2) - 1);
                (flag << c2) | ((k + flag) & ((1 << c2) - 1))
            })
            .collect();
        b.ensure_gate(gatelib::permutation("add", 2, w, &perm));
        // Comparator: wires [counter, anc]; anc ^= (count >= floor(q/2)+1).
        let threshold = amplify / 2 + 1;
        let w = c2 + 1;
        let perm: Vec<usize> = (0..1usize << w)
            .map(|z| {
                let k = z >> 1;
                z ^ ((k >= threshold) as usize)
            })
            .collect();
        b.ensure_gate(gatelib::permutation("comp", 2, w, &perm));
    }

    let identity_measure = CMatrix::identity(2);
    let accept_measure = gatelib::basis_projector(2, 1);
    let mut counter: Vec<Wire> = Vec::new();
    for copy in 0..copies {
        let mut selector: Vec<Wire> = if c_sel > 0 {
            let anc = b.add_input(Some(0));
            b.add_gate(&format!("prep{m}"), &[anc])
        } else {
            Vec::new()
        };
        let mut flag: Option<Wire> = None;
        for j in 0..n {
            let x = b.add_input(None);
            let anc = b.add_input(Some(0));
            let mut ins = selector.clone();
            ins.push(x);
            if let Some(f) = flag {
                ins.push(f);
            }
            ins.push(anc);
            let outs = b.add_gate(&format!("step{j}"), &ins);
            selector = outs[..c_sel].to_vec();
            b.add_output(outs[c_sel], identity_measure.clone());
            if j > 0 {
                b.add_output(outs[c_sel + 1], identity_measure.clone());
            }
            flag = Some(*outs.last().unwrap());
        }
        for w in selector {
            b.add_output(w, identity_measure.clone());
        }
        let flag = flag.expect("n >= 1");
        if amplify == 0 {
            b.add_output(flag, accept_measure.clone());
        } else {
            if copy == 0 {
                counter = (0..c2).map(|_| b.add_input(Some(0))).collect();
            }
            let mut ins = vec![flag];
            ins.extend_from_slice(&counter);
            let outs = b.add_gate("add", &ins);
            b.add_output(outs[0], identity_measure.clone());
            counter = outs[1..].to_vec();
        }
    }
    if amplify >= 1 {
        let anc = b.add_input(Some(0));
        let mut ins = counter.clone();
        ins.push(anc);
        let outs = b.add_gate("comp", &ins);
        for &w in &outs[..c2] {
            b.add_output(w, identity_measure.clone());
        }
        b.add_output(outs[c2], accept_measure);
    }
    let circuit = b.finish();
    validate_circuit(&circuit)?;
    Ok(circuit)
}

/// Wiring patterns for the random circuit generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Path,
    Tree,
    Ladder,
}

impl std::str::FromStr for Structure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Structure::Path),
            "tree" => Ok(Structure::Tree),
            "ladder" => Ok(Structure::Ladder),
            other => Err(Error::validation(format!(
                "unknown structure {other:?} (expected path, tree or ladder)"
            ))),
        }
    }
}

fn wire_pair_sequence(structure: Structure, n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    match structure {
        Structure::Path => (0..n - 1).map(|i| (i, i + 1)).collect(),
        Structure::Ladder => {
            let mut seq: Vec<(usize, usize)> = (0..n - 1).step_by(2).map(|i| (i, i + 1)).collect();
            seq.extend((1..n - 1).step_by(2).map(|i| (i, i + 1)));
            seq
        }
        Structure::Tree => {
            let mut seq = Vec::new();
            let mut span = 1;
            while span < n {
                let mut i = 0;
                while i + span < n {
                    seq.push((i, i + span));
                    i += 2 * span;
                }
                span *= 2;
            }
            seq
        }
    }
}

/// Random connected circuit with bounded-treewidth wiring by construction.
/// Gates preserve wire count, so the live width never exceeds `n_inputs`.
/// The first `open_inputs` inputs are left uninitialized.
pub fn gen_random_circuit(
    n_inputs: usize,
    n_gates: usize,
    structure: Structure,
    d: usize,
    seed: u64,
    open_inputs: usize,
) -> Result<QuantumCircuit> {
    if n_inputs == 0 {
        return Err(Error::validation("need at least one input"));
    }
    if d < 2 {
        return Err(Error::validation("d must be at least 2"));
    }
    if open_inputs > n_inputs {
        return Err(Error::validation(
            "cannot leave more inputs open than exist",
        ));
    }
    if n_inputs > 1 && n_gates == 0 {
        return Err(Error::validation(
            "multiple inputs need at least one gate to stay connected",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new(d);
    let single_pool: Vec<Gate> = {
        let mut pool = vec![
            gatelib::fourier_gate(d),
            gatelib::shift_gate(d),
            gatelib::clock_gate(d),
            gatelib::coin_gate(d),
            gatelib::filter_gate(d),
        ];
        if d == 2 {
            pool.push(gatelib::amplitude_damp_gate(0.25));
        }
        pool
    };
    let pair_pool = vec![
        gatelib::cshift_gate(d),
        gatelib::cz_gate(d),
        gatelib::swap_gate(d),
    ];
    for g in single_pool.iter().chain(&pair_pool) {
        b.ensure_gate(g.clone());
    }
    let mut wires: Vec<Wire> = (0..n_inputs)
        .map(|i| {
            let init = if i < open_inputs {
                None
            } else {
                Some(rng.gen_range(0..d))
            };
            b.add_input(init)
        })
        .collect();
    let pairs = wire_pair_sequence(structure, n_inputs);
    // A connected circuit needs every adjacent wire pair joined at least
    // once, so the first pass walks the whole pattern before randomness
    // kicks in.
    for k in 0..n_gates {
        let two_wire = n_inputs > 1 && (k < pairs.len() || rng.gen::<f64>() < 0.7);
        if two_wire {
            let (a, bq) = pairs[k % pairs.len()];
            let name = pair_pool[rng.gen_range(0..pair_pool.len())].name.clone();
            let outs = b.add_gate(&name, &[wires[a], wires[bq]]);
            wires[a] = outs[0];
            wires[bq] = outs[1];
        } else {
            let w = rng.gen_range(0..n_inputs);
            // Filters and dampers are rarer than the unitary gates.
            let name = loop {
                let cand = &single_pool[rng.gen_range(0..single_pool.len())];
                if (cand.name == "filter" || cand.name == "damp") && rng.gen::<f64>() < 0.7 {
                    continue;
                }
                break cand.name.clone();
            };
            let outs = b.add_gate(&name, &[wires[w]]);
            wires[w] = outs[0];
        }
    }
    for &w in &wires {
        let measurement = if rng.gen::<f64>() < 0.2 {
            CMatrix::identity(d)
        } else {
            gatelib::basis_projector(d, rng.gen_range(0..d))
        };
        b.add_output(w, measurement);
    }
    let circuit = b.finish();
    // Too few gates to touch every adjacent pair leaves the circuit
    // disconnected; validation reports that as an infeasible request.
    validate_circuit(&circuit)?;
    Ok(circuit)
}
