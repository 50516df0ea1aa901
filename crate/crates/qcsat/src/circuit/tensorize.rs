//! Circuit-to-tensor-network mapping.
//!
//! Every vertex becomes one index set (its incident edge labels) and one
//! tensor. The sign conventions are pinned jointly so the full contraction
//! telescopes to the acceptance probability:
//!
//! * input rho:  entry at |a><b| is `rho[a, b]` (that is `tr(rho sigma')`),
//! * gate Q:     entry is `tr(Q(tensor of input units) (tensor of output
//!   units)')`, which reduces to `sum_m K_m[c,a] conj(K_m[e,b])`,
//! * output M:   entry at |b1><b2| is `tr(M |b1><b2|) = M[b2, b1]`.
//!
//! An identity-circuit oracle test guards these conventions.

use num_complex::Complex64;

use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};
use crate::network::{AbstractNetwork, IndexSet};
use crate::tensor::{Tensor, TensorSet};

use super::{validate_circuit, Gate, QuantumCircuit, VertexKind};

use crate::tensor::entry_budget as entry_count;

/// Density operator as a tensor: `labels` name the qudits in operator
/// order. Requires a PSD, trace-one matrix.
pub fn density_tensor(rho: &CMatrix, labels: &[u32], d: usize) -> Result<Tensor> {
    let dim = d.pow(labels.len() as u32);
    if rho.rows != dim || rho.cols != dim {
        return Err(Error::validation(format!(
            "density matrix must be {dim} x {dim} for {} qudits",
            labels.len()
        )));
    }
    if !rho.is_psd(1e-9) {
        return Err(Error::validation("density matrix is not positive semidefinite"));
    }
    if (rho.trace() - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::validation("density matrix must have trace 1"));
    }
    let indices = IndexSet::new(labels.to_vec())?;
    let total = entry_count(d, labels.len())?;
    // Position of each sorted index among the operator's qudits.
    let qudit_of: Vec<usize> = indices
        .iter()
        .map(|i| labels.iter().position(|&l| l == i).unwrap())
        .collect();
    let dd = d * d;
    let k = labels.len();
    let mut entries = Vec::with_capacity(total);
    for off in 0..total {
        let mut rem = off;
        let mut codes = vec![0usize; k];
        for a in (0..k).rev() {
            codes[a] = rem % dd;
            rem /= dd;
        }
        let mut row = 0usize;
        let mut col = 0usize;
        let mut digit = vec![(0usize, 0usize); k];
        for (axis, &code) in codes.iter().enumerate() {
            digit[qudit_of[axis]] = (code / d, code % d);
        }
        for &(a, b) in &digit {
            row = row * d + a;
            col = col * d + b;
        }
        entries.push(rho.get(row, col));
    }
    Tensor::new(d, indices, entries)
}

/// Quantum gate as a tensor over the disjoint union of its input and
/// output edge labels (given in port order).
pub fn gate_tensor(g: &Gate, d: usize, in_labels: &[u32], out_labels: &[u32]) -> Result<Tensor> {
    if in_labels.len() != g.inputs || out_labels.len() != g.outputs {
        return Err(Error::validation(format!(
            "gate {:?} has arity {} -> {}, got {} input and {} output labels",
            g.name,
            g.inputs,
            g.outputs,
            in_labels.len(),
            out_labels.len()
        )));
    }
    if in_labels.iter().any(|l| out_labels.contains(l)) {
        return Err(Error::validation(format!(
            "gate {:?}: input and output labels must be disjoint",
            g.name
        )));
    }
    let all: Vec<u32> = in_labels.iter().chain(out_labels).copied().collect();
    let indices = IndexSet::new(all)?;
    let k = indices.len();
    let total = entry_count(d, k)?;
    // For each sorted axis: is it an input port, and which one?
    enum Port {
        In(usize),
        Out(usize),
    }
    let ports: Vec<Port> = indices
        .iter()
        .map(|i| {
            if let Some(p) = in_labels.iter().position(|&l| l == i) {
                Port::In(p)
            } else {
                Port::Out(out_labels.iter().position(|&l| l == i).unwrap())
            }
        })
        .collect();
    let dd = d * d;
    let q = g.inputs;
    let r = g.outputs;
    let mut entries = Vec::with_capacity(total);
    let mut codes = vec![0usize; k];
    for off in 0..total {
        let mut rem = off;
        for a in (0..k).rev() {
            codes[a] = rem % dd;
            rem /= dd;
        }
        let mut in_digits = vec![(0usize, 0usize); q];
        let mut out_digits = vec![(0usize, 0usize); r];
        for (axis, &code) in codes.iter().enumerate() {
            match ports[axis] {
                Port::In(p) => in_digits[p] = (code / d, code % d),
                Port::Out(p) => out_digits[p] = (code / d, code % d),
            }
        }
        let (mut a, mut b) = (0usize, 0usize);
        for &(x, y) in &in_digits {
            a = a * d + x;
            b = b * d + y;
        }
        let (mut cc, mut e) = (0usize, 0usize);
        for &(x, y) in &out_digits {
            cc = cc * d + x;
            e = e * d + y;
        }
        let mut sum = Complex64::default();
        for km in &g.kraus {
            sum += km.get(cc, a) * km.get(e, b).conj();
        }
        entries.push(sum);
    }
    Tensor::new(d, indices, entries)
}

/// One-qudit measurement element as a rank-1 tensor: entry at |b1><b2| is
/// `theta[b2, b1]`.
pub fn measurement_tensor(theta: &CMatrix, label: u32, d: usize) -> Result<Tensor> {
    if theta.rows != d || theta.cols != d {
        return Err(Error::validation("measurement element must be d x d"));
    }
    let indices = IndexSet::new(vec![label])?;
    let mut entries = Vec::with_capacity(d * d);
    for code in 0..d * d {
        let (b1, b2) = (code / d, code % d);
        entries.push(theta.get(b2, b1));
    }
    Tensor::new(d, indices, entries)
}

fn vertex_index_set(c: &QuantumCircuit, v: usize) -> Result<IndexSet> {
    let labels: Vec<u32> = c
        .edges
        .iter()
        .filter(|e| e.from.0 == v || e.to.0 == v)
        .map(|e| e.label)
        .collect();
    IndexSet::new(labels)
}

fn basis_density(d: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m.set(b, b, Complex64::new(1.0, 0.0));
    m
}

fn vertex_tensor(c: &QuantumCircuit, v: usize) -> Result<Tensor> {
    match &c.vertices[v] {
        VertexKind::Input { init } => {
            let b = init.ok_or_else(|| {
                Error::validation(format!(
                    "vertex {v} is an uninitialized input; build the feasibility network instead"
                ))
            })?;
            let label = c.out_edges(v)[0].label;
            density_tensor(&basis_density(c.d, b), &[label], c.d)
        }
        VertexKind::Gate { gate } => {
            let g = c.gate(gate).expect("validated circuit");
            let ins: Vec<u32> = c.in_edges(v).iter().map(|e| e.label).collect();
            let outs: Vec<u32> = c.out_edges(v).iter().map(|e| e.label).collect();
            gate_tensor(g, c.d, &ins, &outs)
        }
        VertexKind::Output { measurement } => {
            let label = c.in_edges(v)[0].label;
            measurement_tensor(measurement, label, c.d)
        }
    }
}

/// Tensor network of a fully initialized circuit: one index set and one
/// tensor per vertex, in vertex order (network position == vertex id).
pub fn to_tensor_network(c: &QuantumCircuit) -> Result<(AbstractNetwork, Vec<Tensor>)> {
    validate_circuit(c)?;
    let sets: Result<Vec<IndexSet>> = (0..c.vertices.len())
        .map(|v| vertex_index_set(c, v))
        .collect();
    let network = AbstractNetwork::new(sets?)?;
    let tensors: Result<Vec<Tensor>> =
        (0..c.vertices.len()).map(|v| vertex_tensor(c, v)).collect();
    Ok((network, tensors?))
}

/// Feasibility tensor network of a circuit: uninitialized inputs map to the
/// d-element set of basis densities (member k is |k><k|), everything else
/// to singletons.
#[derive(Debug, Clone)]
pub struct FeasibilityNet {
    pub network: AbstractNetwork,
    pub sets: Vec<TensorSet>,
    /// Vertex ids (== network positions) of the uninitialized inputs, in
    /// the digit order of assignment strings.
    pub open_positions: Vec<usize>,
}

pub fn to_feasibility_network(c: &QuantumCircuit) -> Result<FeasibilityNet> {
    validate_circuit(c)?;
    let sets: Result<Vec<IndexSet>> = (0..c.vertices.len())
        .map(|v| vertex_index_set(c, v))
        .collect();
    let network = AbstractNetwork::new(sets?)?;
    let mut tensor_sets = Vec::with_capacity(c.vertices.len());
    for v in 0..c.vertices.len() {
        let set = match &c.vertices[v] {
            VertexKind::Input { init: None } => {
                let label = c.out_edges(v)[0].label;
                let members: Result<Vec<Tensor>> = (0..c.d)
                    .map(|b| density_tensor(&basis_density(c.d, b), &[label], c.d))
                    .collect();
                TensorSet::from_tensors(c.d, network.set(v).clone(), members?)?
            }
            _ => TensorSet::from_tensors(
                c.d,
                network.set(v).clone(),
                vec![vertex_tensor(c, v)?],
            )?,
        };
        tensor_sets.push(set);
    }
    Ok(FeasibilityNet {
        network,
        sets: tensor_sets,
        open_positions: c.open_inputs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gatelib, CEdge};
    use crate::tensor::{contract, distance};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_of_basis_states() {
        let t = density_tensor(&basis_density(2, 0), &[1], 2).unwrap();
        assert_eq!(
            t.entries(),
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]
        );
        let mut mixed = CMatrix::identity(2);
        mixed.scale(c64(0.5, 0.0));
        let t = density_tensor(&mixed, &[1], 2).unwrap();
        assert_eq!(
            t.entries(),
            &[c64(0.5, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.5, 0.0)]
        );
    }

    #[test]
    fn density_of_plus_state() {
        let plus = CMatrix::from_rows(vec![
            vec![c64(0.5, 0.0), c64(0.5, 0.0)],
            vec![c64(0.5, 0.0), c64(0.5, 0.0)],
        ])
        .unwrap();
        let t = density_tensor(&plus, &[3], 2).unwrap();
        assert!(t.entries().iter().all(|&z| (z - c64(0.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn density_rejects_non_psd() {
        let m = CMatrix::from_rows(vec![
            vec![c64(1.5, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(-0.5, 0.0)],
        ])
        .unwrap();
        assert!(density_tensor(&m, &[1], 2).is_err());
    }

    #[test]
    fn identity_gate_tensor_is_kronecker_pairing() {
        let g = gatelib::identity_gate(2);
        let t = gate_tensor(&g, 2, &[1], &[2]).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((t.entry(&[a, b]) - c64(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn x_gate_tensor_permutes_identity_entries() {
        let g = gatelib::shift_gate(2);
        let t = gate_tensor(&g, 2, &[1], &[2]).unwrap();
        // |a><b| maps to |1-a><1-b|: code 0 <-> 3, code 1 <-> 2.
        let flip = [3usize, 2, 1, 0];
        for (a, &fa) in flip.iter().enumerate() {
            for b in 0..4 {
                let expect = if b == fa { 1.0 } else { 0.0 };
                assert!((t.entry(&[a, b]) - c64(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn coin_gate_tensor_structure() {
        let g = gatelib::coin_gate(2);
        let t = gate_tensor(&g, 2, &[1], &[2]).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let diag_in = a == 0 || a == 3;
                let diag_out = b == 0 || b == 3;
                let expect = if diag_in && diag_out { 0.5 } else { 0.0 };
                assert!(
                    (t.entry(&[a, b]) - c64(expect, 0.0)).norm() < 1e-15,
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn identity_gate_relabels_contracted_tensor() {
        let g = gatelib::identity_gate(2);
        let id = gate_tensor(&g, 2, &[5], &[9]).unwrap();
        let probe = Tensor::new(
            2,
            IndexSet::new(vec![5]).unwrap(),
            vec![c64(0.1, 0.2), c64(0.3, -0.4), c64(0.5, 0.6), c64(-0.7, 0.8)],
        )
        .unwrap();
        let moved = contract(&probe, &id).unwrap();
        let expect = Tensor::new(2, IndexSet::new(vec![9]).unwrap(), probe.entries().to_vec())
            .unwrap();
        assert!(distance(&moved, &expect).unwrap() < 1e-15);
    }

    fn chain_circuit(gate: Option<Gate>, init: usize, measure_basis: usize) -> QuantumCircuit {
        match gate {
            None => QuantumCircuit {
                d: 2,
                gates: vec![],
                vertices: vec![
                    VertexKind::Input { init: Some(init) },
                    VertexKind::Output {
                        measurement: gatelib::basis_projector(2, measure_basis),
                    },
                ],
                edges: vec![CEdge {
                    label: 1,
                    from: (0, 0),
                    to: (1, 0),
                }],
            },
            Some(g) => QuantumCircuit {
                d: 2,
                gates: vec![g.clone()],
                vertices: vec![
                    VertexKind::Input { init: Some(init) },
                    VertexKind::Gate {
                        gate: g.name.clone(),
                    },
                    VertexKind::Output {
                        measurement: gatelib::basis_projector(2, measure_basis),
                    },
                ],
                edges: vec![
                    CEdge {
                        label: 1,
                        from: (0, 0),
                        to: (1, 0),
                    },
                    CEdge {
                        label: 2,
                        from: (1, 0),
                        to: (2, 0),
                    },
                ],
            },
        }
    }

    fn contract_all(tensors: Vec<Tensor>) -> Complex64 {
        let mut acc = tensors[0].clone();
        for t in &tensors[1..] {
            acc = contract(&acc, t).unwrap();
        }
        acc.scalar_value().unwrap()
    }

    #[test]
    fn tensor_network_values_match_hand_computation() {
        // |0><0| measured in |0><0|: probability 1.
        let (n, tensors) = to_tensor_network(&chain_circuit(None, 0, 0)).unwrap();
        n.validate().unwrap();
        assert!((contract_all(tensors) - c64(1.0, 0.0)).norm() < 1e-12);

        // |0><0| through X measured in |1><1|: probability 1.
        let (_, tensors) =
            to_tensor_network(&chain_circuit(Some(gatelib::shift_gate(2)), 0, 1)).unwrap();
        assert!((contract_all(tensors) - c64(1.0, 0.0)).norm() < 1e-12);

        // |0><0| through H measured in |1><1|: probability 0.5.
        let (_, tensors) =
            to_tensor_network(&chain_circuit(Some(gatelib::fourier_gate(2)), 0, 1)).unwrap();
        assert!((contract_all(tensors) - c64(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn tensor_network_rejects_open_inputs() {
        let mut c = chain_circuit(None, 0, 1);
        c.vertices[0] = VertexKind::Input { init: None };
        let err = to_tensor_network(&c).unwrap_err();
        assert!(err.to_string().contains("feasibility"), "{err}");
    }

    #[test]
    fn feasibility_network_set_sizes() {
        // Two open inputs through a CX gate: exactly two 2-element sets.
        let cx = gatelib::cshift_gate(2);
        let c = QuantumCircuit {
            d: 2,
            gates: vec![cx.clone()],
            vertices: vec![
                VertexKind::Input { init: None },
                VertexKind::Input { init: None },
                VertexKind::Gate {
                    gate: cx.name.clone(),
                },
                VertexKind::Output {
                    measurement: gatelib::basis_projector(2, 1),
                },
                VertexKind::Output {
                    measurement: gatelib::basis_projector(2, 1),
                },
            ],
            edges: vec![
                CEdge {
                    label: 1,
                    from: (0, 0),
                    to: (2, 0),
                },
                CEdge {
                    label: 2,
                    from: (1, 0),
                    to: (2, 1),
                },
                CEdge {
                    label: 3,
                    from: (2, 0),
                    to: (3, 0),
                },
                CEdge {
                    label: 4,
                    from: (2, 1),
                    to: (4, 0),
                },
            ],
        };
        let f = to_feasibility_network(&c).unwrap();
        let sizes: Vec<usize> = f.sets.iter().map(|s| s.len()).collect();
        assert_eq!(sizes, vec![2, 2, 1, 1, 1]);
        assert_eq!(f.open_positions, vec![0, 1]);

        // Fully initialized circuit: all singletons.
        let c2 = chain_circuit(None, 0, 0);
        let f2 = to_feasibility_network(&c2).unwrap();
        assert!(f2.sets.iter().all(|s| s.len() == 1));
        assert!(f2.open_positions.is_empty());
    }
}
