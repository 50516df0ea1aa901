//! Brute-force reference simulator.
//!
//! Works on the full density matrix over the live wires, sweeping the
//! circuit in topological order and folding measurement elements in as
//! soon as their wire terminates. No code is shared with the tensor
//! contraction path, so agreement between the two is evidence rather than
//! tautology.

use num_complex::Complex64;

use crate::circuit::{QuantumCircuit, VertexKind};
use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};
use crate::par;

/// Default cap on simultaneously live wires (d = 2 sizing).
pub const DEFAULT_WIRE_CAP: usize = 12;

/// Default cap on enumerated assignments in [`brute_force_max`].
pub const DEFAULT_ASSIGNMENT_CAP: usize = 4096;

/// Density matrix over an ordered list of live wires (edge labels).
struct DenseState {
    d: usize,
    wires: Vec<u32>,
    rho: Vec<Complex64>,
    wire_cap: usize,
}

impl DenseState {
    fn new(d: usize, wire_cap: usize) -> Self {
        DenseState {
            d,
            wires: Vec::new(),
            rho: vec![Complex64::new(1.0, 0.0)],
            wire_cap,
        }
    }

    fn dim(&self) -> usize {
        self.d.pow(self.wires.len() as u32)
    }

    /// Tensors a fresh single-qudit state onto the end of the wire list.
    fn add_wire(&mut self, label: u32, single: &CMatrix) -> Result<()> {
        if self.wires.len() + 1 > self.wire_cap {
            return Err(Error::resource(format!(
                "live wire count would exceed the cap of {}",
                self.wire_cap
            )));
        }
        let old_dim = self.dim();
        self.wires.push(label);
        let new_dim = old_dim * self.d;
        let mut rho = vec![Complex64::default(); new_dim * new_dim];
        for i in 0..old_dim {
            for j in 0..old_dim {
                let v = self.rho[i * old_dim + j];
                if v == Complex64::default() {
                    continue;
                }
                for a in 0..self.d {
                    for b in 0..self.d {
                        rho[(i * self.d + a) * new_dim + (j * self.d + b)] =
                            v * single.get(a, b);
                    }
                }
            }
        }
        self.rho = rho;
        Ok(())
    }

    fn wire_position(&self, label: u32) -> usize {
        self.wires
            .iter()
            .position(|&w| w == label)
            .expect("wire is live")
    }

    /// Reorders the wires so that `front` comes first (in the given order).
    fn pull_front(&mut self, front: &[u32]) {
        let mut order: Vec<usize> = front.iter().map(|&l| self.wire_position(l)).collect();
        for i in 0..self.wires.len() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        if order.iter().enumerate().all(|(a, &b)| a == b) {
            return;
        }
        let w = self.wires.len();
        let dim = self.dim();
        let mut stride = vec![1usize; w];
        for a in (0..w.saturating_sub(1)).rev() {
            stride[a] = stride[a + 1] * self.d;
        }
        let mut rho = vec![Complex64::default(); dim * dim];
        let mut digits_i = vec![0usize; w];
        let mut digits_j = vec![0usize; w];
        for i in 0..dim {
            let mut rem = i;
            for a in (0..w).rev() {
                digits_i[a] = rem % self.d;
                rem /= self.d;
            }
            let src_i: usize = (0..w).map(|a| digits_i[a] * stride[order[a]]).sum();
            for j in 0..dim {
                let mut rem = j;
                for a in (0..w).rev() {
                    digits_j[a] = rem % self.d;
                    rem /= self.d;
                }
                let src_j: usize = (0..w).map(|a| digits_j[a] * stride[order[a]]).sum();
                rho[i * dim + j] = self.rho[src_i * dim + src_j];
            }
        }
        self.rho = rho;
        self.wires = order.iter().map(|&p| self.wires[p]).collect();
    }

    /// Applies a Kraus map to the listed wires (in port order), replacing
    /// them by `out_labels`.
    fn apply_kraus(
        &mut self,
        kraus: &[CMatrix],
        in_labels: &[u32],
        out_labels: &[u32],
    ) -> Result<()> {
        let q = in_labels.len();
        let r = out_labels.len();
        if self.wires.len() - q + r > self.wire_cap {
            return Err(Error::resource(format!(
                "live wire count would exceed the cap of {}",
                self.wire_cap
            )));
        }
        self.pull_front(in_labels);
        let rest = self.dim() / self.d.pow(q as u32);
        let dq = self.d.pow(q as u32);
        let dr = self.d.pow(r as u32);
        let old_dim = dq * rest;
        let new_dim = dr * rest;
        let mut rho = vec![Complex64::default(); new_dim * new_dim];
        for k in kraus {
            // A = (K x I) rho (K x I)'.
            for i_out in 0..dr {
                for i_rest in 0..rest {
                    for j_out in 0..dr {
                        for j_rest in 0..rest {
                            let mut acc = Complex64::default();
                            for a in 0..dq {
                                let ka = k.get(i_out, a);
                                if ka == Complex64::default() {
                                    continue;
                                }
                                for bq in 0..dq {
                                    let kb = k.get(j_out, bq).conj();
                                    if kb == Complex64::default() {
                                        continue;
                                    }
                                    acc += ka
                                        * self.rho
                                            [(a * rest + i_rest) * old_dim + bq * rest + j_rest]
                                        * kb;
                                }
                            }
                            rho[(i_out * rest + i_rest) * new_dim + j_out * rest + j_rest] += acc;
                        }
                    }
                }
            }
        }
        self.rho = rho;
        let mut wires = out_labels.to_vec();
        wires.extend_from_slice(&self.wires[q..]);
        self.wires = wires;
        Ok(())
    }

    /// Folds a measurement element into the state and drops the wire:
    /// rho <- Tr_w[(theta (x) I) rho].
    fn fold_measurement(&mut self, label: u32, theta: &CMatrix) {
        self.pull_front(&[label]);
        let rest = self.dim() / self.d;
        let old_dim = self.dim();
        let mut rho = vec![Complex64::default(); rest * rest];
        for i in 0..rest {
            for j in 0..rest {
                let mut acc = Complex64::default();
                for a in 0..self.d {
                    for b in 0..self.d {
                        acc += theta.get(a, b) * self.rho[(b * rest + i) * old_dim + a * rest + j];
                    }
                }
                rho[i * rest + j] = acc;
            }
        }
        self.rho = rho;
        self.wires.remove(0);
    }
}

/// Acceptance probability of the circuit with its open inputs set to the
/// digit string `y` (ascending open-input vertex order), by direct
/// density-matrix evolution.
pub fn dm_simulate(c: &QuantumCircuit, y: &[usize], wire_cap: usize) -> Result<f64> {
    let c = c.initialized_with(y)?;
    crate::circuit::validate_circuit(&c)?;
    let order = c.topological_order()?;
    let mut state = DenseState::new(c.d, wire_cap);
    for v in order {
        match &c.vertices[v] {
            VertexKind::Input { init } => {
                let b = init.expect("initialized above");
                let mut single = CMatrix::zeros(c.d, c.d);
                single.set(b, b, Complex64::new(1.0, 0.0));
                state.add_wire(c.out_edges(v)[0].label, &single)?;
            }
            VertexKind::Gate { gate } => {
                let g = c.gate(gate).expect("validated circuit");
                let ins: Vec<u32> = c.in_edges(v).iter().map(|e| e.label).collect();
                let outs: Vec<u32> = c.out_edges(v).iter().map(|e| e.label).collect();
                state.apply_kraus(&g.kraus, &ins, &outs)?;
            }
            VertexKind::Output { measurement } => {
                state.fold_measurement(c.in_edges(v)[0].label, measurement);
            }
        }
    }
    debug_assert!(state.wires.is_empty());
    let p = state.rho[0];
    if p.im.abs() > 1e-9 {
        return Err(Error::invariant(format!(
            "acceptance probability has imaginary part {}",
            p.im
        )));
    }
    Ok(p.re)
}

/// Exhaustive maximization of the acceptance probability over classical
/// assignments. Ties break toward the lexicographically smallest string.
pub fn brute_force_max(
    c: &QuantumCircuit,
    assignment_cap: usize,
    wire_cap: usize,
) -> Result<(Vec<usize>, f64)> {
    let open = c.open_inputs();
    let total = (c.d as u128).pow(open.len() as u32);
    if total > assignment_cap as u128 {
        return Err(Error::resource(format!(
            "{total} assignments exceed the cap of {assignment_cap}"
        )));
    }
    let total = total as usize;
    let d = c.d;
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut y = vec![0usize; open.len()];
        for slot in (0..open.len()).rev() {
            y[slot] = idx % d;
            idx /= d;
        }
        y
    };
    // Ascending index order is lexicographic order of y, so minimizing
    // (-p, index) gives the highest probability with the smallest string.
    let scored: Vec<Result<f64>> =
        par::map_indexed(total, |idx| dm_simulate(c, &digits(idx), wire_cap));
    let mut best: Option<(usize, f64)> = None;
    for (idx, p) in scored.into_iter().enumerate() {
        let p = p?;
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((idx, p));
        }
    }
    let (idx, p) = best.ok_or_else(|| Error::invariant("no assignments enumerated"))?;
    Ok((digits(idx), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gatelib, CEdge, Gate, QuantumCircuit, VertexKind};

    fn one_wire(gate: Option<Gate>, init: Option<usize>, measure: CMatrix) -> QuantumCircuit {
        match gate {
            None => QuantumCircuit {
                d: 2,
                gates: vec![],
                vertices: vec![
                    VertexKind::Input { init },
                    VertexKind::Output { measurement: measure },
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
                    VertexKind::Input { init },
                    VertexKind::Gate {
                        gate: g.name.clone(),
                    },
                    VertexKind::Output { measurement: measure },
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

    #[test]
    fn basic_probabilities() {
        let c = one_wire(None, Some(0), gatelib::basis_projector(2, 0));
        assert!((dm_simulate(&c, &[], DEFAULT_WIRE_CAP).unwrap() - 1.0).abs() < 1e-12);

        let c = one_wire(
            Some(gatelib::fourier_gate(2)),
            Some(0),
            gatelib::basis_projector(2, 1),
        );
        assert!((dm_simulate(&c, &[], DEFAULT_WIRE_CAP).unwrap() - 0.5).abs() < 1e-12);

        let c = one_wire(
            Some(gatelib::coin_gate(2)),
            Some(0),
            gatelib::basis_projector(2, 0),
        );
        assert!((dm_simulate(&c, &[], DEFAULT_WIRE_CAP).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn brute_force_on_single_open_input() {
        let c = one_wire(None, None, gatelib::basis_projector(2, 1));
        let (y, p) = brute_force_max(&c, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP).unwrap();
        assert_eq!(y, vec![1]);
        assert!((p - 1.0).abs() < 1e-12);

        let c = one_wire(
            Some(gatelib::shift_gate(2)),
            None,
            gatelib::basis_projector(2, 1),
        );
        let (y, p) = brute_force_max(&c, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP).unwrap();
        assert_eq!(y, vec![0]);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn caps_are_enforced() {
        let c = one_wire(None, None, gatelib::basis_projector(2, 1));
        assert!(matches!(
            brute_force_max(&c, 1, DEFAULT_WIRE_CAP),
            Err(crate::Error::Resource(_))
        ));
        assert!(matches!(
            dm_simulate(&c, &[1], 0),
            Err(crate::Error::Resource(_))
        ));
    }

    #[test]
    fn wire_reordering_is_sound() {
        // Two wires swapped by a SWAP gate, then measured differently.
        let swap = gatelib::swap_gate(2);
        let c = QuantumCircuit {
            d: 2,
            gates: vec![swap],
            vertices: vec![
                VertexKind::Input { init: Some(0) },
                VertexKind::Input { init: Some(1) },
                VertexKind::Gate {
                    gate: "SWAP".into(),
                },
                VertexKind::Output {
                    measurement: gatelib::basis_projector(2, 1),
                },
                VertexKind::Output {
                    measurement: gatelib::basis_projector(2, 0),
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
        // After SWAP the first wire carries |1>, the second |0>.
        assert!((dm_simulate(&c, &[], DEFAULT_WIRE_CAP).unwrap() - 1.0).abs() < 1e-12);
    }
}
