//! Versioned circuit text format.
//!
//! ```text
//! d-circuit v1
//! d 2
//! gates 1
//! gate H 1 1 1
//! kraus [re, im] [re, im] ...        (one line per Kraus matrix, row-major)
//! vertices 3
//! vertex 0 input *                   (or a basis digit)
//! vertex 1 gate H
//! vertex 2 output [re, im] ...       (measurement matrix, row-major)
//! edges 2
//! edge 1 0 0 1 0                     (label from fport to tport)
//! ```
//!
//! Floats print in shortest round-trip form, so `parse(print(c)) == c`
//! entry for entry.

use num_complex::Complex64;

use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};

use super::{CEdge, Gate, QuantumCircuit, VertexKind};

fn print_complex_row(out: &mut String, data: &[Complex64]) {
    for (i, z) in data.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("[{}, {}]", z.re, z.im));
    }
    out.push('\n');
}

pub fn print_circuit(c: &QuantumCircuit) -> String {
    let mut out = String::from("d-circuit v1\n");
    out.push_str(&format!("d {}\n", c.d));
    out.push_str(&format!("gates {}\n", c.gates.len()));
    for g in &c.gates {
        out.push_str(&format!(
            "gate {} {} {} {}\n",
            g.name,
            g.inputs,
            g.outputs,
            g.kraus.len()
        ));
        for k in &g.kraus {
            out.push_str("kraus ");
            print_complex_row(&mut out, &k.data);
        }
    }
    out.push_str(&format!("vertices {}\n", c.vertices.len()));
    for (v, kind) in c.vertices.iter().enumerate() {
        match kind {
            VertexKind::Input { init: Some(b) } => {
                out.push_str(&format!("vertex {v} input {b}\n"));
            }
            VertexKind::Input { init: None } => {
                out.push_str(&format!("vertex {v} input *\n"));
            }
            VertexKind::Gate { gate } => {
                out.push_str(&format!("vertex {v} gate {gate}\n"));
            }
            VertexKind::Output { measurement } => {
                out.push_str(&format!("vertex {v} output "));
                print_complex_row(&mut out, &measurement.data);
            }
        }
    }
    out.push_str(&format!("edges {}\n", c.edges.len()));
    for e in &c.edges {
        out.push_str(&format!(
            "edge {} {} {} {} {}\n",
            e.label, e.from.0, e.from.1, e.to.0, e.to.1
        ));
    }
    out
}

fn parse_complex_list(text: &str, expect: usize, what: &str) -> Result<Vec<Complex64>> {
    let cleaned: String = text
        .chars()
        .map(|ch| if ch == '[' || ch == ']' || ch == ',' { ' ' } else { ch })
        .collect();
    let nums: Vec<&str> = cleaned.split_whitespace().collect();
    if nums.len() != 2 * expect {
        return Err(Error::validation(format!(
            "{what}: expected {expect} complex entries, found {}",
            nums.len() / 2
        )));
    }
    let mut out = Vec::with_capacity(expect);
    for pair in nums.chunks(2) {
        let re: f64 = pair[0]
            .parse()
            .map_err(|_| Error::validation(format!("{what}: bad float {:?}", pair[0])))?;
        let im: f64 = pair[1]
            .parse()
            .map_err(|_| Error::validation(format!("{what}: bad float {:?}", pair[1])))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

pub fn parse_circuit(text: &str) -> Result<QuantumCircuit> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut next = |what: &str| -> Result<&str> {
        lines
            .next()
            .ok_or_else(|| Error::validation(format!("unexpected end of file before {what}")))
    };
    if next("header")? != "d-circuit v1" {
        return Err(Error::validation("missing `d-circuit v1` header"));
    }
    let parse_count = |line: &str, key: &str| -> Result<usize> {
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| Error::validation(format!("bad `{key}` line")))?;
        if k != key {
            return Err(Error::validation(format!("expected `{key}`, got {k:?}")));
        }
        v.trim()
            .parse()
            .map_err(|_| Error::validation(format!("bad `{key}` value {v:?}")))
    };
    let d = parse_count(next("d")?, "d")?;
    if d < 2 {
        return Err(Error::validation("d must be at least 2"));
    }
    let gate_count = parse_count(next("gates")?, "gates")?;
    let mut gates = Vec::with_capacity(gate_count);
    for _ in 0..gate_count {
        let line = next("gate")?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 || f[0] != "gate" {
            return Err(Error::validation(format!("bad gate line: {line:?}")));
        }
        let name = f[1].to_string();
        let inputs: usize = f[2].parse().map_err(|_| Error::validation("bad arity"))?;
        let outputs: usize = f[3].parse().map_err(|_| Error::validation("bad arity"))?;
        let kraus_count: usize = f[4]
            .parse()
            .map_err(|_| Error::validation("bad Kraus count"))?;
        let rows = d.pow(outputs as u32);
        let cols = d.pow(inputs as u32);
        let mut kraus = Vec::with_capacity(kraus_count);
        for _ in 0..kraus_count {
            let line = next("kraus")?;
            let body = line
                .strip_prefix("kraus")
                .ok_or_else(|| Error::validation(format!("expected kraus line, got {line:?}")))?;
            let data = parse_complex_list(body, rows * cols, &format!("gate {name}"))?;
            kraus.push(CMatrix { rows, cols, data });
        }
        gates.push(Gate {
            name,
            inputs,
            outputs,
            kraus,
        });
    }
    let vertex_count = parse_count(next("vertices")?, "vertices")?;
    let mut vertices = Vec::with_capacity(vertex_count);
    for i in 0..vertex_count {
        let line = next("vertex")?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 3 || f[0] != "vertex" {
            return Err(Error::validation(format!("bad vertex line: {line:?}")));
        }
        let id: usize = f[1].parse().map_err(|_| Error::validation("bad vertex id"))?;
        if id != i {
            return Err(Error::validation(format!(
                "vertex ids must be sequential: expected {i}, got {id}"
            )));
        }
        match f[2] {
            "input" if f.len() == 4 => {
                let init = if f[3] == "*" {
                    None
                } else {
                    Some(
                        f[3].parse()
                            .map_err(|_| Error::validation("bad input initialization"))?,
                    )
                };
                vertices.push(VertexKind::Input { init });
            }
            "gate" if f.len() == 4 => {
                vertices.push(VertexKind::Gate {
                    gate: f[3].to_string(),
                });
            }
            "output" => {
                let body = line
                    .split_once("output")
                    .map(|(_, rest)| rest)
                    .unwrap_or_default();
                let data = parse_complex_list(body, d * d, &format!("vertex {id} measurement"))?;
                vertices.push(VertexKind::Output {
                    measurement: CMatrix {
                        rows: d,
                        cols: d,
                        data,
                    },
                });
            }
            _ => return Err(Error::validation(format!("bad vertex line: {line:?}"))),
        }
    }
    let edge_count = parse_count(next("edges")?, "edges")?;
    let mut edges = Vec::with_capacity(edge_count);
    for _ in 0..edge_count {
        let line = next("edge")?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 || f[0] != "edge" {
            return Err(Error::validation(format!("bad edge line: {line:?}")));
        }
        let nums: Result<Vec<usize>> = f[1..]
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::validation(format!("bad edge field {t:?}")))
            })
            .collect();
        let n = nums?;
        edges.push(CEdge {
            label: n[0] as u32,
            from: (n[1], n[2]),
            to: (n[3], n[4]),
        });
    }
    Ok(QuantumCircuit {
        d,
        gates,
        vertices,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gatelib, validate_circuit};

    fn sample() -> QuantumCircuit {
        QuantumCircuit {
            d: 2,
            gates: vec![gatelib::fourier_gate(2), gatelib::cshift_gate(2)],
            vertices: vec![
                VertexKind::Input { init: None },
                VertexKind::Input { init: Some(1) },
                VertexKind::Gate { gate: "H".into() },
                VertexKind::Gate { gate: "CX".into() },
                VertexKind::Output {
                    measurement: gatelib::basis_projector(2, 1),
                },
                VertexKind::Output {
                    measurement: crate::cmatrix::CMatrix::identity(2),
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
                    from: (2, 0),
                    to: (3, 0),
                },
                CEdge {
                    label: 3,
                    from: (1, 0),
                    to: (3, 1),
                },
                CEdge {
                    label: 4,
                    from: (3, 0),
                    to: (4, 0),
                },
                CEdge {
                    label: 5,
                    from: (3, 1),
                    to: (5, 0),
                },
            ],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        validate_circuit(&c).unwrap();
        let text = print_circuit(&c);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(c, back);
        // And printing again is byte-identical.
        assert_eq!(text, print_circuit(&back));
    }

    #[test]
    fn minimal_file_parses() {
        let text = "d-circuit v1\nd 2\ngates 0\nvertices 2\nvertex 0 input *\nvertex 1 output [0, 0] [0, 0] [0, 0] [1, 0]\nedges 1\nedge 1 0 0 1 0\n";
        let c = parse_circuit(text).unwrap();
        validate_circuit(&c).unwrap();
        assert_eq!(c.open_inputs(), vec![0]);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_circuit("d-circuit v2\nd 2\n").is_err());
    }
}
