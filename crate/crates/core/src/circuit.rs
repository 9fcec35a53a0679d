//! XOR-gate cost model for the skewing permutation.
//!
//! Multiplying by a constant in GF(2^n) is a GF(2)-linear map, reduction
//! included, so each multiplier is a network of 2-input XOR gates with no AND
//! gates. Each output bit is built as its own balanced XOR tree; gates are not
//! shared between outputs, so the counts are an upper bound on what a
//! synthesizer would produce.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::field::{unreduced_mul_matrix, BinaryMatrix, FieldError, FieldSpec, GfElement};
use crate::skew::SkewParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wire {
    Input(u32),
    Gate(u32),
    /// Constant zero, for all-zero matrix rows.
    Zero,
}

impl std::fmt::Display for Wire {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Wire::Input(i) => write!(f, "in{i}"),
            Wire::Gate(k) => write!(f, "g{k}"),
            Wire::Zero => f.write_str("0"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorGate {
    pub a: Wire,
    pub b: Wire,
}

/// A combinational network of 2-input XOR gates. Gate `k` drives wire
/// `g<k>` and only reads inputs or lower-numbered gates, so the network is
/// acyclic by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorNetwork {
    pub n_inputs: u32,
    pub gates: Vec<XorGate>,
    /// Wire driving each output bit.
    pub outputs: Vec<Wire>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Pairwise reduction: a row of weight r costs r - 1 gates at depth
    /// ceil(log2 r).
    Balanced,
    /// Left-to-right chain: r - 1 gates at depth r - 1.
    Serial,
}

impl XorNetwork {
    pub fn n_outputs(&self) -> u32 {
        self.outputs.len() as u32
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    fn levels(&self) -> Vec<u32> {
        let mut level = Vec::with_capacity(self.gates.len());
        let of = |w: Wire, level: &[u32]| match w {
            Wire::Gate(k) => level[k as usize],
            _ => 0,
        };
        for g in &self.gates {
            let l = of(g.a, &level).max(of(g.b, &level)) + 1;
            level.push(l);
        }
        level
    }

    /// Longest chain of gates from any input to any output.
    pub fn depth(&self) -> u32 {
        let levels = self.levels();
        self.outputs
            .iter()
            .map(|w| match w {
                Wire::Gate(k) => levels[*k as usize],
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// Evaluates the network on the input bit-vector `x`.
    pub fn evaluate(&self, x: u32) -> u32 {
        let mut values = Vec::with_capacity(self.gates.len());
        let read = |w: Wire, values: &[bool]| match w {
            Wire::Input(i) => x >> i & 1 == 1,
            Wire::Gate(k) => values[k as usize],
            Wire::Zero => false,
        };
        for g in &self.gates {
            let v = read(g.a, &values) ^ read(g.b, &values);
            values.push(v);
        }
        self.outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &w)| acc | ((read(w, &values) as u32) << j))
    }
}

/// Builds a network computing `m` with one XOR tree per output row.
pub fn matrix_to_network(m: &BinaryMatrix, schedule: Schedule) -> XorNetwork {
    let mut gates = Vec::new();
    let mut outputs = Vec::with_capacity(m.n_rows());
    for &row in m.rows() {
        let mut wires: Vec<Wire> = (0..m.n_cols() as u32)
            .filter(|j| row >> j & 1 == 1)
            .map(Wire::Input)
            .collect();
        let push = |a: Wire, b: Wire, gates: &mut Vec<XorGate>| {
            gates.push(XorGate { a, b });
            Wire::Gate(gates.len() as u32 - 1)
        };
        let out = match schedule {
            Schedule::Balanced => {
                while wires.len() > 1 {
                    let next: Vec<Wire> = wires
                        .chunks(2)
                        .map(|pair| match pair {
                            [a, b] => push(*a, *b, &mut gates),
                            [a] => *a,
                            _ => unreachable!(),
                        })
                        .collect();
                    wires = next;
                }
                wires.first().copied().unwrap_or(Wire::Zero)
            }
            Schedule::Serial => {
                let mut it = wires.into_iter();
                match it.next() {
                    Some(first) => it.fold(first, |acc, w| push(acc, w, &mut gates)),
                    None => Wire::Zero,
                }
            }
        };
        outputs.push(out);
    }
    XorNetwork { n_inputs: m.n_cols() as u32, gates, outputs }
}

/// Serial-chain depth of plain polynomial multiplication by `k` (no
/// reduction). Each product bit sums at most `popcount(k) <= n` shifted
/// copies of the input, so this never exceeds `n - 1`.
pub fn unreduced_serial_depth(field: &FieldSpec, k: GfElement) -> u32 {
    let m = unreduced_mul_matrix(field.degree(), k);
    matrix_to_network(&m, Schedule::Serial).depth()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplierCost {
    pub constant: u32,
    pub xor_count: usize,
    pub depth: u32,
    pub max_row_weight: u32,
}

impl MultiplierCost {
    fn of(constant: u32, m: &BinaryMatrix) -> (Self, XorNetwork) {
        let net = matrix_to_network(m, Schedule::Balanced);
        let cost = MultiplierCost {
            constant,
            xor_count: net.gate_count(),
            depth: net.depth(),
            max_row_weight: m.rows().iter().map(|r| r.count_ones()).max().unwrap_or(0),
        };
        (cost, net)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub field: FieldSpec,
    pub modulus: String,
    /// The `a·s` multiplier.
    pub set_path: MultiplierCost,
    /// The `(b·t)·w` multiplier for every way constant `w`, indexed by way.
    pub per_way: Vec<MultiplierCost>,
    /// Gates for the per-way `n`-bit additions of the two products. Adding
    /// the constant `c` only inverts wires and costs no XOR gates.
    pub addition_xor_count: usize,
    pub total_xor_count: usize,
    /// `max(set path, slowest way path) + 1` for the final addition.
    pub critical_path_depth: u32,
}

/// Cost of evaluating `Π` for every way in parallel, with `b·t` read from a
/// per-domain register.
pub fn permutation_cost(sp: &SkewParams) -> Result<(CostReport, Vec<XorNetwork>), FieldError> {
    let field = *sp.field();
    if !field.is_binary() {
        return Err(FieldError::NotBinary);
    }
    let (set_path, _) = MultiplierCost::of(sp.a().0, &field.const_mul_matrix(sp.a())?);
    let mut per_way = Vec::with_capacity(field.order() as usize);
    let mut networks = Vec::with_capacity(field.order() as usize);
    for w in field.elements() {
        let (cost, net) = MultiplierCost::of(w.0, &field.const_mul_matrix(w)?);
        per_way.push(cost);
        networks.push(net);
    }
    let addition_xor_count = (field.degree() * field.order()) as usize;
    let total_xor_count =
        set_path.xor_count + per_way.iter().map(|c| c.xor_count).sum::<usize>() + addition_xor_count;
    let slowest_way = per_way.iter().map(|c| c.depth).max().unwrap_or(0);
    let report = CostReport {
        field,
        modulus: crate::field::format_poly(field.modulus()),
        set_path,
        per_way,
        addition_xor_count,
        total_xor_count,
        critical_path_depth: set_path.depth.max(slowest_way) + 1,
    };
    Ok((report, networks))
}

/// Structural text form of a network.
///
/// ```text
/// # netlist mul_w2
/// # inputs 3 outputs 3 gates 1 depth 1
/// XOR g0 in0 in2
/// out0 = in2
/// out1 = g0
/// out2 = in1
/// ```
pub fn emit_netlist(net: &XorNetwork, name: &str) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "# netlist {name}");
    let _ = writeln!(
        text,
        "# inputs {} outputs {} gates {} depth {}",
        net.n_inputs,
        net.n_outputs(),
        net.gate_count(),
        net.depth()
    );
    for (k, g) in net.gates.iter().enumerate() {
        let _ = writeln!(text, "XOR g{k} {} {}", g.a, g.b);
    }
    for (j, w) in net.outputs.iter().enumerate() {
        let _ = writeln!(text, "out{j} = {w}");
    }
    text
}
