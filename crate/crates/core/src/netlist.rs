//! Gate netlists: parsing, levelization and evaluation.
//!
//! One statement per line:
//! - `INPUT a, b, cin` declares primary inputs in order;
//! - `OUTPUT s, cout` declares outputs in order;
//! - `s = XOR(a, b)` defines a gate; `NOT` takes one input.
//!
//! `#` starts a comment. Without an `INPUT` line the inputs are the wires
//! read but never driven, in order of first use; without an `OUTPUT` line
//! the outputs are the gate wires nobody reads.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::bootstrap::{eval_gate_with, CloudKeySet, GateKind, RotationMode};
use crate::error::{Error, Result};
use crate::lattice::LweCiphertext;
use crate::rng::DetRng;
use crate::transform::{Backend, TransformCounters};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: String,
    pub kind: GateKind,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub gates: Vec<Gate>,
    /// Wire indices read by each gate; inputs come first, then gate outputs.
    operands: Vec<Vec<usize>>,
    output_wires: Vec<usize>,
    /// Gate indices grouped so that every gate depends only on earlier levels.
    levels: Vec<Vec<usize>>,
}

fn is_wire_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric())
}

fn wire_list(line: usize, s: &str) -> Result<Vec<String>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if is_wire_id(t) {
                Ok(t.to_string())
            } else {
                Err(Error::Parse { line, msg: format!("invalid wire id {t:?}") })
            }
        })
        .collect()
}

fn parse_gate(line: usize, s: &str) -> Result<Gate> {
    let malformed = |msg: &str| Error::Parse { line, msg: format!("{msg}: {s:?}") };
    let (out, rhs) = s.split_once('=').ok_or_else(|| malformed("expected OUT = KIND(IN1[, IN2])"))?;
    let output = out.trim();
    if !is_wire_id(output) {
        return Err(malformed("invalid output wire id"));
    }
    let rhs = rhs.trim();
    let (kind, args) = rhs.split_once('(').ok_or_else(|| malformed("missing '('"))?;
    let args = args.strip_suffix(')').ok_or_else(|| malformed("missing ')'"))?;
    let kind: GateKind = kind.trim().parse().map_err(|_| malformed("unknown gate kind"))?;
    let inputs: Vec<String> = args.split(',').map(|a| a.trim().to_string()).collect();
    if let Some(bad) = inputs.iter().find(|a| !is_wire_id(a)) {
        return Err(malformed(&format!("invalid input wire id {bad:?}")));
    }
    if inputs.len() != kind.arity() {
        return Err(Error::Arity(format!("line {line}: {kind} takes {} input(s), got {}", kind.arity(), inputs.len())));
    }
    Ok(Gate { output: output.to_string(), kind, inputs })
}

impl Netlist {
    pub fn parse(text: &str) -> Result<Netlist> {
        let mut inputs: Option<Vec<String>> = None;
        let mut outputs: Option<Vec<String>> = None;
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap().trim();
            if s.is_empty() {
                continue;
            }
            let keyword = s.split_whitespace().next().unwrap();
            let decl = match keyword {
                "INPUT" => &mut inputs,
                "OUTPUT" => &mut outputs,
                _ => {
                    gates.push(parse_gate(line, s)?);
                    continue;
                }
            };
            decl.get_or_insert_with(Vec::new).extend(wire_list(line, &s[keyword.len()..])?);
        }
        Netlist::new(inputs, outputs, gates)
    }

    /// Builds a netlist, inferring missing declarations as `parse` does.
    pub fn new(inputs: Option<Vec<String>>, outputs: Option<Vec<String>>, gates: Vec<Gate>) -> Result<Netlist> {
        for g in &gates {
            if !is_wire_id(&g.output) || !g.inputs.iter().all(|w| is_wire_id(w)) {
                return Err(Error::Netlist(format!("invalid wire id in gate {}", g.output)));
            }
            if g.inputs.len() != g.kind.arity() {
                return Err(Error::Arity(format!("{} takes {} input(s), got {} at {}", g.kind, g.kind.arity(), g.inputs.len(), g.output)));
            }
        }
        let driven: HashMap<&str, usize> = gates.iter().enumerate().map(|(i, g)| (g.output.as_str(), i)).collect();
        if driven.len() != gates.len() {
            let dup = gates.iter().find(|g| gates.iter().filter(|h| h.output == g.output).count() > 1).unwrap();
            return Err(Error::Netlist(format!("wire {} is driven more than once", dup.output)));
        }
        let inputs = match inputs {
            Some(v) => v,
            None => {
                let mut v: Vec<String> = Vec::new();
                for w in gates.iter().flat_map(|g| &g.inputs) {
                    if !driven.contains_key(w.as_str()) && !v.contains(w) {
                        v.push(w.clone());
                    }
                }
                v
            }
        };
        let mut wire: HashMap<&str, usize> = HashMap::new();
        for (i, w) in inputs.iter().enumerate() {
            if wire.insert(w, i).is_some() {
                return Err(Error::Netlist(format!("input {w} declared twice")));
            }
            if driven.contains_key(w.as_str()) {
                return Err(Error::Netlist(format!("input {w} is also driven by a gate")));
            }
        }
        for (g, gate) in gates.iter().enumerate() {
            wire.insert(&gate.output, inputs.len() + g);
        }
        let lookup = |w: &str| wire.get(w).copied().ok_or_else(|| Error::Netlist(format!("wire {w} is never driven")));
        let operands = gates.iter().map(|g| g.inputs.iter().map(|w| lookup(w)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        let outputs = match outputs {
            Some(v) => v,
            None => {
                let read: std::collections::HashSet<&str> = gates.iter().flat_map(|g| g.inputs.iter().map(String::as_str)).collect();
                gates.iter().filter(|g| !read.contains(g.output.as_str())).map(|g| g.output.clone()).collect()
            }
        };
        let output_wires = outputs.iter().map(|w| lookup(w)).collect::<Result<Vec<_>>>()?;
        let levels = levelize(inputs.len(), &gates, &operands)?;
        Ok(Netlist { inputs, outputs, gates, operands, output_wires, levels })
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("INPUT {}\nOUTPUT {}\n", self.inputs.join(", "), self.outputs.join(", "));
        for g in &self.gates {
            s += &format!("{} = {}({})\n", g.output, g.kind, g.inputs.join(", "));
        }
        s
    }

    /// Evaluates level by level, gates within a level in parallel.
    pub fn evaluate<T, F>(&self, inputs: &[T], f: F) -> Result<Vec<T>>
    where
        T: Clone + Send + Sync,
        F: Fn(usize, &[&T]) -> Result<T> + Sync,
    {
        if inputs.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch { expected: self.inputs.len(), got: inputs.len() });
        }
        let mut wires: Vec<Option<T>> = inputs.iter().cloned().map(Some).collect();
        wires.resize(self.inputs.len() + self.gates.len(), None);
        for level in &self.levels {
            let values = level
                .par_iter()
                .map(|&g| {
                    let args: Vec<&T> = self.operands[g].iter().map(|&w| wires[w].as_ref().expect("levelized")).collect();
                    f(g, &args)
                })
                .collect::<Result<Vec<T>>>()?;
            for (&g, v) in level.iter().zip(values) {
                wires[self.inputs.len() + g] = Some(v);
            }
        }
        Ok(self.output_wires.iter().map(|&w| wires[w].clone().expect("levelized")).collect())
    }

    pub fn eval_plain(&self, bits: &[u8]) -> Result<Vec<u8>> {
        self.evaluate(bits, |g, a| {
            let kind = self.gates[g].kind;
            Ok(kind.eval_plain(*a[0], a.get(1).map_or(0, |b| **b)))
        })
    }

    pub fn eval_encrypted(&self, inputs: &[LweCiphertext], cloud: &CloudKeySet, backend: &Backend, mode: RotationMode) -> Result<EncryptedEval> {
        let per_gate = std::sync::Mutex::new(vec![TransformCounters::default(); self.gates.len()]);
        let outputs = self.evaluate(inputs, |g, a| {
            let mut c = TransformCounters::default();
            let out = eval_gate_with(self.gates[g].kind, a[0], a.get(1).copied(), cloud, backend, mode, &mut c)?;
            per_gate.lock().unwrap()[g] = c;
            Ok(out)
        })?;
        let gate_counters = per_gate.into_inner().unwrap();
        let mut total = TransformCounters::default();
        gate_counters.iter().for_each(|c| total.merge(c));
        Ok(EncryptedEval { outputs, gate_counters, total })
    }

    /// A random acyclic netlist; each gate reads earlier wires only.
    pub fn random(rng: &mut DetRng, input_count: usize, gate_count: usize) -> Netlist {
        assert!(input_count > 0);
        let mut wires: Vec<String> = (0..input_count).map(|i| format!("i{i}")).collect();
        let mut gates = Vec::with_capacity(gate_count);
        for g in 0..gate_count {
            let kind = GateKind::ALL[rng.below(GateKind::ALL.len() as u64) as usize];
            let inputs = (0..kind.arity()).map(|_| wires[rng.below(wires.len() as u64) as usize].clone()).collect();
            let output = format!("g{g}");
            wires.push(output.clone());
            gates.push(Gate { output, kind, inputs });
        }
        let outputs = (gate_count == 0).then(|| wires.clone());
        Netlist::new(Some(wires[..input_count].to_vec()), outputs, gates).expect("acyclic by construction")
    }
}

#[derive(Debug, Clone)]
pub struct EncryptedEval {
    pub outputs: Vec<LweCiphertext>,
    /// Counters of each gate, in netlist order.
    pub gate_counters: Vec<TransformCounters>,
    pub total: TransformCounters,
}

fn levelize(input_count: usize, gates: &[Gate], operands: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let mut pending: Vec<usize> = operands.iter().map(|ops| ops.iter().filter(|&&w| w >= input_count).count()).collect();
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for (g, ops) in operands.iter().enumerate() {
        for &w in ops.iter().filter(|&&w| w >= input_count) {
            readers[w - input_count].push(g);
        }
    }
    let mut level: Vec<usize> = (0..gates.len()).filter(|&g| pending[g] == 0).collect();
    let mut levels = Vec::new();
    let mut placed = 0;
    while !level.is_empty() {
        placed += level.len();
        let mut next = Vec::new();
        for &g in &level {
            for &r in &readers[g] {
                pending[r] -= 1;
                if pending[r] == 0 {
                    next.push(r);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        levels.push(std::mem::replace(&mut level, next));
    }
    if placed == gates.len() {
        return Ok(levels);
    }
    // Every unplaced gate reads another unplaced gate, so walking back finds a cycle.
    let mut seen = vec![usize::MAX; gates.len()];
    let mut path = Vec::new();
    let mut g = (0..gates.len()).find(|&g| pending[g] > 0).unwrap();
    while seen[g] == usize::MAX {
        seen[g] = path.len();
        path.push(g);
        g = operands[g].iter().map(|&w| w.wrapping_sub(input_count)).find(|&h| h < gates.len() && pending[h] > 0).unwrap();
    }
    let mut cycle: Vec<usize> = path[seen[g]..].iter().rev().copied().collect();
    let first = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
    cycle.rotate_left(first);
    let mut cycle: Vec<&str> = cycle.iter().map(|&h| gates[h].output.as_str()).collect();
    cycle.push(cycle[0]);
    Err(Error::Netlist(format!("wire cycle: {}", cycle.join(" -> "))))
}

/// Input vectors, one per line; `0`/`1` digits optionally separated by
/// spaces or commas. `#` starts a comment.
pub fn parse_bits(text: &str) -> Result<Vec<Vec<u8>>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let s = raw.split('#').next().unwrap();
        let row = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse { line: i + 1, msg: format!("expected 0 or 1, found {c:?}") }),
            })
            .collect::<Result<Vec<u8>>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn format_bits(rows: &[Vec<u8>]) -> String {
    rows.iter().map(|r| r.iter().map(|b| if *b == 0 { "0" } else { "1" }).collect::<Vec<_>>().join(" ") + "\n").collect()
}
