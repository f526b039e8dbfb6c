use super::BoundRule;
use crate::model::{CellAddress, ModelStructure};

fn allowed_members(rule: &BoundRule, structure: &ModelStructure) -> Vec<Vec<usize>> {
    (0..structure.dimension_count())
        .map(|d| {
            if d == rule.anchor() {
                vec![rule.target()]
            } else {
                match &rule.filters()[d] {
                    Some(allowed) => allowed.clone(),
                    None => (0..structure.dimension(d).len()).collect(),
                }
            }
        })
        .collect()
}

pub fn scope_size(rule: &BoundRule, structure: &ModelStructure) -> usize {
    allowed_members(rule, structure).iter().map(Vec::len).product()
}

/// Addresses in a rule's scope, lexicographic by dimension order.
pub struct ScopeIter {
    allowed: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    done: bool,
}

impl Iterator for ScopeIter {
    type Item = CellAddress;

    fn next(&mut self) -> Option<CellAddress> {
        if self.done {
            return None;
        }
        let address = CellAddress::new(self.cursor.iter().zip(&self.allowed).map(|(&c, a)| a[c]).collect());
        // Odometer: last dimension turns fastest.
        self.done = true;
        for d in (0..self.cursor.len()).rev() {
            self.cursor[d] += 1;
            if self.cursor[d] < self.allowed[d].len() {
                self.done = false;
                break;
            }
            self.cursor[d] = 0;
        }
        Some(address)
    }
}

pub fn rule_scope(rule: &BoundRule, structure: &ModelStructure) -> ScopeIter {
    let allowed = allowed_members(rule, structure);
    let done = allowed.iter().any(Vec::is_empty);
    ScopeIter { cursor: vec![0; allowed.len()], allowed, done }
}

/// Linear indexes of a rule's scope, ascending.
pub fn scope_linear(rule: &BoundRule, structure: &ModelStructure) -> Vec<usize> {
    let allowed = allowed_members(rule, structure);
    let strides = structure.strides();
    let mut out = vec![0usize];
    for (d, members) in allowed.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * members.len());
        for &base in &out {
            for &m in members {
                next.push(base + m * strides[d]);
            }
        }
        out = next;
    }
    out
}
