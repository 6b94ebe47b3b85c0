//! Weighted edit distance with insertions, deletions and adjacent swaps.
//!
//! Insertions and deletions cost 1 and an adjacent swap costs `swap_cost`.
//! The distance is the cheapest edit script of any length, which makes it a
//! true path metric. The restricted (optimal string alignment) recurrence
//! overcharges whenever a character has to travel more than one position
//! and breaks the triangle inequality, so it is not used here.
//!
//! With `swap_cost <= 1 / L^2` for strings of length at most `L`, every
//! optimal script keeps a maximum number of characters (each kept pair saves
//! 2 while all swaps together cost less than 1/2). The script then deletes
//! the unkept characters, bubble-sorts the kept ones into place and inserts
//! the missing ones; its swap count is the number of crossings between
//! matched positions. Which repeated occurrences to keep is searched
//! exhaustively with pruning; occurrences of one symbol are always matched
//! in order, since uncrossing them never adds inversions.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

/// One step of an edit script. Positions refer to the string as it is when
/// the step is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Delete { at: usize },
    Swap { at: usize },
    Insert { at: usize, symbol: char },
}

impl EditOp {
    pub fn cost(&self, swap_cost: f64) -> f64 {
        match self {
            EditOp::Swap { .. } => swap_cost,
            _ => 1.0,
        }
    }

    pub fn apply(&self, text: &mut Vec<char>) {
        match *self {
            EditOp::Delete { at } => {
                text.remove(at);
            }
            EditOp::Swap { at } => text.swap(at, at + 1),
            EditOp::Insert { at, symbol } => text.insert(at, symbol),
        }
    }
}

/// A maximum matching of equal symbols between two strings.
#[derive(Debug, Clone)]
struct Alignment {
    /// Kept positions of the source, ascending.
    kept: Vec<usize>,
    /// Target position of each kept source character.
    targets: Vec<usize>,
    inversions: usize,
}

fn best_alignment(a: &[char], b: &[char]) -> Alignment {
    let mut by_symbol: BTreeMap<char, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, &c) in a.iter().enumerate() {
        by_symbol.entry(c).or_default().0.push(i);
    }
    for (j, &c) in b.iter().enumerate() {
        by_symbol.entry(c).or_default().1.push(j);
    }

    // Per symbol: every way of choosing which occurrences survive.
    let choices: Vec<Vec<Vec<(usize, usize)>>> = by_symbol
        .values()
        .filter_map(|(pa, pb)| {
            let t = pa.len().min(pb.len());
            if t == 0 {
                return None;
            }
            let options: Vec<Vec<(usize, usize)>> = if pa.len() > t {
                pa.iter()
                    .copied()
                    .combinations(t)
                    .map(|ka| ka.into_iter().zip(pb.iter().copied()).collect())
                    .collect()
            } else if pb.len() > t {
                pb.iter()
                    .copied()
                    .combinations(t)
                    .map(|kb| pa.iter().copied().zip(kb).collect())
                    .collect()
            } else {
                vec![pa.iter().copied().zip(pb.iter().copied()).collect()]
            };
            Some(options)
        })
        .collect();

    let mut best: Option<(usize, Vec<(usize, usize)>)> = None;
    let mut current = Vec::new();
    search(&choices, 0, &mut current, &mut best);

    let (inversions, mut pairs) = best.unwrap_or((0, Vec::new()));
    pairs.sort_unstable();
    Alignment {
        kept: pairs.iter().map(|&(i, _)| i).collect(),
        targets: pairs.iter().map(|&(_, j)| j).collect(),
        inversions,
    }
}

fn crossings(pairs: &[(usize, usize)]) -> usize {
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let mut seq: Vec<usize> = sorted.into_iter().map(|(_, j)| j).collect();
    let mut scratch = vec![0; seq.len()];
    super::perm::count_inversions(&mut seq, &mut scratch)
}

fn search(
    choices: &[Vec<Vec<(usize, usize)>>],
    depth: usize,
    current: &mut Vec<(usize, usize)>,
    best: &mut Option<(usize, Vec<(usize, usize)>)>,
) {
    let partial = crossings(current);
    if let Some((b, _)) = best {
        // Adding pairs never removes crossings.
        if partial >= *b {
            return;
        }
    }
    if depth == choices.len() {
        *best = Some((partial, current.clone()));
        return;
    }
    for option in &choices[depth] {
        let len = current.len();
        current.extend_from_slice(option);
        search(choices, depth + 1, current, best);
        current.truncate(len);
    }
}

/// Cheapest edit cost from `a` to `b`.
pub fn weighted_edit_distance(a: &[char], b: &[char], swap_cost: f64) -> f64 {
    let al = best_alignment(a, b);
    let indels = (a.len() - al.kept.len()) + (b.len() - al.kept.len());
    indels as f64 + swap_cost * al.inversions as f64
}

/// An optimal edit script from `a` to `b`: deletions, then swaps, then
/// insertions.
pub fn edit_script(a: &[char], b: &[char]) -> Vec<EditOp> {
    let al = best_alignment(a, b);
    let mut ops = Vec::new();
    for i in (0..a.len()).rev() {
        if al.kept.binary_search(&i).is_err() {
            ops.push(EditOp::Delete { at: i });
        }
    }
    let mut targets = al.targets.clone();
    loop {
        let Some(i) = (0..targets.len().saturating_sub(1)).find(|&i| targets[i] > targets[i + 1])
        else {
            break;
        };
        targets.swap(i, i + 1);
        ops.push(EditOp::Swap { at: i });
    }
    let mut placed = targets;
    placed.sort_unstable();
    for (j, &symbol) in b.iter().enumerate() {
        if placed.binary_search(&j).is_err() {
            ops.push(EditOp::Insert { at: j, symbol });
        }
    }
    ops
}
