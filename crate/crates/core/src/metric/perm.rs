//! Swap (Kendall tau) distance between rankings and its bubble-sort geodesics.

/// Number of adjacent transpositions needed to turn ranking `p` into `q`.
///
/// Both rankings list item indices from most to least preferred. Runs in
/// `O(m log m)` via merge-sort inversion counting.
pub fn inversions_between(p: &[usize], q: &[usize]) -> usize {
    let mut rank_in_q = vec![0usize; q.len()];
    for (rank, &item) in q.iter().enumerate() {
        rank_in_q[item] = rank;
    }
    let mut seq: Vec<usize> = p.iter().map(|&item| rank_in_q[item]).collect();
    let mut scratch = vec![0usize; seq.len()];
    count_inversions(&mut seq, &mut scratch)
}

/// Counts inversions of `seq`, sorting it in place.
pub(crate) fn count_inversions(seq: &mut [usize], scratch: &mut [usize]) -> usize {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = seq.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        count_inversions(left, sl) + count_inversions(right, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if seq[i] <= seq[j] {
            scratch[k] = seq[i];
            i += 1;
        } else {
            scratch[k] = seq[j];
            count += mid - i;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&seq[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&seq[j..n]);
    seq.copy_from_slice(&scratch[..n]);
    count
}

/// The ranking reached after `steps` swaps along the bubble-sort geodesic
/// from `p` towards `q`. Each step swaps the leftmost adjacent pair that is
/// inverted relative to `q`, so every step reduces the distance to `q` by one.
pub fn geodesic_point(p: &[usize], q: &[usize], steps: usize) -> Vec<usize> {
    let mut rank_in_q = vec![0usize; q.len()];
    for (rank, &item) in q.iter().enumerate() {
        rank_in_q[item] = rank;
    }
    let mut cur = p.to_vec();
    for _ in 0..steps {
        let Some(i) = (0..cur.len().saturating_sub(1))
            .find(|&i| rank_in_q[cur[i]] > rank_in_q[cur[i + 1]])
        else {
            break;
        };
        cur.swap(i, i + 1);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, VecDeque};

    fn bfs_distance(p: &[usize], q: &[usize]) -> usize {
        let mut seen = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert(p.to_vec(), 0usize);
        queue.push_back(p.to_vec());
        while let Some(cur) = queue.pop_front() {
            let d = seen[&cur];
            if cur == q {
                return d;
            }
            for i in 0..cur.len() - 1 {
                let mut next = cur.clone();
                next.swap(i, i + 1);
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
        unreachable!("adjacent transpositions connect every ranking")
    }

    fn all_rankings(m: usize) -> Vec<Vec<usize>> {
        use itertools::Itertools;
        (0..m).permutations(m).collect()
    }

    #[test]
    fn inversion_count_matches_bfs_up_to_five_items() {
        for m in 1..=5 {
            let all = all_rankings(m);
            let p = &all[all.len() / 3];
            for q in &all {
                assert_eq!(inversions_between(p, q), bfs_distance(p, q), "{p:?} -> {q:?}");
            }
        }
    }

    #[test]
    fn geodesic_steps_reduce_distance_by_one() {
        let p = vec![3, 1, 0, 2, 4];
        let q = vec![0, 4, 2, 3, 1];
        let d = inversions_between(&p, &q);
        for t in 0..=d {
            let c = geodesic_point(&p, &q, t);
            assert_eq!(inversions_between(&p, &c), t);
            assert_eq!(inversions_between(&c, &q), d - t);
        }
    }
}
