//! Detection of linearly dependent equality rows by sparse elimination.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::instance::AffineRow;

/// Indices of a maximal linearly independent subset of `rows` (coefficients
/// only), in order. A row counts as dependent when elimination shrinks it
/// below `tol` times its original size.
pub fn independent_rows(rows: &[AffineRow], tol: f64) -> Vec<usize> {
    let mut pivot_of: HashMap<usize, usize> = HashMap::new();
    let mut basis: Vec<(usize, f64, Vec<(usize, f64)>)> = Vec::new();
    let mut keep = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(v, a) in &row.coefs {
            *acc.entry(v).or_insert(0.0) += a;
        }
        let norm = acc.values().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm == 0.0 {
            continue;
        }
        let mut heap: BinaryHeap<Reverse<usize>> = acc.keys().filter_map(|c| pivot_of.get(c)).map(|&b| Reverse(b)).collect();
        let mut queued: Vec<usize> = heap.iter().map(|r| r.0).collect();
        while let Some(Reverse(b)) = heap.pop() {
            let (pc, pv, prow) = &basis[b];
            let Some(&v) = acc.get(pc) else { continue };
            let f = v / pv;
            for &(c, a) in prow {
                let e = acc.entry(c).or_insert(0.0);
                *e -= f * a;
                if c == *pc || e.abs() <= 1e-15 * norm {
                    acc.remove(&c);
                } else if let Some(&q) = pivot_of.get(&c) {
                    if !queued.contains(&q) {
                        queued.push(q);
                        heap.push(Reverse(q));
                    }
                }
            }
        }
        let Some((&pc, &pv)) = acc.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) else { continue };
        if pv.abs() <= tol * norm {
            continue;
        }
        pivot_of.insert(pc, basis.len());
        basis.push((pc, pv, acc.into_iter().collect()));
        keep.push(r);
    }
    keep
}
