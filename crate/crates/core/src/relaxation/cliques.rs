//! Correlative-sparsity cliques.

use std::collections::{BTreeSet, BinaryHeap};

use crate::discretize::PopInstance;
use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CliqueStrategy {
    /// Chordal extension by minimum-degree elimination, maximal cliques.
    #[default]
    Chordal,
    /// One clique per distinct maximal constraint (or objective monomial)
    /// support. Valid but weaker; running intersection is not guaranteed.
    ConstraintSupports,
    /// A single clique holding every variable.
    Dense,
}

impl std::str::FromStr for CliqueStrategy {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chordal" => Ok(Self::Chordal),
            "supports" | "constraint_supports" => Ok(Self::ConstraintSupports),
            "dense" => Ok(Self::Dense),
            _ => Err(CoreError::Lookup(format!("unknown clique strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueSet {
    /// Sorted variable lists.
    pub cliques: Vec<Vec<usize>>,
    pub eq_owner: Vec<usize>,
    pub ineq_owner: Vec<usize>,
    /// Smallest clique holding each variable.
    pub var_owner: Vec<usize>,
    pub running_intersection: bool,
}

impl CliqueSet {
    pub fn max_size(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    // both sorted
    let mut it = b.iter();
    a.iter().all(|x| it.by_ref().any(|y| y == x))
}

/// Smallest clique containing `support`, ties to the lowest index.
fn owner_of(support: &[usize], cliques: &[Vec<usize>], by_var: &[Vec<usize>]) -> Option<usize> {
    let candidates: &[usize] = match support.first() {
        Some(&v) => &by_var[v],
        None => return (0..cliques.len()).min_by_key(|&t| (cliques[t].len(), t)),
    };
    candidates
        .iter()
        .copied()
        .filter(|&t| is_subset(support, &cliques[t]))
        .min_by_key(|&t| (cliques[t].len(), t))
}

fn supports(pop: &PopInstance) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for p in pop.eqs.iter().chain(&pop.ineqs) {
        out.push(p.support_vars().into_iter().collect());
    }
    for (m, _) in pop.objective.terms() {
        out.push(m.vars().collect());
    }
    out
}

fn keep_maximal(mut sets: Vec<Vec<usize>>, nvars: usize) -> Vec<Vec<usize>> {
    sets.retain(|s| !s.is_empty());
    sets.sort();
    sets.dedup();
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut kept: Vec<Vec<usize>> = Vec::new();
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); nvars];
    for s in sets {
        if by_var[s[0]].iter().any(|&k| is_subset(&s, &kept[k])) {
            continue;
        }
        for &v in &s {
            by_var[v].push(kept.len());
        }
        kept.push(s);
    }
    kept.sort();
    kept
}

fn min_degree_cliques(nvars: usize, edges_from: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nvars];
    for s in edges_from {
        for (a, &u) in s.iter().enumerate() {
            for &v in &s[a + 1..] {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }
    let mut queue: BTreeSet<(usize, usize)> = (0..nvars).map(|v| (adj[v].len(), v)).collect();
    let mut cands = Vec::with_capacity(nvars);
    while let Some((_, v)) = queue.pop_first() {
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        let mut c = nb.clone();
        c.push(v);
        c.sort_unstable();
        cands.push(c);
        for &u in &nb {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        for (a, &u) in nb.iter().enumerate() {
            for &w in &nb[a + 1..] {
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        for &u in &nb {
            queue.insert((adj[u].len(), u));
        }
        adj[v].clear();
    }
    cands
}

/// Orders cliques along a maximum-weight spanning forest of the clique
/// intersection graph (Prim, lowest index first).
fn tree_order(cliques: Vec<Vec<usize>>, nvars: usize) -> Vec<Vec<usize>> {
    let k = cliques.len();
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); nvars];
    for (t, c) in cliques.iter().enumerate() {
        for &v in c {
            by_var[v].push(t);
        }
    }
    let overlap = |a: usize, b: usize| cliques[a].iter().filter(|v| cliques[b].binary_search(v).is_ok()).count();
    let mut done = vec![false; k];
    let mut order = Vec::with_capacity(k);
    let mut heap: BinaryHeap<(usize, std::cmp::Reverse<usize>)> = BinaryHeap::new();
    for root in 0..k {
        if done[root] {
            continue;
        }
        heap.push((0, std::cmp::Reverse(root)));
        while let Some((_, std::cmp::Reverse(t))) = heap.pop() {
            if done[t] {
                continue;
            }
            done[t] = true;
            order.push(t);
            let mut nbrs: Vec<usize> = cliques[t].iter().flat_map(|&v| by_var[v].iter().copied()).collect();
            nbrs.sort_unstable();
            nbrs.dedup();
            for s in nbrs {
                if !done[s] {
                    heap.push((overlap(t, s), std::cmp::Reverse(s)));
                }
            }
        }
    }
    let mut cl: Vec<Option<Vec<usize>>> = cliques.into_iter().map(Some).collect();
    order.into_iter().map(|t| cl[t].take().unwrap()).collect()
}

/// Checks that every clique's intersection with the union of its
/// predecessors lies inside one predecessor.
pub fn has_running_intersection(cliques: &[Vec<usize>]) -> bool {
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for (t, c) in cliques.iter().enumerate() {
        if t > 0 {
            let inter: Vec<usize> = c.iter().copied().filter(|v| seen.contains(v)).collect();
            if !cliques[..t].iter().any(|p| is_subset(&inter, p)) {
                return false;
            }
        }
        seen.extend(c.iter().copied());
    }
    true
}

/// Cliques from the chordal extension of the correlative-sparsity graph.
pub fn csp_cliques(pop: &PopInstance) -> Result<CliqueSet, CoreError> {
    csp_cliques_with(pop, CliqueStrategy::Chordal)
}

pub fn csp_cliques_with(pop: &PopInstance, strategy: CliqueStrategy) -> Result<CliqueSet, CoreError> {
    let n = pop.nvars;
    let sup = supports(pop);
    let raw = match strategy {
        CliqueStrategy::Dense => vec![(0..n).collect()],
        CliqueStrategy::Chordal => keep_maximal(min_degree_cliques(n, &sup), n),
        CliqueStrategy::ConstraintSupports => {
            let mut sets = sup.clone();
            let mut covered = vec![false; n];
            for s in &sets {
                for &v in s {
                    covered[v] = true;
                }
            }
            sets.extend((0..n).filter(|&v| !covered[v]).map(|v| vec![v]));
            keep_maximal(sets, n)
        }
    };
    let cliques = tree_order(raw, n);
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, c) in cliques.iter().enumerate() {
        for &v in c {
            by_var[v].push(t);
        }
    }
    let own = |p: &sdpsmooth_poly::Polynomial, what: &str, i: usize| -> Result<usize, CoreError> {
        let s: Vec<usize> = p.support_vars().into_iter().collect();
        owner_of(&s, &cliques, &by_var)
            .ok_or_else(|| CoreError::Relaxation(format!("{what} {i} has a support outside every clique")))
    };
    let eq_owner = pop.eqs.iter().enumerate().map(|(i, h)| own(h, "equality", i)).collect::<Result<_, _>>()?;
    let ineq_owner = pop.ineqs.iter().enumerate().map(|(i, g)| own(g, "inequality", i)).collect::<Result<_, _>>()?;
    let var_owner = (0..n)
        .map(|v| owner_of(&[v], &cliques, &by_var).ok_or_else(|| CoreError::Relaxation(format!("variable {v} is in no clique"))))
        .collect::<Result<_, _>>()?;
    let running_intersection = has_running_intersection(&cliques);
    Ok(CliqueSet { cliques, eq_owner, ineq_owner, var_owner, running_intersection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sdpsmooth_poly::Polynomial;

    fn chain(n: usize, rows: &[usize]) -> PopInstance {
        let mut pop = PopInstance::new(n, Polynomial::zero(n), vec![0.0; n], vec![1.0; n]);
        for &i in rows {
            pop.push_eq(Polynomial::linear(n, &[(i - 1, 1.0), (i, -2.0), (i + 1, 1.0)], 0.0).unwrap(), "");
        }
        pop
    }

    /// Maximal cliques by brute force over all subsets.
    fn brute_force(n: usize, sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let adj = |a: usize, b: usize| sets.iter().any(|s| s.contains(&a) && s.contains(&b));
        let mut cl: Vec<Vec<usize>> = (1u32..(1 << n))
            .map(|m| (0..n).filter(|&v| m & (1 << v) != 0).collect::<Vec<_>>())
            .filter(|c: &Vec<usize>| c.iter().all(|&a| c.iter().all(|&b| a == b || adj(a, b))))
            .collect();
        let all = cl.clone();
        cl.retain(|c| !all.iter().any(|d| d.len() > c.len() && is_subset(c, d)));
        cl.sort();
        cl
    }

    #[test]
    fn banded_chain_gives_windows() {
        // 1-based interior rows 2, 3, 4 on five nodes
        let pop = chain(5, &[1, 2, 3]);
        let cs = csp_cliques(&pop).unwrap();
        assert_eq!(cs.cliques, vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4]]);
        let mut sorted = cs.cliques.clone();
        sorted.sort();
        let sets: Vec<Vec<usize>> = pop.eqs.iter().map(|h| h.support_vars().into_iter().collect()).collect();
        assert_eq!(sorted, brute_force(5, &sets));
        assert!(cs.running_intersection);
        assert_eq!(cs.eq_owner, vec![0, 1, 2]);
    }

    #[test]
    fn dense_and_independent() {
        let mut pop = PopInstance::new(3, Polynomial::zero(3), vec![0.0; 3], vec![1.0; 3]);
        pop.push_eq(Polynomial::parse("x0 x1 x2 - 1", 3).unwrap(), "");
        assert_eq!(csp_cliques(&pop).unwrap().cliques, vec![vec![0, 1, 2]]);

        let mut pop = PopInstance::new(2, Polynomial::zero(2), vec![0.0; 2], vec![1.0; 2]);
        pop.push_eq(Polynomial::parse("x0^2 - 1", 2).unwrap(), "");
        pop.push_eq(Polynomial::parse("x1 - 0.5", 2).unwrap(), "");
        let cs = csp_cliques(&pop).unwrap();
        assert_eq!(cs.cliques, vec![vec![0], vec![1]]);
        assert_eq!(cs.eq_owner, vec![0, 1]);
    }

    #[test]
    fn chordal_cliques_match_brute_force_on_cycles() {
        // a 5-cycle needs fill; every support must still sit in one clique
        let n = 5;
        let mut pop = PopInstance::new(n, Polynomial::zero(n), vec![0.0; n], vec![1.0; n]);
        for i in 0..n {
            pop.push_eq(Polynomial::linear(n, &[(i, 1.0), ((i + 1) % n, 1.0)], -1.0).unwrap(), "");
        }
        let cs = csp_cliques(&pop).unwrap();
        assert!(cs.running_intersection);
        assert!(cs.max_size() <= 3);
        for (h, &t) in pop.eqs.iter().zip(&cs.eq_owner) {
            assert!(h.support_vars().iter().all(|v| cs.cliques[t].contains(v)));
        }
    }

    #[test]
    fn owner_prefers_smallest_clique() {
        let cl = vec![vec![0, 1, 2], vec![1, 2]];
        let by_var = vec![vec![0], vec![0, 1], vec![0, 1]];
        assert_eq!(owner_of(&[1, 2], &cl, &by_var), Some(1));
        assert_eq!(owner_of(&[0], &cl, &by_var), Some(0));
    }

    #[test]
    fn supports_strategy_keeps_stencils() {
        let pop = chain(6, &[1, 2, 3, 4]);
        let cs = csp_cliques_with(&pop, CliqueStrategy::ConstraintSupports).unwrap();
        assert_eq!(cs.cliques.len(), 4);
        let d = csp_cliques_with(&pop, CliqueStrategy::Dense).unwrap();
        assert_eq!(d.cliques, vec![(0..6).collect::<Vec<_>>()]);
    }
}
