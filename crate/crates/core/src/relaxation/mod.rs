//! Sparse moment relaxation of a POP.
//!
//! Variables are mapped to `z ∈ [0,1]` (`x = lbd + (ubd − lbd) z`) before the
//! moment matrices are assembled, so every moment is bounded by one. One
//! moment block per clique, localizing blocks for inequalities and for the
//! redundant products `z(1 − z) ≥ 0`, and equalities as affine rows.

mod cliques;
mod presolve;

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdpsmooth_conic::{AffineRow, ConicSolution, LmiBlock, SdpInstance};
use sdpsmooth_poly::{Monomial, Polynomial};

pub use cliques::{csp_cliques, csp_cliques_with, has_running_intersection, CliqueSet, CliqueStrategy};
pub use presolve::{presolve, Presolved, VarMap};

use crate::discretize::PopInstance;
use crate::CoreError;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxOptions {
    pub perturb: f64,
    pub seed: u64,
    /// Add `z_s(1 − z_s) ≥ 0` localizers at order `w − 1`.
    pub product_bounds: bool,
    /// Work in `z ∈ [0,1]` instead of the original coordinates.
    pub normalize: bool,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { perturb: 1e-5, seed: 20_241, product_bounds: true, normalize: true }
    }
}

/// Position of every moment `y_α` in the SDP variable vector.
#[derive(Debug, Clone)]
pub struct MomentIndex {
    pub order: usize,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// `x_s = offset_s + scale_s · y_{e_s}`.
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
    pub lbd: Vec<f64>,
    pub ubd: Vec<f64>,
}

impl MomentIndex {
    fn new(order: usize, pop: &PopInstance, normalize: bool) -> Self {
        let n = pop.nvars;
        let (offset, scale) = if normalize {
            (pop.lbd.clone(), (0..n).map(|s| pop.ubd[s] - pop.lbd[s]).collect())
        } else {
            (vec![0.0; n], vec![1.0; n])
        };
        let mut idx = Self {
            order,
            monomials: Vec::new(),
            index: HashMap::new(),
            offset,
            scale,
            lbd: pop.lbd.clone(),
            ubd: pop.ubd.clone(),
        };
        idx.intern(Monomial::one());
        idx
    }

    fn intern(&mut self, m: Monomial) -> usize {
        if let Some(&k) = self.index.get(&m) {
            return k;
        }
        let k = self.monomials.len();
        self.index.insert(m.clone(), k);
        self.monomials.push(m);
        k
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn get(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn monomial(&self, k: usize) -> &Monomial {
        &self.monomials[k]
    }

    pub fn nvars(&self) -> usize {
        self.offset.len()
    }
}

/// An assembled relaxation with what is needed to interpret its solution.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub sdp: SdpInstance,
    pub index: MomentIndex,
    pub perturb: f64,
    /// Unit perturbation direction on the degree-one moments.
    pub direction: Vec<f64>,
}

impl Relaxation {
    /// Lower bound on the POP minimum from a solved relaxation: the smaller
    /// of the primal and dual values, minus the largest value the
    /// perturbation can take on the box.
    pub fn lower_bound(&self, sol: &ConicSolution) -> f64 {
        let n = self.index.nvars();
        let (lo, hi) = if self.index.scale.iter().zip(&self.index.offset).all(|(&s, &o)| o == 0.0 && s == 1.0) {
            (self.index.lbd.clone(), self.index.ubd.clone())
        } else {
            (vec![0.0; n], vec![1.0; n])
        };
        let pert: f64 = (0..n).map(|s| (self.direction[s] * lo[s]).max(self.direction[s] * hi[s])).sum();
        sol.objective_value.min(sol.dual_value) - self.perturb * pert
    }

    pub fn extract(&self, y: &[f64]) -> Vec<f64> {
        extract_point(y, &self.index)
    }
}

/// Degree-one moments mapped back to POP coordinates and clipped to the box.
pub fn extract_point(y: &[f64], idx: &MomentIndex) -> Vec<f64> {
    (0..idx.nvars())
        .map(|s| {
            let v = idx.get(&Monomial::var(s)).map_or(0.0, |k| y[k]);
            (idx.offset[s] + idx.scale[s] * v).clamp(idx.lbd[s], idx.ubd[s])
        })
        .collect()
}

/// All monomials of degree ≤ `d` in `vars`, graded.
pub fn monomial_basis(vars: &[usize], d: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    let mut layer: Vec<(Vec<(usize, u32)>, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..d {
        let mut next = Vec::new();
        for (m, start) in &layer {
            for (k, &v) in vars.iter().enumerate().skip(*start) {
                let mut f = m.clone();
                match f.last_mut() {
                    Some(last) if last.0 == v => last.1 += 1,
                    _ => f.push((v, 1)),
                }
                next.push((f, k));
            }
        }
        out.extend(next.iter().map(|(f, _)| Monomial::from_pairs(f.iter().copied())));
        layer = next;
    }
    out
}

fn to_unit_box(pop: &PopInstance, normalize: bool) -> Result<(Polynomial, Vec<Polynomial>, Vec<Polynomial>), CoreError> {
    if !normalize {
        return Ok((pop.objective.clone(), pop.eqs.clone(), pop.ineqs.clone()));
    }
    let n = pop.nvars;
    let subs: Vec<Polynomial> =
        (0..n).map(|s| Polynomial::linear(n, &[(s, pop.ubd[s] - pop.lbd[s])], pop.lbd[s])).collect::<Result<_, _>>()?;
    let map = |p: &Polynomial| -> Result<Polynomial, CoreError> { Ok(p.compose(&subs, n)?) };
    Ok((map(&pop.objective)?, pop.eqs.iter().map(map).collect::<Result<_, _>>()?, pop.ineqs.iter().map(map).collect::<Result<_, _>>()?))
}

fn row_of(p: &Polynomial, shift: &Monomial, idx: &mut MomentIndex) -> AffineRow {
    let mut row = AffineRow::default();
    let mut acc: HashMap<usize, f64> = HashMap::new();
    for (g, c) in p.terms() {
        let m = g.mul(shift);
        if m.is_one() {
            row.constant += c;
        } else {
            *acc.entry(idx.intern(m)).or_insert(0.0) += c;
        }
    }
    row.coefs = acc.into_iter().filter(|&(_, c)| c != 0.0).collect();
    row.coefs.sort_by_key(|&(v, _)| v);
    row
}

fn localizer(p: &Polynomial, basis: &[Monomial], idx: &mut MomentIndex) -> LmiBlock {
    let mut b = LmiBlock::new(basis.len());
    for a in 0..basis.len() {
        for c in a..basis.len() {
            let shift = basis[a].mul(&basis[c]);
            for (g, coef) in p.terms() {
                let m = g.mul(&shift);
                let var = idx.intern(m);
                b.push(Some(var), a, c, coef);
            }
        }
    }
    b
}

fn scaled(mut row: AffineRow) -> Option<AffineRow> {
    let s = row.coefs.iter().map(|c| c.1.abs()).fold(row.constant.abs(), f64::max);
    if row.coefs.is_empty() || s == 0.0 {
        return None;
    }
    for c in &mut row.coefs {
        c.1 /= s;
    }
    row.constant /= s;
    Some(row)
}

fn row_key(r: &AffineRow) -> Vec<u64> {
    let mut k = vec![r.constant.to_bits()];
    for &(v, a) in &r.coefs {
        k.push(v as u64);
        k.push(a.to_bits());
    }
    k
}

/// Seeded unit vector; variables with `lbd = ubd` get no component.
fn perturbation_direction(pop: &PopInstance, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r: Vec<f64> = (0..pop.nvars)
        .map(|s| {
            let v = rng.random_range(-1.0..1.0);
            if pop.lbd[s] < pop.ubd[s] {
                v
            } else {
                0.0
            }
        })
        .collect();
    let nrm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for v in &mut r {
            *v /= nrm;
        }
    }
    r
}

/// Builds with default options apart from the perturbation.
pub fn build_relaxation(
    pop: &PopInstance,
    cliques: &CliqueSet,
    w: usize,
    perturb: f64,
) -> Result<(SdpInstance, MomentIndex), CoreError> {
    let r = build_relaxation_with(pop, cliques, w, &RelaxOptions { perturb, ..Default::default() })?;
    Ok((r.sdp, r.index))
}

pub fn build_relaxation_with(
    pop: &PopInstance,
    cliques: &CliqueSet,
    w: usize,
    opts: &RelaxOptions,
) -> Result<Relaxation, CoreError> {
    pop.validate()?;
    let w_min = pop.min_order();
    if w < w_min {
        return Err(CoreError::Order { w, w_min });
    }
    let n = pop.nvars;
    if n == 0 {
        return Err(CoreError::Relaxation("the POP has no free variables".into()));
    }
    if cliques.eq_owner.len() != pop.eqs.len() || cliques.ineq_owner.len() != pop.ineqs.len() || cliques.var_owner.len() != n {
        return Err(CoreError::Relaxation("clique set does not belong to this POP".into()));
    }
    let inside = |p: &Polynomial, t: usize| p.support_vars().iter().all(|v| cliques.cliques[t].binary_search(v).is_ok());
    for (h, &t) in pop.eqs.iter().zip(&cliques.eq_owner).chain(pop.ineqs.iter().zip(&cliques.ineq_owner)) {
        if !inside(h, t) {
            return Err(CoreError::Relaxation("constraint support is not inside its owner clique".into()));
        }
    }
    let (objective, eqs, ineqs) = to_unit_box(pop, opts.normalize)?;
    let mut idx = MomentIndex::new(w, pop, opts.normalize);
    let mut sdp = SdpInstance::default();

    // moment blocks, which also register every moment
    for c in &cliques.cliques {
        let basis = monomial_basis(c, w);
        let mut b = LmiBlock::new(basis.len());
        for a in 0..basis.len() {
            for d in a..basis.len() {
                b.push(Some(idx.intern(basis[a].mul(&basis[d]))), a, d, 1.0);
            }
        }
        sdp.blocks.push(b);
    }

    // y_0 = 1, then equality localizers
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    sdp.eq.push(AffineRow { coefs: vec![(0, 1.0)], constant: -1.0 });
    for (h, &t) in eqs.iter().zip(&cliques.eq_owner) {
        let d = w - (h.degree() as usize).div_ceil(2);
        for mu in monomial_basis(&cliques.cliques[t], 2 * d) {
            if let Some(r) = scaled(row_of(h, &mu, &mut idx)) {
                if seen.insert(row_key(&r)) {
                    sdp.eq.push(r);
                }
            } else if h.constant_term().abs() > 0.0 && h.degree() == 0 {
                return Err(CoreError::Relaxation("a constant equality is violated".into()));
            }
        }
    }

    // inequality localizers
    let push_localizer = |g: &Polynomial, t: usize, order_g: usize, sdp: &mut SdpInstance, idx: &mut MomentIndex| {
        let d = w - order_g;
        let basis = monomial_basis(&cliques.cliques[t], d);
        if basis.len() == 1 {
            sdp.lin.push(row_of(g, &Monomial::one(), idx));
        } else {
            sdp.blocks.push(localizer(g, &basis, idx));
        }
    };
    for (g, &t) in ineqs.iter().zip(&cliques.ineq_owner) {
        push_localizer(g, t, (g.degree() as usize).div_ceil(2), &mut sdp, &mut idx);
    }
    if opts.product_bounds {
        for s in 0..n {
            let (lo, hi) = if opts.normalize { (0.0, 1.0) } else { (pop.lbd[s], pop.ubd[s]) };
            let x = Polynomial::var(n, s)?;
            let g = x.add_constant(-lo).mul(&x.scale(-1.0).add_constant(hi))?;
            push_localizer(&g, cliques.var_owner[s], 1, &mut sdp, &mut idx);
        }
    }

    // box on degree-one moments
    for s in 0..n {
        let k = idx.intern(Monomial::var(s));
        let (lo, hi) = if opts.normalize { (0.0, 1.0) } else { (pop.lbd[s], pop.ubd[s]) };
        sdp.lin.push(AffineRow { coefs: vec![(k, 1.0)], constant: -lo });
        sdp.lin.push(AffineRow { coefs: vec![(k, -1.0)], constant: hi });
    }

    // objective and perturbation
    let direction = perturbation_direction(pop, opts.seed);
    let mut obj: HashMap<usize, f64> = HashMap::new();
    for (m, c) in objective.terms() {
        if m.is_one() {
            sdp.objective_constant += c;
            continue;
        }
        let k = idx.get(m).ok_or_else(|| CoreError::Relaxation(format!("objective monomial {m:?} lies in no clique")))?;
        *obj.entry(k).or_insert(0.0) += c;
    }
    if opts.perturb != 0.0 {
        for (s, r) in direction.iter().enumerate() {
            *obj.entry(idx.intern(Monomial::var(s))).or_insert(0.0) += opts.perturb * r;
        }
    }
    sdp.objective = obj.into_iter().filter(|&(_, c)| c != 0.0).collect();
    sdp.objective.sort_by_key(|&(v, _)| v);
    sdp.nvars = idx.len();
    sdp.validate()?;
    Ok(Relaxation { sdp, index: idx, perturb: opts.perturb, direction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sdpsmooth_conic::{solve, SolverSettings};

    fn circle_pop() -> PopInstance {
        let mut pop = PopInstance::new(1, Polynomial::parse("x0", 1).unwrap(), vec![0.0], vec![2.0]);
        pop.push_eq(Polynomial::parse("x0^2 - 1", 1).unwrap(), "circle");
        pop
    }

    fn solve_at(pop: &PopInstance, w: usize, opts: &RelaxOptions) -> (f64, Vec<f64>) {
        let cs = csp_cliques(pop).unwrap();
        let r = build_relaxation_with(pop, &cs, w, opts).unwrap();
        let sol = solve(&r.sdp, &SolverSettings::default()).unwrap();
        assert!(sol.status.is_usable(), "{:?}", sol.status);
        (r.lower_bound(&sol), r.extract(&sol.y))
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(monomial_basis(&[3, 5, 7], 1).len(), 4);
        assert_eq!(monomial_basis(&[3, 5, 7], 2).len(), 10);
        assert_eq!(monomial_basis(&[1, 2], 3).len(), 10);
        let b = monomial_basis(&[0, 1], 2);
        assert_eq!(b[3], Monomial::from_pairs([(0, 2)]));
        assert_eq!(b[4], Monomial::from_pairs([(0, 1), (1, 1)]));
    }

    #[test]
    fn circle_example_across_orders() {
        // hand oracle: order 1 gives 0 without and 0.5 with the product
        // bound, order 2 is exact
        let plain = RelaxOptions { perturb: 0.0, product_bounds: false, normalize: false, ..Default::default() };
        assert!(solve_at(&circle_pop(), 1, &plain).0.abs() < 1e-6);
        let prod = RelaxOptions { perturb: 0.0, normalize: false, ..Default::default() };
        assert!((solve_at(&circle_pop(), 1, &prod).0 - 0.5).abs() < 1e-6);
        let (lb, x) = solve_at(&circle_pop(), 2, &RelaxOptions::default());
        assert!((lb - 1.0).abs() < 1e-4, "{lb}");
        assert!((x[0] - 1.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn order_error_reports_minimum() {
        let mut pop = circle_pop();
        pop.eqs[0] = Polynomial::parse("x0^3 - 1", 1).unwrap();
        let cs = csp_cliques(&pop).unwrap();
        match build_relaxation(&pop, &cs, 1, 0.0) {
            Err(CoreError::Order { w: 1, w_min: 2 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unconstrained_square() {
        let pop = PopInstance::new(1, Polynomial::parse("x0^2", 1).unwrap(), vec![-1.0], vec![1.0]);
        let (lb, x) = solve_at(&pop, 1, &RelaxOptions { perturb: 0.0, ..Default::default() });
        assert!(lb.abs() < 1e-6 && x[0].abs() < 1e-4, "{lb} {x:?}");
    }

    #[test]
    fn fixed_point_is_extracted() {
        let pop = PopInstance::new(1, Polynomial::parse("x0", 1).unwrap(), vec![3.0], vec![3.0]);
        let (lb, x) = solve_at(&pop, 1, &RelaxOptions::default());
        assert!((x[0] - 3.0).abs() < 1e-9 && (lb - 3.0).abs() < 1e-6);
    }

    #[test]
    fn linear_stencil_blocks_are_four_by_four() {
        let p = crate::problems::preset(crate::problems::PresetName::LinearOde);
        let g = crate::problems::Grid::new(p.domain, 8, 1).unwrap();
        let pop = crate::discretize::transcribe(&p, &g).unwrap();
        let cs = csp_cliques(&pop).unwrap();
        assert!(cs.cliques.iter().all(|c| c.len() == 3));
        let (sdp, _) = build_relaxation(&pop, &cs, 1, 1e-5).unwrap();
        assert!(sdp.blocks.iter().all(|b| b.dim == 4));
        assert_eq!(sdp.blocks.len(), 6);
    }

    #[test]
    fn shared_monomials_are_glued() {
        let n = 4;
        let mut pop = PopInstance::new(n, Polynomial::zero(n), vec![0.0; n], vec![1.0; n]);
        pop.push_eq(Polynomial::parse("x0 + x1 + x2 - 1", n).unwrap(), "");
        pop.push_eq(Polynomial::parse("x1 + x2 + x3 - 1", n).unwrap(), "");
        let cs = csp_cliques(&pop).unwrap();
        let (sdp, idx) = build_relaxation(&pop, &cs, 1, 0.0).unwrap();
        // per-clique moment counts 10 + 10, shared {1, x1, x2, x1², x1x2, x2²}
        assert_eq!(idx.len(), 14);
        assert_eq!(sdp.nvars, 14);
        let k = idx.get(&Monomial::from_pairs([(1, 1), (2, 1)])).unwrap();
        let uses = sdp.blocks.iter().filter(|b| b.entries.iter().any(|e| e.var == Some(k))).count();
        assert_eq!(uses, 2);
    }
}
