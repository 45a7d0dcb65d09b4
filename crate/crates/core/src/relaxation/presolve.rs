//! Elimination of variables fixed by univariate linear equalities.

use sdpsmooth_poly::Polynomial;

use crate::discretize::PopInstance;
use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarMap {
    Fixed(f64),
    Free(usize),
}

#[derive(Debug, Clone)]
pub struct Presolved {
    pub pop: PopInstance,
    /// For each original variable, its value or reduced index.
    pub map: Vec<VarMap>,
}

impl Presolved {
    /// Original-space point from a reduced one.
    pub fn expand(&self, z: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match *m {
                VarMap::Fixed(v) => v,
                VarMap::Free(k) => z[k],
            })
            .collect()
    }

    /// Reduced point from an original one.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.pop.nvars];
        for (s, m) in self.map.iter().enumerate() {
            if let VarMap::Free(k) = *m {
                z[k] = x[s];
            }
        }
        z
    }

    pub fn fixed_count(&self) -> usize {
        self.map.iter().filter(|m| matches!(m, VarMap::Fixed(_))).count()
    }
}

fn tol(scale: f64) -> f64 {
    1e-9 * (1.0 + scale)
}

/// Repeatedly fixes variables appearing alone and linearly in an equality
/// (`a·x + b = 0`) and substitutes them everywhere.
pub fn presolve(pop: &PopInstance) -> Result<Presolved, CoreError> {
    pop.validate()?;
    let n = pop.nvars;
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    let mut eqs = pop.eqs.clone();
    let mut labels = pop.eq_labels.clone();
    let mut ineqs = pop.ineqs.clone();
    let mut objective = pop.objective.clone();
    loop {
        let mut newly = Vec::new();
        for (h, l) in eqs.iter().zip(&labels) {
            let sup = h.support_vars();
            if sup.len() != 1 || h.degree() != 1 {
                continue;
            }
            let v = *sup.iter().next().unwrap();
            if fixed[v].is_some() {
                continue;
            }
            let a = h.coeff(&sdpsmooth_poly::Monomial::var(v));
            let val = -h.constant_term() / a;
            let (lo, hi) = (pop.lbd[v], pop.ubd[v]);
            if val < lo - tol(lo.abs()) || val > hi + tol(hi.abs()) {
                return Err(CoreError::Relaxation(format!(
                    "{l} fixes {} = {val}, outside its bounds [{lo}, {hi}]",
                    pop.names[v]
                )));
            }
            fixed[v] = Some(val.clamp(lo, hi));
            newly.push(v);
        }
        if newly.is_empty() {
            break;
        }
        let subs: Vec<Polynomial> = (0..n)
            .map(|v| match fixed[v] {
                Some(c) => Polynomial::constant(n, c),
                None => Polynomial::var(n, v).unwrap(),
            })
            .collect();
        let touches = |p: &Polynomial| p.support_vars().iter().any(|v| newly.contains(v));
        let sub = |p: &Polynomial| -> Result<Polynomial, CoreError> {
            Ok(if touches(p) { p.compose(&subs, n)? } else { p.clone() })
        };
        for h in eqs.iter_mut().chain(ineqs.iter_mut()) {
            *h = sub(h)?;
        }
        objective = sub(&objective)?;
        let mut keep_e = Vec::new();
        let mut keep_l = Vec::new();
        for (h, l) in eqs.into_iter().zip(labels) {
            if h.degree() == 0 {
                let c = h.constant_term();
                if c.abs() > tol(h.max_abs_coeff()) {
                    return Err(CoreError::Relaxation(format!("{l} is violated by {c} after presolve")));
                }
            } else {
                keep_e.push(h);
                keep_l.push(l);
            }
        }
        eqs = keep_e;
        labels = keep_l;
        let mut keep_i = Vec::new();
        for g in ineqs {
            if g.degree() == 0 {
                if g.constant_term() < -tol(0.0) {
                    return Err(CoreError::Relaxation("an inequality is violated after presolve".into()));
                }
            } else {
                keep_i.push(g);
            }
        }
        ineqs = keep_i;
    }
    let mut map = Vec::with_capacity(n);
    let mut back = Vec::new();
    for (v, f) in fixed.iter().enumerate() {
        match f {
            Some(c) => map.push(VarMap::Fixed(*c)),
            None => {
                map.push(VarMap::Free(back.len()));
                back.push(v);
            }
        }
    }
    let m = back.len();
    let fwd = |v: usize| match map[v] {
        VarMap::Free(k) => k,
        VarMap::Fixed(_) => unreachable!("fixed variables were substituted"),
    };
    let re = |p: &Polynomial| p.relabel(m, fwd);
    let mut out = PopInstance::new(m, re(&objective)?, back.iter().map(|&v| pop.lbd[v]).collect(), back.iter().map(|&v| pop.ubd[v]).collect());
    out.names = back.iter().map(|&v| pop.names[v].clone()).collect();
    for (h, l) in eqs.iter().zip(labels) {
        out.push_eq(re(h)?, l);
    }
    out.ineqs = ineqs.iter().map(re).collect::<Result<_, _>>()?;
    Ok(Presolved { pop: out, map })
}
