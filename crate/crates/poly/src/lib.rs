//! Sparse multivariate polynomials with `f64` coefficients.
//!
//! Variables are addressed by 0-based index into an ambient space of
//! `nvars` variables. Terms are kept in graded-lexicographic order, which is
//! also the order used by the text form (highest term first).

mod parse;

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::ParseError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: {left} vs {right} variables")]
    DimensionMismatch { left: usize, right: usize },
    #[error("point has length {got}, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error("variable index {var} out of range for {nvars} variables")]
    VarOutOfRange { var: usize, nvars: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A monomial as sorted `(variable, exponent)` pairs with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: usize) -> Self {
        Self { factors: vec![(v, 1)] }
    }

    /// Builds a monomial from arbitrary pairs; repeated variables are merged
    /// and zero exponents dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Self { factors: map.into_iter().filter(|&(_, e)| e > 0).collect() }
    }

    /// From a dense exponent vector.
    pub fn from_exponents(exps: &[u32]) -> Self {
        Self {
            factors: exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, &e)| (v, e)).collect(),
        }
    }

    pub fn factors(&self) -> &[(usize, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent(&self, v: usize) -> u32 {
        match self.factors.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => self.factors[i].1,
            Err(_) => 0,
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        self.factors.last().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { factors: out }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().map(|&(v, e)| x[v].powi(e as i32)).product()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|&(v, _)| v)
    }

    /// Relabels variables; the map must be injective on this monomial's support.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Monomial {
        Monomial::from_pairs(self.factors.iter().map(|&(v, e)| (map(v), e)))
    }
}

impl Ord for Monomial {
    /// Graded lex with x0 > x1 > ...
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.factors.iter().zip(&other.factors) {
            if a.0 != b.0 {
                // the one carrying the smaller variable index is larger
                return if a.0 < b.0 { Ordering::Greater } else { Ordering::Less };
            }
            if a.1 != b.1 {
                return a.1.cmp(&b.1);
            }
        }
        self.factors.len().cmp(&other.factors.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in `nvars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(nvars: usize, v: usize) -> Result<Self, PolyError> {
        if v >= nvars {
            return Err(PolyError::VarOutOfRange { var: v, nvars });
        }
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(v), 1.0);
        Ok(p)
    }

    /// Linear form `c + Σ a_k x_{v_k}`.
    pub fn linear(nvars: usize, coeffs: &[(usize, f64)], c: f64) -> Result<Self, PolyError> {
        let mut p = Self::constant(nvars, c);
        for &(v, a) in coeffs {
            if v >= nvars {
                return Err(PolyError::VarOutOfRange { var: v, nvars });
            }
            p.add_term(Monomial::var(v), a);
        }
        Ok(p)
    }

    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Monomial, f64)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            if let Some(v) = m.max_var() {
                if v >= nvars {
                    return Err(PolyError::VarOutOfRange { var: v, nvars });
                }
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&Monomial::one())
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Adds `c·m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = *e.get() + c;
                if s == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_dims(&self, q: &Polynomial) -> Result<(), PolyError> {
        if self.nvars != q.nvars {
            return Err(PolyError::DimensionMismatch { left: self.nvars, right: q.nvars });
        }
        Ok(())
    }

    pub fn add(&self, q: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dims(q)?;
        let mut out = self.clone();
        for (m, &c) in &q.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, q: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&q.scale(-1.0))
    }

    pub fn mul(&self, q: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dims(q)?;
        let mut out = Polynomial::zero(self.nvars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &q.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.nvars, 1.0);
        for _ in 0..e {
            out = out.mul(self).expect("same dims");
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        if s != 0.0 {
            for (m, &c) in &self.terms {
                out.add_term(m.clone(), c * s);
            }
        }
        out
    }

    pub fn add_constant(&self, c: f64) -> Polynomial {
        let mut out = self.clone();
        out.add_term(Monomial::one(), c);
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::PointLength { expected: self.nvars, got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the length check; panics on short input.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c * m.eval(x)).sum()
    }

    pub fn support_vars(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    /// Re-inserts every term, dropping zeros. A no-op on values built through
    /// the public API.
    pub fn normalized(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, &c) in &self.terms {
            out.add_term(Monomial::from_pairs(m.factors.iter().copied()), c);
        }
        out
    }

    /// Partial derivative with respect to `v`.
    pub fn derivative(&self, v: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, &c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let f = m.factors.iter().map(|&(w, k)| if w == v { (w, k - 1) } else { (w, k) });
            out.add_term(Monomial::from_pairs(f), c * e as f64);
        }
        out
    }

    /// Substitutes `subs[k]` for variable `k`; the result lives in
    /// `nvars_out` variables.
    pub fn compose(&self, subs: &[Polynomial], nvars_out: usize) -> Result<Polynomial, PolyError> {
        if subs.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { left: self.nvars, right: subs.len() });
        }
        for s in subs {
            if s.nvars != nvars_out {
                return Err(PolyError::DimensionMismatch { left: nvars_out, right: s.nvars });
            }
        }
        let mut out = Polynomial::zero(nvars_out);
        for (m, &c) in &self.terms {
            let mut t = Polynomial::constant(nvars_out, c);
            for &(v, e) in &m.factors {
                t = t.mul(&subs[v].pow(e))?;
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Moves the polynomial into a space of `nvars_out` variables, sending
    /// variable `k` to `map(k)`.
    pub fn relabel(&self, nvars_out: usize, map: impl Fn(usize) -> usize) -> Result<Polynomial, PolyError> {
        let mut out = Polynomial::zero(nvars_out);
        for (m, &c) in &self.terms {
            let r = m.relabel(&map);
            if let Some(v) = r.max_var() {
                if v >= nvars_out {
                    return Err(PolyError::VarOutOfRange { var: v, nvars: nvars_out });
                }
            }
            out.add_term(r, c);
        }
        Ok(out)
    }

    /// Parses the text form with variables written `x0`, `x1`, ...
    pub fn parse(s: &str, nvars: usize) -> Result<Polynomial, PolyError> {
        Self::parse_with(s, nvars, |name| {
            name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok())
        })
    }

    /// Parses with a custom symbol table. Unknown identifiers are errors.
    pub fn parse_with(
        s: &str,
        nvars: usize,
        resolve: impl Fn(&str) -> Option<usize>,
    ) -> Result<Polynomial, PolyError> {
        parse::parse(s, nvars, &resolve)
    }

    /// Text form using custom variable names.
    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> impl fmt::Display + 'a {
        Named { p: self, names }
    }
}

struct Named<'a> {
    p: &'a Polynomial,
    names: &'a dyn Fn(usize) -> String,
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(self.p, f, self.names)
    }
}

fn write_poly(p: &Polynomial, f: &mut fmt::Formatter<'_>, names: &dyn Fn(usize) -> String) -> fmt::Result {
    if p.terms.is_empty() {
        return write!(f, "0");
    }
    for (k, (m, &c)) in p.terms.iter().rev().enumerate() {
        let mag = if k == 0 {
            c
        } else if c < 0.0 {
            write!(f, " - ")?;
            -c
        } else {
            write!(f, " + ")?;
            c
        };
        write!(f, "{mag}")?;
        for (j, &(v, e)) in m.factors.iter().enumerate() {
            write!(f, "{}{}", if j == 0 { " * " } else { " " }, names(v))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(self, f, &|v| format!("x{v}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    #[test]
    fn add_cancels() {
        let s = p("x0 + 1", 1).add(&p("-x0 + 2", 1)).unwrap();
        assert_eq!(s, Polynomial::constant(1, 3.0));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn add_zero_and_merge() {
        let a = p("x0^2 + 3 x1", 2);
        assert_eq!(a.add(&Polynomial::zero(2)).unwrap(), a);
        let d = p("x0^2", 1).add(&p("x0^2", 1)).unwrap();
        assert_eq!(d.coeff(&Monomial::from_exponents(&[2])), 2.0);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p("x0 + 1", 1).mul(&p("x0 - 1", 1)).unwrap(), p("x0^2 - 1", 1));
        assert_eq!(p("x0", 1).mul(&p("1 - x0^2", 1)).unwrap(), p("x0 - x0^3", 1));
        let a = p("2 x0 x1 - 5", 2);
        assert_eq!(a.mul(&Polynomial::constant(2, 1.0)).unwrap(), a);
    }

    #[test]
    fn dimension_mismatch() {
        let e = p("x0", 1).add(&p("x1", 2)).unwrap_err();
        assert_eq!(e, PolyError::DimensionMismatch { left: 1, right: 2 });
        assert!(p("x0", 1).mul(&p("x1", 2)).is_err());
        assert!(p("x0", 1).evaluate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(p("x0^2 - 1", 1).evaluate(&[2.0]).unwrap(), 3.0);
        assert_eq!(Polynomial::zero(3).evaluate(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(p("x0 - x0^3", 1).evaluate(&[0.5]).unwrap(), 0.375);
    }

    #[test]
    fn support_examples() {
        assert_eq!(p("x0^2 + x2", 3).support_vars(), BTreeSet::from([0, 2]));
        assert!(Polynomial::constant(2, 5.0).support_vars().is_empty());
        assert_eq!(p("x0 - x0^3", 1).support_vars(), BTreeSet::from([0]));
    }

    #[test]
    fn degree_of_zero_is_zero() {
        assert_eq!(Polynomial::zero(4).degree(), 0);
        assert_eq!(p("x0 x1^2 + x3", 4).degree(), 3);
    }

    #[test]
    fn grlex_text_order() {
        let q = p("1 + x1 + x0 + x1^2 + x0 x1 + x0^2", 2);
        assert_eq!(q.to_string(), "1 * x0^2 + 1 * x0 x1 + 1 * x1^2 + 1 * x0 + 1 * x1 + 1");
        assert_eq!(p("x0^2 - 1", 1).to_string(), "1 * x0^2 - 1");
        assert_eq!(Polynomial::zero(1).to_string(), "0");
    }

    #[test]
    fn text_round_trip() {
        let q = p("-0.1 x0^3 x2 + 1e-7 x1 - 3.25", 3);
        assert_eq!(p(&q.to_string(), 3), q);
    }

    #[test]
    fn derivative_and_compose() {
        let q = p("x0^3 x1 + 2 x1", 2);
        assert_eq!(q.derivative(0), p("3 x0^2 x1", 2));
        assert_eq!(q.derivative(1), p("x0^3 + 2", 2));
        // u <- v + 2 in u' = u  style substitution
        let u = p("x0 - 2", 1);
        let g = p("x0^2", 1).compose(&[u], 1).unwrap();
        assert_eq!(g, p("x0^2 - 4 x0 + 4", 1));
    }

    #[test]
    fn relabel_moves_vars() {
        let q = p("x0 x1^2", 2).relabel(5, |v| v + 3).unwrap();
        assert_eq!(q, p("x3 x4^2", 5));
        assert!(p("x1", 2).relabel(1, |v| v).is_err());
    }

    #[test]
    fn normalization_idempotent() {
        let q = p("x0^2 x1 - 3 x2 + 0.5", 3);
        assert_eq!(q.normalized(), q);
        assert_eq!(q.normalized().normalized(), q.normalized());
    }

    #[test]
    fn monomial_order_is_graded() {
        let a = Monomial::from_exponents(&[0, 3]);
        let b = Monomial::from_exponents(&[2, 0]);
        let c = Monomial::from_exponents(&[1, 2]);
        assert!(a > b);
        assert!(c > a);
        assert_eq!(Monomial::from_pairs([(1, 1), (1, 2), (0, 0)]), Monomial::from_exponents(&[0, 3]));
    }
}
