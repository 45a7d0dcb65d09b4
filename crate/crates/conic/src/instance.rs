//! Block-structured SDP in inequality (LMI) form:
//!
//! ```text
//! minimize    cᵀy + c0
//! subject to  F0_k + Σ_i y_i F_ik ≽ 0      for every block k
//!             a_rᵀy + b_r ≥ 0              linear rows
//!             e_rᵀy + f_r = 0              equality rows
//! ```
//!
//! Text format, one record per line (`#` starts a comment):
//!
//! ```text
//! sdp 1
//! nvars <n>
//! objconst <c0>
//! obj <var> <coef>
//! block <dim>
//! f <var|c> <i> <j> <value>      entry of the current block, i <= j
//! lin <const> <var>:<coef> ...
//! eq <const> <var>:<coef> ...
//! ```

use std::fmt::Write as _;

use crate::ConicError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntry {
    /// `None` for the constant matrix F0.
    pub var: Option<usize>,
    pub i: usize,
    pub j: usize,
    pub val: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LmiBlock {
    pub dim: usize,
    pub entries: Vec<BlockEntry>,
}

impl LmiBlock {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    /// Adds `val` at `(i, j)` and its mirror; the order of `i, j` is free.
    pub fn push(&mut self, var: Option<usize>, i: usize, j: usize, val: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if val != 0.0 {
            self.entries.push(BlockEntry { var, i, j, val });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineRow {
    pub coefs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineRow {
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.constant + self.coefs.iter().map(|&(v, a)| a * y[v]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SdpInstance {
    pub nvars: usize,
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub blocks: Vec<LmiBlock>,
    /// Rows required to be nonnegative.
    pub lin: Vec<AffineRow>,
    /// Rows required to vanish.
    pub eq: Vec<AffineRow>,
}

impl SdpInstance {
    pub fn new(nvars: usize) -> Self {
        Self { nvars, ..Default::default() }
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(v, c)| c * y[v]).sum::<f64>()
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.nvars];
        for &(v, a) in &self.objective {
            c[v] += a;
        }
        c
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let bad = |m: String| Err(ConicError::Malformed(m));
        for &(v, a) in &self.objective {
            if v >= self.nvars || !a.is_finite() {
                return bad(format!("objective entry ({v}, {a})"));
            }
        }
        if !self.objective_constant.is_finite() {
            return bad("objective constant".into());
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.dim == 0 {
                return bad(format!("block {k} has dimension 0"));
            }
            for e in &b.entries {
                if e.i > e.j || e.j >= b.dim || e.var.is_some_and(|v| v >= self.nvars) || !e.val.is_finite() {
                    return bad(format!("block {k} entry {e:?}"));
                }
            }
        }
        for (name, rows) in [("lin", &self.lin), ("eq", &self.eq)] {
            for (r, row) in rows.iter().enumerate() {
                if !row.constant.is_finite() || row.coefs.iter().any(|&(v, a)| v >= self.nvars || !a.is_finite()) {
                    return bad(format!("{name} row {r}"));
                }
            }
        }
        Ok(())
    }

    /// Block `k` evaluated at `y`, as a dense row-major `dim × dim` array.
    pub fn block_value(&self, k: usize, y: &[f64]) -> Vec<f64> {
        let b = &self.blocks[k];
        let n = b.dim;
        let mut m = vec![0.0; n * n];
        for e in &b.entries {
            let v = e.val * e.var.map_or(1.0, |v| y[v]);
            m[e.i * n + e.j] += v;
            if e.i != e.j {
                m[e.j * n + e.i] += v;
            }
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sdp 1");
        let _ = writeln!(s, "nvars {}", self.nvars);
        let _ = writeln!(s, "objconst {}", self.objective_constant);
        for &(v, a) in &self.objective {
            let _ = writeln!(s, "obj {v} {a}");
        }
        for b in &self.blocks {
            let _ = writeln!(s, "block {}", b.dim);
            for e in &b.entries {
                match e.var {
                    Some(v) => {
                        let _ = writeln!(s, "f {v} {} {} {}", e.i, e.j, e.val);
                    }
                    None => {
                        let _ = writeln!(s, "f c {} {} {}", e.i, e.j, e.val);
                    }
                }
            }
        }
        for (tag, rows) in [("lin", &self.lin), ("eq", &self.eq)] {
            for r in rows {
                let _ = write!(s, "{tag} {}", r.constant);
                for &(v, a) in &r.coefs {
                    let _ = write!(s, " {v}:{a}");
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ConicError> {
        let mut sdp = SdpInstance::default();
        let mut seen_header = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| ConicError::Format { line: ln + 1, msg: m.to_string() };
            let num = |t: Option<&str>| -> Result<f64, ConicError> {
                t.and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| err("expected a number"))
            };
            let idx = |t: Option<&str>| -> Result<usize, ConicError> {
                t.and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| err("expected an index"))
            };
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap_or("");
            if !seen_header {
                if head != "sdp" || tok.next() != Some("1") {
                    return Err(err("missing `sdp 1` header"));
                }
                seen_header = true;
                continue;
            }
            match head {
                "nvars" => sdp.nvars = idx(tok.next())?,
                "objconst" => sdp.objective_constant = num(tok.next())?,
                "obj" => {
                    let v = idx(tok.next())?;
                    sdp.objective.push((v, num(tok.next())?));
                }
                "block" => sdp.blocks.push(LmiBlock::new(idx(tok.next())?)),
                "f" => {
                    let var = match tok.next() {
                        Some("c") => None,
                        t => Some(idx(t)?),
                    };
                    let (i, j) = (idx(tok.next())?, idx(tok.next())?);
                    let val = num(tok.next())?;
                    let b = sdp.blocks.last_mut().ok_or_else(|| err("entry before any block"))?;
                    b.entries.push(BlockEntry { var, i, j, val });
                }
                "lin" | "eq" => {
                    let mut row = AffineRow { constant: num(tok.next())?, coefs: Vec::new() };
                    for t in tok.by_ref() {
                        let (v, a) = t.split_once(':').ok_or_else(|| err("expected var:coef"))?;
                        row.coefs.push((idx(Some(v))?, num(Some(a))?));
                    }
                    if head == "lin" {
                        sdp.lin.push(row);
                    } else {
                        sdp.eq.push(row);
                    }
                }
                other => return Err(err(&format!("unknown record `{other}`"))),
            }
            if tok.next().is_some() {
                return Err(err("trailing tokens"));
            }
        }
        if !seen_header {
            return Err(ConicError::Format { line: 0, msg: "empty document".into() });
        }
        sdp.validate()?;
        Ok(sdp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SdpInstance {
        let mut s = SdpInstance::new(2);
        s.objective = vec![(0, 1.0), (1, -0.5)];
        s.objective_constant = 0.25;
        let mut b = LmiBlock::new(2);
        b.push(Some(0), 0, 0, 1.0);
        b.push(None, 0, 1, 1.0);
        b.push(Some(1), 1, 1, 1.0);
        s.blocks.push(b);
        s.lin.push(AffineRow { coefs: vec![(0, 1.0)], constant: 3.0 });
        s.eq.push(AffineRow { coefs: vec![(0, 1.0), (1, -1.0)], constant: 0.1 });
        s
    }

    #[test]
    fn text_round_trip() {
        let s = sample();
        let back = SdpInstance::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(SdpInstance::from_text("").is_err());
        assert!(SdpInstance::from_text("sdp 1\nnvars 1\nf 0 0 0 1\n").is_err());
        assert!(SdpInstance::from_text("sdp 1\nnvars 1\nblock 2\nf 3 0 0 1\n").is_err());
        assert!(SdpInstance::from_text("sdp 1\nnvars 1\nlin 0 0=1\n").is_err());
    }

    #[test]
    fn block_value_is_symmetric() {
        let s = sample();
        let m = s.block_value(0, &[2.0, 3.0]);
        assert_eq!(m, vec![2.0, 1.0, 1.0, 3.0]);
    }
}
