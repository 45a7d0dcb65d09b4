//! Independent residual check of a solution against its instance.

use nalgebra::DMatrix;

use crate::instance::SdpInstance;
use crate::ipm::ConicSolution;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyReport {
    /// max |e_rᵀy + f_r|
    pub eq_residual: f64,
    /// max over linear rows of the amount by which `a_rᵀy + b_r ≥ 0` fails
    pub lin_violation: f64,
    /// max over blocks of −λ_min(F0 + Σ y_i F_i), floored at 0
    pub psd_violation: f64,
    /// ‖c − Σ A_k*(X_k) − A_Lᵀx − Eᵀλ‖_∞
    pub dual_residual: f64,
    /// max over dual blocks of −λ_min(X_k) and −x_r, floored at 0
    pub dual_cone_violation: f64,
    /// |primal objective − dual objective|
    pub gap: f64,
    /// The same quantities scaled like the solver's relative residuals.
    pub primal_relative: f64,
    pub dual_relative: f64,
    pub gap_relative: f64,
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().min()
}

pub fn verify(sdp: &SdpInstance, sol: &ConicSolution) -> VerifyReport {
    let y = &sol.y;
    let mut r = VerifyReport::default();
    for row in &sdp.eq {
        r.eq_residual = r.eq_residual.max(row.eval(y).abs());
    }
    for row in &sdp.lin {
        r.lin_violation = r.lin_violation.max((-row.eval(y)).max(0.0));
    }
    let mut dual_obj = sdp.objective_constant;
    let mut grad = sdp.objective_dense();
    for (k, b) in sdp.blocks.iter().enumerate() {
        let vals = sdp.block_value(k, y);
        let m = DMatrix::from_row_slice(b.dim, b.dim, &vals);
        r.psd_violation = r.psd_violation.max((-min_eig(&m)).max(0.0));
        if let Some(x) = sol.multipliers.get(k) {
            r.dual_cone_violation = r.dual_cone_violation.max((-min_eig(x)).max(0.0));
            for e in &b.entries {
                let w = if e.i == e.j { x[(e.i, e.i)] } else { x[(e.i, e.j)] + x[(e.j, e.i)] };
                match e.var {
                    Some(v) => grad[v] -= e.val * w,
                    None => dual_obj -= e.val * w,
                }
            }
        }
    }
    for (row, &xr) in sdp.lin.iter().zip(&sol.lin_dual) {
        r.dual_cone_violation = r.dual_cone_violation.max((-xr).max(0.0));
        dual_obj -= row.constant * xr;
        for &(v, a) in &row.coefs {
            grad[v] -= a * xr;
        }
    }
    for (row, &l) in sdp.eq.iter().zip(&sol.eq_dual) {
        dual_obj -= row.constant * l;
        for &(v, a) in &row.coefs {
            grad[v] -= a * l;
        }
    }
    r.dual_residual = grad.iter().fold(0.0, |a, g| a.max(g.abs()));
    let pobj = sdp.objective_value(y);
    r.gap = (pobj - dual_obj).abs();

    let data = 1.0
        + sdp
            .blocks
            .iter()
            .flat_map(|b| b.entries.iter().filter(|e| e.var.is_none()).map(|e| e.val.abs()))
            .chain(sdp.lin.iter().map(|l| l.constant.abs()))
            .chain(sdp.eq.iter().map(|l| l.constant.abs()))
            .fold(0.0, f64::max);
    let cn = 1.0 + sdp.objective.iter().fold(0.0f64, |a, &(_, c)| a.max(c.abs()));
    r.primal_relative = r.eq_residual.max(r.lin_violation).max(r.psd_violation) / data;
    r.dual_relative = r.dual_residual / cn;
    r.gap_relative = r.gap / (1.0 + pobj.abs() + dual_obj.abs());
    r
}
