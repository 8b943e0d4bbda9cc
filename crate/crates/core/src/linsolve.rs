//! Conjugate gradients and preconditioned MINRES.

use serde::{Deserialize, Serialize};

use crate::sparse::{axpy, dot, norm, SparseMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Defaults to 10·n when absent.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rel_tol: 1e-10, abs_tol: 1e-14, max_iter: None, preconditioner: Preconditioner::Jacobi }
    }
}

impl SolverConfig {
    pub fn with_tol(rel_tol: f64) -> Self {
        SolverConfig { rel_tol, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_iter == Some(0) {
            return Err(Error::Degenerate("solver tolerances must be positive and max_iter at least 1".into()));
        }
        Ok(())
    }

    fn iter_limit(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }

    fn target(&self, bnorm: f64) -> f64 {
        (self.rel_tol * bnorm).max(self.abs_tol)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    pub converged: bool,
}

impl SolveStats {
    pub(crate) fn merge(&mut self, other: SolveStats) {
        self.iterations += other.iterations;
        self.residual = self.residual.max(other.residual);
        self.converged &= other.converged;
    }
}

fn jacobi(diag: &[f64]) -> Vec<f64> {
    diag.iter().map(|&d| if d.abs() > 0.0 { 1.0 / d.abs() } else { 1.0 }).collect()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

fn project_out(x: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(q, x);
        axpy(-c, q, x);
    }
}

/// CG for symmetric positive (semi)definite `a`. With a nullspace basis
/// (orthonormal columns) the right-hand side is projected first and the
/// solution is returned orthogonal to it.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], cfg: &SolverConfig, nullspace: Option<&[Vec<f64>]>) -> Result<(Vec<f64>, SolveStats)> {
    cfg.validate()?;
    let n = a.rows();
    check_len(n, a.cols())?;
    check_len(n, b.len())?;
    let ns = nullspace.unwrap_or(&[]);
    for q in ns {
        check_len(n, q.len())?;
    }
    let mut rhs = b.to_vec();
    project_out(&mut rhs, ns);
    let bnorm = norm(&rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, residual: 0.0, converged: true }));
    }
    let pinv = match cfg.preconditioner {
        Preconditioner::Jacobi => jacobi(&a.diag()),
        Preconditioner::None => vec![1.0; n],
    };
    let target = cfg.target(bnorm);
    let limit = cfg.iter_limit(n);
    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut total = 0;
    let mut ap = vec![0.0; n];
    // restarts guard against drift between the recursive and the true residual
    for _ in 0..4 {
        let mut z: Vec<f64> = r.iter().zip(&pinv).map(|(r, p)| r * p).collect();
        project_out(&mut z, ns);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while total < limit && norm(&r) > target && rz > 0.0 {
            a.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &ap, &mut r);
            z.iter_mut().zip(r.iter().zip(&pinv)).for_each(|(z, (r, p))| *z = r * p);
            project_out(&mut z, ns);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
            total += 1;
        }
        project_out(&mut x, ns);
        r = a.mul_vec(&x);
        r.iter_mut().zip(&rhs).for_each(|(r, b)| *r = b - *r);
        project_out(&mut r, ns);
        if norm(&r) <= target || total >= limit {
            break;
        }
    }
    let res = norm(&r);
    let stats = SolveStats { iterations: total, residual: res / bnorm, converged: res <= target };
    if !stats.converged {
        return Err(Error::NonConvergence { stage: "cg".into(), stats });
    }
    Ok((x, stats))
}

/// Preconditioned MINRES for a symmetric (possibly indefinite or singular)
/// system; `pinv` holds the inverse of a positive diagonal preconditioner.
pub fn minres(k: &SparseMatrix, rhs: &[f64], pinv: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats)> {
    cfg.validate()?;
    let n = k.rows();
    check_len(n, k.cols())?;
    check_len(n, rhs.len())?;
    check_len(n, pinv.len())?;
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, residual: 0.0, converged: true }));
    }
    let target = cfg.target(bnorm);
    let limit = cfg.iter_limit(n);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut total = 0;
    let mut breakdown = false;
    for _ in 0..6 {
        let (dx, its, broke) = minres_cycle(k, &r, pinv, target / norm(&r).max(f64::MIN_POSITIVE), limit - total);
        total += its;
        axpy(1.0, &dx, &mut x);
        r = k.mul_vec(&x);
        r.iter_mut().zip(rhs).for_each(|(r, b)| *r = b - *r);
        breakdown = broke;
        if norm(&r) <= target || total >= limit || (broke && its <= 1) {
            break;
        }
    }
    let res = norm(&r);
    let stats = SolveStats { iterations: total, residual: res / bnorm, converged: res <= target };
    if !stats.converged {
        if breakdown {
            return Err(Error::Incompatible { stage: "minres".into(), floor: stats.residual });
        }
        return Err(Error::NonConvergence { stage: "minres".into(), stats });
    }
    Ok((x, stats))
}

/// One MINRES run from zero; returns (x, iterations, lanczos breakdown).
fn minres_cycle(k: &SparseMatrix, b: &[f64], pinv: &[f64], rtol: f64, limit: usize) -> (Vec<f64>, usize, bool) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y: Vec<f64> = r1.iter().zip(pinv).map(|(a, p)| a * p).collect();
    let beta1 = dot(&r1, &y).sqrt();
    if beta1 == 0.0 {
        return (x, 0, true);
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta, mut dbar, mut epsln, mut phibar) = (0.0, beta1, 0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w1;
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut its = 0;
    // phibar tracks the preconditioned residual; scale the stopping test by the
    // preconditioner range so it stays conservative for the true residual
    let pmax = pinv.iter().cloned().fold(0.0, f64::max);
    let pmin = pinv.iter().cloned().fold(f64::INFINITY, f64::min);
    let stop = rtol * beta1 * (pmin / pmax).sqrt() * 0.5;
    while its < limit {
        its += 1;
        let s = 1.0 / beta;
        v.iter_mut().zip(&y).for_each(|(v, y)| *v = s * y);
        y = k.mul_vec(&v);
        if its >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        r1 = std::mem::replace(&mut r2, y.clone());
        y.iter_mut().zip(&r2).zip(pinv).for_each(|((y, r), p)| *y = r * p);
        oldb = beta;
        let bb = dot(&r2, &y);
        beta = bb.max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::EPSILON * beta1);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        w1 = std::mem::take(&mut w2);
        w2 = std::mem::take(&mut w);
        w = v.iter().zip(&w1).zip(&w2).map(|((v, a), b)| (v - oldeps * a - delta * b) / gamma).collect();
        axpy(phi, &w, &mut x);
        if beta <= 1e-13 * beta1 {
            return (x, its, true);
        }
        if phibar <= stop {
            return (x, its, false);
        }
    }
    (x, its, false)
}

/// Solve `[[A, Bᵀ], [B, 0]] (x, mult) = (f, g)` by MINRES with the
/// block-diagonal Jacobi preconditioner diag(A), diag(B diag(A)⁻¹ Bᵀ).
pub fn minres_saddle(a: &SparseMatrix, b: &SparseMatrix, f: &[f64], g: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, Vec<f64>, SolveStats)> {
    let n = a.rows();
    check_len(n, a.cols())?;
    check_len(n, b.cols())?;
    check_len(n, f.len())?;
    check_len(b.rows(), g.len())?;
    let k = SparseMatrix::saddle(a, b, None);
    let pinv = saddle_preconditioner(a, b, cfg.preconditioner);
    let rhs: Vec<f64> = f.iter().chain(g).copied().collect();
    let (sol, stats) = minres(&k, &rhs, &pinv, cfg)?;
    let (x, m) = sol.split_at(n);
    Ok((x.to_vec(), m.to_vec(), stats))
}

pub(crate) fn saddle_preconditioner(a: &SparseMatrix, b: &SparseMatrix, kind: Preconditioner) -> Vec<f64> {
    if kind == Preconditioner::None {
        return vec![1.0; a.rows() + b.rows()];
    }
    let da = jacobi(&a.diag());
    let mut s = vec![0.0; b.rows()];
    for (r, c, v) in b.triplets() {
        s[r] += v * v * da[c];
    }
    da.into_iter().chain(jacobi(&s)).collect()
}
