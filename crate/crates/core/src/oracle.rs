//! Slow, independent solvers used to cross-check the quadrature pipeline.
//!
//! * [`collocation_solve`] discretizes the between-peak equation
//!   `|u|^{r-2} u = (|u_x|^{r-2} u_x)_x / (r-1)` directly on a uniform mesh.
//! * [`variational_hamiltonian`] computes `H(P, Q)` as the stationary value of
//!   `sum P_i u(Q_i) - l[u]` over continuous piecewise-linear `u`.
//! * [`hamiltonian_fd_vector_field`] differentiates the profile energy by
//!   central differences to give `(dH/dP, -dH/dQ)`.

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::solve_tridiagonal;
use crate::profile::{energy, heights_to_profile, profile_quadrature, sample, solve_profile, Profile, ProfileSolveSettings};
use crate::types::{check_ordering, height_from_momentum, spow, Exponent, PeakonState};

/// Finite-difference step used for every oracle gradient.
pub const FD_STEP: f64 = 1e-5;

const JAC_EPS: f64 = 1e-12;
const MAX_ITERS: usize = 200;
const MAX_HALVINGS: usize = 40;

/// Uniform partition of the unit interval, scaled onto each segment by its length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mesh1D {
    n_cells: usize,
}

impl Mesh1D {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 8 {
            return Err(Error::invalid(format!("mesh needs at least 8 cells, got {n_cells}")));
        }
        Ok(Mesh1D { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Nodes on `[0, 1]`.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.n_cells as f64;
        (0..=self.n_cells).map(|i| i as f64 / n).collect()
    }
}

/// Nodal solution on `[0, dq]`.
#[derive(Debug, Clone, Serialize)]
pub struct Collocation {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub iterations: usize,
}

/// Degenerate diffusion coefficient `|s|^{r-2}`, kept away from zero for `r > 2`.
fn coeff(s: f64, r: f64) -> f64 {
    if r == 2.0 {
        1.0
    } else {
        (s * s + JAC_EPS).powf(0.5 * (r - 2.0))
    }
}

/// Free-decay initial guess through the two endpoint values.
fn blend(ua: f64, ub: f64, len: f64, x: f64) -> f64 {
    let e = (-len).exp();
    let det = 1.0 - e * e;
    let a = (ua - ub * e) / det;
    let b = (ub - ua * e) / det;
    a * (-x).exp() + b * (x - len).exp()
}

/// Discrete convex energy whose gradient is the flux-form finite-difference
/// residual. Nodes are shared between cells; `pin` marks Dirichlet nodes.
struct Chain {
    r: f64,
    /// Cell widths, one per cell.
    h: Vec<f64>,
    /// Point loads (momenta) and tail weights per node.
    load: Vec<f64>,
    tail: Vec<f64>,
    pin: Vec<bool>,
}

impl Chain {
    fn weights(&self) -> Vec<f64> {
        let m = self.h.len() + 1;
        let mut w = vec![0.0; m];
        for (c, h) in self.h.iter().enumerate() {
            w[c] += 0.5 * h;
            w[c + 1] += 0.5 * h;
        }
        w
    }

    fn value(&self, u: &[f64], w: &[f64]) -> f64 {
        let r = self.r;
        let mut e = 0.0;
        for (c, h) in self.h.iter().enumerate() {
            let d = (u[c + 1] - u[c]) / h;
            e += h * d.abs().powf(r) / (r * (r - 1.0));
        }
        for k in 0..u.len() {
            let a = u[k].abs().powf(r);
            e += w[k] * a / r + self.tail[k] * a / (r * (r - 1.0)) - self.load[k] * u[k];
        }
        e
    }

    fn gradient(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let r = self.r;
        let mut g = vec![0.0; u.len()];
        for (c, h) in self.h.iter().enumerate() {
            let f = spow((u[c + 1] - u[c]) / h, r - 1.0) / (r - 1.0);
            g[c] -= f;
            g[c + 1] += f;
        }
        for k in 0..u.len() {
            let s = spow(u[k], r - 1.0);
            g[k] += w[k] * s + self.tail[k] * s / (r - 1.0) - self.load[k];
            if self.pin[k] {
                g[k] = 0.0;
            }
        }
        g
    }

    fn hessian(&self, u: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let r = self.r;
        let m = u.len();
        let mut lo = vec![0.0; m];
        let mut di = vec![0.0; m];
        let mut up = vec![0.0; m];
        for (c, h) in self.h.iter().enumerate() {
            let k = coeff((u[c + 1] - u[c]) / h, r) / h;
            di[c] += k;
            di[c + 1] += k;
            up[c] -= k;
            lo[c + 1] -= k;
        }
        for k in 0..m {
            let a = coeff(u[k], r);
            di[k] += w[k] * (r - 1.0) * a + self.tail[k] * a;
            if self.pin[k] {
                di[k] = 1.0;
                lo[k] = 0.0;
                up[k] = 0.0;
                if k > 0 {
                    up[k - 1] = 0.0;
                }
                if k + 1 < m {
                    lo[k + 1] = 0.0;
                }
            }
        }
        (lo, di, up)
    }

    /// Damped Newton descent from `u`. Returns the iteration count and the
    /// final gradient norm.
    fn minimize(&self, u: &mut Vec<f64>, gtol: f64) -> Result<(usize, f64)> {
        let w = self.weights();
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut g = self.gradient(u, &w);
        let mut gn = inf_norm(&g);
        let mut e = self.value(u, &w);
        for iter in 0..MAX_ITERS {
            if gn <= gtol {
                return Ok((iter, gn));
            }
            let (lo, di, up) = self.hessian(u, &w);
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let step = solve_tridiagonal(&lo, &di, &up, &rhs).ok_or(Error::NewtonDiverged {
                iterations: iter,
                residual: gn,
            })?;
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + lambda * b).collect();
                let et = self.value(&trial, &w);
                let gt = self.gradient(&trial, &w);
                let gtn = inf_norm(&gt);
                if et <= e + 1e-4 * lambda * slope || (gtn < gn && et <= e + 1e-12 * e.abs()) {
                    accepted = Some((trial, et, gt, gtn));
                    break;
                }
                lambda *= 0.5;
            }
            let small_step = inf_norm(&step) <= 1e-14 * scale;
            match accepted {
                Some((trial, et, gt, gtn)) => {
                    *u = trial;
                    e = et;
                    g = gt;
                    gn = gtn;
                    if small_step {
                        return Ok((iter + 1, gn));
                    }
                }
                None if small_step || gn <= 1e3 * gtol => return Ok((iter, gn)),
                None => {
                    return Err(Error::NewtonDiverged {
                        iterations: iter,
                        residual: gn,
                    })
                }
            }
        }
        if gn <= 1e3 * gtol {
            Ok((MAX_ITERS, gn))
        } else {
            Err(Error::NewtonDiverged {
                iterations: MAX_ITERS,
                residual: gn,
            })
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solves the between-peak equation on `[0, dq]` with Dirichlet data by
/// damped Newton on the flux-form finite-difference discretization.
pub fn collocation_solve(u_left: f64, u_right: f64, dq: f64, r: Exponent, mesh: &Mesh1D) -> Result<Collocation> {
    r.require_singular()?;
    if !(dq > 0.0) || !dq.is_finite() {
        return Err(Error::invalid(format!("segment length must be positive, got {dq}")));
    }
    let n = mesh.n_cells;
    let h = dq / n as f64;
    let x: Vec<f64> = mesh.nodes().iter().map(|s| s * dq).collect();
    let mut u: Vec<f64> = if n >= 128 && n % 2 == 0 {
        let coarse = collocation_solve(u_left, u_right, dq, r, &Mesh1D::new(n / 2)?)?;
        (0..=n)
            .map(|i| {
                if i % 2 == 0 {
                    coarse.u[i / 2]
                } else {
                    0.5 * (coarse.u[i / 2] + coarse.u[i / 2 + 1])
                }
            })
            .collect()
    } else {
        x.iter().map(|&xi| blend(u_left, u_right, dq, xi)).collect()
    };
    u[0] = u_left;
    u[n] = u_right;
    let mut pin = vec![false; n + 1];
    pin[0] = true;
    pin[n] = true;
    let chain = Chain {
        r: r.get(),
        h: vec![h; n],
        load: vec![0.0; n + 1],
        tail: vec![0.0; n + 1],
        pin,
    };
    let scale = u_left.abs().max(u_right.abs()).max(1e-300);
    let gtol = 1e-12 * scale.powf(r.get() - 1.0).max(1e-300) / (r.get() - 1.0);
    let (iterations, _) = chain.minimize(&mut u, gtol)?;
    Ok(Collocation { x, u, iterations })
}

/// Sup-norm difference between the collocated interior segment and the
/// quadrature profile of the pair `(q, uhat)`, over the mesh nodes.
pub fn collocation_cross_error(q: [f64; 2], uhat: [f64; 2], r: Exponent, mesh: &Mesh1D) -> Result<f64> {
    let qs = profile_quadrature();
    let prof = heights_to_profile(&q, &uhat, r, &qs)?;
    let c = collocation_solve(uhat[0], uhat[1], q[1] - q[0], r, mesh)?;
    let xs: Vec<f64> = c.x.iter().map(|x| x + q[0]).collect();
    let s = sample(&prof, &xs, &qs)?;
    Ok(s.iter().zip(&c.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Stationary value of the discrete variational problem and its central
/// finite-difference gradients.
#[derive(Debug, Clone, Serialize)]
pub struct VariationalHamiltonian {
    pub h: f64,
    pub uhat: Vec<f64>,
    pub dh_dq: Vec<f64>,
    pub dh_dp: Vec<f64>,
    pub residual: f64,
}

struct VariationalSolve {
    h: f64,
    nodes: Vec<f64>,
    residual: f64,
}

fn variational_value(q: &[f64], p: &[f64], r: Exponent, mesh: &Mesh1D, warm: Option<&[f64]>) -> Result<VariationalSolve> {
    let rf = r.get();
    let npk = q.len();
    let nc = mesh.n_cells;
    let m = (npk - 1) * nc + 1;
    let mut h = Vec::with_capacity(m - 1);
    for w in q.windows(2) {
        h.extend(std::iter::repeat((w[1] - w[0]) / nc as f64).take(nc));
    }
    let mut load = vec![0.0; m];
    let mut tail = vec![0.0; m];
    for (i, pi) in p.iter().enumerate() {
        load[i * nc] = *pi;
    }
    tail[0] += 1.0;
    tail[m - 1] += 1.0;
    let chain = Chain {
        r: rf,
        h,
        load,
        tail,
        pin: vec![false; m],
    };
    let mut u = match warm {
        Some(w) if w.len() == m => w.to_vec(),
        _ if nc >= 128 && nc % 2 == 0 => {
            let coarse = variational_value(q, p, r, &Mesh1D::new(nc / 2)?, None)?.nodes;
            (0..m)
                .map(|i| if i % 2 == 0 { coarse[i / 2] } else { 0.5 * (coarse[i / 2] + coarse[i / 2 + 1]) })
                .collect()
        }
        _ => {
            let uh = p
                .iter()
                .map(|&pi| height_from_momentum(pi, r))
                .collect::<Result<Vec<_>>>()?;
            let mut u = vec![0.0; m];
            for j in 0..npk.saturating_sub(1) {
                let len = q[j + 1] - q[j];
                for c in 0..=nc {
                    u[j * nc + c] = blend(uh[j], uh[j + 1], len, len * c as f64 / nc as f64);
                }
            }
            if npk == 1 {
                u[0] = uh[0];
            }
            u
        }
    };
    let pscale = p.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let gtol = 1e-13 * pscale;
    let (_, residual) = chain.minimize(&mut u, gtol)?;
    if residual > gtol {
        warn!("variational constraint residual {residual:e} above {gtol:e}; mesh may be too coarse");
    }
    let w = chain.weights();
    let h = -chain.value(&u, &w);
    Ok(VariationalSolve { h, nodes: u, residual })
}

/// `H(P, Q)` from the discrete constrained stationarity problem, with
/// gradients by central differences of step [`FD_STEP`].
pub fn variational_hamiltonian(state: &PeakonState, r: Exponent, mesh: &Mesh1D) -> Result<VariationalHamiltonian> {
    r.require_singular()?;
    let q = state.positions();
    let p = state.momenta();
    let base = variational_value(q, p, r, mesh, None)?;
    let nc = mesh.n_cells;
    let uhat = (0..q.len()).map(|i| base.nodes[i * nc]).collect();
    let probe = |qq: &[f64], pp: &[f64]| -> Result<f64> {
        check_ordering(qq)?;
        Ok(variational_value(qq, pp, r, mesh, Some(&base.nodes))?.h)
    };
    let mut dh_dq = Vec::with_capacity(q.len());
    let mut dh_dp = Vec::with_capacity(q.len());
    for i in 0..q.len() {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[i] += FD_STEP;
        qm[i] -= FD_STEP;
        dh_dq.push((probe(&qp, p)? - probe(&qm, p)?) / (2.0 * FD_STEP));
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[i] += FD_STEP;
        pm[i] -= FD_STEP;
        dh_dp.push((probe(q, &pp)? - probe(q, &pm)?) / (2.0 * FD_STEP));
    }
    Ok(VariationalHamiltonian {
        h: base.h,
        uhat,
        dh_dq,
        dh_dp,
        residual: base.residual,
    })
}

/// `H(P, Q)` through the profile solver and energy quadrature.
pub fn profile_hamiltonian(state: &PeakonState, r: Exponent, warm: Option<&Profile>, settings: &ProfileSolveSettings) -> Result<(f64, Profile)> {
    let prof = solve_profile(state, r, warm, settings)?;
    let d = energy(&prof, &settings.quadrature)?;
    Ok((d.h, prof))
}

/// `(dH/dP, -dH/dQ)` by central differences of [`profile_hamiltonian`].
pub fn hamiltonian_fd_vector_field(state: &PeakonState, r: Exponent, settings: &ProfileSolveSettings) -> Result<(Vec<f64>, Vec<f64>)> {
    let (_, base) = profile_hamiltonian(state, r, None, settings)?;
    let q = state.positions();
    let p = state.momenta();
    let h_at = |qq: Vec<f64>, pp: Vec<f64>| -> Result<f64> {
        let s = PeakonState::new(state.t, qq, pp)?;
        Ok(profile_hamiltonian(&s, r, Some(&base), settings)?.0)
    };
    let mut qdot = Vec::with_capacity(q.len());
    let mut pdot = Vec::with_capacity(q.len());
    for i in 0..q.len() {
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[i] += FD_STEP;
        pm[i] -= FD_STEP;
        qdot.push((h_at(q.to_vec(), pp)? - h_at(q.to_vec(), pm)?) / (2.0 * FD_STEP));
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[i] += FD_STEP;
        qm[i] -= FD_STEP;
        pdot.push(-(h_at(qp, p.to_vec())? - h_at(qm, p.to_vec())?) / (2.0 * FD_STEP));
    }
    Ok((qdot, pdot))
}
