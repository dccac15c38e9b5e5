//! Dense bounded-variable primal simplex with Bland's anti-cycling rule.
//!
//! The decoy-state programs are tiny (tens of variables, tens of rows), so a
//! deterministic two-phase dense solver with an explicit basis inverse is
//! both simpler and more predictable than a sparse implementation. Callers
//! scale their data before building rows; the feasibility tolerance below is
//! meant for data of order one.

use crate::Error;

/// Row sense of one linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// Minimization problem over box-bounded variables:
/// `min c.x  s.t.  A x {<=,>=,=} b,  l <= x <= u`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Solver outcome for one call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Optimum and the structural part of the solution vector.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Feasibility/optimality tolerance on scaled data.
pub const LP_TOL: f64 = 1e-9;

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars());
        self.rows.push((coeffs, rel, rhs));
    }

    /// Minimize the configured objective.
    pub fn minimize(&self) -> Result<LpSolution, Error> {
        Solver::build(self)?.run()
    }

    /// Maximize the configured objective (solves the negated minimization).
    pub fn maximize(&self) -> Result<LpSolution, Error> {
        let mut flipped = self.clone();
        for c in &mut flipped.objective {
            *c = -*c;
        }
        let mut sol = flipped.minimize()?;
        sol.objective = -sol.objective;
        Ok(sol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Solver {
    n_struct: usize,
    n_total: usize,
    m: usize,
    cols: Vec<Vec<f64>>, // column-major constraint matrix, m entries each
    cost: Vec<f64>,         // phase-2 cost
    lower: Vec<f64>,
    upper: Vec<f64>,
    artificial_from: usize, // variables >= this index are artificial
    binv: Vec<Vec<f64>>,    // m x m basis inverse
    basis: Vec<usize>,      // basic variable per row
    state: Vec<VarState>,
    x: Vec<f64>,
}

impl Solver {
    fn build(lp: &LinearProgram) -> Result<Self, Error> {
        let n_struct = lp.n_vars();
        let m = lp.rows.len();
        for (j, (&lo, &up)) in lp.lower.iter().zip(&lp.upper).enumerate() {
            if lo > up + LP_TOL {
                return Err(Error::input(format!(
                    "variable {j} has empty bound interval [{lo}, {up}]"
                )));
            }
            if !lo.is_finite() {
                return Err(Error::input(format!("variable {j} needs a finite lower bound")));
            }
        }
        // slack variables for inequality rows
        let n_slack = lp.rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let n_total = n_struct + n_slack + m; // + one artificial per row
        let mut cols = vec![vec![0.0; m]; n_total];
        let mut rhs = vec![0.0; m];
        let mut lower = vec![0.0; n_total];
        let mut upper = vec![f64::INFINITY; n_total];
        lower[..n_struct].copy_from_slice(&lp.lower);
        upper[..n_struct].copy_from_slice(&lp.upper);
        let mut slack = n_struct;
        for (i, (coeffs, rel, b)) in lp.rows.iter().enumerate() {
            for (j, &a) in coeffs.iter().enumerate() {
                cols[j][i] = a;
            }
            rhs[i] = *b;
            match rel {
                Relation::Le => {
                    cols[slack][i] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    cols[slack][i] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
        }
        let artificial_from = n_struct + n_slack;
        let mut cost = vec![0.0; n_total];
        cost[..n_struct].copy_from_slice(&lp.objective);
        // start all non-artificial variables at their lower bound
        let mut state = vec![VarState::AtLower; n_total];
        let mut x = lower.clone();
        // artificial columns absorb the residual with positive sign
        let mut basis = Vec::with_capacity(m);
        let mut binv = vec![vec![0.0; m]; m];
        for i in 0..m {
            let mut resid = rhs[i];
            for j in 0..artificial_from {
                resid -= cols[j][i] * x[j];
            }
            let a_idx = artificial_from + i;
            let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
            cols[a_idx][i] = sign;
            x[a_idx] = resid.abs();
            basis.push(a_idx);
            state[a_idx] = VarState::Basic(i);
            // the initial basis is diag(sign), which is its own inverse
            binv[i][i] = sign;
        }
        Ok(Self {
            n_struct,
            n_total,
            m,
            cols,

            cost,
            lower,
            upper,
            artificial_from,
            binv,
            basis,
            state,
            x,
        })
    }

    fn tableau_column(&self, j: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..self.m {
                acc += self.binv[i][k] * self.cols[j][k];
            }
            *yi = acc;
        }
        y
    }

    /// One simplex phase over the given cost vector; `ban_artificials`
    /// excludes artificial columns from entering (phase 2).
    fn phase(&mut self, cost: &[f64], ban_artificials: bool) -> Result<LpStatus, Error> {
        let max_iter = 20_000 + 200 * (self.n_total + self.m);
        for _ in 0..max_iter {
            // simplex multipliers pi = c_B^T B^-1
            let mut pi = vec![0.0; self.m];
            for (k, pik) in pi.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, &bi) in self.basis.iter().enumerate() {
                    acc += cost[bi] * self.binv[i][k];
                }
                *pik = acc;
            }
            // Bland: smallest eligible index enters
            let mut entering = None;
            for j in 0..self.n_total {
                if ban_artificials && j >= self.artificial_from {
                    continue;
                }
                let dir = match self.state[j] {
                    VarState::Basic(_) => continue,
                    VarState::AtLower => 1.0,
                    VarState::AtUpper => -1.0,
                };
                let mut d = cost[j];
                for i in 0..self.m {
                    d -= pi[i] * self.cols[j][i];
                }
                if d * dir < -LP_TOL {
                    entering = Some((j, dir));
                    break;
                }
            }
            let Some((e, dir)) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let y = self.tableau_column(e);
            // ratio test: smallest step that drives a basic variable to a
            // bound, or flips the entering variable to its other bound
            let span = self.upper[e] - self.lower[e];
            let mut t_best = span; // may be infinite
            let mut leave: Option<(usize, bool)> = None; // (row, hits_upper)
            for i in 0..self.m {
                let delta = dir * y[i];
                let bi = self.basis[i];
                if delta > LP_TOL {
                    let t = (self.x[bi] - self.lower[bi]) / delta;
                    if t < t_best - LP_TOL || (t < t_best + LP_TOL && leave.map_or(false, |(r, _)| bi < self.basis[r])) {
                        t_best = t;
                        leave = Some((i, false));
                    }
                } else if delta < -LP_TOL && self.upper[bi].is_finite() {
                    let t = (self.upper[bi] - self.x[bi]) / (-delta);
                    if t < t_best - LP_TOL || (t < t_best + LP_TOL && leave.map_or(false, |(r, _)| bi < self.basis[r])) {
                        t_best = t;
                        leave = Some((i, true));
                    }
                }
            }
            if !t_best.is_finite() {
                return Ok(LpStatus::Unbounded);
            }
            let t = t_best.max(0.0);
            // apply the step
            for i in 0..self.m {
                let bi = self.basis[i];
                self.x[bi] -= t * dir * y[i];
            }
            match leave {
                None => {
                    // bound flip: entering moves across its whole span
                    self.x[e] = if dir > 0.0 { self.upper[e] } else { self.lower[e] };
                    self.state[e] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                }
                Some((r, hits_upper)) => {
                    let out = self.basis[r];
                    self.x[e] = match self.state[e] {
                        VarState::AtLower => self.lower[e] + t,
                        VarState::AtUpper => self.upper[e] - t,
                        VarState::Basic(_) => unreachable!(),
                    };
                    self.x[out] = if hits_upper { self.upper[out] } else { self.lower[out] };
                    self.state[out] = if hits_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.state[e] = VarState::Basic(r);
                    self.basis[r] = e;
                    // pivot the basis inverse on y[r]
                    let piv = y[r];
                    if piv.abs() < 1e-13 {
                        return Err(Error::input("degenerate pivot in simplex".into()));
                    }
                    for k in 0..self.m {
                        self.binv[r][k] /= piv;
                    }
                    for i in 0..self.m {
                        if i != r {
                            let f = y[i];
                            if f != 0.0 {
                                for k in 0..self.m {
                                    self.binv[i][k] -= f * self.binv[r][k];
                                }
                            }
                        }
                    }
                }
            }
        }
        Err(Error::input("simplex iteration limit exceeded".into()))
    }

    fn run(mut self) -> Result<LpSolution, Error> {
        // phase 1: minimize the artificial sum
        let mut phase1_cost = vec![0.0; self.n_total];
        for c in phase1_cost.iter_mut().skip(self.artificial_from) {
            *c = 1.0;
        }
        let status = self.phase(&phase1_cost, false)?;
        if status == LpStatus::Unbounded {
            return Err(Error::input("phase-1 objective unbounded".into()));
        }
        let infeas: f64 = (self.artificial_from..self.n_total).map(|j| self.x[j]).sum();
        if infeas > 1e-7 {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                x: vec![f64::NAN; self.n_struct],
            });
        }
        // pin any leftover artificials at zero so they cannot re-enter
        for j in self.artificial_from..self.n_total {
            self.upper[j] = 0.0;
            self.lower[j] = 0.0;
            self.x[j] = 0.0;
        }
        let cost = self.cost.clone();
        let status = self.phase(&cost, true)?;
        let objective = (0..self.n_struct).map(|j| self.cost[j] * self.x[j]).sum();
        Ok(LpSolution {
            status,
            objective,
            x: self.x[..self.n_struct].to_vec(),
        })
    }
}
