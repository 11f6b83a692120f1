//! Bounded-variable two-phase primal simplex on a dense tableau.
//!
//! Every constraint row gets a slack column whose bounds encode the sense
//! (`<=`: [0, inf), `>=`: (-inf, 0], `=`: [0, 0]); rows whose slack cannot
//! absorb the initial residual get an artificial column that phase 1 drives
//! to zero. The tableau `w` holds `B^-1 A`; since the slack block starts as
//! the identity, the slack columns of `w` always hold `B^-1` itself, which is
//! used to recompute basic values, duals and reduced costs from the original
//! data at phase boundaries instead of trusting accumulated pivot arithmetic.
//!
//! Pricing is Dantzig's rule with lowest-index tie-breaking, falling back to
//! Bland's rule for the rest of the solve once 1000 consecutive degenerate
//! pivots pile up.

use super::{
    LinearProgram, LpSolution, LpStatus, Sense, SolverError, DEGENERATE_PIVOT_LIMIT, FEAS_TOL,
};

const PIVOT_TOL: f64 = 1e-9;
const RC_TOL: f64 = 1e-9;
const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau<'a> {
    program: &'a LinearProgram,
    m: usize,
    n_struct: usize,
    n_cols: usize,
    /// Dense `B^-1 A`, row-major.
    w: Vec<f64>,
    /// Current value of the basic variable of each row.
    xb: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Maintained phase-2 reduced-cost row.
    obj: Vec<f64>,
    /// Maintained phase-1 reduced-cost row.
    p1obj: Vec<f64>,
    degenerate_run: usize,
    bland: bool,
    pivots: usize,
}

enum StepOutcome {
    Moved,
    Unbounded,
}

impl<'a> Tableau<'a> {
    fn entry(&self, r: usize, c: usize) -> f64 {
        self.w[r * self.n_cols + c]
    }

    /// Resting value of a nonbasic column; free columns park at zero.
    fn nonbasic_value(&self, col: usize) -> f64 {
        match self.state[col] {
            ColState::AtLower => {
                if self.lower[col].is_finite() {
                    self.lower[col]
                } else if self.upper[col].is_finite() {
                    self.upper[col]
                } else {
                    0.0
                }
            }
            ColState::AtUpper => {
                if self.upper[col].is_finite() {
                    self.upper[col]
                } else {
                    0.0
                }
            }
            ColState::Basic(r) => self.xb[r],
        }
    }

    fn is_free(&self, col: usize) -> bool {
        self.lower[col] == f64::NEG_INFINITY && self.upper[col] == f64::INFINITY
    }

    fn build(program: &'a LinearProgram) -> Tableau<'a> {
        let m = program.cons.len();
        let n_struct = program.vars.len();

        let mut lower = Vec::with_capacity(n_struct + 2 * m);
        let mut upper = Vec::with_capacity(n_struct + 2 * m);
        for v in &program.vars {
            lower.push(v.lower);
            upper.push(v.upper);
        }
        for c in &program.cons {
            let (lo, up) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(up);
        }

        let mut state: Vec<ColState> = (0..n_struct + m)
            .map(|j| {
                if lower[j].is_finite() || upper[j] == f64::INFINITY {
                    ColState::AtLower
                } else {
                    ColState::AtUpper
                }
            })
            .collect();

        let resting = |j: usize, state: &[ColState]| -> f64 {
            match state[j] {
                ColState::AtLower => {
                    if lower[j].is_finite() {
                        lower[j]
                    } else {
                        0.0
                    }
                }
                ColState::AtUpper => upper[j],
                ColState::Basic(_) => unreachable!(),
            }
        };

        let mut resid = vec![0.0; m];
        for (i, c) in program.cons.iter().enumerate() {
            let mut acc = c.rhs;
            for &(v, coef) in &c.terms {
                acc -= coef * resting(v, &state);
            }
            resid[i] = acc;
        }

        // Decide slack-vs-artificial basis per row.
        let mut basis = vec![0usize; m];
        let mut xb = vec![0.0; m];
        let mut art_cols: Vec<(usize, f64)> = Vec::new(); // (row, sign)
        for i in 0..m {
            let s = n_struct + i;
            if resid[i] >= lower[s] - FEAS_TOL && resid[i] <= upper[s] + FEAS_TOL {
                basis[i] = s;
                xb[i] = resid[i];
                state[s] = ColState::Basic(i);
            } else {
                // Slack pinned at the bound nearest the residual; an
                // artificial absorbs the remainder with positive value.
                let sv = resid[i].clamp(lower[s], upper[s]);
                state[s] = if sv == upper[s] && upper[s].is_finite() && lower[s] != upper[s] {
                    ColState::AtUpper
                } else {
                    ColState::AtLower
                };
                let violation = resid[i] - sv;
                art_cols.push((i, violation.signum()));
                xb[i] = violation.abs();
            }
        }

        let n_cols = n_struct + m + art_cols.len();
        let mut w = vec![0.0; m * n_cols];
        for (i, c) in program.cons.iter().enumerate() {
            let row = &mut w[i * n_cols..(i + 1) * n_cols];
            for &(v, coef) in &c.terms {
                row[v] = coef;
            }
            row[n_struct + i] = 1.0;
        }
        let mut p1obj = vec![0.0; n_cols];
        for (k, &(i, sign)) in art_cols.iter().enumerate() {
            let col = n_struct + m + k;
            lower.push(0.0);
            upper.push(f64::INFINITY);
            w[i * n_cols + col] = sign;
            basis[i] = col;
            state.push(ColState::Basic(i));
            p1obj[col] = 1.0;
            // Keep the tableau equal to B^-1 A: a -1 artificial basis entry
            // flips its row.
            if sign < 0.0 {
                for x in &mut w[i * n_cols..(i + 1) * n_cols] {
                    *x = -*x;
                }
            }
        }

        let mut obj = vec![0.0; n_cols];
        obj[..n_struct].copy_from_slice(&program.objective);

        let mut tab = Tableau {
            program,
            m,
            n_struct,
            n_cols,
            w,
            xb,
            basis,
            state,
            lower,
            upper,
            obj,
            p1obj,
            degenerate_run: 0,
            bland: false,
            pivots: 0,
        };
        // Reduce the phase-1 row against the initial basis; phase-2 costs are
        // zero on every initially-basic column, so that row starts reduced.
        for r in 0..tab.m {
            let b = tab.basis[r];
            let c1 = tab.p1obj[b];
            if c1 != 0.0 {
                let rs = r * tab.n_cols;
                for j in 0..tab.n_cols {
                    tab.p1obj[j] -= c1 * tab.w[rs + j];
                }
            }
        }
        tab
    }

    /// Picks an entering column and its direction, or None at phase optimum.
    fn price(&self, phase1: bool) -> Option<(usize, f64)> {
        let costs = if phase1 { &self.p1obj } else { &self.obj };
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n_cols {
            if matches!(self.state[j], ColState::Basic(_)) || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = costs[j];
            let (score, dir) = if self.is_free(j) {
                if d.abs() <= RC_TOL {
                    continue;
                }
                (d.abs(), if d < 0.0 { 1.0 } else { -1.0 })
            } else {
                match self.state[j] {
                    ColState::AtLower if d < -RC_TOL => (-d, 1.0),
                    ColState::AtUpper if d > RC_TOL => (d, -1.0),
                    _ => continue,
                }
            };
            if self.bland {
                return Some((j, dir));
            }
            match best {
                Some((_, s, _)) if s >= score => {}
                _ => best = Some((j, score, dir)),
            }
        }
        best.map(|(j, _, dir)| (j, dir))
    }

    /// One simplex step moving column `q` off its resting point along `dir`.
    fn step(&mut self, q: usize, dir: f64) -> StepOutcome {
        let span = self.upper[q] - self.lower[q];
        let mut t_best = if span.is_finite() {
            span
        } else {
            f64::INFINITY
        };
        let mut leave: Option<(usize, bool)> = None; // (row, leaves_at_lower)

        for i in 0..self.m {
            let y = self.entry(i, q);
            if y.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.basis[i];
            let delta = dir * y;
            let (limit, at_lower) = if delta > 0.0 {
                if self.lower[b].is_finite() {
                    ((self.xb[i] - self.lower[b]) / delta, true)
                } else {
                    continue;
                }
            } else if self.upper[b].is_finite() {
                ((self.upper[b] - self.xb[i]) / (-delta), false)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            if limit < t_best - 1e-12 {
                t_best = limit;
                leave = Some((i, at_lower));
            }
        }

        if t_best.is_infinite() {
            return StepOutcome::Unbounded;
        }
        if t_best <= STEP_TOL {
            self.degenerate_run += 1;
            if self.degenerate_run >= DEGENERATE_PIVOT_LIMIT {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        // Shift every basic value along the entering direction.
        if t_best > 0.0 {
            for i in 0..self.m {
                let y = self.entry(i, q);
                if y != 0.0 {
                    self.xb[i] -= dir * t_best * y;
                }
            }
        }

        match leave {
            None => {
                // Bound flip: the entering column jumps to its other bound.
                self.state[q] = match self.state[q] {
                    ColState::AtLower => ColState::AtUpper,
                    ColState::AtUpper => ColState::AtLower,
                    ColState::Basic(_) => unreachable!(),
                };
            }
            Some((r, at_lower)) => {
                let entering_value = self.nonbasic_value(q) + dir * t_best;
                let leaving = self.basis[r];
                self.state[leaving] = if at_lower {
                    ColState::AtLower
                } else {
                    ColState::AtUpper
                };
                self.state[q] = ColState::Basic(r);
                self.basis[r] = q;
                self.xb[r] = entering_value;
                self.eliminate(r, q);
            }
        }
        self.pivots += 1;
        StepOutcome::Moved
    }

    /// Gauss-Jordan elimination making column `q` the unit column of row `r`.
    fn eliminate(&mut self, r: usize, q: usize) {
        let pv = self.entry(r, q);
        debug_assert!(pv.abs() > PIVOT_TOL, "pivot {pv} too small");
        let inv = 1.0 / pv;
        let (rs, re) = (r * self.n_cols, (r + 1) * self.n_cols);
        if inv != 1.0 {
            for x in &mut self.w[rs..re] {
                *x *= inv;
            }
        }
        let pivot_row: Vec<f64> = self.w[rs..re].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = self.entry(i, q);
            if factor.abs() <= 1e-13 {
                self.w[i * self.n_cols + q] = 0.0;
                continue;
            }
            let row = &mut self.w[i * self.n_cols..(i + 1) * self.n_cols];
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= factor * p;
            }
            row[q] = 0.0;
        }
        for objrow in [&mut self.obj, &mut self.p1obj] {
            let factor = objrow[q];
            if factor.abs() > 1e-13 {
                for (x, p) in objrow.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
                objrow[q] = 0.0;
            }
        }
    }

    /// Recomputes basic values from the original data through `B^-1`, wiping
    /// accumulated pivot drift. The slack block of `w` holds `B^-1` because
    /// the slack columns started as the identity. Nonbasic artificials sit
    /// fixed at zero and contribute nothing.
    fn refresh_basics(&mut self) {
        let mut adjusted = vec![0.0; self.m];
        for (i, c) in self.program.cons.iter().enumerate() {
            let mut acc = c.rhs;
            for &(v, coef) in &c.terms {
                if matches!(self.state[v], ColState::Basic(_)) {
                    continue;
                }
                acc -= coef * self.nonbasic_value(v);
            }
            let s = self.n_struct + i;
            if !matches!(self.state[s], ColState::Basic(_)) {
                acc -= self.nonbasic_value(s);
            }
            adjusted[i] = acc;
        }
        for r in 0..self.m {
            let mut acc = 0.0;
            for i in 0..self.m {
                let binv = self.entry(r, self.n_struct + i);
                if binv != 0.0 {
                    acc += binv * adjusted[i];
                }
            }
            self.xb[r] = acc;
        }
    }

    fn phase1_infeasibility(&self) -> f64 {
        let mut total = 0.0;
        for r in 0..self.m {
            if self.basis[r] >= self.n_struct + self.m {
                total += self.xb[r].max(0.0);
            }
        }
        total
    }

    /// Pins artificials at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        for col in self.n_struct + self.m..self.n_cols {
            self.lower[col] = 0.0;
            self.upper[col] = 0.0;
        }
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.n_struct + self.m {
                continue;
            }
            // Prefer a movable replacement column; fall back to any nonzero.
            let mut candidate = None;
            for j in 0..self.n_struct + self.m {
                if matches!(self.state[j], ColState::Basic(_)) {
                    continue;
                }
                if self.entry(r, j).abs() > 1e-7 {
                    if self.lower[j] != self.upper[j] {
                        candidate = Some(j);
                        break;
                    }
                    if candidate.is_none() {
                        candidate = Some(j);
                    }
                }
            }
            if let Some(j) = candidate {
                // Zero-step swap: the entering column stays at its resting
                // value, the artificial leaves at zero.
                let value = self.nonbasic_value(j);
                self.state[b] = ColState::AtLower;
                self.state[j] = ColState::Basic(r);
                self.basis[r] = j;
                self.xb[r] = value;
                self.eliminate(r, j);
            }
            // Otherwise the row is redundant; the artificial stays basic,
            // fixed at zero, and never blocks a ratio test because its row is
            // zero across all original columns.
        }
    }

    fn run_phase(&mut self, phase1: bool) -> Result<Option<LpStatus>, SolverError> {
        let pivot_limit = 20_000 + 50 * (self.m + self.n_cols);
        loop {
            if self.pivots > pivot_limit {
                return Err(SolverError::Numerical(format!(
                    "pivot limit {pivot_limit} exceeded"
                )));
            }
            let Some((q, dir)) = self.price(phase1) else {
                return Ok(None);
            };
            match self.step(q, dir) {
                StepOutcome::Moved => {}
                StepOutcome::Unbounded => {
                    if phase1 {
                        return Err(SolverError::Numerical(
                            "phase 1 climbed without bound".into(),
                        ));
                    }
                    return Ok(Some(LpStatus::Unbounded));
                }
            }
        }
    }

    fn extract(&self) -> LpSolution {
        let mut values = vec![0.0; self.n_struct];
        for (j, v) in values.iter_mut().enumerate() {
            *v = self.nonbasic_value(j);
        }
        // Exact duals y = c_B B^-1 from the original objective.
        let mut cb: Vec<f64> = vec![0.0; self.m];
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.n_struct {
                cb[r] = self.program.objective[b];
            }
        }
        let mut duals = vec![0.0; self.m];
        for (i, dual) in duals.iter_mut().enumerate() {
            let mut acc = 0.0;
            for r in 0..self.m {
                if cb[r] != 0.0 {
                    acc += cb[r] * self.entry(r, self.n_struct + i);
                }
            }
            *dual = acc;
        }
        let mut reduced = vec![0.0; self.n_struct];
        for (j, rc) in reduced.iter_mut().enumerate() {
            *rc = self.program.objective[j];
        }
        for (i, c) in self.program.cons.iter().enumerate() {
            let y = duals[i];
            if y == 0.0 {
                continue;
            }
            for &(v, coef) in &c.terms {
                reduced[v] -= y * coef;
            }
        }
        let objective = self.program.objective_value(&values);
        LpSolution {
            status: LpStatus::Optimal,
            values,
            duals,
            reduced_costs: reduced,
            objective,
        }
    }

    fn audit(&self, sol: &LpSolution) -> Result<(), SolverError> {
        for (j, v) in sol.values.iter().enumerate() {
            let scale = 1.0 + v.abs();
            if *v < self.program.vars[j].lower - FEAS_TOL * scale
                || *v > self.program.vars[j].upper + FEAS_TOL * scale
            {
                return Err(SolverError::Numerical(format!(
                    "variable {} = {v} escaped its bounds",
                    self.program.vars[j].name
                )));
            }
        }
        for (i, c) in self.program.cons.iter().enumerate() {
            let act = self.program.constraint_activity(i, &sol.values);
            let scale = 1.0 + c.rhs.abs() + act.abs();
            let viol = match c.sense {
                Sense::Le => act - c.rhs,
                Sense::Ge => c.rhs - act,
                Sense::Eq => (act - c.rhs).abs(),
            };
            if viol > FEAS_TOL * scale {
                return Err(SolverError::Numerical(format!(
                    "constraint {} violated by {viol:.3e}",
                    c.name
                )));
            }
        }
        Ok(())
    }
}

fn infeasible() -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        values: Vec::new(),
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        objective: f64::NAN,
    }
}

fn unbounded() -> LpSolution {
    LpSolution {
        status: LpStatus::Unbounded,
        values: Vec::new(),
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        objective: f64::NAN,
    }
}

pub(crate) fn solve(program: &LinearProgram) -> Result<LpSolution, SolverError> {
    validate(program)?;
    if program.vars.is_empty() && program.cons.is_empty() {
        return Ok(LpSolution {
            status: LpStatus::Optimal,
            values: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: 0.0,
        });
    }
    for v in &program.vars {
        if v.lower > v.upper {
            return Ok(infeasible());
        }
    }
    let mut tab = Tableau::build(program);
    tab.run_phase(true)?;
    tab.refresh_basics();
    if tab.phase1_infeasibility() > 1e-7 {
        return Ok(infeasible());
    }
    tab.retire_artificials();
    match tab.run_phase(false)? {
        Some(LpStatus::Unbounded) => return Ok(unbounded()),
        Some(_) | None => {}
    }
    tab.refresh_basics();
    let sol = tab.extract();
    tab.audit(&sol)?;
    Ok(sol)
}

fn validate(program: &LinearProgram) -> Result<(), SolverError> {
    for (j, c) in program.objective.iter().enumerate() {
        if !c.is_finite() {
            return Err(SolverError::InvalidProgram(format!(
                "objective coefficient of {} is {c}",
                program.vars[j].name
            )));
        }
    }
    Ok(())
}
