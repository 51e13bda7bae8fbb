//! Dense two-phase primal simplex.
//!
//! Problems are stated as
//!
//! ```text
//! maximize  c'x   subject to   G x >= h,   E x = f,   lower <= x <= upper
//! ```
//!
//! and converted to equality standard form with nonnegative variables.
//! Pricing is Dantzig's largest reduced cost until `50 (rows + cols)`
//! iterations have elapsed in a phase, after which Bland's lowest-index rule
//! takes over. Ratio-test ties go to the basic variable with the lowest
//! index, so a given input always produces the same pivot sequence.

use serde::Serialize;

use crate::{Error, Matrix, Result};

pub const PIVOT_TOL: f64 = 1e-10;
pub const FEAS_TOL: f64 = 1e-9;
pub const OPT_TOL: f64 = 1e-9;
pub const ITERATION_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    /// Maximised.
    pub objective: Vec<f64>,
    pub ineq_lhs: Matrix,
    pub ineq_rhs: Vec<f64>,
    pub eq_lhs: Matrix,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// Nonnegative variables, no constraints.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            ineq_lhs: Matrix::zeros(0, n),
            ineq_rhs: Vec::new(),
            eq_lhs: Matrix::zeros(0, n),
            eq_rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// `row . x >= rhs`
    pub fn add_ge(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        self.ineq_lhs.push_row(row);
        self.ineq_rhs.push(rhs);
        self
    }

    /// `row . x <= rhs`
    pub fn add_le(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        self.add_ge(&neg, -rhs)
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        self.eq_lhs.push_row(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let ok = self.ineq_lhs.cols() == n
            && self.eq_lhs.cols() == n
            && self.ineq_lhs.rows() == self.ineq_rhs.len()
            && self.eq_lhs.rows() == self.eq_rhs.len()
            && self.lower.len() == n
            && self.upper.len() == n;
        if !ok {
            return Err(Error::InvalidDimensions("inconsistent linear program".into()));
        }
        let finite = self
            .objective
            .iter()
            .chain(&self.ineq_rhs)
            .chain(&self.eq_rhs)
            .all(|v| v.is_finite());
        let bounds_ok = self
            .lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| !l.is_nan() && !u.is_nan() && *l != f64::INFINITY && *u != f64::NEG_INFINITY);
        if !finite || !bounds_ok {
            return Err(Error::InvalidArgument("non-finite linear program data".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (g, h) in self.ineq_lhs.matvec(x).iter().zip(&self.ineq_rhs) {
            worst = worst.max(h - g);
        }
        for (e, f) in self.eq_lhs.matvec(x).iter().zip(&self.eq_rhs) {
            worst = worst.max((e - f).abs());
        }
        for ((v, l), u) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(l - v).max(v - u);
        }
        worst
    }

    fn rhs_scale(&self) -> f64 {
        let h = self.ineq_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let f = self.eq_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        1.0 + h + f
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn failed(status: LpStatus, iterations: usize) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            objective_value: f64::NAN,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn solve(lp: &LinearProgram) -> LpSolution {
    match Prepared::new(lp) {
        Ok(mut p) => p.maximize(&lp.objective),
        Err(sol) => sol,
    }
}

/// Standard-form variable substitution for one original variable.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    Fixed(f64),
    /// `x = lo + y`
    Shift {
        col: usize,
        lo: f64,
    },
    /// `x = hi - y`
    Flip {
        col: usize,
        hi: f64,
    },
    /// `x = y+ - y-`
    Split {
        pos: usize,
        neg: usize,
    },
}

/// A linear program whose phase one has been completed; any number of
/// objectives can then be optimised over the same feasible region, each run
/// starting from the basis the previous one ended in.
pub struct Prepared<'a> {
    lp: &'a LinearProgram,
    map: Vec<VarMap>,
    tab: Tableau,
    phase_one_iterations: usize,
}

impl<'a> Prepared<'a> {
    pub fn new(lp: &'a LinearProgram) -> std::result::Result<Self, LpSolution> {
        if lp.validate().is_err() {
            return Err(LpSolution::failed(LpStatus::NumericalFailure, 0));
        }
        if lp.lower.iter().zip(&lp.upper).any(|(l, u)| l > u) {
            return Err(LpSolution::failed(LpStatus::Infeasible, 0));
        }

        // variable substitution
        let mut map = Vec::with_capacity(lp.num_vars());
        let mut n_struct = 0;
        let mut upper_rows: Vec<(usize, f64)> = Vec::new();
        for (&lo, &hi) in lp.lower.iter().zip(&lp.upper) {
            let m = if lo == hi {
                VarMap::Fixed(lo)
            } else if lo.is_finite() {
                let col = n_struct;
                n_struct += 1;
                if hi.is_finite() {
                    upper_rows.push((col, hi - lo));
                }
                VarMap::Shift { col, lo }
            } else if hi.is_finite() {
                n_struct += 1;
                VarMap::Flip { col: n_struct - 1, hi }
            } else {
                n_struct += 2;
                VarMap::Split {
                    pos: n_struct - 2,
                    neg: n_struct - 1,
                }
            };
            map.push(m);
        }

        let substitute = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
            let mut out = vec![0.0; n_struct];
            let mut r = rhs;
            for (a, m) in row.iter().zip(&map) {
                match *m {
                    VarMap::Fixed(v) => r -= a * v,
                    VarMap::Shift { col, lo } => {
                        out[col] += a;
                        r -= a * lo;
                    }
                    VarMap::Flip { col, hi } => {
                        out[col] -= a;
                        r -= a * hi;
                    }
                    VarMap::Split { pos, neg } => {
                        out[pos] += a;
                        out[neg] -= a;
                    }
                }
            }
            (out, r)
        };

        let mut rows: Vec<StdRow> = Vec::new();
        for i in 0..lp.ineq_lhs.rows() {
            let (a, r) = substitute(lp.ineq_lhs.row(i), lp.ineq_rhs[i]);
            rows.push(StdRow {
                a,
                kind: RowKind::Ge,
                rhs: r,
            });
        }
        for i in 0..lp.eq_lhs.rows() {
            let (a, r) = substitute(lp.eq_lhs.row(i), lp.eq_rhs[i]);
            rows.push(StdRow {
                a,
                kind: RowKind::Eq,
                rhs: r,
            });
        }
        for (col, width) in upper_rows {
            let mut a = vec![0.0; n_struct];
            a[col] = 1.0;
            rows.push(StdRow {
                a,
                kind: RowKind::Le,
                rhs: width,
            });
        }

        let mut tab = Tableau::build(n_struct, rows);
        let scale = lp.rhs_scale();
        let it0 = tab.iterations;
        if let Err(status) = tab.phase_one(FEAS_TOL * scale) {
            return Err(LpSolution::failed(status, tab.iterations));
        }
        let phase_one_iterations = tab.iterations - it0;
        Ok(Prepared {
            lp,
            map,
            tab,
            phase_one_iterations,
        })
    }

    /// Maximise `objective . x` over the prepared feasible region.
    pub fn maximize(&mut self, objective: &[f64]) -> LpSolution {
        assert_eq!(objective.len(), self.map.len(), "objective length mismatch");
        let mut c = vec![0.0; self.tab.ncols];
        for (cj, m) in objective.iter().zip(&self.map) {
            match *m {
                VarMap::Fixed(_) => {}
                VarMap::Shift { col, .. } => c[col] += cj,
                VarMap::Flip { col, .. } => c[col] -= cj,
                VarMap::Split { pos, neg } => {
                    c[pos] += cj;
                    c[neg] -= cj;
                }
            }
        }
        let start = self.tab.iterations;
        self.tab.set_objective(&c);
        let first_art = self.tab.first_art;
        let status = self.tab.run(|j| j < first_art);
        let iterations = self.tab.iterations - start + std::mem::take(&mut self.phase_one_iterations);
        if let Err(status) = status {
            return LpSolution::failed(status, iterations);
        }

        let y = self.tab.structural_values();
        let x: Vec<f64> = self
            .map
            .iter()
            .map(|m| match *m {
                VarMap::Fixed(v) => v,
                VarMap::Shift { col, lo } => lo + y[col],
                VarMap::Flip { col, hi } => hi - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect();
        if self.lp.primal_residual(&x) > FEAS_TOL * self.lp.rhs_scale() {
            return LpSolution::failed(LpStatus::NumericalFailure, iterations);
        }
        let objective_value = objective.iter().zip(&x).map(|(a, b)| a * b).sum();
        LpSolution {
            status: LpStatus::Optimal,
            x,
            objective_value,
            iterations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowKind {
    Ge,
    Le,
    Eq,
}

struct StdRow {
    a: Vec<f64>,
    kind: RowKind,
    rhs: f64,
}

/// Dense simplex tableau; the last row holds reduced costs `c_j - c_B' B^-1 a_j`
/// and, in its last column, minus the current objective value.
struct Tableau {
    m: usize,
    ncols: usize,
    width: usize,
    first_art: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    n_struct: usize,
}

impl Tableau {
    fn build(n_struct: usize, mut rows: Vec<StdRow>) -> Self {
        let n_slack = rows.iter().filter(|r| r.kind != RowKind::Eq).count();
        // Normalise to rhs >= 0; a row whose slack ends with coefficient +1
        // starts with that slack basic, every other row gets an artificial.
        let mut slack_sign = Vec::with_capacity(rows.len());
        let mut needs_art = Vec::with_capacity(rows.len());
        for r in rows.iter_mut() {
            let mut s = match r.kind {
                RowKind::Ge => -1.0,
                RowKind::Le => 1.0,
                RowKind::Eq => 0.0,
            };
            let flip = r.rhs < 0.0 || (r.rhs == 0.0 && s < 0.0);
            if flip {
                r.a.iter_mut().for_each(|v| *v = -*v);
                r.rhs = -r.rhs;
                s = -s;
            }
            slack_sign.push(s);
            needs_art.push(s <= 0.0);
        }
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let first_art = n_struct + n_slack;
        let ncols = first_art + n_art;
        let width = ncols + 1;
        let m = rows.len();
        let mut t = vec![0.0; (m + 1) * width];
        let mut basis = Vec::with_capacity(m);
        let (mut slack_col, mut art_col) = (n_struct, first_art);
        for (i, r) in rows.iter().enumerate() {
            let row = &mut t[i * width..(i + 1) * width];
            row[..n_struct].copy_from_slice(&r.a);
            row[ncols] = r.rhs;
            let mut basic = None;
            if r.kind != RowKind::Eq {
                row[slack_col] = slack_sign[i];
                if slack_sign[i] > 0.0 {
                    basic = Some(slack_col);
                }
                slack_col += 1;
            }
            if needs_art[i] {
                row[art_col] = 1.0;
                basic = Some(art_col);
                art_col += 1;
            }
            basis.push(basic.expect("every row has a basic column"));
        }
        Tableau {
            m,
            ncols,
            width,
            first_art,
            t,
            basis,
            iterations: 0,
            n_struct,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.ncols]
    }

    fn set_objective(&mut self, c: &[f64]) {
        let w = self.width;
        let zr = self.m * w;
        self.t[zr..zr + w].fill(0.0);
        self.t[zr..zr + self.ncols].copy_from_slice(c);
        for i in 0..self.m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.t[zr + j] -= cb * self.t[i * w + j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.t[r * w + q];
        let prow: Vec<f64> = self.t[r * w..(r + 1) * w].iter().map(|v| v / piv).collect();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f != 0.0 {
                let row = &mut self.t[i * w..(i + 1) * w];
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= f * p;
                }
                row[q] = 0.0;
            }
        }
        self.t[r * w..(r + 1) * w].copy_from_slice(&prow);
        self.basis[r] = q;
    }

    /// Primal simplex iterations until optimal; `allowed` filters entering columns.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> std::result::Result<(), LpStatus> {
        let w = self.width;
        let zr = self.m * w;
        let bland_after = 50 * (self.m + self.ncols);
        let mut local = 0usize;
        loop {
            if self.iterations >= ITERATION_CAP {
                return Err(LpStatus::NumericalFailure);
            }
            let bland = local >= bland_after;
            let mut entering = None;
            let mut best = OPT_TOL;
            for j in (0..self.ncols).filter(|&j| allowed(j)) {
                let z = self.t[zr + j];
                if z > best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = z;
                }
            }
            let Some(q) = entering else {
                return Ok(());
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i * w + q];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = 1e-12 * (1.0 + br.abs());
                        if ratio < br - tie || (ratio <= br + tie && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Err(LpStatus::Unbounded);
            };
            self.pivot(r, q);
            self.iterations += 1;
            local += 1;
        }
    }

    fn phase_one(&mut self, feas_tol: f64) -> std::result::Result<(), LpStatus> {
        if self.first_art < self.ncols {
            let mut c = vec![0.0; self.ncols];
            c[self.first_art..].fill(-1.0);
            self.set_objective(&c);
            self.run(|_| true)?;
            let infeas: f64 = (0..self.m)
                .filter(|&i| self.basis[i] >= self.first_art)
                .map(|i| self.rhs(i))
                .sum();
            if infeas > feas_tol {
                return Err(LpStatus::Infeasible);
            }
            self.evict_artificials();
        }
        Ok(())
    }

    /// Pivot zero-level artificials out of the basis; rows where that is
    /// impossible are linearly dependent and are dropped.
    fn evict_artificials(&mut self) {
        let w = self.width;
        let mut redundant = Vec::new();
        for r in 0..self.m {
            if self.basis[r] < self.first_art {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_art {
                let a = self.t[r * w + j].abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => self.pivot(r, j),
                None => redundant.push(r),
            }
        }
        if redundant.is_empty() {
            return;
        }
        let mut t = Vec::with_capacity(self.t.len());
        let mut basis = Vec::with_capacity(self.m);
        for i in 0..=self.m {
            if redundant.contains(&i) {
                continue;
            }
            t.extend_from_slice(&self.t[i * w..(i + 1) * w]);
            if i < self.m {
                basis.push(self.basis[i]);
            }
        }
        self.m -= redundant.len();
        self.t = t;
        self.basis = basis;
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n_struct];
        for i in 0..self.m {
            if self.basis[i] < self.n_struct {
                y[self.basis[i]] = self.rhs(i);
            }
        }
        y
    }
}

/// `min 1'x  s.t.  A x = b, x >= 0`.
pub fn min_l1_nonneg(a: &Matrix, b: &[f64]) -> Result<LpSolution> {
    if b.len() != a.rows() {
        return Err(Error::InvalidDimensions("b must have one entry per row of A".into()));
    }
    let mut lp = LinearProgram::new(vec![-1.0; a.cols()]);
    for (i, &rhs) in b.iter().enumerate() {
        lp.add_eq(a.row(i), rhs);
    }
    let mut sol = solve(&lp);
    if sol.is_optimal() {
        sol.objective_value = -sol.objective_value;
    }
    Ok(sol)
}

fn box_lp(a: &Matrix, b: &[f64]) -> Result<LinearProgram> {
    if b.len() != a.rows() {
        return Err(Error::InvalidDimensions("b must have one entry per row of A".into()));
    }
    let mut lp = LinearProgram::new(vec![0.0; a.cols()]);
    for (i, &rhs) in b.iter().enumerate() {
        lp.add_eq(a.row(i), rhs);
    }
    lp.upper.fill(1.0);
    Ok(lp)
}

fn coordinate_range(p: &mut Prepared<'_>, ncols: usize, j: usize) -> Result<(f64, f64)> {
    let mut e = vec![0.0; ncols];
    e[j] = -1.0;
    let lo = p.maximize(&e);
    if !lo.is_optimal() {
        return Err(Error::Lp(lo.status));
    }
    e[j] = 1.0;
    let hi = p.maximize(&e);
    if !hi.is_optimal() {
        return Err(Error::Lp(hi.status));
    }
    Ok((lo.x[j], hi.x[j]))
}

/// Range of coordinate `j` over `{x : A x = b, 0 <= x <= 1}`.
pub fn box_range(a: &Matrix, b: &[f64], j: usize) -> Result<(f64, f64)> {
    if j >= a.cols() {
        return Err(Error::InvalidArgument(format!("coordinate {j} out of range")));
    }
    let lp = box_lp(a, b)?;
    let mut p = Prepared::new(&lp).map_err(|s| Error::Lp(s.status))?;
    coordinate_range(&mut p, a.cols(), j)
}

/// [`box_range`] for every coordinate, sharing one phase-one solve.
pub fn box_ranges(a: &Matrix, b: &[f64]) -> Result<Vec<(f64, f64)>> {
    let lp = box_lp(a, b)?;
    let mut p = Prepared::new(&lp).map_err(|s| Error::Lp(s.status))?;
    (0..a.cols()).map(|j| coordinate_range(&mut p, a.cols(), j)).collect()
}
