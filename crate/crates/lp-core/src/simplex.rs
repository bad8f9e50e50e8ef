use crate::{LinearProgram, LpError, Relation, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest eligible index enters and leaves; never cycles.
    Bland,
    /// Most negative reduced cost enters (lowest index on ties), ratio ties
    /// broken by lowest basic index. Usually far fewer pivots. Falls back
    /// to Bland's choice during long degenerate stalls.
    Dantzig,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub feasibility_tol: f64,
    pub pivot_tol: f64,
    pub optimality_tol: f64,
    pub max_iters: usize,
    pub rule: PivotRule,
    /// Relative right-hand-side shift applied while pivoting and removed at
    /// the end; breaks ties in highly degenerate programs. Zero disables it.
    pub perturbation: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feasibility_tol: 1e-7,
            pivot_tol: 1e-9,
            optimality_tol: 1e-9,
            max_iters: 1_000_000,
            rule: PivotRule::Bland,
            perturbation: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// A feasible point was found; with an objective it is optimal.
    Feasible,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: Status,
    /// Primal point (empty unless feasible).
    pub assignment: Vec<f64>,
    pub objective_value: f64,
    /// Farkas multipliers over the original rows when infeasible: `y_i >= 0`
    /// on `<=` rows, `y_i <= 0` on `>=` rows, free on `=` rows, with
    /// `y^T A >= 0` on nonnegative columns, `= 0` on free columns and
    /// `y^T b < 0`.
    pub farkas: Option<Vec<f64>>,
    /// Dual values of an optimal minimization, one per row, with the same
    /// sign convention as `farkas` negated: `min c x = b^T duals`.
    pub duals: Option<Vec<f64>>,
    pub iterations: usize,
}

struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Initial tableau, kept for reinversion.
    orig: Vec<f64>,
    /// Cost row of the current phase.
    cost: Vec<f64>,
    /// Columns forming the identity in `orig`; in the current tableau they
    /// hold `B^-1`.
    init_col: Vec<usize>,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let piv = self.data[r * w + e];
        let inv = 1.0 / piv;
        let mut nz: Vec<(usize, f64)> = Vec::new();
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    nz.push((j, *v));
                }
            }
            row[e] = 1.0;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + e];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &(j, v) in &nz {
                row[j] -= f * v;
            }
            row[e] = 0.0;
        }
        let f = self.obj[e];
        if f != 0.0 {
            for &(j, v) in &nz {
                self.obj[j] -= f * v;
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
    }

    /// Sets the phase cost row and prices out the basis.
    fn set_cost(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.reprice();
    }

    fn reprice(&mut self) {
        let w = self.width;
        self.obj.clone_from(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.obj[j] -= cb * self.data[i * w + j];
                }
            }
        }
    }

    /// Rebuilds the tableau as `B^-1 * orig` for the current basis, clearing
    /// accumulated rounding. Leaves the tableau untouched if `B` is
    /// numerically singular.
    fn reinvert(&mut self) {
        let (m, w) = (self.m, self.width);
        if m == 0 {
            return;
        }
        // Gauss-Jordan on [B | I] with partial pivoting.
        let mut a = vec![0.0; m * 2 * m];
        for i in 0..m {
            for (k, &col) in self.basis.iter().enumerate() {
                a[i * 2 * m + k] = self.orig[i * w + col];
            }
            a[i * 2 * m + m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| a[x * 2 * m + c].abs().total_cmp(&a[y * 2 * m + c].abs())).expect("nonempty");
            if a[p * 2 * m + c].abs() < 1e-12 {
                return;
            }
            if p != c {
                for j in 0..2 * m {
                    a.swap(p * 2 * m + j, c * 2 * m + j);
                }
            }
            let inv = 1.0 / a[c * 2 * m + c];
            for j in 0..2 * m {
                a[c * 2 * m + j] *= inv;
            }
            for i in 0..m {
                if i != c {
                    let f = a[i * 2 * m + c];
                    if f != 0.0 {
                        for j in 0..2 * m {
                            a[i * 2 * m + j] -= f * a[c * 2 * m + j];
                        }
                    }
                }
            }
        }
        let mut data = vec![0.0; m * w];
        for i in 0..m {
            let out = &mut data[i * w..(i + 1) * w];
            for k in 0..m {
                let f = a[i * 2 * m + m + k];
                if f != 0.0 {
                    let src = &self.orig[k * w..(k + 1) * w];
                    for (o, &v) in out.iter_mut().zip(src) {
                        *o += f * v;
                    }
                }
            }
            out[self.basis[i]] = 1.0;
        }
        // Basis columns are exact unit vectors.
        for i in 0..m {
            for (k, &col) in self.basis.iter().enumerate() {
                data[i * w + col] = if i == k { 1.0 } else { 0.0 };
            }
        }
        self.data = data;
        self.reprice();
    }
}

struct Layout {
    /// Standard-form columns of each original variable with their sign.
    var_cols: Vec<Vec<(usize, f64)>>,
    init_is_artificial: Vec<bool>,
    row_sign: Vec<f64>,
    first_artificial: usize,
    ncols: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Consecutive degenerate pivots after which Bland's rule takes over
/// until the objective moves again.
const DEGENERATE_SWITCH: usize = 2000;
/// Pivots between reinversions.
const REINVERT_EVERY: usize = 500;
/// Dual pivots allowed when restoring the unperturbed right-hand side.
const CLEANUP_LIMIT: usize = 10 * DEGENERATE_SWITCH;

enum Cleanup {
    Done,
    /// This row's violation cannot be repaired: a Farkas row.
    Blocked(usize),
    Stalled,
}

fn entering_column(t: &Tableau, allowed: usize, rule: PivotRule, tol: f64) -> Option<usize> {
    match rule {
        PivotRule::Bland => (0..allowed).find(|&j| t.obj[j] < -tol),
        PivotRule::Dantzig => {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..allowed {
                let r = t.obj[j];
                if r < -tol && best.is_none_or(|(_, b)| r < b) {
                    best = Some((j, r));
                }
            }
            best.map(|(j, _)| j)
        }
    }
}

/// Ratio test. Among rows within tolerance of the minimum ratio, Bland
/// takes the lowest basic index and Dantzig the largest pivot element.
fn leaving_row(t: &Tableau, e: usize, rule: PivotRule, opts: &SolveOptions) -> Option<(usize, f64)> {
    let rhs = t.width - 1;
    let mut min = f64::INFINITY;
    for i in 0..t.m {
        let a = t.at(i, e);
        if a > opts.pivot_tol {
            min = min.min(t.at(i, rhs).max(0.0) / a);
        }
    }
    if !min.is_finite() {
        return None;
    }
    let slack = 1e-12 * (1.0 + min);
    let mut best: Option<(usize, f64)> = None;
    for i in 0..t.m {
        let a = t.at(i, e);
        if a <= opts.pivot_tol || t.at(i, rhs).max(0.0) / a > min + slack {
            continue;
        }
        let better = match (best, rule) {
            (None, _) => true,
            (Some((k, _)), PivotRule::Bland) => t.basis[i] < t.basis[k],
            (Some((k, bk)), PivotRule::Dantzig) => a > bk || a == bk && t.basis[i] < t.basis[k],
        };
        if better {
            best = Some((i, a));
        }
    }
    best.map(|(i, _)| (i, min))
}

/// Dual simplex on a dual-feasible basis until every basic value is at
/// least `-tol`. Rows that admit no entering column are left alone when
/// their violation is within the feasibility tolerance.
fn dual_cleanup(t: &mut Tableau, allowed: usize, first_artificial: usize, opts: &SolveOptions, iters: &mut usize) -> Cleanup {
    let rhs = t.width - 1;
    let mut blocked = vec![false; t.m];
    let mut pivots = 0;
    loop {
        // Bland's dual rule after a long run, which cannot cycle.
        let bland = pivots >= DEGENERATE_SWITCH;
        for i in 0..t.m {
            if t.basis[i] >= first_artificial && t.at(i, rhs).abs() > opts.feasibility_tol {
                return Cleanup::Blocked(i);
            }
        }
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..t.m {
            let v = t.at(i, rhs);
            if blocked[i] || t.basis[i] >= first_artificial || v >= -opts.feasibility_tol * 1e-3 {
                continue;
            }
            let better = match worst {
                None => true,
                Some((k, w)) => {
                    if bland {
                        t.basis[i] < t.basis[k]
                    } else {
                        v < w
                    }
                }
            };
            if better {
                worst = Some((i, v));
            }
        }
        let Some((r, v)) = worst else { return Cleanup::Done };
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..allowed {
            let a = t.at(r, j);
            if a < -opts.pivot_tol {
                let ratio = t.obj[j].max(0.0) / -a;
                let better = match best {
                    None => true,
                    Some((_, br, ba)) => ratio < br - 1e-12 * (1.0 + br) || !bland && (ratio - br).abs() <= 1e-12 * (1.0 + br) && -a > ba,
                };
                if better {
                    best = Some((j, ratio, -a));
                }
            }
        }
        let Some((e, _, _)) = best else {
            if v < -opts.feasibility_tol {
                return Cleanup::Blocked(r);
            }
            blocked[r] = true;
            continue;
        };
        if pivots >= CLEANUP_LIMIT {
            return Cleanup::Stalled;
        }
        pivots += 1;
        *iters += 1;
        t.pivot(r, e);
        blocked.iter_mut().for_each(|b| *b = false);
    }
}

/// Farkas multipliers over the original rows from tableau row `r`, whose
/// basic value is infeasible and which no column can repair.
fn farkas_from_row(t: &Tableau, layout: &Layout, r: usize) -> Vec<f64> {
    let v = t.at(r, t.width - 1);
    // Structural rows read `a x = v < 0` with `a >= 0`; a stuck artificial
    // reads `0 x = v`, negated when positive.
    let s = if t.basis[r] >= layout.first_artificial && v > 0.0 { -1.0 } else { 1.0 };
    (0..t.m).map(|i| s * t.at(r, t.init_col[i]) * layout.row_sign[i]).collect()
}

fn infeasible(farkas: Vec<f64>, iterations: usize) -> LpSolution {
    LpSolution {
        status: Status::Infeasible,
        assignment: Vec::new(),
        objective_value: f64::NAN,
        farkas: Some(farkas),
        duals: None,
        iterations,
    }
}

/// Replaces the right-hand side by the unperturbed one through the
/// current basis inverse.
fn unperturb(t: &mut Tableau, b: &[f64]) {
    let w = t.width;
    for (i, &bi) in b.iter().enumerate() {
        t.orig[i * w + w - 1] = bi;
    }
    t.reinvert();
}

fn run(t: &mut Tableau, allowed: usize, opts: &SolveOptions, iters: &mut usize) -> Result<Outcome, LpError> {
    let mut stalled = 0;
    let mut since_reinvert = 0;
    loop {
        let rule = if stalled >= DEGENERATE_SWITCH { PivotRule::Bland } else { opts.rule };
        let Some(e) = entering_column(t, allowed, rule, opts.optimality_tol) else {
            if since_reinvert > 0 {
                t.reinvert();
                since_reinvert = 0;
                continue;
            }
            return Ok(Outcome::Optimal);
        };
        let Some((r, ratio)) = leaving_row(t, e, rule, opts) else {
            if since_reinvert > 0 {
                t.reinvert();
                since_reinvert = 0;
                continue;
            }
            return Ok(Outcome::Unbounded);
        };
        if ratio <= opts.feasibility_tol * 1e-3 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if *iters >= opts.max_iters {
            return Err(LpError::IterationLimit(*iters));
        }
        *iters += 1;
        t.pivot(r, e);
        since_reinvert += 1;
        if since_reinvert >= REINVERT_EVERY {
            t.reinvert();
            since_reinvert = 0;
        }
    }
}

fn build(lp: &LinearProgram) -> (Tableau, Layout) {
    let m = lp.num_constraints();
    let mut ncols = 0;
    let var_cols: Vec<Vec<(usize, f64)>> = (0..lp.num_vars())
        .map(|j| match lp.var_kind(j) {
            VarKind::NonNegative => {
                ncols += 1;
                vec![(ncols - 1, 1.0)]
            }
            VarKind::Free => {
                ncols += 2;
                vec![(ncols - 2, 1.0), (ncols - 1, -1.0)]
            }
        })
        .collect();
    let row_sign: Vec<f64> = lp.constraints().iter().map(|c| if c.rhs < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut slack_col = vec![None; m];
    for (i, c) in lp.constraints().iter().enumerate() {
        let coef = match c.relation {
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
            Relation::Eq => continue,
        };
        slack_col[i] = Some((ncols, coef * row_sign[i]));
        ncols += 1;
    }
    let first_artificial = ncols;
    let mut init_col = vec![0; m];
    let mut init_is_artificial = vec![false; m];
    for i in 0..m {
        match slack_col[i] {
            Some((col, s)) if s > 0.0 => init_col[i] = col,
            _ => {
                init_col[i] = ncols;
                init_is_artificial[i] = true;
                ncols += 1;
            }
        }
    }
    let width = ncols + 1;
    let mut data = vec![0.0; m * width];
    for (i, c) in lp.constraints().iter().enumerate() {
        let row = &mut data[i * width..(i + 1) * width];
        for &(j, a) in &c.coeffs {
            for &(col, s) in &var_cols[j] {
                row[col] += row_sign[i] * s * a;
            }
        }
        if let Some((col, s)) = slack_col[i] {
            row[col] = s;
        }
        if init_is_artificial[i] {
            row[init_col[i]] = 1.0;
        }
        row[ncols] = row_sign[i] * c.rhs;
    }
    let tableau =
        Tableau { m, width, orig: data.clone(), data, obj: vec![0.0; width], cost: vec![0.0; width], basis: init_col.clone(), init_col };
    let layout = Layout { var_cols, init_is_artificial, row_sign, first_artificial, ncols };
    (tableau, layout)
}

/// Solves `lp` with the two-phase primal simplex method on a dense tableau.
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    if opts.perturbation > 0.0 {
        match solve_perturbed(lp, opts)? {
            Some(sol) => return Ok(sol),
            None => return solve(lp, &SolveOptions { perturbation: 0.0, ..opts.clone() }),
        }
    }
    solve_perturbed(lp, opts).map(|s| s.expect("unperturbed solves always finish"))
}

/// The simplex method with the configured perturbation. `None` means the
/// perturbation could not be removed and the caller should solve without it.
fn solve_perturbed(lp: &LinearProgram, opts: &SolveOptions) -> Result<Option<LpSolution>, LpError> {
    let (mut t, layout) = build(lp);
    let m = t.m;
    let rhs = layout.ncols;
    let mut iters = 0;
    let original_rhs: Vec<f64> = (0..m).map(|i| t.orig[i * t.width + rhs]).collect();
    let mut perturbed = 0.0;
    if opts.perturbation > 0.0 {
        // Deterministic shifts in [0.5, 1) * perturbation.
        for i in 0..m {
            let u = 0.5 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract();
            let d = opts.perturbation * u * (1.0 + original_rhs[i].abs());
            t.orig[i * t.width + rhs] += d;
            t.data[i * t.width + rhs] += d;
            perturbed += d;
        }
    }

    // Phase 1: minimize the sum of artificials.
    let mut cost = vec![0.0; t.width];
    for i in 0..m {
        if layout.init_is_artificial[i] {
            cost[t.init_col[i]] = 1.0;
        }
    }
    t.set_cost(cost);
    run(&mut t, layout.ncols, opts, &mut iters)?;
    let infeasibility = -t.obj[rhs];
    if infeasibility > opts.feasibility_tol + perturbed {
        let y: Vec<f64> = (0..m)
            .map(|i| {
                let c = if layout.init_is_artificial[i] { 1.0 } else { 0.0 };
                let pi = c - t.obj[t.init_col[i]];
                -pi * layout.row_sign[i]
            })
            .collect();
        return Ok(Some(infeasible(y, iters)));
    }

    // Drive artificials out of the basis where possible.
    for i in 0..m {
        if t.basis[i] >= layout.first_artificial {
            let row = t.row(i);
            let mut best: Option<(usize, f64)> = None;
            for (j, &v) in row.iter().enumerate().take(layout.first_artificial) {
                if v.abs() > opts.pivot_tol && best.is_none_or(|(_, b)| v.abs() > b) {
                    best = Some((j, v.abs()));
                }
            }
            if let Some((j, _)) = best {
                t.pivot(i, j);
            }
        }
    }

    let mut duals = None;
    if let Some(obj) = lp.objective() {
        let mut cost = vec![0.0; t.width];
        for &(j, c) in obj {
            for &(col, s) in &layout.var_cols[j] {
                cost[col] += s * c;
            }
        }
        t.set_cost(cost);
        let mut outcome = run(&mut t, layout.first_artificial, opts, &mut iters)?;
        if perturbed > 0.0 && matches!(outcome, Outcome::Optimal) {
            let fallback = (basic_point(&t, &layout), row_duals(&t, &layout));
            perturbed = 0.0;
            match restore(&mut t, &layout, lp, &original_rhs, fallback, opts, &mut iters) {
                Restored::Clean => {}
                Restored::Final(sol) => return Ok(Some(sol)),
                Restored::Retry => return Ok(None),
            }
            outcome = run(&mut t, layout.first_artificial, opts, &mut iters)?;
        }
        match outcome {
            Outcome::Unbounded => {
                return Ok(Some(LpSolution {
                    status: Status::Unbounded,
                    assignment: Vec::new(),
                    objective_value: f64::NEG_INFINITY,
                    farkas: None,
                    duals: None,
                    iterations: iters,
                }));
            }
            Outcome::Optimal => duals = row_duals(&t, &layout),
        }
    }

    if perturbed > 0.0 {
        t.set_cost(vec![0.0; t.width]);
        let fallback = (basic_point(&t, &layout), None);
        match restore(&mut t, &layout, lp, &original_rhs, fallback, opts, &mut iters) {
            Restored::Clean => {}
            Restored::Final(sol) => return Ok(Some(sol)),
            Restored::Retry => return Ok(None),
        }
    }
    Ok(Some(feasible(lp, basic_point(&t, &layout), duals, iters)))
}

fn basic_point(t: &Tableau, layout: &Layout) -> Vec<f64> {
    let mut xs = vec![0.0; layout.ncols];
    for i in 0..t.m {
        xs[t.basis[i]] = t.at(i, t.width - 1).max(0.0);
    }
    layout.var_cols.iter().map(|cols| cols.iter().map(|&(c, s)| s * xs[c]).sum()).collect()
}

fn row_duals(t: &Tableau, layout: &Layout) -> Option<Vec<f64>> {
    Some((0..t.m).map(|i| -t.obj[t.init_col[i]] * layout.row_sign[i]).collect())
}

fn feasible(lp: &LinearProgram, assignment: Vec<f64>, duals: Option<Vec<f64>>, iterations: usize) -> LpSolution {
    let objective_value = lp.objective_value(&assignment);
    LpSolution { status: Status::Feasible, assignment, objective_value, farkas: None, duals, iterations }
}

enum Restored {
    /// The tableau is primal feasible for the original program.
    Clean,
    Final(LpSolution),
    Retry,
}

/// Removes the perturbation and repairs the basis. When the repair fails,
/// the perturbed point is kept if it satisfies the original program within
/// tolerance; otherwise the row that blocked the repair proves infeasibility.
fn restore(
    t: &mut Tableau,
    layout: &Layout,
    lp: &LinearProgram,
    original_rhs: &[f64],
    fallback: (Vec<f64>, Option<Vec<f64>>),
    opts: &SolveOptions,
    iters: &mut usize,
) -> Restored {
    unperturb(t, original_rhs);
    let outcome = dual_cleanup(t, layout.first_artificial, layout.first_artificial, opts, iters);
    if matches!(outcome, Cleanup::Done) {
        return Restored::Clean;
    }
    if lp.max_violation(&fallback.0) <= opts.feasibility_tol {
        return Restored::Final(feasible(lp, fallback.0, fallback.1, *iters));
    }
    match outcome {
        Cleanup::Blocked(r) => Restored::Final(infeasible(farkas_from_row(t, layout, r), *iters)),
        _ => Restored::Retry,
    }
}

/// Checks a Farkas certificate after scaling it to unit max-norm.
pub fn verify_farkas(lp: &LinearProgram, y: &[f64], tol: f64) -> bool {
    if y.len() != lp.num_constraints() {
        return false;
    }
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return false;
    }
    let y: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let mut ya = vec![0.0; lp.num_vars()];
    let mut yb = 0.0;
    for (c, &yi) in lp.constraints().iter().zip(&y) {
        let sign_ok = match c.relation {
            Relation::Le => yi >= -tol,
            Relation::Ge => yi <= tol,
            Relation::Eq => true,
        };
        if !sign_ok {
            return false;
        }
        for &(j, a) in &c.coeffs {
            ya[j] += yi * a;
        }
        yb += yi * c.rhs;
    }
    let cols_ok = ya.iter().enumerate().all(|(j, &v)| match lp.var_kind(j) {
        VarKind::NonNegative => v >= -tol,
        VarKind::Free => v.abs() <= tol,
    });
    cols_ok && yb < -tol
}
