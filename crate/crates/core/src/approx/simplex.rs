//! Dense bounded-variable primal simplex for `max c.x, A x = b, 0 <= x <= upper`.
//!
//! The caller supplies a starting basis made of identity columns together with
//! the nonbasic columns held at their upper bound; the implied basic values
//! must be feasible, so no phase one is run.

use thiserror::Error;

pub const PIVOT_TOLERANCE: f64 = 1e-10;
const COST_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SimplexError {
    #[error("starting basis is not an identity basis or is infeasible")]
    BadBasis,
    #[error("linear program is unbounded along column {0}")]
    Unbounded(usize),
    #[error("simplex exceeded {0} iterations, also after perturbation")]
    Cycling(usize),
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `f64::INFINITY` for unbounded columns.
    pub upper: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StartingBasis {
    /// Column basic in each row.
    pub basic: Vec<usize>,
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub perturbed: bool,
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    beta: Vec<f64>,
    basic: Vec<usize>,
    /// Position in `basic`, or `usize::MAX` for nonbasic columns.
    row_of: Vec<usize>,
    at_upper: Vec<bool>,
    upper: Vec<f64>,
}

enum Step {
    Optimal,
    Moved { degenerate: bool },
}

impl Tableau {
    fn new(lp: &LinearProgram, start: &StartingBasis) -> Result<Tableau, SimplexError> {
        let (rows, cols) = (lp.rows, lp.cols);
        if start.basic.len() != rows || start.at_upper.len() != cols {
            return Err(SimplexError::BadBasis);
        }
        let mut row_of = vec![usize::MAX; cols];
        for (r, &k) in start.basic.iter().enumerate() {
            if k >= cols || row_of[k] != usize::MAX {
                return Err(SimplexError::BadBasis);
            }
            for i in 0..rows {
                if lp.a[i * cols + k] != if i == r { 1.0 } else { 0.0 } {
                    return Err(SimplexError::BadBasis);
                }
            }
            row_of[k] = r;
        }
        let mut beta = lp.b.clone();
        for k in 0..cols {
            if start.at_upper[k] {
                if row_of[k] != usize::MAX || !lp.upper[k].is_finite() {
                    return Err(SimplexError::BadBasis);
                }
                for (i, bi) in beta.iter_mut().enumerate() {
                    *bi -= lp.a[i * cols + k] * lp.upper[k];
                }
            }
        }
        for (r, &k) in start.basic.iter().enumerate() {
            if beta[r] < -1e-9 || beta[r] > lp.upper[k] + 1e-9 {
                return Err(SimplexError::BadBasis);
            }
        }
        let mut d = lp.c.clone();
        for (r, &k) in start.basic.iter().enumerate() {
            let cb = lp.c[k];
            if cb != 0.0 {
                for j in 0..cols {
                    d[j] -= cb * lp.a[r * cols + j];
                }
            }
        }
        Ok(Tableau {
            rows,
            cols,
            t: lp.a.clone(),
            d,
            beta,
            basic: start.basic.clone(),
            row_of,
            at_upper: start.at_upper.clone(),
            upper: lp.upper.clone(),
        })
    }

    fn choose_entering(&self, bland: bool) -> Option<usize> {
        let mut best = None;
        let mut best_score = COST_TOLERANCE;
        for k in 0..self.cols {
            if self.row_of[k] != usize::MAX || self.upper[k] == 0.0 {
                continue;
            }
            let score = if self.at_upper[k] { -self.d[k] } else { self.d[k] };
            if score > COST_TOLERANCE {
                if bland {
                    return Some(k);
                }
                if score > best_score {
                    best_score = score;
                    best = Some(k);
                }
            }
        }
        best
    }

    fn step(&mut self, bland: bool) -> Result<Step, SimplexError> {
        let Some(k) = self.choose_entering(bland) else {
            return Ok(Step::Optimal);
        };
        let cols = self.cols;
        // x_k moves by dir * t, basic r moves by -dir * t * T[r,k]
        let dir = if self.at_upper[k] { -1.0 } else { 1.0 };
        let mut limit = self.upper[k];
        let mut leave: Option<(usize, bool)> = None;
        for r in 0..self.rows {
            let a = dir * self.t[r * cols + k];
            let (ratio, to_upper) = if a > PIVOT_TOLERANCE {
                (self.beta[r].max(0.0) / a, false)
            } else if a < -PIVOT_TOLERANCE {
                let ub = self.upper[self.basic[r]];
                if !ub.is_finite() {
                    continue;
                }
                ((ub - self.beta[r]).max(0.0) / -a, true)
            } else {
                continue;
            };
            let better = match leave {
                _ if ratio < limit => true,
                Some((lr, _)) if ratio == limit => self.basic[r] < self.basic[lr],
                _ => false,
            };
            if better {
                limit = ratio;
                leave = Some((r, to_upper));
            }
        }
        if !limit.is_finite() {
            return Err(SimplexError::Unbounded(k));
        }
        let t = limit;
        for r in 0..self.rows {
            let a = self.t[r * cols + k];
            if a != 0.0 {
                self.beta[r] -= dir * t * a;
            }
        }
        match leave {
            None => {
                self.at_upper[k] = !self.at_upper[k];
            }
            Some((r, to_upper)) => {
                let out = self.basic[r];
                let entering_value = if self.at_upper[k] { self.upper[k] } else { 0.0 } + dir * t;
                self.pivot(r, k);
                self.beta[r] = entering_value;
                self.row_of[out] = usize::MAX;
                self.at_upper[out] = to_upper;
                self.row_of[k] = r;
                self.at_upper[k] = false;
                self.basic[r] = k;
            }
        }
        Ok(Step::Moved { degenerate: t <= PIVOT_TOLERANCE })
    }

    fn pivot(&mut self, r: usize, k: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + k];
        let row_start = r * cols;
        for j in 0..cols {
            self.t[row_start + j] /= p;
        }
        let nz: Vec<usize> = (0..cols).filter(|&j| self.t[row_start + j] != 0.0).collect();
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.t[row_start + j]).collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * cols + k];
            if f == 0.0 {
                continue;
            }
            let base = i * cols;
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                self.t[base + j] -= f * v;
            }
            self.t[base + k] = 0.0;
        }
        let f = self.d[k];
        if f != 0.0 {
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                self.d[j] -= f * v;
            }
            self.d[k] = 0.0;
        }
    }

    fn solution(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.cols).map(|k| if self.at_upper[k] { self.upper[k] } else { 0.0 }).collect();
        for (r, &k) in self.basic.iter().enumerate() {
            x[k] = self.beta[r].clamp(0.0, self.upper[k]);
        }
        x
    }
}

fn run(lp: &LinearProgram, start: &StartingBasis, cap: usize) -> Result<Option<(Vec<f64>, usize)>, SimplexError> {
    let mut tab = Tableau::new(lp, start)?;
    let mut bland = false;
    for it in 0..cap {
        match tab.step(bland)? {
            Step::Optimal => return Ok(Some((tab.solution(), it))),
            // Bland's rule while degenerate, largest reduced cost otherwise
            Step::Moved { degenerate } => bland = degenerate,
        }
    }
    Ok(None)
}

/// Solves the program; past the iteration cap it retries once with a slightly
/// relaxed right-hand side `b + delta`.
pub fn solve(lp: &LinearProgram, start: &StartingBasis) -> Result<SimplexSolution, SimplexError> {
    let cap = 50 * (lp.rows + lp.cols) + 1000;
    let finish = |x: Vec<f64>, iterations: usize, perturbed: bool| {
        let objective = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
        SimplexSolution { x, objective, iterations, perturbed }
    };
    if let Some((x, it)) = run(lp, start, cap)? {
        return Ok(finish(x, it, false));
    }
    log::warn!("simplex hit {cap} iterations; retrying with a perturbed right-hand side");
    let mut perturbed = lp.clone();
    for (i, bi) in perturbed.b.iter_mut().enumerate() {
        *bi += 1e-9 * (i + 1) as f64 / lp.rows as f64;
    }
    match run(&perturbed, start, cap)? {
        Some((x, it)) => Ok(finish(x, cap + it, true)),
        None => Err(SimplexError::Cycling(cap)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// max x + y, x + 2y + s1 = 4, 3x + y + s2 = 6, 0 <= x, y <= 10
    fn small() -> (LinearProgram, StartingBasis) {
        let lp = LinearProgram {
            rows: 2,
            cols: 4,
            a: vec![1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0],
            b: vec![4.0, 6.0],
            upper: vec![10.0, 10.0, f64::INFINITY, f64::INFINITY],
            c: vec![1.0, 1.0, 0.0, 0.0],
        };
        (lp, StartingBasis { basic: vec![2, 3], at_upper: vec![false; 4] })
    }

    #[test]
    fn textbook_optimum() {
        let (lp, start) = small();
        let s = solve(&lp, &start).unwrap();
        assert!((s.objective - 2.8).abs() < 1e-12);
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn upper_bounds_bind() {
        let (mut lp, start) = small();
        lp.upper[0] = 1.0;
        lp.upper[1] = 1.0;
        let s = solve(&lp, &start).unwrap();
        assert_eq!(s.objective, 2.0);
    }

    #[test]
    fn unbounded_and_bad_basis() {
        let (mut lp, start) = small();
        lp.a = vec![-1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        lp.upper[0] = f64::INFINITY;
        assert_eq!(solve(&lp, &start).unwrap_err(), SimplexError::Unbounded(0));
        let (lp, _) = small();
        let bad = StartingBasis { basic: vec![0, 3], at_upper: vec![false; 4] };
        assert_eq!(solve(&lp, &bad).unwrap_err(), SimplexError::BadBasis);
    }
}
