use rayon::prelude::*;

use super::{LeakageError, LinearSystem};
use crate::fixedpoint::{max_multiplier_within, parse_decimal, GridValue, Scale};

/// Default cap on candidate assignments without the long-running flag.
pub const DEFAULT_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerateOptions {
    /// Additive tolerance, in z units, for a solved variable to count as on the grid.
    pub tolerance: f64,
    pub budget: f64,
    pub long_running: bool,
    /// Keep every accepted assignment (as grid multipliers), not just the counts.
    pub collect: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            tolerance: 1e-12,
            budget: DEFAULT_BUDGET,
            long_running: false,
            collect: false,
        }
    }
}

/// Per-variable histogram of grid values over all accepted assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub delta: Scale,
    /// Grid multipliers run over `-max_multiplier..=max_multiplier`.
    pub max_multiplier: i64,
    /// `counts[j][m + max_multiplier]`.
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
    pub free_variables: Vec<usize>,
    pub bound_variables: Vec<usize>,
    pub warnings: Vec<String>,
    /// Accepted assignments in lexicographic order, when requested.
    pub solutions: Option<Vec<Vec<i64>>>,
}

impl FrequencyTable {
    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn multipliers(&self) -> impl Iterator<Item = i64> {
        -self.max_multiplier..=self.max_multiplier
    }

    pub fn count(&self, variable: usize, multiplier: i64) -> u64 {
        self.counts[variable][(multiplier + self.max_multiplier) as usize]
    }

    pub fn per_mille(&self, variable: usize, multiplier: i64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            1000.0 * self.count(variable, multiplier) as f64 / self.total as f64
        }
    }

    /// Whether an assignment (as multipliers) is among the stored solutions.
    pub fn contains(&self, multipliers: &[i64]) -> Option<bool> {
        self.solutions
            .as_ref()
            .map(|s| s.binary_search_by(|x| x.as_slice().cmp(multipliers)).is_ok())
    }

    /// `variable,grid_value,count,per_mille` rows; variables are 1-based.
    pub fn to_csv(&self) -> String {
        let decimals = decimals_for(self.delta);
        let mut out = String::from("variable,grid_value,count,per_mille\n");
        for j in 0..self.n() {
            for m in self.multipliers() {
                let value = GridValue::new(m, self.delta).to_f64();
                out.push_str(&format!(
                    "{},{:.*},{},{:.3}\n",
                    j + 1,
                    decimals,
                    value,
                    self.count(j, m),
                    self.per_mille(j, m)
                ));
            }
        }
        out
    }

    /// Binary PGM: one column per variable, one row per grid value (largest
    /// on top). Each cell is shaded by its count relative to the maximum of
    /// its column, white for zero and black for the maximum.
    pub fn to_pgm(&self, cell: usize) -> Vec<u8> {
        let cell = cell.max(1);
        let cols = self.n();
        let rows = (2 * self.max_multiplier + 1) as usize;
        let (w, h) = (cols * cell, rows * cell);
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        let col_max: Vec<u64> = self
            .counts
            .iter()
            .map(|c| c.iter().copied().max().unwrap_or(0))
            .collect();
        for row in 0..rows {
            let idx = rows - 1 - row;
            let line: Vec<u8> = (0..cols)
                .flat_map(|j| {
                    let shade = if col_max[j] == 0 {
                        255
                    } else {
                        255 - (255.0 * self.counts[j][idx] as f64 / col_max[j] as f64).round() as u8
                    };
                    std::iter::repeat_n(shade, cell)
                })
                .collect();
            for _ in 0..cell {
                out.extend_from_slice(&line);
            }
        }
        out
    }
}

/// Digits after the decimal point needed to print multiples of `delta` exactly,
/// or 12 when the expansion does not terminate.
fn decimals_for(delta: Scale) -> usize {
    let mut den = delta.denominator();
    let mut digits = 0;
    while den.is_multiple_of(10) {
        den /= 10;
        digits += 1;
    }
    let mut twos = 0;
    while den.is_multiple_of(2) {
        den /= 2;
        twos += 1;
    }
    let mut fives = 0;
    while den.is_multiple_of(5) {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        12
    } else {
        digits + twos.max(fives)
    }
}

/// Bound variable `x_b = offset - sum_f slope[f] * m_f` in z units, where
/// `m_f` are the free multipliers.
#[derive(Debug, Clone)]
struct Affine {
    variable: usize,
    offset: f64,
    slope: Vec<f64>,
}

struct Plan {
    free: Vec<usize>,
    bound: Vec<Affine>,
    feasible: bool,
    warnings: Vec<String>,
}

/// Column-pivoted elimination of the two rows.
fn eliminate(system: &LinearSystem, delta: f64) -> Plan {
    let n = system.n();
    let a = &system.coefficients;
    let b = system.rhs;
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let rhs_scale = 1.0 + b[0].abs().max(b[1].abs());
    let rank_tol = 1e-12 * scale;
    let mut warnings = Vec::new();

    if scale == 0.0 {
        warnings.push("both equations vanish; every grid assignment is enumerated".into());
        let feasible = b.iter().all(|x| x.abs() <= 1e-9 * rhs_scale);
        return Plan {
            free: (0..n).collect(),
            bound: Vec::new(),
            feasible,
            warnings,
        };
    }

    let (r1, c1) = (0..2)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .max_by(|&(i, j), &(k, l)| a[i][j].abs().total_cmp(&a[k][l].abs()))
        .expect("nonempty");
    let r2 = 1 - r1;
    let factor = a[r2][c1] / a[r1][c1];
    let reduced: Vec<f64> = (0..n)
        .map(|j| if j == c1 { 0.0 } else { a[r2][j] - factor * a[r1][j] })
        .collect();
    let reduced_rhs = b[r2] - factor * b[r1];
    let c2 = (0..n)
        .filter(|&j| j != c1)
        .max_by(|&i, &j| reduced[i].abs().total_cmp(&reduced[j].abs()));

    match c2 {
        Some(c2) if reduced[c2].abs() > rank_tol => {
            let free: Vec<usize> = (0..n).filter(|&j| j != c1 && j != c2).collect();
            let p2 = reduced[c2];
            let second = Affine {
                variable: c2,
                offset: reduced_rhs / p2,
                slope: free.iter().map(|&f| reduced[f] / p2 * delta).collect(),
            };
            let p1 = a[r1][c1];
            let first = Affine {
                variable: c1,
                offset: (b[r1] - a[r1][c2] * second.offset) / p1,
                slope: free
                    .iter()
                    .zip(&second.slope)
                    .map(|(&f, &s2)| (a[r1][f] * delta - a[r1][c2] * s2) / p1)
                    .collect(),
            };
            Plan {
                free,
                bound: vec![first, second],
                feasible: true,
                warnings,
            }
        }
        _ => {
            warnings.push(format!(
                "the equations are linearly dependent; enumerating {} free variables",
                n - 1
            ));
            let feasible = reduced_rhs.abs() <= 1e-9 * rhs_scale;
            let free: Vec<usize> = (0..n).filter(|&j| j != c1).collect();
            let p1 = a[r1][c1];
            let only = Affine {
                variable: c1,
                offset: b[r1] / p1,
                slope: free.iter().map(|&f| a[r1][f] * delta / p1).collect(),
            };
            Plan {
                free,
                bound: vec![only],
                feasible,
                warnings,
            }
        }
    }
}

struct Partial {
    counts: Vec<Vec<u64>>,
    total: u64,
    solutions: Vec<Vec<i64>>,
}

impl Partial {
    fn new(n: usize, g: usize) -> Partial {
        Partial {
            counts: vec![vec![0; g]; n],
            total: 0,
            solutions: Vec::new(),
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.total += other.total;
        self.solutions.extend(other.solutions);
        self
    }
}

struct Search<'a> {
    plan: &'a Plan,
    k: i64,
    delta: f64,
    tolerance: f64,
    collect: bool,
    n: usize,
}

impl Search<'_> {
    fn dfs(&self, level: usize, acc: &mut [f64; 2], assignment: &mut [i64], out: &mut Partial) {
        if level == self.plan.free.len() {
            self.accept(acc, assignment, out);
            return;
        }
        let var = self.plan.free[level];
        for m in -self.k..=self.k {
            let saved = *acc;
            for (b, slot) in self.plan.bound.iter().zip(acc.iter_mut()) {
                *slot += b.slope[level] * m as f64;
            }
            assignment[var] = m;
            self.dfs(level + 1, acc, assignment, out);
            *acc = saved;
        }
    }

    fn accept(&self, acc: &[f64; 2], assignment: &mut [i64], out: &mut Partial) {
        for (b, &s) in self.plan.bound.iter().zip(acc.iter()) {
            let x = b.offset - s;
            let m = (x / self.delta).round();
            if m.abs() > self.k as f64 || (x - m * self.delta).abs() > self.tolerance {
                return;
            }
            assignment[b.variable] = m as i64;
        }
        out.total += 1;
        for j in 0..self.n {
            out.counts[j][(assignment[j] + self.k) as usize] += 1;
        }
        if self.collect {
            out.solutions.push(assignment.to_vec());
        }
    }
}

/// Enumerates all assignments of the free variables over the grid within
/// `[-R, R]`, solves for the pivot variables and keeps the assignments whose
/// pivots also land on the grid within `tolerance` and inside `[-R, R]`.
pub fn enumerate_solutions(
    system: &LinearSystem,
    delta: Scale,
    bound: f64,
    options: EnumerateOptions,
) -> Result<FrequencyTable, LeakageError> {
    let n = system.n();
    if system.coefficients[1].len() != n {
        return Err(LeakageError::Shape("rows of different length".into()));
    }
    let bound_q = parse_decimal(&format!("{bound:e}")).map_err(|e| LeakageError::Shape(e.to_string()))?;
    let k = max_multiplier_within(&bound_q, delta);
    let g = (2 * k + 1) as usize;
    let d = delta.delta_f64();
    let plan = eliminate(system, d);
    let candidates = (g as f64).powi(plan.free.len() as i32);
    if candidates > options.budget && !options.long_running {
        return Err(LeakageError::BudgetExceeded {
            candidates,
            budget: options.budget,
        });
    }

    let search = Search {
        plan: &plan,
        k,
        delta: d,
        tolerance: options.tolerance,
        collect: options.collect,
        n,
    };
    let result = if !plan.feasible {
        Partial::new(n, g)
    } else if plan.free.is_empty() {
        let mut out = Partial::new(n, g);
        search.dfs(0, &mut [0.0; 2], &mut vec![0; n], &mut out);
        out
    } else {
        let first = plan.free[0];
        (-k..=k)
            .into_par_iter()
            .map(|m| {
                let mut out = Partial::new(n, g);
                let mut assignment = vec![0i64; n];
                assignment[first] = m;
                let mut acc = [0.0; 2];
                for (b, slot) in plan.bound.iter().zip(acc.iter_mut()) {
                    *slot = b.slope[0] * m as f64;
                }
                search.dfs(1, &mut acc, &mut assignment, &mut out);
                out
            })
            .reduce(|| Partial::new(n, g), Partial::merge)
    };

    let solutions = options.collect.then(|| {
        let mut s = result.solutions;
        s.sort_unstable();
        s
    });
    Ok(FrequencyTable {
        delta,
        max_multiplier: k,
        counts: result.counts,
        total: result.total,
        free_variables: plan.free.clone(),
        bound_variables: plan.bound.iter().map(|b| b.variable).collect(),
        warnings: plan.warnings,
        solutions,
    })
}
