use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, RowKind, Sense};
use crate::measures::ScalarMeasure;

/// Value and optimal mixed strategies of a zero-sum matrix game.
///
/// The row player receives `F(x,y)` and maximizes.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    /// `min_y σᵀF e_y`, what the row strategy guarantees.
    pub lower: f64,
    /// `max_x e_xᵀF τ`, what the column strategy concedes.
    pub upper: f64,
}

impl GameSolution {
    pub fn gap(&self) -> f64 {
        (self.upper - self.lower).abs()
    }

    /// Largest gain from a unilateral pure deviation by either player.
    pub fn saddle_violation(&self, f: &Array2<f64>) -> f64 {
        let s = Array1::from(self.row.clone());
        let t = Array1::from(self.col.clone());
        let v = s.dot(&f.dot(&t));
        let best_row = f.dot(&t).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let best_col = s.dot(f).iter().copied().fold(f64::INFINITY, f64::min);
        (best_row - v).max(v - best_col).max(0.0)
    }
}

fn check(f: &Array2<f64>) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::invalid("payoff matrix is empty"));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("payoff has a non-finite entry"));
    }
    Ok(f.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Row player's LP over the listed columns on the shifted payoff.
fn row_lp(shifted: &Array2<f64>, cols: &[usize]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let n = shifted.nrows();
    let mut p = LpProblem::new(Sense::Max, vec![0.0; n]);
    let v = p.add_var(1.0, 0.0, f64::INFINITY);
    for &y in cols {
        let mut coeffs: Vec<(usize, f64)> = (0..n)
            .filter(|&x| shifted[[x, y]] != 0.0)
            .map(|x| (x, shifted[[x, y]]))
            .collect();
        coeffs.push((v, -1.0));
        p.add_row(coeffs, RowKind::Ge, 0.0);
    }
    p.add_row((0..n).map(|x| (x, 1.0)).collect(), RowKind::Eq, 1.0);
    let sol = lp::solve(&p)?.into_optimal()?;
    let row = sol.primal[..n].iter().map(|v| v.max(0.0)).collect();
    let duals = sol.dual[..cols.len()].iter().map(|y| (-y).max(0.0)).collect();
    Ok((sol.value, row, duals))
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|v| *v /= s);
    } else {
        let u = 1.0 / w.len() as f64;
        w.iter_mut().for_each(|v| *v = u);
    }
    w
}

fn guarantees(f: &Array2<f64>, row: &[f64], col: &[f64]) -> (f64, f64) {
    let s = Array1::from(row.to_vec());
    let t = Array1::from(col.to_vec());
    (
        s.dot(f).iter().copied().fold(f64::INFINITY, f64::min),
        f.dot(&t).iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Solve the game by one LP; the column strategy comes from its multipliers.
pub fn game_value(f: &Array2<f64>) -> Result<GameSolution> {
    let shift = check(f)?;
    let shifted = f.mapv(|v| v - shift);
    let cols: Vec<usize> = (0..f.ncols()).collect();
    let (v, row, duals) = row_lp(&shifted, &cols)?;
    let col = normalized(duals);
    let (lower, upper) = guarantees(f, &row, &col);
    let value = v + shift;
    let tol = 1e-8 * (1.0 + value.abs());
    if (upper - lower).abs() > tol || (lower - value).abs() > tol {
        return Err(Error::NumericalBreakdown(format!(
            "minimax orders disagree: {lower} vs {upper}"
        )));
    }
    Ok(GameSolution {
        value,
        row,
        col,
        lower,
        upper,
    })
}

/// The game with the column player confined to the support of `λ`.
///
/// Both orders of play are solved as separate LPs.
pub fn game_value_restricted(f: &Array2<f64>, lambda: &ScalarMeasure) -> Result<GameSolution> {
    let shift = check(f)?;
    if lambda.weights().len() != f.ncols() {
        return Err(Error::dim("λ must weight the columns"));
    }
    let cols = lambda.support();
    if cols.is_empty() {
        return Err(Error::invalid("λ has empty support"));
    }
    let shifted = f.mapv(|v| v - shift);
    let (v_row, row, _) = row_lp(&shifted, &cols)?;

    let n = f.nrows();
    let mut p = LpProblem::new(Sense::Min, vec![0.0; cols.len()]);
    let w = p.add_var(1.0, 0.0, f64::INFINITY);
    for x in 0..n {
        let mut coeffs: Vec<(usize, f64)> = cols
            .iter()
            .enumerate()
            .filter(|(_, &y)| shifted[[x, y]] != 0.0)
            .map(|(k, &y)| (k, shifted[[x, y]]))
            .collect();
        coeffs.push((w, -1.0));
        p.add_row(coeffs, RowKind::Le, 0.0);
    }
    p.add_row((0..cols.len()).map(|k| (k, 1.0)).collect(), RowKind::Eq, 1.0);
    let sol = lp::solve(&p)?.into_optimal()?;
    let mut col = vec![0.0; f.ncols()];
    for (k, &y) in cols.iter().enumerate() {
        col[y] = sol.primal[k].max(0.0);
    }
    let col = normalized(col);
    let lower = v_row + shift;
    let upper = sol.value + shift;
    Ok(GameSolution {
        value: lower,
        row,
        col,
        lower,
        upper,
    })
}
