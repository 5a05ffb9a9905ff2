use super::LatticePath;
use crate::error::{invalid, Result};

/// Inserts an immediate backtrack-and-return after step `j` for every `j` in
/// `positions`, then truncates back to the original length.
///
/// Positions index the original path, must lie in `1..n`, be strictly
/// increasing and pairwise at least 2 apart. After the insertion at `j` the
/// walk reads `S_0, ..., S_j, S_{j-1}, S_j, S_{j+1}, ...`.
pub fn insert_repetitions(path: &LatticePath, positions: &[usize]) -> Result<LatticePath> {
    let n = path.len();
    if positions.is_empty() {
        return Ok(path.clone());
    }
    for w in positions.windows(2) {
        if w[1] < w[0] + 2 {
            return invalid(format!("repetition positions {} and {} overlap", w[0], w[1]));
        }
    }
    if let Some(&bad) = positions.iter().find(|&&j| j == 0 || j >= n) {
        return invalid(format!("repetition position {bad} outside 1..{n}"));
    }
    let steps = path.steps();
    let mut out = Vec::with_capacity(n + 2 * positions.len());
    let mut next = positions.iter().peekable();
    for (k, &step) in steps.iter().enumerate() {
        out.push(step);
        if next.peek() == Some(&&(k + 1)) {
            next.next();
            out.push(step.reverse());
            out.push(step);
        }
        if out.len() >= n {
            break;
        }
    }
    out.truncate(n);
    LatticePath::new(path.dim(), out)
}
