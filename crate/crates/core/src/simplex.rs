//! Barycentric lattices over the probability simplex and total-uncertainty
//! heatmaps on them.

use serde::Serialize;

use crate::error::{Result, UqError};
use crate::measures::{compute_uncertainty, LogBase, MeasureKind};
use crate::prob::{ClassScale, EnsemblePrediction, ProbabilityVector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub probs: ProbabilityVector,
    pub tu: f64,
}

/// Number of lattice divisions `n = 1/grid_step`; the step must divide one.
pub fn divisions(grid_step: f64) -> Result<usize> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(UqError::InvalidArgument(format!("grid step must lie in (0, 0.1], got {grid_step}")));
    }
    let n = (1.0 / grid_step).round();
    if (n * grid_step - 1.0).abs() > 1e-9 {
        return Err(UqError::InvalidArgument(format!("grid step {grid_step} does not divide 1 evenly")));
    }
    Ok(n as usize)
}

/// All points `(i_1/n, …, i_K/n)` with non-negative integers summing to `n`,
/// vertices and edges included. Points are emitted in lexicographic order of
/// `(i_1, …, i_{K−1})`.
pub fn simplex_grid(k_count: usize, grid_step: f64) -> Result<Vec<ProbabilityVector>> {
    ClassScale::new(k_count)?;
    let n = divisions(grid_step)?;
    let mut out = Vec::new();
    let mut counts = vec![0usize; k_count];
    fill(&mut counts, 0, n, n, &mut out);
    Ok(out)
}

fn fill(counts: &mut [usize], pos: usize, left: usize, n: usize, out: &mut Vec<ProbabilityVector>) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        let probs = counts.iter().map(|&c| c as f64 / n as f64).collect();
        out.push(ProbabilityVector::from_normalized(probs));
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        fill(counts, pos + 1, left - c, n, out);
    }
}

/// Total uncertainty of the single-member ensemble at every lattice point.
///
/// For `K = 3` the output is what the heatmap renderers consume; for larger `K`
/// the same lattice and values are produced without a planar layout.
pub fn simplex_heatmap(
    measure: MeasureKind,
    k_count: usize,
    grid_step: f64,
    log_base: LogBase,
) -> Result<Vec<HeatmapCell>> {
    Ok(simplex_grid(k_count, grid_step)?
        .into_iter()
        .map(|p| {
            let tu = compute_uncertainty(&EnsemblePrediction::single(p.clone()), measure, log_base).tu;
            HeatmapCell { probs: p, tu }
        })
        .collect())
}

/// Planar position of a 3-class point in the triangle with class 1 at the
/// bottom-left, class 2 at the top and class 3 at the bottom-right, unit side.
pub fn barycentric_to_cartesian(p: &ProbabilityVector) -> Result<(f64, f64)> {
    if p.k() != 3 {
        return Err(UqError::DimensionMismatch { expected: 3, actual: p.k() });
    }
    let s = p.as_slice();
    let x = 0.5 * s[1] + s[2];
    let y = s[1] * 3f64.sqrt() / 2.0;
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_sizes() {
        assert_eq!(simplex_grid(3, 0.01).unwrap().len(), 5151);
        assert_eq!(simplex_grid(3, 0.1).unwrap().len(), 66);
        // C(10 + 3, 3)
        assert_eq!(simplex_grid(4, 0.1).unwrap().len(), 286);
        assert_eq!(simplex_grid(2, 0.05).unwrap().len(), 21);
    }

    #[test]
    fn lattice_includes_vertices() {
        let g = simplex_grid(3, 0.1).unwrap();
        for c in 1..=3 {
            assert!(g.contains(&ProbabilityVector::one_hot(3, c).unwrap()));
        }
    }

    #[test]
    fn bad_steps() {
        assert!(simplex_grid(3, 0.0).is_err());
        assert!(simplex_grid(3, 0.2).is_err());
        assert!(simplex_grid(3, 0.03).is_err());
        assert!(simplex_grid(1, 0.1).is_err());
    }

    #[test]
    fn one_hot_cells_are_zero() {
        for m in MeasureKind::ALL {
            let cells = simplex_heatmap(m, 3, 0.1, LogBase::BITS).unwrap();
            let vertex = cells.iter().find(|c| c.probs.as_slice() == [1.0, 0.0, 0.0]).unwrap();
            assert_eq!(vertex.tu, 0.0, "{m}");
        }
    }

    #[test]
    fn cartesian_layout() {
        let top = ProbabilityVector::one_hot(3, 2).unwrap();
        let (x, y) = barycentric_to_cartesian(&top).unwrap();
        assert!((x - 0.5).abs() < 1e-15 && (y - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(barycentric_to_cartesian(&ProbabilityVector::uniform(4).unwrap()).is_err());
    }
}
