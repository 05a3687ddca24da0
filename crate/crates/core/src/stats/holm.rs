use crate::error::{Result, UqError};

/// Holm step-down adjusted p-values, returned in input order.
pub fn holm_adjust(pvals: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(UqError::InvalidArgument(format!("p-value {p} outside [0, 1]")));
    }
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (j, &i) in order.iter().enumerate() {
        running = running.max(((m - j) as f64 * pvals[i]).min(1.0));
        adjusted[i] = running;
    }
    Ok(adjusted)
}
