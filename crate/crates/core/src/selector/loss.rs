use crate::error::{Error, Result};

/// Margin hinge objective summed over every (positive, negative) pair:
/// `sum_i sum_j max(0, margin - pos_i + neg_j)`.
pub fn hinge_loss(pos_scores: &[f64], neg_scores: &[f64], margin: f64) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    Ok(pos_scores
        .iter()
        .flat_map(|&p| neg_scores.iter().map(move |&n| (margin - p + n).max(0.0)))
        .sum())
}
