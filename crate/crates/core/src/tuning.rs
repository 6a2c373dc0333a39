//! Grid search of the fusion weight and selection threshold on cached,
//! scored dev candidates. Never touches a generator backend.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{ContextInstance, EventFrame};
use crate::generation::CandidateList;
use crate::metrics::{EvalReport, Subtask};
use crate::selector::{select_scored, SelectionConfig};

/// `0.0, 0.1, ..., 1.0`
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// `0.05, 0.10, ..., 0.95`
pub fn default_theta_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub alpha: f64,
    pub theta: f64,
    pub report: EvalReport,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    alpha: f64,
    theta: f64,
    trig_i_f1: f64,
    trig_c_f1: f64,
    arg_i_f1: f64,
    arg_c_f1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_hash: Option<&'a str>,
}

/// Evaluation report per grid point, alpha-major, both axes ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub rows: Vec<GridRow>,
}

impl ScoreTable {
    pub fn evaluate(
        dev: &[(ContextInstance, CandidateList)],
        alpha_grid: &[f64],
        theta_grid: &[f64],
    ) -> Result<Self> {
        let alphas = checked_grid("alpha", alpha_grid)?;
        let thetas = checked_grid("theta", theta_grid)?;
        let cells: Vec<(f64, f64)> = alphas
            .iter()
            .flat_map(|&a| thetas.iter().map(move |&t| (a, t)))
            .collect();
        let rows = cells
            .par_iter()
            .map(|&(alpha, theta)| {
                let report = evaluate_selection(dev, &SelectionConfig { alpha, theta })?;
                Ok(GridRow {
                    alpha,
                    theta,
                    report,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreTable { rows })
    }

    pub fn to_csv(&self) -> Result<String> {
        self.csv_text(None)
    }

    /// CSV with a trailing `config_hash` column.
    pub fn to_csv_stamped(&self, config_hash: &str) -> Result<String> {
        self.csv_text(Some(config_hash))
    }

    fn csv_text(&self, config_hash: Option<&str>) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(CsvRow {
                alpha: row.alpha,
                theta: row.theta,
                trig_i_f1: row.report.trig_i.f1,
                trig_c_f1: row.report.trig_c.f1,
                arg_i_f1: row.report.arg_i.f1,
                arg_c_f1: row.report.arg_c.f1,
                config_hash,
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// Best row under `metric`; ties go to the smaller theta, then the
    /// smaller alpha.
    pub fn best(&self, metric: Subtask) -> Option<&GridRow> {
        self.rows.iter().reduce(|best, row| {
            let (a, b) = (row.report.get(metric).f1, best.report.get(metric).f1);
            let better = a > b || (a == b && (row.theta, row.alpha) < (best.theta, best.alpha));
            if better {
                row
            } else {
                best
            }
        })
    }
}

fn checked_grid(name: &str, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Config(format!(
            "{name} grid value {bad} outside [0, 1]"
        )));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

/// Runs selection on every dev context and scores the resulting frames
/// (arguments come from each list's cache).
pub fn evaluate_selection(
    dev: &[(ContextInstance, CandidateList)],
    cfg: &SelectionConfig,
) -> Result<EvalReport> {
    let predicted: Vec<Vec<EventFrame>> = dev
        .iter()
        .map(|(_, list)| Ok(list.frames_for(&select_scored(list, cfg)?.triggers)))
        .collect::<Result<_>>()?;
    EvalReport::from_pairs(
        dev.iter()
            .zip(&predicted)
            .map(|((inst, _), pred)| (pred.as_slice(), inst.gold_frames())),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub alpha: f64,
    pub theta: f64,
    pub metric: Subtask,
    pub best: f64,
    pub table: ScoreTable,
}

impl GridResult {
    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            alpha: self.alpha,
            theta: self.theta,
        }
    }
}

pub fn grid_search(
    dev: &[(ContextInstance, CandidateList)],
    alpha_grid: &[f64],
    theta_grid: &[f64],
    metric: Subtask,
) -> Result<GridResult> {
    if dev.is_empty() {
        return Err(Error::EmptyDevSet);
    }
    let table = ScoreTable::evaluate(dev, alpha_grid, theta_grid)?;
    let best = table.best(metric).expect("grids are nonempty").clone();
    Ok(GridResult {
        alpha: best.alpha,
        theta: best.theta,
        metric,
        best: best.report.get(metric).f1,
        table,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::event_model::Trigger;
    use crate::generation::TriggerCandidate;

    fn trig(w: &str) -> Trigger {
        Trigger::new(w, "T").unwrap()
    }

    fn cand(w: &str, beam: f64, rank: f64) -> TriggerCandidate {
        TriggerCandidate {
            raw_text: format!("{w} [T]"),
            triggers: vec![trig(w)],
            beam_score: beam,
            rank_score: Some(rank),
            fused_score: None,
        }
    }

    fn item(
        id: &str,
        gold: &[&str],
        cands: Vec<TriggerCandidate>,
    ) -> (ContextInstance, CandidateList) {
        let frames = gold
            .iter()
            .map(|w| EventFrame::new(trig(w), vec![]))
            .collect();
        let inst = ContextInstance::new(id, "ctx", frames).unwrap();
        let list = CandidateList {
            doc_id: id.into(),
            context: "ctx".into(),
            candidates: cands,
            arguments: BTreeMap::new(),
        };
        (inst, list)
    }

    #[test]
    fn default_grids_contain_reported_optimum() {
        assert!(default_alpha_grid().contains(&0.4));
        assert!(default_theta_grid().contains(&0.2));
        assert_eq!(default_alpha_grid().len(), 11);
        assert_eq!(default_theta_grid().len(), 19);
    }

    #[test]
    fn planted_unique_cell() {
        // Gold "g" has the lower beam score; the rank score is what separates
        // it. p = softmax([ln 9, 0]) = [0.9, 0.1], q = softmax([0, ln 4]) = [0.2, 0.8].
        // fused(g) = 0.2 + 0.7 a; fused(n) = 0.8 - 0.7 a. Only a = 1 gives
        // g > 0.85 > n, and theta 0.05 lets n through everywhere.
        let dev = vec![item(
            "d",
            &["g"],
            vec![cand("g", 0.0, 9f64.ln()), cand("n", 4f64.ln(), 0.0)],
        )];
        let r = grid_search(
            &dev,
            &[0.0, 0.5, 1.0],
            &[0.05, 0.85],
            Subtask::TriggerClassification,
        )
        .unwrap();
        assert_eq!((r.alpha, r.theta), (1.0, 0.85));
        assert_eq!(r.best, 1.0);
        let perfect: Vec<_> = r
            .table
            .rows
            .iter()
            .filter(|row| row.report.trig_c.f1 == 1.0)
            .collect();
        assert_eq!(perfect.len(), 1);
    }

    #[test]
    fn all_ties_pick_smallest_theta_then_alpha() {
        let dev = vec![item("d", &[], vec![])];
        let r = grid_search(
            &dev,
            &[0.7, 0.2, 0.5],
            &[0.6, 0.3],
            Subtask::TriggerClassification,
        )
        .unwrap();
        assert_eq!((r.alpha, r.theta), (0.2, 0.3));
    }

    #[test]
    fn returned_cell_is_table_max() {
        let dev = vec![
            item(
                "a",
                &["g"],
                vec![
                    cand("g", -1.0, 0.5),
                    cand("n", -0.5, -0.2),
                    cand("m", -2.0, 0.1),
                ],
            ),
            item(
                "b",
                &["g", "h"],
                vec![
                    cand("g", -0.1, 1.0),
                    cand("h", -3.0, 0.9),
                    cand("n", -0.2, -1.0),
                ],
            ),
        ];
        let r = grid_search(
            &dev,
            &default_alpha_grid(),
            &default_theta_grid(),
            Subtask::TriggerClassification,
        )
        .unwrap();
        let max = r
            .table
            .rows
            .iter()
            .map(|row| row.report.trig_c.f1)
            .fold(f64::MIN, f64::max);
        assert_eq!(r.best, max);
        assert_eq!(r.table.rows.len(), 11 * 19);
        let again = grid_search(
            &dev,
            &default_alpha_grid(),
            &default_theta_grid(),
            Subtask::TriggerClassification,
        )
        .unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            grid_search(&[], &[0.1], &[0.1], Subtask::TriggerClassification),
            Err(Error::EmptyDevSet)
        ));
        let dev = vec![item("d", &[], vec![])];
        assert!(grid_search(&dev, &[], &[0.1], Subtask::TriggerClassification).is_err());
        assert!(grid_search(&dev, &[1.5], &[0.1], Subtask::TriggerClassification).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let dev = vec![item("a", &["g"], vec![cand("g", 0.0, 0.0)])];
        let table = ScoreTable::evaluate(&dev, &[0.4], &[0.2, 0.5]).unwrap();
        let csv = table.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "alpha,theta,trig_i_f1,trig_c_f1,arg_i_f1,arg_c_f1"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.4,0.2,1.0,1.0,"));
        let stamped = table.to_csv_stamped("abc").unwrap();
        assert!(
            stamped.starts_with("alpha,theta,trig_i_f1,trig_c_f1,arg_i_f1,arg_c_f1,config_hash\n")
        );
        assert!(stamped.lines().nth(1).unwrap().ends_with(",abc"));
    }
}
