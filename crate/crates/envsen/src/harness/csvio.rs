//! CSV output. Same config and master seed must give byte-identical files,
//! so rows are written in a fixed order and floats use the shortest
//! round-trip formatting.

use std::fmt::Write as _;
use std::path::Path;

use crate::core::Result;
use crate::harness::evaluate::Aggregate;
use crate::harness::runner::EpisodeRecord;

pub const EPISODE_HEADER: &str = "step,attempted,succeeded,data_value,energy_cost,error_loss,reward";
pub const AGGREGATE_HEADER: &str =
    "policy,w,mean_reward,std_reward,mean_value,mean_cost,mean_error_loss";
pub const SUMMARY_HEADER: &str = "episode,scenario,steps,attempted,succeeded,data_value,energy_cost,reward,mean_error_loss,final_error_loss";
pub const CURVE_HEADER: &str = "episode,reward";

/// Per-step rows of one episode.
pub fn episode_csv(record: &EpisodeRecord) -> String {
    let mut out = String::new();
    out.push_str(EPISODE_HEADER);
    out.push('\n');
    for s in &record.steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.step, s.attempted, s.succeeded, s.data_value, s.energy_cost, s.error_loss, s.reward
        );
    }
    out
}

/// One row per episode with its totals.
pub fn summary_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for (k, r) in records.iter().enumerate() {
        let t = &r.totals;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            k,
            r.scenario_index,
            r.steps.len(),
            t.attempted,
            t.succeeded,
            t.data_value,
            t.energy_cost,
            t.reward,
            t.mean_error_loss,
            t.final_error_loss
        );
    }
    out
}

/// Aggregate / trade-off rows.
pub fn aggregate_csv(rows: &[Aggregate]) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    for a in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            a.policy, a.w, a.mean_reward, a.std_reward, a.mean_value, a.mean_cost, a.mean_error_loss
        );
    }
    out
}

/// Training learning curve.
pub fn curve_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::new();
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for (episode, reward) in curve {
        let _ = writeln!(out, "{episode},{reward}");
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::runner::{EpisodeTotals, StepRecord};

    #[test]
    fn episode_csv_columns_sum_to_totals() {
        let steps = vec![
            StepRecord {
                step: 1,
                attempted: 3,
                succeeded: 2,
                data_value: 2.0,
                energy_cost: 3.0,
                error_loss: 1.0,
                reward: 2.0 - 0.2 * 3.0,
            },
            StepRecord {
                step: 2,
                attempted: 1,
                succeeded: 1,
                data_value: 1.0,
                energy_cost: 1.0,
                error_loss: 0.0,
                reward: 1.0 - 0.2,
            },
        ];
        let record = EpisodeRecord {
            scenario_index: 0,
            steps: steps.clone(),
            totals: EpisodeTotals {
                attempted: 4,
                succeeded: 3,
                data_value: 3.0,
                energy_cost: 4.0,
                reward: steps.iter().map(|s| s.reward).sum(),
                error_loss_sum: 1.0,
                mean_error_loss: 0.5,
                final_error_loss: 0.0,
            },
        };
        let csv = episode_csv(&record);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), EPISODE_HEADER);
        let mut attempted_sum = 0usize;
        let mut value_sum = 0.0f64;
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 7);
            attempted_sum += cols[1].parse::<usize>().unwrap();
            value_sum += cols[3].parse::<f64>().unwrap();
        }
        assert_eq!(attempted_sum, record.totals.attempted);
        assert_eq!(value_sum, record.totals.data_value);
    }
}
