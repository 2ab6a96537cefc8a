//! The decision triple: job assignment, job precedence, data assignment.

use serde::{Deserialize, Serialize};

use crate::environment::GridEnvironment;
use crate::error::{Error, Result};

pub const SCHEDULE_SCHEMA_VERSION: u32 = 1;

/// A candidate schedule in index-vector form.
///
/// `priority` lists every job exactly once, highest priority first. Only the
/// relative order of jobs sharing a CN affects the makespan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    /// CN index per job.
    pub job_assignment: Vec<usize>,
    /// Jobs in descending priority.
    pub priority: Vec<usize>,
    /// Local-SN index per data object.
    pub data_assignment: Vec<usize>,
}

impl Schedule {
    pub fn new(job_assignment: Vec<usize>, priority: Vec<usize>, data_assignment: Vec<usize>) -> Self {
        Schedule {
            job_assignment,
            priority,
            data_assignment,
        }
    }

    pub fn validate(&self, env: &GridEnvironment) -> Result<()> {
        let j = env.num_jobs();
        if self.job_assignment.len() != j {
            return Err(Error::Validation(format!(
                "job assignment has {} entries, expected {j}",
                self.job_assignment.len()
            )));
        }
        if let Some((job, &cn)) = self
            .job_assignment
            .iter()
            .enumerate()
            .find(|(_, &c)| c >= env.num_cns())
        {
            return Err(Error::Validation(format!("job {job} assigned to missing CN {cn}")));
        }
        if self.data_assignment.len() != env.num_objects() {
            return Err(Error::Validation(format!(
                "data assignment has {} entries, expected {}",
                self.data_assignment.len(),
                env.num_objects()
            )));
        }
        if let Some((obj, &sn)) = self
            .data_assignment
            .iter()
            .enumerate()
            .find(|(_, &l)| l >= env.num_local_sns())
        {
            return Err(Error::Validation(format!("object {obj} assigned to missing local SN {sn}")));
        }
        validate_permutation(&self.priority, j)
    }

    /// Position of each job in the priority order.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.priority.len()];
        for (pos, &job) in self.priority.iter().enumerate() {
            rank[job] = pos;
        }
        rank
    }

    /// `X[j][c] = 1` iff job `j` runs on CN `c`.
    pub fn x_matrix(&self, num_cns: usize) -> Vec<Vec<u8>> {
        one_hot(&self.job_assignment, num_cns)
    }

    /// `Y[i][j] = 1` iff job `i` has higher priority than job `j`.
    pub fn y_matrix(&self) -> Vec<Vec<u8>> {
        let rank = self.ranks();
        let n = rank.len();
        (0..n)
            .map(|i| (0..n).map(|j| u8::from(rank[i] < rank[j])).collect())
            .collect()
    }

    /// `Z[d][l] = 1` iff object `d` is replicated on local SN `l`.
    pub fn z_matrix(&self, num_local_sns: usize) -> Vec<Vec<u8>> {
        one_hot(&self.data_assignment, num_local_sns)
    }

    /// Inverse of the matrix accessors. Rejects row-sum violations and any
    /// `Y` that is not a strict total order.
    pub fn from_matrices(x: &[Vec<u8>], y: &[Vec<u8>], z: &[Vec<u8>]) -> Result<Self> {
        let job_assignment = from_one_hot(x, "X")?;
        let data_assignment = from_one_hot(z, "Z")?;
        let n = y.len();
        if job_assignment.len() != n {
            return Err(Error::Validation("X and Y disagree on the job count".into()));
        }
        for i in 0..n {
            if y[i].len() != n {
                return Err(Error::Validation(format!("Y row {i} has wrong length")));
            }
            if y[i][i] != 0 {
                return Err(Error::Validation(format!("Y[{i}][{i}] must be 0")));
            }
            for j in (i + 1)..n {
                if y[i][j] + y[j][i] != 1 {
                    return Err(Error::Validation(format!("Y[{i}][{j}] + Y[{j}][{i}] != 1")));
                }
            }
        }
        // A strict total order has exactly one job with k predecessors for each k.
        let mut by_predecessors: Vec<(usize, usize)> = (0..n)
            .map(|j| ((0..n).filter(|&i| y[i][j] == 1).count(), j))
            .collect();
        by_predecessors.sort_unstable();
        if by_predecessors.iter().enumerate().any(|(k, &(p, _))| p != k) {
            return Err(Error::Validation("Y is not transitive".into()));
        }
        let priority = by_predecessors.into_iter().map(|(_, j)| j).collect();
        Ok(Schedule::new(job_assignment, priority, data_assignment))
    }

    pub fn to_document(&self) -> ScheduleDocument {
        ScheduleDocument {
            schema_version: SCHEDULE_SCHEMA_VERSION,
            job_assignment: self.job_assignment.clone(),
            priority: self.priority.clone(),
            data_assignment: self.data_assignment.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScheduleDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEDULE_SCHEMA_VERSION {
            return Err(Error::parse(
                "schema_version",
                format!("unsupported version {}", doc.schema_version),
            ));
        }
        Ok(Schedule::new(doc.job_assignment, doc.priority, doc.data_assignment))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

pub(crate) fn validate_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Validation(format!(
            "priority lists {} jobs, expected {n}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &job in order {
        if job >= n || std::mem::replace(&mut seen[job], true) {
            return Err(Error::Validation(format!(
                "priority is not a permutation (job {job} out of range or repeated)"
            )));
        }
    }
    Ok(())
}

fn one_hot(index: &[usize], width: usize) -> Vec<Vec<u8>> {
    index
        .iter()
        .map(|&k| (0..width).map(|c| u8::from(c == k)).collect())
        .collect()
}

fn from_one_hot(matrix: &[Vec<u8>], name: &str) -> Result<Vec<usize>> {
    matrix
        .iter()
        .enumerate()
        .map(|(row, values)| {
            let ones: Vec<usize> = values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(k, _)| k)
                .collect();
            match (ones.as_slice(), values.iter().all(|&v| v <= 1)) {
                ([k], true) => Ok(*k),
                _ => Err(Error::Validation(format!("{name} row {row} must sum to exactly 1"))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub schema_version: u32,
    pub job_assignment: Vec<usize>,
    pub priority: Vec<usize>,
    pub data_assignment: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let s = Schedule::new(vec![1, 0, 1], vec![2, 0, 1], vec![0, 1]);
        let back = Schedule::from_matrices(&s.x_matrix(2), &s.y_matrix(), &s.z_matrix(2)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn y_matrix_is_a_strict_total_order() {
        let y = Schedule::new(vec![0; 4], vec![3, 1, 0, 2], vec![0]).y_matrix();
        for i in 0..4 {
            assert_eq!(y[i][i], 0);
            for j in 0..4 {
                if i != j {
                    assert_eq!(y[i][j] + y[j][i], 1);
                }
            }
        }
        assert_eq!(y[3][0], 1);
        assert_eq!(y[2][1], 0);
    }

    #[test]
    fn from_matrices_rejects_bad_rows() {
        let y = vec![vec![0, 1], vec![0, 0]];
        let z = vec![vec![1]];
        assert!(Schedule::from_matrices(&[vec![1, 1], vec![0, 1]], &y, &z).is_err());
        assert!(Schedule::from_matrices(&[vec![0, 0], vec![0, 1]], &y, &z).is_err());
        let both = vec![vec![0, 1], vec![1, 0]];
        assert!(Schedule::from_matrices(&[vec![1], vec![1]], &both, &z).is_err());
    }

    #[test]
    fn from_matrices_rejects_cycles() {
        // 0 > 1 > 2 > 0
        let y = vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]];
        let x = vec![vec![1]; 3];
        assert!(Schedule::from_matrices(&x, &y, &[vec![1]]).is_err());
    }

    #[test]
    fn permutation_validation() {
        assert!(validate_permutation(&[0, 2, 1], 3).is_ok());
        assert!(validate_permutation(&[0, 0, 1], 3).is_err());
        assert!(validate_permutation(&[0, 1], 3).is_err());
        assert!(validate_permutation(&[0, 1, 3], 3).is_err());
    }

    #[test]
    fn document_round_trip() {
        let s = Schedule::new(vec![1, 0, 1], vec![2, 0, 1], vec![0, 1]);
        assert_eq!(Schedule::from_json(&s.to_json().unwrap()).unwrap(), s);
    }
}
