//! k-disagreeing-neighbors (kDN) computation shared by the label-noise
//! detector and the `drop_flagged_labels` remediation.
//!
//! Distances are squared Euclidean over the numeric feature columns, each
//! min–max scaled to [0,1]. Constant and all-missing columns carry no
//! information and are dropped; remaining missing values are replaced by the
//! column median for distance purposes only. Neighbor ties resolve by lower
//! row index, which keeps the result exactly reproducible by a brute-force
//! oracle.

use std::collections::BinaryHeap;

use crate::dataset::{cell_token, Dataset, Role};
use crate::stats;

pub(crate) struct NoiseSpace {
    /// Names of the feature columns that survived the usability filter.
    pub feature_columns: Vec<String>,
    /// Row-major scaled coordinates, `rows × dims`.
    points: Vec<f64>,
    dims: usize,
    /// Canonical target token per row; `None` for unlabeled rows.
    pub labels: Vec<Option<String>>,
}

impl NoiseSpace {
    /// Build the scaled feature space. Returns `None` when the dataset has
    /// no target column or no usable numeric feature column.
    pub fn build(dataset: &Dataset) -> Option<NoiseSpace> {
        let target = dataset.target_column()?;
        let labels: Vec<Option<String>> = target
            .cells
            .iter()
            .map(|c| (!c.is_missing()).then(|| cell_token(c).into_owned()))
            .collect();

        let rows = dataset.row_count();
        let mut feature_columns = Vec::new();
        let mut scaled_columns: Vec<Vec<f64>> = Vec::new();
        for column in dataset.columns() {
            if column.role != Role::Feature || !column.value_type.is_numeric() {
                continue;
            }
            let values: Vec<Option<f64>> = column.cells.iter().map(|c| c.as_f64()).collect();
            let mut present: Vec<f64> = values.iter().flatten().copied().collect();
            if present.is_empty() {
                continue;
            }
            present.sort_unstable_by(f64::total_cmp);
            let (min, max) = (present[0], present[present.len() - 1]);
            if min == max {
                continue;
            }
            let median = stats::quantile_type7(&present, 0.5);
            let span = max - min;
            scaled_columns.push(
                values
                    .into_iter()
                    .map(|v| (v.unwrap_or(median) - min) / span)
                    .collect(),
            );
            feature_columns.push(column.name.clone());
        }
        if feature_columns.is_empty() {
            return None;
        }

        let dims = scaled_columns.len();
        let mut points = vec![0.0; rows * dims];
        for (d, col) in scaled_columns.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                points[r * dims + d] = *v;
            }
        }
        Some(NoiseSpace {
            feature_columns,
            points,
            dims,
            labels,
        })
    }

    fn point(&self, row: usize) -> &[f64] {
        &self.points[row * self.dims..(row + 1) * self.dims]
    }

    /// kDN per row: the fraction of a labeled row's k nearest labeled
    /// neighbors (excluding itself) whose label differs. Unlabeled rows get
    /// `None`; a row with no candidate neighbors gets 0.
    pub fn kdn_scores(&self, k: usize) -> Vec<Option<f64>> {
        let labeled: Vec<usize> = (0..self.labels.len())
            .filter(|&r| self.labels[r].is_some())
            .collect();
        let mut scores = vec![None; self.labels.len()];
        for &i in &labeled {
            let want = k.min(labeled.len().saturating_sub(1));
            if want == 0 {
                scores[i] = Some(0.0);
                continue;
            }
            // Max-heap of (distance² bits, row index); non-negative floats
            // order identically to their bit patterns, so the tuple ordering
            // is exactly the (distance, lower-index-wins) tie-break.
            let mut heap: BinaryHeap<(u64, usize)> = BinaryHeap::with_capacity(want + 1);
            let pi = self.point(i);
            for &j in &labeled {
                if j == i {
                    continue;
                }
                let pj = self.point(j);
                let mut d2 = 0.0f64;
                let worst = if heap.len() == want {
                    heap.peek().copied()
                } else {
                    None
                };
                let mut rejected = false;
                for dim in 0..self.dims {
                    let diff = pi[dim] - pj[dim];
                    d2 += diff * diff;
                    // The partial sum only grows: once it lexicographically
                    // exceeds the current worst entry, the candidate is out.
                    if let Some(w) = worst {
                        if (d2.to_bits(), j) > w {
                            rejected = true;
                            break;
                        }
                    }
                }
                if rejected {
                    continue;
                }
                let key = (d2.to_bits(), j);
                match worst {
                    Some(w) => {
                        if key < w {
                            heap.pop();
                            heap.push(key);
                        }
                    }
                    None => heap.push(key),
                }
            }
            let own = self.labels[i].as_deref();
            let disagree = heap
                .iter()
                .filter(|(_, j)| self.labels[*j].as_deref() != own)
                .count();
            scores[i] = Some(disagree as f64 / want as f64);
        }
        scores
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Cell, Column, Dataset, ValueType};

    fn labeled_line() -> Dataset {
        let x = Column::new(
            "x",
            ValueType::Integer,
            Role::Feature,
            [0, 1, 2, 10, 11, 12].map(Cell::Int).to_vec(),
        );
        let label = Column::new(
            "label",
            ValueType::Text,
            Role::Target,
            ["A", "A", "B", "B", "B", "B"]
                .map(|s| Cell::Text(s.into()))
                .to_vec(),
        );
        Dataset::from_columns(vec![x, label], "mem", "baseline").unwrap()
    }

    #[test]
    fn one_dimensional_disagreement_example() {
        let ds = labeled_line();
        let space = NoiseSpace::build(&ds).unwrap();
        let scores = space.kdn_scores(3);
        let expect = [2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 0.0, 0.0, 0.0];
        for (got, want) in scores.iter().zip(expect) {
            assert!((got.unwrap() - want).abs() < 1e-12, "{scores:?}");
        }
    }

    #[test]
    fn unlabeled_rows_are_skipped_entirely() {
        let x = Column::new(
            "x",
            ValueType::Integer,
            Role::Feature,
            [0, 1, 2, 10].map(Cell::Int).to_vec(),
        );
        let label = Column::new(
            "label",
            ValueType::Text,
            Role::Target,
            vec![
                Cell::Text("A".into()),
                Cell::Missing,
                Cell::Text("A".into()),
                Cell::Text("B".into()),
            ],
        );
        let ds = Dataset::from_columns(vec![x, label], "mem", "baseline").unwrap();
        let space = NoiseSpace::build(&ds).unwrap();
        let scores = space.kdn_scores(1);
        assert_eq!(scores[1], None);
        // Row 0's nearest labeled neighbor is row 2 (row 1 is unlabeled).
        assert_eq!(scores[0], Some(0.0));
        assert_eq!(scores[3], Some(1.0));
    }

    #[test]
    fn constant_and_missing_columns_are_dropped() {
        let x = Column::new(
            "x",
            ValueType::Integer,
            Role::Feature,
            [0, 1, 2].map(Cell::Int).to_vec(),
        );
        let constant = Column::new(
            "c",
            ValueType::Integer,
            Role::Feature,
            vec![Cell::Int(7); 3],
        );
        let empty = Column::new("e", ValueType::Real, Role::Feature, vec![Cell::Missing; 3]);
        let label = Column::new(
            "label",
            ValueType::Text,
            Role::Target,
            ["A", "A", "B"].map(|s| Cell::Text(s.into())).to_vec(),
        );
        let ds = Dataset::from_columns(vec![x, constant, empty, label], "mem", "baseline").unwrap();
        let space = NoiseSpace::build(&ds).unwrap();
        assert_eq!(space.feature_columns, vec!["x".to_string()]);

        // Only unusable features: no space at all.
        let constant = Column::new(
            "c",
            ValueType::Integer,
            Role::Feature,
            vec![Cell::Int(7); 3],
        );
        let label = Column::new(
            "label",
            ValueType::Text,
            Role::Target,
            ["A", "A", "B"].map(|s| Cell::Text(s.into())).to_vec(),
        );
        let ds = Dataset::from_columns(vec![constant, label], "mem", "baseline").unwrap();
        assert!(NoiseSpace::build(&ds).is_none());
    }

    #[test]
    fn ties_resolve_to_the_lower_row_index() {
        // Span 8 keeps every scaled coordinate exact in binary, so rows 1
        // and 2 are *exactly* equidistant from row 0; k=1 must pick row 1.
        let x = Column::new(
            "x",
            ValueType::Integer,
            Role::Feature,
            [4, 2, 6, 0, 8].map(Cell::Int).to_vec(),
        );
        let label = Column::new(
            "label",
            ValueType::Text,
            Role::Target,
            ["p", "q", "p", "p", "p"]
                .map(|s| Cell::Text(s.into()))
                .to_vec(),
        );
        let ds = Dataset::from_columns(vec![x, label], "mem", "baseline").unwrap();
        let space = NoiseSpace::build(&ds).unwrap();
        let scores = space.kdn_scores(1);
        // Neighbor of row 0 is row 1 (label q, disagrees), not row 2.
        assert_eq!(scores[0], Some(1.0));
    }
}
