//! Input tables and the probability-matrix preprocessing shared by all four
//! methods: divide by the grand total, take row/column masses, and subtract
//! the independence model `r c^T` (double centering).

use crate::ca::CaMethod;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Contingency table of nonnegative counts with row/column labels.
///
/// Fractional "counts" are accepted by this constructor (probability-scale
/// tables behave identically under the analysis); the CSV ingestion layer is
/// the place that insists on integers.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    counts: Matrix,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    grand_total: f64,
}

impl ContingencyTable {
    pub fn new(counts: Matrix, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        if row_labels.len() != counts.rows() || col_labels.len() != counts.cols() {
            return Err(Error::DimensionMismatch(format!(
                "labels ({}, {}) do not match a {}x{} table",
                row_labels.len(),
                col_labels.len(),
                counts.rows(),
                counts.cols()
            )));
        }
        for i in 0..counts.rows() {
            for j in 0..counts.cols() {
                if counts.get(i, j) < 0.0 {
                    return Err(Error::NegativeCount {
                        line: i + 1,
                        column: j + 1,
                    });
                }
            }
        }
        let grand_total = counts.total();
        if grand_total <= 0.0 {
            return Err(Error::EmptyTable);
        }
        for (i, s) in counts.row_sums().iter().enumerate() {
            if *s <= 0.0 {
                return Err(Error::ZeroMarginal {
                    axis: "row",
                    index: i,
                    label: row_labels[i].clone(),
                });
            }
        }
        for (j, s) in counts.col_sums().iter().enumerate() {
            if *s <= 0.0 {
                return Err(Error::ZeroMarginal {
                    axis: "column",
                    index: j,
                    label: col_labels[j].clone(),
                });
            }
        }
        Ok(ContingencyTable {
            counts,
            row_labels,
            col_labels,
            grand_total,
        })
    }

    /// Like [`ContingencyTable::new`] but removes all-zero rows and columns
    /// instead of rejecting them, reporting what was dropped.
    pub fn new_dropping_empty(
        counts: Matrix,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<(Self, Vec<String>)> {
        let row_keep: Vec<usize> = counts
            .row_sums()
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > 0.0)
            .map(|(i, _)| i)
            .collect();
        let col_keep: Vec<usize> = counts
            .col_sums()
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > 0.0)
            .map(|(j, _)| j)
            .collect();
        if row_keep.is_empty() || col_keep.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut dropped = Vec::new();
        for i in 0..counts.rows() {
            if !row_keep.contains(&i) {
                dropped.push(format!("dropped empty row {:?}", row_labels[i]));
            }
        }
        for j in 0..counts.cols() {
            if !col_keep.contains(&j) {
                dropped.push(format!("dropped empty column {:?}", col_labels[j]));
            }
        }
        let mut values = Vec::with_capacity(row_keep.len() * col_keep.len());
        for &i in &row_keep {
            for &j in &col_keep {
                values.push(counts.get(i, j));
            }
        }
        let trimmed = Matrix::new(row_keep.len(), col_keep.len(), values)?;
        let table = ContingencyTable::new(
            trimmed,
            row_keep.iter().map(|&i| row_labels[i].clone()).collect(),
            col_keep.iter().map(|&j| col_labels[j].clone()).collect(),
        )?;
        Ok((table, dropped))
    }

    pub fn counts(&self) -> &Matrix {
        &self.counts
    }

    pub fn grand_total(&self) -> f64 {
        self.grand_total
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }
}

/// Column range of one categorical variable inside a disjunctive table.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct VariableSpan {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

/// One-hot indicator table: `I` observations by `J` level columns grouped
/// into `K` variable blocks. Every variable block sums to exactly 1 per row.
#[derive(Debug, Clone)]
pub struct DisjunctiveTable {
    indicator: Matrix,
    variable_spans: Vec<VariableSpan>,
    row_labels: Vec<String>,
    level_labels: Vec<String>,
}

impl DisjunctiveTable {
    pub fn new(
        indicator: Matrix,
        variable_spans: Vec<VariableSpan>,
        row_labels: Vec<String>,
        level_labels: Vec<String>,
    ) -> Result<Self> {
        if row_labels.len() != indicator.rows() || level_labels.len() != indicator.cols() {
            return Err(Error::DimensionMismatch(format!(
                "labels ({}, {}) do not match a {}x{} indicator",
                row_labels.len(),
                level_labels.len(),
                indicator.rows(),
                indicator.cols()
            )));
        }
        let mut covered = vec![false; indicator.cols()];
        for span in &variable_spans {
            if span.len == 0 || span.start + span.len > indicator.cols() {
                return Err(Error::InvalidConfig(format!(
                    "variable {:?} spans columns {}..{} outside the table",
                    span.name,
                    span.start,
                    span.start + span.len
                )));
            }
            for j in span.start..span.start + span.len {
                if covered[j] {
                    return Err(Error::InvalidConfig(format!(
                        "column {j} belongs to more than one variable"
                    )));
                }
                covered[j] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::InvalidConfig(
                "variable spans do not cover every column".into(),
            ));
        }
        for i in 0..indicator.rows() {
            for j in 0..indicator.cols() {
                let v = indicator.get(i, j);
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidCoding {
                        row: i,
                        variable: level_labels[j].clone(),
                    });
                }
            }
            for span in &variable_spans {
                let s: f64 = (span.start..span.start + span.len)
                    .map(|j| indicator.get(i, j))
                    .sum();
                if s != 1.0 {
                    return Err(Error::InvalidCoding {
                        row: i,
                        variable: span.name.clone(),
                    });
                }
            }
        }
        for (j, s) in indicator.col_sums().iter().enumerate() {
            if *s == 0.0 {
                return Err(Error::EmptyLevel {
                    label: level_labels[j].clone(),
                });
            }
        }
        Ok(DisjunctiveTable {
            indicator,
            variable_spans,
            row_labels,
            level_labels,
        })
    }

    pub fn indicator(&self) -> &Matrix {
        &self.indicator
    }

    pub fn variable_spans(&self) -> &[VariableSpan] {
        &self.variable_spans
    }

    pub fn variable_count(&self) -> usize {
        self.variable_spans.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn level_labels(&self) -> &[String] {
        &self.level_labels
    }
}

/// Assignment of rows (observations) to groups for the discriminant methods.
/// Equivalent to the 0/1 indicator matrix `H` with exactly one 1 per row.
#[derive(Debug, Clone)]
pub struct GroupDesign {
    assignments: Vec<usize>,
    labels: Vec<String>,
}

impl GroupDesign {
    /// Groups in order of first appearance of their labels.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::GroupMismatch("no group labels given".into()));
        }
        let mut names: Vec<String> = Vec::new();
        let mut assignments = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let id = match names.iter().position(|n| n == l) {
                Some(id) => id,
                None => {
                    names.push(l.to_string());
                    names.len() - 1
                }
            };
            assignments.push(id);
        }
        Ok(GroupDesign {
            assignments,
            labels: names,
        })
    }

    pub fn new(assignments: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if assignments.is_empty() {
            return Err(Error::GroupMismatch("empty group assignment".into()));
        }
        let mut seen = vec![false; labels.len()];
        for &a in &assignments {
            if a >= labels.len() {
                return Err(Error::GroupMismatch(format!(
                    "assignment {a} has no label (only {} groups)",
                    labels.len()
                )));
            }
            seen[a] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::GroupMismatch(format!(
                "group {:?} has no members",
                labels[missing]
            )));
        }
        Ok(GroupDesign {
            assignments,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn group_count(&self) -> usize {
        self.labels.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.group_count()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// The `I x I_G` indicator matrix `H`.
    pub fn indicator(&self) -> Matrix {
        let mut h = Matrix::zeros(self.len(), self.group_count());
        for (i, &g) in self.assignments.iter().enumerate() {
            h.set(i, g, 1.0);
        }
        h
    }

    /// `H^T A`: rows of `a` summed within groups.
    pub fn group_sums(&self, a: &Matrix) -> Result<Matrix> {
        if a.rows() != self.len() {
            return Err(Error::GroupMismatch(format!(
                "design covers {} rows but the table has {}",
                self.len(),
                a.rows()
            )));
        }
        let mut out = Matrix::zeros(self.group_count(), a.cols());
        for (i, &g) in self.assignments.iter().enumerate() {
            for j in 0..a.cols() {
                out.set(g, j, out.get(g, j) + a.get(i, j));
            }
        }
        Ok(out)
    }
}

/// Preprocessed analysis input: the double-centered probability matrix, the
/// row/column masses, and the labels and optional variable blocks carried
/// through to the model.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub method: CaMethod,
    pub x: Matrix,
    pub row_masses: Vec<f64>,
    pub col_masses: Vec<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `(start, len)` column spans of the variable blocks; present for MCA
    /// and DiMCA, where they drive the non-optional group constraint.
    pub column_blocks: Option<Vec<(usize, usize)>>,
}

impl Prepared {
    /// Uncentered probability matrix `Z = X + r c^T`.
    pub fn uncentered(&self) -> Matrix {
        let mut z = self.x.clone();
        z.subtract_outer(-1.0, &self.row_masses, &self.col_masses);
        z
    }
}

fn center(counts: &Matrix, divisor: f64) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
    let z = counts.scaled(1.0 / divisor);
    let r = z.row_sums();
    let c = z.col_sums();
    for (i, m) in r.iter().enumerate() {
        if *m <= 0.0 {
            return Err(Error::ZeroMarginal {
                axis: "row",
                index: i,
                label: format!("#{i}"),
            });
        }
    }
    for (j, m) in c.iter().enumerate() {
        if *m <= 0.0 {
            return Err(Error::ZeroMarginal {
                axis: "column",
                index: j,
                label: format!("#{j}"),
            });
        }
    }
    let mut x = z;
    x.subtract_outer(1.0, &r, &c);
    Ok((x, r, c))
}

/// CA preprocessing: `Z = A / N`, masses `r = Z 1`, `c = Z^T 1`, and the
/// deviation from independence `X = Z - r c^T`.
pub fn preprocess_ca(table: &ContingencyTable) -> Result<Prepared> {
    let (x, r, c) = center(table.counts(), table.grand_total())?;
    Ok(Prepared {
        method: CaMethod::Ca,
        x,
        row_masses: r,
        col_masses: c,
        row_labels: table.row_labels().to_vec(),
        col_labels: table.col_labels().to_vec(),
        column_blocks: None,
    })
}

/// MCA preprocessing: `Z = A / (I K)` on the indicator table; every row mass
/// is `1/I` by construction because each row of `A` sums to `K`.
pub fn preprocess_mca(table: &DisjunctiveTable) -> Result<Prepared> {
    let divisor = (table.indicator().rows() * table.variable_count()) as f64;
    let (x, r, c) = center(table.indicator(), divisor)?;
    Ok(Prepared {
        method: CaMethod::Mca,
        x,
        row_masses: r,
        col_masses: c,
        row_labels: table.row_labels().to_vec(),
        col_labels: table.level_labels().to_vec(),
        column_blocks: Some(
            table
                .variable_spans()
                .iter()
                .map(|s| (s.start, s.len))
                .collect(),
        ),
    })
}

/// DiSCA preprocessing: CA on the group sums `A_G = H^T A`.
pub fn preprocess_disca(table: &ContingencyTable, groups: &GroupDesign) -> Result<Prepared> {
    let summed = groups.group_sums(table.counts())?;
    let (x, r, c) = center(&summed, summed.total())?;
    Ok(Prepared {
        method: CaMethod::Disca,
        x,
        row_masses: r,
        col_masses: c,
        row_labels: groups.labels().to_vec(),
        col_labels: table.col_labels().to_vec(),
        column_blocks: None,
    })
}

/// DiMCA preprocessing: MCA on the group sums of the indicator table.
pub fn preprocess_dimca(table: &DisjunctiveTable, groups: &GroupDesign) -> Result<Prepared> {
    let summed = groups.group_sums(table.indicator())?;
    let divisor = (table.indicator().rows() * table.variable_count()) as f64;
    let (x, r, c) = center(&summed, divisor)?;
    Ok(Prepared {
        method: CaMethod::Dimca,
        x,
        row_masses: r,
        col_masses: c,
        row_labels: groups.labels().to_vec(),
        col_labels: table.level_labels().to_vec(),
        column_blocks: Some(
            table
                .variable_spans()
                .iter()
                .map(|s| (s.start, s.len))
                .collect(),
        ),
    })
}
