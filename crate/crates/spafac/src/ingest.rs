//! CSV ingestion for contingency and categorical tables, plus quantile
//! binning of numeric columns.
//!
//! Dialect: comma-separated UTF-8 with standard double-quote escaping. The
//! first row holds column labels and the first column holds row labels, for
//! both input kinds. A `--groups` column (matched by header name) is pulled
//! out as the discriminant design instead of being analyzed.

use std::io::Read;

use crate::ca::{ContingencyTable, DisjunctiveTable, GroupDesign, VariableSpan};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug)]
pub struct ContingencyIngest {
    pub table: ContingencyTable,
    pub groups: Option<GroupDesign>,
    /// Human-readable notes, e.g. which empty margins were dropped.
    pub notes: Vec<String>,
}

#[derive(Debug)]
pub struct CategoricalIngest {
    pub table: DisjunctiveTable,
    pub groups: Option<GroupDesign>,
}

fn read_records<R: Read>(reader: R) -> Result<Vec<Vec<String>>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        rows.push(record.iter().map(|s| s.trim().to_string()).collect());
    }
    if rows.len() < 2 {
        return Err(Error::EmptyTable);
    }
    let width = rows[0].len();
    if width < 2 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "need a label column and at least one data column".into(),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                column: row.len(),
                message: format!("expected {width} cells, found {}", row.len()),
            });
        }
    }
    Ok(rows)
}

fn find_group_column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::GroupMismatch(format!("no column named {name:?} in the header")))
}

/// Parses a contingency CSV: label header row, label first column,
/// nonnegative integer cells. `group_column` extracts a per-row group label
/// column (for the discriminant methods); `drop_empty` removes all-zero
/// margins instead of rejecting them.
pub fn ingest_contingency<R: Read>(
    reader: R,
    group_column: Option<&str>,
    drop_empty: bool,
) -> Result<ContingencyIngest> {
    let rows = read_records(reader)?;
    let header = &rows[0];
    let group_idx = group_column
        .map(|name| find_group_column(&header[1..], name).map(|i| i + 1))
        .transpose()?;

    let col_labels: Vec<String> = header
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(j, _)| Some(*j) != group_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let mut row_labels = Vec::new();
    let mut group_labels = Vec::new();
    let mut values = Vec::new();
    for (i, row) in rows.iter().enumerate().skip(1) {
        row_labels.push(row[0].clone());
        for (j, cell) in row.iter().enumerate().skip(1) {
            if Some(j) == group_idx {
                if cell.is_empty() {
                    return Err(Error::MissingCell {
                        line: i + 1,
                        column: j + 1,
                    });
                }
                group_labels.push(cell.clone());
                continue;
            }
            let parsed: f64 = cell.parse().map_err(|_| Error::Parse {
                line: i + 1,
                column: j + 1,
                message: format!("{cell:?} is not a number"),
            })?;
            if !parsed.is_finite() || parsed.fract() != 0.0 {
                return Err(Error::Parse {
                    line: i + 1,
                    column: j + 1,
                    message: format!("{cell:?} is not a nonnegative integer count"),
                });
            }
            if parsed < 0.0 {
                return Err(Error::NegativeCount {
                    line: i + 1,
                    column: j + 1,
                });
            }
            values.push(parsed);
        }
    }
    let counts = Matrix::new(row_labels.len(), col_labels.len(), values)?;
    let mut notes = Vec::new();
    let (table, groups) = if drop_empty {
        // Group labels must track the surviving rows.
        let kept_rows: Vec<usize> = counts
            .row_sums()
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > 0.0)
            .map(|(i, _)| i)
            .collect();
        let (table, dropped) =
            ContingencyTable::new_dropping_empty(counts, row_labels, col_labels)?;
        notes.extend(dropped);
        let groups = if group_idx.is_some() {
            let kept_labels: Vec<String> =
                kept_rows.iter().map(|&i| group_labels[i].clone()).collect();
            Some(GroupDesign::from_labels(&kept_labels)?)
        } else {
            None
        };
        (table, groups)
    } else {
        let table = ContingencyTable::new(counts, row_labels, col_labels)?;
        let groups = if group_idx.is_some() {
            Some(GroupDesign::from_labels(&group_labels)?)
        } else {
            None
        };
        (table, groups)
    };
    Ok(ContingencyIngest {
        table,
        groups,
        notes,
    })
}

/// Parses a categorical CSV (one row per observation, string cells) into a
/// one-hot disjunctive table. Level order within each variable follows first
/// appearance; empty cells are rejected, imputation is out of scope.
pub fn ingest_categorical<R: Read>(
    reader: R,
    group_column: Option<&str>,
) -> Result<CategoricalIngest> {
    let rows = read_records(reader)?;
    let header = &rows[0];
    let group_idx = group_column
        .map(|name| find_group_column(&header[1..], name).map(|i| i + 1))
        .transpose()?;

    let variable_cols: Vec<usize> = (1..header.len())
        .filter(|j| Some(*j) != group_idx)
        .collect();
    if variable_cols.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "no categorical variable columns left".into(),
        });
    }

    let n_obs = rows.len() - 1;
    let mut row_labels = Vec::with_capacity(n_obs);
    let mut group_labels = Vec::new();
    // Per variable: ordered list of levels as first seen.
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); variable_cols.len()];
    let mut codes: Vec<Vec<usize>> = vec![Vec::with_capacity(n_obs); variable_cols.len()];
    for (i, row) in rows.iter().enumerate().skip(1) {
        row_labels.push(row[0].clone());
        if let Some(g) = group_idx {
            if row[g].is_empty() {
                return Err(Error::MissingCell {
                    line: i + 1,
                    column: g + 1,
                });
            }
            group_labels.push(row[g].clone());
        }
        for (k, &j) in variable_cols.iter().enumerate() {
            let cell = &row[j];
            if cell.is_empty() {
                return Err(Error::MissingCell {
                    line: i + 1,
                    column: j + 1,
                });
            }
            let code = match levels[k].iter().position(|l| l == cell) {
                Some(c) => c,
                None => {
                    levels[k].push(cell.clone());
                    levels[k].len() - 1
                }
            };
            codes[k].push(code);
        }
    }

    let mut spans = Vec::with_capacity(variable_cols.len());
    let mut level_labels = Vec::new();
    let mut start = 0;
    for (k, &j) in variable_cols.iter().enumerate() {
        let name = header[j].clone();
        for level in &levels[k] {
            level_labels.push(format!("{name}:{level}"));
        }
        spans.push(VariableSpan {
            name,
            start,
            len: levels[k].len(),
        });
        start += levels[k].len();
    }
    let total_levels = start;
    let mut values = vec![0.0; n_obs * total_levels];
    for i in 0..n_obs {
        for (k, span) in spans.iter().enumerate() {
            values[i * total_levels + span.start + codes[k][i]] = 1.0;
        }
    }
    let indicator = Matrix::new(n_obs, total_levels, values)?;
    let table = DisjunctiveTable::new(indicator, spans, row_labels, level_labels)?;
    let groups = if group_idx.is_some() {
        Some(GroupDesign::from_labels(&group_labels)?)
    } else {
        None
    };
    Ok(CategoricalIngest { table, groups })
}

/// Binning request: a bin count (quantile bins of comparable sizes) or
/// explicit right-open break points.
#[derive(Debug, Clone)]
pub enum BinSpec {
    Count(usize),
    Breaks(Vec<f64>),
}

/// Turns a numeric column into categorical labels.
///
/// Quantile binning keeps all occurrences of a value in the same bin and
/// balances bin sizes as far as ties permit; explicit breaks assign
/// half-open intervals `(-inf, b1), [b1, b2), ..., [bk, +inf)`.
pub fn bin_numeric(values: &[f64], spec: &BinSpec) -> Result<Vec<String>> {
    if values.is_empty() {
        return Err(Error::EmptyTable);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("numeric column contains NaN/Inf".into()));
    }
    match spec {
        BinSpec::Breaks(breaks) => {
            if breaks.is_empty() || breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig(
                    "breaks must be non-empty and strictly increasing".into(),
                ));
            }
            Ok(values
                .iter()
                .map(|v| {
                    let bin = breaks.iter().take_while(|b| v >= b).count();
                    if bin == 0 {
                        format!("<{}", breaks[0])
                    } else if bin == breaks.len() {
                        format!(">={}", breaks[bin - 1])
                    } else {
                        format!("[{},{})", breaks[bin - 1], breaks[bin])
                    }
                })
                .collect())
        }
        BinSpec::Count(k) => {
            let k = *k;
            if k < 2 {
                return Err(Error::InvalidConfig("need at least 2 bins".into()));
            }
            let mut sorted: Vec<f64> = values.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut distinct: Vec<(f64, usize)> = Vec::new();
            for v in sorted {
                match distinct.last_mut() {
                    Some((d, c)) if *d == v => *c += 1,
                    _ => distinct.push((v, 1)),
                }
            }
            if distinct.len() < k {
                return Err(Error::TooFewDistinct {
                    distinct: distinct.len(),
                    bins: k,
                });
            }
            // Greedy quantile split on distinct values: close a bin when its
            // share is met (choosing the closer side of the ideal) or when
            // the remaining bins need every remaining distinct value. The
            // last bin never closes early, it absorbs the tail.
            let mut bin_end = vec![distinct.len(); k]; // exclusive distinct index
            let mut bin = 0;
            let mut acc = 0usize;
            let mut remaining: usize = values.len();
            for (idx, &(_, count)) in distinct.iter().enumerate() {
                let bins_left = k - bin;
                if bins_left > 1 && acc > 0 {
                    let ideal = remaining as f64 / bins_left as f64;
                    let distinct_left = distinct.len() - idx;
                    let must_close = distinct_left <= bins_left;
                    let quota_met = (acc as f64 - ideal).abs()
                        <= ((acc + count) as f64 - ideal).abs()
                        && acc as f64 >= ideal * 0.5;
                    if must_close || quota_met {
                        bin_end[bin] = idx;
                        remaining -= acc;
                        bin += 1;
                        acc = 0;
                    }
                }
                acc += count;
            }
            let label_of = |b: usize| -> String {
                let start = if b == 0 { 0 } else { bin_end[b - 1] };
                let end = bin_end[b];
                let lo = distinct[start].0;
                let hi = distinct[end - 1].0;
                if lo == hi {
                    format!("{lo}")
                } else {
                    format!("{lo}..{hi}")
                }
            };
            Ok(values
                .iter()
                .map(|v| {
                    let mut b = 0;
                    for (i, &end) in bin_end.iter().enumerate() {
                        let hi = distinct[end - 1].0;
                        if *v <= hi {
                            b = i;
                            break;
                        }
                    }
                    label_of(b)
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_contingency_round_trip() {
        let csv = "age,flu,cold\nyoung,10,0\nold,0,10\n";
        let ingest = ingest_contingency(csv.as_bytes(), None, false).unwrap();
        assert_eq!(ingest.table.grand_total(), 20.0);
        assert_eq!(ingest.table.row_labels(), ["young", "old"]);
        assert_eq!(ingest.table.col_labels(), ["flu", "cold"]);
        assert!(ingest.groups.is_none());
    }

    #[test]
    fn zero_column_needs_drop_empty() {
        let csv = "r,a,b,c\nx,1,0,2\ny,3,0,4\n";
        let err = ingest_contingency(csv.as_bytes(), None, false).unwrap_err();
        assert!(matches!(err, Error::ZeroMarginal { .. }));
        let ok = ingest_contingency(csv.as_bytes(), None, true).unwrap();
        assert_eq!(ok.table.col_labels(), ["a", "c"]);
        assert_eq!(ok.notes.len(), 1);
    }

    #[test]
    fn parse_errors_carry_a_locus() {
        let csv = "r,a,b\nx,1,oops\n";
        match ingest_contingency(csv.as_bytes(), None, false).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!((line, column), (2, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
        let csv = "r,a,b\nx,1,-2\n";
        assert!(matches!(
            ingest_contingency(csv.as_bytes(), None, false).unwrap_err(),
            Error::NegativeCount { line: 2, column: 3 }
        ));
    }

    #[test]
    fn group_column_is_extracted_not_analyzed() {
        let csv = "author,origin,comma,period\na1,fr,5,3\na2,uk,2,8\na3,fr,6,2\n";
        let ingest = ingest_contingency(csv.as_bytes(), Some("origin"), false).unwrap();
        assert_eq!(ingest.table.col_labels(), ["comma", "period"]);
        let groups = ingest.groups.unwrap();
        assert_eq!(groups.group_count(), 2);
        assert_eq!(groups.assignments(), [0, 1, 0]);
    }

    #[test]
    fn categorical_one_hot_with_first_appearance_order() {
        let csv = "id,pet\no1,cat\no2,dog\n";
        let ingest = ingest_categorical(csv.as_bytes(), None).unwrap();
        let t = &ingest.table;
        assert_eq!(t.level_labels(), ["pet:cat", "pet:dog"]);
        assert_eq!(t.indicator().row(0), [1.0, 0.0]);
        assert_eq!(t.indicator().row(1), [0.0, 1.0]);
    }

    #[test]
    fn rows_sum_to_variable_count() {
        let csv = "id,a,b,c\no1,x,u,p\no2,y,v,q\no3,x,u,q\no4,y,u,p\n";
        let ingest = ingest_categorical(csv.as_bytes(), None).unwrap();
        let t = &ingest.table;
        assert_eq!(t.variable_count(), 3);
        for i in 0..4 {
            let s: f64 = t.indicator().row(i).iter().sum();
            assert_eq!(s, 3.0);
        }
    }

    #[test]
    fn indicator_decodes_back_to_the_original_labels() {
        let cells = [
            ["red", "small", "hot"],
            ["blue", "small", "cold"],
            ["red", "large", "mild"],
            ["green", "large", "hot"],
        ];
        let mut csv = String::from("id,color,size,temp\n");
        for (i, row) in cells.iter().enumerate() {
            csv.push_str(&format!("o{i},{},{},{}\n", row[0], row[1], row[2]));
        }
        let ingest = ingest_categorical(csv.as_bytes(), None).unwrap();
        let t = &ingest.table;
        for (i, row) in cells.iter().enumerate() {
            for (k, span) in t.variable_spans().iter().enumerate() {
                let j = (span.start..span.start + span.len)
                    .find(|&j| t.indicator().get(i, j) == 1.0)
                    .unwrap();
                let label = &t.level_labels()[j];
                let decoded = label.split(':').nth(1).unwrap();
                assert_eq!(decoded, row[k]);
            }
        }
    }

    #[test]
    fn missing_cells_are_rejected() {
        let csv = "id,a,b\no1,x,\no2,y,v\n";
        assert!(matches!(
            ingest_categorical(csv.as_bytes(), None).unwrap_err(),
            Error::MissingCell { line: 2, column: 3 }
        ));
    }

    #[test]
    fn uniform_range_bins_evenly() {
        let values: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let bins = bin_numeric(&values, &BinSpec::Count(4)).unwrap();
        let mut counts = std::collections::BTreeMap::new();
        for b in &bins {
            *counts.entry(b.clone()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 4);
        for (_, c) in counts {
            assert_eq!(c, 25);
        }
    }

    #[test]
    fn constant_column_cannot_be_binned() {
        let values = vec![3.0; 10];
        assert!(matches!(
            bin_numeric(&values, &BinSpec::Count(2)).unwrap_err(),
            Error::TooFewDistinct { distinct: 1, bins: 2 }
        ));
    }

    #[test]
    fn skewed_likert_bins_are_balanced_where_ties_permit() {
        // 7-point scale, heavy in the middle.
        let mut values = Vec::new();
        for (v, c) in [(1, 4), (2, 9), (3, 22), (4, 25), (5, 20), (6, 12), (7, 8)] {
            values.extend(std::iter::repeat(v as f64).take(c));
        }
        let bins = bin_numeric(&values, &BinSpec::Count(3)).unwrap();
        let mut counts = std::collections::BTreeMap::new();
        for b in &bins {
            *counts.entry(b.clone()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 3);
        // Quantile oracle: intact value classes, n = 100, so the best
        // achievable split is 35 / 25 / 40.
        let sizes: Vec<usize> = counts.values().cloned().collect();
        assert_eq!(sizes.iter().sum::<usize>(), 100);
        for s in &sizes {
            assert!(*s >= 25 && *s <= 40, "sizes {sizes:?}");
        }
        // All occurrences of one value share a bin.
        for v in 1..=7 {
            let labels: std::collections::BTreeSet<&String> = values
                .iter()
                .zip(bins.iter())
                .filter(|(x, _)| **x == v as f64)
                .map(|(_, b)| b)
                .collect();
            assert_eq!(labels.len(), 1);
        }
    }

    #[test]
    fn explicit_breaks_override_quantiles() {
        let values = vec![1.0, 2.0, 5.0, 9.0];
        let bins = bin_numeric(&values, &BinSpec::Breaks(vec![3.0, 7.0])).unwrap();
        assert_eq!(bins, vec!["<3", "<3", "[3,7)", ">=7"]);
    }
}
