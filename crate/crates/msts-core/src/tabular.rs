//! Plain CSV categorical tables (no quoting, `?` marks a missing value).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabularDataset {
    pub attribute_names: Vec<String>,
    /// Known values per attribute, in first-appearance order. The missing
    /// marker is not listed; it keeps the sentinel id below.
    pub attribute_value_names: Vec<Vec<String>>,
    pub class_names: Vec<String>,
    /// value ids, row-major [instance][attribute]
    attributes: Vec<usize>,
    labels: Vec<usize>,
}

impl TabularDataset {
    /// Sentinel id of a missing (`?`) cell. Treated as one more category
    /// by every counting consumer.
    pub const MISSING: usize = usize::MAX;

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn value(&self, instance: usize, attribute: usize) -> usize {
        self.attributes[instance * self.n_attributes() + attribute]
    }

    /// The full value column of one attribute.
    pub fn column(&self, attribute: usize) -> Vec<usize> {
        (0..self.n_instances())
            .map(|i| self.value(i, attribute))
            .collect()
    }
}

/// Parse comma-separated categorical rows. The column at `label_column`
/// becomes the class; the remaining columns become attributes in file
/// order. Value and class ids follow first appearance.
pub fn parse_tabular(text: &str, label_column: usize) -> Result<TabularDataset> {
    let mut n_columns = None;
    let mut class_names: Vec<String> = Vec::new();
    let mut value_names: Vec<Vec<String>> = Vec::new();
    let mut attributes: Vec<usize> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let cols = *n_columns.get_or_insert_with(|| {
            value_names = vec![Vec::new(); cells.len().saturating_sub(1)];
            cells.len()
        });
        if cells.len() != cols {
            return Err(Error::CsvParse {
                line: line_no,
                msg: format!("row has {} columns, expected {cols}", cells.len()),
            });
        }
        if label_column >= cols {
            return Err(Error::CsvParse {
                line: line_no,
                msg: format!("label column {label_column} out of range for {cols} columns"),
            });
        }
        let label_cell = cells[label_column];
        let label = match class_names.iter().position(|c| c == label_cell) {
            Some(id) => id,
            None => {
                class_names.push(label_cell.to_string());
                class_names.len() - 1
            }
        };
        labels.push(label);
        let mut attr = 0;
        for (col, cell) in cells.iter().enumerate() {
            if col == label_column {
                continue;
            }
            let id = if *cell == "?" {
                TabularDataset::MISSING
            } else {
                match value_names[attr].iter().position(|v| v == cell) {
                    Some(id) => id,
                    None => {
                        value_names[attr].push(cell.to_string());
                        value_names[attr].len() - 1
                    }
                }
            };
            attributes.push(id);
            attr += 1;
        }
    }

    let cols = n_columns.ok_or(Error::CsvParse {
        line: 0,
        msg: "empty input".into(),
    })?;
    if cols < 2 {
        return Err(Error::CsvParse {
            line: 1,
            msg: "need at least one attribute besides the label".into(),
        });
    }
    let attribute_names = (0..cols)
        .filter(|&c| c != label_column)
        .map(|c| format!("col{c}"))
        .collect();
    Ok(TabularDataset {
        attribute_names,
        attribute_value_names: value_names,
        class_names,
        attributes,
        labels,
    })
}
