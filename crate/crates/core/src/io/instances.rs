//! CSV instance files.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::scalar::Scalar;
use crate::space::Instance;

/// Names accepted for the optional label column.
pub const LABEL_COLUMNS: [&str; 2] = ["label", "class"];

/// Reads instances whose header names every feature (in any order) and
/// optionally a label column holding class names or indices. Unlabelled
/// rows are labelled by the classifier. Columns of a categorical group must
/// be one-hot. Rows are numbered from 1 (the first record after the header).
pub fn read_instances<T: Scalar, R: Read>(reader: R, model: &Model<T>) -> Result<Vec<Instance>> {
    let space = &model.space;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut columns = Vec::with_capacity(space.num_features());
    for i in 0..space.num_features() {
        let name = space.name(i);
        let col = header.iter().position(|h| h == name).ok_or_else(|| Error::Data {
            row: 0,
            column: name.to_string(),
            message: "missing feature column".into(),
        })?;
        columns.push(col);
    }
    let label_col = header.iter().position(|h| LABEL_COLUMNS.contains(&h));
    let mut out = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record?;
        let mut values = Vec::with_capacity(columns.len());
        for (i, &c) in columns.iter().enumerate() {
            let cell = record.get(c).unwrap_or("");
            let err = |message: String| Error::Data {
                row,
                column: space.name(i).to_string(),
                message,
            };
            let v: i64 = cell.parse().map_err(|_| err(format!("`{cell}` is not an integer")))?;
            if !space.domain(i).contains(&v) {
                return Err(err(format!("value {v} is outside the domain {:?}", space.domain(i))));
            }
            values.push(v);
        }
        for (u, members) in space.units().iter().enumerate() {
            if space.is_grouped(u) && members.iter().filter(|&&f| values[f] == 1).count() != 1 {
                let names: Vec<&str> = members.iter().map(|&f| space.name(f)).collect();
                return Err(Error::Data {
                    row,
                    column: names.join("|"),
                    message: "categorical group is not one-hot".into(),
                });
            }
        }
        let predicted = model.predict(&values)?;
        let label = match label_col.map(|c| record.get(c).unwrap_or("")) {
            None | Some("") => predicted,
            Some(cell) => {
                let label = model
                    .class_index(cell)
                    .ok()
                    .or_else(|| cell.parse::<usize>().ok().filter(|&k| k < model.num_classes()))
                    .ok_or_else(|| Error::Data {
                        row,
                        column: header[label_col.expect("present")].to_string(),
                        message: format!("unknown class `{cell}`"),
                    })?;
                if label != predicted {
                    return Err(Error::Data {
                        row,
                        column: header[label_col.expect("present")].to_string(),
                        message: format!(
                            "label mismatch: classifier predicts `{}`",
                            model.classes[predicted]
                        ),
                    });
                }
                label
            }
        };
        out.push(Instance::new(values, label));
    }
    Ok(out)
}

pub fn load_instances<T: Scalar>(path: impl AsRef<Path>, model: &Model<T>) -> Result<Vec<Instance>> {
    read_instances(std::fs::File::open(path)?, model)
}
