//! Potentials as CSV rows `y_1, ..., y_r, u` over the fundamental domain.

use std::io::{Read, Write};

use mabuchi_core::dingfun::ConvexPotential;
use mabuchi_core::RootDatum;

use crate::error::CliError;

/// Reads support points and values; `#` starts a comment and a leading
/// non-numeric row is taken as a header.
pub fn read_csv(reader: impl Read, rank: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let (mut points, mut values) = (Vec::new(), Vec::new());
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::input("InvalidPotential", e.to_string()))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if line == 0 => continue,
            Err(e) => return Err(CliError::input("InvalidPotential", format!("row {}: {e}", line + 1))),
        };
        if row.len() != rank + 1 {
            return Err(CliError::input(
                "InvalidPotential",
                format!("row {} has {} fields, expected {}", line + 1, row.len(), rank + 1),
            ));
        }
        points.push(row[..rank].to_vec());
        values.push(row[rank]);
    }
    if points.is_empty() {
        return Err(CliError::input("InvalidPotential", "no support points"));
    }
    Ok((points, values))
}

pub fn load(path: &str, datum: &RootDatum<f64>) -> Result<ConvexPotential, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let (points, values) = read_csv(file, datum.rank)?;
    Ok(ConvexPotential::new(datum, points, values)?)
}

/// Writes the fundamental support points with their values.
pub fn write_csv(writer: impl Write, u: &ConvexPotential) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    let fail = |e: csv::Error| CliError::numeric(e.to_string());
    let mut header: Vec<String> = (1..=u.rank).map(|i| format!("y{i}")).collect();
    header.push("u".into());
    w.write_record(&header).map_err(fail)?;
    for (y, v) in u.fundamental.iter().zip(&u.fundamental_values()) {
        let row: Vec<String> = y.iter().chain(std::iter::once(v)).map(|x| format!("{x:?}")).collect();
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::numeric(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_header_comments_and_expands() {
        let text = "y1,u\n# quadratic\n0,0\n1.5,1.125\n3,4.5\n";
        let (points, values) = read_csv(text.as_bytes(), 1).unwrap();
        assert_eq!(points.len(), 3);
        assert_eq!(values[2], 4.5);
        let datum = RootDatum::<f64>::explicit(vec![vec![1.0]], vec![vec![2.0]]).unwrap();
        let u = ConvexPotential::new(&datum, points, values).unwrap();
        assert_eq!(u.eval(&[-3.0]), Some(4.5));

        let mut out = Vec::new();
        write_csv(&mut out, &u).unwrap();
        let (again, vals) = read_csv(out.as_slice(), 1).unwrap();
        assert_eq!(again.len(), 3);
        assert_eq!(vals, vec![0.0, 1.125, 4.5]);
        assert!(read_csv("0,1,2\n".as_bytes(), 1).is_err());
    }
}
