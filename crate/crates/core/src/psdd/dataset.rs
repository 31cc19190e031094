use crate::error::{Error, Result};
use crate::logic::Term;

/// Complete examples with multiplicities; column `j` is variable `j+1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    rows: Vec<(Vec<bool>, u64)>,
}

impl Dataset {
    pub fn new(names: Vec<String>) -> Self {
        Dataset { names, rows: Vec::new() }
    }

    /// Columns named `X1..Xn`.
    pub fn with_var_count(n: u32) -> Self {
        Dataset::new((1..=n).map(|i| format!("X{i}")).collect())
    }

    pub fn var_count(&self) -> u32 {
        self.names.len() as u32
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[(Vec<bool>, u64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sum of multiplicities.
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|(_, c)| c).sum()
    }

    pub fn push(&mut self, values: Vec<bool>, count: u64) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::InvalidModel(format!(
                "row has {} values for {} columns",
                values.len(),
                self.names.len()
            )));
        }
        if count == 0 {
            return Err(Error::InvalidModel("row multiplicity must be at least 1".into()));
        }
        self.rows.push((values, count));
        Ok(())
    }

    pub fn push_term(&mut self, t: &Term, count: u64) -> Result<()> {
        let values = t.to_values(self.var_count())?;
        self.push(values, count)
    }

    /// Header of variable names plus an optional `count` column; cells are 0/1.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let count_col = header.iter().position(|h| h == "count");
        let names: Vec<String> = header.iter().filter(|h| *h != "count").cloned().collect();
        let mut data = Dataset::new(names);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let mut values = Vec::with_capacity(data.names.len());
            let mut count = 1;
            for (j, cell) in rec.iter().enumerate() {
                if Some(j) == count_col {
                    count = cell.parse::<u64>().map_err(|_| Error::parse(line, format!("bad count {cell:?}")))?;
                    continue;
                }
                values.push(match cell {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(Error::parse(line, format!("bad value {cell:?}"))),
                });
            }
            data.push(values, count).map_err(|e| Error::parse(line, e.to_string()))?;
        }
        Ok(data)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.names.clone();
        header.push("count".into());
        w.write_record(&header)?;
        for (values, count) in &self.rows {
            let mut rec: Vec<String> = values.iter().map(|&b| if b { "1" } else { "0" }.to_string()).collect();
            rec.push(count.to_string());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let d = Dataset::from_csv("A,B,count\n1,0,3\n0,0,1\n").unwrap();
        assert_eq!(d.var_count(), 2);
        assert_eq!(d.total(), 4);
        assert_eq!(d.rows()[0], (vec![true, false], 3));
        assert_eq!(Dataset::from_csv(&d.to_csv().unwrap()).unwrap(), d);
    }

    #[test]
    fn count_column_is_optional() {
        let d = Dataset::from_csv("A,B\n1,1\n").unwrap();
        assert_eq!(d.rows(), &[(vec![true, true], 1)]);
        assert!(Dataset::from_csv("A,B\n1,2\n").is_err());
        assert!(Dataset::from_csv("A,count\n1,0\n").is_err());
    }
}
