use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::order::CovariateTensor;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CovariateReport {
    pub rows: usize,
    /// (agent, item) pairs absent from the file, filled with zeros.
    pub missing: usize,
}

/// Reads `agent_id,item_id,f1,…,fd` rows (1-based ids, one header row)
/// into an `n × m × d` tensor.
pub fn load_covariates(
    path: &Path,
    n: usize,
    m: usize,
) -> Result<(CovariateTensor, CovariateReport)> {
    let text = std::fs::read_to_string(path)?;
    parse_covariates(&text, path, n, m)
}

pub fn parse_covariates(
    text: &str,
    path: &Path,
    n: usize,
    m: usize,
) -> Result<(CovariateTensor, CovariateReport)> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.len() < 2 {
        return Err(err(1, "header must start with agent_id,item_id".into()));
    }
    let d = header.len() - 2;
    if d == 0 {
        return Err(Error::Shape("d must be ≥ 1".into()));
    }
    let mut values = vec![0.0; n * m * d];
    let mut seen = vec![false; n * m];
    let mut rows = 0;
    for record in reader.records() {
        let record = record
            .map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(err(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let id = |i: usize, name: &str, max: usize| -> Result<usize> {
            match record[i].parse::<usize>() {
                Ok(v) if (1..=max).contains(&v) => Ok(v),
                _ => Err(err(line, format!("unknown {name} {:?}", &record[i]))),
            }
        };
        let agent = id(0, "agent_id", n)?;
        let item = id(1, "item_id", m)?;
        let cell = (agent - 1) * m + (item - 1);
        if seen[cell] {
            return Err(err(
                line,
                format!("duplicate row for agent {agent}, item {item}"),
            ));
        }
        seen[cell] = true;
        for f in 0..d {
            let v: f64 = record[2 + f]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(line, format!("non-numeric feature {:?}", &record[2 + f])))?;
            values[cell * d + f] = v;
        }
        rows += 1;
    }
    let report = CovariateReport {
        rows,
        missing: seen.iter().filter(|s| !**s).count(),
    };
    Ok((CovariateTensor::new(n, m, d, values)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, n: usize, m: usize) -> Result<(CovariateTensor, CovariateReport)> {
        parse_covariates(text, Path::new("cov.csv"), n, m)
    }

    #[test]
    fn full_table() {
        let (t, r) = parse(
            "agent_id,item_id,x\n1,1,0.5\n1,2,1.5\n2,1,-1\n2,2,2\n",
            2,
            2,
        )
        .unwrap();
        assert_eq!(
            r,
            CovariateReport {
                rows: 4,
                missing: 0
            }
        );
        assert_eq!(t.values(), &[0.5, 1.5, -1.0, 2.0]);
        assert_eq!(t.agent(1).item(1), &[2.0]);
    }

    #[test]
    fn missing_pair_is_zero_filled() {
        let (t, r) = parse("agent_id,item_id,x,y\n1,1,1,2\n1,2,3,4\n2,2,5,6\n", 2, 2).unwrap();
        assert_eq!(r.missing, 1);
        assert_eq!(t.agent(1).item(0), &[0.0, 0.0]);
    }

    #[test]
    fn errors() {
        let e = parse("agent_id,item_id\n1,1\n", 1, 1).unwrap_err();
        assert!(e.to_string().contains("d must be ≥ 1"));
        assert!(parse("agent_id,item_id,x\n1,3,0\n", 1, 2).is_err());
        assert!(parse("agent_id,item_id,x\n1,1,abc\n", 1, 2).is_err());
        assert!(parse("agent_id,item_id,x\n1,1,1\n1,1,2\n", 1, 2).is_err());
    }
}
