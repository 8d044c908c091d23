use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::order::{Dataset, PartialOrder, Universe};

/// Non-fatal findings from parsing a ballot file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseReport {
    pub declared_n: Option<usize>,
    pub observed_n: usize,
    pub warnings: Vec<String>,
}

/// Reads a preflib strict-incomplete-order file (legacy or 2021 layout),
/// expanding weighted lines into identical records.
pub fn parse_preflib(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_preflib_str(&text, path)?.0)
}

/// Parses file contents; `path` only labels error messages.
pub fn parse_preflib_str(text: &str, path: &Path) -> Result<(Dataset, ParseReport)> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(_, first)) = lines.first() else {
        return Err(parse_err(path, 1, "empty file"));
    };
    if first.starts_with('#') {
        parse_2021(&lines, path)
    } else {
        parse_legacy(&lines, path)
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        msg: msg.into(),
    }
}

fn parse_2021(lines: &[(usize, &str)], path: &Path) -> Result<(Dataset, ParseReport)> {
    let mut m = None;
    let mut declared_n = None;
    let mut names = BTreeMap::new();
    let mut body = Vec::new();
    for &(no, line) in lines {
        let Some(meta) = line.strip_prefix('#') else {
            body.push((no, line));
            continue;
        };
        let Some((key, value)) = meta.split_once(':') else {
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if key == "NUMBER ALTERNATIVES" {
            m = Some(
                value
                    .parse::<usize>()
                    .map_err(|_| parse_err(path, no, "bad alternative count"))?,
            );
        } else if key == "NUMBER VOTERS" {
            declared_n = Some(
                value
                    .parse::<usize>()
                    .map_err(|_| parse_err(path, no, "bad voter count"))?,
            );
        } else if let Some(id) = key.strip_prefix("ALTERNATIVE NAME ") {
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| parse_err(path, no, "bad alternative id"))?;
            names.insert(id, value.to_string());
        }
    }
    let m = m.ok_or_else(|| parse_err(path, 1, "missing '# NUMBER ALTERNATIVES' header"))?;
    let mut orders = Vec::new();
    for (no, line) in body {
        let (count, ballot) = line
            .split_once(':')
            .ok_or_else(|| parse_err(path, no, "expected 'count: alt,alt,…'"))?;
        push_ballot(&mut orders, count, ballot.split(','), m, path, no)?;
    }
    finish(m, names, declared_n, orders, path)
}

fn parse_legacy(lines: &[(usize, &str)], path: &Path) -> Result<(Dataset, ParseReport)> {
    let mut it = lines.iter().copied();
    let (no, first) = it.next().expect("caller checked non-empty");
    let m: usize = first
        .parse()
        .map_err(|_| parse_err(path, no, "expected the number of alternatives"))?;
    let mut names = BTreeMap::new();
    for _ in 0..m {
        let (no, line) = it
            .next()
            .ok_or_else(|| parse_err(path, no, "file ends inside the alternative list"))?;
        let (id, name) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, no, "expected 'id,name'"))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| parse_err(path, no, "bad alternative id"))?;
        names.insert(id, name.trim().to_string());
    }
    let (no, totals) = it
        .next()
        .ok_or_else(|| parse_err(path, no, "missing 'voters,sum,unique' line"))?;
    let declared_n = totals
        .split(',')
        .next()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| parse_err(path, no, "bad 'voters,sum,unique' line"))?;
    let mut orders = Vec::new();
    for (no, line) in it {
        let mut fields = line.split(',');
        let count = fields.next().unwrap_or_default();
        push_ballot(&mut orders, count, fields, m, path, no)?;
    }
    finish(m, names, Some(declared_n), orders, path)
}

fn push_ballot<'a>(
    orders: &mut Vec<PartialOrder>,
    count: &str,
    items: impl Iterator<Item = &'a str>,
    m: usize,
    path: &Path,
    no: usize,
) -> Result<()> {
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| parse_err(path, no, format!("bad ballot count {:?}", count.trim())))?;
    let mut ids = Vec::new();
    for tok in items {
        let tok = tok.trim();
        if tok.contains('{') || tok.contains('}') {
            return Err(Error::Unsupported(format!(
                "{}:{no}: tied entries are not strict top-k orders",
                path.display()
            )));
        }
        if tok.is_empty() {
            continue;
        }
        ids.push(
            tok.parse::<usize>()
                .map_err(|_| parse_err(path, no, format!("bad alternative {tok:?}")))?,
        );
    }
    if ids.is_empty() {
        return Err(parse_err(path, no, "empty ballot"));
    }
    let q = PartialOrder::new(ids);
    q.check(m).map_err(|e| parse_err(path, no, e.to_string()))?;
    orders.extend(std::iter::repeat_n(q, count));
    Ok(())
}

fn finish(
    m: usize,
    names: BTreeMap<usize, String>,
    declared_n: Option<usize>,
    orders: Vec<PartialOrder>,
    path: &Path,
) -> Result<(Dataset, ParseReport)> {
    let mut universe = Universe::new(m)?;
    if names.len() == m && names.keys().copied().eq(1..=m) {
        universe.set_labels(names.into_values().collect())?;
    }
    let mut report = ParseReport {
        declared_n,
        observed_n: orders.len(),
        warnings: Vec::new(),
    };
    if let Some(n) = declared_n {
        if n != orders.len() {
            report.warnings.push(format!(
                "{}: header declares {n} voters but {} ballots were read; using the ballots",
                path.display(),
                orders.len()
            ));
        }
    }
    if orders.is_empty() {
        return Err(parse_err(path, 1, "no ballots"));
    }
    Ok((Dataset::new(universe, orders)?, report))
}
