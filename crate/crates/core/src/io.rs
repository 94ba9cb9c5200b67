//! CSV ingestion and artifact writers.
//!
//! Input files share the layout `date,<name1>,...,<nameK>` with one row per
//! period. Returns and state files are aligned by inner join on the date
//! column. All numeric output uses the shortest decimal representation that
//! round-trips to the same f64.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::centrality::CentralityScores;
use crate::foce::FoceOrdering;
use crate::tail_risk::PanelData;
use crate::{Error, Result};

/// One parsed wide-format CSV: column names and per-date rows.
struct SeriesTable {
    names: Vec<String>,
    /// date -> values, ordered by date
    rows: BTreeMap<String, Vec<f64>>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn read_series(path: &Path) -> Result<SeriesTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    if headers.len() < 2 {
        return Err(parse_err(path, 1, "need a date column plus at least one series"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(parse_err(path, 1, "empty series name in header"));
    }
    let mut rows = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // 1-based, after the header
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let date = record[0].trim().to_string();
        if date.is_empty() {
            return Err(parse_err(path, line, "empty date cell"));
        }
        let mut values = Vec::with_capacity(names.len());
        for (col, cell) in record.iter().enumerate().skip(1) {
            let trimmed = cell.trim();
            if trimmed.is_empty() {
                return Err(parse_err(
                    path,
                    line,
                    format!("blank cell in column '{}'", headers[col].trim()),
                ));
            }
            let value: f64 = trimmed.parse().map_err(|_| {
                parse_err(
                    path,
                    line,
                    format!("non-numeric cell '{trimmed}' in column '{}'", headers[col].trim()),
                )
            })?;
            if !value.is_finite() {
                return Err(parse_err(
                    path,
                    line,
                    format!("non-finite value in column '{}'", headers[col].trim()),
                ));
            }
            values.push(value);
        }
        if rows.insert(date.clone(), values).is_some() {
            return Err(parse_err(path, line, format!("duplicate timestamp '{date}'")));
        }
    }
    if rows.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    Ok(SeriesTable { names, rows })
}

/// Load and align the returns and state files on their common dates.
pub fn load_panel(returns_path: &Path, state_path: &Path) -> Result<PanelData> {
    let returns = read_series(returns_path)?;
    let state = read_series(state_path)?;
    let dates: Vec<String> = returns
        .rows
        .keys()
        .filter(|d| state.rows.contains_key(*d))
        .cloned()
        .collect();
    if dates.is_empty() {
        return Err(parse_err(
            returns_path,
            0,
            "returns and state files share no timestamps",
        ));
    }
    let n = returns.names.len();
    let p = state.names.len();
    let t = dates.len();
    let mut r = DMatrix::zeros(n, t);
    let mut s = DMatrix::zeros(p, t);
    for (col, date) in dates.iter().enumerate() {
        for (row, v) in returns.rows[date].iter().enumerate() {
            r[(row, col)] = *v;
        }
        for (row, v) in state.rows[date].iter().enumerate() {
            s[(row, col)] = *v;
        }
    }
    PanelData::new(returns.names, r, state.names, s, dates)
}

/// Write a square labelled matrix: first row/column hold `names`.
pub fn write_matrix(path: &Path, names: &[String], matrix: &DMatrix<f64>) -> Result<()> {
    if matrix.nrows() != names.len() || matrix.ncols() != names.len() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{} but {} names given",
            matrix.nrows(),
            matrix.ncols(),
            names.len()
        )));
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    writer.write_record(&header)?;
    for i in 0..names.len() {
        let mut row = vec![names[i].clone()];
        row.extend((0..names.len()).map(|j| format!("{}", matrix[(i, j)])));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a file produced by `write_matrix` back into names + matrix.
pub fn read_matrix(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let n = names.len();
    let mut matrix = DMatrix::zeros(n, n);
    let mut count = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        if idx >= n || record.len() != n + 1 {
            return Err(parse_err(path, line, "matrix shape mismatch"));
        }
        for j in 0..n {
            matrix[(idx, j)] = record[j + 1]
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line, format!("non-numeric cell '{}'", &record[j + 1])))?;
        }
        count += 1;
    }
    if count != n {
        return Err(parse_err(path, count + 1, "matrix shape mismatch"));
    }
    Ok((names, matrix))
}

/// centrality.csv: `node,kind,score,rank` with rank 1 = highest score.
pub fn write_centrality(path: &Path, names: &[String], scores: &CentralityScores) -> Result<()> {
    if names.len() != scores.scores.len() {
        return Err(Error::InvalidArgument("name/score length mismatch".into()));
    }
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| {
        scores.scores[b]
            .partial_cmp(&scores.scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut rank = vec![0usize; names.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["node", "kind", "score", "rank"])?;
    for i in 0..names.len() {
        writer.write_record([
            names[i].as_str(),
            &scores.kind.to_string(),
            &format!("{}", scores.scores[i]),
            &rank[i].to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// ordering.csv: `step,removed_node,objective,stopped` (stopped in {0,1}).
pub fn write_ordering(path: &Path, names: &[String], ordering: &FoceOrdering) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["step", "removed_node", "objective", "stopped"])?;
    for (k, &node) in ordering.removed.iter().enumerate() {
        let stopped = if k + 1 == ordering.stop_index { 1 } else { 0 };
        writer.write_record([
            (k + 1).to_string(),
            names[node].clone(),
            format!("{}", ordering.objective_trace[k]),
            stopped.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// weights.csv: `node,weight`.
pub fn write_weights(path: &Path, names: &[String], weights: &[f64]) -> Result<()> {
    if names.len() != weights.len() {
        return Err(Error::InvalidArgument("name/weight length mismatch".into()));
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["node", "weight"])?;
    for (name, w) in names.iter().zip(weights) {
        writer.write_record([name.as_str(), &format!("{w}")])?;
    }
    writer.flush()?;
    Ok(())
}

/// Wide per-date series file as consumed by `load_panel`.
pub fn write_series(
    path: &Path,
    names: &[String],
    data: &DMatrix<f64>,
    timestamps: &[String],
) -> Result<()> {
    if data.nrows() != names.len() || data.ncols() != timestamps.len() {
        return Err(Error::InvalidArgument("series shape mismatch".into()));
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["date".to_string()];
    header.extend(names.iter().cloned());
    writer.write_record(&header)?;
    for (t, date) in timestamps.iter().enumerate() {
        let mut row = vec![date.clone()];
        row.extend((0..names.len()).map(|i| format!("{}", data[(i, t)])));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::CentralityKind;
    use std::fs;

    fn tmpdir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("tailnet-io-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_file(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn load_minimal_fixture() {
        let dir = tmpdir("minimal");
        let mut returns = String::from("date,a,b\n");
        let mut state = String::from("date,x\n");
        for day in 1..=10 {
            returns.push_str(&format!("2020-01-{day:02},0.{day},-0.0{day}\n"));
            state.push_str(&format!("2020-01-{day:02},1.{day}\n"));
        }
        let rp = write_file(&dir, "returns.csv", &returns);
        let sp = write_file(&dir, "state.csv", &state);
        let panel = load_panel(&rp, &sp).unwrap();
        assert_eq!(panel.asset_names, vec!["a", "b"]);
        assert_eq!(panel.state_names, vec!["x"]);
        assert_eq!(panel.returns.shape(), (2, 10));
        assert_eq!(panel.state.shape(), (1, 10));
        assert_eq!(panel.returns[(0, 0)], 0.1);
        assert_eq!(panel.returns[(1, 9)], -0.010);
    }

    #[test]
    fn inner_join_takes_intersection() {
        let dir = tmpdir("join");
        let returns = "date,a,b\n2020-01-01,1,2\n2020-01-02,3,4\n2020-01-03,5,6\n\
                       2020-01-04,7,8\n2020-01-05,9,10\n2020-01-06,11,12\n";
        let state = "date,x\n2020-01-02,1\n2020-01-03,2\n2020-01-04,3\n2020-01-05,4\n\
                     2020-01-06,5\n2020-01-07,6\n";
        let rp = write_file(&dir, "r.csv", returns);
        let sp = write_file(&dir, "s.csv", state);
        let panel = load_panel(&rp, &sp).unwrap();
        assert_eq!(panel.n_periods(), 5);
        assert_eq!(panel.timestamps.first().unwrap(), "2020-01-02");
        assert_eq!(panel.returns[(0, 0)], 3.0);
    }

    #[test]
    fn blank_cell_reports_row_and_column() {
        let dir = tmpdir("blank");
        let returns = "date,a,b\n2020-01-01,1,2\n2020-01-02,,4\n";
        let rp = write_file(&dir, "r.csv", returns);
        let sp = write_file(&dir, "s.csv", "date,x\n2020-01-01,1\n2020-01-02,2\n");
        let err = load_panel(&rp, &sp).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":3:"), "{msg}");
        assert!(msg.contains("'a'"), "{msg}");
    }

    #[test]
    fn bad_inputs_rejected() {
        let dir = tmpdir("bad");
        let sp = write_file(&dir, "s.csv", "date,x\n2020-01-01,1\n2020-01-02,2\n");
        for (tag, body, needle) in [
            ("ragged", "date,a,b\n2020-01-01,1,2\n2020-01-02,3\n", "fields"),
            ("nonnum", "date,a,b\n2020-01-01,1,ha\n2020-01-02,3,4\n", "non-numeric"),
            (
                "dup",
                "date,a,b\n2020-01-01,1,2\n2020-01-01,3,4\n",
                "duplicate timestamp",
            ),
            ("disjoint", "date,a,b\n1999-01-01,1,2\n1999-01-02,3,4\n", "no timestamps"),
        ] {
            let rp = write_file(&dir, &format!("{tag}.csv"), body);
            let err = load_panel(&rp, &sp).unwrap_err();
            assert!(err.to_string().contains(needle), "{tag}: {err}");
        }
    }

    #[test]
    fn matrix_round_trip_exact() {
        let dir = tmpdir("matrix");
        let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let m = DMatrix::from_fn(3, 3, |i, j| {
            (1.0 + i as f64) / (3.0 + j as f64) * if (i + j) % 2 == 0 { 1.0 } else { -1.0 }
        });
        let path = dir.join("m.csv");
        write_matrix(&path, &names, &m).unwrap();
        let (rn, rm) = read_matrix(&path).unwrap();
        assert_eq!(rn, names);
        assert_eq!(rm, m);
    }

    #[test]
    fn series_round_trip_exact() {
        let dir = tmpdir("series");
        let names = vec!["a".to_string(), "b".to_string()];
        let data = DMatrix::from_row_slice(
            2,
            5,
            &[0.1, 1.0 / 3.0, -2.5e-8, 0.625, 3.1e17, 7.0, 0.0, 1e300, -0.3, 2.0_f64.sqrt()],
        );
        let stamps: Vec<String> = (0..5).map(|t| format!("2021-02-0{}", t + 1)).collect();
        let rp = dir.join("r.csv");
        write_series(&rp, &names, &data, &stamps).unwrap();
        let sp = write_file(
            &dir,
            "s.csv",
            "date,x\n2021-02-01,1\n2021-02-02,2\n2021-02-03,3\n2021-02-04,4\n2021-02-05,5\n",
        );
        let panel = load_panel(&rp, &sp).unwrap();
        assert_eq!(panel.returns, data);
    }

    #[test]
    fn centrality_ranks_descending() {
        let dir = tmpdir("centrality");
        let names: Vec<String> = ["n0", "n1", "n2"].iter().map(|s| s.to_string()).collect();
        let scores = CentralityScores {
            kind: CentralityKind::Degree,
            scores: nalgebra::DVector::from_vec(vec![0.2, 0.9, 0.5]),
            params: vec![],
            disconnected_warning: false,
        };
        let path = dir.join("c.csv");
        write_centrality(&path, &names, &scores).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines[0], "node,kind,score,rank");
        assert_eq!(lines[1], "n0,degree,0.2,3");
        assert_eq!(lines[2], "n1,degree,0.9,1");
        assert_eq!(lines[3], "n2,degree,0.5,2");
    }

    #[test]
    fn ordering_file_marks_stop_row() {
        let dir = tmpdir("ordering");
        let names: Vec<String> = ["n0", "n1", "n2"].iter().map(|s| s.to_string()).collect();
        let ordering = FoceOrdering {
            removed: vec![2, 0],
            objective_trace: vec![0.75, 0.5],
            stop_index: 2,
            selected_set: vec![1],
            fallback_steps: vec![],
        };
        let path = dir.join("o.csv");
        write_ordering(&path, &names, &ordering).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = body.lines().collect();
        assert_eq!(lines[1], "1,n2,0.75,0");
        assert_eq!(lines[2], "2,n0,0.5,1");
    }
}
