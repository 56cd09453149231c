//! CSV tables. Floats use Rust's shortest round-trip formatting, so reading
//! a table back gives the exact same values.

use std::path::Path;

use super::write_atomic;
use crate::analysis::{CorrelationMatrix, GeneScoreTable, RealnessTable};
use crate::attributes::{AttributeStats, SampleBatch};
use crate::error::{Error, Result};
use crate::genome::GenomeDims;
use crate::training::{LogRecord, Point};

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::Reader::from_path(path)?)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, path: &Path) -> Result<T> {
    rec.get(k)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Header(format!("{}: bad field {k} in row {:?}", path.display(), rec.position().map(|p| p.line()))))
}

pub fn write_stats_csv(path: &Path, stats: &AttributeStats) -> Result<()> {
    let dims = stats.dims;
    let rows = stats.attribute_ids.iter().enumerate().flat_map(move |(l, id)| {
        (0..dims.n_g).flat_map(move |i| {
            (0..dims.n_v).map(move |j| {
                vec![
                    id.clone(),
                    i.to_string(),
                    j.to_string(),
                    stats.p(l, i, j).to_string(),
                    stats.count(i, j).to_string(),
                ]
            })
        })
    });
    write_rows(path, &["attribute_id", "position", "variant", "probability", "count"], rows)
}

/// Reads a table written by [`write_stats_csv`]. The CSV does not carry the
/// batch means, so they are recomputed as the count-weighted mean of
/// position 0.
pub fn read_stats_csv(path: &Path, dims: GenomeDims, alpha: f64) -> Result<AttributeStats> {
    let cells = dims.n_g * dims.n_v;
    let mut ids: Vec<String> = Vec::new();
    let mut table: Vec<f64> = Vec::new();
    let mut counts = vec![0usize; cells];
    let mut filled: Vec<bool> = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        let id = rec.get(0).unwrap_or_default().to_string();
        let l = match ids.iter().position(|a| *a == id) {
            Some(l) => l,
            None => {
                ids.push(id);
                table.resize(ids.len() * cells, 0.0);
                filled.resize(ids.len() * cells, false);
                ids.len() - 1
            }
        };
        let i: usize = field(&rec, 1, path)?;
        let j: usize = field(&rec, 2, path)?;
        if i >= dims.n_g || j >= dims.n_v {
            return Err(Error::IndexOutOfRange(format!("cell ({i}, {j}) for dims {dims:?}")));
        }
        table[l * cells + i * dims.n_v + j] = field(&rec, 3, path)?;
        filled[l * cells + i * dims.n_v + j] = true;
        counts[i * dims.n_v + j] = field(&rec, 4, path)?;
    }
    if filled.iter().any(|f| !f) {
        return Err(Error::Header(format!("{}: missing cells", path.display())));
    }
    let total: usize = counts[..dims.n_v].iter().sum();
    let global_means = (0..ids.len())
        .map(|l| {
            if total == 0 {
                return 0.0;
            }
            (0..dims.n_v)
                .map(|j| table[l * cells + j] * counts[j] as f64)
                .sum::<f64>()
                / total as f64
        })
        .collect();
    AttributeStats::from_parts(dims, ids, table, counts, alpha, global_means)
}

pub fn write_gene_scores_csv(path: &Path, scores: &GeneScoreTable) -> Result<()> {
    let rows = scores.attribute_ids.iter().enumerate().flat_map(|(l, id)| {
        (0..scores.dims.n_g).map(move |i| {
            vec![
                id.clone(),
                i.to_string(),
                scores.scores[l][i].to_string(),
                scores.mu[l][i].to_string(),
                scores.sigma[l][i].to_string(),
                scores.sums[l][i].to_string(),
            ]
        })
    });
    write_rows(path, &["attribute", "position", "score", "mu", "sigma", "sum_score"], rows)
}

pub fn write_realness_csv(path: &Path, table: &RealnessTable) -> Result<()> {
    let dims = table.dims;
    let rows = (0..dims.n_g).flat_map(|i| {
        (0..dims.n_v).map(move |j| vec![i.to_string(), j.to_string(), table.r(i, j).to_string(), table.count(i, j).to_string()])
    });
    write_rows(path, &["position", "variant", "realness", "count"], rows)
}

pub fn write_correlation_csv(path: &Path, m: &CorrelationMatrix) -> Result<()> {
    let mut header = vec!["attribute"];
    header.extend(m.attribute_ids.iter().map(String::as_str));
    let rows = (0..m.len()).map(|a| {
        let mut row = vec![m.attribute_ids[a].clone()];
        row.extend((0..m.len()).map(|b| m.get(a, b).to_string()));
        row
    });
    write_rows(path, &header, rows)
}

pub fn write_train_log_csv(path: &Path, records: &[LogRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.step.to_string(),
            r.d_loss.to_string(),
            r.g_loss.to_string(),
            r.d_real_mean.to_string(),
            r.d_fake_mean.to_string(),
        ]
    });
    write_rows(path, &["step", "d_loss", "g_loss", "d_real_mean", "d_fake_mean"], rows)
}

/// One row per sample: sequence, generated point, discriminator logit and
/// one probability column per attribute.
pub fn write_samples_csv(path: &Path, batch: &SampleBatch) -> Result<()> {
    let mut header = vec!["index", "sequence", "x", "y", "logit"];
    header.extend(batch.attribute_ids.iter().map(String::as_str));
    let rows = (0..batch.len()).map(|n| {
        let mut row = vec![
            n.to_string(),
            batch.sequences[n].to_string(),
            batch.points[n][0].to_string(),
            batch.points[n][1].to_string(),
            batch.logits[n].to_string(),
        ];
        row.extend(batch.probabilities[n].iter().map(f64::to_string));
        row
    });
    write_rows(path, &header, rows)
}

/// Points with optional extra labelled columns (e.g. `t` for interpolation).
pub fn write_points_csv(path: &Path, extra: &[&str], rows: &[(Vec<String>, Point)]) -> Result<()> {
    let mut header = extra.to_vec();
    header.extend(["x", "y"]);
    let rows = rows.iter().map(|(cols, p)| {
        let mut row = cols.clone();
        row.extend([p[0].to_string(), p[1].to_string()]);
        row
    });
    write_rows(path, &header, rows)
}

/// Reads the `x` and `y` columns of a CSV with a header row.
pub fn read_points_csv(path: &Path) -> Result<Vec<Point>> {
    let mut r = reader(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Header(format!("{}: no `{name}` column", path.display())))
    };
    let (xi, yi) = (col("x")?, col("y")?);
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let p: Point = [field(&rec, xi, path)?, field(&rec, yi, path)?];
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::InvalidConfig(format!("{}: non-finite target", path.display())));
        }
        points.push(p);
    }
    Ok(points)
}
