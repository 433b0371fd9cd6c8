//! CSV and JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use uwgfdm::numerics::PsdEstimate;

use crate::engine::MetricsRecord;
use crate::error::{SimError, SimResult};

fn create(path: &Path) -> SimResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| SimError::io(path, e))
}

fn write_rows<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> SimResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// `system, ebn0_db, ber, bler, throughput_paper, throughput_block, blocks, bit_errors, seed`.
pub fn write_records(path: &Path, records: &[MetricsRecord]) -> SimResult<()> {
    write_rows(path, records)
}

#[derive(Serialize)]
struct PsdRow {
    freq_norm: f64,
    psd_db: f64,
}

pub fn write_psd(path: &Path, psd: &PsdEstimate) -> SimResult<()> {
    write_rows(
        path,
        psd.freq_norm
            .iter()
            .zip(&psd.psd_db)
            .map(|(&freq_norm, &psd_db)| PsdRow { freq_norm, psd_db }),
    )
}

#[derive(Serialize)]
struct CcdfRow {
    papr_db: f64,
    ccdf: f64,
}

pub fn write_ccdf(path: &Path, ccdf: &[(f64, f64)]) -> SimResult<()> {
    write_rows(
        path,
        ccdf.iter()
            .map(|&(papr_db, ccdf)| CcdfRow { papr_db, ccdf }),
    )
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> SimResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| SimError::io(path, e))
}
