//! Report serialization: versioned per-image JSON and the aggregate CSV.

use serde::Serialize;

use crate::error::Result;
use crate::quantify::QuantReport;

pub const CSV_HEADER: &str = "image_id,n_discrete,n_clusters,mean_discrete_size,\
n_cells_in_clusters,n_total,bin_0_20,bin_21_40,bin_41_60,bin_61_80,bin_81_100,\
bin_101_120,bin_121_140,bin_141_160,bin_gt_160";

#[derive(Serialize)]
struct VersionedReport<'a> {
    schema: u32,
    #[serde(flatten)]
    report: &'a QuantReport,
}

/// Renders one report as its JSON document (schema-versioned, trailing
/// newline).
pub fn report_json(report: &QuantReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&VersionedReport { schema: 1, report })?;
    s.push('\n');
    Ok(s)
}

/// Renders the aggregate CSV for reports already ordered by the caller.
pub fn reports_csv(reports: &[&QuantReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))?;
    for r in reports {
        let mut record = vec![
            r.image_id.clone(),
            r.n_discrete.to_string(),
            r.n_clusters.to_string(),
            r.mean_discrete_size.to_string(),
            r.n_cells_in_clusters.to_string(),
            r.n_total.to_string(),
        ];
        record.extend(r.histogram.counts.iter().map(u64::to_string));
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
