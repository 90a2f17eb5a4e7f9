//! Threshold-method benchmark: runs each method over a ground-truthed
//! corpus and scores detections by centroid matching.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::imgproc::components::{connected_components, Connectivity};
use crate::io::load_image;
use crate::pipeline::list_images;
use crate::raster::{apply_threshold, Component, GrayImage, Polarity};
use crate::synth::GroundTruth;
use crate::threshold::{
    max_entropy_threshold, otsu_threshold, segment_image, yen_threshold,
};

/// Default one-to-one matching radius between detected and true centroids.
pub const MATCH_RADIUS: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LiOtsu,
    Otsu,
    MaxEntropy,
    Yen,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LiOtsu => "li_otsu",
            Method::Otsu => "otsu",
            Method::MaxEntropy => "max_entropy",
            Method::Yen => "yen",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "li_otsu" => Ok(Method::LiOtsu),
            "otsu" => Ok(Method::Otsu),
            "max_entropy" => Ok(Method::MaxEntropy),
            "yen" => Ok(Method::Yen),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}'; expected li_otsu|otsu|max_entropy|yen"
            ))),
        }
    }
}

/// Corpus-level score for one method.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkRow {
    pub method: String,
    pub matched: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub debris: usize,
    pub total_count: usize,
    pub empty_space_resistant: bool,
    pub accuracy: f64,
}

/// Segments with the given method and returns the detected components.
/// The localized method works per block; the baselines apply one global
/// threshold, as their reference implementations do.
pub fn detect(img: &GrayImage, method: Method, cfg: &RunConfig) -> Result<Vec<Component>> {
    let mask = match method {
        Method::LiOtsu => segment_image(img, &cfg.li_otsu, cfg.segment_block)?.0,
        Method::Otsu | Method::MaxEntropy | Method::Yen => {
            let hist = img.histogram();
            let t = match method {
                Method::Otsu => otsu_threshold(&hist)?,
                Method::MaxEntropy => max_entropy_threshold(&hist)?,
                _ => yen_threshold(&hist)?,
            };
            apply_threshold(img, t, Polarity::DarkForeground)
        }
    };
    Ok(connected_components(&mask, Connectivity::Eight))
}

/// Per-image tallies from matching detections against truth centroids.
#[derive(Debug, Default, Clone, Copy)]
pub struct MatchCounts {
    pub matched: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub debris: usize,
}

/// Greedy nearest-first one-to-one matching within `radius`. Detections
/// under `min_area` are debris: tallied separately, never matched.
pub fn match_detections(
    detections: &[Component],
    truths: &[(f64, f64)],
    radius: f64,
    min_area: usize,
) -> MatchCounts {
    let (debris, real): (Vec<_>, Vec<_>) =
        detections.iter().partition(|c| c.area < min_area);
    let mut pairs = Vec::new();
    for (di, d) in real.iter().enumerate() {
        for (ti, &(tx, ty)) in truths.iter().enumerate() {
            let dist =
                ((d.centroid.0 - tx).powi(2) + (d.centroid.1 - ty).powi(2)).sqrt();
            if dist <= radius {
                pairs.push((dist, di, ti));
            }
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mut det_used = vec![false; real.len()];
    let mut truth_used = vec![false; truths.len()];
    let mut matched = 0;
    for (_, di, ti) in pairs {
        if !det_used[di] && !truth_used[ti] {
            det_used[di] = true;
            truth_used[ti] = true;
            matched += 1;
        }
    }
    MatchCounts {
        matched,
        false_positive: real.len() - matched,
        false_negative: truths.len() - matched,
        debris: debris.len(),
    }
}

fn truth_path(image: &Path) -> PathBuf {
    image.with_extension("truth.json")
}

/// Loads the (image, truth) pairs of a corpus directory.
pub fn load_corpus(dir: &Path) -> Result<Vec<(PathBuf, GroundTruth)>> {
    let images = list_images(dir)?;
    if images.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no images found in {}",
            dir.display()
        )));
    }
    images
        .into_iter()
        .map(|img| {
            let tp = truth_path(&img);
            let text = std::fs::read_to_string(&tp).map_err(|e| Error::Read {
                path: tp.clone(),
                source: Box::new(e),
            })?;
            let truth: GroundTruth = serde_json::from_str(&text)?;
            Ok((img, truth))
        })
        .collect()
}

/// Benchmarks every requested method over the corpus.
pub fn run_benchmark(dir: &Path, methods: &[Method], cfg: &RunConfig) -> Result<Vec<BenchmarkRow>> {
    cfg.validate()?;
    let corpus = load_corpus(dir)?;
    let images: Vec<(GrayImage, &GroundTruth)> = corpus
        .iter()
        .map(|(path, truth)| Ok((load_image(path)?, truth)))
        .collect::<Result<_>>()?;

    methods
        .iter()
        .map(|&method| {
            let per_image: Vec<(MatchCounts, bool)> = images
                .par_iter()
                .map(|(img, truth)| {
                    let detections = detect(img, method, cfg)?;
                    let centers: Vec<(f64, f64)> =
                        truth.objects.iter().map(|o| (o.cx, o.cy)).collect();
                    let counts = match_detections(
                        &detections,
                        &centers,
                        MATCH_RADIUS,
                        cfg.quantify.min_cell_area,
                    );
                    // Resistance is judged on the corpus's void-only images.
                    let clean_on_empty = truth.n_total != 0
                        || counts.matched + counts.false_positive == 0;
                    Ok((counts, clean_on_empty))
                })
                .collect::<Result<_>>()?;

            let mut total = MatchCounts::default();
            let mut resistant = true;
            for (c, clean) in per_image {
                total.matched += c.matched;
                total.false_positive += c.false_positive;
                total.false_negative += c.false_negative;
                total.debris += c.debris;
                resistant &= clean;
            }
            let denom = total.matched + total.false_positive + total.false_negative;
            Ok(BenchmarkRow {
                method: method.name().to_string(),
                matched: total.matched,
                false_positive: total.false_positive,
                false_negative: total.false_negative,
                debris: total.debris,
                total_count: total.matched + total.false_positive,
                empty_space_resistant: resistant,
                accuracy: if denom == 0 {
                    1.0
                } else {
                    total.matched as f64 / denom as f64
                },
            })
        })
        .collect()
}

/// Human-readable aligned table of the rows.
pub fn format_table(rows: &[BenchmarkRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>8} {:>6} {:>6} {:>7} {:>11} {:>11} {:>9}\n",
        "method", "matched", "fp", "fn", "debris", "total_count", "resistant", "accuracy"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<12} {:>8} {:>6} {:>6} {:>7} {:>11} {:>11} {:>9.4}\n",
            r.method,
            r.matched,
            r.false_positive,
            r.false_negative,
            r.debris,
            r.total_count,
            if r.empty_space_resistant { "yes" } else { "no" },
            r.accuracy
        ));
    }
    out
}

/// CSV form of the rows.
pub fn rows_csv(rows: &[BenchmarkRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "matched",
        "false_positive",
        "false_negative",
        "debris",
        "total_count",
        "empty_space_resistant",
        "accuracy",
    ])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.matched.to_string(),
            r.false_positive.to_string(),
            r.false_negative.to_string(),
            r.debris.to_string(),
            r.total_count.to_string(),
            r.empty_space_resistant.to_string(),
            r.accuracy.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(cx: f64, cy: f64, area: usize) -> Component {
        Component {
            label: 0,
            area,
            bbox: (cx as usize, cy as usize, cx as usize, cy as usize),
            centroid: (cx, cy),
            pixels: Vec::new(),
        }
    }

    #[test]
    fn perfect_match() {
        let truths = vec![(10.0, 10.0), (50.0, 50.0)];
        let dets = vec![det(11.0, 10.0, 400), det(49.0, 51.0, 400)];
        let c = match_detections(&dets, &truths, MATCH_RADIUS, 25);
        assert_eq!(
            (c.matched, c.false_positive, c.false_negative, c.debris),
            (2, 0, 0, 0)
        );
    }

    #[test]
    fn one_to_one_and_counts_balance() {
        // Two detections near one truth: only one may match.
        let truths = vec![(10.0, 10.0)];
        let dets = vec![det(12.0, 10.0, 400), det(9.0, 10.0, 400)];
        let c = match_detections(&dets, &truths, MATCH_RADIUS, 25);
        assert_eq!((c.matched, c.false_positive, c.false_negative), (1, 1, 0));
        // matched + fp == non-debris detections; matched + fn == truths.
        assert_eq!(c.matched + c.false_positive, 2);
        assert_eq!(c.matched + c.false_negative, 1);
    }

    #[test]
    fn nearest_pairing_wins() {
        let truths = vec![(0.0, 0.0), (12.0, 0.0)];
        let dets = vec![det(5.0, 0.0, 400)];
        let c = match_detections(&dets, &truths, MATCH_RADIUS, 25);
        assert_eq!(c.matched, 1);
        assert_eq!(c.false_negative, 1);
    }

    #[test]
    fn out_of_radius_unmatched() {
        let truths = vec![(0.0, 0.0)];
        let dets = vec![det(20.0, 0.0, 400)];
        let c = match_detections(&dets, &truths, MATCH_RADIUS, 25);
        assert_eq!((c.matched, c.false_positive, c.false_negative), (0, 1, 1));
    }

    #[test]
    fn debris_excluded_from_matching() {
        let truths = vec![(10.0, 10.0)];
        let dets = vec![det(10.0, 10.0, 10)];
        let c = match_detections(&dets, &truths, MATCH_RADIUS, 25);
        assert_eq!((c.matched, c.debris, c.false_negative), (0, 1, 1));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::LiOtsu, Method::Otsu, Method::MaxEntropy, Method::Yen] {
            assert_eq!(Method::from_str(m.name()).unwrap(), m);
        }
        assert!(Method::from_str("sauvola").is_err());
    }

    #[test]
    fn table_and_csv_render() {
        let rows = vec![BenchmarkRow {
            method: "li_otsu".into(),
            matched: 90,
            false_positive: 5,
            false_negative: 5,
            debris: 3,
            total_count: 95,
            empty_space_resistant: true,
            accuracy: 0.9,
        }];
        let table = format_table(&rows);
        assert!(table.contains("li_otsu"));
        assert!(table.contains("0.9000"));
        let csv = rows_csv(&rows).unwrap();
        assert!(csv.starts_with("method,matched,false_positive"));
        assert!(csv.contains("li_otsu,90,5,5,3,95,true,0.9"));
    }
}
