//! Text formats and NMS.
//!
//! All formats are comma-separated, one record per line, with `#` comment
//! lines and blank lines ignored and LF or CRLF endings accepted.
//!
//! | file        | record                                   |
//! |-------------|------------------------------------------|
//! | detections  | `frame,-1,x,y,w,h,score,class,-1`        |
//! | embeddings  | `frame,index,v1,...,vd`                  |
//! | ground truth| `frame,identity,x,y,w,h,score,class,vis` |
//! | results     | `frame,track_id,x,y,w,h,score,class,-1`  |
//!
//! `index` is the 0-based position of a detection among the detections of
//! its frame, in file order; it joins detection and embedding files.
//! Reals are written with six decimals.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::detection::{Detection, FrameInput, GtEntry, TrackOutput};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};

pub const DEFAULT_NMS_THRESH: f64 = 0.5;

/// One sequence worth of tracker input, with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBundle {
    pub name: String,
    /// Strictly increasing frame indices.
    pub frames: Vec<FrameInput>,
    pub gt: Option<Vec<GtEntry>>,
    pub fps: Option<f64>,
}

/// Embeddings keyed by `(frame, index within frame)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: Option<usize>,
    entries: BTreeMap<(u32, usize), Embedding>,
}

impl EmbeddingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, frame: u32, index: usize) -> Option<&Embedding> {
        self.entries.get(&(frame, index))
    }

    pub fn insert(&mut self, frame: u32, index: usize, embedding: Embedding) -> Result<()> {
        match self.dim {
            Some(d) if d != embedding.dim() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: embedding.dim(),
                })
            }
            _ => self.dim = Some(embedding.dim()),
        }
        self.entries.insert((frame, index), embedding);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, usize, &Embedding)> {
        self.entries.iter().map(|(&(f, i), e)| (f, i, e))
    }
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split(',').map(str::trim).collect()))
        }
    })
}

fn real(line: usize, field: &str, name: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("{name}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{name}: '{field}' is not finite")));
    }
    Ok(v)
}

/// Non-negative integer field; integral reals such as `3.0` are accepted.
fn integer(line: usize, field: &str, name: &str) -> Result<u32> {
    if let Ok(v) = field.parse::<u32>() {
        return Ok(v);
    }
    let v = real(line, field, name)?;
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
        return Err(Error::parse(line, format!("{name}: '{field}' is not a non-negative integer")));
    }
    Ok(v as u32)
}

fn positive_frame(line: usize, field: &str) -> Result<u32> {
    let frame = integer(line, field, "frame")?;
    if frame == 0 {
        return Err(Error::parse(line, "frame must be >= 1"));
    }
    Ok(frame)
}

fn bbox(line: usize, f: &[&str]) -> Result<BBox> {
    let x = real(line, f[0], "x")?;
    let y = real(line, f[1], "y")?;
    let w = real(line, f[2], "w")?;
    let h = real(line, f[3], "h")?;
    if w <= 0.0 {
        return Err(Error::parse(line, format!("w must be > 0, got {w}")));
    }
    if h <= 0.0 {
        return Err(Error::parse(line, format!("h must be > 0, got {h}")));
    }
    BBox::new(x, y, w, h).map_err(|e| Error::parse(line, e.to_string()))
}

fn score(line: usize, field: &str) -> Result<f64> {
    let s = real(line, field, "score")?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::parse(line, format!("score {s} outside [0, 1]")));
    }
    Ok(s)
}

fn expect_fields(line: usize, fields: &[&str], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::parse(
            line,
            format!("expected {n} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

/// Parses a detection file. Output is stably sorted by frame, so the
/// within-frame file order (the embedding join index) is preserved.
pub fn parse_detections(text: &str) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (line, f) in records(text) {
        expect_fields(line, &f, 9)?;
        let frame = positive_frame(line, f[0])?;
        real(line, f[1], "id")?;
        let bbox = bbox(line, &f[2..6])?;
        let score = score(line, f[6])?;
        let class_id = integer(line, f[7], "class")?;
        real(line, f[8], "visibility")?;
        out.push(Detection {
            frame,
            bbox,
            score,
            class_id,
            embedding: None,
        });
    }
    out.sort_by_key(|d| d.frame);
    Ok(out)
}

pub fn write_detections(detections: &[Detection]) -> String {
    let mut s = String::new();
    for d in detections {
        let b = &d.bbox;
        let _ = writeln!(
            s,
            "{},-1,{:.6},{:.6},{:.6},{:.6},{:.6},{},-1",
            d.frame,
            b.x(),
            b.y(),
            b.w(),
            b.h(),
            d.score,
            d.class_id
        );
    }
    s
}

/// Parses an embedding file, normalizing every vector. The dimension is
/// fixed by `expected_dim` or, if `None`, by the first record.
pub fn parse_embeddings(text: &str, expected_dim: Option<usize>) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable {
        dim: expected_dim,
        entries: BTreeMap::new(),
    };
    for (line, f) in records(text) {
        if f.len() < 4 {
            return Err(Error::parse(
                line,
                format!("expected frame, index and at least 2 values, found {} fields", f.len()),
            ));
        }
        let frame = positive_frame(line, f[0])?;
        let index = integer(line, f[1], "index")? as usize;
        let values = f[2..]
            .iter()
            .map(|v| real(line, v, "value"))
            .collect::<Result<Vec<_>>>()?;
        if let Some(d) = table.dim {
            if d != values.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: values.len(),
                });
            }
        }
        if table.entries.contains_key(&(frame, index)) {
            return Err(Error::DuplicateEntry {
                line,
                frame,
                identity: index as u32,
            });
        }
        let embedding = Embedding::new(&values)?;
        table.insert(frame, index, embedding)?;
    }
    Ok(table)
}

pub fn write_embeddings(table: &EmbeddingTable) -> String {
    let mut s = String::new();
    for (frame, index, e) in table.iter() {
        let _ = write!(s, "{frame},{index}");
        for v in e.as_slice() {
            let _ = write!(s, ",{v:.6}");
        }
        s.push('\n');
    }
    s
}

/// Joins detections (as returned by [`parse_detections`]) with their
/// embeddings, one [`FrameInput`] per frame present.
pub fn attach_embeddings(detections: &[Detection], table: &EmbeddingTable) -> Result<Vec<FrameInput>> {
    let mut frames: Vec<FrameInput> = Vec::new();
    for d in detections {
        if frames.last().is_none_or(|f| f.frame != d.frame) {
            if frames.last().is_some_and(|f| f.frame > d.frame) {
                return Err(Error::NonMonotonicFrame {
                    previous: frames.last().map_or(0, |f| f.frame),
                    got: d.frame,
                });
            }
            frames.push(FrameInput::empty(d.frame));
        }
        let current = frames.last_mut().expect("pushed above");
        let index = current.detections.len();
        let embedding = table
            .get(d.frame, index)
            .ok_or(Error::MissingEmbedding {
                frame: d.frame,
                index,
            })?
            .clone();
        current.detections.push(d.clone().with_embedding(embedding));
    }
    Ok(frames)
}

pub fn write_results(outputs: &[TrackOutput]) -> String {
    let mut s = String::new();
    for o in outputs {
        let b = &o.bbox;
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},-1",
            o.frame,
            o.track_id,
            b.x(),
            b.y(),
            b.w(),
            b.h(),
            o.score,
            o.class_id
        );
    }
    s
}

pub fn write_gt(entries: &[GtEntry]) -> String {
    let mut s = String::new();
    for g in entries {
        let b = &g.bbox;
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.6},{:.6},1,{},1",
            g.frame,
            g.identity,
            b.x(),
            b.y(),
            b.w(),
            b.h(),
            g.class_id
        );
    }
    s
}

struct IdRow {
    line: usize,
    frame: u32,
    identity: u32,
    bbox: BBox,
    score: f64,
    class_id: u32,
}

fn parse_id_rows(text: &str) -> Result<Vec<IdRow>> {
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (line, f) in records(text) {
        expect_fields(line, &f, 9)?;
        let frame = positive_frame(line, f[0])?;
        let identity = integer(line, f[1], "identity")?;
        if identity == 0 {
            return Err(Error::parse(line, "identity must be >= 1"));
        }
        let bbox = bbox(line, &f[2..6])?;
        let score = real(line, f[6], "score")?;
        let class_id = integer(line, f[7], "class")?;
        real(line, f[8], "visibility")?;
        if !seen.insert((frame, identity)) {
            return Err(Error::DuplicateEntry {
                line,
                frame,
                identity,
            });
        }
        rows.push(IdRow {
            line,
            frame,
            identity,
            bbox,
            score,
            class_id,
        });
    }
    rows.sort_by_key(|r| (r.frame, r.identity));
    Ok(rows)
}

/// Parses ground truth, sorted by `(frame, identity)`.
pub fn parse_gt(text: &str) -> Result<Vec<GtEntry>> {
    Ok(parse_id_rows(text)?
        .into_iter()
        .map(|r| GtEntry {
            frame: r.frame,
            identity: r.identity,
            bbox: r.bbox,
            class_id: r.class_id,
        })
        .collect())
}

/// Parses a results file, sorted by `(frame, track_id)`.
pub fn parse_results(text: &str) -> Result<Vec<TrackOutput>> {
    parse_id_rows(text)?
        .into_iter()
        .map(|r| {
            if !(0.0..=1.0).contains(&r.score) {
                return Err(Error::parse(r.line, format!("score {} outside [0, 1]", r.score)));
            }
            Ok(TrackOutput {
                frame: r.frame,
                track_id: r.identity,
                bbox: r.bbox,
                score: r.score,
                class_id: r.class_id,
            })
        })
        .collect()
}

/// Greedy per-class NMS over one frame. Returns the indices of kept
/// detections in descending score order; equal scores keep input order.
/// A box survives if its IoU with every kept box of its class is
/// `<= iou_thresh`.
pub fn nms_indices(detections: &[Detection], iou_thresh: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.total_cmp(&detections[a].score));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let d = &detections[i];
        let suppressed = kept.iter().any(|&k| {
            let other = &detections[k];
            other.class_id == d.class_id && iou(&other.bbox, &d.bbox) > iou_thresh
        });
        if !suppressed {
            kept.push(i);
        }
    }
    kept
}

/// Greedy per-class NMS over one frame; kept boxes in descending score.
pub fn nms(detections: &[Detection], iou_thresh: f64) -> Vec<Detection> {
    nms_indices(detections, iou_thresh)
        .into_iter()
        .map(|i| detections[i].clone())
        .collect()
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(frame: u32, x: f64, score: f64, class_id: u32) -> Detection {
        Detection::new(frame, BBox::new(x, 0.0, 10.0, 10.0).unwrap(), score, class_id).unwrap()
    }

    #[test]
    fn parses_detection_line() {
        let d = parse_detections("1,-1,10.0,20.0,30.0,40.0,0.90,1,-1\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].frame, 1);
        assert_eq!(d[0].bbox, BBox::new(10.0, 20.0, 30.0, 40.0).unwrap());
        assert_eq!(d[0].score, 0.9);
        assert_eq!(d[0].class_id, 1);
        assert!(d[0].embedding.is_none());
    }

    #[test]
    fn detection_errors_carry_line_numbers() {
        let err = parse_detections("# header\n1,-1,10,20,-5,40,0.9,1,-1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(matches!(
            parse_detections("1,-1,10,20,5,0,0.9,1,-1").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(parse_detections("1,-1,10,20,5,5,1.5,1,-1").is_err());
        assert!(parse_detections("1,-1,10,20,5,5,0.5,1").is_err());
        assert!(parse_detections("1,-1,ten,20,5,5,0.5,1,-1").is_err());
        assert!(parse_detections("0,-1,10,20,5,5,0.5,1,-1").is_err());
    }

    #[test]
    fn crlf_comments_and_blank_lines() {
        let text = "# c\r\n\r\n2,-1,0,0,1,1,0.5,0,-1\r\n1,-1,0,0,1,1,0.6,0,-1\r\n";
        let d = parse_detections(text).unwrap();
        assert_eq!(d.iter().map(|d| d.frame).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn embeddings_normalized_and_dimension_checked() {
        let t = parse_embeddings("1,0,3.0,4.0\n", None).unwrap();
        let e = t.get(1, 0).unwrap();
        assert!((e.as_slice()[0] - 0.6).abs() < 1e-15 && (e.as_slice()[1] - 0.8).abs() < 1e-15);
        assert_eq!(t.dim(), Some(2));
        assert!(matches!(
            parse_embeddings("1,0,1,0\n1,1,1,0,0\n", None),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        assert!(matches!(
            parse_embeddings("1,0,1,0\n", Some(3)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(parse_embeddings("1,0,0,0\n", None), Err(Error::ZeroNorm)));
        assert!(matches!(
            parse_embeddings("1,0,1,0\n1,0,0,1\n", None),
            Err(Error::DuplicateEntry { line: 2, .. })
        ));
    }

    #[test]
    fn attach_requires_full_cover() {
        let dets = parse_detections("1,-1,0,0,1,1,0.9,0,-1\n1,-1,5,5,1,1,0.9,0,-1\n2,-1,0,0,1,1,0.9,0,-1\n").unwrap();
        let full = parse_embeddings("1,0,1,0\n1,1,0,1\n2,0,1,1\n", None).unwrap();
        let frames = attach_embeddings(&dets, &full).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].detections.len(), 2);
        assert_eq!(frames[0].detections[1].embedding.as_ref().unwrap().as_slice(), &[0.0, 1.0]);

        let partial = parse_embeddings("1,0,1,0\n2,0,1,1\n", None).unwrap();
        assert!(matches!(
            attach_embeddings(&dets, &partial),
            Err(Error::MissingEmbedding { frame: 1, index: 1 })
        ));
        assert!(attach_embeddings(&[], &partial).unwrap().is_empty());
    }

    #[test]
    fn gt_parsing() {
        let g = parse_gt("2,1,0,0,10,10,1,1,1\n1,3,0,0,10,10,1,1,1\n1,2,0,0,10,10,1,1,1\n").unwrap();
        let keys: Vec<_> = g.iter().map(|e| (e.frame, e.identity)).collect();
        assert_eq!(keys, vec![(1, 2), (1, 3), (2, 1)]);
        assert!(matches!(
            parse_gt("1,1,0,0,10,10,1,1,1\n1,1,5,5,10,10,1,1,1\n"),
            Err(Error::DuplicateEntry { line: 2, frame: 1, identity: 1 })
        ));
        assert!(parse_gt("1,0,0,0,10,10,1,1,1\n").is_err());
    }

    #[test]
    fn results_round_trip_and_empty() {
        assert_eq!(write_results(&[]), "");
        let out = vec![
            TrackOutput { frame: 1, track_id: 1, bbox: BBox::new(1.5, 2.0, 3.0, 4.0).unwrap(), score: 0.9, class_id: 2 },
            TrackOutput { frame: 1, track_id: 4, bbox: BBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), score: 0.5, class_id: 2 },
            TrackOutput { frame: 3, track_id: 2, bbox: BBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), score: 0.25, class_id: 0 },
        ];
        let text = write_results(&out);
        assert!(text.starts_with("1,1,1.500000,2.000000,3.000000,4.000000,0.900000,2,-1\n"));
        assert_eq!(parse_results(&text).unwrap(), out);
        let gt = parse_gt(&text).unwrap();
        assert_eq!(gt.iter().map(|g| g.identity).collect::<Vec<_>>(), vec![1, 4, 2]);
    }

    #[test]
    fn nms_examples() {
        let same = vec![det(1, 0.0, 0.8, 0), det(1, 0.0, 0.9, 0)];
        assert_eq!(nms_indices(&same, 0.5), vec![1]);

        let disjoint = vec![det(1, 0.0, 0.5, 0), det(1, 20.0, 0.9, 0), det(1, 40.0, 0.7, 0)];
        assert_eq!(nms_indices(&disjoint, 0.5), vec![1, 2, 0]);

        // other classes never suppress each other
        let classes = vec![det(1, 0.0, 0.9, 0), det(1, 0.0, 0.8, 1)];
        assert_eq!(nms(&classes, 0.5).len(), 2);

        // duplicates at thresh 1.0 have IoU exactly 1.0, which is kept
        assert_eq!(nms_indices(&same, 1.0).len(), 2);
    }

    #[test]
    fn nms_chain() {
        // 10x10 boxes shifted by 2.5 along x overlap with IoU 7.5/12.5 = 0.6.
        // A and C cannot both reach 0.6 with B and stay disjoint; at a
        // 5.0 shift they overlap with IoU 1/3, still under the threshold.
        let a = det(1, 0.0, 0.9, 0);
        let b = det(1, 2.5, 0.8, 0);
        let c = det(1, 5.0, 0.7, 0);
        assert!((iou(&a.bbox, &b.bbox) - 0.6).abs() < 1e-12);
        assert!((iou(&b.bbox, &c.bbox) - 0.6).abs() < 1e-12);
        assert!((iou(&a.bbox, &c.bbox) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(nms_indices(&[a, b, c], 0.5), vec![0, 2]);
    }
}
