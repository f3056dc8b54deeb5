//! CLEAR-MOT and identity (IDF1) metrics for one sequence.
//!
//! MOTP follows the distance convention: mean `1 - IoU` over matched
//! pairs, so lower is better.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::assign::{solve_assignment, CostMatrix, FORBIDDEN};
use crate::detection::{GtEntry, TrackOutput};
use crate::error::{Error, Result};
use crate::geometry::iou;

pub const DEFAULT_IOU_GATE: f64 = 0.5;

/// Per-frame CLEAR-MOT counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameTally {
    pub frame: u32,
    pub matches: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub id_switches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearMot {
    pub mota: f64,
    pub motp: f64,
    pub false_pos: usize,
    pub false_neg: usize,
    pub id_switches: usize,
    pub matches: usize,
    pub num_gt: usize,
    pub frames: Vec<FrameTally>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdScores {
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mota: f64,
    pub motp: f64,
    pub false_pos: usize,
    pub false_neg: usize,
    pub id_switches: usize,
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub num_gt: usize,
    pub num_pred: usize,
}

fn check_gate(iou_gate: f64) -> Result<()> {
    if iou_gate > 0.0 && iou_gate <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "iou gate {iou_gate} outside (0, 1]"
        )))
    }
}

type ByFrame<'a, T> = BTreeMap<u32, Vec<&'a T>>;

fn group<'a, T>(items: &'a [T], frame_of: impl Fn(&T) -> u32) -> ByFrame<'a, T> {
    let mut map: ByFrame<'a, T> = BTreeMap::new();
    for item in items {
        map.entry(frame_of(item)).or_default().push(item);
    }
    map
}

/// Frame-by-frame CLEAR-MOT matching.
///
/// Within a frame, the matching has maximum cardinality at the IoU gate.
/// Among such matchings it keeps as many of the previous ground-truth to
/// track pairings as possible, then minimises total `1 - IoU`. A matched
/// ground-truth identity whose track differs from its last pairing counts
/// as one identity switch.
pub fn clear_mot(gt: &[GtEntry], pred: &[TrackOutput], iou_gate: f64) -> Result<ClearMot> {
    check_gate(iou_gate)?;
    if gt.is_empty() {
        return Err(Error::EmptyGt);
    }
    let gt_frames = group(gt, |g| g.frame);
    let pred_frames = group(pred, |p| p.frame);
    let frames: BTreeSet<u32> = gt_frames.keys().chain(pred_frames.keys()).copied().collect();

    let mut last_pair: HashMap<u32, u32> = HashMap::new();
    let mut tallies = Vec::with_capacity(frames.len());
    let mut distance_sum = 0.0;
    let empty_gt = Vec::new();
    let empty_pred = Vec::new();

    for frame in frames {
        let gts = gt_frames.get(&frame).unwrap_or(&empty_gt);
        let preds = pred_frames.get(&frame).unwrap_or(&empty_pred);

        // A persistent pair outweighs any achievable sum of distances.
        let persist_bonus = 2.0 * (gts.len().min(preds.len()) as f64 + 1.0);
        let overlaps: Vec<Vec<f64>> = gts
            .iter()
            .map(|g| preds.iter().map(|p| iou(&g.bbox, &p.bbox)).collect())
            .collect();
        let costs = CostMatrix::from_fn(gts.len(), preds.len(), |i, j| {
            let overlap = overlaps[i][j];
            if overlap < iou_gate {
                return FORBIDDEN;
            }
            let persistent = last_pair.get(&gts[i].identity) == Some(&preds[j].track_id);
            let distance = 1.0 - overlap;
            if persistent {
                distance
            } else {
                distance + persist_bonus
            }
        });
        let result = solve_assignment(&costs);

        let mut tally = FrameTally {
            frame,
            matches: result.matches.len(),
            false_pos: result.unmatched_cols.len(),
            false_neg: result.unmatched_rows.len(),
            id_switches: 0,
        };
        for &(i, j) in &result.matches {
            let identity = gts[i].identity;
            let track = preds[j].track_id;
            if let Some(prev) = last_pair.insert(identity, track) {
                if prev != track {
                    tally.id_switches += 1;
                }
            }
            distance_sum += 1.0 - overlaps[i][j];
        }
        tallies.push(tally);
    }

    let false_pos = tallies.iter().map(|t| t.false_pos).sum();
    let false_neg = tallies.iter().map(|t| t.false_neg).sum();
    let id_switches = tallies.iter().map(|t| t.id_switches).sum();
    let matches: usize = tallies.iter().map(|t| t.matches).sum();
    let num_gt = gt.len();
    Ok(ClearMot {
        mota: 1.0 - (false_pos + false_neg + id_switches) as f64 / num_gt as f64,
        motp: if matches > 0 {
            distance_sum / matches as f64
        } else {
            0.0
        },
        false_pos,
        false_neg,
        id_switches,
        matches,
        num_gt,
        frames: tallies,
    })
}

/// Identity precision, recall and F1 under the best global one-to-one
/// mapping between ground-truth identities and track ids.
pub fn idf1(gt: &[GtEntry], pred: &[TrackOutput], iou_gate: f64) -> Result<IdScores> {
    check_gate(iou_gate)?;
    if gt.is_empty() {
        return Err(Error::EmptyGt);
    }
    let gt_ids: Vec<u32> = gt.iter().map(|g| g.identity).collect::<BTreeSet<_>>().into_iter().collect();
    let pred_ids: Vec<u32> = pred.iter().map(|p| p.track_id).collect::<BTreeSet<_>>().into_iter().collect();
    let gt_index: HashMap<u32, usize> = gt_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let pred_index: HashMap<u32, usize> = pred_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut overlap_frames = vec![vec![0usize; pred_ids.len()]; gt_ids.len()];
    let pred_frames = group(pred, |p| p.frame);
    for g in gt {
        if let Some(preds) = pred_frames.get(&g.frame) {
            for p in preds {
                if iou(&g.bbox, &p.bbox) >= iou_gate {
                    overlap_frames[gt_index[&g.identity]][pred_index[&p.track_id]] += 1;
                }
            }
        }
    }

    // min-cost form of max-weight: every assignment has min(rows, cols) pairs
    let max_weight = overlap_frames.iter().flatten().copied().max().unwrap_or(0) as f64;
    let costs = CostMatrix::from_fn(gt_ids.len(), pred_ids.len(), |i, j| {
        max_weight - overlap_frames[i][j] as f64
    });
    let result = solve_assignment(&costs);
    let idtp: usize = result.matches.iter().map(|&(i, j)| overlap_frames[i][j]).sum();

    let idfp = pred.len() - idtp;
    let idfn = gt.len() - idtp;
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(IdScores {
        idf1: ratio(2 * idtp, 2 * idtp + idfp + idfn),
        idp: ratio(idtp, pred.len()),
        idr: ratio(idtp, gt.len()),
        idtp,
        idfp,
        idfn,
    })
}

pub fn evaluate(gt: &[GtEntry], pred: &[TrackOutput], iou_gate: f64) -> Result<EvalReport> {
    let clear = clear_mot(gt, pred, iou_gate)?;
    let id = idf1(gt, pred, iou_gate)?;
    Ok(EvalReport {
        mota: clear.mota,
        motp: clear.motp,
        false_pos: clear.false_pos,
        false_neg: clear.false_neg,
        id_switches: clear.id_switches,
        idf1: id.idf1,
        idp: id.idp,
        idr: id.idr,
        num_gt: clear.num_gt,
        num_pred: pred.len(),
    })
}
