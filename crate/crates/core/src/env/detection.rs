//! IoU-based detection accuracy.

use crate::error::{LabError, Result};

/// Axis-aligned box `[x0, y0, x1, y1]` with `x1 > x0`, `y1 > y0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(LabError::domain(format!("degenerate box [{x0}, {y0}, {x1}, {y1}]")));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let iw = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let ih = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        let inter = iw * ih;
        inter / (self.area() + other.area() - inter)
    }
}

/// Predicted box with its confidence score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredBox {
    pub bbox: BoundingBox,
    pub confidence: f64,
}

/// Sum of predicted confidences.
pub fn cumulative_confidence(pred: &[ScoredBox]) -> f64 {
    pred.iter().map(|p| p.confidence).sum()
}

/// Fraction of ground-truth boxes whose best IoU against any prediction reaches `threshold`.
pub fn detection_accuracy(pred: &[ScoredBox], gt: &[BoundingBox], threshold: f64) -> Result<f64> {
    if gt.is_empty() {
        return Err(LabError::domain("accuracy undefined for an empty ground-truth set"));
    }
    let hits = gt
        .iter()
        .filter(|g| {
            pred.iter()
                .map(|p| g.iou(&p.bbox))
                .fold(0.0, f64::max)
                >= threshold
        })
        .count();
    Ok(hits as f64 / gt.len() as f64)
}
