//! Audio-visual speaker gate: segment-averaged localisation heatmaps, peak
//! detection by maximum filtering plus greedy non-maximum suppression.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::types::{Grid, HeatmapFrame, Peak, PeakSet, SpeechSegment};

/// Frames whose timestamp lies in the closed interval `[start, end]`.
/// `frames` must be sorted by timestamp.
pub fn frames_in<'a>(frames: &'a [HeatmapFrame], segment: &SpeechSegment) -> &'a [HeatmapFrame] {
    let lo = frames.partition_point(|f| f.timestamp < segment.start);
    let hi = frames.partition_point(|f| f.timestamp <= segment.end);
    &frames[lo..hi.max(lo)]
}

/// Element-wise mean of the frames inside the segment.
///
/// Returns `Ok(None)` when no frame falls inside the segment; such segments
/// cannot be exemplars.
pub fn average_heatmap(frames: &[HeatmapFrame], segment: &SpeechSegment) -> Result<Option<Grid>> {
    let inside = frames_in(frames, segment);
    let Some(first) = inside.first() else {
        return Ok(None);
    };
    let (rows, cols) = (first.grid.rows(), first.grid.cols());
    let mut sum = vec![0.0; rows * cols];
    for frame in inside {
        if (frame.grid.rows(), frame.grid.cols()) != (rows, cols) {
            return Err(Error::Invalid(format!(
                "heatmap at t={} is {}x{}, expected {rows}x{cols}",
                frame.timestamp,
                frame.grid.rows(),
                frame.grid.cols()
            )));
        }
        for (acc, v) in sum.iter_mut().zip(frame.grid.values()) {
            *acc += v;
        }
    }
    let n = inside.len() as f64;
    // Clamp guards the [0, 1] invariant against rounding in the division.
    let mean = sum.into_iter().map(|s| (s / n).clamp(0.0, 1.0)).collect();
    Grid::new(rows, cols, mean).map(Some)
}

/// Sliding maximum over a `(2r+1)`-wide window along one axis, clipped at borders.
fn sliding_max(values: &[f64], rows: usize, cols: usize, radius: usize, along_rows: bool) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for r in 0..rows {
        for c in 0..cols {
            let (pos, len) = if along_rows { (c, cols) } else { (r, rows) };
            let lo = pos.saturating_sub(radius);
            let hi = (pos + radius).min(len - 1);
            let mut m = f64::NEG_INFINITY;
            for p in lo..=hi {
                let v = if along_rows { values[r * cols + p] } else { values[p * cols + c] };
                m = m.max(v);
            }
            out[r * cols + c] = m;
        }
    }
    out
}

/// True when no cell that precedes `(row, col)` in row-major order within its
/// window shares the window maximum `value`.
fn first_in_window(grid: &Grid, row: usize, col: usize, radius: usize, value: f64) -> bool {
    let r0 = row.saturating_sub(radius);
    let c0 = col.saturating_sub(radius);
    let c1 = (col + radius).min(grid.cols() - 1);
    for r in r0..=row {
        let c_end = if r == row { col } else { c1 + 1 };
        for c in c0..c_end {
            if grid.get(r, c) == value {
                return false;
            }
        }
    }
    true
}

/// Detects speaker peaks in an averaged heatmap.
///
/// Candidates are cells equal to their window maximum (ties resolved to the
/// first cell in row-major order). They are visited in descending value
/// order, ties by position, and accepted unless within Chebyshev distance
/// `nms_radius` of an already accepted peak. At most `peak_count` are
/// accepted; of those, only values strictly above `tau_det` are returned.
pub fn detect_peaks(grid: &Grid, tau_det: f64, peak_count: usize, nms_radius: usize) -> PeakSet {
    let (rows, cols) = (grid.rows(), grid.cols());
    let row_max = sliding_max(grid.values(), rows, cols, nms_radius, true);
    let window_max = sliding_max(&row_max, rows, cols, nms_radius, false);

    let mut candidates: Vec<Peak> = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = grid.get(r, c);
            if v == window_max[r * cols + c] && first_in_window(grid, r, c, nms_radius, v) {
                candidates.push(Peak { row: r, col: c, value: v });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.value.partial_cmp(&a.value).unwrap_or(Ordering::Equal).then((a.row, a.col).cmp(&(b.row, b.col)))
    });

    let mut accepted: Vec<Peak> = Vec::new();
    for cand in candidates {
        if accepted.len() == peak_count {
            break;
        }
        let suppressed = accepted.iter().any(|p| p.row.abs_diff(cand.row).max(p.col.abs_diff(cand.col)) <= nms_radius);
        if !suppressed {
            accepted.push(cand);
        }
    }
    accepted.retain(|p| p.value > tau_det);
    PeakSet { peaks: accepted }
}

/// A segment passes only when exactly one speaker peak is visible.
pub fn single_speaker_gate(peaks: &PeakSet) -> bool {
    peaks.len() == 1
}
