//! Plant speaker blobs in a heatmap and run the single-speaker gate on it.

use castline::exemplar::{detect_peaks, single_speaker_gate};
use castline::synth::plant_heatmap;
use castline::PipelineConfig;
use rand::SeedableRng;

type Blobs = &'static [(usize, usize, f64)];

fn main() {
    let cfg = PipelineConfig::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let cases: [(&str, Blobs); 3] =
        [("one speaker", &[(4, 7, 0.95)]), ("two speakers", &[(2, 2, 0.9), (9, 9, 0.85)]), ("nobody", &[])];
    for (name, planted) in cases {
        let grid = plant_heatmap(12, 12, planted, 0.3, &mut rng);
        let radius = cfg.nms_radius_for(grid.rows(), grid.cols());
        let peaks = detect_peaks(&grid, cfg.tau_det, cfg.peak_count, radius);
        let found: Vec<String> = peaks.peaks.iter().map(|p| format!("({},{})={:.2}", p.row, p.col, p.value)).collect();
        println!(
            "{name:<13} peaks [{}] -> gate {}",
            found.join(" "),
            if single_speaker_gate(&peaks) { "pass" } else { "reject" }
        );
    }
}
