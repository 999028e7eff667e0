//! Stage one on a noisy synthetic series: the yield table and how many of
//! the mined exemplars carry the right label.

use std::collections::BTreeMap;

use castline::exemplar::build_exemplars;
use castline::report::{exemplar_table, yield_table};
use castline::synth::{generate, SynthConfig};

fn main() -> castline::Result<()> {
    let cfg = SynthConfig::noisy(3);
    let corpus = generate(&cfg)?;
    let pc = cfg.pipeline_config();
    let set = build_exemplars(&corpus.episodes(&pc), &corpus.cast, &pc)?;

    print!("{}", yield_table(&set.stage_yield));
    println!();

    let mut rows: BTreeMap<_, (usize, usize)> = BTreeMap::new();
    for r in &set.exemplars {
        let row = rows.entry(r.character.clone()).or_default();
        row.0 += 1;
        row.1 += usize::from(corpus.true_speaker(&r.episode_id, r.segment_id) == Some(&r.character));
    }
    print!("{}", exemplar_table(&rows));
    Ok(())
}
