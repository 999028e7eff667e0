//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//! Set `CASTLINE_BLESS=1` to rewrite the subtitle golden files.

#![allow(clippy::type_complexity)]

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use castline::align::{dtw_align, normalize_word, Move};
use castline::assign::{
    assignable_segments, build_centroids, sweep_thresholds, EpisodeScores, ScoredSpan, SegmentClass,
};
use castline::exemplar::{build_exemplars, detect_peaks, episode_candidates, knn_filter, StageYield};
use castline::metrics::{accuracy_on_overlap, der, der_breakdown, per_character_pr, wer, DerOptions};
use castline::subtitle::{emit_subtitles, parse_subtitles, Cue, SubtitleFormat};
use castline::synth::{generate, inject_mislabels, SynthConfig};
use castline::types::{CharacterId, Grid, GtSegment, HypSegment, Label, Peak, WordToken};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("end-to-end-easy", end_to_end_easy),
        ("yield-monotone", yield_monotone),
        ("exemplar-precision-under-mislabels", mislabel_precision),
        ("dtw-oracle", dtw_oracle),
        ("peak-oracle", peak_oracle),
        ("metric-fixtures", metric_fixtures),
        ("pocs-curves", pocs_curves),
        ("subtitle-round-trip", subtitle_round_trip),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

// ---------------------------------------------------------------- binary

fn castline(args: &[&str]) -> std::result::Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_castline")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("castline {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn end_to_end_easy() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("corpus");
    let out = dir.path().join("out");
    let t0 = Instant::now();
    castline(&["synth", "--preset", "easy", "--seed", "11", "--out", p(&corpus)])?;
    let config = corpus.join("series.toml");
    castline(&["--config", p(&config), "run", "--out", p(&out)])?;
    let secs = t0.elapsed().as_secs_f64();

    let text = std::fs::read_to_string(out.join("metrics.json")).map_err(|e| e.to_string())?;
    let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let num = |k: &str| m[k].as_f64().ok_or_else(|| format!("metrics.json lacks {k}"));
    let (acc, der, ppc, rpc) = (num("accuracy")?, num("der")?, num("ppc")?, num("rpc")?);
    ensure!(acc >= 99.0, "accuracy {acc}");
    ensure!(der <= 2.0, "DER {der}");
    ensure!(ppc >= 0.99 && rpc >= 0.99, "Ppc {ppc} Rpc {rpc}");
    ensure!(secs < 30.0, "took {secs:.1}s");
    Ok(format!("acc {acc:.1}% DER {der:.2}% Ppc {ppc:.3} Rpc {rpc:.3} in {secs:.1}s"))
}

// ---------------------------------------------------------------- yield

fn stage_yield(cfg: &SynthConfig) -> std::result::Result<StageYield, String> {
    let corpus = generate(cfg).map_err(|e| e.to_string())?;
    let pc = cfg.pipeline_config();
    let set = build_exemplars(&corpus.episodes(&pc), &corpus.cast, &pc).map_err(|e| e.to_string())?;
    Ok(set.stage_yield)
}

fn yield_monotone() -> Check {
    let mut corpora: Vec<(String, SynthConfig)> = Vec::new();
    for seed in 0..3 {
        corpora.push((format!("easy/{seed}"), SynthConfig::easy(seed)));
    }
    for seed in 0..5 {
        corpora.push((format!("noisy/{seed}"), SynthConfig::noisy(seed)));
    }
    let mut crowded = SynthConfig::noisy(1);
    crowded.multi_speaker_fraction = 1.0;
    crowded.offscreen_fraction = 0.0;
    corpora.push(("all-multi-speaker".into(), crowded));
    let mut laughing = SynthConfig::easy(2);
    laughing.laughter_fraction = 0.6;
    corpora.push(("heavy-laughter".into(), laughing));

    for (name, cfg) in &corpora {
        let y = stage_yield(cfg)?;
        let seq = [y.detected, y.vad, y.av_gate, y.visual, y.audio_filter];
        ensure!(seq.windows(2).all(|w| w[1] <= w[0]), "{name}: {seq:?}");
        ensure!(y.check_monotone().is_ok(), "{name}: check_monotone rejected {seq:?}");
        if name == "all-multi-speaker" {
            ensure!(y.av_gate == 0, "multi-speaker corpus kept {} at the AV gate", y.av_gate);
        }
        if name == "heavy-laughter" {
            ensure!(y.vad < y.detected, "laughter removed nothing");
        }
    }
    let bad = StageYield { detected: 10, vad: 9, av_gate: 5, visual: 6, audio_filter: 2 };
    ensure!(bad.check_monotone().is_err(), "a rising visual count was accepted");
    Ok(format!("{} corpora non-increasing; a rising count is rejected", corpora.len()))
}

// ---------------------------------------------------------------- mislabels

fn mislabel_precision() -> Check {
    let mut accs = Vec::new();
    for seed in 0..10u64 {
        let cfg = SynthConfig::noisy(seed);
        let corpus = generate(&cfg).map_err(|e| e.to_string())?;
        let pc = cfg.pipeline_config();
        let mut pooled = Vec::new();
        for ep in corpus.episodes(&pc) {
            pooled.extend(episode_candidates(&ep, &corpus.cast, &pc).map_err(|e| e.to_string())?.0);
        }
        let ids: Vec<CharacterId> = corpus.cast.iter().map(|c| c.id.clone()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let flipped = inject_mislabels(&mut pooled, 0.05, &ids, &mut rng);
        ensure!(!flipped.is_empty(), "seed {seed}: nothing injected");
        let kept = knn_filter(&pooled, pc.knn_k).map_err(|e| e.to_string())?;
        ensure!(!kept.is_empty(), "seed {seed}: filter removed everything");
        let correct =
            kept.iter().filter(|r| corpus.true_speaker(&r.episode_id, r.segment_id) == Some(&r.character)).count();
        let acc = 100.0 * correct as f64 / kept.len() as f64;
        ensure!(acc >= 97.0, "seed {seed}: accuracy {acc:.2}%");
        accs.push(acc);
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let min = accs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("10 seeds, min {min:.2}% mean {mean:.2}% (each >= 97%)"))
}

// ---------------------------------------------------------------- DTW

/// Exhaustive search over monotone paths, pruned only by a lower bound.
fn brute_dtw(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], i: usize, j: usize, cost: usize, best: &mut usize) {
        if i == a.len() && j == b.len() {
            *best = (*best).min(cost);
            return;
        }
        if cost + (a.len() - i).abs_diff(b.len() - j) >= *best {
            return;
        }
        if i < a.len() && j < b.len() {
            go(a, b, i + 1, j + 1, cost + usize::from(a[i] != b[j]), best);
        }
        if i < a.len() {
            go(a, b, i + 1, j, cost + 1, best);
        }
        if j < b.len() {
            go(a, b, i, j + 1, cost + 1, best);
        }
    }
    let mut best = a.len() + b.len() + 1;
    go(a, b, 0, 0, 0, &mut best);
    best
}

fn path_cost(path: &[Move], a: &[String], b: &[String]) -> Option<usize> {
    let (mut i, mut j, mut cost) = (0, 0, 0);
    for mv in path {
        match mv {
            Move::Diagonal => {
                cost += usize::from(a.get(i)? != b.get(j)?);
                i += 1;
                j += 1;
            }
            Move::TranscriptSkip => {
                a.get(i)?;
                i += 1;
                cost += 1;
            }
            Move::TimedSkip => {
                b.get(j)?;
                j += 1;
                cost += 1;
            }
        }
    }
    (i == a.len() && j == b.len()).then_some(cost)
}

fn dtw_oracle() -> Check {
    let vocab = ["the", "cat", "sat", "on", "mat", "Dr.", "hi!"];
    let speakers = [CharacterId::new("amy"), CharacterId::new("ben")];
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for case in 0..1000 {
        let m = rng.gen_range(1..=10);
        let n = rng.gen_range(1..=10);
        let transcript: Vec<(String, CharacterId)> = (0..m)
            .map(|_| (vocab.choose(&mut rng).unwrap().to_string(), speakers.choose(&mut rng).unwrap().clone()))
            .collect();
        let timed: Vec<WordToken> =
            (0..n).map(|k| WordToken::new(*vocab.choose(&mut rng).unwrap(), k as f64, k as f64 + 0.5)).collect();
        let a: Vec<String> = transcript.iter().map(|(w, _)| normalize_word(w)).collect();
        let b: Vec<String> = timed.iter().map(|w| normalize_word(&w.text)).collect();

        let got = dtw_align(&transcript, &timed).map_err(|e| e.to_string())?;
        let want = brute_dtw(&a, &b);
        ensure!(got.cost == want, "case {case}: cost {} vs oracle {want}", got.cost);
        ensure!(path_cost(&got.path, &a, &b) == Some(want), "case {case}: returned path is invalid or not minimal");
        ensure!(got.words.len() == n, "case {case}: {} labels for {n} timed words", got.words.len());
    }
    Ok("1000 instances, cost and path match the exhaustive oracle".into())
}

// ---------------------------------------------------------------- peaks

fn brute_peaks(g: &[Vec<f64>], tau: f64, count: usize, r: usize) -> Vec<(usize, usize, f64)> {
    let (rows, cols) = (g.len(), g[0].len());
    let window = |i: usize, j: usize| {
        let rr = i.saturating_sub(r)..=(i + r).min(rows - 1);
        rr.flat_map(move |y| (j.saturating_sub(r)..=(j + r).min(cols - 1)).map(move |x| (y, x)))
    };
    let mut cands = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = g[i][j];
            let dominated = window(i, j).any(|(y, x)| g[y][x] > v || (g[y][x] == v && (y, x) < (i, j)));
            if !dominated {
                cands.push((i, j, v));
            }
        }
    }
    cands.sort_by(|p, q| q.2.total_cmp(&p.2).then((p.0, p.1).cmp(&(q.0, q.1))));
    let mut kept: Vec<(usize, usize, f64)> = Vec::new();
    for c in cands {
        if kept.len() == count {
            break;
        }
        if kept.iter().all(|k| k.0.abs_diff(c.0).max(k.1.abs_diff(c.1)) > r) {
            kept.push(c);
        }
    }
    kept.retain(|k| k.2 > tau);
    kept
}

fn peak_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut nonempty = 0;
    for case in 0..1000 {
        let rows = rng.gen_range(1..=8);
        let cols = rng.gen_range(1..=8);
        // Coarse levels force plenty of ties.
        let levels = [4.0, 10.0, 1000.0][case % 3];
        let g: Vec<Vec<f64>> =
            (0..rows).map(|_| (0..cols).map(|_| (rng.gen::<f64>() * levels).round() / levels).collect()).collect();
        let tau = [0.0, 0.5, 0.7, rng.gen::<f64>()][case % 4];
        let count = rng.gen_range(1..=4);
        let r = rng.gen_range(0..=3);

        let grid = Grid::new(rows, cols, g.concat()).map_err(|e| e.to_string())?;
        let got: Vec<(usize, usize, f64)> = detect_peaks(&grid, tau, count, r)
            .peaks
            .iter()
            .map(|&Peak { row, col, value }| (row, col, value))
            .collect();
        let want = brute_peaks(&g, tau, count, r);
        ensure!(got == want, "case {case} ({rows}x{cols}, r={r}, k={count}, tau={tau}): {got:?} vs {want:?}");
        nonempty += usize::from(!want.is_empty());
    }
    Ok(format!("1000 grids equal the oracle ({nonempty} with peaks)"))
}

// ---------------------------------------------------------------- metrics

fn gt(s: f64, e: f64, who: &str) -> GtSegment {
    GtSegment { start: s, end: e, speaker: CharacterId::new(who), text: String::new() }
}

fn hy(s: f64, e: f64, who: &str) -> HypSegment {
    HypSegment { start: s, end: e, label: Label::parse(who) }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn metric_fixtures() -> Check {
    let plain = DerOptions::new(0.0, true);
    let no_overlap = DerOptions::new(0.0, false);
    let as_miss = DerOptions { unknown_as_miss: true, ..plain };
    let der_cases: Vec<(&str, Vec<GtSegment>, Vec<HypSegment>, DerOptions, f64)> = vec![
        ("perfect", vec![gt(0.0, 10.0, "a")], vec![hy(0.0, 10.0, "a")], plain, 0.0),
        ("full confusion", vec![gt(0.0, 10.0, "a")], vec![hy(0.0, 10.0, "b")], plain, 1.0),
        ("half missed", vec![gt(0.0, 10.0, "a")], vec![hy(0.0, 5.0, "a")], plain, 0.5),
        ("no hypothesis", vec![gt(0.0, 10.0, "a")], vec![], plain, 1.0),
        ("false alarm", vec![gt(0.0, 10.0, "a")], vec![hy(0.0, 10.0, "a"), hy(10.0, 15.0, "a")], plain, 0.5),
        ("unknown is confusion", vec![gt(0.0, 4.0, "a")], vec![hy(0.0, 4.0, "UNKNOWN")], plain, 1.0),
        ("unknown as miss", vec![gt(0.0, 4.0, "a")], vec![hy(0.0, 2.0, "UNKNOWN")], as_miss, 1.0),
        ("overlap scored", vec![gt(0.0, 10.0, "a"), gt(5.0, 10.0, "b")], vec![hy(0.0, 10.0, "a")], plain, 5.0 / 15.0),
        ("overlap skipped", vec![gt(0.0, 10.0, "a"), gt(5.0, 10.0, "b")], vec![hy(0.0, 10.0, "a")], no_overlap, 0.0),
        ("collar", vec![gt(0.0, 10.0, "a")], vec![hy(1.0, 10.0, "a")], DerOptions::new(0.5, true), 0.5 / 9.0),
        (
            "collar on reference only",
            vec![gt(0.0, 10.0, "a")],
            vec![hy(0.0, 4.0, "a"), hy(4.0, 10.0, "b")],
            DerOptions::new(0.25, true),
            5.75 / 9.5,
        ),
        (
            "shifted turn",
            vec![gt(0.0, 4.0, "a"), gt(4.0, 10.0, "b")],
            vec![hy(0.0, 6.0, "a"), hy(6.0, 10.0, "b")],
            plain,
            0.2,
        ),
        (
            "two hypotheses, one speaker",
            vec![gt(0.0, 10.0, "a")],
            vec![hy(0.0, 10.0, "a"), hy(0.0, 10.0, "b")],
            plain,
            1.0,
        ),
    ];
    for (name, r, h, opt, want) in &der_cases {
        let got = der(r, h, *opt).map_err(|e| format!("der {name}: {e}"))?;
        ensure!(close(got, *want), "der {name}: {got} vs {want}");
    }
    let b = der_breakdown(&[gt(0.0, 4.0, "a")], &[hy(0.0, 4.0, "UNKNOWN")], plain).map_err(|e| e.to_string())?;
    ensure!(close(b.confusion, 4.0) && b.missed == 0.0, "UNKNOWN breakdown {b:?}");
    ensure!(der(&[], &[hy(0.0, 1.0, "a")], plain).is_err(), "DER without reference speech is defined");

    let acc_cases: Vec<(&str, Vec<GtSegment>, Vec<HypSegment>, f64)> = vec![
        ("correct", vec![gt(0.0, 2.0, "a")], vec![hy(0.0, 2.0, "a")], 1.0),
        ("wrong", vec![gt(0.0, 2.0, "a")], vec![hy(0.0, 2.0, "b")], 0.0),
        ("unknown is wrong", vec![gt(0.0, 2.0, "a")], vec![hy(0.0, 2.0, "UNKNOWN")], 0.0),
        ("largest overlap wins", vec![gt(0.0, 1.0, "a"), gt(1.0, 3.0, "b")], vec![hy(0.0, 3.0, "a")], 0.0),
        ("tie goes to earlier", vec![gt(0.0, 2.0, "a"), gt(2.0, 4.0, "b")], vec![hy(1.0, 3.0, "a")], 1.0),
        (
            "three of four",
            vec![gt(0.0, 1.0, "a"), gt(1.0, 2.0, "b"), gt(2.0, 3.0, "a"), gt(3.0, 4.0, "b")],
            vec![hy(0.0, 1.0, "a"), hy(1.0, 2.0, "b"), hy(2.0, 3.0, "a"), hy(3.0, 4.0, "a")],
            0.75,
        ),
        ("touching is not overlap", vec![gt(0.0, 2.0, "a")], vec![hy(2.0, 3.0, "a"), hy(0.0, 1.0, "b")], 0.0),
        ("outside reference ignored", vec![gt(0.0, 2.0, "a")], vec![hy(0.0, 2.0, "a"), hy(10.0, 11.0, "b")], 1.0),
        (
            "one in three",
            vec![gt(0.0, 2.0, "a"), gt(2.0, 4.0, "b"), gt(4.0, 6.0, "c")],
            vec![hy(0.0, 2.0, "a"), hy(2.0, 4.0, "UNKNOWN"), hy(4.0, 6.0, "a")],
            1.0 / 3.0,
        ),
        ("partial overlap counts", vec![gt(0.0, 2.0, "a")], vec![hy(1.9, 5.0, "a")], 1.0),
    ];
    for (name, r, h, want) in &acc_cases {
        let got = accuracy_on_overlap(h, r).map_err(|e| format!("accuracy {name}: {e}"))?;
        ensure!(close(got, *want), "accuracy {name}: {got} vs {want}");
    }
    ensure!(
        accuracy_on_overlap(&[hy(5.0, 6.0, "a")], &[gt(0.0, 2.0, "a")]).is_err(),
        "accuracy with no overlapping segment is defined"
    );

    type PrCase = (&'static str, Vec<GtSegment>, Vec<HypSegment>, Option<f64>, Option<f64>);
    let pr_cases: Vec<PrCase> = vec![
        (
            "perfect",
            vec![gt(0.0, 1.0, "a"), gt(1.0, 2.0, "b")],
            vec![hy(0.0, 1.0, "a"), hy(1.0, 2.0, "b")],
            Some(1.0),
            Some(1.0),
        ),
        (
            "b fully labelled a",
            vec![gt(0.0, 1.0, "a"), gt(1.0, 2.0, "b"), gt(2.0, 3.0, "b")],
            vec![hy(0.0, 1.0, "a"), hy(1.0, 2.0, "a"), hy(2.0, 3.0, "a")],
            Some(1.0 / 3.0),
            Some(0.5),
        ),
        ("unknown only", vec![gt(0.0, 1.0, "a")], vec![hy(0.0, 1.0, "UNKNOWN")], None, Some(0.0)),
        ("predicted outsider", vec![gt(0.0, 1.0, "a")], vec![hy(0.0, 1.0, "c")], None, Some(0.0)),
        (
            "two hits, one turn",
            vec![gt(0.0, 2.0, "a")],
            vec![hy(0.0, 1.0, "a"), hy(1.0, 2.0, "a")],
            Some(1.0),
            Some(1.0),
        ),
        ("half recalled", vec![gt(0.0, 1.0, "a"), gt(1.0, 2.0, "a")], vec![hy(0.0, 1.0, "a")], Some(1.0), Some(0.5)),
        ("no overlap", vec![gt(0.0, 1.0, "a")], vec![hy(5.0, 6.0, "a")], Some(0.0), Some(0.0)),
        (
            "mixed",
            vec![gt(0.0, 1.0, "a"), gt(1.0, 2.0, "b"), gt(2.0, 3.0, "c"), gt(3.0, 4.0, "c")],
            vec![hy(0.0, 1.0, "a"), hy(1.0, 2.0, "c"), hy(2.0, 3.0, "c"), hy(3.0, 4.0, "UNKNOWN")],
            Some(0.75),
            Some(0.5),
        ),
        ("empty hypothesis", vec![gt(0.0, 1.0, "a")], vec![], None, Some(0.0)),
        ("empty reference", vec![], vec![hy(0.0, 1.0, "a")], None, None),
        (
            "best match decides",
            vec![gt(0.0, 1.0, "a"), gt(1.0, 3.0, "b")],
            vec![hy(0.5, 3.0, "b")],
            Some(1.0),
            Some(0.5),
        ),
    ];
    let same = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => close(x, y),
        (None, None) => true,
        _ => false,
    };
    for (name, r, h, ppc, rpc) in &pr_cases {
        let got = per_character_pr(h, r);
        ensure!(
            same(got.ppc, *ppc) && same(got.rpc, *rpc),
            "pr {name}: {:?}/{:?} vs {ppc:?}/{rpc:?}",
            got.ppc,
            got.rpc
        );
    }
    let t = per_character_pr(&pr_cases[1].2, &pr_cases[1].1).table;
    ensure!(
        t.len() == 2 && t[1].recall == 0.0 && t[1].precision.is_none() && t[1].support == 2,
        "per-character rows {t:?}"
    );

    let wer_cases: [(&str, &str, f64); 12] = [
        ("the cat sat", "the cat", 1.0 / 3.0),
        ("the cat sat", "the cat sat", 0.0),
        ("a b c", "a x c", 1.0 / 3.0),
        ("a b", "a b c d", 1.0),
        ("Hello, World!", "hello world", 0.0),
        ("I can't go", "i can not go", 0.0),
        ("I have 3 cats", "i have three cats", 0.0),
        ("a b c d", "", 1.0),
        ("a b c d", "b c d e", 0.5),
        ("I'm here", "im here", 0.5),
        ("won't", "will not", 0.0),
        ("'quoted' word", "quoted word", 0.0),
    ];
    for (r, h, want) in wer_cases {
        let got = wer(r, h).map_err(|e| format!("wer {r:?}: {e}"))?;
        ensure!(close(got, want), "wer({r:?}, {h:?}) = {got} vs {want}");
    }
    ensure!(wer("", "x").is_err(), "WER with an empty reference is defined");
    let headline = 100.0 * wer("the cat sat", "the cat").map_err(|e| e.to_string())?;
    ensure!((headline - 33.33).abs() <= 0.01, "wer headline {headline}");

    Ok(format!(
        "der {}, accuracy {}, per-character {}, wer {} fixtures; wer(\"the cat sat\",\"the cat\") = {headline:.2}%",
        der_cases.len() + 2,
        acc_cases.len() + 1,
        pr_cases.len() + 1,
        wer_cases.len() + 2
    ))
}

// ---------------------------------------------------------------- sweep

fn curve(cfg: &SynthConfig) -> std::result::Result<Vec<castline::assign::CurvePoint>, String> {
    let corpus = generate(cfg).map_err(|e| e.to_string())?;
    let pc = cfg.pipeline_config();
    let eps = corpus.episodes(&pc);
    let set = build_exemplars(&eps, &corpus.cast, &pc).map_err(|e| e.to_string())?;
    let bank = build_centroids(&set.exemplars).map_err(|e| e.to_string())?;
    let mut scores = Vec::new();
    for (ep, se) in eps.iter().zip(&corpus.episodes) {
        let mut spans = Vec::new();
        for s in assignable_segments(ep, &pc) {
            let (nearest, distance) = match bank.nearest(ep.voice[&s.id].as_slice()).map_err(|e| e.to_string())? {
                Some((c, d)) => (Label::Character(c), d),
                None => (Label::Unknown, f64::INFINITY),
            };
            spans.push(ScoredSpan { start: s.start, end: s.end, nearest, distance });
        }
        scores.push(EpisodeScores { spans, truth: se.truth.clone() });
    }
    Ok(sweep_thresholds(&scores, &pc.sweep_grid(), pc.long_segment_cutoff))
}

fn pocs_curves() -> Check {
    let mut corpora: Vec<(String, SynthConfig)> = vec![("easy/0".into(), SynthConfig::easy(0))];
    for seed in 0..5 {
        corpora.push((format!("noisy/{seed}"), SynthConfig::noisy(seed)));
    }
    let mut margins = Vec::new();
    for (name, cfg) in &corpora {
        let points = curve(cfg)?;
        for class in [SegmentClass::All, SegmentClass::Long] {
            let c: Vec<_> = points.iter().filter(|p| p.class == class).collect();
            ensure!(!c.is_empty(), "{name}: no {class} points");
            ensure!(c.windows(2).all(|w| w[1].pocs >= w[0].pocs), "{name}/{class}: POCS decreases");
            let last = c.last().unwrap();
            ensure!(last.d == 2.0 && last.pocs == 1.0, "{name}/{class}: POCS {} at d={}", last.pocs, last.d);
        }
        if name.starts_with("noisy") {
            let prec =
                |class| -> Vec<f64> { points.iter().filter(|p| p.class == class).map(|p| p.precision).collect() };
            let (all, long) = (prec(SegmentClass::All), prec(SegmentClass::Long));
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let (at2_all, at2_long) = (*all.last().unwrap(), *long.last().unwrap());
            ensure!(at2_long >= at2_all, "{name}: long precision {at2_long:.3} < all {at2_all:.3} at d=2");
            ensure!(
                mean(&long) >= mean(&all),
                "{name}: mean long precision {:.3} < all {:.3}",
                mean(&long),
                mean(&all)
            );
            margins.push(at2_long - at2_all);
        }
    }
    let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "POCS non-decreasing and 1.0 at d=2 on {} corpora; long precision above all on {} noisy seeds (min margin {min:.3} at d=2)",
        corpora.len(),
        margins.len()
    ))
}

// ---------------------------------------------------------------- subtitles

fn random_word(rng: &mut ChaCha8Rng) -> String {
    const WORDS: [&str; 12] =
        ["hello", "Dr.", "why", "not?", "it's", "42", "fine,", "WAIT!", "okay", "-", "(sighs)", "\"so\""];
    WORDS.choose(rng).unwrap().to_string()
}

fn random_cues(rng: &mut ChaCha8Rng, voice_names: bool) -> Vec<Cue> {
    const NAMES: [&str; 6] = ["Amy", "Ben Ross", "Dr. Cleo", "O'Hara", "Mary-Jo", "Z"];
    let n = rng.gen_range(0..15);
    let mut t = 0u64;
    (0..n)
        .map(|_| {
            t += rng.gen_range(0..120_000);
            let start = t;
            let end = start + rng.gen_range(0..8_000);
            let speaker = rng.gen_bool(0.85).then(|| {
                let name = NAMES.choose(rng).unwrap();
                if voice_names {
                    name.to_string()
                } else {
                    name.to_uppercase()
                }
            });
            let lines = rng.gen_range(1..=2);
            let text = (0..lines)
                .map(|_| (0..rng.gen_range(1..8)).map(|_| random_word(rng)).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join("\n");
            Cue { start_ms: start, end_ms: end, speaker, text }
        })
        .collect()
}

fn golden_cues() -> Vec<Cue> {
    vec![
        Cue::from_seconds(0.0, 1.5, Some("Amy".into()), "Hello there."),
        Cue::from_seconds(1.5, 3.25, Some("Dr. Ben".into()), "How are you, Mrs. Hale?"),
        Cue::from_seconds(3.3, 5.0, None, "(door slams)"),
        Cue::from_seconds(65.004, 67.5, Some("Cleo".into()), "Two lines\nof text"),
        Cue::from_seconds(3723.004, 3725.0, Some("Hana".into()), "Fine!"),
    ]
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn subtitle_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let modes = [(SubtitleFormat::Srt, false), (SubtitleFormat::Vtt, false), (SubtitleFormat::Vtt, true)];
    for case in 0..1000 {
        for (format, spans) in modes {
            let cues = random_cues(&mut rng, spans);
            let text = emit_subtitles(&cues, format, spans).map_err(|e| e.to_string())?;
            let back = parse_subtitles(&text, format).map_err(|e| format!("case {case}: {e}"))?;
            ensure!(back == cues, "case {case} {format:?} spans={spans}: round trip differs\n{text}");
        }
    }

    let bless = std::env::var_os("CASTLINE_BLESS").is_some();
    let cues = golden_cues();
    let mut checked = 0;
    for (file, format, spans) in [
        ("cues.srt", SubtitleFormat::Srt, false),
        ("cues.vtt", SubtitleFormat::Vtt, false),
        ("cues_voice.vtt", SubtitleFormat::Vtt, true),
    ] {
        let text = emit_subtitles(&cues, format, spans).map_err(|e| e.to_string())?;
        let path = golden_dir().join(file);
        if bless {
            std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
            std::fs::write(&path, &text).map_err(|e| e.to_string())?;
        }
        let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure!(golden == text, "{file} differs from the golden file");
        checked += 1;
    }
    Ok(format!("1000 random lists x 3 modes round-trip; {checked} golden files match"))
}

// ---------------------------------------------------------------- determinism

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).expect("readable file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn same_tree(a: &Path, b: &Path, what: &str) -> std::result::Result<usize, String> {
    let (x, y) = (snapshot(a), snapshot(b));
    ensure!(
        x.keys().eq(y.keys()),
        "{what}: file lists differ: {:?} vs {:?}",
        x.keys().collect::<Vec<_>>(),
        y.keys().collect::<Vec<_>>()
    );
    for (k, v) in &x {
        ensure!(&y[k] == v, "{what}: {} differs", k.display());
    }
    Ok(x.len())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let (c1, c2) = (root.join("c1"), root.join("c2"));
    castline(&["synth", "--preset", "noisy", "--seed", "5", "--out", p(&c1)])?;
    castline(&["synth", "--preset", "noisy", "--seed", "5", "--out", p(&c2)])?;
    let mut files = same_tree(&c1, &c2, "synth")?;
    let config = c1.join("series.toml");
    let cfg = p(&config);

    let mut stdout = Vec::new();
    for (run, jobs) in [("r1", "1"), ("r2", "4")] {
        let o = root.join(run);
        let out = p(&o);
        let base = ["--config", cfg, "--jobs", jobs];
        let steps: [&[&str]; 9] = [
            &["exemplars", "--out", out],
            &["assign", "--out", out],
            &["align", "--out", out],
            &["eval", "--out", out],
            &["sweep", "--out", out],
            &["--format", "vtt", "emit", "--out", out],
            &["emit", "--out", out],
            &["segments", "--out", out],
            &["validate"],
        ];
        let mut text = Vec::new();
        for step in steps {
            let args: Vec<&str> = base.iter().chain(step.iter()).copied().collect();
            text.push(castline(&args)?);
        }
        let full = root.join(format!("{run}-run"));
        text.push(castline(&[&base[..], &["run", "--out", p(&full)]].concat())?);
        stdout.push(text);
    }
    for (i, (a, b)) in stdout[0].iter().zip(&stdout[1]).enumerate() {
        let (a, b) = (String::from_utf8_lossy(a), String::from_utf8_lossy(b));
        let (a, b) = (a.replace("/r1", "/rX"), b.replace("/r2", "/rX"));
        ensure!(a == b, "stdout of step {i} differs");
    }
    files += same_tree(&root.join("r1"), &root.join("r2"), "subcommands")?;
    files += same_tree(&root.join("r1-run"), &root.join("r2-run"), "run")?;
    Ok(format!("synth and 10 subcommands byte-identical across two runs ({files} files, 1 vs 4 threads)"))
}
