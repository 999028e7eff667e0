//! Ground-truth construction: align a speaker-attributed transcript to
//! timed ASR words with DTW, then vote a speaker per sentence segment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::types::{CastEntry, CharacterId, GtSegment, SpeechSegment, WordToken};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptLine {
    pub speaker: CharacterId,
    pub text: String,
    pub line_index: usize,
}

/// Maps transcript speaker names to character ids, case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct SpeakerAliases {
    names: BTreeMap<String, CharacterId>,
}

impl SpeakerAliases {
    /// Seeds the table with each character's id, display name and aliases.
    pub fn from_cast(cast: &[CastEntry]) -> Self {
        let mut table = SpeakerAliases::default();
        for c in cast {
            table.insert(c.id.as_str(), c.id.clone());
            table.insert(&c.display_name, c.id.clone());
            for alias in &c.aliases {
                table.insert(alias, c.id.clone());
            }
        }
        table
    }

    pub fn insert(&mut self, name: &str, id: CharacterId) {
        self.names.insert(name.trim().to_lowercase(), id);
    }

    pub fn resolve(&self, name: &str) -> Option<&CharacterId> {
        self.names.get(&name.trim().to_lowercase())
    }
}

/// Parses `NAME: utterance` lines. Blank lines are skipped.
pub fn parse_transcript(text: &str, aliases: &SpeakerAliases) -> Result<Vec<TranscriptLine>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |m: String| Error::parse("transcript", idx + 1, m);
        let (name, utterance) = line.split_once(':').ok_or_else(|| parse_err("expected `NAME: text`".into()))?;
        let speaker = aliases.resolve(name).ok_or_else(|| parse_err(format!("unknown speaker {:?}", name.trim())))?;
        let utterance = utterance.trim();
        if utterance.is_empty() {
            return Err(parse_err("empty utterance".into()));
        }
        out.push(TranscriptLine { speaker: speaker.clone(), text: utterance.to_string(), line_index: out.len() });
    }
    Ok(out)
}

/// Lowercases and strips leading and trailing punctuation; inner apostrophes stay.
pub fn normalize_word(w: &str) -> String {
    w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Transcript words paired with their speaker. Tokens that are pure
/// punctuation are dropped.
pub fn transcript_words(lines: &[TranscriptLine]) -> Vec<(String, CharacterId)> {
    lines
        .iter()
        .flat_map(|l| {
            l.text
                .split_whitespace()
                .filter(|w| !normalize_word(w).is_empty())
                .map(move |w| (w.to_string(), l.speaker.clone()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    /// Consumes one word from each side; cost 0 if the words match, else 1.
    Diagonal,
    /// Consumes a transcript word only; cost 1.
    TranscriptSkip,
    /// Consumes a timed word only; cost 1.
    TimedSkip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordLink {
    Match,
    Substitution,
    /// Consumed by a timed-skip; its speaker is borrowed from the nearest diagonal step.
    Inserted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedWord {
    pub speaker: Option<CharacterId>,
    pub link: WordLink,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub cost: usize,
    /// Moves from the start of both sequences to their ends.
    pub path: Vec<Move>,
    /// One entry per timed word.
    pub words: Vec<AlignedWord>,
}

/// Minimum-cost monotone alignment with unit skip and substitution costs.
///
/// Among equal-cost predecessors a cell prefers the diagonal, then the
/// transcript skip, then the timed skip.
pub fn dtw_align(transcript: &[(String, CharacterId)], timed: &[WordToken]) -> Result<Alignment> {
    if transcript.is_empty() || timed.is_empty() {
        return Err(Error::Invalid("DTW needs two non-empty word sequences".into()));
    }
    let a: Vec<String> = transcript.iter().map(|(w, _)| normalize_word(w)).collect();
    let b: Vec<String> = timed.iter().map(|w| normalize_word(&w.text)).collect();
    let (m, n) = (a.len(), b.len());
    let width = n + 1;

    // Back-pointers only; two rolling cost rows.
    let mut back = vec![Move::Diagonal; (m + 1) * width];
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut curr = vec![0usize; width];
    back[1..width].fill(Move::TimedSkip);
    for i in 1..=m {
        curr[0] = i;
        back[i * width] = Move::TranscriptSkip;
        for j in 1..=n {
            let diag = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let up = prev[j] + 1;
            let left = curr[j - 1] + 1;
            let (cost, mv) = if diag <= up && diag <= left {
                (diag, Move::Diagonal)
            } else if up <= left {
                (up, Move::TranscriptSkip)
            } else {
                (left, Move::TimedSkip)
            };
            curr[j] = cost;
            back[i * width + j] = mv;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let cost = prev[n];

    let mut path = Vec::with_capacity(m + n);
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let mv = back[i * width + j];
        path.push(mv);
        match mv {
            Move::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Move::TranscriptSkip => i -= 1,
            Move::TimedSkip => j -= 1,
        }
    }
    path.reverse();

    let words = speakers_along_path(&path, transcript, &a, &b);
    Ok(Alignment { cost, path, words })
}

fn speakers_along_path(
    path: &[Move],
    transcript: &[(String, CharacterId)],
    a: &[String],
    b: &[String],
) -> Vec<AlignedWord> {
    // For each step: the transcript index consumed diagonally, if any.
    let mut diag_at: Vec<Option<usize>> = Vec::with_capacity(path.len());
    let mut timed_step: Vec<usize> = Vec::with_capacity(b.len());
    let (mut i, mut j) = (0usize, 0usize);
    for (step, mv) in path.iter().enumerate() {
        match mv {
            Move::Diagonal => {
                diag_at.push(Some(i));
                timed_step.push(step);
                i += 1;
                j += 1;
            }
            Move::TranscriptSkip => {
                diag_at.push(None);
                i += 1;
            }
            Move::TimedSkip => {
                diag_at.push(None);
                timed_step.push(step);
                j += 1;
            }
        }
    }
    debug_assert_eq!(j, b.len());

    let nearest_diag = |step: usize| -> Option<usize> {
        for dist in 1..diag_at.len() {
            if let Some(ti) = step.checked_sub(dist).and_then(|s| diag_at[s]) {
                return Some(ti);
            }
            if let Some(ti) = diag_at.get(step + dist).copied().flatten() {
                return Some(ti);
            }
        }
        None
    };

    timed_step
        .iter()
        .enumerate()
        .map(|(tj, &step)| match diag_at[step] {
            Some(ti) => AlignedWord {
                speaker: Some(transcript[ti].1.clone()),
                link: if a[ti] == b[tj] { WordLink::Match } else { WordLink::Substitution },
            },
            None => {
                AlignedWord { speaker: nearest_diag(step).map(|ti| transcript[ti].1.clone()), link: WordLink::Inserted }
            }
        })
        .collect()
}

/// A segment flagged for manual review.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewItem {
    pub segment: SpeechSegment,
    pub votes: BTreeMap<CharacterId, usize>,
    pub inserted_fraction: f64,
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub segments: Vec<GtSegment>,
    pub review: Vec<ReviewItem>,
}

/// Share of inserted words above which a segment goes to review.
pub const REVIEW_INSERTED_FRACTION: f64 = 0.3;

/// Votes a speaker for each segment from its aligned words.
///
/// Majority wins; ties go to the speaker of the earliest tied word. Segments
/// without any attributed word are dropped (and listed for review).
pub fn words_to_gt_segments(segments: &[SpeechSegment], words: &[AlignedWord]) -> GroundTruth {
    let mut out = GroundTruth { segments: Vec::new(), review: Vec::new() };
    for seg in segments {
        let slice = &words[seg.word_range.clone()];
        let mut votes: BTreeMap<CharacterId, usize> = BTreeMap::new();
        let mut first_seen: BTreeMap<CharacterId, usize> = BTreeMap::new();
        for (pos, w) in slice.iter().enumerate() {
            if let Some(s) = &w.speaker {
                *votes.entry(s.clone()).or_default() += 1;
                first_seen.entry(s.clone()).or_insert(pos);
            }
        }
        let inserted = slice.iter().filter(|w| w.link == WordLink::Inserted).count();
        let inserted_fraction = inserted as f64 / slice.len().max(1) as f64;
        let winner = votes
            .iter()
            .max_by(|(a, va), (b, vb)| va.cmp(vb).then(first_seen[*b].cmp(&first_seen[*a])))
            .map(|(c, _)| c.clone());
        let needs_review = votes.len() > 1 || inserted_fraction > REVIEW_INSERTED_FRACTION;
        match winner {
            Some(speaker) => {
                out.segments.push(GtSegment { start: seg.start, end: seg.end, speaker, text: seg.text.clone() });
                if needs_review {
                    out.review.push(ReviewItem { segment: seg.clone(), votes, inserted_fraction, dropped: false });
                }
            }
            None => {
                log::warn!("segment {} has no aligned speaker; dropped", seg.id);
                out.review.push(ReviewItem { segment: seg.clone(), votes, inserted_fraction, dropped: true });
            }
        }
    }
    out
}

/// Plain-text review listing, one segment per line.
pub fn render_review(items: &[ReviewItem]) -> String {
    let mut s = String::new();
    for item in items {
        let votes: Vec<String> = item.votes.iter().map(|(c, n)| format!("{c}={n}")).collect();
        let _ = writeln!(
            s,
            "segment {}\t{:.3}-{:.3}\tvotes {}\tinserted {:.0}%{}\t{}",
            item.segment.id,
            item.segment.start,
            item.segment.end,
            if votes.is_empty() { "-".to_string() } else { votes.join(",") },
            100.0 * item.inserted_fraction,
            if item.dropped { "\tDROPPED" } else { "" },
            item.segment.text,
        );
    }
    s
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::types::SegmentId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive search over every monotone path (depth-first, pruned only by
    /// the best complete cost seen so far). Returns the minimum cost.
    pub(crate) fn brute_force_cost(a: &[&str], b: &[&str]) -> usize {
        fn go(a: &[&str], b: &[&str], i: usize, j: usize, acc: usize, best: &mut usize) {
            if acc >= *best {
                return;
            }
            if i == a.len() && j == b.len() {
                *best = acc;
                return;
            }
            if i < a.len() && j < b.len() {
                go(a, b, i + 1, j + 1, acc + usize::from(a[i] != b[j]), best);
            }
            if i < a.len() {
                go(a, b, i + 1, j, acc + 1, best);
            }
            if j < b.len() {
                go(a, b, i, j + 1, acc + 1, best);
            }
        }
        let mut best = usize::MAX;
        go(a, b, 0, 0, 0, &mut best);
        best
    }

    pub(crate) fn path_cost(path: &[Move], a: &[&str], b: &[&str]) -> Option<usize> {
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
                    cost += 1;
                    i += 1;
                }
                Move::TimedSkip => {
                    b.get(j)?;
                    cost += 1;
                    j += 1;
                }
            }
        }
        (i == a.len() && j == b.len()).then_some(cost)
    }

    fn transcript(words: &[(&str, &str)]) -> Vec<(String, CharacterId)> {
        words.iter().map(|(w, s)| (w.to_string(), CharacterId::new(*s))).collect()
    }

    fn timed(words: &[&str]) -> Vec<WordToken> {
        words.iter().enumerate().map(|(i, w)| WordToken::new(*w, i as f64, i as f64 + 0.5)).collect()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_word("Hello,"), "hello");
        assert_eq!(normalize_word("don't"), "don't");
        assert_eq!(normalize_word("..."), "");
        assert_eq!(normalize_word("\"Why?\""), "why");
    }

    #[test]
    fn identical_sequences() {
        let t = transcript(&[("Hi", "a"), ("there.", "a"), ("Bye", "b")]);
        let al = dtw_align(&t, &timed(&["hi", "there", "bye."])).unwrap();
        assert_eq!(al.cost, 0);
        assert_eq!(al.path, vec![Move::Diagonal; 3]);
        let speakers: Vec<_> = al.words.iter().map(|w| w.speaker.clone().unwrap()).collect();
        assert_eq!(speakers, vec!["a".into(), "a".into(), CharacterId::new("b")]);
        assert!(al.words.iter().all(|w| w.link == WordLink::Match));
    }

    #[test]
    fn inserted_filler_inherits_neighbour() {
        let t = transcript(&[("so", "a"), ("anyway", "a"), ("right", "b")]);
        let b = ["so", "um", "anyway", "right"];
        let al = dtw_align(&t, &timed(&b)).unwrap();
        assert_eq!(al.cost, 1);
        assert_eq!(al.cost, brute_force_cost(&["so", "anyway", "right"], &b));
        assert_eq!(al.words[1].link, WordLink::Inserted);
        assert_eq!(al.words[1].speaker, Some("a".into()));
    }

    #[test]
    fn disjoint_vocabularies() {
        let t = transcript(&[("a", "x"), ("b", "x"), ("c", "y")]);
        let b = ["p", "q", "r", "s", "t"];
        let al = dtw_align(&t, &timed(&b)).unwrap();
        assert_eq!(al.cost, brute_force_cost(&["a", "b", "c"], &b));
        assert_eq!(al.cost, 5);
        assert!(al.words.iter().all(|w| w.speaker.is_some()));
    }

    #[test]
    fn empty_sequences_error() {
        assert!(dtw_align(&[], &timed(&["a"])).is_err());
        assert!(dtw_align(&transcript(&[("a", "x")]), &[]).is_err());
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vocab = ["a", "b", "c", "d"];
        for _ in 0..200 {
            let m = rng.gen_range(1..=7);
            let n = rng.gen_range(1..=7);
            let a: Vec<&str> = (0..m).map(|_| vocab[rng.gen_range(0..4)]).collect();
            let b: Vec<&str> = (0..n).map(|_| vocab[rng.gen_range(0..4)]).collect();
            let t: Vec<_> = a.iter().map(|w| (w.to_string(), CharacterId::new("s"))).collect();
            let al = dtw_align(&t, &timed(&b)).unwrap();
            let oracle = brute_force_cost(&a, &b);
            assert_eq!(al.cost, oracle);
            assert_eq!(path_cost(&al.path, &a, &b), Some(oracle));
        }
    }

    fn seg(id: u32, range: std::ops::Range<usize>) -> SpeechSegment {
        SpeechSegment {
            id: SegmentId(id),
            start: range.start as f64,
            end: range.end as f64,
            text: format!("seg{id}"),
            word_range: range,
        }
    }

    fn aw(who: Option<&str>, link: WordLink) -> AlignedWord {
        AlignedWord { speaker: who.map(CharacterId::new), link }
    }

    #[test]
    fn majority_and_tie_rules() {
        use WordLink::Match as M;
        let words = vec![
            // all a
            aw(Some("a"), M),
            aw(Some("a"), M),
            aw(Some("a"), M),
            aw(Some("a"), M),
            aw(Some("a"), M),
            // 3 a, 2 b
            aw(Some("b"), M),
            aw(Some("a"), M),
            aw(Some("a"), M),
            aw(Some("b"), M),
            aw(Some("a"), M),
            // 2 b, 2 a with b first
            aw(Some("b"), M),
            aw(Some("a"), M),
            aw(Some("a"), M),
            aw(Some("b"), M),
        ];
        let gt = words_to_gt_segments(&[seg(0, 0..5), seg(1, 5..10), seg(2, 10..14)], &words);
        let speakers: Vec<_> = gt.segments.iter().map(|g| g.speaker.as_str()).collect();
        assert_eq!(speakers, ["a", "a", "b"]);
        assert_eq!(gt.segments[0].text, "seg0");
        assert_eq!(gt.review.len(), 2);
    }

    #[test]
    fn unattributed_segment_is_dropped() {
        let words = vec![aw(None, WordLink::Inserted), aw(Some("a"), WordLink::Match)];
        let gt = words_to_gt_segments(&[seg(0, 0..1), seg(1, 1..2)], &words);
        assert_eq!(gt.segments.len(), 1);
        assert!(gt.review[0].dropped);
        assert!(render_review(&gt.review).contains("DROPPED"));
    }

    #[test]
    fn transcript_parsing() {
        let mut aliases = SpeakerAliases::default();
        aliases.insert("JERRY", CharacterId::new("jerry"));
        let lines = parse_transcript("JERRY: Hello there.\n\nJerry: Bye: now\n", &aliases).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].text, "Bye: now");
        assert_eq!(lines[1].line_index, 1);
        assert!(parse_transcript("KRAMER: hey", &aliases).is_err());
        assert!(parse_transcript("no colon here", &aliases).is_err());
        let words = transcript_words(&lines);
        assert_eq!(words.len(), 4);
    }
}
