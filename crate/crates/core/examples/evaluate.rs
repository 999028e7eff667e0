//! The evaluation metrics on a small hand-written episode.

use castline::metrics::{accuracy_on_overlap, der, per_character_pr, wer, DerOptions};
use castline::types::{CharacterId, GtSegment, HypSegment, Label};

fn main() -> castline::Result<()> {
    let gt = |s, e, who: &str| GtSegment { start: s, end: e, speaker: CharacterId::new(who), text: String::new() };
    let hyp = |s, e, who: &str| HypSegment { start: s, end: e, label: Label::parse(who) };

    let reference = [gt(0.0, 4.0, "jerry"), gt(4.0, 7.0, "elaine"), gt(6.5, 9.0, "george"), gt(9.0, 12.0, "jerry")];
    let hypothesis =
        [hyp(0.0, 4.0, "jerry"), hyp(4.0, 7.0, "elaine"), hyp(7.0, 9.0, "jerry"), hyp(9.0, 12.0, "UNKNOWN")];

    for (name, opts) in [
        ("DER", DerOptions::new(0.0, false)),
        ("DER(O)", DerOptions::new(0.0, true)),
        ("DER, 0.25s collar", DerOptions::new(0.25, true)),
        ("DER, UNKNOWN as miss", DerOptions { unknown_as_miss: true, ..DerOptions::new(0.0, true) }),
    ] {
        println!("{name:<22} {:5.1}%", 100.0 * der(&reference, &hypothesis, opts)?);
    }
    println!("{:<22} {:5.1}%", "accuracy", 100.0 * accuracy_on_overlap(&hypothesis, &reference)?);

    let pr = per_character_pr(&hypothesis, &reference);
    for c in &pr.table {
        let p = c.precision.map_or("-".into(), |p| format!("{p:.2}"));
        println!("  {:<8} precision {p:>4} recall {:.2}", c.character.as_str(), c.recall);
    }
    println!("Ppc {:?} Rpc {:?}", pr.ppc, pr.rpc);

    println!("WER {:.2}%", 100.0 * wer("the cat sat", "the cat")?);
    println!("WER {:.2}%", 100.0 * wer("I can't believe it's 5 o'clock", "i can not believe its five o'clock")?);
    Ok(())
}
