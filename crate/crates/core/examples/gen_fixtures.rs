//! Regenerates the demo data under ./fixtures. Run from the workspace root:
//!
//! ```text
//! cargo run -p lingcomp --features fixtures --example gen_fixtures
//! ```

use std::fs;
use std::path::Path;

use lingcomp::fixtures;

fn main() -> std::io::Result<()> {
    let out = Path::new("fixtures");
    fs::create_dir_all(out)?;
    let corpus = fixtures::synth_corpus(24, 20240817);
    // the demo hypothesis side also loses every second hesitation marker,
    // so the word-class error profile has something to show
    let asr = fixtures::delete_hesitations(&corpus.asr, 2);

    fixtures::write_corpus_jsonl(&corpus.manual, &out.join("corpus_manual.jsonl"))?;
    fixtures::write_corpus_jsonl(&asr, &out.join("corpus_asr.jsonl"))?;
    fixtures::write_resource_dir(&out.join("resources"), &corpus.manual)?;
    fixtures::write_transcripts(&corpus.manual, &out.join("ref.tsv"))?;
    fixtures::write_transcripts(&asr, &out.join("hyp.tsv"))?;
    fixtures::write_tsv_map(&corpus.speakers, &out.join("speakers.tsv"))?;
    fixtures::write_tsv_map(&corpus.subgroups, &out.join("subgroups.tsv"))?;
    fixtures::write_labels_csv(&corpus.labels, &out.join("labels.csv"))?;
    println!("wrote demo fixtures for {} recordings", corpus.manual.len());
    Ok(())
}
