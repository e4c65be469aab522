use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use lingcomp::alignment::{
    align, corpus_wer, error_profile, group_by_speaker, speaker_stats, AlignmentReport, CorpusWer,
    SpeakerStats, WordClassErrorProfile, WordClassifier,
};
use lingcomp::contour::{score_corpus, write_contours, ParsedDocument};
use lingcomp::lexres::load_resources;
use lingcomp::measures::{
    prevalence_coverage, Binding, MeasureRegistry, NpNormalization, ScoreContext, Window,
    DEFAULT_DEFLATE_LEVEL,
};
use lingcomp::stats::{
    agreement_analysis, rank_features, select_measures, AgreementConfig, AgreementReport,
    SelectionConfig,
};
use lingcomp::transcript::{fmt_sig6, load_corpus, read_score_table, write_score_table};
use lingcomp::treebank::RuleSet;
use lingcomp::{Aggregate, ContourConfig};

use crate::config::{require_dir, require_file, Settings};
use crate::{AgreeArgs, AnalyzeArgs, CliError, RankArgs, ReportArgs, SelectArgs, WerArgs};

fn validation(message: impl Into<String>) -> CliError {
    CliError::Validation(message.into())
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| validation(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_output(path, text.as_bytes())
}

fn read_tsv_map(path: &Path, what: &str) -> Result<BTreeMap<String, String>, CliError> {
    require_file(path, what)?;
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('\t') else {
            return Err(validation(format!(
                "{}:{}: expected key<TAB>value",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

fn read_labels_csv(path: &Path) -> Result<BTreeMap<String, i64>, CliError> {
    require_file(path, "labels file")?;
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "doc_id,label" => {}
        _ => {
            return Err(validation(format!(
                "{}: labels file must start with `doc_id,label`",
                path.display()
            )))
        }
    }
    let mut labels = BTreeMap::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, raw)) = line.split_once(',') else {
            return Err(validation(format!(
                "{}:{}: expected doc_id,label",
                path.display(),
                lineno + 1
            )));
        };
        let value: i64 = raw.trim().parse().map_err(|_| {
            validation(format!(
                "{}:{}: label {raw:?} is not an integer",
                path.display(),
                lineno + 1
            ))
        })?;
        labels.insert(id.to_string(), value);
    }
    Ok(labels)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunMetadata {
    tool_version: &'static str,
    registry_version: String,
    pattern_version: String,
    deflate_level: u32,
    ws: usize,
    step: usize,
    aggregate: String,
    np_norm: String,
    n_documents: usize,
    /// Mean covered-token fraction per prevalence table over whole documents.
    prevalence_coverage: BTreeMap<String, Option<f64>>,
}

pub fn analyze(args: AnalyzeArgs, settings: &Settings) -> Result<(), CliError> {
    let corpus_path = args.corpus;
    require_file(&corpus_path, "corpus")?;
    let resources_dir = settings
        .path(args.resources, "resources")
        .ok_or_else(|| validation("no resource directory (--resources or `resources` key)"))?;
    require_dir(&resources_dir, "resource directory")?;
    let out_dir = settings
        .path(args.out_dir, "out_dir")
        .ok_or_else(|| validation("no output directory (--out-dir or `out_dir` key)"))?;

    let ws = settings.usize(args.ws, "ws", 5)?;
    let step = settings.usize(args.step, "step", 1)?;
    let aggregate_name = settings
        .string(args.aggregate, "aggregate")
        .unwrap_or_else(|| "mean".to_string());
    let aggregate = match aggregate_name.as_str() {
        "mean" => Aggregate::Mean,
        "median" => Aggregate::Median,
        other => return Err(validation(format!("unknown aggregate {other:?}"))),
    };
    let deflate_level = settings.u32(args.deflate_level, "deflate_level", DEFAULT_DEFLATE_LEVEL)?;
    if deflate_level > 9 {
        return Err(validation(format!(
            "deflate level {deflate_level} outside 0..=9"
        )));
    }
    let np_norm_name = settings
        .string(args.np_norm, "np_norm")
        .unwrap_or_else(|| "per-np".to_string());
    let np_norm = match np_norm_name.as_str() {
        "per-np" => NpNormalization::PerNounPhrase,
        "per-sentence" => NpNormalization::PerSentence,
        other => return Err(validation(format!("unknown np normalization {other:?}"))),
    };

    let registry = match settings.path(args.registry, "registry") {
        Some(path) => {
            require_file(&path, "registry manifest")?;
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            MeasureRegistry::parse(&text)?
        }
        None => MeasureRegistry::default_with(np_norm),
    };
    let rules = match settings.path(args.patterns, "patterns") {
        Some(path) => {
            require_file(&path, "pattern rule file")?;
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RuleSet::parse(&text)?
        }
        None => RuleSet::default_rules().clone(),
    };

    let cfg = ContourConfig {
        ws,
        step,
        aggregate,
    };
    cfg.validate()?;
    let docs = load_corpus(&corpus_path)?;
    let bundle = load_resources(&resources_dir)?;
    registry.validate_resources(&bundle)?;
    let ctx = ScoreContext {
        registry: &registry,
        resources: &bundle,
        rules: &rules,
        deflate_level,
    };
    let (table, contours) = score_corpus(&docs, &cfg, &ctx)?;

    // corpus-level coverage of the prevalence tables, over whole documents
    let mut coverage: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for measure in registry.measures() {
        if let Binding::Prevalence { table } = &measure.binding {
            coverage.entry(table.clone()).or_default();
        }
    }
    if !coverage.is_empty() {
        for doc in &docs {
            let pdoc = ParsedDocument::new(doc.clone())?;
            let window = Window::new(&pdoc.doc.sentences, &pdoc.trees);
            for (name, values) in coverage.iter_mut() {
                if let Some(fraction) = prevalence_coverage(&window, &bundle, name)? {
                    values.push(fraction);
                }
            }
        }
    }
    let prevalence_coverage = coverage
        .into_iter()
        .map(|(name, values)| {
            let mean = if values.is_empty() {
                None
            } else {
                Some(values.iter().sum::<f64>() / values.len() as f64)
            };
            (name, mean)
        })
        .collect();

    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    write_score_table(&table, &out_dir.join("scores.csv"))?;
    write_contours(&contours, &out_dir.join("contours.csv"))?;
    let metadata = RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION"),
        registry_version: registry.version().to_string(),
        pattern_version: rules.version().to_string(),
        deflate_level,
        ws,
        step,
        aggregate: aggregate_name,
        np_norm: np_norm_name,
        n_documents: docs.len(),
        prevalence_coverage,
    };
    write_json(&out_dir.join("metadata.json"), &metadata)?;
    println!(
        "analyzed {} documents x {} measures -> {}",
        docs.len(),
        registry.len(),
        out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// wer
// ---------------------------------------------------------------------------

fn read_transcripts(path: &Path) -> Result<Vec<(String, Vec<String>)>, CliError> {
    require_file(path, "transcript file")?;
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let Some((id, words)) = line.split_once('\t') else {
            return Err(validation(format!(
                "{}:{}: expected doc_id<TAB>words",
                path.display(),
                lineno + 1
            )));
        };
        if !seen.insert(id.to_string()) {
            return Err(validation(format!(
                "{}: duplicate doc_id {id:?}",
                path.display()
            )));
        }
        let words = words.split_whitespace().map(|w| w.to_lowercase()).collect();
        out.push((id.to_string(), words));
    }
    Ok(out)
}

#[derive(Serialize)]
struct WerOptions {
    filter_hesitations: bool,
    case_insensitive: bool,
}

#[derive(Serialize)]
struct SpeakerSection {
    n_speakers: usize,
    metrics: Vec<SpeakerStats>,
}

#[derive(Serialize)]
struct WerReport {
    options: WerOptions,
    corpus: CorpusWer,
    speakers: SpeakerSection,
    word_classes: Vec<WordClassErrorProfile>,
    recordings: Vec<AlignmentReport>,
}

pub fn wer(args: WerArgs, settings: &Settings) -> Result<(), CliError> {
    let reference = read_transcripts(&args.reference)?;
    let hypothesis = read_transcripts(&args.hyp)?;

    let hyp_map: BTreeMap<&str, &Vec<String>> = hypothesis
        .iter()
        .map(|(id, words)| (id.as_str(), words))
        .collect();
    let ref_ids: std::collections::HashSet<&str> =
        reference.iter().map(|(id, _)| id.as_str()).collect();
    let mut only_ref: Vec<&str> = reference
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !hyp_map.contains_key(*id))
        .collect();
    let mut only_hyp: Vec<&str> = hypothesis
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !ref_ids.contains(*id))
        .collect();
    if !only_ref.is_empty() || !only_hyp.is_empty() {
        only_ref.sort_unstable();
        only_hyp.sort_unstable();
        return Err(validation(format!(
            "transcripts do not pair up; only in reference: [{}]; only in hypothesis: [{}]",
            only_ref.join(", "),
            only_hyp.join(", ")
        )));
    }

    let classifier = match settings.path(args.hesitations, "hesitations") {
        Some(path) => {
            require_file(&path, "hesitation lexicon")?;
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            WordClassifier::with_hesitations(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(str::to_string),
            )
        }
        None => WordClassifier::default(),
    };

    fn keep<'a>(
        words: &'a [String],
        classifier: &WordClassifier,
        filter_hesitations: bool,
    ) -> Vec<&'a str> {
        words
            .iter()
            .map(String::as_str)
            .filter(|w| !filter_hesitations || !classifier.is_hesitation(w))
            .collect()
    }
    let mut reports = Vec::with_capacity(reference.len());
    for (id, ref_words) in &reference {
        let hyp_words = hyp_map[id.as_str()];
        let ref_kept = keep(ref_words, &classifier, args.filter_hesitations);
        let hyp_kept = keep(hyp_words, &classifier, args.filter_hesitations);
        let report = align(id, &ref_kept, &hyp_kept)
            .map_err(|e| validation(format!("document {id}: {e}")))?;
        reports.push(report);
    }

    let speaker_of = match args.speakers {
        Some(path) => read_tsv_map(&path, "speaker map")?,
        None => BTreeMap::new(),
    };
    let groups = group_by_speaker(&reports, &speaker_of);
    let metrics = speaker_stats(&groups)?;
    let report = WerReport {
        options: WerOptions {
            filter_hesitations: args.filter_hesitations,
            case_insensitive: true,
        },
        corpus: corpus_wer(&reports)?,
        speakers: SpeakerSection {
            n_speakers: groups.len(),
            metrics,
        },
        word_classes: error_profile(&reports, &classifier),
        recordings: reports,
    };
    write_json(&args.out, &report)?;
    println!(
        "aligned {} recordings, corpus WER {:.1}% -> {}",
        report.recordings.len(),
        report.corpus.wer,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// agree / select / rank / report
// ---------------------------------------------------------------------------

fn agreement_bands(
    strong: Option<f64>,
    moderate: Option<f64>,
    settings: &Settings,
) -> Result<AgreementConfig, CliError> {
    let cfg = AgreementConfig {
        strong_band: settings.f64(strong, "strong_band", 0.7)?,
        moderate_band: settings.f64(moderate, "moderate_band", 0.6)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_agreement_outputs(out_dir: &Path, report: &AgreementReport) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    write_json(&out_dir.join("agreement.json"), report)?;
    let mut csv = String::from("measure,subgroup,rho\n");
    for result in &report.measures {
        csv.push_str(result.measure.as_str());
        csv.push_str(",overall,");
        if let Some(rho) = result.rho_overall {
            csv.push_str(&fmt_sig6(rho));
        }
        csv.push('\n');
        for (subgroup, rho) in &result.rho_by_subgroup {
            csv.push_str(result.measure.as_str());
            csv.push(',');
            csv.push_str(subgroup);
            csv.push(',');
            if let Some(rho) = rho {
                csv.push_str(&fmt_sig6(*rho));
            }
            csv.push('\n');
        }
    }
    write_output(&out_dir.join("agreement_long.csv"), csv.as_bytes())
}

fn run_agreement(
    manual: &Path,
    asr: &Path,
    subgroups: Option<&Path>,
    cfg: &AgreementConfig,
) -> Result<AgreementReport, CliError> {
    require_file(manual, "manual score table")?;
    require_file(asr, "asr score table")?;
    let manual_table = read_score_table(manual)?;
    let asr_table = read_score_table(asr)?;
    let subgroup_map = match subgroups {
        Some(path) => read_tsv_map(path, "subgroup map")?,
        None => BTreeMap::new(),
    };
    Ok(agreement_analysis(
        &manual_table,
        &asr_table,
        &subgroup_map,
        cfg,
    )?)
}

pub fn agree(args: AgreeArgs, settings: &Settings) -> Result<(), CliError> {
    let cfg = agreement_bands(args.strong_band, args.moderate_band, settings)?;
    let out_dir = settings
        .path(args.out_dir, "out_dir")
        .ok_or_else(|| validation("no output directory (--out-dir or `out_dir` key)"))?;
    let report = run_agreement(&args.manual, &args.asr, args.subgroups.as_deref(), &cfg)?;
    write_agreement_outputs(&out_dir, &report)?;
    match (report.summary.mean_rho, report.summary.sd_rho) {
        (Some(mean), Some(sd)) => println!(
            "agreement over {} measures: mean rho {:.2}, SD {:.2}, {} strong / {} moderate / {} weak -> {}",
            report.summary.n_measures,
            mean,
            sd,
            report.summary.n_strong,
            report.summary.n_moderate,
            report.summary.n_weak,
            out_dir.display()
        ),
        _ => println!(
            "agreement over {} measures ({} with defined rho) -> {}",
            report.summary.n_measures,
            report.summary.n_with_rho,
            out_dir.display()
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct SelectionOutput {
    r_threshold: f64,
    removed_nzv: Vec<String>,
    removed_corr: Vec<String>,
    retained: Vec<String>,
}

pub fn select(args: SelectArgs, settings: &Settings) -> Result<(), CliError> {
    require_file(&args.scores, "score table")?;
    let table = read_score_table(&args.scores)?;
    let cfg = SelectionConfig {
        r_threshold: settings.f64(args.r_threshold, "r_threshold", 0.9)?,
        ..SelectionConfig::default()
    };
    if !(0.0 < cfg.r_threshold && cfg.r_threshold <= 1.0) {
        return Err(validation(format!(
            "r-threshold {} outside (0, 1]",
            cfg.r_threshold
        )));
    }
    let result = select_measures(&table, &cfg)?;
    let names = |ids: &[lingcomp::MeasureId]| ids.iter().map(|id| id.to_string()).collect();
    let output = SelectionOutput {
        r_threshold: cfg.r_threshold,
        removed_nzv: names(&result.removed_nzv),
        removed_corr: names(&result.removed_corr),
        retained: names(&result.retained),
    };
    write_json(&args.out, &output)?;
    println!(
        "selection kept {} of {} measures ({} near-zero-variance, {} redundant) -> {}",
        output.retained.len(),
        table.columns().len(),
        output.removed_nzv.len(),
        output.removed_corr.len(),
        args.out.display()
    );
    Ok(())
}

fn write_ranking_csv(
    out: &Path,
    ranking: &lingcomp::stats::FeatureRanking,
) -> Result<(), CliError> {
    let mut csv = String::new();
    if let Some(mean) = ranking.mean_fi {
        csv.push_str(&format!("# mean_fi: {}\n", fmt_sig6(mean)));
    }
    csv.push_str("measure,fi,beta,converged,above_mean\n");
    for entry in &ranking.ranked {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            entry.measure,
            fmt_sig6(entry.fi),
            fmt_sig6(entry.beta),
            entry.converged,
            entry.above_mean
        ));
    }
    write_output(out, csv.as_bytes())
}

fn run_ranking(
    scores: &Path,
    labels_path: &Path,
) -> Result<lingcomp::stats::FeatureRanking, CliError> {
    require_file(scores, "score table")?;
    let table = read_score_table(scores)?;
    let labels = read_labels_csv(labels_path)?;
    let ranking = rank_features(&table, &labels)?;
    for (measure, reason) in &ranking.skipped {
        eprintln!("lingcomp: skipping {measure}: {reason}");
    }
    Ok(ranking)
}

pub fn rank(args: RankArgs, _settings: &Settings) -> Result<(), CliError> {
    let ranking = run_ranking(&args.scores, &args.labels)?;
    write_ranking_csv(&args.out, &ranking)?;
    println!(
        "ranked {} measures ({} skipped) -> {}",
        ranking.ranked.len(),
        ranking.skipped.len(),
        args.out.display()
    );
    Ok(())
}

pub fn report(args: ReportArgs, settings: &Settings) -> Result<(), CliError> {
    let cfg = agreement_bands(args.strong_band, args.moderate_band, settings)?;
    let out_dir = settings
        .path(args.out_dir, "out_dir")
        .ok_or_else(|| validation("no output directory (--out-dir or `out_dir` key)"))?;
    let agreement = run_agreement(&args.manual, &args.asr, args.subgroups.as_deref(), &cfg)?;
    write_agreement_outputs(&out_dir, &agreement)?;
    let ranking = run_ranking(&args.manual, &args.labels)?;
    write_ranking_csv(&out_dir.join("ranking.csv"), &ranking)?;
    println!(
        "report bundle ({} measures, {} ranked) -> {}",
        agreement.summary.n_measures,
        ranking.ranked.len(),
        out_dir.display()
    );
    Ok(())
}
