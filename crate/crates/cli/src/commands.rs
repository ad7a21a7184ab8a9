use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use psq::alignment::{
    counts_from_alignments, load_parallel_files, load_parallel_tsv, load_table, normalize_counts,
    pharaoh_pairs, save_table, Model1Trainer,
};
use psq::evaluation::{evaluate, load_qrels};
use psq::indexer::{
    build_unigram_lm, read_documents_jsonl, DocumentVector, IndexBuilder, IndexMetadata,
    InvertedIndex, SmoothingConfig, UnigramLM,
};
use psq::pruning::{self, prune_stats};
use psq::search::{batch_search_with, load_queries, load_trec_run, save_trec_run};
use psq::sweep::{
    emit_analysis, floor_table, pareto_frontier, run_sweep, Metric, SizeAxis, SweepGrid,
    SweepInputs, SweepOptions,
};
use psq::textprep::{load_stopwords, TokenSequence, Tokenizer, TokenizerConfig};
use psq::Exec;
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{
    AlignArgs, EvalArgs, IndexArgs, MetricArg, PruneArgs, ReportFormat, SearchArgs, SizeArg,
    SweepArgs, SynthArgs, TextArgs,
};

pub const INDEX_FILE: &str = "index.psq";

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

impl TextArgs {
    fn configs(&self) -> Result<(TokenizerConfig, TokenizerConfig)> {
        let base = TokenizerConfig {
            lowercase: !self.no_lowercase,
            strip_diacritics: !self.keep_diacritics,
            strip_punctuation: !self.keep_punctuation,
            ..TokenizerConfig::default()
        };
        let side = |lang: &str, stop: &Option<PathBuf>| -> Result<TokenizerConfig> {
            let cfg = base.clone().with_language(lang);
            Ok(match stop {
                Some(p) => cfg.with_stopwords(load_stopwords(p)?),
                None => cfg,
            })
        };
        Ok((
            side(&self.doc_lang, &self.doc_stopwords)?,
            side(&self.query_lang, &self.query_stopwords)?,
        ))
    }

    fn stopword_files(&self) -> Vec<&Path> {
        self.doc_stopwords
            .iter()
            .chain(&self.query_stopwords)
            .map(PathBuf::as_path)
            .collect()
    }
}

fn load_lm(path: &Path, tokenizer: &Tokenizer, floor: f64) -> Result<UnigramLM> {
    let text = read_text(path)?;
    let tokens = text
        .lines()
        .flat_map(|l| tokenizer.tokenize(l).into_inner());
    build_unigram_lm(tokens, floor)
        .with_context(|| format!("background model from {}", path.display()))
}

fn load_doc_vectors(path: &Path, tokenizer: &Tokenizer) -> Result<Vec<DocumentVector>> {
    read_documents_jsonl(path)?
        .map(|d| {
            let d = d?;
            Ok(DocumentVector::from_tokens(
                d.id,
                &tokenizer.tokenize(&d.text),
            ))
        })
        .collect()
}

pub fn align(a: AlignArgs) -> Result<()> {
    let (doc_cfg, query_cfg) = a.text.configs()?;
    let (src_tok, tgt_tok) = (Tokenizer::new(doc_cfg), Tokenizer::new(query_cfg));
    let (table, stats) = if !a.alignments.is_empty() {
        let (sp, tp) = (a.source.as_ref().unwrap(), a.target.as_ref().unwrap());
        let (src, tgt) = (read_text(sp)?, read_text(tp)?);
        let src: Vec<&str> = src.lines().collect();
        let tgt: Vec<&str> = tgt.lines().collect();
        if src.len() != tgt.len() {
            bail!(
                "{} has {} lines but {} has {}",
                sp.display(),
                src.len(),
                tp.display(),
                tgt.len()
            );
        }
        let mut aligned = Vec::new();
        for path in &a.alignments {
            let links = read_text(path)?;
            let links: Vec<&str> = links.lines().collect();
            if links.len() != src.len() {
                bail!(
                    "{} has {} lines, expected {}",
                    path.display(),
                    links.len(),
                    src.len()
                );
            }
            for (i, line) in links.iter().enumerate() {
                let pairs = pharaoh_pairs(
                    &TokenSequence::from_whitespace(src[i]),
                    &TokenSequence::from_whitespace(tgt[i]),
                    line,
                )
                .map_err(|e| anyhow::anyhow!("{}:{}: {e}", path.display(), i + 1))?;
                aligned.extend(pairs);
            }
        }
        let links = aligned.len();
        let table = normalize_counts(&counts_from_alignments(aligned))?;
        (
            table,
            json!({ "sentence_pairs": src.len(), "aligners": a.alignments.len(), "links": links }),
        )
    } else {
        let loaded = match (&a.parallel, &a.source, &a.target) {
            (Some(p), _, _) => load_parallel_tsv(p, &src_tok, &tgt_tok)?,
            (None, Some(s), Some(t)) => load_parallel_files(s, t, &src_tok, &tgt_tok)?,
            _ => bail!("give --parallel or both --source and --target"),
        };
        if loaded.skipped > 0 {
            log::warn!(
                "skipped {} sentence pairs with an empty side",
                loaded.skipped
            );
        }
        let fit = Model1Trainer::new(a.iterations)
            .with_exec(exec(a.sequential))
            .train(&loaded.corpus)?;
        let stats = json!({
            "sentence_pairs": loaded.corpus.len(),
            "skipped_pairs": loaded.skipped,
            "iterations": a.iterations,
            "log_likelihood": fit.log_likelihood,
        });
        (fit.table, stats)
    };
    save_table(&table, &a.out)?;
    print_json(&json!({
        "corpus": stats,
        "table": pruning::TableSummary::of(&table),
        "source_vocab": table.source_vocab().len(),
        "target_vocab": table.target_vocab().len(),
        "out": a.out,
    }))
}

pub fn prune(a: PruneArgs) -> Result<()> {
    let cfg = a.pruning.config()?;
    let table = load_table(&a.table)?;
    let pruned = pruning::prune(&table, &cfg)?;
    save_table(&pruned, &a.out)?;
    print_json(&json!({ "config": cfg, "stats": prune_stats(&table, &pruned) }))
}

pub fn index(a: IndexArgs) -> Result<()> {
    let cfg = a.pruning.config()?;
    let smoothing = SmoothingConfig::new(a.alpha)?;
    let (doc_cfg, query_cfg) = a.text.configs()?;
    let doc_tok = Tokenizer::new(doc_cfg.clone());
    let table = pruning::prune(&floor_table(&load_table(&a.table)?, a.table_floor)?, &cfg)?;
    let lm = load_lm(&a.lm_corpus, &Tokenizer::new(query_cfg.clone()), a.lm_floor)?;
    let metadata = IndexMetadata {
        table_floor: Some(a.table_floor),
        pruning: Some(cfg),
        doc_tokenizer: Some(doc_cfg),
        query_tokenizer: Some(query_cfg),
        ..IndexMetadata::default()
    };
    let docs = read_documents_jsonl(&a.docs)?.map(|d| {
        d.map(|d| {
            let tokens = doc_tok.tokenize(&d.text);
            (d.id, tokens)
        })
    });
    let index = IndexBuilder::new(&table, &lm, smoothing)
        .chunk_size(a.chunk_size)
        .exec(exec(a.sequential))
        .metadata(metadata)
        .try_build(docs)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let path = a.out_dir.join(INDEX_FILE);
    index.save(&path)?;

    let mut inputs = vec![a.docs.as_path(), a.table.as_path(), a.lm_corpus.as_path()];
    inputs.extend(a.text.stopword_files());
    let params = json!({
        "alpha": a.alpha,
        "lm_floor": a.lm_floor,
        "table_floor": a.table_floor,
        "chunk_size": a.chunk_size,
        "pruning": cfg,
        "tokenizers": { "doc": index.metadata.doc_tokenizer, "query": index.metadata.query_tokenizer },
    });
    RunManifest::new("index", params, &inputs)?.write(&a.out_dir)?;
    print_json(&json!({
        "documents": index.num_docs(),
        "vocabulary": index.vocab().len(),
        "total_postings": index.total_postings(),
        "bytes": index.serialized_len(),
        "index": path,
    }))
}

fn index_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(INDEX_FILE)
    } else {
        p.to_path_buf()
    }
}

pub fn search(a: SearchArgs) -> Result<()> {
    let index = InvertedIndex::load(index_path(&a.index))?;
    let tokenizer = Tokenizer::new(index.metadata.query_tokenizer.clone().unwrap_or_default());
    let (queries, empty) = load_queries(&a.queries, &tokenizer)?;
    for id in &empty {
        log::warn!("query {id} has no tokens after preprocessing");
    }
    for q in &queries {
        if !q.tokens.is_empty() && q.tokens.iter().all(|t| index.postings(t).is_empty()) {
            log::warn!("query {} has no indexed terms", q.query_id);
        }
    }
    let runs = batch_search_with(&index, &queries, a.depth, Exec::default());
    save_trec_run(&runs, &a.run_tag, &a.out)?;
    let lines: usize = runs.iter().map(|r| r.items.len()).sum();
    log::info!(
        "wrote {lines} results for {} queries to {}",
        queries.len(),
        a.out.display()
    );
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let runs = load_trec_run(&a.run)?;
    let qrels = load_qrels(&a.qrels)?;
    let report = evaluate(&runs, &qrels, a.recall_cutoff)?;
    match a.format {
        ReportFormat::Json => print_json(&report),
        ReportFormat::Table => emit(&report.to_table()),
    }
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let grid = match &a.grid {
        Some(p) => SweepGrid::load(p)?,
        None => SweepGrid::default(),
    };
    grid.validate()?;
    let (doc_cfg, query_cfg) = a.text.configs()?;
    let query_tok = Tokenizer::new(query_cfg.clone());
    let docs = load_doc_vectors(&a.docs, &Tokenizer::new(doc_cfg.clone()))?;
    let table = load_table(&a.table)?;
    let lm = load_lm(&a.lm_corpus, &query_tok, a.lm_floor)?;
    let (queries, empty) = load_queries(&a.queries, &query_tok)?;
    for id in &empty {
        log::warn!("query {id} has no tokens after preprocessing");
    }
    let qrels = load_qrels(&a.qrels)?;
    let options = SweepOptions {
        table_floor: a.table_floor,
        workers: a.workers,
        depth: a.depth,
        exec: exec(a.sequential),
        metadata: IndexMetadata {
            doc_tokenizer: Some(doc_cfg),
            query_tokenizer: Some(query_cfg),
            ..IndexMetadata::default()
        },
        ..SweepOptions::default()
    };
    let inputs = SweepInputs {
        docs: &docs,
        table: &table,
        lm: &lm,
        queries: &queries,
        qrels: &qrels,
    };
    log::info!(
        "sweeping {} cells over {} documents",
        grid.len(),
        docs.len()
    );
    let points = run_sweep(&inputs, &grid, &options)?;
    let metric = match a.metric {
        MetricArg::Map => Metric::Map,
        MetricArg::RAt100 => Metric::RAt100,
    };
    let size = match a.size {
        SizeArg::Bytes => SizeAxis::Bytes,
        SizeArg::Postings => SizeAxis::Postings,
    };
    let frontier = pareto_frontier(&points, metric, size);
    let files = emit_analysis(&points, &grid, &frontier, metric, size, &a.out_dir)?;

    let mut inputs = vec![
        a.docs.as_path(),
        a.table.as_path(),
        a.lm_corpus.as_path(),
        a.queries.as_path(),
        a.qrels.as_path(),
    ];
    inputs.extend(a.grid.as_deref());
    inputs.extend(a.text.stopword_files());
    let params = json!({
        "grid": grid,
        "lm_floor": a.lm_floor,
        "table_floor": a.table_floor,
        "depth": a.depth,
        "workers": a.workers,
        "metric": metric,
        "size_axis": size,
    });
    RunManifest::new("sweep", params, &inputs)?.write(&a.out_dir)?;
    print_json(&json!({
        "points": points.len(),
        "frontier": frontier.frontier.len(),
        "files": files,
    }))
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let spec = psq::synthetic::SyntheticSpec {
        docs: a.docs,
        topics: a.topics,
        parallel_pairs: a.parallel_pairs,
        seed: a.seed,
        ..Default::default()
    };
    let data = psq::synthetic::generate(&spec);
    let dir = &a.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let join = |t: &TokenSequence| t.tokens().join(" ");

    let mut parallel = String::new();
    let mut lm = String::new();
    for (s, t) in data.parallel.pairs() {
        writeln!(parallel, "{}\t{}", join(s), join(t))?;
        writeln!(lm, "{}", join(t))?;
    }
    let mut docs = String::new();
    for (id, t) in &data.docs {
        writeln!(docs, "{}", json!({ "id": id, "text": join(t) }))?;
    }
    let mut queries = String::new();
    for q in &data.queries {
        writeln!(queries, "{}\t{}", q.query_id, join(&q.tokens))?;
    }
    let mut qrels = String::new();
    let mut by_query: BTreeMap<&str, Vec<(&str, u32)>> = BTreeMap::new();
    for q in &data.queries {
        for (id, _) in &data.docs {
            if let Some(g) = data.qrels.grade(&q.query_id, id) {
                by_query.entry(&q.query_id).or_default().push((id, g));
            }
        }
    }
    for (qid, judged) in by_query {
        for (doc, grade) in judged {
            writeln!(qrels, "{qid} 0 {doc} {grade}")?;
        }
    }
    for (name, body) in [
        ("parallel.tsv", parallel),
        ("lm.txt", lm),
        ("docs.jsonl", docs),
        ("queries.tsv", queries),
        ("qrels.txt", qrels),
    ] {
        let p = dir.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    log::info!("wrote synthetic collection to {}", dir.display());
    Ok(())
}
