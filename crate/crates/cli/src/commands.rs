use std::path::Path;

use hvtm::data::{summarize, write_sweep_table, Model, RunRecord};
use hvtm::experiment::{
    encode_splits, prepare_data, run_ensemble, sweep_cells, xor_samples, PreparedData, RawSplits,
};
use hvtm::explain::{
    explain_machine, negated_literal_fraction, render_text, to_jsonl, DecodeRole,
};
use hvtm::tm::Sample;
use hvtm::{capacity, overlap_likelihood, TokenCodebook};
use serde_json::json;

use crate::config::{run_config, sweep_config};
use crate::output::{prepare_out_dir, CliError, RunManifest};
use crate::{AxisFlags, ExplainFormat, RunFlags, Split};

fn records_jsonl(records: &[RunRecord]) -> Result<String, CliError> {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

pub fn train(flags: &RunFlags, out: &Path) -> Result<(), CliError> {
    let cfg = run_config(flags)?;
    let data = prepare_data(&cfg)?;
    let outcomes = run_ensemble(&cfg, &data)?;

    let inputs = cfg.dataset.input_paths();
    prepare_out_dir(out, &inputs)?;
    let mut outputs = Vec::new();
    for o in &outcomes {
        let dir = format!("replica-{}", o.record.ensemble);
        std::fs::create_dir_all(out.join(&dir))?;
        for (name, model) in [("best", &o.best_model), ("final", &o.final_model)] {
            let rel = format!("{dir}/{name}.model.json");
            model.save(out.join(&rel))?;
            outputs.push(rel);
        }
    }
    let records: Vec<RunRecord> = outcomes.into_iter().map(|o| o.record).collect();
    write_sweep_table(&records, out.join("curves.csv"), out.join("summary.csv"))?;
    std::fs::write(out.join("records.jsonl"), records_jsonl(&records)?)?;
    outputs.extend(["curves.csv".to_string(), "summary.csv".to_string()]);

    let mut manifest = RunManifest::new("train", &cfg);
    manifest.add_inputs(&inputs)?;
    manifest.data = data.manifests();
    manifest.add_outputs(out, &outputs)?;
    manifest.write(&out.join("manifest.json"))?;

    let finals: Vec<f64> = records
        .iter()
        .filter_map(|r| r.final_metrics.as_ref().map(|m| m.accuracy))
        .collect();
    println!(
        "{}",
        json!({
            "out": out,
            "replicas": records.len(),
            "final_accuracy": finals,
        })
    );
    Ok(())
}

/// Test split encoded with the model's encoder, labels mapped onto the
/// model's class names.
fn eval_samples(model: &Model, data: &PreparedData) -> Result<Vec<Sample>, CliError> {
    let samples = match &data.splits {
        RawSplits::Xor => xor_samples()
            .into_iter()
            .map(|(x, y)| {
                if x.size() != model.encoder.output_size() {
                    return Err(hvtm::Error::DimensionMismatch {
                        expected: model.encoder.output_size(),
                        found: x.size(),
                    });
                }
                Ok((x, y))
            })
            .collect::<hvtm::Result<Vec<_>>>()?,
        RawSplits::Images { test, .. } => test
            .samples
            .iter()
            .map(|(x, y)| Ok((model.encoder.encode_image(x)?, *y)))
            .collect::<hvtm::Result<Vec<_>>>()?,
        RawSplits::Tsv { test, .. } => test
            .samples
            .iter()
            .map(|(p, y)| Ok((model.encoder.encode_payload(p)?, *y)))
            .collect::<hvtm::Result<Vec<_>>>()?,
    };
    let remap: Vec<usize> = data
        .class_names
        .iter()
        .map(|n| {
            model.class_names.iter().position(|m| m == n).ok_or_else(|| {
                CliError::data(format!("dataset class `{n}` is unknown to the model"))
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(samples
        .into_iter()
        .map(|(x, y)| (x, remap[y]))
        .collect())
}

pub fn eval(model_path: &Path, flags: &RunFlags, out: Option<&Path>) -> Result<(), CliError> {
    let model = Model::load(model_path)?;
    let cfg = run_config(flags)?;
    let data = prepare_data(&cfg)?;
    let samples = eval_samples(&model, &data)?;
    let metrics = model.machine.evaluate(&samples)?;
    let text = serde_json::to_string_pretty(&metrics)?;
    println!("{text}");
    if let Some(dir) = out {
        let mut inputs = cfg.dataset.input_paths();
        inputs.push(model_path.to_path_buf());
        prepare_out_dir(dir, &inputs)?;
        std::fs::write(dir.join("metrics.json"), format!("{text}\n"))?;
        let mut manifest = RunManifest::new("eval", &cfg);
        manifest.add_inputs(&inputs)?;
        manifest.data = data.manifests();
        manifest.add_outputs(dir, &["metrics.json".to_string()])?;
        manifest.write(&dir.join("manifest.json"))?;
    }
    Ok(())
}

pub fn sweep(flags: &RunFlags, axes: &AxisFlags, out: &Path) -> Result<(), CliError> {
    let sc = sweep_config(flags, axes)?;
    let data = prepare_data(&sc.run)?;
    let inputs = sc.run.dataset.input_paths();
    prepare_out_dir(out, &inputs)?;

    // An existing manifest must describe the same sweep; completed cells are
    // then reused.
    let manifest_path = out.join("manifest.json");
    let config_value = serde_json::to_value(&sc)?;
    if manifest_path.exists() {
        let prev = crate::config::read_config_value(&manifest_path)?;
        if prev != config_value {
            return Err(CliError::usage(format!(
                "{} holds a different sweep; choose another --out",
                out.display()
            )));
        }
    } else {
        RunManifest::new("sweep", &sc).write(&manifest_path)?;
    }
    std::fs::create_dir_all(out.join("cells"))?;

    let mut records = Vec::new();
    let mut outputs = Vec::new();
    for (i, cell) in sweep_cells(&sc.run, &sc.axes).iter().enumerate() {
        let r = cell.resolved();
        let name = format!(
            "cells/{i:03}-d{}-n{}-c{}.json",
            cell.hv_size, cell.nbits, r.clauses_per_class
        );
        let path = out.join(&name);
        let cell_records: Vec<RunRecord> = if path.exists() {
            log::info!("reusing completed cell {name}");
            serde_json::from_str(&std::fs::read_to_string(&path)?)?
        } else {
            log::info!("running cell {name}");
            let rs: Vec<RunRecord> = run_ensemble(cell, &data)?
                .into_iter()
                .map(|o| o.record)
                .collect();
            let tmp = path.with_extension("json.partial");
            std::fs::write(&tmp, serde_json::to_string(&rs)?)?;
            std::fs::rename(&tmp, &path)?;
            rs
        };
        records.extend(cell_records);
        outputs.push(name);
    }
    write_sweep_table(&records, out.join("sweep_long.csv"), out.join("sweep_summary.csv"))?;
    outputs.extend(["sweep_long.csv".to_string(), "sweep_summary.csv".to_string()]);

    let mut manifest = RunManifest::new("sweep", &sc);
    manifest.add_inputs(&inputs)?;
    manifest.data = data.manifests();
    manifest.add_outputs(out, &outputs)?;
    manifest.write(&manifest_path)?;

    let cells: Vec<_> = summarize(&records)
        .iter()
        .map(|c| {
            json!({
                "hv_size": c.key.0,
                "nbits": c.key.1,
                "clauses": c.key.2,
                "max_accuracy_mean": c.max_accuracy.0,
                "final_accuracy_mean": c.final_accuracy.0,
            })
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&cells)?);
    Ok(())
}

pub fn explain(
    model_path: &Path,
    codebooks: Option<&Path>,
    shift: i64,
    top_k: usize,
    format: ExplainFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let model = Model::load(model_path)?;
    let extra_book = codebooks.map(TokenCodebook::load).transpose()?;
    let extra: Vec<DecodeRole> = extra_book
        .iter()
        .map(|cb| DecodeRole::new("token", cb, shift))
        .collect();
    let reports = explain_machine(&model.machine, &model.encoder, &extra, Some(top_k))?;
    let fraction = negated_literal_fraction(model.machine.banks());
    let summary = serde_json::to_string(&json!({ "negated_literal_fraction": fraction }))?;
    let (body, file) = match format {
        ExplainFormat::Jsonl => (format!("{}{summary}\n", to_jsonl(&reports)?), "reports.jsonl"),
        ExplainFormat::Text => {
            let o = &fraction.overall;
            let mut t = render_text(&reports, &model.class_names);
            t.push_str(&format!(
                "negated literal fraction {:.6} ({} of {} included literals)\n",
                o.fraction, o.negated, o.included
            ));
            (t, "reports.txt")
        }
    };
    match out {
        None => print!("{body}"),
        Some(dir) => {
            let mut inputs = vec![model_path.to_path_buf()];
            inputs.extend(codebooks.map(Path::to_path_buf));
            prepare_out_dir(dir, &inputs)?;
            std::fs::write(dir.join(file), &body)?;
            let cfg = json!({
                "model": model_path,
                "codebooks": codebooks,
                "codebook_shift": shift,
                "top_k": top_k,
            });
            let mut manifest = RunManifest::new("explain", &cfg);
            manifest.add_inputs(&inputs)?;
            manifest.add_outputs(dir, &[file.to_string()])?;
            manifest.write(&dir.join("manifest.json"))?;
        }
    }
    Ok(())
}

pub fn encode(flags: &RunFlags, split: Split, replica: usize, out: &Path) -> Result<(), CliError> {
    let cfg = run_config(flags)?;
    let data = prepare_data(&cfg)?;
    let (encoder, train, test) = encode_splits(&cfg, &data, cfg.encoder_seed(replica))?;
    let samples = if split == Split::Train { train } else { test };
    let rows: Vec<_> = samples
        .iter()
        .map(|(x, y)| json!({ "label": y, "positions": x.positions() }))
        .collect();
    let cache = json!({
        "version": 1,
        "split": if split == Split::Train { "train" } else { "test" },
        "size": encoder.output_size(),
        "class_names": data.class_names,
        "encoder": encoder,
        "samples": rows,
    });
    let inputs = cfg.dataset.input_paths();
    if inputs.iter().any(|p| p == out) {
        return Err(CliError::usage("output file is an input path"));
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out, serde_json::to_string(&cache)?)?;

    let run = json!({ "run": cfg, "split": cache["split"], "replica": replica });
    let mut manifest = RunManifest::new("encode", &run);
    manifest.add_inputs(&inputs)?;
    manifest.data = data.manifests();
    let dir = out.parent().unwrap_or(Path::new("."));
    let name = out.file_name().unwrap_or_default().to_string_lossy().to_string();
    manifest.add_outputs(dir, &[name.clone()])?;
    manifest.write(&dir.join(format!("{name}.manifest.json")))?;
    Ok(())
}

pub fn info(hv_size: u64, nbits: u64, tokens: u64) -> Result<(), CliError> {
    if hv_size == 0 || nbits == 0 {
        return Err(CliError::usage("--hv-size and --nbits must be positive"));
    }
    let p = u32::try_from(nbits).map_err(|_| CliError::usage("--nbits is too large"))?;
    let cap = capacity(hv_size, nbits)?;
    let digits = cap.to_string();
    let v = json!({
        "hv_size": hv_size,
        "nbits": nbits,
        "tokens": tokens,
        "capacity": digits,
        "capacity_digits": digits.len(),
        "overlap_likelihood": overlap_likelihood(hv_size, p, tokens),
    });
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}
