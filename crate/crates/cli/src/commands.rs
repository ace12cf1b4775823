//! Subcommand implementations. Every command resolves its inputs from the
//! merged configuration, checks that input files exist up front (a missing
//! file is a configuration error, not a data error), does its work through
//! the processing library, and records a provenance JSON naming every
//! parameter that shaped the output.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use lrpeeg::{
    bandpass, baseline_subtract, class_average, conservation_report, decimate, derive_seed,
    envelope, extract_epochs, generate, load_mlp_model, mean_map, read_epochs, read_recording,
    read_relevance_csv, relevance_propagate, render_heatmap, render_topography, run_holdout,
    run_loo, run_transfer, save_mlp_model, time_average, topography, train_transfer,
    vectorize_epoch, write_epochs, write_recording, write_relevance_csv, write_topography_csv,
    BandpassSpec, EpochSet, LdaModel, ModelSpec, Montage, RelevanceMap, SpatialFilterBank,
    SynthSpec, TrainedModel,
};
use serde::{Deserialize, Serialize};

use crate::config::{require_file, ModelChoice, EvalMode, PipelineConfig, PreprocessMode};
use crate::{CliError, RenderArgs, SynthArgs};

/// Everything that shaped an output file, stored next to it.
#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a PipelineConfig,
}

fn write_provenance(target: &Path, command: &str, cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut path = target.as_os_str().to_owned();
    path.push(".provenance.json");
    let out = BufWriter::new(File::create(PathBuf::from(path))?);
    serde_json::to_writer_pretty(
        out,
        &Provenance {
            tool: "lrpeeg",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            config: cfg,
        },
    )
    .map_err(lrpeeg::Error::from)?;
    Ok(())
}

fn write_json(value: &impl Serialize, path: &Path) -> Result<(), CliError> {
    let out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(out, value).map_err(lrpeeg::Error::from)?;
    Ok(())
}

fn output_path<'a>(path: &'a Option<PathBuf>, field: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Config(format!("missing required path: --{field}")))
}

/// Serialized form of a fitted spatial-filter + discriminant model.
#[derive(Serialize, Deserialize)]
struct CspLdaFile {
    kind: String,
    bank: SpatialFilterBank,
    lda: LdaModel,
}

pub fn synth(cfg: &PipelineConfig, args: &SynthArgs) -> Result<(), CliError> {
    let out = output_path(&cfg.recording, "recording")?;
    let spec = SynthSpec {
        n_channels: args.n_channels,
        n_trials_per_class: args.n_trials_per_class,
        fs: args.fs,
        carrier_hz: args.carrier_hz,
        modulation_depth: args.modulation_depth,
        discriminative_channels: [
            args.class0_channels.iter().copied().collect(),
            args.class1_channels.iter().copied().collect(),
        ],
        noise_sigma: args.noise_sigma,
        seed: derive_seed(cfg.seed, "synth"),
    };
    let (recording, truth) = generate(&spec)?;
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    write_recording(&recording, out)?;

    let mut truth_path = out.as_os_str().to_owned();
    truth_path.push(".truth.json");
    write_json(&truth, &PathBuf::from(truth_path))?;
    write_provenance(out, "synth", cfg)?;

    println!(
        "wrote {}: {} samples x {} channels, {} trials",
        out.display(),
        recording.n_samples(),
        recording.n_channels(),
        recording.markers.len()
    );
    Ok(())
}

pub fn preprocess(cfg: &PipelineConfig) -> Result<(), CliError> {
    let input = require_file(&cfg.recording, "recording")?;
    let out = output_path(&cfg.epochs, "epochs")?;

    let raw = read_recording(input)?;
    let decimated = decimate(&raw, cfg.target_fs)?;
    let band = BandpassSpec::new(cfg.band_hz[0], cfg.band_hz[1]);
    let filtered = bandpass(&decimated, &band)?;
    let window = (cfg.epoch_window_ms[0], cfg.epoch_window_ms[1]);
    let epochs = extract_epochs(&filtered, window, cfg.classes)?;

    let processed = match cfg.preprocess_mode {
        PreprocessMode::Csp => epochs,
        PreprocessMode::Dnn => {
            let baseline_window = (cfg.baseline_window_ms[0], cfg.baseline_window_ms[1]);
            let baseline_epochs = extract_epochs(&filtered, baseline_window, cfg.classes)?;
            baseline_subtract(&envelope(&epochs)?, &envelope(&baseline_epochs)?)?
        }
    };

    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    write_epochs(&processed, out)?;
    write_provenance(out, "preprocess", cfg)?;

    println!(
        "wrote {}: {} trials x {} timepoints x {} channels",
        out.display(),
        processed.n_trials(),
        processed.n_timepoints(),
        processed.n_channels()
    );
    Ok(())
}

fn model_spec(cfg: &PipelineConfig) -> ModelSpec {
    match cfg.model {
        ModelChoice::CspLda => ModelSpec::CspLda {
            n_pairs: cfg.n_pairs,
        },
        // Transfer shares the network spec; its protocol differs, not the model.
        ModelChoice::Dnn | ModelChoice::DnnTransfer => ModelSpec::Dnn {
            train: cfg.train.with_seed(derive_seed(cfg.seed, "train")),
        },
    }
}

fn load_transfer_subjects(cfg: &PipelineConfig) -> Result<Vec<EpochSet>, CliError> {
    if cfg.transfer_epochs.is_empty() {
        return Err(CliError::Config(
            "transfer needs at least one training subject via --transfer-epochs".into(),
        ));
    }
    cfg.transfer_epochs
        .iter()
        .map(|path| {
            if !path.is_file() {
                return Err(CliError::Config(format!(
                    "input file '{}' (--transfer-epochs) does not exist",
                    path.display()
                )));
            }
            Ok(read_epochs(path)?)
        })
        .collect()
}

pub fn train(cfg: &PipelineConfig) -> Result<(), CliError> {
    let out = output_path(&cfg.model_path, "model-path")?;
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }

    match cfg.model {
        ModelChoice::CspLda | ModelChoice::Dnn => {
            let data = read_epochs(require_file(&cfg.epochs, "epochs")?)?;
            match lrpeeg::fit(&model_spec(cfg), &data)? {
                TrainedModel::CspLda { bank, lda } => {
                    write_json(
                        &CspLdaFile {
                            kind: "csp-lda".into(),
                            bank,
                            lda,
                        },
                        out,
                    )?;
                }
                TrainedModel::Dnn { model } => save_mlp_model(out, &model)?,
            }
            println!("wrote {}", out.display());
        }
        ModelChoice::DnnTransfer => {
            let subjects = load_transfer_subjects(cfg)?;
            let train_cfg = cfg.train.with_seed(derive_seed(cfg.seed, "train"));
            let models = train_transfer(&subjects, &train_cfg, cfg.n_orders)?;
            for (order, model) in models.iter().enumerate() {
                let mut path = out.as_os_str().to_owned();
                path.push(format!(".order{order}"));
                save_mlp_model(&PathBuf::from(path), model)?;
            }
            println!("wrote {} models at {}.order*", models.len(), out.display());
        }
    }
    write_provenance(out, "train", cfg)?;
    Ok(())
}

pub fn evaluate(cfg: &PipelineConfig) -> Result<(), CliError> {
    let metrics = match cfg.model {
        ModelChoice::DnnTransfer => {
            let subjects = load_transfer_subjects(cfg)?;
            let test = read_epochs(require_file(&cfg.test_epochs, "test-epochs")?)?;
            let train_cfg = cfg.train.with_seed(derive_seed(cfg.seed, "train"));
            run_transfer(&subjects, &test, &train_cfg, cfg.n_orders)?
        }
        _ => {
            let spec = model_spec(cfg);
            match cfg.eval_mode {
                EvalMode::Holdout => {
                    let train = read_epochs(require_file(&cfg.epochs, "epochs")?)?;
                    let test = read_epochs(require_file(&cfg.test_epochs, "test-epochs")?)?;
                    run_holdout(&spec, &train, &test)?.0
                }
                EvalMode::LeaveOneOut => {
                    let data = read_epochs(require_file(&cfg.epochs, "epochs")?)?;
                    run_loo(&spec, &data, cfg.seed)?
                }
            }
        }
    };

    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("metrics.json");
    write_json(&metrics, &path)?;
    write_provenance(&path, "evaluate", cfg)?;

    println!(
        "accuracy {:.4} over {} folds -> {}",
        metrics.accuracy,
        metrics.folds.len(),
        path.display()
    );
    Ok(())
}

pub fn explain(cfg: &PipelineConfig) -> Result<(), CliError> {
    if cfg.model == ModelChoice::CspLda {
        return Err(CliError::Config(
            "relevance explanation decomposes network decisions; set --model dnn \
             and point --model-path at a trained network"
                .into(),
        ));
    }
    let data = read_epochs(require_file(&cfg.epochs, "epochs")?)?;
    let model = load_mlp_model(require_file(&cfg.model_path, "model-path")?)?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut class_maps: [Vec<RelevanceMap>; 2] = [Vec::new(), Vec::new()];
    for trial in 0..data.n_trials() {
        let map = relevance_propagate(&model, &data, trial, &cfg.lrp)?;
        write_relevance_csv(&map, cfg.out_dir.join(format!("trial_{trial:04}.csv")))?;
        render_heatmap(&map, cfg.out_dir.join(format!("trial_{trial:04}.png")))?;

        let x = vectorize_epoch(&data, trial)?;
        let report = conservation_report(&model, &x, &cfg.lrp)?;
        write_json(
            &report,
            &cfg.out_dir.join(format!("trial_{trial:04}.conservation.json")),
        )?;

        class_maps[usize::from(data.labels[trial])].push(map);
    }

    for (class, maps) in class_maps.iter().enumerate() {
        if maps.is_empty() {
            continue;
        }
        let mean = RelevanceMap::new(
            data.channels.clone(),
            data.time_ms.clone(),
            mean_map(maps)?,
        )?;
        write_relevance_csv(&mean, cfg.out_dir.join(format!("class_{class}_mean.csv")))?;
        render_heatmap(&mean, cfg.out_dir.join(format!("class_{class}_mean.png")))?;

        let channel_mean = class_average(maps)?;
        let mut text = String::from("channel,relevance\n");
        for (name, value) in data.channels.iter().zip(channel_mean.iter()) {
            text.push_str(&format!("{name},{value}\n"));
        }
        std::fs::write(
            cfg.out_dir.join(format!("class_{class}_channel_mean.csv")),
            text,
        )?;
    }

    let marker = cfg.out_dir.join("explain");
    write_provenance(&marker, "explain", cfg)?;
    println!(
        "wrote relevance files for {} trials -> {}",
        data.n_trials(),
        cfg.out_dir.display()
    );
    Ok(())
}

// Rendering re-projects an existing relevance CSV; it takes everything it
// needs from the file and the flags, so the pipeline config is unused.
pub fn render(_cfg: &PipelineConfig, args: &RenderArgs) -> Result<(), CliError> {
    if args.heatmap.is_none() && args.topo.is_none() {
        return Err(CliError::Config(
            "nothing to render: pass --heatmap and/or --topo".into(),
        ));
    }
    if !args.map.is_file() {
        return Err(CliError::Config(format!(
            "input file '{}' (--map) does not exist",
            args.map.display()
        )));
    }
    let map = read_relevance_csv(&args.map)?;

    if let Some(path) = &args.heatmap {
        render_heatmap(&map, path)?;
        println!("wrote {}", path.display());
    }
    if let Some(base) = &args.topo {
        let values = match args.at_time_ms {
            Some(at) => {
                let nearest = map
                    .time_ms
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - at).abs().total_cmp(&(b.1 - at).abs()))
                    .map(|(i, _)| i)
                    .ok_or_else(|| CliError::Config("relevance map has no timepoints".into()))?;
                map.values.row(nearest).to_vec()
            }
            None => time_average(&map).to_vec(),
        };
        let grid = topography(&values, &map.channels, &Montage::standard(), args.grid_size)?;
        let csv = base.with_extension("csv");
        let png = base.with_extension("png");
        write_topography_csv(&grid, &csv)?;
        render_topography(&grid, &png)?;
        println!("wrote {} and {}", csv.display(), png.display());
    }
    Ok(())
}
