use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use netlines_core::datagen::{gen_clumps, gen_parity, gen_waveforms};
use netlines_core::io::{load_monks, parse_features, read_dataset, write_dataset};
use netlines_core::minimerror::confidence;
use netlines_core::{ClassId, Dataset, GrowthConfig, MinimerrorConfig};

use crate::error::{CliError, CliResult};
use crate::model::ModelFile;
use crate::protocol::{holdout, leave_one_out, run_once, score};
use crate::report::EvalReport;
use crate::train::{fit, Mode, TrainOptions};

#[derive(Debug, Parser)]
#[command(name = "netlines", version, about = "Grow binary-threshold networks unit by unit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it to a file.
    Train(TrainArgs),
    /// Print the predicted class of every row.
    Predict(PredictArgs),
    /// Score a model, or run a holdout / leave-one-out / test-file protocol.
    Eval(EvalArgs),
    /// Generate a benchmark dataset.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MulticlassArg {
    Binary,
    Wta,
    Ton,
    TonEnsemble,
}

#[derive(Debug, Clone, Args)]
pub struct GrowthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Learning rate.
    #[arg(long, default_value_t = 0.02)]
    pub epsilon: f64,
    /// Increment of 1/T+ per epoch.
    #[arg(long, default_value_t = 1e-3)]
    pub annealing: f64,
    /// Ratio T-/T+.
    #[arg(long, default_value_t = 6.0)]
    pub theta: f64,
    /// Starting T+ (default 0.5; 0 means sqrt(N+1)).
    #[arg(long)]
    pub t0: Option<f64>,
    /// T+ below which an error-free unit stops training.
    #[arg(long, default_value_t = 0.2)]
    pub tstop: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_epochs: usize,
    /// Maximum hidden units per network (default: number of patterns).
    #[arg(long)]
    pub hmax: Option<usize>,
    /// Tolerated training errors per network.
    #[arg(long, default_value_t = 0)]
    pub emax: usize,
    /// Disable the constructed fallback units.
    #[arg(long)]
    pub no_fallback: bool,
    #[arg(long, value_enum)]
    pub multiclass: Option<MulticlassArg>,
    /// Number of chains in a ton-ensemble (odd).
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Class name mapped to +1 in binary mode.
    #[arg(long)]
    pub positive: Option<String>,
}

impl GrowthArgs {
    pub fn options(&self) -> TrainOptions {
        let initial_temperature = match self.t0 {
            Some(0.0) => None,
            Some(t) => Some(t),
            None => MinimerrorConfig::default().initial_temperature,
        };
        let trainer = MinimerrorConfig {
            learning_rate: self.epsilon,
            annealing_rate: self.annealing,
            theta: self.theta,
            initial_temperature,
            stop_temperature: self.tstop,
            max_epochs: self.max_epochs,
            seed: self.seed,
        };
        TrainOptions {
            growth: GrowthConfig {
                hmax: self.hmax,
                emax: self.emax,
                trainer,
                fallback: !self.no_fallback,
            },
            mode: match self.multiclass {
                None => Mode::Auto,
                Some(MulticlassArg::Binary) => Mode::Binary,
                Some(MulticlassArg::Wta) => Mode::Wta,
                Some(MulticlassArg::Ton) => Mode::Ton,
                Some(MulticlassArg::TonEnsemble) => Mode::TonEnsemble,
            },
            ensemble: self.ensemble,
            positive: self.positive.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Training CSV (or a Monk's file with --monks).
    #[arg(long)]
    pub data: PathBuf,
    /// Read the data in the Monk's format.
    #[arg(long)]
    pub monks: bool,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub growth: GrowthArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub monks: bool,
    /// Also print the confidence of every unit at this temperature.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Write predictions here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Score this trained model on --data.
    #[arg(long, conflicts_with_all = ["holdout", "loo"])]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    /// Fixed test set.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub monks: bool,
    /// Draw this many training patterns from --data per run.
    #[arg(long, conflicts_with = "loo")]
    pub holdout: Option<usize>,
    #[arg(long, default_value_t = 1, requires = "holdout")]
    pub repeats: usize,
    /// Leave-one-out over --data.
    #[arg(long)]
    pub loo: bool,
    /// Write one CSV row per run here.
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
    #[command(flatten)]
    pub growth: GrowthArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Parity,
    Clumps,
    Waveforms,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    /// Number of inputs (parity, clumps).
    #[arg(long)]
    pub n: Option<usize>,
    /// Mean number of boundaries per ring (clumps).
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
    /// Number of patterns (clumps, waveforms).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Dataset from a CSV file, or from a Monk's file with labels 0 and 1.
pub fn load_data(path: &Path, monks: bool) -> CliResult<Dataset> {
    if monks {
        let set = load_monks(path)?;
        Ok(Dataset::from_binary(&set).with_class_names(vec![(-1, "0".into()), (1, "1".into())]))
    } else {
        Ok(read_dataset(path)?)
    }
}

/// Writes `contents` next to `path` and renames it into place, so a failed
/// run never leaves a partial file.
fn write_atomically(path: &Path, contents: &str) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::from(e)
    })
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
    }
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    let data = load_data(&a.data, a.monks)?;
    let (model, log) = fit(&data, &a.growth.options())?;
    write_atomically(&a.out, &model.to_text())?;
    write!(out, "{}", log.render())?;
    let hidden: Vec<String> = model.hidden_counts().iter().map(ToString::to_string).collect();
    writeln!(
        out,
        "model: {} with H = [{}], {} weights -> {}",
        model.classifier.kind(),
        hidden.join(", "),
        model.weight_count(),
        a.out.display()
    )?;
    Ok(())
}

fn read_rows(path: &Path, monks: bool, n: usize) -> CliResult<Vec<Vec<f64>>> {
    if monks {
        let set = load_monks(path)?;
        Ok((0..set.len()).map(|mu| set.features(mu).to_vec()).collect())
    } else {
        Ok(parse_features(fs::File::open(path)?, n)?)
    }
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = ModelFile::load(&a.model)?;
    if let Some(t) = a.confidence {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Usage(format!("confidence temperature must be positive, got {t}")));
        }
    }
    let rows = read_rows(&a.data, a.monks, model.inputs)?;
    let mut text = String::new();
    let networks = model.classifier.networks();
    let mut header = vec!["prediction".to_string()];
    if a.confidence.is_some() {
        for (k, net) in networks.iter().enumerate() {
            header.extend((1..=net.hidden_count()).map(|j| format!("net{}_unit{j}", k + 1)));
            header.push(format!("net{}_output", k + 1));
        }
    }
    text.push_str(&header.join(","));
    text.push('\n');
    for x in &rows {
        let mut fields = vec![model.prediction_name(model.predict(x)?)];
        if let Some(t) = a.confidence {
            let mut input = vec![1.0];
            input.extend(x);
            for net in &networks {
                for unit in net.hidden() {
                    fields.push(confidence(unit.as_slice(), &input, t)?.to_string());
                }
                let ir = net.compute_ir(x)?.as_f64();
                let c = if net.ls_flag() {
                    confidence(net.hidden()[0].as_slice(), &input, t)?
                } else {
                    confidence(net.output(), &ir, t)?
                };
                fields.push(c.to_string());
            }
        }
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    match &a.out {
        Some(path) => write_atomically(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let data = load_data(&a.data, a.monks)?;
    let test = match &a.test {
        Some(p) => Some(load_data(p, a.monks)?),
        None => None,
    };
    let opts = a.growth.options();
    let report = if let Some(path) = &a.model {
        let model = ModelFile::load(path)?;
        let run = match &test {
            // --data is the training set, --test the held-out one
            Some(t) => score(0, &model, Some(&data), Some(t))?,
            None => score(0, &model, None, Some(&data))?,
        };
        EvalReport::new("trained model", vec![run])
    } else if a.loo {
        leave_one_out(&data, &opts)?
    } else if let Some(p) = a.holdout {
        holdout(&data, p, a.repeats, test.as_ref(), &opts)?
    } else if let Some(t) = &test {
        EvalReport::new("test file", vec![run_once(0, &data, Some(t), &opts)?])
    } else {
        return Err(CliError::Usage(
            "eval needs --model, --loo, --holdout or --test".into(),
        ));
    };
    write!(out, "{}", report.summary())?;
    if let Some(path) = &a.report_csv {
        write_atomically(path, &report.to_csv())?;
    }
    Ok(())
}

fn class_balance(data: &Dataset) -> String {
    data.classes()
        .iter()
        .map(|&c: &ClassId| {
            let name = data.class_name(c).map_or_else(|| c.to_string(), str::to_owned);
            format!("{name}: {}", data.class_count(c))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| CliError::Usage(format!("{flag} is required for this generator")))
    };
    let data = match a.generator {
        Generator::Parity => Dataset::from_binary(&gen_parity(need(a.n, "--n")?)?),
        Generator::Clumps => Dataset::from_binary(&gen_clumps(
            need(a.n, "--n")?,
            a.k,
            need(a.p, "--p")?,
            a.seed,
        )?),
        Generator::Waveforms => gen_waveforms(need(a.p, "--p")?, a.seed)?,
    };
    let mut csv = Vec::new();
    write_dataset(&data, &mut csv)?;
    let summary = format!(
        "P = {}, N = {}, classes {}",
        data.len(),
        data.dim(),
        class_balance(&data)
    );
    match &a.out {
        Some(path) => {
            write_atomically(path, &String::from_utf8_lossy(&csv))?;
            writeln!(out, "{summary}")?;
        }
        None => {
            out.write_all(&csv)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}
