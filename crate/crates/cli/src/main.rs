use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use petd_core::bls::SigningKey;
use petd_core::detector::{generate_weights, load_weights, save_weights, ModelShape};
use petd_core::grid::{
    attack_success_probability, detect_chain, recheck_report, run_period, AttackProbabilityParams,
    PeriodReport, Scenario, SimConfig, Stage,
};
use petd_core::ledger::{bench_block_time, validate_chain, Chain, ChainStatus};
use petd_core::secure_agg::MeterSecret;
use petd_core::{Error, FixedPointCodec, MeterId, Result, SystemParams};

#[derive(Parser)]
#[command(name = "petd", version, about = "Privacy-preserving electricity theft detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit system parameters and meter key material.
    Keygen {
        #[arg(long, default_value_t = 4)]
        meters: u32,
        /// Deterministic keys; OS entropy when absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for params.toml and meters.json; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full reporting, consensus, judgement and detection pipeline.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the classifier on every meter-period stored in a chain.
    Detect {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Re-check every verdict of a period report and validate its chains.
    Judge {
        #[arg(long)]
        report: PathBuf,
    },
    /// Time block assembly plus consensus over a range of meter counts.
    BenchBlock {
        #[arg(long, default_value_t = 50)]
        min: usize,
        #[arg(long, default_value_t = 300)]
        max: usize,
        #[arg(long, default_value_t = 50)]
        step: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Probability that an attacker alters a reading at a given stage.
    Probe {
        #[arg(long)]
        scenario: Scenario,
        #[arg(long)]
        stage: Stage,
        #[arg(long, default_value_t = 10)]
        meters: u32,
        #[arg(long, default_value_t = 0.1)]
        p_sm: f64,
        #[arg(long, default_value_t = 0.1)]
        p_c: f64,
        #[arg(long, default_value_t = 0.1)]
        p_mn: f64,
        #[arg(long, default_value_t = 0.1)]
        p_k: f64,
    },
    /// Write a shape-valid, untrained weight file.
    GenWeights {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 48)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 300)]
        units: usize,
        #[arg(long, default_value_t = 2)]
        lstm_layers: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct MeterKeys {
    meter: MeterId,
    /// Signing and key-agreement secret.
    x: String,
    s: [String; 2],
    verify_key: String,
    agreement_pk: String,
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Keygen { meters, seed, out } => {
            let params = SystemParams::default();
            let mut rng = match seed {
                Some(s) => ChaCha20Rng::seed_from_u64(s),
                None => ChaCha20Rng::from_entropy(),
            };
            let keys = (1..=meters)
                .map(|i| {
                    let secret = MeterSecret::generate(&mut rng);
                    let sk = SigningKey::new(secret.x)?;
                    Ok(MeterKeys {
                        meter: MeterId(i),
                        x: hex::encode(secret.x.to_bytes()),
                        s: [hex::encode(secret.s[0].to_bytes()), hex::encode(secret.s[1].to_bytes())],
                        verify_key: hex::encode(sk.verify_key().to_bytes()),
                        agreement_pk: hex::encode(secret.agreement_public().0.to_bytes()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let keys_json = serde_json::to_string_pretty(&keys).expect("keys serialize");
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
                    write(&dir.join("params.toml"), &params.to_toml())?;
                    write(&dir.join("meters.json"), &keys_json)?;
                    println!("wrote params.toml and meters.json for {meters} meters to {}", dir.display());
                }
                None => {
                    println!("{}", params.to_toml());
                    println!("{keys_json}");
                }
            }
        }
        Command::Simulate { config, seed, out } => {
            let mut cfg = SimConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let name = out
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::Io(format!("bad output path {}", out.display())))?
                .to_string();
            let outcome = run_period(&cfg, &name)?;
            let dir = out.parent().unwrap_or(Path::new(""));
            write(&out, &outcome.report.to_json())?;
            for (area, chain) in outcome.report.areas.iter().zip(&outcome.chains) {
                write(&dir.join(&area.chain_file), &chain.to_json())?;
            }
            print_summary(&outcome.report);
            let t = &outcome.timings;
            println!(
                "time: setup {:.3}s, reporting {:.3}s, consensus {:.3}s, decryption {:.3}s, detection {:.3}s",
                t.setup.as_secs_f64(),
                t.reporting.as_secs_f64(),
                t.consensus.as_secs_f64(),
                t.decryption.as_secs_f64(),
                t.detection.as_secs_f64()
            );
        }
        Command::Detect { chain, weights } => {
            let chain = Chain::from_json(&read(&chain)?).map_err(|e| e.context(chain.display().to_string()))?;
            let params = SystemParams::default();
            if let ChainStatus::BadHeight(h) = validate_chain(&params, &chain) {
                return Err(Error::Decode(format!("chain fails validation at height {h}")));
            }
            let model = load_weights(&weights)?;
            let out = detect_chain(&chain, &model)?;
            println!("{}", serde_json::to_string_pretty(&out).expect("detections serialize"));
        }
        Command::Judge { report } => {
            let text = read(&report)?;
            let parsed = PeriodReport::from_json(&text).map_err(|e| e.context(report.display().to_string()))?;
            let mut ok = true;
            for (area, day, stored, recomputed) in recheck_report(&parsed) {
                println!("area {area} {day}: stored {stored:?}, rule gives {recomputed:?}");
                ok = false;
            }
            let dir = report.parent().unwrap_or(Path::new(""));
            let params = SystemParams::default();
            for a in &parsed.areas {
                let path = dir.join(&a.chain_file);
                let chain = Chain::from_json(&read(&path)?).map_err(|e| e.context(path.display().to_string()))?;
                let status = validate_chain(&params, &chain);
                let head = chain.blocks.last().map(|b| hex::encode(b.hash)).unwrap_or_default();
                if status != ChainStatus::Ok || head != a.chain_head {
                    println!("area {}: chain {status:?}, head {head}", a.area);
                    ok = false;
                }
                let theft = a.days.iter().filter(|d| d.verdict.is_theft()).count();
                println!("area {}: {} days, {theft} theft, chain ok", a.area, a.days.len());
            }
            if !ok {
                eprintln!("error: report does not match the judgement rule or its chains");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::BenchBlock {
            min,
            max,
            step,
            trials,
            seed,
        } => {
            if step == 0 || min > max {
                return Err(Error::Range("need min ≤ max and a positive step".into()));
            }
            let counts: Vec<usize> = (min..=max).step_by(step).collect();
            let rows = bench_block_time(&SystemParams::default(), &counts, trials, seed)?;
            println!("{:>7} {:>12} {:>8}", "meters", "mean_ms", "cv");
            for r in rows {
                println!("{:>7} {:>12.3} {:>8.4}", r.meters, r.mean_secs * 1e3, r.cv);
            }
        }
        Command::Probe {
            scenario,
            stage,
            meters,
            p_sm,
            p_c,
            p_mn,
            p_k,
        } => {
            let p = AttackProbabilityParams {
                meters,
                p_sm,
                p_c,
                p_mn,
                p_k,
            };
            println!("{:e}", attack_success_probability(scenario, stage, &p)?);
        }
        Command::GenWeights {
            out,
            seed,
            d,
            n,
            units,
            lstm_layers,
        } => {
            let shape = ModelShape {
                d,
                n,
                units,
                lstm_layers,
            };
            let model = generate_weights(shape, FixedPointCodec::default(), seed)?;
            save_weights(&model, &out)?;
            println!("wrote {} with layer widths {:?}", out.display(), model.layer_widths());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(report: &PeriodReport) {
    println!("{:>4} {:>10} {:>8} {:>6} {:>10} {:>10}", "area", "day", "verdict", "miner", "e_dtm", "e_sum");
    for a in &report.areas {
        for d in &a.days {
            println!(
                "{:>4} {:>10} {:>8} {:>6} {:>10} {:>10}",
                a.area,
                d.day,
                format!("{:?}", d.verdict).to_lowercase(),
                d.miner,
                d.e_dtm,
                d.e_sum
            );
        }
        println!(
            "area {}: E_TL {:.1}, eps {:.1}, {} blocks, chain {}",
            a.area,
            a.e_tl,
            a.epsilon,
            a.blocks,
            if a.chain_valid { "valid" } else { "INVALID" }
        );
    }
    println!(
        "bytes per report: {} measured, {} amortized",
        report.bytes.measured_per_report, report.bytes.per_period
    );
}
