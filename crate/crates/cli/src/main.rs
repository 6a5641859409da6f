use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use ssbscan::boundary::{tick_stream, write_ticks_csv};
use ssbscan::channel::{apply_channel, ChannelConfig};
use ssbscan::harness::{
    calibrate_threshold, read_iq, run_sweep, run_sweep_with_threads, wilson_interval, write_csv,
    write_iq, CalibrationSetup, SweepConfig, DEFAULT_TARGET_FALSE_ALARM, Z95,
};
use ssbscan::numerology::{CarrierConfig, GSCN_BASE_HZ, GSCN_MIN};
use ssbscan::rx_sync::{PssSearchConfig, DEFAULT_FIR_TAPS};
use ssbscan::sequences::{
    dmrs_sequence, golden_line_bpsk, golden_line_qpsk, pss_sequence, sss_sequence,
};
use ssbscan::ssb_grid::write_grid_csv;
use ssbscan::tx_phy::schedule_frames;
use ssbscan::{
    assemble_ssb, cell_search, CellSearchConfig, Gscn, NumericMode, PbchPayload, Pci, SsbIndex,
    TxConfig,
};

/// 5G NR n78 SSB generator and blind cell search.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write SSB bursts as a cf32 IQ file with a JSON sidecar.
    Tx(TxArgs),
    /// Run the cell search on an IQ file and print the result as JSON.
    Search(SearchArgs),
    /// Run a Monte Carlo sweep from a JSON config and write CSV.
    Sweep(SweepArgs),
    /// Calibrate the PSS detection threshold on noise-only captures.
    Calibrate(CalibrateArgs),
    /// Print reference sequences or an SSB grid.
    Dump(DumpArgs),
}

#[derive(Args)]
struct TxArgs {
    #[arg(long)]
    pci: u16,
    #[arg(long, default_value_t = GSCN_MIN)]
    gscn: u16,
    #[arg(long, default_value_t = 2)]
    frames: usize,
    /// Seed of the random PBCH payload.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = GSCN_BASE_HZ)]
    carrier_hz: u64,
    /// Add white Gaussian noise at this SNR over the SSB symbols.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Delay the stream by this many samples.
    #[arg(long, default_value_t = 0)]
    delay: usize,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    d_pss: usize,
    /// float32, float16 or fixed<W>_<I>, e.g. fixed24_2.
    #[arg(long, default_value = "float32")]
    mode: NumericMode,
    /// SSS datapath mode; defaults to --mode.
    #[arg(long)]
    sss_mode: Option<NumericMode>,
    /// DMRS datapath mode; defaults to --mode.
    #[arg(long)]
    dmrs_mode: Option<NumericMode>,
    #[arg(long, default_value_t = GSCN_MIN)]
    gscn_min: u16,
    #[arg(long, default_value_t = GSCN_MIN + 1)]
    gscn_max: u16,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_FIR_TAPS)]
    fir_taps: usize,
    /// Skip the full-rate timing refinement.
    #[arg(long)]
    no_fine_align: bool,
    /// Restrict correlation lags to CP-detected symbol starts.
    #[arg(long)]
    cp_assist: bool,
    /// Also write slot, subframe and frame ticks over the file as CSV.
    #[arg(long)]
    ticks: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_TARGET_FALSE_ALARM)]
    target_fa: f64,
    #[arg(long, default_value_t = 1)]
    d_pss: usize,
    #[arg(long, default_value = "float32")]
    mode: NumericMode,
    #[arg(long, default_value_t = GSCN_MIN)]
    gscn_min: u16,
    #[arg(long, default_value_t = GSCN_MIN + 1)]
    gscn_max: u16,
    #[arg(long, default_value_t = DEFAULT_FIR_TAPS)]
    fir_taps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    pci: u16,
    #[arg(long, default_value_t = 0)]
    ssb_index: u8,
    /// Print the 4x240 SSB grid as CSV instead of the sequences.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn tx(a: TxArgs) -> ssbscan::Result<serde_json::Value> {
    let cfg = TxConfig {
        carrier: CarrierConfig::new(a.carrier_hz),
        pbch_seed: a.seed,
        ..TxConfig::new(Pci::new(a.pci)?, Gscn::new(a.gscn)?, a.frames)
    };
    let mut iq = schedule_frames(&cfg)?;
    if a.snr_db.is_some() || a.delay > 0 {
        let ch = ChannelConfig {
            snr_db: a.snr_db.unwrap_or(f64::INFINITY),
            delay_samples: a.delay,
            noise_seed: a.noise_seed,
            ..ChannelConfig::default()
        };
        iq = apply_channel(&iq, &ch)?;
    }
    write_iq(&a.out, &iq)?;
    Ok(json!({
        "out": a.out,
        "samples": iq.len(),
        "pci": cfg.pci,
        "gscn": cfg.gscn,
        "subcarrier_offset": cfg.subcarrier_offset()?,
    }))
}

fn search(a: SearchArgs) -> ssbscan::Result<serde_json::Value> {
    let iq = read_iq(&a.input)?;
    let cfg = CellSearchConfig {
        pss: PssSearchConfig {
            gscn_candidates: Gscn::range(a.gscn_min, a.gscn_max)?,
            d_pss: a.d_pss,
            threshold: a.threshold,
            numeric_mode: a.mode,
            fir_taps: a.fir_taps,
            fine_align: !a.no_fine_align,
            cp_assist: a.cp_assist,
        },
        sss_mode: a.sss_mode.unwrap_or(a.mode),
        dmrs_mode: a.dmrs_mode.unwrap_or(a.mode),
    };
    let r = cell_search(&iq, &cfg)?;
    if let Some(path) = &a.ticks {
        let horizon = iq.len().saturating_sub(r.boundaries.slot_tick_sample);
        write_ticks_csv(
            &tick_stream(&r.boundaries, horizon),
            fs::File::create(path)?,
        )?;
    }
    Ok(serde_json::to_value(r)?)
}

fn sweep(a: SweepArgs) -> ssbscan::Result<serde_json::Value> {
    let cfg: SweepConfig = serde_json::from_str(&fs::read_to_string(&a.config)?)?;
    let report = match a.threads {
        Some(t) => run_sweep_with_threads(&cfg, t)?,
        None => run_sweep(&cfg)?,
    };
    write_csv(&report.records, fs::File::create(&a.out)?)?;
    let points: Vec<_> = report
        .records
        .iter()
        .map(|r| {
            let band = |k| {
                let (lo, hi) = wilson_interval(k, r.trials, Z95);
                [lo, hi]
            };
            json!({
                "snr_db": r.snr_db,
                "d_pss": r.d_pss,
                "mode": r.mode,
                "p_d_pss_95": band(r.pss_detections),
                "p_d_sss_95": band(r.pci_correct),
                "p_d_dmrs_95": band(r.ssb_index_correct),
            })
        })
        .collect();
    Ok(json!({
        "out": a.out,
        "records": report.records.len(),
        "thresholds": report.thresholds,
        "trial_errors": report.trial_errors.len(),
        "bands": points,
    }))
}

fn calibrate(a: CalibrateArgs) -> ssbscan::Result<serde_json::Value> {
    let cal = calibrate_threshold(&CalibrationSetup {
        d_pss: a.d_pss,
        mode: a.mode,
        gscn_candidates: Gscn::range(a.gscn_min, a.gscn_max)?,
        fir_taps: a.fir_taps,
        trials: a.trials,
        target_false_alarm: a.target_fa,
        master_seed: a.seed,
        carrier: CarrierConfig::default(),
    })?;
    Ok(json!({
        "d_pss": a.d_pss,
        "mode": a.mode,
        "threshold": cal.threshold,
        "trials": cal.trials,
        "target_false_alarm": cal.target_false_alarm,
        "false_alarms": cal.false_alarms,
        "max_noise_metric": cal.maxima.first(),
    }))
}

fn dump(a: DumpArgs) -> ssbscan::Result<Option<serde_json::Value>> {
    let pci = Pci::new(a.pci)?;
    let i = SsbIndex::new(a.ssb_index)?;
    if a.grid {
        let ssb = assemble_ssb(pci, i, &PbchPayload::from_seed(a.seed));
        write_grid_csv(&ssb.cells, std::io::stdout().lock())?;
        return Ok(None);
    }
    println!("{}", golden_line_bpsk(&pss_sequence(pci.pci2())?));
    println!("{}", golden_line_bpsk(&sss_sequence(pci)));
    println!("{}", golden_line_qpsk(&dmrs_sequence(pci, i)));
    Ok(None)
}

fn fail(message: String, kind: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": message, "kind": kind }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let msg = e.render().to_string();
            let head: Vec<&str> = msg
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let text = head.join(" ");
            eprintln!(
                "{}",
                json!({ "error": text.trim_start_matches("error: "), "kind": "usage" })
            );
            return ExitCode::from(2);
        }
    };
    let out = match cli.command {
        Command::Tx(a) => tx(a).map(Some),
        Command::Search(a) => search(a).map(Some),
        Command::Sweep(a) => sweep(a).map(Some),
        Command::Calibrate(a) => calibrate(a).map(Some),
        Command::Dump(a) => dump(a),
    };
    match out {
        Ok(Some(v)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&v).expect("JSON value serializes")
            );
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => fail(e.to_string(), e.kind()),
    }
}
