//! `mlift-decode sweep` end to end, and statistical checks on the sweep
//! library it wraps.

use std::path::{Path, PathBuf};
use std::process::Command;

use mlift::harness::{
    csv_string, parse_decoders, parse_snr_list, run_sweep, ExperimentConfig, MetricsRow,
};
use mlift::Constellation;

const BIN: &str = env!("CARGO_BIN_EXE_mlift-decode");
const HEADER: &str =
    "snr_db,decoder,trials,symbol_errors,bit_errors,ser,ber,avg_solver_iters,avg_solve_ms,avg_relax_gap,failures";
const GOLDEN_ARGS: &[&str] = &[
    "sweep",
    "--tx",
    "2",
    "--rx",
    "2",
    "--mod",
    "16qam",
    "--snr",
    "0:10:20",
    "--trials",
    "2",
    "--decoders",
    "mlift-full,mlift-reduced,ml,zf",
    "--seed",
    "7",
];

fn run(args: &[&str], out: &Path, extra: &[&str]) -> (i32, String) {
    let o = Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn golden() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sweep_seed7.csv");
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sweep_reproduces_the_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let (code, err) = run(GOLDEN_ARGS, &out, &[]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden());
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("1.csv"), dir.path().join("3.csv"));
    assert_eq!(run(GOLDEN_ARGS, &a, &["--workers", "1"]).0, 0);
    assert_eq!(run(GOLDEN_ARGS, &b, &["--workers", "3"]).0, 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn csv_parses_with_a_standard_reader() {
    let text = golden();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>().join(","),
        HEADER
    );
    let mut rows = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), 11);
        let trials: u64 = rec[2].parse().unwrap();
        let sym: u64 = rec[3].parse().unwrap();
        let ser: f64 = rec[5].parse().unwrap();
        assert!((ser - sym as f64 / (trials as f64 * 4.0)).abs() < 1e-9);
        assert!(rec[8].is_empty());
        let is_mlift = rec[1].starts_with("mlift");
        assert_eq!(!rec[7].is_empty(), is_mlift);
        assert_eq!(!rec[9].is_empty(), is_mlift);
        if is_mlift {
            assert!(rec[9].parse::<f64>().unwrap() >= -1e-6);
        }
        rows += 1;
    }
    assert_eq!(rows, 12);
}

#[test]
fn help_exits_zero_and_bad_arguments_exit_one() {
    let o = Command::new(BIN)
        .args(["sweep", "--help"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--dump-sdpa"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    for extra in [
        &["--bogus"][..],
        &["--mod", "8psk"],
        &["--snr", "5:0:10"],
        &["--trials", "0"],
        &["--decoders", "mlift-full,sphere"],
        &["--tx", "8", "--decoders", "ml"],
    ] {
        let (code, _) = run(&["sweep"], &out, extra);
        assert_eq!(code, 1, "{extra:?}");
    }
    assert!(!out.exists());
}

#[test]
fn decoding_failures_exit_two_and_are_counted() {
    // ZF needs a tall channel; with one receive antenna it cannot decide.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    let (code, err) = run(
        &[
            "sweep",
            "--tx",
            "2",
            "--rx",
            "1",
            "--snr",
            "10",
            "--trials",
            "3",
            "--decoders",
            "zf",
        ],
        &out,
        &[],
    );
    assert_eq!(code, 2);
    assert!(err.contains("failures"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, format!("{HEADER}\n10,zf,0,0,0,0,0,,,,3\n"));
}

#[test]
fn dump_sdpa_writes_one_file_per_relaxation() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    let (code, _) = run(
        &[
            "sweep",
            "--tx",
            "1",
            "--rx",
            "2",
            "--snr",
            "3,9",
            "--trials",
            "2",
            "--decoders",
            "mlift-full,mlift-reduced,zf",
        ],
        &dir.path().join("d.csv"),
        &["--dump-sdpa", dump.to_str().unwrap()],
    );
    assert_eq!(code, 0);
    let mut names: Vec<String> = std::fs::read_dir(&dump)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 2 * 2 * 2);
    assert!(names.iter().all(|n| n.ends_with(".dat-s")));
    for n in &names {
        mlift::sdp::sdpa::read_file(dump.join(n)).unwrap();
    }
}

#[test]
fn timing_flag_fills_the_time_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let (code, _) = run(
        &[
            "sweep",
            "--tx",
            "1",
            "--rx",
            "1",
            "--mod",
            "qpsk",
            "--snr",
            "10",
            "--trials",
            "2",
            "--decoders",
            "mlift-reduced",
        ],
        &out,
        &["--timing"],
    );
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(row[8].parse::<f64>().unwrap() >= 0.0);
}

fn sweep(tx: usize, snr: &str, decoders: &str, trials: usize, seed: u64) -> Vec<MetricsRow> {
    let mut cfg = ExperimentConfig::new(tx, tx, Constellation::by_name("16qam").unwrap());
    cfg.snr_list = parse_snr_list(snr).unwrap();
    cfg.decoders = parse_decoders(decoders).unwrap();
    cfg.trials = trials;
    cfg.seed = seed;
    run_sweep(&cfg).unwrap()
}

#[test]
fn library_and_binary_agree() {
    let rows = sweep(2, "0:10:20", "mlift-full,mlift-reduced,ml,zf", 2, 7);
    assert_eq!(csv_string(&rows), golden());
}

#[test]
fn ml_symbol_error_rate_falls_with_snr() {
    let rows = sweep(1, "0:2:20", "ml", 500, 11);
    assert_eq!(rows.len(), 11);
    for w in rows.windows(2) {
        assert!(
            w[1].ser <= w[0].ser,
            "{} dB {} vs {} dB {}",
            w[0].snr_db,
            w[0].ser,
            w[1].snr_db,
            w[1].ser
        );
    }
    assert!(rows[0].ser > 0.2 && rows[10].ser < 0.05);
}

/// Standard error of the difference of two error rates.
fn sigma(a: &MetricsRow, b: &MetricsRow) -> f64 {
    let var = |r: &MetricsRow| {
        let n = r.trials as f64 * 4.0;
        (r.ser * (1.0 - r.ser) / n).max(1.0 / (n * n))
    };
    (var(a) + var(b)).sqrt()
}

#[test]
fn decoders_order_as_expected_at_mid_snr() {
    let rows = sweep(2, "12", "mlift-reduced,ml,zf", 2000, 99);
    let (lift, ml, zf) = (&rows[0], &rows[1], &rows[2]);
    assert!(rows.iter().all(|r| r.failures == 0));
    assert!(
        ml.ser <= lift.ser + 3.0 * sigma(ml, lift),
        "ml {} lift {}",
        ml.ser,
        lift.ser
    );
    assert!(
        lift.ser + 3.0 * sigma(lift, zf) < zf.ser,
        "lift {} zf {}",
        lift.ser,
        zf.ser
    );
    assert!(lift.avg_relax_gap.unwrap() >= -1e-6);
}
