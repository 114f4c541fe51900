//! Scan-file ingest/emit contract: lossless round trip, strict validation
//! with line numbers, deterministic grouping.

use std::io::Write;

use ionheat_cli::config::Config;
use ionheat_cli::scanfile::{ingest_scans, write_scans};
use ionheat_core::sim::simulate_dataset;

fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(content.as_bytes()).unwrap();
    path
}

#[test]
fn simulate_write_ingest_round_trip() {
    let config = Config::builtin();
    let dataset = simulate_dataset(
        &config.trap_config(),
        &config.truth_params(),
        &config.sim_schedule(Some(11)),
        &config.constants,
    )
    .unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scans.csv");
    write_scans(&path, &dataset.scans).unwrap();
    let back = ingest_scans(&path, &config.probe).unwrap();

    assert_eq!(back.len(), dataset.scans.len());
    // Ingest orders by delay then sideband; the simulator already emits in
    // that order, so the records must match exactly.
    assert_eq!(back, dataset.scans);
}

#[test]
fn empty_file_yields_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(&dir, "empty.csv", "delay_s,sideband,detuning_hz,shots,bright\n");
    let config = Config::builtin();
    let scans = ingest_scans(&path, &config.probe).unwrap();
    assert!(scans.is_empty());
}

#[test]
fn bright_exceeding_shots_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(
        &dir,
        "bad.csv",
        "delay_s,sideband,detuning_hz,shots,bright\n0.01,red,0.0,300,5\n0.01,blue,0.0,300,301\n",
    );
    let config = Config::builtin();
    let err = ingest_scans(&path, &config.probe).unwrap_err().to_string();
    assert!(err.contains("line 3"), "error was: {err}");
    assert!(err.contains("301"), "error was: {err}");
}

#[test]
fn malformed_row_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(
        &dir,
        "bad.csv",
        "delay_s,sideband,detuning_hz,shots,bright\n0.01,red,0.0,300,5\nnot-a-number,red,0.0,300,5\n",
    );
    let config = Config::builtin();
    let err = format!("{:#}", ingest_scans(&path, &config.probe).unwrap_err());
    assert!(err.contains("line 3"), "error was: {err}");
}

#[test]
fn header_mismatch_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(&dir, "bad.csv", "delay,sideband,detuning,shots,bright\n");
    let config = Config::builtin();
    let err = ingest_scans(&path, &config.probe).unwrap_err().to_string();
    assert!(err.contains("header mismatch"), "error was: {err}");
}

#[test]
fn unknown_sideband_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(
        &dir,
        "bad.csv",
        "delay_s,sideband,detuning_hz,shots,bright\n0.01,green,0.0,300,5\n",
    );
    let config = Config::builtin();
    assert!(ingest_scans(&path, &config.probe).is_err());
}

#[test]
fn rows_group_and_sort_deterministically() {
    // Rows arrive shuffled; ingest must order by delay, sideband, detuning.
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(
        &dir,
        "shuffled.csv",
        "delay_s,sideband,detuning_hz,shots,bright\n\
         0.02,blue,1000.0,300,10\n\
         0.01,blue,-1000.0,300,20\n\
         0.02,blue,-1000.0,300,30\n\
         0.01,red,0.0,300,1\n\
         0.01,blue,1000.0,300,40\n",
    );
    let config = Config::builtin();
    let scans = ingest_scans(&path, &config.probe).unwrap();
    assert_eq!(scans.len(), 3);
    assert_eq!(scans[0].delay_s, 0.01);
    assert_eq!(scans[0].which, ionheat_core::Sideband::Red);
    assert_eq!(scans[1].delay_s, 0.01);
    assert_eq!(scans[1].which, ionheat_core::Sideband::Blue);
    assert_eq!(scans[1].points[0].detuning_hz, -1000.0);
    assert_eq!(scans[1].points[1].detuning_hz, 1000.0);
    assert_eq!(scans[2].delay_s, 0.02);
}
