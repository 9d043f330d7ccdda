use facts::sim::accuracy::{read_csv, write_csv};
use facts::sim::plot::{plot_data, DATA_FILE};
use facts::sim::{emit_plots, run_accuracy, ExperimentConfig};

#[test]
fn accuracy_holds_at_t_316() {
    let mut cfg = ExperimentConfig::new(100_000, 316, 500, 5);
    cfg.background_levels.push(100_000);
    for row in run_accuracy(&cfg).unwrap() {
        assert!((row.mean - 316.0).abs() / 316.0 <= 0.05, "{row:?}");
        assert!(row.rel_std_pct <= 5.0, "{row:?}");
    }
}

#[test]
fn csv_round_trips_into_plot_data() {
    let mut cfg = ExperimentConfig::new(100_000, 100, 30, 9);
    cfg.background_levels = vec![25_000];
    let rows = run_accuracy(&cfg).unwrap();
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).unwrap();
    let back = read_csv(&csv[..]).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(back[0].background, 25_000);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    std::fs::write(&path, &csv).unwrap();
    emit_plots(&path, dir.path()).unwrap();
    let data = std::fs::read_to_string(dir.path().join(DATA_FILE)).unwrap();
    assert_eq!(data, plot_data(&back).0);
    let points = data.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).count();
    assert_eq!(points, 1);

    std::fs::write(&path, "t,background\n").unwrap();
    assert!(emit_plots(&path, dir.path()).is_err());
}
