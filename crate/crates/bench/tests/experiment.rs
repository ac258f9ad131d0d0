use std::collections::BTreeMap;
use std::path::Path;

use hscale::optimizers::IterateRecord;
use hscale_bench::{read_trace, run_experiment, tune_grid, BenchError, Experiment};

const NINE_METHODS: &str = r#"
[problem]
kind = "logistic-synthetic"
n = 150
d = 8
classes = 3
seed = 11

[run]
max_units = 2000
seeds = [0, 1]
workers = WORKERS

[[method]]
id = "scaled"
rule = "CGMR"

[[method]]
id = "scaled"
rule = "MR"

[[method]]
id = "scaled"
rule = "CG"

[[method]]
id = "linesearch"
reset = "limited-reset"

[[method]]
id = "fixed"
alpha = "theory"

[[method]]
id = "heavy-ball"
alpha = "theory"
beta = "theory"

[[method]]
id = "nesterov"
alpha = "theory"
beta = "theory"

[[method]]
id = "adam"
lr = 0.01

[[method]]
id = "pono"

[output]
dir = "OUT"
"#;

fn experiment(dir: &Path, workers: usize, out: &str) -> Experiment {
    let text = NINE_METHODS.replace("WORKERS", &workers.to_string()).replace("OUT", out);
    Experiment::parse(&text, dir).unwrap()
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn nine_methods_give_nine_traces_per_seed_and_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = run_experiment(&experiment(tmp.path(), 2, "out")).unwrap();
    let files = dir_contents(&tmp.path().join("out"));
    assert_eq!(files.len(), 9 * 2 + 1);
    assert!(files.contains_key("summary.csv"));
    for label in ["CGMR", "MR", "CG", "gd-limited-reset", "fixed", "heavy-ball", "nesterov", "adam", "pono"] {
        for seed in [0, 1] {
            assert!(files.contains_key(&format!("{label}_seed{seed}.csv")), "{label} seed {seed}");
        }
    }
    assert_eq!(rep.failures().count(), 0);
}

#[test]
fn reruns_and_worker_counts_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&experiment(tmp.path(), 1, "a")).unwrap();
    run_experiment(&experiment(tmp.path(), 1, "b")).unwrap();
    run_experiment(&experiment(tmp.path(), 4, "c")).unwrap();
    let a = dir_contents(&tmp.path().join("a"));
    assert_eq!(a, dir_contents(&tmp.path().join("b")));
    assert_eq!(a, dir_contents(&tmp.path().join("c")));
}

/// Independent recomputation of the summary columns from trace rows.
fn summarize(rows: &[IterateRecord]) -> (f64, f64, usize, f64, f64, [usize; 3], f64) {
    let last = rows.last().unwrap();
    let steps = &rows[..rows.len() - 1];
    let ls: Vec<&IterateRecord> = steps.iter().filter(|r| r.ls_trials > 0).collect();
    let rate = if ls.is_empty() {
        0.0
    } else {
        ls.iter().filter(|r| r.ls_trials == 1 && r.alpha == 1.0).count() as f64 / ls.len() as f64
    };
    let backtracks =
        if ls.is_empty() { 0.0 } else { ls.iter().map(|r| r.ls_trials as f64 - 1.0).sum::<f64>() / ls.len() as f64 };
    let mut flags = [0; 3];
    for r in steps {
        match r.flag.map(|f| f.as_str()) {
            Some("SPC") => flags[0] += 1,
            Some("LPC") => flags[1] += 1,
            Some("NC") => flags[2] += 1,
            _ => {}
        }
    }
    (last.f, last.gnorm, last.k, last.units, rate, flags, backtracks)
}

#[test]
fn summary_is_recomputable_from_trace_files() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = run_experiment(&experiment(tmp.path(), 2, "out")).unwrap();
    let mut reader = csv::Reader::from_path(&rep.summary_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mut n = 0;
    for row in reader.records() {
        let row = row.unwrap();
        let real = |name: &str| row[col(name)].parse::<f64>().unwrap();
        let int = |name: &str| row[col(name)].parse::<usize>().unwrap();
        let path = tmp.path().join("out").join(format!("{}_seed{}.csv", &row[col("method")], &row[col("seed")]));
        let records = read_trace(&path).unwrap();
        let (f, gnorm, k, units, rate, flags, backtracks) = summarize(&records);
        assert_eq!(real("final_f"), f);
        assert_eq!(real("final_gnorm"), gnorm);
        assert_eq!(int("iterations"), k);
        assert_eq!(real("units"), units);
        assert_eq!(real("unit_step_rate"), rate);
        assert_eq!([int("spc"), int("lpc"), int("nc")], flags);
        assert_eq!(real("backtracks"), backtracks);
        if ["CGMR", "MR", "CG"].contains(&&row[col("method")]) {
            assert_eq!(flags.iter().sum::<usize>(), k, "flag counts cover every scaled iteration");
        }
        n += 1;
    }
    assert_eq!(n, 18);
}

#[test]
fn budgets_are_honoured_within_one_iteration() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = experiment(tmp.path(), 2, "out");
    let rep = run_experiment(&exp).unwrap();
    for run in &rep.runs {
        let rows = read_trace(&run.path).unwrap();
        let widest = rows.windows(2).map(|w| w[1].units - w[0].units).fold(0.0, f64::max);
        let last = rows.last().unwrap().units;
        assert!(last <= exp.run.max_units + widest, "{} seed {}: {last} units", run.label, run.seed);
    }
}

#[test]
fn trace_accounting_and_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = run_experiment(&experiment(tmp.path(), 1, "out")).unwrap();
    for run in &rep.runs {
        let rows = read_trace(&run.path).unwrap();
        assert_eq!(rows, run.trace.records, "parse-back reproduces the trace");
        assert_eq!(rows[0].k, 0);
        if ["CGMR", "MR", "CG"].contains(&run.label.as_str()) {
            assert!(rows[0].units >= 4.0, "{}: first row has {} units", run.label, rows[0].units);
        }
        if run.label == "fixed" {
            assert!(rows.iter().all(|r| r.flag.is_none()));
        }
    }
}

const TUNE: &str = r#"
[problem]
kind = "quadratic"
diag = [1.0, 4.0]
b = [1.0, 1.0]

[run]
max_units = 5000

[[method]]
id = "fixed"
alpha = 0.1

[tune]
method = "fixed"
grid = GRID
"#;

fn tune_with(grid: &str) -> Result<hscale_bench::TuneReport, BenchError> {
    let tmp = tempfile::tempdir().unwrap();
    let exp = Experiment::parse(&TUNE.replace("GRID", grid), tmp.path()).unwrap();
    let spec = exp.tune.clone().unwrap();
    tune_grid(&exp, &spec.method, &spec.grid)
}

#[test]
fn tuning_discards_divergent_steps() {
    let rep = tune_with("[1.0, 0.25, 0.01]").unwrap();
    assert_eq!(rep.best, 0.25);
    assert_eq!(rep.points[0].status.as_str(), "diverged");
    assert_eq!(rep.total_units, rep.points.iter().map(|p| p.units).sum::<f64>());
}

#[test]
fn single_point_grid_selects_that_point() {
    assert_eq!(tune_with("[0.01]").unwrap().best, 0.01);
}

#[test]
fn all_divergent_grid_fails() {
    assert!(matches!(tune_with("[1.0, 2.0]"), Err(BenchError::TuningFailed { .. })));
}

#[test]
fn empty_method_list_is_a_config_error() {
    let err = Experiment::parse("[problem]\nkind = \"quartic1d\"\n", Path::new(".")).unwrap_err();
    assert!(matches!(err, BenchError::Config { .. }));
    assert_eq!(err.exit_code(), 1);
}
