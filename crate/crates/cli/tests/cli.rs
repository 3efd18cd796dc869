use std::path::Path;
use std::process::{Command, Output};

fn dpkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpkd")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &[&str] = &[
    "--set",
    "frontend.n_mels=6",
    "--set",
    "frontend.frames=8",
    "--set",
    "data.synth.n_mels=6",
    "--set",
    "data.synth.frames=8",
    "--set",
    "data.synth.frame_jitter=1",
    "--set",
    "data.n_priv=200",
    "--set",
    "data.n_aux=80",
    "--set",
    "data.n_test=60",
    "--set",
    "model.hidden=8",
    "--set",
    "model.privileged_hidden=3",
    "--set",
    "dp.q=0.1",
    "--set",
    "dp.steps=20",
    "--set",
    "kd.epochs=2",
];

fn with_config<'a>(cmd: &'a str, dir: &'a Path, extra: &[&'a str]) -> Vec<String> {
    let mut v = vec![
        cmd.to_string(),
        "--config".into(),
        dir.join("config.toml").display().to_string(),
    ];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run(args: Vec<String>) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    dpkd(&refs)
}

#[test]
fn epsilon_prints_budget_and_curve() {
    let o = dpkd(&[
        "epsilon", "--q", "0.0016", "--sigma", "1", "--steps", "12500", "--delta", "1e-5",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("epsilon=1.0963 alpha=12"), "{}", stdout(&o));

    let o = dpkd(&["epsilon", "--steps", "0"]);
    assert!(stdout(&o).starts_with("epsilon=0.0000"));

    let o = dpkd(&["epsilon", "--sigma", "0"]);
    assert_eq!(stdout(&o).trim(), "epsilon=no DP");

    let o = dpkd(&["epsilon", "--q", "0.1", "--steps", "30", "--curve-epochs", "3"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[1], "epoch,epsilon");
    assert_eq!(lines[2], "0,0.000000");
    assert_eq!(lines.len(), 6);
}

#[test]
fn errors_exit_nonzero_with_one_category_line() {
    let o = dpkd(&["epsilon", "--q", "1.5"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error[invalid_config]:"), "{err}");

    let o = dpkd(&["train-teacher", "--set", "dp.sigma=-1"]);
    assert!(stderr(&o).starts_with("error[invalid_config]:"), "{}", stderr(&o));

    let o = dpkd(&["train-teacher", "--set", "nonsense.key=1"]);
    assert!(
        stderr(&o).starts_with("error[invalid_config]: invalid configuration: unknown field `nonsense`"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn full_pipeline_through_the_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let mut gen = vec!["gen-data", "--out-dir", dir.to_str().unwrap()];
    gen.extend_from_slice(SMALL);
    let o = dpkd(&gen);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("priv class counts: ["));

    let o = run(with_config("train-teacher", &dir, &[]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("epoch,step,loss,probe_acc,epsilon"));

    assert!(run(with_config("label-aux", &dir, &[])).status.success());
    let again = run(with_config("label-aux", &dir, &[]));
    assert!(
        stderr(&again).starts_with("error[one_shot_violation]:"),
        "{}",
        stderr(&again)
    );

    assert!(run(with_config("train-student", &dir, &[])).status.success());

    let test = dir.join("data/test/manifest.csv").display().to_string();
    let teacher = dir.join("teacher/teacher.dpm").display().to_string();
    let student = dir.join("student/student.dpm").display().to_string();
    let refused = run(with_config(
        "evaluate",
        &dir,
        &["--checkpoint", &teacher, "--manifest", &test],
    ));
    assert!(stderr(&refused).starts_with("error[release_refused]:"));
    let audio = run(with_config(
        "evaluate",
        &dir,
        &["--checkpoint", &teacher, "--manifest", &test, "--as", "audio"],
    ));
    assert!(audio.status.success());
    let released = run(with_config(
        "evaluate",
        &dir,
        &["--checkpoint", &student, "--manifest", &test],
    ));
    assert!(stdout(&released).contains("\"collapse_flag\""));

    let missing = run(with_config(
        "evaluate",
        &dir,
        &["--checkpoint", "nope.dpm", "--manifest", &test],
    ));
    assert!(stderr(&missing).starts_with("error[io]:"));
}

#[test]
fn sweep_prints_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sweep");
    let mut args = vec![
        "sweep",
        "--out-dir",
        dir.to_str().unwrap(),
        "--sigma",
        "1,3",
        "--awdp",
        "on,off",
        "--seeds",
        "0",
    ];
    args.extend_from_slice(SMALL);
    let o = dpkd(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("sigma,awdp,dsaf,n_aux,seed,epsilon,teacher_macro_f1"));
    assert_eq!(std::fs::read_to_string(dir.join("sweep.csv")).unwrap(), out);
}
