use std::path::Path;
use std::process::{Command, Output};

fn polyface(args: &[&str], threads_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polyface"));
    cmd.args(args).env_remove("POLYFACE_THREADS");
    if let Some(t) = threads_env {
        cmd.env("POLYFACE_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn wendel_prints_exact_fraction() {
    let o = polyface(&["wendel", "--m", "4", "--M", "6", "--exact"], None);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "13/16\n");
}

#[test]
fn threshold_prints_ten_decimals() {
    let o = polyface(&["threshold", "--which", "weak", "--delta", "0.75"], None);
    assert_eq!(stdout(&o), "0.6666666667\n");
}

#[test]
fn exit_codes() {
    assert_eq!(polyface(&["wendel", "--m"], None).status.code(), Some(2));
    assert_eq!(
        polyface(&["ratio", "--k", "9", "--n", "4", "--N", "8"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        polyface(&["wendel", "--m", "3", "--M", "20000", "--exact"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(polyface(&["--help"], None).status.code(), Some(0));
}

fn mc_file(dir: &Path, threads: &str) -> Vec<u8> {
    let path = dir.join(format!("mc_{threads}.csv"));
    let o = polyface(
        &[
            "mc",
            "--shape",
            "hypercube",
            "--k",
            "2",
            "--n",
            "5",
            "--N",
            "10",
            "--trials",
            "400",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn mc_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = mc_file(dir.path(), "1");
    assert_eq!(one, mc_file(dir.path(), "2"));
    assert_eq!(one, mc_file(dir.path(), "8"));
    let text = String::from_utf8(one).unwrap();
    assert!(text.starts_with("# polyface mc\n# seed = 0x5eed\n"));
}

#[test]
fn phase_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let csv = dir.path().join(format!("phase_{threads}.csv"));
        let svg = dir.path().join(format!("phase_{threads}.svg"));
        let o = polyface(
            &[
                "phase",
                "--N",
                "20",
                "--grid",
                "4",
                "--trials",
                "40",
                "--out",
                csv.to_str().unwrap(),
                "--svg",
                svg.to_str().unwrap(),
            ],
            Some(threads),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(csv).unwrap(), std::fs::read(svg).unwrap())
    };
    let one = run("1");
    assert_eq!(one, run("2"));
    assert_eq!(one, run("8"));
    assert!(String::from_utf8(one.1).unwrap().contains("<polyline"));
}

#[test]
fn recover_and_fourier_succeed() {
    let o = polyface(
        &[
            "recover", "--kind", "box", "--k", "3", "--n", "15", "--N", "20", "--trials", "10",
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("# polyface recover\n"));
    let o = polyface(&["fourier", "--n", "5", "--N", "9"], None);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
}
