use std::process::{Command, Output};

fn slowjac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowjac"))
        .args(args)
        .env_remove("SLOWJAC_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = slowjac(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["pm", "--m-max", "8"][..],
        &["dims", "--m-max", "9"],
        &[
            "chi",
            "--m",
            "6",
            "--b",
            "1",
            "--order",
            "6",
            "--quotient",
            "4/2",
        ],
    ] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(slowjac(&[]).status.code(), Some(2));
    assert_eq!(slowjac(&["pm"]).status.code(), Some(2));
    assert_eq!(slowjac(&["pm", "--m-max", "zero"]).status.code(), Some(2));
    let short = slowjac(&["f", "--m", "6", "--a", "1", "--b", "5", "--order", "2"]);
    assert_eq!(short.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&short.stderr).contains("required order"));
    let bad = slowjac(&["classify", "--m", "6", "--b", "1", "--quotient", "3/2"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn dims_rows() {
    let csv = stdout(&["dims", "--m-min", "4", "--m-max", "6"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,b,dim,hat_nonempty"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(
        rows,
        [
            "4,1,1,true",
            "4,2,2,true",
            "5,1,0,false",
            "5,2,1,true",
            "6,1,1,true",
            "6,2,2,true"
        ]
    );
}

#[test]
fn f_at_index_6() {
    let csv = stdout(&["f", "--m", "6", "--b", "1", "--n-max", "2", "--l-max", "12"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,l,f"));
    for line in lines {
        let v: Vec<i64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (n, l, f) = (v[0], v[1], v[2]);
        let want = if n == 0 || 6 * n + l == 0 { 2 } else { 0 };
        assert_eq!(f, want, "{line}");
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let args = ["--cache-dir", path, "basis", "--m", "4", "--order", "3"];
    let cold = stdout(&args);
    assert!(dir.path().join("wjf_m4_order3.txt").exists());
    assert_eq!(stdout(&args), cold);
    assert!(cold.starts_with("alpha,beta,gamma,n,l,coeff\n"));
}

#[test]
fn writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let printed = stdout(&["pplus", "--m-max", "5"]);
    let quiet = stdout(&["--out", out.to_str().unwrap(), "pplus", "--m-max", "5"]);
    assert!(quiet.is_empty());
    assert_eq!(std::fs::read_to_string(out).unwrap(), printed);
}
