use std::path::Path;
use std::process::{Command, Output};

fn ngcenter(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngcenter"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&ngcenter(&["--help"], d)), 0);
    assert_eq!(code(&ngcenter(&["solve", "--bogus"], d)), 3);
    let o = ngcenter(&["solve", "--instance", "J9_9"], d);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert_eq!(code(&ngcenter(&["solve"], d)), 3);
    assert_eq!(
        code(&ngcenter(
            &["pipeline", "--instance", "J6_1", "--through", "nowhere"],
            d
        )),
        3
    );

    let o = ngcenter(
        &["pipeline", "--instance", "J6_1", "--omega-order", "7", "--out", "a"],
        d,
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("found 0 of 27 triples"), "{}", stderr(&o));

    let o = ngcenter(
        &["pipeline", "--instance", "J6_1", "--compare", "smds1", "--out", "b"],
        d,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = ngcenter(
        &[
            "pipeline",
            "--instance",
            "J6_1",
            "--compare",
            "smds2",
            "--allow-conjugation",
            "--out",
            "c",
        ],
        d,
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn catalog_lists_every_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = ngcenter(&["catalog"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["J6_1", "J6_1bar", "J6_2", "J6_2bar", "J24_1", "J24_2", "J24_3", "J24_4"] {
        assert!(
            text.lines().any(|l| l.split_whitespace().next() == Some(name)),
            "{name}"
        );
    }
}

#[test]
fn pipeline_artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let listing = |sub: &str| {
        let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(d.join(sub))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        v.sort();
        v
    };
    for sub in ["x", "y"] {
        let o = ngcenter(
            &["pipeline", "--instance", "J6_1", "--compare", "smds1", "--out", sub],
            d,
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (x, y) = (listing("x"), listing("y"));
    assert_eq!(x, y);
    let names: Vec<&str> = x.iter().map(|(n, _)| n.split('-').next().unwrap()).collect();
    assert_eq!(names, ["center", "factor", "solve", "supermodular"]);
    assert!(x.iter().all(|(n, _)| n.len() == n.find('-').unwrap() + 1 + 12 + 5));
}

#[test]
fn staged_j24_1_flow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let step = |args: &[&str], want: i32| {
        let o = ngcenter(args, d);
        assert_eq!(code(&o), want, "{args:?}: {}", stderr(&o));
        o
    };
    step(&["catalog", "--instance", "J24_1", "--out", "ng.json"], 0);
    step(&["solve", "--input", "ng.json", "--out", "triples.json"], 0);
    step(
        &[
            "center",
            "--input",
            "ng.json",
            "--triples",
            "triples.json",
            "--out",
            "center.json",
        ],
        0,
    );
    // The condensed S-matrix keeps open entries until the factor is split off.
    step(
        &[
            "condense",
            "--input",
            "center.json",
            "--boson",
            "A(0,2)",
            "--out",
            "full.json",
        ],
        2,
    );
    step(
        &[
            "condense",
            "--input",
            "center.json",
            "--boson",
            "A(0,2)",
            "--emit-partial",
            "--out",
            "cond.json",
        ],
        0,
    );
    let o = step(&["factor", "--input", "cond.json", "--out", "factor.json"], 0);
    assert!(stderr(&o).contains("F[A(0,1)]"));
    step(&["supermodular", "--input", "factor.json", "--out", "super.json"], 0);
    let o = step(
        &[
            "compare",
            "--input",
            "super.json",
            "--target",
            "smds2",
            "--allow-conjugation",
        ],
        0,
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("conjugated true"));
    step(&["compare", "--input", "super.json", "--target", "smds2"], 1);

    let o = step(&["supermodular", "--input", "factor.json", "--format", "text"], 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("rank = 5\n"), "{text}");
    assert!(text.contains("T2_hat = diag(1, "), "{text}");
}
