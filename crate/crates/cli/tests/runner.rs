use cnpint_cli::config::{PrecondKind, RunConfig};
use cnpint_cli::solve::{meta_path, SINGULAR_MARK, TABLE_COLUMNS};
use cnpint_cli::{
    run_solve, run_spectrum, run_verify, write_table, CheckEnv, SolveContext, SpectrumStatus, VerifyScope,
};
use cnpint_core::spatial::SetId;
use std::process::Command;

fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn table_has_fixed_columns_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let ctx = SolveContext::default();
    let rows = vec![
        run_solve(&RunConfig::new(SetId::II, 8).without_reference(), &ctx).unwrap(),
        run_solve(&RunConfig::new(SetId::III, 8).without_reference().with_precond(PrecondKind::P1), &ctx).unwrap(),
    ];
    write_table(&path, &rows).unwrap();
    let (header, body) = read_csv(&path);
    assert_eq!(header, TABLE_COLUMNS);
    assert_eq!(body[0][3], (8 * 8 * 4).to_string());
    assert_eq!(body[0][9], "converged");
    assert_eq!(body[1][6], SINGULAR_MARK);
    assert_eq!(body[1][7], SINGULAR_MARK);
    let meta = std::fs::read_to_string(meta_path(&path)).unwrap();
    assert!(meta.contains("grid_counts = intervals"));
}

#[test]
fn spectrum_files_and_singular_p1() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("s3");
    let files = run_spectrum(&RunConfig::new(SetId::III, 8), &prefix).unwrap();
    assert_eq!(files.p1, SpectrumStatus::Singular);
    let SpectrumStatus::Written(p) = &files.palpha else { panic!("{:?}", files.palpha) };
    let (header, body) = read_csv(p);
    assert_eq!(header, ["re", "im", "class"]);
    assert_eq!(body.len(), 8 * 8 * 4);
    let (_, ops) = read_csv(&files.operator);
    assert!(ops.iter().any(|r| r[2] == "zero"));
}

#[test]
fn core_scope_passes_and_negative_control_fails() {
    let ok = run_verify(VerifyScope::Only(cnpint_cli::Scope::Core), &CheckEnv::default(), |_| {});
    assert!(ok.ok(), "{:#?}", ok.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    let bad = run_verify(
        VerifyScope::Only(cnpint_cli::Scope::Core),
        &CheckEnv { corrupt_lambda: true, ..CheckEnv::default() },
        |_| {},
    );
    let failed: Vec<_> = bad.checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert_eq!(failed, ["apply-path-equivalence"]);
}

#[test]
fn binary_runs_a_batch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("batch.toml");
    let table = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "[[run]]\npreset = \"I\"\nnt = 8\nreference_level = -1\ntable = {:?}\n\n\
             [[run]]\npreset = \"I\"\nnt = 8\nprecond = \"P1\"\nreference_level = -1\ntable = {:?}\n",
            table, table
        ),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cnpint"))
        .args(["--threads", "1", "solve", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, body) = read_csv(&table);
    assert_eq!(body.len(), 2);
    assert_eq!(body[1][4], "P1");
    let p1: usize = body[1][6].parse().unwrap();
    let pa: usize = body[0][6].parse().unwrap();
    assert!(pa < p1);

    let bad = Command::new(env!("CARGO_BIN_EXE_cnpint")).args(["solve", "--preset", "VII"]).output().unwrap();
    assert!(!bad.status.success());
}
