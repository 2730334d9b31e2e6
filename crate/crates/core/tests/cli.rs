use std::path::Path;

use lockstrain::app::{run, EXIT_CONFIG, EXIT_OK};

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("lockstrain").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identities_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("id.csv");
    assert_eq!(cli(&["identities", "--samples", "50", "--output", path(&out)]), EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("index,det,norm,"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn unknown_subcommand_and_flag() {
    assert_eq!(cli(&["relax"]), EXIT_CONFIG);
    assert_eq!(cli(&["identities", "--bogus"]), EXIT_CONFIG);
}

#[test]
fn config_errors_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[density]\nkind = quadratic\nshear = 3\n").unwrap();
    assert_eq!(cli(&["minimize", "--config", path(&cfg)]), EXIT_CONFIG);
    assert_eq!(
        cli(&["minimize", "--config", path(&dir.path().join("missing.cfg"))]),
        EXIT_CONFIG
    );
    assert_eq!(cli(&["minimize", "--density", "rubber"]), EXIT_CONFIG);
    assert_eq!(cli(&["identities", "--set", "run.samples"]), EXIT_CONFIG);
    // q below p/(p−1)
    assert_eq!(
        cli(&[
            "minimize",
            "--density",
            "stvk-gradpoly",
            "--set",
            "density.p=4",
            "--set",
            "density.q=1.2"
        ]),
        EXIT_CONFIG
    );
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("min.csv");
    std::fs::write(
        &cfg,
        "# small 2D problem\n[mesh]\ndim = 2\nsubdivisions = 3\n\n[load]\nbody_force = 0, -1\n\n[run]\nseed = 4\n",
    )
    .unwrap();
    assert_eq!(
        cli(&["minimize", "--config", path(&cfg), "--output", path(&out)]),
        EXIT_OK
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "node,x1,x2,y1,y2");
    assert_eq!(text.lines().count(), 1 + 16);
}

#[test]
fn figure1_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig.vtk");
    assert_eq!(
        cli(&["figure1", "--set", "figure1.subdivisions=4,4,4", "--output", path(&out)]),
        EXIT_OK
    );
    assert!(out.exists());
    assert!(dir.path().join("fig_reference.vtk").exists());
}

#[test]
fn constrained_rejects_incompatible_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    // √3 · 0.2^(1/3) ≈ 1.01 > 1
    let code = cli(&[
        "constrained-minimize",
        "--set",
        "locking.eps=0.2",
        "--rho",
        "1",
        "--set",
        "boundary.map=witness",
        "--set",
        "locking.kind=determinant",
        "--output",
        path(&out),
    ]);
    assert_eq!(code, EXIT_CONFIG);
}
