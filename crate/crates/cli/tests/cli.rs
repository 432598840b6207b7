use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn rbsde(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbsde")).args(args).arg("--out").arg(out).output().unwrap()
}

fn run(sub: &str, config: &Path, extra: &[&str]) -> (Output, TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![sub, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    (rbsde(&args, dir.path()), dir)
}

fn read(dir: &TempDir, name: &str) -> String {
    std::fs::read_to_string(dir.path().join(name)).unwrap()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn edited(base: &str, from: &str, to: &str) -> String {
    let text = std::fs::read_to_string(scenario(base)).unwrap();
    assert!(text.contains(from), "{from}");
    text.replace(from, to)
}

#[test]
fn trivial_solve_takes_two_iterations() {
    let (o, dir) = run("solve", &scenario("trivial.json"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read(&dir, "picard_report.csv");
    assert!(report.starts_with("iter,distance,ratio\n1,"));
    assert_eq!(report.lines().count(), 3);
    let json: serde_json::Value = serde_json::from_str(&read(&dir, "residuals.json")).unwrap();
    assert_eq!(json["iterations"], 2);
    assert!(json["residuals"]["equation"].as_f64().unwrap() <= 1e-12);
    assert_eq!(json["residuals"]["regulator_variation"], 0.0);
    // 2^9 - 1 nodes plus the header
    let solution = read(&dir, "solution.csv");
    assert_eq!(solution.lines().count(), 512);
    assert!(solution.starts_with("k,prefix_id,Y,Z,Kl,Ku\n0,0,"));
}

#[test]
fn resistance_distances_decay_geometrically() {
    let (o, dir) = run("solve", &scenario("resistance.json"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let d = column(&read(&dir, "picard_report.csv"), 1);
    assert!(*d.last().unwrap() < 1e-9);
    assert!(d.windows(2).all(|w| w[1] <= w[0]));
    let json: serde_json::Value = serde_json::from_str(&read(&dir, "residuals.json")).unwrap();
    assert_eq!(json["coefficients"]["empirical_contraction"], true);
    assert_eq!(json["residuals"]["passes"], true);
    assert!(json["coefficients"]["geometric_rate"].as_f64().unwrap() < 0.1);
}

#[test]
fn large_k_dependence_reports_no_contraction() {
    let (o, dir) = run("solve", &scenario("strong_k.json"), &[]);
    assert_eq!(o.status.code(), Some(5));
    let json: serde_json::Value = serde_json::from_str(&read(&dir, "residuals.json")).unwrap();
    assert_eq!(json["converged"], false);
    assert_eq!(json["smallness"]["condition_holds"], false);
    assert_eq!(json["smallness"]["printed_condition_holds"], false);
    assert_eq!(json["exit_code"], 5);
    assert_eq!(read(&dir, "picard_report.csv").lines().count(), 51);
}

#[test]
fn esm_check_routes_agree_but_unit_lipschitz_bound_fails() {
    let (o, dir) = run("esm-check", &scenario("esm_sinusoid.json"), &["--seed", "42"]);
    let csv = read(&dir, "esm_check.csv");
    assert_eq!(csv.lines().count(), 1001);
    for idx in [1, 2, 4, 5] {
        assert!(column(&csv, idx).iter().all(|g| g.abs() <= 1e-12));
    }
    // nearby pairs move apart by up to twice their input distance
    assert!(column(&csv, 3).iter().any(|g| *g < -1e-12));
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn esm_check_without_paths_is_empty() {
    let (o, dir) = run("esm-check", &scenario("esm_sinusoid.json"), &["--paths", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        read(&dir, "esm_check.csv"),
        "path_id,max_formula_vs_slaby_gap,max_formula_vs_oracle_gap,lipschitz_gap,flat_off_residual_l,flat_off_residual_u\n"
    );
}

#[test]
fn invalid_configs_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let crossing =
        write_config(&tmp, "crossing.json", &edited("esm_sinusoid.json", "[0.5, 0.3, 6.0]", "[-0.6, 0.3, 6.0]"));
    let (o, dir) = run("esm-check", &crossing, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("barrier gap"));
    assert!(!dir.path().join("esm_check.csv").exists());

    let typo = write_config(&tmp, "typo.json", &edited("trivial.json", "\"driver\"", "\"drivr\""));
    let (o, _) = run("solve", &typo, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("unknown field `drivr`") && err.contains("line 7"), "{err}");

    let (o, _) = run("solve", &tmp.path().join("missing.json"), &[]);
    assert_eq!(o.status.code(), Some(1));

    let (o, _) = run("converge", &scenario("oracle_mesh.json"), &["--mesh", "6,17"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("depth 17"));

    let o = Command::new(env!("CARGO_BIN_EXE_rbsde")).arg("solve").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn depend_rows_and_zero_perturbation() {
    let (o, dir) = run("depend", &scenario("resistance.json"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&dir, "depend.csv");
    assert!(csv.starts_with("eps,E_xi_hat_sq,lhs,ratio\n0.2,"));
    let ratio = column(&csv, 3);
    assert_eq!(ratio.len(), 3);
    assert!(ratio.iter().all(|r| r.is_finite() && *r > 0.0));

    let (o, dir) = run("depend", &scenario("resistance.json"), &["--eps", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&dir, "depend.csv"), "eps,E_xi_hat_sq,lhs,ratio\n0.0,0.0,0.0,0.0\n");
}

#[test]
fn depend_names_the_offending_eps() {
    let tmp = tempfile::tempdir().unwrap();
    let text = edited(
        "resistance.json",
        "\"depend\": { \"eps\": [0.2, 0.1, 0.05] }",
        "\"depend\": { \"eps\": [0.5], \"perturbation\": { \"kind\": \"clamp\", \"params\": [-0.4, 0.4] } }",
    );
    let cfg = write_config(&tmp, "up.json", &text);
    let (o, dir) = run("depend", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps = 0.5"));
    assert!(!dir.path().join("depend.csv").exists());
}

#[test]
fn local_time_interior_walks_have_zero_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = edited("reflected_walk.json", "[0.0]", "[-100.0]").replace("[1.0]", "[100.0]");
    let cfg = write_config(&tmp, "wide.json", &text);
    let (o, dir) = run("local-time", &cfg, &["--paths", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&dir, "local_time.csv"), "N,mean_relative_rmse\n256,0.0\n1024,0.0\n4096,0.0\n");

    let (o, dir) = run("local-time", &scenario("reflected_walk.json"), &["--mesh", "512", "--paths", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&dir, "local_time.csv").lines().count(), 2);

    let (o, _) = run("local-time", &scenario("reflected_walk.json"), &["--mesh", "32768"]);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run("local-time", &scenario("resistance.json"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_config() {
    let (_, a) = run("esm-check", &scenario("esm_sinusoid.json"), &["--paths", "5"]);
    let (_, b) = run("esm-check", &scenario("esm_sinusoid.json"), &["--paths", "5", "--seed", "42"]);
    let (_, c) = run("esm-check", &scenario("esm_sinusoid.json"), &["--paths", "5", "--seed", "43"]);
    assert_eq!(read(&a, "esm_check.csv"), read(&b, "esm_check.csv"));
    assert_ne!(read(&a, "esm_check.csv"), read(&c, "esm_check.csv"));
}

#[test]
fn converge_writes_mesh_table() {
    let (o, dir) = run("converge", &scenario("oracle_mesh.json"), &["--mesh", "4,6"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&dir, "converge.csv");
    assert!(csv.starts_with("N,sup_error\n4,"));
    assert!(column(&csv, 1).iter().all(|e| *e <= 1e-12));
}
