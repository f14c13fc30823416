use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn icft(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_icft"));
    cmd.args(args).current_dir(dir).env_remove("ICFT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header row and data rows of a CSV document, comments dropped.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = csv_rows(text);
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("{name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn text_column(text: &str, name: &str) -> Vec<String> {
    let (header, rows) = csv_rows(text);
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k].clone()).collect()
}

#[test]
fn constant_scenario_three_by_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", "preset = \"constant\"\n");
    let out = icft(&["evolve", "--config", &cfg], dir.path(), &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        ["t", "x", "energy_density", "heat_current", "charge_density", "charge_current"]
    );
    assert_eq!(rows.len(), 9);
    assert!(column(&text, "heat_current").iter().all(|j| *j == 0.0));
    for e in column(&text, "energy_density") {
        assert!((e - PI / 6.0).abs() < 1e-12);
    }
}

#[test]
fn negative_beta_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "bad.toml",
        "preset = \"constant\"\n[scenario.beta]\nvalue = -1.0\n",
    );
    let out = icft(&["evolve", "--config", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scenario.beta") && err.contains("positive"), "{err}");
}

#[test]
fn config_problems_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let unknown = write(&dir, "u.toml", "preset = \"constant\"\n[grids]\ny = [1.0]\n");
    let syntax = write(&dir, "s.toml", "[scenario\n");
    let mismatch = write(&dir, "m.toml", "preset = \"constant\"\ntask = \"verify\"\n");
    let empty_grid = write(&dir, "e.toml", "preset = \"constant\"\n[grids]\nx = []\n");
    for cfg in [&unknown, &syntax, &mismatch, &empty_grid] {
        let out = icft(&["evolve", "--config", cfg], dir.path(), &[]);
        assert_eq!(out.status.code(), Some(2), "{cfg}");
    }
    let missing = icft(&["evolve", "--config", "nowhere.toml"], dir.path(), &[]);
    assert_eq!(missing.status.code(), Some(2));
    let no_task = icft(&["simulate", "--config", &unknown], dir.path(), &[]);
    assert_eq!(no_task.status.code(), Some(2));
    let ok = write(&dir, "ok.toml", "preset = \"constant\"\n");
    let threads = icft(&["evolve", "--config", &ok], dir.path(), &[("ICFT_THREADS", "zero")]);
    assert_eq!(threads.status.code(), Some(2));
    let routes = icft(
        &["transport", "--config", &ok, "--routes", "fastest"],
        dir.path(),
        &[],
    );
    assert_eq!(routes.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "v.toml", "preset = \"cosine-velocity\"\n");
    let one = icft(&["evolve", "--config", &cfg, "--check"], dir.path(), &[("ICFT_THREADS", "1")]);
    let two = icft(&["evolve", "--config", &cfg, "--check"], dir.path(), &[("ICFT_THREADS", "3")]);
    let again = icft(&["evolve", "--config", &cfg, "--check"], dir.path(), &[]);
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(one.stdout, again.stdout);
}

#[test]
fn echoed_header_reproduces_the_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "k.toml",
        "preset = \"kink-beta\"\n[grids]\nx = [-5.0, 0.0, 5.0]\n",
    );
    for format in ["csv", "json"] {
        let first = dir.path().join(format!("first.{format}"));
        let second = dir.path().join(format!("second.{format}"));
        let a = icft(
            &["evolve", "--config", &cfg, "--format", format, "--out", first.to_str().unwrap()],
            dir.path(),
            &[],
        );
        assert!(a.status.success());
        assert!(a.stdout.is_empty());
        let b = icft(
            &["evolve", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()],
            dir.path(),
            &[],
        );
        assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
        let (ta, tb) = (
            std::fs::read_to_string(&first).unwrap(),
            std::fs::read_to_string(&second).unwrap(),
        );
        let strip = |t: &str| t.replace("first.", "second.");
        assert_eq!(strip(&ta), tb);
    }
}

#[test]
fn json_output_rounds_and_nulls() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "t.toml",
        "preset = \"gaussian-bump-transport\"\n[grids]\nomega = [0.0, 1.0]\n[output]\nprecision = 6\n",
    );
    let out = icft(
        &["transport", "--config", &cfg, "--routes", "greenkubo", "--format", "json"],
        dir.path(),
        &[],
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let columns: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    let k11 = columns.iter().position(|c| *c == "greenkubo_k11").unwrap();
    assert!(v["rows"][0][k11].is_null());
    let x = v["rows"][1][k11].as_f64().unwrap();
    assert_eq!(format!("{x:.5e}").parse::<f64>().unwrap(), x);
}

#[test]
fn omega_zero_marks_only_its_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "t.toml",
        "preset = \"gaussian-bump-transport\"\n[grids]\nomega = [0.0, 0.5, 1.0]\n",
    );
    let out = icft(
        &["transport", "--config", &cfg, "--routes", "closed,greenkubo"],
        dir.path(),
        &[],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let errors = text_column(&text, "greenkubo_error");
    assert!(errors[0].contains("omega = 0"), "{}", errors[0]);
    assert_eq!(&errors[1..], ["ok", "ok"]);
    let k11 = column(&text, "greenkubo_k11");
    assert!(k11[0].is_nan() && k11[1] > 0.0 && k11[2] > 0.0);
    let closed = column(&text, "closed_k11");
    assert!(closed.iter().all(|k| k.is_finite()));
}

#[test]
fn bump_closed_route_matches_wiedemann_franz() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "t.toml",
        "preset = \"gaussian-bump-transport\"\n[grids]\nomega = { start = 0.25, stop = 4.0, count = 16 }\n",
    );
    let out = icft(&["transport", "--config", &cfg], dir.path(), &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (wf, expected) = (column(&text, "closed_wf"), column(&text, "wf_expected"));
    for (a, b) in wf.iter().zip(&expected) {
        assert!((a / b - 1.0).abs() < 1e-13);
    }
    let k11 = column(&text, "closed_k11");
    assert!(k11.windows(2).all(|w| w[1] < w[0]));
    assert!(text.contains("# drude_closed = [[3.1830988618379069e-1, 0.0000000000000000e0], [0.0000000000000000e0, 1.0471975511965976e0]]"));
}

#[test]
fn constant_velocity_all_routes_vanish() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "t.toml",
        "preset = \"gaussian-bump-transport\"\n[transport]\nvelocity = { kind = \"constant\", value = 1.0 }\n",
    );
    let out = icft(&["transport", "--config", &cfg, "--routes", "all"], dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for route in ["closed", "greenkubo", "dynamical"] {
        for entry in ["k11", "k12", "k21", "k22"] {
            for v in column(&text, &format!("{route}_{entry}")) {
                assert!(v.abs() < 1e-6, "{route} {entry} {v}");
            }
        }
        assert!(text_column(&text, &format!("{route}_error")).iter().all(|e| e == "ok"));
    }
    for dev in ["dev_greenkubo", "dev_dynamical"] {
        assert!(column(&text, dev).iter().all(|d| *d == 0.0));
    }
    let drude = text
        .lines()
        .find(|l| l.starts_with("# drude_dynamical = "))
        .unwrap();
    let numbers: Vec<f64> = drude["# drude_dynamical = ".len()..]
        .split(|c: char| "[], ".contains(c))
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((numbers[0] * PI - 1.0).abs() < 1e-4);
    assert!((numbers[3] * 3.0 / PI - 1.0).abs() < 1e-4);
}

#[test]
fn evolve_check_on_cosine_velocity_with_kink_beta() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "v.toml",
        "preset = \"cosine-velocity\"\n[scenario]\nbeta = { kind = \"step\", mean = 1.0, jump = 0.4, eps = 1.0 }\n",
    );
    let out = icft(&["evolve", "--config", &cfg, "--check"], dir.path(), &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["energy_density", "heat_current", "charge_density", "charge_current"] {
        assert!(column(&text, name).iter().all(|v| v.is_finite()));
    }
    assert!(column(&text, "heat_current").iter().any(|v| v.abs() > 1e-3));
    for name in [
        "residual_energy",
        "residual_heat_current",
        "residual_charge",
        "residual_charge_current",
    ] {
        assert!(column(&text, name).iter().all(|r| r.abs() < 1e-6), "{name}");
    }
}

#[test]
fn verify_passes_on_default_and_fails_on_corruption() {
    let dir = TempDir::new().unwrap();
    let plain = write(&dir, "plain.toml", "[verify]\nsamples = 200\n");
    let out = icft(&["verify", "--config", &plain, "--verbose"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# histogram_lightcone.group_property = "));
    assert!(text_column(&text, "status").iter().all(|s| s == "PASS"));

    let bad = write(
        &dir,
        "bad.toml",
        "[verify]\nsamples = 200\ncorrupt_inverse = true\n",
    );
    let out = icft(&["verify", "--config", &bad], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let (_, rows) = csv_rows(&text);
    let group = rows.iter().find(|r| r[0] == "lightcone.group_property").unwrap();
    assert_eq!(group[4], "FAIL");
}

#[test]
fn fermion_correlator_has_complex_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "preset = \"constant\"\n[grids]\nx = [-0.5, 0.5]\nt = [0.0]\n[correlate]\nkind = \"fermion\"\nx2 = 0.5\n",
    );
    let out = icft(&["correlate", "--config", &cfg], dir.path(), &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text_column(&text, "status"), ["ok", "coincident"]);
    let im = column(&text, "im");
    // ⟨ψ⁺(-1/2) ψ⁻(1/2)⟩ = i / (2 sinh(-π)) for free fermions at v = β = 1.
    assert!((im[0] + 1.0 / (2.0 * PI.sinh())).abs() < 1e-12);
    assert!(column(&text, "re")[0].abs() < 1e-15);
}
