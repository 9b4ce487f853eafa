use std::process::{Command, Output};

use unitary_fisher::estimate::{read_report, EstimationReport, SearchReport};
use unitary_fisher::povm::{random_product_povm, write_povm};
use unitary_fisher::verify::VerifyReport;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitary-fisher"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn matrix_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| l.trim_start().starts_with('['))
        .map(|l| {
            l.trim()
                .trim_matches(|c| c == '[' || c == ']')
                .split_whitespace()
                .map(|x| x.parse().unwrap())
                .collect()
        })
        .collect()
}

#[test]
fn qfi_at_quarter_turn_matches_closed_form() {
    let (a, t) = (std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_3);
    let (sa, st) = (format!("{a:.17}"), format!("{t:.17}"));
    let o = bin(&[
        "qfi", "--d", "2", "--alpha", &sa, "--theta", &st, "--phi", "0.3",
    ]);
    assert!(o.status.success());
    let h = matrix_rows(&stdout(&o));
    let expected = [
        4.0,
        4.0 * a.sin().powi(2),
        4.0 * a.sin().powi(2) * t.sin().powi(2),
    ];
    for (i, row) in h.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let e = if i == j { expected[i] } else { 0.0 };
            assert!((v - e).abs() < 1e-9);
        }
    }
    assert_eq!(h.len(), 3);
    assert!((h[1][1] - 2.0).abs() < 1e-9 && (h[2][2] - 1.5).abs() < 1e-9);
}

#[test]
fn bell_merit_is_three() {
    let o = bin(&[
        "merit", "--povm", "bell", "--d", "2", "--alpha", "0.9", "--theta", "1.1", "--phi", "2.2",
        "--json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["merit"]["merit"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn merit_from_file_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.povm");
    write_povm(&random_product_povm(2, 3, 12).unwrap(), &path).unwrap();
    let o = bin(&[
        "merit",
        "--povm-file",
        path.to_str().unwrap(),
        "--alpha",
        "0.5",
        "--theta",
        "1.3",
        "--phi",
        "0.4",
        "--json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let m = v["merit"]["merit"].as_f64().unwrap();
    assert!(m <= 3.0 + 1e-8);
    assert!((m - 1.0).abs() < 1e-9);
}

#[test]
fn sweeps_have_constant_merit_columns() {
    for (povm, value) in [("bell", 3.0), ("product:2,4", 1.0)] {
        let o = bin(&["sweep", "--povm", povm]);
        assert!(o.status.success());
        let text = stdout(&o);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "alpha,theta,phi,merit,min_p,qcrb_min_eig"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 125);
        for r in rows {
            let merit: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
            assert!((merit - value).abs() < 1e-9);
        }
    }
}

#[test]
fn sweep_rejects_boundary_grid() {
    let o = bin(&["sweep", "--povm", "bell", "--theta-grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_and_usage_errors_exit_two() {
    let o = bin(&["qfi", "--alpha", "0.0", "--theta", "1.0", "--phi", "0.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    assert_eq!(
        bin(&[
            "merit",
            "--povm",
            "reduced-bell:9",
            "--alpha",
            "1",
            "--theta",
            "1",
            "--phi",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(bin(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_zero_tolerance_fails() {
    let ok = bin(&["verify", "--only", "1,2,6"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(
        stdout(&ok)
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        3
    );
    let bad = bin(&["verify", "--only", "1", "--tol", "0"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).starts_with("FAIL"));
}

#[test]
fn verify_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let o = bin(&[
        "verify",
        "--only",
        "4,6",
        "--json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let report: VerifyReport = read_report(&path).unwrap();
    assert_eq!(report.checks.len(), 2);
    assert!(report.all_pass);
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = bin(&[
            "simulate",
            "--povm",
            "bell",
            "--alpha",
            "0.6",
            "--theta",
            "1.0",
            "--phi",
            "0.8",
            "--n",
            "2000",
            "--reps",
            "20",
            "--seed",
            "11",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r: EstimationReport = read_report(&a).unwrap();
    assert_eq!((r.seed, r.reps, r.n), (11, 20, 2000));
}

#[test]
fn simulate_rejects_single_reduced_bell() {
    let o = bin(&[
        "simulate",
        "--povm",
        "reduced-bell:1",
        "--alpha",
        "0.6",
        "--theta",
        "1.0",
        "--phi",
        "0.8",
        "--reps",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("identifiable"));
}

#[test]
fn search_reports_witness_for_qutrits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = bin(&[
        "search",
        "--d",
        "3",
        "--trials",
        "500",
        "--seed",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let r: SearchReport = read_report(&path).unwrap();
    assert!(r.found);
    assert_eq!(r.seed, 4);
}
