use std::process::{Command, Output};

fn freewave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freewave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn psi_gaussian_at_origin() {
    let o = freewave(&["psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "0", "--t", "0,0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["psi"]["re"].as_f64().unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert_eq!(v["method"], "closed");
}

#[test]
fn psi_json_round_trips_library_value() {
    use freewave::{Amplitude, Complex, Method, PhysicalConfig};
    let o = freewave(&["psi", "--amplitude", "sech", "--beta", "1.5", "--x", "0.7", "--t", "0.4,-0.2", "--json"]);
    let v = json(&o);
    let amp = Amplitude::sech(1.5, 0.0).unwrap();
    let lib = freewave::wavepacket::psi(&amp, 0.7, Complex::new(0.4, -0.2), &PhysicalConfig::natural(), Method::Quadrature)
        .unwrap();
    assert_eq!(v["psi"]["re"].as_f64().unwrap().to_bits(), lib.psi.re.to_bits());
    assert_eq!(v["psi"]["im"].as_f64().unwrap().to_bits(), lib.psi.im.to_bits());
}

#[test]
fn psi_cross_method() {
    let closed = json(&freewave(&["psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "1", "--t", "1,0", "--json"]));
    let quad = json(&freewave(&[
        "psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "1", "--t", "1,0", "--method", "quadrature", "--json",
    ]));
    for part in ["re", "im"] {
        let d = closed["psi"][part].as_f64().unwrap() - quad["psi"][part].as_f64().unwrap();
        assert!(d.abs() < 1e-9, "{part}: {d}");
    }
}

#[test]
fn psi_sech_normalization_text() {
    let o = freewave(&["psi", "--amplitude", "sech", "--beta", "3.14159265", "--x", "0", "--t", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("psi = 1.0000000"), "{text}");
}

#[test]
fn psi_flag_errors_exit_2() {
    let o = freewave(&["psi", "--amplitude", "gaussian", "--x", "0", "--t", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = freewave(&["psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "0", "--t", "1", "--mass", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = freewave(&["psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "0", "--t", "zz"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn psi_divergent_series_exits_1() {
    // the heat series of a sech packet has zero radius of convergence
    let o = freewave(&["psi", "--amplitude", "sech", "--beta", "1", "--x", "1", "--t", "0.5,-0.1", "--method", "heat"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zeta_methods_agree() {
    let r = json(&freewave(&["zeta", "--m", "1", "--method", "reference", "--json"]));
    let l = json(&freewave(&["zeta", "--m", "1", "--method", "lattice", "--statistic", "fermi", "--json"]));
    let (r, l2) = (r["zeta"].as_f64().unwrap(), l["zeta"].as_f64().unwrap());
    assert!((r - 2.612375348685).abs() < 1e-12);
    assert!((r - l2).abs() < 1e-8);
    assert!(l["correction_sum"].as_f64().unwrap() > 0.0);
}

#[test]
fn zeta_out_of_range_exits_2() {
    assert_eq!(freewave(&["zeta", "--m", "0", "--method", "lattice", "--statistic", "bose"]).status.code(), Some(2));
    assert_eq!(freewave(&["zeta", "--m", "7"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    assert_eq!(freewave(&["verify", "--suite", "L1.1-*"]).status.code(), Some(0));
    assert_eq!(freewave(&["verify", "--suite", "none-*"]).status.code(), Some(2));
    let strict = freewave(&["verify", "--suite", "T3.1-*", "--tol", "1e-300", "--format", "json"]);
    let v = json(&strict);
    let failed = v["failed"].as_u64().unwrap();
    assert_eq!(strict.status.code(), Some(if failed > 0 { 1 } else { 0 }));
}

#[test]
fn verify_csv_schema() {
    let o = freewave(&["verify", "--suite", "E3.1-*", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "id,paper_eq,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err,passed");
    assert_eq!(lines.count(), 4);
}

#[test]
fn verify_is_deterministic() {
    let a = freewave(&["verify", "--format", "json"]).stdout;
    let b = freewave(&["verify", "--format", "json"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn table_glaisher_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let o = freewave(&["table", "--identity", "G2.4", "--grid", "0.5:2:16", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["grid_var", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r[5].parse::<f64>().unwrap() <= 1e-7));
}

#[test]
fn table_tau_sweep_and_errors() {
    let o = freewave(&["table", "--identity", "T2.1", "--grid", "1:8:8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 9);
    assert_eq!(freewave(&["table", "--identity", "G2.4", "--grid", "0:1:0"]).status.code(), Some(2));
    assert_eq!(freewave(&["table", "--identity", "X9.9", "--grid", "0:1:3"]).status.code(), Some(2));
}

#[test]
fn ledger_lists_reconciled_constants() {
    let o = freewave(&["ledger"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let cat = freewave::registry::Catalogue::bundled();
    assert_eq!(cat.ledger.len(), 7);
    for entry in &cat.ledger {
        assert!(text.contains(&entry.paper_eq), "{}", entry.paper_eq);
    }
    let v = json(&freewave(&["ledger", "--json"]));
    assert!(v.as_array().unwrap().iter().all(|e| e["evidence"].as_array().unwrap().len() >= 2));
}
