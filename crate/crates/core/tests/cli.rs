use std::io::Write;
use std::process::{Command, Output};

fn sfwm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfwm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table3_all_cells_match() {
    let o = sfwm(&["table3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("16/16 cells within tolerance"));
}

#[test]
fn table3_json_has_provenance() {
    let o = sfwm(&["table3", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 16);
    assert!(cells.iter().all(|c| c["source"].is_string() && c["within"] == true));
}

#[test]
fn si_ring_limits_row() {
    let o = sfwm(&["limits", "cw-ring-si"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for needle in ["P_XPM         0.829", "P_multi      0.0177 W  <- binding", "P_TPA          8.02", "P_CWFCA      0.0609"] {
        assert!(text.contains(needle), "{needle} missing from\n{text}");
    }
}

#[test]
fn fiber_prints_infinite_absorption_limits() {
    let text = stdout(&sfwm(&["limits", "pulsed-fiber-sio2"]));
    assert!(text.lines().any(|l| l.contains("P_TPA") && l.contains('∞')));
    assert!(text.lines().any(|l| l.contains("P_FCA") && l.contains('∞')));
}

#[test]
fn limits_json_round_trips_binding() {
    for name in ["pulsed-fiber-sio2", "cw-waveguide-as2s3", "pulsed-ring-diamond", "cw-ring-si"] {
        let o = sfwm(&["limits", name, "--json"]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let report: sfwm::LimitReport = serde_json::from_value(v["report"].clone()).unwrap();
        let lowest = report
            .ladder
            .iter()
            .min_by(|a, b| a.power.watts().total_cmp(&b.power.watts()))
            .unwrap();
        assert_eq!(lowest.kind, report.binding, "{name}");
    }
}

#[test]
fn empty_design_is_a_parse_error() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"").unwrap();
    let o = sfwm(&["limits", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn invalid_design_exit_code() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    let text = sfwm::design::BUNDLED_DESIGNS[3].1.replace("q_factor = 7900.0", "q_factor = 0.5");
    f.write_all(text.as_bytes()).unwrap();
    let o = sfwm(&["limits", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q_factor > 1"));
}

#[test]
fn sweep_csv_is_deterministic() {
    let args = ["sweep", "cw-waveguide-as2s3", "--var", "p", "--from", "0", "--to", "0.5", "--points", "5", "--csv"];
    let a = sfwm(&args);
    let b = sfwm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut r = csv::Reader::from_reader(a.stdout.as_slice());
    let pairs: Vec<f64> = r.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(pairs.len(), 5);
    assert!(pairs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn sweep_rejects_nonpositive_length() {
    let o = sfwm(&["sweep", "pulsed-fiber-sio2", "--var", "l", "--from", "-1", "--to", "10", "--points", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn materials_listing() {
    let text = stdout(&sfwm(&["materials", "--csv"]));
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("As2S3,2.9e-18,1e-14,upper"));
}

#[test]
fn oracle_short_pulse_ring_within_budget() {
    let o = sfwm(&["oracle", "pulsed-ring-diamond", "--grid", "128", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["deviation"].as_f64().unwrap().abs() < 0.10);
}

#[test]
fn oracle_degenerate_grid_exits_two() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    let text = r#"
material = "Si"
[structure]
kind = "ring"
circumference_um = 31.41592653589793
a_eff_um2 = 0.13
q_factor = 7900.0
n_eff = 2.47
gamma_per_w_m = 190.0
[pump]
mode = "pulsed"
wavelength_nm = 1558.5
power_w = 0.01
fwhm_ps = 1.0
rep_rate_mhz = 10.0
shape = "gaussian"
[oracle]
points = 2
"#;
    f.write_all(text.as_bytes()).unwrap();
    let o = sfwm(&["oracle", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--grid"));
}

#[test]
fn export_writes_a_readable_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("jsa.txt");
    let o = sfwm(&["oracle", "pulsed-ring-diamond", "--grid", "128", "--export", path.to_str().unwrap()]);
    assert!(o.status.success());
    let jsa = sfwm::oracle::export::read_jsa(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(jsa.amplitude.shape(), (128, 128));
}
