use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "\
# small blocks for tests
num_channels = 4
watermark_channel_index = 2
bits = 56
packet = 5a3c96e
";

fn psym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psym"))
        .args(args)
        .env_remove("PSYM_LOG")
        .output()
        .expect("run psym")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("test.cfg");
    fs::write(&path, CONFIG).unwrap();
    path.to_str().unwrap().to_owned()
}

fn sorted_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn simulate_writes_one_file_and_sidecar_per_point_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = psym(&["simulate", "--config", &cfg, "--seed", "5", "--snr=-20,-5,inf", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).lines().count(), 3);
    }
    let names = sorted_files(&a);
    assert_eq!(names.iter().filter(|n| n.ends_with(".psymspec")).count(), 3);
    assert_eq!(names.iter().filter(|n| n.ends_with(".psymspec.truth")).count(), 3);
    assert_eq!(names, sorted_files(&b));
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
}

#[test]
fn simulate_into_unwritable_target_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("sub");
    let o = psym(&["simulate", "--bits", "28", "--snr=0", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(sorted_files(dir.path()), vec!["file".to_string()]);
}

#[test]
fn detect_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("sim");
    let o = psym(&["simulate", "--config", &cfg, "--snr=inf,-200", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let files: Vec<String> = sorted_files(&out).into_iter().filter(|n| n.ends_with(".psymspec")).collect();
    let clean = out.join(files.iter().find(|n| n.contains("inf")).unwrap());
    let noise = out.join(files.iter().find(|n| n.contains("-200")).unwrap());

    let o = psym(&["detect", clean.to_str().unwrap(), "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("pe = 0"), "{text}");
    assert!(text.contains("pseudonym (majority): 5a3c96e"), "{text}");

    let o = psym(&["detect", clean.to_str().unwrap(), "--config", &cfg, "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("label,snr_db,total_bits,bit_errors,pe,sync_offset_error_bins\n"));
    assert!(stdout(&o).contains(",inf,56,0,0,0\n"), "{}", stdout(&o));

    let o = psym(&["detect", noise.to_str().unwrap(), "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no signal detected"));
    let o = psym(&["detect", noise.to_str().unwrap(), "--config", &cfg, "--force"]);
    assert_eq!(code(&o), 0);

    let corrupt = dir.path().join("corrupt.psymspec");
    let bytes = fs::read(&clean).unwrap();
    fs::write(&corrupt, &bytes[..bytes.len() - 4]).unwrap();
    let o = psym(&["detect", corrupt.to_str().unwrap(), "--config", &cfg]);
    assert_eq!(code(&o), 3);
    let mut magic = bytes.clone();
    magic[..8].copy_from_slice(b"XXXXXXXX");
    fs::write(&corrupt, &magic).unwrap();
    assert_eq!(code(&psym(&["detect", corrupt.to_str().unwrap()])), 3);

    assert_eq!(code(&psym(&["detect", clean.to_str().unwrap(), "--packet", "12345"])), 4);
    assert_eq!(code(&psym(&["detect", clean.to_str().unwrap(), "--channel", "9"])), 4);
    assert_eq!(code(&psym(&["detect", dir.path().join("nope").to_str().unwrap()])), 1);
}

#[test]
fn argument_errors_and_help() {
    assert_eq!(code(&psym(&["sweep"])), 4);
    assert_eq!(code(&psym(&["frobnicate"])), 4);
    assert_eq!(code(&psym(&["sweep", "--out", "x.csv", "--bits", "ten"])), 4);
    assert_eq!(code(&psym(&["sweep", "--out", "x.csv", "--snr", "a:b"])), 4);
    assert_eq!(code(&psym(&["sweep", "--out", "x.csv", "--config", "/nonexistent/cfg"])), 1);
    let o = psym(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("simulate") && stdout(&o).contains("sweep"));
    assert_eq!(code(&psym(&["--version"])), 0);
}

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pe.csv");
    let plot = dir.path().join("pe.dat");
    let args = [
        "sweep", "--seed", "3", "--snr=0,10,-4", "--bits", "560", "--packet", "0ABCDEF",
        "--out", csv.to_str().unwrap(), "--plot", plot.to_str().unwrap(), "--format", "csv",
    ];
    let o = psym(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(stdout(&o), text);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("snr-4,-4,560,"));
    assert!(rows[2].starts_with("snr0,0,560,"));
    assert!(rows[3].starts_with("snr10,10,560,0,0,"));
    let plot_text = fs::read_to_string(&plot).unwrap();
    assert!(plot_text.contains("# pe=0 floor"), "{plot_text}");
    assert!(plot_text.contains("\n10 0.0008928571428571428\n"), "{plot_text}");

    let again = dir.path().join("again.csv");
    let mut args2 = args;
    args2[9] = again.to_str().unwrap();
    assert_eq!(code(&psym(&args2)), 0);
    assert_eq!(fs::read(&again).unwrap(), text.as_bytes());
}

#[test]
fn log_level_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_psym"))
        .args(["sweep", "--snr=10", "--bits", "28", "--out"])
        .arg(dir.path().join("x.csv"))
        .env("PSYM_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("errors in 28 bits"));
}
