use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fhp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn collision_table_lists_all_entries() {
    let out = fhp(&["collision-table"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 128);
    // {1,4} = bits 0 and 3 = 9; with q = 1 it becomes {2,5} = 18
    assert!(lines.contains(&"1 9 18"));
    assert!(lines.contains(&"0 9 36"));
    assert!(lines.contains(&"0 21 42"));
}

#[test]
fn verify_passes() {
    let out = fhp(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("5 of 5 checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(fhp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fhp(&["run"]).status.code(), Some(2));
    assert_eq!(fhp(&["measure", "entropy", "--config", "x"]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "widht = 100\n").unwrap();
    let out = fhp(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("widht") && err.contains("line 1"), "{err}");
}

fn write_config(dir: &Path, name: &str, extra: &str) -> String {
    let out = dir.join(name);
    let cfg = dir.join(format!("{name}.txt"));
    fs::write(
        &cfg,
        format!(
            "width = 60\nheight = 60\nsteps = 40\nseed = 42\nscenario = hole\nfill = 0.667\n\
             block = 10\nwindow = 5\nframe_every = 20\noutput_dir = {}\n{extra}",
            out.display()
        ),
    )
    .unwrap();
    cfg.to_string_lossy().into_owned()
}

#[test]
fn run_twice_gives_identical_directories() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a", "");
    let b = write_config(dir.path(), "b", "workers = 3\n");
    let ra = fhp(&["run", "--config", &a]);
    let rb = fhp(&["run", "--config", &b]);
    assert!(ra.status.success() && rb.status.success());
    assert!(stdout(&ra).contains("site updates/s"));
    let (ca, cb) = (contents(&dir.path().join("a")), contents(&dir.path().join("b")));
    assert!(ca.contains_key("frame_000040.pgm"));
    assert_eq!(ca, cb);
}

#[test]
fn run_accepts_mask() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("m.pbm");
    let mut pbm = String::from("P1\n60 60\n");
    for y in 0..60 {
        let row: Vec<&str> = (0..60)
            .map(|x| {
                if (25..35).contains(&x) && (25..35).contains(&y) {
                    "1"
                } else {
                    "0"
                }
            })
            .collect();
        pbm.push_str(&row.join(" "));
        pbm.push('\n');
    }
    fs::write(&mask, pbm).unwrap();
    let cfg = write_config(dir.path(), "m", "boundary = walled\n");
    let out = fhp(&["run", "--config", &cfg, "--mask", mask.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let masses = text.lines().find(|l| l.starts_with("mass")).unwrap();
    let nums: Vec<&str> = masses.split_whitespace().filter(|w| w.parse::<u64>().is_ok()).collect();
    assert_eq!(nums[0], nums[1]);
}

#[test]
fn measure_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v.txt");
    fs::write(
        &cfg,
        format!(
            "width = 32\nheight = 32\nsteps = 0\nseed = 3\nscenario = uniform\nfill = 0.5\n\
             block = 8\nensembles = 2\nprobe_steps = 60\noutput_dir = {}\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let out = fhp(&["measure", "viscosity", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("viscosity"));
    let csv = fs::read_to_string(dir.path().join("viscosity.csv")).unwrap();
    assert!(csv.starts_with("step,mode_amplitude\n"));

    let out = fhp(&["measure", "sound", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(dir.path().join("sound_speed.csv").exists());
}
