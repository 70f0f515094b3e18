use std::path::Path;
use std::process::{Command, Output};

use shellkorn::report::parse_csv;
use shellkorn::Mode;

const SWEEP: &str = "[surface]\npreset = cylinder-circular radius=1 length=4\n\
[experiment]\nmode = ansatz\nn = 2 3 4\n[output]\nprefix = cyl\ntimings = false\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shellkorn")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

#[test]
fn sweep_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", SWEEP);
    let mut outputs = Vec::new();
    for out in ["a", "b"] {
        let o = run(dir.path(), &["--out", out, "sweep", &cfg]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(dir.path().join(out).join("cyl-ansatz.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let (rows, footer) = parse_csv(std::str::from_utf8(&outputs[0]).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.mode == Mode::Ansatz && r.wall_ms == 0.0));
    assert!(rows.windows(2).all(|w| w[0].h > w[1].h));
    assert!(footer.slope > 1.0 && footer.slope < 2.0);
    assert_eq!(footer.seed, 0x5eed);
}

#[test]
fn svg_output_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", SWEEP);
    let o = run(dir.path(), &["--out", "plots", "--format", "svg", "ansatz", &cfg]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(dir.path().join("plots/cyl-ansatz.svg")).unwrap();
    assert!(svg.contains("<svg") && !dir.path().join("plots/cyl-ansatz.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let bad_key = write(p, "bad.cfg", "[surface]\npreset = cylinder-circular\n[experiment]\nh = 0.1\nfoo = 1\n");
    let o = run(p, &["sweep", &bad_key]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.cfg"));

    assert_eq!(run(p, &["sweep", "missing.cfg"]).status.code(), Some(2));
    assert_eq!(run(p, &["no-such-command"]).status.code(), Some(2));

    let vanishing = write(p, "geom.cfg", "[surface]\na = 0\nb = sin(theta)\nc = 1\n[experiment]\nh = 0.1\n");
    assert_eq!(run(p, &["geometry-check", &vanishing]).status.code(), Some(4));

    let eight: String = (0..64)
        .map(|i| {
            let s = std::f64::consts::TAU * i as f64 / 64.0;
            format!("{} {} 0\n", s.sin(), s.sin() * s.cos())
        })
        .collect();
    let curve = write(p, "eight.curve", &format!("planar 64\n{eight}"));
    let crossing = write(p, "curve.cfg", &format!("[surface]\ncurve = {curve}\n[experiment]\nh = 0.1\n"));
    assert_eq!(run(p, &["geometry-check", &crossing]).status.code(), Some(4));

    let tight = write(p, "tight.cfg", "[surface]\npreset = cylinder-circular\n[experiment]\nmode = eig\nh = 0.1 0.05 0.025\n[eig]\nmaxit = 1\n");
    assert_eq!(run(p, &["eig", &tight]).status.code(), Some(3));

    let ok = write(p, "ok.cfg", SWEEP);
    let o = run(p, &["geometry-check", &ok]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", SWEEP);
    write(dir.path(), "blocker", "");
    let o = run(dir.path(), &["--out", "blocker/sub", "sweep", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blocker"));
}
