use std::fs;
use std::process::{Command, Output};

use polysample::bench::{read_bench_csv, read_compare_csv, BenchRecord, PhaseRecord};
use polysample::io::{read_decomposition, read_polytope_file, read_samples_csv};
use tempfile::TempDir;

const SQUARE: &str = r#"{"n": 2, "A": [[-1, 0], [1, 0], [0, -1], [0, 1]], "b": [0, 1, 0, 1]}"#;
const SIMPLEX3: &str = r#"{
  "n": 3,
  "A": [[-1, 0, 0], [0, -1, 0], [0, 0, -1], [1, 1, 1]],
  "b": [0, 0, 0, 1]
}"#;
const CUBE3: &str =
    r#"{"n":3,"A":[[-1,0,0],[1,0,0],[0,-1,0],[0,1,0],[0,0,-1],[0,0,1]],"b":[0,1,0,1,0,1]}"#;

fn polysample(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polysample"))
        .args(args)
        .env_remove("POLYSAMPLE_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

#[test]
fn volume_prints_exact_value() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "simplex3.json", SIMPLEX3);
    let out = polysample(&["volume", "--in", &p]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((v - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn vertices_and_triangulation_files() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "cube3.json", CUBE3);
    let v = path(&dir, "v.json");
    assert!(polysample(&["vertices", "--in", &p, "--out", &v])
        .status
        .success());
    let f = read_polytope_file(fs::File::open(&v).unwrap()).unwrap();
    assert_eq!(f.to_vertex_set().unwrap().len(), 8);
    for method in ["basis", "dd"] {
        let out = polysample(&["vertices", "--in", &p, "--method", method]);
        assert!(out.status.success());
        let f = read_polytope_file(&out.stdout[..]).unwrap();
        assert_eq!(f.to_vertex_set().unwrap().len(), 8);
    }
    let t = path(&dir, "t.json");
    assert!(polysample(&["triangulate", "--in", &p, "--out", &t])
        .status
        .success());
    let d = read_decomposition(fs::File::open(&t).unwrap()).unwrap();
    assert_eq!(d.len(), 6);
    assert!((d.total_volume() - 1.0).abs() < 1e-12);
}

#[test]
fn sample_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "square.json", SQUARE);
    for sampler in ["dbsop", "hitandrun", "rejection"] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let out = path(&dir, &format!("{sampler}{run}.csv"));
            let args = [
                "sample",
                "--in",
                &p,
                "--n-samples",
                "1000",
                "--seed",
                "42",
                "--sampler",
                sampler,
                "--out",
                &out,
            ];
            assert!(polysample(&args).status.success());
            bytes.push(fs::read(&out).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{sampler}");
        let table = read_samples_csv(&bytes[0][..]).unwrap();
        assert_eq!((table.n, table.simplex_index.len()), (2, 1000));
    }
    let a = polysample(&["sample", "--in", &p, "--n-samples", "50", "--seed", "1"]).stdout;
    let b = polysample(&["sample", "--in", &p, "--n-samples", "50", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn sample_is_independent_of_thread_cap() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "cube3.json", CUBE3);
    let args = ["sample", "--in", &p, "--n-samples", "40000", "--seed", "9"];
    let reference = polysample(&args).stdout;
    for threads in ["1", "3"] {
        let out = Command::new(env!("CARGO_BIN_EXE_polysample"))
            .args(args)
            .env("POLYSAMPLE_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        assert_eq!(out.stdout, reference, "{threads} threads");
    }
    let mut seq = vec!["--sequential"];
    seq.extend(args);
    assert_eq!(polysample(&seq).stdout, reference);
}

#[test]
fn bench_and_compare_outputs_parse_back() {
    let dir = TempDir::new().unwrap();
    let (b, ph) = (path(&dir, "b.csv"), path(&dir, "ph.csv"));
    let args = [
        "bench",
        "--family",
        "simplex",
        "--n-min",
        "2",
        "--n-max",
        "3",
        "--n-samples",
        "100",
        "--out",
        &b,
        "--phases-out",
        &ph,
    ];
    assert!(polysample(&args).status.success());
    let rec: Vec<BenchRecord> = read_bench_csv(fs::File::open(&b).unwrap()).unwrap();
    assert_eq!((rec[0].n, rec[0].v, rec[0].k), (2, 3, 1));
    let phases: Vec<PhaseRecord> = read_bench_csv(fs::File::open(&ph).unwrap()).unwrap();
    assert_eq!(phases.len(), 2);

    let p = write(&dir, "square.json", SQUARE);
    let out = polysample(&["compare", "--in", &p, "--n-samples", "2000", "--grid", "5"]);
    assert!(out.status.success());
    assert!(out
        .stdout
        .starts_with(b"sampler,n,n_samples,setup_s,sample_s,per_sample_us,acceptance\n"));
    let rows = read_compare_csv(&out.stdout[..]).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2].acceptance, Some(1.0));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(polysample(&["--frobnicate"]).status.code(), Some(1));
    assert_eq!(polysample(&[]).status.code(), Some(1));
    assert_eq!(polysample(&["--help"]).status.code(), Some(0));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        polysample(&["volume", "--in", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let garbage = write(&dir, "garbage.json", "{not json");
    assert_eq!(
        polysample(&["volume", "--in", &garbage]).status.code(),
        Some(1)
    );

    // unbounded strip and empty polytope are geometry failures
    let strip = write(
        &dir,
        "strip.json",
        r#"{"n":2,"A":[[1,0],[-1,0],[0,1]],"b":[1,0,1]}"#,
    );
    let out = polysample(&["volume", "--in", &strip]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty() && !out.stderr.is_empty());
    let empty = write(
        &dir,
        "empty.json",
        r#"{"n":2,"A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[0,-1,1,0]}"#,
    );
    assert_eq!(
        polysample(&["volume", "--in", &empty]).status.code(),
        Some(2)
    );
    let guard = polysample(&["bench", "--family", "hypercube", "--n-max", "9"]);
    assert_eq!(guard.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&guard.stderr).contains("memory"));
}
