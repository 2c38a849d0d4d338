//! Acceptance suite A1-A10. Runs as a plain binary (`harness = false`) and
//! prints one PASS/FAIL line per criterion; exits non-zero if any fail.
//!
//! `cargo test -p toposeg-cli --test acceptance`

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use toposeg::diffusion::{
    anisotropic_filter, anisotropic_step, isotropic_filter, isotropic_step, DiffusionParams,
};
use toposeg::image::{add_gaussian_noise, make_synthetic};
use toposeg::metrics::{boundary_f1, psnr};
use toposeg::pipeline::{segment, SegmentParams};
use toposeg::topo::{
    cost_functional, diffuse_with_cracks, discrete_td_restore, edge_topological_derivative,
    segmentation_from_levels, DiffusivityField, EdgeLattice, TopoParams,
};
use toposeg::{Conductance, ImageBuffer, NoiseSpec, SegMethod, SyntheticKind, SyntheticSpec};

/// Committed denoising-gain threshold for A5, in dB.
const A5_MIN_GAIN_DB: f64 = 5.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Random image on the 1/1024 grid: every squared difference and every sum
/// of them is exact in f64, so the brute-force cost difference carries no
/// rounding error of its own.
fn random_dyadic_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ImageBuffer {
    let data = (0..w * h)
        .map(|_| rng.random_range(0..=1024u32) as f64 / 1024.0)
        .collect();
    ImageBuffer::new(w, h, data).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> DiffusivityField {
    let mut f = DiffusivityField::all_on(EdgeLattice::new(w, h));
    for e in 0..f.lattice().edge_count() {
        if rng.random_bool(p) {
            f.crack(e);
        }
    }
    f
}

fn noisy_step(seed: u64) -> (ImageBuffer, ImageBuffer) {
    let clean = make_synthetic(&SyntheticSpec::new(SyntheticKind::Step, 128, 128)).unwrap();
    let noisy = add_gaussian_noise(&clean, &NoiseSpec::new(0.1, seed).unwrap()).unwrap();
    (clean, noisy)
}

fn a1_derivative_oracle() -> Outcome {
    let (w, h) = (8, 8);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let img = random_dyadic_image(&mut rng, w, h);
        let base = random_field(&mut rng, w, h, 0.3);
        for e in 0..base.lattice().edge_count() {
            let intact = if base.is_cracked(e) {
                base.toggled(e)
            } else {
                base.clone()
            };
            let cracked = intact.toggled(e);
            let psi_on = cost_functional(&img, &intact).unwrap();
            let psi_off = cost_functional(&img, &cracked).unwrap();
            for (field, brute) in [(&intact, psi_off - psi_on), (&cracked, psi_on - psi_off)] {
                let d = edge_topological_derivative(&img, field, e).unwrap();
                let rel = (d - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(if d == brute { 0.0 } else { rel });
                checked += 1;
            }
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("{checked} edge/state pairs, worst relative error {worst:.3e}"),
    }
}

fn a2_a3_corpus() -> (Outcome, Outcome) {
    let (w, h) = (32, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_cons = 0.0f64;
    let mut violations = 0usize;
    for i in 0..1000 {
        let img = random_image(&mut rng, w, h);
        let tau = rng.random_range(0.01..=0.25);
        let out = match i % 3 {
            0 => isotropic_step(&img, tau).unwrap(),
            1 => {
                let kappa = rng.random_range(0.01..1.0);
                let g = if rng.random_bool(0.5) {
                    Conductance::Pm1
                } else {
                    Conductance::Pm2
                };
                anisotropic_step(&img, tau, kappa, g).unwrap()
            }
            _ => {
                let p = rng.random_range(0.0..0.6);
                let field = random_field(&mut rng, w, h, p);
                diffuse_with_cracks(&img, &field, tau, 1).unwrap()
            }
        };
        let (before, after) = (img.sum(), out.sum());
        worst_cons = worst_cons.max((after - before).abs() / before.abs());
        let (lo, hi) = img.min_max();
        violations += out.data().iter().filter(|&&v| v < lo || v > hi).count();
    }
    (
        Outcome {
            pass: worst_cons <= 1e-9,
            detail: format!("1000 steps, worst relative mass drift {worst_cons:.3e}"),
        },
        Outcome {
            pass: violations == 0,
            detail: format!("1000 steps, {violations} pixels outside input [min, max]"),
        },
    )
}

fn a4_lattice_isotropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let params = DiffusionParams::default();
    let mut worst = 0.0f64;
    let max_diff = |a: &ImageBuffer, b: &ImageBuffer| {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    for _ in 0..10 {
        let img = random_image(&mut rng, 32, 32);
        let filters: [fn(&ImageBuffer, &DiffusionParams) -> toposeg::Result<ImageBuffer>; 2] =
            [isotropic_filter, anisotropic_filter];
        for f in filters {
            let direct = f(&img, &params).unwrap();
            let rot = f(&img.rot90(), &params).unwrap();
            let flip = f(&img.flip_horizontal(), &params).unwrap();
            worst = worst.max(max_diff(&rot, &direct.rot90()));
            worst = worst.max(max_diff(&flip, &direct.flip_horizontal()));
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("10 images x 2 filters x 2 symmetries, worst pixel difference {worst:.3e}"),
    }
}

fn a5_denoising_gain() -> Outcome {
    let (clean, noisy) = noisy_step(42);
    let filtered = isotropic_filter(&noisy, &DiffusionParams::default()).unwrap();
    let before = psnr(&noisy, &clean, 1.0).unwrap();
    let after = psnr(&filtered, &clean, 1.0).unwrap();
    let gain = after - before;
    Outcome {
        pass: gain >= A5_MIN_GAIN_DB,
        detail: format!(
            "noisy {before:.3} dB -> filtered {after:.3} dB, gain {gain:.3} dB (threshold {A5_MIN_GAIN_DB} dB)"
        ),
    }
}

fn a6_restoration_monotonicity() -> Outcome {
    let (clean, noisy) = noisy_step(42);
    let r = discrete_td_restore(&noisy, &TopoParams::default()).unwrap();
    let before = psnr(&noisy, &clean, 1.0).unwrap();
    let after = psnr(&r.image, &clean, 1.0).unwrap();
    let costs: Vec<f64> = r.trace.records.iter().map(|t| t.cost).collect();
    let monotone = costs.windows(2).all(|p| p[1] <= p[0]);
    Outcome {
        pass: after > before && monotone && !costs.is_empty(),
        detail: format!(
            "psnr {before:.3} -> {after:.3} dB, {} iterations, cost {:.4} -> {:.4}, non-increasing: {monotone}",
            costs.len(),
            costs.first().copied().unwrap_or(f64::NAN),
            costs.last().copied().unwrap_or(f64::NAN)
        ),
    }
}

fn a7_clean_segmentation() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [SyntheticKind::Step, SyntheticKind::Disk] {
        let clean = make_synthetic(&SyntheticSpec::new(kind, 64, 64)).unwrap();
        let truth = segmentation_from_levels(&clean);
        for method in [SegMethod::Discrete, SegMethod::Continuum] {
            let params = SegmentParams {
                method,
                ..Default::default()
            };
            let seg = segment(&clean, &params).unwrap().segmentation;
            let f1 = boundary_f1(&seg, &truth, 1).unwrap();
            let regions = seg.region_count();
            pass &= regions == 2 && f1 >= 0.95;
            parts.push(format!(
                "{kind:?}/{}: {regions} regions F1 {f1:.3}",
                method.as_str()
            ));
        }
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn run_cli(args: &[&str], threads: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_toposeg"))
        .args(args)
        .arg("--quiet")
        .env("TOPOSEG_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "toposeg {args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn report_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).unwrap_or_default();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .zip(l.split(','))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn a8_compare(root: &Path) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for method in ["discrete", "continuum"] {
        for seed in ["1", "2", "3"] {
            let dir = root.join(format!("a8_{method}_{seed}"));
            let dir_s = dir.to_string_lossy().into_owned();
            let args = [
                "pipeline",
                "--synth",
                "step",
                "--width",
                "128",
                "--height",
                "128",
                "--noise-sigma",
                "0.1",
                "--seed",
                seed,
                "--prefilter",
                "isotropic",
                "--method",
                method,
                "--compare",
                "--output-dir",
                &dir_s,
            ];
            if let Err(e) = run_cli(&args, "0") {
                return Outcome {
                    pass: false,
                    detail: e,
                };
            }
            let rows = report_rows(&dir.join("report.csv"));
            let f1 = |stage: &str| -> f64 {
                rows.iter()
                    .find(|r| r["stage"] == stage)
                    .and_then(|r| r["boundary_f1"].parse().ok())
                    .unwrap_or(f64::NAN)
            };
            let (only, restored) = (f1("segment-only"), f1("restore-then-segment"));
            pass &= rows.len() == 2 && restored >= only;
            parts.push(format!("{method} seed {seed}: {only:.3} -> {restored:.3}"));
        }
    }
    Outcome {
        pass,
        detail: format!(
            "boundary F1 segment-only -> restore-then-segment; {}",
            parts.join(", ")
        ),
    }
}

/// All files under `dir`, with the wall_time_ms column blanked out of reports.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let name = path
                .strip_prefix(dir)
                .unwrap()
                .to_string_lossy()
                .into_owned();
            let mut bytes = fs::read(&path).unwrap();
            if name.ends_with(".csv") {
                let text = String::from_utf8(bytes).unwrap();
                let mut lines = text.lines();
                let header = lines.next().unwrap_or("");
                let col = header.split(',').position(|c| c == "wall_time_ms");
                let scrub = |l: &str| match col {
                    Some(c) => l
                        .split(',')
                        .enumerate()
                        .filter(|&(i, _)| i != c)
                        .map(|(_, v)| v)
                        .collect::<Vec<_>>()
                        .join(","),
                    None => l.to_string(),
                };
                bytes = std::iter::once(header)
                    .chain(lines)
                    .map(scrub)
                    .collect::<Vec<_>>()
                    .join("\n")
                    .into_bytes();
            }
            files.insert(name, bytes);
        }
    }
    files
}

fn a9_determinism(root: &Path) -> Outcome {
    let mut runs = Vec::new();
    for (label, threads) in [("t1a", "1"), ("t1b", "1"), ("t4a", "4"), ("t4b", "4")] {
        let dir = root.join(format!("a9_{label}"));
        fs::create_dir_all(&dir).unwrap();
        let d = |name: &str| dir.join(name).to_string_lossy().into_owned();
        let steps: Vec<Vec<String>> = vec![
            vec![
                "synth",
                "--kind",
                "blob",
                "--width",
                "96",
                "--height",
                "80",
                "--output",
                &d("blob.pgm"),
            ],
            vec![
                "pipeline",
                "--synth",
                "step",
                "--width",
                "128",
                "--height",
                "128",
                "--seed",
                "1",
                "--compare",
                "--method",
                "discrete",
                "--output-dir",
                &d("discrete"),
            ],
            vec![
                "pipeline",
                "--input",
                &d("blob.pgm"),
                "--seed",
                "2",
                "--compare",
                "--prefilter",
                "anisotropic",
                "--method",
                "continuum",
                "--output-dir",
                &d("continuum"),
            ],
            vec![
                "denoise",
                "--input",
                &d("discrete/noisy.pgm"),
                "--output",
                &d("denoised.pgm"),
                "--filter",
                "anisotropic",
                "--reference",
                &d("discrete/clean.pgm"),
                "--report",
                &d("denoise.csv"),
            ],
            vec![
                "segment",
                "--input",
                &d("discrete/noisy.pgm"),
                "--method",
                "discrete",
                "--labels",
                &d("seg_labels.txt"),
                "--cracks",
                &d("seg_cracks.txt"),
                "--restored",
                &d("seg_restored.pgm"),
                "--trace",
                &d("seg_trace.csv"),
                "--truth",
                &d("discrete/clean.pgm"),
                "--report",
                &d("segment.csv"),
            ],
        ]
        .into_iter()
        .map(|v| v.into_iter().map(|s| s.to_string()).collect())
        .collect();
        for step in &steps {
            let args: Vec<&str> = step.iter().map(String::as_str).collect();
            if let Err(e) = run_cli(&args, threads) {
                return Outcome {
                    pass: false,
                    detail: e,
                };
            }
        }
        runs.push((label, snapshot(&dir)));
    }
    let (_, reference) = &runs[0];
    let mut mismatched = Vec::new();
    for (label, files) in &runs[1..] {
        if files.keys().ne(reference.keys()) {
            mismatched.push(format!("{label}: file set differs"));
            continue;
        }
        for (name, bytes) in files {
            if reference[name] != *bytes {
                mismatched.push(format!("{label}:{name}"));
            }
        }
    }
    Outcome {
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!(
                "{} files identical across 4 runs (TOPOSEG_THREADS 1, 1, 4, 4)",
                reference.len()
            )
        } else {
            format!("differences: {}", mismatched.join(", "))
        },
    }
}

fn a10_scale(root: &Path) -> Outcome {
    let dir = root.join("a10").to_string_lossy().into_owned();
    let args = [
        "pipeline",
        "--synth",
        "step",
        "--width",
        "256",
        "--height",
        "256",
        "--method",
        "discrete",
        "--outer-iters",
        "20",
        "--output-dir",
        &dir,
    ];
    let start = Instant::now();
    if let Err(e) = run_cli(&args, "0") {
        return Outcome {
            pass: false,
            detail: e,
        };
    }
    let secs = start.elapsed().as_secs_f64();
    let rows = report_rows(&Path::new(&dir).join("report.csv"));
    let iters = rows
        .first()
        .map(|r| r["iteration"].clone())
        .unwrap_or_default();
    Outcome {
        pass: secs < 10.0 && rows.len() == 1,
        detail: format!("256x256 pipeline in {secs:.2} s ({iters} outer iterations, limit 10 s)"),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() -> ExitCode {
    // libtest-style flags (e.g. from `cargo test -- --nocapture`) are ignored
    let root = TempDir::new().expect("temp dir");
    let mut results: Vec<(&str, &str, Outcome, Duration, f64)> = Vec::new();

    let (o, t) = timed(a1_derivative_oracle);
    results.push(("A1", "derivative oracle", o, t, 1.0));
    let ((a2, a3), t) = timed(a2_a3_corpus);
    results.push(("A2", "conservation", a2, t, 5.0));
    results.push(("A3", "maximum principle", a3, t, 5.0));
    let (o, t) = timed(a4_lattice_isotropy);
    results.push(("A4", "lattice isotropy", o, t, 2.0));
    let (o, t) = timed(a5_denoising_gain);
    results.push(("A5", "denoising gain", o, t, 2.0));
    let (o, t) = timed(a6_restoration_monotonicity);
    results.push(("A6", "restoration monotonicity", o, t, 5.0));
    let (o, t) = timed(a7_clean_segmentation);
    results.push(("A7", "clean segmentation", o, t, 5.0));
    let (o, t) = timed(|| a8_compare(root.path()));
    results.push(("A8", "restore-then-segment vs segment-only", o, t, 30.0));
    let (o, t) = timed(|| a9_determinism(root.path()));
    results.push(("A9", "determinism", o, t, f64::INFINITY));
    let (o, t) = timed(|| a10_scale(root.path()));
    results.push(("A10", "scale", o, t, f64::INFINITY));

    let mut failed = 0;
    for (id, name, outcome, elapsed, limit) in &results {
        let secs = elapsed.as_secs_f64();
        let in_time = secs < *limit;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = if limit.is_finite() {
            format!(", limit {limit} s")
        } else {
            String::new()
        };
        println!(
            "{id} {} {name}: {} [{secs:.2} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
