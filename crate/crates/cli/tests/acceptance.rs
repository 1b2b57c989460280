//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (run with `--nocapture` to see them). Criteria that
//! name command-line invocations drive the real binary; the others exercise
//! the library directly. Stated runtime budgets assume a multi-core desktop;
//! they are measured and printed, not asserted, because CI hardware varies.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use entpower::{
    cartan_kernel, concurrence, conjugate, eof, gamma_from_purity, is_separable, mems,
    mems_eof_curve, mems_purity, random_density, source_c, theorem_check, uniform_grid,
    CartanVector, ComplexMatrix4, DensityMatrix4, MemsRank,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_entpower");

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("entpower-acceptance-{}-{name}", std::process::id()));
    p
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary should run")
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_csv(path: &std::path::Path) -> Csv {
    let text = std::fs::read_to_string(path).expect("csv should exist");
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("csv has a header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    Csv { header, rows }
}

#[test]
fn criterion_1_theorem_identities() {
    let started = Instant::now();
    let out = run(&[
        "theorem-check",
        "--gamma-step",
        "0.01",
        "--chi-step",
        "pi/40",
        "--tol",
        "1e-12",
    ]);
    let elapsed = started.elapsed();
    assert!(
        out.status.success(),
        "theorem-check failed: {}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    // same grids through the library, to record the actual deviation
    let chi = uniform_grid(0.0, 2.0 * PI - 1e-9, PI / 40.0);
    let gamma = uniform_grid(0.0, 1.0, 0.01);
    let report = theorem_check(&chi, &gamma).unwrap();
    assert!(
        report.max_deviation() < 1e-12,
        "max deviation {:.3e}",
        report.max_deviation()
    );
    println!(
        "criterion 1 PASS: theorem identities, max deviation {:.3e} (< 1e-12), runtime {:.2?} (budget 5 s)",
        report.max_deviation(),
        elapsed
    );
}

#[test]
fn criterion_2_mems_measures() {
    for k in 1..=100u32 {
        let gamma = k as f64 / 100.0;
        let rho = mems(gamma, 0.0).unwrap();
        let c = concurrence(&rho);
        assert!(
            (c - gamma).abs() < 1e-12,
            "concurrence {c} vs gamma {gamma}"
        );
        let mu = mems_purity(gamma).unwrap();
        let expected_mu = if gamma >= 2.0 / 3.0 {
            gamma * gamma + (1.0 - gamma) * (1.0 - gamma)
        } else {
            1.0 / 3.0 + gamma * gamma / 2.0
        };
        assert!((mu - expected_mu).abs() < 1e-12);
        assert!((rho.purity() - mu).abs() < 1e-12);
    }
    let e = eof(&mems(0.8, 0.0).unwrap());
    assert!((e - 0.721928).abs() < 1e-6, "eof(0.8) = {e}");
    assert!((mems_purity(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((mems_purity(2.0 / 3.0).unwrap() - 5.0 / 9.0).abs() < 1e-12);
    assert!((mems_purity(1.0).unwrap() - 1.0).abs() < 1e-12);
    println!(
        "criterion 2 PASS: concurrence = gamma (1e-12) and purity branches on 100 points; eof(0.8) = {e:.9}"
    );
}

#[test]
fn criterion_3_correlated_source_transition() {
    // the kernel representative for which the correlated-source identity is
    // an exact matrix equality
    let kernel = cartan_kernel(&CartanVector::new(-PI / 4.0, 0.0, 0.0));
    let gamma_max = 1.0 / 3.0_f64.sqrt() - 0.01;
    for k in 1..=20u32 {
        let gamma = gamma_max * k as f64 / 20.0;
        let source = source_c(gamma).unwrap();
        let (sep, min_ev) = is_separable(&source, 1e-9);
        assert!(sep, "source_c({gamma}) not separable (min PT {min_ev})");
        assert!(eof(&source) < 1e-12, "source eof nonzero at {gamma}");
        let out = conjugate(&kernel, &source).unwrap();
        let target = eof(&mems(gamma, PI / 2.0).unwrap());
        assert!(
            eof(&out) > 0.0,
            "conjugated output not entangled at {gamma}"
        );
        assert!(
            (eof(&out) - target).abs() < 1e-10,
            "output eof {} vs MEMS {target} at gamma {gamma}",
            eof(&out)
        );
    }
    println!("criterion 3 PASS: separable correlated sources map onto the MEMS EOF at 20 gammas");
}

#[test]
fn criterion_4_ppt_concurrence_agreement() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut disagreements = 0;
    for _ in 0..10_000 {
        let rho = random_density(&mut rng);
        let entangled_c = concurrence(&rho) > 1e-9;
        let (_, min_ev) = is_separable(&rho, 1e-9);
        let entangled_ppt = min_ev < -1e-11;
        if entangled_c != entangled_ppt {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0, "oracle disagreements");
    println!(
        "criterion 4 PASS: 10^4 states, 0 PPT/concurrence disagreements, runtime {:.2?} (budget 30 s)",
        started.elapsed()
    );
}

#[test]
fn criterion_5_purity_third_ball_is_separable() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let quarter = ComplexMatrix4::from_diagonal([0.25; 4]);
    for k in 0..10_000 {
        let rho = random_density(&mut rng);
        let target = 0.25 + (1.0 / 3.0 - 0.25) * (k % 100) as f64 / 99.0;
        let t = ((target - 0.25) / (rho.purity() - 0.25)).sqrt().min(1.0);
        let mixed = DensityMatrix4::new(
            rho.matrix()
                .scale(t.into())
                .add(&quarter.scale((1.0 - t).into())),
        )
        .unwrap();
        assert!(mixed.purity() <= 1.0 / 3.0 + 1e-12);
        let (sep, min_ev) = is_separable(&mixed, 1e-9);
        assert!(
            sep,
            "state with purity {} not separable (min PT {min_ev})",
            mixed.purity()
        );
    }
    println!("criterion 5 PASS: 10^4 states with purity <= 1/3 all separable");
}

fn grid_index(x: f64) -> i32 {
    (x / (PI / 40.0)).round() as i32
}

#[test]
fn criterion_6_reach_map_z_axis() {
    let out_csv = tmp_path("fig3.csv");
    let started = Instant::now();
    let status = run(&[
        "inverse-scan",
        "--alpha-z",
        "0",
        "--rot-axes",
        "z,z",
        "--grid-step",
        "pi/40",
        "--rot-step",
        "pi/100",
        "--gamma-step",
        "0.02",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert!(status.status.success(), "inverse-scan failed");
    let csv = read_csv(&out_csv);
    let _ = std::fs::remove_file(out_csv.with_extension("manifest"));
    let _ = std::fs::remove_file(&out_csv);
    assert_eq!(
        csv.header,
        [
            "alpha_x",
            "alpha_y",
            "fraction_all",
            "fraction_rank2",
            "fraction_rank3"
        ]
    );
    assert_eq!(csv.rows.len(), 121); // 11x11 grid including both edges
    let mut globals = Vec::new();
    let mut band_violations = Vec::new();
    let mut diagonal_violations = Vec::new();
    for row in &csv.rows {
        let (i, j) = (grid_index(row[0]), grid_index(row[1]));
        let (all, r2, r3) = (row[2], row[3], row[4]);
        if all == 1.0 {
            globals.push((i, j));
        }
        if (i + j - 10).abs() <= 1 && (i, j) != (5, 5) && (r3 != 1.0 || r2 != 0.0) {
            band_violations.push(((i, j), r2, r3));
        }
        if i == j && i != 5 && all != 0.0 {
            diagonal_violations.push(((i, j), all));
        }
    }
    assert_eq!(
        globals,
        vec![(5, 5)],
        "fraction_all = 1.0 must occur exactly at (pi/8, pi/8)"
    );
    assert!(
        diagonal_violations.is_empty(),
        "diagonal cells away from pi/8 must have fraction_all = 0: {diagonal_violations:?}"
    );
    println!(
        "criterion 6: unique global cell (pi/8, pi/8) and zero diagonals hold; runtime {elapsed:.2?} (budget 10 min on a desktop)"
    );
    assert!(
        band_violations.is_empty(),
        "band cells |ax+ay-pi/4| <= pi/40 with fraction_rank3 < 1: {band_violations:?}\n\
         known protocol property: cells with |ax-ay| = pi/40 and |ax+ay-pi/4| = pi/40 satisfy\n\
         corner residue (gamma/2)sin(pi/20) <= budget (1/6)sin(pi/20) only for gamma <= 1/3,\n\
         so their rank-3 fraction is 17/33 for any rotation grid"
    );
    println!("criterion 6 PASS");
}

#[test]
fn criterion_7_reach_map_xy_axis() {
    let out_csv = tmp_path("fig4.csv");
    let started = Instant::now();
    let status = run(&[
        "inverse-scan",
        "--alpha-z",
        "pi/6",
        "--rot-axes",
        "x,y",
        "--grid-step",
        "pi/40",
        "--rot-step",
        "pi/100",
        "--gamma-step",
        "0.02",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert!(status.status.success(), "inverse-scan failed");
    let csv = read_csv(&out_csv);
    let _ = std::fs::remove_file(out_csv.with_extension("manifest"));
    let _ = std::fs::remove_file(&out_csv);

    let full: HashSet<(i32, i32)> = csv
        .rows
        .iter()
        .filter(|r| r[4] == 1.0)
        .map(|r| (grid_index(r[0]), grid_index(r[1])))
        .collect();
    // largest 4-connected component
    let mut best = 0;
    let mut seen: HashSet<(i32, i32)> = HashSet::new();
    for &cell in &full {
        if seen.contains(&cell) {
            continue;
        }
        let mut stack = vec![cell];
        let mut size = 0;
        while let Some((i, j)) = stack.pop() {
            if !seen.insert((i, j)) {
                continue;
            }
            size += 1;
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = (i + di, j + dj);
                if full.contains(&n) && !seen.contains(&n) {
                    stack.push(n);
                }
            }
        }
        best = best.max(size);
    }
    assert!(
        best >= 10,
        "largest 4-connected region of rank-3 perfect entanglers has {best} cells"
    );
    println!(
        "criterion 7 PASS: {} rank-3 perfect cells, largest 4-connected region {best} (>= 10), runtime {elapsed:.2?} (budget 15 min)",
        full.len()
    );
}

#[test]
fn criterion_8_ep_scan_vs_mems_curve() {
    let started = Instant::now();
    let seeded_csv = tmp_path("ep-on.csv");
    let status = run(&[
        "ep-scan",
        "--gate",
        "0.125pi,0.125pi,0",
        "--source",
        "cc",
        "--samples",
        "1000",
        "--seed",
        "0",
        "--oracle-seeding",
        "on",
        "--out",
        seeded_csv.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "ep-scan failed");
    let seeded = read_csv(&seeded_csv);
    let _ = std::fs::remove_file(seeded_csv.with_extension("manifest"));
    let _ = std::fs::remove_file(&seeded_csv);
    let mus: Vec<f64> = seeded.rows.iter().map(|r| r[0]).collect();
    let ceiling = mems_eof_curve(&mus).unwrap();
    for (row, want) in seeded.rows.iter().zip(ceiling.rows.iter()) {
        assert!(
            (row[1] - want.ep).abs() < 1e-10,
            "seeded scan mu={} ep={} vs mems {}",
            row[0],
            row[1],
            want.ep
        );
    }
    println!(
        "criterion 8: oracle-seeded curve matches the MEMS curve within 1e-10 at {} bins",
        seeded.rows.len()
    );

    let raw_csv = tmp_path("ep-off.csv");
    let status = run(&[
        "ep-scan",
        "--gate",
        "0.125pi,0.125pi,0",
        "--source",
        "cc",
        "--samples",
        "1000",
        "--seed",
        "0",
        "--oracle-seeding",
        "off",
        "--out",
        raw_csv.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "ep-scan failed");
    let raw = read_csv(&raw_csv);
    let _ = std::fs::remove_file(raw_csv.with_extension("manifest"));
    let _ = std::fs::remove_file(&raw_csv);
    let elapsed = started.elapsed();

    let mut worst_low = (0.0_f64, 0.0_f64);
    for (row, want) in raw.rows.iter().zip(ceiling.rows.iter()) {
        if row[0] > 5.0 / 9.0 {
            assert!(
                row[1] < want.ep,
                "pure-sampling curve not strictly below the MEMS curve at mu={}",
                row[0]
            );
        } else {
            let gap = want.ep - row[1];
            if gap > worst_low.1 {
                worst_low = (row[0], gap);
            }
        }
    }
    println!(
        "criterion 8: pure-sampling curve strictly below the ceiling for mu > 5/9; runtime {elapsed:.2?} (budget 5 min)"
    );
    assert!(
        worst_low.1 <= 0.02,
        "pure cc sampling misses the MEMS curve by {:.4} at mu = {:.4} (claimed bound 0.02 at \
         1000 samples/bin);\nthe optimal rank-3 source sits on a simplex face where the EOF \
         penalty grows as sqrt(face distance), so hitting 0.02 needs face distances ~3e-4 that \
         1000 joint basis/probability samples reach with probability ~1e-5 per sample",
        worst_low.1,
        worst_low.0
    );
    println!("criterion 8 PASS");
}

#[test]
fn criterion_9_thread_count_determinism() {
    let mut outputs: Vec<(String, Vec<u8>)> = Vec::new();
    for threads in ["1", "8"] {
        let inv_csv = tmp_path(&format!("det-inv-{threads}.csv"));
        let status = run(&[
            "inverse-scan",
            "--alpha-z",
            "0",
            "--rot-axes",
            "z,z",
            "--grid-step",
            "pi/40",
            "--rot-step",
            "pi/100",
            "--gamma-step",
            "0.02",
            "--threads",
            threads,
            "--out",
            inv_csv.to_str().unwrap(),
        ]);
        assert!(status.status.success());
        outputs.push((
            format!("inverse-{threads}"),
            std::fs::read(&inv_csv).unwrap(),
        ));
        let _ = std::fs::remove_file(inv_csv.with_extension("manifest"));
        let _ = std::fs::remove_file(&inv_csv);

        for mode in ["on", "off"] {
            let ep_csv = tmp_path(&format!("det-ep-{mode}-{threads}.csv"));
            let status = run(&[
                "ep-scan",
                "--gate",
                "0.125pi,0.125pi,0",
                "--source",
                "cc",
                "--samples",
                "1000",
                "--seed",
                "0",
                "--oracle-seeding",
                mode,
                "--threads",
                threads,
                "--out",
                ep_csv.to_str().unwrap(),
            ]);
            assert!(status.status.success());
            outputs.push((
                format!("ep-{mode}-{threads}"),
                std::fs::read(&ep_csv).unwrap(),
            ));
            let _ = std::fs::remove_file(ep_csv.with_extension("manifest"));
            let _ = std::fs::remove_file(&ep_csv);
        }
    }
    for pair in [
        ("inverse-1", "inverse-8"),
        ("ep-on-1", "ep-on-8"),
        ("ep-off-1", "ep-off-8"),
    ] {
        let a = outputs.iter().find(|(n, _)| n == pair.0).unwrap();
        let b = outputs.iter().find(|(n, _)| n == pair.1).unwrap();
        assert_eq!(a.1, b.1, "{} and {} differ", pair.0, pair.1);
    }
    println!("criterion 9 PASS: 1-thread and 8-thread runs produce bitwise-identical CSVs");
}

#[test]
fn ep_curve_stays_under_the_mems_ceiling() {
    // supporting invariant for the scan engines: no sampled EP value may
    // exceed the MEMS EOF at the same purity
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..3 {
        let gate = CartanVector::new(
            rng.gen_range(0.0..PI / 4.0),
            rng.gen_range(0.0..PI / 4.0),
            rng.gen_range(0.0..PI / 4.0),
        );
        let mut cfg = entpower::ScanConfig::new(gate, entpower::SourceFamily::Product);
        cfg.samples_per_bin = 50;
        cfg.mu_step = 0.05;
        cfg.seed = rng.gen();
        let curve = entpower::ep_scan(&cfg).unwrap();
        let mus: Vec<f64> = curve.rows.iter().map(|r| r.mu).collect();
        let ceiling = mems_eof_curve(&mus).unwrap();
        for (got, want) in curve.rows.iter().zip(ceiling.rows.iter()) {
            assert!(got.ep <= want.ep + 1e-9);
        }
    }
}

#[test]
fn gamma_round_trip_supports_the_curves() {
    for k in 0..=50 {
        let mu = 1.0 / 3.0 + (1.0 - 1.0 / 3.0) * k as f64 / 50.0;
        let rank = if mu >= 5.0 / 9.0 {
            MemsRank::Two
        } else {
            MemsRank::Three
        };
        let gamma = gamma_from_purity(mu, rank).unwrap();
        assert!((mems_purity(gamma).unwrap() - mu).abs() < 1e-12);
    }
}
