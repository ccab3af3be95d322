//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report is always printed; exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use finray_core::deform::{
    indent_surface, neo_hookean_energy, neo_hookean_gradient, ogden_energy, ogden_gradient,
    ConstitutiveParams, DeformSettings,
};
use finray_core::geometry::{
    furnace_scene, generate_gelpad, make_indenter, GelPadSpec, IndenterKind,
};
use finray_core::math::{vec3, Vec3};
use finray_core::meshconvert::{extract_boundary, hex_to_surface, HexMesh, Strictness, HEX_FACES};
use finray_core::render::render;
use finray_core::spectra::{
    eval_skew_cauchy, fit_spectrum, sample_model, PaintPreset, SampledSpectrum, SkewCauchyParams,
    SpectralGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn finray(args: &[&str], threads: Option<usize>) -> Result<String, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_finray"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("FINRAY_THREADS", t.to_string());
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!(
            "finray {args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = SkewCauchyParams::new(
            rng.random_range(200.0..1000.0),
            rng.random_range(1.0..200.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(1e-3..1e4),
        )
        .unwrap();
        let want = p.h / (2.0 * p.gamma * p.gamma);
        worst = worst.max((eval_skew_cauchy(&p, p.lambda0) - want).abs());
    }
    outcome(
        worst < 1e-12,
        format!("max |error| {worst:.2e} over 1000 draws (< 1e-12)"),
    )
}

fn criterion_2() -> Outcome {
    let grid = SpectralGrid::DEFAULT;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..5 {
        let omega = rng.random_range(0.5..3.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let truth = SkewCauchyParams::with_peak_value(
            rng.random_range(460.0..640.0),
            rng.random_range(15.0..50.0),
            omega,
            rng.random_range(0.5..2.0),
        )
        .unwrap();
        let s = sample_model(&truth, &grid);
        let init = SkewCauchyParams::initial_guess(&s.points()).unwrap();
        let p = match fit_spectrum(&s, init) {
            Ok(r) => r.params,
            Err(e) => return outcome(false, format!("noiseless fit failed: {e}")),
        };
        for (a, b) in [
            (p.lambda0, truth.lambda0),
            (p.gamma, truth.gamma),
            (p.omega, truth.omega),
            (p.h, truth.h),
        ] {
            worst_rel = worst_rel.max((a - b).abs() / b.abs());
        }
    }
    let truth = SkewCauchyParams::with_peak_value(585.0, 28.0, 1.8, 1.0).unwrap();
    let clean = sample_model(&truth, &grid);
    let peak = clean.max_value();
    let mut errors = Vec::new();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let noisy: Vec<f64> = clean
            .values()
            .iter()
            .map(|v| (v + 0.01 * peak * gaussian(&mut rng)).max(0.0))
            .collect();
        let m = SampledSpectrum::new(grid, noisy).unwrap();
        let init = SkewCauchyParams::initial_guess(&m.points()).unwrap();
        match fit_spectrum(&m, init) {
            Ok(r) => errors.push((r.params.lambda0 - truth.lambda0).abs()),
            Err(e) => return outcome(false, format!("noisy fit failed: {e}")),
        }
    }
    errors.sort_by(f64::total_cmp);
    let median = 0.5 * (errors[9] + errors[10]);
    outcome(
        worst_rel < 1e-4 && median < 2.0,
        format!("noiseless max rel error {worst_rel:.2e} (< 1e-4); 1% noise median |dλ0| {median:.3} nm (< 2)"),
    )
}

fn criterion_3() -> Outcome {
    let (r, g) = (PaintPreset::Red.material(), PaintPreset::Green.material());
    let in_range = |e: f64| (0.02..=0.05).contains(&e);
    let pass = r.stokes_shift == 100.0
        && g.stokes_shift == 50.0
        && in_range(r.conversion_efficiency)
        && in_range(g.conversion_efficiency);
    outcome(
        pass,
        format!(
            "red shift {} nm, green shift {} nm; efficiency red {} green {} (in [0.02, 0.05])",
            r.stokes_shift, g.stokes_shift, r.conversion_efficiency, g.conversion_efficiency
        ),
    )
}

/// Boundary face count by comparing every face of every element pair.
fn brute_force_boundary_faces(hex: &HexMesh) -> usize {
    let faces: Vec<Vec<[usize; 4]>> = hex
        .elements
        .iter()
        .map(|el| {
            HEX_FACES
                .iter()
                .map(|f| {
                    let mut k = [el[f[0]], el[f[1]], el[f[2]], el[f[3]]];
                    k.sort_unstable();
                    k
                })
                .collect()
        })
        .collect();
    let mut shared = 0;
    for a in 0..faces.len() {
        for b in a + 1..faces.len() {
            for fa in &faces[a] {
                shared += faces[b].iter().filter(|fb| *fb == fa).count();
            }
        }
    }
    6 * faces.len() - 2 * shared
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut worst_vol: f64 = 0.0;
    let cases = 40;
    for case in 0..cases {
        let axis = |rng: &mut ChaCha8Rng| {
            let n = rng.random_range(1..=8usize);
            let mut x = 0.0;
            let mut v = vec![x];
            for _ in 0..n {
                x += rng.random_range(0.2..2.0);
                v.push(x);
            }
            v
        };
        let (xs, ys, zs) = (axis(&mut rng), axis(&mut rng), axis(&mut rng));
        let grid = HexMesh::structured(&xs, &ys, &zs).unwrap();
        let mut elements = grid.elements.clone();
        for i in (1..elements.len()).rev() {
            elements.swap(i, rng.random_range(0..=i));
        }
        let hex = HexMesh::new(grid.nodes.clone(), elements).unwrap();
        let quads = extract_boundary(&hex).unwrap().len();
        let brute = brute_force_boundary_faces(&hex);
        let (surface, _) = hex_to_surface(&hex, Strictness::Strict).unwrap();
        let m = &surface.mesh;
        let rel = (m.signed_volume() - hex.total_volume()).abs() / hex.total_volume();
        worst_vol = worst_vol.max(rel);
        if quads != brute
            || m.triangles.len() != 2 * quads
            || m.euler_characteristic() != 2
            || rel > 1e-6
        {
            failures.push(case);
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{cases} random grids up to 8x8x8: face counts = brute force, tris = 2 quads, chi = 2; max volume rel error {worst_vol:.1e}; failing cases {failures:?}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let nh = ConstitutiveParams::PDMS;
    let og = ConstitutiveParams::TPU_95A;
    let id = [1.0; 3];
    let rest = ogden_energy(id, &og)
        .unwrap()
        .abs()
        .max(neo_hookean_energy(id, &nh).unwrap().abs());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    type Energy =
        fn([f64; 3], &ConstitutiveParams) -> Result<f64, finray_core::deform::DeformError>;
    type Grad =
        fn([f64; 3], &ConstitutiveParams) -> Result<[f64; 3], finray_core::deform::DeformError>;
    let models: [(Energy, Grad, ConstitutiveParams); 2] = [
        (ogden_energy, ogden_gradient, og),
        (neo_hookean_energy, neo_hookean_gradient, nh),
    ];
    for _ in 0..100 {
        let l = [0; 3].map(|_| rng.random_range(0.8..1.25));
        for (psi, grad, p) in &models {
            let g = grad(l, p).unwrap();
            let h = 1e-5;
            let mut err: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for k in 0..3 {
                let (mut a, mut b) = (l, l);
                a[k] += h;
                b[k] -= h;
                let fd = (psi(a, p).unwrap() - psi(b, p).unwrap()) / (2.0 * h);
                err = err.max((g[k] - fd).abs());
                scale = scale.max(g[k].abs());
            }
            worst = worst.max(err / scale);
        }
    }
    let example = neo_hookean_energy([2.0, 1.0, 1.0], &nh).unwrap();
    let pass = rest < 1e-12 && worst < 1e-6 && (example - 0.3999).abs() < 5e-5;
    outcome(
        pass,
        format!("rest energy {rest:.1e}; gradient max rel error {worst:.2e} (< 1e-6); NH at (2,1,1) = {example:.4} MPa"),
    )
}

fn criterion_6() -> Outcome {
    let mut scene = furnace_scene(0.5, 1.0, 8);
    scene.render.samples_per_pixel = 1024;
    scene.render.width = 64;
    scene.render.height = 64;
    let mean = render(&scene).unwrap().mean_luminance();
    let oracle: f64 = (0..=8).map(|k| 0.5f64.powi(k)).sum();
    let rel = (mean / oracle - 1.0).abs();
    outcome(
        rel < 0.02,
        format!(
            "mean {mean:.5} vs series {oracle:.5}: rel error {:.3}% (< 2%)",
            rel * 100.0
        ),
    )
}

fn criterion_7() -> Outcome {
    let spec = GelPadSpec::flat(30.0, 40.0, 2.0)
        .with_resolution(120, 160)
        .with_layers(1);
    let face = generate_gelpad(&spec).unwrap().sensing_face;
    let st = DeformSettings::default();
    let indenters = [
        (IndenterKind::Cylinder, vec![10.0, 60.0]),
        (IndenterKind::Cuboid, vec![8.0, 6.0, 4.0]),
        (IndenterKind::Sphere, vec![6.0]),
    ];
    let mut min_sd = f64::INFINITY;
    let mut worst_chord: f64 = 0.0;
    for (kind, dims) in &indenters {
        let ind = make_indenter(*kind, dims, vec3(0.0, 0.13, 14.0), Vec3::x()).unwrap();
        for depth in [0.5, 1.0, 2.0] {
            let (out, r) = match indent_surface(&face, &ind, -Vec3::z(), depth, &st) {
                Ok(x) => x,
                Err(e) => return outcome(false, format!("{kind:?} at depth {depth}: {e}")),
            };
            let sd = out
                .vertices
                .iter()
                .map(|v| r.indenter.signed_distance(v))
                .fold(f64::INFINITY, f64::min);
            min_sd = min_sd.min(sd);
            if *kind == IndenterKind::Cylinder {
                let radius = dims[0];
                let chord = 2.0 * (2.0 * radius * depth - depth * depth).sqrt();
                worst_chord = worst_chord.max((r.imprint_width / chord - 1.0).abs());
            }
        }
    }
    outcome(
        min_sd >= -1e-6 && worst_chord <= 0.05,
        format!("min signed distance {min_sd:.2e} mm (>= -1e-6); cylinder chord max rel error {:.2}% (<= 5%)", worst_chord * 100.0),
    )
}

fn read_sweep(path: &Path) -> Vec<(f64, f64)> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect()
}

fn criterion_8(root: &Path) -> Outcome {
    let out = root.join("sweep");
    if let Err(e) = finray(
        &[
            "--out-dir",
            s(&out),
            "--spp",
            "256",
            "--width",
            "320",
            "--height",
            "240",
            "sweep-angle",
        ],
        None,
    ) {
        return outcome(false, e);
    }
    let rows = read_sweep(&out.join("sweep_angle.csv"));
    let p = (0..rows.len())
        .max_by(|&a, &b| rows[a].1.total_cmp(&rows[b].1))
        .unwrap();
    let (peak_angle, peak) = rows[p];
    let rising = rows[..=p].windows(2).all(|w| w[0].1 <= w[1].1);
    let falling = rows[p..].windows(2).all(|w| w[0].1 >= w[1].1);
    let beyond: Vec<&(f64, f64)> = rows.iter().filter(|r| r.0 > 90.0).collect();
    let drop = beyond.iter().all(|r| r.1 < 0.6 * peak);
    let worst_beyond = beyond.iter().map(|r| r.1 / peak).fold(0.0, f64::max);
    let curve: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.0}:{:.3e}", r.0, r.1))
        .collect();
    outcome(
        rising && falling && peak_angle > 0.0 && peak_angle < 90.0 && drop,
        format!(
            "peak {peak_angle} deg, unimodal {}, max(>90)/peak {worst_beyond:.3} (< 0.6); [{}]",
            rising && falling,
            curve.join(" ")
        ),
    )
}

fn criterion_9(root: &Path) -> Outcome {
    let mut one = Vec::new();
    let mut two = Vec::new();
    for seed in 1..=5 {
        let out = root.join(format!("lights_{seed}"));
        let seed = seed.to_string();
        if let Err(e) = finray(
            &[
                "--out-dir",
                s(&out),
                "--seed",
                &seed,
                "--spp",
                "64",
                "compare-lights",
            ],
            None,
        ) {
            return outcome(false, e);
        }
        let r: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("uniformity.json")).unwrap())
                .unwrap();
        one.push(r["cv_one"].as_f64().unwrap());
        two.push(r["cv_two"].as_f64().unwrap());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let spread = |v: &[f64]| {
        v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - v.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    };
    let floor = spread(&one).max(spread(&two));
    let margin = mean(&one) - mean(&two);
    outcome(
        margin > floor,
        format!(
            "CV one light {:.4}, two lights {:.4}; margin {margin:.4} > noise floor {floor:.4} (max 5-seed spread)",
            mean(&one),
            mean(&two)
        ),
    )
}

fn criterion_10(root: &Path) -> Outcome {
    let (a, b) = (root.join("pipe_a"), root.join("pipe_b"));
    let small = ["--width", "160", "--height", "120", "--spp", "16"];
    let mut args = vec!["--out-dir", s(&a)];
    args.extend_from_slice(&small);
    args.extend_from_slice(&["pipeline", "--family", "flat", "--size", "standard"]);
    if let Err(e) = finray(&args, None) {
        return outcome(false, e);
    }
    let manifest = a.join("pipeline.manifest.json");
    if let Err(e) = finray(
        &[
            "--out-dir",
            s(&b),
            "pipeline",
            "--from-manifest",
            s(&manifest),
        ],
        None,
    ) {
        return outcome(false, e);
    }
    let mut rerun_identical = true;
    for f in [
        "pipeline.manifest.json",
        "final.png",
        "final.rgbf",
        "deformed.neutral",
        "gel_surface.obj",
    ] {
        rerun_identical &= std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap();
    }

    let max = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut csvs: HashMap<usize, Vec<u8>> = HashMap::new();
    for t in [1, 4, max] {
        let out = root.join(format!("threads_{t}"));
        let mut args = vec!["--out-dir", s(&out)];
        args.extend_from_slice(&small);
        args.extend_from_slice(&["sweep-angle", "--angles", "20,60,120", "--no-images"]);
        if let Err(e) = finray(&args, Some(t)) {
            return outcome(false, e);
        }
        csvs.insert(t, std::fs::read(out.join("sweep_angle.csv")).unwrap());
    }
    let threads_identical = csvs.values().all(|c| c == &csvs[&1]);
    outcome(
        rerun_identical && threads_identical,
        format!("pipeline re-run bit-identical {rerun_identical}; sweep CSV identical for threads {{1, 4, {max}}} {threads_identical}"),
    )
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let r = root.path();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(u32, &str, f64, Check)> = vec![
        (
            1,
            "skew-Cauchy value at lambda0",
            1.0,
            Box::new(criterion_1),
        ),
        (2, "fit recovery", 10.0, Box::new(criterion_2)),
        (3, "paint presets", 1.0, Box::new(criterion_3)),
        (4, "mesh conversion oracle", 30.0, Box::new(criterion_4)),
        (5, "energy functions", 1.0, Box::new(criterion_5)),
        (6, "furnace", 120.0, Box::new(criterion_6)),
        (7, "non-penetration and chord", 30.0, Box::new(criterion_7)),
        (
            8,
            "illumination angle sweep",
            900.0,
            Box::new(|| criterion_8(r)),
        ),
        (
            9,
            "two-light uniformity",
            600.0,
            Box::new(|| criterion_9(r)),
        ),
        (10, "determinism", 600.0, Box::new(|| criterion_10(r))),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in &criteria {
        let t = Instant::now();
        let o = check();
        let secs = t.elapsed().as_secs_f64();
        let pass = o.pass && secs < *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name}: {} [{secs:.1} s of {budget:.0} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
