use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use finray_core::geometry::{default_scene, LedPlacement, Scene};
use finray_core::render::{probe_intensity, Image};
use finray_core::spectra::{SkewCauchyParams, FILTER_WAVELENGTHS};

fn finray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finray"))
        .args(args)
        .output()
        .expect("spawn finray")
}

fn ok(args: &[&str]) -> String {
    let out = finray(args);
    assert!(
        out.status.success(),
        "finray {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    finray(args).status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_csv(path: &Path, rows: &[(f64, f64)]) {
    let mut text = String::from("wavelength_nm,value\n");
    for (l, v) in rows {
        text.push_str(&format!("{l},{v}\n"));
    }
    std::fs::write(path, text).unwrap();
}

fn fit_residual(csv: &Path) -> f64 {
    let text = std::fs::read_to_string(csv).unwrap();
    let first = text.lines().next().unwrap();
    let r = first
        .split_whitespace()
        .find_map(|t| t.strip_prefix("residual="))
        .unwrap();
    r.parse().unwrap()
}

#[test]
fn fit_recovers_synthetic_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let truth = SkewCauchyParams::new(560.0, 30.0, 2.0, 900.0).unwrap();
    let rows: Vec<_> = (0..=60)
        .map(|i| 400.0 + 5.0 * i as f64)
        .map(|l| (l, truth.eval(l)))
        .collect();
    let csv = dir.path().join("m.csv");
    write_csv(&csv, &rows);
    let out = dir.path().join("o");
    ok(&["--out-dir", s(&out), "fit", s(&csv), "--paint", "red"]);
    assert!(fit_residual(&out.join("fit_red.csv")) < 1e-8);
    let paint: serde_json::Value = json(&out.join("paint_red.json"));
    assert!((paint["emission"]["lambda0"].as_f64().unwrap() - 560.0).abs() < 1e-3);
    assert!(std::fs::read_to_string(out.join("fit_red.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn fit_at_filter_wavelengths_stays_in_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let truth = SkewCauchyParams::with_peak_value(500.0, 25.0, 3.0, 1.0).unwrap();
    let rows: Vec<_> = FILTER_WAVELENGTHS
        .iter()
        .map(|&l| (l, truth.eval(l)))
        .collect();
    let csv = dir.path().join("g.csv");
    write_csv(&csv, &rows);
    let out = dir.path().join("o");
    ok(&["--out-dir", s(&out), "fit", s(&csv), "--paint", "green"]);
    let paint: serde_json::Value = json(&out.join("paint_green.json"));
    let p: SkewCauchyParams = serde_json::from_value(paint["emission"].clone()).unwrap();
    p.validate().unwrap();
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("e.csv");
    std::fs::write(&empty, "wavelength_nm,value\n").unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&["--out-dir", s(&out), "fit", s(&empty)]), 1);
    assert_eq!(
        code(&[
            "--out-dir",
            s(&out),
            "fit",
            s(&dir.path().join("missing.csv"))
        ]),
        1
    );
    assert_eq!(code(&["no-such-command"]), 1);
    let few = dir.path().join("few.csv");
    write_csv(&few, &[(500.0, 1.0), (550.0, 2.0), (600.0, 1.0)]);
    assert_eq!(code(&["--out-dir", s(&out), "fit", s(&few)]), 2);
    assert_eq!(
        code(&["--out-dir", s(&out), "fit", s(&few), "--paint", "blue"]),
        2
    );
    assert_eq!(
        code(&["--out-dir", s(&out), "sweep-angle", "--angles", "30"]),
        2
    );
    assert_eq!(
        code(&["--out-dir", s(&out), "sweep-angle", "--angles", "30,190"]),
        2
    );
    assert_eq!(
        code(&[
            "--out-dir",
            s(&out),
            "gen-pad",
            "--family",
            "flat",
            "--pad-width=-3"
        ]),
        2
    );
}

#[test]
fn generated_pad_converts_to_closed_surface() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path();
    ok(&[
        "--out-dir",
        s(o),
        "gen-pad",
        "--family",
        "cylindrical",
        "--size",
        "baby",
        "--resolution",
        "12,24",
        "--layers",
        "3",
    ]);
    ok(&["--out-dir", s(o), "convert", s(&o.join("pad.neutral"))]);
    let r = json(&o.join("pad_surface.json"));
    assert_eq!(r["watertight"], true);
    assert_eq!(r["euler_characteristic"], 2);
    let (v, e) = (
        r["signed_volume"].as_f64().unwrap(),
        r["element_volume"].as_f64().unwrap(),
    );
    assert!((v / e - 1.0).abs() < 1e-6);
    assert_eq!(r["sensing_triangles"], 2 * 12 * 24);
}

#[test]
fn fem_deck_converts() {
    let dir = tempfile::tempdir().unwrap();
    let deck = dir.path().join("two.inp");
    let mut text = String::from("*HEADING\ntwo bricks\n*NODE\n");
    let mut id = 1;
    for z in 0..2 {
        for y in 0..2 {
            for x in 0..3 {
                text.push_str(&format!("{id}, {x}.0, {y}.0, {z}.0\n"));
                id += 1;
            }
        }
    }
    let n = |x: usize, y: usize, z: usize| 1 + x + 3 * y + 6 * z;
    text.push_str("*ELEMENT, TYPE=C3D8R, ELSET=GEL\n");
    for (e, x) in [(1, 0), (2, 1)] {
        text.push_str(&format!(
            "{e}, {}, {}, {}, {}, {}, {}, {}, {}\n",
            n(x, 0, 0),
            n(x + 1, 0, 0),
            n(x + 1, 1, 0),
            n(x, 1, 0),
            n(x, 0, 1),
            n(x + 1, 0, 1),
            n(x + 1, 1, 1),
            n(x, 1, 1)
        ));
    }
    text.push_str("*STEP\n*END STEP\n");
    std::fs::write(&deck, text).unwrap();
    let o = dir.path().join("o");
    ok(&["--out-dir", s(&o), "convert", s(&deck)]);
    let r = json(&o.join("two_surface.json"));
    assert_eq!(r["triangles"], 20);
    assert!((r["signed_volume"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn indent_emits_neutral_mesh_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path();
    ok(&[
        "--out-dir",
        s(o),
        "indent",
        "--family",
        "flat",
        "--pad-width",
        "20",
        "--pad-length",
        "40",
        "--thickness",
        "4",
        "--resolution",
        "40,80",
        "--layers",
        "2",
        "--indenter",
        "sphere",
        "--dims",
        "5",
        "--depth",
        "1.5",
    ]);
    let text = std::fs::read_to_string(o.join("indented.neutral")).unwrap();
    assert!(text.lines().any(|l| l == "# source: approximate-deformer"));
    let r = json(&o.join("indent_report.json"));
    assert!(r["min_signed_distance"].as_f64().unwrap() >= -1e-6);
    assert!((r["max_displacement"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert_eq!(
        json(&o.join("indent.manifest.json"))["deformation_source"],
        "approximate-deformer"
    );
}

const SMALL: [&str; 6] = ["--width", "96", "--height", "72", "--spp", "8"];

fn with_small<'a>(out: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["--out-dir", out];
    v.extend_from_slice(&SMALL);
    v.extend_from_slice(rest);
    v
}

#[test]
fn render_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&with_small(s(&a), &["render"]));
    ok(&with_small(s(&b), &["render"]));
    let (ma, mb) = (
        json(&a.join("render.manifest.json")),
        json(&b.join("render.manifest.json")),
    );
    assert_eq!(ma, mb);
    assert_eq!(ma["deformation_source"], "approximate-deformer");
    let img = Image::read_raw(std::fs::File::open(a.join("render.rgbf")).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (96, 72));
    assert!(img.is_finite() && img.mean_luminance() > 0.0);
}

fn read_sweep(dir: &Path) -> Vec<(f64, f64)> {
    let mut rdr = csv::Reader::from_path(dir.join("sweep_angle.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["angle_deg", "probe_intensity"]);
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect()
}

fn raw(path: PathBuf) -> Image {
    Image::read_raw(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn sweep_repeats_and_unlit_probe() {
    let dir = tempfile::tempdir().unwrap();
    let lit = dir.path().join("lit");
    ok(&with_small(
        s(&lit),
        &["sweep-angle", "--angles", "40,20,40"],
    ));
    let rows = read_sweep(&lit);
    assert_eq!(
        rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        vec![20.0, 40.0, 40.0]
    );
    assert_eq!(rows[1].1, rows[2].1);
    let svg = std::fs::read_to_string(lit.join("sweep_angle.svg")).unwrap();
    assert!(svg.contains("angle (deg)") && svg.contains("intensity"));
    let m = json(&lit.join("sweep-angle.manifest.json"));
    assert_eq!(m["inputs"]["angle_grid_default"], false);
    assert_eq!(m["partial"], false);

    // Darkest 9x9 window of the first image, found by direct inspection.
    let img = raw(lit.join("angle_00_020.0.rgbf"));
    let mut best = (f64::INFINITY, 0, 0);
    for y in 4..img.height - 4 {
        for x in 4..img.width - 4 {
            let mut acc = 0.0;
            for yy in y - 4..=y + 4 {
                for xx in x - 4..=x + 4 {
                    acc += img.get(xx, yy).luminance();
                }
            }
            if acc < best.0 {
                best = (acc, x, y);
            }
        }
    }
    let dark = dir.path().join("dark");
    let probe = format!("{},{}", best.1, best.2);
    ok(&with_small(
        s(&dark),
        &[
            "sweep-angle",
            "--angles",
            "20,40",
            "--probe",
            &probe,
            "--window",
            "9",
        ],
    ));
    let d = read_sweep(&dark);
    assert!((d[0].1 - best.0 / 81.0).abs() <= 1e-12);
    for (u, l) in d.iter().zip(&rows) {
        assert!(u.1 < 0.01 * l.1, "{u:?} vs {l:?}");
    }
}

#[test]
fn failed_sweep_keeps_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path();
    let c = code(&with_small(
        s(o),
        &[
            "sweep-angle",
            "--angles",
            "20,40",
            "--probe",
            "2,2",
            "--window",
            "9",
        ],
    ));
    assert_eq!(c, 2);
    let m = json(&o.join("sweep-angle.manifest.json"));
    assert_eq!(m["partial"], true);
    assert!(m["error"].as_str().unwrap().contains("angle 20"));
    assert!(o.join("sweep_angle.csv").exists());
}

fn uniformity(dir: &Path) -> (f64, f64, f64) {
    let r = json(&dir.join("uniformity.json"));
    (
        r["cv_one"].as_f64().unwrap(),
        r["cv_two"].as_f64().unwrap(),
        r["ratio"].as_f64().unwrap(),
    )
}

#[test]
fn compare_lights_cases() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--width", "96", "--height", "72", "--spp", "32"];
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut v = vec!["--out-dir", s(&out)];
        v.extend_from_slice(&args);
        v.push("compare-lights");
        v.extend_from_slice(extra);
        ok(&v);
        uniformity(&out)
    };
    let (one, two, _) = run("default", &[]);
    assert!(two < one, "{two} vs {one}");

    let base = dir.path().join("base.toml");
    default_scene().save(&base).unwrap();
    let (_, _, ratio) = run("same", &["--one", s(&base), "--two", s(&base)]);
    assert!((ratio - 1.0).abs() < 0.02);

    let (one, two, _) = run("dark_top", &["--top-scale", "0"]);
    assert!((two / one - 1.0).abs() < 0.02, "{one} {two}");

    let mut moved: Scene = default_scene();
    moved.camera.hfov_deg = 100.0;
    let other = dir.path().join("moved.toml");
    moved.save(&other).unwrap();
    let out = dir.path().join("bad");
    assert_eq!(
        code(&[
            "--out-dir",
            s(&out),
            "compare-lights",
            "--one",
            s(&base),
            "--two",
            s(&other)
        ]),
        2
    );
    assert!(moved.panels(LedPlacement::Top).next().is_none());
}

#[test]
fn pipeline_reruns_bit_identically_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut args = with_small(
        s(&a),
        &["pipeline", "--family", "flat", "--size", "standard"],
    );
    ok(&args);
    let ma = json(&a.join("pipeline.manifest.json"));
    assert_eq!(ma["deformation_source"], "approximate-deformer");
    let spec = &ma["inputs"]["spec"];
    assert_eq!(spec["pad"]["family"], "flat");
    assert_eq!(
        (
            spec["pad"]["width"].as_f64(),
            spec["pad"]["length"].as_f64()
        ),
        (Some(35.0), Some(70.0))
    );
    assert_eq!(spec["indenter"]["shape"]["radius"], 10.0);

    args = vec!["--out-dir", s(&b), "pipeline", "--from-manifest"];
    let from = a.join("pipeline.manifest.json");
    args.push(s(&from));
    ok(&args);
    assert_eq!(json(&b.join("pipeline.manifest.json")), ma);
    for f in [
        "final.png",
        "final.rgbf",
        "deformed.neutral",
        "gel_surface.obj",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn pipeline_marks_external_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let ind = dir.path().join("ind");
    ok(&[
        "--out-dir",
        s(&ind),
        "indent",
        "--family",
        "flat",
        "--size",
        "standard",
        "--resolution",
        "44,88",
        "--layers",
        "2",
    ]);
    // Strip the provenance line, as an external solver's export would lack it.
    let text = std::fs::read_to_string(ind.join("indented.neutral")).unwrap();
    let ext = dir.path().join("solver.neutral");
    std::fs::write(
        &ext,
        text.lines()
            .filter(|l| !l.starts_with("# source"))
            .collect::<Vec<_>>()
            .join("\n"),
    )
    .unwrap();
    let out = dir.path().join("p");
    ok(&with_small(
        s(&out),
        &[
            "pipeline",
            "--family",
            "flat",
            "--size",
            "standard",
            "--external",
            s(&ext),
        ],
    ));
    let m = json(&out.join("pipeline.manifest.json"));
    assert_eq!(m["deformation_source"], "external-fem");
    let neutral = std::fs::read_to_string(out.join("deformed.neutral")).unwrap();
    assert!(neutral.contains("# source: external-fem"));
}

fn chi_square(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, y)| **x + **y > 0.0)
        .map(|(x, y)| (x - y).powi(2) / (x + y))
        .sum::<f64>()
        * 0.5
}

/// Normalised 16-bin luminance histogram of the 31x31 region at the probe.
fn probe_histogram(dir: &Path) -> Vec<f64> {
    let m = json(&dir.join("pipeline.manifest.json"));
    let render = m["inputs"]["stages"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .clone();
    let (px, py) = (
        render["probe"][0].as_u64().unwrap() as u32,
        render["probe"][1].as_u64().unwrap() as u32,
    );
    let img = raw(dir.join("final.rgbf"));
    assert!(probe_intensity(&img, px, py, 9).unwrap() > 0.0);
    let mut vals = Vec::new();
    for y in py.saturating_sub(15)..(py + 16).min(img.height) {
        for x in px.saturating_sub(15)..(px + 16).min(img.width) {
            vals.push(img.get(x, y).luminance());
        }
    }
    let hi = 0.08;
    let mut h = vec![0.0; 16];
    for v in &vals {
        h[((v / hi * 16.0) as usize).min(15)] += 1.0 / vals.len() as f64;
    }
    h
}

#[test]
fn pad_families_give_distinct_imprints() {
    let dir = tempfile::tempdir().unwrap();
    let run = |fam: &str, seed: &str| {
        let out = dir.path().join(format!("{fam}_{seed}"));
        ok(&[
            "--out-dir",
            s(&out),
            "--width",
            "160",
            "--height",
            "120",
            "--spp",
            "16",
            "--seed",
            seed,
            "pipeline",
            "--family",
            fam,
            "--variant",
            "2",
            "--resolution",
            "44,88",
        ]);
        probe_histogram(&out)
    };
    let hists: Vec<Vec<f64>> = ["flat", "cylindrical", "ellipsoid"]
        .iter()
        .map(|f| run(f, "1"))
        .collect();
    // Threshold: a multiple of the same-shape, different-seed distance.
    let noise = chi_square(&hists[2], &run("ellipsoid", "2"));
    for i in 0..3 {
        for j in i + 1..3 {
            let d = chi_square(&hists[i], &hists[j]);
            assert!(
                d > 4.0 * noise,
                "families {i} and {j}: chi-square {d}, noise {noise}"
            );
        }
    }
}
