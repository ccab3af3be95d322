use finray_web::{fit_csv, model_csv, pad_section, render_rgba, MAX_PIXELS};

#[test]
fn model_csv_round_trips_through_fit() {
    let csv = model_csv(585.0, 28.0, 1.8, 1.0).unwrap();
    let r = fit_csv(&csv, "red").unwrap();
    // CSV values carry six decimals, so recovery is limited by that rounding.
    assert!((r.lambda0 - 585.0).abs() < 1e-2, "{}", r.lambda0);
    assert!((r.gamma - 28.0).abs() < 1e-2, "{}", r.gamma);
    assert!(r.converged);
    assert!(r.svg.starts_with("<svg"));
}

#[test]
fn bad_inputs_are_errors() {
    assert!(fit_csv("wavelength_nm,value\n500,1\n", "red").is_err());
    assert!(fit_csv(&model_csv(585.0, 28.0, 1.8, 1.0).unwrap(), "blue").is_err());
    assert!(model_csv(585.0, -1.0, 0.0, 1.0).is_err());
    assert!(pad_section("huge", "flat", 0).is_err());
    assert!(pad_section("standard", "dome", 0).is_err());
    assert!(render_rgba("standard", "flat", 30.0, false, 400, 400, 1).is_err());
    assert!(render_rgba("standard", "flat", 30.0, false, 0, 10, 1).is_err());
}

#[test]
fn families_draw_different_sections() {
    let a = pad_section("standard", "flat", 0).unwrap();
    let b = pad_section("standard", "ellipsoid", 0).unwrap();
    assert!(a.contains("<svg") && b.contains("<svg"));
    assert_ne!(a, b);
}

#[test]
fn render_returns_opaque_rgba_with_signal() {
    let (w, h) = (32, 24);
    assert!(w * h <= MAX_PIXELS);
    let px = render_rgba("standard", "ellipsoid", 30.0, false, w, h, 2).unwrap();
    assert_eq!(px.len(), (w * h * 4) as usize);
    assert!(px.chunks_exact(4).all(|p| p[3] == 255));
    assert!(px.chunks_exact(4).any(|p| p[..3].iter().any(|&c| c > 0)));
    assert_eq!(
        px,
        render_rgba("standard", "ellipsoid", 30.0, false, w, h, 2).unwrap()
    );
}
