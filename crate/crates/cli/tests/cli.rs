use std::path::Path;
use std::process::{Command, Output};

use depthkit::depth_io::{load_depth_pfm, store_depth_pfm, store_mask_png, DepthMap, Mask};

fn depthkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depthkit")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = depthkit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn write_maps(dir: &Path, maps: &[(&str, DepthMap<f64>)]) {
    std::fs::create_dir_all(dir).unwrap();
    for (name, m) in maps {
        store_depth_pfm(m, dir.join(format!("{name}.pfm"))).unwrap();
    }
}

fn ramp(w: usize, h: usize) -> DepthMap<f64> {
    DepthMap::from_fn(w, h, |x, y| if (x + y) % 5 == 0 { 0.0 } else { 1.0 + 0.25 * x as f64 + 0.5 * y as f64 })
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn eval_identical_and_scaled_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = ramp(12, 9);
    write_maps(&tmp.path().join("gt"), &[("0000", gt.clone()), ("0001", gt.scaled(1.5))]);
    write_maps(&tmp.path().join("same"), &[("0000", gt.clone()), ("0001", gt.scaled(1.5))]);
    write_maps(&tmp.path().join("twice"), &[("0000", gt.scaled(2.0)), ("0001", gt.scaled(3.0))]);

    for (pred, expect_scale) in [("same", [1.0, 1.0]), ("twice", [0.5, 0.5])] {
        let out = tmp.path().join(format!("eval_{pred}"));
        ok(&["eval", "--gt", &s(&tmp.path().join("gt")), "--pred", &s(&tmp.path().join(pred)), "--out", &s(&out)]);
        let v = summary(&out);
        assert_eq!(v["frames"], 2);
        assert_eq!(v["skipped"], 0);
        assert_eq!(v["means"]["delta1"], 1.0);
        assert!(v["means"]["rmse"].as_f64().unwrap() < 1e-9);
        let scales: Vec<f64> = v["scales"].as_array().unwrap().iter().map(|s| s["scale"].as_f64().unwrap()).collect();
        assert_eq!(scales.len(), 2);
        for (got, want) in scales.iter().zip(expect_scale) {
            assert!((got - want).abs() < 1e-12, "scale {got} vs {want}");
        }
        assert!(out.join("report.csv").exists());
        assert!(out.join("manifest.json").exists());
    }
}

#[test]
fn eval_reports_unmatched_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = ramp(8, 8);
    write_maps(&tmp.path().join("gt"), &[("0000", gt.clone()), ("0002", gt.clone())]);
    write_maps(&tmp.path().join("pred"), &[("0000", gt.clone()), ("0003", gt.clone())]);
    let out = tmp.path().join("eval");
    ok(&["eval", "--gt", &s(&tmp.path().join("gt")), "--pred", &s(&tmp.path().join("pred")), "--out", &s(&out)]);
    let v = summary(&out);
    assert_eq!(v["frames"], 1);
    let skipped: Vec<&str> = v["skipped_frames"].as_array().unwrap().iter().map(|f| f["frame"].as_str().unwrap()).collect();
    assert_eq!(skipped, ["0002", "0003"]);

    write_maps(&tmp.path().join("other"), &[("0007", gt)]);
    let bad = depthkit(&["eval", "--gt", &s(&tmp.path().join("gt")), "--pred", &s(&tmp.path().join("other")), "--out", &s(&out)]);
    assert!(!bad.status.success());
}

#[test]
fn render_of_baked_scene_tracks_analytic_depth() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let render = tmp.path().join("render");
    ok(&["synth", "--samples", "16", "--out", &s(&data)]);
    ok(&["render", "--grid", &s(&data.join("grid.vxg")), "--cameras", &s(&data.join("cameras.json")), "--out", &s(&render)]);
    // two voxel diagonals of the default 64^3 grid spanning 3 units
    let bound = 2.0 * 3f64.sqrt() * 3.0 / 64.0;
    let (mut hits, mut close) = (0, 0);
    for i in 0..4 {
        let name = format!("{i:04}.pfm");
        let analytic = load_depth_pfm::<f64>(data.join("depths").join(&name)).unwrap();
        let rendered = load_depth_pfm::<f64>(render.join("depths").join(&name)).unwrap();
        for (a, r) in analytic.values().iter().zip(rendered.values()) {
            if *a > 0.0 {
                hits += 1;
                close += usize::from((a - r).abs() <= bound);
            }
        }
    }
    assert!(hits > 0);
    assert!(close as f64 >= 0.95 * hits as f64, "{close}/{hits} within {bound}");
}

#[test]
fn inpaint_with_empty_mask_is_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let depth = DepthMap::from_fn(10, 7, |x, y| 0.5 + 0.1 * x as f64 + 0.37 * y as f64);
    let dpath = tmp.path().join("0000.pfm");
    let mpath = tmp.path().join("mask.png");
    store_depth_pfm(&depth, &dpath).unwrap();
    store_mask_png(&Mask::new(10, 7, vec![false; 70]).unwrap(), &mpath).unwrap();
    let out = tmp.path().join("out");
    ok(&["inpaint", "--depth", &s(&dpath), "--mask", &s(&mpath), "--out", &s(&out)]);
    let before = load_depth_pfm::<f64>(&dpath).unwrap();
    let after = load_depth_pfm::<f64>(out.join("0000.pfm")).unwrap();
    let bits = |m: &DepthMap<f64>| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&before), bits(&after));
}

#[test]
fn train_with_zero_iterations_keeps_initial_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("train");
    ok(&["synth", "--resolution", "16", "--samples", "16", "--width", "16", "--height", "16", "--out", &s(&data)]);
    ok(&["train", "--data", &s(&data), "--iterations", "0", "--resolution", "12", "--out", &s(&out)]);
    let init = std::fs::read(out.join("grid_init.vxg")).unwrap();
    let trained = std::fs::read(out.join("grid.vxg")).unwrap();
    assert_eq!(init, trained);
    let cfg: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("train_config.json")).unwrap()).unwrap();
    assert!(cfg.to_string().contains("perceptual-proxy"));
}
