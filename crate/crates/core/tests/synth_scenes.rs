use depthkit::camera::Camera;
use depthkit::dataset::{load_dataset, save_dataset};
use depthkit::field::render_image;
use depthkit::geometry::{Rigid, Vec3};
use depthkit::synth::{
    analytic_depth, make_dataset, removal_mask, ring_cameras, Primitive, SceneSpec, Shape, SynthConfig,
};
use proptest::prelude::*;

fn demo_cameras(count: usize) -> Vec<Camera<f64>> {
    ring_cameras(count, 3.5, 0.2, 64.0, 32, 32).unwrap()
}

#[test]
fn baked_depth_tracks_analytic_depth() {
    let spec = SceneSpec::demo();
    let cfg = SynthConfig::default();
    let grid = depthkit::synth::bake_grid::<f64>(&spec, cfg.resolution, cfg.bounds().unwrap()).unwrap();
    let cell = grid.cell_size();
    let diag = cell.norm();
    for cam in demo_cameras(4) {
        let truth = analytic_depth(&spec, &cam);
        let (_, depth) = render_image(&grid, &cam, cfg.near, cfg.far, 256, false, 0).unwrap();
        let hits: Vec<usize> = (0..truth.values().len()).filter(|&i| truth.values()[i] > 0.0).collect();
        assert!(!hits.is_empty());
        let close = hits
            .iter()
            .filter(|&&i| (depth.values()[i] - truth.values()[i]).abs() <= 2.0 * diag)
            .count();
        let frac = close as f64 / hits.len() as f64;
        assert!(frac >= 0.95, "only {frac} of hit pixels within two voxel diagonals");
    }
}

#[test]
fn one_camera_one_frame_and_masks() {
    let spec = SceneSpec::demo();
    let cams = demo_cameras(1);
    let cfg = SynthConfig {
        resolution: [16; 3],
        ..SynthConfig::default()
    };
    let (ds, _) = make_dataset(&spec, &cams, 16, 3, &cfg).unwrap();
    assert_eq!(ds.len(), 1);
    assert_eq!(ds.ids, vec!["0000".to_string()]);
    // per-pixel hit identity
    let cam = &cams[0];
    for y in 0..cam.height {
        for x in 0..cam.width {
            let hit = spec.first_hit(&cam.ray(x, y, 1.0, 2.0));
            assert_eq!(ds.masks[0].get(x, y), hit.is_some_and(|h| h.1 == 0));
        }
    }
    assert!(ds.masks[0].count() > 0);

    let plain = SceneSpec {
        removal: None,
        ..spec
    };
    let (ds, _) = make_dataset(&plain, &cams, 16, 3, &cfg).unwrap();
    assert_eq!(ds.masks[0].count(), 0);
}

#[test]
fn dataset_directory_round_trip() {
    let cfg = SynthConfig {
        resolution: [16; 3],
        ..SynthConfig::default()
    };
    let (ds, _) = make_dataset(&SceneSpec::demo(), &demo_cameras(2), 16, 1, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    let back = load_dataset::<f64>(dir.path(), 256.0).unwrap();
    assert_eq!(back.ids, ds.ids);
    assert_eq!(back.masks, ds.masks);
    assert_eq!(back.cameras, ds.cameras);
    for (a, b) in back.depths.iter().zip(&ds.depths) {
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= y * 1e-6);
        }
    }
    for (a, b) in back.images.iter().zip(&ds.images) {
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }
}

#[test]
fn removal_spec_drops_primitive() {
    let spec = SceneSpec::demo();
    let removed = spec.without_removal();
    assert_eq!(removed.primitives.len(), 1);
    let cam = &demo_cameras(1)[0];
    let before = analytic_depth(&spec, cam);
    let after = analytic_depth(&removed, cam);
    let mask = removal_mask(&spec, cam);
    for i in 0..mask.values().len() {
        if mask.values()[i] {
            assert!(after.values()[i] > before.values()[i]);
        } else {
            assert_eq!(after.values()[i], before.values()[i]);
        }
    }
}

fn arb_spec() -> impl Strategy<Value = SceneSpec> {
    let sphere = (prop::array::uniform3(-1.0..1.0f64), 0.2..1.0f64).prop_map(|(c, r)| Shape::Sphere {
        center: [c[0], c[1], c[2] + 4.0],
        radius: r,
    });
    let slab = (2.0..6.0f64, 0.1..2.0f64, prop::array::uniform2(-0.3..0.3f64)).prop_map(|(z0, w, n)| Shape::Slab {
        z0,
        z1: z0 + w,
        normal: [n[0], n[1], 1.0],
    });
    let plane = (3.0..8.0f64, prop::array::uniform2(-0.3..0.3f64)).prop_map(|(z, n)| Shape::Plane {
        point: [0.0, 0.0, z],
        normal: [n[0], n[1], -1.0],
    });
    let shape = prop_oneof![sphere, slab, plane];
    prop::collection::vec(shape, 1..4).prop_map(|shapes| SceneSpec {
        primitives: shapes
            .into_iter()
            .map(|shape| Primitive {
                shape,
                color: [0.5; 3],
                density: 10.0,
            })
            .collect(),
        removal: None,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analytic_depth_is_rigid_invariant(
        spec in arb_spec(),
        axis in prop::array::uniform3(-1.0..1.0f64),
        angle in -3.0..3.0f64,
        shift in prop::array::uniform3(-5.0..5.0f64),
    ) {
        prop_assume!(Vec3::from_array(axis).norm() > 0.1);
        let cam = Camera::centered(12.0, 9, 7, Rigid::identity()).unwrap();
        let g = Rigid::from_axis_angle(Vec3::from_array(axis), angle)
            .compose(&Rigid::from_translation(Vec3::from_array(shift)));
        let moved_cam = Camera { pose: g.compose(&cam.pose), ..cam.clone() };
        let a = analytic_depth(&spec, &cam);
        let b = analytic_depth(&spec.transformed(&g), &moved_cam);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert_eq!(*x > 0.0, *y > 0.0);
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{} vs {}", x, y);
        }
    }
}
