use depthkit::field::{Aabb, VoxelGrid};
use depthkit::synth::{make_dataset, ring_cameras, SceneSpec, SynthConfig};
use depthkit::train::{train, LossWeights, TrainConfig};
use depthkit::Error;

fn small_setup() -> (depthkit::dataset::SceneDataset<f64>, VoxelGrid<f64>) {
    let cfg = SynthConfig {
        resolution: [12; 3],
        ..SynthConfig::default()
    };
    let cams = ring_cameras(2, 3.5, 0.2, 16.0, 8, 8).unwrap();
    let (ds, _) = make_dataset(&SceneSpec::demo(), &cams, 32, 5, &cfg).unwrap();
    let init = VoxelGrid::filled(cfg.resolution, Aabb::cube(1.5), 0.5, [0.5; 3]).unwrap();
    (ds, init)
}

fn quick(iterations: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        iterations,
        rays_per_batch: 32,
        sample_count: 16,
        seed,
        log_every: 5,
        ..TrainConfig::default()
    }
}

#[test]
fn zero_iterations_return_initial_grid() {
    let (ds, init) = small_setup();
    let (grid, log) = train(&ds, init.clone(), &quick(0, 1), &LossWeights::default()).unwrap();
    assert_eq!(grid, init);
    assert!(log.entries.is_empty());
}

#[test]
fn same_seed_same_log_and_grid() {
    let (ds, init) = small_setup();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train(&ds, init.clone(), &quick(20, 7), &LossWeights::default()).unwrap())
    };
    let (g1, l1) = run(1);
    let (g2, l2) = run(1);
    let (g3, l3) = run(3);
    assert_eq!(l1.to_csv(), l2.to_csv());
    assert_eq!(g1, g2);
    assert_eq!(l1.to_csv(), l3.to_csv());
    assert_eq!(g1, g3);
    assert_eq!(l1.entries.iter().map(|e| e.iter).collect::<Vec<_>>(), vec![1, 5, 10, 15, 20]);
    let (_, other) = train(&ds, init, &quick(20, 8), &LossWeights::default()).unwrap();
    assert_ne!(other.to_csv(), l1.to_csv());
}

#[test]
fn log_exports() {
    let (ds, init) = small_setup();
    let (_, log) = train(&ds, init, &quick(6, 2), &LossWeights::default()).unwrap();
    let csv = log.to_csv();
    assert!(csv.starts_with("iter,total,rgb,depth,masked,psnr_holdout\n"));
    assert_eq!(csv.lines().count(), 1 + log.entries.len());
    let svg = log.to_svg();
    assert!(svg.starts_with("<svg") && svg.contains("polyline") && !svg.contains("href"));
}

#[test]
fn empty_dataset_and_bad_holdout() {
    let (mut ds, init) = small_setup();
    let cfg = TrainConfig {
        holdout: Some(5),
        ..quick(1, 0)
    };
    assert!(train(&ds, init.clone(), &cfg, &LossWeights::default()).is_err());
    ds.ids.clear();
    ds.images.clear();
    ds.depths.clear();
    ds.masks.clear();
    ds.cameras.clear();
    assert!(matches!(
        train(&ds, init, &quick(1, 0), &LossWeights::default()),
        Err(Error::EmptyDataset)
    ));
}

#[test]
fn log_csv_round_trip() {
    let (ds, init) = small_setup();
    let (_, log) = train(&ds, init, &quick(6, 3), &LossWeights::default()).unwrap();
    let back = depthkit::train::TrainingLog::<f64>::from_csv(&log.to_csv()).unwrap();
    assert_eq!(back, log);
}
