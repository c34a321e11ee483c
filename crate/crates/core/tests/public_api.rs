use fsasc::pipeline::{cluster, load_cloud, pca_project, save_cloud, Method};
use fsasc::{clustering_error, fasc, fsasc, sample_cloud, FsascParams, SynthConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn cfg(dims: Vec<usize>, seed: u64) -> SynthConfig {
    SynthConfig {
        ambient_dim: 5,
        dims,
        points_per_subspace: 60,
        noise_sigma: 0.0,
        seed,
    }
}

#[test]
fn file_round_trip_then_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let c = sample_cloud(&cfg(vec![1, 2, 3], 11)).unwrap();
    for name in ["c.csv", "c.json"] {
        let path = dir.path().join(name);
        save_cloud(&c.points, &path).unwrap();
        let back = load_cloud(&path).unwrap();
        assert_eq!(back.as_flat(), c.points.as_flat());
        assert_eq!(back.labels(), Some(&c.labels[..]));
        let out = cluster(&back, Method::Fsasc, &FsascParams::new(3)).unwrap();
        assert_eq!(clustering_error(&out.labels, &c.labels, 3).unwrap(), 0.0);
    }
}

#[test]
fn embedding_in_a_larger_space_changes_nothing_after_pca() {
    // the same arrangement placed in R^7 through an isometry
    let c = sample_cloud(&cfg(vec![2, 3, 4], 12)).unwrap();
    let q = DMatrix::<f64>::from_fn(7, 7, |i, j| ((i * 7 + j) as f64 * 0.37).sin())
        .qr()
        .q();
    let lifted = c
        .points
        .map_points(7, |p| {
            let mut v = p.to_vec();
            v.resize(7, 0.0);
            (&q * nalgebra::DVector::from_vec(v)).iter().copied().collect()
        })
        .unwrap();
    let back = pca_project(&lifted, 5).unwrap();
    let r = fsasc(&back, &FsascParams::new(3)).unwrap();
    assert_eq!(clustering_error(&r.labels, &c.labels, 3).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fasc_recovers_dimensions(seed in 0u64..10_000, a in 1usize..5, b in 1usize..5) {
        let c = sample_cloud(&cfg(vec![a, b], seed)).unwrap();
        let out = fasc(&c.points, 2).unwrap();
        prop_assert_eq!(clustering_error(&out.labels(c.points.len()), &c.labels, 2).unwrap(), 0.0);
        let mut got: Vec<usize> = out.clusters.iter().map(|k| k.dim).collect();
        let mut want = vec![a, b];
        got.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }
}
