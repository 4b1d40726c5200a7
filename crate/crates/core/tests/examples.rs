mod autodiff_gradcheck {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/autodiff_gradcheck.rs"));
}
mod random_field {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/random_field.rs"));
}
mod initial_conditions {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/initial_conditions.rs"));
}
mod spectral_tools {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectral_tools.rs"));
}
mod reducers {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reducers.rs"));
}
mod latent_deeponet {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/latent_deeponet.rs"));
}
mod fno_rollout {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fno_rollout.rs"));
}
mod compare_pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/compare_pipeline.rs"));
}

#[test]
fn autodiff_gradcheck_example_runs() {
    let worst = autodiff_gradcheck::run_example().expect("gradcheck example should run");
    assert!(worst < 1e-4, "worst relative error {worst}");
}

#[test]
fn random_field_example_runs() {
    let (modes, var) = random_field::run_example().expect("random field example should run");
    assert!(modes > 0);
    assert!((var - 0.15).abs() < 0.015, "variance {var}");
}

#[test]
fn initial_conditions_example_runs() {
    initial_conditions::run_example().expect("initial conditions example should run");
}

#[test]
fn spectral_tools_example_runs() {
    spectral_tools::run_example().expect("spectral example should run");
}

#[test]
fn reducers_example_runs() {
    let (pca, mlae) = reducers::run_example().expect("reducer example should run");
    assert!(pca.is_finite() && mlae.is_finite());
    assert!(pca < mlae, "PCA should win at this budget: {pca} vs {mlae}");
}

#[test]
fn latent_deeponet_example_runs() {
    let mse = latent_deeponet::run_example().expect("L-DeepONet example should run");
    assert!(mse.is_finite() && mse > 0.0);
}

#[test]
fn fno_rollout_example_runs() {
    let mse = fno_rollout::run_example().expect("FNO example should run");
    assert!(mse.is_finite());
}

#[test]
fn compare_pipeline_example_runs() {
    let rows = compare_pipeline::run_example().expect("compare example should run");
    // latent x {pca, mlae} + full + fno, two seeds each
    assert_eq!(rows, 8);
}
