//! Calibration of the sampled Hermite cross-check.
//!
//! The fixture records the residuals of `h_0, …, h_8` on the refinement
//! grids (half-width `1.65·√N`) for `N = 128, 256, 512`. Regenerate with
//! `cargo test --test hermite_calibration -- --ignored`.

use std::fs;
use std::path::PathBuf;

use cconj::transforms::{dft_eigen_check, HermiteGrid, REFINEMENT_WIDTH_FACTOR};
use serde::{Deserialize, Serialize};

pub const POINTS: [usize; 3] = [128, 256, 512];
pub const N_MAX: usize = 8;
pub const RELATIVE_TOLERANCE: f64 = 0.10;

#[derive(Debug, Serialize, Deserialize)]
struct Calibration {
    width_factor: f64,
    points: Vec<usize>,
    /// `residuals[i][n]` for grid `points[i]` and Hermite index `n`.
    residuals: Vec<Vec<f64>>,
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/hermite_calibration.json")
}

fn measure() -> Vec<Vec<f64>> {
    POINTS
        .iter()
        .map(|&p| {
            let grid = HermiteGrid::refinement(p).unwrap();
            (0..=N_MAX)
                .map(|n| dft_eigen_check(n, &grid).residual)
                .collect()
        })
        .collect()
}

#[test]
#[ignore = "writes the calibration fixture"]
fn regenerate_fixture() {
    let cal = Calibration {
        width_factor: REFINEMENT_WIDTH_FACTOR,
        points: POINTS.to_vec(),
        residuals: measure(),
    };
    fs::write(
        fixture_path(),
        serde_json::to_string_pretty(&cal).unwrap() + "\n",
    )
    .unwrap();
}

#[test]
fn residuals_match_calibration() {
    let cal: Calibration =
        serde_json::from_str(&fs::read_to_string(fixture_path()).unwrap()).unwrap();
    assert_eq!(cal.width_factor, REFINEMENT_WIDTH_FACTOR);
    assert_eq!(cal.points, POINTS);
    let now = measure();
    for (i, row) in now.iter().enumerate() {
        for (n, &r) in row.iter().enumerate() {
            let expected = cal.residuals[i][n];
            assert!(
                (r - expected).abs() <= RELATIVE_TOLERANCE * expected,
                "N = {}, n = {n}: {r:e} vs calibrated {expected:e}",
                POINTS[i]
            );
        }
    }
}

#[test]
fn residuals_decrease_under_refinement() {
    let now = measure();
    for pair in now.windows(2) {
        for (n, (coarse, fine)) in pair[0].iter().zip(&pair[1]).enumerate() {
            assert!(fine <= coarse, "n = {n}: {fine:e} > {coarse:e}");
        }
    }
}

#[test]
fn refinement_grids_contain_the_support() {
    for &p in &POINTS {
        let grid = HermiteGrid::refinement(p).unwrap();
        for n in 0..=N_MAX {
            assert!(dft_eigen_check(n, &grid).support_ok);
        }
    }
}
