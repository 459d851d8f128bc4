//! Built-in example games with their known proper equilibria.

use crate::game::{parse_game, GameTree};

pub const FIG1_EFT: &str = include_str!("../fixtures/fig1.eft");
pub const FIG2_EFT: &str = include_str!("../fixtures/fig2.eft");
pub const FIG3_EFT: &str = include_str!("../fixtures/fig3.eft");

pub fn fig1() -> GameTree {
    parse_game(FIG1_EFT).expect("fig1 fixture")
}

pub fn fig2() -> GameTree {
    parse_game(FIG2_EFT).expect("fig2 fixture")
}

pub fn fig3() -> GameTree {
    parse_game(FIG3_EFT).expect("fig3 fixture")
}

/// Proper equilibria as mixed profiles over reduced strategies.
pub fn fig1_catalog() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![vec![0.0, 0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0]],
        vec![vec![0.0, 0.0, 0.0, 1.0, 0.0], vec![1.0, 0.0]],
        vec![vec![0.0, 0.0, 0.0, 1.0, 0.0], vec![2.0 / 3.0, 1.0 / 3.0]],
    ]
}

/// Nash equilibrium of the first game that is not proper.
pub fn fig1_excluded() -> Vec<Vec<f64>> {
    vec![vec![0.0, 0.0, 0.0, 1.0, 0.0], vec![0.5, 0.5]]
}

pub fn fig2_catalog() -> Vec<Vec<Vec<f64>>> {
    vec![vec![
        vec![0.0, 24.0 / 49.0, 25.0 / 49.0],
        vec![3.0 / 8.0, 5.0 / 8.0],
        vec![0.25, 0.75],
    ]]
}

pub fn fig3_catalog() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![vec![1.0, 0.0, 0.0], vec![2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0]],
        vec![vec![0.0, 1.0 / 3.0, 2.0 / 3.0], vec![0.0, 0.0, 2.0 / 3.0, 1.0 / 3.0]],
        vec![
            vec![5.0 / 14.0, 3.0 / 14.0, 3.0 / 7.0],
            vec![1.0 / 12.0, 1.0 / 24.0, 7.0 / 12.0, 7.0 / 24.0],
        ],
    ]
}

/// Fixture text by name (`fig1`, `fig2`, `fig3`).
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "fig1" => Some(FIG1_EFT),
        "fig2" => Some(FIG2_EFT),
        "fig3" => Some(FIG3_EFT),
        _ => None,
    }
}
