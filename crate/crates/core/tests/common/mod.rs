#![allow(dead_code)]
// Values are copied digit for digit from the reference tables.
#![allow(clippy::excessive_precision)]

/// Reference correction weights: (kernel, p, [(eta, weight)]).
pub type Table = (&'static str, usize, &'static [([u32; 3], f64)]);

pub const TABLES: &[Table] = &[
    ("s1", 0, &[([0, 0, 0], 1.6075733114131817281)]),
    (
        "s1",
        1,
        &[
            ([0, 0, 0], 1.4237441285753376522),
            ([0, 0, 1], 0.097588595336840260411),
            ([0, 1, 0], 0.097588595336840260411),
            ([1, 0, 0], -0.10326259925475848286),
        ],
    ),
    (
        "s1",
        2,
        &[
            ([0, 0, 0], 1.3984618420604290732),
            ([0, 0, 1], 0.10713725390633714656),
            ([0, 0, 2], -0.0080179178535551260516),
            ([0, 1, 0], 0.10713725390633714656),
            ([0, 1, 1], 0.010574715875272435133),
            ([0, 2, 0], -0.0080179178535551260516),
            ([1, 0, 0], -0.12143612134308144639),
            ([1, 0, 1], 0.00068679054708937389563),
            ([1, 1, 0], 0.00068679054708937389563),
            ([2, 0, 0], 0.0038565899749913669879),
        ],
    ),
    ("s2", 1, &[([1, 0, 0], 1.0 / 6.0)]),
    (
        "s2",
        2,
        &[
            ([1, 0, 0], 0.172099682280587019),
            ([1, 0, 1], 0.01879595247811320125),
            ([1, 1, 0], 0.01879595247811320125),
            ([2, 0, 0], -0.04030841276318657868),
        ],
    ),
    (
        "s2",
        3,
        &[
            ([1, 0, 0], 0.1765136604074361107),
            ([1, 0, 1], 0.02781376632443755434),
            ([1, 0, 2], -0.001785880694368878088),
            ([1, 1, 0], 0.02781376632443755434),
            ([1, 1, 1], 0.002634615854313335809),
            ([1, 2, 0], -0.001785880694368878088),
            ([2, 0, 0], -0.06112550652977502187),
            ([2, 0, 1], -0.003571761388737756176),
            ([2, 1, 0], -0.003571761388737756176),
            ([3, 0, 0], 0.008776034830384866974),
        ],
    ),
];

pub fn kernel(id: &str) -> ctrap::KernelSpec {
    match id {
        "s1" => ctrap::s1(),
        _ => ctrap::s2(),
    }
}

/// Largest deviation from a reference table; also checks the grid covers
/// exactly the tabulated points.
pub fn table_deviation(table: &ctrap::WeightTable, expected: &[([u32; 3], f64)]) -> f64 {
    assert_eq!(table.weights.len(), expected.len(), "grid size");
    expected
        .iter()
        .map(|(eta, w)| (table.weight(eta).expect("tabulated point on grid") - w).abs())
        .fold(0.0, f64::max)
}
