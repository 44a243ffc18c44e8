//! Dormand-Prince 5(4) coefficients.

pub(crate) const STAGES: usize = 7;

pub(crate) const C: [f64; STAGES] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

pub(crate) const A: [[f64; STAGES]; STAGES] = [
    [0.0; STAGES],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
        0.0,
    ],
    B,
];

/// Fifth-order weights (the last row of `A`, FSAL).
pub(crate) const B: [f64; STAGES] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// `B` minus the embedded fourth-order weights.
pub(crate) const E: [f64; STAGES] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output coefficients of the quartic continuous extension.
const D: [f64; STAGES] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// `P[j][m-1]` is the coefficient of `sigma^m` in the continuous weight
/// `b_j(sigma)`, so that `y(t + sigma h) = y + h sum_j b_j(sigma) k_j`.
///
/// Expands `sigma ydiff + sigma(1-sigma) bspl + sigma^2(1-sigma) r4 + sigma^2(1-sigma)^2 r5`
/// with `ydiff = sum b_j k_j`, `bspl = k_1 - ydiff`, `r4 = 2 ydiff - k_1 - k_7`,
/// `r5 = sum d_j k_j`.
pub(crate) fn dense_polynomials() -> [[f64; 4]; STAGES] {
    let mut p = [[0.0; 4]; STAGES];
    for j in 0..STAGES {
        let first = if j == 0 { 1.0 } else { 0.0 };
        let last = if j == STAGES - 1 { 1.0 } else { 0.0 };
        let ydiff = B[j];
        let bspl = first - ydiff;
        let r4 = 2.0 * ydiff - first - last;
        let r5 = D[j];
        // sigma: ydiff + bspl
        p[j][0] = ydiff + bspl;
        // sigma^2: -bspl + r4 + r5
        p[j][1] = -bspl + r4 + r5;
        // sigma^3: -r4 - 2 r5
        p[j][2] = -r4 - 2.0 * r5;
        // sigma^4: r5
        p[j][3] = r5;
    }
    p
}
