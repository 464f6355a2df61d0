use super::Sample;

/// Quintic Hermite interpolation between two nodes.
///
/// Matches value, first and second derivative at both ends, so polynomials
/// of degree five are reproduced exactly and the interpolated acceleration is
/// continuous across nodes.
pub fn hermite(s0: &Sample, s1: &Sample, t: f64) -> Sample {
    let h = s1.t - s0.t;
    let theta = (t - s0.t) / h;
    let c = coefficients(s0, s1, h);

    let p = c[0] + theta * (c[1] + theta * (c[2] + theta * (c[3] + theta * (c[4] + theta * c[5]))));
    let dp = c[1]
        + theta * (2.0 * c[2] + theta * (3.0 * c[3] + theta * (4.0 * c[4] + theta * 5.0 * c[5])));
    let ddp = 2.0 * c[2] + theta * (6.0 * c[3] + theta * (12.0 * c[4] + theta * 20.0 * c[5]));

    Sample::new(t, p, dp / h, ddp / (h * h))
}

/// Monomial coefficients in the normalised variable `θ = (t - t0) / h`.
fn coefficients(s0: &Sample, s1: &Sample, h: f64) -> [f64; 6] {
    let c0 = s0.y;
    let c1 = h * s0.v;
    let c2 = 0.5 * h * h * s0.a;
    let d0 = s1.y - (c0 + c1 + c2);
    let d1 = h * s1.v - (c1 + 2.0 * c2);
    let d2 = h * h * s1.a - 2.0 * c2;
    [
        c0,
        c1,
        c2,
        10.0 * d0 - 4.0 * d1 + 0.5 * d2,
        -15.0 * d0 + 7.0 * d1 - d2,
        6.0 * d0 - 3.0 * d1 + 0.5 * d2,
    ]
}
