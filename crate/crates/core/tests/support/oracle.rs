//! Straight-line reference step for planar swarms, independent of the engine.

/// One step. `pos`, `vel` and `imp` (imprint) are per-agent `[x, y]`; `law` is
/// 0 = velocity-based, 1 = thresholded, 2 = no threshold.
#[rustfmt::skip]
#[allow(clippy::too_many_arguments)]
pub fn step(
    pos: &[[f64; 2]], vel: &[[f64; 2]], imp: &[[f64; 2]], t: f64,
    law: u8, delta: f64, k: f64, r: f64, vmax: f64, umax: f64, dt: f64,
) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let sat = |x: [f64; 2], lim: f64| {
        let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if n == 0.0 { [0.0, 0.0] } else { let s = lim * (n / lim).tanh() / n; [s * x[0], s * x[1]] }
    };
    let n = pos.len();
    let (mut p1, mut v1) = (Vec::new(), Vec::new());
    for i in 0..n {
        let nb: Vec<usize> = (0..n)
            .filter(|&j| j != i && ((pos[j][0] - pos[i][0]).powi(2) + (pos[j][1] - pos[i][1]).powi(2)).sqrt() <= r)
            .collect();
        let deg = nb.len() as f64;
        let te = t + dt;
        let phi = if law == 1 && te > 1.0 / k { k * deg } else { deg / te };
        let mut u = [0.0, 0.0];
        for &j in &nb {
            let d = [pos[j][0] - pos[i][0], pos[j][1] - pos[i][1]];
            let psi = 1.0 - delta * deg / (d[0] * d[0] + d[1] * d[1]).sqrt();
            for c in 0..2 {
                u[c] += if law == 0 {
                    psi * d[c] + (vel[j][c] - vel[i][c])
                } else {
                    (psi + phi) * d[c] - phi * (imp[j][c] - imp[i][c])
                };
            }
        }
        let u = sat(u, umax);
        let v = sat([vel[i][0] + dt * u[0], vel[i][1] + dt * u[1]], vmax);
        p1.push([pos[i][0] + dt * v[0], pos[i][1] + dt * v[1]]);
        v1.push(v);
    }
    (p1, v1)
}
