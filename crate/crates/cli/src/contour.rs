//! Marching squares over a rectangular grid.

pub type Point = (f64, f64);
pub type Segment = (Point, Point);

// corners: 0 = (ix, iy), 1 = (ix+1, iy), 2 = (ix+1, iy+1), 3 = (ix, iy+1)
// edges:   0 = bottom (0–1), 1 = right (1–2), 2 = top (2–3), 3 = left (3–0)
const EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

/// Edge pairs per case; bit `i` is set when corner `i` is below the level.
/// The saddles 5 and 10 are resolved separately.
const CASES: [&[(usize, usize)]; 16] = [
    &[],
    &[(3, 0)],
    &[(0, 1)],
    &[(3, 1)],
    &[(1, 2)],
    &[],
    &[(0, 2)],
    &[(3, 2)],
    &[(2, 3)],
    &[(0, 2)],
    &[],
    &[(1, 2)],
    &[(3, 1)],
    &[(0, 1)],
    &[(3, 0)],
    &[],
];

/// Level-set segments of `values` (row-major, `x` fastest) sampled at
/// `xs × ys`. Cells touching a non-finite value are skipped.
pub fn marching_squares(values: &[f64], xs: &[f64], ys: &[f64], level: f64) -> Vec<Segment> {
    let (nx, ny) = (xs.len(), ys.len());
    assert_eq!(values.len(), nx * ny, "grid size mismatch");
    let mut out = Vec::new();
    for iy in 0..ny.saturating_sub(1) {
        for ix in 0..nx.saturating_sub(1) {
            let at = |dx: usize, dy: usize| values[(iy + dy) * nx + ix + dx];
            let v = [at(0, 0), at(1, 0), at(1, 1), at(0, 1)];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let p = [(xs[ix], ys[iy]), (xs[ix + 1], ys[iy]), (xs[ix + 1], ys[iy + 1]), (xs[ix], ys[iy + 1])];
            let case = v.iter().enumerate().fold(0, |acc, (i, &x)| acc | (((x < level) as usize) << i));
            let crossing = |e: usize| {
                let (i, j) = EDGES[e];
                let t = (level - v[i]) / (v[j] - v[i]);
                (p[i].0 + t * (p[j].0 - p[i].0), p[i].1 + t * (p[j].1 - p[i].1))
            };
            let center_below = v.iter().sum::<f64>() / 4.0 < level;
            let pairs: &[(usize, usize)] = match (case, center_below) {
                (5, true) => &[(0, 1), (2, 3)],
                (5, false) => &[(3, 0), (1, 2)],
                (10, true) => &[(3, 0), (1, 2)],
                (10, false) => &[(0, 1), (2, 3)],
                _ => CASES[case],
            };
            out.extend(pairs.iter().map(|&(a, b)| (crossing(a), crossing(b))));
        }
    }
    out
}
