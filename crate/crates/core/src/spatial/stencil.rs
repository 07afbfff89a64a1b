//! Three-point finite-difference weights on possibly nonuniform spacing.

/// Central first derivative at a node with left/right spacings `hm`, `hp`.
pub fn first(hm: f64, hp: f64) -> [f64; 3] {
    [-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))]
}

/// Central second derivative at a node with left/right spacings `hm`, `hp`.
pub fn second(hm: f64, hp: f64) -> [f64; 3] {
    [2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))]
}

/// Forward one-sided first derivative at `x0` from `x0, x1, x2`.
pub fn forward_first(h1: f64, h2: f64) -> [f64; 3] {
    [-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))]
}
