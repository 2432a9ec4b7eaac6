use serde::Serialize;

/// How an off-grid belief is mapped onto grid points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Nearest grid point (largest-remainder rounding, which is nearest in ℓ₁).
    #[default]
    Nearest,
    /// Barycentric weights on the enclosing Freudenthal simplex.
    Barycentric,
}

/// Grid point indices with convex weights.
pub type Stencil = Vec<(usize, f64)>;

/// Beliefs whose coordinates are multiples of `1/d`, enumerated in
/// lexicographic order of their integer compositions `k` (`Σk = d`).
#[derive(Clone, Debug)]
pub struct SimplexGrid {
    dim: usize,
    resolution: usize,
    /// `binom[n][k]`
    binom: Vec<Vec<usize>>,
}

impl SimplexGrid {
    pub fn new(dim: usize, resolution: usize) -> Self {
        assert!(dim >= 1 && resolution >= 1, "grid needs dim ≥ 1 and resolution ≥ 1");
        let n = resolution + dim;
        let mut binom = vec![vec![0usize; dim + 1]; n + 1];
        for row in binom.iter_mut() {
            row[0] = 1;
        }
        for i in 1..=n {
            for k in 1..=dim {
                binom[i][k] = binom[i - 1][k - 1].saturating_add(binom[i - 1][k]);
            }
        }
        SimplexGrid { dim, resolution, binom }
    }

    /// Number of grid points `C(d + X − 1, X − 1)`.
    pub fn count_points(dim: usize, resolution: usize) -> usize {
        Self::new(dim, resolution).len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Compositions of `r` into `m` nonnegative parts.
    fn compositions(&self, r: usize, m: usize) -> usize {
        if m == 0 {
            return usize::from(r == 0);
        }
        self.binom[r + m - 1][m - 1]
    }

    pub fn len(&self) -> usize {
        self.compositions(self.resolution, self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of composition `k` in the enumeration order.
    pub fn rank(&self, k: &[usize]) -> usize {
        debug_assert_eq!(k.len(), self.dim);
        let mut rank = 0;
        let mut remaining = self.resolution;
        for (i, &ki) in k.iter().enumerate().take(self.dim - 1) {
            let parts = self.dim - i - 1;
            // Compositions sharing the prefix with a smaller value at i.
            for v in 0..ki {
                rank += self.compositions(remaining - v, parts);
            }
            remaining -= ki;
        }
        rank
    }

    /// Iterates compositions in rank order.
    pub fn points(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let mut next = Some({
            let mut k = vec![0; self.dim];
            k[self.dim - 1] = self.resolution;
            k
        });
        std::iter::from_fn(move || {
            let cur = next.take()?;
            next = successor(&cur);
            Some(cur)
        })
    }

    pub fn belief(&self, k: &[usize]) -> Vec<f64> {
        let d = self.resolution as f64;
        k.iter().map(|&v| v as f64 / d).collect()
    }

    /// Largest-remainder rounding of `d·π`.
    pub fn nearest(&self, pi: &[f64]) -> Vec<usize> {
        let d = self.resolution as f64;
        let scaled: Vec<f64> = pi.iter().map(|p| (p.max(0.0) * d).max(0.0)).collect();
        let mut k: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
        let assigned: usize = k.iter().sum();
        if assigned > self.resolution {
            // Only reachable through rounding noise above 1; trim from the largest.
            let mut excess = assigned - self.resolution;
            while excess > 0 {
                let i = (0..self.dim).max_by_key(|&i| k[i]).expect("nonempty");
                k[i] -= 1;
                excess -= 1;
            }
            return k;
        }
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| {
            let (fa, fb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
            fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        for &i in order.iter().take(self.resolution - assigned) {
            k[i] += 1;
        }
        k
    }

    /// Worst-case ℓ₁ distance from a belief to its nearest grid point:
    /// `max_m 2m(X − m)/(X d)`.
    pub fn nearest_radius(&self) -> f64 {
        let x = self.dim as f64;
        (0..=self.dim).map(|m| 2.0 * m as f64 * (x - m as f64) / (x * self.resolution as f64)).fold(0.0, f64::max)
    }

    /// ℓ₁ diameter bound of a Freudenthal cell, `2(X − 1)/d`.
    pub fn cell_diameter(&self) -> f64 {
        2.0 * (self.dim as f64 - 1.0) / self.resolution as f64
    }

    /// Freudenthal (Kuhn) triangulation weights.
    ///
    /// In cumulative coordinates `w_i = d Σ_{j ≥ i} π_j` the enclosing cell has
    /// base vertex `⌊w⌋`; further vertices add unit steps in decreasing order
    /// of the fractional parts.
    pub fn barycentric(&self, pi: &[f64]) -> Stencil {
        let x = self.dim;
        let d = self.resolution as f64;
        let mut w = vec![0.0; x];
        let mut acc = 0.0;
        for i in (0..x).rev() {
            acc += pi[i].max(0.0);
            w[i] = acc * d;
        }
        let scale = d / w[0].max(f64::MIN_POSITIVE);
        for wi in w.iter_mut() {
            *wi *= scale;
        }
        w[0] = d;
        for wi in w.iter_mut() {
            if (*wi - wi.round()).abs() < 1e-9 {
                *wi = wi.round();
            }
        }
        let base: Vec<i64> = w.iter().map(|v| v.floor() as i64).collect();
        let frac: Vec<f64> = w.iter().zip(&base).map(|(v, b)| v - *b as f64).collect();
        let mut order: Vec<usize> = (1..x).collect();
        order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));

        let to_comp = |v: &[i64]| -> Vec<usize> {
            (0..x).map(|i| (v[i] - if i + 1 < x { v[i + 1] } else { 0 }).max(0) as usize).collect()
        };
        let mut stencil: Stencil = Vec::with_capacity(x);
        let mut vertex = base.clone();
        let first = order.first().map_or(0.0, |&p| frac[p]);
        let mut push = |vertex: &[i64], w: f64| {
            if w > 0.0 {
                stencil.push((self.rank(&to_comp(vertex)), w));
            }
        };
        push(&vertex, 1.0 - first);
        for (k, &p) in order.iter().enumerate() {
            vertex[p] += 1;
            let next = order.get(k + 1).map_or(0.0, |&q| frac[q]);
            push(&vertex, frac[p] - next);
        }
        stencil
    }

    pub fn stencil(&self, pi: &[f64], mode: Interpolation) -> Stencil {
        match mode {
            Interpolation::Nearest => vec![(self.rank(&self.nearest(pi)), 1.0)],
            Interpolation::Barycentric => self.barycentric(pi),
        }
    }

    /// Worst-case ℓ₁ distance between a belief and the grid points its
    /// stencil draws from.
    pub fn projection_radius(&self, mode: Interpolation) -> f64 {
        match mode {
            Interpolation::Nearest => self.nearest_radius(),
            Interpolation::Barycentric => self.cell_diameter(),
        }
    }
}

/// Next composition in lexicographic order, or `None` after the last.
fn successor(k: &[usize]) -> Option<Vec<usize>> {
    let n = k.len();
    if n < 2 {
        return None;
    }
    // Find the rightmost i < n−1 whose suffix (i+1..) still has mass to move.
    let mut next = k.to_vec();
    let mut i = n - 1;
    while i > 0 {
        i -= 1;
        let tail: usize = next[i + 1..].iter().sum();
        if tail > 0 {
            next[i] += 1;
            let rest = tail - 1;
            for v in next[i + 1..].iter_mut() {
                *v = 0;
            }
            next[n - 1] = rest;
            return Some(next);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_ranks_agree() {
        for (dim, d) in [(1, 4), (2, 5), (3, 7), (4, 3), (8, 3)] {
            let g = SimplexGrid::new(dim, d);
            let pts: Vec<_> = g.points().collect();
            assert_eq!(pts.len(), g.len(), "dim {dim} d {d}");
            for (r, k) in pts.iter().enumerate() {
                assert_eq!(k.iter().sum::<usize>(), d);
                assert_eq!(g.rank(k), r);
            }
        }
        assert_eq!(SimplexGrid::count_points(3, 100), 5151);
        assert_eq!(SimplexGrid::count_points(8, 12), 50388);
    }

    #[test]
    fn nearest_rounds_to_grid() {
        let g = SimplexGrid::new(3, 10);
        assert_eq!(g.nearest(&[0.34, 0.33, 0.33]), vec![4, 3, 3]);
        assert_eq!(g.nearest(&[1.0, 0.0, 0.0]), vec![10, 0, 0]);
        let k = g.nearest(&[0.26, 0.26, 0.48]);
        assert_eq!(k.iter().sum::<usize>(), 10);
    }

    #[test]
    fn nearest_radius_bound_holds() {
        let g = SimplexGrid::new(3, 7);
        let mut worst: f64 = 0.0;
        for i in 0..=50 {
            for j in 0..=(50 - i) {
                let pi = [i as f64 / 50.0, j as f64 / 50.0, (50 - i - j) as f64 / 50.0];
                let b = g.belief(&g.nearest(&pi));
                worst = worst.max(pi.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum());
            }
        }
        assert!(worst <= g.nearest_radius() + 1e-12, "{worst} > {}", g.nearest_radius());
    }

    #[test]
    fn barycentric_reproduces_belief() {
        let g = SimplexGrid::new(4, 6);
        let pts: Vec<_> = g.points().collect();
        for pi in [[0.1, 0.2, 0.3, 0.4], [0.97, 0.01, 0.01, 0.01], [0.25, 0.25, 0.25, 0.25], [0.0, 0.0, 0.0, 1.0]] {
            let s = g.barycentric(&pi);
            let total: f64 = s.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mut mix = [0.0; 4];
            for (idx, w) in &s {
                let b = g.belief(&pts[*idx]);
                for i in 0..4 {
                    mix[i] += w * b[i];
                }
                let dist: f64 = b.iter().zip(&pi).map(|(p, q)| (p - q).abs()).sum();
                assert!(dist <= g.cell_diameter() + 1e-12);
            }
            for i in 0..4 {
                assert!((mix[i] - pi[i]).abs() < 1e-12, "{pi:?} -> {mix:?}");
            }
        }
    }

    #[test]
    fn grid_points_are_fixed_by_both_maps() {
        let g = SimplexGrid::new(3, 5);
        for (r, k) in g.points().enumerate() {
            let b = g.belief(&k);
            assert_eq!(g.stencil(&b, Interpolation::Nearest), vec![(r, 1.0)]);
            let s = g.stencil(&b, Interpolation::Barycentric);
            assert_eq!(s.len(), 1);
            assert_eq!(s[0].0, r);
        }
    }
}
