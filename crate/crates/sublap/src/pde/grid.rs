//! Tensor lattices bound to an implicit domain: node classification and
//! nodal fields.
//!
//! A [`Grid`] covers the domain's bounding box with `dims` nodes per axis and
//! classifies every node as interior (ρ < 0), band, or exterior. The band is
//! the ghost ring the divergence-form stencil actually reads: every outside
//! node reachable from an interior node through the stencil's read set, which
//! extends two steps in t because face fluxes carry centered t-differences at
//! both face endpoints. Band nodes store their foot point — the Newton
//! projection onto {ρ = 0} — and the Euclidean distance to it, so Dirichlet
//! data can be injected either at the foot or at the node itself.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::ImplicitDomain;
use crate::Point;

/// Stencil read set of one interior row, in (di, dj, dk) node offsets.
///
/// The in-plane fluxes read the four axis neighbours and the diagonal
/// x/t and y/t corners; the t-coupled fluxes read two t-steps out (the
/// centered t-difference of a flux one t-step away).
pub const READ_OFFSETS: [[i64; 3]; 24] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 0, 1],
    [1, 0, -1],
    [-1, 0, 1],
    [-1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [0, -1, 1],
    [0, -1, -1],
    [0, 0, 2],
    [0, 0, -2],
    [1, 0, 2],
    [1, 0, -2],
    [-1, 0, 2],
    [-1, 0, -2],
    [0, 1, 2],
    [0, 1, -2],
    [0, -1, 2],
    [0, -1, -2],
];

/// Role of a lattice node relative to the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    /// ρ < 0: carries an unknown.
    Interior,
    /// Outside node read by some interior row: carries injected data.
    Band,
    /// Never read by the solver.
    Exterior,
}

/// A band node: lattice index, foot point on {ρ = 0}, distance to it.
#[derive(Debug, Clone)]
pub struct BandNode {
    /// Linear node index.
    pub index: usize,
    /// Newton projection of the node onto the surface.
    pub foot: Point,
    /// Euclidean distance from the node to its foot.
    pub dist: f64,
}

/// A lattice over a domain's bounding box with per-node classification.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: ImplicitDomain,
    dims: [usize; 3],
    h: [f64; 3],
    origin: [f64; 3],
    roles: Vec<NodeRole>,
    interior: Vec<usize>,
    slot_of: Vec<u32>,
    band: Vec<BandNode>,
}

const NO_SLOT: u32 = u32::MAX;

impl Grid {
    /// Builds and classifies a grid with `dims` nodes per axis over
    /// `domain.bbox()`.
    ///
    /// Fails when `dims` is too small, when the interior is empty or
    /// disconnected, or when the bounding box leaves less than the stencil's
    /// two-node margin around the interior.
    pub fn build(domain: &ImplicitDomain, dims: [usize; 3]) -> Result<Self> {
        if dims.iter().any(|&d| d < 7) {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 7 nodes per axis, got {dims:?}"
            )));
        }
        let bbox = *domain.bbox();
        let ext = bbox.extent();
        let h = [
            ext[0] / (dims[0] - 1) as f64,
            ext[1] / (dims[1] - 1) as f64,
            ext[2] / (dims[2] - 1) as f64,
        ];
        let n_nodes = dims[0] * dims[1] * dims[2];
        let mut grid = Self {
            domain: domain.clone(),
            dims,
            h,
            origin: bbox.lo,
            roles: Vec::new(),
            interior: Vec::new(),
            slot_of: Vec::new(),
            band: Vec::new(),
        };

        let inside: Vec<bool> = (0..n_nodes)
            .into_par_iter()
            .map(|l| grid.domain.rho(&grid.point_of(l)) < 0.0)
            .collect();

        let mut roles = vec![NodeRole::Exterior; n_nodes];
        let mut interior = Vec::new();
        for (l, &is_in) in inside.iter().enumerate() {
            if is_in {
                roles[l] = NodeRole::Interior;
                interior.push(l);
            }
        }
        if interior.is_empty() {
            return Err(Error::Domain(
                "no lattice node falls inside the domain; refine dims".into(),
            ));
        }

        // Band = outside nodes the stencil reads; also enforce the margin.
        let (nx, ny, nt) = (dims[0] as i64, dims[1] as i64, dims[2] as i64);
        let mut band_mask = vec![false; n_nodes];
        for &l in &interior {
            let (i, j, k) = grid.unpack(l);
            for off in READ_OFFSETS {
                let (ii, jj, kk) = (i as i64 + off[0], j as i64 + off[1], k as i64 + off[2]);
                if ii < 0 || jj < 0 || kk < 0 || ii >= nx || jj >= ny || kk >= nt {
                    return Err(Error::Domain(format!(
                        "interior node ({i},{j},{k}) reads outside the lattice; \
                         the bounding box leaves no room for the ghost band"
                    )));
                }
                let m = grid.pack(ii as usize, jj as usize, kk as usize);
                if roles[m] == NodeRole::Exterior {
                    band_mask[m] = true;
                }
            }
        }

        let band_indices: Vec<usize> = band_mask
            .iter()
            .enumerate()
            .filter_map(|(l, &b)| b.then_some(l))
            .collect();
        for &l in &band_indices {
            roles[l] = NodeRole::Band;
        }
        let h_scale = h.iter().cloned().fold(f64::MIN, f64::max);
        let band: Vec<BandNode> = band_indices
            .into_par_iter()
            .map(|l| {
                let p = grid.point_of(l);
                let foot = grid
                    .domain
                    .project_to_surface(&p, 1e-12 * (1.0 + h_scale), 60)?;
                let dist = euclid_dist(&p, &foot);
                Ok(BandNode {
                    index: l,
                    foot,
                    dist,
                })
            })
            .collect::<Result<_>>()?;

        let mut slot_of = vec![NO_SLOT; n_nodes];
        for (s, &l) in interior.iter().enumerate() {
            slot_of[l] = s as u32;
        }

        grid.roles = roles;
        grid.interior = interior;
        grid.slot_of = slot_of;
        grid.band = band;
        grid.check_connected()?;
        Ok(grid)
    }

    /// Interior connectivity over the six axis neighbours.
    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.interior.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1usize;
        while let Some(s) = stack.pop() {
            let (i, j, k) = self.unpack(self.interior[s]);
            for off in &READ_OFFSETS[..6] {
                let (ii, jj, kk) = (
                    (i as i64 + off[0]) as usize,
                    (j as i64 + off[1]) as usize,
                    (k as i64 + off[2]) as usize,
                );
                let m = self.pack(ii, jj, kk);
                let slot = self.slot_of[m];
                if slot != NO_SLOT && !seen[slot as usize] {
                    seen[slot as usize] = true;
                    reached += 1;
                    stack.push(slot as usize);
                }
            }
        }
        if reached != self.interior.len() {
            return Err(Error::Domain(format!(
                "interior node set is disconnected ({} of {} nodes reachable); \
                 refine dims or shrink the domain",
                reached,
                self.interior.len()
            )));
        }
        Ok(())
    }

    /// Node counts per axis.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Node spacings per axis.
    pub fn h(&self) -> [f64; 3] {
        self.h
    }

    /// Largest spacing, the `h` of convergence statements.
    pub fn h_max(&self) -> f64 {
        self.h.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// The domain the grid classifies against.
    pub fn domain(&self) -> &ImplicitDomain {
        &self.domain
    }

    /// Total node count.
    pub fn n_nodes(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Linear index of node (i, j, k).
    #[inline]
    pub fn pack(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    /// Inverse of [`Grid::pack`].
    #[inline]
    pub fn unpack(&self, l: usize) -> (usize, usize, usize) {
        let i = l % self.dims[0];
        let r = l / self.dims[0];
        (i, r % self.dims[1], r / self.dims[1])
    }

    /// Ambient coordinates of node `l`.
    #[inline]
    pub fn point_of(&self, l: usize) -> Point {
        let (i, j, k) = self.unpack(l);
        Point::from_xyt(
            self.origin[0] + i as f64 * self.h[0],
            self.origin[1] + j as f64 * self.h[1],
            self.origin[2] + k as f64 * self.h[2],
        )
    }

    /// y-coordinate of node `l` (the X₁ flux coefficient is −y/2).
    #[inline]
    pub fn y_of(&self, l: usize) -> f64 {
        let (_, j, _) = self.unpack(l);
        self.origin[1] + j as f64 * self.h[1]
    }

    /// x-coordinate of node `l` (the X₂ flux coefficient is +x/2).
    #[inline]
    pub fn x_of(&self, l: usize) -> f64 {
        self.origin[0] + (l % self.dims[0]) as f64 * self.h[0]
    }

    /// Role of node `l`.
    pub fn role(&self, l: usize) -> NodeRole {
        self.roles[l]
    }

    /// Linear indices of interior nodes, ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Unknown slot of node `l`, if interior.
    pub fn slot(&self, l: usize) -> Option<usize> {
        let s = self.slot_of[l];
        (s != NO_SLOT).then_some(s as usize)
    }

    /// The classified ghost band.
    pub fn band(&self) -> &[BandNode] {
        &self.band
    }

    /// Largest node-to-foot distance over the band.
    pub fn band_depth(&self) -> f64 {
        self.band.iter().fold(0.0, |m, b| m.max(b.dist))
    }

    /// Nearest node to `p` (clamped to the lattice).
    pub fn nearest_node(&self, p: &Point) -> usize {
        let idx = |v: f64, o: f64, h: f64, n: usize| -> usize {
            let r = ((v - o) / h).round();
            (r.max(0.0) as usize).min(n - 1)
        };
        self.pack(
            idx(p.x[0], self.origin[0], self.h[0], self.dims[0]),
            idx(p.y[0], self.origin[1], self.h[1], self.dims[1]),
            idx(p.t, self.origin[2], self.h[2], self.dims[2]),
        )
    }
}

fn euclid_dist(a: &Point, b: &Point) -> f64 {
    ((a.x[0] - b.x[0]).powi(2) + (a.y[0] - b.y[0]).powi(2) + (a.t - b.t).powi(2)).sqrt()
}

/// Nodal values over a [`Grid`]: interior and band nodes carry data, exterior
/// entries are zero and never read.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridField {
    /// Wraps a full-length value vector.
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} nodes, field has {} values",
                grid.n_nodes(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples a scalar field at every interior and band node.
    pub fn from_field<F: ScalarField<f64> + ?Sized>(grid: Arc<Grid>, f: &F) -> Self {
        let values = (0..grid.n_nodes())
            .into_par_iter()
            .map(|l| match grid.role(l) {
                NodeRole::Exterior => 0.0,
                _ => f.value(&grid.point_of(l)),
            })
            .collect();
        Self { grid, values }
    }

    /// The underlying grid.
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Raw nodal values (full lattice length).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node `l`.
    pub fn at(&self, l: usize) -> f64 {
        self.values[l]
    }

    /// Trilinear interpolation at `p`.
    ///
    /// All eight cell corners must be interior or band nodes; otherwise the
    /// point is too close to the uncovered exterior and an error is returned.
    pub fn value_at(&self, p: &Point) -> Result<f64> {
        self.trilinear(p, false)
    }

    /// Trilinear interpolation through true unknowns only: every cell corner
    /// must be an interior node. Band corners are rejected — their stored
    /// values may represent boundary data at projected feet rather than
    /// nodal samples, which differencing would amplify to O(1) gradient
    /// error.
    pub fn value_at_core(&self, p: &Point) -> Result<f64> {
        self.trilinear(p, true)
    }

    fn trilinear(&self, p: &Point, core_only: bool) -> Result<f64> {
        let g = &self.grid;
        let c = [p.x[0], p.y[0], p.t];
        let mut i0 = [0usize; 3];
        let mut w = [0.0f64; 3];
        for a in 0..3 {
            let s = (c[a] - g.origin[a]) / g.h[a];
            if s < 0.0 || s > (g.dims[a] - 1) as f64 {
                return Err(Error::Domain(format!(
                    "point outside the lattice along axis {a}"
                )));
            }
            let f = s.floor().min((g.dims[a] - 2) as f64);
            i0[a] = f as usize;
            w[a] = s - f;
        }
        let mut acc = 0.0;
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let l = g.pack(i0[0] + dx, i0[1] + dy, i0[2] + dz);
                    let role = g.role(l);
                    let blocked = if core_only {
                        role != NodeRole::Interior
                    } else {
                        role == NodeRole::Exterior
                    };
                    if blocked {
                        return Err(Error::Domain(
                            "interpolation cell touches uncovered nodes".into(),
                        ));
                    }
                    let wt = (if dx == 1 { w[0] } else { 1.0 - w[0] })
                        * (if dy == 1 { w[1] } else { 1.0 - w[1] })
                        * (if dz == 1 { w[2] } else { 1.0 - w[2] });
                    acc += wt * self.values[l];
                }
            }
        }
        Ok(acc)
    }

    /// (min, max) over interior nodes.
    pub fn interior_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &l in self.grid.interior() {
            lo = lo.min(self.values[l]);
            hi = hi.max(self.values[l]);
        }
        (lo, hi)
    }

    /// Max over interior nodes of |self − exact|.
    pub fn max_interior_error<F: ScalarField<f64> + ?Sized>(&self, exact: &F) -> f64 {
        self.grid
            .interior()
            .par_iter()
            .map(|&l| (self.values[l] - exact.value(&self.grid.point_of(l))).abs())
            .reduce(|| 0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LinearField;
    use crate::geometry::gauge_ball;
    use crate::hgroup::gauge;
    use crate::Model;

    fn ball() -> ImplicitDomain {
        let model = Model::calibrated(1).unwrap();
        gauge_ball(&model, &Point::origin(1), 1.0).unwrap()
    }

    #[test]
    fn classification_partitions_and_margins_hold() {
        let g = Grid::build(&ball(), [25, 25, 25]).unwrap();
        let mut counts = [0usize; 3];
        for l in 0..g.n_nodes() {
            match g.role(l) {
                NodeRole::Interior => counts[0] += 1,
                NodeRole::Band => counts[1] += 1,
                NodeRole::Exterior => counts[2] += 1,
            }
        }
        assert_eq!(counts[0], g.interior().len());
        assert_eq!(counts[1], g.band().len());
        assert!(counts[0] > 1000, "ball interior too small: {}", counts[0]);
        // Interior nodes are genuinely inside; band nodes are outside but hug
        // the surface within the stencil depth.
        for &l in g.interior() {
            assert!(g.domain().rho(&g.point_of(l)) < 0.0);
        }
        let depth_bound = 2.0 * g.h()[2] + g.h()[0] + g.h()[1];
        for b in g.band() {
            let p = g.point_of(b.index);
            assert!(g.domain().rho(&p) >= 0.0);
            assert!(
                gauge(&b.foot).powi(4).mul_add(-1.0, 1.0).abs() < 1e-9,
                "foot not on the unit sphere"
            );
            assert!(b.dist <= depth_bound, "band node too deep: {}", b.dist);
        }
    }

    #[test]
    fn slots_are_a_bijection_onto_interior() {
        let g = Grid::build(&ball(), [17, 17, 17]).unwrap();
        for (s, &l) in g.interior().iter().enumerate() {
            assert_eq!(g.slot(l), Some(s));
        }
        let n_slotted = (0..g.n_nodes()).filter(|&l| g.slot(l).is_some()).count();
        assert_eq!(n_slotted, g.interior().len());
    }

    #[test]
    fn too_coarse_or_tight_grids_are_rejected()  {
        assert!(Grid::build(&ball(), [5, 5, 5]).is_err());
        // A 7-node axis leaves no 2-node ghost margin around the unit ball.
        assert!(Grid::build(&ball(), [7, 7, 7]).is_err());
    }

    #[test]
    fn trilinear_reproduces_linear_data() {
        let g = Arc::new(Grid::build(&ball(), [21, 21, 21]).unwrap());
        let u = LinearField::t_plus(1, 0.25);
        let f = GridField::from_field(g, &u);
        let p = Point::from_xyt(0.137, -0.21, 0.083);
        let got = f.value_at(&p).unwrap();
        assert!((got - u.value(&p)).abs() < 1e-12, "trilinear off: {got}");
        let (lo, hi) = f.interior_range();
        assert!(lo >= 0.25 - 0.25 - 1e-12 && hi <= 0.25 + 0.25 + 1e-12);
    }

    #[test]
    fn interpolation_outside_coverage_errors() {
        let g = Arc::new(Grid::build(&ball(), [21, 21, 21]).unwrap());
        let f = GridField::new(g, vec![0.0; 21 * 21 * 21]).unwrap();
        // Bounding-box corner is exterior.
        assert!(f.value_at(&Point::from_xyt(1.1, 1.1, 0.8)).is_err());
    }
}
