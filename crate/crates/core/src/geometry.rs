//! Structured biquadratic meshes of the square `(-1, 1)^2` split into bulk
//! bands and a horizontal fault, plus the degree-of-freedom numbering.
//!
//! A fault of half-width parameter `eps > 0` is the strip
//! `(-1, 1) x (-eps/2, eps/2)`, meshed with `n` rows of `FAULT` elements.
//! With `eps = 0` the fault collapses to the line `y = 0`; nodes on that line
//! are stored twice (one copy per side) so the horizontal displacement may
//! jump across it while the vertical displacement stays single valued.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultGeometry<T> {
    eps: T,
}

impl<T: Real> FaultGeometry<T> {
    pub fn new(eps: T) -> Result<Self> {
        if !(eps >= T::zero() && eps < T::half()) {
            return Err(Error::InvalidGeometry(format!("eps must lie in [0, 1/2), got {eps}")));
        }
        Ok(Self { eps })
    }

    /// The sharp interface `eps = 0`.
    pub fn sharp() -> Self {
        Self { eps: T::zero() }
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn is_sharp(&self) -> bool {
        self.eps == T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Bulk,
    Fault,
}

/// Which side of `y = 0` a point belongs to; needed wherever a field is two
/// valued on the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn of<T: Real>(y: T) -> Side {
        if y < T::zero() {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn sign<T: Real>(self) -> T {
        match self {
            Side::Plus => T::one(),
            Side::Minus => -T::one(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Side::Plus => "+",
            Side::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element<T> {
    /// Node ids in tensor order (see [`crate::fem::shape`]).
    pub nodes: [usize; 9],
    pub region: Region,
    pub side: Side,
    pub row: usize,
    pub col: usize,
    /// `[x0, x1, y0, y1]`.
    pub bounds: [T; 4],
}

impl<T: Real> Element<T> {
    pub fn width(&self) -> T {
        self.bounds[1] - self.bounds[0]
    }

    pub fn height(&self) -> T {
        self.bounds[3] - self.bounds[2]
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    /// Physical point of reference coordinates `(xi, eta)`.
    pub fn map(&self, xi: T, eta: T) -> [T; 2] {
        let h = T::half();
        [(self.bounds[0] + self.bounds[1]) * h + self.width() * h * xi, (self.bounds[2] + self.bounds[3]) * h + self.height() * h * eta]
    }

    /// Side hint for a point of this element: fault elements may straddle
    /// `y = 0`, bulk elements lie entirely on one side.
    pub fn side_at(&self, y: T) -> Side {
        match self.region {
            Region::Fault => Side::of(y),
            Region::Bulk => self.side,
        }
    }
}

/// Node-row slots of the duplicated interface line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfaceSlots {
    pub minus: usize,
    pub plus: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh<T> {
    n: usize,
    geom: FaultGeometry<T>,
    /// x coordinates of node columns, `2n + 1` entries.
    xs: Vec<T>,
    /// y coordinate of every node-row slot (interface rows appear twice).
    slot_ys: Vec<T>,
    /// Element-row edges, bottom to top.
    row_edges: Vec<T>,
    row_regions: Vec<Region>,
    nodes: Vec<[T; 2]>,
    elements: Vec<Element<T>>,
    interface: Option<InterfaceSlots>,
    bulk_rows_per_band: usize,
}

/// Builds the structured mesh for refinement index `n`: node spacing
/// `h = 1/n`, so `n` Q2 elements of width `2/n` across the domain. `n` must
/// be even so that `y = 0` is an element edge.
pub fn build_mesh<T: Real>(n: usize, geom: FaultGeometry<T>) -> Result<StructuredMesh<T>> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::MeshTooCoarse { n, reason: "n must be even and at least 2".into() });
    }
    // elements per half-width
    let k = n / 2;
    let kf = T::from_usize_lossy(k);
    let ncols = n;
    let xs: Vec<T> = (0..=2 * ncols)
        .map(|i| T::from_usize_lossy(i) / (T::two() * kf) - T::one())
        .map(|x| if x.abs() < T::epsilon() { T::zero() } else { x })
        .collect();

    let mut row_edges = Vec::new();
    let mut row_regions = Vec::new();
    let bulk_rows;
    if geom.is_sharp() {
        bulk_rows = k;
        for i in 0..=2 * k {
            row_edges.push((T::from_usize_lossy(i) - kf) / kf);
        }
        row_regions.resize(2 * k, Region::Bulk);
    } else {
        let eps = geom.eps();
        let band = T::one() - eps * T::half();
        let m = (kf * band).round().to_usize().unwrap_or(0);
        if m == 0 {
            return Err(Error::MeshTooCoarse { n, reason: "bulk band has no element rows".into() });
        }
        bulk_rows = m;
        let mf = T::from_usize_lossy(m);
        let half = eps * T::half();
        for i in 0..m {
            row_edges.push(-T::one() + band * T::from_usize_lossy(i) / mf);
            row_regions.push(Region::Bulk);
        }
        // k fault rows: fault elements are eps times as tall as they are wide
        for i in 0..k {
            row_edges.push(-half + eps * T::from_usize_lossy(i) / kf);
            row_regions.push(Region::Fault);
        }
        for i in 0..m {
            row_edges.push(half + band * T::from_usize_lossy(i) / mf);
            row_regions.push(Region::Bulk);
        }
        row_edges.push(T::one());
    }
    let nrows = row_regions.len();

    // Geometric node rows: 2 * nrows + 1. Sharp meshes split the interface
    // row into a minus slot followed by a plus slot.
    let interface_row = geom.is_sharp().then_some(2 * k);
    let mut slot_ys = Vec::with_capacity(2 * nrows + 2);
    for g in 0..=2 * nrows {
        let r = g / 2;
        let y = if g % 2 == 0 { row_edges[r] } else { (row_edges[r] + row_edges[r + 1]) * T::half() };
        slot_ys.push(y);
        if Some(g) == interface_row {
            slot_ys.push(y);
        }
    }
    let slot_of = |g: usize, above: bool| -> usize {
        match interface_row {
            Some(gi) if g > gi => g + 1,
            Some(gi) if g == gi && above => g + 1,
            _ => g,
        }
    };

    let nx = xs.len();
    let mut nodes = Vec::with_capacity(slot_ys.len() * nx);
    for &y in &slot_ys {
        for &x in &xs {
            nodes.push([x, y]);
        }
    }

    let mut elements = Vec::with_capacity(nrows * ncols);
    for r in 0..nrows {
        let y0 = row_edges[r];
        let y1 = row_edges[r + 1];
        let above = match interface_row {
            Some(_) => r >= k,
            None => (y0 + y1) * T::half() >= T::zero(),
        };
        let side = if above { Side::Plus } else { Side::Minus };
        for c in 0..ncols {
            let mut ids = [0usize; 9];
            for j in 0..3 {
                let slot = slot_of(2 * r + j, above);
                for i in 0..3 {
                    ids[3 * j + i] = slot * nx + 2 * c + i;
                }
            }
            elements.push(Element { nodes: ids, region: row_regions[r], side, row: r, col: c, bounds: [xs[2 * c], xs[2 * c + 2], y0, y1] });
        }
    }

    let interface = interface_row.map(|g| InterfaceSlots { minus: g, plus: g + 1 });
    Ok(StructuredMesh { n, geom, xs, slot_ys, row_edges, row_regions, nodes, elements, interface, bulk_rows_per_band: bulk_rows })
}

impl<T: Real> StructuredMesh<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn geometry(&self) -> FaultGeometry<T> {
        self.geom
    }

    pub fn eps(&self) -> T {
        self.geom.eps()
    }

    pub fn is_sharp(&self) -> bool {
        self.geom.is_sharp()
    }

    /// Node spacing `h = 1/n`.
    pub fn h(&self) -> T {
        T::one() / T::from_usize_lossy(self.n)
    }

    /// Element width `2h`.
    pub fn element_width(&self) -> T {
        T::two() / T::from_usize_lossy(self.n)
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element<T>] {
        &self.elements
    }

    pub fn node_columns(&self) -> &[T] {
        &self.xs
    }

    pub fn row_edges(&self) -> &[T] {
        &self.row_edges
    }

    pub fn row_regions(&self) -> &[Region] {
        &self.row_regions
    }

    pub fn bulk_rows_per_band(&self) -> usize {
        self.bulk_rows_per_band
    }

    pub fn columns(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.row_regions.len()
    }

    pub fn slots(&self) -> usize {
        self.slot_ys.len()
    }

    pub fn interface_slots(&self) -> Option<InterfaceSlots> {
        self.interface
    }

    pub fn node_id(&self, slot: usize, col: usize) -> usize {
        slot * self.xs.len() + col
    }

    /// For a minus-side interface node, the plus-side node at the same point.
    pub fn twin_of(&self, node: usize) -> Option<usize> {
        let s = self.interface?;
        let nx = self.xs.len();
        (node / nx == s.minus).then(|| node + nx)
    }

    /// Element containing `(x, y)`; on the interface line `side` chooses
    /// between the elements above and below. Returns reference coordinates too.
    pub fn locate(&self, x: T, y: T, side: Side) -> Result<(usize, T, T)> {
        let one = T::one();
        let tol = T::lit(1e-12);
        if !(x >= -one - tol && x <= one + tol && y >= -one - tol && y <= one + tol) {
            return Err(Error::OutOfDomain { x: x.to_f64_lossy(), y: y.to_f64_lossy() });
        }
        let ncols = self.columns();
        let col = ((x + one) / self.element_width()).floor().to_usize().unwrap_or(0).min(ncols - 1);
        let nrows = self.rows();
        // first edge strictly above y
        let mut row = self.row_edges.partition_point(|&e| e <= y).saturating_sub(1).min(nrows - 1);
        if row > 0 && y == self.row_edges[row] && side == Side::Minus && self.row_edges[row] == T::zero() {
            row -= 1;
        }
        let e = row * ncols + col;
        let el = &self.elements[e];
        let xi = (T::two() * x - el.bounds[0] - el.bounds[1]) / el.width();
        let eta = (T::two() * y - el.bounds[2] - el.bounds[3]) / el.height();
        Ok((e, xi, eta))
    }

    /// Writes node and element tables as CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "node,x,y")?;
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(out, "{i},{},{}", crate::report::sci(p[0]), crate::report::sci(p[1]))?;
        }
        writeln!(out, "element,n0,n1,n2,n3,n4,n5,n6,n7,n8,region")?;
        for (i, e) in self.elements.iter().enumerate() {
            let ids: Vec<String> = e.nodes.iter().map(|k| k.to_string()).collect();
            let tag = match e.region {
                Region::Bulk => "BULK",
                Region::Fault => "FAULT",
            };
            writeln!(out, "{i},{},{tag}", ids.join(","))?;
        }
        Ok(())
    }
}

/// Plus/minus horizontal-displacement dofs at one interface node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePair<T> {
    pub x: T,
    pub plus: usize,
    pub minus: usize,
}

/// Global numbering of `u1`, `u2` (per node) and interface slip `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap<T> {
    u1: Vec<usize>,
    u2: Vec<usize>,
    gamma: Vec<usize>,
    gamma_x: Vec<T>,
    constrained: Vec<bool>,
    pairs: Vec<TracePair<T>>,
    n_dofs: usize,
}

pub fn build_dof_map<T: Real>(mesh: &StructuredMesh<T>, with_gamma: bool) -> DofMap<T> {
    let nn = mesh.nodes().len();
    let nx = mesh.node_columns().len();
    let mut u1 = vec![usize::MAX; nn];
    let mut u2 = vec![usize::MAX; nn];
    let mut next = 0usize;
    for node in 0..nn {
        u1[node] = next;
        next += 1;
        let shared = mesh.interface_slots().filter(|s| node / nx == s.plus).map(|_| u2[node - nx]);
        u2[node] = match shared {
            Some(d) => d,
            None => {
                next += 1;
                next - 1
            }
        };
    }
    let mut gamma = Vec::new();
    if with_gamma {
        for _ in 0..nx {
            gamma.push(next);
            next += 1;
        }
    }
    let mut constrained = vec![false; next];
    let last = mesh.slots() - 1;
    for slot in [0, last] {
        for c in 0..nx {
            let node = mesh.node_id(slot, c);
            constrained[u1[node]] = true;
            constrained[u2[node]] = true;
        }
    }
    let pairs = match mesh.interface_slots() {
        Some(s) => {
            (0..nx).map(|c| TracePair { x: mesh.node_columns()[c], plus: u1[mesh.node_id(s.plus, c)], minus: u1[mesh.node_id(s.minus, c)] }).collect()
        }
        None => Vec::new(),
    };
    DofMap { u1, u2, gamma, gamma_x: mesh.node_columns().to_vec(), constrained, pairs, n_dofs: next }
}

impl<T: Real> DofMap<T> {
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_constrained(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }

    pub fn n_free(&self) -> usize {
        self.n_dofs - self.n_constrained()
    }

    pub fn u1(&self, node: usize) -> usize {
        self.u1[node]
    }

    pub fn u2(&self, node: usize) -> usize {
        self.u2[node]
    }

    pub fn n_gamma(&self) -> usize {
        self.gamma.len()
    }

    pub fn has_gamma(&self) -> bool {
        !self.gamma.is_empty()
    }

    /// Global dof of the `k`-th interface slip node.
    pub fn gamma(&self, k: usize) -> usize {
        self.gamma[k]
    }

    pub fn gamma_dofs(&self) -> &[usize] {
        &self.gamma
    }

    /// x coordinates of the interface slip nodes.
    pub fn gamma_nodes_x(&self) -> &[T] {
        &self.gamma_x
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    /// Element dof list: `[u1 of nodes 0..9, u2 of nodes 0..9]`.
    pub fn element_dofs(&self, el: &Element<T>) -> [usize; 18] {
        let mut d = [0usize; 18];
        for k in 0..9 {
            d[k] = self.u1[el.nodes[k]];
            d[9 + k] = self.u2[el.nodes[k]];
        }
        d
    }

    /// Slip dofs of interface segment `c` (one per element column).
    pub fn segment_gamma_dofs(&self, c: usize) -> Option<[usize; 3]> {
        self.has_gamma().then(|| [self.gamma[2 * c], self.gamma[2 * c + 1], self.gamma[2 * c + 2]])
    }

    /// Additionally constrains every displacement dof on `x = +-1`.
    pub fn constrain_side_walls(&mut self, mesh: &StructuredMesh<T>) {
        let nx = mesh.node_columns().len();
        for slot in 0..mesh.slots() {
            for c in [0, nx - 1] {
                let node = mesh.node_id(slot, c);
                self.constrained[self.u1[node]] = true;
                self.constrained[self.u2[node]] = true;
            }
        }
    }

    /// Paired plus/minus `u1` dofs on the sharp interface, ordered by x.
    pub fn interface_trace_dofs(&self) -> Result<&[TracePair<T>]> {
        if self.pairs.is_empty() {
            return Err(Error::WrongMeshKind { expected: "sharp-interface (eps = 0)" });
        }
        Ok(&self.pairs)
    }

    /// Samples of `[u1] = u1(x, 0+) - u1(x, 0-)` at the interface nodes.
    pub fn jump_samples(&self, coeffs: &[T]) -> Result<Vec<(T, T)>> {
        Ok(self.interface_trace_dofs()?.iter().map(|p| (p.x, coeffs[p.plus] - coeffs[p.minus])).collect())
    }
}
