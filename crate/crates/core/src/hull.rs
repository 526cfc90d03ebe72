//! Convex hulls in ambient dimension up to 6, with exact-arithmetic escape
//! hatches.
//!
//! Two construction paths share one result type:
//!
//! * an incremental strict-visibility algorithm for point sets in general
//!   position (the almost-sure case for sampled configurations), where every
//!   sign query outside a floating-point guard band is decided in f64 and
//!   queries inside the band are settled by an exact rational determinant;
//! * a supporting-hyperplane enumeration with coplanar-facet merging for
//!   exactly degenerate inputs (cubes, crafted ties), reached automatically
//!   whenever the incremental path certifies a tie exactly.
//!
//! Hulls of point sets whose affine span is a proper subspace are built
//! inside that span: the chart (base point plus orthonormal basis) is kept
//! on the result, facet data live in span coordinates, and contents are
//! span contents. When the span is full-dimensional the chart is the
//! identity and all predicates act on the original coordinates, so the
//! exact fallback certifies the input itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::linalg::{
    dot, exact_det_sign, exact_rank, norm, orthogonal_complement_vector, orthonormal_basis, scale,
    sub, Mat,
};
use crate::numeric::ln_factorial;

/// One facet of a hull, in span coordinates: the points `p` of the hull
/// satisfy `dot(normal, p) <= offset`, with equality on the facet. The
/// vertex list is sorted and indexes the hull's input points.
#[derive(Debug, Clone)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct ConvexHull {
    ambient: usize,
    dim: usize,
    scale: f64,
    points: Vec<Vec<f64>>,
    base: Vec<f64>,
    /// Orthonormal rows spanning the affine hull; empty when the span is
    /// full-dimensional and the chart is the identity.
    basis: Mat,
    local: Mat,
    vertices: Vec<usize>,
    facets: Vec<Facet>,
    simplicial: bool,
    exact_arithmetic_used: bool,
    merged_facets: bool,
}

/// Raised by the incremental path when a point sits exactly on a facet
/// hyperplane; the caller reroutes to the enumeration path.
struct ExactTie;

const BAND_REL: f64 = 1e-11;
const SPAN_KEEP_REL: f64 = 1e-10;
const SPAN_ZERO_REL: f64 = 1e-13;
/// Cap on the number of candidate hyperplanes the enumeration path visits.
const ENUMERATION_BUDGET: u128 = 2_000_000;

impl ConvexHull {
    /// Hull of `points`. Panics on an empty input or mismatched coordinate
    /// lengths; degenerate inputs (coincident, collinear, coplanar) produce
    /// a hull of the correct affine dimension.
    pub fn new(points: &[Vec<f64>]) -> Self {
        assert!(!points.is_empty(), "hull of an empty point set");
        let ambient = points[0].len();
        assert!(
            points.iter().all(|p| p.len() == ambient),
            "points of mixed dimension"
        );
        assert!(
            points.iter().flatten().all(|x| x.is_finite()),
            "non-finite coordinate"
        );
        let scale_abs = points
            .iter()
            .flatten()
            .fold(1e-300f64, |m, &x| m.max(x.abs()));

        let span = AffineSpan::of(points, scale_abs);
        let dim = span.basis.len();
        let mut used_exact = span.used_exact;

        let (identity_chart, local): (bool, Mat) = if dim == ambient {
            (true, points.to_vec())
        } else {
            let project = |p: &[f64]| -> Vec<f64> {
                let diff = sub(p, &points[span.base_index]);
                span.basis.iter().map(|b| dot(b, &diff)).collect()
            };
            (false, points.iter().map(|p| project(p)).collect())
        };

        let mut hull = ConvexHull {
            ambient,
            dim,
            scale: scale_abs,
            points: points.to_vec(),
            base: points[span.base_index].clone(),
            basis: if identity_chart { vec![] } else { span.basis.clone() },
            local,
            vertices: vec![],
            facets: vec![],
            simplicial: true,
            exact_arithmetic_used: false,
            merged_facets: false,
        };

        match dim {
            0 => {
                hull.vertices = vec![0];
            }
            1 => hull.build_segment(),
            _ => {
                let seed_ids = span.pivot_indices.clone();
                match build_incremental(&hull.local, dim, scale_abs, &seed_ids) {
                    Ok((facets, exact_in_build)) => {
                        used_exact |= exact_in_build;
                        hull.facets = facets;
                    }
                    Err(ExactTie) => {
                        used_exact = true;
                        hull.merged_facets = true;
                        hull.facets = build_by_enumeration(&hull.local, dim, scale_abs);
                    }
                }
                hull.finish_from_facets();
            }
        }
        hull.exact_arithmetic_used = used_exact;
        debug_assert!(hull.certify(1e-7 * hull.scale.max(1.0)).is_ok());
        hull
    }

    fn build_segment(&mut self) {
        let coord = |i: usize| self.local[i][0];
        let mut lo = 0usize;
        let mut hi = 0usize;
        for i in 1..self.local.len() {
            if coord(i) < coord(lo) {
                lo = i;
            }
            if coord(i) > coord(hi) {
                hi = i;
            }
        }
        self.facets = vec![
            Facet {
                vertices: vec![hi],
                normal: vec![1.0],
                offset: coord(hi),
            },
            Facet {
                vertices: vec![lo],
                normal: vec![-1.0],
                offset: -coord(lo),
            },
        ];
        self.vertices = if lo < hi { vec![lo, hi] } else { vec![hi, lo] };
    }

    fn finish_from_facets(&mut self) {
        self.facets
            .sort_by(|a, b| a.vertices.cmp(&b.vertices));
        let mut verts: BTreeSet<usize> = BTreeSet::new();
        for f in &self.facets {
            verts.extend(f.vertices.iter().copied());
        }
        self.vertices = verts.into_iter().collect();
        self.simplicial = self.facets.iter().all(|f| f.vertices.len() == self.dim);
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Affine dimension of the input point set.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest absolute input coordinate (at least 1e-300); tolerances are
    /// quoted relative to this.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Sorted indices of the extreme points.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    pub fn used_exact_arithmetic(&self) -> bool {
        self.exact_arithmetic_used
    }

    /// True when the enumeration path ran and facets may be non-simplicial.
    pub fn used_face_merging(&self) -> bool {
        self.merged_facets
    }

    /// Span coordinates of input point `i`.
    pub fn local_point(&self, i: usize) -> &[f64] {
        &self.local[i]
    }

    /// Chart map into span coordinates (identity when the span is full).
    pub fn to_local(&self, p: &[f64]) -> Vec<f64> {
        if self.dim == self.ambient {
            p.to_vec()
        } else {
            let diff = sub(p, &self.base);
            self.basis.iter().map(|b| dot(b, &diff)).collect()
        }
    }

    /// Distance from `p` to the affine span (zero when the span is full).
    pub fn span_residual(&self, p: &[f64]) -> f64 {
        if self.dim == self.ambient {
            return 0.0;
        }
        let mut diff = sub(p, &self.base);
        for b in &self.basis {
            let c = dot(&diff, b);
            diff = sub(&diff, &scale(b, c));
        }
        norm(&diff)
    }

    /// Membership within absolute tolerance `tol`: distance to the affine
    /// span at most `tol` and every facet inequality violated by at most
    /// `tol`.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        assert_eq!(p.len(), self.ambient);
        if self.span_residual(p) > tol {
            return false;
        }
        let lp = self.to_local(p);
        match self.dim {
            0 => norm(&sub(p, &self.points[0])) <= tol,
            _ => self
                .facets
                .iter()
                .all(|f| dot(&f.normal, &lp) - f.offset <= tol),
        }
    }

    /// Proper faces by dimension: entry `j` lists the `j`-faces as sorted
    /// vertex-index lists, each list sorted, for `j = 0..dim`. Empty for a
    /// point hull.
    pub fn face_lattice(&self) -> Vec<Vec<Vec<usize>>> {
        match self.dim {
            0 => vec![],
            1 => vec![self.vertices.iter().map(|&v| vec![v]).collect()],
            _ => {
                let mut levels: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); self.dim];
                for facet in &self.facets {
                    levels[self.dim - 1].insert(facet.vertices.clone());
                    if facet.vertices.len() == self.dim {
                        // Simplex facet: every proper subset is a face.
                        for j in 0..self.dim - 1 {
                            for combo in subsets_of_size(&facet.vertices, j + 1) {
                                levels[j].insert(combo);
                            }
                        }
                    } else {
                        // Merged facet: recurse into the facet polytope.
                        let pts: Vec<Vec<f64>> = facet
                            .vertices
                            .iter()
                            .map(|&v| self.points[v].clone())
                            .collect();
                        let sub_hull = ConvexHull::new(&pts);
                        assert_eq!(
                            sub_hull.dim(),
                            self.dim - 1,
                            "facet polytope of unexpected dimension"
                        );
                        for (j, faces) in sub_hull.face_lattice().into_iter().enumerate() {
                            for face in faces {
                                let global: Vec<usize> =
                                    face.iter().map(|&k| facet.vertices[k]).collect();
                                // Indices are remapped through a sorted list
                                // of sorted positions, so order is preserved.
                                levels[j].insert(global);
                            }
                        }
                    }
                }
                levels
                    .into_iter()
                    .map(|s| s.into_iter().collect())
                    .collect()
            }
        }
    }

    /// `sum_j (-1)^j |F_j| - (1 - (-1)^dim)` over proper faces; zero iff the
    /// lattice satisfies the Euler relation.
    pub fn euler_defect(&self) -> i64 {
        if self.dim == 0 {
            return 0;
        }
        let lattice = self.face_lattice();
        let mut sum: i64 = 0;
        for (j, faces) in lattice.iter().enumerate() {
            let count = faces.len() as i64;
            sum += if j % 2 == 0 { count } else { -count };
        }
        let expected = 1 - if self.dim % 2 == 0 { 1 } else { -1 };
        sum - expected
    }

    /// Ids of the facets whose vertex set contains `face` (sorted indices).
    pub fn facet_ids_containing(&self, face: &[usize]) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| is_sorted_subset(face, &f.vertices))
            .map(|(id, _)| id)
            .collect()
    }

    /// Content of the hull within its affine span (length for dim 1, area
    /// for dim 2, ...). By the counting-measure convention a point has
    /// span content 1.
    pub fn span_content(&self) -> f64 {
        match self.dim {
            0 => 1.0,
            1 => {
                let a = self.local[self.vertices[0]][0];
                let b = self.local[self.vertices[1]][0];
                (b - a).abs()
            }
            n => {
                // Pyramid fan from the vertex centroid, an interior point.
                let mut centroid = vec![0.0; n];
                for &v in &self.vertices {
                    for (c, x) in centroid.iter_mut().zip(&self.local[v]) {
                        *c += x;
                    }
                }
                let inv = 1.0 / self.vertices.len() as f64;
                for c in centroid.iter_mut() {
                    *c *= inv;
                }
                let mut total = 0.0;
                for facet in &self.facets {
                    let height = facet.offset - dot(&facet.normal, &centroid);
                    debug_assert!(height >= -1e-9 * self.scale.max(1.0));
                    let pts: Vec<Vec<f64>> = facet
                        .vertices
                        .iter()
                        .map(|&v| self.local[v].clone())
                        .collect();
                    let base = if facet.vertices.len() == n {
                        simplex_content(&pts)
                    } else {
                        polytope_content(&pts)
                    };
                    total += base * height.max(0.0) / n as f64;
                }
                total
            }
        }
    }

    /// Lebesgue content in the ambient space: zero whenever the affine span
    /// is a proper subspace.
    pub fn volume(&self) -> f64 {
        if self.dim < self.ambient {
            0.0
        } else {
            self.span_content()
        }
    }

    /// Checks the defining certificate: every input point lies on the inner
    /// side of every facet within `tol`, every facet's vertices lie on its
    /// hyperplane within `tol`, and facet normals are unit vectors.
    pub fn certify(&self, tol: f64) -> Result<(), String> {
        if self.dim == 0 {
            return Ok(());
        }
        for (fid, f) in self.facets.iter().enumerate() {
            let nn = norm(&f.normal);
            if (nn - 1.0).abs() > 1e-9 {
                return Err(format!("facet {fid}: normal length {nn} is not 1"));
            }
            for (i, lp) in self.local.iter().enumerate() {
                let s = dot(&f.normal, lp) - f.offset;
                if s > tol {
                    return Err(format!(
                        "point {i} violates facet {fid} by {s:.3e} (tol {tol:.3e})"
                    ));
                }
            }
            for &v in &f.vertices {
                let s = dot(&f.normal, &self.local[v]) - f.offset;
                if s.abs() > tol {
                    return Err(format!(
                        "vertex {v} off facet {fid} hyperplane by {s:.3e}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// OFF-format text. For 3-dimensional hulls the header is `OFF` and
    /// facet polygons are cyclically ordered; other dimensions use the
    /// `nOFF` header and list facet vertex sets in index order.
    pub fn to_off(&self) -> String {
        let mut out = String::new();
        if self.ambient == 3 {
            out.push_str("OFF\n");
        } else {
            let _ = writeln!(out, "nOFF\n{}", self.ambient);
        }
        let edge_count = if self.dim >= 2 {
            let lattice = self.face_lattice();
            lattice.get(1).map_or(0, |edges| edges.len())
        } else {
            0
        };
        let _ = writeln!(
            out,
            "{} {} {}",
            self.vertices.len(),
            self.facets.len(),
            edge_count
        );
        let position: BTreeMap<usize, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(pos, &v)| (v, pos))
            .collect();
        for &v in &self.vertices {
            let coords: Vec<String> = self.points[v].iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(out, "{}", coords.join(" "));
        }
        for facet in &self.facets {
            let ordered = if self.ambient == 3 && self.dim == 3 {
                self.order_polygon(facet)
            } else {
                facet.vertices.clone()
            };
            let mut line = format!("{}", ordered.len());
            for v in ordered {
                let _ = write!(line, " {}", position[&v]);
            }
            let _ = writeln!(out, "{line}");
        }
        out
    }

    /// Cyclic order of a facet's vertices around the facet centroid, for
    /// polygon output. Only called for 3-dimensional hulls.
    fn order_polygon(&self, facet: &Facet) -> Vec<usize> {
        let pts: Vec<&[f64]> = facet
            .vertices
            .iter()
            .map(|&v| self.local[v].as_slice())
            .collect();
        let k = pts.len();
        let mut centroid = vec![0.0; self.dim];
        for p in &pts {
            for (c, x) in centroid.iter_mut().zip(*p) {
                *c += x / k as f64;
            }
        }
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| sub(p, &centroid)).collect();
        let plane = orthonormal_basis(&rows);
        debug_assert_eq!(plane.len(), 2);
        let mut keyed: Vec<(f64, usize)> = facet
            .vertices
            .iter()
            .zip(&rows)
            .map(|(&v, r)| (dot(r, &plane[1]).atan2(dot(r, &plane[0])), v))
            .collect();
        keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        keyed.into_iter().map(|(_, v)| v).collect()
    }
}

/// Affine span of a point set: an orthonormal basis of the difference
/// space plus the indices of points that produced the pivots. Residuals
/// inside the guard band trigger an exact rank computation.
struct AffineSpan {
    base_index: usize,
    basis: Mat,
    pivot_indices: Vec<usize>,
    used_exact: bool,
}

impl AffineSpan {
    fn of(points: &[Vec<f64>], scale_abs: f64) -> Self {
        let ambient = points[0].len();
        let keep = SPAN_KEEP_REL * scale_abs;
        let zero = SPAN_ZERO_REL * scale_abs;
        let mut basis: Mat = vec![];
        let mut pivots = vec![0usize];
        let mut ambiguous = false;
        for idx in 1..points.len() {
            if basis.len() == ambient {
                break;
            }
            let mut v = sub(&points[idx], &points[0]);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&v, b);
                    v = sub(&v, &scale(b, c));
                }
            }
            let r = norm(&v);
            if r > keep {
                basis.push(scale(&v, 1.0 / r));
                pivots.push(idx);
            } else if r > zero {
                ambiguous = true;
            }
        }
        let mut used_exact = false;
        if ambiguous && basis.len() < ambient {
            used_exact = true;
            let diffs: Mat = (1..points.len())
                .map(|i| sub(&points[i], &points[0]))
                .collect();
            let true_rank = exact_rank(&diffs);
            if true_rank != basis.len() {
                // Rebuild the pivot set with exact acceptance tests.
                basis.clear();
                pivots = vec![0usize];
                let mut chosen: Mat = vec![];
                for idx in 1..points.len() {
                    if chosen.len() == true_rank {
                        break;
                    }
                    let mut trial = chosen.clone();
                    trial.push(sub(&points[idx], &points[0]));
                    if exact_rank(&trial) == chosen.len() + 1 {
                        chosen = trial;
                        pivots.push(idx);
                    }
                }
                basis = orthonormal_basis(&chosen);
                assert_eq!(
                    basis.len(),
                    true_rank,
                    "exactly independent directions too ill-conditioned to orthonormalize"
                );
            }
        }
        AffineSpan {
            base_index: 0,
            basis,
            pivot_indices: pivots,
            used_exact,
        }
    }
}

/// Facet under construction: `sign_ref` caches the exact orientation of the
/// interior reference point, computed only when a query lands in the band.
struct BFacet {
    verts: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
    sign_ref: Option<i32>,
    alive: bool,
}

enum Side {
    Above,
    NotAbove,
}

struct Incremental<'a> {
    pts: &'a Mat,
    n: usize,
    band: f64,
    /// Probe displacement for det-sign calibration: macroscopic relative to
    /// both the band and the rounding error of the probe coordinates.
    step: f64,
    ref_pt: Vec<f64>,
    facets: Vec<BFacet>,
    exact_used: bool,
}

impl<'a> Incremental<'a> {
    fn make_facet(&mut self, verts: Vec<usize>) -> Result<BFacet, ExactTie> {
        let p0 = &self.pts[verts[0]];
        let rows: Mat = verts[1..].iter().map(|&v| sub(&self.pts[v], p0)).collect();
        let Some(mut normal) = orthogonal_complement_vector(&rows, self.n) else {
            // The apex is affinely dependent with the ridge: an exact tie.
            return Err(ExactTie);
        };
        let mut offset = dot(&normal, p0);
        let s_ref = dot(&normal, &self.ref_pt) - offset;
        let mut sign_ref = None;
        if s_ref.abs() <= self.band {
            // The reference point is too close to the plane for floats to
            // orient the facet. The det sign's side convention depends on
            // the vertex ordering, so calibrate it against a probe pushed
            // along +normal far enough that its side is beyond doubt, then
            // place the reference point exactly.
            self.exact_used = true;
            let sr = self.exact_side_sign(&verts, &self.ref_pt);
            if sr == 0 {
                return Err(ExactTie);
            }
            let p0 = &self.pts[verts[0]];
            let probe: Vec<f64> = p0
                .iter()
                .zip(&normal)
                .map(|(x, n)| x + self.step * n)
                .collect();
            let s_plus = self.exact_side_sign(&verts, &probe);
            debug_assert_ne!(s_plus, 0);
            if sr == s_plus {
                // Reference point sits on the +normal side: flip outward.
                normal = scale(&normal, -1.0);
                offset = -offset;
            }
            sign_ref = Some(sr);
        } else if s_ref > 0.0 {
            normal = scale(&normal, -1.0);
            offset = -offset;
        }
        Ok(BFacet {
            verts,
            normal,
            offset,
            sign_ref,
            alive: true,
        })
    }

    /// Exact sign of the hyperplane form through the facet vertices at `x`:
    /// the determinant with rows `v_i - x`. Zero iff `x` lies on the plane;
    /// points on a common side share the sign.
    fn exact_side_sign(&self, verts: &[usize], x: &[f64]) -> i32 {
        let rows: Mat = verts.iter().map(|&v| sub(&self.pts[v], x)).collect();
        exact_det_sign(&rows)
    }

    fn classify(&mut self, fid: usize, p_idx: usize) -> Result<Side, ExactTie> {
        let p = &self.pts[p_idx];
        let s = dot(&self.facets[fid].normal, p) - self.facets[fid].offset;
        if s > self.band {
            return Ok(Side::Above);
        }
        if s < -self.band {
            return Ok(Side::NotAbove);
        }
        self.exact_used = true;
        let verts = self.facets[fid].verts.clone();
        let sign_p = self.exact_side_sign(&verts, p);
        if sign_p == 0 {
            return Err(ExactTie);
        }
        let sign_ref = match self.facets[fid].sign_ref {
            Some(sr) => sr,
            None => {
                let sr = self.exact_side_sign(&verts, &self.ref_pt);
                if sr == 0 {
                    return Err(ExactTie);
                }
                self.facets[fid].sign_ref = Some(sr);
                sr
            }
        };
        Ok(if sign_p == sign_ref {
            Side::NotAbove
        } else {
            Side::Above
        })
    }
}

fn build_incremental(
    pts: &Mat,
    n: usize,
    scale_abs: f64,
    seed_ids: &[usize],
) -> Result<(Vec<Facet>, bool), ExactTie> {
    debug_assert_eq!(seed_ids.len(), n + 1);
    let band = BAND_REL * scale_abs.max(1.0);
    let mut ref_pt = vec![0.0; n];
    for &i in seed_ids {
        for (c, x) in ref_pt.iter_mut().zip(&pts[i]) {
            *c += x / (n + 1) as f64;
        }
    }
    let mut inc = Incremental {
        pts,
        n,
        band,
        step: scale_abs.max(1.0),
        ref_pt,
        facets: vec![],
        exact_used: false,
    };
    for omit in 0..=n {
        let mut verts: Vec<usize> = seed_ids
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != omit)
            .map(|(_, &v)| v)
            .collect();
        verts.sort_unstable();
        let f = inc.make_facet(verts)?;
        inc.facets.push(f);
    }
    let in_seed: BTreeSet<usize> = seed_ids.iter().copied().collect();
    for p_idx in 0..pts.len() {
        if in_seed.contains(&p_idx) {
            continue;
        }
        let mut visible = vec![];
        for fid in 0..inc.facets.len() {
            if !inc.facets[fid].alive {
                continue;
            }
            if let Side::Above = inc.classify(fid, p_idx)? {
                visible.push(fid);
            }
        }
        if visible.is_empty() {
            continue;
        }
        // Horizon ridges appear in exactly one visible facet.
        let mut ridge_count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for &fid in &visible {
            let verts = &inc.facets[fid].verts;
            for drop in 0..verts.len() {
                let mut ridge = verts.clone();
                ridge.remove(drop);
                *ridge_count.entry(ridge).or_insert(0) += 1;
            }
        }
        for &fid in &visible {
            inc.facets[fid].alive = false;
        }
        for (ridge, count) in ridge_count {
            if count != 1 {
                continue;
            }
            let mut verts = ridge;
            let pos = verts.partition_point(|&v| v < p_idx);
            verts.insert(pos, p_idx);
            let f = inc.make_facet(verts)?;
            inc.facets.push(f);
        }
    }
    let facets = inc
        .facets
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| Facet {
            vertices: f.verts,
            normal: f.normal,
            offset: f.offset,
        })
        .collect();
    Ok((facets, inc.exact_used))
}

/// Exact-input path: every affinely independent point subset of size `n`
/// proposes a hyperplane; supporting hyperplanes become facets, with all
/// on-plane points merged into one facet. Quadratic-ish and budgeted, for
/// the small exactly-degenerate inputs the incremental path rejects.
fn build_by_enumeration(pts: &Mat, n: usize, scale_abs: f64) -> Vec<Facet> {
    let count = pts.len();
    let budget = binomial_u128(count, n);
    assert!(
        budget <= ENUMERATION_BUDGET,
        "degenerate input with {count} points in dimension {n} needs {budget} candidate \
         hyperplanes, beyond the exact enumeration budget of {ENUMERATION_BUDGET}"
    );
    let band = BAND_REL * scale_abs.max(1.0);
    let mut facets: Vec<Facet> = vec![];
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let p0 = &pts[subset[0]];
        let rows: Mat = subset[1..].iter().map(|&v| sub(&pts[v], p0)).collect();
        if let Some(normal) = orthogonal_complement_vector(&rows, n) {
            let offset = dot(&normal, p0);
            let mut s_min = f64::INFINITY;
            let mut s_max = f64::NEG_INFINITY;
            for p in pts {
                let s = dot(&normal, p) - offset;
                s_min = s_min.min(s);
                s_max = s_max.max(s);
            }
            let supporting_below = s_max <= band && s_min < -band;
            let supporting_above = s_min >= -band && s_max > band;
            if supporting_below || supporting_above {
                let (normal, offset) = if supporting_above {
                    (scale(&normal, -1.0), -offset)
                } else {
                    (normal, offset)
                };
                let on_plane: Vec<usize> = (0..count)
                    .filter(|&i| (dot(&normal, &pts[i]) - offset).abs() <= band)
                    .collect();
                if seen.insert(on_plane.clone()) {
                    facets.push(Facet {
                        vertices: on_plane,
                        normal,
                        offset,
                    });
                }
            }
        }
        if !next_subset(&mut subset, count) {
            break;
        }
    }
    // Keep only extreme points in facet vertex lists: a point is extreme
    // iff the normals of its incident facets span the whole space.
    let mut extreme = vec![false; count];
    for i in 0..count {
        let incident: Mat = facets
            .iter()
            .filter(|f| f.vertices.binary_search(&i).is_ok())
            .map(|f| f.normal.clone())
            .collect();
        if incident.len() >= n && orthonormal_basis(&incident).len() == n {
            extreme[i] = true;
        }
    }
    for f in facets.iter_mut() {
        f.vertices.retain(|&v| extreme[v]);
    }
    facets
}

/// Lexicographic successor of a sorted `k`-subset of `0..count`.
fn next_subset(subset: &mut [usize], count: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < count - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All sorted subsets of the given sorted slice with `size` elements.
fn subsets_of_size(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    if size == 0 || size > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        if !next_subset(&mut idx, items.len()) {
            break;
        }
    }
    out
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Content of the simplex spanned by `k + 1` points via the Gram
/// determinant of the edge matrix: `sqrt(det(D D^T)) / k!`.
pub fn simplex_content(points: &[Vec<f64>]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let rows: Mat = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    let gram: Mat = rows
        .iter()
        .map(|a| rows.iter().map(|b| dot(a, b)).collect())
        .collect();
    let det = crate::linalg::lu_determinant(gram).max(0.0);
    det.sqrt() * (-ln_factorial(k as u64)).exp()
}

/// Content of `conv(points)` within its own affine span, any dimension.
pub fn polytope_content(points: &[Vec<f64>]) -> f64 {
    if points.len() >= 2 {
        // Affinely independent points form a simplex: skip the hull.
        let rows: Mat = points[1..].iter().map(|p| sub(p, &points[0])).collect();
        if orthonormal_basis(&rows).len() == points.len() - 1 {
            return simplex_content(points);
        }
    }
    ConvexHull::new(points).span_content()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::RandomStream;

    fn unit_simplex(d: usize) -> Vec<Vec<f64>> {
        let mut pts = vec![vec![0.0; d]];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            pts.push(e);
        }
        pts
    }

    fn cube_vertices(d: usize) -> Vec<Vec<f64>> {
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { 0.5 } else { -0.5 })
                    .collect()
            })
            .collect()
    }

    fn binomial(n: usize, k: usize) -> usize {
        binomial_u128(n, k) as usize
    }

    #[test]
    fn simplex_combinatorics_and_volume() {
        for d in 2..=5 {
            let hull = ConvexHull::new(&unit_simplex(d));
            assert_eq!(hull.dim(), d);
            assert!(hull.is_simplicial());
            assert_eq!(hull.vertices().len(), d + 1);
            assert_eq!(hull.facets().len(), d + 1);
            let lattice = hull.face_lattice();
            for (j, faces) in lattice.iter().enumerate() {
                assert_eq!(
                    faces.len(),
                    binomial(d + 1, j + 1),
                    "j-face count, d={d} j={j}"
                );
            }
            assert_eq!(hull.euler_defect(), 0, "d={d}");
            let expect = (-ln_factorial(d as u64)).exp();
            assert!((hull.volume() - expect).abs() < 1e-12 * expect.max(1.0));
            assert!(hull.certify(1e-9).is_ok());
        }
    }

    #[test]
    fn square_with_center_point_drops_the_center() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.31, 0.47],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let hull = ConvexHull::new(&pts);
        assert_eq!(hull.dim(), 2);
        assert_eq!(hull.vertices(), &[0, 1, 3, 4]);
        assert_eq!(hull.facets().len(), 4);
        assert!((hull.volume() - 1.0).abs() < 1e-12);
        assert!(hull.contains(&[0.5, 0.5], 1e-9));
        assert!(hull.contains(&[0.0, 0.5], 1e-9));
        assert!(!hull.contains(&[1.2, 0.5], 1e-9));
        // The axis-aligned square has exact ties for the incremental path's
        // start simplex facets, so either path must get the geometry right;
        // the certificate is the arbiter.
        assert!(hull.certify(1e-12).is_ok());
    }

    #[test]
    fn cube_merges_coplanar_facets_in_three_dimensions() {
        let hull = ConvexHull::new(&cube_vertices(3));
        assert_eq!(hull.dim(), 3);
        assert!(hull.used_face_merging());
        assert!(!hull.is_simplicial());
        assert_eq!(hull.vertices().len(), 8);
        assert_eq!(hull.facets().len(), 6);
        for f in hull.facets() {
            assert_eq!(f.vertices.len(), 4);
        }
        let lattice = hull.face_lattice();
        assert_eq!(lattice[0].len(), 8);
        assert_eq!(lattice[1].len(), 12);
        assert_eq!(lattice[2].len(), 6);
        assert_eq!(hull.euler_defect(), 0);
        assert!((hull.volume() - 1.0).abs() < 1e-12);
        assert!(hull.certify(1e-12).is_ok());
    }

    #[test]
    fn cube_face_lattice_in_four_dimensions() {
        let hull = ConvexHull::new(&cube_vertices(4));
        assert_eq!(hull.dim(), 4);
        assert_eq!(hull.vertices().len(), 16);
        assert_eq!(hull.facets().len(), 8);
        let lattice = hull.face_lattice();
        assert_eq!(lattice[0].len(), 16);
        assert_eq!(lattice[1].len(), 32);
        assert_eq!(lattice[2].len(), 24);
        assert_eq!(lattice[3].len(), 8);
        assert_eq!(hull.euler_defect(), 0);
        assert!((hull.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_ball_points_satisfy_the_certificate() {
        let stream = RandomStream::substream(20240817, 77);
        let mut s = stream.clone();
        let mut pts = vec![];
        while pts.len() < 100 {
            let p: Vec<f64> = (0..3).map(|_| s.uniform_in(-1.0, 1.0)).collect();
            if dot(&p, &p) <= 1.0 {
                pts.push(p);
            }
        }
        let hull = ConvexHull::new(&pts);
        assert_eq!(hull.dim(), 3);
        assert!(hull.is_simplicial());
        assert!(!hull.used_face_merging());
        assert!(hull.certify(1e-9).is_ok());
        assert_eq!(hull.euler_defect(), 0);
        let ball = crate::numeric::unit_ball_volume(3);
        assert!(hull.volume() < ball);
        assert!(hull.volume() > 0.5 * ball, "vol = {}", hull.volume());
        // Every vertex is on the hull boundary; every non-vertex is interior.
        for (i, p) in pts.iter().enumerate() {
            assert!(hull.contains(p, 1e-9), "input point {i} must be inside");
        }
        // Monte Carlo volume cross-check with a fixed stream.
        let mut probe = stream.sibling(1);
        let n = 40_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let q: Vec<f64> = (0..3).map(|_| probe.uniform_in(-1.0, 1.0)).collect();
            if hull.contains(&q, 1e-12) {
                hits += 1;
            }
        }
        let est = 8.0 * hits as f64 / n as f64;
        let se = 8.0 * (est / 8.0 * (1.0 - est / 8.0) / n as f64).sqrt();
        assert!(
            (est - hull.volume()).abs() < 4.0 * se,
            "mc {est} vs exact {} (se {se})",
            hull.volume()
        );
    }

    #[test]
    fn coplanar_points_build_a_lower_dimensional_hull() {
        // Unit square plus midpoint, embedded in a tilted plane in R^3.
        let e1 = [0.6, 0.8, 0.0];
        let e2 = [-0.48, 0.36, 0.8];
        let base = [1.0, -2.0, 0.5];
        let lift = |u: f64, v: f64| -> Vec<f64> {
            (0..3)
                .map(|i| base[i] + u * e1[i] + v * e2[i])
                .collect()
        };
        let pts = vec![
            lift(0.0, 0.0),
            lift(1.0, 0.0),
            lift(1.0, 1.0),
            lift(0.0, 1.0),
            lift(0.5, 0.5),
        ];
        let hull = ConvexHull::new(&pts);
        assert_eq!(hull.ambient_dim(), 3);
        assert_eq!(hull.dim(), 2);
        assert_eq!(hull.vertices().len(), 4);
        assert_eq!(hull.volume(), 0.0);
        assert!((hull.span_content() - 1.0).abs() < 1e-10);
        assert!(hull.contains(&lift(0.5, 0.25), 1e-9));
        assert!(!hull.contains(&[1.0, -2.0, 3.0], 1e-9));
        let lattice = hull.face_lattice();
        assert_eq!(lattice[0].len(), 4);
        assert_eq!(lattice[1].len(), 4);
        assert_eq!(hull.euler_defect(), 0);
    }

    #[test]
    fn collinear_and_coincident_inputs() {
        let seg = ConvexHull::new(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![2.0, 2.0, 2.0],
            vec![0.5, 0.5, 0.5],
        ]);
        assert_eq!(seg.dim(), 1);
        assert_eq!(seg.vertices(), &[0, 2]);
        let length = 2.0 * 3.0f64.sqrt();
        assert!((seg.span_content() - length).abs() < 1e-12);
        assert_eq!(seg.volume(), 0.0);
        assert!(seg.contains(&[1.5, 1.5, 1.5], 1e-9));
        assert!(!seg.contains(&[1.5, 1.5, 1.6], 1e-9));

        let pt = ConvexHull::new(&[vec![3.0, 4.0], vec![3.0, 4.0]]);
        assert_eq!(pt.dim(), 0);
        assert_eq!(pt.vertices(), &[0]);
        assert_eq!(pt.span_content(), 1.0);
        assert!(pt.contains(&[3.0, 4.0], 1e-9));
        assert!(!pt.contains(&[3.0, 4.1], 1e-9));
    }

    #[test]
    fn off_export_matches_hull_combinatorics() {
        let hull = ConvexHull::new(&cube_vertices(3));
        let off = hull.to_off();
        let mut lines = off.lines();
        assert_eq!(lines.next(), Some("OFF"));
        let counts: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(counts, vec![8, 6, 12]);
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), 8 + 6);
        // Polygon lines: 4 vertices each, cyclically ordered means every
        // consecutive pair shares an edge of length 1 on the unit cube.
        for poly in &body[8..] {
            let ids: Vec<usize> = poly
                .split_whitespace()
                .skip(1)
                .map(|t| t.parse().unwrap())
                .collect();
            assert_eq!(ids.len(), 4);
            for k in 0..4 {
                let a = &hull.points()[hull.vertices()[ids[k]]];
                let b = &hull.points()[hull.vertices()[ids[(k + 1) % 4]]];
                let d = norm(&sub(a, b));
                assert!((d - 1.0).abs() < 1e-12, "consecutive OFF polygon gap {d}");
            }
        }

        let hull4 = ConvexHull::new(&unit_simplex(4));
        let off4 = hull4.to_off();
        assert!(off4.starts_with("nOFF\n4\n"));
    }

    #[test]
    fn simplex_content_matches_determinant() {
        // Right simplex in R^3 scaled by 2: volume 8/6.
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        assert!((simplex_content(&pts) - 8.0 / 6.0).abs() < 1e-12);
        // A triangle in R^3 (lower-dimensional simplex): area sqrt(3)/2 * 4.
        let tri = vec![
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        assert!((simplex_content(&tri) - 2.0 * 3.0f64.sqrt()).abs() < 1e-12);
        assert!((polytope_content(&tri) - 2.0 * 3.0f64.sqrt()).abs() < 1e-12);
        // Non-simplex content: unit square passed as four points.
        let sq = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        assert!((polytope_content(&sq) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn near_tie_is_resolved_exactly_without_merging() {
        // Four points of a square plus one pushed off the top edge by one
        // ulp-scale amount: the exact sign decides it is outside, so it
        // must appear as a vertex.
        let eps = 1e-13;
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 1.0 + eps],
        ];
        let hull = ConvexHull::new(&pts);
        assert!(hull.used_exact_arithmetic());
        assert_eq!(hull.vertices(), &[0, 1, 2, 3, 4]);
        assert!(hull.certify(1e-9).is_ok());

        // The mirror case: pushed inside by the same amount, not a vertex.
        let pts_in = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 1.0 - eps],
        ];
        let hull_in = ConvexHull::new(&pts_in);
        assert_eq!(hull_in.vertices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn higher_dimensional_random_hulls_keep_invariants() {
        for d in 4..=6 {
            let mut s = RandomStream::substream(991, d as u64);
            let pts: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..d).map(|_| s.uniform_in(-1.0, 1.0)).collect())
                .collect();
            let hull = ConvexHull::new(&pts);
            assert_eq!(hull.dim(), d);
            assert!(hull.is_simplicial());
            assert!(hull.certify(1e-9).is_ok());
            assert_eq!(hull.euler_defect(), 0, "d={d}");
            assert!(hull.volume() > 0.0);
            assert!(hull.volume() < 2.0f64.powi(d as i32));
        }
    }
}
