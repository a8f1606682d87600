//! Extended phase-space geometry of the relaxed Euler system: the constraint
//! set K, the wave cone Lambda, the e-functional whose sublevel set is the
//! Lambda-convex hull of K, and the constructive H_N family machinery.

use crate::eos::GammaLaw;
use crate::numerics::{dot, norm, scale3, StSymMat, SymMat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("density must be positive, got rho = {0}")]
    NonPositiveDensity(f64),
    #[error("trace identity violated: |m|^2/rho + n p(rho) - 2c = {defect:.3e}")]
    TraceDefect { defect: f64 },
    #[error("point lies outside the hull (e - c = {excess:.3e}); no decomposition exists")]
    OutsideHull { excess: f64 },
    #[error(
        "pairwise difference of base points {i} and {j} is not in the wave cone (det = {det:.3e})"
    )]
    PairNotInCone { i: usize, j: usize, det: f64 },
    #[error("weights must be positive and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("prescribed trace constant must be positive, got c = {0}")]
    NonPositiveTrace(f64),
}

// ---------------------------------------------------------------------------
// PhasePoint
// ---------------------------------------------------------------------------

/// A point `(rho, m, U)` of the extended phase space.
///
/// `U` is symmetric traceless; only the upper triangle without the last
/// diagonal entry is stored, so symmetry and tracelessness hold exactly.
/// `rho` is sign-free: differences of phase points are phase points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    n: usize,
    pub rho: f64,
    pub m: [f64; 3],
    /// n=2: `[U11, U12]`; n=3: `[U11, U12, U13, U22, U23]`.
    u: [f64; 5],
}

impl PhasePoint {
    pub fn new(n: usize, rho: f64, m: [f64; 3], u_packed: &[f64]) -> Result<Self, PhaseError> {
        if n != 2 && n != 3 {
            return Err(PhaseError::BadDimension(n));
        }
        let need = if n == 2 { 2 } else { 5 };
        assert_eq!(u_packed.len(), need, "packed U length mismatch");
        let mut u = [0.0; 5];
        u[..need].copy_from_slice(u_packed);
        Ok(PhasePoint { n, rho, m, u })
    }

    pub fn zero(n: usize) -> Self {
        PhasePoint {
            n,
            rho: 0.0,
            m: [0.0; 3],
            u: [0.0; 5],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn u_entry(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match (self.n, i, j) {
            (2, 0, 0) => self.u[0],
            (2, 0, 1) => self.u[1],
            (2, 1, 1) => -self.u[0],
            (3, 0, 0) => self.u[0],
            (3, 0, 1) => self.u[1],
            (3, 0, 2) => self.u[2],
            (3, 1, 1) => self.u[3],
            (3, 1, 2) => self.u[4],
            (3, 2, 2) => -self.u[0] - self.u[3],
            _ => panic!("U index out of range"),
        }
    }

    pub fn u_packed(&self) -> &[f64] {
        if self.n == 2 {
            &self.u[..2]
        } else {
            &self.u[..5]
        }
    }

    pub fn u_matrix(&self) -> SymMat {
        let mut m = SymMat::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                m.set(i, j, self.u_entry(i, j));
            }
        }
        m
    }

    /// Build from a symmetric matrix; the last diagonal entry is discarded so
    /// the stored U is traceless exactly. The discarded defect is returned.
    pub fn from_matrix(n: usize, rho: f64, m: [f64; 3], u: &SymMat) -> (Self, f64) {
        let mut packed = [0.0; 5];
        match n {
            2 => {
                packed[0] = u.get(0, 0);
                packed[1] = u.get(0, 1);
            }
            3 => {
                packed[0] = u.get(0, 0);
                packed[1] = u.get(0, 1);
                packed[2] = u.get(0, 2);
                packed[3] = u.get(1, 1);
                packed[4] = u.get(1, 2);
            }
            _ => panic!("bad dimension"),
        }
        let defect = u.trace();
        (
            PhasePoint {
                n,
                rho,
                m,
                u: packed,
            },
            defect,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut u = self.u;
        for v in u.iter_mut() {
            *v *= s;
        }
        PhasePoint {
            n: self.n,
            rho: self.rho * s,
            m: scale3(&self.m, s),
            u,
        }
    }

    pub fn plus(&self, o: &PhasePoint) -> Self {
        assert_eq!(self.n, o.n);
        let mut u = self.u;
        for (v, w) in u.iter_mut().zip(o.u.iter()) {
            *v += w;
        }
        PhasePoint {
            n: self.n,
            rho: self.rho + o.rho,
            m: [self.m[0] + o.m[0], self.m[1] + o.m[1], self.m[2] + o.m[2]],
            u,
        }
    }

    pub fn minus(&self, o: &PhasePoint) -> Self {
        self.plus(&o.scaled(-1.0))
    }

    /// Componentwise max-norm over (rho, m, spectral norm of U).
    pub fn scale_norm(&self) -> f64 {
        self.rho
            .abs()
            .max(norm(self.n, &self.m))
            .max(self.u_matrix().spec_norm())
    }

    /// Space-time matrix `[[rho, m^T], [m, U]]` whose kernel carries the wave
    /// direction.
    pub fn spacetime_matrix(&self) -> StSymMat {
        let mut st = StSymMat::zeros(1 + self.n);
        st.set(0, 0, self.rho);
        for i in 0..self.n {
            st.set(0, 1 + i, self.m[i]);
            for j in i..self.n {
                st.set(1 + i, 1 + j, self.u_entry(i, j));
            }
        }
        st
    }
}

impl Serialize for PhasePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PhasePoint", 3)?;
        st.serialize_field("rho", &self.rho)?;
        st.serialize_field("m", &self.m[..self.n])?;
        st.serialize_field("U", &self.u_packed())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PhasePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rho: f64,
            m: Vec<f64>,
            #[serde(rename = "U")]
            u: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        let n = raw.m.len();
        if n != 2 && n != 3 {
            return Err(serde::de::Error::custom("m must have 2 or 3 components"));
        }
        let need = if n == 2 { 2 } else { 5 };
        if raw.u.len() != need {
            return Err(serde::de::Error::custom(
                "U must hold the upper triangle without the last diagonal entry",
            ));
        }
        let mut m = [0.0; 3];
        m[..n].copy_from_slice(&raw.m);
        PhasePoint::new(n, raw.rho, m, &raw.u).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// WeightedFamily
// ---------------------------------------------------------------------------

/// A family of positively weighted phase points with total weight 1; the
/// carrier of the H_N condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedFamily {
    pub entries: Vec<(f64, PhasePoint)>,
}

impl WeightedFamily {
    pub fn new(entries: Vec<(f64, PhasePoint)>) -> Result<Self, PhaseError> {
        let sum: f64 = entries.iter().map(|(t, _)| t).sum();
        if entries.iter().any(|(t, _)| *t <= 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(PhaseError::BadWeights(sum));
        }
        Ok(WeightedFamily { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn barycenter(&self) -> PhasePoint {
        let n = self.entries[0].1.dim();
        let mut acc = PhasePoint::zero(n);
        for (t, p) in &self.entries {
            acc = acc.plus(&p.scaled(*t));
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Relaxation context
// ---------------------------------------------------------------------------

/// Dimension, pressure law and prescribed trace constant `c`, together with
/// the classification tolerances.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RelaxationContext {
    pub eos: GammaLaw,
    pub n: usize,
    pub c: f64,
    pub tol_c: f64,
    pub tol_k: f64,
}

impl RelaxationContext {
    pub fn new(eos: GammaLaw, n: usize, c: f64) -> Result<Self, PhaseError> {
        if n != 2 && n != 3 {
            return Err(PhaseError::BadDimension(n));
        }
        if !(c > 0.0) {
            return Err(PhaseError::NonPositiveTrace(c));
        }
        Ok(RelaxationContext {
            eos,
            n,
            c,
            tol_c: 1e-9,
            tol_k: 1e-9,
        })
    }

    /// Constraint matrix `m (x) m / rho + p(rho) I - U` of a phase point.
    pub fn constraint_matrix(&self, pt: &PhasePoint) -> Result<SymMat, PhaseError> {
        if !(pt.rho > 0.0) {
            return Err(PhaseError::NonPositiveDensity(pt.rho));
        }
        let p = self.eos.pressure(pt.rho).expect("rho > 0");
        let mut m = SymMat::identity(self.n).scaled(p);
        m = m.plus_outer(&pt.m, 1.0 / pt.rho);
        Ok(m.minus(&pt.u_matrix()))
    }

    /// The convex functional `e(rho, m, U) = (n/2) lambda_max(m(x)m/rho + pI - U)`.
    pub fn e_functional(&self, pt: &PhasePoint) -> Result<f64, PhaseError> {
        Ok(self.n as f64 / 2.0 * self.constraint_matrix(pt)?.lambda_max())
    }

    /// Lift `(rho, m)` satisfying the trace identity
    /// `|m|^2/rho + n p(rho) = 2c` onto the constraint set K.
    pub fn lift_to_k(&self, rho: f64, m: [f64; 3]) -> Result<PhasePoint, PhaseError> {
        if !(rho > 0.0) {
            return Err(PhaseError::NonPositiveDensity(rho));
        }
        let p = self.eos.pressure(rho).expect("rho > 0");
        let defect = dot(self.n, &m, &m) / rho + self.n as f64 * p - 2.0 * self.c;
        if defect.abs() > 1e-9 * (1.0 + 2.0 * self.c.abs()) {
            return Err(PhaseError::TraceDefect { defect });
        }
        let shift = p - 2.0 * self.c / self.n as f64;
        let u = SymMat::identity(self.n)
            .scaled(shift)
            .plus_outer(&m, 1.0 / rho);
        let (pt, _) = PhasePoint::from_matrix(self.n, rho, m, &u);
        Ok(pt)
    }

    /// Momentum magnitude of the K slice at density `rho`:
    /// `|m| = sqrt(rho (2c - n p(rho)))`. Errors if the slice is empty.
    pub fn slice_momentum(&self, rho: f64) -> Result<f64, PhaseError> {
        if !(rho > 0.0) {
            return Err(PhaseError::NonPositiveDensity(rho));
        }
        let p = self.eos.pressure(rho).expect("rho > 0");
        let m2 = rho * (2.0 * self.c - self.n as f64 * p);
        if m2 < 0.0 {
            return Err(PhaseError::TraceDefect { defect: -m2 });
        }
        Ok(m2.sqrt())
    }

    /// Box bound of the hull: every point with `e <= c` satisfies
    /// `max(rho, |m|, ||U||) <= M`.
    pub fn bound_m(&self) -> f64 {
        let n = self.n as f64;
        let rho_max = self.eos.inverse_pressure(2.0 * self.c / n).expect("c > 0");
        let m_max = (2.0 * rho_max * self.c).sqrt();
        let u_max = 2.0 * self.c * (n - 1.0) / n;
        rho_max.max(m_max).max(u_max).max(2.0 * self.c / n)
    }

    /// Classify a point against the hull of K.
    pub fn hull_classify(&self, pt: &PhasePoint) -> Result<HullClass, PhaseError> {
        let a = self.constraint_matrix(pt)?;
        let e = self.n as f64 / 2.0 * a.lambda_max();
        if e < self.c - self.tol_c {
            return Ok(HullClass::InteriorU);
        }
        if e > self.c + self.tol_c {
            return Ok(HullClass::Outside);
        }
        let target = 2.0 * self.c / self.n as f64;
        let gap = a
            .minus(&SymMat::identity(self.n).scaled(target))
            .spec_norm();
        if gap <= self.tol_k {
            Ok(HullClass::InK)
        } else {
            Ok(HullClass::BoundaryU)
        }
    }

    /// Decompose a hull point into a weighted family of K points on the same
    /// density slice, by repeated splitting along the eigendirections of the
    /// constraint matrix.
    pub fn decompose_into_k(&self, pt: &PhasePoint) -> Result<WeightedFamily, PhaseError> {
        match self.hull_classify(pt)? {
            HullClass::Outside => {
                let e = self.e_functional(pt)?;
                return Err(PhaseError::OutsideHull { excess: e - self.c });
            }
            HullClass::InK => {
                return WeightedFamily::new(vec![(1.0, *pt)]);
            }
            _ => {}
        }
        let mut leaves: Vec<(f64, PhasePoint)> = Vec::new();
        self.split_recursive(*pt, 1.0, &mut leaves, 0)?;
        WeightedFamily::new(leaves)
    }

    fn split_recursive(
        &self,
        pt: PhasePoint,
        weight: f64,
        out: &mut Vec<(f64, PhasePoint)>,
        depth: usize,
    ) -> Result<(), PhaseError> {
        let a = self.constraint_matrix(&pt)?;
        let target = 2.0 * self.c / self.n as f64;
        let (evals, evecs) = a.eigenvectors();
        // the smallest eigenvalue below the target drives the next split
        let lam_min = evals[0];
        let in_k = a
            .minus(&SymMat::identity(self.n).scaled(target))
            .spec_norm()
            <= self.tol_k.max(1e-8 * target.abs());
        if in_k || depth > self.n {
            out.push((weight, pt));
            return Ok(());
        }
        let b = evecs[0];
        let alpha = dot(self.n, &pt.m, &b);
        // tau^2 + 2 alpha tau - rho (target - lam_min) = 0
        let rad = alpha * alpha + pt.rho * (target - lam_min);
        let sq = rad.max(0.0).sqrt();
        let tau_plus = -alpha + sq;
        let tau_minus = -alpha - sq;
        let dir_u = SymMat::sym_outer(self.n, &pt.m, &b, 1.0 / pt.rho)
            .plus_outer(&b, -2.0 * alpha / pt.rho);
        let (dir, _) = PhasePoint::from_matrix(self.n, 0.0, b, &dir_u);
        let p_plus = pt.plus(&dir.scaled(tau_plus));
        let p_minus = pt.plus(&dir.scaled(tau_minus));
        // inverse segment ratio so that pt = w p_plus + (1-w) p_minus
        let w = tau_minus / (tau_minus - tau_plus);
        self.split_recursive(p_plus, weight * w, out, depth + 1)?;
        self.split_recursive(p_minus, weight * (1.0 - w), out, depth + 1)
    }
}

/// Position of a phase point relative to the hull of K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullClass {
    InteriorU,
    BoundaryU,
    Outside,
    InK,
}

// ---------------------------------------------------------------------------
// Wave cone
// ---------------------------------------------------------------------------

/// Result of a wave-cone membership test.
#[derive(Debug, Clone)]
pub struct WaveConeCheck {
    pub member: bool,
    pub det: f64,
    /// Kernel direction when the point is a member (unit vector in R^{1+n}).
    pub eta: Option<[f64; 4]>,
}

/// Test `delta` for membership in the wave cone: the (1+n)x(1+n) symmetric
/// matrix `[[rho, m^T], [m, U]]` must be singular. Membership holds when
/// `|det| <= tol * scale^{1+n}`.
pub fn in_wave_cone(delta: &PhasePoint, tol: f64) -> WaveConeCheck {
    let st = delta.spacetime_matrix();
    let det = st.det();
    let scale = delta.scale_norm().max(1e-300);
    let dim = 1 + delta.dim();
    let member = det.abs() <= tol * scale.powi(dim as i32);
    let eta = if member {
        if delta.scale_norm() == 0.0 {
            let mut e = [0.0; 4];
            e[0] = 1.0;
            Some(e)
        } else {
            // smallest-|eigenvalue| eigenvector
            let (vals, vecs) = st.jacobi_eigen();
            let mut best = 0;
            for k in 1..dim {
                if vals[k].abs() < vals[best].abs() {
                    best = k;
                }
            }
            Some(vecs[best])
        }
    } else {
        None
    };
    WaveConeCheck { member, det, eta }
}

/// Default relative tolerance for wave-cone membership.
pub const WAVE_CONE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// H_N machinery
// ---------------------------------------------------------------------------

/// One merge step of an H_N verification: entries `i` and `j` of the current
/// family were combined (difference in the wave cone).
#[derive(Debug, Clone, Serialize)]
pub struct MergeStep {
    pub i: usize,
    pub j: usize,
}

/// Expand a barycentric family whose pairwise differences lie in the wave
/// cone into a family of size `2^{N-1}` satisfying the H_N condition, by the
/// doubling recursion `tau_i = mu_k / (sum_{j<k} mu_j) * tau_{i - 2^{k-2}}`.
pub fn build_hn_family(base: &WeightedFamily) -> Result<WeightedFamily, PhaseError> {
    let n = base.len();
    assert!(n >= 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = base.entries[j].1.minus(&base.entries[i].1);
            let chk = in_wave_cone(&d, WAVE_CONE_TOL);
            if !chk.member {
                return Err(PhaseError::PairNotInCone { i, j, det: chk.det });
            }
        }
    }
    if n == 1 {
        return WeightedFamily::new(vec![(1.0, base.entries[0].1)]);
    }
    let mut entries: Vec<(f64, PhasePoint)> = vec![base.entries[0]];
    let mut prefix = base.entries[0].0;
    for k in 2..=n {
        let mu_k = base.entries[k - 1].0;
        let block: Vec<(f64, PhasePoint)> = entries
            .iter()
            .map(|(t, _)| (mu_k / prefix * t, base.entries[k - 1].1))
            .collect();
        entries.extend(block);
        prefix += mu_k;
    }
    WeightedFamily::new(entries)
}

/// Verify the H_N condition by searching for a merge order.
///
/// The search first tries the block pairing produced by [`build_hn_family`]
/// (pair `i` with `i + size/2` whenever the current size is even), then falls
/// back to a budgeted exhaustive ordered-pair search with memoization. A
/// `false` return means no merge order was found within the budget.
pub fn verify_hn(family: &WeightedFamily, tol: f64) -> Option<Vec<MergeStep>> {
    if family.is_empty() {
        return None;
    }
    let total: f64 = family.entries.iter().map(|(t, _)| t).sum();
    if (total - 1.0).abs() > tol.max(1e-12) {
        return None;
    }
    if family.len() == 1 {
        return Some(Vec::new());
    }
    if let Some(trace) = structured_merge(&family.entries) {
        return Some(trace);
    }
    let mut memo: std::collections::HashSet<u64> = std::collections::HashSet::new();
    let mut budget: usize = 200_000;
    let mut trace = Vec::new();
    if search_merge(family.entries.clone(), &mut trace, &mut memo, &mut budget) {
        Some(trace)
    } else {
        None
    }
}

fn cone_tol_for(a: &PhasePoint, b: &PhasePoint) -> f64 {
    let _ = (a, b);
    WAVE_CONE_TOL
}

fn merge_pair(entries: &[(f64, PhasePoint)], i: usize, j: usize) -> Vec<(f64, PhasePoint)> {
    let (ti, pi) = entries[i];
    let (tj, pj) = entries[j];
    let t = ti + tj;
    let merged = pi.scaled(ti / t).plus(&pj.scaled(tj / t));
    let mut out = Vec::with_capacity(entries.len() - 1);
    for (k, e) in entries.iter().enumerate() {
        if k == j {
            continue;
        }
        if k == i {
            out.push((t, merged));
        } else {
            out.push(*e);
        }
    }
    out
}

fn structured_merge(entries: &[(f64, PhasePoint)]) -> Option<Vec<MergeStep>> {
    if !entries.len().is_power_of_two() {
        return None;
    }
    let mut cur = entries.to_vec();
    let mut trace = Vec::new();
    while cur.len() > 1 {
        let half = cur.len() / 2;
        for i in 0..half {
            let d = cur[i + half].1.minus(&cur[i].1);
            if !in_wave_cone(&d, cone_tol_for(&cur[i].1, &cur[i + half].1)).member {
                return None;
            }
        }
        let mut next = Vec::with_capacity(half);
        for i in 0..half {
            let (ti, pi) = cur[i];
            let (tj, pj) = cur[i + half];
            let t = ti + tj;
            next.push((t, pi.scaled(ti / t).plus(&pj.scaled(tj / t))));
            // positional bookkeeping: merging (i, i+half) one pair at a time
            trace.push(MergeStep { i, j: i + half });
        }
        cur = next;
    }
    Some(trace)
}

fn state_hash(entries: &[(f64, PhasePoint)]) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut keys: Vec<[u64; 8]> = entries
        .iter()
        .map(|(t, p)| {
            let mut k = [0u64; 8];
            k[0] = t.to_bits();
            k[1] = p.rho.to_bits();
            k[2] = p.m[0].to_bits();
            k[3] = p.m[1].to_bits();
            k[4] = p.m[2].to_bits();
            k[5] = p.u[0].to_bits();
            k[6] = p.u[1].to_bits();
            k[7] = p.u[2].to_bits()
                ^ p.u[3].to_bits().rotate_left(17)
                ^ p.u[4].to_bits().rotate_left(40);
            k
        })
        .collect();
    keys.sort_unstable();
    let mut h = std::collections::hash_map::DefaultHasher::new();
    keys.hash(&mut h);
    h.finish()
}

fn search_merge(
    entries: Vec<(f64, PhasePoint)>,
    trace: &mut Vec<MergeStep>,
    memo: &mut std::collections::HashSet<u64>,
    budget: &mut usize,
) -> bool {
    if entries.len() == 1 {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let key = state_hash(&entries);
    if memo.contains(&key) {
        return false;
    }
    let m = entries.len();
    for i in 0..m {
        for j in (i + 1)..m {
            let d = entries[j].1.minus(&entries[i].1);
            if !in_wave_cone(&d, cone_tol_for(&entries[i].1, &entries[j].1)).member {
                continue;
            }
            trace.push(MergeStep { i, j });
            let next = merge_pair(&entries, i, j);
            if search_merge(next, trace, memo, budget) {
                return true;
            }
            trace.pop();
        }
    }
    memo.insert(key);
    false
}
