//! Assembly of the total scattering matrix of a graph.
//!
//! With `A` the external and `B` the internal mode vectors, the vertex
//! relations read
//!
//! ```text
//! A(k) = S_oo A(-k) + S_oi B(-k)
//! B(k) = S_io A(-k) + S_ii B(-k)
//! B(k) = E(k) B(-k)
//! ```
//!
//! and eliminating `B` gives `S = S_oo + S_oi [E - S_ii]^{-1} S_io`.

use crate::graph::{canonical_ordering, Channel, GraphSpec, LocalScattering, ModeOrdering};
use crate::{max_abs, unitarity_residual, CMatrix, CVector, Error, Result, C64};

/// Tolerance for the unitarity and Hermitian-analyticity checks on constant
/// local matrices (max-entry norm).
pub const LOCAL_CHECK_TOL: f64 = 1e-10;

/// Reciprocal condition estimate below which `E - S_ii` counts as singular.
pub const POLE_RCOND: f64 = 1e-13;

/// Anything that yields the lead-space scattering matrix at a real momentum.
pub trait ScatteringEvaluator: Sync {
    fn leads(&self) -> usize;
    fn s_matrix(&self, k: f64) -> Result<CMatrix>;
}

/// The scale-invariant three-channel matrix `S^C(t)`.
pub fn s_c(t: f64) -> CMatrix {
    let r = (2.0 * t * (1.0 - t)).sqrt();
    CMatrix::from_row_slice(3, 3, &[1.0 - 2.0 * t, r, r, r, t - 1.0, t, r, t, t - 1.0].map(|x| C64::new(x, 0.0)))
}

/// Local scattering matrix of a vertex at real momentum `k`.
pub fn local_s(spec: &LocalScattering, k: f64) -> Result<CMatrix> {
    match spec {
        LocalScattering::Constant(m) => {
            check_constant(m)?;
            Ok(m.clone())
        }
        LocalScattering::ScaleInvariantC { t } => Ok(s_c(*t)),
        LocalScattering::EnergyDependentE { t, eta } => {
            let i_eta = C64::new(0.0, *eta);
            let id = CMatrix::identity(3, 3);
            Ok((s_c(*t) * C64::from(k) - id * i_eta) / (C64::from(k) + i_eta))
        }
        LocalScattering::DiracStep { t } => {
            if k > 0.0 {
                Ok(s_c(*t))
            } else if k < 0.0 {
                Ok(s_c(*t).adjoint())
            } else {
                Err(Error::StepDiscontinuity)
            }
        }
    }
}

fn check_constant(m: &CMatrix) -> Result<()> {
    let n = m.nrows();
    let unitary = unitarity_residual(m);
    if unitary > LOCAL_CHECK_TOL {
        return Err(Error::LocalMatrix { vertex: 0, reason: format!("not unitary (residual {unitary:e})") });
    }
    // S(k) S(-k) = 1 for a k-independent matrix.
    let analytic = max_abs(&(m * m - CMatrix::identity(n, n)));
    if analytic > LOCAL_CHECK_TOL {
        return Err(Error::LocalMatrix { vertex: 0, reason: format!("S(k)S(-k) != 1 (residual {analytic:e})") });
    }
    Ok(())
}

fn local_s_at(spec: &GraphSpec, vertex: usize, k: f64) -> Result<CMatrix> {
    let local = spec.local.get(&vertex).ok_or_else(|| Error::LocalMatrix { vertex, reason: "missing".into() })?;
    local_s(local, k).map_err(|e| match e {
        Error::LocalMatrix { reason, .. } => Error::LocalMatrix { vertex, reason },
        other => other,
    })
}

/// Free propagation of the internal modes, `B(k) = E(k) B(-k)`.
#[derive(Debug, Clone)]
pub struct PropagationMatrix {
    pub matrix: CMatrix,
    pub k: C64,
}

/// `E(k, θ)`: half-edge `h` couples to its reverse with `exp(-ik d + iθ_h)`.
/// Complex `k` is accepted for pole studies.
pub fn build_propagation(ordering: &ModeOrdering, k: C64) -> PropagationMatrix {
    let n = ordering.d_int();
    let mut m = CMatrix::zeros(n, n);
    let i = C64::i();
    for (row, slot) in ordering.internal.iter().enumerate() {
        m[(row, slot.reverse)] = (-i * k * slot.length + i * slot.theta).exp();
    }
    PropagationMatrix { matrix: m, k }
}

/// The vertex-diagonal scattering blocks in canonical mode order.
#[derive(Debug, Clone)]
pub struct BlockMatrices {
    pub oo: CMatrix,
    pub oi: CMatrix,
    pub io: CMatrix,
    pub ii: CMatrix,
}

pub fn build_blocks(spec: &GraphSpec, ordering: &ModeOrdering, k: f64) -> Result<BlockMatrices> {
    let (ne, ni) = (ordering.d_ext(), ordering.d_int());
    let mut b = BlockMatrices {
        oo: CMatrix::zeros(ne, ne),
        oi: CMatrix::zeros(ne, ni),
        io: CMatrix::zeros(ni, ne),
        ii: CMatrix::zeros(ni, ni),
    };
    for (v, channels) in ordering.vertex_channels.iter().enumerate() {
        let vertex = v + 1;
        let s = local_s_at(spec, vertex, k)?;
        if s.nrows() != channels.len() || s.ncols() != channels.len() {
            return Err(Error::LocalMatrix {
                vertex,
                reason: format!(
                    "local matrix dimension mismatch: {}x{} for degree {}",
                    s.nrows(),
                    s.ncols(),
                    channels.len()
                ),
            });
        }
        for (r, cr) in channels.iter().enumerate() {
            for (c, cc) in channels.iter().enumerate() {
                let z = s[(r, c)];
                match (*cr, *cc) {
                    (Channel::External(x), Channel::External(y)) => b.oo[(x, y)] = z,
                    (Channel::External(x), Channel::Internal(y)) => b.oi[(x, y)] = z,
                    (Channel::Internal(x), Channel::External(y)) => b.io[(x, y)] = z,
                    (Channel::Internal(x), Channel::Internal(y)) => b.ii[(x, y)] = z,
                }
            }
        }
    }
    Ok(b)
}

/// Total scattering matrix over the external channels.
#[derive(Debug, Clone)]
pub struct TotalSMatrix {
    pub matrix: CMatrix,
    pub k: f64,
    /// Line integrals of the graph the matrix was evaluated for.
    pub thetas: Vec<f64>,
}

impl TotalSMatrix {
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }
}

/// A graph with its mode layout computed once, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct GraphScatterer {
    spec: GraphSpec,
    ordering: ModeOrdering,
}

struct Resolvent {
    blocks: BlockMatrices,
    /// `[E - S_ii]^{-1}`
    inverse: CMatrix,
}

impl GraphScatterer {
    pub fn new(spec: GraphSpec) -> Result<Self> {
        let ordering = canonical_ordering(&spec)?;
        Ok(GraphScatterer { spec, ordering })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn ordering(&self) -> &ModeOrdering {
        &self.ordering
    }

    fn resolvent(&self, k: f64) -> Result<Resolvent> {
        let blocks = build_blocks(&self.spec, &self.ordering, k)?;
        let n = self.ordering.d_int();
        if n == 0 {
            return Ok(Resolvent { blocks, inverse: CMatrix::zeros(0, 0) });
        }
        let e = build_propagation(&self.ordering, C64::from(k)).matrix;
        let a = e - &blocks.ii;
        let inverse = a.clone().lu().try_inverse().ok_or(Error::ScatteringPole { k, rcond: 0.0 })?;
        let rcond = 1.0 / (norm_1(&a) * norm_1(&inverse));
        if !(rcond >= POLE_RCOND) {
            return Err(Error::ScatteringPole { k, rcond });
        }
        Ok(Resolvent { blocks, inverse })
    }

    pub fn total_s(&self, k: f64) -> Result<TotalSMatrix> {
        let r = self.resolvent(k)?;
        let b = &r.blocks;
        let matrix = if self.ordering.d_int() == 0 { b.oo.clone() } else { &b.oo + &b.oi * &r.inverse * &b.io };
        Ok(TotalSMatrix { matrix, k, thetas: self.spec.thetas() })
    }

    /// `B(-k)` produced by the incoming amplitudes `A(-k)`.
    pub fn internal_modes(&self, k: f64, incoming: &CVector) -> Result<CVector> {
        if incoming.len() != self.ordering.d_ext() {
            return Err(Error::InvalidArgument(format!(
                "incoming vector has length {}, expected {}",
                incoming.len(),
                self.ordering.d_ext()
            )));
        }
        let r = self.resolvent(k)?;
        Ok(&r.inverse * (&r.blocks.io * incoming))
    }

    /// Residuals of the two vertex relations after back-substituting the
    /// internal modes: `|S_oo A + S_oi B − S A|` and `|E B − S_io A − S_ii B|`.
    pub fn back_substitution_residuals(&self, k: f64, incoming: &CVector) -> Result<(f64, f64)> {
        let b_modes = self.internal_modes(k, incoming)?;
        let blocks = build_blocks(&self.spec, &self.ordering, k)?;
        let s = self.total_s(k)?.matrix;
        let e = build_propagation(&self.ordering, C64::from(k)).matrix;
        let out = &blocks.oo * incoming + &blocks.oi * &b_modes - &s * incoming;
        let int = &e * &b_modes - &blocks.io * incoming - &blocks.ii * &b_modes;
        let vmax = |v: &CVector| v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        Ok((vmax(&out), vmax(&int)))
    }
}

impl ScatteringEvaluator for GraphScatterer {
    fn leads(&self) -> usize {
        self.ordering.d_ext()
    }

    fn s_matrix(&self, k: f64) -> Result<CMatrix> {
        Ok(self.total_s(k)?.matrix)
    }
}

/// One-shot evaluation of the total scattering matrix.
pub fn total_s(spec: &GraphSpec, k: f64) -> Result<TotalSMatrix> {
    GraphScatterer::new(spec.clone())?.total_s(k)
}

pub fn internal_modes(spec: &GraphSpec, k: f64, incoming: &CVector) -> Result<CVector> {
    GraphScatterer::new(spec.clone())?.internal_modes(k, incoming)
}

fn norm_1(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ExternalEdge, InternalEdge};
    use std::collections::BTreeMap;

    fn ring(n: usize, t: f64, theta_edge: f64) -> GraphSpec {
        GraphSpec {
            vertices: n,
            internal: (1..=n).map(|a| InternalEdge { a, b: a % n + 1, j: 1, length: 1.0, theta: theta_edge }).collect(),
            external: (1..=n).map(|a| ExternalEdge { a, j: 1 }).collect(),
            local: (1..=n).map(|a| (a, LocalScattering::ScaleInvariantC { t })).collect(),
        }
    }

    #[test]
    fn s_c_at_half() {
        let s = local_s(&LocalScattering::ScaleInvariantC { t: 0.5 }, 0.3).unwrap();
        let r = 0.5_f64.sqrt();
        let want = [0.0, r, r, r, -0.5, 0.5, r, 0.5, -0.5];
        for (z, w) in s.transpose().iter().zip(want) {
            assert!((z - C64::from(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn energy_dependent_reduces_to_s_c() {
        for k in [0.1, 1.0, 7.5] {
            let e = local_s(&LocalScattering::EnergyDependentE { t: 0.3, eta: 0.0 }, k).unwrap();
            assert!(max_abs(&(e - s_c(0.3))) < 1e-15);
        }
        let e = local_s(&LocalScattering::EnergyDependentE { t: 0.3, eta: 1.2 }, 0.7).unwrap();
        assert!(unitarity_residual(&e) < 1e-14);
    }

    #[test]
    fn dirac_step_is_involutive_s_c() {
        for t in [0.1, 0.5, 0.77] {
            let u = s_c(t);
            assert!(max_abs(&(&u * &u - CMatrix::identity(3, 3))) < 1e-14);
            let d = LocalScattering::DiracStep { t };
            assert!(max_abs(&(local_s(&d, 2.0).unwrap() - &u)) < 1e-15);
            assert!(max_abs(&(local_s(&d, -2.0).unwrap() - &u)) < 1e-15);
            assert!(matches!(local_s(&d, 0.0), Err(Error::StepDiscontinuity)));
        }
    }

    #[test]
    fn constant_matrix_checks() {
        let not_unitary = CMatrix::from_element(1, 1, C64::new(0.5, 0.0));
        assert!(local_s(&LocalScattering::Constant(not_unitary), 1.0).is_err());
        let phase = CMatrix::from_element(1, 1, C64::new(0.0, 1.0));
        // unitary but S·S = -1
        assert!(local_s(&LocalScattering::Constant(phase), 1.0).is_err());
    }

    #[test]
    fn e_matrix_at_zero_is_reversal_permutation() {
        let o = canonical_ordering(&ring(4, 0.5, 0.0)).unwrap();
        let e = build_propagation(&o, C64::from(0.0)).matrix;
        for (r, slot) in o.internal.iter().enumerate() {
            for c in 0..o.d_int() {
                let want = if c == slot.reverse { 1.0 } else { 0.0 };
                assert!((e[(r, c)] - C64::from(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ring3_blocks() {
        let t = 0.3;
        let g = ring(3, t, 0.2);
        let o = canonical_ordering(&g).unwrap();
        let b = build_blocks(&g, &o, 1.0).unwrap();
        let r = (2.0 * t * (1.0 - t)).sqrt();
        assert!(max_abs(&(&b.oo - CMatrix::identity(3, 3) * C64::from(1.0 - 2.0 * t))) < 1e-15);
        for v in 0..3 {
            for x in 0..6 {
                let io = if x / 2 == v { r } else { 0.0 };
                assert!((b.io[(x, v)] - C64::from(io)).norm() < 1e-15);
                for y in 0..6 {
                    let ii = if x / 2 == y / 2 {
                        if x == y {
                            t - 1.0
                        } else {
                            t
                        }
                    } else {
                        0.0
                    };
                    assert!((b.ii[(x, y)] - C64::from(ii)).norm() < 1e-15);
                }
            }
        }
        assert!(max_abs(&(b.oi.transpose() - &b.io)) < 1e-15);
    }

    #[test]
    fn star_total_is_local() {
        let g = GraphSpec {
            vertices: 1,
            internal: vec![],
            external: (1..=3).map(|j| ExternalEdge { a: 1, j }).collect(),
            local: BTreeMap::from([(1, LocalScattering::ScaleInvariantC { t: 0.6 })]),
        };
        let s = total_s(&g, 0.4).unwrap();
        assert_eq!(s.matrix, s_c(0.6));
    }

    #[test]
    fn zero_incoming_gives_zero_internal() {
        let sc = GraphScatterer::new(ring(3, 0.4, 0.3)).unwrap();
        let b = sc.internal_modes(0.9, &CVector::zeros(3)).unwrap();
        assert!(b.iter().all(|z| z.norm() == 0.0));
        assert!(sc.internal_modes(0.9, &CVector::zeros(2)).is_err());
    }

    #[test]
    fn back_substitution_ring2_and_loop() {
        let ring2 = GraphSpec {
            vertices: 2,
            internal: vec![
                InternalEdge { a: 1, b: 2, j: 1, length: 1.0, theta: 0.4 },
                InternalEdge { a: 2, b: 1, j: 2, length: 1.0, theta: 0.4 },
            ],
            external: vec![ExternalEdge { a: 1, j: 1 }, ExternalEdge { a: 2, j: 1 }],
            local: (1..=2).map(|a| (a, LocalScattering::ScaleInvariantC { t: 0.5 })).collect(),
        };
        let mut unit = CVector::zeros(2);
        unit[0] = C64::from(1.0);
        let (r1, r2) = GraphScatterer::new(ring2).unwrap().back_substitution_residuals(1.3, &unit).unwrap();
        assert!(r1 < 1e-10 && r2 < 1e-10, "{r1} {r2}");

        let lollipop = GraphSpec {
            vertices: 1,
            internal: vec![InternalEdge { a: 1, b: 1, j: 1, length: 1.5, theta: 0.9 }],
            external: vec![ExternalEdge { a: 1, j: 1 }],
            local: BTreeMap::from([(1, LocalScattering::ScaleInvariantC { t: 0.35 })]),
        };
        let one = CVector::from_element(1, C64::from(1.0));
        let sc = GraphScatterer::new(lollipop).unwrap();
        let (r1, r2) = sc.back_substitution_residuals(0.8, &one).unwrap();
        assert!(r1 < 1e-10 && r2 < 1e-10, "{r1} {r2}");
        assert!(sc.total_s(0.8).unwrap().unitarity_residual() < 1e-12);
    }

    #[test]
    fn bound_state_is_reported_as_pole() {
        // N=2 ring without flux: E - S_ii is singular at kd = π.
        let ring2 = GraphSpec {
            vertices: 2,
            internal: vec![
                InternalEdge { a: 1, b: 2, j: 1, length: 1.0, theta: 0.0 },
                InternalEdge { a: 2, b: 1, j: 2, length: 1.0, theta: 0.0 },
            ],
            external: vec![ExternalEdge { a: 1, j: 1 }, ExternalEdge { a: 2, j: 1 }],
            local: (1..=2).map(|a| (a, LocalScattering::ScaleInvariantC { t: 0.5 })).collect(),
        };
        let err = total_s(&ring2, std::f64::consts::PI).unwrap_err();
        assert!(matches!(err, Error::ScatteringPole { .. }), "{err}");
    }
}
