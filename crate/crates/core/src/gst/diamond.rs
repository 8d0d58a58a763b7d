//! Diamond distance between qubit channels given as transfer matrices in the
//! normalized Pauli basis.
//!
//! The reported value is `DIAMOND_NORM_SCALE · ‖A − B‖⋄`, so it lies in
//! `[0, 1]` for channels. Two independent routes are computed: a semidefinite
//! program over the Choi matrix and a multi-start search over pure
//! system⊗ancilla inputs.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use nalgebra::{Complex, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use super::gateset::Mat4;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::qubit::Unitary;
use crate::rng::stream;
use crate::{Error, Result};

/// Half-norm convention: identical channels give 0, perfectly
/// distinguishable ones give 1.
pub const DIAMOND_NORM_SCALE: f64 = 0.5;
pub const DIAMOND_CONVENTION: &str = "half diamond norm: 0.5 * ||A - B||_diamond";
/// Minimum Choi eigenvalue accepted as completely positive.
pub const CP_TOLERANCE: f64 = 1e-8;
/// Largest tolerated disagreement between the two routes.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-4;

type C = Complex<f64>;
type CMat2 = Matrix2<C>;
type CMat4 = Matrix4<C>;

fn pauli_basis() -> [CMat2; 4] {
    let s = 1.0 / 2f64.sqrt();
    let c = |re: f64, im: f64| C::new(re * s, im * s);
    [
        CMat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        CMat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        CMat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        CMat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    ]
}

/// Applies the map to an arbitrary (not necessarily Hermitian) 2×2 matrix.
fn apply(g: &Mat4, x: &CMat2) -> CMat2 {
    let basis = pauli_basis();
    let coeffs: Vec<C> = basis.iter().map(|b| (b * x).trace()).collect();
    let mut out = CMat2::zeros();
    for (k, b) in basis.iter().enumerate() {
        let ck: C = (0..4).map(|l| coeffs[l] * g[(k, l)]).sum();
        out += b * ck;
    }
    out
}

fn unit(i: usize, j: usize) -> CMat2 {
    let mut e = CMat2::zeros();
    e[(i, j)] = C::new(1.0, 0.0);
    e
}

/// `J = Σ_ij Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|`, output factor first.
pub fn choi(g: &Mat4) -> CMat4 {
    let mut j = CMat4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            let phi = apply(g, &unit(a, b));
            for r in 0..2 {
                for c in 0..2 {
                    j[(2 * r + a, 2 * c + b)] = phi[(r, c)];
                }
            }
        }
    }
    j
}

/// Inverse of [`choi`].
pub fn choi_to_ptm(j: &CMat4) -> Mat4 {
    let basis = pauli_basis();
    let phi = |x: &CMat2| {
        let mut out = CMat2::zeros();
        for r in 0..2 {
            for c in 0..2 {
                out[(r, c)] = (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| j[(2 * r + a, 2 * c + b)] * x[(a, b)])
                    .sum();
            }
        }
        out
    };
    Mat4::from_fn(|k, l| (basis[k] * phi(&basis[l])).trace().re)
}

fn hermitian_eigen(m: &CMat4) -> (Vec<f64>, CMat4) {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn min_choi_eigenvalue(g: &Mat4) -> f64 {
    hermitian_eigen(&choi(g)).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Clips negative Choi eigenvalues and restores trace preservation with
/// `(I ⊗ S^{-1/2}) J (I ⊗ S^{-1/2})`, `S = Tr_out J`. Returns the projected
/// map and the clipped eigenvalue mass.
pub fn cp_project(g: &Mat4) -> (Mat4, f64) {
    let (vals, vecs) = hermitian_eigen(&choi(g));
    let clipped: f64 = vals.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
    if clipped == 0.0 {
        return (*g, 0.0);
    }
    let d = CMat4::from_diagonal(&nalgebra::Vector4::from_iterator(
        vals.iter().map(|v| C::new(v.max(0.0), 0.0)),
    ));
    let j = vecs * d * vecs.adjoint();
    let mut s = CMat2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            s[(a, b)] = (0..2).map(|r| j[(2 * r + a, 2 * r + b)]).sum();
        }
    }
    let se = ((s + s.adjoint()) * C::new(0.5, 0.0)).symmetric_eigen();
    let inv_sqrt = se.eigenvectors
        * CMat2::from_diagonal(&nalgebra::Vector2::from_iterator(
            se.eigenvalues.iter().map(|v| C::new(1.0 / v.max(1e-300).sqrt(), 0.0)),
        ))
        * se.eigenvectors.adjoint();
    let mut k = CMat4::zeros();
    for r in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                k[(2 * r + a, 2 * r + b)] = inv_sqrt[(a, b)];
            }
        }
    }
    (choi_to_ptm(&(k * j * k)), clipped)
}

/// Symmetric-matrix svec used by the PSD triangle cone: upper triangle,
/// column-major, off-diagonals scaled by √2.
fn svec_index(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|c| (0..=c).map(move |r| (r, c))).collect()
}

/// Real embedding `[[A, −B], [B, A]]` of a Hermitian `A + iB`.
fn embed(m: &CMat4) -> [[f64; 8]; 8] {
    let mut out = [[0.0; 8]; 8];
    for r in 0..4 {
        for c in 0..4 {
            let v = m[(r, c)];
            out[r][c] = v.re;
            out[r + 4][c + 4] = v.re;
            out[r][c + 4] = -v.im;
            out[r + 4][c] = v.im;
        }
    }
    out
}

const W_PARAMS: usize = 16;
const N_PARAMS: usize = W_PARAMS + 4;

/// Decision variables: Hermitian `W` (10 real-part entries of the upper
/// triangle, 6 imaginary parts) and the input state `ρ`
/// (`ρ₀₀, ρ₁₁, Re ρ₀₁, Im ρ₀₁`).
fn variable_matrices(x: &[f64]) -> (CMat4, CMat2) {
    let mut w = CMat4::zeros();
    let mut k = 0;
    for r in 0..4 {
        for c in r..4 {
            w[(r, c)].re = x[k];
            w[(c, r)].re = x[k];
            k += 1;
        }
    }
    for r in 0..4 {
        for c in (r + 1)..4 {
            w[(r, c)].im = x[k];
            w[(c, r)].im = -x[k];
            k += 1;
        }
    }
    let rho = CMat2::new(
        C::new(x[16], 0.0),
        C::new(x[18], x[19]),
        C::new(x[18], -x[19]),
        C::new(x[17], 0.0),
    );
    (w, rho)
}

fn identity_tensor(rho: &CMat2) -> CMat4 {
    let mut m = CMat4::zeros();
    for r in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                m[(2 * r + a, 2 * r + b)] = rho[(a, b)];
            }
        }
    }
    m
}

fn to_csc(dense: &[Vec<f64>], rows: usize) -> CscMatrix<f64> {
    let mut colptr = vec![0];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for col in dense {
        for (r, &v) in col.iter().enumerate() {
            if v != 0.0 {
                rowval.push(r);
                nzval.push(v);
            }
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(rows, dense.len(), colptr, rowval, nzval)
}

/// `max ⟨J, W⟩` subject to `0 ⪯ W ⪯ I ⊗ ρ`, `ρ ⪰ 0`, `Tr ρ = 1`; the
/// optimum is the half diamond norm of a trace-annihilating difference.
pub fn diamond_sdp(a: &Mat4, b: &Mat4) -> Result<f64> {
    let j = choi(&(a - b));
    let tri = svec_index(8);
    let tri2 = svec_index(4);
    let sqrt2 = 2f64.sqrt();
    let svec = |m: &[[f64; 8]; 8]| -> Vec<f64> {
        tri.iter()
            .map(|&(r, c)| if r == c { m[r][c] } else { sqrt2 * m[r][c] })
            .collect()
    };
    let svec4 = |m: &[[f64; 8]; 8]| -> Vec<f64> {
        tri2.iter()
            .map(|&(r, c)| if r == c { m[r][c] } else { sqrt2 * m[r][c] })
            .collect()
    };
    let rho_block = |rho: &CMat2| {
        let mut m = [[0.0; 8]; 8];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = rho[(r, c)].re;
                m[r + 2][c + 2] = rho[(r, c)].re;
                m[r][c + 2] = -rho[(r, c)].im;
                m[r + 2][c] = rho[(r, c)].im;
            }
        }
        m
    };
    // Each cone row block is s = b − A x with b = 0 except the trace row.
    let rows_for = |x: &[f64]| -> Vec<f64> {
        let (w, rho) = variable_matrices(x);
        let mut s = vec![x[16] + x[17]];
        s.extend(svec(&embed(&w)));
        s.extend(svec(&embed(&(identity_tensor(&rho) - w))));
        s.extend(svec4(&rho_block(&rho)));
        s
    };
    let m = rows_for(&[0.0; N_PARAMS]).len();
    let cols: Vec<Vec<f64>> = (0..N_PARAMS)
        .map(|k| {
            let mut e = [0.0; N_PARAMS];
            e[k] = 1.0;
            rows_for(&e).into_iter().map(|v| -v).collect()
        })
        .collect();
    // Zero-cone row: s = −1 + (ρ₀₀ + ρ₁₁) = 0.
    let mut rhs = vec![0.0; m];
    rhs[0] = -1.0;
    let q: Vec<f64> = (0..N_PARAMS)
        .map(|k| {
            let mut e = [0.0; N_PARAMS];
            e[k] = 1.0;
            let (w, _) = variable_matrices(&e);
            -(j * w).trace().re
        })
        .collect();
    let p = CscMatrix::zeros((N_PARAMS, N_PARAMS));
    let a_mat = to_csc(&cols, m);
    let cones = [
        SupportedConeT::ZeroConeT(1),
        SupportedConeT::PSDTriangleConeT(8),
        SupportedConeT::PSDTriangleConeT(8),
        SupportedConeT::PSDTriangleConeT(4),
    ];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&p, &q, &a_mat, &rhs, &cones, settings).map_err(|e| Error::Solver(format!("{e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        s => return Err(Error::Solver(format!("status {s:?}"))),
    }
    Ok((-solver.solution.obj_val).max(0.0))
}

fn trace_norm(m: &CMat4) -> f64 {
    hermitian_eigen(m).0.iter().map(|v| v.abs()).sum()
}

/// Half of `‖(Δ ⊗ I)(|ψ⟩⟨ψ|)‖₁` for a system⊗ancilla pure state.
fn output_distance(jd: &[[CMat2; 2]; 2], x: &[f64]) -> f64 {
    let mut psi = [C::new(0.0, 0.0); 4];
    for (k, p) in psi.iter_mut().enumerate() {
        *p = C::new(x[2 * k], x[2 * k + 1]);
    }
    let norm: f64 = psi.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return 0.0;
    }
    psi.iter_mut().for_each(|p| *p /= norm);
    // ψ = Σ ψ_{i a} |i⟩|a⟩ with index 2i + a.
    let mut out = CMat4::zeros();
    for i in 0..2 {
        for jj in 0..2 {
            let phi = &jd[i][jj];
            for a in 0..2 {
                for b in 0..2 {
                    let coef = psi[2 * i + a] * psi[2 * jj + b].conj();
                    for r in 0..2 {
                        for c in 0..2 {
                            out[(2 * r + a, 2 * c + b)] += coef * phi[(r, c)];
                        }
                    }
                }
            }
        }
    }
    DIAMOND_NORM_SCALE * trace_norm(&out)
}

/// Multi-start Nelder–Mead over pure inputs; a lower bound that meets the
/// SDP value at the optimum.
pub fn diamond_state_search(a: &Mat4, b: &Mat4, starts: usize, seed: u64) -> f64 {
    use rand::Rng;
    let d = a - b;
    let jd = [
        [apply(&d, &unit(0, 0)), apply(&d, &unit(0, 1))],
        [apply(&d, &unit(1, 0)), apply(&d, &unit(1, 1))],
    ];
    let mut rng = stream(seed, &[0x6469_616d]);
    let opts = NelderMeadOptions {
        max_iterations: 4000,
        xtol: 1e-12,
        ftol: 1e-15,
    };
    let mut best: f64 = 0.0;
    // The maximally entangled input is a good deterministic start.
    let bell = {
        let s = 1.0 / 2f64.sqrt();
        vec![s, 0.0, 0.0, 0.0, 0.0, 0.0, s, 0.0]
    };
    for k in 0..starts.max(1) {
        let x0: Vec<f64> = if k == 0 {
            bell.clone()
        } else {
            (0..8).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        let m = nelder_mead(|x| -output_distance(&jd, x), &x0, &[0.2; 8], None, &opts);
        best = best.max(-m.value);
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondDistance {
    pub value: f64,
    pub sdp: f64,
    pub state_search: f64,
    /// Set when the two routes disagree beyond [`CROSS_CHECK_TOLERANCE`].
    pub flagged: bool,
}

/// Checks complete positivity of both maps, then evaluates both routes.
pub fn diamond_distance(a: &Mat4, b: &Mat4) -> Result<DiamondDistance> {
    for g in [a, b] {
        let min = min_choi_eigenvalue(g);
        if min < -CP_TOLERANCE {
            return Err(Error::NotCompletelyPositive(min));
        }
    }
    let sdp = diamond_sdp(a, b)?;
    let state_search = diamond_state_search(a, b, 8, 0);
    let flagged = (sdp - state_search).abs() > CROSS_CHECK_TOLERANCE;
    if flagged {
        log::warn!("diamond distance routes disagree: sdp {sdp} vs state search {state_search}");
    }
    Ok(DiamondDistance {
        value: sdp,
        sdp,
        state_search,
        flagged,
    })
}

/// Closed form for unitary channels, `sin(Δ/2)` in the half convention, where `Δ ∈ [0, π]` is the
/// eigenphase spread of `U†V`.
pub fn unitary_pair_distance(u: &Unitary<f64>, v: &Unitary<f64>) -> f64 {
    let w = u.adjoint().then_after(v);
    let m = w.matrix();
    let tr = m.trace();
    let ratio = tr * tr / m.det();
    let cos_spread = (ratio.re / 2.0 - 1.0).clamp(-1.0, 1.0);
    // Full norm is 2 sin(Δ/2).
    DIAMOND_NORM_SCALE * 2.0 * ((1.0 - cos_spread) / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gst::unitary_to_mat4;
    use crate::qubit::Axis;
    use rand::Rng;

    #[test]
    fn choi_round_trip_and_trace() {
        let g = unitary_to_mat4(&Unitary::exp_pauli([0.3, -0.2, 0.5]));
        let j = choi(&g);
        assert!((j.trace().re - 2.0).abs() < 1e-12);
        assert!((choi_to_ptm(&j) - g).abs().max() < 1e-12);
        assert!(min_choi_eigenvalue(&g) > -1e-12);
    }

    #[test]
    fn identical_channels() {
        let g = unitary_to_mat4(&Unitary::rotation(Axis::X, 0.7));
        let d = diamond_distance(&g, &g).unwrap();
        assert!(d.value < 1e-8 && d.state_search < 1e-8, "{d:?}");
    }

    #[test]
    fn z_rotation_closed_form() {
        let phi: f64 = 0.2;
        let u = Unitary::rotation(Axis::Z, phi);
        let expect = (phi / 2.0).sin();
        assert!((unitary_pair_distance(&u, &Unitary::identity()) - expect).abs() < 1e-14);
        // Full-norm value 2 sin(0.1).
        assert!((unitary_pair_distance(&u, &Unitary::identity()) / DIAMOND_NORM_SCALE - 0.199_667).abs() < 1e-6);
        let d = diamond_distance(&unitary_to_mat4(&u), &Mat4::identity()).unwrap();
        assert!((d.value - expect).abs() < 1e-6, "{d:?}");
        assert!(!d.flagged);
    }

    #[test]
    fn overrotation_matches_angle_difference() {
        let eps = 0.01;
        let a = Unitary::rotation(Axis::X, (1.0 + eps) * std::f64::consts::FRAC_PI_2);
        let b = Unitary::rotation(Axis::X, std::f64::consts::FRAC_PI_2);
        let expect = (eps * std::f64::consts::FRAC_PI_2 / 2.0).sin();
        assert!((unitary_pair_distance(&a, &b) - expect).abs() < 1e-12);
        let d = diamond_distance(&unitary_to_mat4(&a), &unitary_to_mat4(&b)).unwrap();
        assert!((d.value - expect).abs() < 1e-6);
    }

    #[test]
    fn random_unitary_pairs() {
        let mut rng = stream(3, &[1]);
        for _ in 0..5 {
            let mut h = || {
                [
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                ]
            };
            let (u, v) = (Unitary::exp_pauli(h()), Unitary::exp_pauli(h()));
            let d = diamond_distance(&unitary_to_mat4(&u), &unitary_to_mat4(&v)).unwrap();
            let expect = unitary_pair_distance(&u, &v);
            assert!((d.sdp - expect).abs() < 1e-5, "{d:?} vs {expect}");
            assert!((d.state_search - expect).abs() < 1e-5, "{d:?} vs {expect}");
        }
    }

    #[test]
    fn depolarizing_distance() {
        // Depolarizing with survival f on the Bloch block: half norm 3(1 − f)/4.
        let f = 0.9;
        let dep = Mat4::from_diagonal(&nalgebra::Vector4::new(1.0, f, f, f));
        let d = diamond_distance(&dep, &Mat4::identity()).unwrap();
        assert!((d.value - 0.75 * (1.0 - f)).abs() < 1e-6, "{d:?}");
    }

    #[test]
    fn non_cp_input_is_rejected_and_projected() {
        let mut g = Mat4::identity();
        g[(1, 1)] = 1.05;
        assert!(matches!(
            diamond_distance(&g, &Mat4::identity()),
            Err(Error::NotCompletelyPositive(_))
        ));
        let (p, clipped) = cp_project(&g);
        assert!(clipped > 0.0);
        assert!(min_choi_eigenvalue(&p) > -1e-10);
        assert!((p.row(0) - Mat4::identity().row(0)).abs().max() < 1e-10);
    }
}
