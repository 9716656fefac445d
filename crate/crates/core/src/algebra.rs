//! Finite-dimensional Lie algebras given by real structure constants,
//! classical densities in the dual, Lie–Poisson brackets, coadjoint orbits,
//! Hermitian matrix representations and stability-group averaging of
//! quantal densities.
//!
//! Conventions: ħ = 1 and `[E_a, E_b] = i Σ_k c[a][b][k] E_k` with real `c`.
//! The Poisson tensor at a density is `σ_ab(ρ) = Σ_k c[a][b][k] ρ_k` and a
//! Hamiltonian `H(ρ)` generates `ρ̇_a = Σ_b σ_ab ∂H/∂ρ_b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{rank_kernel, RankKernel};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for the Jacobi identity of shipped and loaded constants.
pub const JACOBI_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const CLOSURE_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-12;

/// Real structure tensor `c[a][b][k]` of a Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<f64>,
}

impl StructureConstants {
    /// Builds and validates (antisymmetry, Jacobi) a dense tensor stored as
    /// `c[(a * dim + b) * dim + k]`.
    pub fn new(dim: usize, c: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("algebra dimension must be positive".into()));
        }
        check_dim(dim * dim * dim, c.len())?;
        if let Some(x) = c.iter().find(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("non-finite structure constant {x}")));
        }
        let sc = Self { dim, c };
        for a in 0..dim {
            for b in 0..dim {
                for k in 0..dim {
                    let s = sc.get(a, b, k) + sc.get(b, a, k);
                    if s.abs() > 0.0 {
                        return Err(Error::Validation(format!(
                            "antisymmetry violated at (a={a}, b={b}, k={k})"
                        )));
                    }
                }
            }
        }
        let j = sc.jacobi_residual();
        if j > JACOBI_TOL {
            return Err(Error::Validation(format!("Jacobi identity violated: residual {j:.3e}")));
        }
        Ok(sc)
    }

    /// Builds from `(a, b, k, value)` entries; the `(b, a, k)` partner is
    /// filled in with the opposite sign when absent.
    pub fn from_triplets(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        let mut set = vec![false; dim * dim * dim];
        let idx = |a: usize, b: usize, k: usize| (a * dim + b) * dim + k;
        for &(a, b, k, v) in entries {
            if a >= dim || b >= dim || k >= dim {
                return Err(Error::InvalidArgument(format!(
                    "index ({a}, {b}, {k}) out of range for dimension {dim}"
                )));
            }
            if a == b && v != 0.0 {
                return Err(Error::Validation(format!("c[{a}][{a}][{k}] must vanish")));
            }
            for (i, val) in [(idx(a, b, k), v), (idx(b, a, k), -v)] {
                if set[i] && c[i] != val {
                    return Err(Error::Validation(format!(
                        "inconsistent entries for ({a}, {b}, {k})"
                    )));
                }
            }
            c[idx(a, b, k)] = v;
            c[idx(b, a, k)] = -v;
            set[idx(a, b, k)] = true;
            set[idx(b, a, k)] = true;
        }
        Self::new(dim, c)
    }

    /// so(3) with `[L_i, L_j] = i ε_ijk L_k`.
    pub fn so3() -> Self {
        Self::from_triplets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])
            .expect("so(3) constants are valid")
    }

    /// Abelian algebra ℝⁿ.
    pub fn abelian(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim * dim * dim]).expect("abelian constants are valid")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, k: usize) -> f64 {
        self.c[(a * self.dim + b) * self.dim + k]
    }

    /// Nonzero entries with `a < b`, in index order.
    pub fn triplets(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for b in a + 1..self.dim {
                for k in 0..self.dim {
                    let v = self.get(a, b, k);
                    if v != 0.0 {
                        out.push((a, b, k, v));
                    }
                }
            }
        }
        out
    }

    /// Largest violation of the Jacobi identity over all index quadruples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for e in 0..n {
                    for k in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.get(a, b, m) * self.get(m, e, k)
                                + self.get(b, e, m) * self.get(m, a, k)
                                + self.get(e, a, m) * self.get(m, b, k);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Matrix of `ad_B` acting on coefficient vectors:
    /// `(ad_B)_{kj} = Σ_b B_b c[b][j][k]`.
    pub fn ad(&self, b: &AlgebraElement) -> Result<DMatrix<f64>> {
        check_dim(self.dim, b.0.len())?;
        let n = self.dim;
        Ok(DMatrix::from_fn(n, n, |k, j| (0..n).map(|bb| b.0[bb] * self.get(bb, j, k)).sum()))
    }
}

/// Element of the abstract algebra, as coefficients in the basis `E_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(pub DVector<f64>);

impl AlgebraElement {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(DVector::from_vec(coeffs))
    }

    pub fn basis(dim: usize, a: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[a] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Classical density: a point of the dual, `rho[a] = ρ(E_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(pub DVector<f64>);

impl Density {
    pub fn new(rho: Vec<f64>) -> Self {
        Self(DVector::from_vec(rho))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Pairing `ρ(A)`.
    pub fn eval(&self, a: &AlgebraElement) -> f64 {
        self.0.dot(&a.0)
    }
}

/// Lie bracket of coefficient vectors: `result[k] = Σ A[a] B[b] c[a][b][k]`.
pub fn bracket(sc: &StructureConstants, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    check_dim(sc.dim, a.dim())?;
    check_dim(sc.dim, b.dim())?;
    let n = sc.dim;
    let mut out = DVector::zeros(n);
    for i in 0..n {
        if a.0[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if b.0[j] == 0.0 {
                continue;
            }
            let w = a.0[i] * b.0[j];
            for k in 0..n {
                out[k] += w * sc.get(i, j, k);
            }
        }
    }
    Ok(AlgebraElement(out))
}

/// Poisson tensor `σ_ab(ρ) = Σ_k c[a][b][k] ρ_k`, i.e. the brackets
/// `{𝒜_a, 𝒜_b}` of the linear coordinate functions at `ρ`.
pub fn poisson_matrix(sc: &StructureConstants, rho: &Density) -> Result<DMatrix<f64>> {
    check_dim(sc.dim, rho.dim())?;
    let n = sc.dim;
    Ok(DMatrix::from_fn(n, n, |a, b| (0..n).map(|k| sc.get(a, b, k) * rho.0[k]).sum()))
}

/// Rank of the Poisson tensor (the orbit dimension) and a basis of its
/// kernel (the isotropy directions).
#[derive(Debug, Clone)]
pub struct OrbitAnalysis {
    pub rank: usize,
    pub kernel_basis: Vec<AlgebraElement>,
    pub singular_values: Vec<f64>,
}

impl OrbitAnalysis {
    pub fn orbit_dim(&self) -> usize {
        self.rank
    }

    /// Distance of `v` from the span of the kernel basis.
    pub fn distance_from_kernel(&self, v: &DVector<f64>) -> f64 {
        let mut r = v.clone();
        for k in &self.kernel_basis {
            r -= &k.0 * k.0.dot(v);
        }
        r.norm()
    }
}

pub fn orbit_analysis(sc: &StructureConstants, rho: &Density) -> Result<OrbitAnalysis> {
    let sigma = poisson_matrix(sc, rho)?;
    let RankKernel { rank, kernel, singular_values } = rank_kernel(&sigma);
    Ok(OrbitAnalysis {
        rank,
        kernel_basis: kernel.into_iter().map(AlgebraElement).collect(),
        singular_values,
    })
}

/// `ρ̇ = σ(ρ) ∇H`.
pub fn lie_poisson_rhs(sc: &StructureConstants, rho: &Density, grad_h: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(sc.dim, grad_h.len())?;
    Ok(poisson_matrix(sc, rho)? * grad_h)
}

/// Bracket of two functions on the dual given their gradients at `ρ`.
pub fn lie_poisson_bracket(
    sc: &StructureConstants,
    rho: &Density,
    grad_f: &DVector<f64>,
    grad_g: &DVector<f64>,
) -> Result<f64> {
    check_dim(sc.dim, grad_f.len())?;
    Ok(grad_f.dot(&lie_poisson_rhs(sc, rho, grad_g)?))
}

/// Coadjoint action of `g = exp(-i θ B̂)` computed from the structure
/// constants: `ρ_g = exp(θ ad_B)ᵀ ρ`.
pub fn coadjoint_exp(sc: &StructureConstants, rho: &Density, b: &AlgebraElement, theta: f64) -> Result<Density> {
    check_dim(sc.dim, rho.dim())?;
    let ad = sc.ad(b)? * theta;
    let e = ad.exp();
    Ok(Density(e.transpose() * &rho.0))
}

fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn unitary_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - CMatrix::identity(n, n)).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn cmax(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    // Tr(AB) without forming the product
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Hermitian generators `Ĝ_a` closing on the structure constants.
#[derive(Debug, Clone)]
pub struct MatrixRepresentation {
    sc: StructureConstants,
    generators: Vec<CMatrix>,
}

impl MatrixRepresentation {
    pub fn new(sc: StructureConstants, generators: Vec<CMatrix>) -> Result<Self> {
        check_dim(sc.dim(), generators.len())?;
        let d = generators[0].nrows();
        for (a, g) in generators.iter().enumerate() {
            if g.nrows() != d || g.ncols() != d {
                return Err(Error::Validation(format!("generator {a} is not {d}x{d}")));
            }
            let h = hermitian_defect(g);
            if h > HERMITIAN_TOL {
                return Err(Error::Validation(format!("generator {a} not Hermitian ({h:.3e})")));
            }
        }
        let n = sc.dim();
        let i = Complex64::new(0.0, 1.0);
        for a in 0..n {
            for b in 0..n {
                let comm = &generators[a] * &generators[b] - &generators[b] * &generators[a];
                let mut rhs = CMatrix::zeros(d, d);
                for (k, g) in generators.iter().enumerate() {
                    let c = sc.get(a, b, k);
                    if c != 0.0 {
                        rhs += g * (i * c);
                    }
                }
                let r = cmax(&(comm - rhs));
                if r > CLOSURE_TOL {
                    return Err(Error::Validation(format!(
                        "commutator [G_{a}, G_{b}] does not close on the structure constants ({r:.3e})"
                    )));
                }
            }
        }
        Ok(Self { sc, generators })
    }

    /// Spin-`j` representation of so(3) in the `J_z` eigenbasis ordered
    /// `m = j, j-1, …, -j`.
    pub fn spin(two_j: usize) -> Self {
        let d = two_j + 1;
        let j = two_j as f64 / 2.0;
        let m = |i: usize| j - i as f64;
        let mut jp = CMatrix::zeros(d, d); // raising: <m+1|J+|m>
        for col in 1..d {
            let mm = m(col);
            jp[(col - 1, col)] = Complex64::new((j * (j + 1.0) - mm * (mm + 1.0)).sqrt(), 0.0);
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm) * Complex64::new(0.5, 0.0);
        let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
        let jz = CMatrix::from_fn(d, d, |r, c| if r == c { Complex64::new(m(r), 0.0) } else { Complex64::new(0.0, 0.0) });
        Self::new(StructureConstants::so3(), vec![jx, jy, jz]).expect("spin matrices close on so(3)")
    }

    pub fn spin1() -> Self {
        Self::spin(2)
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.sc
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn dim_alg(&self) -> usize {
        self.generators.len()
    }

    pub fn dim_hilbert(&self) -> usize {
        self.generators[0].nrows()
    }

    /// `Â = Σ_a A_a Ĝ_a`.
    pub fn represent(&self, a: &AlgebraElement) -> Result<CMatrix> {
        check_dim(self.dim_alg(), a.dim())?;
        let d = self.dim_hilbert();
        let mut m = CMatrix::zeros(d, d);
        for (g, &x) in self.generators.iter().zip(a.0.iter()) {
            m += g * Complex64::new(x, 0.0);
        }
        Ok(m)
    }

    /// Unitary `exp(-i θ Â)` via the Hermitian eigendecomposition.
    pub fn group_element(&self, a: &AlgebraElement, theta: f64) -> Result<CMatrix> {
        let h = self.represent(a)?;
        Ok(unitary_exp(&h, theta))
    }
}

/// `exp(-i θ H)` for Hermitian `H`.
pub fn unitary_exp(h: &CMatrix, theta: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| {
        if r == c {
            Complex64::from_polar(1.0, -theta * eig.eigenvalues[r])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    v * d * v.adjoint()
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct QuantalDensity(CMatrix);

impl QuantalDensity {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Validation("density must be a nonempty square matrix".into()));
        }
        let h = hermitian_defect(&m);
        if h > HERMITIAN_TOL {
            return Err(Error::Validation(format!("density not Hermitian ({h:.3e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Validation(format!("density trace {tr} is not 1")));
        }
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let lo = herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if lo < -1e-12 {
            return Err(Error::Validation(format!("density has negative eigenvalue {lo:.3e}")));
        }
        Ok(Self(m))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let u = psi / Complex64::new(n, 0.0);
        Self::new(&u * u.adjoint())
    }

    /// Diagonal density with the given probabilities.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let n = p.len();
        Self::new(CMatrix::from_fn(n, n, |r, c| {
            if r == c { Complex64::new(p[r], 0.0) } else { Complex64::new(0.0, 0.0) }
        }))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }
}

/// Weighted finite set of unitaries standing in for the invariant measure
/// of a stability subgroup.
#[derive(Debug, Clone)]
pub struct FiniteGroupAction {
    elements: Vec<CMatrix>,
    weights: Vec<f64>,
}

impl FiniteGroupAction {
    pub fn new(elements: Vec<CMatrix>, weights: Vec<f64>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Validation("group action needs at least one element".into()));
        }
        check_dim(elements.len(), weights.len())?;
        let d = elements[0].nrows();
        for (i, e) in elements.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::Validation(format!("element {i} is not {d}x{d}")));
            }
            let u = unitary_defect(e);
            if u > UNITARY_TOL {
                return Err(Error::Validation(format!("element {i} not unitary ({u:.3e})")));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Validation("weights must be non-negative".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("weights sum to {s}, not 1")));
        }
        Ok(Self { elements, weights })
    }

    pub fn uniform(elements: Vec<CMatrix>) -> Result<Self> {
        let n = elements.len();
        Self::new(elements, vec![1.0 / n as f64; n])
    }

    /// `n` uniform samples `exp(-i φ Â)`, `φ = period·j/n`, of a compact
    /// one-parameter subgroup.
    pub fn one_parameter(rep: &MatrixRepresentation, a: &AlgebraElement, period: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        let h = rep.represent(a)?;
        let elements = (0..n).map(|j| unitary_exp(&h, period * j as f64 / n as f64)).collect();
        Self::uniform(elements)
    }

    pub fn trivial(dim_hilbert: usize) -> Self {
        Self { elements: vec![CMatrix::identity(dim_hilbert, dim_hilbert)], weights: vec![1.0] }
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Moment map at the density level: `ρ[a] = Re Tr(ρ̂ Ĝ_a)`.
pub fn density_from_matrix(rep: &MatrixRepresentation, rhohat: &QuantalDensity) -> Result<Density> {
    check_dim(rep.dim_hilbert(), rhohat.dim())?;
    Ok(Density(DVector::from_iterator(
        rep.dim_alg(),
        rep.generators.iter().map(|g| trace_product(&rhohat.0, g).re),
    )))
}

/// `ρ̂_g = T(g⁻¹) ρ̂ T(g)` for unitary `g`.
pub fn conjugate_density(rep: &MatrixRepresentation, rhohat: &QuantalDensity, g: &CMatrix) -> Result<QuantalDensity> {
    check_dim(rep.dim_hilbert(), rhohat.dim())?;
    check_dim(rep.dim_hilbert(), g.nrows())?;
    let u = unitary_defect(g);
    if u > UNITARY_TOL {
        return Err(Error::Validation(format!("group element not unitary ({u:.3e})")));
    }
    let m = g.adjoint() * &rhohat.0 * g;
    // restore exact Hermiticity lost to rounding
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    QuantalDensity::new(m)
}

/// `ρ̂' = Σ_h w_h ρ̂_h`.
pub fn gauge_average(rep: &MatrixRepresentation, rhohat: &QuantalDensity, k: &FiniteGroupAction) -> Result<QuantalDensity> {
    check_dim(rep.dim_hilbert(), rhohat.dim())?;
    let d = rhohat.dim();
    let mut acc = CMatrix::zeros(d, d);
    for (h, &w) in k.elements.iter().zip(&k.weights) {
        acc += conjugate_density(rep, rhohat, h)?.0 * Complex64::new(w, 0.0);
    }
    let acc = (&acc + acc.adjoint()) * Complex64::new(0.5, 0.0);
    QuantalDensity::new(acc)
}

/// Default sample count for averaging over a compact one-parameter group.
pub const COMPACT_SAMPLES: usize = 64;
/// Largest accepted change between `N` and `2N` sample averages.
pub const COMPACT_AVERAGE_TOL: f64 = 1e-10;

/// Averages `ρ̂` over the circle group `exp(-iφÂ)`, `φ ∈ [0, period)`, with
/// [`COMPACT_SAMPLES`] uniform samples and again with twice as many. Fails
/// when the two disagree by more than [`COMPACT_AVERAGE_TOL`]; otherwise
/// returns the finer average and the observed difference.
pub fn gauge_average_compact(
    rep: &MatrixRepresentation,
    rhohat: &QuantalDensity,
    a: &AlgebraElement,
    period: f64,
) -> Result<(QuantalDensity, f64)> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    let coarse = gauge_average(rep, rhohat, &FiniteGroupAction::one_parameter(rep, a, period, COMPACT_SAMPLES)?)?;
    let fine = gauge_average(rep, rhohat, &FiniteGroupAction::one_parameter(rep, a, period, 2 * COMPACT_SAMPLES)?)?;
    let diff = cmax(&(coarse.matrix() - fine.matrix()));
    if diff > COMPACT_AVERAGE_TOL {
        return Err(Error::Numerical(format!(
            "group average not converged: {COMPACT_SAMPLES} and {} samples differ by {diff:.3e}",
            2 * COMPACT_SAMPLES
        )));
    }
    Ok((fine, diff))
}

/// Outcome of [`expectation_evolution_check`].
#[derive(Debug, Clone, Copy)]
pub struct EvolutionCheck {
    pub residual: f64,
    pub well_defined: bool,
}

/// Largest change of `Tr(ρ̂_h [Ĝ_a, Ĥ])` over `h ∈ K` and all generators.
/// A zero residual means the expectation velocities are constant on the
/// `K`-fibre, so they descend to functions on the coadjoint orbit.
pub fn expectation_evolution_check(
    rep: &MatrixRepresentation,
    rhohat: &QuantalDensity,
    hhat: &CMatrix,
    k: &FiniteGroupAction,
    tol: f64,
) -> Result<EvolutionCheck> {
    check_dim(rep.dim_hilbert(), hhat.nrows())?;
    let h = hermitian_defect(hhat);
    if h > HERMITIAN_TOL {
        return Err(Error::Validation(format!("Hamiltonian not Hermitian ({h:.3e})")));
    }
    let comms: Vec<CMatrix> = rep.generators.iter().map(|g| g * hhat - hhat * g).collect();
    let base: Vec<Complex64> = comms.iter().map(|c| trace_product(&rhohat.0, c)).collect();
    let mut residual = 0.0_f64;
    for el in &k.elements {
        let rh = conjugate_density(rep, rhohat, el)?;
        for (c, b) in comms.iter().zip(&base) {
            residual = residual.max((trace_product(&rh.0, c) - b).norm());
        }
    }
    Ok(EvolutionCheck { residual, well_defined: residual < tol })
}

/// Checks the energy condition `Tr(ρ̂_{hg} Ĥ) = Tr(ρ̂_g Ĥ)` for every
/// `h ∈ K` and every supplied `g`; returns the largest violation.
pub fn energy_fibre_variation(
    rep: &MatrixRepresentation,
    rhohat: &QuantalDensity,
    hhat: &CMatrix,
    k: &FiniteGroupAction,
    gs: &[CMatrix],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for g in gs {
        let rg = conjugate_density(rep, rhohat, g)?;
        let eg = trace_product(rg.matrix(), hhat).re;
        for h in &k.elements {
            let rhg = conjugate_density(rep, &conjugate_density(rep, rhohat, h)?, g)?;
            worst = worst.max((trace_product(rhg.matrix(), hhat).re - eg).abs());
        }
    }
    Ok(worst)
}
