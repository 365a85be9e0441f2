//! Adiabatic switching for a finite spectrum `H(t) = H₀ + x e^{εt} V`.
//!
//! The state started in the non-degenerate level `|0⟩` is written as
//!
//! ```text
//! |ψ(t)⟩ = e^{−iE₀t} e^{−iG(t)} (|0⟩ + |δψ(t)⟩),   ⟨0|δψ⟩ = 0,   G' = ξ(t)
//! ```
//!
//! and both `ξ` and `δψ` are expanded in powers of `λ = x e^{εt}`. Because
//! `d(λ^n)/dt = nελ^n`, order `n` of the projected equation has the resolvent
//! `R_n = 1/((H₀ − E₀) − inε)`:
//!
//! ```text
//! |φ_n⟩ = −R_n [QV|φ_{n−1}⟩ − Σ_{m<n} ξ_{n−m}|φ_m⟩],   |φ_0⟩ = |0⟩
//! ξ_n   = ⟨0|V|φ_{n−1}⟩
//! ```
//!
//! Every coefficient is finite at `ε = 0`; the only divergence is the
//! `1/ε` in `G = Σ x^n e^{nεt} ξ_n /(nε)`, which [`g_split`] isolates.
//! Here "level 0" means `ground_index`, which need not be the lowest level.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numkit::linalg::norm;
use crate::numkit::{hermitian_eig, ode_evolve_with, HermitianMatrix, Jet, OdeOptions, Trajectory};

pub const DEFAULT_JET_ORDER: usize = 2;
/// Largest tolerated imaginary residue on `G_a`, `ΔE`, `G_b`.
pub const REALITY_LIMIT: f64 = 1e-9;
/// Relative gap floor: levels closer than this times the spectral range
/// count as degenerate.
pub const GAP_FLOOR_REL: f64 = 1e-8;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct NStateModel {
    energies: Vec<f64>,
    v: HermitianMatrix,
    x: f64,
    eps: f64,
    ground_index: usize,
    gap_floor: f64,
}

impl NStateModel {
    pub fn new(energies: Vec<f64>, v: HermitianMatrix, x: f64, eps: f64, ground_index: usize) -> Result<Self> {
        let range = spectral_range(&energies);
        Self::with_gap_floor(energies, v, x, eps, ground_index, GAP_FLOOR_REL * range)
    }

    pub fn with_gap_floor(
        energies: Vec<f64>,
        v: HermitianMatrix,
        x: f64,
        eps: f64,
        ground_index: usize,
        gap_floor: f64,
    ) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::invalid("energies", "need at least one level"));
        }
        if let Some(i) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::invalid("energies", format!("entry {i} is not finite")));
        }
        if v.dim() != energies.len() {
            return Err(Error::invalid(
                "v",
                format!("perturbation is {0}x{0} but there are {1} energies", v.dim(), energies.len()),
            ));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid("x", format!("must be > 0, got {x}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
        }
        if ground_index >= energies.len() {
            return Err(Error::invalid(
                "ground_index",
                format!("{ground_index} out of range for {} levels", energies.len()),
            ));
        }
        if !(gap_floor >= 0.0) {
            return Err(Error::invalid("gap_floor", "must be non-negative"));
        }
        let model = NStateModel { energies, v, x, eps, ground_index, gap_floor };
        model.check_nondegenerate()?;
        Ok(model)
    }

    fn check_nondegenerate(&self) -> Result<()> {
        let g = self.ground_index;
        for (j, &e) in self.energies.iter().enumerate() {
            if j == g {
                continue;
            }
            let gap = (e - self.energies[g]).abs();
            if gap == 0.0 || gap < self.gap_floor {
                return Err(Error::Degeneracy { i: g, j, gap, floor: self.gap_floor });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
    pub fn v(&self) -> &HermitianMatrix {
        &self.v
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn ground_index(&self) -> usize {
        self.ground_index
    }
    pub fn gap_floor(&self) -> f64 {
        self.gap_floor
    }
    pub fn ground_energy(&self) -> f64 {
        self.energies[self.ground_index]
    }

    /// `min_{n≠0} |E_n − E_0|`; infinite for a single level.
    pub fn min_gap(&self) -> f64 {
        let e0 = self.ground_energy();
        self.energies
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != self.ground_index)
            .map(|(_, e)| (e - e0).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn with_x(&self, x: f64) -> Result<Self> {
        Self::with_gap_floor(self.energies.clone(), self.v.clone(), x, self.eps, self.ground_index, self.gap_floor)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::with_gap_floor(self.energies.clone(), self.v.clone(), self.x, eps, self.ground_index, self.gap_floor)
    }

    /// `H₀ + xV`.
    pub fn hamiltonian(&self) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&self.energies)
            .add_scaled(self.x, &self.v)
            .expect("dimensions checked at construction")
    }

    fn unit(&self) -> Vec<C64> {
        let mut u = vec![C64::default(); self.dim()];
        u[self.ground_index] = C64::new(1.0, 0.0);
        u
    }
}

fn spectral_range(e: &[f64]) -> f64 {
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if e.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Second-order Dyson expansion of `e^{iE₀t}|ψ(t)⟩` at finite ε.
#[derive(Debug, Clone, PartialEq)]
pub struct Dyson2 {
    /// `c_0 + x c_1 + x² c_2`.
    pub vector: Vec<C64>,
    /// Coefficients of `x⁰`, `x¹`, `x²`.
    pub terms: [Vec<C64>; 3],
    /// `E₀`: the omitted global factor is `e^{−iE₀t}`.
    pub phase_energy: f64,
}

/// Dyson series through `x²`, time integrals done in closed form:
///
/// ```text
/// c_1[n] = −i e^{εt} V_{n0} / (iω_n + ε)
/// c_2[n] = −e^{2εt} Σ_m V_{nm} V_{m0} / ((iω_n + 2ε)(iω_m + ε)),   ω_n = E_n − E₀
/// ```
///
/// The `m = 0` and `n = 0` terms carry the `1/ε` and `1/ε²` factors
/// (`V₀₀/ε`, `V₀₀²/(2ε²)`, `V₀ₘV_{m0}/(2ε(iω_m + ε))`, `V_{n0}V₀₀/((iω_n+2ε)ε)`).
pub fn dyson2(model: &NStateModel, t: f64) -> Dyson2 {
    let n = model.dim();
    let g = model.ground_index;
    let eps = model.eps;
    let e0 = model.ground_energy();
    let omega: Vec<f64> = model.energies.iter().map(|e| e - e0).collect();
    let v = &model.v;
    let growth = (eps * t).exp();

    let c0 = model.unit();
    let c1: Vec<C64> = (0..n).map(|k| -I * growth * v[(k, g)] / C64::new(eps, omega[k])).collect();
    let c2: Vec<C64> = (0..n)
        .map(|k| {
            let outer = C64::new(2.0 * eps, omega[k]);
            let s: C64 = (0..n).map(|m| v[(k, m)] * v[(m, g)] / (outer * C64::new(eps, omega[m]))).sum();
            -s * growth * growth
        })
        .collect();
    let x = model.x;
    let vector = (0..n).map(|k| c0[k] + c1[k] * x + c2[k] * (x * x)).collect();
    Dyson2 { vector, terms: [c0, c1, c2], phase_energy: e0 }
}

/// `ξ_n` and `|φ_n⟩` as jets in ε about `base_eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct RsExpansion {
    xi: Vec<Jet>,
    phi: Vec<Vec<Jet>>,
    pub order: usize,
    pub jet_order: usize,
    pub base_eps: f64,
    pub ground_index: usize,
}

impl RsExpansion {
    /// `ξ_n` for `n ≥ 1`.
    pub fn xi(&self, n: usize) -> &Jet {
        &self.xi[n - 1]
    }

    pub fn xi_value(&self, n: usize) -> C64 {
        self.xi(n).value()
    }

    /// Components of `|φ_n⟩` for `n ≥ 1`.
    pub fn phi(&self, n: usize) -> &[Jet] {
        &self.phi[n - 1]
    }

    pub fn phi_value(&self, n: usize) -> Vec<C64> {
        self.phi(n).iter().map(Jet::value).collect()
    }

    /// Jet coefficient `k` of every component of `|φ_n⟩`.
    pub fn phi_coeff(&self, n: usize, k: usize) -> Vec<C64> {
        self.phi(n).iter().map(|j| j.coeff(k)).collect()
    }
}

/// Recursion expanded about `ε = 0`.
pub fn rs_recursion(model: &NStateModel, order: usize, jet_order: usize) -> Result<RsExpansion> {
    rs_recursion_at(model, order, jet_order, 0.0)
}

/// Recursion with ε carried as the jet `base_eps + h`; `jet_order = 0` gives
/// exact values at finite ε.
pub fn rs_recursion_at(model: &NStateModel, order: usize, jet_order: usize, base_eps: f64) -> Result<RsExpansion> {
    if order < 1 {
        return Err(Error::Contract("recursion order must be at least 1".into()));
    }
    if !(base_eps >= 0.0 && base_eps.is_finite()) {
        return Err(Error::Domain(format!("expansion point must be ε ≥ 0, got {base_eps}")));
    }
    model.check_nondegenerate()?;
    let dim = model.dim();
    let g = model.ground_index;
    let e0 = model.ground_energy();
    let v = &model.v;
    let zero = Jet::zero(jet_order);

    let apply_v = |psi: &[Jet]| -> Vec<Jet> {
        (0..dim)
            .map(|i| {
                let mut acc = Jet::zero(jet_order);
                for (k, pk) in psi.iter().enumerate() {
                    let vik = v[(i, k)];
                    if vik != C64::default() {
                        acc += &pk.scale(vik);
                    }
                }
                acc
            })
            .collect()
    };

    let mut phi0 = vec![zero.clone(); dim];
    phi0[g] = Jet::one(jet_order);

    let mut xi: Vec<Jet> = Vec::with_capacity(order);
    let mut phi: Vec<Vec<Jet>> = Vec::with_capacity(order);
    for n in 1..=order {
        let prev = if n == 1 { &phi0 } else { &phi[n - 2] };
        let vprev = apply_v(prev);
        xi.push(vprev[g].clone());

        let nf = n as f64;
        let mut next = Vec::with_capacity(dim);
        for j in 0..dim {
            if j == g {
                next.push(zero.clone());
                continue;
            }
            let mut w = vprev[j].clone();
            for m in 1..n {
                w -= &(&xi[n - m - 1] * &phi[m - 1][j]);
            }
            let den = Jet::affine(C64::new(model.energies[j] - e0, -nf * base_eps), C64::new(0.0, -nf), jet_order);
            next.push(-(&w * &den.recip()?));
        }
        phi.push(next);
    }
    Ok(RsExpansion { xi, phi, order, jet_order, base_eps, ground_index: g })
}

/// Split of `G(t)` as `ε → 0`: `G = G_a/ε + ΔE·t + iG_b + O(ε)`.
///
/// `G_a` and `ΔE` are real for any Hermitian `V`. `G_b` is real only when
/// `V` is real symmetric; otherwise `−i Σ x^n ξ_n'(0)/n` also has a finite
/// imaginary part, a constant phase on the continued state, kept here as
/// `g_b_phase`. `e^{g_b}` alone fixes the normalization either way.
#[derive(Debug, Clone, PartialEq)]
pub struct GSplit {
    pub g_a: f64,
    pub delta_e: f64,
    pub g_b: f64,
    /// `Im G_b`; identically zero for real symmetric `V`.
    pub g_b_phase: f64,
    pub order: usize,
    /// `|x^N ξ_N(0)|` for the last included term.
    pub last_term: f64,
    /// Largest imaginary part among the fields that must be real.
    pub imag_residue: f64,
}

pub fn g_split(model: &NStateModel, order: usize) -> Result<GSplit> {
    let rs = rs_recursion(model, order, 1)?;
    split_from(model, &rs)
}

fn split_from(model: &NStateModel, rs: &RsExpansion) -> Result<GSplit> {
    let x = model.x;
    let (mut g_a, mut de, mut g_b) = (C64::default(), C64::default(), C64::default());
    let mut pow = 1.0;
    let mut last_term = 0.0;
    for n in 1..=rs.order {
        pow *= x;
        let xi = rs.xi(n);
        let nf = n as f64;
        g_a += xi.value() * (pow / nf);
        de += xi.value() * pow;
        g_b += -I * xi.coeff(1) * (pow / nf);
        last_term = (xi.value() * pow).norm();
    }
    let mut checked = vec![("G_a", g_a), ("ΔE", de)];
    if model.v.is_real() {
        checked.push(("G_b", g_b));
    }
    let mut imag_residue: f64 = 0.0;
    for (field, z) in checked {
        imag_residue = imag_residue.max(z.im.abs());
        if z.im.abs() > REALITY_LIMIT {
            return Err(Error::Consistency { field: field.into(), imag: z.im, limit: REALITY_LIMIT });
        }
    }
    let g_b_phase = if model.v.is_real() { 0.0 } else { g_b.im };
    Ok(GSplit { g_a: g_a.re, delta_e: de.re, g_b: g_b.re, g_b_phase, order: rs.order, last_term, imag_residue })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledState {
    /// `e^{G_b}(|0⟩ + Σ x^n |φ_n⟩_{ε=0})` with the complex `G_b`, without
    /// `e^{−iG_a/ε}` and the time dependence `e^{−i(E₀+ΔE)t}`.
    pub state: Vec<C64>,
    pub split: GSplit,
    /// `E₀ + ΔE`, the frequency of the remaining time dependence.
    pub energy: f64,
}

pub fn assemble_state(model: &NStateModel, order: usize) -> Result<AssembledState> {
    let rs = rs_recursion(model, order, 1)?;
    let split = split_from(model, &rs)?;
    let mut state = model.unit();
    let mut pow = 1.0;
    for n in 1..=order {
        pow *= model.x;
        for (s, p) in state.iter_mut().zip(rs.phi(n)) {
            *s += p.value() * pow;
        }
    }
    let scale = C64::new(split.g_b, split.g_b_phase).exp();
    for s in &mut state {
        *s *= scale;
    }
    Ok(AssembledState { state, energy: model.ground_energy() + split.delta_e, split })
}

/// `|0⟩ + Σ_{n≤order} x^n |φ_n⟩_{ε=0}`, unnormalized.
pub fn correction_vector(model: &NStateModel, order: usize) -> Result<Vec<C64>> {
    let rs = rs_recursion(model, order, 0)?;
    let mut state = model.unit();
    let mut pow = 1.0;
    for n in 1..=order {
        pow *= model.x;
        for (s, p) in state.iter_mut().zip(rs.phi(n)) {
            *s += p.value() * pow;
        }
    }
    Ok(state)
}

/// Coefficients of `x^k`, `k = 0..=max_power`, of `e^{−iG(t)}(|0⟩ + |δψ(t)⟩)`
/// at the model's finite ε, with `G = Σ x^n e^{nεt} ξ_n/(nε)` and
/// `δψ = Σ x^n e^{nεt} φ_n`. Comparable term by term with [`dyson2`].
pub fn phase_form_coefficients(model: &NStateModel, t: f64, max_power: usize) -> Result<Vec<Vec<C64>>> {
    let dim = model.dim();
    let eps = model.eps;
    let growth = (eps * t).exp();
    let rs = rs_recursion_at(model, max_power.max(1), 0, eps)?;

    // S = −iG as a power series in x
    let mut s = vec![C64::default(); max_power + 1];
    for n in 1..=max_power {
        s[n] = -I * rs.xi_value(n) * growth.powi(n as i32) / (n as f64 * eps);
    }
    // exp(S): E_k = (1/k) Σ_{j=1}^{k} j S_j E_{k−j}
    let mut e = vec![C64::default(); max_power + 1];
    e[0] = C64::new(1.0, 0.0);
    for k in 1..=max_power {
        let mut acc = C64::default();
        for j in 1..=k {
            acc += s[j] * e[k - j] * j as f64;
        }
        e[k] = acc / k as f64;
    }
    let mut d: Vec<Vec<C64>> = vec![model.unit()];
    for n in 1..=max_power {
        let gn = growth.powi(n as i32);
        d.push(rs.phi_value(n).into_iter().map(|c| c * gn).collect());
    }
    Ok((0..=max_power)
        .map(|k| {
            (0..dim).map(|i| (0..=k).map(|j| e[k - j] * d[j][i]).sum()).collect()
        })
        .collect())
}

/// Start time at which `x·max|V_{nm}|·e^{εt₀} / min_gap = start_threshold`.
/// For the two-level embedding this coincides with the two-state rule.
pub fn start_time(model: &NStateModel, start_threshold: f64) -> f64 {
    let vmax = model.v.max_abs();
    let vmax = if vmax > 0.0 { vmax } else { 1.0 };
    let gap = model.min_gap();
    let gap = if gap.is_finite() { gap } else { 1.0 };
    (start_threshold * gap / (model.x * vmax)).ln() / model.eps
}

/// Schrödinger evolution from `|0⟩` at [`start_time`] to `t_end`.
///
/// Integration runs in the interaction picture; recorded states are mapped
/// back to the Schrödinger picture with `e^{−iE_n t}` per component.
pub fn evolve_nstate(model: &NStateModel, t_end: f64, tol: f64, start_threshold: f64) -> Result<Trajectory> {
    let mut opts = OdeOptions::new(tol);
    let range = spectral_range(&model.energies);
    if range > 0.0 {
        opts.max_step = Some(std::f64::consts::PI / (4.0 * range));
    }
    evolve_nstate_with(model, t_end, start_threshold, &opts)
}

pub fn evolve_nstate_with(model: &NStateModel, t_end: f64, start_threshold: f64, opts: &OdeOptions) -> Result<Trajectory> {
    if !(start_threshold > 0.0 && start_threshold <= 1e-4) {
        return Err(Error::Domain(format!("start threshold must lie in (0, 1e-4], got {start_threshold}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let t0 = start_time(model, start_threshold);
    if !(t_end > t0) {
        return Err(Error::Domain(format!("end time {t_end} precedes the start time {t0}")));
    }
    let dim = model.dim();
    let energies = model.energies.clone();
    let v = model.v.clone();
    let (x, eps) = (model.x, model.eps);
    let rhs = (dim, move |t: f64, u: &[C64], out: &mut [C64]| {
        let lam = x * (eps * t).exp();
        let w: Vec<C64> = u.iter().zip(&energies).map(|(c, e)| c * C64::from_polar(1.0, -e * t)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = C64::default();
            for (j, wj) in w.iter().enumerate() {
                acc += v[(i, j)] * wj;
            }
            *o = -I * lam * C64::from_polar(1.0, energies[i] * t) * acc;
        }
    });
    let mut traj = ode_evolve_with(&rhs, &model.unit(), t0, t_end, opts)?;
    for (t, s) in traj.times.iter().zip(traj.states.iter_mut()) {
        for (c, e) in s.iter_mut().zip(&model.energies) {
            *c *= C64::from_polar(1.0, -e * t);
        }
    }
    Ok(traj)
}

/// `|⟨n|ψ⟩ / ⟨0|ψ⟩|` for every `n`; any global phase cancels.
pub fn component_ratios(state: &[C64], ground_index: usize) -> Vec<f64> {
    let d = state[ground_index];
    state.iter().map(|c| (c / d).norm()).collect()
}

/// Exact shift of the adiabatically continued level: the eigenvalue of
/// `H₀ + xV` whose eigenvector overlaps `|0⟩` most, minus `E₀`.
pub fn oracle_shift(model: &NStateModel) -> Result<f64> {
    Ok(oracle_state(model)?.0)
}

/// Shift and eigenvector of the continued level.
pub fn oracle_state(model: &NStateModel) -> Result<(f64, Vec<C64>)> {
    let eig = hermitian_eig(&model.hamiltonian())?;
    let g = model.ground_index;
    let (best, overlap) = eig
        .vectors
        .iter()
        .map(|v| v[g].norm_sqr())
        .enumerate()
        .fold((0, -1.0), |acc, (k, o)| if o > acc.1 { (k, o) } else { acc });
    if overlap < 0.5 {
        return Err(Error::Continuation { overlap });
    }
    let mut vec = eig.vectors[best].clone();
    // fix the phase so ⟨0|v⟩ is real and positive
    let ph = vec[g].conj() / vec[g].norm();
    for c in &mut vec {
        *c *= ph;
    }
    debug_assert!((norm(&vec) - 1.0).abs() < 1e-10);
    Ok((eig.values[best] - model.ground_energy(), vec))
}
