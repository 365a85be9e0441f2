//! The exactly solvable two-level model `H(t) = H₀ + x·e^{εt}·V` with
//! `H₀ = diag(μ−δ, μ+δ)` and `V = σ_x`.
//!
//! The system starts in the lower level at `t → −∞`. In the interaction
//! picture the first column `(a, c)` of the evolution operator obeys
//!
//! ```text
//! i a' = x e^{εt} e^{−2iδt} c,    i c' = x e^{εt} e^{2iδt} a.
//! ```
//!
//! Three routes to `a(t)` live here: direct integration
//! ([`evolve_two_state`]), the power series in `s = x e^{εt}/ε`
//! ([`bessel_series_a`]), which carries a `1/ε^k` factor in its `k`-th term,
//! and the phase ansatz `a = exp(−i f/ε)` ([`phase_f`]). The phase route
//! splits `f/ε` into a divergent constant, a secular term `ΔE·t` and a finite
//! normalization ([`phase_split`]), so the adiabatic limit of the state is
//! well defined once the constant phase is dropped ([`limit_state`]).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numkit::{ode_evolve_with, HermitianMatrix, Jet, OdeOptions, Trajectory};

/// Jet order used when nothing else is requested: value, first derivative
/// in ε, and one guard order for the `F_c` diagnostic.
pub const DEFAULT_JET_ORDER: usize = 2;
/// Series length whose first neglected term is below 1e-12 at `x/δ = 0.5`.
pub const DEFAULT_ORDER: usize = 30;
pub const DEFAULT_START_THRESHOLD: f64 = 1e-8;
/// Largest tolerated imaginary residue on a nominally real split field.
pub const REALITY_LIMIT: f64 = 1e-8;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateModel {
    mu: f64,
    delta: f64,
    x: f64,
    eps: f64,
}

impl TwoStateModel {
    pub fn new(mu: f64, delta: f64, x: f64, eps: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid("x", format!("must be > 0, got {x}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
        }
        Ok(TwoStateModel { mu, delta, x, eps })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.mu, self.delta, self.x, eps)
    }

    /// `[[μ−δ, x], [x, μ+δ]]`, the static Hamiltonian at full coupling.
    pub fn hamiltonian(&self) -> HermitianMatrix {
        let c = |v: f64| C64::new(v, 0.0);
        HermitianMatrix::new(2, vec![c(self.mu - self.delta), c(self.x), c(self.x), c(self.mu + self.delta)])
            .expect("real symmetric 2x2 is Hermitian")
    }

    fn require_series_domain(&self) -> Result<()> {
        require_series_domain(self.delta, self.x)
    }
}

fn require_series_domain(delta: f64, x: f64) -> Result<()> {
    if !(delta > 0.0) || !(x > 0.0) {
        return Err(Error::Domain(format!("series need δ > 0 and x > 0, got δ = {delta}, x = {x}")));
    }
    if x >= delta {
        return Err(Error::Domain(format!(
            "x = {x} is outside the convergence radius of the coupling series (x < δ = {delta})"
        )));
    }
    Ok(())
}

/// `ΔE(x) = δ − √(δ² + x²)`, evaluated without cancellation.
pub fn delta_e_closed(delta: f64, x: f64) -> f64 {
    -x * x / (delta + (delta * delta + x * x).sqrt())
}

/// Closed-form eigensystem of [`TwoStateModel::hamiltonian`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateEigensystem {
    pub psi0: [C64; 2],
    pub e0: f64,
    pub psi1: [C64; 2],
    pub e1: f64,
    pub delta_e: f64,
    pub norm_n: f64,
}

pub fn exact_eigensystem(m: &TwoStateModel) -> TwoStateEigensystem {
    let de = delta_e_closed(m.delta, m.x);
    let ratio = de / m.x;
    let n = 1.0 / (1.0 + ratio * ratio).sqrt();
    TwoStateEigensystem {
        psi0: [C64::new(n, 0.0), C64::new(n * ratio, 0.0)],
        e0: (m.mu - m.delta) - de.abs(),
        psi1: [C64::new(-n * ratio, 0.0), C64::new(n, 0.0)],
        e1: (m.mu + m.delta) + de.abs(),
        delta_e: de,
        norm_n: n,
    }
}

/// Coefficients `g̃_n(ε)` of `g = Σ λ^{2n} g̃_n`, each carried as a jet in
/// `ε` about `base_eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct GtildeTable {
    entries: Vec<Jet>,
    pub delta: f64,
    pub base_eps: f64,
}

impl GtildeTable {
    /// `g̃_n` for `n ≥ 1`.
    pub fn get(&self, n: usize) -> &Jet {
        &self.entries[n - 1]
    }

    pub fn entries(&self) -> &[Jet] {
        &self.entries
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    /// `r_n = dg̃_n/dε` at the base point.
    pub fn r(&self, n: usize) -> C64 {
        self.get(n).coeff(1)
    }
}

/// Expansion of the `g̃_n` about `ε = 0`.
pub fn gtilde_table(delta: f64, order: usize, jet_order: usize) -> Result<GtildeTable> {
    if jet_order < 1 {
        return Err(Error::Contract("jet order must be at least 1".into()));
    }
    gtilde_table_at(delta, order, jet_order, 0.0)
}

/// Runs `g̃_1 = −i/(2iδ + ε)`, `g̃_n = i Σ_{m<n} g̃_{n−m} g̃_m / (2iδ + (2n−1)ε)`
/// with ε replaced by the jet `base_eps + h`. With `jet_order = 0` this is
/// the exact recursion at finite `ε = base_eps`.
pub fn gtilde_table_at(delta: f64, order: usize, jet_order: usize, base_eps: f64) -> Result<GtildeTable> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("δ must be > 0, got {delta}")));
    }
    if order < 1 {
        return Err(Error::Contract("series order must be at least 1".into()));
    }
    if !(base_eps >= 0.0 && base_eps.is_finite()) {
        return Err(Error::Domain(format!("expansion point must be ε ≥ 0, got {base_eps}")));
    }
    let denom = |n: usize| {
        let k = (2 * n - 1) as f64;
        Jet::affine(C64::new(k * base_eps, 2.0 * delta), C64::new(k, 0.0), jet_order)
    };
    let mut entries: Vec<Jet> = Vec::with_capacity(order);
    entries.push(denom(1).recip()? * (-I));
    for n in 2..=order {
        let mut conv = Jet::zero(jet_order);
        for m in 1..n {
            conv += &(&entries[n - m - 1] * &entries[m - 1]);
        }
        entries.push(&conv * &denom(n).recip()? * I);
    }
    Ok(GtildeTable { entries, delta, base_eps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaESeries {
    /// `partial_sums[k]` sums the first `k + 1` terms.
    pub partial_sums: Vec<f64>,
    pub value: f64,
}

/// `ΔE = Σ x^{2n} g̃_n(0)`, defined for `0 < x < δ`.
pub fn delta_e_series(delta: f64, x: f64, order: usize) -> Result<DeltaESeries> {
    require_series_domain(delta, x)?;
    let table = gtilde_table_at(delta, order, 0, 0.0)?;
    let x2 = x * x;
    let mut pow = 1.0;
    let mut sum = 0.0;
    let partial_sums: Vec<f64> = table
        .entries()
        .iter()
        .map(|g| {
            pow *= x2;
            sum += pow * g.value().re;
            sum
        })
        .collect();
    Ok(DeltaESeries { value: sum, partial_sums })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesselSeries {
    pub value: C64,
    /// `|term_k|` for `k = 0, 1, …` (term 0 is the leading 1).
    pub term_magnitudes: Vec<f64>,
    /// Last summed term below `1e-12·max(1, |value|)`.
    pub converged: bool,
    /// Stopped early because a term overflowed.
    pub overflowed: bool,
}

impl BesselSeries {
    pub fn max_term(&self) -> f64 {
        self.term_magnitudes.iter().skip(1).copied().fold(0.0, f64::max)
    }
}

const BESSEL_CONVERGED: f64 = 1e-12;

/// `a(t) = 1 + Σ_{k=1}^{terms} (−s²/4)^k / (k! Π_{j≤k}(j − ν))` with
/// `s = x e^{εt}/ε` and `ν = 1/2 − iδ/ε`.
///
/// Terms come from the ratio `term_k/term_{k−1} = (−s²/4)/(k(k − ν))`. For
/// small ε the terms grow enormously before they decay; if one overflows the
/// partial data is returned with `overflowed` set.
pub fn bessel_series_a(m: &TwoStateModel, t: f64, terms: usize) -> BesselSeries {
    bessel_sum(m, t, terms, None)
}

/// Like [`bessel_series_a`] but stops once a term drops below `term_tol`.
pub fn bessel_series_a_to_tol(m: &TwoStateModel, t: f64, term_tol: f64, max_terms: usize) -> BesselSeries {
    bessel_sum(m, t, max_terms, Some(term_tol))
}

fn bessel_sum(m: &TwoStateModel, t: f64, terms: usize, stop_below: Option<f64>) -> BesselSeries {
    let s = m.x * (m.eps * t).exp() / m.eps;
    let nu = C64::new(0.5, -m.delta / m.eps);
    let q = -s * s / 4.0;
    let mut term = C64::new(1.0, 0.0);
    let mut value = term;
    let mut mags = vec![1.0];
    let mut overflowed = false;
    for k in 1..=terms {
        let kf = k as f64;
        let next = term * q / ((kf - nu) * kf);
        let mag = next.norm();
        if !mag.is_finite() || mag > 1e300 {
            overflowed = true;
            break;
        }
        term = next;
        value += term;
        mags.push(mag);
        if stop_below.is_some_and(|tol| mag < tol) {
            break;
        }
    }
    let last = *mags.last().unwrap();
    let converged = !overflowed && mags.len() > 1 && last < BESSEL_CONVERGED * value.norm().max(1.0);
    BesselSeries { value, term_magnitudes: mags, converged, overflowed }
}

/// `f(t, ε) = Σ_{n≤order} x^{2n} e^{2nεt} g̃_n(ε)/(2n)` with `g̃_n` evaluated
/// exactly at the model's ε.
pub fn phase_f(m: &TwoStateModel, t: f64, order: usize) -> Result<C64> {
    let table = gtilde_table_at(m.delta, order, 0, m.eps)?;
    let lam2 = (m.x * (m.eps * t).exp()).powi(2);
    let mut pow = 1.0;
    Ok(table
        .entries()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            pow *= lam2;
            g.value() * (pow / (2.0 * (i + 1) as f64))
        })
        .sum())
}

/// `a(t) = exp(−i f(t, ε)/ε)`.
pub fn a_from_phase(m: &TwoStateModel, t: f64, order: usize) -> Result<C64> {
    Ok((-I * phase_f(m, t, order)? / m.eps).exp())
}

/// `g(t, ε) = Σ λ^{2n} g̃_n(ε)`, the logarithmic derivative `a'/a = −i g`.
pub fn phase_g(m: &TwoStateModel, t: f64, order: usize) -> Result<C64> {
    let table = gtilde_table_at(m.delta, order, 0, m.eps)?;
    let lam2 = (m.x * (m.eps * t).exp()).powi(2);
    let mut pow = 1.0;
    Ok(table
        .entries()
        .iter()
        .map(|g| {
            pow *= lam2;
            g.value() * pow
        })
        .sum())
}

/// `F_a/ε + iF_b + F_c` split of `f/ε`, with the fields that survive
/// `ε → 0` cast to real.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSplitTwoState {
    /// `F_a(0,0) = Σ x^{2n} g̃_n(0)/(2n)`; the phase `exp(−iF_a/ε)` is the
    /// only divergent factor.
    pub f_a: f64,
    /// `ΔE_a = Σ x^{2n} g̃_n(0)`, the coefficient of `t` in the phase.
    pub delta_e_a: f64,
    /// `F_b(0,0) = −i Σ x^{2n} r_n/(2n)`, the log-magnitude of `a` in the limit.
    pub f_b: f64,
    /// `F_c(0, ε)` from the jet coefficients of order ≥ 2.
    pub f_c_jet: C64,
    /// `F_c(0, ε) = f(0,ε)/ε − F_a/ε − iF_b` with `f` from the exact recursion.
    pub f_c_exact: C64,
    /// Largest imaginary part discarded from `f_a`, `delta_e_a`, `f_b`.
    pub imag_residue: f64,
    pub truncation_order: usize,
    pub jet_order: usize,
    pub eps_used: f64,
}

struct SplitSums {
    f_a: C64,
    delta_e: C64,
    f_b: C64,
    table: GtildeTable,
}

fn split_sums(delta: f64, x: f64, order: usize, jet_order: usize) -> Result<SplitSums> {
    require_series_domain(delta, x)?;
    let table = gtilde_table(delta, order, jet_order)?;
    let x2 = x * x;
    let (mut f_a, mut delta_e, mut f_b) = (C64::default(), C64::default(), C64::default());
    let mut pow = 1.0;
    for (i, g) in table.entries().iter().enumerate() {
        pow *= x2;
        let two_n = 2.0 * (i + 1) as f64;
        f_a += g.value() * (pow / two_n);
        delta_e += g.value() * pow;
        f_b += -I * g.coeff(1) * (pow / two_n);
    }
    Ok(SplitSums { f_a, delta_e, f_b, table })
}

fn real_part(field: &str, z: C64) -> Result<f64> {
    if z.im.abs() > REALITY_LIMIT {
        return Err(Error::Consistency { field: field.into(), imag: z.im, limit: REALITY_LIMIT });
    }
    Ok(z.re)
}

pub fn phase_split(m: &TwoStateModel, order: usize) -> Result<PhaseSplitTwoState> {
    phase_split_with(m, order, DEFAULT_JET_ORDER)
}

pub fn phase_split_with(m: &TwoStateModel, order: usize, jet_order: usize) -> Result<PhaseSplitTwoState> {
    m.require_series_domain()?;
    let sums = split_sums(m.delta, m.x, order, jet_order)?;
    let imag_residue = sums.f_a.im.abs().max(sums.delta_e.im.abs()).max(sums.f_b.im.abs());
    let f_a = real_part("F_a", sums.f_a)?;
    let delta_e_a = real_part("ΔE_a", sums.delta_e)?;
    let f_b = real_part("F_b", sums.f_b)?;

    let x2 = m.x * m.x;
    let mut pow = 1.0;
    let mut f_c_jet = C64::default();
    for (i, g) in sums.table.entries().iter().enumerate() {
        pow *= x2;
        let two_n = 2.0 * (i + 1) as f64;
        let mut inner = C64::default();
        for k in 2..=jet_order {
            inner += g.coeff(k) * m.eps.powi(k as i32 - 1);
        }
        f_c_jet += inner * (pow / two_n);
    }
    let f_exact = phase_f(m, 0.0, order)?;
    let f_c_exact = f_exact / m.eps - f_a / m.eps - I * f_b;

    Ok(PhaseSplitTwoState {
        f_a,
        delta_e_a,
        f_b,
        f_c_jet,
        f_c_exact,
        imag_residue,
        truncation_order: order,
        jet_order,
        eps_used: m.eps,
    })
}

/// Normalization identity `e^{F_b} = 1/√(1 + (ΔE/x)²)` plus the two balance
/// relations obtained by inserting `g(0, ε)` into the Riccati equation at
/// orders `ε⁰` and `ε¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `|−ΔE² + 2δΔE + x²|` with the series ΔE.
    pub quadratic_residual: f64,
    /// `|2x F_b'(x)(δ − ΔE) + ΔE − xΔE'(x)|` with x-derivatives from central differences.
    pub first_order_residual: f64,
}

pub fn fb_identity_check(delta: f64, x: f64, order: usize) -> Result<FbIdentity> {
    require_series_domain(delta, x)?;
    let base = split_sums(delta, x, order, 1)?;
    let f_b = real_part("F_b", base.f_b)?;
    let de_series = real_part("ΔE_a", base.delta_e)?;
    let lhs = f_b.exp();
    let de = delta_e_closed(delta, x);
    let rhs = 1.0 / (1.0 + (de / x).powi(2)).sqrt();

    let h = (1e-4 * x).min(0.25 * (delta - x));
    let at = |xx: f64| -> Result<(f64, f64)> {
        let s = split_sums(delta, xx, order, 1)?;
        Ok((real_part("F_b", s.f_b)?, real_part("ΔE_a", s.delta_e)?))
    };
    let (fb_p, de_p) = at(x + h)?;
    let (fb_m, de_m) = at(x - h)?;
    let dfb = (fb_p - fb_m) / (2.0 * h);
    let dde = (de_p - de_m) / (2.0 * h);

    Ok(FbIdentity {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        quadratic_residual: (-de_series * de_series + 2.0 * delta * de_series + x * x).abs(),
        first_order_residual: (2.0 * x * dfb * (delta - de_series) + (de_series - x * dde)).abs(),
    })
}

/// Time at which the coupling reaches `start_threshold` of the gap:
/// `x e^{εt₀} / (2δ) = start_threshold`.
pub fn start_time(m: &TwoStateModel, start_threshold: f64) -> f64 {
    (start_threshold * 2.0 * m.delta / m.x).ln() / m.eps
}

/// Integrates `(a, c)` in the interaction picture from `(1, 0)` at
/// [`start_time`] up to `t_end`. States in the trajectory are `[a, c]`.
pub fn evolve_two_state(m: &TwoStateModel, t_end: f64, tol: f64, start_threshold: f64) -> Result<Trajectory> {
    let mut opts = OdeOptions::new(tol);
    opts.max_step = Some(std::f64::consts::PI / (4.0 * m.delta));
    evolve_two_state_with(m, t_end, start_threshold, &opts)
}

pub fn evolve_two_state_with(m: &TwoStateModel, t_end: f64, start_threshold: f64, opts: &OdeOptions) -> Result<Trajectory> {
    if !(start_threshold > 0.0 && start_threshold <= 1e-4) {
        return Err(Error::Domain(format!("start threshold must lie in (0, 1e-4], got {start_threshold}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let t0 = start_time(m, start_threshold);
    if !(t_end > t0) {
        return Err(Error::Domain(format!("end time {t_end} precedes the start time {t0}")));
    }
    let (x, eps, delta) = (m.x, m.eps, m.delta);
    let rhs = (2usize, move |t: f64, y: &[C64], out: &mut [C64]| {
        let lam = x * (eps * t).exp();
        let rot = C64::from_polar(1.0, 2.0 * delta * t);
        out[0] = -I * lam * rot.conj() * y[1];
        out[1] = -I * lam * rot * y[0];
    });
    ode_evolve_with(&rhs, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], t0, t_end, opts)
}

/// Adiabatic-limit state with the divergent phase removed.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    /// `e^{−i(μ−δ+ΔE)t}·e^{F_b}·(Υ₀ + (ΔE/x)Υ₁)`.
    pub state: [C64; 2],
    /// `(μ − δ + ΔE)·t`, the phase angle already applied to `state`.
    pub secular_phase: f64,
    /// `F_a(0,0)`: the dropped factor is `exp(−i·divergent_coefficient/ε)`.
    pub divergent_coefficient: f64,
    pub delta_e: f64,
    pub norm_factor: f64,
}

/// Builds the `ε → 0` state from the phase recursion alone: `ΔE` and
/// `e^{F_b}` come from the series, not from the closed forms.
pub fn limit_state(m: &TwoStateModel, t: f64, order: usize) -> Result<LimitState> {
    m.require_series_domain()?;
    let sums = split_sums(m.delta, m.x, order, 1)?;
    let f_a = real_part("F_a", sums.f_a)?;
    let de = real_part("ΔE_a", sums.delta_e)?;
    let norm_factor = real_part("F_b", sums.f_b)?.exp();
    let secular_phase = (m.mu - m.delta + de) * t;
    let ph = C64::from_polar(norm_factor, -secular_phase);
    Ok(LimitState {
        state: [ph, ph * (de / m.x)],
        secular_phase,
        divergent_coefficient: f_a,
        delta_e: de,
        norm_factor,
    })
}
