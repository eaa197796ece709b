//! Transcritical, saddle-node and pitchfork normal forms and their
//! singular rescalings.
//!
//! Original variables `(u, v) ∈ R × R^{n−1}` solve
//!
//! ```text
//! u_t = u_xx + h(u; μ) + f₀(u, v; μ)
//! v_t = D_v v_xx − K v + f₁(u, v; μ)
//! ```
//!
//! with `h = μu − u²`, `μ − u²` or `μu − u³`. The rescaled system lives in
//! `(y, τ)` with `μ = δ²` (resp. `δ⁴` for the saddle-node) and reads
//!
//! ```text
//! U_τ     = U_yy + h̃(U) + g₀(U, V; δ)
//! δ² V_τ  = δ² D_v V_yy − K V + δ² g₁(U, V; δ)
//! ```
//!
//! Every monomial `c μ^p u^a v^b` picks up a power of `δ`; see
//! [`Kind::delta_exponent`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::kinetics::{Kinetics, Monomial};
use crate::model::system::RdSystem;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Transcritical,
    SaddleNode,
    Pitchfork,
}

/// `(μ power, u power, total v degree)` of a monomial.
type Pattern = (u32, u32, u32);

const TRANSCRITICAL_F0: &[Pattern] = &[(2, 2, 0), (0, 1, 1), (0, 0, 2), (0, 3, 0)];
const SADDLE_NODE_F0: &[Pattern] = &[(1, 1, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2), (0, 3, 0)];
const PITCHFORK_F0: &[Pattern] = &[(0, 4, 0), (0, 1, 2), (0, 2, 1), (0, 0, 3), (1, 2, 0), (1, 0, 2)];
const F1: &[Pattern] = &[(1, 0, 1), (0, 2, 0), (0, 0, 2), (0, 1, 1)];

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Transcritical, Kind::SaddleNode, Kind::Pitchfork];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Transcritical => "transcritical",
            Kind::SaddleNode => "saddle_node",
            Kind::Pitchfork => "pitchfork",
        }
    }

    /// `δ` as a function of `μ ≥ 0`.
    pub fn delta_of_mu<T: Real>(self, mu: T) -> T {
        match self {
            Kind::SaddleNode => mu.sqrt().sqrt(),
            _ => mu.sqrt(),
        }
    }

    pub fn mu_of_delta<T: Real>(self, delta: T) -> T {
        match self {
            Kind::SaddleNode => delta.powi(4),
            _ => delta.powi(2),
        }
    }

    /// Exponent `s` such that `y = μ^s x`.
    pub fn space_exponent(self) -> f64 {
        match self {
            Kind::SaddleNode => 0.25,
            _ => 0.5,
        }
    }

    /// Exponent `s` such that `τ = μ^s t`.
    pub fn time_exponent(self) -> f64 {
        match self {
            Kind::SaddleNode => 0.5,
            _ => 1.0,
        }
    }

    /// Exponent `s` such that `(U, V) = μ^{−s} (u, v)`.
    pub fn amplitude_exponent(self) -> f64 {
        match self {
            Kind::Transcritical => 1.0,
            _ => 0.5,
        }
    }

    /// Coefficient of the linear term of the scalar block at the invaded
    /// state for `δ = 0`.
    pub fn linear_rate(self) -> f64 {
        match self {
            Kind::SaddleNode => 2.0,
            _ => 1.0,
        }
    }

    /// Leading-order spreading speed `2√(linear rate)` of the rescaled system.
    pub fn leading_speed(self) -> f64 {
        2.0 * self.linear_rate().sqrt()
    }

    /// Stable state of the scalar block at `δ = 0` (in shifted variables
    /// for the saddle-node).
    pub fn leading_selected_state(self) -> f64 {
        match self {
            Kind::SaddleNode => 2.0,
            _ => 1.0,
        }
    }

    fn f0_classes(self) -> &'static [Pattern] {
        match self {
            Kind::Transcritical => TRANSCRITICAL_F0,
            Kind::SaddleNode => SADDLE_NODE_F0,
            Kind::Pitchfork => PITCHFORK_F0,
        }
    }

    /// Power of `δ` multiplying the rescaled image of `μ^p u^a v^b` in the
    /// `U` equation (`in_v_block = false`) or in the `V` equation.
    pub fn delta_exponent(self, mu_pow: u32, degree: u32, in_v_block: bool) -> i32 {
        let (p, a) = (mu_pow as i32, degree as i32);
        let base = match self {
            Kind::Transcritical => 2 * p + 2 * a - 4,
            Kind::SaddleNode => 4 * p + 2 * a - 4,
            Kind::Pitchfork => 2 * p + a - 3,
        };
        if in_v_block {
            base + 2
        } else {
            base
        }
    }

    fn leading_terms<T: Real>(self, n: usize) -> Vec<Monomial<T>> {
        let pow = |k: u32| {
            let mut p = vec![0; n];
            p[0] = k;
            p
        };
        match self {
            Kind::Transcritical => vec![
                Monomial::new(T::one(), 0, pow(1)),
                Monomial::new(-T::one(), 0, pow(2)),
            ],
            Kind::SaddleNode => vec![
                Monomial::new(T::one(), 0, pow(0)),
                Monomial::new(-T::one(), 0, pow(2)),
            ],
            Kind::Pitchfork => vec![
                Monomial::new(T::one(), 0, pow(1)),
                Monomial::new(-T::one(), 0, pow(3)),
            ],
        }
    }

    /// Leading scalar kinetics in original variables (with explicit μ).
    fn unscaled_leading_terms<T: Real>(self, n: usize) -> Vec<Monomial<T>> {
        let pow = |k: u32| {
            let mut p = vec![0; n];
            p[0] = k;
            p
        };
        match self {
            Kind::Transcritical => vec![
                Monomial::new(T::one(), 1, pow(1)),
                Monomial::new(-T::one(), 0, pow(2)),
            ],
            Kind::SaddleNode => vec![
                Monomial::new(T::one(), 1, pow(0)),
                Monomial::new(-T::one(), 0, pow(2)),
            ],
            Kind::Pitchfork => vec![
                Monomial::new(T::one(), 1, pow(1)),
                Monomial::new(-T::one(), 0, pow(3)),
            ],
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transcritical" => Ok(Kind::Transcritical),
            "saddle_node" | "saddle-node" => Ok(Kind::SaddleNode),
            "pitchfork" => Ok(Kind::Pitchfork),
            other => Err(Error::InvalidModel(format!("unknown kind '{other}'"))),
        }
    }
}

/// A monomial that is not dominated by any printed order class but whose
/// rescaled image still vanishes as `δ → 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorderlineTerm {
    pub component: usize,
    pub mu_pow: u32,
    pub u_pows: Vec<u32>,
    pub delta_exponent: i32,
}

/// Normal-form data in original variables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalFormModel<T> {
    pub kind: Kind,
    pub mu: T,
    pub d_v: Mat<T>,
    pub k: Mat<T>,
    /// Component 0 holds `f₀`, components `1..n` hold `f₁`.
    pub higher_order: Kinetics<T>,
}

impl<T: Real> NormalFormModel<T> {
    /// Validates dimensions, spectra, the no-Turing condition and the order
    /// conditions on `f₀`, `f₁`.
    pub fn new(kind: Kind, mu: T, d_v: Mat<T>, k: Mat<T>, higher_order: Kinetics<T>) -> Result<Self> {
        let model = Self { kind, mu, d_v, k, higher_order };
        model.validate()?;
        Ok(model)
    }

    /// The default two-component model used throughout the test-suite:
    /// `D_v = 2`, `K = 1` and small generic quadratic/cubic couplings.
    pub fn default_for(kind: Kind, mu: T) -> Self {
        let half = T::lit(0.5);
        let mut ho = Kinetics::zero(2);
        match kind {
            Kind::Transcritical => {
                ho.push(0, Monomial::new(half, 0, vec![1, 1]));
                ho.push(1, Monomial::new(half, 0, vec![2, 0]));
            }
            Kind::SaddleNode => {
                ho.push(0, Monomial::new(half, 0, vec![1, 1]));
                ho.push(1, Monomial::new(half, 0, vec![1, 1]));
                ho.push(1, Monomial::new(T::lit(0.1), 0, vec![2, 0]));
            }
            Kind::Pitchfork => {
                ho.push(0, Monomial::new(half, 0, vec![2, 1]));
                ho.push(1, Monomial::new(half, 0, vec![2, 0]));
            }
        }
        Self {
            kind,
            mu,
            d_v: Mat::diag(&[T::lit(2.0)]),
            k: Mat::diag(&[T::one()]),
            higher_order: ho,
        }
    }

    /// Same data with `f₀ = f₁ = 0`.
    pub fn decoupled(&self) -> Self {
        let mut m = self.clone();
        m.higher_order = Kinetics::zero(self.n());
        m
    }

    pub fn n(&self) -> usize {
        self.d_v.rows() + 1
    }

    pub fn delta(&self) -> T {
        self.kind.delta_of_mu(self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= T::zero()) {
            return Err(Error::InvalidModel(format!("mu must be non-negative, got {}", self.mu)));
        }
        let m = self.d_v.rows();
        if m == 0 || !self.d_v.is_square() || self.k.rows() != m || !self.k.is_square() {
            return Err(Error::Dimension("D_v and K must be square of equal size ≥ 1".into()));
        }
        if self.higher_order.n() != m + 1 {
            return Err(Error::Dimension(format!(
                "higher-order kinetics have {} components, expected {}",
                self.higher_order.n(),
                m + 1
            )));
        }
        for (name, mat) in [("D_v", &self.d_v), ("K", &self.k)] {
            if let Some(z) = mat.eigenvalues().iter().find(|z| z.re <= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "{name} has eigenvalue {z} outside the open right half plane"
                )));
            }
        }
        if !self.d_v.sym_positive_definite() {
            return Err(Error::InvalidModel("D_v must have positive definite symmetric part".into()));
        }
        let turing = crate::dispersion::check_no_turing(&self.d_v, &self.k);
        if !turing.passed() {
            return Err(Error::Turing(turing.summary()));
        }
        self.order_conditions()?;
        Ok(())
    }

    /// Checks every monomial of `f₀`, `f₁` against the order classes.
    /// Returns the accepted-but-borderline monomials.
    pub fn order_conditions(&self) -> Result<Vec<BorderlineTerm>> {
        let mut flagged = Vec::new();
        for (comp, terms) in self.higher_order.terms().iter().enumerate() {
            let classes = if comp == 0 { self.kind.f0_classes() } else { F1 };
            for m in terms {
                let pat: Pattern = (m.mu_pow, m.u_pows[0], m.u_pows[1..].iter().sum());
                let dominated = classes
                    .iter()
                    .any(|c| pat.0 >= c.0 && pat.1 >= c.1 && pat.2 >= c.2);
                if dominated {
                    continue;
                }
                let e = self.kind.delta_exponent(m.mu_pow, m.degree(), comp > 0);
                if e >= 1 {
                    flagged.push(BorderlineTerm {
                        component: comp,
                        mu_pow: m.mu_pow,
                        u_pows: m.u_pows.clone(),
                        delta_exponent: e,
                    });
                } else {
                    return Err(Error::OrderCondition(format!(
                        "{} component {comp}: monomial mu^{} u^{:?} is not of the admissible order \
                         (rescaled weight delta^{e})",
                        self.kind, m.mu_pow, m.u_pows
                    )));
                }
            }
        }
        Ok(flagged)
    }

    /// The rescaled system at an arbitrary `δ` (used by continuation).
    pub fn scaled_system(&self, delta: T) -> Result<ScaledSystem<T>> {
        let borderline = self.order_conditions()?;
        let n = self.n();
        let d2 = delta * delta;
        let mut kin = Kinetics::zero(n);
        for m in self.kind.leading_terms(n) {
            kin.push(0, m);
        }
        for i in 1..n {
            for j in 1..n {
                let kij = self.k[(i - 1, j - 1)];
                if kij != T::zero() {
                    let mut p = vec![0; n];
                    p[j] = 1;
                    kin.push(i, Monomial::new(-kij, 0, p));
                }
            }
        }
        for (comp, terms) in self.higher_order.terms().iter().enumerate() {
            for m in terms {
                let e = self.kind.delta_exponent(m.mu_pow, m.degree(), comp > 0);
                debug_assert!(e >= 0);
                kin.push(comp, Monomial::new(m.coef * delta.powi(e), 0, m.u_pows.clone()));
            }
        }
        let mut kin = kin.simplified();
        let mut shift = vec![T::zero(); n];
        if self.kind == Kind::SaddleNode {
            shift[0] = -T::one();
            kin = kin.translate(&shift);
        }
        let mut d = Mat::zeros(n, n);
        d[(0, 0)] = T::one();
        let mut mass = vec![d2; n];
        mass[0] = T::one();
        for i in 1..n {
            for j in 1..n {
                d[(i, j)] = d2 * self.d_v[(i - 1, j - 1)];
            }
        }
        let mut system = RdSystem::with_mass(d, mass, kin, delta)?;
        let f0 = system.reaction(&vec![T::zero(); n]);
        let scale = T::one() + delta.abs();
        if f0.iter().any(|x| x.abs() > T::epsilon() * T::lit(64.0) * scale) {
            // The invaded state moved at O(δ²); follow it so that it stays
            // at the origin.
            let eq = system.equilibrium(&vec![T::zero(); n], T::epsilon() * T::lit(16.0))?;
            // f(eq) = 0 up to roundoff; the constants left by the
            // translation are exactly zero in exact arithmetic
            let kin = system.kinetics().translate(&eq).without_constant_terms();
            system = system.with_kinetics(kin)?;
            for (s, e) in shift.iter_mut().zip(&eq) {
                *s += *e;
            }
        }
        Ok(ScaledSystem {
            kind: self.kind,
            delta,
            system,
            shift,
            borderline,
        })
    }

    /// The system in original `(x, t)` variables with unit mass and
    /// `D = diag(1, D_v)`; kinetics keep their explicit `μ`.
    pub fn unscaled_system(&self) -> Result<RdSystem<T>> {
        let n = self.n();
        let mut kin = Kinetics::zero(n);
        for m in self.kind.unscaled_leading_terms(n) {
            kin.push(0, m);
        }
        for i in 1..n {
            for j in 1..n {
                let mut p = vec![0; n];
                p[j] = 1;
                kin.push(i, Monomial::new(-self.k[(i - 1, j - 1)], 0, p));
            }
        }
        for (comp, terms) in self.higher_order.terms().iter().enumerate() {
            for m in terms {
                kin.push(comp, m.clone());
            }
        }
        let mut d = Mat::zeros(n, n);
        d[(0, 0)] = T::one();
        for i in 1..n {
            for j in 1..n {
                d[(i, j)] = self.d_v[(i - 1, j - 1)];
            }
        }
        RdSystem::new(d, kin.simplified(), self.mu)
    }
}

/// A rescaled normal form together with the bookkeeping that maps it back.
#[derive(Clone, Debug)]
pub struct ScaledSystem<T> {
    pub kind: Kind,
    pub delta: T,
    pub system: RdSystem<T>,
    /// Returned variables are `(U, V) − shift`, where `(U, V)` are the
    /// rescaled variables before any translation.
    pub shift: Vec<T>,
    pub borderline: Vec<BorderlineTerm>,
}

impl<T: Real> ScaledSystem<T> {
    /// Seed for the selected state behind the front, in returned variables.
    pub fn selected_state_seed(&self) -> Vec<T> {
        let mut s: Vec<T> = self.shift.iter().map(|&x| -x).collect();
        // the stable state of the leading scalar block is U = 1
        s[0] += T::one();
        s
    }
}

/// Builds the rescaled system for `(kind, μ, D_v, K, f₀/f₁)` at `δ(μ)`.
pub fn build_normal_form<T: Real>(
    kind: Kind,
    mu: T,
    d_v: Mat<T>,
    k: Mat<T>,
    higher_order: Kinetics<T>,
) -> Result<RdSystem<T>> {
    let model = NormalFormModel::new(kind, mu, d_v, k, higher_order)?;
    Ok(model.scaled_system(model.delta())?.system)
}

/// Converts a speed of the rescaled system back to original units.
pub fn scale_speed_to_original<T: Real>(kind: Kind, c_rescaled: T, mu: T) -> Result<T> {
    if !(mu > T::zero()) {
        return Err(Error::InvalidModel(format!("mu must be positive, got {mu}")));
    }
    Ok(match kind {
        Kind::SaddleNode => c_rescaled * mu.sqrt().sqrt(),
        _ => c_rescaled * mu.sqrt(),
    })
}

/// `∂f/∂u` of a system at `u`.
pub fn jacobian<T: Real>(system: &RdSystem<T>, u: &[T]) -> Mat<T> {
    system.jacobian(u)
}
