//! Ionic models and their Galerkin projections onto the DG space.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::dgspace::DgSpace;
use crate::error::SetupError;

/// Pointwise ionic model: current `f(u, y)` and state rates `m(u, y)`.
pub trait IonicModel: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Number of ionic state variables.
    fn n_states(&self) -> usize;

    /// Writes `m(u, y)` into `rates` and returns `f(u, y)`.
    fn rhs(&self, u: f64, y: &[f64], rates: &mut [f64]) -> f64;

    /// Resting potential and resting state.
    fn resting_state(&self) -> (f64, Vec<f64>);

    /// Bounds `[lo, hi]` for the potential followed by each state component.
    fn admissible_box(&self) -> Vec<[f64; 2]>;
}

/// Evaluation of a model with finiteness checks.
pub fn ionic_rhs(model: &dyn IonicModel, u: f64, y: &[f64], rates: &mut [f64]) -> Result<f64, &'static str> {
    if !u.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err("non-finite ionic model input");
    }
    Ok(model.rhs(u, y, rates))
}

/// Rogers–McCulloch variant of the FitzHugh–Nagumo model in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitzHughNagumo {
    pub a: f64,
    /// ms^-1
    pub b: f64,
    /// ms^-1
    pub c1: f64,
    /// ms^-1
    pub c2: f64,
    pub d: f64,
    /// mV
    pub u_min: f64,
    /// mV
    pub u_max: f64,
    /// Current scale, uA ms / (cm^2 mV).
    pub amplitude: f64,
}

impl Default for FitzHughNagumo {
    fn default() -> Self {
        FitzHughNagumo { a: 0.13, b: 0.013, c1: 0.26, c2: 0.1, d: 1.0, u_min: -85.0, u_max: 20.0, amplitude: 1.0 }
    }
}

impl FitzHughNagumo {
    pub fn validate(&self) -> Result<(), SetupError> {
        let vals = [self.a, self.b, self.c1, self.c2, self.d, self.u_min, self.u_max, self.amplitude];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(SetupError::Config("ionic parameters must be finite".into()));
        }
        if self.u_max <= self.u_min {
            return Err(SetupError::Config("ionic.params.u_max must exceed ionic.params.u_min".into()));
        }
        Ok(())
    }
}

impl IonicModel for FitzHughNagumo {
    fn name(&self) -> &'static str {
        "fhn"
    }

    fn n_states(&self) -> usize {
        1
    }

    fn rhs(&self, u: f64, y: &[f64], rates: &mut [f64]) -> f64 {
        let span = self.u_max - self.u_min;
        let v = (u - self.u_min) / span;
        let w = y[0];
        rates[0] = -self.b * (v - self.d * w);
        self.amplitude * (self.c1 * v * (v - self.a) * (v - 1.0) + self.c2 * v * w) * span
    }

    fn resting_state(&self) -> (f64, Vec<f64>) {
        (self.u_min, vec![0.0])
    }

    fn admissible_box(&self) -> Vec<[f64; 2]> {
        vec![[self.u_min, self.u_max], [0.0, 1.0]]
    }
}

/// Model with no ionic current and no states.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoIonicCurrent;

impl IonicModel for NoIonicCurrent {
    fn name(&self) -> &'static str {
        "none"
    }

    fn n_states(&self) -> usize {
        0
    }

    fn rhs(&self, _u: f64, _y: &[f64], _rates: &mut [f64]) -> f64 {
        0.0
    }

    fn resting_state(&self) -> (f64, Vec<f64>) {
        (0.0, Vec::new())
    }

    fn admissible_box(&self) -> Vec<[f64; 2]> {
        vec![[f64::NEG_INFINITY, f64::INFINITY]]
    }
}

/// Selectable ionic models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IonicModelChoice {
    FitzHughNagumo(FitzHughNagumo),
    /// Its rate equations are not available in this crate.
    BarretoCressman,
    None,
}

impl IonicModelChoice {
    pub fn instantiate(&self) -> Result<Box<dyn IonicModel>, SetupError> {
        match self {
            IonicModelChoice::FitzHughNagumo(m) => {
                m.validate()?;
                Ok(Box::new(*m))
            }
            IonicModelChoice::BarretoCressman => Err(SetupError::Config(
                "ionic.model = \"barreto-cressman\": kinetics not available; use \"fhn\"".into(),
            )),
            IonicModelChoice::None => Ok(Box::new(NoIonicCurrent)),
        }
    }
}

/// Projected ionic terms `I_i = int f phi_i` and `(G_l)_i = int m_l phi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct IonicTerms {
    pub current: Vec<f64>,
    pub rates: Vec<Vec<f64>>,
    /// Quadrature points whose state lay outside the admissible box by more
    /// than ten box widths.
    pub far_out_of_box: usize,
}

/// Evaluates the model at every volume quadrature point and projects.
pub fn assemble_ionic_terms(space: &DgSpace, u: &[f64], y: &[Vec<f64>], model: &dyn IonicModel) -> Result<IonicTerms, &'static str> {
    let ns = model.n_states();
    let n = space.n_loc();
    if u.len() != space.dim() || y.len() != ns || y.iter().any(|v| v.len() != space.dim()) {
        return Err("ionic state dimension mismatch");
    }
    let bounds = model.admissible_box();
    let mut current = vec![0.0; space.dim()];
    let mut rates = vec![vec![0.0; space.dim()]; ns];
    let mut far = 0;
    let mut uq = Vec::new();
    let mut yq = vec![Vec::new(); ns];
    let mut ypt = vec![0.0; ns];
    let mut mpt = vec![0.0; ns];
    for k in 0..space.n_elements() {
        space.values_at_quadrature(u, k, &mut uq);
        for (l, buf) in yq.iter_mut().enumerate() {
            space.values_at_quadrature(&y[l], k, buf);
        }
        let eq = space.element_quadrature(k);
        let range = space.dof_range(k);
        for (q, &w) in eq.rule.weights.iter().enumerate() {
            for l in 0..ns {
                ypt[l] = yq[l][q];
            }
            let f = ionic_rhs(model, uq[q], &ypt, &mut mpt)?;
            if outside(&bounds, uq[q], &ypt) {
                far += 1;
            }
            let phi = &eq.values[q * n..(q + 1) * n];
            for (d, p) in current[range.clone()].iter_mut().zip(phi) {
                *d += w * f * p;
            }
            for l in 0..ns {
                let wm = w * mpt[l];
                for (d, p) in rates[l][range.clone()].iter_mut().zip(phi) {
                    *d += wm * p;
                }
            }
        }
    }
    Ok(IonicTerms { current, rates, far_out_of_box: far })
}

fn outside(bounds: &[[f64; 2]], u: f64, y: &[f64]) -> bool {
    core::iter::once(u).chain(y.iter().copied()).zip(bounds).any(|(v, &[lo, hi])| {
        let slack = 10.0 * (hi - lo);
        v < lo - slack || v > hi + slack
    })
}
