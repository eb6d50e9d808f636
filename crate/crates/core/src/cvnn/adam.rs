//! Adam over every real degree of freedom of [`NetworkParams`].
//!
//! Complex entries are treated as two independent reals: the second-moment
//! accumulator of a complex weight stores `(E[g_re²], E[g_im²])` in its
//! re/im slots rather than a complex square.

use num_complex::Complex64;

use super::network::{Gradients, NetworkParams};
use crate::error::{check_len, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub first: NetworkParams,
    pub second: NetworkParams,
}

impl AdamState {
    pub fn new(like: &NetworkParams) -> Self {
        AdamState::with_hyperparams(like, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyperparams(like: &NetworkParams, beta1: f64, beta2: f64, eps: f64) -> Self {
        AdamState {
            beta1,
            beta2,
            eps,
            step: 0,
            first: NetworkParams::zeros(like.m, like.hidden),
            second: NetworkParams::zeros(like.m, like.hidden),
        }
    }
}

struct Step {
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr: f64,
    c1: f64,
    c2: f64,
}

impl Step {
    #[inline]
    fn apply(&self, p: &mut f64, g: f64, m: &mut f64, v: &mut f64) {
        *m = self.beta1 * *m + (1.0 - self.beta1) * g;
        *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
        let m_hat = *m / self.c1;
        let v_hat = *v / self.c2;
        *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
    }

    fn real(&self, p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]) {
        for i in 0..p.len() {
            self.apply(&mut p[i], g[i], &mut m[i], &mut v[i]);
        }
    }

    fn complex(&self, p: &mut [Complex64], g: &[Complex64], m: &mut [Complex64], v: &mut [Complex64]) {
        for i in 0..p.len() {
            self.apply(&mut p[i].re, g[i].re, &mut m[i].re, &mut v[i].re);
            self.apply(&mut p[i].im, g[i].im, &mut m[i].im, &mut v[i].im);
        }
    }
}

/// One bias-corrected Adam update of `p` against gradient `g`.
pub fn adam_step(state: &mut AdamState, p: &mut NetworkParams, g: &Gradients, lr: f64) -> Result<()> {
    p.check_shapes()?;
    g.check_shapes()?;
    check_len("gradient size", p.real_dof(), g.real_dof())?;
    check_len("adam state size", p.real_dof(), state.first.real_dof())?;
    state.step += 1;
    let t = state.step as i32;
    let s = Step {
        beta1: state.beta1,
        beta2: state.beta2,
        eps: state.eps,
        lr,
        c1: 1.0 - state.beta1.powi(t),
        c2: 1.0 - state.beta2.powi(t),
    };
    let (m, v) = (&mut state.first, &mut state.second);
    s.complex(&mut p.w1, &g.w1, &mut m.w1, &mut v.w1);
    s.complex(&mut p.b1, &g.b1, &mut m.b1, &mut v.b1);
    s.real(&mut p.modrelu_bias, &g.modrelu_bias, &mut m.modrelu_bias, &mut v.modrelu_bias);
    s.real(&mut p.w2, &g.w2, &mut m.w2, &mut v.w2);
    s.real(&mut p.b2, &g.b2, &mut m.b2, &mut v.b2);
    Ok(())
}
