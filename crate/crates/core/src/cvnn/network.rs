//! Hybrid complex/real autoencoder.
//!
//! ```text
//! x ∈ ℂ^m ──W1,b1──▶ z ∈ ℂ^H ──modReLU──▶ h ──Re──▶ r ∈ ℝ^H ──W2,b2──▶ a ∈ ℝ^m ──σ──▶ y
//! ```
//!
//! Gradients of complex parameters are stored as `∂L/∂Re + i·∂L/∂Im`, which
//! is twice the conjugate Wirtinger derivative `∂L/∂w*`. Stepping against it
//! is steepest descent, and each component matches a finite difference along
//! the corresponding real axis.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_len, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// Input and output length.
    pub m: usize,
    /// Hidden width.
    pub hidden: usize,
    /// `hidden × m`, row-major.
    pub w1: Vec<Complex64>,
    pub b1: Vec<Complex64>,
    pub modrelu_bias: Vec<f64>,
    /// `m × hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Same layout as the parameters they differentiate.
pub type Gradients = NetworkParams;

impl NetworkParams {
    pub fn zeros(m: usize, hidden: usize) -> Self {
        NetworkParams {
            m,
            hidden,
            w1: vec![Complex64::new(0.0, 0.0); hidden * m],
            b1: vec![Complex64::new(0.0, 0.0); hidden],
            modrelu_bias: vec![0.0; hidden],
            w2: vec![0.0; m * hidden],
            b2: vec![0.0; m],
        }
    }

    /// Complex weights get independent Gaussian re/im parts with std
    /// `1/√(2·m)`; real weights std `1/√H`; all biases start at zero.
    pub fn init<R: Rng + ?Sized>(m: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = NetworkParams::zeros(m, hidden);
        let c = Normal::new(0.0, 1.0 / (2.0 * m as f64).sqrt()).expect("positive std");
        for w in &mut p.w1 {
            *w = Complex64::new(c.sample(rng), c.sample(rng));
        }
        let r = Normal::new(0.0, 1.0 / (hidden as f64).sqrt()).expect("positive std");
        for w in &mut p.w2 {
            *w = r.sample(rng);
        }
        p
    }

    pub fn check_shapes(&self) -> Result<()> {
        check_len("w1", self.hidden * self.m, self.w1.len())?;
        check_len("b1", self.hidden, self.b1.len())?;
        check_len("modrelu_bias", self.hidden, self.modrelu_bias.len())?;
        check_len("w2", self.m * self.hidden, self.w2.len())?;
        check_len("b2", self.m, self.b2.len())
    }

    /// Number of real degrees of freedom (complex entries count twice).
    pub fn real_dof(&self) -> usize {
        2 * (self.w1.len() + self.b1.len()) + self.modrelu_bias.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().chain(&self.b1).all(|c| c.re.is_finite() && c.im.is_finite())
            && self.modrelu_bias.iter().chain(&self.w2).chain(&self.b2).all(|v| v.is_finite())
    }

    pub fn add_assign(&mut self, other: &NetworkParams) {
        fn add<T: Copy + std::ops::AddAssign>(a: &mut [T], b: &[T]) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += *y);
        }
        add(&mut self.w1, &other.w1);
        add(&mut self.b1, &other.b1);
        add(&mut self.modrelu_bias, &other.modrelu_bias);
        add(&mut self.w2, &other.w2);
        add(&mut self.b2, &other.b2);
    }

    pub fn scale(&mut self, k: f64) {
        self.w1.iter_mut().chain(&mut self.b1).for_each(|c| *c *= k);
        self.modrelu_bias
            .iter_mut()
            .chain(&mut self.w2)
            .chain(&mut self.b2)
            .for_each(|v| *v *= k);
    }

    /// Visits every real degree of freedom in a fixed order.
    pub fn real_values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .flat_map(|c| [&mut c.re, &mut c.im])
            .chain(self.modrelu_bias.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
    }
}

/// `(|z| + bias)·z/|z|` when positive, else 0; zero input maps to zero.
pub fn modrelu(z: Complex64, bias: f64) -> Complex64 {
    let mag = z.norm();
    let active = mag + bias;
    if mag == 0.0 || active <= 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * (active / mag)
    }
}

/// Logistic function, kept strictly inside (0, 1).
pub fn sigmoid(a: f64) -> f64 {
    let y = if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    };
    y.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Activations {
    pub x: Vec<Complex64>,
    pub z: Vec<Complex64>,
    pub r: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn forward(p: &NetworkParams, x: &[Complex64]) -> Result<Activations> {
    p.check_shapes()?;
    check_len("input", p.m, x.len())?;
    let m = p.m;
    let z: Vec<Complex64> = p
        .w1
        .chunks_exact(m)
        .zip(&p.b1)
        .map(|(row, b)| {
            let (mut re, mut im) = (b.re, b.im);
            for (w, v) in row.iter().zip(x) {
                re += w.re * v.re - w.im * v.im;
                im += w.re * v.im + w.im * v.re;
            }
            Complex64::new(re, im)
        })
        .collect();
    let r: Vec<f64> = z
        .iter()
        .zip(&p.modrelu_bias)
        .map(|(&zj, &bj)| modrelu(zj, bj).re)
        .collect();
    let y = p
        .w2
        .chunks_exact(p.hidden)
        .zip(&p.b2)
        .map(|(row, b)| sigmoid(b + row.iter().zip(&r).map(|(w, v)| w * v).sum::<f64>()))
        .collect();
    Ok(Activations {
        x: x.to_vec(),
        z,
        r,
        y,
    })
}

fn bin_weight(label: bool, positive_weight: f64) -> f64 {
    if label {
        positive_weight
    } else {
        1.0
    }
}

/// `(1/m)·Σ w_i·(y_i − label_i)²` with `w_i = positive_weight` on target bins.
pub fn weighted_mse(y: &[f64], labels: &[bool], positive_weight: f64) -> f64 {
    debug_assert_eq!(y.len(), labels.len());
    let sum: f64 = y
        .iter()
        .zip(labels)
        .map(|(&yi, &li)| {
            let d = yi - f64::from(u8::from(li));
            bin_weight(li, positive_weight) * d * d
        })
        .sum();
    sum / y.len() as f64
}

/// Adds `scale · ∇L` for one profile into `grad` and returns the loss.
pub fn accumulate_gradients(
    p: &NetworkParams,
    act: &Activations,
    labels: &[bool],
    positive_weight: f64,
    scale: f64,
    grad: &mut Gradients,
) -> Result<f64> {
    p.check_shapes()?;
    grad.check_shapes()?;
    check_len("gradient m", p.m, grad.m)?;
    check_len("gradient hidden", p.hidden, grad.hidden)?;
    check_len("labels", p.m, labels.len())?;
    check_len("activations", p.m, act.y.len())?;
    let (m, hidden) = (p.m, p.hidden);

    // dL/da through the sigmoid
    let delta: Vec<f64> = act
        .y
        .iter()
        .zip(labels)
        .map(|(&y, &l)| {
            let t = f64::from(u8::from(l));
            scale * 2.0 / m as f64 * bin_weight(l, positive_weight) * (y - t) * y * (1.0 - y)
        })
        .collect();

    let mut grad_r = vec![0.0; hidden];
    for (i, &d) in delta.iter().enumerate() {
        grad.b2[i] += d;
        if d == 0.0 {
            continue;
        }
        let row = i * hidden;
        let g_row = &mut grad.w2[row..row + hidden];
        for (g, &rj) in g_row.iter_mut().zip(&act.r) {
            *g += d * rj;
        }
        for (gr, &w) in grad_r.iter_mut().zip(&p.w2[row..row + hidden]) {
            *gr += w * d;
        }
    }

    for j in 0..hidden {
        let z = act.z[j];
        let b = p.modrelu_bias[j];
        let mag = z.norm();
        if mag == 0.0 || mag + b <= 0.0 || grad_r[j] == 0.0 {
            continue;
        }
        // Re(h) = z_re·(1 + b/|z|)
        let g = grad_r[j];
        let mag3 = mag * mag * mag;
        let gz = Complex64::new(g * (1.0 + b * z.im * z.im / mag3), -g * b * z.re * z.im / mag3);
        grad.modrelu_bias[j] += g * z.re / mag;
        grad.b1[j] += gz;
        let row = &mut grad.w1[j * m..(j + 1) * m];
        for (gw, xk) in row.iter_mut().zip(&act.x) {
            // gz · conj(x)
            gw.re += gz.re * xk.re + gz.im * xk.im;
            gw.im += gz.im * xk.re - gz.re * xk.im;
        }
    }

    Ok(weighted_mse(&act.y, labels, positive_weight))
}

/// Exact gradients of [`weighted_mse`] for one profile.
pub fn backward(p: &NetworkParams, act: &Activations, labels: &[bool], positive_weight: f64) -> Result<Gradients> {
    let mut g = NetworkParams::zeros(p.m, p.hidden);
    accumulate_gradients(p, act, labels, positive_weight, 1.0, &mut g)?;
    Ok(g)
}

/// `y_i > threshold` over the full profile.
pub fn detect(p: &NetworkParams, x: &[Complex64], threshold: f64) -> Result<Vec<bool>> {
    Ok(forward(p, x)?.y.into_iter().map(|y| y > threshold).collect())
}
