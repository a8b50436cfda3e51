//! Closed-form integral kernels.
//!
//! The harmonic oscillator is `H = ½(−∂² + x²)`; its heat kernel is the
//! Mehler kernel. The n-step Strang kernel `K⁽ⁿ⁾` is the kernel of
//! `(e^{−tV/2n} e^{−tH₀/n} e^{−tV/2n})ⁿ` with `H₀ = −½∂²`, `V = ½x²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        invalid(format!("time must be positive and finite, got {t}"))
    }
}

/// `(4πDt)^{−1/2} exp(−(x−y)²/(4Dt))`, the kernel of `e^{tD∂²}`.
pub fn free_heat_kernel(t: f64, x: f64, y: f64, diffusion: f64) -> Result<f64> {
    check_time(t)?;
    if !(diffusion > 0.0 && diffusion.is_finite()) {
        return invalid(format!("diffusion must be positive, got {diffusion}"));
    }
    let dt = diffusion * t;
    Ok((-(x - y).powi(2) / (4.0 * dt)).exp() / (4.0 * PI * dt).sqrt())
}

/// Heat kernel of the harmonic oscillator.
///
/// Written as `exp(−(x−y)²/(2 sinh t) − tanh(t/2)(x²+y²)/2)`, which is the
/// usual `cosh`/`sinh` form with the cancellation at small `t` removed.
pub fn mehler_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    Ok(mehler_unchecked(t, x, y))
}

fn mehler_unchecked(t: f64, x: f64, y: f64) -> f64 {
    let sh = t.sinh();
    let e = -(x - y).powi(2) / (2.0 * sh) - 0.5 * (0.5 * t).tanh() * (x * x + y * y);
    e.exp() / (2.0 * PI * sh).sqrt()
}

/// Time derivative of [`mehler_kernel`], i.e. the kernel of `−H e^{−tH}`.
pub fn mehler_kernel_dt(t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    let sh = t.sinh();
    let sh_half = (0.5 * t).sinh();
    let g = -0.5 / t.tanh() + ((x - y).powi(2) - 4.0 * x * y * sh_half * sh_half) / (2.0 * sh * sh);
    Ok(mehler_unchecked(t, x, y) * g)
}

/// Kernel of the single Strang step `e^{−tV/2} e^{−tH₀} e^{−tV/2}`.
pub fn strang_step_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    let e = -0.25 * t * (x * x + y * y) - (x - y).powi(2) / (2.0 * t);
    Ok(e.exp() / (2.0 * PI * t).sqrt())
}

/// The recurring constants of the n-step product kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    pub t: f64,
    pub n: u32,
    /// `√(1 + t²/4n²)`
    pub a: f64,
    /// `1 + (t/n)a + t²/2n²`
    pub lambda_plus: f64,
    /// `1 − (t/n)a + t²/2n²`
    pub lambda_minus: f64,
}

pub fn lambda_params(t: f64, n: u32) -> Result<LambdaParams> {
    check_time(t)?;
    if n == 0 {
        return invalid("step count must be at least 1");
    }
    let tau = t / f64::from(n);
    let a = (1.0 + 0.25 * tau * tau).sqrt();
    // λ± = (a ± τ/2)², and λ₋ = 1/λ₊ avoids the cancellation in 1 − τa + τ²/2
    let root = a + 0.5 * tau;
    let lambda_plus = root * root;
    Ok(LambdaParams { t, n, a, lambda_plus, lambda_minus: 1.0 / lambda_plus })
}

/// `prefactor · exp(−alpha (x−y)² − beta (x²+y²))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    pub prefactor: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GaussianKernel {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.prefactor * (-self.alpha * (x - y).powi(2) - self.beta * (x * x + y * y)).exp()
    }
}

/// Coefficients of `K⁽ⁿ⁾(t, ·, ·)`.
///
/// With `τ = t/n` and `q_k = λ₊ᵏ − λ₋ᵏ`, the kernel is
/// `(a/(π q_n))^{1/2} exp(2a·xy/q_n − [τ/4 + (1/2τ)(1 − q_{n−1}/q_n)](x²+y²))`.
/// The `q_k` are generated through their first differences
/// `d_k = q_{k+1} − q_k`, which obey `d_k = d_{k−1} + τ² q_k`; this never
/// subtracts nearly equal numbers, unlike the plain three-term recurrence.
/// Once the cross term is folded into `(x−y)²`, the diagonal coefficient
/// becomes `beta = τ/4 + (τ/2)·Σ_{k<n} q_k / q_n`, again free of cancellation.
pub fn kn_coefficients(t: f64, n: u32) -> Result<GaussianKernel> {
    let p = lambda_params(t, n)?;
    let tau = t / f64::from(n);
    let eps = tau * tau;
    let mut q = 2.0 * tau * p.a;
    let mut d = q;
    let mut partial = 0.0;
    for _ in 1..n {
        partial += q;
        d += eps * q;
        q += d;
    }
    if !q.is_finite() {
        return Err(Error::Range(format!("product kernel overflows at t = {t}, n = {n}")));
    }
    Ok(GaussianKernel {
        prefactor: (p.a / (PI * q)).sqrt(),
        alpha: p.a / q,
        beta: 0.25 * tau + 0.5 * tau * partial / q,
    })
}

/// Closed form of the n-step Strang product kernel `K⁽ⁿ⁾(t, x, y)`.
pub fn kn_closed_form(t: f64, n: u32, x: f64, y: f64) -> Result<f64> {
    Ok(kn_coefficients(t, n)?.eval(x, y))
}

/// Leading coefficient `R` in `K⁽ⁿ⁾ − e^{−tH} = R/n² + O(n⁻³)`.
///
/// With `c = e^t + e^{−t}` and `s = e^t − e^{−t}`:
/// `R = M·[(t³/12)(c/4s + (c·xy − (x²+y²))/s²) + (t²/16)(1 + (4xy − c(x²+y²))/s)]`
/// where `M` is the Mehler kernel.
pub fn r_correction(t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    let c = 2.0 * t.cosh();
    let s = 2.0 * t.sinh();
    let r2 = x * x + y * y;
    let xy = x * y;
    let cubic = t.powi(3) / 12.0 * (0.25 * c / s + (c * xy - r2) / (s * s));
    let quad = t * t / 16.0 * (1.0 + (4.0 * xy - c * r2) / s);
    Ok(mehler_unchecked(t, x, y) * (cubic + quad))
}

/// Number of sine-series terms so that the first omitted one is below 1e−15.
pub fn dirichlet_terms(t: f64) -> Result<usize> {
    check_time(t)?;
    Ok(((1e15f64).ln() / (PI * PI * t)).sqrt().ceil() as usize + 1)
}

/// Heat kernel of the Dirichlet Laplacian `−∂²` on `(0, 1)`, by its sine series.
pub fn dirichlet_heat_kernel(t: f64, x: f64, y: f64, terms: usize) -> Result<f64> {
    check_time(t)?;
    if terms == 0 {
        return invalid("sine series needs at least one term");
    }
    for v in [x, y] {
        if !(v > 0.0 && v < 1.0) {
            return invalid(format!("Dirichlet kernel is defined on (0, 1), got {v}"));
        }
    }
    // fixed argument order keeps the value exactly symmetric
    let (u, v) = if x <= y { (x, y) } else { (y, x) };
    let mut sum = 0.0;
    for k in 1..=terms {
        let kp = k as f64 * PI;
        sum += (-kp * kp * t).exp() * (kp * u).sin() * (kp * v).sin();
    }
    Ok(2.0 * sum)
}

/// A labelled kernel evaluator `(t, x, y) ↦ K(t, x, y)`.
#[derive(Clone)]
pub struct KernelFn {
    label: String,
    eval: Arc<dyn Fn(f64, f64, f64) -> Result<f64> + Send + Sync>,
}

impl KernelFn {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64, f64, f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), eval: Arc::new(eval) }
    }

    pub fn free_heat(diffusion: f64) -> Self {
        Self::new(format!("free-heat(D={diffusion})"), move |t, x, y| {
            free_heat_kernel(t, x, y, diffusion)
        })
    }

    pub fn mehler() -> Self {
        Self::new("mehler", mehler_kernel)
    }

    pub fn strang_step() -> Self {
        Self::new("strang-step", strang_step_kernel)
    }

    pub fn strang_product(n: u32) -> Self {
        Self::new(format!("strang-product(n={n})"), move |t, x, y| kn_closed_form(t, n, x, y))
    }

    pub fn correction() -> Self {
        Self::new("correction", r_correction)
    }

    pub fn dirichlet() -> Self {
        Self::new("dirichlet", |t, x, y| dirichlet_heat_kernel(t, x, y, dirichlet_terms(t)?))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        (self.eval)(t, x, y)
    }
}

impl fmt::Debug for KernelFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelFn").field("label", &self.label).finish_non_exhaustive()
    }
}
