/// Solution of `u' = β u - α u^p`, `u(0) = λ0` (`λ0 = ∞` allowed), at time `t`.
///
/// Closed form through `w = u^(1-p)`, which solves the linear equation
/// `w' = (p-1)(α - β w)`.
pub fn mass_ode(alpha: f64, beta: f64, p: f64, lambda0: f64, t: f64) -> f64 {
    assert!(alpha > 0.0 && p > 1.0, "mass_ode needs alpha > 0 and p > 1");
    if lambda0 == 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        return lambda0;
    }
    let w0 = if lambda0.is_infinite() {
        0.0
    } else {
        lambda0.powf(1.0 - p)
    };
    let k = (p - 1.0) * beta * t;
    let w = if beta == 0.0 {
        w0 + (p - 1.0) * alpha * t
    } else {
        // (1 - e^{-k}) / β without cancellation for small k.
        w0 * (-k).exp() - alpha * (-k).exp_m1() / beta
    };
    w.powf(-1.0 / (p - 1.0))
}
