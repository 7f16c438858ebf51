use num_complex::Complex64;

/// Scratch buffers for one classical RK4 step over a flat complex state.
#[derive(Debug, Clone)]
pub(crate) struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); len];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    /// Advance `y` from `t` to `t + dt`. `rhs(t, y, out)` must overwrite `out`.
    pub fn step<F>(&mut self, rhs: &mut F, t: f64, dt: f64, y: &mut [Complex64])
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let h = Complex64::new(dt, 0.0);
        let half = Complex64::new(0.5 * dt, 0.0);

        rhs(t, y, &mut self.k1);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = y + half * k;
        }
        rhs(t + 0.5 * dt, &self.tmp, &mut self.k2);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = y + half * k;
        }
        rhs(t + 0.5 * dt, &self.tmp, &mut self.k3);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = y + h * k;
        }
        rhs(t + dt, &self.tmp, &mut self.k4);

        let sixth = Complex64::new(dt / 6.0, 0.0);
        for i in 0..y.len() {
            y[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}
