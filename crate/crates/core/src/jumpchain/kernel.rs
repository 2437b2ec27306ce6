use rand::Rng;

use crate::closedform::{BasisValues, BmGreenBasis, GreenBasis, OuGreenBasis};
use crate::error::{Error, Result};
use crate::quad::{gauss10, integrate_from};

const NODES: usize = 2048;
const GEOMETRIC_NODES: usize = 128;
const FIRST_NODE: f64 = 1e-5;
/// Mass of the killing position above the cutoff, started from 0.
const TAIL_MASS: f64 = 1e-12;
const NORMALISATION_TOL: f64 = 1e-9;

/// Green basis of the killed reflected BM (canonical γ = 1/2) or OU diffusion.
#[derive(Clone, Debug)]
pub enum KernelBasis {
    Bm(BmGreenBasis),
    Ou(OuGreenBasis),
}

impl KernelBasis {
    fn values(&self, x: f64) -> BasisValues {
        match self {
            KernelBasis::Bm(b) => b.values(x),
            KernelBasis::Ou(b) => b.values(x),
        }
    }

    fn green(&self) -> &dyn GreenBasis {
        match self {
            KernelBasis::Bm(b) => b,
            KernelBasis::Ou(b) => b,
        }
    }
}

/// Cumulative function on the node grid with its derivative at the nodes,
/// interpolated by monotone cubic Hermite pieces.
#[derive(Clone, Debug)]
struct Cumulative {
    values: Vec<f64>,
    // Per interval: left and right end slopes after the monotonicity limiter.
    left_slope: Vec<f64>,
    right_slope: Vec<f64>,
}

impl Cumulative {
    fn new(nodes: &[f64], values: Vec<f64>, slopes: &[f64]) -> Self {
        let m = nodes.len() - 1;
        let mut left_slope = Vec::with_capacity(m);
        let mut right_slope = Vec::with_capacity(m);
        for i in 0..m {
            let h = nodes[i + 1] - nodes[i];
            let delta = (values[i + 1] - values[i]) / h;
            let (mut d0, mut d1) = (slopes[i], slopes[i + 1]);
            if delta == 0.0 {
                d0 = 0.0;
                d1 = 0.0;
            } else {
                // Fritsch-Carlson: keep slopes on the secant's side and inside the circle of radius 3.
                let (a, b) = ((d0 / delta).max(0.0), (d1 / delta).max(0.0));
                let r2 = a * a + b * b;
                let scale = if r2 > 9.0 { 3.0 / r2.sqrt() } else { 1.0 };
                d0 = a * scale * delta;
                d1 = b * scale * delta;
            }
            left_slope.push(d0);
            right_slope.push(d1);
        }
        Cumulative { values, left_slope, right_slope }
    }

    fn eval_in(&self, nodes: &[f64], i: usize, x: f64) -> f64 {
        let h = nodes[i + 1] - nodes[i];
        let t = (x - nodes[i]) / h;
        self.hermite(i, h, t)
    }

    fn hermite(&self, i: usize, h: f64, t: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * h * self.left_slope[i]
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * h * self.right_slope[i]
    }

    fn hermite_slope(&self, i: usize, h: f64, t: f64) -> f64 {
        let t2 = t * t;
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        (6.0 * t2 - 6.0 * t) * (f0 - f1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.left_slope[i]
            + (3.0 * t2 - 2.0 * t) * self.right_slope[i]
    }

    /// Solves F(x) = target on the node grid; F monotone (either direction).
    fn invert(&self, nodes: &[f64], target: f64) -> f64 {
        let v = &self.values;
        let increasing = v[v.len() - 1] >= v[0];
        let (lo_v, hi_v) = if increasing { (v[0], v[v.len() - 1]) } else { (v[v.len() - 1], v[0]) };
        if target <= lo_v {
            return if increasing { nodes[0] } else { nodes[nodes.len() - 1] };
        }
        if target >= hi_v {
            return if increasing { nodes[nodes.len() - 1] } else { nodes[0] };
        }
        // First node whose value has passed the target.
        let k = if increasing {
            v.partition_point(|&f| f < target)
        } else {
            v.partition_point(|&f| f > target)
        };
        let i = k.clamp(1, v.len() - 1) - 1;
        let h = nodes[i + 1] - nodes[i];
        let sign = if increasing { 1.0 } else { -1.0 };
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let denom = v[i + 1] - v[i];
        let mut t = if denom != 0.0 { ((target - v[i]) / denom).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..60 {
            let g = sign * (self.hermite(i, h, t) - target);
            if g == 0.0 {
                break;
            }
            if g > 0.0 {
                b = t;
            } else {
                a = t;
            }
            let d = sign * self.hermite_slope(i, h, t);
            let newton = if d > 0.0 { t - g / d } else { f64::NAN };
            t = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a < 1e-15 {
                break;
            }
        }
        nodes[i] + t * h
    }
}

/// Tabulated killing kernel of the killed reflected diffusion: the law of
/// the killing position Z from any start x, and E_x[τ].
///
/// With killing measure k(y) = γ·y·m(y), the density of Z started at x is
/// φ(x)ψ(y)k(y) for y < x and ψ(x)φ(y)k(y) for y > x. The tables hold
/// A(z) = ∫_0^z ψk, B(z) = ∫_z^∞ φk, I(z) = ∫_0^z Ψ, J(z) = ∫_z^∞ Φ.
#[derive(Clone, Debug)]
pub struct KillingKernel {
    nodes: Vec<f64>,
    phi: Cumulative,
    psi: Cumulative,
    a: Cumulative,
    b: Cumulative,
    i: Cumulative,
    j: Cumulative,
}

impl KillingKernel {
    pub fn new(basis: &KernelBasis) -> Result<Self> {
        let g = basis.green();
        let k_psi = |y: f64| g.killing_measure(y) * g.psi(y);
        let k_phi = |y: f64| g.killing_measure(y) * g.phi(y);
        let psi0 = g.psi(0.0);

        let z_max = cutoff(&k_phi, psi0, g)?;
        let nodes = node_grid(z_max);
        let vals: Vec<BasisValues> = nodes.iter().map(|&x| basis.values(x)).collect();
        if vals.iter().any(|v| !(v.phi.is_finite() && v.psi.is_finite())) {
            return Err(Error::Tabulation(format!("basis not finite on [0, {z_max}]")));
        }

        let m = nodes.len();
        let mut a = vec![0.0; m];
        let mut ii = vec![0.0; m];
        for k in 1..m {
            let (lo, hi) = (nodes[k - 1], nodes[k]);
            a[k] = a[k - 1] + gauss10(&k_psi, lo, hi);
            ii[k] = ii[k - 1] + gauss10(&|y| g.big_psi(y), lo, hi);
        }
        let mut b = vec![0.0; m];
        let mut jj = vec![0.0; m];
        b[m - 1] = integrate_from(&k_phi, z_max, g.decay())?;
        jj[m - 1] = integrate_from(&|y| g.big_phi(y), z_max, g.decay())?;
        for k in (0..m - 1).rev() {
            let (lo, hi) = (nodes[k], nodes[k + 1]);
            b[k] = b[k + 1] + gauss10(&k_phi, lo, hi);
            jj[k] = jj[k + 1] + gauss10(&|y| g.big_phi(y), lo, hi);
        }

        let km: Vec<f64> = nodes.iter().map(|&y| g.killing_measure(y)).collect();
        let sd: Vec<f64> = nodes.iter().map(|&y| g.scale_density(y)).collect();
        let slopes = |f: &dyn Fn(usize) -> f64| (0..m).map(f).collect::<Vec<f64>>();
        let phi = Cumulative::new(&nodes, vals.iter().map(|v| v.phi).collect(), &slopes(&|k| vals[k].phi_prime));
        let psi = Cumulative::new(&nodes, vals.iter().map(|v| v.psi).collect(), &slopes(&|k| vals[k].psi_prime));
        let a = Cumulative::new(&nodes, a, &slopes(&|k| km[k] * vals[k].psi));
        let b = Cumulative::new(&nodes, b, &slopes(&|k| -km[k] * vals[k].phi));
        let i = Cumulative::new(&nodes, ii, &slopes(&|k| vals[k].psi / sd[k]));
        let j = Cumulative::new(&nodes, jj, &slopes(&|k| -vals[k].phi / sd[k]));
        let kernel = KillingKernel { nodes, phi, psi, a, b, i, j };

        for &x in &[0.0, 0.5 * z_max.min(2.0), z_max.min(2.0)] {
            let mass = kernel.mass(x)?;
            if (mass - 1.0).abs() > NORMALISATION_TOL {
                return Err(Error::Tabulation(format!("killing law at x = {x} has mass {mass}")));
            }
        }
        Ok(kernel)
    }

    /// Largest tabulated start point.
    pub fn z_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    fn locate(&self, x: f64) -> Result<usize> {
        if !(x >= 0.0 && x <= self.z_max()) {
            return Err(Error::Tabulation(format!("x = {x} outside the table [0, {}]", self.z_max())));
        }
        let k = self.nodes.partition_point(|&n| n <= x);
        Ok(k.clamp(1, self.nodes.len() - 1) - 1)
    }

    /// (φ, ψ, A, B, I, J) at x.
    fn at(&self, x: f64) -> Result<[f64; 6]> {
        let i = self.locate(x)?;
        let n = &self.nodes;
        Ok([
            self.phi.eval_in(n, i, x),
            self.psi.eval_in(n, i, x),
            self.a.eval_in(n, i, x),
            self.b.eval_in(n, i, x),
            self.i.eval_in(n, i, x),
            self.j.eval_in(n, i, x),
        ])
    }

    /// Total mass of the killing law from x (1 up to tabulation error).
    pub fn mass(&self, x: f64) -> Result<f64> {
        let [phi, psi, a, b, _, _] = self.at(x)?;
        Ok(phi * a + psi * b)
    }

    /// CDF of the killing position started at x, evaluated at z.
    pub fn cdf(&self, x: f64, z: f64) -> Result<f64> {
        let [phi_x, psi_x, a_x, b_x, _, _] = self.at(x)?;
        if z <= 0.0 {
            return Ok(0.0);
        }
        let z = z.min(self.z_max());
        let iz = self.locate(z)?;
        let n = &self.nodes;
        Ok(if z <= x {
            phi_x * self.a.eval_in(n, iz, z)
        } else {
            phi_x * a_x + psi_x * (b_x - self.b.eval_in(n, iz, z))
        })
    }

    /// E_x[τ] = 2(φ(x)I(x) + ψ(x)J(x)).
    pub fn expected_killing_time(&self, x: f64) -> Result<f64> {
        let [phi, psi, _, _, i, j] = self.at(x)?;
        Ok(2.0 * (phi * i + psi * j))
    }

    /// One draw of the killing position started at x.
    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> Result<f64> {
        let [phi, psi, a, b, _, _] = self.at(x)?;
        let p = phi * a;
        let q = psi * b;
        let v = rng.random::<f64>() * (p + q);
        Ok(if v < p {
            self.a.invert(&self.nodes, v / phi).min(x)
        } else {
            self.b.invert(&self.nodes, (p + q - v) / psi).max(x)
        })
    }
}

/// Cutoff where the killing law started at 0 has mass ≤ TAIL_MASS above it.
fn cutoff(k_phi: &dyn Fn(f64) -> f64, psi0: f64, g: &dyn GreenBasis) -> Result<f64> {
    let mut z = 1.0;
    while z <= 400.0 {
        let tail = psi0 * integrate_from(&|y| k_phi(y), z, g.decay())?;
        if tail <= TAIL_MASS {
            return Ok(z);
        }
        z += 0.5;
    }
    Err(Error::Tabulation("killing law has no mass cutoff below 400".into()))
}

/// 0, then geometric nodes up to a knee, then uniform nodes to z_max.
fn node_grid(z_max: f64) -> Vec<f64> {
    let knee = (z_max / 32.0).min(0.1);
    let mut nodes = Vec::with_capacity(NODES);
    nodes.push(0.0);
    let ratio = (knee / FIRST_NODE).powf(1.0 / (GEOMETRIC_NODES - 1) as f64);
    let mut z = FIRST_NODE;
    for _ in 0..GEOMETRIC_NODES - 1 {
        nodes.push(z);
        z *= ratio;
    }
    let rest = NODES - nodes.len();
    let h = (z_max - knee) / rest as f64;
    for k in 0..rest {
        nodes.push(knee + k as f64 * h);
    }
    nodes.push(z_max);
    nodes
}
