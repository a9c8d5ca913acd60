//! Built-in benchmark formulas.

use super::expr::{Sym, Tracer};
use super::{parse, trace, TracedGraph};

/// 1D heat equation, midpoint (two-stage Runge-Kutta) time step.
pub const HEAT1D_MIDPOINT_SOURCE: &str = "\
# 1D heat equation, midpoint rule
input u0;
let Dt = 0.001;
let Dx = 0.1;
let uHalf = u0 + Dt / Dx / Dx / 2 * (im(u0) - 2 * u0 + ip(u0));
output u1 = u0 + Dt / Dx / Dx * (im(uHalf) - 2 * uHalf + ip(uHalf));
";

/// 3D heat equation, midpoint (two-stage Runge-Kutta) time step.
pub const HEAT3D_MIDPOINT_SOURCE: &str = "\
# 3D heat equation, midpoint rule
input u;
let dt = 0.001;
let dx = 0.1;
let uh = u + 0.5 * dt / dx / dx * (im(u) + ip(u) - 2 * u +
                                   jm(u) + jp(u) - 2 * u +
                                   km(u) + kp(u) - 2 * u);
output un = u + dt / dx / dx * (im(uh) + ip(uh) - 2 * uh +
                                jm(uh) + jp(uh) - 2 * uh +
                                km(uh) + kp(uh) - 2 * uh);
";

pub fn gen_heat1d_midpoint() -> TracedGraph {
    trace(&parse(HEAT1D_MIDPOINT_SOURCE).expect("built-in heat1d source parses"))
}

pub fn gen_heat3d_midpoint() -> TracedGraph {
    trace(&parse(HEAT3D_MIDPOINT_SOURCE).expect("built-in heat3d source parses"))
}

/// Scalar coefficients of the Euler scheme. Their values only show up in
/// emitted kernels; the graph structure does not depend on them.
struct EulerCoefficients<'t> {
    dt: Sym<'t>,
    dx: Sym<'t>,
    dy: Sym<'t>,
    dz: Sym<'t>,
    gamma: Sym<'t>,
    c0: Sym<'t>,
    diss_coeff: Sym<'t>,
}

/// Per-grid-point forcing fields.
struct Forcing<'t> {
    fan: Sym<'t>,
    obstacle: Sym<'t>,
    r_fan: Sym<'t>,
    u_fan: [Sym<'t>; 3],
    p_fan: Sym<'t>,
}

struct Euler<'t> {
    t: &'t Tracer,
    k: EulerCoefficients<'t>,
    f: Forcing<'t>,
}

impl<'t> Euler<'t> {
    fn two(&self) -> Sym<'t> {
        self.t.int(2)
    }

    fn diffx(&self, w: Sym<'t>) -> Sym<'t> {
        (w.ip() - w.im()) / (self.two() * self.k.dx)
    }
    fn diffy(&self, w: Sym<'t>) -> Sym<'t> {
        (w.jp() - w.jm()) / (self.two() * self.k.dy)
    }
    fn diffz(&self, w: Sym<'t>) -> Sym<'t> {
        (w.kp() - w.km()) / (self.two() * self.k.dz)
    }

    fn div_dot_v_phi(&self, v: [Sym<'t>; 3], phi: Sym<'t>) -> Sym<'t> {
        self.diffx(v[0] * phi) + self.diffy(v[1] * phi) + self.diffz(v[2] * phi)
    }

    fn v_dot_grad_phi(&self, v: [Sym<'t>; 3], phi: Sym<'t>) -> Sym<'t> {
        v[0] * self.diffx(phi) + v[1] * self.diffy(phi) + v[2] * self.diffz(phi)
    }

    fn laplace(&self, u: Sym<'t>) -> Sym<'t> {
        (u.ip() + u.im() + u.jp() + u.jm() + u.kp() + u.km()) / self.t.int(6) - u
    }

    fn dissipation(&self, r: Sym<'t>, u: Sym<'t>) -> Sym<'t> {
        self.laplace(self.k.diss_coeff * r * r * self.laplace(u))
    }

    fn rhs(&self, w: [Sym<'t>; 5]) -> [Sym<'t>; 5] {
        let [r, rux, ruy, ruz, p] = w;
        let (k, f) = (&self.k, &self.f);
        let one = self.t.int(1);
        let (ux, uy, uz) = (rux / r, ruy / r, ruz / r);
        let ru = [rux, ruy, ruz];
        let u = [ux, uy, uz];

        let mass = self.div_dot_v_phi(ru, r);
        let mom_x = (self.div_dot_v_phi(ru, rux) + r * self.v_dot_grad_phi(ru, ux)) / self.two() + self.diffx(p);
        let mom_y = (self.div_dot_v_phi(ru, ruy) + r * self.v_dot_grad_phi(ru, uy)) / self.two() + self.diffy(p);
        let mom_z = (self.div_dot_v_phi(ru, ruz) + r * self.v_dot_grad_phi(ru, uz)) / self.two() + self.diffz(p);
        let energy = k.gamma * self.div_dot_v_phi(u, p) - (k.gamma - one) * self.v_dot_grad_phi(u, p);

        let dissipation_x = self.dissipation(r, ux) * k.c0 / k.dx;
        let dissipation_y = self.dissipation(r, uy) * k.c0 / k.dy;
        let dissipation_z = self.dissipation(r, uz) * k.c0 / k.dz;

        let rhs_r = k.c0 * f.fan * (r - f.r_fan);
        let rhs_ux = k.c0 * f.fan * (ux - f.u_fan[0]) + k.c0 * f.obstacle * ux;
        let rhs_uy = k.c0 * f.fan * (uy - f.u_fan[1]) + k.c0 * f.obstacle * uy;
        let rhs_uz = k.c0 * f.fan * (uz - f.u_fan[2]) + k.c0 * f.obstacle * uz;
        let rhs_p = k.c0 * f.fan * (p - f.p_fan);

        [
            -((mass - rhs_r) / (self.two() * r) + f.fan * (r - f.r_fan)),
            -((mom_x + dissipation_x - rhs_ux) / r),
            -((mom_y + dissipation_y - rhs_uy) / r),
            -((mom_z + dissipation_z - rhs_uz) / r),
            -(energy - rhs_p),
        ]
    }

    fn scaled_rhs(&self, w: [Sym<'t>; 5]) -> [Sym<'t>; 5] {
        self.rhs(w).map(|x| self.k.dt * x)
    }
}

fn axpy<'t>(w: [Sym<'t>; 5], a: Sym<'t>, d: [Sym<'t>; 5]) -> [Sym<'t>; 5] {
    std::array::from_fn(|i| w[i] + a * d[i])
}

/// One classical RK4 step of a skew-symmetric, dissipative finite-difference
/// discretisation of the 3D Euler equations.
///
/// The state `(r, rux, ruy, ruz, p)` and the forcing fields (`fan`,
/// `obstacle` and the fan targets) are unit-weight inputs.
pub fn gen_euler3d_rk4() -> TracedGraph {
    let t = Tracer::new();
    let w = ["r", "rux", "ruy", "ruz", "p"].map(|n| t.input(n, 1));
    let f = Forcing {
        fan: t.input("fan", 1),
        obstacle: t.input("obstacle", 1),
        r_fan: t.input("r_fan", 1),
        u_fan: ["ux_fan", "uy_fan", "uz_fan"].map(|n| t.input(n, 1)),
        p_fan: t.input("p_fan", 1),
    };
    let k = EulerCoefficients {
        dt: t.ratio(1, 100),
        dx: t.ratio(1, 10),
        dy: t.ratio(1, 10),
        dz: t.ratio(1, 10),
        gamma: t.ratio(7, 5),
        c0: t.ratio(1, 2),
        diss_coeff: t.ratio(1, 20),
    };
    let e = Euler { t: &t, k, f };

    let half = t.ratio(1, 2);
    let one = t.int(1);
    let dw0 = e.scaled_rhs(w);
    let dw1 = e.scaled_rhs(axpy(w, half, dw0));
    let dw2 = e.scaled_rhs(axpy(w, half, dw1));
    let dw3 = e.scaled_rhs(axpy(w, one, dw2));
    let next: [Sym<'_>; 5] =
        std::array::from_fn(|i| w[i] + (dw0[i] + dw3[i]) / t.int(6) + (dw1[i] + dw2[i]) / t.int(3));

    for (name, v) in ["r_next", "rux_next", "ruy_next", "ruz_next", "p_next"].into_iter().zip(next) {
        t.output(name, v);
    }
    trace(&t.finish().expect("built-in Euler formula is well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::VertexOp;

    #[test]
    fn heat1d_shape() {
        let t = gen_heat1d_midpoint();
        let g = &t.graph;
        let r = g.validate().unwrap();
        assert_eq!(g.vertex_count(), 15);
        assert_eq!(g.edge_count(), 20);
        assert_eq!(g.swept_edge_count(), 4);
        assert_eq!(r.sources.len(), 1);
        assert_eq!(r.sinks.len(), 1);
        assert_eq!(g.swept_depth().unwrap(), 2);
        assert!(g.vertices().iter().any(|v| v.label.as_deref() == Some("uHalf")));
    }

    #[test]
    fn heat3d_shape() {
        let g = gen_heat3d_midpoint().graph;
        g.validate().unwrap();
        assert_eq!(g.swept_depth().unwrap(), 2);
        // one swept edge per shift: six directions on u, six on uh
        assert_eq!(g.swept_edge_count(), 12);
        assert_eq!(g.vertex_count(), 35);
        assert_eq!(g.edge_count(), 52);
    }

    #[test]
    fn euler3d_shape() {
        let t = gen_euler3d_rk4();
        let g = &t.graph;
        let r = g.validate().unwrap();
        assert_eq!(g.swept_depth().unwrap(), 8);
        assert_eq!(r.sources.len(), 12);
        assert_eq!(r.sinks.len(), 5);
        assert!(r.isolated.is_empty());
        assert_eq!(t.ops.iter().filter(|o| matches!(o, VertexOp::Shift(..))).count(), g.swept_edge_count());
    }
}
