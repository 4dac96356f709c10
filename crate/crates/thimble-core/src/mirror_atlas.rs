//! The glued mirror: a torus chart `(z1, z2)`, three immersed charts `(u_i, v_i)`
//! with `v_i = 1 / z_{i+1}` and `u_i v_i = 1 + w_{i+1}`, and the potential on each.

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::fibration::{branch_points, FibrationError};
use crate::numkernel::ZETA;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AtlasError {
    #[error("torus coordinates must be nonzero")]
    ZeroCoordinate,
    #[error("immersed chart index must be 1, 2 or 3")]
    BadChart,
    #[error("point lies on the excluded locus uv = 1")]
    OnExcludedLocus,
    #[error("point with v = 0 is not in the torus chart")]
    OffTorusChart,
    #[error(transparent)]
    Fibration(#[from] FibrationError),
}

/// Point of the torus chart; `z3 = 1 / (z1 z2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusChartPoint {
    z1: C64,
    z2: C64,
}

impl TorusChartPoint {
    pub fn new(z1: C64, z2: C64) -> Result<Self, AtlasError> {
        if z1 == C64::new(0.0, 0.0) || z2 == C64::new(0.0, 0.0) || !(z1.is_finite() && z2.is_finite()) {
            return Err(AtlasError::ZeroCoordinate);
        }
        Ok(TorusChartPoint { z1, z2 })
    }

    /// `z_k` for any integer `k`, indices taken mod 3 in `{1, 2, 3}`.
    pub fn z(&self, k: i64) -> C64 {
        match k.rem_euclid(3) {
            1 => self.z1,
            2 => self.z2,
            _ => (self.z1 * self.z2).inv(),
        }
    }

    /// `w_k = z_{k+1} / z_k`.
    pub fn w(&self, k: i64) -> C64 {
        self.z(k + 1) / self.z(k)
    }

    /// `(z1, z2, z3) -> (z2, z3, z1)`.
    pub fn rotated(&self) -> Self {
        TorusChartPoint {
            z1: self.z(2),
            z2: self.z(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmersedChartPoint {
    pub i: u8,
    pub u: C64,
    pub v: C64,
}

impl ImmersedChartPoint {
    pub fn new(i: u8, u: C64, v: C64) -> Result<Self, AtlasError> {
        if !(1..=3).contains(&i) {
            return Err(AtlasError::BadChart);
        }
        Ok(ImmersedChartPoint { i, u, v })
    }
}

pub fn torus_to_immersed(p: &TorusChartPoint, i: u8) -> Result<ImmersedChartPoint, AtlasError> {
    if !(1..=3).contains(&i) {
        return Err(AtlasError::BadChart);
    }
    let k = i as i64;
    let a = p.z(k + 1);
    Ok(ImmersedChartPoint {
        i,
        u: a + p.z(k + 2),
        v: a.inv(),
    })
}

/// Inverse on the overlap `v != 0`: `z_{i+1} = 1/v`, `z_{i+2} = u - 1/v`.
pub fn immersed_to_torus(p: &ImmersedChartPoint) -> Result<TorusChartPoint, AtlasError> {
    if p.v == C64::new(0.0, 0.0) {
        return Err(AtlasError::OffTorusChart);
    }
    let a = p.v.inv();
    let b = p.u - a;
    // (z_{i+1}, z_{i+2}) for i = 1, 2, 3 is (z2, z3), (z3, z1), (z1, z2)
    match p.i {
        1 => TorusChartPoint::new((a * b).inv(), a),
        2 => TorusChartPoint::new(b, (a * b).inv()),
        3 => TorusChartPoint::new(a, b),
        _ => Err(AtlasError::BadChart),
    }
}

/// `T^{A/3}` with `T` either a positive number or the formal unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NovikovScale {
    pub area: f64,
    pub t_value: Option<f64>,
}

impl NovikovScale {
    pub const ONE: NovikovScale = NovikovScale {
        area: 1.0,
        t_value: None,
    };

    pub fn factor(&self) -> f64 {
        match self.t_value {
            None => 1.0,
            Some(t) => t.powf(self.area / 3.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPoint {
    Torus(TorusChartPoint),
    Immersed(ImmersedChartPoint),
}

pub fn eval_w(point: &ChartPoint, scale: NovikovScale) -> Result<C64, AtlasError> {
    let w = match point {
        ChartPoint::Torus(p) => p.z1 + p.z2 + (p.z1 * p.z2).inv(),
        ChartPoint::Immersed(p) => {
            let e = p.u * p.v - 1.0;
            if e == C64::new(0.0, 0.0) {
                return Err(AtlasError::OnExcludedLocus);
            }
            p.u + p.v * p.v / e
        }
    };
    Ok(w * scale.factor())
}

/// `|u (uv - 1) + v^2 - c (uv - 1)|`.
pub fn fiber_equation_check(c: C64, p: &ImmersedChartPoint) -> f64 {
    let e = p.u * p.v - 1.0;
    (p.u * e + p.v * p.v - c * e).norm()
}

/// `sum u_i^3 + 2 u1 u2 u3 - sum_{i != j} u_i^2 u_j`.
pub fn cubic_relation(u1: C64, u2: C64, u3: C64) -> C64 {
    let cubes = u1 * u1 * u1 + u2 * u2 * u2 + u3 * u3 * u3;
    let mixed = u1 * u1 * (u2 + u3) + u2 * u2 * (u1 + u3) + u3 * u3 * (u1 + u2);
    cubes + u1 * u2 * u3 * 2.0 - mixed
}

/// Value of [`cubic_relation`] on points coming from the torus chart.
pub const CUBIC_RELATION_CONSTANT: f64 = -8.0;

/// A critical value with its singular fiber: the branch cubic of the
/// `t1`-projection has a double root there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFiber {
    pub value: C64,
    pub critical_point: TorusChartPoint,
    pub double_root: C64,
    pub simple_root: C64,
}

/// Critical points of the potential: `z1 = z2 = zeta^k` in the torus chart
/// (the immersed charts add none: there `uv = 2`, `v^3 = 1`, which lies in the overlap).
pub fn critical_values_of_w_atlas() -> Result<[CriticalFiber; 3], AtlasError> {
    let mut out = [CriticalFiber {
        value: C64::new(0.0, 0.0),
        critical_point: TorusChartPoint::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0))?,
        double_root: C64::new(0.0, 0.0),
        simple_root: C64::new(0.0, 0.0),
    }; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let z = ZETA.powu(k as u32);
        let p = TorusChartPoint::new(z, z)?;
        let value = eval_w(&ChartPoint::Torus(p), NovikovScale::ONE)?;
        let bd = branch_points(value)?;
        let mut double = None;
        let mut simple = None;
        for (r, m) in bd.roots.iter().zip(bd.multiplicity) {
            match m {
                2 => double = Some(*r),
                1 => simple = Some(*r),
                _ => {}
            }
        }
        *slot = CriticalFiber {
            value,
            critical_point: p,
            double_root: double.unwrap_or(C64::new(f64::NAN, f64::NAN)),
            simple_root: simple.unwrap_or(C64::new(f64::NAN, f64::NAN)),
        };
    }
    Ok(out)
}
