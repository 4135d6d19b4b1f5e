//! Symmetric second-order tensors in the 4-component Voigt layout used
//! throughout the crate: `(xx, yy, zz, xy)`.
//!
//! The `xy` slot always stores the *tensor* component. Engineering shear
//! (`gamma = 2 eps_xy`) only appears at the strain-displacement matrix
//! boundary; conversions happen there and nowhere else.

use std::ops::{Add, Mul, Sub};

/// Symmetric tensor with the in-plane and out-of-plane normal components
/// plus the in-plane shear relevant to plane strain.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Sym4 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
}

impl Sym4 {
    pub const ZERO: Sym4 = Sym4 {
        xx: 0.0,
        yy: 0.0,
        zz: 0.0,
        xy: 0.0,
    };

    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64) -> Self {
        Sym4 { xx, yy, zz, xy }
    }

    /// Spherical tensor `c * I`.
    pub fn iso(c: f64) -> Self {
        Sym4::new(c, c, c, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn dev(&self) -> Sym4 {
        let m = self.trace() / 3.0;
        Sym4::new(self.xx - m, self.yy - m, self.zz - m, self.xy)
    }

    /// Full contraction `a : b`, counting the shear component twice.
    pub fn ddot(&self, other: &Sym4) -> f64 {
        self.xx * other.xx + self.yy * other.yy + self.zz * other.zz + 2.0 * self.xy * other.xy
    }

    /// Von Mises norm `sqrt(3/2 s:s)` of the deviatoric part.
    pub fn von_mises(&self) -> f64 {
        let s = self.dev();
        (1.5 * s.ddot(&s)).sqrt()
    }

    /// Equivalent-strain norm `sqrt(2/3 e':e')` of the deviatoric part.
    pub fn eq_strain(&self) -> f64 {
        let e = self.dev();
        ((2.0 / 3.0) * e.ddot(&e)).sqrt()
    }

    /// Components as the Voigt 4-vector `(xx, yy, zz, xy)`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.xx, self.yy, self.zz, self.xy]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Sym4::new(a[0], a[1], a[2], a[3])
    }

    /// Entry of the full 3x3 matrix representation (zero off-plane shears).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            (2, 2) => self.zz,
            (0, 1) | (1, 0) => self.xy,
            _ => 0.0,
        }
    }
}

impl Add for Sym4 {
    type Output = Sym4;
    fn add(self, o: Sym4) -> Sym4 {
        Sym4::new(self.xx + o.xx, self.yy + o.yy, self.zz + o.zz, self.xy + o.xy)
    }
}

impl Sub for Sym4 {
    type Output = Sym4;
    fn sub(self, o: Sym4) -> Sym4 {
        Sym4::new(self.xx - o.xx, self.yy - o.yy, self.zz - o.zz, self.xy - o.xy)
    }
}

impl Mul<f64> for Sym4 {
    type Output = Sym4;
    fn mul(self, c: f64) -> Sym4 {
        Sym4::new(self.xx * c, self.yy * c, self.zz * c, self.xy * c)
    }
}
