//! Test-support utilities shared by the integration suites.
//!
//! The double-double type below provides ~31 significant digits using
//! error-free transformations (Dekker/Knuth), enough to serve as an
//! independent high-precision oracle for the closed-form geometry. It
//! deliberately lives in test code only.

#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: f64::mul_add(a, b, -p),
    }
}

impl Dd {
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };

    pub fn new(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let t = two_sum(self.lo, other.lo);
        let first = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(first.hi, first.lo + t.lo)
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    pub fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        quick_two_sum(p.hi, p.lo + self.hi * other.lo + self.lo * other.hi)
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r1 = self.sub(other.mul(Dd::new(q1)));
        let q2 = r1.hi / other.hi;
        let r2 = r1.sub(other.mul(Dd::new(q2)));
        let q3 = r2.hi / other.hi;
        quick_two_sum(q1, q2).add(Dd::new(q3))
    }

    pub fn sqrt(self) -> Dd {
        let mut y = Dd::new(self.hi.sqrt());
        for _ in 0..2 {
            y = y.add(self.div(y)).mul(Dd::new(0.5));
        }
        y
    }

    pub fn cbrt(self) -> Dd {
        let mut y = Dd::new(self.hi.cbrt());
        for _ in 0..2 {
            let y2 = y.mul(y);
            y = y.mul(Dd::new(2.0)).add(self.div(y2)).div(Dd::new(3.0));
        }
        y
    }
}

/// Two-body radii evaluated entirely in double-double arithmetic.
pub fn dd_two_body_radii(m1: f64, m2: f64, period: f64) -> (f64, f64) {
    let msum = Dd::new(m1).add(Dd::new(m2));
    let base = Dd::new(period).div(Dd::PI.mul(Dd::new(2.0)).mul(msum));
    let c = base.cbrt();
    let factor = c.mul(c);
    (
        factor.mul(Dd::new(m2)).to_f64(),
        factor.mul(Dd::new(m1)).to_f64(),
    )
}

/// Three-body side length in double-double arithmetic.
pub fn dd_three_body_side(m: [f64; 3], period: f64) -> f64 {
    let total = Dd::new(m[0]).add(Dd::new(m[1])).add(Dd::new(m[2]));
    let four_pi2 = Dd::PI.mul(Dd::PI).mul(Dd::new(4.0));
    total
        .mul(Dd::new(period))
        .mul(Dd::new(period))
        .div(four_pi2)
        .cbrt()
        .to_f64()
}

fn pair_norm(a: f64, b: f64) -> Dd {
    let (a, b) = (Dd::new(a), Dd::new(b));
    a.mul(a).add(a.mul(b)).add(b.mul(b)).sqrt()
}

/// Three-body radii in double-double arithmetic.
pub fn dd_three_body_radii(m: [f64; 3], period: f64) -> [f64; 3] {
    let side = Dd::new(dd_three_body_side(m, period));
    let total = Dd::new(m[0]).add(Dd::new(m[1])).add(Dd::new(m[2]));
    [
        side.mul(pair_norm(m[1], m[2])).div(total).to_f64(),
        side.mul(pair_norm(m[0], m[2])).div(total).to_f64(),
        side.mul(pair_norm(m[0], m[1])).div(total).to_f64(),
    ]
}

/// Three-body phase angles from the center-of-mass coordinates of the
/// initial configuration, computed in double-double and collapsed to
/// f64 only for the final `atan2`.
pub fn dd_three_body_phases(m: [f64; 3]) -> [f64; 3] {
    let total = Dd::new(m[0]).add(Dd::new(m[1])).add(Dd::new(m[2]));
    let half = Dd::new(0.5);
    let h = Dd::new(3.0).sqrt().mul(half);
    let coords = [
        (
            h.mul(Dd::new(m[1]).add(Dd::new(m[2]))),
            half.mul(Dd::new(m[2]).sub(Dd::new(m[1]))),
        ),
        (
            h.mul(Dd::new(m[0])).neg(),
            half.mul(Dd::new(m[0])).add(Dd::new(m[2])),
        ),
        (
            h.mul(Dd::new(m[0])).neg(),
            half.mul(Dd::new(m[0])).add(Dd::new(m[1])).neg(),
        ),
    ];
    coords.map(|(x, y)| {
        let x = x.div(total).to_f64();
        let y = y.div(total).to_f64();
        let angle = y.atan2(x);
        if angle < 0.0 {
            angle + std::f64::consts::TAU
        } else {
            angle
        }
    })
}

pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn dd_arithmetic_is_high_precision() {
        // cbrt(2)³ - 2 should vanish to double-double precision.
        let c = Dd::new(2.0).cbrt();
        let residual = c.mul(c).mul(c).sub(Dd::new(2.0));
        assert!(residual.to_f64().abs() < 1e-30, "{:?}", residual);

        let s = Dd::new(2.0).sqrt();
        let residual = s.mul(s).sub(Dd::new(2.0));
        assert!(residual.to_f64().abs() < 1e-30);

        // Division: (1/3)·3 - 1 vanishes beyond f64 precision.
        let third = Dd::new(1.0).div(Dd::new(3.0));
        let residual = third.mul(Dd::new(3.0)).sub(Dd::new(1.0));
        assert!(residual.to_f64().abs() < 1e-30);

        // π² to double-double accuracy.
        let pi2 = Dd::PI.mul(Dd::PI);
        assert!((pi2.to_f64() - 9.869604401089358).abs() < 1e-15);
    }
}
