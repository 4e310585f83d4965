//! The group `U ⋊ L` for class-2 `U` and unipotent Levi elements, and the
//! closed form of `g^q` for the short-root system.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::RingModulus;
use crate::nilpotent::LieValue;
use crate::systems::{LeviFamily, NilpotentSystem};

/// `(exp(u), [[1, l], [0, 1]])` in log coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub levi: u64,
    pub u: LieValue,
}

impl GroupElement {
    pub fn identity(m_a: usize) -> Self {
        GroupElement { levi: 0, u: LieValue::zero(m_a) }
    }

    pub fn is_identity(&self) -> bool {
        self.levi == 0 && self.u.is_zero()
    }
}

/// `u + v + [u, v] / 2`, exact in class 2.
pub fn bch_multiply(sys: &NilpotentSystem, u: &LieValue, v: &LieValue) -> LieValue {
    let m = sys.modulus();
    let mut out = u.add(v, m);
    let br = sys.bracket_value(&u.ad, &v.ad);
    out.z = m.add(out.z, m.mul(m.half(), br));
    out
}

fn act(sys: &NilpotentSystem, l: u64, u: &LieValue) -> Result<LieValue> {
    let m = sys.modulus();
    let (a, z) = sys.levi_action(l)?;
    Ok(LieValue { ad: a.mul_vec(&u.ad, m), z: m.mul(z, u.z) })
}

pub fn semidirect_multiply(sys: &NilpotentSystem, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    let m = sys.modulus();
    let moved = act(sys, g.levi, &h.u)?;
    Ok(GroupElement { levi: m.add(g.levi, h.levi), u: bch_multiply(sys, &g.u, &moved) })
}

/// `g^-1 = (-phi(-l) u, -l)`.
pub fn inverse(sys: &NilpotentSystem, g: &GroupElement) -> Result<GroupElement> {
    let m = sys.modulus();
    let neg_l = m.neg(g.levi);
    Ok(GroupElement { levi: neg_l, u: act(sys, neg_l, &g.u)?.neg(m) })
}

/// `g^q` by square-and-multiply.
pub fn power_iterated(sys: &NilpotentSystem, g: &GroupElement, mut q: u64) -> Result<GroupElement> {
    let mut acc = GroupElement::identity(sys.m_a());
    let mut base = g.clone();
    while q > 0 {
        if q & 1 == 1 {
            acc = semidirect_multiply(sys, &acc, &base)?;
        }
        q >>= 1;
        if q > 0 {
            base = semidirect_multiply(sys, &base, &base)?;
        }
    }
    Ok(acc)
}

/// Coordinates `(l; u0, u1, u2, u3; u4)` in which the closed form for `g^q`
/// is written.
///
/// With monomial-basis coordinates `a` and centre coordinate `z` of the
/// short-root system, `u = (-3 a3, a2, a1, 3 a0)` and `u4 = 3 z / b12`.
/// In these coordinates the Levi element acts by
/// `(u0, u1 - l u0, u2 + 2 l u1 - l^2 u0, u3 + 3 l u2 + 3 l^2 u1 - l^3 u0)`
/// and the bracket is `-(u0 v3 - u3 v0) - 3 (u1 v2 - u2 v1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortRootCoords {
    pub l: u64,
    pub u: [u64; 4],
    pub u4: u64,
}

fn short_root_b12(sys: &NilpotentSystem) -> Result<u64> {
    if sys.levi_family() != Some(LeviFamily::SymPower { k: 3 }) || sys.m_a() != 4 {
        return invalid("coordinates are defined for the short-root system only");
    }
    let m = sys.modulus();
    if m.p() == 3 {
        return invalid("the coordinate change needs 3 to be invertible");
    }
    Ok(sys.bracket().get(1, 2))
}

impl ShortRootCoords {
    pub fn from_element(sys: &NilpotentSystem, g: &GroupElement) -> Result<Self> {
        let b12 = short_root_b12(sys)?;
        let m = sys.modulus();
        let a = &g.u.ad;
        let three = 3 % m.order();
        let b12_inv = m.inv(b12).expect("b12 is a unit");
        Ok(ShortRootCoords {
            l: g.levi,
            u: [m.neg(m.mul(three, a[3])), a[2], a[1], m.mul(three, a[0])],
            u4: m.mul(m.mul(three, b12_inv), g.u.z),
        })
    }

    pub fn to_element(&self, sys: &NilpotentSystem) -> Result<GroupElement> {
        let b12 = short_root_b12(sys)?;
        let m = sys.modulus();
        let third = m.inv(3).expect("3 is a unit");
        let u = &self.u;
        Ok(GroupElement {
            levi: self.l,
            u: LieValue {
                ad: vec![m.mul(third, u[3]), u[2], u[1], m.neg(m.mul(third, u[0]))],
                z: m.mul(m.mul(b12, third), self.u4),
            },
        })
    }
}

/// Reduces the rational number `num / den` into the ring; the reduced
/// denominator must be prime to `p`.
fn rational(num: &BigInt, den: i64, m: &RingModulus) -> Result<u64> {
    let den = BigInt::from(den);
    let g = num.gcd(&den);
    let (mut n, mut d) = if g.is_zero() { (BigInt::zero(), BigInt::one()) } else { (num / &g, &den / &g) };
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    let order = BigInt::from(m.order());
    let n_res = n.mod_floor(&order).to_u64().expect("reduced below the modulus");
    let d_res = d.mod_floor(&order).to_u64().expect("reduced below the modulus");
    match m.inv(d_res) {
        Some(inv) => Ok(m.mul(n_res, inv)),
        None => invalid(format!("coefficient denominator {d} is not invertible mod {}", m.p())),
    }
}

/// Closed-form `g^q` in [`ShortRootCoords`].
pub fn power_closed_form(m: &RingModulus, g: &ShortRootCoords, q: u64) -> Result<ShortRootCoords> {
    if q < 1 {
        return invalid("q must be at least 1");
    }
    let qb = BigInt::from(q);
    let one = BigInt::one();
    let q1 = &qb - &one;
    let qp1 = &qb + &one;
    let two_q1 = BigInt::from(2) * &qb - &one;
    let c = |num: BigInt, den: i64| rational(&num, den, m);

    // Coefficient polynomials in q.
    let c_q = c(qb.clone(), 1)?;
    let c_a1 = c(-(&qb * &q1), 2)?;
    let c_a2_0 = c(-(&qb * &q1 * &two_q1), 6)?;
    let c_a2_1 = c(&qb * &q1, 1)?;
    let c_a3_0 = c(-(&qb * &qb * &q1 * &q1), 4)?;
    let c_a3_1 = c(&qb * &q1 * &two_q1, 2)?;
    let c_a3_2 = c(BigInt::from(3) * &qb * &q1, 2)?;
    let c_z_0 = c(&q1 * &qb * &qp1 * (BigInt::from(3) * &qb * &qb - BigInt::from(2)), 120)?;
    let c_z_1 = c(-(&q1 * &qb * &qp1), 2)?;

    let [u0, u1, u2, u3] = g.u;
    let l = g.l;
    let l2 = m.mul(l, l);
    let l3 = m.mul(l2, l);
    let mul = |a: u64, b: u64| m.mul(a, b);
    let sum = |xs: &[u64]| xs.iter().fold(0, |acc, &x| m.add(acc, x));

    let v0 = mul(c_q, u0);
    let v1 = sum(&[mul(c_a1, mul(u0, l)), mul(c_q, u1)]);
    let v2 = sum(&[mul(c_a2_0, mul(u0, l2)), mul(c_a2_1, mul(u1, l)), mul(c_q, u2)]);
    let v3 = sum(&[mul(c_a3_0, mul(u0, l3)), mul(c_a3_1, mul(u1, l2)), mul(c_a3_2, mul(u2, l)), mul(c_q, u3)]);
    let sq = m.add(mul(u1, u1), mul(u0, u2));
    let v4 = sum(&[mul(c_q, g.u4), mul(c_z_0, mul(mul(u0, u0), l3)), mul(c_z_1, mul(sq, l))]);
    Ok(ShortRootCoords { l: mul(c_q, l), u: [v0, v1, v2, v3], u4: v4 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{g2_short_root_default, LeviData};

    fn sys(p: u64, s: u32) -> NilpotentSystem {
        let m = RingModulus::new(p, s).unwrap();
        g2_short_root_default(&LeviData::trivial(m, 4)).unwrap()
    }

    fn element(sys: &NilpotentSystem, vals: [i64; 6]) -> GroupElement {
        let m = sys.modulus();
        GroupElement {
            levi: m.reduce_i64(vals[0]),
            u: LieValue { ad: vals[1..5].iter().map(|&x| m.reduce_i64(x)).collect(), z: m.reduce_i64(vals[5]) },
        }
    }

    #[test]
    fn group_laws() {
        let s = sys(7, 3);
        let g = element(&s, [3, 1, 4, 1, 5, 9]);
        let h = element(&s, [2, 6, 5, 3, 5, 8]);
        let k = element(&s, [9, 7, 9, 3, 2, 3]);
        let e = GroupElement::identity(4);
        assert_eq!(semidirect_multiply(&s, &g, &e).unwrap(), g);
        let gi = inverse(&s, &g).unwrap();
        assert!(semidirect_multiply(&s, &g, &gi).unwrap().is_identity());
        let left = semidirect_multiply(&s, &semidirect_multiply(&s, &g, &h).unwrap(), &k).unwrap();
        let right = semidirect_multiply(&s, &g, &semidirect_multiply(&s, &h, &k).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn closed_form_matches_iteration() {
        let s = sys(7, 3);
        let m = *s.modulus();
        let g = element(&s, [3, 1, 4, 1, 5, 9]);
        let coords = ShortRootCoords::from_element(&s, &g).unwrap();
        assert_eq!(coords.to_element(&s).unwrap(), g);
        for q in 1..40 {
            let iter = ShortRootCoords::from_element(&s, &power_iterated(&s, &g, q).unwrap()).unwrap();
            assert_eq!(power_closed_form(&m, &coords, q).unwrap(), iter, "q = {q}");
        }
    }

    #[test]
    fn second_power_coordinate() {
        let m = RingModulus::new(11, 2).unwrap();
        let g = ShortRootCoords { l: 5, u: [7, 3, 0, 0], u4: 0 };
        let sq = power_closed_form(&m, &g, 2).unwrap();
        assert_eq!(sq.u[1], m.reduce_i64(-7 * 5 + 2 * 3));
        assert_eq!(power_closed_form(&m, &g, 1).unwrap(), g);
        assert!(power_closed_form(&m, &g, 0).is_err());
    }

    #[test]
    fn half_integral_coefficient() {
        let m = RingModulus::new(5, 1).unwrap();
        // (q - 1) q (q + 1) (3 q^2 - 2) at q = 2
        let num = BigInt::from(60);
        assert_eq!(rational(&num, 120, &m).unwrap(), m.half());
    }
}
