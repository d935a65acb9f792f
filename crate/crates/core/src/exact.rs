//! Exact rational scalars and the geometric predicates built on them.

use std::cmp::Ordering;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational scalar.
pub type Q = BigRational;
/// Exact point in the plane.
pub type Point2 = [Q; 2];
/// Exact point in 3-space.
pub type Point3 = [Q; 3];

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn p2_to_f64(p: &Point2) -> [f64; 2] {
    [to_f64(&p[0]), to_f64(&p[1])]
}

pub fn p3_to_f64(p: &Point3) -> [f64; 3] {
    [to_f64(&p[0]), to_f64(&p[1]), to_f64(&p[2])]
}

/// Converts a finite float to the rational it represents exactly.
pub fn from_f64_exact(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Parses a decimal literal (`-12`, `0.25`, `1.5e-3`) or a fraction (`3/7`) losslessly.
pub fn parse_rational(text: &str) -> Result<Q, Error> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Q::from_integer(BigInt::from_str(&all_digits).map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = Q::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if negative { -value } else { value })
}

/// Sign of a rational as -1, 0 or 1.
pub fn sign(x: &Q) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn sub2(a: &Point2, b: &Point2) -> Point2 {
    [&a[0] - &b[0], &a[1] - &b[1]]
}

pub fn sub3(a: &Point3, b: &Point3) -> Point3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

pub fn cross3(a: &Point3, b: &Point3) -> Point3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub fn dot3(a: &Point3, b: &Point3) -> Q {
    sum_of_products(a.iter().zip(b))
}

/// Homogeneous integer form (x, y, w) of a rational point, with w > 0.
fn homogeneous(p: &Point2) -> [BigInt; 3] {
    let (dx, dy) = (p[0].denom(), p[1].denom());
    [p[0].numer() * dy, p[1].numer() * dx, dx * dy]
}

/// Integer determinant of three homogeneous points; has the sign of the orientation.
fn det_homogeneous(a: &[BigInt; 3], b: &[BigInt; 3], c: &[BigInt; 3]) -> BigInt {
    &a[0] * (&b[1] * &c[2] - &c[1] * &b[2]) - &b[0] * (&a[1] * &c[2] - &c[1] * &a[2]) + &c[0] * (&a[1] * &b[2] - &b[1] * &a[2])
}

/// Twice the signed area of (a, b, c); positive for counter-clockwise.
pub fn orient2d_value(a: &Point2, b: &Point2, c: &Point2) -> Q {
    let (ha, hb, hc) = (homogeneous(a), homogeneous(b), homogeneous(c));
    let w = &ha[2] * &hb[2] * &hc[2];
    Q::new(det_homogeneous(&ha, &hb, &hc), w)
}

pub fn orient2d(a: &Point2, b: &Point2, c: &Point2) -> i32 {
    match det_homogeneous(&homogeneous(a), &homogeneous(b), &homogeneous(c)).sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
    }
}

/// Six times the signed volume of (a, b, c, d); positive when d lies on the side
/// of plane (a, b, c) that the right-hand normal (b - a) x (c - a) points to.
pub fn orient3d_value(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> Q {
    let n = cross3(&sub3(b, a), &sub3(c, a));
    dot3(&n, &sub3(d, a))
}

pub fn orient3d(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> i32 {
    sign(&orient3d_value(a, b, c, d))
}

/// Positive when d lies strictly inside the circle through the counter-clockwise triangle (a, b, c).
pub fn incircle(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> i32 {
    let ad = sub2(a, d);
    let bd = sub2(b, d);
    let cd = sub2(c, d);
    let al = &ad[0] * &ad[0] + &ad[1] * &ad[1];
    let bl = &bd[0] * &bd[0] + &bd[1] * &bd[1];
    let cl = &cd[0] * &cd[0] + &cd[1] * &cd[1];
    let det = &al * (&bd[0] * &cd[1] - &bd[1] * &cd[0]) - &bl * (&ad[0] * &cd[1] - &ad[1] * &cd[0])
        + &cl * (&ad[0] * &bd[1] - &ad[1] * &bd[0]);
    sign(&det)
}

/// Orientation sign from float approximations of the points, when the rounding
/// error bound settles it. Inputs may carry a few ulps of conversion error.
pub fn orient2d_f64(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<i32> {
    let l = (b[0] - a[0]) * (c[1] - a[1]);
    let r = (b[1] - a[1]) * (c[0] - a[0]);
    let det = l - r;
    let permanent = (b[0].abs() + a[0].abs()) * (c[1].abs() + a[1].abs()) + (b[1].abs() + a[1].abs()) * (c[0].abs() + a[0].abs());
    let bound = 1e-13 * permanent;
    if !det.is_finite() || !bound.is_finite() {
        return None;
    }
    if det > bound {
        Some(1)
    } else if det < -bound {
        Some(-1)
    } else {
        None
    }
}

/// Float filter for `incircle`, same contract as `orient2d_f64`.
pub fn incircle_f64(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<i32> {
    let ad = [a[0] - d[0], a[1] - d[1]];
    let bd = [b[0] - d[0], b[1] - d[1]];
    let cd = [c[0] - d[0], c[1] - d[1]];
    let m = |p: [f64; 2]| [p[0].abs() + d[0].abs(), p[1].abs() + d[1].abs()];
    let (am, bm, cm) = (m(a), m(b), m(c));
    let al = ad[0] * ad[0] + ad[1] * ad[1];
    let bl = bd[0] * bd[0] + bd[1] * bd[1];
    let cl = cd[0] * cd[0] + cd[1] * cd[1];
    let det = al * (bd[0] * cd[1] - bd[1] * cd[0]) - bl * (ad[0] * cd[1] - ad[1] * cd[0]) + cl * (ad[0] * bd[1] - ad[1] * bd[0]);
    let alm = am[0] * am[0] + am[1] * am[1];
    let blm = bm[0] * bm[0] + bm[1] * bm[1];
    let clm = cm[0] * cm[0] + cm[1] * cm[1];
    let permanent = alm * (bm[0] * cm[1] + bm[1] * cm[0]) + blm * (am[0] * cm[1] + am[1] * cm[0]) + clm * (am[0] * bm[1] + am[1] * bm[0]);
    let bound = 1e-12 * permanent;
    if !det.is_finite() || !bound.is_finite() {
        return None;
    }
    if det > bound {
        Some(1)
    } else if det < -bound {
        Some(-1)
    } else {
        None
    }
}

/// Closed-triangle membership in the plane (boundary counts as inside). Degenerate
/// triangles contain nothing.
pub fn point_in_triangle2(p: &Point2, a: &Point2, b: &Point2, c: &Point2) -> bool {
    let o = orient2d(a, b, c);
    if o == 0 {
        return false;
    }
    let s0 = orient2d(a, b, p) * o;
    let s1 = orient2d(b, c, p) * o;
    let s2 = orient2d(c, a, p) * o;
    s0 >= 0 && s1 >= 0 && s2 >= 0
}

/// Barycentric coordinates of p with respect to the non-degenerate planar triangle (a, b, c).
pub fn barycentric2(p: &Point2, a: &Point2, b: &Point2, c: &Point2) -> Option<[Q; 3]> {
    let (hp, ha, hb, hc) = (homogeneous(p), homogeneous(a), homogeneous(b), homogeneous(c));
    let area = det_homogeneous(&ha, &hb, &hc);
    if area.is_zero() {
        return None;
    }
    // Each weight is a ratio of determinants with one point replaced by p.
    let d = &area * &hp[2];
    Some([
        Q::new(det_homogeneous(&hp, &hb, &hc) * &ha[2], d.clone()),
        Q::new(det_homogeneous(&ha, &hp, &hc) * &hb[2], d.clone()),
        Q::new(det_homogeneous(&ha, &hb, &hp) * &hc[2], d),
    ])
}

/// Barycentric coordinates of p with respect to the 3d triangle (a, b, c), provided p
/// lies in its plane; `None` if off-plane or degenerate.
pub fn barycentric3(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> Option<[Q; 3]> {
    let n = cross3(&sub3(b, a), &sub3(c, a));
    if !dot3(&n, &sub3(p, a)).is_zero() {
        return None;
    }
    // Project along the dominant normal axis.
    let axis = (0..3)
        .max_by(|&i, &j| n[i].abs().cmp(&n[j].abs()))
        .unwrap_or(2);
    if n[axis].is_zero() {
        return None;
    }
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let proj = |x: &Point3| -> Point2 { [x[u].clone(), x[v].clone()] };
    barycentric2(&proj(p), &proj(a), &proj(b), &proj(c))
}

/// Σ x_i y_i over a common denominator, reduced once at the end.
pub fn sum_of_products<'a>(terms: impl IntoIterator<Item = (&'a Q, &'a Q)>) -> Q {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for (x, y) in terms {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let (n, d) = (x.numer() * y.numer(), x.denom() * y.denom());
        if d == den {
            num += n;
        } else {
            num = num * &d + n * &den;
            den *= d;
        }
    }
    Q::new(num, den)
}

/// Affine combination Σ w_i p_i of 3d points.
pub fn combine3(weights: &[Q; 3], pts: [&Point3; 3]) -> Point3 {
    [0, 1, 2].map(|k| sum_of_products((0..3).map(|i| (&weights[i], &pts[i][k]))))
}

pub fn combine2(weights: &[Q; 3], pts: [&Point2; 3]) -> Point2 {
    [0, 1].map(|k| sum_of_products((0..3).map(|i| (&weights[i], &pts[i][k]))))
}

/// Lexicographic order on planar points.
pub fn lex_cmp2(a: &Point2, b: &Point2) -> Ordering {
    a[0].cmp(&b[0]).then_with(|| a[1].cmp(&b[1]))
}

/// Intersection of two closed segments that are not collinear-overlapping.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentIntersection {
    None,
    Point(Point2),
    /// The segments are collinear and share more than one point.
    Overlap,
}

pub fn segment_intersection(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> SegmentIntersection {
    let d1 = orient2d(a, b, c);
    let d2 = orient2d(a, b, d);
    let d3 = orient2d(c, d, a);
    let d4 = orient2d(c, d, b);
    if d1 == 0 && d2 == 0 {
        // Collinear: project on the dominant axis.
        let axis = if a[0] != b[0] { 0 } else { 1 };
        let (lo1, hi1) = minmax(&a[axis], &b[axis]);
        let (lo2, hi2) = minmax(&c[axis], &d[axis]);
        let lo = if lo1 > lo2 { lo1 } else { lo2 };
        let hi = if hi1 < hi2 { hi1 } else { hi2 };
        return match lo.cmp(hi) {
            Ordering::Greater => SegmentIntersection::None,
            Ordering::Equal => {
                let p = [a, b, c, d].into_iter().find(|p| &p[axis] == lo).cloned().unwrap();
                SegmentIntersection::Point(p)
            }
            Ordering::Less => SegmentIntersection::Overlap,
        };
    }
    if d1 * d2 > 0 || d3 * d4 > 0 {
        return SegmentIntersection::None;
    }
    if d1 == 0 {
        return SegmentIntersection::Point(c.clone());
    }
    if d2 == 0 {
        return SegmentIntersection::Point(d.clone());
    }
    if d3 == 0 {
        return SegmentIntersection::Point(a.clone());
    }
    if d4 == 0 {
        return SegmentIntersection::Point(b.clone());
    }
    // Proper crossing: a + t (b - a) with t = orient(c, d, a) / (orient(c, d, a) - orient(c, d, b)).
    let oa = orient2d_value(c, d, a);
    let ob = orient2d_value(c, d, b);
    let t = &oa / (&oa - &ob);
    SegmentIntersection::Point([&a[0] + &t * (&b[0] - &a[0]), &a[1] + &t * (&b[1] - &a[1])])
}

fn minmax<'a>(x: &'a Q, y: &'a Q) -> (&'a Q, &'a Q) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_losslessly() {
        assert_eq!(parse_rational("0.1").unwrap(), q_frac(1, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), q_frac(-5, 4));
        assert_eq!(parse_rational("3e2").unwrap(), q(300));
        assert_eq!(parse_rational("1.5E-3").unwrap(), q_frac(3, 2000));
        assert_eq!(parse_rational("2/6").unwrap(), q_frac(1, 3));
        assert_eq!(parse_rational(".5").unwrap(), q_frac(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn float_filters_agree_or_abstain() {
        let pts: Vec<[i64; 2]> = vec![[0, 0], [3, 1], [1, 4], [2, 2], [6, 2], [-5, 7], [4, 4]];
        let exact_pts: Vec<Point2> = pts.iter().map(|p| [q(p[0]), q(p[1])]).collect();
        let f: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] as f64, p[1] as f64]).collect();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                for k in 0..pts.len() {
                    if let Some(s) = orient2d_f64(f[i], f[j], f[k]) {
                        assert_eq!(s, orient2d(&exact_pts[i], &exact_pts[j], &exact_pts[k]));
                    }
                    if let Some(s) = incircle_f64(f[0], f[i], f[j], f[k]) {
                        assert_eq!(s, incircle(&exact_pts[0], &exact_pts[i], &exact_pts[j], &exact_pts[k]));
                    }
                }
            }
        }
        assert_eq!(orient2d_f64(f[0], f[3], f[6]), None);
        assert_eq!(orient2d_f64(f[0], f[1], f[2]), Some(1));
    }

    #[test]
    fn orientation_and_incircle() {
        let a = [q(0), q(0)];
        let b = [q(1), q(0)];
        let c = [q(0), q(1)];
        assert_eq!(orient2d(&a, &b, &c), 1);
        assert_eq!(orient2d(&a, &c, &b), -1);
        assert_eq!(orient2d(&a, &b, &[q(2), q(0)]), 0);
        assert_eq!(incircle(&a, &b, &c, &[q_frac(1, 4), q_frac(1, 4)]), 1);
        assert_eq!(incircle(&a, &b, &c, &[q(1), q(1)]), 0);
        assert_eq!(incircle(&a, &b, &c, &[q(2), q(2)]), -1);
    }

    #[test]
    fn crossing_diagonals_meet_at_center() {
        let r = segment_intersection(&[q(0), q(0)], &[q(2), q(2)], &[q(0), q(2)], &[q(2), q(0)]);
        assert_eq!(r, SegmentIntersection::Point([q(1), q(1)]));
        let r = segment_intersection(&[q(0), q(0)], &[q(2), q(0)], &[q(1), q(0)], &[q(3), q(0)]);
        assert_eq!(r, SegmentIntersection::Overlap);
        let r = segment_intersection(&[q(0), q(0)], &[q(1), q(0)], &[q(1), q(0)], &[q(3), q(0)]);
        assert_eq!(r, SegmentIntersection::Point([q(1), q(0)]));
        let r = segment_intersection(&[q(0), q(0)], &[q(1), q(0)], &[q(0), q(1)], &[q(1), q(1)]);
        assert_eq!(r, SegmentIntersection::None);
    }

    #[test]
    fn barycentric_in_3d_plane() {
        let a = [q(0), q(0), q(0)];
        let b = [q(4), q(0), q(0)];
        let c = [q(0), q(4), q(0)];
        let p = [q(1), q(1), q(0)];
        let l = barycentric3(&p, &a, &b, &c).unwrap();
        assert_eq!(l, [q_frac(1, 2), q_frac(1, 4), q_frac(1, 4)]);
        assert!(barycentric3(&[q(1), q(1), q(1)], &a, &b, &c).is_none());
    }
}
