#![allow(dead_code)]

use std::collections::HashMap;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use refinable::{parse_problem, Problem};

pub const HAAR: &str = include_str!("../../../../problems/haar.json");
pub const D4: &str = include_str!("../../../../problems/d4.json");
pub const HAT: &str = include_str!("../../../../problems/hat.json");
pub const QUINCUNX: &str = include_str!("../../../../problems/quincunx.json");
pub const JORDAN_BOX: &str = include_str!("../../../../problems/jordan_box.json");
pub const COMPANION: &str = include_str!("../../../../problems/companion.json");
pub const TWIN_DRAGON: &str = include_str!("../../../../problems/twin_dragon.json");
pub const ROTATION_THREE: &str = include_str!("../../../../problems/rotation_three.json");
pub const DIAGONAL: &str = include_str!("../../../../problems/diagonal.json");

pub fn load(source: &str) -> Problem {
    parse_problem(source).expect("fixture parses")
}

pub fn all_fixtures() -> Vec<(&'static str, Problem)> {
    [
        ("haar", HAAR),
        ("d4", D4),
        ("hat", HAT),
        ("quincunx", QUINCUNX),
        ("jordan_box", JORDAN_BOX),
        ("companion", COMPANION),
        ("twin_dragon", TWIN_DRAGON),
        ("rotation_three", ROTATION_THREE),
        ("diagonal", DIAGONAL),
    ]
    .into_iter()
    .map(|(n, s)| (n, load(s)))
    .collect()
}

/// The four problems of the containment suite.
pub fn containment_fixtures() -> Vec<(&'static str, Problem)> {
    [
        ("haar", HAAR),
        ("d4", D4),
        ("quincunx", QUINCUNX),
        ("jordan_box", JORDAN_BOX),
    ]
    .into_iter()
    .map(|(n, s)| (n, load(s)))
    .collect()
}

/// `a + b√3` with rational `a`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sqrt3 {
    a: BigRational,
    b: BigRational,
}

impl Sqrt3 {
    fn new(a: (i64, i64), b: (i64, i64)) -> Self {
        let r = |(n, d): (i64, i64)| BigRational::new(BigInt::from(n), BigInt::from(d));
        Self { a: r(a), b: r(b) }
    }

    fn zero() -> Self {
        Self {
            a: BigRational::zero(),
            b: BigRational::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap() + self.b.to_f64().unwrap() * 3f64.sqrt()
    }
}

impl Add for Sqrt3 {
    type Output = Sqrt3;
    fn add(self, o: Sqrt3) -> Sqrt3 {
        Sqrt3 {
            a: self.a + o.a,
            b: self.b + o.b,
        }
    }
}

impl Mul for &Sqrt3 {
    type Output = Sqrt3;
    fn mul(self, o: &Sqrt3) -> Sqrt3 {
        let three = BigRational::from_integer(BigInt::from(3));
        Sqrt3 {
            a: &self.a * &o.a + three * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

/// Exact values of the four-coefficient Daubechies function at dyadic
/// points, by the two-scale relation in `ℚ(√3)`.
pub struct D4Oracle {
    taps: Vec<Sqrt3>,
    memo: HashMap<(u32, i64), Sqrt3>,
}

impl Default for D4Oracle {
    fn default() -> Self {
        Self::new()
    }
}

impl D4Oracle {
    pub fn new() -> Self {
        // 2·c_q for c = ((1+√3), (3+√3), (3−√3), (1−√3)) / 8
        let taps = vec![
            Sqrt3::new((1, 4), (1, 4)),
            Sqrt3::new((3, 4), (1, 4)),
            Sqrt3::new((3, 4), (-1, 4)),
            Sqrt3::new((1, 4), (-1, 4)),
        ];
        Self {
            taps,
            memo: HashMap::new(),
        }
    }

    /// `φ(k / 2ʲ)`.
    pub fn exact(&mut self, mut j: u32, mut k: i64) -> Sqrt3 {
        while j > 0 && k % 2 == 0 {
            k /= 2;
            j -= 1;
        }
        if k <= 0 || k >= 3i64 << j {
            return Sqrt3::zero();
        }
        if j == 0 {
            return match k {
                1 => Sqrt3::new((1, 2), (1, 2)),
                2 => Sqrt3::new((1, 2), (-1, 2)),
                _ => unreachable!(),
            };
        }
        if let Some(v) = self.memo.get(&(j, k)) {
            return v.clone();
        }
        let half = 1i64 << (j - 1);
        let mut acc = Sqrt3::zero();
        for q in 0..4 {
            let v = self.exact(j - 1, k - q * half);
            acc = acc + &self.taps[q as usize] * &v;
        }
        self.memo.insert((j, k), acc.clone());
        acc
    }

    pub fn value(&mut self, j: u32, k: i64) -> f64 {
        self.exact(j, k).to_f64()
    }
}
